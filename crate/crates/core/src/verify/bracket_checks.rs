//! Windowed checks in the Poisson algebra: brackets among `η`, `ξ`, `τ±`
//! and the bilinear equations generated by the Hamiltonians `η_0`, `ξ_0`.
//!
//! Two-variable identities are compared coefficientwise: the coefficient of
//! `z^{-a} w^{-b}` (or `w^{-a} z^k` for the tau brackets) on each side is a
//! functional, and the formal delta functions and geometric sums become
//! finite sums over the stored modes.

use num_traits::One;

use super::{CheckConfig, IdentityId, Outcome, Window};
use crate::error::{Error, Result};
use crate::poisson::{
    AlphaPoly, Comparison, FieldSeries, Flow, PoissonAlgebra, Side, Sign, Trunc,
};
use crate::scalar::{pow, ParamPoint, SampleSpec, Scalar};
use crate::series::Coeff;

pub(crate) fn run(id: IdentityId, window: Window, config: &CheckConfig) -> Result<Outcome> {
    let mut sampler = config.sampler(id, 0);
    let p = super::sample_point(&mut sampler, 0, &SampleSpec::default(), |_| true)?;
    let cmp = check(id, &p, window)?;
    Ok(Outcome::windowed(&cmp, window, vec![p]))
}

/// The Poisson algebra of a window.
pub(crate) fn algebra(p: &ParamPoint, window: Window) -> Result<PoissonAlgebra> {
    if window.n_z > window.n_modes {
        return Err(Error::Argument(format!(
            "z-window {} exceeds the mode truncation {}",
            window.n_z, window.n_modes
        )));
    }
    PoissonAlgebra::new(&p.s, Trunc::new(window.n_modes, window.d_deg))
}

/// Coefficient of `z^d`; outside the stored range the true coefficient has
/// no monomial in storage, so it is zero there.
pub(crate) fn coef(alg: &PoissonAlgebra, f: &FieldSeries, d: i64) -> AlphaPoly {
    match f.get(d) {
        Some(c) => c.clone(),
        None => AlphaPoly::storage_zero(alg.trunc(), -d),
    }
}

pub(crate) fn check(id: IdentityId, p: &ParamPoint, window: Window) -> Result<Comparison> {
    let alg = algebra(p, window)?;
    let nz = window.n_z as i64;
    match id {
        IdentityId::EtaEta => {
            let eta = alg.build_eta(&p.eps)?;
            let c = |l: i64| alg.structure_constant(l);
            field_field(&alg, &eta, &eta, nz, c)
        }
        IdentityId::XiXi => {
            let xi = alg.build_xi(&p.eps)?;
            let q = alg.q().clone();
            let c = move |l: i64| {
                let v = pow(&q, -l.abs()) - Scalar::one();
                if l < 0 {
                    -v
                } else {
                    v
                }
            };
            field_field(&alg, &xi, &xi, nz, c)
        }
        IdentityId::EtaXi => eta_xi(&alg, p, nz),
        IdentityId::EtaTauMinus | IdentityId::EtaTauPlus | IdentityId::XiTauMinus | IdentityId::XiTauPlus => {
            field_tau(&alg, p, id, nz)
        }
        IdentityId::Eta0Xi0 => {
            let e0 = alg.zero_mode(&alg.build_eta(&p.eps)?);
            let x0 = alg.zero_mode(&alg.build_xi(&p.eps)?);
            let mut cmp = Comparison::new();
            cmp.absorb(&alg.bracket(&e0, &x0)?.cap());
            Ok(cmp)
        }
        IdentityId::HirotaT => hirota_t(&alg, p, nz),
        IdentityId::HirotaTb => hirota_tb(&alg, p, nz),
        IdentityId::Toda => toda(&alg, p, nz),
        IdentityId::TodaField => toda_field(&alg, p, nz),
        other => Err(Error::Argument(format!("{} is not a bracket identity", other.name()))),
    }
}

/// `{F(z), G(w)} = F(z) G(w) Σ_{l≠0} c_l (w/z)^l`: at `z^{-a} w^{-b}`,
/// `{F_a, G_b} = Σ_l c_l F_{a-l} G_{b+l}`.
fn field_field(
    alg: &PoissonAlgebra,
    f: &FieldSeries,
    g: &FieldSeries,
    nz: i64,
    c: impl Fn(i64) -> Scalar,
) -> Result<Comparison> {
    let n = alg.trunc().n_modes as i64;
    let mut cmp = Comparison::new();
    for a in -nz..=nz {
        let fa = coef(alg, f, -a);
        for b in -nz..=nz {
            let lhs = alg.bracket(&fa, &coef(alg, g, -b))?;
            let mut rhs = AlphaPoly::zero(alg.trunc());
            for l in -2 * n..=2 * n {
                if l == 0 || (a - l).abs() > n || (b + l).abs() > n {
                    continue;
                }
                let t = coef(alg, f, l - a).mul(&coef(alg, g, -b - l)).scale(&c(l));
                rhs = rhs.add(&t);
            }
            cmp.absorb(&lhs.sub(&rhs).cap());
        }
    }
    Ok(cmp)
}

/// `{η(z), ξ(w)} = δ(s w/z) A(z) - δ(w/(s z)) B(z)` with
/// `A = τ+(zq)τ+(z/q)/τ+(z)^2`, `B = τ-(zq)τ-(z/q)/τ-(z)^2`: at
/// `z^{-a} w^{-b}` the right side is `s^{-b} A_{-(a+b)} - s^{b} B_{-(a+b)}`.
fn eta_xi(alg: &PoissonAlgebra, p: &ParamPoint, nz: i64) -> Result<Comparison> {
    let eta = alg.build_eta(&p.eps)?;
    let xi = alg.build_xi(&p.eps)?;
    let (a_ser, b_ser) = tb_ratios(alg)?;
    let mut cmp = Comparison::new();
    for a in -nz..=nz {
        let ea = coef(alg, &eta, -a);
        for b in -nz..=nz {
            let lhs = alg.bracket(&ea, &coef(alg, &xi, -b))?;
            let k = -(a + b);
            let mut rhs = AlphaPoly::zero(alg.trunc());
            if k >= 0 {
                rhs = rhs.add(&coef(alg, &a_ser, k).scale(&pow(alg.s(), -b)));
            }
            if k <= 0 {
                rhs = rhs.sub(&coef(alg, &b_ser, k).scale(&pow(alg.s(), b)));
            }
            cmp.absorb(&lhs.sub(&rhs).cap());
        }
    }
    Ok(cmp)
}

/// `τ(zq)τ(z/q)/τ(z)^2` for `τ+` and `τ-`.
pub(crate) fn tb_ratios(alg: &PoissonAlgebra) -> Result<(FieldSeries, FieldSeries)> {
    let q = alg.q().clone();
    let ratio = |sign: Sign| -> Result<FieldSeries> {
        let t = alg.build_tau(sign)?;
        let inv = alg.finv(&t)?;
        let num = alg.fmul(&t.scale_var(&q), &t.scale_var(&q.recip()))?;
        alg.fmul(&num, &alg.fmul(&inv, &inv)?)
    };
    Ok((ratio(Sign::Plus)?, ratio(Sign::Minus)?))
}

/// Brackets of `η` or `ξ` with `τ±`, at `w^{-a} z^k`:
/// * `{η(w), τ-(z)} = η τ- Σ_{n>0} (w/z)^n`: `Σ_n η_{a+n} T_{k+n}`;
/// * `{η(w), τ+(z)} = -η τ+ Σ_{n>0} (z/w)^n`: `-Σ_n η_{a-n} U_{k-n}`;
/// * `{ξ(w), τ-(z)} = -ξ τ- Σ_{n>0} s^{-n} (w/z)^n`: `-Σ_n s^{-n} ξ_{a+n} T_{k+n}`;
/// * `{ξ(w), τ+(z)} = ξ τ+ Σ_{n>0} s^{-n} (z/w)^n`: `Σ_n s^{-n} ξ_{a-n} U_{k-n}`.
fn field_tau(alg: &PoissonAlgebra, p: &ParamPoint, id: IdentityId, nz: i64) -> Result<Comparison> {
    let n = alg.trunc().n_modes as i64;
    let (field, sign, weight, minus_sign): (FieldSeries, Sign, Box<dyn Fn(i64) -> Scalar>, bool) = match id {
        IdentityId::EtaTauMinus => (alg.build_eta(&p.eps)?, Sign::Minus, Box::new(|_| Scalar::one()), false),
        IdentityId::EtaTauPlus => (alg.build_eta(&p.eps)?, Sign::Plus, Box::new(|_| Scalar::one()), true),
        IdentityId::XiTauMinus => {
            let s = alg.s().clone();
            (alg.build_xi(&p.eps)?, Sign::Minus, Box::new(move |k| pow(&s, -k)), true)
        }
        _ => {
            let s = alg.s().clone();
            (alg.build_xi(&p.eps)?, Sign::Plus, Box::new(move |k| pow(&s, -k)), false)
        }
    };
    let tau = alg.build_tau(sign)?;
    let ks: Vec<i64> = match sign {
        Sign::Minus => (-nz..=0).collect(),
        Sign::Plus => (0..=nz).collect(),
    };
    let mut cmp = Comparison::new();
    for a in -nz..=nz {
        let fa = coef(alg, &field, -a);
        for &k in &ks {
            let lhs = alg.bracket(&fa, &coef(alg, &tau, k))?;
            let mut rhs = AlphaPoly::zero(alg.trunc());
            for m in 1..=2 * n {
                let (fi, ti) = match sign {
                    Sign::Minus => (a + m, k + m),
                    Sign::Plus => (a - m, k - m),
                };
                if fi.abs() > n || ti.abs() > n || (sign == Sign::Minus && ti > 0) || (sign == Sign::Plus && ti < 0) {
                    continue;
                }
                let t = coef(alg, &field, -fi).mul(&coef(alg, &tau, ti)).scale(&weight(m));
                rhs = rhs.add(&t);
            }
            if minus_sign {
                rhs = rhs.neg();
            }
            cmp.absorb(&lhs.sub(&rhs).cap());
        }
    }
    Ok(cmp)
}

fn compare_window(alg: &PoissonAlgebra, lhs: &FieldSeries, rhs: &FieldSeries, nz: i64) -> Result<Comparison> {
    let mut cmp = Comparison::new();
    for d in -nz..=nz {
        cmp.absorb(&coef(alg, lhs, d).sub(&coef(alg, rhs, d)).cap());
    }
    Ok(cmp)
}

/// `D_t τ-·τ+ = ε τ-(z/q) τ+(zq) - η_0 τ- τ+` with `∂_t = {η_0, ·}`.
fn hirota_t(alg: &PoissonAlgebra, p: &ParamPoint, nz: i64) -> Result<Comparison> {
    let q = alg.q().clone();
    let tm = alg.build_tau(Sign::Minus)?;
    let tp = alg.build_tau(Sign::Plus)?;
    let e0 = alg.zero_mode(&alg.build_eta(&p.eps)?);
    let lhs = alg.hirota_pair(&[(Flow::left(e0.clone()), 1)], &tm, &tp)?;
    let shifted = alg.fmul(&tm.scale_var(&q.recip()), &tp.scale_var(&q))?.scale(&p.eps);
    let plain = alg.fscale(&alg.fmul(&tm, &tp)?, &e0)?;
    let rhs = alg.fsub(&shifted, &plain)?;
    compare_window(alg, &lhs, &rhs, nz)
}

/// `D_t̄ τ-(z/s)·τ+(zs) = ε^{-1} τ-(zs) τ+(z/s) - ξ_0 τ-(z/s) τ+(zs)` with
/// `∂_t̄ = {·, ξ_0}`.
fn hirota_tb(alg: &PoissonAlgebra, p: &ParamPoint, nz: i64) -> Result<Comparison> {
    let s = alg.s().clone();
    let si = s.recip();
    let tm = alg.build_tau(Sign::Minus)?;
    let tp = alg.build_tau(Sign::Plus)?;
    let x0 = alg.zero_mode(&alg.build_xi(&p.eps)?);
    let f = tm.scale_var(&si);
    let g = tp.scale_var(&s);
    let lhs = alg.hirota_pair(&[(Flow::right(x0.clone()), 1)], &f, &g)?;
    let shifted = alg.fmul(&tm.scale_var(&s), &tp.scale_var(&si))?.scale(&p.eps.recip());
    let plain = alg.fscale(&alg.fmul(&f, &g)?, &x0)?;
    let rhs = alg.fsub(&shifted, &plain)?;
    compare_window(alg, &lhs, &rhs, nz)
}

/// `(1/2) D_t D_t̄ τ·τ + τ(zq) τ(z/q) - τ·τ = 0` for `τ+` and `τ-`.
fn toda(alg: &PoissonAlgebra, p: &ParamPoint, nz: i64) -> Result<Comparison> {
    let q = alg.q().clone();
    let e0 = alg.zero_mode(&alg.build_eta(&p.eps)?);
    let x0 = alg.zero_mode(&alg.build_xi(&p.eps)?);
    let mut cmp = Comparison::new();
    for sign in [Sign::Minus, Sign::Plus] {
        let t = alg.build_tau(sign)?;
        let d = alg.hirota_pair(&[(Flow::left(e0.clone()), 1), (Flow::right(x0.clone()), 1)], &t, &t)?;
        let half = d.scale(&Scalar::new(1.into(), 2.into()));
        let shifted = alg.fmul(&t.scale_var(&q), &t.scale_var(&q.recip()))?;
        let lhs = alg.fadd(&half, &shifted)?;
        let rhs = alg.fmul(&t, &t)?;
        cmp.merge(&compare_window(alg, &lhs, &rhs, nz)?);
    }
    Ok(cmp)
}

/// `∂_t ∂_t̄ φ± = e^{φ±(z) - φ±(z/q)} - e^{φ±(zq) - φ±(z)}`.
fn toda_field(alg: &PoissonAlgebra, p: &ParamPoint, nz: i64) -> Result<Comparison> {
    let q = alg.q().clone();
    let e0 = alg.zero_mode(&alg.build_eta(&p.eps)?);
    let x0 = alg.zero_mode(&alg.build_xi(&p.eps)?);
    let mut cmp = Comparison::new();
    for sign in [Sign::Minus, Sign::Plus] {
        let phi = alg.build_phi(sign)?;
        let lhs = alg.flow(&e0, &alg.flow(&x0, &phi, Side::Right)?, Side::Left)?;
        let e1 = alg.fexp(&alg.fsub(&phi, &phi.scale_var(&q.recip()))?)?;
        let e2 = alg.fexp(&alg.fsub(&phi.scale_var(&q), &phi)?)?;
        let rhs = alg.fsub(&e1, &e2)?;
        cmp.merge(&compare_window(alg, &lhs, &rhs, nz)?);
    }
    Ok(cmp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn point() -> ParamPoint {
        ParamPoint::new(rat(1, 2), rat(1, 8), vec![]).unwrap()
    }

    #[test]
    fn small_window_brackets() {
        let w = Window::new(2, 5, 4);
        for id in [
            IdentityId::EtaEta,
            IdentityId::XiXi,
            IdentityId::EtaXi,
            IdentityId::EtaTauMinus,
            IdentityId::EtaTauPlus,
            IdentityId::XiTauMinus,
            IdentityId::XiTauPlus,
            IdentityId::Eta0Xi0,
            IdentityId::HirotaT,
            IdentityId::HirotaTb,
            IdentityId::Toda,
            IdentityId::TodaField,
        ] {
            let c = check(id, &point(), w).unwrap();
            assert!(c.passed(), "{}: {c:?}", id.name());
            assert!(c.conclusive > 0, "{}", id.name());
        }
    }
}
