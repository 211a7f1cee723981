//! Exact checks on the specialized soliton tau functions: the shift lemma
//! defining `τ-`, the three Hirota-Miwa variants and the first three
//! bilinear equations of the `t` hierarchy.

use num_traits::{One, Zero};

use super::{sample_point, small_rational, CheckConfig, IdentityId, Outcome};
use crate::error::{Error, Result};
use crate::iom::closed_m;
use crate::scalar::{int, pow, rat, ParamPoint, SampleSpec, Scalar};
use crate::soliton::{
    d_factor, hirota_apply, interaction, make_tau_minus, make_tau_plus, poly_add, poly_max_abs,
    poly_scale, poly_sub, product, t_shift_factor, tbar_shift_factor, HirotaFactor, LaurentPoly,
    SolitonTau, Time,
};

pub(crate) fn run(id: IdentityId, config: &CheckConfig) -> Result<Outcome> {
    let mut points = Vec::new();
    let mut worst = Scalar::zero();
    for &n in &config.solitons {
        let mut sampler = config.sampler(id, n);
        let mut rng = config.rng(id, n as u64);
        for _ in 0..config.samples {
            let p = sample_point(&mut sampler, n, &SampleSpec::default(), |p| {
                make_tau_minus(p).is_ok()
            })?;
            let b: Vec<Scalar> = (0..n).map(|_| small_rational(&mut rng, 2, 5)).collect();
            // shift parameters avoiding every pole of the shifted amplitudes
            let (alpha, beta) = loop {
                let alpha = small_rational(&mut rng, 1, 8) / int(8);
                let beta = small_rational(&mut rng, 1, 8) / int(8);
                if admissible_shifts(&p, &alpha, &beta) {
                    break (alpha, beta);
                }
            };
            let r = residual(id, &p, &b, &alpha, &beta)?;
            let m = poly_max_abs(&r);
            if m > worst {
                worst = m;
            }
            points.push(p);
        }
    }
    Ok(Outcome::exact(worst, points))
}

fn admissible_shifts(p: &ParamPoint, alpha: &Scalar, beta: &Scalar) -> bool {
    if (Scalar::one() - alpha * beta).is_zero() {
        return false;
    }
    (0..p.n()).all(|k| {
        t_shift_factor(p, k, alpha).is_ok()
            && tbar_shift_factor(p, k, beta).is_ok()
            && d_factor(p, k, beta).is_ok()
    })
}

/// `LHS - RHS` of the identity at one sample.
pub(crate) fn residual(
    id: IdentityId,
    p: &ParamPoint,
    b: &[Scalar],
    alpha: &Scalar,
    beta: &Scalar,
) -> Result<LaurentPoly> {
    match id {
        IdentityId::TauShiftLemma => shift_lemma(p, b, beta),
        IdentityId::HmPm1 => hm_pm_1(p, b, alpha),
        IdentityId::HmPm2 => hm_pm_2(p, b, beta),
        IdentityId::Hm3 => {
            let plus = hm_3(&make_tau_plus(p)?, b, alpha, beta)?;
            let minus = hm_3(&make_tau_minus(p)?, b, alpha, beta)?;
            // both signs must vanish; report the larger residual
            Ok(if poly_max_abs(&plus) >= poly_max_abs(&minus) {
                plus
            } else {
                minus
            })
        }
        IdentityId::To1 => to_1(p, b),
        IdentityId::To2 => to_2(p, b),
        IdentityId::To3 => to_3(p, b),
        other => Err(Error::Argument(format!("{} is not a soliton identity", other.name()))),
    }
}

/// `τ+(z, t, t̄ - [β])` two ways: by shifting each amplitude, and as `z^n`
/// times a global factor times the reversed sum with coefficients `d_k(β)`.
fn shift_lemma(p: &ParamPoint, b: &[Scalar], beta: &Scalar) -> Result<LaurentPoly> {
    let n = p.n();
    let tp = make_tau_plus(p)?;
    let shifted = tp.miwa_shift(Time::TBar(1), beta, false)?.evaluate(b)?;

    // first form: explicit per-term factor (1 - β/a_k)/(1 - β/(q a_k))
    let mut first = tp.clone();
    for t in &mut first.terms {
        for k in t.members().collect::<Vec<_>>() {
            let a = &p.a[k];
            t.coeff *= (Scalar::one() - beta / a) / (Scalar::one() - beta / (&p.q * a));
        }
    }
    let first = first.evaluate(b)?;

    // second form
    let mut global = Scalar::one();
    for i in 0..n {
        for j in i + 1..n {
            global *= interaction(p, i, j)?;
        }
    }
    for (k, bk) in b.iter().enumerate().take(n) {
        let a = &p.a[k];
        global *= (Scalar::one() - beta / a) / (Scalar::one() - beta / (&p.q * a)) * bk;
    }
    let mut rev = make_tau_plus(p)?;
    rev.sign = crate::poisson::Sign::Minus;
    let d: Vec<Scalar> = (0..n).map(|k| d_factor(p, k, beta)).collect::<Result<_>>()?;
    for t in &mut rev.terms {
        for k in t.members().collect::<Vec<_>>() {
            t.coeff *= &d[k];
        }
    }
    let rev = rev.evaluate(b)?;
    let second: LaurentPoly = rev
        .iter()
        .map(|(e, c)| (e + n as i64, c * &global))
        .collect();
    let r1 = poly_sub(&shifted, &first);
    let r2 = poly_sub(&shifted, &second);
    Ok(if poly_max_abs(&r1) >= poly_max_abs(&r2) { r1 } else { r2 })
}

/// `∏_k (1 - x a_k)/(1 - x q a_k)` times `(1 - x q^n ε)`: the prefactor
/// of the first Hirota-Miwa variant.
fn hm_prefactor(p: &ParamPoint, alpha: &Scalar) -> Scalar {
    let mut c = Scalar::one() - alpha * pow(&p.q, p.n() as i64) * &p.eps;
    for a in &p.a {
        c *= (Scalar::one() - alpha * a) / (Scalar::one() - alpha * &p.q * a);
    }
    c
}

fn hm_pm_1(p: &ParamPoint, b: &[Scalar], alpha: &Scalar) -> Result<LaurentPoly> {
    let tm = make_tau_minus(p)?;
    let tp = make_tau_plus(p)?;
    let tm_a = tm.miwa_shift(Time::T(1), alpha, true)?;
    let tp_a = tp.miwa_shift(Time::T(1), alpha, true)?;
    let lhs = product(&tm_a, &tp, b)?;
    let r1 = poly_scale(&product(&tm, &tp_a, b)?, &hm_prefactor(p, alpha));
    let r2 = poly_scale(
        &product(&tm_a.scale_z(&p.q.recip()), &tp.scale_z(&p.q), b)?,
        &(alpha * &p.eps),
    );
    Ok(poly_sub(&lhs, &poly_add(&r1, &r2)))
}

fn hm_pm_2(p: &ParamPoint, b: &[Scalar], beta: &Scalar) -> Result<LaurentPoly> {
    let tm = make_tau_minus(p)?;
    let tp = make_tau_plus(p)?;
    let tm_b = tm.miwa_shift(Time::TBar(1), beta, true)?;
    let tp_b = tp.miwa_shift(Time::TBar(1), beta, true)?;
    let qi = p.q.recip();
    let lhs = product(&tm_b.scale_z(&qi), &tp, b)?;
    let mut pre = Scalar::one() - beta / (pow(&p.q, p.n() as i64) * &p.eps);
    for a in &p.a {
        pre *= (Scalar::one() - beta / a) / (Scalar::one() - beta / (&p.q * a));
    }
    let r1 = poly_scale(&product(&tm.scale_z(&qi), &tp_b, b)?, &pre);
    let r2 = poly_scale(&product(&tm_b, &tp.scale_z(&qi), b)?, &(beta / &p.eps));
    Ok(poly_sub(&lhs, &poly_add(&r1, &r2)))
}

fn hm_3(tau: &SolitonTau, b: &[Scalar], alpha: &Scalar, beta: &Scalar) -> Result<LaurentPoly> {
    let q = &tau.params.q;
    let ta = tau.miwa_shift(Time::T(1), alpha, true)?;
    let tb = tau.miwa_shift(Time::TBar(1), beta, true)?;
    let tab = ta.miwa_shift(Time::TBar(1), beta, true)?;
    let lhs = product(&ta, &tb, b)?;
    let r1 = poly_scale(&product(tau, &tab, b)?, &(Scalar::one() - alpha * beta));
    let r2 = poly_scale(
        &product(&ta.scale_z(&q.recip()), &tb.scale_z(q), b)?,
        &(alpha * beta),
    );
    Ok(poly_sub(&lhs, &poly_add(&r1, &r2)))
}

/// The pair `τ-(z/q)`, `τ+(zq)`.
fn shifted_pair(p: &ParamPoint) -> Result<(SolitonTau, SolitonTau)> {
    Ok((
        make_tau_minus(p)?.scale_z(&p.q.recip()),
        make_tau_plus(p)?.scale_z(&p.q),
    ))
}

fn hm(i: usize, p: &ParamPoint) -> Result<Scalar> {
    closed_m(i, p, false)
}

/// `(D_{t_1} + M_1) τ-·τ+ = ε τ-(z/q) τ+(zq)`.
fn to_1(p: &ParamPoint, b: &[Scalar]) -> Result<LaurentPoly> {
    let (tm, tp) = (make_tau_minus(p)?, make_tau_plus(p)?);
    let (sm, sp) = shifted_pair(p)?;
    let lhs = hirota_apply(&[HirotaFactor::shifted(Time::T(1), hm(1, p)?, 1)], &tm, &tp, b)?;
    let rhs = poly_scale(&product(&sm, &sp, b)?, &p.eps);
    Ok(poly_sub(&lhs, &rhs))
}

/// `(D_{t_2} + 2M_2) τ-·τ+ = ε (D_{t_1} + M_1) τ-(z/q)·τ+(zq)`.
fn to_2(p: &ParamPoint, b: &[Scalar]) -> Result<LaurentPoly> {
    let (tm, tp) = (make_tau_minus(p)?, make_tau_plus(p)?);
    let (sm, sp) = shifted_pair(p)?;
    let lhs = hirota_apply(
        &[HirotaFactor::shifted(Time::T(2), int(2) * hm(2, p)?, 1)],
        &tm,
        &tp,
        b,
    )?;
    let rhs = poly_scale(
        &hirota_apply(&[HirotaFactor::shifted(Time::T(1), hm(1, p)?, 1)], &sm, &sp, b)?,
        &p.eps,
    );
    Ok(poly_sub(&lhs, &rhs))
}

/// `(D_{t_3} + 3M_3) τ-·τ+ + (1/8)(D_{t_1} + M_1)^3 τ-·τ+
///   = (3/4) ε (D_{t_2} + 2M_2) τ-(z/q)·τ+(zq) + (3/8) ε (D_{t_1} + M_1)^2 τ-(z/q)·τ+(zq)`.
fn to_3(p: &ParamPoint, b: &[Scalar]) -> Result<LaurentPoly> {
    let (tm, tp) = (make_tau_minus(p)?, make_tau_plus(p)?);
    let (sm, sp) = shifted_pair(p)?;
    let m1 = hm(1, p)?;
    let m2 = hm(2, p)?;
    let m3 = hm(3, p)?;
    let d3 = hirota_apply(&[HirotaFactor::shifted(Time::T(3), int(3) * m3, 1)], &tm, &tp, b)?;
    let d1c = hirota_apply(&[HirotaFactor::shifted(Time::T(1), m1.clone(), 3)], &tm, &tp, b)?;
    let lhs = poly_add(&d3, &poly_scale(&d1c, &rat(1, 8)));
    let e2 = hirota_apply(&[HirotaFactor::shifted(Time::T(2), int(2) * m2, 1)], &sm, &sp, b)?;
    let e1 = hirota_apply(&[HirotaFactor::shifted(Time::T(1), m1, 2)], &sm, &sp, b)?;
    let rhs = poly_add(
        &poly_scale(&e2, &(rat(3, 4) * &p.eps)),
        &poly_scale(&e1, &(rat(3, 8) * &p.eps)),
    );
    Ok(poly_sub(&lhs, &rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(a: &[(i64, i64)]) -> ParamPoint {
        ParamPoint::new(rat(1, 2), rat(1, 9), a.iter().map(|&(m, d)| rat(m, d)).collect()).unwrap()
    }

    #[test]
    fn vacuum_to_1_is_trivial() {
        let p = point(&[]);
        let r = to_1(&p, &[]).unwrap();
        assert!(r.is_empty());
        // (D + eps) 1·1 = eps: M_1 = eps in the vacuum
        assert_eq!(hm(1, &p).unwrap(), p.eps);
    }

    #[test]
    fn identities_at_a_fixed_point() {
        let p = point(&[(1, 5), (-1, 7)]);
        let b = [rat(3, 2), rat(-2, 3)];
        let (alpha, beta) = (rat(1, 11), rat(-1, 13));
        for id in [
            IdentityId::TauShiftLemma,
            IdentityId::HmPm1,
            IdentityId::HmPm2,
            IdentityId::Hm3,
            IdentityId::To1,
            IdentityId::To2,
            IdentityId::To3,
        ] {
            let r = residual(id, &p, &b, &alpha, &beta).unwrap();
            assert!(r.is_empty(), "{}: {:?}", id.name(), r);
        }
    }

    #[test]
    fn wrong_d_factor_breaks_the_shift_lemma() {
        // multiplying d_k by a stray eps must be detected
        let p = point(&[(1, 5)]);
        let tp = make_tau_plus(&p).unwrap();
        let beta = rat(1, 7);
        let lhs = tp.miwa_shift(Time::TBar(1), &beta, false).unwrap().evaluate(&[int(1)]).unwrap();
        let d = d_factor(&p, 0, &beta).unwrap() * &p.eps;
        let a = &p.a[0];
        let g = (Scalar::one() - &beta / a) / (Scalar::one() - &beta / (&p.q * a));
        let mut rhs = LaurentPoly::new();
        rhs.insert(1, g.clone());
        rhs.insert(0, g * d);
        assert!(!poly_sub(&lhs, &rhs).is_empty());
    }
}
