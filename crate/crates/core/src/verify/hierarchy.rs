//! The `t_2`, `t_3` equations computed from the Hamiltonian side: the flows
//! `∂_{t_k} = {M_k, ·}` with `M_1 = η_0` and `M_2`, `M_3` given by their
//! kernel formulas as functionals of the `η` modes.
//!
//! Each lemma is checked multiplied through by its tau product, so no
//! series inverse enters. The two-variable constant terms reduce to the
//! series
//! * `X_1 = Σ_{i,j≥1} q^{i+j} η_i η_{j-i} z^{-j}`,
//! * `X_2 = Σ_{i,j≥1} q^{i+j} η_{-i} η_{i-j} z^j`,
//! * `X_3 = Σ_{i,j≥1} q^{i+j} η_i η_{-i-j} z^j`,
//! * `X_4 = Σ_{i,j≥1} q^{i+j} η_{-i} η_{i+j} z^{-j}`,
//!
//! from the geometric expansions of `q w_1/w_2 / (1 - q w_1/w_2)` and
//! friends. A mode `η_m` with `|m| > N` has no monomial in storage, and
//! neither has any product containing it, so these sums are finite.

use num_traits::One;

use super::bracket_checks::{algebra, coef};
use super::{CheckConfig, CheckReport, IdentityId, Outcome, Window};
use crate::error::{Error, Result};
use crate::iom::{m2_kernel, m3_kernel, Modes};
use crate::poisson::{AlphaPoly, Comparison, FieldSeries, Flow, PoissonAlgebra, Sign};
use crate::scalar::{int, pow, rat, ParamPoint, SampleSpec, Scalar};
use crate::series::Coeff;

const FAMILY: [IdentityId; 6] = [
    IdentityId::Lemma32,
    IdentityId::Lemma33,
    IdentityId::Lemma34,
    IdentityId::Lemma35,
    IdentityId::PropT2,
    IdentityId::PropT3,
];

pub(crate) fn run(id: IdentityId, window: Window, config: &CheckConfig) -> Result<Outcome> {
    let mut sampler = config.sampler(id, 0);
    let p = super::sample_point(&mut sampler, 0, &SampleSpec::default(), |_| true)?;
    let cmp = check(id, &p, window)?;
    Ok(Outcome::windowed(&cmp, window, vec![p]))
}

/// Runs one of `lemma-3-2 .. lemma-3-5`, `prop-t2`, `prop-t3` on `window`.
pub fn check_lemma_t3_family(id: IdentityId, window: Window, config: &CheckConfig) -> Result<CheckReport> {
    if !FAMILY.contains(&id) {
        return Err(Error::Argument(format!("{} is not a t_2/t_3 identity", id.name())));
    }
    let config = config.clone().with_window(window);
    Ok(super::run_check(id, &config))
}

/// Everything the lemmas are built from, on one window.
struct Hierarchy {
    alg: PoissonAlgebra,
    eps: Scalar,
    eta: FieldSeries,
    /// `τ_-(z)`, `τ_+(z)`.
    tm: FieldSeries,
    tp: FieldSeries,
    /// `τ_-(z/q)`, `τ_+(zq)`.
    sm: FieldSeries,
    sp: FieldSeries,
    /// `M_1`, `M_2`, `M_3`.
    m: [AlphaPoly; 3],
    /// `η_+(zq) + η_-(z/q)` and `η_+(zq) η_-(z/q)`.
    eta_sum: FieldSeries,
    eta_prod: FieldSeries,
    /// `X_1 + X_2 + X_3 + X_4` and `X_1 + X_2 - X_3 - X_4`, and `X_1 + X_2`.
    x_sym: FieldSeries,
    x_anti: FieldSeries,
    x12: FieldSeries,
}

impl Hierarchy {
    fn new(p: &ParamPoint, window: Window) -> Result<Hierarchy> {
        let alg = algebra(p, window)?;
        let q = alg.q().clone();
        let qi = q.recip();
        let n = alg.trunc().n_modes as i64;
        let eta = alg.build_eta(&p.eps)?;
        let tm = alg.build_tau(Sign::Minus)?;
        let tp = alg.build_tau(Sign::Plus)?;
        let (sm, sp) = (tm.scale_var(&qi), tp.scale_var(&q));

        // η_m is the coefficient of z^{-m}
        let mode = |m: i64| coef(&alg, &eta, -m);
        let modes = Modes::new(n as usize, (-n..=n).map(mode).collect())?;
        let m = [
            mode(0),
            m2_kernel(&q, &modes, n as usize)?,
            m3_kernel(&q, &modes, n as usize)?,
        ];

        let ep = alg.plus_part(&eta)?.scale_var(&q);
        let em = alg.minus_part(&eta)?.scale_var(&qi);
        let eta_sum = alg.fadd(&ep, &em)?;
        let eta_prod = alg.fmul(&ep, &em)?;

        // coefficient lists indexed by the exponent d ∈ [-N, N]
        let zero = || AlphaPoly::zero(alg.trunc());
        let mut x = vec![vec![zero(); (2 * n + 1) as usize]; 4];
        let in_range = |m: i64| m.abs() <= n;
        for i in 1..=n {
            for j in 1..=n {
                let w = pow(&q, i + j);
                let slot = |d: i64| (d + n) as usize;
                if in_range(j - i) {
                    x[0][slot(-j)] = x[0][slot(-j)].add(&mode(i).mul(&mode(j - i)).scale(&w));
                }
                if in_range(i - j) {
                    x[1][slot(j)] = x[1][slot(j)].add(&mode(-i).mul(&mode(i - j)).scale(&w));
                }
                if in_range(i + j) {
                    x[2][slot(j)] = x[2][slot(j)].add(&mode(i).mul(&mode(-i - j)).scale(&w));
                    x[3][slot(-j)] = x[3][slot(-j)].add(&mode(-i).mul(&mode(i + j)).scale(&w));
                }
            }
        }
        let xs: Vec<FieldSeries> = x
            .into_iter()
            .map(|c| alg.field_polynomial(-n, c))
            .collect::<Result<_>>()?;
        let x12 = alg.fadd(&xs[0], &xs[1])?;
        let x34 = alg.fadd(&xs[2], &xs[3])?;
        Ok(Hierarchy {
            eps: p.eps.clone(),
            x_sym: alg.fadd(&x12, &x34)?,
            x_anti: alg.fsub(&x12, &x34)?,
            x12,
            eta,
            tm,
            tp,
            sm,
            sp,
            m,
            eta_sum,
            eta_prod,
            alg,
        })
    }

    fn mk(&self, k: usize) -> &AlphaPoly {
        &self.m[k - 1]
    }

    fn constant(&self, c: &AlphaPoly) -> FieldSeries {
        self.alg.constant_field(c.clone())
    }

    /// `(D_{t_k} + k M_k)^j f·g = Σ_i C(j, i) (k M_k)^{j-i} D_{t_k}^i f·g`.
    fn shifted(&self, k: usize, j: u32, f: &FieldSeries, g: &FieldSeries) -> Result<FieldSeries> {
        let alg = &self.alg;
        let c = self.mk(k).scale(&int(k as i64));
        let mut total: Option<FieldSeries> = None;
        let mut binom = Scalar::one();
        for i in 0..=j {
            let d = if i == 0 {
                alg.fmul(f, g)?
            } else {
                alg.hirota_pair(&[(Flow::left(self.mk(k).clone()), i)], f, g)?
            };
            let mut cpow = AlphaPoly::one(alg.trunc());
            for _ in i..j {
                cpow = cpow.mul(&c);
            }
            let term = alg.fscale(&d, &cpow.scale(&binom))?;
            total = Some(match total {
                None => term,
                Some(t) => alg.fadd(&t, &term)?,
            });
            binom = binom * int((j - i) as i64) / int(i as i64 + 1);
        }
        Ok(total.expect("j + 1 terms"))
    }

    fn tt(&self) -> Result<FieldSeries> {
        self.alg.fmul(&self.tm, &self.tp)
    }

    fn ss(&self) -> Result<FieldSeries> {
        self.alg.fmul(&self.sm, &self.sp)
    }

    /// `M_1 (η_+(zq) + η_-(z/q))`.
    fn m1_sum(&self) -> Result<FieldSeries> {
        self.alg.fscale(&self.eta_sum, self.mk(1))
    }

    /// `c_2 M_2 + c_11 M_1^2` as a constant series.
    fn m_const(&self, c2: Scalar, c11: Scalar) -> FieldSeries {
        let m1 = self.mk(1);
        self.constant(&self.mk(2).scale(&c2).add(&m1.mul(m1).scale(&c11)))
    }

    fn sum(&self, parts: &[FieldSeries]) -> Result<FieldSeries> {
        let mut acc = parts[0].clone();
        for f in &parts[1..] {
            acc = self.alg.fadd(&acc, f)?;
        }
        Ok(acc)
    }

    /// Left side and bracket factor of Lemma `l` (2..=5); the identity is
    /// `lhs = prefactor · factor`, with prefactor `η τ_-τ_+` for `l = 2, 3`
    /// and `τ_-(z/q)τ_+(zq)` for `l = 4, 5`.
    fn lemma(&self, l: u32) -> Result<(FieldSeries, FieldSeries)> {
        let alg = &self.alg;
        let (lhs, factor) = match l {
            2 => (
                self.shifted(3, 1, &self.tm, &self.tp)?,
                self.sum(&[
                    self.m_const(int(1), rat(1, 2)),
                    self.m1_sum()?,
                    self.eta_prod.clone(),
                    self.x12.clone(),
                ])?,
            ),
            3 => (
                self.shifted(1, 3, &self.tm, &self.tp)?,
                self.sum(&[
                    self.m_const(int(4), int(-1)),
                    self.m1_sum()?,
                    self.eta_prod.scale(&int(-2)),
                    self.x_sym.scale(&int(2)),
                    self.x_anti.scale(&int(-1)),
                ])?,
            ),
            4 => (
                self.shifted(2, 1, &self.sm, &self.sp)?,
                self.sum(&[self.m_const(int(2), int(0)), self.m1_sum()?, self.x_sym.clone()])?,
            ),
            5 => (
                self.shifted(1, 2, &self.sm, &self.sp)?,
                self.sum(&[
                    self.m_const(int(0), int(1)),
                    self.m1_sum()?,
                    self.eta_prod.scale(&int(2)),
                    self.x_anti.clone(),
                ])?,
            ),
            _ => return Err(Error::Argument(format!("no lemma {l}"))),
        };
        let pre = if l <= 3 { alg.fmul(&self.eta, &self.tt()?)? } else { self.ss()? };
        Ok((lhs, alg.fmul(&pre, &factor)?))
    }

    /// `(D_{t_2} + 2M_2) τ_-·τ_+ = ε (D_{t_1} + M_1) τ_-(z/q)·τ_+(zq)`.
    fn prop_t2(&self, nz: i64) -> Result<Comparison> {
        let lhs = self.shifted(2, 1, &self.tm, &self.tp)?;
        let rhs = self.shifted(1, 1, &self.sm, &self.sp)?.scale(&self.eps);
        compare(&self.alg, &lhs, &rhs, nz)
    }

    /// The two `t_3` equations and their combination, the third Hirota
    /// equation `(D_3 + 3M_3)ττ + (1/8)(D_1 + M_1)^3 ττ
    /// = (3/4) ε (D_2 + 2M_2)τ'τ' + (3/8) ε (D_1 + M_1)^2 τ'τ'`, with
    /// `ττ = τ_-(z)·τ_+(z)`, `τ'τ' = τ_-(z/q)·τ_+(zq)`.
    fn prop_t3(&self, nz: i64) -> Result<Comparison> {
        let alg = &self.alg;
        let d3 = self.shifted(3, 1, &self.tm, &self.tp)?;
        let d111 = self.shifted(1, 3, &self.tm, &self.tp)?;
        let e2 = self.shifted(2, 1, &self.sm, &self.sp)?.scale(&self.eps);
        let e11 = self.shifted(1, 2, &self.sm, &self.sp)?.scale(&self.eps);
        let mut cmp = Comparison::new();
        let first = alg.fadd(&e2.scale(&rat(1, 2)), &e11.scale(&rat(1, 2)))?;
        cmp.merge(&compare(alg, &d3, &first, nz)?);
        let second = alg.fsub(&e2.scale(&int(2)), &e11)?;
        cmp.merge(&compare(alg, &d111, &second, nz)?);
        let lhs = alg.fadd(&d3, &d111.scale(&rat(1, 8)))?;
        let rhs = alg.fadd(&e2.scale(&rat(3, 4)), &e11.scale(&rat(3, 8)))?;
        cmp.merge(&compare(alg, &lhs, &rhs, nz)?);
        Ok(cmp)
    }
}

fn compare(alg: &PoissonAlgebra, lhs: &FieldSeries, rhs: &FieldSeries, nz: i64) -> Result<Comparison> {
    let mut cmp = Comparison::new();
    for d in -nz..=nz {
        cmp.absorb(&coef(alg, lhs, d).sub(&coef(alg, rhs, d)).cap());
    }
    Ok(cmp)
}

pub(crate) fn check(id: IdentityId, p: &ParamPoint, window: Window) -> Result<Comparison> {
    let h = Hierarchy::new(p, window)?;
    let nz = window.n_z as i64;
    let lemma = |l| -> Result<Comparison> {
        let (lhs, rhs) = h.lemma(l)?;
        compare(&h.alg, &lhs, &rhs, nz)
    };
    match id {
        IdentityId::Lemma32 => lemma(2),
        IdentityId::Lemma33 => lemma(3),
        IdentityId::Lemma34 => lemma(4),
        IdentityId::Lemma35 => lemma(5),
        IdentityId::PropT2 => h.prop_t2(nz),
        IdentityId::PropT3 => h.prop_t3(nz),
        other => Err(Error::Argument(format!("{} is not a t_2/t_3 identity", other.name()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poisson::Mono;

    fn point() -> ParamPoint {
        ParamPoint::new(rat(1, 3), rat(1, 5), vec![]).unwrap()
    }

    #[test]
    fn vacuum_sector_of_the_cubic_flow() {
        // at α = 0: η = ε, τ± = 1, M_1 = ε, M_2 = ε^2/2, M_3 = ε^3/3, so
        // both sides of the lemma are 3 M_3 = ε (M_2 + M_1^2/2) = ε^3
        let p = point();
        let h = Hierarchy::new(&p, Window::new(2, 4, 4)).unwrap();
        let (lhs, rhs) = h.lemma(2).unwrap();
        let e3 = pow(&p.eps, 3);
        assert_eq!(coef(&h.alg, &lhs, 0).coeff(Mono::ONE), e3);
        assert_eq!(coef(&h.alg, &rhs, 0).coeff(Mono::ONE), e3);
        assert_eq!(h.mk(2).coeff(Mono::ONE), pow(&p.eps, 2) * rat(1, 2));
    }

    #[test]
    fn shifted_square_at_degree_four() {
        let c = check(IdentityId::Lemma35, &point(), Window::new(3, 6, 4)).unwrap();
        assert!(c.passed(), "{c:?}");
        assert!(c.conclusive > 0);
    }

    #[test]
    fn a_wrong_coefficient_is_detected() {
        let h = Hierarchy::new(&point(), Window::new(2, 4, 4)).unwrap();
        let (lhs, rhs) = h.lemma(4).unwrap();
        let c = compare(&h.alg, &lhs, &rhs.scale(&rat(1, 2)), 2).unwrap();
        assert!(!c.passed());
    }

    #[test]
    fn swapped_kernels_are_detected() {
        let w = Window::new(2, 5, 4);
        let mut h = Hierarchy::new(&point(), w).unwrap();
        std::mem::swap(&mut h.x_sym, &mut h.x_anti);
        let (lhs, rhs) = h.lemma(4).unwrap();
        assert!(!compare(&h.alg, &lhs, &rhs, 2).unwrap().passed());
    }

    #[test]
    fn a_wrong_hamiltonian_is_detected() {
        // M_2 without the geometric part of its kernel
        let mut h = Hierarchy::new(&point(), Window::new(2, 5, 4)).unwrap();
        let m1 = h.mk(1).clone();
        h.m[1] = m1.mul(&m1).scale(&rat(1, 2));
        assert!(!h.prop_t2(2).unwrap().passed());
    }

    #[test]
    fn family_membership() {
        let cfg = CheckConfig::default();
        assert!(check_lemma_t3_family(IdentityId::Toda, Window::new(2, 4, 4), &cfg).is_err());
    }
}
