//! Generating series of the dependent variables (`τ±`, `φ±`, `η`, `ξ`),
//! coefficientwise flows and Hirota derivatives.
//!
//! The coefficient of `z^k` in every field has mode weight `-k`. Inside the
//! storage box a monomial of weight `-k` needs `|k| ≤ N`, so every field is a
//! Laurent polynomial with exponents in `[-N, N]` modulo the truncation
//! ideal. Field series are kept in that form: after each operation the
//! window is clipped to `[-N, N]` and the coefficient certificates are capped
//! at the storage box.

use std::collections::HashMap;

use super::algebra::PoissonAlgebra;
use super::poly::{AlphaPoly, ModeBox};
use crate::error::{Error, Result};
use crate::scalar::{int, pow, Scalar};
use crate::series::{Coeff, LaurentSeries, VarId};
use num_traits::{One, Zero};

/// A series in one formal variable with [`AlphaPoly`] coefficients.
pub type FieldSeries = LaurentSeries<AlphaPoly>;

/// The formal variable `z` of field series.
pub const Z: VarId = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Which side of the bracket the Hamiltonian sits on: `Left` is `{H, F}`,
/// `Right` is `{F, H}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A Hamiltonian flow `F ↦ {H, F}` or `F ↦ {F, H}`.
#[derive(Clone, Debug)]
pub struct Flow {
    pub hamiltonian: AlphaPoly,
    pub side: Side,
}

impl Flow {
    pub fn left(h: AlphaPoly) -> Flow {
        Flow {
            hamiltonian: h,
            side: Side::Left,
        }
    }

    pub fn right(h: AlphaPoly) -> Flow {
        Flow {
            hamiltonian: h,
            side: Side::Right,
        }
    }
}

/// Outcome of comparing two field series on their certified regions.
#[derive(Clone, Debug)]
pub struct Comparison {
    /// Difference vanishes on every certified coefficient region.
    pub zero: bool,
    pub max_abs: Scalar,
    /// Exponents whose certified region contains at least one monomial.
    pub conclusive: usize,
    pub compared: usize,
    /// Smallest certified degree among conclusive coefficients.
    pub min_degree: i64,
}

fn binomial(n: u32, k: u32) -> Scalar {
    let mut r = Scalar::one();
    for i in 0..k {
        r = r * int((n - i) as i64) / int((i + 1) as i64);
    }
    r
}

impl PoissonAlgebra {
    /// Exponent range of field series.
    pub fn z_range(&self) -> (i64, i64) {
        let n = self.trunc().n_modes as i64;
        (-n, n)
    }

    /// Clips to `[-N, N]` and caps certificates at storage.
    pub fn settle(&self, f: FieldSeries) -> Result<FieldSeries> {
        let (lo, hi) = self.z_range();
        let f = f.truncate_to(lo, hi)?;
        Ok(f.map(|d, c| c.with_weight(-d).cap()))
    }

    /// Field series from explicit coefficients `coeffs[i]` of `z^(lo+i)`.
    pub fn field_polynomial(&self, lo: i64, coeffs: Vec<AlphaPoly>) -> Result<FieldSeries> {
        self.settle(LaurentSeries::polynomial(Z, lo, coeffs))
    }

    /// The constant series `c`.
    pub fn constant_field(&self, c: AlphaPoly) -> FieldSeries {
        LaurentSeries::polynomial(Z, 0, vec![c])
    }

    pub fn fmul(&self, f: &FieldSeries, g: &FieldSeries) -> Result<FieldSeries> {
        self.settle(f.mul(g)?)
    }

    pub fn fadd(&self, f: &FieldSeries, g: &FieldSeries) -> Result<FieldSeries> {
        self.settle(f.add(g)?)
    }

    pub fn fsub(&self, f: &FieldSeries, g: &FieldSeries) -> Result<FieldSeries> {
        self.settle(f.sub(g)?)
    }

    pub fn finv(&self, f: &FieldSeries) -> Result<FieldSeries> {
        self.settle(f.inv()?)
    }

    pub fn fexp(&self, f: &FieldSeries) -> Result<FieldSeries> {
        self.settle(f.exp()?)
    }

    /// Multiplies every coefficient by the functional `c`.
    pub fn fscale(&self, f: &FieldSeries, c: &AlphaPoly) -> Result<FieldSeries> {
        self.settle(f.mul_coeff(c))
    }

    /// `Σ_{n=1..N} c_n α_{∓n} z^{±n}`: the linear series with
    /// `coeff(n) = c_n` on `α_{-n} z^n` (plus) or `α_n z^{-n}` (minus).
    fn linear_series(&self, sign: Sign, coeff: impl Fn(i64) -> Scalar) -> Result<FieldSeries> {
        let n = self.trunc().n_modes as i64;
        let zero = AlphaPoly::zero(self.trunc());
        match sign {
            Sign::Plus => {
                let mut c = vec![zero];
                for k in 1..=n {
                    c.push(self.alpha(-k).scale(&coeff(k)));
                }
                self.field_polynomial(0, c)
            }
            Sign::Minus => {
                let mut c = Vec::new();
                for k in (1..=n).rev() {
                    c.push(self.alpha(k).scale(&coeff(k)));
                }
                c.push(zero);
                self.field_polynomial(-n, c)
            }
        }
    }

    /// Exponent of `τ±`: `-Σ α_{∓n} z^{±n} / (1 - q^n)`.
    pub fn tau_exponent(&self, sign: Sign) -> Result<FieldSeries> {
        let q = self.q().clone();
        self.linear_series(sign, |k| -(Scalar::one() / (Scalar::one() - pow(&q, k))))
    }

    /// `τ+(z) = exp(-Σ α_{-n} z^n/(1-q^n))`, `τ-(z) = exp(-Σ α_n z^{-n}/(1-q^n))`.
    pub fn build_tau(&self, sign: Sign) -> Result<FieldSeries> {
        self.fexp(&self.tau_exponent(sign)?)
    }

    /// `φ+(z) = Σ α_{-n} z^n`, `φ-(z) = -Σ α_n z^{-n}`.
    pub fn build_phi(&self, sign: Sign) -> Result<FieldSeries> {
        match sign {
            Sign::Plus => self.linear_series(sign, |_| Scalar::one()),
            Sign::Minus => self.linear_series(sign, |_| -Scalar::one()),
        }
    }

    fn check_eps(eps: &Scalar) -> Result<()> {
        if eps.is_zero() {
            return Err(Error::Argument("eps must be nonzero".into()));
        }
        Ok(())
    }

    /// `η(z) = ε exp(Σ_{n≠0} α_n z^{-n})`.
    pub fn build_eta(&self, eps: &Scalar) -> Result<FieldSeries> {
        Self::check_eps(eps)?;
        let minus = self.fexp(&self.linear_series(Sign::Minus, |_| Scalar::one())?)?;
        let plus = self.fexp(&self.linear_series(Sign::Plus, |_| Scalar::one())?)?;
        let e = self.fmul(&minus, &plus)?;
        Ok(e.scale(eps))
    }

    /// `ξ(z) = ε^{-1} exp(-Σ_{n≠0} α_n s^{-|n|} z^{-n})`.
    pub fn build_xi(&self, eps: &Scalar) -> Result<FieldSeries> {
        Self::check_eps(eps)?;
        let s = self.s().clone();
        let minus = self.fexp(&self.linear_series(Sign::Minus, |k| -pow(&s, -k))?)?;
        let plus = self.fexp(&self.linear_series(Sign::Plus, |k| -pow(&s, -k))?)?;
        let e = self.fmul(&minus, &plus)?;
        Ok(e.scale(&eps.recip()))
    }

    /// `η(z) = ε τ-(z/q) τ+(zq) / (τ-(z) τ+(z))`.
    pub fn build_eta_from_taus(&self, eps: &Scalar) -> Result<FieldSeries> {
        Self::check_eps(eps)?;
        let tp = self.build_tau(Sign::Plus)?;
        let tm = self.build_tau(Sign::Minus)?;
        let q = self.q().clone();
        let num = self.fmul(&tm.scale_var(&q.recip()), &tp.scale_var(&q))?;
        let den = self.fmul(&self.finv(&tm)?, &self.finv(&tp)?)?;
        Ok(self.fmul(&num, &den)?.scale(eps))
    }

    /// `ξ(z) = ε^{-1} τ-(zs) τ+(z/s) / (τ-(z/s) τ+(zs))`.
    pub fn build_xi_from_taus(&self, eps: &Scalar) -> Result<FieldSeries> {
        Self::check_eps(eps)?;
        let tp = self.build_tau(Sign::Plus)?;
        let tm = self.build_tau(Sign::Minus)?;
        let s = self.s().clone();
        let si = s.recip();
        let num = self.fmul(&tm.scale_var(&s), &tp.scale_var(&si))?;
        let den = self.fmul(&self.finv(&tm.scale_var(&si))?, &self.finv(&tp.scale_var(&s))?)?;
        Ok(self.fmul(&num, &den)?.scale(&eps.recip()))
    }

    /// Coefficient of `z^0`.
    pub fn zero_mode(&self, f: &FieldSeries) -> AlphaPoly {
        f.coeff(0).unwrap_or_else(|| AlphaPoly::zero(self.trunc()))
    }

    /// Part with positive exponents: `η+(z) = Σ_{n>0} η_{-n} z^n`.
    pub fn plus_part(&self, f: &FieldSeries) -> Result<FieldSeries> {
        self.part(f, |d| d > 0)
    }

    /// Part with negative exponents: `η-(z) = Σ_{n>0} η_n z^{-n}`.
    pub fn minus_part(&self, f: &FieldSeries) -> Result<FieldSeries> {
        self.part(f, |d| d < 0)
    }

    fn part(&self, f: &FieldSeries, keep: impl Fn(i64) -> bool) -> Result<FieldSeries> {
        let (lo, hi) = self.z_range();
        let f = f.extend(lo, hi)?;
        let zero = AlphaPoly::zero(self.trunc());
        let c = f
            .iter()
            .map(|(d, c)| if keep(d) { c.clone() } else { zero.clone() })
            .collect();
        self.field_polynomial(f.lo(), c)
    }

    /// Applies a flow coefficientwise.
    pub fn flow(&self, h: &AlphaPoly, f: &FieldSeries, side: Side) -> Result<FieldSeries> {
        let mut out = Vec::with_capacity(f.coeffs().len());
        for c in f.coeffs() {
            out.push(match side {
                Side::Left => self.bracket(h, c)?,
                Side::Right => self.bracket(c, h)?,
            });
        }
        self.settle(LaurentSeries::with_support(Z, f.lo(), out, f.support()))
    }

    /// The Hirota polynomial `∏ D_i^{k_i} f·g`, with `D_i` the Hirota
    /// derivative of the flow `ops[i].0`.
    ///
    /// Flows are applied in list order, the first one innermost; for
    /// commuting Hamiltonians the order is immaterial.
    pub fn hirota_pair(
        &self,
        ops: &[(Flow, u32)],
        f: &FieldSeries,
        g: &FieldSeries,
    ) -> Result<FieldSeries> {
        let order: u32 = ops.iter().map(|(_, k)| *k).sum();
        if order > self.trunc().d_deg {
            return Err(Error::Truncation(format!(
                "derivative order {order} exceeds degree budget {}",
                self.trunc().d_deg
            )));
        }
        let mut cache_f: HashMap<Vec<u32>, FieldSeries> = HashMap::new();
        let mut cache_g: HashMap<Vec<u32>, FieldSeries> = HashMap::new();
        let mut total: Option<FieldSeries> = None;
        let mut js = vec![0u32; ops.len()];
        loop {
            let mut c = Scalar::one();
            let mut gj = Vec::with_capacity(ops.len());
            for (i, (_, k)) in ops.iter().enumerate() {
                c *= binomial(*k, js[i]);
                if (k - js[i]) % 2 == 1 {
                    c = -c;
                }
                gj.push(k - js[i]);
            }
            let fd = self.derivative(ops, f, &js, &mut cache_f)?;
            let gd = self.derivative(ops, g, &gj, &mut cache_g)?;
            let term = self.fmul(&fd, &gd)?.scale(&c);
            total = Some(match total {
                None => term,
                Some(t) => self.fadd(&t, &term)?,
            });
            // next multi-index
            let mut i = 0;
            loop {
                if i == ops.len() {
                    return total.ok_or_else(|| Error::Argument("empty operator list".into()));
                }
                if js[i] < ops[i].1 {
                    js[i] += 1;
                    break;
                }
                js[i] = 0;
                i += 1;
            }
        }
    }

    fn derivative(
        &self,
        ops: &[(Flow, u32)],
        f: &FieldSeries,
        idx: &[u32],
        cache: &mut HashMap<Vec<u32>, FieldSeries>,
    ) -> Result<FieldSeries> {
        if let Some(v) = cache.get(idx) {
            return Ok(v.clone());
        }
        let out = match idx.iter().rposition(|&x| x > 0) {
            None => f.clone(),
            Some(i) => {
                let mut prev = idx.to_vec();
                prev[i] -= 1;
                let inner = self.derivative(ops, f, &prev, cache)?;
                let flow = &ops[i].0;
                self.flow(&flow.hamiltonian, &inner, flow.side)?
            }
        };
        cache.insert(idx.to_vec(), out.clone());
        Ok(out)
    }

    /// Compares `a` and `b` on exponents `[lo, hi]` within the certified
    /// region of each coefficient of `a - b`.
    pub fn compare(&self, a: &FieldSeries, b: &FieldSeries, lo: i64, hi: i64) -> Result<Comparison> {
        let mut out = Comparison {
            zero: true,
            max_abs: Scalar::zero(),
            conclusive: 0,
            compared: 0,
            min_degree: i64::MAX,
        };
        for d in lo..=hi {
            let x = a
                .coeff(d)
                .ok_or_else(|| Error::Contract(format!("left side unknown at z^{d}")))?;
            let y = b
                .coeff(d)
                .ok_or_else(|| Error::Contract(format!("right side unknown at z^{d}")))?;
            let diff = x.sub(&y);
            out.absorb(&diff);
        }
        Ok(out)
    }
}

impl Comparison {
    pub fn new() -> Comparison {
        Comparison {
            zero: true,
            max_abs: Scalar::zero(),
            conclusive: 0,
            compared: 0,
            min_degree: i64::MAX,
        }
    }

    /// Folds one coefficient difference into the tally.
    pub fn absorb(&mut self, diff: &AlphaPoly) {
        self.compared += 1;
        if diff.is_conclusive() {
            self.conclusive += 1;
            self.min_degree = self.min_degree.min(diff.cert().deg);
        }
        if !diff.is_zero() {
            self.zero = false;
            let m = diff.max_abs();
            if m > self.max_abs {
                self.max_abs = m;
            }
        }
    }

    pub fn merge(&mut self, o: &Comparison) {
        self.zero &= o.zero;
        if o.max_abs > self.max_abs {
            self.max_abs = o.max_abs.clone();
        }
        self.conclusive += o.conclusive;
        self.compared += o.compared;
        self.min_degree = self.min_degree.min(o.min_degree);
    }

    /// Zero on every certified region and at least one certified coefficient.
    pub fn passed(&self) -> bool {
        self.zero && self.conclusive > 0
    }
}

impl Default for Comparison {
    fn default() -> Self {
        Comparison::new()
    }
}

/// Restricts a functional to the degree range that a check can certify.
pub fn limit_degree(deg: i64) -> ModeBox {
    ModeBox::new(super::poly::UNBOUNDED, super::poly::UNBOUNDED, deg)
}
