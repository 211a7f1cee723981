//! Truncated Laurent series in one variable and sparse multi-variable series,
//! generic over the coefficient ring.
//!
//! A [`LaurentSeries`] stores a dense block of coefficients on its *window*
//! `[lo, hi]` together with a *support* bound. Coefficients outside the
//! support are known to vanish; coefficients inside the support but outside
//! the window are unknown. Every operation computes the largest window on
//! which its result is exact given the input windows, so nothing outside a
//! window is ever reported as zero.

use std::collections::BTreeMap;
use std::fmt::Debug;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{int, pow, to_pq, Scalar};

/// Coefficient ring for series. Implemented by [`Scalar`] and by
/// [`crate::poisson::AlphaPoly`].
pub trait Coeff: Clone + Debug + Send + Sync {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero_coeff(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn scale(&self, s: &Scalar) -> Self;
    fn render(&self) -> String;

    fn neg(&self) -> Self {
        self.scale(&int(-1))
    }
}

impl Coeff for Scalar {
    fn zero_like(&self) -> Self {
        Scalar::zero()
    }
    fn one_like(&self) -> Self {
        Scalar::one()
    }
    fn is_zero_coeff(&self) -> bool {
        self.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, s: &Scalar) -> Self {
        self * s
    }
    fn render(&self) -> String {
        to_pq(self)
    }
}

/// Identifier of a formal variable (`z`, `w`, `w_1`, ...).
pub type VarId = usize;

/// One-variable truncated Laurent series.
#[derive(Clone, Debug)]
pub struct LaurentSeries<C> {
    var: VarId,
    lo: i64,
    coeffs: Vec<C>,
    /// Inclusive bounds outside which every coefficient is zero; `None` is unbounded.
    support: (Option<i64>, Option<i64>),
}

fn in_lower(bound: Option<i64>, d: i64) -> bool {
    bound.is_none_or(|b| d >= b)
}

fn in_upper(bound: Option<i64>, d: i64) -> bool {
    bound.is_none_or(|b| d <= b)
}

impl<C: Coeff> LaurentSeries<C> {
    /// Exact Laurent polynomial: `coeffs[i]` is the coefficient of `var^(lo+i)`,
    /// everything else is zero.
    pub fn polynomial(var: VarId, lo: i64, coeffs: Vec<C>) -> Self {
        assert!(!coeffs.is_empty(), "empty coefficient block");
        let hi = lo + coeffs.len() as i64 - 1;
        LaurentSeries {
            var,
            lo,
            coeffs,
            support: (Some(lo), Some(hi)),
        }
    }

    /// Power series in `var` known on `[0, coeffs.len() - 1]`.
    pub fn power_series(var: VarId, coeffs: Vec<C>) -> Self {
        assert!(!coeffs.is_empty(), "empty coefficient block");
        LaurentSeries {
            var,
            lo: 0,
            coeffs,
            support: (Some(0), None),
        }
    }

    /// Power series in `var^-1` known on `[-(coeffs.len() - 1), 0]`;
    /// `coeffs[k]` is the coefficient of `var^-k`.
    pub fn inverse_power_series(var: VarId, mut coeffs: Vec<C>) -> Self {
        assert!(!coeffs.is_empty(), "empty coefficient block");
        let n = coeffs.len() as i64 - 1;
        coeffs.reverse();
        LaurentSeries {
            var,
            lo: -n,
            coeffs,
            support: (None, Some(0)),
        }
    }

    pub fn with_support(
        var: VarId,
        lo: i64,
        coeffs: Vec<C>,
        support: (Option<i64>, Option<i64>),
    ) -> Self {
        assert!(!coeffs.is_empty(), "empty coefficient block");
        let hi = lo + coeffs.len() as i64 - 1;
        debug_assert!(in_lower(support.0, lo) || support.0.is_some_and(|s| s > lo));
        let _ = hi;
        LaurentSeries {
            var,
            lo,
            coeffs,
            support,
        }
    }

    pub fn var(&self) -> VarId {
        self.var
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.coeffs.len() as i64 - 1
    }

    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.hi())
    }

    pub fn support(&self) -> (Option<i64>, Option<i64>) {
        self.support
    }

    pub fn in_window(&self, d: i64) -> bool {
        d >= self.lo && d <= self.hi()
    }

    fn in_support(&self, d: i64) -> bool {
        in_lower(self.support.0, d) && in_upper(self.support.1, d)
    }

    /// Whether the coefficient of `var^d` is determined.
    pub fn is_known(&self, d: i64) -> bool {
        self.in_window(d) || !self.in_support(d)
    }

    /// Coefficient of `var^d`: `Some` when stored, `None` outside the window.
    pub fn get(&self, d: i64) -> Option<&C> {
        if self.in_window(d) {
            Some(&self.coeffs[(d - self.lo) as usize])
        } else {
            None
        }
    }

    /// Coefficient of `var^d` when known (zero outside the support).
    pub fn coeff(&self, d: i64) -> Option<C> {
        if let Some(c) = self.get(d) {
            Some(c.clone())
        } else if !self.in_support(d) {
            Some(self.coeffs[0].zero_like())
        } else {
            None
        }
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &C)> {
        let lo = self.lo;
        self.coeffs.iter().enumerate().map(move |(i, c)| (lo + i as i64, c))
    }

    /// Restricts the window to `[lo, hi]` (intersected with the current one).
    pub fn restrict(&self, lo: i64, hi: i64) -> Result<Self> {
        let nlo = lo.max(self.lo);
        let nhi = hi.min(self.hi());
        if nlo > nhi {
            return Err(Error::Contract(format!(
                "restriction [{lo}, {hi}] misses window [{}, {}]",
                self.lo,
                self.hi()
            )));
        }
        let start = (nlo - self.lo) as usize;
        let end = (nhi - self.lo) as usize;
        Ok(LaurentSeries {
            var: self.var,
            lo: nlo,
            coeffs: self.coeffs[start..=end].to_vec(),
            support: self.support,
        })
    }

    /// Declares every coefficient outside `[lo, hi]` to be zero. The caller
    /// vouches for that (for instance because those coefficients vanish in
    /// the quotient ring it works in). The current window must cover the
    /// part of `[lo, hi]` that lies inside the support.
    pub fn truncate_to(&self, lo: i64, hi: i64) -> Result<Self> {
        let nlo = self.support.0.map_or(lo, |s| s.max(lo));
        let nhi = self.support.1.map_or(hi, |s| s.min(hi));
        if nlo > nhi {
            let zero = self.coeffs[0].zero_like();
            return Ok(LaurentSeries::polynomial(self.var, lo.max(0).min(hi), vec![zero]));
        }
        if nlo < self.lo || nhi > self.hi() {
            return Err(Error::Contract(format!(
                "window [{}, {}] does not cover [{nlo}, {nhi}]",
                self.lo,
                self.hi()
            )));
        }
        let start = (nlo - self.lo) as usize;
        let end = (nhi - self.lo) as usize;
        Ok(LaurentSeries {
            var: self.var,
            lo: nlo,
            coeffs: self.coeffs[start..=end].to_vec(),
            support: (Some(nlo), Some(nhi)),
        })
    }

    /// Widens the window to `[lo, hi]`, which is only possible where the
    /// added coefficients are known zeros (outside the support).
    pub fn extend(&self, lo: i64, hi: i64) -> Result<Self> {
        let nlo = lo.min(self.lo);
        let nhi = hi.max(self.hi());
        let mut coeffs = Vec::with_capacity((nhi - nlo + 1) as usize);
        for d in nlo..=nhi {
            match self.coeff(d) {
                Some(c) => coeffs.push(c),
                None => {
                    return Err(Error::Contract(format!(
                        "coefficient of degree {d} is unknown; cannot widen"
                    )))
                }
            }
        }
        Ok(LaurentSeries {
            var: self.var,
            lo: nlo,
            coeffs,
            support: self.support,
        })
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(i64, &C) -> D) -> LaurentSeries<D> {
        LaurentSeries {
            var: self.var,
            lo: self.lo,
            coeffs: self.iter().map(|(d, c)| f(d, c)).collect(),
            support: self.support,
        }
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        self.map(|_, c| c.scale(s))
    }

    pub fn neg(&self) -> Self {
        self.map(|_, c| c.neg())
    }

    /// Substitution `var -> c * var`: the coefficient of `var^d` gains `c^d`.
    pub fn scale_var(&self, c: &Scalar) -> Self {
        self.map(|d, x| x.scale(&pow(c, d)))
    }

    /// Multiplies every coefficient by the same ring element.
    pub fn mul_coeff(&self, c: &C) -> Self {
        self.map(|_, x| x.mul(c))
    }

    fn combine(&self, other: &Self, sub: bool) -> Result<Self> {
        if self.var != other.var {
            return Err(Error::VariableMismatch(self.var, other.var));
        }
        let support = (
            match (self.support.0, other.support.0) {
                (Some(a), Some(b)) => Some(a.min(b)),
                _ => None,
            },
            match (self.support.1, other.support.1) {
                (Some(a), Some(b)) => Some(a.max(b)),
                _ => None,
            },
        );
        // known degrees of the sum: known in both
        let cand_lo = self.lo.min(other.lo);
        let cand_hi = self.hi().max(other.hi());
        let known: Vec<i64> = (cand_lo..=cand_hi)
            .filter(|&d| self.is_known(d) && other.is_known(d))
            .collect();
        let (lo, hi) = longest_run(&known).ok_or_else(|| {
            Error::Contract("sum of series with disjoint windows".into())
        })?;
        let coeffs = (lo..=hi)
            .map(|d| {
                let a = self.coeff(d).expect("known");
                let b = other.coeff(d).expect("known");
                if sub {
                    a.sub(&b)
                } else {
                    a.add(&b)
                }
            })
            .collect();
        Ok(LaurentSeries {
            var: self.var,
            lo,
            coeffs,
            support,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, true)
    }

    /// Cauchy product. Degree `d` is kept only if every contributing pair
    /// `(d1, d - d1)` allowed by the two supports lies inside both windows.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.var != other.var {
            return Err(Error::VariableMismatch(self.var, other.var));
        }
        let (w1lo, w1hi) = self.window();
        let (w2lo, w2hi) = other.window();
        let (s1lo, s1hi) = self.support;
        let (s2lo, s2hi) = other.support;
        let support = (
            s1lo.zip(s2lo).map(|(a, b)| a + b),
            s1hi.zip(s2hi).map(|(a, b)| a + b),
        );
        let known = |d: i64| -> bool {
            // d1 ranges over supp1 with d - d1 in supp2
            let lo = match (s1lo, s2hi) {
                (Some(a), Some(b)) => Some(a.max(d - b)),
                (Some(a), None) => Some(a),
                (None, Some(b)) => Some(d - b),
                (None, None) => None,
            };
            let hi = match (s1hi, s2lo) {
                (Some(a), Some(b)) => Some(a.min(d - b)),
                (Some(a), None) => Some(a),
                (None, Some(b)) => Some(d - b),
                (None, None) => None,
            };
            if let (Some(l), Some(h)) = (lo, hi) {
                if l > h {
                    return true;
                }
            }
            // need [lo, hi] inside [w1lo, w1hi] and inside [d - w2hi, d - w2lo]
            let need_lo = w1lo.max(d - w2hi);
            let need_hi = w1hi.min(d - w2lo);
            match (lo, hi) {
                (Some(l), Some(h)) => l >= need_lo && h <= need_hi,
                _ => false,
            }
        };
        let known: Vec<i64> = (w1lo + w2lo..=w1hi + w2hi).filter(|&d| known(d)).collect();
        let (lo, hi) = longest_run(&known)
            .ok_or_else(|| Error::Contract("product has an empty exact window".into()))?;
        let zero = self.coeffs[0].zero_like();
        let coeffs = (lo..=hi)
            .map(|d| {
                let mut acc: Option<C> = None;
                let i_lo = w1lo.max(d - w2hi);
                let i_hi = w1hi.min(d - w2lo);
                for i in i_lo..=i_hi {
                    let a = &self.coeffs[(i - w1lo) as usize];
                    let b = &other.coeffs[(d - i - w2lo) as usize];
                    if a.is_zero_coeff() && b.is_zero_coeff() {
                        // still fold in to keep truncation bookkeeping
                    }
                    let t = a.mul(b);
                    acc = Some(match acc {
                        None => t,
                        Some(x) => x.add(&t),
                    });
                }
                acc.unwrap_or_else(|| zero.clone())
            })
            .collect();
        Ok(LaurentSeries {
            var: self.var,
            lo,
            coeffs,
            support,
        })
    }

    fn one_sided(&self) -> Result<Side> {
        match self.support {
            (Some(l), _) if l >= 0 => {
                if self.lo > 0 {
                    return Err(Error::Contract("constant term is not in the window".into()));
                }
                Ok(Side::Positive)
            }
            (_, Some(h)) if h <= 0 => {
                if self.hi() < 0 {
                    return Err(Error::Contract("constant term is not in the window".into()));
                }
                Ok(Side::Negative)
            }
            _ => Err(Error::Contract(
                "operation needs a one-sided series (support in z^>=0 or z^<=0)".into(),
            )),
        }
    }

    /// Coefficients `c_0, c_1, ...` along the one-sided direction.
    fn one_sided_coeffs(&self, side: Side) -> Vec<C> {
        match side {
            Side::Positive => (0..=self.hi()).map(|d| self.coeff(d).expect("known")).collect(),
            Side::Negative => (0..=-self.lo).map(|k| self.coeff(-k).expect("known")).collect(),
        }
    }

    fn from_one_sided(&self, side: Side, c: Vec<C>) -> Self {
        match side {
            Side::Positive => LaurentSeries::power_series(self.var, c),
            Side::Negative => LaurentSeries::inverse_power_series(self.var, c),
        }
    }

    /// Multiplicative inverse of a one-sided series with constant term 1.
    pub fn inv(&self) -> Result<Self> {
        let side = self.one_sided()?;
        let f = self.one_sided_coeffs(side);
        if !f[0].sub(&f[0].one_like()).is_zero_coeff() {
            return Err(Error::Contract("inverse needs constant term 1".into()));
        }
        let mut g: Vec<C> = vec![f[0].one_like()];
        for k in 1..f.len() {
            let mut acc = f[k].mul(&g[0]);
            for j in 1..k {
                acc = acc.add(&f[j].mul(&g[k - j]));
            }
            g.push(acc.neg());
        }
        Ok(self.from_one_sided(side, g))
    }

    /// `exp(f)` for a one-sided `f` with zero constant term.
    pub fn exp(&self) -> Result<Self> {
        let side = self.one_sided()?;
        let f = self.one_sided_coeffs(side);
        if !f[0].is_zero_coeff() {
            return Err(Error::Contract("exp needs zero constant term".into()));
        }
        let mut g: Vec<C> = vec![f[0].one_like()];
        for k in 1..f.len() {
            let mut acc: Option<C> = None;
            for j in 1..=k {
                let t = f[j].mul(&g[k - j]).scale(&int(j as i64));
                acc = Some(match acc {
                    None => t,
                    Some(a) => a.add(&t),
                });
            }
            g.push(acc.expect("k >= 1").scale(&Scalar::new(1.into(), (k as i64).into())));
        }
        Ok(self.from_one_sided(side, g))
    }

    /// `log(f)` for a one-sided `f` with constant term 1.
    pub fn log(&self) -> Result<Self> {
        let side = self.one_sided()?;
        let f = self.one_sided_coeffs(side);
        if !f[0].sub(&f[0].one_like()).is_zero_coeff() {
            return Err(Error::Contract("log needs constant term 1".into()));
        }
        let mut h: Vec<C> = vec![f[0].zero_like()];
        for k in 1..f.len() {
            let mut acc = f[k].scale(&int(k as i64));
            for j in 1..k {
                acc = acc.sub(&h[j].mul(&f[k - j]).scale(&int(j as i64)));
            }
            h.push(acc.scale(&Scalar::new(1.into(), (k as i64).into())));
        }
        Ok(self.from_one_sided(side, h))
    }

    /// One line per exponent: `<degree> <coefficient>`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (d, c) in self.iter() {
            out.push_str(&format!("{d} {}\n", c.render()));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Side {
    Positive,
    Negative,
}

fn longest_run(sorted: &[i64]) -> Option<(i64, i64)> {
    let mut best: Option<(i64, i64)> = None;
    let mut start = None;
    let mut prev = None;
    for &d in sorted {
        match (start, prev) {
            (Some(_), Some(p)) if d == p + 1 => {}
            _ => start = Some(d),
        }
        prev = Some(d);
        let s = start.expect("set");
        if best.is_none_or(|(l, h)| d - s > h - l) {
            best = Some((s, d));
        }
    }
    best
}

/// Sparse series in several variables `w_1..w_k` truncated to `[-N, N]` in
/// every variable. Products treat their inputs as the finite polynomials they
/// store and drop exponents leaving the window.
#[derive(Clone, Debug)]
pub struct MultiSeries<C> {
    nvars: usize,
    radius: i64,
    terms: BTreeMap<Vec<i64>, C>,
}

/// Default cap on the number of variables of a [`MultiSeries`].
pub const MAX_MULTI_VARS: usize = 4;

impl<C: Coeff> MultiSeries<C> {
    pub fn new(nvars: usize, radius: i64) -> Result<Self> {
        if nvars == 0 || nvars > MAX_MULTI_VARS {
            return Err(Error::Budget(format!(
                "{nvars} variables exceed the configured maximum {MAX_MULTI_VARS}"
            )));
        }
        Ok(MultiSeries {
            nvars,
            radius,
            terms: BTreeMap::new(),
        })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    pub fn terms(&self) -> &BTreeMap<Vec<i64>, C> {
        &self.terms
    }

    fn in_window(&self, e: &[i64]) -> bool {
        e.iter().all(|x| x.abs() <= self.radius)
    }

    pub fn insert(&mut self, exps: Vec<i64>, c: C) {
        assert_eq!(exps.len(), self.nvars);
        if !self.in_window(&exps) || c.is_zero_coeff() {
            return;
        }
        match self.terms.get_mut(&exps) {
            Some(v) => {
                let s = v.add(&c);
                if s.is_zero_coeff() {
                    self.terms.remove(&exps);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(exps, c);
            }
        }
    }

    /// Embeds a one-variable series as a series in variable `slot`.
    pub fn from_single(nvars: usize, radius: i64, slot: usize, f: &LaurentSeries<C>) -> Result<Self> {
        let mut m = MultiSeries::new(nvars, radius)?;
        for (d, c) in f.iter() {
            let mut e = vec![0; nvars];
            e[slot] = d;
            m.insert(e, c.clone());
        }
        Ok(m)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.nvars != other.nvars {
            return Err(Error::VariableMismatch(self.nvars, other.nvars));
        }
        let mut out = MultiSeries::new(self.nvars, self.radius.min(other.radius))?;
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<i64> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                if out.in_window(&e) {
                    out.insert(e, c1.mul(c2));
                }
            }
        }
        Ok(out)
    }

    /// One line per exponent vector: `[e_1, ..., e_k] <coefficient>`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (e, c) in &self.terms {
            out.push_str(&format!("{e:?} {}\n", c.render()));
        }
        out
    }
}

/// Coefficient of the all-zeros exponent vector.
pub fn constant_term<C: Coeff>(ms: &MultiSeries<C>, zero: &C) -> C {
    ms.terms
        .get(&vec![0; ms.nvars])
        .cloned()
        .unwrap_or_else(|| zero.clone())
}

/// Which of the two pair kernels of the integrals of motion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    /// `(1 - w_j/w_i) / (1 - q w_j/w_i)`
    Plus,
    /// `(1 - w_j/w_i) / (1 - q^-1 w_j/w_i)`
    Minus,
}

/// Coefficients of `(1 - x) / (1 - r x) = 1 + (1 - 1/r) sum_{m>0} (r x)^m`
/// up to `x^order`, with `r = q` (plus) or `r = 1/q` (minus).
pub fn kernel_coefficients(kind: KernelKind, q: &Scalar, order: usize) -> Vec<Scalar> {
    let r = match kind {
        KernelKind::Plus => q.clone(),
        KernelKind::Minus => q.recip(),
    };
    let lead = Scalar::one() - r.recip();
    let mut out = vec![Scalar::one()];
    let mut rm = Scalar::one();
    for _ in 1..=order {
        rm *= &r;
        out.push(&lead * &rm);
    }
    out
}

/// The pair kernel in `(w_j / w_i)` truncated at order `order`, as a series in
/// `nvars` variables.
pub fn kernel_series(
    kind: KernelKind,
    q: &Scalar,
    nvars: usize,
    i: usize,
    j: usize,
    order: usize,
) -> Result<MultiSeries<Scalar>> {
    if i == j {
        return Err(Error::Argument("kernel needs two distinct variables".into()));
    }
    if i >= nvars || j >= nvars {
        return Err(Error::Argument("kernel variable out of range".into()));
    }
    let mut m = MultiSeries::new(nvars, order as i64)?;
    for (k, c) in kernel_coefficients(kind, q, order).into_iter().enumerate() {
        let mut e = vec![0; nvars];
        e[i] = -(k as i64);
        e[j] = k as i64;
        m.insert(e, c);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, ParamSampler};
    use proptest::prelude::*;

    const Z: VarId = 0;

    fn poly(lo: i64, c: &[i64]) -> LaurentSeries<Scalar> {
        LaurentSeries::polynomial(Z, lo, c.iter().map(|&x| int(x)).collect())
    }

    #[test]
    fn polynomial_products() {
        let f = poly(0, &[1, 1]).extend(-4, 4).unwrap();
        let g = poly(0, &[1, -1]).extend(-4, 4).unwrap();
        let h = f.mul(&g).unwrap();
        for d in -4..=4 {
            let want = match d {
                0 => 1,
                2 => -1,
                _ => 0,
            };
            assert_eq!(h.coeff(d).unwrap(), int(want));
        }
        let zinv = poly(-1, &[1]);
        let z = poly(1, &[1]);
        let one = zinv.mul(&z).unwrap();
        assert_eq!(one.coeff(0).unwrap(), int(1));
        assert_eq!(one.window(), (0, 0));
    }

    #[test]
    fn variable_mismatch() {
        let f = poly(0, &[1]);
        let g = LaurentSeries::polynomial(1, 0, vec![int(1)]);
        assert!(matches!(f.mul(&g), Err(Error::VariableMismatch(0, 1))));
    }

    #[test]
    fn one_sided_windows_shrink() {
        let f = LaurentSeries::power_series(Z, vec![int(1); 6]);
        let g = LaurentSeries::power_series(Z, vec![int(2); 4]);
        let h = f.mul(&g).unwrap();
        assert_eq!(h.window(), (0, 3));
        assert!(h.coeff(4).is_none());
        assert_eq!(h.coeff(-1).unwrap(), int(0));
        // two-sided product of infinite series has nothing exact
        let a = LaurentSeries::power_series(Z, vec![int(1); 4]);
        let b = LaurentSeries::inverse_power_series(Z, vec![int(1); 4]);
        assert!(a.mul(&b).is_err());
    }

    #[test]
    fn inverse_examples() {
        let one = LaurentSeries::power_series(Z, vec![int(1), int(0), int(0)]);
        assert_eq!(one.inv().unwrap().coeffs(), &[int(1), int(0), int(0)]);
        let f = poly(0, &[1, -1]).extend(0, 10).unwrap();
        let g = f.inv().unwrap();
        assert!(g.coeffs().iter().all(|c| *c == int(1)));
        let f = poly(0, &[1, 3, 2]).extend(0, 16).unwrap();
        let g = f.inv().unwrap();
        let mut f_ps = LaurentSeries::power_series(Z, f.coeffs().to_vec());
        f_ps = f_ps.restrict(0, 16).unwrap();
        let prod = f_ps.mul(&g).unwrap();
        for d in 0..=16 {
            assert_eq!(prod.coeff(d).unwrap(), int((d == 0) as i64));
        }
    }

    #[test]
    fn inverse_contract_errors() {
        let f = poly(0, &[2, 1]);
        assert!(matches!(f.inv(), Err(Error::Contract(_))));
        let two_sided = poly(-1, &[1, 1, 1]);
        assert!(matches!(two_sided.inv(), Err(Error::Contract(_))));
    }

    #[test]
    fn inverse_in_z_inverse_direction() {
        let f = LaurentSeries::polynomial(Z, -1, vec![rat(1, 2), int(1)]);
        let f = f.extend(-8, 0).unwrap();
        let g = f.inv().unwrap();
        for k in 0..=8 {
            assert_eq!(g.coeff(-k).unwrap(), pow(&rat(-1, 2), k));
        }
    }

    #[test]
    fn exp_log_examples() {
        let zero = LaurentSeries::power_series(Z, vec![int(0); 5]);
        let e = zero.exp().unwrap();
        assert_eq!(e.coeff(0).unwrap(), int(1));
        assert!((1..=4).all(|d| e.coeff(d).unwrap() == int(0)));
        let f = LaurentSeries::power_series(Z, vec![int(1), int(1), int(0), int(0), int(0), int(0)]);
        let l = f.log().unwrap();
        for k in 1..=5 {
            let sign = if k % 2 == 1 { 1 } else { -1 };
            assert_eq!(l.coeff(k).unwrap(), rat(sign, k));
        }
        assert!(matches!(f.exp(), Err(Error::Contract(_))));
        assert!(matches!(zero.log(), Err(Error::Contract(_))));
    }

    #[test]
    fn exp_log_round_trip_random() {
        let mut s = ParamSampler::new(5);
        for _ in 0..10 {
            let mut c = vec![int(0)];
            for _ in 0..8 {
                c.push(s.small_rational(&int(2), 7));
            }
            c.resize(17, int(0));
            let f = LaurentSeries::power_series(Z, c);
            let back = f.exp().unwrap().log().unwrap();
            assert_eq!(back.window(), f.window());
            for d in 0..=16 {
                assert_eq!(back.coeff(d), f.coeff(d));
            }
        }
    }

    #[test]
    fn constant_term_examples() {
        let mut a = MultiSeries::<Scalar>::new(2, 3).unwrap();
        a.insert(vec![1, -1], int(1));
        assert_eq!(constant_term(&a, &int(0)), int(0));
        let mut b = MultiSeries::<Scalar>::new(2, 3).unwrap();
        b.insert(vec![-1, 1], int(1));
        assert_eq!(constant_term(&a.mul(&b).unwrap(), &int(0)), int(1));
    }

    #[test]
    fn kernel_examples() {
        let q = rat(1, 3);
        let k = kernel_series(KernelKind::Plus, &q, 2, 0, 1, 1).unwrap();
        // 1 + (1 - 1/q) q (w_1/w_0)
        assert_eq!(k.terms()[&vec![0, 0]], int(1));
        assert_eq!(k.terms()[&vec![-1, 1]], (int(1) - q.recip()) * &q);
        assert!(kernel_series(KernelKind::Plus, &q, 2, 1, 1, 3).is_err());
        let plus_inv = kernel_coefficients(KernelKind::Plus, &q.recip(), 6);
        assert_eq!(kernel_coefficients(KernelKind::Minus, &q, 6), plus_inv);
    }

    #[test]
    fn kernel_times_denominator_gives_numerator() {
        let q = rat(2, 7);
        let n = 12;
        let ker = LaurentSeries::power_series(Z, kernel_coefficients(KernelKind::Plus, &q, n));
        let den = poly(0, &[1]).add(&poly(1, &[0])).unwrap();
        let den = LaurentSeries::polynomial(Z, 0, vec![den.coeff(0).unwrap(), -q.clone()]);
        let prod = ker.mul(&den).unwrap();
        assert_eq!(prod.window(), (0, n as i64));
        assert_eq!(prod.coeff(0).unwrap(), int(1));
        assert_eq!(prod.coeff(1).unwrap(), int(-1));
        assert!((2..=n as i64).all(|d| prod.coeff(d).unwrap() == int(0)));
    }

    fn arb_series(len: usize) -> impl Strategy<Value = Vec<(i64, i64)>> {
        proptest::collection::vec((-9i64..=9, 1i64..=6), len)
    }

    fn to_ps(v: &[(i64, i64)]) -> LaurentSeries<Scalar> {
        LaurentSeries::power_series(Z, v.iter().map(|&(n, d)| rat(n, d)).collect())
    }

    proptest! {
        #[test]
        fn ring_axioms_on_power_series(a in arb_series(7), b in arb_series(6), c in arb_series(8)) {
            let (f, g, h) = (to_ps(&a), to_ps(&b), to_ps(&c));
            let l = f.mul(&g).unwrap().mul(&h).unwrap();
            let r = f.mul(&g.mul(&h).unwrap()).unwrap();
            prop_assert_eq!(l.window(), r.window());
            for d in 0..=l.hi() {
                prop_assert_eq!(l.coeff(d), r.coeff(d));
            }
            let l = f.mul(&g.add(&h).unwrap()).unwrap();
            let r = f.mul(&g).unwrap().add(&f.mul(&h).unwrap()).unwrap();
            prop_assert_eq!(l.window(), r.window());
            for d in 0..=l.hi() {
                prop_assert_eq!(l.coeff(d), r.coeff(d));
            }
        }

        #[test]
        fn constant_term_is_convolution(a in arb_series(5), b in arb_series(5)) {
            let f = LaurentSeries::polynomial(Z, -2, a.iter().map(|&(n, d)| rat(n, d)).collect());
            let g = LaurentSeries::polynomial(Z, -2, b.iter().map(|&(n, d)| rat(n, d)).collect());
            let p = f.mul(&g).unwrap();
            let direct: Scalar = (-2..=2).map(|d| f.coeff(d).unwrap() * g.coeff(-d).unwrap()).sum();
            prop_assert_eq!(p.coeff(0).unwrap(), direct);
        }
    }
}
