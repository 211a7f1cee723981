//! Specialized `n`-soliton tau functions of the 2D Toda hierarchy.
//!
//! Each tau function is a finite sum over subsets `I ⊆ {1..n}`. The time
//! dependence sits in formal amplitudes `b_k`, one per soliton, so every
//! time derivative and Miwa shift acts diagonally on the terms and all
//! identities reduce to exact rational arithmetic on Laurent polynomials.
//! Numerical data (`η`, `ξ` and `α` modes on the unit circle) is extracted
//! at a chosen amplitude assignment.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::poisson::Sign;
use crate::scalar::{pow, to_f64, ParamPoint, Scalar};
use crate::series::LaurentSeries;

/// Formal variable used for soliton Laurent polynomials.
pub const Z: usize = 0;

/// A Toda time: `t_i` or `t̄_i` (both with `i ≥ 1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Time {
    T(u32),
    TBar(u32),
}

/// One term `c_I z^{±|I|} ∏_{k∈I} b_k^{±1}` of a soliton tau function.
#[derive(Clone, Debug, PartialEq)]
pub struct SolitonTerm {
    /// Bit `k` set iff soliton `k` (0-based) is in `I`.
    pub subset: u32,
    pub coeff: Scalar,
}

impl SolitonTerm {
    pub fn size(&self) -> u32 {
        self.subset.count_ones()
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        (0..32).filter(move |k| self.subset & (1 << k) != 0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolitonTau {
    pub sign: Sign,
    pub params: ParamPoint,
    pub terms: Vec<SolitonTerm>,
}

/// Exact Laurent polynomial with rational coefficients, keyed by exponent.
pub type LaurentPoly = BTreeMap<i64, Scalar>;

/// `(a_i - a_j)^2 / ((a_i - q a_j)(a_i - q^{-1} a_j))`.
pub fn interaction(p: &ParamPoint, i: usize, j: usize) -> Result<Scalar> {
    let (ai, aj) = (&p.a[i], &p.a[j]);
    let den = (ai - &p.q * aj) * (ai - aj / &p.q);
    if den.is_zero() {
        return Err(Error::Pole(format!("interaction of solitons {} and {}", i + 1, j + 1)));
    }
    let d = ai - aj;
    Ok(&d * &d / den)
}

fn subset_interaction(p: &ParamPoint, subset: u32) -> Result<Scalar> {
    let mut c = Scalar::one();
    let n = p.n();
    for i in 0..n {
        if subset & (1 << i) == 0 {
            continue;
        }
        for j in i + 1..n {
            if subset & (1 << j) != 0 {
                c *= interaction(p, i, j)?;
            }
        }
    }
    Ok(c)
}

/// Factor by which the shift `t̄ + [β]` multiplies the amplitude `b_k` of a
/// `τ+` term: `(1 - β/(q a_k)) / (1 - β/a_k)`.
pub fn tbar_shift_factor(p: &ParamPoint, k: usize, beta: &Scalar) -> Result<Scalar> {
    let a = &p.a[k];
    let num = Scalar::one() - beta / (&p.q * a);
    let den = Scalar::one() - beta / a;
    if den.is_zero() || num.is_zero() {
        return Err(Error::Pole(format!("t̄ shift by {beta} at soliton {}", k + 1)));
    }
    Ok(num / den)
}

/// Factor by which the shift `t + [α]` multiplies the amplitude `b_k` of a
/// `τ+` term: `(1 - α q a_k) / (1 - α a_k)`.
pub fn t_shift_factor(p: &ParamPoint, k: usize, alpha: &Scalar) -> Result<Scalar> {
    let a = &p.a[k];
    let num = Scalar::one() - alpha * &p.q * a;
    let den = Scalar::one() - alpha * a;
    if den.is_zero() || num.is_zero() {
        return Err(Error::Pole(format!("t shift by {alpha} at soliton {}", k + 1)));
    }
    Ok(num / den)
}

/// `d_k(β) = (1 - β/(q a_k))/(1 - β/a_k) · ∏_{j≠k} (a_k - q a_j)(a_k - q^{-1} a_j)/(a_k - a_j)^2`.
pub fn d_factor(p: &ParamPoint, k: usize, beta: &Scalar) -> Result<Scalar> {
    let mut d = tbar_shift_factor(p, k, beta)?;
    for j in 0..p.n() {
        if j != k {
            d /= interaction(p, k, j)?;
        }
    }
    Ok(d)
}

/// `λ_k` for the time `t_i` (`(1-q^i) a_k^i`) or `t̄_i` (`(1-q^{-i}) a_k^{-i}`).
pub fn soliton_eigenvalue(p: &ParamPoint, k: usize, time: Time) -> Scalar {
    match time {
        Time::T(i) => (Scalar::one() - pow(&p.q, i as i64)) * pow(&p.a[k], i as i64),
        Time::TBar(i) => (Scalar::one() - pow(&p.q, -(i as i64))) * pow(&p.a[k], -(i as i64)),
    }
}

pub fn make_tau_plus(p: &ParamPoint) -> Result<SolitonTau> {
    let n = p.n();
    if n > 16 {
        return Err(Error::Budget(format!("{n} solitons")));
    }
    let mut terms = Vec::with_capacity(1 << n);
    for subset in 0..(1u32 << n) {
        terms.push(SolitonTerm {
            subset,
            coeff: subset_interaction(p, subset)?,
        });
    }
    Ok(SolitonTau {
        sign: Sign::Plus,
        params: p.clone(),
        terms,
    })
}

pub fn make_tau_minus(p: &ParamPoint) -> Result<SolitonTau> {
    let beta = pow(&p.q, p.n() as i64) * &p.eps;
    let d: Vec<Scalar> = (0..p.n()).map(|k| d_factor(p, k, &beta)).collect::<Result<_>>()?;
    let mut tau = make_tau_plus(p)?;
    tau.sign = Sign::Minus;
    for t in &mut tau.terms {
        for k in 0..p.n() {
            if t.subset & (1 << k) != 0 {
                t.coeff *= &d[k];
            }
        }
    }
    Ok(tau)
}

impl SolitonTau {
    pub fn n(&self) -> usize {
        self.params.n()
    }

    fn sgn(&self) -> i64 {
        match self.sign {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    /// Exponent of `z` carried by a term.
    pub fn z_degree(&self, t: &SolitonTerm) -> i64 {
        self.sgn() * t.size() as i64
    }

    /// Eigenvalue of `∂/∂time` on a term (`τ-` terms carry `b_k^{-1}`).
    pub fn eigenvalue(&self, t: &SolitonTerm, time: Time) -> Scalar {
        let s: Scalar = t.members().map(|k| soliton_eigenvalue(&self.params, k, time)).sum();
        if self.sgn() < 0 {
            -s
        } else {
            s
        }
    }

    /// Substitution `z -> c z`.
    pub fn scale_z(&self, c: &Scalar) -> SolitonTau {
        let mut out = self.clone();
        for t in &mut out.terms {
            let d = self.z_degree(t);
            t.coeff *= pow(c, d);
        }
        out
    }

    /// Miwa shift `t ± [amount]` (`which = T(1)`) or `t̄ ± [amount]`
    /// (`which = TBar(1)`); `forward` selects `+`.
    pub fn miwa_shift(&self, which: Time, amount: &Scalar, forward: bool) -> Result<SolitonTau> {
        if amount.is_zero() {
            return Ok(self.clone());
        }
        let p = &self.params;
        let mut f = Vec::with_capacity(p.n());
        for k in 0..p.n() {
            let x = match which {
                Time::T(_) => t_shift_factor(p, k, amount)?,
                Time::TBar(_) => tbar_shift_factor(p, k, amount)?,
            };
            // τ- terms carry the reciprocal amplitude; a backward shift inverts
            let invert = (self.sgn() < 0) != !forward;
            f.push(if invert { x.recip() } else { x });
        }
        let mut out = self.clone();
        for t in &mut out.terms {
            for k in 0..p.n() {
                if t.subset & (1 << k) != 0 {
                    t.coeff *= &f[k];
                }
            }
        }
        Ok(out)
    }

    /// Amplitude factor `∏_{k∈I} b_k^{±1}` of a term.
    pub fn amplitude(&self, t: &SolitonTerm, b: &[Scalar]) -> Result<Scalar> {
        let mut x = Scalar::one();
        for k in t.members() {
            let bk = b.get(k).ok_or_else(|| Error::Argument("missing amplitude".into()))?;
            if bk.is_zero() {
                return Err(Error::Argument(format!("amplitude b_{} is zero", k + 1)));
            }
            x *= if self.sgn() < 0 { bk.recip() } else { bk.clone() };
        }
        Ok(x)
    }

    /// The Laurent polynomial in `z` at amplitudes `b`.
    pub fn evaluate(&self, b: &[Scalar]) -> Result<LaurentPoly> {
        let mut out = LaurentPoly::new();
        for t in &self.terms {
            let v = &t.coeff * self.amplitude(t, b)?;
            *out.entry(self.z_degree(t)).or_insert_with(Scalar::zero) += v;
        }
        out.retain(|_, v| !v.is_zero());
        Ok(out)
    }

    /// Coefficients `c_0..c_n` along the one-sided direction (`z` for `τ+`,
    /// `z^{-1}` for `τ-`).
    pub fn one_sided(&self, b: &[Scalar]) -> Result<Vec<Scalar>> {
        let e = self.evaluate(b)?;
        Ok((0..=self.n() as i64)
            .map(|k| e.get(&(self.sgn() * k)).cloned().unwrap_or_else(Scalar::zero))
            .collect())
    }
}

/// A factor `(D_time + shift)^power` of a Hirota operator.
#[derive(Clone, Debug)]
pub struct HirotaFactor {
    pub time: Time,
    pub shift: Scalar,
    pub power: u32,
}

impl HirotaFactor {
    pub fn d(time: Time, power: u32) -> HirotaFactor {
        HirotaFactor {
            time,
            shift: Scalar::zero(),
            power,
        }
    }

    pub fn shifted(time: Time, shift: Scalar, power: u32) -> HirotaFactor {
        HirotaFactor { time, shift, power }
    }
}

/// `∏ (D_time + shift)^power f·g` at amplitudes `b`. On the term pair
/// `(I, J)` each `D_time` acts as `λ(I) - λ(J)`.
pub fn hirota_apply(
    ops: &[HirotaFactor],
    f: &SolitonTau,
    g: &SolitonTau,
    b: &[Scalar],
) -> Result<LaurentPoly> {
    let mut out = LaurentPoly::new();
    let fe: Vec<Vec<Scalar>> = f
        .terms
        .iter()
        .map(|t| ops.iter().map(|o| f.eigenvalue(t, o.time)).collect())
        .collect();
    let ge: Vec<Vec<Scalar>> = g
        .terms
        .iter()
        .map(|t| ops.iter().map(|o| g.eigenvalue(t, o.time)).collect())
        .collect();
    for (i, ti) in f.terms.iter().enumerate() {
        let ai = &ti.coeff * f.amplitude(ti, b)?;
        for (j, tj) in g.terms.iter().enumerate() {
            let mut w = &ai * &tj.coeff * g.amplitude(tj, b)?;
            for (o, op) in ops.iter().enumerate() {
                let x = &fe[i][o] - &ge[j][o] + &op.shift;
                w *= pow(&x, op.power as i64);
            }
            let d = f.z_degree(ti) + g.z_degree(tj);
            *out.entry(d).or_insert_with(Scalar::zero) += w;
        }
    }
    out.retain(|_, v| !v.is_zero());
    Ok(out)
}

/// Product `f·g` at amplitudes `b`.
pub fn product(f: &SolitonTau, g: &SolitonTau, b: &[Scalar]) -> Result<LaurentPoly> {
    hirota_apply(&[], f, g, b)
}

pub fn poly_add(a: &LaurentPoly, b: &LaurentPoly) -> LaurentPoly {
    poly_lin(a, b, &Scalar::one())
}

pub fn poly_sub(a: &LaurentPoly, b: &LaurentPoly) -> LaurentPoly {
    poly_lin(a, b, &-Scalar::one())
}

fn poly_lin(a: &LaurentPoly, b: &LaurentPoly, c: &Scalar) -> LaurentPoly {
    let mut out = a.clone();
    for (d, v) in b {
        *out.entry(*d).or_insert_with(Scalar::zero) += v * c;
    }
    out.retain(|_, v| !v.is_zero());
    out
}

pub fn poly_scale(a: &LaurentPoly, c: &Scalar) -> LaurentPoly {
    let mut out: LaurentPoly = a.iter().map(|(d, v)| (*d, v * c)).collect();
    out.retain(|_, v| !v.is_zero());
    out
}

/// Largest absolute coefficient (zero for the zero polynomial).
pub fn poly_max_abs(a: &LaurentPoly) -> Scalar {
    a.values().map(|v| v.abs()).fold(Scalar::zero(), |m, v| if v > m { v } else { m })
}

/// Converts to a [`LaurentSeries`] with exact (polynomial) support.
pub fn to_series(a: &LaurentPoly) -> LaurentSeries<Scalar> {
    match (a.keys().next(), a.keys().next_back()) {
        (Some(&lo), Some(&hi)) => LaurentSeries::polynomial(
            Z,
            lo,
            (lo..=hi).map(|d| a.get(&d).cloned().unwrap_or_else(Scalar::zero)).collect(),
        ),
        _ => LaurentSeries::polynomial(Z, 0, vec![Scalar::zero()]),
    }
}

// ---------------------------------------------------------------------------
// Numerical extraction on the unit circle

/// Rounds to the nearest multiple of `2^-bits`.
pub fn round_dyadic(x: &Scalar, bits: u32) -> Scalar {
    let scale = BigInt::one() << bits;
    let scaled = x * Scalar::from_integer(scale.clone());
    Scalar::new(scaled.round().to_integer(), scale)
}

/// Roots of `c_0 + c_1 x + ... + c_n x^n` (Durand–Kerner iteration).
pub fn polynomial_roots(c: &[f64]) -> Vec<Complex64> {
    let mut c: Vec<f64> = c.to_vec();
    while c.len() > 1 && c.last().is_some_and(|x| *x == 0.0) {
        c.pop();
    }
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = c[n];
    let monic: Vec<f64> = c.iter().map(|x| x / lead).collect();
    let eval = |z: Complex64| monic.iter().rev().fold(Complex64::zero(), |acc, x| acc * z + x);
    let bound = 1.0 + monic[..n].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|i| seed.powu(i as u32) * bound).collect();
    for _ in 0..500 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut den = Complex64::one();
            for j in 0..n {
                if i != j {
                    den *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / den;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * bound {
            break;
        }
    }
    roots
}

/// Decay rate of the unit-circle expansion of `1/τ+` and `1/τ-`: the
/// largest of `1/|root|` over the roots of `τ+` as a polynomial in `z` and
/// of `τ-` as a polynomial in `z^{-1}`. The expansions used by
/// [`eta_modes`] are valid iff this is below 1.
pub fn decay_rate(tp: &SolitonTau, tm: &SolitonTau, b: &[Scalar]) -> Result<f64> {
    let cp: Vec<f64> = tp.one_sided(b)?.iter().map(to_f64).collect();
    let cm: Vec<f64> = tm.one_sided(b)?.iter().map(to_f64).collect();
    let mut rho = 0.0f64;
    for r in polynomial_roots(&cp) {
        rho = rho.max(1.0 / r.norm());
    }
    for r in polynomial_roots(&cm) {
        rho = rho.max(1.0 / r.norm());
    }
    Ok(rho)
}

/// Modes `x_m`, `m ∈ [-N, N]`, with `x(z) = Σ x_m z^{-m}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeVector {
    pub n: usize,
    /// `values[m + N]` is `x_m`.
    pub values: Vec<Scalar>,
    /// Bound on the error of every mode (from rounding and series tails).
    pub tail: Scalar,
}

impl ModeVector {
    pub fn zeros(n: usize) -> ModeVector {
        ModeVector {
            n,
            values: vec![Scalar::zero(); 2 * n + 1],
            tail: Scalar::zero(),
        }
    }

    pub fn get(&self, m: i64) -> Scalar {
        if m.unsigned_abs() as usize > self.n {
            Scalar::zero()
        } else {
            self.values[(m + self.n as i64) as usize].clone()
        }
    }

    pub fn set(&mut self, m: i64, v: Scalar) {
        let i = (m + self.n as i64) as usize;
        self.values[i] = v;
    }

    /// The same modes restricted to `|m| ≤ n`.
    pub fn truncated(&self, n: usize) -> ModeVector {
        let n = n.min(self.n);
        ModeVector {
            n,
            values: (-(n as i64)..=n as i64).map(|m| self.get(m)).collect(),
            tail: self.tail.clone(),
        }
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.values.iter().map(|v| Complex64::new(to_f64(v), 0.0)).collect()
    }
}

/// Precision and series length used for unit-circle extraction.
#[derive(Clone, Copy, Debug)]
pub struct ExpansionSpec {
    /// Every intermediate coefficient is rounded to a multiple of `2^-bits`.
    pub bits: u32,
    /// Largest admissible decay rate.
    pub max_rate: f64,
}

impl Default for ExpansionSpec {
    fn default() -> Self {
        ExpansionSpec {
            bits: 256,
            max_rate: 0.75,
        }
    }
}

/// Series coefficients `r_0..r_len` of `num(x)/den(x)` for polynomials in
/// one direction with `den(0) = 1`, rounded to `bits`.
fn ratio_series(num: &[Scalar], den: &[Scalar], len: usize, bits: u32) -> Vec<Scalar> {
    let mut inv: Vec<Scalar> = Vec::with_capacity(len + 1);
    inv.push(Scalar::one());
    for k in 1..=len {
        let mut acc = Scalar::zero();
        for j in 1..den.len().min(k + 1) {
            acc -= &den[j] * &inv[k - j];
        }
        inv.push(round_dyadic(&acc, bits));
    }
    (0..=len)
        .map(|k| {
            let mut acc = Scalar::zero();
            for j in 0..num.len().min(k + 1) {
                acc += &num[j] * &inv[k - j];
            }
            round_dyadic(&acc, bits)
        })
        .collect()
}

fn scaled(c: &[Scalar], x: &Scalar) -> Vec<Scalar> {
    c.iter().enumerate().map(|(k, v)| v * pow(x, k as i64)).collect()
}

/// Modes of `pref · A(z) · B(z^{-1})` where `A = τ+(z u)/τ+(z v)` and
/// `B = τ-(z u')/τ-(z v')` are expanded on the unit circle.
#[allow(clippy::too_many_arguments)]
fn ratio_modes(
    tp: &SolitonTau,
    tm: &SolitonTau,
    b: &[Scalar],
    pref: &Scalar,
    plus: (&Scalar, &Scalar),
    minus: (&Scalar, &Scalar),
    n: usize,
    spec: ExpansionSpec,
) -> Result<ModeVector> {
    // rate of the denominators τ+(z v) (in z) and τ-(z v') (in z^{-1})
    let rate = {
        let cp = scaled(&tp.one_sided(b)?, plus.1);
        let cm = scaled(&tm.one_sided(b)?, &minus.1.recip());
        let mut r = 0.0f64;
        for x in polynomial_roots(&cp.iter().map(to_f64).collect::<Vec<_>>()) {
            r = r.max(1.0 / x.norm());
        }
        for x in polynomial_roots(&cm.iter().map(to_f64).collect::<Vec<_>>()) {
            r = r.max(1.0 / x.norm());
        }
        r
    };
    if !(rate < spec.max_rate) {
        return Err(Error::Expansion(format!(
            "decay rate {rate:.4} is not below {}",
            spec.max_rate
        )));
    }
    let extra = ((spec.bits as f64 + 16.0) * std::f64::consts::LN_2 / -rate.max(1e-3).ln()).ceil() as usize;
    let len = 2 * n + extra + 8;
    let pc = tp.one_sided(b)?;
    let mc = tm.one_sided(b)?;
    // τ+(z u) has coefficients c_k u^k in z; τ-(z u') has coefficients c_k u'^{-k} in z^{-1}
    let a = ratio_series(&scaled(&pc, plus.0), &scaled(&pc, plus.1), len, spec.bits);
    let bb = ratio_series(
        &scaled(&mc, &minus.0.recip()),
        &scaled(&mc, &minus.1.recip()),
        len,
        spec.bits,
    );
    // decay test on the computed tails
    let tol = Scalar::new(BigInt::one(), BigInt::one() << (spec.bits - 8));
    for s in [&a, &bb] {
        for x in &s[len - 4..] {
            if x.abs() > tol {
                return Err(Error::Expansion("series coefficients do not decay".into()));
            }
        }
    }
    // every entry is a multiple of 2^-bits: convolve the integer numerators
    let scale = BigInt::one() << spec.bits;
    let ints = |v: &[Scalar]| -> Vec<BigInt> {
        v.iter().map(|x| (x * Scalar::from_integer(scale.clone())).to_integer()).collect()
    };
    let (ia, ib) = (ints(&a), ints(&bb));
    let den = Scalar::from_integer(&scale * &scale);
    let mut out = ModeVector::zeros(n);
    for m in -(n as i64)..=(n as i64) {
        // coefficient of z^k with k = -m: Σ_j A_{k+j} B_j over k + j >= 0
        let k = -m;
        let mut acc = BigInt::zero();
        let j0 = if k < 0 { (-k) as usize } else { 0 };
        for j in j0..=len {
            let i = (k + j as i64) as usize;
            if i > len {
                break;
            }
            acc += &ia[i] * &ib[j];
        }
        out.set(m, round_dyadic(&(Scalar::from_integer(acc) / &den * pref), spec.bits));
    }
    let err = (len as f64 + 4.0) * 4.0;
    out.tail = Scalar::new(BigInt::from(err.ceil() as i64), BigInt::one() << (spec.bits - 16));
    Ok(out)
}

/// Modes of `η(z) = ε τ-(z/q) τ+(zq) / (τ-(z) τ+(z))`.
pub fn eta_modes(p: &ParamPoint, b: &[Scalar], n: usize, spec: ExpansionSpec) -> Result<ModeVector> {
    let tp = make_tau_plus(p)?;
    let tm = make_tau_minus(p)?;
    let one = Scalar::one();
    let qi = p.q.recip();
    ratio_modes(&tp, &tm, b, &p.eps, (&p.q, &one), (&qi, &one), n, spec)
}

/// Modes of `ξ(z) = ε^{-1} τ-(zs) τ+(z/s) / (τ-(z/s) τ+(zs))`.
pub fn xi_modes(p: &ParamPoint, b: &[Scalar], n: usize, spec: ExpansionSpec) -> Result<ModeVector> {
    let tp = make_tau_plus(p)?;
    let tm = make_tau_minus(p)?;
    let si = p.s.recip();
    ratio_modes(&tp, &tm, b, &p.eps.recip(), (&si, &p.s), (&p.s, &si), n, spec)
}

/// `α_{-m} = -(1-q^m)[z^m] log τ+` and `α_m = -(1-q^m)[z^{-m}] log τ-` for
/// `1 ≤ m ≤ N`, returned as a mode vector (`x_0 = 0`).
pub fn alpha_from_taus(p: &ParamPoint, b: &[Scalar], n: usize) -> Result<ModeVector> {
    let tp = make_tau_plus(p)?;
    let tm = make_tau_minus(p)?;
    let mut out = ModeVector::zeros(n);
    for (tau, sgn) in [(&tp, -1i64), (&tm, 1i64)] {
        let mut c = tau.one_sided(b)?;
        c.resize(n + 1, Scalar::zero());
        c.truncate(n + 1);
        let log = LaurentSeries::power_series(Z, c).log()?;
        for m in 1..=n as i64 {
            let v = -(Scalar::one() - pow(&p.q, m)) * log.coeff(m).expect("known");
            out.set(sgn * m, v);
        }
    }
    Ok(out)
}

/// Modes of `ε exp(Σ_{m≠0} α_m z^{-m})` from given `α` modes (power
/// series truncated at `|m| ≤ N` on each side, then convolved).
pub fn eta_from_alpha(alpha: &ModeVector, eps: &Scalar, n: usize, bits: u32) -> Result<ModeVector> {
    let len = alpha.n;
    let mut pos = vec![Scalar::zero(); len + 1];
    let mut neg = vec![Scalar::zero(); len + 1];
    for m in 1..=len {
        neg[m] = alpha.get(m as i64);
        pos[m] = alpha.get(-(m as i64));
    }
    let ep: Vec<Scalar> = LaurentSeries::power_series(Z, pos).exp()?.coeffs().to_vec();
    let en = LaurentSeries::power_series(Z, neg).exp()?;
    let en: Vec<Scalar> = (0..=len as i64).map(|k| en.coeff(k).expect("known")).collect();
    let mut out = ModeVector::zeros(n);
    for m in -(n as i64)..=(n as i64) {
        let k = -m;
        let mut acc = Scalar::zero();
        for j in 0..=len {
            let ia = k + j as i64;
            if ia < 0 || ia as usize > len {
                continue;
            }
            acc += &ep[ia as usize] * &en[j];
        }
        out.set(m, round_dyadic(&(acc * eps), bits));
    }
    Ok(out)
}

/// Chooses amplitudes with a fast unit-circle decay.
///
/// For one soliton the zeros of `τ+` and `τ-` lie at `-1/b` and `-d/b`, so
/// `b = √|d|` balances both rates at `√|d|`. In general candidates
/// `b_k = ±√|d_k(q^n ε)| · r` over a small grid of `r` are scanned and the
/// fastest admissible one is returned with its rate.
pub fn choose_amplitudes(p: &ParamPoint, max_rate: f64) -> Result<(Vec<Scalar>, f64)> {
    let n = p.n();
    if n == 0 {
        return Ok((Vec::new(), 0.0));
    }
    let tp = make_tau_plus(p)?;
    let tm = make_tau_minus(p)?;
    let beta = pow(&p.q, n as i64) * &p.eps;
    let base: Vec<f64> = (0..n)
        .map(|k| d_factor(p, k, &beta).map(|d| to_f64(&d).abs().sqrt()))
        .collect::<Result<_>>()?;
    let grid = [1.0, 0.75, 1.25, 0.5, 1.5];
    let mut best: Option<(Vec<Scalar>, f64)> = None;
    let mut idx = vec![0usize; n];
    loop {
        let b: Vec<Scalar> = (0..n)
            .map(|k| dyadic_approx(base[k] * grid[idx[k]], 16))
            .collect();
        if b.iter().all(|x| !x.is_zero()) {
            let r = decay_rate(&tp, &tm, &b)?;
            if best.as_ref().is_none_or(|(_, br)| r < *br) {
                best = Some((b, r));
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                let (b, r) = best.ok_or_else(|| Error::Expansion("no admissible amplitudes".into()))?;
                if r < max_rate {
                    return Ok((b, r));
                }
                return Err(Error::Expansion(format!("best decay rate {r:.4} is not below {max_rate}")));
            }
            idx[i] += 1;
            if idx[i] < grid.len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Nearest multiple of `2^-bits` to a float, as an exact rational.
pub fn dyadic_approx(x: f64, bits: u32) -> Scalar {
    let scale = (1u64 << bits) as f64;
    Scalar::new(BigInt::from((x * scale).round() as i64), BigInt::from(1u64 << bits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn point2() -> ParamPoint {
        ParamPoint::new(rat(1, 2), rat(1, 9), vec![rat(1, 5), rat(-1, 7)]).unwrap()
    }

    #[test]
    fn vacuum_taus_are_one() {
        let p = ParamPoint::new(rat(1, 2), rat(1, 9), vec![]).unwrap();
        let e = make_tau_plus(&p).unwrap().evaluate(&[]).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e[&0], int(1));
        let e = make_tau_minus(&p).unwrap().evaluate(&[]).unwrap();
        assert_eq!(e[&0], int(1));
    }

    #[test]
    fn one_soliton_tau_plus() {
        let p = ParamPoint::new(rat(1, 2), rat(1, 9), vec![rat(1, 5)]).unwrap();
        let e = make_tau_plus(&p).unwrap().evaluate(&[rat(3, 4)]).unwrap();
        assert_eq!(e[&1], rat(3, 4));
        assert_eq!(e[&0], int(1));
    }

    #[test]
    fn two_soliton_top_coefficient() {
        let p = point2();
        let (a1, a2, q) = (p.a[0].clone(), p.a[1].clone(), p.q.clone());
        let e = make_tau_plus(&p).unwrap().evaluate(&[int(2), int(3)]).unwrap();
        let c = (&a1 - &a2) * (&a1 - &a2) / ((&a1 - &q * &a2) * (&a1 - &a2 / &q));
        assert_eq!(e[&2], c * int(6));
    }

    #[test]
    fn one_soliton_tau_minus_uses_d() {
        let p = ParamPoint::new(rat(1, 2), rat(1, 9), vec![rat(1, 5)]).unwrap();
        let e = make_tau_minus(&p).unwrap().evaluate(&[rat(1, 3)]).unwrap();
        let beta = &p.q * &p.eps;
        let d = (int(1) - &beta / (&p.q * &p.a[0])) / (int(1) - &beta / &p.a[0]);
        assert_eq!(e[&-1], d * int(3));
    }

    #[test]
    fn opposite_shifts_cancel() {
        let p = point2();
        let t = make_tau_plus(&p).unwrap();
        let x = rat(1, 11);
        for which in [Time::T(1), Time::TBar(1)] {
            let back = t.miwa_shift(which, &x, true).unwrap().miwa_shift(which, &x, false).unwrap();
            assert_eq!(back, t);
        }
        assert_eq!(t.miwa_shift(Time::T(1), &int(0), true).unwrap(), t);
    }

    #[test]
    fn odd_hirota_of_equal_pair_vanishes() {
        let p = point2();
        let t = make_tau_plus(&p).unwrap();
        let b = [rat(1, 2), rat(2, 3)];
        let r = hirota_apply(&[HirotaFactor::d(Time::T(1), 1)], &t, &t, &b).unwrap();
        assert!(r.is_empty());
        let r = hirota_apply(&[HirotaFactor::d(Time::T(2), 3)], &t, &t, &b).unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn single_terms_give_eigenvalue_difference() {
        let p = ParamPoint::new(rat(1, 2), rat(1, 9), vec![rat(1, 5)]).unwrap();
        let mut f = make_tau_plus(&p).unwrap();
        f.terms.retain(|t| t.subset == 1);
        let mut g = make_tau_plus(&p).unwrap();
        g.terms.retain(|t| t.subset == 0);
        let r = hirota_apply(&[HirotaFactor::d(Time::T(1), 2)], &f, &g, &[int(1)]).unwrap();
        let lam = soliton_eigenvalue(&p, 0, Time::T(1));
        assert_eq!(r[&1], &lam * &lam);
    }

    #[test]
    fn alpha_of_one_soliton() {
        let p = ParamPoint::new(rat(1, 2), rat(1, 9), vec![rat(1, 5)]).unwrap();
        let al = alpha_from_taus(&p, &[int(1)], 3).unwrap();
        // log(1 + z) = z - z^2/2 + ...
        assert_eq!(al.get(-1), -(int(1) - &p.q));
        assert_eq!(al.get(-2), (int(1) - &p.q * &p.q) / int(2));
    }

    #[test]
    fn roots_of_quadratic() {
        let r = polynomial_roots(&[2.0, -3.0, 1.0]);
        let mut m: Vec<f64> = r.iter().map(|z| z.re).collect();
        m.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((m[0] - 1.0).abs() < 1e-12 && (m[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dyadic_rounding() {
        assert_eq!(round_dyadic(&rat(1, 3), 2), rat(1, 4));
        assert_eq!(round_dyadic(&rat(-5, 8), 3), rat(-5, 8));
    }
}
