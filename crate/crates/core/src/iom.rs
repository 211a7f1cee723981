//! Integrals of motion.
//!
//! `I_k` (and `Ī_k`) are constant terms of products of fields against the
//! pair kernels `(1 - w_j/w_i)/(1 - q^{±1} w_j/w_i)`. Given the modes of the
//! field they are finite sums once the modes are truncated, and the same
//! code runs over exact rationals or over Poisson-algebra functionals.
//! `M_k` is the Newton recombination of the normalized `I_k`; closed forms
//! on soliton solutions come from symmetric functions of the extended
//! alphabet `a_1, .., a_n, q^n ε, q^{n+1} ε, ...`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{
    e_geometric_tail, elementary_symmetric, int, newton_p_from_e, pow, power_sum_extended,
    q_pochhammer, ParamPoint, Scalar,
};
use crate::series::{kernel_coefficients, Coeff, KernelKind};
use crate::soliton::ModeVector;

/// Mode data `x_m`, `|m| ≤ n`, over any coefficient ring; `values[m + n]`
/// holds `x_m`.
#[derive(Clone, Debug)]
pub struct Modes<C> {
    pub n: usize,
    pub values: Vec<C>,
}

impl<C: Coeff> Modes<C> {
    pub fn new(n: usize, values: Vec<C>) -> Result<Modes<C>> {
        if values.len() != 2 * n + 1 {
            return Err(Error::Argument(format!(
                "{} mode values for window {n}",
                values.len()
            )));
        }
        Ok(Modes { n, values })
    }

    /// `x_m`, or `None` outside the window.
    pub fn get(&self, m: i64) -> Option<&C> {
        if m.unsigned_abs() as usize > self.n {
            None
        } else {
            Some(&self.values[(m + self.n as i64) as usize])
        }
    }
}

impl Modes<Scalar> {
    pub fn from_vector(v: &ModeVector) -> Modes<Scalar> {
        Modes {
            n: v.n,
            values: v.values.clone(),
        }
    }
}

/// An evaluated integral with its truncation and error bound.
#[derive(Clone, Debug, PartialEq)]
pub struct IomResult {
    pub k: usize,
    pub value: Scalar,
    pub n: usize,
    pub tail: Scalar,
}

/// Largest `N^{k(k-1)/2}` accepted by [`i_k_def`].
pub const KERNEL_BUDGET: f64 = 5e7;

/// Kernel weights of the constant term, grouped by mode vector: the
/// coefficient of `x_{n_1} ... x_{n_k}` in `[∏_{i<j} K(w_j/w_i) ∏ x(w_i)]_1`
/// with every `|n_i| ≤ n`, as integer numerators over one common
/// denominator (the second component).
pub fn kernel_weights(
    kind: KernelKind,
    q: &Scalar,
    k: usize,
    n: usize,
) -> Result<(Vec<(Vec<i64>, BigInt)>, BigInt)> {
    if k == 0 {
        return Err(Error::Argument("k must be at least 1".into()));
    }
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
    let cost = (n as f64 + 1.0).powi(pairs.len() as i32);
    if k > 3 && cost > KERNEL_BUDGET {
        return Err(Error::Budget(format!("I_{k} at N = {n} needs about {cost:.1e} terms")));
    }
    if pairs.is_empty() {
        return Ok((vec![(vec![0], BigInt::one())], BigInt::one()));
    }
    // every kernel coefficient is an integer over `den`
    let kc = kernel_coefficients(kind, q, n);
    let den = kc.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let kc: Vec<BigInt> = kc.iter().map(|c| (c * Scalar::from_integer(den.clone())).to_integer()).collect();

    // n_i = Σ_{j<i} m_ji - Σ_{j>i} m_ij; rows are filled in order so that
    // every n_i is final when its row closes.
    struct Walk<'a> {
        pairs: &'a [(usize, usize)],
        kc: &'a [BigInt],
        n: i64,
        exps: Vec<i64>,
        out: HashMap<Vec<i64>, BigInt>,
    }
    fn rec(w: &mut Walk, idx: usize, acc: &BigInt) {
        if idx == w.pairs.len() {
            if w.exps.iter().all(|e| e.abs() <= w.n) {
                *w.out.entry(w.exps.clone()).or_insert_with(BigInt::zero) += acc;
            }
            return;
        }
        let (i, j) = w.pairs[idx];
        let row_closes = idx + 1 == w.pairs.len() || w.pairs[idx + 1].0 != i;
        for m in 0..w.kc.len() {
            let mi = m as i64;
            if w.exps[i] - mi < -w.n {
                break;
            }
            if row_closes && w.exps[i] - mi > w.n {
                continue;
            }
            if w.kc[m].is_zero() {
                continue;
            }
            w.exps[i] -= mi;
            w.exps[j] += mi;
            let next = acc * &w.kc[m];
            rec(w, idx + 1, &next);
            w.exps[i] += mi;
            w.exps[j] -= mi;
        }
    }
    let mut walk = Walk {
        pairs: &pairs,
        kc: &kc,
        n: n as i64,
        exps: vec![0; k],
        out: HashMap::new(),
    };
    rec(&mut walk, 0, &BigInt::one());
    let mut out: Vec<(Vec<i64>, BigInt)> = walk.out.into_iter().filter(|(_, w)| !w.is_zero()).collect();
    out.sort();
    Ok((out, Pow::pow(&den, pairs.len())))
}

/// `[∏_{i<j} K(w_j/w_i) x(w_1) ... x(w_k)]_1` with modes truncated at
/// `|m| ≤ n` (`kind = Plus` gives `I_k` from `η`, `Minus` gives `Ī_k` from `ξ`).
pub fn constant_term_integral<C: Coeff>(
    kind: KernelKind,
    q: &Scalar,
    modes: &Modes<C>,
    k: usize,
    n: usize,
) -> Result<C> {
    if n > modes.n {
        return Err(Error::Argument(format!("truncation {n} exceeds mode window {}", modes.n)));
    }
    let (weights, den) = kernel_weights(kind, q, k, n)?;
    let den = Scalar::from_integer(den);
    let mut acc = modes.values[0].zero_like();
    for (e, w) in &weights {
        let mut prod: Option<C> = None;
        for &m in e {
            let x = modes.get(m).expect("inside window");
            prod = Some(match prod {
                None => x.clone(),
                Some(p) => p.mul(x),
            });
        }
        acc = acc.add(&prod.expect("k >= 1").scale(&(Scalar::from_integer(w.clone()) / &den)));
    }
    Ok(acc)
}

/// [`constant_term_integral`] for rational modes, in integer arithmetic
/// over common denominators.
pub fn constant_term_rational(
    kind: KernelKind,
    q: &Scalar,
    modes: &Modes<Scalar>,
    k: usize,
    n: usize,
) -> Result<Scalar> {
    if n > modes.n {
        return Err(Error::Argument(format!("truncation {n} exceeds mode window {}", modes.n)));
    }
    let (weights, wden) = kernel_weights(kind, q, k, n)?;
    let window = &modes.values[modes.n - n..=modes.n + n];
    let xden = window.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let xs: Vec<BigInt> = window
        .iter()
        .map(|x| (x * Scalar::from_integer(xden.clone())).to_integer())
        .collect();
    let mut acc = BigInt::zero();
    for (e, w) in &weights {
        let mut prod = w.clone();
        for &m in e {
            prod *= &xs[(m + n as i64) as usize];
        }
        acc += prod;
    }
    Ok(Scalar::new(acc, wden * Pow::pow(&xden, k)))
}

/// `I_k` from numerical `η` modes, with an error bound.
pub fn i_k_def(eta: &ModeVector, q: &Scalar, k: usize, n: usize) -> Result<IomResult> {
    integral_def(KernelKind::Plus, eta, q, k, n)
}

/// `Ī_k` from numerical `ξ` modes, with an error bound.
pub fn ibar_k_def(xi: &ModeVector, q: &Scalar, k: usize, n: usize) -> Result<IomResult> {
    integral_def(KernelKind::Minus, xi, q, k, n)
}

fn integral_def(kind: KernelKind, v: &ModeVector, q: &Scalar, k: usize, n: usize) -> Result<IomResult> {
    let modes = Modes::from_vector(v);
    let value = constant_term_rational(kind, q, &modes, k, n)?;
    // perturbing each mode by at most `tail` changes the sum by at most
    // k · tail · (Σ|x| + tail)^(k-1) · (Σ|κ|)^(k(k-1)/2)
    let l1: Scalar = v.values.iter().map(|x| x.abs()).sum::<Scalar>() + &v.tail;
    let kc: Scalar = kernel_coefficients(kind, q, n).iter().map(|x| x.abs()).sum();
    let tail = int(k as i64) * &v.tail * pow(&l1, k as i64 - 1) * pow(&kc, (k * (k - 1) / 2) as i64);
    Ok(IomResult { k, value, n, tail })
}

/// `M_2 = [(1/2 + q w_2/w_1 / (1 - q w_2/w_1)) η(w_1) η(w_2)]_1
///      = η_0^2/2 + Σ_{m>0} q^m η_{-m} η_m`.
pub fn m2_kernel<C: Coeff>(q: &Scalar, eta: &Modes<C>, n: usize) -> Result<C> {
    if n > eta.n {
        return Err(Error::Argument("truncation exceeds mode window".into()));
    }
    let e0 = eta.get(0).expect("window contains 0");
    let mut acc = e0.mul(e0).scale(&Scalar::new(1.into(), 2.into()));
    for m in 1..=n as i64 {
        let t = eta.get(-m).expect("in window").mul(eta.get(m).expect("in window"));
        acc = acc.add(&t.scale(&pow(q, m)));
    }
    Ok(acc)
}

/// `M_3 = [(1/3 + q w_3/w_2 / ((1 - q w_2/w_1)(1 - q w_3/w_2))) η(w_1)η(w_2)η(w_3)]_1
///      = η_0^3/3 + Σ_{i≥0, j≥1} q^{i+j} η_{-i} η_{i-j} η_j`.
pub fn m3_kernel<C: Coeff>(q: &Scalar, eta: &Modes<C>, n: usize) -> Result<C> {
    if n > eta.n {
        return Err(Error::Argument("truncation exceeds mode window".into()));
    }
    let n = n as i64;
    let e0 = eta.get(0).expect("window contains 0");
    let mut acc = e0.mul(e0).mul(e0).scale(&Scalar::new(1.into(), 3.into()));
    for i in 0..=n {
        for j in 1..=n {
            if (i - j).abs() > n {
                continue;
            }
            let t = eta
                .get(-i)
                .expect("in window")
                .mul(eta.get(i - j).expect("in window"))
                .mul(eta.get(j).expect("in window"));
            acc = acc.add(&t.scale(&pow(q, i + j)));
        }
    }
    Ok(acc)
}

/// `I'_k = q^{k(k-1)/2} I_k / ((1-q)...(1-q^k))`; with `bar`, `q -> 1/q`.
pub fn normalize_i(k: usize, q: &Scalar, bar: bool) -> Result<Scalar> {
    let q = if bar { q.recip() } else { q.clone() };
    let poch = q_pochhammer(&q, k);
    if poch.is_zero() {
        return Err(Error::Pole(format!("q^i = 1 for some i <= {k}")));
    }
    Ok(pow(&q, (k * k.saturating_sub(1) / 2) as i64) / poch)
}

/// `M_k` from `I_1..I_k` (or `M̄_k` from `Ī_1..Ī_k` with `bar`): the Newton
/// determinant of `I'_1..I'_k` times `(1 - q^{±k})/k`.
pub fn m_from_i(i: &[Scalar], q: &Scalar, bar: bool) -> Result<Scalar> {
    let k = i.len();
    if k == 0 {
        return Err(Error::Argument("need at least I_1".into()));
    }
    let ip: Vec<Scalar> = i
        .iter()
        .enumerate()
        .map(|(j, x)| normalize_i(j + 1, q, bar).map(|c| c * x))
        .collect::<Result<_>>()?;
    let qq = if bar { q.recip() } else { q.clone() };
    Ok((Scalar::one() - pow(&qq, k as i64)) / int(k as i64) * newton_p_from_e(&ip)?)
}

/// [`m_from_i`] over any coefficient ring, through the Newton recurrence
/// `p_k = Σ_{i<k} (-1)^{i-1} e_i p_{k-i} + (-1)^{k-1} k e_k`.
pub fn m_from_i_generic<C: Coeff>(i: &[C], q: &Scalar, bar: bool) -> Result<C> {
    let k = i.len();
    if k == 0 {
        return Err(Error::Argument("need at least I_1".into()));
    }
    let e: Vec<C> = i
        .iter()
        .enumerate()
        .map(|(j, x)| normalize_i(j + 1, q, bar).map(|c| x.scale(&c)))
        .collect::<Result<_>>()?;
    let mut p: Vec<C> = Vec::with_capacity(k + 1);
    p.push(e[0].zero_like());
    for m in 1..=k {
        let mut acc = e[m - 1].scale(&int(m as i64));
        if m % 2 == 0 {
            acc = acc.neg();
        }
        for j in 1..m {
            let t = e[j - 1].mul(&p[m - j]);
            acc = if j % 2 == 1 { acc.add(&t) } else { acc.sub(&t) };
        }
        p.push(acc);
    }
    let qq = if bar { q.recip() } else { q.clone() };
    let c = (Scalar::one() - pow(&qq, k as i64)) / int(k as i64);
    Ok(p[k].scale(&c))
}

/// Conjectured value of `I_k` on the `n`-soliton solution:
/// `q^{-k(k-1)/2} (q;q)_k e_k(a_1..a_n, q^n ε, q^{n+1} ε, ...)`.
pub fn closed_i(k: usize, p: &ParamPoint) -> Result<Scalar> {
    let x0 = pow(&p.q, p.n() as i64) * &p.eps;
    let ea = elementary_symmetric(&p.a, k);
    let mut e = Scalar::zero();
    for j in 0..=k {
        e += &ea[j] * e_geometric_tail(&x0, &p.q, k - j)?;
    }
    let poch = q_pochhammer(&p.q, k);
    Ok(pow(&p.q, -((k * k.saturating_sub(1) / 2) as i64)) * poch * e)
}

/// Conjectured value of `Ī_k`: [`closed_i`] at the mirrored point.
pub fn closed_ibar(k: usize, p: &ParamPoint) -> Result<Scalar> {
    closed_i(k, &p.mirrored())
}

/// `M_i = (1 - q^i)/i · p_i(a_1..a_n, q^n ε, ...)`; with `bar` the same at
/// the mirrored point.
pub fn closed_m(i: usize, p: &ParamPoint, bar: bool) -> Result<Scalar> {
    let pt = if bar { p.mirrored() } else { p.clone() };
    let ps = power_sum_extended(i, &pt)?;
    Ok((Scalar::one() - pow(&pt.q, i as i64)) / int(i as i64) * ps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, ParamSampler, SampleSpec};
    use crate::series::{constant_term, kernel_series, MultiSeries};

    fn const_modes(n: usize, eps: &Scalar) -> Modes<Scalar> {
        let mut v = vec![Scalar::zero(); 2 * n + 1];
        v[n] = eps.clone();
        Modes::new(n, v).unwrap()
    }

    fn random_modes(seed: u64, n: usize) -> Modes<Scalar> {
        let mut s = ParamSampler::new(seed);
        let v = (0..2 * n + 1).map(|_| s.small_rational(&rat(1, 1), 9)).collect();
        Modes::new(n, v).unwrap()
    }

    #[test]
    fn constant_field_gives_powers() {
        let q = rat(1, 4);
        let eps = rat(2, 7);
        let m = const_modes(5, &eps);
        for k in 1..=4 {
            let v = constant_term_integral(KernelKind::Plus, &q, &m, k, 5).unwrap();
            assert_eq!(v, pow(&eps, k as i64));
        }
        assert_eq!(m2_kernel(&q, &m, 5).unwrap(), &eps * &eps / int(2));
        assert_eq!(m3_kernel(&q, &m, 5).unwrap(), pow(&eps, 3) / int(3));
    }

    #[test]
    fn i1_and_i2_match_expansions() {
        let q = rat(1, 3);
        let m = random_modes(5, 4);
        let i1 = constant_term_integral(KernelKind::Plus, &q, &m, 1, 4).unwrap();
        assert_eq!(&i1, m.get(0).unwrap());
        let i2 = constant_term_integral(KernelKind::Plus, &q, &m, 2, 4).unwrap();
        let mut want = m.get(0).unwrap() * m.get(0).unwrap();
        for k in 1..=4i64 {
            want += (int(1) - q.recip()) * pow(&q, k) * m.get(-k).unwrap() * m.get(k).unwrap();
        }
        assert_eq!(i2, want);
    }

    #[test]
    fn i3_matches_multiseries_constant_term() {
        let q = rat(1, 3);
        let n = 3usize;
        let m = random_modes(11, n);
        let mut prod: Option<MultiSeries<Scalar>> = None;
        let r = 3 * n as i64;
        for slot in 0..3 {
            let mut f = MultiSeries::new(3, r).unwrap();
            for k in -(n as i64)..=n as i64 {
                let mut e = vec![0; 3];
                e[slot] = -k;
                f.insert(e, m.get(k).unwrap().clone());
            }
            prod = Some(match prod {
                None => f,
                Some(p) => p.mul(&f).unwrap(),
            });
        }
        let mut prod = prod.unwrap();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            prod = prod.mul(&kernel_series(KernelKind::Plus, &q, 3, i, j, 3 * n).unwrap()).unwrap();
        }
        let want = constant_term(&prod, &Scalar::zero());
        let got = constant_term_integral(KernelKind::Plus, &q, &m, 3, n).unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn newton_consistency_of_closed_forms() {
        let mut s = ParamSampler::new(3);
        for n in 0..=3 {
            let p = s.sample(n, &SampleSpec::default());
            for k in 1..=4 {
                let is: Vec<Scalar> = (1..=k).map(|j| closed_i(j, &p).unwrap()).collect();
                assert_eq!(m_from_i(&is, &p.q, false).unwrap(), closed_m(k, &p, false).unwrap());
                assert_eq!(m_from_i_generic(&is, &p.q, false).unwrap(), closed_m(k, &p, false).unwrap());
                let ib: Vec<Scalar> = (1..=k).map(|j| closed_ibar(j, &p).unwrap()).collect();
                assert_eq!(m_from_i(&ib, &p.q, true).unwrap(), closed_m(k, &p, true).unwrap());
            }
        }
    }

    #[test]
    fn closed_forms_for_small_k() {
        let p = ParamPoint::new(rat(1, 2), rat(1, 8), vec![rat(1, 5), rat(-1, 6), rat(1, 7)]).unwrap();
        let q = &p.q;
        let n = 3;
        let e1: Scalar = p.a.iter().sum();
        let e2 = &p.a[0] * &p.a[1] + &p.a[0] * &p.a[2] + &p.a[1] * &p.a[2];
        let i1 = (int(1) - q) * &e1 + pow(q, n) * &p.eps;
        assert_eq!(closed_i(1, &p).unwrap(), i1);
        assert_eq!(closed_m(1, &p, false).unwrap(), i1);
        let i2 = q.recip() * (int(1) - q) * (int(1) - q * q) * e2
            + pow(q, n - 1) * (int(1) - q * q) * e1 * &p.eps
            + pow(q, 2 * n) * &p.eps * &p.eps;
        assert_eq!(closed_i(2, &p).unwrap(), i2);
    }

    #[test]
    fn vacuum_closed_values() {
        let p = ParamPoint::new(rat(1, 2), rat(1, 8), vec![]).unwrap();
        for k in 1..=4 {
            assert_eq!(closed_i(k, &p).unwrap(), pow(&p.eps, k as i64));
            assert_eq!(closed_m(k, &p, false).unwrap(), pow(&p.eps, k as i64) / int(k as i64));
        }
    }

    #[test]
    fn kernel_formulas_match_newton_recombination() {
        let q = rat(1, 3);
        for seed in 0..4 {
            let m = random_modes(seed, 4);
            let is: Vec<Scalar> = (1..=3)
                .map(|k| constant_term_integral(KernelKind::Plus, &q, &m, k, 4).unwrap())
                .collect();
            assert_eq!(m_from_i(&is[..2], &q, false).unwrap(), m2_kernel(&q, &m, 4).unwrap());
            assert_eq!(m_from_i(&is, &q, false).unwrap(), m3_kernel(&q, &m, 4).unwrap());
        }
    }

    #[test]
    fn m1_is_zero_mode() {
        let q = rat(1, 5);
        let m = random_modes(2, 3);
        let i1 = constant_term_integral(KernelKind::Plus, &q, &m, 1, 3).unwrap();
        assert_eq!(m_from_i(std::slice::from_ref(&i1), &q, false).unwrap(), i1);
    }

    #[test]
    fn integer_path_matches_generic_path() {
        let q = rat(2, 7);
        let m = random_modes(8, 5);
        for kind in [KernelKind::Plus, KernelKind::Minus] {
            for k in 1..=3 {
                assert_eq!(
                    constant_term_rational(kind, &q, &m, k, 4).unwrap(),
                    constant_term_integral(kind, &q, &m, k, 4).unwrap()
                );
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let q = rat(1, 4);
        assert!(matches!(kernel_weights(KernelKind::Plus, &q, 4, 200), Err(Error::Budget(_))));
    }
}
