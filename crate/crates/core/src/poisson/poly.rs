//! Truncated polynomials in the mode symbols with a certified region.
//!
//! Every [`AlphaPoly`] approximates some (possibly infinite) formal series in
//! the `α_n`. Monomials are graded by three numbers: `P`, the sum of the
//! positive mode indices; `Ng`, the sum of the magnitudes of the negative
//! ones; and the total degree. The storage truncation keeps `P ≤ N`,
//! `Ng ≤ N` and degree `≤ D`. Monomials outside that box form an ideal, so
//! sums and products computed in the quotient are exact.
//!
//! On top of storage, each value carries a [`ModeBox`] `cert`: every
//! coefficient of a monomial inside `cert` is the true coefficient. Values
//! that are finite and were never truncated have an unbounded `cert` and
//! are called closed. Terms outside `cert` are never stored, so a value with
//! no terms is zero on its certified region.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::mono::{Mono, MAX_DEGREE};
use crate::scalar::Scalar;
use crate::series::Coeff;

/// Stand-in for an unbounded component of a [`ModeBox`].
pub const UNBOUNDED: i64 = i64::MAX / 4;

fn sat(x: i64) -> i64 {
    if x >= UNBOUNDED / 2 {
        UNBOUNDED
    } else {
        x
    }
}

/// Box `P ≤ pos`, `Ng ≤ neg`, degree `≤ deg` in monomial space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModeBox {
    pub pos: i64,
    pub neg: i64,
    pub deg: i64,
}

impl ModeBox {
    pub const ALL: ModeBox = ModeBox {
        pos: UNBOUNDED,
        neg: UNBOUNDED,
        deg: UNBOUNDED,
    };

    pub fn new(pos: i64, neg: i64, deg: i64) -> ModeBox {
        ModeBox {
            pos: sat(pos),
            neg: sat(neg),
            deg: sat(deg),
        }
    }

    pub fn meet(self, o: ModeBox) -> ModeBox {
        ModeBox {
            pos: self.pos.min(o.pos),
            neg: self.neg.min(o.neg),
            deg: self.deg.min(o.deg),
        }
    }

    pub fn is_all(&self) -> bool {
        *self == ModeBox::ALL
    }

    pub fn contains(&self, p: i64, ng: i64, deg: i64) -> bool {
        p <= self.pos && ng <= self.neg && deg <= self.deg
    }

    /// Whether the box contains at least one monomial of weight `w`.
    pub fn meets_weight(&self, w: i64) -> bool {
        let kp = self.pos.min(sat(self.neg.saturating_add(w)));
        let kn = self.neg.min(sat(self.pos.saturating_sub(w)));
        if w > 0 {
            kp >= w && kn >= 0 && self.deg >= 1
        } else if w < 0 {
            kn >= -w && kp >= 0 && self.deg >= 1
        } else {
            kp >= 0 && kn >= 0 && self.deg >= 0
        }
    }

    /// This box as a certificate for a weight-`w` value: unchanged when the
    /// slice is nonempty, otherwise the largest box without weight-`w`
    /// monomials.
    ///
    /// Products need the box in its raw form. Replacing it by
    /// [`ModeBox::normalized`] describes the same slice but gives a weaker
    /// condition on the factors of a product.
    pub fn fitted(self, w: i64) -> ModeBox {
        if self.meets_weight(w) {
            self
        } else {
            self.normalized(w)
        }
    }

    /// Canonical box with the same weight-`w` slice.
    ///
    /// On that slice `P - Ng = w`, so the `P` bound is implied by the `Ng`
    /// bound after tightening and is dropped. An empty slice is replaced by
    /// the largest box that has no weight-`w` monomial at all.
    pub fn normalized(self, w: i64) -> ModeBox {
        if !self.meets_weight(w) {
            return if w < 0 {
                ModeBox::new(UNBOUNDED, -w - 1, UNBOUNDED)
            } else if w > 0 {
                ModeBox::new(w - 1, UNBOUNDED, UNBOUNDED)
            } else {
                ModeBox::new(-1, UNBOUNDED, UNBOUNDED)
            };
        }
        let kn = self.neg.min(sat(self.pos.saturating_sub(w)));
        ModeBox::new(UNBOUNDED, kn, self.deg)
    }
}

impl fmt::Display for ModeBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = |x: i64| {
            if x >= UNBOUNDED {
                "inf".to_string()
            } else {
                x.to_string()
            }
        };
        write!(f, "(P<={}, Ng<={}, deg<={})", r(self.pos), r(self.neg), r(self.deg))
    }
}

/// Storage truncation: mode sums bounded by `n_modes`, degree by `d_deg`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Trunc {
    pub n_modes: u32,
    pub d_deg: u32,
}

impl Trunc {
    pub fn new(n_modes: u32, d_deg: u32) -> Trunc {
        assert!(n_modes as i64 <= super::mono::MAX_MODE, "n_modes too large");
        assert!(d_deg as usize <= MAX_DEGREE, "d_deg above {MAX_DEGREE}");
        Trunc { n_modes, d_deg }
    }

    pub fn storage(&self) -> ModeBox {
        ModeBox::new(self.n_modes as i64, self.n_modes as i64, self.d_deg as i64)
    }

    pub fn meet(self, o: Trunc) -> Trunc {
        Trunc {
            n_modes: self.n_modes.min(o.n_modes),
            d_deg: self.d_deg.min(o.d_deg),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Term {
    pub m: Mono,
    pub p: i64,
    pub ng: i64,
    pub deg: i64,
    pub num: BigInt,
}

impl Term {
    pub fn new(m: Mono, num: BigInt) -> Term {
        let (p, ng) = m.pos_neg();
        Term {
            m,
            p,
            ng,
            deg: m.degree() as i64,
            num,
        }
    }

    fn key(&self) -> (i64, u64) {
        (self.deg, self.m.raw())
    }
}

/// Truncated polynomial in the `α_n` with exact rational coefficients.
///
/// Coefficients are stored as integer numerators over one shared positive
/// denominator.
#[derive(Clone)]
pub struct AlphaPoly {
    pub(crate) trunc: Trunc,
    pub(crate) cert: ModeBox,
    pub(crate) weight: Option<i64>,
    pub(crate) den: BigInt,
    pub(crate) terms: Vec<Term>,
}

/// Certified box of a product of homogeneous factors of weights `a`, `b`
/// with certified boxes `b1`, `b2`.
///
/// On its weight slice a factor is exact where `Ng ≤ B` or, equivalently,
/// where `P ≤ B + weight`. A monomial `m = m1·m2` of the product has
/// `P(m) ≥ P(m1)` and `Ng(m) ≥ Ng(m1)`, so either bound on `m` carries over
/// to `m1`. On the output slice (weight `a + b`) both become bounds on
/// `Ng(m)`, and the larger one applies.
pub fn product_box(b1: ModeBox, a: i64, b2: ModeBox, b: i64) -> ModeBox {
    let slice = |c: ModeBox, w: i64| c.neg.min(sat(c.pos.saturating_sub(w)));
    let reach = |n: i64, other: i64| {
        if n >= UNBOUNDED {
            UNBOUNDED
        } else {
            n + (-other).max(0)
        }
    };
    let neg = reach(slice(b1, a), b).min(reach(slice(b2, b), a));
    let pos = if neg >= UNBOUNDED { UNBOUNDED } else { sat(neg.saturating_add(a + b)) };
    ModeBox::new(pos, neg, b1.deg.min(b2.deg))
}

pub(crate) fn finish(
    trunc: Trunc,
    cert: ModeBox,
    weight: Option<i64>,
    den: BigInt,
    acc: HashMap<Mono, BigInt>,
) -> AlphaPoly {
    let mut terms: Vec<Term> = acc
        .into_iter()
        .filter(|(_, n)| !n.is_zero())
        .map(|(m, n)| Term::new(m, n))
        .collect();
    terms.sort_unstable_by_key(|t| t.key());
    let mut out = AlphaPoly {
        trunc,
        cert,
        weight,
        den,
        terms,
    };
    out.reduce();
    out
}

impl AlphaPoly {
    pub fn zero(trunc: Trunc) -> AlphaPoly {
        AlphaPoly {
            trunc,
            cert: ModeBox::ALL,
            weight: None,
            den: BigInt::one(),
            terms: Vec::new(),
        }
    }

    pub fn constant(trunc: Trunc, c: &Scalar) -> AlphaPoly {
        if c.is_zero() {
            return AlphaPoly::zero(trunc);
        }
        AlphaPoly {
            trunc,
            cert: ModeBox::ALL,
            weight: Some(0),
            den: c.denom().clone(),
            terms: vec![Term::new(Mono::ONE, c.numer().clone())],
        }
    }

    pub fn one(trunc: Trunc) -> AlphaPoly {
        AlphaPoly::constant(trunc, &Scalar::one())
    }

    /// The generator `α_n`. If it lies outside storage the result is zero
    /// on the storage box (and not claimed anywhere else).
    pub fn mode(trunc: Trunc, n: i64) -> AlphaPoly {
        assert!(n != 0, "there is no mode 0");
        if n.abs() <= trunc.n_modes as i64 && trunc.d_deg >= 1 {
            let m = Mono::from_modes(&[n]);
            AlphaPoly {
                trunc,
                cert: ModeBox::ALL,
                weight: Some(n),
                den: BigInt::one(),
                terms: vec![Term::new(m, BigInt::one())],
            }
        } else {
            AlphaPoly {
                trunc,
                cert: trunc.storage().fitted(n),
                weight: Some(n),
                den: BigInt::one(),
                terms: Vec::new(),
            }
        }
    }

    /// A weight-`w` value known to vanish on the storage box and claimed
    /// nowhere else.
    pub fn storage_zero(trunc: Trunc, w: i64) -> AlphaPoly {
        AlphaPoly {
            trunc,
            cert: trunc.storage().fitted(w),
            weight: Some(w),
            den: BigInt::one(),
            terms: Vec::new(),
        }
    }

    /// Exact finite polynomial from explicit terms. Terms outside storage are
    /// dropped and the certificate shrinks to the storage box accordingly.
    pub fn from_terms(trunc: Trunc, terms: &[(Mono, Scalar)]) -> AlphaPoly {
        let s = trunc.storage();
        let mut out = AlphaPoly::zero(trunc);
        let mut dropped = false;
        let mut weights = terms.iter().filter(|(_, c)| !c.is_zero()).map(|(m, _)| m.weight());
        let weight = weights.next().filter(|&w| weights.all(|x| x == w));
        for (m, c) in terms {
            let (p, ng) = m.pos_neg();
            if !s.contains(p, ng, m.degree() as i64) {
                dropped = true;
                continue;
            }
            let t = AlphaPoly {
                trunc,
                cert: ModeBox::ALL,
                weight: Some(m.weight()),
                den: c.denom().clone(),
                terms: if c.is_zero() {
                    vec![]
                } else {
                    vec![Term::new(*m, c.numer().clone())]
                },
            };
            out = out.add(&t);
        }
        out.weight = weight;
        if dropped {
            out.cert = match weight {
                Some(w) => s.fitted(w),
                None => s,
            };
        }
        out
    }

    pub fn trunc(&self) -> Trunc {
        self.trunc
    }

    pub fn cert(&self) -> ModeBox {
        self.cert
    }

    pub fn weight(&self) -> Option<i64> {
        self.weight
    }

    pub fn is_closed(&self) -> bool {
        self.cert.is_all()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn is_closed_zero(&self) -> bool {
        self.terms.is_empty() && self.cert.is_all()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Whether the certified region says anything about this value.
    pub fn is_conclusive(&self) -> bool {
        match self.weight {
            Some(w) => self.cert.meets_weight(w),
            None => self.cert.meets_weight(0) || self.cert.deg >= 1,
        }
    }

    pub(crate) fn norm_cert(&self) -> ModeBox {
        match self.weight {
            Some(w) => self.cert.normalized(w),
            None => self.cert,
        }
    }

    pub fn coeff(&self, m: Mono) -> Scalar {
        self.terms
            .iter()
            .find(|t| t.m == m)
            .map(|t| Scalar::new(t.num.clone(), self.den.clone()))
            .unwrap_or_else(Scalar::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Mono, Scalar)> + '_ {
        self.terms
            .iter()
            .map(move |t| (t.m, Scalar::new(t.num.clone(), self.den.clone())))
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> Scalar {
        let n = self
            .terms
            .iter()
            .map(|t| t.num.abs())
            .max()
            .unwrap_or_else(BigInt::zero);
        Scalar::new(n, self.den.clone())
    }

    fn reduce(&mut self) {
        if self.den.is_negative() {
            self.den = -self.den.clone();
            for t in &mut self.terms {
                t.num = -t.num.clone();
            }
        }
        if self.terms.is_empty() {
            self.den = BigInt::one();
            return;
        }
        let mut g = self.den.clone();
        for t in &self.terms {
            if g.is_one() {
                return;
            }
            g = g.gcd(&t.num);
        }
        if g.is_one() {
            return;
        }
        self.den = &self.den / &g;
        for t in &mut self.terms {
            t.num = &t.num / &g;
        }
    }

    /// Shrinks the certificate to `limit` and drops terms outside it.
    pub fn restrict(&self, limit: ModeBox) -> AlphaPoly {
        let mut cert = self.cert.meet(limit);
        if let Some(w) = self.weight {
            cert = cert.fitted(w);
        }
        let mut out = AlphaPoly {
            trunc: self.trunc,
            cert,
            weight: self.weight,
            den: self.den.clone(),
            terms: self
                .terms
                .iter()
                .filter(|t| cert.contains(t.p, t.ng, t.deg))
                .cloned()
                .collect(),
        };
        out.reduce();
        out
    }

    /// Records weight `w` for a value whose terms all have that weight (a
    /// value with mixed weights is returned unchanged).
    pub fn with_weight(&self, w: i64) -> AlphaPoly {
        if self.weight.is_some() || self.terms.iter().any(|t| t.m.weight() != w) {
            return self.clone();
        }
        let mut out = self.clone();
        out.weight = Some(w);
        out.cert = out.cert.fitted(w);
        out
    }

    /// Gives up any claim beyond the storage box.
    pub fn cap(&self) -> AlphaPoly {
        self.restrict(self.trunc.storage())
    }

    fn combine(&self, other: &AlphaPoly, sign: i32) -> AlphaPoly {
        let trunc = self.trunc.meet(other.trunc);
        if other.is_closed_zero() && trunc == self.trunc {
            return self.clone();
        }
        if self.is_closed_zero() && trunc == other.trunc {
            return if sign < 0 { other.neg_poly() } else { other.clone() };
        }
        let weight = if self.is_closed_zero() {
            other.weight
        } else if other.is_closed_zero() {
            self.weight
        } else {
            match (self.weight, other.weight) {
                (Some(a), Some(b)) if a == b => Some(a),
                _ => None,
            }
        };
        let s = trunc.storage();
        let mut cert = self.cert.meet(other.cert);
        let any_outside = |p: &AlphaPoly| {
            p.terms.iter().any(|t| !s.contains(t.p, t.ng, t.deg))
        };
        if any_outside(self) || any_outside(other) {
            cert = cert.meet(s);
        }
        if let Some(w) = weight {
            cert = cert.fitted(w);
        }
        let keep = cert.meet(s);
        let l = self.den.lcm(&other.den);
        let fa = &l / &self.den;
        let fb = &l / &other.den;
        let mut terms = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let a = &self.terms;
        let b = &other.terms;
        while i < a.len() || j < b.len() {
            let pick_a = j == b.len() || (i < a.len() && a[i].key() < b[j].key());
            let pick_b = i == a.len() || (j < b.len() && b[j].key() < a[i].key());
            let (m, num, src) = if pick_a {
                i += 1;
                (a[i - 1].m, &a[i - 1].num * &fa, &a[i - 1])
            } else if pick_b {
                j += 1;
                let n = &b[j - 1].num * &fb;
                (b[j - 1].m, if sign < 0 { -n } else { n }, &b[j - 1])
            } else {
                let x = &a[i].num * &fa;
                let y = &b[j].num * &fb;
                i += 1;
                j += 1;
                (a[i - 1].m, if sign < 0 { x - y } else { x + y }, &a[i - 1])
            };
            if num.is_zero() || !keep.contains(src.p, src.ng, src.deg) {
                continue;
            }
            terms.push(Term {
                m,
                p: src.p,
                ng: src.ng,
                deg: src.deg,
                num,
            });
        }
        let mut out = AlphaPoly {
            trunc,
            cert,
            weight,
            den: l,
            terms,
        };
        out.reduce();
        out
    }

    fn neg_poly(&self) -> AlphaPoly {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.num = -t.num.clone();
        }
        out
    }

    /// Product, keeping only monomials inside `limit`.
    pub fn mul_in(&self, other: &AlphaPoly, limit: ModeBox) -> AlphaPoly {
        let trunc = self.trunc.meet(other.trunc);
        if self.is_closed_zero() || other.is_closed_zero() {
            return AlphaPoly::zero(trunc);
        }
        let weight = match (self.weight, other.weight) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        let s = trunc.storage();
        let mut cert = match (self.weight, other.weight) {
            (Some(a), Some(b)) => product_box(self.cert, a, other.cert, b).meet(limit),
            _ => self.cert.meet(other.cert).meet(limit),
        };
        if let Some(w) = weight {
            cert = cert.fitted(w);
        }
        let mut dropped = false;
        let mut acc: HashMap<Mono, BigInt> = HashMap::new();
        for t1 in &self.terms {
            if t1.deg > cert.deg {
                break;
            }
            for t2 in &other.terms {
                let deg = t1.deg + t2.deg;
                if deg > cert.deg {
                    break;
                }
                let p = t1.p + t2.p;
                let ng = t1.ng + t2.ng;
                if !cert.contains(p, ng, deg) {
                    continue;
                }
                if !s.contains(p, ng, deg) {
                    dropped = true;
                    continue;
                }
                let m = t1.m.mul(t2.m).expect("degree bounded by storage");
                let prod = &t1.num * &t2.num;
                match acc.get_mut(&m) {
                    Some(v) => *v += prod,
                    None => {
                        acc.insert(m, prod);
                    }
                }
            }
        }
        if dropped {
            cert = cert.meet(s);
            if let Some(w) = weight {
                cert = cert.fitted(w);
            }
        }
        finish(trunc, cert, weight, &self.den * &other.den, acc)
    }

    pub fn mul_poly(&self, other: &AlphaPoly) -> AlphaPoly {
        self.mul_in(other, ModeBox::ALL)
    }

    pub fn scale_by(&self, c: &Scalar) -> AlphaPoly {
        if c.is_zero() {
            return AlphaPoly::zero(self.trunc);
        }
        let mut out = self.clone();
        for t in &mut out.terms {
            t.num = &t.num * c.numer();
        }
        out.den = &out.den * c.denom();
        out.reduce();
        out
    }

    pub fn render_poly(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let parts: Vec<String> = self
            .iter()
            .map(|(m, c)| {
                if m == Mono::ONE {
                    crate::scalar::to_pq(&c)
                } else {
                    format!("{}*{}", crate::scalar::to_pq(&c), m)
                }
            })
            .collect();
        parts.join(" + ")
    }
}

impl fmt::Debug for AlphaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "AlphaPoly[{} terms, weight {:?}, cert {}]",
            self.terms.len(),
            self.weight,
            self.cert
        )
    }
}

impl Coeff for AlphaPoly {
    fn zero_like(&self) -> Self {
        AlphaPoly::zero(self.trunc)
    }
    fn one_like(&self) -> Self {
        AlphaPoly::one(self.trunc)
    }
    fn is_zero_coeff(&self) -> bool {
        self.terms.is_empty()
    }
    fn add(&self, o: &Self) -> Self {
        self.combine(o, 1)
    }
    fn sub(&self, o: &Self) -> Self {
        self.combine(o, -1)
    }
    fn mul(&self, o: &Self) -> Self {
        self.mul_poly(o)
    }
    fn scale(&self, s: &Scalar) -> Self {
        self.scale_by(s)
    }
    fn neg(&self) -> Self {
        self.neg_poly()
    }
    fn render(&self) -> String {
        self.render_poly()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn t() -> Trunc {
        Trunc::new(4, 4)
    }

    #[test]
    fn normalization_examples() {
        let s = t().storage();
        assert_eq!(s.normalized(2), ModeBox::new(UNBOUNDED, 2, 4));
        assert_eq!(s.normalized(-3), ModeBox::new(UNBOUNDED, 4, 4));
        assert_eq!(s.normalized(0), ModeBox::new(UNBOUNDED, 4, 4));
        assert_eq!(s.normalized(5), ModeBox::new(4, UNBOUNDED, UNBOUNDED));
        assert_eq!(s.normalized(-7), ModeBox::new(UNBOUNDED, 6, UNBOUNDED));
        assert!(!ModeBox::new(3, 3, 0).meets_weight(1));
        assert!(ModeBox::new(3, 3, 0).meets_weight(0));
    }

    #[test]
    fn products_and_sums() {
        let a1 = AlphaPoly::mode(t(), 1);
        let am1 = AlphaPoly::mode(t(), -1);
        let p = a1.mul_poly(&am1).add(&AlphaPoly::constant(t(), &rat(1, 2)));
        assert!(p.is_closed());
        assert_eq!(p.weight(), Some(0));
        assert_eq!(p.coeff(Mono::from_modes(&[-1, 1])), int(1));
        assert_eq!(p.coeff(Mono::ONE), rat(1, 2));
        let z = p.sub(&p);
        assert!(z.is_zero());
        // a_1^5 leaves storage: product truncates and the certificate shrinks
        let mut x = AlphaPoly::one(t());
        for _ in 0..5 {
            x = x.mul_poly(&a1);
        }
        assert!(x.is_zero());
        assert!(!x.is_closed());
        assert!(!x.is_conclusive());
    }

    #[test]
    fn out_of_storage_mode_is_zero_on_storage() {
        let a9 = AlphaPoly::mode(t(), 9);
        assert!(a9.is_zero());
        assert!(!a9.is_closed());
        assert!(!a9.is_conclusive());
        let am9 = AlphaPoly::mode(t(), -9);
        let prod = a9.mul_poly(&am9);
        assert!(prod.is_zero());
        assert!(!prod.is_closed());
    }

    #[test]
    fn mixed_weight_sum_has_no_weight() {
        let s = AlphaPoly::mode(t(), 1).add(&AlphaPoly::mode(t(), 2));
        assert_eq!(s.weight(), None);
        assert!(s.is_closed());
        let f = AlphaPoly::from_terms(
            t(),
            &[(Mono::from_modes(&[1, 1]), rat(2, 3)), (Mono::from_modes(&[2]), rat(-1, 5))],
        );
        assert_eq!(f.weight(), Some(2));
        assert_eq!(f.coeff(Mono::from_modes(&[1, 1])), rat(2, 3));
        assert_eq!(f.scale_by(&int(3)).coeff(Mono::from_modes(&[2])), rat(-3, 5));
    }
}
