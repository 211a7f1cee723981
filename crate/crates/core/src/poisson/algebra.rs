//! The Heisenberg Poisson bracket `{α_n, α_m} = sgn(n)(1 - q^|n|) δ_{n+m,0}`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Pow, Zero};

use super::mono::Mono;
use super::poly::{finish, AlphaPoly, ModeBox, Trunc, UNBOUNDED};
use crate::error::{Error, Result};
use crate::scalar::{pow, Scalar};

fn sat(x: i64) -> i64 {
    if x >= UNBOUNDED / 2 {
        UNBOUNDED
    } else {
        x
    }
}

/// Certified output box of `{F, G}` for homogeneous operands of weights
/// `a` and `b` whose certified boxes are `b1`, `b2` (already normalized).
///
/// A monomial `m` of the bracket arises from `m1 = m1'·α_n` in `F` and
/// `m2 = m2'·α_{-n}` in `G` with `m = m1'·m2'`. Homogeneity pins the
/// contracted index, which bounds the mode sums of `m1`, `m2` by those of
/// `m`: for `n > 0`, `P(m1) = a + Ng(m1) ≤ a + Ng(m)` and
/// `Ng(m2) = P(m2) - b ≤ P(m) - b`, and symmetrically for `n < 0`. Both
/// operands lose one degree to the contraction.
pub fn bracket_box(b1: ModeBox, a: i64, b2: ModeBox, b: i64) -> ModeBox {
    let pos = b1
        .pos
        .min(b2.pos)
        .min(sat(b2.neg.saturating_add(b)))
        .min(sat(b1.neg.saturating_add(a)));
    let neg = b1
        .neg
        .min(b2.neg)
        .min(sat(b1.pos.saturating_sub(a)))
        .min(sat(b2.pos.saturating_sub(b)));
    let d = b1.deg.min(b2.deg);
    let deg = if d >= UNBOUNDED { UNBOUNDED } else { d - 1 };
    ModeBox::new(pos, neg, deg)
}

/// Bracket and field constructors at a fixed `s` (with `q = s^2`) and
/// storage truncation.
#[derive(Clone, Debug)]
pub struct PoissonAlgebra {
    q: Scalar,
    s: Scalar,
    trunc: Trunc,
    /// `fac[k] = (qd^k - qn^k) qd^(N-k)`, so `1 - q^k = fac[k] / qd^N`.
    fac: Vec<BigInt>,
    fac_den: BigInt,
}

impl PoissonAlgebra {
    pub fn new(s: &Scalar, trunc: Trunc) -> Result<PoissonAlgebra> {
        let q = s * s;
        if s.is_zero() || q.is_one() {
            return Err(Error::Pole(format!(
                "q = {} makes 1 - q^n vanish",
                crate::scalar::to_pq(&q)
            )));
        }
        let n = trunc.n_modes as usize;
        let qn = q.numer().clone();
        let qd = q.denom().clone();
        let mut fac = vec![BigInt::zero()];
        for k in 1..=n {
            let f = (Pow::pow(&qd, k as u32) - Pow::pow(&qn, k as u32)) * Pow::pow(&qd, (n - k) as u32);
            fac.push(f);
        }
        let fac_den = Pow::pow(&qd, n as u32);
        Ok(PoissonAlgebra {
            q,
            s: s.clone(),
            trunc,
            fac,
            fac_den,
        })
    }

    pub fn q(&self) -> &Scalar {
        &self.q
    }

    pub fn s(&self) -> &Scalar {
        &self.s
    }

    pub fn trunc(&self) -> Trunc {
        self.trunc
    }

    /// `α_n` in this algebra's storage.
    pub fn alpha(&self, n: i64) -> AlphaPoly {
        AlphaPoly::mode(self.trunc, n)
    }

    pub fn constant(&self, c: &Scalar) -> AlphaPoly {
        AlphaPoly::constant(self.trunc, c)
    }

    /// `sgn(n)(1 - q^|n|)`, the value of `{α_n, α_-n}`.
    pub fn structure_constant(&self, n: i64) -> Scalar {
        let v = Scalar::one() - pow(&self.q, n.abs());
        if n < 0 {
            -v
        } else {
            v
        }
    }

    pub fn bracket(&self, f: &AlphaPoly, g: &AlphaPoly) -> Result<AlphaPoly> {
        self.bracket_in(f, g, ModeBox::ALL)
    }

    /// `{F, G}`, keeping only monomials inside `limit`.
    pub fn bracket_in(&self, f: &AlphaPoly, g: &AlphaPoly, limit: ModeBox) -> Result<AlphaPoly> {
        if f.trunc != self.trunc || g.trunc != self.trunc {
            return Err(Error::Truncation(format!(
                "bracket operands stored at {:?} and {:?}, algebra at {:?}",
                f.trunc, g.trunc, self.trunc
            )));
        }
        if (f.terms.is_empty() && f.cert.is_all()) || (g.terms.is_empty() && g.cert.is_all()) {
            return Ok(AlphaPoly::zero(self.trunc));
        }
        let weight_of = |p: &AlphaPoly| -> Result<i64> {
            match p.weight {
                Some(w) => Ok(w),
                None if p.cert.is_all() => Ok(0),
                None => Err(Error::Contract(
                    "bracket of a truncated operand needs a homogeneous weight".into(),
                )),
            }
        };
        let a = weight_of(f)?;
        let b = weight_of(g)?;
        let b1 = f.norm_cert();
        let b2 = g.norm_cert();
        let weight = match (f.weight, g.weight) {
            (Some(x), Some(y)) => Some(x + y),
            _ => None,
        };
        let mut cert = bracket_box(b1, a, b2, b).meet(limit);
        if let Some(w) = weight {
            cert = cert.fitted(w);
        }
        let s = self.trunc.storage();
        let n = self.trunc.n_modes as i64;

        // index G by the modes it contains
        let mut index: Vec<Vec<(usize, BigInt)>> = vec![Vec::new(); (2 * n + 1) as usize];
        for (j, t) in g.terms.iter().enumerate() {
            for (m, k) in t.m.factors() {
                index[(m + n) as usize].push((j, &t.num * BigInt::from(k as u64)));
            }
        }
        let mut dropped = false;
        let mut acc: HashMap<Mono, BigInt> = HashMap::new();
        for t1 in &f.terms {
            if t1.deg - 1 > cert.deg {
                break;
            }
            for (m, k1) in t1.m.factors() {
                let partners = &index[(-m + n) as usize];
                if partners.is_empty() {
                    continue;
                }
                let am = m.abs();
                let mut c1 = &t1.num * &self.fac[am as usize] * BigInt::from(k1 as u64);
                if m < 0 {
                    c1 = -c1;
                }
                let r1 = t1.m.remove_one(m).expect("factor present");
                for (j, c2) in partners {
                    let t2 = &g.terms[*j];
                    let deg = t1.deg + t2.deg - 2;
                    if deg > cert.deg {
                        break;
                    }
                    let p = t1.p + t2.p - am;
                    let ng = t1.ng + t2.ng - am;
                    if !cert.contains(p, ng, deg) {
                        continue;
                    }
                    if !s.contains(p, ng, deg) {
                        dropped = true;
                        continue;
                    }
                    let r2 = t2.m.remove_one(-m).expect("factor present");
                    let mono = r1.mul(r2).expect("degree bounded by storage");
                    let prod = &c1 * c2;
                    match acc.get_mut(&mono) {
                        Some(v) => *v += prod,
                        None => {
                            acc.insert(mono, prod);
                        }
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
        let den = &f.den * &g.den * &self.fac_den;
        Ok(finish(self.trunc, cert, weight, den, acc))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};
    use crate::series::Coeff;

    fn alg() -> PoissonAlgebra {
        PoissonAlgebra::new(&rat(1, 2), Trunc::new(4, 4)).unwrap()
    }

    #[test]
    fn generator_brackets() {
        let a = alg();
        let q = a.q().clone();
        let b = a.bracket(&a.alpha(1), &a.alpha(-1)).unwrap();
        assert!(b.is_closed());
        assert_eq!(b.coeff(Mono::ONE), int(1) - &q);
        assert!(a.bracket(&a.alpha(1), &a.alpha(2)).unwrap().is_zero());
        let b = a.bracket(&a.alpha(-2), &a.alpha(2)).unwrap();
        assert_eq!(b.coeff(Mono::ONE), -(int(1) - &q * &q));
    }

    #[test]
    fn rejects_unit_q() {
        assert!(PoissonAlgebra::new(&int(1), Trunc::new(3, 3)).is_err());
        assert!(PoissonAlgebra::new(&int(-1), Trunc::new(3, 3)).is_err());
        assert!(PoissonAlgebra::new(&int(0), Trunc::new(3, 3)).is_err());
    }

    #[test]
    fn leibniz_on_closed_products() {
        let a = alg();
        let x = a.alpha(1).mul(&a.alpha(2));
        let y = a.alpha(-1).mul(&a.alpha(-2));
        // {a1 a2, a-1 a-2} = (1-q)(1-q^2)(...) computed by the derivation rule
        let lhs = a.bracket(&x, &y).unwrap();
        let q = a.q().clone();
        let c1 = int(1) - &q;
        let c2 = int(1) - &q * &q;
        assert_eq!(lhs.coeff(Mono::from_modes(&[-2, 2])), c1.clone());
        assert_eq!(lhs.coeff(Mono::from_modes(&[-1, 1])), c2.clone());
        assert!(lhs.is_closed());
    }

    #[test]
    fn truncated_operand_without_weight_is_rejected() {
        let a = alg();
        let mut x = a.alpha(1);
        for _ in 0..5 {
            x = x.mul(&a.alpha(1));
        }
        let y = x.add(&a.alpha(-1).mul(&a.alpha(-1)).mul(&a.alpha(-1)).mul(&a.alpha(-1)).mul(&a.alpha(-1)));
        assert!(matches!(a.bracket(&y, &a.alpha(2)), Err(Error::Contract(_))));
    }

    #[test]
    fn bracket_box_examples() {
        let s = Trunc::new(12, 6).storage();
        let b1 = s.normalized(3);
        let b2 = s.normalized(-5);
        let out = bracket_box(b1, 3, b2, -5).normalized(-2);
        // F is only certified for Ng <= 9, which caps the output the same way
        assert_eq!(out, ModeBox::new(UNBOUNDED, 9, 5));
        let same = bracket_box(s.normalized(2), 2, s.normalized(3), 3).normalized(5);
        assert_eq!(same, ModeBox::new(UNBOUNDED, 7, 5));
    }
}
