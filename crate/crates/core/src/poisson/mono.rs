//! Packed commutative monomials in the mode symbols `α_n`.
//!
//! A monomial is a sorted multiset of at most eight nonzero mode indices in
//! `[-127, 127]`, packed one signed byte per factor into a `u64`. Unused
//! bytes are zero, which never collides with a real mode since `α_0` does
//! not exist.

use std::fmt;

pub const MAX_DEGREE: usize = 8;
pub const MAX_MODE: i64 = 127;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Mono(u64);

impl Mono {
    pub const ONE: Mono = Mono(0);

    /// Builds a monomial from mode indices in any order.
    ///
    /// Panics on a zero index, an index outside `[-127, 127]`, or more than
    /// eight factors.
    pub fn from_modes(modes: &[i64]) -> Mono {
        assert!(modes.len() <= MAX_DEGREE, "monomial degree above {MAX_DEGREE}");
        let mut v: Vec<i8> = modes
            .iter()
            .map(|&n| {
                assert!(n != 0 && n.abs() <= MAX_MODE, "bad mode index {n}");
                n as i8
            })
            .collect();
        v.sort_unstable();
        Mono::pack(&v)
    }

    fn pack(sorted: &[i8]) -> Mono {
        let mut x = 0u64;
        for (i, &n) in sorted.iter().enumerate() {
            x |= (n as u8 as u64) << (8 * i);
        }
        Mono(x)
    }

    pub fn raw(self) -> u64 {
        self.0
    }

    pub fn degree(self) -> usize {
        (64 - self.0.leading_zeros() as usize).div_ceil(8)
    }

    /// Mode indices in ascending order, padded with zeros.
    pub fn modes(self) -> ([i8; MAX_DEGREE], usize) {
        let d = self.degree();
        let mut out = [0i8; MAX_DEGREE];
        for (i, slot) in out.iter_mut().enumerate().take(d) {
            *slot = (self.0 >> (8 * i)) as u8 as i8;
        }
        (out, d)
    }

    /// `(P, Ng)`: sum of the positive indices and sum of the magnitudes of the
    /// negative indices.
    pub fn pos_neg(self) -> (i64, i64) {
        let (m, d) = self.modes();
        let mut p = 0;
        let mut n = 0;
        for &x in &m[..d] {
            if x > 0 {
                p += x as i64;
            } else {
                n -= x as i64;
            }
        }
        (p, n)
    }

    /// Sum of mode indices; `α_n` has weight `n`.
    pub fn weight(self) -> i64 {
        let (p, n) = self.pos_neg();
        p - n
    }

    /// Product of two monomials, `None` if the degree would exceed eight.
    pub fn mul(self, other: Mono) -> Option<Mono> {
        let (a, da) = self.modes();
        let (b, db) = other.modes();
        if da + db > MAX_DEGREE {
            return None;
        }
        let mut out = [0i8; MAX_DEGREE];
        let (mut i, mut j, mut k) = (0, 0, 0);
        while i < da || j < db {
            if j == db || (i < da && a[i] <= b[j]) {
                out[k] = a[i];
                i += 1;
            } else {
                out[k] = b[j];
                j += 1;
            }
            k += 1;
        }
        Some(Mono::pack(&out[..k]))
    }

    /// Multiplicity of `α_n` in the monomial.
    pub fn multiplicity(self, n: i64) -> usize {
        let (m, d) = self.modes();
        m[..d].iter().filter(|&&x| x as i64 == n).count()
    }

    /// The monomial with one factor `α_n` removed, if present.
    pub fn remove_one(self, n: i64) -> Option<Mono> {
        let (m, d) = self.modes();
        let pos = m[..d].iter().position(|&x| x as i64 == n)?;
        let mut out = [0i8; MAX_DEGREE];
        let mut k = 0;
        for (i, &x) in m[..d].iter().enumerate() {
            if i != pos {
                out[k] = x;
                k += 1;
            }
        }
        Some(Mono::pack(&out[..k]))
    }

    /// Distinct mode indices with multiplicities.
    pub fn factors(self) -> Vec<(i64, usize)> {
        let (m, d) = self.modes();
        let mut out: Vec<(i64, usize)> = Vec::new();
        for &x in &m[..d] {
            match out.last_mut() {
                Some((n, c)) if *n == x as i64 => *c += 1,
                _ => out.push((x as i64, 1)),
            }
        }
        out
    }
}

impl fmt::Debug for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fs = self.factors();
        if fs.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = fs
            .iter()
            .map(|&(n, c)| {
                if c == 1 {
                    format!("a[{n}]")
                } else {
                    format!("a[{n}]^{c}")
                }
            })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pack_round_trip() {
        let m = Mono::from_modes(&[3, -2, 3, 1]);
        assert_eq!(m.degree(), 4);
        let (v, d) = m.modes();
        assert_eq!(&v[..d], &[-2, 1, 3, 3]);
        assert_eq!(m.pos_neg(), (7, 2));
        assert_eq!(m.weight(), 5);
        assert_eq!(m.multiplicity(3), 2);
        assert_eq!(m.factors(), vec![(-2, 1), (1, 1), (3, 2)]);
        assert_eq!(Mono::ONE.degree(), 0);
        assert_eq!(Mono::from_modes(&[-127, 127]).pos_neg(), (127, 127));
    }

    #[test]
    fn product_is_sorted_merge() {
        let a = Mono::from_modes(&[2, -1]);
        let b = Mono::from_modes(&[-3, 2, 5]);
        assert_eq!(a.mul(b).unwrap(), Mono::from_modes(&[-3, -1, 2, 2, 5]));
        assert_eq!(a.mul(Mono::ONE).unwrap(), a);
        let big = Mono::from_modes(&[1; 5]);
        assert!(big.mul(big).is_none());
    }

    #[test]
    fn removal() {
        let m = Mono::from_modes(&[4, -4, 4]);
        assert_eq!(m.remove_one(4).unwrap(), Mono::from_modes(&[-4, 4]));
        assert!(m.remove_one(2).is_none());
        assert_eq!(Mono::from_modes(&[7]).remove_one(7).unwrap(), Mono::ONE);
    }
}
