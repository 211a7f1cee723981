//! Certificates against a larger truncation: wherever a value computed at a
//! small truncation claims to be exact, it must agree with the same value
//! computed at a larger one.

use todabo::poisson::{AlphaPoly, FieldSeries, Flow, PoissonAlgebra, Sign, Trunc};
use todabo::scalar::rat;

fn algebras() -> (PoissonAlgebra, PoissonAlgebra) {
    let s = rat(2, 3);
    (
        PoissonAlgebra::new(&s, Trunc::new(3, 4)).unwrap(),
        PoissonAlgebra::new(&s, Trunc::new(7, 6)).unwrap(),
    )
}

/// Number of certified monomials checked; panics on a disagreement.
fn agree(small: &AlphaPoly, big: &AlphaPoly, what: &str) -> usize {
    let cert = small.cert();
    let mut seen = 0;
    for (m, _) in small.iter().chain(big.iter()) {
        let (p, ng) = m.pos_neg();
        let d = m.degree() as i64;
        if !cert.contains(p, ng, d) || !big.cert().contains(p, ng, d) {
            continue;
        }
        assert_eq!(small.coeff(m), big.coeff(m), "{what}: monomial {m:?}");
        seen += 1;
    }
    seen
}

fn agree_series(small: &FieldSeries, big: &FieldSeries, what: &str) -> usize {
    let mut seen = 0;
    for d in -3..=3 {
        if let (Some(a), Some(b)) = (small.get(d), big.get(d)) {
            seen += agree(a, b, &format!("{what} z^{d}"));
        }
    }
    seen
}

#[test]
fn coefficient_products() {
    let (sa, ba) = algebras();
    let eps = rat(1, 4);
    let (se, be) = (sa.build_eta(&eps).unwrap(), ba.build_eta(&eps).unwrap());
    let (st, bt) = (sa.build_tau(Sign::Plus).unwrap(), ba.build_tau(Sign::Plus).unwrap());
    let mut seen = 0;
    for i in -3..=3 {
        for j in 0..=3 {
            let small = se.get(i).unwrap().mul_poly(st.get(j).unwrap());
            let big = be.get(i).unwrap().mul_poly(bt.get(j).unwrap());
            seen += agree(&small, &big, &format!("eta_{i} tau_{j}"));
        }
    }
    assert!(seen > 100, "only {seen} certified monomials");
}

#[test]
fn series_products_and_flows() {
    let (sa, ba) = algebras();
    let eps = rat(1, 4);
    let mut seen = 0;
    for sign in [Sign::Minus, Sign::Plus] {
        let (st, bt) = (sa.build_tau(sign).unwrap(), ba.build_tau(sign).unwrap());
        let (se, be) = (sa.build_eta(&eps).unwrap(), ba.build_eta(&eps).unwrap());
        seen += agree_series(&sa.fmul(&se, &st).unwrap(), &ba.fmul(&be, &bt).unwrap(), "eta tau");
        let (h0, b0) = (sa.zero_mode(&se), ba.zero_mode(&be));
        let small = sa.hirota_pair(&[(Flow::left(h0), 2)], &st, &st).unwrap();
        let big = ba.hirota_pair(&[(Flow::left(b0), 2)], &bt, &bt).unwrap();
        seen += agree_series(&small, &big, "D^2 tau tau");
    }
    assert!(seen > 50, "only {seen} certified monomials");
}
