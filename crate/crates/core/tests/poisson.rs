//! Bracket axioms on random polynomials and the basic flows of the fields.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use todabo::poisson::{AlphaPoly, Comparison, FieldSeries, Mono, PoissonAlgebra, Side, Sign, Trunc};
use todabo::scalar::{rat, Scalar};
use todabo::series::Coeff;

fn random_poly(rng: &mut ChaCha8Rng, trunc: Trunc) -> AlphaPoly {
    let mut terms = Vec::new();
    for _ in 0..4 {
        let deg = rng.gen_range(0..=2);
        let modes: Vec<i64> = (0..deg)
            .map(|_| {
                let n = rng.gen_range(1..=2);
                if rng.gen_bool(0.5) {
                    n
                } else {
                    -n
                }
            })
            .collect();
        let c = rat(rng.gen_range(-5..=5), rng.gen_range(1..=4));
        terms.push((Mono::from_modes(&modes), c));
    }
    AlphaPoly::from_terms(trunc, &terms)
}

fn setup() -> (PoissonAlgebra, ChaCha8Rng) {
    let alg = PoissonAlgebra::new(&rat(2, 3), Trunc::new(8, 8)).unwrap();
    (alg, ChaCha8Rng::seed_from_u64(11))
}

#[test]
fn antisymmetry() {
    let (alg, mut rng) = setup();
    for _ in 0..20 {
        let f = random_poly(&mut rng, alg.trunc());
        let g = random_poly(&mut rng, alg.trunc());
        let fg = alg.bracket(&f, &g).unwrap();
        let gf = alg.bracket(&g, &f).unwrap();
        assert!(fg.add(&gf).is_zero());
        assert!(fg.is_closed());
    }
}

#[test]
fn jacobi() {
    let (alg, mut rng) = setup();
    let b = |x: &AlphaPoly, y: &AlphaPoly| alg.bracket(x, y).unwrap();
    for _ in 0..20 {
        let f = random_poly(&mut rng, alg.trunc());
        let g = random_poly(&mut rng, alg.trunc());
        let h = random_poly(&mut rng, alg.trunc());
        let sum = b(&f, &b(&g, &h)).add(&b(&g, &b(&h, &f))).add(&b(&h, &b(&f, &g)));
        assert!(sum.is_zero());
        assert!(sum.is_closed());
    }
}

#[test]
fn leibniz() {
    let (alg, mut rng) = setup();
    for _ in 0..20 {
        let f = random_poly(&mut rng, alg.trunc());
        let g = random_poly(&mut rng, alg.trunc());
        let h = random_poly(&mut rng, alg.trunc());
        let lhs = alg.bracket(&f, &g.mul_poly(&h)).unwrap();
        let rhs = alg
            .bracket(&f, &g)
            .unwrap()
            .mul_poly(&h)
            .add(&g.mul_poly(&alg.bracket(&f, &h).unwrap()));
        assert!(lhs.sub(&rhs).is_zero());
    }
}

fn window() -> (PoissonAlgebra, Scalar) {
    (PoissonAlgebra::new(&rat(1, 2), Trunc::new(5, 5)).unwrap(), rat(1, 7))
}

fn assert_conclusive_zero(c: Comparison) {
    assert!(c.passed(), "{c:?}");
    assert_eq!(c.conclusive, c.compared, "{c:?}");
}

fn compare(alg: &PoissonAlgebra, a: &FieldSeries, b: &FieldSeries) -> Comparison {
    alg.compare(a, b, -3, 3).unwrap()
}

#[test]
fn eta_flow_is_the_mode_equation() {
    // ∂_t η = η (η_+(z) - η_+(zq) - η_-(z) + η_-(z/q))
    let (alg, eps) = window();
    let q = alg.q().clone();
    let eta = alg.build_eta(&eps).unwrap();
    let e0 = alg.zero_mode(&eta);
    let lhs = alg.flow(&e0, &eta, Side::Left).unwrap();
    let ep = alg.plus_part(&eta).unwrap();
    let em = alg.minus_part(&eta).unwrap();
    let plus = alg.fsub(&ep, &ep.scale_var(&q)).unwrap();
    let minus = alg.fsub(&em.scale_var(&q.recip()), &em).unwrap();
    let rhs = alg.fmul(&eta, &alg.fadd(&plus, &minus).unwrap()).unwrap();
    assert_conclusive_zero(compare(&alg, &lhs, &rhs));
}

#[test]
fn tau_flows() {
    // ∂_t τ_- = η_- τ_-, ∂_t τ_+ = -η_+ τ_+
    let (alg, eps) = window();
    let eta = alg.build_eta(&eps).unwrap();
    let e0 = alg.zero_mode(&eta);
    for sign in [Sign::Minus, Sign::Plus] {
        let tau = alg.build_tau(sign).unwrap();
        let lhs = alg.flow(&e0, &tau, Side::Left).unwrap();
        let rhs = match sign {
            Sign::Minus => alg.fmul(&alg.minus_part(&eta).unwrap(), &tau).unwrap(),
            Sign::Plus => alg.fmul(&alg.plus_part(&eta).unwrap(), &tau).unwrap().scale(&rat(-1, 1)),
        };
        assert_conclusive_zero(compare(&alg, &lhs, &rhs));
    }
}

#[test]
fn eta_under_the_second_time() {
    // ∂_t̄ η = {η, ξ_0} = τ+(zq)τ+(z/q)/τ+(z)^2 - τ-(zq)τ-(z/q)/τ-(z)^2
    let (alg, eps) = window();
    let q = alg.q().clone();
    let eta = alg.build_eta(&eps).unwrap();
    let x0 = alg.zero_mode(&alg.build_xi(&eps).unwrap());
    let lhs = alg.flow(&x0, &eta, Side::Right).unwrap();
    let ratio = |sign| {
        let t = alg.build_tau(sign).unwrap();
        let inv = alg.finv(&t).unwrap();
        let num = alg.fmul(&t.scale_var(&q), &t.scale_var(&q.recip())).unwrap();
        alg.fmul(&num, &alg.fmul(&inv, &inv).unwrap()).unwrap()
    };
    let rhs = alg.fsub(&ratio(Sign::Plus), &ratio(Sign::Minus)).unwrap();
    assert_conclusive_zero(compare(&alg, &lhs, &rhs));
}

#[test]
fn zero_modes_commute() {
    let (alg, eps) = window();
    let e0 = alg.zero_mode(&alg.build_eta(&eps).unwrap());
    let x0 = alg.zero_mode(&alg.build_xi(&eps).unwrap());
    let c = alg.bracket(&e0, &x0).unwrap().cap();
    assert!(c.is_zero());
    assert!(c.is_conclusive());
}

#[test]
fn constants_are_central() {
    let (alg, eps) = window();
    let e0 = alg.zero_mode(&alg.build_eta(&eps).unwrap());
    let c = alg.constant_field(alg.constant(&rat(3, 5)));
    let f = alg.flow(&e0, &c, Side::Left).unwrap();
    assert!(f.coeffs().iter().all(|x| x.is_zero()));
}
