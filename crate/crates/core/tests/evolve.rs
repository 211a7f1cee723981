//! The integrator against the analytic one-soliton trajectory, the
//! conservation monitors and the convergence order.

use num_complex::Complex64;

use todabo::evolve::{
    i2, order_ratio, q_from_gamma, run, soliton_init, Init, RunConfig, RunSummary, State,
};
use todabo::iom::{constant_term_integral, Modes};
use todabo::scalar::{rat, to_f64, ParamSampler, SampleSpec, Scalar};
use todabo::series::KernelKind;
use todabo::ParamPoint;

fn soliton_point() -> ParamPoint {
    let mut sampler = ParamSampler::new(7);
    loop {
        let p = sampler.sample(1, &SampleSpec::default());
        if soliton_init(&p).is_ok() {
            return p;
        }
    }
}

fn soliton_run() -> RunSummary {
    let p = soliton_point();
    let cfg = RunConfig {
        n: 64,
        dt: 1e-3,
        steps: 1000,
        check_interval: 100,
        q: Complex64::new(to_f64(&p.q), 0.0),
        init: soliton_init(&p).unwrap(),
        blowup: 1e6,
    };
    run(&cfg, |_| Ok(())).unwrap()
}

#[test]
fn one_soliton_trajectory() {
    let s = soliton_run();
    assert!((s.t_final - 1.0).abs() < 1e-12);
    let err = s.max_mode_error.unwrap();
    assert!(err < 1e-6, "max mode error {err:e}");
    assert!(s.i1_drift <= 1e-12, "I1 drift {:e}", s.i1_drift);
    assert!(s.i2_relative_drift < 1e-6, "I2 drift {:e}", s.i2_relative_drift);
}

fn random_state() -> State {
    let cfg_q = q_from_gamma(Complex64::new(0.1, 0.05));
    let mut modes = vec![Complex64::new(0.0, 0.0); 2 * 16 + 1];
    let mut x = 0.37f64;
    for (i, z) in modes.iter_mut().enumerate() {
        let m = i as i64 - 16;
        // a fixed smooth profile
        x = (x * 3.7 + 0.11).fract();
        *z = Complex64::new(x - 0.5, 0.3 - x) * 0.5f64.powi(m.abs() as i32);
    }
    modes[16] = Complex64::new(1.0, 0.0);
    State::new(16, modes, cfg_q).unwrap()
}

#[test]
fn fourth_order_by_step_halving() {
    let r = order_ratio(&random_state(), 0.05, 20).unwrap();
    assert!((12.0..=20.0).contains(&r), "ratio {r}");
}

#[test]
fn random_run_conserves_eta0() {
    let cfg = RunConfig {
        n: 32,
        dt: 1e-3,
        steps: 500,
        check_interval: 50,
        q: q_from_gamma(Complex64::new(0.1, 0.05)),
        init: Init::Random { seed: 3, decay: 0.5 },
        blowup: 1e6,
    };
    let mut records = 0;
    let s = run(&cfg, |_| {
        records += 1;
        Ok(())
    })
    .unwrap();
    assert_eq!(records, 11);
    assert!(s.i1_drift < 1e-12);
    assert!(s.max_mode_error.is_none());
}

#[test]
fn second_integral_matches_the_exact_kernel() {
    // rational q, real modes: the float I_2 against the constant-term integral
    let q = rat(1, 3);
    let values: Vec<Scalar> = (-4i64..=4).map(|m| rat(7 - m * m, 5 + m.abs())).collect();
    let exact = constant_term_integral(KernelKind::Plus, &q, &Modes::new(4, values.clone()).unwrap(), 2, 4).unwrap();
    let modes = values.iter().map(|v| Complex64::new(to_f64(v), 0.0)).collect();
    let s = State::new(4, modes, Complex64::new(1.0 / 3.0, 0.0)).unwrap();
    assert!((i2(&s) - Complex64::new(to_f64(&exact), 0.0)).norm() < 1e-12);
}
