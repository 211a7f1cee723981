//! Table-driven identity checker.
//!
//! Every identity is a named check ([`IdentityId`]). A check evaluates
//! `LHS - RHS` in one of three representations and produces a
//! [`CheckReport`]:
//!
//! * `exact`: soliton tau functions at sampled rational points; the residual
//!   must be the zero Laurent polynomial.
//! * `windowed`: Poisson-algebra functionals; the residual must vanish on
//!   the certified window, and at least one coefficient must be certified.
//! * `convergent`: numerical mode data; the residual must be below a stated
//!   tolerance and shrink as the mode truncation grows.

mod bracket_checks;
mod hierarchy;
mod numeric;
pub use numeric::{COARSE_MODES, FINE_MODES, IOM_TOLERANCE};
mod soliton_checks;

use std::time::Instant;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poisson::Comparison;
use crate::scalar::{to_decimal, to_pq, ParamPoint, ParamSampler, SampleSpec, Scalar};

pub use hierarchy::check_lemma_t3_family;

/// Number of significant digits in decimal renderings.
pub const DECIMAL_DIGITS: usize = 30;

macro_rules! identities {
    ($($variant:ident => $name:literal, $mode:ident;)*) => {
        /// The checked identities, in report order.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum IdentityId {
            $($variant,)*
        }

        impl IdentityId {
            pub const ALL: &'static [IdentityId] = &[$(IdentityId::$variant,)*];

            pub fn name(self) -> &'static str {
                match self {
                    $(IdentityId::$variant => $name,)*
                }
            }

            pub fn mode(self) -> Mode {
                match self {
                    $(IdentityId::$variant => Mode::$mode,)*
                }
            }
        }
    };
}

identities! {
    // brackets among the dependent variables
    EtaEta => "eta-eta", Windowed;
    XiXi => "xi-xi", Windowed;
    EtaXi => "eta-xi", Windowed;
    EtaTauMinus => "eta-tau-", Windowed;
    EtaTauPlus => "eta-tau+", Windowed;
    XiTauMinus => "xi-tau-", Windowed;
    XiTauPlus => "xi-tau+", Windowed;
    // bilinear equations from the Hamiltonians eta_0 and xi_0
    HirotaT => "hirota-t", Windowed;
    HirotaTb => "hirota-tb", Windowed;
    Toda => "toda", Windowed;
    TodaField => "toda-field", Windowed;
    Eta0Xi0 => "eta0-xi0", Windowed;
    // soliton solutions
    TauShiftLemma => "tau-shift-lemma", Exact;
    HmPm1 => "hm-pm-1", Exact;
    HmPm2 => "hm-pm-2", Exact;
    Hm3 => "hm-3", Exact;
    To1 => "to-1", Exact;
    To2 => "to-2", Exact;
    To3 => "to-3", Exact;
    // integrals of motion
    ConjIom => "conj-iom", Convergent;
    M2Consistency => "m2-consistency", Exact;
    M3Consistency => "m3-consistency", Exact;
    // higher flows from the Hamiltonian structure
    Lemma32 => "lemma-3-2", Windowed;
    Lemma33 => "lemma-3-3", Windowed;
    Lemma34 => "lemma-3-4", Windowed;
    Lemma35 => "lemma-3-5", Windowed;
    PropT2 => "prop-t2", Windowed;
    PropT3 => "prop-t3", Windowed;
}

impl IdentityId {
    pub fn parse(s: &str) -> Option<IdentityId> {
        IdentityId::ALL.iter().copied().find(|id| id.name() == s)
    }

    fn index(self) -> u64 {
        IdentityId::ALL.iter().position(|&x| x == self).expect("listed") as u64
    }
}

/// Named groups accepted by [`select`] besides `all` and single ids.
pub const GROUPS: &[(&str, &[IdentityId])] = &[
    (
        "soliton-exact",
        &[
            IdentityId::TauShiftLemma,
            IdentityId::HmPm1,
            IdentityId::HmPm2,
            IdentityId::Hm3,
            IdentityId::To1,
            IdentityId::To2,
            IdentityId::To3,
        ],
    ),
    (
        "brackets",
        &[
            IdentityId::EtaEta,
            IdentityId::XiXi,
            IdentityId::EtaXi,
            IdentityId::EtaTauMinus,
            IdentityId::EtaTauPlus,
            IdentityId::XiTauMinus,
            IdentityId::XiTauPlus,
            IdentityId::Eta0Xi0,
            IdentityId::HirotaT,
            IdentityId::HirotaTb,
            IdentityId::Toda,
            IdentityId::TodaField,
        ],
    ),
    (
        "hierarchy",
        &[
            IdentityId::Lemma32,
            IdentityId::Lemma33,
            IdentityId::Lemma34,
            IdentityId::Lemma35,
            IdentityId::PropT2,
            IdentityId::PropT3,
        ],
    ),
    (
        "iom",
        &[IdentityId::ConjIom, IdentityId::M2Consistency, IdentityId::M3Consistency],
    ),
];

/// Ids matching `filter`: `all`, a group name, an exact id, or a prefix
/// ending in `*` (e.g. `hm-*`). Returns `None` if `filter` is none of these
/// forms; a well-formed filter may still match nothing.
pub fn select(filter: &str) -> Option<Vec<IdentityId>> {
    if filter == "all" {
        return Some(IdentityId::ALL.to_vec());
    }
    if let Some((_, ids)) = GROUPS.iter().find(|(g, _)| *g == filter) {
        let mut v = ids.to_vec();
        v.sort();
        return Some(v);
    }
    if let Some(id) = IdentityId::parse(filter) {
        return Some(vec![id]);
    }
    if let Some(prefix) = filter.strip_suffix('*') {
        return Some(
            IdentityId::ALL
                .iter()
                .copied()
                .filter(|id| id.name().starts_with(prefix))
                .collect(),
        );
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Windowed,
    Convergent,
}

/// Poisson-algebra truncation: `N_z` (z-window), `N_modes`, `D_deg`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Window {
    pub n_z: u32,
    pub n_modes: u32,
    pub d_deg: u32,
}

impl Window {
    pub const fn new(n_z: u32, n_modes: u32, d_deg: u32) -> Window {
        Window { n_z, n_modes, d_deg }
    }
}

/// Default window for the brackets and first-flow equations.
pub const BRACKET_WINDOW: Window = Window::new(6, 12, 6);
/// Default window for the higher-flow lemmas and propositions.
pub const HIERARCHY_WINDOW: Window = Window::new(3, 6, 6);

#[derive(Clone, Debug)]
pub struct CheckConfig {
    pub seed: u64,
    /// Parameter samples per soliton number.
    pub samples: usize,
    /// Soliton numbers for the soliton and integral checks.
    pub solitons: Vec<usize>,
    pub bracket_window: Window,
    pub hierarchy_window: Window,
    /// Whether reports carry wall-clock timings (off keeps output
    /// byte-reproducible).
    pub timings: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            seed: 0,
            samples: 5,
            solitons: vec![1, 2, 3],
            bracket_window: BRACKET_WINDOW,
            hierarchy_window: HIERARCHY_WINDOW,
            timings: false,
        }
    }
}

impl CheckConfig {
    /// Overrides both Poisson windows.
    pub fn with_window(mut self, w: Window) -> Self {
        self.bracket_window = w;
        self.hierarchy_window = w;
        self
    }

    /// Deterministic sampler for one check (and one soliton number).
    pub(crate) fn sampler(&self, id: IdentityId, n: usize) -> ParamSampler {
        ParamSampler::new(mix(self.seed, id.index() * 64 + n as u64))
    }

    pub(crate) fn rng(&self, id: IdentityId, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(mix(self.seed ^ 0x5eed, id.index() * 1024 + salt))
    }
}

fn mix(seed: u64, salt: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed.wrapping_add(salt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Residual {
    pub is_exact_zero: bool,
    /// Largest absolute residual as `p/q`.
    pub max_abs: String,
    pub max_abs_decimal: String,
}

impl Residual {
    pub fn from_scalar(x: &Scalar) -> Residual {
        let a = x.abs();
        Residual {
            is_exact_zero: a.is_zero(),
            max_abs: to_pq(&a),
            max_abs_decimal: to_decimal(&a, DECIMAL_DIGITS),
        }
    }
}

/// Counts of certified coefficients for windowed checks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowStats {
    pub compared: usize,
    pub conclusive: usize,
    pub min_degree: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckParams {
    pub seed: u64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<ParamPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub mode_truncations: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub id: &'static str,
    pub mode: Mode,
    pub params: CheckParams,
    pub residual: Residual,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowStats>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

/// What a check family hands back before timing and packaging.
#[derive(Clone, Debug)]
pub(crate) struct Outcome {
    pub residual: Scalar,
    pub pass: bool,
    pub points: Vec<ParamPoint>,
    pub window: Option<Window>,
    pub stats: Option<WindowStats>,
    pub mode_truncations: Vec<usize>,
    pub detail: Option<String>,
}

impl Outcome {
    pub(crate) fn exact(residual: Scalar, points: Vec<ParamPoint>) -> Outcome {
        Outcome {
            pass: residual.is_zero(),
            residual,
            points,
            window: None,
            stats: None,
            mode_truncations: Vec::new(),
            detail: None,
        }
    }

    pub(crate) fn windowed(cmp: &Comparison, window: Window, points: Vec<ParamPoint>) -> Outcome {
        let pass = cmp.passed();
        let detail = if cmp.conclusive == 0 {
            Some("inconclusive: no coefficient is certified on this window".to_string())
        } else if !cmp.zero {
            Some("nonzero residual on the certified window".to_string())
        } else {
            None
        };
        Outcome {
            residual: cmp.max_abs.clone(),
            pass,
            points,
            window: Some(window),
            stats: Some(WindowStats {
                compared: cmp.compared,
                conclusive: cmp.conclusive,
                min_degree: (cmp.conclusive > 0).then_some(cmp.min_degree),
            }),
            mode_truncations: Vec::new(),
            detail,
        }
    }

    fn failure(id: IdentityId, e: Error, window: Option<Window>) -> Outcome {
        Outcome {
            residual: Scalar::zero(),
            pass: false,
            points: Vec::new(),
            window,
            stats: None,
            mode_truncations: Vec::new(),
            detail: Some(format!("{}: {e}", id.name())),
        }
    }
}

/// Draws a valid parameter point with `n` solitons, rejecting points for
/// which `accept` fails (poles in derived quantities).
pub(crate) fn sample_point(
    sampler: &mut ParamSampler,
    n: usize,
    spec: &SampleSpec,
    mut accept: impl FnMut(&ParamPoint) -> bool,
) -> Result<ParamPoint> {
    for _ in 0..10_000 {
        let p = sampler.sample(n, spec);
        if accept(&p) {
            return Ok(p);
        }
    }
    Err(Error::Degenerate(format!("no admissible {n}-soliton point after 10000 draws")))
}

/// Small nonzero rational in `[-max, max]` with denominator at most `den`.
pub(crate) fn small_rational(rng: &mut ChaCha8Rng, max: i64, den: i64) -> Scalar {
    loop {
        let d = rng.gen_range(1..=den);
        let m = rng.gen_range(-max * d..=max * d);
        if m != 0 {
            return Scalar::new(m.into(), d.into());
        }
    }
}

pub fn run_check(id: IdentityId, config: &CheckConfig) -> CheckReport {
    let start = Instant::now();
    let (result, window) = match id.mode() {
        Mode::Exact if matches!(id, IdentityId::M2Consistency | IdentityId::M3Consistency) => {
            (numeric::run(id, config), None)
        }
        Mode::Exact => (soliton_checks::run(id, config), None),
        Mode::Convergent => (numeric::run(id, config), None),
        Mode::Windowed => match id {
            IdentityId::Lemma32
            | IdentityId::Lemma33
            | IdentityId::Lemma34
            | IdentityId::Lemma35
            | IdentityId::PropT2
            | IdentityId::PropT3 => (
                hierarchy::run(id, config.hierarchy_window, config),
                Some(config.hierarchy_window),
            ),
            _ => (
                bracket_checks::run(id, config.bracket_window, config),
                Some(config.bracket_window),
            ),
        },
    };
    let out = result.unwrap_or_else(|e| Outcome::failure(id, e, window));
    let elapsed = start.elapsed().as_millis() as u64;
    CheckReport {
        id: id.name(),
        mode: id.mode(),
        params: CheckParams {
            seed: config.seed,
            points: out.points,
            window: out.window,
            mode_truncations: out.mode_truncations,
        },
        residual: Residual::from_scalar(&out.residual),
        window: out.stats,
        pass: out.pass,
        detail: out.detail,
        elapsed_ms: config.timings.then_some(elapsed),
    }
}

/// Runs the ids in parallel and returns the reports in id order.
pub fn run_ids(ids: &[IdentityId], config: &CheckConfig) -> Vec<CheckReport> {
    use rayon::prelude::*;
    let mut ids = ids.to_vec();
    ids.sort();
    ids.dedup();
    // the slowest checks first, so they do not trail at the end of the queue
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(cost_rank(ids[i])));
    let mut done: Vec<(usize, CheckReport)> = order
        .par_iter()
        .with_max_len(1)
        .map(|&i| (i, run_check(ids[i], config)))
        .collect();
    done.sort_by_key(|(i, _)| *i);
    done.into_iter().map(|(_, r)| r).collect()
}

fn cost_rank(id: IdentityId) -> u32 {
    match id {
        IdentityId::PropT3 | IdentityId::Lemma32 | IdentityId::Lemma33 => 3,
        IdentityId::Lemma34 | IdentityId::Lemma35 | IdentityId::PropT2 => 2,
        IdentityId::Toda | IdentityId::TodaField | IdentityId::HirotaTb | IdentityId::EtaXi => 1,
        _ => 0,
    }
}

/// Runs every id matching `filter` (see [`select`]).
pub fn run_suite(filter: &str, config: &CheckConfig) -> Result<Vec<CheckReport>> {
    let ids = select(filter).ok_or_else(|| Error::Argument(format!("unknown identity filter {filter:?}")))?;
    Ok(run_ids(&ids, config))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        assert_eq!(IdentityId::ALL.len(), 28);
        for &id in IdentityId::ALL {
            assert_eq!(IdentityId::parse(id.name()), Some(id));
        }
        assert_eq!(IdentityId::parse("bogus"), None);
    }

    #[test]
    fn filters() {
        assert_eq!(select("all").unwrap().len(), 28);
        assert_eq!(select("soliton-exact").unwrap().len(), 7);
        assert_eq!(select("hm-*").unwrap().len(), 3);
        assert_eq!(select("nothing-*").unwrap(), vec![]);
        assert!(select("bogus").is_none());
    }

    #[test]
    fn residual_rendering() {
        let r = Residual::from_scalar(&Scalar::zero());
        assert!(r.is_exact_zero);
        assert_eq!(r.max_abs, "0/1");
    }
}
