//! `toda-bo`: runs the identity checks, evaluates integrals of motion and
//! soliton data, and integrates the mode equations.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or a run
//! errors, 2 on a usage error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use serde_json::json;

use todabo::evolve::{self, Init, RunConfig};
use todabo::iom::{closed_i, i_k_def};
use todabo::scalar::{parse_pq, to_pq, to_decimal, ParamSampler, SampleSpec};
use todabo::soliton::{
    choose_amplitudes, decay_rate, eta_modes, make_tau_minus, make_tau_plus, xi_modes, ExpansionSpec,
    LaurentPoly, ModeVector,
};
use todabo::verify::{self, CheckConfig, CheckReport, Window, DECIMAL_DIGITS};
use todabo::{ParamPoint, Scalar};

/// Schema tag of verification reports.
pub const REPORT_SCHEMA: &str = "toda-bo-report/1";

#[derive(Parser, Debug)]
#[command(name = "toda-bo", version, about = "Exact checks for the periodic Benjamin-Ono equation with discrete Laplacian and the 2D Toda hierarchy")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run identity checks and write a JSON report.
    Verify(VerifyArgs),
    /// Integrals of motion on sampled soliton data against the closed form.
    Iom(IomArgs),
    /// Integrate the truncated mode equations.
    Evolve(EvolveArgs),
    /// Tau functions (and with --eval the field modes) of a soliton spec.
    Soliton(SolitonArgs),
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// An id, a group (soliton-exact, brackets, hierarchy, iom), `all`, or a
    /// prefix ending in `*`.
    #[arg(long, default_value = "all")]
    identity: String,
    /// Soliton numbers, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1usize, 2, 3])]
    solitons: Vec<usize>,
    /// Parameter samples per soliton number.
    #[arg(long, default_value_t = 5)]
    samples: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// z-window of the windowed checks (both families).
    #[arg(long)]
    trunc_z: Option<u32>,
    /// Mode truncation of the windowed checks.
    #[arg(long)]
    trunc_modes: Option<u32>,
    /// Degree truncation of the windowed checks.
    #[arg(long)]
    trunc_deg: Option<u32>,
    /// Include wall-clock timings (the report is then not reproducible).
    #[arg(long)]
    timings: bool,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct IomArgs {
    /// Largest k.
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    solitons: usize,
    #[arg(long, default_value_t = 48)]
    modes: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum InitKind {
    Soliton,
    Random,
}

#[derive(Args, Debug)]
struct EvolveArgs {
    #[arg(long, default_value_t = 64)]
    modes: usize,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    /// Steps between recorded samples.
    #[arg(long, default_value_t = 100)]
    check_interval: usize,
    /// `q = exp(2πiγ)` for random initial data; soliton data use the `q` of
    /// the sampled point.
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    gamma_re: f64,
    #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
    gamma_im: f64,
    #[arg(long, value_enum, default_value_t = InitKind::Soliton)]
    init: InitKind,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Decay rate of random initial modes.
    #[arg(long, default_value_t = 0.5)]
    decay: f64,
    /// Trajectory (JSON lines); stdout when absent. The summary goes to
    /// stderr.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolitonArgs {
    /// JSON file `{"s": "1/2", "eps": "-1/10", "a": [...], "b": [...]}`; `b` is
    /// optional.
    #[arg(long)]
    spec: PathBuf,
    /// Also extract the modes of η and ξ.
    #[arg(long)]
    eval: bool,
    /// Number of modes on each side for --eval.
    #[arg(long, default_value_t = 16)]
    modes: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(String),
    Run(String),
}

impl From<todabo::Error> for Failure {
    fn from(e: todabo::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

#[derive(Serialize)]
struct Report<'a> {
    schema: &'static str,
    checks: &'a [CheckReport],
}

/// The report document for `reports`.
fn report_json(reports: &[CheckReport]) -> serde_json::Result<String> {
    let mut s = serde_json::to_string_pretty(&Report {
        schema: REPORT_SCHEMA,
        checks: reports,
    })?;
    s.push('\n');
    Ok(s)
}

fn emit_report(reports: &[CheckReport], path: Option<&Path>) -> Result<(), Failure> {
    write_out(path, &report_json(reports)?)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("TODA_BO_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Failure::Usage(format!("TODA_BO_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Run(e.to_string()))?;
    }
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<bool, Failure> {
    let ids = verify::select(&a.identity)
        .filter(|ids| !ids.is_empty())
        .ok_or_else(|| Failure::Usage(format!("unknown identity {:?}", a.identity)))?;
    if a.samples == 0 {
        return Err(Failure::Usage("--samples must be at least 1".into()));
    }
    let mut config = CheckConfig {
        seed: a.seed,
        samples: a.samples,
        solitons: a.solitons,
        timings: a.timings,
        ..CheckConfig::default()
    };
    for w in [&mut config.bracket_window, &mut config.hierarchy_window] {
        *w = Window::new(
            a.trunc_z.unwrap_or(w.n_z),
            a.trunc_modes.unwrap_or(w.n_modes),
            a.trunc_deg.unwrap_or(w.d_deg),
        );
    }
    let reports = verify::run_ids(&ids, &config);
    emit_report(&reports, a.out.as_deref())?;
    for r in &reports {
        let status = if r.pass { "pass" } else { "FAIL" };
        eprintln!("{status} {} residual={}", r.id, r.residual.max_abs_decimal);
    }
    Ok(reports.iter().all(|r| r.pass))
}

fn sample_soliton_point(seed: u64, n: usize) -> Result<(ParamPoint, Vec<Scalar>), Failure> {
    let mut sampler = ParamSampler::new(seed);
    for _ in 0..10_000 {
        let p = sampler.sample(n, &SampleSpec::default());
        if let Ok((b, _)) = choose_amplitudes(&p, ExpansionSpec::default().max_rate) {
            return Ok((p, b));
        }
    }
    Err(Failure::Run(format!("no {n}-soliton point with a convergent expansion")))
}

fn decimal(x: &Scalar) -> String {
    to_decimal(x, DECIMAL_DIGITS)
}

fn cmd_iom(a: IomArgs) -> Result<bool, Failure> {
    if a.k == 0 || a.modes == 0 {
        return Err(Failure::Usage("--k and --modes must be at least 1".into()));
    }
    let (p, b) = sample_soliton_point(a.seed, a.solitons)?;
    let eta = eta_modes(&p, &b, a.modes, ExpansionSpec::default())?;
    let tol = Scalar::from_float(verify::IOM_TOLERANCE).expect("finite");
    let mut ok = true;
    let mut rows = Vec::new();
    for k in 1..=a.k {
        let r = i_k_def(&eta, &p.q, k, a.modes)?;
        let closed = closed_i(k, &p)?;
        let residual = (&r.value - &closed).abs();
        ok &= residual < tol;
        rows.push(json!({
            "k": k,
            "value": decimal(&r.value),
            "closed": decimal(&closed),
            "residual": decimal(&residual),
            "tail_bound": decimal(&r.tail),
        }));
    }
    let doc = json!({
        "schema": "toda-bo-iom/1",
        "seed": a.seed,
        "point": p,
        "b": b.iter().map(to_pq).collect::<Vec<_>>(),
        "modes": a.modes,
        "integrals": rows,
    });
    write_out(a.out.as_deref(), &(serde_json::to_string_pretty(&doc)? + "\n"))?;
    Ok(ok)
}

fn cmd_evolve(a: EvolveArgs) -> Result<bool, Failure> {
    if !(a.dt > 0.0) || a.steps == 0 || a.check_interval == 0 || a.modes == 0 {
        return Err(Failure::Usage("need --dt > 0 and positive --steps, --check-interval, --modes".into()));
    }
    let q = evolve::q_from_gamma(Complex64::new(a.gamma_re, a.gamma_im));
    if a.gamma_im < 0.0 {
        return Err(Failure::Usage("--gamma-im must be non-negative".into()));
    }
    let init = match a.init {
        InitKind::Soliton => {
            let (p, _) = sample_soliton_point(a.seed, 1)?;
            evolve::soliton_init(&p)?
        }
        InitKind::Random => Init::Random {
            seed: a.seed,
            decay: a.decay,
        },
    };
    let cfg = RunConfig {
        n: a.modes,
        dt: a.dt,
        steps: a.steps,
        check_interval: a.check_interval,
        q,
        init,
        blowup: 1e8,
    };
    let mut text = String::new();
    let summary = evolve::run(&cfg, |r| {
        text.push_str(&serde_json::to_string(r).expect("records serialize"));
        text.push('\n');
        Ok(())
    })?;
    write_out(a.out.as_deref(), &text)?;
    eprintln!("{}", serde_json::to_string(&summary)?);
    Ok(true)
}

#[derive(Deserialize)]
struct SolitonSpecFile {
    s: String,
    eps: String,
    a: Vec<String>,
    #[serde(default)]
    b: Option<Vec<String>>,
}

fn poly_json(p: &LaurentPoly) -> Vec<serde_json::Value> {
    p.iter().map(|(k, v)| json!([k, to_pq(v)])).collect()
}

fn modes_json(m: &ModeVector) -> Vec<String> {
    m.values.iter().map(decimal).collect()
}

fn cmd_soliton(a: SolitonArgs) -> Result<bool, Failure> {
    let text = fs::read_to_string(&a.spec)?;
    let spec: SolitonSpecFile =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("bad spec file: {e}")))?;
    let parse = |s: &String| parse_pq(s).map_err(|e| Failure::Usage(e.to_string()));
    let a_vals = spec.a.iter().map(parse).collect::<Result<Vec<_>, _>>()?;
    let p = ParamPoint::new(parse(&spec.s)?, parse(&spec.eps)?, a_vals)?;
    let b = match &spec.b {
        Some(b) => b.iter().map(parse).collect::<Result<Vec<_>, _>>()?,
        // unit amplitudes still give the tau functions; --eval then reports
        // the expansion error
        None => choose_amplitudes(&p, ExpansionSpec::default().max_rate)
            .map(|(b, _)| b)
            .unwrap_or_else(|_| vec![Scalar::from_integer(1.into()); p.n()]),
    };
    if b.len() != p.n() {
        return Err(Failure::Usage(format!("{} amplitudes for {} solitons", b.len(), p.n())));
    }
    let tp = make_tau_plus(&p)?;
    let tm = make_tau_minus(&p)?;
    let mut doc = json!({
        "schema": "toda-bo-soliton/1",
        "point": p,
        "b": b.iter().map(to_pq).collect::<Vec<_>>(),
        "tau_plus": poly_json(&tp.evaluate(&b)?),
        "tau_minus": poly_json(&tm.evaluate(&b)?),
    });
    if a.eval {
        let spec = ExpansionSpec::default();
        doc["decay_rate"] = json!(decay_rate(&tp, &tm, &b)?);
        doc["eta"] = json!(modes_json(&eta_modes(&p, &b, a.modes, spec)?));
        doc["xi"] = json!(modes_json(&xi_modes(&p, &b, a.modes, spec)?));
    }
    write_out(a.out.as_deref(), &(serde_json::to_string_pretty(&doc)? + "\n"))?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Iom(a) => cmd_iom(a),
        Command::Evolve(a) => cmd_evolve(a),
        Command::Soliton(a) => cmd_soliton(a),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}\n\nRun `toda-bo --help` for usage.");
            ExitCode::from(2)
        }
        Err(Failure::Run(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report() {
        let s = report_json(&[]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v, json!({"schema": "toda-bo-report/1", "checks": []}));
    }

    #[test]
    fn one_passing_check() {
        let id = verify::IdentityId::parse("hm-pm-1").unwrap();
        let config = CheckConfig {
            samples: 1,
            solitons: vec![1],
            ..CheckConfig::default()
        };
        let r = verify::run_check(id, &config);
        let v: serde_json::Value = serde_json::from_str(&report_json(&[r]).unwrap()).unwrap();
        assert_eq!(v["checks"][0]["pass"], json!(true));
        assert_eq!(v["checks"][0]["residual"]["max_abs"], json!("0/1"));
    }

    #[test]
    fn flags_parse() {
        let c = Cli::try_parse_from(["toda-bo", "verify", "--identity", "hm-*", "--solitons", "1,2"]).unwrap();
        match c.command {
            Command::Verify(a) => assert_eq!(a.solitons, vec![1, 2]),
            _ => panic!("wrong subcommand"),
        }
        assert!(Cli::try_parse_from(["toda-bo", "verify", "--bogus"]).is_err());
    }
}
