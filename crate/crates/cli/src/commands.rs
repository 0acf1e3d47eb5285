use serde::{Deserialize, Serialize};

use qrf_core::catalysis::{
    pairwise_report, correlation_balance, find_intertwiner as search_intertwiner, finite_group_check,
    run_suite, verify_scenario, CorrelationReport, FiniteGroupCheck, IntertwinerResult, ScenarioReport,
    SuiteEntry,
};
use qrf_core::channel::is_covariant;
use qrf_core::io::{self, de_matrices, CatalysisScenarioJson, ChannelJson, FrameScenarioJson, SymmetryJson};
use qrf_core::linalg::diag_real;
use qrf_core::par::Exec;
use qrf_core::refframe::{
    catalytic_channel, degradation_sweep, phase_reference_scenario, sweep_csv, FrameConfig, COVARIANCE_TOL,
};
use qrf_core::repr::{symmetric_defining_representation, FiniteGroup, FiniteGroupRep};
use qrf_core::words::{wiegmann_equivalent, UnitarySearchConfig, WiegmannConfig, WiegmannVerdict};
use qrf_core::CMat;

use crate::output::{emit, read_input, Failure, Outcome};
use crate::{CatalysisArgs, Common, DemoArgs, InputArgs, RecoveryArgs, SweepArgs};

type Run = Result<Outcome, Failure>;

/// Every JSON report: the command, the configuration actually used, the
/// verdict and the command-specific result.
#[derive(Serialize)]
struct Report<'a, C: Serialize, R: Serialize> {
    command: &'a str,
    config: C,
    passed: bool,
    failures: &'a [String],
    result: R,
}

fn write_report<C: Serialize, R: Serialize>(
    common: &Common,
    command: &str,
    config: C,
    failures: Vec<String>,
    result: R,
) -> Run {
    let report = Report {
        command,
        config,
        passed: failures.is_empty(),
        failures: &failures,
        result,
    };
    emit(common.output.as_deref(), &io::to_string(&report))?;
    Ok(Outcome { failures, unconverged: false })
}

fn parse<T: for<'de> Deserialize<'de>>(path: &std::path::Path) -> Result<T, Failure> {
    Ok(io::from_str(&read_input(path)?)?)
}

fn no_tol(common: &Common, command: &str) -> Result<(), Failure> {
    match common.tol {
        Some(_) => Err(Failure::usage(format!("`{command}` has no tolerance to override"))),
        None => Ok(()),
    }
}

fn no_seed(common: &Common, command: &str) -> Result<(), Failure> {
    match common.seed {
        Some(_) => Err(Failure::usage(format!("`{command}` is deterministic and takes no seed"))),
        None => Ok(()),
    }
}

fn search_config(base: Option<UnitarySearchConfig>, common: &Common) -> UnitarySearchConfig {
    let mut cfg = base.unwrap_or_default();
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(t) = common.tol {
        cfg.tol = t;
    }
    cfg
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CovarianceInput {
    channel: ChannelJson,
    symmetry_in: SymmetryJson,
    symmetry_out: SymmetryJson,
    #[serde(default)]
    tol: Option<f64>,
}

#[derive(Serialize)]
struct CovarianceResult {
    covariant: bool,
    max_violation: f64,
    tp_defect: f64,
}

pub fn check_covariance(a: &InputArgs) -> Run {
    no_seed(&a.common, "check-covariance")?;
    let input: CovarianceInput = parse(&a.input)?;
    let tol = a.common.tol.or(input.tol).unwrap_or(COVARIANCE_TOL);
    let t = input.channel.to_channel()?;
    let check = is_covariant(t.map(), &input.symmetry_in.to_symmetry()?, &input.symmetry_out.to_symmetry()?, tol)?;
    let mut failures = Vec::new();
    if !check.covariant {
        failures.push(format!("covariance violation {:e} exceeds {tol:e}", check.max_violation));
    }
    let result = CovarianceResult {
        covariant: check.covariant,
        max_violation: check.max_violation,
        tp_defect: t.map().tp_defect(),
    };
    write_report(&a.common, "check-covariance", serde_json::json!({ "tol": tol }), failures, result)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WiegmannInput {
    #[serde(deserialize_with = "de_matrices")]
    a: Vec<CMat>,
    #[serde(deserialize_with = "de_matrices")]
    b: Vec<CMat>,
    #[serde(default)]
    config: Option<WiegmannConfig>,
}

pub fn wiegmann_equiv(a: &InputArgs, exec: Exec) -> Run {
    let input: WiegmannInput = parse(&a.input)?;
    let mut cfg = input.config.unwrap_or_default();
    if let Some(s) = a.common.seed {
        cfg.seed = s;
    }
    if let Some(t) = a.common.tol {
        cfg.tol = t;
    }
    let verdict: WiegmannVerdict = wiegmann_equivalent(&input.a, &input.b, &cfg, exec)?;
    write_report(&a.common, "wiegmann-equiv", &cfg, Vec::new(), verdict)
}

fn load_scenario(path: &std::path::Path, common: &Common) -> Result<(qrf_core::catalysis::CatalysisScenario, UnitarySearchConfig), Failure> {
    let json: CatalysisScenarioJson = parse(path)?;
    let sc = json.to_scenario()?;
    Ok((sc, search_config(json.search, common)))
}

pub fn find_intertwiner(a: &InputArgs, exec: Exec) -> Run {
    let (sc, cfg) = load_scenario(&a.input, &a.common)?;
    let r = search_intertwiner(&sc, &cfg, exec)?;
    let mut failures = Vec::new();
    if !r.success {
        failures.push(format!(
            "no intertwiner found (state residual {:e}, intertwining residual {:e})",
            r.state_residual, r.intertwining_residual
        ));
    }
    write_report(&a.common, "find-intertwiner", &cfg, failures, r)
}

#[derive(Serialize)]
struct ScenarioResult {
    scenario: ScenarioReport,
    /// Skipped when the scenario is not admissible.
    intertwiner: Option<IntertwinerResult>,
    correlation: CorrelationReport,
}

#[derive(Serialize)]
struct SuiteResult {
    count: usize,
    passed: usize,
    entries: Vec<SuiteEntry>,
}

#[derive(Serialize)]
struct SuiteConfig<'a> {
    count: usize,
    seed: u64,
    search: &'a UnitarySearchConfig,
}

/// Tolerance on `I(C:SE)` and `ΔH` for exactly catalytic scenarios.
const CORRELATION_TOL: f64 = 1e-9;

pub fn catalysis_verify(a: &CatalysisArgs, exec: Exec) -> Run {
    if let Some(count) = a.suite {
        let cfg = search_config(None, &Common { seed: None, ..a.common.clone() });
        let seed = a.common.seed.unwrap_or(0);
        let entries = run_suite(count, seed, &cfg, exec);
        let failures: Vec<String> = entries
            .iter()
            .filter(|e| !e.passed())
            .map(|e| match &e.error {
                Some(err) => format!("seed {}: {err}", e.seed),
                None => format!("seed {}: residual check failed", e.seed),
            })
            .collect();
        let passed = entries.len() - failures.len();
        let config = SuiteConfig { count, seed, search: &cfg };
        return write_report(&a.common, "catalysis-verify", config, failures, SuiteResult { count, passed, entries });
    }
    let path = a.input.as_deref().expect("clap enforces --input without --suite");
    let (mut sc, cfg) = load_scenario(path, &a.common)?;
    if let Some(t) = a.common.tol {
        sc.tol = t;
    }
    let scenario = verify_scenario(&sc);
    let correlation = correlation_balance(&sc.u, &sc.rho_s, &sc.sigma_c, sc.tol)?;
    let mut failures = Vec::new();
    let intertwiner = if scenario.admissible {
        let r = search_intertwiner(&sc, &cfg, exec)?;
        if !r.success {
            failures.push("no intertwiner found".into());
        }
        Some(r)
    } else {
        failures.push(format!("scenario is not admissible at tolerance {:e}", sc.tol));
        None
    };
    if correlation.mutual_information.abs() > CORRELATION_TOL || correlation.entropy_change.abs() > CORRELATION_TOL {
        failures.push(format!(
            "catalyst correlated: I = {:e}, ΔH = {:e}",
            correlation.mutual_information, correlation.entropy_change
        ));
    }
    let config = serde_json::json!({ "tol": sc.tol, "search": cfg });
    let result = ScenarioResult { scenario, intertwiner, correlation };
    write_report(&a.common, "catalysis-verify", config, failures, result)
}

#[derive(Serialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
enum FrameSource {
    File { path: String },
    PhaseReference { #[serde(rename = "N")] n: usize, theta: f64 },
}

pub fn recovery_verify(a: &RecoveryArgs, exec: Exec) -> Run {
    no_tol(&a.common, "recovery-verify")?;
    let (sc, mut cfg, source) = match &a.input {
        Some(path) => {
            let json: FrameScenarioJson = parse(path)?;
            let cfg = json.config.clone().unwrap_or_default();
            let source = FrameSource::File { path: path.display().to_string() };
            (json.to_scenario()?, cfg, source)
        }
        None => (
            phase_reference_scenario(a.n, a.theta)?,
            FrameConfig::default(),
            FrameSource::PhaseReference { n: a.n, theta: a.theta },
        ),
    };
    if let Some(s) = a.common.seed {
        cfg.seed = s;
    }
    let report = catalytic_channel(&sc, &cfg, exec)?.report;
    let failures = report.failures.clone();
    let unconverged = !report.diamond.converged();
    let config = serde_json::json!({ "scenario": source, "sampling": cfg });
    let mut outcome = write_report(&a.common, "recovery-verify", config, failures, report)?;
    outcome.unconverged = unconverged;
    Ok(outcome)
}

pub fn refframe_sweep(a: &SweepArgs, exec: Exec) -> Run {
    no_tol(&a.common, "refframe-sweep")?;
    let mut cfg: FrameConfig = match &a.input {
        Some(path) => parse(path)?,
        None => FrameConfig::default(),
    };
    if let Some(s) = a.common.seed {
        cfg.seed = s;
    }
    let rows = degradation_sweep(&a.ns, a.theta, &cfg, exec)?;
    emit(a.common.output.as_deref(), &sweep_csv(&rows)?)?;
    let mut failures: Vec<String> = rows
        .iter()
        .filter(|r| !r.status.starts_with("pass"))
        .map(|r| format!("N = {}: worst distance {} against bound {}", r.n, r.worst_distance, r.bound))
        .collect();
    for w in rows.windows(2) {
        if w[0].n < w[1].n && w[1].epsilon > w[0].epsilon {
            failures.push(format!("epsilon grows from N = {} to N = {}", w[0].n, w[1].n));
        }
    }
    let unconverged = rows.iter().any(|r| r.status.ends_with("(bounds)"));
    Ok(Outcome { failures, unconverged })
}

#[derive(Serialize)]
struct PairRow {
    pair: String,
    wiegmann: &'static str,
    status: &'static str,
    residual: f64,
}

/// Residual accepted for the constructive searches in the demo.
const DEMO_RESIDUAL: f64 = 1e-6;

pub fn demo_appendix(a: &DemoArgs, exec: Exec) -> Run {
    let wcfg = WiegmannConfig {
        seed: a.common.seed.unwrap_or(0),
        ..WiegmannConfig::default()
    };
    let ucfg = search_config(None, &a.common);
    let report = pairwise_report(&wcfg, &ucfg, exec)?;
    let status = |ok: bool| if ok { "SUCCESS" } else { "FAILURE" };
    let table: Vec<PairRow> = report
        .pairs
        .iter()
        .map(|p| PairRow {
            pair: format!("({},{})", p.pair[0] + 1, p.pair[1] + 1),
            wiegmann: if p.wiegmann.is_distinguished() { "distinguished" } else { "equivalent-up-to-bound" },
            status: status(p.success && p.residual < DEMO_RESIDUAL),
            residual: p.residual,
        })
        .collect();

    println!("|Tr[B1 B2 B3] - Tr[A1 A2 A3]| = {:.10}", report.gap);
    println!("{:<7} {:<24} {:<8} residual", "pair", "word traces", "search");
    for r in &table {
        println!("{:<7} {:<24} {:<8} {:.3e}", r.pair, r.wiegmann, r.status, r.residual);
    }
    match &report.triple {
        WiegmannVerdict::Distinguished { word, gap, .. } => println!("triple  distinguished by `{word}` (gap {gap:.10})"),
        WiegmannVerdict::EquivalentUpToBound { words_checked } => {
            println!("triple  not distinguished after {words_checked} words")
        }
    }
    println!(
        "tensored 9x9: {} (residual {:.3e})",
        status(report.tensored_success && report.tensored_residual < DEMO_RESIDUAL),
        report.tensored_residual
    );

    let mut failures = Vec::new();
    if !report.passed(DEMO_RESIDUAL) {
        failures.push("pairwise-equivalent triple does not reproduce".into());
    }
    let config = serde_json::json!({ "wiegmann": wcfg, "search": ucfg, "residual": DEMO_RESIDUAL });
    let result = serde_json::json!({ "table": table, "report": report });
    write_optional(&a.common, "demo-appendix", config, failures, result)
}

/// Demos print a table; the JSON report is written only when `--output` is set.
fn write_optional<C: Serialize, R: Serialize>(common: &Common, command: &str, config: C, failures: Vec<String>, result: R) -> Run {
    if common.output.is_some() {
        write_report(common, command, config, failures, result)
    } else {
        Ok(Outcome { failures, unconverged: false })
    }
}

pub fn demo_finite_group(a: &DemoArgs) -> Run {
    let seed = a.common.seed.unwrap_or(0);
    let tol = a.common.tol.unwrap_or(COVARIANCE_TOL);
    let z2 = FiniteGroupRep::new(FiniteGroup::cyclic(2), vec![diag_real(&[1.0, 1.0]), diag_real(&[1.0, -1.0])])?;
    let s3 = symmetric_defining_representation(3);
    let checks: Vec<FiniteGroupCheck> = [("Z2", &z2), ("S3", &s3)]
        .into_iter()
        .map(|(name, rep)| finite_group_check(name, rep, a.targets, seed, tol))
        .collect::<qrf_core::Result<_>>()?;

    println!("{:<6} {:>5} {:>4} {:>10} {:>10} {:>10} {:>10}  status", "group", "order", "dim", "identity", "covariance", "tp", "swap");
    for c in &checks {
        println!(
            "{:<6} {:>5} {:>4} {:>10.2e} {:>10.2e} {:>10.2e} {:>10.2e}  {}",
            c.group,
            c.order,
            c.dim,
            c.identity_deviation,
            c.covariance_violation,
            c.tp_defect,
            c.swap_deviation,
            if c.passed { "SUCCESS" } else { "FAILURE" }
        );
    }
    let failures = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} construction exceeds tolerance", c.group))
        .collect();
    let config = serde_json::json!({ "targets": a.targets, "seed": seed, "covariance_tol": tol });
    write_optional(&a.common, "demo-finite-group", config, failures, checks)
}
