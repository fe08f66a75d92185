use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use ptsim::dilation::{build_dilation, EtaSource, H1Choice, DEFAULT_MARGIN};
use ptsim::error::ErrorCategory;
use ptsim::fixtures;
use ptsim::metric::{intertwining_residual, metric_signature, positive_metric};
use ptsim::nosignaling::{
    run_experiment, sweep_delta_s, whole_system_marginals, write_sweep_csv, ExperimentConfig, Mode,
};
use ptsim::numkernel::json::{pairs_to_vector, parse_matrix, to_json_string, MatrixJson};
use ptsim::numkernel::{eig, fro, identity};
use ptsim::pipeline::{
    gunther_dilation, run_simulation, Check, Sampling, Scheme, SimulationConfig,
};
use ptsim::ptcore::{
    classify, construct_pt_from_eigenframe, validate_pt_pair, ClassKind, PtPair, PtSystem,
};
use ptsim::report::reference_report;
use ptsim::{ComplexMatrix, PtError, Tolerances};

const DEFAULT_SHOTS: u64 = 10_000;

#[derive(Parser)]
#[command(
    name = "ptsim",
    version,
    about = "PT-symmetric systems: classification, metrics, dilation and simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Unbroken / broken / defective verdict and spectrum.
    Classify(SystemArgs),
    /// Positive-definite metric operator of an unbroken system.
    Metric {
        #[command(flatten)]
        system: SystemArgs,
        /// Also report the signs of the metric in the eigenframe.
        #[arg(long)]
        signature: bool,
    },
    /// Hermitian dilation on the doubled space.
    Dilate(DilateArgs),
    /// Three-stage ancilla simulation from a JSON config.
    Simulate { config: PathBuf },
    /// Two-party signaling test with the dimer on Alice's side.
    Nosignal(NosignalArgs),
    /// Regenerate the dimer, h3 and two-party reference results.
    Paper {
        /// Print the machine-readable report instead of a table.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct SystemArgs {
    /// Hamiltonian in the matrix JSON envelope.
    matrix: PathBuf,
    /// Linear part P of the PT pair.
    #[arg(long, requires = "t")]
    p: Option<PathBuf>,
    /// Antilinear part T of the PT pair (acting as T conj(v)).
    #[arg(long, requires = "p")]
    t: Option<PathBuf>,
}

#[derive(Args)]
struct DilateArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    margin: f64,
    /// `zero`, `paper` (`tau H tau eta^-1 + H eta^-1`), or a path to a Hermitian matrix.
    #[arg(long, default_value = "zero")]
    h1: String,
    /// `paper` for the closed-form dimer metric, or a path to a metric matrix.
    #[arg(long)]
    eta: Option<String>,
    /// Rescale a supplied metric whose smallest eigenvalue is not above 1.
    #[arg(long)]
    rescale: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Identity,
    #[value(alias = "metric_sandwich", alias = "metric-sandwich")]
    Metric,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Direct,
    Simulated,
}

#[derive(Args)]
struct NosignalArgs {
    /// Non-Hermiticity angle in radians.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "alpha_deg")]
    alpha: Option<f64>,
    /// Non-Hermiticity angle in degrees.
    #[arg(long, allow_hyphen_values = true)]
    alpha_deg: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    t: f64,
    #[arg(long, value_enum, default_value = "identity")]
    scheme: SchemeArg,
    #[arg(long, value_enum, default_value = "direct")]
    mode: ModeArg,
    /// JSON grid `{"alphas": [...], "ts": [...]}` (radians).
    #[arg(long, conflicts_with_all = ["alpha", "alpha_deg"])]
    sweep: Option<PathBuf>,
    /// Write sweep rows as CSV.
    #[arg(long, requires = "sweep")]
    csv: Option<PathBuf>,
}

#[derive(Serialize)]
struct RunReport {
    command: &'static str,
    inputs_digest: String,
    outputs: serde_json::Value,
    pass_fail: Vec<Check>,
}

impl RunReport {
    fn passed(&self) -> bool {
        self.pass_fail.iter().all(|c| c.pass)
    }
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Lib(PtError),
}

impl From<PtError> for Failure {
    fn from(e: PtError) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Lib(e) => match e.category() {
                ErrorCategory::Parse => 2,
                ErrorCategory::Dimension => 3,
                ErrorCategory::Domain => 4,
                ErrorCategory::Numerical => 5,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Input(m) => m.clone(),
            Failure::Lib(e) => format!("{e:?}: {e}"),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

struct Digest256(Sha256);

impl Digest256 {
    fn new(command: &str) -> Self {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        Digest256(h)
    }

    fn add(&mut self, label: &str, bytes: &[u8]) {
        self.0.update([0u8]);
        self.0.update(label.as_bytes());
        self.0.update((bytes.len() as u64).to_le_bytes());
        self.0.update(bytes);
    }

    fn finish(self) -> String {
        hex::encode(self.0.finalize())
    }
}

fn read(path: &Path, label: &str, digest: &mut Digest256) -> Outcome<String> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    digest.add(label, text.as_bytes());
    Ok(text)
}

fn to_value<T: Serialize>(v: &T) -> Outcome<serde_json::Value> {
    serde_json::to_value(v).map_err(|e| Failure::Lib(PtError::Parse(e.to_string())))
}

fn scaled(tol: &Tolerances, m: &ComplexMatrix) -> f64 {
    tol.eq_tol * fro(m).max(1.0)
}

struct LoadedSystem {
    h: ComplexMatrix,
    pair: Option<PtPair>,
}

fn load_system(
    args: &SystemArgs,
    digest: &mut Digest256,
    tol: &Tolerances,
) -> Outcome<LoadedSystem> {
    let h = parse_matrix(&read(&args.matrix, "H", digest)?)?;
    let pair = match (&args.p, &args.t) {
        (Some(p), Some(t)) => {
            let p = parse_matrix(&read(p, "P", digest)?)?;
            let t = parse_matrix(&read(t, "T", digest)?)?;
            Some(validate_pt_pair(&p, &t, tol)?)
        }
        _ => None,
    };
    Ok(LoadedSystem { h, pair })
}

/// The supplied pair, or for an unbroken `h` the pair `Psi conj(Psi^-1)` of its eigenframe.
fn pt_system(sys: LoadedSystem, tol: &Tolerances) -> Outcome<PtSystem> {
    let pair = match sys.pair {
        Some(p) => p,
        None => {
            let c = classify(&sys.h, None, tol)?;
            match (c.kind, c.eigenframe) {
                (ClassKind::UnbrokenPT, Some(frame)) => {
                    let n = frame.nrows();
                    let pt = construct_pt_from_eigenframe(&frame, &identity(n), tol)?;
                    PtPair::from_pt_matrix(&pt, tol)?
                }
                (kind, _) => {
                    return Err(PtError::NotUnbroken {
                        kind: kind.to_string(),
                    }
                    .into())
                }
            }
        }
    };
    Ok(PtSystem::new(sys.h, pair, tol)?)
}

fn cmd_classify(args: &SystemArgs, tol: &Tolerances) -> Outcome<RunReport> {
    let mut digest = Digest256::new("classify");
    let sys = load_system(args, &mut digest, tol)?;
    let result = classify(&sys.h, sys.pair.as_ref(), tol)?;
    let residual = eig(&sys.h, tol)?.residual(&sys.h);
    Ok(RunReport {
        command: "classify",
        inputs_digest: digest.finish(),
        outputs: to_value(&result)?,
        pass_fail: vec![Check::new("eigen_residual", residual, scaled(tol, &sys.h))],
    })
}

fn cmd_metric(args: &SystemArgs, signature: bool, tol: &Tolerances) -> Outcome<RunReport> {
    let mut digest = Digest256::new("metric");
    let sys = pt_system(load_system(args, &mut digest, tol)?, tol)?;
    let m = positive_metric(&sys, tol)?;
    let bound = tol.eq_tol * fro(sys.h()).max(1.0) * fro(&m.eta).max(1.0);
    let mut checks = vec![
        Check::new(
            "intertwining",
            intertwining_residual(sys.h(), &m.eta),
            bound,
        ),
        Check::above("min_eigenvalue", m.min_eigenvalue, 0.0),
    ];
    let mut outputs = serde_json::Map::new();
    outputs.insert("metric".into(), to_value(&m)?);
    if signature {
        let sig = metric_signature(&sys, &m.eta, tol)?;
        let negative = sig.epsilons.iter().filter(|&&e| e < 0).count();
        checks.push(Check::new("negative_signs", negative as f64, 0.0));
        outputs.insert("signature".into(), to_value(&sig)?);
    }
    Ok(RunReport {
        command: "metric",
        inputs_digest: digest.finish(),
        outputs: serde_json::Value::Object(outputs),
        pass_fail: checks,
    })
}

fn cmd_dilate(args: &DilateArgs, tol: &Tolerances) -> Outcome<RunReport> {
    let mut digest = Digest256::new("dilate");
    digest.add("margin", &args.margin.to_le_bytes());
    digest.add("rescale", &[args.rescale as u8]);
    let mut loaded = load_system(&args.system, &mut digest, tol)?;

    let eta_source = match args.eta.as_deref() {
        None => EtaSource::Auto,
        Some("paper") => {
            digest.add("eta", b"paper");
            let (alpha, _, _) =
                fixtures::dimer_parameters(&loaded.h, tol.eq_tol).ok_or_else(|| {
                    PtError::InvalidParameter(
                        "--eta paper needs a Hamiltonian of the dimer form".into(),
                    )
                })?;
            if loaded.pair.is_none() {
                loaded.pair = Some(fixtures::dimer_pt());
            }
            EtaSource::Supplied {
                eta: fixtures::dimer_eta(alpha),
                rescale: args.rescale,
            }
        }
        Some(path) => EtaSource::Supplied {
            eta: parse_matrix(&read(Path::new(path), "eta", &mut digest)?)?,
            rescale: args.rescale,
        },
    };
    let h1 = match args.h1.as_str() {
        "zero" => {
            digest.add("H1", b"zero");
            H1Choice::Zero
        }
        "paper" => {
            digest.add("H1", b"paper");
            H1Choice::Reference
        }
        path => H1Choice::Supplied(parse_matrix(&read(Path::new(path), "H1", &mut digest)?)?),
    };
    let sys = pt_system(loaded, tol)?;
    let d = build_dilation(&sys, &eta_source, args.margin, &h1, tol)?;
    let bound = scaled(tol, &d.hhat);
    let r = d.residuals;
    Ok(RunReport {
        command: "dilate",
        inputs_digest: digest.finish(),
        outputs: to_value(&d)?,
        pass_fail: vec![
            Check::new("hermiticity", r.hermiticity, bound),
            Check::new("eq_h1h2", r.eq_h1h2, bound),
            Check::new("eq_h2h4", r.eq_h2h4, bound),
            Check::new("tau_sq", r.tau_sq, scaled(tol, &d.eta)),
        ],
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AlphaParams {
    alpha: f64,
    s: f64,
    #[serde(rename = "E0")]
    e0: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateConfig {
    hamiltonian: MatrixJson,
    #[serde(rename = "P")]
    p: Option<MatrixJson>,
    #[serde(rename = "T")]
    t_op: Option<MatrixJson>,
    alpha_params: Option<AlphaParams>,
    scheme: String,
    rho: Option<MatrixJson>,
    rho_prime: Option<MatrixJson>,
    t: f64,
    psi: Vec<[f64; 2]>,
    seed: Option<u64>,
    shots: Option<u64>,
    margin: Option<f64>,
    h1: Option<String>,
}

fn cmd_simulate(path: &Path, tol: &Tolerances) -> Outcome<RunReport> {
    let mut digest = Digest256::new("simulate");
    let text = read(path, "config", &mut digest)?;
    let cfg: SimulateConfig =
        serde_json::from_str(&text).map_err(|e| PtError::Parse(format!("config: {e}")))?;
    let h = cfg.hamiltonian.to_matrix()?;
    let scheme = match cfg.scheme.as_str() {
        "identity" => Scheme::Identity,
        "metric_sandwich" => Scheme::MetricSandwich,
        "custom" => match (&cfg.rho, &cfg.rho_prime) {
            (Some(r), Some(rp)) => Scheme::Custom {
                rho: r.to_matrix()?,
                rho_prime: rp.to_matrix()?,
            },
            _ => return Err(PtError::Parse("custom scheme needs rho and rho_prime".into()).into()),
        },
        other => return Err(PtError::Parse(format!("unknown scheme {other:?}")).into()),
    };
    let dilation = match &cfg.alpha_params {
        Some(a) => {
            let want = fixtures::dimer(a.alpha, a.s, a.e0);
            let residual = (&want - &h).norm();
            if residual > scaled(tol, &want) {
                return Err(PtError::InvalidParameter(format!(
                    "hamiltonian differs from the dimer with the given alpha_params by {residual:.3e}"
                ))
                .into());
            }
            gunther_dilation(a.alpha, a.s, a.e0, tol)?
        }
        None => {
            let pair = match (&cfg.p, &cfg.t_op) {
                (Some(p), Some(t)) => {
                    Some(validate_pt_pair(&p.to_matrix()?, &t.to_matrix()?, tol)?)
                }
                (None, None) => None,
                _ => return Err(PtError::Parse("P and T must be given together".into()).into()),
            };
            let h1 = match cfg.h1.as_deref() {
                None | Some("zero") => H1Choice::Zero,
                Some("paper") => H1Choice::Reference,
                Some(other) => return Err(PtError::Parse(format!("unknown h1 {other:?}")).into()),
            };
            let sys = pt_system(LoadedSystem { h, pair }, tol)?;
            build_dilation(
                &sys,
                &EtaSource::Auto,
                cfg.margin.unwrap_or(DEFAULT_MARGIN),
                &h1,
                tol,
            )?
        }
    };
    let psi = pairs_to_vector(&cfg.psi)?;
    let is_sandwich = matches!(scheme, Scheme::MetricSandwich);
    let mut sim = SimulationConfig::new(dilation, scheme, cfg.t, psi)?;
    if let Some(seed) = cfg.seed {
        sim = sim.with_sampling(Sampling {
            seed,
            shots: cfg.shots.unwrap_or(DEFAULT_SHOTS),
        });
    }
    let trace = run_simulation(&sim, tol)?;
    let mut checks = vec![
        Check::new("final_formula", trace.final_formula_check, tol.eq_tol),
        Check::new("final_norm", (trace.xi5.norm() - 1.0).abs(), tol.eq_tol),
        Check::new(
            "probability_product",
            (trace.p_total - trace.p_prepare * trace.p_post).abs(),
            tol.eq_tol,
        ),
    ];
    if is_sandwich {
        checks.push(Check::new(
            "sandwich_unit_norm",
            (trace.core_norm - 1.0).abs(),
            tol.eq_tol,
        ));
    }
    Ok(RunReport {
        command: "simulate",
        inputs_digest: digest.finish(),
        outputs: to_value(&trace)?,
        pass_fail: checks,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepGrid {
    alphas: Vec<f64>,
    ts: Vec<f64>,
}

fn cmd_nosignal(args: &NosignalArgs, tol: &Tolerances) -> Outcome<RunReport> {
    let mut digest = Digest256::new("nosignal");
    let (scheme, restoring) = match args.scheme {
        SchemeArg::Identity => (Scheme::Identity, false),
        SchemeArg::Metric => (Scheme::MetricSandwich, true),
    };
    let mode = match args.mode {
        ModeArg::Direct => Mode::Direct,
        ModeArg::Simulated => Mode::Simulated,
    };
    digest.add("scheme", scheme.name().as_bytes());
    digest.add("mode", &[mode as u8]);
    digest.add("s", &args.s.to_le_bytes());

    if let Some(path) = &args.sweep {
        let grid: SweepGrid = serde_json::from_str(&read(path, "sweep", &mut digest)?)
            .map_err(|e| PtError::Parse(format!("sweep grid: {e}")))?;
        let rows = sweep_delta_s(&grid.alphas, &grid.ts, args.s, &scheme, mode, tol)?;
        if let Some(csv) = &args.csv {
            let file = fs::File::create(csv)
                .map_err(|e| Failure::Input(format!("cannot write {}: {e}", csv.display())))?;
            write_sweep_csv(&rows, file)?;
        }
        let checks = if restoring {
            rows.iter()
                .map(|r| {
                    Check::new(
                        format!("delta_S[alpha={},t={}]", r.alpha, r.t),
                        r.delta_s,
                        tol.eq_tol,
                    )
                })
                .collect()
        } else {
            Vec::new()
        };
        return Ok(RunReport {
            command: "nosignal",
            inputs_digest: digest.finish(),
            outputs: to_value(&rows)?,
            pass_fail: checks,
        });
    }

    let alpha = match (args.alpha, args.alpha_deg) {
        (Some(a), _) => a,
        (None, Some(d)) => d.to_radians(),
        (None, None) => {
            return Err(Failure::Input(
                "one of --alpha, --alpha-deg or --sweep is required".into(),
            ))
        }
    };
    digest.add("alpha", &alpha.to_le_bytes());
    digest.add("t", &args.t.to_le_bytes());
    let cfg = ExperimentConfig::new(alpha, args.s, args.t, scheme, mode);
    let stats = run_experiment(&cfg, tol)?;
    let mut checks = vec![Check::new(
        "normalization",
        stats.normalization_defect(),
        tol.eq_tol,
    )];
    if restoring || alpha == 0.0 {
        checks.push(Check::new("delta_S", stats.delta_s, tol.eq_tol));
    }
    let mut outputs = serde_json::Map::new();
    outputs.insert("stats".into(), to_value(&stats)?);
    if mode == Mode::Simulated {
        let whole = whole_system_marginals(&cfg, tol)?;
        checks.push(Check::new(
            "whole_system_gap",
            whole.marginal_gap,
            tol.eq_tol,
        ));
        checks.push(Check::new(
            "bob_reduced_state_gap",
            whole.reduced_state_gap,
            tol.eq_tol,
        ));
        outputs.insert("whole_system".into(), to_value(&whole)?);
    }
    Ok(RunReport {
        command: "nosignal",
        inputs_digest: digest.finish(),
        outputs: serde_json::Value::Object(outputs),
        pass_fail: checks,
    })
}

fn cmd_paper(tol: &Tolerances) -> Outcome<RunReport> {
    let digest = Digest256::new("paper");
    let report = reference_report(tol)?;
    let mut outputs = serde_json::Map::new();
    outputs.insert(
        "unscaled_tensor_residual_max".into(),
        to_value(&report.unscaled_tensor_residual_max)?,
    );
    Ok(RunReport {
        command: "paper",
        inputs_digest: digest.finish(),
        outputs: serde_json::Value::Object(outputs),
        pass_fail: report.checks,
    })
}

fn table(report: &RunReport) -> String {
    let mut out = String::new();
    for c in &report.pass_fail {
        let op = match c.relation {
            ptsim::pipeline::Relation::AtMost => "<=",
            ptsim::pipeline::Relation::Above => ">",
        };
        out.push_str(&format!(
            "{}  {:<58} {:.3e} {op} {:.1e}\n",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.bound
        ));
    }
    let passed = report.pass_fail.iter().filter(|c| c.pass).count();
    out.push_str(&format!(
        "{passed}/{} checks pass\n",
        report.pass_fail.len()
    ));
    out
}

fn emit(text: &str, out: Option<&Path>) -> Outcome<()> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Input(format!("stdout: {e}")))
        }
    }
}

fn run(cli: Cli) -> Outcome<bool> {
    let tol = Tolerances::default();
    let (report, out, as_table) = match &cli.command {
        Command::Classify(a) => (cmd_classify(a, &tol)?, None, false),
        Command::Metric { system, signature } => {
            (cmd_metric(system, *signature, &tol)?, None, false)
        }
        Command::Dilate(a) => (cmd_dilate(a, &tol)?, a.out.as_deref(), false),
        Command::Simulate { config } => (cmd_simulate(config, &tol)?, None, false),
        Command::Nosignal(a) => (cmd_nosignal(a, &tol)?, None, false),
        Command::Paper { json } => (cmd_paper(&tol)?, None, !json),
    };
    let text = if as_table {
        table(&report)
    } else {
        to_json_string(&report)? + "\n"
    };
    emit(&text, out)?;
    Ok(report.passed())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: one or more checks exceeded their tolerance");
            ExitCode::from(5)
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
