//! Command-line front end.
//!
//! Every invocation is turned into a [`ProblemSpec`], either from flags or
//! from a JSON file given with `--config`, and then executed by [`run`].
//! Exit status: 0 on success, 1 when an input violates an invariant (or the
//! oracle suite fails), 2 on I/O errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::capacity::{cea_multimode, cea_one_mode, energy_grid, sweep, CapacityResult, EnergyForm, SweepRow};
use crate::er::{entropy_reduction, er_exact};
use crate::gaussian::{require_valid, symplectic_eigenvalues, validate, CovarianceMatrix, LogBase};
use crate::measurement::{posterior, NoiseMatrix, PosteriorModel};
use crate::oracle::{run_suite, SuiteOptions, SuiteReport, DEFAULT_POINTS};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
#[value(rename_all = "kebab-case")]
pub enum CommandKind {
    Er,
    Posterior,
    Entropy,
    Capacity,
    Sweep,
    OracleCheck,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// Scalar `β` (expanded to `β·I`) or a full noise matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NoiseSpec {
    Scalar(f64),
    Matrix(NoiseMatrix),
}

/// Energy budget for `H = Σ (q² + p²)/2`, or a full energy form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EnergySpec {
    Budget(f64),
    Form(EnergyForm),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSpec {
    pub betas: Vec<f64>,
    pub e_min: f64,
    pub e_max: f64,
    pub steps: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            betas: vec![0.0, 1.0, 5.0, 10.0],
            e_min: 0.5,
            e_max: 6.0,
            steps: 56,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleSpec {
    pub seed: u64,
    pub points: usize,
    pub mixtures: usize,
}

impl Default for OracleSpec {
    fn default() -> Self {
        let d = SuiteOptions::default();
        Self {
            seed: d.seed,
            points: d.points,
            mixtures: d.mixtures,
        }
    }
}

/// A complete description of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub command: CommandKind,
    #[serde(default)]
    pub state: Option<CovarianceMatrix>,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub energy: Option<EnergySpec>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub units: LogBase,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default)]
    pub oracle: OracleSpec,
}

impl ProblemSpec {
    pub fn new(command: CommandKind) -> Self {
        Self {
            command,
            state: None,
            noise: None,
            energy: None,
            output: OutputSpec::default(),
            units: LogBase::Nats,
            sweep: SweepSpec::default(),
            oracle: OracleSpec::default(),
        }
    }

    fn format(&self) -> Format {
        self.output.format.unwrap_or(match self.command {
            CommandKind::Sweep => Format::Csv,
            CommandKind::OracleCheck => Format::Json,
            _ => Format::Text,
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
    /// The run completed but a check it performs did not pass.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) | CliError::Failed(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

/// What a command produced, already rendered.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub body: String,
    /// Set when the command ran but its checks failed.
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErReport {
    pub units: LogBase,
    pub value: f64,
    pub prior_entropy: f64,
    pub posterior_entropy: f64,
    pub posterior: Option<PosteriorModel>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub units: LogBase,
    pub entropy: f64,
    pub symplectic_eigenvalues: Vec<f64>,
    pub nu_min: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub units: LogBase,
    #[serde(flatten)]
    pub result: CapacityResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct SweepRowBits {
    beta: f64,
    #[serde(rename = "E")]
    energy: f64,
    #[serde(rename = "C_ea_bits")]
    c_ea_bits: f64,
    alpha_qq_opt: f64,
    alpha_pp_opt: f64,
    converged: bool,
}

fn require_state(spec: &ProblemSpec) -> Result<&CovarianceMatrix, CliError> {
    let state = spec
        .state
        .as_ref()
        .ok_or_else(|| CliError::Invalid("no input state: give --alpha-qq/--alpha-pp or --state".into()))?;
    require_valid(state)?;
    Ok(state)
}

/// `None` means the exact measurement (`β = 0`).
fn noise_for(spec: &ProblemSpec, s: usize) -> Result<Option<NoiseMatrix>, CliError> {
    match spec.noise.as_ref() {
        None => Err(CliError::Invalid("no noise: give --beta or --noise".into())),
        Some(NoiseSpec::Scalar(b)) if *b == 0.0 => Ok(None),
        Some(NoiseSpec::Scalar(b)) => {
            if !(*b > 0.0) || !b.is_finite() {
                return Err(CliError::Invalid(format!("noise variance must be >= 0, got {b}")));
            }
            Ok(Some(NoiseMatrix::scalar(s, *b)?))
        }
        Some(NoiseSpec::Matrix(m)) => {
            if m.modes() != s {
                return Err(Error::DimensionMismatch {
                    expected: s,
                    found: m.modes(),
                }
                .into());
            }
            Ok(Some(m.clone()))
        }
    }
}

fn render<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))
}

fn fmt_matrix(m: &crate::mats::RealMatrix) -> String {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| format!("{}", m[(i, j)]))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect::<Vec<_>>()
        .join("; ")
}

/// Executes a problem and renders its output.
pub fn run(spec: &ProblemSpec) -> Result<Artifact, CliError> {
    let units = spec.units;
    let format = spec.format();
    if format == Format::Csv && spec.command != CommandKind::Sweep {
        return Err(CliError::Invalid("csv output is only available for sweep".into()));
    }
    let body = match spec.command {
        CommandKind::Er => {
            let state = require_state(spec)?;
            let report = match noise_for(spec, state.modes())? {
                None => {
                    let h = er_exact(state)?;
                    ErReport {
                        units,
                        value: units.from_nats(h),
                        prior_entropy: units.from_nats(h),
                        posterior_entropy: 0.0,
                        posterior: None,
                    }
                }
                Some(beta) => {
                    let r = entropy_reduction(state, &beta)?;
                    ErReport {
                        units,
                        value: units.from_nats(r.value),
                        prior_entropy: units.from_nats(r.prior_entropy),
                        posterior_entropy: units.from_nats(r.posterior_entropy),
                        posterior: Some(r.posterior),
                    }
                }
            };
            match format {
                Format::Json => render(&report)?,
                _ => format!(
                    "ER = {} {}\nH(prior) = {} {}\nH(posterior) = {} {}",
                    report.value,
                    units.label(),
                    report.prior_entropy,
                    units.label(),
                    report.posterior_entropy,
                    units.label()
                ),
            }
        }
        CommandKind::Posterior => {
            let state = require_state(spec)?;
            let beta = noise_for(spec, state.modes())?
                .ok_or_else(|| CliError::Invalid("posterior needs positive noise".into()))?;
            let model = posterior(state, &beta)?;
            match format {
                Format::Json => render(&model)?,
                _ => format!(
                    "alpha_hat_qq = [{}]\nalpha_hat_qp = [{}]\nalpha_hat_pp = [{}]\nK_q = [{}]\nK_p = [{}]",
                    fmt_matrix(model.alpha_hat.qq()),
                    fmt_matrix(model.alpha_hat.qp()),
                    fmt_matrix(model.alpha_hat.pp()),
                    fmt_matrix(&model.k_q),
                    fmt_matrix(&model.k_p)
                ),
            }
        }
        CommandKind::Entropy => {
            let state = require_state(spec)?;
            let nu = symplectic_eigenvalues(state)?;
            let report = EntropyReport {
                units,
                entropy: units.from_nats(crate::gaussian::entropy(state)?),
                nu_min: validate(state)?.nu_min,
                symplectic_eigenvalues: nu,
            };
            match format {
                Format::Json => render(&report)?,
                _ => format!(
                    "H = {} {}\nsymplectic eigenvalues = {:?}",
                    report.entropy,
                    units.label(),
                    report.symplectic_eigenvalues
                ),
            }
        }
        CommandKind::Capacity => {
            let result = capacity(spec)?;
            let report = CapacityReport {
                units,
                result: CapacityResult {
                    value: units.from_nats(result.value),
                    ..result
                },
            };
            match format {
                Format::Json => render(&report)?,
                _ => format!(
                    "C_ea = {} {}\nalpha_qq = [{}]\nalpha_pp = [{}]\nconstraint residual = {}\nconverged = {}",
                    report.result.value,
                    units.label(),
                    fmt_matrix(report.result.optimizer_alpha.qq()),
                    fmt_matrix(report.result.optimizer_alpha.pp()),
                    report.result.constraint_residual,
                    report.result.converged
                ),
            }
        }
        CommandKind::Sweep => {
            let s = &spec.sweep;
            if s.betas.iter().any(|b| !(*b >= 0.0)) {
                return Err(CliError::Invalid("noise variances must be >= 0".into()));
            }
            let rows = sweep(&energy_grid(s.e_min, s.e_max, s.steps), &s.betas)?;
            render_sweep(&rows, units, format)?
        }
        CommandKind::OracleCheck => {
            let opts = SuiteOptions {
                points: spec.oracle.points,
                seed: spec.oracle.seed,
                mixtures: spec.oracle.mixtures,
                ..SuiteOptions::default()
            };
            let report: SuiteReport = run_suite(&opts)?;
            let body = match format {
                Format::Json => render(&report)?,
                _ => report
                    .cases
                    .iter()
                    .map(|c| {
                        format!(
                            "{} {} closed_form={} oracle={} error={}",
                            if c.passed { "PASS" } else { "FAIL" },
                            c.case_id,
                            c.closed_form,
                            c.oracle_value.map_or("-".into(), |v| v.to_string()),
                            c.abs_error.map_or("-".into(), |v| format!("{v:e}"))
                        )
                    })
                    .collect::<Vec<_>>()
                    .join("\n"),
            };
            let failed = report.cases.iter().filter(|c| !c.passed).count();
            return Ok(Artifact {
                body,
                failure: (failed > 0).then(|| format!("{failed} oracle case(s) outside tolerance")),
            });
        }
    };
    Ok(Artifact { body, failure: None })
}

fn capacity(spec: &ProblemSpec) -> Result<CapacityResult, CliError> {
    let energy = spec
        .energy
        .as_ref()
        .ok_or_else(|| CliError::Invalid("no energy: give --energy or --energy-form".into()))?;
    let s = match (energy, spec.noise.as_ref()) {
        (EnergySpec::Form(h), _) => h.modes(),
        (_, Some(NoiseSpec::Matrix(m))) => m.modes(),
        _ => 1,
    };
    let form = match energy {
        EnergySpec::Budget(e) => EnergyForm::oscillator(s, *e)?,
        EnergySpec::Form(h) => h.clone(),
    };
    let oscillator = EnergyForm::oscillator(s, form.energy())?;
    match (noise_for(spec, s)?, s) {
        (None, 1) if form == oscillator => Ok(cea_one_mode(0.0, form.energy())?),
        (None, _) => Err(CliError::Invalid(
            "the exact measurement is only supported for one mode with H = (q^2 + p^2)/2".into(),
        )),
        (Some(beta), 1) if form == oscillator => Ok(cea_one_mode(beta.matrix()[(0, 0)], form.energy())?),
        (Some(beta), _) => Ok(cea_multimode(&beta, &form)?),
    }
}

fn render_sweep(rows: &[SweepRow], units: LogBase, format: Format) -> Result<String, CliError> {
    let bits: Vec<SweepRowBits> = rows
        .iter()
        .map(|r| SweepRowBits {
            beta: r.beta,
            energy: r.energy,
            c_ea_bits: units.from_nats(r.c_ea_nats),
            alpha_qq_opt: r.alpha_qq_opt,
            alpha_pp_opt: r.alpha_pp_opt,
            converged: r.converged,
        })
        .collect();
    match (format, units) {
        (Format::Json, LogBase::Nats) => render(&rows),
        (Format::Json, LogBase::Bits) => render(&bits),
        _ => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let res = match units {
                LogBase::Nats => rows.iter().try_for_each(|r| w.serialize(r)),
                LogBase::Bits => bits.iter().try_for_each(|r| w.serialize(r)),
            };
            res.map_err(|e| CliError::Io(e.to_string()))?;
            let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8").trim_end().to_string())
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "apm", version, about = "Entropy reduction and capacity of noisy position measurements")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,

    /// Read the whole problem from a JSON file instead of flags
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output format (defaults: csv for sweep, json for oracle-check, text otherwise)
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the result to a file instead of stdout
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Report entropies in bits
    #[arg(long, global = true)]
    pub bits: bool,
}

#[derive(Args, Debug, Clone, Default)]
pub struct StateArgs {
    #[arg(long)]
    pub alpha_qq: Option<f64>,
    #[arg(long)]
    pub alpha_pp: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub alpha_qp: f64,
    /// Covariance matrix as JSON
    #[arg(long, conflicts_with_all = ["alpha_qq", "alpha_pp"])]
    pub state: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct NoiseArgs {
    /// Noise variance, expanded to beta * I
    #[arg(long)]
    pub beta: Option<f64>,
    /// Noise matrix as JSON
    #[arg(long, conflicts_with = "beta")]
    pub noise: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Entropy reduction of the measurement
    Er {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        noise: NoiseArgs,
    },
    /// Posterior covariance and gains
    Posterior {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        noise: NoiseArgs,
    },
    /// Von Neumann entropy and symplectic eigenvalues
    Entropy {
        #[command(flatten)]
        state: StateArgs,
    },
    /// Energy-constrained entanglement-assisted capacity
    Capacity {
        #[command(flatten)]
        noise: NoiseArgs,
        /// Energy budget for H = (q^2 + p^2)/2 per mode
        #[arg(long)]
        energy: Option<f64>,
        /// Energy form as JSON
        #[arg(long, conflicts_with = "energy")]
        energy_form: Option<PathBuf>,
    },
    /// One-mode capacity over a grid of noise levels and energies
    Sweep {
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 1.0, 5.0, 10.0])]
        betas: Vec<f64>,
        #[arg(long, default_value_t = 0.5)]
        e_min: f64,
        #[arg(long, default_value_t = 6.0)]
        e_max: f64,
        #[arg(long, default_value_t = 56)]
        steps: usize,
    },
    /// Compare closed forms with the brute-force oracle
    OracleCheck {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_POINTS)]
        n_points: usize,
        #[arg(long, default_value_t = 3)]
        mixtures: usize,
    },
}

fn state_from(args: &StateArgs) -> Result<Option<CovarianceMatrix>, CliError> {
    if let Some(path) = &args.state {
        return read_json(path).map(Some);
    }
    match (args.alpha_qq, args.alpha_pp) {
        (Some(qq), Some(pp)) => Ok(Some(CovarianceMatrix::one_mode(qq, args.alpha_qp, pp)?)),
        (None, None) => Ok(None),
        _ => Err(CliError::Invalid("give both --alpha-qq and --alpha-pp".into())),
    }
}

fn noise_from(args: &NoiseArgs) -> Result<Option<NoiseSpec>, CliError> {
    if let Some(path) = &args.noise {
        return read_json::<NoiseMatrix>(path).map(|m| Some(NoiseSpec::Matrix(m)));
    }
    Ok(args.beta.map(NoiseSpec::Scalar))
}

impl Cli {
    /// Resolves flags (or the config file) into a problem.
    pub fn into_spec(self) -> Result<ProblemSpec, CliError> {
        let mut spec = match (&self.config, self.command) {
            (Some(path), _) => read_json::<ProblemSpec>(path)?,
            (None, None) => return Err(CliError::Invalid("no command given; see --help".into())),
            (None, Some(cmd)) => match cmd {
                Command::Er { state, noise } => ProblemSpec {
                    state: state_from(&state)?,
                    noise: noise_from(&noise)?,
                    ..ProblemSpec::new(CommandKind::Er)
                },
                Command::Posterior { state, noise } => ProblemSpec {
                    state: state_from(&state)?,
                    noise: noise_from(&noise)?,
                    ..ProblemSpec::new(CommandKind::Posterior)
                },
                Command::Entropy { state } => ProblemSpec {
                    state: state_from(&state)?,
                    ..ProblemSpec::new(CommandKind::Entropy)
                },
                Command::Capacity {
                    noise,
                    energy,
                    energy_form,
                } => ProblemSpec {
                    noise: noise_from(&noise)?,
                    energy: match (energy, energy_form) {
                        (_, Some(path)) => Some(EnergySpec::Form(read_json(&path)?)),
                        (e, None) => e.map(EnergySpec::Budget),
                    },
                    ..ProblemSpec::new(CommandKind::Capacity)
                },
                Command::Sweep {
                    betas,
                    e_min,
                    e_max,
                    steps,
                } => ProblemSpec {
                    sweep: SweepSpec {
                        betas,
                        e_min,
                        e_max,
                        steps,
                    },
                    ..ProblemSpec::new(CommandKind::Sweep)
                },
                Command::OracleCheck {
                    seed,
                    n_points,
                    mixtures,
                } => ProblemSpec {
                    oracle: OracleSpec {
                        seed,
                        points: n_points,
                        mixtures,
                    },
                    ..ProblemSpec::new(CommandKind::OracleCheck)
                },
            },
        };
        if self.format.is_some() {
            spec.output.format = self.format;
        }
        if self.output.is_some() {
            spec.output.path = self.output;
        }
        if self.bits {
            spec.units = LogBase::Bits;
        }
        Ok(spec)
    }
}

/// Runs the program on parsed arguments; returns the exit status.
pub fn main_with(cli: Cli) -> i32 {
    let result = cli.into_spec().and_then(|spec| {
        let artifact = run(&spec)?;
        emit(&artifact.body, spec.output.path.as_deref())?;
        match artifact.failure {
            Some(msg) => Err(CliError::Failed(msg)),
            None => Ok(()),
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn emit(body: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, format!("{body}\n")).map_err(|e| io_err(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{body}").map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn er_spec(qq: f64, qp: f64, pp: f64, beta: f64) -> ProblemSpec {
        ProblemSpec {
            state: Some(CovarianceMatrix::one_mode(qq, qp, pp).unwrap()),
            noise: Some(NoiseSpec::Scalar(beta)),
            ..ProblemSpec::new(CommandKind::Er)
        }
    }

    #[test]
    fn er_text_output() {
        let out = run(&er_spec(1.0, 0.0, 1.0, 1.0)).unwrap();
        assert!(out.body.starts_with("ER = 0.2664"), "{}", out.body);
    }

    #[test]
    fn invalid_state_is_rejected() {
        let err = run(&er_spec(0.41, 0.0, 0.41, 1.0)).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("uncertainty relation violated: nu_min = 0.41"));
    }

    #[test]
    fn exact_capacity() {
        let spec = ProblemSpec {
            noise: Some(NoiseSpec::Scalar(0.0)),
            energy: Some(EnergySpec::Budget(1.0)),
            output: OutputSpec {
                path: None,
                format: Some(Format::Json),
            },
            ..ProblemSpec::new(CommandKind::Capacity)
        };
        let out = run(&spec).unwrap();
        let back: CapacityReport = serde_json::from_str(&out.body).unwrap();
        assert!((back.result.value - 0.9547712524422192).abs() < 1e-11);
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = er_spec(1.0, 0.2, 1.5, 0.7);
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<ProblemSpec>(&text).unwrap(), spec);
        let cfg = r#"{"command": "capacity", "noise": 1.0, "energy": 2.0}"#;
        let parsed: ProblemSpec = serde_json::from_str(cfg).unwrap();
        assert_eq!(parsed.noise, Some(NoiseSpec::Scalar(1.0)));
        assert_eq!(parsed.energy, Some(EnergySpec::Budget(2.0)));
    }
}
