//! `tpg`: reproducible command-line access to the triple-photon generation
//! model. Exit codes: 0 ok, 2 usage or validation, 3 domain, 4 no solution,
//! 5 non-convergence.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;
use tpg_core::config::ExperimentConfig;
use tpg_core::dispersion::{Axis, CrystalDispersion};
use tpg_core::experiment::{efficiency_report, fit_delta, predict_yield_sweep, MeasuredSweep};
use tpg_core::phase_matching::{linearize, PmSolver};
use tpg_core::tpg_model::{
    analytic_flux, flux_spectrum, integrate_flux, regime_map, regime_threshold, CouplingInputs,
};
use tpg_core::units::Quantity;
use tpg_core::TpgError;

use output::{csv_document, emit, json_document, num, Provenance};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Model(#[from] TpgError),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Model(e) => match e {
                TpgError::MissingAxis(_)
                | TpgError::MalformedCoefficient(_)
                | TpgError::OrderingViolation { .. }
                | TpgError::EmptyWindow { .. }
                | TpgError::InvalidInput(_)
                | TpgError::Dimension(_)
                | TpgError::Parse(_) => 2,
                TpgError::NoRoot { .. } => 4,
                TpgError::NonConvergence { .. } => 5,
                _ => 3,
            },
        }
    }
}

#[derive(Parser)]
#[command(
    name = "tpg",
    version,
    about = "Mono-stimulated triple-photon generation in KTP"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Sellmeier data file (JSON); defaults to the bundled KTP set.
    #[arg(long, global = true)]
    crystal: Option<PathBuf>,
    /// Experiment configuration (JSON); defaults to the bundled configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Reserved; every command is deterministic. Recorded in the provenance.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Principal refractive index.
    Index {
        #[arg(long)]
        axis: String,
        #[arg(long)]
        lambda_nm: f64,
    },
    /// Degenerate phase-matching root at one angle.
    PmSolve {
        #[arg(long, default_value_t = 532.0)]
        lambda_p_nm: f64,
        #[arg(long, default_value_t = 90.0)]
        theta_deg: f64,
    },
    /// Phase-matching tuning curve over an angle range.
    PmCurve {
        #[arg(long, default_value_t = 532.0)]
        lambda_p_nm: f64,
        #[arg(long)]
        theta_start_deg: f64,
        #[arg(long)]
        theta_stop_deg: f64,
        #[arg(long, default_value_t = 11)]
        theta_samples: usize,
    },
    /// Linear fit of the spectral mismatch around degeneracy.
    Linearize {
        #[arg(long, default_value_t = 10.0)]
        half_width_thz: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
    },
    /// χ⁽³⁾ carried from the configured reference process.
    Miller,
    /// Photons per pulse from the spectral quadrature.
    Flux {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Sampled mode-2 spectral density.
    FluxSpectrum {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 2001)]
        samples: usize,
    },
    /// Predicted n₂ + n₃ against stimulation energy.
    YieldSweep {
        #[command(flatten)]
        model: ModelArgs,
        /// Stimulation energies; the configured list when absent.
        #[arg(long, alias = "energy-uj", value_delimiter = ',')]
        energies_uj: Option<Vec<f64>>,
    },
    /// Least-squares δ from a measured sweep CSV.
    FitDelta {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        overlap: bool,
    },
    /// Coupling regime at degeneracy across intensity products.
    RegimeMap {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 2.0)]
        decades: f64,
        #[arg(long, default_value_t = 41)]
        points: usize,
    },
    /// Triplet counts and quantum efficiencies from a yield.
    Efficiency {
        #[arg(long)]
        yield23: f64,
    },
}

#[derive(Args, Clone, Copy)]
struct ModelArgs {
    /// Overrides the configured δ.
    #[arg(long)]
    delta: Option<f64>,
    /// Scales the stimulation intensity by the Gaussian overlap factor.
    #[arg(long)]
    overlap: bool,
    #[arg(long)]
    lobes: Option<usize>,
}

/// Configuration and crystal resolved before any computation starts.
struct Run {
    common: Common,
    crystal: Arc<CrystalDispersion>,
    config: ExperimentConfig,
}

impl Run {
    fn load(common: Common) -> Result<Self, CliError> {
        let mut config = match &common.config {
            Some(p) => ExperimentConfig::from_path(p)?,
            None => ExperimentConfig::bundled(),
        };
        if let Some(c) = &common.crystal {
            if !c.exists() {
                return Err(CliError::Usage(format!(
                    "crystal file {} not found",
                    c.display()
                )));
            }
            config.crystal = Some(c.clone());
        }
        let crystal = config.load_crystal()?;
        Ok(Self {
            common,
            crystal,
            config,
        })
    }

    fn provenance(&self, command: &str, params: Value, with_experiment: bool) -> Provenance {
        let crystal: Value =
            serde_json::from_str(&self.crystal.to_json_string()).expect("crystal serializes");
        Provenance {
            command: command.to_string(),
            seed: self.common.seed,
            params,
            crystal,
            experiment: with_experiment
                .then(|| serde_json::to_value(&self.config).expect("config serializes")),
        }
    }

    fn out(&self) -> Option<&Path> {
        self.common.out.as_deref()
    }

    fn apply(&mut self, m: &ModelArgs) {
        if let Some(d) = m.delta {
            self.config.delta = d;
        }
        if m.overlap {
            self.config.overlap = true;
        }
        if let Some(n) = m.lobes {
            self.config.integration.n_lobes = n;
        }
    }

    fn inputs(&self) -> Result<CouplingInputs, CliError> {
        self.config.validate()?;
        Ok(self.config.coupling_inputs(self.crystal.clone())?)
    }
}

fn parse_axis(s: &str) -> Result<Axis, CliError> {
    s.parse::<Axis>()
        .map_err(|_| CliError::Usage(format!("unknown axis '{s}' (expected x, y or z)")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut run = Run::load(cli.common)?;
    match cli.command {
        Command::Index { axis, lambda_nm } => {
            let axis = parse_axis(&axis)?;
            let n = run
                .crystal
                .principal_index(axis, Quantity::nanometers(lambda_nm))?;
            let text = format!("n_{axis}({lambda_nm}nm) = {n}\n");
            emit(run.out(), &text)
        }
        Command::PmSolve {
            lambda_p_nm,
            theta_deg,
        } => {
            let roots = PmSolver::default().solve(
                &run.crystal,
                Quantity::nanometers(lambda_p_nm),
                Quantity::degrees(theta_deg),
            )?;
            let rows: Vec<Vec<String>> = roots
                .iter()
                .map(|r| {
                    vec![
                        num(theta_deg),
                        num(r.lambda1_m * 1e9),
                        num(r.lambda23_m * 1e9),
                        num(r.delta_k),
                    ]
                })
                .collect();
            let prov = run.provenance(
                "pm-solve",
                json!({"lambda_p_nm": lambda_p_nm, "theta_deg": theta_deg}),
                false,
            );
            emit(run.out(), &csv_document(&prov, &PM_HEADER, &rows)?)
        }
        Command::PmCurve {
            lambda_p_nm,
            theta_start_deg,
            theta_stop_deg,
            theta_samples,
        } => {
            if theta_samples == 0 {
                return Err(CliError::Usage("theta-samples must be positive".into()));
            }
            let solver = PmSolver::default();
            let mut rows = Vec::with_capacity(theta_samples);
            for i in 0..theta_samples {
                let t = if theta_samples == 1 {
                    theta_start_deg
                } else {
                    theta_start_deg
                        + (theta_stop_deg - theta_start_deg) * i as f64 / (theta_samples - 1) as f64
                };
                // one row per angle; the root nearest the shortest λ₁ when several exist
                let row = match solver.solve(
                    &run.crystal,
                    Quantity::nanometers(lambda_p_nm),
                    Quantity::degrees(t),
                ) {
                    Ok(r) => vec![
                        num(t),
                        num(r[0].lambda1_m * 1e9),
                        num(r[0].lambda23_m * 1e9),
                        num(r[0].delta_k),
                    ],
                    Err(TpgError::NoRoot { .. }) => {
                        vec![num(t), String::new(), String::new(), String::new()]
                    }
                    Err(e) => return Err(e.into()),
                };
                rows.push(row);
            }
            let prov = run.provenance(
                "pm-curve",
                json!({
                    "lambda_p_nm": lambda_p_nm,
                    "theta_start_deg": theta_start_deg,
                    "theta_stop_deg": theta_stop_deg,
                    "theta_samples": theta_samples,
                }),
                false,
            );
            emit(run.out(), &csv_document(&prov, &PM_HEADER, &rows)?)
        }
        Command::Linearize {
            half_width_thz,
            points,
        } => {
            let anchor = run.config.anchor(run.crystal.clone())?;
            let hw = Quantity::rad_per_second(2.0 * std::f64::consts::PI * half_width_thz * 1e12);
            let lin = linearize(&anchor, Some(hw), points)?;
            let prov = run.provenance(
                "linearize",
                json!({"half_width_thz": half_width_thz, "points": points}),
                true,
            );
            emit(run.out(), &json_document(&prov, &lin)?)
        }
        Command::Miller => {
            let chi = run
                .config
                .chi3_from_reference(&run.crystal)?
                .ok_or_else(|| CliError::Usage("configuration has no chi3_reference".into()))?;
            let prov = run.provenance("miller", json!({}), true);
            emit(
                run.out(),
                &json_document(&prov, &json!({"chi3_m2_per_v2": chi}))?,
            )
        }
        Command::Flux { model } => {
            run.apply(&model);
            let inputs = run.inputs()?;
            let r = integrate_flux(&inputs, &run.config.integration)?;
            let analytic = analytic_flux(&inputs).ok();
            let prov = run.provenance("flux", json!({}), true);
            let result = json!({
                "photons_mode2_per_pulse": r.photons,
                "photons_mode23_per_pulse": 2.0 * r.photons,
                "truncation_error": r.truncation_error,
                "analytic_photons_mode2_per_pulse": analytic,
                "window_rad_s": [r.window.lo(), r.window.hi()],
                "n_lobes": r.window.n_lobes,
                "points_per_lobe": r.points_per_lobe,
                "evaluations": r.evaluations,
            });
            emit(run.out(), &json_document(&prov, &result)?)
        }
        Command::FluxSpectrum { model, samples } => {
            run.apply(&model);
            let inputs = run.inputs()?;
            let spec = flux_spectrum(&inputs, &run.config.integration, samples)?;
            let rows: Vec<Vec<String>> = spec
                .samples
                .iter()
                .map(|s| {
                    vec![
                        num(s.omega),
                        num(s.lambda_nm),
                        num(s.density),
                        s.regime.as_str().to_string(),
                    ]
                })
                .collect();
            let prov = run.provenance("flux-spectrum", json!({"samples": samples}), true);
            emit(
                run.out(),
                &csv_document(
                    &prov,
                    &[
                        "omega_rad_s",
                        "lambda_nm",
                        "density_photons_per_pulse_per_hz",
                        "regime",
                    ],
                    &rows,
                )?,
            )
        }
        Command::YieldSweep { model, energies_uj } => {
            run.apply(&model);
            if let Some(e) = &energies_uj {
                run.config.sweep_energies_j = e.iter().map(|v| v * 1e-6).collect();
            }
            let inputs = run.inputs()?;
            let rows = predict_yield_sweep(
                &run.config.sweep_setup(),
                &run.config.sweep_energies_j,
                &inputs,
            )?;
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        num(r.stim_energy_j),
                        num(r.stim_intensity_w_m2),
                        num(r.yield23),
                    ]
                })
                .collect();
            let prov = run.provenance("yield-sweep", json!({}), true);
            emit(
                run.out(),
                &csv_document(
                    &prov,
                    &["stim_energy_J", "stim_intensity_W_m2", "photons_per_pulse"],
                    &table,
                )?,
            )
        }
        Command::FitDelta { data, overlap } => {
            let sweep = MeasuredSweep::from_path(&data)?;
            if overlap {
                run.config.overlap = true;
            }
            let inputs = run.inputs()?;
            let report = fit_delta(&sweep, &run.config.sweep_setup(), &inputs)?;
            let prov = run.provenance(
                "fit-delta",
                json!({"data": sweep.rows(), "overlap": overlap}),
                true,
            );
            emit(run.out(), &json_document(&prov, &report)?)
        }
        Command::RegimeMap {
            model,
            decades,
            points,
        } => {
            run.apply(&model);
            if points < 2 {
                return Err(CliError::Usage(
                    "regime map needs at least two points".into(),
                ));
            }
            let inputs = run.inputs()?;
            let p0 = regime_threshold(&inputs)?;
            let products: Vec<f64> = (0..points)
                .map(|i| p0 * 10f64.powf(-decades + 2.0 * decades * i as f64 / (points - 1) as f64))
                .collect();
            let rows = regime_map(&inputs, &products)?;
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| vec![num(r.product), num(r.c3), r.regime.as_str().to_string()])
                .collect();
            let prov = run.provenance(
                "regime-map",
                json!({"decades": decades, "points": points, "threshold_W2_m4": p0}),
                true,
            );
            emit(
                run.out(),
                &csv_document(
                    &prov,
                    &["intensity_product_W2_m4", "C3_at_degeneracy_m2", "regime"],
                    &table,
                )?,
            )
        }
        Command::Efficiency { yield23 } => {
            let r = efficiency_report(
                yield23,
                &run.config.pump,
                &run.config.stim,
                run.config.detection_transfer,
            )?;
            let prov = run.provenance("efficiency", json!({"yield23": yield23}), true);
            emit(run.out(), &json_document(&prov, &r)?)
        }
    }
}

const PM_HEADER: [&str; 4] = [
    "theta_deg",
    "lambda1_nm",
    "lambda23_nm",
    "delta_k_residual_rad_per_m",
];

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tpg: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
