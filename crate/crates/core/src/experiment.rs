//! Laboratory parameters to model inputs: beam intensities, photon counts,
//! stimulation sweeps, the δ fit and efficiency bookkeeping.

use std::f64::consts::{LN_10, PI};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TpgError};
use crate::tpg_model::{integrate_flux, CouplingInputs, IntegrationSettings};
use crate::units::{PLANCK, SPEED_OF_LIGHT};

/// Stimulation energies accepted by [`predict_yield_sweep`], J.
pub const SWEEP_ENERGY_RANGE: (f64, f64) = (1e-9, 1e-3);

/// Efficiencies quoted alongside the experiment (η and η/n₁ in Hz⁻¹).
pub const REPORTED_ETA: f64 = 0.8e-11;
pub const REPORTED_ETA_PER_STIM: f64 = 3.1e-24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamPulseParams {
    pub energy_j: f64,
    pub fwhm_s: f64,
    /// 1/e² intensity radius at the crystal.
    pub waist_radius_m: f64,
    pub wavelength_m: f64,
    pub rep_rate_hz: f64,
}

impl BeamPulseParams {
    /// Energy may be zero; every other field must be strictly positive.
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !(self.energy_j >= 0.0 && self.energy_j.is_finite()) {
            return Err(TpgError::InvalidInput(format!(
                "pulse energy {} J",
                self.energy_j
            )));
        }
        for (name, v) in [
            ("fwhm_s", self.fwhm_s),
            ("waist_radius_m", self.waist_radius_m),
            ("wavelength_m", self.wavelength_m),
            ("rep_rate_hz", self.rep_rate_hz),
        ] {
            if !ok(v) {
                return Err(TpgError::InvalidInput(format!("{name} = {v}")));
            }
        }
        Ok(())
    }

    pub fn with_energy(mut self, energy_j: f64) -> Self {
        self.energy_j = energy_j;
        self
    }
}

/// Peak intensity of a pulse Gaussian in space (1/e² radius w₀) and time
/// (FWHM τ): √(4 ln2/π)·2E/(π·w₀²·τ).
pub fn peak_intensity(beam: &BeamPulseParams) -> Result<f64> {
    beam.validate()?;
    let w = beam.waist_radius_m;
    Ok((4.0 * 2f64.ln() / PI).sqrt() * 2.0 * beam.energy_j / (PI * w * w * beam.fwhm_s))
}

/// Photons carried by a pulse of the given energy and wavelength.
pub fn photon_count(energy_j: f64, wavelength_m: f64) -> Result<f64> {
    if !(energy_j >= 0.0 && energy_j.is_finite()) || wavelength_m.is_nan() || wavelength_m <= 0.0 {
        return Err(TpgError::InvalidInput(format!(
            "photon count of {energy_j} J at {wavelength_m} m"
        )));
    }
    Ok(energy_j * wavelength_m / (PLANCK * SPEED_OF_LIGHT))
}

/// Fraction of the stimulation intensity seen inside the pump spot for two
/// concentric Gaussian beams, w_s²/(w_p² + w_s²).
pub fn overlap_factor(pump: &BeamPulseParams, stim: &BeamPulseParams) -> f64 {
    let p = pump.waist_radius_m.powi(2);
    let s = stim.waist_radius_m.powi(2);
    s / (p + s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub stim_energy_j: f64,
    pub photons_per_pulse: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

/// Measured mode-2 + mode-3 counts against stimulation energy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasuredSweep {
    rows: Vec<SweepRow>,
}

impl MeasuredSweep {
    pub fn new(rows: Vec<SweepRow>) -> Result<Self> {
        if rows
            .windows(2)
            .any(|w| w[1].stim_energy_j <= w[0].stim_energy_j)
        {
            return Err(TpgError::InvalidInput(
                "stimulation energies must be strictly increasing".into(),
            ));
        }
        for r in &rows {
            if !(r.photons_per_pulse >= 0.0 && r.photons_per_pulse.is_finite()) {
                return Err(TpgError::InvalidInput(format!(
                    "negative or non-finite count {}",
                    r.photons_per_pulse
                )));
            }
            if let Some(s) = r.sigma {
                if !(s > 0.0 && s.is_finite()) {
                    return Err(TpgError::InvalidInput(format!("uncertainty {s}")));
                }
            }
        }
        let weighted = rows.iter().filter(|r| r.sigma.is_some()).count();
        if weighted != 0 && weighted != rows.len() {
            return Err(TpgError::InvalidInput(
                "uncertainty column must be filled for every row or none".into(),
            ));
        }
        Ok(Self { rows })
    }

    /// CSV with header `stim_energy_J,photons_per_pulse[,sigma]`.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| TpgError::Parse(e.to_string()))?
            .clone();
        let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
        let (ie, ic) = match (col("stim_energy_J"), col("photons_per_pulse")) {
            (Some(e), Some(c)) => (e, c),
            _ => {
                return Err(TpgError::Parse(
                    "sweep header must name stim_energy_J and photons_per_pulse".into(),
                ))
            }
        };
        let is = col("sigma");
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| TpgError::Parse(e.to_string()))?;
            let num = |i: usize| -> Result<f64> {
                let s = rec.get(i).unwrap_or("");
                s.parse::<f64>()
                    .map_err(|_| TpgError::Parse(format!("bad number '{s}' in sweep row")))
            };
            let sigma = match is {
                Some(i) if !rec.get(i).unwrap_or("").is_empty() => Some(num(i)?),
                _ => None,
            };
            rows.push(SweepRow {
                stim_energy_j: num(ie)?,
                photons_per_pulse: num(ic)?,
                sigma,
            });
        }
        Self::new(rows)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path.as_ref())
            .map_err(|e| TpgError::Parse(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_reader(f)
    }

    pub fn rows(&self) -> &[SweepRow] {
        &self.rows
    }

    pub fn energies(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.stim_energy_j).collect()
    }

    pub fn is_weighted(&self) -> bool {
        self.rows.first().is_some_and(|r| r.sigma.is_some())
    }
}

/// Beams and quadrature used to turn stimulation energies into yields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSetup {
    pub pump: BeamPulseParams,
    /// Stimulation beam; its energy is replaced at each sweep point.
    pub stim: BeamPulseParams,
    /// Scale the stimulation intensity by [`overlap_factor`].
    #[serde(default)]
    pub overlap: bool,
    #[serde(default)]
    pub settings: IntegrationSettings,
}

impl SweepSetup {
    pub fn new(pump: BeamPulseParams, stim: BeamPulseParams) -> Self {
        Self {
            pump,
            stim,
            overlap: false,
            settings: IntegrationSettings::default(),
        }
    }

    pub fn stim_intensity(&self, energy_j: f64) -> Result<f64> {
        let i = peak_intensity(&self.stim.with_energy(energy_j))?;
        Ok(if self.overlap {
            i * overlap_factor(&self.pump, &self.stim)
        } else {
            i
        })
    }

    /// Model inputs with the pump intensity of this setup and the given
    /// stimulation energy.
    pub fn inputs_at(&self, model: &CouplingInputs, energy_j: f64) -> Result<CouplingInputs> {
        model
            .clone()
            .with_pump_intensity(peak_intensity(&self.pump)?)?
            .with_stim_intensity(self.stim_intensity(energy_j)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YieldRow {
    pub stim_energy_j: f64,
    pub stim_intensity_w_m2: f64,
    /// n₂ + n₃ per pulse.
    pub yield23: f64,
}

/// n₂ + n₃ = 2·n₂ per pulse for each stimulation energy.
pub fn predict_yield_sweep(
    setup: &SweepSetup,
    stim_energies_j: &[f64],
    model: &CouplingInputs,
) -> Result<Vec<YieldRow>> {
    let (lo, hi) = SWEEP_ENERGY_RANGE;
    stim_energies_j
        .iter()
        .map(|&e| {
            if e != 0.0 && !(lo..=hi).contains(&e) {
                return Err(TpgError::InvalidInput(format!(
                    "stimulation energy {e} J outside [{lo}, {hi}] J"
                )));
            }
            let inputs = setup.inputs_at(model, e)?;
            let n2 = if e == 0.0 {
                0.0
            } else {
                integrate_flux(&inputs, &setup.settings)?.photons
            };
            Ok(YieldRow {
                stim_energy_j: e,
                stim_intensity_w_m2: inputs.stim_intensity(),
                yield23: 2.0 * n2,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub delta: f64,
    pub delta_stderr: f64,
    pub log10_delta: f64,
    pub residual_rms: f64,
    pub r_squared: f64,
    pub weighted: bool,
    pub iterations: usize,
    pub residuals: Vec<f64>,
    pub n_lobes: usize,
    pub points_per_lobe: usize,
    pub overlap: bool,
}

/// Search interval of log₁₀ δ.
pub const FIT_LOG10_RANGE: (f64, f64) = (-9.0, 0.0);
const COARSE_POINTS: usize = 37;
const MAX_FIT_ITERATIONS: usize = 200;

struct Objective<'a> {
    data: &'a MeasuredSweep,
    setup: &'a SweepSetup,
    model: &'a CouplingInputs,
    energies: Vec<f64>,
}

impl Objective<'_> {
    fn weights(&self) -> Vec<f64> {
        self.data
            .rows()
            .iter()
            .map(|r| r.sigma.map_or(1.0, |s| 1.0 / s))
            .collect()
    }

    /// Weighted residuals (predicted − measured)/σ at log₁₀ δ = x.
    fn residuals(&self, x: f64) -> Result<Vec<f64>> {
        let m = self.model.clone().with_delta(10f64.powf(x))?;
        let pred = predict_yield_sweep(self.setup, &self.energies, &m)?;
        Ok(pred
            .iter()
            .zip(self.data.rows())
            .zip(self.weights())
            .map(|((p, r), w)| (p.yield23 - r.photons_per_pulse) * w)
            .collect())
    }

    fn cost(&self, x: f64) -> f64 {
        match self.residuals(x) {
            Ok(r) => r.iter().map(|v| v * v).sum(),
            Err(_) => f64::INFINITY,
        }
    }
}

/// Least-squares δ on a log scale: coarse scan, golden-section search, then
/// Gauss–Newton polishing of the local quadratic model.
pub fn fit_delta(
    data: &MeasuredSweep,
    setup: &SweepSetup,
    model: &CouplingInputs,
) -> Result<FitReport> {
    if data.rows().len() < 3 {
        return Err(TpgError::InvalidInput(
            "fit needs at least three rows".into(),
        ));
    }
    if data.rows().iter().all(|r| r.photons_per_pulse == 0.0) {
        return Err(TpgError::DegenerateData);
    }
    let obj = Objective {
        data,
        setup,
        model,
        energies: data.energies(),
    };
    let (xlo, xhi) = FIT_LOG10_RANGE;
    let step = (xhi - xlo) / (COARSE_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..COARSE_POINTS).map(|i| xlo + step * i as f64).collect();
    let costs: Vec<f64> = grid.iter().map(|&x| obj.cost(x)).collect();
    let best = (0..COARSE_POINTS)
        .min_by(|&i, &j| costs[i].total_cmp(&costs[j]))
        .unwrap();
    if !costs[best].is_finite() {
        // every δ failed; surface the model error at the upper end
        obj.residuals(xhi)?;
        return Err(TpgError::NonConvergence { iterations: 0 });
    }

    // golden-section search on the bracket around the best grid point
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(COARSE_POINTS - 1)];
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (obj.cost(c), obj.cost(d));
    let mut iterations = 0;
    while (b - a).abs() > 1e-9 {
        iterations += 1;
        if iterations > MAX_FIT_ITERATIONS {
            return Err(TpgError::NonConvergence { iterations });
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = obj.cost(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = obj.cost(d);
        }
    }
    let mut x = if fc < fd { c } else { d };
    let mut cost = fc.min(fd);

    // Gauss–Newton on the residual vector; accepted only when the cost drops
    let h = 1e-5;
    let mut jac = Vec::new();
    for _ in 0..8 {
        iterations += 1;
        if iterations > MAX_FIT_ITERATIONS {
            return Err(TpgError::NonConvergence { iterations });
        }
        let r0 = obj.residuals(x)?;
        let (rp, rm) = match (obj.residuals(x + h), obj.residuals(x - h)) {
            (Ok(p), Ok(m)) => (p, m),
            _ => break,
        };
        jac = rp
            .iter()
            .zip(&rm)
            .map(|(p, m)| (p - m) / (2.0 * h))
            .collect();
        let jtj: f64 = jac.iter().map(|j| j * j).sum();
        if jtj == 0.0 {
            break;
        }
        let jtr: f64 = jac.iter().zip(&r0).map(|(j, r)| j * r).sum();
        let xn = (x - jtr / jtj).clamp(xlo, xhi);
        let cn = obj.cost(xn);
        if cn < cost {
            let moved = (xn - x).abs();
            x = xn;
            cost = cn;
            if moved < 1e-14 {
                break;
            }
        } else {
            break;
        }
    }

    let residuals = obj.residuals(x)?;
    let n = residuals.len() as f64;
    let weighted = data.is_weighted();
    let jtj: f64 = jac.iter().map(|j| j * j).sum();
    // unweighted data: scale by the residual variance
    let scale = if weighted { 1.0 } else { cost / (n - 1.0) };
    let sx = if jtj > 0.0 {
        (scale / jtj).sqrt()
    } else {
        f64::INFINITY
    };
    let delta = 10f64.powf(x);

    let w = obj.weights();
    let measured: Vec<f64> = data.rows().iter().map(|r| r.photons_per_pulse).collect();
    let mean = measured.iter().zip(&w).map(|(y, w)| y * w * w).sum::<f64>()
        / w.iter().map(|w| w * w).sum::<f64>();
    let ss_tot: f64 = measured
        .iter()
        .zip(&w)
        .map(|(y, w)| ((y - mean) * w).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - cost / ss_tot).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let raw: Vec<f64> = residuals.iter().zip(&w).map(|(r, w)| r / w).collect();
    Ok(FitReport {
        delta,
        delta_stderr: delta * LN_10 * sx,
        log10_delta: x,
        residual_rms: (raw.iter().map(|r| r * r).sum::<f64>() / n).sqrt(),
        r_squared,
        weighted,
        iterations,
        residuals: raw,
        n_lobes: setup.settings.n_lobes,
        points_per_lobe: setup.settings.points_per_lobe(),
        overlap: setup.overlap,
    })
}

/// Literature efficiencies reported next to the computed ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReportedEfficiencies {
    pub eta: f64,
    pub eta_per_stim_photon_hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EfficiencyReport {
    pub yield23_per_pulse: f64,
    pub triplets_per_pulse: f64,
    pub triplets_per_second: f64,
    pub pump_photons_per_pulse: f64,
    pub stim_photons_per_pulse: f64,
    /// n_triplets/n_p.
    pub eta: f64,
    /// n_triplets/(n_p·n_1).
    pub eta_per_stim_photon: f64,
    pub detection_transfer: f64,
    pub detected_per_pulse: f64,
    pub reported: ReportedEfficiencies,
}

pub fn efficiency_report(
    yield23: f64,
    pump: &BeamPulseParams,
    stim: &BeamPulseParams,
    detection_transfer: f64,
) -> Result<EfficiencyReport> {
    if !(yield23 >= 0.0 && yield23.is_finite()) {
        return Err(TpgError::InvalidInput(format!("yield {yield23}")));
    }
    if !(0.0..=1.0).contains(&detection_transfer) {
        return Err(TpgError::InvalidInput(format!(
            "detection transfer {detection_transfer}"
        )));
    }
    pump.validate()?;
    stim.validate()?;
    let n_p = photon_count(pump.energy_j, pump.wavelength_m)?;
    let n_1 = photon_count(stim.energy_j, stim.wavelength_m)?;
    let triplets = yield23 / 2.0;
    let eta = if triplets == 0.0 { 0.0 } else { triplets / n_p };
    let eta1 = if triplets == 0.0 {
        0.0
    } else {
        triplets / (n_p * n_1)
    };
    Ok(EfficiencyReport {
        yield23_per_pulse: yield23,
        triplets_per_pulse: triplets,
        triplets_per_second: triplets * pump.rep_rate_hz,
        pump_photons_per_pulse: n_p,
        stim_photons_per_pulse: n_1,
        eta,
        eta_per_stim_photon: eta1,
        detection_transfer,
        detected_per_pulse: yield23 * detection_transfer,
        reported: ReportedEfficiencies {
            eta: REPORTED_ETA,
            eta_per_stim_photon_hz: REPORTED_ETA_PER_STIM,
        },
    })
}
