//! Experiment configuration files.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dispersion::CrystalDispersion;
use crate::error::{Result, TpgError};
use crate::experiment::{BeamPulseParams, SweepSetup};
use crate::phase_matching::ProcessSpec;
use crate::tpg_model::{miller_chi3, CouplingInputs, IntegrationSettings};
use crate::units::Quantity;

/// Shipped reproduction target for the 1 cm KTP experiment.
pub const LAB_CONFIG_JSON: &str = include_str!("../data/ktp_1cm.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chi3Reference {
    pub chi3_m2_per_v2: f64,
    /// Wavelengths of the reference process in χ⁽³⁾_yzzy coefficient order.
    pub wavelengths_nm: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    /// Dispersion file; the bundled KTP data when absent. Relative paths
    /// resolve against the configuration file's directory.
    #[serde(default)]
    pub crystal: Option<PathBuf>,
    pub theta_deg: f64,
    pub lambda_p_nm: f64,
    pub lambda_1_nm: f64,
    pub pump: BeamPulseParams,
    pub stim: BeamPulseParams,
    pub delta: f64,
    pub length_m: f64,
    pub chi3_m2_per_v2: f64,
    #[serde(default)]
    pub chi3_reference: Option<Chi3Reference>,
    pub detection_transfer: f64,
    #[serde(default)]
    pub overlap: bool,
    #[serde(default)]
    pub sweep_energies_j: Vec<f64>,
    #[serde(default)]
    pub integration: IntegrationSettings,
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| TpgError::Parse(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json_str(&text)?;
        if let Some(c) = &cfg.crystal {
            if c.is_relative() {
                if let Some(dir) = path.parent() {
                    cfg.crystal = Some(dir.join(c));
                }
            }
        }
        Ok(cfg)
    }

    pub fn bundled() -> Self {
        Self::from_json_str(LAB_CONFIG_JSON).expect("bundled configuration is valid")
    }

    pub fn validate(&self) -> Result<()> {
        self.pump.validate()?;
        self.stim.validate()?;
        let bad = |what: &str| Err(TpgError::InvalidInput(what.to_string()));
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return bad("delta must lie in (0, 1]");
        }
        if self.length_m.is_nan() || self.length_m <= 0.0 {
            return bad("crystal length must be positive");
        }
        if !(0.0..=1.0).contains(&self.detection_transfer) {
            return bad("detection transfer must lie in [0, 1]");
        }
        if !(self.lambda_p_nm > 0.0 && self.lambda_1_nm > 0.0) {
            return bad("wavelengths must be positive");
        }
        Ok(())
    }

    pub fn load_crystal(&self) -> Result<Arc<CrystalDispersion>> {
        Ok(Arc::new(match &self.crystal {
            Some(p) => CrystalDispersion::from_path(p)?,
            None => CrystalDispersion::ktp(),
        }))
    }

    /// Degenerate process at the configured carriers.
    pub fn anchor(&self, crystal: Arc<CrystalDispersion>) -> Result<ProcessSpec> {
        ProcessSpec::degenerate(
            crystal,
            Quantity::nanometers(self.lambda_p_nm),
            Quantity::nanometers(self.lambda_1_nm),
            Quantity::degrees(self.theta_deg),
        )
    }

    pub fn sweep_setup(&self) -> SweepSetup {
        SweepSetup {
            pump: self.pump,
            stim: self.stim,
            overlap: self.overlap,
            settings: self.integration,
        }
    }

    /// Model inputs at the configured pump and stimulation energies.
    pub fn coupling_inputs(&self, crystal: Arc<CrystalDispersion>) -> Result<CouplingInputs> {
        let anchor = self.anchor(crystal)?;
        let template = CouplingInputs::from_si(
            anchor,
            0.0,
            0.0,
            self.chi3_m2_per_v2,
            self.delta,
            self.length_m,
        )?;
        self.sweep_setup().inputs_at(&template, self.stim.energy_j)
    }

    /// χ⁽³⁾ carried from the reference block to the configured process.
    pub fn chi3_from_reference(&self, crystal: &CrystalDispersion) -> Result<Option<f64>> {
        let Some(r) = &self.chi3_reference else {
            return Ok(None);
        };
        let anchor = self.anchor(Arc::new(crystal.clone()))?;
        let [lp, l1, l2, l3] = anchor.wavelengths_m();
        let target = [lp, l1, l3, l2].map(Quantity::meters);
        let reference = r.wavelengths_nm.map(Quantity::nanometers);
        Ok(Some(
            miller_chi3(Quantity::chi3(r.chi3_m2_per_v2), reference, target, crystal)?.value,
        ))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }
}
