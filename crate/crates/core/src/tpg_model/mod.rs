//! Photon-flux model of mono-stimulated triple-photon generation with
//! undepleted pump and stimulation.
//!
//! The stimulated wave (mode 1) and the pump are classical; modes 2 and 3
//! grow from vacuum with a spectral density governed by the sign of the
//! coupling constant C⁽³⁾(ω): oscillating (sin²) when the mismatch term
//! dominates, exponential (sinh²) when the gain term dominates.

mod coupling;
mod flux;
mod integrate;
mod miller;

pub use coupling::{
    audit_interpretations, coupling_c3, coupling_f3, regime_threshold, AuditRow, F3Form,
    IntensityConvention, ADOPTED_F3_FORM,
};
pub use flux::{flux_density, flux_density_mode3, sinc_sinh_ratio, FluxPoint};
pub use integrate::{
    analytic_flux, analytic_flux_f3_squared, flux_spectrum, integrate_flux, lobe_window,
    regime_map, FluxIntegral, FluxSample, FluxSpectrum, IntegrationSettings, LobeWindow, RegimeRow,
};
pub use miller::{miller_chi3, polarization_yield, YZZY_AXES};

use serde::Serialize;

use crate::error::{Result, TpgError};
use crate::phase_matching::{MismatchLinearization, ProcessSpec, SpectralMismatch};
use crate::units::{Dim, Quantity};

/// Effective-mismatch scale used when no fitted value is supplied.
pub const DEFAULT_DELTA: f64 = 2e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    Weak,
    Strong,
    Boundary,
}

impl Regime {
    pub fn classify(c3: f64, band: f64) -> Regime {
        if c3 < -band {
            Regime::Weak
        } else if c3 > band {
            Regime::Strong
        } else {
            Regime::Boundary
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Weak => "weak",
            Regime::Strong => "strong",
            Regime::Boundary => "boundary",
        }
    }
}

/// Weak below −band, strong above +band, boundary in between.
pub fn classify_regime(c3: Quantity, band: Quantity) -> Result<Regime> {
    let c = c3.expect(Dim::PER_AREA)?;
    let b = band.expect(Dim::PER_AREA)?;
    if b < 0.0 {
        return Err(TpgError::InvalidInput("negative boundary band".into()));
    }
    Ok(Regime::classify(c, b))
}

/// Everything the coupling constants and flux densities depend on.
#[derive(Debug, Clone)]
pub struct CouplingInputs {
    anchor: ProcessSpec,
    mismatch: SpectralMismatch,
    /// n_p·n_1 at the carriers, the fixed part of the f⁽³⁾ denominator.
    carrier_index_product: f64,
    pump_intensity: f64,
    stim_intensity: f64,
    chi3: f64,
    delta: f64,
    length: f64,
    linearization: Option<MismatchLinearization>,
}

impl CouplingInputs {
    pub fn new(
        anchor: ProcessSpec,
        pump_intensity: Quantity,
        stim_intensity: Quantity,
        chi3: Quantity,
        delta: f64,
        length: Quantity,
    ) -> Result<Self> {
        Self::from_si(
            anchor,
            pump_intensity.expect(Dim::INTENSITY)?,
            stim_intensity.expect(Dim::INTENSITY)?,
            chi3.expect(Dim::CHI3)?,
            delta,
            length.expect(Dim::LENGTH)?,
        )
    }

    pub fn from_si(
        anchor: ProcessSpec,
        pump_intensity: f64,
        stim_intensity: f64,
        chi3: f64,
        delta: f64,
        length: f64,
    ) -> Result<Self> {
        check_intensity(pump_intensity)?;
        check_intensity(stim_intensity)?;
        check_delta(delta)?;
        if !(length > 0.0 && length.is_finite()) {
            return Err(TpgError::InvalidInput(format!("crystal length {length} m")));
        }
        if !chi3.is_finite() {
            return Err(TpgError::InvalidInput("non-finite chi3".into()));
        }
        let mismatch = SpectralMismatch::new(&anchor)?;
        let [lp, l1, _, _] = anchor.wavelengths_m();
        let pols = anchor.polarizations();
        let carrier_index_product = anchor.index(pols[0], lp)? * anchor.index(pols[1], l1)?;
        Ok(Self {
            anchor,
            mismatch,
            carrier_index_product,
            pump_intensity,
            stim_intensity,
            chi3,
            delta,
            length,
            linearization: None,
        })
    }

    pub fn with_linearization(mut self, lin: MismatchLinearization) -> Self {
        self.linearization = Some(lin);
        self
    }

    pub fn with_stim_intensity(mut self, intensity: f64) -> Result<Self> {
        check_intensity(intensity)?;
        self.stim_intensity = intensity;
        Ok(self)
    }

    pub fn with_pump_intensity(mut self, intensity: f64) -> Result<Self> {
        check_intensity(intensity)?;
        self.pump_intensity = intensity;
        Ok(self)
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        self.delta = delta;
        Ok(self)
    }

    pub fn with_length(mut self, length: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(TpgError::InvalidInput(format!("crystal length {length} m")));
        }
        self.length = length;
        Ok(self)
    }

    pub fn with_chi3(mut self, chi3: f64) -> Self {
        self.chi3 = chi3;
        self
    }

    pub fn anchor(&self) -> &ProcessSpec {
        &self.anchor
    }

    pub fn mismatch(&self) -> &SpectralMismatch {
        &self.mismatch
    }

    pub fn pump_intensity(&self) -> f64 {
        self.pump_intensity
    }

    pub fn stim_intensity(&self) -> f64 {
        self.stim_intensity
    }

    pub fn chi3(&self) -> f64 {
        self.chi3
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn linearization(&self) -> Option<&MismatchLinearization> {
        self.linearization.as_ref()
    }

    /// Degenerate (mode-2 carrier) frequency of the anchor.
    pub fn omega_degenerate(&self) -> f64 {
        self.mismatch.omega_center()
    }

    /// δ·Δk(ω), rad/m.
    pub fn delta_k_eff(&self, omega: f64) -> Result<f64> {
        Ok(self.delta * self.mismatch.at(omega)?)
    }
}

fn check_intensity(i: f64) -> Result<()> {
    if i >= 0.0 && i.is_finite() {
        Ok(())
    } else {
        Err(TpgError::InvalidInput(format!("intensity {i} W/m²")))
    }
}

fn check_delta(d: f64) -> Result<()> {
    if d > 0.0 && d <= 1.0 {
        Ok(())
    } else {
        Err(TpgError::InvalidInput(format!("delta {d} outside (0, 1]")))
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regime_classification() {
        let band = Quantity::new(1e-3, Dim::PER_AREA);
        let c = |v| Quantity::new(v, Dim::PER_AREA);
        assert_eq!(classify_regime(c(-10.0), band).unwrap(), Regime::Weak);
        assert_eq!(classify_regime(c(10.0), band).unwrap(), Regime::Strong);
        assert_eq!(classify_regime(c(0.0), band).unwrap(), Regime::Boundary);
        assert!(classify_regime(Quantity::meters(1.0), band).is_err());
    }

    #[test]
    fn input_invariants() {
        let a = test_support::anchor();
        assert!(CouplingInputs::from_si(a.clone(), -1.0, 1.0, 1e-22, 0.5, 0.01).is_err());
        assert!(CouplingInputs::from_si(a.clone(), 1.0, 1.0, 1e-22, 0.0, 0.01).is_err());
        assert!(CouplingInputs::from_si(a.clone(), 1.0, 1.0, 1e-22, 1.5, 0.01).is_err());
        assert!(CouplingInputs::from_si(a, 1.0, 1.0, 1e-22, 1.0, 0.0).is_err());
    }
}
