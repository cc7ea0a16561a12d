use std::f64::consts::PI;

use serde::Serialize;

use super::CouplingInputs;
use crate::error::{Result, TpgError};
use crate::phase_matching::{ProcessSpec, SpectralMismatch};
use crate::units::{Dim, Quantity, EPSILON_0, SPEED_OF_LIGHT};

/// Numerator of the spectral coupling factor f⁽³⁾(ω).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum F3Form {
    /// ω·(ω_p − ω_1 − ω)
    TwoFrequency,
    /// ω·ω_1·(ω_p − ω_1 − ω)·ω_p
    FourFrequency,
}

/// How the pump and stimulation intensities enter the gain term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IntensityConvention {
    /// Irradiance in W·m⁻².
    Irradiance,
    /// Photon flux density I/(ħω) in m⁻²·s⁻¹.
    PhotonFlux,
}

/// The only interpretation for which C⁽³⁾ carries m⁻²; see
/// [`audit_interpretations`].
pub const ADOPTED_F3_FORM: F3Form = F3Form::TwoFrequency;

/// 1/(8π c² ε₀)² with its dimension.
fn f3_prefactor() -> Quantity {
    let c = Quantity::speed_of_light();
    let denom = 8.0 * PI * (c * c) * Quantity::epsilon_0();
    (Quantity::dimensionless(1.0) / denom).powi(2)
}

fn f3_prefactor_si() -> f64 {
    let d = 8.0 * PI * SPEED_OF_LIGHT * SPEED_OF_LIGHT * EPSILON_0;
    1.0 / (d * d)
}

fn f3_quantity(
    form: F3Form,
    omega: f64,
    omega3: f64,
    omega_1: f64,
    omega_p: f64,
    index_product: f64,
) -> Quantity {
    let w = Quantity::rad_per_second;
    let mut num = w(omega) * w(omega3);
    if form == F3Form::FourFrequency {
        num = num * w(omega_1) * w(omega_p);
    }
    f3_prefactor() * num / index_product
}

/// f⁽³⁾(ω) for the anchor's carriers and polarization assignment.
pub fn coupling_f3(omega: Quantity, anchor: &ProcessSpec) -> Result<Quantity> {
    let w = omega.expect(Dim::FREQUENCY)?;
    let sm = SpectralMismatch::new(anchor)?;
    let [lp, l1, _, _] = anchor.wavelengths_m();
    let pols = anchor.polarizations();
    let carriers = anchor.index(pols[0], lp)? * anchor.index(pols[1], l1)?;
    let (n2, n3) = sm.mode_indices(w)?;
    let [wp, w1, _, _] = anchor.omegas();
    Ok(f3_quantity(
        ADOPTED_F3_FORM,
        w,
        sm.mirror(w),
        w1,
        wp,
        carriers * n2 * n3,
    ))
}

/// f⁽³⁾(ω) in SI on the fast path.
pub(crate) fn f3_si(inputs: &CouplingInputs, omega: f64) -> Result<f64> {
    let sm = inputs.mismatch();
    let (n2, n3) = sm.mode_indices(omega)?;
    let omega3 = sm.mirror(omega);
    Ok(f3_prefactor_si() * omega * omega3 / (inputs.carrier_index_product * n2 * n3))
}

/// Returns (G, C⁽³⁾) with G = I_1·I_p·f⁽³⁾·χ² so that the gain term is 4π²·G.
pub(crate) fn gain_and_c3(inputs: &CouplingInputs, omega: f64) -> Result<(f64, f64)> {
    let g = inputs.stim_intensity()
        * inputs.pump_intensity()
        * f3_si(inputs, omega)?
        * inputs.chi3()
        * inputs.chi3();
    let dk = inputs.delta_k_eff(omega)?;
    Ok((g, 4.0 * PI * PI * g - 0.25 * dk * dk))
}

/// C⁽³⁾(ω) = 4π²·I_1·I_p·f⁽³⁾·χ² − Δk_eff²/4, evaluated with dimension
/// tracking; any interpretation that fails to reduce to m⁻² is rejected.
pub fn coupling_c3(omega: Quantity, inputs: &CouplingInputs) -> Result<Quantity> {
    let w = omega.expect(Dim::FREQUENCY)?;
    let [wp, w1, _, _] = inputs.anchor().omegas();
    let sm = inputs.mismatch();
    let (n2, n3) = sm.mode_indices(w)?;
    let f3 = f3_quantity(
        ADOPTED_F3_FORM,
        w,
        sm.mirror(w),
        w1,
        wp,
        inputs.carrier_index_product * n2 * n3,
    );
    let gain = gain_term(
        f3,
        IntensityConvention::Irradiance,
        inputs.pump_intensity(),
        inputs.stim_intensity(),
        wp,
        w1,
        inputs.chi3(),
    );
    let dk = Quantity::new(inputs.delta_k_eff(w)?, Dim::WAVENUMBER);
    let c3 = gain.try_sub(dk * dk / 4.0)?;
    c3.expect(Dim::PER_AREA)?;
    Ok(c3)
}

fn gain_term(
    f3: Quantity,
    convention: IntensityConvention,
    pump: f64,
    stim: f64,
    omega_p: f64,
    omega_1: f64,
    chi3: f64,
) -> Quantity {
    let (ip, i1) = match convention {
        IntensityConvention::Irradiance => {
            (Quantity::watts_per_m2(pump), Quantity::watts_per_m2(stim))
        }
        IntensityConvention::PhotonFlux => (
            Quantity::watts_per_m2(pump) / (Quantity::hbar() * Quantity::rad_per_second(omega_p)),
            Quantity::watts_per_m2(stim) / (Quantity::hbar() * Quantity::rad_per_second(omega_1)),
        ),
    };
    let chi = Quantity::chi3(chi3);
    4.0 * PI * PI * i1 * ip * f3 * chi * chi
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditRow {
    pub form: F3Form,
    pub convention: IntensityConvention,
    pub gain_dim: Dim,
    pub closes: bool,
}

/// Dimension of the gain term of C⁽³⁾ under each candidate reading of the
/// coupling factor and of the intensities.
pub fn audit_interpretations() -> Vec<AuditRow> {
    let mut rows = Vec::new();
    for form in [F3Form::TwoFrequency, F3Form::FourFrequency] {
        for convention in [
            IntensityConvention::Irradiance,
            IntensityConvention::PhotonFlux,
        ] {
            let f3 = f3_quantity(form, 1e15, 1e15, 1e15, 3e15, 10.0);
            let g = gain_term(f3, convention, 1e14, 1e13, 3e15, 1e15, 1e-21);
            rows.push(AuditRow {
                form,
                convention,
                gain_dim: g.dim,
                closes: g.dim == Dim::PER_AREA,
            });
        }
    }
    rows
}

/// Intensity product I_p·I_1 (W²·m⁻⁴) at which C⁽³⁾ vanishes at the
/// degenerate frequency.
pub fn regime_threshold(inputs: &CouplingInputs) -> Result<f64> {
    let w = inputs.omega_degenerate();
    let f3 = f3_si(inputs, w)?;
    let chi2 = inputs.chi3() * inputs.chi3();
    if f3 * chi2 == 0.0 {
        return Err(TpgError::InvalidInput("zero coupling".into()));
    }
    let dk = inputs.delta_k_eff(w)?;
    Ok(dk * dk / (16.0 * PI * PI * f3 * chi2))
}
