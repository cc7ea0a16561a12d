use std::f64::consts::PI;

use serde::Serialize;

use super::coupling::gain_and_c3;
use super::{CouplingInputs, Regime};
use crate::error::Result;
use crate::units::{Dim, Quantity};

/// Below this |C·Z²| the ratio is evaluated from its Taylor series, which is
/// accurate to machine precision there and joins both branches smoothly.
const SERIES_LIMIT: f64 = 1e-3;

/// S(u) = sinh²(√u)/u for u > 0 and sin²(√−u)/(−u) for u < 0, with S(0) = 1.
///
/// With u = C⁽³⁾·Z² the mode-2 density is 2π·G·Z²·S(u).
pub fn sinc_sinh_ratio(u: f64) -> f64 {
    if u.abs() < SERIES_LIMIT {
        // sinh²(x)/x² with x² = u
        1.0 + u * (1.0 / 3.0 + u * (2.0 / 45.0 + u * (1.0 / 315.0 + u * (2.0 / 14175.0))))
    } else if u > 0.0 {
        let s = u.sqrt().sinh();
        s * s / u
    } else {
        let s = (-u).sqrt().sin();
        s * s / -u
    }
}

/// Mode-2 spectral density at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxPoint {
    pub omega: f64,
    /// Photons per pulse per unit angular frequency.
    pub density: f64,
    /// C⁽³⁾ in m⁻².
    pub c3: f64,
    /// I_1·I_p·f⁽³⁾·χ², m⁻².
    pub gain: f64,
    pub regime: Regime,
}

/// Band around C⁽³⁾ = 0 inside which √|C|·Z is below machine resolution and
/// the density equals its Z² limit.
pub(crate) fn point_band(length: f64) -> f64 {
    f64::EPSILON / (length * length)
}

pub(crate) fn density_si(inputs: &CouplingInputs, omega: f64) -> Result<(f64, f64, f64)> {
    let (g, c3) = gain_and_c3(inputs, omega)?;
    let z = inputs.length();
    let density = 2.0 * PI * g * z * z * sinc_sinh_ratio(c3 * z * z);
    Ok((density, c3, g))
}

/// n₂(ω, L): sin² branch for C⁽³⁾ < 0, sinh² branch for C⁽³⁾ > 0.
pub fn flux_density(omega: Quantity, inputs: &CouplingInputs) -> Result<FluxPoint> {
    let w = omega.expect(Dim::FREQUENCY)?;
    let (density, c3, gain) = density_si(inputs, w)?;
    Ok(FluxPoint {
        omega: w,
        density,
        c3,
        gain,
        regime: Regime::classify(c3, point_band(inputs.length())),
    })
}

/// n₃(ω, L) = n₂(ω_p − ω_1 − ω, L).
pub fn flux_density_mode3(omega: Quantity, inputs: &CouplingInputs) -> Result<FluxPoint> {
    let w = omega.expect(Dim::FREQUENCY)?;
    let mirrored = inputs.mismatch().mirror(w);
    let p = flux_density(Quantity::rad_per_second(mirrored), inputs)?;
    Ok(FluxPoint { omega: w, ..p })
}

#[cfg(test)]
mod tests {
    use super::super::test_support::inputs;
    use super::*;

    fn closed(u: f64) -> f64 {
        if u > 0.0 {
            u.sqrt().sinh().powi(2) / u
        } else {
            (-u).sqrt().sin().powi(2) / -u
        }
    }

    #[test]
    fn ratio_matches_closed_forms_away_from_zero() {
        for &u in &[-40.0, -3.0, -1e-2, -1.1e-3, 1.1e-3, 1e-2, 2.0, 50.0] {
            assert!((sinc_sinh_ratio(u) - closed(u)).abs() <= 1e-13 * closed(u));
        }
    }

    #[test]
    fn series_joins_closed_form_at_switch() {
        for &u in &[SERIES_LIMIT * 0.999_999, -SERIES_LIMIT * 0.999_999] {
            let a = sinc_sinh_ratio(u);
            let b = closed(u);
            assert!((a - b).abs() <= 1e-12, "{u}: {a} vs {b}");
        }
    }

    #[test]
    fn zero_chi_gives_zero_density() {
        let inp = inputs(1.0).with_chi3(0.0);
        for k in -5..=5 {
            let w = inp.omega_degenerate() + k as f64 * 2e13;
            let p = flux_density(Quantity::rad_per_second(w), &inp).unwrap();
            assert_eq!(p.density, 0.0);
        }
    }

    #[test]
    fn density_bounded_and_nonnegative() {
        let inp = inputs(0.5);
        for k in -50..=50 {
            let w = inp.omega_degenerate() + k as f64 * 3e12;
            let p = flux_density(Quantity::rad_per_second(w), &inp).unwrap();
            assert!(p.density >= 0.0);
            if p.c3 < 0.0 {
                assert!(p.density <= 2.0 * PI * p.gain / p.c3.abs() * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn strong_branch_grows_with_length() {
        let inp = inputs(1.0)
            .with_pump_intensity(1e16)
            .unwrap()
            .with_stim_intensity(1e16)
            .unwrap();
        let sm = inp.mismatch();
        // near the mismatch zero the gain term dominates
        let (mut lo, mut hi) = (inp.omega_degenerate() - 1e14, inp.omega_degenerate() + 1e14);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if sm.at(lo).unwrap() * sm.at(mid).unwrap() <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let w = Quantity::rad_per_second(lo);
        let mut prev = 0.0;
        for i in 1..=20 {
            let p = flux_density(w, &inp.clone().with_length(i as f64 * 1e-3).unwrap()).unwrap();
            assert_eq!(p.regime, Regime::Strong);
            assert!(p.density > prev);
            prev = p.density;
        }
    }

    #[test]
    fn mode3_is_mirror_of_mode2() {
        let inp = inputs(1.0);
        let w = inp.omega_degenerate() + 4e13;
        let n3 = flux_density_mode3(Quantity::rad_per_second(w), &inp).unwrap();
        let n2 = flux_density(Quantity::rad_per_second(inp.mismatch().mirror(w)), &inp).unwrap();
        assert_eq!(n3.density, n2.density);
        assert_eq!(n3.omega, w);
    }

    #[test]
    fn length_rescaling_invariance() {
        // (Z, C) → (kZ, C/k²) leaves S unchanged and the density scales as Z²·G
        for &u in &[-30.0, -0.5, 0.2, 7.0] {
            for &k in &[0.5, 3.0, 10.0] {
                let z = 0.01;
                let c = u / (z * z);
                let a = sinc_sinh_ratio(c * z * z);
                let b = sinc_sinh_ratio((c / (k * k)) * (k * z) * (k * z));
                assert!((a - b).abs() <= 1e-14 * a);
            }
        }
    }
}
