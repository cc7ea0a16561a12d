//! Independent numerical checks of the closed-form flux model: a direct
//! integration of the two-mode coupled amplitude equations and a dense
//! trapezoid quadrature of the spectral density.

use std::f64::consts::PI;
use std::fmt::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, TpgError};
use crate::tpg_model::{flux_density, lobe_window, CouplingInputs, IntegrationSettings};
use crate::units::{Dim, Quantity};

/// Relative Richardson estimate above which a propagation is rejected.
pub const RICHARDSON_LIMIT: f64 = 1e-7;

/// Recommended step count for the default tolerance.
pub const DEFAULT_STEPS: usize = 10_000;

/// Mode amplitudes; `a3c` holds A₃*.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeState {
    pub a2: Complex64,
    pub a3c: Complex64,
    pub z: f64,
}

impl OdeState {
    /// Vacuum-equivalent seed: A₂ = 0 and |A₃|² = 1/(2π), which reproduces
    /// the Z² limit of the closed form.
    pub fn seeded() -> Self {
        Self {
            a2: Complex64::new(0.0, 0.0),
            a3c: Complex64::new((2.0 * PI).sqrt().recip(), 0.0),
            z: 0.0,
        }
    }

    /// |A₃|² − |A₂|², conserved by the coupled equations.
    pub fn invariant(&self) -> f64 {
        self.a3c.norm_sqr() - self.a2.norm_sqr()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeOutput {
    /// |A₂(L)|², photons per pulse per unit angular frequency.
    pub density: f64,
    /// Generated part of mode 3, |A₃(L)|² − |A₃(0)|².
    pub density_mode3: f64,
    pub richardson_estimate: f64,
    pub steps: usize,
    /// Change of |A₃|² − |A₂|² relative to |A₃(L)|².
    pub invariant_drift: f64,
}

/// dA₂/dZ = i·g·A₃*·e^{−iΔk Z}, dA₃*/dZ = −i·g·A₂·e^{iΔk Z} with g real.
fn rhs(g: f64, dk: f64, z: f64, a2: Complex64, a3c: Complex64) -> (Complex64, Complex64) {
    let e = Complex64::from_polar(1.0, -dk * z);
    let i = Complex64::i();
    (i * g * a3c * e, -i * g * a2 * e.conj())
}

/// Classical RK4 over [0, length] in `steps` equal steps.
pub fn rk4_propagate(g: f64, dk: f64, length: f64, steps: usize) -> OdeState {
    let mut s = OdeState::seeded();
    let h = length / steps as f64;
    for n in 0..steps {
        let z = n as f64 * h;
        let (k1a, k1b) = rhs(g, dk, z, s.a2, s.a3c);
        let (k2a, k2b) = rhs(
            g,
            dk,
            z + 0.5 * h,
            s.a2 + 0.5 * h * k1a,
            s.a3c + 0.5 * h * k1b,
        );
        let (k3a, k3b) = rhs(
            g,
            dk,
            z + 0.5 * h,
            s.a2 + 0.5 * h * k2a,
            s.a3c + 0.5 * h * k2b,
        );
        let (k4a, k4b) = rhs(g, dk, z + h, s.a2 + h * k3a, s.a3c + h * k3b);
        s.a2 += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
        s.a3c += h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
        s.z = (n + 1) as f64 * h;
    }
    s
}

/// n₂(ω, L) from the coupled equations with |g|² = 4π²·I_1·I_p·f⁽³⁾·χ².
///
/// Runs `steps` and `2·steps` and fails with `StepTooCoarse` when the
/// Richardson estimate of the finer run exceeds [`RICHARDSON_LIMIT`].
pub fn ode_propagate(omega: Quantity, inputs: &CouplingInputs, steps: usize) -> Result<OdeOutput> {
    let w = omega.expect(Dim::FREQUENCY)?;
    if steps == 0 {
        return Err(TpgError::InvalidInput("at least one step required".into()));
    }
    let gain = flux_density(omega, inputs)?.gain;
    let g = 2.0 * PI * gain.max(0.0).sqrt();
    let dk = inputs.delta_k_eff(w)?;
    let l = inputs.length();
    let coarse = rk4_propagate(g, dk, l, steps);
    let fine = rk4_propagate(g, dk, l, 2 * steps);
    let (dc, df) = (coarse.a2.norm_sqr(), fine.a2.norm_sqr());
    let estimate = if df == 0.0 {
        0.0
    } else {
        (df - dc).abs() / (15.0 * df)
    };
    if estimate > RICHARDSON_LIMIT {
        return Err(TpgError::StepTooCoarse {
            estimate,
            limit: RICHARDSON_LIMIT,
        });
    }
    let i0 = OdeState::seeded().invariant();
    Ok(OdeOutput {
        density: df,
        density_mode3: fine.a3c.norm_sqr() - OdeState::seeded().a3c.norm_sqr(),
        richardson_estimate: estimate,
        steps: 2 * steps,
        invariant_drift: (fine.invariant() - i0).abs() / fine.a3c.norm_sqr(),
    })
}

/// Composite trapezoid of n₂(ω, L) over the same lobe window as the
/// adaptive integrator.
pub fn quadrature_reference(
    inputs: &CouplingInputs,
    settings: &IntegrationSettings,
    n_points: usize,
) -> Result<f64> {
    if n_points < 2 {
        return Err(TpgError::InvalidInput("trapezoid needs two points".into()));
    }
    let window = lobe_window(inputs, settings.n_lobes)?;
    let (lo, hi) = (window.lo(), window.hi());
    let h = (hi - lo) / (n_points - 1) as f64;
    let mut sum = 0.0;
    for i in 0..n_points {
        let w = if i == n_points - 1 {
            hi
        } else {
            lo + h * i as f64
        };
        let d = flux_density(Quantity::rad_per_second(w), inputs)?.density;
        sum += if i == 0 || i == n_points - 1 {
            0.5 * d
        } else {
            d
        };
    }
    Ok(sum * h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalenceRow {
    pub omega: f64,
    pub closed_form: f64,
    pub oracle: f64,
    pub rel_error: f64,
}

/// Closed form against the coupled-equation oracle at each (ω, inputs).
pub fn equivalence_rows(
    points: &[(f64, CouplingInputs)],
    steps: usize,
) -> Result<Vec<EquivalenceRow>> {
    points
        .iter()
        .map(|(w, inp)| {
            let q = Quantity::rad_per_second(*w);
            let closed_form = flux_density(q, inp)?.density;
            let oracle = ode_propagate(q, inp, steps)?.density;
            let rel_error = if closed_form == 0.0 {
                oracle.abs()
            } else {
                (oracle - closed_form).abs() / closed_form
            };
            Ok(EquivalenceRow {
                omega: *w,
                closed_form,
                oracle,
                rel_error,
            })
        })
        .collect()
}

pub fn equivalence_csv(rows: &[EquivalenceRow]) -> String {
    let mut out = String::from("omega,closed_form,oracle,rel_error\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{:e},{:e},{:e},{:e}",
            r.omega, r.closed_form, r.oracle, r.rel_error
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_coupling_stays_empty() {
        let s = rk4_propagate(0.0, 100.0, 0.01, 1000);
        assert_eq!(s.a2.norm_sqr(), 0.0);
    }

    #[test]
    fn phase_matched_growth_is_sinh() {
        let g = 300.0;
        let l = 0.01;
        let n1 = rk4_propagate(g, 0.0, l, 20_000).a2.norm_sqr();
        let n2 = rk4_propagate(g, 0.0, 2.0 * l, 40_000).a2.norm_sqr();
        let want = (2.0 * g * l).sinh().powi(2) / (g * l).sinh().powi(2);
        assert!((n2 / n1 / want - 1.0).abs() < 1e-6);
    }

    #[test]
    fn invariant_is_conserved() {
        let s = rk4_propagate(500.0, 1e3, 0.01, 20_000);
        let i0 = OdeState::seeded().invariant();
        assert!((s.invariant() - i0).abs() < 1e-10 * i0);
    }

    #[test]
    fn coarse_steps_are_rejected() {
        let s = std::sync::Arc::new(crate::dispersion::CrystalDispersion::ktp());
        let a = crate::phase_matching::ProcessSpec::degenerate(
            s,
            Quantity::nanometers(532.0),
            Quantity::nanometers(1491.0),
            Quantity::degrees(90.0),
        )
        .unwrap();
        let inp = CouplingInputs::from_si(a, 1e17, 1e17, 7.8e-22, 1.0, 0.01).unwrap();
        let w = Quantity::rad_per_second(inp.omega_degenerate() + 3e13);
        assert!(matches!(
            ode_propagate(w, &inp, 10),
            Err(TpgError::StepTooCoarse { .. })
        ));
    }
}
