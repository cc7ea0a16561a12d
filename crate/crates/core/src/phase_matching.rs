//! Collinear phase mismatch of the four-wave process and the degenerate
//! phase-matching solver for propagation in the xz-plane.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::dispersion::{check_theta, Axis, CrystalDispersion};
use crate::error::{Result, TpgError};
use crate::units::{Dim, Quantity, SPEED_OF_LIGHT};

/// Relative tolerance on energy conservation for a conserving process.
pub const ENERGY_TOLERANCE: f64 = 1e-12;
/// Default half-width of the linearization window, 2π·10 THz.
pub const DEFAULT_LINEARIZATION_HALF_WIDTH: f64 = 2.0 * PI * 10e12;
pub const MIN_LINEARIZATION_POINTS: usize = 201;

/// Which eigenmode of the xz-plane a wave propagates in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Polarization {
    /// Polarized along y; index n_y.
    YMode,
    /// Polarized in the xz-plane; index between n_x and n_z.
    InPlane,
}

/// Pump, stimulation and the two generated waves, in that order.
pub const PUMP: usize = 0;
pub const STIM: usize = 1;
pub const MODE2: usize = 2;
pub const MODE3: usize = 3;

/// Pump and mode 2 on the y eigenmode, stimulation and mode 3 in-plane.
pub const DEFAULT_POLARIZATIONS: [Polarization; 4] = [
    Polarization::YMode,
    Polarization::InPlane,
    Polarization::YMode,
    Polarization::InPlane,
];

pub fn omega_from_wavelength(wavelength_m: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / wavelength_m
}

pub fn wavelength_from_omega(omega: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / omega
}

/// The four interacting waves and their propagation direction.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSpec {
    crystal: Arc<CrystalDispersion>,
    wavelengths_m: [f64; 4],
    theta_rad: f64,
    polarizations: [Polarization; 4],
}

impl ProcessSpec {
    pub fn new(
        crystal: Arc<CrystalDispersion>,
        wavelengths: [Quantity; 4],
        theta: Quantity,
    ) -> Result<Self> {
        let mut wl = [0.0; 4];
        for (slot, q) in wl.iter_mut().zip(wavelengths) {
            *slot = q.expect(Dim::LENGTH)?;
        }
        Self::from_si(crystal, wl, theta.expect(Dim::NONE)?)
    }

    pub fn from_si(
        crystal: Arc<CrystalDispersion>,
        wavelengths_m: [f64; 4],
        theta_rad: f64,
    ) -> Result<Self> {
        check_theta(theta_rad)?;
        for &l in &wavelengths_m {
            if !(l > 0.0 && l.is_finite()) {
                return Err(TpgError::InvalidInput(format!("wavelength {l} m")));
            }
            if !crystal.contains(l) {
                let [min_um, max_um] = crystal.window_um();
                return Err(TpgError::OutOfWindow {
                    wavelength_um: l * 1e6,
                    min_um,
                    max_um,
                });
            }
        }
        Ok(Self {
            crystal,
            wavelengths_m,
            theta_rad,
            polarizations: DEFAULT_POLARIZATIONS,
        })
    }

    /// Degenerate process λ2 = λ3 with λ23 fixed by energy conservation.
    pub fn degenerate(
        crystal: Arc<CrystalDispersion>,
        lambda_p: Quantity,
        lambda_1: Quantity,
        theta: Quantity,
    ) -> Result<Self> {
        let lp = lambda_p.expect(Dim::LENGTH)?;
        let l1 = lambda_1.expect(Dim::LENGTH)?;
        let l23 = degenerate_lambda23(lp, l1)?;
        Self::from_si(crystal, [lp, l1, l23, l23], theta.expect(Dim::NONE)?)
    }

    pub fn with_polarizations(mut self, polarizations: [Polarization; 4]) -> Self {
        self.polarizations = polarizations;
        self
    }

    /// Exchanges modes 2 and 3 together with their polarizations.
    pub fn swap_modes_23(&self) -> Self {
        let mut s = self.clone();
        s.wavelengths_m.swap(MODE2, MODE3);
        s.polarizations.swap(MODE2, MODE3);
        s
    }

    pub fn crystal(&self) -> &Arc<CrystalDispersion> {
        &self.crystal
    }

    pub fn wavelengths_m(&self) -> [f64; 4] {
        self.wavelengths_m
    }

    pub fn omegas(&self) -> [f64; 4] {
        self.wavelengths_m.map(omega_from_wavelength)
    }

    pub fn theta_rad(&self) -> f64 {
        self.theta_rad
    }

    pub fn polarizations(&self) -> [Polarization; 4] {
        self.polarizations
    }

    /// Relative energy residual |1/λp − 1/λ1 − 1/λ2 − 1/λ3| / (1/λp).
    pub fn energy_residual(&self) -> f64 {
        let [p, a, b, c] = self.wavelengths_m.map(|l| 1.0 / l);
        (p - a - b - c).abs() / p
    }

    pub fn is_conserving(&self) -> bool {
        self.energy_residual() <= ENERGY_TOLERANCE
    }

    /// Index seen by a wave of polarization `pol` at `wavelength_m`.
    pub fn index(&self, pol: Polarization, wavelength_m: f64) -> Result<f64> {
        mode_index(&self.crystal, self.theta_rad, pol, wavelength_m)
    }
}

fn mode_index(
    crystal: &CrystalDispersion,
    theta_rad: f64,
    pol: Polarization,
    wavelength_m: f64,
) -> Result<f64> {
    match pol {
        Polarization::YMode => crystal.index_at(Axis::Y, wavelength_m),
        Polarization::InPlane => crystal.inplane_index_at(theta_rad, wavelength_m),
    }
}

/// λ23 such that 1/λp = 1/λ1 + 2/λ23.
pub fn degenerate_lambda23(lambda_p_m: f64, lambda_1_m: f64) -> Result<f64> {
    let inv = 1.0 / lambda_p_m - 1.0 / lambda_1_m;
    if inv <= 0.0 {
        return Err(TpgError::InvalidInput(
            "stimulation wavelength must exceed the pump wavelength".into(),
        ));
    }
    Ok(2.0 / inv)
}

fn delta_k_raw(spec: &ProcessSpec) -> Result<f64> {
    let mut k = [0.0; 4];
    for (i, (&l, &pol)) in spec
        .wavelengths_m
        .iter()
        .zip(&spec.polarizations)
        .enumerate()
    {
        k[i] = 2.0 * PI * spec.index(pol, l)? / l;
    }
    Ok(k[PUMP] - k[STIM] - k[MODE2] - k[MODE3])
}

/// Collinear mismatch k_p − k_1 − k_2 − k_3 in rad/m.
pub fn delta_k_collinear(spec: &ProcessSpec) -> Result<Quantity> {
    let residual = spec.energy_residual();
    if residual > ENERGY_TOLERANCE {
        return Err(TpgError::EnergyViolation { residual });
    }
    Ok(Quantity::new(delta_k_raw(spec)?, Dim::WAVENUMBER))
}

/// Mismatch as a function of the mode-2 frequency with pump and stimulation
/// held at their carriers; mode 3 takes ω_p − ω_1 − ω.
#[derive(Debug, Clone)]
pub struct SpectralMismatch {
    crystal: Arc<CrystalDispersion>,
    theta_rad: f64,
    pol2: Polarization,
    pol3: Polarization,
    /// k_p − k_1 at the carriers.
    k_fixed: f64,
    omega_sum: f64,
    omega_center: f64,
}

impl SpectralMismatch {
    pub fn new(anchor: &ProcessSpec) -> Result<Self> {
        let [lp, l1, l2, _] = anchor.wavelengths_m;
        let kp = 2.0 * PI * anchor.index(anchor.polarizations[PUMP], lp)? / lp;
        let k1 = 2.0 * PI * anchor.index(anchor.polarizations[STIM], l1)? / l1;
        let [wp, w1, _, _] = anchor.omegas();
        Ok(Self {
            crystal: anchor.crystal.clone(),
            theta_rad: anchor.theta_rad,
            pol2: anchor.polarizations[MODE2],
            pol3: anchor.polarizations[MODE3],
            k_fixed: kp - k1,
            omega_sum: wp - w1,
            omega_center: omega_from_wavelength(l2),
        })
    }

    /// ω_p − ω_1, the frequency shared by modes 2 and 3.
    pub fn omega_sum(&self) -> f64 {
        self.omega_sum
    }

    /// Mode-2 carrier frequency of the anchor (the degenerate frequency).
    pub fn omega_center(&self) -> f64 {
        self.omega_center
    }

    /// Frequency range on which both ω and ω_p − ω_1 − ω lie in the window.
    pub fn valid_range(&self) -> (f64, f64) {
        let (lmin, lmax) = self.crystal.window_m();
        let (wmin, wmax) = (omega_from_wavelength(lmax), omega_from_wavelength(lmin));
        (
            wmin.max(self.omega_sum - wmax),
            wmax.min(self.omega_sum - wmin),
        )
    }

    pub fn mirror(&self, omega: f64) -> f64 {
        self.omega_sum - omega
    }

    pub fn crystal(&self) -> &CrystalDispersion {
        &self.crystal
    }

    pub fn theta_rad(&self) -> f64 {
        self.theta_rad
    }

    /// Index of mode 2 at ω and of mode 3 at the mirror frequency.
    pub fn mode_indices(&self, omega: f64) -> Result<(f64, f64)> {
        let omega3 = self.omega_sum - omega;
        if omega <= 0.0 {
            return Err(TpgError::NonPositiveFrequency { omega });
        }
        if omega3 <= 0.0 {
            return Err(TpgError::NonPositiveFrequency { omega: omega3 });
        }
        let n2 = mode_index(
            &self.crystal,
            self.theta_rad,
            self.pol2,
            wavelength_from_omega(omega),
        )?;
        let n3 = mode_index(
            &self.crystal,
            self.theta_rad,
            self.pol3,
            wavelength_from_omega(omega3),
        )?;
        Ok((n2, n3))
    }

    pub fn at(&self, omega: f64) -> Result<f64> {
        let (n2, n3) = self.mode_indices(omega)?;
        let omega3 = self.omega_sum - omega;
        Ok(self.k_fixed - (omega * n2 + omega3 * n3) / SPEED_OF_LIGHT)
    }
}

pub fn delta_k_spectral(omega: Quantity, anchor: &ProcessSpec) -> Result<Quantity> {
    let w = omega.expect(Dim::FREQUENCY)?;
    let dk = SpectralMismatch::new(anchor)?.at(w)?;
    Ok(Quantity::new(dk, Dim::WAVENUMBER))
}

/// One degenerate phase-matching solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PmRoot {
    pub lambda1_m: f64,
    pub lambda23_m: f64,
    /// Mismatch re-evaluated at the root, rad/m.
    pub delta_k: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct PmSolver {
    /// Search interval for λ1 in metres.
    pub bracket_m: (f64, f64),
    /// Number of uniform sub-intervals scanned for sign changes.
    pub scan_intervals: usize,
    /// Acceptance threshold on |Δk| in rad/m.
    pub tolerance: f64,
}

impl Default for PmSolver {
    fn default() -> Self {
        Self {
            bracket_m: (1.2e-6, 2.2e-6),
            scan_intervals: 400,
            tolerance: 1.0,
        }
    }
}

impl PmSolver {
    /// All degenerate roots (λ1, λ23) at the given pump wavelength and angle,
    /// sorted by λ1.
    pub fn solve(
        &self,
        crystal: &Arc<CrystalDispersion>,
        lambda_p: Quantity,
        theta: Quantity,
    ) -> Result<Vec<PmRoot>> {
        let lp = lambda_p.expect(Dim::LENGTH)?;
        let theta = theta.expect(Dim::NONE)?;
        check_theta(theta)?;
        crystal.index_at(Axis::Y, lp)?;

        let residual = |l1: f64| -> Result<f64> {
            let l23 = degenerate_lambda23(lp, l1)?;
            let spec = ProcessSpec::from_si(crystal.clone(), [lp, l1, l23, l23], theta)?;
            delta_k_raw(&spec)
        };

        let (lo, hi) = self.bracket_m;
        let n = self.scan_intervals.max(1);
        let grid: Vec<f64> = (0..=n)
            .map(|i| lo + (hi - lo) * i as f64 / n as f64)
            .collect();
        let values = grid
            .iter()
            .map(|&l| residual(l))
            .collect::<Result<Vec<_>>>()?;

        let mut roots = Vec::new();
        for i in 0..n {
            let (fa, fb) = (values[i], values[i + 1]);
            if fa == 0.0 {
                roots.push(grid[i]);
                continue;
            }
            if fa * fb < 0.0 {
                roots.push(refine_root(&residual, grid[i], grid[i + 1], fa, fb)?);
            }
        }
        if values[n] == 0.0 {
            roots.push(grid[n]);
        }
        if roots.is_empty() {
            return Err(TpgError::NoRoot {
                lo_nm: lo * 1e9,
                hi_nm: hi * 1e9,
            });
        }

        roots
            .into_iter()
            .map(|l1| {
                let l23 = degenerate_lambda23(lp, l1)?;
                let dk = residual(l1)?;
                if dk.abs() > self.tolerance {
                    return Err(TpgError::NonConvergence { iterations: 200 });
                }
                Ok(PmRoot {
                    lambda1_m: l1,
                    lambda23_m: l23,
                    delta_k: dk,
                })
            })
            .collect()
    }
}

/// Illinois-modified regula falsi on a sign-changing bracket.
fn refine_root(
    f: &impl Fn(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
) -> Result<f64> {
    let mut side = 0i8;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = f(c)?;
        if fc.abs() < 1e-6 || (b - a).abs() < 1e-18 {
            return Ok(c);
        }
        if fc * fb > 0.0 {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Err(TpgError::NonConvergence { iterations: 200 })
}

pub fn solve_degenerate_pm(
    crystal: &Arc<CrystalDispersion>,
    lambda_p: Quantity,
    theta: Quantity,
) -> Result<Vec<PmRoot>> {
    PmSolver::default().solve(crystal, lambda_p, theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PmCurveRow {
    pub theta_deg: f64,
    pub lambda1_nm: f64,
    pub lambda23_nm: f64,
    pub delta_k_residual_rad_per_m: f64,
}

/// Tuning curve over a list of angles; one row per root.
pub fn pm_curve(
    solver: &PmSolver,
    crystal: &Arc<CrystalDispersion>,
    lambda_p: Quantity,
    thetas_deg: &[f64],
) -> Result<Vec<PmCurveRow>> {
    let mut rows = Vec::with_capacity(thetas_deg.len());
    for &t in thetas_deg {
        for r in solver.solve(crystal, lambda_p, Quantity::degrees(t))? {
            rows.push(PmCurveRow {
                theta_deg: t,
                lambda1_nm: r.lambda1_m * 1e9,
                lambda23_nm: r.lambda23_m * 1e9,
                delta_k_residual_rad_per_m: r.delta_k,
            });
        }
    }
    Ok(rows)
}

/// Least-squares line Δk(ω) ≈ a + b·ω.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MismatchLinearization {
    /// Intercept, rad/m.
    pub a: f64,
    /// Slope, m⁻¹ per rad/s.
    pub b: f64,
    /// Fit window in rad/s.
    pub window: [f64; 2],
    pub rms_residual: f64,
    /// Largest |Δk| sampled in the window.
    pub max_abs_delta_k: f64,
}

impl MismatchLinearization {
    /// Ordinary least squares over paired samples.
    pub fn fit(omegas: &[f64], delta_ks: &[f64]) -> Result<Self> {
        if omegas.len() != delta_ks.len() || omegas.len() < 2 {
            return Err(TpgError::InvalidInput(
                "linear fit needs at least two paired samples".into(),
            ));
        }
        let n = omegas.len() as f64;
        let mx = omegas.iter().sum::<f64>() / n;
        let my = delta_ks.iter().sum::<f64>() / n;
        let (mut sxx, mut sxy) = (0.0, 0.0);
        for (x, y) in omegas.iter().zip(delta_ks) {
            sxx += (x - mx) * (x - mx);
            sxy += (x - mx) * (y - my);
        }
        if sxx == 0.0 {
            return Err(TpgError::InvalidInput("degenerate abscissae".into()));
        }
        let b = sxy / sxx;
        let a = my - b * mx;
        let ss: f64 = omegas
            .iter()
            .zip(delta_ks)
            .map(|(x, y)| {
                let r = y - (my + b * (x - mx));
                r * r
            })
            .sum();
        let lo = omegas.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = omegas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            a,
            b,
            window: [lo, hi],
            rms_residual: (ss / n).sqrt(),
            max_abs_delta_k: delta_ks.iter().fold(0.0, |m, v| m.max(v.abs())),
        })
    }

    pub fn eval(&self, omega: f64) -> f64 {
        self.a + self.b * omega
    }
}

/// Linear fit of the spectral mismatch around the anchor's mode-2 frequency.
pub fn linearize(
    anchor: &ProcessSpec,
    half_width: Option<Quantity>,
    n_points: usize,
) -> Result<MismatchLinearization> {
    let hw = match half_width {
        Some(q) => q.expect(Dim::FREQUENCY)?,
        None => DEFAULT_LINEARIZATION_HALF_WIDTH,
    };
    let n = n_points.max(MIN_LINEARIZATION_POINTS);
    let sm = SpectralMismatch::new(anchor)?;
    let center = sm.omega_center();
    let omegas: Vec<f64> = (0..n)
        .map(|i| center - hw + 2.0 * hw * i as f64 / (n - 1) as f64)
        .collect();
    let dks = omegas
        .iter()
        .map(|&w| sm.at(w))
        .collect::<Result<Vec<_>>>()?;
    MismatchLinearization::fit(&omegas, &dks)
}
