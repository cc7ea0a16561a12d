#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::coupling::{f3_si, gain_and_c3};
use super::flux::density_si;
use super::{CouplingInputs, Regime};
use crate::error::{Result, TpgError};
use crate::phase_matching::{linearize, wavelength_from_omega, MIN_LINEARIZATION_POINTS};

/// Gauss–Kronrod 21-point abscissae on [0, 1] (symmetric about 0).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_632_463_536,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
/// Gauss 10-point weights for XGK[1], XGK[3], …, XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegrationSettings {
    /// Sinc lobes kept on each side of the mismatch zero.
    pub n_lobes: usize,
    /// Initial GK21 panels per lobe (21 nodes each).
    pub panels_per_lobe: usize,
    /// Relative tolerance of each lobe integral.
    pub rel_tol: f64,
    /// Maximum bisection depth of a panel.
    pub max_depth: u32,
}

impl Default for IntegrationSettings {
    fn default() -> Self {
        Self {
            n_lobes: 50,
            panels_per_lobe: 1,
            rel_tol: 1e-10,
            max_depth: 24,
        }
    }
}

impl IntegrationSettings {
    pub fn with_lobes(mut self, n: usize) -> Self {
        self.n_lobes = n;
        self
    }

    pub fn points_per_lobe(&self) -> usize {
        21 * self.panels_per_lobe
    }
}

/// Grid used to bracket the lobe boundaries.
const SCAN_POINTS: usize = 4096;

/// Frequencies at which δ·Δk(ω)·L = 2πk for k = −N..=N, in ascending ω.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LobeWindow {
    pub boundaries: Vec<f64>,
    /// ω where the effective mismatch vanishes.
    pub center: f64,
    pub n_lobes: usize,
}

impl LobeWindow {
    pub fn lo(&self) -> f64 {
        self.boundaries[0]
    }

    pub fn hi(&self) -> f64 {
        *self.boundaries.last().unwrap()
    }
}

fn phase(inputs: &CouplingInputs, omega: f64) -> Result<f64> {
    Ok(inputs.delta_k_eff(omega)? * inputs.length())
}

/// Regula falsi (Illinois) for φ(ω) = level on a bracket.
fn solve_level(
    inputs: &CouplingInputs,
    level: f64,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
) -> Result<f64> {
    let mut side = 0i8;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        if (b - a).abs() <= 4.0 * f64::EPSILON * c.abs() {
            return Ok(c);
        }
        let fc = phase(inputs, c)? - level;
        if fc == 0.0 {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
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
    Ok(0.5 * (a + b))
}

/// Locates the 2N+1 sinc-lobe boundaries around the mismatch zero nearest
/// the degenerate frequency.
pub fn lobe_window(inputs: &CouplingInputs, n_lobes: usize) -> Result<LobeWindow> {
    if n_lobes == 0 {
        return Err(TpgError::InvalidInput("at least one lobe required".into()));
    }
    let (lo, hi) = inputs.mismatch().valid_range();
    let margin = 1e-9 * (hi - lo);
    let (lo, hi) = (lo + margin, hi - margin);
    let m = SCAN_POINTS;
    let grid: Vec<f64> = (0..m)
        .map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64)
        .collect();
    let phi = grid
        .iter()
        .map(|&w| phase(inputs, w))
        .collect::<Result<Vec<_>>>()?;
    let collapse = |detail: &str| TpgError::WindowCollapse {
        lobes: n_lobes,
        detail: detail.to_string(),
    };

    let w0 = inputs.omega_degenerate();
    let zero_cell = (0..m - 1)
        .filter(|&i| phi[i] == 0.0 || phi[i].signum() != phi[i + 1].signum())
        .min_by(|&i, &j| {
            let di = (0.5 * (grid[i] + grid[i + 1]) - w0).abs();
            let dj = (0.5 * (grid[j] + grid[j + 1]) - w0).abs();
            di.total_cmp(&dj)
        })
        .ok_or_else(|| collapse("effective mismatch has no zero in the dispersion range"))?;
    let center = solve_level(
        inputs,
        0.0,
        grid[zero_cell],
        grid[zero_cell + 1],
        phi[zero_cell],
        phi[zero_cell + 1],
    )?;
    let slope_sign = (phi[zero_cell + 1] - phi[zero_cell]).signum();

    // Right side: φ runs monotonically from 0 to slope_sign·2πN.
    let mut right = Vec::with_capacity(n_lobes);
    let mut k = 1;
    let mut i = zero_cell + 1;
    while k <= n_lobes {
        if i >= m {
            return Err(collapse("upper edge reached"));
        }
        let target = slope_sign * 2.0 * PI * k as f64;
        let prev = if i == zero_cell + 1 { 0.0 } else { phi[i - 1] };
        let a = if i == zero_cell + 1 {
            center
        } else {
            grid[i - 1]
        };
        if (phi[i] - prev) * slope_sign < 0.0 {
            return Err(collapse("effective mismatch not monotonic in window"));
        }
        if (phi[i] - target) * slope_sign >= 0.0 {
            right.push(solve_level(
                inputs,
                target,
                a,
                grid[i],
                prev - target,
                phi[i] - target,
            )?);
            k += 1;
        } else {
            i += 1;
        }
    }
    let mut left = Vec::with_capacity(n_lobes);
    let mut k = 1;
    let mut i = zero_cell as isize;
    while k <= n_lobes {
        if i < 0 {
            return Err(collapse("lower edge reached"));
        }
        let iu = i as usize;
        let target = -slope_sign * 2.0 * PI * k as f64;
        let (prev, b) = if iu == zero_cell {
            (0.0, center)
        } else {
            (phi[iu + 1], grid[iu + 1])
        };
        if (prev - phi[iu]) * slope_sign < 0.0 {
            return Err(collapse("effective mismatch not monotonic in window"));
        }
        if (phi[iu] - target) * slope_sign <= 0.0 {
            left.push(solve_level(
                inputs,
                target,
                grid[iu],
                b,
                phi[iu] - target,
                prev - target,
            )?);
            k += 1;
        } else {
            i -= 1;
        }
    }
    let mut boundaries: Vec<f64> = left.into_iter().rev().collect();
    boundaries.push(center);
    boundaries.extend(right);
    Ok(LobeWindow {
        boundaries,
        center,
        n_lobes,
    })
}

struct Panel {
    integral: f64,
    error: f64,
}

fn gk21<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64) -> Result<Panel> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kron = WGK[10] * fc;
    let mut gauss = 0.0;
    for j in 0..10 {
        let x = h * XGK[j];
        let s = f(c - x)? + f(c + x)?;
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Ok(Panel {
        integral: kron * h,
        error: ((kron - gauss) * h).abs(),
    })
}

fn adaptive<F: FnMut(f64) -> Result<f64>>(
    f: &mut F,
    a: f64,
    b: f64,
    tol: f64,
    depth: u32,
    evals: &mut usize,
) -> Result<f64> {
    let p = gk21(f, a, b)?;
    *evals += 21;
    if p.error <= tol || depth == 0 {
        return Ok(p.integral);
    }
    let m = 0.5 * (a + b);
    Ok(adaptive(f, a, m, 0.5 * tol, depth - 1, evals)?
        + adaptive(f, m, b, 0.5 * tol, depth - 1, evals)?)
}

/// Photons per pulse in mode 2 with quadrature metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluxIntegral {
    pub photons: f64,
    /// Tail beyond the window estimated from the outermost two lobes.
    pub truncation_error: f64,
    pub window: LobeWindow,
    pub points_per_lobe: usize,
    pub evaluations: usize,
}

/// Integral of each lobe in ascending ω; the central pair fixes the
/// absolute tolerance applied to all of them.
fn lobe_integrals(
    inputs: &CouplingInputs,
    window: &LobeWindow,
    settings: &IntegrationSettings,
) -> Result<(Vec<f64>, usize)> {
    let mut f = |w: f64| density_si(inputs, w).map(|d| d.0);
    let b = &window.boundaries;
    let mid = window.n_lobes;
    let scale = gk21(&mut f, b[mid - 1], b[mid])?.integral.abs()
        + gk21(&mut f, b[mid], b[mid + 1])?.integral.abs();
    let mut evals = 42;
    let panels = settings.panels_per_lobe.max(1);
    let tol = settings.rel_tol * scale.max(f64::MIN_POSITIVE) / panels as f64;
    let mut out = Vec::with_capacity(b.len() - 1);
    for pair in b.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let mut s = 0.0;
        for p in 0..panels {
            let pa = lo + (hi - lo) * p as f64 / panels as f64;
            let pb = lo + (hi - lo) * (p + 1) as f64 / panels as f64;
            s += adaptive(&mut f, pa, pb, tol, settings.max_depth, &mut evals)?;
        }
        out.push(s);
    }
    Ok((out, evals))
}

/// n₂(L) = ∫ n₂(ω, L) dω over ±N sinc lobes of the effective mismatch.
pub fn integrate_flux(
    inputs: &CouplingInputs,
    settings: &IntegrationSettings,
) -> Result<FluxIntegral> {
    let window = lobe_window(inputs, settings.n_lobes)?;
    let (lobes, evaluations) = lobe_integrals(inputs, &window, settings)?;
    let photons: f64 = lobes.iter().sum();
    let n = lobes.len();
    let nl = settings.n_lobes as f64;
    let truncation_error = if n >= 4 {
        0.5 * nl * (lobes[0] + lobes[1] + lobes[n - 1] + lobes[n - 2])
    } else {
        photons
    };
    Ok(FluxIntegral {
        photons,
        truncation_error,
        window,
        points_per_lobe: settings.points_per_lobe(),
        evaluations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxSample {
    pub omega: f64,
    pub lambda_nm: f64,
    pub density: f64,
    pub regime: Regime,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluxSpectrum {
    pub samples: Vec<FluxSample>,
    pub window: LobeWindow,
    pub n_lobes: usize,
    pub points_per_lobe: usize,
    /// Regime band used for the sample labels, m⁻².
    pub band: f64,
}

/// Default classification band: 1e−6 of the largest |C⁽³⁾| on the samples.
fn default_band(c3: &[f64]) -> f64 {
    1e-6 * c3.iter().fold(0.0f64, |m, c| m.max(c.abs()))
}

/// Uniformly sampled mode-2 density across the lobe window.
pub fn flux_spectrum(
    inputs: &CouplingInputs,
    settings: &IntegrationSettings,
    n_samples: usize,
) -> Result<FluxSpectrum> {
    let window = lobe_window(inputs, settings.n_lobes)?;
    let n = n_samples.max(2);
    let (lo, hi) = (window.lo(), window.hi());
    let mut raw = Vec::with_capacity(n);
    for i in 0..n {
        let w = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let (d, c3, _) = density_si(inputs, w)?;
        raw.push((w, d, c3));
    }
    let band = default_band(&raw.iter().map(|r| r.2).collect::<Vec<_>>());
    let samples = raw
        .into_iter()
        .map(|(w, d, c3)| FluxSample {
            omega: w,
            lambda_nm: wavelength_from_omega(w) * 1e9,
            density: d,
            regime: Regime::classify(c3, band),
        })
        .collect();
    Ok(FluxSpectrum {
        samples,
        window,
        n_lobes: settings.n_lobes,
        points_per_lobe: settings.points_per_lobe(),
        band,
    })
}

/// Samples used for the weak-coupling precondition: the lobe window, or the
/// whole dispersion range when the window does not fit in it.
fn regime_check(inputs: &CouplingInputs, n_lobes: usize) -> Result<()> {
    let (lo, hi) = match lobe_window(inputs, n_lobes) {
        Ok(w) => (w.lo(), w.hi()),
        Err(TpgError::WindowCollapse { .. }) => {
            let (lo, hi) = inputs.mismatch().valid_range();
            let margin = 1e-9 * (hi - lo);
            (lo + margin, hi - margin)
        }
        Err(e) => return Err(e),
    };
    let n = 2001;
    let mut pts = Vec::with_capacity(n);
    for i in 0..n {
        let w = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        pts.push((w, gain_and_c3(inputs, w)?.1));
    }
    let band = default_band(&pts.iter().map(|p| p.1).collect::<Vec<_>>());
    for (w, c3) in pts {
        let regime = Regime::classify(c3, band);
        if regime == Regime::Strong {
            return Err(TpgError::RegimeError { regime, omega: w });
        }
    }
    Ok(())
}

fn slope_b(inputs: &CouplingInputs) -> Result<f64> {
    let b = match inputs.linearization() {
        Some(l) => l.b,
        None => linearize(inputs.anchor(), None, MIN_LINEARIZATION_POINTS)?.b,
    };
    if b == 0.0 {
        return Err(TpgError::InvalidInput("zero mismatch slope".into()));
    }
    Ok(b)
}

/// Closed-form weak-coupling yield 4π²·f⁽³⁾(ω_deg)·I_p·I_1·χ²·L/(δ·|b|).
pub fn analytic_flux(inputs: &CouplingInputs) -> Result<f64> {
    regime_check(inputs, IntegrationSettings::default().n_lobes)?;
    let f3 = f3_si(inputs, inputs.omega_degenerate())?;
    let b = slope_b(inputs)?;
    Ok(4.0
        * PI
        * PI
        * f3
        * inputs.pump_intensity()
        * inputs.stim_intensity()
        * inputs.chi3()
        * inputs.chi3()
        * inputs.length()
        / (inputs.delta() * b.abs()))
}

/// The same closed form with f⁽³⁾ squared; its SI value carries the wrong
/// dimension and is kept only to compare against the quadrature.
pub fn analytic_flux_f3_squared(inputs: &CouplingInputs) -> Result<f64> {
    let f3 = f3_si(inputs, inputs.omega_degenerate())?;
    let b = slope_b(inputs)?;
    Ok(4.0
        * PI
        * PI
        * f3
        * f3
        * inputs.pump_intensity()
        * inputs.stim_intensity()
        * inputs.chi3()
        * inputs.chi3()
        * inputs.length()
        / (inputs.delta() * b.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeRow {
    /// I_p·I_1 in W²·m⁻⁴.
    pub product: f64,
    /// C⁽³⁾ at the degenerate frequency, m⁻².
    pub c3: f64,
    pub regime: Regime,
}

/// Regime at the degenerate frequency as the intensity product varies with
/// the pump held fixed; the band is 1e−9 of Δk_eff²/4 there.
pub fn regime_map(inputs: &CouplingInputs, products: &[f64]) -> Result<Vec<RegimeRow>> {
    let ip = inputs.pump_intensity();
    if ip <= 0.0 {
        return Err(TpgError::InvalidInput(
            "regime map needs a pump intensity".into(),
        ));
    }
    let w = inputs.omega_degenerate();
    let dk = inputs.delta_k_eff(w)?;
    let band = 1e-9 * 0.25 * dk * dk;
    products
        .iter()
        .map(|&p| {
            let at = inputs.clone().with_stim_intensity(p / ip)?;
            let c3 = gain_and_c3(&at, w)?.1;
            Ok(RegimeRow {
                product: p,
                c3,
                regime: Regime::classify(c3, band),
            })
        })
        .collect()
}
