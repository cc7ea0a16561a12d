//! Principal and eigen refractive indices of a biaxial crystal.
//!
//! Each principal axis carries a generalized Sellmeier form
//!
//! ```text
//! n²(λ) = c0 + Σ_k p_k / (λ² − q_k) + r·λ²      (λ in µm)
//! ```
//!
//! Data files store wavelengths in micrometres; the public API works in SI
//! metres. Evaluation outside the validity window is an error.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Result, TpgError};
use crate::units::{Dim, Quantity};

/// Shipped KTP dispersion data (room temperature).
/// Relative rounding slack on the window edges (SI to µm conversion).
const WINDOW_SLACK: f64 = 1e-12;

pub const KTP_JSON: &str = include_str!("../data/ktp.json");

/// Number of wavelengths sampled when validating the ordering invariant.
const ORDERING_SAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

impl std::str::FromStr for Axis {
    type Err = TpgError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            other => Err(TpgError::InvalidInput(format!("unknown axis '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pole {
    pub p: f64,
    pub q: f64,
}

/// Sellmeier coefficients for one principal axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SellmeierAxis {
    pub c0: f64,
    #[serde(default)]
    pub poles: Vec<Pole>,
    #[serde(default)]
    pub r: f64,
}

impl SellmeierAxis {
    /// n² at a wavelength given in micrometres.
    pub fn n_squared_um(&self, lambda_um: f64) -> f64 {
        let l2 = lambda_um * lambda_um;
        let poles: f64 = self.poles.iter().map(|p| p.p / (l2 - p.q)).sum();
        self.c0 + poles + self.r * l2
    }

    fn check_finite(&self, axis: Axis) -> Result<()> {
        let finite = self.c0.is_finite()
            && self.r.is_finite()
            && self
                .poles
                .iter()
                .all(|p| p.p.is_finite() && p.q.is_finite());
        if finite {
            Ok(())
        } else {
            Err(TpgError::MalformedCoefficient(format!(
                "non-finite coefficient on {axis} axis"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct AxesFile {
    x: SellmeierAxis,
    y: SellmeierAxis,
    z: SellmeierAxis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CrystalFile {
    name: String,
    axes: AxesFile,
    window_um: [f64; 2],
    provenance: String,
}

/// Principal-axis dispersion of a named crystal.
#[derive(Debug, Clone, PartialEq)]
pub struct CrystalDispersion {
    name: String,
    x: SellmeierAxis,
    y: SellmeierAxis,
    z: SellmeierAxis,
    window_um: [f64; 2],
    provenance: String,
}

/// The two eigenmode indices for propagation in the xz-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenIndices {
    /// Polarization along y (ordinary for the xz-plane).
    pub y_mode: f64,
    /// Polarization in the xz-plane, between n_x (θ = 0) and n_z (θ = 90°).
    pub inplane_mode: f64,
}

impl CrystalDispersion {
    /// Parses and validates a crystal data document.
    pub fn from_json_str(document: &str) -> Result<Self> {
        let root: Value = serde_json::from_str(document)?;
        let obj = root
            .as_object()
            .ok_or_else(|| TpgError::Parse("crystal document must be an object".into()))?;

        let name = obj
            .get("name")
            .and_then(Value::as_str)
            .ok_or_else(|| TpgError::Parse("missing 'name'".into()))?
            .to_string();
        let provenance = obj
            .get("provenance")
            .and_then(Value::as_str)
            .filter(|s| !s.trim().is_empty())
            .ok_or_else(|| TpgError::Parse("missing or empty 'provenance'".into()))?
            .to_string();
        let window: [f64; 2] = serde_json::from_value(
            obj.get("window_um")
                .cloned()
                .ok_or_else(|| TpgError::Parse("missing 'window_um'".into()))?,
        )?;
        let axes = obj
            .get("axes")
            .and_then(Value::as_object)
            .ok_or_else(|| TpgError::Parse("missing 'axes' object".into()))?;

        let mut parsed = Vec::with_capacity(3);
        for axis in Axis::ALL {
            let v = axes
                .get(&axis.to_string())
                .ok_or(TpgError::MissingAxis(axis))?;
            let coeffs: SellmeierAxis = serde_json::from_value(v.clone())
                .map_err(|e| TpgError::MalformedCoefficient(format!("{axis} axis: {e}")))?;
            coeffs.check_finite(axis)?;
            parsed.push(coeffs);
        }
        let z = parsed.pop().unwrap();
        let y = parsed.pop().unwrap();
        let x = parsed.pop().unwrap();

        Self::new(name, x, y, z, window, provenance)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| TpgError::Parse(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_json_str(&text)
    }

    /// The shipped KTP data set.
    pub fn ktp() -> Self {
        Self::from_json_str(KTP_JSON).expect("shipped KTP data is valid")
    }

    pub fn new(
        name: String,
        x: SellmeierAxis,
        y: SellmeierAxis,
        z: SellmeierAxis,
        window_um: [f64; 2],
        provenance: String,
    ) -> Result<Self> {
        let [lo, hi] = window_um;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
            return Err(TpgError::EmptyWindow {
                min_um: lo,
                max_um: hi,
            });
        }
        let crystal = Self {
            name,
            x,
            y,
            z,
            window_um,
            provenance,
        };
        crystal.validate()?;
        Ok(crystal)
    }

    fn validate(&self) -> Result<()> {
        let [lo, hi] = self.window_um;
        for i in 0..ORDERING_SAMPLES {
            let l = lo + (hi - lo) * i as f64 / (ORDERING_SAMPLES - 1) as f64;
            let [nx2, ny2, nz2] = [&self.x, &self.y, &self.z].map(|a| a.n_squared_um(l));
            if !(nx2.is_finite() && ny2.is_finite() && nz2.is_finite())
                || nx2 <= 1.0
                || ny2 <= 1.0
                || nz2 <= 1.0
            {
                return Err(TpgError::MalformedCoefficient(format!(
                    "n² must exceed 1 across the window (fails at {l:.4} µm)"
                )));
            }
            if !(nx2 < ny2 && ny2 < nz2) {
                return Err(TpgError::OrderingViolation { wavelength_um: l });
            }
        }
        Ok(())
    }

    pub fn to_json_string(&self) -> String {
        let file = CrystalFile {
            name: self.name.clone(),
            axes: AxesFile {
                x: self.x.clone(),
                y: self.y.clone(),
                z: self.z.clone(),
            },
            window_um: self.window_um,
            provenance: self.provenance.clone(),
        };
        serde_json::to_string_pretty(&file).expect("crystal serializes")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn window_um(&self) -> [f64; 2] {
        self.window_um
    }

    /// Validity window in metres.
    pub fn window_m(&self) -> (f64, f64) {
        (self.window_um[0] * 1e-6, self.window_um[1] * 1e-6)
    }

    pub fn coefficients(&self, axis: Axis) -> &SellmeierAxis {
        match axis {
            Axis::X => &self.x,
            Axis::Y => &self.y,
            Axis::Z => &self.z,
        }
    }

    pub fn contains(&self, wavelength_m: f64) -> bool {
        let l = wavelength_m * 1e6;
        l >= self.window_um[0] * (1.0 - WINDOW_SLACK)
            && l <= self.window_um[1] * (1.0 + WINDOW_SLACK)
    }

    fn check_window(&self, wavelength_m: f64) -> Result<f64> {
        let l = wavelength_m * 1e6;
        if self.contains(wavelength_m) {
            Ok(l)
        } else {
            Err(TpgError::OutOfWindow {
                wavelength_um: l,
                min_um: self.window_um[0],
                max_um: self.window_um[1],
            })
        }
    }

    /// Principal index from an SI wavelength in metres.
    pub fn index_at(&self, axis: Axis, wavelength_m: f64) -> Result<f64> {
        let l = self.check_window(wavelength_m)?;
        Ok(self.coefficients(axis).n_squared_um(l).sqrt())
    }

    pub fn principal_index(&self, axis: Axis, wavelength: Quantity) -> Result<f64> {
        self.index_at(axis, wavelength.expect(Dim::LENGTH)?)
    }

    /// In-plane eigenmode index at polar angle `theta_rad` from z in the xz-plane.
    pub fn inplane_index_at(&self, theta_rad: f64, wavelength_m: f64) -> Result<f64> {
        check_theta(theta_rad)?;
        let nx = self.index_at(Axis::X, wavelength_m)?;
        let nz = self.index_at(Axis::Z, wavelength_m)?;
        let (s, c) = theta_rad.sin_cos();
        Ok(1.0 / (c * c / (nx * nx) + s * s / (nz * nz)).sqrt())
    }

    pub fn eigen_indices(&self, theta: Quantity, wavelength: Quantity) -> Result<EigenIndices> {
        let theta = theta.expect(Dim::NONE)?;
        let lambda = wavelength.expect(Dim::LENGTH)?;
        Ok(EigenIndices {
            y_mode: self.index_at(Axis::Y, lambda)?,
            inplane_mode: self.inplane_index_at(theta, lambda)?,
        })
    }
}

pub(crate) fn check_theta(theta_rad: f64) -> Result<()> {
    // small slack so that 90f64.to_radians() round-trips
    if (0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&theta_rad) {
        Ok(())
    } else {
        Err(TpgError::InvalidInput(format!(
            "theta {:.4}° outside [0°, 90°]",
            theta_rad.to_degrees()
        )))
    }
}
