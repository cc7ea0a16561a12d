//! Dimension-checked SI quantities.
//!
//! A [`Quantity`] carries an `f64` value in coherent SI units together with
//! the exponents of metre, second, kilogram and ampere. Multiplication and
//! division combine exponents; addition and subtraction require equal
//! dimensions and fail otherwise.

use std::fmt;
use std::ops::{Div, Mul, Neg};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Speed of light in vacuum (m/s), exact.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Planck constant (J·s), exact.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant (J·s).
pub const HBAR: f64 = PLANCK / (2.0 * std::f64::consts::PI);
/// Vacuum permittivity (F/m), CODATA 2018.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UnitError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Mismatch { expected: Dim, found: Dim },
    #[error("cannot take square root of {0}: odd exponent")]
    OddRoot(Dim),
}

/// Exponents of (m, s, kg, A).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dim {
    pub m: i8,
    pub s: i8,
    pub kg: i8,
    pub a: i8,
}

impl Dim {
    pub const fn new(m: i8, s: i8, kg: i8, a: i8) -> Self {
        Self { m, s, kg, a }
    }

    pub const NONE: Dim = Dim::new(0, 0, 0, 0);
    pub const LENGTH: Dim = Dim::new(1, 0, 0, 0);
    pub const TIME: Dim = Dim::new(0, 1, 0, 0);
    pub const MASS: Dim = Dim::new(0, 0, 1, 0);
    pub const CURRENT: Dim = Dim::new(0, 0, 0, 1);
    pub const FREQUENCY: Dim = Dim::new(0, -1, 0, 0);
    pub const WAVENUMBER: Dim = Dim::new(-1, 0, 0, 0);
    pub const PER_AREA: Dim = Dim::new(-2, 0, 0, 0);
    pub const VELOCITY: Dim = Dim::new(1, -1, 0, 0);
    pub const ENERGY: Dim = Dim::new(2, -2, 1, 0);
    pub const POWER: Dim = Dim::new(2, -3, 1, 0);
    pub const INTENSITY: Dim = Dim::new(0, -3, 1, 0);
    pub const VOLTAGE: Dim = Dim::new(2, -3, 1, -1);
    pub const PERMITTIVITY: Dim = Dim::new(-3, 4, -1, 2);
    pub const ACTION: Dim = Dim::new(2, -1, 1, 0);
    /// m²·V⁻², the unit of a third-order susceptibility.
    pub const CHI3: Dim = Dim::new(-2, 6, -2, 2);
    /// Photon flux density, m⁻²·s⁻¹.
    pub const PHOTON_FLUX: Dim = Dim::new(-2, -1, 0, 0);

    pub const fn mul(self, o: Dim) -> Dim {
        Dim::new(self.m + o.m, self.s + o.s, self.kg + o.kg, self.a + o.a)
    }

    pub const fn div(self, o: Dim) -> Dim {
        Dim::new(self.m - o.m, self.s - o.s, self.kg - o.kg, self.a - o.a)
    }

    pub const fn powi(self, n: i8) -> Dim {
        Dim::new(self.m * n, self.s * n, self.kg * n, self.a * n)
    }

    pub fn sqrt(self) -> Result<Dim, UnitError> {
        if self.m % 2 != 0 || self.s % 2 != 0 || self.kg % 2 != 0 || self.a % 2 != 0 {
            return Err(UnitError::OddRoot(self));
        }
        Ok(Dim::new(self.m / 2, self.s / 2, self.kg / 2, self.a / 2))
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Dim::NONE {
            return write!(f, "1");
        }
        let mut first = true;
        for (sym, e) in [("m", self.m), ("s", self.s), ("kg", self.kg), ("A", self.a)] {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "·")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{sym}")?;
            } else {
                write!(f, "{sym}^{e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub dim: Dim,
}

impl Quantity {
    pub const fn new(value: f64, dim: Dim) -> Self {
        Self { value, dim }
    }

    pub const fn dimensionless(value: f64) -> Self {
        Self::new(value, Dim::NONE)
    }

    pub const fn meters(value: f64) -> Self {
        Self::new(value, Dim::LENGTH)
    }

    pub fn nanometers(value: f64) -> Self {
        Self::meters(value * 1e-9)
    }

    pub fn micrometers(value: f64) -> Self {
        Self::meters(value * 1e-6)
    }

    pub const fn seconds(value: f64) -> Self {
        Self::new(value, Dim::TIME)
    }

    pub const fn joules(value: f64) -> Self {
        Self::new(value, Dim::ENERGY)
    }

    pub const fn rad_per_second(value: f64) -> Self {
        Self::new(value, Dim::FREQUENCY)
    }

    pub const fn watts_per_m2(value: f64) -> Self {
        Self::new(value, Dim::INTENSITY)
    }

    pub const fn chi3(value: f64) -> Self {
        Self::new(value, Dim::CHI3)
    }

    pub fn degrees(value: f64) -> Self {
        Self::dimensionless(value.to_radians())
    }

    pub const fn radians(value: f64) -> Self {
        Self::dimensionless(value)
    }

    pub const fn speed_of_light() -> Self {
        Self::new(SPEED_OF_LIGHT, Dim::VELOCITY)
    }

    pub const fn epsilon_0() -> Self {
        Self::new(EPSILON_0, Dim::PERMITTIVITY)
    }

    pub const fn planck() -> Self {
        Self::new(PLANCK, Dim::ACTION)
    }

    pub const fn hbar() -> Self {
        Self::new(HBAR, Dim::ACTION)
    }

    /// Returns the raw SI value if the dimension matches `expected`.
    pub fn expect(self, expected: Dim) -> Result<f64, UnitError> {
        if self.dim == expected {
            Ok(self.value)
        } else {
            Err(UnitError::Mismatch {
                expected,
                found: self.dim,
            })
        }
    }

    pub fn try_add(self, rhs: Quantity) -> Result<Quantity, UnitError> {
        let v = rhs.expect(self.dim)?;
        Ok(Quantity::new(self.value + v, self.dim))
    }

    pub fn try_sub(self, rhs: Quantity) -> Result<Quantity, UnitError> {
        let v = rhs.expect(self.dim)?;
        Ok(Quantity::new(self.value - v, self.dim))
    }

    pub fn powi(self, n: i8) -> Quantity {
        Quantity::new(self.value.powi(n as i32), self.dim.powi(n))
    }

    pub fn sqrt(self) -> Result<Quantity, UnitError> {
        Ok(Quantity::new(self.value.sqrt(), self.dim.sqrt()?))
    }

    pub fn abs(self) -> Quantity {
        Quantity::new(self.value.abs(), self.dim)
    }
}

impl Mul for Quantity {
    type Output = Quantity;
    fn mul(self, rhs: Quantity) -> Quantity {
        Quantity::new(self.value * rhs.value, self.dim.mul(rhs.dim))
    }
}

impl Mul<f64> for Quantity {
    type Output = Quantity;
    fn mul(self, rhs: f64) -> Quantity {
        Quantity::new(self.value * rhs, self.dim)
    }
}

impl Mul<Quantity> for f64 {
    type Output = Quantity;
    fn mul(self, rhs: Quantity) -> Quantity {
        Quantity::new(self * rhs.value, rhs.dim)
    }
}

impl Div for Quantity {
    type Output = Quantity;
    fn div(self, rhs: Quantity) -> Quantity {
        Quantity::new(self.value / rhs.value, self.dim.div(rhs.dim))
    }
}

impl Div<f64> for Quantity {
    type Output = Quantity;
    fn div(self, rhs: f64) -> Quantity {
        Quantity::new(self.value / rhs, self.dim)
    }
}

impl Neg for Quantity {
    type Output = Quantity;
    fn neg(self) -> Quantity {
        Quantity::new(-self.value, self.dim)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} {}", self.value, self.dim)
    }
}
