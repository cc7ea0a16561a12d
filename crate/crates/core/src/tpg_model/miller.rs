use crate::dispersion::{Axis, CrystalDispersion};
use crate::error::Result;
use crate::units::{Dim, Quantity};

/// Field axes of the χ⁽³⁾_yzzy element in coefficient order.
pub const YZZY_AXES: [Axis; 4] = [Axis::Y, Axis::Z, Axis::Z, Axis::Y];

/// Transports χ⁽³⁾ between two four-wave processes with Miller's rule.
///
/// Wavelengths are given in coefficient order, each paired with the axis of
/// [`YZZY_AXES`] at the same position.
pub fn miller_chi3(
    chi_ref: Quantity,
    reference: [Quantity; 4],
    target: [Quantity; 4],
    crystal: &CrystalDispersion,
) -> Result<Quantity> {
    let chi = chi_ref.expect(Dim::CHI3)?;
    let mut ratio = 1.0;
    for i in 0..4 {
        let lr = reference[i].expect(Dim::LENGTH)?;
        let lt = target[i].expect(Dim::LENGTH)?;
        let nr = crystal.index_at(YZZY_AXES[i], lr)?;
        let nt = crystal.index_at(YZZY_AXES[i], lt)?;
        ratio *= (nt * nt - 1.0) / (nr * nr - 1.0);
    }
    Ok(Quantity::chi3(chi * ratio))
}

/// Fraction of the yield surviving pump polarization α (from y) and
/// stimulation polarization β (from z), angles in degrees.
pub fn polarization_yield(alpha_deg: f64, beta_deg: f64) -> f64 {
    let ca = alpha_deg.to_radians().cos();
    let cb = beta_deg.to_radians().cos();
    ca * ca * cb * cb
}
