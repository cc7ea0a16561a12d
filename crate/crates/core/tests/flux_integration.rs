use std::sync::Arc;

use tpg_core::dispersion::CrystalDispersion;
use tpg_core::phase_matching::ProcessSpec;
use tpg_core::tpg_model::*;
use tpg_core::units::Quantity;

fn inputs(delta: f64) -> CouplingInputs {
    let anchor = ProcessSpec::degenerate(
        Arc::new(CrystalDispersion::ktp()),
        Quantity::nanometers(532.0),
        Quantity::nanometers(1491.0),
        Quantity::degrees(90.0),
    )
    .unwrap();
    CouplingInputs::from_si(anchor, 1.54e14, 3.72e13, 7.8e-22, delta, 0.01).unwrap()
}

#[test]
fn truncation_estimate_bounds_lobe_doubling() {
    let inp = inputs(1.0);
    let base = integrate_flux(&inp, &IntegrationSettings::default()).unwrap();
    assert!(base.truncation_error <= 0.01 * base.photons);
    // 100 lobes do not fit the dispersion range at δ = 1; use a wider δ·b scale
    let inp = inputs(0.4).with_length(0.05).unwrap();
    let a = integrate_flux(&inp, &IntegrationSettings::default()).unwrap();
    let b = integrate_flux(&inp, &IntegrationSettings::default().with_lobes(100)).unwrap();
    assert!(a.truncation_error <= 0.01 * a.photons);
    assert!((b.photons - a.photons).abs() < a.truncation_error);
}

#[test]
fn halving_quadrature_density_is_converged() {
    let inp = inputs(1.0);
    let fine = IntegrationSettings {
        panels_per_lobe: 2,
        ..Default::default()
    };
    let coarse = IntegrationSettings {
        panels_per_lobe: 1,
        rel_tol: 1e-6,
        ..Default::default()
    };
    let a = integrate_flux(&inp, &fine).unwrap();
    let b = integrate_flux(&inp, &coarse).unwrap();
    assert!(a.points_per_lobe >= 16 && b.points_per_lobe >= 16);
    assert!(((a.photons - b.photons) / a.photons).abs() < 1e-3);
}

#[test]
fn doubling_both_intensities_quadruples_weak_yield() {
    let inp = inputs(1.0);
    let s = IntegrationSettings::default();
    let a = integrate_flux(&inp, &s).unwrap().photons;
    let twice = inp
        .clone()
        .with_pump_intensity(2.0 * inp.pump_intensity())
        .unwrap()
        .with_stim_intensity(2.0 * inp.stim_intensity())
        .unwrap();
    let b = integrate_flux(&twice, &s).unwrap().photons;
    assert!((b / a / 4.0 - 1.0).abs() < 5e-3, "{}", b / a);
}

#[test]
fn mode2_and_mode3_integrals_agree() {
    let inp = inputs(1.0);
    let w = lobe_window(&inp, 50).unwrap();
    // trapezoid of n3 over the mirrored window equals the n2 integral
    let n = 200_001;
    let (lo, hi) = (w.lo(), w.hi());
    let h = (hi - lo) / (n - 1) as f64;
    let (mut s2, mut s3) = (0.0, 0.0);
    let sm = inp.mismatch();
    for i in 0..n {
        let x = lo + h * i as f64;
        let wt = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        s2 += wt
            * flux_density(Quantity::rad_per_second(x), &inp)
                .unwrap()
                .density;
        s3 += wt
            * flux_density_mode3(Quantity::rad_per_second(sm.mirror(x)), &inp)
                .unwrap()
                .density;
    }
    assert!(((s2 - s3) / s2).abs() < 1e-12);
    let adaptive = integrate_flux(&inp, &IntegrationSettings::default())
        .unwrap()
        .photons;
    assert!(((s2 * h - adaptive) / adaptive).abs() < 2e-3);
}

#[test]
fn weak_coupling_across_window_at_lab_intensities() {
    let inp = inputs(1.0);
    let spec = flux_spectrum(&inp, &IntegrationSettings::default(), 4001).unwrap();
    assert!(spec.samples.iter().all(|s| s.density >= 0.0));
    assert!(spec.samples.iter().all(|s| s.regime != Regime::Strong));
    let weak = spec
        .samples
        .iter()
        .filter(|s| s.regime == Regime::Weak)
        .count();
    assert!(weak > 3900);
}

#[test]
fn analytic_scales_linearly_with_stimulation() {
    let inp = inputs(1.0);
    let a = analytic_flux(&inp).unwrap();
    for k in [0.003, 0.1, 0.5] {
        let s = inp
            .clone()
            .with_stim_intensity(k * inp.stim_intensity())
            .unwrap();
        let b = analytic_flux(&s).unwrap();
        assert!((b / a / k - 1.0).abs() < 1e-12);
    }
}

#[test]
fn strong_coupling_blocks_closed_form() {
    let inp = inputs(1.0)
        .with_pump_intensity(1e17)
        .unwrap()
        .with_stim_intensity(1e17)
        .unwrap();
    assert!(matches!(
        analytic_flux(&inp),
        Err(tpg_core::TpgError::RegimeError {
            regime: Regime::Strong,
            ..
        })
    ));
}

#[test]
fn regime_flips_exactly_at_threshold() {
    let inp = inputs(1.0);
    let p = regime_threshold(&inp).unwrap();
    let w = Quantity::rad_per_second(inp.omega_degenerate());
    let band = Quantity::new(0.0, tpg_core::units::Dim::PER_AREA);
    let at = |product: f64| {
        let i = inp
            .clone()
            .with_stim_intensity(product / inp.pump_intensity())
            .unwrap();
        classify_regime(coupling_c3(w, &i).unwrap(), band).unwrap()
    };
    let (mut lo, mut hi) = (0.5 * p, 2.0 * p);
    assert_eq!(at(lo), Regime::Weak);
    assert_eq!(at(hi), Regime::Strong);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if at(mid) == Regime::Weak {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((lo / p - 1.0).abs() < 1e-9 && (hi / p - 1.0).abs() < 1e-9);
}

#[test]
fn quadrature_is_bit_reproducible() {
    let inp = inputs(0.7);
    let a = integrate_flux(&inp, &IntegrationSettings::default()).unwrap();
    let b = integrate_flux(&inp, &IntegrationSettings::default()).unwrap();
    assert_eq!(a.photons.to_bits(), b.photons.to_bits());
}
