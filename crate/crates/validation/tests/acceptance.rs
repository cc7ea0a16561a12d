//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero when any
//! criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use tpg_core::config::ExperimentConfig;
use tpg_core::dispersion::CrystalDispersion;
use tpg_core::experiment::*;
use tpg_core::oracle::equivalence_rows;
use tpg_core::phase_matching::*;
use tpg_core::tpg_model::*;
use tpg_core::units::{Dim, Quantity};

struct Outcome {
    pass: bool,
    detail: String,
    notes: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self {
            pass,
            detail,
            notes: Vec::new(),
        }
    }

    fn note(mut self, s: String) -> Self {
        self.notes.push(s);
        self
    }
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    ((value - target) / target).abs() <= rel
}

fn r_squared(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}

fn ktp() -> Arc<CrystalDispersion> {
    Arc::new(CrystalDispersion::ktp())
}

fn c1_phase_matching_endpoint() -> Outcome {
    let t = Instant::now();
    let roots = solve_degenerate_pm(&ktp(), Quantity::nanometers(532.0), Quantity::degrees(90.0));
    let elapsed = t.elapsed().as_secs_f64();
    match roots {
        Ok(r) => {
            let (l1, l23) = (r[0].lambda1_m * 1e9, r[0].lambda23_m * 1e9);
            Outcome::new(
                (l1 - 1491.0).abs() <= 10.0 && (l23 - 1654.0).abs() <= 10.0 && elapsed < 1.0,
                format!(
                    "lambda1 = {l1:.1} nm (1491 +/- 10), lambda23 = {l23:.1} nm (1654 +/- 10), {elapsed:.3} s"
                ),
            )
        }
        Err(e) => Outcome::new(false, format!("solver error: {e}")),
    }
}

fn c2_energy_conservation() -> Outcome {
    let crystal = ktp();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for t in [76.0, 80.0, 84.0, 88.0, 90.0] {
        if let Ok(roots) =
            solve_degenerate_pm(&crystal, Quantity::nanometers(532.0), Quantity::degrees(t))
        {
            for r in roots {
                let lp = 532e-9;
                let res = ((1.0 / lp) - (1.0 / r.lambda1_m + 2.0 / r.lambda23_m)).abs() * lp;
                worst = worst.max(res);
                count += 1;
            }
        }
    }
    let l23 = degenerate_lambda23(532e-9, 1491e-9).unwrap() * 1e9;
    Outcome::new(
        count > 0 && worst <= 1e-12 && (l23 - 1654.2).abs() < 0.05,
        format!("{count} roots, worst residual {worst:.1e}; lambda23(1491) = {l23:.2} nm"),
    )
}

fn c3_linearization() -> Outcome {
    let lin = linearize(&common::anchor(), None, 201).unwrap();
    Outcome::new(
        within(lin.a, -3.3e5, 0.15) && within(lin.b, 2.88e-10, 0.15),
        format!(
            "a = {:.4e} rad/m (-3.3e5 +/- 15%), b = {:.4e} m^-1 s (2.88e-10 +/- 15%)",
            lin.a, lin.b
        ),
    )
}

fn c4_miller() -> Outcome {
    let crystal = CrystalDispersion::ktp();
    let cfg = ExperimentConfig::bundled();
    let chi = cfg.chi3_from_reference(&crystal).unwrap().unwrap();
    Outcome::new(
        within(chi, 7.8e-22, 0.15),
        format!(
            "chi3 = {:.3e} m^2/V^2 from 14.6e-22 at (539; 1617, 1617, 1617) nm (target 7.8e-22 +/- 15%)",
            chi
        ),
    )
}

fn c5_oracle_equivalence() -> Outcome {
    let t = Instant::now();
    let grid = common::oracle_grid(100, 7);
    let weak = common::count_regime(&grid, Regime::Weak);
    let strong = common::count_regime(&grid, Regime::Strong);
    match equivalence_rows(&grid, 20_000) {
        Ok(rows) => {
            let worst = rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
            let elapsed = t.elapsed().as_secs_f64();
            Outcome::new(
                worst <= 1e-6 && elapsed < 30.0 && weak > 0 && strong > 0,
                format!(
                    "100 points ({weak} weak, {strong} strong), max rel error {worst:.2e}, {elapsed:.2} s"
                ),
            )
        }
        Err(e) => Outcome::new(false, format!("oracle error: {e}")),
    }
}

fn c6_branch_continuity() -> Outcome {
    let base = common::lab_inputs(1.0);
    let threshold = regime_threshold(&base).unwrap();
    let w = Quantity::rad_per_second(base.omega_degenerate());
    let dk = base.delta_k_eff(base.omega_degenerate()).unwrap();
    let z = base.length();
    let mut worst_small: f64 = 0.0;
    let mut tracks = true;
    let mut both_sides = (false, false);
    for e in 4..=12 {
        for sign in [-1.0, 1.0] {
            let c_target = sign * 10f64.powi(-e) / (z * z);
            // C = gain − Δk²/4, so shift the stimulation off the threshold
            let scale = 1.0 + c_target / (0.25 * dk * dk);
            let inp = base
                .clone()
                .with_stim_intensity(threshold / base.pump_intensity() * scale)
                .unwrap();
            let p = flux_density(w, &inp).unwrap();
            let limit = 2.0 * PI * p.gain * z * z;
            let dev = ((p.density - limit) / limit).abs();
            let u = p.c3 * z * z;
            if p.c3 < 0.0 {
                both_sides.0 = true;
            } else if p.c3 > 0.0 {
                both_sides.1 = true;
            }
            if u.abs() <= 1e-6 {
                worst_small = worst_small.max(dev);
            }
            if u.abs() >= 1e-9 && ((dev / (u.abs() / 3.0)) - 1.0).abs() > 1e-2 {
                tracks = false;
            }
        }
    }
    Outcome::new(
        worst_small <= 1e-6 && tracks && both_sides.0 && both_sides.1,
        format!(
            "|C|L^2 from 1e-4 to 1e-12 on both sides; max deviation from the L^2 limit for |C|L^2 <= 1e-6: {worst_small:.2e}; deviation follows |C|L^2/3: {tracks}"
        ),
    )
}

fn c7_analytic_vs_numeric() -> Outcome {
    let cfg = ExperimentConfig::bundled();
    let setup = cfg.sweep_setup();
    let model = common::lab_inputs(1.0);
    let mut worst: f64 = 0.0;
    let mut worst_sq: f64 = f64::INFINITY;
    for &e in &cfg.sweep_energies_j {
        let inp = setup.inputs_at(&model, e).unwrap();
        let num = integrate_flux(&inp, &setup.settings).unwrap().photons;
        let ana = analytic_flux(&inp).unwrap();
        let sq = analytic_flux_f3_squared(&inp).unwrap();
        worst = worst.max((ana / num - 1.0).abs());
        worst_sq = worst_sq.min((sq / num - 1.0).abs());
    }
    let at_config_delta = setup
        .inputs_at(
            &model.clone().with_delta(cfg.delta).unwrap(),
            cfg.stim.energy_j,
        )
        .and_then(|inp| integrate_flux(&inp, &setup.settings));
    let f3_dim = coupling_f3(
        Quantity::rad_per_second(model.omega_degenerate()),
        model.anchor(),
    )
    .unwrap()
    .dim;
    let mut o = Outcome::new(
        worst <= 0.05 && worst_sq > 0.05,
        format!(
            "delta = 1, {} energies in [62 nJ, 21 uJ]: first-power form max deviation {:.2e}; squared form off by at least {:.1e} (relative)",
            cfg.sweep_energies_j.len(),
            worst,
            worst_sq
        ),
    )
    .note(format!(
        "squared form carries f3 dimension squared: f3 has {:?}, so the product is not photons",
        f3_dim
    ));
    o = o.note(match at_config_delta {
        Ok(r) => format!(
            "at delta = {:.0e} the quadrature returns {:.3e}",
            cfg.delta, r.photons
        ),
        Err(e) => format!(
            "at delta = {:.0e} the quadrature is unavailable: {e}",
            cfg.delta
        ),
    });
    o
}

fn bundled_sweep() -> (ExperimentConfig, tpg_core::Result<Vec<YieldRow>>) {
    let cfg = ExperimentConfig::bundled();
    let crystal = cfg.load_crystal().unwrap();
    let model = cfg.coupling_inputs(crystal).unwrap();
    let rows = predict_yield_sweep(&cfg.sweep_setup(), &cfg.sweep_energies_j, &model);
    (cfg, rows)
}

fn c8_linearity() -> Outcome {
    let (cfg, rows) = bundled_sweep();
    let supplementary = {
        let rows = predict_yield_sweep(
            &cfg.sweep_setup(),
            &cfg.sweep_energies_j,
            &common::lab_inputs(1.0),
        )
        .unwrap();
        let x: Vec<f64> = rows.iter().map(|r| r.stim_energy_j).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.yield23).collect();
        format!(
            "supplementary: delta = 1 gives R^2 = {:.6}",
            r_squared(&x, &y)
        )
    };
    match rows {
        Ok(rows) => {
            let x: Vec<f64> = rows.iter().map(|r| r.stim_energy_j).collect();
            let y: Vec<f64> = rows.iter().map(|r| r.yield23).collect();
            let r2 = r_squared(&x, &y);
            Outcome::new(
                r2 >= 0.999,
                format!("bundled config, R^2 = {r2:.6} (>= 0.999)"),
            )
        }
        Err(e) => Outcome::new(
            false,
            format!("bundled config (delta = {:.0e}): {e}", cfg.delta),
        ),
    }
    .note(supplementary)
}

fn c9_absolute_magnitude() -> Outcome {
    let (cfg, rows) = bundled_sweep();
    let crystal = cfg.load_crystal().unwrap();
    let inp = cfg.coupling_inputs(crystal).unwrap();
    let w = inp.omega_degenerate();
    let c3 = coupling_c3(Quantity::rad_per_second(w), &inp)
        .unwrap()
        .value;
    let f3 = coupling_f3(Quantity::rad_per_second(w), inp.anchor())
        .unwrap()
        .value;
    let b = linearize(inp.anchor(), None, 201).unwrap().b;
    // the closed form evaluated directly, bypassing its weak-coupling guard
    let closed = 2.0
        * 4.0
        * PI
        * PI
        * f3
        * inp.pump_intensity()
        * inp.stim_intensity()
        * inp.chi3().powi(2)
        * inp.length()
        / (inp.delta() * b.abs());
    let last = rows.map(|r| r.last().unwrap().yield23);
    match last {
        Ok(y) => Outcome::new(
            y / 2e4 <= 3.0 && 2e4 / y <= 3.0,
            format!("n2 + n3 at 21 uJ = {y:.3e} (2e4 within a factor 3)"),
        ),
        Err(e) => Outcome::new(
            false,
            format!("bundled config (delta = {:.0e}): {e}", cfg.delta),
        ),
    }
    .note(format!(
        "C3 at degeneracy = {c3:.3e} m^-2 (gain term dominates, analytic guard reports {})",
        match analytic_flux(&inp) {
            Ok(_) => "weak".to_string(),
            Err(e) => e.to_string(),
        }
    ))
    .note(format!(
        "closed-form n2 + n3 at the same point: {closed:.3e} ({:.1e} x the target)",
        closed / 2e4
    ))
}

fn c10_delta_roundtrip() -> Outcome {
    let cfg = ExperimentConfig::bundled();
    let setup = cfg.sweep_setup();
    let roundtrip = |truth: f64| -> tpg_core::Result<FitReport> {
        let rows = predict_yield_sweep(&setup, &cfg.sweep_energies_j, &common::lab_inputs(truth))?;
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let data = MeasuredSweep::new(
            rows.iter()
                .map(|r| SweepRow {
                    stim_energy_j: r.stim_energy_j,
                    photons_per_pulse: r.yield23 * (1.0 + noise.sample(&mut rng)),
                    sigma: None,
                })
                .collect(),
        )?;
        fit_delta(&data, &setup, &common::lab_inputs(1.0))
    };
    let supplementary = match roundtrip(0.5) {
        Ok(r) => format!(
            "supplementary: delta* = 0.5 recovers {:.5} (+/- {:.1e}), error {:.2}%",
            r.delta,
            r.delta_stderr,
            100.0 * (r.delta / 0.5 - 1.0).abs()
        ),
        Err(e) => format!("supplementary roundtrip failed: {e}"),
    };
    match roundtrip(2e-7) {
        Ok(r) => Outcome::new(
            within(r.delta, 2e-7, 0.02),
            format!("delta* = 2e-7, fitted {:.4e}", r.delta),
        ),
        Err(e) => Outcome::new(false, format!("delta* = 2e-7: {e}")),
    }
    .note(supplementary)
}

fn c11_polarization_law() -> Outcome {
    let mut ok = polarization_yield(0.0, 0.0) == 1.0;
    for a in [0.0, 30.0, 90.0, 135.0, 180.0] {
        ok &= polarization_yield(90.0, a) < 1e-30 && polarization_yield(a, 90.0) < 1e-30;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let a: f64 = rng.random_range(0.0..180.0);
        let b: f64 = rng.random_range(0.0..180.0);
        // cos² via the double-angle form as an independent evaluation
        let want =
            0.25 * (1.0 + (2.0 * a.to_radians()).cos()) * (1.0 + (2.0 * b.to_radians()).cos());
        worst = worst.max((polarization_yield(a, b) - want).abs());
    }
    ok &= worst <= 1e-12;
    Outcome::new(
        ok,
        format!("(0,0) -> 1, alpha or beta = 90 deg -> 0; max profile deviation {worst:.1e} over 10000 angles"),
    )
}

fn c12_efficiency() -> Outcome {
    let cfg = ExperimentConfig::bundled();
    let r = efficiency_report(2e4, &cfg.pump, &cfg.stim, cfg.detection_transfer).unwrap();
    Outcome::new(
        r.triplets_per_pulse == 1e4 && r.triplets_per_second == 1e5,
        format!(
            "{} triplets/pulse, {} triplets/s",
            r.triplets_per_pulse, r.triplets_per_second
        ),
    )
    .note(format!(
        "eta = {:.3e} computed vs {:.1e} reported; eta/n1 = {:.3e} Hz^-1 computed vs {:.1e} reported; detected {:.2} per pulse",
        r.eta,
        r.reported.eta,
        r.eta_per_stim_photon,
        r.reported.eta_per_stim_photon_hz,
        r.detected_per_pulse
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    // keep the dimension layer in the build of this target
    debug_assert_eq!(Dim::PER_AREA, Dim::WAVENUMBER.powi(2));
    let criteria: [Criterion; 12] = [
        ("phase-matching endpoint", c1_phase_matching_endpoint),
        ("energy-conservation exactness", c2_energy_conservation),
        ("linearization constants", c3_linearization),
        ("Miller scaling", c4_miller),
        ("oracle equivalence", c5_oracle_equivalence),
        ("branch continuity", c6_branch_continuity),
        ("analytic vs numeric", c7_analytic_vs_numeric),
        ("linearity of yield", c8_linearity),
        ("absolute magnitude", c9_absolute_magnitude),
        ("delta roundtrip", c10_delta_roundtrip),
        ("polarization law", c11_polarization_law),
        ("efficiency bookkeeping", c12_efficiency),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} [{:>2}] {}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            name,
            o.detail
        );
        for n in &o.notes {
            println!("          {n}");
        }
    }
    println!(
        "acceptance: {} passed, {} failed",
        criteria.len() - failed,
        failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
