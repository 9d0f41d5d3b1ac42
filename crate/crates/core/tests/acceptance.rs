//! Acceptance criteria, one test each. Every test prints a single
//! `PASS`/`FAIL` line with the measured figure before asserting.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::io::Write;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use dismet::analysis::{
    noon_critical_photon_number, robustness_index, susceptibility_scan, Channel, OperatingPoint, ProbeKind,
};
use dismet::analytic::{fim_analytic, linspace, output_probabilities, visibility};
use dismet::circuit::{exact_probability, output_state, sample_shots, ShotKey};
use dismet::estimate::{bias_sweep, correct_shrinkage, empirical_fim, invert_visibility, ShrinkageModel};
use dismet::fock::{
    amplitude_damping_kraus, effective_visibility, effective_visibility_pipeline, kraus_completeness_error,
    phase_damping_kraus, qfim_finite_difference, NoiseParams, Probe, SldConfig,
};
use dismet::{LandscapeGrid, ModelParams};

/// Writes through the raw stderr handle, which the test harness does not
/// capture, so passing criteria are visible in a plain `cargo test` log.
fn report(id: u32, name: &str, ok: bool, detail: String) {
    let line = format!("{} criterion {id:>2} {name}: {detail}\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

#[test]
fn criterion_01_circuit_matches_fringe() {
    let t = Instant::now();
    let betas = linspace((-4.0, 4.0), 50);
    let xs = linspace((-FRAC_PI_2, FRAC_PI_2), 50);
    let mut worst = 0.0f64;
    for &b in &betas {
        for &x in &xs {
            let v = visibility(&ModelParams::new(b, x, 1).unwrap());
            let closed = (1.0 + v * (2.0 * x).cos()) / (1.0 + v);
            worst = worst.max((exact_probability(b, x).p0 - closed).abs());
        }
    }
    let elapsed = t.elapsed();
    let ok = worst < 1e-12 && within(elapsed, 10);
    report(1, "circuit vs analytic P0", ok, format!("max |dev| = {worst:.3e}, {:.2?}", elapsed));
    assert!(ok);
}

#[test]
fn criterion_02_qfim_saturated_by_counting() {
    let t = Instant::now();
    let grid = LandscapeGrid::new((-4.0, 4.0), (-FRAC_PI_2, FRAC_PI_2), 10, 10).unwrap();
    let cfg = SldConfig::default();
    let (mut worst, mut worst_inc) = (0.0f64, 0.0f64);
    for pt in grid.points() {
        let q = qfim_finite_difference(|b, x| Ok(output_state(b, 1.0, x)), (pt.beta, pt.x), &cfg).unwrap();
        let f = fim_analytic(&ModelParams::new(pt.beta, pt.x, 1).unwrap()).unwrap();
        worst = worst.max(q.qfim.max_abs_diff(&f));
        worst_inc = worst_inc.max(q.incompatibility);
    }
    let elapsed = t.elapsed();
    let ok = worst < 1e-6 && worst_inc < 1e-8 && within(elapsed, 60);
    report(
        2,
        "F = Q on 10x10",
        ok,
        format!("max |Q - F| = {worst:.3e}, max incompatibility = {worst_inc:.3e}, {:.2?}", elapsed),
    );
    assert!(ok);
}

#[test]
fn criterion_03_phase_ceiling() {
    let mut ratios = Vec::new();
    for n in [1u32, 5, 10] {
        let f = fim_analytic(&ModelParams::new(-50.0, 1e-6, n).unwrap()).unwrap();
        ratios.push((n, f.f_xx / (n * n) as f64));
    }
    let ok = ratios.iter().all(|(_, r)| (r - 4.0).abs() < 1e-3);
    report(3, "f_xx / N^2 -> 4", ok, format!("{ratios:?}"));
    assert!(ok);
}

#[test]
fn criterion_04_table_simulator_column() {
    let mu = 1e4;
    // (β, x, listed simulator P0)
    let rows = [
        (-4.0, -FRAC_PI_2, 0.017),
        (-4.0, -0.083, 0.993),
        (-4.0, FRAC_PI_2, 0.021),
        (0.211, -FRAC_PI_2, 0.548),
        (0.211, -0.083, 0.999),
        (0.211, FRAC_PI_2, 0.520),
        (4.0, -FRAC_PI_2, 0.977),
        (4.0, -0.083, 1.000),
        (4.0, FRAC_PI_2, 0.979),
    ];
    let mut misses = Vec::new();
    for (b, x, listed) in rows {
        let p = output_probabilities(&ModelParams::new(b, x, 1).unwrap()).p0;
        let sigma = (p * (1.0 - p) / mu).sqrt();
        let z = (p - listed) / sigma;
        println!("    beta = {b:>6}, x = {x:>7.4}: analytic {p:.5}, listed {listed:.3}, z = {z:+.2}");
        if z.abs() > 3.0 {
            misses.push((b, x));
        }
    }
    let ok = misses.is_empty();
    report(4, "table P0 within 3 sigma", ok, format!("{} of 9 outside 3 sigma: {misses:?}", misses.len()));
    assert!(ok);
}

#[test]
fn criterion_05_effective_visibility() {
    let t = Instant::now();
    let etas = linspace((0.5, 1.0), 5);
    let gammas = linspace((0.0, 0.1), 5);
    let mut worst = 0.0f64;
    for n in 1..=6u32 {
        for &eta in &etas {
            for &gamma in &gammas {
                let noise = NoiseParams::new(eta, gamma).unwrap();
                let sim = effective_visibility_pipeline(-1.0, 1.0, n, &noise).unwrap();
                worst = worst.max((sim - effective_visibility(-1.0, 1.0, n, &noise)).abs());
            }
        }
    }
    // The channel Kraus sets themselves must be trace preserving.
    let kraus_ok = kraus_completeness_error(&amplitude_damping_kraus(6, 0.7)) < 1e-12
        && kraus_completeness_error(&phase_damping_kraus(6, 0.05)) < 1e-12;
    let elapsed = t.elapsed();
    let ok = worst < 1e-8 && kraus_ok && within(elapsed, 120);
    report(5, "V_eff closed form vs pipeline", ok, format!("max |dev| = {worst:.3e}, {:.2?}", elapsed));
    assert!(ok);
}

#[test]
fn criterion_06_susceptibility_exponents() {
    let t = Instant::now();
    let sizes = [2.0, 3.0, 4.0, 5.0, 6.0];
    let cases = [
        (ProbeKind::Noon, Channel::AmplitudeDamping, 3.0, 0.2),
        (ProbeKind::Noon, Channel::DifferentialDephasing, 4.0, 0.2),
        (ProbeKind::Squeezed, Channel::AmplitudeDamping, 1.0, 0.3),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (kind, channel, target, tol) in cases {
        let fit = susceptibility_scan(kind, channel, &sizes).unwrap();
        println!(
            "    {}/{}: chi = {:?}, exponent = {:.4} (r2 = {:.5})",
            kind.label(),
            channel.label(),
            fit.chi_values,
            fit.exponent,
            fit.fit_r2
        );
        let hit = (fit.exponent - target).abs() <= tol;
        ok &= hit;
        parts.push(format!("{}/{} {:.3} (want {target}±{tol})", kind.label(), channel.label(), fit.exponent));
    }
    let elapsed = t.elapsed();
    ok &= within(elapsed, 300);
    report(6, "susceptibility exponents", ok, format!("{}, {:.2?}", parts.join("; "), elapsed));
    assert!(ok);
}

#[test]
fn criterion_07_critical_photon_number() {
    let eps = [0.02, 0.05, 0.1];
    let n: Vec<u32> = eps
        .iter()
        .map(|&e| noon_critical_photon_number(Channel::AmplitudeDamping, e, 200).unwrap())
        .collect();
    let lx: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ly: Vec<f64> = n.iter().map(|&v| (v as f64).ln()).collect();
    let mx = lx.iter().sum::<f64>() / 3.0;
    let my = ly.iter().sum::<f64>() / 3.0;
    let slope = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / lx.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let ok = (slope + 1.0).abs() <= 0.2;
    report(7, "N_crit ~ 1/eps", ok, format!("N_crit = {n:?}, slope = {slope:.4}"));
    assert!(ok);
}

#[test]
fn criterion_08_probe_hierarchy() {
    let at = OperatingPoint::default();
    let eps = 0.1;
    let r_noon = robustness_index(&Probe::Noon { n: 4 }, eps, &at).unwrap();
    let r_cat = robustness_index(&Probe::cat(Complex64::new(2.0, 0.0)), eps, &at).unwrap();
    let r_sq = robustness_index(&Probe::Squeezed { r: 1.1 }, eps, &at).unwrap();
    let ok = r_sq > r_cat && r_cat > r_noon && (0.8..=1.0).contains(&r_sq) && r_noon < 0.1;
    report(
        8,
        "R_squeezed > R_cat > R_noon",
        ok,
        format!("R_noon = {r_noon:.4}, R_cat = {r_cat:.4}, R_squeezed = {r_sq:.4}"),
    );
    assert!(ok);
}

#[test]
fn criterion_09_shrinkage_bias() {
    let betas = [-4.0, -2.0, -1.0, 1.0, 2.0, 4.0];
    let rows = bias_sweep(&betas, 0.5, 1.0).unwrap();
    let model = ShrinkageModel::new(0.5).unwrap();
    let mut ok = true;
    let mut worst = 0.0f64;
    for r in &rows {
        ok &= r.contracted && r.beta_hat.signum() == r.beta_true.signum();
        let back = correct_shrinkage(r.v_meas, &model, 1.0).unwrap();
        worst = worst.max((back - r.beta_true).abs());
    }
    let hot = rows[0].beta_hat;
    ok &= worst < 1e-9 && (hot + 1.3083).abs() < 1e-3;
    // The naive inversion is exactly the visibility map inverted.
    ok &= (invert_visibility(rows[0].v_meas, 1.0).unwrap() - hot).abs() < 1e-15;
    report(
        9,
        "contrast shrinkage bias",
        ok,
        format!("beta_hat(-4) = {hot:.5}, max round-trip error = {worst:.3e}"),
    );
    assert!(ok);
}

#[test]
fn criterion_10_empirical_fim_rate() {
    let p = ModelParams::new(0.0, FRAC_PI_4, 1).unwrap();
    let exact = fim_analytic(&p).unwrap();
    let scale = exact.as_array().iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let mus = [1e3f64, 1e4, 1e5, 1e6];
    let mut errs = Vec::new();
    for &mu in &mus {
        let mean = (0..50u64)
            .map(|seed| {
                let rec = sample_shots(0.0, 1.0, FRAC_PI_4, mu as u64, ShotKey::new(seed)).unwrap();
                empirical_fim(&rec, &p).unwrap().max_abs_diff(&exact) / scale
            })
            .sum::<f64>()
            / 50.0;
        errs.push(mean);
    }
    let lx: Vec<f64> = mus.iter().map(|m| m.ln()).collect();
    let ly: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let mx = lx.iter().sum::<f64>() / 4.0;
    let my = ly.iter().sum::<f64>() / 4.0;
    let slope = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / lx.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let ok = (slope + 0.5).abs() <= 0.1;
    report(10, "empirical FIM ~ mu^-1/2", ok, format!("errors = {:?}, slope = {slope:.4}", errs.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>()));
    assert!(ok);
}

/// A compact pass over the core invariants at 500 cases each; the full
/// property suite lives in `tests/properties.rs`.
#[test]
fn criterion_11_property_suites() {
    let mut runner = TestRunner::new(Config {
        cases: 500,
        failure_persistence: None,
        ..Config::default()
    });
    let mut failures = Vec::new();

    let normalization = runner.run(&(-6.0..6.0f64, -PI..PI, 1u32..8), |(b, x, n)| {
        let f = output_probabilities(&ModelParams::new(b, x, n).unwrap());
        prop_assert!((f.p0 + f.p_n - 1.0).abs() < 1e-14);
        prop_assert!(f.p0 >= 0.0 && f.p_n >= 0.0);
        Ok(())
    });
    if let Err(e) = normalization {
        failures.push(format!("normalization: {e}"));
    }

    let rank_one = runner.run(&(-6.0..6.0f64, 0.05..1.5f64), |(b, x)| {
        let f = fim_analytic(&ModelParams::new(b, x, 1).unwrap()).unwrap();
        prop_assert!(f.det().abs() <= 1e-9 * f.trace().powi(2).max(1e-300));
        Ok(())
    });
    if let Err(e) = rank_one {
        failures.push(format!("rank-1 FIM: {e}"));
    }

    let cptp = runner.run(&(0usize..12, 0.01..1.0f64, 0.0..0.5f64), |(c, eta, g)| {
        prop_assert!(kraus_completeness_error(&amplitude_damping_kraus(c, eta)) < 1e-12);
        prop_assert!(kraus_completeness_error(&phase_damping_kraus(c, g)) < 1e-10);
        Ok(())
    });
    if let Err(e) = cptp {
        failures.push(format!("CPTP: {e}"));
    }

    let round_trip = runner.run(&(0.01..0.99f64, -8.0..8.0f64), |(k, b)| {
        let m = ShrinkageModel::new(k).unwrap();
        let v = visibility(&ModelParams::new(b, 0.0, 1).unwrap());
        let back = correct_shrinkage(dismet::estimate::apply_shrinkage(v, &m), &m, 1.0).unwrap();
        prop_assert!((back - b).abs() < 1e-7 * (1.0 + b.abs()));
        Ok(())
    });
    if let Err(e) = round_trip {
        failures.push(format!("shrinkage round trip: {e}"));
    }

    let determinism = runner.run(&(any::<u64>(), 0u32..64, 0u32..64), |(seed, i, j)| {
        let key = ShotKey::new(seed).at(i as usize, j as usize);
        let a = sample_shots(0.3, 1.0, 0.4, 500, key).unwrap();
        let b = sample_shots(0.3, 1.0, 0.4, 500, key).unwrap();
        prop_assert_eq!(a, b);
        Ok(())
    });
    if let Err(e) = determinism {
        failures.push(format!("determinism: {e}"));
    }

    let ok = failures.is_empty();
    report(11, "property suites (500 cases each)", ok, if ok { "5 properties held".into() } else { failures.join("; ") });
    assert!(ok);
}
