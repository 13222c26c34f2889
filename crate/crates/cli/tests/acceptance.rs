//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line (visible with `--nocapture`).
//!
//! Run with `cargo test -p anderson-lab-cli --test acceptance`.

// negated float comparisons reject NaN on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use anderson_lab::geometry::{ParticleRectangle, RealCenter};
use anderson_lab::model::{
    assemble, sample_disorder, DensitySpec, FiniteVolumeOperator, ModelParams, SiteRegion,
};
use anderson_lab::resolvent::{
    classify, energy_shift_check, pi_split, pi_transfer_check, PiMode, QualityKind,
};
use anderson_lab::stochastic::{
    recursion_msa1, recursion_msa2, recursion_msa3, resolvent_norm_prob,
    two_box_spectral_distance_prob, wegner_trace_check,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Frozen calibration values. Each constant records the run that
/// produced it; re-deriving them means re-running that configuration.
mod fixtures {
    /// Median kernel ratio Q(d_H=6)/Q(d_H=2) threshold for the
    /// localization trend. Calibration run: localization experiment,
    /// n=2 d=1 side=12 lambda=20 samples=200 seed=777, which measured a
    /// median ratio of 0.0021 (per-sample quartiles 0.0010/0.0021/0.0055).
    /// Frozen at ~5x the calibrated median; a delocalized system sits
    /// near 1.
    pub const KERNEL_RATIO_FIXTURE: f64 = 0.01;

    /// Threshold scale index of the polynomial recursion at
    /// p0 = (2Y)^{-1}/4, Y = 4000, p = 1, N = d = 1, L0 = 1e5,
    /// recorded from the first run.
    pub const MSA1_K0_FIXTURE: usize = 7;

    /// Threshold scale index of the subexponential recursion at the
    /// minimal admissible Y = 3800^10, zeta0 = 0.9, zeta1 = 0.8,
    /// p0 = 0.9999, L0 = 100, recorded from the first run.
    pub const MSA3_K1_FIXTURE: usize = 2;
}

fn criterion(name: &str, budget_secs: f64, body: impl FnOnce() -> Result<String, String>) {
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed().as_secs_f64();
    match outcome {
        Ok(detail) => {
            println!("PASS {name} ({elapsed:.1}s): {detail}");
            assert!(
                elapsed <= budget_secs,
                "{name} exceeded its runtime budget: {elapsed:.1}s > {budget_secs}s"
            );
        }
        Err(detail) => {
            println!("FAIL {name} ({elapsed:.1}s): {detail}");
            panic!("{name}: {detail}");
        }
    }
}

fn params(n: usize, d: usize, lambda: f64) -> ModelParams {
    ModelParams::simple(n, d, 1.0, 1.0, lambda, DensitySpec::Uniform01).unwrap()
}

fn cube(n: usize, coords: Vec<f64>, side: f64) -> ParticleRectangle {
    ParticleRectangle::cube(RealCenter::new(n, 1, coords).unwrap(), side).unwrap()
}

fn assemble_for(
    p: &ModelParams,
    rect: &ParticleRectangle,
    seed: u64,
    index: u64,
) -> FiniteVolumeOperator {
    let region = SiteRegion::covering(&[rect]).unwrap();
    let sample = sample_disorder(p, &region, seed, index);
    assemble(rect, &sample, p).unwrap()
}

#[test]
fn criterion_01_wegner_trace_bound() {
    criterion("criterion 01 wegner-trace-bound", 120.0, || {
        let p = params(2, 1, 1.0);
        let rect = cube(2, vec![0.0, 0.0], 8.0);
        let report =
            wegner_trace_check(&p, &rect, (1.9, 2.1), 5_000, 101).map_err(|e| e.to_string())?;
        let expected_bound = 2.0 * 1.0 * 0.2 * 64.0;
        if (report.bound - expected_bound).abs() > 1e-9 {
            return Err(format!("bound {} != {expected_bound}", report.bound));
        }
        if !report.verdict {
            return Err(format!(
                "99% upper bound {} exceeds {}",
                report.upper99, report.bound
            ));
        }
        Ok(format!(
            "mean {:.3}, 99% upper {:.3} <= bound {:.1}",
            report.empirical_mean, report.upper99, report.bound
        ))
    });
}

#[test]
fn criterion_02_resolvent_norm_probability() {
    criterion("criterion 02 resolvent-norm-probability", 60.0, || {
        let p = params(1, 1, 1.0);
        let rect = cube(1, vec![0.0], 10.0);
        let report = resolvent_norm_prob(&p, &rect, 2.0, 0.01, 5_000, 202)
            .map_err(|e| e.to_string())?;
        if (report.bound - 0.2).abs() > 1e-12 {
            return Err(format!("bound {} != 0.2", report.bound));
        }
        if !report.verdict {
            return Err(format!(
                "99% upper bound {} exceeds 0.2",
                report.estimate.upper99_one_sided
            ));
        }
        Ok(format!(
            "estimate {:.4}, 99% upper {:.4} <= 0.2",
            report.estimate.point, report.estimate.upper99_one_sided
        ))
    });
}

#[test]
fn criterion_03_two_box_wegner() {
    criterion("criterion 03 two-box-wegner", 180.0, || {
        let p = params(2, 1, 1.0);
        // partially (not fully) separated: the clusters share [-4, 4]
        let r1 = cube(2, vec![0.0, 10.0], 8.0);
        let r2 = cube(2, vec![0.0, 30.0], 8.0);
        if !r1.partially_separated(&r2) || r1.fully_separated(&r2) {
            return Err("test rectangles lost their separation structure".into());
        }
        let report = two_box_spectral_distance_prob(&p, &r1, &r2, 0.005, 5_000, 303)
            .map_err(|e| e.to_string())?;
        let expected_bound = 2.0 * 2.0 * 1.0 * 0.005 * 8.0f64.powi(4);
        if (report.bound - expected_bound).abs() > 1e-9 {
            return Err(format!("bound {} != {expected_bound}", report.bound));
        }
        if !report.verdict {
            return Err(format!(
                "99% upper bound {} exceeds {}",
                report.estimate.upper99_one_sided, report.bound
            ));
        }
        Ok(format!(
            "estimate {:.4}, 99% upper {:.4} <= bound {:.2}",
            report.estimate.point, report.estimate.upper99_one_sided, report.bound
        ))
    });
}

#[test]
fn criterion_04_pi_tensor_identity() {
    criterion("criterion 04 pi-tensor-identity", 480.0, || {
        let mut rng = ChaCha8Rng::seed_from_u64(404);
        let mut worst_spec = 0.0f64;
        let mut worst_gj = f64::NEG_INFINITY;
        for trial in 0..200u32 {
            let (n, d, l) = match trial % 4 {
                0 => (2usize, 1usize, 8.0),
                1 => (2, 2, 4.0),
                2 => (3, 1, 4.0),
                _ => (3, 2, 2.0),
            };
            // keep the far particle strictly beyond the interaction range
            let off = l + 3.0 + rng.gen_range(0..4) as f64;
            let mut coords = Vec::new();
            for i in 0..n {
                let base = if i == n - 1 { off } else { i as f64 };
                for _ in 0..d {
                    coords.push(base);
                }
            }
            let lambda = rng.gen_range(0.0..10.0);
            let p = ModelParams::simple(n, d, 1.0, 1.0, lambda, DensitySpec::Uniform01)
                .unwrap();
            let rect =
                ParticleRectangle::cube(RealCenter::new(n, d, coords).unwrap(), l).unwrap();
            let region = SiteRegion::covering(&[&rect]).unwrap();
            let sample = sample_disorder(&p, &region, 4040, trial as u64);
            let full = assemble(&rect, &sample, &p).unwrap();
            let spec = full.spectrum(false).unwrap();

            // multiset identity
            let split = pi_split(&rect, None, &sample, &p).unwrap();
            let tensor = split.kronecker_spectrum().unwrap();
            if tensor.len() != spec.eigenvalues.len() {
                return Err(format!("trial {trial}: spectrum size mismatch"));
            }
            for (a, b) in tensor.iter().zip(&spec.eigenvalues) {
                worst_spec = worst_spec.max((a - b).abs());
            }

            // tensor Green bound at a well-conditioned energy
            let lo = spec.eigenvalues[0];
            let hi = *spec.eigenvalues.last().unwrap();
            let mut e = lo - 1.0;
            for _ in 0..20 {
                let candidate = rng.gen_range(lo - 2.0..hi + 2.0);
                if spec.dist(candidate) >= 0.05 {
                    e = candidate;
                    break;
                }
            }
            let report = pi_transfer_check(
                &rect,
                None,
                &sample,
                &p,
                e,
                PiMode::Suitable { theta: 1.0 },
            )
            .map_err(|err| format!("trial {trial}: {err}"))?;
            worst_gj = worst_gj
                .max(report.bound_excess_left)
                .max(report.bound_excess_right);
        }
        if worst_spec > 1e-9 {
            return Err(format!("spectrum multiset mismatch {worst_spec:.2e}"));
        }
        if worst_gj > 1e-8 {
            return Err(format!("tensor Green bound violated by {worst_gj:.2e}"));
        }
        Ok(format!(
            "200 boxes: max multiset error {worst_spec:.2e}, max bound excess {worst_gj:.2e}"
        ))
    });
}

#[test]
fn criterion_05_geometry_selftest() {
    criterion("criterion 05 geometry-selftest", 120.0, || {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let config = serde_json::json!({
            "schema_version": 1,
            "seed": 505,
            "model": {"n": 1, "d": 1, "r0": 1.0, "lambda": 1.0},
            "experiment": {
                "kind": "cover-selftest",
                "ell_range": [6, 18],
                "ratio_range": [6, 12],
                "bad_region_trials": 500
            }
        });
        let summary = run_binary(&config, dir.path(), None)?;
        let ok = summary["grid_all_pass"].as_bool() == Some(true)
            && summary["kj_bound_holds"].as_bool() == Some(true)
            && summary["bad_region_failures"].as_u64() == Some(0)
            && summary["bad_region_overflows"].as_u64() == Some(0);
        if !ok {
            return Err(format!("selftest summary: {summary}"));
        }
        Ok(format!(
            "{} grid combos, 500 bad-region trials, zero failures",
            summary["combos_checked"]
        ))
    });
}

#[test]
fn criterion_06_quality_implications() {
    criterion("criterion 06 quality-implications", 300.0, || {
        let mut rng = ChaCha8Rng::seed_from_u64(606);
        let mut checked = 0u32;
        for trial in 0..1000u64 {
            let n = rng.gen_range(1..=2usize);
            let l = rng.gen_range(5..=9) as f64;
            let coords: Vec<f64> = (0..n).map(|_| rng.gen_range(-4..=4) as f64).collect();
            let lambda = rng.gen_range(0.0..15.0);
            let p = params(n, 1, lambda);
            let rect = cube(n, coords, l);
            let op = assemble_for(&p, &rect, 6060, trial);
            let e = rng.gen_range(-1.0..8.0);
            let m_star = rng.gen_range(0.05..1.0);
            let theta = rng.gen_range(0.5..4.0);
            let zeta = rng.gen_range(0.1..0.9);

            let reg = classify(&op, e, QualityKind::Regular { m: m_star }).unwrap();
            if reg.verdict {
                let t = m_star * l / (100.0 * l.ln());
                if !classify(&op, e, QualityKind::Suitable { theta: t })
                    .unwrap()
                    .verdict
                {
                    return Err(format!("trial {trial}: regular => suitable violated"));
                }
            }
            let suit = classify(&op, e, QualityKind::Suitable { theta }).unwrap();
            if suit.verdict {
                let m = theta * l.ln() / l;
                if !classify(&op, e, QualityKind::Regular { m }).unwrap().verdict {
                    return Err(format!("trial {trial}: suitable => regular violated"));
                }
            }
            let reg_pow =
                classify(&op, e, QualityKind::Regular { m: l.powf(zeta - 1.0) }).unwrap();
            if reg_pow.verdict {
                let z = zeta - 100.0f64.ln() / l.ln();
                if z > 0.0
                    && !classify(&op, e, QualityKind::Ses { zeta: z }).unwrap().verdict
                {
                    return Err(format!("trial {trial}: regular => SES violated"));
                }
            }
            let ses = classify(&op, e, QualityKind::Ses { zeta }).unwrap();
            if ses.verdict
                && !classify(&op, e, QualityKind::Regular { m: l.powf(zeta - 1.0) })
                    .unwrap()
                    .verdict
            {
                return Err(format!("trial {trial}: SES => regular violated"));
            }
            checked += 1;
        }
        Ok(format!("{checked} boxes, all four implications exact"))
    });
}

#[test]
fn criterion_07_energy_shift_instances() {
    criterion("criterion 07 energy-shift-instances", 300.0, || {
        let mut rng = ChaCha8Rng::seed_from_u64(707);
        let beta = 0.5;
        let mut passed = 0u32;
        for trial in 0..100u64 {
            let n = rng.gen_range(1..=2usize);
            let l = *[8.0, 10.0, 12.0].get(rng.gen_range(0..3)).unwrap();
            let coords: Vec<f64> = (0..n).map(|_| rng.gen_range(-3..=3) as f64).collect();
            let lambda = rng.gen_range(0.0..10.0);
            let p = params(n, 1, lambda);
            let rect = cube(n, coords, l);
            let op = assemble_for(&p, &rect, 7070, trial);
            let spec = op.spectrum(false).unwrap();
            // walk the probe energy away from the band until the box
            // carries a positive decay mass there
            let mut gap = rng.gen_range(0.8..2.0);
            let mut m = f64::NEG_INFINITY;
            let mut e0 = 0.0;
            for _ in 0..6 {
                e0 = spec.eigenvalues[0] - gap;
                let green = anderson_lab::resolvent::green_matrix(&op, e0).unwrap();
                let m_hat = anderson_lab::resolvent::achieved_mass(&op, &green, l);
                m = 0.8 * m_hat;
                if m > 0.0 {
                    break;
                }
                gap *= 1.6;
            }
            if !(m > 0.0) {
                return Err(format!("trial {trial}: no positive mass below the band"));
            }
            let report = energy_shift_check(&op, e0, m, beta).map_err(|e| e.to_string())?;
            if !report.hypotheses_hold {
                return Err(format!("trial {trial}: constructed hypotheses failed"));
            }
            if report.all_good != Some(true) {
                return Err(format!(
                    "trial {trial}: grid verdicts {:?}",
                    report.grid.map(|g| g
                        .iter()
                        .filter(|&&(_, good)| !good)
                        .count())
                ));
            }
            passed += 1;
        }
        Ok(format!("{passed}/100 instances grid-verified"))
    });
}

#[test]
fn criterion_08_recursion_engines() {
    criterion("criterion 08 recursion-engines", 1.0, || {
        // polynomial decay
        let y = 4000.0;
        let r1 = recursion_msa1(0.25 / (2.0 * y), y, 1, 1, 1.0, 1, 1e5);
        if !r1.precondition_violations.is_empty() {
            return Err(format!("msa1 preconditions: {:?}", r1.precondition_violations));
        }
        let k0 = r1.threshold_index.ok_or("msa1 diverged")?;
        if k0 != fixtures::MSA1_K0_FIXTURE {
            return Err(format!(
                "K0 = {k0} differs from the committed fixture {}",
                fixtures::MSA1_K0_FIXTURE
            ));
        }
        for (k, &(lk, _, logp)) in r1.sequence.iter().enumerate().skip(k0) {
            if logp > -lk.ln() {
                return Err(format!("p_{k} above the threshold beyond K0"));
            }
        }

        // mass schedule
        let r2 = recursion_msa2(100.0, 2.0, 1.25, 0.2, 1.0, 1, 1);
        if !r2.halfmass_condition {
            return Err("halfmass sum condition unexpectedly fails".into());
        }
        if !r2.mass_stays_above_half {
            return Err("mass schedule dropped below m0/2".into());
        }

        // subexponential decay, log domain
        let y3 = 3800.0f64.powf(1.0 / (1.0 - 0.9));
        let r3 = recursion_msa3(0.9999, y3, 0.9, 0.8, 1, 1, 100.0);
        if !r3.precondition_violations.is_empty() {
            return Err(format!("msa3 preconditions: {:?}", r3.precondition_violations));
        }
        let k1 = r3.threshold_index.ok_or("msa3 diverged")?;
        if k1 != fixtures::MSA3_K1_FIXTURE {
            return Err(format!(
                "K1 = {k1} differs from the committed fixture {}",
                fixtures::MSA3_K1_FIXTURE
            ));
        }
        Ok(format!(
            "K0 = {k0}, min mass {:.3} >= 1, K1 = {k1}",
            r2.min_mass
        ))
    });
}

#[test]
fn criterion_09_localization_trend() {
    criterion("criterion 09 localization-trend", 600.0, || {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let config = serde_json::json!({
            "schema_version": 1,
            "seed": 909,
            "model": {"n": 2, "d": 1, "r0": 1.0, "lambda": 20.0},
            "experiment": {
                "kind": "localization",
                "center": [0.0, 0.0],
                "side": 12.0,
                "samples": 200
            }
        });
        let summary = run_binary(&config, dir.path(), None)?;
        let slope = summary["median_slope"].as_f64().unwrap_or(f64::NAN);
        let ratio = summary["median_kernel_ratio"].as_f64().unwrap_or(f64::NAN);
        let violations = summary["sudec_violations"].as_u64().unwrap_or(u64::MAX);
        if !(slope > 0.0) {
            return Err(format!("median decay slope {slope} not strictly positive"));
        }
        if !(ratio < fixtures::KERNEL_RATIO_FIXTURE) {
            return Err(format!(
                "kernel ratio {ratio} not below the fixture {}",
                fixtures::KERNEL_RATIO_FIXTURE
            ));
        }
        if violations != 0 {
            return Err(format!("{violations} eigenfunction-correlation ordering violations"));
        }
        Ok(format!(
            "median slope {slope:.2} > 0, kernel ratio {ratio:.5} < {}, 0 ordering violations",
            fixtures::KERNEL_RATIO_FIXTURE
        ))
    });
}

#[test]
fn criterion_10_worker_determinism() {
    criterion("criterion 10 worker-determinism", 600.0, || {
        // the criterion-1 configuration, re-run at three worker counts
        let config = serde_json::json!({
            "schema_version": 1,
            "seed": 101,
            "model": {"n": 2, "d": 1, "r0": 1.0, "lambda": 1.0},
            "experiment": {
                "kind": "wegner",
                "center": [0.0, 0.0],
                "sides": [8.0, 8.0],
                "interval": [1.9, 2.1],
                "samples": 5000
            }
        });
        let mut checksum_sets = Vec::new();
        for workers in [1u32, 4, 8] {
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            run_binary(&config, dir.path(), Some(workers))?;
            let manifest: serde_json::Value = serde_json::from_str(
                &std::fs::read_to_string(dir.path().join("artifacts/manifest.json"))
                    .map_err(|e| e.to_string())?,
            )
            .map_err(|e| e.to_string())?;
            let mut files: Vec<(String, String)> = manifest["files"]
                .as_array()
                .unwrap()
                .iter()
                .map(|f| {
                    (
                        f["name"].as_str().unwrap().to_string(),
                        f["sha256"].as_str().unwrap().to_string(),
                    )
                })
                .collect();
            files.sort();
            checksum_sets.push((workers, files));
        }
        let reference = &checksum_sets[0].1;
        for (workers, files) in &checksum_sets[1..] {
            if files != reference {
                return Err(format!("workers={workers} produced different checksums"));
            }
        }
        Ok(format!(
            "{} artifacts byte-identical across workers 1/4/8",
            reference.len()
        ))
    });
}

/// Run the CLI binary on a config, returning the parsed summary.
fn run_binary(
    config: &serde_json::Value,
    out_dir: &Path,
    workers: Option<u32>,
) -> Result<serde_json::Value, String> {
    let config_path = out_dir.join("config.json");
    let mut f = std::fs::File::create(&config_path).map_err(|e| e.to_string())?;
    f.write_all(serde_json::to_string_pretty(config).unwrap().as_bytes())
        .map_err(|e| e.to_string())?;
    drop(f);
    let artifacts = out_dir.join("artifacts");
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_anderson-lab"));
    cmd.arg("run")
        .arg(&config_path)
        .arg("--out")
        .arg(&artifacts);
    if let Some(w) = workers {
        cmd.arg("--workers").arg(w.to_string());
    }
    let output = cmd.output().map_err(|e| e.to_string())?;
    if !output.status.success() {
        return Err(format!(
            "binary failed: {}\n{}",
            output.status,
            String::from_utf8_lossy(&output.stderr)
        ));
    }
    let summary =
        std::fs::read_to_string(artifacts.join("summary.json")).map_err(|e| e.to_string())?;
    serde_json::from_str(&summary).map_err(|e| e.to_string())
}
