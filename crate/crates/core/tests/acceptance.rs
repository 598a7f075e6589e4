//! Acceptance gate: one test per release criterion. Each prints a
//! `criterion N: PASS/FAIL` line with the measured numbers (visible under
//! `--nocapture`) before asserting, so a red criterion still reports what
//! it saw.

use std::fmt::Write as _;
use std::fs;
use std::process::Command;
use std::time::Instant;

use jjbus::analysis::{compare_spectra, deviation_threshold, doublet_splittings, fidelity_report};
use jjbus::bands::{band_sweep, bandwidth, ha_bandwidth_estimate, hf_integrand};
use jjbus::eigen::{eigh, eigh_dense, residuals_dense, sector_spectrum, DenseMatrix};
use jjbus::model::{
    build_hamiltonian, gauge_transform, ChargeGrid, JunctionParams, SpinSector,
};
use jjbus::variational::{
    energy_functional, ha_parameters, ha_spectrum, optimize_parameters, trial_wavefunction, Well,
};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use tempfile::TempDir;

fn report(n: usize, ok: bool, measured: &str) {
    println!("criterion {n}: {} — {measured}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n}: {measured}");
}

#[test]
fn criterion_01_closed_form_ground_levels() {
    let e_sym = ha_spectrum(&JunctionParams::new(100.0, 0.0).unwrap(), 1).unwrap()[0].energy;
    let e_cpl = ha_spectrum(&JunctionParams::new(100.0, 60.0).unwrap(), 1).unwrap()[0].energy;
    let ok = (e_sym - -92.928932).abs() < 1e-6 && (e_cpl - -97.508934).abs() < 1e-6;
    report(
        1,
        ok,
        &format!("ha m=0 levels {e_sym:.9} (target -92.928932), {e_cpl:.9} (target -97.508934)"),
    );
}

#[test]
fn criterion_02_ladder_tracks_low_doublets() {
    let mut ok = true;
    let mut measured = String::new();
    for tp in [0.0, 60.0] {
        let started = Instant::now();
        let p = JunctionParams::new(100.0, tp).unwrap();
        let grid = ChargeGrid::new(40, 0.0).unwrap();
        let s = sector_spectrum(&p, &grid, SpinSector::Plus).unwrap();
        let table = compare_spectra(&s, &p, 8).unwrap();
        let elapsed = started.elapsed().as_secs_f64();

        let worst_low = table.rows[..4]
            .iter()
            .map(|r| r.abs_dev)
            .fold(0.0f64, f64::max);
        let grows = table.rows.windows(2).all(|w| w[1].abs_dev > w[0].abs_dev);
        let th = deviation_threshold(&table, 0.25).expect("threshold exists");
        let near_zero = th.energy.abs() <= 2.0 * table.omega;

        ok &= worst_low <= 0.3 && grows && near_zero && elapsed <= 1.0;
        let _ = write!(
            measured,
            "[t'={tp}: max dev(m<4) = {worst_low:.4} (limit 0.3), grows = {grows}, |E*| = {:.3} vs 2w = {:.3}, {elapsed:.2} s] ",
            th.energy.abs(),
            2.0 * table.omega
        );
    }
    report(2, ok, measured.trim());
}

#[test]
fn criterion_03_spin_sectors_are_isospectral() {
    let p = JunctionParams::new(100.0, 60.0).unwrap();
    let grid = ChargeGrid::new(40, 0.0).unwrap();
    let plus = sector_spectrum(&p, &grid, SpinSector::Plus).unwrap();
    let minus = sector_spectrum(&p, &grid, SpinSector::Minus).unwrap();
    let max_diff = plus
        .eigenvalues
        .iter()
        .zip(minus.eigenvalues.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    report(3, max_diff < 1e-10, &format!("max |E+ - E-| = {max_diff:.3e} over {} levels", plus.dim()));
}

#[test]
fn criterion_04_optimum_sits_on_the_closed_form() {
    let mut ok = true;
    let mut measured = String::new();
    for tp in [0.0, 60.0] {
        let p = JunctionParams::new(100.0, tp).unwrap();
        let seed = ha_parameters(&p).unwrap();
        let o = optimize_parameters(&p, 0).unwrap();

        let da = (o.alpha - seed.alpha).abs() / seed.alpha;
        let db = if seed.beta == 0.0 {
            o.beta.abs()
        } else {
            (o.beta - seed.beta).abs() / seed.beta
        };
        let h = 1e-5;
        let ga = (energy_functional(&p, 0, o.alpha + h, o.beta)
            - energy_functional(&p, 0, o.alpha - h, o.beta))
            / (2.0 * h);
        let gb = (energy_functional(&p, 0, o.alpha, o.beta + h)
            - energy_functional(&p, 0, o.alpha, o.beta - h))
            / (2.0 * h);
        let grad = ga.abs().max(gb.abs());

        ok &= da <= 0.01 && db <= 0.01 && grad <= 1e-6;
        let _ = write!(
            measured,
            "[t'={tp}: d_alpha = {:.3}%, d_beta = {:.3}%, |grad| = {grad:.2e}] ",
            100.0 * da,
            100.0 * db
        );
    }
    report(4, ok, measured.trim());
}

#[test]
fn criterion_05_band_width_dichotomy() {
    let estimate = ha_bandwidth_estimate();
    let exact_quarter = estimate == 0.25;

    let p = JunctionParams::new(100.0, 0.0).unwrap();
    let b = band_sweep(&p, 40, 2, 17).unwrap();
    let width = bandwidth(&b, 0).unwrap();

    // both numbers surface in the bands artifacts
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_jjbus"))
        .args([
            "bands", "--t", "100", "--n-max", "40", "--m-count", "1", "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .expect("binary should spawn");
    let json = fs::read_to_string(dir.path().join("bands.json")).unwrap_or_default();
    let in_output = out.status.success()
        && json.contains("\"ha_estimate\": 2.50000000000e-1")
        && json.contains("\"width\": ");

    // slope identity at a shallow well and finite offset
    let p2 = JunctionParams::new(2.0, 0.0).unwrap();
    let e0 = |k: f64| {
        let grid = ChargeGrid::new(6, k).unwrap();
        sector_spectrum(&p2, &grid, SpinSector::Plus).unwrap().eigenvalues[0]
    };
    let h = 1e-3;
    let fd = (e0(0.2 + h) - e0(0.2 - h)) / (2.0 * h);
    let grid = ChargeGrid::new(6, 0.2).unwrap();
    let s = sector_spectrum(&p2, &grid, SpinSector::Plus).unwrap();
    let integrand = hf_integrand(&s.eigenvectors[0], &grid);
    let hf_diff = (fd - integrand).abs();

    let ok = exact_quarter && width < 1e-6 && in_output && hf_diff <= 1e-4;
    report(
        5,
        ok,
        &format!(
            "estimate = {estimate} (exact 1/4: {exact_quarter}), width = {width:.2e} (limit 1e-6), artifacts: {in_output}, |dE/dk - <2(n+k)>| = {hf_diff:.2e}"
        ),
    );
}

#[test]
fn criterion_06_trial_states_span_the_doublets() {
    let p = JunctionParams::new(100.0, 60.0).unwrap();
    let grid = ChargeGrid::new(40, 0.0).unwrap();
    let s = sector_spectrum(&p, &grid, SpinSector::Plus).unwrap();
    let fids = fidelity_report(&s, &p, 3).unwrap().fidelities;
    let min_fid = fids.iter().copied().fold(f64::INFINITY, f64::min);

    let p0 = JunctionParams::new(100.0, 0.0).unwrap();
    let s0 = sector_spectrum(&p0, &grid, SpinSector::Plus).unwrap();
    let mut min_overlap = f64::INFINITY;
    for m in 0..3 {
        let left = trial_wavefunction(&p0, m, Well::Left, &grid).unwrap();
        let project = |i: usize| -> f64 {
            let v = s0.charge_state(i);
            let c: Complex64 = v
                .iter()
                .zip(left.amplitudes.iter())
                .map(|(&x, &y)| x.conj() * y)
                .sum();
            c.norm_sqr()
        };
        min_overlap = min_overlap.min(project(2 * m) + project(2 * m + 1));
    }

    let ok = min_fid >= 0.99 && min_overlap >= 0.99;
    report(
        6,
        ok,
        &format!(
            "t'=60 span fidelities {:?} (min {min_fid:.6}), t'=0 min overlap {min_overlap:.6}, limit 0.99",
            fids.iter().map(|f| (f * 1e6).round() / 1e6).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_07_tunnelling_freezes_out() {
    let p = JunctionParams::new(100.0, 60.0).unwrap();
    let grid = ChargeGrid::new(40, 0.0).unwrap();
    let s = sector_spectrum(&p, &grid, SpinSector::Plus).unwrap();
    let split = doublet_splittings(&s, 1).unwrap()[0];

    let chain: Vec<f64> = [25.0, 50.0, 100.0]
        .into_iter()
        .map(|t| {
            let p = JunctionParams::new(t, 0.6 * t).unwrap();
            let grid = ChargeGrid::new(p.default_n_max(), 0.0).unwrap();
            let s = sector_spectrum(&p, &grid, SpinSector::Plus).unwrap();
            doublet_splittings(&s, 1).unwrap()[0]
        })
        .collect();
    let monotone = chain[1] < chain[0] && chain[2] < chain[1];

    let ok = split < 1e-6 && monotone;
    report(
        7,
        ok,
        &format!("split(100, 60) = {split:.2e} (limit 1e-6), chain {chain:?} monotone: {monotone}"),
    );
}

#[test]
fn criterion_08_eigensolver_soundness() {
    let started = Instant::now();

    // hand-solved 3x3: t = 2, t' = 4 on the charge points {-1/2, 0, 1/2}
    let p3 = JunctionParams::new(2.0, 4.0).unwrap();
    let g3 = ChargeGrid::with_half_steps(1, 0.0).unwrap();
    let s3 = eigh(&gauge_transform(&build_hamiltonian(&p3, &g3, SpinSector::Plus))).unwrap();
    let hand = [-2.27166, -0.75, 3.52166];
    let hand_err = s3
        .eigenvalues
        .iter()
        .zip(hand.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);

    let mut worst_rel = 0.0f64;
    for (d, seed) in [(50usize, 11u64), (200, 12), (500, 13)] {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut m = DenseMatrix::zeros(d);
        for i in 0..d {
            for j in 0..=i {
                let v: f64 = rng.random_range(-1.0..1.0);
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        let s = eigh_dense(&m).unwrap();
        let rep = residuals_dense(&m, &s);
        worst_rel = worst_rel
            .max(rep.max_residual / rep.matrix_norm)
            .max(rep.max_orthonormality_defect / rep.matrix_norm);
    }
    let elapsed = started.elapsed().as_secs_f64();

    let ok = hand_err < 1e-5 && worst_rel <= 1e-10 && elapsed <= 10.0;
    report(
        8,
        ok,
        &format!(
            "3x3 error {hand_err:.2e} (limit 1e-5), worst defect/norm {worst_rel:.2e} (limit 1e-10) up to d = 500, {elapsed:.2} s"
        ),
    );
}

#[test]
fn criterion_09_cutoff_doubling_is_converged() {
    let p = JunctionParams::new(100.0, 60.0).unwrap();
    let solve = |n_max: u32| {
        let grid = ChargeGrid::new(n_max, 0.0).unwrap();
        sector_spectrum(&p, &grid, SpinSector::Plus).unwrap().eigenvalues
    };
    let a = solve(40);
    let b = solve(80);
    let drift = (0..8)
        .map(|i| (a[i] - b[i]).abs())
        .fold(0.0f64, f64::max);
    report(9, drift < 1e-10, &format!("max drift of lowest 8 levels, n_max 40 -> 80: {drift:.2e}"));
}

#[test]
fn criterion_10_artifacts_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "t = 100\nt_prime = 60\nn_max = 20\nk_count = 5\nm_count = 3\n").unwrap();

    let artifacts = [
        ("spectrum", vec!["spectrum.csv", "summary.json"]),
        ("wavefunctions", vec!["wavefunctions.csv"]),
        ("bands", vec!["bands.csv", "bands.json"]),
        ("compare", vec!["deviations.csv", "threshold.json"]),
    ];

    let mut ok = true;
    let mut compared = 0usize;
    for (cmd, files) in &artifacts {
        let mut snapshots: Vec<Vec<Vec<u8>>> = Vec::new();
        for pass in 0..2 {
            let out_dir = dir.path().join(format!("{cmd}-{pass}"));
            let out = Command::new(env!("CARGO_BIN_EXE_jjbus"))
                .args([
                    *cmd,
                    "--config",
                    cfg.to_str().unwrap(),
                    "--out",
                    out_dir.to_str().unwrap(),
                ])
                .output()
                .expect("binary should spawn");
            assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
            snapshots.push(
                files
                    .iter()
                    .map(|f| fs::read(out_dir.join(f)).expect("artifact written"))
                    .collect(),
            );
        }
        for (f, (a, b)) in files.iter().zip(snapshots[0].iter().zip(snapshots[1].iter())) {
            ok &= a == b;
            compared += 1;
            if a != b {
                println!("criterion 10: {f} differs between reruns of {cmd}");
            }
        }
    }
    report(10, ok, &format!("{compared} artifacts byte-compared across reruns of all four commands"));
}
