//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Run with `cargo test -p qmsp-cli --test acceptance`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use qmsp_cli::angles::linspace;
use qmsp_cli::sweep::{run_sweep, SweepConfig};
use qmsp_core::sampling::seeded_rng;
use qmsp_core::*;
use rand::Rng;

const THETA_A: f64 = 0.628;
const THETA_B: f64 = 1.634;
const THETA_C: f64 = 2.701;
const SEED: u64 = 2019;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn measured(src: &QubitHmm, theta: f64) -> LabeledHmm {
    src.measure(&ProjectiveMeasurement::new(theta, 0.0).unwrap()).unwrap()
}

fn max_diff(a: &LabeledHmm, b: &LabeledHmm) -> f64 {
    (0..a.alphabet_size())
        .map(|x| (a.matrix(x) - b.matrix(x)).abs().max())
        .fold(0.0, f64::max)
}

fn criterion_1() -> Outcome {
    let pi = fixtures::fig2a().machine().stationary().probs.clone();
    let err = pi
        .iter()
        .zip([0.5, 0.25, 0.25])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    outcome(err <= 1e-12, format!("pi = {pi:?}, max error {err:.1e}"))
}

fn criterion_2() -> Outcome {
    let m = fixtures::fig2a().machine().clone();
    let h = m.hmu_exact_unifilar().unwrap();
    let c = m.cmu_exact().unwrap();
    outcome(
        (h - 0.75).abs() <= 1e-12 && (c - 1.5).abs() <= 1e-12,
        format!("hmu = {h:.15}, Cmu = {c:.15}"),
    )
}

fn criterion_3() -> Outcome {
    let d = max_diff(&measured(&fixtures::fig2b(), FRAC_PI_2), &fixtures::fig2c());
    outcome(d <= 1e-12, format!("max entrywise difference {d:.1e}"))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let m = measured(&fixtures::fig2b(), FRAC_PI_4);
    let rows: Vec<Vec<f64>> = (0..m.num_states())
        .map(|i| (0..2).map(|x| m.matrix(x).row(i).sum()).collect())
        .collect();
    let spread = rows
        .iter()
        .flat_map(|r| r.iter().zip(&rows[0]).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    let est = iterate_trajectory(&m, &TrajectoryConfig::new(1_000_000, SEED)).unwrap();
    let target = binary_entropy((2.0 + 2f64.sqrt()) / 4.0);
    let elapsed = start.elapsed();
    outcome(
        spread <= 1e-12 && (est.hmu_b - target).abs() <= 0.002 && elapsed < Duration::from_secs(5),
        format!(
            "row spread {spread:.1e}; hmu_B = {:.5} ± {:.5} vs {target:.5}; {:.2?}",
            est.hmu_b, est.stderr, elapsed
        ),
    )
}

fn criterion_5() -> Outcome {
    let src = fixtures::fig2b();
    let m0 = measured(&src, 0.0);
    let swap = max_diff(&m0, &measured(&src, PI).swap_symbols(0, 1));
    match enumerate_msp(&m0, &MspConfig::default()).unwrap() {
        MspOutcome::Closed(p) => outcome(
            (p.cmu - 0.6813).abs() <= 5e-4 && swap <= 1e-12,
            format!(
                "closed with {} states ({} recurrent); recurrent Cmu = {:.4} (target 0.6813 ± 5e-4); \
                 MSP hmu = {:.4}; symbol-swap difference {swap:.1e}",
                p.num_states(),
                p.num_recurrent(),
                p.cmu,
                p.hmu
            ),
        ),
        MspOutcome::BudgetExceeded { states, .. } => {
            outcome(false, format!("enumeration did not close ({states} states)"))
        }
    }
}

fn criterion_6() -> Outcome {
    let m = measured(&fixtures::fig2b(), FRAC_PI_2);
    match enumerate_msp(&m, &MspConfig::default()) {
        Ok(MspOutcome::BudgetExceeded { states, frontier }) => {
            outcome(true, format!("budget exceeded at {states} states, frontier {frontier}"))
        }
        Ok(MspOutcome::Closed(p)) => outcome(false, format!("closed with {} states", p.num_states())),
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

struct InsetResult {
    theta: f64,
    report: DimensionReport,
    elapsed: Duration,
}

fn inset_reports() -> Vec<InsetResult> {
    let src = fixtures::fig2b();
    [THETA_A, THETA_B, THETA_C]
        .into_iter()
        .map(|theta| {
            let start = Instant::now();
            let report = dimension_report(
                &measured(&src, theta),
                &DimensionConfig::new(1_000_000, SEED).with_box_counting(),
            )
            .unwrap();
            InsetResult {
                theta,
                report,
                elapsed: start.elapsed(),
            }
        })
        .collect()
}

fn criterion_7(insets: &[InsetResult]) -> Outcome {
    let targets = [1.12, 1.18, 0.85];
    let mut pass = true;
    let mut parts = Vec::new();
    for (r, target) in insets.iter().zip(targets) {
        let d = r.report.d_bc.unwrap();
        let ok = (d - target).abs() <= 0.1 && r.elapsed < Duration::from_secs(30);
        pass &= ok;
        parts.push(format!(
            "θ={}: d_bc {:.3} vs {target} (support count slope {:.3}; {:.1?})",
            r.theta,
            d,
            r.report.bc_fit.as_ref().unwrap().d_capacity,
            r.elapsed
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_8(insets: &[InsetResult]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for r in insets {
        let (dl, db) = (r.report.d_lce, r.report.d_bc.unwrap());
        if r.theta == THETA_B {
            parts.push(format!(
                "θ={}: d_lce {dl:.3} vs d_bc {db:.3} (strict bound expected; open-set flag {})",
                r.theta, r.report.open_set_flag
            ));
        } else {
            let ok = dl >= db - 0.1;
            pass &= ok;
            parts.push(format!("θ={}: d_lce {dl:.3} >= d_bc - 0.1 = {:.3}: {ok}", r.theta, db - 0.1));
        }
    }
    outcome(pass, parts.join("; "))
}

fn criterion_9() -> Outcome {
    let fig2a = fixtures::fig2a();
    let machines = vec![
        ("fig2a", fig2a.machine().clone()),
        ("fig2a@0", measured(&fig2a, 0.0)),
        ("golden_mean", fixtures::golden_mean()),
        ("fair_coin", fixtures::biased_coin(0.5)),
        ("coin(0.2)", fixtures::biased_coin(0.2)),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, (name, m)) in machines.iter().enumerate() {
        if !m.is_unifilar().unifilar {
            pass = false;
            parts.push(format!("{name}: not unifilar"));
            continue;
        }
        let exact = m.hmu_exact_unifilar().unwrap();
        let blackwell = iterate_trajectory(m, &TrajectoryConfig::new(1_000_000, SEED + i as u64))
            .unwrap()
            .hmu_b;
        let seq = sample_sequence(m, 10_000_000, SEED + 100 + i as u64, false).unwrap();
        let block = block_entropy_estimate(&seq.symbols, m.alphabet_size(), 10)
            .unwrap()
            .last_increment();
        let spread = [exact, blackwell, block].iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
            - [exact, blackwell, block].iter().fold(f64::INFINITY, |a, &b| a.min(b));
        pass &= spread <= 0.01;
        parts.push(format!("{name}: exact {exact:.4}, B {blackwell:.4}, block {block:.4}"));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_10() -> Outcome {
    let mut rng = seeded_rng(SEED);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let n = 2 + trial % 4;
        let mut mats: Vec<DMatrix<f64>> = (0..2)
            .map(|_| DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() + 0.01))
            .collect();
        for i in 0..n {
            let total: f64 = mats.iter().map(|t| t.row(i).sum()).sum();
            for t in mats.iter_mut() {
                for j in 0..n {
                    t[(i, j)] /= total;
                }
            }
        }
        let m = RawMachine {
            state_ids: (0..n).map(|i| i.to_string()).collect(),
            alphabet: vec!["0".into(), "1".into()],
            matrices: mats,
        }
        .validate()
        .unwrap();
        let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.05).collect();
        let total: f64 = raw.iter().sum();
        let eta: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let x = rng.random_range(0..2);
        let t = m.matrix(x);
        let update = |e: &[f64]| -> Vec<f64> {
            let img: Vec<f64> = (0..n).map(|j| (0..n).map(|i| e[i] * t[(i, j)]).sum()).collect();
            let s: f64 = img.iter().sum();
            img.into_iter().map(|v| v / s).collect()
        };
        let j = ifs_jacobian(&MixedState::new(eta.clone()).unwrap(), x, &m).unwrap();
        for i in 0..n {
            let (mut up, mut down) = (eta.clone(), eta.clone());
            up[i] += h;
            down[i] -= h;
            let (fu, fd) = (update(&up), update(&down));
            for k in 0..n {
                worst = worst.max(((fu[k] - fd[k]) / (2.0 * h) - j[(i, k)]).abs());
            }
        }
    }
    let chain = DMatrix::from_row_slice(2, 2, &[0.75, 0.25, 0.25, 0.75]);
    let lambda = lce_spectrum(&fixtures::constant_map(&chain), &LceConfig::new(100_000, SEED))
        .unwrap()
        .exponents[0];
    outcome(
        worst <= 1e-6 && (lambda + 1.0).abs() <= 1e-10,
        format!("worst finite-difference gap {worst:.1e}; constant-map lambda_1 = {lambda:.12}"),
    )
}

fn criterion_11() -> Outcome {
    let start = Instant::now();
    let config = SweepConfig {
        thetas: linspace(0.0, PI, 500),
        phi: 0.0,
        length: 1_000_000,
        burn_in: 1_000,
        seed: SEED,
        decimation: 1,
        box_counting: false,
        keep_clouds: false,
        msp: true,
        merge_tol: 1e-9,
        max_states: 10_000,
        workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let results = run_sweep(&fixtures::fig2b(), &config).unwrap();
    let elapsed = start.elapsed();
    let rows: Vec<_> = results.iter().map(|r| &r.row).collect();
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    let h: Vec<f64> = rows.iter().map(|r| r.hmu_b.unwrap_or(f64::NAN)).collect();
    let s: Vec<f64> = rows.iter().map(|r| r.hmu_stderr.unwrap_or(f64::NAN)).collect();
    let (first, last) = (h[0], h[h.len() - 1]);
    let tol = 2.0 * (s[0].powi(2) + s[s.len() - 1].powi(2)).sqrt();
    let jump = h.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    let pass = failed == 0
        && (first - last).abs() <= tol
        && jump < 0.02
        && elapsed < Duration::from_secs(600);
    outcome(
        pass,
        format!(
            "{} angles in {:.1?} ({} workers), {failed} failed; h(0) = {first:.5}, h(pi) = {last:.5}, \
             |diff| {:.1e} vs 2*stderr {tol:.1e}; largest adjacent step {jump:.4}",
            rows.len(),
            elapsed,
            config.workers,
            (first - last).abs()
        ),
    )
}

fn main() {
    // `cargo test` passes harness flags such as `--nocapture`; listing mode
    // must not run the suite.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut results: Vec<(usize, &str, Outcome)> = vec![
        (1, "stationary distribution of the three-state generator", criterion_1()),
        (2, "exact generator entropy rate and complexity", criterion_2()),
        (3, "measurement at pi/2 reproduces the nonunifilar fixture", criterion_3()),
        (4, "i.i.d. degeneracy at pi/4", criterion_4()),
        (5, "finite mixed-state presentation at theta = 0", criterion_5()),
        (6, "budget signal at pi/2", criterion_6()),
    ];
    let insets = inset_reports();
    results.push((7, "box-counting dimension at the inset angles", criterion_7(&insets)));
    results.push((8, "d_lce bounds d_bc", criterion_8(&insets)));
    results.push((9, "entropy-rate estimator cross-validation", criterion_9()));
    results.push((10, "Jacobian and constant-map exponent", criterion_10()));
    results.push((11, "500-angle sweep", criterion_11()));

    let mut failures = 0;
    for (id, name, o) in &results {
        if !o.pass {
            failures += 1;
        }
        println!("{} [{id:>2}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {}/{} criteria passed", results.len() - failures, results.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
