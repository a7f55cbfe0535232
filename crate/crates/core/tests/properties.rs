use std::f64::consts::PI;

use proptest::prelude::*;
use qmsp_core::quantum::{Amplitude, Ket};
use qmsp_core::*;

fn ket(q: &PureQubit) -> Ket {
    q.amplitudes()
}

proptest! {
    #[test]
    fn born_probabilities_sum_to_one(
        theta in 0.0..=PI, phi in 0.0..(2.0 * PI), alpha in 0.0..=PI, beta in 0.0..(2.0 * PI)
    ) {
        let meas = ProjectiveMeasurement::new(theta, phi).unwrap();
        let p = meas.born_probabilities(&PureQubit::new(alpha, beta).unwrap());
        prop_assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
        prop_assert!((p[0] + p[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn global_phase_is_unobservable(
        theta in 0.0..=PI, phi in 0.0..(2.0 * PI), alpha in 0.0..=PI, beta in 0.0..(2.0 * PI),
        gamma in 0.0..(2.0 * PI)
    ) {
        let meas = ProjectiveMeasurement::new(theta, phi).unwrap();
        let psi = ket(&PureQubit::new(alpha, beta).unwrap());
        let phase = Amplitude::polar(1.0, gamma);
        let rotated = [psi[0].mul(phase), psi[1].mul(phase)];
        let a = meas.born_probabilities_ket(&psi);
        let b = meas.born_probabilities_ket(&rotated);
        prop_assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
    }

    #[test]
    fn measurement_preserves_stationary_distribution(theta in 0.0..=PI, phi in 0.0..(2.0 * PI)) {
        let src = fixtures::fig2b();
        let measured = src.measure(&ProjectiveMeasurement::new(theta, phi).unwrap()).unwrap();
        let before = src.machine().stationary().as_slice().to_vec();
        let after = measured.stationary().as_slice().to_vec();
        for (a, b) in before.iter().zip(&after) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        let diff = (measured.summed() - src.machine().summed()).abs().max();
        prop_assert!(diff < 1e-12);
    }

    #[test]
    fn d_lce_nondecreasing_in_entropy_rate(
        l1 in -3.0f64..-0.01, gap in 0.0f64..3.0, h in 0.0f64..2.0, dh in 0.0f64..1.0
    ) {
        let exps = [l1, l1 - gap];
        let (_, lo) = d_lce(h, &exps, 3).unwrap();
        let (_, hi) = d_lce(h + dh, &exps, 3).unwrap();
        prop_assert!(hi + 1e-12 >= lo, "{lo} > {hi}");
        prop_assert!((0.0..=2.0).contains(&lo));
    }

    #[test]
    fn opposite_bases_swap_outcomes(phi in 0.0..(2.0 * PI)) {
        for src in [fixtures::fig2a(), fixtures::fig2b()] {
            let at_zero = src.measure(&ProjectiveMeasurement::new(0.0, phi).unwrap()).unwrap();
            let at_pi = src.measure(&ProjectiveMeasurement::new(PI, phi).unwrap()).unwrap();
            let swapped = at_pi.swap_symbols(0, 1);
            for x in 0..2 {
                let d = (at_zero.matrix(x) - swapped.matrix(x)).abs().max();
                prop_assert!(d < 1e-14, "{d}");
            }
        }
    }

    #[test]
    fn propagation_stays_on_simplex(word in prop::collection::vec(0usize..2, 0..60)) {
        let m = fixtures::two_state_nonunifilar();
        let eta = mixed_state_of_word(&m, &word).unwrap();
        prop_assert!((eta.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(eta.probs.iter().all(|&p| p >= 0.0));
    }
}

#[test]
fn d_lce_grid_monotone() {
    let exps = [-0.3, -0.9];
    let mut last = -1.0;
    for i in 0..=1000 {
        let (_, d) = d_lce(i as f64 * 0.0015, &exps, 3).unwrap();
        assert!(d >= last - 1e-12);
        last = d;
    }
}
