mod common;

use common::{mcd_exhaustive, mcd_metric_direct, msd_exhaustive, msd_metric_direct, spec};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use relaysim::channel::{generate_trace, ChannelTrace};
use relaysim::detection::{
    build_mcdsd_covariance, build_msdsd_covariance, cdd_detect, dbpsk_sign_decision, decision_variable,
    dstc_two_codeword_detect, linear_combine, mcdsd_dstc, mcdsd_metric, mcdsd_stream, msdsd_dualhop,
    msdsd_dualhop_sequence, msdsd_metric, msdsd_stream, select_combine, select_combine_real, semi_mrc_weights,
    semi_mrc_weights_general, tvd_weights, CombinerWeights, CovarianceModel,
};
use relaysim::modem::{min_distance_detect, PskConstellation, UnitaryCodebook};
use relaysim::relaylink::{alamouti_combiners, complex_noise, simulate_dstc, simulate_dualhop, LinkBudget};
use relaysim::rng::{child_seed, substream};
use relaysim::Error;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Noisy dual-hop window carrying `n − 1` random differential symbols.
fn dualhop_window(
    n: usize,
    f: (f64, f64),
    snr_db: f64,
    constellation: &PskConstellation,
    seed: u64,
) -> (Vec<Complex64>, Vec<usize>, LinkBudget, f64) {
    let budget = LinkBudget::dual_hop(10f64.powf(snr_db / 10.0), 0.3, 1.0).unwrap();
    let amp = budget.amp_factor_of(0, 1.0);
    let mut rng = substream(seed, &[0]);
    let data: Vec<usize> = (0..n - 1).map(|_| rng.random_range(0..constellation.order())).collect();
    let tx: Vec<Complex64> = constellation
        .diff_encode_indices(&data)
        .into_iter()
        .map(|i| constellation.point(i))
        .collect();
    let t1 = generate_trace(&spec(1.0, f.0), n, child_seed(seed, &[1])).unwrap();
    let t2 = generate_trace(&spec(1.0, f.1), n, child_seed(seed, &[2])).unwrap();
    let y = simulate_dualhop(&t1, &t2, &tx, &budget, amp, child_seed(seed, &[3])).unwrap();
    (y, data, budget, amp)
}

/// Noisy DSTC window of `n` blocks carrying `n − 1` random codewords.
fn dstc_window(
    n: usize,
    f: (f64, f64),
    power: f64,
    codebook: &UnitaryCodebook,
    seed: u64,
) -> (Vec<DVector<Complex64>>, Vec<usize>, CovarianceModel) {
    let sr = spec(1.0, f.0).with_lag_multiplier(2).unwrap();
    let rd = spec(1.0, f.1).with_lag_multiplier(2).unwrap();
    let budget = LinkBudget::split(power, 0.5, 2, 1.0).unwrap();
    let gain = budget.amp_factor_of(0, 1.0);
    let cov = build_mcdsd_covariance(&sr, &rd, budget.source_power, gain, 2, 1.0, n).unwrap();
    let mut rng = substream(seed, &[0]);
    let data: Vec<usize> = (0..n - 1).map(|_| rng.random_range(0..codebook.len())).collect();
    let tx = codebook.diff_encode_matrix(&data).unwrap();
    let srs: Vec<ChannelTrace> = (0..2).map(|i| generate_trace(&sr, n, child_seed(seed, &[1, i])).unwrap()).collect();
    let rds: Vec<ChannelTrace> = (0..2).map(|i| generate_trace(&rd, n, child_seed(seed, &[2, i])).unwrap()).collect();
    let y = simulate_dstc(&srs, &rds, &tx, &budget, &alamouti_combiners(), gain, child_seed(seed, &[3])).unwrap();
    (y, data, cov)
}

fn static_cov(n: usize) -> CovarianceModel {
    let s = spec(1.0, 0.0);
    build_msdsd_covariance(&s, &s, 100.0, 1.0, 1.0, n).unwrap()
}

#[test]
fn cdd_examples() {
    let bpsk = PskConstellation::new(2).unwrap();
    let idx = cdd_detect(c(1.0, 0.0), c(-1.0, 0.0), &bpsk);
    assert!((bpsk.point(idx) - c(-1.0, 0.0)).norm() < 1e-12);
    assert_eq!(decision_variable(c(0.0, 1.0), c(1.0, 0.0)), c(0.0, -1.0));
}

#[test]
fn cdd_matches_brute_force_and_slicer() {
    let mut rng = substream(1, &[10]);
    for m in [2, 4, 8] {
        let psk = PskConstellation::new(m).unwrap();
        for _ in 0..10_000 {
            let (a, b) = (complex_noise(&mut rng, 1.0), complex_noise(&mut rng, 1.0));
            let got = cdd_detect(a, b, &psk);
            let brute = (0..m)
                .min_by(|&i, &j| {
                    let di = (b - psk.point(i) * a).norm_sqr();
                    let dj = (b - psk.point(j) * a).norm_sqr();
                    di.total_cmp(&dj)
                })
                .unwrap();
            assert_eq!(got, brute);
            assert_eq!(psk.point(got), min_distance_detect(a.conj() * b, &psk));
        }
    }
}

#[test]
fn semi_mrc_weight_examples() {
    let w = semi_mrc_weights(&[1.0], &[1.0]).unwrap();
    assert_eq!((w.b0, w.b.clone()), (0.5, vec![0.25]));
    let small = semi_mrc_weights(&[1e-9], &[1.0]).unwrap();
    assert!((small.b[0] - 0.5).abs() < 1e-12);
    let three = semi_mrc_weights(&[0.7; 3], &[1.0; 3]).unwrap();
    assert!(three.b.iter().all(|&b| b == three.b[0]));
    let general = semi_mrc_weights_general(&[0.8], &[2.0], 4.0).unwrap();
    assert!((general.b0 - 0.25).abs() < 1e-15);
    assert!((general.b[0] - 1.0 / (4.0 * (1.0 + 0.64 * 2.0))).abs() < 1e-15);
    assert!(matches!(semi_mrc_weights(&[1.0, 1.0], &[1.0]), Err(Error::Argument(_))));
    w.validate().unwrap();
}

#[test]
fn tvd_weight_examples() {
    let amps = [0.3, 1.0, 2.5];
    let tvd = tvd_weights(1.0, &[1.0; 3], &amps, 123.0).unwrap();
    let semi = semi_mrc_weights(&amps, &[1.0; 3]).unwrap();
    assert!((tvd.b0 - semi.b0).abs() < 1e-12);
    for (a, b) in tvd.b.iter().zip(&semi.b) {
        assert!((a - b).abs() < 1e-12);
    }
    let zero = tvd_weights(0.9, &[0.0], &[1.0], 10.0).unwrap();
    assert_eq!(zero.b[0], 0.0);
    let huge = tvd_weights(0.99, &[0.99], &[1.0], 1e12).unwrap();
    assert!(huge.b[0] < 1e-10 && huge.b0 < 1e-10);
    assert!(tvd_weights(1.2, &[1.0], &[1.0], 1.0).is_err());
    assert!(tvd_weights(1.0, &[-0.1], &[1.0], 1.0).is_err());
    assert!(tvd_weights(1.0, &[1.0, 1.0], &[1.0], 1.0).is_err());
}

#[test]
fn weight_validation() {
    let bad = CombinerWeights {
        b0: 0.5,
        b: vec![-1.0],
    };
    assert!(bad.validate().is_err());
    let nan = CombinerWeights {
        b0: f64::NAN,
        b: vec![],
    };
    assert!(nan.validate().is_err());
}

#[test]
fn linear_combine_examples() {
    let z0 = c(0.4, -1.2);
    let single = CombinerWeights { b0: 1.0, b: vec![] };
    assert_eq!(linear_combine(&[z0], &single).unwrap(), z0);
    let zeros = CombinerWeights {
        b0: 0.0,
        b: vec![0.0, 0.0],
    };
    assert_eq!(linear_combine(&[z0, z0, z0], &zeros).unwrap(), c(0.0, 0.0));
    let w = CombinerWeights {
        b0: 0.5,
        b: vec![0.25],
    };
    assert_eq!(linear_combine(&[c(2.0, 0.0), c(0.0, 4.0)], &w).unwrap(), c(1.0, 1.0));
    assert!(matches!(linear_combine(&[z0], &w), Err(Error::Argument(_))));
}

#[test]
fn weight_scaling_leaves_decisions_unchanged() {
    let psk = PskConstellation::new(4).unwrap();
    let mut rng = substream(2, &[20]);
    for _ in 0..10_000 {
        let vars = [complex_noise(&mut rng, 1.0), complex_noise(&mut rng, 1.0), complex_noise(&mut rng, 1.0)];
        let w = CombinerWeights {
            b0: rng.random_range(0.0..1.0),
            b: vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)],
        };
        let lambda = rng.random_range(0.01..100.0);
        let scaled = CombinerWeights {
            b0: w.b0 * lambda,
            b: w.b.iter().map(|b| b * lambda).collect(),
        };
        let a = psk.min_distance_detect(linear_combine(&vars, &w).unwrap());
        let b = psk.min_distance_detect(linear_combine(&vars, &scaled).unwrap());
        assert_eq!(a, b);
    }
}

#[test]
fn selection_combining_examples() {
    assert_eq!(select_combine(c(2.0, 0.0), c(0.0, 1.0)), c(2.0, 0.0));
    assert_eq!(select_combine(c(0.1, 0.0), c(0.0, -1.0)), c(0.0, -1.0));
    assert_eq!(select_combine(c(1.0, 0.0), c(0.0, 1.0)), c(1.0, 0.0));
    assert_eq!(select_combine_real(0.5, -0.5), 0.5);
    assert_eq!(select_combine_real(0.2, -0.3), -0.3);
    assert_eq!(dbpsk_sign_decision(-0.3), 1);
    assert_eq!(dbpsk_sign_decision(0.3), 0);
    let bpsk = PskConstellation::new(2).unwrap();
    assert!((bpsk.point(dbpsk_sign_decision(-0.3)) - c(-1.0, 0.0)).norm() < 1e-12);
}

#[test]
fn msdsd_covariance_examples() {
    let unit = spec(1.0, 0.0);
    let (p0, amp, n0) = (3.0, 0.8, 1.5);
    let cov = build_msdsd_covariance(&unit, &unit, p0, amp, n0, 2).unwrap();
    let a2 = amp * amp;
    let expected = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]) * (a2 * p0)
        + DMatrix::identity(2, 2) * ((1.0 + a2) * n0);
    assert!((cov.matrix.clone() - expected).amax() < 1e-12);

    let (s1, s2) = (spec(2.0, 0.01), spec(0.5, 0.03));
    let cov = build_msdsd_covariance(&s1, &s2, p0, amp, n0, 6).unwrap();
    let diag = a2 * p0 * 2.0 * 0.5 + (1.0 + a2 * 0.5) * n0;
    for i in 0..6 {
        assert!((cov.matrix[(i, i)] - diag).abs() < 1e-12);
    }
    let lag2 = a2 * p0 * s1.normalized_autocorr(2) * 2.0 * s2.normalized_autocorr(2) * 0.5;
    assert!((cov.matrix[(1, 3)] - lag2).abs() < 1e-12);
    assert!(matches!(build_msdsd_covariance(&s1, &s2, p0, amp, n0, 1), Err(Error::Argument(_))));
}

#[test]
fn covariance_factorization_residual() {
    let mut rng = substream(3, &[30]);
    for _ in 0..50 {
        let s1 = spec(rng.random_range(0.1..5.0), rng.random_range(0.0..0.2));
        let s2 = spec(rng.random_range(0.1..5.0), rng.random_range(0.0..0.2));
        let cov = build_msdsd_covariance(&s1, &s2, rng.random_range(1.0..1e4), rng.random_range(0.1..2.0), 1.0, 10)
            .unwrap();
        assert!(cov.residual() < 1e-8, "residual {}", cov.residual());
        assert_eq!(cov.dimension, 10);
        let sub = cov.leading(4).unwrap();
        assert_eq!(sub.matrix, cov.matrix.view((0, 0), (4, 4)).into_owned());
    }
    let not_pd = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
    assert!(matches!(CovarianceModel::new(not_pd), Err(Error::Model(_))));
    let asym = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 2.0]);
    assert!(CovarianceModel::new(asym).is_err());
    assert!(static_cov(3).leading(4).is_err());
}

#[test]
fn mcdsd_covariance_entries() {
    let sr = spec(1.0, 0.01).with_lag_multiplier(2).unwrap();
    let rd = spec(2.0, 0.02).with_lag_multiplier(2).unwrap();
    let (p0, gain, n0) = (10.0, 0.4, 1.0);
    let cov = build_mcdsd_covariance(&sr, &rd, p0, gain, 2, n0, 4).unwrap();
    let g2 = gain * gain;
    let diag = g2 * p0 * 2.0 * 2.0 + n0 * (1.0 + g2 * 2.0 * 2.0);
    assert!((cov.matrix[(0, 0)] - diag).abs() < 1e-12);
    let base_sr = spec(1.0, 0.01);
    let base_rd = spec(2.0, 0.02);
    let lag1 = g2 * p0 * 2.0 * base_sr.normalized_autocorr(2) * 2.0 * base_rd.normalized_autocorr(2);
    assert!((cov.matrix[(0, 1)] - lag1).abs() < 1e-12);
    assert!(cov.residual() < 1e-8);
}

#[test]
fn msdsd_matches_exhaustive_search() {
    let bpsk = PskConstellation::new(2).unwrap();
    let qpsk = PskConstellation::new(4).unwrap();
    for (n, psk, f) in [(3, &bpsk, (0.001, 0.001)), (4, &bpsk, (0.05, 0.05)), (3, &qpsk, (0.02, 0.01)), (4, &qpsk, (0.001, 0.001))] {
        let cov_for = |budget: &LinkBudget, amp: f64| {
            build_msdsd_covariance(&spec(1.0, f.0), &spec(1.0, f.1), budget.source_power, amp, 1.0, n).unwrap()
        };
        for w in 0..1000u64 {
            let (y, _, budget, amp) = dualhop_window(n, f, 20.0, psk, child_seed(40, &[n as u64, w]));
            let cov = cov_for(&budget, amp);
            let cinv = cov.matrix.clone().try_inverse().unwrap();
            let (seq, stats) = msdsd_dualhop_sequence(&y, &cov, psk).unwrap();
            assert_eq!(seq, msd_exhaustive(&y, &cinv, psk), "N = {n}, M = {}, window {w}", psk.order());
            assert!(stats.nodes_visited > 0);
            let s: Vec<Complex64> = seq.iter().map(|&i| psk.point(i)).collect();
            let direct = msd_metric_direct(&y, &cinv, &s);
            assert!((msdsd_metric(&y, &cov, psk, &seq) - direct).abs() <= 1e-8 * direct.max(1.0));
        }
    }
}

#[test]
fn msdsd_window_of_two_agrees_with_cdd() {
    let bpsk = PskConstellation::new(2).unwrap();
    let mut agree = 0;
    let windows = 10_000u64;
    for w in 0..windows {
        let (y, _, budget, amp) = dualhop_window(2, (0.001, 0.001), 30.0, &bpsk, child_seed(41, &[w]));
        let cov = build_msdsd_covariance(&spec(1.0, 0.001), &spec(1.0, 0.001), budget.source_power, amp, 1.0, 2)
            .unwrap();
        if msdsd_dualhop(&y, &cov, &bpsk).unwrap()[0] == cdd_detect(y[0], y[1], &bpsk) {
            agree += 1;
        }
    }
    assert!(agree as f64 >= 0.99 * windows as f64, "{agree}/{windows}");
}

#[test]
fn msdsd_noiseless_recovery() {
    for m in [2, 4, 8] {
        let psk = PskConstellation::new(m).unwrap();
        let cov = static_cov(4);
        let cinv = cov.matrix.clone().try_inverse().unwrap();
        let h = c(0.7, -1.1);
        for start in 0..m {
            let data = vec![start, (start + 1) % m, (start + m - 1) % m];
            let idx = psk.diff_encode_indices(&data);
            let y: Vec<Complex64> = idx.iter().map(|&i| h * psk.point(i)).collect();
            assert_eq!(msdsd_dualhop(&y, &cov, &psk).unwrap(), data);
            // The transmitted sequence minimizes the metric over all anchored rivals.
            let truth: Vec<Complex64> = idx.iter().map(|&i| psk.point(i) * psk.point(idx[0]).conj()).collect();
            let best = msd_exhaustive(&y, &cinv, &psk);
            let best_s: Vec<Complex64> = best.iter().map(|&i| psk.point(i)).collect();
            assert!(msd_metric_direct(&y, &cinv, &truth) <= msd_metric_direct(&y, &cinv, &best_s) + 1e-9);
        }
    }
}

#[test]
fn msdsd_stream_decodes_with_overlapping_windows() {
    let psk = PskConstellation::new(4).unwrap();
    let data: Vec<usize> = (0..23).map(|k| (k * 5 + 1) % 4).collect();
    let h = c(-0.4, 0.9);
    let y: Vec<Complex64> = psk.diff_encode_indices(&data).into_iter().map(|i| h * psk.point(i)).collect();
    for n in [2, 3, 5, 10] {
        assert_eq!(msdsd_stream(&y, &static_cov(n), &psk).unwrap(), data, "N = {n}");
    }
    assert!(matches!(msdsd_dualhop(&y[..3], &static_cov(4), &psk), Err(Error::Argument(_))));
}

#[test]
fn two_codeword_detection_examples() {
    let cb = UnitaryCodebook::alamouti(PskConstellation::new(4).unwrap());
    let h = DVector::from_vec(vec![c(0.3, 0.8), c(-1.2, 0.4)]);
    for (v, cw) in cb.codewords().iter().enumerate() {
        let y_prev = &h * c(2.0, 0.0);
        let y_curr = cw * &y_prev;
        assert_eq!(dstc_two_codeword_detect(&y_prev, &y_curr, &cb).unwrap(), v);
    }
    let zero = DVector::from_element(2, c(0.0, 0.0));
    assert_eq!(dstc_two_codeword_detect(&zero, &h, &cb).unwrap(), 0);
    let short = DVector::from_element(1, c(1.0, 0.0));
    assert!(matches!(dstc_two_codeword_detect(&short, &h, &cb), Err(Error::Argument(_))));
}

#[test]
fn noiseless_dstc_chain_is_detected() {
    let cb = UnitaryCodebook::alamouti(PskConstellation::new(2).unwrap());
    let budget = LinkBudget::new(50.0, vec![25.0, 25.0], 1e-30).unwrap();
    let gain = budget.amp_factor_of(0, 1.0);
    let data = vec![3, 0, 2, 1, 1];
    let tx = cb.diff_encode_matrix(&data).unwrap();
    let traces: Vec<ChannelTrace> = [c(0.5, 0.5), c(-0.9, 0.2)]
        .iter()
        .map(|&v| ChannelTrace::from_samples(vec![v; tx.len()]).unwrap())
        .collect();
    let y = simulate_dstc(&traces, &traces, &tx, &budget, &alamouti_combiners(), gain, 1).unwrap();
    let detected: Vec<usize> = y.windows(2).map(|w| dstc_two_codeword_detect(&w[0], &w[1], &cb).unwrap()).collect();
    assert_eq!(detected, data);

    let sr = spec(1.0, 0.0).with_lag_multiplier(2).unwrap();
    let cov = build_mcdsd_covariance(&sr, &sr, budget.source_power, gain, 2, 1.0, 4).unwrap();
    assert_eq!(mcdsd_dstc(&y[..4], &cov, &cb).unwrap(), data[..3].to_vec());
    assert_eq!(mcdsd_stream(&y, &cov, &cb).unwrap(), data);
}

#[test]
fn mcdsd_matches_exhaustive_search() {
    let cb = UnitaryCodebook::alamouti(PskConstellation::new(2).unwrap());
    for (n, f) in [(3, (0.002, 0.002)), (3, (0.05, 0.05)), (4, (0.012, 0.008))] {
        for w in 0..300u64 {
            let (y, _, cov) = dstc_window(n, f, 100.0, &cb, child_seed(50, &[n as u64, w]));
            let cinv = cov.matrix.clone().try_inverse().unwrap();
            let decided = mcdsd_dstc(&y, &cov, &cb).unwrap();
            assert_eq!(decided, mcd_exhaustive(&y, &cinv, &cb), "N = {n}, window {w}");
        }
    }
}

#[test]
fn mcdsd_result_beats_random_rivals() {
    let cb = UnitaryCodebook::alamouti(PskConstellation::new(4).unwrap());
    let n = 6;
    let mut rng = substream(6, &[60]);
    for w in 0..20u64 {
        let (y, _, cov) = dstc_window(n, (0.018, 0.02), 300.0, &cb, child_seed(60, &[w]));
        let best = mcdsd_dstc(&y, &cov, &cb).unwrap();
        let best_metric = mcdsd_metric(&y, &cov, &cb, &best);
        let cinv = cov.matrix.clone().try_inverse().unwrap();
        let direct = mcd_metric_direct(&y, &cinv, &cb, &best);
        for _ in 0..100 {
            let rival: Vec<usize> = (0..n - 1).map(|_| rng.random_range(0..cb.len())).collect();
            assert!(best_metric <= mcdsd_metric(&y, &cov, &cb, &rival) + 1e-9);
            assert!(direct <= mcd_metric_direct(&y, &cinv, &cb, &rival) + 1e-9 * direct.max(1.0));
        }
    }
    let (y, _, cov) = dstc_window(3, (0.01, 0.01), 100.0, &cb, 1);
    assert!(matches!(mcdsd_dstc(&y[..2], &cov, &cb), Err(Error::Argument(_))));
}

fn rotate(y: &[Complex64], z: Complex64) -> Vec<Complex64> {
    y.iter().map(|v| v * z).collect()
}

fn rotate_vec(y: &[DVector<Complex64>], z: Complex64) -> Vec<DVector<Complex64>> {
    y.iter().map(|v| v * z).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn detectors_are_phase_and_scale_invariant(seed in any::<u64>(), phase in 0.0f64..std::f64::consts::TAU, scale in 0.01f64..100.0) {
        let z = Complex64::from_polar(1.0, phase);
        let lambda = Complex64::new(scale, 0.0);
        let psk = PskConstellation::new(4).unwrap();

        let (y, _, budget, amp) = dualhop_window(4, (0.02, 0.02), 15.0, &psk, seed);
        let cov = build_msdsd_covariance(&spec(1.0, 0.02), &spec(1.0, 0.02), budget.source_power, amp, 1.0, 4).unwrap();
        let base = msdsd_dualhop(&y, &cov, &psk).unwrap();
        prop_assert_eq!(&msdsd_dualhop(&rotate(&y, z), &cov, &psk).unwrap(), &base);
        prop_assert_eq!(&msdsd_dualhop(&rotate(&y, lambda), &cov, &psk).unwrap(), &base);

        let cdd = cdd_detect(y[0], y[1], &psk);
        prop_assert_eq!(cdd_detect(y[0] * z, y[1] * z, &psk), cdd);
        prop_assert_eq!(cdd_detect(y[0] * lambda, y[1] * lambda, &psk), cdd);

        let (z0, z2) = (decision_variable(y[0], y[1]), decision_variable(y[2], y[3]));
        let sc = psk.min_distance_detect(select_combine(z0, z2));
        let rz = |a: Complex64, b: Complex64, k: Complex64| decision_variable(a * k, b * k);
        prop_assert_eq!(psk.min_distance_detect(select_combine(rz(y[0], y[1], z), rz(y[2], y[3], z))), sc);
        prop_assert_eq!(psk.min_distance_detect(select_combine(rz(y[0], y[1], lambda), rz(y[2], y[3], lambda))), sc);

        let cb = UnitaryCodebook::alamouti(PskConstellation::new(2).unwrap());
        let (yd, _, dcov) = dstc_window(4, (0.012, 0.008), 100.0, &cb, seed);
        let two = dstc_two_codeword_detect(&yd[0], &yd[1], &cb).unwrap();
        prop_assert_eq!(dstc_two_codeword_detect(&(&yd[0] * z), &(&yd[1] * z), &cb).unwrap(), two);
        prop_assert_eq!(dstc_two_codeword_detect(&(&yd[0] * lambda), &(&yd[1] * lambda), &cb).unwrap(), two);
        let mcd = mcdsd_dstc(&yd, &dcov, &cb).unwrap();
        prop_assert_eq!(&mcdsd_dstc(&rotate_vec(&yd, z), &dcov, &cb).unwrap(), &mcd);
        prop_assert_eq!(&mcdsd_dstc(&rotate_vec(&yd, lambda), &dcov, &cb).unwrap(), &mcd);
    }

    #[test]
    fn tvd_weights_are_valid(a0 in 0.0f64..=1.0, a1 in 0.0f64..=1.0, amp in 0.0f64..5.0, p0 in 0.01f64..1e6) {
        let w = tvd_weights(a0, &[a1], &[amp], p0).unwrap();
        prop_assert!(w.validate().is_ok());
        prop_assert!(w.b0 <= 0.5 + 1e-12 && w.b[0] <= 0.5 + 1e-12);
    }
}

