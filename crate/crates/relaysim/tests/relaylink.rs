mod common;

use common::{rel_err, spec};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use relaysim::channel::{generate_trace, ChannelTrace};
use relaysim::relaylink::{
    alamouti_combiners, amp_factor, dstc_code_matrix, simulate_dstc, simulate_dualhop, simulate_multinode,
    simulate_threenode, snr_summary, DstcCombiner, LinkBudget,
};
use relaysim::Error;

const TINY_N0: f64 = 1e-30;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn constant(value: Complex64, len: usize) -> ChannelTrace {
    ChannelTrace::from_samples(vec![value; len]).unwrap()
}

fn mean_power(y: &[Complex64]) -> f64 {
    y.iter().map(|z| z.norm_sqr()).sum::<f64>() / y.len() as f64
}

#[test]
fn budget_construction_and_invariants() {
    let b = LinkBudget::dual_hop(10.0, 0.3, 2.0).unwrap();
    assert!((b.source_power - 3.0).abs() < 1e-12);
    assert!((b.relay_powers[0] - 7.0).abs() < 1e-12);
    assert_eq!(b.total_power, 10.0);
    assert!((b.alloc_factor - 0.3).abs() < 1e-12);
    b.validate().unwrap();

    let s = LinkBudget::symmetric(8.0, 4, 1.0).unwrap();
    assert_eq!(s.source_power, 4.0);
    assert_eq!(s.relay_powers, vec![1.0; 4]);
    s.validate().unwrap();

    assert!(matches!(LinkBudget::new(0.0, vec![1.0], 1.0), Err(Error::Argument(_))));
    assert!(LinkBudget::new(1.0, vec![-1.0], 1.0).is_err());
    assert!(LinkBudget::new(1.0, vec![1.0], 0.0).is_err());
    assert!(LinkBudget::split(1.0, 1.0, 1, 1.0).is_err());
    assert!(LinkBudget::split(1.0, 0.5, 0, 1.0).is_err());

    let mut broken = b.clone();
    broken.total_power = 11.0;
    assert!(broken.validate().is_err());
}

#[test]
fn amp_factor_examples() {
    let b = LinkBudget::new(1.0, vec![1.0], 1.0).unwrap();
    assert!((amp_factor(&b, 1.0) - 0.5f64.sqrt()).abs() < 1e-15);
    assert!((amp_factor(&b, 1.0) - 0.70711).abs() < 1e-5);

    let high = LinkBudget::dual_hop(1e12, 0.5, 1.0).unwrap();
    assert!((amp_factor(&high, 1.0).powi(2) - 1.0).abs() < 1e-10);

    for (p, r, n0) in [(100.0, 2usize, 1.0), (10.0, 2, 0.5), (1e4, 3, 2.0)] {
        let dstc = LinkBudget::symmetric(p, r, n0).unwrap();
        let expected = (p / (r as f64 * (p + 2.0 * n0))).sqrt();
        assert!(rel_err(amp_factor(&dstc, 1.0), expected) < 1e-14);
    }

    let multi = LinkBudget::new(2.0, vec![1.0, 4.0], 1.0).unwrap();
    assert!((multi.amp_factor_of(1, 0.5) - (4.0f64 / 2.0).sqrt()).abs() < 1e-15);
}

#[test]
fn noiseless_dualhop_output() {
    let b = LinkBudget::new(4.0, vec![1.0], TINY_N0).unwrap();
    let a = amp_factor(&b, 1.0);
    let ones = constant(c(1.0, 0.0), 5);
    let y = simulate_dualhop(&ones, &ones, &[c(1.0, 0.0); 5], &b, a, 1).unwrap();
    for v in &y {
        assert!((v - c(a * 2.0, 0.0)).norm() < 1e-12);
    }

    let (h1, h2) = (c(0.3, -0.4), c(-1.1, 0.2));
    let s = [c(0.0, 1.0), c(-1.0, 0.0)];
    let y = simulate_dualhop(&constant(h1, 2), &constant(h2, 2), &s, &b, a, 1).unwrap();
    for (yk, sk) in y.iter().zip(s) {
        assert!((yk - h1 * h2 * sk * (a * 2.0)).norm() < 1e-12);
    }
}

#[test]
fn dualhop_length_mismatch() {
    let b = LinkBudget::dual_hop(10.0, 0.5, 1.0).unwrap();
    let short = constant(c(1.0, 0.0), 3);
    let long = constant(c(1.0, 0.0), 4);
    let tx = [c(1.0, 0.0); 4];
    assert!(matches!(simulate_dualhop(&short, &long, &tx, &b, 1.0, 0), Err(Error::Argument(_))));
    assert!(matches!(simulate_dualhop(&long, &short, &tx, &b, 1.0, 0), Err(Error::Argument(_))));
}

#[test]
fn dualhop_equivalent_noise_variance() {
    let n = 1_000_000;
    let b = LinkBudget::dual_hop(20.0, 0.4, 1.5).unwrap();
    let a = amp_factor(&b, 1.0);
    let h2 = c(0.8, 0.9);
    let y = simulate_dualhop(&constant(c(1.0, 0.0), n), &constant(h2, n), &vec![c(0.0, 0.0); n], &b, a, 17).unwrap();
    let expected = b.noise_density * (1.0 + a * a * h2.norm_sqr());
    assert!(rel_err(mean_power(&y), expected) < 0.01, "{} vs {expected}", mean_power(&y));
}

#[test]
fn average_relay_power_matches_budget() {
    let n = 1_000_000;
    let b = LinkBudget::dual_hop(50.0, 0.3, 1.0).unwrap();
    let a = amp_factor(&b, 1.0);
    let h1 = generate_trace(&spec(1.0, 0.05), n, 3).unwrap();
    let tx = vec![c(1.0, 0.0); n];
    // With h2 = 1 the destination sees the relay output plus CN(0, N0).
    let y = simulate_dualhop(&h1, &constant(c(1.0, 0.0), n), &tx, &b, a, 4).unwrap();
    let relay_power = mean_power(&y) - b.noise_density;
    assert!(rel_err(relay_power, b.relay_powers[0]) < 0.01, "{relay_power}");
}

#[test]
fn received_snr_matches_summary() {
    let n = 1_000_000;
    let b = LinkBudget::dual_hop(10.0, 0.5, 1.0).unwrap();
    let a = amp_factor(&b, 1.0);
    let (h1, h2) = (c(1.0, 0.0), c(0.6, -0.7));
    let tx = vec![c(0.0, 0.0); n];
    let noise = simulate_dualhop(&constant(h1, n), &constant(h2, n), &tx, &b, a, 8).unwrap();
    let signal_power = a * a * b.source_power * h2.norm_sqr();
    let snr = signal_power / mean_power(&noise);
    let summary = snr_summary(&b, 1.0, 1.0, a, h2.norm_sqr(), 0.0);
    assert!(rel_err(snr, summary.rho2_given_h2) < 0.01, "{snr} vs {}", summary.rho2_given_h2);
    assert!((summary.rho1 - 5.0).abs() < 1e-12);
    assert!((summary.rho0 - 5.0).abs() < 1e-12);
}

#[test]
fn snr_summary_dstc_term() {
    let b = LinkBudget::symmetric(100.0, 2, 1.0).unwrap();
    let cgain = amp_factor(&b, 1.0);
    let eta = 1.7;
    let s = snr_summary(&b, 1.0, 1.0, cgain, 0.0, eta);
    let c2 = cgain * cgain;
    let expected = b.source_power * c2 * eta / (1.0 + c2 * eta);
    assert!(rel_err(s.rho_dstc_given_g, expected) < 1e-14);
    assert_eq!(s.rho2_given_h2, 0.0);
    for v in [s.rho0, s.rho1, s.rho2_given_h2, s.rho_dstc_given_g] {
        assert!(v >= 0.0);
    }
}

#[test]
fn noiseless_threenode_output() {
    let b = LinkBudget::new(9.0, vec![2.0], TINY_N0).unwrap();
    let a = amp_factor(&b, 1.0);
    let ones = constant(c(1.0, 0.0), 4);
    let s = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
    let (y0, y2) = simulate_threenode(&ones, &ones, &ones, &s, &b, a, 2).unwrap();
    for k in 0..4 {
        assert!((y0[k] - s[k] * 3.0).norm() < 1e-12);
        assert!((y2[k] - s[k] * (3.0 * a)).norm() < 1e-12);
    }
}

#[test]
fn multinode_structure_and_stream_separation() {
    let n = 200;
    let b = LinkBudget::symmetric(10.0, 2, 1.0).unwrap();
    let traces: Vec<ChannelTrace> = (0..5).map(|i| generate_trace(&spec(1.0, 0.01), n, i).unwrap()).collect();
    let tx = vec![c(1.0, 0.0); n];
    let amps = [0.9, 0.4];
    let (y0, relayed) = simulate_multinode(
        &traces[0],
        &[(&traces[1], &traces[2]), (&traces[3], &traces[4])],
        &tx,
        &b,
        &amps,
        77,
    )
    .unwrap();
    assert_eq!(relayed.len(), 2);
    assert!(relayed.iter().all(|r| r.len() == n));

    // Dropping the second relay leaves the direct and first relayed sequences untouched.
    let (y0_single, relayed_single) =
        simulate_multinode(&traces[0], &[(&traces[1], &traces[2])], &tx, &b, &amps[..1], 77).unwrap();
    assert_eq!(y0, y0_single);
    assert_eq!(relayed[0], relayed_single[0]);

    assert!(matches!(
        simulate_multinode(&traces[0], &[(&traces[1], &traces[2])], &tx, &b, &amps, 77),
        Err(Error::Argument(_))
    ));
}

#[test]
fn cross_link_noise_is_uncorrelated() {
    let n = 1_000_000;
    let b = LinkBudget::dual_hop(10.0, 0.5, 1.0).unwrap();
    let a = amp_factor(&b, 1.0);
    let ones = constant(c(1.0, 0.0), n);
    let (y0, y2) = simulate_threenode(&ones, &ones, &ones, &vec![c(0.0, 0.0); n], &b, a, 5).unwrap();
    let cross: Complex64 = y0.iter().zip(&y2).map(|(p, q)| p * q.conj()).sum::<Complex64>() / n as f64;
    let rho = cross.norm() / (mean_power(&y0) * mean_power(&y2)).sqrt();
    assert!(rho < 0.01, "correlation {rho}");
}

#[test]
fn simulators_are_deterministic() {
    let n = 50;
    let b = LinkBudget::dual_hop(10.0, 0.5, 1.0).unwrap();
    let h1 = generate_trace(&spec(1.0, 0.02), n, 1).unwrap();
    let h2 = generate_trace(&spec(1.0, 0.02), n, 2).unwrap();
    let tx = vec![c(1.0, 0.0); n];
    let first = simulate_dualhop(&h1, &h2, &tx, &b, 0.7, 9).unwrap();
    assert_eq!(first, simulate_dualhop(&h1, &h2, &tx, &b, 0.7, 9).unwrap());
    assert_ne!(first, simulate_dualhop(&h1, &h2, &tx, &b, 0.7, 10).unwrap());

    let blocks = vec![DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]); n];
    let q = [h1.clone(), h2.clone()];
    let g = [h2, h1];
    let d1 = simulate_dstc(&q, &g, &blocks, &b, &alamouti_combiners(), 0.5, 3).unwrap();
    let d2 = simulate_dstc(&q, &g, &blocks, &b, &alamouti_combiners(), 0.5, 3).unwrap();
    assert_eq!(d1, d2);
}

#[test]
fn alamouti_combiners_build_the_code_matrix() {
    let combiners = alamouti_combiners();
    assert_eq!(combiners.len(), 2);
    assert!(!combiners[0].conjugates());
    assert!(combiners[1].conjugates());
    let s = DVector::from_vec(vec![c(0.3, 0.4), c(-0.5, 0.1)]);
    let m = dstc_code_matrix(&s, &combiners);
    let expected = DMatrix::from_row_slice(2, 2, &[s[0], -s[1].conj(), s[1], s[0].conj()]);
    assert!((m - expected).norm() < 1e-15);
}

#[test]
fn noiseless_dstc_output() {
    let b = LinkBudget::new(50.0, vec![25.0, 25.0], TINY_N0).unwrap();
    let gain = amp_factor(&b, 1.0);
    let combiners = alamouti_combiners();
    let (q, g) = ([c(0.5, -0.2), c(-0.3, 0.9)], [c(1.2, 0.1), c(0.4, -0.6)]);
    let traces_sr: Vec<ChannelTrace> = q.iter().map(|&v| constant(v, 3)).collect();
    let traces_rd: Vec<ChannelTrace> = g.iter().map(|&v| constant(v, 3)).collect();
    let blocks = vec![
        DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]),
        DVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]),
        DVector::from_vec(vec![c(0.0, 1.0), c(0.0, 0.0)]),
    ];
    let y = simulate_dstc(&traces_sr, &traces_rd, &blocks, &b, &combiners, gain, 4).unwrap();
    // The conjugating relay sees q*, so its equivalent channel is q2*·g2.
    let h = DVector::from_vec(vec![q[0] * g[0], q[1].conj() * g[1]]);
    let scale = gain * (b.source_power * 2.0).sqrt();
    for (yk, sk) in y.iter().zip(&blocks) {
        let expected = dstc_code_matrix(sk, &combiners) * &h * c(scale, 0.0);
        assert!((yk - expected).norm() < 1e-10);
    }
}

#[test]
fn dstc_equivalent_noise_variance() {
    let n = 100_000;
    let b = LinkBudget::symmetric(40.0, 2, 1.0).unwrap();
    let gain = amp_factor(&b, 1.0);
    let g = [c(0.7, 0.7), c(-1.3, 0.2)];
    let traces_sr: Vec<ChannelTrace> = (0..2).map(|_| constant(c(1.0, 0.0), n)).collect();
    let traces_rd: Vec<ChannelTrace> = g.iter().map(|&v| constant(v, n)).collect();
    let blocks = vec![DVector::from_element(2, c(0.0, 0.0)); n];
    let y = simulate_dstc(&traces_sr, &traces_rd, &blocks, &b, &alamouti_combiners(), gain, 6).unwrap();
    let eta: f64 = g.iter().map(|v| v.norm_sqr()).sum();
    let expected = b.noise_density * (1.0 + gain * gain * eta);
    for j in 0..2 {
        let comp: Vec<Complex64> = y.iter().map(|v| v[j]).collect();
        assert!(rel_err(mean_power(&comp), expected) < 0.01, "component {j}: {}", mean_power(&comp));
    }
}

#[test]
fn dstc_rejects_invalid_combiners() {
    let b = LinkBudget::symmetric(10.0, 2, 1.0).unwrap();
    let traces: Vec<ChannelTrace> = (0..2).map(|_| constant(c(1.0, 0.0), 2)).collect();
    let blocks = vec![DVector::from_element(2, c(1.0, 0.0)); 2];
    let both = DstcCombiner {
        a: DMatrix::identity(2, 2),
        b: DMatrix::identity(2, 2),
    };
    assert!(matches!(both.validate(2), Err(Error::Config(_))));
    let scaled = DstcCombiner {
        a: DMatrix::identity(2, 2) * c(2.0, 0.0),
        b: DMatrix::zeros(2, 2),
    };
    assert!(scaled.validate(2).is_err());
    let mut combiners = alamouti_combiners();
    combiners[1] = both;
    assert!(matches!(
        simulate_dstc(&traces, &traces, &blocks, &b, &combiners, 1.0, 0),
        Err(Error::Config(_))
    ));
    assert!(matches!(
        simulate_dstc(&traces[..1], &traces, &blocks, &b, &alamouti_combiners(), 1.0, 0),
        Err(Error::Config(_))
    ));
    let short: Vec<ChannelTrace> = (0..2).map(|_| constant(c(1.0, 0.0), 1)).collect();
    assert!(matches!(
        simulate_dstc(&short, &traces, &blocks, &b, &alamouti_combiners(), 1.0, 0),
        Err(Error::Argument(_))
    ));
}
