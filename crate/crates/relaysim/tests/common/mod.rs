//! Independent numerical oracles and scenario builders shared by the
//! integration tests. Nothing here calls the crate's own special functions
//! or quadrature.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use relaysim::channel::FadingSpec;
use relaysim::modem::{PskConstellation, UnitaryCodebook};
use relaysim::harness::{Detector, LinkFading, SimConfig, StopRule, Topology};

/// 20-point Gauss–Legendre nodes and weights on [−1, 1], computed by Newton
/// iteration on the Legendre polynomial.
pub fn gauss_legendre_20() -> (Vec<f64>, Vec<f64>) {
    let n = 20;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 1..=n {
        let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// Composite 20-point Gauss–Legendre rule with `panels` equal panels.
pub fn gl_integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = gauss_legendre_20();
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            s += wi * f(mid + 0.5 * h * xi);
        }
        sum += 0.5 * h * s;
    }
    sum
}

/// J0(x) = (1/π)∫₀^π cos(x sin t) dt.
pub fn j0_oracle(x: f64) -> f64 {
    let panels = 40 + x.abs().ceil() as usize;
    gl_integrate(|t| (x * t.sin()).cos(), 0.0, PI, panels) / PI
}

/// K_ν(x) = ∫₀^∞ e^{−x cosh t} cosh(νt) dt for ν ∈ {0, 1}, scaled by e^x
/// inside the integrand to keep relative accuracy for large x.
pub fn bessel_k_oracle(nu: u32, x: f64) -> f64 {
    let upper = ((x + 60.0) / x).acosh();
    let scaled = gl_integrate(
        |t| (-x * (t.cosh() - 1.0)).exp() * (nu as f64 * t).cosh(),
        0.0,
        upper,
        400,
    );
    scaled * (-x).exp()
}

/// E1(x) = ∫₀^∞ exp(−x e^u) du (substituting t = e^u in ∫₁^∞ e^{−xt}/t dt).
pub fn e1_oracle(x: f64) -> f64 {
    let upper = ((x + 60.0) / x).ln();
    let scaled = gl_integrate(|u| (-x * (u.exp() - 1.0)).exp(), 0.0, upper, 600);
    scaled * (-x).exp()
}

/// Q(x) by Craig's form (1/π)∫₀^{π/2} exp(−x²/(2 sin²θ)) dθ for x ≥ 1, and
/// by 1/2 − (2π)^{−1/2}∫₀^x e^{−t²/2} dt closer to zero, where the Craig
/// integrand develops a sharp edge.
pub fn q_oracle(x: f64) -> f64 {
    if x < 0.0 {
        return 1.0 - q_oracle(-x);
    }
    if x < 1.0 {
        return 0.5 - gl_integrate(|t| (-t * t / 2.0).exp(), 0.0, x, 4) / (2.0 * PI).sqrt();
    }
    gl_integrate(
        |t| {
            let s = t.sin();
            if s == 0.0 {
                0.0
            } else {
                (-x * x / (2.0 * s * s)).exp()
            }
        },
        0.0,
        PI / 2.0,
        200,
    ) / PI
}

/// Relative error |a − b|/|b|.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Least-squares slope of log10(y) against x/10 (decades per decade of power).
pub fn loglog_slope(db: &[f64], y: &[f64]) -> f64 {
    let xs: Vec<f64> = db.iter().map(|d| d / 10.0).collect();
    let ys: Vec<f64> = y.iter().map(|v| v.log10()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub fn spec(variance: f64, doppler: f64) -> FadingSpec {
    FadingSpec::new(variance, doppler).unwrap()
}

/// Normalized Dopplers (f1, f2) of the dual-hop Cases I–III.
pub const DUALHOP_CASES: [(f64, f64); 3] = [(0.001, 0.001), (0.01, 0.001), (0.02, 0.01)];
/// Normalized Dopplers (f_sd, f_sr, f_rd) of the multi-relay Scenarios I–III.
pub const MULTINODE_SCENARIOS: [(f64, f64, f64); 3] = [(0.005, 0.005, 0.005), (0.05, 0.05, 0.005), (0.1, 0.1, 0.05)];
/// Normalized Dopplers (f0, f1, f2) of the selection-combining Cases I–III.
pub const SC_CASES: [(f64, f64, f64); 3] = [(0.001, 0.001, 0.001), (0.02, 0.02, 0.001), (0.05, 0.01, 0.05)];
/// Variance scenarios [σ0², σ1², σ2²] and their optimum splits.
pub const SC_VARIANCES: [([f64; 3], f64); 3] = [([1.0, 1.0, 1.0], 0.67), ([1.0, 10.0, 1.0], 0.58), ([1.0, 1.0, 10.0], 0.85)];
/// Normalized Dopplers (f_sr, f_rd) of the space-time coding Cases I–III.
pub const DSTC_CASES: [(f64, f64); 3] = [(0.002, 0.002), (0.012, 0.008), (0.018, 0.02)];

pub fn stop(min_bit_errors: u64, max_frames: u64) -> StopRule {
    StopRule {
        min_bit_errors,
        max_frames,
    }
}

pub fn dualhop_config(detector: Detector, order: usize, f: (f64, f64), q: f64, sweep: &[f64], stop: StopRule, seed: u64) -> SimConfig {
    SimConfig {
        topology: Topology::Dualhop,
        detector,
        order,
        fading: LinkFading {
            sd: None,
            sr: spec(1.0, f.0),
            rd: spec(1.0, f.1),
        },
        alloc_factor: q,
        noise_density: 1.0,
        sweep_db: sweep.to_vec(),
        stop,
        seed,
        frame_symbols: 100,
    }
}

#[allow(clippy::too_many_arguments)]
pub fn direct_link_config(
    topology: Topology,
    detector: Detector,
    order: usize,
    f: (f64, f64, f64),
    variances: [f64; 3],
    q: f64,
    sweep: &[f64],
    stop: StopRule,
    seed: u64,
) -> SimConfig {
    SimConfig {
        topology,
        detector,
        order,
        fading: LinkFading {
            sd: Some(spec(variances[0], f.0)),
            sr: spec(variances[1], f.1),
            rd: spec(variances[2], f.2),
        },
        alloc_factor: q,
        noise_density: 1.0,
        sweep_db: sweep.to_vec(),
        stop,
        seed,
        frame_symbols: 100,
    }
}

pub fn dstc_config(detector: Detector, order: usize, f: (f64, f64), sweep: &[f64], stop: StopRule, seed: u64) -> SimConfig {
    SimConfig {
        topology: Topology::Dstc { relays: 2 },
        detector,
        order,
        fading: LinkFading {
            sd: None,
            sr: spec(1.0, f.0),
            rd: spec(1.0, f.1),
        },
        alloc_factor: 0.5,
        noise_density: 1.0,
        sweep_db: sweep.to_vec(),
        stop,
        seed,
        frame_symbols: 50,
    }
}

/// yᴴ diag(s) C⁻¹ diag(s*) y evaluated with an explicit inverse.
pub fn msd_metric_direct(y: &[Complex64], cinv: &DMatrix<f64>, s: &[Complex64]) -> f64 {
    let n = y.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += (y[i] * s[i].conj()).conj() * cinv[(i, j)] * (y[j] * s[j].conj());
        }
    }
    acc.re
}

/// Exhaustive search over all anchored sequences (first symbol index 0).
pub fn msd_exhaustive(y: &[Complex64], cinv: &DMatrix<f64>, constellation: &PskConstellation) -> Vec<usize> {
    let n = y.len();
    let m = constellation.order();
    let mut best = (f64::INFINITY, vec![0; n]);
    for code in 0..m.pow(n as u32 - 1) {
        let mut idx = vec![0; n];
        let mut c = code;
        for k in (1..n).rev() {
            idx[k] = c % m;
            c /= m;
        }
        let s: Vec<Complex64> = idx.iter().map(|&i| constellation.point(i)).collect();
        let metric = msd_metric_direct(y, cinv, &s);
        if metric < best.0 {
            best = (metric, idx);
        }
    }
    best.1
}

/// Σ_ij C⁻¹_ij y_iᴴ S_i S_jᴴ y_j for blocks S[k] = V[k]ᴴ S[k+1], S[N−1] = I.
pub fn mcd_metric_direct(y: &[DVector<Complex64>], cinv: &DMatrix<f64>, codebook: &UnitaryCodebook, v: &[usize]) -> f64 {
    let n = y.len();
    let r = codebook.dimension();
    let mut s = vec![DMatrix::<Complex64>::identity(r, r); n];
    for k in (0..n - 1).rev() {
        s[k] = codebook.codeword(v[k]).adjoint() * &s[k + 1];
    }
    let z: Vec<DVector<Complex64>> = (0..n).map(|k| s[k].adjoint() * &y[k]).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += z[i].dotc(&z[j]) * cinv[(i, j)];
        }
    }
    acc.re
}

/// Exhaustive search over all codeword sequences of a window.
pub fn mcd_exhaustive(y: &[DVector<Complex64>], cinv: &DMatrix<f64>, codebook: &UnitaryCodebook) -> Vec<usize> {
    let n = y.len();
    let l = codebook.len();
    let mut best = (f64::INFINITY, vec![0; n - 1]);
    for code in 0..l.pow(n as u32 - 1) {
        let mut idx = vec![0; n - 1];
        let mut c = code;
        for k in (0..n - 1).rev() {
            idx[k] = c % l;
            c /= l;
        }
        let metric = mcd_metric_direct(y, cinv, codebook, &idx);
        if metric < best.0 {
            best = (metric, idx);
        }
    }
    best.1
}
