//! Receivers: two-symbol differential detection, linear and selection
//! combining, multiple-symbol differential sphere decoding for dual-hop
//! relaying, and two-/multiple-codeword detection for distributed
//! space-time coding.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::FadingSpec;
use crate::error::{Error, Result};
use crate::modem::{PskConstellation, UnitaryCodebook};

/// Two-symbol differential detection: argmin_v |y_curr − v·y_prev|², i.e.
/// slicing ζ = y_prev*·y_curr. Returns the constellation index.
pub fn cdd_detect(y_prev: Complex64, y_curr: Complex64, constellation: &PskConstellation) -> usize {
    constellation.min_distance_detect(y_prev.conj() * y_curr)
}

/// The differential decision variable y*[k−1]·y[k].
pub fn decision_variable(y_prev: Complex64, y_curr: Complex64) -> Complex64 {
    y_prev.conj() * y_curr
}

/// Linear combining weights for the direct link (b0) and relayed links (b_i).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinerWeights {
    pub b0: f64,
    pub b: Vec<f64>,
}

impl CombinerWeights {
    /// Checks that every weight is finite and non-negative.
    pub fn validate(&self) -> Result<()> {
        if std::iter::once(&self.b0).chain(&self.b).all(|w| w.is_finite() && *w >= 0.0) {
            Ok(())
        } else {
            Err(Error::argument("combining weights must be finite and non-negative"))
        }
    }
}

/// Semi-MRC weights in the unit-noise form b0 = 1/2, b_i = 1/(2(1 + A_i²σ_rd,i²)).
pub fn semi_mrc_weights(amp_factors: &[f64], sigma_rd_sq: &[f64]) -> Result<CombinerWeights> {
    if amp_factors.len() != sigma_rd_sq.len() {
        return Err(Error::argument("one relay-destination variance per relay is required"));
    }
    Ok(CombinerWeights {
        b0: 0.5,
        b: amp_factors
            .iter()
            .zip(sigma_rd_sq)
            .map(|(a, s)| 0.5 / (1.0 + a * a * s))
            .collect(),
    })
}

/// Semi-MRC weights for a general noise level: 1/N0 and 1/(N0(1 + A_i²σ_rd,i²)).
pub fn semi_mrc_weights_general(amp_factors: &[f64], sigma_rd_sq: &[f64], n0: f64) -> Result<CombinerWeights> {
    let w = semi_mrc_weights(amp_factors, sigma_rd_sq)?;
    let scale = 2.0 / n0;
    Ok(CombinerWeights {
        b0: w.b0 * scale,
        b: w.b.iter().map(|b| b * scale).collect(),
    })
}

/// Weights for time-varying channels (unit variances and noise):
/// b0 = α0/(1+α0²+(1−α0²)P0), b_i = α_i/((1+α_i²)(1+A_i²)+(1−α_i²)A_i²P0).
pub fn tvd_weights(alpha0: f64, alphas: &[f64], amp_factors: &[f64], source_power: f64) -> Result<CombinerWeights> {
    if alphas.len() != amp_factors.len() {
        return Err(Error::argument("one autocorrelation per relay is required"));
    }
    let in_range = |a: f64| (0.0..=1.0).contains(&a);
    if !in_range(alpha0) || !alphas.iter().all(|&a| in_range(a)) {
        return Err(Error::argument("autocorrelations must lie in [0, 1]"));
    }
    let p0 = source_power;
    let b0 = alpha0 / (1.0 + alpha0 * alpha0 + (1.0 - alpha0 * alpha0) * p0);
    let b = alphas
        .iter()
        .zip(amp_factors)
        .map(|(&a, &amp)| {
            let a2 = amp * amp;
            a / ((1.0 + a * a) * (1.0 + a2) + (1.0 - a * a) * a2 * p0)
        })
        .collect();
    Ok(CombinerWeights { b0, b })
}

/// ζ = b0·ζ0 + Σ b_i·ζ_i for per-link decision variables [ζ0, ζ1, …].
pub fn linear_combine(decision_vars: &[Complex64], weights: &CombinerWeights) -> Result<Complex64> {
    if decision_vars.len() != weights.b.len() + 1 {
        return Err(Error::argument(format!(
            "{} decision variables for {} weights",
            decision_vars.len(),
            weights.b.len() + 1
        )));
    }
    Ok(decision_vars[0] * weights.b0
        + decision_vars[1..]
            .iter()
            .zip(&weights.b)
            .map(|(z, b)| z * *b)
            .sum::<Complex64>())
}

/// Selection combining: the decision variable of larger magnitude, ties to ζ0.
pub fn select_combine(zeta0: Complex64, zeta2: Complex64) -> Complex64 {
    if zeta2.norm_sqr() > zeta0.norm_sqr() {
        zeta2
    } else {
        zeta0
    }
}

/// DBPSK selection on real decision variables, ties to ζ0.
pub fn select_combine_real(zeta0: f64, zeta2: f64) -> f64 {
    if zeta2.abs() > zeta0.abs() {
        zeta2
    } else {
        zeta0
    }
}

/// DBPSK sign decision: index 1 (symbol −1) when ζ < 0, else index 0 (+1).
pub fn dbpsk_sign_decision(zeta: f64) -> usize {
    usize::from(zeta < 0.0)
}

/// Covariance of an N-sample observation window and its whitening factors.
///
/// All covariances arising here are real symmetric Toeplitz-plus-diagonal
/// matrices, so the entries are stored as real numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceModel {
    pub dimension: usize,
    pub matrix: DMatrix<f64>,
    /// Upper-triangular U with C⁻¹ = Uᵀ U.
    pub cholesky_upper: DMatrix<f64>,
    /// Lower-triangular L with C⁻¹ = Lᵀ L (rows involve samples 1..i only).
    pub cholesky_lower: DMatrix<f64>,
}

impl CovarianceModel {
    /// Factorizes a symmetric positive-definite covariance.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if n < 2 || matrix.ncols() != n {
            return Err(Error::model("covariance must be square with dimension at least 2"));
        }
        if (&matrix - matrix.transpose()).amax() > 1e-12 * matrix.amax() {
            return Err(Error::model("covariance is not symmetric"));
        }
        let inv = matrix
            .clone()
            .cholesky()
            .ok_or_else(|| Error::model("covariance is not positive definite"))?
            .inverse();
        let inv = (&inv + inv.transpose()) * 0.5;
        // C⁻¹ = L Lᵀ with L lower, so U = Lᵀ is upper and C⁻¹ = Uᵀ U.
        let upper = inv
            .clone()
            .cholesky()
            .ok_or_else(|| Error::model("inverse covariance is not positive definite"))?
            .l()
            .transpose();
        // Reverse the index order, factor, and reverse back to get a lower factor.
        let rev = |m: &DMatrix<f64>| DMatrix::from_fn(n, n, |i, j| m[(n - 1 - i, n - 1 - j)]);
        let upper_rev = rev(&inv)
            .cholesky()
            .ok_or_else(|| Error::model("inverse covariance is not positive definite"))?
            .l()
            .transpose();
        let lower = rev(&upper_rev);
        Ok(Self {
            dimension: n,
            matrix,
            cholesky_upper: upper,
            cholesky_lower: lower,
        })
    }

    /// Leading principal sub-model of size `n` (a shorter window of the same process).
    pub fn leading(&self, n: usize) -> Result<Self> {
        if n > self.dimension {
            return Err(Error::argument("sub-window longer than the model"));
        }
        Self::new(self.matrix.view((0, 0), (n, n)).into_owned())
    }

    /// ‖Uᵀ U C − I‖ (Frobenius), a factorization residual.
    pub fn residual(&self) -> f64 {
        let n = self.dimension;
        (self.cholesky_upper.transpose() * &self.cholesky_upper * &self.matrix - DMatrix::identity(n, n)).norm()
    }
}

fn toeplitz_plus_diagonal(first_row: &[f64], diagonal: f64) -> DMatrix<f64> {
    let n = first_row.len();
    DMatrix::from_fn(n, n, |i, j| {
        let lag = i.abs_diff(j);
        first_row[lag] + if i == j { diagonal } else { 0.0 }
    })
}

/// C = A²P0·toeplitz{φ1(n)φ2(n)} + (1 + A²σ2²)N0·I for a dual-hop window.
pub fn build_msdsd_covariance(
    spec_sr: &FadingSpec,
    spec_rd: &FadingSpec,
    source_power: f64,
    amp: f64,
    noise_density: f64,
    n: usize,
) -> Result<CovarianceModel> {
    if n < 2 {
        return Err(Error::argument("window size must be at least 2"));
    }
    let a2 = amp * amp;
    let row: Vec<f64> = (0..n)
        .map(|lag| {
            a2 * source_power
                * crate::channel::jakes_autocorr(lag, spec_sr)
                * crate::channel::jakes_autocorr(lag, spec_rd)
        })
        .collect();
    CovarianceModel::new(toeplitz_plus_diagonal(
        &row,
        (1.0 + a2 * spec_rd.variance) * noise_density,
    ))
}

/// C = c²P0R·toeplitz{φ_sr(n)φ_rd(n)} + N0(1 + c²σ_rd²R)·I for a DSTC window.
///
/// The specs should carry the block spacing as their lag multiplier.
pub fn build_mcdsd_covariance(
    spec_sr: &FadingSpec,
    spec_rd: &FadingSpec,
    source_power: f64,
    relay_gain: f64,
    relays: usize,
    noise_density: f64,
    n: usize,
) -> Result<CovarianceModel> {
    if n < 2 {
        return Err(Error::argument("window size must be at least 2"));
    }
    let c2 = relay_gain * relay_gain;
    let r = relays as f64;
    let row: Vec<f64> = (0..n)
        .map(|lag| {
            c2 * source_power
                * r
                * crate::channel::jakes_autocorr(lag, spec_sr)
                * crate::channel::jakes_autocorr(lag, spec_rd)
        })
        .collect();
    CovarianceModel::new(toeplitz_plus_diagonal(
        &row,
        noise_density * (1.0 + c2 * spec_rd.variance * r),
    ))
}

/// Search statistics of one sphere-decoder call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes_visited: u64,
}

struct ScalarSearch<'a> {
    b: &'a [Vec<Complex64>],
    points: &'a [Complex64],
    n: usize,
    current: Vec<usize>,
    best: Vec<usize>,
    best_metric: f64,
    stats: SearchStats,
}

impl ScalarSearch<'_> {
    fn descend(&mut self, level: usize, partial: f64) {
        self.stats.nodes_visited += 1;
        if level == self.n {
            let better = partial < self.best_metric
                || (partial == self.best_metric && self.current < self.best);
            if better {
                self.best_metric = partial;
                self.best.clone_from(&self.current);
            }
            return;
        }
        let row = &self.b[level];
        let acc: Complex64 = (0..level).map(|j| row[j] * self.points[self.current[j]]).sum();
        let diag = row[level];
        let mut candidates: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(m, p)| ((acc + diag * p).norm_sqr(), m))
            .collect();
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (inc, m) in candidates {
            let next = partial + inc;
            if next > self.best_metric {
                break;
            }
            self.current[level] = m;
            self.descend(level + 1, next);
        }
    }
}

/// Multiple-symbol metric ‖L·diag(s*)·y‖² of an anchored candidate (s[0] = 1),
/// where C⁻¹ = Lᵀ L; identical to yᴴ diag(s) C⁻¹ diag(s*) y.
pub fn msdsd_metric(window: &[Complex64], cov: &CovarianceModel, constellation: &PskConstellation, indices: &[usize]) -> f64 {
    let n = window.len();
    let l = &cov.cholesky_lower;
    (0..n)
        .map(|i| {
            (0..=i)
                .map(|j| window[j] * constellation.point(indices[j]).conj() * l[(i, j)])
                .sum::<Complex64>()
                .norm_sqr()
        })
        .sum()
}

/// Multiple-symbol differential sphere decoding of one dual-hop window.
///
/// Minimizes yᴴ diag(s) C⁻¹ diag(s*) y over s ∈ 𝒱^N with s[0] anchored to 1
/// by a Schnorr–Euchner depth-first search, and returns the N−1 differential
/// data indices v[k] = s*[k]·s[k+1] (as constellation indices).
pub fn msdsd_dualhop(
    window: &[Complex64],
    cov: &CovarianceModel,
    constellation: &PskConstellation,
) -> Result<Vec<usize>> {
    let (seq, _) = msdsd_dualhop_sequence(window, cov, constellation)?;
    let m = constellation.order();
    Ok(seq.windows(2).map(|w| (w[1] + m - w[0]) % m).collect())
}

/// As [`msdsd_dualhop`] but returning the anchored symbol-index sequence and
/// the search statistics.
pub fn msdsd_dualhop_sequence(
    window: &[Complex64],
    cov: &CovarianceModel,
    constellation: &PskConstellation,
) -> Result<(Vec<usize>, SearchStats)> {
    let n = window.len();
    if n != cov.dimension {
        return Err(Error::argument(format!(
            "window of {n} samples for a covariance of dimension {}",
            cov.dimension
        )));
    }
    let l = &cov.cholesky_lower;
    let b: Vec<Vec<Complex64>> = (0..n)
        .map(|i| (0..=i).map(|j| (window[j] * l[(i, j)]).conj()).collect())
        .collect();
    let anchor_metric = b[0][0].norm_sqr();
    let mut search = ScalarSearch {
        b: &b,
        points: constellation.points(),
        n,
        current: vec![0; n],
        best: vec![0; n],
        best_metric: f64::INFINITY,
        stats: SearchStats::default(),
    };
    search.descend(1, anchor_metric);
    Ok((search.best, search.stats))
}

/// Decodes a whole received sequence with windows of `cov.dimension` samples
/// that overlap by one; a shorter tail window uses the leading sub-model.
pub fn msdsd_stream(
    received: &[Complex64],
    cov: &CovarianceModel,
    constellation: &PskConstellation,
) -> Result<Vec<usize>> {
    let n = cov.dimension;
    let mut out = Vec::with_capacity(received.len().saturating_sub(1));
    let mut start = 0;
    while start + 1 < received.len() {
        let end = (start + n).min(received.len());
        let len = end - start;
        if len == n {
            out.extend(msdsd_dualhop(&received[start..end], cov, constellation)?);
        } else if len >= 2 {
            let sub = cov.leading(len)?;
            out.extend(msdsd_dualhop(&received[start..end], &sub, constellation)?);
        }
        start = end - 1;
    }
    Ok(out)
}

/// Two-codeword detection argmin_V ‖y_curr − V·y_prev‖, ties to index 0.
pub fn dstc_two_codeword_detect(
    y_prev: &DVector<Complex64>,
    y_curr: &DVector<Complex64>,
    codebook: &UnitaryCodebook,
) -> Result<usize> {
    let r = codebook.dimension();
    if y_prev.len() != r || y_curr.len() != r {
        return Err(Error::argument("received vectors do not match the codebook dimension"));
    }
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, v) in codebook.codewords().iter().enumerate() {
        let d = (y_curr - v * y_prev).norm_squared();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    Ok(best)
}

struct MatrixSearch<'a> {
    y: &'a [DVector<Complex64>],
    u: &'a DMatrix<f64>,
    codebook: &'a UnitaryCodebook,
    n: usize,
    /// s[j] for decided blocks (s[n-1] = I).
    s: Vec<DMatrix<Complex64>>,
    current: Vec<usize>,
    best: Vec<usize>,
    best_metric: f64,
    stats: SearchStats,
}

impl MatrixSearch<'_> {
    fn descend(&mut self, level: usize, partial: f64) {
        self.stats.nodes_visited += 1;
        // `level` is the block index whose codeword V[level] is chosen next;
        // level counts down from n−2 to 0, and usize::MAX marks a leaf.
        if level == usize::MAX {
            let better = partial < self.best_metric
                || (partial == self.best_metric && self.current < self.best);
            if better {
                self.best_metric = partial;
                self.best.clone_from(&self.current);
            }
            return;
        }
        let r = self.codebook.dimension();
        let mut t = DVector::from_element(r, Complex64::new(0.0, 0.0));
        for j in (level + 1)..self.n {
            t += self.s[j].adjoint() * &self.y[j] * Complex64::new(self.u[(level, j)], 0.0);
        }
        let shifted = &self.s[level + 1] * t;
        let scaled_y = &self.y[level] * Complex64::new(self.u[(level, level)], 0.0);
        let mut candidates: Vec<(f64, usize)> = self
            .codebook
            .codewords()
            .iter()
            .enumerate()
            .map(|(i, v)| ((v * &scaled_y + &shifted).norm_squared(), i))
            .collect();
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (inc, i) in candidates {
            let next = partial + inc;
            if next > self.best_metric {
                break;
            }
            self.current[level] = i;
            self.s[level] = self.codebook.codeword(i).adjoint() * &self.s[level + 1];
            self.descend(level.wrapping_sub(1), next);
        }
    }
}

/// Multiple-codeword metric Σ_n ‖u_nn V[n] y[n] + S[n+1] Σ_{j>n} u_nj Sᴴ[j] y[j]‖²
/// of a candidate (codeword indices V[0..N−1], S[N−1] = I).
pub fn mcdsd_metric(
    window: &[DVector<Complex64>],
    cov: &CovarianceModel,
    codebook: &UnitaryCodebook,
    indices: &[usize],
) -> f64 {
    let n = window.len();
    let r = codebook.dimension();
    let mut s = vec![DMatrix::<Complex64>::identity(r, r); n];
    for k in (0..n - 1).rev() {
        s[k] = codebook.codeword(indices[k]).adjoint() * &s[k + 1];
    }
    let u = &cov.cholesky_upper;
    (0..n - 1)
        .map(|k| {
            let mut t = DVector::from_element(r, Complex64::new(0.0, 0.0));
            for j in (k + 1)..n {
                t += s[j].adjoint() * &window[j] * Complex64::new(u[(k, j)], 0.0);
            }
            (codebook.codeword(indices[k]) * &window[k] * Complex64::new(u[(k, k)], 0.0) + &s[k + 1] * t)
                .norm_squared()
        })
        .sum()
}

/// Multiple-codeword differential sphere decoding of one DSTC window.
///
/// Returns the N−1 codeword indices V[0..N−1] with S[n+1] = V[n]·S[n] and the
/// last block anchored to the identity.
pub fn mcdsd_dstc(
    window: &[DVector<Complex64>],
    cov: &CovarianceModel,
    codebook: &UnitaryCodebook,
) -> Result<Vec<usize>> {
    mcdsd_dstc_with_stats(window, cov, codebook).map(|(v, _)| v)
}

/// As [`mcdsd_dstc`] but also returning search statistics.
pub fn mcdsd_dstc_with_stats(
    window: &[DVector<Complex64>],
    cov: &CovarianceModel,
    codebook: &UnitaryCodebook,
) -> Result<(Vec<usize>, SearchStats)> {
    let n = window.len();
    if n != cov.dimension {
        return Err(Error::argument(format!(
            "window of {n} blocks for a covariance of dimension {}",
            cov.dimension
        )));
    }
    let r = codebook.dimension();
    if window.iter().any(|y| y.len() != r) {
        return Err(Error::argument("received vectors do not match the codebook dimension"));
    }
    let mut search = MatrixSearch {
        y: window,
        u: &cov.cholesky_upper,
        codebook,
        n,
        s: vec![DMatrix::identity(r, r); n],
        current: vec![0; n - 1],
        best: vec![0; n - 1],
        best_metric: f64::INFINITY,
        stats: SearchStats::default(),
    };
    search.descend(n - 2, 0.0);
    Ok((search.best, search.stats))
}

/// Decodes a whole block sequence with windows overlapping by one block.
pub fn mcdsd_stream(
    received: &[DVector<Complex64>],
    cov: &CovarianceModel,
    codebook: &UnitaryCodebook,
) -> Result<Vec<usize>> {
    let n = cov.dimension;
    let mut out = Vec::with_capacity(received.len().saturating_sub(1));
    let mut start = 0;
    while start + 1 < received.len() {
        let end = (start + n).min(received.len());
        let len = end - start;
        if len == n {
            out.extend(mcdsd_dstc(&received[start..end], cov, codebook)?);
        } else {
            let sub = cov.leading(len)?;
            out.extend(mcdsd_dstc(&received[start..end], &sub, codebook)?);
        }
        start = end - 1;
    }
    Ok(out)
}
