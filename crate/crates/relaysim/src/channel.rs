//! Time-correlated Rayleigh fading: trace generation, cascaded (double-Rayleigh)
//! channels, and the statistical models used by analysis and detection.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{substream, SimRng};
use crate::specialfn::{bessel_j0, bessel_k0, bessel_k1};

/// Default number of sinusoids per quadrature component.
pub const DEFAULT_SINUSOIDS: usize = 8;

/// Fading parameters of one link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FadingSpec {
    /// Average channel power σ² = E|h|².
    pub variance: f64,
    /// Maximum Doppler frequency normalized to the channel-use spacing, f_D·T_s.
    pub normalized_doppler: f64,
    /// Number of sinusoids N1 in each quadrature component of the generator.
    #[serde(default = "default_sinusoids")]
    pub sinusoid_count: usize,
    /// Channel uses between consecutive samples (1 for symbol-by-symbol
    /// transmission, R for block-wise DSTC transmission).
    #[serde(default = "default_lag_multiplier")]
    pub lag_multiplier: usize,
}

fn default_sinusoids() -> usize {
    DEFAULT_SINUSOIDS
}

fn default_lag_multiplier() -> usize {
    1
}

impl FadingSpec {
    /// Builds a validated spec with the default sinusoid count and unit lag spacing.
    pub fn new(variance: f64, normalized_doppler: f64) -> Result<Self> {
        let spec = Self {
            variance,
            normalized_doppler,
            sinusoid_count: DEFAULT_SINUSOIDS,
            lag_multiplier: 1,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Returns a copy with a different sinusoid count.
    pub fn with_sinusoids(mut self, count: usize) -> Result<Self> {
        self.sinusoid_count = count;
        self.validate()?;
        Ok(self)
    }

    /// Returns a copy with a different sample spacing in channel uses.
    pub fn with_lag_multiplier(mut self, multiplier: usize) -> Result<Self> {
        self.lag_multiplier = multiplier;
        self.validate()?;
        Ok(self)
    }

    /// Checks the type invariants.
    pub fn validate(&self) -> Result<()> {
        if !(self.variance.is_finite() && self.variance > 0.0) {
            return Err(Error::argument(format!("fading variance must be positive, got {}", self.variance)));
        }
        if !(self.normalized_doppler >= 0.0 && self.normalized_doppler < 0.5) {
            return Err(Error::argument(format!(
                "normalized Doppler must lie in [0, 0.5), got {}",
                self.normalized_doppler
            )));
        }
        if self.sinusoid_count < DEFAULT_SINUSOIDS {
            return Err(Error::argument(format!(
                "sinusoid count must be at least {DEFAULT_SINUSOIDS}, got {}",
                self.sinusoid_count
            )));
        }
        if self.lag_multiplier == 0 {
            return Err(Error::argument("lag multiplier must be at least 1"));
        }
        Ok(())
    }

    /// Normalized autocorrelation between consecutive samples, J0(2π f m).
    pub fn alpha(&self) -> f64 {
        self.normalized_autocorr(1)
    }

    /// Normalized autocorrelation at `lag` samples, J0(2π f m lag).
    pub fn normalized_autocorr(&self, lag: usize) -> f64 {
        let arg = 2.0 * PI * self.normalized_doppler * (lag * self.lag_multiplier) as f64;
        bessel_j0(arg).expect("finite Bessel argument")
    }
}

/// Statistics of a cascaded channel h = h1·h2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadedStats {
    /// α = α1·α2, the lag-1 normalized autocorrelation of the product.
    pub alpha_equiv: f64,
    /// σ1²·σ2².
    pub variance: f64,
}

impl CascadedStats {
    /// Statistics of the product of two independent links.
    pub fn from_specs(first: &FadingSpec, second: &FadingSpec) -> Self {
        Self {
            alpha_equiv: first.alpha() * second.alpha(),
            variance: first.variance * second.variance,
        }
    }
}

/// A realization of complex channel gains.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTrace {
    pub samples: Vec<Complex64>,
    /// Generating spec, present for generated traces.
    pub spec: Option<FadingSpec>,
    /// Generating seed, present for generated traces.
    pub seed: Option<u64>,
    /// Product statistics, present for cascaded traces.
    pub cascaded: Option<CascadedStats>,
}

impl ChannelTrace {
    /// Wraps externally supplied gains (e.g. a constant test channel).
    pub fn from_samples(samples: Vec<Complex64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::argument("channel trace must be non-empty"));
        }
        Ok(Self {
            samples,
            spec: None,
            seed: None,
            cascaded: None,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Writes the trace as CSV with columns `index,re,im`.
    pub fn export_csv(&self, path: &Path) -> Result<()> {
        let io_err = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let file = std::fs::File::create(path).map_err(io_err)?;
        let mut writer = csv::Writer::from_writer(std::io::BufWriter::new(file));
        let csv_err = |e: csv::Error| Error::Io {
            path: path.to_path_buf(),
            source: std::io::Error::other(e),
        };
        writer.write_record(["index", "re", "im"]).map_err(csv_err)?;
        for (k, h) in self.samples.iter().enumerate() {
            writer
                .write_record([k.to_string(), h.re.to_string(), h.im.to_string()])
                .map_err(csv_err)?;
        }
        let mut inner = writer.into_inner().map_err(|e| io_err(std::io::Error::other(e.to_string())))?;
        inner.flush().map_err(io_err)
    }
}

/// σ²·J0(2π f · lag · m): the Jakes autocorrelation of a link at `lag` samples.
pub fn jakes_autocorr(lag: usize, spec: &FadingSpec) -> f64 {
    spec.variance * spec.normalized_autocorr(lag)
}

/// Sum-of-sinusoids generator state for one link realization.
///
/// Real and imaginary parts are each √(2/N1)·Σ cos(2π f t·c_n + phase_n) with
/// angles a_n = (2πn − π + θ)/(4N1), c_n = cos a_n (real) or sin a_n
/// (imaginary), and θ, φ_n, ψ_n uniform on [−π, π). Each part then has unit
/// variance, and the output is scaled by √(σ²/2) so E|h|² = σ².
#[derive(Debug, Clone)]
pub struct SumOfSinusoids {
    omega_re: Vec<f64>,
    omega_im: Vec<f64>,
    phase_re: Vec<f64>,
    phase_im: Vec<f64>,
    scale: f64,
    spacing: f64,
}

impl SumOfSinusoids {
    /// Draws the random angles and phases of one realization from `rng`.
    pub fn draw(spec: &FadingSpec, rng: &mut SimRng) -> Self {
        let n1 = spec.sinusoid_count;
        let theta: f64 = rng.random_range(-PI..PI);
        let mut omega_re = Vec::with_capacity(n1);
        let mut omega_im = Vec::with_capacity(n1);
        let mut phase_re = Vec::with_capacity(n1);
        let mut phase_im = Vec::with_capacity(n1);
        let w = 2.0 * PI * spec.normalized_doppler;
        for n in 1..=n1 {
            let a = (2.0 * PI * n as f64 - PI + theta) / (4.0 * n1 as f64);
            omega_re.push(w * a.cos());
            omega_im.push(w * a.sin());
        }
        for _ in 0..n1 {
            phase_re.push(rng.random_range(-PI..PI));
        }
        for _ in 0..n1 {
            phase_im.push(rng.random_range(-PI..PI));
        }
        Self {
            omega_re,
            omega_im,
            phase_re,
            phase_im,
            scale: (2.0 / n1 as f64).sqrt() * (spec.variance / 2.0).sqrt(),
            spacing: spec.lag_multiplier as f64,
        }
    }

    /// Channel gain at sample index `k`.
    pub fn sample(&self, k: usize) -> Complex64 {
        let t = k as f64 * self.spacing;
        let re: f64 = self
            .omega_re
            .iter()
            .zip(&self.phase_re)
            .map(|(w, p)| (w * t + p).cos())
            .sum();
        let im: f64 = self
            .omega_im
            .iter()
            .zip(&self.phase_im)
            .map(|(w, p)| (w * t + p).cos())
            .sum();
        Complex64::new(self.scale * re, self.scale * im)
    }

    /// Fills `out` with samples 0..out.len().
    pub fn fill(&self, out: &mut [Complex64]) {
        for (k, h) in out.iter_mut().enumerate() {
            *h = self.sample(k);
        }
    }
}

/// Generates `length` samples of a fading trace, deterministically from `seed`.
pub fn generate_trace(spec: &FadingSpec, length: usize, seed: u64) -> Result<ChannelTrace> {
    spec.validate()?;
    if length == 0 {
        return Err(Error::argument("trace length must be at least 1"));
    }
    let mut rng = substream(seed, &[crate::rng::purpose::CHANNEL]);
    let generator = SumOfSinusoids::draw(spec, &mut rng);
    let mut samples = vec![Complex64::new(0.0, 0.0); length];
    generator.fill(&mut samples);
    Ok(ChannelTrace {
        samples,
        spec: Some(*spec),
        seed: Some(seed),
        cascaded: None,
    })
}

/// Elementwise product of two traces, h[k] = h1[k]·h2[k].
pub fn cascade(h1: &ChannelTrace, h2: &ChannelTrace) -> Result<ChannelTrace> {
    if h1.len() != h2.len() {
        return Err(Error::argument(format!(
            "cascade requires equal lengths, got {} and {}",
            h1.len(),
            h2.len()
        )));
    }
    let samples = h1.samples.iter().zip(&h2.samples).map(|(a, b)| a * b).collect();
    let cascaded = match (&h1.spec, &h2.spec) {
        (Some(a), Some(b)) => Some(CascadedStats::from_specs(a, b)),
        _ => None,
    };
    Ok(ChannelTrace {
        samples,
        spec: None,
        seed: None,
        cascaded,
    })
}

/// Envelope pdf of the product of two independent Rayleigh gains,
/// (4λ/(σ1²σ2²))·K0(2λ/(σ1σ2)).
pub fn double_rayleigh_envelope_pdf(lambda: f64, sigma1sq: f64, sigma2sq: f64) -> Result<f64> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::domain(format!("envelope must be non-negative, got {lambda}")));
    }
    if !(sigma1sq > 0.0 && sigma2sq > 0.0) {
        return Err(Error::domain("variances must be positive"));
    }
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let s = (sigma1sq * sigma2sq).sqrt();
    Ok(4.0 * lambda / (s * s) * bessel_k0(2.0 * lambda / s)?)
}

/// Envelope cdf of the product of two independent Rayleigh gains,
/// 1 − x·K1(x) with x = 2λ/(σ1σ2).
pub fn double_rayleigh_envelope_cdf(lambda: f64, sigma1sq: f64, sigma2sq: f64) -> Result<f64> {
    if lambda <= 0.0 {
        return Ok(0.0);
    }
    let x = 2.0 * lambda / (sigma1sq * sigma2sq).sqrt();
    if x > 700.0 {
        return Ok(1.0);
    }
    Ok(1.0 - x * bessel_k1(x)?)
}

/// Envelope cdf of a Rayleigh gain with E|h|² = σ²: 1 − exp(−r²/σ²).
pub fn rayleigh_envelope_cdf(r: f64, variance: f64) -> f64 {
    if r <= 0.0 {
        0.0
    } else {
        -(-r * r / variance).exp_m1()
    }
}

/// First-order autoregressive update α·prev + √(1−α²)·innovation.
pub fn ar1_step(prev: Complex64, alpha: f64, innovation: Complex64) -> Result<Complex64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::argument(format!("AR(1) coefficient must lie in [0, 1], got {alpha}")));
    }
    Ok(prev * alpha + innovation * (1.0 - alpha * alpha).sqrt())
}

/// Empirical normalized autocorrelation Re{Σ h[k+lag]h*[k]} / Σ|h[k]|².
pub fn empirical_autocorr(samples: &[Complex64], lag: usize) -> f64 {
    if lag >= samples.len() {
        return 0.0;
    }
    let n = samples.len() - lag;
    let cross: f64 = (0..n).map(|k| (samples[k + lag] * samples[k].conj()).re).sum::<f64>() / n as f64;
    let power: f64 = samples.iter().map(|h| h.norm_sqr()).sum::<f64>() / samples.len() as f64;
    cross / power
}

/// Result of a chi-square goodness-of-fit test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    pub significance: f64,
    pub pass: bool,
}

/// Chi-square test of `values` against a continuous cdf using `bins`
/// equiprobable bins whose edges are found by bisection on the cdf.
pub fn chi_square_fit<F>(values: &[f64], cdf: F, bins: usize, significance: f64) -> Result<ChiSquareReport>
where
    F: Fn(f64) -> Result<f64>,
{
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    if bins < 2 || values.is_empty() {
        return Err(Error::argument("chi-square test needs at least two bins and one value"));
    }
    let mut upper = 1.0;
    while cdf(upper)? < 1.0 - 1e-12 {
        upper *= 2.0;
    }
    let mut edges = Vec::with_capacity(bins - 1);
    for i in 1..bins {
        let target = i as f64 / bins as f64;
        let (mut lo, mut hi) = (0.0, upper);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if cdf(mid)? < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        edges.push(0.5 * (lo + hi));
    }
    let mut counts = vec![0usize; bins];
    for &v in values {
        let idx = edges.partition_point(|&e| e <= v);
        counts[idx] += 1;
    }
    let expected = values.len() as f64 / bins as f64;
    let statistic: f64 = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    let dof = bins - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::numerical(e.to_string()))?;
    let p_value = dist.sf(statistic);
    Ok(ChiSquareReport {
        statistic,
        degrees_of_freedom: dof,
        p_value,
        significance,
        pass: p_value >= significance,
    })
}
