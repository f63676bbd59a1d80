//! Error-floor grids, power-allocation tables and channel validation reports.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    cdd_error_floor_dualhop, doppler_alpha, dstc_error_floor, gamma_bar_from_alpha, multinode_error_floor,
    optimize_dualhop_allocation, optimize_sc_slow_allocation, optimize_sc_tv_allocation, sc_tv_error_floor,
    PowerAllocation, UnifiedModParams,
};
use crate::channel::{
    chi_square_fit, double_rayleigh_envelope_cdf, rayleigh_envelope_cdf, ChiSquareReport, FadingSpec, SumOfSinusoids,
};
use crate::error::{Error, Result};
use crate::modem::PskConstellation;
use crate::rng::{purpose, substream};

/// Closed-form error floors available on a Doppler grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FloorModel {
    /// Two-symbol detection over a dual-hop link.
    Dualhop,
    /// DBPSK selection combining with a direct link.
    ScTimevarying,
    /// Linear combining over a direct link and R relays.
    Multinode,
    /// Two-codeword detection of the distributed space-time code.
    Dstc,
}

fn default_order() -> usize {
    2
}

fn default_half() -> f64 {
    0.5
}

fn default_relays() -> usize {
    2
}

fn default_unit_variances() -> [f64; 3] {
    [1.0, 1.0, 1.0]
}

/// Error floors against a normalized Doppler applied to every link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloorGridConfig {
    pub model: FloorModel,
    #[serde(default = "default_order")]
    pub order: usize,
    /// Normalized Doppler values f_D·T_s.
    pub dopplers: Vec<f64>,
    /// Source share q (selection combining only).
    #[serde(default = "default_half")]
    pub alloc_factor: f64,
    /// Relay count (multi-relay and space-time models).
    #[serde(default = "default_relays")]
    pub relays: usize,
    /// [σ0², σ1², σ2²] (selection combining only).
    #[serde(default = "default_unit_variances")]
    pub variances: [f64; 3],
}

/// One row of an error-floor grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloorGridRow {
    pub doppler: f64,
    /// Autocorrelation of the relayed (cascaded) channel at the symbol or block spacing.
    pub alpha: f64,
    pub floor: f64,
}

/// Evaluates the error floor of `config.model` at every Doppler value.
pub fn floor_grid(config: &FloorGridConfig) -> Result<Vec<FloorGridRow>> {
    if config.dopplers.iter().any(|f| !(*f >= 0.0 && *f < 0.5)) {
        return Err(Error::config("normalized Doppler values must lie in [0, 0.5)"));
    }
    config
        .dopplers
        .iter()
        .map(|&f| {
            let (alpha, floor) = match config.model {
                FloorModel::Dualhop => {
                    let alpha = doppler_alpha(f, 1)?.powi(2);
                    let modulation = UnifiedModParams::for_order(config.order)?;
                    (alpha, cdd_error_floor_dualhop(alpha, &modulation)?)
                }
                FloorModel::ScTimevarying => {
                    if config.order != 2 {
                        return Err(Error::config("the selection-combining floor is derived for DBPSK"));
                    }
                    let alpha0 = doppler_alpha(f, 1)?;
                    let alpha = alpha0 * alpha0;
                    let [s0, _, s2] = config.variances;
                    (alpha, sc_tv_error_floor(alpha0, alpha, config.alloc_factor, s0, s2)?)
                }
                FloorModel::Multinode => {
                    let alpha0 = doppler_alpha(f, 1)?;
                    let alpha = alpha0 * alpha0;
                    let mut bars = vec![gamma_bar_from_alpha(alpha0)];
                    bars.extend(std::iter::repeat_n(gamma_bar_from_alpha(alpha), config.relays));
                    let d2 = PskConstellation::new(config.order)?.min_distance_sq();
                    (alpha, multinode_error_floor(&bars, d2)?)
                }
                FloorModel::Dstc => {
                    let delta = match config.order {
                        2 => 2.0,
                        4 => 1.0,
                        m => return Err(Error::config(format!("space-time floor needs order 2 or 4, got {m}"))),
                    };
                    let alpha = doppler_alpha(f, config.relays)?.powi(2);
                    (alpha, dstc_error_floor(config.relays, alpha, delta)?)
                }
            };
            Ok(FloorGridRow { doppler: f, alpha, floor })
        })
        .collect()
}

/// Power-allocation problems with an analytic objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerOptModel {
    /// Two-symbol detection over a dual-hop link; variances [σ1², σ2²].
    Dualhop,
    /// Selection combining in slow fading; unit variances.
    ScSlow,
    /// DBPSK selection combining in time-varying fading; variances [σ0², σ1², σ2²].
    ScTimevarying,
}

/// A table of optimum power splits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerOptConfig {
    pub model: PowerOptModel,
    #[serde(default = "default_order")]
    pub order: usize,
    /// Total power to noise ratios P/N0 in dB.
    pub total_power_db: Vec<f64>,
    /// Variance scenarios, one table row per (power, scenario).
    pub scenarios: Vec<Vec<f64>>,
    /// Normalized Dopplers [f0, f1, f2] (f0 is ignored without a direct link).
    #[serde(default)]
    pub dopplers: [f64; 3],
}

/// One row of a power-allocation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerOptRow {
    pub total_power_db: f64,
    pub variances: Vec<f64>,
    pub alloc_factor: f64,
    pub ber: f64,
    pub initializer: Option<f64>,
}

/// Optimizes the power split for every (power, scenario) pair.
pub fn power_opt_table(config: &PowerOptConfig) -> Result<Vec<PowerOptRow>> {
    let modulation = UnifiedModParams::for_order(config.order)?;
    let [f0, f1, f2] = config.dopplers;
    let alpha0 = doppler_alpha(f0, 1)?;
    let alpha = doppler_alpha(f1, 1)? * doppler_alpha(f2, 1)?;
    let mut rows = Vec::new();
    for &p_db in &config.total_power_db {
        let p = 10f64.powf(p_db / 10.0);
        for scenario in &config.scenarios {
            let result: PowerAllocation = match (config.model, scenario.as_slice()) {
                (PowerOptModel::Dualhop, &[s1, s2]) => optimize_dualhop_allocation(p, s1, s2, alpha, modulation)?,
                (PowerOptModel::ScSlow, &[s0, s1, s2]) if s0 == 1.0 && s1 == 1.0 && s2 == 1.0 => {
                    optimize_sc_slow_allocation(p, modulation)?
                }
                (PowerOptModel::ScTimevarying, &[s0, s1, s2]) => {
                    if config.order != 2 {
                        return Err(Error::config("the time-varying selection analysis is derived for DBPSK"));
                    }
                    optimize_sc_tv_allocation(p, [s0, s1, s2], alpha0, alpha)?
                }
                (model, v) => {
                    return Err(Error::config(format!("scenario {v:?} does not fit the {model:?} model")));
                }
            };
            rows.push(PowerOptRow {
                total_power_db: p_db,
                variances: scenario.clone(),
                alloc_factor: result.alloc_factor,
                ber: result.ber,
                initializer: result.initializer,
            });
        }
    }
    Ok(rows)
}

fn default_samples() -> usize {
    1_000_000
}

fn default_significance() -> f64 {
    0.01
}

fn default_bins() -> usize {
    100
}

fn default_autocorr_tol() -> f64 {
    0.01
}

/// Statistical checks of the fading generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelValidationConfig {
    /// First (or only) link.
    pub first: FadingSpec,
    /// Second link; when present the product channel is tested.
    #[serde(default)]
    pub second: Option<FadingSpec>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    pub seed: u64,
    #[serde(default = "default_significance")]
    pub significance: f64,
    #[serde(default = "default_bins")]
    pub bins: usize,
    /// Allowed absolute error of the lag-1 autocorrelation.
    #[serde(default = "default_autocorr_tol")]
    pub autocorr_tol: f64,
}

/// Outcome of [`validate_channel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelValidationReport {
    pub samples: usize,
    pub sample_variance: f64,
    pub expected_variance: f64,
    pub autocorr_lag1: f64,
    pub expected_autocorr_lag1: f64,
    pub autocorr_pass: bool,
    pub envelope: ChiSquareReport,
}

impl ChannelValidationReport {
    pub fn pass(&self) -> bool {
        self.autocorr_pass && self.envelope.pass
    }

    /// Human-readable PASS/FAIL lines.
    pub fn render(&self) -> String {
        let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
        format!(
            "samples: {}\nvariance: {:.5} (expected {:.5})\nautocorrelation: {} lag-1 {:.5} (expected {:.5})\nenvelope: {} chi-square {:.2} on {} dof, p = {:.4} (significance {})\n",
            self.samples,
            self.sample_variance,
            self.expected_variance,
            verdict(self.autocorr_pass),
            self.autocorr_lag1,
            self.expected_autocorr_lag1,
            verdict(self.envelope.pass),
            self.envelope.statistic,
            self.envelope.degrees_of_freedom,
            self.envelope.p_value,
            self.envelope.significance,
        )
    }
}

/// Draws `samples` independent realizations of the (possibly cascaded)
/// channel, each evaluated at two consecutive channel uses, and tests the
/// lag-1 autocorrelation and the envelope distribution of the first sample.
///
/// Independent realizations keep the chi-square test valid: samples taken
/// along one trace are strongly correlated and would overstate the evidence.
pub fn validate_channel(config: &ChannelValidationConfig) -> Result<ChannelValidationReport> {
    config.first.validate()?;
    if let Some(s) = &config.second {
        s.validate()?;
    }
    if config.samples < config.bins * 5 {
        return Err(Error::config("at least five samples per bin are required"));
    }
    let mut cross = 0.0;
    let mut power = 0.0;
    let mut envelope = Vec::with_capacity(config.samples);
    for i in 0..config.samples as u64 {
        let mut rng = substream(config.seed, &[i, purpose::CHANNEL, 1]);
        let g1 = SumOfSinusoids::draw(&config.first, &mut rng);
        let (mut h0, mut h1) = (g1.sample(0), g1.sample(1));
        if let Some(second) = &config.second {
            let mut rng2 = substream(config.seed, &[i, purpose::CHANNEL, 2]);
            let g2 = SumOfSinusoids::draw(second, &mut rng2);
            h0 *= g2.sample(0);
            h1 *= g2.sample(1);
        }
        cross += (h1 * h0.conj()).re;
        power += 0.5 * (h0.norm_sqr() + h1.norm_sqr());
        envelope.push(Complex64::norm(h0));
    }
    let n = config.samples as f64;
    let sample_variance = power / n;
    let autocorr_lag1 = cross / power;
    let (expected_variance, expected_autocorr_lag1) = match &config.second {
        Some(s) => (config.first.variance * s.variance, config.first.alpha() * s.alpha()),
        None => (config.first.variance, config.first.alpha()),
    };
    let report = match &config.second {
        Some(s) => {
            let (v1, v2) = (config.first.variance, s.variance);
            chi_square_fit(&envelope, |x| double_rayleigh_envelope_cdf(x, v1, v2), config.bins, config.significance)?
        }
        None => {
            let v = config.first.variance;
            chi_square_fit(&envelope, |x| Ok(rayleigh_envelope_cdf(x, v)), config.bins, config.significance)?
        }
    };
    Ok(ChannelValidationReport {
        samples: config.samples,
        sample_variance,
        expected_variance,
        autocorr_lag1,
        expected_autocorr_lag1,
        autocorr_pass: (autocorr_lag1 - expected_autocorr_lag1).abs() <= config.autocorr_tol,
        envelope: report,
    })
}
