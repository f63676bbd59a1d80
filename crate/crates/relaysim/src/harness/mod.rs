//! Monte Carlo BER engine, experiment configuration and result files.
//!
//! A [`SimConfig`] names a topology, a detector, a PSK order, the link fading
//! specs and a sweep of total-power-to-noise ratios. [`run_ber_sweep`]
//! simulates frames at each sweep point until the stop rule fires and
//! attaches the matching closed-form values from [`crate::analysis`].
//!
//! Every random number in frame `f` of sweep point `i` comes from streams
//! keyed by `(seed, i, f, …)`, and frames are evaluated in fixed batches whose
//! counts are summed as integers, so results do not depend on the number of
//! worker threads (capped by the `RELAYSIM_THREADS` environment variable).

mod frame;
mod output;
mod tools;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{
    cdd_ber_dualhop, cdd_error_floor_dualhop, dstc_ber_upperbound, dstc_error_floor, gamma_bar_from_alpha,
    msd_ber_dualhop, multinode_ber_lowerbound, multinode_error_floor, sc_slowfading_ber_general,
    sc_timevarying_ber_dbpsk, sc_tv_error_floor, DualHopParams, MultiNodeParams, ScTvParams, UnifiedModParams,
};
use crate::channel::FadingSpec;
use crate::detection::build_msdsd_covariance;
use crate::error::{Error, Result};
use crate::relaylink::LinkBudget;

pub use frame::FrameEngine;
pub use output::{
    emit_results, parse_csv, parse_json, read_curve, render_csv, render_json, CsvCurve, CsvRow, OutputFormat, CSV_HEADER,
    CSV_VERSION_LINE,
};
pub use tools::{
    floor_grid, power_opt_table, validate_channel, ChannelValidationConfig, ChannelValidationReport, FloorGridConfig,
    FloorGridRow, FloorModel, PowerOptConfig, PowerOptModel, PowerOptRow,
};

/// Frames evaluated between two checks of the stop rule.
pub const BATCH_FRAMES: u64 = 32;
/// Default minimum number of bit errors per sweep point.
pub const DEFAULT_MIN_BIT_ERRORS: u64 = 100;
/// Default maximum number of frames per sweep point.
pub const DEFAULT_MAX_FRAMES: u64 = 10_000_000;
/// Default number of data symbols (or codewords) per frame.
pub const DEFAULT_FRAME_SYMBOLS: usize = 100;
/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "RELAYSIM_THREADS";

/// Network layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Topology {
    /// Source, one relay, destination; no direct link.
    Dualhop,
    /// Source, one relay and a direct link.
    Threenode,
    /// Direct link plus `relays` parallel relays.
    Multinode { relays: usize },
    /// Distributed space-time coding over `relays` relays, no direct link.
    Dstc { relays: usize },
}

impl Topology {
    /// Number of relays.
    pub fn relays(&self) -> usize {
        match *self {
            Topology::Dualhop | Topology::Threenode => 1,
            Topology::Multinode { relays } | Topology::Dstc { relays } => relays,
        }
    }

    /// True when the destination also hears the Source directly.
    pub fn has_direct_link(&self) -> bool {
        matches!(self, Topology::Threenode | Topology::Multinode { .. })
    }
}

/// Receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Detector {
    /// Two-symbol differential detection on the relayed link.
    Cdd,
    /// Linear combining with fixed weights from the average link SNRs.
    SemiMrc,
    /// Linear combining with weights that account for channel variation.
    TvdMrc,
    /// Selection of the branch with the larger decision-variable magnitude
    /// (the larger real part magnitude for DBPSK).
    Sc,
    /// Multiple-symbol differential sphere decoding over `window` symbols.
    Msdsd { window: usize },
    /// Two-codeword differential detection of the space-time code.
    TwoCodeword,
    /// Multiple-codeword differential sphere decoding over `window` blocks.
    Mcdsd { window: usize },
}

/// Fading specs of the links. All relays share the `sr` and `rd` specs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkFading {
    /// Source to destination; required when the topology has a direct link.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sd: Option<FadingSpec>,
    /// Source to relay.
    pub sr: FadingSpec,
    /// Relay to destination.
    pub rd: FadingSpec,
}

/// When to stop simulating a sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopRule {
    #[serde(default = "default_min_errors")]
    pub min_bit_errors: u64,
    #[serde(default = "default_max_frames")]
    pub max_frames: u64,
}

fn default_min_errors() -> u64 {
    DEFAULT_MIN_BIT_ERRORS
}

fn default_max_frames() -> u64 {
    DEFAULT_MAX_FRAMES
}

fn default_frame_symbols() -> usize {
    DEFAULT_FRAME_SYMBOLS
}

fn default_noise_density() -> f64 {
    1.0
}

fn default_alloc_factor() -> f64 {
    0.5
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            min_bit_errors: DEFAULT_MIN_BIT_ERRORS,
            max_frames: DEFAULT_MAX_FRAMES,
        }
    }
}

/// A complete, serializable simulation experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub topology: Topology,
    pub detector: Detector,
    /// PSK order M of the data symbols (of each Alamouti entry for DSTC).
    pub order: usize,
    pub fading: LinkFading,
    /// Source share q of the total power; the relays split the rest equally.
    #[serde(default = "default_alloc_factor")]
    pub alloc_factor: f64,
    /// Noise level N0 at every receiver.
    #[serde(default = "default_noise_density")]
    pub noise_density: f64,
    /// Total power to noise ratios P/N0 in dB, strictly increasing.
    pub sweep_db: Vec<f64>,
    #[serde(default)]
    pub stop: StopRule,
    pub seed: u64,
    /// Data symbols per frame (codewords for DSTC), after one reference.
    #[serde(default = "default_frame_symbols")]
    pub frame_symbols: usize,
}

impl SimConfig {
    /// Parses a JSON document, reporting schema violations as [`Error::Schema`].
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        Ok(config)
    }

    /// Canonical JSON text of the configuration.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("configuration serializes")
    }

    /// Hex SHA-256 digest of the canonical JSON text.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_json().as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Checks field ranges and the detector/topology pairing.
    pub fn validate(&self) -> Result<()> {
        check_pairing(&self.topology, &self.detector)?;
        let relays = self.topology.relays();
        if relays == 0 {
            return Err(Error::config("at least one relay is required"));
        }
        if let Topology::Dstc { relays } = self.topology {
            if relays != 2 {
                return Err(Error::config(format!(
                    "distributed space-time coding is implemented for the two-relay Alamouti code, got {relays} relays"
                )));
            }
        }
        if self.order < 2 || !self.order.is_power_of_two() {
            return Err(Error::config(format!("PSK order must be a power of two ≥ 2, got {}", self.order)));
        }
        match self.detector {
            Detector::Msdsd { window } | Detector::Mcdsd { window } if window < 2 => {
                return Err(Error::config(format!("detection window must be at least 2, got {window}")));
            }
            _ => {}
        }
        self.fading.sr.validate()?;
        self.fading.rd.validate()?;
        match (self.topology.has_direct_link(), &self.fading.sd) {
            (true, None) => return Err(Error::config("this topology needs a source-destination fading spec")),
            (true, Some(sd)) => sd.validate()?,
            (false, Some(_)) => {
                return Err(Error::config("this topology has no source-destination link"));
            }
            (false, None) => {}
        }
        if !(self.alloc_factor > 0.0 && self.alloc_factor < 1.0) {
            return Err(Error::config(format!("alloc_factor must lie in (0, 1), got {}", self.alloc_factor)));
        }
        if !(self.noise_density > 0.0 && self.noise_density.is_finite()) {
            return Err(Error::config("noise_density must be positive"));
        }
        if self.sweep_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("sweep values must be finite"));
        }
        if self.sweep_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("sweep_db must be strictly increasing"));
        }
        if self.stop.max_frames == 0 {
            return Err(Error::config("max_frames must be at least 1"));
        }
        if self.frame_symbols == 0 {
            return Err(Error::config("frame_symbols must be at least 1"));
        }
        Ok(())
    }

    /// Power budget at total power `p_db` (dB relative to N0).
    pub fn budget_at(&self, p_db: f64) -> Result<LinkBudget> {
        let total = self.noise_density * 10f64.powf(p_db / 10.0);
        LinkBudget::split(total, self.alloc_factor, self.topology.relays(), self.noise_density)
    }

    /// Per-link spec with the channel-use spacing of the topology applied.
    pub(crate) fn link_spec(&self, spec: &FadingSpec) -> Result<FadingSpec> {
        match self.topology {
            Topology::Dstc { relays } => spec.with_lag_multiplier(spec.lag_multiplier * relays),
            _ => Ok(*spec),
        }
    }
}

fn check_pairing(topology: &Topology, detector: &Detector) -> Result<()> {
    let ok = match topology {
        Topology::Dualhop => matches!(detector, Detector::Cdd | Detector::Msdsd { .. }),
        Topology::Threenode => matches!(detector, Detector::Sc | Detector::SemiMrc | Detector::TvdMrc),
        Topology::Multinode { .. } => matches!(detector, Detector::SemiMrc | Detector::TvdMrc),
        Topology::Dstc { .. } => matches!(detector, Detector::TwoCodeword | Detector::Mcdsd { .. }),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::config(format!("detector {detector:?} cannot be used with topology {topology:?}")))
    }
}

/// Why simulation of a point stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The bit-error target was reached.
    MinBitErrors,
    /// The frame limit was reached first.
    MaxFrames,
    /// Nothing was simulated (analytic-only curve).
    NotSimulated,
}

/// One point of a BER curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub snr_db: f64,
    pub bits: u64,
    pub bit_errors: u64,
    /// bit_errors / bits; absent on analytic-only curves.
    pub ber_sim: Option<f64>,
    pub ber_analytic: Option<f64>,
    pub floor_analytic: Option<f64>,
    pub frames: u64,
    pub stop_reason: StopReason,
}

/// A simulated or analytic BER curve with the provenance of its configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerCurve {
    pub points: Vec<BerPoint>,
    pub seed: u64,
    pub config_digest: String,
    /// What the analytic column holds ("exact", "lower bound", …), if present.
    pub analytic_kind: Option<String>,
    pub stop: StopRule,
}

impl BerCurve {
    /// Checks ber_sim = bit_errors/bits and bits > 0 on every simulated point.
    pub fn validate(&self) -> Result<()> {
        for p in &self.points {
            match p.ber_sim {
                Some(ber) => {
                    if p.bits == 0 {
                        return Err(Error::argument(format!("point {} dB has no simulated bits", p.snr_db)));
                    }
                    if ber != p.bit_errors as f64 / p.bits as f64 {
                        return Err(Error::argument(format!("point {} dB has an inconsistent BER", p.snr_db)));
                    }
                }
                None => {
                    if p.bits != 0 || p.bit_errors != 0 {
                        return Err(Error::argument(format!("point {} dB has bits but no BER", p.snr_db)));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Closed-form values attached to a configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticPoint {
    pub ber: Option<f64>,
    pub floor: Option<f64>,
}

/// Label of the closed form attached to a configuration, if any.
pub fn analytic_kind(config: &SimConfig) -> Option<&'static str> {
    let unit = unit_variances(config);
    match (config.topology, config.detector) {
        (Topology::Dualhop, Detector::Cdd) if matches!(config.order, 2 | 4 | 8) => Some("exact"),
        (Topology::Dualhop, Detector::Msdsd { .. }) => Some("union bound"),
        (Topology::Threenode, Detector::Sc) if config.order == 2 => Some("exact"),
        (Topology::Threenode, Detector::Sc) if matches!(config.order, 4 | 8) => Some("exact (slow fading)"),
        (Topology::Threenode | Topology::Multinode { .. }, Detector::SemiMrc | Detector::TvdMrc)
            if unit && config.noise_density == 1.0 =>
        {
            Some("lower bound")
        }
        (Topology::Dstc { .. }, Detector::TwoCodeword) if matches!(config.order, 2 | 4) && config.fading.rd.variance == 1.0 => {
            Some("upper bound")
        }
        _ => None,
    }
}

fn unit_variances(config: &SimConfig) -> bool {
    let unit = |s: &FadingSpec| s.variance == 1.0;
    unit(&config.fading.sr) && unit(&config.fading.rd) && config.fading.sd.as_ref().is_none_or(unit)
}

/// Closed-form BER and error floor of `config` at total power `p_db`.
pub fn analytic_point(config: &SimConfig, p_db: f64) -> Result<AnalyticPoint> {
    let none = AnalyticPoint { ber: None, floor: None };
    if analytic_kind(config).is_none() {
        return Ok(none);
    }
    let budget = config.budget_at(p_db)?;
    let sr = config.link_spec(&config.fading.sr)?;
    let rd = config.link_spec(&config.fading.rd)?;
    match (config.topology, config.detector) {
        (Topology::Dualhop, Detector::Cdd) => {
            let modulation = UnifiedModParams::for_order(config.order)?;
            let params = DualHopParams::from_budget(&budget, &sr, &rd, modulation)?;
            Ok(AnalyticPoint {
                ber: Some(cdd_ber_dualhop(&params)?),
                floor: Some(cdd_error_floor_dualhop(params.alpha, &modulation)?),
            })
        }
        (Topology::Dualhop, Detector::Msdsd { window }) => {
            let amp = budget.amp_factor_of(0, sr.variance);
            let cov = build_msdsd_covariance(&sr, &rd, budget.source_power, amp, budget.noise_density, window)?;
            Ok(AnalyticPoint {
                ber: Some(msd_ber_dualhop(&cov, config.order)?),
                floor: None,
            })
        }
        (Topology::Threenode, Detector::Sc) => {
            let sd = config.fading.sd.expect("validated direct link");
            if config.order == 2 {
                let params = ScTvParams::from_budget(&budget, &sd, &sr, &rd)?;
                Ok(AnalyticPoint {
                    ber: Some(sc_timevarying_ber_dbpsk(&params)?),
                    floor: Some(sc_tv_error_floor(
                        params.alpha0,
                        params.alpha,
                        config.alloc_factor,
                        sd.variance,
                        rd.variance,
                    )?),
                })
            } else {
                let modulation = UnifiedModParams::for_order(config.order)?;
                let amp = budget.amp_factor_of(0, sr.variance);
                Ok(AnalyticPoint {
                    ber: Some(sc_slowfading_ber_general(
                        budget.source_power / budget.noise_density,
                        amp,
                        sd.variance,
                        sr.variance,
                        rd.variance,
                        &modulation,
                    )?),
                    floor: None,
                })
            }
        }
        (Topology::Threenode | Topology::Multinode { .. }, _) => {
            let sd = config.fading.sd.expect("validated direct link");
            let pairs = vec![(sr, rd); config.topology.relays()];
            let params = MultiNodeParams::from_budget(&budget, &sd, &pairs, config.order)?;
            let gamma_bars: Vec<f64> = std::iter::once(params.alpha0)
                .chain(params.alphas.iter().copied())
                .map(gamma_bar_from_alpha)
                .collect();
            Ok(AnalyticPoint {
                ber: Some(multinode_ber_lowerbound(&params)?),
                floor: Some(multinode_error_floor(&gamma_bars, params.d_min_sq())?),
            })
        }
        (Topology::Dstc { relays }, Detector::TwoCodeword) => {
            let delta = if config.order == 2 { 2.0 } else { 1.0 };
            let alpha = sr.alpha() * rd.alpha();
            let gain = budget.amp_factor_of(0, sr.variance);
            Ok(AnalyticPoint {
                ber: Some(dstc_ber_upperbound(
                    relays,
                    alpha,
                    gain,
                    budget.source_power / budget.noise_density,
                    sr.variance,
                    delta,
                )?),
                floor: Some(dstc_error_floor(relays, alpha, delta)?),
            })
        }
        _ => Ok(none),
    }
}

/// Builds the rayon pool honouring `RELAYSIM_THREADS`.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let n: usize = value
            .trim()
            .parse()
            .map_err(|_| Error::config(format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
        if n == 0 {
            return Err(Error::config(format!("{THREADS_ENV} must be at least 1")));
        }
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::config(e.to_string()))
}

/// Simulated counts of one sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointCounts {
    pub frames: u64,
    pub bits: u64,
    pub bit_errors: u64,
}

/// Simulates one sweep point until the stop rule fires.
pub fn simulate_point(config: &SimConfig, snr_index: usize) -> Result<PointCounts> {
    let engine = FrameEngine::new(config, snr_index)?;
    let mut counts = PointCounts {
        frames: 0,
        bits: 0,
        bit_errors: 0,
    };
    while counts.bit_errors < config.stop.min_bit_errors && counts.frames < config.stop.max_frames {
        let batch = BATCH_FRAMES.min(config.stop.max_frames - counts.frames);
        let start = counts.frames;
        let (bits, errors) = (start..start + batch)
            .into_par_iter()
            .map(|f| engine.run_frame(f))
            .try_reduce(|| (0u64, 0u64), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
        counts.frames += batch;
        counts.bits += bits;
        counts.bit_errors += errors;
    }
    Ok(counts)
}

/// Runs the whole sweep and attaches closed-form values where available.
pub fn run_ber_sweep(config: &SimConfig) -> Result<BerCurve> {
    config.validate()?;
    let pool = thread_pool()?;
    let mut points = Vec::with_capacity(config.sweep_db.len());
    for (i, &snr_db) in config.sweep_db.iter().enumerate() {
        let counts = pool.install(|| simulate_point(config, i))?;
        let analytic = analytic_point(config, snr_db)?;
        let stop_reason = if counts.bit_errors >= config.stop.min_bit_errors {
            StopReason::MinBitErrors
        } else {
            StopReason::MaxFrames
        };
        points.push(BerPoint {
            snr_db,
            bits: counts.bits,
            bit_errors: counts.bit_errors,
            ber_sim: Some(counts.bit_errors as f64 / counts.bits as f64),
            ber_analytic: analytic.ber,
            floor_analytic: analytic.floor,
            frames: counts.frames,
            stop_reason,
        });
    }
    Ok(BerCurve {
        points,
        seed: config.seed,
        config_digest: config.digest(),
        analytic_kind: analytic_kind(config).map(str::to_string),
        stop: config.stop,
    })
}

/// The closed-form curve of `config` without any simulation.
pub fn analytic_curve(config: &SimConfig) -> Result<BerCurve> {
    config.validate()?;
    let kind = analytic_kind(config)
        .ok_or_else(|| Error::config("no closed form is available for this configuration"))?;
    let points = config
        .sweep_db
        .iter()
        .map(|&snr_db| {
            let a = analytic_point(config, snr_db)?;
            Ok(BerPoint {
                snr_db,
                bits: 0,
                bit_errors: 0,
                ber_sim: None,
                ber_analytic: a.ber,
                floor_analytic: a.floor,
                frames: 0,
                stop_reason: StopReason::NotSimulated,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BerCurve {
        points,
        seed: config.seed,
        config_digest: config.digest(),
        analytic_kind: Some(kind.to_string()),
        stop: config.stop,
    })
}
