//! Simulation of single frames for every supported topology and detector.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;

use super::{Detector, SimConfig, Topology};
use crate::channel::{generate_trace, ChannelTrace, FadingSpec};
use crate::detection::{
    build_mcdsd_covariance, build_msdsd_covariance, cdd_detect, decision_variable, dstc_two_codeword_detect,
    linear_combine, mcdsd_stream, msdsd_stream, select_combine, select_combine_real, semi_mrc_weights_general, tvd_weights,
    CombinerWeights, CovarianceModel,
};
use crate::error::{Error, Result};
use crate::modem::{PskConstellation, UnitaryCodebook};
use crate::relaylink::{
    alamouti_combiners, simulate_dstc, simulate_dualhop, simulate_multinode, DstcCombiner, LinkBudget,
};
use crate::rng::{child_seed, purpose, substream};

/// Everything needed to simulate frames of one sweep point.
///
/// The engine is immutable, so frames can be evaluated concurrently.
#[derive(Debug, Clone)]
pub struct FrameEngine {
    topology: Topology,
    detector: Detector,
    seed: u64,
    snr_index: u64,
    frame_symbols: usize,
    sd: Option<FadingSpec>,
    sr: FadingSpec,
    rd: FadingSpec,
    budget: LinkBudget,
    amps: Vec<f64>,
    constellation: PskConstellation,
    codebook: Option<UnitaryCodebook>,
    combiners: Vec<DstcCombiner>,
    weights: Option<CombinerWeights>,
    cov: Option<CovarianceModel>,
}

impl FrameEngine {
    /// Prepares the engine for sweep point `snr_index` of `config`.
    pub fn new(config: &SimConfig, snr_index: usize) -> Result<Self> {
        config.validate()?;
        let snr_db = *config
            .sweep_db
            .get(snr_index)
            .ok_or_else(|| Error::argument(format!("sweep point {snr_index} does not exist")))?;
        let budget = config.budget_at(snr_db)?;
        let sr = config.link_spec(&config.fading.sr)?;
        let rd = config.link_spec(&config.fading.rd)?;
        let sd = config.fading.sd.map(|s| config.link_spec(&s)).transpose()?;
        let relays = config.topology.relays();
        let amps: Vec<f64> = (0..relays).map(|i| budget.amp_factor_of(i, sr.variance)).collect();
        let constellation = PskConstellation::new(config.order)?;
        let n0 = budget.noise_density;
        let p0 = budget.source_power;

        let weights = match config.detector {
            Detector::SemiMrc => Some(semi_mrc_weights_general(&amps, &vec![rd.variance; relays], n0)?),
            Detector::TvdMrc => {
                let sd = sd.expect("validated direct link");
                let unit = sd.variance == 1.0 && sr.variance == 1.0 && rd.variance == 1.0 && n0 == 1.0;
                if !unit {
                    return Err(Error::config(
                        "time-varying combining weights assume unit channel variances and N0 = 1",
                    ));
                }
                let alphas = vec![sr.alpha() * rd.alpha(); relays];
                Some(tvd_weights(sd.alpha(), &alphas, &amps, p0)?)
            }
            _ => None,
        };
        let cov = match config.detector {
            Detector::Msdsd { window } => Some(build_msdsd_covariance(&sr, &rd, p0, amps[0], n0, window)?),
            Detector::Mcdsd { window } => Some(build_mcdsd_covariance(&sr, &rd, p0, amps[0], relays, n0, window)?),
            _ => None,
        };
        let (codebook, combiners) = match config.topology {
            Topology::Dstc { .. } => (
                Some(UnitaryCodebook::alamouti(constellation.clone())),
                alamouti_combiners(),
            ),
            _ => (None, Vec::new()),
        };
        Ok(Self {
            topology: config.topology,
            detector: config.detector,
            seed: config.seed,
            snr_index: snr_index as u64,
            frame_symbols: config.frame_symbols,
            sd,
            sr,
            rd,
            budget,
            amps,
            constellation,
            codebook,
            combiners,
            weights,
            cov,
        })
    }

    /// Data bits carried by one frame.
    pub fn bits_per_frame(&self) -> u64 {
        let per_symbol = match &self.codebook {
            Some(cb) => cb.bits_per_codeword(),
            None => self.constellation.bits_per_symbol(),
        };
        (self.frame_symbols * per_symbol) as u64
    }

    fn trace(&self, spec: &FadingSpec, frame: u64, link: u64) -> Result<ChannelTrace> {
        let seed = child_seed(self.seed, &[self.snr_index, frame, purpose::CHANNEL, link]);
        generate_trace(spec, self.frame_symbols + 1, seed)
    }

    fn noise_seed(&self, frame: u64) -> u64 {
        child_seed(self.seed, &[self.snr_index, frame, purpose::NOISE])
    }

    /// Simulates frame `frame` and returns (bits, bit errors).
    pub fn run_frame(&self, frame: u64) -> Result<(u64, u64)> {
        let mut data_rng = substream(self.seed, &[self.snr_index, frame, purpose::DATA]);
        let errors = match self.topology {
            Topology::Dstc { .. } => self.run_dstc(frame, &mut data_rng)?,
            _ => self.run_scalar(frame, &mut data_rng)?,
        };
        Ok((self.bits_per_frame(), errors))
    }

    fn run_scalar(&self, frame: u64, data_rng: &mut crate::rng::SimRng) -> Result<u64> {
        let m = self.constellation.order();
        let data: Vec<usize> = (0..self.frame_symbols).map(|_| data_rng.random_range(0..m)).collect();
        let tx: Vec<Complex64> = self
            .constellation
            .diff_encode_indices(&data)
            .into_iter()
            .map(|i| self.constellation.point(i))
            .collect();
        let noise_seed = self.noise_seed(frame);
        let detected: Vec<usize> = match self.topology {
            Topology::Dualhop => {
                let sr = self.trace(&self.sr, frame, 1)?;
                let rd = self.trace(&self.rd, frame, 2)?;
                let y = simulate_dualhop(&sr, &rd, &tx, &self.budget, self.amps[0], noise_seed)?;
                match self.detector {
                    Detector::Msdsd { .. } => {
                        let cov = self.cov.as_ref().expect("covariance built for sphere decoding");
                        msdsd_stream(&y, cov, &self.constellation)?
                    }
                    _ => y.windows(2).map(|w| cdd_detect(w[0], w[1], &self.constellation)).collect(),
                }
            }
            _ => {
                let sd_spec = self.sd.as_ref().expect("validated direct link");
                let sd = self.trace(sd_spec, frame, 0)?;
                let relays = self.topology.relays();
                let mut srs = Vec::with_capacity(relays);
                let mut rds = Vec::with_capacity(relays);
                for i in 0..relays as u64 {
                    srs.push(self.trace(&self.sr, frame, 1 + 2 * i)?);
                    rds.push(self.trace(&self.rd, frame, 2 + 2 * i)?);
                }
                let pairs: Vec<(&ChannelTrace, &ChannelTrace)> = srs.iter().zip(&rds).collect();
                let (y0, relayed) = simulate_multinode(&sd, &pairs, &tx, &self.budget, &self.amps, noise_seed)?;
                let mut zetas = vec![Complex64::new(0.0, 0.0); relays + 1];
                (1..tx.len())
                    .map(|k| {
                        zetas[0] = decision_variable(y0[k - 1], y0[k]);
                        for (z, y) in zetas[1..].iter_mut().zip(&relayed) {
                            *z = decision_variable(y[k - 1], y[k]);
                        }
                        let zeta = match self.detector {
                            Detector::Sc if m == 2 => {
                                Complex64::new(select_combine_real(zetas[0].re, zetas[1].re), 0.0)
                            }
                            Detector::Sc => select_combine(zetas[0], zetas[1]),
                            _ => linear_combine(&zetas, self.weights.as_ref().expect("combining weights"))?,
                        };
                        Ok(self.constellation.min_distance_detect(zeta))
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        Ok(data
            .iter()
            .zip(&detected)
            .map(|(&a, &b)| u64::from(self.constellation.bit_errors(a, b)))
            .sum())
    }

    fn run_dstc(&self, frame: u64, data_rng: &mut crate::rng::SimRng) -> Result<u64> {
        let codebook = self.codebook.as_ref().expect("codebook built for space-time coding");
        let size = codebook.len();
        let data: Vec<usize> = (0..self.frame_symbols).map(|_| data_rng.random_range(0..size)).collect();
        let tx = codebook.diff_encode_matrix(&data)?;
        let relays = self.topology.relays() as u64;
        let mut srs = Vec::with_capacity(relays as usize);
        let mut rds = Vec::with_capacity(relays as usize);
        for i in 0..relays {
            srs.push(self.trace(&self.sr, frame, 1 + 2 * i)?);
            rds.push(self.trace(&self.rd, frame, 2 + 2 * i)?);
        }
        let y: Vec<DVector<Complex64>> = simulate_dstc(
            &srs,
            &rds,
            &tx,
            &self.budget,
            &self.combiners,
            self.amps[0],
            self.noise_seed(frame),
        )?;
        let detected: Vec<usize> = match self.detector {
            Detector::Mcdsd { .. } => {
                let cov = self.cov.as_ref().expect("covariance built for sphere decoding");
                mcdsd_stream(&y, cov, codebook)?
            }
            _ => y
                .windows(2)
                .map(|w| dstc_two_codeword_detect(&w[0], &w[1], codebook))
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(data
            .iter()
            .zip(&detected)
            .map(|(&a, &b)| u64::from(codebook.bit_errors(a, b)))
            .sum())
    }
}
