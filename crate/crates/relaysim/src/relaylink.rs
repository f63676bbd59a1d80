//! End-to-end signal paths: source power, fixed-gain relay amplification, and
//! the equivalent cascaded channel plus noise for dual-hop, three-node,
//! multi-relay and distributed space-time coded topologies.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelTrace;
use crate::error::{Error, Result};
use crate::rng::{purpose, substream, SimRng};

/// Powers and noise level of a relay network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    /// Source power P0.
    pub source_power: f64,
    /// Per-relay powers P_i.
    pub relay_powers: Vec<f64>,
    /// Noise power N0 per complex sample.
    pub noise_density: f64,
    /// Fraction of the total power spent by the source, P0/P.
    pub alloc_factor: f64,
    /// Total power P = P0 + Σ P_i.
    pub total_power: f64,
}

impl LinkBudget {
    /// Builds a budget from explicit powers.
    pub fn new(source_power: f64, relay_powers: Vec<f64>, noise_density: f64) -> Result<Self> {
        if !(source_power > 0.0 && source_power.is_finite()) {
            return Err(Error::argument(format!("source power must be positive, got {source_power}")));
        }
        if relay_powers.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
            return Err(Error::argument("relay powers must be positive"));
        }
        if !(noise_density > 0.0 && noise_density.is_finite()) {
            return Err(Error::argument(format!("noise level must be positive, got {noise_density}")));
        }
        let total_power = source_power + relay_powers.iter().sum::<f64>();
        Ok(Self {
            source_power,
            alloc_factor: source_power / total_power,
            relay_powers,
            noise_density,
            total_power,
        })
    }

    /// One relay, P0 = q·P and P1 = (1−q)·P.
    pub fn dual_hop(total_power: f64, alloc_factor: f64, noise_density: f64) -> Result<Self> {
        Self::split(total_power, alloc_factor, 1, noise_density)
    }

    /// R relays sharing (1−q)·P equally, P0 = q·P.
    pub fn split(total_power: f64, alloc_factor: f64, relays: usize, noise_density: f64) -> Result<Self> {
        if !(alloc_factor > 0.0 && alloc_factor < 1.0) {
            return Err(Error::argument(format!("allocation factor must lie in (0, 1), got {alloc_factor}")));
        }
        if relays == 0 {
            return Err(Error::argument("at least one relay is required"));
        }
        let p0 = alloc_factor * total_power;
        let pr = (1.0 - alloc_factor) * total_power / relays as f64;
        Self::new(p0, vec![pr; relays], noise_density)
    }

    /// Symmetric multi-relay split P0 = P/2, P_i = P/(2R).
    pub fn symmetric(total_power: f64, relays: usize, noise_density: f64) -> Result<Self> {
        Self::split(total_power, 0.5, relays, noise_density)
    }

    /// Checks the sum and ratio invariants.
    pub fn validate(&self) -> Result<()> {
        let sum = self.source_power + self.relay_powers.iter().sum::<f64>();
        if (sum - self.total_power).abs() > 1e-9 * self.total_power.max(1.0) {
            return Err(Error::argument("source and relay powers do not add up to the total power"));
        }
        if (self.alloc_factor - self.source_power / self.total_power).abs() > 1e-12 {
            return Err(Error::argument("allocation factor disagrees with the power split"));
        }
        Ok(())
    }

    /// Fixed gain of relay `relay`, √(P_i/(P0·σ_sr² + N0)).
    pub fn amp_factor_of(&self, relay: usize, sigma_sr_sq: f64) -> f64 {
        (self.relay_powers[relay] / (self.source_power * sigma_sr_sq + self.noise_density)).sqrt()
    }
}

/// Fixed relay gain A = √(P1/(P0·σ_sr² + N0)) of the first relay.
///
/// For distributed space-time coding the same expression with P_r gives the
/// relay scaling c.
pub fn amp_factor(budget: &LinkBudget, sigma_sr_sq: f64) -> f64 {
    budget.amp_factor_of(0, sigma_sr_sq)
}

/// Average received SNRs of the three-node and DSTC models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrSummary {
    /// Direct link, P0·σ0²/N0.
    pub rho0: f64,
    /// Source–relay link, P0·σ1²/N0.
    pub rho1: f64,
    /// Cascaded link given |h2|², A²ρ1|h2|²/(1 + A²|h2|²).
    pub rho2_given_h2: f64,
    /// DSTC received SNR given η = Σ|g_i|², P0σ_sr²c²η/(N0(1 + c²η)).
    pub rho_dstc_given_g: f64,
}

/// Computes the SNR summary for given channel variances and realized gains.
pub fn snr_summary(
    budget: &LinkBudget,
    sigma0_sq: f64,
    sigma1_sq: f64,
    amp: f64,
    h2_power: f64,
    eta: f64,
) -> SnrSummary {
    let n0 = budget.noise_density;
    let p0 = budget.source_power;
    let rho1 = p0 * sigma1_sq / n0;
    let a2 = amp * amp;
    SnrSummary {
        rho0: p0 * sigma0_sq / n0,
        rho1,
        rho2_given_h2: a2 * rho1 * h2_power / (1.0 + a2 * h2_power),
        rho_dstc_given_g: p0 * sigma1_sq * a2 * eta / (n0 * (1.0 + a2 * eta)),
    }
}

/// Draws one CN(0, n0) sample.
pub fn complex_noise(rng: &mut SimRng, n0: f64) -> Complex64 {
    let s = (0.5 * n0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Stream tag for noise added at the relay on relayed link `i` (1-based).
fn relay_noise_tag(link: u64) -> [u64; 3] {
    [purpose::NOISE, link, 0]
}

/// Stream tag for noise added at the destination on link `i` (0 = direct).
fn dest_noise_tag(link: u64) -> [u64; 3] {
    [purpose::NOISE, link, 1]
}

fn check_len(name: &str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::argument(format!("{name} has length {got}, expected {expected}")));
    }
    Ok(())
}

/// Relays one sequence: y = A·h2·(√P0·h1·s + w1) + w2.
fn relay_path(
    h1: &[Complex64],
    h2: &[Complex64],
    tx: &[Complex64],
    p0: f64,
    amp: f64,
    n0: f64,
    relay_rng: &mut SimRng,
    dest_rng: &mut SimRng,
) -> Vec<Complex64> {
    let sp = p0.sqrt();
    tx.iter()
        .zip(h1)
        .zip(h2)
        .map(|((&s, &a), &b)| {
            let at_relay = a * s * sp + complex_noise(relay_rng, n0);
            b * at_relay * amp + complex_noise(dest_rng, n0)
        })
        .collect()
}

/// Dual-hop reception y[k] = A√P0·h1[k]h2[k]·s[k] + A·h2[k]·w1[k] + w2[k].
pub fn simulate_dualhop(
    trace_sr: &ChannelTrace,
    trace_rd: &ChannelTrace,
    tx: &[Complex64],
    budget: &LinkBudget,
    amp: f64,
    noise_seed: u64,
) -> Result<Vec<Complex64>> {
    check_len("source-relay trace", tx.len(), trace_sr.len())?;
    check_len("relay-destination trace", tx.len(), trace_rd.len())?;
    let mut relay_rng = substream(noise_seed, &relay_noise_tag(1));
    let mut dest_rng = substream(noise_seed, &dest_noise_tag(1));
    Ok(relay_path(
        &trace_sr.samples,
        &trace_rd.samples,
        tx,
        budget.source_power,
        amp,
        budget.noise_density,
        &mut relay_rng,
        &mut dest_rng,
    ))
}

/// Direct plus relayed reception for a source with R relays.
///
/// Returns y0 (direct, √P0·h0·s + w0) and one relayed sequence per relay,
/// each relay i using its own gain `amps[i]`.
pub fn simulate_multinode(
    trace_sd: &ChannelTrace,
    relays: &[(&ChannelTrace, &ChannelTrace)],
    tx: &[Complex64],
    budget: &LinkBudget,
    amps: &[f64],
    noise_seed: u64,
) -> Result<(Vec<Complex64>, Vec<Vec<Complex64>>)> {
    check_len("source-destination trace", tx.len(), trace_sd.len())?;
    if relays.len() != amps.len() {
        return Err(Error::argument("one amplification factor per relay is required"));
    }
    let n0 = budget.noise_density;
    let sp = budget.source_power.sqrt();
    let mut dest0 = substream(noise_seed, &dest_noise_tag(0));
    let y0 = tx
        .iter()
        .zip(&trace_sd.samples)
        .map(|(&s, &h)| h * s * sp + complex_noise(&mut dest0, n0))
        .collect();
    let mut relayed = Vec::with_capacity(relays.len());
    for (i, ((sr, rd), &amp)) in relays.iter().zip(amps).enumerate() {
        check_len("source-relay trace", tx.len(), sr.len())?;
        check_len("relay-destination trace", tx.len(), rd.len())?;
        let link = i as u64 + 1;
        let mut relay_rng = substream(noise_seed, &relay_noise_tag(link));
        let mut dest_rng = substream(noise_seed, &dest_noise_tag(link));
        relayed.push(relay_path(
            &sr.samples,
            &rd.samples,
            tx,
            budget.source_power,
            amp,
            n0,
            &mut relay_rng,
            &mut dest_rng,
        ));
    }
    Ok((y0, relayed))
}

/// Three-node reception: direct sequence y0 and relayed sequence y2.
pub fn simulate_threenode(
    trace_sd: &ChannelTrace,
    trace_sr: &ChannelTrace,
    trace_rd: &ChannelTrace,
    tx: &[Complex64],
    budget: &LinkBudget,
    amp: f64,
    noise_seed: u64,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let (y0, mut relayed) = simulate_multinode(trace_sd, &[(trace_sr, trace_rd)], tx, budget, &[amp], noise_seed)?;
    Ok((y0, relayed.remove(0)))
}

/// Linear processing at one DSTC relay: t = c·(A·r + B·r*).
#[derive(Debug, Clone, PartialEq)]
pub struct DstcCombiner {
    pub a: DMatrix<Complex64>,
    pub b: DMatrix<Complex64>,
}

impl DstcCombiner {
    /// True when the relay conjugates its input (A = 0, B unitary).
    pub fn conjugates(&self) -> bool {
        self.a.iter().all(|z| z.norm() == 0.0)
    }

    /// Accepts only {A unitary, B = 0} or {A = 0, B unitary}.
    pub fn validate(&self, dimension: usize) -> Result<()> {
        let shape_ok = |m: &DMatrix<Complex64>| m.nrows() == dimension && m.ncols() == dimension;
        if !shape_ok(&self.a) || !shape_ok(&self.b) {
            return Err(Error::config(format!("combiner matrices must be {dimension}×{dimension}")));
        }
        let zero = |m: &DMatrix<Complex64>| m.iter().all(|z| z.norm() == 0.0);
        let unitary =
            |m: &DMatrix<Complex64>| (m.adjoint() * m - DMatrix::identity(dimension, dimension)).norm() < 1e-10;
        if (unitary(&self.a) && zero(&self.b)) || (zero(&self.a) && unitary(&self.b)) {
            Ok(())
        } else {
            Err(Error::config(
                "each relay needs one unitary combiner matrix and the other equal to zero",
            ))
        }
    }
}

/// The two-relay Alamouti combiners A1 = I, B1 = 0, A2 = 0, B2 = [[0, −1], [1, 0]].
pub fn alamouti_combiners() -> Vec<DstcCombiner> {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let zero = DMatrix::from_element(2, 2, z);
    vec![
        DstcCombiner {
            a: DMatrix::identity(2, 2),
            b: zero.clone(),
        },
        DstcCombiner {
            a: zero,
            b: DMatrix::from_row_slice(2, 2, &[z, -one, one, z]),
        },
    ]
}

/// Distributed space-time coded reception of block vectors.
///
/// Block k carries the R-vector s[k]; relay i receives r_i = √(P0·R)·q_i[k]·s[k]
/// + v_i and forwards c·(A_i r_i + B_i r_i*); the destination receives
/// y[k] = Σ g_i[k]·t_i + w, i.e. c√(P0R)·S[k]h[k] plus noise of conditional
/// variance N0(1 + c²Σ|g_i|²). Channels are constant within a block.
pub fn simulate_dstc(
    traces_sr: &[ChannelTrace],
    traces_rd: &[ChannelTrace],
    tx_vectors: &[DVector<Complex64>],
    budget: &LinkBudget,
    combiners: &[DstcCombiner],
    relay_gain: f64,
    noise_seed: u64,
) -> Result<Vec<DVector<Complex64>>> {
    let r = combiners.len();
    if traces_sr.len() != r || traces_rd.len() != r {
        return Err(Error::config(format!(
            "{r} combiners but {} source-relay and {} relay-destination traces",
            traces_sr.len(),
            traces_rd.len()
        )));
    }
    let dim = tx_vectors.first().map(|v| v.len()).unwrap_or(r);
    if dim != r {
        return Err(Error::config(format!("block length {dim} differs from relay count {r}")));
    }
    for c in combiners {
        c.validate(r)?;
    }
    for (sr, rd) in traces_sr.iter().zip(traces_rd) {
        check_len("source-relay trace", tx_vectors.len(), sr.len())?;
        check_len("relay-destination trace", tx_vectors.len(), rd.len())?;
    }
    let n0 = budget.noise_density;
    let amp = (budget.source_power * r as f64).sqrt();
    let mut relay_rngs: Vec<SimRng> = (0..r)
        .map(|i| substream(noise_seed, &relay_noise_tag(i as u64 + 1)))
        .collect();
    let mut dest_rng = substream(noise_seed, &dest_noise_tag(0));
    let mut out = Vec::with_capacity(tx_vectors.len());
    for (k, s) in tx_vectors.iter().enumerate() {
        let mut y = DVector::from_fn(r, |_, _| complex_noise(&mut dest_rng, n0));
        for i in 0..r {
            let q = traces_sr[i].samples[k];
            let g = traces_rd[i].samples[k];
            let rx = DVector::from_fn(r, |j, _| s[j] * q * amp + complex_noise(&mut relay_rngs[i], n0));
            let t = if combiners[i].conjugates() {
                &combiners[i].b * rx.map(|z| z.conj())
            } else {
                &combiners[i].a * rx
            };
            y += t * (g * relay_gain);
        }
        out.push(y);
    }
    Ok(out)
}

/// The space-time matrix S[k] whose column i is A_i s or B_i s*.
pub fn dstc_code_matrix(s: &DVector<Complex64>, combiners: &[DstcCombiner]) -> DMatrix<Complex64> {
    let r = combiners.len();
    let mut m = DMatrix::from_element(s.len(), r, Complex64::new(0.0, 0.0));
    for (i, c) in combiners.iter().enumerate() {
        let col = if c.conjugates() {
            &c.b * s.map(|z| z.conj())
        } else {
            &c.a * s
        };
        m.set_column(i, &col);
    }
    m
}
