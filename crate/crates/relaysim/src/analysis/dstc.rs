//! Differential distributed space-time coding over R relays: PEP upper
//! bound, effective SNR and error floor.
//!
//! Relay–Destination channels have unit variance, so the relay-gain power
//! sum η = Σ|g_i|² is Gamma(R, 1) distributed.

use serde::{Deserialize, Serialize};

use super::{require_alpha, require_positive};
use crate::error::{Error, Result};
use crate::specialfn::exp_e1_scaled;

/// Constants of the DSTC PEP bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DstcPepConstants {
    /// Eigenvalue of ΔᴴΔ for the error event (2 for BPSK Alamouti, 1 for QPSK).
    pub delta: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// Effective-SNR ceiling α²/(1−α²), infinite at α = 1.
    pub gamma_bar: f64,
}

impl DstcPepConstants {
    /// β1 = 8/(4(1−α²)c²ρ + 8c²) and β2 = 8/(α²c²ρδ + 4(1−α²)c²ρ + 8c²) with ρ = P0σsr²/N0.
    pub fn new(alpha: f64, relay_gain: f64, p0_over_n0: f64, sigma_sr_sq: f64, delta: f64) -> Result<Self> {
        require_alpha(alpha, "α")?;
        require_positive(relay_gain, "relay gain")?;
        require_positive(p0_over_n0, "P0/N0")?;
        require_positive(sigma_sr_sq, "σsr²")?;
        require_positive(delta, "δ")?;
        let c2 = relay_gain * relay_gain;
        let rho = p0_over_n0 * sigma_sr_sq;
        let al2 = alpha * alpha;
        let base = 4.0 * (1.0 - al2) * c2 * rho + 8.0 * c2;
        Ok(Self {
            delta,
            beta1: 8.0 / base,
            beta2: 8.0 / (al2 * c2 * rho * delta + base),
            gamma_bar: if al2 < 1.0 { al2 / (1.0 - al2) } else { f64::INFINITY },
        })
    }
}

/// Effective SNR of differential detection, γ = α²ρ/(1+α²+ρ(1−α²)).
pub fn dstc_effective_snr(rho: f64, alpha: f64) -> Result<f64> {
    require_alpha(alpha, "α")?;
    if rho.is_nan() || rho < 0.0 {
        return Err(Error::argument(format!("ρ must be non-negative, got {rho}")));
    }
    let al2 = alpha * alpha;
    if rho.is_infinite() {
        return Ok(if al2 < 1.0 { al2 / (1.0 - al2) } else { f64::INFINITY });
    }
    Ok(al2 * rho / (1.0 + al2 + rho * (1.0 - al2)))
}

/// Conditional Chernoff-type bound ½(4/(4+γδ))^R.
pub fn dstc_conditional_bound(gamma: f64, delta: f64, relays: usize) -> f64 {
    0.5 * (4.0 / (4.0 + gamma * delta)).powi(relays as i32)
}

/// Upper bound on the error floor, ½(4(1−α²)/(4(1−α²)+α²δ))^R.
pub fn dstc_error_floor(relays: usize, alpha: f64, delta: f64) -> Result<f64> {
    require_alpha(alpha, "α")?;
    require_positive(delta, "δ")?;
    if relays == 0 {
        return Err(Error::argument("at least one relay is required"));
    }
    let t = 4.0 * (1.0 - alpha * alpha);
    Ok(0.5 * (t / (t + alpha * alpha * delta)).powi(relays as i32))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// e^β·∫_β^∞ t^n e^{−t} dt for an integer exponent n (negative allowed).
///
/// n ≥ 0 gives the finite sum Σ_{m=0}^{n} n!/m!·β^m. For n = −p < 0 the
/// integral equals β^{1−p}E_p(β), and e^β E_p(β) follows from the upward
/// recurrence e^βE_{p+1}(β) = (1 − β·e^βE_p(β))/p starting at e^βE1(β).
fn scaled_upper_gamma(n: i64, beta: f64) -> Result<f64> {
    if n >= 0 {
        let n = n as usize;
        Ok((0..=n).map(|m| factorial(n) / factorial(m) * beta.powi(m as i32)).sum())
    } else {
        let p = (-n) as usize;
        let mut en = exp_e1_scaled(beta)?;
        for k in 1..p {
            en = (1.0 - beta * en) / k as f64;
        }
        Ok(beta.powi(1 - p as i32) * en)
    }
}

/// E[(η+β)^{−k}] for η ~ Gamma(R, 1), as the finite sum
/// (e^β/(R−1)!)·Σ_j C(R−1, j)(−β)^{R−1−j}·∫_β^∞ t^{j−k}e^{−t} dt.
pub fn gamma_inverse_moment(beta: f64, k: usize, relays: usize) -> Result<f64> {
    require_positive(beta, "β")?;
    if relays == 0 {
        return Err(Error::argument("at least one relay is required"));
    }
    let r1 = relays - 1;
    let mut sum = 0.0;
    for j in 0..=r1 {
        let sign_pow = (-beta).powi((r1 - j) as i32);
        sum += binomial(r1, j) * sign_pow * scaled_upper_gamma(j as i64 - k as i64, beta)?;
    }
    Ok(sum / factorial(r1))
}

/// Upper bound on the PEP of two-codeword detection,
/// ½(β2/β1)^R Σ_{k=0}^{R} C(R, k)(β1−β2)^k·E[(η+β2)^{−k}].
pub fn dstc_pep_upperbound(
    relays: usize,
    alpha: f64,
    relay_gain: f64,
    p0_over_n0: f64,
    sigma_sr_sq: f64,
    delta: f64,
) -> Result<f64> {
    if relays == 0 {
        return Err(Error::argument("at least one relay is required"));
    }
    let c = DstcPepConstants::new(alpha, relay_gain, p0_over_n0, sigma_sr_sq, delta)?;
    let mut sum = 0.0;
    for k in 0..=relays {
        sum += binomial(relays, k) * (c.beta1 - c.beta2).powi(k as i32) * gamma_inverse_moment(c.beta2, k, relays)?;
    }
    Ok((0.5 * (c.beta2 / c.beta1).powi(relays as i32) * sum).clamp(0.0, 0.5))
}

/// BER bound of the differential Alamouti code, equal to the PEP bound of
/// the nearest codeword pair.
pub fn dstc_ber_upperbound(
    relays: usize,
    alpha: f64,
    relay_gain: f64,
    p0_over_n0: f64,
    sigma_sr_sq: f64,
    delta: f64,
) -> Result<f64> {
    dstc_pep_upperbound(relays, alpha, relay_gain, p0_over_n0, sigma_sr_sq, delta)
}
