//! Selection combining over a direct link and one relayed link: exact BER
//! in slow fading, outage, and exact DBPSK BER with error floor in
//! time-varying fading.

use serde::{Deserialize, Serialize};

use super::{exp_average_inverse, exp_average_ratio, require_alpha, require_positive, UnifiedModParams};
use crate::channel::FadingSpec;
use crate::error::{Error, Result};
use crate::relaylink::LinkBudget;
use crate::specialfn::{bessel_k1, exp_e1_scaled};

/// Exact slow-fading SC BER with unit Source–Destination and Source–Relay
/// variances and N0 = 1.
///
/// (1/4π)∫ g(θ)[J1 + J2 − J3] dθ, where with α(θ) = q(θ)/2:
/// J1 = 1/(P0α+1) is the direct branch, J2 = b3(1 + (b1−b2)e^{b2}E1(b2)) the
/// relayed branch and J3 the joint term.
pub fn sc_slowfading_ber(source_power: f64, amp: f64, sigma_rd_sq: f64, modulation: &UnifiedModParams) -> Result<f64> {
    sc_slowfading_ber_general(source_power, amp, 1.0, 1.0, sigma_rd_sq, modulation)
}

/// Slow-fading SC BER for arbitrary link variances (N0 = 1).
///
/// The per-branch effective SNRs are γ_sd = P0|h_sd|²/2 and
/// γ_r = A²P0|h_sr|²λ/(2(1+A²λ)) with λ = |h_rd|², and the SC output keeps the
/// larger one.
pub fn sc_slowfading_ber_general(
    source_power: f64,
    amp: f64,
    sigma_sd_sq: f64,
    sigma_sr_sq: f64,
    sigma_rd_sq: f64,
    modulation: &UnifiedModParams,
) -> Result<f64> {
    require_positive(source_power, "source power")?;
    require_positive(amp, "amplification factor")?;
    require_positive(sigma_sd_sq, "σ_sd²")?;
    require_positive(sigma_sr_sq, "σ_sr²")?;
    require_positive(sigma_rd_sq, "σ_rd²")?;
    let a2 = amp * amp;
    let (d, s) = (sigma_sd_sq, sigma_sr_sq);
    modulation.angular_average(|theta| {
        let al = modulation.q(theta) / 2.0;
        let pd = source_power * d * al;
        let ps = source_power * s * al;
        let j1 = 1.0 / (pd + 1.0);
        let b1 = 1.0 / a2;
        let b2 = 1.0 / (a2 * (1.0 + ps));
        let j2 = b2 / b1 * exp_average_ratio(b1, b2, sigma_rd_sq)?;
        let d3 = (s + d) / (s * (1.0 + pd) + d);
        let d1 = d / (a2 * (s + d));
        let d2 = d / (a2 * (s + s * pd + d));
        let j3 = d3 * exp_average_ratio(d1, d2, sigma_rd_sq)?;
        Ok(j1 + j2 - j3)
    })
}

/// Outage probability of SC with coherent branch SNRs P0|h_sd|² and
/// A²P0|h_sr|²|h_rd|²/(1+A²|h_rd|²), unit variances and N0 = 1:
/// (1−e^{−γth/P0})·[1 − e^{−γth/P0}·x K1(x)], x = √(4γth/(A²P0)).
pub fn sc_outage(gamma_th: f64, source_power: f64, amp: f64) -> Result<f64> {
    require_positive(source_power, "source power")?;
    require_positive(amp, "amplification factor")?;
    if gamma_th.is_nan() || gamma_th < 0.0 {
        return Err(Error::argument(format!("SNR threshold must be non-negative, got {gamma_th}")));
    }
    if gamma_th == 0.0 {
        return Ok(0.0);
    }
    if gamma_th.is_infinite() {
        return Ok(1.0);
    }
    let e = (-gamma_th / source_power).exp();
    let x = (4.0 * gamma_th / (amp * amp * source_power)).sqrt();
    let relay_survival = if x > 700.0 { 0.0 } else { e * x * bessel_k1(x)? };
    Ok((1.0 - e) * (1.0 - relay_survival))
}

/// Parameters of SC in time-varying fading with DBPSK.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScTvParams {
    pub source_power: f64,
    pub amp: f64,
    pub noise_density: f64,
    /// Source–Destination variance σ0².
    pub sigma0_sq: f64,
    /// Source–Relay variance σ1².
    pub sigma1_sq: f64,
    /// Relay–Destination variance σ2².
    pub sigma2_sq: f64,
    /// Direct-link autocorrelation α0.
    pub alpha0: f64,
    /// Cascaded autocorrelation α = α1α2.
    pub alpha: f64,
}

/// Constants of the time-varying SC analysis.
///
/// b2, c2, d2 depend on λ = |h2|²; the B-constants are the single-pole
/// parameters of the averaged terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScTvConstants {
    pub b0: f64,
    pub c0: f64,
    pub d0: f64,
    pub b2: f64,
    pub c2: f64,
    pub d2: f64,
    pub big_b1: f64,
    pub big_b2: f64,
    pub tilde_b2: f64,
    pub tilde_b3: f64,
    pub breve_b1: f64,
    pub breve_b2: f64,
    pub breve_b3: f64,
}

impl ScTvParams {
    /// Parameters from a two-node budget and the three link specs.
    pub fn from_budget(
        budget: &LinkBudget,
        spec_sd: &FadingSpec,
        spec_sr: &FadingSpec,
        spec_rd: &FadingSpec,
    ) -> Result<Self> {
        budget.validate()?;
        let p = Self {
            source_power: budget.source_power,
            amp: budget.amp_factor_of(0, spec_sr.variance),
            noise_density: budget.noise_density,
            sigma0_sq: spec_sd.variance,
            sigma1_sq: spec_sr.variance,
            sigma2_sq: spec_rd.variance,
            alpha0: spec_sd.alpha(),
            alpha: spec_sr.alpha() * spec_rd.alpha(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive(self.source_power, "source power")?;
        require_positive(self.amp, "amplification factor")?;
        require_positive(self.noise_density, "noise density")?;
        require_positive(self.sigma0_sq, "σ0²")?;
        require_positive(self.sigma1_sq, "σ1²")?;
        require_positive(self.sigma2_sq, "σ2²")?;
        require_alpha(self.alpha0, "α0")?;
        require_alpha(self.alpha, "α")
    }

    pub fn rho0(&self) -> f64 {
        self.source_power * self.sigma0_sq / self.noise_density
    }

    pub fn rho1(&self) -> f64 {
        self.source_power * self.sigma1_sq / self.noise_density
    }

    /// Constants for Relay–Destination power λ.
    pub fn constants(&self, lambda: f64) -> ScTvConstants {
        let n0 = self.noise_density;
        let (r0, r1) = (self.rho0(), self.rho1());
        let (a0, a) = (self.alpha0, self.alpha);
        let a2 = self.amp * self.amp;
        let x = a2 * lambda;
        let (u, v, w) = (1.0 + r1, 1.0 + (1.0 - a) * r1, 1.0 + (1.0 + a) * r1);
        let tilde_den = 1.0 + (2.0 + a) * r1 + (1.0 + a) * r1 * r1;
        let breve_den = 1.0 + (2.0 - a) * r1 + (1.0 - a) * r1 * r1;
        ScTvConstants {
            b0: 1.0 / (n0 * (1.0 + r0)),
            c0: 2.0 / (n0 * (1.0 + (1.0 - a0) * r0)),
            d0: -2.0 / (n0 * (1.0 + (1.0 + a0) * r0)),
            b2: 1.0 / (n0 * (1.0 + u * x)),
            c2: 2.0 / (n0 * (1.0 + v * x)),
            d2: -2.0 / (n0 * (1.0 + w * x)),
            big_b1: 1.0 / (a2 * v),
            big_b2: 1.0 / (a2 * u),
            tilde_b2: ((3.0 + a + (1.0 - a0) * r0) * r1 + 3.0 + (1.0 - a0) * r0) / (a2 * tilde_den),
            tilde_b3: w * (1.0 + (1.0 - a0) * r0) / (2.0 * a2 * tilde_den),
            breve_b1: 2.0 / (a2 * v),
            breve_b2: ((3.0 - a + (1.0 + a0) * r0) * r1 + 3.0 + (1.0 + a0) * r0) / (a2 * breve_den),
            breve_b3: v * v * (1.0 + (1.0 + a0) * r0) / (4.0 * (1.0 + r0) * breve_den),
        }
    }

    /// Conditional BER given λ = |h2|²,
    /// b0b2/(c0c2) + b0b2/(c0(c0−d2)) + b0b2/(c2(c2−d0)).
    pub fn conditional_ber(&self, lambda: f64) -> f64 {
        let k = self.constants(lambda);
        k.b0 * k.b2 / (k.c0 * k.c2) + k.b0 * k.b2 / (k.c0 * (k.c0 - k.d2)) + k.b0 * k.b2 / (k.c2 * (k.c2 - k.d0))
    }
}

/// The three averaged terms (I1, I2, I3) of the exact time-varying SC BER.
///
/// Each conditional term is a rational function of x = A²λ. Partial
/// fractions reduce every average to E[1/(λ+β)] = (1/σ2²)e^{β/σ2²}E1(β/σ2²),
/// so the result is exact for all powers.
pub fn sc_timevarying_terms(params: &ScTvParams) -> Result<(f64, f64, f64)> {
    params.validate()?;
    let (r0, r1) = (params.rho0(), params.rho1());
    let (a0, a) = (params.alpha0, params.alpha);
    let a2 = params.amp * params.amp;
    let sig = params.sigma2_sq;
    let (u, v, w) = (1.0 + r1, 1.0 + (1.0 - a) * r1, 1.0 + (1.0 + a) * r1);
    // E[1/(p + t·x)] for x = A²λ.
    let avg = |p: f64, t: f64| -> Result<f64> { Ok(exp_average_inverse(p / (t * a2), sig)? / (t * a2)) };

    let b0_over_c0 = (1.0 + (1.0 - a0) * r0) / (2.0 * (1.0 + r0));

    let big_b1 = 1.0 / (a2 * v);
    let big_b2 = 1.0 / (a2 * u);
    let i1 = b0_over_c0 * big_b2 / (2.0 * big_b1) * exp_average_ratio(big_b1, big_b2, sig)?;

    let k0 = 2.0 / (1.0 + (1.0 - a0) * r0);
    let r = 2.0 + (1.0 - a0) * r0;
    let den = u * r - w;
    let p = (u - w) / den;
    let q = w * (r - 1.0) / den;
    let i2 = b0_over_c0 / k0 * (p * avg(1.0, u)? + q * avg(r, w)?);

    let m = 2.0 / (1.0 + (1.0 + a0) * r0);
    let s = 2.0 + (1.0 + a0) * r0;
    let den3 = u * s - v;
    let p3 = (u - v) * (u - v) / (u * den3);
    let q3 = -v * (s - 1.0) * (s - 1.0) / den3;
    let mean = v / u + p3 * avg(1.0, u)? + q3 * avg(s, v)?;
    let i3 = mean / (2.0 * m * (1.0 + r0));
    Ok((i1, i2, i3))
}

/// Exact DBPSK BER of SC in time-varying fading, I1 + I2 + I3.
pub fn sc_timevarying_ber_dbpsk(params: &ScTvParams) -> Result<f64> {
    let (i1, i2, i3) = sc_timevarying_terms(params)?;
    Ok(i1 + i2 + i3)
}

/// Large-power error floor of SC in time-varying fading, Ī1 + Ī2 + Ī3.
///
/// Ī1 = (1−α0)(1−α)/4,
/// Ī2 = ((1−α0)/2)·B̃3·(1/σ2²)e^{B̃2/σ2²}E1(B̃2/σ2²) and
/// Ī3 = B̆3(1 − (B̆2/σ2²)e^{B̆2/σ2²}E1(B̆2/σ2²)), with
/// B̃2 = (qσ0²/(1−q))(1−α0)/(1+α), B̃3 = q(1−α0)σ0²/(2(1−q)),
/// B̆2 = (qσ0²/(1−q))(1+α0)/(1−α) and B̆3 = (1−α)(1+α0)/4.
pub fn sc_tv_error_floor(alpha0: f64, alpha: f64, q: f64, sigma0_sq: f64, sigma2_sq: f64) -> Result<f64> {
    require_alpha(alpha0, "α0")?;
    require_alpha(alpha, "α")?;
    require_positive(sigma0_sq, "σ0²")?;
    require_positive(sigma2_sq, "σ2²")?;
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::argument(format!("power split q must lie in (0, 1), got {q}")));
    }
    let ratio = q * sigma0_sq / (1.0 - q);
    let i1 = 0.25 * (1.0 - alpha0) * (1.0 - alpha);
    let i2 = if alpha0 >= 1.0 {
        0.0
    } else {
        let tb2 = ratio * (1.0 - alpha0) / (1.0 + alpha);
        let tb3 = q * (1.0 - alpha0) * sigma0_sq / (2.0 * (1.0 - q));
        0.5 * (1.0 - alpha0) * tb3 * exp_average_inverse(tb2, sigma2_sq)?
    };
    let i3 = if alpha >= 1.0 {
        0.0
    } else {
        let bb2 = ratio * (1.0 + alpha0) / (1.0 - alpha);
        let bb3 = 0.25 * (1.0 - alpha) * (1.0 + alpha0);
        let z = bb2 / sigma2_sq;
        bb3 * (1.0 - z * exp_e1_scaled(z)?)
    };
    Ok(i1 + i2 + i3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outage_limits() {
        assert_eq!(sc_outage(0.0, 100.0, 1.0).unwrap(), 0.0);
        assert_eq!(sc_outage(f64::INFINITY, 100.0, 1.0).unwrap(), 1.0);
        assert!(sc_outage(1e6, 100.0, 1.0).unwrap() > 0.999);
    }

    #[test]
    fn slow_fading_floor_vanishes() {
        assert_eq!(sc_tv_error_floor(1.0, 1.0, 0.5, 1.0, 1.0).unwrap(), 0.0);
    }
}
