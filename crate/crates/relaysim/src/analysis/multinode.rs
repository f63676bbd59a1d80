//! Multi-relay differential amplify-and-forward with combining at the
//! destination: PEP lower bound and error floors.
//!
//! Channels have unit variance and the noise density is one, so powers are
//! SNRs. Branch 0 is the direct Source–Destination link and branches
//! 1..=R are the relayed links.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::{require_alpha, require_positive};
use crate::channel::FadingSpec;
use crate::error::{Error, Result};
use crate::quadrature::integrate_fallible;
use crate::relaylink::LinkBudget;
use crate::specialfn::exp_e1_scaled;

/// Relative tolerance used to decide whether two γ̄ values are equal.
pub const GAMMA_BAR_TOL: f64 = 1e-9;

/// Parameters of the R-relay network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiNodeParams {
    /// Source power P0 (an SNR, since N0 = 1).
    pub source_power: f64,
    /// Amplification factors A_i, one per relay.
    pub amps: Vec<f64>,
    /// Direct-link autocorrelation α0.
    pub alpha0: f64,
    /// Cascaded autocorrelations α_i = α_sr,i·α_rd,i.
    pub alphas: Vec<f64>,
    pub order: usize,
}

/// Per-angle constants of the PEP integrand.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiNodeConstants {
    pub gamma0: f64,
    /// Large-power ceiling of each relayed branch SNR, α_i²A_i²P0/N_i.
    pub gamma_i: Vec<f64>,
    pub eps_i: Vec<f64>,
    pub beta_i: Vec<f64>,
    pub eps_small_i: Vec<f64>,
    pub gamma_bar_0: f64,
    pub gamma_bar_i: Vec<f64>,
}

/// γ̄ = α²/(2(1−α²)), infinite at α = 1.
pub fn gamma_bar_from_alpha(alpha: f64) -> f64 {
    let a2 = alpha * alpha;
    if a2 >= 1.0 {
        f64::INFINITY
    } else {
        a2 / (2.0 * (1.0 - a2))
    }
}

impl MultiNodeParams {
    /// Parameters from a budget and per-link specs; variances must be one and N0 = 1.
    pub fn from_budget(
        budget: &LinkBudget,
        spec_sd: &FadingSpec,
        relay_specs: &[(FadingSpec, FadingSpec)],
        order: usize,
    ) -> Result<Self> {
        budget.validate()?;
        if budget.relay_powers.len() != relay_specs.len() {
            return Err(Error::argument("one (SR, RD) spec pair is needed per relay"));
        }
        if (budget.noise_density - 1.0).abs() > 1e-12 {
            return Err(Error::model("the multi-relay analysis assumes N0 = 1"));
        }
        let unit = |s: &FadingSpec| (s.variance - 1.0).abs() < 1e-12;
        if !unit(spec_sd) || !relay_specs.iter().all(|(a, b)| unit(a) && unit(b)) {
            return Err(Error::model("the multi-relay analysis assumes unit channel variances"));
        }
        let params = Self {
            source_power: budget.source_power,
            amps: (0..relay_specs.len()).map(|i| budget.amp_factor_of(i, 1.0)).collect(),
            alpha0: spec_sd.alpha(),
            alphas: relay_specs.iter().map(|(sr, rd)| sr.alpha() * rd.alpha()).collect(),
            order,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive(self.source_power, "source power")?;
        require_alpha(self.alpha0, "α0")?;
        if self.amps.len() != self.alphas.len() {
            return Err(Error::argument("amps and alphas must have one entry per relay"));
        }
        for (&a, &al) in self.amps.iter().zip(&self.alphas) {
            require_positive(a, "amplification factor")?;
            require_alpha(al, "α_i")?;
        }
        if self.order < 2 || !self.order.is_power_of_two() {
            return Err(Error::argument(format!("invalid PSK order {}", self.order)));
        }
        Ok(())
    }

    pub fn relays(&self) -> usize {
        self.amps.len()
    }

    /// |d_min|² = 4 sin²(π/M).
    pub fn d_min_sq(&self) -> f64 {
        let s = (PI / self.order as f64).sin();
        4.0 * s * s
    }

    /// γ0 = α0²P0/(2P0(1−α0²) + 4 + 2/P0).
    pub fn gamma0(&self) -> f64 {
        let p0 = self.source_power;
        let a2 = self.alpha0 * self.alpha0;
        a2 * p0 / (2.0 * p0 * (1.0 - a2) + 4.0 + 2.0 / p0)
    }

    /// Integrand constants at angle θ ∈ (0, π/2].
    pub fn constants(&self, theta: f64) -> MultiNodeConstants {
        let p0 = self.source_power;
        let x = self.d_min_sq() / (2.0 * theta.sin().powi(2));
        let r = self.relays();
        let mut c = MultiNodeConstants {
            gamma0: self.gamma0(),
            gamma_i: Vec::with_capacity(r),
            eps_i: Vec::with_capacity(r),
            beta_i: Vec::with_capacity(r),
            eps_small_i: Vec::with_capacity(r),
            gamma_bar_0: gamma_bar_from_alpha(self.alpha0),
            gamma_bar_i: self.alphas.iter().map(|&a| gamma_bar_from_alpha(a)).collect(),
        };
        for (&amp, &alpha) in self.amps.iter().zip(&self.alphas) {
            let a2 = amp * amp;
            let al2 = alpha * alpha;
            let n = 2.0 * (1.0 - al2) * a2 * p0 + 4.0 * a2;
            let d = n + x * al2 * a2 * p0;
            c.gamma_i.push(al2 * a2 * p0 / n);
            c.eps_i.push(n / d);
            c.beta_i.push(4.0 / n);
            c.eps_small_i.push(4.0 / d);
        }
        c
    }

    /// Integrand of the PEP, Π I_i(θ)/(1 + γ0|d|²/(2sin²θ)).
    fn integrand(&self, theta: f64) -> Result<f64> {
        let s2 = theta.sin().powi(2);
        if s2 == 0.0 {
            return Ok(0.0);
        }
        let c = self.constants(theta);
        let mut value = 1.0 / (1.0 + c.gamma0 * self.d_min_sq() / (2.0 * s2));
        for i in 0..self.relays() {
            let eps = c.eps_small_i[i];
            value *= c.eps_i[i] * (1.0 + (c.beta_i[i] - eps) * exp_e1_scaled(eps)?);
        }
        Ok(value)
    }
}

/// PEP lower bound (1/π)∫₀^{π/2} Π I_i(θ)/(1 + γ0|d|²/(2sin²θ)) dθ.
///
/// The bound assumes optimum combining weights, so simulated detectors sit on
/// or above it.
pub fn multinode_pep_lowerbound(params: &MultiNodeParams) -> Result<f64> {
    params.validate()?;
    Ok(integrate_fallible(|t| params.integrand(t), 0.0, FRAC_PI_2)? / PI)
}

/// BER lower bound: the PEP for M = 2 and (2/log2M)·PEP for M > 2.
pub fn multinode_ber_lowerbound(params: &MultiNodeParams) -> Result<f64> {
    let pep = multinode_pep_lowerbound(params)?;
    Ok(pep_to_ber(pep, params.order))
}

fn pep_to_ber(pep: f64, order: usize) -> f64 {
    if order == 2 {
        pep
    } else {
        2.0 / order.trailing_zeros() as f64 * pep
    }
}

/// Which closed form evaluates the error floor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FloorCase {
    /// Some γ̄ is infinite, so the floor is zero.
    Vanishing,
    /// All γ̄ distinct (partial fractions).
    Distinct,
    /// All γ̄ equal.
    AllEqual,
    /// Relayed γ̄ equal, direct γ̄ different.
    DirectDistinct,
    /// Any other pattern, or a distinct pattern too close to equal for the
    /// partial-fraction sum to be accurate: quadrature of the limit integrand.
    Quadrature,
}

fn nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= GAMMA_BAR_TOL * a.abs().max(b.abs())
}

/// Partial fractions lose about −R·log10(gap) digits; beyond this loss the
/// quadrature fallback is more accurate.
const MAX_CONDITIONING: f64 = 1e6;

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

/// Selects the floor formula for `gamma_bars` (direct link first).
pub fn multinode_floor_case(gamma_bars: &[f64]) -> FloorCase {
    if gamma_bars.iter().any(|g| g.is_infinite()) {
        return FloorCase::Vanishing;
    }
    let r = gamma_bars.len() - 1;
    if gamma_bars.iter().all(|&g| nearly_equal(g, gamma_bars[0])) {
        return FloorCase::AllEqual;
    }
    let relays = &gamma_bars[1..];
    if relays.iter().all(|&g| nearly_equal(g, relays[0])) {
        let gap = rel_gap(gamma_bars[0], relays[0]);
        return if gap.powi(r as i32) * MAX_CONDITIONING >= 1.0 {
            FloorCase::DirectDistinct
        } else {
            FloorCase::Quadrature
        };
    }
    let mut min_gap = f64::INFINITY;
    for i in 0..gamma_bars.len() {
        for j in (i + 1)..gamma_bars.len() {
            min_gap = min_gap.min(rel_gap(gamma_bars[i], gamma_bars[j]));
        }
    }
    if min_gap.powi(r as i32) * MAX_CONDITIONING >= 1.0 {
        FloorCase::Distinct
    } else {
        FloorCase::Quadrature
    }
}

/// Error floor of the multi-relay PEP, (1/π)∫₀^{π/2} Π_k 1/(1 + γ̄_k|d|²/(2sin²θ)) dθ.
///
/// `gamma_bars` holds the direct-link value followed by the R relayed
/// values, each γ̄ = α²/(2(1−α²)). The closed form is chosen by
/// [`multinode_floor_case`].
pub fn multinode_error_floor(gamma_bars: &[f64], d_min_sq: f64) -> Result<f64> {
    if gamma_bars.is_empty() {
        return Err(Error::argument("at least the direct-link γ̄ is required"));
    }
    require_positive(d_min_sq, "|d_min|²")?;
    if gamma_bars.iter().any(|g| g.is_nan() || *g < 0.0) {
        return Err(Error::argument("γ̄ values must be non-negative"));
    }
    let r = gamma_bars.len() - 1;
    let branch = |g: f64| 0.5 * (1.0 - (g * d_min_sq / (2.0 + g * d_min_sq)).sqrt());
    let equal_sum = |g: f64, terms: usize| {
        let mu = (g * d_min_sq / (g * d_min_sq + 2.0)).sqrt();
        let ratio = 1.0 / (4.0 + 2.0 * g * d_min_sq);
        let mut binom = 1.0;
        let mut pow = 1.0;
        let mut sum = 0.0;
        for l in 0..terms {
            if l > 0 {
                binom *= (2 * (2 * l - 1)) as f64 / l as f64;
                pow *= ratio;
            }
            sum += binom * pow;
        }
        1.0 - mu * sum
    };
    match multinode_floor_case(gamma_bars) {
        FloorCase::Vanishing => Ok(0.0),
        FloorCase::AllEqual => Ok(0.5 * equal_sum(gamma_bars[0], r + 1)),
        FloorCase::Distinct => {
            let mut total = 0.0;
            for (k, &gk) in gamma_bars.iter().enumerate() {
                let mut coef = gk.powi(r as i32);
                for (j, &gj) in gamma_bars.iter().enumerate() {
                    if j != k {
                        coef /= gk - gj;
                    }
                }
                total += coef * branch(gk);
            }
            Ok(total)
        }
        FloorCase::DirectDistinct => {
            let g0 = gamma_bars[0];
            let g = gamma_bars[1];
            let diff = g0 - g;
            let mut total = g0.powi(r as i32) / diff.powi(r as i32) * branch(g0);
            for k in 1..=r {
                let coef = g0.powi((r - k) as i32) * g / (2.0 * diff.powi((r - k + 1) as i32));
                total -= coef * equal_sum(g, k);
            }
            Ok(total)
        }
        FloorCase::Quadrature => floor_by_quadrature(gamma_bars, d_min_sq),
    }
}

/// Direct quadrature of the limit integrand.
pub fn floor_by_quadrature(gamma_bars: &[f64], d_min_sq: f64) -> Result<f64> {
    let value = integrate_fallible(
        |theta| {
            let s2 = theta.sin().powi(2);
            Ok(gamma_bars
                .iter()
                .map(|&g| if g.is_infinite() { 0.0 } else { s2 / (s2 + g * d_min_sq / 2.0) })
                .product())
        },
        0.0,
        FRAC_PI_2,
    )?;
    Ok(value / PI)
}
