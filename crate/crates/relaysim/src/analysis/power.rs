//! Power allocation between Source and relays.
//!
//! The Source transmits P0 = qP and the relay (P1 = (1−q)P) and the
//! optimizer returns the q minimizing an analytic BER. The search is a grid
//! of step 0.01 on [0.01, 0.99] refined by golden section to 1e-3; an
//! optional analytic initializer is evaluated as an extra candidate and can
//! move the refinement bracket.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::dualhop::{cdd_ber_dualhop, DualHopParams};
use super::selection::{sc_slowfading_ber, sc_timevarying_ber_dbpsk, ScTvParams};
use super::{require_alpha, require_positive, UnifiedModParams};
use crate::error::{Error, Result};
use crate::quadrature::golden_section;

const GRID_STEP: f64 = 0.01;
const REFINE_TOL: f64 = 1e-3;

/// Result of a power-allocation search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    /// Optimum Source share q.
    pub alloc_factor: f64,
    /// BER at the optimum.
    pub ber: f64,
    /// Analytic initializer, when one was supplied.
    pub initializer: Option<f64>,
    /// Number of BER evaluations performed.
    pub evaluations: usize,
}

/// Minimizes `ber_of_q` over q ∈ [0.01, 0.99].
pub fn optimize_power_allocation<F: FnMut(f64) -> Result<f64>>(
    mut ber_of_q: F,
    initializer: Option<f64>,
) -> Result<PowerAllocation> {
    let mut evaluations = 0usize;
    let mut eval = |q: f64| -> Result<f64> {
        evaluations += 1;
        let v = ber_of_q(q)?;
        if !v.is_finite() {
            return Err(Error::numerical(format!("BER evaluator returned {v} at q = {q}")));
        }
        Ok(v)
    };
    let steps = (0.98 / GRID_STEP).round() as usize;
    let mut best_q = GRID_STEP;
    let mut best = f64::INFINITY;
    for i in 0..=steps {
        let q = GRID_STEP * (i + 1) as f64;
        let v = eval(q)?;
        if v < best {
            best = v;
            best_q = q;
        }
    }
    if let Some(q0) = initializer.filter(|q| (GRID_STEP..=1.0 - GRID_STEP).contains(q)) {
        let v = eval(q0)?;
        if v < best {
            best = v;
            best_q = q0;
        }
    }
    let lo = (best_q - GRID_STEP).max(GRID_STEP);
    let hi = (best_q + GRID_STEP).min(1.0 - GRID_STEP);
    let refined = golden_section(&mut eval, lo, hi, REFINE_TOL)?;
    let refined_ber = eval(refined)?;
    let (alloc_factor, ber) = if refined_ber <= best {
        (refined, refined_ber)
    } else {
        (best_q, best)
    };
    Ok(PowerAllocation {
        alloc_factor,
        ber,
        initializer,
        evaluations,
    })
}

fn check_split(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::argument(format!("power split q must lie in (0, 1), got {q}")))
    }
}

/// Dual-hop parameters for total power P (N0 = 1) and split q.
pub fn dualhop_params_for_split(
    total_power: f64,
    q: f64,
    sigma1_sq: f64,
    sigma2_sq: f64,
    alpha: f64,
    modulation: UnifiedModParams,
) -> Result<DualHopParams> {
    check_split(q)?;
    let p0 = q * total_power;
    let p1 = (1.0 - q) * total_power;
    Ok(DualHopParams {
        source_power: p0,
        amp: (p1 / (p0 * sigma1_sq + 1.0)).sqrt(),
        noise_density: 1.0,
        sigma1_sq,
        sigma2_sq,
        alpha,
        modulation,
    })
}

/// Approximate objective J̃(q) ≈ b̃3 + (b̃2/σ2²)·ln(σ2²/b̃2) of slow fading at θ = π/2.
fn dualhop_objective_approx(total_power: f64, q: f64, sigma1_sq: f64, sigma2_sq: f64, modulation: &UnifiedModParams) -> f64 {
    let p0 = q * total_power;
    let a2 = (1.0 - q) * total_power / (p0 * sigma1_sq + 1.0);
    let b1 = 1.0 / a2;
    let b2 = 2.0 / (2.0 * a2 + modulation.q(FRAC_PI_2) * a2 * p0 * sigma1_sq);
    b2 / b1 + b2 / sigma2_sq * (sigma2_sq / b2).ln()
}

/// Fast analytic initializer: the minimizer of the approximate objective.
pub fn dualhop_allocation_initializer(
    total_power: f64,
    sigma1_sq: f64,
    sigma2_sq: f64,
    modulation: &UnifiedModParams,
) -> Result<f64> {
    require_positive(total_power, "total power")?;
    golden_section(
        |q| Ok(dualhop_objective_approx(total_power, q, sigma1_sq, sigma2_sq, modulation)),
        GRID_STEP,
        1.0 - GRID_STEP,
        REFINE_TOL,
    )
}

/// Optimum split for two-symbol detection over the dual-hop link (N0 = 1).
pub fn optimize_dualhop_allocation(
    total_power: f64,
    sigma1_sq: f64,
    sigma2_sq: f64,
    alpha: f64,
    modulation: UnifiedModParams,
) -> Result<PowerAllocation> {
    require_positive(total_power, "total power")?;
    require_alpha(alpha, "α")?;
    let init = dualhop_allocation_initializer(total_power, sigma1_sq, sigma2_sq, &modulation)?;
    optimize_power_allocation(
        |q| cdd_ber_dualhop(&dualhop_params_for_split(total_power, q, sigma1_sq, sigma2_sq, alpha, modulation)?),
        Some(init),
    )
}

/// Optimum split for slow-fading SC with unit variances (N0 = 1).
pub fn optimize_sc_slow_allocation(total_power: f64, modulation: UnifiedModParams) -> Result<PowerAllocation> {
    require_positive(total_power, "total power")?;
    optimize_power_allocation(
        |q| {
            check_split(q)?;
            let p0 = q * total_power;
            let amp = ((1.0 - q) * total_power / (p0 + 1.0)).sqrt();
            sc_slowfading_ber(p0, amp, 1.0, &modulation)
        },
        None,
    )
}

/// SC time-varying parameters for total power P (N0 = 1) and split q.
pub fn sc_tv_params_for_split(
    total_power: f64,
    q: f64,
    variances: [f64; 3],
    alpha0: f64,
    alpha: f64,
) -> Result<ScTvParams> {
    check_split(q)?;
    let p0 = q * total_power;
    let p1 = (1.0 - q) * total_power;
    Ok(ScTvParams {
        source_power: p0,
        amp: (p1 / (p0 * variances[1] + 1.0)).sqrt(),
        noise_density: 1.0,
        sigma0_sq: variances[0],
        sigma1_sq: variances[1],
        sigma2_sq: variances[2],
        alpha0,
        alpha,
    })
}

/// Optimum split for DBPSK SC in time-varying fading (N0 = 1).
///
/// `variances` holds [σ0², σ1², σ2²].
pub fn optimize_sc_tv_allocation(
    total_power: f64,
    variances: [f64; 3],
    alpha0: f64,
    alpha: f64,
) -> Result<PowerAllocation> {
    require_positive(total_power, "total power")?;
    optimize_power_allocation(
        |q| sc_timevarying_ber_dbpsk(&sc_tv_params_for_split(total_power, q, variances, alpha0, alpha)?),
        None,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_minimum() {
        let r = optimize_power_allocation(|q| Ok((q - 0.437).powi(2)), None).unwrap();
        assert!((r.alloc_factor - 0.437).abs() < 1e-3);
    }

    #[test]
    fn non_finite_is_an_error() {
        assert!(optimize_power_allocation(|_| Ok(f64::NAN), None).is_err());
    }
}
