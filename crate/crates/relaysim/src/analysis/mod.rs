//! Closed-form performance expressions: exact BERs, PEP bounds, error
//! floors, outage probability and power-allocation search.
//!
//! Every evaluator is a pure function of its arguments. Integrals over the
//! unified-approach angle θ use the adaptive Gauss–Kronrod rule of
//! [`crate::quadrature`], and averages over exponentially distributed channel
//! powers use closed forms in E1, so repeated calls are bit-identical.

pub mod dstc;
pub mod dualhop;
pub mod multinode;
pub mod power;
pub mod selection;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::integrate_fallible;
use crate::specialfn::exp_e1_scaled;

pub use dstc::{
    dstc_ber_upperbound, dstc_conditional_bound, dstc_effective_snr, dstc_error_floor, dstc_pep_upperbound,
    DstcPepConstants,
};
pub use dualhop::{
    cdd_ber_dualhop, cdd_error_floor_dualhop, msd_ber_dualhop, msd_ber_union, msd_pep, DualHopConstants,
    DualHopParams,
};
pub use multinode::{
    gamma_bar_from_alpha, multinode_ber_lowerbound, multinode_error_floor, multinode_floor_case,
    multinode_pep_lowerbound, FloorCase, MultiNodeConstants, MultiNodeParams,
};
pub use power::{
    dualhop_allocation_initializer, optimize_dualhop_allocation, optimize_power_allocation,
    optimize_sc_slow_allocation, optimize_sc_tv_allocation, PowerAllocation,
};
pub use selection::{
    sc_outage, sc_slowfading_ber, sc_slowfading_ber_general, sc_timevarying_ber_dbpsk, sc_timevarying_terms,
    sc_tv_error_floor, ScTvConstants, ScTvParams,
};

/// Parameters (a, b) of the unified expression for M-DPSK error rates.
///
/// The conditional BER of a differential detector with effective SNR γ is
/// (1/4π)∫_{−π}^{π} g(θ) e^{−q(θ)γ} dθ. The expression is exact for DBPSK and
/// Gray-mapped DQPSK and an approximation for 8-DPSK.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnifiedModParams {
    pub a: f64,
    pub b: f64,
    pub order: usize,
}

impl UnifiedModParams {
    /// (a, b) = (√(log2M(1−sin(π/M))), √(log2M(1+sin(π/M)))) for M ∈ {2, 4, 8}.
    pub fn for_order(order: usize) -> Result<Self> {
        if !matches!(order, 2 | 4 | 8) {
            return Err(Error::argument(format!(
                "unified BER parameters exist for M ∈ {{2, 4, 8}}, got {order}"
            )));
        }
        let k = order.trailing_zeros() as f64;
        let s = (PI / order as f64).sin();
        let a = (k * (1.0 - s)).max(0.0).sqrt();
        let b = (k * (1.0 + s)).sqrt();
        Ok(Self { a, b, order })
    }

    pub fn dbpsk() -> Self {
        Self::for_order(2).expect("M=2 is supported")
    }

    pub fn dqpsk() -> Self {
        Self::for_order(4).expect("M=4 is supported")
    }

    /// β = a/b.
    pub fn beta(&self) -> f64 {
        self.a / self.b
    }

    pub fn bits_per_symbol(&self) -> f64 {
        self.order.trailing_zeros() as f64
    }

    /// g(θ) = (1−β²)/(1+2β sinθ+β²).
    pub fn g(&self, theta: f64) -> f64 {
        let beta = self.beta();
        (1.0 - beta * beta) / (1.0 + 2.0 * beta * theta.sin() + beta * beta)
    }

    /// q(θ) = (b²/log2M)(1+2β sinθ+β²).
    pub fn q(&self, theta: f64) -> f64 {
        let beta = self.beta();
        self.b * self.b / self.bits_per_symbol() * (1.0 + 2.0 * beta * theta.sin() + beta * beta)
    }

    /// (1/4π)∫_{−π}^{π} g(θ)·f(θ) dθ, the angular average of the unified form.
    pub fn angular_average<F: FnMut(f64) -> Result<f64>>(&self, mut f: F) -> Result<f64> {
        if self.a == 0.0 {
            // g ≡ 1 and q is constant, so the integrand is constant in θ.
            return Ok(0.5 * f(0.0)?);
        }
        let mut integrand = |t: f64| -> Result<f64> { Ok(self.g(t) * f(t)?) };
        let half = PI / 2.0;
        let total = integrate_fallible(&mut integrand, -PI, -half)?
            + integrate_fallible(&mut integrand, -half, half)?
            + integrate_fallible(&mut integrand, half, PI)?;
        Ok(total / (4.0 * PI))
    }
}

/// E[1/(λ+β)] for λ exponential with mean σ², equal to (1/σ²)e^{β/σ²}E1(β/σ²).
pub fn exp_average_inverse(beta: f64, mean: f64) -> Result<f64> {
    if !(beta > 0.0 && mean > 0.0) {
        return Err(Error::domain(format!(
            "exponential average needs β > 0 and mean > 0, got β={beta}, mean={mean}"
        )));
    }
    Ok(exp_e1_scaled(beta / mean)? / mean)
}

/// E[(λ+b1)/(λ+b2)] = 1 + (b1−b2)·E[1/(λ+b2)] for λ exponential with mean σ².
pub fn exp_average_ratio(b1: f64, b2: f64, mean: f64) -> Result<f64> {
    Ok(1.0 + (b1 - b2) * exp_average_inverse(b2, mean)?)
}

/// Terminal speed in km/h for a normalized Doppler f·Ts, carrier fc and symbol time Ts.
pub fn doppler_to_speed(f_norm: f64, carrier_hz: f64, symbol_s: f64) -> Result<f64> {
    if !(f_norm >= 0.0 && carrier_hz > 0.0 && symbol_s > 0.0) {
        return Err(Error::argument(
            "normalized Doppler must be non-negative and carrier and symbol time positive",
        ));
    }
    const LIGHT_SPEED: f64 = 3.0e8;
    Ok(LIGHT_SPEED * (f_norm / symbol_s) / carrier_hz * 3.6)
}

/// α for a normalized Doppler and lag, J0(2π f lag).
pub fn doppler_alpha(f_norm: f64, lag: usize) -> Result<f64> {
    crate::specialfn::bessel_j0(2.0 * PI * f_norm * lag as f64)
}

pub(crate) fn require_alpha(alpha: f64, name: &str) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::argument(format!("{name} must lie in [0, 1], got {alpha}")))
    }
}

pub(crate) fn require_positive(x: f64, name: &str) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::argument(format!("{name} must be positive and finite, got {x}")))
    }
}
