//! Dual-hop differential amplify-and-forward: exact two-symbol BER, error
//! floor, and the multiple-symbol PEP with its union-bound BER.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{exp_average_ratio, require_alpha, require_positive, UnifiedModParams};
use crate::channel::FadingSpec;
use crate::detection::CovarianceModel;
use crate::error::{Error, Result};
use crate::relaylink::LinkBudget;

/// Link and fading parameters of a dual-hop Source → Relay → Destination link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualHopParams {
    /// Source power P0.
    pub source_power: f64,
    /// Relay amplification factor A.
    pub amp: f64,
    pub noise_density: f64,
    /// Source–Relay channel variance σ1².
    pub sigma1_sq: f64,
    /// Relay–Destination channel variance σ2².
    pub sigma2_sq: f64,
    /// Cascaded autocorrelation α = α1α2.
    pub alpha: f64,
    pub modulation: UnifiedModParams,
}

/// Constants of the conditional BER at one angle θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualHopConstants {
    /// Large-power ceiling of the mean effective SNR, α²/((1−α²)σ1²).
    pub gamma_bar_ceiling: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
}

impl DualHopParams {
    /// Parameters for a budget and the two link fading specs.
    pub fn from_budget(
        budget: &LinkBudget,
        spec_sr: &FadingSpec,
        spec_rd: &FadingSpec,
        modulation: UnifiedModParams,
    ) -> Result<Self> {
        budget.validate()?;
        let params = Self {
            source_power: budget.source_power,
            amp: budget.amp_factor_of(0, spec_sr.variance),
            noise_density: budget.noise_density,
            sigma1_sq: spec_sr.variance,
            sigma2_sq: spec_rd.variance,
            alpha: spec_sr.alpha() * spec_rd.alpha(),
            modulation,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive(self.source_power, "source power")?;
        require_positive(self.amp, "amplification factor")?;
        require_positive(self.noise_density, "noise density")?;
        require_positive(self.sigma1_sq, "σ1²")?;
        require_positive(self.sigma2_sq, "σ2²")?;
        require_alpha(self.alpha, "α")
    }

    /// ρ1 = P0σ1²/N0.
    pub fn rho1(&self) -> f64 {
        self.source_power * self.sigma1_sq / self.noise_density
    }

    /// γ̄ for a given Relay–Destination power |h2|².
    pub fn gamma_bar(&self, h2_power: f64) -> f64 {
        let a2 = self.amp * self.amp;
        let al2 = self.alpha * self.alpha;
        al2 * a2 * (self.source_power / self.noise_density) * h2_power
            / (1.0 + al2 + (1.0 + al2 + (1.0 - al2) * self.rho1()) * a2 * h2_power)
    }

    /// b1, b2(θ), b3(θ) with 1/(γ̄σ1²q(θ)+1) = b3(λ+b1)/(λ+b2) for λ = |h2|².
    pub fn constants(&self, theta: f64) -> DualHopConstants {
        let a2 = self.amp * self.amp;
        let al2 = self.alpha * self.alpha;
        let rho1 = self.rho1();
        let k = (1.0 + al2 + (1.0 - al2) * rho1) * a2;
        let b1 = (1.0 + al2) / k;
        let b2 = (1.0 + al2) / (k + al2 * self.modulation.q(theta) * a2 * rho1);
        let gamma_bar_ceiling = if al2 < 1.0 {
            al2 / ((1.0 - al2) * self.sigma1_sq)
        } else {
            f64::INFINITY
        };
        DualHopConstants {
            gamma_bar_ceiling,
            b1,
            b2,
            b3: b2 / b1,
        }
    }
}

/// Exact BER of two-symbol differential detection over the dual-hop link,
/// (1/4π)∫ g(θ) J(θ) dθ with J(θ) = b3(1 + (b1−b2)/σ2²·e^{b2/σ2²}E1(b2/σ2²)).
pub fn cdd_ber_dualhop(params: &DualHopParams) -> Result<f64> {
    params.validate()?;
    params.modulation.angular_average(|theta| {
        let c = params.constants(theta);
        Ok(c.b3 * exp_average_ratio(c.b1, c.b2, params.sigma2_sq)?)
    })
}

/// Large-power error floor (1/4π)∫ g(θ)(1−α²)/(α²q(θ)+1−α²) dθ; zero at α=1.
pub fn cdd_error_floor_dualhop(alpha: f64, modulation: &UnifiedModParams) -> Result<f64> {
    require_alpha(alpha, "α")?;
    let al2 = alpha * alpha;
    if al2 >= 1.0 {
        return Ok(0.0);
    }
    modulation.angular_average(|theta| Ok((1.0 - al2) / (al2 * modulation.q(theta) + 1.0 - al2)))
}

/// Number of terms in the characteristic-function inversion sum.
const INVERSION_TERMS: usize = 64;

/// Pairwise error probability P(s → ŝ) of multiple-symbol detection.
///
/// The decision metric of a candidate s is yᴴ diag(s) C⁻¹ diag(s*) y, so the
/// error event is Δ = yᴴ Q y ≤ 0 with
/// Q = diag(ŝ) C⁻¹ diag(ŝ*) − diag(s) C⁻¹ diag(s*). Given s, y is modelled as
/// CN(0, Σ̄y) with Σ̄y = diag(s) C diag(s*), so E[e^{−tΔ}] = 1/det(I + tΣ̄yQ).
/// The probability is recovered with the Gauss–Chebyshev inversion
/// P(Δ ≤ 0) ≈ (1/q)Σ_{k=1}^{q/2}[Re Φ(c+jcτk) + τk Im Φ(c+jcτk)],
/// τk = tan((2k−1)π/(2q)), q = 64, with c half the smallest positive pole.
pub fn msd_pep(s: &[Complex64], s_hat: &[Complex64], cov: &CovarianceModel) -> Result<f64> {
    let n = cov.dimension;
    if s.len() != n || s_hat.len() != n {
        return Err(Error::argument(format!(
            "symbol vectors must have length {n}, got {} and {}",
            s.len(),
            s_hat.len()
        )));
    }
    if s.iter().zip(s_hat).all(|(a, b)| (a - b).norm() < 1e-12) {
        return Err(Error::argument("s and ŝ must differ"));
    }
    let c = cov.matrix.map(|x| Complex64::new(x, 0.0));
    let c_inv = c
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::numerical("covariance is singular"))?;
    let diag = |v: &[Complex64]| DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(v));
    let conj = |v: &[Complex64]| v.iter().map(|x| x.conj()).collect::<Vec<_>>();
    let q = diag(s_hat) * &c_inv * diag(&conj(s_hat)) - diag(s) * &c_inv * diag(&conj(s));
    let sigma = diag(s) * &c * diag(&conj(s));
    let eigenvalues = quadratic_form_eigenvalues(&sigma, &q)?;
    pep_from_eigenvalues(&eigenvalues)
}

/// Eigenvalues of Σ̄y Q, computed as those of the Hermitian Lᴴ Q L with Σ̄y = L Lᴴ.
fn quadratic_form_eigenvalues(sigma: &DMatrix<Complex64>, q: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let l = sigma
        .clone()
        .cholesky()
        .ok_or_else(|| Error::numerical("Σ̄y is not positive definite"))?
        .l();
    let h = l.adjoint() * q * &l;
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(h.symmetric_eigenvalues().iter().copied().collect())
}

/// P(Δ ≤ 0) for Δ = Σ λ_i |z_i|², z_i iid CN(0,1), by characteristic-function inversion.
pub fn pep_from_eigenvalues(eigenvalues: &[f64]) -> Result<f64> {
    let scale = eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let smallest_pole = eigenvalues
        .iter()
        .filter(|&&l| l < -1e-12 * scale)
        .map(|&l| -1.0 / l)
        .fold(f64::INFINITY, f64::min);
    if !smallest_pole.is_finite() {
        return Err(Error::numerical(
            "no positive pole: the quadratic form is non-negative, so the pole location fails",
        ));
    }
    let c = 0.5 * smallest_pole;
    let q = INVERSION_TERMS;
    let mut sum = 0.0;
    for k in 1..=q / 2 {
        let tau = ((2 * k - 1) as f64 * std::f64::consts::PI / (2 * q) as f64).tan();
        let t = Complex64::new(c, c * tau);
        let phi = eigenvalues
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, &l| acc / (Complex64::new(1.0, 0.0) + t * l));
        sum += phi.re + tau * phi.im;
    }
    Ok((sum / q as f64).clamp(0.0, 1.0))
}

/// Union-bound BER from the dominant-error PEP, w·PEP/(log2M·(N−1)).
pub fn msd_ber_union(pep: f64, window: usize, order: usize) -> Result<f64> {
    if window < 2 {
        return Err(Error::argument("window size N must be at least 2"));
    }
    if order < 2 || !order.is_power_of_two() {
        return Err(Error::argument(format!("invalid PSK order {order}")));
    }
    let n1 = (window - 1) as f64;
    let w = if order == 2 { 2.0 * n1 } else { 4.0 * n1 };
    Ok(w * pep / (order.trailing_zeros() as f64 * n1))
}

/// Dominant error pair for M-PSK: s = all ones, ŝ equal except the last
/// entry e^{j2π/M}.
pub fn msd_dominant_pair(window: usize, order: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let s = vec![Complex64::new(1.0, 0.0); window];
    let mut s_hat = s.clone();
    s_hat[window - 1] = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / order as f64);
    (s, s_hat)
}

/// Union-bound BER of multiple-symbol detection from the window covariance.
pub fn msd_ber_dualhop(cov: &CovarianceModel, order: usize) -> Result<f64> {
    let (s, s_hat) = msd_dominant_pair(cov.dimension, order);
    let pep = msd_pep(&s, &s_hat, cov)?;
    msd_ber_union(pep, cov.dimension, order)
}
