//! Real-valued special functions used by the closed-form error expressions.
//!
//! Every function targets the accuracy contract of [`SpecialFnTolerance`]
//! (absolute 1e-12 or relative 1e-10, whichever is looser) on the argument
//! ranges that occur in relay-network analysis (|x| up to a few hundred).

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const EPS: f64 = 1e-17;
const MAX_ITER: usize = 10_000;

/// Accuracy contract for the special functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialFnTolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for SpecialFnTolerance {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
        }
    }
}

impl SpecialFnTolerance {
    /// Builds a tolerance, rejecting non-positive components.
    pub fn new(abs_tol: f64, rel_tol: f64) -> Result<Self> {
        if !(abs_tol > 0.0 && rel_tol > 0.0) {
            return Err(Error::argument("tolerances must be strictly positive"));
        }
        Ok(Self { abs_tol, rel_tol })
    }

    /// True when `value` agrees with `reference` within the contract.
    pub fn accepts(&self, value: f64, reference: f64) -> bool {
        let err = (value - reference).abs();
        err <= self.abs_tol.max(self.rel_tol * reference.abs())
    }
}

fn require_finite(x: f64, name: &str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name}: non-finite argument {x}")))
    }
}

fn require_positive(x: f64, name: &str) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name}: argument must be positive, got {x}")))
    }
}

/// Zeroth-order Bessel function of the first kind, J0(x).
///
/// Power series for |x| ≤ 8, trapezoidal evaluation of
/// (1/π)∫₀^π cos(x sin t) dt for 8 < |x| ≤ 25 (spectrally accurate for this
/// periodic integrand), Hankel asymptotic expansion beyond.
pub fn bessel_j0(x: f64) -> Result<f64> {
    require_finite(x, "bessel_j0")?;
    let ax = x.abs();
    if ax <= 8.0 {
        Ok(j0_series(ax))
    } else if ax <= 25.0 {
        Ok(j0_trapezoid(ax))
    } else {
        Ok(j0_asymptotic(ax))
    }
}

fn j0_series(x: f64) -> f64 {
    let y = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= y / (kf * kf);
        sum += term;
        if term.abs() < EPS * sum.abs().max(1e-300) && kf * kf > y.abs() {
            break;
        }
    }
    sum
}

fn j0_trapezoid(x: f64) -> f64 {
    const NODES: usize = 64;
    let h = std::f64::consts::PI / NODES as f64;
    let sum: f64 = (0..NODES).map(|i| (x * (h * i as f64).sin()).cos()).sum();
    sum / NODES as f64
}

fn j0_asymptotic(x: f64) -> f64 {
    // a_k = Π_{i=1..k} (2i-1)^2 / (k! 8^k); P uses even k, Q odd k.
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a: f64 = 1.0;
    let mut xpow: f64 = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..60 {
        let term = a / xpow;
        if term.abs() > last || term.abs() < EPS {
            break;
        }
        last = term.abs();
        // P alternates starting at +1; Q alternates starting at -1/(8x).
        let even_sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += even_sign * term;
        } else {
            q -= even_sign * term;
        }
        let kk = (k + 1) as f64;
        let odd = 2.0 * kk - 1.0;
        a *= odd * odd / (kk * 8.0);
        xpow *= x;
    }
    let (s, c) = x.sin_cos();
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let cos_chi = (c + s) * inv_sqrt2;
    let sin_chi = (s - c) * inv_sqrt2;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

/// Modified Bessel functions of the second kind, (K0(x), K1(x)), for x > 0.
///
/// Ascending series for x ≤ 1 and Steed's continued fraction beyond.
pub fn bessel_k0_k1(x: f64) -> Result<(f64, f64)> {
    require_positive(x, "bessel_k")?;
    if x <= 1.0 {
        Ok(k01_series(x))
    } else {
        k01_continued_fraction(x)
    }
}

/// Zeroth-order modified Bessel function of the second kind, K0(x), x > 0.
pub fn bessel_k0(x: f64) -> Result<f64> {
    bessel_k0_k1(x).map(|(k0, _)| k0)
}

/// First-order modified Bessel function of the second kind, K1(x), x > 0.
pub fn bessel_k1(x: f64) -> Result<f64> {
    bessel_k0_k1(x).map(|(_, k1)| k1)
}

fn k01_series(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let log_half = (0.5 * x).ln();
    // K0 = -(ln(x/2)+γ) I0 + Σ_{k≥1} y^k/(k!)^2 H_k
    // K1 = 1/x + I1 ln(x/2) - (x/4) Σ_{k≥0} y^k/(k!(k+1)!) (ψ(k+1)+ψ(k+2))
    let mut i0 = 1.0;
    let mut k0_tail = 0.0;
    let mut t0 = 1.0; // y^k/(k!)^2
    let mut t1 = 1.0; // y^k/(k!(k+1)!)
    let mut harmonic = 0.0; // H_k
    let mut i1_sum = 1.0;
    let mut k1_tail = -2.0 * EULER_GAMMA + 1.0; // ψ(1)+ψ(2) at k = 0
    for k in 1..100 {
        let kf = k as f64;
        harmonic += 1.0 / kf;
        t0 *= y / (kf * kf);
        t1 *= y / (kf * (kf + 1.0));
        i0 += t0;
        k0_tail += t0 * harmonic;
        i1_sum += t1;
        let psi_sum = 2.0 * (harmonic - EULER_GAMMA) + 1.0 / (kf + 1.0);
        k1_tail += t1 * psi_sum;
        if t0 < EPS * i0 && t1 < EPS * i1_sum {
            break;
        }
    }
    let k0 = -(log_half + EULER_GAMMA) * i0 + k0_tail;
    let i1 = 0.5 * x * i1_sum;
    let k1 = 1.0 / x + i1 * log_half - 0.25 * x * k1_tail;
    (k0, k1)
}

fn k01_continued_fraction(x: f64) -> Result<(f64, f64)> {
    // Steed's algorithm for the order-zero case (Thompson & Barnett CF2).
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    let mut converged = false;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::numerical(format!("K0/K1 continued fraction did not converge at x={x}")));
    }
    let h = a1 * h;
    let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    Ok((k0, k1))
}

/// Exponential integral E1(x) = ∫ₓ^∞ e^{-t}/t dt for x > 0.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    require_positive(x, "exp_integral_e1")?;
    if x <= 1.0 {
        Ok(e1_series(x))
    } else {
        Ok(e1_scaled_cf(x)? * (-x).exp())
    }
}

/// Scaled exponential integral e^x·E1(x) for x > 0.
///
/// Stays finite for large x where E1 underflows; this product is what the
/// averaged conditional error probabilities actually contain.
pub fn exp_e1_scaled(x: f64) -> Result<f64> {
    require_positive(x, "exp_e1_scaled")?;
    if x <= 1.0 {
        Ok(x.exp() * e1_series(x))
    } else {
        e1_scaled_cf(x)
    }
}

fn e1_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= -x / kf;
        let add = -term / kf;
        sum += add;
        if add.abs() < EPS * sum.abs().max(1e-300) {
            break;
        }
    }
    -EULER_GAMMA - x.ln() + sum
}

fn e1_scaled_cf(x: f64) -> Result<f64> {
    // Modified Lentz evaluation of the continued fraction for e^x E1(x).
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < EPS {
            return Ok(h);
        }
    }
    Err(Error::numerical(format!("E1 continued fraction did not converge at x={x}")))
}

/// Gaussian tail probability Q(x) = ∫ₓ^∞ (2π)^{-1/2} e^{-t²/2} dt.
pub fn gaussian_q(x: f64) -> Result<f64> {
    require_finite(x, "gaussian_q")?;
    Ok(0.5 * libm::erfc(x * std::f64::consts::FRAC_1_SQRT_2))
}
