//! Deterministic numerical integration and one-dimensional minimization.
//!
//! The integrator is a globally adaptive Gauss–Kronrod (7/15) scheme: the
//! subinterval with the largest error estimate is bisected until the total
//! estimate meets `max(abs_tol, rel_tol·|I|)`.

use crate::error::{Error, Result};

/// Absolute error target for θ-integrals.
pub const ABS_TOL: f64 = 1e-12;
/// Relative error target for θ-integrals.
pub const REL_TOL: f64 = 1e-9;
const MAX_INTERVALS: usize = 2000;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrates `f` over [a, b] with the given absolute and relative targets.
pub fn integrate_with<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut segments = vec![gk15(&mut f, a, b)];
    loop {
        let total: f64 = segments.iter().map(|s| s.value).sum();
        let err: f64 = segments.iter().map(|s| s.error).sum();
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::numerical(format!(
                "integrand produced a non-finite value on [{a}, {b}]"
            )));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if segments.len() >= MAX_INTERVALS {
            return Err(Error::numerical(format!(
                "quadrature did not converge on [{a}, {b}]: estimate {total:e}, error {err:e} after {} subintervals",
                segments.len()
            )));
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, s)| if s.error > acc.1 { (i, s.error) } else { acc });
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        segments.push(gk15(&mut f, seg.a, mid));
        segments.push(gk15(&mut f, mid, seg.b));
    }
}

/// Integrates `f` over [a, b] with the crate's default targets.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    integrate_with(f, a, b, ABS_TOL, REL_TOL)
}

/// Integrates a fallible integrand, propagating the first error.
pub fn integrate_fallible<F: FnMut(f64) -> Result<f64>>(mut f: F, a: f64, b: f64) -> Result<f64> {
    let mut failure: Option<Error> = None;
    let value = integrate(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                if failure.is_none() {
                    failure = Some(e);
                }
                f64::NAN
            }
        },
        a,
        b,
    );
    match failure {
        Some(e) => Err(e),
        None => value,
    }
}

/// Minimizes a unimodal function on [lo, hi] by golden-section search.
pub fn golden_section<F: FnMut(f64) -> Result<f64>>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}
