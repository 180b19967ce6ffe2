//! Special functions: normal, regularized incomplete beta and gamma.
//!
//! erfc comes from `libm`; its inverse, ln Γ, I_x(a, b) and P(a, x) come
//! from `statrs`. This module adds argument checking and the Gamma quantile.

use statrs::function::{beta, erf, gamma};

use crate::error::{param, Result};

/// Φ(x).
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// 1 − Φ(x), accurate in the upper tail.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Φ⁻¹(p) for p in (0, 1). Returns ±∞ at the endpoints.
pub fn normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erf::erfc_inv(2.0 * p)
}

/// Inverse of the upper tail: x with 1 − Φ(x) = q.
pub fn normal_sf_inv(q: f64) -> f64 {
    std::f64::consts::SQRT_2 * erf::erfc_inv(2.0 * q)
}

pub fn ln_gamma(x: f64) -> f64 {
    gamma::ln_gamma(x)
}

/// Regularized incomplete beta I_x(a, b), i.e. the Beta(a, b) CDF.
pub fn beta_cdf(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return param(format!(
            "beta_cdf shapes must be positive, got a={a}, b={b}"
        ));
    }
    if !(0.0..=1.0).contains(&x) {
        return param(format!("beta_cdf argument {x} outside [0, 1]"));
    }
    beta::checked_beta_reg(a, b, x).map_err(|e| crate::Error::Parameter(e.to_string()))
}

fn check_gamma(shape: f64, rate: f64) -> Result<()> {
    if !(shape > 0.0 && rate > 0.0) || !shape.is_finite() || !rate.is_finite() {
        return param(format!(
            "gamma shape and rate must be positive, got shape={shape}, rate={rate}"
        ));
    }
    Ok(())
}

/// CDF of Gamma(shape, rate) at x.
pub fn gamma_cdf(x: f64, shape: f64, rate: f64) -> Result<f64> {
    check_gamma(shape, rate)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    gamma::checked_gamma_lr(shape, rate * x).map_err(|e| crate::Error::Parameter(e.to_string()))
}

fn gamma_pdf_unit(y: f64, shape: f64, ln_gamma_shape: f64) -> f64 {
    ((shape - 1.0) * y.ln() - y - ln_gamma_shape).exp()
}

/// Quantile of Gamma(shape, rate): the q with GammaCDF(q) = p.
///
/// Safeguarded Newton iteration on the unit-rate CDF, keeping a bracket that
/// always contains the root and falling back to bisection whenever the Newton
/// step leaves it.
pub fn gamma_quantile(p: f64, shape: f64, rate: f64) -> Result<f64> {
    check_gamma(shape, rate)?;
    if !(p > 0.0 && p < 1.0) {
        return param(format!("gamma_quantile probability {p} outside (0, 1)"));
    }
    let cdf = |y: f64| gamma::gamma_lr(shape, y);
    let lg = ln_gamma(shape);

    // Wilson–Hilferty start, or the small-y series leading term for tiny shapes.
    let z = normal_quantile(p);
    let c = 1.0 / (9.0 * shape);
    let wh = shape * (1.0 - c + z * c.sqrt()).powi(3);
    let mut y = if shape >= 1.0 && wh > 0.0 {
        wh
    } else {
        ((p.ln() + ln_gamma(shape + 1.0)) / shape).exp()
    };
    if !y.is_finite() || y <= 0.0 {
        y = shape.max(1e-300);
    }

    let mut lo = 0.0_f64;
    let mut hi = y.max(1.0);
    while cdf(hi) < p {
        lo = hi;
        hi *= 2.0;
    }
    if y <= lo || y >= hi {
        y = 0.5 * (lo + hi);
    }

    for _ in 0..500 {
        let f = cdf(y) - p;
        if f == 0.0 {
            break;
        }
        if f < 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        let dens = gamma_pdf_unit(y, shape, lg);
        let mut next = if dens > 0.0 { y - f / dens } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - y).abs() <= 4.0 * f64::EPSILON * y || hi - lo <= 4.0 * f64::EPSILON * hi {
            y = next;
            break;
        }
        y = next;
    }
    Ok(y / rate)
}
