//! Reference solver for the integral form `u(t) = 1 + rho int_0^t a(t-s) u(s) ds`
//! with the smoothed kernel `a = 1 + (1 * kappa)`.
//!
//! The unknown is interpolated piecewise linearly and integrated exactly
//! against `a` (product trapezoid). The weights depend only on the offset
//! and are computed once per solve.

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::resolvent::{validate_grid, Curve, Method};
use crate::special::{ln_gamma_unchecked, p_unchecked};
use crate::symbols::{KernelParams, ScalarProblem};
use serde::{Deserialize, Serialize};

/// Largest step for which accuracy claims are made.
pub const MAX_DT: f64 = 0.1;

const GAUSS_ORDER: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolterraConfig {
    pub dt: f64,
    pub n_steps: usize,
    /// Also solve with `dt/2` and report the max-norm difference.
    pub richardson: bool,
}

impl VolterraConfig {
    pub fn new(dt: f64, n_steps: usize, richardson: bool) -> Result<Self> {
        let c = Self { dt, n_steps, richardson };
        c.validate()?;
        Ok(c)
    }

    /// Step count covering `[0, horizon]` with a step no larger than `max_dt`.
    pub fn for_horizon(horizon: f64, max_dt: f64, richardson: bool) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite() && max_dt > 0.0) {
            return Err(Error::domain(format!(
                "need horizon > 0 and max_dt > 0, got {horizon}, {max_dt}"
            )));
        }
        let n = (horizon / max_dt - 1e-9).ceil().max(1.0) as usize;
        Self::new(horizon / n as f64, n, richardson)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= MAX_DT) {
            return Err(Error::domain(format!("dt must lie in (0, {MAX_DT}], got {}", self.dt)));
        }
        if self.n_steps == 0 {
            return Err(Error::domain("n_steps must be positive"));
        }
        Ok(())
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.n_steps as f64
    }
}

/// `a(t) = 1 + int_0^t kappa`.
pub fn kernel_a(params: &KernelParams, t: f64) -> Result<f64> {
    params.validate()?;
    if !(t >= 0.0) {
        return Err(Error::domain(format!("kernel_a requires t >= 0, got {t}")));
    }
    Ok(kernel_a_unchecked(params, t))
}

fn kernel_a_unchecked(p: &KernelParams, t: f64) -> f64 {
    if t == 0.0 || p.alpha == 0.0 {
        return 1.0;
    }
    if p.beta > 0.0 {
        1.0 + p.alpha * p.beta.powf(-p.mu) * p_unchecked(p.mu, p.beta * t)
    } else {
        1.0 + p.alpha * (p.mu * t.ln() - ln_gamma_unchecked(p.mu + 1.0)).exp()
    }
}

/// `int_0^x r^j kappa(r) dr`.
pub fn kernel_moment(p: &KernelParams, j: u32, x: f64) -> f64 {
    if x <= 0.0 || p.alpha == 0.0 {
        return 0.0;
    }
    let a = p.mu + j as f64;
    if p.beta > 0.0 {
        // Gamma(mu+j)/Gamma(mu) beta^{-(mu+j)} P(mu+j, beta x)
        let ln_ratio = ln_gamma_unchecked(a) - ln_gamma_unchecked(p.mu) - a * p.beta.ln();
        p.alpha * ln_ratio.exp() * p_unchecked(a, p.beta * x)
    } else {
        p.alpha * (a * x.ln() - ln_gamma_unchecked(p.mu)).exp() / a
    }
}

/// Convolution weights: cell `m` covers `tau in [(m-1)h, mh]`; `left[m]`
/// multiplies `u(t_n - mh)` and `right[m]` multiplies `u(t_n - (m-1)h)`.
struct Weights {
    left: Vec<f64>,
    right: Vec<f64>,
}

fn weights(p: &KernelParams, h: f64, n: usize) -> Weights {
    let mut left = vec![0.0; n + 1];
    let mut right = vec![0.0; n + 1];

    // first cell: a has a t^mu cusp at 0, so use exact moments
    let m0 = kernel_moment(p, 0, h);
    let m1 = kernel_moment(p, 1, h);
    let m2 = kernel_moment(p, 2, h);
    let int_a = h + h * m0 - m1;
    let int_a_tau = 0.5 * h * h + 0.5 * (h * h * m0 - m2);
    left[1] = int_a_tau / h;
    right[1] = (h * int_a - int_a_tau) / h;

    let (x, w) = gauss_legendre(GAUSS_ORDER);
    for m in 2..=n {
        let lo = (m - 1) as f64 * h;
        let (mut l, mut r) = (0.0, 0.0);
        for (xi, wi) in x.iter().zip(&w) {
            let off = 0.5 * h * (xi + 1.0);
            let av = wi * 0.5 * h * kernel_a_unchecked(p, lo + off);
            l += av * off;
            r += av * (h - off);
        }
        left[m] = l / h;
        right[m] = r / h;
    }
    Weights { left, right }
}

fn march(prob: &ScalarProblem, h: f64, n: usize) -> Result<Vec<f64>> {
    let wts = weights(&prob.params, h, n);
    let rho = prob.rho;
    let denom = 1.0 - rho * wts.right[1];
    if denom.abs() < 1e-12 {
        return Err(Error::StepSize { denominator: denom.abs() });
    }
    let mut u = vec![0.0; n + 1];
    u[0] = 1.0;
    for k in 1..=n {
        let mut hist = 0.0;
        for m in 1..=k {
            hist += wts.left[m] * u[k - m];
        }
        for m in 2..=k {
            hist += wts.right[m] * u[k - m + 1];
        }
        u[k] = (1.0 + rho * hist) / denom;
    }
    Ok(u)
}

/// Solves on the uniform grid `i dt`, `i = 0..=n_steps`.
pub fn solve_volterra(prob: &ScalarProblem, cfg: &VolterraConfig) -> Result<Curve> {
    prob.validate()?;
    cfg.validate()?;
    let n = cfg.n_steps;
    let u = march(prob, cfg.dt, n)?;
    let times: Vec<f64> = (0..=n).map(|i| i as f64 * cfg.dt).collect();
    let mut curve = Curve::new(times, u, Method::Volterra, Some(*prob))?;
    if cfg.richardson {
        let fine = march(prob, 0.5 * cfg.dt, 2 * n)?;
        let diff = curve
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| (v - fine[2 * i]).abs())
            .fold(0.0, f64::max);
        curve.error_estimate = Some(diff);
    }
    Ok(curve)
}

/// Solves with a step no larger than `max_dt`, chosen so every point of the
/// uniform grid `times` is a node, and samples the result there.
pub fn volterra_curve(
    prob: &ScalarProblem,
    times: &[f64],
    max_dt: f64,
    richardson: bool,
) -> Result<Curve> {
    validate_grid(times)?;
    if times.len() == 1 {
        return Curve::new(vec![0.0], vec![1.0], Method::Volterra, Some(*prob));
    }
    let spacing = times[1];
    for (i, &t) in times.iter().enumerate() {
        if (t - i as f64 * spacing).abs() > 1e-9 * spacing.max(t) {
            return Err(Error::domain("volterra_curve needs a uniform grid"));
        }
    }
    let sub = (spacing / max_dt - 1e-9).ceil().max(1.0) as usize;
    let cfg = VolterraConfig::new(spacing / sub as f64, sub * (times.len() - 1), richardson)?;
    let full = solve_volterra(prob, &cfg)?;
    let values = (0..times.len()).map(|i| full.values[i * sub]).collect();
    let mut curve = Curve::new(times.to_vec(), values, Method::Volterra, Some(*prob))?;
    curve.error_estimate = full.error_estimate;
    Ok(curve)
}
