//! Kernel parameters and the closed-form Laplace-domain symbols of the
//! scalar problem. All complex powers use the principal branch.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const POLE_GUARD: f64 = 1e-300;

/// Memory kernel `alpha e^{-beta t} t^{mu-1} / Gamma(mu)`.
///
/// `alpha = 0` is accepted and describes the memoryless problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
}

impl KernelParams {
    pub fn new(alpha: f64, beta: f64, mu: f64) -> Result<Self> {
        let p = Self { alpha, beta, mu };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() {
            return Err(Error::domain(format!("alpha must be finite, got {}", self.alpha)));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::domain(format!("beta must be finite and >= 0, got {}", self.beta)));
        }
        if !(self.mu > 0.0 && self.mu <= 1.0) {
            return Err(Error::domain(format!("mu must lie in (0, 1], got {}", self.mu)));
        }
        Ok(())
    }
}

/// Kernel parameters together with the scalar eigenvalue `rho` (`A = rho I`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarProblem {
    pub params: KernelParams,
    pub rho: f64,
}

impl ScalarProblem {
    pub fn new(params: KernelParams, rho: f64) -> Result<Self> {
        let p = Self { params, rho };
        p.validate()?;
        Ok(p)
    }

    pub fn from_parts(alpha: f64, beta: f64, mu: f64, rho: f64) -> Result<Self> {
        Self::new(KernelParams::new(alpha, beta, mu)?, rho)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !self.rho.is_finite() {
            return Err(Error::domain(format!("rho must be finite, got {}", self.rho)));
        }
        Ok(())
    }
}

fn require_right_half_plane(lambda: Complex64) -> Result<()> {
    if lambda.re > 0.0 && lambda.im.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("symbol requires Re(lambda) > 0, got {lambda}")))
    }
}

fn checked_div(num: Complex64, den: Complex64, what: &str) -> Result<Complex64> {
    if den.norm() < POLE_GUARD {
        return Err(Error::Singularity(format!("{what}: denominator vanishes")));
    }
    Ok(num / den)
}

/// Principal power `z^p`; `0^p = 0` for `p > 0`.
pub(crate) fn cpow(z: Complex64, p: f64) -> Complex64 {
    if z == Complex64::new(0.0, 0.0) || p == 1.0 {
        return z;
    }
    (z.ln() * p).exp()
}

/// `g(lambda) = (lambda+beta)^mu / ((lambda+beta)^mu + alpha)`.
pub fn symbol_g(params: &KernelParams, lambda: Complex64) -> Result<Complex64> {
    require_right_half_plane(lambda)?;
    let w = cpow(lambda + params.beta, params.mu);
    checked_div(w, w + params.alpha, "g")
}

/// `h(lambda) = lambda g(lambda)`.
pub fn symbol_h(params: &KernelParams, lambda: Complex64) -> Result<Complex64> {
    Ok(lambda * symbol_g(params, lambda)?)
}

/// `(lambda - beta) lambda^mu / (lambda^mu + alpha)`, i.e. `h` shifted by `-beta`,
/// defined away from the right half plane as well.
pub fn symbol_h_tilde(params: &KernelParams, lambda: Complex64) -> Result<Complex64> {
    if lambda.norm() == 0.0 || !lambda.re.is_finite() || !lambda.im.is_finite() {
        return Err(Error::domain(format!("h_tilde requires finite lambda != 0, got {lambda}")));
    }
    let w = cpow(lambda, params.mu);
    checked_div((lambda - params.beta) * w, w + params.alpha, "h_tilde")
}

/// Laplace transform of the shifted resolvent `G(t) = e^{beta t} S(t)`:
/// `z^mu / (z^{mu+1} - (rho+beta) z^mu - alpha rho)`.
pub fn laplace_g_hat(prob: &ScalarProblem, lambda: Complex64) -> Result<Complex64> {
    let p = &prob.params;
    let w = cpow(lambda, p.mu);
    let den = lambda * w - (prob.rho + p.beta) * w - p.alpha * prob.rho;
    checked_div(w, den, "G_hat")
}

/// Laplace transform of the scalar resolvent, `G_hat(lambda + beta)`.
pub fn laplace_s_hat(prob: &ScalarProblem, lambda: Complex64) -> Result<Complex64> {
    laplace_g_hat(prob, lambda + prob.params.beta)
}
