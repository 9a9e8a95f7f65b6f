//! Generation regimes, exponential decay bounds and their empirical checks,
//! and sampled checks of the symbol inequalities behind them.

use crate::error::{Error, Result};
use crate::resolvent::Curve;
use crate::symbols::{cpow, symbol_g, symbol_h, symbol_h_tilde, KernelParams};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeClass {
    /// `alpha > 0`.
    PositiveAlpha,
    /// `alpha < 0` and `alpha + beta^mu >= |alpha|`.
    NegativeAlphaAdmissible,
    Unsupported,
}

impl RegimeClass {
    pub fn is_supported(&self) -> bool {
        !matches!(self, RegimeClass::Unsupported)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub class: RegimeClass,
    /// Spectral bound of the operator (`rho` for a scalar problem).
    pub omega: f64,
    pub beta_plus_omega: f64,
    /// `omega < 0` and `beta + omega <= 0`: the decay estimates apply.
    pub decay_estimate_applies: bool,
}

pub fn classify(params: &KernelParams, omega: f64) -> Regime {
    let KernelParams { alpha, beta, mu } = *params;
    let class = if alpha > 0.0 {
        RegimeClass::PositiveAlpha
    } else if alpha < 0.0 && alpha + beta.powf(mu) >= alpha.abs() {
        RegimeClass::NegativeAlphaAdmissible
    } else {
        RegimeClass::Unsupported
    };
    let beta_plus_omega = beta + omega;
    Regime { class, omega, beta_plus_omega, decay_estimate_applies: omega < 0.0 && beta_plus_omega <= 0.0 }
}

/// `|S(t)| <= c (1 + poly_coeff t^poly_power) e^{rate t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayBound {
    pub c: f64,
    pub rate: f64,
    pub poly_coeff: f64,
    pub poly_power: f64,
    /// The bound decays exponentially (`rate < 0`).
    pub uniformly_stable: bool,
}

impl DecayBound {
    /// Bound profile without the constant.
    pub fn profile(&self, t: f64) -> f64 {
        let poly = if self.poly_coeff == 0.0 { 1.0 } else { 1.0 + self.poly_coeff * t.powf(self.poly_power) };
        poly * (self.rate * t).exp()
    }
}

pub fn theoretical_bound(params: &KernelParams, omega: f64, c: f64) -> Result<DecayBound> {
    params.validate()?;
    let regime = classify(params, omega);
    if !regime.decay_estimate_applies {
        return Err(Error::Hypothesis(format!(
            "decay estimate needs omega < 0 and beta + omega <= 0 (omega = {omega}, beta + omega = {})",
            regime.beta_plus_omega
        )));
    }
    let KernelParams { alpha, beta, mu } = *params;
    let bound = match regime.class {
        RegimeClass::PositiveAlpha => {
            DecayBound { c, rate: 0.0 - beta, poly_coeff: 0.0, poly_power: 0.0, uniformly_stable: beta > 0.0 }
        }
        RegimeClass::NegativeAlphaAdmissible => {
            let aw = alpha * omega;
            let rate = -(beta - aw.powf(1.0 / (mu + 1.0)));
            DecayBound {
                c,
                rate,
                poly_coeff: aw,
                poly_power: mu + 1.0,
                uniformly_stable: beta.powf(mu + 1.0) > aw,
            }
        }
        RegimeClass::Unsupported => {
            return Err(Error::Hypothesis(format!(
                "alpha = {alpha}, beta = {beta}, mu = {mu} is outside both generation regimes"
            )))
        }
    };
    Ok(bound)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub rate: f64,
    pub r_squared: f64,
    /// The tail changed sign, so the fit went through the local maxima of |v|.
    pub envelope: bool,
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    (slope, r2)
}

/// Exponential rate of the last `tail_fraction` of the samples, from a
/// straight-line fit of `ln|v|`. A tail that changes sign is fitted through
/// the local maxima of `|v|` instead.
pub fn fit_decay_rate(times: &[f64], values: &[f64], tail_fraction: f64) -> Result<RateFit> {
    if !(tail_fraction > 0.0 && tail_fraction < 1.0) {
        return Err(Error::domain(format!("tail_fraction must lie in (0, 1), got {tail_fraction}")));
    }
    if times.len() != values.len() {
        return Err(Error::domain("times and values differ in length"));
    }
    let start = ((times.len() as f64) * (1.0 - tail_fraction)).floor() as usize;
    let (t, v) = (&times[start..], &values[start..]);
    if t.len() < 2 {
        return Err(Error::domain("tail window holds fewer than two samples"));
    }
    let oscillates = v.windows(2).any(|w| w[0] * w[1] <= 0.0) || v.contains(&0.0);
    if !oscillates {
        let y: Vec<f64> = v.iter().map(|x| x.abs().ln()).collect();
        let (rate, r_squared) = least_squares(t, &y);
        return Ok(RateFit { rate, r_squared, envelope: false });
    }
    let mut px = Vec::new();
    let mut py = Vec::new();
    for i in 1..v.len() - 1 {
        let (a, b, c) = (v[i - 1].abs(), v[i].abs(), v[i + 1].abs());
        if b > 0.0 && b >= a && b > c {
            px.push(t[i]);
            py.push(b.ln());
        }
    }
    if px.len() < 2 {
        return Err(Error::Oscillation(format!(
            "tail changes sign and has only {} local maxima of |v|",
            px.len()
        )));
    }
    let (rate, r_squared) = least_squares(&px, &py);
    Ok(RateFit { rate, r_squared, envelope: true })
}

/// [`fit_decay_rate`] on a curve.
pub fn fit_curve_decay_rate(curve: &Curve, tail_fraction: f64) -> Result<RateFit> {
    fit_decay_rate(&curve.times, &curve.values, tail_fraction)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    /// Smallest constant making the bound hold on the whole grid.
    pub c_min: f64,
    /// The same over the first half of the horizon.
    pub c_min_half: f64,
    /// `c_min / c_min_half - 1`.
    pub growth: f64,
    /// `c_min` is finite and grows less than 5% from half to full horizon.
    pub holds: bool,
}

/// Allowed relative growth of the fitted constant under horizon doubling.
pub const BOUND_GROWTH_LIMIT: f64 = 0.05;

/// Fits the smallest constant for the bound profile and checks that it is
/// stable when the horizon is doubled.
pub fn verify_bound(times: &[f64], values: &[f64], bound: &DecayBound) -> Result<BoundCheck> {
    if times.len() != values.len() || times.is_empty() {
        return Err(Error::domain("times and values must be non-empty and equal in length"));
    }
    let half = 0.5 * times[times.len() - 1];
    let mut c_min = 0.0f64;
    let mut c_min_half = 0.0f64;
    for (t, v) in times.iter().zip(values) {
        let r = v.abs() / bound.profile(*t);
        c_min = c_min.max(r);
        if *t <= half {
            c_min_half = c_min_half.max(r);
        }
    }
    let growth = c_min / c_min_half - 1.0;
    let holds = c_min.is_finite() && growth < BOUND_GROWTH_LIMIT;
    Ok(BoundCheck { c_min, c_min_half, growth, holds })
}

/// [`verify_bound`] on a curve.
pub fn verify_curve_bound(curve: &Curve, bound: &DecayBound) -> Result<BoundCheck> {
    verify_bound(&curve.times, &curve.values, bound)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityResult {
    pub violations: usize,
    /// Smallest `rhs - lhs` seen; negative means a violation.
    pub worst_margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub samples: usize,
    pub slack: f64,
    /// `|g| <= 1` (alpha > 0) or `|g| <= beta^mu / (alpha + beta^mu)`.
    pub g_bound: InequalityResult,
    /// `|arg h(lambda)| <= (1+mu)|arg lambda|` for `Re lambda > 0`.
    pub arg_h: InequalityResult,
    /// `Re (lambda+beta)^mu > (Re lambda + beta)^mu` for `Re lambda > 0`.
    pub re_power: InequalityResult,
    /// `|arg h~(lambda)| <= (1+mu)|arg lambda|` for `Re lambda < 0`, `|lambda^mu| >= 2|alpha|`.
    pub arg_h_tilde: InequalityResult,
}

impl LemmaReport {
    pub fn total_violations(&self) -> usize {
        self.g_bound.violations
            + self.arg_h.violations
            + self.re_power.violations
            + self.arg_h_tilde.violations
    }
}

/// Slack used when counting violations.
pub const LEMMA_SLACK: f64 = 1e-10;
const MODULUS_RANGE: (f64, f64) = (1e-3, 1e3);

struct Margins {
    g: f64,
    arg_h: f64,
    re_power: f64,
    arg_h_tilde: f64,
}

fn sample_margins(params: &KernelParams, g_max: f64, seed: u64, index: u64) -> Result<Margins> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let (lo, hi) = (MODULUS_RANGE.0.ln(), MODULUS_RANGE.1.ln());
    let KernelParams { alpha, beta, mu } = *params;

    // right half plane, open sector |arg| < pi/2
    let r = (lo + (hi - lo) * rng.random::<f64>()).exp();
    let th = FRAC_PI_2 * (2.0 * rng.random::<f64>() - 1.0);
    let lam = Complex64::from_polar(r, th);
    let g = symbol_g(params, lam)?;
    let h = symbol_h(params, lam)?;
    let re_pow = cpow(lam + beta, mu).re;

    // left half plane with |lambda^mu| >= 2|alpha|
    let r_min = (2.0 * alpha.abs()).powf(1.0 / mu).max(MODULUS_RANGE.0);
    let lo_left = r_min.ln().min(hi);
    let r = (lo_left + (hi - lo_left) * rng.random::<f64>()).exp();
    // argument in (pi/2, pi], either sign
    let mut th_left = FRAC_PI_2 * (2.0 - rng.random::<f64>());
    if rng.random::<bool>() {
        th_left = -th_left;
    }
    let lam_left = Complex64::from_polar(r, th_left);
    let ht = symbol_h_tilde(params, lam_left)?;

    Ok(Margins {
        g: g_max - g.norm(),
        arg_h: (1.0 + mu) * th.abs() - h.arg().abs(),
        re_power: re_pow - (lam.re + beta).powf(mu),
        arg_h_tilde: (1.0 + mu) * th_left.abs() - ht.arg().abs(),
    })
}

/// Samples `lambda` log-uniformly in modulus on `[1e-3, 1e3]` and uniformly
/// in argument, and counts violations of the symbol inequalities. Each
/// sample draws from its own ChaCha stream, so the report depends only on
/// `seed`, not on scheduling.
pub fn lemma_property_suite(params: &KernelParams, n_samples: usize, seed: u64) -> Result<LemmaReport> {
    params.validate()?;
    let regime = classify(params, 0.0);
    let g_max = match regime.class {
        RegimeClass::PositiveAlpha => 1.0,
        RegimeClass::NegativeAlphaAdmissible => {
            let b = params.beta.powf(params.mu);
            b / (params.alpha + b)
        }
        RegimeClass::Unsupported => {
            return Err(Error::Hypothesis(format!(
                "alpha = {}, beta = {}, mu = {} is outside both generation regimes",
                params.alpha, params.beta, params.mu
            )))
        }
    };
    let margins = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| sample_margins(params, g_max, seed, i))
        .collect::<Result<Vec<_>>>()?;
    let tally = |f: fn(&Margins) -> f64| {
        let mut violations = 0;
        let mut worst = f64::INFINITY;
        for m in &margins {
            let v = f(m);
            worst = worst.min(v);
            if v < -LEMMA_SLACK {
                violations += 1;
            }
        }
        InequalityResult { violations, worst_margin: worst }
    };
    Ok(LemmaReport {
        samples: n_samples,
        slack: LEMMA_SLACK,
        g_bound: tally(|m| m.g),
        arg_h: tally(|m| m.arg_h),
        re_power: tally(|m| m.re_power),
        arg_h_tilde: tally(|m| m.arg_h_tilde),
    })
}
