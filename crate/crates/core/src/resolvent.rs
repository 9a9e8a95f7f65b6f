//! The scalar resolvent `S(t)`: sampled curves, the Mittag-Leffler series
//! and the exact forms available when `mu = 1`.

use crate::error::{Error, Result};
use crate::quadrature::CompensatedSum;
use crate::special::{ln_gamma_unchecked, SeriesControl, Truncation, ML_ARGUMENT_LIMIT};
use crate::symbols::ScalarProblem;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Which route produced a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Series,
    Volterra,
    LaplaceInversion,
    ClosedFormMu1,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::Volterra => "volterra",
            Method::LaplaceInversion => "laplace",
            Method::ClosedFormMu1 => "closed_form_mu1",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Samples of `S(t)` on a grid starting at `t = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub method: Method,
    /// The scalar problem, when the curve belongs to one (norm curves do not).
    pub problem: Option<ScalarProblem>,
    /// Method-specific error estimate (Richardson difference for Volterra).
    pub error_estimate: Option<f64>,
}

impl Curve {
    pub fn new(
        times: Vec<f64>,
        values: Vec<f64>,
        method: Method,
        problem: Option<ScalarProblem>,
    ) -> Result<Self> {
        validate_grid(&times)?;
        if values.len() != times.len() {
            return Err(Error::domain(format!(
                "curve has {} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if (values[0] - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!("curve must start at 1, got {}", values[0])));
        }
        Ok(Self { times, values, method, problem, error_estimate: None })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("curve is non-empty")
    }
}

/// Checks that `times` starts at zero and is strictly increasing.
pub fn validate_grid(times: &[f64]) -> Result<()> {
    match times.first() {
        None => return Err(Error::domain("time grid is empty")),
        Some(&t0) if t0 != 0.0 => {
            return Err(Error::domain(format!("time grid must start at 0, got {t0}")))
        }
        _ => {}
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::domain("time grid contains non-finite values"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("time grid must be strictly increasing"));
    }
    Ok(())
}

/// `n` equispaced points on `[0, t_max]`.
pub fn uniform_grid(t_max: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::domain(format!("need n >= 2 and t_max > 0, got n={n}, t_max={t_max}")));
    }
    let step = t_max / (n - 1) as f64;
    let mut g: Vec<f64> = (0..n).map(|i| i as f64 * step).collect();
    g[n - 1] = t_max;
    Ok(g)
}

/// Absolute rounding-error estimate above which a series value is rejected.
pub const SERIES_ERROR_BUDGET: f64 = 1e-8;

/// Value of `S(t)` from the series with its rounding-error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEvaluation {
    pub value: f64,
    pub outer_terms: usize,
    pub error_estimate: f64,
}

/// `e^{ln_scale} E^{(k+1)}_{mu+1,k+1}(z)` summed in log space, returning
/// (value, sum of magnitudes).
fn scaled_prabhakar(
    mu: f64,
    k: usize,
    z: f64,
    ln_scale: f64,
    ctl: &SeriesControl,
) -> Result<(f64, f64)> {
    let kf = k as f64;
    let ln_k_fact = ln_gamma_unchecked(kf + 1.0);
    if z == 0.0 {
        let v = (ln_scale - ln_k_fact).exp();
        return Ok((v, v));
    }
    let ln_z = z.abs().ln();
    let a = mu + 1.0;
    let mut sum = CompensatedSum::new();
    let mut abs_sum = 0.0;
    let mut stop = Truncation::new(ctl);
    let mut last = 0.0;
    for n in 0..ctl.max_terms {
        let nf = n as f64;
        let ln_term = ln_scale + ln_gamma_unchecked(kf + nf + 1.0)
            - ln_gamma_unchecked(nf + 1.0)
            - ln_k_fact
            - ln_gamma_unchecked(nf * a + kf + 1.0)
            + nf * ln_z;
        let mag = ln_term.exp();
        last = mag;
        if !mag.is_finite() {
            break;
        }
        sum.add(if z < 0.0 && n % 2 == 1 { -mag } else { mag });
        abs_sum += mag;
        if stop.done(mag, sum.value()) {
            return Ok((sum.value(), abs_sum));
        }
    }
    Err(Error::Convergence { terms: ctl.max_terms, last_term: last })
}

/// `S(t)` from the Mittag-Leffler series with diagnostics.
pub fn series_s_detailed(
    prob: &ScalarProblem,
    t: f64,
    ctl: &SeriesControl,
) -> Result<SeriesEvaluation> {
    prob.validate()?;
    ctl.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("series requires finite t >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(SeriesEvaluation { value: 1.0, outer_terms: 1, error_estimate: 0.0 });
    }
    let p = &prob.params;
    let c = prob.rho + p.beta;
    let z = p.alpha * prob.rho * t.powf(p.mu + 1.0);
    if z.abs() > ML_ARGUMENT_LIMIT {
        return Err(Error::Convergence { terms: 0, last_term: f64::INFINITY });
    }
    let ct = c * t;
    let ln_ct = ct.abs().ln();
    let mut sum = CompensatedSum::new();
    let mut abs_total = 0.0;
    let mut stop = Truncation::new(ctl);
    let mut last = 0.0;
    for k in 0..ctl.max_terms {
        let (inner, inner_abs) = if k == 0 {
            scaled_prabhakar(p.mu, 0, z, 0.0, ctl)?
        } else if ct == 0.0 {
            (0.0, 0.0)
        } else {
            scaled_prabhakar(p.mu, k, z, k as f64 * ln_ct, ctl)?
        };
        let term = if ct < 0.0 && k % 2 == 1 { -inner } else { inner };
        sum.add(term);
        abs_total += inner_abs;
        last = term.abs();
        if !abs_total.is_finite() {
            break;
        }
        if stop.done(term, sum.value()) || (ct == 0.0 && k > 0) {
            let damp = (-p.beta * t).exp();
            let error_estimate = 8.0 * f64::EPSILON * abs_total * damp;
            if error_estimate > SERIES_ERROR_BUDGET {
                return Err(Error::Accuracy(format!(
                    "series cancellation: rounding error estimate {error_estimate:e} exceeds {SERIES_ERROR_BUDGET:e}"
                )));
            }
            return Ok(SeriesEvaluation {
                value: damp * sum.value(),
                outer_terms: k + 1,
                error_estimate,
            });
        }
    }
    Err(Error::Convergence { terms: ctl.max_terms, last_term: last })
}

/// `S(t) = e^{-beta t} sum_k ((rho+beta) t)^k E^{(k+1)}_{mu+1,k+1}(alpha rho t^{mu+1})`.
pub fn series_s(prob: &ScalarProblem, t: f64, ctl: &SeriesControl) -> Result<f64> {
    series_s_detailed(prob, t, ctl).map(|e| e.value)
}

/// Pointwise series values, keeping failures per point.
pub fn series_values(prob: &ScalarProblem, times: &[f64], ctl: &SeriesControl) -> Vec<Result<f64>> {
    times
        .par_iter()
        .map(|&t| series_s(prob, t, ctl).map_err(|e| e.at_time(t)))
        .collect()
}

/// The series evaluated on a grid. The first failing grid point (in grid
/// order) is reported.
pub fn series_curve(prob: &ScalarProblem, times: &[f64], ctl: &SeriesControl) -> Result<Curve> {
    validate_grid(times)?;
    let values = series_values(prob, times, ctl).into_iter().collect::<Result<Vec<_>>>()?;
    Curve::new(times.to_vec(), values, Method::Series, Some(*prob))
}

/// Root structure of `lambda^2 - (rho+beta) lambda - alpha rho` when `mu = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mu1Case {
    TwoRealRoots,
    DoubleRoot,
    ComplexPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mu1Classification {
    pub discriminant: f64,
    pub case: Mu1Case,
}

fn require_mu_one(prob: &ScalarProblem) -> Result<()> {
    prob.validate()?;
    if prob.params.mu != 1.0 {
        return Err(Error::domain(format!("closed form needs mu = 1, got {}", prob.params.mu)));
    }
    Ok(())
}

/// Discriminant `(rho+beta)^2 + 4 alpha rho` and the resulting case.
pub fn mu1_classify(prob: &ScalarProblem) -> Result<Mu1Classification> {
    require_mu_one(prob)?;
    let c = prob.rho + prob.params.beta;
    let d = c * c + 4.0 * prob.params.alpha * prob.rho;
    let band = 1e-12 * (c * c).max(1.0);
    let case = if d.abs() < band {
        Mu1Case::DoubleRoot
    } else if d > 0.0 {
        Mu1Case::TwoRealRoots
    } else {
        Mu1Case::ComplexPair
    };
    Ok(Mu1Classification { discriminant: d, case })
}

/// Exact `S(t)` for `mu = 1`.
pub fn mu1_closed_form(prob: &ScalarProblem, t: f64) -> Result<f64> {
    let class = mu1_classify(prob)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("closed form requires finite t >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let c = prob.rho + prob.params.beta;
    let center = 0.5 * (prob.rho - prob.params.beta);
    let d = class.discriminant;
    let v = match class.case {
        Mu1Case::TwoRealRoots => {
            let r = d.sqrt();
            let up = (c + r) / (2.0 * r) * ((center + 0.5 * r) * t).exp();
            let down = (c - r) / (2.0 * r) * ((center - 0.5 * r) * t).exp();
            up - down
        }
        Mu1Case::DoubleRoot => (1.0 + 0.5 * c * t) * (center * t).exp(),
        Mu1Case::ComplexPair => {
            let w = 0.5 * (-d).sqrt();
            (center * t).exp() * ((w * t).cos() + c / (2.0 * w) * (w * t).sin())
        }
    };
    Ok(v)
}

/// Closed form sampled on a grid.
pub fn mu1_curve(prob: &ScalarProblem, times: &[f64]) -> Result<Curve> {
    validate_grid(times)?;
    let values = times
        .iter()
        .map(|&t| mu1_closed_form(prob, t))
        .collect::<Result<Vec<_>>>()?;
    Curve::new(times.to_vec(), values, Method::ClosedFormMu1, Some(*prob))
}
