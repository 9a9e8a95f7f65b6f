//! Cross-validation of the three routes for one scalar problem, together
//! with the symbol inequalities and the decay-bound checks.

use crate::error::{Error, Result};
use crate::inversion::{inversion_curve, InversionConfig};
use crate::resolvent::{series_values, uniform_grid};
use crate::route::DEFAULT_MAX_DT;
use crate::special::SeriesControl;
use crate::stability::{
    classify, fit_decay_rate, lemma_property_suite, theoretical_bound, verify_bound, Regime,
};
use crate::symbols::ScalarProblem;
use crate::volterra::volterra_curve;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// `max |x - y| / max(max |x|, max |y|)`; zero for two zero vectors.
pub fn max_norm_relative_deviation(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "deviation of vectors with different lengths");
    let diff = x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let scale = x.iter().chain(y).map(|v| v.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifySettings {
    pub t_max: f64,
    pub points: usize,
    /// Spectral bound used for the regime checks (`rho` for a bare scalar problem).
    pub omega: f64,
    pub seed: u64,
    pub lemma_samples: usize,
    pub deviation_tol: f64,
    pub rate_slack: f64,
    /// Largest share of grid points the series may fail on.
    pub max_series_exclusion: f64,
    /// Horizon of the decay curve; the bound constant is compared between
    /// its first half and the whole.
    pub decay_horizon: f64,
    pub decay_points: usize,
    pub series: SeriesControl,
    pub inversion: InversionConfig,
    pub max_dt: f64,
}

impl VerifySettings {
    pub fn for_problem(prob: &ScalarProblem) -> Self {
        Self {
            t_max: 5.0,
            points: 32,
            omega: prob.rho,
            seed: 0,
            lemma_samples: 10_000,
            deviation_tol: 1e-4,
            rate_slack: 0.05,
            max_series_exclusion: 0.2,
            decay_horizon: 40.0,
            decay_points: 801,
            series: SeriesControl::default(),
            inversion: InversionConfig::default(),
            max_dt: DEFAULT_MAX_DT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub rho: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deviations {
    pub series_volterra: Option<f64>,
    pub series_laplace: Option<f64>,
    pub volterra_laplace: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaViolations {
    pub g_bound: usize,
    pub arg_h: usize,
    pub re_power: usize,
    pub arg_h_tilde: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Passes {
    pub three_way: bool,
    pub series_coverage: bool,
    pub lemmas: bool,
    /// `None` when the decay estimates do not apply.
    pub decay_rate: Option<bool>,
    pub bound: Option<bool>,
    pub all: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub params: ReportParams,
    pub regime: Regime,
    pub deviations: Deviations,
    pub series_excluded_fraction: f64,
    pub lemma_violations: LemmaViolations,
    pub fitted_rate: f64,
    pub theoretical_rate: Option<f64>,
    pub c_min: Option<f64>,
    pub passes: Passes,
}

/// Runs the full check. Unsupported regimes are a hypothesis error; a
/// failed check is reported in `passes`, not as an error.
pub fn verify_problem(prob: &ScalarProblem, s: &VerifySettings) -> Result<VerificationReport> {
    prob.validate()?;
    let regime = classify(&prob.params, s.omega);
    if !regime.class.is_supported() {
        return Err(Error::Hypothesis(format!(
            "alpha = {}, beta = {}, mu = {} is outside both generation regimes",
            prob.params.alpha, prob.params.beta, prob.params.mu
        )));
    }
    let grid = uniform_grid(s.t_max, s.points)?;

    let series = series_values(prob, &grid, &s.series);
    let volterra = volterra_curve(prob, &grid, s.max_dt, false)?;
    let laplace = inversion_curve(prob, &grid, &s.inversion)?;

    let mut kept = Vec::new();
    for (i, v) in series.iter().enumerate() {
        match v {
            Ok(x) => kept.push((i, *x)),
            Err(e) if series_gave_up(e) => {}
            Err(e) => return Err(e.clone()),
        }
    }
    let excluded = 1.0 - kept.len() as f64 / grid.len() as f64;
    let sv: Vec<f64> = kept.iter().map(|k| k.1).collect();
    let pick = |vals: &[f64]| kept.iter().map(|k| vals[k.0]).collect::<Vec<f64>>();
    let deviations = Deviations {
        series_volterra: (!kept.is_empty())
            .then(|| max_norm_relative_deviation(&sv, &pick(&volterra.values))),
        series_laplace: (!kept.is_empty())
            .then(|| max_norm_relative_deviation(&sv, &pick(&laplace.values))),
        volterra_laplace: max_norm_relative_deviation(&volterra.values, &laplace.values),
    };

    let lemmas = lemma_property_suite(&prob.params, s.lemma_samples, s.seed)?;
    let lemma_violations = LemmaViolations {
        g_bound: lemmas.g_bound.violations,
        arg_h: lemmas.arg_h.violations,
        re_power: lemmas.re_power.violations,
        arg_h_tilde: lemmas.arg_h_tilde.violations,
    };

    let decay_grid = uniform_grid(s.decay_horizon, s.decay_points)?;
    let decay = inversion_curve(prob, &decay_grid, &s.inversion)?;
    let fit = fit_decay_rate(&decay.times, &decay.values, 0.5)?;

    let (theoretical_rate, c_min, rate_ok, bound_ok) = if regime.decay_estimate_applies {
        let bound = theoretical_bound(&prob.params, s.omega, 1.0)?;
        let check = verify_bound(&decay.times, &decay.values, &bound)?;
        (
            Some(bound.rate),
            Some(check.c_min),
            Some(fit.rate <= bound.rate + s.rate_slack),
            Some(check.holds),
        )
    } else {
        (None, None, None, None)
    };

    let three_way = [deviations.series_volterra, deviations.series_laplace, Some(deviations.volterra_laplace)]
        .iter()
        .flatten()
        .all(|d| *d <= s.deviation_tol);
    let series_coverage = excluded < s.max_series_exclusion;
    let lemmas_ok = lemmas.total_violations() == 0;
    let all = three_way
        && series_coverage
        && lemmas_ok
        && rate_ok.unwrap_or(true)
        && bound_ok.unwrap_or(true);

    Ok(VerificationReport {
        schema_version: SCHEMA_VERSION,
        params: ReportParams {
            alpha: prob.params.alpha,
            beta: prob.params.beta,
            mu: prob.params.mu,
            rho: prob.rho,
            omega: s.omega,
        },
        regime,
        deviations,
        series_excluded_fraction: excluded,
        lemma_violations,
        fitted_rate: fit.rate,
        theoretical_rate,
        c_min,
        passes: Passes {
            three_way,
            series_coverage,
            lemmas: lemmas_ok,
            decay_rate: rate_ok,
            bound: bound_ok,
            all,
        },
    })
}

/// True for series failures that mean "outside the usable range" rather
/// than bad input: truncation failures and cancellation.
pub fn series_gave_up(e: &Error) -> bool {
    matches!(e.root(), Error::Convergence { .. } | Error::Accuracy(_))
}
