//! Diagonal realization with `A` the Dirichlet Laplacian on `(0, L)`: each
//! sine mode evolves as the scalar problem with `rho = -lambda_n`.

use crate::error::{Error, Result};
use crate::resolvent::{validate_grid, Curve};
use crate::route::{scalar_curve, Route};
use crate::symbols::{KernelParams, ScalarProblem};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralModel {
    pub length: f64,
    pub n_modes: usize,
    /// Coefficients of the initial datum in the sine basis.
    pub u0_coeffs: Vec<f64>,
}

impl SpectralModel {
    pub fn new(length: f64, u0_coeffs: Vec<f64>) -> Result<Self> {
        let m = Self { length, n_modes: u0_coeffs.len(), u0_coeffs };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::domain(format!("length must be positive, got {}", self.length)));
        }
        if self.n_modes == 0 || self.u0_coeffs.len() != self.n_modes {
            return Err(Error::domain(format!(
                "need n_modes > 0 coefficients, got n_modes={} and {} coefficients",
                self.n_modes,
                self.u0_coeffs.len()
            )));
        }
        Ok(())
    }

    /// `(n pi / L)^2`.
    pub fn eigenvalue(&self, n: usize) -> f64 {
        // exact squares when L is a multiple of pi
        let k = n as f64 / (self.length / PI);
        k * k
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.n_modes {
            return Err(Error::domain(format!("mode index {n} outside 1..={}", self.n_modes)));
        }
        Ok(())
    }

    /// Scalar problem governing mode `n`.
    pub fn mode_problem(&self, params: &KernelParams, n: usize) -> Result<ScalarProblem> {
        self.check_index(n)?;
        ScalarProblem::new(*params, -self.eigenvalue(n))
    }
}

/// Eigenpair of the Dirichlet Laplacian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub index: usize,
    pub eigenvalue: f64,
    pub length: f64,
}

impl Mode {
    /// Normalized eigenfunction `sqrt(2/L) sin(n pi x / L)`.
    pub fn eval(&self, x: f64) -> f64 {
        (2.0 / self.length).sqrt() * (self.index as f64 * PI * x / self.length).sin()
    }
}

pub fn eigen_pairs(model: &SpectralModel) -> Result<Vec<Mode>> {
    model.validate()?;
    Ok((1..=model.n_modes)
        .map(|n| Mode { index: n, eigenvalue: model.eigenvalue(n), length: model.length })
        .collect())
}

/// Curve of mode `n`; identical to the scalar route at `rho = -lambda_n`.
pub fn mode_curve(
    model: &SpectralModel,
    params: &KernelParams,
    n: usize,
    times: &[f64],
    route: &Route,
) -> Result<Curve> {
    model.validate()?;
    let prob = model.mode_problem(params, n)?;
    scalar_curve(&prob, times, route).map_err(|e| e.at_mode(n))
}

fn mode_values_at(
    model: &SpectralModel,
    params: &KernelParams,
    t: f64,
    route: &Route,
) -> Result<Vec<f64>> {
    if t == 0.0 {
        return Ok(vec![1.0; model.n_modes]);
    }
    (1..=model.n_modes)
        .into_par_iter()
        .map(|n| mode_curve(model, params, n, &[0.0, t], route).map(|c| c.values[1]))
        .collect()
}

/// `u(t, x) = sum_n S_n(t) u0_n phi_n(x)` on `x_grid`.
pub fn field(
    model: &SpectralModel,
    params: &KernelParams,
    t: f64,
    x_grid: &[f64],
    route: &Route,
) -> Result<Vec<f64>> {
    model.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("field requires finite t >= 0, got {t}")));
    }
    if let Some(x) = x_grid.iter().find(|x| !(**x >= 0.0 && **x <= model.length)) {
        return Err(Error::domain(format!("x = {x} outside [0, {}]", model.length)));
    }
    let s = mode_values_at(model, params, t, route)?;
    let modes = eigen_pairs(model)?;
    Ok(x_grid
        .iter()
        .map(|&x| {
            modes
                .iter()
                .zip(&s)
                .zip(&model.u0_coeffs)
                .map(|((m, s), c)| s * c * m.eval(x))
                .sum()
        })
        .collect())
}

/// `sup_n |S_n(t)|` together with truncation diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct NormCurve {
    pub curve: Curve,
    /// Index of the largest mode at each time (lowest index on ties).
    pub argmax: Vec<usize>,
    /// Fraction of grid points whose maximum sits on the last mode.
    pub boundary_fraction: f64,
    /// Set when the last mode attains the maximum anywhere.
    pub truncation_warning: bool,
}

/// Fraction of grid points at which the last retained mode may carry the
/// norm before the truncation is rejected.
pub const BOUNDARY_ARGMAX_LIMIT: f64 = 0.1;

pub fn operator_norm_curve(
    model: &SpectralModel,
    params: &KernelParams,
    times: &[f64],
    route: &Route,
) -> Result<NormCurve> {
    model.validate()?;
    validate_grid(times)?;
    let curves: Vec<Curve> = (1..=model.n_modes)
        .into_par_iter()
        .map(|n| mode_curve(model, params, n, times, route))
        .collect::<Result<Vec<_>>>()?;
    let mut values = Vec::with_capacity(times.len());
    let mut argmax = Vec::with_capacity(times.len());
    for i in 0..times.len() {
        let (mut best, mut idx) = (f64::NEG_INFINITY, 0);
        for (n, c) in curves.iter().enumerate() {
            let v = c.values[i].abs();
            if v > best {
                best = v;
                idx = n + 1;
            }
        }
        values.push(best);
        argmax.push(idx);
    }
    let at_boundary = argmax.iter().filter(|&&n| n == model.n_modes).count();
    let boundary_fraction = at_boundary as f64 / times.len() as f64;
    // a single mode is trivially its own norm
    let truncation_warning = model.n_modes > 1 && at_boundary > 0;
    if model.n_modes > 1 && boundary_fraction > BOUNDARY_ARGMAX_LIMIT {
        return Err(Error::Truncation(format!(
            "mode {} attains the norm on {:.1}% of the grid; increase the mode count",
            model.n_modes,
            100.0 * boundary_fraction
        )));
    }
    let curve = Curve::new(times.to_vec(), values, route.method(), None)?;
    Ok(NormCurve { curve, argmax, boundary_fraction, truncation_warning })
}
