//! Selection of the method used to compute a scalar resolvent curve.

use crate::error::Result;
use crate::inversion::{inversion_curve, InversionConfig};
use crate::resolvent::{series_curve, Curve, Method};
use crate::special::SeriesControl;
use crate::symbols::ScalarProblem;
use crate::volterra::volterra_curve;
use serde::{Deserialize, Serialize};

/// Default Volterra step bound used for accuracy comparisons.
pub const DEFAULT_MAX_DT: f64 = 0.0025;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Route {
    Series(SeriesControl),
    Volterra { max_dt: f64, richardson: bool },
    Laplace(InversionConfig),
}

impl Route {
    pub fn method(&self) -> Method {
        match self {
            Route::Series(_) => Method::Series,
            Route::Volterra { .. } => Method::Volterra,
            Route::Laplace(_) => Method::LaplaceInversion,
        }
    }

    pub fn series() -> Self {
        Route::Series(SeriesControl::default())
    }

    pub fn volterra() -> Self {
        Route::Volterra { max_dt: DEFAULT_MAX_DT, richardson: false }
    }

    pub fn laplace() -> Self {
        Route::Laplace(InversionConfig::default())
    }
}

/// `S(t)` on `times` by the chosen route. The Volterra route needs a uniform grid.
pub fn scalar_curve(prob: &ScalarProblem, times: &[f64], route: &Route) -> Result<Curve> {
    match route {
        Route::Series(ctl) => series_curve(prob, times, ctl),
        Route::Volterra { max_dt, richardson } => volterra_curve(prob, times, *max_dt, *richardson),
        Route::Laplace(cfg) => inversion_curve(prob, times, cfg),
    }
}
