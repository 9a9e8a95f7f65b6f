//! Numerical inverse Laplace transform on a Talbot-type contour, plus the
//! forward transform used for round-trip checks.
//!
//! The resolvent is recovered through `G(t) = e^{beta t} S(t)`, whose
//! transform has its branch point at the origin. Poles of the transform on
//! the principal sheet are located up front and their principal parts are
//! subtracted before quadrature and added back exactly, so that poles close
//! to (or to the right of) the contour do not spoil the rule.

use crate::error::{Error, Result};
use crate::resolvent::{validate_grid, Curve, Method};
use crate::symbols::{cpow, ScalarProblem};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

// Weideman-Trefethen optimized cotangent contour.
const SHAPE_A: f64 = 0.5017;
const SHAPE_B: f64 = 0.6407;
const SHAPE_SHIFT: f64 = 0.6122;
const SHAPE_C: f64 = 0.2645;

/// Nodes whose transform denominator is smaller than this abort the inversion.
const NODE_DENOMINATOR_GUARD: f64 = 1e-10;
/// Largest acceptable imaginary part of the quadrature sum.
pub const IMAG_RESIDUE_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InversionConfig {
    pub n_nodes: usize,
    /// Multiplier on the contour size `n_nodes / t`.
    pub contour_scale: f64,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self { n_nodes: 32, contour_scale: 1.0 }
    }
}

impl InversionConfig {
    pub fn new(n_nodes: usize, contour_scale: f64) -> Result<Self> {
        let c = Self { n_nodes, contour_scale };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.n_nodes.is_multiple_of(2) || !(16..=256).contains(&self.n_nodes) {
            return Err(Error::domain(format!(
                "n_nodes must be even and within [16, 256], got {}",
                self.n_nodes
            )));
        }
        if !(self.contour_scale > 0.0 && self.contour_scale.is_finite()) {
            return Err(Error::domain(format!(
                "contour_scale must be positive, got {}",
                self.contour_scale
            )));
        }
        Ok(())
    }
}

/// Inverted value and the size of the discarded imaginary part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionValue {
    pub value: f64,
    pub imag_residue: f64,
}

impl InversionValue {
    pub fn trusted(&self) -> bool {
        self.imag_residue < IMAG_RESIDUE_LIMIT
    }
}

/// Contour points `lambda_k` and derivatives `dlambda/dtheta` for time `t`.
fn contour(t: f64, cfg: &InversionConfig) -> Vec<(Complex64, Complex64)> {
    let n = cfg.n_nodes;
    let scale = n as f64 * cfg.contour_scale / t;
    (0..n)
        .map(|k| {
            let th = -PI + (k as f64 + 0.5) * 2.0 * PI / n as f64;
            let bt = SHAPE_B * th;
            // th is never 0 for even n
            let cot = bt.cos() / bt.sin();
            let w = Complex64::new(SHAPE_A * th * cot - SHAPE_SHIFT, SHAPE_C * th);
            let sin = bt.sin();
            let dw = Complex64::new(SHAPE_A * cot - SHAPE_A * SHAPE_B * th / (sin * sin), SHAPE_C);
            (w * scale, dw * scale)
        })
        .collect()
}

fn quadrature<F>(f: F, t: f64, cfg: &InversionConfig) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut acc = Complex64::new(0.0, 0.0);
    for (lam, dlam) in contour(t, cfg) {
        acc += (lam * t).exp() * f(lam)? * dlam;
    }
    Ok(acc / Complex64::new(0.0, cfg.n_nodes as f64))
}

/// Inverts an arbitrary transform that is analytic to the right of the
/// contour (no pole handling).
pub fn invert_fn<F>(f: F, t: f64, cfg: &InversionConfig) -> Result<InversionValue>
where
    F: Fn(Complex64) -> Complex64,
{
    cfg.validate()?;
    require_positive_time(t)?;
    let s = quadrature(|z| Ok(f(z)), t, cfg)?;
    Ok(InversionValue { value: s.re, imag_residue: s.im.abs() })
}

fn require_positive_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("inversion requires finite t > 0, got {t}")))
    }
}

/// A pole of the shifted transform with its principal part
/// `residue/(z-p)` (+ `second/(z-p)^2` for a double pole).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    pub location: Complex64,
    pub residue: Complex64,
    pub second: Complex64,
}

impl Pole {
    fn principal_part(&self, z: Complex64) -> Complex64 {
        let d = (z - self.location).inv();
        self.residue * d + self.second * d * d
    }

    fn inverse(&self, t: f64) -> Complex64 {
        (self.location * t).exp() * (self.residue + self.second * t)
    }
}

/// Poles on the principal sheet of `z^mu / (z^{mu+1} - c z^mu - q)`, where
/// `c = rho + beta` and `q = alpha rho`, with their principal parts.
///
/// Clustered pairs of poles are dropped: their residues are too large to
/// subtract accurately and the contour rule copes with them directly.
pub fn transform_poles(prob: &ScalarProblem) -> Result<Vec<Pole>> {
    prob.validate()?;
    let mu = prob.params.mu;
    let c = prob.rho + prob.params.beta;
    let q = prob.params.alpha * prob.rho;
    if q == 0.0 {
        return Ok(vec![simple(Complex64::new(c, 0.0), Complex64::new(1.0, 0.0))]);
    }
    if mu == 1.0 {
        return Ok(quadratic_poles(c, q));
    }
    let roots = principal_roots(mu, c, q)?;
    let clustered = roots.iter().enumerate().any(|(i, a)| {
        roots[i + 1..].iter().any(|b| (a - b).norm() < 1e-6 * (1.0 + a.norm()))
    });
    if clustered {
        return Ok(Vec::new());
    }
    Ok(roots
        .into_iter()
        .map(|p| {
            let pm = cpow(p, mu);
            let deriv = (mu + 1.0) * pm - c * mu * pm / p;
            simple(p, pm / deriv)
        })
        .collect())
}

fn simple(location: Complex64, residue: Complex64) -> Pole {
    Pole { location, residue, second: Complex64::new(0.0, 0.0) }
}

fn quadratic_poles(c: f64, q: f64) -> Vec<Pole> {
    // z / (z^2 - c z - q)
    let d = c * c + 4.0 * q;
    if d.abs() < 1e-12 * (c * c).max(1.0) {
        let p = Complex64::new(0.5 * c, 0.0);
        return vec![Pole { location: p, residue: Complex64::new(1.0, 0.0), second: p }];
    }
    let root = Complex64::new(d, 0.0).sqrt();
    let p1 = (c + root) * 0.5;
    let p2 = (c - root) * 0.5;
    vec![simple(p1, p1 / (p1 - p2)), simple(p2, p2 / (p2 - p1))]
}

fn char_fn(mu: f64, c: f64, q: f64, z: Complex64) -> Complex64 {
    let zm = cpow(z, mu);
    z * zm - c * zm - q
}

/// Bisection for the increasing function `f` on `[lo, hi]`.
fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn principal_roots(mu: f64, c: f64, q: f64) -> Result<Vec<Complex64>> {
    // every root satisfies |z|^mu |z - c| = |q|
    let (ac, aq) = (c.abs(), q.abs());
    let r_lo = bisect(|r| r.powf(mu) * (r + ac) - aq, 0.0, 1.0);
    let r_hi = bisect(|r| r.powf(mu) * (r - ac) - aq, ac, ac + 1.0);
    let expected = winding_count(mu, c, q, 0.5 * r_lo, 2.0 * r_hi + 1.0)?;
    for (radii, angles) in [(12, 24), (48, 96)] {
        let found = newton_search(mu, c, q, r_lo / 1.5, 1.5 * r_hi, radii, angles);
        if found.len() == expected {
            return Ok(found);
        }
    }
    Err(Error::Contour(format!(
        "pole search did not find the {expected} poles predicted by the argument principle"
    )))
}

fn newton_search(
    mu: f64,
    c: f64,
    q: f64,
    r_min: f64,
    r_max: f64,
    radii: usize,
    angles: usize,
) -> Vec<Complex64> {
    let f = |s: Complex64| (s * (mu + 1.0)).exp() - c * (s * mu).exp() - q;
    let df = |s: Complex64| (s * (mu + 1.0)).exp() * (mu + 1.0) - c * mu * (s * mu).exp();
    let mut found: Vec<Complex64> = Vec::new();
    for i in 0..radii {
        let r = r_min * (r_max / r_min).powf(i as f64 / (radii - 1) as f64);
        for j in 0..angles {
            let th = -PI + (j as f64 + 0.5) * 2.0 * PI / angles as f64;
            let mut s = Complex64::new(r.ln(), th);
            let mut converged = false;
            for _ in 0..100 {
                let step = f(s) / df(s);
                if !step.re.is_finite() || !step.im.is_finite() {
                    break;
                }
                s -= step;
                if step.norm() < 1e-14 * (1.0 + s.norm()) {
                    converged = true;
                    break;
                }
            }
            if !converged || s.im.abs() >= PI {
                continue;
            }
            let z = s.exp();
            let scale = z.norm().powf(mu + 1.0) + c.abs() * z.norm().powf(mu) + q.abs();
            if char_fn(mu, c, q, z).norm() > 1e-10 * scale {
                continue;
            }
            if found.iter().all(|w| (w - z).norm() > 1e-8 * (1.0 + z.norm())) {
                found.push(z);
            }
        }
    }
    found.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    found
}

/// Number of zeros of `z^{mu+1} - c z^mu - q` in the slit annulus
/// `r_small < |z| < r_big`, from the argument principle on a keyhole contour.
fn winding_count(mu: f64, c: f64, q: f64, r_small: f64, r_big: f64) -> Result<usize> {
    let polar = |r: f64, th: f64| {
        let zm = Complex64::from_polar(r.powf(mu), mu * th);
        Complex64::from_polar(r, th) * zm - c * zm - q
    };
    let segments: [Box<dyn Fn(f64) -> Complex64>; 4] = [
        Box::new(|s| polar(r_big, -PI + 2.0 * PI * s)),
        // radial legs are parameterized in ln r; r_small can be tiny
        Box::new(|s| polar(r_big * (r_small / r_big).powf(s), PI)),
        Box::new(|s| polar(r_small, PI - 2.0 * PI * s)),
        Box::new(|s| polar(r_small * (r_big / r_small).powf(s), -PI)),
    ];
    let mut total = 0.0;
    for seg in &segments {
        total += phase_change(seg.as_ref(), 0.0, 1.0, seg(0.0), seg(1.0), 0)?;
    }
    let turns = total / (2.0 * PI);
    let rounded = turns.round();
    if (turns - rounded).abs() > 0.1 || rounded < 0.0 {
        return Err(Error::Contour(format!("argument principle gave {turns} turns")));
    }
    Ok(rounded as usize)
}

fn phase_change(
    f: &dyn Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    fa: Complex64,
    fb: Complex64,
    depth: usize,
) -> Result<f64> {
    let d = (fb / fa).arg();
    if d.abs() < 0.2 && depth > 3 {
        return Ok(d);
    }
    if depth > 50 {
        return Err(Error::Contour("argument principle contour passes through a zero".into()));
    }
    let m = 0.5 * (a + b);
    let fm = f(m);
    Ok(phase_change(f, a, m, fa, fm, depth + 1)? + phase_change(f, m, b, fm, fb, depth + 1)?)
}

fn invert_g_with_poles(
    prob: &ScalarProblem,
    poles: &[Pole],
    t: f64,
    cfg: &InversionConfig,
) -> Result<InversionValue> {
    let p = &prob.params;
    let c = prob.rho + p.beta;
    let q = p.alpha * prob.rho;
    if q == 0.0 {
        return Ok(InversionValue { value: (c * t).exp(), imag_residue: 0.0 });
    }
    let integrand = |z: Complex64| -> Result<Complex64> {
        let zm = cpow(z, p.mu);
        let den = z * zm - c * zm - q;
        if den.norm() < NODE_DENOMINATOR_GUARD {
            return Err(Error::Contour(format!(
                "contour node {z} lies on a pole of the transform; increase contour_scale"
            )));
        }
        let mut v = zm / den;
        for pole in poles {
            v -= pole.principal_part(z);
        }
        Ok(v)
    };
    let s = quadrature(integrand, t, cfg)?;
    let exact: Complex64 = poles.iter().map(|pole| pole.inverse(t)).sum();
    let total = s + exact;
    Ok(InversionValue { value: total.re, imag_residue: total.im.abs() })
}

/// `G(t) = e^{beta t} S(t)` from its transform.
pub fn invert_g(prob: &ScalarProblem, t: f64, cfg: &InversionConfig) -> Result<InversionValue> {
    cfg.validate()?;
    require_positive_time(t)?;
    let poles = transform_poles(prob)?;
    invert_g_with_poles(prob, &poles, t, cfg)
}

fn s_from_g(prob: &ScalarProblem, g: InversionValue, t: f64) -> Result<InversionValue> {
    let damp = (-prob.params.beta * t).exp();
    let v = InversionValue { value: damp * g.value, imag_residue: damp * g.imag_residue };
    if !v.trusted() {
        return Err(Error::Accuracy(format!(
            "imaginary residue {:e} of the contour sum exceeds {IMAG_RESIDUE_LIMIT:e}",
            v.imag_residue
        )));
    }
    Ok(v)
}

/// `S(t)` by contour inversion. Fails if the discarded imaginary part is
/// too large for the value to be trusted.
pub fn invert_s(prob: &ScalarProblem, t: f64, cfg: &InversionConfig) -> Result<InversionValue> {
    let g = invert_g(prob, t, cfg)?;
    s_from_g(prob, g, t)
}

/// Inversion on a grid; `S(0) = 1` is used at the origin.
pub fn inversion_curve(prob: &ScalarProblem, times: &[f64], cfg: &InversionConfig) -> Result<Curve> {
    validate_grid(times)?;
    cfg.validate()?;
    let poles = transform_poles(prob)?;
    let values: Vec<Result<f64>> = times
        .par_iter()
        .map(|&t| {
            if t == 0.0 {
                return Ok(1.0);
            }
            invert_g_with_poles(prob, &poles, t, cfg)
                .and_then(|g| s_from_g(prob, g, t))
                .map(|v| v.value)
                .map_err(|e| e.at_time(t))
        })
        .collect();
    let values = values.into_iter().collect::<Result<Vec<_>>>()?;
    Curve::new(times.to_vec(), values, Method::LaplaceInversion, Some(*prob))
}

/// `int_0^inf e^{-lambda t} v(t) dt` from a sampled curve: trapezoid rule on
/// the grid plus the tail `v(T) e^{-lambda T} / (lambda - tail_rate)`, which
/// assumes `v` decays like `e^{tail_rate t}` beyond the horizon `T`.
pub fn forward_transform(curve: &Curve, lambda: f64, tail_rate: f64) -> Result<f64> {
    forward_transform_samples(&curve.times, &curve.values, lambda, tail_rate)
}

/// As [`forward_transform`] on raw samples; the grid need not start at zero.
pub fn forward_transform_samples(
    times: &[f64],
    values: &[f64],
    lambda: f64,
    tail_rate: f64,
) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::domain(format!("lambda must be positive, got {lambda}")));
    }
    if times.len() != values.len() || times.len() < 2 {
        return Err(Error::domain("forward transform needs at least two samples"));
    }
    if !(lambda > tail_rate) {
        return Err(Error::Accuracy(format!(
            "lambda = {lambda} does not exceed the tail decay rate {tail_rate}"
        )));
    }
    let f: Vec<f64> = times.iter().zip(values).map(|(t, v)| (-lambda * t).exp() * v).collect();
    let mut body = 0.0;
    for i in 1..times.len() {
        body += 0.5 * (times[i] - times[i - 1]) * (f[i] + f[i - 1]);
    }
    let tail = f[f.len() - 1] / (lambda - tail_rate);
    let total = body + tail;
    if tail.abs() > 0.1 * total.abs() {
        return Err(Error::Accuracy(format!(
            "tail correction {tail:e} exceeds 10% of the transform {total:e}; lambda too small"
        )));
    }
    Ok(total)
}
