//! Log-gamma, regularized incomplete gamma and the Prabhakar family
//! `E^{(k+1)}_{mu+1,k+1}` used by the series representation of the resolvent.

use crate::error::{Error, Result};
use crate::quadrature::CompensatedSum;
use serde::{Deserialize, Serialize};

/// `zeta(k) - 1` for k = 2..=32.
const ZETA_MINUS_ONE: [f64; 31] = [
    0.644_934_066_848_226_44,
    0.202_056_903_159_594_29,
    0.082_323_233_711_138_192,
    0.036_927_755_143_369_926,
    0.017_343_061_984_449_14,
    0.008_349_277_381_922_826_8,
    0.004_077_356_197_944_339_4,
    0.002_008_392_826_082_214_4,
    0.000_994_575_127_818_085_34,
    0.000_494_188_604_119_464_56,
    0.000_246_086_553_308_048_3,
    0.000_122_713_347_578_489_15,
    6.124_813_505_870_482_9e-5,
    3.058_823_630_702_049_4e-5,
    1.528_225_940_865_187_2e-5,
    7.637_197_637_899_762_3e-6,
    3.817_293_264_999_839_9e-6,
    1.908_212_716_553_938_9e-6,
    9.539_620_338_727_961_1e-7,
    4.769_329_867_878_064_6e-7,
    2.384_505_027_277_329_9e-7,
    1.192_199_259_653_110_7e-7,
    5.960_818_905_125_948e-8,
    2.980_350_351_465_228e-8,
    1.490_155_482_836_504_1e-8,
    7.450_711_789_835_429_5e-9,
    3.725_334_024_788_457_1e-9,
    1.862_659_723_513_049e-9,
    9.313_274_324_196_681_8e-10,
    4.656_629_065_033_784_1e-10,
    2.328_311_833_676_505_5e-10,
];

const ONE_MINUS_EULER_GAMMA: f64 = 0.422_784_335_098_467_14;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_74;

/// ln Gamma(2 + e) for |e| <= 0.5, from the Taylor series about 2.
fn ln_gamma_near_two(e: f64) -> f64 {
    let mut acc = 0.0;
    for (i, c) in ZETA_MINUS_ONE.iter().enumerate().rev() {
        let k = (i + 2) as f64;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        acc = (acc + sign * c / k) * e;
    }
    // acc = sum_{k>=2} (-1)^k (zeta(k)-1) e^{k-1}/k; one more factor of e below
    (ONE_MINUS_EULER_GAMMA + acc) * e
}

fn ln_gamma_stirling(x: f64) -> f64 {
    // Bernoulli terms B_{2j}/(2j(2j-1) x^{2j-1}) up to x^-13
    const C: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
    ];
    let r = 1.0 / x;
    let r2 = r * r;
    let mut corr = 0.0;
    for c in C.iter().rev() {
        corr = corr * r2 + c;
    }
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + corr * r
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        ln_gamma_near_two(x) - x.ln() - x.ln_1p()
    } else if x < 1.5 {
        ln_gamma_near_two(x - 1.0) - x.ln()
    } else if x <= 2.5 {
        ln_gamma_near_two(x - 2.0)
    } else if x < 15.0 {
        let mut y = x;
        let mut prod = 1.0;
        while y > 2.5 {
            y -= 1.0;
            prod *= y;
        }
        ln_gamma_near_two(y - 2.0) + prod.ln()
    } else {
        ln_gamma_stirling(x)
    }
}

/// Natural logarithm of the gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain(format!("log_gamma requires finite x > 0, got {x}")));
    }
    Ok(ln_gamma_unchecked(x))
}

/// Regularized lower incomplete gamma `P(a, x)` for general `a > 0`.
pub fn reg_lower_gamma(a: f64, x: f64) -> Result<f64> {
    if !a.is_finite() || a <= 0.0 {
        return Err(Error::domain(format!("incomplete gamma requires a > 0, got {a}")));
    }
    if x.is_nan() || x < 0.0 {
        return Err(Error::domain(format!("incomplete gamma requires x >= 0, got {x}")));
    }
    Ok(p_unchecked(a, x))
}

/// `P(mu, x)` restricted to the kernel exponent range `0 < mu <= 1`.
pub fn reg_lower_inc_gamma(mu: f64, x: f64) -> Result<f64> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::domain(format!("mu must lie in (0, 1], got {mu}")));
    }
    reg_lower_gamma(mu, x)
}

pub(crate) fn p_unchecked(a: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x == f64::INFINITY {
        return 1.0;
    }
    let log_prefactor = a * x.ln() - x;
    if x < a + 1.0 {
        // sum x^n / (a+1)...(a+n)
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..1000 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        (log_prefactor - ln_gamma_unchecked(a) + sum.ln()).exp().min(1.0)
    } else {
        // modified Lentz on the continued fraction for Q
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..1000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        let q = (log_prefactor - ln_gamma_unchecked(a)).exp() * h;
        (1.0 - q).clamp(0.0, 1.0)
    }
}

/// Index pair selecting `E^{(k+1)}_{mu+1,k+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MLParams {
    pub mu: f64,
    pub k: u32,
}

impl MLParams {
    pub fn new(mu: f64, k: u32) -> Result<Self> {
        let p = Self { mu, k };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu <= 1.0) {
            return Err(Error::domain(format!("mu must lie in (0, 1], got {}", self.mu)));
        }
        Ok(())
    }
}

/// Truncation policy for the series evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesControl {
    pub rel_tol: f64,
    pub max_terms: usize,
    pub consecutive_small: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self { rel_tol: 1e-12, max_terms: 2000, consecutive_small: 3 }
    }
}

impl SeriesControl {
    pub fn new(rel_tol: f64, max_terms: usize, consecutive_small: usize) -> Result<Self> {
        let c = Self { rel_tol, max_terms, consecutive_small };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::domain(format!("rel_tol must lie in (0, 1), got {}", self.rel_tol)));
        }
        if self.max_terms < 16 {
            return Err(Error::domain(format!("max_terms must be >= 16, got {}", self.max_terms)));
        }
        if self.consecutive_small < 2 {
            return Err(Error::domain(format!(
                "consecutive_small must be >= 2, got {}",
                self.consecutive_small
            )));
        }
        Ok(())
    }
}

/// Largest |z| for which the Prabhakar series is attempted.
pub const ML_ARGUMENT_LIMIT: f64 = 100.0;

/// Result of a truncated series together with bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub terms: usize,
    /// Sum of term magnitudes; `abs_sum * eps` bounds the rounding error.
    pub abs_sum: f64,
}

/// Tracks the "|term| < tol |sum| for several terms in a row" stopping rule.
pub(crate) struct Truncation {
    tol: f64,
    needed: usize,
    run: usize,
}

impl Truncation {
    pub(crate) fn new(ctl: &SeriesControl) -> Self {
        Self { tol: ctl.rel_tol, needed: ctl.consecutive_small, run: 0 }
    }

    pub(crate) fn done(&mut self, term: f64, sum: f64) -> bool {
        if term.abs() < self.tol * sum.abs() || (term == 0.0 && sum == 0.0) {
            self.run += 1;
        } else {
            self.run = 0;
        }
        self.run >= self.needed
    }
}

/// Generalized Mittag-Leffler function `E^{(k+1)}_{mu+1,k+1}(z)`.
pub fn prabhakar_ml(p: MLParams, z: f64, ctl: &SeriesControl) -> Result<f64> {
    prabhakar_ml_detailed(p, z, ctl).map(|s| s.value)
}

/// As [`prabhakar_ml`], also returning the number of terms summed.
pub fn prabhakar_ml_detailed(p: MLParams, z: f64, ctl: &SeriesControl) -> Result<SeriesValue> {
    p.validate()?;
    ctl.validate()?;
    if !z.is_finite() {
        return Err(Error::domain(format!("argument must be finite, got {z}")));
    }
    let k = p.k as f64;
    let ln_k_fact = ln_gamma_unchecked(k + 1.0);
    if z == 0.0 {
        let v = (-ln_k_fact).exp();
        return Ok(SeriesValue { value: v, terms: 1, abs_sum: v });
    }
    if z.abs() > ML_ARGUMENT_LIMIT {
        return Err(Error::Convergence { terms: 0, last_term: f64::INFINITY });
    }
    let ln_z = z.abs().ln();
    let negative = z < 0.0;
    let a = p.mu + 1.0;
    let mut sum = CompensatedSum::new();
    let mut abs_sum = 0.0;
    let mut stop = Truncation::new(ctl);
    let mut last = 0.0;
    for n in 0..ctl.max_terms {
        let nf = n as f64;
        let ln_term = ln_gamma_unchecked(k + nf + 1.0)
            - ln_gamma_unchecked(nf + 1.0)
            - ln_k_fact
            - ln_gamma_unchecked(nf * a + k + 1.0)
            + nf * ln_z;
        let mag = ln_term.exp();
        let term = if negative && n % 2 == 1 { -mag } else { mag };
        sum.add(term);
        abs_sum += mag;
        last = mag;
        if !mag.is_finite() {
            break;
        }
        if stop.done(term, sum.value()) {
            return Ok(SeriesValue { value: sum.value(), terms: n + 1, abs_sum });
        }
    }
    Err(Error::Convergence { terms: ctl.max_terms, last_term: last })
}
