use memdiff_core::resolvent::Curve;
use memdiff_core::stability::{DecayBound, Regime};
use serde::Serialize;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

/// Shortest decimal that parses back to the same `f64`; `0` and `1` print bare.
pub fn number(x: f64) -> String {
    format!("{x}")
}

pub fn curve_csv(curve: &Curve) -> String {
    let method = curve.method.as_str();
    let mut s = String::from("t,value,method\n");
    for (t, v) in curve.times.iter().zip(&curve.values) {
        let _ = writeln!(s, "{},{},{method}", number(*t), number(*v));
    }
    s
}

#[derive(Serialize)]
struct CurveRecord<'a> {
    method: &'a str,
    t: &'a [f64],
    value: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    error_estimate: Option<f64>,
}

pub fn curve_json(curve: &Curve) -> String {
    to_json(&CurveRecord {
        method: curve.method.as_str(),
        t: &curve.times,
        value: &curve.values,
        error_estimate: curve.error_estimate,
    })
}

#[derive(Serialize)]
pub struct Classification {
    pub regime: Regime,
    pub bound: Option<DecayBound>,
}

pub fn classification_text(regime: &Regime, bound: Option<&DecayBound>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "regime: {:?}", regime.class);
    let _ = writeln!(s, "beta_plus_omega: {}", number(regime.beta_plus_omega));
    match bound {
        Some(b) => {
            let _ = writeln!(s, "rate: {}", number(b.rate));
            if b.poly_coeff != 0.0 {
                let _ = writeln!(
                    s,
                    "profile: (1 + {} t^{}) e^(rate t)",
                    number(b.poly_coeff),
                    number(b.poly_power)
                );
            }
            let _ = writeln!(s, "uniformly_stable: {}", b.uniformly_stable);
        }
        None => {
            let _ = writeln!(s, "decay_estimate: not applicable");
        }
    }
    s
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn emit(text: &str, path: Option<&Path>) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}
