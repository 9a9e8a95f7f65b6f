//! Acceptance suite. Each test prints one `PASS`/`FAIL` line.

use memdiff_core::inversion::{forward_transform, invert_fn, invert_s, InversionConfig};
use memdiff_core::quadrature::integrate;
use memdiff_core::resolvent::{
    mu1_closed_form, series_curve, series_values, uniform_grid, Curve,
};
use memdiff_core::route::{scalar_curve, Route};
use memdiff_core::special::SeriesControl;
use memdiff_core::spectral::{eigen_pairs, field, mode_curve, operator_norm_curve, SpectralModel};
use memdiff_core::stability::{
    classify, fit_curve_decay_rate, lemma_property_suite, theoretical_bound, verify_curve_bound,
};
use memdiff_core::symbols::{laplace_s_hat, KernelParams, ScalarProblem};
use memdiff_core::verification::{max_norm_relative_deviation, series_gave_up};
use memdiff_core::volterra::{solve_volterra, volterra_curve, VolterraConfig};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

/// Written to the process stdout directly so the line survives output capture.
fn report(n: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("criterion {n} ({name}): {verdict} | {detail}\n");
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
}

fn prob(a: f64, b: f64, m: f64, r: f64) -> ScalarProblem {
    ScalarProblem::from_parts(a, b, m, r).unwrap()
}

fn agreement_grid() -> Vec<ScalarProblem> {
    let mut out = Vec::new();
    for a in [0.5, 1.0] {
        for b in [0.0, 1.0] {
            for m in [0.3, 0.5, 0.8] {
                for r in [-1.0, -2.0] {
                    out.push(prob(a, b, m, r));
                }
            }
        }
    }
    out
}

fn golden_problems() -> Vec<ScalarProblem> {
    let mut out = agreement_grid();
    out.extend([
        prob(-0.2, 1.0, 0.5, -1.0),
        prob(-0.5, 2.0, 0.3, -1.0),
        prob(1.0, 3.0, 1.0, -1.0),
        prob(1.0, 1.0, 1.0, -2.0),
    ]);
    out
}

fn describe(p: &ScalarProblem) -> String {
    format!("({}, {}, {}, {})", p.params.alpha, p.params.beta, p.params.mu, p.rho)
}

#[test]
fn criterion_1_three_way_agreement() {
    let start = Instant::now();
    let grid = uniform_grid(5.0, 32).unwrap();
    let tol = 1e-4;
    let mut worst = (0.0f64, String::new());
    let mut worst_excluded = 0.0f64;
    let mut failures = Vec::new();
    for p in agreement_grid() {
        let series = series_values(&p, &grid, &SeriesControl::default());
        let volterra = scalar_curve(&p, &grid, &Route::volterra()).unwrap();
        let laplace = scalar_curve(&p, &grid, &Route::laplace()).unwrap();
        let mut kept = Vec::new();
        for (i, v) in series.iter().enumerate() {
            match v {
                Ok(x) => kept.push((i, *x)),
                Err(e) => assert!(series_gave_up(e), "unexpected series error {e}"),
            }
        }
        let excluded = 1.0 - kept.len() as f64 / grid.len() as f64;
        worst_excluded = worst_excluded.max(excluded);
        let s: Vec<f64> = kept.iter().map(|k| k.1).collect();
        let pick = |c: &Curve| kept.iter().map(|k| c.values[k.0]).collect::<Vec<_>>();
        let devs = [
            max_norm_relative_deviation(&s, &pick(&volterra)),
            max_norm_relative_deviation(&s, &pick(&laplace)),
            max_norm_relative_deviation(&volterra.values, &laplace.values),
        ];
        let d = devs.iter().cloned().fold(0.0, f64::max);
        if d > worst.0 {
            worst = (d, describe(&p));
        }
        if d > tol || excluded >= 0.2 {
            failures.push(format!("{} dev {d:.2e} excluded {excluded:.2}", describe(&p)));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = failures.is_empty() && elapsed <= 60.0;
    report(
        1,
        "three-way agreement",
        pass,
        &format!(
            "24 problems, worst deviation {:.2e} at {}, worst series exclusion {:.0}%, {elapsed:.1} s{}",
            worst.0,
            worst.1,
            100.0 * worst_excluded,
            if failures.is_empty() { String::new() } else { format!(", failing: {failures:?}") }
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_2_mu_one_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let grid = uniform_grid(10.0, 41).unwrap();
    let mut worst = 0.0f64;
    let mut min_kept = grid.len();
    for _ in 0..20 {
        let (alpha, beta) = if rng.random::<bool>() {
            (rng.random_range(0.05..1.0), rng.random_range(0.0..2.0))
        } else {
            let a: f64 = rng.random_range(-0.5..-0.05);
            (a, rng.random_range(2.0 * a.abs()..2.5))
        };
        let rho = rng.random_range(-1.0..-0.1);
        let p = prob(alpha, beta, 1.0, rho);
        assert!(classify(&p.params, rho).class.is_supported());
        let series = series_values(&p, &grid, &SeriesControl::default());
        let mut kept = 0;
        for (t, v) in grid.iter().zip(&series) {
            match v {
                Ok(s) => {
                    kept += 1;
                    let c = mu1_closed_form(&p, *t).unwrap();
                    worst = worst.max((s - c).abs());
                }
                Err(e) => assert!(series_gave_up(e), "unexpected series error {e}"),
            }
        }
        min_kept = min_kept.min(kept);
    }

    let double = prob(1.0, 3.0, 1.0, -1.0);
    let want = 2.0 * (-2.0f64).exp();
    let closed_err = (mu1_closed_form(&double, 1.0).unwrap() - want).abs();
    let v = volterra_curve(&double, &[0.0, 1.0], 0.005, false).unwrap();
    let volterra_err = (v.values[1] - want).abs();

    let pass = worst <= 1e-8 && min_kept > 0 && closed_err <= 1e-9 && volterra_err <= 5e-4;
    report(
        2,
        "mu = 1 closed forms",
        pass,
        &format!(
            "20 random problems, worst |series - closed| {worst:.2e} (>= {min_kept}/41 convergent points each); \
             D = 0 instance: closed form error {closed_err:.1e}, Volterra error {volterra_err:.1e}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_3_lemma_suites() {
    let configs = [
        (1.0, 0.0, 0.5),
        (1.0, 1.0, 0.3),
        (0.5, 2.0, 0.8),
        (-0.2, 1.0, 0.5),
        (-0.5, 2.0, 0.3),
        (-0.1, 0.5, 0.8),
    ];
    let mut lines = Vec::new();
    let mut other_suites = 0;
    let mut shifted = 0;
    let mut shifted_at_beta_zero = 0;
    for (i, (a, b, m)) in configs.iter().enumerate() {
        let params = KernelParams::new(*a, *b, *m).unwrap();
        let r = lemma_property_suite(&params, 10_000, i as u64).unwrap();
        other_suites += r.g_bound.violations + r.arg_h.violations + r.re_power.violations;
        shifted += r.arg_h_tilde.violations;
        if *b == 0.0 {
            shifted_at_beta_zero += r.arg_h_tilde.violations;
        }
        lines.push(format!(
            "({a}, {b}, {m}): {}/{}/{}/{}",
            r.g_bound.violations, r.arg_h.violations, r.re_power.violations, r.arg_h_tilde.violations
        ));
    }
    let pass = other_suites == 0 && shifted == 0;
    report(
        3,
        "lemma suites",
        pass,
        &format!(
            "violations g/arg h/Re power/arg h~ per config: {}{}",
            lines.join("; "),
            if shifted > 0 {
                " -- the arg h~ bound fails for beta > 0 near arg lambda = pi/2 with |lambda| < beta"
            } else {
                ""
            }
        ),
    );

    // The other three suites and the beta = 0 case must hold outright.
    assert_eq!(other_suites, 0);
    assert_eq!(shifted_at_beta_zero, 0);
    // The arg h~ violations are genuine: an explicit point breaks the bound
    // by a wide margin.
    if shifted > 0 {
        let params = KernelParams::new(-0.2, 1.0, 0.5).unwrap();
        let lam = Complex64::from_polar(0.3, 1.6);
        let h = memdiff_core::symbols::symbol_h_tilde(&params, lam).unwrap();
        assert!(lam.norm().powf(0.5) >= 0.4);
        assert!(h.arg().abs() > 1.5 * 1.6 + 0.1, "arg = {}", h.arg());
    }
}

#[test]
fn criterion_4_positive_alpha_bound() {
    let p = prob(1.0, 1.0, 0.5, -2.0);
    let bound = theoretical_bound(&p.params, p.rho, 1.0).unwrap();
    let grid = uniform_grid(40.0, 801).unwrap();
    let curve = scalar_curve(&p, &grid, &Route::laplace()).unwrap();
    let check = verify_curve_bound(&curve, &bound).unwrap();
    let fit = fit_curve_decay_rate(&curve, 0.5).unwrap();
    let cross = scalar_curve(&p, &grid, &Route::Volterra { max_dt: 0.01, richardson: false }).unwrap();
    let route_gap = max_norm_relative_deviation(&curve.values, &cross.values);
    let pass = bound.rate == -1.0
        && check.holds
        && check.c_min < 100.0
        && fit.rate <= -0.95
        && route_gap < 1e-3;
    report(
        4,
        "positive-alpha decay bound",
        pass,
        &format!(
            "C_min {:.4} on [0,20], {:.4} on [0,40] (growth {:.2e}); fitted rate {:.4} (envelope {}); Volterra/Laplace gap {route_gap:.1e}",
            check.c_min_half, check.c_min, check.growth, fit.rate, fit.envelope
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_5_negative_alpha_bound() {
    let p = prob(-0.2, 1.0, 0.5, -1.0);
    let regime = classify(&p.params, p.rho);
    let bound = theoretical_bound(&p.params, p.rho, 1.0).unwrap();
    let expected_rate = -(1.0 - 0.2f64.powf(2.0 / 3.0));
    let grid = uniform_grid(40.0, 801).unwrap();
    let curve = scalar_curve(&p, &grid, &Route::laplace()).unwrap();
    let check = verify_curve_bound(&curve, &bound).unwrap();
    let fit = fit_curve_decay_rate(&curve, 0.5).unwrap();
    let pass = regime.decay_estimate_applies
        && bound.uniformly_stable
        && (bound.rate - expected_rate).abs() < 1e-12
        && check.holds
        && check.c_min < 100.0
        && fit.rate <= expected_rate + 0.05;
    report(
        5,
        "negative-alpha decay bound",
        pass,
        &format!(
            "rate {:.6}, C_min {:.4} -> {:.4} (growth {:.2e}); fitted rate {:.4}",
            bound.rate, check.c_min_half, check.c_min, check.growth, fit.rate
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_6_transform_round_trip() {
    let cfg = InversionConfig::default();
    let mut pair_err = 0.0f64;
    for t in [0.5, 1.0, 2.0, 5.0] {
        let one = invert_fn(|z| z.inv(), t, &cfg).unwrap().value;
        let exp = invert_fn(|z| (z + 1.0).inv(), t, &cfg).unwrap().value;
        pair_err = pair_err.max((one - 1.0).abs()).max((exp - (-t).exp()).abs());
    }

    let horizon = 15.0;
    let uniform = uniform_grid(horizon, 6001).unwrap();
    // geometric refinement of the first cell resolves the cusp of S at 0
    let mut graded = vec![0.0];
    graded.extend((0..60).rev().map(|k| uniform[1] * 0.8f64.powi(k)));
    graded.extend_from_slice(&uniform[2..]);
    let mut worst = (0.0f64, String::new());
    let mut curves = 0;
    for p in golden_problems() {
        let mut routes = vec![
            scalar_curve(&p, &graded, &Route::laplace()).unwrap(),
            scalar_curve(&p, &uniform, &Route::volterra()).unwrap(),
        ];
        // the series is used up to its last convergent grid point
        let vals = series_values(&p, &graded, &SeriesControl::default());
        let n = vals.iter().position(|v| v.is_err()).unwrap_or(vals.len());
        if n > 1 {
            let s = series_curve(&p, &graded[..n], &SeriesControl::default()).unwrap();
            routes.push(s);
        }
        for c in &routes {
            let tail_rate = match fit_curve_decay_rate(c, 0.5) {
                Ok(fit) => fit.rate.min(0.0),
                Err(_) => -p.params.beta,
            };
            for lam in [1.0, 2.0, 5.0] {
                let want = laplace_s_hat(&p, Complex64::new(lam, 0.0)).unwrap().re;
                let got = match forward_transform(c, lam, tail_rate) {
                    Ok(v) => v,
                    Err(e) => {
                        let tag = format!("{} {} lambda={lam}: {e}", describe(&p), c.method.as_str());
                        worst = (f64::INFINITY, tag);
                        continue;
                    }
                };
                let rel = (got - want).abs() / want.abs();
                if rel > worst.0 {
                    worst = (rel, format!("{} {} lambda={lam}", describe(&p), c.method.as_str()));
                }
            }
            curves += 1;
        }
    }
    let pass = pair_err <= 1e-10 && worst.0 <= 1e-4;
    report(
        6,
        "transform round trip",
        pass,
        &format!(
            "classical pairs error {pair_err:.1e}; {curves} curves, worst relative transform error {:.2e} ({})",
            worst.0, worst.1
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_7_spectral_consistency() {
    let coeffs: Vec<f64> = (1..=16).map(|n| 1.0 / n as f64).collect();
    let model = SpectralModel::new(PI, coeffs.clone()).unwrap();
    let params = KernelParams::new(1.0, 0.5, 0.5).unwrap();

    let grid = uniform_grid(5.0, 32).unwrap();
    let mut identical = true;
    for route in [Route::volterra(), Route::laplace()] {
        for n in 1..=16 {
            let m = mode_curve(&model, &params, n, &grid, &route).unwrap();
            let p = ScalarProblem::new(params, -((n * n) as f64)).unwrap();
            let s = scalar_curve(&p, &grid, &route).unwrap();
            identical &= m.values == s.values;
        }
    }

    let long = uniform_grid(40.0, 801).unwrap();
    let norm = operator_norm_curve(&model, &params, &long, &Route::laplace()).unwrap();
    let lambda1 = eigen_pairs(&model).unwrap()[0].eigenvalue;
    let bound = theoretical_bound(&params, -lambda1, 1.0).unwrap();
    let check = verify_curve_bound(&norm.curve, &bound).unwrap();
    let fit = fit_curve_decay_rate(&norm.curve, 0.5).unwrap();

    let u0 = |x: f64| field(&model, &params, 0.0, &[x], &Route::laplace()).unwrap()[0];
    let energy = integrate(|x| u0(x).powi(2), 0.0, PI, 32, 10);
    let coeff_energy: f64 = coeffs.iter().map(|c| c * c).sum();
    let parseval = (energy - coeff_energy).abs();

    let pass = identical
        && bound.rate == -0.5
        && check.holds
        && fit.rate <= -0.5 + 0.05
        && parseval <= 1e-8;
    report(
        7,
        "spectral consistency",
        pass,
        &format!(
            "mode/scalar curves identical: {identical}; norm curve C_min {:.4} -> {:.4} (growth {:.2e}), fitted rate {:.4}, truncation warning {}; Parseval error {parseval:.1e}",
            check.c_min_half, check.c_min, check.growth, fit.rate, norm.truncation_warning
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_8_self_convergence() {
    let horizon = 5.0;
    let mut richardson_ok = true;
    let mut worst_ratio = 0.0f64;
    let mut node_change = 0.0f64;
    let grid = uniform_grid(20.0, 41).unwrap();
    let c32 = InversionConfig::new(32, 1.0).unwrap();
    let c64 = InversionConfig::new(64, 1.0).unwrap();
    for p in golden_problems() {
        let mut prev = f64::INFINITY;
        for dt in [0.02, 0.01, 0.005] {
            let cfg = VolterraConfig::for_horizon(horizon, dt, true).unwrap();
            let est = solve_volterra(&p, &cfg).unwrap().error_estimate.unwrap();
            if est > prev * 1.1 {
                richardson_ok = false;
            }
            worst_ratio = worst_ratio.max(est / prev);
            prev = est;
        }
        for t in &grid[1..] {
            let a = invert_s(&p, *t, &c32).unwrap().value;
            let b = invert_s(&p, *t, &c64).unwrap().value;
            node_change = node_change.max((a - b).abs());
        }
    }
    let pass = richardson_ok && node_change < 1e-8;
    report(
        8,
        "self-convergence",
        pass,
        &format!(
            "{} problems; largest Richardson ratio under dt halving {worst_ratio:.3}; largest 32 -> 64 node change {node_change:.1e}",
            golden_problems().len()
        ),
    );
    assert!(pass);
}
