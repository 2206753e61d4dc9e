//! Acceptance suite: one PASS/FAIL line per criterion and a nonzero exit on any failure.
//!
//! Run with `cargo test -p rellich --test acceptance -- --nocapture` to see the lines.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rellich::iterlog::{verify_derivative_rule, verify_eta_identities};
use rellich::params::parse_rational;
use rellich::prober::{family_sides, sharpness_a_sweep, sharpness_b_schedule, SharpnessBConfig};
use rellich::quadrature::{divergence_rate_probe, integrate_radial, DivergenceKind, PowerWeight, QuadConfig, Substitution};
use rellich::radial_calculus::CutoffSpec;
use rellich::real::rel_diff;
use rellich::sharp_constants::{
    cancellation_report, exact_constants, star_condition, verify_constant_identities, verify_proof_coefficients, verify_radio,
    verify_recursions,
};
use rellich::{InequalityParams, Real};
use rug::Rational;

struct Outcome {
    pass: bool,
    detail: String,
}

fn q(s: &str) -> Rational {
    parse_rational(s).unwrap()
}

fn random_rational(rng: &mut ChaCha8Rng, lo: i64, hi: i64, max_den: i64) -> Rational {
    let den = rng.gen_range(1..=max_den);
    let num = rng.gen_range(lo * den..=hi * den);
    Rational::from((num, den))
}

fn fmt(x: &Real) -> String {
    x.to_string_digits(6)
}

fn constant_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0;
    let mut failures = Vec::new();
    while checked < 50 {
        let p = Rational::from(rng.gen_range(2..=3));
        let m = rng.gen_range(1..=8u32);
        let gamma = random_rational(&mut rng, 0, 6, 7);
        let k = random_rational(&mut rng, 1, 40, 5);
        let Ok(params) = InequalityParams::new(m, p, gamma, k) else { continue };
        checked += 1;
        let mut rep = verify_constant_identities(&params);
        match verify_recursions(&params) {
            Ok(r) => rep.extend(r),
            Err(e) => failures.push(format!("{e}")),
        }
        if !rep.records.iter().all(|r| r.exact) {
            failures.push("non-exact record".into());
        }
        failures.extend(rep.failures(0.0).iter().map(|r| format!("{} at {}", r.identity, r.params)));
    }
    Outcome { pass: failures.is_empty(), detail: format!("{checked} tuples, failures: {failures:?}") }
}

fn radio_identity() -> Outcome {
    let mut worst = Real::zero();
    let mut ok = true;
    for m in 1..=2u32 {
        for p in ["2", "5/2", "3"] {
            for k in ["8", "12", "20"] {
                let rep = match verify_radio(m, &q(p), &q(k)) {
                    Ok(r) => r,
                    Err(_) => {
                        ok = false;
                        continue;
                    }
                };
                ok &= rep.records[0].exact && rep.records[0].holds(0.0);
                ok &= rep.records[1..].iter().all(|r| r.holds(1e-12));
                worst = rep.records[1..].iter().map(|r| r.rel_err.clone()).fold(worst, Real::max);
            }
        }
    }
    let spot = |k: &str| exact_constants(&InequalityParams::parse(2, "2", "0", k).unwrap()).unwrap();
    let (s12, s8) = (spot("12"), spot("8"));
    let spots = s12.a == 576 && s12.b == Some(Rational::from(13)) && s8.a == 64 && s8.b == Some(Rational::from(5));
    Outcome {
        pass: ok && spots,
        detail: format!("max rel err {}, spot values A=576 B=13 / A=64 B=5: {spots}", fmt(&worst)),
    }
}

fn proof_coefficients() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    let mut worst = Real::zero();
    let mut ok = true;
    while checked < 100 {
        let p = random_rational(&mut rng, 1, 4, 4);
        let gamma = random_rational(&mut rng, 0, 5, 6);
        let k = random_rational(&mut rng, 1, 40, 3);
        let Ok(params) = InequalityParams::new(2, p, gamma, k) else { continue };
        if !params.satisfies_hypothesis() {
            continue;
        }
        let beta = random_rational(&mut rng, -3, 3, 5);
        let mu = random_rational(&mut rng, -3, 3, 5);
        let Ok(rep) = verify_proof_coefficients(&params, &beta, &mu) else { continue };
        checked += 1;
        ok &= rep.all_hold(1e-25);
        worst = worst.max(rep.max_rel_err());
    }
    Outcome { pass: ok, detail: format!("{checked} points, max rel err {}", fmt(&worst)) }
}

fn iterlog_identities() -> Outcome {
    let ells: Vec<Real> = (0..10).map(|j| Real::from(30f64.powf(j as f64 / 9.0))).collect();
    let step = Real::from(1e-3);
    let tol = Real::from(1e-50);
    let eta = verify_eta_identities(&ells, &tol, &step);
    let pairs: Vec<(usize, Real)> = vec![(1, Real::from(2.0)), (2, Real::from(-0.5)), (3, Real::from(1.5))];
    let der = verify_derivative_rule(&ells, &pairs, &step);
    match (eta, der) {
        (Ok(mut a), Ok(b)) => {
            a.extend(b);
            let worst = a.max_rel_err();
            Outcome { pass: a.all_hold(1e-15), detail: format!("{} records, max residual {}", a.records.len(), fmt(&worst)) }
        }
        (a, b) => Outcome { pass: false, detail: format!("{:?} {:?}", a.err(), b.err()) },
    }
}

fn quadrature_oracles() -> Outcome {
    let unit = InequalityParams::parse(2, "2", "0", "12").unwrap().with_domain(Real::one(), Real::one()).unwrap();
    let cfg = QuadConfig::default();
    let mut worst = Real::zero();
    let mut ok = true;
    for i in 1..=3usize {
        for e in ["1/10", "1/100", "1/1000"] {
            let e = q(e);
            let mut x = vec![Rational::from(1); i - 1];
            x.push(Rational::from(&e + 1u32));
            let w = PowerWeight::new(-unit.k.clone(), x);
            match integrate_radial(&w, &unit.k, &unit.d_scale, &Real::zero(), &Real::one(), Substitution::LogScale, |_| Real::one(), &cfg) {
                Ok(r) => {
                    let rel = rel_diff(&r.value, &Real::from_rational(&e).recip(), &Real::zero());
                    ok &= rel < 1e-20;
                    worst = worst.max(rel);
                }
                Err(_) => ok = false,
            }
        }
    }
    let params = InequalityParams::parse(2, "2", "0", "12").unwrap();
    let grid = [q("1/10000"), q("1/100000"), q("1/1000000")];
    let mut slopes = Vec::new();
    for beta in ["-3/2", "-1/2"] {
        match divergence_rate_probe(&params, &q(beta), DivergenceKind::Leading, 0, &grid, &cfg) {
            Ok(rep) => {
                let rel = ((&rep.fitted_exponent - &rep.predicted_exponent) / &rep.predicted_exponent).abs();
                ok &= rel < 0.05;
                slopes.push(format!("β={beta}: {} (want {})", fmt(&rep.fitted_exponent), fmt(&rep.predicted_exponent)));
            }
            Err(_) => ok = false,
        }
    }
    Outcome { pass: ok, detail: format!("1/ε oracles max rel err {}; divergence {}", fmt(&worst), slopes.join(", ")) }
}

fn nonnegativity() -> Outcome {
    use rayon::prelude::*;
    let cut = CutoffSpec::standard(&Real::one());
    let cfg = QuadConfig::default();
    let mut cells = Vec::new();
    for p in ["2", "5/2"] {
        for (m, k, g) in [(2u32, "12", "0"), (2, "12", "2"), (1, "8", "0"), (3, "16", "0")] {
            let params = InequalityParams::parse(m, p, g, k).unwrap();
            if params.satisfies_hypothesis() && star_condition(&params).ok {
                cells.push(params);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut jobs = Vec::new();
    for (c, params) in cells.iter().enumerate() {
        for _ in 0..10 {
            let eps: Vec<Rational> = (0..3).map(|_| Rational::from((rng.gen_range(50..=500), 1000))).collect();
            jobs.push((c, params.clone(), eps));
        }
    }
    let results: Vec<_> = jobs.par_iter().map(|(c, params, eps)| (*c, family_sides(params, eps, Some(&cut), 2, None, &cfg))).collect();
    let mut ok = true;
    let mut min_ratio: Option<Real> = None;
    for (_, r) in &results {
        match r {
            Ok(rep) => {
                ok &= rep.converged && rep.remainder >= -(&rep.error_budget * 10.0);
                let ratio = &rep.remainder / &rep.lhs;
                min_ratio = Some(match min_ratio {
                    None => ratio,
                    Some(m) => m.min(ratio),
                });
            }
            Err(_) => ok = false,
        }
    }
    Outcome {
        pass: ok && cells.len() == 8,
        detail: format!(
            "{} cells × 10 probes, smallest remainder/lhs {}",
            cells.len(),
            min_ratio.map(|x| fmt(&x)).unwrap_or_default()
        ),
    }
}

fn sharpness_a() -> Outcome {
    let params = InequalityParams::parse(2, "2", "0", "12").unwrap();
    match sharpness_a_sweep(&params, &[q("1/100"), q("1/1000")], &QuadConfig::default()) {
        Ok(rep) => {
            let q2 = &rep.rows[0].quotient_a;
            let within = rel_diff(q2, &Real::from(576.0), &Real::zero()) < 0.05;
            let ratio = rep.rows[1].gap_ratio.clone().unwrap();
            let ratio_ok = ratio >= 5.0 && ratio <= 20.0;
            let lim = rel_diff(&rep.extrapolated, &Real::from(576.0), &Real::zero());
            Outcome {
                pass: within && ratio_ok && lim < 1e-3,
                detail: format!("quotient(1e-2) {}, gap ratio {}, limit {} (rel {})", fmt(q2), fmt(&ratio), fmt(&rep.extrapolated), fmt(&lim)),
            }
        }
        Err(e) => Outcome { pass: false, detail: e.to_string() },
    }
}

fn sharpness_b() -> Outcome {
    let params = InequalityParams::parse(2, "2", "0", "12").unwrap();
    match sharpness_b_schedule(&params, 1, &SharpnessBConfig::default(), &QuadConfig::default()) {
        Ok(rep) => {
            let floor = 13.0 * (1.0 - 1e-3);
            let above = rep.rows.iter().all(|r| r.quotient >= floor);
            let last = &rep.rows.last().unwrap().quotient;
            let close = *last <= 13.0 * 1.15;
            let theta_dec = rep.theta_rows.windows(2).all(|w| w[1].quotient < w[0].quotient);
            let theta_last = &rep.theta_rows.last().unwrap().quotient;
            let theta_ok = theta_dec && *theta_last < 0.5 * 13.0;
            let qs: Vec<String> = rep.rows.iter().map(|r| fmt(&r.quotient)).collect();
            let ts: Vec<String> = rep.theta_rows.iter().map(|r| fmt(&r.quotient)).collect();
            Outcome {
                pass: above && rep.decreasing && close && theta_ok,
                detail: format!("quotients {qs:?}, extrapolated {}; θ=1 quotients {ts:?}", fmt(&rep.extrapolated)),
            }
        }
        Err(e) => Outcome { pass: false, detail: e.to_string() },
    }
}

fn cancellation_chain() -> Outcome {
    let mut worst = Real::zero();
    let mut ok = true;
    for p in ["2", "3"] {
        for k in ["12", "20"] {
            let params = InequalityParams::parse(2, p, "0", k).unwrap();
            match cancellation_report(&params, 2) {
                Ok(rep) => {
                    let r = rep.max_residual();
                    ok &= r < 1e-20;
                    worst = worst.max(r);
                }
                Err(_) => ok = false,
            }
        }
    }
    Outcome { pass: ok, detail: format!("max residual {}", fmt(&worst)) }
}

/// Runs without the libtest harness so the criterion lines are never captured.
fn main() -> ExitCode {
    type Criterion = (&'static str, u64, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("exact constant identities", 10, constant_identities),
        ("alpha product form and B identity", 5, radio_identity),
        ("proof coefficients", 5, proof_coefficients),
        ("iterated-log identities", 30, iterlog_identities),
        ("quadrature oracles and divergence rates", 120, quadrature_oracles),
        ("nonnegativity of the remainder", 600, nonnegativity),
        ("sharpness of A", 300, sharpness_a),
        ("sharpness of B and the theta probe", 1200, sharpness_b),
        ("cancellation chain", 10, cancellation_chain),
    ];
    let mut failed = Vec::new();
    for (n, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*budget);
        let pass = out.pass && in_time;
        println!(
            "criterion {}: {} {name} ({:.2?} of {budget} s) {}",
            n + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed,
            out.detail
        );
        if !pass {
            failed.push(n + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
