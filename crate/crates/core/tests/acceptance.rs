//! Acceptance suite. Runs every criterion at its pinned tolerance, prints one
//! PASS/FAIL line per criterion and exits non-zero if any criterion fails.
//!
//! Run with `cargo test -p quench-core --test acceptance`.

use std::f64::consts::{LN_2, PI};
use std::process::ExitCode;
use std::time::Instant;

use quench_core::eff_temp::{f_d, f_d_closed, g_d, g_d_closed, solve_average_beta};
use quench_core::evolution::{
    compare_ansatz, conserved_energy, quasi_adiabatic_stationary, self_consistent_evolve, EvolutionConfig,
};
use quench_core::free_quench::{
    deep_quench_closed_form, real_space_propagator, vertex_correlator, vertex_from_propagator, RealSpaceMode,
    VertexParams,
};
use quench_core::imaginary_time::verify_quench_slab_identity;
use quench_core::mass_gap::solve_m_star;
use quench_core::{build_grid, Dim, GridProfile, QuenchSpec};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

type Check = fn() -> Outcome;

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn slab_identity() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x51ab);
    let mut worst = 0.0f64;
    for _ in 0..32 {
        let k = rng.random_range(0.0..5.0);
        let m0: f64 = rng.random_range(0.1..10.0);
        let mut m: f64 = rng.random_range(0.0..10.0);
        if (m - m0).abs() < 1e-3 {
            m += 0.5;
        }
        let spec = QuenchSpec::new(Dim::One, m0, m);
        let samples: Vec<(f64, f64)> =
            (0..64).map(|_| (rng.random_range(0.0..20.0), rng.random_range(0.0..20.0))).collect();
        match verify_quench_slab_identity(k, &spec, &samples) {
            Ok(e) => worst = worst.max(e),
            Err(e) => return Outcome::new(false, format!("k={k} m0={m0} m={m}: {e}")),
        }
    }
    Outcome::new(worst < 1e-12, format!("max |C_q - G_slab| = {worst:.3e} (< 1e-12)"))
}

fn table_integrals() -> Outcome {
    let mut worst = 0.0f64;
    let mut at = String::new();
    let points: Vec<f64> = (0..16).map(|i| 10f64.powf(-2.0 + 4.0 * (i as f64 + 0.5) / 16.0)).collect();
    for d in [Dim::One, Dim::Two, Dim::Three] {
        for &s in &points {
            let e = rel(f_d(s, d).unwrap(), f_d_closed(s, d).unwrap());
            if e > worst {
                worst = e;
                at = format!("f_{d}({s:.4})");
            }
        }
    }
    for &s in &points {
        let e = rel(g_d(s, Dim::Two).unwrap(), g_d_closed(s, Dim::Two).unwrap());
        if e > worst {
            worst = e;
            at = format!("g_2({s:.4})");
        }
    }
    Outcome::new(worst < 1e-6, format!("worst relative deviation {worst:.3e} at {at} (< 1e-6)"))
}

fn beta_m0(d: Dim, x: f64) -> f64 {
    solve_average_beta(&QuenchSpec::new(d, 1.0, x)).unwrap().y.finite().unwrap()
}

fn beta_intercepts() -> Outcome {
    let y3 = beta_m0(Dim::Three, 1e-3);
    let ok3 = (y3 - 2.0 * PI / 3f64.sqrt()).abs() < 0.01;
    let mut worst1 = 0.0f64;
    let mut at1 = 0.0;
    for i in 1..=20 {
        let x = 1e-3 * i as f64;
        let e = rel(beta_m0(Dim::One, x), 4.0 + 32.0 * LN_2 / PI * x);
        if e > worst1 {
            (worst1, at1) = (e, x);
        }
    }
    let ok1 = worst1 < 0.01;
    let y2 = beta_m0(Dim::Two, 1e-3);
    let ok2 = rel(y2, 4.0) < 0.1;
    Outcome::new(
        ok1 && ok2 && ok3,
        format!(
            "d=3 beta*m0(1e-3) = {y3:.5} (2pi/sqrt3 +- 0.01) {}; d=1 worst deviation from linear form {:.2}% at m/m0 = {at1} (< 1%) {}; d=2 beta*m0(1e-3) = {y2:.4} (within 10% of 4) {}",
            tick(ok3),
            100.0 * worst1,
            tick(ok1),
            tick(ok2)
        ),
    )
}

fn horizon_profile() -> Outcome {
    let cutoff = 2000.0;
    let spec = QuenchSpec::new(Dim::One, 1.0, 0.0).with_cutoff(cutoff);
    let grid = build_grid(Dim::One, cutoff, &GridProfile::uniform(40_000)).unwrap();
    let mut rng = StdRng::seed_from_u64(0x40);
    let mut worst_in = 0.0f64;
    let mut worst_out = 0.0f64;
    for i in 0..64 {
        let t = rng.random_range(0.5..3.0);
        // half the points outside the light cone
        let r = if i % 2 == 0 { rng.random_range(0.0..2.0 * t) } else { rng.random_range(2.0 * t + 0.05..12.0) };
        let num = real_space_propagator(r, t, t, &spec, &grid, RealSpaceMode::DeepQuench).unwrap();
        let exact = deep_quench_closed_form(r, t, Dim::One, 1.0).unwrap();
        if r < 2.0 * t {
            worst_in = worst_in.max((num - exact).abs());
        } else {
            worst_out = worst_out.max(num.abs());
        }
    }
    Outcome::new(
        worst_in < 1e-3 && worst_out < 1e-3,
        format!("inside max error {worst_in:.3e}, outside max |C| {worst_out:.3e} (both < 1e-3 m0)"),
    )
}

fn gap_asymptotics() -> Outcome {
    let m2 = solve_m_star(&QuenchSpec::new(Dim::Two, 1.0, 0.0).with_lambda(1e6)).unwrap().m_star;
    let ok2 = (m2 - 0.24954).abs() < 1e-3;
    let target3 = 1e-3f64.sqrt() / (4.0 * PI * 2f64.sqrt());
    let mut ok3 = true;
    let mut d3 = Vec::new();
    for cutoff in [1e4, 1e7] {
        let m = solve_m_star(&QuenchSpec::new(Dim::Three, 1.0, 0.0).with_lambda(1e-3).with_cutoff(cutoff)).unwrap().m_star;
        ok3 &= rel(m, target3) < 0.02;
        d3.push(format!("{:.2}%", 100.0 * rel(m, target3)));
    }
    let m1 = solve_m_star(&QuenchSpec::new(Dim::One, 1.0, 2.0).with_lambda(1e4)).unwrap().m_star;
    let ok1 = rel(m1, 2.0) < 0.05;
    Outcome::new(
        ok1 && ok2 && ok3,
        format!(
            "d=2 m* = {m2:.5} (0.24954 +- 1e-3) {}; d=3 small-lambda deviation {} (< 2%) {}; d=1 m*(1e4) = {m1:.4} (within 5% of 2) {}",
            tick(ok2),
            d3.join(", "),
            tick(ok3),
            tick(ok1)
        ),
    )
}

struct EvolutionCase {
    d: Dim,
    m: f64,
    lambda: f64,
    cutoff: Option<f64>,
    t_max: f64,
}

const EVOLUTION_CASES: [EvolutionCase; 8] = [
    EvolutionCase { d: Dim::One, m: 2.0, lambda: 10.0, cutoff: None, t_max: 100.0 },
    EvolutionCase { d: Dim::One, m: 0.5, lambda: 10.0, cutoff: None, t_max: 100.0 },
    EvolutionCase { d: Dim::Two, m: 2.0, lambda: 1.0, cutoff: None, t_max: 100.0 },
    EvolutionCase { d: Dim::Two, m: 2.0, lambda: 5.0, cutoff: None, t_max: 100.0 },
    EvolutionCase { d: Dim::Two, m: 2.0, lambda: 10.0, cutoff: None, t_max: 100.0 },
    EvolutionCase { d: Dim::Two, m: 2.0, lambda: 20.0, cutoff: None, t_max: 100.0 },
    EvolutionCase { d: Dim::Two, m: 5.0, lambda: 10.0, cutoff: None, t_max: 60.0 },
    EvolutionCase { d: Dim::Three, m: 0.0, lambda: 1.0, cutoff: Some(100.0), t_max: 400.0 },
];

struct EvolutionRecord {
    label: String,
    energy_drift: f64,
    wronskian: f64,
}

static EVOLUTION_LOG: std::sync::Mutex<Vec<EvolutionRecord>> = std::sync::Mutex::new(Vec::new());

fn evolution_vs_ansatz() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for case in &EVOLUTION_CASES {
        let mut spec = QuenchSpec::new(case.d, 1.0, case.m).with_lambda(case.lambda);
        if let Some(c) = case.cutoff {
            spec = spec.with_cutoff(c);
        }
        let label = format!("({}, 1, {}, {})", case.d, case.m, case.lambda);
        let cmp = EvolutionConfig::auto(&spec, case.t_max).and_then(|cfg| compare_ansatz(&spec, &cfg, None));
        let cmp = match cmp {
            Ok(c) => c,
            Err(e) => {
                pass = false;
                parts.push(format!("{label}: error {e}"));
                continue;
            }
        };
        EVOLUTION_LOG.lock().unwrap().push(EvolutionRecord {
            label: label.clone(),
            energy_drift: cmp.energy_drift,
            wronskian: cmp.max_wronskian_deviation,
        });
        let tol = if case.d == Dim::Three { 0.05 } else { 0.03 };
        let ok_sigma = cmp.relative_gap < tol;
        let mut part = format!("{label}: dSigma {:.2e} {}", cmp.relative_gap, tick(ok_sigma));
        pass &= ok_sigma;
        if case.d == Dim::One {
            let p = cmp.fit.map_or(f64::NAN, |f| f.decay_exponent);
            let ok_p = (p - 0.5).abs() < 0.1;
            pass &= ok_p;
            part += &format!(", exponent {p:.3} {}", tick(ok_p));
        }
        if case.d == Dim::One && case.m < 1.0 {
            let tp = cmp.positive_from.unwrap_or(f64::INFINITY);
            let ok_t = tp < 10.0;
            pass &= ok_t;
            part += &format!(", positive from t = {tp:.3} {}", tick(ok_t));
        }
        parts.push(part);
    }
    Outcome::new(pass, parts.join("; "))
}

fn conservation() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let log = EVOLUTION_LOG.lock().unwrap();
    if log.len() != EVOLUTION_CASES.len() {
        pass = false;
        parts.push(format!("only {} of {} evolution runs completed", log.len(), EVOLUTION_CASES.len()));
    }
    let worst_w = log.iter().map(|r| r.wronskian).fold(0.0, f64::max);
    let worst_e = log.iter().map(|r| (r.energy_drift, r.label.as_str())).fold((0.0, ""), |a, b| if b.0 > a.0 { b } else { a });
    pass &= worst_w < 1e-8 && worst_e.0 < 1e-4;
    parts.push(format!("max Wronskian deviation {worst_w:.2e} (< 1e-8), max energy drift {:.2e} at {} (< 1e-4)", worst_e.0, worst_e.1));
    drop(log);

    let spec = QuenchSpec::new(Dim::One, 1.0, 2.0).with_lambda(10.0);
    let drift = |factor: f64| -> Result<f64, String> {
        let cfg = EvolutionConfig::auto(&spec, 100.0).map_err(|e| e.to_string())?;
        let dt = cfg.dt / 0.1 * factor;
        let cfg = cfg.with_dt(dt);
        let tr = self_consistent_evolve(&spec, &cfg).map_err(|e| e.to_string())?;
        Ok(conserved_energy(&tr).max_relative_drift)
    };
    match (drift(0.29), drift(0.145)) {
        (Ok(a), Ok(b)) => {
            let ratio = a / b;
            pass &= ratio >= 8.0;
            parts.push(format!("halving dt: drift {a:.2e} -> {b:.2e}, ratio {ratio:.1} (>= 8)"));
        }
        (Err(e), _) | (_, Err(e)) => {
            pass = false;
            parts.push(format!("halving run failed: {e}"));
        }
    }
    Outcome::new(pass, parts.join("; "))
}

fn quasi_adiabatic_limit() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let weak = [
        QuenchSpec::new(Dim::One, 1.0, 2.0),
        QuenchSpec::new(Dim::Two, 1.0, 2.0),
        QuenchSpec::new(Dim::Three, 1.0, 2.0).with_cutoff(100.0),
    ];
    for spec in weak {
        let spec = spec.with_lambda(1e-3);
        let qa = quasi_adiabatic_stationary(&spec).unwrap().sigma_star;
        let ex = solve_m_star(&spec).unwrap().sigma_star;
        let ratio = qa / ex;
        let ok = (0.99..=1.01).contains(&ratio);
        pass &= ok;
        parts.push(format!("d={} lambda=1e-3: ratio {ratio:.5} {}", spec.d, tick(ok)));
    }
    for m in [2.0, 5.0] {
        let spec = QuenchSpec::new(Dim::Two, 1.0, m).with_lambda(10.0);
        let qa = quasi_adiabatic_stationary(&spec).unwrap().sigma_star;
        let ex = solve_m_star(&spec).unwrap().sigma_star;
        let gap = rel(qa, ex);
        let ok = gap > 0.05;
        pass &= ok;
        parts.push(format!("(2, 1, {m}, 10): gap {:.1}% (> 5%) {}", 100.0 * gap, tick(ok)));
    }
    Outcome::new(pass, parts.join("; "))
}

fn vertex_correlator_check() -> Outcome {
    let mut worst = 0.0f64;
    let mut branches = true;
    for &q in &[0.3, 1.0, 2.5] {
        for &m0 in &[0.5, 1.0, 4.0] {
            let vp = VertexParams { q, m0 };
            for i in 0..16 {
                let t = 0.25 + 0.5 * i as f64;
                for &r in &[0.0, 0.5 * t, 1.5 * t, 2.0 * t, 2.5 * t, 6.0 * t] {
                    let v = vertex_correlator(r, t, vp);
                    let closed = if r > 2.0 * t { (-q * q * m0 * t / 4.0).exp() } else { (-q * q * m0 * r / 8.0).exp() };
                    branches &= v == closed;
                    worst = worst.max((v - vertex_from_propagator(r, t, vp).unwrap()).abs());
                }
            }
        }
    }
    Outcome::new(
        branches && worst < 1e-12,
        format!("closed-form branches exact: {branches}; max deviation from exp(-q^2 (C(0) - C(r))) {worst:.2e} (< 1e-12)"),
    )
}

fn tick(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAILED"
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 9] = [
        ("slab-quench identity", slab_identity),
        ("table integrals", table_integrals),
        ("average-temperature intercepts", beta_intercepts),
        ("horizon profile", horizon_profile),
        ("gap-equation asymptotics", gap_asymptotics),
        ("evolution vs ansatz", evolution_vs_ansatz),
        ("conservation and canonical structure", conservation),
        ("quasi-adiabatic limit", quasi_adiabatic_limit),
        ("vertex correlator", vertex_correlator_check),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = check();
        let status = if out.pass { "PASS" } else { "FAIL" };
        println!("criterion {} [{status}] {name} ({:.1}s): {}", i + 1, start.elapsed().as_secs_f64(), out.detail);
        if !out.pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} of {} criteria failed: {:?}", failed.len(), criteria.len(), failed);
        ExitCode::FAILURE
    }
}
