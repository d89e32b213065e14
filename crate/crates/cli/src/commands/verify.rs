//! Verification suites: `fast` runs every module invariant at reduced size,
//! `figures` reproduces the full set of reference numbers.

use std::f64::consts::{LN_2, PI};

use quench_core::eff_temp::{f_d, f_d_closed, g_d, g_d_closed, solve_average_beta};
use quench_core::evolution::{
    compare_ansatz, conserved_energy, quasi_adiabatic_stationary, self_consistent_evolve,
};
use quench_core::free_quench::{
    deep_quench_closed_form, real_space_propagator, vertex_correlator, vertex_from_propagator, RealSpaceMode,
    VertexParams,
};
use quench_core::imaginary_time::verify_quench_slab_identity;
use quench_core::mass_gap::{solve_m_star, MSTAR_2D_STRONG};
use quench_core::{build_grid, radial_integrate, Dim, EvolutionConfig, GridProfile, QuenchSpec};

use super::{Ctx, Output, UNITS};
use crate::args::{Suite, VerifyArgs};
use crate::error::CliError;
use crate::table::Table;

struct Check {
    name: String,
    value: f64,
    relation: &'static str,
    limit: f64,
    pass: bool,
}

impl Check {
    fn below(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check { name: name.into(), value, relation: "<", limit, pass: value < limit }
    }

    fn above(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check { name: name.into(), value, relation: ">", limit, pass: value > limit }
    }

    fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check { name: name.into(), value, relation: ">=", limit, pass: value >= limit }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn slab_identity(cases: usize, pairs: usize) -> Result<Check, CliError> {
    let mut worst = 0.0f64;
    for i in 0..cases {
        let f = (i as f64 + 0.5) / cases as f64;
        let m0 = 0.2 + 9.0 * f;
        let m = 9.5 * (1.0 - f) + 0.1 * (i % 3) as f64;
        let k = 4.0 * ((7 * i) % cases) as f64 / cases as f64;
        let spec = QuenchSpec::new(Dim::One, m0, m);
        let samples: Vec<(f64, f64)> =
            (0..pairs).map(|j| (0.37 * j as f64 % 20.0, 0.91 * (pairs - j) as f64 % 20.0)).collect();
        worst = worst.max(verify_quench_slab_identity(k, &spec, &samples)?);
    }
    Ok(Check::below("slab_quench_identity", worst, 1e-12))
}

fn table_integrals(points: &[f64]) -> Result<Check, CliError> {
    let mut worst = 0.0f64;
    for d in [Dim::One, Dim::Two, Dim::Three] {
        for &s in points {
            worst = worst.max(rel(f_d(s, d)?, f_d_closed(s, d)?));
        }
    }
    for &s in points {
        worst = worst.max(rel(g_d(s, Dim::Two)?, g_d_closed(s, Dim::Two)?));
    }
    Ok(Check::below("table_integrals_relative", worst, 1e-6))
}

fn grid_quadrature() -> Result<Check, CliError> {
    let g = build_grid(Dim::One, 100.0, &GridProfile::log_uniform(2048, 1.0, 0.5))?;
    let v = radial_integrate(&g, |k| (-k).exp())?;
    let exact = (1.0 - (-100f64).exp()) / PI;
    Ok(Check::below("grid_exponential_relative", rel(v, exact), 1e-8))
}

fn horizon(points: usize) -> Result<Check, CliError> {
    let spec = QuenchSpec::new(Dim::One, 1.0, 0.0).with_cutoff(2000.0);
    let grid = build_grid(Dim::One, 2000.0, &GridProfile::uniform(40_000))?;
    let mut worst = 0.0f64;
    for i in 0..points {
        let t = 0.5 + 2.5 * i as f64 / points as f64;
        let r = if i % 2 == 0 { 1.9 * t * (i as f64 + 1.0) / points as f64 } else { 2.0 * t + 0.1 + i as f64 * 0.3 };
        let v = real_space_propagator(r, t, t, &spec, &grid, RealSpaceMode::DeepQuench)?;
        worst = worst.max((v - deep_quench_closed_form(r, t, Dim::One, 1.0)?).abs());
    }
    Ok(Check::below("deep_quench_profile_abs", worst, 1e-3))
}

fn vertex() -> Result<Check, CliError> {
    let mut worst = 0.0f64;
    for &(q, m0) in &[(0.3, 0.5), (1.0, 1.0), (2.5, 4.0)] {
        let vp = VertexParams { q, m0 };
        for i in 0..16 {
            let t = 0.25 + 0.5 * i as f64;
            for f in [0.0, 0.5, 1.5, 2.0, 2.5, 6.0] {
                worst = worst.max((vertex_correlator(f * t, t, vp) - vertex_from_propagator(f * t, t, vp)?).abs());
            }
        }
    }
    Ok(Check::below("vertex_consistency_abs", worst, 1e-12))
}

fn beta_m0(d: Dim, x: f64) -> Result<f64, CliError> {
    Ok(solve_average_beta(&QuenchSpec::new(d, 1.0, x))?.y.finite().unwrap_or(f64::INFINITY))
}

fn beta_checks(full: bool) -> Result<Vec<Check>, CliError> {
    let mut out = vec![Check::below(
        "beta_intercept_3d_abs",
        (beta_m0(Dim::Three, 1e-3)? - 2.0 * PI / 3f64.sqrt()).abs(),
        0.01,
    )];
    if full {
        let mut worst = 0.0f64;
        for i in 1..=20 {
            let x = 1e-3 * i as f64;
            worst = worst.max(rel(beta_m0(Dim::One, x)?, 4.0 + 32.0 * LN_2 / PI * x));
        }
        out.push(Check::below("beta_linear_1d_relative", worst, 0.01));
        out.push(Check::below("beta_intercept_2d_relative", rel(beta_m0(Dim::Two, 1e-3)?, 4.0), 0.1));
    }
    Ok(out)
}

fn gap_checks(full: bool) -> Result<Vec<Check>, CliError> {
    let m2 = solve_m_star(&QuenchSpec::new(Dim::Two, 1.0, 0.0).with_lambda(1e6))?.m_star;
    let mut out = vec![Check::below("mstar_2d_strong_abs", (m2 - MSTAR_2D_STRONG).abs(), 1e-3)];
    if full {
        let target = 1e-3f64.sqrt() / (4.0 * PI * 2f64.sqrt());
        for cutoff in [1e4, 1e7] {
            let spec = QuenchSpec::new(Dim::Three, 1.0, 0.0).with_lambda(1e-3).with_cutoff(cutoff);
            out.push(Check::below(format!("mstar_3d_weak_relative_cutoff_{cutoff:e}"), rel(solve_m_star(&spec)?.m_star, target), 0.02));
        }
        let m1 = solve_m_star(&QuenchSpec::new(Dim::One, 1.0, 2.0).with_lambda(1e4))?.m_star;
        out.push(Check::below("mstar_1d_strong_relative", rel(m1, 2.0), 0.05));
    }
    Ok(out)
}

fn qa_checks(full: bool) -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    let weak: &[QuenchSpec] = if full {
        &[
            QuenchSpec::new(Dim::One, 1.0, 2.0),
            QuenchSpec::new(Dim::Two, 1.0, 2.0),
            QuenchSpec { cutoff: Some(100.0), ..QuenchSpec::new(Dim::Three, 1.0, 2.0) },
        ]
    } else {
        &[QuenchSpec::new(Dim::Two, 1.0, 2.0)]
    };
    for spec in weak {
        let spec = spec.with_lambda(1e-3);
        let ratio = quasi_adiabatic_stationary(&spec)?.sigma_star / solve_m_star(&spec)?.sigma_star;
        out.push(Check::below(format!("quasi_adiabatic_weak_{}d_ratio_deviation", spec.d), (ratio - 1.0).abs(), 0.01));
    }
    if full {
        for m in [2.0, 5.0] {
            let spec = QuenchSpec::new(Dim::Two, 1.0, m).with_lambda(10.0);
            let gap = rel(quasi_adiabatic_stationary(&spec)?.sigma_star, solve_m_star(&spec)?.sigma_star);
            out.push(Check::above(format!("quasi_adiabatic_strong_m{m}_gap"), gap, 0.05));
        }
    }
    Ok(out)
}

struct Case {
    d: Dim,
    m: f64,
    lambda: f64,
    cutoff: Option<f64>,
    t_max: f64,
}

fn evolution_checks(cases: &[Case], asymptotics: bool) -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    for c in cases {
        let mut spec = QuenchSpec::new(c.d, 1.0, c.m).with_lambda(c.lambda);
        if let Some(cut) = c.cutoff {
            spec = spec.with_cutoff(cut);
        }
        let tag = format!("{}d_m{}_lambda{}", c.d, c.m, c.lambda);
        let cfg = EvolutionConfig::auto(&spec, c.t_max)?;
        let r = compare_ansatz(&spec, &cfg, None)?;
        let tol = if c.d == Dim::Three { 0.05 } else { 0.03 };
        out.push(Check::below(format!("evolution_{tag}_sigma_gap"), r.relative_gap, tol));
        out.push(Check::below(format!("evolution_{tag}_wronskian"), r.max_wronskian_deviation, 1e-8));
        out.push(Check::below(format!("evolution_{tag}_energy_drift"), r.energy_drift, 1e-4));
        if asymptotics && c.d == Dim::One {
            let p = r.fit.map_or(f64::NAN, |f| f.decay_exponent);
            out.push(Check::below(format!("evolution_{tag}_decay_exponent_offset"), (p - 0.5).abs(), 0.1));
            if c.m < 1.0 {
                out.push(Check::below(format!("evolution_{tag}_positive_from"), r.positive_from.unwrap_or(f64::INFINITY), 10.0));
            }
        }
    }
    Ok(out)
}

fn halving_check() -> Result<Check, CliError> {
    let spec = QuenchSpec::new(Dim::One, 1.0, 2.0).with_lambda(10.0);
    let base = EvolutionConfig::auto(&spec, 100.0)?;
    let unit = base.dt / quench_core::evolution::DEFAULT_DT_FACTOR;
    let drift = |factor: f64| -> Result<f64, CliError> {
        let tr = self_consistent_evolve(&spec, &base.clone().with_dt(unit * factor))?;
        Ok(conserved_energy(&tr).max_relative_drift)
    };
    Ok(Check::at_least("energy_drift_halving_ratio", drift(0.29)? / drift(0.145)?, 8.0))
}

fn fast_suite() -> Result<Vec<Check>, CliError> {
    let mut out = vec![
        slab_identity(8, 16)?,
        table_integrals(&[0.1, 0.5, 2.0, 8.0])?,
        grid_quadrature()?,
        horizon(8)?,
        vertex()?,
    ];
    out.extend(beta_checks(false)?);
    out.extend(gap_checks(false)?);
    out.extend(qa_checks(false)?);
    out.extend(evolution_checks(&[Case { d: Dim::One, m: 2.0, lambda: 10.0, cutoff: None, t_max: 40.0 }], false)?);
    Ok(out)
}

fn figures_suite() -> Result<Vec<Check>, CliError> {
    let points: Vec<f64> = (0..16).map(|i| 10f64.powf(-2.0 + 4.0 * (i as f64 + 0.5) / 16.0)).collect();
    let mut out = vec![slab_identity(32, 64)?, table_integrals(&points)?, horizon(64)?, vertex()?];
    out.extend(beta_checks(true)?);
    out.extend(gap_checks(true)?);
    let case = |d, m, lambda, cutoff, t_max| Case { d, m, lambda, cutoff, t_max };
    out.extend(evolution_checks(&[
        case(Dim::One, 2.0, 10.0, None, 100.0),
        case(Dim::One, 0.5, 10.0, None, 100.0),
        case(Dim::Two, 2.0, 1.0, None, 100.0),
        case(Dim::Two, 2.0, 5.0, None, 100.0),
        case(Dim::Two, 2.0, 10.0, None, 100.0),
        case(Dim::Two, 2.0, 20.0, None, 100.0),
        case(Dim::Two, 5.0, 10.0, None, 60.0),
        case(Dim::Three, 0.0, 1.0, Some(100.0), 400.0),
    ], true)?);
    out.push(halving_check()?);
    out.extend(qa_checks(true)?);
    Ok(out)
}

pub fn run(args: &VerifyArgs, _ctx: &mut Ctx) -> Result<Output, CliError> {
    let (name, checks) = match args.suite {
        Suite::Fast => ("fast", fast_suite()?),
        Suite::Figures => ("figures", figures_suite()?),
    };
    let mut table = Table::new("verify", UNITS, &["check", "value", "relation", "limit", "pass"]);
    table.param("suite", name);
    for c in &checks {
        table.push(vec![c.name.clone().into(), c.value.into(), c.relation.into(), c.limit.into(), c.pass.into()]);
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    table.diag("checks", checks.len());
    table.diag("failed", failed.len());
    let failure = (!failed.is_empty()).then(|| format!("{} of {} checks failed: {}", failed.len(), checks.len(), failed.join(", ")));
    Ok(Output { table, failure })
}
