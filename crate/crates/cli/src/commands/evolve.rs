use quench_core::evolution::{
    conserved_energy, fit_asymptote, omega_max, quasi_adiabatic_stationary_on_grid, self_consistent_evolve,
    DEFAULT_DT_FACTOR,
};
use quench_core::mass_gap::{initial_effective_mass_on_grid, solve_m_star, solve_m_star_on_grid};
use quench_core::{build_grid, CouplingMode, EvolutionConfig, GridProfile, QuenchSpec};

use super::{Ctx, Output, SpecDefaults, UNITS};
use crate::args::EvolveArgs;
use crate::error::{usage, CliError};
use crate::table::{Cell, Table};

const DEFAULT_T_MAX: f64 = 100.0;
const SAMPLE_SPACING: f64 = 0.02;

fn build_config(spec: &QuenchSpec, t_max: f64, nodes: Option<usize>) -> Result<EvolutionConfig, CliError> {
    let Some(nodes) = nodes else {
        return Ok(EvolutionConfig::auto(spec, t_max)?);
    };
    let cutoff = spec.effective_cutoff()?;
    let k_mid = (10.0 * spec.m0.max(spec.m)).min(cutoff);
    let grid = build_grid(spec.d, cutoff, &GridProfile::uniform_log(nodes, k_mid, 0.02))?;
    let m_sq_0 = initial_effective_mass_on_grid(spec, &grid)?.m_eff_sq_0;
    let dt = DEFAULT_DT_FACTOR / omega_max(spec, &grid, m_sq_0);
    Ok(EvolutionConfig::new(grid, dt, t_max))
}

pub fn run(args: &EvolveArgs, ctx: &mut Ctx) -> Result<Output, CliError> {
    let spec = ctx.spec(&args.phys, args.lambda, args.lambda0, SpecDefaults { lambda: Some(0.0), ..Default::default() })?;
    let t_max = ctx.resolver.require_f64("t_max", args.t_max, Some(DEFAULT_T_MAX))?;
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(usage(format!("--t-max must be finite and > 0, got {t_max}")));
    }
    let mut config = build_config(&spec, t_max, ctx.grid_nodes)?;
    if let Some(dt) = ctx.resolver.f64("dt", args.dt, None)? {
        config = config.with_dt(dt);
    }
    let coupling = ctx.resolver.string("coupling", args.coupling.map(|c| format!("{c:?}").to_lowercase()), Some("stage"))?;
    config.coupling = match coupling.as_deref() {
        Some("stage") => CouplingMode::StageCoupled,
        Some("lagged") => CouplingMode::Lagged,
        other => return Err(usage(format!("coupling must be `stage` or `lagged`, got {other:?}"))),
    };
    let auto_stride = ((SAMPLE_SPACING / config.dt).round() as usize).max(1);
    let stride = ctx.resolver.usize("stride", args.stride, Some(auto_stride))?.unwrap_or(auto_stride);
    config = config.with_record_stride(stride);

    let trace = self_consistent_evolve(&spec, &config)?;
    let window = args.window.map_or((0.5 * t_max, t_max), |w| (w.0, w.1));
    let fit = fit_asymptote(&trace, window);
    if let Err(e) = &fit {
        log::warn!("{e}");
    }
    let fit = fit.ok();

    let mut table = Table::new("evolve", UNITS, &["t", "m_eff_sq", "sigma", "energy", "c_reg", "m_inf_sq_fit"]);
    table.param("dt", config.dt);
    table.param("steps", config.steps());
    table.param("grid_nodes_used", config.grid.len());
    table.param("grid_cutoff", config.grid.cutoff());
    table.param("record_stride", stride);
    table.param("fit_window", format!("{}:{}", window.0, window.1));
    let fitted = fit.map(|f| f.m_inf * f.m_inf);
    for i in 0..trace.times.len() {
        table.push(vec![
            trace.times[i].into(),
            trace.m_eff_sq[i].into(),
            trace.sigma[i].into(),
            trace.energy[i].into(),
            trace.c_of_t[i].into(),
            fitted.into(),
        ]);
    }

    let m_sq = spec.m * spec.m;
    let on_grid = solve_m_star_on_grid(&spec, &config.grid)?;
    table.diag("m_eff_sq_0", trace.m_eff_sq_0());
    table.diag("m_star_grid", on_grid.m_star);
    table.diag("sigma_star_grid", on_grid.sigma_star);
    match solve_m_star(&spec) {
        Ok(r) => table.diag("m_star_continuum", r.m_star),
        Err(e) => table.diag("m_star_continuum", format!("unavailable: {e}")),
    }
    if let Some(f) = fit {
        let sigma_fit = f.m_inf * f.m_inf - m_sq;
        table.diag("m_inf", f.m_inf);
        table.diag("sigma_fit", sigma_fit);
        let gap = if on_grid.sigma_star != 0.0 {
            (sigma_fit - on_grid.sigma_star).abs() / on_grid.sigma_star.abs()
        } else {
            sigma_fit.abs()
        };
        table.diag("relative_gap", gap);
        table.diag("decay_exponent", f.decay_exponent);
        table.diag("frequency", f.frequency);
        table.diag("amplitude", f.amplitude);
        table.diag("fit_rms", f.rms_residual);
    } else {
        table.diag("m_inf", Cell::Missing);
    }
    let qa = quasi_adiabatic_stationary_on_grid(&spec, &config.grid).ok().map(|r| r.sigma_star);
    table.diag("sigma_quasi_adiabatic", qa);
    table.diag("energy_drift", conserved_energy(&trace).max_relative_drift);
    table.diag("max_wronskian_deviation", trace.max_wronskian_deviation);
    table.diag("positive_from", trace.positive_from());
    Ok(table.into())
}
