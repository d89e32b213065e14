use quench_core::free_quench::{
    deep_quench_closed_form, quench_mode_propagator, real_space_propagator, vertex_correlator,
    vertex_from_propagator, RealSpaceMode, VertexParams,
};
use quench_core::imaginary_time::{matched_slab_geometry, slab_mode_propagator, thermal_mode_propagator};
use quench_core::{build_grid, Complex64, Dim, Extent, GridProfile, ModePair, QuenchSpec, ThermalState};

use super::{Ctx, Output, SpecDefaults, UNITS};
use crate::args::PropagatorArgs;
use crate::error::{usage, CliError};
use crate::table::{Cell, Table};

const DEFAULT_REAL_SPACE_NODES: usize = 8192;

pub fn run(args: &PropagatorArgs, ctx: &mut Ctx) -> Result<Output, CliError> {
    let m_default = if args.deep || args.vertex { Some(0.0) } else { None };
    let spec = ctx.spec(&args.phys, None, None, SpecDefaults { require_m0: true, m: m_default, ..Default::default() })?;
    let table = if args.mode || args.slab || args.thermal {
        mode_table(args, &spec)?
    } else if args.vertex {
        vertex_table(args, &spec)?
    } else {
        real_space_table(args, ctx, &spec)?
    };
    Ok(table.into())
}

fn time_pairs(args: &PropagatorArgs) -> Vec<(f64, f64)> {
    match args.t_sweep {
        Some(s) => s.values().into_iter().map(|t| (t, t)).collect(),
        None => vec![(args.t1.unwrap_or(0.0), args.t2.unwrap_or(0.0))],
    }
}

fn mode_table(args: &PropagatorArgs, spec: &QuenchSpec) -> Result<Table, CliError> {
    let k = args.k.ok_or_else(|| usage("missing required parameter --k"))?;
    if !(k.is_finite() && k >= 0.0) {
        return Err(usage(format!("--k must be finite and >= 0, got {k}")));
    }
    let kind = if args.mode {
        "mode"
    } else if args.slab {
        "slab"
    } else {
        "thermal"
    };
    let mut table = Table::new(&format!("propagator --{kind}"), UNITS, &["t1", "t2", "k", "re", "im"]);
    let pairs = time_pairs(args);
    if pairs.iter().any(|&(a, b)| !(a.is_finite() && b.is_finite())) {
        return Err(usage("times must be finite"));
    }
    let eval: Box<dyn Fn(f64, f64) -> quench_core::Result<Complex64>> = if args.mode {
        let pair = ModePair::from_spec(k, spec)?;
        Box::new(move |t1, t2| Ok(quench_mode_propagator(t1, t2, pair)))
    } else if args.slab {
        let geom = matched_slab_geometry(k, spec)?;
        table.param("slab_thickness", extent_cell(geom.l));
        table.param("slab_boundary", format!("{:?}", geom.boundary).to_lowercase());
        let m = spec.m;
        Box::new(move |t1, t2| slab_mode_propagator(t1, t2, k, m, geom))
    } else {
        let beta = args.beta.ok_or_else(|| usage("--thermal needs --beta"))?;
        table.param("beta", beta);
        let th = ThermalState::new(beta)?;
        let m = spec.m;
        Box::new(move |t1, t2| thermal_mode_propagator(t1, t2, k, m, th))
    };
    let mut worst = 0.0f64;
    let pair = if args.slab { Some(ModePair::from_spec(k, spec)?) } else { None };
    for (t1, t2) in pairs {
        let v = eval(t1, t2)?;
        if let Some(p) = pair {
            worst = worst.max((v - quench_mode_propagator(t1, t2, p)).norm());
        }
        table.push(vec![t1.into(), t2.into(), k.into(), v.re.into(), v.im.into()]);
    }
    if args.slab {
        table.diag("max_abs_difference_from_quench", worst);
    }
    Ok(table)
}

fn extent_cell(e: Extent) -> Cell {
    match e {
        Extent::Finite(v) => Cell::Float(v),
        Extent::Infinite => Cell::Float(f64::INFINITY),
    }
}

fn radii(args: &PropagatorArgs) -> Result<Vec<f64>, CliError> {
    if !(args.r_max.is_finite() && args.r_max >= 0.0) || args.r_points == 0 {
        return Err(usage("--r-max must be finite and >= 0 and --r-points >= 1"));
    }
    if args.r_points == 1 {
        return Ok(vec![args.r_max]);
    }
    let n = (args.r_points - 1) as f64;
    Ok((0..args.r_points).map(|i| args.r_max * i as f64 / n).collect())
}

fn profile_time(args: &PropagatorArgs) -> Result<f64, CliError> {
    let t = args.t.ok_or_else(|| usage("missing required parameter --t"))?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(usage(format!("--t must be finite and >= 0, got {t}")));
    }
    Ok(t)
}

fn real_space_table(args: &PropagatorArgs, ctx: &mut Ctx, spec: &QuenchSpec) -> Result<Table, CliError> {
    let t = profile_time(args)?;
    let cutoff = spec.effective_cutoff()?;
    let nodes = ctx.grid_nodes.unwrap_or(DEFAULT_REAL_SPACE_NODES);
    let grid = build_grid(spec.d, cutoff, &GridProfile::uniform(nodes))?;
    let (name, mode) = if args.deep {
        ("propagator --deep", RealSpaceMode::DeepQuench)
    } else {
        ("propagator --real-space", RealSpaceMode::Full)
    };
    let closed = args.deep && spec.m == 0.0;
    let columns: &[&str] = if closed { &["r", "t", "value", "closed_form"] } else { &["r", "t", "value"] };
    let mut table = Table::new(name, UNITS, columns);
    table.param("grid", format!("uniform, {} nodes, cutoff {cutoff}", grid.len()));
    for r in radii(args)? {
        let v = real_space_propagator(r, t, t, spec, &grid, mode)?;
        let mut row = vec![r.into(), t.into(), v.into()];
        if closed {
            // d > 1 forms diverge at r = 0
            let c = match (spec.d, r) {
                (Dim::One, _) => Cell::Float(deep_quench_closed_form(r, t, spec.d, spec.m0)?),
                (_, r) if r > 0.0 => Cell::Float(deep_quench_closed_form(r, t, spec.d, spec.m0)?),
                _ => Cell::Missing,
            };
            row.push(c);
        }
        table.push(row);
    }
    Ok(table)
}

fn vertex_table(args: &PropagatorArgs, spec: &QuenchSpec) -> Result<Table, CliError> {
    if spec.d != Dim::One || spec.m != 0.0 {
        return Err(usage("--vertex needs --d 1 and a massless post-quench theory"));
    }
    let t = profile_time(args)?;
    let vp = VertexParams { q: args.q, m0: spec.m0 };
    let mut table = Table::new("propagator --vertex", UNITS, &["r", "t", "value", "from_propagator"]);
    table.param("q", args.q);
    for r in radii(args)? {
        table.push(vec![r.into(), t.into(), vertex_correlator(r, t, vp).into(), vertex_from_propagator(r, t, vp)?.into()]);
    }
    Ok(table)
}
