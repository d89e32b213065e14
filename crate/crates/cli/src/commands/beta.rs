use quench_core::eff_temp::{beta_expansion, solve_average_beta};
use quench_core::{Extent, QuenchSpec};
use rayon::prelude::*;

use super::{Ctx, Output, SpecDefaults, UNITS};
use crate::args::BetaArgs;
use crate::error::CliError;
use crate::table::{Cell, Table};

pub fn run(args: &BetaArgs, ctx: &mut Ctx) -> Result<Output, CliError> {
    let base = ctx.spec(&args.phys, None, None, SpecDefaults { sweep_m: args.sweep.is_some(), ..Default::default() })?;
    let xs = match args.sweep {
        Some(s) => s.values(),
        None => vec![base.m / base.m0],
    };
    let mut table =
        Table::new("beta", UNITS, &["x", "beta_m0", "residual", "iterations", "expansion_beta_m0"]);
    if let Some(s) = args.sweep {
        table.param("sweep", s.to_string());
    }
    let rows: Vec<Result<Vec<Cell>, CliError>> = xs
        .par_iter()
        .map(|&x| {
            let spec = QuenchSpec { m: x * base.m0, ..base };
            let r = solve_average_beta(&spec)?;
            let y = match r.y {
                Extent::Finite(y) => y,
                Extent::Infinite => f64::INFINITY,
            };
            // expansions are only defined for m/m0 < 0.2
            let expansion = beta_expansion(&spec).ok().map(|b| b * spec.m0);
            Ok(vec![x.into(), y.into(), r.residual.into(), r.iterations.into(), expansion.into()])
        })
        .collect();
    for row in rows {
        table.push(row?);
    }
    Ok(table.into())
}
