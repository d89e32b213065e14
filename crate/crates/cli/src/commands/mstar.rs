use quench_core::mass_gap::{solve_m_star, solve_m_star_renormalized_3d};
use quench_core::{Dim, GapBranch, QuenchSpec};
use rayon::prelude::*;

use super::{Ctx, Output, SpecDefaults, UNITS};
use crate::args::MstarArgs;
use crate::error::{usage, CliError};
use crate::table::{Cell, Table};

fn branch_name(b: GapBranch) -> &'static str {
    match b {
        GapBranch::Generic => "generic",
        GapBranch::Massless1dLimit => "massless_1d",
        GapBranch::NoQuench => "no_quench",
    }
}

pub fn run(args: &MstarArgs, ctx: &mut Ctx) -> Result<Output, CliError> {
    let lambda_default = if args.lambda_sweep.is_some() { None } else { Some(0.0) };
    let base = ctx.spec(&args.phys, args.lambda, None, SpecDefaults { lambda: lambda_default, ..Default::default() })?;
    if args.renormalized && base.d != Dim::Three {
        return Err(usage("--renormalized applies to three dimensions only"));
    }
    let lambdas = match args.lambda_sweep {
        Some(s) => {
            if s.start < 0.0 {
                return Err(usage("coupling sweeps must be non-negative"));
            }
            s.values()
        }
        None => vec![base.lambda],
    };
    let mut table = Table::new("mstar", UNITS, &["lambda", "m_star", "sigma_star", "residual", "branch", "iterations"]);
    if let Some(s) = args.lambda_sweep {
        table.param("lambda_sweep", s.to_string());
    }
    table.param("equation", if args.renormalized { "renormalized" } else { "bare" });
    let rows: Vec<Result<Vec<Cell>, CliError>> = lambdas
        .par_iter()
        .map(|&lambda| {
            let spec = QuenchSpec { lambda, ..base };
            let r = if args.renormalized { solve_m_star_renormalized_3d(&spec)? } else { solve_m_star(&spec)? };
            Ok(vec![
                lambda.into(),
                r.m_star.into(),
                r.sigma_star.into(),
                r.residual.into(),
                branch_name(r.branch).into(),
                r.iterations.into(),
            ])
        })
        .collect();
    for row in rows {
        table.push(row?);
    }
    Ok(table.into())
}
