pub mod beta;
pub mod evolve;
pub mod mstar;
pub mod propagator;
pub mod verify;

use quench_core::{Dim, QuenchSpec};

use crate::args::PhysArgs;
use crate::config::Resolver;
use crate::error::{usage, CliError};
use crate::table::Table;

pub const UNITS: &str = "masses, momenta and cutoff in units of m0 unless --m0 is given; times and distances in inverse mass units; couplings in mass^(3-d)";

pub struct Ctx {
    pub resolver: Resolver,
    pub grid_nodes: Option<usize>,
    pub cutoff_flag: Option<f64>,
}

pub struct Output {
    pub table: Table,
    /// Set when a verification check failed; the table is still written.
    pub failure: Option<String>,
}

impl From<Table> for Output {
    fn from(table: Table) -> Self {
        Output { table, failure: None }
    }
}

/// Optional parameters of [`Ctx::spec`] with their defaults.
#[derive(Debug, Clone, Copy, Default)]
pub struct SpecDefaults {
    pub require_m0: bool,
    pub m: Option<f64>,
    /// `m` comes from a sweep; it is neither resolved nor validated here.
    pub sweep_m: bool,
    pub lambda: Option<f64>,
    pub lambda0: Option<f64>,
}

impl Ctx {
    pub fn dim(&mut self, flag: Option<u32>) -> Result<Dim, CliError> {
        let d = self.resolver.usize("d", flag.map(|d| d as usize), Some(1))?.unwrap_or(1);
        Dim::try_from(d as u32).map_err(|_| usage(format!("--d must be 1, 2 or 3, got {d}")))
    }

    pub fn cutoff(&mut self) -> Result<Option<f64>, CliError> {
        self.resolver.f64("cutoff", self.cutoff_flag, None)
    }

    pub fn spec(
        &mut self,
        phys: &PhysArgs,
        lambda: Option<f64>,
        lambda0: Option<f64>,
        defaults: SpecDefaults,
    ) -> Result<QuenchSpec, CliError> {
        let d = self.dim(phys.d)?;
        let m0 = if defaults.require_m0 {
            self.resolver.require_f64("m0", phys.m0, None)?
        } else {
            self.resolver.require_f64("m0", phys.m0, Some(1.0))?
        };
        let m = if defaults.sweep_m { m0 } else { self.resolver.require_f64("m", phys.m, defaults.m)? };
        let mut spec = QuenchSpec::new(d, m0, m);
        if let Some(l) = self.resolver.f64("lambda", lambda, defaults.lambda)? {
            spec = spec.with_lambda(l);
        }
        if let Some(l) = self.resolver.f64("lambda0", lambda0, defaults.lambda0)? {
            spec = spec.with_lambda0(l);
        }
        if let Some(c) = self.cutoff()? {
            spec = spec.with_cutoff(c);
        }
        spec.validate()?;
        Ok(spec)
    }
}
