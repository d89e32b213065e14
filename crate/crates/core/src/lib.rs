//! Numerical engine for mass and coupling quenches of a scalar field: free
//! quench propagators, their imaginary-time counterparts, effective
//! temperatures, the self-consistent (Hartree-Fock) effective mass and its
//! exact time evolution.

pub mod domain;
pub mod eff_temp;
pub mod evolution;
pub mod error;
pub mod free_quench;
pub mod grid;
pub mod imaginary_time;
pub mod mass_gap;
pub mod quad;
pub mod roots;

pub use num_complex::Complex64;
pub use domain::{omega, Dim, Extent, PropagatorKind, PropagatorSample, QuenchSpec, SampleArgs};
pub use error::{QuenchError, Result};
pub use grid::{build_grid, radial_integrate, GridProfile, MomentumGrid, Spacing};
pub use eff_temp::BetaSolveResult;
pub use evolution::{AnsatzComparison, AsymptoteFit, CouplingMode, EffectiveMassTrace, EvolutionConfig, ModeState};
pub use free_quench::{ModePair, RealSpaceMode, VertexParams};
pub use imaginary_time::{Boundary, SlabGeometry, ThermalState};
pub use mass_gap::{GapBranch, GapSolveResult, InitialMassResult, MStarRegime};
