//! Finite element assembly and monotonicity certification for quasilinear
//! diffusion-reaction problems
//!
//!   -div(kappa(x, u) grad u) + g(x, u) = f   in a polygonal domain,
//!   u = 0                                    on the boundary,
//!
//! discretized with piecewise-linear (P1) triangle elements.
//!
//! The crate has five parts:
//!
//! * [`mesh`] — conforming triangulations, structured generators, file I/O,
//!   and the angle-based admissibility analysis the certification relies on;
//! * [`problem`] — coefficient families `kappa`, `g`, source fields `f`, and
//!   their declared bounds;
//! * [`fem`] — nodal fields and assembly of the linearized operator, load
//!   vectors, and residuals;
//! * [`solver`] — a Picard fixed-point solver with a semi-implicit treatment
//!   of the reaction term;
//! * [`certify`] — sign and dominance checks that establish, through an
//!   explicit diagonal scaling, that the assembled linearized matrix is
//!   monotone (inverse-nonnegative). Monotonicity yields a discrete
//!   comparison principle and uniqueness of the discrete solution.
//!
//! All computations are deterministic and single-threaded; reports serialize
//! to JSON with stable field order.

pub mod certify;
pub mod error;
pub mod fem;
pub mod geom;
pub mod mesh;
pub mod problem;
pub mod solver;

pub use certify::{
    check_l_condition, check_strict_dominance, check_z_condition, comparison_experiment,
    edge_couplings, epsilon_sequence, fiedler_ptak_certify, monotone_oracle, scaling_diagonal,
    Certificate, CertifyOptions, ComparisonReport, OracleMode, OracleReport, ScalingParams,
    Verdict,
};
pub use error::{Error, Result};
pub use fem::{
    assemble_linearized, assemble_load, assemble_residual, averaged_g_slope,
    averaged_kappa_slope, nodal_differences, AssembledSystem, DofMap, NodalDifferences,
    NodalField,
};
pub use geom::Point;
pub use mesh::{
    generate_structured, load_mesh, save_mesh, EdgePatch, Mesh, MeshAdmissibility,
    StructuredKind,
};
pub use problem::{validate_bounds, BoundsReport, DataBounds, Kappa, ProblemSpec, Reaction, Source};
pub use solver::{solve_picard, solve_picard_with_load, PicardSolution, PicardTrace, SolveOptions};
