//! Euclidean hyperideal circle patterns via a concave variational principle.
//!
//! A problem instance is a glued triangulation with intersection angles on
//! the edges and cone/boundary angles on the vertices. The pipeline is
//!
//! 1. [`coherent`]: build the linear constraints on per-triangle angles and
//!    find a strictly feasible point with a max-slack linear program,
//! 2. [`solve`]: maximize the sum of truncated tetrahedron volumes over that
//!    polytope with a reduced Newton method,
//! 3. [`pattern`]: turn the critical point into radii and edge lengths and
//!    verify the result,
//! 4. [`layout`]: place the decorated triangles in the plane and export.
//!
//! The special-function and volume layers ([`lob`], [`energy`]) are generic
//! over the scalar type; the optimization layers work in `f64`.

pub mod bundled;
pub mod coherent;
pub mod energy;
pub mod geom;
pub mod io;
pub mod layout;
pub mod linalg;
pub mod lob;
pub mod lp;
pub mod pattern;
pub mod scalar;
pub mod solution;
pub mod solve;
pub mod surface;

mod error;

pub use error::Error;
pub use scalar::Real;

pub use coherent::{AngleSystem, ConstraintSystem, Feasibility};
pub use layout::ChartLayout;
pub use pattern::{DecoratedMetric, TruncatedLengths};
pub use solve::{SolveOptions, SolveReport, SolveStatus};
pub use surface::{AngleData, GluedTriangulation};

/// Per-tetrahedron angles in double precision.
pub type TetAngles = energy::TetAngles<f64>;
/// Ideal tetrahedron angle triple in double precision.
pub type IdealTriple = energy::IdealTriple<f64>;
/// Five-ideal-tetrahedra decomposition in double precision.
pub type FiveTetra = energy::FiveTetra<f64>;
/// Single-precision variants, mostly useful for quick plots and tests.
pub type TetAnglesF32 = energy::TetAngles<f32>;
pub type IdealTripleF32 = energy::IdealTriple<f32>;

pub type Result<T, E = Error> = std::result::Result<T, E>;
