use thiserror::Error;

use crate::coherent::CoherentError;
use crate::energy::EnergyError;
use crate::lob::LobError;
use crate::lp::LpError;
use crate::pattern::PatternError;
use crate::solve::SolveError;
use crate::surface::SurfaceError;

/// Any error produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Lob(#[from] LobError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Coherent(#[from] CoherentError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
