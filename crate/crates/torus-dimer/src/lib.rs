//! Dimer model on a 2d torus with a fugacity on vertical dimers.
//!
//! Everything numerical is generic over the floating-point [`Scalar`], with
//! `f64` aliases exported at the crate root for everyday use.

pub mod config;
pub mod error;
pub mod events;
pub mod kasteleyn;
pub mod lattice;
pub mod linalg;
pub mod mcmc;
pub mod refstate;
pub mod scalar;
pub mod suzuki;
pub mod transfer;

pub use config::{DimerConfig, Enumerate, Spin};
pub use error::{Error, Limits, Result};
pub use events::{ChessboardReport, DiamondForcingReport, PatternEvent};
pub use kasteleyn::PfaffianReport;
pub use lattice::{ReflectionAxis, ReflectionMap, Site, TorusLattice};
pub use mcmc::{PlaquetteSampler, RunSummary};
pub use refstate::ReferenceStateFamily;
pub use scalar::{ln_sum_exp, Scalar};
pub use suzuki::{GroundSpace, SpinChainOperator, StaggeredPhase};
pub use transfer::{DiagonalPowerTable, EfpRecord, RowConstraint, TransferOperator};

/// Double-precision aliases for the generic building blocks.
pub type TransferOperator64 = TransferOperator<f64>;
pub type DiagonalPowerTable64 = DiagonalPowerTable<f64>;
pub type EfpRecord64 = EfpRecord<f64>;
pub type Matrix64 = linalg::Matrix<f64>;
pub type PfaffianReport64 = PfaffianReport<f64>;
pub type ChessboardReport64 = ChessboardReport<f64>;
pub type RunSummary64 = RunSummary<f64>;
pub type SpinChainOperator64 = SpinChainOperator<f64>;
pub type GroundSpace64 = GroundSpace<f64>;
