#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

mod chain;
pub mod dpp;
pub mod error;
pub mod linalg;
pub mod fock;
pub mod kernels;
pub mod orthopoly;
pub mod schur;
mod special;

pub use error::{Error, Result};
pub use dpp::{Configuration, CorrelationEstimate, OpEnsemble};
pub use fock::{CertificateReport, FockSpace, PathLaw};
pub use kernels::{CorrelationKernel, Interval, KernelKind, SpaceTimeKernel, SpaceTimePoint};
pub use linalg::{Matrix, SpectralDecomposition, SpectralFunction, SymmetricOperator};
pub use orthopoly::{FamilySpec, Lattice, LimitRegime, PolynomialTable, SiteWindow};
pub use schur::{CylindricLaw, Partition, PartitionSpace, TransitionMatrix};
