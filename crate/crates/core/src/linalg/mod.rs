//! Small dense and banded linear algebra kernels.

mod banded;
mod chebyshev;
mod mirror;
mod tridiag;

pub use banded::BandedUnitary;
pub use chebyshev::{chebyshev_propagate, ChebyshevPlan};
pub use mirror::{MirrorSector, MirrorSplit};
pub use tridiag::{
    eigenvalue_count_below, inverse_iteration, kth_eigenvalue, lowest_eigenpairs, symmetric_eigen, SymmetricEigen,
};
