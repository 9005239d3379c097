//! Numerical kernels: Gauss-Chebyshev quadrature, a dense symmetric
//! eigensolver, and a complex LU log-determinant.
//!
//! The eigensolver is the classic two-stage reduction (Householder
//! tridiagonalization, then implicit-shift QL with accumulated rotations); it
//! reports non-convergence with the offending eigenvalue index instead of
//! silently returning garbage.

mod lu;
mod quad;
mod sym;

pub use lu::{complex_logdet, ComplexSquareMatrix, LogDet};
pub use quad::gauss_chebyshev2_nodes;
pub use sym::{sym_eigen, sym_eigenvalues, SymEigen, SymMatrixReal};
