//! Stabilized primal-dual finite elements for the data assimilation (unique
//! continuation) problem of stationary convection-diffusion.
//!
//! Given the source `f` on the unit square and (possibly noisy) values of the
//! solution on a subdomain `ω`, the method seeks a saddle point `(u_h, z_h)` of
//! a stabilized Lagrangian over piecewise linear elements. The crate covers the
//! whole pipeline:
//!
//! - [`mesh`]: structured triangulations with alternating diagonals
//! - [`assembly`]: the bilinear forms and load vectors as sparse matrices
//! - [`saddle`]: the coupled `2N x 2N` system, its direct solve and a
//!   Euclidean condition-number estimate
//! - [`weights`] and [`norms`]: weight functions and error functionals
//! - [`experiment`]: convergence sweeps, noise injection, rate fitting, CSV

pub mod assembly;
pub mod error;
pub mod experiment;
pub mod mesh;
pub mod norms;
pub mod problem;
pub mod quadrature;
pub mod saddle;
pub mod sparse;
pub mod weights;

pub use error::{Error, Result};
pub use mesh::{BoundaryEdge, FlowClass, InteriorFace, Mesh, Node, Triangle};
pub use problem::{ExactSolution, ProblemConfig, RegionSpec};
pub use saddle::{SaddleSystem, Solution};
pub use sparse::SparseMatrix;
