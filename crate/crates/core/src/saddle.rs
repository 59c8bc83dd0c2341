//! The coupled primal-dual system
//!
//! ```text
//! [ A   -S* ] [u]   [F]
//! [ S    Aᵀ ] [z] = [G]
//! ```
//!
//! where the first block row tests the PDE constraint and the second the
//! optimality condition for `u`. Solved with a sparse LU factorization.

use faer::prelude::*;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sparse::{SparseMatrix, TripletBuilder};

#[derive(Debug, Clone)]
pub struct SaddleSystem {
    /// Convection-diffusion operator block.
    pub a: SparseMatrix,
    /// Primal stabilizer, jump penalty plus data penalty.
    pub s: SparseMatrix,
    /// Dual stabilizer.
    pub s_star: SparseMatrix,
    /// Load vector.
    pub f: Vec<f64>,
    /// Data vector.
    pub g: Vec<f64>,
    n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub u_h: Vec<f64>,
    pub z_h: Vec<f64>,
    /// `‖M (u, z) - (F, G)‖₂` of the returned iterate.
    pub residual_norm: f64,
}

/// Extreme singular values of the system matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionEstimate {
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub max_iterations: usize,
    pub min_iterations: usize,
}

impl ConditionEstimate {
    pub fn condition(&self) -> f64 {
        self.sigma_max / self.sigma_min
    }
}

pub const DEFAULT_CONDITION_TOL: f64 = 1e-4;
const MAX_POWER_ITERATIONS: usize = 10_000;
const RESIDUAL_TOL: f64 = 1e-8;
const MAX_REFINEMENT_STEPS: usize = 3;

impl SaddleSystem {
    pub fn build(
        a: SparseMatrix,
        s: SparseMatrix,
        s_star: SparseMatrix,
        f: Vec<f64>,
        g: Vec<f64>,
    ) -> Result<Self> {
        let n = a.nrows();
        let square = |m: &SparseMatrix| m.nrows() == n && m.ncols() == n;
        if !(square(&a) && square(&s) && square(&s_star)) {
            return Err(Error::DimensionMismatch(format!(
                "blocks A {}x{}, S {}x{}, S* {}x{}",
                a.nrows(),
                a.ncols(),
                s.nrows(),
                s.ncols(),
                s_star.nrows(),
                s_star.ncols()
            )));
        }
        if f.len() != n || g.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "right-hand sides of length {} and {} for blocks of size {n}",
                f.len(),
                g.len()
            )));
        }
        Ok(Self { a, s, s_star, f, g, n })
    }

    /// Scalar dimension `N` of one block.
    pub fn block_size(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn rhs(&self) -> Vec<f64> {
        let mut b = self.f.clone();
        b.extend_from_slice(&self.g);
        b
    }

    /// The assembled `2N x 2N` matrix.
    pub fn matrix(&self) -> SparseMatrix {
        let n = self.n;
        let nnz = 2 * self.a.nnz() + self.s.nnz() + self.s_star.nnz();
        let mut b = TripletBuilder::with_capacity(2 * n, 2 * n, nnz);
        for (r, c, v) in self.a.triplets() {
            b.push(r, c, v);
            b.push(n + c, n + r, v);
        }
        for (r, c, v) in self.s_star.triplets() {
            b.push(r, n + c, -v);
        }
        for (r, c, v) in self.s.triplets() {
            b.push(n + r, c, v);
        }
        b.finalize(false)
    }

    /// `M x`, block by block.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let (u, z) = x.split_at(self.n);
        let au = self.a.mul_vec(u);
        let sz = self.s_star.mul_vec(z);
        let su = self.s.mul_vec(u);
        let atz = self.a.mul_transpose_vec(z);
        au.iter()
            .zip(&sz)
            .map(|(a, s)| a - s)
            .chain(su.iter().zip(&atz).map(|(s, a)| s + a))
            .collect()
    }

    /// `Mᵀ x`, block by block.
    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        let (p, q) = x.split_at(self.n);
        let atp = self.a.mul_transpose_vec(p);
        let stq = self.s.mul_transpose_vec(q);
        let sstp = self.s_star.mul_transpose_vec(p);
        let aq = self.a.mul_vec(q);
        atp.iter()
            .zip(&stq)
            .map(|(a, s)| a + s)
            .chain(sstp.iter().zip(&aq).map(|(s, a)| a - s))
            .collect()
    }

    pub fn factorize(&self) -> Result<Factorization> {
        let triplets: Vec<Triplet<usize, usize, f64>> = self
            .matrix()
            .triplets()
            .map(|(r, c, v)| Triplet::new(r, c, v))
            .collect();
        let dim = self.dim();
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(dim, dim, &triplets)
            .map_err(|e| Error::SingularSystem(format!("sparse matrix construction: {e:?}")))?;
        let lu = mat
            .sp_lu()
            .map_err(|e| Error::SingularSystem(format!("LU factorization: {e:?}")))?;
        Ok(Factorization { lu, dim })
    }
}

/// Sparse LU factors of a saddle system matrix.
pub struct Factorization {
    lu: Lu<usize, f64>,
    dim: usize,
}

impl Factorization {
    fn to_mat(&self, b: &[f64]) -> Mat<f64> {
        assert_eq!(b.len(), self.dim);
        Mat::from_fn(self.dim, 1, |i, _| b[i])
    }

    fn finish(x: Mat<f64>) -> Result<Vec<f64>> {
        let out: Vec<f64> = (0..x.nrows()).map(|i| x[(i, 0)]).collect();
        if out.iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(Error::SingularSystem("non-finite entries in the solution".into()))
        }
    }

    /// Solves `M x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        Self::finish(self.lu.solve(&self.to_mat(b)))
    }

    /// Solves `Mᵀ x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Result<Vec<f64>> {
        Self::finish(self.lu.solve_transpose(&self.to_mat(b)))
    }
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn residual(system: &SaddleSystem, x: &[f64], b: &[f64]) -> Vec<f64> {
    system.apply(x).iter().zip(b).map(|(mx, bi)| bi - mx).collect()
}

/// Direct solve followed by iterative refinement until
/// `‖M x - b‖ ≤ 1e-8 ‖b‖`.
pub fn solve(system: &SaddleSystem) -> Result<Solution> {
    let factors = system.factorize()?;
    solve_with(system, &factors)
}

pub fn solve_with(system: &SaddleSystem, factors: &Factorization) -> Result<Solution> {
    let b = system.rhs();
    let b_norm = norm2(&b);
    let mut x = factors.solve(&b)?;
    let mut r = residual(system, &x, &b);
    let mut r_norm = norm2(&r);
    for _ in 0..MAX_REFINEMENT_STEPS {
        let correction = factors.solve(&r)?;
        let candidate: Vec<f64> = x.iter().zip(&correction).map(|(a, d)| a + d).collect();
        let r_new = residual(system, &candidate, &b);
        let r_new_norm = norm2(&r_new);
        if r_new_norm < r_norm {
            x = candidate;
            r = r_new;
            r_norm = r_new_norm;
        }
        if r_norm <= RESIDUAL_TOL * b_norm {
            break;
        }
    }
    if r_norm > RESIDUAL_TOL * b_norm {
        return Err(Error::SingularSystem(format!(
            "residual {r_norm:e} exceeds {RESIDUAL_TOL:e} x {b_norm:e} after refinement"
        )));
    }
    let z_h = x.split_off(system.n);
    Ok(Solution {
        u_h: x,
        z_h,
        residual_norm: r_norm,
    })
}

fn start_vector(dim: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c0de);
    let mut x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = norm2(&x);
    x.iter_mut().for_each(|v| *v /= norm);
    x
}

/// Power iteration on a symmetric positive semidefinite operator until the
/// Rayleigh quotient settles; returns `(largest eigenvalue, iterations)`.
fn power_iteration(
    dim: usize,
    tol: f64,
    mut apply: impl FnMut(&[f64]) -> Result<Vec<f64>>,
) -> Result<(f64, usize)> {
    let mut x = start_vector(dim);
    let mut previous = f64::NAN;
    for it in 1..=MAX_POWER_ITERATIONS {
        let y = apply(&x)?;
        let rayleigh: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let norm = norm2(&y);
        if norm == 0.0 {
            return Ok((0.0, it));
        }
        x = y.into_iter().map(|v| v / norm).collect();
        if (rayleigh - previous).abs() <= tol * rayleigh.abs() {
            return Ok((rayleigh, it));
        }
        previous = rayleigh;
    }
    Err(Error::EstimationFailure {
        iterations: MAX_POWER_ITERATIONS,
        last_estimate: previous,
    })
}

/// Largest and smallest singular values: power iteration on `MᵀM` and inverse
/// power iteration through the LU factors.
pub fn estimate_singular_values(system: &SaddleSystem, tol: f64) -> Result<ConditionEstimate> {
    let dim = system.dim();
    let (lambda_max, max_iterations) =
        power_iteration(dim, tol, |x| Ok(system.apply_transpose(&system.apply(x))))?;
    let factors = system.factorize()?;
    let (lambda_inv, min_iterations) =
        power_iteration(dim, tol, |x| factors.solve(&factors.solve_transpose(x)?))
            .map_err(|e| match e {
                Error::EstimationFailure { iterations, last_estimate } => Error::EstimationFailure {
                    iterations,
                    last_estimate: (lambda_max * last_estimate).sqrt(),
                },
                other => other,
            })?;
    if lambda_inv <= 0.0 || !lambda_inv.is_finite() {
        return Err(Error::SingularSystem("inverse power iteration degenerated".into()));
    }
    Ok(ConditionEstimate {
        sigma_max: lambda_max.sqrt(),
        sigma_min: 1.0 / lambda_inv.sqrt(),
        max_iterations,
        min_iterations,
    })
}

/// Euclidean condition number `σ_max / σ_min`.
pub fn condition_number(system: &SaddleSystem, tol: f64) -> Result<f64> {
    estimate_singular_values(system, tol).map(|e| e.condition())
}
