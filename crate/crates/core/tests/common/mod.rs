//! Independent reference computations for the integration tests.
//!
//! Nothing here reuses the crate's quadrature, basis gradients or face
//! bookkeeping: integrals use Duffy-collapsed Gauss-Legendre rules of
//! arbitrary order, basis functions come from inverting the 3x3 vertex
//! matrix, and edge adjacency is recovered by brute force.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use ucfem::{Mesh, ProblemConfig};

pub type Point = [f64; 2];

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(order);
    for i in 0..order {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let p = if order == 0 { 1.0 } else { p1 };
            dp = order as f64 * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out
}

/// Quadrature points `(point, weight)` on a triangle via the Duffy map of the
/// unit square; exact for polynomials of degree `2 order - 2`.
pub fn triangle_rule(v: [Point; 3], order: usize) -> Vec<(Point, f64)> {
    let gl = gauss_legendre(order);
    let jac = ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1])).abs();
    let mut pts = Vec::with_capacity(order * order);
    for &(s, ws) in &gl {
        for &(t, wt) in &gl {
            let (a, b) = (s, t * (1.0 - s));
            let p = [
                v[0][0] + a * (v[1][0] - v[0][0]) + b * (v[2][0] - v[0][0]),
                v[0][1] + a * (v[1][1] - v[0][1]) + b * (v[2][1] - v[0][1]),
            ];
            pts.push((p, ws * wt * (1.0 - s) * jac));
        }
    }
    pts
}

/// Affine basis of a triangle: `coeffs[k] = (c0, cx, cy)` with
/// `φ_k(x, y) = c0 + cx x + cy y`.
pub fn p1_basis(v: [Point; 3]) -> [[f64; 3]; 3] {
    let m = Matrix3::new(1.0, v[0][0], v[0][1], 1.0, v[1][0], v[1][1], 1.0, v[2][0], v[2][1]);
    let inv = m.try_inverse().expect("degenerate triangle");
    let mut out = [[0.0; 3]; 3];
    for (k, row) in out.iter_mut().enumerate() {
        let mut e = Vector3::zeros();
        e[k] = 1.0;
        let c = inv * e;
        *row = [c[0], c[1], c[2]];
    }
    out
}

pub fn eval_basis(c: [f64; 3], p: Point) -> f64 {
    c[0] + c[1] * p[0] + c[2] * p[1]
}

pub fn vertices(mesh: &Mesh, t: usize) -> [Point; 3] {
    mesh.triangles[t].vertices.map(|k| [mesh.nodes[k].x, mesh.nodes[k].y])
}

/// Edges with their adjacent triangles, found by scanning all triangles.
pub struct EdgeInfo {
    pub ends: [usize; 2],
    pub tris: Vec<usize>,
}

pub fn edges(mesh: &Mesh) -> Vec<EdgeInfo> {
    let mut list: Vec<EdgeInfo> = Vec::new();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (tri.vertices[k], tri.vertices[(k + 1) % 3]);
            let key = [a.min(b), a.max(b)];
            match list.iter_mut().find(|e| e.ends == key) {
                Some(e) => e.tris.push(t),
                None => list.push(EdgeInfo { ends: key, tris: vec![t] }),
            }
        }
    }
    list
}

fn point(mesh: &Mesh, k: usize) -> Point {
    [mesh.nodes[k].x, mesh.nodes[k].y]
}

/// Unit normal of edge `ends` pointing away from the third vertex of `t`.
pub fn outward_normal(mesh: &Mesh, ends: [usize; 2], t: usize) -> Point {
    let (a, b) = (point(mesh, ends[0]), point(mesh, ends[1]));
    let third = mesh.triangles[t].vertices.iter().copied().find(|k| !ends.contains(k)).unwrap();
    let c = point(mesh, third);
    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    let mut n = [(b[1] - a[1]) / len, -(b[0] - a[0]) / len];
    if n[0] * (c[0] - a[0]) + n[1] * (c[1] - a[1]) > 0.0 {
        n = [-n[0], -n[1]];
    }
    n
}

pub fn edge_length(mesh: &Mesh, ends: [usize; 2]) -> f64 {
    let (a, b) = (point(mesh, ends[0]), point(mesh, ends[1]));
    ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
}

/// Gauss points `(point, s, weight)` on an edge, `s` the parameter from
/// `ends[0]` to `ends[1]`.
pub fn edge_rule(mesh: &Mesh, ends: [usize; 2], order: usize) -> Vec<(Point, f64, f64)> {
    let (a, b) = (point(mesh, ends[0]), point(mesh, ends[1]));
    let len = edge_length(mesh, ends);
    gauss_legendre(order)
        .into_iter()
        .map(|(s, w)| ([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])], s, w * len))
        .collect()
}

/// Dense matrices of every bilinear form, built by quadrature.
pub struct DenseForms {
    pub a: DMatrix<f64>,
    pub s_omega: DMatrix<f64>,
    pub s_star: DMatrix<f64>,
    pub s_data: DMatrix<f64>,
    pub mass: DMatrix<f64>,
}

pub fn dense_forms(mesh: &Mesh, config: &ProblemConfig, order: usize) -> DenseForms {
    let n = mesh.nodes.len();
    let beta = config.beta;
    let bnorm = (beta[0] * beta[0] + beta[1] * beta[1]).sqrt();
    let h = 1.0 / mesh.n as f64;
    let data_coef = bnorm / h + config.mu * h.powf(-config.zeta);

    let mut a = DMatrix::zeros(n, n);
    let mut stiff = DMatrix::zeros(n, n);
    let mut mass = DMatrix::zeros(n, n);
    let mut s_data = DMatrix::zeros(n, n);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let v = vertices(mesh, t);
        let basis = p1_basis(v);
        let bc = [(v[0][0] + v[1][0] + v[2][0]) / 3.0, (v[0][1] + v[1][1] + v[2][1]) / 3.0];
        let in_data = config.omega.contains(bc);
        for (p, w) in triangle_rule(v, order) {
            for (i, &gi) in tri.vertices.iter().enumerate() {
                let phi_i = eval_basis(basis[i], p);
                let grad_i = [basis[i][1], basis[i][2]];
                for (j, &gj) in tri.vertices.iter().enumerate() {
                    let phi_j = eval_basis(basis[j], p);
                    let grad_j = [basis[j][1], basis[j][2]];
                    let gg = grad_i[0] * grad_j[0] + grad_i[1] * grad_j[1];
                    let conv = (beta[0] * grad_j[0] + beta[1] * grad_j[1]) * phi_i;
                    a[(gi, gj)] += w * (conv + config.mu * gg);
                    stiff[(gi, gj)] += w * gg;
                    mass[(gi, gj)] += w * phi_i * phi_j;
                    if in_data {
                        s_data[(gi, gj)] += w * data_coef * phi_i * phi_j;
                    }
                }
            }
        }
    }

    let mut jump = DMatrix::zeros(n, n);
    let mut boundary_mass = DMatrix::zeros(n, n);
    for e in edges(mesh) {
        let len = edge_length(mesh, e.ends);
        match e.tris.as_slice() {
            [t] => {
                let t = *t;
                let normal = outward_normal(mesh, e.ends, t);
                let basis = p1_basis(vertices(mesh, t));
                let verts = mesh.triangles[t].vertices;
                for (p, _, w) in edge_rule(mesh, e.ends, order) {
                    for (i, &gi) in verts.iter().enumerate() {
                        let phi_i = eval_basis(basis[i], p);
                        for (j, &gj) in verts.iter().enumerate() {
                            let dn = basis[j][1] * normal[0] + basis[j][2] * normal[1];
                            a[(gi, gj)] -= w * config.mu * dn * phi_i;
                            boundary_mass[(gi, gj)] +=
                                w * (bnorm + config.mu / len) * phi_i * eval_basis(basis[j], p);
                        }
                    }
                }
            }
            [t0, t1] => {
                let normal = outward_normal(mesh, e.ends, *t0);
                let mut jumps = vec![0.0; n];
                for (t, sign) in [(*t0, 1.0), (*t1, -1.0)] {
                    let basis = p1_basis(vertices(mesh, t));
                    for (k, &g) in mesh.triangles[t].vertices.iter().enumerate() {
                        jumps[g] += sign * (basis[k][1] * normal[0] + basis[k][2] * normal[1]);
                    }
                }
                let weight = config.gamma * len * len * (config.mu + bnorm * len);
                for i in 0..n {
                    for j in 0..n {
                        jump[(i, j)] += weight * jumps[i] * jumps[j];
                    }
                }
            }
            _ => panic!("edge with more than two triangles"),
        }
    }
    let s_star = (boundary_mass + stiff * config.mu + &jump) * config.gamma_star;
    DenseForms {
        a,
        s_omega: jump,
        s_star,
        s_data,
        mass,
    }
}

pub fn to_dense(m: &ucfem::SparseMatrix) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(m.nrows(), m.ncols());
    for (r, c, v) in m.triplets() {
        d[(r, c)] += v;
    }
    d
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

/// `[[A, -S*], [S, Aᵀ]]`.
pub fn saddle_dense(a: &DMatrix<f64>, s: &DMatrix<f64>, s_star: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((0, n), (n, n)).copy_from(&(-s_star));
    m.view_mut((n, 0), (n, n)).copy_from(s);
    m.view_mut((n, n), (n, n)).copy_from(&a.transpose());
    m
}

pub fn dense_solve(m: &DMatrix<f64>, rhs: &[f64]) -> Vec<f64> {
    let b = DVector::from_column_slice(rhs);
    m.clone().lu().solve(&b).expect("dense system is singular").as_slice().to_vec()
}

/// Largest and smallest singular values.
pub fn dense_extreme_singular_values(m: &DMatrix<f64>) -> (f64, f64) {
    let sv = m.clone().svd(false, false).singular_values;
    (sv.max(), sv.min())
}
