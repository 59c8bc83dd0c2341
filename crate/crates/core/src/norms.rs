//! Error functionals: regional L² and H¹-seminorm errors, weighted triple
//! norms and the stabilization norm.
//!
//! Regions are approximated by the elements whose barycenter lies inside;
//! volume integrals use the seven-point degree-5 rule, boundary integrals a
//! three-point Gauss rule per edge. Weighted integrals resolve the crosswind
//! decay of the weight, which may be much thinner than an element, by cutting
//! elements and edges into horizontal slabs.

use crate::assembly::elements_in;
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};
use crate::problem::{ExactSolution, ProblemConfig, RegionSpec};
use crate::quadrature::{fine_rule, gauss_legendre, DEGREE_5, GAUSS_3};
use crate::sparse::SparseMatrix;
use crate::weights::{Direction, WeightField};

/// Summary of the error measures of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct NormReport {
    pub l2_region: f64,
    pub h1_semi_region: f64,
    pub triple_weighted: f64,
    pub stab_norm: f64,
    pub region_used: RegionSpec,
}

fn region_elements(mesh: &Mesh, region: &RegionSpec) -> Result<Vec<usize>> {
    let elements = elements_in(mesh, region);
    if elements.is_empty() {
        Err(Error::EmptyRegion)
    } else {
        Ok(elements)
    }
}

fn check_len(mesh: &Mesh, v: &[f64]) -> Result<()> {
    if v.len() == mesh.num_nodes() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "nodal vector of length {} on a mesh with {} nodes",
            v.len(),
            mesh.num_nodes()
        )))
    }
}

fn local_values(mesh: &Mesh, v: &[f64], tri: usize) -> [f64; 3] {
    mesh.triangles[tri].vertices.map(|k| v[k])
}

fn element_gradient(mesh: &Mesh, v: &[f64], tri: usize) -> Point {
    let grads = mesh.basis_gradients(tri);
    let vals = local_values(mesh, v, tri);
    let mut g = [0.0; 2];
    for k in 0..3 {
        g[0] += vals[k] * grads[k][0];
        g[1] += vals[k] * grads[k][1];
    }
    g
}

/// `‖u_h - u‖_{L²(region)}`.
pub fn l2_error(mesh: &Mesh, u_h: &[f64], exact: &ExactSolution, region: &RegionSpec) -> Result<f64> {
    check_len(mesh, u_h)?;
    let mut sum = 0.0;
    for t in region_elements(mesh, region)? {
        let vals = local_values(mesh, u_h, t);
        for (p, l, w) in DEGREE_5.on(mesh.vertex_points(t), mesh.triangles[t].area) {
            let uh = l[0] * vals[0] + l[1] * vals[1] + l[2] * vals[2];
            let e = uh - exact.value(p);
            sum += w * e * e;
        }
    }
    Ok(sum.sqrt())
}

/// `|u_h - u|_{H¹(region)}`.
pub fn h1_semi_error(
    mesh: &Mesh,
    u_h: &[f64],
    exact: &ExactSolution,
    region: &RegionSpec,
) -> Result<f64> {
    check_len(mesh, u_h)?;
    let mut sum = 0.0;
    for t in region_elements(mesh, region)? {
        let g = element_gradient(mesh, u_h, t);
        for (p, _, w) in DEGREE_5.on(mesh.vertex_points(t), mesh.triangles[t].area) {
            let ge = exact.gradient(p);
            let (dx, dy) = (g[0] - ge[0], g[1] - ge[1]);
            sum += w * (dx * dx + dy * dy);
        }
    }
    Ok(sum.sqrt())
}

/// L² norm of a discrete function, `(vᵀ M v)^{1/2}` with the mass matrix `M`.
pub fn discrete_l2_norm(mass: &SparseMatrix, v: &[f64]) -> f64 {
    mass.quad_form(v).max(0.0).sqrt()
}

/// Part of a convex polygon with `a ≤ y ≤ b`.
fn clip_to_slab(poly: &[Point], a: f64, b: f64) -> Vec<Point> {
    let clip = |poly: &[Point], inside: &dyn Fn(Point) -> bool, level: f64| -> Vec<Point> {
        let mut out = Vec::with_capacity(poly.len() + 2);
        for (k, &p) in poly.iter().enumerate() {
            let q = poly[(k + 1) % poly.len()];
            if inside(p) {
                out.push(p);
            }
            if inside(p) != inside(q) {
                let t = (level - p[1]) / (q[1] - p[1]);
                out.push([p[0] + t * (q[0] - p[0]), level]);
            }
        }
        out
    };
    let lower = clip(poly, &|p: Point| p[1] >= a, a);
    if lower.len() < 3 {
        return lower;
    }
    clip(&lower, &|p: Point| p[1] <= b, b)
}

/// Quadrature points `(point, barycentric, weight)` on element `t` suited to
/// integrands carrying the weight `φ`.
fn weighted_points(mesh: &Mesh, t: usize, weight: &WeightField) -> Vec<(Point, [f64; 3], f64)> {
    let verts = mesh.vertex_points(t);
    let area = mesh.triangles[t].area;
    let (y0, y1) = verts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v[1]), hi.max(v[1]))
    });
    if !weight.varies_within(y0, y1) {
        return DEGREE_5.on(verts, area).collect();
    }
    let mut levels = vec![y0];
    levels.extend(weight.crosswind_cuts().into_iter().filter(|&y| y > y0 && y < y1));
    levels.push(y1);

    let bary = |p: Point| {
        let l1 = crate::mesh::signed_area(verts[0], p, verts[2]) / area;
        let l2 = crate::mesh::signed_area(verts[0], verts[1], p) / area;
        [1.0 - l1 - l2, l1, l2]
    };
    let mut out = Vec::new();
    for slab in levels.windows(2) {
        let piece = clip_to_slab(&verts, slab[0], slab[1]);
        for k in 1..piece.len().saturating_sub(1) {
            let sub = [piece[0], piece[k], piece[k + 1]];
            let sub_area = crate::mesh::signed_area(sub[0], sub[1], sub[2]).abs();
            if sub_area <= 0.0 {
                continue;
            }
            out.extend(fine_rule().on(sub, sub_area).map(|(p, _, w)| (p, bary(p), w)));
        }
    }
    out
}

/// Weighted triple norm of a discrete function.
///
/// Downstream: `|β| ‖v φ^{1/2}‖² + μ ‖∇v φ^{1/2}‖² + ‖|β·n|^{1/2} v φ^{1/2}‖²` on
/// the outflow boundary. Upstream drops the gradient term and takes the
/// boundary term on the inflow boundary with `|φ|`.
pub fn triple_norm(mesh: &Mesh, v: &[f64], weight: &WeightField, config: &ProblemConfig) -> Result<f64> {
    check_len(mesh, v)?;
    if weight.spec.beta_sign != config.beta[0].signum() {
        return Err(Error::DirectionMismatch);
    }
    let beta = config.beta_norm();
    let downstream = weight.spec.direction == Direction::Downstream;

    let mut volume = 0.0;
    for tri in &mesh.triangles {
        let t = tri.index;
        let vals = local_values(mesh, v, t);
        let grad_sq = if downstream {
            let g = element_gradient(mesh, v, t);
            g[0] * g[0] + g[1] * g[1]
        } else {
            0.0
        };
        for (p, l, w) in weighted_points(mesh, t, weight) {
            let vh = l[0] * vals[0] + l[1] * vals[1] + l[2] * vals[2];
            let phi = weight.abs(p);
            volume += w * phi * (beta * vh * vh + config.mu * grad_sq);
        }
    }

    let mut boundary = 0.0;
    for edge in &mesh.boundary_edges {
        let flux = config.beta[0] * edge.outward_normal[0] + config.beta[1] * edge.outward_normal[1];
        let wanted = if downstream { flux > 0.0 } else { flux < 0.0 };
        if !wanted {
            continue;
        }
        let [a, b] = edge.endpoints;
        let (pa, pb) = (mesh.nodes[a].point(), mesh.nodes[b].point());
        // Parameter breakpoints where the edge crosses a slab line.
        let mut params = vec![0.0, 1.0];
        let varies = weight.varies_within(pa[1].min(pb[1]), pa[1].max(pb[1]));
        if varies && pa[1] != pb[1] {
            params.extend(
                weight
                    .crosswind_cuts()
                    .into_iter()
                    .map(|y| (y - pa[1]) / (pb[1] - pa[1]))
                    .filter(|&s| s > 0.0 && s < 1.0),
            );
            params.sort_by(f64::total_cmp);
        }
        let rule = if varies { gauss_legendre(8) } else { GAUSS_3.to_vec() };
        for piece in params.windows(2) {
            let len = piece[1] - piece[0];
            for &(r, w) in &rule {
                let s = piece[0] + r * len;
                let p = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
                let vh = (1.0 - s) * v[a] + s * v[b];
                boundary += w * len * edge.length * flux.abs() * vh * vh * weight.abs(p);
            }
        }
    }
    Ok((volume + boundary).sqrt())
}

const NEGATIVE_FORM_TOL: f64 = 1e-12;

/// Stabilization norm `(uᵀ S u + zᵀ S* z)^{1/2}`.
pub fn stab_norm(u: &[f64], z: &[f64], s: &SparseMatrix, s_star: &SparseMatrix) -> Result<f64> {
    let q = s.quad_form(u) + s_star.quad_form(z);
    let scale = u.iter().chain(z).map(|x| x * x).sum::<f64>();
    if q < -NEGATIVE_FORM_TOL * scale.max(1.0) {
        return Err(Error::AssemblyDefect(q));
    }
    Ok(q.max(0.0).sqrt())
}
