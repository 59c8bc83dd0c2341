//! Structured triangulations of the unit square.
//!
//! The square is cut into `n x n` cells and every cell is split by one
//! diagonal. The diagonal alternates in a checkerboard pattern: cells with
//! `i + j` even get the lower-left to upper-right diagonal, odd cells the
//! other one.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub index: usize,
    pub x: f64,
    pub y: f64,
}

impl Node {
    pub fn point(&self) -> Point {
        [self.x, self.y]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub index: usize,
    /// Counterclockwise vertex indices.
    pub vertices: [usize; 3],
    pub area: f64,
}

/// An edge shared by two triangles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorFace {
    pub index: usize,
    pub endpoints: [usize; 2],
    pub length: f64,
    pub left_tri: usize,
    pub right_tri: usize,
    /// Unit normal pointing from `left_tri` into `right_tri`.
    pub normal: Point,
}

/// Sign of `β·n` on a boundary edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowClass {
    Inflow,
    Outflow,
    Tangential,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub index: usize,
    pub endpoints: [usize; 2],
    pub length: f64,
    pub owner_tri: usize,
    pub outward_normal: Point,
    /// `None` until [`Mesh::classify_boundary`] has been called.
    pub classification: Option<FlowClass>,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub nodes: Vec<Node>,
    pub triangles: Vec<Triangle>,
    pub interior_faces: Vec<InteriorFace>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Divisions per side.
    pub n: usize,
    /// Largest element diameter, `√2 / n`.
    pub h: f64,
}

/// Builds the `n x n` alternating-diagonal triangulation of the unit square.
pub fn build_mesh(n: usize) -> Result<Mesh> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "mesh needs at least 2 divisions per side, got {n}"
        )));
    }
    let step = 1.0 / n as f64;
    let node_id = |i: usize, j: usize| j * (n + 1) + i;

    let mut nodes = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            // Exact endpoints on the boundary.
            let x = if i == n { 1.0 } else { i as f64 * step };
            let y = if j == n { 1.0 } else { j as f64 * step };
            nodes.push(Node {
                index: node_id(i, j),
                x,
                y,
            });
        }
    }

    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (p00, p10, p01, p11) = (
                node_id(i, j),
                node_id(i + 1, j),
                node_id(i, j + 1),
                node_id(i + 1, j + 1),
            );
            let pair = if (i + j) % 2 == 0 {
                [[p00, p10, p11], [p00, p11, p01]]
            } else {
                [[p00, p10, p01], [p10, p11, p01]]
            };
            for vertices in pair {
                let index = triangles.len();
                let area = signed_area(
                    nodes[vertices[0]].point(),
                    nodes[vertices[1]].point(),
                    nodes[vertices[2]].point(),
                );
                debug_assert!(area > 0.0);
                triangles.push(Triangle {
                    index,
                    vertices,
                    area,
                });
            }
        }
    }

    // Edge -> incident (triangle, opposite local vertex), in order of first appearance.
    let mut slot: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edges: Vec<((usize, usize), Vec<(usize, usize)>)> = Vec::new();
    for tri in &triangles {
        for local in 0..3 {
            let a = tri.vertices[(local + 1) % 3];
            let b = tri.vertices[(local + 2) % 3];
            let key = (a.min(b), a.max(b));
            let k = *slot.entry(key).or_insert_with(|| {
                edges.push((key, Vec::new()));
                edges.len() - 1
            });
            edges[k].1.push((tri.index, local));
        }
    }

    let mut interior_faces = Vec::new();
    let mut boundary_edges = Vec::new();
    for ((a, b), incident) in edges {
        let (pa, pb) = (nodes[a].point(), nodes[b].point());
        let length = distance(pa, pb);
        let (owner, opposite_local) = incident[0];
        let opposite = nodes[triangles[owner].vertices[opposite_local]].point();
        let normal = normal_away_from(pa, pb, opposite);
        match incident.len() {
            1 => boundary_edges.push(BoundaryEdge {
                index: boundary_edges.len(),
                endpoints: [a, b],
                length,
                owner_tri: owner,
                outward_normal: normal,
                classification: None,
            }),
            2 => interior_faces.push(InteriorFace {
                index: interior_faces.len(),
                endpoints: [a, b],
                length,
                left_tri: owner,
                right_tri: incident[1].0,
                normal,
            }),
            k => unreachable!("edge ({a},{b}) shared by {k} triangles"),
        }
    }

    Ok(Mesh {
        nodes,
        triangles,
        interior_faces,
        boundary_edges,
        n,
        h: std::f64::consts::SQRT_2 / n as f64,
    })
}

impl Mesh {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Cell width `1/n`, the mesh size reported to experiments.
    pub fn cell_width(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn vertex_points(&self, tri: usize) -> [Point; 3] {
        let v = self.triangles[tri].vertices;
        [
            self.nodes[v[0]].point(),
            self.nodes[v[1]].point(),
            self.nodes[v[2]].point(),
        ]
    }

    pub fn barycenter(&self, tri: usize) -> Point {
        let [a, b, c] = self.vertex_points(tri);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Constant gradients of the three local P1 basis functions.
    pub fn basis_gradients(&self, tri: usize) -> [Point; 3] {
        let p = self.vertex_points(tri);
        let two_area = 2.0 * self.triangles[tri].area;
        let mut grads = [[0.0; 2]; 3];
        for (k, g) in grads.iter_mut().enumerate() {
            let a = p[(k + 1) % 3];
            let b = p[(k + 2) % 3];
            *g = [(a[1] - b[1]) / two_area, (b[0] - a[0]) / two_area];
        }
        grads
    }

    /// Largest edge length of a triangle.
    pub fn diameter(&self, tri: usize) -> f64 {
        let [a, b, c] = self.vertex_points(tri);
        distance(a, b).max(distance(b, c)).max(distance(c, a))
    }

    /// Labels every boundary edge by the sign of `β·n`.
    pub fn classify_boundary(mut self, beta: Point) -> Result<Mesh> {
        if !beta[0].is_finite() || !beta[1].is_finite() {
            return Err(Error::InvalidArgument("convection field is not finite".into()));
        }
        if beta == [0.0, 0.0] {
            return Err(Error::InvalidArgument(
                "convection field is zero, no flow direction".into(),
            ));
        }
        for edge in &mut self.boundary_edges {
            let flux = beta[0] * edge.outward_normal[0] + beta[1] * edge.outward_normal[1];
            edge.classification = Some(if flux < 0.0 {
                FlowClass::Inflow
            } else if flux > 0.0 {
                FlowClass::Outflow
            } else {
                FlowClass::Tangential
            });
        }
        Ok(self)
    }

    /// Plain-text dump: header `n nodes triangles`, then `idx x y` node lines
    /// and `idx v0 v1 v2` triangle lines.
    pub fn dump_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {}", self.n, self.nodes.len(), self.triangles.len());
        for node in &self.nodes {
            let _ = writeln!(out, "{} {} {}", node.index, node.x, node.y);
        }
        for tri in &self.triangles {
            let [a, b, c] = tri.vertices;
            let _ = writeln!(out, "{} {} {} {}", tri.index, a, b, c);
        }
        out
    }

    pub fn write_dump(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(self.dump_string().as_bytes())
            .map_err(|e| Error::io(path, e))
    }
}

pub(crate) fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

pub(crate) fn distance(a: Point, b: Point) -> f64 {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

/// Unit normal of segment `ab` on the side away from `opposite`.
fn normal_away_from(a: Point, b: Point, opposite: Point) -> Point {
    let len = distance(a, b);
    let mut n = [(b[1] - a[1]) / len, (a[0] - b[0]) / len];
    let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    if n[0] * (opposite[0] - mid[0]) + n[1] * (opposite[1] - mid[1]) > 0.0 {
        n = [-n[0], -n[1]];
    }
    // Axis-aligned normals come out exact; clean the signed zeros.
    n.map(|c| if c == 0.0 { 0.0 } else { c })
}
