//! Assembly of the bilinear forms and load vectors over the P1 nodal basis.
//!
//! Every matrix follows the convention `M[i][j] = form(φ_j, φ_i)`: row `i` is
//! the test function, column `j` the trial function. All constant-coefficient
//! integrals are evaluated in closed form.

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};
use crate::problem::{ExactSolution, ProblemConfig, RegionSpec};
use crate::quadrature;
use crate::sparse::{SparseMatrix, TripletBuilder};

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Convection-diffusion form with the boundary consistency term,
/// `(β·∇v, w) + (μ∇v, ∇w) - <μ∇v·n, w>_∂Ω`.
pub fn assemble_operator(mesh: &Mesh, config: &ProblemConfig) -> SparseMatrix {
    let n = mesh.num_nodes();
    let mu = config.mu;
    let mut b = TripletBuilder::with_capacity(n, n, 9 * mesh.triangles.len() + 6 * mesh.boundary_edges.len());
    for tri in &mesh.triangles {
        let grads = mesh.basis_gradients(tri.index);
        let area = tri.area;
        for (a, &row) in tri.vertices.iter().enumerate() {
            for (c, &col) in tri.vertices.iter().enumerate() {
                let convection = dot(config.beta, grads[c]) * area / 3.0;
                let stiffness = mu * area * dot(grads[c], grads[a]);
                b.push(row, col, convection + stiffness);
            }
        }
    }
    for edge in &mesh.boundary_edges {
        let owner = &mesh.triangles[edge.owner_tri];
        let grads = mesh.basis_gradients(owner.index);
        for &row in &edge.endpoints {
            for (c, &col) in owner.vertices.iter().enumerate() {
                let flux = mu * dot(grads[c], edge.outward_normal);
                b.push(row, col, -flux * edge.length / 2.0);
            }
        }
    }
    b.finalize(false)
}

/// Normal-gradient jump of each basis function across every interior face,
/// as `(face, [(node, jump)])` with the four nodes of the face patch.
pub(crate) fn face_jumps(mesh: &Mesh) -> impl Iterator<Item = (usize, Vec<(usize, f64)>)> + '_ {
    mesh.interior_faces.iter().map(move |face| {
        let mut jumps: Vec<(usize, f64)> = Vec::with_capacity(4);
        for (tri, sign) in [(face.left_tri, 1.0), (face.right_tri, -1.0)] {
            let grads = mesh.basis_gradients(tri);
            for (k, &node) in mesh.triangles[tri].vertices.iter().enumerate() {
                let j = sign * dot(grads[k], face.normal);
                match jumps.iter_mut().find(|(m, _)| *m == node) {
                    Some(entry) => entry.1 += j,
                    None => jumps.push((node, j)),
                }
            }
        }
        (face.index, jumps)
    })
}

/// Interior penalty on normal-gradient jumps,
/// `γ Σ_F h_F² (μ + |β| h_F) [∇v·n][∇w·n]` with `h_F` the face length.
pub fn assemble_jump_penalty(mesh: &Mesh, config: &ProblemConfig) -> SparseMatrix {
    let n = mesh.num_nodes();
    let beta = config.beta_norm();
    let mut b = TripletBuilder::with_capacity(n, n, 16 * mesh.interior_faces.len());
    for (f, jumps) in face_jumps(mesh) {
        let hf = mesh.interior_faces[f].length;
        let weight = config.gamma * hf * hf * (config.mu + beta * hf);
        for &(row, jr) in &jumps {
            for &(col, jc) in &jumps {
                b.push(row, col, weight * (jr * jc));
            }
        }
    }
    b.finalize(true)
}

/// Dual stabilizer
/// `γ* ( <(|β| + μ/h_E) v, w>_∂Ω + (μ∇v, ∇w) + s_Ω(v, w) )`.
pub fn assemble_dual_stabilizer(mesh: &Mesh, config: &ProblemConfig) -> SparseMatrix {
    let n = mesh.num_nodes();
    let gs = config.gamma_star;
    let beta = config.beta_norm();
    let mut b = TripletBuilder::with_capacity(n, n, 9 * mesh.triangles.len() + 4 * mesh.boundary_edges.len());
    for edge in &mesh.boundary_edges {
        let weight = gs * (beta + config.mu / edge.length) * edge.length / 6.0;
        let [p, q] = edge.endpoints;
        b.push(p, p, 2.0 * weight);
        b.push(q, q, 2.0 * weight);
        b.push(p, q, weight);
        b.push(q, p, weight);
    }
    for tri in &mesh.triangles {
        let grads = mesh.basis_gradients(tri.index);
        for (a, &row) in tri.vertices.iter().enumerate() {
            for (c, &col) in tri.vertices.iter().enumerate() {
                b.push(row, col, gs * config.mu * tri.area * dot(grads[c], grads[a]));
            }
        }
    }
    let jump = assemble_jump_penalty(mesh, config);
    for (r, c, v) in jump.triplets() {
        b.push(r, c, gs * v);
    }
    b.finalize(true)
}

/// Elements whose barycenter lies in `region`, in mesh order.
pub fn elements_in(mesh: &Mesh, region: &RegionSpec) -> Vec<usize> {
    (0..mesh.triangles.len())
        .filter(|&t| region.contains(mesh.barycenter(t)))
        .collect()
}

/// Elements of the data set; fails if there are none.
pub fn data_elements(mesh: &Mesh, config: &ProblemConfig) -> Result<Vec<usize>> {
    let elements = elements_in(mesh, &config.omega);
    if elements.is_empty() {
        Err(Error::EmptyDataRegion)
    } else {
        Ok(elements)
    }
}

/// Scaled data-set inner product `(|β|/h + μ h^{-ζ}) (v, w)_ω` with `h = 1/n`
/// and `ω` approximated by the elements whose barycenter lies in it.
pub fn assemble_data_penalty(mesh: &Mesh, config: &ProblemConfig) -> Result<SparseMatrix> {
    let n = mesh.num_nodes();
    let elements = data_elements(mesh, config)?;
    let coefficient = config.data_penalty_coefficient(mesh.cell_width());
    let mut b = TripletBuilder::with_capacity(n, n, 9 * elements.len());
    for t in elements {
        let tri = &mesh.triangles[t];
        let scale = coefficient * tri.area / 12.0;
        for (a, &row) in tri.vertices.iter().enumerate() {
            for (c, &col) in tri.vertices.iter().enumerate() {
                b.push(row, col, if a == c { 2.0 * scale } else { scale });
            }
        }
    }
    Ok(b.finalize(true))
}

/// Consistent P1 mass matrix over the whole domain.
pub fn assemble_mass(mesh: &Mesh) -> SparseMatrix {
    let n = mesh.num_nodes();
    let mut b = TripletBuilder::with_capacity(n, n, 9 * mesh.triangles.len());
    for tri in &mesh.triangles {
        let scale = tri.area / 12.0;
        for (a, &row) in tri.vertices.iter().enumerate() {
            for (c, &col) in tri.vertices.iter().enumerate() {
                b.push(row, col, if a == c { 2.0 * scale } else { scale });
            }
        }
    }
    b.finalize(true)
}

/// Load vector `F_i = (f, φ_i)` with `f = -μΔu + β·∇u`, integrated with a
/// degree-10 rule per element.
pub fn assemble_load(mesh: &Mesh, config: &ProblemConfig, exact: &ExactSolution) -> Vec<f64> {
    let mut load = vec![0.0; mesh.num_nodes()];
    for tri in &mesh.triangles {
        let verts = mesh.vertex_points(tri.index);
        for (p, bary, w) in quadrature::load_rule().on(verts, tri.area) {
            let f = exact.source(config, p);
            for (k, &node) in tri.vertices.iter().enumerate() {
                load[node] += w * f * bary[k];
            }
        }
    }
    load
}

/// Data right-hand side `G = S_ω d`, where `d` holds the nodal data on the
/// data-set elements and zero elsewhere.
///
/// `data_values` is indexed by node; every vertex of every data-set element
/// must carry a value.
pub fn assemble_data_rhs(
    mesh: &Mesh,
    config: &ProblemConfig,
    data_values: &[Option<f64>],
) -> Result<Vec<f64>> {
    if data_values.len() != mesh.num_nodes() {
        return Err(Error::DimensionMismatch(format!(
            "{} data values for {} nodes",
            data_values.len(),
            mesh.num_nodes()
        )));
    }
    let mut nodal = vec![0.0; mesh.num_nodes()];
    for t in data_elements(mesh, config)? {
        for &node in &mesh.triangles[t].vertices {
            nodal[node] = data_values[node].ok_or_else(|| {
                Error::InvalidData(format!("no data value at node {node} of data element {t}"))
            })?;
        }
    }
    Ok(assemble_data_penalty(mesh, config)?.mul_vec(&nodal))
}

/// Nodal interpolant of a pointwise function.
pub fn interpolate(mesh: &Mesh, f: impl Fn(Point) -> f64) -> Vec<f64> {
    mesh.nodes.iter().map(|n| f(n.point())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_mesh;

    fn cfg(mu: f64, beta: Point) -> ProblemConfig {
        ProblemConfig::new(mu, beta, RegionSpec::unit_square())
    }

    fn linear_nodal(mesh: &Mesh, a: f64, b: f64, c: f64) -> Vec<f64> {
        interpolate(mesh, |p| a + b * p[0] + c * p[1])
    }

    #[test]
    fn jumps_vanish_on_linears() {
        let mesh = build_mesh(6).unwrap();
        let config = cfg(1e-2, [1.0, 0.0]);
        let s = assemble_jump_penalty(&mesh, &config);
        let v = linear_nodal(&mesh, 0.3, -1.7, 2.4);
        assert!(s.quad_form(&v).abs() < 1e-12);
        assert!(s.mul_vec(&v).iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn single_face_contribution_by_hand() {
        // n=2, h=1/2. Cell (0,0) is split along node 0 (0,0) to node 4 (h,h);
        // the lower triangle [0,1,4] is the left side, the upper [0,4,3] the
        // right side, normal (-1,1)/√2. Gradients: lower φ0=(-1/h,0),
        // φ1=(1/h,-1/h), φ4=(0,1/h); upper φ0=(0,-1/h), φ4=(1/h,0),
        // φ3=(-1/h,1/h). Each jump has magnitude √2/h.
        let mesh = build_mesh(2).unwrap();
        let mut config = cfg(1e-2, [1.0, 0.0]);
        config.gamma = 0.7;
        let h: f64 = 0.5;
        let face = mesh
            .interior_faces
            .iter()
            .find(|f| f.endpoints == [0, 4] || f.endpoints == [4, 0])
            .unwrap();
        assert_eq!((face.left_tri, face.right_tri), (0, 1));
        let (_, jumps) = face_jumps(&mesh).find(|(f, _)| *f == face.index).unwrap();
        let expected = [(0, 2f64.sqrt() / h), (1, -(2f64.sqrt()) / h), (4, 2f64.sqrt() / h), (3, -(2f64.sqrt()) / h)];
        for (node, j) in expected {
            let got = jumps.iter().find(|(m, _)| *m == node).unwrap().1;
            assert!((got - j).abs() < 1e-14, "node {node}: {got} vs {j}");
        }

        // Node 0 sits in the patches of faces (0,4), (1,4) and (3,4). On the
        // latter two only its lower/upper gradient crosses, with jump 1/h over
        // a face of length h.
        let (mu, g) = (config.mu, config.gamma);
        let hd = h * 2f64.sqrt();
        let by_hand = g * hd * hd * (mu + hd) * 2.0 / (h * h) + 2.0 * g * h * h * (mu + h) / (h * h);
        let s = assemble_jump_penalty(&mesh, &config);
        assert!((s.get(0, 0) - by_hand).abs() < 1e-14);
    }

    #[test]
    fn reference_triangle_local_matrices() {
        // A 2x2 mesh cell (0,0) with the / diagonal contains the triangle
        // (0,0),(h,0),(h,h); use the single-element matrices directly instead.
        let mesh = build_mesh(2).unwrap();
        let grads = mesh.basis_gradients(0);
        let area = mesh.triangles[0].area;
        // Scale to the unit reference by similarity: stiffness is scale free.
        let k: Vec<Vec<f64>> = (0..3)
            .map(|a| (0..3).map(|c| area * dot(grads[a], grads[c])).collect())
            .collect();
        // Triangle (0,0),(h,0),(h,h) is congruent to the reference one with the
        // right angle at vertex 1.
        let expected = [[0.5, -0.5, 0.0], [-0.5, 1.0, -0.5], [0.0, -0.5, 0.5]];
        for a in 0..3 {
            for c in 0..3 {
                assert!((k[a][c] - expected[a][c]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn dual_stabilizer_scaling_and_constants() {
        let mesh = build_mesh(4).unwrap();
        let mut config = cfg(1e-2, [1.0, 0.0]);
        config.gamma_star = 0.0;
        assert!(assemble_dual_stabilizer(&mesh, &config).triplets().all(|(_, _, v)| v == 0.0));

        config.gamma_star = 1.3;
        let s = assemble_dual_stabilizer(&mesh, &config);
        let ones = vec![1.0; mesh.num_nodes()];
        let h = 0.25;
        let expected = 1.3 * (1.0 + config.mu / h) * 4.0;
        assert!((s.quad_form(&ones) - expected).abs() < 1e-12);
    }

    #[test]
    fn penalty_scaling() {
        let mesh = build_mesh(5).unwrap();
        let config = cfg(1e-3, [1.0, 0.0]);
        let mut doubled = config.clone();
        doubled.gamma *= 2.0;
        doubled.gamma_star *= 2.0;
        let (s1, s2) = (assemble_jump_penalty(&mesh, &config), assemble_jump_penalty(&mesh, &doubled));
        for ((_, _, a), (_, _, b)) in s1.triplets().zip(s2.triplets()) {
            assert!((b - 2.0 * a).abs() <= 1e-15 * a.abs());
        }
        // Doubling γ* alone doubles S*; γ is held fixed.
        let mut star_only = config.clone();
        star_only.gamma_star *= 2.0;
        let (d1, d2) = (assemble_dual_stabilizer(&mesh, &config), assemble_dual_stabilizer(&mesh, &star_only));
        for ((_, _, a), (_, _, b)) in d1.triplets().zip(d2.triplets()) {
            assert!((b - 2.0 * a).abs() <= 1e-14 * a.abs());
        }
    }

    #[test]
    fn data_penalty_whole_square_is_scaled_mass() {
        let mesh = build_mesh(4).unwrap();
        let config = cfg(1e-2, [1.0, 0.0]);
        let s = assemble_data_penalty(&mesh, &config).unwrap();
        let mass = assemble_mass(&mesh);
        let c = config.data_penalty_coefficient(0.25);
        for ((r, col, a), (r2, col2, m)) in s.triplets().zip(mass.triplets()) {
            assert_eq!((r, col), (r2, col2));
            assert!((a - c * m).abs() < 1e-12 * c);
        }
        let total: f64 = s.mul_vec(&vec![1.0; mesh.num_nodes()]).iter().sum();
        assert!((total - c).abs() < 1e-12 * c);
    }

    #[test]
    fn data_elements_side_box() {
        let mesh = build_mesh(10).unwrap();
        let config = ProblemConfig::new(1e-2, [1.0, 0.0], RegionSpec::rect(0.0, 0.2, 0.4, 0.6));
        let elems = data_elements(&mesh, &config).unwrap();
        // Brute-force enumeration over cells: i in {0,1}, j in {4,5}, two triangles each.
        let mut expected = Vec::new();
        for j in 4..6 {
            for i in 0..2 {
                expected.push(2 * (j * 10 + i));
                expected.push(2 * (j * 10 + i) + 1);
            }
        }
        expected.sort();
        assert_eq!(elems, expected);

        let far = ProblemConfig::new(1e-2, [1.0, 0.0], RegionSpec::disk([0.5, 0.5], 1e-3));
        assert!(matches!(assemble_data_penalty(&mesh, &far), Err(Error::EmptyDataRegion)));
    }

    #[test]
    fn data_rhs_cases() {
        let mesh = build_mesh(8).unwrap();
        let config = ProblemConfig::new(1e-2, [1.0, 0.0], RegionSpec::disk([0.5, 0.5], 0.2));
        let s = assemble_data_penalty(&mesh, &config).unwrap();
        let u = linear_nodal(&mesh, 1.0, 2.0, 3.0);
        let data: Vec<Option<f64>> = u.iter().copied().map(Some).collect();
        let g = assemble_data_rhs(&mesh, &config, &data).unwrap();
        assert_eq!(g, s.mul_vec(&u));

        let zeros = vec![Some(0.0); mesh.num_nodes()];
        assert!(assemble_data_rhs(&mesh, &config, &zeros).unwrap().iter().all(|&x| x == 0.0));

        let missing = vec![None; mesh.num_nodes()];
        assert!(matches!(
            assemble_data_rhs(&mesh, &config, &missing),
            Err(Error::InvalidData(_))
        ));
    }

    #[test]
    fn data_rhs_single_element() {
        let mesh = build_mesh(8).unwrap();
        let bc = mesh.barycenter(37);
        let config = ProblemConfig::new(1e-2, [1.0, 0.0], RegionSpec::disk(bc, 1e-3));
        assert_eq!(data_elements(&mesh, &config).unwrap(), vec![37]);
        let g = assemble_data_rhs(&mesh, &config, &vec![Some(1.0); mesh.num_nodes()]).unwrap();
        let c = config.data_penalty_coefficient(1.0 / 8.0);
        let expected = c * mesh.triangles[37].area / 3.0;
        for (i, gi) in g.iter().enumerate() {
            if mesh.triangles[37].vertices.contains(&i) {
                assert!((gi - expected).abs() < 1e-14 * expected);
            } else {
                assert_eq!(*gi, 0.0);
            }
        }
    }

    #[test]
    fn load_for_linear_transport() {
        let mesh = build_mesh(4).unwrap();
        for mu in [1.0, 1e-6] {
            let config = cfg(mu, [1.0, 0.0]);
            let f = assemble_load(&mesh, &config, &ExactSolution::Linear { a: 0.0, b: 1.0, c: 0.0 });
            for (i, fi) in f.iter().enumerate() {
                let expected: f64 = mesh
                    .triangles
                    .iter()
                    .filter(|t| t.vertices.contains(&i))
                    .map(|t| t.area / 3.0)
                    .sum();
                assert!((fi - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn layer_load_is_finite() {
        let mesh = build_mesh(64).unwrap();
        let f = assemble_load(&mesh, &cfg(1e-6, [1.0, 0.0]), &ExactSolution::Layer);
        assert!(f.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn operator_is_consistent_on_linears() {
        // For linear u the diffusive terms cancel: A u = (β·∇u, φ_i).
        let mesh = build_mesh(6).unwrap();
        for mu in [1.0, 1e-2, 1e-6] {
            let config = cfg(mu, [1.0, 0.0]);
            let a = assemble_operator(&mesh, &config);
            let u = linear_nodal(&mesh, 1.0, 2.0, 3.0);
            let exact = ExactSolution::Linear { a: 1.0, b: 2.0, c: 3.0 };
            let f = assemble_load(&mesh, &config, &exact);
            let au = a.mul_vec(&u);
            for (x, y) in au.iter().zip(&f) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
