//! P1 assembly on a [`TriMesh`] and the first nonzero Neumann eigenvalue.

use crate::error::FemError;
use crate::mesh::TriMesh;
use crate::saddle::{solve_constrained, SolverOptions};
use crate::sparse::{dot, SparseSym, SymTriplets};

/// Triangles with area below this are rejected by the assemblers.
pub const MIN_TRIANGLE_AREA: f64 = 1e-14;

/// Local P1 stiffness of one triangle.
fn local_stiffness(p: [[f64; 2]; 3], area: f64) -> [[f64; 3]; 3] {
    // gradient of barycentric λ_i is perp(opposite edge) / (2A)
    let b = [p[1][1] - p[2][1], p[2][1] - p[0][1], p[0][1] - p[1][1]];
    let c = [p[2][0] - p[1][0], p[0][0] - p[2][0], p[1][0] - p[0][0]];
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
        }
    }
    k
}

fn checked_area(mesh: &TriMesh, t: usize) -> Result<f64, FemError> {
    let area = mesh.triangle_area(t);
    if area < MIN_TRIANGLE_AREA {
        return Err(FemError::DegenerateTriangle { index: t, area });
    }
    Ok(area)
}

pub fn assemble_stiffness(mesh: &TriMesh) -> Result<SparseSym, FemError> {
    let v = mesh.vertices();
    let mut acc = SymTriplets::new(mesh.n_vertices());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let area = checked_area(mesh, t)?;
        let k = local_stiffness([v[tri[0]], v[tri[1]], v[tri[2]]], area);
        for i in 0..3 {
            for j in i..3 {
                acc.add(tri[i], tri[j], k[i][j]);
            }
        }
    }
    Ok(acc.build())
}

/// Consistent P1 mass matrix.
pub fn assemble_mass(mesh: &TriMesh) -> Result<SparseSym, FemError> {
    let mut acc = SymTriplets::new(mesh.n_vertices());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let area = checked_area(mesh, t)?;
        for i in 0..3 {
            acc.add(tri[i], tri[i], area / 6.0);
            for j in i + 1..3 {
                acc.add(tri[i], tri[j], area / 12.0);
            }
        }
    }
    Ok(acc.build())
}

/// Boundary mass matrix `∮ ψi ψj dS`; rows of interior vertices are empty.
pub fn assemble_boundary_mass(mesh: &TriMesh) -> SparseSym {
    let mut acc = SymTriplets::new(mesh.n_vertices());
    for e in mesh.boundary_edges() {
        let [a, b] = e.vertices;
        acc.add(a, a, e.length / 3.0);
        acc.add(b, b, e.length / 3.0);
        acc.add(a, b, e.length / 6.0);
    }
    acc.build()
}

/// Load vector `mi = ∫ ψi`.
pub fn assemble_load(mesh: &TriMesh) -> Vec<f64> {
    let mut m = vec![0.0; mesh.n_vertices()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let third = mesh.triangle_area(t) / 3.0;
        for &i in tri {
            m[i] += third;
        }
    }
    m
}

/// Smallest nonzero eigenvalue of `-Δ` with natural boundary conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct NeumannEigen {
    pub lambda: f64,
    pub eigenvector: Vec<f64>,
    pub iterations: usize,
}

impl NeumannEigen {
    /// Sharp constant of `‖w‖² ≤ C ‖∇w‖²` for mean-zero `w`.
    pub fn poincare_constant(&self) -> f64 {
        1.0 / self.lambda
    }
}

pub const EIGEN_TOLERANCE: f64 = 1e-8;
const EIGEN_MAX_ITER: usize = 500;

/// Inverse iteration for `K x = λ M x` on the complement of the constants.
///
/// Each step solves the mean-zero Neumann problem `K y = M x`, `mᵀy = 0`
/// through the bordered solver.
pub fn neumann_eigenvalue_1(mesh: &TriMesh, opts: &SolverOptions) -> Result<NeumannEigen, FemError> {
    let k = assemble_stiffness(mesh)?;
    let mass = assemble_mass(mesh)?;
    let m = assemble_load(mesh);
    let total: f64 = m.iter().sum();

    let deflate = |x: &mut Vec<f64>| {
        let mean = dot(&m, x) / total;
        x.iter_mut().for_each(|v| *v -= mean);
    };
    let normalize = |x: &mut Vec<f64>| {
        let n = mass.quadratic_form(x).sqrt();
        x.iter_mut().for_each(|v| *v /= n);
    };

    let mut x: Vec<f64> = mesh.vertices().iter().map(|&[px, py]| px + 0.5 * py + 0.1 * (px * px - py * py)).collect();
    deflate(&mut x);
    normalize(&mut x);
    let mut lambda = k.quadratic_form(&x);

    for it in 1..=EIGEN_MAX_ITER {
        let rhs = mass.matvec(&x);
        let sol = solve_constrained(&k, &m, &rhs, 0.0, opts)?;
        x = sol.x;
        deflate(&mut x);
        normalize(&mut x);
        let next = k.quadratic_form(&x);
        if (next - lambda).abs() <= EIGEN_TOLERANCE * next {
            return Ok(NeumannEigen { lambda: next, eigenvector: x, iterations: it });
        }
        lambda = next;
    }
    Err(FemError::SolverStagnation { iterations: EIGEN_MAX_ITER, residual: f64::NAN })
}
