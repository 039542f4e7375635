use std::sync::Arc;

use crate::error::FemError;
use crate::mesh::TriMesh;

/// Nodal values of a P1 function on a shared mesh.
#[derive(Debug, Clone)]
pub struct ScalarField {
    mesh: Arc<TriMesh>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(mesh: Arc<TriMesh>, values: Vec<f64>) -> Result<Self, FemError> {
        if values.len() != mesh.n_vertices() {
            return Err(FemError::DimensionMismatch { expected: mesh.n_vertices(), got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FemError::NonFinite(i));
        }
        Ok(Self { mesh, values })
    }

    pub fn constant(mesh: Arc<TriMesh>, value: f64) -> Self {
        let n = mesh.n_vertices();
        Self { mesh, values: vec![value; n] }
    }

    /// Interpolates `f(x, y)` at the vertices.
    pub fn interpolate(mesh: Arc<TriMesh>, f: impl Fn(f64, f64) -> f64) -> Result<Self, FemError> {
        let values = mesh.vertices().iter().map(|&[x, y]| f(x, y)).collect();
        Self::new(mesh, values)
    }

    pub fn mesh(&self) -> &Arc<TriMesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { mesh: self.mesh.clone(), values: self.values.iter().map(|v| s * v).collect() }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &ScalarField) -> Result<Self, FemError> {
        if !self.same_mesh(other) {
            return Err(FemError::MeshMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + s * b).collect();
        Ok(Self { mesh: self.mesh.clone(), values })
    }

    pub fn sub(&self, other: &ScalarField) -> Result<Self, FemError> {
        self.axpy(-1.0, other)
    }

    pub fn same_mesh(&self, other: &ScalarField) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh) || *self.mesh == *other.mesh
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> Result<f64, FemError> {
        if !self.same_mesh(other) {
            return Err(FemError::MeshMismatch);
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Constant gradient of the field on triangle `t`.
    pub fn gradient_on(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.mesh.triangles()[t];
        let v = self.mesh.vertices();
        let (pa, pb, pc) = (v[a], v[b], v[c]);
        let det = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
        let (ua, ub, uc) = (self.values[a], self.values[b], self.values[c]);
        let gx = ((ub - ua) * (pc[1] - pa[1]) - (uc - ua) * (pb[1] - pa[1])) / det;
        let gy = ((uc - ua) * (pb[0] - pa[0]) - (ub - ua) * (pc[0] - pa[0])) / det;
        [gx, gy]
    }

    /// `∫ φ` over the discrete domain.
    pub fn integral(&self) -> f64 {
        let v = &self.values;
        self.mesh
            .triangles()
            .iter()
            .enumerate()
            .map(|(t, &[a, b, c])| self.mesh.triangle_area(t) * (v[a] + v[b] + v[c]) / 3.0)
            .sum()
    }

    /// `∮ φ dS` over the boundary loop.
    pub fn boundary_integral(&self) -> f64 {
        self.mesh
            .boundary_edges()
            .iter()
            .map(|e| 0.5 * e.length * (self.values[e.vertices[0]] + self.values[e.vertices[1]]))
            .sum()
    }

    /// `‖∇φ‖_{L²}`, exact for P1.
    pub fn h1_seminorm(&self) -> f64 {
        (0..self.mesh.n_triangles())
            .map(|t| {
                let [gx, gy] = self.gradient_on(t);
                self.mesh.triangle_area(t) * (gx * gx + gy * gy)
            })
            .sum::<f64>()
            .sqrt()
    }

    /// `‖φ‖_{L²}`, exact for P1.
    pub fn l2_norm(&self) -> f64 {
        let v = &self.values;
        self.mesh
            .triangles()
            .iter()
            .enumerate()
            .map(|(t, &[a, b, c])| {
                let (x, y, z) = (v[a], v[b], v[c]);
                let sum = x + y + z;
                self.mesh.triangle_area(t) / 12.0 * (x * x + y * y + z * z + sum * sum)
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn h1_norm(&self) -> f64 {
        self.l2_norm().hypot(self.h1_seminorm())
    }

    /// `‖φ‖_{L²(∂Σ)}`, exact for the piecewise linear trace.
    pub fn boundary_l2(&self) -> f64 {
        self.mesh
            .boundary_edges()
            .iter()
            .map(|e| {
                let (a, b) = (self.values[e.vertices[0]], self.values[e.vertices[1]]);
                e.length / 3.0 * (a * a + a * b + b * b)
            })
            .sum::<f64>()
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CrossSection;
    use std::f64::consts::PI;

    fn disk(level: u32) -> Arc<TriMesh> {
        Arc::new(TriMesh::polar_refined(&CrossSection::unit_disk(), 4, 16, level).unwrap())
    }

    #[test]
    fn constant_field_norms() {
        let m = disk(2);
        let one = ScalarField::constant(m.clone(), 1.0);
        assert_eq!(one.h1_seminorm(), 0.0);
        assert!((one.l2_norm() - m.area().sqrt()).abs() < 1e-12);
        assert!((one.l2_norm() - PI.sqrt()).abs() < 1e-2);
        assert!((one.boundary_l2().powi(2) - m.boundary_length()).abs() < 1e-12);
        assert!((one.integral() - m.area()).abs() < 1e-12);
    }

    #[test]
    fn linear_field_gradient() {
        let mut errs = Vec::new();
        for level in 0..3 {
            let m = disk(level);
            let f = ScalarField::interpolate(m.clone(), |x, _| x).unwrap();
            // ∫|∇x|² equals the discrete area exactly
            assert!((f.h1_seminorm().powi(2) - m.area()).abs() < 1e-12);
            errs.push((f.h1_seminorm().powi(2) - PI).abs());
        }
        assert!(errs[0] / errs[1] > 3.5 && errs[1] / errs[2] > 3.5);
    }

    #[test]
    fn quadratic_field_l2() {
        // ∫ (x²+y²)² over the polygon; exact on the disk is π/3
        let m = disk(3);
        let f = ScalarField::interpolate(m, |x, y| x * x + y * y).unwrap();
        assert!((f.l2_norm().powi(2) - PI / 3.0).abs() < 5e-3);
    }

    #[test]
    fn mismatched_meshes() {
        let a = ScalarField::constant(disk(0), 1.0);
        let b = ScalarField::constant(disk(1), 1.0);
        assert_eq!(a.sub(&b).unwrap_err(), FemError::MeshMismatch);
        assert!(ScalarField::new(disk(0), vec![1.0]).is_err());
        let n = disk(0).n_vertices();
        let mut vals = vec![0.0; n];
        vals[3] = f64::NAN;
        assert_eq!(ScalarField::new(disk(0), vals).unwrap_err(), FemError::NonFinite(3));
    }

    proptest::proptest! {
        #[test]
        fn norms_are_homogeneous(s in -5.0f64..5.0, seed in 0u64..1000) {
            let m = disk(1);
            let f = ScalarField::interpolate(m, |x, y| ((seed as f64) * x + 3.0 * y).sin() + x * y).unwrap();
            let g = f.scaled(s);
            let tol = 1e-12 * (1.0 + s.abs());
            proptest::prop_assert!((g.l2_norm() - s.abs() * f.l2_norm()).abs() < tol);
            proptest::prop_assert!((g.h1_seminorm() - s.abs() * f.h1_seminorm()).abs() < tol * 10.0);
            proptest::prop_assert!((g.boundary_l2() - s.abs() * f.boundary_l2()).abs() < tol);
        }
    }
}
