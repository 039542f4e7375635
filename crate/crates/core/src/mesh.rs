//! Boundary-fitted structured triangulations of star-shaped sections.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::{self, Write};

use crate::error::MeshError;
use crate::fmt::sig17;
use crate::geometry::CrossSection;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryEdge {
    /// Endpoints in counterclockwise order along the boundary loop.
    pub vertices: [usize; 2],
    pub normal: [f64; 2],
    pub length: f64,
    /// The triangle that owns this edge.
    pub triangle: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    section: CrossSection,
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    on_boundary: Vec<bool>,
    h_max: f64,
    level: u32,
}

impl TriMesh {
    /// Tensor-product polar grid: ring `i` of `n_rings` sits at
    /// `(i / n_rings) r(θj)`, the band next to the centre is a triangle fan
    /// and every other band is split into two triangles per sector.
    pub fn polar(section: &CrossSection, n_rings: usize, n_sectors: usize) -> Result<Self, MeshError> {
        if section.is_strip() {
            return Err(MeshError::UnsupportedSection(section.kind()));
        }
        if n_rings < 2 {
            return Err(MeshError::BadResolution(format!("n_rings = {n_rings}, need at least 2")));
        }
        if n_sectors < 8 {
            return Err(MeshError::BadResolution(format!("n_sectors = {n_sectors}, need at least 8")));
        }

        let ring_vertex = |i: usize, j: usize| 1 + (i - 1) * n_sectors + (j % n_sectors);

        let mut vertices = Vec::with_capacity(1 + n_rings * n_sectors);
        vertices.push([0.0, 0.0]);
        for i in 1..=n_rings {
            let rho = i as f64 / n_rings as f64;
            for j in 0..n_sectors {
                let theta = 2.0 * PI * j as f64 / n_sectors as f64;
                let r = if i == n_rings { section.radius(theta) } else { rho * section.radius(theta) };
                vertices.push([r * theta.cos(), r * theta.sin()]);
            }
        }

        let mut triangles = Vec::with_capacity(n_sectors * (2 * n_rings - 1));
        for j in 0..n_sectors {
            triangles.push([0, ring_vertex(1, j), ring_vertex(1, j + 1)]);
        }
        for i in 1..n_rings {
            for j in 0..n_sectors {
                let a = ring_vertex(i, j);
                let b = ring_vertex(i, j + 1);
                let c = ring_vertex(i + 1, j + 1);
                let d = ring_vertex(i + 1, j);
                triangles.push([a, d, c]);
                triangles.push([a, c, b]);
            }
        }

        let boundary: Vec<[usize; 2]> =
            (0..n_sectors).map(|j| [ring_vertex(n_rings, j), ring_vertex(n_rings, j + 1)]).collect();

        Ok(Self::assemble(section.clone(), vertices, triangles, &boundary, 0))
    }

    /// Splits every triangle into four through its edge midpoints and moves
    /// the new boundary midpoints radially onto the exact boundary.
    pub fn refine(&self) -> Self {
        let mut vertices = self.vertices.clone();
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<[f64; 2]>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                let (pa, pb) = (vertices[a], vertices[b]);
                vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
                vertices.len() - 1
            })
        };

        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[p, q, r] in &self.triangles {
            let pq = midpoint(p, q, &mut vertices);
            let qr = midpoint(q, r, &mut vertices);
            let rp = midpoint(r, p, &mut vertices);
            triangles.push([p, pq, rp]);
            triangles.push([pq, q, qr]);
            triangles.push([rp, qr, r]);
            triangles.push([pq, qr, rp]);
        }

        let mut boundary = Vec::with_capacity(2 * self.boundary_edges.len());
        for edge in &self.boundary_edges {
            let [a, b] = edge.vertices;
            let m = midpoint(a, b, &mut vertices);
            let [x, y] = vertices[m];
            vertices[m] = self.section.boundary_point(y.atan2(x));
            boundary.push([a, m]);
            boundary.push([m, b]);
        }

        Self::assemble(self.section.clone(), vertices, triangles, &boundary, self.level + 1)
    }

    /// `polar(base_rings, base_sectors)` refined `level` times.
    pub fn polar_refined(
        section: &CrossSection,
        base_rings: usize,
        base_sectors: usize,
        level: u32,
    ) -> Result<Self, MeshError> {
        let mut mesh = Self::polar(section, base_rings, base_sectors)?;
        for _ in 0..level {
            mesh = mesh.refine();
        }
        Ok(mesh)
    }

    /// Builds a mesh from raw connectivity without checking it.
    #[cfg(test)]
    pub(crate) fn from_parts(
        section: CrossSection,
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary: &[[usize; 2]],
    ) -> Self {
        Self::assemble(section, vertices, triangles, boundary, 0)
    }

    fn assemble(
        section: CrossSection,
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary: &[[usize; 2]],
        level: u32,
    ) -> Self {
        let mut owner: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * triangles.len());
        let mut h_max: f64 = 0.0;
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                owner.insert((a.min(b), a.max(b)), t);
                h_max = h_max.max(distance(vertices[a], vertices[b]));
            }
        }

        let mut on_boundary = vec![false; vertices.len()];
        let boundary_edges = boundary
            .iter()
            .map(|&[a, b]| {
                on_boundary[a] = true;
                on_boundary[b] = true;
                let (pa, pb) = (vertices[a], vertices[b]);
                let length = distance(pa, pb);
                let normal = [(pb[1] - pa[1]) / length, -(pb[0] - pa[0]) / length];
                BoundaryEdge { vertices: [a, b], normal, length, triangle: owner[&(a.min(b), a.max(b))] }
            })
            .collect();

        Self { section, vertices, triangles, boundary_edges, on_boundary, h_max, level }
    }

    pub fn section(&self) -> &CrossSection {
        &self.section
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.on_boundary[v]
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Signed area of triangle `t` (positive for counterclockwise).
    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn boundary_length(&self) -> f64 {
        self.boundary_edges.iter().map(|e| e.length).sum()
    }

    /// Checks the structural invariants; returns a description of the first
    /// violation.
    pub fn check(&self) -> Result<(), String> {
        for t in 0..self.triangles.len() {
            let area = self.triangle_area(t);
            if area <= 0.0 {
                return Err(format!("triangle {t} has signed area {area:e}"));
            }
        }
        let n = self.boundary_edges.len();
        for (i, e) in self.boundary_edges.iter().enumerate() {
            if e.vertices[1] != self.boundary_edges[(i + 1) % n].vertices[0] {
                return Err(format!("boundary loop broken after edge {i}"));
            }
            for &v in &e.vertices {
                let [x, y] = self.vertices[v];
                let r = (x * x + y * y).sqrt();
                let exact = self.section.radius(y.atan2(x));
                if (r - exact).abs() > 1e-12 {
                    return Err(format!("boundary vertex {v} is off the boundary by {:e}", r - exact));
                }
            }
            let [a, b] = e.vertices;
            let mid =
                [0.5 * (self.vertices[a][0] + self.vertices[b][0]), 0.5 * (self.vertices[a][1] + self.vertices[b][1])];
            if e.normal[0] * mid[0] + e.normal[1] * mid[1] <= 0.0 {
                return Err(format!("normal of boundary edge {i} points inwards"));
            }
        }
        Ok(())
    }

    /// Legacy ASCII VTK unstructured grid with optional point scalars.
    pub fn write_vtk<W: Write>(&self, out: &mut W, point_data: &[(&str, &[f64])]) -> io::Result<()> {
        writeln!(out, "# vtk DataFile Version 3.0")?;
        writeln!(out, "pipeflow cross-section mesh level {}", self.level)?;
        writeln!(out, "ASCII")?;
        writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
        writeln!(out, "POINTS {} double", self.vertices.len())?;
        for [x, y] in &self.vertices {
            writeln!(out, "{} {} 0", sig17(*x), sig17(*y))?;
        }
        let nt = self.triangles.len();
        writeln!(out, "CELLS {} {}", nt, 4 * nt)?;
        for [a, b, c] in &self.triangles {
            writeln!(out, "3 {a} {b} {c}")?;
        }
        writeln!(out, "CELL_TYPES {nt}")?;
        for _ in 0..nt {
            writeln!(out, "5")?;
        }
        if !point_data.is_empty() {
            writeln!(out, "POINT_DATA {}", self.vertices.len())?;
            for (name, values) in point_data {
                if values.len() != self.vertices.len() {
                    return Err(io::Error::new(io::ErrorKind::InvalidInput, format!("{name}: wrong length")));
                }
                writeln!(out, "SCALARS {name} double 1")?;
                writeln!(out, "LOOKUP_TABLE default")?;
                for v in *values {
                    writeln!(out, "{}", sig17(*v))?;
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
}
