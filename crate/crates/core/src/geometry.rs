//! Smooth star-shaped pipe cross-sections described by a trigonometric
//! radius series `r(θ) = a0 + Σ ak cos(kθ) + bk sin(kθ)`.

use std::f64::consts::PI;
use std::hash::{Hash, Hasher};

use serde::Deserialize;

use crate::error::GeometryError;

/// Number of boundary samples used for validation and quadrature.
pub const BOUNDARY_SAMPLES: usize = 512;

/// Minimum of `x·n / |x|` along the boundary. Below this the rays from the
/// origin graze the boundary and the polar mesh degenerates.
pub const MIN_RAY_ALIGNMENT: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionKind {
    Disk,
    /// The interval ]0,1[ used by the two-dimensional channel.
    #[serde(alias = "strip1d", alias = "strip")]
    Strip1D,
    #[serde(alias = "starshaped", alias = "star")]
    StarShaped,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub k: u32,
    pub cos: f64,
    pub sin: f64,
}

impl Harmonic {
    pub fn new(k: u32, cos: f64, sin: f64) -> Self {
        Self { k, cos, sin }
    }
}

/// An immutable, validated cross-section.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSection {
    kind: SectionKind,
    a0: f64,
    harmonics: Vec<Harmonic>,
}

impl CrossSection {
    /// Validates the radius series and builds the section.
    ///
    /// Harmonics with the same `k` are merged. A disk may have any positive
    /// `a0` but no harmonics; the strip ignores `a0` and takes none.
    pub fn new(kind: SectionKind, a0: f64, harmonics: &[Harmonic]) -> Result<Self, GeometryError> {
        if !a0.is_finite() || harmonics.iter().any(|h| !h.cos.is_finite() || !h.sin.is_finite()) {
            return Err(GeometryError::NonFiniteCoefficient);
        }
        let mut merged: Vec<Harmonic> = Vec::new();
        for h in harmonics {
            if h.k == 0 {
                return Err(GeometryError::ZeroHarmonic);
            }
            match merged.iter_mut().find(|m| m.k == h.k) {
                Some(m) => {
                    m.cos += h.cos;
                    m.sin += h.sin;
                }
                None => merged.push(*h),
            }
        }
        merged.sort_by_key(|h| h.k);

        match kind {
            SectionKind::Strip1D => {
                if !merged.is_empty() {
                    return Err(GeometryError::UnexpectedHarmonics(kind));
                }
                return Ok(Self { kind, a0: 1.0, harmonics: Vec::new() });
            }
            SectionKind::Disk => {
                if merged.iter().any(|h| h.cos != 0.0 || h.sin != 0.0) {
                    return Err(GeometryError::UnexpectedHarmonics(kind));
                }
                merged.clear();
            }
            SectionKind::StarShaped => {}
        }

        let section = Self { kind, a0, harmonics: merged };
        section.validate()?;
        Ok(section)
    }

    pub fn disk(radius: f64) -> Result<Self, GeometryError> {
        Self::new(SectionKind::Disk, radius, &[])
    }

    pub fn unit_disk() -> Self {
        Self::disk(1.0).expect("unit disk is valid")
    }

    pub fn strip() -> Self {
        Self { kind: SectionKind::Strip1D, a0: 1.0, harmonics: Vec::new() }
    }

    pub fn star(a0: f64, harmonics: &[Harmonic]) -> Result<Self, GeometryError> {
        Self::new(SectionKind::StarShaped, a0, harmonics)
    }

    /// Parses `{"kind": "...", "a0": ..., "harmonics": [[k, ak, bk], ...]}`.
    pub fn from_json(text: &str) -> Result<Self, GeometryError> {
        let spec: SectionSpec = serde_json::from_str(text).map_err(|e| GeometryError::Json(e.to_string()))?;
        spec.build()
    }

    fn validate(&self) -> Result<(), GeometryError> {
        let thetas = (0..BOUNDARY_SAMPLES).map(|j| 2.0 * PI * j as f64 / BOUNDARY_SAMPLES as f64);
        if let Some((theta, radius)) =
            thetas.clone().map(|t| (t, self.radius(t))).min_by(|a, b| a.1.total_cmp(&b.1)).filter(|&(_, r)| r <= 0.0)
        {
            return Err(GeometryError::NonPositiveRadius { theta, radius });
        }
        for theta in thetas {
            let r = self.radius(theta);
            let dr = self.radius_d1(theta);
            let alignment = r / (r * r + dr * dr).sqrt();
            if alignment < MIN_RAY_ALIGNMENT {
                return Err(GeometryError::NotStarShaped { theta, alignment });
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> SectionKind {
        self.kind
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn harmonics(&self) -> &[Harmonic] {
        &self.harmonics
    }

    pub fn n_harmonics(&self) -> usize {
        self.harmonics.len()
    }

    pub fn is_strip(&self) -> bool {
        self.kind == SectionKind::Strip1D
    }

    pub fn radius(&self, theta: f64) -> f64 {
        self.harmonics.iter().fold(self.a0, |acc, h| {
            let (s, c) = (h.k as f64 * theta).sin_cos();
            acc + h.cos * c + h.sin * s
        })
    }

    pub fn radius_d1(&self, theta: f64) -> f64 {
        self.harmonics.iter().fold(0.0, |acc, h| {
            let k = h.k as f64;
            let (s, c) = (k * theta).sin_cos();
            acc + k * (h.sin * c - h.cos * s)
        })
    }

    pub fn radius_d2(&self, theta: f64) -> f64 {
        self.harmonics.iter().fold(0.0, |acc, h| {
            let k = h.k as f64;
            let (s, c) = (k * theta).sin_cos();
            acc - k * k * (h.cos * c + h.sin * s)
        })
    }

    /// Boundary point at polar angle `theta`.
    pub fn boundary_point(&self, theta: f64) -> [f64; 2] {
        let r = self.radius(theta);
        [r * theta.cos(), r * theta.sin()]
    }

    /// Signed curvature of the boundary, positive for a circle.
    pub fn curvature(&self, theta: f64) -> f64 {
        if self.is_strip() {
            return 0.0;
        }
        let r = self.radius(theta);
        let dr = self.radius_d1(theta);
        let ddr = self.radius_d2(theta);
        (r * r + 2.0 * dr * dr - r * ddr) / (r * r + dr * dr).powf(1.5)
    }

    /// `(area, perimeter)` by trapezoid quadrature on [`BOUNDARY_SAMPLES`] points.
    ///
    /// For the strip these are the length of ]0,1[ and the two end points.
    pub fn area_perimeter(&self) -> (f64, f64) {
        self.area_perimeter_with(BOUNDARY_SAMPLES)
    }

    pub fn area_perimeter_with(&self, samples: usize) -> (f64, f64) {
        if self.is_strip() {
            return (1.0, 2.0);
        }
        let dtheta = 2.0 * PI / samples as f64;
        let (mut area, mut perimeter) = (0.0, 0.0);
        for j in 0..samples {
            let theta = j as f64 * dtheta;
            let r = self.radius(theta);
            let dr = self.radius_d1(theta);
            area += 0.5 * r * r;
            perimeter += (r * r + dr * dr).sqrt();
        }
        (area * dtheta, perimeter * dtheta)
    }

    /// Stable hash of the coefficients, used to tag meshes.
    pub fn fingerprint(&self) -> u64 {
        let mut hasher = std::collections::hash_map::DefaultHasher::new();
        self.kind.hash(&mut hasher);
        self.a0.to_bits().hash(&mut hasher);
        for h in &self.harmonics {
            h.k.hash(&mut hasher);
            h.cos.to_bits().hash(&mut hasher);
            h.sin.to_bits().hash(&mut hasher);
        }
        hasher.finish()
    }
}

/// JSON form of a section.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionSpec {
    pub kind: SectionKind,
    #[serde(default = "one")]
    pub a0: f64,
    #[serde(default)]
    pub harmonics: Vec<(u32, f64, f64)>,
}

fn one() -> f64 {
    1.0
}

impl SectionSpec {
    pub fn build(&self) -> Result<CrossSection, GeometryError> {
        let harmonics: Vec<Harmonic> = self.harmonics.iter().map(|&(k, a, b)| Harmonic::new(k, a, b)).collect();
        CrossSection::new(self.kind, self.a0, &harmonics)
    }
}
