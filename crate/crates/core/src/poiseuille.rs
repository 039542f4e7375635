//! Poiseuille profiles under the Navier-slip condition.
//!
//! Everything is normalised to unit flux: the profile `φ_α` solves
//!
//! ```text
//! -Δφ_α = c_α   in Σ,     ∂φ_α/∂n + α φ_α = 0   on ∂Σ,     ∫ φ_α = 1,
//! ```
//!
//! and the velocity for flux `Φ` is `Φ φ_α` with axial pressure slope `Φ c_α`.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{FemError, PoiseuilleError};
use crate::fem::{assemble_boundary_mass, assemble_load, assemble_stiffness};
use crate::field::ScalarField;
use crate::mesh::TriMesh;
use crate::saddle::{solve_constrained, SolverOptions};
use crate::sparse::{dot, norm, SparseSym};

/// Allowed deviation of the discrete flux from one.
pub const FLUX_TOLERANCE: f64 = 1e-8;

/// Relative slack on the Dirichlet-gap bound that absorbs the O(h)
/// normal-derivative recovery.
pub const GAP_SLACK: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileWarning {
    NegativeProfile { min: f64 },
    NegativeForcing { value: f64 },
}

#[derive(Debug, Clone)]
pub struct RobinSolution {
    /// Friction ratio; `f64::INFINITY` for the no-slip profile.
    pub alpha: f64,
    pub field: ScalarField,
    pub forcing_constant: f64,
    pub flux: f64,
    pub grad_l2: f64,
    pub residual_rel: f64,
    pub warnings: Vec<ProfileWarning>,
}

impl RobinSolution {
    fn new(alpha: f64, field: ScalarField, forcing_constant: f64, residual_rel: f64) -> Self {
        let flux = field.integral();
        let grad_l2 = field.h1_seminorm();
        let mut warnings = Vec::new();
        let min = field.min();
        if min < -1e-10 * field.max().abs().max(1.0) {
            warnings.push(ProfileWarning::NegativeProfile { min });
        }
        if forcing_constant < -1e-10 {
            warnings.push(ProfileWarning::NegativeForcing { value: forcing_constant });
        }
        Self { alpha, field, forcing_constant, flux, grad_l2, residual_rel, warnings }
    }
}

/// Assembled operators of one mesh, reused across friction ratios.
#[derive(Debug, Clone)]
pub struct RobinProblem {
    mesh: Arc<TriMesh>,
    stiffness: SparseSym,
    boundary_mass: SparseSym,
    load: Vec<f64>,
    opts: SolverOptions,
}

impl RobinProblem {
    pub fn new(mesh: Arc<TriMesh>, opts: SolverOptions) -> Result<Self, PoiseuilleError> {
        let stiffness = assemble_stiffness(&mesh)?;
        let boundary_mass = assemble_boundary_mass(&mesh);
        let load = assemble_load(&mesh);
        Ok(Self { mesh, stiffness, boundary_mass, load, opts })
    }

    pub fn mesh(&self) -> &Arc<TriMesh> {
        &self.mesh
    }

    pub fn area(&self) -> f64 {
        self.load.iter().sum()
    }

    fn field(&self, values: Vec<f64>) -> Result<ScalarField, PoiseuilleError> {
        Ok(ScalarField::new(self.mesh.clone(), values)?)
    }

    /// Robin profile for a finite friction ratio `alpha ≥ 0`.
    pub fn solve(&self, alpha: f64) -> Result<RobinSolution, PoiseuilleError> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(PoiseuilleError::InvalidAlpha(alpha));
        }
        let operator = self.stiffness.add_scaled(&self.boundary_mass, alpha);
        let zero = vec![0.0; self.load.len()];
        let sol = solve_constrained(&operator, &self.load, &zero, 1.0, &self.opts)?;
        let field = self.field(sol.x)?;
        Ok(RobinSolution::new(alpha, field, sol.multiplier, sol.residual_rel))
    }

    /// No-slip profile, boundary values eliminated strongly.
    pub fn solve_dirichlet(&self) -> Result<RobinSolution, PoiseuilleError> {
        let interior: Vec<usize> = (0..self.mesh.n_vertices()).filter(|&v| !self.mesh.is_boundary_vertex(v)).collect();
        let reduced = self.stiffness.principal_submatrix(&interior);
        let load: Vec<f64> = interior.iter().map(|&i| self.load[i]).collect();
        let sol = solve_constrained(&reduced, &load, &vec![0.0; interior.len()], 1.0, &self.opts)?;
        let mut values = vec![0.0; self.mesh.n_vertices()];
        for (&i, v) in interior.iter().zip(sol.x) {
            values[i] = v;
        }
        let field = self.field(values)?;
        Ok(RobinSolution::new(f64::INFINITY, field, sol.multiplier, sol.residual_rel))
    }

    /// Terms `φ_0 … φ_N` of the expansion of `φ_α` in powers of `α`.
    pub fn series_terms(&self, order: usize) -> Result<ExpansionReport, PoiseuilleError> {
        if order < 1 {
            return Err(PoiseuilleError::BadOrder);
        }
        let area = self.area();
        let phi0 = ScalarField::constant(self.mesh.clone(), 1.0 / area);
        let mut terms =
            vec![SeriesTerm { n: 0, h1_norm: phi0.h1_norm(), field: phi0, const_n: 0.0, compatibility_residual: 0.0 }];
        for n in 1..=order {
            let prev = &terms[n - 1].field;
            let rhs: Vec<f64> = self.boundary_mass.matvec(prev.values()).into_iter().map(|v| -v).collect();
            let sol = solve_constrained(&self.stiffness, &self.load, &rhs, 0.0, &self.opts)?;
            let compatibility_residual = (sol.multiplier * area - prev.boundary_integral()).abs();
            let field = self.field(sol.x)?;
            terms.push(SeriesTerm {
                n,
                h1_norm: field.h1_norm(),
                field,
                const_n: sol.multiplier,
                compatibility_residual,
            });
        }
        let ratios: Vec<f64> = terms.windows(2).map(|w| w[1].h1_norm / w[0].h1_norm).collect();
        let ratio_estimate = ratios.iter().copied().fold(0.0, f64::max);
        let tail_ratio = *ratios.last().expect("order >= 1");
        Ok(ExpansionReport { terms, ratio_estimate, radius_estimate: 1.0 / ratio_estimate, tail_ratio })
    }

    /// Solves every `alpha` in the grid; rows come back sorted by `alpha`.
    pub fn sweep(&self, alphas: &[f64]) -> Result<SweepReport, PoiseuilleError> {
        if alphas.is_empty() {
            return Err(PoiseuilleError::EmptyGrid);
        }
        let mut rows = alphas
            .par_iter()
            .map(|&alpha| {
                let sol = self.solve(alpha)?;
                let bound_ratio = if alpha > 0.0 { sol.grad_l2 * (1.0 + alpha) / alpha } else { f64::NAN };
                Ok(SweepRow { alpha, grad_l2: sol.grad_l2, bound_ratio })
            })
            .collect::<Result<Vec<_>, PoiseuilleError>>()?;
        rows.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));

        let fitted_c = rows.iter().filter(|r| r.alpha > 0.0).map(|r| r.bound_ratio).fold(f64::NAN, f64::max);
        let positive: Vec<&SweepRow> = rows.iter().filter(|r| r.alpha > 0.0).collect();
        let small_alpha_slope = match positive.as_slice() {
            [] => f64::NAN,
            [only] => only.grad_l2 / only.alpha,
            [a, b, ..] => {
                let (sa, sb) = (a.grad_l2 / a.alpha, b.grad_l2 / b.alpha);
                sa - a.alpha * (sb - sa) / (b.alpha - a.alpha)
            }
        };
        let grad_monotone = rows.windows(2).all(|w| w[1].grad_l2 >= w[0].grad_l2 - 1e-12);
        Ok(SweepReport { rows, fitted_c, small_alpha_slope, grad_monotone })
    }

    /// Shared no-slip data for [`DirichletLimit::gap`].
    ///
    /// The normal derivative of `φ_∞` is recovered variationally: on boundary
    /// rows the discrete residual `c m − K φ` equals `−∮ ∂φ/∂n ψ_i`, so the
    /// flux solves a boundary-mass system.
    pub fn dirichlet_limit(&self) -> Result<DirichletLimit, PoiseuilleError> {
        let phi_inf = self.solve_dirichlet()?;
        let boundary: Vec<usize> = (0..self.mesh.n_vertices()).filter(|&v| self.mesh.is_boundary_vertex(v)).collect();
        let k_phi = self.stiffness.matvec(phi_inf.field.values());
        let residual: Vec<f64> = boundary.iter().map(|&i| phi_inf.forcing_constant * self.load[i] - k_phi[i]).collect();
        let mass = self.boundary_mass.principal_submatrix(&boundary);
        let flux = conjugate_gradient(&mass, &residual, 1e-14, 10 * boundary.len() + 100)?;
        let flux_sq = dot(&flux, &mass.matvec(&flux));
        Ok(DirichletLimit { phi_inf, normal_derivative_sq: flux_sq })
    }
}

/// Jacobi-preconditioned CG for a small SPD system.
fn conjugate_gradient(a: &SparseSym, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>, FemError> {
    let diag = a.diagonal();
    let b_norm = norm(b);
    let mut x = vec![0.0; b.len()];
    if b_norm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for _ in 0..max_iter {
        let ap = a.matvec(&p);
        let step = rz / dot(&p, &ap);
        for i in 0..x.len() {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        if norm(&r) <= tol * b_norm {
            return Ok(x);
        }
        z = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..p.len() {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(FemError::SolverStagnation { iterations: max_iter, residual: norm(&r) / b_norm })
}

#[derive(Debug, Clone)]
pub struct SeriesTerm {
    pub n: usize,
    pub field: ScalarField,
    pub const_n: f64,
    pub h1_norm: f64,
    /// `|Const_n |Σ| − ∮ φ_{n−1} dS|`.
    pub compatibility_residual: f64,
}

#[derive(Debug, Clone)]
pub struct ExpansionReport {
    pub terms: Vec<SeriesTerm>,
    /// Largest ratio `‖φ_n‖_{H¹} / ‖φ_{n−1}‖_{H¹}` over the computed terms.
    pub ratio_estimate: f64,
    pub radius_estimate: f64,
    /// Ratio of the last two terms.
    pub tail_ratio: f64,
}

impl ExpansionReport {
    pub fn order(&self) -> usize {
        self.terms.len() - 1
    }
}

#[derive(Debug, Clone)]
pub struct SeriesSum {
    pub field: ScalarField,
    /// `Σ αⁿ Const_n`, the series estimate of the forcing constant.
    pub forcing_constant: f64,
    /// `α · ratio_estimate`.
    pub product: f64,
    /// `(α r)^{N+1} / (1 − α r)` relative to `‖φ_0‖_{H¹}`; infinite outside
    /// the estimated radius.
    pub tail_bound: f64,
}

/// Partial sum `Σ_{n≤N} αⁿ φ_n`. In strict mode `α · ratio ≥ 1` is an error.
pub fn series_sum(report: &ExpansionReport, alpha: f64, strict: bool) -> Result<SeriesSum, PoiseuilleError> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(PoiseuilleError::InvalidAlpha(alpha));
    }
    let product = alpha * report.ratio_estimate;
    if product >= 1.0 && strict {
        return Err(PoiseuilleError::DivergentSeries { product });
    }
    let mut field = report.terms[0].field.clone();
    let mut forcing_constant = report.terms[0].const_n;
    let mut power = 1.0;
    for term in &report.terms[1..] {
        power *= alpha;
        field = field.axpy(power, &term.field)?;
        forcing_constant += power * term.const_n;
    }
    let tail_bound =
        if product < 1.0 { product.powi(report.order() as i32 + 1) / (1.0 - product) } else { f64::INFINITY };
    Ok(SeriesSum { field, forcing_constant, product, tail_bound })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub grad_l2: f64,
    /// `grad_l2 (1 + α) / α`; NaN at `α = 0`.
    pub bound_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Maximum of `bound_ratio` over the positive part of the grid.
    pub fitted_c: f64,
    /// `grad_l2 / α` extrapolated linearly to `α = 0` from the two smallest
    /// positive grid points.
    pub small_alpha_slope: f64,
    /// Whether `grad_l2` was nondecreasing along the grid (recorded only).
    pub grad_monotone: bool,
}

/// `count` log-spaced points in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
        }
    }
}

/// `α = 0` followed by 25 log-spaced points in `[1e-2, 1e3]`.
pub fn default_alpha_grid() -> Vec<f64> {
    std::iter::once(0.0).chain(log_grid(1e-2, 1e3, 25)).collect()
}

#[derive(Debug, Clone)]
pub struct DirichletLimit {
    pub phi_inf: RobinSolution,
    /// `∮ (∂φ_∞/∂n)² dS` with the variationally recovered normal derivative.
    pub normal_derivative_sq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirichletGap {
    pub alpha: f64,
    /// `‖∇(φ_α − φ_∞)‖²_{L²}`.
    pub gap: f64,
    /// `(1/2α) ∮ (∂φ_∞/∂n)² dS`.
    pub bound: f64,
    /// `α/2 ∮ (φ_α − φ_∞)² dS`, the boundary part of the energy.
    pub boundary_energy: f64,
}

impl DirichletLimit {
    pub fn bound(&self, alpha: f64) -> f64 {
        self.normal_derivative_sq / (2.0 * alpha)
    }

    pub fn gap(&self, robin: &RobinSolution) -> Result<DirichletGap, PoiseuilleError> {
        let alpha = robin.alpha;
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(PoiseuilleError::InvalidAlpha(alpha));
        }
        let eta = robin.field.sub(&self.phi_inf.field)?;
        let gap = eta.h1_seminorm().powi(2);
        let bound = self.bound(alpha);
        if gap > bound * (1.0 + GAP_SLACK) {
            return Err(PoiseuilleError::GapBoundViolated { alpha, gap, bound });
        }
        let boundary_energy = 0.5 * alpha * eta.boundary_l2().powi(2);
        Ok(DirichletGap { alpha, gap, bound, boundary_energy })
    }
}

pub fn solve_robin(mesh: Arc<TriMesh>, alpha: f64, opts: &SolverOptions) -> Result<RobinSolution, PoiseuilleError> {
    RobinProblem::new(mesh, *opts)?.solve(alpha)
}

pub fn solve_dirichlet(mesh: Arc<TriMesh>, opts: &SolverOptions) -> Result<RobinSolution, PoiseuilleError> {
    RobinProblem::new(mesh, *opts)?.solve_dirichlet()
}

pub fn series_terms(
    mesh: Arc<TriMesh>,
    order: usize,
    opts: &SolverOptions,
) -> Result<ExpansionReport, PoiseuilleError> {
    RobinProblem::new(mesh, *opts)?.series_terms(order)
}

pub fn sweep_alpha(mesh: Arc<TriMesh>, alphas: &[f64], opts: &SolverOptions) -> Result<SweepReport, PoiseuilleError> {
    RobinProblem::new(mesh, *opts)?.sweep(alphas)
}

pub fn dirichlet_gap(mesh: Arc<TriMesh>, alpha: f64, opts: &SolverOptions) -> Result<DirichletGap, PoiseuilleError> {
    let problem = RobinProblem::new(mesh, *opts)?;
    let limit = problem.dirichlet_limit()?;
    limit.gap(&problem.solve(alpha)?)
}

/// Gaps for several friction ratios, in input order.
pub fn dirichlet_gaps(
    mesh: Arc<TriMesh>,
    alphas: &[f64],
    opts: &SolverOptions,
) -> Result<Vec<DirichletGap>, PoiseuilleError> {
    let problem = RobinProblem::new(mesh, *opts)?;
    let limit = problem.dirichlet_limit()?;
    alphas.par_iter().map(|&a| limit.gap(&problem.solve(a)?)).collect()
}

/// Unit-flux profile on the unit disk and its gradient magnitude at radius `r`.
/// `alpha = ∞` gives the no-slip profile `(2/π)(1 − r²)`.
pub fn oracle_disk(alpha: f64, r: f64) -> (f64, f64) {
    if alpha.is_infinite() {
        return (2.0 / PI * (1.0 - r * r), 4.0 / PI * r);
    }
    let value = 2.0 * ((alpha + 2.0) - alpha * r * r) / ((alpha + 4.0) * PI);
    let grad = 4.0 * alpha / ((alpha + 4.0) * PI) * r;
    (value, grad)
}

/// Forcing constant of the unit-disk profile, `8α / ((α + 4)π)`.
pub fn oracle_disk_forcing(alpha: f64) -> f64 {
    if alpha.is_infinite() {
        8.0 / PI
    } else {
        8.0 * alpha / ((alpha + 4.0) * PI)
    }
}

/// Unit-flux profile of the channel `]0,1[`.
pub fn oracle_strip(alpha: f64, x: f64) -> f64 {
    6.0 * alpha / (6.0 + alpha) * (x - x * x) + 6.0 / (6.0 + alpha)
}

/// Flux below which uniqueness is guaranteed on the unit disk:
/// `(α + 4)π / (8(2α + 1))`, tending to `π/16` as `α → ∞`.
pub fn critical_flux_threshold(alpha: f64) -> f64 {
    if alpha.is_infinite() {
        return PI / 16.0;
    }
    (alpha + 4.0) * PI / (8.0 * (2.0 * alpha + 1.0))
}

/// `d/dα (α + 4)/(2α + 1) = −7/(2α + 1)²`.
pub fn critical_flux_ratio_derivative(alpha: f64) -> f64 {
    -7.0 / (2.0 * alpha + 1.0).powi(2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalFluxReport {
    /// `(α, Φ(α))` in grid order.
    pub rows: Vec<(f64, f64)>,
    /// `π/16`, approached as `α → ∞`.
    pub infimum: f64,
    /// Largest derivative of `(α + 4)/(2α + 1)` on the grid; negative
    /// certifies monotone decrease.
    pub max_derivative: f64,
    pub strictly_decreasing: bool,
}

pub fn critical_flux_disk(alphas: &[f64]) -> Result<CriticalFluxReport, PoiseuilleError> {
    if let Some(&bad) = alphas.iter().find(|a| a.is_nan() || **a < 0.0) {
        return Err(PoiseuilleError::InvalidAlpha(bad));
    }
    let rows: Vec<(f64, f64)> = alphas.iter().map(|&a| (a, critical_flux_threshold(a))).collect();
    let max_derivative = alphas
        .iter()
        .filter(|a| a.is_finite())
        .map(|&a| critical_flux_ratio_derivative(a))
        .fold(f64::NEG_INFINITY, f64::max);
    let strictly_decreasing = rows.windows(2).all(|w| w[0].0 < w[1].0 && w[1].1 < w[0].1);
    Ok(CriticalFluxReport { rows, infimum: PI / 16.0, max_derivative, strictly_decreasing })
}

#[derive(Debug, Clone)]
pub struct PoiseuilleProfile {
    pub robin: RobinSolution,
    pub flux_phi: f64,
    pub velocity: ScalarField,
    /// The pressure is `−pressure_slope · x₃`.
    pub pressure_slope: f64,
}

pub fn scale_to_flux(robin: &RobinSolution, flux_phi: f64) -> Result<PoiseuilleProfile, PoiseuilleError> {
    if !(flux_phi.is_finite() && flux_phi >= 0.0) {
        return Err(PoiseuilleError::InvalidFlux(flux_phi));
    }
    Ok(PoiseuilleProfile {
        velocity: robin.field.scaled(flux_phi),
        pressure_slope: flux_phi * robin.forcing_constant,
        flux_phi,
        robin: robin.clone(),
    })
}
