//! Cross-checks of the discrete solvers against closed-form disk and strip
//! solutions and independently computed reference values.

use std::f64::consts::PI;
use std::sync::Arc;

use pipeflow::fem::neumann_eigenvalue_1;
use pipeflow::poiseuille::*;
use pipeflow::{CrossSection, Harmonic, PoiseuilleError, SolverOptions, TriMesh};

fn disk_mesh(level: u32) -> Arc<TriMesh> {
    Arc::new(TriMesh::polar_refined(&CrossSection::unit_disk(), 4, 16, level).unwrap())
}

fn max_nodal_error(mesh: &TriMesh, values: &[f64], exact: impl Fn(f64) -> f64) -> f64 {
    mesh.vertices().iter().zip(values).map(|(&[x, y], v)| (v - exact((x * x + y * y).sqrt())).abs()).fold(0.0, f64::max)
}

/// `J1'(x)` from the power series of `J1`.
fn bessel_j1_prime(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut fact_k = 1.0;
    let mut fact_k1 = 1.0;
    for k in 0..40 {
        if k > 0 {
            fact_k *= k as f64;
        }
        fact_k1 *= (k + 1) as f64;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (2 * k + 1) as f64 / 2.0 * (x / 2.0).powi(2 * k) / (fact_k * fact_k1);
    }
    sum
}

fn first_j1_prime_root() -> f64 {
    let (mut lo, mut hi) = (1.5, 2.2);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if bessel_j1_prime(lo) * bessel_j1_prime(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Composite Simpson on [0, 1] with `n` (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let mut s = f(0.0) + f(1.0);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn bessel_root_oracle() {
    let root = first_j1_prime_root();
    assert!((root - 1.841_183_78).abs() < 1e-7, "{root}");
    assert!((root * root - 3.3900).abs() < 1e-4);
}

#[test]
fn neumann_eigenvalue_of_disk() {
    let lambda_exact = first_j1_prime_root().powi(2);
    let eig = neumann_eigenvalue_1(&disk_mesh(2), &SolverOptions::default()).unwrap();
    assert!((eig.lambda / lambda_exact - 1.0).abs() < 0.01, "{}", eig.lambda);
    assert!(eig.poincare_constant() < 4.0 / (PI * PI));
    assert!((eig.poincare_constant() - 0.295).abs() < 0.001);
}

#[test]
fn robin_profile_matches_closed_form() {
    for alpha in [0.1, 1.0, 4.0, 100.0] {
        let mut errors = Vec::new();
        for level in 0..4 {
            let mesh = disk_mesh(level);
            let sol = solve_robin(mesh.clone(), alpha, &SolverOptions::default()).unwrap();
            assert!((sol.flux - 1.0).abs() <= FLUX_TOLERANCE);
            assert!(sol.residual_rel <= 1e-10);
            assert!(sol.warnings.is_empty());
            errors.push(max_nodal_error(&mesh, sol.field.values(), |r| oracle_disk(alpha, r).0));
        }
        for w in errors.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 1.8, "alpha={alpha}: order {order}");
        }
    }
}

#[test]
fn robin_without_friction_is_constant() {
    let mesh = disk_mesh(2);
    let sol = solve_robin(mesh.clone(), 0.0, &SolverOptions::default()).unwrap();
    let expected = 1.0 / mesh.area();
    assert!(sol.field.values().iter().all(|v| (v - expected).abs() < 1e-9));
    assert!(sol.forcing_constant.abs() < 1e-9);
    assert!(sol.grad_l2 < 1e-8);
}

#[test]
fn gradient_norm_and_forcing() {
    // ‖∇φ_α‖ = 4α / ((α+4)√(2π)) by integrating |∇φ|² = (4αr/((α+4)π))² over the disk
    let exact = |alpha: f64| 4.0 * alpha / ((alpha + 4.0) * (2.0 * PI).sqrt());
    let mesh = disk_mesh(2);
    let problem = RobinProblem::new(mesh, SolverOptions::default()).unwrap();
    let four = problem.solve(4.0).unwrap();
    assert!((exact(4.0) - 2.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
    assert!((four.grad_l2 / exact(4.0) - 1.0).abs() < 0.01);
    assert!((four.forcing_constant / oracle_disk_forcing(4.0) - 1.0).abs() < 0.01);

    let small = problem.solve(0.01).unwrap();
    assert!((small.grad_l2 / 0.01 / (1.0 / (2.0 * PI).sqrt()) - 1.0).abs() < 0.02);
}

#[test]
fn flux_scaling() {
    let sol = solve_robin(disk_mesh(2), 4.0, &SolverOptions::default()).unwrap();
    let one = scale_to_flux(&sol, 1.0).unwrap();
    assert!((one.pressure_slope - 4.0 / PI).abs() < 0.01 * 4.0 / PI);
    let two = scale_to_flux(&sol, 2.0).unwrap();
    for (a, b) in one.velocity.values().iter().zip(two.velocity.values()) {
        assert_eq!(2.0 * a, *b);
    }
    let zero = scale_to_flux(&sol, 0.0).unwrap();
    assert!(zero.velocity.values().iter().all(|&v| v == 0.0));
    assert_eq!(zero.pressure_slope, 0.0);
    assert!(matches!(scale_to_flux(&sol, -1.0), Err(PoiseuilleError::InvalidFlux(_))));
}

#[test]
fn dirichlet_profile() {
    let mesh = disk_mesh(2);
    let sol = solve_dirichlet(mesh.clone(), &SolverOptions::default()).unwrap();
    assert!(sol.alpha.is_infinite());
    for (v, &value) in sol.field.values().iter().enumerate() {
        if mesh.is_boundary_vertex(v) {
            assert_eq!(value, 0.0);
        }
    }
    let err = max_nodal_error(&mesh, sol.field.values(), |r| 2.0 / PI * (1.0 - r * r));
    assert!(err < 5e-3, "{err}");
    assert!((sol.forcing_constant / (8.0 / PI) - 1.0).abs() < 0.01);
    assert!((sol.flux - 1.0).abs() <= FLUX_TOLERANCE);
}

#[test]
fn recovered_normal_flux_converges() {
    // ∂φ_∞/∂n = −4/π on the unit circle, so ∮ (∂φ_∞/∂n)² = 32/π
    let exact = 32.0 / PI;
    let errors: Vec<f64> = (1..4)
        .map(|level| {
            let problem = RobinProblem::new(disk_mesh(level), SolverOptions::default()).unwrap();
            (problem.dirichlet_limit().unwrap().normal_derivative_sq - exact).abs()
        })
        .collect();
    assert!(errors[1] / exact < 0.01, "{errors:?}");
    assert!(errors[0] / errors[1] > 3.0 && errors[1] / errors[2] > 3.0, "{errors:?}");
}

#[test]
fn dirichlet_gap_bounds() {
    let mesh = disk_mesh(2);
    let gaps = dirichlet_gaps(mesh.clone(), &[10.0, 100.0, 1000.0], &SolverOptions::default()).unwrap();
    let alpha100 = &gaps[1];
    assert!((alpha100.bound / (16.0 / (PI * 100.0)) - 1.0).abs() < 0.01, "{}", alpha100.bound);
    for g in &gaps {
        assert!(g.gap <= g.bound * 1.2);
        // the energy identity bounds gradient and boundary parts together
        assert!(g.gap + g.boundary_energy <= g.bound * 1.2);
    }
    for w in gaps.windows(2) {
        assert!(w[1].gap < w[0].gap);
        let slope = (w[1].gap / w[0].gap).ln() / (w[1].alpha / w[0].alpha).ln();
        assert!(slope <= -0.85, "{slope}");
    }
    let far = dirichlet_gap(mesh, 1e6, &SolverOptions::default()).unwrap();
    assert!(far.gap <= 1e-4);
    assert!(matches!(
        dirichlet_gap(disk_mesh(0), 0.0, &SolverOptions::default()),
        Err(PoiseuilleError::InvalidAlpha(_))
    ));
}

/// H¹ norms of the disk series terms from the geometric expansion of the
/// closed-form profile: `φ_0 = 1/π`, `φ_n = (1 − 2r²)(−1/4)^{n−1}/(4π)`.
fn series_h1_oracle(order: usize) -> Vec<f64> {
    let l2_shape = 2.0 * PI * simpson(|r| (1.0 - 2.0 * r * r).powi(2) * r, 2000);
    let grad_shape = 2.0 * PI * simpson(|r| (4.0 * r).powi(2) * r, 2000);
    let mut norms = vec![(PI * (1.0 / PI).powi(2)).sqrt()];
    for n in 1..=order {
        let coeff = 0.25f64.powi(n as i32 - 1) / (4.0 * PI);
        norms.push(coeff * (l2_shape + grad_shape).sqrt());
    }
    norms
}

#[test]
fn series_terms_on_disk() {
    let mesh = disk_mesh(2);
    let report = series_terms(mesh.clone(), 8, &SolverOptions::default()).unwrap();
    assert_eq!(report.terms.len(), 9);

    let phi0 = &report.terms[0];
    assert_eq!(phi0.const_n, 0.0);
    assert!(phi0.field.values().iter().all(|v| (v - 1.0 / mesh.area()).abs() < 1e-15));

    let phi1 = &report.terms[1];
    let err = max_nodal_error(&mesh, phi1.field.values(), |r| 1.0 / (4.0 * PI) - r * r / (2.0 * PI));
    assert!(err < 5e-3, "{err}");
    assert!((phi1.const_n / (2.0 / PI) - 1.0).abs() < 0.01);

    for t in &report.terms[1..] {
        assert!(t.field.integral().abs() <= 1e-8);
        assert!(t.compatibility_residual <= 1e-8);
        // Const_n = (2/π)(−1/4)^{n−1}
        let exact = 2.0 / PI * (-0.25f64).powi(t.n as i32 - 1);
        assert!((t.const_n - exact).abs() < 0.02 * exact.abs(), "n={}: {} vs {exact}", t.n, t.const_n);
    }

    let oracle = series_h1_oracle(8);
    let oracle_ratios: Vec<f64> = oracle.windows(2).map(|w| w[1] / w[0]).collect();
    let oracle_max = oracle_ratios.iter().copied().fold(0.0, f64::max);
    assert!((oracle_max - 0.7217).abs() < 1e-3, "{oracle_max}");
    assert!((report.ratio_estimate / oracle_max - 1.0).abs() < 0.01);
    assert!((report.tail_ratio - 0.25).abs() < 0.005);
    assert!((report.radius_estimate - 1.0 / report.ratio_estimate).abs() < 1e-15);

    for t in &report.terms[3..] {
        assert!(t.const_n.abs().powf(1.0 / t.n as f64) < 1.1 * report.ratio_estimate);
    }
}

#[test]
fn series_sum_matches_direct_solve() {
    let mesh = disk_mesh(2);
    let problem = RobinProblem::new(mesh, SolverOptions::default()).unwrap();
    let report = problem.series_terms(8).unwrap();
    for alpha in [0.1, 0.5, 1.0] {
        let sum = series_sum(&report, alpha, true).unwrap();
        let direct = problem.solve(alpha).unwrap();
        let diff = sum.field.sub(&direct.field).unwrap().l2_norm();
        // both live on the same mesh, so only truncation separates them
        assert!(diff <= sum.tail_bound * report.terms[0].h1_norm + 1e-9, "alpha={alpha}: {diff} vs {}", sum.tail_bound);
        assert!((sum.forcing_constant - direct.forcing_constant).abs() < 1e-3);
    }
    let zero = series_sum(&report, 0.0, true).unwrap();
    assert_eq!(zero.field.values(), report.terms[0].field.values());
    assert!(matches!(series_sum(&report, 3.0, true), Err(PoiseuilleError::DivergentSeries { .. })));
    assert!(series_sum(&report, 3.0, false).unwrap().tail_bound.is_infinite());
}

#[test]
fn sweep_on_disk() {
    let mesh = disk_mesh(2);
    let report = sweep_alpha(mesh, &default_alpha_grid(), &SolverOptions::default()).unwrap();
    assert_eq!(report.rows.len(), 26);
    assert!(report.rows.iter().all(|r| r.grad_l2.is_finite()));
    assert!(report.rows[0].bound_ratio.is_nan());
    let sup = 4.0 / (2.0 * PI).sqrt();
    assert!((report.fitted_c / sup - 1.0).abs() < 0.02, "{}", report.fitted_c);
    assert!((report.small_alpha_slope / (1.0 / (2.0 * PI).sqrt()) - 1.0).abs() < 0.02);
    assert!(report.grad_monotone);
    assert!(matches!(sweep_alpha(disk_mesh(0), &[], &SolverOptions::default()), Err(PoiseuilleError::EmptyGrid)));
}

#[test]
fn sweep_stable_on_lobed_section() {
    let lobed = CrossSection::star(1.0, &[Harmonic::new(3, 0.15, 0.0)]).unwrap();
    let grid = default_alpha_grid();
    let coarse =
        sweep_alpha(Arc::new(TriMesh::polar_refined(&lobed, 4, 16, 1).unwrap()), &grid, &SolverOptions::default())
            .unwrap();
    let fine =
        sweep_alpha(Arc::new(TriMesh::polar_refined(&lobed, 4, 16, 2).unwrap()), &grid, &SolverOptions::default())
            .unwrap();
    assert!(coarse.fitted_c.is_finite());
    assert!((fine.fitted_c / coarse.fitted_c - 1.0).abs() <= 0.05);
}

#[test]
fn strip_oracle() {
    for alpha in [0.0, 0.5, 6.0, 1e3] {
        let mid = oracle_strip(alpha, 0.5);
        assert!((mid - (6.0 * alpha / (6.0 + alpha) * 0.25 + 6.0 / (6.0 + alpha))).abs() < 1e-14);
        let flux = simpson(|x| oracle_strip(alpha, x), 1000);
        assert!((flux - 1.0).abs() < 1e-12);
        // Robin condition at both ends: -P'(0) + αP(0) = 0 and P'(1) + αP(1) = 0
        let h = 1e-6;
        let d0 = (oracle_strip(alpha, h) - oracle_strip(alpha, 0.0)) / h;
        let d1 = (oracle_strip(alpha, 1.0) - oracle_strip(alpha, 1.0 - h)) / h;
        let scale = 1.0 + alpha;
        assert!((-d0 + alpha * oracle_strip(alpha, 0.0)).abs() < 1e-4 * scale);
        assert!((d1 + alpha * oracle_strip(alpha, 1.0)).abs() < 1e-4 * scale);
    }
}

#[test]
fn disk_oracle_pointwise_values() {
    for alpha in [0.0, 1.0, 4.0, 50.0] {
        let (center, _) = oracle_disk(alpha, 0.0);
        assert!((center - 2.0 * (alpha + 2.0) / ((alpha + 4.0) * PI)).abs() < 1e-15);
        let (_, edge_grad) = oracle_disk(alpha, 1.0);
        assert!((edge_grad - 4.0 * alpha / ((alpha + 4.0) * PI)).abs() < 1e-15);
        // unit flux by radial quadrature
        let flux = 2.0 * PI * simpson(|r| oracle_disk(alpha, r).0 * r, 200);
        assert!((flux - 1.0).abs() < 1e-12);
    }
}

#[test]
fn critical_flux_table() {
    let grid = [0.0, 0.5, 1.0, 10.0, 1e3, 1e9];
    let report = critical_flux_disk(&grid).unwrap();
    assert!((report.rows[0].1 - PI / 2.0).abs() < 1e-15);
    assert!(report.strictly_decreasing);
    assert!(report.max_derivative < 0.0);
    assert_eq!(report.infimum, PI / 16.0);
    assert!((critical_flux_threshold(1e12) - PI / 16.0).abs() < 1e-11);
    assert!(critical_flux_disk(&[-1.0]).is_err());
}
