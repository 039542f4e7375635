use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use pipeflow::fmt::sig17;
use pipeflow::growth::{self, GrowthSpec};
use pipeflow::poiseuille::{self, default_alpha_grid, ProfileWarning, RobinProblem, RobinSolution};
use pipeflow::TriMesh;

use crate::config::Settings;
use crate::error::CliError;

type Out<'a> = &'a mut dyn Write;

fn kv(out: Out, key: &str, value: impl std::fmt::Display) -> Result<(), CliError> {
    writeln!(out, "{key}={value}").map_err(|e| CliError::io("<stdout>", e))
}

fn output_dir(settings: &Settings) -> Result<&Path, CliError> {
    std::fs::create_dir_all(&settings.out).map_err(|e| CliError::io(&settings.out, e))?;
    Ok(&settings.out)
}

fn write_csv(path: PathBuf, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))
}

fn build_mesh(settings: &Settings) -> Result<Arc<TriMesh>, CliError> {
    let mesh = TriMesh::polar_refined(&settings.section, settings.n_rings, settings.n_sectors, settings.level)?;
    Ok(Arc::new(mesh))
}

fn report_warnings(out: Out, sol: &RobinSolution) -> Result<(), CliError> {
    for w in &sol.warnings {
        match w {
            ProfileWarning::NegativeProfile { min } => {
                kv(out, "warning", format!("negative_profile min={}", sig17(*min)))?
            }
            ProfileWarning::NegativeForcing { value } => {
                kv(out, "warning", format!("negative_forcing value={}", sig17(*value)))?
            }
        }
    }
    Ok(())
}

pub fn solve(settings: &Settings, out: Out) -> Result<(), CliError> {
    let alpha = match settings.alphas.as_deref() {
        Some([a]) => *a,
        Some(_) => return Err(CliError::Config("solve takes exactly one alpha".into())),
        None => return Err(CliError::Config("solve needs --alpha or an `alpha` config key".into())),
    };
    let mesh = build_mesh(settings)?;
    let problem = RobinProblem::new(mesh.clone(), settings.opts)?;
    let sol = if alpha.is_infinite() { problem.solve_dirichlet()? } else { problem.solve(alpha)? };

    let dir = output_dir(settings)?;
    let rows =
        mesh.vertices().iter().zip(sol.field.values()).map(|(&[x, y], &phi)| vec![sig17(x), sig17(y), sig17(phi)]);
    write_csv(dir.join("solution.csv"), &["x", "y", "phi"], rows)?;
    let vtk_path = dir.join("solution.vtk");
    let file = File::create(&vtk_path).map_err(|e| CliError::io(&vtk_path, e))?;
    let mut vtk = BufWriter::new(file);
    mesh.write_vtk(&mut vtk, &[("phi", sol.field.values())])
        .and_then(|_| vtk.flush())
        .map_err(|e| CliError::io(&vtk_path, e))?;

    kv(out, "alpha", sig17(alpha))?;
    kv(out, "vertices", mesh.n_vertices())?;
    kv(out, "triangles", mesh.n_triangles())?;
    kv(out, "h_max", sig17(mesh.h_max()))?;
    kv(out, "forcing_constant", sig17(sol.forcing_constant))?;
    kv(out, "grad_l2", sig17(sol.grad_l2))?;
    kv(out, "flux", sig17(sol.flux))?;
    kv(out, "residual", sig17(sol.residual_rel))?;
    report_warnings(out, &sol)
}

pub fn sweep(settings: &Settings, out: Out) -> Result<(), CliError> {
    let alphas = settings.alphas.clone().unwrap_or_else(default_alpha_grid);
    let mesh = build_mesh(settings)?;
    let report = poiseuille::sweep_alpha(mesh, &alphas, &settings.opts)?;
    let dir = output_dir(settings)?;
    let rows = report.rows.iter().map(|r| vec![sig17(r.alpha), sig17(r.grad_l2), sig17(r.bound_ratio)]);
    write_csv(dir.join("sweep.csv"), &["alpha", "grad_l2", "bound_ratio"], rows)?;
    kv(out, "rows", report.rows.len())?;
    kv(out, "fitted_C", sig17(report.fitted_c))?;
    kv(out, "small_alpha_slope", sig17(report.small_alpha_slope))?;
    kv(out, "grad_monotone", report.grad_monotone)
}

pub fn series(settings: &Settings, out: Out) -> Result<(), CliError> {
    let alphas = settings.alphas.clone().unwrap_or_else(|| vec![0.5]);
    if let Some(bad) = alphas.iter().find(|a| !a.is_finite()) {
        return Err(CliError::Config(format!("series needs finite alpha, got {bad}")));
    }
    let mesh = build_mesh(settings)?;
    let problem = RobinProblem::new(mesh, settings.opts)?;
    let report = problem.series_terms(settings.order)?;
    let dir = output_dir(settings)?;

    let rows = report.terms.iter().enumerate().map(|(i, t)| {
        let ratio = if i == 0 { f64::NAN } else { t.h1_norm / report.terms[i - 1].h1_norm };
        vec![t.n.to_string(), sig17(t.const_n), sig17(t.h1_norm), sig17(ratio)]
    });
    write_csv(dir.join("series.csv"), &["n", "const_n", "h1_norm", "ratio"], rows)?;

    let mut comparison = Vec::with_capacity(alphas.len());
    for &alpha in &alphas {
        let sum = poiseuille::series_sum(&report, alpha, false)?;
        let direct = problem.solve(alpha)?;
        let diff = sum.field.sub(&direct.field).map_err(|e| CliError::Numerical(e.to_string()))?;
        comparison.push(vec![
            sig17(alpha),
            sig17(sum.product),
            sig17(sum.tail_bound),
            sig17(sum.forcing_constant),
            sig17(direct.forcing_constant),
            sig17(diff.l2_norm()),
            sig17(diff.h1_norm()),
        ]);
    }
    write_csv(
        dir.join("series_vs_direct.csv"),
        &["alpha", "product", "tail_bound", "series_forcing", "direct_forcing", "l2_diff", "h1_diff"],
        comparison,
    )?;

    kv(out, "order", report.order())?;
    kv(out, "ratio_estimate", sig17(report.ratio_estimate))?;
    kv(out, "radius_estimate", sig17(report.radius_estimate))?;
    kv(out, "tail_ratio", sig17(report.tail_ratio))?;
    let worst = report.terms.iter().map(|t| t.compatibility_residual).fold(0.0, f64::max);
    kv(out, "max_compatibility_residual", sig17(worst))
}

pub fn limit(settings: &Settings, out: Out) -> Result<(), CliError> {
    let alphas = settings.alphas.clone().unwrap_or_else(|| vec![10.0, 100.0, 1000.0]);
    let mesh = build_mesh(settings)?;
    let problem = RobinProblem::new(mesh, settings.opts)?;
    let limit = problem.dirichlet_limit()?;
    let gaps = poiseuille::dirichlet_gaps(problem.mesh().clone(), &alphas, &settings.opts)?;
    let dir = output_dir(settings)?;
    let rows = gaps.iter().map(|g| vec![sig17(g.alpha), sig17(g.gap), sig17(g.bound)]);
    write_csv(dir.join("dirichlet_gap.csv"), &["alpha", "gap", "bound"], rows)?;

    kv(out, "rows", gaps.len())?;
    kv(out, "c_inf", sig17(limit.phi_inf.forcing_constant))?;
    kv(out, "normal_derivative_sq", sig17(limit.normal_derivative_sq))?;
    if gaps.len() >= 2 {
        kv(out, "decay_slope", sig17(loglog_slope(&gaps.iter().map(|g| (g.alpha, g.gap)).collect::<Vec<_>>())))?;
    }
    Ok(())
}

/// Least-squares slope of `ln y` on `ln x`.
fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x / n, b + y / n));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + (x - mx) * (y - my), b + (x - mx).powi(2)));
    sxy / sxx
}

pub const DEFAULT_CRITICAL_GRID: [f64; 10] = [0.0, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0, 1e3, 1e6];

pub fn critical_flux(alphas: Option<Vec<f64>>, out: Out) -> Result<(), CliError> {
    let alphas = alphas.unwrap_or_else(|| DEFAULT_CRITICAL_GRID.to_vec());
    let report = poiseuille::critical_flux_disk(&alphas)?;
    writeln!(out, "alpha,threshold").map_err(|e| CliError::io("<stdout>", e))?;
    for (a, phi) in &report.rows {
        writeln!(out, "{},{}", sig17(*a), sig17(*phi)).map_err(|e| CliError::io("<stdout>", e))?;
    }
    kv(out, "phi0", sig17(PI / 16.0))?;
    kv(out, "strictly_decreasing", report.strictly_decreasing)?;
    kv(out, "max_derivative", sig17(report.max_derivative))
}

pub fn growth(samples: &Path, c: f64, m: f64, tau1: f64, out: Out) -> Result<(), CliError> {
    let spec = GrowthSpec::new(c, m, tau1)?;
    let file = File::open(samples).map_err(|e| CliError::io(samples, e))?;
    let data = growth::read_samples(file)?;
    let verdict = growth::classify(&data, &spec)?;
    kv(out, "classification", verdict.classification)?;
    kv(out, "exponent", sig17(verdict.exponent))?;
    kv(out, "consistent", verdict.consistent)?;
    kv(out, "witness", verdict.witness.map_or_else(|| "none".to_string(), sig17))?;
    kv(out, "tail_slope", verdict.tail_slope.map_or_else(|| "none".to_string(), sig17))?;
    kv(out, "discrete", verdict.discrete)
}
