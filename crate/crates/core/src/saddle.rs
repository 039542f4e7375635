//! Bordered symmetric systems
//!
//! ```text
//! [  A   -m ] [x]   [ rhs     ]
//! [ -mᵀ   0 ] [c] = [ -target ]
//! ```
//!
//! i.e. `A x = rhs + c m` subject to `mᵀx = target`. The multiplier `c` is
//! the unknown forcing constant of the cross-section problems.

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};

use crate::error::FemError;
use crate::sparse::{dot, norm, SparseSym};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverMethod {
    /// MINRES first, sparse LU of the bordered matrix if it stagnates.
    #[default]
    Auto,
    Minres,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    /// Iteration cap for MINRES; `None` picks `max(1000, 4 (n + 1))`.
    pub max_iter: Option<usize>,
    pub method: SolverMethod,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOLERANCE, max_iter: None, method: SolverMethod::Auto }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaddleSolution {
    pub x: Vec<f64>,
    pub multiplier: f64,
    /// `‖b − K z‖ / ‖b‖` for the full bordered system.
    pub residual_rel: f64,
    /// MINRES iterations, 0 when solved directly.
    pub iterations: usize,
}

struct Bordered<'a> {
    a: &'a SparseSym,
    m: &'a [f64],
}

impl Bordered<'_> {
    fn n(&self) -> usize {
        self.a.dim() + 1
    }

    fn apply(&self, z: &[f64], out: &mut [f64]) {
        let n = self.a.dim();
        let c = z[n];
        self.a.matvec_into(&z[..n], &mut out[..n]);
        for (o, mi) in out[..n].iter_mut().zip(self.m) {
            *o -= c * mi;
        }
        out[n] = -dot(self.m, &z[..n]);
    }

    fn residual_rel(&self, z: &[f64], b: &[f64]) -> f64 {
        let mut kz = vec![0.0; self.n()];
        self.apply(z, &mut kz);
        let r: Vec<f64> = b.iter().zip(&kz).map(|(bi, ki)| bi - ki).collect();
        let bn = norm(b);
        if bn == 0.0 {
            norm(&r)
        } else {
            norm(&r) / bn
        }
    }
}

/// Solves the bordered system. See the module docs for the block layout.
pub fn solve_constrained(
    a: &SparseSym,
    constraint: &[f64],
    rhs: &[f64],
    target: f64,
    opts: &SolverOptions,
) -> Result<SaddleSolution, FemError> {
    let n = a.dim();
    if constraint.len() != n {
        return Err(FemError::DimensionMismatch { expected: n, got: constraint.len() });
    }
    if rhs.len() != n {
        return Err(FemError::DimensionMismatch { expected: n, got: rhs.len() });
    }
    if constraint.iter().all(|&v| v == 0.0) {
        return Err(FemError::ZeroConstraint);
    }
    let system = Bordered { a, m: constraint };
    let mut b = rhs.to_vec();
    b.push(-target);

    let finish = |z: Vec<f64>, iterations: usize| {
        let residual_rel = system.residual_rel(&z, &b);
        let mut x = z;
        let multiplier = x.pop().unwrap_or(0.0);
        SaddleSolution { x, multiplier, residual_rel, iterations }
    };

    match opts.method {
        SolverMethod::Direct => {
            let z = direct(a, constraint, &b)?;
            let sol = finish(z, 0);
            if sol.residual_rel > opts.tol {
                return Err(FemError::SolverStagnation { iterations: 0, residual: sol.residual_rel });
            }
            Ok(sol)
        }
        SolverMethod::Minres | SolverMethod::Auto => {
            let cap = opts.max_iter.unwrap_or_else(|| (4 * (n + 1)).max(1000));
            let (z, iterations) = minres(&system, &b, opts.tol, cap);
            let sol = finish(z, iterations);
            if sol.residual_rel <= opts.tol {
                return Ok(sol);
            }
            if opts.method == SolverMethod::Minres {
                return Err(FemError::SolverStagnation { iterations, residual: sol.residual_rel });
            }
            let z = direct(a, constraint, &b)?;
            let fallback = finish(z, 0);
            if fallback.residual_rel > opts.tol {
                return Err(FemError::SolverStagnation { iterations, residual: fallback.residual_rel });
            }
            Ok(fallback)
        }
    }
}

/// Jacobi-preconditioned MINRES on the bordered operator. Returns the
/// iterate and the iteration count.
fn minres(system: &Bordered<'_>, b: &[f64], tol: f64, cap: usize) -> (Vec<f64>, usize) {
    let n = system.n();
    let a_diag = system.a.diagonal();
    let mut inv_diag: Vec<f64> = a_diag.iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let schur: f64 = system.m.iter().zip(&inv_diag).map(|(mi, di)| mi * mi * di).sum();
    inv_diag.push(if schur > 0.0 { 1.0 / schur } else { 1.0 });
    let precond = |r: &[f64], out: &mut [f64]| {
        for ((o, ri), di) in out.iter_mut().zip(r).zip(&inv_diag) {
            *o = ri * di;
        }
    };

    let mut x = vec![0.0; n];
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return (x, 0);
    }

    let mut r1 = b.to_vec();
    let mut r2 = b.to_vec();
    let mut y = vec![0.0; n];
    precond(&r1, &mut y);
    let beta1 = dot(&r1, &y).sqrt();
    let (mut oldb, mut beta) = (0.0, beta1);
    let (mut dbar, mut epsln, mut phibar) = (0.0, 0.0, beta1);
    let (mut cs, mut sn) = (-1.0f64, 0.0f64);
    let mut w = vec![0.0; n];
    let mut w1 = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let mut v = vec![0.0; n];

    for itn in 1..=cap {
        let s = 1.0 / beta;
        for (vi, yi) in v.iter_mut().zip(&y) {
            *vi = s * yi;
        }
        system.apply(&v, &mut y);
        if itn >= 2 {
            let f = beta / oldb;
            for (yi, ri) in y.iter_mut().zip(&r1) {
                *yi -= f * ri;
            }
        }
        let alfa = dot(&v, &y);
        let f = alfa / beta;
        for (yi, ri) in y.iter_mut().zip(&r2) {
            *yi -= f * ri;
        }
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        precond(&r2, &mut y);
        oldb = beta;
        beta = dot(&r2, &y).max(0.0).sqrt();

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        std::mem::swap(&mut w1, &mut w2);
        std::mem::swap(&mut w2, &mut w);
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
            x[i] += phi * w[i];
        }

        let estimate_small = phibar <= 0.1 * tol * beta1;
        if estimate_small || itn % 100 == 0 || beta == 0.0 {
            if system.residual_rel(&x, b) <= tol {
                return (x, itn);
            }
            if beta == 0.0 {
                return (x, itn);
            }
        }
    }
    (x, cap)
}

fn direct(a: &SparseSym, m: &[f64], b: &[f64]) -> Result<Vec<f64>, FemError> {
    let n = a.dim();
    let mut triplets: Vec<Triplet<usize, usize, f64>> = a.entries().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
    for (i, &mi) in m.iter().enumerate() {
        if mi != 0.0 {
            triplets.push(Triplet::new(i, n, -mi));
            triplets.push(Triplet::new(n, i, -mi));
        }
    }
    let matrix = SparseColMat::<usize, f64>::try_new_from_triplets(n + 1, n + 1, &triplets)
        .map_err(|_| FemError::IncompatibleSystem)?;
    let lu = matrix.sp_lu().map_err(|_| FemError::IncompatibleSystem)?;
    let rhs = Col::<f64>::from_fn(n + 1, |i| b[i]);
    let z = lu.solve(&rhs);
    let z: Vec<f64> = (0..n + 1).map(|i| z[i]).collect();
    if z.iter().any(|v| !v.is_finite()) {
        return Err(FemError::IncompatibleSystem);
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::SymTriplets;

    fn scalar(v: f64) -> SparseSym {
        let mut t = SymTriplets::new(1);
        t.add(0, 0, v);
        t.build()
    }

    #[test]
    fn toy_two_by_two() {
        for method in [SolverMethod::Minres, SolverMethod::Direct, SolverMethod::Auto] {
            let opts = SolverOptions { method, ..SolverOptions::default() };
            let sol = solve_constrained(&scalar(2.0), &[1.0], &[0.0], 1.0, &opts).unwrap();
            assert!((sol.x[0] - 1.0).abs() < 1e-12, "{method:?}");
            assert!((sol.multiplier - 2.0).abs() < 1e-12, "{method:?}");
            assert!(sol.residual_rel <= 1e-10);
        }
    }

    #[test]
    fn singular_neumann_like_block() {
        // 1D Laplacian with natural ends: singular, kernel = constants
        let n = 30;
        let mut t = SymTriplets::new(n);
        for i in 0..n - 1 {
            t.add(i, i, 1.0);
            t.add(i + 1, i + 1, 1.0);
            t.add(i, i + 1, -1.0);
        }
        let a = t.build();
        let m = vec![1.0; n];
        let rhs: Vec<f64> = (0..n)
            .map(|i| {
                if i == 0 {
                    1.0
                } else if i == n - 1 {
                    -1.0
                } else {
                    0.0
                }
            })
            .collect();
        let minres =
            solve_constrained(&a, &m, &rhs, 0.0, &SolverOptions { method: SolverMethod::Minres, ..Default::default() })
                .unwrap();
        let direct =
            solve_constrained(&a, &m, &rhs, 0.0, &SolverOptions { method: SolverMethod::Direct, ..Default::default() })
                .unwrap();
        for (x, y) in minres.x.iter().zip(&direct.x) {
            assert!((x - y).abs() < 1e-8);
        }
        assert!(minres.multiplier.abs() < 1e-10);
        assert!(dot(&m, &minres.x).abs() < 1e-10);
    }

    #[test]
    fn incompatible_system() {
        // A = 0 with a constraint of rank one leaves a singular bordered matrix
        let mut t = SymTriplets::new(2);
        t.add(0, 0, 0.0);
        t.add(1, 1, 0.0);
        let a = t.build();
        let opts = SolverOptions { method: SolverMethod::Direct, ..Default::default() };
        let err = solve_constrained(&a, &[1.0, 1.0], &[1.0, 0.0], 1.0, &opts).unwrap_err();
        assert!(matches!(err, FemError::IncompatibleSystem | FemError::SolverStagnation { .. }), "{err:?}");
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            solve_constrained(&scalar(1.0), &[0.0], &[0.0], 1.0, &SolverOptions::default()),
            Err(FemError::ZeroConstraint)
        );
        assert!(matches!(
            solve_constrained(&scalar(1.0), &[1.0, 2.0], &[0.0], 1.0, &SolverOptions::default()),
            Err(FemError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn stagnation_reported() {
        let n = 200;
        let mut t = SymTriplets::new(n);
        for i in 0..n - 1 {
            t.add(i, i, 1.0);
            t.add(i + 1, i + 1, 1.0);
            t.add(i, i + 1, -1.0);
        }
        let a = t.build();
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let opts = SolverOptions { method: SolverMethod::Minres, max_iter: Some(3), tol: 1e-12 };
        let err = solve_constrained(&a, &vec![1.0; n], &rhs, 1.0, &opts).unwrap_err();
        assert!(matches!(err, FemError::SolverStagnation { iterations: 3, .. }));
    }
}
