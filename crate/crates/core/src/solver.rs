//! Linear solves for the reduced (free-node) systems.
//!
//! The direct path is a sparse Cholesky factorization computed once and
//! reused every step. The iterative path is Jacobi-preconditioned conjugate
//! gradients. Dot products are always accumulated sequentially so both
//! paths are deterministic under either execution policy.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Col, Par, Side};

use crate::error::{Error, Result};
use crate::par::Execution;
use crate::sparse::CsrMatrix;

/// Above this many unknowns `Auto` switches from Cholesky to CG.
pub const DIRECT_NODE_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverMethod {
    #[default]
    Auto,
    Direct,
    ConjugateGradient,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Time step, s.
    pub dt: f64,
    pub method: SolverMethod,
    /// Relative residual target `‖Ax - b‖ / ‖b‖`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub execution: Execution,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            dt: 0.05,
            method: SolverMethod::Auto,
            tolerance: 1e-10,
            max_iterations: 10_000,
            execution: Execution::default(),
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::validation("solver.dt", format!("must be > 0, got {}", self.dt)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::validation(
                "solver.tolerance",
                format!("must be > 0, got {}", self.tolerance),
            ));
        }
        if self.max_iterations == 0 {
            return Err(Error::validation("solver.max_iterations", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
}

enum Backend {
    Direct(faer::sparse::linalg::solvers::Llt<usize, f64>),
    Cg { inv_diag: Vec<f64> },
}

/// A matrix prepared for repeated solves.
pub struct LinearSolver {
    a: CsrMatrix,
    backend: Backend,
    tolerance: f64,
    max_iterations: usize,
    exec: Execution,
}

impl std::fmt::Debug for LinearSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.backend {
            Backend::Direct(_) => "direct",
            Backend::Cg { .. } => "cg",
        };
        f.debug_struct("LinearSolver")
            .field("n", &self.a.dim())
            .field("backend", &kind)
            .finish()
    }
}

impl LinearSolver {
    pub fn new(a: CsrMatrix, settings: &SolverSettings) -> Result<Self> {
        let method = match settings.method {
            SolverMethod::Auto if a.dim() < DIRECT_NODE_LIMIT => SolverMethod::Direct,
            SolverMethod::Auto => SolverMethod::ConjugateGradient,
            m => m,
        };
        let backend = match method {
            SolverMethod::Direct => Backend::Direct(factorize(&a)?),
            _ => {
                let diag = a.diagonal();
                if let Some(i) = diag.iter().position(|&d| !(d > 0.0)) {
                    return Err(Error::Factorization(format!(
                        "non-positive diagonal {} at row {i}",
                        diag[i]
                    )));
                }
                Backend::Cg {
                    inv_diag: diag.iter().map(|d| 1.0 / d).collect(),
                }
            }
        };
        Ok(LinearSolver {
            a,
            backend,
            tolerance: settings.tolerance,
            max_iterations: settings.max_iterations,
            exec: settings.execution,
        })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.a
    }

    pub fn is_direct(&self) -> bool {
        matches!(self.backend, Backend::Direct(_))
    }

    pub fn solve(&self, b: &[f64]) -> Result<(Vec<f64>, SolveStats)> {
        let n = self.a.dim();
        if b.len() != n {
            return Err(Error::InvalidArgument(format!(
                "right-hand side has {} entries, matrix is {n}x{n}",
                b.len()
            )));
        }
        let b_norm = norm(b);
        if b_norm == 0.0 {
            return Ok((vec![0.0; n], SolveStats::default()));
        }
        match &self.backend {
            Backend::Direct(llt) => {
                let rhs = Col::<f64>::from_fn(n, |i| b[i]);
                let sol = llt.solve(&rhs);
                let x: Vec<f64> = (0..n).map(|i| sol[i]).collect();
                let ax = self.a.mul_vec_with(&x, self.exec);
                let residual = ax
                    .iter()
                    .zip(b)
                    .map(|(p, q)| (p - q) * (p - q))
                    .sum::<f64>()
                    .sqrt()
                    / b_norm;
                if !(residual <= self.tolerance) {
                    return Err(Error::NonConvergence {
                        iterations: 0,
                        residual,
                    });
                }
                Ok((
                    x,
                    SolveStats {
                        iterations: 0,
                        residual,
                    },
                ))
            }
            Backend::Cg { inv_diag } => self.cg(b, b_norm, inv_diag),
        }
    }

    fn cg(&self, b: &[f64], b_norm: f64, inv_diag: &[f64]) -> Result<(Vec<f64>, SolveStats)> {
        let n = b.len();
        let mut x = vec![0.0; n];
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(r, m)| r * m).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; n];
        let mut rz = dot(&r, &z);
        for it in 1..=self.max_iterations {
            self.a.mul_vec_into(&p, &mut ap, self.exec);
            let alpha = rz / dot(&p, &ap);
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let residual = norm(&r) / b_norm;
            if residual <= self.tolerance {
                log::trace!("cg converged in {it} iterations, residual {residual:e}");
                return Ok((x, SolveStats { iterations: it, residual }));
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(Error::NonConvergence {
            iterations: self.max_iterations,
            residual: norm(&r) / b_norm,
        })
    }
}

fn factorize(a: &CsrMatrix) -> Result<faer::sparse::linalg::solvers::Llt<usize, f64>> {
    // sequential kernels keep repeated runs bit-identical
    faer::set_global_parallelism(Par::Seq);
    let n = a.dim();
    let triplets: Vec<Triplet<usize, usize, f64>> = a
        .triplets()
        .map(|(i, j, v)| Triplet::new(i, j, v))
        .collect();
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::Factorization(format!("{e:?}")))?;
    mat.sp_cholesky(Side::Lower)
        .map_err(|e| Error::Factorization(format!("{e:?}")))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// One-shot solve of `A x = b`.
pub fn solve_linear(a: &CsrMatrix, b: &[f64], settings: &SolverSettings) -> Result<Vec<f64>> {
    let solver = LinearSolver::new(a.clone(), settings)?;
    let (x, stats) = solver.solve(b)?;
    log::debug!(
        "solve_linear n={} iterations={} residual={:e}",
        a.dim(),
        stats.iterations,
        stats.residual
    );
    Ok(x)
}
