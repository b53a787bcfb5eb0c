// Copyright 2026 The covtrade Developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Dense semidefinite programs over Hermitian matrices:
//!
//! ```text
//! maximize  Tr[C X]   subject to  Tr[A_i X] = b_i,  X ⪰ 0
//! ```
//!
//! The solver is an infeasible-start primal-dual path-following method (Mehrotra
//! predictor-corrector with Nesterov-Todd scaling). Hermitian data is mapped to real
//! symmetric matrices of twice the size, `X ↦ [[Re X, -Im X], [Im X, Re X]]`. The embedding
//! doubles every inner product, so objective and constraints are halved on the way in;
//! values, residuals and gaps are then already in Hermitian units. Eigenvalue multiplicities
//! double in the embedding, which is harmless for the method.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, HermitianOperator, C64};
use crate::scenarios::LinearConstraint;

/// Largest Hermitian dimension accepted.
pub const MAX_DIMENSION: usize = 256;

/// Fraction of the distance to the cone boundary taken per step.
const STEP_FRACTION: f64 = 0.98;

/// Dual objective below `-DIVERGENCE` with a small dual residual certifies primal
/// infeasibility (the dual is unbounded).
const DIVERGENCE: f64 = 1e8;

/// `max Tr[C X]` subject to equality constraints and `X ⪰ 0`.
#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub objective: HermitianOperator,
    pub constraints: Vec<LinearConstraint>,
    pub dimension: usize,
}

impl SdpProblem {
    pub fn new(objective: HermitianOperator, constraints: Vec<LinearConstraint>) -> Result<Self> {
        let dimension = objective.dim();
        if dimension > MAX_DIMENSION {
            return Err(Error::InvalidArgument(format!(
                "problem dimension {dimension} exceeds {MAX_DIMENSION}"
            )));
        }
        if constraints.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one constraint is required".into(),
            ));
        }
        for c in &constraints {
            if c.operator.dim() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: format!("{dimension}x{dimension}"),
                    found: format!("{}x{}", c.operator.dim(), c.operator.dim()),
                });
            }
        }
        Ok(Self {
            objective,
            constraints,
            dimension,
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-8,
            feas_tol: 1e-9,
            max_iter: 200,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdpStatus {
    Optimal,
    MaxIterations,
    Infeasible,
    NumericalFailure,
}

impl SdpStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Optimal => "optimal",
            Self::MaxIterations => "max-iterations",
            Self::Infeasible => "infeasible",
            Self::NumericalFailure => "numerical-failure",
        }
    }
}

impl std::fmt::Display for SdpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub x: HermitianOperator,
    /// Primal objective `Tr[C X]`.
    pub value: f64,
    /// Dual objective `bᵀy`.
    pub dual_value: f64,
    /// `max(|value - dual_value|, Tr[X S])`.
    pub duality_gap: f64,
    /// `max_i |Tr[A_i X] - b_i|` over the original constraints.
    pub primal_residual: f64,
    /// Largest entry of `Σ y_i A_i - S - C`.
    pub dual_residual: f64,
    pub min_eigenvalue: f64,
    pub iterations: usize,
    pub status: SdpStatus,
    /// Dual slack `S = Σ y_i A_i - C`.
    pub slack: HermitianOperator,
}

/// Solves `p` with default tolerances.
pub fn solve(p: &SdpProblem) -> Result<SdpSolution> {
    solve_with(p, &SolverOptions::default())
}

/// Max constraint violation and smallest eigenvalue of a candidate point.
pub fn check_feasibility(p: &SdpProblem, x: &HermitianOperator) -> Result<(f64, f64)> {
    let mut residual: f64 = 0.0;
    for c in &p.constraints {
        residual = residual.max(c.residual(x)?.abs());
    }
    Ok((residual, x.min_eigenvalue()?))
}

/// Real coordinates with `Tr[A B] = svec(A) · svec(B)`.
fn svec(a: &HermitianOperator) -> Vec<f64> {
    let n = a.dim();
    let m = a.matrix();
    let mut v = Vec::with_capacity(n * n);
    let r2 = std::f64::consts::SQRT_2;
    for r in 0..n {
        v.push(m[(r, r)].re);
        for c in r + 1..n {
            v.push(r2 * m[(r, c)].re);
            v.push(r2 * m[(r, c)].im);
        }
    }
    v
}

fn unsvec(v: &[f64], n: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut k = 0;
    for r in 0..n {
        m[(r, r)] = C64::new(v[k], 0.0);
        k += 1;
        for c in r + 1..n {
            let z = C64::new(r2 * v[k], r2 * v[k + 1]);
            m[(r, c)] = z;
            m[(c, r)] = z.conj();
            k += 2;
        }
    }
    m
}

/// Orthonormalizes the constraint rows (modified Gram-Schmidt, two passes), dropping
/// dependent rows whose right-hand side is consistent.
fn reduce_constraints(constraints: &[LinearConstraint]) -> Result<Vec<(Vec<f64>, f64)>> {
    let mut basis: Vec<(Vec<f64>, f64)> = Vec::new();
    let scale = constraints
        .iter()
        .map(|c| c.value.abs())
        .fold(1.0, f64::max);
    let vecs: Vec<Vec<f64>> = constraints.iter().map(|c| svec(&c.operator)).collect();
    // Dependence is judged against the largest row so round-off rows count as zero.
    let norm0 = vecs
        .iter()
        .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    for (c, mut v) in constraints.iter().zip(vecs) {
        let mut b = c.value;
        for _ in 0..2 {
            for (q, qb) in &basis {
                let proj: f64 = q.iter().zip(&v).map(|(x, y)| x * y).sum();
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= proj * y;
                }
                b -= proj * qb;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= 1e-10 * norm0.max(1e-300) {
            // b was transformed alongside v, so it is the residual of the implied combination
            let residual = b.abs() / norm0.max(1e-300);
            if residual > 1e-9 * scale {
                return Err(Error::InconsistentConstraints { residual });
            }
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push((v, b / norm));
    }
    Ok(basis)
}

fn embed(m: &ComplexMatrix) -> DMatrix<f64> {
    let n = m.rows();
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let z = m[(r % n, c % n)];
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

fn extract(y: &DMatrix<f64>, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |r, c| {
        let re = 0.5 * (y[(r, c)] + y[(r + n, c + n)]);
        let im = 0.5 * (y[(r + n, c)] - y[(r, c + n)]);
        C64::new(re, im)
    })
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Largest step `α` keeping `L Lᵀ + α Δ ⪰ 0`; `f64::INFINITY` if unbounded.
fn max_step(l: &DMatrix<f64>, delta: &DMatrix<f64>) -> Option<f64> {
    let lt = l.clone();
    let z = lt.solve_lower_triangular(delta)?;
    let t = l.solve_lower_triangular(&z.transpose())?;
    let lambda = sym(t).symmetric_eigenvalues().min();
    Some(if lambda >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lambda
    })
}

struct RealSdp {
    c: DMatrix<f64>,
    a: Vec<DMatrix<f64>>,
    b: DVector<f64>,
}

impl RealSdp {
    fn apply(&self, x: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_iterator(self.a.len(), self.a.iter().map(|a| a.dot(x)))
    }

    fn adjoint(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let n = self.c.nrows();
        self.a
            .iter()
            .zip(y.iter())
            .fold(DMatrix::zeros(n, n), |acc, (a, &yi)| acc + a * yi)
    }
}

struct Iterate {
    x: DMatrix<f64>,
    y: DVector<f64>,
    s: DMatrix<f64>,
}

/// Termination diagnostics for an iterate.
struct Progress {
    dobj: f64,
    gap: f64,
    dual_res: f64,
}

/// Solves `p` with the given tolerances. Solver outcomes other than success are reported in
/// [`SdpSolution::status`]; `Err` is reserved for malformed problems.
pub fn solve_with(p: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    let n = p.dimension;
    let reduced = reduce_constraints(&p.constraints)?;
    let real = RealSdp {
        c: embed(p.objective.matrix()) * 0.5,
        a: reduced
            .iter()
            .map(|(v, _)| embed(&unsvec(v, n)) * 0.5)
            .collect(),
        b: DVector::from_iterator(reduced.len(), reduced.iter().map(|(_, b)| *b)),
    };
    let big_n = 2 * n;

    // τ I best fits the constraints in least squares; every scenario carries a trace-type row.
    let traces: Vec<f64> = real.a.iter().map(|a| a.trace()).collect();
    let tt: f64 = traces.iter().map(|t| t * t).sum();
    let tb: f64 = traces.iter().zip(real.b.iter()).map(|(t, b)| t * b).sum();
    let tau = if tt > 0.0 && tb / tt > 0.0 {
        tb / tt
    } else {
        1.0
    };
    let c_norm = real.c.norm() / (big_n as f64).sqrt();
    let s0 = if c_norm > 0.0 { c_norm } else { 1.0 };
    let mut it = Iterate {
        x: DMatrix::identity(big_n, big_n) * tau,
        y: DVector::zeros(real.a.len()),
        s: DMatrix::identity(big_n, big_n) * s0,
    };

    // Gram matrix of the constraint rows, for projecting steps onto A(dX) = r_p.
    let gram = DMatrix::from_fn(real.a.len(), real.a.len(), |i, j| real.a[i].dot(&real.a[j]));
    let Some(gram) = gram.cholesky() else {
        return Err(Error::NumericalFailure(
            "singular constraint Gram matrix".into(),
        ));
    };

    let mut history: Vec<f64> = Vec::new();
    let mut status = SdpStatus::MaxIterations;
    let mut iterations = 0;
    let mut stalled = 0;

    let progress = |it: &Iterate| -> Progress {
        let rd = &real.c - real.adjoint(&it.y) + &it.s;
        let pobj = real.c.dot(&it.x);
        let dobj = real.b.dot(&it.y);
        Progress {
            dobj,
            gap: (pobj - dobj).abs().max(it.x.dot(&it.s)),
            dual_res: max_abs(&rd),
        }
    };
    let primal_res = |x: &DMatrix<f64>| -> f64 {
        let hx = HermitianOperator::new(extract(x, n), p.objective.shape().clone());
        match hx {
            Ok(hx) => check_feasibility(p, &hx)
                .map(|r| r.0)
                .unwrap_or(f64::INFINITY),
            Err(_) => f64::INFINITY,
        }
    };

    loop {
        let pr = progress(&it);
        let rp = &real.b - real.apply(&it.x);
        let rp_max = rp.amax();
        if pr.gap <= opts.gap_tol
            && pr.dual_res <= opts.feas_tol
            && rp_max <= opts.feas_tol
            && primal_res(&it.x) <= opts.feas_tol
        {
            status = SdpStatus::Optimal;
            break;
        }
        // y / |bᵀy| is then an approximate Farkas certificate: Σ ŷ_i A_i ⪰ -ε with bᵀŷ = -1.
        if pr.dobj < -DIVERGENCE * (1.0 + real.c.norm())
            && pr.dual_res * big_n as f64 <= 1e-6 * pr.dobj.abs()
        {
            status = SdpStatus::Infeasible;
            break;
        }
        if iterations == opts.max_iter {
            break;
        }
        iterations += 1;

        let Some(chol_x) = it.x.clone().cholesky() else {
            status = SdpStatus::NumericalFailure;
            break;
        };
        let Some(chol_s) = it.s.clone().cholesky() else {
            status = SdpStatus::NumericalFailure;
            break;
        };
        let lx = chol_x.l();
        let ls = chol_s.l();
        let k = sym(lx.transpose() * &it.s * &lx);
        let eig = k.symmetric_eigen();
        let d: Vec<f64> = eig
            .eigenvalues
            .iter()
            .map(|w| w.max(1e-300).sqrt())
            .collect();
        let inv_sqrt_d = DMatrix::from_diagonal(&DVector::from_iterator(
            big_n,
            d.iter().map(|x| 1.0 / x.sqrt()),
        ));
        let g = &lx * &eig.eigenvectors * &inv_sqrt_d;
        let Some(g_inv) = g.clone().try_inverse() else {
            status = SdpStatus::NumericalFailure;
            break;
        };
        let w = &g * g.transpose();
        let wa: Vec<DMatrix<f64>> = real.a.iter().map(|a| &w * a * &w).collect();
        let m = DMatrix::from_fn(real.a.len(), real.a.len(), |i, j| real.a[i].dot(&wa[j]));
        let Some(m_chol) = sym(m).cholesky() else {
            status = SdpStatus::NumericalFailure;
            break;
        };
        let rd = &real.c - real.adjoint(&it.y) + &it.s;
        let wrdw = &w * &rd * &w;
        let a_wrdw = real.apply(&wrdw);

        let direction = |rc: &DMatrix<f64>| -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
            let h = sym(&g * rc * g.transpose());
            let rhs = real.apply(&h) + &a_wrdw - &rp;
            let dy = m_chol.solve(&rhs);
            let ds = sym(real.adjoint(&dy) - &rd);
            let dx = sym(&h - &w * &ds * &w);
            (dx, dy, ds)
        };
        let mu = it.x.dot(&it.s) / big_n as f64;

        // predictor
        let rc_aff = DMatrix::from_fn(big_n, big_n, |i, j| if i == j { -d[i] } else { 0.0 });
        let (dxa, _, dsa) = direction(&rc_aff);
        let ap = max_step(&lx, &dxa).unwrap_or(0.0).min(1.0);
        let ad = max_step(&ls, &dsa).unwrap_or(0.0).min(1.0);
        let mu_aff = (&it.x + &dxa * ap).dot(&(&it.s + &dsa * ad)) / big_n as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let dxs = &g_inv * &dxa * g_inv.transpose();
        let dss = g.transpose() * &dsa * &g;
        let corr = &dxs * &dss + &dss * &dxs;
        let rc = DMatrix::from_fn(big_n, big_n, |i, j| {
            let diag = if i == j {
                2.0 * sigma * mu - 2.0 * d[i] * d[i]
            } else {
                0.0
            };
            (diag - corr[(i, j)]) / (d[i] + d[j])
        });
        let (dx, dy, ds) = direction(&rc);
        // The Schur solve loses accuracy as X nears the boundary; restore A(dX) = r_p.
        let dx = sym(&dx + real.adjoint(&gram.solve(&(&rp - real.apply(&dx)))));
        let ap = (STEP_FRACTION * max_step(&lx, &dx).unwrap_or(0.0)).min(1.0);
        let ad = (STEP_FRACTION * max_step(&ls, &ds).unwrap_or(0.0)).min(1.0);
        if !(ap.is_finite() && ad.is_finite()) || !dx.iter().chain(ds.iter()).all(|v| v.is_finite())
        {
            status = SdpStatus::NumericalFailure;
            break;
        }
        if ap < 1e-12 && ad < 1e-12 {
            stalled += 1;
            if stalled >= 3 {
                status = SdpStatus::NumericalFailure;
                break;
            }
        } else {
            stalled = 0;
        }
        it.x = sym(&it.x + dx * ap);
        it.y += dy * ad;
        it.s = sym(&it.s + ds * ad);
        // Only primal-feasible iterates lie on the central path.
        if (&real.b - real.apply(&it.x)).amax() <= opts.feas_tol {
            history.push(real.c.dot(&it.x));
        }
    }

    let pr = progress(&it);
    if status == SdpStatus::Optimal && !tail_is_monotone(&history) {
        status = SdpStatus::NumericalFailure;
    }
    let x = HermitianOperator::new(extract(&it.x, n), p.objective.shape().clone())?;
    let slack = HermitianOperator::new(extract(&it.s, n), p.objective.shape().clone())?;
    let (primal_residual, min_eigenvalue) = check_feasibility(p, &x)?;
    let value = p.objective.inner(&x)?;
    Ok(SdpSolution {
        x,
        value,
        dual_value: pr.dobj,
        duality_gap: pr.gap.max((value - pr.dobj).abs()),
        primal_residual,
        dual_residual: pr.dual_res,
        min_eigenvalue,
        iterations,
        status,
        slack,
    })
}

/// Accepted primal objectives over the final five iterations must not decrease.
fn tail_is_monotone(history: &[f64]) -> bool {
    let tail = &history[history.len().saturating_sub(5)..];
    tail.windows(2).all(|w| w[1] >= w[0] - 1e-10)
}
