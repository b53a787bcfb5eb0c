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

//! Frontier computation: endpoint solves, Lagrangian and constrained sweeps, Kraus
//! extraction and Monte Carlo checks of the fidelities.
//!
//! The frontier `F(G)` is concave because the feasible set of seeds is convex and compact,
//! so maximizing `Tr[(R_F + λ R_G) R0]` over `λ ≥ 0` traces it by supporting lines. Its slope
//! diverges at `G_max`, where no finite `λ` lands exactly; `λ = +∞` is therefore handled as
//! a lexicographic solve (maximize G, then F on the optimal face).

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, HermitianOperator, C64};
use crate::scenarios::{check_instrument, LinearConstraint, Scenario};
use crate::sdp::{solve_with, SdpProblem, SdpSolution, SdpStatus, SolverOptions};
use crate::stats::{par_chunks, ScalarStats};

/// Constrained solves closer than this to either end of the achievable G range are refused.
pub const BOUNDARY_MARGIN: f64 = 1e-4;

/// Default relative rank cutoff for Kraus extraction.
pub const KRAUS_RANK_TOL: f64 = 1e-10;

/// Eigenvalues of the dual slack at or below this (relative to its largest eigenvalue)
/// span the optimal face.
const FACE_TOL: f64 = 1e-6;

/// Outcome of one frontier point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointStatus {
    Optimal,
    MaxIterations,
    Infeasible,
    NumericalFailure,
    /// Target G inside the boundary margin; no solve attempted.
    Refused,
}

impl From<SdpStatus> for PointStatus {
    fn from(s: SdpStatus) -> Self {
        match s {
            SdpStatus::Optimal => Self::Optimal,
            SdpStatus::MaxIterations => Self::MaxIterations,
            SdpStatus::Infeasible => Self::Infeasible,
            SdpStatus::NumericalFailure => Self::NumericalFailure,
        }
    }
}

impl PointStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Optimal => "optimal",
            Self::MaxIterations => "max-iterations",
            Self::Infeasible => "infeasible",
            Self::NumericalFailure => "numerical-failure",
            Self::Refused => "refused",
        }
    }

    pub fn is_ok(self) -> bool {
        self == Self::Optimal
    }
}

/// Solver diagnostics carried by each point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolveSummary {
    pub value: f64,
    pub duality_gap: f64,
    pub primal_residual: f64,
    pub min_eigenvalue: f64,
    pub iterations: usize,
    pub status: PointStatus,
    /// Eigenvalue mass dropped when extracting Kraus operators, when computed.
    pub discarded_mass: Option<f64>,
}

impl SolveSummary {
    fn from_solution(sol: &SdpSolution) -> Self {
        Self {
            value: sol.value,
            duality_gap: sol.duality_gap,
            primal_residual: sol.primal_residual,
            min_eigenvalue: sol.min_eigenvalue,
            iterations: sol.iterations,
            status: sol.status.into(),
            discarded_mass: None,
        }
    }

    fn refused() -> Self {
        Self {
            value: f64::NAN,
            duality_gap: f64::NAN,
            primal_residual: f64::NAN,
            min_eigenvalue: f64::NAN,
            iterations: 0,
            status: PointStatus::Refused,
            discarded_mass: None,
        }
    }
}

/// Monte Carlo estimates of the two fidelities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Verification {
    pub n_samples: usize,
    pub f_estimate: f64,
    pub g_estimate: f64,
    pub f_stderr: f64,
    pub g_stderr: f64,
}

/// Slack added to the 4σ test so that zero-variance estimators tolerate solver round-off.
pub const VERIFY_FLOOR: f64 = 1e-7;

impl Verification {
    /// Whether `(f, g)` lie within 4 standard errors (plus [`VERIFY_FLOOR`]) of the estimates.
    pub fn agrees_with(&self, f: f64, g: f64) -> bool {
        (self.f_estimate - f).abs() <= 4.0 * self.f_stderr + VERIFY_FLOOR
            && (self.g_estimate - g).abs() <= 4.0 * self.g_stderr + VERIFY_FLOOR
    }
}

fn serialize_lambda<S: Serializer>(
    lambda: &Option<f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match lambda {
        Some(l) if l.is_infinite() => s.serialize_str("inf"),
        Some(l) => s.serialize_f64(*l),
        None => s.serialize_none(),
    }
}

/// One `(G, F)` frontier point.
#[derive(Clone, Debug, Serialize)]
pub struct TradeoffPoint {
    pub g: f64,
    pub f: f64,
    /// Scalarization weight; `+∞` marks the lexicographic G-max endpoint.
    #[serde(serialize_with = "serialize_lambda")]
    pub lambda: Option<f64>,
    pub diagnostics: SolveSummary,
    pub verification: Option<Verification>,
    /// Optimal seed operator, when a solve produced one.
    #[serde(skip)]
    pub seed: Option<HermitianOperator>,
}

impl TradeoffPoint {
    fn from_solution(s: &Scenario, sol: SdpSolution, lambda: Option<f64>) -> Result<Self> {
        let summary = SolveSummary::from_solution(&sol);
        let (f, g) = if summary.status == PointStatus::Infeasible {
            (f64::NAN, f64::NAN)
        } else {
            (
                s.operation_fidelity(&sol.x)?,
                s.estimation_fidelity(&sol.x)?,
            )
        };
        Ok(Self {
            g,
            f,
            lambda,
            diagnostics: summary,
            verification: None,
            seed: Some(sol.x),
        })
    }
}

fn problem(
    s: &Scenario,
    objective: HermitianOperator,
    extra: Option<LinearConstraint>,
) -> Result<SdpProblem> {
    let mut constraints = s.constraints.clone();
    constraints.extend(extra);
    SdpProblem::new(objective, constraints)
}

/// Maximal estimation fidelity and, among the seeds attaining it, the largest operation
/// fidelity.
///
/// The second stage restricts the seed to the kernel of the first stage's dual slack, which
/// contains every G-optimal seed, and maximizes `Tr[R_F R0]` there.
pub fn max_g(s: &Scenario, opts: &SolverOptions) -> Result<TradeoffPoint> {
    let first = solve_with(&problem(s, s.r_g.clone(), None)?, opts)?;
    if first.status != SdpStatus::Optimal {
        return TradeoffPoint::from_solution(s, first, Some(f64::INFINITY));
    }
    let eig = first.slack.eigh()?;
    let top = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let face: Vec<usize> = (0..eig.values.len())
        .filter(|&k| eig.values[k] <= FACE_TOL * (1.0 + top))
        .collect();
    if face.is_empty() || face.len() == eig.values.len() {
        return TradeoffPoint::from_solution(s, first, Some(f64::INFINITY));
    }
    let n = s.r_f.dim();
    let q = ComplexMatrix::from_fn(n, face.len(), |r, c| eig.vectors[(r, face[c])]);
    let compress = |op: &HermitianOperator| {
        HermitianOperator::flat(q.adjoint().matmul(op.matrix()).matmul(&q))
    };
    let constraints = s
        .constraints
        .iter()
        .map(|c| LinearConstraint::new(compress(&c.operator)?, c.value))
        .collect::<Result<Vec<_>>>()?;
    let reduced = SdpProblem::new(compress(&s.r_f)?, constraints)?;
    let second = match solve_with(&reduced, opts) {
        Ok(sol) if sol.status == SdpStatus::Optimal => sol,
        // Face estimate too tight: fall back to the first-stage optimizer.
        _ => return TradeoffPoint::from_solution(s, first, Some(f64::INFINITY)),
    };
    let x = HermitianOperator::new(q.conjugate(second.x.matrix()), s.seed_shape().clone())?;
    let primal_residual = s.constraint_residual(&x)?;
    let min_eigenvalue = x.min_eigenvalue()?;
    let f = s.operation_fidelity(&x)?;
    let g = s.estimation_fidelity(&x)?;
    Ok(TradeoffPoint {
        g,
        f,
        lambda: Some(f64::INFINITY),
        diagnostics: SolveSummary {
            value: g,
            duality_gap: first.duality_gap.max(second.duality_gap),
            primal_residual,
            min_eigenvalue,
            iterations: first.iterations + second.iterations,
            status: second.status.into(),
            discarded_mass: None,
        },
        verification: None,
        seed: Some(x),
    })
}

/// `λ = 0` followed by `points - 1` logarithmically spaced weights in
/// `[lambda_max · 1e-5, lambda_max]` and the terminal `λ = +∞`.
pub fn default_lambda_grid(points: usize, lambda_max: f64) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::InvalidArgument(
            "grid needs at least 2 points".into(),
        ));
    }
    if !(lambda_max.is_finite() && lambda_max > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "invalid lambda_max {lambda_max}"
        )));
    }
    let k = points - 1;
    let lo = (lambda_max * 1e-5).ln();
    let hi = lambda_max.ln();
    let mut grid = vec![0.0];
    grid.extend((0..k).map(|i| {
        if k == 1 {
            lambda_max
        } else {
            (lo + (hi - lo) * i as f64 / (k - 1) as f64).exp()
        }
    }));
    grid.push(f64::INFINITY);
    Ok(grid)
}

fn lagrangian_point(s: &Scenario, lambda: f64, opts: &SolverOptions) -> Result<TradeoffPoint> {
    if lambda == f64::INFINITY {
        return max_g(s, opts);
    }
    // Normalized so the objective stays O(1) for every weight.
    let objective = s
        .r_f
        .add(&s.r_g.scale(lambda))?
        .scale(1.0 / (1.0 + lambda.abs()));
    let sol = solve_with(&problem(s, objective, None)?, opts)?;
    TradeoffPoint::from_solution(s, sol, Some(lambda))
}

/// Frontier by scalarization `max Tr[(R_F + λ R_G) R0]`, one point per weight, sorted by G.
/// `λ = +∞` yields the [`max_g`] endpoint. Points are solved in parallel.
pub fn curve_lagrangian(
    s: &Scenario,
    lambdas: &[f64],
    opts: &SolverOptions,
) -> Result<Vec<TradeoffPoint>> {
    if lambdas.is_empty() {
        return Err(Error::InvalidArgument("empty lambda list".into()));
    }
    if let Some(bad) = lambdas
        .iter()
        .find(|l| l.is_nan() || **l == f64::NEG_INFINITY)
    {
        return Err(Error::InvalidArgument(format!("invalid lambda {bad}")));
    }
    let mut points = lambdas
        .par_iter()
        .map(|&l| lagrangian_point(s, l, opts))
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| a.g.total_cmp(&b.g));
    Ok(points)
}

/// `max Tr[R_F R0]` at fixed `Tr[R_G R0] = g`, per target.
///
/// Targets within [`BOUNDARY_MARGIN`] of `G(identity)` or `G_max`, or below `G(identity)`,
/// are refused. Targets beyond `G_max` are passed to the solver, which reports them
/// infeasible. Output order follows the input.
pub fn curve_constrained(
    s: &Scenario,
    g_values: &[f64],
    opts: &SolverOptions,
) -> Result<Vec<TradeoffPoint>> {
    let g_id = s.estimation_fidelity(&s.identity_seed())?;
    let top = max_g(s, opts)?;
    let g_max = top.g;
    g_values
        .par_iter()
        .map(|&g| {
            if !g.is_finite() {
                return Err(Error::InvalidArgument(format!("invalid target G {g}")));
            }
            let near_max = (g - g_max).abs() < BOUNDARY_MARGIN;
            if g < g_id + BOUNDARY_MARGIN || near_max {
                return Ok(TradeoffPoint {
                    g,
                    f: f64::NAN,
                    lambda: None,
                    diagnostics: SolveSummary::refused(),
                    verification: None,
                    seed: None,
                });
            }
            let extra = LinearConstraint::new(s.r_g.clone(), g)?;
            let sol = solve_with(&problem(s, s.r_f.clone(), Some(extra))?, opts)?;
            let mut p = TradeoffPoint::from_solution(s, sol, None)?;
            if p.diagnostics.status == PointStatus::Infeasible {
                p.g = g;
            }
            Ok(p)
        })
        .collect()
}

/// Kraus operators of a seed, weights folded in.
#[derive(Clone, Debug)]
pub struct KrausSet {
    pub operators: Vec<ComplexMatrix>,
    /// Sum of the eigenvalues dropped below the rank cutoff.
    pub discarded_mass: f64,
}

impl KrausSet {
    /// `Σ A†A`.
    pub fn povm_element(&self) -> ComplexMatrix {
        let n = self.operators.first().map_or(0, |a| a.cols());
        self.operators
            .iter()
            .fold(ComplexMatrix::zeros(n, n), |acc, a| {
                &acc + &a.adjoint().matmul(a)
            })
    }

    /// `Σ A ρ A†`.
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let n = self.operators.first().map_or(0, |a| a.rows());
        self.operators
            .iter()
            .fold(ComplexMatrix::zeros(n, n), |acc, a| {
                &acc + &a.conjugate(rho)
            })
    }
}

/// Splits a seed into Kraus operators `A = unvec(√λ v)` over eigenpairs with
/// `λ ≥ rank_tol · λ_max`.
pub fn extract_kraus(x: &HermitianOperator, rank_tol: f64) -> Result<KrausSet> {
    let shape = x.shape();
    let (n_in, n_out) = (shape.in_dim(), shape.out_dim());
    let eig = x.eigh()?;
    let top = eig.values.last().copied().unwrap_or(0.0);
    let min = eig.values.first().copied().unwrap_or(0.0);
    if min < -rank_tol * top.max(1.0) {
        return Err(Error::NotPositive {
            min_eigenvalue: min,
        });
    }
    let cutoff = rank_tol * top;
    let mut operators = Vec::new();
    let mut discarded_mass = 0.0;
    for (k, &lambda) in eig.values.iter().enumerate().rev() {
        if lambda >= cutoff && lambda > 0.0 {
            let v = eig.vector(k).scale_real(lambda.sqrt());
            operators.push(ComplexMatrix::unvec(&v, n_in, n_out)?);
        } else {
            discarded_mass += lambda.max(0.0);
        }
    }
    Ok(KrausSet {
        operators,
        discarded_mass,
    })
}

/// Minimum sample count for the Monte Carlo estimators.
pub const MIN_SAMPLES: usize = 100;

fn finish_estimates(parts: Vec<(ScalarStats, ScalarStats)>) -> Verification {
    let (mut f, mut g) = (ScalarStats::default(), ScalarStats::default());
    for (pf, pg) in &parts {
        f.merge(pf);
        g.merge(pg);
    }
    Verification {
        n_samples: f.count,
        f_estimate: f.mean(),
        g_estimate: g.mean(),
        f_stderr: f.standard_error(),
        g_stderr: g.standard_error(),
    }
}

/// Monte Carlo estimate of F and G for the covariant instrument generated by `x`.
///
/// For each Haar sample `V` the instrument element `E_V` has Kraus operators `V A V†`, so
/// with `φ = V†ψ0` the per-sample values are `Σ |⟨φ|A|φ⟩|²` (operation) and
/// `|⟨φ|ψ0⟩|² Σ ‖Aφ‖²` (estimation).
pub fn verify_fidelities(
    s: &Scenario,
    x: &HermitianOperator,
    n: usize,
    seed: u64,
) -> Result<Verification> {
    if n < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            found: n,
            min: MIN_SAMPLES,
        });
    }
    let residual = s.constraint_residual(x)?;
    if residual > 1e-8 {
        return Err(Error::InconsistentConstraints { residual });
    }
    let kraus = extract_kraus(x, KRAUS_RANK_TOL)?;
    let sampler = s.sampler.prepare()?;
    let parts = par_chunks(n, seed, |rng, count| {
        let (mut f, mut g) = (ScalarStats::default(), ScalarStats::default());
        for _ in 0..count {
            let v = sampler.sample(rng);
            let phi = v.adjoint().matmul(&s.psi0);
            let overlap = ComplexMatrix::inner(&phi, &s.psi0).norm_sqr();
            let (mut fs, mut prob) = (0.0, 0.0);
            for a in &kraus.operators {
                let aphi = a.matmul(&phi);
                fs += ComplexMatrix::inner(&phi, &aphi).norm_sqr();
                prob += ComplexMatrix::inner(&aphi, &aphi).re;
            }
            f.push(fs);
            g.push(overlap * prob);
        }
        (f, g)
    });
    Ok(finish_estimates(parts))
}

/// Monte Carlo F and G of a discrete instrument with guess states `U_r ψ0`.
///
/// Per sample `ψ = V ψ0`: `Σ_{rμ} |⟨ψ|A_{rμ}|ψ⟩|²` and `Σ_{rμ} ‖A_{rμ}ψ‖² |⟨U_r ψ0|ψ⟩|²`.
pub fn discrete_fidelities(
    s: &Scenario,
    kraus_by_outcome: &[Vec<ComplexMatrix>],
    guess_unitaries: &[ComplexMatrix],
    n: usize,
    seed: u64,
) -> Result<Verification> {
    if n < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            found: n,
            min: MIN_SAMPLES,
        });
    }
    let dim = check_instrument(kraus_by_outcome, guess_unitaries)?;
    if dim != s.in_dim {
        return Err(Error::DimensionMismatch {
            expected: format!("{0}x{0}", s.in_dim),
            found: format!("{dim}x{dim}"),
        });
    }
    let guesses: Vec<ComplexMatrix> = guess_unitaries.iter().map(|u| u.matmul(&s.psi0)).collect();
    let sampler = s.sampler.prepare()?;
    let parts = par_chunks(n, seed, |rng, count| {
        let (mut f, mut g) = (ScalarStats::default(), ScalarStats::default());
        for _ in 0..count {
            let psi = sampler.sample(rng).matmul(&s.psi0);
            let (mut fs, mut gs) = (0.0, 0.0);
            for (ops, guess) in kraus_by_outcome.iter().zip(&guesses) {
                let hit = ComplexMatrix::inner(guess, &psi).norm_sqr();
                for a in ops {
                    let apsi = a.matmul(&psi);
                    let amp: C64 = ComplexMatrix::inner(&psi, &apsi);
                    fs += amp.norm_sqr();
                    gs += ComplexMatrix::inner(&apsi, &apsi).re * hit;
                }
            }
            f.push(fs);
            g.push(gs);
        }
        (f, g)
    });
    Ok(finish_estimates(parts))
}
