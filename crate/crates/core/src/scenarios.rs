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

//! Covariant state families: fidelity operators, trace-preservation constraints, reference
//! states and canonical seed instruments.
//!
//! Seeds live on `in ⊗ out` with the input factors first. For a seed `R0`, the operation
//! fidelity is `Tr[R_F R0]` and the estimation fidelity is `Tr[R_G R0]`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{total_spin_projector, HalfInt, RepSampler, Slot};
use crate::matrix::{hermitian_basis, ComplexMatrix, HermitianOperator, TensorShape};
use crate::stats::{par_chunks, MatrixStats};

/// Tolerance on constraint residuals of the built-in seeds.
const SEED_TOL: f64 = 1e-10;

/// `Tr[A · R0] = value`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearConstraint {
    pub operator: HermitianOperator,
    pub value: f64,
}

impl LinearConstraint {
    pub fn new(operator: HermitianOperator, value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self { operator, value })
    }

    pub fn residual(&self, x: &HermitianOperator) -> Result<f64> {
        Ok(self.operator.inner(x)? - self.value)
    }
}

/// The covariant family a scenario describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// Pure states of a d-dimensional system under SU(d).
    Pure { d: usize },
    /// Maximally entangled states of d ⊗ d under U ⊗ I.
    Maxent { d: usize },
    /// Spin-j coherent states.
    Spin { j: HalfInt },
}

impl Family {
    pub fn build(self) -> Result<Scenario> {
        match self {
            Self::Pure { d } => build_pure(d),
            Self::Maxent { d } => build_maxent(d),
            Self::Spin { j } => build_spin(j),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Pure { .. } => "pure",
            Self::Maxent { .. } => "maxent",
            Self::Spin { .. } => "spin",
        }
    }

    /// `d=<n>` or `j=<spin>`.
    pub fn param(&self) -> String {
        match self {
            Self::Pure { d } | Self::Maxent { d } => format!("d={d}"),
            Self::Spin { j } => format!("j={j}"),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name(), self.param())
    }
}

/// Closed-form ingredients of one tradeoff problem.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub family: Family,
    pub in_dim: usize,
    pub out_dim: usize,
    pub r_f: HermitianOperator,
    pub r_g: HermitianOperator,
    pub constraints: Vec<LinearConstraint>,
    /// Reference state as a column vector.
    pub psi0: ComplexMatrix,
    /// Representation acting on the system; its matrices conjugate the Kraus operators.
    pub sampler: RepSampler,
}

impl Scenario {
    /// Tensor layout of seed operators.
    pub fn seed_shape(&self) -> &TensorShape {
        self.r_f.shape()
    }

    pub fn operation_fidelity(&self, seed: &HermitianOperator) -> Result<f64> {
        self.r_f.inner(seed)
    }

    pub fn estimation_fidelity(&self, seed: &HermitianOperator) -> Result<f64> {
        self.r_g.inner(seed)
    }

    /// Largest `|Tr[A_i R0] - b_i|`.
    pub fn constraint_residual(&self, seed: &HermitianOperator) -> Result<f64> {
        self.constraints
            .iter()
            .map(|c| c.residual(seed).map(f64::abs))
            .try_fold(0.0, |acc, r| r.map(|r| f64::max(acc, r)))
    }

    /// Choi operator `|Φ⟩⟨Φ|` of the identity channel.
    pub fn identity_seed(&self) -> HermitianOperator {
        let phi = ComplexMatrix::max_entangled(self.in_dim);
        HermitianOperator::from_vector(&phi, self.seed_shape().clone())
            .expect("rank-one outer product is Hermitian")
    }

    /// Seed of the measure-and-reprepare instrument with Kraus `√d_in |ψ0⟩⟨ψ0|`:
    /// `d_in · (|ψ0⟩⟨ψ0|)ᵀ ⊗ |ψ0⟩⟨ψ0|`.
    pub fn measure_prepare_seed(&self) -> Result<HermitianOperator> {
        let p0 = ComplexMatrix::outer(&self.psi0, &self.psi0);
        let m = p0.transpose().kron(&p0).scale_real(self.in_dim as f64);
        let seed = HermitianOperator::new(m, self.seed_shape().clone())?;
        let residual = self.constraint_residual(&seed)?;
        if residual > SEED_TOL {
            return Err(Error::InconsistentConstraints { residual });
        }
        Ok(seed)
    }

    /// Lift of a system operator by the scenario representation (`U` for pure and spin,
    /// `U ⊗ I` for maxent).
    pub fn lift(&self, u: &ComplexMatrix) -> Result<ComplexMatrix> {
        Ok(self.sampler.prepare()?.represent(u))
    }
}

/// `Tr_out[(I_in ⊗ |ψ0⟩⟨ψ0|) R_F] ⊗ I_out`, the defining form of the estimation operator.
pub fn estimation_operator(
    r_f: &HermitianOperator,
    psi0: &ComplexMatrix,
) -> Result<HermitianOperator> {
    let shape = r_f.shape().clone();
    let (n_in, n_out) = (shape.in_dim(), shape.out_dim());
    let p0 = ComplexMatrix::outer(psi0, psi0);
    let weighted = ComplexMatrix::identity(n_in).kron(&p0).matmul(r_f.matrix());
    let weighted = (&weighted + &weighted.adjoint()).scale_real(0.5);
    let reduced = HermitianOperator::new(weighted, TensorShape::bipartite(n_in, n_out))?
        .partial_trace(&[1])?;
    HermitianOperator::new(
        reduced.matrix().kron(&ComplexMatrix::identity(n_out)),
        shape,
    )
}

fn projector(v: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::outer(v, v)
}

/// Pure states of dimension `d`: `R_F = (I + 𝓘)/(d(d+1))`,
/// `R_G = (I + |ψ0⟩⟨ψ0|ᵀ) ⊗ I/(d(d+1))`, and `Tr[R0] = d`.
pub fn build_pure(d: usize) -> Result<Scenario> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let shape = TensorShape::bipartite(d, d);
    let norm = 1.0 / (d * (d + 1)) as f64;
    let dim = d * d;
    let ent = projector(&ComplexMatrix::max_entangled(d));
    let r_f = (&ComplexMatrix::identity(dim) + &ent).scale_real(norm);
    let psi0 = ComplexMatrix::basis_vector(d, 0);
    let p0t = projector(&psi0).transpose();
    let r_g = (&ComplexMatrix::identity(d) + &p0t)
        .kron(&ComplexMatrix::identity(d))
        .scale_real(norm);
    let trace = LinearConstraint::new(HermitianOperator::identity(shape.clone()), d as f64)?;
    Ok(Scenario {
        family: Family::Pure { d },
        in_dim: d,
        out_dim: d,
        r_f: HermitianOperator::new(r_f, shape.clone())?,
        r_g: HermitianOperator::new(r_g, shape)?,
        constraints: vec![trace],
        psi0,
        sampler: RepSampler::FundamentalUnitary { d },
    })
}

/// Maximally entangled states `(U ⊗ I)|Φ⟩/√d`, factors ordered `(in₁, in₂, out₁, out₂)`.
///
/// The trace-preservation condition reduces to `Tr₁[Tr_out R0] = d · I_d`, expanded over the
/// Hermitian basis `{E_k}` into `Tr[(I ⊗ E_k ⊗ I_out) R0] = d · Tr[E_k]`.
pub fn build_maxent(d: usize) -> Result<Scenario> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let factors = [d, d, d, d];
    let shape = TensorShape::new(factors.to_vec(), 2)?;
    let dim = d.pow(4);
    let df = d as f64;
    let norm = 1.0 / (df * df * (df * df - 1.0));
    let ent = projector(&ComplexMatrix::max_entangled(d));
    let ent13 = ComplexMatrix::embed(&ent, &[0, 2], &factors)?;
    let ent24 = ComplexMatrix::embed(&ent, &[1, 3], &factors)?;
    let ent12 = ComplexMatrix::embed(&ent, &[0, 1], &factors)?;
    let id = ComplexMatrix::identity(dim);

    let cross = &ent13.matmul(&ent24) - &(&ent13 + &ent24).scale_real(1.0 / df);
    let r_f = (&id + &cross).scale_real(norm);
    // Estimation operator with the entangling term on the input pair; see
    // `estimation_operator`, which this matches.
    let r_g =
        (&id.scale_real(1.0 - 2.0 / (df * df)) + &ent12.scale_real(1.0 / df)).scale_real(norm);

    let psi0 = ComplexMatrix::max_entangled(d).scale_real(1.0 / df.sqrt());
    let constraints = hermitian_basis(d)
        .into_iter()
        .map(|e| {
            let lifted = ComplexMatrix::embed(e.matrix(), &[1], &factors)?;
            LinearConstraint::new(
                HermitianOperator::new(lifted, shape.clone())?,
                df * e.trace(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Scenario {
        family: Family::Maxent { d },
        in_dim: d * d,
        out_dim: d * d,
        r_f: HermitianOperator::new(r_f, shape.clone())?,
        r_g: HermitianOperator::new(r_g, shape)?,
        constraints,
        psi0,
        sampler: RepSampler::Lifted {
            base: Box::new(RepSampler::FundamentalUnitary { d }),
            slots: vec![Slot::Plain, Slot::Identity(d)],
        },
    })
}

/// Spin-j coherent states `U_g|-j⟩`: `R_F = P_{2j}^θ/(4j+1)` with θ the transpose of the
/// first factor, `R_G = Tr₂[(I ⊗ |-j⟩⟨-j|) P_{2j}] ⊗ I/(4j+1)`, and `Tr[R0] = 2j+1`.
pub fn build_spin(j: HalfInt) -> Result<Scenario> {
    let j = j.as_spin()?;
    let n = j.multiplet_dim();
    let shape = TensorShape::bipartite(n, n);
    let norm = 1.0 / (2 * j.twice() + 1) as f64;
    let top = total_spin_projector(j, HalfInt::from_twice(2 * j.twice()))?;
    let r_f = top.partial_transpose(&[0])?.scale(norm);
    let psi0 = ComplexMatrix::basis_vector(n, 0);
    let weighted = ComplexMatrix::identity(n)
        .kron(&projector(&psi0))
        .matmul(top.matrix());
    let weighted = (&weighted + &weighted.adjoint()).scale_real(0.5);
    let reduced = HermitianOperator::new(weighted, shape.clone())?.partial_trace(&[1])?;
    let r_g = reduced
        .matrix()
        .kron(&ComplexMatrix::identity(n))
        .scale_real(norm);
    let trace = LinearConstraint::new(HermitianOperator::identity(shape.clone()), n as f64)?;
    Ok(Scenario {
        family: Family::Spin { j },
        in_dim: n,
        out_dim: n,
        r_f,
        r_g: HermitianOperator::new(r_g, shape)?,
        constraints: vec![trace],
        psi0,
        sampler: RepSampler::Spin { j },
    })
}

/// Largest `|Σ A†A - I|` over a Kraus list.
pub(crate) fn completeness_deviation(kraus: &[&ComplexMatrix], dim: usize) -> f64 {
    let mut sum = ComplexMatrix::zeros(dim, dim);
    for a in kraus {
        sum = &sum + &a.adjoint().matmul(a);
    }
    sum.max_abs_diff(&ComplexMatrix::identity(dim))
}

pub(crate) fn check_instrument(
    kraus_by_outcome: &[Vec<ComplexMatrix>],
    guess_unitaries: &[ComplexMatrix],
) -> Result<usize> {
    if kraus_by_outcome.len() != guess_unitaries.len() || kraus_by_outcome.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} guess unitaries", kraus_by_outcome.len()),
            found: format!("{}", guess_unitaries.len()),
        });
    }
    let dim = guess_unitaries[0].rows();
    let all: Vec<&ComplexMatrix> = kraus_by_outcome.iter().flatten().collect();
    for m in all.iter().copied().chain(guess_unitaries) {
        if m.rows() != dim || m.cols() != dim {
            return Err(Error::DimensionMismatch {
                expected: format!("{dim}x{dim}"),
                found: format!("{}x{}", m.rows(), m.cols()),
            });
        }
    }
    let deviation = completeness_deviation(&all, dim);
    if deviation > 1e-10 {
        return Err(Error::Completeness { deviation });
    }
    Ok(dim)
}

/// Seed of the covariantized instrument:
/// `R0 = Σ_{rμ} vec(U_r† A_{rμ} U_r) vec(U_r† A_{rμ} U_r)†`, where `U_r` prepares the guess
/// for outcome `r`. The result has the bipartite layout `d ⊗ d`; use
/// [`HermitianOperator::with_shape`] to attach a finer factorization.
pub fn covariant_seed(
    kraus_by_outcome: &[Vec<ComplexMatrix>],
    guess_unitaries: &[ComplexMatrix],
) -> Result<HermitianOperator> {
    let dim = check_instrument(kraus_by_outcome, guess_unitaries)?;
    let mut acc = ComplexMatrix::zeros(dim * dim, dim * dim);
    for (ops, u) in kraus_by_outcome.iter().zip(guess_unitaries) {
        let ud = u.adjoint();
        for a in ops {
            let v = ud.matmul(a).matmul(u).vec();
            acc = &acc + &ComplexMatrix::outer(&v, &v);
        }
    }
    HermitianOperator::new(acc, TensorShape::bipartite(dim, dim))
}

/// Monte Carlo `∫ |ψ_g⟩⟨ψ_g|ᵀ ⊗ |ψ_g⟩⟨ψ_g|` with `ψ_g = V_g ψ0`: the sample mean and its
/// largest entrywise standard error. Converges to `R_F`.
pub fn monte_carlo_fidelity_operator(
    s: &Scenario,
    n: usize,
    seed: u64,
) -> Result<(ComplexMatrix, f64)> {
    if n < 2 {
        return Err(Error::TooFewSamples { found: n, min: 2 });
    }
    let prepared = s.sampler.prepare()?;
    let dim = s.r_f.dim();
    let parts = par_chunks(n, seed, |r, count| {
        let mut st = MatrixStats::new(dim, dim);
        for _ in 0..count {
            let psi = prepared.sample(r).matmul(&s.psi0);
            let v = psi.conj().kron(&psi);
            st.push(&ComplexMatrix::outer(&v, &v));
        }
        st
    });
    let mut total = MatrixStats::new(dim, dim);
    for p in &parts {
        total.merge(p);
    }
    Ok((total.mean(), total.max_standard_error()))
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;
    use crate::group::haar_unitary;
    use crate::matrix::testutil::rng;
    use crate::matrix::C64;
    use proptest::prelude::*;

    fn half(t: u32) -> HalfInt {
        HalfInt::from_twice(t)
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert_eq!(build_pure(1).unwrap_err(), Error::InvalidDimension(1));
        assert_eq!(build_maxent(0).unwrap_err(), Error::InvalidDimension(0));
        assert!(matches!(build_spin(half(0)), Err(Error::InvalidSpin(_))));
    }

    #[test]
    fn normalization_positivity_and_estimation_form() {
        for s in scenarios() {
            assert!((s.r_f.trace() - 1.0).abs() <= 1e-10, "{}", s.family);
            assert!(s.r_f.min_eigenvalue().unwrap() >= -1e-10);
            assert!(s.r_g.min_eigenvalue().unwrap() >= -1e-10);
            assert_eq!(s.in_dim, s.out_dim);
            let defining = estimation_operator(&s.r_f, &s.psi0).unwrap();
            assert!(
                s.r_g.matrix().max_abs_diff(defining.matrix()) <= 1e-12,
                "{}",
                s.family
            );
        }
    }

    #[test]
    fn pure_fidelity_operator_spectrum() {
        for d in [2usize, 3, 4] {
            let s = build_pure(d).unwrap();
            let e = s.r_f.eigh().unwrap();
            let small = 1.0 / (d * (d + 1)) as f64;
            assert!((e.values[d * d - 1] - 1.0 / d as f64).abs() < 1e-12);
            assert!(e.values[..d * d - 1]
                .iter()
                .all(|&x| (x - small).abs() < 1e-12));
        }
    }

    #[test]
    fn maxent_literal_estimation_term_is_inconsistent() {
        // The entangling term placed on the output pair does not have the X_in ⊗ I_out form.
        let d = 2;
        let s = build_maxent(d).unwrap();
        let factors = [d; 4];
        let ent = ComplexMatrix::outer(
            &ComplexMatrix::max_entangled(d),
            &ComplexMatrix::max_entangled(d),
        );
        let ent34 = ComplexMatrix::embed(&ent, &[2, 3], &factors).unwrap();
        let df = d as f64;
        let literal = (&ComplexMatrix::identity(16).scale_real(1.0 - 2.0 / (df * df))
            + &ent34.scale_real(1.0 / df))
            .scale_real(1.0 / (df * df * (df * df - 1.0)));
        let defining = estimation_operator(&s.r_f, &s.psi0).unwrap();
        assert!(literal.max_abs_diff(defining.matrix()) > 1e-2);
        assert!(s.r_g.matrix().max_abs_diff(defining.matrix()) <= 1e-12);
    }

    #[test]
    fn closed_forms_match_monte_carlo() {
        for (s, seed) in [
            (build_pure(2).unwrap(), 1),
            (build_maxent(2).unwrap(), 2),
            (build_spin(half(2)).unwrap(), 3),
        ] {
            let (mean, se) = monte_carlo_fidelity_operator(&s, 200_000, seed).unwrap();
            let dev = mean.max_abs_diff(s.r_f.matrix());
            assert!(dev <= 0.01, "{}: deviation {dev} (se {se})", s.family);
        }
    }

    #[test]
    fn fidelity_operator_is_covariant() {
        let mut r = rng(4);
        for s in scenarios() {
            let p = s.sampler.prepare().unwrap();
            for _ in 0..10 {
                let v = p.sample(&mut r);
                let vv = v.conj().kron(&v);
                let moved = vv.conjugate(s.r_f.matrix());
                assert!(moved.max_abs_diff(s.r_f.matrix()) <= 1e-10, "{}", s.family);
            }
        }
    }

    #[test]
    fn spin_half_equals_qubit() {
        let a = build_spin(half(1)).unwrap();
        let b = build_pure(2).unwrap();
        assert!(a.r_f.matrix().max_abs_diff(b.r_f.matrix()) <= 1e-12);
        assert!(a.r_g.matrix().max_abs_diff(b.r_g.matrix()) <= 1e-12);
        assert_eq!(a.constraints.len(), b.constraints.len());
        for (x, y) in a.constraints.iter().zip(&b.constraints) {
            assert!(x.operator.matrix().max_abs_diff(y.operator.matrix()) <= 1e-12);
            assert_eq!(x.value, y.value);
        }
    }

    #[test]
    fn identity_seed_endpoints() {
        for s in scenarios() {
            let seed = s.identity_seed();
            assert!(
                s.constraint_residual(&seed).unwrap() <= 1e-12,
                "{}",
                s.family
            );
            let f = s.operation_fidelity(&seed).unwrap();
            let g = s.estimation_fidelity(&seed).unwrap();
            let expected_g = match s.family {
                Family::Pure { d } => 1.0 / d as f64,
                Family::Maxent { d } => 1.0 / (d * d) as f64,
                Family::Spin { j } => 1.0 / j.multiplet_dim() as f64,
            };
            assert!((f - 1.0).abs() <= 1e-12, "{}: F = {f}", s.family);
            assert!((g - expected_g).abs() <= 1e-12, "{}: G = {g}", s.family);
        }
    }

    #[test]
    fn identity_constraint_chain_for_maxent() {
        let s = build_maxent(2).unwrap();
        let seed = s.identity_seed();
        let reduced = seed.partial_trace(&[2, 3]).unwrap();
        assert!(reduced.matrix().max_abs_diff(&ComplexMatrix::identity(4)) == 0.0);
        let single = reduced.partial_trace(&[0]).unwrap();
        assert!(
            single
                .matrix()
                .max_abs_diff(&ComplexMatrix::identity(2).scale_real(2.0))
                == 0.0
        );
    }

    #[test]
    fn measure_prepare_endpoints() {
        for s in scenarios() {
            let seed = s.measure_prepare_seed().unwrap();
            assert!(s.constraint_residual(&seed).unwrap() <= 1e-12);
            let f = s.operation_fidelity(&seed).unwrap();
            let g = s.estimation_fidelity(&seed).unwrap();
            match s.family {
                Family::Pure { d } => {
                    let v = 2.0 / (d + 1) as f64;
                    assert!((f - v).abs() <= 1e-12 && (g - v).abs() <= 1e-12);
                }
                Family::Spin { j } => {
                    let v = j.multiplet_dim() as f64 / (2 * j.twice() + 1) as f64;
                    assert!(
                        (f - v).abs() <= 1e-12 && (g - v).abs() <= 1e-12,
                        "{}",
                        s.family
                    );
                }
                Family::Maxent { d } => {
                    // d² ∫ |Tr U / d|⁴ dU = 2/d²
                    let v = 2.0 / (d * d) as f64;
                    assert!((f - v).abs() <= 1e-12 && (g - v).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn covariant_seed_of_identity_instrument() {
        let d = 3;
        let seed = covariant_seed(
            &[vec![ComplexMatrix::identity(d)]],
            &[ComplexMatrix::identity(d)],
        )
        .unwrap();
        assert_eq!(seed, build_pure(d).unwrap().identity_seed());
    }

    #[test]
    fn covariant_seed_errors() {
        let half_id = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(matches!(
            covariant_seed(&[vec![half_id]], &[ComplexMatrix::identity(2)]),
            Err(Error::Completeness { .. })
        ));
        assert!(matches!(
            covariant_seed(&[vec![ComplexMatrix::identity(2)]], &[]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            covariant_seed(
                &[vec![ComplexMatrix::identity(3)]],
                &[ComplexMatrix::identity(2)]
            ),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn covariant_seed_is_phase_invariant() {
        let mut r = rng(5);
        let kraus = random_kraus(2, 2, &mut r);
        let guesses = vec![haar_unitary(2, &mut r), haar_unitary(2, &mut r)];
        let a =
            covariant_seed(&[vec![kraus[0].clone()], vec![kraus[1].clone()]], &guesses).unwrap();
        let phased = kraus[0].scale(C64::from_polar(1.0, 0.7));
        let b = covariant_seed(&[vec![phased], vec![kraus[1].clone()]], &guesses).unwrap();
        assert!(a.matrix().max_abs_diff(b.matrix()) <= 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn covariant_seeds_are_valid(seed in any::<u64>(), family in 0usize..3, outcomes in 1usize..4) {
            let s = match family {
                0 => build_pure(2).unwrap(),
                1 => build_spin(half(2)).unwrap(),
                _ => build_maxent(2).unwrap(),
            };
            let mut r = rng(seed);
            let dim = s.in_dim;
            let kraus = random_kraus(dim, outcomes, &mut r);
            let prepared = s.sampler.prepare().unwrap();
            let guesses: Vec<_> = (0..outcomes).map(|_| prepared.sample(&mut r)).collect();
            let by_outcome: Vec<_> = kraus.into_iter().map(|k| vec![k]).collect();
            let x = covariant_seed(&by_outcome, &guesses).unwrap()
                .with_shape(s.seed_shape().clone()).unwrap();
            prop_assert!(s.constraint_residual(&x).unwrap() <= 1e-10);
            let f = s.operation_fidelity(&x).unwrap();
            let g = s.estimation_fidelity(&x).unwrap();
            prop_assert!((-1e-9..=1.0 + 1e-9).contains(&f));
            prop_assert!((-1e-9..=1.0 + 1e-9).contains(&g));
        }
    }
}
