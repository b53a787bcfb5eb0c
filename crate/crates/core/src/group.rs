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

//! Group representation tooling: Haar sampling on U(d) and SU(2) irreps, spin operators,
//! total-spin projectors and group twirls (exact and Monte Carlo).
//!
//! Sampling is done on U(d) rather than SU(d). Every group average used here has the form
//! `∫ V_g Y V_g†`, in which a global phase of `V_g` cancels, so the two measures give the
//! same twirls.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, Eigh, HermitianOperator, TensorShape, C64, ONE, ZERO};
use crate::stats::{par_chunks, MatrixStats};

/// Non-negative half-integer stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct HalfInt(u32);

impl HalfInt {
    pub const fn from_twice(twice: u32) -> Self {
        Self(twice)
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// Dimension `2j + 1` of the spin-j irrep.
    pub fn multiplet_dim(self) -> usize {
        self.0 as usize + 1
    }

    /// Validates `2j ≥ 1`.
    pub fn as_spin(self) -> Result<Self> {
        if self.0 == 0 {
            return Err(Error::InvalidSpin(self.to_string()));
        }
        Ok(self)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    /// Accepts `"p/q"` or a decimal; the value must be a non-negative multiple of 1/2.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidSpin(s.to_string());
        let value = match s.split_once('/') {
            Some((p, q)) => {
                let p: f64 = p.trim().parse().map_err(|_| bad())?;
                let q: f64 = q.trim().parse().map_err(|_| bad())?;
                if q == 0.0 {
                    return Err(bad());
                }
                p / q
            }
            None => s.parse::<f64>().map_err(|_| bad())?,
        };
        let twice = 2.0 * value;
        if !twice.is_finite() || twice < 0.0 || (twice - twice.round()).abs() > 1e-9 || twice > 1e6
        {
            return Err(bad());
        }
        Ok(Self(twice.round() as u32))
    }
}

impl From<HalfInt> for String {
    fn from(h: HalfInt) -> String {
        h.to_string()
    }
}

impl TryFrom<String> for HalfInt {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Draws a Haar-random unitary on U(d).
///
/// A complex Ginibre matrix is orthonormalized column by column (Gram-Schmidt with one
/// reorthogonalization pass). This is the QR factorization whose triangular factor has a
/// positive real diagonal, which is the phase normalization that makes Q Haar distributed.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = (0..d)
        .map(|_| {
            (0..d)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
                })
                .collect()
        })
        .collect();
    for k in 0..d {
        for _ in 0..2 {
            for prev in 0..k {
                let (done, rest) = cols.split_at_mut(k);
                let q = &done[prev];
                let v = &mut rest[0];
                let proj: C64 = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for (x, a) in v.iter_mut().zip(q) {
                    *x -= proj * a;
                }
            }
        }
        let norm = cols[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for x in cols[k].iter_mut() {
            *x /= norm;
        }
    }
    ComplexMatrix::from_fn(d, d, |r, c| cols[c][r])
}

/// Angular momentum matrices `(Jx, Jy, Jz)` of the spin-j irrep.
///
/// Basis index `k` carries `Jz` eigenvalue `m = -j + k`, so index 0 is `|-j⟩`.
pub fn spin_operators(
    j: HalfInt,
) -> Result<(HermitianOperator, HermitianOperator, HermitianOperator)> {
    let j = j.as_spin()?;
    let n = j.multiplet_dim();
    let jv = j.value();
    let m = |k: usize| -jv + k as f64;
    let mut raise = ComplexMatrix::zeros(n, n);
    for k in 0..n - 1 {
        let mk = m(k);
        raise[(k + 1, k)] = C64::new((jv * (jv + 1.0) - mk * (mk + 1.0)).sqrt(), 0.0);
    }
    let lower = raise.adjoint();
    let jx = (&raise + &lower).scale_real(0.5);
    let jy = (&raise - &lower).scale(C64::new(0.0, -0.5));
    let jz = ComplexMatrix::real_diagonal(&(0..n).map(m).collect::<Vec<_>>());
    Ok((
        HermitianOperator::flat(jx)?,
        HermitianOperator::flat(jy)?,
        HermitianOperator::flat(jz)?,
    ))
}

/// Spin-j rotations with the `Jy` spectral decomposition cached.
#[derive(Clone, Debug)]
pub struct SpinRep {
    j: HalfInt,
    jz: Vec<f64>,
    jy: Eigh,
}

impl SpinRep {
    pub fn new(j: HalfInt) -> Result<Self> {
        let (_, jy, jz) = spin_operators(j)?;
        let n = j.multiplet_dim();
        Ok(Self {
            j,
            jz: (0..n).map(|k| jz.matrix()[(k, k)].re).collect(),
            jy: jy.eigh()?,
        })
    }

    pub fn j(&self) -> HalfInt {
        self.j
    }

    /// `exp(-iα Jz) · exp(-iβ Jy) · exp(-iγ Jz)`.
    pub fn rotation(&self, alpha: f64, beta: f64, gamma: f64) -> ComplexMatrix {
        let ry = self.jy.apply(|x| C64::from_polar(1.0, -beta * x));
        let n = self.jz.len();
        ComplexMatrix::from_fn(n, n, |r, c| {
            C64::from_polar(1.0, -alpha * self.jz[r])
                * ry[(r, c)]
                * C64::from_polar(1.0, -gamma * self.jz[c])
        })
    }

    /// Haar-distributed rotation: α, γ uniform on [0, 2π), cos β uniform on [-1, 1].
    pub fn haar<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexMatrix {
        let alpha = rng.random_range(0.0..2.0 * PI);
        let gamma = rng.random_range(0.0..2.0 * PI);
        let beta = rng.random_range(-1.0f64..=1.0).clamp(-1.0, 1.0).acos();
        self.rotation(alpha, beta, gamma)
    }
}

/// Euler rotation in the spin-j irrep. Each exponential is evaluated spectrally.
pub fn spin_rotation(j: HalfInt, alpha: f64, beta: f64, gamma: f64) -> Result<ComplexMatrix> {
    Ok(SpinRep::new(j)?.rotation(alpha, beta, gamma))
}

/// One Haar-random spin-j rotation. Callers drawing many samples should reuse a [`SpinRep`].
pub fn haar_spin<R: Rng + ?Sized>(j: HalfInt, rng: &mut R) -> Result<ComplexMatrix> {
    Ok(SpinRep::new(j)?.haar(rng))
}

/// Absolute tolerance used to cluster the two-spin Casimir spectrum.
const CASIMIR_TOL: f64 = 1e-8;

/// Projector onto total spin `l` inside `j ⊗ j`, as the `l(l+1)` eigenspace of
/// `(J ⊗ I + I ⊗ J)²`.
pub fn total_spin_projector(j: HalfInt, l: HalfInt) -> Result<HermitianOperator> {
    let j = j.as_spin()?;
    if l.twice() % 2 == 1 || l.twice() > 2 * j.twice() {
        return Err(Error::SpinOutOfRange {
            l: l.value(),
            max: 2.0 * j.value(),
        });
    }
    let n = j.multiplet_dim();
    let (jx, jy, jz) = spin_operators(j)?;
    let id = ComplexMatrix::identity(n);
    let mut casimir = ComplexMatrix::zeros(n * n, n * n);
    for op in [&jx, &jy, &jz] {
        let total = &op.matrix().kron(&id) + &id.kron(op.matrix());
        casimir = &casimir + &total.matmul(&total);
    }
    let shape = TensorShape::bipartite(n, n);
    let eig = HermitianOperator::new(casimir, shape.clone())?.eigh()?;
    let target = l.value() * (l.value() + 1.0);
    let proj = eig.apply(|x| {
        if (x - target).abs() <= CASIMIR_TOL {
            ONE
        } else {
            ZERO
        }
    });
    HermitianOperator::new(proj, shape)
}

/// Group average over an irreducible representation: `(Tr[y] / d) · I`.
pub fn schur_twirl_irreducible(y: &HermitianOperator, d: usize) -> Result<HermitianOperator> {
    if y.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: format!("{d}x{d}"),
            found: format!("{}x{}", y.dim(), y.dim()),
        });
    }
    Ok(HermitianOperator::identity(y.shape().clone()).scale(y.trace() / d as f64))
}

/// Action of a lifted representation on one tensor slot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    Plain,
    Conjugate,
    Identity(usize),
}

/// Descriptor of the representation `g ↦ V_g` that a scenario averages over.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepSampler {
    /// Defining representation of U(d).
    FundamentalUnitary { d: usize },
    /// Spin-j irrep of SU(2).
    Spin { j: HalfInt },
    /// Tensor product over slots, each carrying the base representation, its conjugate, or
    /// an identity.
    Lifted {
        base: Box<RepSampler>,
        slots: Vec<Slot>,
    },
}

impl RepSampler {
    pub fn dimension(&self) -> usize {
        match self {
            Self::FundamentalUnitary { d } => *d,
            Self::Spin { j } => j.multiplet_dim(),
            Self::Lifted { base, slots } => slots
                .iter()
                .map(|s| match s {
                    Slot::Identity(n) => *n,
                    _ => base.dimension(),
                })
                .product(),
        }
    }

    pub fn prepare(&self) -> Result<PreparedSampler> {
        let spin = match self {
            Self::Spin { j } => Some(SpinRep::new(*j)?),
            Self::FundamentalUnitary { d } if *d == 0 => {
                return Err(Error::InvalidArgument(
                    "representation dimension must be positive".into(),
                ))
            }
            _ => None,
        };
        let base = match self {
            Self::Lifted { base, .. } => Some(Box::new(base.prepare()?)),
            _ => None,
        };
        Ok(PreparedSampler {
            desc: self.clone(),
            spin,
            base,
        })
    }
}

/// A [`RepSampler`] with its spectral caches built.
#[derive(Clone, Debug)]
pub struct PreparedSampler {
    desc: RepSampler,
    spin: Option<SpinRep>,
    base: Option<Box<PreparedSampler>>,
}

impl PreparedSampler {
    pub fn descriptor(&self) -> &RepSampler {
        &self.desc
    }

    pub fn dimension(&self) -> usize {
        self.desc.dimension()
    }

    /// Draws the underlying group element as a matrix of the innermost representation.
    pub fn sample_base<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexMatrix {
        match (&self.desc, &self.spin, &self.base) {
            (RepSampler::FundamentalUnitary { d }, _, _) => haar_unitary(*d, rng),
            (RepSampler::Spin { .. }, Some(rep), _) => rep.haar(rng),
            (RepSampler::Lifted { .. }, _, Some(base)) => base.sample_base(rng),
            _ => unreachable!("prepared sampler is consistent with its descriptor"),
        }
    }

    /// Maps a base group element to this representation.
    pub fn represent(&self, u: &ComplexMatrix) -> ComplexMatrix {
        match (&self.desc, &self.base) {
            (RepSampler::Lifted { slots, .. }, Some(base)) => {
                let v = base.represent(u);
                slots
                    .iter()
                    .fold(ComplexMatrix::identity(1), |acc, s| match s {
                        Slot::Plain => acc.kron(&v),
                        Slot::Conjugate => acc.kron(&v.conj()),
                        Slot::Identity(n) => acc.kron(&ComplexMatrix::identity(*n)),
                    })
            }
            _ => u.clone(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexMatrix {
        self.represent(&self.sample_base(rng))
    }
}

/// Monte Carlo estimate of a group twirl.
#[derive(Clone, Debug)]
pub struct TwirlReport {
    pub sample_count: usize,
    pub mean: HermitianOperator,
    /// Largest entrywise standard error of `mean`.
    pub standard_error: f64,
}

/// `V_g = ⊗_k (U_g or U_g*)` for the given per-slot conjugation flags.
fn slot_product(u: &ComplexMatrix, conjugate: &[bool]) -> ComplexMatrix {
    let uc = u.conj();
    conjugate
        .iter()
        .fold(ComplexMatrix::identity(1), |acc, &c| {
            acc.kron(if c { &uc } else { u })
        })
}

fn check_twirl_args(
    sampler: &PreparedSampler,
    conjugate: &[bool],
    y: &HermitianOperator,
    n: usize,
) -> Result<()> {
    if n < 2 {
        return Err(Error::TooFewSamples { found: n, min: 2 });
    }
    let expected = sampler.dimension().pow(conjugate.len() as u32);
    if expected != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("{expected}x{expected}"),
            found: format!("{}x{}", y.dim(), y.dim()),
        });
    }
    Ok(())
}

fn twirl_chunk<R: Rng + ?Sized>(
    sampler: &PreparedSampler,
    conjugate: &[bool],
    y: &HermitianOperator,
    count: usize,
    rng: &mut R,
) -> MatrixStats {
    let mut stats = MatrixStats::new(y.dim(), y.dim());
    for _ in 0..count {
        let v = slot_product(&sampler.sample(rng), conjugate);
        stats.push(&v.conjugate(y.matrix()));
    }
    stats
}

fn finish_twirl(stats: MatrixStats, y: &HermitianOperator) -> Result<TwirlReport> {
    let mean = stats.mean();
    let mean =
        HermitianOperator::new((&mean + &mean.adjoint()).scale_real(0.5), y.shape().clone())?;
    Ok(TwirlReport {
        sample_count: stats.count,
        mean,
        standard_error: stats.max_standard_error(),
    })
}

/// `(1/n) Σ V_g y V_g†` over `n` Haar samples drawn from `rng`.
pub fn monte_carlo_twirl<R: Rng + ?Sized>(
    sampler: &RepSampler,
    conjugate: &[bool],
    y: &HermitianOperator,
    n: usize,
    rng: &mut R,
) -> Result<TwirlReport> {
    let prepared = sampler.prepare()?;
    check_twirl_args(&prepared, conjugate, y, n)?;
    finish_twirl(twirl_chunk(&prepared, conjugate, y, n, rng), y)
}

/// Parallel [`monte_carlo_twirl`] over chunked streams derived from `seed`.
pub fn monte_carlo_twirl_seeded(
    sampler: &RepSampler,
    conjugate: &[bool],
    y: &HermitianOperator,
    n: usize,
    seed: u64,
) -> Result<TwirlReport> {
    let prepared = sampler.prepare()?;
    check_twirl_args(&prepared, conjugate, y, n)?;
    let parts = par_chunks(n, seed, |rng, count| {
        twirl_chunk(&prepared, conjugate, y, count, rng)
    });
    let mut total = MatrixStats::new(y.dim(), y.dim());
    for p in &parts {
        total.merge(p);
    }
    finish_twirl(total, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::testutil::{random_hermitian, rng};
    use crate::matrix::I;
    use crate::stats::stream_rng;

    fn half(twice: u32) -> HalfInt {
        HalfInt::from_twice(twice)
    }

    fn unitarity_error(u: &ComplexMatrix) -> f64 {
        u.adjoint()
            .matmul(u)
            .max_abs_diff(&ComplexMatrix::identity(u.rows()))
    }

    #[test]
    fn half_int_parsing() {
        assert_eq!("3/2".parse::<HalfInt>().unwrap(), half(3));
        assert_eq!("1.5".parse::<HalfInt>().unwrap(), half(3));
        assert_eq!("2".parse::<HalfInt>().unwrap(), half(4));
        assert_eq!(" 6/4 ".parse::<HalfInt>().unwrap(), half(3));
        assert!("1/3".parse::<HalfInt>().is_err());
        assert!("-1/2".parse::<HalfInt>().is_err());
        assert!("abc".parse::<HalfInt>().is_err());
        assert!("1/0".parse::<HalfInt>().is_err());
        assert_eq!(half(3).to_string(), "3/2");
        assert_eq!(half(2).to_string(), "1");
        assert!(half(0).as_spin().is_err());
    }

    #[test]
    fn haar_unitary_d1_is_phase() {
        let u = haar_unitary(1, &mut rng(1));
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn haar_unitary_mean_and_character() {
        let mut r = stream_rng(2, 0);
        for d in 2..=4 {
            let n = 100_000;
            let mut mean = ComplexMatrix::zeros(d, d);
            let mut chi2 = 0.0;
            for _ in 0..n {
                let u = haar_unitary(d, &mut r);
                assert!(unitarity_error(&u) <= 1e-12);
                chi2 += u.trace().norm_sqr();
                mean = &mean + &u;
            }
            mean = mean.scale_real(1.0 / n as f64);
            assert!(mean.max_abs() <= 0.02, "d={d} mean {}", mean.max_abs());
            assert!(
                (chi2 / n as f64 - 1.0).abs() <= 0.03,
                "d={d} |χ|² {}",
                chi2 / n as f64
            );
        }
    }

    #[test]
    fn spin_half_operators_are_halved_paulis() {
        // Index 0 is m = -1/2, so relative to the usual (up, down) ordering the basis is
        // reversed: Jx = σx/2, Jy = -σy/2, Jz = -σz/2.
        let (jx, jy, jz) = spin_operators(half(1)).unwrap();
        let sx =
            ComplexMatrix::from_fn(2, 2, |r, c| if r != c { C64::new(0.5, 0.0) } else { ZERO });
        let sy = ComplexMatrix::from_fn(2, 2, |r, c| match (r, c) {
            (0, 1) => C64::new(0.0, 0.5),
            (1, 0) => C64::new(0.0, -0.5),
            _ => ZERO,
        });
        let sz = ComplexMatrix::real_diagonal(&[-0.5, 0.5]);
        assert_eq!(jx.matrix(), &sx);
        assert!(jy.matrix().max_abs_diff(&sy) < 1e-15);
        assert_eq!(jz.matrix(), &sz);
    }

    #[test]
    fn spin_algebra_and_casimir() {
        for twice in 1..=6 {
            let j = half(twice);
            let (jx, jy, jz) = spin_operators(j).unwrap();
            let (x, y, z) = (jx.matrix(), jy.matrix(), jz.matrix());
            let comm = &x.matmul(y) - &y.matmul(x);
            assert!(comm.max_abs_diff(&z.scale(I)) <= 1e-12);
            let cas = &(&x.matmul(x) + &y.matmul(y)) + &z.matmul(z);
            let expected = ComplexMatrix::identity(j.multiplet_dim())
                .scale_real(j.value() * (j.value() + 1.0));
            assert!(cas.max_abs_diff(&expected) <= 1e-12);
            assert_eq!(z[(0, 0)].re, -j.value());
        }
    }

    #[test]
    fn spin_rotation_cases() {
        let id = spin_rotation(half(3), 0.0, 0.0, 0.0).unwrap();
        assert!(id.max_abs_diff(&ComplexMatrix::identity(4)) <= 1e-12);
        let flip = spin_rotation(half(1), 0.0, PI, 0.0).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        assert!(flip.max_abs_diff(&expected) <= 1e-12);
        for twice in 1..=4 {
            let rep = SpinRep::new(half(twice)).unwrap();
            let (a, b, g) = (0.3, 1.1, -2.2);
            let composed = rep.rotation(a, 0.0, 0.0).matmul(&rep.rotation(0.0, b, g));
            assert!(composed.max_abs_diff(&rep.rotation(a, b, g)) <= 1e-12);
            assert!(unitarity_error(&rep.rotation(a, b, g)) <= 1e-12);
        }
    }

    #[test]
    fn haar_spin_half_twirl_and_spin_one_character() {
        let rep = SpinRep::new(half(1)).unwrap();
        let mut r = stream_rng(3, 0);
        let y = ComplexMatrix::real_diagonal(&[1.0, 0.0]);
        let mut acc = ComplexMatrix::zeros(2, 2);
        let n = 100_000;
        for _ in 0..n {
            let u = rep.haar(&mut r);
            assert!(unitarity_error(&u) <= 1e-12);
            acc = &acc + &u.conjugate(&y);
        }
        let mean = acc.scale_real(1.0 / n as f64);
        assert!(mean.max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) <= 0.02);

        let rep1 = SpinRep::new(half(2)).unwrap();
        let chi2: f64 = (0..n)
            .map(|_| rep1.haar(&mut r).trace().norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((chi2 - 1.0).abs() <= 0.03, "{chi2}");
    }

    #[test]
    fn triplet_projector_is_symmetric_subspace() {
        let p = total_spin_projector(half(1), half(2)).unwrap();
        let swap = HermitianOperator::from_vector(
            &ComplexMatrix::max_entangled(2),
            TensorShape::bipartite(2, 2),
        )
        .unwrap()
        .partial_transpose(&[0])
        .unwrap();
        let expected = (&ComplexMatrix::identity(4) + swap.matrix()).scale_real(0.5);
        assert!(p.matrix().max_abs_diff(&expected) <= 1e-12);
    }

    #[test]
    fn projectors_are_complete_orthogonal_with_correct_rank() {
        for twice in [2, 3, 4] {
            let j = half(twice);
            let n = j.multiplet_dim();
            let ps: Vec<_> = (0..=twice)
                .map(|l| total_spin_projector(j, half(2 * l)).unwrap())
                .collect();
            let mut sum = ComplexMatrix::zeros(n * n, n * n);
            for (l, p) in ps.iter().enumerate() {
                let m = p.matrix();
                assert!(m.matmul(m).max_abs_diff(m) <= 1e-10);
                assert!((p.trace() - (2 * l + 1) as f64).abs() <= 1e-10);
                sum = &sum + m;
                for q in &ps[l + 1..] {
                    assert!(m.matmul(q.matrix()).max_abs() <= 1e-10);
                }
            }
            assert!(sum.max_abs_diff(&ComplexMatrix::identity(n * n)) <= 1e-10);
        }
        assert!(matches!(
            total_spin_projector(half(2), half(6)),
            Err(Error::SpinOutOfRange { .. })
        ));
        assert!(total_spin_projector(half(2), half(1)).is_err());
    }

    #[test]
    fn exact_twirl_cases() {
        let shape = TensorShape::flat(3);
        let id = HermitianOperator::identity(shape.clone());
        assert_eq!(schur_twirl_irreducible(&id, 3).unwrap(), id);
        let mut traceless = ComplexMatrix::zeros(3, 3);
        traceless[(0, 0)] = ONE;
        traceless[(2, 2)] = -ONE;
        let t = HermitianOperator::flat(traceless).unwrap();
        assert_eq!(
            schur_twirl_irreducible(&t, 3).unwrap().matrix().max_abs(),
            0.0
        );
        let y = random_hermitian(shape, &mut rng(4));
        let exact = schur_twirl_irreducible(&y, 3).unwrap();
        assert_eq!(exact.trace(), y.trace());
        let mc = monte_carlo_twirl_seeded(
            &RepSampler::FundamentalUnitary { d: 3 },
            &[false],
            &y,
            200_000,
            5,
        )
        .unwrap();
        assert!(mc.mean.matrix().max_abs_diff(exact.matrix()) <= 0.01);
        assert!(schur_twirl_irreducible(&y, 2).is_err());
    }

    #[test]
    fn monte_carlo_twirl_oracles() {
        let fund = RepSampler::FundamentalUnitary { d: 2 };
        let id = HermitianOperator::identity(TensorShape::bipartite(2, 2));
        let rep = monte_carlo_twirl(&fund, &[true, false], &id, 50, &mut rng(6)).unwrap();
        assert!(rep.mean.matrix().max_abs_diff(id.matrix()) <= 1e-12);

        let y = HermitianOperator::flat(ComplexMatrix::real_diagonal(&[1.0, 0.0])).unwrap();
        let rep = monte_carlo_twirl_seeded(&fund, &[false], &y, 100_000, 7).unwrap();
        let half_id = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(rep.mean.matrix().max_abs_diff(&half_id) <= 3.0 * rep.standard_error);

        for d in [2, 3] {
            let sampler = RepSampler::FundamentalUnitary { d };
            let phi = HermitianOperator::from_vector(
                &ComplexMatrix::max_entangled(d),
                TensorShape::bipartite(d, d),
            )
            .unwrap()
            .scale(1.0 / d as f64);
            let rep = monte_carlo_twirl_seeded(&sampler, &[true, false], &phi, 20_000, 8).unwrap();
            // invariant vector: every term equals the input up to roundoff
            assert!(
                rep.mean.matrix().max_abs_diff(phi.matrix()) <= 3.0 * rep.standard_error + 1e-12
            );
        }
        assert!(matches!(
            monte_carlo_twirl(&fund, &[false], &y, 1, &mut rng(1)),
            Err(Error::TooFewSamples { .. })
        ));
        assert!(monte_carlo_twirl(&fund, &[false, false], &y, 10, &mut rng(1)).is_err());
    }

    #[test]
    fn twirl_commutes_with_representation() {
        let sampler = RepSampler::FundamentalUnitary { d: 2 };
        let y = random_hermitian(TensorShape::bipartite(2, 2), &mut rng(9));
        let rep = monte_carlo_twirl_seeded(&sampler, &[true, false], &y, 100_000, 10).unwrap();
        let prepared = sampler.prepare().unwrap();
        let mut r = rng(11);
        for _ in 0..10 {
            let v = slot_product(&prepared.sample(&mut r), &[true, false]);
            let moved = v.conjugate(rep.mean.matrix());
            assert!(moved.max_abs_diff(rep.mean.matrix()) <= 5.0 * rep.standard_error);
        }
    }

    #[test]
    fn unitary_and_special_unitary_twirls_agree() {
        let y = random_hermitian(TensorShape::bipartite(2, 2), &mut rng(12));
        let mut a = stream_rng(13, 0);
        let mut b = stream_rng(13, 0);
        let mut su = ComplexMatrix::zeros(4, 4);
        let mut un = ComplexMatrix::zeros(4, 4);
        for _ in 0..500 {
            let u = haar_unitary(2, &mut a);
            let u2 = haar_unitary(2, &mut b);
            let det = u2[(0, 0)] * u2[(1, 1)] - u2[(0, 1)] * u2[(1, 0)];
            let s = u2.scale(det.sqrt().inv());
            un = &un + &slot_product(&u, &[true, false]).conjugate(y.matrix());
            su = &su + &slot_product(&s, &[true, false]).conjugate(y.matrix());
        }
        assert!(un.max_abs_diff(&su) <= 1e-11);
    }

    #[test]
    fn lifted_sampler_dimensions_and_action() {
        let lifted = RepSampler::Lifted {
            base: Box::new(RepSampler::FundamentalUnitary { d: 2 }),
            slots: vec![Slot::Plain, Slot::Identity(2)],
        };
        assert_eq!(lifted.dimension(), 4);
        assert_eq!(RepSampler::Spin { j: half(3) }.dimension(), 4);
        let p = lifted.prepare().unwrap();
        let u = p.sample_base(&mut rng(14));
        assert_eq!(p.represent(&u), u.kron(&ComplexMatrix::identity(2)));
        let conj = RepSampler::Lifted {
            base: Box::new(RepSampler::Spin { j: half(1) }),
            slots: vec![Slot::Conjugate, Slot::Plain],
        };
        let p = conj.prepare().unwrap();
        let u = p.sample_base(&mut rng(15));
        assert_eq!(p.represent(&u), u.conj().kron(&u));
    }

    #[test]
    fn seeded_twirl_is_reproducible() {
        let sampler = RepSampler::Spin { j: half(2) };
        let y = random_hermitian(TensorShape::flat(3), &mut rng(16));
        let a = monte_carlo_twirl_seeded(&sampler, &[false], &y, 10_000, 17).unwrap();
        let b = monte_carlo_twirl_seeded(&sampler, &[false], &y, 10_000, 17).unwrap();
        assert_eq!(a.mean, b.mean);
        assert_eq!(a.standard_error, b.standard_error);
    }
}
