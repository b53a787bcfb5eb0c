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

use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("tensor factor index {index} out of range for {count} factors")]
    FactorOutOfRange { index: usize, count: usize },

    #[error("tensor shape {factors:?} does not match matrix dimension {dim}")]
    ShapeMismatch { factors: Vec<usize>, dim: usize },

    #[error("matrix is not Hermitian (max |M - M†| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("eigensolver did not converge after {iterations} sweeps (max |M| = {norm:e})")]
    NoConvergence { norm: f64, iterations: usize },

    #[error("invalid spin {0}: 2j must be a positive integer")]
    InvalidSpin(String),

    #[error("total spin {l} is outside the coupling range 0..={max} of j ⊗ j")]
    SpinOutOfRange { l: f64, max: f64 },

    #[error("invalid dimension {0}: at least 2 is required")]
    InvalidDimension(usize),

    #[error("Kraus operators violate completeness (max |Σ A†A - I| = {deviation:e})")]
    Completeness { deviation: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("inconsistent linear constraints (residual {residual:e} after Gram reduction)")]
    InconsistentConstraints { residual: f64 },

    #[error("semidefinite program is infeasible")]
    Infeasible,

    #[error("numerical failure in the interior-point solver: {0}")]
    NumericalFailure(String),

    #[error("too few samples: {found} (at least {min} required)")]
    TooFewSamples { found: usize, min: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
