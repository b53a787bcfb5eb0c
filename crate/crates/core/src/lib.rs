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

//! Optimal information-disturbance tradeoff for covariant quantum state estimation.
//!
//! A measurement that estimates an unknown state drawn from a group orbit disturbs it. This
//! crate builds the fidelity operators for three state families, solves the semidefinite
//! program over covariant instruments, and traces the optimal operation fidelity F as a
//! function of the estimation fidelity G. Monte Carlo averages over the group check the
//! closed forms and the optimal instruments.
//!
//! ```
//! use covtrade::{build_pure, max_g, SolverOptions};
//! let s = build_pure(2).unwrap();
//! let top = max_g(&s, &SolverOptions::default()).unwrap();
//! assert!((top.g - 2.0 / 3.0).abs() < 1e-6);
//! ```

pub mod cli;
pub mod error;
pub mod group;
pub mod matrix;
pub mod scenarios;
pub mod sdp;
pub mod stats;
pub mod tradeoff;

pub use error::{Error, Result};
pub use group::HalfInt;
pub use matrix::{ComplexMatrix, HermitianOperator, TensorShape};
pub use scenarios::{build_maxent, build_pure, build_spin, covariant_seed, Family, Scenario};
pub use sdp::{solve, solve_with, SdpProblem, SdpSolution, SdpStatus, SolverOptions};
pub use tradeoff::{
    curve_constrained, curve_lagrangian, default_lambda_grid, discrete_fidelities, extract_kraus,
    max_g, verify_fidelities, KrausSet, TradeoffPoint,
};
