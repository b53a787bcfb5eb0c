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

//! Monte Carlo accumulators and reproducible stream splitting.
//!
//! A run of `n` samples is split into a fixed number of chunks whose streams are derived
//! from `(seed, chunk)`. Chunks may execute on any number of threads; partial sums are
//! merged in chunk order, so results are bit-identical for a given seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::matrix::{ComplexMatrix, C64, ZERO};

/// Samples per chunk when splitting work across streams.
pub const CHUNK_SIZE: usize = 4096;

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Splits `n` samples into `(chunk index, count)` pairs.
pub fn chunks(n: usize) -> Vec<(u64, usize)> {
    let k = n.div_ceil(CHUNK_SIZE).max(1);
    (0..k)
        .map(|c| {
            let start = c * n / k;
            let end = (c + 1) * n / k;
            (c as u64, end - start)
        })
        .collect()
}

/// Runs `f(chunk_rng, count)` over all chunks in parallel and folds the results in chunk order.
pub fn par_chunks<T, F>(n: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    chunks(n)
        .into_par_iter()
        .map(|(c, count)| f(&mut stream_rng(seed, c), count))
        .collect()
}

/// Running mean and variance of a real-valued estimator.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ScalarStats {
    pub count: usize,
    sum: f64,
    sum_sq: f64,
}

impl ScalarStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &Self) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let n = self.count as f64;
        if self.count < 2 {
            return 0.0;
        }
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    pub fn standard_error(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}

/// Entrywise running mean and variance of a matrix-valued estimator.
#[derive(Clone, Debug)]
pub struct MatrixStats {
    pub count: usize,
    rows: usize,
    cols: usize,
    sum: Vec<C64>,
    sum_sq: Vec<f64>,
}

impl MatrixStats {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            count: 0,
            rows,
            cols,
            sum: vec![ZERO; rows * cols],
            sum_sq: vec![0.0; rows * cols],
        }
    }

    pub fn push(&mut self, m: &ComplexMatrix) {
        debug_assert_eq!((m.rows(), m.cols()), (self.rows, self.cols));
        self.count += 1;
        for ((s, q), z) in self.sum.iter_mut().zip(&mut self.sum_sq).zip(m.as_slice()) {
            *s += z;
            *q += z.norm_sqr();
        }
    }

    pub fn merge(&mut self, other: &Self) {
        self.count += other.count;
        for (s, o) in self.sum.iter_mut().zip(&other.sum) {
            *s += o;
        }
        for (s, o) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *s += o;
        }
    }

    pub fn mean(&self) -> ComplexMatrix {
        let n = self.count as f64;
        ComplexMatrix::from_vec(
            self.rows,
            self.cols,
            self.sum.iter().map(|s| s / n).collect(),
        )
        .expect("accumulator dimensions are consistent")
    }

    /// Largest entrywise standard error of the mean, using `E|z - E z|²` per entry.
    pub fn max_standard_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        self.sum
            .iter()
            .zip(&self.sum_sq)
            .map(|(s, q)| {
                let var = ((q - s.norm_sqr() / n) / (n - 1.0)).max(0.0);
                (var / n).sqrt()
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn chunks_cover_all_samples() {
        for n in [1, 4095, 4096, 4097, 100_000] {
            let c = chunks(n);
            assert_eq!(c.iter().map(|x| x.1).sum::<usize>(), n);
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: f64 = stream_rng(7, 0).random();
        let b: f64 = stream_rng(7, 0).random();
        let c: f64 = stream_rng(7, 1).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn scalar_stats_of_uniform() {
        let parts = par_chunks(200_000, 3, |rng, count| {
            let mut s = ScalarStats::default();
            for _ in 0..count {
                s.push(rng.random::<f64>());
            }
            s
        });
        let mut total = ScalarStats::default();
        for p in &parts {
            total.merge(p);
        }
        assert_eq!(total.count, 200_000);
        assert!((total.mean() - 0.5).abs() < 4.0 * total.standard_error());
        assert!((total.variance() - 1.0 / 12.0).abs() < 1e-3);
    }

    #[test]
    fn standard_error_shrinks_with_samples() {
        let run = |n: usize| {
            let mut m = MatrixStats::new(1, 1);
            let mut rng = stream_rng(11, 0);
            for _ in 0..n {
                m.push(&ComplexMatrix::column(&[C64::new(rng.random(), 0.0)]));
            }
            m.max_standard_error()
        };
        let (a, b) = (run(10_000), run(40_000));
        assert!((a / b - 2.0).abs() < 0.1);
    }
}
