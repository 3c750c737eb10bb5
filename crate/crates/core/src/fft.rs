//! Unnormalized complex discrete Fourier transform.
//!
//! Forward: `X_j = sum_l x_l exp(-2 pi i j l / n)`; inverse uses `+i`.
//! Power-of-two lengths use an iterative radix-2 transform, other lengths fall
//! back to the direct `O(n^2)` sum.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::C64;
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => -1.0,
            Direction::Inverse => 1.0,
        }
    }
}

/// Transforms `data` in place without normalization.
pub fn transform(data: &mut [C64], dir: Direction) {
    let n = data.len();
    if n <= 1 {
        return;
    }
    if n.is_power_of_two() {
        radix2(data, dir);
    } else {
        direct(data, dir);
    }
}

/// Transforms a row-major `rows x cols` array along both axes in place.
pub fn transform_2d(data: &mut [C64], rows: usize, cols: usize, dir: Direction) {
    debug_assert_eq!(data.len(), rows * cols);
    for row in data.chunks_exact_mut(cols) {
        transform(row, dir);
    }
    let mut column = Vec::with_capacity(rows);
    for c in 0..cols {
        column.clear();
        column.extend((0..rows).map(|r| data[r * cols + c]));
        transform(&mut column, dir);
        for (r, v) in column.iter().enumerate() {
            data[r * cols + c] = *v;
        }
    }
}

fn radix2(data: &mut [C64], dir: Direction) {
    let n = data.len();
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            data.swap(i, j);
        }
    }
    let sign = dir.sign();
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        // direct twiddles; a running product drifts at large n
        let twiddles: Vec<C64> = (0..half)
            .map(|k| C64::from_polar(1.0, sign * 2.0 * PI * k as f64 / len as f64))
            .collect();
        for block in data.chunks_exact_mut(len) {
            let (lo, hi) = block.split_at_mut(half);
            for k in 0..half {
                let t = hi[k] * twiddles[k];
                hi[k] = lo[k] - t;
                lo[k] += t;
            }
        }
        len <<= 1;
    }
}

fn direct(data: &mut [C64], dir: Direction) {
    let n = data.len();
    let sign = dir.sign();
    let roots: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(1.0, sign * 2.0 * PI * k as f64 / n as f64))
        .collect();
    let out: Vec<C64> = (0..n)
        .map(|j| {
            data.iter()
                .enumerate()
                .fold(C64::new(0.0, 0.0), |acc, (l, x)| acc + x * roots[(j * l) % n])
        })
        .collect();
    data.copy_from_slice(&out);
}

/// Signed mode index for position `j` of an `n`-point transform:
/// `0, 1, ..., n/2 - 1, -n/2, ..., -1` (even `n`).
pub fn signed_index(j: usize, n: usize) -> i64 {
    if j < n.div_ceil(2) {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Angular wavenumber `2 pi m / period` of position `j`.
pub fn wavenumber(j: usize, n: usize, period: f64) -> f64 {
    2.0 * PI * signed_index(j, n) as f64 / period
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(x: &[C64]) -> Vec<C64> {
        let n = x.len();
        (0..n)
            .map(|j| {
                (0..n).fold(C64::new(0.0, 0.0), |acc, l| {
                    let ang = -2.0 * PI * (j * l) as f64 / n as f64;
                    acc + x[l] * C64::new(ang.cos(), ang.sin())
                })
            })
            .collect()
    }

    fn sample(n: usize) -> Vec<C64> {
        (0..n)
            .map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos() - 0.2))
            .collect()
    }

    #[test]
    fn radix2_matches_direct_sum() {
        for n in [2, 4, 8, 64, 256] {
            let x = sample(n);
            let mut y = x.clone();
            transform(&mut y, Direction::Forward);
            let reference = naive(&x);
            for (a, b) in y.iter().zip(&reference) {
                assert!((a - b).norm() < 1e-10 * n as f64, "n = {n}");
            }
        }
    }

    #[test]
    fn odd_and_composite_lengths_round_trip() {
        for n in [3, 6, 12, 15] {
            let x = sample(n);
            let mut y = x.clone();
            transform(&mut y, Direction::Forward);
            transform(&mut y, Direction::Inverse);
            for (a, b) in y.iter().zip(&x) {
                assert!((a / n as f64 - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn signed_indices_are_symmetric() {
        let idx: Vec<i64> = (0..6).map(|j| signed_index(j, 6)).collect();
        assert_eq!(idx, [0, 1, 2, -3, -2, -1]);
    }
}
