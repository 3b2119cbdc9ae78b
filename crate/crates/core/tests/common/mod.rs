//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use pdma::channel::{derive_seed, drop_users, generate_channels, ChannelSet, LargeScaleParams, SeedStream, SystemDims};

/// Sum rate of one beam, users weakest first, written straight from the
/// SINR definition.
pub fn beam_rate(h: &[f64], p: &[f64]) -> f64 {
    (0..h.len())
        .map(|j| {
            let g = h[j] * h[j];
            let interference: f64 = p[j + 1..].iter().sum();
            (1.0 + g * p[j] / (1.0 + g * interference)).log2()
        })
        .sum()
}

/// Mixed second differences of `f` at `x`, refined by one Richardson step.
pub fn fd_hessian(f: &dyn Fn(&[f64]) -> f64, x: &[f64], step: f64) -> DMatrix<f64> {
    let n = x.len();
    let d = |h: f64, i: usize, j: usize| {
        let eval = |si: f64, sj: f64| {
            let mut y = x.to_vec();
            y[i] += si * h;
            y[j] += sj * h;
            f(&y)
        };
        (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0)) / (4.0 * h * h)
    };
    DMatrix::from_fn(n, n, |i, j| (4.0 * d(step / 2.0, i, j) - d(step, i, j)) / 3.0)
}

/// All `N x K` binary matrices with distinct nonzero columns; returns the
/// smallest achievable maximum pairwise column inner product.
pub fn full_space_min_max_inner(n: usize, k: usize) -> usize {
    let bits = n * k;
    let col_mask = (1u64 << n) - 1;
    let mut best = usize::MAX;
    let mut cols = vec![0u64; k];
    for code in 0u64..(1u64 << bits) {
        let mut ok = true;
        for (u, c) in cols.iter_mut().enumerate() {
            *c = (code >> (u * n)) & col_mask;
            if *c == 0 {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        let mut worst = 0;
        'pairs: for a in 0..k {
            for b in a + 1..k {
                if cols[a] == cols[b] {
                    worst = usize::MAX;
                    break 'pairs;
                }
                worst = worst.max((cols[a] & cols[b]).count_ones() as usize);
            }
        }
        best = best.min(worst);
    }
    best
}

pub fn seeded_channels(dims: SystemDims, seed: u64) -> ChannelSet {
    let params = LargeScaleParams::default();
    let geo = drop_users(dims, &params, derive_seed(seed, 0, SeedStream::Geometry)).unwrap();
    generate_channels(dims, &geo, &params, 1e-13, derive_seed(seed, 0, SeedStream::SmallScale)).unwrap()
}

/// Two-sided 95% half width of the mean of `xs` (normal quantile; used
/// only with thousands of samples).
pub fn mean_and_half_width(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, 1.959_963_984_540_054 * (var / n).sqrt())
}
