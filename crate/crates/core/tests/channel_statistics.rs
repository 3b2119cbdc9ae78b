mod common;

use pdma::channel::{
    derive_seed, drop_users, generate_channels, large_scale_gain, LargeScaleParams, SeedStream, SystemDims,
};
use statrs::distribution::{ContinuousCDF, Normal};

fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

fn many_drops(users: usize) -> Vec<pdma::channel::UserDrop> {
    let params = LargeScaleParams::default();
    let dims = SystemDims::new(16, 4, 3, users);
    (0..200u64)
        .flat_map(|t| {
            drop_users(dims, &params, derive_seed(5, t, SeedStream::Geometry))
                .unwrap()
                .users
        })
        .collect()
}

#[test]
fn distance_moments_match_the_annulus() {
    let p = LargeScaleParams::default();
    let (r0, r) = (p.min_distance_m, p.cell_radius_m);
    // density 2x / (R^2 - r0^2) on [r0, R]
    let mean = 2.0 / 3.0 * (r.powi(3) - r0.powi(3)) / (r * r - r0 * r0);
    let second = 0.5 * (r.powi(4) - r0.powi(4)) / (r * r - r0 * r0);
    let drops = many_drops(100);
    let n = drops.len() as f64;
    let m1 = drops.iter().map(|d| d.distance_m).sum::<f64>() / n;
    let m2 = drops.iter().map(|d| d.distance_m.powi(2)).sum::<f64>() / n;
    assert!((m1 / mean - 1.0).abs() < 0.01, "{m1} vs {mean}");
    assert!((m2 / second - 1.0).abs() < 0.02, "{m2} vs {second}");
    let ks = ks_statistic(drops.iter().map(|d| d.distance_m).collect(), |x| {
        ((x * x - r0 * r0) / (r * r - r0 * r0)).clamp(0.0, 1.0)
    });
    // 1% critical value 1.63 / sqrt(n)
    assert!(ks < 1.63 / n.sqrt(), "KS {ks}");
}

#[test]
fn shadowing_is_gaussian_in_db() {
    let drops = many_drops(100);
    let n = drops.len() as f64;
    let normal = Normal::new(0.0, LargeScaleParams::default().shadow_std_db).unwrap();
    let ks = ks_statistic(drops.iter().map(|d| d.shadow_db).collect(), |x| normal.cdf(x));
    assert!(ks < 1.63 / n.sqrt(), "KS {ks}");
}

#[test]
fn small_scale_entries_are_unit_complex_gaussian() {
    let params = LargeScaleParams::default();
    let dims = SystemDims::new(16, 4, 3, 6);
    let mut power = Vec::new();
    let mut cross = 0.0;
    let mut pairs = 0.0;
    let mut mean = num_complex::Complex64::new(0.0, 0.0);
    for t in 0..100u64 {
        let geo = drop_users(dims, &params, derive_seed(8, t, SeedStream::Geometry)).unwrap();
        let ch = generate_channels(dims, &geo, &params, 1e-13, derive_seed(8, t, SeedStream::SmallScale)).unwrap();
        for (g, d) in ch.g.iter().zip(&geo.users) {
            let amp = large_scale_gain(d.distance_m, d.shadow_db, &params).unwrap().sqrt();
            let w = g / num_complex::Complex64::new(amp, 0.0);
            for (i, x) in w.iter().enumerate() {
                power.push(x.norm_sqr());
                mean += x;
                if i + 1 < w.len() {
                    cross += (x * w[i + 1].conj()).re;
                    pairs += 1.0;
                }
            }
        }
    }
    let n = power.len() as f64;
    let avg = power.iter().sum::<f64>() / n;
    assert!((avg - 1.0).abs() < 0.02, "E|w|^2 = {avg}");
    assert!((mean / n).norm() < 0.02);
    assert!((cross / pairs).abs() < 0.02);
    // |w|^2 ~ Exp(1)
    let ks = ks_statistic(power, |x| 1.0 - (-x).exp());
    assert!(ks < 1.63 / n.sqrt(), "KS {ks}");
}

#[test]
fn trial_streams_are_prefix_stable() {
    let params = LargeScaleParams::default();
    let small = drop_users(SystemDims::new(16, 4, 3, 4), &params, 99).unwrap();
    let large = drop_users(SystemDims::new(16, 4, 3, 7), &params, 99).unwrap();
    assert_eq!(small.users[..], large.users[..4]);
}
