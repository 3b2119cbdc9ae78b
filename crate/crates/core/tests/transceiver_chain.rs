//! Signal-level Monte Carlo check of the analytic SINR: symbols are pushed
//! through the pattern map, beamformer, channel and ZF receive filter, the
//! weaker users' symbols are cancelled, and the remaining desired and
//! residual powers are measured.

mod common;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use pdma::channel::{complex_gaussian, SystemDims};
use pdma::linalg::{CMat, CVec};
use pdma::pattern::simple_beam_allocation;
use pdma::power::simple_power_allocation;
use pdma::transceiver::{
    correlation_matrix, normalized_gains, pattern_map, select_targets, sic_order, sinr, spatial_filters,
    transmit_receive, zf_beamformer, Criterion, SicOrder, TargetSelection,
};

use common::seeded_channels;

#[test]
fn measured_sinr_matches_the_analytic_value() {
    let dims = SystemDims::default();
    let (n, k) = (dims.n_beams, dims.n_users);
    let ch = seeded_channels(dims, 21);
    let p_beam = 1.0;
    let identity = SicOrder::identity(k);
    let pattern = simple_beam_allocation(dims, &identity.perm, false).unwrap();
    let power = simple_power_allocation(&pattern, p_beam, 0.7, &identity).unwrap().power;
    let targets = select_targets(&pattern, &identity, TargetSelection::StrongestIdentity).unwrap();
    let bf = zf_beamformer(&ch, &targets).unwrap();
    let a = correlation_matrix(&pattern, &power);
    let filters = spatial_filters(Criterion::Zf, &ch, &bf, &a).unwrap();
    let gains = normalized_gains(&filters, &ch, &bf, p_beam).unwrap();
    let order = sic_order(&gains);
    let gamma = sinr(&gains, &pattern, &power, &order).unwrap();
    let rank = order.ranks();

    let samples = 20_000;
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let mut outputs = Vec::with_capacity(samples);
    for _ in 0..samples {
        let s = CVec::from_fn(k, |_, _| complex_gaussian(&mut rng));
        let t = pattern_map(&pattern, &power, &s).unwrap();
        let mut z = DMatrix::<Complex64>::zeros(n, k);
        for u in 0..k {
            let sigma = ch.noise_var[u].sqrt();
            let w = CVec::from_fn(dims.n_rx, |_, _| complex_gaussian(&mut rng) * sigma);
            let y = transmit_receive(&bf, &t, &ch.g[u], &w).unwrap();
            for b in 0..n {
                let v = filters.v[u].column(b);
                z[(b, u)] = v.dotc(&y) / (sigma * v.norm());
            }
        }
        outputs.push((s, z));
    }
    // Least-squares fit of receiver u's beam-b output on the symbols it
    // cancels (weaker users and itself); the fit residual is interference
    // plus noise.
    let fit = |b: usize, u: usize| -> (Complex64, f64) {
        let cancelled: Vec<usize> = pattern.users_on_beam(b).filter(|&w| rank[w] <= rank[u]).collect();
        let m = cancelled.len();
        let s_mat = CMat::from_fn(samples, m, |i, j| outputs[i].0[cancelled[j]]);
        let z = CVec::from_fn(samples, |i, _| outputs[i].1[(b, u)]);
        let c = (s_mat.adjoint() * &s_mat).lu().solve(&(s_mat.adjoint() * &z)).unwrap();
        let resid = (z - &s_mat * &c).norm_squared() / (samples - m) as f64;
        let own = c[cancelled.iter().position(|&w| w == u).unwrap()];
        (own, resid)
    };

    let mut checked = 0;
    for b in 0..n {
        for u in pattern.users_on_beam(b) {
            // filter columns outside the range of the effective channel carry no signal
            if filters.degenerate[u].contains(&b) {
                assert_eq!(gamma[(b, u)], 0.0);
                continue;
            }
            let (own, resid) = fit(b, u);
            let measured = own.norm_sqr() / resid;
            let rel = (measured / gamma[(b, u)] - 1.0).abs();
            assert!(
                rel < 0.05,
                "beam {b} user {u}: measured {measured}, analytic {}",
                gamma[(b, u)]
            );
            checked += 1;
        }
    }
    assert!(checked >= k);
}
