//! One pass through the downlink chain: pattern, beamformer, spatial
//! filters, normalized gains, SIC order and per-beam SINR, for ZF and MMSE
//! receive filters.

use pdma::channel::{dbm_to_mw, derive_seed, drop_users, generate_channels, LargeScaleParams, SeedStream, SystemDims};
use pdma::pattern::simple_beam_allocation;
use pdma::power::simple_power_allocation;
use pdma::transceiver::{
    correlation_matrix, normalized_gains, select_targets, sic_order, sinr, spatial_filters, sum_rate, zf_beamformer,
    Criterion, SicOrder, TargetSelection,
};

fn main() -> pdma::error::Result<()> {
    let dims = SystemDims::default();
    let params = LargeScaleParams::default();
    let geo = drop_users(dims, &params, derive_seed(3, 0, SeedStream::Geometry))?;
    let ch = generate_channels(
        dims,
        &geo,
        &params,
        dbm_to_mw(-104.0),
        derive_seed(3, 0, SeedStream::SmallScale),
    )?;
    let p_beam = dbm_to_mw(30.0) / dims.n_beams as f64;

    // users sorted by distance stand in for the weakest-first order
    let mut by_distance: Vec<usize> = (0..dims.n_users).collect();
    by_distance.sort_by(|&a, &b| geo.users[b].distance_m.total_cmp(&geo.users[a].distance_m));
    let order = SicOrder::new(by_distance)?;

    let pattern = simple_beam_allocation(dims, &order.perm, false)?;
    let power = simple_power_allocation(&pattern, p_beam, 1.0, &order)?.power;
    let targets = select_targets(&pattern, &order, TargetSelection::StrongestIdentity)?;
    let bf = zf_beamformer(&ch, &targets)?;
    println!("pattern:\n{pattern}targets {targets:?}");

    for criterion in [Criterion::Zf, Criterion::Mmse] {
        let filters = spatial_filters(criterion, &ch, &bf, &correlation_matrix(&pattern, &power))?;
        let gains = normalized_gains(&filters, &ch, &bf, p_beam)?;
        let order = sic_order(&gains);
        let gamma = sinr(&gains, &pattern, &power, &order)?;
        println!(
            "{criterion:?} filters: SIC order {:?}, sum rate {:.3} bits/s/Hz",
            order.perm,
            sum_rate(&gamma)
        );
        println!("|h|:{:.3}", gains.magnitude);
    }
    Ok(())
}
