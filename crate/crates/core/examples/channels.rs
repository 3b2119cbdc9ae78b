//! Drops users in the cell and prints their large-scale gains and channel
//! energy for one trial.

use pdma::channel::{
    derive_seed, drop_users, generate_channels, large_scale_gain, mw_to_dbm, LargeScaleParams, SeedStream, SystemDims,
};
use pdma::linalg::frobenius_sq;

fn main() -> pdma::error::Result<()> {
    let dims = SystemDims::default();
    let params = LargeScaleParams::default();
    let (base, trial) = (1, 0);
    let geo = drop_users(dims, &params, derive_seed(base, trial, SeedStream::Geometry))?;
    let noise_mw = 10f64.powf(-104.0 / 10.0);
    let ch = generate_channels(
        dims,
        &geo,
        &params,
        noise_mw,
        derive_seed(base, trial, SeedStream::SmallScale),
    )?;

    println!("user  distance_m  shadow_db  gain_db  |G|^2/s2_db");
    for (k, u) in geo.users.iter().enumerate() {
        let gain = large_scale_gain(u.distance_m, u.shadow_db, &params)?;
        let snr = frobenius_sq(&ch.g[k]) / ch.noise_var[k];
        println!(
            "{k:>4}  {:>10.1}  {:>9.2}  {:>7.1}  {:>11.1}",
            u.distance_m,
            u.shadow_db,
            mw_to_dbm(gain),
            mw_to_dbm(snr)
        );
    }
    Ok(())
}
