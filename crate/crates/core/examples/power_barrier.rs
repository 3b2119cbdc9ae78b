//! Sum-rate power allocation for a fixed pattern and gains, compared with
//! the geometric split at several power gain factors.

use nalgebra::DMatrix;
use pdma::pattern::Pattern;
use pdma::power::{optimize_power_barrier, simple_power_allocation, PowerConstraints};
use pdma::transceiver::{sic_order, sinr, sum_rate, NormalizedGains};

fn main() -> pdma::error::Result<()> {
    let pattern = Pattern::from_rows(&[vec![1, 1, 0, 1, 0], vec![1, 0, 1, 0, 1], vec![1, 1, 1, 0, 0]])?;
    let h = DMatrix::from_row_slice(
        3,
        5,
        &[
            0.8, 2.1, 0.0, 9.0, 0.0, 0.5, 0.0, 3.2, 0.0, 7.5, 1.1, 2.4, 4.0, 0.0, 0.0,
        ],
    );
    let p_sum = 10.0;
    let p_beam = p_sum / 3.0;
    let gains = NormalizedGains::from_magnitudes(h, p_beam);
    let order = sic_order(&gains);

    for mu in [0.25, 0.5, 1.0, 2.0] {
        let p = simple_power_allocation(&pattern, p_beam, mu, &order)?.power;
        println!(
            "geometric mu = {mu:<4}  {:.4} bits/s/Hz",
            sum_rate(&sinr(&gains, &pattern, &p, &order)?)
        );
    }

    let floor = DMatrix::from_fn(3, 5, |b, u| if pattern.get(b, u) { 1e-3 } else { 0.0 });
    let constraints = PowerConstraints::new(p_sum, floor, DMatrix::zeros(3, 5))?;
    let (p, report) = optimize_power_barrier(&gains, &pattern, &constraints, &order)?;
    println!("barrier optimum     {:.4} bits/s/Hz", report.sum_rate);
    println!("powers:{:.4}", p.p);
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
