//! Mean sum rate of every scheme on the same channel draws.

use pdma::baselines::BaselineKind;
use pdma::harness::{run_experiments, ExperimentConfig};

fn main() -> pdma::error::Result<()> {
    let trials = std::env::args().nth(1).map_or(200, |s| s.parse().expect("trial count"));
    let configs: Vec<ExperimentConfig> = BaselineKind::ALL
        .into_iter()
        .map(|scenario| ExperimentConfig {
            label: "baselines".into(),
            scenario,
            k_list: vec![scenario.required_users(3).unwrap_or(5)],
            mu: pdma::harness::Sweep::one(0.5),
            trials,
            ..ExperimentConfig::default()
        })
        .collect();
    let rows = run_experiments(&configs).into_result()?;
    println!("{:<16} {:>2} {:>10} {:>20}", "scenario", "K", "mean", "95% CI");
    for r in rows {
        println!(
            "{:<16} {:>2} {:>10.3} {:>9.3} .. {:<9.3}",
            r.scenario.to_string(),
            r.k,
            r.mean_sum_rate,
            r.ci95_lo,
            r.ci95_hi
        );
    }
    Ok(())
}
