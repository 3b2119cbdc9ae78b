//! A transmit-power sweep written to CSV on stdout, plus a gnuplot script
//! on stderr.
//!
//! `cargo run --release --example monte_carlo_sweep > sweep.csv 2> sweep.gp`

use pdma::baselines::BaselineKind;
use pdma::harness::{plot_script, run_experiments, write_csv, ExperimentConfig, Sweep};

fn main() -> pdma::error::Result<()> {
    let base = ExperimentConfig {
        label: "sweep".into(),
        p_sum_dbm: Sweep::range(20.0, 40.0, 4.0),
        mu: Sweep::one(0.5),
        trials: 300,
        ..ExperimentConfig::default()
    };
    let configs = [
        ExperimentConfig {
            scenario: BaselineKind::PdmaSimple,
            ..base.clone()
        },
        ExperimentConfig {
            scenario: BaselineKind::PdmaOptBoth,
            ..base.clone()
        },
        ExperimentConfig {
            scenario: BaselineKind::PdNoma,
            k_list: vec![6],
            ..base
        },
    ];
    let run = run_experiments(&configs);
    write_csv(std::io::stdout().lock(), &run.rows, run.failure.as_ref())?;
    eprint!("{}", plot_script("sweep.csv", &run.rows, false));
    run.into_result().map(|_| ())
}
