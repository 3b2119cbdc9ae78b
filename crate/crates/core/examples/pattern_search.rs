//! Beam allocation: the simple rule next to the exhaustive min-max search,
//! with the optimized pattern written as a Graphviz factor graph.
//!
//! `cargo run --example pattern_search -- 3 6 > pattern.dot`

use pdma::channel::SystemDims;
use pdma::pattern::{factor_graph_dot, optimize_beam_allocation, simple_beam_allocation};

fn main() -> pdma::error::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<usize>().expect("integer argument"));
    let n = args.next().unwrap_or(3);
    let k = args.next().unwrap_or(5);
    let dims = SystemDims::new(4 * n, 1, n, k);

    let simple = simple_beam_allocation(dims, &(0..k).collect::<Vec<_>>(), false)?;
    let search = optimize_beam_allocation(dims)?;
    eprintln!(
        "simple pattern, max inner product {}:\n{simple}",
        simple.metrics().max_inner
    );
    eprintln!(
        "optimized pattern, max inner product {} ({} pairs at max, {} candidates):\n{}",
        search.objective, search.pairs_at_max, search.feasible_candidates, search.pattern
    );
    print!("{}", factor_graph_dot(&search.pattern));
    Ok(())
}
