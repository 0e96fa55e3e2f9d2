//! Rayon drivers for the path loops. The counter RNG makes every path a
//! pure function of its index, so fan-out order cannot change results; the
//! reductions below consume per-path values in index order.

use lqgame_core::sim::{
    deviation_deltas_for_path, finalize_deviation, finalize_variance_crosscheck, DeviationTable,
    PathRunner, SimConfig, VarianceCrosscheck,
};
use lqgame_core::{ChainParams, Result};
use rayon::prelude::*;

/// Terminal tracked-player states for every path, in path order.
pub fn parallel_terminals(runner: &PathRunner<'_>, paths: usize) -> Result<Vec<f64>> {
    (0..paths)
        .into_par_iter()
        .map(|p| runner.run_terminal(p))
        .collect::<Result<Vec<_>>>()
}

/// Common-random-number deviation table computed path-parallel.
pub fn parallel_deviation(
    runner: &PathRunner<'_>,
    player: usize,
    pert: &(dyn Fn(f64) -> f64 + Sync),
    deltas: &[f64],
    paths: usize,
) -> Result<DeviationTable> {
    let per_path: Vec<Vec<f64>> = (0..paths)
        .into_par_iter()
        .map(|p| {
            let mut buf = vec![0.0; deltas.len()];
            deviation_deltas_for_path(runner, p, player, pert, deltas, &mut buf)?;
            Ok(buf)
        })
        .collect::<Result<Vec<_>>>()?;
    // transpose to per-delta series in path order
    let mut series = vec![Vec::with_capacity(paths); deltas.len()];
    for row in &per_path {
        for (store, &v) in series.iter_mut().zip(row.iter()) {
            store.push(v);
        }
    }
    Ok(finalize_deviation(deltas, &series, paths))
}

/// Variance crosscheck with the simulation half parallelized.
pub fn parallel_crosscheck(
    params: &ChainParams,
    t: f64,
    config: SimConfig,
) -> Result<VarianceCrosscheck> {
    use lqgame_core::catalan::stationary_chain_coeffs;
    use lqgame_core::sim::{SimModel, Strategy};

    let coeffs = stationary_chain_coeffs(params.p, params.epsilon, config.size - 1)?;
    let model = SimModel::Chain(*params);
    let runner = PathRunner::new(&model, config, Strategy::Stationary(&coeffs), t)?;
    let terminals = parallel_terminals(&runner, config.paths)?;
    finalize_variance_crosscheck(params, t, config, &terminals)
}
