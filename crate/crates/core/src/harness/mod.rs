//! Experiment grids: config, seeded parallel trials, CSV output and the
//! Monte Carlo check of the LIL radius.

mod config;
mod records;
mod validity;

pub use config::{
    load_config, parse_config, resolved_config_path, write_resolved, ClassSpec, ExperimentConfig, FamilySpec, KRule,
    ResolvedCell, ResolvedConfig,
};
pub use records::{
    aggregate, read_records, read_summary, write_records, write_summary, SummaryRow, TrialRecord, SUMMARY_HEADER,
    TRIAL_HEADER,
};
pub use validity::lil_validity_check;

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::algorithms::{self, Algorithm};
use crate::bandit::{decision_stream, derive_seed, make_instance, Instance, SamplingEnv};
use crate::cpe::{run_general_clucb, DecisionClass};
use crate::error::{Error, Result};

/// Env var capping the number of worker threads.
pub const THREADS_ENV: &str = "PUREX_THREADS";

/// Seed-derivation tag for the label permutation of a trial.
const LABEL_TAG: u64 = 0x1abe1;

/// Worker count from `PUREX_THREADS`, `None` when unset.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) | Err(_) => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
            Ok(n) => Ok(Some(n)),
        },
        Err(_) => Ok(None),
    }
}

/// One (family, n, algorithm) combination of the grid.
#[derive(Debug, Clone)]
struct Cell {
    family_index: usize,
    n: usize,
    k: usize,
    algorithm: Algorithm,
    instance: Instance<f64>,
    algo: algorithms::AlgoConfig<f64>,
    class: Option<DecisionClass>,
}

fn cells(config: &ExperimentConfig) -> Result<Vec<Cell>> {
    let mut out = Vec::new();
    for (family_index, spec) in config.families.iter().enumerate() {
        for &n in &config.n_values {
            let k = spec.k_rule.resolve(n)?;
            let instance = make_instance(spec.family, n, k, spec.alpha)?.with_sigma(config.sigma)?;
            let class = config.decision_class.as_ref().map(|c| c.build(n, k)).transpose()?;
            for &algorithm in &config.algorithms {
                out.push(Cell {
                    family_index,
                    n,
                    k,
                    algorithm,
                    instance: instance.clone(),
                    algo: config.algo_config(algorithm, n)?,
                    class: class.clone(),
                });
            }
        }
    }
    Ok(out)
}

/// Seed of a trial. It ignores the algorithm so every algorithm in a cell
/// faces the same reward streams.
pub fn trial_seed(master_seed: u64, family_index: usize, n: usize, trial: u64) -> u64 {
    derive_seed(master_seed, &[family_index as u64, n as u64, trial])
}

fn run_trial(config: &ExperimentConfig, cell: &Cell, trial: u64) -> Result<TrialRecord> {
    let seed = trial_seed(config.master_seed, cell.family_index, cell.n, trial);
    let instance = if config.shuffle_labels {
        let mut perm: Vec<usize> = (0..cell.n).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, &[LABEL_TAG])));
        cell.instance.permuted(&perm)?
    } else {
        cell.instance.clone()
    };
    let mut env = SamplingEnv::new(instance, seed);
    let start = Instant::now();
    let result = match &cell.class {
        Some(class) => run_general_clucb(class, &cell.algo, &mut env)?,
        None => algorithms::run(&cell.algo, &mut env, &mut decision_stream(seed))?,
    };
    let elapsed = start.elapsed().as_nanos() as u64;
    Ok(TrialRecord {
        algorithm: cell.algorithm,
        family: config.families[cell.family_index].family,
        n: cell.n,
        k: cell.k,
        mode: config.mode,
        trial,
        seed,
        total_samples: result.total_samples,
        correct: result.correct,
        capped: result.capped,
        wall_time_ns: if config.timing { elapsed } else { 0 },
    })
}

/// Runs every trial of the grid with the worker count from `PUREX_THREADS`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    run_experiment_with_threads(config, threads_from_env()?)
}

/// Runs every trial of the grid on `threads` workers (rayon's default when
/// `None`). Records come back ordered by cell, then trial.
pub fn run_experiment_with_threads(config: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let cells = cells(config)?;
    let jobs: Vec<(usize, u64)> = (0..cells.len()).flat_map(|c| (0..config.trials).map(move |t| (c, t))).collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| jobs.par_iter().map(|&(c, t)| run_trial(config, &cells[c], t)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::Mode;
    use crate::bandit::Family;

    fn small(algorithms: Vec<Algorithm>, trials: u64) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(
            vec![FamilySpec { family: Family::OneSparseK, alpha: 0.0, k_rule: KRule::Fixed(2) }],
            vec![6],
            algorithms,
        );
        c.trials = trials;
        c.master_seed = 42;
        c.timing = false;
        c
    }

    #[test]
    fn one_cell_three_trials() {
        let records = run_experiment_with_threads(&small(vec![Algorithm::LilRandLucb], 3), Some(1)).unwrap();
        assert_eq!(records.iter().map(|r| r.trial).collect::<Vec<_>>(), vec![0, 1, 2]);
        for r in &records {
            assert!(r.total_samples >= 6);
            assert_eq!((r.n, r.k, r.mode, r.wall_time_ns), (6, 2, Mode::Heuristic, 0));
        }
    }

    #[test]
    fn records_do_not_depend_on_thread_count() {
        let c = small(Algorithm::BEST_K.to_vec(), 4);
        let a = run_experiment_with_threads(&c, Some(1)).unwrap();
        let b = run_experiment_with_threads(&c, Some(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 20);
    }

    #[test]
    fn algorithms_share_trial_seeds() {
        let records = run_experiment_with_threads(&small(vec![Algorithm::Lucb, Algorithm::LilLucb], 2), Some(1)).unwrap();
        assert_eq!(records[0].seed, records[2].seed);
        assert_ne!(records[0].seed, records[1].seed);
    }

    #[test]
    fn label_shuffle_at_zero_variance_keeps_outputs_correct() {
        let mut c = small(Algorithm::BEST_K.to_vec(), 5);
        c.sigma = 0.0;
        c.shuffle_labels = true;
        for r in run_experiment_with_threads(&c, Some(1)).unwrap() {
            assert!(r.correct, "{r:?}");
            assert_eq!(r.total_samples, 6);
        }
    }

    #[test]
    fn explicit_class_cells_run_the_oracle_loop() {
        let mut c = small(vec![Algorithm::LilClucb], 2);
        c.decision_class = Some(ClassSpec::Explicit(vec![vec![0, 1], vec![2, 3, 4], vec![5]]));
        let records = run_experiment_with_threads(&c, Some(1)).unwrap();
        assert!(records.iter().all(|r| r.correct));
    }
}
