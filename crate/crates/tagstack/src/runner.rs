//! Per-user fan-out over a rayon pool.
//!
//! Users are independent (each has its own derived seed), and results are
//! collected back in canonical user order before aggregation, so output
//! does not depend on the pool size.

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};
use tagstack_core::eval::{self, BenchmarkReport, EvalError, SweepResult, UserSweep};
use tagstack_core::{ClusterConfig, Dataset, UserView};

pub struct Runner {
    pool: ThreadPool,
}

impl Runner {
    /// `jobs = None` uses the available parallelism.
    pub fn new(jobs: Option<usize>) -> Result<Self, rayon::ThreadPoolBuildError> {
        let pool = ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build()?;
        Ok(Self { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    fn owners<'d>(d: &'d Dataset) -> Result<Vec<UserView<'d>>, EvalError> {
        let owners = d.stack_owners();
        if owners.is_empty() {
            return Err(EvalError::NoStacks);
        }
        Ok(owners)
    }

    fn sweeps(
        &self,
        owners: &[UserView<'_>],
        k_min: usize,
        k_max: usize,
        cfg: &ClusterConfig,
    ) -> Result<Vec<UserSweep>, EvalError> {
        self.pool.install(|| {
            owners
                .par_iter()
                .map(|v| eval::sweep_user(v, k_min, k_max, cfg))
                .collect()
        })
    }

    pub fn sweep(
        &self,
        d: &Dataset,
        k_min: usize,
        k_max: usize,
        cfg: &ClusterConfig,
    ) -> Result<SweepResult, EvalError> {
        let owners = Self::owners(d)?;
        let users = self.sweeps(&owners, k_min, k_max, cfg)?;
        SweepResult::from_users(k_min, k_max, &users)
    }

    pub fn bench(
        &self,
        d: &Dataset,
        k_min: usize,
        k_max: usize,
        runs: usize,
        seed: u64,
        cfg: &ClusterConfig,
    ) -> Result<BenchmarkReport, EvalError> {
        if runs == 0 {
            return Err(EvalError::InvalidRuns);
        }
        let owners = Self::owners(d)?;
        let sweeps = self.sweeps(&owners, k_min, k_max, cfg)?;
        let baselines = self.pool.install(|| {
            owners
                .par_iter()
                .map(|v| eval::random_baseline_user(v, k_min, k_max, runs, seed))
                .collect::<Result<Vec<_>, _>>()
        })?;
        BenchmarkReport::from_users(k_min, k_max, runs, seed, &sweeps, &baselines)
    }
}
