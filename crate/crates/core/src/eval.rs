//! Stack recovery scoring, K sweeps and the comparison benchmarks.
//!
//! Each stack is scored against the cluster that matches it best by F1;
//! clusters are not consumed, so several stacks may match the same one.
//! Macroaverages weigh every stack equally, whoever owns it. Only users
//! that created stacks are clustered.
//!
//! Per-user work ([`sweep_user`], [`random_baseline_user`]) is independent
//! and may be computed in any order or in parallel. The aggregation
//! functions reduce over users in the order given, which callers keep
//! canonical so sums are bit-stable.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cluster::{self, effective_k, ClusterConfig, ClusterError, Partition};
use crate::corpus::{Dataset, UserView};
use crate::seed;
use crate::vectorize::vectorize_user;

/// Default repetitions for the two random benchmarks.
pub const DEFAULT_RUNS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    EmptySet,
    NoScores,
    NoStacks,
    UserWithoutStacks(String),
    InvalidKRange { k_min: usize, k_max: usize },
    InvalidRuns,
    PartitionMismatch { pages: usize, covered: usize },
    Cluster(ClusterError),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptySet => f.write_str("precision and recall need a non-empty stack and cluster"),
            Self::NoScores => f.write_str("cannot macroaverage an empty score list"),
            Self::NoStacks => f.write_str("dataset has no stacks to evaluate"),
            Self::UserWithoutStacks(u) => write!(f, "user {u:?} has no stacks"),
            Self::InvalidKRange { k_min, k_max } => {
                write!(f, "invalid K range {k_min}..={k_max}")
            }
            Self::InvalidRuns => f.write_str("runs must be at least 1"),
            Self::PartitionMismatch { pages, covered } => {
                write!(f, "partition covers {covered} pages but the user has {pages}")
            }
            Self::Cluster(e) => write!(f, "clustering failed: {e}"),
        }
    }
}

impl core::error::Error for EvalError {}

impl From<ClusterError> for EvalError {
    fn from(e: ClusterError) -> Self {
        Self::Cluster(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    /// From the overlap count and the two set sizes. F1 is computed as
    /// `2·overlap / (stack + cluster)`, which equals the harmonic mean of P
    /// and R and is rounded once.
    pub fn from_counts(overlap: usize, stack: usize, cluster: usize) -> Self {
        Self {
            precision: overlap as f64 / cluster as f64,
            recall: overlap as f64 / stack as f64,
            f1: (2 * overlap) as f64 / (stack + cluster) as f64,
        }
    }
}

/// Precision, recall and F1 of `cluster` as a guess for `stack`. Both
/// slices must be sorted and free of duplicates.
pub fn prf<T: Ord>(stack: &[T], cluster: &[T]) -> Result<Prf, EvalError> {
    if stack.is_empty() || cluster.is_empty() {
        return Err(EvalError::EmptySet);
    }
    let (mut i, mut j, mut overlap) = (0, 0, 0);
    while i < stack.len() && j < cluster.len() {
        match stack[i].cmp(&cluster[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                overlap += 1;
                i += 1;
                j += 1;
            }
        }
    }
    Ok(Prf::from_counts(overlap, stack.len(), cluster.len()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StackScore {
    pub user_id: String,
    pub stack_id: String,
    pub matched_cluster: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Number of clusters actually produced for the owner.
    pub k_used: usize,
}

/// Scores a stack (page indices into the partition) against the cluster
/// with the highest F1; ties go to higher precision, then lower id.
///
/// Comparisons are done on the integer counts, so ties are exact.
pub fn best_match(
    user_id: &str,
    stack_id: &str,
    stack_pages: &[usize],
    p: &Partition,
) -> Result<StackScore, EvalError> {
    if stack_pages.is_empty() {
        return Err(EvalError::EmptySet);
    }
    if let Some(&bad) = stack_pages.iter().find(|&&i| i >= p.len()) {
        return Err(EvalError::PartitionMismatch {
            pages: bad + 1,
            covered: p.len(),
        });
    }
    let sizes = p.sizes();
    let mut overlap = alloc::vec![0usize; p.k()];
    for &i in stack_pages {
        overlap[p.cluster_of(i)] += 1;
    }
    let s = stack_pages.len();
    let mut best = 0usize;
    for c in 1..p.k() {
        // F1 ∝ o / (s + size); precision = o / size
        let (o, n) = (overlap[c], sizes[c]);
        let (bo, bn) = (overlap[best], sizes[best]);
        let f1_cmp = (o * (s + bn)).cmp(&(bo * (s + n)));
        let better = match f1_cmp {
            core::cmp::Ordering::Greater => true,
            core::cmp::Ordering::Less => false,
            core::cmp::Ordering::Equal => o * bn > bo * n,
        };
        if better {
            best = c;
        }
    }
    let m = Prf::from_counts(overlap[best], s, sizes[best]);
    Ok(StackScore {
        user_id: user_id.to_string(),
        stack_id: stack_id.to_string(),
        matched_cluster: best,
        precision: m.precision,
        recall: m.recall,
        f1: m.f1,
        k_used: p.k(),
    })
}

/// Unweighted means over stacks.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MacroScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn macro_average<'a, I>(scores: I) -> Result<MacroScores, EvalError>
where
    I: IntoIterator<Item = &'a StackScore>,
{
    let (mut p, mut r, mut f, mut n) = (0.0, 0.0, 0.0, 0usize);
    for s in scores {
        p += s.precision;
        r += s.recall;
        f += s.f1;
        n += 1;
    }
    if n == 0 {
        return Err(EvalError::NoScores);
    }
    let n = n as f64;
    Ok(MacroScores {
        precision: p / n,
        recall: r / n,
        f1: f / n,
    })
}

/// Mean of per-run macro scores. A running mean keeps a constant sequence
/// exact, and the result is clamped into the observed range per metric.
fn mean_of_runs(runs: &[MacroScores]) -> MacroScores {
    fn running(values: impl Iterator<Item = f64> + Clone) -> f64 {
        let (lo, hi) = values
            .clone()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
        let mean = values.enumerate().fold(0.0, |m, (i, x)| m + (x - m) / (i + 1) as f64);
        mean.clamp(lo, hi)
    }
    MacroScores {
        precision: running(runs.iter().map(|m| m.precision)),
        recall: running(runs.iter().map(|m| m.recall)),
        f1: running(runs.iter().map(|m| m.f1)),
    }
}

fn check_range(k_min: usize, k_max: usize) -> Result<(), EvalError> {
    if k_min == 0 || k_min > k_max {
        return Err(EvalError::InvalidKRange { k_min, k_max });
    }
    Ok(())
}

fn score_stacks(view: &UserView<'_>, p: &Partition) -> Result<Vec<StackScore>, EvalError> {
    view.stacks
        .iter()
        .map(|s| best_match(view.user_id, s.id, &s.pages, p))
        .collect()
}

fn require_stacks(view: &UserView<'_>) -> Result<(), EvalError> {
    if view.stacks.is_empty() {
        return Err(EvalError::UserWithoutStacks(view.user_id.to_string()));
    }
    Ok(())
}

/// Clusters all of a user's pages with [`cluster::rbr`] (seed specialised
/// to the user) and scores each of their stacks.
pub fn evaluate_user(view: &UserView<'_>, k: usize, cfg: &ClusterConfig) -> Result<Vec<StackScore>, EvalError> {
    require_stacks(view)?;
    let (_, vectors) = vectorize_user(view);
    let p = cluster::rbr(&vectors, k, &cfg.for_user(view.user_id))?;
    score_stacks(view, &p)
}

/// One user's stack scores for every K of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct UserSweep {
    pub user_id: String,
    pub k_min: usize,
    /// `per_k[i][s]` is stack `s` at K = `k_min + i`.
    pub per_k: Vec<Vec<StackScore>>,
}

impl UserSweep {
    pub fn k_max(&self) -> usize {
        self.k_min + self.per_k.len() - 1
    }

    pub fn at(&self, k: usize) -> &[StackScore] {
        &self.per_k[k - self.k_min]
    }

    fn n_stacks(&self) -> usize {
        self.per_k.first().map_or(0, Vec::len)
    }
}

/// Equivalent to calling [`evaluate_user`] for every K in range.
pub fn sweep_user(
    view: &UserView<'_>,
    k_min: usize,
    k_max: usize,
    cfg: &ClusterConfig,
) -> Result<UserSweep, EvalError> {
    check_range(k_min, k_max)?;
    require_stacks(view)?;
    let (_, vectors) = vectorize_user(view);
    let partitions = cluster::rbr_sweep(&vectors, k_min, k_max, &cfg.for_user(view.user_id))?;
    let per_k = partitions
        .iter()
        .map(|p| score_stacks(view, p))
        .collect::<Result<_, _>>()?;
    Ok(UserSweep {
        user_id: view.user_id.to_string(),
        k_min,
        per_k,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub k: usize,
    pub scores: MacroScores,
    pub stacks: Vec<StackScore>,
}

/// Macroaveraged scores for each K of a contiguous range.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub entries: Vec<SweepEntry>,
}

impl SweepResult {
    /// Aggregates per-user sweeps, in the order given.
    pub fn from_users(k_min: usize, k_max: usize, users: &[UserSweep]) -> Result<Self, EvalError> {
        check_range(k_min, k_max)?;
        let entries = (k_min..=k_max)
            .map(|k| {
                let stacks: Vec<StackScore> = users.iter().flat_map(|u| u.at(k).iter().cloned()).collect();
                let scores = macro_average(&stacks).map_err(|_| EvalError::NoStacks)?;
                Ok(SweepEntry { k, scores, stacks })
            })
            .collect::<Result<_, EvalError>>()?;
        Ok(Self { entries })
    }

    pub fn at(&self, k: usize) -> Option<&SweepEntry> {
        self.entries.iter().find(|e| e.k == k)
    }

    pub fn f1_curve(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.scores.f1)
    }
}

fn sweep_all(d: &Dataset, k_min: usize, k_max: usize, cfg: &ClusterConfig) -> Result<Vec<UserSweep>, EvalError> {
    check_range(k_min, k_max)?;
    let owners = d.stack_owners();
    if owners.is_empty() {
        return Err(EvalError::NoStacks);
    }
    owners.iter().map(|v| sweep_user(v, k_min, k_max, cfg)).collect()
}

/// Clusters every stack owner at each K and macroaverages over stacks.
pub fn k_sweep(d: &Dataset, k_min: usize, k_max: usize, cfg: &ClusterConfig) -> Result<SweepResult, EvalError> {
    let users = sweep_all(d, k_min, k_max, cfg)?;
    SweepResult::from_users(k_min, k_max, &users)
}

/// One user's random-partition scores, `per_run[r][i][s]` for run `r`,
/// K = `k_min + i`, stack `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct UserBaseline {
    pub user_id: String,
    pub per_run: Vec<Vec<Vec<StackScore>>>,
}

pub fn random_baseline_user(
    view: &UserView<'_>,
    k_min: usize,
    k_max: usize,
    runs: usize,
    seed: u64,
) -> Result<UserBaseline, EvalError> {
    check_range(k_min, k_max)?;
    if runs == 0 {
        return Err(EvalError::InvalidRuns);
    }
    require_stacks(view)?;
    let user_hash = seed::hash_str(view.user_id);
    let n = view.pages.len();
    let per_run = (0..runs)
        .map(|r| {
            (k_min..=k_max)
                .map(|k| {
                    let s = seed::derive(seed, &[seed::STREAM_BASELINE, user_hash, r as u64, k as u64]);
                    let p = cluster::random_equal_partition(n, k, s)?;
                    score_stacks(view, &p)
                })
                .collect::<Result<Vec<_>, EvalError>>()
        })
        .collect::<Result<_, _>>()?;
    Ok(UserBaseline {
        user_id: view.user_id.to_string(),
        per_run,
    })
}

/// Macro scores per K from per-user baselines, averaged over runs.
pub fn random_baseline_from_users(
    k_min: usize,
    k_max: usize,
    users: &[UserBaseline],
) -> Result<Vec<(usize, MacroScores)>, EvalError> {
    check_range(k_min, k_max)?;
    let runs = users.first().map_or(0, |u| u.per_run.len());
    if runs == 0 {
        return Err(EvalError::NoStacks);
    }
    (k_min..=k_max)
        .enumerate()
        .map(|(i, k)| {
            let per_run = (0..runs)
                .map(|r| macro_average(users.iter().flat_map(|u| u.per_run[r][i].iter())))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((k, mean_of_runs(&per_run)))
        })
        .collect()
}

/// Replaces rbr with [`cluster::random_equal_partition`] and averages the
/// macro scores over `runs` seeded repetitions, for each K.
pub fn random_baseline_benchmark(
    d: &Dataset,
    k_min: usize,
    k_max: usize,
    runs: usize,
    seed: u64,
) -> Result<Vec<(usize, MacroScores)>, EvalError> {
    let owners = d.stack_owners();
    if owners.is_empty() {
        return Err(EvalError::NoStacks);
    }
    let users = owners
        .iter()
        .map(|v| random_baseline_user(v, k_min, k_max, runs, seed))
        .collect::<Result<Vec<_>, _>>()?;
    random_baseline_from_users(k_min, k_max, &users)
}

/// Each run draws one K per user uniformly from the sweep range and uses
/// that K's rbr scores; the result is the mean over runs.
pub fn random_k_from_sweeps(users: &[UserSweep], runs: usize, seed: u64) -> Result<MacroScores, EvalError> {
    if runs == 0 {
        return Err(EvalError::InvalidRuns);
    }
    let Some(first) = users.first() else {
        return Err(EvalError::NoStacks);
    };
    let (k_min, k_max) = (first.k_min, first.k_max());
    let per_run = (0..runs)
        .map(|r| {
            let picks: Vec<&[StackScore]> = users
                .iter()
                .map(|u| {
                    let s = seed::derive(seed, &[seed::STREAM_RANDOM_K, seed::hash_str(&u.user_id), r as u64]);
                    let k = ChaCha8Rng::seed_from_u64(s).random_range(k_min..=k_max);
                    u.at(k)
                })
                .collect();
            macro_average(picks.into_iter().flatten())
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(mean_of_runs(&per_run))
}

pub fn random_k_benchmark(
    d: &Dataset,
    k_min: usize,
    k_max: usize,
    runs: usize,
    seed: u64,
    cfg: &ClusterConfig,
) -> Result<MacroScores, EvalError> {
    if runs == 0 {
        return Err(EvalError::InvalidRuns);
    }
    let users = sweep_all(d, k_min, k_max, cfg)?;
    random_k_from_sweeps(&users, runs, seed)
}

/// Per stack, the highest-F1 score across the sweep (ties: smaller K),
/// macroaveraged.
pub fn optimal_k_from_sweeps(users: &[UserSweep]) -> Result<MacroScores, EvalError> {
    let best: Vec<&StackScore> = users
        .iter()
        .flat_map(|u| {
            (0..u.n_stacks()).map(move |s| {
                u.per_k
                    .iter()
                    .map(|scores| &scores[s])
                    .reduce(|a, b| if b.f1 > a.f1 { b } else { a })
                    .expect("sweep has at least one K")
            })
        })
        .collect();
    macro_average(best).map_err(|_| EvalError::NoStacks)
}

pub fn optimal_k_upper_bound(
    d: &Dataset,
    k_min: usize,
    k_max: usize,
    cfg: &ClusterConfig,
) -> Result<MacroScores, EvalError> {
    optimal_k_from_sweeps(&sweep_all(d, k_min, k_max, cfg)?)
}

/// The rbr curve against the three comparison methods.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub sweep: SweepResult,
    pub random_baseline: Vec<(usize, MacroScores)>,
    pub random_k: MacroScores,
    pub optimal_k: MacroScores,
}

impl BenchmarkReport {
    pub fn from_users(
        k_min: usize,
        k_max: usize,
        runs: usize,
        seed: u64,
        sweeps: &[UserSweep],
        baselines: &[UserBaseline],
    ) -> Result<Self, EvalError> {
        Ok(Self {
            sweep: SweepResult::from_users(k_min, k_max, sweeps)?,
            random_baseline: random_baseline_from_users(k_min, k_max, baselines)?,
            random_k: random_k_from_sweeps(sweeps, runs, seed)?,
            optimal_k: optimal_k_from_sweeps(sweeps)?,
        })
    }

    pub fn rbr_at(&self, k: usize) -> Option<MacroScores> {
        self.sweep.at(k).map(|e| e.scores)
    }

    pub fn baseline_at(&self, k: usize) -> Option<MacroScores> {
        self.random_baseline.iter().find(|(kk, _)| *kk == k).map(|(_, m)| *m)
    }
}

/// Sweep plus all three benchmarks, sequentially. `seed` drives the two
/// random methods; `cfg.seed` drives rbr.
pub fn benchmark(
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
    let sweeps = sweep_all(d, k_min, k_max, cfg)?;
    let baselines = d
        .stack_owners()
        .iter()
        .map(|v| random_baseline_user(v, k_min, k_max, runs, seed))
        .collect::<Result<Vec<_>, _>>()?;
    BenchmarkReport::from_users(k_min, k_max, runs, seed, &sweeps, &baselines)
}

/// Number of clusters a user with `n` pages gets for a requested `k`.
pub fn k_used(n: usize, k: usize) -> usize {
    effective_k(n, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{example_fixture, Stack, TagAssignment};
    use alloc::vec;

    fn score(p: f64, r: f64) -> StackScore {
        StackScore {
            user_id: "u".into(),
            stack_id: "s".into(),
            matched_cluster: 0,
            precision: p,
            recall: r,
            f1: if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 },
            k_used: 1,
        }
    }

    #[test]
    fn prf_examples() {
        let m = prf(&["a", "b", "c"], &["a", "b", "d", "e"]).unwrap();
        assert_eq!(m.precision, 0.5);
        assert_eq!(m.recall, 2.0 / 3.0);
        assert_eq!(m.f1, 4.0 / 7.0);
        let id = prf(&[1, 2], &[1, 2]).unwrap();
        assert_eq!((id.precision, id.recall, id.f1), (1.0, 1.0, 1.0));
        let none = prf(&[1, 2], &[3]).unwrap();
        assert_eq!((none.precision, none.recall, none.f1), (0.0, 0.0, 0.0));
        assert_eq!(prf::<u8>(&[], &[1]), Err(EvalError::EmptySet));
        assert_eq!(prf(&[1], &[]), Err(EvalError::EmptySet));
    }

    #[test]
    fn best_match_exact_cluster() {
        let p = Partition::new(vec![0, 0, 1, 1, 2]).unwrap();
        let s = best_match("u", "s", &[2, 3], &p).unwrap();
        assert_eq!((s.matched_cluster, s.f1), (1, 1.0));
    }

    #[test]
    fn best_match_tie_prefers_lowest_id() {
        // stack {0,1}; clusters {0},{1}: both F1 = 2/3, P = 1
        let p = Partition::singletons(2);
        let s = best_match("u", "s", &[0, 1], &p).unwrap();
        assert_eq!(s.matched_cluster, 0);
        assert_eq!(s.precision, 1.0);
        assert!((s.f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn best_match_tie_prefers_precision() {
        // stack {0,1,2,3}; cluster0 = {0,1,4,5,6,7} has F1 4/10, P 1/3;
        // clusters {2} and {3} have F1 2/5, P 1
        let p = Partition::new(vec![0, 0, 1, 2, 0, 0, 0, 0]).unwrap();
        let s = best_match("u", "s", &[0, 1, 2, 3], &p).unwrap();
        assert_eq!(s.matched_cluster, 1);
        assert_eq!(s.precision, 1.0);
    }

    #[test]
    fn best_match_single_cluster() {
        let p = Partition::single(7);
        let s = best_match("u", "s", &[0, 1, 2], &p).unwrap();
        assert_eq!((s.recall, s.precision), (1.0, 3.0 / 7.0));
    }

    #[test]
    fn macro_examples() {
        let one = score(0.5, 0.25);
        assert_eq!(macro_average([&one]).unwrap().f1, one.f1);
        let a = StackScore {
            f1: 1.0,
            ..score(1.0, 1.0)
        };
        let b = StackScore {
            f1: 0.0,
            ..score(0.0, 0.0)
        };
        assert_eq!(macro_average([&a, &b]).unwrap().f1, 0.5);
        assert_eq!(macro_average([]), Err(EvalError::NoScores));
    }

    #[test]
    fn macro_f1_is_not_f1_of_macros() {
        // F1 of (1, 0.2) and (0.2, 1) is 1/3 each; macro P = macro R = 0.6
        let m = macro_average(&[score(1.0, 0.2), score(0.2, 1.0)]).unwrap();
        assert!((m.f1 - 1.0 / 3.0).abs() < 1e-12);
        let hm = 2.0 * m.precision * m.recall / (m.precision + m.recall);
        assert!((hm - 0.6).abs() < 1e-12);
    }

    #[test]
    fn fixture_user_recovers_both_stacks() {
        let d = example_fixture();
        let v = d.user("user1").unwrap();
        let scores = evaluate_user(&v, 3, &ClusterConfig::default()).unwrap();
        let (_, vectors) = vectorize_user(&v);
        let optimal = cluster::brute_force_optimal(&vectors, 3).unwrap();
        assert_eq!(optimal.clusters(), vec![vec![0, 1, 2], vec![3, 4], vec![5, 6]]);
        assert_eq!(scores.len(), 2);
        assert!(scores.iter().all(|s| s.f1 == 1.0), "{scores:?}");
        assert_eq!(scores, evaluate_user(&v, 3, &ClusterConfig::default()).unwrap());
    }

    #[test]
    fn single_page_user() {
        let d = Dataset::from_records([TagAssignment::new("u", "p", ["a"])], [Stack::new("u", "s", ["p"])]).unwrap();
        let v = d.user("u").unwrap();
        let s = evaluate_user(&v, 5, &ClusterConfig::default()).unwrap();
        assert_eq!((s[0].k_used, s[0].f1), (1, 1.0));
    }

    #[test]
    fn user_without_stacks_is_an_error() {
        let d = Dataset::from_records([TagAssignment::new("u", "p", ["a"])], []).unwrap();
        let v = d.user("u").unwrap();
        assert!(matches!(
            evaluate_user(&v, 2, &ClusterConfig::default()),
            Err(EvalError::UserWithoutStacks(_))
        ));
        assert!(matches!(
            k_sweep(&d, 2, 3, &ClusterConfig::default()),
            Err(EvalError::NoStacks)
        ));
    }

    #[test]
    fn sweep_single_entry_and_range_errors() {
        let d = example_fixture();
        let cfg = ClusterConfig::default();
        let s = k_sweep(&d, 2, 2, &cfg).unwrap();
        assert_eq!(s.entries.len(), 1);
        assert!(k_sweep(&d, 3, 2, &cfg).is_err());
        assert!(k_sweep(&d, 0, 2, &cfg).is_err());
    }

    #[test]
    fn sweep_user_matches_evaluate_user() {
        let d = example_fixture();
        let v = d.user("user1").unwrap();
        let cfg = ClusterConfig::default();
        let sw = sweep_user(&v, 1, 7, &cfg).unwrap();
        for k in 1..=7 {
            assert_eq!(sw.at(k), evaluate_user(&v, k, &cfg).unwrap().as_slice());
        }
    }

    #[test]
    fn random_baseline_single_page_users() {
        let d = Dataset::from_records(
            [TagAssignment::new("u", "p", ["a"]), TagAssignment::new("v", "p", ["b"])],
            [Stack::new("u", "s", ["p"]), Stack::new("v", "s", ["p"])],
        )
        .unwrap();
        let b = random_baseline_benchmark(&d, 2, 4, 3, 1).unwrap();
        assert!(b.iter().all(|(_, m)| m.f1 == 1.0));
        assert_eq!(b, random_baseline_benchmark(&d, 2, 4, 3, 1).unwrap());
        assert_eq!(random_baseline_benchmark(&d, 2, 4, 0, 1), Err(EvalError::InvalidRuns));
    }

    #[test]
    fn random_k_degenerate_range() {
        let d = example_fixture();
        let cfg = ClusterConfig::default();
        let rk = random_k_benchmark(&d, 3, 3, 4, 9, &cfg).unwrap();
        assert_eq!(rk, k_sweep(&d, 3, 3, &cfg).unwrap().entries[0].scores);
    }

    #[test]
    fn constant_runs_average_exactly() {
        let m = MacroScores {
            precision: 0.1,
            recall: 0.7,
            f1: 1.0 / 3.0,
        };
        assert_eq!(mean_of_runs(&[m; 3]), m);
        assert_eq!(mean_of_runs(&[m; 7]), m);
    }

    #[test]
    fn optimal_k_dominates() {
        let d = example_fixture();
        let cfg = ClusterConfig::default();
        let sweep = k_sweep(&d, 1, 7, &cfg).unwrap();
        let ub = optimal_k_upper_bound(&d, 1, 7, &cfg).unwrap();
        assert!(sweep.f1_curve().all(|f| f <= ub.f1));
        let rk = random_k_benchmark(&d, 1, 7, 10, 3, &cfg).unwrap();
        assert!(rk.f1 <= ub.f1);
    }
}
