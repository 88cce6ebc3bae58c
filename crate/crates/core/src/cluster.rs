//! K-way repeated bisections with global refinement.
//!
//! [`rbr`] starts from a single cluster and commits K−1 two-way splits. At
//! every step each splittable cluster is tentatively bisected by seeded
//! spherical 2-means and the split with the largest gain in the I2
//! criterion wins. A final hill-climbing pass ([`refine`]) then moves single
//! pages between clusters while that improves I2.
//!
//! Untagged pages carry no signal: they are clustered separately from the
//! rest and attached to the largest cluster at the end.
//!
//! Randomness comes only from the seed in [`ClusterConfig`]. A bisection's
//! stream is keyed by the member set being split, so a given cluster is
//! always split the same way no matter when it is considered.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::seed;
use crate::vectorize::{space_dim, CompositeVector, PageVector};

/// Guard for [`brute_force_optimal`].
pub const BRUTE_FORCE_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClusterError {
    EmptyInput,
    InvalidK { k: usize, n: usize },
    TooFewMembers(usize),
    InvalidMember(usize),
    LengthMismatch { expected: usize, got: usize },
    InvalidAssignment,
    InvalidConfig(&'static str),
    TooManyPages { n: usize, limit: usize },
}

impl fmt::Display for ClusterError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptyInput => f.write_str("nothing to cluster"),
            Self::InvalidK { k, n } => write!(f, "cannot form {k} clusters from {n} pages"),
            Self::TooFewMembers(n) => write!(f, "bisection needs at least 2 members, got {n}"),
            Self::InvalidMember(i) => write!(f, "member index {i} is out of range or repeated"),
            Self::LengthMismatch { expected, got } => {
                write!(f, "partition covers {got} pages, expected {expected}")
            }
            Self::InvalidAssignment => f.write_str("cluster ids must be contiguous from 0 with no empty cluster"),
            Self::InvalidConfig(what) => write!(f, "invalid clustering config: {what}"),
            Self::TooManyPages { n, limit } => {
                write!(f, "exhaustive search refused: {n} pages exceeds the limit of {limit}")
            }
        }
    }
}

impl core::error::Error for ClusterError {}

/// Assignment of pages to `k` non-empty clusters `0..k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    k: usize,
    assignment: Vec<usize>,
}

impl Partition {
    pub fn new(assignment: Vec<usize>) -> Result<Self, ClusterError> {
        let k = assignment.iter().max().map_or(0, |&m| m + 1);
        let mut seen = vec![false; k];
        for &c in &assignment {
            seen[c] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(ClusterError::InvalidAssignment);
        }
        Ok(Self { k, assignment })
    }

    /// Relabels arbitrary labels into ids numbered by first appearance.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map: Vec<(usize, usize)> = Vec::new();
        let assignment = labels
            .iter()
            .map(|l| match map.iter().find(|(from, _)| from == l) {
                Some(&(_, to)) => to,
                None => {
                    map.push((*l, map.len()));
                    map.len() - 1
                }
            })
            .collect();
        Self {
            k: map.len(),
            assignment,
        }
    }

    fn from_groups(n: usize, groups: &[Vec<usize>]) -> Self {
        let mut assignment = vec![usize::MAX; n];
        for (c, g) in groups.iter().enumerate() {
            for &i in g {
                assignment[i] = c;
            }
        }
        debug_assert!(assignment.iter().all(|&c| c != usize::MAX));
        Self {
            k: groups.len(),
            assignment,
        }
    }

    pub fn single(n: usize) -> Self {
        Self {
            k: usize::from(n > 0),
            assignment: vec![0; n],
        }
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            k: n,
            assignment: (0..n).collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of pages covered.
    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn cluster_of(&self, page: usize) -> usize {
        self.assignment[page]
    }

    /// Member lists per cluster, each sorted ascending.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &c) in self.assignment.iter().enumerate() {
            out[c].push(i);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.k];
        for &c in &self.assignment {
            out[c] += 1;
        }
        out
    }

    /// Same grouping with ids renumbered by first appearance.
    pub fn canonical(&self) -> Self {
        Self::from_labels(&self.assignment)
    }
}

/// Tuning knobs for [`rbr`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterConfig {
    /// Seeded 2-means runs per tentative bisection.
    pub trials_per_bisection: usize,
    pub max_2means_iterations: usize,
    pub max_refinement_passes: usize,
    pub seed: u64,
    /// Criterion differences within this absolute tolerance count as ties.
    pub tie_tolerance: f64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            trials_per_bisection: 10,
            max_2means_iterations: 50,
            max_refinement_passes: 10,
            seed: 42,
            tie_tolerance: 1e-9,
        }
    }
}

impl ClusterConfig {
    pub fn validate(&self) -> Result<(), ClusterError> {
        if self.trials_per_bisection == 0 {
            return Err(ClusterError::InvalidConfig("trials_per_bisection must be positive"));
        }
        if self.max_2means_iterations == 0 {
            return Err(ClusterError::InvalidConfig("max_2means_iterations must be positive"));
        }
        if self.max_refinement_passes == 0 {
            return Err(ClusterError::InvalidConfig("max_refinement_passes must be positive"));
        }
        if !(self.tie_tolerance >= 0.0 && self.tie_tolerance.is_finite()) {
            return Err(ClusterError::InvalidConfig(
                "tie_tolerance must be finite and non-negative",
            ));
        }
        Ok(())
    }

    /// Copy whose seed is specialised to one user.
    pub fn for_user(&self, user_id: &str) -> Self {
        Self {
            seed: seed::derive(self.seed, &[seed::STREAM_USER, seed::hash_str(user_id)]),
            ..self.clone()
        }
    }
}

/// `k` limited to the number of pages. The clamp is visible to callers
/// through `Partition::k` on the result.
pub fn effective_k(n: usize, k: usize) -> usize {
    k.min(n)
}

fn validate_inputs(n: usize, k: usize) -> Result<(), ClusterError> {
    if n == 0 {
        return Err(ClusterError::EmptyInput);
    }
    if k == 0 {
        return Err(ClusterError::InvalidK { k, n });
    }
    Ok(())
}

fn check_members(n: usize, members: &[usize]) -> Result<Vec<usize>, ClusterError> {
    let mut sorted = members.to_vec();
    sorted.sort_unstable();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(ClusterError::InvalidMember(w[0]));
        }
    }
    if let Some(&bad) = sorted.iter().find(|&&i| i >= n) {
        return Err(ClusterError::InvalidMember(bad));
    }
    Ok(sorted)
}

/// Splits `members` into two non-empty halves maximizing the summed
/// composite norms over a number of seeded spherical 2-means trials.
///
/// Both halves are sorted; the first contains the smallest member. Equal
/// scores resolve to the lexicographically smaller first half.
pub fn bisect(
    vectors: &[PageVector],
    members: &[usize],
    cfg: &ClusterConfig,
    trial_seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), ClusterError> {
    cfg.validate()?;
    if members.len() < 2 {
        return Err(ClusterError::TooFewMembers(members.len()));
    }
    let sorted = check_members(vectors.len(), members)?;
    let b = bisect_sorted(vectors, space_dim(vectors), &sorted, cfg, trial_seed);
    Ok((b.first, b.second))
}

struct Bisection {
    first: Vec<usize>,
    second: Vec<usize>,
    score: f64,
}

impl Bisection {
    fn from_sides(vectors: &[PageVector], dim: usize, members: &[usize], side: &[bool]) -> Self {
        // side[j] == side[0] goes first, so the smallest member leads
        let lead = side[0];
        let (mut first, mut second) = (Vec::new(), Vec::new());
        for (&m, &s) in members.iter().zip(side) {
            if s == lead {
                first.push(m);
            } else {
                second.push(m);
            }
        }
        let score = group_norm(vectors, dim, &first) + group_norm(vectors, dim, &second);
        Self { first, second, score }
    }

    fn beats(&self, other: &Bisection, tol: f64) -> bool {
        if self.score > other.score + tol {
            return true;
        }
        (self.score - other.score).abs() <= tol && self.first < other.first
    }
}

fn group_norm(vectors: &[PageVector], dim: usize, group: &[usize]) -> f64 {
    CompositeVector::of(dim, group.iter().map(|&i| &vectors[i])).norm()
}

fn bisect_sorted(
    vectors: &[PageVector],
    dim: usize,
    members: &[usize],
    cfg: &ClusterConfig,
    trial_seed: u64,
) -> Bisection {
    let fallback = || {
        let mut side = vec![true; members.len()];
        side[0] = false;
        Bisection::from_sides(vectors, dim, members, &side)
    };
    let informative: Vec<usize> = (0..members.len()).filter(|&j| !vectors[members[j]].is_zero()).collect();
    let distinct = informative
        .iter()
        .any(|&j| vectors[members[j]] != vectors[members[informative[0]]]);
    if !distinct {
        // every split scores the same; the tie rule picks {min} | rest
        return fallback();
    }

    let mut best: Option<Bisection> = None;
    for trial in 0..cfg.trials_per_bisection {
        let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(trial_seed, &[trial as u64]));
        let a = informative[rng.random_range(0..informative.len())];
        let others: Vec<usize> = informative
            .iter()
            .copied()
            .filter(|&j| vectors[members[j]] != vectors[members[a]])
            .collect();
        let b = others[rng.random_range(0..others.len())];
        let Some(side) = two_means(vectors, dim, members, a, b, cfg.max_2means_iterations) else {
            continue;
        };
        let cand = Bisection::from_sides(vectors, dim, members, &side);
        if best.as_ref().is_none_or(|cur| cand.beats(cur, cfg.tie_tolerance)) {
            best = Some(cand);
        }
    }
    best.unwrap_or_else(fallback)
}

/// Spherical 2-means seeded with members `a` and `b` (positions into
/// `members`). Returns `None` if one side ever empties.
fn two_means(
    vectors: &[PageVector],
    dim: usize,
    members: &[usize],
    a: usize,
    b: usize,
    max_iter: usize,
) -> Option<Vec<bool>> {
    let mut centroids = [
        CompositeVector::of(dim, [&vectors[members[a]]]),
        CompositeVector::of(dim, [&vectors[members[b]]]),
    ];
    let mut side: Vec<bool> = Vec::new();
    for _ in 0..max_iter {
        let norms = [centroids[0].norm(), centroids[1].norm()];
        let next: Vec<bool> = members
            .iter()
            .map(|&m| {
                let v = &vectors[m];
                let s0 = centroids[0].dot(v) / norms[0];
                let s1 = centroids[1].dot(v) / norms[1];
                s1 > s0
            })
            .collect();
        let ones = next.iter().filter(|&&s| s).count();
        if ones == 0 || ones == next.len() {
            return None;
        }
        if next == side {
            break;
        }
        side = next;
        let mut fresh = [CompositeVector::zeros(dim), CompositeVector::zeros(dim)];
        for (&m, &s) in members.iter().zip(&side) {
            fresh[usize::from(s)].add(&vectors[m]);
        }
        centroids = fresh;
    }
    Some(side)
}

struct Candidate {
    first: Vec<usize>,
    second: Vec<usize>,
    gain: f64,
}

/// Greedy split sequence over a fixed vector set. Each committed split
/// keeps the first half under the old cluster id and appends the second.
pub(crate) struct Growth<'a> {
    vectors: &'a [PageVector],
    dim: usize,
    cfg: &'a ClusterConfig,
    clusters: Vec<Vec<usize>>,
    norms: Vec<f64>,
    candidates: Vec<Option<Candidate>>,
}

impl<'a> Growth<'a> {
    pub(crate) fn new(vectors: &'a [PageVector], cfg: &'a ClusterConfig) -> Self {
        let dim = space_dim(vectors);
        let all: Vec<usize> = (0..vectors.len()).collect();
        let norm = group_norm(vectors, dim, &all);
        Self {
            vectors,
            dim,
            cfg,
            clusters: vec![all],
            norms: vec![norm],
            candidates: vec![None],
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.clusters.len()
    }

    fn candidate(&mut self, c: usize) -> Option<&Candidate> {
        if self.clusters[c].len() < 2 {
            return None;
        }
        if self.candidates[c].is_none() {
            let members = &self.clusters[c];
            let stream = seed::derive(self.cfg.seed, &[seed::hash_indices(members)]);
            let b = bisect_sorted(self.vectors, self.dim, members, self.cfg, stream);
            self.candidates[c] = Some(Candidate {
                first: b.first,
                second: b.second,
                gain: b.score - self.norms[c],
            });
        }
        self.candidates[c].as_ref()
    }

    /// Commits the best split. Returns `false` when nothing can be split.
    pub(crate) fn step(&mut self) -> bool {
        let tol = self.cfg.tie_tolerance;
        let mut best: Option<(usize, f64)> = None;
        for c in 0..self.clusters.len() {
            if let Some(cand) = self.candidate(c) {
                let g = cand.gain;
                if best.is_none_or(|(_, bg)| g > bg + tol) {
                    best = Some((c, g));
                }
            }
        }
        let Some((c, _)) = best else {
            return false;
        };
        let cand = self.candidates[c].take().expect("candidate computed above");
        let second_norm = group_norm(self.vectors, self.dim, &cand.second);
        self.norms[c] = group_norm(self.vectors, self.dim, &cand.first);
        self.clusters[c] = cand.first;
        self.clusters.push(cand.second);
        self.norms.push(second_norm);
        self.candidates.push(None);
        true
    }

    pub(crate) fn grow_to(&mut self, k: usize) {
        while self.len() < k && self.step() {}
    }

    pub(crate) fn partition(&self) -> Partition {
        Partition::from_groups(self.vectors.len(), &self.clusters)
    }
}

/// Informative pages handled by bisection, and the untagged remainder.
struct Layout {
    n: usize,
    informative: Vec<usize>,
    zeros: Vec<usize>,
    k: usize,
}

impl Layout {
    fn new(vectors: &[PageVector], k: usize) -> Self {
        let (informative, zeros): (Vec<usize>, Vec<usize>) = (0..vectors.len()).partition(|&i| !vectors[i].is_zero());
        Self {
            n: vectors.len(),
            k: effective_k(vectors.len(), k),
            informative,
            zeros,
        }
    }

    fn informative_k(&self) -> usize {
        self.k.min(self.informative.len())
    }

    fn sub_vectors(&self, vectors: &[PageVector]) -> Vec<PageVector> {
        self.informative.iter().map(|&i| vectors[i].clone()).collect()
    }

    /// Lifts a partition of the informative pages to all pages. Missing
    /// clusters are seeded with untagged pages, one each; the rest of the
    /// untagged pages join the largest cluster (lowest id on ties).
    fn lift(&self, sub: &Partition) -> Partition {
        let mut groups: Vec<Vec<usize>> = sub
            .clusters()
            .into_iter()
            .map(|g| g.into_iter().map(|j| self.informative[j]).collect())
            .collect();
        let extra = self.k - groups.len();
        let (seeds, rest) = self.zeros.split_at(extra);
        let largest = groups
            .iter()
            .enumerate()
            .fold(None::<(usize, usize)>, |best, (c, g)| match best {
                Some((_, len)) if len >= g.len() => best,
                _ => Some((c, g.len())),
            })
            .map(|(c, _)| c);
        groups.extend(seeds.iter().map(|&z| vec![z]));
        let target = largest.unwrap_or(0);
        groups[target].extend_from_slice(rest);
        groups[target].sort_unstable();
        Partition::from_groups(self.n, &groups)
    }
}

/// K−1 greedy bisections, no refinement. `k` is clamped to the page count.
pub fn repeated_bisections(vectors: &[PageVector], k: usize, cfg: &ClusterConfig) -> Result<Partition, ClusterError> {
    validate_inputs(vectors.len(), k)?;
    cfg.validate()?;
    let layout = Layout::new(vectors, k);
    let sub_vectors = layout.sub_vectors(vectors);
    let sub = if sub_vectors.is_empty() {
        Partition::single(0)
    } else {
        let mut g = Growth::new(&sub_vectors, cfg);
        g.grow_to(layout.informative_k());
        g.partition()
    };
    Ok(layout.lift(&sub))
}

/// Single-page hill climbing on I2.
///
/// Pages are visited in index order; each moves to the cluster giving the
/// largest I2 gain when that gain exceeds the tie tolerance and its source
/// cluster keeps at least one page. Untagged pages never move.
pub fn refine(p: &Partition, vectors: &[PageVector], cfg: &ClusterConfig) -> Result<Partition, ClusterError> {
    cfg.validate()?;
    if p.len() != vectors.len() {
        return Err(ClusterError::LengthMismatch {
            expected: vectors.len(),
            got: p.len(),
        });
    }
    Ok(refine_unchecked(p, vectors, cfg))
}

fn refine_unchecked(p: &Partition, vectors: &[PageVector], cfg: &ClusterConfig) -> Partition {
    let dim = space_dim(vectors);
    let mut labels = p.assignment.clone();
    let mut sizes = p.sizes();
    let mut composites = vec![CompositeVector::zeros(dim); p.k];
    for (v, &c) in vectors.iter().zip(&labels) {
        composites[c].add(v);
    }
    let mut sq: Vec<f64> = composites.iter().map(CompositeVector::norm_sq).collect();

    for _ in 0..cfg.max_refinement_passes {
        let mut moved = false;
        for (i, v) in vectors.iter().enumerate() {
            let src = labels[i];
            if v.is_zero() || sizes[src] < 2 {
                continue;
            }
            let loss = libm::sqrt(composites[src].norm_sq_shifted(sq[src], v, false)) - libm::sqrt(sq[src]);
            let mut best: Option<(usize, f64)> = None;
            for dst in 0..p.k {
                if dst == src {
                    continue;
                }
                let g = libm::sqrt(composites[dst].norm_sq_shifted(sq[dst], v, true)) - libm::sqrt(sq[dst]) + loss;
                if best.is_none_or(|(_, bg)| g > bg) {
                    best = Some((dst, g));
                }
            }
            if let Some((dst, g)) = best {
                if g > cfg.tie_tolerance {
                    composites[src].sub(v);
                    composites[dst].add(v);
                    sq[src] = composites[src].norm_sq();
                    sq[dst] = composites[dst].norm_sq();
                    sizes[src] -= 1;
                    sizes[dst] += 1;
                    labels[i] = dst;
                    moved = true;
                }
            }
        }
        if !moved {
            break;
        }
    }
    Partition {
        k: p.k,
        assignment: labels,
    }
}

/// Repeated bisections followed by global refinement.
///
/// The result is a pure function of `(vectors, k, cfg)`.
pub fn rbr(vectors: &[PageVector], k: usize, cfg: &ClusterConfig) -> Result<Partition, ClusterError> {
    validate_inputs(vectors.len(), k)?;
    cfg.validate()?;
    let layout = Layout::new(vectors, k);
    let sub_vectors = layout.sub_vectors(vectors);
    if sub_vectors.is_empty() {
        return Ok(layout.lift(&Partition::single(0)));
    }
    let mut g = Growth::new(&sub_vectors, cfg);
    g.grow_to(layout.informative_k());
    let refined = refine_unchecked(&g.partition(), &sub_vectors, cfg);
    Ok(layout.lift(&refined))
}

/// [`rbr`] for every K in `k_min..=k_max`, sharing the bisection sequence.
/// Entry `i` equals `rbr(vectors, k_min + i, cfg)`.
pub fn rbr_sweep(
    vectors: &[PageVector],
    k_min: usize,
    k_max: usize,
    cfg: &ClusterConfig,
) -> Result<Vec<Partition>, ClusterError> {
    validate_inputs(vectors.len(), k_min)?;
    cfg.validate()?;
    if k_min > k_max {
        return Err(ClusterError::InvalidK {
            k: k_min,
            n: vectors.len(),
        });
    }
    let layout0 = Layout::new(vectors, k_min);
    let sub_vectors = layout0.sub_vectors(vectors);
    let mut growth = (!sub_vectors.is_empty()).then(|| Growth::new(&sub_vectors, cfg));
    let mut out = Vec::with_capacity(k_max - k_min + 1);
    for k in k_min..=k_max {
        let layout = Layout::new(vectors, k);
        let sub = match growth.as_mut() {
            None => Partition::single(0),
            Some(g) => {
                g.grow_to(layout.informative_k());
                refine_unchecked(&g.partition(), &sub_vectors, cfg)
            }
        };
        out.push(layout.lift(&sub));
    }
    Ok(out)
}

/// Shuffles pages with a seeded generator and deals them round-robin into
/// `k` clusters (clamped to `n`), so sizes differ by at most one.
pub fn random_equal_partition(n: usize, k: usize, seed: u64) -> Result<Partition, ClusterError> {
    validate_inputs(n, k)?;
    let k = effective_k(n, k);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut assignment = vec![0; n];
    for (pos, &page) in order.iter().enumerate() {
        assignment[page] = pos % k;
    }
    Ok(Partition { k, assignment })
}

/// Exhaustive I2 maximization over every partition into exactly `k`
/// non-empty clusters. Partitions are enumerated as restricted growth
/// strings in lexicographic order and only strict improvements (beyond
/// 1e-9) replace the incumbent.
pub fn brute_force_optimal(vectors: &[PageVector], k: usize) -> Result<Partition, ClusterError> {
    let n = vectors.len();
    validate_inputs(n, k)?;
    if n > BRUTE_FORCE_LIMIT {
        return Err(ClusterError::TooManyPages {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    if k > n {
        return Err(ClusterError::InvalidK { k, n });
    }
    let mut search = Exhaustive {
        vectors,
        k,
        labels: vec![0; n],
        composites: vec![CompositeVector::zeros(space_dim(vectors)); k],
        best: None,
    };
    search.descend(0, 0);
    let (labels, _) = search.best.expect("k <= n admits at least one partition");
    Ok(Partition { k, assignment: labels })
}

struct Exhaustive<'a> {
    vectors: &'a [PageVector],
    k: usize,
    labels: Vec<usize>,
    composites: Vec<CompositeVector>,
    best: Option<(Vec<usize>, f64)>,
}

impl Exhaustive<'_> {
    fn descend(&mut self, i: usize, used: usize) {
        let n = self.vectors.len();
        if i == n {
            if used == self.k {
                let score: f64 = self.composites.iter().map(CompositeVector::norm).sum();
                if self.best.as_ref().is_none_or(|(_, b)| score > b + 1e-9) {
                    self.best = Some((self.labels.clone(), score));
                }
            }
            return;
        }
        // every unused label must still fit in the remaining positions
        if self.k - used > n - i {
            return;
        }
        let top = (used + 1).min(self.k);
        for c in 0..top {
            self.labels[i] = c;
            self.composites[c].add(&self.vectors[i]);
            self.descend(i + 1, used.max(c + 1));
            self.composites[c].sub(&self.vectors[i]);
        }
    }
}
