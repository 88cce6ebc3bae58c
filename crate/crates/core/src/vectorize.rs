//! Per-user tag vector spaces.
//!
//! Pages are binary tag-occurrence vectors scaled to unit length, so the
//! dot product of two page vectors is their cosine similarity. Cluster
//! composites are accumulated in 2^-64 fixed point: every unit-vector
//! weight of a page with fewer than 2^24 tags converts exactly, making
//! composite sums exact and independent of accumulation order.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::cluster::{ClusterError, Partition};
use crate::corpus::UserView;

/// Dense dimension index for each of one user's tags, in sorted tag order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TagVocabulary {
    index: BTreeMap<String, usize>,
}

impl TagVocabulary {
    pub fn build(view: &UserView<'_>) -> Self {
        Self::from_tags(view.pages.iter().flat_map(|p| p.tags.iter()))
    }

    pub fn from_tags<'a, I>(tags: I) -> Self
    where
        I: IntoIterator<Item = &'a String>,
    {
        let sorted: BTreeSet<&String> = tags.into_iter().collect();
        let index = sorted.into_iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self { index }
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn index_of(&self, tag: &str) -> Option<usize> {
        self.index.get(tag).copied()
    }

    /// Tags in index order.
    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.index.keys().map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VectorizeError {
    UnknownTag(String),
    UnsortedEntries,
    NonPositiveWeight,
}

impl fmt::Display for VectorizeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UnknownTag(t) => write!(f, "tag {t:?} is not in the vocabulary"),
            Self::UnsortedEntries => f.write_str("vector indices must be strictly increasing"),
            Self::NonPositiveWeight => f.write_str("vector weights must be positive and finite"),
        }
    }
}

impl core::error::Error for VectorizeError {}

/// Sparse non-negative vector with strictly increasing indices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PageVector {
    entries: Vec<(usize, f64)>,
}

impl PageVector {
    /// Binary weights over `tags`, normalized to unit length. An empty tag
    /// set gives the zero vector.
    pub fn from_tags<'a, I>(tags: I, vocab: &TagVocabulary) -> Result<Self, VectorizeError>
    where
        I: IntoIterator<Item = &'a String>,
    {
        let mut idx = tags
            .into_iter()
            .map(|t| vocab.index_of(t).ok_or_else(|| VectorizeError::UnknownTag(t.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        idx.sort_unstable();
        idx.dedup();
        let w = libm::sqrt(1.0 / idx.len() as f64);
        Ok(Self {
            entries: idx.into_iter().map(|i| (i, w)).collect(),
        })
    }

    /// Unnormalized vector from explicit entries.
    pub fn from_entries(entries: Vec<(usize, f64)>) -> Result<Self, VectorizeError> {
        if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(VectorizeError::UnsortedEntries);
        }
        if entries.iter().any(|&(_, w)| !(w > 0.0 && w.is_finite())) {
            return Err(VectorizeError::NonPositiveWeight);
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.entries.iter().map(|&(_, w)| w * w).sum())
    }

    /// Scales to unit length; the zero vector stays zero.
    pub fn normalized(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let n = self.norm();
        Self {
            entries: self.entries.iter().map(|&(i, w)| (i, w / n)).collect(),
        }
    }

    pub fn dot(&self, other: &PageVector) -> f64 {
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        let mut sum = 0.0;
        while let (Some(&&(i, x)), Some(&&(j, y))) = (a.peek(), b.peek()) {
            match i.cmp(&j) {
                core::cmp::Ordering::Less => {
                    a.next();
                }
                core::cmp::Ordering::Greater => {
                    b.next();
                }
                core::cmp::Ordering::Equal => {
                    sum += x * y;
                    a.next();
                    b.next();
                }
            }
        }
        sum
    }

    /// Smallest dimension needed to hold this vector.
    pub fn min_dim(&self) -> usize {
        self.entries.last().map_or(0, |&(i, _)| i + 1)
    }
}

/// Vectorizes every page of a user in page order.
pub fn vectorize_user(view: &UserView<'_>) -> (TagVocabulary, Vec<PageVector>) {
    let vocab = TagVocabulary::build(view);
    let vectors = view
        .pages
        .iter()
        .map(|p| PageVector::from_tags(p.tags.iter(), &vocab).expect("vocabulary built from the same view"))
        .collect();
    (vocab, vectors)
}

/// Cosine similarity of two unit (or zero) vectors, clamped to [0, 1].
pub fn cosine(a: &PageVector, b: &PageVector) -> f64 {
    if a == b && !a.is_zero() {
        return 1.0;
    }
    a.dot(b).clamp(0.0, 1.0)
}

const FIXED_SCALE: f64 = 18_446_744_073_709_551_616.0; // 2^64
const FIXED_INV: f64 = 1.0 / FIXED_SCALE;

#[inline]
fn to_fixed(w: f64) -> i128 {
    (w * FIXED_SCALE) as i128
}

#[inline]
fn from_fixed(x: i128) -> f64 {
    x as f64 * FIXED_INV
}

/// Unnormalized sum of page vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositeVector {
    fixed: Vec<i128>,
}

impl CompositeVector {
    pub fn zeros(dim: usize) -> Self {
        Self { fixed: vec![0; dim] }
    }

    pub fn of<'a, I>(dim: usize, vectors: I) -> Self
    where
        I: IntoIterator<Item = &'a PageVector>,
    {
        let mut c = Self::zeros(dim);
        for v in vectors {
            c.add(v);
        }
        c
    }

    pub fn dim(&self) -> usize {
        self.fixed.len()
    }

    pub fn add(&mut self, v: &PageVector) {
        for &(i, w) in &v.entries {
            self.fixed[i] += to_fixed(w);
        }
    }

    pub fn sub(&mut self, v: &PageVector) {
        for &(i, w) in &v.entries {
            self.fixed[i] -= to_fixed(w);
        }
    }

    pub fn get(&self, i: usize) -> f64 {
        from_fixed(self.fixed[i])
    }

    /// Non-zero coordinates as a sparse list.
    pub fn entries(&self) -> Vec<(usize, f64)> {
        self.fixed
            .iter()
            .enumerate()
            .filter(|(_, &x)| x != 0)
            .map(|(i, &x)| (i, from_fixed(x)))
            .collect()
    }

    pub fn norm_sq(&self) -> f64 {
        self.fixed
            .iter()
            .map(|&x| {
                let y = from_fixed(x);
                y * y
            })
            .sum()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sq())
    }

    pub fn dot(&self, v: &PageVector) -> f64 {
        v.entries.iter().map(|&(i, w)| self.get(i) * w).sum()
    }

    /// `‖self ± v‖²` given `self_sq = ‖self‖²`, touching only v's support.
    pub(crate) fn norm_sq_shifted(&self, self_sq: f64, v: &PageVector, add: bool) -> f64 {
        let delta: f64 = v
            .entries
            .iter()
            .map(|&(i, w)| {
                let before = self.fixed[i];
                let after = if add {
                    before + to_fixed(w)
                } else {
                    before - to_fixed(w)
                };
                let (b, a) = (from_fixed(before), from_fixed(after));
                a * a - b * b
            })
            .sum();
        (self_sq + delta).max(0.0)
    }
}

/// Dimension large enough for every vector in `vectors`.
pub(crate) fn space_dim(vectors: &[PageVector]) -> usize {
    vectors.iter().map(PageVector::min_dim).max().unwrap_or(0)
}

/// Σ over clusters of the norm of the cluster's composite vector.
pub fn criterion_i2(partition: &Partition, vectors: &[PageVector]) -> Result<f64, ClusterError> {
    if partition.len() != vectors.len() {
        return Err(ClusterError::LengthMismatch {
            expected: vectors.len(),
            got: partition.len(),
        });
    }
    let dim = space_dim(vectors);
    let mut composites = vec![CompositeVector::zeros(dim); partition.k()];
    for (v, &c) in vectors.iter().zip(partition.assignment()) {
        composites[c].add(v);
    }
    Ok(composites.iter().map(CompositeVector::norm).sum())
}
