//! Bookmark data model, per-user views and dataset statistics.
//!
//! A [`Dataset`] holds every user's tag assignments together with the
//! stacks they created. Users, pages and stacks are kept in `BTreeMap`s so
//! iteration order is always sorted by identifier, whatever order the
//! records arrived in.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Lowercases and trims a raw tag. Returns `None` for tags that are empty
/// after trimming.
pub fn normalize_tag(raw: &str) -> Option<String> {
    let t = raw.trim();
    if t.is_empty() {
        None
    } else {
        Some(t.to_lowercase())
    }
}

/// Normalizes and deduplicates a tag list.
pub fn normalize_tags<I, S>(raw: I) -> BTreeSet<String>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    raw.into_iter().filter_map(|t| normalize_tag(t.as_ref())).collect()
}

/// The tags one user put on one page.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagAssignment {
    pub user: String,
    pub url: String,
    pub tags: BTreeSet<String>,
}

impl TagAssignment {
    /// Builds an assignment, normalizing `tags`.
    pub fn new<I, S>(user: impl Into<String>, url: impl Into<String>, tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            user: user.into(),
            url: url.into(),
            tags: normalize_tags(tags),
        }
    }
}

/// A user-curated group of pages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stack {
    pub user: String,
    pub stack: String,
    pub urls: BTreeSet<String>,
}

impl Stack {
    pub fn new<I, S>(user: impl Into<String>, stack: impl Into<String>, urls: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            user: user.into(),
            stack: stack.into(),
            urls: urls.into_iter().map(Into::into).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusError {
    DuplicateAssignment {
        user: String,
        url: String,
    },
    DuplicateStack {
        user: String,
        stack: String,
    },
    EmptyStack {
        user: String,
        stack: String,
    },
    UnknownPage {
        user: String,
        stack: String,
        url: String,
    },
    OverlappingStacks {
        user: String,
        url: String,
        first: String,
        second: String,
    },
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DuplicateAssignment { user, url } => {
                write!(f, "duplicate assignment for user {user:?}, url {url:?}")
            }
            Self::DuplicateStack { user, stack } => {
                write!(f, "user {user:?} defines stack {stack:?} twice")
            }
            Self::EmptyStack { user, stack } => {
                write!(f, "stack {stack:?} of user {user:?} has no urls")
            }
            Self::UnknownPage { user, stack, url } => write!(
                f,
                "stack {stack:?} of user {user:?} references url {url:?} the user never tagged"
            ),
            Self::OverlappingStacks {
                user,
                url,
                first,
                second,
            } => write!(
                f,
                "url {url:?} of user {user:?} appears in stacks {first:?} and {second:?}"
            ),
        }
    }
}

impl core::error::Error for CorpusError {}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct UserRecord {
    pages: BTreeMap<String, BTreeSet<String>>,
    stacks: BTreeMap<String, BTreeSet<String>>,
    // url -> owning stack
    stacked: BTreeMap<String, String>,
}

/// All users' tag assignments and stacks. Immutable once built.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dataset {
    users: BTreeMap<String, UserRecord>,
}

/// Incremental, integrity-checking construction of a [`Dataset`].
///
/// Assignments must be added before the stacks that reference them.
#[derive(Debug, Default)]
pub struct DatasetBuilder {
    users: BTreeMap<String, UserRecord>,
}

impl DatasetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_assignment(&mut self, a: TagAssignment) -> Result<(), CorpusError> {
        let rec = self.users.entry(a.user.clone()).or_default();
        if rec.pages.contains_key(&a.url) {
            return Err(CorpusError::DuplicateAssignment {
                user: a.user,
                url: a.url,
            });
        }
        rec.pages.insert(a.url, normalize_tags(a.tags));
        Ok(())
    }

    pub fn add_stack(&mut self, s: Stack) -> Result<(), CorpusError> {
        if s.urls.is_empty() {
            return Err(CorpusError::EmptyStack {
                user: s.user,
                stack: s.stack,
            });
        }
        let Some(rec) = self.users.get_mut(&s.user) else {
            let url = s.urls.iter().next().cloned().unwrap_or_default();
            return Err(CorpusError::UnknownPage {
                user: s.user,
                stack: s.stack,
                url,
            });
        };
        if rec.stacks.contains_key(&s.stack) {
            return Err(CorpusError::DuplicateStack {
                user: s.user,
                stack: s.stack,
            });
        }
        for url in &s.urls {
            if !rec.pages.contains_key(url) {
                return Err(CorpusError::UnknownPage {
                    user: s.user.clone(),
                    stack: s.stack.clone(),
                    url: url.clone(),
                });
            }
            if let Some(owner) = rec.stacked.get(url) {
                return Err(CorpusError::OverlappingStacks {
                    user: s.user.clone(),
                    url: url.clone(),
                    first: owner.clone(),
                    second: s.stack.clone(),
                });
            }
        }
        for url in &s.urls {
            rec.stacked.insert(url.clone(), s.stack.clone());
        }
        rec.stacks.insert(s.stack, s.urls);
        Ok(())
    }

    pub fn build(self) -> Dataset {
        Dataset { users: self.users }
    }
}

/// One page as seen from its owner's view.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Page<'a> {
    pub url: &'a str,
    pub tags: &'a BTreeSet<String>,
}

/// A stack, with its members given as indices into [`UserView::pages`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StackView<'a> {
    pub id: &'a str,
    pub pages: Vec<usize>,
}

/// Everything one user tagged, stacked or not, plus their stacks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserView<'a> {
    pub user_id: &'a str,
    pub pages: Vec<Page<'a>>,
    pub stacks: Vec<StackView<'a>>,
}

impl UserView<'_> {
    /// Indices of pages that belong to no stack.
    pub fn unstacked(&self) -> Vec<usize> {
        let mut stacked = alloc::vec![false; self.pages.len()];
        for s in &self.stacks {
            for &p in &s.pages {
                stacked[p] = true;
            }
        }
        (0..self.pages.len()).filter(|&i| !stacked[i]).collect()
    }
}

impl Dataset {
    pub fn builder() -> DatasetBuilder {
        DatasetBuilder::new()
    }

    /// Builds a dataset from in-memory records.
    pub fn from_records<A, S>(assignments: A, stacks: S) -> Result<Self, CorpusError>
    where
        A: IntoIterator<Item = TagAssignment>,
        S: IntoIterator<Item = Stack>,
    {
        let mut b = DatasetBuilder::new();
        for a in assignments {
            b.add_assignment(a)?;
        }
        for s in stacks {
            b.add_stack(s)?;
        }
        Ok(b.build())
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_assignments(&self) -> usize {
        self.users.values().map(|u| u.pages.len()).sum()
    }

    pub fn n_stacks(&self) -> usize {
        self.users.values().map(|u| u.stacks.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.n_assignments() == 0
    }

    pub fn user_ids(&self) -> impl Iterator<Item = &str> {
        self.users.keys().map(String::as_str)
    }

    /// Assignments in canonical (user, url) order.
    pub fn assignments(&self) -> impl Iterator<Item = TagAssignment> + '_ {
        self.users.iter().flat_map(|(user, rec)| {
            rec.pages.iter().map(move |(url, tags)| TagAssignment {
                user: user.clone(),
                url: url.clone(),
                tags: tags.clone(),
            })
        })
    }

    /// Stacks in canonical (user, stack) order.
    pub fn stacks(&self) -> impl Iterator<Item = Stack> + '_ {
        self.users.iter().flat_map(|(user, rec)| {
            rec.stacks.iter().map(move |(id, urls)| Stack {
                user: user.clone(),
                stack: id.clone(),
                urls: urls.clone(),
            })
        })
    }

    pub fn user(&self, user_id: &str) -> Option<UserView<'_>> {
        self.users.get_key_value(user_id).map(|(id, rec)| Self::view(id, rec))
    }

    /// Every user's view, sorted by user id.
    pub fn users(&self) -> impl Iterator<Item = UserView<'_>> {
        self.users.iter().map(|(id, rec)| Self::view(id, rec))
    }

    /// Views of the users that created at least one stack.
    pub fn stack_owners(&self) -> Vec<UserView<'_>> {
        self.users
            .iter()
            .filter(|(_, rec)| !rec.stacks.is_empty())
            .map(|(id, rec)| Self::view(id, rec))
            .collect()
    }

    /// The same assignments with every stack removed.
    pub fn without_stacks(&self) -> Dataset {
        let users = self
            .users
            .iter()
            .map(|(id, rec)| {
                (
                    id.clone(),
                    UserRecord {
                        pages: rec.pages.clone(),
                        ..UserRecord::default()
                    },
                )
            })
            .collect();
        Dataset { users }
    }

    fn view<'a>(id: &'a str, rec: &'a UserRecord) -> UserView<'a> {
        let pages: Vec<Page<'a>> = rec.pages.iter().map(|(url, tags)| Page { url, tags }).collect();
        let position = |url: &str| {
            pages
                .binary_search_by(|p| p.url.cmp(url))
                .expect("stack urls are checked against pages at build time")
        };
        let stacks = rec
            .stacks
            .iter()
            .map(|(sid, urls)| StackView {
                id: sid,
                pages: urls.iter().map(|u| position(u)).collect(),
            })
            .collect();
        UserView {
            user_id: id,
            pages,
            stacks,
        }
    }
}

/// A statistic whose denominator is empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UndefinedStatistic(pub &'static str);

impl fmt::Display for UndefinedStatistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} is undefined for this dataset", self.0)
    }
}

impl core::error::Error for UndefinedStatistic {}

/// Share of (user, url) pairs that belong to some stack.
pub fn stacked_fraction(d: &Dataset) -> Result<f64, UndefinedStatistic> {
    let total = d.n_assignments();
    if total == 0 {
        return Err(UndefinedStatistic("stacked_fraction"));
    }
    let stacked: usize = d.users.values().map(|u| u.stacked.len()).sum();
    Ok(stacked as f64 / total as f64)
}

/// How per-user overlap ratios are combined in [`tag_overlap_ratio`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum OverlapAveraging {
    /// Unweighted mean of the per-user ratios.
    #[default]
    PerUser,
    /// Pools (user, tag) pairs: Σ|T_in ∩ T_out| / Σ|T_in|.
    Pooled,
}

/// Share of stack vocabulary that the same user also uses outside stacks.
///
/// Only users with at least one stacked and one unstacked page count.
/// A qualifying user whose stacked pages are all untagged contributes a
/// ratio of 0.
pub fn tag_overlap_ratio(d: &Dataset, mode: OverlapAveraging) -> Result<f64, UndefinedStatistic> {
    let mut ratio_sum = 0.0;
    let mut users = 0usize;
    let mut shared_total = 0usize;
    let mut inside_total = 0usize;
    for rec in d.users.values() {
        let n_stacked = rec.stacked.len();
        if n_stacked == 0 || n_stacked == rec.pages.len() {
            continue;
        }
        let mut inside = BTreeSet::new();
        let mut outside = BTreeSet::new();
        for (url, tags) in &rec.pages {
            let dst = if rec.stacked.contains_key(url) {
                &mut inside
            } else {
                &mut outside
            };
            dst.extend(tags.iter().map(String::as_str));
        }
        let shared = inside.intersection(&outside).count();
        users += 1;
        shared_total += shared;
        inside_total += inside.len();
        if !inside.is_empty() {
            ratio_sum += shared as f64 / inside.len() as f64;
        }
    }
    if users == 0 {
        return Err(UndefinedStatistic("tag_overlap_ratio"));
    }
    Ok(match mode {
        OverlapAveraging::PerUser => ratio_sum / users as f64,
        OverlapAveraging::Pooled if inside_total == 0 => 0.0,
        OverlapAveraging::Pooled => shared_total as f64 / inside_total as f64,
    })
}

/// Share of stacks whose member pages all carry at least one common tag.
pub fn common_tag_stack_fraction(d: &Dataset) -> Result<f64, UndefinedStatistic> {
    let mut stacks = 0usize;
    let mut with_common = 0usize;
    for rec in d.users.values() {
        for urls in rec.stacks.values() {
            stacks += 1;
            if has_common_tag(urls.iter().map(|u| &rec.pages[u])) {
                with_common += 1;
            }
        }
    }
    if stacks == 0 {
        return Err(UndefinedStatistic("common_tag_stack_fraction"));
    }
    Ok(with_common as f64 / stacks as f64)
}

pub(crate) fn has_common_tag<'a, I>(mut tag_sets: I) -> bool
where
    I: Iterator<Item = &'a BTreeSet<String>>,
{
    let Some(first) = tag_sets.next() else {
        return false;
    };
    let mut common: BTreeSet<&str> = first.iter().map(String::as_str).collect();
    for tags in tag_sets {
        common.retain(|t| tags.contains(*t));
        if common.is_empty() {
            return false;
        }
    }
    !common.is_empty()
}

/// The seven-page, two-stack example user: `url1..url3` form one stack,
/// `url4..url5` another and `url6`, `url7` are unstacked.
///
/// Each stack's pages share a tag that appears nowhere else ("unix",
/// "valentine"), the two unstacked pages share "politics", and the fixture
/// uses twelve distinct tags.
pub fn example_fixture() -> Dataset {
    let tags: [(&str, &[&str]); 7] = [
        ("url1", &["unix", "jokes", "humor"]),
        ("url2", &["unix", "programming", "jokes"]),
        ("url3", &["unix", "shell", "programming"]),
        ("url4", &["valentine", "gifts"]),
        ("url5", &["valentine", "recipes", "romance"]),
        ("url6", &["news", "politics"]),
        ("url7", &["politics", "elections"]),
    ];
    let assignments = tags.iter().map(|(url, t)| TagAssignment::new("user1", *url, t.iter()));
    let stacks = [
        Stack::new("user1", "stack1", ["url1", "url2", "url3"]),
        Stack::new("user1", "stack2", ["url4", "url5"]),
    ];
    Dataset::from_records(assignments, stacks).expect("fixture is consistent")
}

impl fmt::Display for OverlapAveraging {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::PerUser => "per-user",
            Self::Pooled => "pooled",
        })
    }
}

impl core::str::FromStr for OverlapAveraging {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "per-user" => Ok(Self::PerUser),
            "pooled" => Ok(Self::Pooled),
            other => Err(alloc::format!("unknown overlap averaging {other:?}")),
        }
    }
}
