//! Planted-topic bookmark corpora.
//!
//! Every user owns a few topics, each with its own pool of tags. A page
//! belongs to one topic and draws its tags from that pool, each tag
//! independently swapped for a tag from a global noise pool with
//! probability `noise` (`stack_noise` for stacked topics, which users
//! curate more carefully). A small number of each user's topics are stacked:
//! most of such a topic's pages go into one stack, the remainder stays
//! unstacked alongside the pages of the user's other topics.
//!
//! Stack sizes are dithered across users so the corpus-wide stacked
//! fraction tracks its target, and exactly `round(target · stacks)` stacks
//! receive a designated tag on every member page while every other stack
//! is edited until its pages share no tag.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{has_common_tag, Dataset, Stack, TagAssignment};
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_users: usize,
    pub pages_per_user: RangeInclusive<usize>,
    pub topics_per_user: RangeInclusive<usize>,
    /// Topics per user that yield a stack.
    pub stacks_per_user: RangeInclusive<usize>,
    pub tags_per_topic: usize,
    pub tags_per_page: usize,
    /// Probability that a drawn tag is replaced by a global noise tag.
    pub noise: f64,
    /// Noise probability for pages of stacked topics.
    pub stack_noise: f64,
    pub global_noise_tags: usize,
    /// Share of a stacked topic's pages that belong to its stack.
    pub stack_share: f64,
    pub stacked_fraction_target: f64,
    pub common_tag_fraction_target: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_users: 200,
            pages_per_user: 20..=40,
            topics_per_user: 3..=5,
            stacks_per_user: 1..=1,
            tags_per_topic: 4,
            tags_per_page: 3,
            noise: 0.5,
            stack_noise: 0.1,
            global_noise_tags: 50,
            stack_share: 0.9,
            stacked_fraction_target: 0.248,
            common_tag_fraction_target: 0.225,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SynthError {
    InvalidConfig(String),
    /// More single-page stacks than the common-tag target allows.
    InfeasibleCommonTags {
        forced: usize,
        target: usize,
    },
}

impl fmt::Display for SynthError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidConfig(why) => write!(f, "invalid synthetic corpus config: {why}"),
            Self::InfeasibleCommonTags { forced, target } => write!(
                f,
                "{forced} single-page stacks share a tag trivially, but only {target} common-tag stacks were requested"
            ),
        }
    }
}

impl core::error::Error for SynthError {}

fn bad(why: &str) -> SynthError {
    SynthError::InvalidConfig(String::from(why))
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let nonempty = |r: &RangeInclusive<usize>| r.start() <= r.end() && *r.start() >= 1;
        if self.n_users == 0 {
            return Err(bad("n_users must be positive"));
        }
        if !nonempty(&self.pages_per_user) {
            return Err(bad("pages_per_user must be a non-empty range of positive counts"));
        }
        if !nonempty(&self.topics_per_user) {
            return Err(bad("topics_per_user must be a non-empty range of positive counts"));
        }
        if !nonempty(&self.stacks_per_user) {
            return Err(bad("stacks_per_user must be a non-empty range of positive counts"));
        }
        if self.stacks_per_user.start() > self.topics_per_user.start() {
            return Err(bad("stacks_per_user cannot exceed topics_per_user"));
        }
        if self.tags_per_page == 0 || self.tags_per_topic == 0 || self.global_noise_tags == 0 {
            return Err(bad("tag pool sizes must be positive"));
        }
        if self.tags_per_page > self.tags_per_topic {
            return Err(bad("tags_per_page cannot exceed tags_per_topic"));
        }
        if !(0.0..=1.0).contains(&self.noise) || !(0.0..=1.0).contains(&self.stack_noise) {
            return Err(bad("noise must lie in [0, 1]"));
        }
        if !(self.stack_share > 0.0 && self.stack_share <= 1.0) {
            return Err(bad("stack_share must lie in (0, 1]"));
        }
        if !(self.stacked_fraction_target > 0.0 && self.stacked_fraction_target <= 1.0) {
            return Err(bad("stacked_fraction_target must lie in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.common_tag_fraction_target) {
            return Err(bad("common_tag_fraction_target must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Planted topic of every page, keyed by user then topic id.
pub type TopicMap = BTreeMap<String, BTreeMap<String, Vec<String>>>;

struct UserDraft {
    user: String,
    // url -> tags, in page order
    pages: Vec<(String, BTreeSet<String>)>,
    topic_of: Vec<usize>,
    stacks: Vec<StackDraft>,
}

struct StackDraft {
    topic: usize,
    pages: Vec<usize>,
}

fn topic_tag(topic: usize, i: usize) -> String {
    format!("t{topic}-{i}")
}

fn noise_tag(i: usize) -> String {
    format!("noise-{i}")
}

/// Generates a corpus; a pure function of `cfg`.
pub fn generate(cfg: &SynthConfig) -> Result<(Dataset, TopicMap), SynthError> {
    cfg.validate()?;
    let width = digits(cfg.n_users);
    let mut carry = 0.0f64;
    let mut drafts = Vec::with_capacity(cfg.n_users);
    for u in 0..cfg.n_users {
        let user = format!("user{:0width$}", u + 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(cfg.seed, &[u as u64]));
        drafts.push(draft_user(cfg, user, &mut rng, &mut carry));
    }
    plant_common_tags(cfg, &mut drafts)?;
    Ok(assemble(drafts))
}

fn digits(n: usize) -> usize {
    let mut d = 1;
    let mut x = n;
    while x >= 10 {
        x /= 10;
        d += 1;
    }
    d.max(3)
}

fn draft_user(cfg: &SynthConfig, user: String, rng: &mut ChaCha8Rng, carry: &mut f64) -> UserDraft {
    let n = rng.random_range(cfg.pages_per_user.clone());
    let topics = rng.random_range(cfg.topics_per_user.clone()).min(n);
    let stacks_wanted = rng.random_range(cfg.stacks_per_user.clone()).min(topics);

    // stacked page count, dithered so the corpus-wide share tracks the target
    let exact = cfg.stacked_fraction_target * n as f64 + *carry;
    let stacked = (libm::round(exact) as usize).clamp(1, n);
    *carry = exact - stacked as f64;
    let n_stacks = stacks_wanted.min(stacked);

    let stack_sizes: Vec<usize> = (0..n_stacks)
        .map(|i| stacked / n_stacks + usize::from(i < stacked % n_stacks))
        .collect();
    let mut topic_sizes = vec![0usize; topics];
    topic_sizes[..n_stacks].copy_from_slice(&stack_sizes);
    let mut free = n - stacked;
    // unstacked remainder of each stacked topic
    for (t, &s) in stack_sizes.iter().enumerate() {
        let extra = libm::round(s as f64 * (1.0 - cfg.stack_share) / cfg.stack_share) as usize;
        let extra = extra.min(free);
        topic_sizes[t] += extra;
        free -= extra;
    }
    // the rest fill the unstacked topics round-robin (or the stacked ones
    // if every topic is stacked)
    let open: Vec<usize> = if topics > n_stacks {
        (n_stacks..topics).collect()
    } else {
        (0..topics).collect()
    };
    for i in 0..free {
        topic_sizes[open[i % open.len()]] += 1;
    }

    // page order is shuffled so urls carry no topic information
    let mut topic_of: Vec<usize> = topic_sizes
        .iter()
        .enumerate()
        .flat_map(|(t, &s)| core::iter::repeat_n(t, s))
        .collect();
    topic_of.shuffle(rng);

    let pages: Vec<(String, BTreeSet<String>)> = topic_of
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            (format!("page{:03}", i + 1), {
                let noise = if t < n_stacks { cfg.stack_noise } else { cfg.noise };
                draw_tags(cfg, t, noise, rng)
            })
        })
        .collect();

    let stacks = stack_sizes
        .iter()
        .enumerate()
        .map(|(t, &s)| {
            let mut members: Vec<usize> = (0..n).filter(|&i| topic_of[i] == t).collect();
            members.shuffle(rng);
            members.truncate(s);
            members.sort_unstable();
            StackDraft {
                topic: t,
                pages: members,
            }
        })
        .collect();

    UserDraft {
        user,
        pages,
        topic_of,
        stacks,
    }
}

fn draw_tags(cfg: &SynthConfig, topic: usize, noise: f64, rng: &mut ChaCha8Rng) -> BTreeSet<String> {
    let mut pool: Vec<usize> = (0..cfg.tags_per_topic).collect();
    let (picked, _) = pool.partial_shuffle(rng, cfg.tags_per_page);
    picked
        .iter()
        .map(|&i| {
            if rng.random_bool(noise) {
                noise_tag(rng.random_range(0..cfg.global_noise_tags))
            } else {
                topic_tag(topic, i)
            }
        })
        .collect()
}

fn plant_common_tags(cfg: &SynthConfig, drafts: &mut [UserDraft]) -> Result<(), SynthError> {
    let refs: Vec<(usize, usize)> = drafts
        .iter()
        .enumerate()
        .flat_map(|(u, d)| (0..d.stacks.len()).map(move |s| (u, s)))
        .collect();
    let target = libm::round(cfg.common_tag_fraction_target * refs.len() as f64) as usize;
    type Refs = Vec<(usize, usize)>;
    let (forced, mut open): (Refs, Refs) = refs
        .into_iter()
        .partition(|&(u, s)| drafts[u].stacks[s].pages.len() < 2);
    if forced.len() > target {
        return Err(SynthError::InfeasibleCommonTags {
            forced: forced.len(),
            target,
        });
    }
    open.shuffle(&mut ChaCha8Rng::seed_from_u64(seed::derive(cfg.seed, &[u64::MAX])));
    let (designated, rest) = open.split_at(target - forced.len());
    for &(u, s) in designated {
        let d = &mut drafts[u];
        let tag = format!("t{}-stack", d.stacks[s].topic);
        for &p in &d.stacks[s].pages {
            d.pages[p].1.insert(tag.clone());
        }
    }
    for &(u, s) in rest {
        break_common_tags(cfg, &mut drafts[u], s);
    }
    Ok(())
}

/// Edits the last member page until the stack's pages share no tag. Each
/// shared tag is swapped for a tag that the page lacks and some other
/// member lacks too, so the swap never creates a new shared tag. With no
/// such tag left the shared one is dropped.
fn break_common_tags(cfg: &SynthConfig, d: &mut UserDraft, s: usize) {
    let members = d.stacks[s].pages.clone();
    let topic = d.stacks[s].topic;
    let last = *members.last().expect("stacks are non-empty");
    loop {
        let common: Option<String> = {
            let sets = members.iter().map(|&p| &d.pages[p].1);
            if !has_common_tag(sets) {
                None
            } else {
                let first = &d.pages[members[0]].1;
                first
                    .iter()
                    .find(|t| members.iter().all(|&p| d.pages[p].1.contains(*t)))
                    .cloned()
            }
        };
        let Some(tag) = common else {
            break;
        };
        let replacement = (0..cfg.tags_per_topic)
            .map(|i| topic_tag(topic, i))
            .chain((0..cfg.global_noise_tags).map(noise_tag))
            .find(|t| {
                *t != tag
                    && !d.pages[last].1.contains(t)
                    && members.iter().any(|&p| p != last && !d.pages[p].1.contains(t))
            });
        let page = &mut d.pages[last].1;
        page.remove(&tag);
        if let Some(r) = replacement {
            page.insert(r);
        }
    }
}

fn assemble(drafts: Vec<UserDraft>) -> (Dataset, TopicMap) {
    let mut b = Dataset::builder();
    let mut topics = TopicMap::new();
    for d in &drafts {
        for (url, tags) in &d.pages {
            b.add_assignment(TagAssignment {
                user: d.user.clone(),
                url: url.clone(),
                tags: tags.clone(),
            })
            .expect("generated urls are unique");
        }
        let by_topic = topics.entry(d.user.clone()).or_default();
        for (i, &t) in d.topic_of.iter().enumerate() {
            by_topic
                .entry(format!("topic{}", t + 1))
                .or_default()
                .push(d.pages[i].0.clone());
        }
    }
    for d in &drafts {
        for st in &d.stacks {
            b.add_stack(Stack {
                user: d.user.clone(),
                stack: format!("stack{}", st.topic + 1),
                urls: st.pages.iter().map(|&p| d.pages[p].0.clone()).collect(),
            })
            .expect("generated stacks are disjoint subsets of the user's pages");
        }
    }
    (b.build(), topics)
}

/// The fixed corpus used by the acceptance checks: default config, seed 42.
pub fn standard_benchmark() -> (Dataset, TopicMap) {
    generate(&SynthConfig::default()).expect("default config is feasible")
}
