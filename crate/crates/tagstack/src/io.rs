//! JSON Lines corpus files.
//!
//! Assignments: `{"user": .., "url": .., "tags": [..]}`; stacks:
//! `{"user": .., "stack": .., "urls": [..]}`; topics sidecar written by
//! `synth`: `{"user": .., "topic": .., "urls": [..]}`. Blank lines are
//! skipped. Line numbers in errors are 1-based.

// an error is returned at most once per load; its size does not matter
#![allow(clippy::result_large_err)]

use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tagstack_core::corpus::{CorpusError, Dataset, DatasetBuilder, Stack, TagAssignment};
use tagstack_core::synth::TopicMap;

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}:{line}: {source}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        source: serde_json::Error,
    },
    #[error("{}:{line}: {source}", path.display())]
    Integrity {
        path: PathBuf,
        line: usize,
        source: CorpusError,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AssignmentLine {
    user: String,
    url: String,
    tags: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StackLine {
    user: String,
    stack: String,
    urls: Vec<String>,
}

#[derive(Debug, Serialize)]
struct TopicLine<'a> {
    user: &'a str,
    topic: &'a str,
    urls: &'a [String],
}

fn for_each_line<T, F>(path: &Path, mut f: F) -> Result<(), InputError>
where
    T: for<'de> Deserialize<'de>,
    F: FnMut(usize, T) -> Result<(), CorpusError>,
{
    let io_err = |source| InputError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = fs::File::open(path).map_err(io_err)?;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let n = i + 1;
        let rec: T = serde_json::from_str(&line).map_err(|source| InputError::Parse {
            path: path.to_path_buf(),
            line: n,
            source,
        })?;
        f(n, rec).map_err(|source| InputError::Integrity {
            path: path.to_path_buf(),
            line: n,
            source,
        })?;
    }
    Ok(())
}

/// Reads both files and checks referential integrity. Tags are normalized.
pub fn load_dataset(assignments: &Path, stacks: &Path) -> Result<Dataset, InputError> {
    let mut b = DatasetBuilder::new();
    for_each_line(assignments, |_, a: AssignmentLine| {
        b.add_assignment(TagAssignment::new(a.user, a.url, a.tags))
    })?;
    for_each_line(stacks, |_, s: StackLine| {
        b.add_stack(Stack::new(s.user, s.stack, s.urls))
    })?;
    Ok(b.build())
}

fn json_lines<T: Serialize>(records: impl Iterator<Item = T>) -> Vec<u8> {
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, &r).expect("records serialize");
        out.push(b'\n');
    }
    out
}

pub fn assignments_jsonl(d: &Dataset) -> Vec<u8> {
    json_lines(d.assignments().map(|a| AssignmentLine {
        user: a.user,
        url: a.url,
        tags: a.tags.into_iter().collect(),
    }))
}

pub fn stacks_jsonl(d: &Dataset) -> Vec<u8> {
    json_lines(d.stacks().map(|s| StackLine {
        user: s.user,
        stack: s.stack,
        urls: s.urls.into_iter().collect(),
    }))
}

pub fn topics_jsonl(topics: &TopicMap) -> Vec<u8> {
    json_lines(topics.iter().flat_map(|(user, by_topic)| {
        by_topic
            .iter()
            .map(move |(topic, urls)| TopicLine { user, topic, urls })
    }))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    f.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use tagstack_core::corpus::example_fixture;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let d = example_fixture();
        let a = dir.path().join("a.jsonl");
        let s = dir.path().join("s.jsonl");
        write_file(&a, &assignments_jsonl(&d)).unwrap();
        write_file(&s, &stacks_jsonl(&d)).unwrap();
        let back = load_dataset(&a, &s).unwrap();
        assert_eq!(back, d);
        assert_eq!(back.n_assignments(), 7);
        assert_eq!(back.n_stacks(), 2);
    }

    #[test]
    fn normalizes_tags() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(
            dir.path(),
            "a",
            "{\"user\":\"u\",\"url\":\"x\",\"tags\":[\" Unix\",\"unix\",\"\"]}\n",
        );
        let s = write(dir.path(), "s", "");
        let d = load_dataset(&a, &s).unwrap();
        let tags: Vec<String> = d.assignments().next().unwrap().tags.into_iter().collect();
        assert_eq!(tags, ["unix"]);
    }

    #[test]
    fn empty_files() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a", "");
        let s = write(dir.path(), "s", "\n");
        let d = load_dataset(&a, &s).unwrap();
        assert_eq!(d.n_users(), 0);
        assert_eq!(d.n_stacks(), 0);
    }

    #[test]
    fn reports_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(
            dir.path(),
            "a",
            "{\"user\":\"u\",\"url\":\"x\",\"tags\":[]}\n\n{\"user\":\"u\",\"url\":\"y\"\n",
        );
        let s = write(dir.path(), "s", "");
        let e = load_dataset(&a, &s).unwrap_err();
        assert!(matches!(e, InputError::Parse { line: 3, .. }), "{e}");
    }

    #[test]
    fn integrity_errors() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(
            dir.path(),
            "a",
            "{\"user\":\"u\",\"url\":\"x\",\"tags\":[\"a\"]}\n{\"user\":\"u\",\"url\":\"y\",\"tags\":[\"a\"]}\n",
        );
        let unknown = write(dir.path(), "s1", "{\"user\":\"u\",\"stack\":\"s\",\"urls\":[\"z\"]}\n");
        assert!(matches!(
            load_dataset(&a, &unknown),
            Err(InputError::Integrity {
                line: 1,
                source: CorpusError::UnknownPage { .. },
                ..
            })
        ));
        let overlap = write(
            dir.path(),
            "s2",
            "{\"user\":\"u\",\"stack\":\"s\",\"urls\":[\"x\"]}\n{\"user\":\"u\",\"stack\":\"t\",\"urls\":[\"x\",\"y\"]}\n",
        );
        assert!(matches!(
            load_dataset(&a, &overlap),
            Err(InputError::Integrity {
                line: 2,
                source: CorpusError::OverlappingStacks { .. },
                ..
            })
        ));
        let dup = write(
            dir.path(),
            "a2",
            "{\"user\":\"u\",\"url\":\"x\",\"tags\":[]}\n{\"user\":\"u\",\"url\":\"x\",\"tags\":[\"b\"]}\n",
        );
        assert!(matches!(
            load_dataset(&dup, &unknown),
            Err(InputError::Integrity {
                line: 2,
                source: CorpusError::DuplicateAssignment { .. },
                ..
            })
        ));
    }

    #[test]
    fn missing_file() {
        let e = load_dataset(Path::new("/nonexistent/a.jsonl"), Path::new("/nonexistent/s.jsonl")).unwrap_err();
        assert!(matches!(e, InputError::Io { .. }));
    }
}
