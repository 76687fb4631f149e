use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseRecord {
    pub frame_id: u32,
    pub position: [f64; 3],
}

impl PoseRecord {
    pub fn distance(&self, other: &PoseRecord) -> f64 {
        let [a, b, c] = self.position;
        let [x, y, z] = other.position;
        ((a - x).powi(2) + (b - y).powi(2) + (c - z).powi(2)).sqrt()
    }
}

/// Correct reference frames per query. Queries without an entry have none.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundTruth {
    matches: BTreeMap<u32, BTreeSet<u32>>,
}

impl GroundTruth {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every query `i` matches reference `i` only.
    pub fn identity(ids: impl IntoIterator<Item = u32>) -> Self {
        let mut gt = Self::new();
        for id in ids {
            gt.insert(id, [id]);
        }
        gt
    }

    pub fn insert(&mut self, query: u32, refs: impl IntoIterator<Item = u32>) {
        self.matches.entry(query).or_default().extend(refs);
    }

    pub fn get(&self, query: u32) -> Option<&BTreeSet<u32>> {
        self.matches.get(&query).filter(|s| !s.is_empty())
    }

    pub fn is_match(&self, query: u32, reference: u32) -> bool {
        self.get(query).is_some_and(|s| s.contains(&reference))
    }

    pub fn has_match(&self, query: u32) -> bool {
        self.get(query).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &BTreeSet<u32>)> {
        self.matches.iter().map(|(&q, s)| (q, s))
    }

    /// `query_id: ref ref ...` lines, one per query with a non-empty set.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (q, refs) in self.iter().filter(|(_, s)| !s.is_empty()) {
            let ids: Vec<String> = refs.iter().map(u32::to_string).collect();
            out.push_str(&format!("{q}: {}\n", ids.join(" ")));
        }
        out
    }
}

/// Reference `r` is correct for query `q` iff their distance is strictly
/// below `radius`.
pub fn build_ground_truth(queries: &[PoseRecord], references: &[PoseRecord], radius: f64) -> GroundTruth {
    let mut gt = GroundTruth::new();
    for q in queries {
        gt.insert(
            q.frame_id,
            references.iter().filter(|r| q.distance(r) < radius).map(|r| r.frame_id),
        );
    }
    gt
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_id(line: usize, s: &str) -> Result<u32> {
    s.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid frame id '{s}'"),
    })
}

/// Parses `frame_id x y z` lines. Trailing fields (orientation) are ignored.
pub fn parse_poses(text: &str) -> Result<Vec<PoseRecord>> {
    content_lines(text)
        .map(|(line, l)| {
            let fields: Vec<&str> = l.split(|c: char| c.is_whitespace() || c == ',').filter(|f| !f.is_empty()).collect();
            if fields.len() < 4 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 'frame_id x y z', got '{l}'"),
                });
            }
            let mut position = [0.0; 3];
            for (p, f) in position.iter_mut().zip(&fields[1..4]) {
                *p = f.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| Error::Parse {
                    line,
                    message: format!("invalid coordinate '{f}'"),
                })?;
            }
            Ok(PoseRecord {
                frame_id: parse_id(line, fields[0])?,
                position,
            })
        })
        .collect()
}

/// Parses `query_id: ref_id ref_id ...` lines (ids separated by spaces or commas).
pub fn parse_ground_truth(text: &str) -> Result<GroundTruth> {
    let mut gt = GroundTruth::new();
    for (line, l) in content_lines(text) {
        let (q, rest) = l.split_once(':').ok_or_else(|| Error::Parse {
            line,
            message: "expected 'query_id: ref_ids'".into(),
        })?;
        let refs = rest
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|f| !f.is_empty())
            .map(|f| parse_id(line, f))
            .collect::<Result<Vec<_>>>()?;
        gt.insert(parse_id(line, q.trim())?, refs);
    }
    Ok(gt)
}

pub fn load_poses(path: impl AsRef<Path>) -> Result<Vec<PoseRecord>> {
    let path = path.as_ref();
    parse_poses(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

pub fn load_ground_truth(path: impl AsRef<Path>) -> Result<GroundTruth> {
    let path = path.as_ref();
    parse_ground_truth(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}
