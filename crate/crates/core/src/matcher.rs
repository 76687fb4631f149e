//! Cosine scoring and exhaustive ranking against a reference database.

use std::cmp::Ordering;

use crate::aggregate::GlobalDescriptor;
use crate::database::DescriptorDatabase;
use crate::error::{Error, Result};

/// Cosine similarity of two equal-length vectors; 0 if either is all zeros.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0)
}

pub fn similarity(a: &GlobalDescriptor, b: &GlobalDescriptor) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(cosine(&a.values, &b.values))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub query_id: u32,
    /// `(reference frame_id, score)`, best first.
    pub ranked: Vec<(u32, f64)>,
    /// Best score reached the threshold.
    pub accepted: bool,
}

impl MatchResult {
    pub fn best(&self) -> (u32, f64) {
        self.ranked[0]
    }
}

/// Score descending, then frame id ascending.
pub fn rank_order(a: &(u32, f64), b: &(u32, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

pub fn match_query(q: &GlobalDescriptor, db: &DescriptorDatabase, threshold: f64) -> Result<MatchResult> {
    if db.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    if q.len() != db.descriptor_len() {
        return Err(Error::LengthMismatch {
            left: q.len(),
            right: db.descriptor_len(),
        });
    }
    let mut ranked: Vec<(u32, f64)> = db
        .descriptors()
        .iter()
        .map(|r| (r.frame_id, cosine(&q.values, &r.values)))
        .collect();
    ranked.sort_by(rank_order);
    let accepted = ranked[0].1 >= threshold;
    Ok(MatchResult {
        query_id: q.frame_id,
        ranked,
        accepted,
    })
}

/// Matches every query frame. Refuses databases built with different parameters.
pub fn match_all(
    queries: &DescriptorDatabase,
    references: &DescriptorDatabase,
    threshold: f64,
) -> Result<Vec<MatchResult>> {
    queries.check_compatible(references)?;
    queries
        .descriptors()
        .iter()
        .map(|q| match_query(q, references, threshold))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit(i: usize, n: usize, id: u32) -> GlobalDescriptor {
        let mut values = vec![0.0; n];
        values[i] = 1.0;
        GlobalDescriptor {
            frame_id: id,
            values,
            empty: false,
            smoothed: false,
        }
    }

    fn db_of(ds: Vec<GlobalDescriptor>) -> DescriptorDatabase {
        let n = ds[0].len() as u32;
        let mut db = DescriptorDatabase::new(1, n, 1, 0, 7);
        for d in ds {
            db.push(d).unwrap();
        }
        db
    }

    #[test]
    fn basic_scores() {
        let a = [0.6, 0.8];
        assert_eq!(cosine(&a, &a), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
        assert!((cosine(&a, &[1.2, 1.6]) - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&a, &[0.0, 0.0]), 0.0);
        assert_eq!(cosine(&[0.0, 0.0], &[0.0, 0.0]), 0.0);
    }

    #[test]
    fn length_mismatch() {
        assert!(similarity(&unit(0, 3, 0), &unit(0, 4, 0)).is_err());
    }

    #[test]
    fn orthogonal_database() {
        let db = db_of((0..10).map(|i| unit(i, 10, i as u32)).collect());
        let r = match_query(&unit(7, 10, 99), &db, 0.5).unwrap();
        assert_eq!(r.best(), (7, 1.0));
        assert!(r.accepted);
        assert!(r.ranked[1..].iter().all(|&(_, s)| s == 0.0));
        let ids: Vec<u32> = r.ranked[1..].iter().map(|p| p.0).collect();
        assert_eq!(ids, vec![0, 1, 2, 3, 4, 5, 6, 8, 9]);
    }

    #[test]
    fn ties_prefer_lower_frame_id() {
        let db = db_of(vec![unit(0, 2, 5), unit(0, 2, 3)]);
        let r = match_query(&unit(0, 2, 0), &db, 0.0).unwrap();
        assert_eq!(r.ranked, vec![(3, 1.0), (5, 1.0)]);
    }

    #[test]
    fn threshold_above_one_accepts_nothing() {
        let db = db_of(vec![unit(0, 2, 0)]);
        assert!(!match_query(&unit(0, 2, 0), &db, 1.1).unwrap().accepted);
    }

    #[test]
    fn empty_database_is_an_error() {
        let db = DescriptorDatabase::new(1, 2, 1, 0, 7);
        assert!(matches!(match_query(&unit(0, 2, 0), &db, 0.0), Err(Error::EmptyDatabase)));
    }

    #[test]
    fn fingerprint_mismatch_is_refused() {
        let q = db_of(vec![unit(0, 2, 0)]);
        let mut r = db_of(vec![unit(0, 2, 0)]);
        r.fingerprint = 8;
        assert!(matches!(match_all(&q, &r, 0.0), Err(Error::FingerprintMismatch { .. })));
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(
            a in proptest::collection::vec(-10.0f64..10.0, 16),
            b in proptest::collection::vec(-10.0f64..10.0, 16),
        ) {
            let ab = cosine(&a, &b);
            prop_assert!((ab - cosine(&b, &a)).abs() <= 1e-12);
            prop_assert!(ab.abs() <= 1.0 + 1e-9);
            prop_assert!(ab.is_finite());
        }

        #[test]
        fn ranking_is_sorted_and_stable(
            refs in proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, 4), 1..20),
            q in proptest::collection::vec(-1.0f64..1.0, 4),
        ) {
            let ds: Vec<_> = refs.into_iter().enumerate().map(|(i, v)| GlobalDescriptor {
                frame_id: i as u32, values: v, empty: false, smoothed: false,
            }).collect();
            let db = db_of(ds);
            let q = GlobalDescriptor { frame_id: 0, values: q, empty: false, smoothed: false };
            let a = match_query(&q, &db, 0.5).unwrap();
            let b = match_query(&q, &db, 0.5).unwrap();
            prop_assert_eq!(&a, &b);
            for w in a.ranked.windows(2) {
                prop_assert!(w[0].1 > w[1].1 || (w[0].1 == w[1].1 && w[0].0 < w[1].0));
            }
        }
    }
}
