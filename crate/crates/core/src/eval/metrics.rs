use crate::matcher::MatchResult;

use super::GroundTruth;

/// One operating point of the single-best-match protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

/// Sweeps the acceptance threshold over every distinct top-1 score, highest
/// first. A query at or above the threshold predicts its top-1 reference
/// (TP if correct, FP otherwise); a query below it counts as FN when it has
/// a true match and TN when it has none.
pub fn pr_curve(results: &[MatchResult], gt: &GroundTruth) -> Vec<PrPoint> {
    // (score, correct, has_match), highest score first.
    let mut top: Vec<(f64, bool, bool)> = results
        .iter()
        .filter(|r| !r.ranked.is_empty())
        .map(|r| {
            let (id, score) = r.best();
            (score, gt.is_match(r.query_id, id), gt.has_match(r.query_id))
        })
        .collect();
    top.sort_by(|a, b| b.0.total_cmp(&a.0));

    let positives = top.iter().filter(|t| t.2).count();
    let negatives = top.len() - positives;
    let (mut tp, mut fp, mut pos_seen, mut neg_seen) = (0, 0, 0, 0);
    let mut points = Vec::new();
    let mut i = 0;
    while i < top.len() {
        let tau = top[i].0;
        while i < top.len() && top[i].0 == tau {
            let (_, correct, has) = top[i];
            if correct {
                tp += 1;
            } else {
                fp += 1;
            }
            if has {
                pos_seen += 1;
            } else {
                neg_seen += 1;
            }
            i += 1;
        }
        let fn_ = positives - pos_seen;
        let tn = negatives - neg_seen;
        points.push(PrPoint {
            threshold: tau,
            precision: if tp + fp == 0 { 1.0 } else { tp as f64 / (tp + fp) as f64 },
            recall: if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 },
            tp,
            fp,
            fn_,
            tn,
        });
    }
    points
}

/// Trapezoidal area under the PR curve. Points are ordered by recall (ties:
/// higher precision first) and the curve starts at recall 0 with the
/// precision of the first point.
pub fn auc(points: &[PrPoint]) -> f64 {
    let mut pr: Vec<(f64, f64)> = points.iter().map(|p| (p.recall, p.precision)).collect();
    if pr.is_empty() {
        return 0.0;
    }
    pr.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    let mut prev = (0.0, pr[0].1);
    let mut area = 0.0;
    for &(r, p) in &pr {
        area += (r - prev.0) * (p + prev.1) / 2.0;
        prev = (r, p);
    }
    area
}

/// Highest recall with no false positives, in percent.
pub fn recall_at_100_precision(points: &[PrPoint]) -> f64 {
    points
        .iter()
        .filter(|p| p.precision == 1.0)
        .map(|p| p.recall)
        .fold(0.0, f64::max)
        * 100.0
}

/// Percentage of queries with a true match that have one among their top `n`.
pub fn recall_at_n(results: &[MatchResult], gt: &GroundTruth, n: usize) -> f64 {
    let mut eligible = 0;
    let mut hits = 0;
    for r in results {
        let Some(truth) = gt.get(r.query_id) else {
            continue;
        };
        eligible += 1;
        if r.ranked.iter().take(n).any(|(id, _)| truth.contains(id)) {
            hits += 1;
        }
    }
    if eligible == 0 {
        0.0
    } else {
        100.0 * hits as f64 / eligible as f64
    }
}

/// The headline numbers of one evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub auc: f64,
    pub recall_at_100_precision: f64,
    pub recall_at_1: f64,
    pub curve: Vec<PrPoint>,
}

impl Report {
    pub fn compute(results: &[MatchResult], gt: &GroundTruth) -> Self {
        let curve = pr_curve(results, gt);
        Self {
            auc: auc(&curve),
            recall_at_100_precision: recall_at_100_precision(&curve),
            recall_at_1: recall_at_n(results, gt, 1),
            curve,
        }
    }
}
