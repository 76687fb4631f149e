use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ssrvpr::eval::{build_ground_truth, load_ground_truth, load_poses, GroundTruth, Report};
use ssrvpr::MatchResult;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Results CSV written by `match`.
    #[arg(long)]
    results: PathBuf,

    /// Ground truth as `query_id: ref_id ...` lines.
    #[arg(long, conflicts_with_all = ["query_poses", "reference_poses"])]
    gt: Option<PathBuf>,

    /// Query poses (`frame_id x y z` per line).
    #[arg(long, requires = "reference_poses")]
    query_poses: Option<PathBuf>,

    /// Reference poses (`frame_id x y z` per line).
    #[arg(long, requires = "query_poses")]
    reference_poses: Option<PathBuf>,

    /// References closer than this many metres count as correct.
    #[arg(long, default_value_t = 5.0)]
    radius: f64,

    /// Directory for metrics.csv and pr_curve.csv.
    #[arg(long)]
    output: PathBuf,
}

pub fn read_results(path: &Path) -> Result<Vec<MatchResult>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut rows: BTreeMap<u32, Vec<(u32, u32, f64, bool)>> = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |k: usize| rec.get(k).with_context(|| format!("row {}: missing column {k}", i + 2));
        let q: u32 = field(0)?.trim().parse().with_context(|| format!("row {}: bad query_id", i + 2))?;
        let rank: u32 = field(1)?.trim().parse().with_context(|| format!("row {}: bad rank", i + 2))?;
        let id: u32 = field(2)?.trim().parse().with_context(|| format!("row {}: bad ref_id", i + 2))?;
        let score: f64 = field(3)?.trim().parse().with_context(|| format!("row {}: bad score", i + 2))?;
        let accepted = field(4)?.trim() == "1";
        rows.entry(q).or_default().push((rank, id, score, accepted));
    }
    if rows.is_empty() {
        bail!("{} holds no results", path.display());
    }
    Ok(rows
        .into_iter()
        .map(|(query_id, mut r)| {
            r.sort_by_key(|x| x.0);
            MatchResult {
                query_id,
                accepted: r[0].3,
                ranked: r.into_iter().map(|(_, id, s, _)| (id, s)).collect(),
            }
        })
        .collect())
}

fn ground_truth(args: &Args) -> Result<GroundTruth> {
    match (&args.gt, &args.query_poses, &args.reference_poses) {
        (Some(gt), _, _) => Ok(load_ground_truth(gt)?),
        (None, Some(q), Some(r)) => Ok(build_ground_truth(&load_poses(q)?, &load_poses(r)?, args.radius)),
        _ => bail!("give either --gt or both --query-poses and --reference-poses"),
    }
}

pub fn run(args: Args) -> Result<()> {
    let results = read_results(&args.results)?;
    let gt = ground_truth(&args)?;
    let report = Report::compute(&results, &gt);
    std::fs::create_dir_all(&args.output)?;

    let mut w = csv::Writer::from_path(args.output.join("metrics.csv"))?;
    w.write_record(["auc", "recall_at_100_precision", "recall_at_1"])?;
    w.write_record([
        format!("{:.6}", report.auc),
        format!("{:.3}", report.recall_at_100_precision),
        format!("{:.3}", report.recall_at_1),
    ])?;
    w.flush()?;

    let mut w = csv::Writer::from_path(args.output.join("pr_curve.csv"))?;
    w.write_record(["threshold", "precision", "recall", "tp", "fp", "fn", "tn"])?;
    for p in &report.curve {
        w.write_record([
            format!("{:.9}", p.threshold),
            format!("{:.6}", p.precision),
            format!("{:.6}", p.recall),
            p.tp.to_string(),
            p.fp.to_string(),
            p.fn_.to_string(),
            p.tn.to_string(),
        ])?;
    }
    w.flush()?;
    println!(
        "AUC {:.4}  Recall@100%P {:.1}%  Recall@1 {:.1}%",
        report.auc, report.recall_at_100_precision, report.recall_at_1
    );
    Ok(())
}
