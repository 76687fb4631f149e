use std::path::PathBuf;

use anyhow::{Context, Result};
use ssrvpr::{match_all, DescriptorDatabase};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Query database.
    #[arg(long)]
    query: PathBuf,

    /// Reference database.
    #[arg(long)]
    reference: PathBuf,

    /// Minimum score for a match to be accepted.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,

    /// Ranked references kept per query (0 keeps all).
    #[arg(long, default_value_t = 0)]
    top: usize,

    /// Results CSV: query_id,rank,ref_id,score,accepted.
    #[arg(long)]
    output: PathBuf,
}

pub fn run(args: Args) -> Result<()> {
    let q = DescriptorDatabase::load(&args.query)?;
    let r = DescriptorDatabase::load(&args.reference)?;
    let results = match_all(&q, &r, args.threshold)
        .with_context(|| format!("cannot match {} against {}", args.query.display(), args.reference.display()))?;

    crate::create_parent(&args.output)?;
    let mut w = csv::Writer::from_path(&args.output)?;
    w.write_record(["query_id", "rank", "ref_id", "score", "accepted"])?;
    let keep = if args.top == 0 { usize::MAX } else { args.top };
    for res in &results {
        for (rank, &(id, score)) in res.ranked.iter().take(keep).enumerate() {
            w.write_record([
                res.query_id.to_string(),
                (rank + 1).to_string(),
                id.to_string(),
                format!("{score:.9}"),
                u8::from(score >= args.threshold).to_string(),
            ])?;
        }
    }
    w.flush()?;
    let accepted = results.iter().filter(|r| r.accepted).count();
    log::info!("{} queries matched, {accepted} accepted at threshold {}", results.len(), args.threshold);
    Ok(())
}
