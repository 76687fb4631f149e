use std::path::PathBuf;

use anyhow::Result;
use ssrvpr::timing::time_corpus;
use ssrvpr::Encoder;

use crate::common::{load_frames, PipelineArgs};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Directory of label PNGs.
    #[arg(long)]
    input: PathBuf,

    /// CSV report: stage,max_ms,avg_ms,min_ms. Printed to stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,

    #[command(flatten)]
    pipeline: PipelineArgs,
}

pub fn run(args: Args) -> Result<()> {
    let encoder = Encoder::new(args.pipeline.load()?)?;
    let frames = load_frames(&args.input, 0)?;
    let report = time_corpus(&encoder, &frames)?;

    let mut w: csv::Writer<Box<dyn std::io::Write>> = match &args.output {
        Some(path) => {
            crate::create_parent(path)?;
            csv::Writer::from_writer(Box::new(std::fs::File::create(path)?))
        }
        None => csv::Writer::from_writer(Box::new(std::io::stdout())),
    };
    w.write_record(["stage", "max_ms", "avg_ms", "min_ms"])?;
    for (name, s) in report.rows() {
        w.write_record([
            name.to_string(),
            format!("{:.6}", s.max_ms),
            format!("{:.6}", s.avg_ms),
            format!("{:.6}", s.min_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}
