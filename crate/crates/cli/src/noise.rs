use std::path::PathBuf;

use anyhow::{bail, Result};
use ssrvpr::eval::{noise_experiment_on_features, NoiseParams};
use ssrvpr::Encoder;

use crate::common::{load_frames, parse_list, PipelineArgs};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Directory of label PNGs; every frame must show a distinct place.
    #[arg(long)]
    input: PathBuf,

    /// Comma-separated jitter magnitudes in pixels.
    #[arg(long, default_value = "25,50,75,100,125,150")]
    delta: String,

    #[arg(long, default_value_t = 20)]
    runs: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// CSV with one row per delta: delta,mean_recall_at_1,runs.
    #[arg(long)]
    output: PathBuf,

    #[command(flatten)]
    pipeline: PipelineArgs,
}

pub fn run(args: Args) -> Result<()> {
    let deltas: Vec<u32> = parse_list(&args.delta)?;
    if deltas.is_empty() {
        bail!("--delta needs at least one value");
    }
    if args.runs == 0 {
        bail!("--runs must be at least 1");
    }
    let encoder = Encoder::new(args.pipeline.load()?)?;
    let frames = load_frames(&args.input, 0)?;
    let features = frames.iter().map(|m| encoder.features(m)).collect::<Result<Vec<_>, _>>()?;

    crate::create_parent(&args.output)?;
    let mut w = csv::Writer::from_path(&args.output)?;
    w.write_record(["delta", "mean_recall_at_1", "runs"])?;
    for delta in deltas {
        let params = NoiseParams {
            delta,
            runs: args.runs,
            seed: args.seed,
        };
        let report = noise_experiment_on_features(&encoder, &features, params)?;
        println!("delta ±{delta:<4} mean Recall@1 {:.3}", report.mean);
        w.write_record([delta.to_string(), format!("{:.6}", report.mean), args.runs.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
