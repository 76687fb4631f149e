use std::path::PathBuf;

use anyhow::Result;
use ssrvpr::render::save_overlay;
use ssrvpr::{load_segmentation_map, Encoder};

use crate::common::PipelineArgs;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Label PNG to inspect.
    #[arg(long)]
    input: PathBuf,

    /// RGB overlay PNG to write.
    #[arg(long)]
    output: PathBuf,

    #[command(flatten)]
    pipeline: PipelineArgs,
}

pub fn run(args: Args) -> Result<()> {
    let encoder = Encoder::new(args.pipeline.load()?)?;
    let map = load_segmentation_map(&args.input)?;
    let stack = encoder.layers(&map)?;
    let features = encoder.features(&map)?;
    for f in &features.layers {
        log::info!(
            "layer {}: {} skeleton pixels, {} keypoints",
            f.layer_index,
            f.skeleton.len(),
            f.keypoints.len()
        );
    }
    crate::create_parent(&args.output)?;
    save_overlay(&stack, &features, &args.output)?;
    Ok(())
}
