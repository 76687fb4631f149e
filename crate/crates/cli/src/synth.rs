use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::ValueEnum;
use rayon::prelude::*;
use ssrvpr::synth::{distinct_scenes, street_sequence, with_label_noise, SequenceParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// One street driven frame by frame, with poses.
    Sequence,
    /// Unrelated scenes, one per frame.
    Scenes,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Output directory for frame PNGs (and poses.txt in sequence mode).
    #[arg(long)]
    output: PathBuf,

    #[arg(long, value_enum, default_value_t = Mode::Sequence)]
    mode: Mode,

    #[arg(long, default_value_t = 30)]
    frames: usize,

    #[arg(long, default_value_t = 256)]
    width: usize,

    #[arg(long, default_value_t = 192)]
    height: usize,

    /// Camera advance per frame in pixels.
    #[arg(long, default_value_t = 12)]
    shift: usize,

    /// Camera advance per frame in metres.
    #[arg(long, default_value_t = 1.5)]
    step: f64,

    /// Fraction of pixels replaced by random labels.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,

    #[arg(long, default_value_t = 7)]
    seed: u64,
}

pub fn run(args: Args) -> Result<()> {
    std::fs::create_dir_all(&args.output)?;
    let maps = match args.mode {
        Mode::Sequence => {
            let (maps, poses) = street_sequence(SequenceParams {
                frames: args.frames,
                width: args.width,
                height: args.height,
                shift: args.shift,
                step: args.step,
                seed: args.seed,
            });
            let mut text = String::from("# frame_id x y z\n");
            for p in &poses {
                let [x, y, z] = p.position;
                writeln!(text, "{} {x} {y} {z}", p.frame_id)?;
            }
            std::fs::write(args.output.join("poses.txt"), text)?;
            maps
        }
        Mode::Scenes => distinct_scenes(args.frames, args.width, args.height, args.seed),
    };
    maps.par_iter().try_for_each(|m| -> Result<()> {
        let m = if args.noise > 0.0 {
            with_label_noise(m, args.noise, args.seed ^ (u64::from(m.frame_id()) << 20))
        } else {
            m.clone()
        };
        let path = args.output.join(format!("frame_{:05}.png", m.frame_id()));
        m.save_png(&path).with_context(|| format!("cannot write {}", path.display()))
    })?;
    log::info!("wrote {} frames to {}", maps.len(), args.output.display());
    Ok(())
}
