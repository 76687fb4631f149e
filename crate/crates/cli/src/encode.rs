use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use ssrvpr::{DescriptorDatabase, Encoder, TemporalParams};

use crate::common::{load_frames, PipelineArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Role {
    /// Raw descriptors, as seen online.
    Query,
    /// Descriptors smoothed over neighboring frames.
    Reference,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Directory of single-channel label PNGs; file-name order is temporal order.
    #[arg(long)]
    input: PathBuf,

    /// Database file to write.
    #[arg(long)]
    output: PathBuf,

    #[arg(long, value_enum, default_value_t = Role::Reference)]
    role: Role,

    /// Temporal half-window for references (overrides the config).
    #[arg(long)]
    t: Option<usize>,

    /// Add frames to an existing unsmoothed database instead of replacing it.
    #[arg(long)]
    append: bool,

    #[command(flatten)]
    pipeline: PipelineArgs,
}

pub fn run(args: Args) -> Result<()> {
    let cfg = args.pipeline.load()?;
    let existing = if args.append && args.output.exists() {
        Some(DescriptorDatabase::load(&args.output)?)
    } else {
        None
    };
    let first_id = existing.as_ref().map_or(0, |db| db.len() as u32);
    let frames = load_frames(&args.input, first_id)?;
    let encoder = Encoder::new(cfg.clone())?;
    let raw = encoder.encode_all(&frames)?;
    let empty = raw.iter().filter(|d| d.empty).count();
    if empty > 0 {
        log::warn!("{empty} of {} frames produced an empty descriptor", raw.len());
    }

    let db = match args.role {
        Role::Query => DescriptorDatabase::query(&cfg, raw)?,
        Role::Reference => {
            let t = args.t.unwrap_or(cfg.temporal.t);
            DescriptorDatabase::reference_with(&cfg, &raw, TemporalParams { t })?
        }
    };
    let db = match existing {
        Some(mut base) => {
            if db.t != 0 {
                bail!("--append needs an unsmoothed database; use --role query or --t 0");
            }
            base.append(db).context("cannot append to existing database")?;
            base
        }
        None => db,
    };
    crate::create_parent(&args.output)?;
    db.save(&args.output)?;
    log::info!(
        "wrote {} descriptors (K={} M={} N={} t={}) to {}",
        db.len(),
        db.layers,
        db.sectors,
        db.rings,
        db.t,
        args.output.display()
    );
    Ok(())
}
