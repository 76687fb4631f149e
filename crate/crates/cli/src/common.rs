use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args as ClapArgs;
use rayon::prelude::*;
use ssrvpr::{load_segmentation_map, PipelineConfig, SegmentationMap};

/// Options shared by every command that encodes frames.
#[derive(Debug, Clone, ClapArgs)]
pub struct PipelineArgs {
    /// Pipeline config file, or `cityscapes` / `synthia` for the bundled tables.
    #[arg(long, default_value = "cityscapes")]
    pub config: String,

    /// Skip layer refinement (morphology, hole filling, small-region removal).
    #[arg(long)]
    pub no_preprocess: bool,
}

impl PipelineArgs {
    pub fn load(&self) -> Result<PipelineConfig> {
        let mut cfg = match self.config.as_str() {
            "cityscapes" if !Path::new("cityscapes").exists() => PipelineConfig::cityscapes(),
            "synthia" if !Path::new("synthia").exists() => PipelineConfig::synthia(),
            path => PipelineConfig::load(path)?,
        };
        if self.no_preprocess {
            cfg.preprocess = false;
        }
        Ok(cfg)
    }
}

/// Label images in `dir`, sorted by file name. Sequence order is file order.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("cannot read directory {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| {
        p.is_file()
            && p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| e.eq_ignore_ascii_case("png"))
    });
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    if files.is_empty() {
        bail!("no .png label images found in {}", dir.display());
    }
    Ok(files)
}

/// Loads every frame of `dir`; frame ids start at `first_id`.
pub fn load_frames(dir: &Path, first_id: u32) -> Result<Vec<SegmentationMap>> {
    list_frames(dir)?
        .par_iter()
        .enumerate()
        .map(|(i, p)| Ok(load_segmentation_map(p)?.with_frame_id(first_id + i as u32)))
        .collect()
}

pub fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    s.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse::<T>().with_context(|| format!("invalid list entry '{v}'")))
        .collect()
}
