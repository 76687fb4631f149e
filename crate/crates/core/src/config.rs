//! Pipeline configuration files.
//!
//! One TOML file carries the category merge table plus optional `[refine]`,
//! `[shape_context]` and `[temporal]` sections:
//!
//! ```toml
//! name = "cityscapes"
//! K = 8
//! ignored = [24, 25, 26]
//!
//! [merge]
//! 0 = [6, 7]
//! 1 = [8]
//! # ...one entry per layer index 0..K-1
//!
//! [refine]
//! enabled = true
//! close_kernel = 5
//! open_kernel = 3
//! max_hole_area = { fraction = 0.001 }    # or { pixels = 400 }
//! min_component_area = { fraction = 0.002 }
//! connectivity = 8
//!
//! [shape_context]
//! rings = 5
//! sectors = 12
//! radius = "half-diagonal"                # or a pixel count
//!
//! [temporal]
//! t = 3
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::aggregate::TemporalParams;
use crate::error::{Error, Result};
use crate::preprocess::RefineParams;
use crate::segmap::CategoryConfig;
use crate::shapectx::ShapeContextParams;

const CITYSCAPES: &str = include_str!("../configs/cityscapes.toml");
const SYNTHIA: &str = include_str!("../configs/synthia.toml");

/// Everything needed to turn a segmentation map into a descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub categories: CategoryConfig,
    pub refine: RefineParams,
    /// When false, layer masks go to skeletonization untouched.
    pub preprocess: bool,
    pub shape_context: ShapeContextParams,
    pub temporal: TemporalParams,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: String,
    #[serde(rename = "K")]
    k: usize,
    #[serde(default)]
    merge: BTreeMap<String, Vec<u8>>,
    #[serde(default)]
    ignored: Vec<u8>,
    #[serde(default)]
    refine: Option<RawRefine>,
    #[serde(default)]
    shape_context: Option<ShapeContextParams>,
    #[serde(default)]
    temporal: Option<TemporalParams>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawRefine {
    enabled: bool,
    close_kernel: usize,
    open_kernel: usize,
    max_hole_area: crate::preprocess::AreaThreshold,
    min_component_area: crate::preprocess::AreaThreshold,
    connectivity: crate::mask::Connectivity,
}

impl Default for RawRefine {
    fn default() -> Self {
        let p = RefineParams::default();
        Self {
            enabled: true,
            close_kernel: p.close_kernel,
            open_kernel: p.open_kernel,
            max_hole_area: p.max_hole_area,
            min_component_area: p.min_component_area,
            connectivity: p.connectivity,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(message) => Error::ConfigParse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if raw.k == 0 {
            return Err(Error::Config("K must be at least 1".into()));
        }
        let mut groups: Vec<Option<Vec<u8>>> = vec![None; raw.k];
        for (key, ids) in raw.merge {
            let k: usize = key
                .parse()
                .map_err(|_| Error::Config(format!("merge key '{key}' is not a layer index")))?;
            if k >= raw.k {
                return Err(Error::Config(format!("merge index {k} outside 0..{}", raw.k)));
            }
            groups[k] = Some(ids);
        }
        let groups = groups
            .into_iter()
            .enumerate()
            .map(|(k, g)| g.ok_or_else(|| Error::Config(format!("merge index {k} is missing"))))
            .collect::<Result<Vec<_>>>()?;
        let categories = CategoryConfig::new(raw.name, groups, raw.ignored)?;

        let (preprocess, refine) = match raw.refine {
            Some(r) => (
                r.enabled,
                RefineParams {
                    close_kernel: r.close_kernel,
                    open_kernel: r.open_kernel,
                    max_hole_area: r.max_hole_area,
                    min_component_area: r.min_component_area,
                    connectivity: r.connectivity,
                },
            ),
            None => (true, RefineParams::default()),
        };
        refine.validate()?;
        let shape_context = raw.shape_context.unwrap_or_default();
        shape_context.validate()?;
        Ok(Self {
            categories,
            refine,
            preprocess,
            shape_context,
            temporal: raw.temporal.unwrap_or_default(),
        })
    }

    /// Shipped Cityscapes merge table with default parameters.
    pub fn cityscapes() -> Self {
        Self::parse(CITYSCAPES).expect("bundled cityscapes config is valid")
    }

    /// Shipped SYNTHIA merge table with default parameters.
    pub fn synthia() -> Self {
        Self::parse(SYNTHIA).expect("bundled synthia config is valid")
    }

    /// Descriptor length `K * M * N`.
    pub fn descriptor_len(&self) -> usize {
        self.categories.layer_count() * self.shape_context.bins()
    }

    /// Hash of every parameter that changes raw descriptor values.
    ///
    /// The temporal window is excluded: queries are never smoothed, yet must
    /// stay comparable with smoothed references. It is stored separately in
    /// database headers.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Sha256::new();
        h.update(self.categories.canonical().as_bytes());
        h.update(format!("|preprocess={}|", self.preprocess).as_bytes());
        if self.preprocess {
            h.update(format!("{:?}", self.refine).as_bytes());
        }
        h.update(format!("|{:?}", self.shape_context).as_bytes());
        let digest = h.finalize();
        u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
    }
}
