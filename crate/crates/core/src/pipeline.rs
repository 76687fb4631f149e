//! End-to-end frame encoding.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::aggregate::{aggregate_layer, build_global, GlobalDescriptor, LayerDescriptor};
use crate::config::PipelineConfig;
use crate::error::Result;
use crate::preprocess::{refine_layer, RefineParams};
use crate::segmap::{build_layers, CategoryConfig, LayerStack, SegmentationMap};
use crate::shapectx::{describe_layer_points, PointDescriptor, ShapeContext, ShapeContextParams};
use crate::skeleton::{extract_features, SkeletonFeatures};

/// Skeleton features of every layer of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameFeatures {
    pub frame_id: u32,
    pub width: usize,
    pub height: usize,
    pub layers: Vec<SkeletonFeatures>,
}

/// Centroid and keypoint histograms of one layer; `None` for an empty layer.
pub type LayerHistograms = Option<(PointDescriptor, Vec<PointDescriptor>)>;

/// Wall-clock split of one encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StageTimes {
    /// Layering, refinement, skeletonization and shape context.
    pub extraction: Duration,
    /// Residual aggregation and normalization.
    pub encoding: Duration,
}

#[derive(Debug, Clone)]
pub struct Encoder {
    config: PipelineConfig,
}

impl Encoder {
    pub fn new(config: PipelineConfig) -> Result<Self> {
        config.refine.validate()?;
        config.shape_context.validate()?;
        Ok(Self { config })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn descriptor_len(&self) -> usize {
        self.config.descriptor_len()
    }

    /// Category layers, refined unless preprocessing is disabled.
    pub fn layers(&self, map: &SegmentationMap) -> Result<LayerStack> {
        let mut stack = build_layers(map, &self.config.categories);
        if self.config.preprocess {
            stack.layers = stack
                .layers
                .par_iter()
                .map(|m| refine_layer(m, &self.config.refine))
                .collect::<Result<_>>()?;
        }
        Ok(stack)
    }

    pub fn features(&self, map: &SegmentationMap) -> Result<FrameFeatures> {
        let stack = self.layers(map)?;
        let layers = stack
            .layers
            .par_iter()
            .enumerate()
            .map(|(k, m)| extract_features(m, k))
            .collect();
        Ok(FrameFeatures {
            frame_id: map.frame_id(),
            width: map.width(),
            height: map.height(),
            layers,
        })
    }

    pub fn shape_context(&self, width: usize, height: usize) -> Result<ShapeContext> {
        self.config.shape_context.resolve(width, height)
    }

    pub fn histograms(&self, features: &FrameFeatures) -> Result<Vec<LayerHistograms>> {
        let sc = self.shape_context(features.width, features.height)?;
        Ok(features
            .layers
            .par_iter()
            .map(|f| describe_layer_points(f, &sc))
            .collect())
    }

    pub fn aggregate(&self, frame_id: u32, histograms: &[LayerHistograms]) -> Result<GlobalDescriptor> {
        let bins = self.config.shape_context.bins();
        let layers = histograms
            .iter()
            .enumerate()
            .map(|(k, h)| match h {
                Some((dc, di)) => aggregate_layer(k, dc, di),
                None => Ok(LayerDescriptor::zero(k, bins)),
            })
            .collect::<Result<Vec<_>>>()?;
        build_global(&layers, self.config.categories.layer_count(), frame_id)
    }

    /// Descriptor from precomputed features, e.g. after perturbing them.
    pub fn describe(&self, features: &FrameFeatures) -> Result<GlobalDescriptor> {
        let h = self.histograms(features)?;
        self.aggregate(features.frame_id, &h)
    }

    pub fn encode(&self, map: &SegmentationMap) -> Result<GlobalDescriptor> {
        self.describe(&self.features(map)?)
    }

    pub fn encode_timed(&self, map: &SegmentationMap) -> Result<(GlobalDescriptor, StageTimes)> {
        let start = Instant::now();
        let features = self.features(map)?;
        let h = self.histograms(&features)?;
        let mid = Instant::now();
        let d = self.aggregate(features.frame_id, &h)?;
        let end = Instant::now();
        Ok((
            d,
            StageTimes {
                extraction: mid - start,
                encoding: end - mid,
            },
        ))
    }

    /// Encodes frames in parallel; output order follows input order.
    pub fn encode_all(&self, maps: &[SegmentationMap]) -> Result<Vec<GlobalDescriptor>> {
        maps.par_iter().map(|m| self.encode(m)).collect()
    }
}

/// One-shot encoding. `refine = None` skips preprocessing.
pub fn encode_image(
    map: &SegmentationMap,
    cfg: &CategoryConfig,
    refine: Option<&RefineParams>,
    sc: &ShapeContextParams,
) -> Result<GlobalDescriptor> {
    let config = PipelineConfig {
        categories: cfg.clone(),
        refine: refine.copied().unwrap_or_default(),
        preprocess: refine.is_some(),
        shape_context: *sc,
        temporal: Default::default(),
    };
    Encoder::new(config)?.encode(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcher::cosine;

    fn encoder() -> Encoder {
        Encoder::new(PipelineConfig::cityscapes()).unwrap()
    }

    fn map(w: usize, h: usize, f: impl Fn(usize, usize) -> u8) -> SegmentationMap {
        let labels = (0..h).flat_map(|y| (0..w).map(move |x| (x, y))).map(|(x, y)| f(x, y)).collect();
        SegmentationMap::new(w, h, labels).unwrap()
    }

    // Road along the bottom, a building block and a pole.
    fn scene(dx: usize) -> SegmentationMap {
        map(160, 120, |x, y| {
            if y >= 90 {
                7
            } else if (20 + dx..70 + dx).contains(&x) && (30..85).contains(&y) {
                11
            } else if (100 + dx..104 + dx).contains(&x) && (20..90).contains(&y) {
                17
            } else {
                23
            }
        })
    }

    #[test]
    fn all_ignored_frame_is_empty() {
        let d = encoder().encode(&map(64, 48, |_, _| 26)).unwrap();
        assert!(d.empty);
        assert_eq!(d.len(), 480);
        assert!(d.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn encoding_is_deterministic() {
        let e = encoder();
        let a = e.encode(&scene(0)).unwrap();
        let b = e.encode(&scene(0)).unwrap();
        assert_eq!(a, b);
        assert!(!a.empty);
        assert!((a.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn translation_changes_descriptor() {
        let e = encoder();
        let a = e.encode(&scene(0)).unwrap();
        let b = e.encode(&scene(30)).unwrap();
        assert_ne!(a.values, b.values);
        assert!((cosine(&a.values, &a.values) - 1.0).abs() < 1e-12);
        assert!((cosine(&b.values, &b.values) - 1.0).abs() < 1e-12);
        assert!(cosine(&a.values, &b.values) < 1.0 - 1e-9);
    }

    #[test]
    fn encode_image_matches_encoder() {
        let cfg = PipelineConfig::cityscapes();
        let m = scene(5);
        let a = encode_image(&m, &cfg.categories, Some(&cfg.refine), &cfg.shape_context).unwrap();
        assert_eq!(a, encoder().encode(&m).unwrap());
        let raw = encode_image(&m, &cfg.categories, None, &cfg.shape_context).unwrap();
        assert_eq!(raw.len(), 480);
    }

    #[test]
    fn parallel_encoding_keeps_order() {
        let e = encoder();
        let maps: Vec<_> = (0..6).map(|i| scene(i * 7).with_frame_id(i as u32)).collect();
        let all = e.encode_all(&maps).unwrap();
        for (m, d) in maps.iter().zip(&all) {
            assert_eq!(d, &e.encode(m).unwrap());
        }
    }
}
