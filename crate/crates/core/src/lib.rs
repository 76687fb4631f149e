//! SSR-VLAD: place recognition from semantic segmentation maps.
//!
//! A label map is split into category layers, each layer is cleaned up and
//! thinned to a skeleton, skeleton keypoints are described with log-polar
//! shape-context histograms, and the residuals against the layer centroid's
//! histogram are summed into one vector per layer. The concatenated,
//! normalized layer vectors form a fixed-length global descriptor that is
//! compared by cosine similarity.
//!
//! ```
//! use ssrvpr::{Encoder, PipelineConfig, synth};
//!
//! let encoder = Encoder::new(PipelineConfig::cityscapes()).unwrap();
//! let frames = synth::distinct_scenes(2, 128, 96, 1);
//! let d = encoder.encode(&frames[0]).unwrap();
//! assert_eq!(d.len(), 8 * 12 * 5);
//! ```

pub mod aggregate;
pub mod config;
pub mod database;
pub mod error;
pub mod eval;
pub mod mask;
pub mod matcher;
pub mod pipeline;
pub mod preprocess;
pub mod render;
pub mod segmap;
pub mod shapectx;
pub mod skeleton;
pub mod synth;
pub mod timing;

pub use aggregate::{aggregate_layer, build_global, temporal_smooth, GlobalDescriptor, LayerDescriptor, TemporalParams};
pub use config::PipelineConfig;
pub use database::DescriptorDatabase;
pub use error::{Error, Result};
pub use mask::{BinaryMask, Connectivity, Point};
pub use matcher::{match_all, match_query, similarity, MatchResult};
pub use pipeline::{encode_image, Encoder, FrameFeatures, StageTimes};
pub use preprocess::{refine_layer, AreaThreshold, RefineParams};
pub use segmap::{build_layers, load_category_config, load_segmentation_map, CategoryConfig, LayerStack, SegmentationMap};
pub use shapectx::{describe_layer_points, describe_point, PointDescriptor, Radius, ShapeContext, ShapeContextParams};
pub use skeleton::{extract_features, SkeletonFeatures};
