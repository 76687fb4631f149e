//! Segmentation maps and their split into merged category layers.

use std::collections::BTreeSet;
use std::path::Path;

use image::{DynamicImage, GrayImage, ImageReader};

use crate::error::{Error, Result};
use crate::mask::BinaryMask;

/// What a raw label id maps to under a [`CategoryConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelClass {
    Layer(u8),
    Ignored,
    Unknown,
}

/// Merge table from raw label ids to `K` semantic layers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryConfig {
    name: String,
    groups: Vec<BTreeSet<u8>>,
    ignored: BTreeSet<u8>,
    lut: Vec<LabelClass>,
}

impl CategoryConfig {
    /// Validates and builds a config. `groups[k]` holds the raw ids merged into layer `k`.
    pub fn new(
        name: impl Into<String>,
        groups: Vec<Vec<u8>>,
        ignored: impl IntoIterator<Item = u8>,
    ) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::Config("K must be at least 1".into()));
        }
        if groups.len() > usize::from(u8::MAX) + 1 {
            return Err(Error::Config(format!("K = {} exceeds 256 layers", groups.len())));
        }
        let mut lut = vec![LabelClass::Unknown; 256];
        let mut sets = Vec::with_capacity(groups.len());
        for (k, ids) in groups.into_iter().enumerate() {
            let mut set = BTreeSet::new();
            for id in ids {
                if lut[usize::from(id)] != LabelClass::Unknown {
                    return Err(Error::DuplicateLabel(id));
                }
                lut[usize::from(id)] = LabelClass::Layer(k as u8);
                set.insert(id);
            }
            sets.push(set);
        }
        let mut ignored_set = BTreeSet::new();
        for id in ignored {
            if lut[usize::from(id)] != LabelClass::Unknown {
                return Err(Error::DuplicateLabel(id));
            }
            lut[usize::from(id)] = LabelClass::Ignored;
            ignored_set.insert(id);
        }
        Ok(Self {
            name: name.into(),
            groups: sets,
            ignored: ignored_set,
            lut,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of merged layers `K`.
    pub fn layer_count(&self) -> usize {
        self.groups.len()
    }

    pub fn group(&self, k: usize) -> &BTreeSet<u8> {
        &self.groups[k]
    }

    pub fn groups(&self) -> &[BTreeSet<u8>] {
        &self.groups
    }

    pub fn ignored(&self) -> &BTreeSet<u8> {
        &self.ignored
    }

    #[inline]
    pub fn classify(&self, label: u8) -> LabelClass {
        self.lut[usize::from(label)]
    }

    /// Stable textual form used for fingerprinting.
    pub(crate) fn canonical(&self) -> String {
        let mut s = format!("name={};K={};", self.name, self.groups.len());
        for (k, g) in self.groups.iter().enumerate() {
            s.push_str(&format!("merge.{k}={g:?};"));
        }
        s.push_str(&format!("ignored={:?}", self.ignored));
        s
    }
}

/// Loads the category section of a pipeline config file.
pub fn load_category_config(path: impl AsRef<Path>) -> Result<CategoryConfig> {
    Ok(crate::config::PipelineConfig::load(path)?.categories)
}

/// Grid of raw label ids, one per pixel, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentationMap {
    width: usize,
    height: usize,
    labels: Vec<u8>,
    frame_id: u32,
}

impl SegmentationMap {
    pub fn new(width: usize, height: usize, labels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyMap { width, height });
        }
        if labels.len() != width * height {
            return Err(Error::GridSize {
                expected: width * height,
                actual: labels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            labels,
            frame_id: 0,
        })
    }

    pub fn with_frame_id(mut self, frame_id: u32) -> Self {
        self.frame_id = frame_id;
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn frame_id(&self) -> u32 {
        self.frame_id
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn labels_mut(&mut self) -> &mut [u8] {
        &mut self.labels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.labels[y * self.width + x]
    }

    pub fn to_image(&self) -> GrayImage {
        GrayImage::from_raw(self.width as u32, self.height as u32, self.labels.clone())
            .expect("label grid matches dimensions")
    }

    /// Writes the map as a single-channel 8-bit PNG.
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        self.to_image()
            .save_with_format(path, image::ImageFormat::Png)
            .map_err(|source| Error::Image {
                path: path.to_path_buf(),
                source,
            })
    }
}

/// Reads a single-channel 8-bit label image. Pixel values are copied verbatim.
pub fn load_segmentation_map(path: impl AsRef<Path>) -> Result<SegmentationMap> {
    let path = path.as_ref();
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    let image = reader.decode().map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    let gray = match image {
        DynamicImage::ImageLuma8(gray) => gray,
        other => {
            return Err(Error::NotLabelImage {
                path: path.to_path_buf(),
                found: format!("{:?}", other.color()),
            })
        }
    };
    let (w, h) = gray.dimensions();
    SegmentationMap::new(w as usize, h as usize, gray.into_raw())
}

/// `K` disjoint binary masks plus the count of pixels that went to no layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerStack {
    pub layers: Vec<BinaryMask>,
    pub width: usize,
    pub height: usize,
    pub ignored_pixels: usize,
    pub unknown_pixels: usize,
}

impl LayerStack {
    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }
}

/// Splits a map into one mask per merged category. Ignored and unknown labels
/// land in no mask; unknown ones are counted separately.
pub fn build_layers(map: &SegmentationMap, cfg: &CategoryConfig) -> LayerStack {
    let (w, h) = (map.width, map.height);
    let mut layers = vec![BinaryMask::new(w, h); cfg.layer_count()];
    let mut ignored_pixels = 0;
    let mut unknown_pixels = 0;
    for (i, &label) in map.labels.iter().enumerate() {
        match cfg.classify(label) {
            LabelClass::Layer(k) => layers[usize::from(k)].as_mut_slice()[i] = true,
            LabelClass::Ignored => ignored_pixels += 1,
            LabelClass::Unknown => unknown_pixels += 1,
        }
    }
    if unknown_pixels > 0 {
        log::debug!(
            "frame {}: {unknown_pixels} pixels carry labels unknown to config '{}'",
            map.frame_id,
            cfg.name
        );
    }
    LayerStack {
        layers,
        width: w,
        height: h,
        ignored_pixels,
        unknown_pixels,
    }
}
