//! Log-polar shape-context histograms.
//!
//! Bins are laid out sector-major: `index = sector * rings + ring`. Ring `j`
//! covers distances in `(R / 2^(N-j), R / 2^(N-1-j)]`, so the outermost ring
//! ends exactly at `R`. Sector `s` covers angles `[s * 2π/M, (s+1) * 2π/M)`
//! measured from the +x axis in image coordinates (y down).

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::Point;
use crate::skeleton::SkeletonFeatures;

/// Outer radius of the histogram.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Radius {
    /// Half the image diagonal: every reference point sees the whole frame.
    #[default]
    HalfDiagonal,
    Pixels(f64),
}

impl Serialize for Radius {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Radius::HalfDiagonal => s.serialize_str("half-diagonal"),
            Radius::Pixels(r) => s.serialize_f64(*r),
        }
    }
}

impl<'de> Deserialize<'de> for Radius {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Name(String),
            Float(f64),
            Int(i64),
        }
        match Repr::deserialize(d)? {
            Repr::Name(n) if n == "half-diagonal" => Ok(Radius::HalfDiagonal),
            Repr::Name(n) => Err(serde::de::Error::custom(format!(
                "radius must be \"half-diagonal\" or a number, got \"{n}\""
            ))),
            Repr::Float(r) => Ok(Radius::Pixels(r)),
            Repr::Int(r) => Ok(Radius::Pixels(r as f64)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShapeContextParams {
    /// Radial ring count `N`.
    pub rings: usize,
    /// Angular sector count `M`.
    pub sectors: usize,
    pub radius: Radius,
}

impl Default for ShapeContextParams {
    fn default() -> Self {
        Self {
            rings: 5,
            sectors: 12,
            radius: Radius::HalfDiagonal,
        }
    }
}

impl ShapeContextParams {
    /// Histogram length `M * N`.
    pub fn bins(&self) -> usize {
        self.rings * self.sectors
    }

    pub fn validate(&self) -> Result<()> {
        if self.rings == 0 || self.sectors == 0 {
            return Err(Error::Config("shape context needs at least one ring and one sector".into()));
        }
        if let Radius::Pixels(r) = self.radius {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::Config(format!("shape context radius must be > 0, got {r}")));
            }
        }
        Ok(())
    }

    /// Fixes the radius for an image of the given size.
    pub fn resolve(&self, width: usize, height: usize) -> Result<ShapeContext> {
        let radius = match self.radius {
            Radius::HalfDiagonal => 0.5 * ((width * width + height * height) as f64).sqrt(),
            Radius::Pixels(r) => r,
        };
        ShapeContext::new(self.rings, self.sectors, radius)
    }
}

/// Shape-context binning with a concrete radius.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeContext {
    rings: usize,
    sectors: usize,
    radius: f64,
    ring_bounds: Vec<f64>,
    sector_width: f64,
}

impl ShapeContext {
    pub fn new(rings: usize, sectors: usize, radius: f64) -> Result<Self> {
        ShapeContextParams {
            rings,
            sectors,
            radius: Radius::Pixels(radius),
        }
        .validate()?;
        let ring_bounds = (0..rings)
            .map(|j| radius * 0.5f64.powi((rings - 1 - j) as i32))
            .collect();
        Ok(Self {
            rings,
            sectors,
            radius,
            ring_bounds,
            sector_width: TAU / sectors as f64,
        })
    }

    pub fn rings(&self) -> usize {
        self.rings
    }

    pub fn sectors(&self) -> usize {
        self.sectors
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn bins(&self) -> usize {
        self.rings * self.sectors
    }

    /// Upper distance bound of each ring, innermost first.
    pub fn ring_bounds(&self) -> &[f64] {
        &self.ring_bounds
    }

    pub fn sector_width(&self) -> f64 {
        self.sector_width
    }

    /// Bin index for an offset `(dx, dy)` from the reference, or `None` if the
    /// point sits on the reference or beyond the radius.
    #[inline]
    pub fn bin(&self, dx: f64, dy: f64) -> Option<usize> {
        let d = (dx * dx + dy * dy).sqrt();
        if !(d > 0.0 && d <= self.radius) {
            return None;
        }
        let ring = self.ring_bounds.iter().position(|&b| d <= b).unwrap_or(self.rings - 1);
        let mut angle = dy.atan2(dx);
        if angle < 0.0 {
            angle += TAU;
        }
        let w = self.sector_width;
        let mut sector = ((angle / w) as usize).min(self.sectors - 1);
        // Snap to the half-open sector edges as evaluated in floating point.
        while sector > 0 && angle < sector as f64 * w {
            sector -= 1;
        }
        while sector + 1 < self.sectors && angle >= (sector + 1) as f64 * w {
            sector += 1;
        }
        Some(sector * self.rings + ring)
    }

    /// Histogram of `cloud` around `reference`.
    pub fn describe_point(&self, reference: (f64, f64), cloud: &[Point]) -> PointDescriptor {
        let mut bins = vec![0u32; self.bins()];
        for q in cloud {
            if let Some(b) = self.bin(q.x as f64 - reference.0, q.y as f64 - reference.1) {
                bins[b] += 1;
            }
        }
        PointDescriptor { bins, reference }
    }
}

/// Raw shape-context counts for one reference point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointDescriptor {
    pub bins: Vec<u32>,
    pub reference: (f64, f64),
}

impl PointDescriptor {
    pub fn total(&self) -> u64 {
        self.bins.iter().map(|&b| u64::from(b)).sum()
    }
}

/// Free-function form of [`ShapeContext::describe_point`].
pub fn describe_point(reference: (f64, f64), cloud: &[Point], sc: &ShapeContext) -> PointDescriptor {
    sc.describe_point(reference, cloud)
}

/// Descriptors for a layer's centroid and each keypoint against an explicit cloud.
pub fn describe_layer(
    center: (f64, f64),
    keypoints: &[Point],
    cloud: &[Point],
    sc: &ShapeContext,
) -> (PointDescriptor, Vec<PointDescriptor>) {
    let dc = sc.describe_point(center, cloud);
    let di = keypoints
        .iter()
        .map(|p| sc.describe_point((p.x as f64, p.y as f64), cloud))
        .collect();
    (dc, di)
}

/// Centroid and keypoint descriptors of one layer, using the layer's skeleton
/// pixels as the point cloud. `None` for an empty layer.
pub fn describe_layer_points(
    features: &SkeletonFeatures,
    sc: &ShapeContext,
) -> Option<(PointDescriptor, Vec<PointDescriptor>)> {
    let center = features.centroid?;
    if features.skeleton.is_empty() {
        return None;
    }
    Some(describe_layer(center, &features.keypoints, &features.skeleton, sc))
}
