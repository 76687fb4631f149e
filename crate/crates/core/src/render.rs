//! Debug overlay of refined layers, skeletons and keypoints.

use std::path::Path;

use image::{Rgb, RgbImage};

use crate::error::{Error, Result};
use crate::pipeline::FrameFeatures;
use crate::segmap::LayerStack;

const PALETTE: [[u8; 3]; 8] = [
    [128, 64, 128],
    [244, 35, 232],
    [70, 70, 70],
    [220, 220, 0],
    [107, 142, 35],
    [70, 130, 180],
    [180, 165, 180],
    [250, 170, 160],
];

fn color(k: usize) -> [u8; 3] {
    PALETTE[k % PALETTE.len()]
}

/// Dimmed layer masks with skeletons in full color, keypoints in white and
/// centroids in red.
pub fn overlay(stack: &LayerStack, features: &FrameFeatures) -> RgbImage {
    let (w, h) = (stack.width as u32, stack.height as u32);
    let mut img = RgbImage::new(w, h);
    for (k, layer) in stack.layers.iter().enumerate() {
        let c = color(k).map(|v| v / 3);
        for p in layer.points() {
            img.put_pixel(p.x as u32, p.y as u32, Rgb(c));
        }
    }
    let mut plot = |x: i64, y: i64, c: [u8; 3]| {
        if (0..i64::from(w)).contains(&x) && (0..i64::from(h)).contains(&y) {
            img.put_pixel(x as u32, y as u32, Rgb(c));
        }
    };
    for f in &features.layers {
        for p in &f.skeleton {
            plot(p.x.into(), p.y.into(), color(f.layer_index));
        }
    }
    for f in &features.layers {
        for p in &f.keypoints {
            for (dx, dy) in [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)] {
                plot(i64::from(p.x) + dx, i64::from(p.y) + dy, [255, 255, 255]);
            }
        }
        if let Some((cx, cy)) = f.centroid {
            let (cx, cy) = (cx.round() as i64, cy.round() as i64);
            for d in -2..=2 {
                plot(cx + d, cy, [255, 0, 0]);
                plot(cx, cy + d, [255, 0, 0]);
            }
        }
    }
    img
}

pub fn save_overlay(stack: &LayerStack, features: &FrameFeatures, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    overlay(stack, features).save(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}
