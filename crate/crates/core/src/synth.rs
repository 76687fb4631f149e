//! Synthetic street-scene label maps using Cityscapes label ids.
//!
//! Used for tests, benchmarks and demos where real segmentation output is not
//! at hand.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eval::PoseRecord;
use crate::segmap::SegmentationMap;

pub mod label {
    pub const ROAD: u8 = 7;
    pub const SIDEWALK: u8 = 8;
    pub const PARKING: u8 = 9;
    pub const BUILDING: u8 = 11;
    pub const WALL: u8 = 12;
    pub const FENCE: u8 = 13;
    pub const GUARD_RAIL: u8 = 14;
    pub const POLE: u8 = 17;
    pub const TRAFFIC_LIGHT: u8 = 19;
    pub const TRAFFIC_SIGN: u8 = 20;
    pub const VEGETATION: u8 = 21;
    pub const TERRAIN: u8 = 22;
    pub const SKY: u8 = 23;
    pub const PERSON: u8 = 24;
    pub const CAR: u8 = 26;
}

/// A wide label canvas from which frames are cropped.
#[derive(Debug, Clone)]
pub struct World {
    width: usize,
    height: usize,
    labels: Vec<u8>,
}

impl World {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    fn fill(&mut self, x0: i64, y0: i64, x1: i64, y1: i64, label: u8) {
        let (x0, x1) = (x0.max(0) as usize, (x1.max(0) as usize).min(self.width));
        let (y0, y1) = (y0.max(0) as usize, (y1.max(0) as usize).min(self.height));
        for y in y0..y1 {
            self.labels[y * self.width + x0..y * self.width + x1.max(x0)].fill(label);
        }
    }

    fn ellipse(&mut self, cx: f64, cy: f64, rx: f64, ry: f64, label: u8) {
        let (x0, x1) = ((cx - rx).floor() as i64, (cx + rx).ceil() as i64);
        let (y0, y1) = ((cy - ry).floor() as i64, (cy + ry).ceil() as i64);
        for y in y0.max(0)..y1.min(self.height as i64) {
            for x in x0.max(0)..x1.min(self.width as i64) {
                let (u, v) = ((x as f64 - cx) / rx, (y as f64 - cy) / ry);
                if u * u + v * v <= 1.0 {
                    self.labels[y as usize * self.width + x as usize] = label;
                }
            }
        }
    }

    /// Frame covering columns `x0..x0 + width`.
    pub fn crop(&self, x0: usize, width: usize, frame_id: u32) -> SegmentationMap {
        assert!(x0 + width <= self.width, "crop exceeds world width");
        let mut labels = Vec::with_capacity(width * self.height);
        for y in 0..self.height {
            labels.extend_from_slice(&self.labels[y * self.width + x0..y * self.width + x0 + width]);
        }
        SegmentationMap::new(width, self.height, labels)
            .expect("crop is non-empty")
            .with_frame_id(frame_id)
    }
}

/// Paints a street strip: sky, buildings and walls, trees, terrain, sidewalk,
/// road, poles with signs and lights, guard rails, and parked cars.
/// `scale` is the frame height the layout is tuned for divided by 256.
pub fn street_world(width: usize, height: usize, rng: &mut impl Rng) -> World {
    let mut w = World {
        width,
        height,
        labels: vec![label::SKY; width * height],
    };
    let h = height as f64;
    let s = (height as f64 / 256.0).max(0.25);
    let wi = width as i64;
    let horizon = (h * rng.random_range(0.52..0.62)) as i64;
    let curb = horizon + (h * rng.random_range(0.04..0.08)) as i64;
    let road_top = curb + (h * rng.random_range(0.06..0.12)) as i64;

    // Facades.
    let mut x = -(rng.random_range(0.0..40.0) * s) as i64;
    while x < wi {
        let seg = (rng.random_range(30.0..110.0) * s) as i64;
        match rng.random_range(0..10) {
            0..=5 => {
                let top = (h * rng.random_range(0.08..0.42)) as i64;
                w.fill(x, top, x + seg, horizon, label::BUILDING);
                // Recessed upper floor.
                if rng.random_bool(0.4) {
                    let inset = seg / 4;
                    let t2 = top - (rng.random_range(10.0..30.0) * s) as i64;
                    w.fill(x + inset, t2, x + seg - inset, top, label::BUILDING);
                }
            }
            6 => {
                let top = horizon - (rng.random_range(15.0..35.0) * s) as i64;
                w.fill(x, top, x + seg, horizon, label::WALL);
            }
            7 => {
                let top = horizon - (rng.random_range(10.0..25.0) * s) as i64;
                w.fill(x, top, x + seg, horizon, label::FENCE);
            }
            _ => {}
        }
        x += seg + (rng.random_range(0.0..25.0) * s) as i64;
    }

    // Trees.
    let trees = (width as f64 / (70.0 * s)).ceil() as usize;
    for _ in 0..trees {
        let cx = rng.random_range(0.0..width as f64);
        let crown = rng.random_range(14.0..34.0) * s;
        let cy = horizon as f64 - crown - rng.random_range(5.0..30.0) * s;
        w.ellipse(cx, cy, crown, crown * rng.random_range(0.7..1.1), label::VEGETATION);
        let trunk = (3.0 * s).max(1.0) as i64;
        w.fill(cx as i64 - trunk / 2, cy as i64, cx as i64 + trunk / 2 + 1, horizon, label::VEGETATION);
    }

    // Ground bands.
    w.fill(0, horizon, wi, curb, label::TERRAIN);
    let mut x = 0;
    while x < wi {
        let seg = (rng.random_range(40.0..140.0) * s) as i64;
        if rng.random_bool(0.3) {
            w.fill(x, horizon, x + seg, curb, label::VEGETATION);
        }
        x += seg;
    }
    w.fill(0, curb, wi, road_top, label::SIDEWALK);
    let mut x = 0;
    while x < wi {
        let seg = (rng.random_range(50.0..160.0) * s) as i64;
        if rng.random_bool(0.25) {
            w.fill(x, curb + (road_top - curb) / 2, x + seg, road_top, label::PARKING);
        }
        x += seg;
    }
    w.fill(0, road_top, wi, height as i64, label::ROAD);

    // Street furniture.
    let mut x = (rng.random_range(10.0..60.0) * s) as i64;
    while x < wi {
        let pw = (rng.random_range(2.0..5.0) * s).max(1.0) as i64;
        let top = (h * rng.random_range(0.15..0.4)) as i64;
        let base = curb + (road_top - curb) / 3;
        w.fill(x, top, x + pw, base, label::POLE);
        match rng.random_range(0..3) {
            0 => {
                let r = rng.random_range(5.0..10.0) * s;
                w.ellipse((x + pw / 2) as f64, top as f64 + r, r, r, label::TRAFFIC_SIGN);
            }
            1 => {
                let lw = (rng.random_range(5.0..9.0) * s) as i64;
                w.fill(x - lw / 2, top, x + pw + lw / 2, top + 3 * lw, label::TRAFFIC_LIGHT);
            }
            _ => {
                let arm = (rng.random_range(15.0..35.0) * s) as i64;
                w.fill(x, top, x + arm, top + pw, label::POLE);
            }
        }
        x += (rng.random_range(50.0..130.0) * s) as i64;
    }
    let mut x = 0;
    while x < wi {
        let seg = (rng.random_range(60.0..200.0) * s) as i64;
        if rng.random_bool(0.3) {
            let rail = (4.0 * s).max(1.0) as i64;
            w.fill(x, road_top - rail, x + seg, road_top + rail, label::GUARD_RAIL);
        }
        x += seg;
    }

    // Dynamic objects.
    let mut x = (rng.random_range(0.0..100.0) * s) as i64;
    while x < wi {
        let cw = (rng.random_range(40.0..70.0) * s) as i64;
        let ch = (rng.random_range(18.0..28.0) * s) as i64;
        let y = road_top + (rng.random_range(0.0..12.0) * s) as i64;
        w.fill(x, y, x + cw, y + ch, label::CAR);
        x += cw + (rng.random_range(40.0..200.0) * s) as i64;
    }
    w
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceParams {
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    /// Camera advance per frame in pixels.
    pub shift: usize,
    /// Camera advance per frame in metres.
    pub step: f64,
    pub seed: u64,
}

impl Default for SequenceParams {
    fn default() -> Self {
        Self {
            frames: 30,
            width: 256,
            height: 192,
            shift: 12,
            step: 1.5,
            seed: 7,
        }
    }
}

/// A drive along one street: frame `k` is the crop at `k * shift` pixels with
/// pose `(k * step, 0, 0)`.
pub fn street_sequence(params: SequenceParams) -> (Vec<SegmentationMap>, Vec<PoseRecord>) {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let world_w = params.width + params.shift * params.frames.saturating_sub(1);
    let world = street_world(world_w, params.height, &mut rng);
    sample_world(&world, params)
}

/// Crops frames from an existing world; lets two traversals share one street.
pub fn sample_world(world: &World, params: SequenceParams) -> (Vec<SegmentationMap>, Vec<PoseRecord>) {
    (0..params.frames)
        .map(|k| {
            let id = k as u32;
            (
                world.crop(k * params.shift, params.width, id),
                PoseRecord {
                    frame_id: id,
                    position: [k as f64 * params.step, 0.0, 0.0],
                },
            )
        })
        .unzip()
}

/// Independent scenes: frame `i` comes from its own street.
pub fn distinct_scenes(frames: usize, width: usize, height: usize, seed: u64) -> Vec<SegmentationMap> {
    (0..frames)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64 * 0x9e37_79b9));
            street_world(width, height, &mut rng).crop(0, width, i as u32)
        })
        .collect()
}

/// Replaces a `fraction` of pixels with labels drawn uniformly from `palette`.
pub fn salt_and_pepper(map: &SegmentationMap, fraction: f64, palette: &[u8], rng: &mut impl Rng) -> SegmentationMap {
    let mut out = map.clone();
    if palette.is_empty() {
        return out;
    }
    for l in out.labels_mut() {
        if rng.random_bool(fraction) {
            *l = palette[rng.random_range(0..palette.len())];
        }
    }
    out
}

/// Salt-and-pepper noise over [`NOISE_PALETTE`] with its own seeded generator.
pub fn with_label_noise(map: &SegmentationMap, fraction: f64, seed: u64) -> SegmentationMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    salt_and_pepper(map, fraction, &NOISE_PALETTE, &mut rng)
}

/// Labels used as noise for Cityscapes-style maps.
pub const NOISE_PALETTE: [u8; 10] = [
    label::ROAD,
    label::SIDEWALK,
    label::BUILDING,
    label::POLE,
    label::TRAFFIC_SIGN,
    label::VEGETATION,
    label::TERRAIN,
    label::SKY,
    label::GUARD_RAIL,
    label::PARKING,
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequence_shape() {
        let p = SequenceParams {
            frames: 5,
            ..Default::default()
        };
        let (maps, poses) = street_sequence(p);
        assert_eq!(maps.len(), 5);
        assert_eq!(poses[4].position[0], 6.0);
        assert!(maps.iter().all(|m| m.width() == 256 && m.height() == 192));
        assert_eq!(maps[3].frame_id(), 3);
        // Consecutive frames overlap by width - shift columns.
        for y in 0..192 {
            for x in 0..244 {
                assert_eq!(maps[1].get(x, y), maps[0].get(x + 12, y));
            }
        }
    }

    #[test]
    fn generation_is_seeded() {
        let a = distinct_scenes(3, 64, 64, 1);
        let b = distinct_scenes(3, 64, 64, 1);
        assert_eq!(a, b);
        assert_ne!(a[0].labels(), a[1].labels());
    }

    #[test]
    fn salt_noise_touches_roughly_the_fraction() {
        let m = SegmentationMap::new(100, 100, vec![label::SKY; 10_000]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = salt_and_pepper(&m, 0.1, &[label::ROAD], &mut rng);
        let changed = n.labels().iter().filter(|&&l| l == label::ROAD).count();
        assert!((800..1200).contains(&changed), "{changed}");
    }
}
