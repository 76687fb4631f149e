//! Layer refinement: closing, opening, hole filling and small-component removal.
//!
//! Morphology uses a square structuring element and treats pixels outside the
//! image as background, so erosion always clears a border of half the kernel
//! width.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{BinaryMask, Connectivity};

/// An area threshold in pixels, either absolute or relative to the image area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AreaThreshold {
    Pixels(u64),
    Fraction(f64),
}

impl AreaThreshold {
    /// Resolves to a pixel count; fractions round to the nearest pixel.
    pub fn resolve(self, image_area: usize) -> usize {
        match self {
            AreaThreshold::Pixels(p) => p as usize,
            AreaThreshold::Fraction(f) => (f * image_area as f64).round() as usize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefineParams {
    pub close_kernel: usize,
    pub open_kernel: usize,
    /// Enclosed background regions up to this area are filled.
    pub max_hole_area: AreaThreshold,
    /// Foreground components smaller than this are removed.
    pub min_component_area: AreaThreshold,
    pub connectivity: Connectivity,
}

impl Default for RefineParams {
    fn default() -> Self {
        Self {
            close_kernel: 5,
            open_kernel: 3,
            max_hole_area: AreaThreshold::Fraction(0.001),
            min_component_area: AreaThreshold::Fraction(0.002),
            connectivity: Connectivity::Eight,
        }
    }
}

impl RefineParams {
    pub fn validate(&self) -> Result<()> {
        check_kernel(self.close_kernel)?;
        check_kernel(self.open_kernel)?;
        for a in [self.max_hole_area, self.min_component_area] {
            if let AreaThreshold::Fraction(f) = a {
                if !(f.is_finite() && f >= 0.0) {
                    return Err(Error::Config(format!("area fraction must be >= 0, got {f}")));
                }
            }
        }
        Ok(())
    }
}

fn check_kernel(kernel: usize) -> Result<()> {
    if kernel == 0 || kernel.is_multiple_of(2) {
        Err(Error::EvenKernel(kernel))
    } else {
        Ok(())
    }
}

/// One separable pass of a square window along rows (`horizontal`) or columns.
/// With `all == false` a pixel is set if any window pixel is set (dilation);
/// with `all == true` only if the whole window lies inside the image and is set.
fn window_pass(src: &[bool], width: usize, height: usize, radius: usize, horizontal: bool, all: bool) -> Vec<bool> {
    let mut out = vec![false; src.len()];
    let (lines, len) = if horizontal { (height, width) } else { (width, height) };
    let index = |line: usize, i: usize| if horizontal { line * width + i } else { i * width + line };
    let mut prefix = vec![0u32; len + 1];
    for line in 0..lines {
        for i in 0..len {
            prefix[i + 1] = prefix[i] + u32::from(src[index(line, i)]);
        }
        for i in 0..len {
            let lo = i.saturating_sub(radius);
            let hi = (i + radius).min(len - 1);
            let count = prefix[hi + 1] - prefix[lo];
            out[index(line, i)] = if all {
                i >= radius && i + radius < len && count as usize == 2 * radius + 1
            } else {
                count > 0
            };
        }
    }
    out
}

fn morph(mask: &BinaryMask, kernel: usize, erode: bool) -> Result<BinaryMask> {
    check_kernel(kernel)?;
    let (w, h) = (mask.width(), mask.height());
    if kernel == 1 || w == 0 || h == 0 {
        return Ok(mask.clone());
    }
    let r = kernel / 2;
    let rows = window_pass(mask.as_slice(), w, h, r, true, erode);
    let out = window_pass(&rows, w, h, r, false, erode);
    Ok(BinaryMask::from_vec(w, h, out).expect("same dimensions"))
}

/// Binary dilation with a `kernel`×`kernel` square.
pub fn dilate(mask: &BinaryMask, kernel: usize) -> Result<BinaryMask> {
    morph(mask, kernel, false)
}

/// Binary erosion with a `kernel`×`kernel` square; outside pixels count as background.
pub fn erode(mask: &BinaryMask, kernel: usize) -> Result<BinaryMask> {
    morph(mask, kernel, true)
}

pub fn close(mask: &BinaryMask, kernel: usize) -> Result<BinaryMask> {
    erode(&dilate(mask, kernel)?, kernel)
}

pub fn open(mask: &BinaryMask, kernel: usize) -> Result<BinaryMask> {
    dilate(&erode(mask, kernel)?, kernel)
}

pub(crate) struct ComponentStats {
    pub area: usize,
    pub touches_border: bool,
}

/// Labels connected regions of pixels equal to `value`. Label 0 marks pixels
/// of the other value; component `i` has label `i + 1`.
pub(crate) fn label_components(
    mask: &BinaryMask,
    value: bool,
    connectivity: Connectivity,
) -> (Vec<u32>, Vec<ComponentStats>) {
    let (w, h) = (mask.width(), mask.height());
    let data = mask.as_slice();
    let mut labels = vec![0u32; data.len()];
    let mut stats = Vec::new();
    let mut stack = Vec::new();
    for start in 0..data.len() {
        if data[start] != value || labels[start] != 0 {
            continue;
        }
        let label = stats.len() as u32 + 1;
        let mut comp = ComponentStats {
            area: 0,
            touches_border: false,
        };
        labels[start] = label;
        stack.push(start);
        while let Some(i) = stack.pop() {
            comp.area += 1;
            let (x, y) = ((i % w) as i32, (i / w) as i32);
            if x == 0 || y == 0 || x as usize == w - 1 || y as usize == h - 1 {
                comp.touches_border = true;
            }
            for &(dx, dy) in connectivity.offsets() {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= h {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if data[j] == value && labels[j] == 0 {
                    labels[j] = label;
                    stack.push(j);
                }
            }
        }
        stats.push(comp);
    }
    (labels, stats)
}

/// Fills background components that do not touch the image border and have
/// area at most `max_hole_area`.
pub fn fill_holes(mask: &BinaryMask, max_hole_area: usize, connectivity: Connectivity) -> BinaryMask {
    let (labels, stats) = label_components(mask, false, connectivity);
    let mut out = mask.clone();
    for (px, &l) in out.as_mut_slice().iter_mut().zip(&labels) {
        if l != 0 {
            let c = &stats[l as usize - 1];
            if !c.touches_border && c.area <= max_hole_area {
                *px = true;
            }
        }
    }
    out
}

/// Clears foreground components with area strictly below `min_component_area`.
pub fn remove_small_components(
    mask: &BinaryMask,
    min_component_area: usize,
    connectivity: Connectivity,
) -> BinaryMask {
    if min_component_area == 0 {
        return mask.clone();
    }
    let (labels, stats) = label_components(mask, true, connectivity);
    let mut out = mask.clone();
    for (px, &l) in out.as_mut_slice().iter_mut().zip(&labels) {
        if l != 0 && stats[l as usize - 1].area < min_component_area {
            *px = false;
        }
    }
    out
}

/// Full refinement: close, open, fill holes, remove small components, in that order.
pub fn refine_layer(mask: &BinaryMask, params: &RefineParams) -> Result<BinaryMask> {
    params.validate()?;
    if mask.is_empty() {
        return Ok(mask.clone());
    }
    let area = mask.len();
    let closed = close(mask, params.close_kernel)?;
    let opened = open(&closed, params.open_kernel)?;
    let filled = fill_holes(&opened, params.max_hole_area.resolve(area), params.connectivity);
    Ok(remove_small_components(
        &filled,
        params.min_component_area.resolve(area),
        params.connectivity,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::Point;
    use proptest::prelude::*;

    // Direct window evaluation, independent of the separable prefix-sum passes.
    fn naive_morph(mask: &BinaryMask, kernel: usize, erode: bool) -> BinaryMask {
        let r = (kernel / 2) as i32;
        let mut out = BinaryMask::new(mask.width(), mask.height());
        for y in 0..mask.height() as i32 {
            for x in 0..mask.width() as i32 {
                let mut any = false;
                let mut all = true;
                for dy in -r..=r {
                    for dx in -r..=r {
                        let v = mask.get_or_clear(x + dx, y + dy);
                        any |= v;
                        all &= v;
                    }
                }
                out.set(x as usize, y as usize, if erode { all } else { any });
            }
        }
        out
    }

    fn naive_flood(mask: &BinaryMask, start: Point, value: bool, conn: Connectivity) -> Vec<Point> {
        let mut seen = std::collections::HashSet::new();
        let mut todo = vec![start];
        seen.insert(start);
        while let Some(p) = todo.pop() {
            for &(dx, dy) in conn.offsets() {
                let q = p.translate(dx, dy);
                if mask.in_bounds(q.x, q.y)
                    && mask.get(q.x as usize, q.y as usize) == value
                    && seen.insert(q)
                {
                    todo.push(q);
                }
            }
        }
        seen.into_iter().collect()
    }

    fn naive_fill(mask: &BinaryMask, max_area: usize, conn: Connectivity) -> BinaryMask {
        let mut out = mask.clone();
        for y in 0..mask.height() {
            for x in 0..mask.width() {
                if mask.get(x, y) {
                    continue;
                }
                let comp = naive_flood(mask, Point::new(x as i32, y as i32), false, conn);
                let border = comp.iter().any(|p| {
                    p.x == 0 || p.y == 0 || p.x as usize == mask.width() - 1 || p.y as usize == mask.height() - 1
                });
                if !border && comp.len() <= max_area {
                    out.set(x, y, true);
                }
            }
        }
        out
    }

    fn naive_remove(mask: &BinaryMask, min_area: usize, conn: Connectivity) -> BinaryMask {
        let mut out = mask.clone();
        for p in mask.points() {
            if naive_flood(mask, p, true, conn).len() < min_area {
                out.set_point(p, false);
            }
        }
        out
    }

    fn naive_refine(mask: &BinaryMask, p: &RefineParams) -> BinaryMask {
        let area = mask.len();
        let closed = naive_morph(&naive_morph(mask, p.close_kernel, false), p.close_kernel, true);
        let opened = naive_morph(&naive_morph(&closed, p.open_kernel, true), p.open_kernel, false);
        let filled = naive_fill(&opened, p.max_hole_area.resolve(area), p.connectivity);
        naive_remove(&filled, p.min_component_area.resolve(area), p.connectivity)
    }

    fn block(w: usize, h: usize, x0: usize, y0: usize, bw: usize, bh: usize) -> BinaryMask {
        let mut m = BinaryMask::new(w, h);
        for y in y0..y0 + bh {
            for x in x0..x0 + bw {
                m.set(x, y, true);
            }
        }
        m
    }

    fn arb_mask(max: usize) -> impl Strategy<Value = BinaryMask> {
        (1..max, 1..max).prop_flat_map(|(w, h)| {
            proptest::collection::vec(any::<bool>(), w * h)
                .prop_map(move |v| BinaryMask::from_vec(w, h, v).unwrap())
        })
    }

    // Blobby masks: a few random rectangles plus salt noise.
    fn arb_scene() -> impl Strategy<Value = BinaryMask> {
        (
            proptest::collection::vec((0usize..32, 0usize..32, 1usize..14, 1usize..14), 1..5),
            proptest::collection::vec((0usize..32, 0usize..32), 0..12),
        )
            .prop_map(|(rects, salt)| {
                let mut m = BinaryMask::new(32, 32);
                for (x, y, w, h) in rects {
                    for yy in y..(y + h).min(32) {
                        for xx in x..(x + w).min(32) {
                            m.set(xx, yy, true);
                        }
                    }
                }
                for (x, y) in salt {
                    m.set(x, y, !m.get(x, y));
                }
                m
            })
    }

    #[test]
    fn even_kernels_are_rejected() {
        let m = BinaryMask::new(4, 4);
        assert!(matches!(dilate(&m, 4), Err(Error::EvenKernel(4))));
        assert!(matches!(erode(&m, 0), Err(Error::EvenKernel(0))));
    }

    #[test]
    fn dilate_examples() {
        let empty = BinaryMask::new(10, 10);
        assert_eq!(dilate(&empty, 5).unwrap(), empty);

        let mut single = BinaryMask::new(10, 10);
        single.set(5, 5, true);
        assert_eq!(dilate(&single, 3).unwrap(), block(10, 10, 4, 4, 3, 3));

        let full = BinaryMask::full(7, 5);
        assert_eq!(dilate(&full, 3).unwrap(), full);
    }

    #[test]
    fn erode_examples() {
        let full = BinaryMask::full(6, 5);
        assert_eq!(erode(&full, 3).unwrap(), block(6, 5, 1, 1, 4, 3));

        let b = block(9, 9, 3, 3, 3, 3);
        assert_eq!(erode(&b, 3).unwrap(), block(9, 9, 4, 4, 1, 1));

        let mut single = BinaryMask::new(9, 9);
        single.set(4, 4, true);
        assert!(erode(&single, 3).unwrap().is_empty());
    }

    #[test]
    fn fill_holes_examples() {
        let ring = BinaryMask::from_ascii(&[
            ".......",
            ".#####.",
            ".#...#.",
            ".#...#.",
            ".#...#.",
            ".#####.",
            ".......",
        ]);
        let solid = block(7, 7, 1, 1, 5, 5);
        assert_eq!(fill_holes(&ring, 9, Connectivity::Eight), solid);
        assert_eq!(fill_holes(&ring, 2, Connectivity::Eight), ring);

        // Background that reaches the border is never a hole.
        let cup = BinaryMask::from_ascii(&["#...#", "#...#", "#####"]);
        assert_eq!(fill_holes(&cup, 1000, Connectivity::Eight), cup);
    }

    #[test]
    fn remove_small_components_examples() {
        let mut m = block(20, 20, 10, 10, 10, 5);
        for x in 0..3 {
            m.set(x, 0, true);
        }
        let big_only = block(20, 20, 10, 10, 10, 5);
        assert_eq!(remove_small_components(&m, 10, Connectivity::Eight), big_only);
        assert_eq!(remove_small_components(&m, 0, Connectivity::Eight), m);
        // Exactly at the threshold survives.
        assert_eq!(remove_small_components(&m, 3, Connectivity::Eight), m);
        assert_eq!(remove_small_components(&m, 4, Connectivity::Eight), big_only);
    }

    #[test]
    fn refine_empty_is_empty() {
        let m = BinaryMask::new(16, 16);
        assert_eq!(refine_layer(&m, &RefineParams::default()).unwrap(), m);
    }

    #[test]
    fn refine_strips_salt_noise_and_keeps_the_blob() {
        let blob = block(32, 32, 8, 10, 14, 12);
        let mut noisy = blob.clone();
        for (x, y) in [(1, 1), (28, 3), (3, 27), (29, 29), (16, 2), (2, 16)] {
            noisy.set(x, y, true);
        }
        let params = RefineParams::default();
        let refined = refine_layer(&noisy, &params).unwrap();
        assert_eq!(refined, naive_refine(&noisy, &params));
        assert_eq!(refined, blob);
    }

    #[test]
    fn refine_keeps_a_clean_convex_blob() {
        let blob = block(32, 32, 6, 6, 16, 10);
        let params = RefineParams::default();
        let refined = refine_layer(&blob, &params).unwrap();
        assert_eq!(refined, naive_refine(&blob, &params));
        assert_eq!(refined, blob);
    }

    #[test]
    fn area_fraction_resolution() {
        assert_eq!(AreaThreshold::Fraction(0.001).resolve(1024 * 1024), 1049);
        assert_eq!(AreaThreshold::Pixels(7).resolve(10), 7);
    }

    proptest! {
        #[test]
        fn separable_morphology_matches_direct_windows(m in arb_mask(14), k in prop::sample::select(vec![1usize, 3, 5, 7])) {
            prop_assert_eq!(dilate(&m, k).unwrap(), naive_morph(&m, k, false));
            prop_assert_eq!(erode(&m, k).unwrap(), naive_morph(&m, k, true));
        }

        #[test]
        fn dilation_and_erosion_are_monotone(a in arb_mask(12), extra in any::<u64>(), k in prop::sample::select(vec![3usize, 5])) {
            // b is a superset of a
            let mut b = a.clone();
            for (i, px) in b.as_mut_slice().iter_mut().enumerate() {
                if extra >> (i % 64) & 1 == 1 { *px = true; }
            }
            prop_assert!(dilate(&a, k).unwrap().is_subset_of(&dilate(&b, k).unwrap()));
            prop_assert!(erode(&a, k).unwrap().is_subset_of(&erode(&b, k).unwrap()));
            prop_assert!(a.is_subset_of(&dilate(&a, k).unwrap()));
            prop_assert!(erode(&a, k).unwrap().is_subset_of(&a));
        }

        #[test]
        fn erosion_is_dual_to_dilation_away_from_the_border(m in arb_mask(14), k in prop::sample::select(vec![3usize, 5])) {
            // Outside pixels are background for both operators, so duality only
            // holds where the window stays inside the image.
            let r = k / 2;
            let e = erode(&m, k).unwrap();
            let d = dilate(&m.complement(), k).unwrap().complement();
            for y in r..m.height().saturating_sub(r) {
                for x in r..m.width().saturating_sub(r) {
                    prop_assert_eq!(e.get(x, y), d.get(x, y));
                }
            }
        }

        #[test]
        fn fill_and_remove_are_idempotent(m in arb_mask(16), area in 0usize..20, four in any::<bool>()) {
            let c = if four { Connectivity::Four } else { Connectivity::Eight };
            let f = fill_holes(&m, area, c);
            prop_assert_eq!(fill_holes(&f, area, c), f.clone());
            prop_assert_eq!(&f, &naive_fill(&m, area, c));
            let r = remove_small_components(&m, area, c);
            prop_assert_eq!(remove_small_components(&r, area, c), r.clone());
            prop_assert_eq!(&r, &naive_remove(&m, area, c));
        }

        #[test]
        fn refine_matches_pixel_oracle(m in arb_scene()) {
            let params = RefineParams {
                max_hole_area: AreaThreshold::Pixels(6),
                min_component_area: AreaThreshold::Pixels(5),
                ..RefineParams::default()
            };
            prop_assert_eq!(refine_layer(&m, &params).unwrap(), naive_refine(&m, &params));
        }

        #[test]
        fn refine_stays_inside_closing_support(m in arb_scene(), hole in 0u64..40) {
            let support = dilate(&m, 5).unwrap();
            // Without hole filling the output never leaves dilate(original).
            let no_fill = RefineParams { max_hole_area: AreaThreshold::Pixels(0), ..RefineParams::default() };
            prop_assert!(refine_layer(&m, &no_fill).unwrap().is_subset_of(&support));
            // Filled holes can reach further, but only into enclosed regions of that support.
            let params = RefineParams { max_hole_area: AreaThreshold::Pixels(hole), ..RefineParams::default() };
            let bound = fill_holes(&support, hole as usize, params.connectivity);
            prop_assert!(refine_layer(&m, &params).unwrap().is_subset_of(&bound));
        }
    }
}
