use std::cell::RefCell;
use std::ops::Range;
use std::rc::Rc;

use crate::geom::Point2;

use super::camera::{check_monotone, distort_point};
use super::frame::{BinaryFrame, Frame};
use super::VisionError;

/// Default gap between the frame mean and the foreground threshold.
pub const DEFAULT_BINARIZE_MARGIN: u8 = 40;

/// Marks pixels darker than `mean(f) - margin` as foreground.
///
/// The comparison runs in integers (`n * v < sum - n * margin`), so adding a
/// constant to every pixel leaves the result bit-identical as long as
/// nothing clips.
pub fn adaptive_binarize(f: &Frame, margin: u8) -> BinaryFrame {
    let n = f.intensities.len() as i64;
    let sum: i64 = f.intensities.iter().map(|&v| v as i64).sum();
    let bound = sum - n * margin as i64;
    BinaryFrame {
        width: f.width,
        height: f.height,
        bits: f.intensities.iter().map(|&v| n * (v as i64) < bound).collect(),
    }
}

/// For every output pixel, the source pixel under the radial model
/// `r_d = r_u (1 + k1 r_u^2)`, or `None` when it falls off the sensor.
fn remap_table(width: usize, height: usize, k1: f64) -> Rc<Vec<Option<usize>>> {
    type Cached = ((usize, usize, u64), Rc<Vec<Option<usize>>>);
    thread_local! {
        static LAST: RefCell<Option<Cached>> = const { RefCell::new(None) };
    }
    let key = (width, height, k1.to_bits());
    LAST.with_borrow_mut(|last| match last {
        Some((k, t)) if *k == key => t.clone(),
        _ => {
            let t = Rc::new(build_remap(width, height, k1));
            *last = Some((key, t.clone()));
            t
        }
    })
}

fn build_remap(width: usize, height: usize, k1: f64) -> Vec<Option<usize>> {
    let c = Point2::new(width as f64 / 2.0, height as f64 / 2.0);
    let norm = c.x.hypot(c.y);
    let mut table = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let p = Point2::new(x as f64 + 0.5, y as f64 + 0.5);
            let s = distort_point(p, c, norm, k1);
            let (sx, sy) = (s.x.floor(), s.y.floor());
            table.push(
                (sx >= 0.0 && sy >= 0.0 && sx < width as f64 && sy < height as f64)
                    .then(|| sy as usize * width + sx as usize),
            );
        }
    }
    table
}

/// Removes radial distortion by reverse mapping with nearest-neighbour
/// sampling. Pixels that map off the sensor copy the nearest edge pixel.
pub fn undistort(f: &Frame, k1: f64) -> Result<Frame, VisionError> {
    check_monotone(k1)?;
    if k1 == 0.0 {
        return Ok(f.clone());
    }
    let table = remap_table(f.width, f.height, k1);
    let c = Point2::new(f.width as f64 / 2.0, f.height as f64 / 2.0);
    let norm = c.x.hypot(c.y);
    let intensities = table
        .iter()
        .enumerate()
        .map(|(i, src)| match src {
            Some(j) => f.intensities[*j],
            None => {
                let p = Point2::new((i % f.width) as f64 + 0.5, (i / f.width) as f64 + 0.5);
                let s = distort_point(p, c, norm, k1);
                let sx = (s.x.floor().max(0.0) as usize).min(f.width - 1);
                let sy = (s.y.floor().max(0.0) as usize).min(f.height - 1);
                f.get(sx, sy)
            }
        })
        .collect();
    Ok(Frame { intensities, ..*f })
}

/// Same mapping as [`undistort`] for thresholded frames; off-sensor pixels
/// become background.
pub fn undistort_binary(b: &BinaryFrame, k1: f64) -> Result<BinaryFrame, VisionError> {
    check_monotone(k1)?;
    if k1 == 0.0 {
        return Ok(b.clone());
    }
    let table = remap_table(b.width, b.height, k1);
    Ok(BinaryFrame {
        bits: table.iter().map(|src| src.is_some_and(|j| b.bits[j])).collect(),
        ..*b
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineReading {
    /// Mean column index of line pixels in the region of interest.
    pub x: f64,
    /// Foreground count relative to a full-width line through every ROI row,
    /// capped at 1.
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentroidParams {
    pub expected_width_px: f64,
    pub min_count: usize,
}

impl Default for CentroidParams {
    fn default() -> Self {
        Self { expected_width_px: 14.0, min_count: 6 }
    }
}

pub fn line_centroid(b: &BinaryFrame, roi_rows: Range<usize>, params: &CentroidParams) -> Option<LineReading> {
    let rows = roi_rows.start.min(b.height)..roi_rows.end.min(b.height);
    let mut count = 0usize;
    let mut sum = 0usize;
    for y in rows.clone() {
        for x in 0..b.width {
            if b.get(x, y) {
                count += 1;
                sum += x;
            }
        }
    }
    if count == 0 || count < params.min_count {
        return None;
    }
    let expected = params.expected_width_px * rows.len() as f64;
    Some(LineReading {
        x: sum as f64 / count as f64,
        confidence: (count as f64 / expected).min(1.0),
    })
}
