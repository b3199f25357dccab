//! Camera simulation and the recognition pipeline.
//!
//! A frame goes through adaptive binarization, undistortion and 8-connected
//! component extraction. Components that lie fully inside the frame are
//! matched against the digit templates; the largest unmatched component
//! reaching below the line region of interest is taken as the guide line.
//!
//! Floor frames are matched after rectifying each component onto the ground
//! plane, which undoes the perspective taper of a placard lying flat. Card
//! frames face the lens and are matched on their bounding box directly.

mod camera;
mod contours;
pub mod corpus;
mod frame;
mod glyphs;
mod pipeline;
mod render;

use std::ops::Range;

use thiserror::Error;

pub use camera::CameraModel;
pub use contours::{extract_contours, Blob};
pub use frame::{BinaryFrame, Frame};
pub use glyphs::{
    glyph_bit, match_digit, match_grid, normalize_blob, score_all, score_grid, DigitTemplate, MatchParams, TemplateSet,
    GLYPH_SIZE,
};
pub use pipeline::{
    adaptive_binarize, line_centroid, undistort, undistort_binary, CentroidParams, LineReading,
    DEFAULT_BINARIZE_MARGIN,
};
pub use render::{placard_ink, render, render_card, CardView, GroundRenderer, SceneStyle};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VisionError {
    #[error("distortion k1 = {0} makes the radial map non-monotone on the image diagonal")]
    NonMonotoneDistortion(f64),
    #[error("invalid camera: {0}")]
    InvalidCamera(&'static str),
    #[error("invalid corpus grid: {0}")]
    InvalidGrid(&'static str),
}

/// Image disturbances: global brightness offset, per-pixel Gaussian noise
/// and lens distortion.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseParams {
    pub brightness: f64,
    pub sigma: f64,
    pub k1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisionParams {
    pub binarize_margin: u8,
    pub min_area: usize,
    pub matching: MatchParams,
    pub centroid: CentroidParams,
    /// Rows averaged for the line centroid.
    pub roi_rows: Range<usize>,
    /// Length of a floor placard glyph along the approach direction, meters.
    pub glyph_height_m: f64,
}

impl Default for VisionParams {
    fn default() -> Self {
        Self {
            binarize_margin: DEFAULT_BINARIZE_MARGIN,
            min_area: 9,
            matching: MatchParams::default(),
            centroid: CentroidParams::default(),
            roi_rows: 60..96,
            glyph_height_m: 0.06,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DigitDetection {
    pub digit: u8,
    pub image_x: f64,
    pub image_y: f64,
    /// Range estimate from the blob height, meters.
    pub range_z: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameAnalysis {
    /// Sorted by `image_x`.
    pub detections: Vec<DigitDetection>,
    pub line: Option<LineReading>,
}

/// Pinhole range from blob height, `glyph_height * focal / height_px`.
/// Foreshortening of a floor glyph is ignored, so the value overstates the
/// true distance; it only needs to shrink monotonically on approach.
pub fn range_from_height(cam: &CameraModel, glyph_height_m: f64, blob_height_px: usize) -> f64 {
    glyph_height_m * cam.focal_px() / blob_height_px as f64
}

/// How the matcher maps a component onto the template grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViewKind {
    /// Downward view of the floor; components are rectified to the ground.
    Floor,
    /// A card held square to the lens.
    Card,
}

/// Resamples `blob` onto an `n x n` grid laid over its ground-plane extent.
/// The extent is taken over pixel corners. Row 0 is the far end, column 0
/// the left side. `None` if any pixel of the
/// blob lies at or above the horizon.
pub fn rectify_blob(blob: &Blob, cam: &CameraModel, n: usize) -> Option<Vec<bool>> {
    let mut fwd = (f64::INFINITY, f64::NEG_INFINITY);
    let mut left = (f64::INFINITY, f64::NEG_INFINITY);
    // Only each row's outermost pixels can set the extent.
    let mut row_span = vec![(usize::MAX, 0usize); blob.height()];
    for &(x, y) in &blob.pixels {
        let s = &mut row_span[y - blob.y0];
        *s = (s.0.min(x), s.1.max(x));
    }
    for (dy, &(x0, x1)) in row_span.iter().enumerate() {
        if x0 == usize::MAX {
            continue;
        }
        let y = blob.y0 + dy;
        for (u, v) in [(x0, y), (x1 + 1, y), (x0, y + 1), (x1 + 1, y + 1)] {
            let (f, l) = cam.ground_point(u as f64, v as f64)?;
            fwd = (fwd.0.min(f), fwd.1.max(f));
            left = (left.0.min(l), left.1.max(l));
        }
    }
    let w = blob.width();
    let (sp, cp) = cam.pitch.sin_cos();
    let focal = cam.focal_px();
    let c = cam.center();
    const SUB: usize = 3;
    let step = 1.0 / (n * SUB) as f64;
    // Sample rows share a forward distance, hence one image row and one
    // depth; only the column varies along a row.
    let sample_rows: Vec<Option<(usize, f64)>> = (0..n * SUB)
        .map(|i| {
            let dx = fwd.1 - (i as f64 + 0.5) * step * (fwd.1 - fwd.0) - cam.forward_offset;
            let depth = dx * cp + cam.mount_height * sp;
            if depth <= 1e-9 {
                return None;
            }
            let py = (c.y + focal * (cam.mount_height * cp - dx * sp) / depth).floor();
            (py >= blob.y0 as f64 && py <= blob.y1 as f64).then(|| (py as usize - blob.y0, focal / depth))
        })
        .collect();
    let sample_cols: Vec<f64> =
        (0..n * SUB).map(|j| left.1 - (j as f64 + 0.5) * step * (left.1 - left.0)).collect();
    let inked = |row: Option<(usize, f64)>, l: f64| {
        row.is_some_and(|(ry, scale)| {
            let px = (c.x - scale * l).floor();
            px >= blob.x0 as f64 && px <= blob.x1 as f64 && blob.mask[ry * w + (px as usize - blob.x0)]
        })
    };
    let mut out = Vec::with_capacity(n * n);
    for r in 0..n {
        for col in 0..n {
            let mut votes = 0;
            for &row in &sample_rows[r * SUB..(r + 1) * SUB] {
                for &l in &sample_cols[col * SUB..(col + 1) * SUB] {
                    votes += inked(row, l) as usize;
                }
            }
            out.push(2 * votes > SUB * SUB);
        }
    }
    Some(out)
}

/// Runs the full pipeline once and reports both placards and the line.
pub fn analyze_frame(
    f: &Frame,
    cam: &CameraModel,
    templates: &TemplateSet,
    params: &VisionParams,
    view: ViewKind,
) -> Result<FrameAnalysis, VisionError> {
    let b = adaptive_binarize(f, params.binarize_margin);
    let b = undistort_binary(&b, cam.distortion_k1)?;
    let blobs = extract_contours(&b, params.min_area);
    let mut detections = Vec::new();
    let mut line_blob: Option<&Blob> = None;
    for blob in &blobs {
        if !blob.touches_border(b.width, b.height) {
            let grid = match view {
                ViewKind::Floor => rectify_blob(blob, cam, templates.size),
                ViewKind::Card => Some(normalize_blob(blob, templates.size)),
            };
            if let Some((digit, score)) =
                grid.and_then(|g| match_grid(&g, templates, &params.matching))
            {
                let (cx, cy) = blob.centroid();
                let range_z = range_from_height(cam, params.glyph_height_m, blob.height());
                detections.push(DigitDetection { digit, image_x: cx, image_y: cy, range_z, score });
                continue;
            }
        }
        if blob.y1 + 1 >= params.roi_rows.end.min(b.height)
            && line_blob.is_none_or(|l| blob.area > l.area)
        {
            line_blob = Some(blob);
        }
    }
    detections.sort_by(|a, b| a.image_x.total_cmp(&b.image_x));
    let line = line_blob.and_then(|blob| {
        line_centroid(&blob.to_binary(b.width, b.height), params.roi_rows.clone(), &params.centroid)
    });
    Ok(FrameAnalysis { detections, line })
}

/// Digit placards visible in `f`, left to right.
pub fn detect_placards(
    f: &Frame,
    cam: &CameraModel,
    templates: &TemplateSet,
    params: &VisionParams,
) -> Result<Vec<DigitDetection>, VisionError> {
    Ok(analyze_frame(f, cam, templates, params, ViewKind::Floor)?.detections)
}

/// Normalized steering error `(x - w/2) / (w/2)` of a line reading.
pub fn normalized_offset(reading: &LineReading, width: usize) -> f64 {
    let half = width as f64 / 2.0;
    (reading.x - half) / half
}
