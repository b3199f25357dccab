//! Synthetic camera frames: the floor seen from the cart, and digit cards
//! held in front of the lens.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::arena::{PlacardEntry, TrackMap};
use crate::geom::{segment_distance, Point2, Pose};

use super::camera::{undistort_point, CameraModel};
use super::frame::Frame;
use super::glyphs::{glyph_bit, GLYPH_SIZE};
use super::NoiseParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneStyle {
    pub floor: u8,
    pub ink: u8,
    /// Guide line width, meters.
    pub line_width: f64,
}

impl Default for SceneStyle {
    fn default() -> Self {
        Self { floor: 200, ink: 40, line_width: 0.02 }
    }
}

/// Whether ground point `p` falls on an inked cell of placard `e`.
pub fn placard_ink(e: &PlacardEntry, p: Point2) -> bool {
    PlacardFrame::new(e).ink(p)
}

/// A placard with its axes resolved, for repeated point queries.
struct PlacardFrame {
    center: Point2,
    fwd: Point2,
    right: Point2,
    len: f64,
    wid: f64,
    radius_sq: f64,
    digit: u8,
}

impl PlacardFrame {
    fn new(e: &PlacardEntry) -> Self {
        let fwd = Point2::from_heading(e.heading);
        let (len, wid) = (e.glyph_height, e.glyph_width());
        Self {
            center: e.position,
            fwd,
            right: Point2::new(fwd.y, -fwd.x),
            len,
            wid,
            radius_sq: (len * len + wid * wid) / 4.0,
            digit: e.digit,
        }
    }

    fn ink(&self, p: Point2) -> bool {
        let q = p - self.center;
        if q.dot(q) > self.radius_sq {
            return false;
        }
        let n = GLYPH_SIZE as f64;
        let row = (self.len / 2.0 - q.dot(self.fwd)) / self.len * n;
        let col = (q.dot(self.right) + self.wid / 2.0) / self.wid * n;
        if !(0.0..n).contains(&row) || !(0.0..n).contains(&col) {
            return false;
        }
        glyph_bit(self.digit, col as usize, row as usize)
    }
}

/// A guide-line segment prepared for squared-distance tests.
struct Stroke {
    a: Point2,
    d: Point2,
    inv_len_sq: f64,
}

impl Stroke {
    fn new(a: Point2, b: Point2) -> Self {
        let d = b - a;
        let l2 = d.dot(d);
        Self { a, d, inv_len_sq: if l2 > 0.0 { 1.0 / l2 } else { 0.0 } }
    }

    fn distance_sq(&self, p: Point2) -> f64 {
        let ap = p - self.a;
        let t = (ap.dot(self.d) * self.inv_len_sq).clamp(0.0, 1.0);
        let r = ap - self.d * t;
        r.dot(r)
    }
}

const TILE: usize = 8;

/// Cart-frame bounding box, `(forward, left)` ranges.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Bounds {
    f0: f64,
    f1: f64,
    l0: f64,
    l1: f64,
}

impl Bounds {
    const EMPTY: Bounds =
        Bounds { f0: f64::INFINITY, f1: f64::NEG_INFINITY, l0: f64::INFINITY, l1: f64::NEG_INFINITY };

    fn add(&mut self, f: f64, l: f64) {
        self.f0 = self.f0.min(f);
        self.f1 = self.f1.max(f);
        self.l0 = self.l0.min(l);
        self.l1 = self.l1.max(l);
    }

    fn grown(mut self, pad: f64) -> Self {
        self.f0 -= pad;
        self.f1 += pad;
        self.l0 -= pad;
        self.l1 += pad;
        self
    }

    fn overlaps(&self, o: &Bounds) -> bool {
        self.f0 <= o.f1 && o.f0 <= self.f1 && self.l0 <= o.l1 && o.l0 <= self.l1
    }
}

#[derive(Debug, Clone)]
struct Tile {
    x: std::ops::Range<usize>,
    y: std::ops::Range<usize>,
    bounds: Bounds,
}

/// Ground renderer with the per-pixel rays precomputed. The camera is rigid
/// on the cart, so each pixel always sees the same cart-frame floor point.
#[derive(Debug, Clone)]
pub struct GroundRenderer {
    cam: CameraModel,
    style: SceneStyle,
    rays: Vec<Option<(f64, f64)>>,
    tiles: Vec<Tile>,
    reach: f64,
}

impl GroundRenderer {
    /// Pixels are sampled through the distortion of `cam.distortion_k1`.
    pub fn new(cam: CameraModel, style: SceneStyle) -> Self {
        let (w, h) = (cam.width, cam.height);
        let mut rays = Vec::with_capacity(w * h);
        let mut reach: f64 = 0.0;
        for y in 0..h {
            for x in 0..w {
                let ideal = cam.undistort_point(Point2::new(x as f64 + 0.5, y as f64 + 0.5));
                let g = cam.ground_point(ideal.x, ideal.y);
                if let Some((f, l)) = g {
                    reach = reach.max(f.hypot(l));
                }
                rays.push(g);
            }
        }
        let mut tiles = Vec::new();
        for ty in (0..h).step_by(TILE) {
            for tx in (0..w).step_by(TILE) {
                let (x, y) = (tx..(tx + TILE).min(w), ty..(ty + TILE).min(h));
                let mut bounds = Bounds::EMPTY;
                for py in y.clone() {
                    for px in x.clone() {
                        if let Some((f, l)) = rays[py * w + px] {
                            bounds.add(f, l);
                        }
                    }
                }
                if bounds.f0.is_finite() {
                    tiles.push(Tile { x, y, bounds });
                }
            }
        }
        Self { cam, style, rays, tiles, reach }
    }

    pub fn camera(&self) -> &CameraModel {
        &self.cam
    }

    pub fn style(&self) -> &SceneStyle {
        &self.style
    }

    /// Noise-free foreground mask of the view from `pose`.
    pub fn ink_mask(&self, map: &TrackMap, pose: &Pose) -> Vec<bool> {
        let origin = pose.position();
        let fwd = pose.forward();
        let left = fwd.perp();
        let half = self.style.line_width / 2.0;
        let to_cart = |p: Point2| {
            let q = p - origin;
            (q.dot(fwd), q.dot(left))
        };

        let strokes: Vec<(Stroke, Bounds)> = (0..map.edges.len())
            .map(|i| map.segment(crate::arena::EdgeId(i)))
            .filter(|&(a, b)| segment_distance(origin, a, b) <= self.reach + half)
            .map(|(a, b)| {
                let mut bb = Bounds::EMPTY;
                for p in [a, b] {
                    let (f, l) = to_cart(p);
                    bb.add(f, l);
                }
                (Stroke::new(a, b), bb.grown(half))
            })
            .collect();
        let placards: Vec<(PlacardFrame, Bounds)> = map
            .placard_entries()
            .filter(|e| e.position.distance(origin) <= self.reach + e.glyph_height)
            .map(|e| {
                let pf = PlacardFrame::new(e);
                let (f, l) = to_cart(e.position);
                let r = pf.radius_sq.sqrt();
                (pf, Bounds { f0: f - r, f1: f + r, l0: l - r, l1: l + r })
            })
            .collect();
        let half_sq = half * half;

        let w = self.cam.width;
        let mut mask = vec![false; w * self.cam.height];
        let mut near_strokes = Vec::new();
        let mut near_placards = Vec::new();
        for tile in &self.tiles {
            near_strokes.clear();
            near_placards.clear();
            near_strokes.extend(strokes.iter().filter(|s| s.1.overlaps(&tile.bounds)).map(|s| &s.0));
            near_placards.extend(placards.iter().filter(|p| p.1.overlaps(&tile.bounds)).map(|p| &p.0));
            if near_strokes.is_empty() && near_placards.is_empty() {
                continue;
            }
            for y in tile.y.clone() {
                for x in tile.x.clone() {
                    let i = y * w + x;
                    let Some((f, l)) = self.rays[i] else { continue };
                    let p = origin + fwd * f + left * l;
                    mask[i] = near_strokes.iter().any(|s| s.distance_sq(p) <= half_sq)
                        || near_placards.iter().any(|e| e.ink(p));
                }
            }
        }
        mask
    }

    pub fn render<R: Rng + ?Sized>(
        &self,
        map: &TrackMap,
        pose: &Pose,
        noise: &NoiseParams,
        rng: &mut R,
    ) -> Frame {
        let mask = self.ink_mask(map, pose);
        shade(&mask, self.cam.width, self.cam.height, &self.style, noise, rng)
    }
}

/// Renders the floor view; distortion comes from `noise.k1`, overriding the
/// camera's own coefficient.
pub fn render<R: Rng + ?Sized>(
    map: &TrackMap,
    pose: &Pose,
    cam: &CameraModel,
    noise: &NoiseParams,
    rng: &mut R,
) -> Frame {
    GroundRenderer::new(cam.with_k1(noise.k1), SceneStyle::default()).render(map, pose, noise, rng)
}

fn shade<R: Rng + ?Sized>(
    mask: &[bool],
    width: usize,
    height: usize,
    style: &SceneStyle,
    noise: &NoiseParams,
    rng: &mut R,
) -> Frame {
    let level = |v: u8| (v as f64 + noise.brightness).round().clamp(0.0, 255.0) as u8;
    if noise.sigma <= 0.0 {
        let (ink, floor) = (level(style.ink), level(style.floor));
        let intensities = mask.iter().map(|&m| if m { ink } else { floor }).collect();
        return Frame { width, height, intensities };
    }
    let normal = Normal::new(0.0, noise.sigma).expect("finite sigma");
    let intensities = mask
        .iter()
        .map(|&ink| {
            let base = if ink { style.ink } else { style.floor } as f64 + noise.brightness;
            (base + normal.sample(rng)).round().clamp(0.0, 255.0) as u8
        })
        .collect();
    Frame { width, height, intensities }
}

/// A digit card filling part of the view, facing the lens squarely.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CardView {
    pub width: usize,
    pub height: usize,
    /// Pixels per glyph cell.
    pub scale: f64,
    pub dx: i32,
    pub dy: i32,
}

impl Default for CardView {
    fn default() -> Self {
        Self { width: 64, height: 64, scale: 2.5, dx: 0, dy: 0 }
    }
}

/// Renders a card showing `digit`, translated by `(dx, dy)` pixels, through
/// radial distortion `noise.k1`.
pub fn render_card<R: Rng + ?Sized>(
    digit: u8,
    view: &CardView,
    noise: &NoiseParams,
    rng: &mut R,
) -> Frame {
    let c = Point2::new(view.width as f64 / 2.0, view.height as f64 / 2.0);
    let norm = c.x.hypot(c.y);
    let side = GLYPH_SIZE as f64 * view.scale;
    let left = c.x + view.dx as f64 - side / 2.0;
    let top = c.y + view.dy as f64 - side / 2.0;
    let mut mask = Vec::with_capacity(view.width * view.height);
    for y in 0..view.height {
        for x in 0..view.width {
            let p = undistort_point(Point2::new(x as f64 + 0.5, y as f64 + 0.5), c, norm, noise.k1);
            let gx = (p.x - left) / view.scale;
            let gy = (p.y - top) / view.scale;
            let inside = (0.0..GLYPH_SIZE as f64).contains(&gx) && (0.0..GLYPH_SIZE as f64).contains(&gy);
            mask.push(inside && glyph_bit(digit, gx as usize, gy as usize));
        }
    }
    shade(&mask, view.width, view.height, &SceneStyle::default(), noise, rng)
}
