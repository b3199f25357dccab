//! 8-connected component extraction.

use super::frame::BinaryFrame;

/// A connected foreground region. Bounds are inclusive; `mask` covers the
/// bounding box row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Blob {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
    pub area: usize,
    pub mask: Vec<bool>,
    pub pixels: Vec<(usize, usize)>,
}

impl Blob {
    pub fn width(&self) -> usize {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0 + 1
    }

    pub fn centroid(&self) -> (f64, f64) {
        let n = self.pixels.len() as f64;
        let sx: usize = self.pixels.iter().map(|p| p.0).sum();
        let sy: usize = self.pixels.iter().map(|p| p.1).sum();
        (sx as f64 / n, sy as f64 / n)
    }

    pub fn touches_border(&self, width: usize, height: usize) -> bool {
        self.x0 == 0 || self.y0 == 0 || self.x1 + 1 == width || self.y1 + 1 == height
    }

    /// The blob alone on an otherwise empty frame.
    pub fn to_binary(&self, width: usize, height: usize) -> BinaryFrame {
        let mut b = BinaryFrame::empty(width, height);
        for &(x, y) in &self.pixels {
            b.set(x, y, true);
        }
        b
    }
}

/// Labels 8-connected foreground regions, drops those under `min_area`
/// pixels and returns the rest sorted by leftmost column (then top row).
pub fn extract_contours(b: &BinaryFrame, min_area: usize) -> Vec<Blob> {
    let (w, h) = (b.width, b.height);
    let mut visited = vec![false; w * h];
    let mut blobs = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !b.bits[start] || visited[start] {
            continue;
        }
        visited[start] = true;
        stack.push(start);
        let mut pixels = Vec::new();
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            pixels.push((x, y));
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let j = ny * w + nx;
                    if b.bits[j] && !visited[j] {
                        visited[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        if pixels.len() < min_area {
            continue;
        }
        pixels.sort_unstable_by_key(|&(x, y)| (y, x));
        let x0 = pixels.iter().map(|p| p.0).min().unwrap_or(0);
        let x1 = pixels.iter().map(|p| p.0).max().unwrap_or(0);
        let y0 = pixels.iter().map(|p| p.1).min().unwrap_or(0);
        let y1 = pixels.iter().map(|p| p.1).max().unwrap_or(0);
        let bw = x1 - x0 + 1;
        let mut mask = vec![false; bw * (y1 - y0 + 1)];
        for &(x, y) in &pixels {
            mask[(y - y0) * bw + (x - x0)] = true;
        }
        blobs.push(Blob { x0, y0, x1, y1, area: pixels.len(), mask, pixels });
    }
    blobs.sort_by_key(|bl| (bl.x0, bl.y0));
    blobs
}
