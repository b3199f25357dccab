use std::fmt::Write as _;

/// Grayscale image, row-major, 0 = black.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub width: usize,
    pub height: usize,
    pub intensities: Vec<u8>,
}

impl Frame {
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self { width, height, intensities: vec![value; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut intensities = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                intensities.push(f(x, y));
            }
        }
        Self { width, height, intensities }
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.intensities[y * self.width + x]
    }

    /// Adds a constant brightness offset, saturating at 0 and 255.
    pub fn offset(&self, b: i32) -> Frame {
        Frame {
            intensities: self
                .intensities
                .iter()
                .map(|&v| (v as i32 + b).clamp(0, 255) as u8)
                .collect(),
            ..*self
        }
    }

    /// Plain (P2) PGM.
    pub fn to_pgm(&self) -> String {
        let mut out = format!("P2\n{} {}\n255\n", self.width, self.height);
        for row in self.intensities.chunks(self.width.max(1)) {
            let line: Vec<String> = row.iter().map(u8::to_string).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }
}

/// Thresholded image; `true` marks foreground (line or ink).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryFrame {
    pub width: usize,
    pub height: usize,
    pub bits: Vec<bool>,
}

impl BinaryFrame {
    pub fn empty(width: usize, height: usize) -> Self {
        Self { width, height, bits: vec![false; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self { width, height, bits }
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Foreground rendered black on white.
    pub fn to_frame(&self) -> Frame {
        Frame {
            width: self.width,
            height: self.height,
            intensities: self.bits.iter().map(|&b| if b { 0 } else { 255 }).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_header_and_rows() {
        let f = Frame::from_fn(3, 2, |x, y| (x + 10 * y) as u8);
        assert_eq!(f.to_pgm(), "P2\n3 2\n255\n0 1 2\n10 11 12\n");
    }

    #[test]
    fn offset_saturates() {
        let f = Frame::from_fn(2, 1, |x, _| if x == 0 { 10 } else { 250 });
        assert_eq!(f.offset(20).intensities, vec![30, 255]);
        assert_eq!(f.offset(-20).intensities, vec![0, 230]);
    }
}
