//! Built-in 16x16 digit font and template matching.
//!
//! Every glyph touches all four sides of its box, so a blob cropped to its
//! bounding box and stretched to the template size lines up with the
//! template regardless of perspective foreshortening along either axis.

use super::contours::Blob;

pub const GLYPH_SIZE: usize = 16;

const FONT: [[&str; GLYPH_SIZE]; 8] = [
    [
        "....######......",
        "..########......",
        ".#########......",
        "##########......",
        "#####.####......",
        "####..####......",
        "......####......",
        "......####......",
        "......####......",
        "......####......",
        "......####......",
        "......####......",
        "......####......",
        "################",
        "################",
        "################",
    ],
    [
        "################",
        "################",
        "################",
        ".............###",
        ".............###",
        ".............###",
        "............####",
        "..........######",
        "........########",
        ".......########.",
        ".....########...",
        "...########.....",
        ".########.......",
        "################",
        "################",
        "################",
    ],
    [
        "################",
        "################",
        "################",
        "..........######",
        "........#######.",
        ".......#######..",
        "......##########",
        "......##########",
        "......##########",
        ".............###",
        ".............###",
        ".............###",
        ".............###",
        "################",
        "################",
        "################",
    ],
    [
        "......#######...",
        ".....########...",
        "....#########...",
        "....#####.###...",
        "...#####..###...",
        "..#####...###...",
        ".######...###...",
        "######....###...",
        "################",
        "################",
        "################",
        "..........###...",
        "..........###...",
        "..........###...",
        "..........###...",
        "..........###...",
    ],
    [
        "################",
        "################",
        "################",
        "###.............",
        "###.............",
        "###.............",
        "#############...",
        "#############...",
        "################",
        ".............###",
        ".............###",
        ".............###",
        ".............###",
        "################",
        "################",
        "################",
    ],
    [
        "######..........",
        "######..........",
        "###.............",
        "###.............",
        "###.............",
        "###.............",
        "################",
        "################",
        "################",
        "###..........###",
        "###..........###",
        "###..........###",
        "###..........###",
        "################",
        "################",
        "################",
    ],
    [
        "################",
        "################",
        "################",
        "...........#####",
        "...........#####",
        "..........#####.",
        ".........#####..",
        ".........#####..",
        "........#####...",
        ".......#####....",
        "......#####.....",
        "......#####.....",
        ".....#####......",
        "....#####.......",
        "....#####.......",
        "....####........",
    ],
    [
        "...##########...",
        "...##########...",
        "...##########...",
        "...###....###...",
        "...###....###...",
        "...###....###...",
        "################",
        "################",
        "################",
        "###..........###",
        "###..........###",
        "###..........###",
        "###..........###",
        "################",
        "################",
        "################",
    ],
];

/// Whether font cell `(col, row)` of `digit` is inked.
pub fn glyph_bit(digit: u8, col: usize, row: usize) -> bool {
    FONT[(digit - 1) as usize][row].as_bytes()[col] == b'#'
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitTemplate {
    pub digit: u8,
    /// Row-major `size * size` grid.
    pub grid: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    pub size: usize,
    pub templates: Vec<DigitTemplate>,
}

impl Default for TemplateSet {
    fn default() -> Self {
        let templates = (1..=8u8)
            .map(|digit| DigitTemplate {
                digit,
                grid: (0..GLYPH_SIZE * GLYPH_SIZE)
                    .map(|i| glyph_bit(digit, i % GLYPH_SIZE, i / GLYPH_SIZE))
                    .collect(),
            })
            .collect();
        Self { size: GLYPH_SIZE, templates }
    }
}

impl TemplateSet {
    pub fn get(&self, digit: u8) -> Option<&DigitTemplate> {
        self.templates.iter().find(|t| t.digit == digit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchParams {
    pub accept_threshold: f64,
    pub margin: f64,
}

impl Default for MatchParams {
    fn default() -> Self {
        Self { accept_threshold: 0.85, margin: 0.05 }
    }
}

/// Nearest-neighbour resample of a blob's bounding box to `n x n`.
pub fn normalize_blob(blob: &Blob, n: usize) -> Vec<bool> {
    let (w, h) = (blob.width(), blob.height());
    let mut out = Vec::with_capacity(n * n);
    for r in 0..n {
        let sy = (((r as f64 + 0.5) * h as f64 / n as f64) as usize).min(h - 1);
        for c in 0..n {
            let sx = (((c as f64 + 0.5) * w as f64 / n as f64) as usize).min(w - 1);
            out.push(blob.mask[sy * w + sx]);
        }
    }
    out
}

/// `1 - hamming / n^2` against every template, in template order.
pub fn score_all(blob: &Blob, templates: &TemplateSet) -> Vec<(u8, f64)> {
    score_grid(&normalize_blob(blob, templates.size), templates)
}

/// Scores an already normalized `n x n` grid.
pub fn score_grid(grid: &[bool], templates: &TemplateSet) -> Vec<(u8, f64)> {
    let n = templates.size;
    templates
        .templates
        .iter()
        .map(|t| {
            let diff = grid.iter().zip(&t.grid).filter(|(a, b)| a != b).count();
            (t.digit, 1.0 - diff as f64 / (n * n) as f64)
        })
        .collect()
}

/// Best-matching digit, if it clears the acceptance threshold and beats the
/// runner-up by the required margin.
pub fn match_digit(blob: &Blob, templates: &TemplateSet, params: &MatchParams) -> Option<(u8, f64)> {
    match_grid(&normalize_blob(blob, templates.size), templates, params)
}

pub fn match_grid(grid: &[bool], templates: &TemplateSet, params: &MatchParams) -> Option<(u8, f64)> {
    let scores = score_grid(grid, templates);
    let mut best: Option<(u8, f64)> = None;
    let mut runner_up = f64::NEG_INFINITY;
    for &(d, s) in &scores {
        match best {
            Some((_, bs)) if s <= bs => runner_up = runner_up.max(s),
            Some((_, bs)) => {
                runner_up = bs;
                best = Some((d, s));
            }
            None => best = Some((d, s)),
        }
    }
    let (digit, score) = best?;
    (score >= params.accept_threshold && score - runner_up >= params.margin).then_some((digit, score))
}
