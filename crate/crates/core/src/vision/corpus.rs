//! Labelled digit corpus over a grid of translations and image disturbances.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::comms::split_seed;

use super::{
    analyze_frame, render_card, CameraModel, CardView, NoiseParams, TemplateSet, ViewKind,
    VisionError, VisionParams,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusGrid {
    pub digits: Vec<u8>,
    /// Pixel shifts applied independently along x and y.
    pub translations: Vec<i32>,
    pub k1: Vec<f64>,
    pub brightness: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl Default for CorpusGrid {
    fn default() -> Self {
        Self {
            digits: (1..=8).collect(),
            translations: vec![-2, -1, 0, 1, 2],
            k1: vec![0.0, 0.05, 0.1],
            brightness: vec![-30.0, 0.0, 30.0],
            sigma: vec![0.0, 8.0],
        }
    }
}

impl CorpusGrid {
    pub fn len(&self) -> usize {
        self.digits.len()
            * self.translations.len().pow(2)
            * self.k1.len()
            * self.brightness.len()
            * self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<(), VisionError> {
        if self.is_empty() {
            return Err(VisionError::InvalidGrid("every axis needs at least one value"));
        }
        if self.digits.iter().any(|d| !(1..=8).contains(d)) {
            return Err(VisionError::InvalidGrid("digits must lie in 1..=8"));
        }
        for &k in &self.k1 {
            super::camera::check_monotone(k)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusSample {
    pub label: u8,
    pub predicted: Option<u8>,
    pub score: f64,
    pub k1: f64,
    pub brightness: f64,
    pub noise: f64,
}

impl CorpusSample {
    pub fn correct(&self) -> bool {
        self.predicted == Some(self.label)
    }
}

/// `label,predicted,score,k1,brightness,noise`; a rejected sample prints
/// `none` as its prediction.
impl fmt::Display for CorpusSample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let predicted = self.predicted.map_or_else(|| "none".to_string(), |d| d.to_string());
        write!(
            f,
            "{},{},{:.4},{},{},{}",
            self.label, predicted, self.score, self.k1, self.brightness, self.noise
        )
    }
}

/// Renders and classifies every grid point. Each sample draws its pixel
/// noise from its own seeded stream.
pub fn generate_corpus(
    grid: &CorpusGrid,
    seed: u64,
    view: &CardView,
    templates: &TemplateSet,
    params: &VisionParams,
) -> Result<Vec<CorpusSample>, VisionError> {
    grid.validate()?;
    let mut out = Vec::with_capacity(grid.len());
    let mut index = 0u64;
    for &label in &grid.digits {
        for &dy in &grid.translations {
            for &dx in &grid.translations {
                for &k1 in &grid.k1 {
                    for &brightness in &grid.brightness {
                        for &sigma in &grid.sigma {
                            let noise = NoiseParams { brightness, sigma, k1 };
                            let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, index));
                            index += 1;
                            let frame =
                                render_card(label, &CardView { dx, dy, ..*view }, &noise, &mut rng);
                            let cam = CameraModel {
                                width: view.width,
                                height: view.height,
                                distortion_k1: k1,
                                ..CameraModel::default()
                            };
                            let analysis = analyze_frame(&frame, &cam, templates, params, ViewKind::Card)?;
                            let best = analysis
                                .detections
                                .iter()
                                .max_by(|a, b| a.score.total_cmp(&b.score));
                            out.push(CorpusSample {
                                label,
                                predicted: best.map(|d| d.digit),
                                score: best.map_or(0.0, |d| d.score),
                                k1,
                                brightness,
                                noise: sigma,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

pub fn accuracy(samples: &[CorpusSample]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().filter(|s| s.correct()).count() as f64 / samples.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_size() {
        assert_eq!(CorpusGrid::default().len(), 8 * 25 * 3 * 3 * 2);
    }

    #[test]
    fn empty_axis_rejected() {
        let g = CorpusGrid { sigma: vec![], ..CorpusGrid::default() };
        assert!(g.is_empty());
        assert_eq!(g.validate(), Err(VisionError::InvalidGrid("every axis needs at least one value")));
        let g = CorpusGrid { digits: vec![0], ..CorpusGrid::default() };
        assert!(g.validate().is_err());
    }

    #[test]
    fn sample_line() {
        let s = CorpusSample { label: 3, predicted: None, score: 0.5, k1: 0.05, brightness: -30.0, noise: 8.0 };
        assert_eq!(s.to_string(), "3,none,0.5000,0.05,-30,8");
        assert!(!s.correct());
    }

    #[test]
    fn small_grid_is_reproducible() {
        let g = CorpusGrid {
            digits: vec![1, 8],
            translations: vec![0, 2],
            k1: vec![0.1],
            brightness: vec![30.0],
            sigma: vec![8.0],
        };
        let run = || {
            generate_corpus(&g, 5, &CardView::default(), &TemplateSet::default(), &VisionParams::default()).unwrap()
        };
        let a = run();
        assert_eq!(a.len(), 8);
        assert_eq!(a, run());
        assert_eq!(accuracy(&a), 1.0);
    }
}
