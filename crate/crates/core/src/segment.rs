//! Stage two of the tracker: turn the detected box into a foreground
//! probability map over the search patch, binarize it and clean the mask so
//! a rotated box can be fitted.
//!
//! Two backends exist. `histogram` builds color statistics from the template
//! patch and assigns per-pixel posteriors; it needs no training and is the
//! functional default. `neural` is the transposed-convolution refinement
//! cascade with skip additions from the backbone pyramid; it is fully wired
//! and deterministic but runs on seeded (untrained) weights, so it is
//! exercised structurally rather than relied on for quality.

use crate::backbone::FeaturePyramid;
use crate::error::{Error, Result};
use crate::geometry::AxisBox;
use crate::tensor::{self, ConvWeights, Tensor};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Per-pixel foreground probability over a patch; all values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMap {
    pub height: usize,
    pub width: usize,
    values: Vec<f32>,
}

impl ProbMap {
    pub fn new(height: usize, width: usize, values: Vec<f32>) -> Result<ProbMap> {
        if values.len() != height * width {
            return Err(Error::Shape(format!(
                "prob map length {} != {}x{}",
                values.len(),
                height,
                width
            )));
        }
        if !values.iter().all(|v| (0.0..=1.0).contains(v)) {
            return Err(Error::Argument("probability outside [0, 1]".into()));
        }
        Ok(ProbMap {
            height,
            width,
            values,
        })
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f32 {
        self.values[r * self.width + c]
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }
}

/// Binary segmentation mask with the same extent as its source map.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    pub height: usize,
    pub width: usize,
    bits: Vec<bool>,
}

impl Mask {
    pub fn empty(height: usize, width: usize) -> Mask {
        Mask {
            height,
            width,
            bits: vec![false; height * width],
        }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.bits[r * self.width + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        self.bits[r * self.width + c] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Binary PGM (P5, maxval 1) encoding for inspection.
    pub fn to_pgm_bytes(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n1\n", self.width, self.height).into_bytes();
        out.extend(self.bits.iter().map(|&b| u8::from(b)));
        out
    }

    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        w.write_all(&self.to_pgm_bytes())
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegBackend {
    Neural,
    Histogram,
}

/// Segmentation stage configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SegConfig {
    pub backend: SegBackend,
    /// Strict binarization threshold: probability must exceed it.
    pub threshold: f32,
    /// The detected box is expanded by this fraction of its extent on every
    /// side before gating.
    pub box_margin: f64,
    pub keep_largest_component: bool,
    /// Histogram bins per color channel (joint bins^3 histogram).
    pub bins: usize,
    /// Seed for the neural refinement weights.
    pub seed: u64,
    /// Channel width of the refinement cascade.
    pub refine_width: usize,
}

impl Default for SegConfig {
    fn default() -> Self {
        SegConfig {
            backend: SegBackend::Histogram,
            threshold: 0.5,
            box_margin: 0.25,
            keep_largest_component: true,
            bins: 8,
            seed: 0,
            refine_width: 32,
        }
    }
}

impl SegConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Config(format!(
                "threshold {} outside (0, 1)",
                self.threshold
            )));
        }
        if self.bins == 0 {
            return Err(Error::Config("bins must be >= 1".into()));
        }
        if self.refine_width == 0 {
            return Err(Error::Config("refine_width must be >= 1".into()));
        }
        Ok(())
    }
}

fn seeded_weights(rng: &mut ChaCha8Rng, out_ch: usize, in_ch: usize, kernel: usize) -> ConvWeights {
    let s = 1.0 / ((in_ch * kernel * kernel) as f32).sqrt();
    let values = (0..out_ch * in_ch * kernel * kernel)
        .map(|_| rng.random_range(-s..=s))
        .collect();
    ConvWeights::new(out_ch, in_ch, kernel, values, vec![0.0; out_ch])
        .expect("generated weight dimensions are consistent")
}

/// Seeded weights of the refinement cascade, matched to one backbone layout.
#[derive(Debug, Clone)]
pub struct RefineWeights {
    seed_proj: ConvWeights,
    skip_projs: Vec<ConvWeights>,
    deconvs: Vec<ConvWeights>,
    final_conv: ConvWeights,
}

impl RefineWeights {
    /// Build for a backbone with the given per-stage channel counts and total
    /// stride. The seed map is single-channel; each non-deepest stage gets a
    /// 1x1 projection; one x2 transposed convolution per stride doubling.
    pub fn build(
        seed: u64,
        stage_channels: &[usize],
        total_stride: usize,
        width: usize,
    ) -> Result<RefineWeights> {
        if stage_channels.is_empty() {
            return Err(Error::Config("refinement needs at least one stage".into()));
        }
        if !total_stride.is_power_of_two() {
            return Err(Error::Config("total_stride must be a power of two".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let seed_proj = seeded_weights(&mut rng, width, 1, 1);
        let skip_projs = stage_channels[..stage_channels.len() - 1]
            .iter()
            .map(|&c| seeded_weights(&mut rng, width, c, 1))
            .collect();
        let steps = total_stride.trailing_zeros() as usize;
        let deconvs = (0..steps)
            .map(|_| seeded_weights(&mut rng, width, width, 4))
            .collect();
        let final_conv = seeded_weights(&mut rng, 2, width, 3);
        Ok(RefineWeights {
            seed_proj,
            skip_projs,
            deconvs,
            final_conv,
        })
    }
}

/// Full two-channel (foreground, background) softmax output of the
/// refinement cascade, cropped to the search-patch extent.
pub fn refine_neural_probs(
    search_pyr: &FeaturePyramid,
    seed_map: &Tensor,
    weights: &RefineWeights,
) -> Result<Tensor> {
    let deepest = search_pyr.deepest();
    if (seed_map.height(), seed_map.width())
        != (deepest.tensor.height(), deepest.tensor.width())
    {
        return Err(Error::Shape(format!(
            "seed map {}x{} != deepest stage {}x{}",
            seed_map.height(),
            seed_map.width(),
            deepest.tensor.height(),
            deepest.tensor.width()
        )));
    }
    if search_pyr.stages.len() != weights.skip_projs.len() + 1 {
        return Err(Error::Shape(
            "refinement weights built for a different stage count".into(),
        ));
    }

    let mut x = tensor::relu(&tensor::conv2d(seed_map, &weights.seed_proj, 1, 0)?);
    // Skip additions are consumed deepest-first whenever the stage extent
    // matches the current map, so stages sharing the deepest stride merge
    // before the first upsampling.
    let mut next_skip = weights.skip_projs.len();
    let consume = |x: &Tensor, next_skip: &mut usize| -> Result<Option<Tensor>> {
        while *next_skip > 0 {
            let stage = &search_pyr.stages[*next_skip - 1];
            if (stage.tensor.height(), stage.tensor.width()) != (x.height(), x.width()) {
                return Ok(None);
            }
            let proj = tensor::conv2d(&stage.tensor, &weights.skip_projs[*next_skip - 1], 1, 0)?;
            *next_skip -= 1;
            return Ok(Some(tensor::relu(&tensor::add(x, &proj)?)));
        }
        Ok(None)
    };
    for deconv in &weights.deconvs {
        while let Some(merged) = consume(&x, &mut next_skip)? {
            x = merged;
        }
        x = tensor::relu(&tensor::conv_transpose2d(&x, deconv, 2, 1)?);
    }
    while let Some(merged) = consume(&x, &mut next_skip)? {
        x = merged;
    }

    let logits = tensor::conv2d(&x, &weights.final_conv, 1, 1)?;
    let probs = tensor::softmax_channels(&logits)?;
    tensor::crop_topleft(&probs, search_pyr.input_height, search_pyr.input_width)
}

/// Neural refinement to a foreground probability map at search-patch
/// resolution (foreground = channel 0 of the softmax output).
pub fn refine_neural(
    search_pyr: &FeaturePyramid,
    seed_map: &Tensor,
    weights: &RefineWeights,
) -> Result<ProbMap> {
    let probs = refine_neural_probs(search_pyr, seed_map, weights)?;
    ProbMap::new(probs.height(), probs.width(), probs.channel(0).to_vec())
}

fn clamp_box(b: &AxisBox, height: usize, width: usize) -> (f64, f64, f64, f64) {
    (
        b.x0.clamp(0.0, width as f64),
        b.y0.clamp(0.0, height as f64),
        b.x1.clamp(0.0, width as f64),
        b.y1.clamp(0.0, height as f64),
    )
}

#[inline]
fn bin_of(v: f32, bins: usize) -> usize {
    ((v * bins as f32) as usize).min(bins - 1)
}

#[inline]
fn joint_bin(patch: &Tensor, r: usize, c: usize, bins: usize) -> usize {
    let b0 = bin_of(patch.at(0, r, c), bins);
    let b1 = bin_of(patch.at(1, r, c), bins);
    let b2 = bin_of(patch.at(2, r, c), bins);
    (b0 * bins + b1) * bins + b2
}

/// Color-histogram segmentation: foreground statistics come from template
/// pixels inside `template_fg`, background from the rest of the template.
/// Both histograms are Laplace-smoothed (+1 per bin) and normalized; the
/// per-pixel posterior over the search patch is `pf / (pf + pb)`. Pixels
/// whose centers fall outside `detected` expanded by `cfg.box_margin` are
/// hard-gated to 0.
pub fn segment_histogram(
    template_patch: &Tensor,
    template_fg: &AxisBox,
    search_patch: &Tensor,
    detected: &AxisBox,
    cfg: &SegConfig,
) -> Result<ProbMap> {
    cfg.validate()?;
    if template_patch.channels() != 3 || search_patch.channels() != 3 {
        return Err(Error::Shape("histogram segmentation expects RGB patches".into()));
    }
    let bins = cfg.bins;
    let n_bins = bins * bins * bins;
    let (fx0, fy0, fx1, fy1) = clamp_box(template_fg, template_patch.height(), template_patch.width());

    let mut fg = vec![0u64; n_bins];
    let mut bg = vec![0u64; n_bins];
    let mut n_fg = 0u64;
    let mut n_bg = 0u64;
    for r in 0..template_patch.height() {
        let cy = r as f64 + 0.5;
        for c in 0..template_patch.width() {
            let cx = c as f64 + 0.5;
            let bin = joint_bin(template_patch, r, c, bins);
            if cx >= fx0 && cx < fx1 && cy >= fy0 && cy < fy1 {
                fg[bin] += 1;
                n_fg += 1;
            } else {
                bg[bin] += 1;
                n_bg += 1;
            }
        }
    }
    if n_fg == 0 {
        return Err(Error::Argument(
            "template foreground box covers no pixels".into(),
        ));
    }

    // Laplace-smoothed normalized frequencies.
    let pf: Vec<f64> = fg
        .iter()
        .map(|&c| (c + 1) as f64 / (n_fg + n_bins as u64) as f64)
        .collect();
    let pb: Vec<f64> = bg
        .iter()
        .map(|&c| (c + 1) as f64 / (n_bg + n_bins as u64) as f64)
        .collect();

    let gate = detected.expanded(cfg.box_margin);
    let (gx0, gy0, gx1, gy1) = clamp_box(&gate, search_patch.height(), search_patch.width());
    let mut values = vec![0.0f32; search_patch.height() * search_patch.width()];
    for r in 0..search_patch.height() {
        let cy = r as f64 + 0.5;
        if cy < gy0 || cy >= gy1 {
            continue;
        }
        for c in 0..search_patch.width() {
            let cx = c as f64 + 0.5;
            if cx < gx0 || cx >= gx1 {
                continue;
            }
            let bin = joint_bin(search_patch, r, c, bins);
            values[r * search_patch.width() + c] = (pf[bin] / (pf[bin] + pb[bin])) as f32;
        }
    }
    ProbMap::new(search_patch.height(), search_patch.width(), values)
}

/// Threshold a probability map; a bit is set iff its value strictly exceeds
/// the threshold (exactly at the threshold counts as background).
pub fn binarize(p: &ProbMap, threshold: f32) -> Mask {
    Mask {
        height: p.height,
        width: p.width,
        bits: p.values.iter().map(|&v| v > threshold).collect(),
    }
}

/// Keep only the largest 4-connected foreground component. Ties go to the
/// component containing the smallest row-major pixel; an empty mask is
/// returned unchanged.
pub fn largest_component(m: &Mask) -> Mask {
    let (h, w) = (m.height, m.width);
    let mut label = vec![usize::MAX; h * w];
    let mut sizes: Vec<usize> = Vec::new();
    let mut queue: Vec<usize> = Vec::new();
    for start in 0..h * w {
        if !m.bits[start] || label[start] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let mut size = 0usize;
        queue.clear();
        queue.push(start);
        label[start] = id;
        while let Some(p) = queue.pop() {
            size += 1;
            let (r, c) = (p / w, p % w);
            let mut visit = |q: usize| {
                if m.bits[q] && label[q] == usize::MAX {
                    label[q] = id;
                    queue.push(q);
                }
            };
            if r > 0 {
                visit(p - w);
            }
            if r + 1 < h {
                visit(p + w);
            }
            if c > 0 {
                visit(p - 1);
            }
            if c + 1 < w {
                visit(p + 1);
            }
        }
        sizes.push(size);
    }
    if sizes.is_empty() {
        return m.clone();
    }
    // Components are discovered in order of their smallest row-major pixel,
    // so a strict comparison implements the documented tie-break.
    let mut best = 0;
    for (id, &s) in sizes.iter().enumerate() {
        if s > sizes[best] {
            best = id;
        }
    }
    Mask {
        height: h,
        width: w,
        bits: label.iter().map(|&l| l == best).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backbone::{build_backbone, BackboneConfig};

    fn uniform_patch(h: usize, w: usize, rgb: [f32; 3]) -> Tensor {
        let mut data = Vec::with_capacity(3 * h * w);
        for c in 0..3 {
            data.extend(std::iter::repeat_n(rgb[c], h * w));
        }
        Tensor::from_vec(3, h, w, data).unwrap()
    }

    fn red() -> [f32; 3] {
        [0.9, 0.05, 0.05]
    }

    fn blue() -> [f32; 3] {
        [0.05, 0.05, 0.9]
    }

    #[test]
    fn refine_shapes_follow_upsample_arithmetic() {
        // 256 input: deepest stage 32x32, three x2 upsample steps -> 256x256.
        let bb = build_backbone(&BackboneConfig::conv_default(3)).unwrap();
        let patch = uniform_patch(256, 256, [0.3, 0.5, 0.2]);
        let pyr = bb.extract_features(&patch).unwrap();
        assert_eq!(pyr.deepest().tensor.height(), 32);
        let weights = RefineWeights::build(9, &bb.stage_channels(), bb.total_stride(), 16).unwrap();
        let seed = Tensor::filled(1, 32, 32, 0.5);
        let probs = refine_neural(&pyr, &seed, &weights).unwrap();
        assert_eq!((probs.height, probs.width), (256, 256));
    }

    #[test]
    fn refine_probs_sum_to_one_and_are_deterministic() {
        let bb = build_backbone(&BackboneConfig::conv_small(4)).unwrap();
        let patch = uniform_patch(96, 96, [0.2, 0.6, 0.4]);
        let pyr = bb.extract_features(&patch).unwrap();
        let deep = pyr.deepest();
        let seed = Tensor::filled(1, deep.tensor.height(), deep.tensor.width(), 1.0);
        let weights = RefineWeights::build(5, &bb.stage_channels(), bb.total_stride(), 8).unwrap();
        let probs = refine_neural_probs(&pyr, &seed, &weights).unwrap();
        assert_eq!((probs.height(), probs.width()), (96, 96));
        let plane = 96 * 96;
        for p in 0..plane {
            let sum = probs.data()[p] + probs.data()[plane + p];
            assert!((sum - 1.0).abs() <= 1e-6);
        }
        let again = refine_neural_probs(&pyr, &seed, &weights).unwrap();
        assert_eq!(probs, again);
    }

    #[test]
    fn refine_rejects_mismatched_seed() {
        let bb = build_backbone(&BackboneConfig::identity()).unwrap();
        let patch = uniform_patch(32, 32, [0.5; 3]);
        let pyr = bb.extract_features(&patch).unwrap();
        let weights = RefineWeights::build(5, &bb.stage_channels(), 1, 8).unwrap();
        let seed = Tensor::filled(1, 16, 16, 0.0);
        assert!(matches!(
            refine_neural(&pyr, &seed, &weights),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn histogram_separates_red_from_blue() {
        // Template: red target block inside a blue background.
        let mut template = uniform_patch(16, 16, blue());
        for r in 4..12 {
            for c in 4..12 {
                for (ch, v) in red().iter().enumerate() {
                    template.set(ch, r, c, *v);
                }
            }
        }
        let fg_box = AxisBox::new(4.0, 4.0, 12.0, 12.0).unwrap();
        // Search: left half red, right half blue.
        let mut search = uniform_patch(16, 16, blue());
        for r in 0..16 {
            for c in 0..8 {
                for (ch, v) in red().iter().enumerate() {
                    search.set(ch, r, c, *v);
                }
            }
        }
        let detected = AxisBox::new(0.0, 0.0, 16.0, 16.0).unwrap();
        let cfg = SegConfig::default();
        let p = segment_histogram(&template, &fg_box, &search, &detected, &cfg).unwrap();

        // Closed-form smoothed posterior for the pure-red bin.
        let bins3 = 512u64;
        let n_fg = 64u64;
        let n_bg = 192u64;
        let pf_red = (n_fg + 1) as f64 / (n_fg + bins3) as f64;
        let pb_red = 1.0 / (n_bg + bins3) as f64;
        let expect_red = pf_red / (pf_red + pb_red);
        assert!(expect_red > 0.9);
        let got_red = p.get(8, 3) as f64;
        assert!((got_red - expect_red).abs() <= 1e-6);
        assert!(got_red > 0.9);
        let got_blue = p.get(8, 12) as f64;
        let pf_blue = 1.0 / (n_fg + bins3) as f64;
        let pb_blue = (n_bg + 1) as f64 / (n_bg + bins3) as f64;
        assert!((got_blue - pf_blue / (pf_blue + pb_blue)).abs() <= 1e-6);
        assert!(got_blue < 0.1);

        // High-threshold survivor count matches the oracle count of red
        // pixels inside the gate.
        let strong = binarize(&p, 0.999f32.min(expect_red as f32 - 1e-4));
        assert_eq!(strong.count(), 16 * 8);
    }

    #[test]
    fn identical_histograms_give_half() {
        // fg box covers exactly half the template, so both histograms hold
        // the same counts in the same bins
        let template = uniform_patch(8, 8, [0.4, 0.4, 0.4]);
        let fg_box = AxisBox::new(0.0, 0.0, 8.0, 4.0).unwrap();
        let search = uniform_patch(8, 8, [0.4, 0.4, 0.4]);
        let detected = AxisBox::new(0.0, 0.0, 8.0, 8.0).unwrap();
        let p = segment_histogram(&template, &fg_box, &search, &detected, &SegConfig::default())
            .unwrap();
        for &v in p.values() {
            assert!((v - 0.5).abs() <= 1e-6);
        }
    }

    #[test]
    fn gate_zeroes_outside_pixels() {
        let template = uniform_patch(8, 8, red());
        let fg_box = AxisBox::new(0.0, 0.0, 8.0, 8.0).unwrap();
        let search = uniform_patch(20, 20, red());
        let detected = AxisBox::new(8.0, 8.0, 12.0, 12.0).unwrap();
        let cfg = SegConfig {
            box_margin: 0.25,
            ..SegConfig::default()
        };
        let p = segment_histogram(&template, &fg_box, &search, &detected, &cfg).unwrap();
        // gate = detected expanded by 1px on each side -> [7,13)
        assert_eq!(p.get(0, 0), 0.0);
        assert_eq!(p.get(6, 10), 0.0);
        assert!(p.get(10, 10) > 0.9);
        // Empty template foreground errors.
        let empty = AxisBox::new(-5.0, -5.0, -1.0, -1.0).unwrap();
        assert!(matches!(
            segment_histogram(&template, &empty, &search, &detected, &cfg),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn histogram_invariant_to_background_permutation() {
        let mut template = uniform_patch(6, 6, blue());
        for (ch, v) in red().iter().enumerate() {
            template.set(ch, 2, 2, *v);
            template.set(ch, 2, 3, *v);
        }
        let fg_box = AxisBox::new(2.0, 2.0, 4.0, 3.0).unwrap();
        // Permute two background pixels (same colors, swapped places).
        let mut permuted = template.clone();
        for ch in 0..3 {
            let a = permuted.at(ch, 0, 0);
            let b = permuted.at(ch, 5, 5);
            permuted.set(ch, 0, 0, b);
            permuted.set(ch, 5, 5, a);
        }
        let search = uniform_patch(6, 6, red());
        let detected = AxisBox::new(0.0, 0.0, 6.0, 6.0).unwrap();
        let cfg = SegConfig::default();
        let p1 = segment_histogram(&template, &fg_box, &search, &detected, &cfg).unwrap();
        let p2 = segment_histogram(&permuted, &fg_box, &search, &detected, &cfg).unwrap();
        assert_eq!(p1, p2);
    }

    #[test]
    fn binarize_is_strict() {
        let p = ProbMap::new(2, 2, vec![0.4, 0.6, 0.5, 0.9]).unwrap();
        let m = binarize(&p, 0.5);
        assert_eq!(
            (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1)),
            (false, true, false, true)
        );
        let ones = ProbMap::new(1, 3, vec![1.0; 3]).unwrap();
        assert_eq!(binarize(&ones, 0.5).count(), 3);
    }

    #[test]
    fn mask_count_monotone_in_threshold() {
        let vals: Vec<f32> = (0..100).map(|i| (i as f32) / 99.0).collect();
        let p = ProbMap::new(10, 10, vals).unwrap();
        let mut last = usize::MAX;
        for t in [0.1f32, 0.3, 0.5, 0.7, 0.9] {
            let n = binarize(&p, t).count();
            assert!(n <= last);
            last = n;
        }
    }

    #[test]
    fn largest_component_selection() {
        let mut m = Mask::empty(5, 8);
        // size-5 blob
        for c in 0..5 {
            m.set(0, c, true);
        }
        // size-3 blob, disconnected
        for c in 0..3 {
            m.set(3, c, true);
        }
        let kept = largest_component(&m);
        assert_eq!(kept.count(), 5);
        assert!(kept.get(0, 0) && !kept.get(3, 0));
        // single blob unchanged
        let single = largest_component(&kept);
        assert_eq!(single, kept);
        // empty unchanged
        let empty = Mask::empty(4, 4);
        assert_eq!(largest_component(&empty), empty);
        // tie: first in row-major order wins
        let mut tie = Mask::empty(3, 5);
        tie.set(0, 3, true);
        tie.set(2, 0, true);
        let kept = largest_component(&tie);
        assert!(kept.get(0, 3) && !kept.get(2, 0));
    }

    #[test]
    fn pgm_bytes_layout() {
        let mut m = Mask::empty(2, 3);
        m.set(0, 1, true);
        let bytes = m.to_pgm_bytes();
        assert!(bytes.starts_with(b"P5\n3 2\n1\n"));
        assert_eq!(&bytes[bytes.len() - 6..], &[0, 1, 0, 0, 0, 0]);
    }

    #[test]
    fn probmap_validates() {
        assert!(ProbMap::new(2, 2, vec![0.0; 3]).is_err());
        assert!(ProbMap::new(1, 2, vec![0.5, 1.2]).is_err());
    }
}
