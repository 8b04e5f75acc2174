//! Stage one of the tracker: the anchor-free detection head.
//!
//! A grid cell `(row, col)` maps to image point `(col*stride + offset,
//! row*stride + offset)`. A cell strictly inside the ground-truth box is a
//! positive sample carrying the four distances to the box sides; decoding
//! inverts that mapping. Classification scores come either from a seeded
//! convolutional head (architecture exercised, untrained) or from the
//! depthwise correlation peak, min-max normalized — the functional default.

use crate::backbone::{aggregate_multilayer, FeaturePyramid};
use crate::error::{Error, Result};
use crate::geometry::AxisBox;
use crate::tensor::{self, ConvWeights, Tensor};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Geometry of a score/regression grid over a search patch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub height: usize,
    pub width: usize,
    pub stride: usize,
    pub offset: f64,
}

impl GridSpec {
    pub fn cells(&self) -> usize {
        self.height * self.width
    }
}

/// Map a grid cell to its image point: `c = index * stride + offset`.
pub fn cell_to_image(col: usize, row: usize, stride: usize, offset: f64) -> (f64, f64) {
    (
        col as f64 * stride as f64 + offset,
        row as f64 * stride as f64 + offset,
    )
}

/// Per-cell regression targets: distances to the four box sides
/// (left, top, right, bottom) plus the positive-sample flag.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionField {
    pub grid: GridSpec,
    dist: Vec<[f64; 4]>,
    positive: Vec<bool>,
}

impl RegressionField {
    /// Same distances at every cell — the constant-size prior used by the
    /// untrained functional mode.
    pub fn constant(grid: GridSpec, l: f64, t: f64, r: f64, b: f64) -> Result<RegressionField> {
        if [l, t, r, b].iter().any(|v| *v < 0.0) || l + r <= 0.0 || t + b <= 0.0 {
            return Err(Error::Argument(
                "constant regression prior must describe a non-degenerate box".into(),
            ));
        }
        Ok(RegressionField {
            grid,
            dist: vec![[l, t, r, b]; grid.cells()],
            positive: vec![true; grid.cells()],
        })
    }

    #[inline]
    pub fn distances(&self, row: usize, col: usize) -> [f64; 4] {
        self.dist[row * self.grid.width + col]
    }

    #[inline]
    pub fn is_positive(&self, row: usize, col: usize) -> bool {
        self.positive[row * self.grid.width + col]
    }

    pub fn positive_count(&self) -> usize {
        self.positive.iter().filter(|&&p| p).count()
    }
}

/// Encode a ground-truth box over a grid. A cell whose image point lies
/// strictly inside the box is positive with side distances; boundary and
/// exterior cells are negative with zeroed distances. A box entirely outside
/// the grid coverage simply yields no positives.
pub fn encode_targets(gt: &AxisBox, grid: &GridSpec) -> RegressionField {
    let mut dist = vec![[0.0f64; 4]; grid.cells()];
    let mut positive = vec![false; grid.cells()];
    for row in 0..grid.height {
        for col in 0..grid.width {
            let (cx, cy) = cell_to_image(col, row, grid.stride, grid.offset);
            if cx > gt.x0 && cx < gt.x1 && cy > gt.y0 && cy < gt.y1 {
                let i = row * grid.width + col;
                dist[i] = [cx - gt.x0, cy - gt.y0, gt.x1 - cx, gt.y1 - cy];
                positive[i] = true;
            }
        }
    }
    RegressionField {
        grid: *grid,
        dist,
        positive,
    }
}

/// Decode side distances at an image point back into a box:
/// `(cx - l, cy - t, cx + r, cy + b)`.
pub fn decode_box(cx: f64, cy: f64, l: f64, t: f64, r: f64, b: f64) -> Result<AxisBox> {
    if [l, t, r, b].iter().any(|v| *v < 0.0) {
        return Err(Error::Argument("negative side distance".into()));
    }
    if l + r <= 0.0 || t + b <= 0.0 {
        return Err(Error::DegenerateBox(format!(
            "zero extent from distances l={l} t={t} r={r} b={b}"
        )));
    }
    AxisBox::new(cx - l, cy - t, cx + r, cy + b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeadKind {
    /// Depthwise response summed over channels, min-max normalized.
    CorrPeak,
    /// Seeded convolutional towers over the depthwise response.
    Conv,
}

/// Detection-head configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadConfig {
    pub kind: HeadKind,
    pub seed: u64,
    /// How many of the deepest pyramid stages to correlate and aggregate
    /// (corr-peak head only).
    pub aggregate_stages: usize,
    /// Optional cosine-window blend on the score map; 0 disables it.
    pub window_weight: f32,
    /// Tower width of the conv head.
    pub conv_channels: usize,
}

impl Default for HeadConfig {
    fn default() -> Self {
        HeadConfig {
            kind: HeadKind::CorrPeak,
            seed: 0,
            aggregate_stages: 2,
            window_weight: 0.0,
            conv_channels: 32,
        }
    }
}

impl HeadConfig {
    pub fn validate(&self) -> Result<()> {
        if self.aggregate_stages == 0 {
            return Err(Error::Config("aggregate_stages must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.window_weight) {
            return Err(Error::Config("window_weight outside [0, 1]".into()));
        }
        if self.conv_channels == 0 {
            return Err(Error::Config("conv_channels must be >= 1".into()));
        }
        Ok(())
    }
}

/// One detection result: decoded box, its confidence and the grid cell
/// (row, col) it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub bbox: AxisBox,
    pub score: f64,
    pub cell: (usize, usize),
}

fn check_pyramids(template: &FeaturePyramid, search: &FeaturePyramid) -> Result<()> {
    if template.stages.len() != search.stages.len() {
        return Err(Error::Shape(format!(
            "pyramid stage count mismatch: {} vs {}",
            template.stages.len(),
            search.stages.len()
        )));
    }
    for (t, s) in template.stages.iter().zip(search.stages.iter()) {
        if t.stride != s.stride {
            return Err(Error::Shape(format!(
                "pyramid stride mismatch: {} vs {}",
                t.stride, s.stride
            )));
        }
    }
    Ok(())
}

fn minmax_normalize(t: &Tensor) -> Tensor {
    let mut lo = f32::INFINITY;
    let mut hi = f32::NEG_INFINITY;
    for &v in t.data() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if hi > lo {
        t.map(|v| (v - lo) / (hi - lo))
    } else {
        // A constant response carries no evidence; score it neutrally.
        t.map(|_| 0.5)
    }
}

fn hann(i: usize, n: usize) -> f32 {
    if n <= 1 {
        1.0
    } else {
        let x = std::f32::consts::PI * i as f32 / (n - 1) as f32;
        x.sin() * x.sin()
    }
}

fn apply_window(scores: &Tensor, weight: f32) -> Tensor {
    if weight <= 0.0 {
        return scores.clone();
    }
    let (h, w) = (scores.height(), scores.width());
    let mut data = Vec::with_capacity(h * w);
    for y in 0..h {
        for x in 0..w {
            let win = hann(y, h) * hann(x, w);
            data.push((1.0 - weight) * scores.at(0, y, x) + weight * win);
        }
    }
    Tensor::from_vec(1, h, w, data).expect("window blend keeps shape")
}

struct ConvTower {
    reduce: ConvWeights,
    mix: ConvWeights,
    out: ConvWeights,
}

impl ConvTower {
    fn build(rng: &mut ChaCha8Rng, in_channels: usize, width: usize, out_channels: usize) -> Self {
        let seeded = |rng: &mut ChaCha8Rng, o: usize, i: usize, k: usize| {
            let s = 1.0 / ((i * k * k) as f32).sqrt();
            let values = (0..o * i * k * k).map(|_| rng.random_range(-s..=s)).collect();
            ConvWeights::new(o, i, k, values, vec![0.0; o]).expect("consistent dims")
        };
        ConvTower {
            reduce: seeded(rng, width, in_channels, 1),
            mix: seeded(rng, width, width, 3),
            out: seeded(rng, out_channels, width, 1),
        }
    }

    fn apply(&self, input: &Tensor) -> Result<Tensor> {
        let x = tensor::relu(&tensor::conv2d(input, &self.reduce, 1, 0)?);
        let x = tensor::relu(&tensor::conv2d(&x, &self.mix, 1, 1)?);
        tensor::conv2d(&x, &self.out, 1, 0)
    }
}

/// Depthwise correlation padded so the response covers the full search grid
/// (used by the conv head, which wants a stride-aligned map of the patch).
fn same_mode_depthwise(t: &Tensor, s: &Tensor) -> Result<Tensor> {
    let pad_top = (t.height() - 1) / 2;
    let pad_bottom = t.height() - 1 - pad_top;
    let pad_left = (t.width() - 1) / 2;
    let pad_right = t.width() - 1 - pad_left;
    let padded = tensor::pad_spatial(s, pad_top, pad_bottom, pad_left, pad_right);
    tensor::depthwise_correlate(t, &padded)
}

/// Classification score map in `[0, 1]` over the search patch, plus the grid
/// geometry it lives on.
pub fn classify(
    template: &FeaturePyramid,
    search: &FeaturePyramid,
    head: &HeadConfig,
) -> Result<(Tensor, GridSpec)> {
    head.validate()?;
    check_pyramids(template, search)?;
    let deepest_t = template.deepest();
    let deepest_s = search.deepest();
    let stride = deepest_s.stride;

    match head.kind {
        HeadKind::CorrPeak => {
            let n = head.aggregate_stages.min(template.stages.len());
            let used = &template.stages[template.stages.len() - n..];
            let used_s = &search.stages[search.stages.len() - n..];
            let mut responses = Vec::with_capacity(n);
            for (t, s) in used.iter().zip(used_s.iter()) {
                responses.push(tensor::sum_channels(&tensor::depthwise_correlate(
                    &t.tensor, &s.tensor,
                )?));
            }
            let target_h = responses.last().expect("n >= 1").height();
            let target_w = responses.last().expect("n >= 1").width();
            let aligned: Vec<Tensor> = responses
                .iter()
                .map(|r| tensor::resize_nearest(r, target_h, target_w))
                .collect::<Result<_>>()?;
            let merged = aggregate_multilayer(&aligned)?;
            let scores = apply_window(&minmax_normalize(&merged), head.window_weight);
            let grid = GridSpec {
                height: target_h,
                width: target_w,
                stride,
                // Cell (0,0) corresponds to the template aligned with the
                // patch corner, so its center sits half a template extent in.
                offset: stride as f64 * deepest_t.tensor.height() as f64 / 2.0,
            };
            Ok((scores, grid))
        }
        HeadKind::Conv => {
            let response = same_mode_depthwise(&deepest_t.tensor, &deepest_s.tensor)?;
            let mut rng = ChaCha8Rng::seed_from_u64(head.seed);
            let tower = ConvTower::build(
                &mut rng,
                response.channels(),
                head.conv_channels,
                1,
            );
            let logits = tower.apply(&response)?;
            let scores = apply_window(
                &logits.map(|v| 1.0 / (1.0 + (-v).exp())),
                head.window_weight,
            );
            let grid = GridSpec {
                height: scores.height(),
                width: scores.width(),
                stride,
                offset: stride as f64 / 2.0,
            };
            Ok((scores, grid))
        }
    }
}

/// Four-channel (l, t, r, b) regression map from the seeded conv tower,
/// on the same full-search grid as the conv classification head. Outputs are
/// made non-negative with `exp`; meaningful values would require training,
/// so this exists for architectural coverage.
pub fn regress_conv(
    template: &FeaturePyramid,
    search: &FeaturePyramid,
    head: &HeadConfig,
) -> Result<Tensor> {
    head.validate()?;
    check_pyramids(template, search)?;
    let response = same_mode_depthwise(&template.deepest().tensor, &search.deepest().tensor)?;
    // Distinct stream from the classification tower.
    let mut rng = ChaCha8Rng::seed_from_u64(head.seed.wrapping_add(1));
    let tower = ConvTower::build(&mut rng, response.channels(), head.conv_channels, 4);
    let raw = tower.apply(&response)?;
    Ok(raw.map(|v| v.clamp(-30.0, 30.0).exp()))
}

/// Pick the highest-confidence cell (first in row-major order on ties) and
/// decode its box.
pub fn select_best(scores: &Tensor, reg: &RegressionField) -> Result<Detection> {
    if scores.channels() != 1
        || scores.height() != reg.grid.height
        || scores.width() != reg.grid.width
    {
        return Err(Error::Shape(format!(
            "score map {}x{}x{} does not match grid {}x{}",
            scores.channels(),
            scores.height(),
            scores.width(),
            reg.grid.height,
            reg.grid.width
        )));
    }
    if scores.data().is_empty() {
        return Err(Error::Argument("empty score map".into()));
    }
    let mut best = (0usize, 0usize);
    let mut best_v = f32::NEG_INFINITY;
    for row in 0..reg.grid.height {
        for col in 0..reg.grid.width {
            let v = scores.at(0, row, col);
            if v > best_v {
                best_v = v;
                best = (row, col);
            }
        }
    }
    let (row, col) = best;
    let (cx, cy) = cell_to_image(col, row, reg.grid.stride, reg.grid.offset);
    let [l, t, r, b] = reg.distances(row, col);
    Ok(Detection {
        bbox: decode_box(cx, cy, l, t, r, b)?,
        score: best_v as f64,
        cell: (row, col),
    })
}
