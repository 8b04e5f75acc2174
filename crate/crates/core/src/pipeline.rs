//! The two-stage tracking loop and the run protocols.
//!
//! Stage one crops a search window around the previous estimate, correlates
//! template features against it and decodes the best box. Stage two segments
//! the search patch gated by that box and fits a rotated rectangle to the
//! mask; an empty mask falls back to the stage-one box. The template is
//! fixed at init and never updated.
//!
//! `run_supervised` implements the reset protocol (zero-overlap frame ->
//! failure, skip gap, reinit from ground truth); `run_oneshot` initializes
//! once and never resets.

use crate::backbone::{build_backbone, Backbone, BackboneConfig, FeaturePyramid};
use crate::detect::{classify, select_best, HeadConfig, RegressionField};
use crate::error::{Error, Result};
use crate::geometry::{iou_polygon, polygon_to_axis, AxisBox, Polygon};
use crate::io::Sequence;
use crate::metrics::{FrameRecord, RunTrace};
use crate::segment::{
    binarize, largest_component, refine_neural, segment_histogram, Mask, ProbMap, RefineWeights,
    SegBackend, SegConfig,
};
use crate::tensor::{self, Tensor};

/// Crop geometry: exemplar/search output extents and the context fraction
/// added around the target when sizing the exemplar window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CropSpec {
    pub exemplar_out: usize,
    pub search_out: usize,
    pub context: f64,
}

impl Default for CropSpec {
    fn default() -> Self {
        CropSpec {
            exemplar_out: 127,
            search_out: 255,
            context: 0.5,
        }
    }
}

impl CropSpec {
    pub fn validate(&self) -> Result<()> {
        if self.exemplar_out == 0 || self.search_out <= self.exemplar_out {
            return Err(Error::Config(format!(
                "crop extents search {} must exceed exemplar {}",
                self.search_out, self.exemplar_out
            )));
        }
        if self.context < 0.0 {
            return Err(Error::Config("negative crop context".into()));
        }
        Ok(())
    }

    /// Context-padded square window side for a `w x h` target:
    /// `sqrt((w + c*(w+h)) * (h + c*(w+h)))`.
    pub fn context_side(&self, w: f64, h: f64) -> f64 {
        let pad = self.context * (w + h);
        ((w + pad) * (h + pad)).sqrt()
    }
}

/// Everything needed to build a tracker.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig {
    pub backbone: BackboneConfig,
    pub head: HeadConfig,
    pub seg: SegConfig,
    pub crop: CropSpec,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            backbone: BackboneConfig::identity(),
            head: HeadConfig::default(),
            seg: SegConfig::default(),
            crop: CropSpec::default(),
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        self.backbone.stage_strides()?;
        self.head.validate()?;
        self.seg.validate()?;
        self.crop.validate()
    }
}

/// Size-update smoothing: new size = (1 - alpha) * old + alpha * detected.
const SIZE_SMOOTHING: f64 = 0.3;

/// Per-sequence mutable tracking state. The template is extracted once at
/// init and never mutated afterwards.
#[derive(Debug, Clone)]
pub struct TrackerState {
    template_patch: Tensor,
    template_pyr: FeaturePyramid,
    template_box_in_patch: AxisBox,
    current_center: (f64, f64),
    current_size: (f64, f64),
}

impl TrackerState {
    pub fn center(&self) -> (f64, f64) {
        self.current_center
    }

    pub fn size(&self) -> (f64, f64) {
        self.current_size
    }
}

/// Output of one tracked frame, in frame coordinates.
#[derive(Debug, Clone)]
pub struct FrameOutput {
    /// Final rotated-box polygon (or the stage-one box when the mask is
    /// empty).
    pub polygon: Polygon,
    /// Stage-one axis-aligned box.
    pub axis_box: AxisBox,
    /// Stage-one confidence in [0, 1].
    pub score: f64,
    /// Stage-two mask over the search patch (empty on fallback).
    pub mask: Mask,
}

/// Per-channel mean intensity, used as the crop padding value.
pub fn frame_mean(frame: &Tensor) -> [f32; 3] {
    let plane = frame.height() * frame.width();
    let mut out = [0.0f32; 3];
    for (c, slot) in out.iter_mut().enumerate() {
        let sum: f64 = frame.channel(c).iter().map(|&v| v as f64).sum();
        *slot = (sum / plane as f64) as f32;
    }
    out
}

/// Crop a square window of extent `side` centered at `center` and resample
/// it to `out x out` with bilinear interpolation; out-of-frame area reads as
/// `pad_value`.
pub fn crop_patch(
    frame: &Tensor,
    center: (f64, f64),
    side: f64,
    out: usize,
    pad_value: [f32; 3],
) -> Result<Tensor> {
    if side <= 0.0 || out == 0 {
        return Err(Error::Argument(format!(
            "crop side {side} and extent {out} must be positive"
        )));
    }
    let (h, w) = (frame.height() as isize, frame.width() as isize);
    let scale = side / out as f64;
    let x_start = center.0 - side / 2.0;
    let y_start = center.1 - side / 2.0;
    let mut data = vec![0.0f32; 3 * out * out];
    for c in 0..3usize {
        let pad = pad_value[c];
        let sample = |u: f64, v: f64| -> f32 {
            // u, v are continuous pixel-center coordinates
            let x0 = u.floor() as isize;
            let y0 = v.floor() as isize;
            let fx = (u - x0 as f64) as f32;
            let fy = (v - y0 as f64) as f32;
            let fetch = |x: isize, y: isize| -> f32 {
                if x < 0 || y < 0 || x >= w || y >= h {
                    pad
                } else {
                    frame.at(c, y as usize, x as usize)
                }
            };
            let top = fetch(x0, y0) * (1.0 - fx) + fetch(x0 + 1, y0) * fx;
            let bot = fetch(x0, y0 + 1) * (1.0 - fx) + fetch(x0 + 1, y0 + 1) * fx;
            top * (1.0 - fy) + bot * fy
        };
        for py in 0..out {
            let v = y_start + (py as f64 + 0.5) * scale - 0.5;
            for px in 0..out {
                let u = x_start + (px as f64 + 0.5) * scale - 0.5;
                data[(c * out + py) * out + px] = sample(u, v);
            }
        }
    }
    Ok(Tensor::from_vec(3, out, out, data)?)
}

/// The two-stage tracker. Immutable once built; per-sequence state lives in
/// [`TrackerState`].
pub struct Tracker {
    backbone: Backbone,
    refine: Option<RefineWeights>,
    cfg: TrackerConfig,
}

impl Tracker {
    pub fn new(cfg: TrackerConfig) -> Result<Tracker> {
        cfg.validate()?;
        let backbone = build_backbone(&cfg.backbone)?;
        let refine = match cfg.seg.backend {
            SegBackend::Neural => Some(RefineWeights::build(
                cfg.seg.seed,
                &backbone.stage_channels(),
                backbone.total_stride(),
                cfg.seg.refine_width,
            )?),
            SegBackend::Histogram => None,
        };
        Ok(Tracker {
            backbone,
            refine,
            cfg,
        })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.cfg
    }

    /// Initialize tracking state from a frame and an init region. The region
    /// is reduced to its axis-aligned bounding box, clamped to the frame.
    pub fn init(&self, frame: &Tensor, region: &Polygon) -> Result<TrackerState> {
        let bbox = polygon_to_axis(region);
        let x0 = bbox.x0.clamp(0.0, frame.width() as f64 - 1.0);
        let y0 = bbox.y0.clamp(0.0, frame.height() as f64 - 1.0);
        let x1 = bbox.x1.clamp(x0 + 1.0, frame.width() as f64);
        let y1 = bbox.y1.clamp(y0 + 1.0, frame.height() as f64);
        let bbox = AxisBox::new(x0, y0, x1, y1)
            .map_err(|e| Error::Init(format!("degenerate init region: {e}")))?;
        let (w, h) = (bbox.width(), bbox.height());
        let center = bbox.center();
        let side = self.cfg.crop.context_side(w, h);
        let pad = frame_mean(frame);
        let template_patch =
            crop_patch(frame, center, side, self.cfg.crop.exemplar_out, pad)?;
        let template_pyr = self.backbone.extract_features(&template_patch)?;
        let scale = self.cfg.crop.exemplar_out as f64 / side;
        let half_out = self.cfg.crop.exemplar_out as f64 / 2.0;
        let template_box_in_patch = AxisBox::new(
            half_out - w * scale / 2.0,
            half_out - h * scale / 2.0,
            half_out + w * scale / 2.0,
            half_out + h * scale / 2.0,
        )?;
        Ok(TrackerState {
            template_patch,
            template_pyr,
            template_box_in_patch,
            current_center: center,
            current_size: (w, h),
        })
    }

    fn segment_patch(
        &self,
        state: &TrackerState,
        search_patch: &Tensor,
        search_pyr: &FeaturePyramid,
        detected: &AxisBox,
    ) -> Result<ProbMap> {
        match self.cfg.seg.backend {
            SegBackend::Histogram => segment_histogram(
                &state.template_patch,
                &state.template_box_in_patch,
                search_patch,
                detected,
                &self.cfg.seg,
            ),
            SegBackend::Neural => {
                let weights = self
                    .refine
                    .as_ref()
                    .expect("neural backend built refinement weights");
                let response = tensor::depthwise_correlate(
                    &state.template_pyr.deepest().tensor,
                    &search_pyr.deepest().tensor,
                )?;
                let summed = tensor::sum_channels(&response);
                let deep = search_pyr.deepest();
                let seed = tensor::resize_nearest(
                    &summed,
                    deep.tensor.height(),
                    deep.tensor.width(),
                )?;
                let prob = refine_neural(search_pyr, &seed, weights)?;
                // the detected box gates the neural output the same way the
                // histogram backend gates internally
                let gate = detected.expanded(self.cfg.seg.box_margin);
                let mut values = prob.values().to_vec();
                for r in 0..prob.height {
                    let cy = r as f64 + 0.5;
                    for c in 0..prob.width {
                        let cx = c as f64 + 0.5;
                        if !(cx >= gate.x0 && cx < gate.x1 && cy >= gate.y0 && cy < gate.y1) {
                            values[r * prob.width + c] = 0.0;
                        }
                    }
                }
                ProbMap::new(prob.height, prob.width, values)
            }
        }
    }

    /// Track one frame: stage-one detection, stage-two segmentation, state
    /// update. Never panics on empty masks — the stage-one box is the
    /// fallback output.
    pub fn track_frame(&self, state: &mut TrackerState, frame: &Tensor) -> Result<FrameOutput> {
        let crop = &self.cfg.crop;
        let (w, h) = state.current_size;
        let exemplar_side = crop.context_side(w, h);
        let search_side = exemplar_side * crop.search_out as f64 / crop.exemplar_out as f64;
        let pad = frame_mean(frame);
        let search_patch = crop_patch(
            frame,
            state.current_center,
            search_side,
            crop.search_out,
            pad,
        )?;
        let search_pyr = self.backbone.extract_features(&search_patch)?;

        // stage one: locate
        let (scores, grid) = classify(&state.template_pyr, &search_pyr, &self.cfg.head)?;
        let patch_scale = crop.search_out as f64 / search_side;
        let prior = RegressionField::constant(
            grid,
            w * patch_scale / 2.0,
            h * patch_scale / 2.0,
            w * patch_scale / 2.0,
            h * patch_scale / 2.0,
        )?;
        let det = select_best(&scores, &prior)?;

        // map patch coordinates back into the frame
        let to_frame = |x: f64, y: f64| -> (f64, f64) {
            (
                state.current_center.0 - search_side / 2.0 + x / patch_scale,
                state.current_center.1 - search_side / 2.0 + y / patch_scale,
            )
        };
        let (fx0, fy0) = to_frame(det.bbox.x0, det.bbox.y0);
        let (fx1, fy1) = to_frame(det.bbox.x1, det.bbox.y1);
        let axis_box = AxisBox::new(fx0, fy0, fx1, fy1)?;

        // stage two: segment, clean, fit
        let prob = self.segment_patch(state, &search_patch, &search_pyr, &det.bbox)?;
        let mut mask = binarize(&prob, self.cfg.seg.threshold);
        if self.cfg.seg.keep_largest_component {
            mask = largest_component(&mask);
        }
        let polygon = match self.fit_rotated(&mask, &to_frame) {
            Some(poly) => poly,
            None => axis_box.to_polygon(),
        };

        // state update with size smoothing
        state.current_center = axis_box.center();
        state.current_size = (
            (1.0 - SIZE_SMOOTHING) * state.current_size.0 + SIZE_SMOOTHING * axis_box.width(),
            (1.0 - SIZE_SMOOTHING) * state.current_size.1 + SIZE_SMOOTHING * axis_box.height(),
        );

        Ok(FrameOutput {
            polygon,
            axis_box,
            score: det.score,
            mask,
        })
    }

    fn fit_rotated(&self, mask: &Mask, to_frame: &dyn Fn(f64, f64) -> (f64, f64)) -> Option<Polygon> {
        let points = crate::geometry::mask_to_points(mask).ok()?;
        let rect = crate::geometry::min_area_rect(&points).ok()?;
        let corners = rect.corners().ok()?;
        let mapped: Vec<(f64, f64)> = corners
            .vertices()
            .iter()
            .map(|&(x, y)| to_frame(x, y))
            .collect();
        Polygon::new(mapped).ok()
    }
}

/// Per-frame tracker interface the protocol runners drive. Implemented by
/// [`Tracker`] and by test stubs.
pub trait TrackerEngine {
    type State;
    fn init(&self, seq: &Sequence, frame_idx: usize) -> Result<Self::State>;
    fn track(&self, state: &mut Self::State, seq: &Sequence, frame_idx: usize) -> Result<Polygon>;
}

impl TrackerEngine for Tracker {
    type State = TrackerState;

    fn init(&self, seq: &Sequence, frame_idx: usize) -> Result<TrackerState> {
        let frame = seq.frame(frame_idx)?;
        Tracker::init(self, &frame, &seq.gt[frame_idx])
    }

    fn track(&self, state: &mut TrackerState, seq: &Sequence, frame_idx: usize) -> Result<Polygon> {
        let frame = seq.frame(frame_idx)?;
        Ok(self.track_frame(state, &frame)?.polygon)
    }
}

/// One-shot protocol: init on frame 0, track every following frame, no
/// resets.
pub fn run_oneshot<E: TrackerEngine>(engine: &E, seq: &Sequence) -> Result<RunTrace> {
    if seq.is_empty() {
        return Err(Error::Argument(format!("sequence {} is empty", seq.name)));
    }
    let mut records = vec![FrameRecord::Init];
    let mut state = engine.init(seq, 0)?;
    for i in 1..seq.len() {
        records.push(FrameRecord::Tracked(engine.track(&mut state, seq, i)?));
    }
    Ok(RunTrace {
        sequence: seq.name.clone(),
        records,
    })
}

/// Supervised (reset) protocol: a zero-overlap frame is a failure; the next
/// `reinit_gap` frames are skipped and the tracker reinitializes from ground
/// truth on the frame after the gap.
pub fn run_supervised<E: TrackerEngine>(
    engine: &E,
    seq: &Sequence,
    reinit_gap: usize,
) -> Result<RunTrace> {
    if seq.is_empty() {
        return Err(Error::Argument(format!("sequence {} is empty", seq.name)));
    }
    let n = seq.len();
    let mut records = Vec::with_capacity(n);
    records.push(FrameRecord::Init);
    let mut state = Some(engine.init(seq, 0)?);
    let mut i = 1;
    while i < n {
        let s = state.as_mut().expect("state present while tracking");
        let polygon = engine.track(s, seq, i)?;
        let overlap = iou_polygon(&polygon, &seq.gt[i])?;
        if overlap > 0.0 {
            records.push(FrameRecord::Tracked(polygon));
            i += 1;
            continue;
        }
        records.push(FrameRecord::Failed);
        state = None;
        let mut skipped = 0;
        i += 1;
        while i < n && skipped < reinit_gap {
            records.push(FrameRecord::Skipped);
            skipped += 1;
            i += 1;
        }
        if i < n {
            records.push(FrameRecord::Init);
            state = Some(engine.init(seq, i)?);
            i += 1;
        }
    }
    let trace = RunTrace {
        sequence: seq.name.clone(),
        records,
    };
    debug_assert!(trace.validate().is_ok());
    Ok(trace)
}
