//! Runtime oracle suite behind the `selftest` CLI command: every invariant
//! is re-checked against the independent brute-force references in
//! [`crate::oracle`] and reports one pass/fail line.
//!
//! The cargo test suites run larger versions of the same checks; this module
//! exists so a deployed binary can verify itself without the test harness.

use crate::backbone::{build_backbone, BackboneConfig};
use crate::detect::{self, GridSpec};
use crate::geometry::{self, AxisBox, Polygon, RotatedBox};
use crate::io;
use crate::metrics::{self, EvalConfig, FrameRecord, RunTrace, SequenceRun};
use crate::oracle;
use crate::pipeline::{run_supervised, Tracker, TrackerConfig, TrackerEngine};
use crate::segment::{self, RefineWeights, SegConfig};
use crate::synth::{synth_sequence, SynthConfig};
use crate::tensor::{self, ConvWeights, Tensor};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = (&'static str, fn() -> Result<(), String>);

fn random_tensor(rng: &mut ChaCha8Rng, c: usize, h: usize, w: usize) -> Tensor {
    let data = (0..c * h * w).map(|_| rng.random_range(-1.0..1.0)).collect();
    Tensor::from_vec(c, h, w, data).expect("random tensor is valid")
}

fn random_weights(rng: &mut ChaCha8Rng, o: usize, i: usize, k: usize) -> ConvWeights {
    let values = (0..o * i * k * k).map(|_| rng.random_range(-1.0..1.0)).collect();
    let bias = (0..o).map(|_| rng.random_range(-1.0..1.0)).collect();
    ConvWeights::new(o, i, k, values, bias).expect("random weights are valid")
}

fn max_abs_diff(a: &Tensor, b: &Tensor) -> f32 {
    a.data()
        .iter()
        .zip(b.data().iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f32::max)
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn check_conv2d_oracle() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for case in 0..30 {
        let ch = rng.random_range(1..=4);
        let h = rng.random_range(3..=9);
        let w = rng.random_range(3..=9);
        let k = rng.random_range(1..=3.min(h).min(w));
        let input = random_tensor(&mut rng, ch, h, w);
        let out_ch = rng.random_range(1..=4);
        let weights = random_weights(&mut rng, out_ch, ch, k);
        let stride = rng.random_range(1..=2);
        let pad = rng.random_range(0..=1);
        let got = tensor::conv2d(&input, &weights, stride, pad).map_err(|e| e.to_string())?;
        let want = oracle::conv2d_ref(&input, &weights, stride, pad);
        let diff = max_abs_diff(&got, &want);
        ensure(diff <= 1e-5, format!("case {case}: diff {diff}"))?;
    }
    Ok(())
}

fn check_conv_transpose_oracle() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for case in 0..30 {
        let ch = rng.random_range(1..=4);
        let (h, w) = (rng.random_range(2..=7), rng.random_range(2..=7));
        let input = random_tensor(&mut rng, ch, h, w);
        let k = rng.random_range(2..=4);
        let out_ch = rng.random_range(1..=3);
        let weights = random_weights(&mut rng, out_ch, ch, k);
        let stride = rng.random_range(1..=2);
        let pad = rng.random_range(0..=1.min(k - 1));
        let got =
            tensor::conv_transpose2d(&input, &weights, stride, pad).map_err(|e| e.to_string())?;
        let want = oracle::conv_transpose2d_ref(&input, &weights, stride, pad);
        let diff = max_abs_diff(&got, &want);
        ensure(diff <= 1e-5, format!("case {case}: diff {diff}"))?;
    }
    Ok(())
}

fn check_correlation_oracles() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for case in 0..30 {
        let ch = rng.random_range(1..=4);
        let th = rng.random_range(1..=5);
        let tw = rng.random_range(1..=5);
        let template = random_tensor(&mut rng, ch, th, tw);
        let (sh, sw) = (th + rng.random_range(0..=4), tw + rng.random_range(0..=4));
        let search = random_tensor(&mut rng, ch, sh, sw);
        let full = tensor::cross_correlate(&template, &search).map_err(|e| e.to_string())?;
        let full_ref = oracle::cross_correlate_ref(&template, &search);
        ensure(
            max_abs_diff(&full, &full_ref) <= 1e-5,
            format!("cross case {case}"),
        )?;
        let dw = tensor::depthwise_correlate(&template, &search).map_err(|e| e.to_string())?;
        let dw_ref = oracle::depthwise_correlate_ref(&template, &search);
        ensure(max_abs_diff(&dw, &dw_ref) <= 1e-5, format!("dw case {case}"))?;
        // summing depthwise channels must reproduce the full correlation
        let summed = tensor::sum_channels(&dw);
        ensure(
            max_abs_diff(&summed, &full) <= 1e-5,
            format!("dw-sum case {case}"),
        )?;
    }
    Ok(())
}

fn check_correlation_linearity() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for case in 0..20 {
        let template = random_tensor(&mut rng, 2, 3, 3);
        let search = random_tensor(&mut rng, 2, 6, 6);
        let alpha = 1.5f32 + case as f32 * 0.125;
        let base = tensor::cross_correlate(&template, &search).map_err(|e| e.to_string())?;
        let scaled = tensor::cross_correlate(&template, &search.map(|v| alpha * v))
            .map_err(|e| e.to_string())?;
        let expect = base.map(|v| alpha * v);
        ensure(
            max_abs_diff(&scaled, &expect) <= 1e-4,
            format!("linearity case {case}"),
        )?;
    }
    Ok(())
}

fn check_softmax() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let t = random_tensor(&mut rng, 3, 5, 5);
    let s = tensor::softmax_channels(&t).map_err(|e| e.to_string())?;
    let shifted = tensor::softmax_channels(&t.map(|v| v + 3.25)).map_err(|e| e.to_string())?;
    ensure(max_abs_diff(&s, &shifted) <= 1e-6, "shift invariance")?;
    let plane = 25;
    for p in 0..plane {
        let sum: f32 = (0..3).map(|c| s.data()[c * plane + p]).sum();
        ensure((sum - 1.0).abs() <= 1e-6, format!("sum at {p}: {sum}"))?;
    }
    Ok(())
}

fn check_encode_decode_roundtrip() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let grid = GridSpec {
        height: 24,
        width: 24,
        stride: 2,
        offset: 1.0,
    };
    for case in 0..200 {
        let x0 = rng.random_range(0..30) as f64;
        let y0 = rng.random_range(0..30) as f64;
        let gt = AxisBox::new(
            x0,
            y0,
            x0 + rng.random_range(2..18) as f64,
            y0 + rng.random_range(2..18) as f64,
        )
        .map_err(|e| e.to_string())?;
        let field = detect::encode_targets(&gt, &grid);
        let want = oracle::count_interior_cells(gt.x0, gt.y0, gt.x1, gt.y1, 24, 24, 2, 1.0);
        ensure(
            field.positive_count() == want,
            format!("case {case}: positives {} vs {want}", field.positive_count()),
        )?;
        for row in 0..grid.height {
            for col in 0..grid.width {
                if !field.is_positive(row, col) {
                    continue;
                }
                let (cx, cy) = detect::cell_to_image(col, row, grid.stride, grid.offset);
                let [l, t, r, b] = field.distances(row, col);
                let back = detect::decode_box(cx, cy, l, t, r, b).map_err(|e| e.to_string())?;
                ensure(back == gt, format!("case {case}: roundtrip drift"))?;
            }
        }
    }
    Ok(())
}

fn check_min_area_rect() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    for case in 0..20 {
        let pts: Vec<(f64, f64)> = (0..rng.random_range(5..40))
            .map(|_| (rng.random_range(-5.0..9.0), rng.random_range(-3.0..4.0)))
            .collect();
        let rect = geometry::min_area_rect(&pts).map_err(|e| e.to_string())?;
        let area = rect.width * rect.height;
        let sweep = oracle::min_area_rect_sweep(&pts);
        ensure(
            (area - sweep).abs() <= 1e-6 * sweep.max(1.0),
            format!("case {case}: area {area} vs sweep {sweep}"),
        )?;
    }
    // axis-aligned pixel block is exact
    let mut mask = segment::Mask::empty(8, 12);
    for r in 2..=5 {
        for c in 3..=9 {
            mask.set(r, c, true);
        }
    }
    let rect = geometry::min_area_rect(&geometry::mask_to_points(&mask).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    ensure(
        rect.width == 7.0 && rect.height == 4.0 && rect.angle == 0.0,
        format!("block rect {rect:?}"),
    )
}

fn check_iou_consistency() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    for case in 0..50 {
        let mk = |rng: &mut ChaCha8Rng| {
            AxisBox::new(
                rng.random_range(0.0..5.0),
                rng.random_range(0.0..5.0),
                rng.random_range(6.0..12.0),
                rng.random_range(6.0..12.0),
            )
            .expect("random box is ordered")
        };
        let a = mk(&mut rng);
        let b = mk(&mut rng);
        let via_polygon =
            geometry::iou_polygon(&a.to_polygon(), &b.to_polygon()).map_err(|e| e.to_string())?;
        let via_axis = geometry::iou_axis(&a, &b);
        ensure(
            (via_polygon - via_axis).abs() <= 1e-9,
            format!("case {case}: {via_polygon} vs {via_axis}"),
        )?;
    }
    let unit = AxisBox::new(0.0, 0.0, 1.0, 1.0).expect("unit box");
    let off = AxisBox::new(0.5, 0.0, 1.5, 1.0).expect("offset box");
    ensure(
        (geometry::iou_axis(&unit, &off) - 1.0 / 3.0).abs() <= 1e-9,
        "half-offset unit squares",
    )
}

fn check_iou_monte_carlo() -> Result<(), String> {
    let square = Polygon::new(vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
        .map_err(|e| e.to_string())?;
    let rotated = RotatedBox {
        center: (0.5, 0.5),
        width: 1.0,
        height: 1.0,
        angle: std::f64::consts::FRAC_PI_4,
    }
    .corners()
    .map_err(|e| e.to_string())?;
    let exact = geometry::iou_polygon(&square, &rotated).map_err(|e| e.to_string())?;
    let mc = oracle::iou_monte_carlo(&square, &rotated, 1_000_000, 9);
    ensure(
        (exact - mc).abs() <= 2e-3,
        format!("exact {exact} vs monte-carlo {mc}"),
    )
}

fn unit_square_tracked(v: f64) -> FrameRecord {
    FrameRecord::Tracked(
        Polygon::new(vec![(0.0, 0.0), (v, 0.0), (v, 1.0), (0.0, 1.0)])
            .expect("tracked rect is valid"),
    )
}

fn overlap_run(overlaps: &[f64]) -> SequenceRun {
    let mut records = vec![FrameRecord::Init];
    records.extend(overlaps.iter().map(|&v| unit_square_tracked(v)));
    let gt = vec![
        Polygon::new(vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
            .expect("unit square");
        records.len()
    ];
    SequenceRun {
        trace: RunTrace {
            sequence: "selftest".into(),
            records,
        },
        gt,
    }
}

fn check_metrics_definitions() -> Result<(), String> {
    let run = overlap_run(&[1.0, 0.5]);
    let cfg = EvalConfig {
        eao_interval: Some((4, 4)),
        ..EvalConfig::default()
    };
    let got = metrics::eao(std::slice::from_ref(&run), &cfg).map_err(|e| e.to_string())?;
    ensure(got == 0.375, format!("zero-extension eao {got}"))?;

    let curves = vec![vec![1.0, 0.5], vec![0.75, 0.25, 1.0]];
    let runs = vec![overlap_run(&[1.0, 0.5]), overlap_run(&[0.75, 0.25, 1.0])];
    let cfg = EvalConfig {
        eao_interval: Some((2, 5)),
        ..EvalConfig::default()
    };
    let got = metrics::eao(&runs, &cfg).map_err(|e| e.to_string())?;
    let want = oracle::eao_from_curves(&curves, 2, 5);
    ensure(got == want, format!("eao {got} vs oracle {want}"))?;

    let run = overlap_run(&[0.75, 0.25, 0.5, 0.25]);
    let cfg0 = EvalConfig {
        burn_in: 0,
        ..EvalConfig::default()
    };
    let acc = metrics::accuracy(std::slice::from_ref(&run), &cfg0).map_err(|e| e.to_string())?;
    ensure(acc == 0.4375, format!("accuracy {acc}"))?;
    let sr = metrics::success_rate(&run.trace, &run.gt, 0.25).map_err(|e| e.to_string())?;
    ensure(sr == 0.5, format!("strict success rate {sr}"))?;
    let ao = metrics::average_overlap(&run.trace, &run.gt).map_err(|e| e.to_string())?;
    ensure(ao == 0.4375, format!("average overlap {ao}"))
}

fn check_echo_stub_scores() -> Result<(), String> {
    struct Echo;
    impl TrackerEngine for Echo {
        type State = ();
        fn init(&self, _: &io::Sequence, _: usize) -> crate::Result<()> {
            Ok(())
        }
        fn track(
            &self,
            _: &mut (),
            seq: &io::Sequence,
            idx: usize,
        ) -> crate::Result<Polygon> {
            Ok(seq.gt[idx].clone())
        }
    }
    let cfg = SynthConfig {
        frames: 12,
        ..SynthConfig::default()
    };
    let seq = synth_sequence(&cfg, "echo").map_err(|e| e.to_string())?;
    let trace = run_supervised(&Echo, &seq, 5).map_err(|e| e.to_string())?;
    let failures = trace
        .records
        .iter()
        .filter(|r| matches!(r, FrameRecord::Failed))
        .count();
    ensure(failures == 0, format!("echo stub failures {failures}"))?;
    let ao = metrics::average_overlap(&trace, &seq.gt).map_err(|e| e.to_string())?;
    ensure((ao - 1.0).abs() <= 1e-12, format!("echo stub ao {ao}"))?;
    let run = SequenceRun {
        trace,
        gt: seq.gt.clone(),
    };
    let acc_cfg = EvalConfig {
        burn_in: 0,
        ..EvalConfig::default()
    };
    let acc = metrics::accuracy(&[run], &acc_cfg).map_err(|e| e.to_string())?;
    ensure((acc - 1.0).abs() <= 1e-12, format!("echo stub accuracy {acc}"))
}

fn check_trace_roundtrip() -> Result<(), String> {
    let mut records = vec![FrameRecord::Init];
    records.push(unit_square_tracked(0.7312500000000001));
    records.push(FrameRecord::Failed);
    records.push(FrameRecord::Skipped);
    records.push(FrameRecord::Init);
    records.push(unit_square_tracked(0.125));
    let trace = RunTrace {
        sequence: "rt".into(),
        records,
    };
    let text = io::render_trace(&trace);
    let back = io::parse_trace(&text, "rt", Path::new("<memory>")).map_err(|e| e.to_string())?;
    ensure(back == trace, "trace round-trip drift")
}

fn check_histogram_posteriors() -> Result<(), String> {
    let mut template = Tensor::filled(3, 16, 16, 0.05);
    // red block on a dark background
    for r in 4..12 {
        for c in 4..12 {
            template.set(0, r, c, 0.9);
        }
    }
    let fg = AxisBox::new(4.0, 4.0, 12.0, 12.0).map_err(|e| e.to_string())?;
    let mut search = Tensor::filled(3, 16, 16, 0.05);
    for r in 0..16 {
        for c in 0..8 {
            search.set(0, r, c, 0.9);
        }
    }
    let detected = AxisBox::new(0.0, 0.0, 16.0, 16.0).map_err(|e| e.to_string())?;
    let p = segment::segment_histogram(&template, &fg, &search, &detected, &SegConfig::default())
        .map_err(|e| e.to_string())?;
    ensure(
        p.get(8, 3) > 0.9 && p.get(8, 12) < 0.1,
        format!("posteriors fg {} bg {}", p.get(8, 3), p.get(8, 12)),
    )
}

fn check_refine_layouts() -> Result<(), String> {
    for (name, cfg, extent) in [
        ("identity", BackboneConfig::identity(), 64usize),
        ("conv-small", BackboneConfig::conv_small(2), 96),
        ("conv-default", BackboneConfig::conv_default(2), 128),
    ] {
        let bb = build_backbone(&cfg).map_err(|e| e.to_string())?;
        let patch = Tensor::filled(3, extent, extent, 0.3);
        let pyr = bb.extract_features(&patch).map_err(|e| e.to_string())?;
        let deep = pyr.deepest();
        let seed = Tensor::filled(1, deep.tensor.height(), deep.tensor.width(), 0.5);
        let weights = RefineWeights::build(7, &bb.stage_channels(), bb.total_stride(), 8)
            .map_err(|e| e.to_string())?;
        let probs =
            segment::refine_neural_probs(&pyr, &seed, &weights).map_err(|e| e.to_string())?;
        ensure(
            probs.height() == extent && probs.width() == extent,
            format!("{name}: output {}x{}", probs.height(), probs.width()),
        )?;
        let plane = extent * extent;
        for p in 0..plane {
            let sum = probs.data()[p] + probs.data()[plane + p];
            ensure(
                (sum - 1.0).abs() <= 1e-6,
                format!("{name}: softmax sum {sum}"),
            )?;
        }
    }
    Ok(())
}

fn check_synth_determinism() -> Result<(), String> {
    let cfg = SynthConfig {
        frames: 4,
        noise_sigma: 0.1,
        rotation_rate: 0.02,
        ..SynthConfig::default()
    };
    let a = synth_sequence(&cfg, "d").map_err(|e| e.to_string())?;
    let b = synth_sequence(&cfg, "d").map_err(|e| e.to_string())?;
    for i in 0..a.len() {
        let fa = a.frame(i).map_err(|e| e.to_string())?;
        let fb = b.frame(i).map_err(|e| e.to_string())?;
        ensure(fa == fb, format!("frame {i} differs"))?;
        ensure(a.gt[i] == b.gt[i], format!("gt {i} differs"))?;
    }
    Ok(())
}

fn check_pipeline_fallback() -> Result<(), String> {
    let cfg = SynthConfig {
        frames: 1,
        velocity: (0.0, 0.0),
        image_size: 96,
        ..SynthConfig::default()
    };
    let seq = synth_sequence(&cfg, "fb").map_err(|e| e.to_string())?;
    let tracker = Tracker::new(TrackerConfig {
        crop: crate::pipeline::CropSpec {
            exemplar_out: 63,
            search_out: 127,
            context: 0.5,
        },
        ..TrackerConfig::default()
    })
    .map_err(|e| e.to_string())?;
    let frame = seq.frame(0).map_err(|e| e.to_string())?;
    let mut state = tracker.init(&frame, &seq.gt[0]).map_err(|e| e.to_string())?;
    let flat = Tensor::filled(3, 96, 96, 0.5);
    let out = tracker
        .track_frame(&mut state, &flat)
        .map_err(|e| e.to_string())?;
    ensure(out.polygon.area() > 0.0, "fallback polygon degenerate")
}

const CHECKS: &[Check] = &[
    ("conv2d matches loop oracle", check_conv2d_oracle),
    ("conv_transpose2d matches scatter oracle", check_conv_transpose_oracle),
    ("correlations match brute-force oracles", check_correlation_oracles),
    ("correlation is linear in its arguments", check_correlation_linearity),
    ("softmax normalizes and is shift-invariant", check_softmax),
    ("box encode/decode round-trips exactly", check_encode_decode_roundtrip),
    ("min-area rect matches angle sweep", check_min_area_rect),
    ("polygon IoU matches axis IoU on rectangles", check_iou_consistency),
    ("polygon IoU matches monte-carlo sampling", check_iou_monte_carlo),
    ("metric definitions match hand values", check_metrics_definitions),
    ("ground-truth echo stub scores perfectly", check_echo_stub_scores),
    ("trace files round-trip losslessly", check_trace_roundtrip),
    ("histogram posteriors separate colors", check_histogram_posteriors),
    ("refinement runs on all backbone layouts", check_refine_layouts),
    ("synthetic sequences are deterministic", check_synth_determinism),
    ("empty-mask frames fall back cleanly", check_pipeline_fallback),
];

/// Run every check, collecting one result per invariant.
pub fn run_all() -> Vec<CheckResult> {
    CHECKS
        .iter()
        .map(|(name, check)| match check() {
            Ok(()) => CheckResult {
                name,
                passed: true,
                detail: String::new(),
            },
            Err(detail) => CheckResult {
                name,
                passed: false,
                detail,
            },
        })
        .collect()
}
