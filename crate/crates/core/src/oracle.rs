//! Independent brute-force reference implementations.
//!
//! These deliberately take a different route from the production kernels
//! (64-bit accumulation, materialized padding, scatter instead of gather,
//! angle sweeps, Monte-Carlo sampling) so that agreement is meaningful.
//! They back the `selftest` command and the oracle test suites; nothing in
//! the tracking path calls them.

use crate::geometry::Polygon;
use crate::tensor::{ConvWeights, Tensor};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn padded(input: &Tensor, pad: usize) -> Vec<Vec<Vec<f64>>> {
    let (c, h, w) = (input.channels(), input.height(), input.width());
    let mut out = vec![vec![vec![0.0f64; w + 2 * pad]; h + 2 * pad]; c];
    for i in 0..c {
        for y in 0..h {
            for x in 0..w {
                out[i][y + pad][x + pad] = input.at(i, y, x) as f64;
            }
        }
    }
    out
}

/// Direct six-nested-loop convolution over a materialized padded input.
pub fn conv2d_ref(input: &Tensor, w: &ConvWeights, stride: usize, pad: usize) -> Tensor {
    let src = padded(input, pad);
    let ph = input.height() + 2 * pad;
    let pw = input.width() + 2 * pad;
    let out_h = (ph - w.kernel) / stride + 1;
    let out_w = (pw - w.kernel) / stride + 1;
    let mut data = vec![0.0f32; w.out_channels * out_h * out_w];
    for o in 0..w.out_channels {
        for oy in 0..out_h {
            for ox in 0..out_w {
                let mut acc = w.bias[o] as f64;
                for i in 0..w.in_channels {
                    for ky in 0..w.kernel {
                        for kx in 0..w.kernel {
                            acc += w.at(o, i, ky, kx) as f64
                                * src[i][oy * stride + ky][ox * stride + kx];
                        }
                    }
                }
                data[(o * out_h + oy) * out_w + ox] = acc as f32;
            }
        }
    }
    Tensor::from_vec(w.out_channels, out_h, out_w, data).expect("oracle output")
}

/// Scatter-accumulation transposed convolution: every input element scatters
/// its weighted kernel into the full output, then the padding border is cut.
pub fn conv_transpose2d_ref(input: &Tensor, w: &ConvWeights, stride: usize, pad: usize) -> Tensor {
    let full_h = (input.height() - 1) * stride + w.kernel;
    let full_w = (input.width() - 1) * stride + w.kernel;
    let mut full = vec![vec![vec![0.0f64; full_w]; full_h]; w.out_channels];
    for o in 0..w.out_channels {
        for i in 0..w.in_channels {
            for y in 0..input.height() {
                for x in 0..input.width() {
                    let v = input.at(i, y, x) as f64;
                    for ky in 0..w.kernel {
                        for kx in 0..w.kernel {
                            full[o][y * stride + ky][x * stride + kx] +=
                                v * w.at(o, i, ky, kx) as f64;
                        }
                    }
                }
            }
        }
    }
    let out_h = full_h - 2 * pad;
    let out_w = full_w - 2 * pad;
    let mut data = vec![0.0f32; w.out_channels * out_h * out_w];
    for o in 0..w.out_channels {
        for y in 0..out_h {
            for x in 0..out_w {
                data[(o * out_h + y) * out_w + x] =
                    (full[o][y + pad][x + pad] + w.bias[o] as f64) as f32;
            }
        }
    }
    Tensor::from_vec(w.out_channels, out_h, out_w, data).expect("oracle output")
}

/// Brute-force sliding dot product over all channels.
pub fn cross_correlate_ref(template: &Tensor, search: &Tensor) -> Tensor {
    let out_h = search.height() - template.height() + 1;
    let out_w = search.width() - template.width() + 1;
    let mut data = vec![0.0f32; out_h * out_w];
    for oy in 0..out_h {
        for ox in 0..out_w {
            let mut acc = 0.0f64;
            for c in 0..template.channels() {
                for ty in 0..template.height() {
                    for tx in 0..template.width() {
                        acc += template.at(c, ty, tx) as f64
                            * search.at(c, oy + ty, ox + tx) as f64;
                    }
                }
            }
            data[oy * out_w + ox] = acc as f32;
        }
    }
    Tensor::from_vec(1, out_h, out_w, data).expect("oracle output")
}

/// Per-channel brute-force sliding dot product.
pub fn depthwise_correlate_ref(template: &Tensor, search: &Tensor) -> Tensor {
    let out_h = search.height() - template.height() + 1;
    let out_w = search.width() - template.width() + 1;
    let c = template.channels();
    let mut data = vec![0.0f32; c * out_h * out_w];
    for ch in 0..c {
        for oy in 0..out_h {
            for ox in 0..out_w {
                let mut acc = 0.0f64;
                for ty in 0..template.height() {
                    for tx in 0..template.width() {
                        acc += template.at(ch, ty, tx) as f64
                            * search.at(ch, oy + ty, ox + tx) as f64;
                    }
                }
                data[(ch * out_h + oy) * out_w + ox] = acc as f32;
            }
        }
    }
    Tensor::from_vec(c, out_h, out_w, data).expect("oracle output")
}

/// Area of the axis-aligned bounding box of `points` rotated by `-theta`.
pub fn enclosing_area_at_angle(points: &[(f64, f64)], theta: f64) -> f64 {
    let (sin, cos) = theta.sin_cos();
    let mut min_u = f64::INFINITY;
    let mut max_u = f64::NEG_INFINITY;
    let mut min_v = f64::INFINITY;
    let mut max_v = f64::NEG_INFINITY;
    for &(x, y) in points {
        let u = x * cos + y * sin;
        let v = -x * sin + y * cos;
        min_u = min_u.min(u);
        max_u = max_u.max(u);
        min_v = min_v.min(v);
        max_v = max_v.max(v);
    }
    (max_u - min_u) * (max_v - min_v)
}

/// Minimum enclosing-rectangle area by exhaustive angle sweep: a 0.05-degree
/// grid over [0, 90) unioned with the direction of every point pair (some
/// pair spans each hull edge, so the true optimum is always evaluated).
pub fn min_area_rect_sweep(points: &[(f64, f64)]) -> f64 {
    let step = 0.05f64.to_radians();
    let quarter = std::f64::consts::FRAC_PI_2;
    let mut best = f64::INFINITY;
    let mut theta = 0.0;
    while theta < quarter {
        best = best.min(enclosing_area_at_angle(points, theta));
        theta += step;
    }
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let dx = points[j].0 - points[i].0;
            let dy = points[j].1 - points[i].1;
            if dx == 0.0 && dy == 0.0 {
                continue;
            }
            best = best.min(enclosing_area_at_angle(points, dy.atan2(dx)));
        }
    }
    best
}

fn inside_convex(p: (f64, f64), poly: &Polygon) -> bool {
    let v = poly.vertices();
    for i in 0..v.len() {
        let a = v[i];
        let b = v[(i + 1) % v.len()];
        let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
        if cross < 0.0 {
            return false;
        }
    }
    true
}

/// Monte-Carlo IoU of two convex polygons with `samples` points drawn from
/// the joint bounding box of both.
pub fn iou_monte_carlo(a: &Polygon, b: &Polygon, samples: usize, seed: u64) -> f64 {
    let mut min_x = f64::INFINITY;
    let mut max_x = f64::NEG_INFINITY;
    let mut min_y = f64::INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    for &(x, y) in a.vertices().iter().chain(b.vertices().iter()) {
        min_x = min_x.min(x);
        max_x = max_x.max(x);
        min_y = min_y.min(y);
        max_y = max_y.max(y);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_union = 0u64;
    let mut in_both = 0u64;
    for _ in 0..samples {
        let p = (
            rng.random_range(min_x..max_x),
            rng.random_range(min_y..max_y),
        );
        let ia = inside_convex(p, a);
        let ib = inside_convex(p, b);
        if ia || ib {
            in_union += 1;
        }
        if ia && ib {
            in_both += 1;
        }
    }
    if in_union == 0 {
        0.0
    } else {
        in_both as f64 / in_union as f64
    }
}

/// Grid points of `grid_h x grid_w` (stride/offset mapping) strictly inside
/// the box, counted by direct scan.
pub fn count_interior_cells(
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
    grid_h: usize,
    grid_w: usize,
    stride: usize,
    offset: f64,
) -> usize {
    let mut n = 0;
    for row in 0..grid_h {
        for col in 0..grid_w {
            let cx = col as f64 * stride as f64 + offset;
            let cy = row as f64 * stride as f64 + offset;
            if cx > x0 && cx < x1 && cy > y0 && cy < y1 {
                n += 1;
            }
        }
    }
    n
}

/// Expected-average-overlap over explicit per-run overlap curves, computed
/// straight from the definition: every curve is zero-extended, EAO(N) is the
/// mean over curves of the mean of the first N values, and the result is the
/// mean of EAO(N) over the inclusive interval.
pub fn eao_from_curves(curves: &[Vec<f64>], lo: usize, hi: usize) -> f64 {
    assert!(!curves.is_empty() && lo >= 1 && lo <= hi);
    let mut total = 0.0;
    for n in lo..=hi {
        let mut sum = 0.0;
        for curve in curves {
            let head: f64 = curve.iter().take(n).sum();
            sum += head / n as f64;
        }
        total += sum / curves.len() as f64;
    }
    total / (hi - lo + 1) as f64
}
