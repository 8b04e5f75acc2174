//! Dense rank-3 tensors (channels x height x width, row-major `f32`) and the
//! small kernel set the tracker needs: convolution, transposed convolution,
//! ReLU, channelwise softmax and the plain / depthwise cross-correlations.
//!
//! Correlation here is the sliding-window dot product (no kernel flip), in
//! valid mode (no padding). All operations are pure; the `parallel` feature
//! only changes how independent output slices are scheduled, never the
//! accumulation order, so results are bit-identical across thread counts.

use crate::error::{Error, Result};
use crate::par;

/// Dense `channels x height x width` array of 32-bit reals, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl Tensor {
    pub fn zeros(channels: usize, height: usize, width: usize) -> Tensor {
        Tensor {
            channels,
            height,
            width,
            data: vec![0.0; channels * height * width],
        }
    }

    pub fn filled(channels: usize, height: usize, width: usize, value: f32) -> Tensor {
        Tensor {
            channels,
            height,
            width,
            data: vec![value; channels * height * width],
        }
    }

    /// Wrap a flat row-major buffer. The length must equal `c*h*w` and every
    /// entry must be finite.
    pub fn from_vec(channels: usize, height: usize, width: usize, data: Vec<f32>) -> Result<Tensor> {
        if data.len() != channels * height * width {
            return Err(Error::Shape(format!(
                "tensor data length {} != {}x{}x{}",
                data.len(),
                channels,
                height,
                width
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::Argument("tensor contains non-finite entries".into()));
        }
        Ok(Tensor {
            channels,
            height,
            width,
            data,
        })
    }

    pub(crate) fn from_vec_unchecked(
        channels: usize,
        height: usize,
        width: usize,
        data: Vec<f32>,
    ) -> Tensor {
        debug_assert_eq!(data.len(), channels * height * width);
        debug_assert!(data.iter().all(|v| v.is_finite()));
        Tensor {
            channels,
            height,
            width,
            data,
        }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    #[inline]
    pub fn at(&self, c: usize, y: usize, x: usize) -> f32 {
        self.data[(c * self.height + y) * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, c: usize, y: usize, x: usize, v: f32) {
        self.data[(c * self.height + y) * self.width + x] = v;
    }

    /// Flat slice of one channel plane.
    pub fn channel(&self, c: usize) -> &[f32] {
        let plane = self.height * self.width;
        &self.data[c * plane..(c + 1) * plane]
    }

    /// Single row of one channel.
    #[inline]
    pub(crate) fn row(&self, c: usize, y: usize) -> &[f32] {
        let start = (c * self.height + y) * self.width;
        &self.data[start..start + self.width]
    }

    pub fn map(&self, f: impl Fn(f32) -> f32) -> Tensor {
        Tensor {
            channels: self.channels,
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Square convolution kernel bank with per-output-channel bias.
///
/// `values` is flat `[out][in][ky][kx]`; the same layout is used by both the
/// forward and the transposed convolution.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvWeights {
    pub out_channels: usize,
    pub in_channels: usize,
    pub kernel: usize,
    pub values: Vec<f32>,
    pub bias: Vec<f32>,
}

impl ConvWeights {
    pub fn new(
        out_channels: usize,
        in_channels: usize,
        kernel: usize,
        values: Vec<f32>,
        bias: Vec<f32>,
    ) -> Result<ConvWeights> {
        if values.len() != out_channels * in_channels * kernel * kernel {
            return Err(Error::Shape(format!(
                "weight length {} != {}x{}x{}x{}",
                values.len(),
                out_channels,
                in_channels,
                kernel,
                kernel
            )));
        }
        if bias.len() != out_channels {
            return Err(Error::Shape(format!(
                "bias length {} != out_channels {}",
                bias.len(),
                out_channels
            )));
        }
        Ok(ConvWeights {
            out_channels,
            in_channels,
            kernel,
            values,
            bias,
        })
    }

    #[inline]
    pub fn at(&self, o: usize, i: usize, ky: usize, kx: usize) -> f32 {
        self.values[((o * self.in_channels + i) * self.kernel + ky) * self.kernel + kx]
    }
}

fn conv_output_extent(input: usize, kernel: usize, stride: usize, pad: usize) -> Result<usize> {
    let padded = input + 2 * pad;
    if padded < kernel {
        return Err(Error::Shape(format!(
            "non-positive conv output: input {input} + 2*pad {pad} < kernel {kernel}"
        )));
    }
    Ok((padded - kernel) / stride + 1)
}

/// 2-D convolution with zero padding.
pub fn conv2d(input: &Tensor, w: &ConvWeights, stride: usize, pad: usize) -> Result<Tensor> {
    if input.channels != w.in_channels {
        return Err(Error::Shape(format!(
            "conv2d: input channels {} != weight in_channels {}",
            input.channels, w.in_channels
        )));
    }
    if stride == 0 {
        return Err(Error::Argument("conv2d: stride must be >= 1".into()));
    }
    let out_h = conv_output_extent(input.height, w.kernel, stride, pad)?;
    let out_w = conv_output_extent(input.width, w.kernel, stride, pad)?;
    let k = w.kernel;
    let ih = input.height as isize;
    let iw = input.width as isize;

    let mut out = vec![0.0f32; w.out_channels * out_h * out_w];
    par::for_each_chunk(&mut out, out_h * out_w, |o, plane| {
        for oy in 0..out_h {
            for ox in 0..out_w {
                let mut acc = w.bias[o];
                for i in 0..input.channels {
                    for ky in 0..k {
                        let y = (oy * stride + ky) as isize - pad as isize;
                        if y < 0 || y >= ih {
                            continue;
                        }
                        let row = input.row(i, y as usize);
                        for kx in 0..k {
                            let x = (ox * stride + kx) as isize - pad as isize;
                            if x < 0 || x >= iw {
                                continue;
                            }
                            acc += w.at(o, i, ky, kx) * row[x as usize];
                        }
                    }
                }
                plane[oy * out_w + ox] = acc;
            }
        }
    });
    let t = Tensor::from_vec_unchecked(w.out_channels, out_h, out_w, out);
    debug_assert!(t.all_finite());
    Ok(t)
}

/// Transposed 2-D convolution (the scatter/gradient form of `conv2d`).
///
/// With kernel 4, stride 2, pad 1 the spatial extent exactly doubles.
pub fn conv_transpose2d(
    input: &Tensor,
    w: &ConvWeights,
    stride: usize,
    pad: usize,
) -> Result<Tensor> {
    if input.channels != w.in_channels {
        return Err(Error::Shape(format!(
            "conv_transpose2d: input channels {} != weight in_channels {}",
            input.channels, w.in_channels
        )));
    }
    if stride == 0 {
        return Err(Error::Argument("conv_transpose2d: stride must be >= 1".into()));
    }
    let k = w.kernel;
    let full_h = (input.height - 1) * stride + k;
    let full_w = (input.width - 1) * stride + k;
    if full_h < 2 * pad + 1 || full_w < 2 * pad + 1 {
        return Err(Error::Shape(
            "non-positive conv_transpose2d output extent".into(),
        ));
    }
    let out_h = full_h - 2 * pad;
    let out_w = full_w - 2 * pad;

    // Gather form of the scatter definition: out[o,oy,ox] sums w[o,i,ky,kx] *
    // in[i,y,x] over all (y,x,ky,kx) with oy = y*stride - pad + ky (same for x).
    let mut out = vec![0.0f32; w.out_channels * out_h * out_w];
    par::for_each_chunk(&mut out, out_h * out_w, |o, plane| {
        for oy in 0..out_h {
            for ox in 0..out_w {
                let mut acc = w.bias[o];
                for i in 0..input.channels {
                    for ky in 0..k {
                        let ynum = oy as isize + pad as isize - ky as isize;
                        if ynum < 0 || ynum % stride as isize != 0 {
                            continue;
                        }
                        let y = (ynum / stride as isize) as usize;
                        if y >= input.height {
                            continue;
                        }
                        let row = input.row(i, y);
                        for kx in 0..k {
                            let xnum = ox as isize + pad as isize - kx as isize;
                            if xnum < 0 || xnum % stride as isize != 0 {
                                continue;
                            }
                            let x = (xnum / stride as isize) as usize;
                            if x >= input.width {
                                continue;
                            }
                            acc += w.at(o, i, ky, kx) * row[x];
                        }
                    }
                }
                plane[oy * out_w + ox] = acc;
            }
        }
    });
    let t = Tensor::from_vec_unchecked(w.out_channels, out_h, out_w, out);
    debug_assert!(t.all_finite());
    Ok(t)
}

/// Elementwise `max(0, x)`.
pub fn relu(input: &Tensor) -> Tensor {
    input.map(|v| v.max(0.0))
}

/// Softmax across channels at every spatial location, with max-subtraction
/// for stability. Requires at least two channels.
pub fn softmax_channels(input: &Tensor) -> Result<Tensor> {
    if input.channels < 2 {
        return Err(Error::Shape(format!(
            "softmax_channels: needs >= 2 channels, got {}",
            input.channels
        )));
    }
    let plane = input.height * input.width;
    let mut out = vec![0.0f32; input.data.len()];
    for p in 0..plane {
        let mut m = f32::NEG_INFINITY;
        for c in 0..input.channels {
            m = m.max(input.data[c * plane + p]);
        }
        let mut sum = 0.0f32;
        for c in 0..input.channels {
            let e = (input.data[c * plane + p] - m).exp();
            out[c * plane + p] = e;
            sum += e;
        }
        for c in 0..input.channels {
            out[c * plane + p] /= sum;
        }
    }
    Ok(Tensor::from_vec_unchecked(
        input.channels,
        input.height,
        input.width,
        out,
    ))
}

fn check_correlation_shapes(template: &Tensor, search: &Tensor) -> Result<(usize, usize)> {
    if template.channels != search.channels {
        return Err(Error::Shape(format!(
            "correlate: channel mismatch {} vs {}",
            template.channels, search.channels
        )));
    }
    if template.height > search.height || template.width > search.width {
        return Err(Error::Shape(format!(
            "correlate: template {}x{} exceeds search {}x{}",
            template.height, template.width, search.height, search.width
        )));
    }
    Ok((
        search.height - template.height + 1,
        search.width - template.width + 1,
    ))
}

#[inline]
fn window_dot(template: &Tensor, search: &Tensor, c: usize, oy: usize, ox: usize) -> f32 {
    let mut acc = 0.0f32;
    for ty in 0..template.height {
        let trow = template.row(c, ty);
        let srow = &search.row(c, oy + ty)[ox..ox + template.width];
        acc += trow
            .iter()
            .zip(srow.iter())
            .map(|(a, b)| a * b)
            .sum::<f32>();
    }
    acc
}

/// Valid-mode cross-correlation summed over all channels: a single-channel
/// response of size `(Hs-Ht+1) x (Ws-Wt+1)` whose entry `(y, x)` is the dot
/// product of the template with the search window at that offset.
pub fn cross_correlate(template: &Tensor, search: &Tensor) -> Result<Tensor> {
    let (out_h, out_w) = check_correlation_shapes(template, search)?;
    let mut out = vec![0.0f32; out_h * out_w];
    par::for_each_chunk(&mut out, out_w, |oy, row| {
        for (ox, slot) in row.iter_mut().enumerate() {
            let mut acc = 0.0f32;
            for c in 0..template.channels {
                acc += window_dot(template, search, c, oy, ox);
            }
            *slot = acc;
        }
    });
    Ok(Tensor::from_vec_unchecked(1, out_h, out_w, out))
}

/// Cosine-normalized variant of [`cross_correlate`]: each response entry is
/// divided by `||template|| * ||window||`. Windows (or templates) with zero
/// norm produce 0.
pub fn cross_correlate_normalized(template: &Tensor, search: &Tensor) -> Result<Tensor> {
    let (out_h, out_w) = check_correlation_shapes(template, search)?;
    let tnorm = template
        .data
        .iter()
        .map(|v| (*v as f64) * (*v as f64))
        .sum::<f64>()
        .sqrt();
    let mut out = vec![0.0f32; out_h * out_w];
    par::for_each_chunk(&mut out, out_w, |oy, row| {
        for (ox, slot) in row.iter_mut().enumerate() {
            let mut acc = 0.0f32;
            let mut wsq = 0.0f64;
            for c in 0..template.channels {
                acc += window_dot(template, search, c, oy, ox);
                for ty in 0..template.height {
                    let srow = &search.row(c, oy + ty)[ox..ox + template.width];
                    wsq += srow.iter().map(|v| (*v as f64) * (*v as f64)).sum::<f64>();
                }
            }
            let denom = tnorm * wsq.sqrt();
            *slot = if denom > 0.0 {
                (acc as f64 / denom) as f32
            } else {
                0.0
            };
        }
    });
    Ok(Tensor::from_vec_unchecked(1, out_h, out_w, out))
}

/// Depthwise cross-correlation: channel `c` of the output is the valid-mode
/// correlation of channel `c` of the template with channel `c` of the search.
pub fn depthwise_correlate(template: &Tensor, search: &Tensor) -> Result<Tensor> {
    let (out_h, out_w) = check_correlation_shapes(template, search)?;
    let channels = template.channels;
    let mut out = vec![0.0f32; channels * out_h * out_w];
    // One chunk per output row across all channels, so narrow-channel inputs
    // still spread over the pool.
    par::for_each_chunk(&mut out, out_w, |idx, row| {
        let c = idx / out_h;
        let oy = idx % out_h;
        for (ox, slot) in row.iter_mut().enumerate() {
            *slot = window_dot(template, search, c, oy, ox);
        }
    });
    Ok(Tensor::from_vec_unchecked(channels, out_h, out_w, out))
}

/// Elementwise sum of two tensors of identical shape.
pub fn add(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    if (a.channels, a.height, a.width) != (b.channels, b.height, b.width) {
        return Err(Error::Shape(format!(
            "add: {}x{}x{} vs {}x{}x{}",
            a.channels, a.height, a.width, b.channels, b.height, b.width
        )));
    }
    let data = a
        .data
        .iter()
        .zip(b.data.iter())
        .map(|(x, y)| x + y)
        .collect();
    Ok(Tensor::from_vec_unchecked(a.channels, a.height, a.width, data))
}

/// Sum a tensor over its channel axis into a single-channel tensor.
pub fn sum_channels(input: &Tensor) -> Tensor {
    let plane = input.height * input.width;
    let mut out = vec![0.0f32; plane];
    for c in 0..input.channels {
        let src = input.channel(c);
        for (dst, v) in out.iter_mut().zip(src.iter()) {
            *dst += v;
        }
    }
    Tensor::from_vec_unchecked(1, input.height, input.width, out)
}

/// Nearest-neighbor spatial resampling to `height x width`.
pub fn resize_nearest(input: &Tensor, height: usize, width: usize) -> Result<Tensor> {
    if height == 0 || width == 0 {
        return Err(Error::Argument("resize_nearest: zero target extent".into()));
    }
    if input.height == 0 || input.width == 0 {
        return Err(Error::Argument("resize_nearest: empty input".into()));
    }
    let mut out = vec![0.0f32; input.channels * height * width];
    for c in 0..input.channels {
        for y in 0..height {
            let sy = (y * input.height) / height;
            let src = input.row(c, sy);
            let dst_start = (c * height + y) * width;
            for x in 0..width {
                let sx = (x * input.width) / width;
                out[dst_start + x] = src[sx];
            }
        }
    }
    Ok(Tensor::from_vec_unchecked(input.channels, height, width, out))
}

/// Zero-pad the spatial extent by the given amounts on each side.
pub fn pad_spatial(input: &Tensor, top: usize, bottom: usize, left: usize, right: usize) -> Tensor {
    let out_h = input.height + top + bottom;
    let out_w = input.width + left + right;
    let mut out = vec![0.0f32; input.channels * out_h * out_w];
    for c in 0..input.channels {
        for y in 0..input.height {
            let src = input.row(c, y);
            let dst_start = (c * out_h + y + top) * out_w + left;
            out[dst_start..dst_start + input.width].copy_from_slice(src);
        }
    }
    Tensor::from_vec_unchecked(input.channels, out_h, out_w, out)
}

/// Crop the spatial extent to `height x width` starting at the top-left corner.
pub fn crop_topleft(input: &Tensor, height: usize, width: usize) -> Result<Tensor> {
    if height > input.height || width > input.width {
        return Err(Error::Shape(format!(
            "crop_topleft: {}x{} exceeds input {}x{}",
            height, width, input.height, input.width
        )));
    }
    let mut out = vec![0.0f32; input.channels * height * width];
    for c in 0..input.channels {
        for y in 0..height {
            let src = &input.row(c, y)[..width];
            let dst_start = (c * height + y) * width;
            out[dst_start..dst_start + width].copy_from_slice(src);
        }
    }
    Ok(Tensor::from_vec_unchecked(input.channels, height, width, out))
}
