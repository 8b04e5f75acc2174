//! Shared-parameter fully convolutional feature extractor.
//!
//! Both the template branch and the search branch run the same backbone (one
//! function, so parameter sharing is structural). Two kinds exist: `conv`, a
//! small seeded stack of stride-2 conv+ReLU stages exercising the full
//! stride-8 geometry, and `identity`, which passes raw pixels through so the
//! correlation stage becomes plain template matching and stays verifiable
//! without training.

use crate::error::{Error, Result};
use crate::tensor::{self, ConvWeights, Tensor};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackboneKind {
    Identity,
    Conv,
}

/// Backbone construction parameters. `total_stride` must be a power of two
/// and equal the product of per-stage strides (the first `log2(total_stride)`
/// stages run at stride 2, the rest at stride 1).
#[derive(Debug, Clone, PartialEq)]
pub struct BackboneConfig {
    pub kind: BackboneKind,
    pub stage_channels: Vec<usize>,
    pub total_stride: usize,
    pub seed: u64,
}

impl BackboneConfig {
    /// Raw-pixel pass-through: stride 1, 3 channels.
    pub fn identity() -> BackboneConfig {
        BackboneConfig {
            kind: BackboneKind::Identity,
            stage_channels: vec![3],
            total_stride: 1,
            seed: 0,
        }
    }

    /// Default conv layout: 4 stages of conv(k=3)+ReLU, strides 2,2,2,1,
    /// channels 16,32,64,64 — stride-8 output like the full-size trackers.
    pub fn conv_default(seed: u64) -> BackboneConfig {
        BackboneConfig {
            kind: BackboneKind::Conv,
            stage_channels: vec![16, 32, 64, 64],
            total_stride: 8,
            seed,
        }
    }

    /// Compact stride-4 layout used to exercise alternative skip wiring.
    pub fn conv_small(seed: u64) -> BackboneConfig {
        BackboneConfig {
            kind: BackboneKind::Conv,
            stage_channels: vec![8, 16],
            total_stride: 4,
            seed,
        }
    }

    /// Per-stage strides implied by the config, after validation.
    pub fn stage_strides(&self) -> Result<Vec<usize>> {
        if self.stage_channels.iter().any(|&c| c == 0) {
            return Err(Error::Config("zero-channel backbone stage".into()));
        }
        match self.kind {
            BackboneKind::Identity => {
                if self.total_stride != 1 {
                    return Err(Error::Config(
                        "identity backbone requires total_stride 1".into(),
                    ));
                }
                Ok(vec![])
            }
            BackboneKind::Conv => {
                if self.stage_channels.is_empty() {
                    return Err(Error::Config("conv backbone needs at least one stage".into()));
                }
                if !self.total_stride.is_power_of_two() {
                    return Err(Error::Config(format!(
                        "total_stride {} is not a power of two",
                        self.total_stride
                    )));
                }
                let doubling = self.total_stride.trailing_zeros() as usize;
                if doubling > self.stage_channels.len() {
                    return Err(Error::Config(format!(
                        "total_stride {} needs {} stages, have {}",
                        self.total_stride,
                        doubling,
                        self.stage_channels.len()
                    )));
                }
                let mut strides = vec![2usize; doubling];
                strides.resize(self.stage_channels.len(), 1);
                Ok(strides)
            }
        }
    }
}

/// One backbone stage output with its cumulative stride.
#[derive(Debug, Clone)]
pub struct StageFeatures {
    pub tensor: Tensor,
    pub stride: usize,
}

/// Ordered stage outputs, shallow to deep, plus the input extent they came
/// from.
#[derive(Debug, Clone)]
pub struct FeaturePyramid {
    pub stages: Vec<StageFeatures>,
    pub input_height: usize,
    pub input_width: usize,
}

impl FeaturePyramid {
    pub fn deepest(&self) -> &StageFeatures {
        self.stages.last().expect("pyramid has at least one stage")
    }
}

#[derive(Debug, Clone)]
struct Stage {
    weights: ConvWeights,
    stride: usize,
}

/// Immutable feature extractor; see [`BackboneConfig`].
#[derive(Debug, Clone)]
pub struct Backbone {
    kind: BackboneKind,
    stages: Vec<Stage>,
    total_stride: usize,
    seed: u64,
}

const KERNEL: usize = 3;
const PAD: usize = 1;

fn seeded_conv_weights(
    rng: &mut ChaCha8Rng,
    out_channels: usize,
    in_channels: usize,
    kernel: usize,
) -> ConvWeights {
    // Uniform in [-s, s] with s = (in_ch * k^2)^(-1/2); biases start at zero.
    let s = 1.0 / ((in_channels * kernel * kernel) as f32).sqrt();
    let values = (0..out_channels * in_channels * kernel * kernel)
        .map(|_| rng.random_range(-s..=s))
        .collect();
    ConvWeights::new(out_channels, in_channels, kernel, values, vec![0.0; out_channels])
        .expect("generated weight dimensions are consistent")
}

/// Deterministically build a backbone from its config.
pub fn build_backbone(config: &BackboneConfig) -> Result<Backbone> {
    let strides = config.stage_strides()?;
    let mut stages = Vec::new();
    if config.kind == BackboneKind::Conv {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut in_channels = 3;
        for (&out_channels, &stride) in config.stage_channels.iter().zip(strides.iter()) {
            stages.push(Stage {
                weights: seeded_conv_weights(&mut rng, out_channels, in_channels, KERNEL),
                stride,
            });
            in_channels = out_channels;
        }
    }
    Ok(Backbone {
        kind: config.kind,
        stages,
        total_stride: config.total_stride,
        seed: config.seed,
    })
}

impl Backbone {
    pub fn kind(&self) -> BackboneKind {
        self.kind
    }

    pub fn total_stride(&self) -> usize {
        self.total_stride
    }

    /// Channel count of each pyramid stage.
    pub fn stage_channels(&self) -> Vec<usize> {
        match self.kind {
            BackboneKind::Identity => vec![3],
            BackboneKind::Conv => self.stages.iter().map(|s| s.weights.out_channels).collect(),
        }
    }

    /// Run the extractor on a 3-channel patch. Pure: the same patch yields
    /// the same pyramid no matter which branch calls it.
    pub fn extract_features(&self, patch: &Tensor) -> Result<FeaturePyramid> {
        if patch.channels() != 3 {
            return Err(Error::Shape(format!(
                "backbone expects 3-channel input, got {}",
                patch.channels()
            )));
        }
        let mut stages = Vec::new();
        match self.kind {
            BackboneKind::Identity => {
                stages.push(StageFeatures {
                    tensor: patch.clone(),
                    stride: 1,
                });
            }
            BackboneKind::Conv => {
                let mut x = patch.clone();
                let mut stride = 1;
                for stage in &self.stages {
                    x = tensor::relu(&tensor::conv2d(&x, &stage.weights, stage.stride, PAD)?);
                    stride *= stage.stride;
                    stages.push(StageFeatures {
                        tensor: x.clone(),
                        stride,
                    });
                }
            }
        }
        Ok(FeaturePyramid {
            stages,
            input_height: patch.height(),
            input_width: patch.width(),
        })
    }

    /// Serialize to a flat binary file: magic + kind + stage layout header,
    /// then little-endian f32 weight and bias arrays per stage.
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        w.write_all(b"SSBK").map_err(io)?;
        w.write_all(&1u32.to_le_bytes()).map_err(io)?;
        w.write_all(&[match self.kind {
            BackboneKind::Identity => 0u8,
            BackboneKind::Conv => 1u8,
        }])
        .map_err(io)?;
        w.write_all(&(self.total_stride as u32).to_le_bytes()).map_err(io)?;
        w.write_all(&self.seed.to_le_bytes()).map_err(io)?;
        w.write_all(&(self.stages.len() as u32).to_le_bytes()).map_err(io)?;
        for stage in &self.stages {
            for v in [
                stage.weights.out_channels as u32,
                stage.weights.in_channels as u32,
                stage.weights.kernel as u32,
                stage.stride as u32,
            ] {
                w.write_all(&v.to_le_bytes()).map_err(io)?;
            }
            for v in &stage.weights.values {
                w.write_all(&v.to_le_bytes()).map_err(io)?;
            }
            for v in &stage.weights.bias {
                w.write_all(&v.to_le_bytes()).map_err(io)?;
            }
        }
        w.flush().map_err(io)
    }

    /// Load a backbone previously written by [`Backbone::save`].
    pub fn load(path: &Path) -> Result<Backbone> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(file);
        let fail = |msg: &str| Error::format(path, 0, msg);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(|e| Error::io(path, e))?;
        if &magic != b"SSBK" {
            return Err(fail("bad magic"));
        }
        let mut u32buf = [0u8; 4];
        let mut read_u32 = |r: &mut BufReader<File>| -> Result<u32> {
            r.read_exact(&mut u32buf).map_err(|e| Error::io(path, e))?;
            Ok(u32::from_le_bytes(u32buf))
        };
        if read_u32(&mut r)? != 1 {
            return Err(fail("unsupported version"));
        }
        let mut kind_byte = [0u8; 1];
        r.read_exact(&mut kind_byte).map_err(|e| Error::io(path, e))?;
        let kind = match kind_byte[0] {
            0 => BackboneKind::Identity,
            1 => BackboneKind::Conv,
            _ => return Err(fail("unknown backbone kind")),
        };
        let total_stride = read_u32(&mut r)? as usize;
        let mut u64buf = [0u8; 8];
        r.read_exact(&mut u64buf).map_err(|e| Error::io(path, e))?;
        let seed = u64::from_le_bytes(u64buf);
        let n_stages = read_u32(&mut r)? as usize;
        let mut stages = Vec::with_capacity(n_stages);
        for _ in 0..n_stages {
            let out_channels = read_u32(&mut r)? as usize;
            let in_channels = read_u32(&mut r)? as usize;
            let kernel = read_u32(&mut r)? as usize;
            let stride = read_u32(&mut r)? as usize;
            let mut read_f32s = |n: usize| -> Result<Vec<f32>> {
                let mut buf = vec![0u8; n * 4];
                r.read_exact(&mut buf).map_err(|e| Error::io(path, e))?;
                Ok(buf
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                    .collect())
            };
            let values = read_f32s(out_channels * in_channels * kernel * kernel)?;
            let bias = read_f32s(out_channels)?;
            stages.push(Stage {
                weights: ConvWeights::new(out_channels, in_channels, kernel, values, bias)
                    .map_err(|_| fail("inconsistent stage dimensions"))?,
                stride,
            });
        }
        Ok(Backbone {
            kind,
            stages,
            total_stride,
            seed,
        })
    }
}

/// Elementwise mean of correlation responses. All responses must already
/// share channel count and spatial extent (resample first if they differ).
pub fn aggregate_multilayer(responses: &[Tensor]) -> Result<Tensor> {
    let first = responses
        .first()
        .ok_or_else(|| Error::Argument("aggregate_multilayer: empty response list".into()))?;
    let shape = (first.channels(), first.height(), first.width());
    let mut acc: Vec<f32> = first.data().to_vec();
    for t in &responses[1..] {
        if (t.channels(), t.height(), t.width()) != shape {
            return Err(Error::Shape(
                "aggregate_multilayer: responses differ in extent".into(),
            ));
        }
        for (a, v) in acc.iter_mut().zip(t.data()) {
            *a += v;
        }
    }
    let n = responses.len() as f32;
    acc.iter_mut().for_each(|v| *v /= n);
    Ok(Tensor::from_vec(shape.0, shape.1, shape.2, acc).expect("aggregated shape is consistent"))
}
