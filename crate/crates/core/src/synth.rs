//! Deterministic synthetic sequences for desk-scale verification: a seeded
//! random-texture square drifting over a noisy gray background, reflecting
//! off the borders, optionally rotating, with exact per-frame ground truth.

use crate::error::{Error, Result};
use crate::geometry::Polygon;
use crate::io::{write_ppm, GtFormat, Sequence, GROUNDTRUTH_FILE};
use crate::par;
use crate::tensor::Tensor;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub frames: usize,
    /// Square frame extent in pixels.
    pub image_size: usize,
    /// Square target extent in pixels.
    pub target_size: usize,
    /// Target velocity in pixels per frame.
    pub velocity: (f64, f64),
    /// Target rotation in radians per frame.
    pub rotation_rate: f64,
    /// Gaussian background noise, in [0, 1] intensity units.
    pub noise_sigma: f64,
    pub texture_seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            frames: 50,
            image_size: 128,
            target_size: 24,
            velocity: (2.0, 0.0),
            rotation_rate: 0.0,
            noise_sigma: 0.0,
            texture_seed: 1,
        }
    }
}

impl SynthConfig {
    /// Border margin that keeps the (possibly rotated) target fully inside.
    fn margin(&self) -> f64 {
        let half = self.target_size as f64 / 2.0;
        if self.rotation_rate != 0.0 {
            half * std::f64::consts::SQRT_2
        } else {
            half
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames == 0 {
            return Err(Error::Config("synth: frames must be >= 1".into()));
        }
        if self.target_size == 0 {
            return Err(Error::Config("synth: target_size must be >= 1".into()));
        }
        if self.noise_sigma < 0.0 {
            return Err(Error::Config("synth: negative noise sigma".into()));
        }
        if (self.image_size as f64) < 2.0 * self.margin() + 2.0 {
            return Err(Error::Config(format!(
                "synth: target {} does not fit in image {}",
                self.target_size, self.image_size
            )));
        }
        Ok(())
    }
}

/// Reflect `x` into `[lo, hi]`, flipping `v` on each bounce.
fn reflect(mut x: f64, mut v: f64, lo: f64, hi: f64) -> (f64, f64) {
    loop {
        if x < lo {
            x = lo + (lo - x);
            v = -v;
        } else if x > hi {
            x = hi - (x - hi);
            v = -v;
        } else {
            return (x, v);
        }
    }
}

struct TargetState {
    center: (f64, f64),
    angle: f64,
}

fn trajectory(cfg: &SynthConfig) -> Vec<TargetState> {
    let m = cfg.margin();
    let lo = m;
    let hi = cfg.image_size as f64 - m;
    let mut center = (cfg.image_size as f64 / 2.0, cfg.image_size as f64 / 2.0);
    let mut vel = cfg.velocity;
    let mut states = Vec::with_capacity(cfg.frames);
    for i in 0..cfg.frames {
        states.push(TargetState {
            center,
            angle: cfg.rotation_rate * i as f64,
        });
        let (x, vx) = reflect(center.0 + vel.0, vel.0, lo, hi);
        let (y, vy) = reflect(center.1 + vel.1, vel.1, lo, hi);
        center = (x, y);
        vel = (vx, vy);
    }
    states
}

fn gt_polygon(state: &TargetState, half: f64) -> Polygon {
    let (sin, cos) = state.angle.sin_cos();
    let corners = [(-half, -half), (half, -half), (half, half), (-half, half)];
    Polygon::new(
        corners
            .iter()
            .map(|&(u, v)| {
                (
                    state.center.0 + u * cos - v * sin,
                    state.center.1 + u * sin + v * cos,
                )
            })
            .collect(),
    )
    .expect("target square is a valid polygon")
}

fn render_frame(cfg: &SynthConfig, texture: &[u8], state: &TargetState, index: usize) -> Vec<u8> {
    let n = cfg.image_size;
    let mut rgb = vec![128u8; n * n * 3];
    if cfg.noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(
            cfg.texture_seed
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .wrapping_add(index as u64 + 1),
        );
        let normal = rand_distr::Normal::new(0.5, cfg.noise_sigma).expect("sigma validated");
        for b in rgb.iter_mut() {
            let v: f64 = normal.sample(&mut rng);
            *b = (v.clamp(0.0, 1.0) * 255.0).round() as u8;
        }
    }
    let half = cfg.target_size as f64 / 2.0;
    let (sin, cos) = state.angle.sin_cos();
    let t = cfg.target_size;
    for r in 0..n {
        let py = r as f64 + 0.5 - state.center.1;
        for c in 0..n {
            let px = c as f64 + 0.5 - state.center.0;
            // rotate the pixel center into target-local coordinates
            let u = px * cos + py * sin;
            let v = -px * sin + py * cos;
            if u.abs() < half && v.abs() < half {
                let tx = ((u + half) as usize).min(t - 1);
                let ty = ((v + half) as usize).min(t - 1);
                let src = (ty * t + tx) * 3;
                let dst = (r * n + c) * 3;
                rgb[dst..dst + 3].copy_from_slice(&texture[src..src + 3]);
            }
        }
    }
    rgb
}

fn rgb_to_tensor(rgb: &[u8], n: usize) -> Tensor {
    let plane = n * n;
    let mut data = vec![0.0f32; 3 * plane];
    for (i, px) in rgb.chunks_exact(3).enumerate() {
        data[i] = px[0] as f32 / 255.0;
        data[plane + i] = px[1] as f32 / 255.0;
        data[2 * plane + i] = px[2] as f32 / 255.0;
    }
    Tensor::from_vec(3, n, n, data).expect("frame buffer is consistent")
}

fn generate(cfg: &SynthConfig) -> Result<(Vec<Vec<u8>>, Vec<Polygon>)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.texture_seed);
    let texture: Vec<u8> = (0..cfg.target_size * cfg.target_size * 3)
        .map(|_| rng.random())
        .collect();
    let states = trajectory(cfg);
    let half = cfg.target_size as f64 / 2.0;
    let frames = par::map_indexed(states.len(), |i| render_frame(cfg, &texture, &states[i], i));
    let gt = states.iter().map(|s| gt_polygon(s, half)).collect();
    Ok((frames, gt))
}

/// Generate an in-memory synthetic sequence named `name`.
pub fn synth_sequence(cfg: &SynthConfig, name: &str) -> Result<Sequence> {
    let (frames, gt) = generate(cfg)?;
    let tensors = frames
        .iter()
        .map(|rgb| rgb_to_tensor(rgb, cfg.image_size))
        .collect();
    Sequence::from_memory(name.to_string(), tensors, gt, GtFormat::VotPolygon)
}

/// Generate a synthetic sequence and write it as `dir/name/` with PPM frames
/// and a polygon ground-truth file; also returns the in-memory sequence.
pub fn write_synth_sequence(cfg: &SynthConfig, dir: &Path, name: &str) -> Result<Sequence> {
    let (frames, gt) = generate(cfg)?;
    let seq_dir = dir.join(name);
    std::fs::create_dir_all(&seq_dir).map_err(|e| Error::io(&seq_dir, e))?;
    for (i, rgb) in frames.iter().enumerate() {
        let path = seq_dir.join(format!("{:08}.ppm", i + 1));
        write_ppm(&path, cfg.image_size, cfg.image_size, rgb)?;
    }
    let gt_text: String = gt
        .iter()
        .map(|p| p.to_region_string() + "\n")
        .collect();
    let gt_path = seq_dir.join(GROUNDTRUTH_FILE);
    std::fs::write(&gt_path, gt_text).map_err(|e| Error::io(&gt_path, e))?;
    let tensors = frames
        .iter()
        .map(|rgb| rgb_to_tensor(rgb, cfg.image_size))
        .collect();
    Sequence::from_memory(name.to_string(), tensors, gt, GtFormat::VotPolygon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::polygon_to_axis;
    use crate::io::{load_sequence, GtFormat};
    use tempfile::tempdir;

    #[test]
    fn single_static_frame_has_centered_gt() {
        let cfg = SynthConfig {
            frames: 1,
            velocity: (0.0, 0.0),
            ..SynthConfig::default()
        };
        let seq = synth_sequence(&cfg, "s").unwrap();
        assert_eq!(seq.len(), 1);
        let b = polygon_to_axis(&seq.gt[0]);
        assert_eq!((b.x0, b.y0, b.x1, b.y1), (52.0, 52.0, 76.0, 76.0));
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = SynthConfig {
            frames: 5,
            noise_sigma: 0.1,
            rotation_rate: 0.05,
            ..SynthConfig::default()
        };
        let a = synth_sequence(&cfg, "s").unwrap();
        let b = synth_sequence(&cfg, "s").unwrap();
        for i in 0..a.len() {
            assert_eq!(a.frame(i).unwrap(), b.frame(i).unwrap());
            assert_eq!(a.gt[i], b.gt[i]);
        }
    }

    #[test]
    fn constant_velocity_shifts_center_linearly() {
        let cfg = SynthConfig {
            frames: 11,
            velocity: (2.0, 0.0),
            ..SynthConfig::default()
        };
        let seq = synth_sequence(&cfg, "s").unwrap();
        let c0 = polygon_to_axis(&seq.gt[0]).center();
        let c10 = polygon_to_axis(&seq.gt[10]).center();
        assert_eq!(c10.0 - c0.0, 20.0);
        assert_eq!(c10.1, c0.1);
    }

    #[test]
    fn trajectory_reflects_and_stays_inside() {
        let cfg = SynthConfig {
            frames: 300,
            velocity: (3.0, 1.7),
            rotation_rate: 0.03,
            ..SynthConfig::default()
        };
        let seq = synth_sequence(&cfg, "s").unwrap();
        for p in &seq.gt {
            for &(x, y) in p.vertices() {
                assert!(x >= 0.0 && x <= cfg.image_size as f64);
                assert!(y >= 0.0 && y <= cfg.image_size as f64);
            }
        }
    }

    #[test]
    fn axis_aligned_target_renders_texture_exactly() {
        let cfg = SynthConfig {
            frames: 1,
            velocity: (0.0, 0.0),
            ..SynthConfig::default()
        };
        let seq = synth_sequence(&cfg, "s").unwrap();
        let frame = seq.frame(0).unwrap();
        // regenerate the texture stream and compare the target block texel
        // by texel; everything outside stays background gray
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.texture_seed);
        let texture: Vec<u8> = (0..24 * 24 * 3).map(|_| rng.random()).collect();
        for ty in 0..24 {
            for tx in 0..24 {
                for ch in 0..3 {
                    let want = texture[(ty * 24 + tx) * 3 + ch] as f32 / 255.0;
                    assert_eq!(frame.at(ch, 52 + ty, 52 + tx), want);
                }
            }
        }
        assert_eq!(frame.at(0, 51, 51), 128.0 / 255.0);
        assert_eq!(frame.at(2, 76, 76), 128.0 / 255.0);
    }

    #[test]
    fn written_sequence_loads_back_identically() {
        let dir = tempdir().unwrap();
        let cfg = SynthConfig {
            frames: 3,
            noise_sigma: 0.05,
            ..SynthConfig::default()
        };
        let mem = write_synth_sequence(&cfg, dir.path(), "seq01").unwrap();
        let loaded = load_sequence(&dir.path().join("seq01"), GtFormat::VotPolygon).unwrap();
        assert_eq!(loaded.len(), mem.len());
        for i in 0..mem.len() {
            assert_eq!(loaded.frame(i).unwrap(), mem.frame(i).unwrap());
            assert_eq!(loaded.gt[i], mem.gt[i]);
        }
    }

    #[test]
    fn oversized_target_rejected() {
        let cfg = SynthConfig {
            image_size: 20,
            target_size: 24,
            ..SynthConfig::default()
        };
        assert!(synth_sequence(&cfg, "s").is_err());
    }
}
