//! Flat `key = value` config files.
//!
//! Every tracker and evaluation knob is reachable; unknown keys are errors
//! so typos fail loudly. `#` starts a comment, blank lines are ignored.

use crate::backbone::{BackboneConfig, BackboneKind};
use crate::detect::HeadKind;
use crate::error::{Error, Result};
use crate::metrics::EvalConfig;
use crate::pipeline::TrackerConfig;
use crate::segment::SegBackend;
use std::path::Path;

/// Full runtime configuration: tracking plus evaluation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub tracker: TrackerConfig,
    pub eval: EvalConfig,
}

fn parse_list<T: std::str::FromStr>(value: &str) -> Option<Vec<T>> {
    value
        .split(',')
        .map(|tok| tok.trim().parse::<T>().ok())
        .collect()
}

fn apply_key(cfg: &mut RunConfig, key: &str, value: &str) -> std::result::Result<(), String> {
    let parse_num = |v: &str| -> std::result::Result<usize, String> {
        v.parse().map_err(|_| format!("expected integer, got {v:?}"))
    };
    let parse_f64 = |v: &str| -> std::result::Result<f64, String> {
        v.parse().map_err(|_| format!("expected real, got {v:?}"))
    };
    let parse_bool = |v: &str| -> std::result::Result<bool, String> {
        match v {
            "true" | "on" | "1" => Ok(true),
            "false" | "off" | "0" => Ok(false),
            _ => Err(format!("expected boolean, got {v:?}")),
        }
    };
    match key {
        "backbone.kind" => {
            cfg.tracker.backbone.kind = match value {
                "identity" => BackboneKind::Identity,
                "conv" => {
                    // switching kinds picks up the conv defaults unless
                    // overridden by later keys
                    if cfg.tracker.backbone.kind == BackboneKind::Identity {
                        cfg.tracker.backbone = BackboneConfig::conv_default(cfg.tracker.backbone.seed);
                    }
                    BackboneKind::Conv
                }
                _ => return Err(format!("unknown backbone kind {value:?}")),
            };
        }
        "backbone.channels" => {
            cfg.tracker.backbone.stage_channels =
                parse_list(value).ok_or_else(|| format!("bad channel list {value:?}"))?;
        }
        "backbone.stride" => cfg.tracker.backbone.total_stride = parse_num(value)?,
        "backbone.seed" => {
            cfg.tracker.backbone.seed =
                value.parse().map_err(|_| format!("bad seed {value:?}"))?;
        }
        "head.kind" => {
            cfg.tracker.head.kind = match value {
                "corr_peak" => HeadKind::CorrPeak,
                "conv" => HeadKind::Conv,
                _ => return Err(format!("unknown head kind {value:?}")),
            };
        }
        "head.seed" => {
            cfg.tracker.head.seed = value.parse().map_err(|_| format!("bad seed {value:?}"))?;
        }
        "head.aggregate_stages" => cfg.tracker.head.aggregate_stages = parse_num(value)?,
        "head.window_weight" => cfg.tracker.head.window_weight = parse_f64(value)? as f32,
        "head.conv_channels" => cfg.tracker.head.conv_channels = parse_num(value)?,
        "seg.backend" => {
            cfg.tracker.seg.backend = match value {
                "histogram" => SegBackend::Histogram,
                "neural" => SegBackend::Neural,
                _ => return Err(format!("unknown segmentation backend {value:?}")),
            };
        }
        "seg.threshold" => cfg.tracker.seg.threshold = parse_f64(value)? as f32,
        "seg.margin" => cfg.tracker.seg.box_margin = parse_f64(value)?,
        "seg.keep_largest" => cfg.tracker.seg.keep_largest_component = parse_bool(value)?,
        "seg.bins" => cfg.tracker.seg.bins = parse_num(value)?,
        "seg.seed" => {
            cfg.tracker.seg.seed = value.parse().map_err(|_| format!("bad seed {value:?}"))?;
        }
        "seg.refine_width" => cfg.tracker.seg.refine_width = parse_num(value)?,
        "crop.exemplar" => cfg.tracker.crop.exemplar_out = parse_num(value)?,
        "crop.search" => cfg.tracker.crop.search_out = parse_num(value)?,
        "crop.context" => cfg.tracker.crop.context = parse_f64(value)?,
        "eval.burn_in" => cfg.eval.burn_in = parse_num(value)?,
        "eval.reinit_gap" => cfg.eval.reinit_gap = parse_num(value)?,
        "eval.eao_interval" => {
            let vals: Vec<usize> =
                parse_list(value).ok_or_else(|| format!("bad interval {value:?}"))?;
            if vals.len() != 2 {
                return Err("eao_interval needs exactly LO,HI".into());
            }
            cfg.eval.eao_interval = Some((vals[0], vals[1]));
        }
        "eval.sr_thresholds" => {
            cfg.eval.sr_thresholds =
                parse_list(value).ok_or_else(|| format!("bad threshold list {value:?}"))?;
        }
        _ => return Err(format!("unknown key {key:?}")),
    }
    Ok(())
}

/// Parse config text; `origin` names the source in error messages.
pub fn parse_config(text: &str, origin: &Path) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::format(origin, i + 1, format!("expected key = value, got {line:?}")))?;
        apply_key(&mut cfg, key.trim(), value.trim())
            .map_err(|msg| Error::format(origin, i + 1, msg))?;
    }
    cfg.tracker.validate()?;
    cfg.eval.validate()?;
    Ok(cfg)
}

pub fn parse_config_file(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn origin() -> PathBuf {
        PathBuf::from("test.cfg")
    }

    #[test]
    fn parses_full_config() {
        let text = "\
# tracker
backbone.kind = conv
backbone.channels = 8,16
backbone.stride = 4
backbone.seed = 9
head.kind = conv
head.window_weight = 0.25
seg.backend = neural
seg.threshold = 0.4
crop.exemplar = 63
crop.search = 127
eval.burn_in = 3
eval.eao_interval = 5,25
eval.sr_thresholds = 0.3,0.6
";
        let cfg = parse_config(text, &origin()).unwrap();
        assert_eq!(cfg.tracker.backbone.kind, BackboneKind::Conv);
        assert_eq!(cfg.tracker.backbone.stage_channels, vec![8, 16]);
        assert_eq!(cfg.tracker.head.kind, HeadKind::Conv);
        assert_eq!(cfg.tracker.seg.backend, SegBackend::Neural);
        assert_eq!(cfg.tracker.crop.exemplar_out, 63);
        assert_eq!(cfg.eval.eao_interval, Some((5, 25)));
        assert_eq!(cfg.eval.sr_thresholds, vec![0.3, 0.6]);
    }

    #[test]
    fn unknown_keys_are_errors() {
        match parse_config("backbone.typo = 1\n", &origin()) {
            Err(Error::Format { line, msg, .. }) => {
                assert_eq!(line, 1);
                assert!(msg.contains("unknown key"));
            }
            other => panic!("expected format error, got {other:?}"),
        }
        assert!(parse_config("just a line\n", &origin()).is_err());
        assert!(parse_config("seg.threshold = nope\n", &origin()).is_err());
    }

    #[test]
    fn invalid_values_fail_validation() {
        assert!(parse_config("seg.threshold = 1.5\n", &origin()).is_err());
        assert!(parse_config("crop.search = 64\ncrop.exemplar = 127\n", &origin()).is_err());
        assert!(parse_config("backbone.kind = conv\nbackbone.stride = 12\n", &origin()).is_err());
    }

    #[test]
    fn defaults_are_functional() {
        let cfg = parse_config("", &origin()).unwrap();
        assert_eq!(cfg.tracker.backbone.kind, BackboneKind::Identity);
        assert_eq!(cfg.tracker.head.kind, HeadKind::CorrPeak);
        assert_eq!(cfg.tracker.seg.backend, SegBackend::Histogram);
        assert_eq!(cfg.eval.burn_in, 10);
    }
}
