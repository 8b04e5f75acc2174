//! Trace files: one line per frame.
//!
//! `1` marks an init frame, `0` a skipped frame, `2` a failure, and a
//! tracked frame serializes its polygon as 8 comma-separated reals. Floats
//! print in shortest round-trip form, so read-back is lossless.

use crate::error::{Error, Result};
use crate::geometry::Polygon;
use crate::metrics::{FrameRecord, RunTrace};
use std::path::Path;

/// Render a trace to its file format.
pub fn render_trace(trace: &RunTrace) -> String {
    let mut out = String::new();
    for rec in &trace.records {
        match rec {
            FrameRecord::Init => out.push('1'),
            FrameRecord::Skipped => out.push('0'),
            FrameRecord::Failed => out.push('2'),
            FrameRecord::Tracked(poly) => out.push_str(&poly.to_region_string()),
        }
        out.push('\n');
    }
    out
}

pub fn write_trace(path: &Path, trace: &RunTrace) -> Result<()> {
    std::fs::write(path, render_trace(trace)).map_err(|e| Error::io(path, e))
}

/// Parse trace text; `origin` names the source in error messages.
pub fn parse_trace(text: &str, sequence: &str, origin: &Path) -> Result<RunTrace> {
    let path = origin;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let rec = match line {
            "1" => FrameRecord::Init,
            "0" => FrameRecord::Skipped,
            "2" => FrameRecord::Failed,
            _ => {
                let vals: Option<Vec<f64>> = line
                    .split(',')
                    .map(|tok| tok.trim().parse::<f64>().ok())
                    .collect();
                let vals = vals
                    .filter(|v| v.len() == 8)
                    .ok_or_else(|| Error::format(path, i + 1, "expected 1/0/2 or 8 reals"))?;
                let poly = Polygon::new(vec![
                    (vals[0], vals[1]),
                    (vals[2], vals[3]),
                    (vals[4], vals[5]),
                    (vals[6], vals[7]),
                ])
                .map_err(|e| Error::format(path, i + 1, e.to_string()))?;
                FrameRecord::Tracked(poly)
            }
        };
        records.push(rec);
    }
    let trace = RunTrace {
        sequence: sequence.to_string(),
        records,
    };
    trace
        .validate()
        .map_err(|e| Error::format(path, 0, e.to_string()))?;
    Ok(trace)
}

/// Read and parse a trace file.
pub fn read_trace(path: &Path, sequence: &str) -> Result<RunTrace> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trace(&text, sequence, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use tempfile::tempdir;

    fn random_trace(seed: u64) -> RunTrace {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut records = vec![FrameRecord::Init];
        let mut gap_left = 0usize;
        for _ in 0..40 {
            if gap_left > 0 {
                gap_left -= 1;
                if gap_left == 0 {
                    records.push(FrameRecord::Init);
                } else {
                    records.push(FrameRecord::Skipped);
                }
                continue;
            }
            if rng.random_bool(0.15) {
                records.push(FrameRecord::Failed);
                gap_left = 3;
            } else {
                let x = rng.random_range(-10.0..10.0);
                let y = rng.random_range(-10.0..10.0);
                let w = rng.random_range(0.5..9.0);
                let h = rng.random_range(0.5..9.0);
                records.push(FrameRecord::Tracked(
                    Polygon::new(vec![(x, y), (x + w, y), (x + w, y + h), (x, y + h)]).unwrap(),
                ));
            }
        }
        RunTrace {
            sequence: "rt".into(),
            records,
        }
    }

    #[test]
    fn round_trip_is_lossless() {
        let dir = tempdir().unwrap();
        for seed in 0..10 {
            let trace = random_trace(seed);
            let path = dir.path().join(format!("{seed}.txt"));
            write_trace(&path, &trace).unwrap();
            let back = read_trace(&path, "rt").unwrap();
            assert_eq!(back, trace);
        }
    }

    #[test]
    fn rejects_malformed_lines_and_invalid_traces() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        std::fs::write(&path, "1\n3\n").unwrap();
        assert!(matches!(
            read_trace(&path, "x"),
            Err(Error::Format { line: 2, .. })
        ));
        // Skipped without failure violates the trace invariants.
        std::fs::write(&path, "1\n0\n").unwrap();
        assert!(read_trace(&path, "x").is_err());
    }
}
