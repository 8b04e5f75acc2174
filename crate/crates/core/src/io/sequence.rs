//! Sequence and dataset loading.
//!
//! A sequence directory holds lexicographically ordered `*.ppm` frames and a
//! `groundtruth.txt` with one region per line. A dataset directory holds one
//! subdirectory per sequence.

use super::ppm::read_ppm;
use crate::error::{Error, Result};
use crate::geometry::Polygon;
use crate::tensor::Tensor;
use std::path::{Path, PathBuf};

pub const GROUNDTRUTH_FILE: &str = "groundtruth.txt";

/// Ground-truth annotation flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GtFormat {
    /// 8 reals per line (4 reals auto-promote to a rectangle polygon).
    VotPolygon,
    /// Exactly 4 reals `x,y,w,h` per line.
    GotXywh,
}

#[derive(Debug, Clone)]
enum FrameStore {
    Files(Vec<PathBuf>),
    Memory(Vec<Tensor>),
}

/// Ordered frames plus per-frame ground-truth regions.
#[derive(Debug, Clone)]
pub struct Sequence {
    pub name: String,
    frames: FrameStore,
    pub gt: Vec<Polygon>,
    pub format: GtFormat,
}

impl Sequence {
    pub fn from_memory(
        name: String,
        frames: Vec<Tensor>,
        gt: Vec<Polygon>,
        format: GtFormat,
    ) -> Result<Sequence> {
        if frames.len() != gt.len() {
            return Err(Error::Argument(format!(
                "sequence {name}: {} frames vs {} regions",
                frames.len(),
                gt.len()
            )));
        }
        Ok(Sequence {
            name,
            frames: FrameStore::Memory(frames),
            gt,
            format,
        })
    }

    pub fn len(&self) -> usize {
        self.gt.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gt.is_empty()
    }

    /// Fetch frame `idx`, reading from disk for file-backed sequences.
    pub fn frame(&self, idx: usize) -> Result<Tensor> {
        match &self.frames {
            FrameStore::Memory(frames) => frames
                .get(idx)
                .cloned()
                .ok_or_else(|| Error::Argument(format!("frame {idx} out of range"))),
            FrameStore::Files(paths) => {
                let path = paths
                    .get(idx)
                    .ok_or_else(|| Error::Argument(format!("frame {idx} out of range")))?;
                read_ppm(path)
            }
        }
    }
}

fn parse_reals(line: &str) -> Option<Vec<f64>> {
    line.split(',')
        .map(|tok| tok.trim().parse::<f64>().ok())
        .collect()
}

fn xywh_polygon(x: f64, y: f64, w: f64, h: f64) -> Result<Polygon> {
    Polygon::new(vec![(x, y), (x + w, y), (x + w, y + h), (x, y + h)])
}

/// Parse one ground-truth line into a polygon region.
pub fn parse_region_line(line: &str, format: GtFormat) -> Result<Polygon> {
    let vals = parse_reals(line)
        .ok_or_else(|| Error::Argument(format!("unparsable region line: {line:?}")))?;
    match (format, vals.len()) {
        (GtFormat::VotPolygon, 8) => Polygon::new(vec![
            (vals[0], vals[1]),
            (vals[2], vals[3]),
            (vals[4], vals[5]),
            (vals[6], vals[7]),
        ]),
        (GtFormat::VotPolygon, 4) | (GtFormat::GotXywh, 4) => {
            xywh_polygon(vals[0], vals[1], vals[2], vals[3])
        }
        (_, n) => Err(Error::Argument(format!(
            "region line has {n} values, expected {}",
            match format {
                GtFormat::VotPolygon => "8 (or 4 as x,y,w,h)",
                GtFormat::GotXywh => "4 (x,y,w,h)",
            }
        ))),
    }
}

/// Load one sequence directory: sorted `*.ppm` frames plus `groundtruth.txt`.
pub fn load_sequence(dir: &Path, format: GtFormat) -> Result<Sequence> {
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sequence".to_string());
    let mut frames: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "ppm"))
        .collect();
    frames.sort();

    let gt_path = dir.join(GROUNDTRUTH_FILE);
    let text = std::fs::read_to_string(&gt_path).map_err(|e| Error::io(&gt_path, e))?;
    let mut gt = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let region = parse_region_line(line, format)
            .map_err(|e| Error::format(&gt_path, i + 1, e.to_string()))?;
        gt.push(region);
    }
    if gt.len() != frames.len() {
        return Err(Error::format(
            &gt_path,
            gt.len() + 1,
            format!("{} ground-truth lines vs {} frames", gt.len(), frames.len()),
        ));
    }
    if frames.is_empty() {
        return Err(Error::format(&gt_path, 1, "sequence has no frames"));
    }
    Ok(Sequence {
        name,
        frames: FrameStore::Files(frames),
        gt,
        format,
    })
}

/// Load every sequence subdirectory of a dataset directory, sorted by name.
pub fn load_dataset(dir: &Path, format: GtFormat) -> Result<Vec<Sequence>> {
    let mut subdirs: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    subdirs.sort();
    if subdirs.is_empty() {
        return Err(Error::format(dir, 0, "dataset directory has no sequences"));
    }
    subdirs.iter().map(|d| load_sequence(d, format)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::ppm::write_ppm;
    use tempfile::tempdir;

    #[test]
    fn xywh_promotion_rule() {
        let p = parse_region_line("10,20,30,40", GtFormat::VotPolygon).unwrap();
        assert_eq!(
            p.vertices(),
            &[(10.0, 20.0), (40.0, 20.0), (40.0, 60.0), (10.0, 60.0)]
        );
        let p8 = parse_region_line("0,0,2,0,2,2,0,2", GtFormat::VotPolygon).unwrap();
        assert_eq!(p8.vertices().len(), 4);
        assert!(parse_region_line("1,2,3", GtFormat::VotPolygon).is_err());
        assert!(parse_region_line("0,0,2,0,2,2,0,2", GtFormat::GotXywh).is_err());
        assert!(parse_region_line("a,b,c,d", GtFormat::GotXywh).is_err());
    }

    #[test]
    fn loads_sequence_and_reports_mismatches() {
        let dir = tempdir().unwrap();
        let seq_dir = dir.path().join("seq01");
        std::fs::create_dir(&seq_dir).unwrap();
        let rgb = vec![128u8; 4 * 4 * 3];
        write_ppm(&seq_dir.join("00000001.ppm"), 4, 4, &rgb).unwrap();
        write_ppm(&seq_dir.join("00000002.ppm"), 4, 4, &rgb).unwrap();
        std::fs::write(seq_dir.join(GROUNDTRUTH_FILE), "0,0,2,2\n1,1,2,2\n").unwrap();
        let seq = load_sequence(&seq_dir, GtFormat::GotXywh).unwrap();
        assert_eq!(seq.name, "seq01");
        assert_eq!(seq.len(), 2);
        assert_eq!(seq.frame(0).unwrap().width(), 4);

        // count mismatch
        std::fs::write(seq_dir.join(GROUNDTRUTH_FILE), "0,0,2,2\n").unwrap();
        assert!(matches!(
            load_sequence(&seq_dir, GtFormat::GotXywh),
            Err(Error::Format { .. })
        ));

        // malformed line carries its number
        std::fs::write(seq_dir.join(GROUNDTRUTH_FILE), "0,0,2,2\nnope\n").unwrap();
        match load_sequence(&seq_dir, GtFormat::GotXywh) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected format error, got {other:?}"),
        }

        // missing groundtruth is an explicit error
        std::fs::remove_file(seq_dir.join(GROUNDTRUTH_FILE)).unwrap();
        assert!(load_sequence(&seq_dir, GtFormat::GotXywh).is_err());
    }
}
