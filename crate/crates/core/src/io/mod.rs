//! Dataset, trace, report and config file I/O.
//!
//! Frames are binary PPM (P6); masks export as binary PGM. Ground truth is
//! one comma-separated region per line (8 reals for polygons, 4 for
//! `x,y,w,h` boxes). Traces are one line per frame. Everything round-trips
//! losslessly and writes deterministically.

mod config;
mod ppm;
mod report;
mod sequence;
mod trace;

pub use config::{parse_config, parse_config_file, RunConfig};
pub use ppm::{read_ppm, tensor_to_rgb_bytes, write_ppm};
pub use report::{render_got_report, render_vot_report, write_report};
pub use sequence::{
    load_dataset, load_sequence, parse_region_line, GtFormat, Sequence, GROUNDTRUTH_FILE,
};
pub use trace::{parse_trace, read_trace, render_trace, write_trace};
