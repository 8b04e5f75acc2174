//! Evaluation reports: machine-parsable `metric=value` lines with the
//! protocol config echoed in `#` comment lines.

use crate::error::{Error, Result};
use crate::metrics::{EvalConfig, GotScores, VotScores};
use std::fmt::Write as _;
use std::path::Path;

fn echo_common(out: &mut String, cfg: &EvalConfig, sequences: usize) {
    let _ = writeln!(out, "# sequences={sequences}");
    let _ = writeln!(out, "# burn_in={}", cfg.burn_in);
    let _ = writeln!(out, "# reinit_gap={}", cfg.reinit_gap);
    let thresholds: Vec<String> = cfg.sr_thresholds.iter().map(|t| t.to_string()).collect();
    let _ = writeln!(out, "# sr_thresholds={}", thresholds.join(","));
}

/// Render supervised-protocol scores.
pub fn render_vot_report(scores: &VotScores, cfg: &EvalConfig, sequences: usize) -> String {
    let mut out = String::from("# protocol=vot\n");
    echo_common(&mut out, cfg, sequences);
    let _ = writeln!(
        out,
        "# eao_interval={},{}",
        scores.eao_interval.0, scores.eao_interval.1
    );
    let _ = writeln!(out, "accuracy={}", scores.accuracy);
    let _ = writeln!(out, "robustness_failures={}", scores.robustness_failures);
    let _ = writeln!(out, "robustness_per_frame={}", scores.robustness_per_frame);
    let _ = writeln!(out, "eao={}", scores.eao);
    out
}

/// Render one-shot-protocol scores.
pub fn render_got_report(scores: &GotScores, cfg: &EvalConfig, sequences: usize) -> String {
    let mut out = String::from("# protocol=got\n");
    echo_common(&mut out, cfg, sequences);
    let _ = writeln!(out, "ao={}", scores.ao);
    for (tau, rate) in &scores.sr {
        let _ = writeln!(out, "sr_{tau}={rate}");
    }
    out
}

pub fn write_report(path: &Path, rendered: &str) -> Result<()> {
    std::fs::write(path, rendered).map_err(|e| Error::io(path, e))
}
