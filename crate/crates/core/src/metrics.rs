//! Evaluation metrics over per-frame run traces.
//!
//! Supervised (reset) runs feed accuracy, robustness and EAO; one-shot runs
//! feed average overlap and success rate. Every metric is a pure function of
//! `(trace, ground truth, config)` and reproduces bit-identically.

use crate::error::{Error, Result};
use crate::geometry::{iou_polygon, Polygon};
use crate::par;

/// One frame of a tracking run.
#[derive(Debug, Clone, PartialEq)]
pub enum FrameRecord {
    /// Tracker (re)initialized from ground truth on this frame.
    Init,
    /// Tracker produced this region.
    Tracked(Polygon),
    /// Tracker output had zero overlap with ground truth (reset protocol).
    Failed,
    /// Frame skipped during the post-failure gap.
    Skipped,
}

/// Ordered per-frame records for one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub sequence: String,
    pub records: Vec<FrameRecord>,
}

impl RunTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Check the trace invariants: the first frame is `Init`, and a `Failed`
    /// record is followed only by `Skipped` records until the next `Init` or
    /// the end of the trace.
    pub fn validate(&self) -> Result<()> {
        if !matches!(self.records.first(), Some(FrameRecord::Init)) {
            return Err(Error::Argument(format!(
                "trace {}: frame 0 must be Init",
                self.sequence
            )));
        }
        let mut in_gap = false;
        for (i, rec) in self.records.iter().enumerate() {
            match rec {
                FrameRecord::Init => in_gap = false,
                FrameRecord::Failed => {
                    if in_gap {
                        return Err(Error::Argument(format!(
                            "trace {}: Failed at {i} inside a skip gap",
                            self.sequence
                        )));
                    }
                    in_gap = true;
                }
                FrameRecord::Skipped => {
                    if !in_gap {
                        return Err(Error::Argument(format!(
                            "trace {}: Skipped at {i} without a preceding failure",
                            self.sequence
                        )));
                    }
                }
                FrameRecord::Tracked(_) => {
                    if in_gap {
                        return Err(Error::Argument(format!(
                            "trace {}: Tracked at {i} inside a skip gap",
                            self.sequence
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Protocol constants for the metric computations.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    /// Frames after every (re)init excluded from accuracy.
    pub burn_in: usize,
    /// Frames skipped after a failure before reinitialization.
    pub reinit_gap: usize,
    /// Inclusive EAO interval; `None` derives it from the evaluated dataset
    /// as `[floor(0.5 * median length), ceil(1.5 * median length)]`.
    pub eao_interval: Option<(usize, usize)>,
    /// Success-rate overlap thresholds.
    pub sr_thresholds: Vec<f64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            burn_in: 10,
            reinit_gap: 5,
            eao_interval: None,
            sr_thresholds: vec![0.5, 0.75],
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some((lo, hi)) = self.eao_interval {
            if lo < 1 || lo > hi {
                return Err(Error::Config(format!("bad eao interval [{lo}, {hi}]")));
            }
        }
        Ok(())
    }
}

/// A finished run paired with its per-frame ground truth.
#[derive(Debug, Clone)]
pub struct SequenceRun {
    pub trace: RunTrace,
    pub gt: Vec<Polygon>,
}

/// Supervised-protocol scores.
#[derive(Debug, Clone, PartialEq)]
pub struct VotScores {
    pub accuracy: f64,
    pub robustness_failures: usize,
    pub robustness_per_frame: f64,
    pub eao: f64,
    /// Interval actually used for the EAO average.
    pub eao_interval: (usize, usize),
}

/// One-shot-protocol scores.
#[derive(Debug, Clone, PartialEq)]
pub struct GotScores {
    pub ao: f64,
    /// `(threshold, rate)` pairs in threshold order.
    pub sr: Vec<(f64, f64)>,
}

/// Per-frame overlap series: `Some(iou)` for tracked frames, `Some(0)` for
/// failures, `None` for frames excluded from overlap statistics (init and
/// skipped).
pub fn frame_overlaps(trace: &RunTrace, gt: &[Polygon]) -> Result<Vec<Option<f64>>> {
    if gt.len() != trace.records.len() {
        return Err(Error::Argument(format!(
            "trace {}: {} records vs {} ground-truth regions",
            trace.sequence,
            trace.records.len(),
            gt.len()
        )));
    }
    trace
        .records
        .iter()
        .zip(gt.iter())
        .map(|(rec, truth)| match rec {
            FrameRecord::Init | FrameRecord::Skipped => Ok(None),
            FrameRecord::Failed => Ok(Some(0.0)),
            FrameRecord::Tracked(region) => Ok(Some(iou_polygon(region, truth)?)),
        })
        .collect()
}

fn counted_overlaps(run: &SequenceRun, burn_in: usize) -> Result<Vec<f64>> {
    let overlaps = frame_overlaps(&run.trace, &run.gt)?;
    let mut last_init = None;
    let mut out = Vec::new();
    for (i, rec) in run.trace.records.iter().enumerate() {
        match rec {
            FrameRecord::Init => last_init = Some(i),
            FrameRecord::Tracked(_) => {
                let since = last_init.map(|j| i - j).unwrap_or(usize::MAX);
                if since > burn_in {
                    out.push(overlaps[i].expect("tracked frames carry overlaps"));
                }
            }
            _ => {}
        }
    }
    Ok(out)
}

/// Mean overlap over successfully tracked frames, pooled across sequences,
/// excluding the first `burn_in` frames after every (re)init.
pub fn accuracy(runs: &[SequenceRun], cfg: &EvalConfig) -> Result<f64> {
    cfg.validate()?;
    let per_run: Vec<Vec<f64>> = runs
        .iter()
        .map(|run| counted_overlaps(run, cfg.burn_in))
        .collect::<Result<_>>()?;
    let count: usize = per_run.iter().map(Vec::len).sum();
    if count == 0 {
        return Err(Error::UndefinedMetric(
            "accuracy: no tracked frames outside burn-in".into(),
        ));
    }
    let sum: f64 = per_run.iter().flatten().sum();
    Ok(sum / count as f64)
}

/// `(failure count, failures per evaluated frame)` where evaluated frames
/// are those on which the tracker actually produced output (tracked or
/// failed).
pub fn robustness<'a, I>(traces: I) -> (usize, f64)
where
    I: IntoIterator<Item = &'a RunTrace>,
{
    let mut failures = 0usize;
    let mut evaluated = 0usize;
    for trace in traces {
        for rec in &trace.records {
            match rec {
                FrameRecord::Failed => {
                    failures += 1;
                    evaluated += 1;
                }
                FrameRecord::Tracked(_) => evaluated += 1,
                _ => {}
            }
        }
    }
    let per_frame = if evaluated == 0 {
        0.0
    } else {
        failures as f64 / evaluated as f64
    };
    (failures, per_frame)
}

/// Overlap curves of every sub-run: each (re)init starts a curve holding the
/// overlaps of its tracked frames, terminated by the next failure.
fn subrun_curves(run: &SequenceRun) -> Result<Vec<Vec<f64>>> {
    let overlaps = frame_overlaps(&run.trace, &run.gt)?;
    let mut curves = Vec::new();
    let mut current: Option<Vec<f64>> = None;
    for (i, rec) in run.trace.records.iter().enumerate() {
        match rec {
            FrameRecord::Init => {
                if let Some(c) = current.take() {
                    curves.push(c);
                }
                current = Some(Vec::new());
            }
            FrameRecord::Tracked(_) => {
                if let Some(c) = current.as_mut() {
                    c.push(overlaps[i].expect("tracked frames carry overlaps"));
                }
            }
            FrameRecord::Failed => {
                if let Some(c) = current.take() {
                    curves.push(c);
                }
            }
            FrameRecord::Skipped => {}
        }
    }
    if let Some(c) = current.take() {
        curves.push(c);
    }
    Ok(curves)
}

/// Median sequence length based EAO interval:
/// `[floor(0.5 * median), ceil(1.5 * median)]`.
pub fn derived_eao_interval(runs: &[SequenceRun]) -> Result<(usize, usize)> {
    if runs.is_empty() {
        return Err(Error::Argument("no runs to derive an EAO interval from".into()));
    }
    let mut lengths: Vec<usize> = runs.iter().map(|r| r.trace.len()).collect();
    lengths.sort_unstable();
    let n = lengths.len();
    let median = if n % 2 == 1 {
        lengths[n / 2] as f64
    } else {
        (lengths[n / 2 - 1] + lengths[n / 2]) as f64 / 2.0
    };
    let lo = ((0.5 * median).floor() as usize).max(1);
    let hi = ((1.5 * median).ceil() as usize).max(lo);
    Ok((lo, hi))
}

/// Expected average overlap. Every sub-run contributes a zero-extended
/// overlap curve; `EAO(N)` is the mean over sub-runs of the mean of the
/// first `N` curve values, and the score averages `EAO(N)` over the
/// inclusive interval.
pub fn eao(runs: &[SequenceRun], cfg: &EvalConfig) -> Result<f64> {
    cfg.validate()?;
    let (lo, hi) = match cfg.eao_interval {
        Some(iv) => iv,
        None => derived_eao_interval(runs)?,
    };
    let curves: Vec<Vec<f64>> = runs
        .iter()
        .map(subrun_curves)
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    if curves.is_empty() {
        return Err(Error::Argument("eao: no sub-runs in the traces".into()));
    }
    // Deterministic reduction: per-N means are accumulated in N order.
    let per_n = par::map_indexed(hi - lo + 1, |k| {
        let n = lo + k;
        let sum: f64 = curves
            .iter()
            .map(|curve| curve.iter().take(n).sum::<f64>() / n as f64)
            .sum();
        sum / curves.len() as f64
    });
    Ok(per_n.iter().sum::<f64>() / per_n.len() as f64)
}

/// One-shot average overlap: mean over all frames after the single init,
/// with lost frames counting as zero.
pub fn average_overlap(trace: &RunTrace, gt: &[Polygon]) -> Result<f64> {
    let overlaps = frame_overlaps(trace, gt)?;
    if trace.records.len() < 2 {
        return Err(Error::UndefinedMetric(
            "average overlap needs frames after the init".into(),
        ));
    }
    let post_init = &overlaps[1..];
    let sum: f64 = post_init.iter().map(|o| o.unwrap_or(0.0)).sum();
    Ok(sum / post_init.len() as f64)
}

/// Fraction of post-init frames whose overlap strictly exceeds `tau`.
pub fn success_rate(trace: &RunTrace, gt: &[Polygon], tau: f64) -> Result<f64> {
    let overlaps = frame_overlaps(trace, gt)?;
    if trace.records.len() < 2 {
        return Err(Error::UndefinedMetric(
            "success rate needs frames after the init".into(),
        ));
    }
    let post_init = &overlaps[1..];
    let hits = post_init
        .iter()
        .filter(|o| o.unwrap_or(0.0) > tau)
        .count();
    Ok(hits as f64 / post_init.len() as f64)
}

/// Supervised-protocol score bundle.
pub fn vot_scores(runs: &[SequenceRun], cfg: &EvalConfig) -> Result<VotScores> {
    let accuracy = accuracy(runs, cfg)?;
    let (failures, per_frame) = robustness(runs.iter().map(|r| &r.trace));
    let interval = match cfg.eao_interval {
        Some(iv) => iv,
        None => derived_eao_interval(runs)?,
    };
    let eao_cfg = EvalConfig {
        eao_interval: Some(interval),
        ..cfg.clone()
    };
    Ok(VotScores {
        accuracy,
        robustness_failures: failures,
        robustness_per_frame: per_frame,
        eao: eao(runs, &eao_cfg)?,
        eao_interval: interval,
    })
}

/// One-shot-protocol score bundle: sequence-mean AO and SR per threshold.
pub fn got_scores(runs: &[SequenceRun], cfg: &EvalConfig) -> Result<GotScores> {
    cfg.validate()?;
    if runs.is_empty() {
        return Err(Error::Argument("no runs to score".into()));
    }
    let aos: Vec<f64> = runs
        .iter()
        .map(|r| average_overlap(&r.trace, &r.gt))
        .collect::<Result<_>>()?;
    let ao = aos.iter().sum::<f64>() / aos.len() as f64;
    let mut sr = Vec::with_capacity(cfg.sr_thresholds.len());
    for &tau in &cfg.sr_thresholds {
        let rates: Vec<f64> = runs
            .iter()
            .map(|r| success_rate(&r.trace, &r.gt, tau))
            .collect::<Result<_>>()?;
        sr.push((tau, rates.iter().sum::<f64>() / rates.len() as f64));
    }
    Ok(GotScores { ao, sr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Polygon {
        Polygon::new(vec![(x0, y0), (x1, y0), (x1, y1), (x0, y1)]).unwrap()
    }

    fn unit() -> Polygon {
        rect(0.0, 0.0, 1.0, 1.0)
    }

    /// Tracked region with exact IoU `v` against the unit square.
    fn tracked_with_overlap(v: f64) -> FrameRecord {
        assert!(v > 0.0 && v <= 1.0);
        FrameRecord::Tracked(rect(0.0, 0.0, v, 1.0))
    }

    fn run_from_overlaps(overlaps: &[f64]) -> SequenceRun {
        let mut records = vec![FrameRecord::Init];
        records.extend(overlaps.iter().map(|&v| tracked_with_overlap(v)));
        let gt = vec![unit(); records.len()];
        SequenceRun {
            trace: RunTrace {
                sequence: "t".into(),
                records,
            },
            gt,
        }
    }

    #[test]
    fn frame_overlaps_series() {
        let run = run_from_overlaps(&[1.0, 1.0, 1.0]);
        let o = frame_overlaps(&run.trace, &run.gt).unwrap();
        assert_eq!(o, vec![None, Some(1.0), Some(1.0), Some(1.0)]);

        let trace = RunTrace {
            sequence: "t".into(),
            records: vec![
                FrameRecord::Init,
                tracked_with_overlap(0.5),
                FrameRecord::Failed,
                FrameRecord::Skipped,
            ],
        };
        let gt = vec![unit(); 4];
        let o = frame_overlaps(&trace, &gt).unwrap();
        assert_eq!(o.len(), trace.len());
        assert_eq!(o, vec![None, Some(0.5), Some(0.0), None]);

        assert!(frame_overlaps(&trace, &gt[..3]).is_err());
    }

    #[test]
    fn accuracy_mean_and_burn_in() {
        let cfg = EvalConfig {
            burn_in: 0,
            ..EvalConfig::default()
        };
        let run = run_from_overlaps(&[0.8, 0.6, 0.4]);
        let a = accuracy(std::slice::from_ref(&run), &cfg).unwrap();
        assert!((a - 0.6).abs() <= 1e-12);

        // burn-in excludes the first frames after init
        let cfg1 = EvalConfig {
            burn_in: 1,
            ..EvalConfig::default()
        };
        let a = accuracy(std::slice::from_ref(&run), &cfg1).unwrap();
        assert!((a - 0.5).abs() <= 1e-12);

        // burn-in swallowing the whole sequence leaves accuracy undefined
        let cfg_big = EvalConfig {
            burn_in: 10,
            ..EvalConfig::default()
        };
        assert!(matches!(
            accuracy(&[run], &cfg_big),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn accuracy_pools_frames_across_sequences() {
        let cfg = EvalConfig {
            burn_in: 0,
            ..EvalConfig::default()
        };
        let a = run_from_overlaps(&[0.5, 0.5]);
        let b = run_from_overlaps(&[0.7, 0.7]);
        let pooled = accuracy(&[a, b], &cfg).unwrap();
        assert!((pooled - 0.6).abs() <= 1e-12);
    }

    #[test]
    fn robustness_counts_failures() {
        let clean = run_from_overlaps(&[1.0; 10]);
        assert_eq!(robustness([&clean.trace]), (0, 0.0));

        let mut records = vec![FrameRecord::Init];
        records.extend((0..99).map(|_| tracked_with_overlap(1.0)));
        records.push(FrameRecord::Failed);
        let trace = RunTrace {
            sequence: "r".into(),
            records,
        };
        let (f, pf) = robustness([&trace]);
        assert_eq!(f, 1);
        assert!((pf - 0.01).abs() <= 1e-12);

        // concatenating traces sums failures
        let (f, _) = robustness([&trace, &trace]);
        assert_eq!(f, 2);
    }

    #[test]
    fn eao_simple_cases() {
        let run = run_from_overlaps(&[1.0, 1.0, 1.0, 1.0]);
        let cfg = EvalConfig {
            eao_interval: Some((2, 4)),
            ..EvalConfig::default()
        };
        assert_eq!(eao(std::slice::from_ref(&run), &cfg).unwrap(), 1.0);

        let run = run_from_overlaps(&[1.0, 0.5]);
        let cfg = EvalConfig {
            eao_interval: Some((4, 4)),
            ..EvalConfig::default()
        };
        assert_eq!(eao(&[run], &cfg).unwrap(), 0.375);
    }

    #[test]
    fn eao_matches_curve_oracle() {
        // Three sub-runs across two sequences, with a failure split.
        let mut records = vec![FrameRecord::Init];
        records.push(tracked_with_overlap(1.0));
        records.push(tracked_with_overlap(0.5));
        records.push(FrameRecord::Failed);
        records.push(FrameRecord::Skipped);
        records.push(FrameRecord::Init);
        records.push(tracked_with_overlap(0.75));
        let a = SequenceRun {
            trace: RunTrace {
                sequence: "a".into(),
                records,
            },
            gt: vec![unit(); 7],
        };
        let b = run_from_overlaps(&[0.25, 1.0, 1.0, 0.5]);
        let cfg = EvalConfig {
            eao_interval: Some((3, 5)),
            ..EvalConfig::default()
        };
        let got = eao(&[a, b], &cfg).unwrap();
        let want = oracle::eao_from_curves(
            &[
                vec![1.0, 0.5],
                vec![0.75],
                vec![0.25, 1.0, 1.0, 0.5],
            ],
            3,
            5,
        );
        assert_eq!(got, want);

        let empty: Vec<SequenceRun> = vec![];
        assert!(eao(&empty, &cfg).is_err());
    }

    #[test]
    fn derived_interval_uses_median_length() {
        let a = run_from_overlaps(&[1.0; 9]); // length 10
        let b = run_from_overlaps(&[1.0; 19]); // length 20
        let c = run_from_overlaps(&[1.0; 29]); // length 30
        let (lo, hi) = derived_eao_interval(&[a, b, c]).unwrap();
        assert_eq!((lo, hi), (10, 30));
    }

    #[test]
    fn average_overlap_cases() {
        let run = run_from_overlaps(&[1.0, 0.6, 0.2]);
        let ao = average_overlap(&run.trace, &run.gt).unwrap();
        assert!((ao - 0.6).abs() <= 1e-12);
        let perfect = run_from_overlaps(&[1.0; 5]);
        assert_eq!(average_overlap(&perfect.trace, &perfect.gt).unwrap(), 1.0);
        // all-miss: tracked regions disjoint from gt
        let mut records = vec![FrameRecord::Init];
        records.extend((0..3).map(|_| FrameRecord::Tracked(rect(5.0, 5.0, 6.0, 6.0))));
        let trace = RunTrace {
            sequence: "m".into(),
            records,
        };
        assert_eq!(average_overlap(&trace, &vec![unit(); 4]).unwrap(), 0.0);
    }

    #[test]
    fn success_rate_strict_threshold() {
        let run = run_from_overlaps(&[1.0, 0.6, 0.2]);
        let sr = success_rate(&run.trace, &run.gt, 0.5).unwrap();
        assert!((sr - 2.0 / 3.0).abs() <= 1e-12);
        // overlap exactly tau is not a success
        let run = run_from_overlaps(&[0.5, 0.5]);
        assert_eq!(success_rate(&run.trace, &run.gt, 0.5).unwrap(), 0.0);
        // tau = 0 counts every positive overlap
        let run = run_from_overlaps(&[0.1, 0.9]);
        assert_eq!(success_rate(&run.trace, &run.gt, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn success_rate_monotone_in_threshold() {
        let run = run_from_overlaps(&[0.9, 0.7, 0.5, 0.3, 0.1]);
        let mut last = f64::INFINITY;
        for tau in [0.0, 0.2, 0.4, 0.6, 0.8] {
            let sr = success_rate(&run.trace, &run.gt, tau).unwrap();
            assert!(sr <= last);
            last = sr;
        }
    }

    #[test]
    fn constant_run_scores_match_everywhere() {
        let run = run_from_overlaps(&[0.75; 12]);
        let cfg = EvalConfig {
            burn_in: 0,
            eao_interval: Some((3, 10)),
            ..EvalConfig::default()
        };
        assert_eq!(accuracy(std::slice::from_ref(&run), &cfg).unwrap(), 0.75);
        assert_eq!(eao(std::slice::from_ref(&run), &cfg).unwrap(), 0.75);
        assert_eq!(average_overlap(&run.trace, &run.gt).unwrap(), 0.75);
    }

    #[test]
    fn trace_validation() {
        let good = RunTrace {
            sequence: "v".into(),
            records: vec![
                FrameRecord::Init,
                tracked_with_overlap(1.0),
                FrameRecord::Failed,
                FrameRecord::Skipped,
                FrameRecord::Skipped,
                FrameRecord::Init,
                tracked_with_overlap(1.0),
            ],
        };
        good.validate().unwrap();

        let no_init = RunTrace {
            sequence: "v".into(),
            records: vec![tracked_with_overlap(1.0)],
        };
        assert!(no_init.validate().is_err());

        let tracked_in_gap = RunTrace {
            sequence: "v".into(),
            records: vec![
                FrameRecord::Init,
                FrameRecord::Failed,
                tracked_with_overlap(1.0),
            ],
        };
        assert!(tracked_in_gap.validate().is_err());

        let stray_skip = RunTrace {
            sequence: "v".into(),
            records: vec![FrameRecord::Init, FrameRecord::Skipped],
        };
        assert!(stray_skip.validate().is_err());
    }

    #[test]
    fn vot_and_got_bundles() {
        let runs = vec![
            run_from_overlaps(&[0.5; 20]),
            run_from_overlaps(&[1.0; 20]),
        ];
        let cfg = EvalConfig {
            burn_in: 0,
            eao_interval: Some((5, 15)),
            ..EvalConfig::default()
        };
        let vot = vot_scores(&runs, &cfg).unwrap();
        assert_eq!(vot.accuracy, 0.75);
        assert_eq!(vot.robustness_failures, 0);
        assert_eq!(vot.eao, 0.75);
        let got = got_scores(&runs, &cfg).unwrap();
        assert_eq!(got.ao, 0.75);
        assert_eq!(got.sr, vec![(0.5, 0.5), (0.75, 0.5)]);
    }
}
