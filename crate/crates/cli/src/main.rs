//! `siamstage`: run the two-stage tracker over a dataset, evaluate traces,
//! generate synthetic sequences, or self-test the oracle suite.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/format error (and failed
//! self-tests).

use clap::{Parser, Subcommand, ValueEnum};
use siamstage_core::error::Error;
use siamstage_core::geometry::Polygon;
use siamstage_core::io::{
    self, load_dataset, parse_config_file, read_trace, write_report, write_trace, GtFormat,
    RunConfig, Sequence,
};
use siamstage_core::metrics::{self, FrameRecord, RunTrace, SequenceRun};
use siamstage_core::pipeline::{run_oneshot, run_supervised, Tracker};
use siamstage_core::synth::{write_synth_sequence, SynthConfig};
use siamstage_core::{selftest, Tensor};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "siamstage", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Vot,
    Got,
}

impl From<FormatArg> for GtFormat {
    fn from(f: FormatArg) -> GtFormat {
        match f {
            FormatArg::Vot => GtFormat::VotPolygon,
            FormatArg::Got => GtFormat::GotXywh,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TrackProtocol {
    Supervised,
    Oneshot,
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalProtocol {
    Vot,
    Got,
}

#[derive(Subcommand)]
enum Command {
    /// Track every sequence of a dataset and write one trace file each.
    Track {
        #[arg(long)]
        dataset: PathBuf,
        /// Ground-truth annotation format.
        #[arg(long, value_enum)]
        format: FormatArg,
        #[arg(long, value_enum)]
        protocol: TrackProtocol,
        /// Flat key = value config file; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory for trace files.
        #[arg(long)]
        out: PathBuf,
        /// Also write per-frame overlay PPMs next to the traces.
        #[arg(long)]
        dump_overlays: bool,
    },
    /// Score previously written traces against a dataset.
    Eval {
        /// Directory of trace files from `track`.
        #[arg(long)]
        traces: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum)]
        protocol: EvalProtocol,
        /// Ground-truth format; defaults to the protocol's native format.
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        /// Override the EAO interval as LO,HI.
        #[arg(long, value_name = "LO,HI")]
        eao_interval: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Report file to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic sequence under the output dataset directory.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 50)]
        frames: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Gaussian background noise sigma in [0,1] intensity units.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Target velocity as VX,VY pixels per frame.
        #[arg(long, value_name = "VX,VY")]
        velocity: Option<String>,
        /// Target rotation in radians per frame.
        #[arg(long, default_value_t = 0.0)]
        rotate: f64,
        #[arg(long, default_value_t = 128)]
        size: usize,
        #[arg(long, default_value_t = 24)]
        target_size: usize,
        /// Sequence directory name; defaults to synth<seed>.
        #[arg(long)]
        name: Option<String>,
    },
    /// Run the oracle suites and print one pass/fail line per invariant.
    Selftest,
}

fn parse_pair<T: std::str::FromStr + Copy>(text: &str, what: &str) -> Result<(T, T), Error> {
    let parts: Vec<_> = text.split(',').map(str::trim).collect();
    if parts.len() == 2 {
        if let (Ok(a), Ok(b)) = (parts[0].parse::<T>(), parts[1].parse::<T>()) {
            return Ok((a, b));
        }
    }
    Err(Error::Argument(format!("{what} must be two comma-separated values, got {text:?}")))
}

fn load_config(path: &Option<PathBuf>) -> Result<RunConfig, Error> {
    match path {
        Some(p) => parse_config_file(p),
        None => Ok(RunConfig::default()),
    }
}

/// Draw a closed polygon outline into interleaved RGB bytes.
fn draw_polygon(rgb: &mut [u8], width: usize, height: usize, poly: &Polygon, color: [u8; 3]) {
    let verts = poly.vertices();
    for i in 0..verts.len() {
        let (x0, y0) = verts[i];
        let (x1, y1) = verts[(i + 1) % verts.len()];
        let steps = ((x1 - x0).abs().max((y1 - y0).abs()).ceil() as usize).max(1);
        for s in 0..=steps {
            let t = s as f64 / steps as f64;
            let x = x0 + (x1 - x0) * t;
            let y = y0 + (y1 - y0) * t;
            if x >= 0.0 && y >= 0.0 && (x as usize) < width && (y as usize) < height {
                let idx = ((y as usize) * width + x as usize) * 3;
                rgb[idx..idx + 3].copy_from_slice(&color);
            }
        }
    }
}

fn dump_overlays(seq: &Sequence, trace: &RunTrace, dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (i, rec) in trace.records.iter().enumerate() {
        let frame: Tensor = seq.frame(i)?;
        let mut rgb = io::tensor_to_rgb_bytes(&frame);
        match rec {
            FrameRecord::Tracked(poly) => {
                draw_polygon(&mut rgb, frame.width(), frame.height(), poly, [255, 32, 32])
            }
            FrameRecord::Init => {
                draw_polygon(&mut rgb, frame.width(), frame.height(), &seq.gt[i], [32, 255, 32])
            }
            _ => {}
        }
        io::write_ppm(
            &dir.join(format!("{:08}.ppm", i + 1)),
            frame.width(),
            frame.height(),
            &rgb,
        )?;
    }
    Ok(())
}

fn track_one(
    tracker: &Tracker,
    seq: &Sequence,
    protocol: TrackProtocol,
    reinit_gap: usize,
    out: &Path,
    overlays: bool,
) -> Result<(), Error> {
    let trace = match protocol {
        TrackProtocol::Supervised => run_supervised(tracker, seq, reinit_gap)?,
        TrackProtocol::Oneshot => run_oneshot(tracker, seq)?,
    };
    write_trace(&out.join(format!("{}.txt", seq.name)), &trace)?;
    if overlays {
        dump_overlays(seq, &trace, &out.join(format!("{}.overlays", seq.name)))?;
    }
    Ok(())
}

fn cmd_track(
    dataset: &Path,
    format: GtFormat,
    protocol: TrackProtocol,
    config: &Option<PathBuf>,
    out: &Path,
    overlays: bool,
) -> Result<(), Error> {
    let cfg = load_config(config)?;
    let sequences = load_dataset(dataset, format)?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let tracker = Tracker::new(cfg.tracker.clone())?;
    let gap = cfg.eval.reinit_gap;

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        return sequences
            .par_iter()
            .map(|seq| track_one(&tracker, seq, protocol, gap, out, overlays))
            .collect::<Result<(), Error>>();
    }
    #[cfg(not(feature = "parallel"))]
    sequences
        .iter()
        .try_for_each(|seq| track_one(&tracker, seq, protocol, gap, out, overlays))
}

fn cmd_eval(
    traces_dir: &Path,
    dataset: &Path,
    protocol: EvalProtocol,
    format: Option<GtFormat>,
    eao_interval: Option<(usize, usize)>,
    config: &Option<PathBuf>,
    out: &Path,
) -> Result<(), Error> {
    let mut cfg = load_config(config)?;
    if let Some(interval) = eao_interval {
        cfg.eval.eao_interval = Some(interval);
    }
    let format = format.unwrap_or(match protocol {
        EvalProtocol::Vot => GtFormat::VotPolygon,
        EvalProtocol::Got => GtFormat::GotXywh,
    });
    let sequences = load_dataset(dataset, format)?;
    let by_name: BTreeMap<&str, &Sequence> =
        sequences.iter().map(|s| (s.name.as_str(), s)).collect();

    let mut trace_files: Vec<PathBuf> = std::fs::read_dir(traces_dir)
        .map_err(|e| Error::io(traces_dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "txt"))
        .collect();
    trace_files.sort();
    if trace_files.is_empty() {
        return Err(Error::format(traces_dir, 0, "no trace files found"));
    }

    let mut runs = Vec::with_capacity(trace_files.len());
    for path in &trace_files {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let seq = by_name.get(name.as_str()).ok_or_else(|| {
            Error::format(path, 0, format!("no dataset sequence named {name:?}"))
        })?;
        let trace = read_trace(path, &name)?;
        runs.push(SequenceRun {
            trace,
            gt: seq.gt.clone(),
        });
    }

    let rendered = match protocol {
        EvalProtocol::Vot => {
            let scores = metrics::vot_scores(&runs, &cfg.eval)?;
            io::render_vot_report(&scores, &cfg.eval, runs.len())
        }
        EvalProtocol::Got => {
            let scores = metrics::got_scores(&runs, &cfg.eval)?;
            io::render_got_report(&scores, &cfg.eval, runs.len())
        }
    };
    write_report(out, &rendered)?;
    print!("{rendered}");
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_synth(
    out: &Path,
    frames: usize,
    seed: u64,
    noise: f64,
    velocity: (f64, f64),
    rotate: f64,
    size: usize,
    target_size: usize,
    name: &Option<String>,
) -> Result<(), Error> {
    let cfg = SynthConfig {
        frames,
        image_size: size,
        target_size,
        velocity,
        rotation_rate: rotate,
        noise_sigma: noise,
        texture_seed: seed,
    };
    let name = name.clone().unwrap_or_else(|| format!("synth{seed:04}"));
    let seq = write_synth_sequence(&cfg, out, &name)?;
    eprintln!("wrote {} frames to {}", seq.len(), out.join(&name).display());
    Ok(())
}

fn cmd_selftest() -> ExitCode {
    let results = selftest::run_all();
    let mut failed = 0;
    for r in &results {
        if r.passed {
            println!("ok   {}", r.name);
        } else {
            println!("FAIL {}: {}", r.name, r.detail);
            failed += 1;
        }
    }
    println!("{} passed, {} failed", results.len() - failed, failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

/// Usage-level parse of an optional pair flag; failures exit 1.
fn parse_pair_or_usage<T: std::str::FromStr + Copy>(
    text: &Option<String>,
    what: &str,
) -> Result<Option<(T, T)>, ExitCode> {
    match text {
        None => Ok(None),
        Some(t) => parse_pair::<T>(t, what).map(Some).map_err(|e| {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }),
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Track {
            dataset,
            format,
            protocol,
            config,
            out,
            dump_overlays,
        } => {
            cmd_track(&dataset, format.into(), protocol, &config, &out, dump_overlays)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval {
            traces,
            dataset,
            protocol,
            format,
            eao_interval,
            config,
            out,
        } => {
            let interval = match parse_pair_or_usage::<usize>(&eao_interval, "--eao-interval") {
                Ok(iv) => iv,
                Err(code) => return Ok(code),
            };
            cmd_eval(
                &traces,
                &dataset,
                protocol,
                format.map(Into::into),
                interval,
                &config,
                &out,
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth {
            out,
            frames,
            seed,
            noise,
            velocity,
            rotate,
            size,
            target_size,
            name,
        } => {
            let velocity = match parse_pair_or_usage::<f64>(&velocity, "--velocity") {
                Ok(v) => v.unwrap_or((2.0, 0.0)),
                Err(code) => return Ok(code),
            };
            cmd_synth(
                &out,
                frames,
                seed,
                noise,
                velocity,
                rotate,
                size,
                target_size,
                &name,
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest => Ok(cmd_selftest()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own message; usage problems exit 1
            let _ = e.print();
            return ExitCode::from(u8::from(!matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            )));
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
