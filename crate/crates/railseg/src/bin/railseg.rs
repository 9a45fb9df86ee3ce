use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use railseg::ops::{self, EvaluateOptions, SpeedSource, Split, SynthOptions};
use railseg::{io, Dataset, Error};
use railseg_core::synth::CameraRig;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "railseg", version, about = "Railway LiDAR labeling pipeline")]
struct Cli {
    /// Dataset manifest the command operates on.
    #[arg(long, global = true, default_value = "manifest.json")]
    manifest: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset with ground truth.
    Synth {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        scans: usize,
        #[arg(long, default_value_t = 1)]
        test_scans: usize,
        /// Label image width in pixels.
        #[arg(long)]
        width: Option<u32>,
        #[arg(long)]
        height: Option<u32>,
        /// Focal length in pixels, used for both axes.
        #[arg(long)]
        focal: Option<f64>,
        /// Vehicle speed in m/s.
        #[arg(long, default_value_t = 20.0)]
        speed: f64,
        /// Also write simulated network predictions.
        #[arg(long)]
        predictions: bool,
    },
    /// Remove housing reflections and statistical outliers.
    Preprocess {
        #[arg(long, default_value_t = 1.5)]
        min_range: f64,
        #[arg(long, default_value_t = 8)]
        knn_k: usize,
        #[arg(long, default_value_t = 2.0)]
        knn_alpha: f64,
    },
    /// Pair scans with images by timestamp.
    Sync {
        #[arg(long, default_value_t = 10.0)]
        max_dt_ms: f64,
    },
    /// Undo the vehicle's motion during each sweep.
    MotionCorrect {
        #[arg(long, value_enum, default_value_t = SpeedArg::Manifest)]
        speed_source: SpeedArg,
        /// Speed in m/s when the source is `constant`.
        #[arg(long)]
        speed: Option<f64>,
    },
    /// Project paired label images onto their scans.
    Transfer,
    /// Choose scans for manual annotation.
    Select {
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// Round number, or `auto` for the next one.
        #[arg(long, default_value = "auto", value_parser = parse_iteration)]
        iteration: Iteration,
    },
    /// Score predicted labels against ground truth.
    Evaluate {
        #[arg(long)]
        pred_dir: PathBuf,
        #[arg(long)]
        gt_dir: PathBuf,
        /// Where to write the JSON report.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        run_name: Option<String>,
        /// Earlier report to compare against, as `name=path`.
        #[arg(long = "compare", value_parser = parse_compare)]
        compare: Vec<(String, PathBuf)>,
        #[arg(long, value_enum, default_value_t = SplitArg::Test)]
        split: SplitArg,
    },
    /// Serve the annotation API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SpeedArg {
    Manifest,
    Constant,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Test,
    All,
}

#[derive(Clone, Copy)]
struct Iteration(Option<u32>);

fn parse_iteration(s: &str) -> Result<Iteration, String> {
    if s == "auto" {
        return Ok(Iteration(None));
    }
    s.parse().map(|n| Iteration(Some(n))).map_err(|_| format!("expected `auto` or a round number, got `{s}`"))
}

fn parse_compare(s: &str) -> Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => Ok((name.into(), path.into())),
        _ => Err(format!("expected name=path, got `{s}`")),
    }
}

fn to_json<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("output types serialize")
}

fn run(cli: Cli) -> Result<Value, Error> {
    let open = || Dataset::open(&cli.manifest);
    match cli.command {
        Command::Synth {
            seed,
            out,
            scans,
            test_scans,
            width,
            height,
            focal,
            speed,
            predictions,
        } => {
            let mut camera = CameraRig::default();
            camera.width = width.unwrap_or(camera.width);
            camera.height = height.unwrap_or(camera.height);
            if let Some(f) = focal {
                camera.fx = f;
                camera.fy = f;
            }
            let opts = SynthOptions {
                seed,
                scans,
                test_scans,
                camera,
                speed,
                predictions,
            };
            let ds = ops::synth_dataset(&out, &opts)?;
            Ok(json!({
                "manifest": ds.manifest_path(),
                "scans": ds.manifest.scans.len(),
                "ground_truth": out.join("gt"),
            }))
        }
        Command::Preprocess {
            min_range,
            knn_k,
            knn_alpha,
        } => Ok(to_json(&ops::preprocess(&mut open()?, min_range, knn_k, knn_alpha)?)),
        Command::Sync { max_dt_ms } => Ok(to_json(&ops::sync(&mut open()?, max_dt_ms / 1000.0)?)),
        Command::MotionCorrect { speed_source, speed } => {
            let source = match (speed_source, speed) {
                (SpeedArg::Manifest, None) => SpeedSource::Manifest,
                (SpeedArg::Constant, Some(v)) => SpeedSource::Constant(v),
                (SpeedArg::Constant, None) => {
                    return Err(Error::Invalid("--speed-source constant needs --speed".into()))
                }
                (SpeedArg::Manifest, Some(_)) => {
                    return Err(Error::Invalid("--speed only applies with --speed-source constant".into()))
                }
            };
            Ok(json!({ "corrected": ops::motion_correct_all(&mut open()?, source)? }))
        }
        Command::Transfer => Ok(to_json(&ops::transfer(&mut open()?)?)),
        Command::Select { n, iteration } => Ok(to_json(&ops::select(&mut open()?, n, iteration.0)?)),
        Command::Evaluate {
            pred_dir,
            gt_dir,
            report,
            run_name,
            compare,
            split,
        } => {
            let opts = EvaluateOptions {
                pred_dir,
                gt_dir,
                split: match split {
                    SplitArg::Test => Split::Test,
                    SplitArg::All => Split::All,
                },
                run_name,
                baselines: compare,
            };
            let result = ops::evaluate(&mut open()?, &opts)?;
            if let Some(path) = report {
                io::save_json(&result, &path)?;
            }
            Ok(to_json(&result))
        }
        Command::Serve { bind } => {
            let ds = open()?;
            let rt = tokio::runtime::Runtime::new().map_err(|e| Error::Invalid(format!("runtime: {e}")))?;
            eprintln!("listening on http://{bind}");
            rt.block_on(railseg::service::serve(ds, bind))
                .map_err(|e| Error::Invalid(format!("server: {e}")))?;
            Ok(json!({ "stopped": true }))
        }
    }
}

fn fail(kind: &str, message: String, details: Vec<String>) -> ExitCode {
    let report = json!({ "error": { "kind": kind, "message": message, "details": details } });
    eprintln!("{report}");
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("usage", e.to_string().trim_end().to_string(), Vec::new()),
    };
    match run(cli) {
        Ok(out) => {
            // a closed pipe on stdout is the reader's choice, not a failure
            let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&out).expect("json values serialize"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            let report = e.report();
            fail(&report.kind, report.message, report.details)
        }
    }
}
