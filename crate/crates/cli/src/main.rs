use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mebench_core::bench::{run, BenchConfig, InputFormat, RunSpec, SequenceReport};
use mebench_core::metrics::psnr;
use mebench_core::video_io::ChromaFormat;
use mebench_core::{Algorithm, Error, ErrorKind, EstimatorConfig, PsoConfig, SadNorm};

#[derive(Parser)]
#[command(name = "mebench", version, about = "Block-matching motion estimation benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate, compensate and score a sequence with the selected algorithms.
    Run(RunArgs),
    /// Per-frame PSNR between two sequences.
    Psnr(PsnrArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Y4m,
    Yuv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChromaArg {
    #[value(name = "420")]
    C420,
    #[value(name = "400")]
    C400,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Side,
    Pixels,
    None,
}

#[derive(Args)]
struct InputArgs {
    /// Input container; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    /// Chroma layout of headerless .yuv input.
    #[arg(long, value_enum, default_value = "420")]
    chroma: ChromaArg,
    /// Read at most this many frames.
    #[arg(long)]
    frames: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    source: InputArgs,
    /// Comma-separated list of es, ds, arps, pso-zmp.
    #[arg(long, value_delimiter = ',', required = true)]
    algos: Vec<String>,
    #[arg(long, default_value_t = 16)]
    block: usize,
    /// Search window half-width for ES, DS and ARPS.
    #[arg(long = "p", default_value_t = 7)]
    search_range: i32,
    /// Zero-motion threshold; looked up from the file name when omitted.
    #[arg(long)]
    zmp_threshold: Option<f64>,
    /// Divisor applied to SAD sums before comparing with the threshold.
    #[arg(long, value_enum, default_value = "side")]
    sad_norm: NormArg,
    /// Also run zero-motion prejudgment in front of DS.
    #[arg(long)]
    ds_zmp: bool,
    /// ARPS zero-motion threshold on the plain 16x16 SAD sum.
    #[arg(long, default_value_t = mebench_core::estimators::ARPS_ZMP_SUM, conflicts_with = "arps_shared_zmp")]
    arps_zmp_sum: f64,
    /// Make ARPS use --zmp-threshold and --sad-norm like PSO-ZMP.
    #[arg(long)]
    arps_shared_zmp: bool,
    /// Do not score the predicted vector as a PSO global-best candidate.
    #[arg(long)]
    no_seed_candidate: bool,
    #[arg(long, default_value_t = 8)]
    particles: usize,
    #[arg(long, default_value_t = 5)]
    iters: usize,
    #[arg(long, default_value_t = 5.0)]
    vmax: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dump_mv: bool,
    #[arg(long)]
    dump_recon: bool,
}

#[derive(Args)]
struct PsnrArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[command(flatten)]
    source: InputArgs,
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn input_format(path: &Path, args: &InputArgs) -> Result<InputFormat, Failure> {
    let format = match args.format {
        Some(f) => f,
        None => match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("y4m") => FormatArg::Y4m,
            _ => FormatArg::Yuv,
        },
    };
    match format {
        FormatArg::Y4m => Ok(InputFormat::Y4m),
        FormatArg::Yuv => {
            let (Some(width), Some(height)) = (args.width, args.height) else {
                return Err(Failure::Usage(format!(
                    "{}: headerless YUV input needs --width and --height",
                    path.display()
                )));
            };
            let chroma = match args.chroma {
                ChromaArg::C420 => ChromaFormat::Yuv420,
                ChromaArg::C400 => ChromaFormat::Yuv400,
            };
            Ok(InputFormat::Yuv { width, height, chroma })
        }
    }
}

fn print_report(report: &SequenceReport) {
    println!("{:<8} {:>12} {:>12} {:>8}", "algo", "mean PSNR", "evals/MV", "static");
    for s in &report.summary {
        println!(
            "{:<8} {:>9.2} dB {:>12.3} {:>8.3}",
            s.algo.id(),
            s.mean_psnr_db,
            s.mean_evals,
            s.mean_static_fraction
        );
    }
    if report.summary.len() > 1 {
        println!();
        println!("computational gain (row over column)");
        print!("{:<8}", "");
        for s in &report.summary {
            print!(" {:>8}", s.algo.id());
        }
        println!();
        for a in &report.summary {
            print!("{:<8}", a.algo.id());
            for b in &report.summary {
                print!(" {:>8.2}", report.gain(a.algo, b.algo).unwrap_or(f64::NAN));
            }
            println!();
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let algorithms = args
        .algos
        .iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<Algorithm>())
        .collect::<Result<Vec<_>, _>>()?;
    let estimator = EstimatorConfig {
        block_size: args.block,
        search_range: args.search_range,
        zmp_threshold: args.zmp_threshold,
        sad_norm: match args.sad_norm {
            NormArg::Side => SadNorm::BlockSide,
            NormArg::Pixels => SadNorm::PixelCount,
            NormArg::None => SadNorm::None,
        },
        ds_zmp: args.ds_zmp,
        arps_zmp_sum: (!args.arps_shared_zmp).then_some(args.arps_zmp_sum),
    };
    let pso = PsoConfig {
        particles: args.particles,
        iterations: args.iters,
        v_max: args.vmax,
        seed: args.seed,
        seed_candidate: !args.no_seed_candidate,
        ..PsoConfig::default()
    };
    let spec = RunSpec {
        format: input_format(&args.input, &args.source)?,
        input: args.input,
        max_frames: args.source.frames,
        bench: BenchConfig {
            algorithms,
            estimator,
            pso,
        },
        out_dir: args.out,
        dump_mv: args.dump_mv,
        dump_recon: args.dump_recon,
    };
    if (spec.dump_mv || spec.dump_recon) && spec.out_dir.is_none() {
        return Err(Failure::Usage("--dump-mv/--dump-recon need --out".into()));
    }
    let report = run(&spec)?;
    print_report(&report);
    Ok(())
}

fn cmd_psnr(args: PsnrArgs) -> Result<(), Failure> {
    let a = input_format(&args.a, &args.source)?.load(&args.a, args.source.frames)?;
    let b = input_format(&args.b, &args.source)?.load(&args.b, args.source.frames)?;
    let n = a.len().min(b.len());
    let report = psnr(&a, &b, 0..n)?;
    println!("frame,psnr_db");
    for (k, db) in report.per_frame_db.iter().enumerate() {
        println!("{k},{db:.2}");
    }
    println!("mean,{:.2}", report.mean_db);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Psnr(args) => cmd_psnr(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Usage => 1,
                ErrorKind::Io => 2,
                ErrorKind::DataFormat => 3,
            })
        }
    }
}
