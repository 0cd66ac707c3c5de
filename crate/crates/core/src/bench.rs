//! Sequence-level benchmark: estimate every consecutive frame pair with each
//! selected algorithm, motion-compensate, and score computation and PSNR.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::block::BlockGrid;
use crate::compensation::compensate;
use crate::error::{Error, Result};
use crate::estimators::{estimate, Algorithm, EstimatorConfig};
use crate::frame::Sequence;
use crate::metrics::frame_psnr;
use crate::mvf::dump_mv_field;
use crate::pso_zmp::PsoConfig;
use crate::video_io::{load_raw_yuv, load_y4m, write_pgm, ChromaFormat};

/// Per-sequence zero-motion thresholds, matched case-insensitively against
/// the input file name.
pub const ZMP_THRESHOLDS: [(&str, f64); 6] = [
    ("akiyo", 384.0),
    ("container", 512.0),
    ("mother", 384.0),
    ("mthr", 384.0),
    ("news", 512.0),
    ("silent", 384.0),
];

pub fn lookup_threshold(name: &str) -> Option<(&'static str, f64)> {
    let lower = name.to_ascii_lowercase();
    ZMP_THRESHOLDS
        .iter()
        .find(|(key, _)| lower.contains(key))
        .map(|&(k, v)| (k, v))
}

/// Seed of the PSO stream for the pair ending at target frame `k`.
pub fn pair_seed(base: u64, k: usize) -> u64 {
    base ^ k as u64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InputFormat {
    Y4m,
    Yuv {
        width: usize,
        height: usize,
        #[serde(skip)]
        chroma: ChromaFormat,
    },
}

impl InputFormat {
    pub fn load(&self, path: &Path, max_frames: Option<usize>) -> Result<Sequence> {
        match *self {
            InputFormat::Y4m => {
                let mut seq = load_y4m(path)?;
                if let Some(n) = max_frames {
                    seq.truncate(n);
                }
                Ok(seq)
            }
            InputFormat::Yuv { width, height, chroma } => load_raw_yuv(path, width, height, chroma, max_frames),
        }
    }
}

/// The estimation part of a run, independent of where frames come from.
#[derive(Clone, Debug, Serialize)]
pub struct BenchConfig {
    pub algorithms: Vec<Algorithm>,
    pub estimator: EstimatorConfig,
    pub pso: PsoConfig,
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithms selected".into()));
        }
        self.estimator.validate()?;
        self.pso.validate()?;
        let needs_threshold = self.algorithms.iter().any(|a| a.needs_shared_threshold(&self.estimator));
        if needs_threshold && self.estimator.zmp_threshold.is_none() {
            return Err(Error::Config("a ZMP threshold is required".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct RunSpec {
    pub input: PathBuf,
    pub format: InputFormat,
    pub max_frames: Option<usize>,
    pub bench: BenchConfig,
    pub out_dir: Option<PathBuf>,
    pub dump_mv: bool,
    pub dump_recon: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameRow {
    /// Index of the target frame; frame 0 only serves as an anchor.
    pub frame: usize,
    pub algo: Algorithm,
    pub avg_evals: f64,
    pub psnr_db: f64,
    pub static_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlgoSummary {
    pub algo: Algorithm,
    pub mean_psnr_db: f64,
    pub mean_evals: f64,
    pub mean_static_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SequenceReport {
    pub rows: Vec<FrameRow>,
    pub summary: Vec<AlgoSummary>,
}

impl SequenceReport {
    pub fn summary_for(&self, algo: Algorithm) -> Option<&AlgoSummary> {
        self.summary.iter().find(|s| s.algo == algo)
    }

    /// Computational gain of `a` over `b`: how many times fewer evaluations
    /// `a` spends per vector.
    pub fn gain(&self, a: Algorithm, b: Algorithm) -> Option<f64> {
        let (sa, sb) = (self.summary_for(a)?, self.summary_for(b)?);
        Some(sb.mean_evals / sa.mean_evals)
    }
}

/// Optional per-pair artifacts.
#[derive(Clone, Debug, Default)]
pub struct Dumps {
    pub mv_dir: Option<PathBuf>,
    pub recon_dir: Option<PathBuf>,
}

impl Dumps {
    fn prepare(&self, algorithms: &[Algorithm]) -> Result<()> {
        for dir in [&self.mv_dir, &self.recon_dir].into_iter().flatten() {
            for a in algorithms {
                let d = dir.join(a.id());
                fs::create_dir_all(&d).map_err(|e| Error::io(format!("creating {}", d.display()), e))?;
            }
        }
        Ok(())
    }
}

/// Runs every algorithm over every consecutive frame pair of `seq`.
pub fn evaluate_sequence(seq: &Sequence, config: &BenchConfig, dumps: &Dumps) -> Result<SequenceReport> {
    config.validate()?;
    if seq.len() < 2 {
        return Err(Error::InvalidFrame(format!(
            "estimation needs at least 2 frames, got {}",
            seq.len()
        )));
    }
    let frames = seq.frames();
    let grid = BlockGrid::for_frame(&frames[0], config.estimator.block_size)?;
    dumps.prepare(&config.algorithms)?;

    let per_pair: Vec<Vec<FrameRow>> = (1..frames.len())
        .into_par_iter()
        .map(|k| {
            let (anchor, target) = (&frames[k - 1], &frames[k]);
            config
                .algorithms
                .iter()
                .map(|&algo| {
                    let seed = pair_seed(config.pso.seed, k);
                    let field = estimate(algo, anchor, target, &config.estimator, &config.pso, seed)?;
                    let recon = compensate(anchor, &field, &grid)?;
                    let psnr_db = frame_psnr(target, &recon.frame)?;
                    if let Some(dir) = &dumps.mv_dir {
                        dump_mv_field(&field, dir.join(algo.id()).join(format!("frame_{k:04}.mvf")))?;
                    }
                    if let Some(dir) = &dumps.recon_dir {
                        write_pgm(&recon.frame, dir.join(algo.id()).join(format!("frame_{k:04}.pgm")))?;
                    }
                    Ok(FrameRow {
                        frame: k,
                        algo,
                        avg_evals: field.avg_evals(),
                        psnr_db,
                        static_fraction: field.static_fraction(),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let rows: Vec<FrameRow> = per_pair.into_iter().flatten().collect();
    let summary = config
        .algorithms
        .iter()
        .map(|&algo| {
            let mine: Vec<&FrameRow> = rows.iter().filter(|r| r.algo == algo).collect();
            let n = mine.len() as f64;
            AlgoSummary {
                algo,
                mean_psnr_db: mine.iter().map(|r| r.psnr_db).sum::<f64>() / n,
                mean_evals: mine.iter().map(|r| r.avg_evals).sum::<f64>() / n,
                mean_static_fraction: mine.iter().map(|r| r.static_fraction).sum::<f64>() / n,
            }
        })
        .collect();
    Ok(SequenceReport { rows, summary })
}

/// Fills in the ZMP threshold from the sequence name when none was given.
/// Returns where the threshold came from.
pub fn resolve_threshold(config: &mut BenchConfig, input: &Path) -> Result<String> {
    if config.estimator.zmp_threshold.is_some() {
        return Ok("flag".into());
    }
    if !config.algorithms.iter().any(|a| a.needs_shared_threshold(&config.estimator)) {
        return Ok("unused".into());
    }
    let name = input
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    match lookup_threshold(&name) {
        Some((key, delta)) => {
            config.estimator.zmp_threshold = Some(delta);
            Ok(format!("table:{key}"))
        }
        None => Err(Error::UnresolvedThreshold(name)),
    }
}

#[derive(Serialize)]
struct Meta<'a> {
    tool: &'static str,
    version: &'static str,
    input: Option<String>,
    frames: usize,
    threshold_source: &'a str,
    memoization: &'static str,
    pso_seed_derivation: &'static str,
    rng: &'static str,
    config: &'a BenchConfig,
}

pub fn per_frame_csv(report: &SequenceReport) -> String {
    let mut out = String::from("frame,algo,avg_evals,psnr_db,static_fraction\n");
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{:.3},{:.2},{:.3}",
            r.frame, r.algo, r.avg_evals, r.psnr_db, r.static_fraction
        );
    }
    out
}

pub fn summary_csv(report: &SequenceReport) -> String {
    let mut out = String::from("algo,mean_psnr_db,mean_evals\n");
    for s in &report.summary {
        let _ = writeln!(out, "{},{:.3},{:.3}", s.algo, s.mean_psnr_db, s.mean_evals);
    }
    out
}

/// Row `a`, column `b` holds the gain of `a` over `b`.
pub fn gains_csv(report: &SequenceReport) -> String {
    let algos: Vec<Algorithm> = report.summary.iter().map(|s| s.algo).collect();
    let mut out = String::from("algo");
    for b in &algos {
        let _ = write!(out, ",{b}");
    }
    out.push('\n');
    for &a in &algos {
        out.push_str(a.id());
        for &b in &algos {
            let g = report.gain(a, b).unwrap_or(f64::NAN);
            let _ = write!(out, ",{g:.3}");
        }
        out.push('\n');
    }
    out
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Writes `per_frame.csv`, `summary.csv`, `gains.csv` and `meta.json`.
pub fn write_csv(
    report: &SequenceReport,
    dir: &Path,
    config: &BenchConfig,
    input: Option<&Path>,
    threshold_source: &str,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    write_file(dir, "per_frame.csv", &per_frame_csv(report))?;
    write_file(dir, "summary.csv", &summary_csv(report))?;
    write_file(dir, "gains.csv", &gains_csv(report))?;
    let frames = report.rows.iter().map(|r| r.frame).max().map_or(0, |m| m + 1);
    let meta = Meta {
        tool: "mebench",
        version: env!("CARGO_PKG_VERSION"),
        input: input.map(|p| p.display().to_string()),
        frames,
        threshold_source,
        memoization: "distinct displacements per block; repeated queries are not counted",
        pso_seed_derivation: "seed XOR target-frame index",
        rng: "ChaCha8Rng::seed_from_u64",
        config,
    };
    let json = serde_json::to_string_pretty(&meta).expect("meta serializes");
    write_file(dir, "meta.json", &(json + "\n"))
}

/// Loads the input, runs the benchmark and writes all outputs.
pub fn run(spec: &RunSpec) -> Result<SequenceReport> {
    let mut bench = spec.bench.clone();
    let source = resolve_threshold(&mut bench, &spec.input)?;
    bench.validate()?;
    let seq = spec.format.load(&spec.input, spec.max_frames)?;

    let dumps = match &spec.out_dir {
        Some(dir) => Dumps {
            mv_dir: spec.dump_mv.then(|| dir.join("mv")),
            recon_dir: spec.dump_recon.then(|| dir.join("recon")),
        },
        None => Dumps::default(),
    };
    let report = evaluate_sequence(&seq, &bench, &dumps)?;
    if let Some(dir) = &spec.out_dir {
        write_csv(&report, dir, &bench, Some(&spec.input), &source)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Frame;

    fn bench(algos: &[Algorithm]) -> BenchConfig {
        BenchConfig {
            algorithms: algos.to_vec(),
            estimator: EstimatorConfig::default().with_threshold(384.0),
            pso: PsoConfig::default(),
        }
    }

    fn texture(x: usize, y: usize) -> u8 {
        let (xf, yf) = (x as f64, y as f64);
        (128.0 + 80.0 * (xf / 6.0).sin() * (yf / 8.0).cos()) as u8
    }

    #[test]
    fn table_lookup() {
        assert_eq!(lookup_threshold("akiyo_qcif.yuv"), Some(("akiyo", 384.0)));
        assert_eq!(lookup_threshold("CONTAINER.y4m"), Some(("container", 512.0)));
        assert_eq!(lookup_threshold("mother-daughter_qcif.yuv").unwrap().1, 384.0);
        assert_eq!(lookup_threshold("mthr_dotr_qcif.yuv").unwrap().1, 384.0);
        assert_eq!(lookup_threshold("news_qcif.yuv").unwrap().1, 512.0);
        assert_eq!(lookup_threshold("silent_qcif.yuv").unwrap().1, 384.0);
        assert_eq!(lookup_threshold("foreman_qcif.yuv"), None);
    }

    #[test]
    fn unknown_name_needs_flag() {
        let mut cfg = bench(&[Algorithm::PsoZmp]);
        cfg.estimator.zmp_threshold = None;
        let err = resolve_threshold(&mut cfg, Path::new("foreman.yuv")).unwrap_err();
        assert!(matches!(err, Error::UnresolvedThreshold(_)));
        assert!(err.to_string().contains("--zmp-threshold"));

        let mut es_only = bench(&[Algorithm::Exhaustive, Algorithm::Diamond]);
        es_only.estimator.zmp_threshold = None;
        assert_eq!(resolve_threshold(&mut es_only, Path::new("foreman.yuv")).unwrap(), "unused");
    }

    #[test]
    fn identical_pair_single_row() {
        let f = Frame::from_fn(64, 48, texture).unwrap();
        let seq = Sequence::new(vec![f.clone(), f]).unwrap();
        let report = evaluate_sequence(&seq, &bench(&[Algorithm::PsoZmp]), &Dumps::default()).unwrap();
        assert_eq!(report.rows.len(), 1);
        let r = &report.rows[0];
        assert_eq!((r.frame, r.avg_evals, r.psnr_db, r.static_fraction), (1, 1.0, 100.0, 1.0));
        assert!(per_frame_csv(&report).contains("\n1,pso-zmp,1.000,100.00,1.000\n"));
    }

    #[test]
    fn row_count_and_gain_diagonal() {
        let frames: Vec<Frame> = (0..4)
            .map(|k| Frame::from_fn(64, 48, |x, y| texture(x + k, y + 10)).unwrap())
            .collect();
        let seq = Sequence::new(frames).unwrap();
        let report = evaluate_sequence(
            &seq,
            &bench(&[Algorithm::Diamond, Algorithm::PsoZmp]),
            &Dumps::default(),
        )
        .unwrap();
        assert_eq!(report.rows.len(), 2 * 3);
        let gains = gains_csv(&report);
        let lines: Vec<&str> = gains.lines().collect();
        assert_eq!(lines[0], "algo,ds,pso-zmp");
        for (i, line) in lines[1..].iter().enumerate() {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!(cells[i + 1].parse::<f64>().unwrap(), 1.0);
        }
        let g = report.gain(Algorithm::PsoZmp, Algorithm::Diamond).unwrap();
        let inv = report.gain(Algorithm::Diamond, Algorithm::PsoZmp).unwrap();
        assert!((g * inv - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_frame_rejected() {
        let seq = Sequence::new(vec![Frame::filled(32, 32, 0).unwrap()]).unwrap();
        assert!(evaluate_sequence(&seq, &bench(&[Algorithm::Exhaustive]), &Dumps::default()).is_err());
    }

    #[test]
    fn empty_algorithm_list_rejected() {
        assert!(bench(&[]).validate().is_err());
    }

    #[test]
    fn unwritable_output_dir() {
        let f = Frame::filled(32, 32, 0).unwrap();
        let seq = Sequence::new(vec![f.clone(), f]).unwrap();
        let cfg = bench(&[Algorithm::Exhaustive]);
        let report = evaluate_sequence(&seq, &cfg, &Dumps::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, b"x").unwrap();
        let err = write_csv(&report, &blocker.join("out"), &cfg, None, "flag").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
