use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use stereorect::imaging::{canvas_for, overlay_scanlines, warp_onto, Canvas, OutputBounds, RasterImage};
use stereorect::io::{
    mat_to_rows, read_correspondences, write_correspondences, write_json, PipelineConfig, ResultDocument, RunManifest,
    TruthDocument,
};
use stereorect::pipeline::{evaluate, rectify, EvalSummary};
use stereorect::synth::{make_suite_with, SuiteOptions};
use stereorect::{geometry::transform_point, CorrespondenceSet, Error, Mat3, Mode, Point2, RigDims};

/// Uncalibrated stereo rectification.
#[derive(Debug, Parser)]
#[command(name = "stereorect", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the eight-case synthetic suite.
    Synth(SynthArgs),
    /// Filter matches, estimate rectifying homographies and report distortion.
    Rectify(RectifyArgs),
    /// Rectify every case of a suite directory over several RANSAC seeds.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Usr,
    UsrCgd,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Usr => Mode::Usr,
            ModeArg::UsrCgd => Mode::UsrCgd,
        }
    }
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Image size as WIDTHxHEIGHT.
    #[arg(long, default_value = "1920x1080", value_parser = parse_dims)]
    dims: RigDims,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Correspondences per case.
    #[arg(long, default_value_t = 300)]
    points: usize,
    /// Gaussian pixel noise on inliers.
    #[arg(long, default_value_t = 0.3)]
    noise: f64,
    /// Fraction of uniform random outliers.
    #[arg(long, default_value_t = 0.1)]
    outliers: f64,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// TOML or JSON file with `solver` and `ransac` sections.
    #[arg(long, env = "STEREORECT_CONFIG")]
    config: Option<PathBuf>,
    /// RANSAC inlier threshold (Sampson distance, pixels).
    #[arg(long)]
    ransac_threshold: Option<f64>,
    #[arg(long)]
    ransac_iters: Option<usize>,
}

#[derive(Debug, Args)]
struct RectifyArgs {
    #[arg(long)]
    matches: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Run seed; drives RANSAC unless --ransac-seed is given.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    ransac_seed: Option<u64>,
    #[command(flatten)]
    solve: SolveArgs,
    /// Left image to warp (requires --right).
    #[arg(long, requires = "right")]
    left: Option<PathBuf>,
    #[arg(long, requires = "left")]
    right: Option<PathBuf>,
    /// Number of scanlines in the overlay.
    #[arg(long, default_value_t = 10)]
    scanlines: usize,
    /// Size the rectified images to hold the whole warped frame.
    #[arg(long)]
    auto_fit: bool,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Directory holding `*.matches.json` files.
    suite: PathBuf,
    /// Number of RANSAC seeds averaged per case.
    #[arg(long, default_value_t = 3)]
    seeds: usize,
    /// First RANSAC seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    solve: SolveArgs,
    /// Directory for `eval.csv` and the run manifest.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidInput(_) | Error::Io(_) => 2,
        Error::InsufficientInliers { .. }
        | Error::DegenerateConfiguration(_)
        | Error::TooFewVisiblePoints(_)
        | Error::ZeroDenominator(_) => 3,
        _ => 4,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self { code: exit_code(&e), message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn parse_dims(s: &str) -> Result<RigDims, String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or("expected WIDTHxHEIGHT")?;
    let w: u32 = w.trim().parse().map_err(|_| format!("bad width in {s:?}"))?;
    let h: u32 = h.trim().parse().map_err(|_| format!("bad height in {s:?}"))?;
    RigDims::new(w as f64, h as f64).map_err(|e| e.to_string())
}

fn create_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| Failure::usage(format!("cannot create {}: {e}", path.display())))
}

fn load_config(args: &SolveArgs) -> CliResult<PipelineConfig> {
    let mut cfg = match &args.config {
        Some(path) => PipelineConfig::load(path).map_err(|e| Failure::usage(format!("config: {e}")))?,
        None => PipelineConfig::default(),
    };
    if let Some(mode) = args.mode {
        cfg.solver.mode = mode.into();
    }
    if let Some(t) = args.ransac_threshold {
        cfg.ransac.inlier_threshold = t;
    }
    if let Some(n) = args.ransac_iters {
        cfg.ransac.max_iterations = n;
    }
    cfg.solver.validate().map_err(|e| Failure::usage(e.to_string()))?;
    cfg.ransac.validate().map_err(|e| Failure::usage(e.to_string()))?;
    Ok(cfg)
}

fn cmd_synth(args: SynthArgs) -> CliResult<()> {
    if !(args.noise >= 0.0 && (0.0..1.0).contains(&args.outliers)) {
        return Err(Failure::usage("--noise must be >= 0 and --outliers in [0, 1)"));
    }
    let opts = SuiteOptions { n_points: args.points, noise_sigma: args.noise, outlier_fraction: args.outliers };
    let suite = make_suite_with(args.dims, args.seed, &opts)?;
    create_dir(&args.out)?;
    let mut manifest = RunManifest::new("synth", &args.out);
    manifest.seed = Some(args.seed);
    for case in &suite {
        let matches = args.out.join(format!("{}.matches.json", case.name));
        write_correspondences(&matches, &case.correspondences)?;
        let truth = TruthDocument::new(&case.name, manifest.clone(), case.config, &case.truth);
        write_json(&args.out.join(format!("{}.truth.json", case.name)), &truth)?;
    }
    write_json(&args.out.join("manifest.json"), &manifest)?;
    println!("wrote {} cases to {}", suite.len(), args.out.display());
    Ok(())
}

/// Maps matches into rectified image coordinates, dropping any that cannot be mapped.
fn rectified_matches(c: &CorrespondenceSet, hl: &Mat3, hr: &Mat3, cl: &Canvas, cr: &Canvas) -> CliResult<CorrespondenceSet> {
    let mapped = c
        .pairs
        .iter()
        .filter_map(|p| {
            let l = transform_point(hl, &Point2::new(p[0], p[1])).ok()?;
            let r = transform_point(hr, &Point2::new(p[2], p[3])).ok()?;
            Some([l.x - cl.origin_x as f64, l.y - cl.origin_y as f64, r.x - cr.origin_x as f64, r.y - cr.origin_y as f64])
        })
        .collect();
    Ok(CorrespondenceSet::new(RigDims::new(cl.width as f64, cl.height as f64)?, mapped)?)
}

fn write_images(args: &RectifyArgs, left: &RasterImage, right: &RasterImage, hl: &Mat3, hr: &Mat3, inliers: &CorrespondenceSet) -> CliResult<()> {
    let bounds = if args.auto_fit { OutputBounds::AutoFit } else { OutputBounds::Input };
    let mut cl = canvas_for(hl, left.width(), left.height(), bounds)?;
    let mut cr = canvas_for(hr, right.width(), right.height(), bounds)?;
    // Both halves share one vertical range so matching rows stay aligned.
    let top = cl.origin_y.min(cr.origin_y);
    let bottom = (cl.origin_y + cl.height as i64).max(cr.origin_y + cr.height as i64);
    for c in [&mut cl, &mut cr] {
        c.origin_y = top;
        c.height = (bottom - top) as u32;
    }
    let wl = warp_onto(left, hl, cl)?;
    let wr = warp_onto(right, hr, cr)?;
    wl.save(&args.out.join("left.rect.png"))?;
    wr.save(&args.out.join("right.rect.png"))?;
    let rect = rectified_matches(inliers, hl, hr, &cl, &cr)?;
    overlay_scanlines(&wl, &wr, &rect, args.scanlines).save(&args.out.join("scanlines.png"))?;
    Ok(())
}

fn cmd_rectify(args: RectifyArgs) -> CliResult<()> {
    let mut cfg = load_config(&args.solve)?;
    if let Some(seed) = args.ransac_seed.or(args.seed) {
        cfg.ransac.seed = seed;
    }
    let c = read_correspondences(&args.matches).map_err(|e| Failure::usage(format!("{}: {e}", args.matches.display())))?;
    let images = match (&args.left, &args.right) {
        (Some(l), Some(r)) => {
            let (l, r) = (RasterImage::load(l)?, RasterImage::load(r)?);
            for img in [&l, &r] {
                if img.width() as f64 != c.dims.w || img.height() as f64 != c.dims.h {
                    return Err(Failure::usage("image size does not match the correspondence file"));
                }
            }
            Some((l, r))
        }
        _ => None,
    };

    let mut manifest = RunManifest::new("rectify", &args.out);
    manifest.inputs.push(args.matches.display().to_string());
    manifest.inputs.extend(args.left.iter().chain(&args.right).map(|p| p.display().to_string()));
    manifest.config = args.solve.config.as_ref().map(|p| p.display().to_string());
    manifest.mode = Some(cfg.solver.mode);
    manifest.seed = Some(cfg.ransac.seed);

    let run = rectify(&c, &cfg.ransac, &cfg.solver);
    create_dir(&args.out)?;
    let run = match run {
        Ok(run) => run,
        Err(e) => {
            let record = serde_json::json!({ "error": e.to_string(), "manifest": manifest });
            fs::write(args.out.join("trace.jsonl"), record.to_string() + "\n").map_err(Error::from)?;
            return Err(e.into());
        }
    };
    let sol = &run.solution;
    fs::write(args.out.join("trace.jsonl"), sol.trace.to_json_lines()).map_err(Error::from)?;
    write_correspondences(&args.out.join("inliers.matches.json"), &run.inlier_set)?;
    let doc = ResultDocument {
        manifest,
        h_l: mat_to_rows(&sol.homographies.left),
        h_r: mat_to_rows(&sol.homographies.right),
        fundamental: mat_to_rows(&sol.homographies.fundamental),
        params: sol.params,
        report: sol.report,
        input_pairs: c.len(),
        inlier_pairs: run.inliers.len(),
        trace: sol.trace.clone(),
    };
    write_json(&args.out.join("result.json"), &doc)?;
    if let Some((l, r)) = &images {
        write_images(&args, l, r, &sol.homographies.left, &sol.homographies.right, &run.inlier_set)?;
    }
    let rep = &sol.report;
    println!(
        "{} inliers of {}; E_v {:.4} px, E_Sk {:.3}, E_AR {:.4}, E_R {:.3}, E_SR {:.4} ({:?})",
        run.inliers.len(),
        c.len(),
        rep.e_v,
        rep.e_sk,
        rep.e_ar,
        rep.e_r,
        rep.e_sr,
        sol.trace.termination
    );
    Ok(())
}

fn suite_cases(dir: &Path) -> CliResult<Vec<(String, PathBuf)>> {
    let entries = fs::read_dir(dir).map_err(|e| Failure::usage(format!("{}: {e}", dir.display())))?;
    let mut cases: Vec<(String, PathBuf)> = entries
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name().to_string_lossy().into_owned();
            name.strip_suffix(".matches.json").map(|stem| (stem.to_string(), e.path()))
        })
        .collect();
    cases.sort();
    if cases.is_empty() {
        return Err(Failure::usage(format!("no *.matches.json files in {}", dir.display())));
    }
    Ok(cases)
}

const COLUMNS: [&str; 6] = ["E_v", "E_O", "E_Sk", "E_AR", "E_R", "E_SR"];

fn values(s: &EvalSummary) -> [f64; 6] {
    [s.e_v, s.e_o, s.e_sk, s.e_ar, s.e_r, s.e_sr]
}

fn render(rows: &[(String, Result<EvalSummary, String>)], mean: Option<&EvalSummary>) -> (String, String) {
    let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(4).max(4);
    let mut table = format!("{:<width$}", "case");
    let mut csv = String::from("case,e_v,e_o,e_sk,e_ar,e_r,e_sr\n");
    for c in COLUMNS {
        let _ = write!(table, " {c:>10}");
    }
    table.push('\n');
    let mut line = |name: &str, s: &EvalSummary, table: &mut String| {
        let _ = write!(table, "{name:<width$}");
        let v = values(s);
        for x in v {
            let _ = write!(table, " {x:>10.4}");
        }
        table.push('\n');
        let fields: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
        let _ = writeln!(csv, "{name},{}", fields.join(","));
    };
    for (name, row) in rows {
        match row {
            Ok(s) => line(name, s, &mut table),
            Err(msg) => {
                let _ = writeln!(table, "{name:<width$} FAILED: {msg}");
            }
        }
    }
    if let Some(m) = mean {
        line("Mean", m, &mut table);
    }
    (table, csv)
}

fn cmd_eval(args: EvalArgs) -> CliResult<()> {
    let cfg = load_config(&args.solve)?;
    if args.seeds == 0 {
        return Err(Failure::usage("--seeds must be at least 1"));
    }
    let cases = suite_cases(&args.suite)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Failure::usage(e.to_string()))?;
    let results: Vec<(String, Result<EvalSummary, Error>)> = pool.install(|| {
        cases
            .par_iter()
            .map(|(name, path)| {
                let summary = read_correspondences(path)
                    .and_then(|c| evaluate(&c, &cfg.ransac, &cfg.solver, args.seed, args.seeds))
                    .map(|(s, _)| s);
                (name.clone(), summary)
            })
            .collect()
    });

    let first_failure = results.iter().find_map(|(_, r)| r.as_ref().err()).map(exit_code);
    let ok: Vec<EvalSummary> = results.iter().filter_map(|(_, r)| r.as_ref().ok().copied()).collect();
    let mean = EvalSummary::mean(&ok).ok();
    let rows: Vec<_> = results.into_iter().map(|(n, r)| (n, r.map_err(|e| e.to_string()))).collect();
    let (table, csv) = render(&rows, mean.as_ref());
    println!("{table}");
    print!("{csv}");

    if let Some(out) = &args.out {
        create_dir(out)?;
        fs::write(out.join("eval.csv"), &csv).map_err(Error::from)?;
        let mut manifest = RunManifest::new("eval", out);
        manifest.inputs = cases.iter().map(|(_, p)| p.display().to_string()).collect();
        manifest.config = args.solve.config.as_ref().map(|p| p.display().to_string());
        manifest.mode = Some(cfg.solver.mode);
        manifest.seed = Some(args.seed);
        write_json(&out.join("manifest.json"), &manifest)?;
    }
    match first_failure {
        Some(code) => Err(Failure { code, message: "one or more cases failed".into() }),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Rectify(a) => cmd_rectify(a),
        Command::Eval(a) => cmd_eval(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
