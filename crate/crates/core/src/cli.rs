//! The `mixcraft` command line: dataset generation, fitting, bootstrap,
//! clustering, classification, splitting and density grids.
//!
//! Every command writes a run manifest next to its primary output. The
//! manifest records the fully resolved arguments, so `mixcraft replay`
//! reproduces the outputs exactly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::criteria::CriterionKind;
use crate::data::{self, load_csv, load_labeled_csv, load_labels, sniff_header, write_labels, Dataset, LabeledDataset};
use crate::error::{Error, Result};
use crate::estimator::{fit, EstimatorConfig, FitResult, KSpec, Restraints};
use crate::inference::{bootstrap_model, classify, merge_clusters, BootstrapMode, BootstrapResult, ClassModel};
use crate::mixture::{generate_dataset, mixture_pdf, GeneratorSpec, MixtureModel};
use crate::preprocess::{KGrid, PreprocessingKind};
use crate::rng;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mixcraft", version, about = "Multivariate normal mixture estimation")]
pub struct Cli {
    /// Worker threads; defaults to MIXCRAFT_THREADS, then to all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Draw a random mixture and sample a dataset from it.
    Generate(GenerateArgs),
    /// Estimate a mixture and select c and v/k by an information criterion.
    Fit(FitArgs),
    /// Bootstrap the number of components and the parameters of a fit.
    Boot(BootArgs),
    /// Merge components into clusters by entropy.
    Cluster(ClusterArgs),
    /// Fit one mixture per class and classify a test set.
    Classify(ClassifyArgs),
    /// Stratified train/test split of a labeled dataset.
    Split(SplitArgs),
    /// Evaluate a mixture density on a regular grid.
    DensityGrid(DensityGridArgs),
    /// Re-run the command recorded in a manifest.
    #[serde(skip)]
    Replay(ReplayArgs),
}

/// A comma-separated list given as one argument.
type List = Vec<f64>;

fn parse_list(s: &str) -> std::result::Result<List, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect()
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    match parse_list(s)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(format!("expected two comma-separated numbers, got {s:?}")),
    }
}

fn parse_k(s: &str) -> std::result::Result<KSpec, String> {
    if s == "auto" {
        return Ok(KSpec::Auto);
    }
    let values = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    KGrid::new(values).map(KSpec::Grid).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long)]
    pub c: usize,
    #[arg(long)]
    pub n: usize,
    /// Range of the means, `low,high`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, default_value = "-100,100")]
    pub mu: (f64, f64),
    /// Range of the covariance eigenvalues, `low,high`.
    #[arg(long, value_parser = parse_pair, default_value = "1,100")]
    pub lambda: (f64, f64),
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub model_out: Option<PathBuf>,
}

/// Estimation settings shared by `fit`, `boot` and `classify`.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EstimationArgs {
    /// `histogram`, `Parzen window` or `k-nearest neighbour`.
    #[arg(long, default_value = "histogram")]
    pub preprocessing: PreprocessingKind,
    #[arg(long, default_value = "AIC")]
    pub criterion: CriterionKind,
    #[arg(long, default_value_t = 15)]
    pub cmax: usize,
    /// `auto` or a comma-separated list of v (or k) values.
    #[arg(long = "K", value_parser = parse_k, default_value = "auto")]
    pub k: KSpec,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub y0: Option<List>,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub ymin: Option<List>,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub ymax: Option<List>,
    #[arg(long, default_value_t = 0.1)]
    pub ar: f64,
    #[arg(long, default_value = "loose")]
    pub restraints: Restraints,
}

impl EstimationArgs {
    pub fn config(&self) -> EstimatorConfig {
        EstimatorConfig {
            preprocessing: self.preprocessing,
            cmax: self.cmax,
            criterion: self.criterion,
            k: self.k.clone(),
            y0: self.y0.clone(),
            ymin: self.ymin.clone(),
            ymax: self.ymax.clone(),
            ar: self.ar,
            restraints: self.restraints,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub estimation: EstimationArgs,
    /// Model document (JSON).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Per-c diagnostics; defaults to `<summary>_opt.csv`.
    #[arg(long)]
    pub opt_out: Option<PathBuf>,
    /// Criterion at every evaluated v/k; defaults to `<summary>_all.csv`.
    #[arg(long)]
    pub all_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BootArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "parametric")]
    pub mode: BootstrapMode,
    #[arg(short = 'B', long = "B", default_value_t = 10)]
    pub b: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub estimation: EstimationArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ClusterArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// True cluster labels, one per row.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Predicted clusters, one column per number of clusters.
    #[arg(long)]
    pub out: PathBuf,
    /// Merge tree.
    #[arg(long)]
    pub tree: PathBuf,
    /// Correct-clustering probability per level; defaults to `<tree>_prob.csv`.
    #[arg(long)]
    pub prob_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ClassifyArgs {
    /// Labeled training data.
    #[arg(long)]
    pub train: PathBuf,
    /// 1-based label column of the training file.
    #[arg(long, default_value_t = 1)]
    pub class_col: usize,
    #[arg(long)]
    pub test: PathBuf,
    /// Label column of the test file, when it carries the true classes.
    #[arg(long)]
    pub test_class_col: Option<usize>,
    /// True test labels, one per row.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[command(flatten)]
    pub estimation: EstimationArgs,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub cm: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SplitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub class_col: usize,
    #[arg(long, default_value_t = 0.6)]
    pub p: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out_train: PathBuf,
    #[arg(long)]
    pub out_test: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DensityGridArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// `low1,high1,low2,high2,...`
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub bounds: List,
    /// Grid points per dimension.
    #[arg(long, default_value_t = 100)]
    pub resolution: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}

/// What a run did, written next to its primary output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Command,
    pub seed: Option<u64>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub duration_seconds: f64,
    pub version: String,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Generate(_) => "generate",
            Command::Fit(_) => "fit",
            Command::Boot(_) => "boot",
            Command::Cluster(_) => "cluster",
            Command::Classify(_) => "classify",
            Command::Split(_) => "split",
            Command::DensityGrid(_) => "density-grid",
            Command::Replay(_) => "replay",
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Command::Generate(a) => Some(a.seed),
            Command::Boot(a) => Some(a.seed),
            Command::Split(a) => Some(a.seed),
            _ => None,
        }
    }
}

/// Manifest path for a primary output: `<output>.manifest.json`.
pub fn manifest_path(primary: &Path) -> PathBuf {
    let mut s = primary.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn load_data(path: &Path) -> Result<Dataset> {
    load_csv(path, sniff_header(path)?)
}

fn load_model(path: &Path) -> Result<MixtureModel> {
    MixtureModel::from_json(&read_text(path)?)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn join<T: ToString>(values: &[T]) -> String {
    values.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// Parses the process arguments, runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let threads = cli
        .threads
        .or_else(|| std::env::var("MIXCRAFT_THREADS").ok().and_then(|v| v.parse().ok()));
    if let Some(t) = threads.filter(|&t| t > 0) {
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match run(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                EXIT_USAGE
            } else {
                EXIT_NUMERICAL
            }
        }
    }
}

/// Runs one command and writes its manifest.
pub fn run(command: &Command) -> Result<()> {
    if let Command::Replay(a) = command {
        let manifest: RunManifest = serde_json::from_str(&read_text(&a.manifest)?)
            .map_err(|e| Error::InvalidArgument(format!("bad manifest: {e}")))?;
        return run(&manifest.config);
    }
    let start = Instant::now();
    let (inputs, outputs) = match command {
        Command::Generate(a) => cmd_generate(a)?,
        Command::Fit(a) => cmd_fit(a)?,
        Command::Boot(a) => cmd_boot(a)?,
        Command::Cluster(a) => cmd_cluster(a)?,
        Command::Classify(a) => cmd_classify(a)?,
        Command::Split(a) => cmd_split(a)?,
        Command::DensityGrid(a) => cmd_density_grid(a)?,
        Command::Replay(_) => unreachable!("handled above"),
    };
    let manifest = RunManifest {
        command: command.name().to_string(),
        config: command.clone(),
        seed: command.seed(),
        inputs,
        outputs: outputs.clone(),
        duration_seconds: start.elapsed().as_secs_f64(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_text(&manifest_path(&outputs[0]), &text)
}

type Paths = (Vec<PathBuf>, Vec<PathBuf>);

fn cmd_generate(a: &GenerateArgs) -> Result<Paths> {
    let spec = GeneratorSpec {
        d: a.d,
        c: a.c,
        n: a.n,
        mu_range: a.mu,
        lambda_range: a.lambda,
        seed: a.seed,
    };
    let (model, labeled) = generate_dataset(&spec)?;
    let mut outputs = vec![a.out.clone()];
    labeled.data().write_csv(&a.out)?;
    if let Some(p) = &a.labels {
        write_labels(p, "Zt", labeled.labels())?;
        outputs.push(p.clone());
    }
    if let Some(p) = &a.model_out {
        write_text(p, &model.to_json())?;
        outputs.push(p.clone());
    }
    let bounds = labeled.data().bounds();
    println!("w: {}", join(model.weights()));
    println!("ymin: {}", join(&bounds.iter().map(|b| b.0).collect::<Vec<_>>()));
    println!("ymax: {}", join(&bounds.iter().map(|b| b.1).collect::<Vec<_>>()));
    Ok((vec![], outputs))
}

pub const SUMMARY_HEADER: &str = "Dataset,Preprocessing,Criterion,c,v/k,IC,logL,M";

/// The summary row of a fit, in `SUMMARY_HEADER` order.
pub fn summary_row(r: &FitResult) -> String {
    let s = &r.summary;
    format!(
        "{},{},{},{},{},{},{},{}",
        s.dataset, s.preprocessing, s.criterion, s.c, s.k, s.ic, s.log_l, s.m
    )
}

fn cmd_fit(a: &FitArgs) -> Result<Paths> {
    let data = load_data(&a.data)?;
    let config = a.estimation.config();
    let result = fit(&data, &config)?;
    let mut outputs = vec![a.out.clone()];
    write_text(&a.out, &result.model.to_json())?;
    let summary = format!("{SUMMARY_HEADER}\n{}\n", summary_row(&result));
    if let Some(p) = &a.summary {
        write_text(p, &summary)?;
        outputs.push(p.clone());
    }
    let opt_out = a
        .opt_out
        .clone()
        .or_else(|| a.summary.as_ref().map(|p| sibling(p, "_opt.csv")));
    if let Some(p) = opt_out {
        let mut t = String::from("c,IC,logL,D\n");
        for i in 0..result.opt_c.len() {
            let _ = writeln!(
                t,
                "{},{},{},{}",
                result.opt_c[i], result.opt_ic[i], result.opt_log_l[i], result.opt_d[i]
            );
        }
        write_text(&p, &t)?;
        outputs.push(p);
    }
    let all_out = a
        .all_out
        .clone()
        .or_else(|| a.summary.as_ref().map(|p| sibling(p, "_all.csv")));
    if let Some(p) = all_out {
        let mut t = String::from("K,IC\n");
        for (k, ic) in result.all_k.iter().zip(&result.all_ic) {
            let _ = writeln!(t, "{k},{ic}");
        }
        write_text(&p, &t)?;
        outputs.push(p);
    }
    print!("{summary}");
    println!("Maximum logL = {} at c = {}.", result.summary.log_l, result.summary.c);
    Ok((vec![a.data.clone()], outputs))
}

/// The coefficient-of-variation tables of a bootstrap.
pub fn boot_summary(r: &BootstrapResult) -> String {
    let mut t = String::new();
    let c = r.w.len();
    let d = r.mu.first().map_or(0, Vec::len);
    let cols: Vec<String> = (1..=c).map(|l| format!("comp{l}")).collect();
    let _ = writeln!(t, "{:>12} {}", "", cols.join(" "));
    let _ = writeln!(
        t,
        "{:>12} {}",
        "w.cv",
        join(&r.w.iter().map(|s| fmt4(s.cv)).collect::<Vec<_>>()).replace(',', " ")
    );
    let _ = writeln!(t, "{:>12} {}", "", join(&(1..=d).collect::<Vec<_>>()).replace(',', " "));
    for (l, mu) in r.mu.iter().enumerate() {
        let row: Vec<String> = mu.iter().map(|s| fmt4(s.cv)).collect();
        let _ = writeln!(t, "{:>12} {}", format!("theta1.{}.cv", l + 1), row.join(" "));
    }
    let heads: Vec<String> = (1..=d).flat_map(|i| (1..=d).map(move |j| format!("{i}-{j}"))).collect();
    let _ = writeln!(t, "{:>12} {}", "", heads.join(" "));
    for (l, sigma) in r.sigma.iter().enumerate() {
        let row: Vec<String> = sigma.iter().map(|s| fmt4(s.cv)).collect();
        let _ = writeln!(t, "{:>12} {}", format!("theta2.{}.cv", l + 1), row.join(" "));
    }
    let _ = writeln!(
        t,
        "Mode probability = {} at c = {} components.",
        fmt4(r.c_prob),
        r.c_mode
    );
    t
}

fn fmt4(x: f64) -> String {
    format!("{x:.4}")
}

fn cmd_boot(a: &BootArgs) -> Result<Paths> {
    if a.b < 2 {
        return Err(Error::InvalidArgument("B must be at least 2".into()));
    }
    let model = load_model(&a.model)?;
    let data = load_data(&a.data)?;
    let result = bootstrap_model(&model, &data, a.mode, a.b, a.seed, &a.estimation.config())?;
    write_text(
        &a.out,
        &serde_json::to_string_pretty(&result).expect("result serializes"),
    )?;
    println!("c: {}", join(&result.c_all));
    println!("c.se: {}", fmt4(result.c_se));
    println!("c.cv: {}", fmt4(result.c_cv));
    println!("c.mode: {}", result.c_mode);
    println!("c.prob: {}", fmt4(result.c_prob));
    print!("{}", boot_summary(&result));
    Ok((vec![a.model.clone(), a.data.clone()], vec![a.out.clone()]))
}

fn cmd_cluster(a: &ClusterArgs) -> Result<Paths> {
    let model = load_model(&a.model)?;
    let data = load_data(&a.data)?;
    let truth = a.truth.as_ref().map(|p| load_labels(p, sniff_header(p)?)).transpose()?;
    let res = merge_clusters(&model, &data, truth.as_deref())?;
    let c = res.c();

    let mut t = join(&(1..=c).map(|l| format!("c{l}")).collect::<Vec<_>>());
    t.push('\n');
    for j in 0..data.n() {
        let row: Vec<usize> = res.zp.iter().map(|z| z[j]).collect();
        t.push_str(&join(&row));
        t.push('\n');
    }
    write_text(&a.out, &t)?;

    let mut tree = String::from("level,from,to,EN,ED\n");
    for m in &res.merges {
        let _ = writeln!(tree, "{},{},{},{},{}", m.level, m.from, m.to, m.en, m.ed);
    }
    write_text(&a.tree, &tree)?;
    let mut inputs = vec![a.model.clone(), a.data.clone()];
    let mut outputs = vec![a.out.clone(), a.tree.clone()];
    if let (Some(prob), Some(p)) = (&res.prob, &a.truth) {
        inputs.push(p.clone());
        let path = a.prob_out.clone().unwrap_or_else(|| sibling(&a.tree, "_prob.csv"));
        let mut t = String::from("level,prob\n");
        for (l, v) in prob.iter().enumerate() {
            let _ = writeln!(t, "{},{}", l + 1, v);
        }
        write_text(&path, &t)?;
        outputs.push(path);
        let copt = res.copt().expect("probabilities present");
        println!("copt = {copt}");
        println!("prob[copt] = {}", fmt4(prob[copt - 1]));
    }
    Ok((inputs, outputs))
}

fn cmd_classify(a: &ClassifyArgs) -> Result<Paths> {
    let train = load_labeled_csv(&a.train, sniff_header(&a.train)?, a.class_col)?;
    let mut inputs = vec![a.train.clone(), a.test.clone()];
    let (test, mut truth) = match a.test_class_col {
        Some(col) => {
            let l = load_labeled_csv(&a.test, sniff_header(&a.test)?, col)?;
            let (d, z) = l.into_parts();
            (d, Some(z))
        }
        None => (load_data(&a.test)?, None),
    };
    if let Some(p) = &a.truth {
        truth = Some(load_labels(p, sniff_header(p)?)?);
        inputs.push(p.clone());
    }
    let models = class_models(&train, &a.estimation.config())?;
    let res = classify(&models, &test, truth.as_deref())?;

    let mut outputs = vec![a.out.clone()];
    write_labels(&a.out, "Zp", &res.zp)?;
    if let (Some(cm), Some(metrics)) = (&res.cm, &res.metrics) {
        let mut t = String::from("Test,Predictive,Frequency\n");
        for (p, &cp) in res.classes.iter().enumerate() {
            for (r, &ct) in res.classes.iter().enumerate() {
                let _ = writeln!(t, "{ct},{cp},{}", cm[r][p]);
            }
        }
        if let Some(path) = &a.cm {
            write_text(path, &t)?;
            outputs.push(path.clone());
        }
        print!("{t}");
        println!("Error = {}.", fmt4(metrics.error));
    }
    Ok((inputs, outputs))
}

/// One fitted mixture per class, with the class share of the training rows
/// as its prior.
pub fn class_models(train: &LabeledDataset, config: &EstimatorConfig) -> Result<Vec<ClassModel>> {
    let n = train.data().n() as f64;
    train
        .classes()
        .into_iter()
        .map(|s| {
            let subset = train.class_subset(s);
            let prior = subset.n() as f64 / n;
            let model = fit(&subset, config)?.model;
            Ok(ClassModel { class: s, prior, model })
        })
        .collect()
}

fn cmd_split(a: &SplitArgs) -> Result<Paths> {
    let labeled = load_labeled_csv(&a.data, sniff_header(&a.data)?, a.class_col)?;
    let mut rng = rng::stream(a.seed, "split");
    let res = data::split(&labeled, a.p, &mut rng)?;
    res.train[0].write_csv(&a.out_train)?;
    LabeledDataset::new(res.test.clone(), res.test_labels.clone())?.write_csv(&a.out_test)?;
    println!("train: {} rows, test: {} rows", res.train[0].data().n(), res.test.n());
    Ok((vec![a.data.clone()], vec![a.out_train.clone(), a.out_test.clone()]))
}

/// Grid coordinates along one axis.
fn axis(lo: f64, hi: f64, r: usize) -> Vec<f64> {
    if r == 1 {
        vec![0.5 * (lo + hi)]
    } else {
        (0..r).map(|i| lo + (hi - lo) * i as f64 / (r - 1) as f64).collect()
    }
}

fn cmd_density_grid(a: &DensityGridArgs) -> Result<Paths> {
    let model = load_model(&a.model)?;
    let d = model.d();
    if a.bounds.len() != 2 * d {
        return Err(Error::DimensionMismatch {
            expected: 2 * d,
            got: a.bounds.len(),
        });
    }
    if a.resolution == 0 {
        return Err(Error::InvalidArgument("resolution must be positive".into()));
    }
    let axes: Vec<Vec<f64>> = (0..d)
        .map(|i| axis(a.bounds[2 * i], a.bounds[2 * i + 1], a.resolution))
        .collect();
    let mut t = join(&(1..=d).map(|i| format!("y{i}")).collect::<Vec<_>>());
    t.push_str(",density,component\n");
    let total = a.resolution.pow(d as u32);
    let mut y = vec![0.0; d];
    for idx in 0..total {
        let mut rest = idx;
        // The first coordinate varies slowest.
        for i in (0..d).rev() {
            y[i] = axes[i][rest % a.resolution];
            rest /= a.resolution;
        }
        let _ = writeln!(
            t,
            "{},{:e},{}",
            join(&y),
            mixture_pdf(&model, &y),
            model.argmax_component(&y) + 1
        );
    }
    write_text(&a.out, &t)?;
    Ok((vec![a.model.clone()], vec![a.out.clone()]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_pairs() {
        assert_eq!(parse_list("1, -2.5").unwrap(), vec![1.0, -2.5]);
        assert_eq!(parse_pair("-100,100").unwrap(), (-100.0, 100.0));
        assert!(parse_pair("1").is_err());
    }

    #[test]
    fn k_spec() {
        assert_eq!(parse_k("auto").unwrap(), KSpec::Auto);
        assert_eq!(
            parse_k("40,10").unwrap(),
            KSpec::Grid(KGrid::new(vec![10, 40]).unwrap())
        );
        assert!(parse_k("0").is_err());
    }

    #[test]
    fn axis_points() {
        assert_eq!(axis(-1.0, 1.0, 3), vec![-1.0, 0.0, 1.0]);
        assert_eq!(axis(-1.0, 3.0, 1), vec![1.0]);
    }

    #[test]
    fn manifest_sits_next_to_output() {
        assert_eq!(
            manifest_path(Path::new("out/m.json")),
            PathBuf::from("out/m.json.manifest.json")
        );
    }

    #[test]
    fn bad_flags_are_usage_errors() {
        assert_eq!(main_with_args(["mixcraft", "boot", "--nope"]), EXIT_USAGE);
        assert_eq!(main_with_args(["mixcraft", "--help"]), EXIT_OK);
    }
}
