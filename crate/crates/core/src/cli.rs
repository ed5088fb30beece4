//! The `emf` command line.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad flags, invalid fusion
//! config), 2 on data errors (missing or malformed files, impossible
//! splits, numerical failures).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::aggregation::{AggregatorId, BinaryFusion, Cf1f2Pair};
use crate::classifiers::ClassifierId;
use crate::data::{
    generate_synthetic, load_bundle_for, load_dataset, save_bundle, save_dataset, Bundle, DataError, SynthSpec,
    TrialSet,
};
use crate::dsp::{BandName, DspConfig};
use crate::eval::{
    aggregator_grid, itr, oemf_search, q_statistic, AggPairs, CvResult, EvalError, ItrInput, ScoreCache,
    SearchOptions, SplitPlan,
};
use crate::fusion::{FusionConfig, FusionError, FusionMode};
use crate::pipeline::{FeatureSet, PipelineConfig, PipelineError, PipelineModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        match e {
            DataError::InvalidSpec(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<FusionError> for CliError {
    fn from(e: FusionError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Fusion(f) => f.into(),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Pipeline(p) => p.into(),
            EvalError::InvalidInput(m) => CliError::Usage(m),
            other => CliError::Data(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "emf", version, about = "Enhanced multimodal fusion for motor-imagery EEG")]
pub struct Cli {
    /// Worker threads (default: all cores). Never changes results.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic motor-imagery dataset.
    Synth(SynthArgs),
    /// Cross-validate one fusion config and write results.json.
    Evaluate(EvaluateArgs),
    /// Accuracy of all 17x17 aggregator pairs; writes grid.csv and grid.json.
    Grid(EvaluateArgs),
    /// Exhaustive band x classifier x aggregator search; writes search.csv and search.json.
    Search(SearchArgs),
    /// Information transfer rate from a results file or direct inputs.
    Itr(ItrArgs),
    /// Ensemble Q-statistic of the base classifiers in a results file.
    Qstat(QstatArgs),
    /// Fit the pipeline on every trial and save a model bundle.
    Train(TrainArgs),
    /// Predict the trials of a dataset with a saved bundle.
    Predict(PredictArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Total trials, split evenly across classes.
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// Classes: 2 (left/right hand) or 4 (adds feet, tongue).
    #[arg(long, default_value_t = 2)]
    pub classes: usize,
    /// Sampling rate in Hz.
    #[arg(long, default_value_t = 100.0)]
    pub fs: f64,
    /// Trial length in seconds.
    #[arg(long, default_value_t = 4.0)]
    pub duration: f64,
    /// Oscillation-to-noise power ratio.
    #[arg(long, default_value_t = 4.0)]
    pub snr: f64,
    /// Contralateral rhythm attenuation in [0, 1].
    #[arg(long, default_value_t = 0.8)]
    pub erd_depth: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output dataset directory.
    #[arg(long)]
    pub out: PathBuf,
}

impl SynthArgs {
    fn spec(&self) -> CliResult<SynthSpec> {
        if self.classes == 0 || !self.trials.is_multiple_of(self.classes) {
            return Err(CliError::Usage(format!(
                "--trials {} is not divisible by --classes {}",
                self.trials, self.classes
            )));
        }
        Ok(SynthSpec {
            trials_per_class: self.trials / self.classes,
            n_classes: self.classes,
            fs: self.fs,
            duration_s: self.duration,
            snr: self.snr,
            erd_depth: self.erd_depth,
            seed: self.seed,
        })
    }
}

/// Where trials come from: a dataset directory or an in-memory synthetic set.
#[derive(Debug, Args)]
pub struct DataArgs {
    /// Dataset directory (or manifest path).
    #[arg(long, conflicts_with = "synth")]
    pub data: Option<PathBuf>,
    /// Use a synthetic dataset generated on the fly.
    #[arg(long)]
    pub synth: bool,
    /// Synthetic trial count.
    #[arg(long, default_value_t = 200, requires = "synth")]
    pub synth_trials: usize,
    /// Synthetic generator seed.
    #[arg(long, default_value_t = 0, requires = "synth")]
    pub synth_seed: u64,
    /// Synthetic oscillation-to-noise ratio.
    #[arg(long, default_value_t = 4.0, requires = "synth")]
    pub synth_snr: f64,
    /// Synthetic ERD depth.
    #[arg(long, default_value_t = 0.8, requires = "synth")]
    pub synth_erd_depth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Path(String),
    Synth(SynthSpec),
}

impl DataArgs {
    fn source(&self) -> CliResult<DataSource> {
        match (&self.data, self.synth) {
            (Some(p), false) => Ok(DataSource::Path(p.display().to_string())),
            (None, true) => {
                if !self.synth_trials.is_multiple_of(2) {
                    return Err(CliError::Usage("--synth-trials must be even".into()));
                }
                Ok(DataSource::Synth(SynthSpec {
                    trials_per_class: self.synth_trials / 2,
                    snr: self.synth_snr,
                    erd_depth: self.synth_erd_depth,
                    seed: self.synth_seed,
                    ..SynthSpec::default()
                }))
            }
            _ => Err(CliError::Usage("exactly one of --data or --synth is required".into())),
        }
    }
}

fn load(source: &DataSource) -> CliResult<TrialSet> {
    Ok(match source {
        DataSource::Path(p) => load_dataset(Path::new(p))?,
        DataSource::Synth(spec) => generate_synthetic(spec)?,
    })
}

fn parse_components(s: &str) -> Result<(BandName, usize), String> {
    let (band, n) = s.split_once('=').ok_or_else(|| format!("expected band=count, got `{s}`"))?;
    let band: BandName = band.parse().map_err(|e: crate::dsp::DspError| e.to_string())?;
    let n: usize = n.parse().map_err(|_| format!("bad component count `{n}`"))?;
    Ok((band, n))
}

/// Pipeline and fusion settings shared by evaluate, grid, search and train.
#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Fusion mode: traditional, mff or emf.
    #[arg(long, default_value = "emf")]
    pub mode: FusionMode,
    /// Wave bands (comma-separated).
    #[arg(long, value_delimiter = ',', default_value = "delta,theta,alpha,beta,smr,all")]
    pub bands: Vec<BandName>,
    /// Classifier types (comma-separated).
    #[arg(long, value_delimiter = ',', default_value = "lda,qda,knn,svm,gp")]
    pub classifiers: Vec<ClassifierId>,
    /// Frequency-phase aggregator.
    #[arg(long, default_value = "choquet")]
    pub freq_agg: AggregatorId,
    /// Classifier-phase aggregator.
    #[arg(long, default_value = "min")]
    pub class_agg: AggregatorId,
    /// F1 of the cf1f2 integral: product, minimum or hamacher.
    #[arg(long, default_value = "product")]
    pub cf1f2_f1: BinaryFusion,
    /// F2 of the cf1f2 integral.
    #[arg(long, default_value = "minimum")]
    pub cf1f2_f2: BinaryFusion,
    /// Moving-window length in samples.
    #[arg(long, default_value_t = 50)]
    pub window: usize,
    /// Window step in samples (window minus overlap).
    #[arg(long, default_value_t = 5)]
    pub step: usize,
    /// Skip differencing of the band-power series.
    #[arg(long)]
    pub no_diff: bool,
    /// CSP components per band, capped at the channel count.
    #[arg(
        long,
        value_delimiter = ',',
        value_parser = parse_components,
        default_value = "delta=3,theta=4,alpha=6,beta=15,smr=3,all=25"
    )]
    pub components: Vec<(BandName, usize)>,
    /// Neighbours of the KNN classifier.
    #[arg(long, default_value_t = 5)]
    pub knn_k: usize,
    /// Training epochs of the SVM.
    #[arg(long, default_value_t = 500)]
    pub svm_epochs: usize,
    /// Folds of stratified cross-validation.
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Repeated hold-out instead of k-fold, as REPS:TRAIN_FRAC (e.g. 20:0.5).
    #[arg(long)]
    pub holdout: Option<String>,
    /// Seed of splits and stochastic fits.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl PipelineArgs {
    fn config(&self) -> CliResult<PipelineConfig> {
        let fusion = FusionConfig {
            mode: self.mode,
            bands: self.bands.clone(),
            classifiers: self.classifiers.clone(),
            freq_agg: self.freq_agg,
            class_agg: self.class_agg,
            cf1f2: Cf1f2Pair {
                f1: self.cf1f2_f1,
                f2: self.cf1f2_f2,
            },
        }
        .validated()?;
        let mut cfg = PipelineConfig {
            dsp: DspConfig {
                window: self.window,
                step: self.step,
            },
            differentiate: !self.no_diff,
            fusion,
            seed: self.seed,
            ..PipelineConfig::default()
        };
        cfg.dsp.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        for &(band, n) in &self.components {
            if n == 0 {
                return Err(CliError::Usage(format!("component count for {band} must be >= 1")));
            }
            cfg.components.insert(band, n);
        }
        cfg.classifiers.knn_k = self.knn_k;
        cfg.classifiers.svm.epochs = self.svm_epochs;
        Ok(cfg)
    }

    fn plan(&self) -> CliResult<SplitPlan> {
        match &self.holdout {
            None => Ok(SplitPlan::kfold(self.folds, self.seed)),
            Some(spec) => {
                let parsed = spec
                    .split_once(':')
                    .and_then(|(r, f)| Some((r.parse::<usize>().ok()?, f.parse::<f64>().ok()?)));
                match parsed {
                    Some((reps, frac)) => Ok(SplitPlan::repeated_holdout(reps, frac, self.seed)),
                    None => Err(CliError::Usage(format!("--holdout expects REPS:TRAIN_FRAC, got `{spec}`"))),
                }
            }
        }
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub eval: EvaluateArgs,
    /// Aggregator pairs: `all` or a list like mean:mean,choquet:min.
    #[arg(long, default_value = "all")]
    pub agg_pairs: String,
    /// Ranked entries to report.
    #[arg(long, default_value_t = 20)]
    pub top: usize,
}

#[derive(Debug, Args)]
pub struct ItrArgs {
    /// results.json written by `evaluate`.
    #[arg(long, conflicts_with_all = ["accuracy", "classes"])]
    pub results: Option<PathBuf>,
    /// Accuracy P in [0, 1] (instead of --results).
    #[arg(long, requires = "classes")]
    pub accuracy: Option<f64>,
    /// Number of classes N (instead of --results).
    #[arg(long, requires = "accuracy")]
    pub classes: Option<usize>,
    /// Observations S (default: the trial count of the results).
    #[arg(long)]
    pub observations: Option<f64>,
    /// Total time T in minutes.
    #[arg(long, conflicts_with = "trial_seconds")]
    pub minutes: Option<f64>,
    /// Seconds per trial; T = S * trial_seconds / 60.
    #[arg(long)]
    pub trial_seconds: Option<f64>,
}

#[derive(Debug, Args)]
pub struct QstatArgs {
    /// results.json written by `evaluate`.
    #[arg(long)]
    pub results: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Bundle file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Bundle written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// Dataset directory to predict.
    #[arg(long)]
    pub data: PathBuf,
    /// Output directory for predictions.csv.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Everything that determines a run's results, embedded in its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub data: DataSource,
    pub pipeline: PipelineConfig,
    pub plan: SplitPlan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsFile {
    pub run: RunConfig,
    pub n_classes: usize,
    pub trials: usize,
    pub result: CvResult,
}

fn write(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("cannot create {}: {e}", dir.display())))?;
        }
    }
    fs::write(path, contents).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn read_results(path: &Path) -> CliResult<ResultsFile> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{} is not a results file: {e}", path.display())))
}

struct Prepared {
    run: RunConfig,
    set: TrialSet,
    features: FeatureSet,
}

fn prepare(args: &EvaluateArgs, bands: &[BandName]) -> CliResult<Prepared> {
    let pipeline = args.pipeline.config()?;
    let plan = args.pipeline.plan()?;
    let data = args.data.source()?;
    let set = load(&data)?;
    let features = FeatureSet::from_trials(&set.trials, &pipeline, bands, set.n_classes())?;
    Ok(Prepared {
        run: RunConfig { data, pipeline, plan },
        set,
        features,
    })
}

fn cmd_synth(args: &SynthArgs) -> CliResult<()> {
    let set = generate_synthetic(&args.spec()?)?;
    save_dataset(&set, &args.out)?;
    println!(
        "wrote {} trials ({} classes, {} channels, {} Hz) to {}",
        set.trials.len(),
        set.n_classes(),
        set.channels.len(),
        set.fs,
        args.out.display()
    );
    Ok(())
}

fn cmd_evaluate(args: &EvaluateArgs) -> CliResult<()> {
    let bands = args.pipeline.bands.clone();
    let p = prepare(args, &bands)?;
    let cache = ScoreCache::build(
        &p.features,
        &p.run.pipeline,
        &p.run.plan,
        &p.run.pipeline.fusion.bands,
        &p.run.pipeline.fusion.classifiers,
    )?;
    let result = cache.evaluate(&p.run.pipeline.fusion)?;
    println!(
        "accuracy: {:.4} ± {:.4} over {} splits ({} fallbacks)",
        result.mean,
        result.std,
        result.accuracies.len(),
        result.fallbacks
    );
    let file = ResultsFile {
        n_classes: p.set.n_classes(),
        trials: p.set.trials.len(),
        run: p.run,
        result,
    };
    let path = args.out.join("results.json");
    write(&path, &to_json(&file))?;
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct GridFile<'a> {
    run: &'a RunConfig,
    grid: &'a crate::eval::GridResult,
}

fn cmd_grid(args: &EvaluateArgs) -> CliResult<()> {
    let bands = args.pipeline.bands.clone();
    let p = prepare(args, &bands)?;
    let fusion = &p.run.pipeline.fusion;
    let cache = ScoreCache::build(&p.features, &p.run.pipeline, &p.run.plan, &fusion.bands, &fusion.classifiers)?;
    let grid = aggregator_grid(&cache, &fusion.bands, &fusion.classifiers, fusion.cf1f2)?;
    let (f, c, acc) = grid.best;
    println!("best pair: {f} / {c} with accuracy {acc:.4}");
    write(&args.out.join("grid.csv"), &grid.to_csv())?;
    write(&args.out.join("grid.json"), &to_json(&GridFile { run: &p.run, grid: &grid }))?;
    println!("wrote {}", args.out.join("grid.csv").display());
    Ok(())
}

fn parse_pairs(s: &str) -> CliResult<AggPairs> {
    if s == "all" {
        return Ok(AggPairs::All);
    }
    s.split(',')
        .map(|p| {
            let (f, c) = p
                .split_once(':')
                .ok_or_else(|| CliError::Usage(format!("aggregator pair `{p}` is not FREQ:CLASS")))?;
            let parse = |t: &str| t.parse::<AggregatorId>().map_err(|e| CliError::Usage(e.to_string()));
            Ok((parse(f)?, parse(c)?))
        })
        .collect::<CliResult<Vec<_>>>()
        .map(AggPairs::List)
}

#[derive(Serialize)]
struct SearchFile<'a> {
    run: &'a RunConfig,
    options: &'a SearchOptions,
    report: &'a crate::eval::SearchReport,
}

fn cmd_search(args: &SearchArgs) -> CliResult<()> {
    let options = SearchOptions {
        bands: args.eval.pipeline.bands.clone(),
        classifiers: args.eval.pipeline.classifiers.clone(),
        agg_pairs: parse_pairs(&args.agg_pairs)?,
        top_n: args.top,
        cf1f2: Cf1f2Pair {
            f1: args.eval.pipeline.cf1f2_f1,
            f2: args.eval.pipeline.cf1f2_f2,
        },
    };
    let p = prepare(&args.eval, &options.bands)?;
    let cache = ScoreCache::build(&p.features, &p.run.pipeline, &p.run.plan, &options.bands, &options.classifiers)?;
    let report = oemf_search(&cache, &options)?;
    println!(
        "searched {} subset pairs x {} aggregator pairs = {} configs",
        report.subset_pairs, report.agg_pairs, report.configs_evaluated
    );
    for e in report.top.iter().take(10) {
        let bands: Vec<&str> = e.bands.iter().map(|b| b.token()).collect();
        let clfs: Vec<&str> = e.classifiers.iter().map(|c| c.token()).collect();
        println!(
            "{:>3}  {:.4}  {:<28} {:<20} {} / {}",
            e.rank,
            e.accuracy,
            bands.join("+"),
            clfs.join("+"),
            e.freq_agg,
            e.class_agg
        );
    }
    let out = &args.eval.out;
    write(&out.join("search.csv"), &report.to_csv())?;
    write(
        &out.join("search.json"),
        &to_json(&SearchFile {
            run: &p.run,
            options: &options,
            report: &report,
        }),
    )?;
    println!("wrote {}", out.join("search.csv").display());
    Ok(())
}

fn cmd_itr(args: &ItrArgs) -> CliResult<()> {
    let (n_classes, accuracy, default_obs) = match (&args.results, args.accuracy, args.classes) {
        (Some(path), _, _) => {
            let r = read_results(path)?;
            (r.n_classes, r.result.mean, Some(r.trials as f64))
        }
        (None, Some(p), Some(n)) => (n, p, None),
        _ => return Err(CliError::Usage("give --results or both --accuracy and --classes".into())),
    };
    let observations = args
        .observations
        .or(default_obs)
        .ok_or_else(|| CliError::Usage("--observations is required without --results".into()))?;
    let minutes = match (args.minutes, args.trial_seconds) {
        (Some(m), _) => m,
        (None, Some(s)) => observations * s / 60.0,
        (None, None) => return Err(CliError::Usage("give --minutes or --trial-seconds".into())),
    };
    let out = itr(&ItrInput {
        n_classes,
        accuracy,
        observations,
        minutes,
    })
    .map_err(|e| CliError::Usage(e.to_string()))?;
    println!("N = {n_classes}, P = {accuracy:.4}, S = {observations}, T = {minutes} min");
    println!("B = {:.6} bits/trial", out.bits_per_trial);
    println!("Q = {:.6} trials/min", out.trials_per_minute);
    println!("ITR = {:.6} bits/min", out.bits_per_minute);
    Ok(())
}

fn cmd_qstat(args: &QstatArgs) -> CliResult<()> {
    let r = read_results(&args.results)?;
    let outputs: Vec<Vec<bool>> = r.result.members.iter().map(|m| m.correct.clone()).collect();
    let q = q_statistic(&outputs).map_err(|e| CliError::Data(e.to_string()))?;
    println!("Q = {q:.6} over {} base classifiers", outputs.len());
    Ok(())
}

fn cmd_train(args: &TrainArgs) -> CliResult<()> {
    let cfg = args.pipeline.config()?;
    let data = args.data.source()?;
    let set = load(&data)?;
    let features = FeatureSet::from_trials(&set.trials, &cfg, &cfg.fusion.bands, set.n_classes())?;
    let all: Vec<usize> = (0..set.trials.len()).collect();
    let model = PipelineModel::fit(&features, &all, &cfg, &cfg.fusion.bands, &cfg.fusion.classifiers)?;
    let bundle = Bundle::new(model, set.fs, set.channels.clone(), set.classes.clone());
    save_bundle(&bundle, &args.out)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_predict(args: &PredictArgs) -> CliResult<()> {
    let set = load_dataset(&args.data)?;
    let bundle = load_bundle_for(&args.model, set.channels.len())?;
    let mut csv = String::from("trial,label,predicted\n");
    let mut correct = 0;
    for (i, t) in set.trials.iter().enumerate() {
        let fused = bundle.model.predict_trial(t)?;
        correct += usize::from(fused.label == t.label);
        csv.push_str(&format!("{i},{},{}\n", set.classes[t.label], bundle.classes[fused.label]));
    }
    println!(
        "accuracy: {:.4} on {} trials",
        correct as f64 / set.trials.len() as f64,
        set.trials.len()
    );
    let path = args.out.join("predictions.csv");
    write(&path, &csv)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn dispatch(command: &Command) -> CliResult<()> {
    match command {
        Command::Synth(a) => cmd_synth(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Grid(a) => cmd_grid(a),
        Command::Search(a) => cmd_search(a),
        Command::Itr(a) => cmd_itr(a),
        Command::Qstat(a) => cmd_qstat(a),
        Command::Train(a) => cmd_train(a),
        Command::Predict(a) => cmd_predict(a),
    }
}

/// Parses `argv` and runs the command, returning the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("usage error: cannot start {} threads: {e}", cli.threads.unwrap_or(0));
            return EXIT_USAGE;
        }
    };
    match pool.install(|| dispatch(&cli.command)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn mff_with_different_aggregators_is_a_usage_error() {
        let cli = Cli::try_parse_from([
            "emf", "evaluate", "--synth", "--mode", "mff", "--freq-agg", "mean", "--class-agg", "min",
        ])
        .unwrap();
        let Command::Evaluate(args) = cli.command else { unreachable!() };
        let err = args.pipeline.config().unwrap_err();
        assert_eq!(err.exit_code(), EXIT_USAGE);
        assert!(err.to_string().contains("mff requires equal aggregators"));
    }

    #[test]
    fn pair_and_component_parsing() {
        assert_eq!(parse_pairs("all").unwrap(), AggPairs::All);
        assert_eq!(
            parse_pairs("mean:mean,choquet:min").unwrap(),
            AggPairs::List(vec![
                (AggregatorId::Mean, AggregatorId::Mean),
                (AggregatorId::Choquet, AggregatorId::Min)
            ])
        );
        assert!(parse_pairs("mean").is_err());
        assert_eq!(parse_components("beta=15").unwrap(), (BandName::Beta, 15));
        assert!(parse_components("gamma=2").is_err());
    }

    #[test]
    fn unknown_flag_exits_1() {
        assert_eq!(run(["emf", "evaluate", "--bogus"]), EXIT_USAGE);
        assert_eq!(run(["emf", "--help"]), EXIT_OK);
    }
}
