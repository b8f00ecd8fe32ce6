use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use flowguard::classifiers::ModelSpec;
use flowguard::dataset::{
    class_summary, load_csv, read_dataset_csv, write_dataset_csv, write_flows_csv, Dataset, Role,
    Schema,
};
use flowguard::evaluate::{cross_validate, CvConfig};
use flowguard::experiment::{
    run_experiment, seed_offset, train_bundle, EvalReport, ExperimentConfig, InputSource, Mode,
    OUT_ENV,
};
use flowguard::features::chi2_scores;
use flowguard::pipeline::{ModelBundle, PipelineSpec};
use flowguard::preprocess::{apply_scaler, fit_scaler, prepare, prepare_with, EncodingMap};
use flowguard::resample::{smote, SmoteConfig};
use flowguard::synth::{generate_table, TrafficProfile};
use flowguard::{Error, Result};

const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(name = "flowguard", version, about = "Botnet flow classification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Master seed; stage seeds are derived from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path. Overrides FLOWGUARD_OUT and the config file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Experiment config (TOML) supplying defaults.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Flow CSV if the header has a categorical column, else dataset CSV.
    Auto,
    /// Raw flow records, encoded with the schema.
    Flows,
    /// Numeric feature columns plus `attack`.
    Dataset,
}

#[derive(Args, Clone)]
struct Input {
    /// Input CSV.
    #[arg(long)]
    input: PathBuf,
    /// Column schema for flow CSVs (defaults to the bundled BoT-IoT schema).
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "auto")]
    format: Format,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// gnb, knn or mlp.
    #[arg(long)]
    model: Option<String>,
    /// Neighbours for knn (odd).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
}

#[derive(Args, Clone)]
struct StageArgs {
    /// Balance the training data with SMOTE.
    #[arg(long)]
    smote: bool,
    #[arg(long)]
    k_neighbors: Option<usize>,
    /// Keep every feature instead of the chi-square selection.
    #[arg(long)]
    no_select: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Clean and encode a flow CSV into a numeric dataset.
    Ingest {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        input: Input,
    },
    /// Per-class mean of every numeric flow field.
    ProfileStats {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        input: Input,
    },
    /// Chi-square scores of every feature, ranked.
    ScoreFeatures {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        input: Input,
        /// Score raw values instead of min-max normalized ones.
        #[arg(long)]
        raw: bool,
    },
    /// Balance a dataset with SMOTE.
    Smote {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        k_neighbors: Option<usize>,
    },
    /// Fit preprocessing and one model on a training CSV; writes a model file.
    Train {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        stages: StageArgs,
    },
    /// Score a test CSV with a saved model; writes a metrics report.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        input: Input,
        /// Model file written by `train`.
        #[arg(long)]
        model_file: PathBuf,
        /// Also write the ROC points here.
        #[arg(long)]
        roc: Option<PathBuf>,
    },
    /// k-fold cross-validation of one model.
    CrossValidate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        stages: StageArgs,
        #[arg(long)]
        folds: Option<usize>,
        /// Plain (unstratified) folds.
        #[arg(long)]
        no_stratify: bool,
    },
    /// Generate synthetic flows from a traffic profile.
    Synth {
        #[command(flatten)]
        common: Common,
        /// Traffic profile (defaults to the bundled one).
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long)]
        rows: Option<usize>,
    },
    /// Full experiment from a config file.
    Run {
        #[command(flatten)]
        common: Common,
        /// Rerun the config recorded in a previous run's manifest.
        #[arg(long, conflicts_with = "config")]
        manifest: Option<PathBuf>,
        /// Transform the whole dataset before splitting.
        #[arg(long)]
        paper_mode: bool,
    },
}

struct Ctx {
    config: ExperimentConfig,
    seed: u64,
    out: Option<PathBuf>,
}

impl Ctx {
    fn new(common: &Common) -> Result<Self> {
        let config = match &common.config {
            Some(p) => {
                require_file(p)?;
                ExperimentConfig::load(p)?
            }
            None => ExperimentConfig::default(),
        };
        let seed = common
            .seed
            .or(common.config.as_ref().map(|_| config.seed))
            .unwrap_or(DEFAULT_SEED);
        let out = common
            .out
            .clone()
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .or_else(|| config.output_dir.clone());
        Ok(Ctx { config, seed, out })
    }

    fn out_or(&self, default: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(default))
    }

    fn stage_seed(&self, offset: u64) -> u64 {
        self.seed.wrapping_add(offset)
    }
}

fn require_file(p: &Path) -> Result<()> {
    if p.is_file() {
        Ok(())
    } else {
        Err(Error::Config(format!("{} does not exist", p.display())))
    }
}

fn load_schema(path: Option<&Path>) -> Result<Schema> {
    match path {
        Some(p) => {
            require_file(p)?;
            Schema::load(p)
        }
        None => Ok(Schema::bundled()),
    }
}

fn is_flow_file(input: &Input, schema: &Schema) -> Result<bool> {
    match input.format {
        Format::Flows => Ok(true),
        Format::Dataset => Ok(false),
        Format::Auto if input.schema.is_some() => Ok(true),
        Format::Auto => {
            let file = fs::File::open(&input.input)
                .map_err(|e| Error::Config(format!("{}: {e}", input.input.display())))?;
            let mut header = String::new();
            BufReader::new(file)
                .read_line(&mut header)
                .map_err(|e| Error::Config(format!("{}: {e}", input.input.display())))?;
            Ok(header
                .trim()
                .split(',')
                .any(|c| schema.role_of(c.trim()) == Role::Categorical))
        }
    }
}

/// Numeric data plus the category codes when the input was a flow CSV.
fn load_input(input: &Input, encoding: Option<&EncodingMap>) -> Result<(Dataset, Option<EncodingMap>)> {
    require_file(&input.input)?;
    let schema = load_schema(input.schema.as_deref())?;
    if is_flow_file(input, &schema)? {
        let table = load_csv(&input.input, &schema)?;
        match encoding {
            Some(enc) => Ok((prepare_with(table, enc)?, Some(enc.clone()))),
            None => {
                let (ds, enc) = prepare(table)?;
                Ok((ds, Some(enc)))
            }
        }
    } else {
        Ok((read_dataset_csv(&input.input)?, None))
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::Io { path: parent.into(), source: e })?;
    }
    fs::write(path, text).map_err(|e| Error::Io { path: path.into(), source: e })
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn model_spec(ctx: &Ctx, args: &ModelArgs) -> Result<ModelSpec> {
    let mut spec = match &args.model {
        Some(name) => ctx
            .config
            .models
            .iter()
            .find(|m| m.name() == name)
            .cloned()
            .map_or_else(|| ModelSpec::from_name(name), Ok)?,
        None => ctx
            .config
            .models
            .first()
            .cloned()
            .ok_or_else(|| Error::Config("no model given (use --model)".into()))?,
    };
    match &mut spec {
        ModelSpec::Gnb => {}
        ModelSpec::Knn { k } => {
            if let Some(v) = args.k {
                *k = v;
            }
        }
        ModelSpec::Mlp(p) => {
            p.hidden = args.hidden.unwrap_or(p.hidden);
            p.epochs = args.epochs.unwrap_or(p.epochs);
            p.learning_rate = args.learning_rate.unwrap_or(p.learning_rate);
            p.batch_size = args.batch_size.unwrap_or(p.batch_size);
        }
    }
    spec.validate()?;
    Ok(spec.with_seed(ctx.stage_seed(seed_offset::MODEL)))
}

fn pipeline_spec(ctx: &Ctx, stages: &StageArgs) -> Result<PipelineSpec> {
    let k_neighbors = stages.k_neighbors.unwrap_or(ctx.config.smote.k_neighbors);
    if k_neighbors == 0 {
        return Err(Error::Config("k-neighbors must be at least 1".into()));
    }
    let use_smote = stages.smote || ctx.config.smote.enabled;
    Ok(PipelineSpec {
        scale: true,
        select_features: !stages.no_select && ctx.config.feature_selection,
        smote: use_smote.then(|| SmoteConfig {
            k_neighbors,
            seed: ctx.stage_seed(seed_offset::SMOTE),
            ..Default::default()
        }),
    })
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Ingest { common, input } => {
            let ctx = Ctx::new(&common)?;
            require_file(&input.input)?;
            let schema = load_schema(input.schema.as_deref())?;
            let table = load_csv(&input.input, &schema)?;
            let summary = class_summary(&table.records)?;
            let (ds, enc) = prepare(table)?;
            let dir = ctx.out_or("ingested");
            write_dataset(&dir.join("dataset.csv"), &ds, None)?;
            write_text(&dir.join("encoding.json"), &to_json(&enc)?)?;
            write_text(&dir.join("class_summary.txt"), &summary.to_table())?;
            let c = ds.class_counts();
            println!("{} rows (normal {}, botnet {}) -> {}", c.total(), c.normal, c.botnet, dir.display());
        }
        Command::ProfileStats { common, input } => {
            let ctx = Ctx::new(&common)?;
            require_file(&input.input)?;
            let schema = load_schema(input.schema.as_deref())?;
            let table = load_csv(&input.input, &schema)?;
            let table = class_summary(&table.records)?.to_table();
            match &ctx.out {
                Some(p) => write_text(p, &table)?,
                None => print!("{table}"),
            }
        }
        Command::ScoreFeatures { common, input, raw } => {
            let ctx = Ctx::new(&common)?;
            let (mut ds, _) = load_input(&input, None)?;
            if !raw {
                ds = apply_scaler(&ds, &fit_scaler(&ds)?)?;
            }
            let report = chi2_scores(&ds)?;
            let out = ctx.out_or("feature_scores.tsv");
            write_text(&out, &report.to_table())?;
            println!("selected: {}", report.selected_names().join(","));
        }
        Command::Smote { common, input, k_neighbors } => {
            let ctx = Ctx::new(&common)?;
            let k = k_neighbors.unwrap_or(ctx.config.smote.k_neighbors);
            if k == 0 {
                return Err(Error::Config("k-neighbors must be at least 1".into()));
            }
            let (ds, _) = load_input(&input, None)?;
            let cfg = SmoteConfig {
                k_neighbors: k,
                seed: ctx.stage_seed(seed_offset::SMOTE),
                ..Default::default()
            };
            let before = ds.class_counts();
            let r = smote(&ds, &cfg)?;
            let after = r.dataset.class_counts();
            let out = ctx.out_or("balanced.csv");
            write_dataset(&out, &r.dataset, Some(r.synthetic_from))?;
            println!(
                "before: normal {} botnet {}; after: normal {} botnet {} ({} synthetic)",
                before.normal,
                before.botnet,
                after.normal,
                after.botnet,
                r.synthetic_count()
            );
        }
        Command::Train { common, input, model, stages } => {
            let ctx = Ctx::new(&common)?;
            let spec = model_spec(&ctx, &model)?;
            let pipeline = pipeline_spec(&ctx, &stages)?;
            let (ds, enc) = load_input(&input, None)?;
            let provenance = vec![
                ("input".to_string(), input.input.display().to_string()),
                ("seed".to_string(), ctx.seed.to_string()),
                ("stages".to_string(), pipeline.stage_names().join(",")),
            ];
            let (bundle, _, train) = train_bundle(&ds, enc, &spec, &pipeline, provenance)?;
            let out = ctx.out_or("model.json");
            if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| Error::Io { path: parent.into(), source: e })?;
            }
            bundle.save(&out)?;
            println!("{} trained on {} rows -> {}", spec.name(), train.n_rows(), out.display());
        }
        Command::Evaluate { common, input, model_file, roc } => {
            let ctx = Ctx::new(&common)?;
            require_file(&model_file)?;
            let bundle = ModelBundle::load(&model_file)?;
            let (ds, _) = load_input(&input, bundle.encoding.as_ref())?;
            let scores = bundle.score(&ds)?;
            let (report, curve) = EvalReport::new(bundle.model.name(), "user-test-file", ds.labels(), &scores)?;
            let out = ctx.out_or("report.json");
            write_text(&out, &to_json(&report)?)?;
            if let (Some(path), Some(curve)) = (roc, curve) {
                write_text(&path, &curve.to_tsv())?;
            }
            for (name, value) in &report.percentages {
                println!("{name}\t{value}");
            }
        }
        Command::CrossValidate { common, input, model, stages, folds, no_stratify } => {
            let ctx = Ctx::new(&common)?;
            let spec = model_spec(&ctx, &model)?;
            let per_fold = pipeline_spec(&ctx, &stages)?;
            let k = folds.unwrap_or(ctx.config.cv_folds);
            if k < 2 {
                return Err(Error::Config("folds must be at least 2".into()));
            }
            let (ds, _) = load_input(&input, None)?;
            let cfg = CvConfig {
                k,
                seed: ctx.stage_seed(seed_offset::CV),
                stratified: !no_stratify && ctx.config.stratified,
                per_fold,
            };
            let result = cross_validate(&ds, &spec, &cfg)?;
            let out = ctx.out_or("cv.json");
            write_text(&out, &to_json(&result)?)?;
            for (name, s) in &result.summary {
                println!("{name}\t{:.4}\t{:.4}", s.mean, s.std);
            }
        }
        Command::Synth { common, profile, rows } => {
            let ctx = Ctx::new(&common)?;
            let (cfg_profile, cfg_rows) = match &ctx.config.input {
                Some(InputSource::Synth { profile, rows }) => (profile.clone(), *rows),
                _ => (None, None),
            };
            let mut p = match profile.or(cfg_profile) {
                Some(path) => {
                    require_file(&path)?;
                    TrafficProfile::load(&path)?
                }
                None => TrafficProfile::bundled(),
            };
            if let Some(n) = rows.or(cfg_rows) {
                p.row_count = n;
            }
            if common.seed.is_some() || common.config.is_some() {
                p.seed = ctx.stage_seed(seed_offset::SYNTH);
            }
            p.validate()?;
            let table = generate_table(&p)?;
            let out = ctx.out_or("synth.csv");
            if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| Error::Io { path: parent.into(), source: e })?;
            }
            write_flows_csv(&out, &table)?;
            let c = table.class_counts();
            println!("{} rows (normal {}, botnet {}) -> {}", c.total(), c.normal, c.botnet, out.display());
        }
        Command::Run { common, manifest, paper_mode } => {
            let mut config = match (&manifest, &common.config) {
                (Some(m), _) => {
                    require_file(m)?;
                    ExperimentConfig::from_manifest(m)?
                }
                (None, Some(c)) => {
                    require_file(c)?;
                    ExperimentConfig::load(c)?
                }
                (None, None) => return Err(Error::Config("run needs --config or --manifest".into())),
            };
            if let Some(seed) = common.seed {
                config.seed = seed;
            }
            if paper_mode {
                config.mode = Mode::Paper;
            }
            let out = common
                .out
                .clone()
                .or_else(|| config.output_dir())
                .unwrap_or_else(|| PathBuf::from("flowguard-run"));
            match run_experiment(&config, &out) {
                Ok(_) => {
                    let summary = fs::read_to_string(out.join("summary.txt"))
                        .map_err(|e| Error::Io { path: out.join("summary.txt"), source: e })?;
                    print!("{summary}");
                    println!("report bundle -> {}", out.display());
                }
                Err(e) => {
                    let mut echo = config.clone();
                    echo.output_dir = Some(out);
                    eprintln!("config: {}", serde_json::to_string(&echo)?);
                    return Err(e);
                }
            }
        }
    }
    Ok(())
}

fn write_dataset(path: &Path, ds: &Dataset, synthetic_from: Option<usize>) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::Io { path: parent.into(), source: e })?;
    }
    write_dataset_csv(path, ds, synthetic_from)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
