use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use trollmap::corpus::InputFormat;
use trollmap::detect::DetectParams;
use trollmap::error::{Error, Result};
use trollmap::features::{self, fit_normalization, write_features_csv};
use trollmap::pipeline::{
    detect_from_artifacts, export_component_planes, extract_stage, format_significance_table,
    load_features, run_pipeline, save_report, FlatConfig, ModelFile, PipelineConfig,
};
use trollmap::som::{train, InitMethod, SomConfig};

#[derive(Parser)]
#[command(name = "trollmap", version, about = "Detect trolls in discussion comment dumps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline: ingest, extract, train, cluster, detect, export.
    Run(RunArgs),
    /// Compute the per-user feature CSV from a comment dump.
    Extract(ExtractArgs),
    /// Train a self-organizing map on a feature CSV and save the model.
    Train(TrainArgs),
    /// Cluster a saved model, flag troll clusters, and write the report.
    Detect(DetectArgs),
    /// Print the feature-significance table for a saved model + features.
    Significance(SignificanceArgs),
    /// Export per-feature component planes (and cluster map) as netpbm images.
    ExportPlanes(ExportPlanesArgs),
}

#[derive(Args, Clone)]
struct SomFlags {
    #[arg(long)]
    seed: Option<u64>,
    /// Grid size as WxH, e.g. 10x10.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(usize, usize)>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr_start: Option<f64>,
    #[arg(long)]
    lr_end: Option<f64>,
    #[arg(long)]
    radius_start: Option<f64>,
    #[arg(long)]
    radius_end: Option<f64>,
    /// Codebook initialization: random or pca.
    #[arg(long)]
    init: Option<InitMethod>,
    #[arg(long)]
    early_stop: bool,
}

impl SomFlags {
    fn apply(&self, config: &mut SomConfig) {
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if let Some((w, h)) = self.grid {
            config.grid_width = w;
            config.grid_height = h;
        }
        if let Some(v) = self.epochs {
            config.max_epochs = v;
        }
        if let Some(v) = self.lr_start {
            config.lr_start = v;
        }
        if let Some(v) = self.lr_end {
            config.lr_end = v;
        }
        if let Some(v) = self.radius_start {
            config.radius_start = v;
        }
        if let Some(v) = self.radius_end {
            config.radius_end = v;
        }
        if let Some(v) = self.init {
            config.init = v;
        }
        if self.early_stop {
            config.early_stop = true;
        }
    }
}

fn parse_grid(s: &str) -> std::result::Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got `{s}`"))?;
    let w = w.parse().map_err(|_| format!("bad grid width `{w}`"))?;
    let h = h.parse().map_err(|_| format!("bad grid height `{h}`"))?;
    Ok((w, h))
}

#[derive(Args)]
struct RunArgs {
    /// Flat JSON config file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    format: Option<InputFormat>,
    /// Output directory for features.csv, model.json, report.json, planes/.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    min_messages: Option<usize>,
    #[arg(long)]
    k_min: Option<usize>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    z_threshold: Option<f64>,
    #[arg(long)]
    max_cluster_fraction: Option<f64>,
    #[arg(long)]
    lenient: bool,
    #[arg(long)]
    fold_homoglyphs: bool,
    #[command(flatten)]
    som: SomFlags,
}

impl RunArgs {
    fn into_config(self) -> Result<PipelineConfig> {
        let mut flat = match &self.config {
            Some(path) => FlatConfig::load(path)?,
            None => FlatConfig::default(),
        };
        if self.input.is_some() {
            flat.input = self.input;
        }
        if self.format.is_some() {
            flat.format = self.format;
        }
        if self.out.is_some() {
            flat.out_dir = self.out;
        }
        if self.min_messages.is_some() {
            flat.min_messages = self.min_messages;
        }
        if self.k_min.is_some() {
            flat.k_min = self.k_min;
        }
        if self.k_max.is_some() {
            flat.k_max = self.k_max;
        }
        if self.z_threshold.is_some() {
            flat.z_threshold = self.z_threshold;
        }
        if self.max_cluster_fraction.is_some() {
            flat.max_cluster_fraction = self.max_cluster_fraction;
        }
        if self.lenient {
            flat.lenient = Some(true);
        }
        if self.fold_homoglyphs {
            flat.fold_homoglyphs = Some(true);
        }
        let mut config = flat.resolve()?;
        self.som.apply(&mut config.som);
        Ok(config)
    }
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "jsonl")]
    format: InputFormat,
    /// Feature CSV output path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    min_messages: usize,
    #[arg(long)]
    lenient: bool,
    #[arg(long)]
    fold_homoglyphs: bool,
}

#[derive(Args)]
struct TrainArgs {
    /// Feature CSV produced by `extract`.
    #[arg(long)]
    features: PathBuf,
    /// Model JSON output path.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    som: SomFlags,
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    features: PathBuf,
    /// Report JSON output path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    k_min: usize,
    #[arg(long, default_value_t = 15)]
    k_max: usize,
    #[arg(long, default_value_t = 2.0)]
    z_threshold: f64,
    #[arg(long, default_value_t = 0.2)]
    max_cluster_fraction: f64,
}

#[derive(Args)]
struct SignificanceArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    features: PathBuf,
    #[arg(long, default_value_t = 2)]
    k_min: usize,
    #[arg(long, default_value_t = 15)]
    k_max: usize,
}

#[derive(Args)]
struct ExportPlanesArgs {
    #[arg(long)]
    model: PathBuf,
    /// Output directory for the netpbm images.
    #[arg(long)]
    out: PathBuf,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let config = args.into_config()?;
            let report = run_pipeline(&config)?;
            let trolls = report.flagged_users();
            println!(
                "{} users in {} clusters; {} flagged as trolls",
                report.users.len(),
                report.meta.k,
                trolls.len()
            );
            for user_id in trolls {
                println!("troll: {user_id}");
            }
            println!("artifacts written to {}", config.out_dir.display());
        }
        Command::Extract(args) => {
            let mut config = PipelineConfig::new(
                args.input,
                args.format,
                PathBuf::new(), // unused by the extract stage
            );
            config.min_messages = args.min_messages;
            config.lenient = args.lenient;
            config.fold_homoglyphs = args.fold_homoglyphs;
            let matrix = extract_stage(&config)?;
            match args.out {
                Some(path) => {
                    let file = File::create(path)?;
                    write_features_csv(&matrix, BufWriter::new(file))?;
                }
                None => {
                    let stdout = std::io::stdout();
                    write_features_csv(&matrix, stdout.lock())?;
                }
            }
        }
        Command::Train(args) => {
            let matrix = load_features(&args.features)?;
            let norm = fit_normalization(&matrix)?;
            let normalized = features::apply_normalization(&matrix, &norm);
            let mut config = SomConfig::default();
            args.som.apply(&mut config);
            let trained = train(&config, &normalized)?;
            let model = ModelFile {
                config,
                normalization: norm,
                grid_width: trained.grid.width,
                grid_height: trained.grid.height,
                dim: trained.grid.dim,
                weights: trained.grid.weights,
                qe_history: trained.qe_history,
                clusters: None,
            };
            model.save(&args.out)?;
            println!(
                "trained {}x{} map in {} epochs, final quantization error {:.6}",
                model.grid_width,
                model.grid_height,
                model.qe_history.len(),
                model.qe_history.last().copied().unwrap_or(0.0)
            );
        }
        Command::Detect(args) => {
            let model = ModelFile::load(&args.model)?;
            let matrix = load_features(&args.features)?;
            let params = DetectParams {
                z_threshold: args.z_threshold,
                max_cluster_fraction: args.max_cluster_fraction,
            };
            let outcome =
                detect_from_artifacts(&model, &matrix, args.k_min, args.k_max, &params)?;
            match args.out {
                Some(path) => {
                    save_report(&outcome.report, &path)?;
                    println!(
                        "{} troll(s) flagged; report written to {}",
                        outcome.report.flagged_users().len(),
                        path.display()
                    );
                }
                None => {
                    let stdout = std::io::stdout();
                    let mut w = stdout.lock();
                    serde_json::to_writer_pretty(&mut w, &outcome.report)
                        .map_err(Error::from)?;
                    w.write_all(b"\n")?;
                }
            }
        }
        Command::Significance(args) => {
            let model = ModelFile::load(&args.model)?;
            let matrix = load_features(&args.features)?;
            let outcome = detect_from_artifacts(
                &model,
                &matrix,
                args.k_min,
                args.k_max,
                &DetectParams::default(),
            )?;
            print!("{}", format_significance_table(&outcome.report));
        }
        Command::ExportPlanes(args) => {
            let model = ModelFile::load(&args.model)?;
            let paths = export_component_planes(&model, &args.out)?;
            println!("wrote {} image(s) to {}", paths.len(), args.out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
