use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use diffmap::evaluation::threshold_for_count;
use diffmap::io::{
    embed_features, evaluate_vectors, export_choropleth, generate_synthetic, load_code_list,
    load_deprivation, load_features, load_hierarchy, run_pipeline, write_area_table, write_atomic,
    write_json, BoundaryFile, PipelineConfig, PipelineInputs, SyntheticKind,
};
use diffmap::{aggregate_features, classify_deprived, select_eigenvector, AreaVector, Domain, Error, Result};

#[derive(Parser)]
#[command(name = "diffmap", version, about = "Diffusion maps of census area tables")]
struct Cli {
    /// TOML configuration; flags given on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Repeat for more log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Overrides {
    #[arg(long, global = true)]
    k_neighbors: Option<usize>,
    #[arg(long, global = true)]
    n_eigenvectors: Option<usize>,
    #[arg(long, global = true)]
    zero_tolerance_rel: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    classification_threshold: Option<f64>,
    #[arg(long, global = true)]
    classify_eigenvector: Option<usize>,
    /// `domain=weight`, repeatable; unspecified domains keep their weight.
    #[arg(long = "domain-weight", global = true, value_parser = parse_weight)]
    domain_weights: Vec<(Domain, f64)>,
    /// Comma-separated domain names.
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_domain)]
    strong_domains: Option<Vec<Domain>>,
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_domain)]
    weak_domains: Option<Vec<Domain>>,
    #[arg(long, global = true)]
    diagnostic_percentile: Option<f64>,
    #[arg(long, global = true)]
    rank_universe: Option<u32>,
    #[arg(long, global = true)]
    deprived_rank_cutoff: Option<u32>,
    #[arg(long, global = true)]
    clamp_coincident: bool,
    #[arg(long, global = true)]
    dense_solver_cutoff: Option<usize>,
    #[arg(long, global = true)]
    id_column: Option<String>,
    #[arg(long, global = true)]
    code_property: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic feature table with known manifold parameter.
    Synth {
        #[arg(long, default_value = "line1d")]
        kind: String,
        #[arg(long, default_value_t = 300)]
        size: usize,
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the ground-truth parameter per area.
        #[arg(long)]
        parameter_out: Option<PathBuf>,
    },
    /// Embed a raw feature table and write its nonzero eigenvectors.
    Embed {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Average every column of an area table onto LSOAs.
    Aggregate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        hierarchy: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score an LSOA-level embedding against a deprivation table.
    Evaluate {
        #[arg(long)]
        embedding: PathBuf,
        #[arg(long)]
        deprivation: PathBuf,
        #[arg(long)]
        ground_truth: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// List areas whose eigenvector component reaches the threshold.
    Classify {
        #[arg(long)]
        embedding: PathBuf,
        /// Column to classify on; defaults to `ev<classify_eigenvector>`.
        #[arg(long)]
        column: Option<String>,
        /// Pick the threshold that selects this many areas instead.
        #[arg(long)]
        target_count: Option<usize>,
        /// Negate the column first.
        #[arg(long)]
        flip: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Attach one column of an area table to boundary polygons.
    Choropleth {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        column: String,
        #[arg(long)]
        boundaries: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Full pipeline: both map variants, evaluation and exports.
    Run {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        hierarchy: Option<PathBuf>,
        #[arg(long)]
        deprivation: Option<PathBuf>,
        #[arg(long)]
        boundaries: Option<PathBuf>,
        #[arg(long)]
        ground_truth: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn parse_domain(s: &str) -> std::result::Result<Domain, String> {
    Domain::parse(s).ok_or_else(|| format!("unknown domain `{s}`"))
}

fn parse_weight(s: &str) -> std::result::Result<(Domain, f64), String> {
    let (d, w) = s.split_once('=').ok_or("expected domain=weight")?;
    let w: f64 = w.trim().parse().map_err(|_| format!("bad weight `{w}`"))?;
    Ok((parse_domain(d)?, w))
}

fn build_config(path: Option<&Path>, o: Overrides) -> Result<PipelineConfig> {
    let mut c = match path {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    macro_rules! take {
        ($($field:ident),*) => {
            $(if let Some(v) = o.$field { c.$field = v; })*
        };
    }
    take!(
        k_neighbors,
        n_eigenvectors,
        zero_tolerance_rel,
        classification_threshold,
        classify_eigenvector,
        strong_domains,
        weak_domains,
        diagnostic_percentile,
        dense_solver_cutoff,
        id_column,
        code_property
    );
    if o.rank_universe.is_some() {
        c.rank_universe = o.rank_universe;
    }
    if o.deprived_rank_cutoff.is_some() {
        c.deprived_rank_cutoff = o.deprived_rank_cutoff;
    }
    c.clamp_coincident |= o.clamp_coincident;
    for (d, w) in o.domain_weights {
        c.domain_weights.insert(d, w);
    }
    c.validate()?;
    Ok(c)
}

fn load_column(path: &Path, column: &str) -> Result<AreaVector> {
    let table = load_features(path, "area_code")?;
    let j = table
        .column_names()
        .iter()
        .position(|c| c == column)
        .ok_or_else(|| Error::Shape(format!("{}: no column `{column}`", path.display())))?;
    AreaVector::new(table.area_ids().to_vec(), table.column(j))
}

fn load_vectors(path: &Path) -> Result<Vec<AreaVector>> {
    let table = load_features(path, "area_code")?;
    (0..table.n_cols())
        .map(|j| AreaVector::new(table.area_ids().to_vec(), table.column(j)))
        .collect()
}

fn execute(cli: Cli) -> Result<()> {
    let config = build_config(cli.config.as_deref(), cli.overrides)?;
    match cli.command {
        Command::Synth {
            kind,
            size,
            noise,
            seed,
            out,
            parameter_out,
        } => {
            let kind: SyntheticKind = kind.parse()?;
            let data = generate_synthetic(kind, size, noise, seed)?;
            let f = &data.features;
            let columns: Vec<Vec<f64>> = (0..f.n_cols()).map(|j| f.column(j)).collect();
            write_area_table(&out, f.area_ids(), f.column_names(), &columns)?;
            if let Some(p) = parameter_out {
                write_area_table(p, f.area_ids(), &["parameter".to_string()], &[data.parameter])?;
            }
        }
        Command::Embed { features, out } => {
            let raw = load_features(&features, &config.id_column)?;
            let embedding = embed_features(&raw, &config)?;
            let columns = (1..=embedding.n_nonzero())
                .map(|i| select_eigenvector(&embedding, i).map(|v| v.values))
                .collect::<Result<Vec<_>>>()?;
            let names: Vec<String> = (1..=columns.len()).map(|i| format!("ev{i}")).collect();
            write_area_table(&out, embedding.area_ids(), &names, &columns)?;
            info!("eigenvalues {:?}", embedding.nonzero_eigenvalues());
        }
        Command::Aggregate { input, hierarchy, out } => {
            let table = load_features(&input, "area_code")?;
            let hierarchy = load_hierarchy(&hierarchy)?;
            let lsoa = aggregate_features(&table, &hierarchy)?;
            let columns: Vec<Vec<f64>> = (0..lsoa.n_cols()).map(|j| lsoa.column(j)).collect();
            write_area_table(&out, lsoa.area_ids(), lsoa.column_names(), &columns)?;
        }
        Command::Evaluate {
            embedding,
            deprivation,
            ground_truth,
            out,
        } => {
            let vectors = load_vectors(&embedding)?;
            let table = load_deprivation(&deprivation)?;
            let truth = ground_truth.map(load_code_list).transpose()?;
            let report = evaluate_vectors(&vectors, &table, truth.as_ref(), &config)?;
            write_json(&out, &report)?;
        }
        Command::Classify {
            embedding,
            column,
            target_count,
            flip,
            out,
        } => {
            let column = column.unwrap_or_else(|| format!("ev{}", config.classify_eigenvector));
            let mut v = load_column(&embedding, &column)?;
            if flip {
                v = v.negated();
            }
            let threshold = match target_count {
                Some(n) => threshold_for_count(&v, n)?,
                None => config.classification_threshold,
            };
            let codes = classify_deprived(&v, threshold);
            info!("threshold {threshold}: {} area(s) selected", codes.len());
            let mut text = String::from("area_code\n");
            for c in &codes {
                text.push_str(c);
                text.push('\n');
            }
            match out {
                Some(p) => write_atomic(&p, |w| w.write_all(text.as_bytes()))?,
                None => std::io::stdout()
                    .write_all(text.as_bytes())
                    .map_err(|e| Error::Io {
                        path: "<stdout>".into(),
                        source: e,
                    })?,
            }
        }
        Command::Choropleth {
            input,
            column,
            boundaries,
            out,
        } => {
            let v = load_column(&input, &column)?;
            let boundaries = BoundaryFile::load(&boundaries, &config.code_property)?;
            let summary = export_choropleth(&v, &boundaries, &out)?;
            info!("{} feature(s) written, {} skipped", summary.written, summary.skipped.len());
        }
        Command::Run {
            features,
            hierarchy,
            deprivation,
            boundaries,
            ground_truth,
            out_dir,
        } => {
            let inputs = PipelineInputs::load(
                &config,
                &features,
                hierarchy.as_deref(),
                deprivation.as_deref(),
                boundaries.as_deref(),
                ground_truth.as_deref(),
            )?;
            if inputs.deprivation.is_none() {
                warn!("no deprivation table given; running in embedding-only mode");
            }
            let report = run_pipeline(&config, &inputs, &out_dir)?;
            for map in &report.lsoa_maps {
                let Some(eval) = &map.evaluation else { continue };
                let ev = format!("ev{}", config.classify_eigenvector);
                let r = eval.correlations.get(&ev, "IMD").unwrap_or(f64::NAN);
                match eval.confusion {
                    Some(c) => println!(
                        "{}: r({ev}, IMD) = {r:.4}; TP {} FN {} FP {} TN {}",
                        map.name, c.true_positive, c.false_negative, c.false_positive, c.true_negative
                    ),
                    None => println!("{}: r({ev}, IMD) = {r:.4}", map.name),
                }
            }
            println!("wrote {} file(s) to {}", report.files.len(), out_dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
