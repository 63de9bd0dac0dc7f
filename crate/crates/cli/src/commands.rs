//! Subcommand implementations. Every file written goes to a path named by
//! a flag or the config file; nothing else touches the filesystem.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::info;
use serde::Serialize;

use phi_sentinel::explain::{background_sample, importance_report, shap_values, ImportanceOptions, DEFAULT_BACKGROUND};
use phi_sentinel::gbt::{load_model, save_model, train_calibrated};
use phi_sentinel::ingest::DEFAULT_K;
use phi_sentinel::pipeline::{
    corpus_evidence, cross_validate, format_summary_table, scan_evidence, write_report, CvOptions,
    DetectorMetrics, FoldResult, LabeledSet, MetricSummary, Report, ReportMeta, ScanOptions, DEFAULT_THRESHOLD,
    PARANOID_THRESHOLD,
};
use phi_sentinel::synthgen::{generate_corpus, write_corpus, CorpusSpec};
use phi_sentinel::{
    builtin_library, load_datasets, Dataset, GbtModel, LoadOptions, MetaFeatureVector, PatternLibrary, TrainParams,
    TOOL_VERSION,
};

use crate::config::{resolve_threads, FileConfig};
use crate::{Cli, Command, EvaluateArgs, ExplainArgs, Failure, GenArgs, ScanArgs, TrainArgs, EXIT_PHI_FOUND};

/// Settings shared by every subcommand after merging flags and config.
struct Context {
    file: FileConfig,
    k: usize,
    seed: u64,
    load: LoadOptions,
    library: PatternLibrary,
}

impl Context {
    fn input(&self, flag: Option<PathBuf>) -> Result<PathBuf, Failure> {
        flag.or_else(|| self.file.input.clone())
            .ok_or_else(|| Failure::usage("--input is required"))
    }

    fn datasets(&self, path: &Path, labels: Option<&Path>) -> Result<Vec<Dataset>, Failure> {
        if !path.exists() {
            return Err(Failure::missing_input(format!("input {} does not exist", path.display())));
        }
        let mut datasets = load_datasets(path, &self.load)?;
        if let Some(labels) = labels {
            if datasets.len() != 1 {
                return Err(Failure::usage("--labels needs a single input file"));
            }
            if !labels.exists() {
                return Err(Failure::missing_input(format!("labels {} do not exist", labels.display())));
            }
            let records = phi_sentinel::ingest::load_labels(labels)?;
            phi_sentinel::ingest::apply_labels(&mut datasets[0], &records);
        }
        Ok(datasets)
    }

    fn model(&self, flag: Option<PathBuf>) -> Result<GbtModel, Failure> {
        let path = flag
            .or_else(|| self.file.model.clone())
            .ok_or_else(|| Failure::usage("--model is required"))?;
        if !path.exists() {
            return Err(Failure::missing_input(format!("model {} does not exist", path.display())));
        }
        Ok(load_model(&path)?)
    }

    fn threshold(&self, flag: Option<f64>, paranoid: bool) -> Result<f64, Failure> {
        let t = if paranoid {
            PARANOID_THRESHOLD
        } else {
            flag.or(self.file.threshold).unwrap_or(DEFAULT_THRESHOLD)
        };
        if !(0.0..=1.0).contains(&t) {
            return Err(Failure::usage(format!("threshold must be in [0, 1], got {t}")));
        }
        Ok(t)
    }

    /// Vectors of every column with data under `path`, for SHAP backgrounds.
    fn vectors(&self, path: &Path) -> Result<Vec<MetaFeatureVector>, Failure> {
        let datasets = self.datasets(path, None)?;
        Ok(corpus_evidence(&datasets, &self.library, self.k, self.seed)
            .into_iter()
            .filter_map(|e| e.vector)
            .collect())
    }

    fn log_run(&self, model: Option<&GbtModel>, threshold: Option<f64>) {
        let hash = model.map_or_else(|| "-".to_string(), GbtModel::hash);
        let threshold = threshold.map_or_else(|| "-".to_string(), |t| t.to_string());
        info!(
            "phi-sentinel {TOOL_VERSION}, library {}, model {hash}, k {}, seed {}, threshold {threshold}",
            self.library.version, self.k, self.seed
        );
    }
}

pub fn run(cli: Cli) -> Result<u8, Failure> {
    let g = cli.global;
    let file = FileConfig::load(g.config.as_deref())?;
    if let Some(n) = resolve_threads(g.threads, file.threads)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure {
                code: crate::EXIT_INTERNAL,
                message: e.to_string(),
            })?;
    }

    let k = g.k.or(file.k).unwrap_or(DEFAULT_K);
    if k == 0 {
        return Err(Failure::usage("--k must be positive"));
    }
    let delimiter = g.delimiter.or(file.delimiter).unwrap_or(',');
    if !delimiter.is_ascii() {
        return Err(Failure::usage("--delimiter must be a single ASCII character"));
    }
    let library = match g.library.or_else(|| file.library.clone()) {
        Some(path) if !path.exists() => {
            return Err(Failure::missing_input(format!("library {} does not exist", path.display())))
        }
        Some(path) => PatternLibrary::load(&path)?,
        None => builtin_library(),
    };
    let ctx = Context {
        k,
        seed: g.seed.or(file.seed).unwrap_or(42),
        load: LoadOptions {
            delimiter: delimiter as u8,
            has_header: !(g.no_header || file.no_header.unwrap_or(false)),
            ..LoadOptions::default()
        },
        library,
        file,
    };

    match cli.command {
        Command::Scan(a) => scan_cmd(&ctx, a),
        Command::Train(a) => train_cmd(&ctx, a),
        Command::Evaluate(a) => evaluate_cmd(&ctx, a),
        Command::Explain(a) => explain_cmd(&ctx, a),
        Command::Gen(a) => gen_cmd(&ctx, a),
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure {
            code: crate::EXIT_INTERNAL,
            message: format!("writing {}: {e}", p.display()),
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure {
                    code: crate::EXIT_INTERNAL,
                    message: format!("writing stdout: {e}"),
                })
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value).map_err(phi_sentinel::Error::from)?;
    s.push('\n');
    Ok(s)
}

fn scan_cmd(ctx: &Context, a: ScanArgs) -> Result<u8, Failure> {
    let input = ctx.input(a.input)?;
    let model = ctx.model(a.model)?;
    let threshold = ctx.threshold(a.threshold, a.paranoid)?;
    ctx.log_run(Some(&model), Some(threshold));

    let datasets = ctx.datasets(&input, None)?;
    let evidence = corpus_evidence(&datasets, &ctx.library, ctx.k, ctx.seed);
    let background = if a.top == 0 {
        Vec::new()
    } else {
        let rows = match a.background.or_else(|| ctx.file.background.clone()) {
            Some(path) => ctx.vectors(&path)?,
            None => evidence.iter().filter_map(|e| e.vector.clone()).collect(),
        };
        background_sample(&rows, DEFAULT_BACKGROUND, ctx.seed)
    };
    let opts = ScanOptions {
        k: ctx.k,
        seed: ctx.seed,
        threshold,
        top_attributions: a.top,
    };
    let report = Report {
        meta: ReportMeta {
            tool_version: TOOL_VERSION.to_string(),
            library_version: ctx.library.version.clone(),
            model_hash: model.hash(),
            k: ctx.k,
            seed: ctx.seed,
            threshold,
        },
        columns: scan_evidence(&evidence, &model, &opts, &background),
        metrics: None,
    };
    let flagged = report.flagged().count();
    info!("{} columns scanned, {flagged} flagged", report.columns.len());
    match a.output.or_else(|| ctx.file.output.clone()) {
        Some(path) => write_report(&report, &path)?,
        None => write_or_print(None, &to_json(&report)?)?,
    }
    let fail_on_phi = a.fail_on_phi || ctx.file.fail_on_phi.unwrap_or(false);
    Ok(if fail_on_phi && flagged > 0 { EXIT_PHI_FOUND } else { 0 })
}

fn labeled_set(ctx: &Context, input: &Path, labels: Option<&Path>) -> Result<LabeledSet, Failure> {
    let datasets = ctx.datasets(input, labels)?;
    let set = LabeledSet::from_evidence(&corpus_evidence(&datasets, &ctx.library, ctx.k, ctx.seed))?;
    info!(
        "{} labeled columns, {} positive",
        set.len(),
        set.labels.iter().filter(|&&l| l == 1).count()
    );
    Ok(set)
}

fn train_cmd(ctx: &Context, a: TrainArgs) -> Result<u8, Failure> {
    let input = ctx.input(a.input)?;
    let output = a
        .output
        .or_else(|| ctx.file.output.clone())
        .ok_or_else(|| Failure::usage("--output is required"))?;
    let labels = a.labels.or_else(|| ctx.file.labels.clone());
    let set = labeled_set(ctx, &input, labels.as_deref())?;
    let params = TrainParams {
        seed: ctx.seed,
        ..TrainParams::default()
    };
    let (model, report) = train_calibrated(&set.vectors, &set.labels, &params)?;
    ctx.log_run(Some(&model), None);
    save_model(&model, &output)?;

    let mut log = String::from("round,loss\n");
    for (round, loss) in report.losses.iter().enumerate() {
        log.push_str(&format!("{round},{loss}\n"));
    }
    write_or_print(a.log.as_deref(), &log)?;
    Ok(0)
}

#[derive(Serialize)]
struct EvaluateOutput<'a> {
    tool_version: &'a str,
    library_version: &'a str,
    k: usize,
    seed: u64,
    threshold: f64,
    folds: usize,
    summary: &'a DetectorMetrics<MetricSummary>,
    per_fold: Vec<FoldMetrics<'a>>,
}

#[derive(Serialize)]
struct FoldMetrics<'a> {
    fold: usize,
    size: usize,
    metrics: &'a DetectorMetrics<phi_sentinel::MetricSet>,
}

impl<'a> From<&'a FoldResult> for FoldMetrics<'a> {
    fn from(f: &'a FoldResult) -> Self {
        FoldMetrics {
            fold: f.fold,
            size: f.test_indices.len(),
            metrics: &f.metrics,
        }
    }
}

fn evaluate_cmd(ctx: &Context, a: EvaluateArgs) -> Result<u8, Failure> {
    let input = ctx.input(a.input)?;
    let threshold = ctx.threshold(a.threshold, a.paranoid)?;
    let folds = a.folds.or(ctx.file.folds).unwrap_or(5);
    if folds < 2 {
        return Err(Failure::usage("--folds must be at least 2"));
    }
    ctx.log_run(None, Some(threshold));
    let labels = a.labels.or_else(|| ctx.file.labels.clone());
    let set = labeled_set(ctx, &input, labels.as_deref())?;
    let cv = cross_validate(
        &set.vectors,
        &set.labels,
        &set.regex_probs,
        &CvOptions {
            folds,
            seed: ctx.seed,
            threshold,
            params: TrainParams {
                seed: ctx.seed,
                ..TrainParams::default()
            },
        },
    )?;
    let out = EvaluateOutput {
        tool_version: TOOL_VERSION,
        library_version: &ctx.library.version,
        k: ctx.k,
        seed: ctx.seed,
        threshold,
        folds,
        summary: &cv.summary,
        per_fold: cv.folds.iter().map(FoldMetrics::from).collect(),
    };
    let json = to_json(&out)?;
    let table = format_summary_table(&cv.summary);
    match a.output.or_else(|| ctx.file.output.clone()) {
        Some(path) => {
            write_or_print(Some(&path), &json)?;
            write_or_print(None, &table)?;
        }
        None => write_or_print(None, &format!("{table}\n{json}"))?,
    }
    Ok(0)
}

#[derive(Serialize)]
struct ColumnExplanation {
    column: String,
    phi0: f64,
    margin: f64,
    contributions: Vec<Contribution>,
}

#[derive(Serialize)]
struct Contribution {
    slot: usize,
    name: String,
    value: f64,
}

fn explain_cmd(ctx: &Context, a: ExplainArgs) -> Result<u8, Failure> {
    let input = ctx.input(a.input)?;
    let model = ctx.model(a.model)?;
    ctx.log_run(Some(&model), None);

    let datasets = ctx.datasets(&input, None)?;
    let all_rows: Vec<MetaFeatureVector> = corpus_evidence(&datasets, &ctx.library, ctx.k, ctx.seed)
        .into_iter()
        .filter_map(|e| e.vector)
        .collect();
    let background_rows = match a.background.or_else(|| ctx.file.background.clone()) {
        Some(path) => ctx.vectors(&path)?,
        None => all_rows.clone(),
    };
    if background_rows.is_empty() {
        return Err(phi_sentinel::Error::EmptyBackground.into());
    }
    let background = background_sample(&background_rows, DEFAULT_BACKGROUND, ctx.seed);
    let mut rows = all_rows.clone();
    if let Some(name) = &a.column {
        rows.retain(|v| &v.column_name == name);
        if rows.is_empty() {
            return Err(Failure::usage(format!("no column `{name}` with data in the input")));
        }
    }

    let explanations = rows
        .iter()
        .map(|v| {
            let attr = shap_values(&model, v, &background)?;
            let mut contributions: Vec<Contribution> = attr
                .ranked()
                .into_iter()
                .map(|(slot, value)| Contribution {
                    slot,
                    name: model.slot_names[slot].clone(),
                    value,
                })
                .collect();
            contributions.truncate(a.top_k);
            Ok(ColumnExplanation {
                column: attr.column_name.clone(),
                phi0: attr.phi0,
                margin: attr.total(),
                contributions,
            })
        })
        .collect::<phi_sentinel::Result<Vec<_>>>()?;
    let output = a.output.or_else(|| ctx.file.output.clone());
    write_or_print(output.as_deref(), &to_json(&explanations)?)?;

    // Importance always covers every column of the input.
    let report = importance_report(
        &model,
        &all_rows,
        &[],
        &ImportanceOptions {
            background: DEFAULT_BACKGROUND,
            seed: ctx.seed,
            top_k: a.top_k,
        },
    )?;
    if let Some(csv) = &a.csv {
        write_or_print(Some(csv), &report.to_csv())?;
    }
    // Keep stdout parseable when it already carries the JSON.
    if output.is_some() {
        write_or_print(None, &report.to_text())?;
    } else {
        eprint!("{}", report.to_text());
    }
    Ok(0)
}

fn gen_cmd(ctx: &Context, a: GenArgs) -> Result<u8, Failure> {
    let output = a
        .output
        .or_else(|| ctx.file.output.clone())
        .ok_or_else(|| Failure::usage("--output is required"))?;
    let spec = CorpusSpec {
        n_datasets: a.datasets,
        total_columns: a.columns,
        rows: a.rows,
        phi_fraction: a.phi_fraction,
        seed: ctx.seed,
        held_out_formats: !a.no_held_out,
        ..CorpusSpec::default()
    };
    spec.validate().map_err(|e| Failure::usage(e.to_string()))?;
    let corpus = generate_corpus(&spec)?;
    write_corpus(&corpus, &output)?;
    info!(
        "wrote {} datasets, {} columns ({} PHI) to {}",
        corpus.datasets.len(),
        corpus.column_count(),
        corpus.phi_count(),
        output.display()
    );
    Ok(0)
}
