use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use faceact_core::corpus::{
    dedupe_folds, label_histogram, parse_corpus, write_jsonl, Corpus, FoldRemoval, FormatSpec, ParseOptions,
};
use faceact_core::error_analysis::{
    read_sheet, render_shift, render_tally, sample_errors as draw_errors, shift_analysis, tally_errors as tally,
    write_sheet, SamplingPlan, ShiftInput,
};
use faceact_core::example::{
    build_examples, mix_multitask, mix_summary, read_examples, write_examples, Example, ExampleVariant, MixPlan,
    MixSummary, Task,
};
use faceact_core::metrics::{face_act_confusion, render_matrix, render_report, row_normalize, ConfusionMatrix};
use faceact_core::predictor::{
    label_frequencies, read_records, repair_prediction, run_external, train_baseline as fit_baseline, write_records,
    BaselineModel, PredictRequest, PredictionRecord, RawPrediction, DEFAULT_ALPHA,
};
use faceact_core::scoring::{align, evaluate_folds, AlignedPrediction, Evaluation};
use faceact_core::stats::{
    da_fa_matrix, exact_p_value, friedman, pearson, BlockMatrix, CorrelationCell, FriedmanResult, DA_FA_STATISTIC,
};
use faceact_core::tagset::{TagSet, MRDA_BASIC};
use faceact_core::FaceActLabel;
use serde::{Deserialize, Serialize};

use crate::config::PredictorChoice;
use crate::failure::Failure;
use crate::output::{create, emit, open, read_json};
use crate::{
    CompareArgs, ConfusionArgs, Context, CorrelateArgs, EvaluateArgs, ImportArgs, Level, Metric, PredictArgs,
    PrepareArgs, SampleErrorsArgs, ShiftArgs, TallyErrorsArgs, TrainArgs,
};

type Outcome = Result<(), Failure>;

fn configured_tagset(ctx: &Context) -> Result<Option<TagSet>, Failure> {
    Ok(match ctx.config.tagset.as_deref() {
        None => None,
        Some(MRDA_BASIC) => Some(TagSet::mrda_basic()),
        Some(path) => Some(TagSet::load(Path::new(path))?),
    })
}

fn load_corpus(ctx: &Context, path: &Path) -> Result<Corpus, Failure> {
    let options = ParseOptions {
        tagset: configured_tagset(ctx)?,
        ..ParseOptions::default()
    };
    parse_corpus(open(path)?, &FormatSpec::Jsonl, &options).map_err(|e| {
        let mut failure = Failure::from(e);
        failure.message = format!("{}: {}", path.display(), failure.message);
        failure
    })
}

/// The gold corpus from the flag or the config, deduplicated across folds.
fn gold_corpus(ctx: &mut Context, flag: Option<PathBuf>) -> Result<Corpus, Failure> {
    if let Some(path) = flag {
        ctx.config.corpus = Some(path);
    }
    let path = ctx
        .config
        .corpus
        .clone()
        .ok_or_else(|| Failure::invalid("no corpus given: pass --gold/--corpus or set corpus in the config"))?;
    Ok(dedupe_folds(&load_corpus(ctx, &path)?).0)
}

fn load_records(path: &Path) -> Result<Vec<PredictionRecord>, Failure> {
    Ok(read_records(open(path)?)?)
}

fn aligned(corpus: &Corpus, pred: &Path) -> Result<(Vec<PredictionRecord>, Vec<AlignedPrediction>, usize), Failure> {
    let records = load_records(pred)?;
    let alignment = align(corpus, &records)?;
    Ok((records, alignment.items, alignment.unpredicted))
}

/// Runs `f` over `items` on up to `jobs` threads, keeping input order.
fn par_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    if jobs <= 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    let chunk = items.len().div_ceil(jobs);
    let f = &f;
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(f).collect::<Vec<R>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker thread panicked"))
            .collect()
    })
}

fn fold_key(fold: Option<usize>) -> String {
    fold.map_or_else(|| "none".to_string(), |f| f.to_string())
}

#[derive(Serialize)]
struct ImportSummary {
    conversations: usize,
    conversation_records: usize,
    utterances: usize,
    labeled: usize,
    histogram: BTreeMap<FaceActLabel, usize>,
    folds: Vec<usize>,
    duplicates: Vec<FoldRemoval>,
    deduplicated_output: bool,
}

pub fn import(ctx: &mut Context, args: ImportArgs) -> Outcome {
    let format = match &args.format_spec {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
            FormatSpec::delimited_from_json(&text)?
        }
        None => FormatSpec::Jsonl,
    };
    let mut options = ParseOptions {
        tagset: configured_tagset(ctx)?,
        ..ParseOptions::default()
    };
    for mapping in &args.roles {
        let (name, role) = mapping
            .split_once('=')
            .ok_or_else(|| Failure::invalid(format!("--role {mapping:?} is not NAME=ROLE")))?;
        options.role_map.insert(name.to_string(), role.parse()?);
    }
    let corpus = parse_corpus(open(&args.input)?, &format, &options)?;
    let (deduped, dedup) = dedupe_folds(&corpus);
    let mut out = create(&args.output)?;
    write_jsonl(if args.dedupe { &deduped } else { &corpus }, &mut out)?;
    out.flush()?;
    let summary = ImportSummary {
        conversations: deduped.conversations.len(),
        conversation_records: corpus.conversations.len(),
        utterances: deduped.num_utterances(),
        labeled: deduped.num_labeled(),
        histogram: label_histogram(&deduped),
        folds: deduped.folds(),
        duplicates: dedup.removals,
        deduplicated_output: args.dedupe,
    };
    emit(ctx, "import", &args.out, &summary, || {
        let mut text = format!(
            "conversations: {}\nutterances: {}\nlabeled: {}\n",
            summary.conversations, summary.utterances, summary.labeled
        );
        for (label, count) in &summary.histogram {
            let _ = writeln!(text, "{:<6} {count}", label.as_str());
        }
        text
    })
}

#[derive(Serialize)]
struct PrepareSummary {
    variant: ExampleVariant,
    examples: usize,
    examples_per_fold: BTreeMap<String, usize>,
    mix: Option<MixSummary>,
    duplicates_removed: usize,
}

fn parse_variant(name: &str) -> Result<ExampleVariant, Failure> {
    match name.to_ascii_lowercase().as_str() {
        "mtl" => Ok(ExampleVariant::MtlFa),
        _ => match name.parse()? {
            ExampleVariant::MtlDa => Err(Failure::invalid(
                "dialog-act examples are only produced by mixing; use variant mtl",
            )),
            v => Ok(v),
        },
    }
}

pub fn prepare(ctx: &mut Context, args: PrepareArgs) -> Outcome {
    if let Some(path) = args.corpus {
        ctx.config.corpus = Some(path);
    }
    if let Some(path) = args.da_corpus {
        ctx.config.da_corpus = Some(path);
    }
    if let Some(v) = args.variant {
        ctx.config.variant = v;
    }
    if let Some(c) = args.context_size {
        ctx.config.context_size = c;
    }
    if let Some(f) = args.sample_fraction {
        ctx.config.sample_fraction = f;
    }
    ctx.config.validate()?;
    let variant = parse_variant(&ctx.config.variant)?;
    let path = ctx
        .config
        .corpus
        .clone()
        .ok_or_else(|| Failure::invalid("no corpus given: pass --corpus or set corpus in the config"))?;
    let (corpus, dedup) = dedupe_folds(&load_corpus(ctx, &path)?);
    let mut examples = build_examples(&corpus, variant, ctx.config.context_size)?;
    let mut mix = None;
    if variant == ExampleVariant::MtlFa {
        let da_path = ctx
            .config
            .da_corpus
            .clone()
            .ok_or_else(|| Failure::invalid("variant mtl needs a dialog-act corpus (--da-corpus)"))?;
        let da = load_corpus(ctx, &da_path)?;
        let plan = MixPlan {
            sample_fraction: ctx.config.sample_fraction,
            seed: ctx.config.seed,
            context_size: ctx.config.context_size,
        };
        examples = mix_multitask(&examples, &da, &plan)?;
        mix = Some(mix_summary(&examples));
    }
    let mut out = create(&args.output)?;
    write_examples(&examples, &mut out)?;
    out.flush()?;
    let mut per_fold = BTreeMap::new();
    for e in &examples {
        *per_fold.entry(fold_key(e.fold)).or_insert(0) += 1;
    }
    let summary = PrepareSummary {
        variant,
        examples: examples.len(),
        examples_per_fold: per_fold,
        mix,
        duplicates_removed: dedup.removals.len(),
    };
    emit(ctx, "prepare", &args.out, &summary, || {
        format!("{} {} examples\n", summary.examples, summary.variant)
    })
}

/// Folds held out in turn. Without fold assignments there is one model
/// trained and tested on everything.
fn test_folds(examples: &[Example]) -> Vec<Option<usize>> {
    let folds: BTreeSet<usize> = examples
        .iter()
        .filter(|e| e.variant.task() == Task::FaceActs)
        .filter_map(|e| e.fold)
        .collect();
    if folds.is_empty() {
        vec![None]
    } else {
        folds.into_iter().map(Some).collect()
    }
}

fn training_set(examples: &[Example], held_out: Option<usize>) -> impl Iterator<Item = &Example> {
    examples
        .iter()
        .filter(move |e| held_out.is_none() || e.fold != held_out)
}

#[derive(Debug, Serialize, Deserialize)]
struct FoldModel {
    fold: Option<usize>,
    train_examples: usize,
    model: BaselineModel,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelBundle {
    alpha: f64,
    folds: Vec<FoldModel>,
}

#[derive(Serialize)]
struct TrainedFold {
    fold: Option<usize>,
    train_examples: usize,
    vocabulary: usize,
    labels: usize,
}

pub fn train_baseline(ctx: &mut Context, args: TrainArgs) -> Outcome {
    if let Some(alpha) = args.alpha {
        ctx.config.predictor = PredictorChoice::Baseline { alpha };
    }
    ctx.config.validate()?;
    let alpha = match ctx.config.predictor {
        PredictorChoice::Baseline { alpha } => alpha,
        _ => DEFAULT_ALPHA,
    };
    let examples = read_examples(open(&args.examples)?)?;
    let folds = test_folds(&examples);
    let trained = par_map(&folds, ctx.config.jobs, |&fold| {
        let train: Vec<Example> = training_set(&examples, fold).cloned().collect();
        fit_baseline(&train, alpha).map(|model| FoldModel {
            fold,
            train_examples: train.len(),
            model,
        })
    });
    let bundle = ModelBundle {
        alpha,
        folds: trained.into_iter().collect::<Result<_, _>>()?,
    };
    let mut out = create(&args.output)?;
    serde_json::to_writer(&mut out, &bundle).map_err(|e| Failure::io(e.to_string()))?;
    out.write_all(b"\n")?;
    out.flush()?;
    let summary: Vec<TrainedFold> = bundle
        .folds
        .iter()
        .map(|f| TrainedFold {
            fold: f.fold,
            train_examples: f.train_examples,
            vocabulary: f.model.vocabulary_len(),
            labels: f.model.labels().len(),
        })
        .collect();
    emit(ctx, "train-baseline", &args.out, &summary, || {
        summary
            .iter()
            .map(|f| format!("fold {}: {} examples, {} types\n", fold_key(f.fold), f.train_examples, f.vocabulary))
            .collect()
    })
}

#[derive(Serialize)]
struct PredictSummary {
    predictor: &'static str,
    predictions: usize,
    repaired: usize,
    tie_broken: usize,
    predictions_per_fold: BTreeMap<String, usize>,
}

pub fn predict(ctx: &mut Context, args: PredictArgs) -> Outcome {
    ctx.config.validate()?;
    let examples = read_examples(open(&args.examples)?)?;
    let folds = test_folds(&examples);
    let fold_set: BTreeSet<Option<usize>> = folds.iter().copied().collect();
    let single = folds == [None];
    let test: Vec<&Example> = examples
        .iter()
        .filter(|e| e.variant.task() == Task::FaceActs && (single || fold_set.contains(&e.fold)))
        .collect();
    let held_out = |e: &Example| if single { None } else { e.fold };

    // Repair ties go to the label seen most often in the fold's training data.
    let freqs: HashMap<Option<usize>, BTreeMap<String, u64>> = folds
        .iter()
        .map(|&fold| {
            let train: Vec<Example> = training_set(&examples, fold)
                .filter(|e| e.variant.task() == Task::FaceActs)
                .cloned()
                .collect();
            (fold, label_frequencies(&train))
        })
        .collect();

    let (kind, raws): (&'static str, Vec<RawPrediction>) = match ctx.config.predictor.external()? {
        None => {
            let path = args
                .models
                .as_ref()
                .ok_or_else(|| Failure::invalid("the baseline predictor needs --models"))?;
            let bundle: ModelBundle = read_json(path)?;
            let models: HashMap<Option<usize>, &BaselineModel> =
                bundle.folds.iter().map(|f| (f.fold, &f.model)).collect();
            if let Some(missing) = folds.iter().find(|f| !models.contains_key(f)) {
                return Err(Failure::invalid(format!("model bundle has no model for fold {}", fold_key(*missing))));
            }
            let raws = par_map(&test, ctx.config.jobs, |e| models[&held_out(e)].predict_raw(&e.id, &e.input));
            ("baseline", raws)
        }
        Some(external) => {
            let requests: Vec<PredictRequest> = test.iter().map(|e| PredictRequest::from(*e)).collect();
            let kind = match ctx.config.predictor {
                PredictorChoice::Files { .. } => "files",
                _ => "subprocess",
            };
            (kind, run_external(&requests, &external)?)
        }
    };

    let labelset = FaceActLabel::label_strings();
    let records: Vec<PredictionRecord> = raws
        .into_iter()
        .zip(&test)
        .map(|(raw, e)| repair_prediction(raw, &labelset, &freqs[&held_out(e)]))
        .collect();
    let mut out = create(&args.output)?;
    write_records(&records, &mut out)?;
    out.flush()?;

    let mut per_fold = BTreeMap::new();
    for e in &test {
        *per_fold.entry(fold_key(e.fold)).or_insert(0) += 1;
    }
    let summary = PredictSummary {
        predictor: kind,
        predictions: records.len(),
        repaired: records.iter().filter(|r| r.repaired).count(),
        tie_broken: records.iter().filter(|r| r.tie_broken).count(),
        predictions_per_fold: per_fold,
    };
    emit(ctx, "predict", &args.out, &summary, || {
        format!("{} predictions, {} repaired\n", summary.predictions, summary.repaired)
    })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EvaluateResult {
    pub predictions: usize,
    pub unpredicted: usize,
    pub repaired: usize,
    pub evaluation: Evaluation,
}

#[derive(Deserialize)]
struct ReportFile<T> {
    command: String,
    result: T,
}

fn read_evaluate_report(path: &Path) -> Result<EvaluateResult, Failure> {
    let file: ReportFile<EvaluateResult> = read_json(path)?;
    if file.command != "evaluate" {
        return Err(Failure::invalid(format!(
            "{} is a {} report, expected evaluate",
            path.display(),
            file.command
        )));
    }
    Ok(file.result)
}

fn excluded(ctx: &Context) -> BTreeSet<String> {
    ctx.config.macro_excluded.iter().cloned().collect()
}

pub fn evaluate(ctx: &mut Context, args: EvaluateArgs) -> Outcome {
    ctx.config.validate()?;
    let corpus = gold_corpus(ctx, args.gold)?;
    let (records, items, unpredicted) = aligned(&corpus, &args.pred)?;
    let evaluation = evaluate_folds(&items, &excluded(ctx))?;
    let result = EvaluateResult {
        predictions: records.len(),
        unpredicted,
        repaired: records.iter().filter(|r| r.repaired).count(),
        evaluation,
    };
    emit(ctx, "evaluate", &args.out, &result, || {
        let mut text = String::new();
        for fold in &result.evaluation.folds {
            let _ = writeln!(
                text,
                "fold {}: micro F1 {:.4}, macro F1 {:.4}",
                fold_key(fold.fold),
                fold.report.micro_f1,
                fold.report.macro_f1
            );
        }
        text.push_str(&render_report(&result.evaluation.average));
        text
    })
}

#[derive(Serialize)]
struct CompareResult {
    systems: Vec<String>,
    metric: &'static str,
    level: &'static str,
    blocks: Vec<String>,
    values: Vec<Vec<f64>>,
    friedman: FriedmanResult,
    marker: &'static str,
    /// Permutation p-value, when the design is small enough to enumerate.
    exact_p: Option<f64>,
}

pub fn compare(ctx: &mut Context, args: CompareArgs) -> Outcome {
    ctx.config.validate()?;
    let names: Vec<String> = if args.names.is_empty() {
        args.reports
            .iter()
            .map(|p| p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned()))
            .collect()
    } else if args.names.len() == args.reports.len() {
        args.names.clone()
    } else {
        return Err(Failure::invalid(format!(
            "{} names for {} reports",
            args.names.len(),
            args.reports.len()
        )));
    };
    let systems: Vec<Evaluation> = args
        .reports
        .iter()
        .map(|p| read_evaluate_report(p).map(|r| r.evaluation))
        .collect::<Result<_, _>>()?;

    let (blocks, values): (Vec<String>, Vec<Vec<f64>>) = match args.level {
        Level::Label => FaceActLabel::ALL
            .iter()
            .filter_map(|label| {
                let row: Option<Vec<f64>> = systems
                    .iter()
                    .map(|s| {
                        s.average.label(label.as_str()).filter(|m| m.support > 0).map(|m| match args.metric {
                            Metric::F1 => m.f1,
                            Metric::Precision => m.precision,
                            Metric::Recall => m.recall,
                        })
                    })
                    .collect();
                row.map(|r| (label.as_str().to_string(), r))
            })
            .unzip(),
        Level::Fold => {
            let folds: Vec<Option<usize>> = systems[0].folds.iter().map(|f| f.fold).collect();
            for (name, s) in names.iter().zip(&systems) {
                if s.folds.iter().map(|f| f.fold).collect::<Vec<_>>() != folds {
                    return Err(Failure::invalid(format!("report {name} covers different folds")));
                }
            }
            folds
                .iter()
                .enumerate()
                .map(|(i, fold)| {
                    let row = systems
                        .iter()
                        .map(|s| {
                            let r = &s.folds[i].report;
                            match args.metric {
                                Metric::F1 => r.macro_f1,
                                Metric::Precision => r.macro_precision,
                                Metric::Recall => r.macro_recall,
                            }
                        })
                        .collect();
                    (format!("fold {}", fold_key(*fold)), row)
                })
                .unzip()
        }
    };
    let matrix = BlockMatrix::new(values.clone())?;
    let result = friedman(&matrix, &ctx.config.alpha_levels)?;
    let marker = result.marker();
    let compared = CompareResult {
        systems: names,
        metric: match args.metric {
            Metric::F1 => "f1",
            Metric::Precision => "precision",
            Metric::Recall => "recall",
        },
        level: match args.level {
            Level::Label => "label",
            Level::Fold => "fold",
        },
        exact_p: exact_p_value(&matrix).ok(),
        blocks,
        values,
        friedman: result,
        marker,
    };
    emit(ctx, "compare", &args.out, &compared, || {
        let mut text = format!("{:<10}", "");
        for name in &compared.systems {
            let _ = write!(text, " {name:>12}");
        }
        text.push('\n');
        for (block, row) in compared.blocks.iter().zip(&compared.values) {
            let _ = write!(text, "{block:<10}");
            for v in row {
                let _ = write!(text, " {v:>12.4}");
            }
            text.push('\n');
        }
        let _ = write!(text, "{:<10}", "mean rank");
        for r in &compared.friedman.mean_ranks {
            let _ = write!(text, " {r:>12.3}");
        }
        let f = &compared.friedman;
        let _ = writeln!(
            text,
            "\nQ = {:.4}, df = {}, p = {:.4}{}, W = {:.4} ({:?})",
            f.q, f.df, f.p, compared.marker, f.w, f.interpretation
        );
        text
    })
}

#[derive(Serialize)]
struct FrequencyF1 {
    labels: Vec<FaceActLabel>,
    counts: Vec<usize>,
    f1: Vec<f64>,
    r: f64,
}

#[derive(Serialize)]
struct CorrelateResult {
    statistic: &'static str,
    collapsed: bool,
    cells: Option<Vec<CorrelationCell>>,
    frequency_f1: Option<FrequencyF1>,
}

pub fn correlate(ctx: &mut Context, args: CorrelateArgs) -> Outcome {
    ctx.config.validate()?;
    let corpus = gold_corpus(ctx, args.corpus)?;
    if args.collapse && corpus.tagset.is_none() {
        return Err(Failure::invalid("--collapse needs a tagset (set tagset in the config)"));
    }
    let cells = if corpus.utterances().any(|u| u.dialog_act.is_some()) {
        Some(da_fa_matrix(&corpus, args.collapse)?)
    } else {
        None
    };
    let frequency_f1 = match &args.f1_report {
        Some(path) => {
            let report = read_evaluate_report(path)?;
            let histogram = label_histogram(&corpus);
            let mut labels = Vec::new();
            let mut counts = Vec::new();
            let mut f1 = Vec::new();
            for label in FaceActLabel::ALL {
                let count = histogram[&label];
                if let Some(m) = report.evaluation.average.label(label.as_str()).filter(|m| m.support > 0) {
                    if count > 0 {
                        labels.push(label);
                        counts.push(count);
                        f1.push(m.f1);
                    }
                }
            }
            let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
            let r = pearson(&xs, &f1)?;
            Some(FrequencyF1 { labels, counts, f1, r })
        }
        None => None,
    };
    if cells.is_none() && frequency_f1.is_none() {
        return Err(Failure::invalid("corpus has no dialog acts and no --f1-report was given"));
    }
    let result = CorrelateResult {
        statistic: DA_FA_STATISTIC,
        collapsed: args.collapse,
        cells,
        frequency_f1,
    };
    emit(ctx, "correlate", &args.out, &result, || {
        let mut text = String::new();
        if let Some(cells) = &result.cells {
            let _ = write!(text, "{:<14}", "");
            for label in FaceActLabel::ALL {
                let _ = write!(text, " {:>6}", label.as_str());
            }
            for (i, cell) in cells.iter().enumerate() {
                if i % FaceActLabel::ALL.len() == 0 {
                    let _ = write!(text, "\n{:<14}", cell.da_tag);
                }
                match cell.r {
                    Some(r) => {
                        let _ = write!(text, " {r:>6.2}");
                    }
                    None => {
                        let _ = write!(text, " {:>6}", "-");
                    }
                }
            }
            text.push('\n');
        }
        if let Some(f) = &result.frequency_f1 {
            let _ = writeln!(text, "label count vs F1: r = {:.4} over {} labels", f.r, f.labels.len());
        }
        text
    })
}

#[derive(Serialize)]
struct ConfusionResult {
    matrix: ConfusionMatrix,
    normalized: Vec<Vec<f64>>,
}

pub fn confusion(ctx: &mut Context, args: ConfusionArgs) -> Outcome {
    ctx.config.validate()?;
    let corpus = gold_corpus(ctx, args.gold)?;
    let (_, items, _) = aligned(&corpus, &args.pred)?;
    let pairs: Vec<(FaceActLabel, FaceActLabel)> = items.iter().map(|i| (i.gold, i.predicted)).collect();
    let matrix = face_act_confusion(&pairs);
    let result = ConfusionResult {
        normalized: row_normalize(&matrix),
        matrix,
    };
    emit(ctx, "confusion", &args.out, &result, || {
        render_matrix(&result.matrix.labels, &result.normalized, 2)
    })
}

#[derive(Serialize)]
struct SampleSummary {
    samples: usize,
    per_label: BTreeMap<FaceActLabel, usize>,
}

pub fn sample_errors(ctx: &mut Context, args: SampleErrorsArgs) -> Outcome {
    if let Some(n) = args.per_fold {
        ctx.config.errors_per_fold = n;
    }
    if let Some(n) = args.cap {
        ctx.config.errors_cap = n;
    }
    ctx.config.validate()?;
    let corpus = gold_corpus(ctx, args.gold)?;
    let (_, items, _) = aligned(&corpus, &args.pred)?;
    let plan = SamplingPlan {
        per_fold: ctx.config.errors_per_fold,
        cap: ctx.config.errors_cap,
        seed: ctx.config.seed,
        context_size: ctx.config.context_size,
    };
    let samples = draw_errors(&corpus, &items, &plan)?;
    let mut out = create(&args.output)?;
    write_sheet(&samples, &mut out)?;
    out.flush()?;
    let mut per_label = BTreeMap::new();
    for s in &samples {
        *per_label.entry(s.gold).or_insert(0) += 1;
    }
    let summary = SampleSummary {
        samples: samples.len(),
        per_label,
    };
    emit(ctx, "sample-errors", &args.out, &summary, || {
        let mut text = format!("{} samples\n", summary.samples);
        for (label, n) in &summary.per_label {
            let _ = writeln!(text, "{:<6} {n}", label.as_str());
        }
        text
    })
}

pub fn tally_errors(ctx: &mut Context, args: TallyErrorsArgs) -> Outcome {
    let samples = read_sheet(open(&args.sheet)?)?;
    let result = tally(&samples)?;
    emit(ctx, "tally-errors", &args.out, &result, || render_tally(&result))
}

pub fn shift(ctx: &mut Context, args: ShiftArgs) -> Outcome {
    if let Some(tags) = &args.tags {
        ctx.config.shift_tags = tags.clone();
    }
    ctx.config.validate()?;
    let target: FaceActLabel = args.target.parse()?;
    let corpus = gold_corpus(ctx, args.gold)?;
    let (_, a, _) = aligned(&corpus, &args.pred_a)?;
    let (_, b, _) = aligned(&corpus, &args.pred_b)?;
    let ids = |items: &[AlignedPrediction]| items.iter().map(|i| i.example_id.clone()).collect::<Vec<_>>();
    if ids(&a) != ids(&b) {
        return Err(Failure::invalid("the two prediction files cover different examples"));
    }
    let dialog_acts: Vec<String> = a
        .iter()
        .map(|i| {
            i.dialog_act.clone().ok_or_else(|| {
                Failure::from(faceact_core::Error::MissingDialogAct {
                    conversation_id: i.conversation_id.clone(),
                    turn: i.turn,
                })
            })
        })
        .collect::<Result<_, _>>()?;
    let gold: Vec<FaceActLabel> = a.iter().map(|i| i.gold).collect();
    let system_a: Vec<FaceActLabel> = a.iter().map(|i| i.predicted).collect();
    let system_b: Vec<FaceActLabel> = b.iter().map(|i| i.predicted).collect();
    let tagset = corpus.tagset.clone().unwrap_or_else(TagSet::mrda_basic);
    let input = ShiftInput {
        gold: &gold,
        system_a: &system_a,
        system_b: &system_b,
        dialog_acts: &dialog_acts,
    };
    let subset = (!args.all_tags).then_some(ctx.config.shift_tags.as_slice());
    let report = shift_analysis(&input, target, &tagset, subset)?;
    emit(ctx, "shift", &args.out, &report, || render_shift(&report))
}
