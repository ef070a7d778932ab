use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clarity_core::augment::{
    lint_synthetic, run_plan, AugmentResources, AugmentationPlan, BalanceMode, GeneratorClient, GeneratorSettings,
    HttpGeneratorClient, LintBounds, TrainingSplit,
};
use clarity_core::baselines::{run_baseline, render_comparison, BaselineKind, BaselineSettings, ComparisonRow};
use clarity_core::config::KvConfig;
use clarity_core::data::{
    class_distribution, load_dataset, read_task_predictions, stratified_split, write_dataset, write_task_predictions,
    ClarityLabel, Dataset, Schema, Source, Task,
};
use clarity_core::eval::{
    confusion_matrix, error_buckets, macro_f1, per_class_prf, read_matrix, render_metrics_file, render_report,
    write_matrix, ConfusionMatrix, ReportFormat, ScoredPrediction,
};
use clarity_core::features::feature_agreement;
use clarity_core::model::{load_checkpoint, load_model, save_checkpoint, ModelConfig};
use clarity_core::train::{grid_search, render_grid_table, train_loop, GridSpec, TrainingConfig};

use crate::args::{
    AugmentArgs, AugmentMode, BaselineArgs, EvaluateArgs, GridArgs, PredictArgs, PrepareArgs, ReportArgs, TrainArgs,
};
use crate::error::{io_error, CliError};
use crate::manifest::RunManifest;
use crate::settings::Settings;

/// Meta `split` values that mark held-out data.
const HELD_OUT_MARKERS: [&str; 5] = ["test", "eval", "evaluation", "heldout", "held_out"];
const SPLIT_KEY: &str = "split";

/// Post-augmentation totals of the reference partial recipe.
const PARTIAL_RECIPE: [(ClarityLabel, usize); 2] = [(ClarityLabel::ClearReply, 1498), (ClarityLabel::ClearNonReply, 996)];

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

fn write_text(path: &Path, text: &str, manifest: &mut RunManifest) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_error(path, e))?;
    manifest.output(path);
    Ok(())
}

fn schema(settings: &Settings) -> Result<Schema, CliError> {
    Ok(Schema::from_config(&settings.section("schema"))?)
}

fn load(path: &Path, role: &str, settings: &Settings, manifest: &mut RunManifest) -> Result<Dataset, CliError> {
    manifest.input(role, path)?;
    let d = load_dataset(path, &schema(settings)?)?;
    log::info!("{role}: {} records from {}", d.len(), path.display());
    Ok(d)
}

/// Training inputs must not contain records that `prepare` marked as held out.
fn reject_held_out(d: &Dataset, path: &Path) -> Result<(), CliError> {
    if let Some(r) = d.iter().find(|r| {
        r.meta
            .get(SPLIT_KEY)
            .is_some_and(|s| HELD_OUT_MARKERS.contains(&s.trim().to_ascii_lowercase().as_str()))
    }) {
        return Err(CliError::data(format!(
            "{} holds held-out record {:?}; evaluation data cannot be used for training or augmentation",
            path.display(),
            r.id
        )));
    }
    Ok(())
}

fn mark_split(d: &Dataset, name: &str) -> Dataset {
    let mut out = d.clone();
    for r in &mut out.records {
        r.meta.insert(SPLIT_KEY.into(), name.into());
    }
    out
}

fn record_config(manifest: &mut RunManifest, settings: &Settings, sections: &[(&str, KvConfig)]) {
    for (prefix, defaults) in sections {
        manifest.config.extend(settings.snapshot(prefix, defaults));
    }
    for (k, v) in settings.kv().iter() {
        manifest.config.entry(k.to_string()).or_insert_with(|| v.to_string());
    }
    manifest.config_sources = settings.sources().iter().map(|(k, v)| (k.clone(), v.to_string())).collect();
}

fn model_config(settings: &Settings, model_id: Option<&str>) -> Result<ModelConfig, CliError> {
    let mut kv = settings.section("model");
    if let Some(id) = model_id {
        kv.set("encoder_identifier", id);
    }
    Ok(ModelConfig::from_kv(&kv)?)
}

fn training_config(settings: &Settings) -> Result<TrainingConfig, CliError> {
    let cfg = TrainingConfig::from_kv(&settings.section("train"))?;
    cfg.validate()?;
    Ok(cfg)
}

fn distribution_tsv(d: &Dataset) -> Result<String, CliError> {
    let dist = class_distribution(d)?;
    let mut out = String::from("label\tcount\tfraction\n");
    for (label, share) in dist.by_clarity() {
        out.push_str(&format!("{}\t{}\t{:.4}\n", label.name(), share.count, share.fraction));
    }
    Ok(out)
}

pub fn prepare(args: &PrepareArgs, settings: &Settings) -> Result<(), CliError> {
    let seed = settings.kv().parse_or("split.seed", settings.seed()?)?;
    let dev_fraction = match args.dev_fraction {
        Some(f) => f,
        None => settings.kv().parse_or("split.dev_fraction", 0.2)?,
    };
    if !(dev_fraction > 0.0 && dev_fraction < 1.0) {
        return Err(CliError::usage(format!("--dev-fraction {dev_fraction} outside (0, 1)")));
    }
    let mut manifest = RunManifest::new("prepare", seed);
    ensure_dir(&args.out)?;
    let full = load(&args.train, "train", settings, &mut manifest)?;
    reject_held_out(&full, &args.train)?;
    let (train, dev) = stratified_split(&full, dev_fraction, seed)?;
    for (d, name) in [(&train, "train"), (&dev, "dev")] {
        let path = args.out.join(format!("{name}.tsv"));
        write_dataset(&mark_split(d, name), &path)?;
        manifest.output(&path);
    }
    write_text(&args.out.join("distribution.tsv"), &distribution_tsv(&full)?, &mut manifest)?;
    if let Some(test_path) = &args.test {
        let test = load(test_path, "test", settings, &mut manifest)?;
        let path = args.out.join("test.tsv");
        write_dataset(&mark_split(&test, "test"), &path)?;
        manifest.output(&path);
        manifest.note("test_records", test.len());
    }
    if let Some(a) = feature_agreement(&full) {
        println!(
            "feature heuristic agreement on {} records: affirmative {:.3}, multiple {:.3}",
            a.compared, a.affirmative_agreement, a.multiple_agreement
        );
        manifest.note("feature_agreement_affirmative", a.affirmative_agreement);
        manifest.note("feature_agreement_multiple", a.multiple_agreement);
    }
    manifest.note("train_records", train.len());
    manifest.note("dev_records", dev.len());
    manifest.config.insert("split.dev_fraction".into(), dev_fraction.to_string());
    record_config(&mut manifest, settings, &[]);
    println!("train {} / dev {} (from {})", train.len(), dev.len(), full.len());
    manifest.write(&args.out)?;
    Ok(())
}

fn balance_mode(args: &AugmentArgs, settings: &Settings) -> Result<BalanceMode, CliError> {
    let mode = match args.mode {
        Some(m) => m,
        None => match settings.kv().get("augment.mode") {
            None | Some("full-balance") | Some("full_balance") => AugmentMode::FullBalance,
            Some("partial") => AugmentMode::Partial,
            Some(other) => return Err(CliError::usage(format!("augment.mode {other:?}: expected full-balance or partial"))),
        },
    };
    Ok(match mode {
        AugmentMode::FullBalance => BalanceMode::FullBalance,
        AugmentMode::Partial => {
            let section = settings.section("augment.partial");
            let targets: BTreeMap<ClarityLabel, usize> = if section.is_empty() {
                PARTIAL_RECIPE.into_iter().collect()
            } else {
                section
                    .iter()
                    .map(|(k, v)| {
                        let label: ClarityLabel = k.parse().map_err(|e| CliError::usage(format!("augment.partial: {e}")))?;
                        let n: usize = v
                            .parse()
                            .map_err(|_| CliError::usage(format!("augment.partial.{k}: {v:?} is not a count")))?;
                        Ok((label, n))
                    })
                    .collect::<Result<_, CliError>>()?
            };
            BalanceMode::Partial(targets)
        }
    })
}

pub fn augment(args: &AugmentArgs, settings: &Settings) -> Result<(), CliError> {
    let seed = settings.kv().parse_or("augment.seed", settings.seed()?)?;
    let mut manifest = RunManifest::new("augment", seed);
    ensure_dir(&args.out)?;
    let train = load(&args.train, "train", settings, &mut manifest)?;
    reject_held_out(&train, &args.train)?;
    let source: Source = match &args.source {
        Some(s) => s.parse().map_err(|e| CliError::usage(format!("--source: {e}")))?,
        None => settings.kv().parse_or("augment.source", Source::FrameSynthetic)?,
    };
    let mode = balance_mode(args, settings)?;
    let dist = class_distribution(&train)?;
    let mut plan = AugmentationPlan::from_balance(&dist, &mode, source, seed)?;
    plan.op_probability = settings.kv().parse_or("augment.op_probability", plan.op_probability)?;
    plan.min_frame_support = settings.kv().parse_or("augment.min_frame_support", plan.min_frame_support)?;
    let mut resources = AugmentResources::bundled();
    if let Some(p) = settings.kv().get("augment.contexts_file") {
        resources = resources.with_contexts_file(Path::new(p))?;
    }
    if let Some(p) = settings.kv().get("augment.thesaurus_file") {
        resources = resources.with_thesaurus_file(Path::new(p))?;
    }
    let generator = GeneratorSettings::from_kv(settings.kv())?;
    let client: Option<HttpGeneratorClient> = if source == Source::FrameSynthetic && !generator.endpoint.is_empty() {
        Some(HttpGeneratorClient::new(generator).map_err(|e| CliError::usage(e.to_string()))?)
    } else {
        None
    };
    manifest.note(
        "generator",
        client.as_ref().map_or("template fallback".to_string(), |c| c.name().to_string()),
    );
    let split = TrainingSplit::new(train)?;
    let synthetic = run_plan(&split, &plan, &resources, client.as_ref().map(|c| c as &dyn GeneratorClient))?;
    let lint = lint_synthetic(&synthetic, split.dataset(), LintBounds::default());
    let keep_flagged = !settings.kv().parse_or("augment.drop_flagged", false)?;
    let kept = if keep_flagged { synthetic.clone() } else { lint.filter(&synthetic) };
    let syn_path = args.out.join("synthetic.tsv");
    write_dataset(&mark_split(&synthetic, "train"), &syn_path)?;
    manifest.output(&syn_path);
    let aug_path = args.out.join("augmented_train.tsv");
    let augmented = split.dataset().clone().extended(&mark_split(&kept, "train"));
    write_dataset(&augmented, &aug_path)?;
    manifest.output(&aug_path);
    write_text(&args.out.join("lint.tsv"), &lint.to_tsv(), &mut manifest)?;
    write_text(&args.out.join("distribution.tsv"), &distribution_tsv(&augmented)?, &mut manifest)?;
    let per_class: BTreeMap<String, usize> = ClarityLabel::ALL
        .iter()
        .map(|&l| (l.name().to_string(), synthetic.iter().filter(|r| r.clarity == Some(l)).count()))
        .collect();
    manifest.note("generated", synthetic.len());
    manifest.note("generated_per_class", serde_json::to_value(&per_class).unwrap_or_default());
    manifest.note("lint_flagged", lint.flagged_ids().len());
    manifest.note("augmented_total", augmented.len());
    manifest.note("source", source.to_string());
    record_config(&mut manifest, settings, &[]);
    println!(
        "generated {} synthetic records ({} flagged by lint); augmented training set has {}",
        synthetic.len(),
        lint.flagged_ids().len(),
        augmented.len()
    );
    manifest.write(&args.out)?;
    Ok(())
}

pub fn train(args: &TrainArgs, settings: &Settings) -> Result<(), CliError> {
    let model_cfg = model_config(settings, args.model_id.as_deref())?;
    let cfg = training_config(settings)?;
    let mut manifest = RunManifest::new("train", cfg.seed);
    ensure_dir(&args.out)?;
    let train = load(&args.train, "train", settings, &mut manifest)?;
    let dev = load(&args.dev, "dev", settings, &mut manifest)?;
    reject_held_out(&train, &args.train)?;
    reject_held_out(&dev, &args.dev)?;
    let model = load_model(&model_cfg)?;
    let outcome = train_loop(model, &train, &dev, &cfg)?;
    let ckpt = args.out.join("checkpoint");
    save_checkpoint(&outcome.model, &ckpt)?;
    manifest.output(&ckpt);
    let hist = args.out.join("history.tsv");
    outcome.history.write_tsv(&hist)?;
    manifest.output(&hist);
    let h = &outcome.history;
    manifest.note("best_epoch", h.best_epoch);
    manifest.note("best_dev_macro_f1", h.best_dev_macro_f1());
    manifest.note("epochs_run", h.epochs.len());
    manifest.note("stopped_early", h.stopped_early);
    manifest.note("initial_train_loss", h.initial_train_loss);
    manifest.note("train_loss", h.epochs.iter().map(|e| e.train_loss).collect::<Vec<_>>());
    manifest.note("class_weights", outcome.class_weights.clone());
    manifest.note("truncated_inputs", outcome.model.truncation_count());
    record_config(&mut manifest, settings, &[("model", model_cfg.to_kv()), ("train", cfg.to_kv())]);
    println!(
        "best epoch {} of {}: dev macro F1 {:.4}{}",
        h.best_epoch,
        h.epochs.len(),
        h.best_dev_macro_f1(),
        if h.stopped_early { " (stopped early)" } else { "" }
    );
    manifest.write(&args.out)?;
    Ok(())
}

pub fn predict(args: &PredictArgs, settings: &Settings) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("predict", settings.seed()?);
    ensure_dir(&args.out)?;
    let ckpt_manifest = args.model_id.join(clarity_core::model::MANIFEST_FILE);
    manifest.input("checkpoint", &ckpt_manifest)?;
    manifest.input("checkpoint_weights", &args.model_id.join(clarity_core::model::WEIGHTS_FILE))?;
    let model = load_checkpoint(&args.model_id)?;
    let test = load(&args.test, "test", settings, &mut manifest)?;
    let batch = model.encode_pairs(test.iter());
    let probs = model.predict_proba(&batch);
    let preds = model.predict(&batch);
    let task = model.config().task;
    let rows: Vec<(String, usize)> = test.iter().map(|r| r.id.clone()).zip(preds.iter().copied()).collect();
    let path = args.out.join("predictions.tsv");
    write_task_predictions(&rows, task, &path)?;
    manifest.output(&path);
    let mut scores = String::from("id");
    for name in task.label_names() {
        scores.push('\t');
        scores.push_str(&name);
    }
    scores.push('\n');
    for (r, row) in test.iter().zip(probs.rows()) {
        scores.push_str(&r.id);
        for p in row {
            scores.push_str(&format!("\t{p:.6}"));
        }
        scores.push('\n');
    }
    write_text(&args.out.join("probabilities.tsv"), &scores, &mut manifest)?;
    manifest.note("predictions", rows.len());
    record_config(&mut manifest, settings, &[("model", model.config().to_kv())]);
    println!("wrote {} predictions to {}", rows.len(), path.display());
    manifest.write(&args.out)?;
    Ok(())
}

fn report_format(s: &str) -> Result<ReportFormat, CliError> {
    s.parse().map_err(CliError::usage)
}

pub fn evaluate(args: &EvaluateArgs, settings: &Settings) -> Result<(), CliError> {
    let task: Task = args.task.parse().map_err(|e| CliError::usage(format!("--task: {e}")))?;
    let format = report_format(&args.format)?;
    let mut manifest = RunManifest::new("evaluate", settings.seed()?);
    let gold = load(&args.gold, "gold", settings, &mut manifest)?;
    manifest.input("predictions", &args.pred)?;
    let preds: BTreeMap<String, usize> = read_task_predictions(&args.pred, task)?.into_iter().collect();
    let truths = gold.targets(task)?;
    let mut aligned = Vec::with_capacity(gold.len());
    for r in gold.iter() {
        let p = preds
            .get(&r.id)
            .ok_or_else(|| CliError::data(format!("no prediction for record {:?}", r.id)))?;
        aligned.push(*p);
    }
    if preds.len() != gold.len() {
        log::warn!("{} predictions for {} gold records; extras ignored", preds.len(), gold.len());
    }
    let cm = confusion_matrix(&truths, &aligned, task.label_names())?;
    let metrics = per_class_prf(&cm);
    let report = render_report(&cm, &metrics, format);
    print!("{report}");
    if let Some(out) = &args.out {
        ensure_dir(out)?;
        write_text(&out.join("report.md"), &render_report(&cm, &metrics, ReportFormat::Markdown), &mut manifest)?;
        write_text(&out.join("metrics.txt"), &render_metrics_file(&cm, &metrics), &mut manifest)?;
        let mpath = out.join("matrix.tsv");
        write_matrix(&cm, &mpath)?;
        manifest.output(&mpath);
        if task == Task::Clarity {
            let pairs: Vec<_> = gold
                .iter()
                .zip(&aligned)
                .map(|(r, &p)| (r.clone(), ScoredPrediction::from(ClarityLabel::from_code(p).expect("clarity code"))))
                .collect();
            let mut text = String::from("true\tpredicted\tid\tanswer\n");
            for ((t, p), recs) in error_buckets(&pairs) {
                for r in recs {
                    text.push_str(&format!("{}\t{}\t{}\t{}\n", t.name(), p.name(), r.id, r.answer));
                }
            }
            write_text(&out.join("errors.tsv"), &text, &mut manifest)?;
        }
        manifest.note("macro_f1", macro_f1(&cm));
        record_config(&mut manifest, settings, &[]);
        manifest.write(out)?;
    }
    Ok(())
}

fn parse_kinds(spec: &str) -> Result<Vec<BaselineKind>, CliError> {
    if spec.trim() == "all" {
        return Ok(BaselineKind::ALL.to_vec());
    }
    let mut kinds: Vec<BaselineKind> = spec
        .split(',')
        .map(|s| s.parse().map_err(CliError::usage))
        .collect::<Result<_, _>>()?;
    kinds.dedup();
    if kinds.is_empty() {
        return Err(CliError::usage("--kind names no baseline"));
    }
    Ok(kinds)
}

pub const BASELINE_SUMMARY: &str = "summary.txt";

pub fn baseline(args: &BaselineArgs, settings: &Settings) -> Result<(), CliError> {
    let kinds = parse_kinds(&args.kind)?;
    let mut bs = BaselineSettings::from_kv(settings.kv())?;
    if let Some(s) = settings.kv().get("seed") {
        bs = bs.with_seed(s.parse().map_err(|_| CliError::usage(format!("seed {s:?}")))?);
    }
    if args.model_id.is_some() || !settings.section("model").is_empty() {
        let mut m = model_config(settings, args.model_id.as_deref())?;
        m.use_boolean_features = false;
        bs.transformer_model = Some(m);
    }
    let mut manifest = RunManifest::new("baseline", bs.transformer_seed);
    ensure_dir(&args.out)?;
    let train = load(&args.train, "train", settings, &mut manifest)?;
    reject_held_out(&train, &args.train)?;
    let dev = match &args.dev {
        Some(p) => {
            let d = load(p, "dev", settings, &mut manifest)?;
            reject_held_out(&d, p)?;
            Some(d)
        }
        None => None,
    };
    let test = load(&args.test, "test", settings, &mut manifest)?;
    let mut local = Vec::new();
    for kind in kinds {
        let run = run_baseline(kind, &train, dev.as_ref(), &test, &bs)?;
        let dir = args.out.join(kind.as_str());
        ensure_dir(&dir)?;
        let rows: Vec<(String, usize)> = test.iter().map(|r| r.id.clone()).zip(run.predictions.iter().copied()).collect();
        let pred_path = dir.join("predictions.tsv");
        write_task_predictions(&rows, Task::Clarity, &pred_path)?;
        manifest.output(&pred_path);
        let mut summary = format!("kind={}\ndescription={}\n", kind.as_str(), run.description);
        if let Some(cm) = &run.confusion {
            let metrics = per_class_prf(cm);
            let mpath = dir.join("matrix.tsv");
            write_matrix(cm, &mpath)?;
            manifest.output(&mpath);
            write_text(&dir.join("report.md"), &render_report(cm, &metrics, ReportFormat::Markdown), &mut manifest)?;
            let f1 = macro_f1(cm);
            summary.push_str(&format!("macro_f1={f1}\n"));
            local.push((kind, f1));
            manifest.note(&format!("{}_macro_f1", kind.as_str()), f1);
            println!("{:<28} macro F1 {f1:.4}  ({})", kind.display_name(), run.description);
        } else {
            println!("{:<28} predictions written ({})", kind.display_name(), run.description);
        }
        if let Some(model) = &run.checkpoint {
            let ckpt = dir.join("checkpoint");
            save_checkpoint(model, &ckpt)?;
            manifest.output(&ckpt);
        }
        if let Some(h) = &run.history {
            let hp = dir.join("history.tsv");
            h.write_tsv(&hp)?;
            manifest.output(&hp);
        }
        write_text(&dir.join(BASELINE_SUMMARY), &summary, &mut manifest)?;
    }
    write_text(
        &args.out.join("comparison.md"),
        &render_comparison(&ComparisonRow::table(&local)),
        &mut manifest,
    )?;
    record_config(&mut manifest, settings, &[]);
    manifest.write(&args.out)?;
    Ok(())
}

/// `(kind, macro F1)` from every `*/summary.txt` under `dir`.
fn collect_baseline_scores(dir: &Path) -> Result<Vec<(BaselineKind, f64)>, CliError> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| io_error(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path().join(BASELINE_SUMMARY)))
        .filter(|p| p.is_file())
        .collect();
    entries.sort();
    let mut out = Vec::new();
    for path in entries {
        let text = fs::read_to_string(&path).map_err(|e| io_error(&path, e))?;
        let kv = KvConfig::parse(&text)?;
        let (Some(kind), Some(f1)) = (kv.get("kind"), kv.parse_opt::<f64>("macro_f1")?) else {
            continue;
        };
        out.push((kind.parse().map_err(CliError::data)?, f1));
    }
    Ok(out)
}

fn reorder(cm: &ConfusionMatrix, order: &str) -> Result<ConfusionMatrix, CliError> {
    let idx: Vec<usize> = order
        .split(',')
        .map(|name| {
            cm.label_names
                .iter()
                .position(|n| n == name.trim())
                .ok_or_else(|| CliError::usage(format!("--order: no label {:?} in matrix", name.trim())))
        })
        .collect::<Result<_, _>>()?;
    if idx.len() != cm.k() {
        return Err(CliError::usage(format!("--order lists {} labels, matrix has {}", idx.len(), cm.k())));
    }
    Ok(cm.reordered(&idx))
}

pub fn report(args: &ReportArgs, settings: &Settings) -> Result<(), CliError> {
    if args.matrices.is_empty() && args.baselines.is_none() {
        return Err(CliError::usage("report needs --matrix FILE or --baselines DIR"));
    }
    let format = report_format(&args.format)?;
    let mut manifest = RunManifest::new("report", settings.seed()?);
    let mut text = String::new();
    for path in &args.matrices {
        manifest.input("matrix", path)?;
        let mut cm = read_matrix(path)?;
        if let Some(order) = &args.order {
            cm = reorder(&cm, order)?;
        }
        if args.matrices.len() > 1 {
            text.push_str(&format!("# {}\n\n", path.display()));
        }
        text.push_str(&render_report(&cm, &per_class_prf(&cm), format));
        text.push('\n');
    }
    if let Some(dir) = &args.baselines {
        let scores = collect_baseline_scores(dir)?;
        text.push_str("## Baseline comparison\n\n");
        text.push_str(&render_comparison(&ComparisonRow::table(&scores)));
    }
    print!("{text}");
    if let Some(out) = &args.out {
        ensure_dir(out)?;
        write_text(&out.join("report.md"), &text, &mut manifest)?;
        record_config(&mut manifest, settings, &[]);
        manifest.write(out)?;
    }
    Ok(())
}

pub fn grid(args: &GridArgs, settings: &Settings) -> Result<(), CliError> {
    let model_cfg = model_config(settings, args.model_id.as_deref())?;
    let cfg = training_config(settings)?;
    let g = settings.section("grid");
    let d = GridSpec::default();
    let spec = GridSpec {
        base_lrs: g.parse_list("base_lrs")?.unwrap_or(d.base_lrs),
        llrd_alphas: g.parse_list("llrd_alphas")?.unwrap_or(d.llrd_alphas),
    };
    let mut manifest = RunManifest::new("grid", cfg.seed);
    ensure_dir(&args.out)?;
    let train = load(&args.train, "train", settings, &mut manifest)?;
    let dev = load(&args.dev, "dev", settings, &mut manifest)?;
    reject_held_out(&train, &args.train)?;
    reject_held_out(&dev, &args.dev)?;
    let rows = grid_search(&spec, &cfg, &train, &dev, || load_model(&model_cfg))?;
    let table = render_grid_table(&rows);
    print!("{table}");
    write_text(&args.out.join("grid.md"), &table, &mut manifest)?;
    manifest.note("cells", rows.len());
    manifest.note("failed_cells", rows.iter().filter(|r| r.outcome.is_err()).count());
    record_config(&mut manifest, settings, &[("model", model_cfg.to_kv()), ("train", cfg.to_kv())]);
    manifest.write(&args.out)?;
    Ok(())
}
