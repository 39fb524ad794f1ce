use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use grainforge::explain::{kernel_shap, lime_explain, render_lime, render_shap, slic_superpixels};
use grainforge::imaging::{normalize, read_image, write_image, Pipeline};
use grainforge::metrics::{confusion_csv, metrics_csv, parse_confusion_csv, roc_csv, roc_micro};
use grainforge::network::{load_weights, predict, save_weights};
use grainforge::training::{
    self, split, EpochControl, Evaluation, Manifest, ManifestSource, Record, SplitTag,
    TrainingHistory, DEFAULT_RATIOS,
};
use grainforge::Image;
use walkdir::WalkDir;

use crate::config::{
    existing_path, layer, pipeline_for, ConfigFile, ExplainOptions, ExplainSettings, Resolved,
    RunOptions,
};
use crate::{CliError, Method};

const IMAGE_EXTENSIONS: [&str; 2] = ["ppm", "pgm"];

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
    println!("{}", path.display());
    Ok(())
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(())
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.iter().any(|x| e.eq_ignore_ascii_case(x)))
}

/// Relative path with `/` separators, as stored in manifests.
fn manifest_path(path: &Path, root: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

pub fn ingest(dir: &Path, output: &Path) -> Result<(), CliError> {
    if !dir.is_dir() {
        return Err(CliError::Usage(format!("{} is not a directory", dir.display())));
    }
    let mut class_dirs: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    class_dirs.sort();
    let mut records = Vec::new();
    let mut classes = 0;
    for class_dir in &class_dirs {
        let label = class_dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let before = records.len();
        for entry in WalkDir::new(class_dir).sort_by_file_name() {
            let entry = entry.with_context(|| format!("walking {}", class_dir.display()))?;
            if entry.file_type().is_file() && is_image(entry.path()) {
                records.push(Record {
                    path: manifest_path(entry.path(), dir),
                    label: label.clone(),
                });
            }
        }
        if records.len() == before {
            eprintln!("warning: class directory `{label}` holds no .ppm/.pgm images; skipped");
        } else {
            classes += 1;
        }
    }
    if classes == 0 {
        return Err(CliError::Usage(format!(
            "{} has no class subdirectories with .ppm/.pgm images",
            dir.display()
        )));
    }
    if classes < 2 {
        return Err(CliError::Usage(format!(
            "{} has a single image class; at least two are needed",
            dir.display()
        )));
    }
    records.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = Manifest::new(records)?;
    if let Some(parent) = output.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    write_file(output, manifest.to_csv()?)?;
    eprintln!("{} images in {} classes", manifest.len(), manifest.classes().len());
    Ok(())
}

fn read_manifest(run: &RunOptions) -> Result<(PathBuf, PathBuf, Manifest), CliError> {
    let root = existing_path(run.data_root.as_ref(), "data-root")?;
    let manifest_path = existing_path(run.manifest.as_ref(), "manifest")?;
    let manifest = Manifest::read(&manifest_path)?;
    Ok((root, manifest_path, manifest))
}

fn check_classes(manifest: &Manifest, classes: usize) -> Result<(), CliError> {
    if manifest.classes().len() != classes {
        return Err(CliError::Usage(format!(
            "manifest has {} classes ({}), the network expects {classes}",
            manifest.classes().len(),
            manifest.classes().join(", ")
        )));
    }
    Ok(())
}

pub fn train(run: RunOptions, config: Option<&Path>, out_dir: &Path) -> Result<(), CliError> {
    let (run, _) = layer(run, ExplainOptions::default(), config)?;
    let resolved = Resolved::from_options(&run)?;
    let (root, manifest_path, manifest) = read_manifest(&run)?;
    let spec = resolved.model.spec();
    check_classes(&manifest, spec.classes)?;
    let assignment = split(&manifest, resolved.train.seed, DEFAULT_RATIOS)?;
    let pipeline = pipeline_for(spec.input_shape, resolved.canny, resolved.segment);
    create_dir(out_dir)?;

    let started = Instant::now();
    let outcome = training::train::<f32>(
        &spec,
        &manifest,
        &root,
        &assignment,
        &pipeline,
        resolved.augment,
        &resolved.train,
        &mut |r, _| {
            eprintln!(
                "epoch {:>3}  train loss {:.4} acc {:.4}  val loss {:.4} acc {:.4}  [{:.0}s]",
                r.epoch,
                r.train_loss,
                r.train_acc,
                r.val_loss,
                r.val_acc,
                started.elapsed().as_secs_f64()
            );
            EpochControl::Continue
        },
    )?;

    let weights = out_dir.join("weights.gfw");
    save_weights(&spec, &outcome.best, &weights)?;
    println!("{}", weights.display());
    write_file(&out_dir.join("history.csv"), outcome.history.to_csv())?;
    let absolute = |p: &Path| fs::canonicalize(p).unwrap_or_else(|_| p.to_path_buf());
    let run_file = ConfigFile {
        run: resolved.to_options(&absolute(&root), &absolute(&manifest_path)),
        explain: ExplainOptions::default(),
    };
    let json = serde_json::to_string_pretty(&run_file).context("encoding run.json")?;
    write_file(&out_dir.join("run.json"), json + "\n")?;
    if let Some(best) = outcome.history.best() {
        eprintln!(
            "best epoch {} (val loss {:.4}, val acc {:.4})",
            best.epoch, best.val_loss, best.val_acc
        );
    }
    Ok(())
}

pub fn evaluate(
    weights: &Path,
    run: RunOptions,
    config: Option<&Path>,
    split_tag: &str,
    out_dir: Option<&Path>,
) -> Result<(), CliError> {
    let (run, _) = layer(run, ExplainOptions::default(), config)?;
    let tag: SplitTag = split_tag.parse().map_err(|_| {
        CliError::Usage(format!("unknown split `{split_tag}`; use train, val or test"))
    })?;
    let weights = existing_path(Some(&weights.to_path_buf()), "weights")?;
    let resolved = Resolved::from_options(&run)?;
    let (root, _, manifest) = read_manifest(&run)?;
    let (spec, params) = load_weights::<f32>(&weights)?;
    check_classes(&manifest, spec.classes)?;
    let assignment = split(&manifest, resolved.train.seed, DEFAULT_RATIOS)?;
    let pipeline = pipeline_for(spec.input_shape, resolved.canny, resolved.segment);
    let source = ManifestSource::new(&manifest, &root, &assignment.indices(tag), pipeline);
    let eval = training::evaluate(&spec, &params, &source, resolved.train.lambda)?;
    let out_dir = out_dir
        .map(Path::to_path_buf)
        .unwrap_or_else(|| weights.parent().unwrap_or(Path::new(".")).to_path_buf());
    create_dir(&out_dir)?;
    write_evaluation(&out_dir, manifest.classes(), &eval)?;
    eprintln!(
        "{} split: {} images, accuracy {:.4}, macro-F1 {:.4}, loss {:.4}",
        tag.as_str(),
        eval.labels.len(),
        eval.accuracy,
        eval.report.macro_f1(),
        eval.loss
    );
    Ok(())
}

fn write_evaluation(out_dir: &Path, classes: &[String], eval: &Evaluation) -> Result<(), CliError> {
    write_file(&out_dir.join("metrics.csv"), metrics_csv(&eval.report, classes))?;
    write_file(&out_dir.join("confusion.csv"), confusion_csv(&eval.confusion, classes))?;
    let curve = roc_micro(&eval.probabilities, &eval.labels)?;
    write_file(&out_dir.join("roc_points.csv"), roc_csv(&curve))?;
    Ok(())
}

pub struct ExplainRequest<'a> {
    pub weights: &'a Path,
    pub image: &'a Path,
    pub method: Method,
    pub class: Option<usize>,
    pub config: Option<&'a Path>,
    pub out_dir: Option<&'a Path>,
    pub run: RunOptions,
    pub explain: ExplainOptions,
}

pub fn explain(req: ExplainRequest<'_>) -> Result<(), CliError> {
    let (run, explain_opts) = layer(req.run, req.explain, req.config)?;
    let weights = existing_path(Some(&req.weights.to_path_buf()), "weights")?;
    let image_path = existing_path(Some(&req.image.to_path_buf()), "image")?;
    let seed = run.seed.unwrap_or(0);
    let (spec, params) = load_weights::<f32>(&weights)?;
    let settings = ExplainSettings::resolve(&explain_opts, seed, spec.input_shape[1])?;
    let pipeline = pipeline_for(
        spec.input_shape,
        run.canny.unwrap_or(false),
        run.segment.unwrap_or(false),
    );
    // explanations live on the network-resolution colour image; masking
    // and edge extraction happen inside the model call
    let base = Pipeline::new(pipeline.width, pipeline.height, pipeline.channels)
        .apply(&read_image(&image_path)?)?;
    let model = |im: &Image| -> grainforge::Result<Vec<f64>> {
        let x = normalize::<f32>(&pipeline.apply(im)?);
        Ok(predict(&spec, &params, &x)?.data().iter().map(|&v| f64::from(v)).collect())
    };
    let probs = model(&base)?;
    let predicted = probs
        .iter()
        .enumerate()
        .fold(0, |best, (i, &p)| if p > probs[best] { i } else { best });
    let class = req.class.unwrap_or(predicted);
    if class >= probs.len() {
        return Err(CliError::Usage(format!(
            "--class {class} is outside the model's {} classes",
            probs.len()
        )));
    }
    let superpixels = slic_superpixels(&base, &settings.slic)?;
    let (attribution, heatmap) = match req.method {
        Method::Lime => {
            let e = lime_explain(&model, &base, &superpixels, class, &settings.baseline, &settings.lime)?;
            let heatmap = render_lime(&base, &superpixels, &e.highlight)?;
            (e.attribution, heatmap)
        }
        Method::Shap => {
            let a = kernel_shap(&model, &base, &superpixels, class, &settings.baseline, settings.samples, seed)?;
            let heatmap = render_shap(&base, &superpixels, &a.weights)?;
            (a, heatmap)
        }
    };
    let out_dir = req
        .out_dir
        .map(Path::to_path_buf)
        .unwrap_or_else(|| image_path.parent().unwrap_or(Path::new(".")).to_path_buf());
    create_dir(&out_dir)?;
    let stem = image_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".into());
    let ppm = out_dir.join(format!("{stem}.{}.ppm", req.method.tag()));
    write_image(&heatmap, &ppm)?;
    println!("{}", ppm.display());
    write_file(&out_dir.join(format!("{stem}.{}.csv", req.method.tag())), attribution.to_csv())?;
    eprintln!(
        "class {class} (p = {:.4}, predicted {predicted}); {} superpixels",
        probs[class], superpixels.count
    );
    Ok(())
}

fn read_optional(path: &Path) -> Result<Option<String>, CliError> {
    match fs::read_to_string(path) {
        Ok(text) => Ok(Some(text)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(CliError::Runtime(
            anyhow::Error::new(e).context(format!("reading {}", path.display())),
        )),
    }
}

pub fn report(run_dir: &Path, output: Option<&Path>) -> Result<(), CliError> {
    if !run_dir.is_dir() {
        return Err(CliError::Usage(format!("{} is not a directory", run_dir.display())));
    }
    let history = read_optional(&run_dir.join("history.csv"))?;
    let metrics = read_optional(&run_dir.join("metrics.csv"))?;
    let confusion = read_optional(&run_dir.join("confusion.csv"))?;
    let roc = read_optional(&run_dir.join("roc_points.csv"))?;
    let run = read_optional(&run_dir.join("run.json"))?;
    if history.is_none() && metrics.is_none() && confusion.is_none() {
        return Err(CliError::Usage(format!(
            "{} holds neither history.csv nor evaluation CSVs",
            run_dir.display()
        )));
    }
    let text = render_report(
        run_dir,
        run.as_deref(),
        history.as_deref(),
        metrics.as_deref(),
        confusion.as_deref(),
        roc.as_deref(),
    )?;
    let output = output
        .map(Path::to_path_buf)
        .unwrap_or_else(|| run_dir.join("report.txt"));
    write_file(&output, text)
}

fn render_report(
    run_dir: &Path,
    run: Option<&str>,
    history: Option<&str>,
    metrics: Option<&str>,
    confusion: Option<&str>,
    roc: Option<&str>,
) -> Result<String, CliError> {
    let mut out = String::new();
    let _ = writeln!(out, "Run report: {}", run_dir.display());
    if let Some(run) = run {
        let file: ConfigFile = serde_json::from_str(run).context("parsing run.json")?;
        let r = &file.run;
        let _ = writeln!(
            out,
            "model {:?}, optimizer {:?}, learning rate {}, batch {}, epochs {}, λ {}, seed {}",
            r.model.unwrap_or(crate::config::ModelKind::Rice),
            r.optimizer.unwrap_or(grainforge::optimizer::Algorithm::Adam),
            r.learning_rate.unwrap_or_default(),
            r.batch_size.unwrap_or_default(),
            r.epochs.unwrap_or_default(),
            r.lambda.unwrap_or_default(),
            r.seed.unwrap_or_default()
        );
    }
    if let Some(history) = history {
        let h = TrainingHistory::from_csv(history)?;
        let _ = writeln!(out, "\nTraining ({} epochs)", h.epochs.len());
        let _ = writeln!(out, "{:>5}  {:>10}  {:>9}  {:>8}  {:>7}", "epoch", "train_loss", "train_acc", "val_loss", "val_acc");
        let best = h.best_index();
        for (i, r) in h.epochs.iter().enumerate() {
            let _ = writeln!(
                out,
                "{:>5}  {:>10.4}  {:>9.4}  {:>8.4}  {:>7.4}{}",
                r.epoch,
                r.train_loss,
                r.train_acc,
                r.val_loss,
                r.val_acc,
                if Some(i) == best { "  <- best" } else { "" }
            );
        }
    }
    if let Some(metrics) = metrics {
        let _ = writeln!(out, "\nClassification report");
        let _ = writeln!(out, "{:<16} {:>9} {:>9} {:>9} {:>8}", "class", "precision", "recall", "f1", "support");
        for line in metrics.lines().skip(1).filter(|l| !l.is_empty()) {
            let cells: Vec<&str> = line.rsplitn(5, ',').collect();
            if cells.len() != 5 {
                return Err(CliError::Runtime(anyhow::anyhow!("malformed metrics row `{line}`")));
            }
            let _ = writeln!(
                out,
                "{:<16} {:>9} {:>9} {:>9} {:>8}",
                cells[4], cells[3], cells[2], cells[1], cells[0]
            );
        }
    }
    if let Some(confusion) = confusion {
        let (names, cm) = parse_confusion_csv(confusion)?;
        let width = names.iter().map(String::len).max().unwrap_or(0).max(6);
        let _ = writeln!(out, "\nConfusion matrix (rows: true, columns: predicted)");
        let _ = write!(out, "{:<width$}", "");
        for n in &names {
            let _ = write!(out, " {n:>width$}");
        }
        out.push('\n');
        for (t, n) in names.iter().enumerate() {
            let _ = write!(out, "{n:<width$}");
            for p in 0..names.len() {
                let _ = write!(out, " {:>width$}", cm.get(t, p));
            }
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "accuracy {:.4} over {} samples",
            grainforge::metrics::accuracy(&cm),
            cm.total()
        );
    }
    if let Some(auc) = roc
        .and_then(|r| r.lines().rev().find(|l| l.starts_with("auc,")))
        .and_then(|l| l.strip_prefix("auc,"))
    {
        let _ = writeln!(out, "micro-average ROC AUC {auc}");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use grainforge::metrics::{class_report, ConfusionMatrix};

    #[test]
    fn perfect_predictions_score_one() {
        let labels = vec![0, 1, 2, 1, 0, 2];
        let confusion = ConfusionMatrix::from_pairs(3, &labels, &labels).unwrap();
        let eval = Evaluation {
            report: class_report(&confusion),
            confusion,
            loss: 0.0,
            accuracy: 1.0,
            probabilities: labels
                .iter()
                .map(|&l| (0..3).map(|k| if k == l { 1.0 } else { 0.0 }).collect())
                .collect(),
            labels: labels.clone(),
            predictions: labels,
        };
        let dir = tempfile::tempdir().unwrap();
        let names: Vec<String> = ["a", "b", "c"].map(String::from).to_vec();
        write_evaluation(dir.path(), &names, &eval).unwrap();
        let metrics = fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
        for line in metrics.lines().skip(1) {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!(&cells[1..4], ["1.000000"; 3], "{line}");
        }
        let roc = fs::read_to_string(dir.path().join("roc_points.csv")).unwrap();
        assert!(roc.ends_with("auc,1.000000\n"));
        let (_, cm) = parse_confusion_csv(&fs::read_to_string(dir.path().join("confusion.csv")).unwrap()).unwrap();
        assert_eq!(cm.total(), 6);
        assert_eq!(cm.trace(), 6);
    }

    #[test]
    fn manifest_paths_use_forward_slashes() {
        let root = Path::new("/data");
        assert_eq!(manifest_path(&root.join("a").join("b.ppm"), root), "a/b.ppm");
        assert!(is_image(Path::new("x.PPM")));
        assert!(!is_image(Path::new("x.jpg")));
    }
}
