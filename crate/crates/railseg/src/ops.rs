//! Dataset-level pipeline steps. Each reads and writes only through the
//! manifest of an opened [`Dataset`] and persists the manifest before
//! returning.

use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use railseg_core::active::{select_for_labeling, SelectionResult};
use railseg_core::metrics::ConfusionMatrix;
use railseg_core::preprocess::{compose_masks, filter_reflections, motion_correct, remove_outliers, sync_pairs, MotionParams};
use railseg_core::synth::{synth_scene, CameraRig, SynthSceneConfig};
use railseg_core::transfer::{apply_corrections, label_status, transfer_labels, Correction, CorrectionSet, LabelStatus};
use railseg_core::{LabelArray, PredictionMatrix, N_CLASSES};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Purpose};
use crate::manifest::{DatasetManifest, ImageEntry, ScanEntry, ScanStatus};
use crate::report::EvaluationReport;
use crate::{io, Error, Result};

fn rel(parts: &[&str]) -> PathBuf {
    parts.iter().collect()
}

fn cloud_len(ds: &Dataset, scan: &ScanEntry) -> Result<usize> {
    let path = ds.path(&scan.cloud);
    let meta = std::fs::metadata(&path).map_err(|e| Error::io(&path, e))?;
    Ok(meta.len() as usize / railseg_core::cloud::RECORD_SIZE)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthOptions {
    pub seed: u64,
    pub scans: usize,
    /// The last `test_scans` scans form the TEST split.
    pub test_scans: usize,
    pub camera: CameraRig,
    pub speed: f64,
    /// Also write simulated network predictions.
    pub predictions: bool,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            seed: 42,
            scans: 4,
            test_scans: 1,
            camera: CameraRig::default(),
            speed: 20.0,
            predictions: false,
        }
    }
}

/// Softmax rows that favour the true class with a per-scan confidence, so
/// scans differ in entropy and uncertainty.
fn simulated_predictions(scan_id: &str, gt: &LabelArray, rng: &mut ChaCha8Rng) -> Result<PredictionMatrix> {
    let confidence: f64 = rng.gen_range(0.5..6.0);
    let mut probs = Vec::with_capacity(gt.len() * N_CLASSES);
    for class in gt.classes() {
        let target = class.index().unwrap_or_else(|| rng.gen_range(0..N_CLASSES));
        let logits: Vec<f64> = (0..N_CLASSES)
            .map(|c| rng.gen_range(0.0..2.0) + if c == target { confidence } else { 0.0 })
            .collect();
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let sum: f64 = exp.iter().sum();
        probs.extend(exp.iter().map(|e| (e / sum) as f32));
    }
    Ok(PredictionMatrix::new(scan_id, probs)?)
}

/// Generates a synthetic dataset under `out`: raw clouds (motion-distorted,
/// with housing reflections), label images, ground-truth labels in `gt/`
/// and optionally predictions. Scans are 250 ms apart; each image is taken
/// within a few milliseconds of its scan.
pub fn synth_dataset(out: &Path, opts: &SynthOptions) -> Result<Dataset> {
    if opts.scans == 0 || opts.test_scans > opts.scans {
        return Err(Error::Invalid("need at least one scan and no more TEST scans than scans".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
    let mut manifest = DatasetManifest::default();
    let mut writes: Vec<(PathBuf, Vec<u8>)> = Vec::new();
    for i in 0..opts.scans {
        let cfg = SynthSceneConfig {
            speed: opts.speed,
            camera: opts.camera,
            ..SynthSceneConfig::with_seed(opts.seed.wrapping_add(i as u64))
        };
        let scene = synth_scene(&cfg)?;
        let scan_id = format!("scan-{i:04}");
        let image_id = format!("img-{i:04}");
        let t_scan = 1000.0 + 0.25 * i as f64;
        let cloud = railseg_core::PointCloud::new(scan_id.clone(), t_scan, scene.distorted.points.clone());
        let gt = LabelArray::new(scan_id.clone(), scene.labels.labels.clone());

        let cloud_path = rel(&["clouds", &format!("{scan_id}.bin")]);
        writes.push((cloud_path.clone(), cloud.encode()?));
        let image_path = rel(&["images", &format!("{image_id}.pgm")]);
        writes.push((image_path.clone(), scene.label_image.to_pgm()));
        writes.push((rel(&["gt", &format!("{scan_id}.bin")]), gt.encode()?));

        let status = if i >= opts.scans - opts.test_scans {
            ScanStatus::Test
        } else {
            ScanStatus::Raw
        };
        let mut entry = ScanEntry::new(&scan_id, cloud_path, t_scan, opts.speed, status);
        if opts.predictions {
            let pred = simulated_predictions(&scan_id, &gt, &mut rng)?;
            let p = rel(&["predictions", &format!("{scan_id}.pred")]);
            writes.push((p.clone(), pred.encode()));
            entry.predictions = Some(p);
        }
        manifest.images.push(ImageEntry {
            image_id,
            path: image_path,
            t_image: t_scan + rng.gen_range(-0.006..0.006),
        });
        manifest.calibration = Some(scene.calibration);
        manifest.register_scan(entry)?;
    }
    for (p, bytes) in writes {
        io::write_atomic(&out.join(p), &bytes)?;
    }
    Dataset::create(out.join("manifest.json"), manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessSummary {
    pub scan_id: String,
    pub points_in: usize,
    pub after_reflections: usize,
    pub points_out: usize,
}

/// Reflection and outlier filtering of every RAW scan that has not been
/// filtered yet. TEST scans keep their recorded clouds, since their labels
/// index them. Predictions, when present, are filtered with the same mask.
pub fn preprocess(ds: &mut Dataset, min_range: f64, k: usize, alpha: f64) -> Result<Vec<PreprocessSummary>> {
    let mut out = Vec::new();
    let ids: Vec<String> = ds
        .manifest
        .scans
        .iter()
        .filter(|s| s.status == ScanStatus::Raw && s.mask.is_none())
        .map(|s| s.scan_id.clone())
        .collect();
    for id in ids {
        let scan = ds.manifest.scan(&id)?.clone();
        let src = ds.path(&scan.cloud);
        let cloud = io::load_cloud(&src, &id, scan.t_scan)?;
        let (no_refl, m1) = filter_reflections(&cloud, min_range).map_err(|e| Error::format(&src, e))?;
        let (clean, m2) = remove_outliers(&no_refl, k, alpha).map_err(|e| Error::format(&src, e))?;
        let mask = compose_masks(&m1, &m2)?;

        let cloud_rel = rel(&["processed", &format!("{id}.bin")]);
        let mask_rel = rel(&["masks", &format!("{id}.mask")]);
        io::save_cloud(&clean, &ds.path(&cloud_rel))?;
        io::save_mask(&mask, &ds.path(&mask_rel))?;
        let mut pred_rel = scan.predictions.clone();
        if let Some(p) = &scan.predictions {
            let pred = io::load_predictions(&ds.path(p), &id)?;
            pred.check_aligned(cloud.len()).map_err(|e| Error::format(ds.path(p), e))?;
            let new_rel = rel(&["processed", &format!("{id}.pred")]);
            io::save_predictions(&pred.select(&mask)?, &ds.path(&new_rel))?;
            pred_rel = Some(new_rel);
        }
        let entry = ds.manifest.scan_mut(&id)?;
        entry.cloud = cloud_rel;
        entry.mask = Some(mask_rel);
        entry.predictions = pred_rel;
        out.push(PreprocessSummary {
            scan_id: id,
            points_in: cloud.len(),
            after_reflections: no_refl.len(),
            points_out: clean.len(),
        });
    }
    ds.save()?;
    Ok(out)
}

/// Pairs every scan with at most one image under the time gate and records
/// the image id on the scan.
pub fn sync(ds: &mut Dataset, max_dt: f64) -> Result<Vec<railseg_core::preprocess::SyncPair>> {
    if !(max_dt > 0.0 && max_dt.is_finite()) {
        return Err(Error::Invalid("max_dt must be positive".into()));
    }
    let scans: Vec<(String, f64)> = ds.manifest.scans.iter().map(|s| (s.scan_id.clone(), s.t_scan)).collect();
    let images: Vec<(String, f64)> = ds.manifest.images.iter().map(|i| (i.image_id.clone(), i.t_image)).collect();
    let pairs = sync_pairs(&scans, &images, max_dt);
    for s in &mut ds.manifest.scans {
        s.image_id = pairs.iter().find(|p| p.scan_id == s.scan_id).map(|p| p.image_id.clone());
    }
    ds.manifest.sync_pairs = pairs.clone();
    ds.save()?;
    Ok(pairs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpeedSource {
    /// Each scan's `v_current`.
    Manifest,
    Constant(f64),
}

/// Deskews every RAW scan once.
pub fn motion_correct_all(ds: &mut Dataset, source: SpeedSource) -> Result<Vec<String>> {
    let ids: Vec<String> = ds
        .manifest
        .scans
        .iter()
        .filter(|s| s.status == ScanStatus::Raw && !s.motion_corrected)
        .map(|s| s.scan_id.clone())
        .collect();
    for id in &ids {
        let scan = ds.manifest.scan(id)?.clone();
        let speed = match source {
            SpeedSource::Manifest => scan.v_current,
            SpeedSource::Constant(v) => v,
        };
        let params = MotionParams::new(speed, scan.travel_dir)?;
        let cloud = io::load_cloud(&ds.path(&scan.cloud), id, scan.t_scan)?;
        let dst = rel(&["deskewed", &format!("{id}.bin")]);
        io::save_cloud(&motion_correct(&cloud, &params), &ds.path(&dst))?;
        let entry = ds.manifest.scan_mut(id)?;
        entry.cloud = dst;
        entry.motion_corrected = true;
    }
    ds.save()?;
    Ok(ids)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferSummary {
    pub transferred: Vec<(String, LabelStatus)>,
    /// RAW scans left alone because no image is paired with them.
    pub without_image: Vec<String>,
}

/// Projects the paired label image onto every RAW scan, stores the labels
/// and moves the scan to COARSE.
pub fn transfer(ds: &mut Dataset) -> Result<TransferSummary> {
    let calib = ds
        .manifest
        .calibration
        .ok_or_else(|| Error::Manifest("no calibration block".into()))?;
    let mut summary = TransferSummary {
        transferred: Vec::new(),
        without_image: Vec::new(),
    };
    let ids: Vec<String> = ds
        .manifest
        .scans
        .iter()
        .filter(|s| s.status == ScanStatus::Raw)
        .map(|s| s.scan_id.clone())
        .collect();
    for id in ids {
        let scan = ds.manifest.scan(&id)?.clone();
        let Some(image_id) = &scan.image_id else {
            summary.without_image.push(id);
            continue;
        };
        let image = ds
            .manifest
            .image(image_id)
            .ok_or_else(|| Error::Manifest(format!("unknown image `{image_id}`")))?;
        let image = io::load_label_image(&ds.path(&image.path), &ds.manifest.class_map)?;
        let cloud = io::load_cloud(&ds.path(&scan.cloud), &id, scan.t_scan)?;
        let labels = transfer_labels(&cloud, &image, &calib)?;
        let coarse = rel(&["labels", "coarse", &format!("{id}.bin")]);
        let current = rel(&["labels", &format!("{id}.bin")]);
        io::save_labels(&labels, &ds.path(&coarse))?;
        io::save_labels(&labels, &ds.path(&current))?;
        let entry = ds.manifest.scan_mut(&id)?;
        entry.coarse_labels = Some(coarse);
        entry.labels = Some(current);
        ds.manifest.set_status(&id, ScanStatus::Coarse)?;
        summary.transferred.push((id, label_status(&labels)));
    }
    ds.save()?;
    Ok(summary)
}

/// Default candidate filter: COARSE scans without any corrected point.
/// TEST scans are never candidates and their labels are never read here.
pub fn selection_candidates(ds: &Dataset) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for s in &ds.manifest.scans {
        if s.status != ScanStatus::Coarse {
            continue;
        }
        let labels = ds.read_labels(&s.scan_id, Purpose::Selection, None)?;
        if label_status(&labels).corrected_count == 0 {
            out.push(s.scan_id.clone());
        }
    }
    Ok(out)
}

/// One active-learning round: score candidates from their prediction files,
/// flag the chosen scans PENDING_ANNOTATION and append the round to the
/// manifest. `iteration` defaults to one past the latest round.
pub fn select(ds: &mut Dataset, n: usize, iteration: Option<u32>) -> Result<SelectionResult> {
    let last = ds.manifest.al_iterations.iter().map(|r| r.iteration).max();
    let iteration = match iteration {
        Some(i) if last.is_some_and(|l| i <= l) => {
            return Err(Error::Invalid(format!("iteration {i} is not after the latest round {}", last.unwrap_or(0))))
        }
        Some(i) => i,
        None => last.map_or(1, |l| l + 1),
    };
    let candidates = selection_candidates(ds)?;
    if candidates.is_empty() {
        return Err(Error::Invalid("no candidate scans (COARSE without corrections)".into()));
    }
    let missing: Vec<String> = candidates
        .iter()
        .filter(|id| {
            ds.manifest
                .scan(id)
                .ok()
                .and_then(|s| s.predictions.as_ref())
                .is_none_or(|p| !ds.path(p).is_file())
        })
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingPredictions(missing));
    }
    let mut preds = Vec::with_capacity(candidates.len());
    for id in &candidates {
        let scan = ds.manifest.scan(id)?;
        let path = ds.path(scan.predictions.as_ref().expect("checked above"));
        let pred = io::load_predictions(&path, id)?;
        pred.check_aligned(cloud_len(ds, scan)?).map_err(|e| Error::format(&path, e))?;
        preds.push(pred);
    }
    let result = select_for_labeling(&preds, n, iteration)?;
    for id in &result.selected {
        ds.manifest.set_status(id, ScanStatus::PendingAnnotation)?;
    }
    ds.manifest.al_iterations.push(result.clone());
    ds.save()?;
    Ok(result)
}

fn read_correction_log(path: &Path, scan_id: &str) -> Result<CorrectionSet> {
    let mut set = CorrectionSet::new(scan_id);
    if !path.exists() {
        return Ok(set);
    }
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let c: Correction = serde_json::from_str(&line).map_err(|source| Error::Json {
            path: path.into(),
            source,
        })?;
        set.entries.push(c);
    }
    Ok(set)
}

/// Appends a batch of corrections to the scan's log (synced to disk before
/// anything else changes), then rebuilds the current labels from the coarse
/// labels and the whole log.
pub fn submit_corrections(ds: &mut Dataset, scan_id: &str, batch: &CorrectionSet) -> Result<LabelStatus> {
    ds.check_label_access(scan_id, Purpose::Annotation)?;
    let scan = ds.manifest.scan(scan_id)?.clone();
    if !batch.scan_id.is_empty() && batch.scan_id != scan_id {
        return Err(Error::Invalid(format!("correction set is for `{}`, not `{scan_id}`", batch.scan_id)));
    }
    let coarse_rel = scan.coarse_labels.as_ref().ok_or_else(|| Error::Missing {
        scan_id: scan_id.into(),
        what: "transferred labels",
    })?;
    let coarse = io::load_labels(&ds.path(coarse_rel), scan_id, None)?;
    batch.validate(coarse.len())?;

    let log_rel = scan
        .corrections
        .clone()
        .unwrap_or_else(|| rel(&["corrections", &format!("{scan_id}.jsonl")]));
    let log_path = ds.path(&log_rel);
    if let Some(dir) = log_path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut buf = Vec::new();
    for c in &batch.entries {
        serde_json::to_writer(&mut buf, c).map_err(|source| Error::Json {
            path: log_path.clone(),
            source,
        })?;
        buf.push(b'\n');
    }
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&log_path)
        .map_err(|e| Error::io(&log_path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(&log_path, e))?;
    f.sync_all().map_err(|e| Error::io(&log_path, e))?;

    let log = read_correction_log(&log_path, scan_id)?;
    let labels = apply_corrections(&coarse, &log)?;
    let labels_rel = scan
        .labels
        .clone()
        .unwrap_or_else(|| rel(&["labels", &format!("{scan_id}.bin")]));
    io::save_labels(&labels, &ds.path(&labels_rel))?;
    if scan.corrections.is_none() || scan.labels.is_none() {
        let entry = ds.manifest.scan_mut(scan_id)?;
        entry.corrections = Some(log_rel);
        entry.labels = Some(labels_rel);
        ds.save()?;
    }
    Ok(label_status(&labels))
}

/// Marks an annotated scan as done.
pub fn complete_scan(ds: &mut Dataset, scan_id: &str) -> Result<()> {
    ds.manifest.set_status(scan_id, ScanStatus::Corrected)?;
    ds.save()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    /// Only TEST scans.
    Test,
    All,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluateOptions {
    pub pred_dir: PathBuf,
    pub gt_dir: PathBuf,
    pub split: Split,
    pub run_name: Option<String>,
    /// Earlier reports to compare against, by name.
    pub baselines: Vec<(String, PathBuf)>,
}

/// Scores `<pred_dir>/<scan_id>.bin` against `<gt_dir>/<scan_id>.bin` over
/// the chosen split. The report is kept under `reports/` and becomes the
/// manifest's latest report.
pub fn evaluate(ds: &mut Dataset, opts: &EvaluateOptions) -> Result<EvaluationReport> {
    let scans: Vec<String> = ds
        .manifest
        .scans
        .iter()
        .filter(|s| opts.split == Split::All || s.status == ScanStatus::Test)
        .map(|s| s.scan_id.clone())
        .collect();
    if scans.is_empty() {
        return Err(Error::Invalid("no scans to evaluate in the chosen split".into()));
    }
    let file = |dir: &Path, id: &str| dir.join(format!("{id}.bin"));
    let missing: Vec<String> = scans
        .iter()
        .filter(|id| !file(&opts.gt_dir, id).is_file() || !file(&opts.pred_dir, id).is_file())
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(Error::Invalid(format!(
            "missing prediction or ground-truth labels for: {}",
            missing.join(", ")
        )));
    }
    let mut cm = ConfusionMatrix::new();
    for id in &scans {
        let gt = ds.read_label_file(id, &file(&opts.gt_dir, id), Purpose::Evaluation)?;
        let pred_path = file(&opts.pred_dir, id);
        let pred = io::load_labels(&pred_path, id, Some(gt.len()))?;
        cm.accumulate_labels(&pred, &gt).map_err(|e| Error::format(&pred_path, e))?;
    }
    let mut report = EvaluationReport::new(opts.run_name.clone(), scans, &cm)?;
    for (name, path) in &opts.baselines {
        let base: EvaluationReport = io::load_json(path)?;
        report.compare_with(name, &base)?;
    }
    let stored = rel(&["reports", "latest.json"]);
    io::save_json(&report, &ds.path(&stored))?;
    ds.manifest.metrics_report = Some(stored);
    ds.save()?;
    Ok(report)
}
