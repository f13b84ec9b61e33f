use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::autoencoder::{
    grid_search, history_csv, train, Checkpoint, Grid, TrainConfig, TrainData, TrainOutcome,
};
use crate::baselines::{fastica, identity_baseline, FastIcaConfig, Nonlinearity};
use crate::cli::config::{
    CompareConfig, EvalConfig, ExperimentConfig, GenConfig, GenKind, TrainRunConfig, CONFIG_FILE,
};
use crate::datagen::images::{list_images, load_images};
use crate::datagen::{
    default_replications, make_image_dataset, make_image_replication, make_synthetic_with, procedural_corpus, Dataset,
    DatasetKind, MixingKind, SyntheticSpec, META_FILE,
};
use crate::error::{Error, Result};
use crate::evaluation::{eval_latents, BASELINE_METHOD, summarize, training_curves_csv, EvalReport, ReportRow};
use crate::math::csv::read_csv;
use crate::math::{Matrix, Rng};

pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const FINAL_STATE_FILE: &str = "final.json";
pub const HISTORY_FILE: &str = "history.csv";
pub const CURVES_FILE: &str = "curves.csv";
pub const GRID_FILE: &str = "grid.csv";
pub const DIVERGED_FILE: &str = "diverged_checkpoint.json";
pub const REPORT_FILE: &str = "report.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const TABLES_FILE: &str = "tables.txt";
/// Wall-clock timings. The only output that differs between identical runs.
pub const TIMING_FILE: &str = "timing.json";

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_timing(dir: &Path, timings: &BTreeMap<String, f64>) -> Result<()> {
    let mut s = serde_json::to_string_pretty(timings)?;
    s.push('\n');
    write(&dir.join(TIMING_FILE), &s)
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} workers: {e}")))
}

/// Runs a command described by `cfg`, writing everything under `out`.
pub fn execute(cfg: &ExperimentConfig, out: &Path, jobs: usize) -> Result<()> {
    create_dir(out)?;
    write(&out.join(CONFIG_FILE), &cfg.to_json()?)?;
    match cfg {
        ExperimentConfig::Gen(c) => cmd_gen(c, out, jobs),
        ExperimentConfig::Train(c) => cmd_train(c, out, jobs),
        ExperimentConfig::Eval(c) => cmd_eval(c, out, jobs),
        ExperimentConfig::Compare(c) => cmd_compare(c, out),
    }
}

fn print_checksums(dir: &Path, sums: &BTreeMap<String, String>) {
    println!("{}", dir.display());
    for (file, sum) in sums {
        println!("  {sum}  {file}");
    }
}

pub fn cmd_gen(cfg: &GenConfig, out: &Path, jobs: usize) -> Result<()> {
    match cfg.kind {
        GenKind::NonlinearSynthetic | GenKind::LinearSynthetic => {
            let mixing = if cfg.kind == GenKind::NonlinearSynthetic {
                MixingKind::Nonlinear
            } else {
                MixingKind::Linear
            };
            let spec = SyntheticSpec {
                n: cfg.n,
                normalize: cfg.normalize,
                ..SyntheticSpec::default()
            };
            let ds = make_synthetic_with(mixing, &spec, cfg.seed)?;
            let sums = ds.save(out)?;
            print_checksums(out, &sums);
        }
        GenKind::Image => {
            let dim = cfg
                .dim
                .ok_or_else(|| Error::Config("image datasets need a dimension".into()))?;
            let images = match &cfg.images {
                Some(dir) => load_images(&list_images(dir)?)?,
                None => procedural_corpus(),
            };
            let reps = match cfg.replications {
                Some(r) => r,
                None => default_replications(dim)
                    .ok_or_else(|| Error::Config(format!("no default replication count for {dim}")))?,
            };
            let datasets = if jobs > 1 {
                use rayon::prelude::*;
                pool(jobs)?.install(|| {
                    (0..reps)
                        .into_par_iter()
                        .map(|r| make_image_replication(&images, dim, cfg.mixing, cfg.seed, r))
                        .collect::<Result<Vec<Dataset>>>()
                })?
            } else {
                make_image_dataset(&images, dim, cfg.mixing, cfg.seed, reps)?
            };
            for (r, ds) in datasets.iter().enumerate() {
                let dir = out.join(format!("rep{r:03}"));
                let sums = ds.save(&dir)?;
                print_checksums(&dir, &sums);
            }
        }
    }
    Ok(())
}

/// A dataset directory, or every dataset directory directly below `data`.
pub fn discover_datasets(data: &Path) -> Result<Vec<(String, PathBuf)>> {
    let name_of = |p: &Path| {
        p.file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into())
    };
    if data.join(META_FILE).is_file() {
        let canonical = data.canonicalize().unwrap_or_else(|_| data.to_path_buf());
        return Ok(vec![(name_of(&canonical), data.to_path_buf())]);
    }
    if !data.is_dir() {
        return Err(Error::io(
            data,
            std::io::Error::new(std::io::ErrorKind::NotFound, "dataset directory not found"),
        ));
    }
    let mut found = Vec::new();
    for entry in std::fs::read_dir(data).map_err(|e| Error::io(data, e))? {
        let path = entry.map_err(|e| Error::io(data, e))?.path();
        if path.join(META_FILE).is_file() {
            found.push((name_of(&path), path));
        }
    }
    if found.is_empty() {
        return Err(Error::Config(format!("no dataset found under {}", data.display())));
    }
    found.sort();
    Ok(found)
}

/// Output directory for one dataset: `out` itself when `data` is a single
/// dataset, `out/<name>` otherwise.
fn dataset_out(out: &Path, data: &Path, name: &str) -> PathBuf {
    if data.join(META_FILE).is_file() {
        out.to_path_buf()
    } else {
        out.join(name)
    }
}

fn cell_label(c: &TrainConfig) -> String {
    format!("lr{}_bw{}_batch{}", c.learning_rate, c.bandwidth_multiplier, c.batch_size)
}

fn write_training_outputs(
    dir: &Path,
    cfg: &TrainConfig,
    outcome: &TrainOutcome,
    curves: &str,
) -> Result<()> {
    Checkpoint::from_model(&outcome.best_model, outcome.best_iteration, cfg)
        .save(&dir.join(CHECKPOINT_FILE))?;
    Checkpoint::from_state(&outcome.final_state, cfg).save(&dir.join(FINAL_STATE_FILE))?;
    write(&dir.join(HISTORY_FILE), &history_csv(&outcome.final_state.history))?;
    write(&dir.join(CURVES_FILE), curves)
}

fn train_one(cfg: &TrainRunConfig, data_dir: &Path, dir: &Path, jobs: usize) -> Result<String> {
    create_dir(dir)?;
    let ds = Dataset::load(data_dir)?;
    let x_train = ds.train_observations()?;
    let x_val = ds.validation_observations()?;
    let y_val = ds.validation_sources()?;
    let data = TrainData {
        train: &x_train,
        validation: &x_val,
        validation_sources: y_val.as_ref(),
    };
    let started = Instant::now();
    let result = match &cfg.grid {
        Some(text) => {
            let grid = Grid::parse(text)?;
            grid_search(&data, &grid, &cfg.train, jobs).map(|mut g| {
                let mut table = String::from("learning_rate,bandwidth_multiplier,batch_size,best_iteration,best_score,selected\n");
                let mut runs = Vec::new();
                for (i, c) in g.cells.iter().enumerate() {
                    table.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        c.config.learning_rate,
                        c.config.bandwidth_multiplier,
                        c.config.batch_size,
                        c.outcome.best_iteration,
                        c.outcome.best_score,
                        i == g.best
                    ));
                    runs.push((cell_label(&c.config), c.outcome.final_state.history.clone()));
                }
                let refs: Vec<(&str, &[_])> = runs.iter().map(|(l, h)| (l.as_str(), h.as_slice())).collect();
                let best = g.cells.swap_remove(g.best);
                (best.config, best.outcome, training_curves_csv(&refs), Some(table))
            })
        }
        None => train(&data, &cfg.train).map(|o| {
            let curves = training_curves_csv(&[(&cell_label(&cfg.train), &o.final_state.history)]);
            (cfg.train.clone(), o, curves, None)
        }),
    };
    let (best_cfg, outcome, curves, table) = match result {
        Ok(r) => r,
        Err(Error::Diverged {
            iteration,
            reason,
            last_finite,
        }) => {
            let dump = dir.join(DIVERGED_FILE);
            last_finite.save(&dump)?;
            return Err(Error::NonFinite(format!(
                "training on {} diverged at iteration {iteration} ({reason}); last finite state written to {}",
                data_dir.display(),
                dump.display()
            )));
        }
        Err(e) => return Err(e),
    };
    write_training_outputs(dir, &best_cfg, &outcome, &curves)?;
    if let Some(t) = table {
        write(&dir.join(GRID_FILE), &t)?;
    }
    let secs = started.elapsed().as_secs_f64();
    write_timing(dir, &BTreeMap::from([("train_seconds".to_string(), secs)]))?;
    Ok(format!(
        "{}: best iteration {} (score {:.6e})",
        dir.display(),
        outcome.best_iteration,
        outcome.best_score
    ))
}

pub fn cmd_train(cfg: &TrainRunConfig, out: &Path, jobs: usize) -> Result<()> {
    let datasets = discover_datasets(&cfg.data)?;
    let messages: Vec<Result<String>> = if datasets.len() > 1 && jobs > 1 {
        use rayon::prelude::*;
        pool(jobs)?.install(|| {
            datasets
                .par_iter()
                .map(|(name, path)| train_one(cfg, path, &dataset_out(out, &cfg.data, name), 1))
                .collect()
        })
    } else {
        datasets
            .iter()
            .map(|(name, path)| train_one(cfg, path, &dataset_out(out, &cfg.data, name), jobs))
            .collect()
    };
    for m in messages {
        println!("{}", m?);
    }
    Ok(())
}

/// Grouping key for reports: replications of one experiment share it.
pub fn group_of(ds: &Dataset) -> String {
    match ds.meta.kind {
        DatasetKind::NonlinearSynthetic | DatasetKind::LinearSynthetic => ds.meta.kind.as_str().into(),
        DatasetKind::ImageNonlinear | DatasetKind::ImageLinear => {
            format!("{}-d{}", ds.meta.kind.as_str(), ds.meta.obs_dim)
        }
    }
}

fn find_checkpoint(root: &Path, dataset: &str) -> Result<PathBuf> {
    let candidates = [
        root.join(dataset).join(CHECKPOINT_FILE),
        root.join(CHECKPOINT_FILE),
        root.to_path_buf(),
    ];
    candidates
        .into_iter()
        .find(|p| p.is_file())
        .ok_or_else(|| {
            Error::io(
                root,
                std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    format!("no {CHECKPOINT_FILE} for dataset {dataset}"),
                ),
            )
        })
}

fn fastica_name(g: Nonlinearity) -> String {
    let tag = match g {
        Nonlinearity::Logcosh => "logcosh",
        Nonlinearity::Exp => "exp",
        Nonlinearity::Kurtosis => "kurtosis",
    };
    format!("fastica-{tag}")
}

/// Report rows plus per-method timings for one dataset.
type DatasetEval = (Vec<ReportRow>, Vec<(String, f64)>);

fn eval_dataset(cfg: &EvalConfig, name: &str, path: &Path) -> Result<DatasetEval> {
    let ds = Dataset::load(path)?;
    let group = group_of(&ds);
    let x = ds.test_observations()?;
    let y = ds.test_sources()?;
    let mut rows = Vec::new();
    let mut timings = Vec::new();
    let source_dim = || {
        ds.meta
            .source_dim
            .ok_or_else(|| Error::Config(format!("dataset {name} has no source dimension")))
    };
    for m in &cfg.models {
        let t = Instant::now();
        let ck = Checkpoint::load(&find_checkpoint(&m.path, name)?)?;
        let model = ck.model()?;
        let z = model.encode(&x)?;
        let xhat = model.decode(&z)?;
        let metrics = eval_latents(y.as_ref(), &z, Some((&x, &xhat)))?;
        rows.push(ReportRow::new(&m.name, name, &group, ck.config.seed, &metrics));
        timings.push((format!("{name}/{}", m.name), t.elapsed().as_secs_f64()));
    }
    if !cfg.fastica.is_empty() {
        let x_train = ds.train_observations()?;
        let d = source_dim()?;
        for &g in &cfg.fastica {
            let t = Instant::now();
            let fc = FastIcaConfig {
                nonlinearity: g,
                max_iter: cfg.fastica_max_iter,
                ..FastIcaConfig::default()
            };
            let fit = fastica(&x_train, d, &fc, &mut Rng::substream(cfg.fastica_seed, "fastica"))?;
            if !fit.converged {
                log::warn!("FastICA ({g:?}) did not converge on {name} in {} iterations", fit.iterations);
            }
            let s = fit.transform(&x)?;
            let metrics = eval_latents(y.as_ref(), &s, None)?;
            let method = fastica_name(g);
            rows.push(ReportRow::new(&method, name, &group, cfg.fastica_seed, &metrics));
            timings.push((format!("{name}/{method}"), t.elapsed().as_secs_f64()));
        }
    }
    if cfg.baseline {
        let b = identity_baseline(&x, source_dim()?)?;
        let metrics = eval_latents(y.as_ref(), &b, None)?;
        rows.push(ReportRow::new(BASELINE_METHOD, name, &group, 0, &metrics));
    }
    for imp in &cfg.imports {
        let file = imp.path.join(format!("{name}.csv"));
        let s: Matrix = read_csv(&file)?;
        if s.rows() != x.rows() {
            return Err(Error::Dimension(format!(
                "{} has {} rows, test split has {}",
                file.display(),
                s.rows(),
                x.rows()
            )));
        }
        let metrics = eval_latents(y.as_ref(), &s, None)?;
        rows.push(ReportRow::new(&imp.name, name, &group, 0, &metrics));
    }
    Ok((rows, timings))
}

pub fn cmd_eval(cfg: &EvalConfig, out: &Path, jobs: usize) -> Result<()> {
    let datasets = discover_datasets(&cfg.data)?;
    let results: Vec<Result<DatasetEval>> = if jobs > 1 {
        use rayon::prelude::*;
        pool(jobs)?.install(|| {
            datasets
                .par_iter()
                .map(|(name, path)| eval_dataset(cfg, name, path))
                .collect()
        })
    } else {
        datasets
            .iter()
            .map(|(name, path)| eval_dataset(cfg, name, path))
            .collect()
    };
    let mut report = EvalReport::default();
    let mut timings = BTreeMap::new();
    for r in results {
        let (rows, t) = r?;
        report.rows.extend(rows);
        timings.extend(t);
    }
    report.write(&out.join(REPORT_FILE))?;
    let summary = summarize(&report, &[])?;
    write(&out.join(SUMMARY_FILE), &summary.to_json()?)?;
    let tables = summary.render_tables();
    write(&out.join(TABLES_FILE), &tables)?;
    write_timing(out, &timings)?;
    print!("{tables}");
    Ok(())
}

pub fn cmd_compare(cfg: &CompareConfig, out: &Path) -> Result<()> {
    let reports = cfg
        .reports
        .iter()
        .map(|p| EvalReport::read(p))
        .collect::<Result<Vec<_>>>()?;
    let merged = EvalReport::merge(reports);
    let present = merged.methods();
    if let Some(missing) = cfg.require.iter().find(|m| !present.contains(m)) {
        return Err(Error::Config(format!("method {missing} is missing from every report")));
    }
    let summary = summarize(&merged, &cfg.require)?;
    merged.write(&out.join(REPORT_FILE))?;
    write(&out.join(SUMMARY_FILE), &summary.to_json()?)?;
    let tables = summary.render_tables();
    write(&out.join(TABLES_FILE), &tables)?;
    print!("{tables}");
    Ok(())
}
