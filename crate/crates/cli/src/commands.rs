use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use adl_core::experiment::{
    evaluate, project_rows, report, run_grid, split_seed, stratified_split, train, CellKey, GridConfig,
    Normalization, TrainingBudget, DEFAULT_TEST_FRACTION, DESK_BUDGETS,
};
use adl_core::features::{featurize, DatasetVariant, FeatureSettings};
use adl_core::ingest::{parse_capture, read_feature_table, serialize_capture, validate_capture, write_feature_table};
use adl_core::nn::{check_random_trials, load_model, save_model, NetworkSpec, Preset, GRAD_CHECK_TOLERANCE};
use adl_core::synth::{generate_corpus, SynthParams};
use adl_core::{Capture, FeatureVector, Model};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::{
    Command, EvalArgs, FeatureFlags, FeaturizeArgs, GradcheckArgs, GridArgs, SplitFlags, SynthArgs, TrainArgs,
};

const DEFAULT_PER_CLASS: usize = 200;

pub fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Synth(a) => cmd_synth(a),
        Command::Featurize(a) => cmd_featurize(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Grid(a) => cmd_grid(a),
        Command::Gradcheck(a) => cmd_gradcheck(a),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

fn feature_settings(cfg: &RunConfig, f: &FeatureFlags) -> Result<FeatureSettings, CliError> {
    let d = FeatureSettings::default();
    Ok(FeatureSettings {
        alpha: cfg.get_or(f.alpha, "alpha", d.alpha)?,
        min_separation_ms: cfg.get_or(f.min_separation_ms, "min_separation_ms", d.min_separation_ms)?,
        prominence_floor: cfg.get_or(f.prominence_floor, "prominence_floor", d.prominence_floor)?,
    })
}

fn check_fraction(f: f64) -> Result<f64, CliError> {
    if f > 0.0 && f < 1.0 {
        Ok(f)
    } else {
        Err(CliError::validation("InvalidFraction", format!("test fraction must lie in (0, 1), got {f}")))
    }
}

fn split_settings(cfg: &RunConfig, s: &SplitFlags) -> Result<(u64, f64), CliError> {
    let seed = cfg.get_or(s.seed, "seed", 0)?;
    let fraction = check_fraction(cfg.get_or(s.test_fraction, "test_fraction", DEFAULT_TEST_FRACTION)?)?;
    Ok((seed, fraction))
}

fn load_features(path: &Path) -> Result<Vec<FeatureVector>, CliError> {
    read_feature_table(&read_file(path)?).map_err(|e| CliError::from(e).in_file(path))
}

pub fn capture_file_name(c: &Capture, index: usize) -> String {
    format!("{}_{index:05}.txt", c.label.name())
}

fn cmd_synth(a: SynthArgs) -> Result<(), CliError> {
    let cfg = RunConfig::load(a.config.as_deref())?;
    let per_class = cfg.get_or(a.per_class, "per_class", DEFAULT_PER_CLASS)?;
    let out_dir: PathBuf = cfg.require(a.out_dir, "corpus_dir")?;
    let seed = cfg.get_or(a.seed, "seed", 0)?;
    if per_class == 0 {
        return Err(CliError::validation("InvalidParams", "--per-class must be positive"));
    }
    let corpus = generate_corpus(per_class, &SynthParams::default(), seed)?;
    fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
    for (i, c) in corpus.iter().enumerate() {
        write_file(&out_dir.join(capture_file_name(c, i % per_class)), &serialize_capture(c))?;
    }
    println!("wrote {} captures to {}", corpus.len(), out_dir.display());
    Ok(())
}

fn capture_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "txt"))
        .collect();
    files.sort();
    Ok(files)
}

fn cmd_featurize(a: FeaturizeArgs) -> Result<(), CliError> {
    let cfg = RunConfig::load(a.config.as_deref())?;
    let in_dir: PathBuf = cfg.require(a.in_dir, "corpus_dir")?;
    let out: PathBuf = cfg.require(a.out, "features")?;
    let settings = feature_settings(&cfg, &a.feature)?;
    let skip_invalid = a.skip_invalid || cfg.get_or::<bool>(None, "skip_invalid", false)?;

    let mut rows: Vec<FeatureVector> = Vec::new();
    let mut skipped = 0usize;
    for path in capture_files(&in_dir)? {
        let parsed = parse_capture(&read_file(&path)?).and_then(validate_capture);
        let capture = match parsed {
            Ok(c) => c,
            Err(e) if skip_invalid => {
                eprintln!("warning: skipping {}: {}: {e}", path.display(), e.kind());
                skipped += 1;
                continue;
            }
            Err(e) => return Err(CliError::from(e).in_file(&path)),
        };
        rows.push(featurize(&capture, &settings).map_err(|e| CliError::from(e).in_file(&path))?);
    }
    write_file(&out, &write_feature_table(&rows))?;
    println!("wrote {} feature rows to {} ({} skipped)", rows.len(), out.display(), skipped);
    Ok(())
}

fn cmd_train(a: TrainArgs) -> Result<(), CliError> {
    let cfg = RunConfig::load(a.config.as_deref())?;
    let features: PathBuf = cfg.require(a.features, "features")?;
    let out: PathBuf = cfg.require(a.out, "model")?;
    let variant = cfg.get_or(a.variant, "variant", DatasetVariant::D1)?;
    let preset = cfg.get_or(a.preset, "preset", Preset::Deep)?;
    let norm = cfg.get_or(a.norm, "norm", Normalization::Normalized)?;
    let budget = TrainingBudget::new(cfg.get_or(a.budget, "budget", DESK_BUDGETS[2])?)?;
    let (seed, fraction) = split_settings(&cfg, &a.split)?;

    let rows = load_features(&features)?;
    let (train_rows, _) = stratified_split(&rows, fraction, split_seed(seed))?;
    let key = CellKey { preset, variant, normalization: norm, budget: budget.max_updates() };
    let mut spec = NetworkSpec::from_preset(preset, variant.arity(), key.seed(seed));
    if let Some(lr) = cfg.get(a.learning_rate, "learning_rate")? {
        spec.learning_rate = lr;
    }
    if let Some(l2) = cfg.get(a.l2, "l2")? {
        spec.l2_lambda = l2;
    }
    let outcome = train(spec, variant, norm, &project_rows(&train_rows, variant), budget)?;
    write_file(&out, &save_model(&outcome.model))?;
    let last = outcome.loss_history.last().map(|&(_, l)| l).unwrap_or(f64::NAN);
    println!(
        "trained {key} on {} rows; last logged loss {last:.6}; wrote {}",
        train_rows.len(),
        out.display()
    );
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<(), CliError> {
    let cfg = RunConfig::load(a.config.as_deref())?;
    let model_path: PathBuf = cfg.require(a.model, "model")?;
    let features: PathBuf = cfg.require(a.features, "features")?;
    let (seed, fraction) = split_settings(&cfg, &a.split)?;
    let out_csv: Option<PathBuf> = cfg.get(a.out_csv, "eval_csv")?;

    let model: Model = load_model(&read_file(&model_path)?).map_err(|e| CliError::from(e).in_file(&model_path))?;
    let variant = model
        .variant
        .ok_or_else(|| CliError::validation("ArityMismatch", "model does not record a dataset variant"))?;
    let rows = load_features(&features)?;
    let (_, test_rows) = stratified_split(&rows, fraction, split_seed(seed))?;
    let result = evaluate(&model, &project_rows(&test_rows, variant))?;

    let mut text = String::new();
    writeln!(text, "# accuracy={:.6} correct={} total={}", result.accuracy, result.trace(), result.total()).unwrap();
    text.push_str(&result.confusion_csv());
    println!("accuracy: {:.6} ({} / {})", result.accuracy, result.trace(), result.total());
    print!("{}", result.confusion_csv());
    if let Some(p) = out_csv {
        write_file(&p, text.as_bytes())?;
    }
    Ok(())
}

fn grid_config(cfg: &RunConfig, a: &GridArgs) -> Result<GridConfig, CliError> {
    let d = GridConfig::default();
    Ok(GridConfig {
        presets: cfg.list(a.presets.clone(), "presets")?.unwrap_or(d.presets),
        variants: cfg.list(a.variants.clone(), "variants")?.unwrap_or(d.variants),
        normalizations: cfg.list(a.normalizations.clone(), "normalizations")?.unwrap_or(d.normalizations),
        budgets: cfg.list(a.budgets.clone(), "budgets")?.unwrap_or(d.budgets),
        master_seed: cfg.get_or(a.seed, "seed", d.master_seed)?,
        test_fraction: check_fraction(cfg.get_or(a.test_fraction, "test_fraction", d.test_fraction)?)?,
        jobs: cfg.get_or(a.jobs, "jobs", d.jobs)?,
    })
}

fn cmd_grid(a: GridArgs) -> Result<(), CliError> {
    let cfg = RunConfig::load(a.config.as_deref())?;
    let out_dir: PathBuf = cfg.require(a.out_dir.clone(), "out_dir")?;
    let grid = grid_config(&cfg, &a)?;
    if grid.budgets.contains(&0) {
        return Err(CliError::validation("ZeroBudget", "budgets must be positive"));
    }
    let rows = match cfg.get::<PathBuf>(a.features.clone(), "features")? {
        Some(path) => load_features(&path)?,
        None => {
            let per_class = cfg.get_or(a.synth_per_class, "synth_per_class", DEFAULT_PER_CLASS)?;
            let settings = feature_settings(&cfg, &a.feature)?;
            generate_corpus(per_class, &SynthParams::default(), grid.master_seed)?
                .iter()
                .map(|c| featurize(c, &settings))
                .collect::<Result<Vec<FeatureVector>, _>>()?
        }
    };

    let result = run_grid(&grid, &rows)?;
    let rep = report(&result);
    fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
    for (name, body) in &rep.files {
        write_file(&out_dir.join(name), body.as_bytes())?;
    }
    let failed = result.cells.iter().filter(|c| c.outcome.is_err()).count();
    println!(
        "evaluated {} cells ({} failed) on {} rows; wrote {} files to {}",
        result.cells.len(),
        failed,
        rows.len(),
        rep.files.len(),
        out_dir.display()
    );
    for (n, p, k, acc) in result.best() {
        println!("best {n:<10} {p:<6} {} {:>8} {acc:.6}", k.variant, k.budget);
    }
    Ok(())
}

fn cmd_gradcheck(a: GradcheckArgs) -> Result<(), CliError> {
    let cfg = RunConfig::load(a.config.as_deref())?;
    let trials = cfg.get_or(a.trials, "trials", 100)?;
    let seed = cfg.get_or(a.seed, "seed", 0)?;
    let presets = match cfg.get(a.preset, "preset")? {
        Some(p) => vec![p],
        None => Preset::ALL.to_vec(),
    };
    let mut worst = 0.0f64;
    for p in presets {
        let s = check_random_trials(p, trials, seed)?;
        println!("{p}: {} trials, worst relative error {:.3e} (trial {})", s.trials, s.worst, s.worst_trial);
        worst = worst.max(s.worst);
    }
    if worst >= GRAD_CHECK_TOLERANCE {
        return Err(CliError::numeric(
            "GradCheckFailed",
            format!("worst relative error {worst:.3e} >= {GRAD_CHECK_TOLERANCE:e}"),
        ));
    }
    println!("ok: worst relative error {worst:.3e} < {GRAD_CHECK_TOLERANCE:e}");
    Ok(())
}
