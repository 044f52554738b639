//! Train/test protocol, training loop, evaluation and the comparison grid.
//!
//! A grid cell is one `(preset, variant, normalization, budget)` tuple. Each
//! cell's seed is a stable hash of its coordinates and the master seed, and
//! the train/test split depends only on the master seed, so any subset of
//! cells reproduces the matching cells of a full run bit for bit regardless
//! of scheduling.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use thiserror::Error;

use crate::features::{project, DatasetVariant, FeatureVector};
use crate::ingest::AdlLabel;
use crate::nn::{self, Model, NetworkSpec, NnError, Preset};
use crate::scaler::{ScalerError, ScalerKind, ScalerParams};
use crate::{rng, Real};

/// Desk-scale stand-ins for 1M/2M/4M updates, same 1:2:4 ratio.
pub const DESK_BUDGETS: [usize; 3] = [10_000, 20_000, 40_000];
pub const FULL_BUDGETS: [usize; 3] = [1_000_000, 2_000_000, 4_000_000];
pub const DEFAULT_TEST_FRACTION: f64 = 0.3;
/// Cells in the complete grid: 3 presets x 5 variants x 2 arms x 3 budgets.
pub const FULL_GRID_CELLS: usize = 90;

/// A projected input row with its label.
#[derive(Debug, Clone, PartialEq)]
pub struct Example<T> {
    pub x: Vec<T>,
    pub label: AdlLabel,
}

pub trait Labeled {
    fn label(&self) -> AdlLabel;
}

impl<T> Labeled for Example<T> {
    fn label(&self) -> AdlLabel {
        self.label
    }
}

impl<T> Labeled for FeatureVector<T> {
    fn label(&self) -> AdlLabel {
        self.label
    }
}

pub fn project_rows<T: Real>(rows: &[FeatureVector<T>], v: DatasetVariant) -> Vec<Example<T>> {
    rows.iter().map(|f| Example { x: project(f, v), label: f.label }).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrainingBudget {
    max_updates: usize,
}

impl TrainingBudget {
    pub fn new(max_updates: usize) -> Result<Self, ExperimentError> {
        if max_updates == 0 {
            return Err(ExperimentError::ZeroBudget);
        }
        Ok(TrainingBudget { max_updates })
    }

    pub fn max_updates(self) -> usize {
        self.max_updates
    }

    /// Steps between recorded losses.
    pub fn log_interval(self) -> usize {
        (self.max_updates / 1000).max(1)
    }
}

/// The two arms each preset is run under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Normalization {
    Raw,
    Normalized,
}

impl Normalization {
    pub const ALL: [Normalization; 2] = [Normalization::Raw, Normalization::Normalized];

    pub fn name(self) -> &'static str {
        match self {
            Normalization::Raw => "raw",
            Normalization::Normalized => "normalized",
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Normalization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "raw" | "none" => Ok(Normalization::Raw),
            "normalized" | "norm" => Ok(Normalization::Normalized),
            _ => Err(format!("unknown normalization arm `{s}`")),
        }
    }
}

/// Shallow presets normalise with min/max, the deep preset with z-scores.
/// The raw arm never rescales.
pub fn scaler_kind(preset: Preset, norm: Normalization) -> ScalerKind {
    match (preset, norm) {
        (_, Normalization::Raw) => ScalerKind::Identity,
        (Preset::Deep, Normalization::Normalized) => ScalerKind::ZScore,
        (_, Normalization::Normalized) => ScalerKind::MinMax,
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("class {label} has {count} rows; each side of the split needs at least one")]
    ClassTooSmall { label: AdlLabel, count: usize },
    #[error("test fraction must lie in (0, 1), got {0}")]
    InvalidFraction(f64),
    #[error("training budget must be at least one update")]
    ZeroBudget,
    #[error("no training rows")]
    EmptyTrainSet,
    #[error("no evaluation rows")]
    EmptyTestSet,
    #[error("loss became non-finite at update {step}")]
    NonFiniteLoss { step: usize },
    #[error(transparent)]
    Nn(NnError),
    #[error(transparent)]
    Scaler(#[from] ScalerError),
}

impl From<NnError> for ExperimentError {
    fn from(e: NnError) -> Self {
        match e {
            NnError::NonFiniteLoss => ExperimentError::NonFiniteLoss { step: 0 },
            other => ExperimentError::Nn(other),
        }
    }
}

impl ExperimentError {
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentError::ClassTooSmall { .. } => "ClassTooSmall",
            ExperimentError::InvalidFraction(_) => "InvalidFraction",
            ExperimentError::ZeroBudget => "ZeroBudget",
            ExperimentError::EmptyTrainSet => "EmptyTrainSet",
            ExperimentError::EmptyTestSet => "EmptyTestSet",
            ExperimentError::NonFiniteLoss { .. } => "NonFiniteLoss",
            ExperimentError::Nn(e) => e.kind(),
            ExperimentError::Scaler(_) => "ScalerError",
        }
    }

    /// Numeric failures, as opposed to bad inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(self, ExperimentError::NonFiniteLoss { .. })
    }
}

/// Per-class proportional split. Within each class the rows are shuffled
/// with `seed` and the first `round(n * test_fraction)` (clamped to
/// `1..n`) go to the test side. Output keeps class-code order.
pub fn stratified_split<R: Labeled + Clone>(
    rows: &[R],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<R>, Vec<R>), ExperimentError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(ExperimentError::InvalidFraction(test_fraction));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for label in AdlLabel::ALL {
        let mut idx: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].label() == label).collect();
        if idx.is_empty() {
            continue;
        }
        if idx.len() < 2 {
            return Err(ExperimentError::ClassTooSmall { label, count: idx.len() });
        }
        idx.shuffle(&mut rng::seeded(rng::derive_seed(seed, &[label.code() as u64])));
        let n_test = ((idx.len() as f64 * test_fraction).round() as usize).clamp(1, idx.len() - 1);
        test.extend(idx[..n_test].iter().map(|&i| rows[i].clone()));
        train.extend(idx[n_test..].iter().map(|&i| rows[i].clone()));
    }
    Ok((train, test))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome<T> {
    pub model: Model<T>,
    /// `(update index, loss before that update)` every `log_interval` steps.
    pub loss_history: Vec<(usize, T)>,
}

/// Fits the arm's scaler on `train_rows`, then runs exactly
/// `budget.max_updates()` single-example SGD updates, cycling through one
/// seeded permutation of the rows.
pub fn train<T: Real>(
    spec: NetworkSpec<T>,
    variant: DatasetVariant,
    norm: Normalization,
    train_rows: &[Example<T>],
    budget: TrainingBudget,
) -> Result<TrainOutcome<T>, ExperimentError> {
    if train_rows.is_empty() {
        return Err(ExperimentError::EmptyTrainSet);
    }
    let shuffle_seed = rng::derive_seed(spec.seed, &[0x5348_5546]);
    let kind = scaler_kind(spec.preset, norm);
    let raw: Vec<&[T]> = train_rows.iter().map(|e| e.x.as_slice()).collect();
    let scaler = ScalerParams::fit(kind, &raw)?;
    let scaled = raw.iter().map(|x| scaler.apply(x)).collect::<Result<Vec<_>, _>>()?;

    let mut model = nn::init_model(spec)?;
    model.scaler = scaler;
    model.variant = Some(variant);

    let mut order: Vec<usize> = (0..train_rows.len()).collect();
    order.shuffle(&mut rng::seeded(shuffle_seed));
    let interval = budget.log_interval();
    let mut loss_history = Vec::with_capacity(budget.max_updates() / interval + 1);
    for step in 0..budget.max_updates() {
        let i = order[step % order.len()];
        let loss = model.step(&scaled[i], train_rows[i].label).map_err(|e| match e {
            NnError::NonFiniteLoss => ExperimentError::NonFiniteLoss { step },
            other => ExperimentError::Nn(other),
        })?;
        if step % interval == 0 {
            loss_history.push((step, loss));
        }
    }
    Ok(TrainOutcome { model, loss_history })
}

/// Anything that maps an unscaled projected row to a class.
pub trait Classifier<T> {
    fn classify(&self, x: &[T]) -> Result<AdlLabel, NnError>;
}

impl<T: Real> Classifier<T> for Model<T> {
    fn classify(&self, x: &[T]) -> Result<AdlLabel, NnError> {
        self.predict_raw(x)
    }
}

impl<T, F: Fn(&[T]) -> AdlLabel> Classifier<T> for F {
    fn classify(&self, x: &[T]) -> Result<AdlLabel, NnError> {
        Ok(self(x))
    }
}

/// Accuracy and confusion counts (rows = truth, columns = prediction).
#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub accuracy: f64,
    pub confusion: [[u64; 5]; 5],
}

impl EvalResult {
    pub fn from_confusion(confusion: [[u64; 5]; 5]) -> Self {
        let total: u64 = confusion.iter().flatten().sum();
        let trace: u64 = (0..5).map(|i| confusion[i][i]).sum();
        let accuracy = if total == 0 { 0.0 } else { trace as f64 / total as f64 };
        EvalResult { accuracy, confusion }
    }

    pub fn total(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..5).map(|i| self.confusion[i][i]).sum()
    }

    /// Confusion matrix as CSV with a `truth\predicted` corner cell.
    pub fn confusion_csv(&self) -> String {
        let mut out = String::from("truth\\predicted");
        for l in AdlLabel::ALL {
            write!(out, ",{l}").unwrap();
        }
        out.push('\n');
        for (l, row) in AdlLabel::ALL.iter().zip(&self.confusion) {
            out.push_str(l.name());
            for c in row {
                write!(out, ",{c}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

pub fn evaluate<T, C: Classifier<T> + ?Sized>(m: &C, test_rows: &[Example<T>]) -> Result<EvalResult, ExperimentError> {
    if test_rows.is_empty() {
        return Err(ExperimentError::EmptyTestSet);
    }
    let mut confusion = [[0u64; 5]; 5];
    for e in test_rows {
        let pred = m.classify(&e.x)?;
        confusion[e.label.code()][pred.code()] += 1;
    }
    Ok(EvalResult::from_confusion(confusion))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellKey {
    pub preset: Preset,
    pub variant: DatasetVariant,
    pub normalization: Normalization,
    pub budget: usize,
}

impl CellKey {
    pub fn seed(&self, master_seed: u64) -> u64 {
        rng::derive_seed(
            master_seed,
            &[
                self.preset.code() as u64,
                self.variant.index() as u64,
                self.normalization.code() as u64,
                self.budget as u64,
            ],
        )
    }
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.preset, self.variant, self.normalization, self.budget)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub key: CellKey,
    pub seed: u64,
    pub outcome: Result<EvalResult, ExperimentError>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub presets: Vec<Preset>,
    pub variants: Vec<DatasetVariant>,
    pub normalizations: Vec<Normalization>,
    pub budgets: Vec<usize>,
    pub master_seed: u64,
    pub test_fraction: f64,
    /// Worker threads; 0 lets rayon decide.
    pub jobs: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            presets: Preset::ALL.to_vec(),
            variants: DatasetVariant::ALL.to_vec(),
            normalizations: Normalization::ALL.to_vec(),
            budgets: DESK_BUDGETS.to_vec(),
            master_seed: 0,
            test_fraction: DEFAULT_TEST_FRACTION,
            jobs: 0,
        }
    }
}

impl GridConfig {
    /// Cartesian product in report order.
    pub fn cells(&self) -> Vec<CellKey> {
        let mut keys = Vec::new();
        for &preset in &self.presets {
            for &variant in &self.variants {
                for &normalization in &self.normalizations {
                    for &budget in &self.budgets {
                        keys.push(CellKey { preset, variant, normalization, budget });
                    }
                }
            }
        }
        keys.sort();
        keys.dedup();
        keys
    }

    pub fn split_seed(&self) -> u64 {
        split_seed(self.master_seed)
    }
}

/// Seed of the train/test split used with a given master seed.
pub fn split_seed(master_seed: u64) -> u64 {
    rng::derive_seed(master_seed, &[0x0053_504c_4954])
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub cells: Vec<GridCell>,
}

impl GridResult {
    pub fn get(&self, key: &CellKey) -> Option<&GridCell> {
        self.cells.iter().find(|c| &c.key == key)
    }

    pub fn accuracy(&self, key: &CellKey) -> Option<f64> {
        self.get(key).and_then(|c| c.outcome.as_ref().ok()).map(|e| e.accuracy)
    }

    pub fn is_complete(&self) -> bool {
        self.cells.len() == FULL_GRID_CELLS && self.cells.iter().all(|c| c.outcome.is_ok())
    }

    /// Best cell per `(normalization, preset)`: highest accuracy, then the
    /// smaller budget, then the smaller variant index.
    pub fn best(&self) -> Vec<(Normalization, Preset, CellKey, f64)> {
        let mut best: BTreeMap<(Normalization, Preset), (CellKey, f64)> = BTreeMap::new();
        let mut ordered: Vec<&GridCell> = self.cells.iter().collect();
        ordered.sort_by_key(|c| (c.key.budget, c.key.variant));
        for c in ordered {
            let Ok(ev) = &c.outcome else { continue };
            let slot = best.entry((c.key.normalization, c.key.preset)).or_insert((c.key, ev.accuracy));
            if ev.accuracy > slot.1 {
                *slot = (c.key, ev.accuracy);
            }
        }
        best.into_iter().map(|((n, p), (k, a))| (n, p, k, a)).collect()
    }
}

/// Trains and evaluates one cell on an already split corpus.
pub fn run_cell<T: Real>(
    key: CellKey,
    master_seed: u64,
    train_rows: &[FeatureVector<T>],
    test_rows: &[FeatureVector<T>],
) -> GridCell {
    let seed = key.seed(master_seed);
    let outcome = (|| {
        let budget = TrainingBudget::new(key.budget)?;
        let spec = NetworkSpec::from_preset(key.preset, key.variant.arity(), seed);
        let trained = train(spec, key.variant, key.normalization, &project_rows(train_rows, key.variant), budget)?;
        evaluate(&trained.model, &project_rows(test_rows, key.variant))
    })();
    GridCell { key, seed, outcome }
}

/// Runs every configured cell. Splitting errors are fatal; per-cell
/// failures are kept in the result.
pub fn run_grid<T: Real>(config: &GridConfig, rows: &[FeatureVector<T>]) -> Result<GridResult, ExperimentError> {
    let (train_rows, test_rows) = stratified_split(rows, config.test_fraction, config.split_seed())?;
    let keys = config.cells();
    let work = || -> Vec<GridCell> {
        keys.par_iter()
            .map(|&k| run_cell(k, config.master_seed, &train_rows, &test_rows))
            .collect()
    };
    let cells = if config.jobs == 0 {
        work()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map(|pool| pool.install(work))
            .unwrap_or_else(|_| work())
    };
    Ok(GridResult { cells })
}

/// Named text files produced by [`report`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub files: BTreeMap<String, String>,
}

impl Report {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.get(name).map(String::as_str)
    }
}

fn figure_number(p: Preset) -> usize {
    match p {
        Preset::MlpBp => 1,
        Preset::FfBp => 2,
        Preset::Deep => 3,
    }
}

/// `grid.csv`, `best.csv` and one `fig<k>_<arm>.csv` per preset and arm.
pub fn report(g: &GridResult) -> Report {
    let mut warnings = String::new();
    let ok = g.cells.iter().filter(|c| c.outcome.is_ok()).count();
    if !g.is_complete() {
        writeln!(warnings, "# warning: IncompleteGrid: {ok} of {FULL_GRID_CELLS} cells evaluated").unwrap();
    }
    for c in &g.cells {
        if let Err(e) = &c.outcome {
            writeln!(warnings, "# failed: {}: {}: {}", c.key, e.kind(), e).unwrap();
        }
    }

    let mut grid = warnings.clone();
    grid.push_str("preset,variant,normalization,budget,accuracy,seed\n");
    for c in &g.cells {
        if let Ok(ev) = &c.outcome {
            writeln!(grid, "{},{:.6},{}", c.key, ev.accuracy, c.seed).unwrap();
        }
    }

    let mut best = warnings.clone();
    best.push_str("normalization,preset,variant,budget,accuracy\n");
    for (n, p, k, acc) in g.best() {
        writeln!(best, "{n},{p},{},{},{acc:.6}", k.variant, k.budget).unwrap();
    }

    let mut files = BTreeMap::new();
    files.insert("grid.csv".to_string(), grid);
    files.insert("best.csv".to_string(), best);

    let mut budgets: Vec<usize> = g.cells.iter().map(|c| c.key.budget).collect();
    budgets.sort_unstable();
    budgets.dedup();
    let mut arms: Vec<(Preset, Normalization)> = g.cells.iter().map(|c| (c.key.preset, c.key.normalization)).collect();
    arms.sort();
    arms.dedup();
    for (preset, norm) in arms {
        let mut fig = format!("# {preset} {norm}: accuracy by dataset variant (rows) and update budget (columns)\n");
        fig.push_str("variant");
        for b in &budgets {
            write!(fig, ",{b}").unwrap();
        }
        fig.push('\n');
        for variant in DatasetVariant::ALL {
            let row: Vec<Option<f64>> = budgets
                .iter()
                .map(|&budget| g.accuracy(&CellKey { preset, variant, normalization: norm, budget }))
                .collect();
            if row.iter().all(Option::is_none) {
                continue;
            }
            fig.push_str(variant.name());
            for a in row {
                match a {
                    Some(a) => write!(fig, ",{a:.6}").unwrap(),
                    None => fig.push(','),
                }
            }
            fig.push('\n');
        }
        files.insert(format!("fig{}_{}.csv", figure_number(preset), norm.name()), fig);
    }
    Report { files }
}
