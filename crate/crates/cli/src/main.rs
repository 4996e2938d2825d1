//! `glycoshift` command line: annotation, featurization, training and
//! analysis over a directory of structures and shift tables.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use glycoshift::analysis::{ablate, dataset_stats, shapley_estimate, FeatureBlocks};
use glycoshift::config::{parse_config, PipelineSettings};
use glycoshift::corpus::{annotate_all, discover_inputs, Failure};
use glycoshift::dataset::{Dialect, EncodedGraph};
use glycoshift::features::{export_table, import_table, FeatureEncoder, FeatureGroup, FeatureSchema};
use glycoshift::model::checkpoint::{Checkpoint, SavedModel};
use glycoshift::model::train::{collect_predictions, split_indices};
use glycoshift::model::{rmse, train, ForestModel, MolecularGraph, Target};
use ndarray::Array2;

mod error;

use error::CliError;

#[derive(Parser)]
#[command(name = "glycoshift", version, about = "Carbohydrate NMR shift annotation and prediction", arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Match structures to shift tables and write per-atom tables.
    Annotate(InputArgs),
    /// Annotate, then encode one-hot features and write graph files.
    Featurize(FeaturizeArgs),
    /// Train a model on featurized graphs and write a checkpoint.
    Train(TrainArgs),
    /// RMSE of a checkpoint on featurized graphs.
    Evaluate(EvaluateArgs),
    /// Retrain with each feature removed in turn.
    Ablate(AblateArgs),
    /// Sampled Shapley values of the feature groups.
    Shapley(ShapleyArgs),
    /// Counts and distributions over annotated tables.
    Stats(StatsArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// Shift-table dialect of the corpus.
    #[arg(long, value_enum)]
    dialect: DialectArg,
    /// `key = value` settings file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DialectArg {
    Exp,
    Sim,
}

impl From<DialectArg> for Dialect {
    fn from(d: DialectArg) -> Self {
        match d {
            DialectArg::Exp => Dialect::Exp,
            DialectArg::Sim => Dialect::Sim,
        }
    }
}

#[derive(Args)]
struct InputArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    pdb_dir: PathBuf,
    #[arg(long)]
    nmr_dir: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FeaturizeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Feature group to leave out (repeatable).
    #[arg(long)]
    drop: Vec<String>,
    /// Encode modification distances for the experimental dialect too.
    #[arg(long)]
    with_modification: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Gcn,
    Forest,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    /// Output directory of `featurize`.
    #[arg(long)]
    data: PathBuf,
    /// Checkpoint file to write.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "gcn")]
    model: ModelKind,
    /// c13, h1 or joint.
    #[arg(long)]
    target: Option<Target>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Split {
    All,
    Val,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    checkpoint: PathBuf,
    /// Evaluate on every graph, or on the validation split drawn with the
    /// checkpoint's seed.
    #[arg(long, value_enum, default_value = "all")]
    split: Split,
    /// Report file (CSV); printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AblateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    target: Option<Target>,
    /// Features to remove, comma separated (default: every encoded one).
    #[arg(long, value_delimiter = ',')]
    features: Vec<String>,
}

#[derive(Args)]
struct ShapleyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    target: Option<Target>,
    /// Monte-Carlo permutations.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    common: Common,
    /// Output directory of `annotate` or `featurize`.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.category());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Annotate(a) => cmd_annotate(&a, None),
        Command::Featurize(f) => cmd_featurize(&f),
        Command::Train(t) => cmd_train(&t),
        Command::Evaluate(e) => cmd_evaluate(&e),
        Command::Ablate(a) => cmd_ablate(&a),
        Command::Shapley(s) => cmd_shapley(&s),
        Command::Stats(s) => cmd_stats(&s),
    }
}

/// Config file, then dialect-sized defaults under it, then flags.
fn settings(common: &Common, target: Option<Target>) -> Result<PipelineSettings, CliError> {
    let mut s = PipelineSettings::for_dialect(common.dialect.into());
    if let Some(path) = &common.config {
        let text = read(path)?;
        s.apply(&parse_config(&text)?)?;
    }
    if let Some(seed) = common.seed {
        s.set("seed", &seed.to_string())?;
    }
    if let Some(t) = target {
        s.train.target = t;
    }
    if let Some(jobs) = common.jobs {
        // Only the first call in a process takes effect.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global();
    }
    Ok(s)
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn require_dir(path: &Path) -> Result<(), CliError> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(CliError::MissingPath(path.to_path_buf()))
    }
}

/// Settings as `#` comment lines, for report headers.
fn commented(s: &PipelineSettings, dialect: Dialect) -> String {
    let mut out = format!("# dialect = {dialect}\n");
    for line in s.render().lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out
}

struct Provenance {
    command: &'static str,
    dialect: Dialect,
    extra: Vec<(String, String)>,
}

impl Provenance {
    fn render(&self, s: &PipelineSettings) -> String {
        let mut out = format!(
            "tool = glycoshift {}\ncommand = {}\ndialect = {}\n",
            env!("CARGO_PKG_VERSION"),
            self.command,
            self.dialect
        );
        for (k, v) in &self.extra {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out.push_str(&s.render());
        out
    }

    fn read(dir: &Path) -> Result<BTreeMap<String, String>, CliError> {
        let path = dir.join("provenance.txt");
        let text = read(&path)?;
        Ok(text
            .lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
            .collect())
    }
}

/// Annotates the corpus, writes tables, match reports, failures and
/// provenance, and returns the successes. `encoder` adds graph files.
fn cmd_annotate(a: &InputArgs, encoder: Option<&FeatureEncoder>) -> Result<(), CliError> {
    let dialect: Dialect = a.common.dialect.into();
    let s = settings(&a.common, None)?;
    require_dir(&a.pdb_dir)?;
    require_dir(&a.nmr_dir)?;
    let (pairs, mut failures) =
        discover_inputs(dialect, &a.pdb_dir, &a.nmr_dir).map_err(|e| CliError::io(&a.pdb_dir, e))?;
    let (carbs, failed) = annotate_all(&pairs, &s.bonds);
    failures.extend(failed);
    failures.sort_by(|x, y| x.id.cmp(&y.id));

    fs::create_dir_all(&a.out).map_err(|e| CliError::io(&a.out, e))?;
    for c in &carbs {
        write(&a.out.join(format!("{}.csv", c.id)), &export_table(&c.rows))?;
        write(&a.out.join(format!("{}.match.tsv", c.id)), &c.report())?;
        if let Some(enc) = encoder {
            let g = EncodedGraph::from_carbohydrate(c, enc);
            let json = serde_json::to_string(&g).map_err(|e| CliError::Format(e.to_string()))?;
            write(&a.out.join(format!("{}.graph.json", c.id)), &json)?;
        }
    }
    write(&a.out.join("failures.tsv"), &Failure::manifest(&failures))?;

    let mut extra = vec![
        ("pdb_dir".to_string(), a.pdb_dir.display().to_string()),
        ("nmr_dir".to_string(), a.nmr_dir.display().to_string()),
        ("carbohydrates".to_string(), carbs.len().to_string()),
        ("failures".to_string(), failures.len().to_string()),
    ];
    if let Some(enc) = encoder {
        let schema = enc.schema();
        extra.push(("features".into(), enc.groups().map(|g| g.as_str()).collect::<Vec<_>>().join(",")));
        extra.push(("schema_hash".into(), schema.hash()));
        write(&a.out.join("schema.txt"), &schema.sidecar())?;
    }
    let command = if encoder.is_some() { "featurize" } else { "annotate" };
    write(&a.out.join("provenance.txt"), &Provenance { command, dialect, extra }.render(&s))?;
    println!(
        "{command}: {} carbohydrates written to {}, {} failed (see failures.tsv)",
        carbs.len(),
        a.out.display(),
        failures.len()
    );
    Ok(())
}

fn cmd_featurize(f: &FeaturizeArgs) -> Result<(), CliError> {
    let dialect: Dialect = f.input.common.dialect.into();
    let mut enc = dialect.default_encoder();
    if f.with_modification {
        enc = enc.with(FeatureGroup::Modification);
    }
    for name in &f.drop {
        enc = enc.drop_named(name)?;
    }
    cmd_annotate(&f.input, Some(&enc))
}

/// Featurized graphs, their schema, and the encoder that produced them.
struct Dataset {
    graphs: Vec<EncodedGraph>,
    schema: FeatureSchema,
}

fn load_dataset(dir: &Path, dialect: Dialect) -> Result<Dataset, CliError> {
    require_dir(dir)?;
    let prov = Provenance::read(dir)?;
    let recorded = prov.get("dialect").cloned().unwrap_or_default();
    if recorded != dialect.as_str() {
        return Err(CliError::DialectMismatch {
            expected: dialect,
            found: recorded,
        });
    }
    let features = prov
        .get("features")
        .ok_or_else(|| CliError::Format(format!("{} was not written by featurize", dir.display())))?;
    let groups = features
        .split(',')
        .map(FeatureGroup::parse)
        .collect::<Result<Vec<_>, _>>()?;
    let schema = FeatureEncoder::with_groups(groups).schema();

    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.to_string_lossy().ends_with(".graph.json"))
        .collect();
    files.sort();
    let mut graphs = Vec::with_capacity(files.len());
    for p in files {
        let g: EncodedGraph = serde_json::from_str(&read(&p)?).map_err(|e| CliError::Format(format!("{}: {e}", p.display())))?;
        if g.schema_hash != schema.hash() {
            return Err(CliError::Format(format!("{}: feature schema differs from provenance.txt", p.display())));
        }
        graphs.push(g);
    }
    if graphs.len() < 2 {
        return Err(CliError::Format(format!("{} holds {} graphs; at least 2 are needed", dir.display(), graphs.len())));
    }
    Ok(Dataset { graphs, schema })
}

fn model_graphs(d: &Dataset, target: Target) -> Vec<MolecularGraph> {
    d.graphs.iter().map(|g| g.to_graph(target)).collect()
}

/// Labeled rows of the given graphs, for the forest.
fn labeled_rows(graphs: &[&MolecularGraph]) -> (Array2<f64>, Vec<f64>) {
    let d = graphs.first().map_or(0, |g| g.x.ncols());
    let mut flat = Vec::new();
    let mut y = Vec::new();
    for g in graphs {
        for i in 0..g.n_nodes() {
            if g.mask[[i, 0]] {
                flat.extend(g.x.row(i).iter().copied());
                y.push(g.y[[i, 0]]);
            }
        }
    }
    (Array2::from_shape_vec((y.len(), d), flat).expect("rows of equal width"), y)
}

fn cmd_train(t: &TrainArgs) -> Result<(), CliError> {
    let dialect: Dialect = t.common.dialect.into();
    let s = settings(&t.common, t.target)?;
    let data = load_dataset(&t.data, dialect)?;
    let target = s.train.target;
    let graphs = model_graphs(&data, target);
    let (model, val_rmse) = match t.model {
        ModelKind::Gcn => {
            let out = train(&graphs, &s.train)?;
            log::info!("best epoch {} of {}", out.best_epoch, out.epochs_run);
            (SavedModel::Gcn { config: s.train.clone(), model: out.model }, out.val_rmse)
        }
        ModelKind::Forest => {
            if target == Target::Joint {
                return Err(CliError::Usage("the forest predicts one nucleus; use --target c13 or h1".into()));
            }
            let (tr, va) = split_indices(graphs.len(), s.train.val_fraction, s.train.seed);
            let (x, y) = labeled_rows(&tr.iter().map(|&i| &graphs[i]).collect::<Vec<_>>());
            let forest = ForestModel::fit(x.view(), &y, &s.forest)?;
            let (xv, yv) = labeled_rows(&va.iter().map(|&i| &graphs[i]).collect::<Vec<_>>());
            let err = rmse(&yv, &forest.predict(xv.view())?).unwrap_or(f64::NAN);
            (SavedModel::Forest { target, model: forest }, vec![err])
        }
    };
    let ck = Checkpoint::new(s.train.seed, data.schema.hash(), data.schema.columns.clone(), model);
    write(&t.out, &ck.to_json())?;
    let heads = target.head_names();
    let summary: Vec<String> = heads.iter().zip(&val_rmse).map(|(h, r)| format!("{h} {r:.4}")).collect();
    println!("trained; validation RMSE (ppm): {}; checkpoint {}", summary.join(", "), t.out.display());
    Ok(())
}

fn cmd_evaluate(e: &EvaluateArgs) -> Result<(), CliError> {
    let dialect: Dialect = e.common.dialect.into();
    let s = settings(&e.common, None)?;
    let data = load_dataset(&e.data, dialect)?;
    let ck = Checkpoint::from_json(&read(&e.checkpoint)?)?;
    ck.check_schema(&data.schema.hash())?;
    let target = ck.model.target();
    let graphs = model_graphs(&data, target);
    let selected: Vec<&MolecularGraph> = match e.split {
        Split::All => graphs.iter().collect(),
        Split::Val => {
            let frac = match &ck.model {
                SavedModel::Gcn { config, .. } => config.val_fraction,
                SavedModel::Forest { .. } => s.train.val_fraction,
            };
            split_indices(graphs.len(), frac, ck.seed).1.iter().map(|&i| &graphs[i]).collect()
        }
    };
    let per_head: Vec<(Vec<f64>, Vec<f64>)> = match &ck.model {
        SavedModel::Gcn { model, .. } => collect_predictions(model, &selected)?,
        SavedModel::Forest { model, .. } => {
            let (x, y) = labeled_rows(&selected);
            vec![(y, model.predict(x.view())?)]
        }
    };
    // Report the settings the checkpoint was trained with, not this run's.
    let mut used = s.clone();
    match &ck.model {
        SavedModel::Gcn { config, .. } => used.train = config.clone(),
        SavedModel::Forest { target, .. } => {
            used.train.seed = ck.seed;
            used.train.target = *target;
        }
    }
    let mut out = commented(&used, dialect);
    out.push_str(&format!("# checkpoint = {}\n# split = {}\nhead,count,rmse\n", e.checkpoint.display(), match e.split {
        Split::All => "all",
        Split::Val => "val",
    }));
    for (h, (y, p)) in target.head_names().iter().zip(&per_head) {
        let r = rmse(y, p).map(|v| v.to_string()).unwrap_or_else(|_| "NaN".into());
        out.push_str(&format!("{h},{},{r}\n", y.len()));
    }
    match &e.out {
        Some(path) => write(path, &out)?,
        None => print!("{out}"),
    }
    Ok(())
}

fn cmd_ablate(a: &AblateArgs) -> Result<(), CliError> {
    let dialect: Dialect = a.common.dialect.into();
    let s = settings(&a.common, a.target)?;
    let data = load_dataset(&a.data, dialect)?;
    let blocks = FeatureBlocks::from_schema(&data.schema);
    let features: Vec<String> = if a.features.is_empty() {
        blocks.names.clone()
    } else {
        a.features
            .iter()
            .map(|f| FeatureGroup::parse(f).map(|g| g.as_str().to_string()))
            .collect::<Result<_, _>>()?
    };
    let report = ablate(&model_graphs(&data, s.train.target), &blocks, &features, &s.train)?;
    write(&a.out, &(commented(&s, dialect) + &report.to_csv()))?;
    println!("ablation over {} features written to {}", features.len(), a.out.display());
    Ok(())
}

fn cmd_shapley(a: &ShapleyArgs) -> Result<(), CliError> {
    let dialect: Dialect = a.common.dialect.into();
    let mut s = settings(&a.common, a.target)?;
    if let Some(m) = a.samples {
        s.shapley_samples = m;
    }
    let data = load_dataset(&a.data, dialect)?;
    let blocks = FeatureBlocks::from_schema(&data.schema);
    let report = shapley_estimate(&model_graphs(&data, s.train.target), &blocks, s.shapley_samples, &s.train)?;
    write(&a.out, &(commented(&s, dialect) + &report.to_csv()))?;
    println!(
        "Shapley values ({} samples, {} coalitions trained) written to {}",
        report.samples,
        report.payoffs.len(),
        a.out.display()
    );
    Ok(())
}

fn cmd_stats(a: &StatsArgs) -> Result<(), CliError> {
    let dialect: Dialect = a.common.dialect.into();
    let s = settings(&a.common, None)?;
    require_dir(&a.data)?;
    let prov = Provenance::read(&a.data)?;
    if prov.get("dialect").map(String::as_str) != Some(dialect.as_str()) {
        return Err(CliError::DialectMismatch {
            expected: dialect,
            found: prov.get("dialect").cloned().unwrap_or_default(),
        });
    }
    let mut files: Vec<PathBuf> = fs::read_dir(&a.data)
        .map_err(|e| CliError::io(&a.data, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    let mut corpus = Vec::with_capacity(files.len());
    for p in &files {
        corpus.push(import_table(&read(p)?).map_err(|e| CliError::Format(format!("{}: {e}", p.display())))?);
    }
    let st = dataset_stats(corpus.iter().map(Vec::as_slice));
    let header = commented(&s, dialect);
    for (name, body) in [
        ("summary.csv", st.summary_csv()),
        ("stems.csv", st.stems_csv()),
        ("lengths.csv", st.lengths_csv()),
        ("shifts.csv", st.shifts_csv()),
        ("positions.csv", st.position_summary_csv()),
    ] {
        write(&a.out.join(name), &(header.clone() + &body))?;
    }
    println!(
        "{} carbohydrates, {} monosaccharides, {} labeled shifts; tables in {}",
        st.carb_count,
        st.mono_count,
        st.labeled_shift_count,
        a.out.display()
    );
    Ok(())
}
