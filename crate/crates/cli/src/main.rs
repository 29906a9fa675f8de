//! Command-line driver: train an ancestor, construct the steerable model,
//! evaluate checkpoints, run the known-rotation experiment, and run the
//! property-verification suite.
//!
//! Exit codes: 0 success, 1 property/assertion failure or runtime error,
//! 2 usage or file-parse error.

use clap::{Parser, Subcommand, ValueEnum};
use sphn::data::{
    canonicalize_pose, load_checkpoint, load_dataset, load_run_config, save_checkpoint,
    save_dataset, synthetic_dataset, tetris_dataset, AncestorCheckpoint, Checkpoint, Dataset,
    LabeledCloud, RunConfig, SteerableCheckpoint, SyntheticConfig,
};
use sphn::experiment::run_known_rotation;
use sphn::steer::build_steerable;
use sphn::train::{accuracy, train_with_progress};
use sphn::verify::{run_all, ModelDims};
use sphn::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "sphn", version, about = "Steerable spherical-neuron point-cloud classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train an ancestor model and write its checkpoint plus a loss-history CSV.
    Train {
        /// Run configuration file (hyperparameters, optional split/anchors).
        #[arg(long)]
        config: PathBuf,
        /// Dataset file.
        #[arg(long)]
        dataset: PathBuf,
        /// Output checkpoint path; the loss history goes to `<out>.loss.csv`.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Construct the steerable model from a frozen ancestor checkpoint.
    BuildSteerable {
        /// Ancestor checkpoint.
        #[arg(long)]
        checkpoint: PathBuf,
        /// Output steerable checkpoint path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Report a checkpoint's classification accuracy on a dataset.
    Eval {
        /// Ancestor or steerable checkpoint.
        #[arg(long)]
        checkpoint: PathBuf,
        /// Dataset file.
        #[arg(long)]
        dataset: PathBuf,
        /// Optional config supplying pose-standardization anchors.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Rotate, perturb, steer with the ground-truth rotation, and compare
    /// against the ancestor; writes `<out>.csv` and `<out>.json`.
    KnownRotation {
        /// Steerable checkpoint.
        #[arg(long)]
        checkpoint: PathBuf,
        /// The ancestor checkpoint the steerable model was built from.
        #[arg(long)]
        ancestor: PathBuf,
        /// Dataset file (canonical orientation).
        #[arg(long)]
        dataset: PathBuf,
        /// Report base path.
        #[arg(long)]
        out: PathBuf,
        /// Noise amplitude; repeat for a sweep.
        #[arg(long = "noise", required = true)]
        noise: Vec<f64>,
        #[arg(long, default_value_t = 1000)]
        runs: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Optional config supplying pose-standardization anchors.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the randomized property suite; nonzero exit on any failure.
    Verify {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, default_value_t = 128)]
        trials: usize,
    },
    /// Write a built-in dataset to a file.
    GenData {
        #[arg(long, value_enum)]
        kind: DataKind,
        #[arg(long)]
        out: PathBuf,
        /// Seed for the synthetic generator (ignored for tetris).
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DataKind {
    /// The eight canonical Tetris shapes.
    Tetris,
    /// Ten random 20-point classes at skeleton scale, five instances each.
    Synthetic,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// Usage and file-parse problems exit 2; everything else exits 1.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parse { .. } | Error::SchemaMismatch { .. } | Error::Io { .. } => 2,
        _ => 1,
    }
}

/// Property-suite failures surface as an assertion error (exit 1).
fn verify_failure() -> Error {
    Error::InvalidArgument("property verification failed".into())
}

fn dispatch(command: Command) -> Result<(), Error> {
    match command {
        Command::Train {
            config,
            dataset,
            out,
            seed,
        } => cmd_train(&config, &dataset, &out, seed),
        Command::BuildSteerable { checkpoint, out } => cmd_build_steerable(&checkpoint, &out),
        Command::Eval {
            checkpoint,
            dataset,
            config,
        } => cmd_eval(&checkpoint, &dataset, config.as_deref()),
        Command::KnownRotation {
            checkpoint,
            ancestor,
            dataset,
            out,
            noise,
            runs,
            seed,
            config,
        } => cmd_known_rotation(
            &checkpoint,
            &ancestor,
            &dataset,
            &out,
            &noise,
            runs,
            seed,
            config.as_deref(),
        ),
        Command::Verify { seed, trials } => cmd_verify(seed, trials),
        Command::GenData { kind, out, seed } => cmd_gen_data(kind, &out, seed),
    }
}

/// Applies the config's pose standardization to every cloud, if configured.
fn prepare_dataset(dataset: Dataset, config: Option<&RunConfig>) -> Result<Dataset, Error> {
    let anchors = match config.and_then(|c| c.anchors) {
        Some(anchors) => anchors,
        None => return Ok(dataset),
    };
    let clouds = dataset
        .clouds
        .iter()
        .map(|c| {
            Ok(LabeledCloud {
                id: c.id.clone(),
                label: c.label,
                points: canonicalize_pose(&c.points, anchors)?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Dataset::new(
        dataset.class_names,
        dataset.points_per_cloud,
        dataset.units,
        clouds,
    )
}

fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn cmd_train(
    config_path: &Path,
    dataset_path: &Path,
    out: &Path,
    seed: Option<u64>,
) -> Result<(), Error> {
    let mut config = load_run_config(config_path)?;
    if let Some(seed) = seed {
        config.train.seed = seed;
    }
    let full = prepare_dataset(load_dataset(dataset_path)?, Some(&config))?;

    let (train_set, val_set, test_set) = match config.split {
        Some(fractions) => {
            let (tr, va, te) = full.split(fractions, config.train.seed)?;
            (tr, Some(va), Some(te))
        }
        None => (full, None, None),
    };

    let epochs = config.train.epochs;
    let result = train_with_progress(&train_set, &config.train, |epoch, loss, acc| {
        if epoch == 1 || epoch % 100 == 0 || epoch == epochs {
            println!("epoch {epoch} loss {loss:.6} accuracy {:.1}", 100.0 * acc);
        }
    })?;

    let mut history = String::from("epoch,loss,accuracy\n");
    for (i, (loss, acc)) in result
        .loss_history
        .iter()
        .zip(&result.accuracy_history)
        .enumerate()
    {
        history.push_str(&format!("{},{:?},{:?}\n", i + 1, loss, acc));
    }
    let history_path = out.with_extension(match out.extension() {
        Some(ext) => format!("{}.loss.csv", ext.to_string_lossy()),
        None => "loss.csv".to_string(),
    });
    write_file(&history_path, &history)?;

    save_checkpoint(
        &Checkpoint::Ancestor(AncestorCheckpoint {
            params: result.params.clone(),
            config: config.train.clone(),
        }),
        out,
    )?;

    let train_acc = 100.0 * result.accuracy_history.last().unwrap();
    println!("wrote {} (train accuracy {train_acc:.1})", out.display());
    if let Some(val) = val_set.filter(|d| !d.clouds.is_empty()) {
        println!("validation accuracy {:.1}", 100.0 * accuracy(&result.params, &val)?);
    }
    if let Some(test) = test_set.filter(|d| !d.clouds.is_empty()) {
        println!("test accuracy {:.1}", 100.0 * accuracy(&result.params, &test)?);
    }
    Ok(())
}

fn load_ancestor(path: &Path) -> Result<AncestorCheckpoint, Error> {
    match load_checkpoint(path)? {
        Checkpoint::Ancestor(a) => Ok(a),
        Checkpoint::Steerable(_) => Err(Error::SchemaMismatch {
            path: path.display().to_string(),
            msg: "expected an ancestor checkpoint, found a steerable one".into(),
        }),
    }
}

fn load_steerable(path: &Path) -> Result<SteerableCheckpoint, Error> {
    match load_checkpoint(path)? {
        Checkpoint::Steerable(s) => Ok(s),
        Checkpoint::Ancestor(_) => Err(Error::SchemaMismatch {
            path: path.display().to_string(),
            msg: "expected a steerable checkpoint, found an ancestor one".into(),
        }),
    }
}

fn cmd_build_steerable(checkpoint: &Path, out: &Path) -> Result<(), Error> {
    let ancestor = load_ancestor(checkpoint)?;
    let model = build_steerable(&ancestor.params)?;
    println!(
        "constructed {} filter banks ({} hidden units x {} points)",
        model.h() * model.k(),
        model.h(),
        model.k()
    );
    save_checkpoint(
        &Checkpoint::Steerable(SteerableCheckpoint {
            model,
            config: ancestor.config,
        }),
        out,
    )?;
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_eval(checkpoint: &Path, dataset_path: &Path, config: Option<&Path>) -> Result<(), Error> {
    let config = config.map(load_run_config).transpose()?;
    let dataset = prepare_dataset(load_dataset(dataset_path)?, config.as_ref())?;
    let (kind, acc) = match load_checkpoint(checkpoint)? {
        Checkpoint::Ancestor(a) => ("ancestor", accuracy(&a.params, &dataset)?),
        Checkpoint::Steerable(s) => {
            let correct = dataset
                .clouds
                .iter()
                .filter(|c| s.model.predict(&c.points).is_ok_and(|p| p == c.label))
                .count();
            ("steerable", correct as f64 / dataset.clouds.len() as f64)
        }
    };
    println!(
        "{kind} accuracy {:.1} on {} clouds",
        100.0 * acc,
        dataset.clouds.len()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_known_rotation(
    checkpoint: &Path,
    ancestor_path: &Path,
    dataset_path: &Path,
    out: &Path,
    noise: &[f64],
    runs: usize,
    seed: u64,
    config: Option<&Path>,
) -> Result<(), Error> {
    let steerable = load_steerable(checkpoint)?;
    let ancestor = load_ancestor(ancestor_path)?;
    let config = config.map(load_run_config).transpose()?;
    let dataset = prepare_dataset(load_dataset(dataset_path)?, config.as_ref())?;

    let report = run_known_rotation(
        &ancestor.params,
        &steerable.model,
        &dataset,
        noise,
        runs,
        seed,
    )?;

    let csv_path = out.with_extension("csv");
    let json_path = out.with_extension("json");
    write_file(&csv_path, &report.to_csv())?;
    write_file(&json_path, &report.to_json())?;
    print!("{}", report.to_table());
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

fn cmd_verify(seed: u64, trials: usize) -> Result<(), Error> {
    let report = run_all(seed, trials, ModelDims::default());
    print!("{}", report.format());
    if report.all_passed() {
        Ok(())
    } else {
        Err(verify_failure())
    }
}

fn cmd_gen_data(kind: DataKind, out: &Path, seed: u64) -> Result<(), Error> {
    let dataset = match kind {
        DataKind::Tetris => tetris_dataset(),
        DataKind::Synthetic => synthetic_dataset(&SyntheticConfig {
            seed,
            ..SyntheticConfig::default()
        }),
    };
    save_dataset(&dataset, out)?;
    println!(
        "wrote {} ({} clouds, {} classes, k={})",
        out.display(),
        dataset.clouds.len(),
        dataset.class_names.len(),
        dataset.points_per_cloud
    );
    Ok(())
}
