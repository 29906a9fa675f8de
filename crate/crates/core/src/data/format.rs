//! Line-oriented text formats for datasets and run configurations.
//!
//! Dataset grammar (UTF-8, one record per line, terminated by `end`):
//!
//! ```text
//! sphn-pointset/v1
//! k <points-per-cloud>
//! units <word>
//! classes <name>...
//! cloud <id> <label> <x1> <y1> <z1> ... (3k coordinates)
//! end
//! ```
//!
//! Run-config grammar:
//!
//! ```text
//! sphn-config/v1
//! hidden <H>
//! epochs <N>
//! learning_rate <lr>
//! seed <u64>
//! split <train> <val> <test>    (optional)
//! anchors <i> <j> <k>           (optional; enables pose standardization)
//! end
//! ```
//!
//! Floats are written in shortest round-trip decimal, so save/load is
//! bitwise faithful.

use super::{Dataset, LabeledCloud};
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::train::TrainConfig;
use std::fmt::Write as _;
use std::path::Path;

pub(crate) const DATASET_SCHEMA: &str = "sphn-pointset/v1";
pub(crate) const CONFIG_SCHEMA: &str = "sphn-config/v1";

/// Conventional train/validation/test fractions for user datasets.
pub const DEFAULT_SPLIT: [f64; 3] = [0.38, 0.11, 0.51];

fn parse_err(path: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_string(),
        line,
        msg: msg.into(),
    }
}

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn write_string(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// A line cursor with 1-based positions for diagnostics.
pub(crate) struct Lines<'a> {
    path: &'a str,
    iter: std::str::Lines<'a>,
    pub pos: usize,
}

impl<'a> Lines<'a> {
    pub fn new(path: &'a str, text: &'a str) -> Self {
        Self {
            path,
            iter: text.lines(),
            pos: 0,
        }
    }

    pub fn next(&mut self, what: &str) -> Result<&'a str> {
        self.pos += 1;
        self.iter
            .next()
            .ok_or_else(|| parse_err(self.path, self.pos, format!("missing {what}")))
    }

    pub fn err(&self, msg: impl Into<String>) -> Error {
        parse_err(self.path, self.pos, msg)
    }

    /// Expects a `key value...` line; returns the fields after the key.
    pub fn keyed(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let line = self.next(key)?;
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some(k) if k == key => Ok(fields.collect()),
            Some(k) => Err(self.err(format!("expected `{key}`, found `{k}`"))),
            None => Err(self.err(format!("expected `{key}`, found empty line"))),
        }
    }
}

pub(crate) fn parse_f64(lines: &Lines, field: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>()
        .map_err(|_| lines.err(format!("invalid float for {field}: `{raw}`")))
}

pub(crate) fn parse_usize(lines: &Lines, field: &str, raw: &str) -> Result<usize> {
    raw.parse::<usize>()
        .map_err(|_| lines.err(format!("invalid integer for {field}: `{raw}`")))
}

/// Serializes a dataset in the documented grammar.
pub fn dataset_to_string(dataset: &Dataset) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{DATASET_SCHEMA}");
    let _ = writeln!(out, "k {}", dataset.points_per_cloud);
    let _ = writeln!(out, "units {}", dataset.units);
    let _ = writeln!(out, "classes {}", dataset.class_names.join(" "));
    for cloud in &dataset.clouds {
        let _ = write!(out, "cloud {} {}", cloud.id, cloud.label);
        for p in &cloud.points {
            let _ = write!(out, " {:?} {:?} {:?}", p.x, p.y, p.z);
        }
        out.push('\n');
    }
    out.push_str("end\n");
    out
}

/// Parses the documented dataset grammar; diagnostics carry `path:line`.
pub fn dataset_from_str(path: &str, text: &str) -> Result<Dataset> {
    let mut lines = Lines::new(path, text);
    let schema = lines.next("schema line")?;
    if schema.trim() != DATASET_SCHEMA {
        return Err(Error::SchemaMismatch {
            path: path.to_string(),
            msg: format!("expected `{DATASET_SCHEMA}`, found `{}`", schema.trim()),
        });
    }

    let k_fields = lines.keyed("k")?;
    if k_fields.len() != 1 {
        return Err(lines.err("`k` takes exactly one value"));
    }
    let k = parse_usize(&lines, "k", k_fields[0])?;
    if k == 0 {
        return Err(lines.err("k must be >= 1"));
    }

    let units_fields = lines.keyed("units")?;
    if units_fields.len() != 1 {
        return Err(lines.err("`units` takes exactly one word"));
    }
    let units = units_fields[0].to_string();

    let class_fields = lines.keyed("classes")?;
    if class_fields.is_empty() {
        return Err(lines.err("`classes` needs at least one name"));
    }
    let class_names: Vec<String> = class_fields.iter().map(|s| s.to_string()).collect();

    let mut clouds = Vec::new();
    loop {
        let line = lines.next("`cloud` record or `end`")?;
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some("end") => break,
            Some("cloud") => {
                let id = fields
                    .next()
                    .ok_or_else(|| lines.err("cloud record missing id"))?
                    .to_string();
                let label_raw = fields
                    .next()
                    .ok_or_else(|| lines.err(format!("cloud {id}: missing label")))?;
                let label = parse_usize(&lines, "label", label_raw)?;
                if label >= class_names.len() {
                    return Err(lines.err(format!(
                        "cloud {id}: label {label} out of range for {} classes",
                        class_names.len()
                    )));
                }
                let coords: Vec<&str> = fields.collect();
                if coords.len() != 3 * k {
                    return Err(lines.err(format!(
                        "cloud {id}: expected {} coordinates, found {}",
                        3 * k,
                        coords.len()
                    )));
                }
                let mut points = Vec::with_capacity(k);
                for chunk in coords.chunks_exact(3) {
                    let x = parse_f64(&lines, "x", chunk[0])?;
                    let y = parse_f64(&lines, "y", chunk[1])?;
                    let z = parse_f64(&lines, "z", chunk[2])?;
                    if !(x.is_finite() && y.is_finite() && z.is_finite()) {
                        return Err(lines.err(format!("cloud {id}: non-finite coordinate")));
                    }
                    points.push(Vec3::new(x, y, z));
                }
                clouds.push(LabeledCloud { id, label, points });
            }
            Some(other) => return Err(lines.err(format!("unexpected record `{other}`"))),
            None => return Err(lines.err("unexpected empty line")),
        }
    }
    if clouds.is_empty() {
        return Err(parse_err(path, lines.pos, "dataset has no clouds"));
    }
    Dataset::new(class_names, k, units, clouds)
}

pub fn save_dataset(dataset: &Dataset, path: &Path) -> Result<()> {
    write_string(path, &dataset_to_string(dataset))
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let text = read_to_string(path)?;
    dataset_from_str(&path.display().to_string(), &text)
}

/// Training setup read from a config file: hyperparameters plus optional
/// split fractions and pose-standardization anchors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub train: TrainConfig,
    pub split: Option<[f64; 3]>,
    pub anchors: Option<[usize; 3]>,
}

pub fn run_config_to_string(cfg: &RunConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CONFIG_SCHEMA}");
    let _ = writeln!(out, "hidden {}", cfg.train.hidden_units);
    let _ = writeln!(out, "epochs {}", cfg.train.epochs);
    let _ = writeln!(out, "learning_rate {:?}", cfg.train.learning_rate);
    let _ = writeln!(out, "seed {}", cfg.train.seed);
    if let Some(split) = cfg.split {
        let _ = writeln!(out, "split {:?} {:?} {:?}", split[0], split[1], split[2]);
    }
    if let Some(anchors) = cfg.anchors {
        let _ = writeln!(out, "anchors {} {} {}", anchors[0], anchors[1], anchors[2]);
    }
    out.push_str("end\n");
    out
}

pub fn run_config_from_str(path: &str, text: &str) -> Result<RunConfig> {
    let mut lines = Lines::new(path, text);
    let schema = lines.next("schema line")?;
    if schema.trim() != CONFIG_SCHEMA {
        return Err(Error::SchemaMismatch {
            path: path.to_string(),
            msg: format!("expected `{CONFIG_SCHEMA}`, found `{}`", schema.trim()),
        });
    }
    let mut cfg = RunConfig::default();
    let mut seen_end = false;
    while !seen_end {
        let line = lines.next("config key or `end`")?;
        let mut fields = line.split_whitespace();
        let key = match fields.next() {
            Some(k) => k,
            None => return Err(lines.err("unexpected empty line")),
        };
        let rest: Vec<&str> = fields.collect();
        match key {
            "end" => seen_end = true,
            "hidden" if rest.len() == 1 => {
                cfg.train.hidden_units = parse_usize(&lines, "hidden", rest[0])?;
            }
            "epochs" if rest.len() == 1 => {
                cfg.train.epochs = parse_usize(&lines, "epochs", rest[0])?;
            }
            "learning_rate" if rest.len() == 1 => {
                cfg.train.learning_rate = parse_f64(&lines, "learning_rate", rest[0])?;
            }
            "seed" if rest.len() == 1 => {
                cfg.train.seed = rest[0]
                    .parse::<u64>()
                    .map_err(|_| lines.err(format!("invalid seed `{}`", rest[0])))?;
            }
            // Bare `split` takes the conventional 38/11/51 fractions.
            "split" if rest.is_empty() => {
                cfg.split = Some(DEFAULT_SPLIT);
            }
            "split" if rest.len() == 3 => {
                cfg.split = Some([
                    parse_f64(&lines, "split", rest[0])?,
                    parse_f64(&lines, "split", rest[1])?,
                    parse_f64(&lines, "split", rest[2])?,
                ]);
            }
            "anchors" if rest.len() == 3 => {
                cfg.anchors = Some([
                    parse_usize(&lines, "anchors", rest[0])?,
                    parse_usize(&lines, "anchors", rest[1])?,
                    parse_usize(&lines, "anchors", rest[2])?,
                ]);
            }
            other => {
                return Err(lines.err(format!("unknown or malformed config line `{other}`")));
            }
        }
    }
    cfg.train.validate()?;
    Ok(cfg)
}

pub fn save_run_config(cfg: &RunConfig, path: &Path) -> Result<()> {
    write_string(path, &run_config_to_string(cfg))
}

pub fn load_run_config(path: &Path) -> Result<RunConfig> {
    let text = read_to_string(path)?;
    run_config_from_str(&path.display().to_string(), &text)
}
