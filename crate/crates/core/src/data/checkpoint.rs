//! Model checkpoints: a structured text document with hexadecimal float
//! encoding (the 16-digit IEEE-754 bit pattern), so every parameter survives
//! a save/load round trip bitwise.
//!
//! Ancestor grammar:
//!
//! ```text
//! sphn-checkpoint/v1
//! kind ancestor
//! k <K>
//! h <H>
//! c <C>
//! units <word>
//! config hidden <H> epochs <N> learning_rate <lr> beta1 <b> beta2 <b> epsilon <e> seed <u64>
//! hidden <h> <k> <5 hex floats>
//! output <c> <H+2 hex floats>
//! end
//! ```
//!
//! Steerable grammar replaces the `hidden` records with per-bank records:
//!
//! ```text
//! bank <h> <k> <hex gamma> <9 hex origin-rotation rows> <20 hex bank rows>
//! coeff <h> <k> <4 hex floats>
//! ```

use super::format::{parse_f64, parse_usize, read_to_string, write_string, Lines};
use crate::conformal::Sphere;
use crate::error::{Error, Result};
use crate::geom::Rotation3;
use crate::mlgp::{GeometricNeuron, MlgpParams};
use crate::steer::{FilterBank, SteerableModel};
use crate::train::TrainConfig;
use std::fmt::Write as _;
use std::path::Path;

pub(crate) const CHECKPOINT_SCHEMA: &str = "sphn-checkpoint/v1";

/// A trained ancestor with its training-configuration echo.
#[derive(Debug, Clone, PartialEq)]
pub struct AncestorCheckpoint {
    pub params: MlgpParams,
    pub config: TrainConfig,
}

/// A constructed steerable model with the ancestor's configuration echo.
#[derive(Debug, Clone, PartialEq)]
pub struct SteerableCheckpoint {
    pub model: SteerableModel,
    pub config: TrainConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Checkpoint {
    Ancestor(AncestorCheckpoint),
    Steerable(SteerableCheckpoint),
}

impl Checkpoint {
    pub fn kind(&self) -> &'static str {
        match self {
            Checkpoint::Ancestor(_) => "ancestor",
            Checkpoint::Steerable(_) => "steerable",
        }
    }
}

fn hex(v: f64) -> String {
    format!("{:016x}", v.to_bits())
}

fn push_hex(out: &mut String, values: &[f64]) {
    for v in values {
        let _ = write!(out, " {}", hex(*v));
    }
}

fn parse_hex(lines: &Lines, raw: &str) -> Result<f64> {
    if raw.len() != 16 {
        return Err(lines.err(format!("expected 16 hex digits, found `{raw}`")));
    }
    u64::from_str_radix(raw, 16)
        .map(f64::from_bits)
        .map_err(|_| lines.err(format!("invalid hex float `{raw}`")))
}

fn config_line(cfg: &TrainConfig) -> String {
    format!(
        "config hidden {} epochs {} learning_rate {:?} beta1 {:?} beta2 {:?} epsilon {:?} seed {}",
        cfg.hidden_units,
        cfg.epochs,
        cfg.learning_rate,
        cfg.beta1,
        cfg.beta2,
        cfg.epsilon,
        cfg.seed
    )
}

fn parse_config(lines: &mut Lines) -> Result<TrainConfig> {
    let fields = lines.keyed("config")?;
    if fields.len() != 14 {
        return Err(lines.err(format!(
            "config line must hold 7 key/value pairs, found {} fields",
            fields.len()
        )));
    }
    let mut cfg = TrainConfig::default();
    for pair in fields.chunks_exact(2) {
        match pair[0] {
            "hidden" => cfg.hidden_units = parse_usize(lines, "hidden", pair[1])?,
            "epochs" => cfg.epochs = parse_usize(lines, "epochs", pair[1])?,
            "learning_rate" => cfg.learning_rate = parse_f64(lines, "learning_rate", pair[1])?,
            "beta1" => cfg.beta1 = parse_f64(lines, "beta1", pair[1])?,
            "beta2" => cfg.beta2 = parse_f64(lines, "beta2", pair[1])?,
            "epsilon" => cfg.epsilon = parse_f64(lines, "epsilon", pair[1])?,
            "seed" => {
                cfg.seed = pair[1]
                    .parse::<u64>()
                    .map_err(|_| lines.err(format!("invalid seed `{}`", pair[1])))?;
            }
            other => return Err(lines.err(format!("unknown config key `{other}`"))),
        }
    }
    Ok(cfg)
}

/// Serializes a checkpoint in the documented grammar.
pub fn checkpoint_to_string(ckpt: &Checkpoint) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CHECKPOINT_SCHEMA}");
    let _ = writeln!(out, "kind {}", ckpt.kind());
    match ckpt {
        Checkpoint::Ancestor(a) => {
            let p = &a.params;
            let _ = writeln!(out, "k {}", p.k());
            let _ = writeln!(out, "h {}", p.h());
            let _ = writeln!(out, "c {}", p.c());
            let _ = writeln!(out, "units {}", p.units);
            let _ = writeln!(out, "{}", config_line(&a.config));
            for (hi, neuron) in p.hidden.iter().enumerate() {
                for (ki, sphere) in neuron.spheres.iter().enumerate() {
                    let _ = write!(out, "hidden {hi} {ki}");
                    push_hex(&mut out, &sphere.as_array());
                    out.push('\n');
                }
            }
            for (ci, sphere) in p.output.iter().enumerate() {
                let _ = write!(out, "output {ci}");
                push_hex(&mut out, sphere);
                out.push('\n');
            }
        }
        Checkpoint::Steerable(s) => {
            let m = &s.model;
            let _ = writeln!(out, "k {}", m.k());
            let _ = writeln!(out, "h {}", m.h());
            let _ = writeln!(out, "c {}", m.c());
            let _ = writeln!(out, "units {}", m.units());
            let _ = writeln!(out, "{}", config_line(&s.config));
            for hi in 0..m.h() {
                for ki in 0..m.k() {
                    let bank = m.bank(hi, ki);
                    let _ = write!(out, "bank {hi} {ki} {}", hex(bank.gamma()));
                    for row in bank.origin_rotation().rows() {
                        push_hex(&mut out, row);
                    }
                    for row in bank.rows() {
                        push_hex(&mut out, row);
                    }
                    out.push('\n');
                }
            }
            for hi in 0..m.h() {
                for ki in 0..m.k() {
                    let _ = write!(out, "coeff {hi} {ki}");
                    push_hex(&mut out, m.coeff(hi, ki));
                    out.push('\n');
                }
            }
            for (ci, sphere) in m.output().iter().enumerate() {
                let _ = write!(out, "output {ci}");
                push_hex(&mut out, sphere);
                out.push('\n');
            }
        }
    }
    out.push_str("end\n");
    out
}

/// Parses the documented checkpoint grammar.
pub fn checkpoint_from_str(path: &str, text: &str) -> Result<Checkpoint> {
    let mut lines = Lines::new(path, text);
    let schema = lines.next("schema line")?;
    if schema.trim() != CHECKPOINT_SCHEMA {
        return Err(Error::SchemaMismatch {
            path: path.to_string(),
            msg: format!("expected `{CHECKPOINT_SCHEMA}`, found `{}`", schema.trim()),
        });
    }
    let kind_fields = lines.keyed("kind")?;
    if kind_fields.len() != 1 {
        return Err(lines.err("`kind` takes exactly one value"));
    }
    let kind = kind_fields[0].to_string();

    let k_raw = single(&mut lines, "k")?;
    let k = parse_usize(&lines, "k", k_raw)?;
    let h_raw = single(&mut lines, "h")?;
    let h = parse_usize(&lines, "h", h_raw)?;
    let c_raw = single(&mut lines, "c")?;
    let c = parse_usize(&lines, "c", c_raw)?;
    let units = single(&mut lines, "units")?.to_string();
    let config = parse_config(&mut lines)?;

    match kind.as_str() {
        "ancestor" => parse_ancestor(&mut lines, k, h, c, units, config).map(Checkpoint::Ancestor),
        "steerable" => {
            parse_steerable(&mut lines, k, h, c, units, config).map(Checkpoint::Steerable)
        }
        other => Err(Error::SchemaMismatch {
            path: path.to_string(),
            msg: format!("unknown checkpoint kind `{other}`"),
        }),
    }
}

fn single<'a>(lines: &mut Lines<'a>, key: &str) -> Result<&'a str> {
    let fields = lines.keyed(key)?;
    if fields.len() != 1 {
        return Err(lines.err(format!("`{key}` takes exactly one value")));
    }
    Ok(fields[0])
}

fn expect_record<'a>(
    lines: &mut Lines<'a>,
    key: &str,
    hi: usize,
    ki: Option<usize>,
    floats: usize,
) -> Result<Vec<f64>> {
    let fields = lines.keyed(key)?;
    let index_fields = if ki.is_some() { 2 } else { 1 };
    if fields.len() != index_fields + floats {
        return Err(lines.err(format!(
            "`{key}` record must hold {} fields, found {}",
            index_fields + floats,
            fields.len()
        )));
    }
    let got_hi = parse_usize(lines, "record index", fields[0])?;
    if got_hi != hi {
        return Err(lines.err(format!("`{key}` records out of order: expected {hi}, found {got_hi}")));
    }
    if let Some(expected_ki) = ki {
        let got_ki = parse_usize(lines, "record index", fields[1])?;
        if got_ki != expected_ki {
            return Err(lines.err(format!(
                "`{key}` records out of order: expected k={expected_ki}, found {got_ki}"
            )));
        }
    }
    fields[index_fields..]
        .iter()
        .map(|raw| parse_hex(lines, raw))
        .collect()
}

fn expect_end(lines: &mut Lines) -> Result<()> {
    let line = lines.next("`end`")?;
    if line.trim() != "end" {
        return Err(lines.err(format!("expected `end`, found `{}`", line.trim())));
    }
    Ok(())
}

fn parse_ancestor(
    lines: &mut Lines,
    k: usize,
    h: usize,
    c: usize,
    units: String,
    config: TrainConfig,
) -> Result<AncestorCheckpoint> {
    let mut hidden = Vec::with_capacity(h);
    for hi in 0..h {
        let mut spheres = Vec::with_capacity(k);
        for ki in 0..k {
            let vals = expect_record(lines, "hidden", hi, Some(ki), 5)?;
            spheres.push(Sphere::new([vals[0], vals[1], vals[2], vals[3], vals[4]]));
        }
        hidden.push(GeometricNeuron { spheres });
    }
    let mut output = Vec::with_capacity(c);
    for ci in 0..c {
        output.push(expect_record(lines, "output", ci, None, h + 2)?);
    }
    expect_end(lines)?;
    let params = MlgpParams {
        hidden,
        output,
        units,
    };
    params.validate()?;
    Ok(AncestorCheckpoint { params, config })
}

fn parse_steerable(
    lines: &mut Lines,
    k: usize,
    h: usize,
    c: usize,
    units: String,
    config: TrainConfig,
) -> Result<SteerableCheckpoint> {
    let mut banks = Vec::with_capacity(h * k);
    for hi in 0..h {
        for ki in 0..k {
            let vals = expect_record(lines, "bank", hi, Some(ki), 1 + 9 + 20)?;
            let gamma = vals[0];
            let mut ro = [[0.0; 3]; 3];
            for (i, row) in ro.iter_mut().enumerate() {
                row.copy_from_slice(&vals[1 + 3 * i..1 + 3 * (i + 1)]);
            }
            let origin_rotation = Rotation3::from_rows(ro);
            if !origin_rotation.is_special_orthogonal(1e-9) {
                return Err(lines.err(format!(
                    "bank ({hi}, {ki}): stored origin rotation is not special orthogonal"
                )));
            }
            let mut rows = [[0.0; 5]; 4];
            for (i, row) in rows.iter_mut().enumerate() {
                row.copy_from_slice(&vals[10 + 5 * i..10 + 5 * (i + 1)]);
            }
            banks.push(FilterBank::from_parts(rows, origin_rotation, gamma));
        }
    }
    let mut coeffs = Vec::with_capacity(h * k);
    for hi in 0..h {
        for ki in 0..k {
            let vals = expect_record(lines, "coeff", hi, Some(ki), 4)?;
            coeffs.push([vals[0], vals[1], vals[2], vals[3]]);
        }
    }
    let mut output = Vec::with_capacity(c);
    for ci in 0..c {
        output.push(expect_record(lines, "output", ci, None, h + 2)?);
    }
    expect_end(lines)?;
    let model = SteerableModel::from_parts(banks, coeffs, output, k, units)?;
    Ok(SteerableCheckpoint { model, config })
}

pub fn save_checkpoint(ckpt: &Checkpoint, path: &Path) -> Result<()> {
    write_string(path, &checkpoint_to_string(ckpt))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let text = read_to_string(path)?;
    checkpoint_from_str(&path.display().to_string(), &text)
}
