//! Settings shared by every subcommand: JSON config file, overridden by flags.

use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, ValueEnum};
use plapreg::plap_math::Mode;
use serde::{Deserialize, Deserializer, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Thm2,
    Thm3,
    Free,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Thm2 => Mode::Thm2,
            ModeArg::Thm3 => Mode::Thm3,
            ModeArg::Free => Mode::Free,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Theorem1,
    EpsUniform,
    Scaling,
    Composition,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    /// The field as stored.
    Value,
    /// Its nodal gradient (analytic for the oracle).
    Grad,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OracleName {
    /// `u = |x_1|^(p') / p'` with `f = 1` on `(-1, 1)^dim`.
    Sharp,
}

/// Every knob; `None` means "not given here".
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    /// Energy exponent p >= 2.
    #[arg(long)]
    pub p: Option<f64>,
    /// Regularization; comma-separated list for sweeps.
    #[arg(long, value_delimiter = ',')]
    #[serde(deserialize_with = "one_or_many")]
    pub eps: Option<Vec<f64>>,
    /// Transform exponent of alpha^s (default p/2).
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// Integrability exponent (`inf` allowed).
    #[arg(long)]
    #[serde(deserialize_with = "exponent")]
    pub q: Option<f64>,
    /// Nodes per axis.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Interior distance for seminorms and Sobolev norms.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    pub oracle: Option<OracleName>,
    /// Problem file/directory (solve, sweep) or field/solve output (estimate).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub field: Option<FieldKind>,
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    /// Scaling factors, comma-separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(deserialize_with = "one_or_many")]
    pub lambda: Option<Vec<f64>>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Settings {
    /// Flags win over the config file.
    pub fn merged(self, file: Settings) -> Settings {
        Settings {
            p: self.p.or(file.p),
            eps: self.eps.or(file.eps),
            s: self.s.or(file.s),
            theta: self.theta.or(file.theta),
            q: self.q.or(file.q),
            nodes: self.nodes.or(file.nodes),
            delta: self.delta.or(file.delta),
            dim: self.dim.or(file.dim),
            mode: self.mode.or(file.mode),
            oracle: self.oracle.or(file.oracle),
            input: self.input.or(file.input),
            field: self.field.or(file.field),
            suite: self.suite.or(file.suite),
            lambda: self.lambda.or(file.lambda),
            out: self.out.or(file.out),
        }
    }

    pub fn load(path: &Path) -> anyhow::Result<Settings> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn mode(&self) -> Mode {
        self.mode.map(Mode::from).unwrap_or_default()
    }

    pub fn dim(&self) -> usize {
        self.dim.unwrap_or(1)
    }

    pub fn out(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<f64>>, D::Error> {
    Ok(Option::<OneOrMany>::deserialize(d)?.map(|v| match v {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(xs) => xs,
    }))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NumOrText {
    Num(f64),
    Text(String),
}

fn exponent<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
    match Option::<NumOrText>::deserialize(d)? {
        None => Ok(None),
        Some(NumOrText::Num(v)) => Ok(Some(v)),
        Some(NumOrText::Text(t)) => t
            .parse()
            .map(Some)
            .map_err(|_| serde::de::Error::custom(format!("bad exponent {t:?}"))),
    }
}

/// Resolved configuration echoed into every report. `q = inf` is written as `"inf"`.
pub fn echo(command: &str, settings: &Settings) -> serde_json::Value {
    let mut value = serde_json::to_value(settings).unwrap_or_default();
    if let Some(obj) = value.as_object_mut() {
        if settings.q.is_some_and(f64::is_infinite) {
            obj.insert("q".into(), "inf".into());
        }
        obj.retain(|_, v| !v.is_null());
        obj.insert("command".into(), command.into());
    }
    value
}
