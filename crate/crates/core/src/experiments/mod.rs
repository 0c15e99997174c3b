//! Verification harness around the explicit sharpness example.
//!
//! Each check returns a serializable report carrying its configuration and a
//! [`Verdict`]; [`VerificationReport`] bundles several of them for the CLI.

mod composition;
mod exponents;
mod oracle;
mod scaling;
mod sweep;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::solver::io::write_json;

pub use composition::{
    run_composition_check, CompositionConfig, CompositionReport, CompositionRow, BETA_HOELDER_CONSTANT,
};
pub use exponents::{
    predicted_exponent, run_theorem1_check, theorem_thetas, ExponentRow, Regime, RowKind, Theorem1Config,
    Theorem1Report, EXPONENT_TOLERANCE, MIN_R2, THEOREM_SLACK,
};
pub use oracle::{oracle_fields, SharpnessOracle};
pub use scaling::{run_scaling_check, ScalingConfig, ScalingReport, HOMOGENEITY_TOLERANCE};
pub use sweep::{run_eps_sweep, SweepCell, SweepConfig, SweepResult, SweepVerdicts, STEP_GROWTH, UNIFORMITY_FACTOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Fit quality too low to decide.
    Inconclusive,
    /// Borderline exponent; reported, not adjudicated.
    Endpoint,
    /// Parameters outside the range any estimate covers.
    OutsideTheorem,
}

/// `Fail` if anything failed, `Pass` if at least one check passed, otherwise
/// `Inconclusive`.
pub fn combine(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
    let mut any_pass = false;
    for v in verdicts {
        match v {
            Verdict::Fail => return Verdict::Fail,
            Verdict::Pass => any_pass = true,
            _ => {}
        }
    }
    if any_pass {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    /// Resolved configuration echoed by the caller.
    pub config: serde_json::Value,
    pub theorem1: Vec<Theorem1Report>,
    pub sweeps: Vec<SweepResult>,
    pub scaling: Vec<ScalingReport>,
    pub composition: Vec<CompositionReport>,
}

impl VerificationReport {
    pub fn verdict(&self) -> Verdict {
        combine(
            self.theorem1
                .iter()
                .map(|r| r.verdict)
                .chain(self.sweeps.iter().map(|r| r.verdicts.verdict))
                .chain(self.scaling.iter().map(|r| r.verdict))
                .chain(self.composition.iter().map(|r| r.verdict)),
        )
    }

    /// Writes `report.json` plus `exponents.csv` and `sweep.csv` when the
    /// corresponding sections are present.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        #[derive(Serialize)]
        struct Out<'a> {
            verdict: Verdict,
            #[serde(flatten)]
            body: &'a VerificationReport,
        }
        write_json(
            &dir.join("report.json"),
            &Out {
                verdict: self.verdict(),
                body: self,
            },
        )?;
        if !self.theorem1.is_empty() {
            write_exponent_table(dir.join("exponents.csv"), self.theorem1.iter().flat_map(|r| &r.rows))?;
        }
        if !self.sweeps.is_empty() {
            write_sweep_table(dir.join("sweep.csv"), &self.sweeps)?;
        }
        Ok(())
    }
}

fn label<T: Serialize>(value: &T) -> String {
    match serde_json::to_value(value) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

/// CSV mirror of the exponent table: `p,q,kind,theta_target,regime,theta_pred,theta_hat,r2,verdict`.
pub fn write_exponent_table<'a>(path: impl AsRef<Path>, rows: impl IntoIterator<Item = &'a ExponentRow>) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record([
        "p",
        "q",
        "kind",
        "theta_target",
        "regime",
        "theta_pred",
        "theta_hat",
        "r2",
        "verdict",
    ])?;
    for row in rows {
        let (kind, target) = match row.kind {
            RowKind::Table => ("table", String::new()),
            RowKind::Theorem { theta } => ("theorem", format!("{theta}")),
        };
        let q = if row.q.is_infinite() {
            "inf".to_string()
        } else {
            format!("{}", row.q)
        };
        wtr.write_record([
            format!("{}", row.p),
            q,
            kind.to_string(),
            target,
            label(&row.regime),
            format!("{}", row.theta_pred),
            format!("{}", row.theta_hat),
            format!("{}", row.r2),
            label(&row.verdict),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// `p,s,eps,w1p_norm,alpha_w12_norm,el_residual,iterations`, one line per cell.
pub fn write_sweep_table(path: impl AsRef<Path>, sweeps: &[SweepResult]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record([
        "p",
        "s",
        "eps",
        "w1p_norm",
        "alpha_w12_norm",
        "el_residual",
        "iterations",
    ])?;
    for sweep in sweeps {
        for c in &sweep.per_eps {
            wtr.write_record([
                format!("{}", sweep.p),
                format!("{}", sweep.s),
                format!("{:e}", c.eps),
                format!("{:e}", c.w1p_norm),
                format!("{:e}", c.alpha_w12_norm),
                format!("{:e}", c.el_residual),
                c.iterations.to_string(),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}
