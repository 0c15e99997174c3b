use serde::{Deserialize, Serialize};

use super::{combine, SharpnessOracle, Verdict};
use crate::error::{Error, Result};
use crate::exec;
use crate::smoothness::{fit_smoothness_exponent, q_serde, Region, ShiftFamily};

/// Half-width of the acceptance band around a predicted exponent.
pub const EXPONENT_TOLERANCE: f64 = 0.05;
/// Slack below `2/p` tolerated for the `q = 2/theta` rows.
pub const THEOREM_SLACK: f64 = 0.02;
/// Fits with a smaller coefficient of determination are inconclusive.
pub const MIN_R2: f64 = 0.98;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `q < (p-1)/(p-2)`: the gradient is in `W^{1,q}`.
    Sobolev,
    /// `q = (p-1)/(p-2)`, where a logarithm enters.
    Endpoint,
    /// `(p-1)/(p-2) < q < inf`: `theta = 1/(p-1) + 1/q`.
    Nikolskii,
    /// `q = inf`: `theta = 1/(p-1)`.
    Hoelder,
}

/// Largest `theta` with `grad u` in `N^{theta,q}` for the sharpness example.
pub fn predicted_exponent(p: f64, q: f64) -> (f64, Regime) {
    let a = 1.0 / (p - 1.0);
    if q.is_infinite() {
        return (a, Regime::Hoelder);
    }
    let critical = if p > 2.0 { (p - 1.0) / (p - 2.0) } else { f64::INFINITY };
    if (q - critical).abs() <= 1e-9 * critical {
        (1.0, Regime::Endpoint)
    } else if q < critical {
        (1.0, Regime::Sobolev)
    } else {
        (a + 1.0 / q, Regime::Nikolskii)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Config {
    pub p: f64,
    pub dim: usize,
    pub nodes: usize,
    pub delta: f64,
    /// Integrability exponents checked against the table (may contain `inf`).
    #[serde(with = "q_vec")]
    pub qs: Vec<f64>,
    /// `theta` targets; each is checked at `q = 2/theta`.
    pub thetas: Vec<f64>,
    #[serde(default)]
    pub region: Region,
}

impl Theorem1Config {
    /// `q in {1, max(p-1, (p-1)/(p-2) + 1/2), 2(p-1), inf}` and
    /// `theta in {2/p, midpoint, 90% of the way to 2/(p-1)}` on 4097 nodes.
    pub fn for_p(p: f64) -> Self {
        let critical = if p > 2.0 { (p - 1.0) / (p - 2.0) } else { f64::INFINITY };
        let middle = if critical.is_finite() {
            f64::max(p - 1.0, critical + 0.5)
        } else {
            p - 1.0
        };
        Self {
            p,
            dim: 1,
            nodes: 4097,
            delta: 0.5,
            qs: vec![1.0, middle, 2.0 * (p - 1.0), f64::INFINITY],
            thetas: theorem_thetas(p),
            region: Region::Fixed,
        }
    }
}

/// `2/p`, the midpoint of `[2/p, 2/(p-1))`, and a point 90% of the way across.
pub fn theorem_thetas(p: f64) -> Vec<f64> {
    let (lo, hi) = (2.0 / p, 2.0 / (p - 1.0));
    vec![lo, 0.5 * (lo + hi), lo + 0.9 * (hi - lo)]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowKind {
    Table,
    /// `q = 2/theta` for the recorded `theta`.
    Theorem {
        theta: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentRow {
    pub p: f64,
    #[serde(with = "q_serde")]
    pub q: f64,
    pub kind: RowKind,
    pub regime: Regime,
    pub theta_pred: f64,
    pub theta_hat: f64,
    pub r2: f64,
    pub clipped: bool,
    /// Fitted exponent did not exceed the prediction by more than the tolerance.
    pub within_sharpness: bool,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Report {
    pub config: Theorem1Config,
    pub rows: Vec<ExponentRow>,
    pub verdict: Verdict,
}

fn judge(p: f64, kind: RowKind, regime: Regime, pred: f64, theta_hat: f64, r2: f64) -> Verdict {
    if r2 < MIN_R2 {
        return Verdict::Inconclusive;
    }
    if regime == Regime::Endpoint {
        return Verdict::Endpoint;
    }
    let ok = match kind {
        RowKind::Table => (theta_hat - pred).abs() <= EXPONENT_TOLERANCE,
        RowKind::Theorem { .. } => theta_hat >= 2.0 / p - THEOREM_SLACK,
    };
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// Fits the Nikol'skii exponent of the oracle gradient at every configured `q`.
pub fn run_theorem1_check(config: &Theorem1Config) -> Result<Theorem1Report> {
    let p = config.p;
    if !(p >= 2.0) {
        return Err(Error::InvalidParameter(format!("p = {p} must be >= 2")));
    }
    if let Some(q) = config.qs.iter().find(|q| !(**q >= 1.0)) {
        return Err(Error::InvalidParameter(format!("q = {q} must be >= 1")));
    }
    if let Some(t) = config.thetas.iter().find(|t| !(**t > 0.0 && **t <= 2.0)) {
        return Err(Error::InvalidParameter(format!("theta = {t} must lie in (0, 2]")));
    }
    let oracle = SharpnessOracle::new(p, config.dim)?;
    let grid = oracle.grid(config.nodes)?;
    let (_, grad, _) = oracle.fields(&grid)?;
    let family = ShiftFamily::dyadic(&grid, config.delta)?.with_region(config.region);

    let mut cells: Vec<(f64, RowKind)> = config.qs.iter().map(|&q| (q, RowKind::Table)).collect();
    cells.extend(
        config
            .thetas
            .iter()
            .map(|&theta| (2.0 / theta, RowKind::Theorem { theta })),
    );
    let fits = exec::map_slice(&cells, |&(q, _)| fit_smoothness_exponent(&grad, q, &family));

    let mut rows = Vec::with_capacity(cells.len());
    for ((q, kind), fit) in cells.into_iter().zip(fits) {
        let fit = fit?;
        let (pred, regime) = predicted_exponent(p, q);
        rows.push(ExponentRow {
            p,
            q,
            kind,
            regime,
            theta_pred: pred,
            theta_hat: fit.theta_hat,
            r2: fit.r2,
            clipped: fit.clipped,
            within_sharpness: fit.theta_hat <= pred + EXPONENT_TOLERANCE,
            verdict: judge(p, kind, regime, pred, fit.theta_hat, fit.r2),
        });
    }
    let verdict = combine(rows.iter().map(|r| r.verdict));
    Ok(Theorem1Report {
        config: config.clone(),
        rows,
        verdict,
    })
}

mod q_vec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(transparent)]
    struct Q(#[serde(with = "crate::smoothness::q_serde")] f64);

    pub fn serialize<S: Serializer>(qs: &[f64], s: S) -> Result<S::Ok, S::Error> {
        qs.iter().map(|&q| Q(q)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Ok(Vec::<Q>::deserialize(d)?.into_iter().map(|q| q.0).collect())
    }
}
