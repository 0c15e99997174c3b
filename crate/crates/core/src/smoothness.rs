//! Nikol'skii-type smoothness of nodal fields.
//!
//! For a lattice shift `v` the translate difference `x -> u(x+v) - u(x)` is
//! measured in `L^q` over the `|v|`-interior of the domain. The seminorm over a
//! finite shift family is the largest quotient `norm / |v|^theta`, and the
//! smoothness exponent is the least-squares slope of `log norm` against `log |v|`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::plap_math::beta_theta;
use crate::tensorfield::{jacobian, Grid, InteriorMask, ScalarField, VectorField};

/// Nodal data with a fixed number of components per node.
pub trait NodalData: Sync {
    fn grid(&self) -> &Grid;
    fn width(&self) -> usize;
    fn raw(&self) -> &[f64];
}

impl NodalData for ScalarField {
    fn grid(&self) -> &Grid {
        ScalarField::grid(self)
    }
    fn width(&self) -> usize {
        1
    }
    fn raw(&self) -> &[f64] {
        self.values()
    }
}

impl NodalData for VectorField {
    fn grid(&self) -> &Grid {
        VectorField::grid(self)
    }
    fn width(&self) -> usize {
        self.dim()
    }
    fn raw(&self) -> &[f64] {
        self.values()
    }
}

/// A lattice translate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shift {
    /// Node offsets per axis (second entry 0 in 1D).
    pub offset: [i64; 2],
    pub vector: [f64; 2],
    pub length: f64,
}

impl Shift {
    pub fn new(grid: &Grid, offset: [i64; 2]) -> Self {
        let mut vector = [0.0; 2];
        for k in 0..grid.dim() {
            vector[k] = offset[k] as f64 * grid.spacing()[k];
        }
        let length = (vector[0] * vector[0] + vector[1] * vector[1]).sqrt();
        Self { offset, vector, length }
    }
}

/// Where translate differences of a shift family are integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    /// The fixed `delta`-interior for every shift (local seminorm on `Omega_delta`).
    #[default]
    Fixed,
    /// The `|v|`-interior of each shift.
    Shrinking,
}

/// Shifts with `|v| <= delta`, sorted by length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftFamily {
    pub delta: f64,
    pub shifts: Vec<Shift>,
    #[serde(default)]
    pub region: Region,
}

impl ShiftFamily {
    /// Axis shifts of `2^k` nodes with `|v| <= delta`, plus in 2D the
    /// diagonals `(2^k, 2^k)` and `(2^k, -2^k)`.
    pub fn dyadic(grid: &Grid, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter(format!("delta = {delta} must be positive")));
        }
        let tol = 1e-12 * delta;
        let mut shifts = Vec::new();
        let mut k: i64 = 1;
        loop {
            let mut candidates = vec![[k, 0]];
            if grid.dim() == 2 {
                candidates.extend([[0, k], [k, k], [k, -k]]);
            }
            let fitted: Vec<Shift> = candidates
                .into_iter()
                .map(|o| Shift::new(grid, o))
                .filter(|s| s.length <= delta + tol)
                .collect();
            if fitted.is_empty() {
                break;
            }
            shifts.extend(fitted);
            k *= 2;
        }
        Self::from_shifts(delta, shifts)
    }

    pub fn from_shifts(delta: f64, mut shifts: Vec<Shift>) -> Result<Self> {
        if shifts.is_empty() {
            return Err(Error::EmptyShifts);
        }
        if let Some(s) = shifts
            .iter()
            .find(|s| s.length > delta * (1.0 + 1e-12) || s.length == 0.0)
        {
            return Err(Error::InvalidParameter(format!(
                "shift of length {} outside (0, delta = {delta}]",
                s.length
            )));
        }
        shifts.sort_by(|a, b| a.length.total_cmp(&b.length));
        Ok(Self {
            delta,
            shifts,
            region: Region::default(),
        })
    }

    pub fn with_region(mut self, region: Region) -> Self {
        self.region = region;
        self
    }

    /// Shifts usable for exponent fitting: `4h <= |v| <= delta / 2`.
    pub fn fit_window(&self, grid: &Grid) -> (f64, f64) {
        (4.0 * grid.h_max() * (1.0 - 1e-12), 0.5 * self.delta * (1.0 + 1e-12))
    }
}

fn check_q(q: f64) -> Result<()> {
    if q >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("q = {q} must be >= 1")))
    }
}

/// `L^q` norm (weighted by node weights; `q = inf` allowed) of
/// `x -> u(x+v) - u(x)` over the `|v|`-interior.
pub fn shift_difference_norm<F: NodalData + ?Sized>(u: &F, shift: &Shift, q: f64) -> Result<f64> {
    shift_difference_norm_on(u, shift, q, &InteriorMask::new(u.grid(), shift.length))
}

/// As [`shift_difference_norm`] but over a given region, which must lie in the
/// `|v|`-interior.
pub fn shift_difference_norm_on<F: NodalData + ?Sized>(
    u: &F,
    shift: &Shift,
    q: f64,
    mask: &InteriorMask,
) -> Result<f64> {
    check_q(q)?;
    let grid = u.grid();
    if mask.is_empty() {
        return Err(Error::EmptyMask { delta: mask.delta() });
    }
    if mask.delta() < shift.length * (1.0 - 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "region is the {}-interior but the shift has length {}",
            mask.delta(),
            shift.length
        )));
    }
    let width = u.width();
    let data = u.raw();
    let idx = mask.indices();
    let terms = exec::map_slice(&idx, |&i| {
        let m = grid.multi_index(i);
        let mut target = [0usize; 2];
        for k in 0..grid.dim() {
            let t = m[k] as i64 + shift.offset[k];
            debug_assert!(t >= 0 && (t as usize) < grid.nodes()[k]);
            target[k] = t as usize;
        }
        let j = grid.flat_index(target);
        let d2: f64 = (0..width)
            .map(|c| {
                let d = data[j * width + c] - data[i * width + c];
                d * d
            })
            .sum();
        let d = d2.sqrt();
        if q.is_infinite() {
            d
        } else {
            grid.node_weight(i) * d.powf(q)
        }
    });
    Ok(if q.is_infinite() {
        terms.into_iter().fold(0.0, f64::max)
    } else {
        terms.into_iter().sum::<f64>().powf(1.0 / q)
    })
}

/// All per-shift norms, in family order, over the family's region.
pub fn per_shift_norms<F: NodalData + ?Sized>(u: &F, family: &ShiftFamily, q: f64) -> Result<Vec<f64>> {
    match family.region {
        Region::Shrinking => family.shifts.iter().map(|s| shift_difference_norm(u, s, q)).collect(),
        Region::Fixed => {
            let mask = InteriorMask::new(u.grid(), family.delta);
            family
                .shifts
                .iter()
                .map(|s| shift_difference_norm_on(u, s, q, &mask))
                .collect()
        }
    }
}

/// `max_v norm(v) / |v|^theta` over the family.
pub fn nikolskii_seminorm<F: NodalData + ?Sized>(u: &F, q: f64, theta: f64, family: &ShiftFamily) -> Result<f64> {
    if family.shifts.is_empty() {
        return Err(Error::EmptyShifts);
    }
    let norms = per_shift_norms(u, family, q)?;
    Ok(family
        .shifts
        .iter()
        .zip(&norms)
        .map(|(s, n)| n / s.length.powf(theta))
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub theta_hat: f64,
    pub a_hat: f64,
    pub r2: f64,
    /// Every difference in the window vanished.
    pub constant_like: bool,
    /// The raw slope exceeded 1 (or fell below 0) and was clipped.
    pub clipped: bool,
    /// Number of `(|v|, norm)` pairs in the regression.
    pub points: usize,
}

fn constant_fit() -> ExponentFit {
    ExponentFit {
        theta_hat: 1.0,
        a_hat: 0.0,
        r2: 1.0,
        constant_like: true,
        clipped: false,
        points: 0,
    }
}

/// Least-squares fit of `log norm = log A + theta log |v|` over the fit window.
pub fn fit_exponent_from_norms(grid: &Grid, family: &ShiftFamily, norms: &[f64]) -> Result<ExponentFit> {
    if norms.iter().all(|&n| n == 0.0) {
        return Ok(constant_fit());
    }
    let (lo, hi) = family.fit_window(grid);
    let window: Vec<(f64, f64)> = family
        .shifts
        .iter()
        .zip(norms)
        .filter(|(s, _)| s.length >= lo && s.length <= hi)
        .map(|(s, &n)| (s.length, n))
        .collect();
    let mut lengths: Vec<f64> = window.iter().map(|w| w.0).collect();
    lengths.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * *b);
    if lengths.len() < 3 {
        return Err(Error::InsufficientShifts {
            needed: 3,
            found: lengths.len(),
        });
    }
    let points: Vec<(f64, f64)> = window
        .iter()
        .filter(|(_, n)| *n > 0.0)
        .map(|(l, n)| (l.ln(), n.ln()))
        .collect();
    if points.is_empty() {
        return Ok(constant_fit());
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientShifts { needed: 3, found: 1 });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    let theta_hat = slope.clamp(0.0, 1.0);
    Ok(ExponentFit {
        theta_hat,
        a_hat: intercept.exp(),
        r2,
        constant_like: false,
        clipped: theta_hat != slope,
        points: points.len(),
    })
}

pub fn fit_smoothness_exponent<F: NodalData + ?Sized>(u: &F, q: f64, family: &ShiftFamily) -> Result<ExponentFit> {
    let norms = per_shift_norms(u, family, q)?;
    fit_exponent_from_norms(u.grid(), family, &norms)
}

/// Per-shift table row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftNorm {
    pub length: f64,
    pub vx: f64,
    pub vy: f64,
    pub norm: f64,
}

pub(crate) mod q_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &f64, s: S) -> Result<S::Ok, S::Error> {
        if q.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*q)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("bad exponent {t:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeminormReport {
    #[serde(with = "q_serde")]
    pub q: f64,
    pub delta: f64,
    pub shifts: Vec<ShiftNorm>,
    pub fitted_theta: f64,
    pub fitted_a: f64,
    pub fit_r2: f64,
    pub constant_like: bool,
    pub clipped: bool,
    pub fit_window: (f64, f64),
    pub region: Region,
}

pub fn seminorm_report<F: NodalData + ?Sized>(u: &F, q: f64, family: &ShiftFamily) -> Result<SeminormReport> {
    let norms = per_shift_norms(u, family, q)?;
    let fit = fit_exponent_from_norms(u.grid(), family, &norms)?;
    Ok(SeminormReport {
        q,
        delta: family.delta,
        shifts: family
            .shifts
            .iter()
            .zip(&norms)
            .map(|(s, &norm)| ShiftNorm {
                length: s.length,
                vx: s.vector[0],
                vy: s.vector[1],
                norm,
            })
            .collect(),
        fitted_theta: fit.theta_hat,
        fitted_a: fit.a_hat,
        fit_r2: fit.r2,
        constant_like: fit.constant_like,
        clipped: fit.clipped,
        fit_window: family.fit_window(u.grid()),
        region: family.region,
    })
}

/// Writes the per-shift table as CSV with header `length,vx,vy,norm`.
pub fn write_shift_table(path: impl AsRef<std::path::Path>, report: &SeminormReport) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record(["length", "vx", "vy", "norm"])?;
    for row in &report.shifts {
        wtr.write_record([row.length, row.vx, row.vy, row.norm].map(|v| format!("{v:e}")))?;
    }
    wtr.flush()?;
    Ok(())
}

fn as_vector(u: &ScalarField) -> VectorField {
    let grid = u.grid().clone();
    let n = grid.dim();
    let mut values = vec![0.0; grid.len() * n];
    for (i, v) in u.values().iter().enumerate() {
        values[i * n] = *v;
    }
    VectorField::new(grid, values).expect("padding a finite field")
}

/// Quadrature-weighted `L^2` norm of the nodal Jacobian over the mask.
pub fn sobolev_w12_seminorm(v: &VectorField, mask: &InteriorMask) -> Result<f64> {
    if mask.is_empty() {
        return Err(Error::EmptyMask { delta: mask.delta() });
    }
    let grid = v.grid();
    let n = grid.dim();
    let jac = jacobian(v);
    let sum: f64 = mask
        .indices()
        .iter()
        .map(|&i| grid.node_weight(i) * jac[i * n * n..(i + 1) * n * n].iter().map(|x| x * x).sum::<f64>())
        .sum();
    Ok(sum.sqrt())
}

/// `(||V||_{L^2}^2 + [V]_{W^{1,2}}^2)^(1/2)` over the mask.
pub fn sobolev_w12_norm(v: &VectorField, mask: &InteriorMask) -> Result<f64> {
    let semi = sobolev_w12_seminorm(v, mask)?;
    let grid = v.grid();
    let l2: f64 = mask
        .indices()
        .iter()
        .map(|&i| grid.node_weight(i) * v.at(i).iter().map(|x| x * x).sum::<f64>())
        .sum();
    Ok((l2 + semi * semi).sqrt())
}

/// `W^{1,p}` norm of a scalar field over the whole grid, nodal gradient.
pub fn sobolev_w1p_norm(u: &ScalarField, p: f64) -> f64 {
    let grad = crate::tensorfield::gradient(u);
    let lp = u.lq_norm(p);
    let glp = grad.lq_norm(p);
    (lp.powf(p) + glp.powf(p)).powf(1.0 / p)
}

/// W^{1,2} seminorm of a scalar field (treated as a vector field with one nonzero component).
pub fn scalar_w12_seminorm(u: &ScalarField, mask: &InteriorMask) -> Result<f64> {
    sobolev_w12_seminorm(&as_vector(u), mask)
}

/// Difference-quotient constant relating `L^2` translate differences to the
/// discrete `W^{1,2}` seminorm: `||V(.+v) - V||_{L^2} <= C |v| [V]_{W^{1,2}}`.
/// Calibrated on smooth fields (affine and trigonometric, 1D and 2D, see the
/// `composition_constant_calibration` test) and frozen with a 10% margin.
pub const COMPOSITION_CONSTANT: [f64; 2] = [1.1, 1.1];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositionCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub w12_seminorm: f64,
}

impl CompositionCheck {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

/// Compares `[beta(V)]_{N^{theta, 2/theta}}` over `family` with
/// `C M [V]^theta_{W^{1,2}(mask)}`, `beta = beta_theta`, `C` frozen per dimension.
pub fn composition_bound_check(
    v: &VectorField,
    theta: f64,
    hoelder_constant: f64,
    mask: &InteriorMask,
    family: &ShiftFamily,
) -> Result<CompositionCheck> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParameter(format!("theta = {theta} outside (0, 1)")));
    }
    let composed = v.map_vectors(|w| beta_theta(w, theta))?;
    let lhs = nikolskii_seminorm(&composed, 2.0 / theta, theta, family)?;
    let semi = sobolev_w12_seminorm(v, mask)?;
    let constant = COMPOSITION_CONSTANT[v.dim() - 1];
    Ok(CompositionCheck {
        lhs,
        rhs: constant * hoelder_constant * semi.powf(theta),
        constant,
        w12_seminorm: semi,
    })
}
