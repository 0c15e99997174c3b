//! Pointwise maps of the regularized p-energy.
//!
//! All maps take `eps`, `p`, `s`, `theta` explicitly so parameter sweeps do not
//! need to build a [`PLapParams`]. Vectors are plain slices of any length.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which regularity regime the exponents are checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `p >= 3`, `(p-1)/2 < s <= p/2`.
    Thm2,
    /// `2 <= p < 3`, `1 <= s <= p/2`.
    Thm3,
    /// Only `p >= 2`, `eps >= 0`, `q_nik >= 1` are enforced.
    #[default]
    Free,
}

/// Exponent bundle `(p, eps, s, theta, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PLapParams {
    pub p: f64,
    pub eps: f64,
    pub s: f64,
    pub theta: Option<f64>,
    pub q_nik: f64,
}

impl PLapParams {
    /// Defaults to the Bojarski–Iwaniec exponent `s = p/2` and `q = 2`.
    pub fn new(p: f64, eps: f64) -> Self {
        Self {
            p,
            eps,
            s: p / 2.0,
            theta: None,
            q_nik: 2.0,
        }
    }

    pub fn with_s(mut self, s: f64) -> Self {
        self.s = s;
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = Some(theta);
        self
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q_nik = q;
        self
    }

    /// `q = p - 2s + 2`, the exponent of the differentiated test function.
    pub fn q_proof(&self) -> f64 {
        self.p - 2.0 * self.s + 2.0
    }

    pub fn p_conj(&self) -> f64 {
        conjugate_exponent(self.p)
    }

    /// Whether `s` lies in the admissible range of `mode`.
    pub fn s_in_range(&self, mode: Mode) -> bool {
        let (p, s) = (self.p, self.s);
        match mode {
            Mode::Thm2 => (p - 1.0) / 2.0 < s && s <= p / 2.0,
            Mode::Thm3 => (1.0..=p / 2.0).contains(&s),
            Mode::Free => s > 0.0,
        }
    }

    pub fn validate(&self, mode: Mode) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        let p = self.p;
        if !p.is_finite() || p < 2.0 {
            return bad(format!("p = {p} must be a finite number >= 2"));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return bad(format!("eps = {} must be finite and >= 0", self.eps));
        }
        if !(self.q_nik >= 1.0) {
            return bad(format!("q = {} must be >= 1", self.q_nik));
        }
        if !self.s.is_finite() || self.s <= 0.0 {
            return bad(format!("s = {} must be positive", self.s));
        }
        match mode {
            Mode::Thm2 if p < 3.0 => return bad(format!("thm2 mode requires p >= 3, got p = {p}")),
            Mode::Thm3 if p >= 3.0 => return bad(format!("thm3 mode requires 2 <= p < 3, got p = {p}")),
            _ => {}
        }
        if !self.s_in_range(mode) {
            return bad(match mode {
                Mode::Thm2 => format!("thm2 mode requires (p-1)/2 < s <= p/2, got s = {}", self.s),
                _ => format!("thm3 mode requires 1 <= s <= p/2, got s = {}", self.s),
            });
        }
        if let Some(theta) = self.theta {
            if mode != Mode::Free && !(2.0 / p <= theta && theta < 2.0 / (p - 1.0)) {
                return bad(format!("theta = {theta} outside [2/p, 2/(p-1))"));
            }
            if !(theta > 0.0 && theta <= 1.0) {
                return bad(format!("theta = {theta} outside (0, 1]"));
            }
        }
        Ok(())
    }
}

pub fn conjugate_exponent(p: f64) -> f64 {
    p / (p - 1.0)
}

fn norm_sq(w: &[f64]) -> f64 {
    w.iter().map(|x| x * x).sum()
}

fn norm(w: &[f64]) -> f64 {
    norm_sq(w).sqrt()
}

/// `(eps^2 + |w|^2)^(1/2)`.
pub fn l_eps(w: &[f64], eps: f64) -> f64 {
    (eps * eps + norm_sq(w)).sqrt()
}

/// `L_eps(w) = l_eps(w)^p / p`.
pub fn lagrangian(w: &[f64], eps: f64, p: f64) -> f64 {
    l_eps(w, eps).powf(p) / p
}

/// `grad L_eps(w) = l_eps(w)^(p-2) w`.
pub fn lagrangian_grad(w: &[f64], eps: f64, p: f64) -> Vec<f64> {
    let a = l_eps(w, eps).powf(p - 2.0);
    w.iter().map(|x| a * x).collect()
}

/// Coefficients `(a, b)` with `D^2 L_eps(w) = a I + b w w^T`, i.e.
/// `a = l^(p-2)`, `b = (p-2) l^(p-4)`. Requires `l > 0` unless `p >= 4` or `p == 2`.
pub fn hessian_coefficients(l: f64, p: f64) -> (f64, f64) {
    let a = l.powf(p - 2.0);
    let b = if p == 2.0 { 0.0 } else { (p - 2.0) * l.powf(p - 4.0) };
    (a, b)
}

/// Row-major `n x n` Hessian of `L_eps`.
pub fn lagrangian_hessian(w: &[f64], eps: f64, p: f64) -> Result<Vec<f64>> {
    let l = l_eps(w, eps);
    if l == 0.0 && p < 4.0 && p != 2.0 {
        return Err(Error::SingularPoint);
    }
    let (a, b) = hessian_coefficients(l, p);
    let n = w.len();
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            // w_i w_j = 0 at l = 0, so b = inf never meets a nonzero factor
            let ww = w[i] * w[j];
            h[i * n + j] = if ww == 0.0 { 0.0 } else { b * ww };
        }
        h[i * n + i] += a;
    }
    Ok(h)
}

/// `alpha^s_eps(w) = l_eps(w)^(s-1) w`, extended by `0 -> 0` at `eps = 0`.
pub fn alpha_s(w: &[f64], eps: f64, s: f64) -> Vec<f64> {
    let l = l_eps(w, eps);
    if l == 0.0 {
        return vec![0.0; w.len()];
    }
    let a = l.powf(s - 1.0);
    w.iter().map(|x| a * x).collect()
}

/// `beta(w) = |w|^(theta-1) w`, the inverse of `alpha^(1/theta)_0`.
pub fn beta_theta(w: &[f64], theta: f64) -> Vec<f64> {
    alpha_s(w, 0.0, theta)
}

/// `<a(w) - a(v), w - v> - (|w|^(s-1) + |v|^(s-1)) |w - v|^2 / 2` with
/// `a = alpha^s_0`; nonnegative for `s >= 1`.
pub fn monotonicity_gap(w: &[f64], v: &[f64], s: f64) -> f64 {
    let aw = alpha_s(w, 0.0, s);
    let av = alpha_s(v, 0.0, s);
    let pair: f64 = aw
        .iter()
        .zip(&av)
        .zip(w.iter().zip(v))
        .map(|((a, b), (x, y))| (a - b) * (x - y))
        .sum();
    let dist_sq: f64 = w.iter().zip(v).map(|(x, y)| (x - y) * (x - y)).sum();
    let pw = |z: &[f64]| {
        let r = norm(z);
        if r == 0.0 && s == 1.0 {
            1.0
        } else {
            r.powf(s - 1.0)
        }
    };
    pair - 0.5 * (pw(w) + pw(v)) * dist_sq
}

/// `min(1, (p-1)(3-q))` for `2 <= q < 3`.
pub fn coercivity_constant(p: f64, q: f64) -> Result<f64> {
    if p < 2.0 {
        return Err(Error::InvalidParameter(format!("p = {p} must be >= 2")));
    }
    if !(2.0..3.0).contains(&q) {
        return Err(Error::InvalidParameter(format!(
            "q = {q} outside [2, 3); the coercivity constant is not positive"
        )));
    }
    Ok(f64::min(1.0, (p - 1.0) * (3.0 - q)))
}

/// Pointwise lower bound of the differentiated-equation integrand with the
/// cut-off set to 1.
///
/// Returns `(lhs, rhs)` where, with `l = l_eps(w)`, `w' = w / l` and `|.|` the
/// Frobenius norm,
/// `lhs = l^(p-q) (|H|^2 + (p-q)|H w'|^2 - (p-2)(q-2) <H w', w'>^2)` and
/// `rhs = min(1, (p-1)(3-q)) l^(p-q) |H|^2`. `H` is row-major `n x n`.
pub fn integrand_lower_bound_check(h: &[f64], w: &[f64], eps: f64, p: f64, q: f64) -> Result<(f64, f64)> {
    let n = w.len();
    if h.len() != n * n {
        return Err(Error::InvalidParameter(format!(
            "H has {} entries, expected {}",
            h.len(),
            n * n
        )));
    }
    if eps <= 0.0 {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    let c = coercivity_constant(p, q)?;
    let l = l_eps(w, eps);
    let unit: Vec<f64> = w.iter().map(|x| x / l).collect();
    let hw: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h[i * n + j] * unit[j]).sum()).collect();
    let h_sq = norm_sq(h);
    let hw_sq = norm_sq(&hw);
    let quad: f64 = hw.iter().zip(&unit).map(|(a, b)| a * b).sum();
    let weight = l.powf(p - q);
    let lhs = weight * (h_sq + (p - q) * hw_sq - (p - 2.0) * (q - 2.0) * quad * quad);
    Ok((lhs, c * weight * h_sq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn l_eps_values() {
        assert_eq!(l_eps(&[0.0, 0.0], 1.0), 1.0);
        assert_eq!(l_eps(&[3.0, 4.0], 0.0), 5.0);
        // sqrt(25.09), 30-digit mpmath reference
        assert_relative_eq!(l_eps(&[3.0, 4.0], 0.3), 5.008_991_914_547_277, max_relative = 1e-15);
    }

    #[test]
    fn hessian_at_origin_is_scaled_identity() {
        let h = lagrangian_hessian(&[0.0, 0.0], 0.5, 3.5).unwrap();
        let a = 0.5f64.powf(1.5);
        assert_relative_eq!(h[0], a, max_relative = 1e-15);
        assert_relative_eq!(h[3], a, max_relative = 1e-15);
        assert_eq!(h[1], 0.0);
        assert_eq!(h[2], 0.0);
    }

    #[test]
    fn hessian_singular_point() {
        assert!(matches!(
            lagrangian_hessian(&[0.0, 0.0], 0.0, 3.0),
            Err(Error::SingularPoint)
        ));
        assert!(lagrangian_hessian(&[0.0, 0.0], 0.0, 4.0).is_ok());
        assert_eq!(lagrangian_hessian(&[0.0], 0.0, 2.0).unwrap(), vec![1.0]);
        assert!(lagrangian_hessian(&[0.0, 1e-3], 0.0, 3.0).is_ok());
    }

    #[test]
    fn alpha_and_beta_special_cases() {
        assert_eq!(alpha_s(&[0.3, -2.0], 0.0, 1.0), vec![0.3, -2.0]);
        assert_eq!(alpha_s(&[0.0, 2.0], 0.0, 2.0), vec![0.0, 4.0]);
        assert_eq!(alpha_s(&[0.0, 0.0], 0.0, 0.5), vec![0.0, 0.0]);
        assert_eq!(beta_theta(&[0.7, -0.1], 1.0), vec![0.7, -0.1]);
        assert_eq!(beta_theta(&[0.0], 0.25), vec![0.0]);
    }

    #[test]
    fn monotonicity_gap_closed_forms() {
        assert_eq!(monotonicity_gap(&[1.0, 2.0], &[1.0, 2.0], 1.7), 0.0);
        let w = [0.6, -0.8];
        let s = 1.5;
        assert_relative_eq!(monotonicity_gap(&w, &[0.0, 0.0], s), 0.5, max_relative = 1e-14);
        assert!(monotonicity_gap(&w, &[0.0, 0.0], 1.0).abs() < 1e-15);
    }

    #[test]
    fn coercivity_values() {
        assert_eq!(coercivity_constant(3.0, 2.0).unwrap(), 1.0);
        assert_relative_eq!(coercivity_constant(4.0, 2.9).unwrap(), 0.3, max_relative = 1e-12);
        assert!(coercivity_constant(4.0, 3.0).is_err());
        assert!(coercivity_constant(4.0, 1.9).is_err());
    }

    #[test]
    fn integrand_trivial_cases() {
        let (l, r) = integrand_lower_bound_check(&[0.0; 4], &[1.0, 2.0], 0.1, 4.0, 2.5).unwrap();
        assert_eq!((l, r), (0.0, 0.0));
        let h = [1.0, 2.0, 2.0, -3.0];
        let (l, r) = integrand_lower_bound_check(&h, &[0.0, 0.0], 0.5, 4.0, 2.5).unwrap();
        assert_relative_eq!(l, 0.5f64.powf(1.5) * 18.0, max_relative = 1e-14);
        assert!(l >= r);
    }

    #[test]
    fn params_validation() {
        assert!(PLapParams::new(2.5, 0.1).validate(Mode::Thm2).is_err());
        assert!(PLapParams::new(2.5, 0.1).validate(Mode::Thm3).is_ok());
        assert!(PLapParams::new(4.0, 0.1).with_s(1.5).validate(Mode::Thm2).is_err());
        assert!(PLapParams::new(4.0, 0.1).with_s(1.6).validate(Mode::Thm2).is_ok());
        assert!(PLapParams::new(3.0, 0.1).with_q(0.5).validate(Mode::Free).is_err());
        assert!(PLapParams::new(4.0, 0.1).with_theta(0.5).validate(Mode::Thm2).is_ok());
        assert!(PLapParams::new(4.0, 0.1)
            .with_theta(2.0 / 3.0)
            .validate(Mode::Thm2)
            .is_err());
        let p = PLapParams::new(4.0, 0.0).with_s(1.8);
        assert_relative_eq!(p.q_proof(), 2.4, max_relative = 1e-14);
        assert_relative_eq!(p.p_conj(), 4.0 / 3.0);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn vec2() -> impl Strategy<Value = Vec<f64>> {
            prop::collection::vec(-3.0f64..3.0, 2)
        }

        fn dist(a: &[f64], b: &[f64]) -> f64 {
            norm(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>())
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(256))]

            #[test]
            fn hessian_matches_finite_differences(w in vec2(), eps in 0.05f64..1.0, p in 2.0f64..6.0) {
                let h = lagrangian_hessian(&w, eps, p).unwrap();
                let step = 1e-5;
                for j in 0..2 {
                    let mut wp = w.clone();
                    let mut wm = w.clone();
                    wp[j] += step;
                    wm[j] -= step;
                    let (gp, gm) = (lagrangian_grad(&wp, eps, p), lagrangian_grad(&wm, eps, p));
                    for i in 0..2 {
                        let fd = (gp[i] - gm[i]) / (2.0 * step);
                        prop_assert!((fd - h[i * 2 + j]).abs() <= 1e-6 * (1.0 + h[i * 2 + j].abs()));
                    }
                }
            }

            #[test]
            fn rayleigh_sandwich(w in vec2(), v in vec2(), eps in 0.0f64..1.0, p in 2.0f64..6.0) {
                let l = l_eps(&w, eps);
                prop_assume!(l > 1e-3 && norm(&v) > 1e-3);
                let h = lagrangian_hessian(&w, eps, p).unwrap();
                let hv = [h[0] * v[0] + h[1] * v[1], h[2] * v[0] + h[3] * v[1]];
                let r = (hv[0] * v[0] + hv[1] * v[1]) / norm_sq(&v);
                let base = l.powf(p - 2.0);
                prop_assert!(r >= base * (1.0 - 1e-12) && r <= (p - 1.0) * base * (1.0 + 1e-12));
            }

            #[test]
            fn integrand_bound_holds(
                entries in prop::collection::vec(-5.0f64..5.0, 3),
                w in vec2(),
                eps in 0.01f64..1.0,
                p in 2.0f64..6.0,
                q in 2.0f64..2.99,
            ) {
                let h = [entries[0], entries[1], entries[1], entries[2]];
                let (lhs, rhs) = integrand_lower_bound_check(&h, &w, eps, p, q).unwrap();
                prop_assert!(lhs - rhs >= -1e-10 * (1.0 + lhs.abs()));
            }

            #[test]
            fn beta_hoelder_and_inverse_bounds(w in vec2(), v in vec2(), theta in 0.05f64..1.0) {
                let d = dist(&w, &v);
                let db = dist(&beta_theta(&w, theta), &beta_theta(&v, theta));
                prop_assert!(db <= 2.0 * d.powf(theta) * (1.0 + 1e-12) + 1e-15);
                let s = 1.0 / theta;
                let da = dist(&alpha_s(&w, 0.0, s), &alpha_s(&v, 0.0, s));
                prop_assert!(da >= 2f64.powf(-s) * d.powf(s) * (1.0 - 1e-12));
            }

            #[test]
            fn monotonicity_gap_nonnegative(w in vec2(), v in vec2(), s in 1.0f64..4.0) {
                let gap = monotonicity_gap(&w, &v, s);
                let scale = 1.0 + (norm(&w) + norm(&v)).powf(s + 1.0);
                prop_assert!(gap >= -1e-12 * scale);
            }

            #[test]
            fn l_eps_is_monotone_in_eps(w in vec2(), e1 in 0.0f64..2.0, e2 in 0.0f64..2.0) {
                let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
                prop_assert!(l_eps(&w, lo) <= l_eps(&w, hi));
                prop_assert!(l_eps(&w, lo) >= norm(&w));
            }

            #[test]
            fn alpha_is_homogeneous_and_inverted_by_beta(w in vec2(), s in 1.0f64..4.0, lambda in 0.1f64..10.0) {
                let scaled: Vec<f64> = w.iter().map(|x| lambda * x).collect();
                let a = alpha_s(&w, 0.0, s);
                let b = alpha_s(&scaled, 0.0, s);
                for (x, y) in a.iter().zip(&b) {
                    prop_assert!((y - lambda.powf(s) * x).abs() <= 1e-10 * (1.0 + y.abs()));
                }
                let back = beta_theta(&a, 1.0 / s);
                for (x, y) in back.iter().zip(&w) {
                    prop_assert!((x - y).abs() <= 1e-10 * (1.0 + y.abs()));
                }
            }
        }
    }
}
