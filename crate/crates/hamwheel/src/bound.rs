//! Numeric evaluation of the main counting bound
//! h(G) >= (1/B) n 2^(beta t / log^16 t) at desk scale, where the
//! exponent is astronomically small and the point is to report that
//! honestly.

use crate::error::{Error, Result};
use crate::Rational;
use serde::Serialize;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundParams {
    /// The unspecified absolute constant B.
    pub b: f64,
    /// The exponent constant, (6000 ln 3)^-16 by default.
    pub beta_const: f64,
    #[serde(with = "crate::report::rational_serde")]
    pub alpha: Rational,
}

impl Default for BoundParams {
    fn default() -> Self {
        BoundParams {
            b: 1.0,
            beta_const: (6000.0 * 3.0f64.ln()).powi(-16),
            alpha: Rational::new(1, 5),
        }
    }
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta_const > 0.0) {
            return Err(Error::Invariant("beta constant must be positive".into()));
        }
        if !(self.b > 0.0) {
            return Err(Error::Invariant("B must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub n: u64,
    pub t: u64,
    pub params: BoundParams,
    /// beta * t / ln^16 t.
    pub exponent: f64,
    /// (1/B) n 2^exponent.
    pub rhs: f64,
    /// 2^exponent, the per-vertex count promised for a single heavy
    /// vertex.
    pub per_vertex_rhs: f64,
    /// True whenever the exponent contributes less than one doubling;
    /// at desk scale this is always the case.
    pub exponent_negligible: bool,
}

/// Evaluate the bound at (n, t). t is meant to be the crux size
/// c_alpha(G).
pub fn evaluate_main_bound(n: u64, t: u64, p: &BoundParams) -> Result<BoundReport> {
    p.validate()?;
    if n < 3 || t < 3 {
        return Err(Error::Invariant(format!("need n, t >= 3, got n={n}, t={t}")));
    }
    let lt = (t as f64).ln();
    // ln t > 1 for t >= 3, so the power never explodes
    let exponent = p.beta_const * t as f64 / lt.powi(16);
    let per_vertex_rhs = exponent.exp2();
    let rhs = n as f64 / p.b * per_vertex_rhs;
    Ok(BoundReport {
        n,
        t,
        params: *p,
        exponent,
        rhs,
        per_vertex_rhs,
        exponent_negligible: exponent < 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_scale_examples() {
        let p = BoundParams::default();
        let r = evaluate_main_bound(1_000_000, 100, &p).unwrap();
        assert!(r.exponent > 0.0 && r.exponent < 1e-50);
        assert!(r.exponent_negligible);
        assert!((r.rhs - 1e6).abs() < 1.0);
        assert!((r.per_vertex_rhs - 1.0).abs() < 1e-12);

        let r = evaluate_main_bound(10, 10, &BoundParams { b: 10.0, ..p }).unwrap();
        assert!((r.rhs - 1.0).abs() < 1e-9);
    }

    #[test]
    fn small_t_has_no_singularity() {
        // ln 3 > 1, so even the smallest admissible t is tame
        let r = evaluate_main_bound(3, 3, &BoundParams::default()).unwrap();
        assert!(r.exponent.is_finite() && r.exponent > 0.0);
        assert!(evaluate_main_bound(3, 2, &BoundParams::default()).is_err());
    }

    #[test]
    fn exponent_scales_linearly_in_t_up_to_logs() {
        let p = BoundParams::default();
        // t / ln^16 t only increases once ln t > 16, i.e. t > e^16
        let r1 = evaluate_main_bound(100, 20_000_000, &p).unwrap();
        let r2 = evaluate_main_bound(100, 40_000_000, &p).unwrap();
        assert!(r2.exponent > r1.exponent);
        assert!(r2.exponent < 2.0 * r1.exponent, "log^16 grows too");
        // below that threshold the log factor dominates and it shrinks
        let s1 = evaluate_main_bound(100, 1000, &p).unwrap();
        let s2 = evaluate_main_bound(100, 2000, &p).unwrap();
        assert!(s2.exponent < s1.exponent);
    }
}
