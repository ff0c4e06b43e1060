use crate::error::{Error, Result};

use super::Estimate;

/// Fidelity lower bound `P = G_a + G_b − 1`, which certifies genuine multipartite
/// entanglement once it exceeds 1/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessReport {
    pub g_a: Estimate,
    pub g_b: Estimate,
    pub p: f64,
    pub p_err_plus: f64,
    pub p_err_minus: f64,
    pub genuine: bool,
}

pub const GENUINE_THRESHOLD: f64 = 0.5;

/// 1σ Wilson score interval for a binomial fraction.
pub fn wilson_interval(e: &Estimate) -> (f64, f64) {
    if e.is_exact() {
        return (e.value, e.value);
    }
    let n = e.n as f64;
    let f = e.value;
    let denom = 1.0 + 1.0 / n;
    let center = (f + 0.5 / n) / denom;
    let half = (f * (1.0 - f) / n + 0.25 / (n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Combine two product correlators. Errors on `P` add the Wilson half-widths of
/// `G_a` and `G_b` in quadrature on each side, so a correlator near 1 gets a short
/// upper arm.
pub fn witness_bound(g_a: Estimate, g_b: Estimate) -> Result<WitnessReport> {
    for (name, g) in [("G_a", &g_a), ("G_b", &g_b)] {
        if !(0.0..=1.0).contains(&g.value) {
            return Err(Error::InvalidParameter(format!(
                "{name} must be in [0, 1], got {}",
                g.value
            )));
        }
    }
    let p = g_a.value + g_b.value - 1.0;
    let (lo_a, hi_a) = wilson_interval(&g_a);
    let (lo_b, hi_b) = wilson_interval(&g_b);
    let p_err_minus = (g_a.value - lo_a)
        .max(0.0)
        .hypot((g_b.value - lo_b).max(0.0));
    let p_err_plus = (hi_a - g_a.value)
        .max(0.0)
        .hypot((hi_b - g_b.value).max(0.0));
    Ok(WitnessReport {
        g_a,
        g_b,
        p,
        p_err_plus,
        p_err_minus,
        genuine: p - p_err_minus > GENUINE_THRESHOLD,
    })
}

/// Fidelity with `(|01⟩ + |10⟩)/√2` from three correlators.
pub fn bell_fidelity(xx: f64, yy: f64, zz: f64) -> f64 {
    (1.0 + xx + yy - zz) / 4.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn perfect_correlators() {
        let r = witness_bound(Estimate::exact(1.0), Estimate::exact(1.0)).unwrap();
        assert_eq!(r.p, 1.0);
        assert!(r.genuine);
    }

    #[test]
    fn bell_formula_examples() {
        assert_eq!(bell_fidelity(1.0, 1.0, -1.0), 1.0);
        assert_eq!(bell_fidelity(0.0, 0.0, 0.0), 0.25);
        assert_abs_diff_eq!(bell_fidelity(0.90, 0.90, -0.86), 0.915, epsilon = 1e-12);
    }

    #[test]
    fn asymmetric_errors_near_one() {
        let ga = Estimate::from_counts(95, 100);
        let gb = Estimate::from_counts(60, 100);
        let r = witness_bound(ga, gb).unwrap();
        assert_abs_diff_eq!(r.p, 0.55, epsilon = 1e-12);
        assert!(r.p_err_minus > r.p_err_plus);
        assert!(!r.genuine);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(witness_bound(Estimate::exact(1.2), Estimate::exact(0.5)).is_err());
    }
}
