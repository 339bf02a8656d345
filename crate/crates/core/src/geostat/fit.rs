//! Iteratively reweighted least-squares fitting of the spherical model.
//!
//! Each outer iteration fixes the weights `w_j = |N(h_j)| / gamma(h_j; theta)^2`
//! at the current parameters (Cressie's weighting) and then minimizes the
//! weighted squared error exactly: the error variance and partial sill enter
//! linearly, so for a candidate range the optimum is a small non-negative
//! least-squares solve, and the range itself is located by a coarse scan
//! refined with golden-section search.

use super::{EmpiricalVariogram, GeostatError, Variogram};

/// Result of [`fit_spherical_irls`]: the fitted model plus convergence state.
#[derive(Debug, Clone)]
pub struct IrlsFit {
    pub variogram: Variogram,
    /// False when the iteration cap was reached before the parameter change
    /// dropped below tolerance; the returned model is the last iterate.
    pub converged: bool,
    pub iterations: usize,
}

const MAX_ITERATIONS: usize = 100;
const REL_TOL: f64 = 1e-6;

/// Spherical base function without sills: `1.5 s - 0.5 s^3` capped at 1.
fn base(h: f64, range: f64) -> f64 {
    if h >= range {
        1.0
    } else {
        let s = h / range;
        1.5 * s - 0.5 * s * s * s
    }
}

/// Weighted non-negative least squares for (me_var, psill) at fixed range.
/// Returns the parameters and the attained weighted SSE.
fn wls_at_range(h: &[f64], g: &[f64], w: &[f64], range: f64) -> (f64, f64, f64) {
    // Normal equations for the 2-column design [1, base(h)].
    let (mut s11, mut s12, mut s22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for k in 0..h.len() {
        let x2 = base(h[k], range);
        s11 += w[k];
        s12 += w[k] * x2;
        s22 += w[k] * x2 * x2;
        b1 += w[k] * g[k];
        b2 += w[k] * x2 * g[k];
    }
    // Near-collinear designs (range at or below the first lag) are
    // indistinguishable from pure noise; resolve them as error variance.
    let det = s11 * s22 - s12 * s12;
    let (mut me, mut ps) = if det.abs() > 1e-12 * s11 * s22 {
        ((s22 * b1 - s12 * b2) / det, (s11 * b2 - s12 * b1) / det)
    } else {
        (if s11 > 0.0 { b1 / s11 } else { 0.0 }, 0.0)
    };
    // Clamp to the parameter boundary and re-solve the active coordinate.
    if me < 0.0 {
        me = 0.0;
        ps = if s22 > 0.0 { (b2 / s22).max(0.0) } else { 0.0 };
    } else if ps < 0.0 {
        ps = 0.0;
        me = if s11 > 0.0 { (b1 / s11).max(0.0) } else { 0.0 };
    }
    let mut sse = 0.0;
    for k in 0..h.len() {
        let r = g[k] - (me + ps * base(h[k], range));
        sse += w[k] * r * r;
    }
    (me, ps, sse)
}

/// One full weighted minimization over (me_var, psill, range) for fixed
/// weights: coarse range scan plus golden-section refinement.
fn minimize_fixed_weights(h: &[f64], g: &[f64], w: &[f64]) -> Variogram {
    let h_max = h.last().copied().unwrap_or(1.0);
    let lo = 1e-3 * h_max;
    let hi = 3.0 * h_max;
    let n_grid = 200;
    let mut best = (f64::INFINITY, lo);
    for k in 0..=n_grid {
        let range = lo + (hi - lo) * k as f64 / n_grid as f64;
        let (_, _, sse) = wls_at_range(h, g, w, range);
        if sse < best.0 {
            best = (sse, range);
        }
    }
    let step = (hi - lo) / n_grid as f64;
    let (mut a, mut b) = ((best.1 - step).max(lo), (best.1 + step).min(hi));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > 1e-10 * h_max {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if wls_at_range(h, g, w, c).2 < wls_at_range(h, g, w, d).2 {
            b = d;
        } else {
            a = c;
        }
    }
    let range = 0.5 * (a + b);
    let (me, ps, _) = wls_at_range(h, g, w, range);
    Variogram::new(me, ps, range)
}

/// Fits a spherical variogram to a robust empirical variogram by IRLS.
///
/// Needs at least 3 non-empty lags. Converges when the relative parameter
/// change drops below `1e-6`; otherwise stops after 100 iterations and
/// reports `converged = false`.
pub fn fit_spherical_irls(
    emp: &EmpiricalVariogram,
    init: &Variogram,
) -> Result<IrlsFit, GeostatError> {
    if emp.lags.len() < 3 {
        return Err(GeostatError::TooFewLags(emp.lags.len()));
    }
    let h: Vec<f64> = emp.lags.iter().map(|l| l.center).collect();
    let g: Vec<f64> = emp.lags.iter().map(|l| l.gamma).collect();
    let n: Vec<f64> = emp.lags.iter().map(|l| l.pairs as f64).collect();

    let mut theta = init.clone();
    for it in 1..=MAX_ITERATIONS {
        let w: Vec<f64> = h
            .iter()
            .zip(&n)
            .map(|(&hk, &nk)| nk / theta.gamma(hk).max(1e-12).powi(2))
            .collect();
        let next = minimize_fixed_weights(&h, &g, &w);
        let change = [
            rel_change(theta.me_var, next.me_var),
            rel_change(theta.psill, next.psill),
            rel_change(theta.range, next.range),
        ]
        .into_iter()
        .fold(0.0f64, f64::max);
        theta = next;
        if change <= REL_TOL {
            return Ok(IrlsFit { variogram: theta, converged: true, iterations: it });
        }
    }
    Ok(IrlsFit { variogram: theta, converged: false, iterations: MAX_ITERATIONS })
}

fn rel_change(old: f64, new: f64) -> f64 {
    (new - old).abs() / old.abs().max(1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geostat::VariogramLag;
    use approx::assert_relative_eq;

    fn exact_empirical(v: &Variogram, centers: &[f64], pairs: usize) -> EmpiricalVariogram {
        EmpiricalVariogram {
            lags: centers
                .iter()
                .map(|&c| VariogramLag { center: c, pairs, gamma: v.gamma(c) })
                .collect(),
        }
    }

    #[test]
    fn recovers_exact_spherical_within_one_percent() {
        let truth = Variogram::new(0.08, 0.92, 410.0);
        let centers: Vec<f64> = (1..=12).map(|k| k as f64 * 60.0).collect();
        let emp = exact_empirical(&truth, &centers, 50);
        let fit = fit_spherical_irls(&emp, &Variogram::initial_guess(&emp)).unwrap();
        assert!(fit.converged);
        assert_relative_eq!(fit.variogram.me_var, truth.me_var, max_relative = 0.01);
        assert_relative_eq!(fit.variogram.psill, truth.psill, max_relative = 0.01);
        assert_relative_eq!(fit.variogram.range, truth.range, max_relative = 0.01);
    }

    #[test]
    fn flat_variogram_collapses_to_noise() {
        let lags: Vec<VariogramLag> = (1..=8)
            .map(|k| VariogramLag { center: k as f64 * 50.0, pairs: 40, gamma: 0.37 })
            .collect();
        let emp = EmpiricalVariogram { lags };
        let fit = fit_spherical_irls(&emp, &Variogram::initial_guess(&emp)).unwrap();
        // A constant level is explained by the error variance alone.
        assert!(fit.variogram.psill < 0.37 * 0.05, "psill {}", fit.variogram.psill);
        assert_relative_eq!(fit.variogram.me_var, 0.37, max_relative = 0.05);
    }

    #[test]
    fn too_few_lags_errors() {
        let emp = EmpiricalVariogram {
            lags: vec![
                VariogramLag { center: 10.0, pairs: 5, gamma: 0.5 },
                VariogramLag { center: 20.0, pairs: 5, gamma: 0.6 },
            ],
        };
        assert!(matches!(
            fit_spherical_irls(&emp, &Variogram::new(0.1, 0.5, 15.0)),
            Err(GeostatError::TooFewLags(2))
        ));
    }

    #[test]
    fn parameters_stay_nonnegative() {
        // Decreasing empirical values push the unconstrained solution negative.
        let lags: Vec<VariogramLag> = (1..=6)
            .map(|k| VariogramLag { center: k as f64 * 30.0, pairs: 25, gamma: 1.0 / k as f64 })
            .collect();
        let emp = EmpiricalVariogram { lags };
        let fit = fit_spherical_irls(&emp, &Variogram::initial_guess(&emp)).unwrap();
        assert!(fit.variogram.me_var >= 0.0);
        assert!(fit.variogram.psill >= 0.0);
        assert!(fit.variogram.range > 0.0);
    }
}
