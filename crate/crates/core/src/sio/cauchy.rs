//! Principal-value evaluation of the Cauchy singular integral operator
//! and the complementary projections built from it.
//!
//! `(Sf)(x)` is computed by singularity subtraction: over a symmetric
//! window around `x` the integrand `(f(t) - f(x))/(t - x)` has a
//! removable singularity and the subtracted constant contributes
//! nothing (the principal value of `1/(t-x)` over a symmetric window
//! vanishes). The far field is integrated directly, and beyond the
//! truncation point the inversion substitution `t = T/u` carries the
//! integral out to infinity, the declared envelope guaranteeing the
//! transformed integrand is tame.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::functions::FunctionHandle;
use crate::modular::QuadratureSpec;
use crate::quad::{self, Estimate};

/// Radius of the symmetric subtraction window.
const WINDOW_RADIUS: f64 = 1.0;

fn far_segment(
    f: &FunctionHandle,
    x: f64,
    a: f64,
    b: f64,
    quad_spec: &QuadratureSpec,
) -> Estimate<Complex64> {
    if b <= a {
        return Estimate { value: Complex64::new(0.0, 0.0), error_bound: 0.0 };
    }
    let mut bounds = vec![a, b];
    for &bp in &f.breakpoints {
        if bp > a && bp < b {
            bounds.push(bp);
        }
    }
    bounds.sort_by(|p, q| p.partial_cmp(q).unwrap());
    bounds.dedup();
    let g = |t: f64| f.eval(t) / Complex64::new(t - x, 0.0);
    quad::integrate(&g, &bounds, quad_spec.abs_tol, quad_spec.max_refinements)
}

/// `(Sf)(x) = (1/(pi i)) p.v. int f(t)/(t - x) dt`.
pub fn cauchy_apply(
    f: &FunctionHandle,
    x: f64,
    quad_spec: &QuadratureSpec,
) -> Result<Estimate<Complex64>> {
    quad_spec.validate()?;
    if f.support_hint.is_none() && f.envelope_constant.is_none() {
        return Err(Error::validation(format!(
            "function '{}' lacks decay metadata; the far field of the \
             principal value cannot be handled",
            f.label
        )));
    }
    let t = quad_spec.truncation_t;
    let d = WINDOW_RADIUS;

    let mut value = Complex64::new(0.0, 0.0);
    let mut err = 0.0;

    // support entirely away from x: no principal value is involved
    if let Some((a, b)) = f.support_hint {
        if x < a - d || x > b + d {
            let seg = far_segment(f, x, a, b, quad_spec);
            let scale = Complex64::new(0.0, -1.0 / std::f64::consts::PI);
            return Ok(Estimate {
                value: scale * seg.value,
                error_bound: seg.error_bound / std::f64::consts::PI,
            });
        }
    }

    if x.abs() + d >= t {
        return Err(Error::validation(format!(
            "x = {} is outside the evaluable region of the window [-{}, {}]",
            x, t, t
        )));
    }

    // symmetric window: subtracted integrand, removable singularity
    let fx = f.eval(x);
    let sub = |tau: f64| {
        let dt = tau - x;
        if dt == 0.0 {
            // removable point; the integrand extends continuously
            let eps = 1e-7 * (1.0 + x.abs());
            (f.eval(x + eps) - f.eval(x - eps)) / Complex64::new(2.0 * eps, 0.0)
        } else {
            (f.eval(tau) - fx) / Complex64::new(dt, 0.0)
        }
    };
    let mut wbounds = vec![x - d, x, x + d];
    for &bp in &f.breakpoints {
        if bp > x - d && bp < x + d {
            wbounds.push(bp);
        }
    }
    wbounds.sort_by(|p, q| p.partial_cmp(q).unwrap());
    wbounds.dedup();
    let window = quad::integrate(&sub, &wbounds, quad_spec.abs_tol, quad_spec.max_refinements);
    value += window.value;
    err += window.error_bound;

    // far field inside the truncation window
    let (lo, hi) = match f.support_hint {
        Some((a, b)) => (a.max(-t), b.min(t)),
        None => (-t, t),
    };
    let left = far_segment(f, x, lo, x - d, quad_spec);
    let right = far_segment(f, x, (x + d).max(lo), hi, quad_spec);
    value += left.value + right.value;
    err += left.error_bound + right.error_bound;

    // tails beyond the truncation point, absent for supported functions
    if f.support_hint.is_none() {
        let g = |tau: f64| f.eval(tau) / Complex64::new(tau - x, 0.0);
        let right_tail =
            quad::integrate_right_tail(&g, t, quad_spec.abs_tol, quad_spec.max_refinements);
        let left_tail =
            quad::integrate_left_tail(&g, t, quad_spec.abs_tol, quad_spec.max_refinements);
        value += right_tail.value + left_tail.value;
        err += right_tail.error_bound + left_tail.error_bound;
    }

    let scale = Complex64::new(0.0, -1.0 / std::f64::consts::PI); // 1/(pi i)
    Ok(Estimate { value: scale * value, error_bound: err / std::f64::consts::PI })
}

/// `(Pf)(x) = (f(x) + (Sf)(x)) / 2`.
pub fn apply_p(
    f: &FunctionHandle,
    x: f64,
    quad_spec: &QuadratureSpec,
) -> Result<Estimate<Complex64>> {
    let s = cauchy_apply(f, x, quad_spec)?;
    Ok(Estimate { value: 0.5 * (f.eval(x) + s.value), error_bound: 0.5 * s.error_bound })
}

/// `(Qf)(x) = (f(x) - (Sf)(x)) / 2`.
pub fn apply_q(
    f: &FunctionHandle,
    x: f64,
    quad_spec: &QuadratureSpec,
) -> Result<Estimate<Complex64>> {
    let s = cauchy_apply(f, x, quad_spec)?;
    Ok(Estimate { value: 0.5 * (f.eval(x) - s.value), error_bound: 0.5 * s.error_bound })
}

/// Measured decay of `Sf` for a compactly supported `f`.
#[derive(Debug, Clone)]
pub struct PrivalovReport {
    /// Smallest `C` with `|Sf(x)| (1 + |x|) <= C` over the probes.
    pub fitted_c: f64,
    /// `(x, |Sf(x)| (1 + |x|))` per probe; bounded for smooth bumps.
    pub products: Vec<(f64, f64)>,
}

/// Probes the `C/(1+|x|)` decay of `Sf` away from the support.
pub fn privalov_decay_check(
    f: &FunctionHandle,
    probes: &[f64],
    quad_spec: &QuadratureSpec,
) -> Result<PrivalovReport> {
    if f.support_hint.is_none() {
        return Err(Error::validation(
            "privalov_decay_check needs a compactly supported function",
        ));
    }
    let mut products = Vec::with_capacity(probes.len());
    let mut fitted_c = 0.0_f64;
    for &x in probes {
        let s = cauchy_apply(f, x, quad_spec)?;
        let prod = s.value.norm() * (1.0 + x.abs());
        fitted_c = fitted_c.max(prod);
        products.push((x, prod));
    }
    Ok(PrivalovReport { fitted_c, products })
}
