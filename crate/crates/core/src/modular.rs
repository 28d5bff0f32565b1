//! The modular `I_{p(.)}(f/lambda)`, its lambda-derivative, and the
//! Luxemburg norm as the root of `F(lambda) = 1`.
//!
//! The modular is integrated adaptively over a truncation window; the
//! part beyond the window is controlled analytically through the
//! declared envelope `|f(x)| <= C/(1+|x|)`, whose tail integral admits
//! the closed-form bound `2/(p_- - 1) (C/lambda)^{p_-} T^{1-p_-}` once
//! `T >= C/lambda`. Functions with a support hint have no tail at all.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::exponents::VariableExponent;
use crate::functions::FunctionHandle;
use crate::quad::{self, Estimate};

/// Truncation window and adaptive-quadrature budget.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    /// Integrate numerically over `[-T, T]`.
    pub truncation_t: f64,
    pub abs_tol: f64,
    pub max_refinements: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { truncation_t: 1e3, abs_tol: 1e-10, max_refinements: 4000 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.truncation_t > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::validation("quadrature spec needs positive window and tolerance"));
        }
        Ok(())
    }

    pub fn tightened(&self, factor: f64) -> QuadratureSpec {
        QuadratureSpec {
            truncation_t: self.truncation_t * factor,
            abs_tol: self.abs_tol / factor,
            max_refinements: self.max_refinements * 4,
        }
    }
}

/// Closed-form bound for `int_{|x|>t} (C/(lambda |x|))^{p(x)} dx`,
/// split at the point `r = C/lambda` where the base crosses 1.
fn envelope_tail_bound(c: f64, lambda: f64, p_minus: f64, p_plus: f64, t: f64) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    let r = c / lambda;
    if t >= r {
        2.0 * r.powf(p_minus) * t.powf(1.0 - p_minus) / (p_minus - 1.0)
    } else {
        2.0 * (r.powf(p_plus) * t.powf(1.0 - p_plus) / (p_plus - 1.0) - r / (p_plus - 1.0)
            + r / (p_minus - 1.0))
    }
}

fn window_boundaries(f: &FunctionHandle, p: &VariableExponent, quad: &QuadratureSpec) -> Vec<f64> {
    let (lo, hi) = match f.support_hint {
        Some((a, b)) => (a, b),
        None => (-quad.truncation_t, quad.truncation_t),
    };
    let mut pts = vec![lo, hi];
    for &b in f.breakpoints.iter().chain(p.breakpoints.iter()) {
        if b > lo && b < hi {
            pts.push(b);
        }
    }
    if lo < 0.0 && hi > 0.0 {
        pts.push(0.0);
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    pts
}

fn require_decay_metadata(f: &FunctionHandle) -> Result<()> {
    if f.support_hint.is_none() && f.envelope_constant.is_none() {
        return Err(Error::validation(format!(
            "function '{}' carries neither an envelope constant nor a support hint; \
             the tail of the modular cannot be bounded",
            f.label
        )));
    }
    Ok(())
}

/// `I_{p(.)}(f/lambda) = int |f(x)/lambda|^{p(x)} dx`.
///
/// The value is the adaptive integral over the window (the full line
/// when a support hint confines `f`); the part beyond the window is
/// covered by the analytic envelope tail bound, folded into
/// `error_bound`, so the true modular lies within `[value, value +
/// error_bound]`.
pub fn modular(
    f: &FunctionHandle,
    p: &VariableExponent,
    lambda: f64,
    quad: &QuadratureSpec,
) -> Result<Estimate<f64>> {
    if !(lambda > 0.0) {
        return Err(Error::validation("modular needs lambda > 0"));
    }
    quad.validate()?;
    require_decay_metadata(f)?;
    let integrand = |x: f64| (f.eval_abs(x) / lambda).powf(p.eval(x));
    let bounds = window_boundaries(f, p, quad);
    let window = quad::integrate(&integrand, &bounds, quad.abs_tol, quad.max_refinements);
    let tail = if f.support_hint.is_some() {
        0.0
    } else {
        envelope_tail_bound(
            f.envelope_constant.unwrap(),
            lambda,
            p.p_minus,
            p.p_plus,
            quad.truncation_t,
        )
    };
    Ok(Estimate { value: window.value, error_bound: window.error_bound + tail })
}

/// `dF/dlambda = -int (p(x)/lambda) |f(x)/lambda|^{p(x)} dx`; always
/// nonpositive, zero only when `f` vanishes on the window.
pub fn modular_derivative(
    f: &FunctionHandle,
    p: &VariableExponent,
    lambda: f64,
    quad: &QuadratureSpec,
) -> Result<Estimate<f64>> {
    if !(lambda > 0.0) {
        return Err(Error::validation("modular_derivative needs lambda > 0"));
    }
    quad.validate()?;
    require_decay_metadata(f)?;
    let integrand =
        |x: f64| (p.eval(x) / lambda) * (f.eval_abs(x) / lambda).powf(p.eval(x));
    let bounds = window_boundaries(f, p, quad);
    let window = quad::integrate(&integrand, &bounds, quad.abs_tol, quad.max_refinements);
    let tail = if f.support_hint.is_some() {
        0.0
    } else {
        (p.p_plus / lambda)
            * envelope_tail_bound(
                f.envelope_constant.unwrap(),
                lambda,
                p.p_minus,
                p.p_plus,
                quad.truncation_t,
            )
    };
    Ok(Estimate { value: -window.value, error_bound: window.error_bound + tail })
}

/// Finds the root of a continuous strictly decreasing `F` at level 1 by
/// geometric bracket expansion followed by bisection with a secant
/// acceleration step.
pub(crate) fn solve_unit_root(
    f: &dyn Fn(f64) -> f64,
    guess: f64,
    root_tol: f64,
    what: &str,
) -> Result<f64> {
    let guess = if guess.is_finite() && guess > 0.0 { guess } else { 1.0 };
    let mut lo = guess;
    let mut hi = guess;
    let mut f_lo = f(lo);
    let mut f_hi = f_lo;
    let mut budget = 1100usize;
    while f_lo <= 1.0 {
        hi = lo;
        f_hi = f_lo;
        lo *= 0.5;
        f_lo = f(lo);
        budget -= 1;
        if budget == 0 || lo < f64::MIN_POSITIVE {
            return Err(Error::numerical(format!(
                "bracket expansion failed (lower side) for {}",
                what
            )));
        }
    }
    while f_hi > 1.0 {
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        f_hi = f(hi);
        budget -= 1;
        if budget == 0 || !hi.is_finite() {
            return Err(Error::numerical(format!(
                "bracket expansion failed (upper side) for {}",
                what
            )));
        }
    }
    // invariant: F(lo) > 1 >= F(hi)
    let mut best = hi;
    let mut best_dev = (f_hi - 1.0).abs();
    if (f_lo - 1.0).abs() < best_dev {
        best = lo;
        best_dev = (f_lo - 1.0).abs();
    }
    for _ in 0..200 {
        if best_dev <= root_tol {
            return Ok(best);
        }
        let width = hi - lo;
        if width <= f64::EPSILON * hi {
            break;
        }
        // secant proposal, kept strictly inside the bracket
        let mut m = if (f_lo - f_hi).abs() > 0.0 {
            lo + (f_lo - 1.0) * width / (f_lo - f_hi)
        } else {
            0.5 * (lo + hi)
        };
        if !(m > lo + 0.05 * width && m < hi - 0.05 * width) {
            m = 0.5 * (lo + hi);
        }
        let fm = f(m);
        let dev = (fm - 1.0).abs();
        if dev < best_dev {
            best = m;
            best_dev = dev;
        }
        if fm > 1.0 {
            lo = m;
            f_lo = fm;
        } else {
            hi = m;
            f_hi = fm;
        }
    }
    if best_dev <= root_tol {
        Ok(best)
    } else {
        Err(Error::numerical(format!(
            "root refinement for {} stalled at |F-1| = {:.3e} > {:.3e}",
            what, best_dev, root_tol
        )))
    }
}

/// The Luxemburg norm `inf { lambda > 0 : I_{p(.)}(f/lambda) <= 1 }`.
/// For nonzero `f` this is the unique root of the strictly decreasing
/// modular at level 1; for the zero function it is 0.
pub fn luxemburg_norm(
    f: &FunctionHandle,
    p: &VariableExponent,
    quad: &QuadratureSpec,
    root_tol: f64,
) -> Result<f64> {
    luxemburg_norm_with_guess(f, p, quad, root_tol, None)
}

/// Same as [`luxemburg_norm`] with a warm-start bracket center.
pub fn luxemburg_norm_with_guess(
    f: &FunctionHandle,
    p: &VariableExponent,
    quad: &QuadratureSpec,
    root_tol: f64,
    guess: Option<f64>,
) -> Result<f64> {
    if !(root_tol > 0.0) {
        return Err(Error::validation("root_tol must be positive"));
    }
    // zero detection: the modular of f/lambda at a machine-scale probe
    // vanishes only when f vanishes at every window node and the tail
    // is absent
    let probe = modular(f, p, 1e-100, quad)?;
    if probe.value == 0.0 {
        return Ok(0.0);
    }
    let curve = |lambda: f64| modular(f, p, lambda, quad).map(|e| e.value).unwrap_or(f64::NAN);
    solve_unit_root(&curve, guess.unwrap_or(1.0), root_tol, &format!("||{}||", f.label))
}

/// Norm of a column of functions: the Euclidean combination of the
/// componentwise Luxemburg norms.
pub fn vector_norm(
    fs: &[FunctionHandle],
    p: &VariableExponent,
    quad: &QuadratureSpec,
    root_tol: f64,
) -> Result<f64> {
    if fs.is_empty() {
        return Err(Error::validation("vector_norm needs at least one component"));
    }
    let mut acc = 0.0;
    for f in fs {
        let n = luxemburg_norm(f, p, quad, root_tol)?;
        acc += n * n;
    }
    Ok(acc.sqrt())
}

/// A map `lambda -> F(lambda)` with cached evaluations, expected to be
/// continuous and strictly decreasing.
pub struct ModularCurve {
    eval_fn: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    cache: Mutex<BTreeMap<u64, f64>>,
    pub label: String,
}

impl ModularCurve {
    pub fn new(
        eval_fn: impl Fn(f64) -> f64 + Send + Sync + 'static,
        label: impl Into<String>,
    ) -> Self {
        ModularCurve {
            eval_fn: Arc::new(eval_fn),
            cache: Mutex::new(BTreeMap::new()),
            label: label.into(),
        }
    }

    /// Curve backed by the modular of a fixed function and exponent.
    pub fn from_modular(f: FunctionHandle, p: VariableExponent, quad: QuadratureSpec) -> Self {
        let label = format!("F(.;{})", f.label);
        ModularCurve::new(
            move |lambda| modular(&f, &p, lambda, &quad).map(|e| e.value).unwrap_or(f64::NAN),
            label,
        )
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        let key = lambda.to_bits();
        if let Some(v) = self.cache.lock().unwrap().get(&key) {
            return *v;
        }
        let v = (self.eval_fn)(lambda);
        self.cache.lock().unwrap().insert(key, v);
        v
    }

    /// Probes strict monotonicity on a grid; failure signals an
    /// integrand error upstream.
    pub fn check_decreasing(&self, probes: &[f64]) -> Result<()> {
        for w in probes.windows(2) {
            if w[1] <= w[0] {
                continue;
            }
            if self.eval(w[1]) >= self.eval(w[0]) {
                return Err(Error::numerical(format!(
                    "curve '{}' is not strictly decreasing between {} and {}",
                    self.label, w[0], w[1]
                )));
            }
        }
        Ok(())
    }
}

/// Per-index roots `F(lambda(k), k) = 1` together with the root of the
/// limiting curve and the deviation series `|lambda(k) - lambda_inf|`.
#[derive(Debug, Clone)]
pub struct ImplicitSequence {
    pub roots: Vec<f64>,
    pub limit: f64,
    pub deviations: Vec<f64>,
}

/// Solves the family of unit-level problems with warm-started brackets,
/// checking each curve for monotonicity around its root.
pub fn implicit_sequence_solve(
    curves: &[ModularCurve],
    limit_curve: &ModularCurve,
    root_tol: f64,
) -> Result<ImplicitSequence> {
    if curves.is_empty() {
        return Err(Error::validation("implicit_sequence_solve needs at least one curve"));
    }
    let limit = solve_unit_root(&|l| limit_curve.eval(l), 1.0, root_tol, &limit_curve.label)?;
    limit_curve
        .check_decreasing(&[0.5 * limit, 0.8 * limit, limit, 1.25 * limit, 2.0 * limit])?;
    let mut roots = Vec::with_capacity(curves.len());
    let mut guess = limit;
    for curve in curves {
        let root = solve_unit_root(&|l| curve.eval(l), guess, root_tol, &curve.label)?;
        curve.check_decreasing(&[0.5 * root, 0.8 * root, root, 1.25 * root, 2.0 * root])?;
        roots.push(root);
        guess = root;
    }
    let deviations = roots.iter().map(|r| (r - limit).abs()).collect();
    Ok(ImplicitSequence { roots, limit, deviations })
}
