//! Variable exponents `p : R -> (1, oo)`, their duals, slow-oscillation
//! diagnostics, and asymptotic limit estimation.
//!
//! Essential bounds are not computable from point evaluation, so every
//! exponent carries *declared* bounds which the library trusts; `audit`
//! checks them on any finite grid. Whether the singular integral
//! operator is bounded on the associated space is likewise recorded as
//! a user-asserted flag, never inferred.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::functions::FunctionHandle;

/// A translation amount. Double-exponential shifts overflow `f64`, so a
/// shift can alternatively be given as `t = log log h`; exponents that
/// depend on the point only through `log log |x|` stay evaluable there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shift {
    Finite(f64),
    /// `h = exp(exp(t))`, possibly beyond floating-point range.
    LogLog(f64),
}

impl Shift {
    /// The shift as an `f64`, `+inf` when out of range.
    pub fn magnitude(self) -> f64 {
        match self {
            Shift::Finite(h) => h,
            Shift::LogLog(t) => {
                let e = t.exp();
                if e > 700.0 {
                    f64::INFINITY
                } else {
                    e.exp()
                }
            }
        }
    }

    /// `log log h` when that coordinate is defined.
    pub fn loglog(self) -> Option<f64> {
        match self {
            Shift::LogLog(t) => Some(t),
            Shift::Finite(h) => {
                if h > 1.0 {
                    Some(h.ln().ln())
                } else {
                    None
                }
            }
        }
    }
}

/// A scalar exponent field with declared essential bounds.
#[derive(Clone)]
pub struct VariableExponent {
    evaluator: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// Value at points of magnitude `exp(exp(t))`, as a function of `t`,
    /// for exponents that admit that asymptotic form.
    at_loglog: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    pub p_minus: f64,
    pub p_plus: f64,
    pub breakpoints: Vec<f64>,
    pub label: String,
    /// User-asserted membership in the class of exponents for which the
    /// singular integral operator is bounded. Not decidable numerically.
    pub class_e_asserted: bool,
}

impl std::fmt::Debug for VariableExponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VariableExponent")
            .field("label", &self.label)
            .field("p_minus", &self.p_minus)
            .field("p_plus", &self.p_plus)
            .finish()
    }
}

impl VariableExponent {
    pub fn new(
        evaluator: impl Fn(f64) -> f64 + Send + Sync + 'static,
        p_minus: f64,
        p_plus: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        if !(1.0 < p_minus && p_minus <= p_plus && p_plus.is_finite()) {
            return Err(Error::validation(format!(
                "exponent bounds must satisfy 1 < p_minus <= p_plus < oo, got [{}, {}]",
                p_minus, p_plus
            )));
        }
        Ok(VariableExponent {
            evaluator: Arc::new(evaluator),
            at_loglog: None,
            p_minus,
            p_plus,
            breakpoints: Vec::new(),
            label: label.into(),
            class_e_asserted: false,
        })
    }

    pub fn with_loglog_form(
        mut self,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.at_loglog = Some(Arc::new(f));
        self
    }

    pub fn with_breakpoints(mut self, pts: Vec<f64>) -> Self {
        self.breakpoints = pts;
        self
    }

    pub fn assert_class_e(mut self) -> Self {
        self.class_e_asserted = true;
        self
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.evaluator)(x)
    }

    /// `p(h)` for a possibly huge shift.
    pub fn value_at_shift(&self, shift: Shift) -> Result<f64> {
        let h = shift.magnitude();
        if h.is_finite() {
            return Ok(self.eval(h));
        }
        match (&self.at_loglog, shift.loglog()) {
            (Some(f), Some(t)) => Ok(f(t)),
            _ => Err(Error::validation(format!(
                "exponent '{}' has no asymptotic form; cannot evaluate at shift {:?}",
                self.label, shift
            ))),
        }
    }

    /// The exponent `x -> p(x + h)`. For shifts beyond floating-point
    /// range the translated exponent is constant on any window of
    /// desk-scale width, so the constant `p(h)` is used; the declared
    /// global bounds are kept (translation does not change them).
    pub fn translate(&self, shift: Shift) -> Result<VariableExponent> {
        let h = shift.magnitude();
        if h.is_finite() {
            let inner = Arc::clone(&self.evaluator);
            return Ok(VariableExponent {
                evaluator: Arc::new(move |x| inner(x + h)),
                at_loglog: self.at_loglog.clone(),
                p_minus: self.p_minus,
                p_plus: self.p_plus,
                breakpoints: self.breakpoints.iter().map(|b| b - h).collect(),
                label: format!("{}<<{}", self.label, h),
                class_e_asserted: self.class_e_asserted,
            });
        }
        let value = self.value_at_shift(shift)?;
        Ok(VariableExponent {
            evaluator: Arc::new(move |_| value),
            at_loglog: self.at_loglog.clone(),
            p_minus: self.p_minus,
            p_plus: self.p_plus,
            breakpoints: Vec::new(),
            label: format!("{}<<{:?}", self.label, shift),
            class_e_asserted: self.class_e_asserted,
        })
    }

    /// Checks declared bounds on a finite grid.
    pub fn audit(&self, grid: &[f64]) -> Result<()> {
        for &x in grid {
            let v = self.eval(x);
            if v < self.p_minus - 1e-12 || v > self.p_plus + 1e-12 {
                return Err(Error::validation(format!(
                    "exponent '{}' leaves [{}, {}] at x={}: p={}",
                    self.label, self.p_minus, self.p_plus, x, v
                )));
            }
        }
        Ok(())
    }

    /// Wraps the exponent as a real function handle for the oscillation
    /// diagnostics.
    pub fn as_function(&self) -> FunctionHandle {
        let inner = Arc::clone(&self.evaluator);
        FunctionHandle::new(
            move |x| num_complex::Complex64::new(inner(x), 0.0),
            self.label.clone(),
        )
    }
}

/// The constant exponent `q`.
pub fn constant(q: f64) -> Result<VariableExponent> {
    let p = VariableExponent::new(move |_| q, q, q, format!("const({})", q))?
        .with_loglog_form(move |_| q)
        .assert_class_e();
    Ok(p)
}

/// `alpha + sin(log log |x|)` for `|x| >= e`, `alpha` otherwise.
///
/// Bounds are `alpha -+ 1`; the maximal-operator result that makes this
/// family useful requires `alpha > 2`.
pub fn lerner(alpha: f64) -> Result<VariableExponent> {
    if alpha <= 2.0 {
        return Err(Error::validation(format!(
            "lerner exponent requires alpha > 2, got {}",
            alpha
        )));
    }
    let e = std::f64::consts::E;
    let p = VariableExponent::new(
        move |x| {
            let ax = x.abs();
            if ax >= e {
                alpha + ax.ln().ln().sin()
            } else {
                alpha
            }
        },
        alpha - 1.0,
        alpha + 1.0,
        format!("lerner({})", alpha),
    )?
    .with_loglog_form(move |t| if t >= 0.0 { alpha + t.sin() } else { alpha })
    .with_breakpoints(vec![-e, e])
    .assert_class_e();
    Ok(p)
}

/// The conjugate exponent `p' = p/(p-1)`.
pub fn dual(p: &VariableExponent) -> VariableExponent {
    let inner = Arc::clone(&p.evaluator);
    let at_loglog = p.at_loglog.clone().map(|f| {
        Arc::new(move |t: f64| {
            let v = f(t);
            v / (v - 1.0)
        }) as Arc<dyn Fn(f64) -> f64 + Send + Sync>
    });
    VariableExponent {
        evaluator: Arc::new(move |x| {
            let v = inner(x);
            v / (v - 1.0)
        }),
        at_loglog,
        p_minus: p.p_plus / (p.p_plus - 1.0),
        p_plus: p.p_minus / (p.p_minus - 1.0),
        breakpoints: p.breakpoints.clone(),
        label: format!("dual({})", p.label),
        class_e_asserted: p.class_e_asserted,
    }
}

/// Pointwise sum of exponents.
pub fn sum(parts: Vec<VariableExponent>) -> Result<VariableExponent> {
    if parts.is_empty() {
        return Err(Error::validation("sum of exponents needs at least one term"));
    }
    let p_minus: f64 = parts.iter().map(|p| p.p_minus).sum();
    let p_plus: f64 = parts.iter().map(|p| p.p_plus).sum();
    let mut breakpoints: Vec<f64> = parts.iter().flat_map(|p| p.breakpoints.clone()).collect();
    breakpoints.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breakpoints.dedup();
    let label = format!(
        "sum({})",
        parts.iter().map(|p| p.label.clone()).collect::<Vec<_>>().join(",")
    );
    let evals: Vec<_> = parts.iter().map(|p| Arc::clone(&p.evaluator)).collect();
    let logs: Option<Vec<_>> = parts.iter().map(|p| p.at_loglog.clone()).collect();
    let mut out = VariableExponent::new(
        move |x| evals.iter().map(|f| f(x)).sum(),
        p_minus,
        p_plus,
        label,
    )?;
    if let Some(fs) = logs {
        out.at_loglog = Some(Arc::new(move |t| fs.iter().map(|f| f(t)).sum()));
    }
    out.breakpoints = breakpoints;
    Ok(out)
}

/// `c * p`; requires `c * p_minus > 1` so the result stays admissible.
pub fn scale(c: f64, p: &VariableExponent) -> Result<VariableExponent> {
    if !(c > 0.0) || c * p.p_minus <= 1.0 {
        return Err(Error::validation(format!(
            "scale factor {} drives p_minus to {} <= 1",
            c,
            c * p.p_minus
        )));
    }
    let inner = Arc::clone(&p.evaluator);
    let at_loglog = p.at_loglog.clone().map(|f| {
        Arc::new(move |t: f64| c * f(t)) as Arc<dyn Fn(f64) -> f64 + Send + Sync>
    });
    let mut out = VariableExponent::new(
        move |x| c * inner(x),
        c * p.p_minus,
        c * p.p_plus,
        format!("{}*{}", c, p.label),
    )?;
    out.at_loglog = at_loglog;
    out.breakpoints = p.breakpoints.clone();
    out.class_e_asserted = false;
    Ok(out)
}

/// `min(max(p, lo), hi)`.
pub fn clamp(p: &VariableExponent, lo: f64, hi: f64) -> Result<VariableExponent> {
    if !(1.0 < lo && lo <= hi) {
        return Err(Error::validation(format!(
            "clamp bounds must satisfy 1 < lo <= hi, got [{}, {}]",
            lo, hi
        )));
    }
    let inner = Arc::clone(&p.evaluator);
    let at_loglog = p.at_loglog.clone().map(|f| {
        Arc::new(move |t: f64| f(t).clamp(lo, hi)) as Arc<dyn Fn(f64) -> f64 + Send + Sync>
    });
    let mut out = VariableExponent::new(
        move |x| inner(x).clamp(lo, hi),
        p.p_minus.clamp(lo, hi),
        p.p_plus.clamp(lo, hi),
        format!("clamp({},{},{})", p.label, lo, hi),
    )?;
    out.at_loglog = at_loglog;
    out.breakpoints = p.breakpoints.clone();
    out.class_e_asserted = false;
    Ok(out)
}

/// Oscillation of a real-valued function over `[-2x,-x] u [x,2x]`,
/// sampled with `sampling` points per segment.
pub fn oscillation(f: &FunctionHandle, x: f64, sampling: usize) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::validation("oscillation needs x > 0"));
    }
    if sampling < 2 {
        return Err(Error::validation("oscillation needs at least 2 samples"));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut scan = |a: f64, b: f64| -> Result<()> {
        for i in 0..sampling {
            let t = a + (b - a) * (i as f64) / ((sampling - 1) as f64);
            let v = f.eval_real(t)?;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Ok(())
    };
    scan(-2.0 * x, -x)?;
    scan(x, 2.0 * x)?;
    Ok(hi - lo)
}

/// Oscillation with sample doubling until two refinements agree within
/// `abs_tol` or the doubling budget is exhausted.
pub fn oscillation_adaptive(
    f: &FunctionHandle,
    x: f64,
    abs_tol: f64,
    max_doublings: usize,
) -> Result<f64> {
    let mut n = 257usize;
    let mut prev = oscillation(f, x, n)?;
    for _ in 0..max_doublings {
        n = n * 2 - 1;
        let next = oscillation(f, x, n)?;
        if (next - prev).abs() <= abs_tol {
            return Ok(next);
        }
        prev = next;
    }
    Ok(prev)
}

/// Oscillation values along a sequence of abscissae, with a verdict.
#[derive(Debug, Clone)]
pub struct OscillationSeries {
    pub abscissae: Vec<f64>,
    pub values: Vec<f64>,
    pub so_consistent: bool,
}

/// Tunables for the slow-oscillation verdict. The verdict is a
/// heuristic diagnostic; slow oscillation is an asymptotic property no
/// finite sample can prove.
#[derive(Debug, Clone, Copy)]
pub struct SoDiagnosticOptions {
    pub threshold: f64,
    pub oscillation_tol: f64,
    pub max_doublings: usize,
}

impl Default for SoDiagnosticOptions {
    fn default() -> Self {
        SoDiagnosticOptions { threshold: 1e-2, oscillation_tol: 1e-4, max_doublings: 12 }
    }
}

/// Batch oscillation driver. `so_consistent` is set when the tail half
/// of the series is non-increasing and ends below the threshold.
pub fn so_diagnostic(
    f: &FunctionHandle,
    abscissae: &[f64],
    opts: SoDiagnosticOptions,
) -> Result<OscillationSeries> {
    if abscissae.is_empty() {
        return Err(Error::validation("so_diagnostic needs at least one abscissa"));
    }
    for w in abscissae.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::validation("abscissae must be strictly increasing"));
        }
    }
    if abscissae[0] <= 0.0 {
        return Err(Error::validation("abscissae must be positive"));
    }
    let values: Vec<f64> = abscissae
        .iter()
        .map(|&x| oscillation_adaptive(f, x, opts.oscillation_tol, opts.max_doublings))
        .collect::<Result<_>>()?;
    let tail_start = values.len() / 2;
    let tail = &values[tail_start..];
    let monotone = tail.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let so_consistent = monotone && *values.last().unwrap() <= opts.threshold;
    Ok(OscillationSeries { abscissae: abscissae.to_vec(), values, so_consistent })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    PlusInfinity,
    MinusInfinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowSpacing {
    Uniform,
    Log,
    /// Uniform in `log log x`; resolves exponents whose oscillation
    /// lives on that scale.
    LogLog,
}

/// Windows for estimating limits at infinity: consecutive pairs of
/// `endpoints` delimit windows, and the estimate is taken over the last
/// (farthest) one.
#[derive(Debug, Clone)]
pub struct SamplingPlan {
    pub endpoints: Vec<f64>,
    pub samples_per_window: usize,
    pub spacing: WindowSpacing,
}

impl SamplingPlan {
    pub fn validate(&self) -> Result<()> {
        if self.endpoints.len() < 2 {
            return Err(Error::validation("sampling plan needs at least two endpoints"));
        }
        for w in self.endpoints.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::validation("plan endpoints must be strictly increasing"));
            }
        }
        let min_allowed = match self.spacing {
            WindowSpacing::Uniform => f64::NEG_INFINITY,
            WindowSpacing::Log => 0.0,
            WindowSpacing::LogLog => 1.0,
        };
        if self.endpoints[0] <= min_allowed {
            return Err(Error::validation("plan endpoints too small for the chosen spacing"));
        }
        if self.samples_per_window < 2 {
            return Err(Error::validation("plan needs at least two samples per window"));
        }
        Ok(())
    }

    fn sample_points(&self, a: f64, b: f64) -> Vec<f64> {
        let n = self.samples_per_window;
        (0..n)
            .map(|i| {
                let s = i as f64 / ((n - 1) as f64);
                match self.spacing {
                    WindowSpacing::Uniform => a + (b - a) * s,
                    WindowSpacing::Log => (a.ln() + (b.ln() - a.ln()) * s).exp(),
                    WindowSpacing::LogLog => {
                        let (ta, tb) = (a.ln().ln(), b.ln().ln());
                        (ta + (tb - ta) * s).exp().exp()
                    }
                }
            })
            .collect()
    }
}

/// Numerical estimate of `(liminf, limsup)` of `p` at the requested
/// infinity, computed over the plan's farthest window.
pub fn limit_at_infinity_bounds(
    p: &VariableExponent,
    direction: Direction,
    plan: &SamplingPlan,
) -> Result<(f64, f64)> {
    plan.validate()?;
    let m = plan.endpoints.len();
    let (a, b) = (plan.endpoints[m - 2], plan.endpoints[m - 1]);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for x in plan.sample_points(a, b) {
        let v = match direction {
            Direction::PlusInfinity => p.eval(x),
            Direction::MinusInfinity => p.eval(-x),
        };
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions;
    use approx::assert_abs_diff_eq;

    #[test]
    fn dual_closed_forms() {
        let p2 = constant(2.0).unwrap();
        assert_abs_diff_eq!(dual(&p2).eval(0.3), 2.0, epsilon = 1e-15);
        let p4 = constant(4.0).unwrap();
        assert_abs_diff_eq!(dual(&p4).eval(1.0), 4.0 / 3.0, epsilon = 1e-15);
        let pl = lerner(3.0).unwrap();
        assert_abs_diff_eq!(dual(&pl).eval(std::f64::consts::E), 1.5, epsilon = 1e-12);
    }

    #[test]
    fn dual_is_an_involution_pointwise() {
        let p = lerner(3.0).unwrap();
        let pp = dual(&dual(&p));
        for k in -50..=50 {
            let x = k as f64 * 2.31;
            let a = p.eval(x);
            let b = pp.eval(x);
            assert!((a - b).abs() <= 1e-12 * a.abs());
        }
        assert_abs_diff_eq!(pp.p_minus, p.p_minus, epsilon = 1e-12);
        assert_abs_diff_eq!(pp.p_plus, p.p_plus, epsilon = 1e-12);
    }

    #[test]
    fn lerner_closed_form_values() {
        let p = lerner(3.0).unwrap();
        assert_abs_diff_eq!(p.eval(std::f64::consts::E), 3.0, epsilon = 1e-12);
        let x = (std::f64::consts::FRAC_PI_2.exp()).exp();
        assert_abs_diff_eq!(p.eval(x), 4.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p.eval(0.5), 3.0, epsilon = 0.0);
        assert!(lerner(2.0).is_err());
    }

    #[test]
    fn lerner_range_is_respected() {
        let p = lerner(3.0).unwrap();
        let grid: Vec<f64> = (1..4000).map(|k| k as f64 * 7.3).collect();
        p.audit(&grid).unwrap();
    }

    #[test]
    fn oscillation_constant_and_arctan() {
        let c = functions::indicator(-1e9, 1e9, num_complex::Complex64::new(5.0, 0.0));
        assert_abs_diff_eq!(oscillation(&c, 2.0, 100).unwrap(), 0.0, epsilon = 0.0);
        // arctan is monotone: oscillation over [-2,-1] u [1,2] is
        // arctan(2) - arctan(-2)
        let osc = oscillation(&functions::arctangent(), 1.0, 2000).unwrap();
        assert_abs_diff_eq!(osc, 2.0 * 2.0_f64.atan(), epsilon = 1e-6);
    }

    #[test]
    fn oscillation_rejects_bad_input() {
        assert!(oscillation(&functions::arctangent(), 0.0, 10).is_err());
        assert!(oscillation(&functions::arctangent(), -1.0, 10).is_err());
    }

    #[test]
    fn oscillation_scale_covariance() {
        // oscillation(f(c.), x) = oscillation(f, c x) for c > 0
        let f = functions::arctangent();
        let c = 2.5;
        let g = FunctionHandle::new(
            move |x| num_complex::Complex64::new((c * x).atan(), 0.0),
            "arctan(cx)",
        );
        for x in [0.5, 1.0, 3.0] {
            let a = oscillation(&g, x, 4001).unwrap();
            let b = oscillation(&f, c * x, 4001).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn lerner_oscillation_series_matches_dense_oracle() {
        // dense-sampling oracle values at x = e^{e^j}, 1e6 points
        let oracle = [
            0.5025874005910276,
            0.10005510172702614,
            0.04091643002394285,
            0.03366289678537182,
            0.008185614509359063,
            0.001332133490499654,
        ];
        let p = lerner(3.0).unwrap().as_function();
        for (j, want) in oracle.iter().enumerate() {
            let x = ((j as f64).exp()).exp();
            let got = oscillation(&p, x, 1_000_000).unwrap();
            assert_abs_diff_eq!(got, *want, epsilon = 1e-9);
        }
    }

    #[test]
    fn so_diagnostic_verdicts() {
        let c = functions::indicator(-1e12, 1e12, num_complex::Complex64::new(3.0, 0.0));
        let xs = [1.0, 2.0, 4.0, 8.0];
        let s = so_diagnostic(&c, &xs, SoDiagnosticOptions::default()).unwrap();
        assert!(s.so_consistent);
        assert!(s.values.iter().all(|&v| v == 0.0));

        let xs: Vec<f64> = (0..6).map(|j| ((j as f64).exp()).exp()).collect();
        let s = so_diagnostic(&lerner(3.0).unwrap().as_function(), &xs, SoDiagnosticOptions::default())
            .unwrap();
        assert!(s.so_consistent, "series = {:?}", s.values);
        assert!(s.values.windows(2).all(|w| w[1] < w[0]));

        let xs = [10.0, 20.0, 40.0, 80.0];
        let s = so_diagnostic(&functions::sine(), &xs, SoDiagnosticOptions::default()).unwrap();
        assert!(!s.so_consistent);
        assert!(s.values.iter().all(|&v| v > 1.9));

        assert!(so_diagnostic(&functions::sine(), &[], SoDiagnosticOptions::default()).is_err());
    }

    #[test]
    fn so_diagnostic_continuous_with_equal_limits_tends_to_zero() {
        // the oscillation is taken over the two-sided set
        // [-2x,-x] u [x,2x], so only equal limits at the two infinities
        // make it vanish; arctan|x| is such a function
        let f = FunctionHandle::new(
            |x: f64| num_complex::Complex64::new(x.abs().atan(), 0.0),
            "arctan|x|",
        );
        let xs: Vec<f64> = (0..10).map(|j| 4.0_f64.powi(j)).collect();
        let s = so_diagnostic(&f, &xs, SoDiagnosticOptions::default()).unwrap();
        assert!(s.so_consistent, "series = {:?}", s.values);
        assert!(s.values.last().unwrap() < &1e-2);
        // plain arctan has different one-sided limits: the two-sided
        // oscillation approaches pi and the verdict must be negative
        let s = so_diagnostic(&functions::arctangent(), &xs, SoDiagnosticOptions::default())
            .unwrap();
        assert!(!s.so_consistent);
        assert!((s.values.last().unwrap() - std::f64::consts::PI).abs() < 1e-3);
    }

    #[test]
    fn limit_bounds_constant_and_perturbed() {
        let plan = SamplingPlan {
            endpoints: vec![1e3, 1e6],
            samples_per_window: 2048,
            spacing: WindowSpacing::Log,
        };
        let p = constant(3.0).unwrap();
        let (lo, hi) = limit_at_infinity_bounds(&p, Direction::PlusInfinity, &plan).unwrap();
        assert_abs_diff_eq!(lo, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 3.0, epsilon = 1e-12);

        // decaying perturbation: 3 + 1/(1+x^2)
        let q = VariableExponent::new(|x| 3.0 + 1.0 / (1.0 + x * x), 3.0, 4.0, "3+lorentz")
            .unwrap();
        let (lo, hi) = limit_at_infinity_bounds(&q, Direction::PlusInfinity, &plan).unwrap();
        assert_abs_diff_eq!(lo, 3.0, epsilon = 1e-5);
        assert_abs_diff_eq!(hi, 3.0, epsilon = 1e-5);
    }

    #[test]
    fn limit_bounds_lerner_reaches_both_extremes() {
        // one full period of sin(log log x): t in [0, 2pi]
        let plan = SamplingPlan {
            endpoints: vec![std::f64::consts::E, ((2.0 * std::f64::consts::PI).exp()).exp()],
            samples_per_window: 8192,
            spacing: WindowSpacing::LogLog,
        };
        let p = lerner(3.0).unwrap();
        let (lo, hi) = limit_at_infinity_bounds(&p, Direction::PlusInfinity, &plan).unwrap();
        assert_abs_diff_eq!(lo, 2.0, epsilon = 1e-5);
        assert_abs_diff_eq!(hi, 4.0, epsilon = 1e-5);
        let (lo_m, hi_m) = limit_at_infinity_bounds(&p, Direction::MinusInfinity, &plan).unwrap();
        assert_abs_diff_eq!(lo_m, lo, epsilon = 1e-12);
        assert_abs_diff_eq!(hi_m, hi, epsilon = 1e-12);
    }

    #[test]
    fn shift_translate_consistency() {
        let p = lerner(3.0).unwrap();
        // finite huge shift: exp(exp(pi)) ~ 1.1e10
        let t = std::f64::consts::PI;
        let shifted = p.translate(Shift::LogLog(t)).unwrap();
        let h = (t.exp()).exp();
        assert_abs_diff_eq!(shifted.eval(0.0), p.eval(h), epsilon = 1e-12);
        // overflowing shift falls back to the asymptotic form
        let t = 3.0 * std::f64::consts::PI;
        let shifted = p.translate(Shift::LogLog(t)).unwrap();
        assert_abs_diff_eq!(shifted.eval(5.0), 3.0 + t.sin(), epsilon = 1e-12);
        assert_abs_diff_eq!(
            p.value_at_shift(Shift::LogLog(t)).unwrap(),
            3.0 + t.sin(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn composite_exponents() {
        let p = sum(vec![constant(1.2).unwrap(), scale(0.6, &lerner(3.0).unwrap()).unwrap()])
            .unwrap();
        assert_abs_diff_eq!(p.eval(0.0), 1.2 + 0.6 * 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.p_minus, 1.2 + 0.6 * 2.0, epsilon = 1e-12);
        let c = clamp(&lerner(3.0).unwrap(), 2.5, 3.5).unwrap();
        assert!(c.p_minus >= 2.5 && c.p_plus <= 3.5);
        let x = (std::f64::consts::FRAC_PI_2.exp()).exp();
        assert_abs_diff_eq!(c.eval(x), 3.5, epsilon = 1e-9);
        assert!(scale(0.3, &lerner(3.0).unwrap()).is_err());
        assert!(clamp(&lerner(3.0).unwrap(), 0.9, 3.0).is_err());
    }
}
