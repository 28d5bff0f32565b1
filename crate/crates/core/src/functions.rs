//! Complex-valued functions on the line with decay/support metadata.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A function on the real line together with the metadata the
/// integration routines rely on: an optional envelope constant `C`
/// asserting `|f(x)| <= C/(1+|x|)`, an optional compact support
/// interval, and declared discontinuity points where quadrature panels
/// must split.
#[derive(Clone)]
pub struct FunctionHandle {
    evaluator: Arc<dyn Fn(f64) -> Complex64 + Send + Sync>,
    pub envelope_constant: Option<f64>,
    pub support_hint: Option<(f64, f64)>,
    pub breakpoints: Vec<f64>,
    pub label: String,
}

impl std::fmt::Debug for FunctionHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FunctionHandle")
            .field("label", &self.label)
            .field("envelope_constant", &self.envelope_constant)
            .field("support_hint", &self.support_hint)
            .finish()
    }
}

impl FunctionHandle {
    pub fn new(
        evaluator: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        label: impl Into<String>,
    ) -> Self {
        FunctionHandle {
            evaluator: Arc::new(evaluator),
            envelope_constant: None,
            support_hint: None,
            breakpoints: Vec::new(),
            label: label.into(),
        }
    }

    pub fn with_envelope(mut self, c: f64) -> Self {
        self.envelope_constant = Some(c);
        self
    }

    pub fn with_support(mut self, a: f64, b: f64) -> Self {
        self.support_hint = Some((a, b));
        self
    }

    pub fn with_breakpoints(mut self, pts: Vec<f64>) -> Self {
        self.breakpoints = pts;
        self
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        (self.evaluator)(x)
    }

    pub fn eval_abs(&self, x: f64) -> f64 {
        self.eval(x).norm()
    }

    /// Real part, rejecting genuinely complex values. The oscillation
    /// diagnostics are defined for real-valued functions only.
    pub fn eval_real(&self, x: f64) -> Result<f64> {
        let v = self.eval(x);
        if v.im.abs() > 1e-12 * (1.0 + v.re.abs()) {
            return Err(Error::validation(format!(
                "function '{}' is not real-valued at x={}",
                self.label, x
            )));
        }
        Ok(v.re)
    }

    /// The translate `(V_h f)(x) = f(x - h)`; metadata is shifted along,
    /// the envelope constant is enlarged to `C (1+|h|)` which keeps the
    /// asserted bound valid after the shift.
    pub fn translate(&self, h: f64) -> FunctionHandle {
        let inner = Arc::clone(&self.evaluator);
        FunctionHandle {
            evaluator: Arc::new(move |x| inner(x - h)),
            envelope_constant: self.envelope_constant.map(|c| c * (1.0 + h.abs())),
            support_hint: self.support_hint.map(|(a, b)| (a + h, b + h)),
            breakpoints: self.breakpoints.iter().map(|b| b + h).collect(),
            label: format!("{}<<{}", self.label, h),
        }
    }

    /// Pointwise scalar multiple `c * f`.
    pub fn scaled(&self, c: Complex64) -> FunctionHandle {
        let inner = Arc::clone(&self.evaluator);
        FunctionHandle {
            evaluator: Arc::new(move |x| c * inner(x)),
            envelope_constant: self.envelope_constant.map(|e| e * c.norm()),
            support_hint: self.support_hint,
            breakpoints: self.breakpoints.clone(),
            label: format!("{}*{}", c, self.label),
        }
    }

    /// Checks the declared envelope and support on a finite grid.
    pub fn audit(&self, grid: &[f64]) -> Result<()> {
        for &x in grid {
            let v = self.eval_abs(x);
            if let Some(c) = self.envelope_constant {
                if v > c / (1.0 + x.abs()) + 1e-12 {
                    return Err(Error::validation(format!(
                        "envelope violated by '{}' at x={}: |f|={} > {}",
                        self.label,
                        x,
                        v,
                        c / (1.0 + x.abs())
                    )));
                }
            }
            if let Some((a, b)) = self.support_hint {
                if (x < a || x > b) && v != 0.0 {
                    return Err(Error::validation(format!(
                        "support hint violated by '{}' at x={}",
                        self.label, x
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The zero function.
pub fn zero() -> FunctionHandle {
    FunctionHandle::new(|_| Complex64::new(0.0, 0.0), "0")
        .with_support(0.0, 0.0)
        .with_envelope(0.0)
}

/// `c` times the indicator of `[a, b]` (endpoints included).
pub fn indicator(a: f64, b: f64, c: Complex64) -> FunctionHandle {
    FunctionHandle::new(
        move |x| {
            if x >= a && x <= b {
                c
            } else {
                Complex64::new(0.0, 0.0)
            }
        },
        format!("{}*chi[{},{}]", c, a, b),
    )
    .with_support(a, b)
    .with_breakpoints(vec![a, b])
}

/// Smooth compactly supported bump
/// `A exp(1 - 1/(1 - t^2))` with `t = (x-center)/radius`, zero outside.
pub fn bump(center: f64, radius: f64, amplitude: f64) -> FunctionHandle {
    FunctionHandle::new(
        move |x| {
            let t = (x - center) / radius;
            if t.abs() < 1.0 {
                Complex64::new(amplitude * (1.0 - 1.0 / (1.0 - t * t)).exp(), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        },
        format!("bump({},{},{})", center, radius, amplitude),
    )
    .with_support(center - radius, center + radius)
}

/// `A / (1 + |x|)`; the envelope constant `|A|` is exact.
pub fn rational_decay(amplitude: f64) -> FunctionHandle {
    FunctionHandle::new(
        move |x| Complex64::new(amplitude / (1.0 + x.abs()), 0.0),
        format!("{}/(1+|x|)", amplitude),
    )
    .with_envelope(amplitude.abs())
    .with_breakpoints(vec![0.0])
}

/// `1/(x + i)`: boundary value of a function analytic and decaying in
/// the upper half-plane, hence a fixed point of the singular operator.
pub fn hardy_plus() -> FunctionHandle {
    FunctionHandle::new(
        |x| (Complex64::new(x, 1.0)).inv(),
        "1/(x+i)",
    )
    .with_envelope(std::f64::consts::SQRT_2)
}

/// `1/(x - i)`: lower half-plane analog, eigenfunction with eigenvalue -1.
pub fn hardy_minus() -> FunctionHandle {
    FunctionHandle::new(
        |x| (Complex64::new(x, -1.0)).inv(),
        "1/(x-i)",
    )
    .with_envelope(std::f64::consts::SQRT_2)
}

/// `A exp(-x^2)`. The stated envelope constant is `1.195 |A|`, the
/// maximum of `(1+|x|) exp(-x^2)`.
pub fn gaussian(amplitude: f64) -> FunctionHandle {
    FunctionHandle::new(
        move |x| Complex64::new(amplitude * (-x * x).exp(), 0.0),
        format!("{}*exp(-x^2)", amplitude),
    )
    .with_envelope(1.195 * amplitude.abs())
}

/// `x exp(-x^2)`, an odd function used in principal-value tests.
pub fn gaussian_moment() -> FunctionHandle {
    FunctionHandle::new(
        |x| Complex64::new(x * (-x * x).exp(), 0.0),
        "x*exp(-x^2)",
    )
    .with_envelope(1.0)
}

/// `sin(x)` wrapped as a handle (oscillation diagnostics input).
pub fn sine() -> FunctionHandle {
    FunctionHandle::new(|x| Complex64::new(x.sin(), 0.0), "sin")
}

/// `arctan(x)` wrapped as a handle.
pub fn arctangent() -> FunctionHandle {
    FunctionHandle::new(|x| Complex64::new(x.atan(), 0.0), "arctan")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn translate_shifts_support_and_breakpoints() {
        let f = indicator(0.0, 1.0, Complex64::new(1.0, 0.0));
        let g = f.translate(3.0);
        assert_eq!(g.support_hint, Some((3.0, 4.0)));
        assert_eq!(g.eval(3.5), Complex64::new(1.0, 0.0));
        assert_eq!(g.eval(2.5), Complex64::new(0.0, 0.0));
        // round trip
        let back = g.translate(-3.0);
        for x in [-0.5, 0.2, 0.9, 1.4] {
            assert_eq!(back.eval(x), f.eval(x));
        }
    }

    #[test]
    fn envelope_audit() {
        let f = rational_decay(1.0);
        let grid: Vec<f64> = (-100..=100).map(|k| k as f64 * 0.37).collect();
        f.audit(&grid).unwrap();
        let bad = FunctionHandle::new(|_| Complex64::new(1.0, 0.0), "1").with_envelope(0.5);
        assert!(bad.audit(&[3.0]).is_err());
    }

    #[test]
    fn hardy_envelope_is_valid() {
        let f = hardy_plus();
        let grid: Vec<f64> = (-400..=400).map(|k| k as f64 * 0.25).collect();
        f.audit(&grid).unwrap();
    }

    #[test]
    fn bump_vanishes_outside_support() {
        let f = bump(0.0, 1.0, 2.0);
        assert_eq!(f.eval(1.0).re, 0.0);
        assert_eq!(f.eval(-1.2).re, 0.0);
        assert!((f.eval(0.0).re - 2.0).abs() < 1e-15);
    }
}
