//! Serializable construction grammar for exponents, functions, and
//! symbols, used by config files and round-trip tooling.
//!
//! Grammar (JSON, tagged by `kind`):
//!   exponents: `constant(value)`, `lerner(alpha)`, `sum(terms)`,
//!              `scale(factor, inner)`, `clamp(lo, hi, inner)`
//!   functions: `zero`, `indicator(a, b, amplitude)`,
//!              `bump(center, radius, amplitude)`,
//!              `rational_decay(amplitude)`, `hardy_plus`,
//!              `hardy_minus`, `gaussian(amplitude)`,
//!              `gaussian_moment`, `sine`, `arctangent`,
//!              `from_exponent(exponent)`
//!   symbols:   terms as `(frequency, re/im matrix)`, `a_0` as a named
//!              built-in, `u` as a named built-in with parameters

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{self, VariableExponent};
use crate::functions::{self, FunctionHandle};
use crate::modular::QuadratureSpec;
use crate::symbols::{APPolynomial, SAPSymbol, ScanBudget, TransitionFunction};
use ndarray::Array2;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ComplexSpec {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl ComplexSpec {
    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExponentSpec {
    Constant { value: f64 },
    Lerner { alpha: f64 },
    Sum { terms: Vec<ExponentSpec> },
    Scale { factor: f64, inner: Box<ExponentSpec> },
    Clamp { lo: f64, hi: f64, inner: Box<ExponentSpec> },
}

impl ExponentSpec {
    pub fn build(&self) -> Result<VariableExponent> {
        match self {
            ExponentSpec::Constant { value } => exponents::constant(*value),
            ExponentSpec::Lerner { alpha } => exponents::lerner(*alpha),
            ExponentSpec::Sum { terms } => {
                let parts = terms.iter().map(ExponentSpec::build).collect::<Result<Vec<_>>>()?;
                exponents::sum(parts)
            }
            ExponentSpec::Scale { factor, inner } => exponents::scale(*factor, &inner.build()?),
            ExponentSpec::Clamp { lo, hi, inner } => exponents::clamp(&inner.build()?, *lo, *hi),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Zero,
    Indicator { a: f64, b: f64, amplitude: ComplexSpec },
    Bump { center: f64, radius: f64, amplitude: f64 },
    RationalDecay { amplitude: f64 },
    HardyPlus,
    HardyMinus,
    Gaussian { amplitude: f64 },
    GaussianMoment,
    Sine,
    Arctangent,
    FromExponent { exponent: Box<ExponentSpec> },
}

impl FunctionSpec {
    pub fn build(&self) -> Result<FunctionHandle> {
        Ok(match self {
            FunctionSpec::Zero => functions::zero(),
            FunctionSpec::Indicator { a, b, amplitude } => {
                if b < a {
                    return Err(Error::validation("indicator needs a <= b"));
                }
                functions::indicator(*a, *b, amplitude.to_complex())
            }
            FunctionSpec::Bump { center, radius, amplitude } => {
                if !(*radius > 0.0) {
                    return Err(Error::validation("bump needs radius > 0"));
                }
                functions::bump(*center, *radius, *amplitude)
            }
            FunctionSpec::RationalDecay { amplitude } => functions::rational_decay(*amplitude),
            FunctionSpec::HardyPlus => functions::hardy_plus(),
            FunctionSpec::HardyMinus => functions::hardy_minus(),
            FunctionSpec::Gaussian { amplitude } => functions::gaussian(*amplitude),
            FunctionSpec::GaussianMoment => functions::gaussian_moment(),
            FunctionSpec::Sine => functions::sine(),
            FunctionSpec::Arctangent => functions::arctangent(),
            FunctionSpec::FromExponent { exponent } => exponent.build()?.as_function(),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ApTermSpec {
    pub frequency: f64,
    /// Row-major N x N coefficient matrix.
    pub coeff: Vec<Vec<ComplexSpec>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ApPolynomialSpec {
    pub terms: Vec<ApTermSpec>,
}

impl ApPolynomialSpec {
    pub fn build(&self, size: usize) -> Result<APPolynomial> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            if t.coeff.len() != size || t.coeff.iter().any(|r| r.len() != size) {
                return Err(Error::validation(format!(
                    "coefficient of frequency {} is not {}x{}",
                    t.frequency, size, size
                )));
            }
            let m = Array2::from_shape_fn((size, size), |(i, j)| t.coeff[i][j].to_complex());
            terms.push((t.frequency, m));
        }
        APPolynomial::new(terms, size)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TransitionSpec {
    Tanh { scale: f64 },
}

impl TransitionSpec {
    pub fn build(&self) -> Result<TransitionFunction> {
        match self {
            TransitionSpec::Tanh { scale } => {
                if !(*scale > 0.0) {
                    return Err(Error::validation("transition scale must be positive"));
                }
                Ok(TransitionFunction::tanh(*scale))
            }
        }
    }
}

impl Default for TransitionSpec {
    fn default() -> Self {
        TransitionSpec::Tanh { scale: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AZeroSpec {
    Zero,
    /// Entry `(i,j)` is `amplitudes[i][j] / (1 + x^2)`.
    ScaledLorentzian { amplitudes: Vec<Vec<ComplexSpec>> },
}

impl AZeroSpec {
    pub fn build(&self, size: usize) -> Result<Vec<Vec<FunctionHandle>>> {
        match self {
            AZeroSpec::Zero => Ok((0..size)
                .map(|_| (0..size).map(|_| functions::zero()).collect())
                .collect()),
            AZeroSpec::ScaledLorentzian { amplitudes } => {
                if amplitudes.len() != size || amplitudes.iter().any(|r| r.len() != size) {
                    return Err(Error::validation("a_0 amplitude matrix size mismatch"));
                }
                Ok((0..size)
                    .map(|i| {
                        (0..size)
                            .map(|j| {
                                let amp = amplitudes[i][j].to_complex();
                                // sup of (1+|x|)/(1+x^2) is (1+sqrt(2))/2 < 1.21
                                FunctionHandle::new(
                                    move |x| amp / (1.0 + x * x),
                                    format!("lorentz[{}][{}]", i, j),
                                )
                                .with_envelope(1.21 * amp.norm())
                            })
                            .collect()
                    })
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SymbolSpec {
    pub size: usize,
    pub a_l: ApPolynomialSpec,
    pub a_r: ApPolynomialSpec,
    #[serde(default = "default_a_zero")]
    pub a_0: AZeroSpec,
    #[serde(default)]
    pub u: TransitionSpec,
}

fn default_a_zero() -> AZeroSpec {
    AZeroSpec::Zero
}

impl SymbolSpec {
    pub fn build(&self) -> Result<SAPSymbol> {
        SAPSymbol::new(
            self.a_l.build(self.size)?,
            self.a_r.build(self.size)?,
            self.a_0.build(self.size)?,
            self.u.build()?,
        )
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    #[serde(default = "default_truncation")]
    pub truncation_t: f64,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    #[serde(default = "default_refinements")]
    pub max_refinements: usize,
}

fn default_truncation() -> f64 {
    1e3
}
fn default_abs_tol() -> f64 {
    1e-10
}
fn default_refinements() -> usize {
    4000
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            truncation_t: default_truncation(),
            abs_tol: default_abs_tol(),
            max_refinements: default_refinements(),
        }
    }
}

impl QuadratureConfig {
    pub fn to_spec(self) -> QuadratureSpec {
        QuadratureSpec {
            truncation_t: self.truncation_t,
            abs_tol: self.abs_tol,
            max_refinements: self.max_refinements,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_candidates")]
    pub max_candidates: u64,
    #[serde(default = "default_min_gap")]
    pub min_gap: f64,
}

fn default_step() -> f64 {
    1e-3
}
fn default_candidates() -> u64 {
    10_000_000
}
fn default_min_gap() -> f64 {
    1.0
}

impl Default for BudgetConfig {
    fn default() -> Self {
        BudgetConfig {
            step: default_step(),
            max_candidates: default_candidates(),
            min_gap: default_min_gap(),
        }
    }
}

impl BudgetConfig {
    pub fn to_budget(self) -> ScanBudget {
        ScanBudget { step: self.step, max_candidates: self.max_candidates, min_gap: self.min_gap }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_grammar_round_trip() {
        let spec = ExponentSpec::Sum {
            terms: vec![
                ExponentSpec::Constant { value: 1.2 },
                ExponentSpec::Scale {
                    factor: 0.6,
                    inner: Box::new(ExponentSpec::Lerner { alpha: 3.0 }),
                },
            ],
        };
        let json = serde_json::to_string(&spec).unwrap();
        let back: ExponentSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
        let p = back.build().unwrap();
        assert!((p.eval(0.0) - (1.2 + 0.6 * 3.0)).abs() < 1e-12);
    }

    #[test]
    fn unknown_fields_rejected() {
        let bad = r#"{"kind": "constant", "value": 2.0, "extra": 1}"#;
        assert!(serde_json::from_str::<ExponentSpec>(bad).is_err());
        let bad = r#"{"kind": "bump", "center": 0.0, "radius": 1.0, "amplitude": 1.0, "x": 0}"#;
        assert!(serde_json::from_str::<FunctionSpec>(bad).is_err());
    }

    #[test]
    fn symbol_from_json_document() {
        let doc = r#"{
            "size": 1,
            "a_l": {"terms": [{"frequency": 0.0, "coeff": [[{"re": 1.0}]]}]},
            "a_r": {"terms": [{"frequency": 3.141592653589793, "coeff": [[{"re": 1.0}]]}]},
            "a_0": {"kind": "scaled_lorentzian", "amplitudes": [[{"re": 0.5}]]},
            "u": {"kind": "tanh", "scale": 2.0}
        }"#;
        let spec: SymbolSpec = serde_json::from_str(doc).unwrap();
        let s = spec.build().unwrap();
        let v = s.evaluate(0.0)[(0, 0)];
        // u(0) = 1/2: (1 - 1/2)*1 + (1/2)*1 + 0.5 = 1.5
        assert!((v - Complex64::new(1.5, 0.0)).norm() < 1e-12);
        let json = serde_json::to_string(&spec).unwrap();
        let back: SymbolSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn lorentzian_envelope_is_valid() {
        let a0 = AZeroSpec::ScaledLorentzian {
            amplitudes: vec![vec![ComplexSpec { re: 2.0, im: -1.0 }]],
        }
        .build(1)
        .unwrap();
        let grid: Vec<f64> = (-300..=300).map(|k| k as f64 * 0.05).collect();
        a0[0][0].audit(&grid).unwrap();
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(ExponentSpec::Lerner { alpha: 1.5 }.build().is_err());
        assert!(FunctionSpec::Bump { center: 0.0, radius: -1.0, amplitude: 1.0 }
            .build()
            .is_err());
        assert!(
            FunctionSpec::Indicator { a: 2.0, b: 1.0, amplitude: ComplexSpec { re: 1.0, im: 0.0 } }
                .build()
                .is_err()
        );
    }
}
