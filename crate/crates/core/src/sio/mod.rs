//! Numerical Cauchy singular integral operator, projections, finite
//! sections, and invertibility diagnostics.

pub mod cauchy;
pub mod section;

pub use cauchy::{apply_p, apply_q, cauchy_apply, privalov_decay_check, PrivalovReport};
pub use section::{
    assemble_finite_section, identity_residuals, section_to_csv, sigma_min,
    FiniteSectionOperator, GridSpec, ResidualReport, SectionKind,
};

use crate::error::{Error, Result};
use crate::functions::FunctionHandle;

/// Norm of the singular operator on the constant-exponent space:
/// `tan(pi/(2q))` for `q <= 2`, `cot(pi/(2q))` for `q >= 2`.
pub fn s_norm_formula(q: f64) -> Result<f64> {
    if !(q > 1.0) || !q.is_finite() {
        return Err(Error::validation(format!("s_norm_formula needs 1 < q < oo, got {}", q)));
    }
    if q == 2.0 {
        return Ok(1.0);
    }
    let t = (std::f64::consts::PI / (2.0 * q)).tan();
    if q < 2.0 {
        Ok(t)
    } else {
        Ok(1.0 / t)
    }
}

/// The cutoff `psi_n(x) = 1 - chi_{[-1,1]}(x/n)`: 0 on `[-n, n]`,
/// 1 outside. Idempotent by construction.
#[derive(Debug, Clone, Copy)]
pub struct CutoffFamily {
    pub index: u32,
}

impl CutoffFamily {
    pub fn new(index: u32) -> Result<Self> {
        if index < 1 {
            return Err(Error::validation("cutoff index must be at least 1"));
        }
        Ok(CutoffFamily { index })
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x.abs() <= self.index as f64 {
            0.0
        } else {
            1.0
        }
    }
}

/// Pointwise product `psi_n f`; vanishes on `[-n, n]`, untouched
/// outside, so compactly supported functions are annihilated once `n`
/// covers their support.
pub fn cutoff_apply(f: &FunctionHandle, n: u32) -> Result<FunctionHandle> {
    let cutoff = CutoffFamily::new(n)?;
    let inner = f.clone();
    let nf = n as f64;
    let mut out = FunctionHandle::new(
        move |x| inner.eval(x) * cutoff.eval(x),
        format!("psi_{}*{}", n, f.label),
    );
    out.envelope_constant = f.envelope_constant;
    out.support_hint = f.support_hint;
    let mut bps = f.breakpoints.clone();
    bps.push(-nf);
    bps.push(nf);
    bps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    bps.dedup();
    out.breakpoints = bps;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents;
    use crate::functions;
    use crate::modular::{modular, QuadratureSpec};
    use approx::assert_abs_diff_eq;

    #[test]
    fn s_norm_values() {
        assert_abs_diff_eq!(s_norm_formula(2.0).unwrap(), 1.0, epsilon = 0.0);
        assert_abs_diff_eq!(
            s_norm_formula(4.0).unwrap(),
            1.0 + std::f64::consts::SQRT_2,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            s_norm_formula(4.0 / 3.0).unwrap(),
            1.0 + std::f64::consts::SQRT_2,
            epsilon = 1e-12
        );
        assert!(s_norm_formula(1.0).is_err());
        assert!(s_norm_formula(0.5).is_err());
        assert!(s_norm_formula(f64::INFINITY).is_err());
    }

    #[test]
    fn s_norm_duality_symmetry() {
        for k in 1..=20 {
            let q = 1.05 + 0.15 * k as f64;
            let qp = q / (q - 1.0);
            let a = s_norm_formula(q).unwrap();
            let b = s_norm_formula(qp).unwrap();
            assert!((a - b).abs() < 1e-12, "q={}: {} vs {}", q, a, b);
        }
    }

    #[test]
    fn cutoff_annihilates_covered_support() {
        let f = functions::bump(0.0, 2.0, 1.0);
        let cut = cutoff_apply(&f, 2).unwrap();
        let p = exponents::constant(2.0).unwrap();
        let quad = QuadratureSpec::default();
        let m = modular(&cut, &p, 1.0, &quad).unwrap();
        assert_abs_diff_eq!(m.value, 0.0, epsilon = 0.0);
    }

    #[test]
    fn cutoff_idempotent_and_partial() {
        let f = functions::rational_decay(1.0);
        let once = cutoff_apply(&f, 1).unwrap();
        let twice = cutoff_apply(&once, 1).unwrap();
        for x in [-3.0, -1.0, 0.5, 1.0, 2.7] {
            assert_eq!(once.eval(x), twice.eval(x));
            if x.abs() <= 1.0 {
                assert_eq!(once.eval(x).norm(), 0.0);
            } else {
                assert_eq!(once.eval(x), f.eval(x));
            }
        }
        assert!(cutoff_apply(&f, 0).is_err());
    }
}
