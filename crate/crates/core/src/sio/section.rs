//! Finite sections of singular integral operators on a uniform grid.
//!
//! The singular operator is discretized by the parity rule: at node
//! `x_i` the principal value is approximated using only nodes of
//! opposite parity, `(S h)(x_i) ~ (Delta/(pi i)) sum_{j-i odd} 2
//! h(x_j)/(x_j - x_i)`. The resulting matrix is self-adjoint exactly
//! (entries imaginary, antisymmetric in the index difference), so the
//! adjoint identities hold at machine precision; products of sections
//! converge to their continuum counterparts under refinement.

use ndarray::Array2;
use ndarray_linalg::SVD;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::symbols::{frobenius, MatrixSymbol};

/// Uniform grid on `[-T, T]` with `n` points, spacing `2T/(n-1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub half_width: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::validation("grid half-width must be positive"));
        }
        if points < 8 {
            return Err(Error::validation("grid needs at least 8 points"));
        }
        Ok(GridSpec { half_width, points })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let d = self.spacing();
        (0..self.points).map(|i| -self.half_width + i as f64 * d).collect()
    }

    /// Grid over `[-T, T]` at (approximately) the requested spacing.
    pub fn with_spacing(half_width: f64, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0) {
            return Err(Error::validation("spacing must be positive"));
        }
        let points = (2.0 * half_width / spacing).round() as usize + 1;
        GridSpec::new(half_width, points)
    }
}

/// Which operator a section discretizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectionKind {
    S,
    P,
    Q,
    /// `aP + Q`
    CoefPPlusQ,
    /// `PaI + Q`
    PCoefPlusQ,
    /// `I + PaQ`
    IdPlusPCoefQ,
    /// `I - PaQ`
    IdMinusPCoefQ,
    /// `I + QaP`
    IdPlusQCoefP,
    /// `I - QaP`
    IdMinusQCoefP,
}

impl SectionKind {
    pub fn label(self) -> &'static str {
        match self {
            SectionKind::S => "S",
            SectionKind::P => "P",
            SectionKind::Q => "Q",
            SectionKind::CoefPPlusQ => "aP+Q",
            SectionKind::PCoefPlusQ => "PaI+Q",
            SectionKind::IdPlusPCoefQ => "I+PaQ",
            SectionKind::IdMinusPCoefQ => "I-PaQ",
            SectionKind::IdPlusQCoefP => "I+QaP",
            SectionKind::IdMinusQCoefP => "I-QaP",
        }
    }
}

/// Dense matrix discretizing one of the operator kinds on a grid.
#[derive(Debug, Clone)]
pub struct FiniteSectionOperator {
    pub matrix: Array2<Complex64>,
    pub grid: GridSpec,
    pub block_size: usize,
    pub kind: SectionKind,
    pub symbol_label: String,
}

/// Scalar parity-rule section of `S` (imaginary antisymmetric matrix).
fn scalar_s(grid: &GridSpec) -> Array2<Complex64> {
    let nodes = grid.nodes();
    let n = grid.points;
    let d = grid.spacing();
    let mut s = Array2::<Complex64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if (i + j) % 2 == 1 {
                s[(i, j)] = Complex64::new(0.0, -2.0 * d / (std::f64::consts::PI * (nodes[j] - nodes[i])));
            }
        }
    }
    s
}

fn scalar_p(grid: &GridSpec) -> Array2<Complex64> {
    let mut p = scalar_s(grid);
    p.mapv_inplace(|z| 0.5 * z);
    for i in 0..grid.points {
        p[(i, i)] += 0.5;
    }
    p
}

fn block_index(component: usize, node: usize, n: usize) -> usize {
    component * n + node
}

/// Expands a scalar grid operator to `N` components (block diagonal).
fn expand_scalar(op: &Array2<Complex64>, n_comp: usize) -> Array2<Complex64> {
    let n = op.nrows();
    let dim = n_comp * n;
    let mut full = Array2::<Complex64>::zeros((dim, dim));
    for c in 0..n_comp {
        for i in 0..n {
            for j in 0..n {
                full[(block_index(c, i, n), block_index(c, j, n))] = op[(i, j)];
            }
        }
    }
    full
}

/// Multiplication operator: block `a(x_i)` per node.
fn multiplication(symbol: &dyn MatrixSymbol, grid: &GridSpec) -> Array2<Complex64> {
    let n = grid.points;
    let n_comp = symbol.size();
    let dim = n_comp * n;
    let nodes = grid.nodes();
    let mut m = Array2::<Complex64>::zeros((dim, dim));
    for (i, &x) in nodes.iter().enumerate() {
        let a = symbol.eval(x);
        for r in 0..n_comp {
            for c in 0..n_comp {
                m[(block_index(r, i, n), block_index(c, i, n))] = a[(r, c)];
            }
        }
    }
    m
}

fn identity(dim: usize) -> Array2<Complex64> {
    Array2::from_diag_elem(dim, Complex64::new(1.0, 0.0))
}

/// Assembles the requested section. Multiplication parts are applied
/// entrywise (no general matrix product is needed except for the
/// `I +- PaQ`, `I +- QaP` composites).
pub fn assemble_finite_section(
    symbol: &dyn MatrixSymbol,
    grid: &GridSpec,
    kind: SectionKind,
) -> Result<FiniteSectionOperator> {
    GridSpec::new(grid.half_width, grid.points)?;
    let n = grid.points;
    let n_comp = symbol.size();
    let dim = n_comp * n;
    let nodes = grid.nodes();

    let matrix = match kind {
        SectionKind::S => expand_scalar(&scalar_s(grid), n_comp),
        SectionKind::P => expand_scalar(&scalar_p(grid), n_comp),
        SectionKind::Q => {
            let p = scalar_p(grid);
            let mut q = Array2::<Complex64>::zeros((n, n));
            for i in 0..n {
                for j in 0..n {
                    q[(i, j)] = -p[(i, j)];
                }
                q[(i, i)] += 1.0;
            }
            expand_scalar(&q, n_comp)
        }
        SectionKind::CoefPPlusQ => {
            // (aP+Q)[(r,i),(c,j)] = a_rc(x_i) P_ij + delta_rc Q_ij
            let p = scalar_p(grid);
            let mut m = Array2::<Complex64>::zeros((dim, dim));
            for i in 0..n {
                let a = symbol.eval(nodes[i]);
                for j in 0..n {
                    let pij = p[(i, j)];
                    let qij = if i == j { Complex64::new(1.0, 0.0) - pij } else { -pij };
                    for r in 0..n_comp {
                        for c in 0..n_comp {
                            let mut v = a[(r, c)] * pij;
                            if r == c {
                                v += qij;
                            }
                            m[(block_index(r, i, n), block_index(c, j, n))] = v;
                        }
                    }
                }
            }
            m
        }
        SectionKind::PCoefPlusQ => {
            // (PaI+Q)[(r,i),(c,j)] = P_ij a_rc(x_j) + delta_rc Q_ij
            let p = scalar_p(grid);
            let mut m = Array2::<Complex64>::zeros((dim, dim));
            for j in 0..n {
                let a = symbol.eval(nodes[j]);
                for i in 0..n {
                    let pij = p[(i, j)];
                    let qij = if i == j { Complex64::new(1.0, 0.0) - pij } else { -pij };
                    for r in 0..n_comp {
                        for c in 0..n_comp {
                            let mut v = pij * a[(r, c)];
                            if r == c {
                                v += qij;
                            }
                            m[(block_index(r, i, n), block_index(c, j, n))] = v;
                        }
                    }
                }
            }
            m
        }
        SectionKind::IdPlusPCoefQ
        | SectionKind::IdMinusPCoefQ
        | SectionKind::IdPlusQCoefP
        | SectionKind::IdMinusQCoefP => {
            let p = expand_scalar(&scalar_p(grid), n_comp);
            let q = {
                let mut q = identity(dim);
                q.zip_mut_with(&p, |qe, pe| *qe -= pe);
                q
            };
            let a = multiplication(symbol, grid);
            let inner = match kind {
                SectionKind::IdPlusPCoefQ | SectionKind::IdMinusPCoefQ => p.dot(&a).dot(&q),
                _ => q.dot(&a).dot(&p),
            };
            let mut m = identity(dim);
            let sign = match kind {
                SectionKind::IdPlusPCoefQ | SectionKind::IdPlusQCoefP => 1.0,
                _ => -1.0,
            };
            m.zip_mut_with(&inner, |me, ie| *me += sign * ie);
            m
        }
    };

    Ok(FiniteSectionOperator {
        matrix,
        grid: *grid,
        block_size: n_comp,
        kind,
        symbol_label: format!("N={}", n_comp),
    })
}

/// Smallest singular value of the section matrix: the finite-volume
/// surrogate for the injection modulus in the grid inner product.
pub fn sigma_min(op: &FiniteSectionOperator) -> Result<f64> {
    let (_, s, _) = op
        .matrix
        .svd(false, false)
        .map_err(|e| Error::numerical(format!("svd failed: {}", e)))?;
    s.iter()
        .cloned()
        .fold(None::<f64>, |acc, v| Some(acc.map_or(v, |a| a.min(v))))
        .ok_or_else(|| Error::numerical("svd returned no singular values"))
}

/// Residuals of the operator identities on one grid. Each residual is
/// the Frobenius norm of the defect divided by the matrix dimension
/// `N * n`; the per-dimension scale makes values on different grids
/// comparable.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub grid: GridSpec,
    pub dim: usize,
    /// `S^2 - I`
    pub involution: f64,
    /// `(PaQ)^2`
    pub nilpotency: f64,
    /// `(I + PaQ)(I - PaQ) - I`
    pub inverse_pair: f64,
    /// `(I + PaQ)(aP + Q)(I - QaP) - (PaI + Q)`
    pub factorization: f64,
    /// `(aP + Q)^* - (Pa*I + Q)` in the grid pairing
    pub adjoint: f64,
}

/// Computes the identity residuals for a symbol on a grid.
pub fn identity_residuals(symbol: &dyn MatrixSymbol, grid: &GridSpec) -> Result<ResidualReport> {
    let n_comp = symbol.size();
    let dim = n_comp * grid.points;
    let dimf = dim as f64;

    let s = expand_scalar(&scalar_s(grid), n_comp);
    let p = expand_scalar(&scalar_p(grid), n_comp);
    let id = identity(dim);
    let q = {
        let mut q = id.clone();
        q.zip_mut_with(&p, |qe, pe| *qe -= pe);
        q
    };
    let a = multiplication(symbol, grid);

    let involution = {
        let mut r = s.dot(&s);
        r.zip_mut_with(&id, |re, ie| *re -= ie);
        frobenius(&r) / dimf
    };

    let paq = p.dot(&a).dot(&q);
    let nilpotency = frobenius(&paq.dot(&paq)) / dimf;

    let inverse_pair = {
        let mut plus = id.clone();
        plus.zip_mut_with(&paq, |m, v| *m += v);
        let mut minus = id.clone();
        minus.zip_mut_with(&paq, |m, v| *m -= v);
        let mut r = plus.dot(&minus);
        r.zip_mut_with(&id, |re, ie| *re -= ie);
        frobenius(&r) / dimf
    };

    let a_p_plus_q = assemble_finite_section(symbol, grid, SectionKind::CoefPPlusQ)?.matrix;
    let p_a_plus_q = assemble_finite_section(symbol, grid, SectionKind::PCoefPlusQ)?.matrix;

    let factorization = {
        let plus = assemble_finite_section(symbol, grid, SectionKind::IdPlusPCoefQ)?.matrix;
        let minus = assemble_finite_section(symbol, grid, SectionKind::IdMinusQCoefP)?.matrix;
        let mut r = plus.dot(&a_p_plus_q).dot(&minus);
        r.zip_mut_with(&p_a_plus_q, |re, we| *re -= we);
        frobenius(&r) / dimf
    };

    let adjoint = {
        // (aP+Q)^H compared against the section of Pa*I+Q
        let adj_sym = adjoint_of(symbol, grid)?;
        let mut r = a_p_plus_q.t().map(|z| z.conj());
        r.zip_mut_with(&adj_sym, |re, we| *re -= we);
        frobenius(&r) / dimf
    };

    Ok(ResidualReport {
        grid: *grid,
        dim,
        involution,
        nilpotency,
        inverse_pair,
        factorization,
        adjoint,
    })
}

/// Section of `P a* I + Q` where `a*` is the pointwise conjugate
/// transpose of the symbol.
fn adjoint_of(symbol: &dyn MatrixSymbol, grid: &GridSpec) -> Result<Array2<Complex64>> {
    struct Conj<'a>(&'a dyn MatrixSymbol);
    impl MatrixSymbol for Conj<'_> {
        fn size(&self) -> usize {
            self.0.size()
        }
        fn eval(&self, x: f64) -> Array2<Complex64> {
            self.0.eval(x).t().map(|z| z.conj())
        }
    }
    Ok(assemble_finite_section(&Conj(symbol), grid, SectionKind::PCoefPlusQ)?.matrix)
}

/// Dense CSV dump: one row per matrix row, re/im interleaved.
pub fn section_to_csv(op: &FiniteSectionOperator) -> String {
    let mut out = String::new();
    for i in 0..op.matrix.nrows() {
        let mut first = true;
        for j in 0..op.matrix.ncols() {
            if !first {
                out.push(',');
            }
            first = false;
            let z = op.matrix[(i, j)];
            out.push_str(&format!("{:.16e},{:.16e}", z.re, z.im));
        }
        out.push('\n');
    }
    out
}
