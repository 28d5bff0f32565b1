//! Almost-periodic polynomial and semi-almost-periodic symbol algebra,
//! Wiener norms, and the simultaneous-recurrence search for translation
//! sequences.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exponents::Direction;
use crate::functions::FunctionHandle;

pub fn frobenius(m: &Array2<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Finite exponential sum `a(x) = sum_j A_j e^{i lambda_j x}` with
/// `N x N` matrix coefficients.
#[derive(Debug, Clone)]
pub struct APPolynomial {
    terms: Vec<(f64, Array2<Complex64>)>,
    size: usize,
}

impl APPolynomial {
    pub fn new(terms: Vec<(f64, Array2<Complex64>)>, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::validation("matrix size must be at least 1"));
        }
        for (i, (f, m)) in terms.iter().enumerate() {
            if m.nrows() != size || m.ncols() != size {
                return Err(Error::validation(format!(
                    "coefficient {} has shape {}x{}, expected {}x{}",
                    i,
                    m.nrows(),
                    m.ncols(),
                    size,
                    size
                )));
            }
            for (j, (g, _)) in terms.iter().enumerate() {
                if i != j && f == g {
                    return Err(Error::validation(format!("duplicate frequency {}", f)));
                }
            }
        }
        Ok(APPolynomial { terms, size })
    }

    /// Scalar (1x1) polynomial from `(frequency, coefficient)` pairs.
    pub fn scalar(terms: &[(f64, Complex64)]) -> Result<Self> {
        APPolynomial::new(
            terms
                .iter()
                .map(|&(f, c)| (f, Array2::from_elem((1, 1), c)))
                .collect(),
            1,
        )
    }

    /// The constant polynomial (single zero-frequency term).
    pub fn constant(m: Array2<Complex64>) -> Result<Self> {
        let size = m.nrows();
        APPolynomial::new(vec![(0.0, m)], size)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn terms(&self) -> &[(f64, Array2<Complex64>)] {
        &self.terms
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.terms.iter().map(|(f, _)| *f).collect()
    }

    pub fn evaluate(&self, x: f64) -> Array2<Complex64> {
        let mut acc = Array2::<Complex64>::zeros((self.size, self.size));
        for (freq, coeff) in &self.terms {
            let phase = Complex64::from_polar(1.0, freq * x);
            acc.zip_mut_with(coeff, |a, c| *a += phase * c);
        }
        acc
    }

    /// `sum_j ||A_j||` with the Frobenius matrix norm.
    pub fn wiener_norm(&self) -> f64 {
        self.terms.iter().map(|(_, m)| frobenius(m)).sum()
    }

    /// Entrywise Wiener bound `sum_j |(A_j)_{ab}| >= sup_x |a_{ab}(x)|`.
    pub fn entry_bound(&self, row: usize, col: usize) -> f64 {
        self.terms.iter().map(|(_, m)| m[(row, col)].norm()).sum()
    }

    /// Upper bound `sum_j ||A_j|| |e^{i lambda_j h} - 1|` for the sup-norm
    /// distance between `a(. + h)` and `a`; exactly zero when every
    /// `lambda_j h` is a multiple of `2 pi`.
    pub fn shift_defect(&self, h: f64) -> f64 {
        self.terms
            .iter()
            .map(|(freq, m)| frobenius(m) * 2.0 * (freq * h / 2.0).sin().abs())
            .sum()
    }

    /// `a*(x)`: conjugate transpose pointwise, again an exponential sum.
    pub fn adjoint(&self) -> APPolynomial {
        let terms = self
            .terms
            .iter()
            .map(|(f, m)| (-f, m.t().map(|z| z.conj())))
            .collect();
        APPolynomial { terms, size: self.size }
    }
}

/// Monotone transition between 0 at `-oo` and 1 at `+oo`.
#[derive(Clone)]
pub struct TransitionFunction {
    evaluator: std::sync::Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub label: String,
}

impl std::fmt::Debug for TransitionFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TransitionFunction({})", self.label)
    }
}

impl TransitionFunction {
    pub fn new(
        evaluator: impl Fn(f64) -> f64 + Send + Sync + 'static,
        label: impl Into<String>,
    ) -> Self {
        TransitionFunction { evaluator: std::sync::Arc::new(evaluator), label: label.into() }
    }

    /// Default transition `(1 + tanh(x/scale)) / 2`.
    pub fn tanh(scale: f64) -> Self {
        TransitionFunction::new(
            move |x| 0.5 * (1.0 + (x / scale).tanh()),
            format!("tanh({})", scale),
        )
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.evaluator)(x)
    }

    pub fn audit(&self, grid: &[f64]) -> Result<()> {
        for &x in grid {
            let v = self.eval(x);
            if !(-1e-12..=1.0 + 1e-12).contains(&v) {
                return Err(Error::validation(format!(
                    "transition '{}' leaves [0,1] at x={}: {}",
                    self.label, x, v
                )));
            }
        }
        Ok(())
    }
}

impl Default for TransitionFunction {
    fn default() -> Self {
        TransitionFunction::tanh(1.0)
    }
}

/// Semi-almost-periodic symbol in Sarason form
/// `a = (1-u) a_l + u a_r + a_0` with almost-periodic representatives
/// `a_l`, `a_r` and a continuous part `a_0` vanishing at both
/// infinities.
#[derive(Debug, Clone)]
pub struct SAPSymbol {
    a_l: APPolynomial,
    a_r: APPolynomial,
    a_0: Vec<Vec<FunctionHandle>>,
    u: TransitionFunction,
    size: usize,
}

impl SAPSymbol {
    pub fn new(
        a_l: APPolynomial,
        a_r: APPolynomial,
        a_0: Vec<Vec<FunctionHandle>>,
        u: TransitionFunction,
    ) -> Result<Self> {
        let size = a_l.size();
        if a_r.size() != size {
            return Err(Error::validation("representatives have mismatched sizes"));
        }
        if a_0.len() != size || a_0.iter().any(|row| row.len() != size) {
            return Err(Error::validation("a_0 must be an N x N array of functions"));
        }
        for row in &a_0 {
            for f in row {
                if f.envelope_constant.is_none() && f.support_hint.is_none() {
                    return Err(Error::validation(format!(
                        "a_0 entry '{}' lacks decay metadata",
                        f.label
                    )));
                }
            }
        }
        Ok(SAPSymbol { a_l, a_r, a_0, u, size })
    }

    /// Symbol with equal representatives and no continuous part.
    pub fn pure_ap(a: APPolynomial) -> Result<Self> {
        let size = a.size();
        let a_0 = (0..size)
            .map(|_| (0..size).map(|_| crate::functions::zero()).collect())
            .collect();
        SAPSymbol::new(a.clone(), a, a_0, TransitionFunction::default())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn transition(&self) -> &TransitionFunction {
        &self.u
    }

    pub fn a_zero(&self) -> &Vec<Vec<FunctionHandle>> {
        &self.a_0
    }

    /// The stored almost-periodic representatives at `-oo` and `+oo`.
    /// The decomposition determines them uniquely, so the constructed
    /// pair is returned as-is.
    pub fn ap_representatives(&self) -> (&APPolynomial, &APPolynomial) {
        (&self.a_l, &self.a_r)
    }

    pub fn representative(&self, direction: Direction) -> &APPolynomial {
        match direction {
            Direction::PlusInfinity => &self.a_r,
            Direction::MinusInfinity => &self.a_l,
        }
    }

    pub fn evaluate(&self, x: f64) -> Array2<Complex64> {
        let u = self.u.eval(x);
        let mut acc = self.a_l.evaluate(x);
        acc.mapv_inplace(|z| z * (1.0 - u));
        let right = self.a_r.evaluate(x);
        acc.zip_mut_with(&right, |a, r| *a += u * r);
        for i in 0..self.size {
            for j in 0..self.size {
                acc[(i, j)] += self.a_0[i][j].eval(x);
            }
        }
        acc
    }

    pub fn entry(&self, row: usize, col: usize, x: f64) -> Complex64 {
        let u = self.u.eval(x);
        (1.0 - u) * self.a_l.evaluate(x)[(row, col)]
            + u * self.a_r.evaluate(x)[(row, col)]
            + self.a_0[row][col].eval(x)
    }

    /// Sup-norm bound for one entry, valid on the whole line.
    pub fn entry_bound(&self, row: usize, col: usize) -> f64 {
        let ap = self.a_l.entry_bound(row, col).max(self.a_r.entry_bound(row, col));
        let c0 = self.a_0[row][col].envelope_constant.unwrap_or(0.0);
        ap + c0
    }

    /// `a*`: conjugate transpose of every part.
    pub fn adjoint(&self) -> SAPSymbol {
        let size = self.size;
        let a_0 = (0..size)
            .map(|i| {
                (0..size)
                    .map(|j| {
                        let f = self.a_0[j][i].clone();
                        let inner = move |x: f64| f.eval(x).conj();
                        let mut g = FunctionHandle::new(inner, format!("conj({},{})", j, i));
                        g.envelope_constant = self.a_0[j][i].envelope_constant;
                        g.support_hint = self.a_0[j][i].support_hint;
                        g.breakpoints = self.a_0[j][i].breakpoints.clone();
                        g
                    })
                    .collect()
            })
            .collect();
        SAPSymbol {
            a_l: self.a_l.adjoint(),
            a_r: self.a_r.adjoint(),
            a_0,
            u: self.u.clone(),
            size,
        }
    }
}

/// Anything a finite section can be assembled from.
pub trait MatrixSymbol: Sync {
    fn size(&self) -> usize;
    fn eval(&self, x: f64) -> Array2<Complex64>;
}

impl MatrixSymbol for APPolynomial {
    fn size(&self) -> usize {
        self.size
    }
    fn eval(&self, x: f64) -> Array2<Complex64> {
        self.evaluate(x)
    }
}

impl MatrixSymbol for SAPSymbol {
    fn size(&self) -> usize {
        self.size
    }
    fn eval(&self, x: f64) -> Array2<Complex64> {
        self.evaluate(x)
    }
}

/// A constant matrix symbol.
#[derive(Debug, Clone)]
pub struct ConstantMatrix(pub Array2<Complex64>);

impl ConstantMatrix {
    pub fn scalar(c: Complex64) -> Self {
        ConstantMatrix(Array2::from_elem((1, 1), c))
    }
}

impl MatrixSymbol for ConstantMatrix {
    fn size(&self) -> usize {
        self.0.nrows()
    }
    fn eval(&self, _x: f64) -> Array2<Complex64> {
        self.0.clone()
    }
}

/// Scan range and acceptance spacing for the recurrence search.
#[derive(Debug, Clone, Copy)]
pub struct ScanBudget {
    pub step: f64,
    pub max_candidates: u64,
    /// Smallest spacing between consecutive accepted translations.
    pub min_gap: f64,
}

impl Default for ScanBudget {
    fn default() -> Self {
        ScanBudget { step: 1e-3, max_candidates: 10_000_000, min_gap: 1.0 }
    }
}

/// Largest phase defect `max_j |e^{i lambda_j h} - 1|`.
pub fn phase_defect(frequencies: &[f64], h: f64) -> f64 {
    frequencies
        .iter()
        .map(|f| 2.0 * (f * h / 2.0).sin().abs())
        .fold(0.0, f64::max)
}

/// Searches an arithmetic progression of candidates for translations
/// `h_m` under which every `e^{i lambda_j x}` nearly returns to itself:
/// `max_j |e^{i lambda_j h_m} - 1| < eps`.
///
/// Candidates are ignored until the defect has exceeded `eps` once, so
/// the trivial neighborhood of zero (where nothing has moved yet) is
/// not reported as recurrence. For the `-oo` direction the mirrored
/// sequence is returned, the defect being even in `h`.
pub fn kronecker_translations(
    frequencies: &[f64],
    eps: f64,
    count: usize,
    direction: Direction,
    budget: &ScanBudget,
) -> Result<Vec<f64>> {
    if frequencies.is_empty() {
        return Err(Error::validation("kronecker search needs at least one frequency"));
    }
    if !(eps > 0.0) {
        return Err(Error::validation("kronecker search needs eps > 0"));
    }
    if !(budget.step > 0.0) {
        return Err(Error::validation("scan step must be positive"));
    }
    let mut found: Vec<f64> = Vec::with_capacity(count);
    let mut next_allowed = 0.0_f64;
    let mut opened = false;
    for j in 1..=budget.max_candidates {
        let h = j as f64 * budget.step;
        let defect = phase_defect(frequencies, h);
        if !opened {
            if defect >= eps {
                opened = true;
            }
            continue;
        }
        if h < next_allowed - 1e-9 {
            continue;
        }
        if defect < eps {
            found.push(h);
            next_allowed = h + budget.min_gap;
            if found.len() >= count {
                let out = match direction {
                    Direction::PlusInfinity => found,
                    Direction::MinusInfinity => found.into_iter().map(|h| -h).collect(),
                };
                return Ok(out);
            }
        }
    }
    Err(Error::budget(format!(
        "kronecker scan found {}/{} translations within {} candidates \
         (eps = {}, step = {})",
        found.len(),
        count,
        budget.max_candidates,
        eps,
        budget.step
    )))
}
