//! Translation-limit experiments: the uniform convergence of slowly
//! oscillating functions along translation sequences, the limit-symbol
//! construction, the norm-convergence experiment for translated decaying
//! functions, its tail/little/difference error decomposition, and the
//! a-priori estimate pipeline on finite sections.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exponents::{self, Direction, Shift, VariableExponent};
use crate::functions::FunctionHandle;
use crate::modular::{
    implicit_sequence_solve, luxemburg_norm, vector_norm, ModularCurve, QuadratureSpec,
};
use crate::quad;
use crate::sio::cauchy::cauchy_apply;
use crate::sio::section::{
    assemble_finite_section, sigma_min, GridSpec, SectionKind,
};
use crate::symbols::SAPSymbol;

/// `(V_h f)(x) = f(x - h)` with shifted metadata.
pub fn translate(f: &FunctionHandle, h: f64) -> FunctionHandle {
    f.translate(h)
}

/// Per-shift sampled sup of `|f(x + h_k) - g|` over `[-R, R]`.
#[derive(Debug, Clone)]
pub struct SoUniformSeries {
    pub sups: Vec<f64>,
    /// Tail half of the series is non-increasing.
    pub tail_decreasing: bool,
}

fn series_verdict(sups: &[f64]) -> bool {
    let tail = &sups[sups.len() / 2..];
    tail.windows(2).all(|w| w[1] <= w[0] + 1e-12)
}

/// Uniform-on-compacts convergence check for a real function along a
/// concrete translation sequence with declared limit `g`.
pub fn so_uniform_check(
    f: impl Fn(f64) -> f64,
    shifts: &[f64],
    g: f64,
    r: f64,
    sampling: usize,
) -> Result<SoUniformSeries> {
    if shifts.is_empty() || sampling < 2 || !(r > 0.0) {
        return Err(Error::validation("so_uniform_check needs shifts, R > 0 and >= 2 samples"));
    }
    let sups = shifts
        .iter()
        .map(|&h| {
            (0..sampling)
                .map(|i| {
                    let x = -r + 2.0 * r * i as f64 / (sampling - 1) as f64;
                    (f(x + h) - g).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect::<Vec<_>>();
    let tail_decreasing = series_verdict(&sups);
    Ok(SoUniformSeries { sups, tail_decreasing })
}

/// Same check for a variable exponent along possibly huge shifts.
pub fn so_uniform_check_exponent(
    p: &VariableExponent,
    shifts: &[Shift],
    g: f64,
    r: f64,
    sampling: usize,
) -> Result<SoUniformSeries> {
    if shifts.is_empty() || sampling < 2 || !(r > 0.0) {
        return Err(Error::validation("so_uniform_check needs shifts, R > 0 and >= 2 samples"));
    }
    let mut sups = Vec::with_capacity(shifts.len());
    for &shift in shifts {
        let translated = p.translate(shift)?;
        let sup = (0..sampling)
            .map(|i| {
                let x = -r + 2.0 * r * i as f64 / (sampling - 1) as f64;
                (translated.eval(x) - g).abs()
            })
            .fold(0.0, f64::max);
        sups.push(sup);
    }
    let tail_decreasing = series_verdict(&sups);
    Ok(SoUniformSeries { sups, tail_decreasing })
}

/// Shared memoized evaluation of `S f` at repeated points.
struct CachedSingular {
    f: FunctionHandle,
    quad: QuadratureSpec,
    cache: Mutex<HashMap<u64, Complex64>>,
}

impl CachedSingular {
    fn new(f: FunctionHandle, quad: QuadratureSpec) -> Self {
        CachedSingular { f, quad, cache: Mutex::new(HashMap::new()) }
    }

    fn s_at(&self, x: f64) -> Complex64 {
        let key = x.to_bits();
        if let Some(v) = self.cache.lock().unwrap().get(&key) {
            return *v;
        }
        let v = cauchy_apply(&self.f, x, &self.quad)
            .map(|e| e.value)
            .unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        self.cache.lock().unwrap().insert(key, v);
        v
    }

    fn p_at(&self, x: f64) -> Complex64 {
        0.5 * (self.f.eval(x) + self.s_at(x))
    }

    fn q_at(&self, x: f64) -> Complex64 {
        0.5 * (self.f.eval(x) - self.s_at(x))
    }
}

/// Decay constant `C` with `|f(x)| <= C/(1+|x|)`: the declared envelope
/// when present, otherwise derived from the support and a dense sample
/// of the sup.
pub fn decay_constant(f: &FunctionHandle) -> Result<f64> {
    if let Some(c) = f.envelope_constant {
        return Ok(c);
    }
    if let Some((a, b)) = f.support_hint {
        let mut sup: f64 = 0.0;
        for i in 0..=4000 {
            let x = a + (b - a) * i as f64 / 4000.0;
            sup = sup.max(f.eval_abs(x));
        }
        return Ok(sup * (1.0 + a.abs().max(b.abs())));
    }
    Err(Error::validation(format!("function '{}' has no decay metadata", f.label)))
}

/// Builds the limit pair of the symbol experiment on one matrix entry:
/// `w = (a^rep_{ab} P + Q) phi_b` and
/// `w_m(x) = a_{ab}(x + h_m) (P phi_b)(x) + (Q phi_b)(x)`.
///
/// The translations must come from a recurrence search on the
/// representative's frequencies; pass the adjoint symbol for the
/// dual-side experiment. Both outputs carry decay envelopes inherited
/// from the measured decay of `P phi` and `Q phi`.
pub fn limit_symbol_sequence(
    s: &SAPSymbol,
    phi: &[FunctionHandle],
    h_m: &[f64],
    entry: (usize, usize),
    direction: Direction,
    quad: &QuadratureSpec,
) -> Result<(FunctionHandle, Vec<FunctionHandle>)> {
    if h_m.is_empty() {
        return Err(Error::validation(
            "limit_symbol_sequence needs a nonempty translation sequence",
        ));
    }
    if phi.len() != s.size() {
        return Err(Error::validation(format!(
            "test vector has {} components, symbol size is {}",
            phi.len(),
            s.size()
        )));
    }
    let (alpha, beta) = entry;
    if alpha >= s.size() || beta >= s.size() {
        return Err(Error::validation("entry indices out of range"));
    }
    let phi_b = &phi[beta];
    if phi_b.support_hint.is_none() {
        return Err(Error::validation("test functions must be compactly supported"));
    }

    let cached = Arc::new(CachedSingular::new(phi_b.clone(), *quad));

    // measured decay of P phi and Q phi; the sup of the product
    // |.|(1+|x|) over geometric probes, padded by a factor of two
    let probes: Vec<f64> = [3.0, 7.0, 15.0, 40.0, 120.0, 400.0]
        .iter()
        .flat_map(|&x| [x, -x])
        .collect();
    let mut c_tilde: f64 = 0.0;
    for &x in &probes {
        c_tilde = c_tilde.max(cached.p_at(x).norm() * (1.0 + x.abs()));
        c_tilde = c_tilde.max(cached.q_at(x).norm() * (1.0 + x.abs()));
    }
    let (a_supp, b_supp) = phi_b.support_hint.unwrap();
    for i in 0..=400 {
        let x = a_supp - 1.0 + (b_supp - a_supp + 2.0) * i as f64 / 400.0;
        c_tilde = c_tilde.max(cached.p_at(x).norm() * (1.0 + x.abs()));
        c_tilde = c_tilde.max(cached.q_at(x).norm() * (1.0 + x.abs()));
    }
    let c_tilde = 2.0 * c_tilde;

    let rep = s.representative(direction).clone();
    let rep_bound = rep.entry_bound(alpha, beta);
    let w = {
        let cached = Arc::clone(&cached);
        let rep = rep.clone();
        FunctionHandle::new(
            move |x| {
                rep.evaluate(x)[(alpha, beta)] * cached.p_at(x) + cached.q_at(x)
            },
            format!("(a_rep[{}{}]P+Q)phi", alpha, beta),
        )
        .with_envelope((rep_bound + 1.0) * c_tilde)
    };

    let sap_bound = s.entry_bound(alpha, beta);
    let w_ms = h_m
        .iter()
        .map(|&h| {
            let cached = Arc::clone(&cached);
            let s = s.clone();
            FunctionHandle::new(
                move |x| s.entry(alpha, beta, x + h) * cached.p_at(x) + cached.q_at(x),
                format!("w_m(h={})", h),
            )
            .with_envelope((sap_bound + 1.0) * c_tilde)
        })
        .collect();

    Ok((w, w_ms))
}

/// A translation sequence with the declared limit of the exponent along
/// it.
#[derive(Debug, Clone)]
pub struct TranslationPlan {
    pub exponent: VariableExponent,
    pub shifts: Vec<Shift>,
    pub target_q: f64,
    pub direction: Direction,
    /// Largest allowed `|p(h_K) - q|` at the final shift.
    pub tolerance: f64,
}

impl TranslationPlan {
    /// Checks monotonicity of the shifts and convergence of `p(h_k)`,
    /// returning the exponent values along the sequence.
    pub fn validate(&self) -> Result<Vec<f64>> {
        if self.shifts.is_empty() {
            return Err(Error::validation("translation plan has no shifts"));
        }
        let keys: Vec<f64> = self
            .shifts
            .iter()
            .map(|s| match self.direction {
                Direction::PlusInfinity => s.loglog().unwrap_or_else(|| s.magnitude()),
                Direction::MinusInfinity => -s.magnitude(),
            })
            .collect();
        if keys.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::validation("shifts must be strictly monotone toward infinity"));
        }
        if self.direction == Direction::MinusInfinity
            && self.shifts.iter().any(|s| matches!(s, Shift::LogLog(_)))
        {
            return Err(Error::validation(
                "log-log shifts describe the +infinity direction only",
            ));
        }
        let values: Vec<f64> = self
            .shifts
            .iter()
            .map(|&s| self.exponent.value_at_shift(s))
            .collect::<Result<_>>()?;
        let devs: Vec<f64> = values.iter().map(|v| (v - self.target_q).abs()).collect();
        let tail = &devs[devs.len() / 2..];
        if tail.windows(2).any(|w| w[1] > w[0] + 1e-12) {
            return Err(Error::validation(format!(
                "|p(h_k) - q| is not non-increasing over the tail: {:?}",
                devs
            )));
        }
        if *devs.last().unwrap() > self.tolerance {
            return Err(Error::validation(format!(
                "p(h_K) = {} does not reach the declared limit {} within {}",
                values.last().unwrap(),
                self.target_q,
                self.tolerance
            )));
        }
        Ok(values)
    }
}

/// One row of the norm-convergence experiment.
#[derive(Debug, Clone)]
pub struct KeyLemmaRecord {
    pub shift: Shift,
    pub p_at_shift: f64,
    /// `||V_{h_k} w_k||_{p(.)}`, computed through the change of
    /// variables as the root of `F(., k)`.
    pub measured: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone)]
pub struct KeyLemmaReport {
    pub records: Vec<KeyLemmaRecord>,
    /// `||w||_q`, the root of the limiting curve.
    pub target: f64,
    pub verdict: bool,
    pub final_deviation: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct KeyLemmaOptions {
    /// Verdict requires the last deviation below this.
    pub final_deviation_max: f64,
    /// ... and below the first deviation divided by this.
    pub improvement_factor: f64,
}

impl Default for KeyLemmaOptions {
    fn default() -> Self {
        KeyLemmaOptions { final_deviation_max: 1e-2, improvement_factor: 5.0 }
    }
}

/// Runs the norm-convergence experiment: for each shift the norm
/// `||V_{h_k} w_k||_{p(.)}` is the root of `F(lambda, k) = int
/// |w_k(x)/lambda|^{p(x + h_k)} dx = 1`, solved with warm-started
/// brackets, and compared against the classical norm `||w||_q`.
pub fn key_lemma_experiment(
    plan: &TranslationPlan,
    w: &FunctionHandle,
    w_ks: &[FunctionHandle],
    quad: &QuadratureSpec,
    root_tol: f64,
    opts: KeyLemmaOptions,
) -> Result<KeyLemmaReport> {
    let p_values = plan.validate()?;
    if w_ks.len() != plan.shifts.len() {
        return Err(Error::validation(format!(
            "{} translated functions for {} shifts",
            w_ks.len(),
            plan.shifts.len()
        )));
    }
    let q = exponents::constant(plan.target_q)?;
    let limit_curve = ModularCurve::from_modular(w.clone(), q, *quad);
    let curves = plan
        .shifts
        .iter()
        .zip(w_ks.iter())
        .map(|(&shift, w_k)| {
            let translated = plan.exponent.translate(shift)?;
            Ok(ModularCurve::from_modular(w_k.clone(), translated, *quad))
        })
        .collect::<Result<Vec<_>>>()?;
    let seq = implicit_sequence_solve(&curves, &limit_curve, root_tol)?;
    let records = plan
        .shifts
        .iter()
        .zip(p_values.iter())
        .zip(seq.roots.iter().zip(seq.deviations.iter()))
        .map(|((&shift, &p_at_shift), (&measured, &deviation))| KeyLemmaRecord {
            shift,
            p_at_shift,
            measured,
            deviation,
        })
        .collect::<Vec<_>>();
    let first = records.first().unwrap().deviation;
    let last = records.last().unwrap().deviation;
    let verdict = last <= opts.final_deviation_max
        && last <= first / opts.improvement_factor;
    Ok(KeyLemmaReport { records, target: seq.limit, verdict, final_deviation: last })
}

/// Radius schedule: the `R` solving
/// `(4/(p_- - 1)) (C/lambda)^{p_-} R^{1 - p_-} = eps/6`.
pub fn schedule_radius(eps: f64, c: f64, lambda: f64, p_minus: f64) -> f64 {
    ((24.0 / (p_minus - 1.0)) * (c / lambda).powf(p_minus) / eps)
        .powf(1.0 / (p_minus - 1.0))
}

/// Little-set schedule: the `delta` solving `10 delta R / lambda = eps/6`.
pub fn schedule_little(eps: f64, lambda: f64, radius: f64) -> f64 {
    eps * lambda / (60.0 * radius)
}

/// The tail/little/difference split of `|F(lambda,k) - F(lambda,inf)|`
/// at one probe, together with the closed-form bounds the tail and
/// little terms must respect.
#[derive(Debug, Clone)]
pub struct TldTriple {
    pub tail_k: f64,
    pub tail_inf: f64,
    pub little_k: f64,
    pub little_inf: f64,
    pub difference: f64,
    /// Totals assembled from the same pieces, so the triangle
    /// inequality versus `|f_k - f_inf|` is structural.
    pub f_k: f64,
    pub f_inf: f64,
    /// `(2/(p_- - 1)) (C/lambda)^{p_-} R^{1-p_-}`, valid for both tails.
    pub tail_bound: f64,
    /// `6 delta R / lambda`.
    pub little_bound_k: f64,
    /// `4 delta R / lambda`.
    pub little_bound_inf: f64,
    /// Sampled `sup_{[-R,R]} |w_k - w|`; the little-term bound assumes
    /// this is below `delta`.
    pub sup_difference: f64,
}

impl TldTriple {
    pub fn sum(&self) -> f64 {
        self.tail_k + self.tail_inf + self.little_k + self.little_inf + self.difference
    }
}

/// Number of cells of the masked composite rule on `[-R, R]`.
const TLD_CELLS: usize = 8192;

/// Computes the decomposition at one `(lambda, k, R, delta)` probe.
///
/// All window pieces use one midpoint rule on a shared grid and the
/// tails are integrated out to infinity, so `f_k` and `f_inf` decompose
/// exactly into their reported pieces.
pub fn tld_decomposition(
    w: &FunctionHandle,
    w_k: &FunctionHandle,
    plan: &TranslationPlan,
    k: usize,
    lambda: f64,
    radius: f64,
    delta: f64,
    quad_spec: &QuadratureSpec,
) -> Result<TldTriple> {
    if !(radius > 0.0 && delta > 0.0 && lambda > 0.0) {
        return Err(Error::validation("tld_decomposition needs positive lambda, R, delta"));
    }
    if k >= plan.shifts.len() {
        return Err(Error::validation("probe index outside the plan"));
    }
    let c = decay_constant(w)?.max(decay_constant(w_k)?);
    if radius < c / lambda {
        return Err(Error::validation(format!(
            "tail bound regime needs R >= C/lambda = {}, got R = {}",
            c / lambda,
            radius
        )));
    }
    if 3.0 * delta / lambda > 1.0 {
        return Err(Error::validation("little bound regime needs 3 delta <= lambda"));
    }
    let translated = plan.exponent.translate(plan.shifts[k])?;
    let q = plan.target_q;

    // masked midpoint rule over [-R, R] on a shared grid
    let cell = 2.0 * radius / TLD_CELLS as f64;
    let mut little_k = 0.0;
    let mut little_inf = 0.0;
    let mut mid_k = 0.0;
    let mut mid_inf = 0.0;
    let mut sup_difference: f64 = 0.0;
    for i in 0..TLD_CELLS {
        let x = -radius + (i as f64 + 0.5) * cell;
        let wv = w.eval_abs(x);
        let wkv = w_k.eval_abs(x);
        sup_difference = sup_difference.max((w.eval(x) - w_k.eval(x)).norm());
        let term_k = (wkv / lambda).powf(translated.eval(x)) * cell;
        let term_inf = (wv / lambda).powf(q) * cell;
        if wv <= 2.0 * delta {
            little_k += term_k;
            little_inf += term_inf;
        } else {
            mid_k += term_k;
            mid_inf += term_inf;
        }
    }
    let difference = (mid_k - mid_inf).abs();

    // tails: numeric over [R, T] plus the inversion transform beyond T
    let tail_of = |f: &FunctionHandle, p: &VariableExponent| -> f64 {
        let integrand = |x: f64| (f.eval_abs(x) / lambda).powf(p.eval(x));
        let t = quad_spec.truncation_t.max(2.0 * radius);
        let mut acc = 0.0;
        match f.support_hint {
            Some((a, b)) => {
                let right = quad::integrate(
                    &integrand,
                    &[radius, b.max(radius)],
                    quad_spec.abs_tol,
                    quad_spec.max_refinements,
                );
                let left = quad::integrate(
                    &integrand,
                    &[a.min(-radius), -radius],
                    quad_spec.abs_tol,
                    quad_spec.max_refinements,
                );
                acc += right.value + left.value;
            }
            None => {
                let right = quad::integrate(
                    &integrand,
                    &[radius, t],
                    quad_spec.abs_tol,
                    quad_spec.max_refinements,
                );
                let left = quad::integrate(
                    &integrand,
                    &[-t, -radius],
                    quad_spec.abs_tol,
                    quad_spec.max_refinements,
                );
                let far_r = quad::integrate_right_tail(
                    &integrand,
                    t,
                    quad_spec.abs_tol,
                    quad_spec.max_refinements,
                );
                let far_l = quad::integrate_left_tail(
                    &integrand,
                    t,
                    quad_spec.abs_tol,
                    quad_spec.max_refinements,
                );
                acc += right.value + left.value + far_r.value + far_l.value;
            }
        }
        acc
    };
    let q_exp = exponents::constant(q)?;
    let tail_k = tail_of(w_k, &translated);
    let tail_inf = tail_of(w, &q_exp);

    let p_minus = plan.exponent.p_minus;
    let tail_bound =
        (2.0 / (p_minus - 1.0)) * (c / lambda).powf(p_minus) * radius.powf(1.0 - p_minus);

    Ok(TldTriple {
        tail_k,
        tail_inf,
        little_k,
        little_inf,
        difference,
        f_k: tail_k + little_k + mid_k,
        f_inf: tail_inf + little_inf + mid_inf,
        tail_bound,
        little_bound_k: 6.0 * delta * radius / lambda,
        little_bound_inf: 4.0 * delta * radius / lambda,
        sup_difference,
    })
}

/// A convergent subsequence extracted from translation candidates.
#[derive(Debug, Clone)]
pub struct SubsequenceExtraction {
    pub shifts: Vec<f64>,
    /// Declared limit of the exponent along the subsequence: its value
    /// at the farthest kept translation.
    pub target_q: f64,
    pub p_values: Vec<f64>,
}

/// Picks, out of recurrence candidates `h_m`, an increasing subsequence
/// along which the exponent converges: candidates are binned by `p(h)`,
/// the densest bin is kept, the limit is declared at the farthest
/// member, and a backward greedy pass enforces that `|p(h_k) - q|` is
/// non-increasing. At most `keep` members survive, evenly subsampled
/// with the farthest always included.
pub fn extract_convergent_subsequence(
    p: &VariableExponent,
    candidates: &[f64],
    bin_width: f64,
    keep: usize,
) -> Result<SubsequenceExtraction> {
    if candidates.len() < 2 || keep < 2 {
        return Err(Error::validation("subsequence extraction needs >= 2 candidates and keep >= 2"));
    }
    if !(bin_width > 0.0) {
        return Err(Error::validation("bin width must be positive"));
    }
    let values: Vec<f64> = candidates.iter().map(|&h| p.eval(h)).collect();
    let mut counts: std::collections::BTreeMap<i64, usize> = std::collections::BTreeMap::new();
    for v in &values {
        *counts.entry(((v - p.p_minus) / bin_width).floor() as i64).or_insert(0) += 1;
    }
    let best_bin = *counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(k, _)| k)
        .unwrap();
    let members: Vec<(f64, f64)> = candidates
        .iter()
        .zip(values.iter())
        .filter(|(_, &v)| ((v - p.p_minus) / bin_width).floor() as i64 == best_bin)
        .map(|(&h, &v)| (h, v))
        .collect();
    if members.len() < 2 {
        return Err(Error::validation("densest bin holds fewer than two candidates"));
    }
    let q = members.last().unwrap().1;
    // backward greedy: keep h when its deviation does not undershoot the
    // deviations kept later, so the forward sequence is non-increasing
    let mut kept: Vec<(f64, f64)> = vec![*members.last().unwrap()];
    let mut floor_dev = (q - q).abs();
    for &(h, v) in members.iter().rev().skip(1) {
        let dev = (v - q).abs();
        if dev + 1e-15 >= floor_dev {
            kept.push((h, v));
            floor_dev = dev;
        }
    }
    kept.reverse();
    let take = keep.min(kept.len());
    let picked: Vec<(f64, f64)> = (0..take)
        .map(|i| kept[(i * (kept.len() - 1)) / (take - 1).max(1)])
        .collect();
    Ok(SubsequenceExtraction {
        shifts: picked.iter().map(|(h, _)| *h).collect(),
        target_q: q,
        p_values: picked.iter().map(|(_, v)| *v).collect(),
    })
}

/// Options of the a-priori estimate experiment.
#[derive(Debug, Clone)]
pub struct AprioriOptions {
    pub q_r: f64,
    pub direction: Direction,
    pub spacing: f64,
    pub half_widths: Vec<f64>,
    pub quad: QuadratureSpec,
    pub root_tol: f64,
    /// Sweep counts as stable when every smallest singular value stays
    /// above this fraction of the first one.
    pub stability_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct AprioriRecord {
    pub half_width: f64,
    pub points: usize,
    pub sigma_min_primal: f64,
    pub sigma_min_adjoint: f64,
}

/// Measured lower-bound constants for `a_rep P + Q` on the test set and
/// on finite sections, with the adjoint side alongside.
#[derive(Debug, Clone)]
pub struct AprioriReport {
    pub direct_primal: Vec<(String, f64)>,
    pub direct_adjoint: Vec<(String, f64)>,
    pub c_primal: f64,
    pub c_adjoint: f64,
    pub sweep: Vec<AprioriRecord>,
    pub primal_stable: bool,
    pub adjoint_stable: bool,
}

/// Estimates the best constant in `||(a_rep P+Q) phi||_q >= c ||phi||_q`
/// two ways: directly over a test set and through smallest singular
/// values of the finite sections, the adjoint estimate using the
/// `P a* I + Q` sections. Jointly positive and stable constants across
/// the sweep are the numerical stand-in for two-sided invertibility;
/// nothing here reproduces the compactness arguments behind the
/// abstract regularizer.
pub fn apriori_estimate_experiment(
    s: &SAPSymbol,
    test_set: &[Vec<FunctionHandle>],
    opts: &AprioriOptions,
) -> Result<AprioriReport> {
    if test_set.is_empty() {
        return Err(Error::validation("a-priori experiment needs a nonempty test set"));
    }
    if !(opts.q_r > 1.0) || !opts.q_r.is_finite() {
        return Err(Error::validation("q_r must lie in (1, oo)"));
    }
    let n = s.size();
    let rep = s.representative(opts.direction).clone();
    let rep_adj = rep.adjoint();
    let q_exp = exponents::constant(opts.q_r)?;
    let q_dual = exponents::constant(opts.q_r / (opts.q_r - 1.0))?;

    let mut direct_primal = Vec::new();
    let mut direct_adjoint = Vec::new();
    for (idx, phi) in test_set.iter().enumerate() {
        if phi.len() != n {
            return Err(Error::validation("test vector size mismatch"));
        }
        for f in phi {
            if f.support_hint.is_none() {
                return Err(Error::validation("test functions must be compactly supported"));
            }
        }
        let caches: Vec<Arc<CachedSingular>> = phi
            .iter()
            .map(|f| Arc::new(CachedSingular::new(f.clone(), opts.quad)))
            .collect();

        // primal: (a P + Q) phi, componentwise
        let mut image = Vec::with_capacity(n);
        for alpha in 0..n {
            let rep = rep.clone();
            let caches: Vec<_> = caches.iter().map(Arc::clone).collect();
            let bound: f64 = (0..n).map(|b| rep.entry_bound(alpha, b)).sum::<f64>() + 1.0;
            let mut c_env: f64 = 0.0;
            for &x in &[5.0, -5.0, 50.0, -50.0, 300.0, -300.0] {
                let mut v = Complex64::new(0.0, 0.0);
                for (b, cache) in caches.iter().enumerate() {
                    v += rep.evaluate(x)[(alpha, b)] * cache.p_at(x);
                }
                v += caches[alpha].q_at(x);
                c_env = c_env.max(v.norm() * (1.0 + x.abs()));
            }
            for i in 0..=200 {
                let x = -3.0 + 6.0 * i as f64 / 200.0;
                let mut v = Complex64::new(0.0, 0.0);
                for (b, cache) in caches.iter().enumerate() {
                    v += rep.evaluate(x)[(alpha, b)] * cache.p_at(x);
                }
                v += caches[alpha].q_at(x);
                c_env = c_env.max(v.norm() * (1.0 + x.abs()));
            }
            let c_env = (2.0 * c_env).max(bound * 1e-12);
            let handle = FunctionHandle::new(
                move |x| {
                    let a = rep.evaluate(x);
                    let mut v = Complex64::new(0.0, 0.0);
                    for (b, cache) in caches.iter().enumerate() {
                        v += a[(alpha, b)] * cache.p_at(x);
                    }
                    v + caches[alpha].q_at(x)
                },
                format!("((aP+Q)phi{})_{}", idx, alpha),
            )
            .with_envelope(c_env);
            image.push(handle);
        }
        let num = vector_norm(&image, &q_exp, &opts.quad, opts.root_tol)?;
        let den = vector_norm(phi, &q_exp, &opts.quad, opts.root_tol)?;
        direct_primal.push((format!("phi{}", idx), num / den));

        // adjoint: (P a* I + Q) phi = P(a* phi) + Q phi, in the dual norm
        let mut image_adj = Vec::with_capacity(n);
        for alpha in 0..n {
            let rep_adj = rep_adj.clone();
            let phi = phi.clone();
            let support = phi.iter().filter_map(|f| f.support_hint).fold(
                (f64::INFINITY, f64::NEG_INFINITY),
                |acc, (a, b)| (acc.0.min(a), acc.1.max(b)),
            );
            let product = FunctionHandle::new(
                move |x| {
                    let a = rep_adj.evaluate(x);
                    let mut v = Complex64::new(0.0, 0.0);
                    for (b, f) in phi.iter().enumerate() {
                        v += a[(alpha, b)] * f.eval(x);
                    }
                    v
                },
                format!("(a*phi{})_{}", idx, alpha),
            )
            .with_support(support.0, support.1);
            let cache_prod = Arc::new(CachedSingular::new(product, opts.quad));
            let cache_alpha = Arc::clone(&caches[alpha]);
            let mut c_env: f64 = 0.0;
            for &x in &[5.0, -5.0, 50.0, -50.0, 300.0, -300.0] {
                c_env = c_env
                    .max((cache_prod.p_at(x) + cache_alpha.q_at(x)).norm() * (1.0 + x.abs()));
            }
            for i in 0..=200 {
                let x = -3.0 + 6.0 * i as f64 / 200.0;
                c_env = c_env
                    .max((cache_prod.p_at(x) + cache_alpha.q_at(x)).norm() * (1.0 + x.abs()));
            }
            let c_env = (2.0 * c_env).max(1e-12);
            let handle = FunctionHandle::new(
                move |x| cache_prod.p_at(x) + cache_alpha.q_at(x),
                format!("((Pa*+Q)phi{})_{}", idx, alpha),
            )
            .with_envelope(c_env);
            image_adj.push(handle);
        }
        let num = vector_norm(&image_adj, &q_dual, &opts.quad, opts.root_tol)?;
        let den = vector_norm(phi, &q_dual, &opts.quad, opts.root_tol)?;
        direct_adjoint.push((format!("phi{}", idx), num / den));
    }
    let c_primal = direct_primal.iter().map(|(_, r)| *r).fold(f64::INFINITY, f64::min);
    let c_adjoint = direct_adjoint.iter().map(|(_, r)| *r).fold(f64::INFINITY, f64::min);

    let mut sweep = Vec::new();
    for &t in &opts.half_widths {
        let grid = GridSpec::with_spacing(t, opts.spacing)?;
        let primal = assemble_finite_section(&rep, &grid, SectionKind::CoefPPlusQ)?;
        let adjoint = assemble_finite_section(&rep_adj, &grid, SectionKind::PCoefPlusQ)?;
        sweep.push(AprioriRecord {
            half_width: t,
            points: grid.points,
            sigma_min_primal: sigma_min(&primal)?,
            sigma_min_adjoint: sigma_min(&adjoint)?,
        });
    }
    let stable = |pick: &dyn Fn(&AprioriRecord) -> f64| -> bool {
        let first = pick(&sweep[0]);
        first > 0.0 && sweep.iter().all(|r| pick(r) >= opts.stability_fraction * first)
    };
    let primal_stable = stable(&|r| r.sigma_min_primal);
    let adjoint_stable = stable(&|r| r.sigma_min_adjoint);

    Ok(AprioriReport {
        direct_primal,
        direct_adjoint,
        c_primal,
        c_adjoint,
        sweep,
        primal_stable,
        adjoint_stable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions;
    use crate::symbols::{APPolynomial, TransitionFunction};
    use approx::assert_abs_diff_eq;

    #[test]
    fn translate_round_trip() {
        let f = functions::indicator(0.0, 1.0, Complex64::new(1.0, 0.0));
        let g = translate(&translate(&f, 3.0), -3.0);
        for x in [-0.2, 0.5, 1.3] {
            assert_eq!(f.eval(x), g.eval(x));
        }
        let h0 = translate(&f, 0.0);
        assert_eq!(h0.eval(0.5), f.eval(0.5));
    }

    #[test]
    fn so_uniform_constant_function() {
        let s = so_uniform_check(|_| 2.0, &[1.0, 10.0, 100.0], 2.0, 5.0, 100).unwrap();
        assert!(s.sups.iter().all(|&v| v == 0.0));
        assert!(s.tail_decreasing);
    }

    #[test]
    fn so_uniform_arctan_series() {
        // sup over [-1,1] of |arctan(x+k) - pi/2| = pi/2 - arctan(k-1)
        let shifts: Vec<f64> = (1..=8).map(|k| k as f64).collect();
        let s = so_uniform_check(
            |x: f64| x.atan(),
            &shifts,
            std::f64::consts::FRAC_PI_2,
            1.0,
            20001,
        )
        .unwrap();
        for (k, sup) in shifts.iter().zip(s.sups.iter()) {
            let want = std::f64::consts::FRAC_PI_2 - (k - 1.0).atan();
            assert_abs_diff_eq!(*sup, want, epsilon = 1e-7);
        }
        assert!(s.tail_decreasing);
    }

    #[test]
    fn so_uniform_lerner_along_loglog_shifts() {
        // p(h_k) -> 3 along h_k = exp(exp(k pi))
        let p = exponents::lerner(3.0).unwrap();
        let shifts: Vec<Shift> =
            (1..=6).map(|k| Shift::LogLog(k as f64 * std::f64::consts::PI)).collect();
        let s = so_uniform_check_exponent(&p, &shifts, 3.0, 10.0, 4001).unwrap();
        assert!(s.tail_decreasing, "series {:?}", s.sups);
        assert!(*s.sups.last().unwrap() < 1e-9);
    }

    #[test]
    fn plan_validation() {
        let p = exponents::lerner(3.0).unwrap();
        let good = TranslationPlan {
            exponent: p.clone(),
            shifts: (1..=6)
                .map(|k| {
                    let kf = k as f64;
                    Shift::LogLog(kf * std::f64::consts::PI + 1.0 / (kf * kf))
                })
                .collect(),
            target_q: 3.0,
            direction: Direction::PlusInfinity,
            tolerance: 0.05,
        };
        let values = good.validate().unwrap();
        assert_eq!(values.len(), 6);
        let bad = TranslationPlan {
            exponent: p,
            // p(h_k) oscillates without converging
            shifts: (1..=6)
                .map(|k| Shift::LogLog(k as f64 * std::f64::consts::FRAC_PI_2))
                .collect(),
            target_q: 3.0,
            direction: Direction::PlusInfinity,
            tolerance: 0.05,
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn key_lemma_constant_exponent_is_exact() {
        // constant exponent: translation has no effect on the modular,
        // the measured norms equal the target within root tolerances
        let p = exponents::constant(2.5).unwrap();
        let w = functions::bump(0.0, 1.0, 1.0);
        let plan = TranslationPlan {
            exponent: p,
            shifts: (1..=5).map(|k| Shift::Finite(10.0 * k as f64)).collect(),
            target_q: 2.5,
            direction: Direction::PlusInfinity,
            tolerance: 1e-12,
        };
        let quad = QuadratureSpec::default();
        let w_ks = vec![w.clone(); 5];
        let rep =
            key_lemma_experiment(&plan, &w, &w_ks, &quad, 1e-10, KeyLemmaOptions::default())
                .unwrap();
        let direct = luxemburg_norm(&w, &exponents::constant(2.5).unwrap(), &quad, 1e-10)
            .unwrap();
        assert_abs_diff_eq!(rep.target, direct, epsilon = 2e-10);
        for r in &rep.records {
            assert!(r.deviation <= 2e-10, "deviation {}", r.deviation);
        }
    }

    #[test]
    fn translation_isometry_at_constant_exponent() {
        let p = exponents::constant(3.0).unwrap();
        let quad = QuadratureSpec::default();
        let f = functions::bump(0.0, 1.0, 2.0);
        let base = luxemburg_norm(&f, &p, &quad, 1e-10).unwrap();
        for h in [-7.0, 3.0, 55.0] {
            let g = translate(&f, h);
            let n = luxemburg_norm(&g, &p, &quad, 1e-10).unwrap();
            assert!((n - base).abs() < 1e-8, "h={}: {} vs {}", h, n, base);
        }
    }

    #[test]
    fn key_lemma_lerner_constant_sequence_converges() {
        // shifts t_k = k pi + 1/k^2 give p(h_k) = 3 +- sin(1/k^2) -> 3
        let p = exponents::lerner(3.0).unwrap();
        let w = functions::bump(0.0, 1.0, 1.0);
        let shifts: Vec<Shift> = (1..=6)
            .map(|k| {
                let kf = k as f64;
                Shift::LogLog(kf * std::f64::consts::PI + 1.0 / (kf * kf))
            })
            .collect();
        let plan = TranslationPlan {
            exponent: p,
            shifts,
            target_q: 3.0,
            direction: Direction::PlusInfinity,
            tolerance: 0.05,
        };
        let quad = QuadratureSpec::default();
        let w_ks = vec![w.clone(); 6];
        let rep =
            key_lemma_experiment(&plan, &w, &w_ks, &quad, 1e-10, KeyLemmaOptions::default())
                .unwrap();
        assert!(rep.verdict, "deviations: {:?}", rep.records.iter().map(|r| r.deviation).collect::<Vec<_>>());
        // frozen oracle: ||bump||_3 and the k=1 deviation
        assert_abs_diff_eq!(rep.target, 0.9490729500343587, epsilon = 1e-6);
        assert_abs_diff_eq!(rep.records[0].deviation, 3.165293e-02, epsilon = 1e-5);
    }

    #[test]
    fn tld_supported_function_has_no_tail_or_difference() {
        let p = exponents::constant(2.0).unwrap();
        let w = functions::bump(0.0, 1.0, 1.0);
        let plan = TranslationPlan {
            exponent: p,
            shifts: vec![Shift::Finite(5.0)],
            target_q: 2.0,
            direction: Direction::PlusInfinity,
            tolerance: 1e-12,
        };
        let quad = QuadratureSpec::default();
        let t = tld_decomposition(&w, &w, &plan, 0, 1.0, 3.0, 0.05, &quad).unwrap();
        assert_eq!(t.tail_k, 0.0);
        assert_eq!(t.tail_inf, 0.0);
        assert_eq!(t.difference, 0.0);
        assert!(t.sum() + 1e-12 >= (t.f_k - t.f_inf).abs());
    }

    #[test]
    fn tld_bounds_hold_on_probes() {
        let p = exponents::lerner(3.0).unwrap();
        let w = functions::rational_decay(1.0);
        let plan = TranslationPlan {
            exponent: p,
            shifts: vec![Shift::Finite(20.0), Shift::Finite(1e4)],
            target_q: 3.0 + (20.0_f64.ln().ln()).sin(),
            direction: Direction::PlusInfinity,
            tolerance: 1.0, // loose: this test probes bounds, not convergence
        };
        let quad = QuadratureSpec::default();
        for (k, lambda, radius, delta) in
            [(0usize, 1.0, 2.0, 0.2), (1, 0.7, 3.0, 0.1), (1, 2.0, 4.0, 0.3)]
        {
            let t = tld_decomposition(&w, &w, &plan, k, lambda, radius, delta, &quad).unwrap();
            assert!(t.tail_k <= t.tail_bound, "tail {} > bound {}", t.tail_k, t.tail_bound);
            assert!(t.tail_inf <= t.tail_bound);
            assert!(t.little_k <= t.little_bound_k + 1e-12);
            assert!(t.little_inf <= t.little_bound_inf + 1e-12);
            assert!(t.sum() + 1e-12 >= (t.f_k - t.f_inf).abs());
            assert_eq!(t.sup_difference, 0.0);
        }
        // regime guards
        assert!(tld_decomposition(&w, &w, &plan, 0, 1.0, 0.5, 0.05, &quad).is_err());
        assert!(tld_decomposition(&w, &w, &plan, 0, 0.3, 4.0, 0.2, &quad).is_err());
    }

    #[test]
    fn schedules_solve_their_equations() {
        let (eps, c, lambda, p_minus) = (0.1, 1.3, 0.8, 2.0);
        let r = schedule_radius(eps, c, lambda, p_minus);
        let lhs = (4.0 / (p_minus - 1.0)) * (c / lambda).powf(p_minus) * r.powf(1.0 - p_minus);
        assert_abs_diff_eq!(lhs, eps / 6.0, epsilon = 1e-12);
        let d = schedule_little(eps, lambda, r);
        assert_abs_diff_eq!(10.0 * d * r / lambda, eps / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn limit_symbol_identity_symbol_reproduces_phi() {
        // a_l = a_r = 1: w_m = phi for every m
        let one = APPolynomial::scalar(&[(0.0, Complex64::new(1.0, 0.0))]).unwrap();
        let s = SAPSymbol::pure_ap(one).unwrap();
        let phi = vec![functions::bump(0.0, 1.0, 1.0)];
        let quad = QuadratureSpec { truncation_t: 1e3, abs_tol: 1e-9, max_refinements: 4000 };
        let (w, w_ms) =
            limit_symbol_sequence(&s, &phi, &[2.0, 4.0, 6.0], (0, 0), Direction::PlusInfinity, &quad)
                .unwrap();
        for x in [-2.0, -0.4, 0.0, 0.7, 3.0] {
            let want = phi[0].eval(x);
            assert!((w.eval(x) - want).norm() < 1e-7, "w at {}", x);
            for wm in &w_ms {
                assert!((wm.eval(x) - want).norm() < 1e-7);
            }
        }
    }

    #[test]
    fn limit_symbol_transients_shrink_on_compacts() {
        // scalar symbol with a_r = e^{i pi x}: under h_m = 2m the
        // representative recurs exactly and w_m -> w on compacts
        let a_r = APPolynomial::scalar(&[(std::f64::consts::PI, Complex64::new(1.0, 0.0))])
            .unwrap();
        let a_l = APPolynomial::scalar(&[(0.0, Complex64::new(1.0, 0.0))]).unwrap();
        let s = SAPSymbol::new(
            a_l,
            a_r,
            vec![vec![functions::zero()]],
            TransitionFunction::default(),
        )
        .unwrap();
        let phi = vec![functions::bump(0.0, 1.0, 1.0)];
        let quad = QuadratureSpec { truncation_t: 1e3, abs_tol: 1e-9, max_refinements: 4000 };
        let h: Vec<f64> = vec![2.0, 8.0, 32.0];
        let (w, w_ms) =
            limit_symbol_sequence(&s, &phi, &h, (0, 0), Direction::PlusInfinity, &quad).unwrap();
        let mut last = f64::INFINITY;
        for wm in &w_ms {
            let mut sup: f64 = 0.0;
            for i in 0..=400 {
                let x = -5.0 + 10.0 * i as f64 / 400.0;
                sup = sup.max((wm.eval(x) - w.eval(x)).norm());
            }
            assert!(sup < last, "sup {} !< {}", sup, last);
            last = sup;
        }
        assert!(last < 1e-6);
    }

    #[test]
    fn limit_symbol_requires_translations() {
        let one = APPolynomial::scalar(&[(0.0, Complex64::new(1.0, 0.0))]).unwrap();
        let s = SAPSymbol::pure_ap(one).unwrap();
        let phi = vec![functions::bump(0.0, 1.0, 1.0)];
        let quad = QuadratureSpec::default();
        assert!(limit_symbol_sequence(&s, &phi, &[], (0, 0), Direction::PlusInfinity, &quad)
            .is_err());
    }

    #[test]
    fn subsequence_extraction_converges() {
        // recurrence candidates h = 2m for the exponent family used in
        // the experiments; p(2m) oscillates, the extraction keeps a
        // convergent thread
        let p = exponents::lerner(3.0).unwrap();
        let candidates: Vec<f64> = (1..=3000).map(|m| 2.0 * m as f64).collect();
        let ext = extract_convergent_subsequence(&p, &candidates, 0.02, 10).unwrap();
        assert!(ext.shifts.len() >= 2);
        assert!(ext.shifts.windows(2).all(|w| w[1] > w[0]));
        let devs: Vec<f64> = ext.p_values.iter().map(|v| (v - ext.target_q).abs()).collect();
        assert!(devs.windows(2).all(|w| w[1] <= w[0] + 1e-15), "devs {:?}", devs);
        assert!(*devs.last().unwrap() < 1e-12);
        assert!(devs[0] <= 0.02);
        // the plan built on it validates
        let plan = TranslationPlan {
            exponent: p,
            shifts: ext.shifts.iter().map(|&h| Shift::Finite(h)).collect(),
            target_q: ext.target_q,
            direction: Direction::PlusInfinity,
            tolerance: 0.05,
        };
        plan.validate().unwrap();
    }

    #[test]
    fn apriori_identity_symbol() {
        let one = APPolynomial::scalar(&[(0.0, Complex64::new(1.0, 0.0))]).unwrap();
        let s = SAPSymbol::pure_ap(one).unwrap();
        let test_set = vec![vec![functions::bump(0.0, 1.0, 1.0)]];
        let opts = AprioriOptions {
            q_r: 2.0,
            direction: Direction::PlusInfinity,
            spacing: 0.1,
            half_widths: vec![10.0, 20.0],
            quad: QuadratureSpec { truncation_t: 1e3, abs_tol: 1e-9, max_refinements: 4000 },
            root_tol: 1e-9,
            stability_fraction: 0.5,
        };
        let rep = apriori_estimate_experiment(&s, &test_set, &opts).unwrap();
        assert!((rep.c_primal - 1.0).abs() < 1e-6, "c_primal = {}", rep.c_primal);
        assert!((rep.c_adjoint - 1.0).abs() < 1e-6, "c_adjoint = {}", rep.c_adjoint);
        for r in &rep.sweep {
            assert!((r.sigma_min_primal - 1.0).abs() < 1e-8);
            assert!((r.sigma_min_adjoint - 1.0).abs() < 1e-8);
        }
        assert!(rep.primal_stable && rep.adjoint_stable);
        assert!(apriori_estimate_experiment(&s, &[], &opts).is_err());
    }
}
