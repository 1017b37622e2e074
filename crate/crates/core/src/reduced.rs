//! Exact search dynamics inside the `(2k+1)`-dimensional invariant subspace.
//!
//! Coordinates are taken in the eigenbasis of the unmarked walk, ordered
//! `(ω₀, ω₁⁺, ω₁⁻, …, ω_k⁺, ω_k⁻)`. There the walk is the diagonal phase
//! matrix `D = diag(1, e^{iω₁}, e^{-iω₁}, …)` and the oracle is the real
//! rank-one reflection `I - 2 w wᵀ`, so one search step is `D (I - 2 w wᵀ)`.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use crate::error::{Result, WalkError};
use crate::johnson::GraphParams;
use crate::reports::{Engine, RunReport, RunRow};
use crate::spectral::{eigenphase, projector_weight, run_time};

/// Coordinates of the target vector `|w'⟩` in the eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetCoords {
    pub w: Vec<f64>,
}

impl TargetCoords {
    pub fn new(params: &GraphParams) -> Result<Self> {
        let mut w = Vec::with_capacity(2 * params.k + 1);
        w.push(projector_weight(params, 0)?.sqrt());
        for ell in 1..=params.k {
            let half = (projector_weight(params, ell)? / 2.0).sqrt();
            w.push(half);
            w.push(half);
        }
        Ok(Self { w })
    }

    pub fn norm(&self) -> f64 {
        self.w.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `⟨w'|ψ⟩` with real target coordinates.
    pub fn overlap(&self, state: &ReducedState) -> Complex64 {
        self.w.iter().zip(&state.coords).map(|(w, c)| c * *w).sum()
    }
}

/// State in the eigenbasis coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    pub coords: Vec<Complex64>,
}

impl ReducedState {
    /// The uniform initial state, which is `|ω₀⟩`.
    pub fn initial(k: usize) -> Self {
        let mut coords = vec![Complex64::default(); 2 * k + 1];
        coords[0] = Complex64::new(1.0, 0.0);
        Self { coords }
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// The search step `U' = U R` restricted to the invariant subspace.
#[derive(Debug, Clone)]
pub struct ReducedOperator {
    params: GraphParams,
    /// Diagonal of `D`.
    phases: Vec<Complex64>,
    /// Sub-ulp corrections that make each phase unit-modulus in exact
    /// arithmetic.
    phase_lo: Vec<Complex64>,
    /// Correction to the reflection factor 2 for `‖w‖² ≠ 1`.
    reflect_lo: f64,
    target: TargetCoords,
    step_matrix: DMatrix<Complex64>,
}

impl ReducedOperator {
    pub fn params(&self) -> &GraphParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    pub fn step_matrix(&self) -> &DMatrix<Complex64> {
        &self.step_matrix
    }

    /// Diagonal of the unmarked walk in the eigenbasis.
    pub fn walk_phases(&self) -> &[Complex64] {
        &self.phases
    }

    pub fn target(&self) -> &TargetCoords {
        &self.target
    }

    /// One step, `ψ ← D (ψ - 2 w (wᵀψ))`, in O(k).
    ///
    /// The stored coefficients are unitary only to about 1e-17, which over
    /// 10⁶ steps adds up to a visible norm drift. Each coefficient therefore
    /// carries a correction that enters inside an fma, where it survives the
    /// rounding in expectation.
    pub fn apply(&self, state: &mut ReducedState) {
        let overlap = self.target.overlap(state);
        let g = overlap * 2.0;
        let g_lo = overlap * self.reflect_lo;
        let coeffs = self.target.w.iter().zip(&self.phases).zip(&self.phase_lo);
        for (c, ((&w, ph), lo)) in state.coords.iter_mut().zip(coeffs) {
            let u = c.re + (-g.re).mul_add(w, -g_lo.re * w);
            let v = c.im + (-g.im).mul_add(w, -g_lo.im * w);
            let re = ph.re.mul_add(u, (-ph.im).mul_add(v, lo.re * u - lo.im * v));
            let im = ph.re.mul_add(v, ph.im.mul_add(u, lo.re * v + lo.im * u));
            *c = Complex64::new(re, im);
        }
    }

    /// One step of the unmarked walk `D` alone.
    pub fn apply_walk(&self, state: &mut ReducedState) {
        for (c, &ph) in state.coords.iter_mut().zip(&self.phases) {
            *c *= ph;
        }
    }

    /// `max |(M M^†) - I|`.
    pub fn unitarity_error(&self) -> f64 {
        let m = &self.step_matrix;
        let prod = m * m.adjoint();
        let dim = self.dim();
        (prod - DMatrix::<Complex64>::identity(dim, dim))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Builds the reduced operator, the target coordinates, and the initial state.
pub fn build_reduced(params: &GraphParams) -> Result<(ReducedOperator, TargetCoords, ReducedState)> {
    let k = params.k;
    let dim = 2 * k + 1;
    let mut phases = Vec::with_capacity(dim);
    phases.push(Complex64::new(1.0, 0.0));
    for ell in 1..=k {
        let omega = eigenphase(params, ell)?;
        phases.push(Complex64::from_polar(1.0, omega));
        phases.push(Complex64::from_polar(1.0, -omega));
    }
    let target = TargetCoords::new(params)?;
    let phase_lo = phases
        .iter()
        .map(|p| -*p * (unit_defect(&[p.re, p.im]) / 2.0))
        .collect();
    let reflect_lo = -2.0 * unit_defect(&target.w);

    let w = DVector::from_iterator(dim, target.w.iter().map(|&x| Complex64::new(x, 0.0)));
    let reflection = DMatrix::<Complex64>::identity(dim, dim) - (&w * w.transpose()) * Complex64::new(2.0, 0.0);
    let step_matrix = DMatrix::from_diagonal(&DVector::from_vec(phases.clone())) * reflection;

    let op = ReducedOperator {
        params: *params,
        phases,
        phase_lo,
        reflect_lo,
        target: target.clone(),
        step_matrix,
    };
    Ok((op, target, ReducedState::initial(k)))
}

/// `Σ x² - 1` in double-double arithmetic.
fn unit_defect(xs: &[f64]) -> f64 {
    let (mut hi, mut lo) = (-1.0f64, 0.0f64);
    for &x in xs {
        let p = x * x;
        let e = x.mul_add(x, -p);
        let s = hi + p;
        let bb = s - hi;
        lo += (hi - (s - bb)) + (p - bb) + e;
        hi = s;
    }
    hi + lo
}

/// Applies the search step `t` times.
pub fn evolve(op: &ReducedOperator, state: &ReducedState, t: u64) -> ReducedState {
    let mut s = state.clone();
    for _ in 0..t {
        op.apply(&mut s);
    }
    s
}

/// `|⟨w'|ψ⟩|²`, which equals the probability of measuring the marked vertex.
pub fn success_probability(target: &TargetCoords, state: &ReducedState) -> f64 {
    target.overlap(state).norm_sqr()
}

/// Success probability at `t = 0, 1, …, steps`.
pub fn success_series(op: &ReducedOperator, steps: u64) -> Vec<f64> {
    let mut s = ReducedState::initial(op.params.k);
    let mut out = Vec::with_capacity(steps as usize + 1);
    for t in 0..=steps {
        out.push(success_probability(&op.target, &s));
        if t < steps {
            op.apply(&mut s);
        }
    }
    out
}

/// Principal arguments of the eigenvalues of the step matrix, sorted ascending.
pub fn eigenphases(op: &ReducedOperator) -> Result<Vec<f64>> {
    let schur = Schur::try_new(op.step_matrix.clone(), 1e-15, 10_000)
        .ok_or_else(|| WalkError::Numerical("Schur iteration did not converge".into()))?;
    let values = schur
        .eigenvalues()
        .ok_or_else(|| WalkError::Numerical("Schur form is not triangular".into()))?;
    let mut phases = Vec::with_capacity(values.len());
    for z in values.iter() {
        if (z.norm() - 1.0).abs() > 1e-10 {
            return Err(WalkError::Numerical(format!(
                "eigenvalue {z} of a unitary matrix is off the unit circle"
            )));
        }
        phases.push(z.arg());
    }
    phases.sort_by(f64::total_cmp);
    Ok(phases)
}

/// Time step in `[0, t_max]` maximizing the success probability.
pub fn find_peak(op: &ReducedOperator, target: &TargetCoords, t_max: u64) -> (u64, f64) {
    let mut s = ReducedState::initial(op.params.k);
    let mut best = (0, success_probability(target, &s));
    for t in 1..=t_max {
        op.apply(&mut s);
        let p = success_probability(target, &s);
        if p > best.1 {
            best = (t, p);
        }
    }
    best
}

/// Run report of the reduced engine. The marked vertex is recorded as
/// `{1..k}`; by vertex-transitivity the series does not depend on it.
pub fn evolve_and_record(params: &GraphParams, steps: u64, stride: u64) -> Result<RunReport> {
    if stride == 0 {
        return Err(WalkError::Domain("stride must be positive".into()));
    }
    let (op, target, mut state) = build_reduced(params)?;
    let mut rows = Vec::new();
    for t in 0..=steps {
        if t % stride == 0 || t == steps {
            rows.push(RunRow {
                t,
                p_succ: success_probability(&target, &state),
                p_alt: None,
                norm: state.norm(),
            });
        }
        if t < steps {
            op.apply(&mut state);
        }
    }
    Ok(RunReport::new(
        *params,
        (1..=params.k).collect(),
        Engine::Reduced,
        run_time(params).t_run,
        stride,
        rows,
    ))
}
