//! Closed-form spectral data of `J(n,k)` and the search schedule.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::johnson::{binomial, intersection_numbers, shell_size, GraphParams, IntersectionRow};

/// `floor(pi * 10^50)`; pi lies in `[PI_DIGITS, PI_DIGITS + 1] / 10^50`.
const PI_DIGITS: &str = "314159265358979323846264338327950288419716939937510";
const PI_SCALE_EXP: u32 = 50;

/// Phases below this are treated as numerically zero when picking the
/// smallest positive eigenphase.
pub const PHASE_CUTOFF: f64 = 1e-9;

fn check_ell(params: &GraphParams, ell: usize) -> Result<()> {
    if ell > params.k {
        return Err(WalkError::Domain(format!(
            "spectral index {ell} outside [0, {}]",
            params.k
        )));
    }
    Ok(())
}

/// `λ_ℓ = (k-ℓ)(n-k-ℓ) - ℓ`.
pub fn eigenvalue(params: &GraphParams, ell: usize) -> Result<i64> {
    check_ell(params, ell)?;
    let (n, k, l) = (params.n as i64, params.k as i64, ell as i64);
    Ok((k - l) * (n - k - l) - l)
}

/// `C(n,ℓ) - C(n,ℓ-1)`.
pub fn multiplicity(params: &GraphParams, ell: usize) -> Result<u128> {
    check_ell(params, ell)?;
    let (n, l) = (params.n as u64, ell as u64);
    let hi = binomial(n, l).expect("C(n,l) <= C(n,k) fits");
    let lo = if l == 0 { 0 } else { binomial(n, l - 1).unwrap() };
    Ok(hi - lo)
}

/// The two closed forms of `‖P_ℓ|w⟩‖²`: the multiplicity ratio
/// `(C(n,ℓ)-C(n,ℓ-1))/C(n,k)` and the factorial form
/// `k!(n-k)!(n-2ℓ+1)/(ℓ!(n-ℓ+1)!)`.
pub fn projector_weight_forms(params: &GraphParams, ell: usize) -> Result<(f64, f64)> {
    let mult = multiplicity(params, ell)?;
    let ratio = mult as f64 / params.vertex_count as f64;

    let (n, k, l) = (params.n as f64, params.k, ell);
    // k!/ℓ! times (n-k)!/(n-ℓ+1)! = 1 / prod_{m=n-k+1}^{n-ℓ+1} m
    let mut factorial = (n - 2.0 * l as f64 + 1.0) * ((l + 1)..=k).map(|x| x as f64).product::<f64>();
    for m in (params.n - k + 1)..=(params.n - l + 1) {
        factorial /= m as f64;
    }
    Ok((ratio, factorial))
}

/// `‖P_ℓ|w⟩‖²` from the exact integer ratio.
pub fn projector_weight(params: &GraphParams, ell: usize) -> Result<f64> {
    Ok(projector_weight_forms(params, ell)?.0)
}

/// `ω_ℓ = arccos(λ_ℓ/d)` for `1 <= ℓ <= k`.
pub fn eigenphase(params: &GraphParams, ell: usize) -> Result<f64> {
    check_ell(params, ell)?;
    if ell == 0 {
        return Err(WalkError::Domain(
            "eigenphase undefined for the eigenvalue-1 sector (ell = 0)".into(),
        ));
    }
    let lambda = eigenvalue(params, ell)?;
    let d = params.degree as i64;
    if lambda <= -d {
        return Err(WalkError::Degenerate {
            n: params.n,
            k: params.k,
        });
    }
    Ok((lambda as f64 / d as f64).acos())
}

/// Measurement schedule of the search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// `floor(pi n^(k/2) / (2 sqrt(2 k!)))`.
    pub t_run: u64,
    /// `1/sqrt(n)`.
    pub epsilon: f64,
    /// Leading-order smallest eigenphase of the search operator, `sqrt(2 k!) ε^k`.
    pub target_phase: f64,
}

fn factorial_u128(k: usize) -> u128 {
    (1..=k as u128).product()
}

/// Exact `floor(pi n^(k/2) / (2 sqrt(2 k!)))`.
///
/// `m` is the floor iff `8 k! m^2 <= pi^2 n^k < 8 k! (m+1)^2`. Both sides are
/// compared in integer arithmetic using rational bounds on pi, starting from
/// a floating-point estimate.
fn exact_run_time(n: usize, k: usize) -> u64 {
    let scale = BigUint::from(10u32).pow(2 * PI_SCALE_EXP);
    let pi_lo: BigUint = PI_DIGITS.parse().unwrap();
    let pi_hi = &pi_lo + 1u32;
    let n_pow = BigUint::from(n).pow(k as u32);
    let lower = &pi_lo * &pi_lo * &n_pow; // scaled pi^2 n^k, from below
    let upper = &pi_hi * &pi_hi * &n_pow; // from above
    let eight_fact = BigUint::from(8u32) * BigUint::from(factorial_u128(k));
    let lhs = |m: u64| &eight_fact * BigUint::from(m).pow(2) * &scale;

    let estimate = std::f64::consts::PI * (n as f64).powf(k as f64 / 2.0)
        / (2.0 * (2.0 * factorial_u128(k) as f64).sqrt());
    let mut m = estimate.floor().max(0.0) as u64;
    // Walk m into place; the estimate is off by at most a few units.
    while m > 0 && lhs(m) > lower {
        m -= 1;
    }
    while lhs(m + 1) <= lower {
        m += 1;
    }
    // pi^2 n^k / (8 k!) is irrational, so the bracket cannot straddle m+1.
    debug_assert!(lhs(m + 1) > upper);
    m
}

pub fn run_time(params: &GraphParams) -> Schedule {
    let (n, k) = (params.n, params.k);
    let epsilon = 1.0 / (n as f64).sqrt();
    Schedule {
        t_run: exact_run_time(n, k),
        epsilon,
        target_phase: (2.0 * factorial_u128(k) as f64).sqrt() * epsilon.powi(k as i32),
    }
}

/// One distance class of the spectral table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralRow {
    pub ell: usize,
    pub lambda: i64,
    pub multiplicity: u128,
    /// `‖P_ℓ|w⟩‖²`.
    pub p_sq: f64,
    /// `arccos(λ_ℓ/d)`; absent for `ℓ = 0`.
    pub omega: Option<f64>,
    pub shell_size: u128,
    pub intersection: IntersectionRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralTable {
    pub params: GraphParams,
    pub rows: Vec<SpectralRow>,
}

impl SpectralTable {
    pub fn new(params: &GraphParams) -> Result<Self> {
        let rows = (0..=params.k)
            .map(|ell| {
                Ok(SpectralRow {
                    ell,
                    lambda: eigenvalue(params, ell)?,
                    multiplicity: multiplicity(params, ell)?,
                    p_sq: projector_weight(params, ell)?,
                    omega: if ell == 0 {
                        None
                    } else {
                        Some(eigenphase(params, ell)?)
                    },
                    shell_size: shell_size(params, ell)?,
                    intersection: intersection_numbers(params, ell)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            params: *params,
            rows,
        })
    }
}

/// Comparison of the smallest positive eigenphase against `sqrt(2 k!) ε^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub theta_min: f64,
    pub target_phase: f64,
    pub relative_error: f64,
}

/// Checks the smallest positive eigenphase of the reduced search operator
/// against its leading-order prediction.
pub fn verify_eigenphase_asymptotics(
    params: &GraphParams,
    reduced_phases: &[f64],
) -> Result<PhaseReport> {
    let target_phase = run_time(params).target_phase;
    let theta_min = reduced_phases
        .iter()
        .copied()
        .filter(|&p| p > PHASE_CUTOFF)
        .fold(f64::INFINITY, f64::min);
    if !theta_min.is_finite() {
        return Err(WalkError::Numerical(
            "no positive eigenphase found in the reduced spectrum".into(),
        ));
    }
    Ok(PhaseReport {
        theta_min,
        target_phase,
        relative_error: (theta_min - target_phase).abs() / target_phase,
    })
}
