//! Brute-force dense oracles for small instances.
//!
//! Everything here is built from explicit matrices and vectors: the vertex
//! adjacency matrix, the arc-space walk and search operators, and the
//! invariant-subspace eigenbasis lifted from vertex space. These serve as
//! independent checks of the closed forms in [`spectral`](crate::spectral)
//! and of both simulation engines.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arc_engine::ArcWalk;
use crate::error::{Result, WalkError};
use crate::johnson::{intersection_numbers, one_based, shell_size, GraphParams, JohnsonGraph, VertexId};
use crate::reduced::{build_reduced, success_series};
use crate::reports::SCHEMA_VERSION;
use crate::spectral::{eigenphase, eigenvalue, multiplicity, projector_weight_forms, run_time};

/// Largest vertex count for dense adjacency matrices.
pub const DENSE_VERTEX_CAPACITY: usize = 5000;
/// Largest arc count for dense arc-space operators.
pub const DENSE_ARC_CAPACITY: usize = 4096;

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Explicitly stored square operator. The adjacency matrix and both walk
/// operators have real entries, so storage is real.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    pub matrix: DMatrix<f64>,
}

impl DenseOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `max |Mᵀ M - I|`.
    pub fn unitarity_error(&self) -> f64 {
        let m = &self.matrix;
        let prod = m.transpose() * m;
        max_abs(&(prod - DMatrix::identity(self.dim(), self.dim())))
    }

    /// Product with a complex matrix.
    pub fn apply(&self, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let re = &self.matrix * b.map(|z| z.re);
        let im = &self.matrix * b.map(|z| z.im);
        re.zip_map(&im, Complex64::new)
    }

    pub fn apply_vec(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        let re = &self.matrix * v.map(|z| z.re);
        let im = &self.matrix * v.map(|z| z.im);
        re.zip_map(&im, Complex64::new)
    }
}

fn max_abs<R: nalgebra::Dim, C: nalgebra::Dim, S: nalgebra::RawStorage<f64, R, C>>(
    m: &nalgebra::Matrix<f64, R, C, S>,
) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

fn max_abs_c<R: nalgebra::Dim, C: nalgebra::Dim, S: nalgebra::RawStorage<Complex64, R, C>>(
    m: &nalgebra::Matrix<Complex64, R, C, S>,
) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn dense_graph(params: &GraphParams, limit: usize, what: &'static str, required: u128) -> Result<JohnsonGraph> {
    if required > limit as u128 {
        return Err(WalkError::Capacity {
            what,
            required,
            limit: limit as u128,
        });
    }
    JohnsonGraph::new(*params)
}

/// `A[v][v'] = 1` iff `|v ∩ v'| = k - 1`.
pub fn dense_adjacency(params: &GraphParams) -> Result<DenseOperator> {
    let g = dense_graph(params, DENSE_VERTEX_CAPACITY, "dense adjacency matrix", params.vertex_count)?;
    let n = g.vertex_count();
    let subsets: Vec<Vec<usize>> = (0..n).map(|v| g.unrank(v).unwrap()).collect();
    let mut matrix = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if crate::johnson::subset_distance(&subsets[i], &subsets[j]) == 1 {
                matrix[(i, j)] = 1.0;
            }
        }
    }
    Ok(DenseOperator { matrix })
}

/// Dense `U` (or `U' = U R` with the oracle) built from the closed form
/// `U|a⟩ = Σ_{head(b) = tail(a)} (2/d - δ_{ā,b}) |b⟩`.
pub fn dense_step(params: &GraphParams, marked: VertexId, with_oracle: bool) -> Result<DenseOperator> {
    let required = params.arc_count().unwrap_or(u128::MAX);
    let g = dense_graph(params, DENSE_ARC_CAPACITY, "dense arc-space operator", required)?;
    if marked >= g.vertex_count() {
        return Err(WalkError::Domain(format!("marked vertex {marked} out of range")));
    }
    let m = g.arc_count();
    let d = params.degree;
    let opposite = g.opposite_table();
    let coin = 2.0 / d as f64;
    let mut u = DMatrix::zeros(m, m);
    for a in 0..m {
        let tail = a / d;
        // Arcs with head = tail(a) are the opposites of the arcs leaving tail(a).
        for s in 0..d {
            let b = opposite[tail * d + s] as usize;
            u[(b, a)] = coin;
        }
        u[(opposite[a] as usize, a)] -= 1.0;
    }
    if with_oracle {
        // U R = U - 2 (U w') w'ᵀ
        let mut w = DVector::zeros(m);
        w.rows_mut(marked * d, d).fill(1.0 / (d as f64).sqrt());
        let uw = &u * &w;
        u -= (uw * w.transpose()) * 2.0;
    }
    Ok(DenseOperator { matrix: u })
}

/// One group of numerically equal eigenvalues of the adjacency matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenCluster {
    pub value: f64,
    pub multiplicity: usize,
    /// `⟨w|P|w⟩` for the cluster's eigenprojector.
    pub weight: f64,
}

/// Eigenvalue clusters of a symmetric matrix in descending order, with the
/// projector weight on basis vector `w`.
pub fn adjacency_spectrum(adjacency: &DenseOperator, w: VertexId) -> Vec<EigenCluster> {
    let eig = SymmetricEigen::new(adjacency.matrix.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let mut clusters: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in order {
        let value = eig.eigenvalues[i];
        let weight = eig.eigenvectors[(w, i)].powi(2);
        match clusters.last_mut() {
            Some((vals, wsum)) if (vals[0] - value).abs() < 1e-6 => {
                vals.push(value);
                *wsum += weight;
            }
            _ => clusters.push((vec![value], weight)),
        }
    }
    clusters
        .into_iter()
        .map(|(vals, weight)| EigenCluster {
            value: vals.iter().sum::<f64>() / vals.len() as f64,
            multiplicity: vals.len(),
            weight,
        })
        .collect()
}

/// Explicit arc-space construction of the invariant subspace.
#[derive(Debug, Clone)]
pub struct InvariantBasis {
    pub params: GraphParams,
    pub marked: VertexId,
    /// Distance class of every vertex relative to the marked one.
    pub distance: Vec<usize>,
    /// Unnormalized shell indicators `|ν_ℓ⟩` in vertex space.
    pub shells: Vec<DVector<f64>>,
    /// `P_ℓ|w⟩` in vertex space.
    pub projections: Vec<DVector<f64>>,
    /// `|a_ℓ⟩, |b_ℓ⟩, |c_ℓ⟩` in arc space.
    pub a_vecs: Vec<DVector<f64>>,
    pub b_vecs: Vec<DVector<f64>>,
    pub c_vecs: Vec<DVector<f64>>,
    /// `S P_ℓ|w⟩` and `T P_ℓ|w⟩`.
    pub s_lifts: Vec<DVector<f64>>,
    pub t_lifts: Vec<DVector<f64>>,
    /// Columns `|ω₀⟩, |ω₁⁺⟩, |ω₁⁻⟩, …, |ω_k⁺⟩, |ω_k⁻⟩`.
    pub columns: DMatrix<Complex64>,
    /// Eigenvalue of the unmarked walk for each column.
    pub eigenvalues: Vec<Complex64>,
    heads: Vec<u32>,
}

impl InvariantBasis {
    pub fn dim(&self) -> usize {
        self.columns.ncols()
    }

    /// Lift `x ↦ S x`, `(S x)(a) = (x(tail a) + x(head a)) / √2`.
    pub fn lift_s(&self, x: &DVector<f64>) -> DVector<f64> {
        lift(&self.heads, self.params.degree, x, 1.0)
    }

    /// Lift `x ↦ T x`, `(T x)(a) = (x(tail a) - x(head a)) / √2`.
    pub fn lift_t(&self, x: &DVector<f64>) -> DVector<f64> {
        lift(&self.heads, self.params.degree, x, -1.0)
    }

    /// `|w'⟩` from its definition: uniform over the arcs leaving `w`.
    pub fn target_vector(&self) -> DVector<f64> {
        let d = self.params.degree;
        let mut v = DVector::zeros(self.heads.len());
        v.rows_mut(self.marked * d, d).fill(1.0 / (d as f64).sqrt());
        v
    }

    pub fn initial_vector(&self) -> DVector<f64> {
        let m = self.heads.len();
        DVector::from_element(m, 1.0 / (m as f64).sqrt())
    }
}

fn lift(heads: &[u32], d: usize, x: &DVector<f64>, sign: f64) -> DVector<f64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    DVector::from_iterator(
        heads.len(),
        heads
            .iter()
            .enumerate()
            .map(|(a, &h)| (x[a / d] + sign * x[h as usize]) * r),
    )
}

fn to_complex(v: &DVector<f64>) -> DVector<Complex64> {
    v.map(|x| Complex64::new(x, 0.0))
}

/// `P_ℓ|w⟩` for every ℓ from the symmetric tridiagonal quotient of `A` on
/// the normalized shells, with eigenvalues assigned to the closed-form
/// `λ_ℓ` by nearest integer.
pub fn shell_projections(params: &GraphParams, shells: &[DVector<f64>]) -> Result<Vec<DVector<f64>>> {
    let k = params.k;
    let sizes: Vec<f64> = (0..=k).map(|l| shell_size(params, l).map(|s| s as f64)).collect::<Result<_>>()?;
    let mut quotient = DMatrix::zeros(k + 1, k + 1);
    for l in 0..=k {
        let row = intersection_numbers(params, l)?;
        quotient[(l, l)] = row.a as f64;
        if l < k {
            let next = intersection_numbers(params, l + 1)?;
            let off = ((row.b * next.c) as f64).sqrt();
            quotient[(l, l + 1)] = off;
            quotient[(l + 1, l)] = off;
        }
    }
    let eig = SymmetricEigen::new(quotient);
    let mut out = vec![None; k + 1];
    for (j, &value) in eig.eigenvalues.iter().enumerate() {
        let nearest = value.round() as i64;
        let ell = (0..=k)
            .find(|&l| eigenvalue(params, l).ok() == Some(nearest))
            .filter(|_| (value - nearest as f64).abs() < 1e-9)
            .ok_or_else(|| {
                WalkError::Numerical(format!("quotient eigenvalue {value} matches no closed-form eigenvalue"))
            })?;
        let phi = eig.eigenvectors.column(j);
        let mut p = DVector::zeros(shells[0].len());
        for m in 0..=k {
            p += &shells[m] * (phi[m] * phi[0] / sizes[m].sqrt());
        }
        if out[ell].replace(p).is_some() {
            return Err(WalkError::Numerical(format!("eigenvalue {nearest} assigned twice")));
        }
    }
    Ok(out.into_iter().map(Option::unwrap).collect())
}

/// Builds the invariant subspace and its orthonormal eigenbasis explicitly.
pub fn build_invariant_basis(params: &GraphParams, marked: VertexId) -> Result<InvariantBasis> {
    let required = params.arc_count().unwrap_or(u128::MAX);
    let g = dense_graph(params, DENSE_ARC_CAPACITY, "explicit invariant basis", required)?;
    let (k, d) = (params.k, params.degree);
    let distance = g.distance_classes(marked)?;
    let heads = g.head_table();
    let nv = g.vertex_count();
    let m = g.arc_count();

    let shells: Vec<DVector<f64>> = (0..=k)
        .map(|l| DVector::from_iterator(nv, distance.iter().map(|&x| if x == l { 1.0 } else { 0.0 })))
        .collect();

    let (mut a_vecs, mut b_vecs, mut c_vecs) = (
        vec![DVector::zeros(m); k + 1],
        vec![DVector::zeros(m); k + 1],
        vec![DVector::zeros(m); k + 1],
    );
    for arc in 0..m {
        let lt = distance[arc / d];
        let lh = distance[heads[arc] as usize];
        let target = match lh as isize - lt as isize {
            0 => &mut a_vecs,
            1 => &mut b_vecs,
            -1 => &mut c_vecs,
            _ => unreachable!("adjacent vertices differ by at most one shell"),
        };
        target[lt][arc] = 1.0;
    }

    let projections = shell_projections(params, &shells)?;
    let mut basis = InvariantBasis {
        params: *params,
        marked,
        distance,
        shells,
        projections,
        a_vecs,
        b_vecs,
        c_vecs,
        s_lifts: Vec::new(),
        t_lifts: Vec::new(),
        columns: DMatrix::zeros(m, 2 * k + 1),
        eigenvalues: Vec::with_capacity(2 * k + 1),
        heads,
    };
    basis.s_lifts = basis.projections.iter().map(|p| basis.lift_s(p)).collect();
    basis.t_lifts = basis.projections.iter().map(|p| basis.lift_t(p)).collect();

    let df = d as f64;
    let p0 = basis.projections[0].norm();
    let omega0 = to_complex(&basis.s_lifts[0]) / Complex64::new((2.0 * df).sqrt() * p0, 0.0);
    basis.columns.set_column(0, &omega0);
    basis.eigenvalues.push(Complex64::new(1.0, 0.0));

    let i = Complex64::i();
    for ell in 1..=k {
        let lambda = eigenvalue(params, ell)? as f64;
        let omega = eigenphase(params, ell)?;
        let p_norm = basis.projections[ell].norm();
        let s = to_complex(&basis.s_lifts[ell]);
        let t = to_complex(&basis.t_lifts[ell]);
        for (col, sign) in [(2 * ell - 1, 1.0), (2 * ell, -1.0)] {
            let e = Complex64::from_polar(1.0, -sign * omega);
            let scale = i * sign * df.sqrt() / (2.0 * (df * df - lambda * lambda).sqrt() * p_norm);
            let v = (&s * (e - 1.0) + &t * (e + 1.0)) * scale;
            basis.columns.set_column(col, &v);
            basis.eigenvalues.push(Complex64::from_polar(1.0, sign * omega));
        }
    }
    Ok(basis)
}

/// Residuals of the explicit eigenbasis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisReport {
    /// `max |BᴴB - I|`.
    pub gram_error: f64,
    /// `max ‖U b - μ b‖` over basis columns.
    pub eigen_residual: f64,
    /// `max | ‖S P_ℓ w‖² - (d+λ_ℓ)‖P_ℓ w‖² |` and the analogous `T` identity.
    pub lift_norm_error: f64,
    /// `‖T P₀|w⟩‖`.
    pub t_p0_norm: f64,
}

pub fn basis_report(basis: &InvariantBasis, walk: &DenseOperator) -> Result<BasisReport> {
    let b = &basis.columns;
    let dim = basis.dim();
    let gram_error = max_abs_c(&(b.adjoint() * b - DMatrix::<Complex64>::identity(dim, dim)));
    let ub = walk.apply(b);
    let eigen_residual = (0..dim)
        .map(|j| (ub.column(j) - b.column(j) * basis.eigenvalues[j]).norm())
        .fold(0.0, f64::max);
    let d = basis.params.degree as f64;
    let mut lift_norm_error: f64 = 0.0;
    for ell in 0..=basis.params.k {
        let lambda = eigenvalue(&basis.params, ell)? as f64;
        let p_sq = basis.projections[ell].norm_squared();
        lift_norm_error = lift_norm_error
            .max((basis.s_lifts[ell].norm_squared() - (d + lambda) * p_sq).abs())
            .max((basis.t_lifts[ell].norm_squared() - (d - lambda) * p_sq).abs());
    }
    Ok(BasisReport {
        gram_error,
        eigen_residual,
        lift_norm_error,
        t_p0_norm: basis.t_lifts[0].norm(),
    })
}

/// Invariance of the subspace under the search operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    /// `max |(I - B Bᴴ) U' B|`.
    pub residual: f64,
    /// `max |Bᴴ U' B - M|` against the reduced step matrix.
    pub compression_error: f64,
    /// Error of the two oracle identities on `a₀+b₀+c₀` and `b₀-c₁`.
    pub oracle_identity_error: f64,
}

pub fn invariance_report(basis: &InvariantBasis, search: &DenseOperator) -> Result<InvarianceReport> {
    let b = &basis.columns;
    let ub = search.apply(b);
    let projected = b * (b.adjoint() * &ub);
    let residual = max_abs_c(&(&ub - projected));
    let (reduced, _, _) = build_reduced(&basis.params)?;
    let compression_error = max_abs_c(&(b.adjoint() * &ub - reduced.step_matrix()));

    // R = I - 2|w'⟩⟨w'|, applied directly.
    let w = basis.target_vector();
    let reflect = |v: &DVector<f64>| v - &w * (2.0 * w.dot(v));
    let sum0 = &basis.a_vecs[0] + &basis.b_vecs[0] + &basis.c_vecs[0];
    let first = max_abs(&(reflect(&sum0) + &sum0));
    let diff = &basis.b_vecs[0] - &basis.c_vecs[1];
    let second = max_abs(&(reflect(&diff) - (&diff - &sum0 * 2.0)));
    Ok(InvarianceReport {
        residual,
        compression_error,
        oracle_identity_error: first.max(second),
    })
}

/// Target and initial state in eigenbasis coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetReport {
    /// `max | |w'⟩ - |b₀⟩/√d |`.
    pub target_vs_b0: f64,
    /// `max |Bᴴ|w'⟩ - w|` against the closed-form target coordinates.
    pub target_coords_error: f64,
    /// `max |Bᴴ|ψ(0)⟩ - e₀|`.
    pub initial_coords_error: f64,
    /// `‖(I - B Bᴴ)|ψ(0)⟩‖`.
    pub initial_outside_norm: f64,
    /// `|⟨w'|ψ(0)⟩ - 1/√N|`.
    pub initial_overlap_error: f64,
}

pub fn target_report(basis: &InvariantBasis) -> Result<TargetReport> {
    let b = &basis.columns;
    let d = basis.params.degree as f64;
    let w = basis.target_vector();
    let target_vs_b0 = max_abs(&(&w - &basis.b_vecs[0] / d.sqrt()));
    let (_, coords, _) = build_reduced(&basis.params)?;
    let proj = b.adjoint() * to_complex(&w);
    let target_coords_error = proj
        .iter()
        .zip(&coords.w)
        .map(|(z, &x)| (z - x).norm())
        .fold(0.0, f64::max);
    let psi0 = to_complex(&basis.initial_vector());
    let init = b.adjoint() * &psi0;
    let initial_coords_error = init
        .iter()
        .enumerate()
        .map(|(j, z)| (z - if j == 0 { 1.0 } else { 0.0 }).norm())
        .fold(0.0, f64::max);
    let initial_outside_norm = (&psi0 - b * &init).norm();
    let n = basis.params.vertex_count as f64;
    let initial_overlap_error = (w.dot(&basis.initial_vector()) - 1.0 / n.sqrt()).abs();
    Ok(TargetReport {
        target_vs_b0,
        target_coords_error,
        initial_coords_error,
        initial_outside_norm,
        initial_overlap_error,
    })
}

fn fail_if(name: &str, value: f64, tol: f64) -> Result<()> {
    if value > tol || value.is_nan() {
        return Err(WalkError::Certification(format!("{name} = {value:e} exceeds {tol:e}")));
    }
    Ok(())
}

/// Builds the dense search operator and basis and checks invariance.
pub fn verify_subspace_invariance(params: &GraphParams, marked: VertexId, tol: f64) -> Result<InvarianceReport> {
    let basis = build_invariant_basis(params, marked)?;
    let search = dense_step(params, marked, true)?;
    let r = invariance_report(&basis, &search)?;
    fail_if("subspace invariance residual", r.residual, tol)?;
    fail_if("compression vs reduced step matrix", r.compression_error, tol)?;
    fail_if("oracle identities", r.oracle_identity_error, tol)?;
    Ok(r)
}

pub fn verify_target_and_initial(params: &GraphParams, marked: VertexId, tol: f64) -> Result<TargetReport> {
    let basis = build_invariant_basis(params, marked)?;
    let r = target_report(&basis)?;
    fail_if("target equals b0/sqrt(d)", r.target_vs_b0, tol)?;
    fail_if("target coordinates", r.target_coords_error, tol)?;
    fail_if("initial coordinates", r.initial_coords_error, tol)?;
    fail_if("initial state outside subspace", r.initial_outside_norm, tol)?;
    Ok(r)
}

/// One named check of a certification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema_version: u32,
    pub params: GraphParams,
    pub marked: Vec<usize>,
    pub tolerance: f64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl Certificate {
    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// Runs every dense certification on `J(n,k)` with the marked vertex `{1..k}`.
pub fn certify(params: &GraphParams, tol: f64) -> Result<Certificate> {
    let required = params.arc_count().unwrap_or(u128::MAX);
    let g = dense_graph(params, DENSE_ARC_CAPACITY, "dense certification", required)?;
    let marked = g.rank(&(0..params.k).collect::<Vec<_>>())?;
    let mut checks = Vec::new();
    let mut push = |name: &str, value: f64| {
        checks.push(Check {
            name: name.to_string(),
            value,
            tolerance: tol,
            passed: value <= tol,
        })
    };

    // Closed-form spectrum against the dense adjacency matrix.
    let adjacency = dense_adjacency(params)?;
    let clusters = adjacency_spectrum(&adjacency, marked);
    let mut eig_err = if clusters.len() == params.k + 1 { 0.0 } else { f64::INFINITY };
    let mut mult_err = 0.0;
    let mut weight_err: f64 = 0.0;
    for (ell, c) in clusters.iter().enumerate().take(params.k + 1) {
        eig_err = f64::max(eig_err, (c.value - eigenvalue(params, ell)? as f64).abs());
        if c.multiplicity as u128 != multiplicity(params, ell)? {
            mult_err += 1.0;
        }
        let (w1, w2) = projector_weight_forms(params, ell)?;
        weight_err = weight_err.max((c.weight - w1).abs()).max((c.weight - w2).abs());
    }
    push("adjacency eigenvalues vs closed form", eig_err);
    push("adjacency multiplicity mismatches", mult_err);
    push("projector weights vs closed forms", weight_err);

    let basis = build_invariant_basis(params, marked)?;
    // A|ν_ℓ⟩ = c_{ℓ+1}|ν_{ℓ+1}⟩ + a_ℓ|ν_ℓ⟩ + b_{ℓ-1}|ν_{ℓ-1}⟩, exact in integers.
    let mut action_err: f64 = 0.0;
    for ell in 0..=params.k {
        let lhs = &adjacency.matrix * &basis.shells[ell];
        let mut rhs = &basis.shells[ell] * intersection_numbers(params, ell)?.a as f64;
        if ell < params.k {
            rhs += &basis.shells[ell + 1] * intersection_numbers(params, ell + 1)?.c as f64;
        }
        if ell > 0 {
            rhs += &basis.shells[ell - 1] * intersection_numbers(params, ell - 1)?.b as f64;
        }
        action_err = action_err.max(max_abs(&(lhs - rhs)));
    }
    push("adjacency action on shells", action_err);

    let walk = dense_step(params, marked, false)?;
    let search = dense_step(params, marked, true)?;
    push("dense search operator unitarity", search.unitarity_error());

    // Matrix-free engine against the dense operator, column by column.
    let mut engine = ArcWalk::new(*params)?;
    let mut engine_err: f64 = 0.0;
    for a in 0..search.dim() {
        let mut s = engine.basis_state(a);
        engine.step(&mut s, marked, true);
        for (b, z) in s.amplitudes.iter().enumerate() {
            engine_err = engine_err.max((z - search.matrix[(b, a)]).norm());
        }
    }
    push("arc engine vs dense search operator", engine_err);

    let br = basis_report(&basis, &walk)?;
    push("eigenbasis gram error", br.gram_error);
    push("eigenbasis eigenrelation residual", br.eigen_residual);
    push("lift squared-norm identities", br.lift_norm_error);
    push("T P0 w norm", br.t_p0_norm);

    let ir = invariance_report(&basis, &search)?;
    push("subspace invariance residual", ir.residual);
    push("compression vs reduced step matrix", ir.compression_error);
    push("oracle identities", ir.oracle_identity_error);

    let tr = target_report(&basis)?;
    push("target equals b0/sqrt(d)", tr.target_vs_b0);
    push("target coordinates", tr.target_coords_error);
    push("initial coordinates", tr.initial_coords_error);
    push("initial state outside subspace", tr.initial_outside_norm);

    // Full against reduced engine over two run times.
    let steps = 2 * run_time(params).t_run;
    let (reduced, _, _) = build_reduced(params)?;
    let series = success_series(&reduced, steps);
    let mut state = engine.uniform_state();
    let mut cross_err: f64 = 0.0;
    for p in &series {
        cross_err = cross_err.max((engine.vertex_probability(&state, marked) - p).abs());
        engine.step(&mut state, marked, true);
    }
    push("full vs reduced success series", cross_err);

    let passed = checks.iter().all(|c| c.passed);
    Ok(Certificate {
        schema_version: SCHEMA_VERSION,
        params: *params,
        marked: one_based(&g.unrank(marked)?),
        tolerance: tol,
        passed,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: usize, k: usize) -> GraphParams {
        GraphParams::new(n, k).unwrap()
    }

    #[test]
    fn octahedron() {
        let a = dense_adjacency(&p(4, 2)).unwrap();
        assert_eq!(a.dim(), 6);
        assert!(a.matrix.row_iter().all(|r| r.sum() == 4.0));
        assert_eq!(a.matrix.trace(), 0.0);
        assert_eq!(a.matrix, a.matrix.transpose());
        let clusters = adjacency_spectrum(&a, 0);
        let got: Vec<(i64, usize)> = clusters.iter().map(|c| (c.value.round() as i64, c.multiplicity)).collect();
        assert_eq!(got, vec![(4, 1), (0, 3), (-2, 2)]);
        let weights: Vec<f64> = clusters.iter().map(|c| c.weight).collect();
        for (w, e) in weights.iter().zip([1.0 / 6.0, 0.5, 1.0 / 3.0]) {
            assert!((w - e).abs() < 1e-12);
        }
    }

    #[test]
    fn j62_dense_spectrum() {
        let a = dense_adjacency(&p(6, 2)).unwrap();
        let clusters = adjacency_spectrum(&a, 0);
        let got: Vec<(i64, usize)> = clusters.iter().map(|c| (c.value.round() as i64, c.multiplicity)).collect();
        assert_eq!(got, vec![(8, 1), (2, 5), (-2, 9)]);
        for (c, e) in clusters.iter().zip([1.0 / 15.0, 1.0 / 3.0, 0.6]) {
            assert!((c.weight - e).abs() < 1e-12);
        }
    }

    #[test]
    fn dense_step_matches_closed_form_and_is_unitary() {
        let q = p(4, 2);
        let u = dense_step(&q, 0, false).unwrap();
        assert_eq!(u.dim(), 24);
        let g = JohnsonGraph::new(q).unwrap();
        let heads = g.head_table();
        let opp = g.opposite_table();
        for a in 0..24 {
            for b in 0..24 {
                let expect = if heads[b] as usize == a / 4 {
                    0.5 - if opp[a] as usize == b { 1.0 } else { 0.0 }
                } else {
                    0.0
                };
                assert_eq!(u.matrix[(b, a)], expect);
            }
        }
        let u5 = dense_step(&p(5, 2), 3, true).unwrap();
        assert!(u5.unitarity_error() <= 1e-13);
        let det = dense_step(&q, 0, true).unwrap().matrix.determinant();
        assert!((det.abs() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn capacity_limits() {
        assert!(matches!(dense_step(&p(30, 3), 0, true), Err(WalkError::Capacity { .. })));
        assert!(matches!(certify(&p(30, 3), 1e-10), Err(WalkError::Capacity { .. })));
        assert!(matches!(dense_adjacency(&p(20, 10)), Err(WalkError::Capacity { .. })));
    }

    #[test]
    fn lift_identities() {
        let q = p(6, 2);
        let basis = build_invariant_basis(&q, 0).unwrap();
        let walk = dense_step(&q, 0, false).unwrap();
        let r = basis_report(&basis, &walk).unwrap();
        assert!(r.t_p0_norm < 1e-12);
        assert!(r.lift_norm_error < 1e-10);
        assert!(r.gram_error < 1e-10);
        assert!(r.eigen_residual < 1e-10);
    }

    #[test]
    fn j42_basis_and_coordinates() {
        let q = p(4, 2);
        let basis = build_invariant_basis(&q, 0).unwrap();
        assert_eq!(basis.dim(), 5);
        let w = to_complex(&basis.target_vector());
        let coords = basis.columns.adjoint() * w;
        let expect = [1.0 / 6.0, 0.25, 0.25, 1.0 / 6.0, 1.0 / 6.0].map(f64::sqrt);
        for (z, e) in coords.iter().zip(expect) {
            assert!((z - e).norm() < 1e-10, "{z} vs {e}");
        }
        let r = target_report(&basis).unwrap();
        assert!(r.initial_overlap_error < 1e-12);
        assert!(r.initial_outside_norm < 1e-12);
        assert_eq!(r.target_vs_b0, 0.0);
    }

    #[test]
    fn invariance_named_instances() {
        let r = verify_subspace_invariance(&p(4, 2), 0, 1e-12).unwrap();
        assert!(r.compression_error < 1e-10);
        assert!(r.oracle_identity_error < 1e-14);
        verify_subspace_invariance(&p(6, 2), 7, 1e-11).unwrap();
        verify_target_and_initial(&p(6, 3), 4, 1e-10).unwrap();
    }

    #[test]
    fn certificate_passes_and_fails_by_tolerance() {
        let c = certify(&p(4, 2), DEFAULT_TOLERANCE).unwrap();
        assert!(c.passed, "{:?}", c.failed_checks().collect::<Vec<_>>());
        assert_eq!(c.marked, vec![1, 2]);
        let c = certify(&p(6, 2), 1e-30).unwrap();
        assert!(!c.passed);
    }
}
