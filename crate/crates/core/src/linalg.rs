//! Dense complex kernel for the small Hilbert spaces used throughout the crate.
//!
//! Vectors are plain amplitude lists in the computational basis. Bipartite
//! vectors are laid out row-major with Alice's subsystem first, so amplitude
//! `i * d_b + j` belongs to `|i⟩ ⊗ |j⟩`.
//!
//! The Hermitian eigensolver is a cyclic complex Jacobi iteration. It is slow
//! compared to a Householder/QR pipeline but unconditionally stable and
//! bit-reproducible, which is what matters at dimension ≤ 36.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;
use thiserror::Error;

pub type ComplexScalar = Complex64;

/// Largest vector dimension `tensor` will produce unless told otherwise.
pub const DEFAULT_CAPACITY: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {dim} exceeds capacity {cap}")]
    Capacity { dim: usize, cap: usize },

    #[error("operator is not Hermitian (deviation {deviation:e} > {tolerance:e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("non-finite amplitude at index {0}")]
    NonFinite(usize),

    #[error("vector has zero norm")]
    ZeroNorm,

    #[error("empty vector")]
    Empty,
}

pub type LinalgResult<T> = Result<T, LinalgError>;

/// Numeric tolerances used by validation and the eigensolver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub normalization: f64,
    pub hermiticity: f64,
    pub eigen_residual: f64,
    /// Jacobi stops once the off-diagonal Frobenius norm drops below
    /// `jacobi_offdiag * max(1, ‖H‖_F)`.
    pub jacobi_offdiag: f64,
    pub max_sweeps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            normalization: 1e-10,
            hermiticity: 1e-12,
            eigen_residual: 1e-8,
            jacobi_offdiag: 1e-12,
            max_sweeps: 100,
        }
    }
}

/// A vector of complex amplitudes in the computational basis.
///
/// Constructors only check finiteness; call [`StateVector::normalized`] to
/// obtain a unit vector.
#[derive(Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<ComplexScalar>,
}

impl StateVector {
    pub fn new(amps: Vec<ComplexScalar>) -> LinalgResult<Self> {
        if amps.is_empty() {
            return Err(LinalgError::Empty);
        }
        if let Some(i) = amps
            .iter()
            .position(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(LinalgError::NonFinite(i));
        }
        Ok(Self { amps })
    }

    pub fn from_real(amps: &[f64]) -> LinalgResult<Self> {
        Self::new(amps.iter().map(|&x| ComplexScalar::new(x, 0.0)).collect())
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(
            index < dim,
            "basis index {index} out of range for dim {dim}"
        );
        let mut amps = vec![ComplexScalar::new(0.0, 0.0); dim];
        amps[index] = ComplexScalar::new(1.0, 0.0);
        Self { amps }
    }

    /// Haar-random unit vector, drawn from i.i.d. complex Gaussians.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        loop {
            let amps = (0..dim)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    ComplexScalar::new(re, im)
                })
                .collect();
            if let Ok(v) = (Self { amps }).normalized() {
                return v;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[ComplexScalar] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<ComplexScalar> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> LinalgResult<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(LinalgError::ZeroNorm);
        }
        Ok(self.scaled(ComplexScalar::new(1.0 / n, 0.0)))
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub fn scaled(&self, c: ComplexScalar) -> Self {
        Self {
            amps: self.amps.iter().map(|a| a * c).collect(),
        }
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, c: ComplexScalar, other: &Self) -> LinalgResult<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self {
            amps: self
                .amps
                .iter()
                .zip(&other.amps)
                .map(|(a, b)| a + c * b)
                .collect(),
        })
    }

    /// Same ray, with the first amplitude of modulus above `1e-12` made real
    /// and non-negative.
    pub fn canonical_phase(&self) -> Self {
        match self.amps.iter().find(|a| a.norm() > 1e-12) {
            Some(lead) => self.scaled(lead.conj() / lead.norm()),
            None => self.clone(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("amplitudes are finite")
    }
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.amps.iter().map(|a| (a.re, a.im)))
            .finish()
    }
}

/// Serialized as an array of `[re, im]` pairs.
impl Serialize for StateVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.amps.len()))?;
        for a in &self.amps {
            seq.serialize_element(&[a.re, a.im])?;
        }
        seq.end()
    }
}

fn check_dims(expected: usize, found: usize) -> LinalgResult<()> {
    if expected != found {
        return Err(LinalgError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `⟨u|v⟩`, antilinear in `u`.
pub fn inner(u: &StateVector, v: &StateVector) -> LinalgResult<ComplexScalar> {
    check_dims(u.dim(), v.dim())?;
    Ok(u.amps.iter().zip(&v.amps).map(|(a, b)| a.conj() * b).sum())
}

/// Phase-invariant overlap `|⟨u|v⟩|²`.
pub fn fidelity(u: &StateVector, v: &StateVector) -> LinalgResult<f64> {
    Ok(inner(u, v)?.norm_sqr())
}

pub fn tensor(u: &StateVector, v: &StateVector) -> LinalgResult<StateVector> {
    tensor_with_cap(u, v, DEFAULT_CAPACITY)
}

/// `u ⊗ v` with `u` varying slowest.
pub fn tensor_with_cap(u: &StateVector, v: &StateVector, cap: usize) -> LinalgResult<StateVector> {
    let dim = u.dim().checked_mul(v.dim()).ok_or(LinalgError::Capacity {
        dim: usize::MAX,
        cap,
    })?;
    if dim > cap {
        return Err(LinalgError::Capacity { dim, cap });
    }
    let amps = u
        .amps
        .iter()
        .flat_map(|a| v.amps.iter().map(move |b| a * b))
        .collect();
    Ok(StateVector { amps })
}

pub fn conj_in_computational(v: &StateVector) -> StateVector {
    StateVector {
        amps: v.amps.iter().map(|a| a.conj()).collect(),
    }
}

/// Contracts Alice's factor of a bipartite vector with `alice`, returning the
/// unnormalized Bob vector `(⟨alice| ⊗ I)|state⟩`.
pub fn contract_alice(state: &StateVector, alice: &StateVector) -> LinalgResult<StateVector> {
    let da = alice.dim();
    if !state.dim().is_multiple_of(da) {
        return Err(LinalgError::DimensionMismatch {
            expected: da * (state.dim() / da).max(1),
            found: state.dim(),
        });
    }
    let db = state.dim() / da;
    let mut amps = vec![ComplexScalar::new(0.0, 0.0); db];
    for (i, a) in alice.amps.iter().enumerate() {
        let ac = a.conj();
        for (j, slot) in amps.iter_mut().enumerate() {
            *slot += ac * state.amps[i * db + j];
        }
    }
    Ok(StateVector { amps })
}

/// `|⟨effect_a ⊗ outcome_b|state⟩|²`.
pub fn born_joint(
    state: &StateVector,
    effect_a: &StateVector,
    outcome_b: &StateVector,
) -> LinalgResult<f64> {
    check_dims(effect_a.dim() * outcome_b.dim(), state.dim())?;
    let bob = contract_alice(state, effect_a)?;
    Ok(inner(outcome_b, &bob)?.norm_sqr())
}

/// Dense square complex matrix that satisfied the Hermitian check on
/// construction. Row-major storage.
#[derive(Clone, PartialEq)]
pub struct HermitianOperator {
    dim: usize,
    entries: Vec<ComplexScalar>,
}

impl HermitianOperator {
    pub fn new(dim: usize, entries: Vec<ComplexScalar>) -> LinalgResult<Self> {
        Self::with_tolerance(dim, entries, Tolerances::default().hermiticity)
    }

    pub fn with_tolerance(dim: usize, entries: Vec<ComplexScalar>, tol: f64) -> LinalgResult<Self> {
        if dim == 0 {
            return Err(LinalgError::Empty);
        }
        check_dims(dim * dim, entries.len())?;
        if let Some(i) = entries
            .iter()
            .position(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(LinalgError::NonFinite(i));
        }
        let mut deviation: f64 = 0.0;
        for i in 0..dim {
            for j in i..dim {
                let d = (entries[i * dim + j] - entries[j * dim + i].conj()).norm();
                deviation = deviation.max(d);
            }
        }
        if deviation > tol {
            return Err(LinalgError::NotHermitian {
                deviation,
                tolerance: tol,
            });
        }
        Ok(Self { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![ComplexScalar::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Self::zeros(dim);
        for i in 0..dim {
            op.entries[i * dim + i] = ComplexScalar::new(1.0, 0.0);
        }
        op
    }

    /// `|v⟩⟨v|`.
    pub fn projector(v: &StateVector) -> Self {
        let dim = v.dim();
        let mut entries = Vec::with_capacity(dim * dim);
        for a in &v.amps {
            for b in &v.amps {
                entries.push(a * b.conj());
            }
        }
        Self { dim, entries }
    }

    /// `self ⊗ other`, Hermitian whenever both factors are.
    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        let dim = n * m;
        let mut entries = vec![ComplexScalar::new(0.0, 0.0); dim * dim];
        for i in 0..n {
            for j in 0..n {
                let a = self.entries[i * n + j];
                if a == ComplexScalar::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        entries[(i * m + k) * dim + j * m + l] = a * other.entries[k * m + l];
                    }
                }
            }
        }
        Self { dim, entries }
    }

    /// `self += c·other` for real `c`.
    pub fn add_scaled(&mut self, c: f64, other: &Self) -> LinalgResult<()> {
        check_dims(self.dim, other.dim)?;
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += b * c;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> ComplexScalar {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[ComplexScalar] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.entries[i * self.dim + i].re)
            .sum()
    }

    pub fn apply(&self, v: &StateVector) -> LinalgResult<StateVector> {
        check_dims(self.dim, v.dim())?;
        let amps = self
            .entries
            .chunks(self.dim)
            .map(|row| row.iter().zip(&v.amps).map(|(h, x)| h * x).sum())
            .collect();
        Ok(StateVector { amps })
    }

    /// `⟨v|H|v⟩`, real for Hermitian `H`.
    pub fn expectation(&self, v: &StateVector) -> LinalgResult<f64> {
        Ok(inner(v, &self.apply(v)?)?.re)
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_abs_diff(&self, other: &Self) -> LinalgResult<f64> {
        check_dims(self.dim, other.dim)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("entries are finite")
    }
}

impl fmt::Debug for HermitianOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HermitianOperator")
            .field("dim", &self.dim)
            .field("entries", &self.to_json())
            .finish()
    }
}

/// Serialized as rows of `[re, im]` pairs.
impl Serialize for HermitianOperator {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.dim))?;
        for row in self.entries.chunks(self.dim) {
            let pairs: Vec<[f64; 2]> = row.iter().map(|a| [a.re, a.im]).collect();
            seq.serialize_element(&pairs)?;
        }
        seq.end()
    }
}

/// Alice-side operator `Tr_B[(I ⊗ bob_op)|ψ⟩⟨ψ|]` for a bipartite `state`
/// whose Bob factor has dimension `bob_op.dim()`.
///
/// For any Alice vector `s`, `⟨s|R|s⟩ = ⟨ψ|(|s⟩⟨s| ⊗ bob_op)|ψ⟩`.
pub fn reduce_to_alice(
    state: &StateVector,
    bob_op: &HermitianOperator,
) -> LinalgResult<HermitianOperator> {
    let db = bob_op.dim();
    if db == 0 || !state.dim().is_multiple_of(db) {
        return Err(LinalgError::DimensionMismatch {
            expected: db,
            found: state.dim(),
        });
    }
    let da = state.dim() / db;
    let psi = &state.amps;
    // Kψ_i for each Alice row i.
    let mut kpsi = vec![ComplexScalar::new(0.0, 0.0); da * db];
    for i in 0..da {
        for b in 0..db {
            kpsi[i * db + b] = (0..db)
                .map(|c| bob_op.entries[b * db + c] * psi[i * db + c])
                .sum();
        }
    }
    let mut entries = vec![ComplexScalar::new(0.0, 0.0); da * da];
    for i in 0..da {
        for j in 0..da {
            entries[i * da + j] = (0..db)
                .map(|b| kpsi[i * db + b] * psi[j * db + b].conj())
                .sum();
        }
    }
    // Symmetrize away rounding so the result passes the strict Hermitian check.
    for i in 0..da {
        entries[i * da + i].im = 0.0;
        for j in (i + 1)..da {
            let avg = (entries[i * da + j] + entries[j * da + i].conj()) * 0.5;
            entries[i * da + j] = avg;
            entries[j * da + i] = avg.conj();
        }
    }
    Ok(HermitianOperator { dim: da, entries })
}

/// Full spectrum of a Hermitian operator, eigenvalues descending.
#[derive(Debug, Clone, Serialize)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<StateVector>,
    pub sweeps: usize,
}

impl EigenDecomposition {
    pub fn top(&self) -> (f64, &StateVector) {
        (self.eigenvalues[0], &self.eigenvectors[0])
    }

    /// Largest `‖H v − λ v‖` over all pairs.
    pub fn max_residual(&self, h: &HermitianOperator) -> LinalgResult<f64> {
        let mut worst: f64 = 0.0;
        for (&lambda, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            let hv = h.apply(v)?;
            let r = hv.add_scaled(ComplexScalar::new(-lambda, 0.0), v)?;
            worst = worst.max(r.norm());
        }
        Ok(worst)
    }

    /// Largest `|⟨v_i|v_j⟩ − δ_ij|`.
    pub fn max_orthonormality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, u) in self.eigenvectors.iter().enumerate() {
            for (j, v) in self.eigenvectors.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                let g = inner(u, v).expect("eigenvectors share a dimension");
                worst = worst.max((g - target).norm());
            }
        }
        worst
    }

    /// `Σ λ_i |v_i⟩⟨v_i|`.
    pub fn reconstruct(&self) -> HermitianOperator {
        let dim = self.eigenvectors[0].dim();
        let mut op = HermitianOperator::zeros(dim);
        for (&lambda, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            op.add_scaled(lambda, &HermitianOperator::projector(v))
                .expect("eigenvectors share a dimension");
        }
        op
    }
}

pub fn hermitian_eigs(h: &HermitianOperator) -> EigenDecomposition {
    hermitian_eigs_with(h, &Tolerances::default())
}

/// Cyclic complex Jacobi.
///
/// Each rotation first removes the phase of `H[p][q]` with a diagonal unitary
/// acting on column `q`, then applies the real symmetric Jacobi rotation that
/// annihilates the now-real entry. The accumulated unitary holds the
/// eigenvectors as columns.
pub fn hermitian_eigs_with(h: &HermitianOperator, tol: &Tolerances) -> EigenDecomposition {
    let n = h.dim;
    let mut a = h.entries.clone();
    let mut v = HermitianOperator::identity(n).entries;

    let scale = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt().max(1.0);
    let threshold = tol.jacobi_offdiag * scale;
    let off_norm = |a: &[ComplexScalar]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while sweeps < tol.max_sweeps && off_norm(&a) > threshold {
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let g = apq.norm();
                if g == 0.0 {
                    continue;
                }
                let phase = apq / g;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let theta = (aqq - app) / (2.0 * g);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // W = [[c, s], [-s·conj(phase), c·conj(phase)]] on (p, q).
                let w_qp = -phase.conj() * s;
                let w_qq = phase.conj() * c;

                // A ← A W
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * c + akq * w_qp;
                    a[k * n + q] = akp * s + akq * w_qq;
                }
                // A ← W† A
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = apk * c + aqk * w_qp.conj();
                    a[q * n + k] = apk * s + aqk * w_qq.conj();
                }
                a[p * n + q] = ComplexScalar::new(0.0, 0.0);
                a[q * n + p] = ComplexScalar::new(0.0, 0.0);
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;
                // V ← V W
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * c + vkq * w_qp;
                    v[k * n + q] = vkp * s + vkq * w_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].re.total_cmp(&a[i * n + i].re));
    let eigenvalues = order.iter().map(|&i| a[i * n + i].re).collect();
    let eigenvectors = order
        .iter()
        .map(|&col| {
            let amps = (0..n).map(|row| v[row * n + col]).collect();
            StateVector { amps }.canonical_phase()
        })
        .collect();
    EigenDecomposition {
        eigenvalues,
        eigenvectors,
        sweeps,
    }
}
