//! State constructors: the computational basis `A`, its Fourier transform
//! `A′`, intermediate states, the maximally entangled pair, and the vectors
//! Alice projects onto to steer Bob.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexScalar, StateVector, Tolerances};

pub const MIN_DIM: usize = 2;
/// Keeps `d² ≤ 36` for the eigensolver.
pub const MAX_DIM: usize = 6;

pub fn check_dim(d: usize) -> Result<()> {
    if !(MIN_DIM..=MAX_DIM).contains(&d) {
        return Err(Error::Dimension {
            d,
            min: MIN_DIM,
            max: MAX_DIM,
        });
    }
    Ok(())
}

/// `e^{2πi·n/d}`, with the exponent reduced mod `d` first so equal powers map
/// to bit-identical scalars.
pub fn root_of_unity(n: i64, d: usize) -> ComplexScalar {
    let r = n.rem_euclid(d as i64) as f64;
    ComplexScalar::from_polar(1.0, 2.0 * PI * r / d as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BasisLabel {
    A,
    #[serde(rename = "A_prime")]
    APrime,
    Other,
}

#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    label: BasisLabel,
    vectors: Vec<StateVector>,
}

impl OrthonormalBasis {
    /// Validates `|⟨v_i|v_j⟩ − δ_ij| ≤ tol.normalization`.
    pub fn new(label: BasisLabel, vectors: Vec<StateVector>) -> Result<Self> {
        let d = vectors.len();
        if d == 0 {
            return Err(Error::Invalid("basis needs at least one vector".into()));
        }
        let tol = Tolerances::default().normalization;
        for (i, u) in vectors.iter().enumerate() {
            if u.dim() != d {
                return Err(Error::Invalid(format!(
                    "basis vector {i} has dim {} but the basis has {d} vectors",
                    u.dim()
                )));
            }
            for (j, v) in vectors.iter().enumerate() {
                let g = linalg::inner(u, v)?;
                let target = if i == j { 1.0 } else { 0.0 };
                if (g - target).norm() > tol {
                    return Err(Error::Invalid(format!(
                        "basis vectors {i}, {j} violate orthonormality: ⟨v_i|v_j⟩ = {g}"
                    )));
                }
            }
        }
        Ok(Self { label, vectors })
    }

    pub fn label(&self) -> BasisLabel {
        self.label
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vector(&self, i: usize) -> &StateVector {
        &self.vectors[i]
    }

    pub fn vectors(&self) -> &[StateVector] {
        &self.vectors
    }
}

pub fn computational_basis(d: usize) -> Result<OrthonormalBasis> {
    check_dim(d)?;
    let vectors = (0..d).map(|i| StateVector::basis(d, i)).collect();
    OrthonormalBasis::new(BasisLabel::A, vectors)
}

/// `|a′_l⟩ = (1/√d) Σ_k ω^{kl} |a_k⟩`, `ω = e^{2πi/d}`.
pub fn fourier_basis(d: usize) -> Result<OrthonormalBasis> {
    check_dim(d)?;
    let norm = 1.0 / (d as f64).sqrt();
    let vectors = (0..d)
        .map(|l| {
            let amps = (0..d)
                .map(|k| root_of_unity((k * l) as i64, d) * norm)
                .collect();
            StateVector::new(amps)
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    OrthonormalBasis::new(BasisLabel::APrime, vectors)
}

/// A pair of targets, one from each basis: `|a_k⟩` and `|a′_l⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TargetSet {
    pub k: usize,
    pub l: usize,
}

impl TargetSet {
    pub fn new(k: usize, l: usize, d: usize) -> Result<Self> {
        if k >= d || l >= d {
            return Err(Error::Index { k, l, d });
        }
        Ok(Self { k, l })
    }

    /// All `d²` target sets, `k` major.
    pub fn all(d: usize) -> impl Iterator<Item = TargetSet> {
        (0..d).flat_map(move |k| (0..d).map(move |l| TargetSet { k, l }))
    }

    /// Position in [`TargetSet::all`], also the bit index in an LHV fire mask.
    pub fn index(&self, d: usize) -> usize {
        self.k * d + self.l
    }

    pub fn from_index(index: usize, d: usize) -> Self {
        Self {
            k: index / d,
            l: index % d,
        }
    }
}

/// Overlaps below this modulus are treated as exactly zero (phase 0).
const ZERO_OVERLAP: f64 = 1e-14;

/// `(|ψ₁⟩ + e^{−iφ}|ψ₂⟩)/√N` with `⟨ψ₁|ψ₂⟩ = e^{iφ}|⟨ψ₁|ψ₂⟩|` and
/// `N = 2(1 + |⟨ψ₁|ψ₂⟩|)`. Orthogonal inputs use `φ = 0`.
pub fn intermediate(psi1: &StateVector, psi2: &StateVector) -> Result<StateVector> {
    let tol = Tolerances::default().normalization;
    if !psi1.is_normalized(tol) || !psi2.is_normalized(tol) {
        return Err(Error::Invalid(
            "intermediate state needs unit inputs".into(),
        ));
    }
    let overlap = linalg::inner(psi1, psi2)?;
    let modulus = overlap.norm();
    let phase = if modulus < ZERO_OVERLAP {
        ComplexScalar::new(1.0, 0.0)
    } else {
        overlap / modulus
    };
    let numerator = psi1.add_scaled(phase.conj(), psi2)?;
    if numerator.norm() < 1e-12 {
        return Err(Error::Degenerate);
    }
    let norm = (2.0 * (1.0 + modulus)).sqrt();
    Ok(numerator.scaled(ComplexScalar::new(1.0 / norm, 0.0)))
}

/// `N = 2(1 + 1/√d)` shared by every grid state.
pub fn grid_normalizer(d: usize) -> f64 {
    2.0 * (1.0 + 1.0 / (d as f64).sqrt())
}

/// `|m_kl⟩ = (|a_k⟩ + e^{−2πikl/d}|a′_l⟩)/√N`.
pub fn grid_intermediate(d: usize, k: usize, l: usize) -> Result<StateVector> {
    check_dim(d)?;
    TargetSet::new(k, l, d)?;
    let fourier = fourier_basis(d)?;
    let a_k = StateVector::basis(d, k);
    let phase = root_of_unity(-((k * l) as i64), d);
    let m = a_k.add_scaled(phase, fourier.vector(l))?;
    Ok(m.scaled(ComplexScalar::new(1.0 / grid_normalizer(d).sqrt(), 0.0)))
}

/// All `d²` intermediate states `|m_kl⟩`.
#[derive(Debug, Clone)]
pub struct IntermediateGrid {
    d: usize,
    states: Vec<StateVector>,
    normalizer: f64,
}

impl IntermediateGrid {
    pub fn new(d: usize) -> Result<Self> {
        let states = TargetSet::all(d)
            .map(|t| grid_intermediate(d, t.k, t.l))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            d,
            states,
            normalizer: grid_normalizer(d),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn get(&self, target: TargetSet) -> &StateVector {
        &self.states[target.index(self.d)]
    }

    pub fn iter(&self) -> impl Iterator<Item = (TargetSet, &StateVector)> {
        TargetSet::all(self.d).zip(&self.states)
    }
}

/// `(1/√d) Σ_k |a_k⟩ ⊗ |a_k⟩`.
pub fn max_entangled(d: usize) -> Result<StateVector> {
    check_dim(d)?;
    let amp = 1.0 / (d as f64).sqrt();
    let mut amps = vec![ComplexScalar::new(0.0, 0.0); d * d];
    for k in 0..d {
        amps[k * d + k] = ComplexScalar::new(amp, 0.0);
    }
    Ok(StateVector::new(amps)?)
}

/// The same state built in the Fourier basis:
/// `(1/√d) Σ_l |a′_l⟩ ⊗ |a′_{(d−l) mod d}⟩`.
pub fn max_entangled_fourier_form(d: usize) -> Result<StateVector> {
    check_dim(d)?;
    let fourier = fourier_basis(d)?;
    let mut acc = StateVector::new(vec![ComplexScalar::new(0.0, 0.0); d * d])?;
    let amp = ComplexScalar::new(1.0 / (d as f64).sqrt(), 0.0);
    for l in 0..d {
        let pair = linalg::tensor(fourier.vector(l), fourier.vector((d - l) % d))?;
        acc = acc.add_scaled(amp, &pair)?;
    }
    Ok(acc)
}

/// The vector Alice's "yes" outcome projects onto so that Bob is left in
/// `|m_kl⟩`.
///
/// Contracting `(1/√d) Σ|k,k⟩` with `⟨s|` on Alice's side leaves Bob in
/// `(1/√d) Σ conj(s_k)|k⟩`, so Alice measures the computational-basis
/// conjugate of the state she wants Bob to hold. For Fourier targets this is
/// the anticorrelation `a′_l ↔ a′_{−l}`.
pub fn steering_vector(d: usize, target: TargetSet) -> Result<StateVector> {
    let m = grid_intermediate(d, target.k, target.l)?;
    Ok(linalg::conj_in_computational(&m))
}
