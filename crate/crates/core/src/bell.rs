//! The Bell sum built from the targeting game.
//!
//! A setting pair is one of Alice's `d²` binary measurements together with
//! one of Bob's two bases. For each pair the correlated outcome is the index
//! Bob must find for Alice to pass: `k` in basis `A`, `l` in basis `A′`.
//! The sum adds `p(fire ∧ correlated)` and subtracts `p(fire ∧ x)` for every
//! other `x`; rounds where Alice declines contribute nothing.
//!
//! The same sum is the expectation of
//! `B = Σ_kl P_kl ⊗ K_kl`, with `P_kl` Alice's "yes" projector and
//! `K_kl = Σ_{bases} (2|b_c⟩⟨b_c| − I)`.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{BobBasis, GameSummary};
use crate::lhv::{self, LhvMode};
use crate::linalg::{self, HermitianOperator, StateVector, Tolerances};
use crate::states::{self, TargetSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SettingPair {
    pub alice: TargetSet,
    pub bob: BobBasis,
}

impl SettingPair {
    /// All `2d²` pairs, target major, `A` before `A′`.
    pub fn all(d: usize) -> impl Iterator<Item = SettingPair> {
        TargetSet::all(d).flat_map(|alice| BobBasis::ALL.map(|bob| SettingPair { alice, bob }))
    }
}

pub fn correlated_outcome(pair: SettingPair) -> usize {
    pair.bob.target_index(pair.alice)
}

/// Values attached to measurement outcomes, plus the grouping of Alice's
/// measurements into sets `M_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValueAssignment {
    pub d: usize,
}

impl ValueAssignment {
    pub fn m_value(&self, k: usize, _l: usize) -> usize {
        k
    }

    pub fn a_value(&self, i: usize) -> usize {
        i
    }

    pub fn aprime_value(&self, j: usize) -> usize {
        j
    }

    /// `m_kl ∈ M_{(l − k) mod d}`.
    pub fn mset_of(&self, k: usize, l: usize) -> usize {
        (l + self.d - k) % self.d
    }

    /// Members of `M_i`, listed by value.
    pub fn mset(&self, i: usize) -> Vec<TargetSet> {
        (0..self.d)
            .map(|k| TargetSet {
                k,
                l: (k + i) % self.d,
            })
            .collect()
    }

    /// Bob's correlated outcome via the shift rules: against `A` Alice's value
    /// equals Bob's; against `A′` a member of `M_i` carries a value
    /// `d − i (mod d)` above Bob's.
    pub fn shifted_outcome(&self, pair: SettingPair) -> usize {
        let (k, l) = (pair.alice.k, pair.alice.l);
        let alice_value = self.m_value(k, l);
        match pair.bob {
            BobBasis::A => alice_value,
            BobBasis::APrime => {
                let shift = (self.d - self.mset_of(k, l)) % self.d;
                (alice_value + self.d - shift) % self.d
            }
        }
    }
}

/// Joint probabilities for one setting pair.
#[derive(Debug, Clone, Serialize)]
pub struct SettingRow {
    pub alice: TargetSet,
    pub bob: BobBasis,
    /// `p(fire ∧ outcome = x)` for `x = 0..d`.
    pub probabilities: Vec<f64>,
    pub correlated_index: usize,
}

impl SettingRow {
    pub fn correlated(&self) -> f64 {
        self.probabilities[self.correlated_index]
    }

    pub fn anticorrelated(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .filter(|(x, _)| *x != self.correlated_index)
            .map(|(_, p)| p)
            .sum()
    }

    pub fn contribution(&self) -> f64 {
        self.correlated() - self.anticorrelated()
    }
}

fn check_state(state: &StateVector, d: usize) -> Result<()> {
    states::check_dim(d)?;
    if state.dim() != d * d {
        return Err(linalg::LinalgError::DimensionMismatch {
            expected: d * d,
            found: state.dim(),
        }
        .into());
    }
    Ok(())
}

pub fn joint_table(state: &StateVector, d: usize) -> Result<Vec<SettingRow>> {
    check_state(state, d)?;
    let bases = [BobBasis::A.basis(d)?, BobBasis::APrime.basis(d)?];
    let steering = TargetSet::all(d)
        .map(|t| states::steering_vector(d, t))
        .collect::<Result<Vec<_>>>()?;
    SettingPair::all(d)
        .map(|pair| {
            let effect = &steering[pair.alice.index(d)];
            let probabilities = bases[pair.bob as usize]
                .vectors()
                .iter()
                .map(|b| Ok(linalg::born_joint(state, effect, b)?))
                .collect::<Result<Vec<_>>>()?;
            Ok(SettingRow {
                alice: pair.alice,
                bob: pair.bob,
                probabilities,
                correlated_index: correlated_outcome(pair),
            })
        })
        .collect()
}

pub fn value_from_table(table: &[SettingRow]) -> f64 {
    table.iter().map(SettingRow::contribution).sum()
}

pub fn bell_value(state: &StateVector, d: usize) -> Result<f64> {
    Ok(value_from_table(&joint_table(state, d)?))
}

/// `2√d`.
pub fn quantum_bound(d: usize) -> f64 {
    2.0 * (d as f64).sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct BellReport {
    pub d: usize,
    pub quantum_value: f64,
    pub classical_bound: f64,
    pub violation_ratio: f64,
    pub lhv_mode: LhvMode,
    pub table: Vec<SettingRow>,
}

impl BellReport {
    /// Recomputes the value from the stored table.
    pub fn recomputed_value(&self) -> f64 {
        value_from_table(&self.table)
    }
}

pub fn bell_report(state: &StateVector, d: usize) -> Result<BellReport> {
    let table = joint_table(state, d)?;
    let lhv = lhv::classical_bound(d)?;
    let quantum_value = value_from_table(&table);
    let classical_bound = lhv.max_value as f64;
    Ok(BellReport {
        d,
        quantum_value,
        classical_bound,
        violation_ratio: quantum_value / classical_bound,
        lhv_mode: lhv.mode,
        table,
    })
}

/// Report for the maximally entangled state.
pub fn exact_report(d: usize) -> Result<BellReport> {
    bell_report(&states::max_entangled(d)?, d)
}

/// `2|b_c⟩⟨b_c| − I` in the given basis.
fn signed_outcome_operator(
    basis: &states::OrthonormalBasis,
    correlated: usize,
) -> HermitianOperator {
    let mut op = HermitianOperator::zeros(basis.dim());
    op.add_scaled(2.0, &HermitianOperator::projector(basis.vector(correlated)))
        .expect("same dim");
    op.add_scaled(-1.0, &HermitianOperator::identity(basis.dim()))
        .expect("same dim");
    op
}

/// Bob-side operators `K_kl`, summed over both of Bob's bases, indexed like
/// [`TargetSet::all`].
pub fn bob_setting_operators(d: usize) -> Result<Vec<HermitianOperator>> {
    states::check_dim(d)?;
    let bases = [BobBasis::A.basis(d)?, BobBasis::APrime.basis(d)?];
    Ok(TargetSet::all(d)
        .map(|alice| {
            let mut k = HermitianOperator::zeros(d);
            for bob in BobBasis::ALL {
                let c = correlated_outcome(SettingPair { alice, bob });
                k.add_scaled(1.0, &signed_outcome_operator(&bases[bob as usize], c))
                    .expect("same dim");
            }
            k
        })
        .collect())
}

/// `Σ_kl |e_kl⟩⟨e_kl| ⊗ K_kl` for arbitrary Alice effects `e_kl`.
pub fn bell_operator_for_effects(d: usize, effects: &[StateVector]) -> Result<HermitianOperator> {
    if effects.len() != d * d {
        return Err(Error::Invalid(format!(
            "need {} Alice effects, got {}",
            d * d,
            effects.len()
        )));
    }
    let bob_ops = bob_setting_operators(d)?;
    let mut b = HermitianOperator::zeros(d * d);
    for (e, k) in effects.iter().zip(&bob_ops) {
        if e.dim() != d {
            return Err(linalg::LinalgError::DimensionMismatch {
                expected: d,
                found: e.dim(),
            }
            .into());
        }
        b.add_scaled(1.0, &HermitianOperator::projector(e).kron(k))?;
    }
    Ok(b)
}

pub fn steering_effects(d: usize) -> Result<Vec<StateVector>> {
    TargetSet::all(d)
        .map(|t| states::steering_vector(d, t))
        .collect()
}

/// The Bell operator for the steering measurements.
pub fn bell_operator(d: usize) -> Result<HermitianOperator> {
    bell_operator_for_effects(d, &steering_effects(d)?)
}

/// `Tr B` computed setting by setting: `Σ_kl Tr P_kl · Tr K_kl`.
pub fn bell_operator_trace(d: usize) -> Result<f64> {
    let effects = steering_effects(d)?;
    let bob_ops = bob_setting_operators(d)?;
    Ok(effects
        .iter()
        .zip(&bob_ops)
        .map(|(e, k)| e.norm_sqr() * k.trace())
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeesawOptions {
    pub max_iterations: usize,
    /// Stop once an iteration improves the value by less than this.
    pub tolerance: f64,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            tolerance: 1e-13,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SeesawTrial {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    #[serde(skip)]
    pub state: StateVector,
    #[serde(skip)]
    pub effects: Vec<StateVector>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeesawResult {
    pub d: usize,
    pub seed: u64,
    pub best_value: f64,
    pub quantum_bound: f64,
    pub all_converged: bool,
    pub trials: Vec<SeesawTrial>,
}

/// State/effect alternation from `initial`, with Bob fixed at `{A, A′}`.
///
/// Each iteration sets every Alice effect to the top eigenvector of
/// `Tr_B[(I ⊗ K_kl)|ψ⟩⟨ψ|]`, then sets `|ψ⟩` to the top eigenvector of the
/// Bell operator for those effects. Neither step can decrease the value.
pub fn seesaw_from(d: usize, initial: &StateVector, opts: &SeesawOptions) -> Result<SeesawTrial> {
    check_state(initial, d)?;
    let tol = Tolerances::default();
    let bob_ops = bob_setting_operators(d)?;
    let mut state = initial.normalized()?;
    let mut effects = Vec::new();
    let mut value = f64::NEG_INFINITY;
    for iteration in 1..=opts.max_iterations {
        effects = bob_ops
            .iter()
            .map(|k| {
                let reduced = linalg::reduce_to_alice(&state, k)?;
                let eig = linalg::hermitian_eigs_with(&reduced, &tol);
                Ok(eig.eigenvectors[0].clone())
            })
            .collect::<Result<Vec<_>>>()?;
        let b = bell_operator_for_effects(d, &effects)?;
        let eig = linalg::hermitian_eigs_with(&b, &tol);
        let (next, top) = eig.top();
        state = top.clone();
        let improvement = next - value;
        value = next;
        if improvement < opts.tolerance {
            return Ok(SeesawTrial {
                value,
                iterations: iteration,
                converged: true,
                state,
                effects,
            });
        }
    }
    Ok(SeesawTrial {
        value,
        iterations: opts.max_iterations,
        converged: false,
        state,
        effects,
    })
}

/// Runs `trials` see-saw ascents from Haar-random states. Trial `i` draws its
/// start from ChaCha8 stream `i` under `seed`.
pub fn seesaw_verify(d: usize, trials: usize, seed: u64) -> Result<SeesawResult> {
    seesaw_verify_with(d, trials, seed, &SeesawOptions::default())
}

pub fn seesaw_verify_with(
    d: usize,
    trials: usize,
    seed: u64,
    opts: &SeesawOptions,
) -> Result<SeesawResult> {
    states::check_dim(d)?;
    if trials == 0 {
        return Err(Error::Invalid("trials must be at least 1".into()));
    }
    let results = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = crate::game::round_rng(seed, i as u64);
            let start = StateVector::random(d * d, &mut rng);
            seesaw_from(d, &start, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    let best_value = results
        .iter()
        .map(|t| t.value)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(SeesawResult {
        d,
        seed,
        best_value,
        quantum_bound: quantum_bound(d),
        all_converged: results.iter().all(|t| t.converged),
        trials: results,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub d: usize,
    pub quantum_value: f64,
    pub classical_bound: f64,
    pub ratio: f64,
    pub lhv_mode: LhvMode,
}

pub fn dimension_sweep(dims: &[usize]) -> Result<Vec<SweepRow>> {
    if dims.is_empty() {
        return Err(Error::Invalid("dimension list is empty".into()));
    }
    dims.par_iter()
        .map(|&d| {
            let r = exact_report(d)?;
            Ok(SweepRow {
                d,
                quantum_value: r.quantum_value,
                classical_bound: r.classical_bound,
                ratio: r.violation_ratio,
                lhv_mode: r.lhv_mode,
            })
        })
        .collect()
}

/// Stratified Monte-Carlo estimate of the Bell sum from game tallies:
/// `Σ_pairs (passed − failed)/rounds`, with its standard error. Only
/// meaningful for the max-control policy, where "pass" is "correlated".
pub fn estimate_from_game(summary: &GameSummary) -> Result<(f64, f64)> {
    let mut value = 0.0;
    let mut var = 0.0;
    for cell in &summary.per_setting {
        let t = cell.tally;
        if t.rounds == 0 {
            return Err(Error::Invalid(format!(
                "setting {:?}/{:?} was never played",
                cell.target, cell.bob_choice
            )));
        }
        let n = t.rounds as f64;
        let mean = (t.passed as f64 - t.failed as f64) / n;
        let second = t.fired as f64 / n;
        value += mean;
        var += (second - mean * mean) / n;
    }
    Ok((value, var.sqrt()))
}

/// Random unit perturbation of each effect with step `eps`.
pub fn perturb_effects<R: Rng + ?Sized>(
    effects: &[StateVector],
    eps: f64,
    rng: &mut R,
) -> Result<Vec<StateVector>> {
    effects
        .iter()
        .map(|e| {
            let noise = StateVector::random(e.dim(), rng);
            Ok(e.add_scaled(linalg::ComplexScalar::new(eps, 0.0), &noise)?
                .normalized()?)
        })
        .collect()
}
