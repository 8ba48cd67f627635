//! The targeting protocol played on shared maximally entangled pairs.
//!
//! One round:
//! 1. a target set `(a_k, a′_l)` is drawn uniformly from the `d²` sets, and
//!    Alice performs the binary measurement `{P_kl, I − P_kl}` on her half,
//!    with `P_kl` the projector onto [`steering_vector`](crate::states::steering_vector);
//! 2. Bob reveals his target, `a_k` or `a′_l` with probability ½ each;
//! 3. Alice announces (the target, under maximum control) if her measurement
//!    fired, and declines otherwise;
//! 4. Bob measures the basis of the announced state and passes Alice iff he
//!    finds it.
//!
//! Every round consumes exactly four `f64` draws from its own ChaCha8 stream
//! (`stream = round index`), in the order target, fire, Bob's choice, Bob's
//! outcome. Rounds are therefore independent of thread layout and a summary
//! is a pure function of `(d, rounds, seed)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, StateVector};
use crate::states::{self, TargetSet};

/// Which of the two target states Bob picks, equivalently which basis he
/// measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum BobBasis {
    #[serde(rename = "A")]
    A,
    #[serde(rename = "A_prime")]
    APrime,
}

impl BobBasis {
    pub const ALL: [BobBasis; 2] = [BobBasis::A, BobBasis::APrime];

    pub fn other(self) -> Self {
        match self {
            BobBasis::A => BobBasis::APrime,
            BobBasis::APrime => BobBasis::A,
        }
    }

    /// Index of this basis' member of the target set.
    pub fn target_index(self, target: TargetSet) -> usize {
        match self {
            BobBasis::A => target.k,
            BobBasis::APrime => target.l,
        }
    }

    pub fn basis(self, d: usize) -> Result<states::OrthonormalBasis> {
        match self {
            BobBasis::A => states::computational_basis(d),
            BobBasis::APrime => states::fourier_basis(d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Announcement {
    TargetState,
    NonTargetState,
    Declined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
    Declined,
}

/// The four announced-round outcomes of the targeting game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    /// Target announced, test passed.
    A,
    /// Target announced, test failed.
    B,
    /// Non-target announced, test passed.
    C,
    /// Non-target announced, test failed.
    D,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GameRound {
    pub target: TargetSet,
    pub bob_choice: BobBasis,
    pub alice_fired: bool,
    pub announcement: Announcement,
    pub bob_outcome: Option<usize>,
    pub verdict: Verdict,
}

impl GameRound {
    pub fn outcome(&self) -> Option<Outcome> {
        match (self.announcement, self.verdict) {
            (Announcement::TargetState, Verdict::Pass) => Some(Outcome::A),
            (Announcement::TargetState, Verdict::Fail) => Some(Outcome::B),
            (Announcement::NonTargetState, Verdict::Pass) => Some(Outcome::C),
            (Announcement::NonTargetState, Verdict::Fail) => Some(Outcome::D),
            _ => None,
        }
    }
}

/// Which member of the target set Alice claims to have prepared.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Claim {
    Target,
    NonTarget,
}

/// What Alice says after her measurement fired. A policy never sees
/// unfired rounds; those are always declined.
pub trait AlicePolicy: Sync {
    fn announce(&self, target: TargetSet, bob_choice: BobBasis) -> Claim;
}

/// Always announce Bob's target.
#[derive(Debug, Clone, Copy, Default)]
pub struct MaxControl;

impl AlicePolicy for MaxControl {
    fn announce(&self, _target: TargetSet, _bob_choice: BobBasis) -> Claim {
        Claim::Target
    }
}

/// `½(1 + |⟨ψ₁|ψ₂⟩|)`: the pass probability of the intermediate state for
/// either target.
pub fn control_probability(psi1: &StateVector, psi2: &StateVector) -> Result<f64> {
    Ok(0.5 * (1.0 + linalg::inner(psi1, psi2)?.norm()))
}

#[derive(Debug, Clone)]
struct PreparedTarget {
    fire_probability: f64,
    /// Bob's outcome distribution, indexed by `BobBasis as usize`.
    outcome_probs: [Vec<f64>; 2],
}

/// Precomputed per-target measurement statistics for one dimension.
#[derive(Debug, Clone)]
pub struct TargetingGame {
    d: usize,
    targets: Vec<PreparedTarget>,
}

impl TargetingGame {
    pub fn new(d: usize) -> Result<Self> {
        let shared = states::max_entangled(d)?;
        let bases = [BobBasis::A.basis(d)?, BobBasis::APrime.basis(d)?];
        let targets = TargetSet::all(d)
            .map(|t| {
                let steer = states::steering_vector(d, t)?;
                let bob = linalg::contract_alice(&shared, &steer)?;
                let fire_probability = bob.norm_sqr();
                let bob = bob.normalized()?;
                let probs = |b: &states::OrthonormalBasis| -> Result<Vec<f64>> {
                    b.vectors()
                        .iter()
                        .map(|v| Ok(linalg::fidelity(v, &bob)?))
                        .collect()
                };
                Ok(PreparedTarget {
                    fire_probability,
                    outcome_probs: [probs(&bases[0])?, probs(&bases[1])?],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { d, targets })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn fire_probability(&self, target: TargetSet) -> f64 {
        self.targets[target.index(self.d)].fire_probability
    }

    /// Exact `P(pass | fired)` for the max-control policy.
    pub fn pass_probability(&self, target: TargetSet, bob_choice: BobBasis) -> f64 {
        self.targets[target.index(self.d)].outcome_probs[bob_choice as usize]
            [bob_choice.target_index(target)]
    }

    pub fn play_round<R: Rng + ?Sized>(&self, policy: &dyn AlicePolicy, rng: &mut R) -> GameRound {
        let u_target: f64 = rng.gen();
        let u_fire: f64 = rng.gen();
        let u_choice: f64 = rng.gen();
        let u_outcome: f64 = rng.gen();

        let n = self.targets.len();
        let index = ((u_target * n as f64) as usize).min(n - 1);
        let target = TargetSet::from_index(index, self.d);
        let prepared = &self.targets[index];
        let alice_fired = u_fire < prepared.fire_probability;
        let bob_choice = if u_choice < 0.5 {
            BobBasis::A
        } else {
            BobBasis::APrime
        };

        if !alice_fired {
            return GameRound {
                target,
                bob_choice,
                alice_fired,
                announcement: Announcement::Declined,
                bob_outcome: None,
                verdict: Verdict::Declined,
            };
        }

        let (announcement, tested) = match policy.announce(target, bob_choice) {
            Claim::Target => (Announcement::TargetState, bob_choice),
            Claim::NonTarget => (Announcement::NonTargetState, bob_choice.other()),
        };
        let outcome = sample_index(&prepared.outcome_probs[tested as usize], u_outcome);
        let verdict = if outcome == tested.target_index(target) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        GameRound {
            target,
            bob_choice,
            alice_fired,
            announcement,
            bob_outcome: Some(outcome),
            verdict,
        }
    }
}

/// Inverse-CDF sampling; any leftover mass from rounding goes to the last
/// index.
fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// The random stream for round `index` of a run seeded with `seed`.
pub fn round_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Single max-control round at dimension `d`.
///
/// Rebuilds the per-target tables on every call; loops should hold a
/// [`TargetingGame`] instead.
pub fn play_round<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<GameRound> {
    Ok(TargetingGame::new(d)?.play_round(&MaxControl, rng))
}

/// Counts for one `(target set, Bob's choice)` cell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SettingTally {
    pub rounds: u64,
    pub fired: u64,
    pub passed: u64,
    pub failed: u64,
}

impl SettingTally {
    fn record(&mut self, round: &GameRound) {
        self.rounds += 1;
        if round.alice_fired {
            self.fired += 1;
        }
        match round.verdict {
            Verdict::Pass => self.passed += 1,
            Verdict::Fail => self.failed += 1,
            Verdict::Declined => {}
        }
    }

    fn merge(mut self, other: &Self) -> Self {
        self.rounds += other.rounds;
        self.fired += other.fired;
        self.passed += other.passed;
        self.failed += other.failed;
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SettingCell {
    pub target: TargetSet,
    pub bob_choice: BobBasis,
    #[serde(flatten)]
    pub tally: SettingTally,
}

/// Aggregate of a seeded run. Conditional rates are `None` when no round
/// was announced.
#[derive(Debug, Clone, Serialize)]
pub struct GameSummary {
    pub d: usize,
    pub seed: u64,
    pub rounds: u64,
    pub announced: u64,
    pub passed: u64,
    pub fire_rate: f64,
    pub std_err_fire: f64,
    pub pass_rate_given_announce: Option<f64>,
    pub fail_rate_given_announce: Option<f64>,
    pub std_err_pass: Option<f64>,
    pub per_setting: Vec<SettingCell>,
}

impl GameSummary {
    fn from_tallies(d: usize, seed: u64, tallies: &[SettingTally]) -> Self {
        let total = tallies
            .iter()
            .fold(SettingTally::default(), |acc, t| acc.merge(t));
        let n = total.rounds as f64;
        let fire_rate = total.fired as f64 / n;
        let (pass, fail, se) = if total.fired == 0 {
            (None, None, None)
        } else {
            let m = total.fired as f64;
            let p = total.passed as f64 / m;
            let q = total.failed as f64 / m;
            (Some(p), Some(q), Some((p * (1.0 - p) / m).sqrt()))
        };
        let per_setting = TargetSet::all(d)
            .flat_map(|t| BobBasis::ALL.map(|b| (t, b)))
            .zip(tallies)
            .map(|((target, bob_choice), tally)| SettingCell {
                target,
                bob_choice,
                tally: *tally,
            })
            .collect();
        Self {
            d,
            seed,
            rounds: total.rounds,
            announced: total.fired,
            passed: total.passed,
            fire_rate,
            std_err_fire: (fire_rate * (1.0 - fire_rate) / n).sqrt(),
            pass_rate_given_announce: pass,
            fail_rate_given_announce: fail,
            std_err_pass: se,
            per_setting,
        }
    }
}

fn cell_index(round: &GameRound, d: usize) -> usize {
    round.target.index(d) * 2 + round.bob_choice as usize
}

pub fn simulate(d: usize, rounds: u64, seed: u64) -> Result<GameSummary> {
    simulate_with(d, rounds, seed, &MaxControl, None)
}

/// Plays `rounds` rounds, optionally on a dedicated pool of `threads`
/// workers. The result does not depend on `threads`.
pub fn simulate_with(
    d: usize,
    rounds: u64,
    seed: u64,
    policy: &dyn AlicePolicy,
    threads: Option<usize>,
) -> Result<GameSummary> {
    if rounds == 0 {
        return Err(Error::Invalid("rounds must be at least 1".into()));
    }
    let game = TargetingGame::new(d)?;
    let cells = 2 * d * d;
    let run = || {
        (0..rounds)
            .into_par_iter()
            .fold(
                || vec![SettingTally::default(); cells],
                |mut acc, i| {
                    let round = game.play_round(policy, &mut round_rng(seed, i));
                    acc[cell_index(&round, d)].record(&round);
                    acc
                },
            )
            .reduce(
                || vec![SettingTally::default(); cells],
                |a, b| a.iter().zip(&b).map(|(x, y)| x.merge(y)).collect(),
            )
    };
    let tallies = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    Ok(GameSummary::from_tallies(d, seed, &tallies))
}
