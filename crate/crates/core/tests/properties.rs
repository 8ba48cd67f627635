//! Property tests for the kernel, state, game, Bell and LHV invariants.

use num_complex::Complex64 as C;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use qstbell::bell::{self, SettingPair};
use qstbell::game::{self, BobBasis, Verdict};
use qstbell::lhv::{self, LhvStrategy};
use qstbell::linalg::{self, HermitianOperator, StateVector};
use qstbell::states::{self, TargetSet};

fn random_state(dim: usize, seed: u64) -> StateVector {
    StateVector::random(dim, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn random_hermitian(n: usize, seed: u64) -> HermitianOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e = vec![C::new(0.0, 0.0); n * n];
    for i in 0..n {
        e[i * n + i] = C::new(rng.gen_range(-2.0..2.0), 0.0);
        for j in i + 1..n {
            let z = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            e[i * n + j] = z;
            e[j * n + i] = z.conj();
        }
    }
    HermitianOperator::new(n, e).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inner_is_conjugate_symmetric(dim in 1usize..=12, s1: u64, s2: u64) {
        let u = random_state(dim, s1);
        let v = random_state(dim, s2);
        let uv = linalg::inner(&u, &v).unwrap();
        let vu = linalg::inner(&v, &u).unwrap();
        prop_assert!((uv.re - vu.re).abs() <= 1e-14);
        prop_assert!((uv.im + vu.im).abs() <= 1e-14);
    }

    #[test]
    fn norm_is_preserved(da in 1usize..=6, db in 1usize..=6, s1: u64, s2: u64) {
        let u = random_state(da, s1);
        let v = random_state(db, s2);
        prop_assert!(linalg::tensor(&u, &v).unwrap().is_normalized(1e-10));
        prop_assert!(linalg::conj_in_computational(&u).is_normalized(1e-10));
        prop_assert!((u.scaled(C::new(3.0, -1.0)).normalized().unwrap().norm() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn born_joint_sums_to_one(d in 2usize..=6, seed: u64) {
        let state = random_state(d * d, seed);
        let a = states::computational_basis(d).unwrap();
        let f = states::fourier_basis(d).unwrap();
        let mut total = 0.0;
        for x in a.vectors() {
            for y in f.vectors() {
                total += linalg::born_joint(&state, x, y).unwrap();
            }
        }
        prop_assert!((total - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn eigensolver_reconstructs(n in 1usize..=16, seed: u64) {
        let h = random_hermitian(n, seed);
        let eig = linalg::hermitian_eigs(&h);
        prop_assert!(eig.reconstruct().max_abs_diff(&h).unwrap() <= 1e-8);
        prop_assert!(eig.max_residual(&h).unwrap() <= 1e-8);
        prop_assert!(eig.max_orthonormality_error() <= 1e-8);
        for w in eig.eigenvalues.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
        for v in &eig.eigenvectors {
            prop_assert!(v.is_normalized(1e-10));
        }
    }

    #[test]
    fn control_matches_born_probability(d in 2usize..=6, s1: u64, s2: u64) {
        let p1 = random_state(d, s1);
        let p2 = random_state(d, s2);
        let m = states::intermediate(&p1, &p2).unwrap();
        let c = game::control_probability(&p1, &p2).unwrap();
        prop_assert!((linalg::fidelity(&m, &p1).unwrap() - c).abs() <= 1e-10);
        prop_assert!((linalg::fidelity(&m, &p2).unwrap() - c).abs() <= 1e-10);
    }

    #[test]
    fn operator_expectation_matches_bell_value(d in 2usize..=3, seed: u64) {
        let state = random_state(d * d, seed);
        let b = bell::bell_operator(d).unwrap();
        let op = b.expectation(&state).unwrap();
        let sum = bell::bell_value(&state, d).unwrap();
        prop_assert!((op - sum).abs() <= 1e-9);
    }

    #[test]
    fn random_state_never_beats_top_eigenvalue(d in 2usize..=4, seed: u64) {
        let state = random_state(d * d, seed);
        prop_assert!(bell::bell_value(&state, d).unwrap() <= bell::quantum_bound(d) + 1e-9);
    }

    #[test]
    fn lhv_scores_are_even_and_bounded(d in 2usize..=6, a in 0usize..6, ap in 0usize..6, fires: u64) {
        let (a, ap) = (a % d, ap % d);
        let fires = fires & ((1u64 << (d * d)) - 1);
        let s = LhvStrategy::new(a, ap, fires, d).unwrap();
        let v = lhv::score_strategy(&s, d);
        prop_assert_eq!(v % 2, 0);
        prop_assert!(v <= 2);
    }

    #[test]
    fn mixtures_stay_below_support_max(d in 2usize..=6, seed: u64, size in 1usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mask = (1u64 << (d * d)) - 1;
        let support: Vec<LhvStrategy> = (0..size)
            .map(|_| LhvStrategy::new(rng.gen_range(0..d), rng.gen_range(0..d), rng.gen::<u64>() & mask, d).unwrap())
            .collect();
        let raw: Vec<f64> = (0..size).map(|_| rng.gen::<f64>() + 1e-3).collect();
        let total: f64 = raw.iter().sum();
        let mixture: Vec<(f64, LhvStrategy)> =
            raw.iter().map(|w| w / total).zip(support.iter().copied()).collect();
        let best = support.iter().map(|s| lhv::score_strategy(s, d)).max().unwrap() as f64;
        let value = lhv::mixture_score(&mixture, d);
        prop_assert!(value <= best + 1e-12);
        prop_assert!(value <= 2.0 + 1e-12);
    }

    #[test]
    fn round_bookkeeping_is_consistent(d in 2usize..=6, seed: u64, index: u64) {
        let round = game::play_round(d, &mut game::round_rng(seed, index)).unwrap();
        let declined = round.announcement == game::Announcement::Declined;
        prop_assert_eq!(declined, !round.alice_fired);
        prop_assert_eq!(round.verdict == Verdict::Declined, !round.alice_fired);
        prop_assert_eq!(round.bob_outcome.is_some(), round.alice_fired);
        let again = game::play_round(d, &mut game::round_rng(seed, index)).unwrap();
        prop_assert_eq!(round, again);
    }

    #[test]
    fn seesaw_effects_admit_no_ascent(seed: u64) {
        let d = 3;
        let trial = bell::seesaw_from(d, &random_state(d * d, seed), &Default::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for eps in [0.1, 0.03, 0.01] {
            let perturbed = bell::perturb_effects(&trial.effects, eps, &mut rng).unwrap();
            let b = bell::bell_operator_for_effects(d, &perturbed).unwrap();
            let (top, _) = linalg::hermitian_eigs(&b).top();
            prop_assert!(top <= trial.value + 1e-9, "eps {eps}: {top} > {}", trial.value);
        }
    }
}

#[test]
fn mutually_unbiased_for_all_dims() {
    for d in 2..=6 {
        let a = states::computational_basis(d).unwrap();
        let f = states::fourier_basis(d).unwrap();
        for x in a.vectors() {
            for y in f.vectors() {
                assert!((linalg::fidelity(x, y).unwrap() - 1.0 / d as f64).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn grid_states_are_equidistant() {
    for d in 2..=6 {
        let expected = (1.0 + 1.0 / (d as f64).sqrt()) / 2.0;
        let a = states::computational_basis(d).unwrap();
        let f = states::fourier_basis(d).unwrap();
        let grid = states::IntermediateGrid::new(d).unwrap();
        for (t, m) in grid.iter() {
            assert!(m.is_normalized(1e-10));
            let fa = linalg::fidelity(a.vector(t.k), m).unwrap();
            let ff = linalg::fidelity(f.vector(t.l), m).unwrap();
            assert!((fa - expected).abs() <= 1e-10, "d={d} {t:?}");
            assert!((ff - expected).abs() <= 1e-10, "d={d} {t:?}");
            let general = states::intermediate(a.vector(t.k), f.vector(t.l)).unwrap();
            assert!((linalg::fidelity(&general, m).unwrap() - 1.0).abs() <= 1e-10);
        }
    }
}

#[test]
fn steering_prepares_every_grid_state() {
    for d in 2..=6 {
        let psi = states::max_entangled(d).unwrap();
        for t in TargetSet::all(d) {
            let bob =
                linalg::contract_alice(&psi, &states::steering_vector(d, t).unwrap()).unwrap();
            assert!((bob.norm_sqr() - 1.0 / d as f64).abs() <= 1e-10);
            let m = states::grid_intermediate(d, t.k, t.l).unwrap();
            assert!(linalg::fidelity(&bob.normalized().unwrap(), &m).unwrap() >= 1.0 - 1e-9);
        }
    }
}

#[test]
fn chsh_geometry_in_two_dimensions() {
    let m = |k, l| states::grid_intermediate(2, k, l).unwrap();
    let first = [m(0, 0), m(1, 1)];
    let second = [m(0, 1), m(1, 0)];
    for basis in [&first, &second] {
        assert!(linalg::fidelity(&basis[0], &basis[1]).unwrap() <= 1e-10);
    }
    for x in &first {
        for y in &second {
            assert!((linalg::fidelity(x, y).unwrap() - 0.5).abs() <= 1e-10);
        }
    }
    let v = bell::bell_value(&states::max_entangled(2).unwrap(), 2).unwrap();
    assert!((v - 2.0 * 2f64.sqrt()).abs() <= 1e-9);
}

#[test]
fn shift_rules_reproduce_qutrit_table() {
    let va = bell::ValueAssignment { d: 3 };
    let members = |i| va.mset(i).iter().map(|t| (t.k, t.l)).collect::<Vec<_>>();
    assert_eq!(members(0), [(0, 0), (1, 1), (2, 2)]);
    assert_eq!(members(1), [(0, 1), (1, 2), (2, 0)]);
    assert_eq!(members(2), [(0, 2), (1, 0), (2, 1)]);
    for pair in SettingPair::all(3) {
        assert_eq!(
            va.shifted_outcome(pair),
            bell::correlated_outcome(pair),
            "{pair:?}"
        );
    }
    for d in 2..=6 {
        let va = bell::ValueAssignment { d };
        for pair in SettingPair::all(d) {
            assert_eq!(va.shifted_outcome(pair), bell::correlated_outcome(pair));
        }
    }
}

#[test]
fn top_eigenvalue_dominates_maximally_entangled_value() {
    for d in 2..=4 {
        let b = bell::bell_operator(d).unwrap();
        let eig = linalg::hermitian_eigs(&b);
        let (top, v) = eig.top();
        let psi = states::max_entangled(d).unwrap();
        let value = bell::bell_value(&psi, d).unwrap();
        assert!(top >= value - 1e-8);
        assert!((top - value).abs() <= 1e-8);
        assert!(linalg::fidelity(v, &psi).unwrap() >= 1.0 - 1e-8);
        assert!((b.trace() - bell::bell_operator_trace(d).unwrap()).abs() <= 1e-9);
    }
}

#[test]
fn lhv_oracles_agree() {
    for d in 2..=4 {
        assert_eq!(lhv::enumerate_max(d).unwrap().max_value, 2);
        assert_eq!(lhv::analytic_max(d).unwrap().max_value, 2);
    }
    for d in 5..=6 {
        assert_eq!(lhv::analytic_max(d).unwrap().max_value, 2);
    }
}

#[test]
fn sampled_strategies_never_exceed_two() {
    for d in [5usize, 6] {
        let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
        let mask = (1u64 << (d * d)) - 1;
        let best = (0..1_000_000)
            .map(|_| {
                let s = LhvStrategy {
                    a: rng.gen_range(0..d),
                    a_prime: rng.gen_range(0..d),
                    fires: rng.gen::<u64>() & mask,
                };
                lhv::score_strategy(&s, d)
            })
            .max()
            .unwrap();
        assert!(best <= 2, "d={d}: {best}");
    }
}

#[test]
fn pass_probability_is_homogeneous_analytically() {
    for d in 2..=6 {
        let g = game::TargetingGame::new(d).unwrap();
        let a = states::computational_basis(d).unwrap();
        let f = states::fourier_basis(d).unwrap();
        let expected = game::control_probability(a.vector(0), f.vector(0)).unwrap();
        for t in TargetSet::all(d) {
            for b in BobBasis::ALL {
                assert!(
                    (g.pass_probability(t, b) - expected).abs() <= 1e-10,
                    "d={d} {t:?} {b:?}"
                );
            }
        }
    }
}

#[test]
fn pass_rate_homogeneity_chi_squared() {
    let d = 3;
    let s = game::simulate(d, 200_000, 7).unwrap();
    let cells: Vec<_> = s.per_setting.iter().map(|c| c.tally).collect();
    let total_fired: f64 = cells.iter().map(|t| t.fired as f64).sum();
    let total_pass: f64 = cells.iter().map(|t| t.passed as f64).sum();
    let p = total_pass / total_fired;
    let chi2: f64 = cells
        .iter()
        .map(|t| {
            let n = t.fired as f64;
            let (ep, ef) = (n * p, n * (1.0 - p));
            (t.passed as f64 - ep).powi(2) / ep + (t.failed as f64 - ef).powi(2) / ef
        })
        .sum();
    let dist = ChiSquared::new((cells.len() - 1) as f64).unwrap();
    let p_value = 1.0 - dist.cdf(chi2);
    assert!(p_value > 1e-3, "chi2 = {chi2}, p = {p_value}");
}

#[test]
fn fire_is_uncorrelated_with_bob_choice() {
    let d = 3;
    let n = 100_000u64;
    let (mut sx, mut sy, mut sxy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let r = game::play_round(d, &mut game::round_rng(11, i)).unwrap();
        let x = r.alice_fired as u8 as f64;
        let y = (r.bob_choice == BobBasis::APrime) as u8 as f64;
        sx += x;
        sy += y;
        sxy += x * y;
    }
    let nf = n as f64;
    let (mx, my) = (sx / nf, sy / nf);
    let cov = sxy / nf - mx * my;
    let corr = cov / (mx * (1.0 - mx) * my * (1.0 - my)).sqrt();
    assert!(corr.abs() < 4.0 / nf.sqrt(), "corr = {corr}");
}

#[test]
fn monte_carlo_estimate_matches_bell_value() {
    for d in [2usize, 3] {
        let rounds = 100_000 * 2 * d as u64;
        let s = game::simulate(d, rounds, 2024).unwrap();
        let (est, se) = bell::estimate_from_game(&s).unwrap();
        let exact = bell::bell_value(&states::max_entangled(d).unwrap(), d).unwrap();
        assert!(
            (est - exact).abs() <= 5.0 * se,
            "d={d}: {est} ± {se} vs {exact}"
        );
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let one = game::simulate_with(3, 20_000, 5, &game::MaxControl, Some(1)).unwrap();
    let four = game::simulate_with(3, 20_000, 5, &game::MaxControl, Some(4)).unwrap();
    assert_eq!(
        serde_json::to_string(&one).unwrap(),
        serde_json::to_string(&four).unwrap()
    );
}
