use bandit_core::environment::{build_linear_orthogonal_env, build_logistic_noisy_env, Context, ContextualEnv, RewardModel};
use bandit_core::evaluation::{d_lin, d_log, epl_bound, simple_regret, EvalMode};
use bandit_core::mathkit::kappa;
use bandit_core::policies::{AlgParams, AlgState, PolicySnapshot, Variant};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn unit_ball(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let n = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let r: f64 = rng.random::<f64>().powf(1.0 / d as f64);
    g.iter().map(|v| v / n * r).collect()
}

fn finite_env(seed: u64, d: usize, contexts: usize, arms: usize, model: RewardModel) -> ContextualEnv {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let star: Vec<f64> = (0..d).map(|_| 2.0 * rng.sample::<f64, _>(StandardNormal)).collect();
    let mut probs: Vec<f64> = (0..contexts).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    let head: f64 = probs[..contexts - 1].iter().sum();
    probs[contexts - 1] = 1.0 - head;
    let ctxs = probs
        .into_iter()
        .map(|probability| Context {
            probability,
            arms: (0..arms).map(|_| unit_ball(&mut rng, d)).collect(),
        })
        .collect();
    ContextualEnv::finite(star, model, ctxs, None).unwrap()
}

fn play(env: &ContextualEnv, alg: &mut AlgState, rounds: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut pulls = Vec::new();
    for _ in 0..rounds {
        let (_, arms) = env.sample_round(rng);
        let a = alg.select(&arms, rng).unwrap();
        let x = env.sample_reward(&arms[a], rng);
        alg.observe(a, &arms[a], x).unwrap();
        if pulls.len() < arms.len() {
            pulls.resize(arms.len(), 0);
        }
        pulls[a] += 1;
    }
    pulls
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn greedy_choice_ignores_positive_scale(
        theta in prop::collection::vec(-3.0..3.0f64, 3),
        c in 1e-3..1e3f64,
        seed in 0u64..1000,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let arms: Vec<Vec<f64>> = (0..6).map(|_| unit_ball(&mut rng, 3)).collect();
        let scaled: Vec<f64> = theta.iter().map(|t| t * c).collect();
        prop_assert_eq!(
            PolicySnapshot::new(theta).act(&arms).unwrap(),
            PolicySnapshot::new(scaled).act(&arms).unwrap()
        );
    }

    #[test]
    fn regret_is_at_most_twice_prediction_error(
        seed in 0u64..10_000,
        theta in prop::collection::vec(-3.0..3.0f64, 3),
        logistic in prop::bool::ANY,
    ) {
        let model = if logistic { RewardModel::Logistic } else { RewardModel::Linear { noise_std: 1.0 } };
        let env = finite_env(seed, 3, 4, 5, model);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let sr = simple_regret(&PolicySnapshot::new(theta.clone()), &env, EvalMode::Exact, &mut rng).unwrap().value;
        let dist = if logistic { d_log(&theta, &env).unwrap() } else { d_lin(&theta, &env).unwrap() };
        prop_assert!(sr >= 0.0);
        prop_assert!(sr <= 2.0 * dist);
    }

    #[test]
    fn potential_sum_respects_bound(seed in 0u64..10_000, simple in prop::bool::ANY) {
        let env = finite_env(seed, 4, 6, 5, RewardModel::Linear { noise_std: 0.5 });
        let variant = if simple { Variant::SimpleLinTs } else { Variant::MuLin };
        let mut alg = AlgState::new(variant, 4, AlgParams::default(), false).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        play(&env, &mut alg, 300, &mut rng);
        let mut sum = 0.0;
        for (i, rec) in alg.history().iter().enumerate() {
            sum += rec.potential;
            prop_assert!(sum <= epl_bound(i + 1, 4, 1.0, 1.0).unwrap());
        }
    }
}

#[test]
fn zero_regret_exactly_for_optimal_policy() {
    let env = finite_env(7, 3, 5, 4, RewardModel::Logistic);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let star = PolicySnapshot::new(env.theta_star().to_vec());
    assert_eq!(simple_regret(&star, &env, EvalMode::Exact, &mut rng).unwrap().value, 0.0);
    let flipped = PolicySnapshot::new(env.theta_star().iter().map(|v| -v).collect());
    assert!(simple_regret(&flipped, &env, EvalMode::Exact, &mut rng).unwrap().value > 0.0);
}

#[test]
fn monte_carlo_tracks_exact_regret() {
    let env = finite_env(9, 3, 6, 4, RewardModel::Linear { noise_std: 1.0 });
    let policy = PolicySnapshot::new(vec![0.3, -1.0, 0.5]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let exact = simple_regret(&policy, &env, EvalMode::Exact, &mut rng).unwrap().value;
    let trials = 40;
    let mut close = 0;
    for _ in 0..trials {
        let est = simple_regret(&policy, &env, EvalMode::MonteCarlo { samples: 100_000 }, &mut rng).unwrap();
        if (est.value - exact).abs() <= 4.0 * est.stderr().unwrap() {
            close += 1;
        }
    }
    assert!(close as f64 >= 0.95 * trials as f64, "{close}/{trials}");
}

#[test]
fn curvature_weights_stay_in_range() {
    let env = build_logistic_noisy_env(3, 2.0).unwrap();
    let s = env.s_bound();
    let k = kappa(s).unwrap();
    for (variant, fast) in [(Variant::MuLog, false), (Variant::Thats, false), (Variant::Thats, true)] {
        let params = AlgParams {
            s,
            horizon: 60,
            fast_thats: fast,
            ..AlgParams::default()
        };
        let mut alg = AlgState::new(variant, 3, params, true).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        play(&env, &mut alg, 60, &mut rng);
        let weights: Vec<f64> = alg.history().iter().map(|r| r.weight.unwrap()).collect();
        assert!(weights.iter().all(|w| *w > 0.0 && *w <= 0.25));
        assert!(weights.iter().all(|w| k * w >= 1.0 - 1e-9));
        for arm in &env.contexts().unwrap()[0].arms {
            let l = alg.design().quad_form_inv(arm).unwrap();
            let v = alg.gram().quad_form_inv(arm).unwrap();
            assert!(l >= v * (1.0 - 1e-12));
        }
        assert_eq!(alg.round(), alg.data().len());
    }
}

#[test]
fn max_uncertainty_never_rises_on_finite_env() {
    let env = finite_env(12, 4, 10, 5, RewardModel::Linear { noise_std: 1.0 });
    let mut alg = AlgState::new(Variant::MuLin, 4, AlgParams::default(), false).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let integrated = |alg: &AlgState| -> f64 {
        env.contexts()
            .unwrap()
            .iter()
            .map(|c| c.probability * c.arms.iter().map(|a| alg.design().inv_norm(a).unwrap()).fold(0.0, f64::max))
            .sum()
    };
    let mut prev = integrated(&alg);
    for _ in 0..300 {
        play(&env, &mut alg, 1, &mut rng);
        let now = integrated(&alg);
        assert!(now <= prev + 1e-10);
        prev = now;
    }
}

#[test]
fn simple_lin_ts_favours_the_optimal_arm() {
    let k = 8;
    let env = build_linear_orthogonal_env(8, k, 5.0).unwrap();
    let mut alg = AlgState::new(Variant::SimpleLinTs, 8, AlgParams::default(), false).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let pulls = play(&env, &mut alg, 10_000, &mut rng);
    assert!(pulls[0] as f64 / 10_000.0 > 1.0 / k as f64);
}

#[test]
fn thats_explores_noisy_arms_more_than_simple_lin_ts() {
    let d = 10;
    let env = build_logistic_noisy_env(d, 2.0).unwrap();
    let share = |variant: Variant| {
        let params = AlgParams {
            s: env.s_bound(),
            horizon: 2000,
            fast_thats: true,
            ..AlgParams::default()
        };
        let mut alg = AlgState::new(variant, d, params, true).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let pulls = play(&env, &mut alg, 2000, &mut rng);
        (pulls[d - 1] + pulls[d]) as f64 / 2000.0
    };
    let thats = share(Variant::Thats);
    let lin = share(Variant::SimpleLinTs);
    assert!(thats > lin, "thats {thats} vs simplelints {lin}");
}
