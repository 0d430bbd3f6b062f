//! Randomised invariants across the crate.

use num_bigint::BigUint;
use proptest::prelude::*;

use fo_lab::bounds::{compute_bounds, verify_report, Advantage, BoundInputs, BoundSet, Count, FailureRoute, Model};
use fo_lab::games::{estimate_runs, run_spec, validate_spec, GameKind, GameSpec, QueryLimits};
use fo_lab::kem::Rejection;
use fo_lab::numeric::Real;
use fo_lab::stats::{estimate_failure_stats, ffp_nk_bound_chebyshev, ffp_nk_bound_gaussian, gaussian_beta_min, StatsRequest};
use fo_lab::toy::{budget_exponent, FailurePredicate, SyntheticFailurePke, ToyScheme};

fn inputs() -> impl Strategy<Value = BoundInputs> {
    (
        (0..3u8, 8u32..400, 1.0f64..4000.0),
        (0u32..70, 0u32..70, 0u32..60),
        (1.0f64..200.0, 1.0f64..200.0, 1.0f64..200.0, 1.0f64..200.0),
        (1.0f64..200.0, 1.0f64..200.0, 0.0f64..150.0),
    )
        .prop_map(|((route, m, gamma), (g, h, d), (ow, ind, cpa, ng), (delta, sigma, beta))| {
            let (model, route) = match route {
                0 => (Model::Rom, FailureRoute::FfpCpa),
                1 => (Model::Qrom, FailureRoute::Chebyshev),
                _ => (Model::Qrom, FailureRoute::Gaussian),
            };
            let mut inp = BoundInputs::new(model, Count::pow2(m), gamma);
            inp.failure_route = route;
            inp.q_g = Count::pow2(g);
            inp.q_h = Count::pow2(h);
            inp.q_d = Count::pow2(d);
            let adv = |e: f64| Some(Advantage::Known(2f64.powf(-e)));
            inp.adv_ow = adv(ow);
            inp.adv_ind = adv(ind);
            inp.adv_ffp_cpa = adv(cpa);
            inp.adv_ffp_ng = adv(ng);
            inp.delta_ik = Some(2f64.powf(-delta));
            inp.sigma = Some(2f64.powf(-sigma));
            inp.beta = Some(2f64.powf(beta).max(gaussian_beta_min()));
            inp
        })
}

fn scheme() -> impl Strategy<Value = ToyScheme> {
    (2u32..5, 3u32..7, 2u64..12, 0..3u8, 1i64..40).prop_map(|(m, r, k, kind, t)| {
        let f = match kind {
            0 => FailurePredicate::randomness_below(t.min(1 << r)),
            1 => FailurePredicate::sum_threshold(t + (1 << r) / 2),
            _ => FailurePredicate::message_randomness_threshold(t + (1 << r) / 2),
        };
        ToyScheme::Synthetic(SyntheticFailurePke::new(m, r, k, f).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bound_reports_recompute_and_round_trip(inp in inputs()) {
        let set = compute_bounds(&inp).unwrap();
        for r in &set.reports {
            verify_report(r).unwrap();
            let t = r.total.as_ref().unwrap().real().unwrap();
            prop_assert!(!t.is_negative() && t <= Real::one());
            prop_assert!(!r.trivial || t == Real::one());
        }
        let text = serde_json::to_string(&set).unwrap();
        let back: BoundSet = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, set);
    }

    #[test]
    fn unknown_advantage_keeps_total_symbolic(inp in inputs()) {
        let inp = BoundInputs { adv_ind: Some(Advantage::Unknown), adv_ow: Some(Advantage::Unknown), ..inp };
        for r in &compute_bounds(&inp).unwrap().reports {
            // a symbolic total is only replaced when its known part already reaches 1
            if let Some(t) = &r.total {
                prop_assert!(r.terms.iter().all(|t| t.value.is_known()) || t.value == 1.0);
            }
        }
    }

    #[test]
    fn nk_bounds_are_monotone_in_queries(lq in 0u32..60, mu in 0.0f64..0.01, ls in 1.0f64..120.0, lb in 0.0f64..60.0) {
        let (q, sigma, beta) = (1u128 << lq, 2f64.powf(-ls), 2f64.powf(lb).max(gaussian_beta_min()));
        let c1 = ffp_nk_bound_chebyshev(q, mu, sigma).unwrap();
        let c2 = ffp_nk_bound_chebyshev(2 * q, mu, sigma).unwrap();
        prop_assert!(c1 <= c2);
        prop_assert!(c1 >= Real::from_f64(mu));
        let g1 = ffp_nk_bound_gaussian(q, mu, beta).unwrap();
        let g2 = ffp_nk_bound_gaussian(2 * q, mu, beta).unwrap();
        prop_assert!(g1 <= g2);
        // doubling q adds at most 2 β^{-1/2} √(2 ln 2) before clamping
        let step = 2.0 / beta.sqrt() * (2.0 * std::f64::consts::LN_2).sqrt();
        prop_assert!(g2.to_f64() - g1.to_f64() <= step * (1.0 + 1e-12));
    }

    #[test]
    fn budget_exponent_bounds_the_spread_term(gamma in 2u64..20000, lg in 65u32..400) {
        // (q_D (q_G + 2 q_D))^2 2^-γ <= (q_G 2^e)^2 at q_D = 2^64, checked on squares
        let q_d = BigUint::from(1u8) << 64usize;
        let q_g = BigUint::from(1u8) << lg as usize;
        let lhs = {
            let v = &q_d * (&q_g + &q_d * 2u32);
            &v * &v
        };
        let shift = (2 * budget_exponent(gamma) + gamma as i64) as usize;
        prop_assert!(lhs <= (&q_g * &q_g) << shift);
    }

    #[test]
    fn count_text_round_trips(k in 0u32..600, a in 1u64..1000) {
        for c in [Count::pow2(k), Count(BigUint::from(a) << k as usize), Count::from_u64(a)] {
            prop_assert_eq!(Count::parse(&c.to_string()).unwrap(), c);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn failure_statistics_are_consistent(s in scheme(), seed in any::<u64>()) {
        let req = StatsRequest {
            trials: 200,
            keys_per_randomness: 4,
            message_sample: None,
            tail_grid: vec![0.0, 0.1, 0.3, 0.5, 0.9],
            seed,
        };
        let st = estimate_failure_stats(&s, &req).unwrap();
        let d = st.delta_ik.value;
        prop_assert!((0.0..=1.0).contains(&d));
        if d <= 0.5 {
            prop_assert!(st.sigma_sq.value <= d * (1.0 - d) + 1e-12);
        }
        for w in st.tail.windows(2) {
            prop_assert!(w[0].value >= w[1].value);
        }
        prop_assert_eq!(estimate_failure_stats(&s, &req).unwrap(), st);
    }

    #[test]
    fn games_are_reproducible_per_seed(s in scheme(), master in any::<u64>(), pick in 0usize..4) {
        let (game, adversary) = [
            (GameKind::IndCcaKem, "plant-failure"),
            (GameKind::IndCpaKem, "simulated:honest-decaps"),
            (GameKind::FfpCca, "extract:random-ciphertext"),
            (GameKind::FfpNk, "best-of-q"),
        ][pick];
        let limits = QueryLimits { q_g: 40, q_h: 8, q_d: 3 };
        let spec = GameSpec { game, adversary: adversary.into(), limits, rejection: Rejection::Explicit };
        validate_spec(&spec, &s).unwrap();
        let a = estimate_runs(40, master, |seed| run_spec(&spec, &s, seed)).unwrap();
        let b = estimate_runs(40, master, |seed| run_spec(&spec, &s, seed)).unwrap();
        prop_assert_eq!(&a, &b);
        for o in &a {
            prop_assert!(o.queries.g <= limits.q_g && o.queries.h <= limits.q_h);
        }
    }
}

#[test]
fn enumerating_adversaries_need_the_whole_message_space() {
    let s = ToyScheme::Synthetic(SyntheticFailurePke::new(4, 6, 16, FailurePredicate::Never).unwrap());
    for (game, adversary) in [
        (GameKind::IndCcaKem, "exhaustive"),
        (GameKind::IndCcaKem, "plant-failure"),
        (GameKind::IndCpaKem, "simulated:honest-decaps"),
        (GameKind::FfpCca, "extract:plant-failure"),
    ] {
        let spec = |q_g| GameSpec {
            game,
            adversary: adversary.into(),
            limits: QueryLimits { q_g, q_h: 4, q_d: 2 },
            rejection: Rejection::Explicit,
        };
        assert!(matches!(validate_spec(&spec(15), &s), Err(fo_lab::Error::InvalidParameter(_))), "{adversary}");
        validate_spec(&spec(18), &s).unwrap();
        estimate_runs(20, 1, |seed| run_spec(&spec(18), &s, seed)).unwrap();
    }
}

#[test]
fn win_rate_estimates_are_unbiased() {
    // every message fails for exactly 1/16 of the randomness, under every key
    let s = fo_lab::config::scheme_preset("fail-1/16").unwrap();
    let spec = GameSpec {
        game: GameKind::FfpCpa,
        adversary: "uniform".into(),
        limits: QueryLimits::default(),
        rejection: Rejection::Explicit,
    };
    let truth = 1.0 / 16.0;
    let (trials, n) = (400u64, 100u64);
    let mut within = 0;
    let mut mean = 0.0;
    for master in 0..n {
        let outs = estimate_runs(trials, master, |seed| run_spec(&spec, &s, seed)).unwrap();
        let rate = outs.iter().filter(|o| o.won).count() as f64 / trials as f64;
        let se = (truth * (1.0 - truth) / trials as f64).sqrt();
        if (rate - truth).abs() <= 5.0 * se {
            within += 1;
        }
        mean += rate / n as f64;
    }
    assert!(within >= 99, "{within} of {n} runs within 5 SE");
    let pooled_se = (truth * (1.0 - truth) / (trials * n) as f64).sqrt();
    assert!((mean - truth).abs() <= 5.0 * pooled_se, "pooled rate {mean}");
}
