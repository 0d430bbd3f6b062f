//! The nine acceptance criteria, one PASS/FAIL line each. Runtime limits are
//! part of each criterion and are checked too.

use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use fo_lab::bounds::{compute_bounds, crosscheck, Advantage, BoundInputs, Count, FailureRoute, Model};
use fo_lab::cli::execute;
use fo_lab::config::{scheme_preset, Command, RunConfig, SchemeConfig};
use fo_lab::games::{
    combined_se, estimate_runs, run_spec, summarize, two_proportion_test, GameKind, GameSpec, QueryLimits, Summary,
};
use fo_lab::kem::Rejection;
use fo_lab::numeric::Real;
use fo_lab::oracle::stream;
use fo_lab::pke::PkeScheme;
use fo_lab::report::Results;
use fo_lab::stats::{estimate_failure_stats, ffp_nk_bound_chebyshev, StatsRequest};
use fo_lab::toy::{
    exact_failure_stats, gamma_exact_toy, gamma_frodo, gamma_hqc, preset, FailurePredicate, KeyLeak,
    SyntheticFailurePke, ToyScheme, PRESET_NAMES,
};

type Outcome = Result<String, String>;

fn synthetic(msg_bits: u32, rand_bits: u32, keys: u64, f: FailurePredicate) -> ToyScheme {
    ToyScheme::Synthetic(SyntheticFailurePke::new(msg_bits, rand_bits, keys, f).unwrap())
}

fn spec(game: GameKind, adversary: &str, limits: QueryLimits, rejection: Rejection) -> GameSpec {
    GameSpec { game, adversary: adversary.into(), limits, rejection }
}

fn run(spec: &GameSpec, scheme: &ToyScheme, trials: u64, master: u64) -> Result<Summary, String> {
    estimate_runs(trials, master, |s| run_spec(spec, scheme, s)).map(|o| summarize(&o)).map_err(|e| e.to_string())
}

fn toy_gamma(scheme: &ToyScheme) -> f64 {
    let keys = scheme.keygen(&mut stream(0, "acceptance/spread"));
    gamma_exact_toy(scheme, &keys).unwrap().gamma
}

fn gamma_reproduction() -> Outcome {
    let want = [("frodo-640", 10240u64), ("frodo-976", 15616), ("frodo-1344", 10752)];
    for (name, g) in want {
        let Some(fo_lab::toy::SpreadnessParams::Frodo { rows, cols, p0_num, p0_den }) = preset(name) else {
            return Err(format!("{name} is not a Frodo preset"));
        };
        let got = gamma_frodo(rows, cols, p0_num, p0_den).map_err(|e| e.to_string())?;
        if got != g {
            return Err(format!("{name}: gamma {got} != {g}"));
        }
    }
    for (n, w, floor) in [(17664u64, 75u64, 694u64), (35840, 114, 1105), (57600, 149, 1490)] {
        let h = gamma_hqc(n, w).map_err(|e| e.to_string())?;
        if h.binomial <= BigUint::one() << floor as usize {
            return Err(format!("C({n},{w}) does not exceed 2^{floor}"));
        }
        if h.log2_binomial_floor != floor {
            return Err(format!("floor(log2 C({n},{w})) = {} != {floor}", h.log2_binomial_floor));
        }
    }
    Ok("frodo 10240/15616/10752; log2 C(n,w) > 694/1105/1490".into())
}

fn budget_exponents() -> Outcome {
    let cfg = RunConfig { command: Some(Command::Spread), ..RunConfig::default() };
    let (report, status) = execute(&cfg).map_err(|e| e.to_string())?;
    let Results::Spread(s) = report.results else { return Err("not a spread report".into()) };
    let want = [-5055i64, -7743, -5311, -629, -1040, -1425];
    let got: Vec<i64> = s.rows.iter().map(|r| r.budget_exponent).collect();
    if status != 0 || got != want || s.rows.iter().map(|r| r.name.as_str()).ne(PRESET_NAMES) {
        return Err(format!("exponents {got:?}"));
    }
    for r in &s.rows {
        if r.budget != format!("q_G * 2^{}", r.budget_exponent) {
            return Err(format!("{}: printed {:?}", r.name, r.budget));
        }
    }
    Ok(format!("printed exponents {got:?}"))
}

fn correctness_roundtrip() -> Outcome {
    let cfg = RunConfig { command: Some(Command::Demo), trials: 10_000, seed: 3, ..RunConfig::default() };
    let (report, _) = execute(&cfg).map_err(|e| e.to_string())?;
    let Results::Demo(d) = report.results else { return Err("not a demo report".into()) };
    if d.cycles != 10_000 || d.mismatches != 0 || d.rejections != 0 {
        return Err(format!("{d:?}"));
    }
    Ok(format!("{} cycles, 0 mismatches, 0 rejections", d.cycles))
}

fn guess_bound() -> Outcome {
    let q_d = 4u64;
    let limits = QueryLimits { q_d, ..QueryLimits::default() };
    let mut lines = Vec::new();
    for gamma in [4u32, 6, 8] {
        let scheme = synthetic(4, gamma, 16, FailurePredicate::Never);
        let g = toy_gamma(&scheme);
        if g != gamma as f64 {
            return Err(format!("scheme spreadness {g} != {gamma}"));
        }
        let s = run(&spec(GameKind::IndCcaKem, "random-ciphertext", limits, Rejection::Explicit), &scheme, 10_000, 40 + gamma as u64)?;
        if s.queries_g != 0 {
            return Err(format!("adversary made {} G queries", s.queries_g));
        }
        let bound = q_d as f64 * 2f64.powi(-(gamma as i32));
        let (rate, se) = (s.guess_rate(), s.guess_se());
        if rate > bound + 5.0 * se {
            return Err(format!("gamma {gamma}: Pr[GUESS] = {rate} > {bound} + 5*{se}"));
        }
        lines.push(format!("γ={gamma}: {rate:.4} <= {bound:.4}"));
    }
    Ok(lines.join(", "))
}

fn reduction_soundness() -> Outcome {
    let trials = 2000;
    let schemes = [
        ("key-dependent", synthetic(4, 6, 16, FailurePredicate::sum_threshold(70))),
        ("r<8", synthetic(4, 6, 16, FailurePredicate::randomness_below(8))),
        ("parity", synthetic(3, 5, 8, FailurePredicate::ParityMatch { window: 6 })),
        ("correct", synthetic(4, 6, 16, FailurePredicate::Never)),
    ];
    let adversaries = ["plant-failure", "honest-decaps", "random-ciphertext", "exhaustive", "blind-1"];
    let mut configs = 0;
    let mut extracted = 0u64;
    let mut worst_slack = f64::INFINITY;
    for (label, scheme) in &schemes {
        let gamma = toy_gamma(scheme);
        for rejection in [Rejection::Explicit, Rejection::Implicit] {
            for q_d in [2u64, 8] {
                let limits = QueryLimits { q_d, ..QueryLimits::default() };
                for adv in adversaries {
                    let master = 1000 + configs;
                    let cca = run(&spec(GameKind::IndCcaKem, adv, limits, rejection), scheme, trials, master)?;
                    let cpa = run(&spec(GameKind::IndCpaKem, &format!("simulated:{adv}"), limits, rejection), scheme, trials, master)?;
                    let ffp_spec = spec(GameKind::FfpCca, &format!("extract:{adv}"), limits, rejection);
                    let outs = estimate_runs(trials, master, |s| run_spec(&ffp_spec, scheme, s)).map_err(|e| e.to_string())?;
                    for o in &outs {
                        if let Some(m) = o.output {
                            // the game decides `won` by decrypting with the secret key
                            if !o.won {
                                return Err(format!("{label}/{adv}: extracted {m:?} does not fail"));
                            }
                            extracted += 1;
                        }
                    }
                    let ffp = summarize(&outs);
                    let se = combined_se(&[cca.std_error, cpa.std_error, ffp.std_error]);
                    let rhs = cpa.win_rate + ffp.win_rate + q_d as f64 * 2f64.powf(-gamma) + 5.0 * se;
                    if cca.win_rate > rhs {
                        return Err(format!(
                            "{label}/{adv}/{rejection:?}/q_D={q_d}: {} > {} + {} + ...",
                            cca.win_rate, cpa.win_rate, ffp.win_rate
                        ));
                    }
                    worst_slack = worst_slack.min(rhs - cca.win_rate);
                    configs += 1;
                }
            }
        }
    }
    if extracted == 0 {
        return Err("no plaintext was ever extracted".into());
    }
    Ok(format!("{configs} configurations, {extracted} extracted plaintexts all fail, min slack {worst_slack:.4}"))
}

fn midpoints(key_count: u64) -> Vec<f64> {
    (0..key_count).map(|j| (j as f64 + 0.5) / key_count as f64).collect()
}

fn stats_equivalence() -> Outcome {
    let cases = [
        synthetic(2, 6, 8, FailurePredicate::sum_threshold(64)),
        synthetic(2, 6, 4, FailurePredicate::Linear { m_weight: 1, r_weight: 1, k_weight: 2, threshold: 60 }),
        synthetic(3, 5, 8, FailurePredicate::ParityMatch { window: 8 }),
        synthetic(2, 8, 8, FailurePredicate::Linear { m_weight: 0, r_weight: 1, k_weight: 16, threshold: 200 }),
        synthetic(2, 6, 4, FailurePredicate::Linear { m_weight: 8, r_weight: -1, k_weight: 4, threshold: 20 }),
        synthetic(1, 6, 8, FailurePredicate::message_randomness_threshold(40)),
    ];
    let mut worst = 0.0f64;
    for (i, scheme) in cases.iter().enumerate() {
        let keys = scheme.as_synthetic().unwrap().key_count;
        let req = StatsRequest {
            trials: 4000,
            keys_per_randomness: 2048,
            message_sample: None,
            tail_grid: midpoints(keys),
            seed: 500 + i as u64,
        };
        let est = estimate_failure_stats(scheme, &req).map_err(|e| e.to_string())?;
        let exact = exact_failure_stats(scheme).map_err(|e| e.to_string())?;
        let mut check = |what: String, v: f64, se: f64, truth: f64| {
            let z = if se > 0.0 { (v - truth).abs() / se } else if v == truth { 0.0 } else { f64::INFINITY };
            worst = worst.max(z);
            if z < 5.0 {
                Ok(())
            } else {
                Err(format!("case {i} {what}: estimate {v} (se {se}) vs exact {truth}"))
            }
        };
        check("delta".into(), est.delta_ik.value, est.delta_ik.std_error, exact.delta_f64())?;
        check("sigma".into(), est.sigma.value, est.sigma.std_error, exact.sigma())?;
        for p in &est.tail {
            check(format!("tail({})", p.t), p.value, p.std_error, exact.tail(p.t))?;
        }
    }
    Ok(format!("{} parameterizations, max |z| = {worst:.2}", cases.len()))
}

fn nk_dominance() -> Outcome {
    let instances = [
        synthetic(2, 16, 1024, FailurePredicate::sum_threshold((1 << 16) + 1000)),
        synthetic(3, 16, 1024, FailurePredicate::Linear { m_weight: 64, r_weight: 1, k_weight: 1, threshold: 66_000 }),
        synthetic(2, 16, 512, FailurePredicate::ParityMatch { window: 40 }),
    ];
    let trials = 10_000;
    let mut checked = 0;
    let mut tightest = f64::INFINITY;
    for (i, scheme) in instances.iter().enumerate() {
        let exact = exact_failure_stats(scheme).map_err(|e| e.to_string())?;
        let (delta, sigma) = (exact.delta_f64(), exact.sigma());
        let msgs = scheme.message_space().size();
        let mut searchers: Vec<(String, u64, u64)> = vec![("uniform".into(), 0, 0), ("first".into(), 0, 0)];
        for q in [1u64, 8, 64] {
            searchers.push(("best-of-q".into(), q, q));
        }
        for inner in ["uniform", "never"] {
            searchers.push((format!("nk-from:{inner}"), 0, 0));
        }
        searchers.push(("nk-from:best-of-q".into(), 8, 8));
        searchers.push(("nk-from:brute-force".into(), msgs, msgs));
        for (name, q_g, q) in searchers {
            let limits = QueryLimits { q_g, ..QueryLimits::default() };
            let nk = spec(GameKind::FfpNk, &name, limits, Rejection::Explicit);
            let outs = estimate_runs(trials, 7000 + i as u64, |s| run_spec(&nk, scheme, s)).map_err(|e| e.to_string())?;
            if let Some(o) = outs.iter().find(|o| o.queries.g > q) {
                return Err(format!("{name} made {} > {q} G queries", o.queries.g));
            }
            let s = summarize(&outs);
            let bound = ffp_nk_bound_chebyshev(q as u128, delta, sigma).map_err(|e| e.to_string())?.to_f64();
            if s.win_rate > bound + 5.0 * s.std_error {
                return Err(format!("instance {i} {name}: win {} > bound {bound} + 5*{}", s.win_rate, s.std_error));
            }
            tightest = tightest.min(bound + 5.0 * s.std_error - s.win_rate);
            checked += 1;
        }
    }
    Ok(format!("{checked} searcher/instance pairs under the bound, min slack {tightest:.2e}"))
}

fn random_inputs(rng: &mut ChaCha20Rng) -> BoundInputs {
    let model = if rng.gen_bool(0.3) { Model::Rom } else { Model::Qrom };
    let route = match (model, rng.gen_range(0..3)) {
        (Model::Rom, _) | (_, 0) => FailureRoute::FfpCpa,
        (_, 1) => FailureRoute::Chebyshev,
        _ => FailureRoute::Gaussian,
    };
    let count = |rng: &mut ChaCha20Rng, lo: u32, hi: u32| Count::pow2(rng.gen_range(lo..hi)) ;
    let adv = |rng: &mut ChaCha20Rng| {
        if rng.gen_bool(0.1) {
            Advantage::Known(0.0)
        } else {
            Advantage::Known(2f64.powf(-rng.gen_range(1.0..300.0)))
        }
    };
    let mut inp = BoundInputs::new(model, count(rng, 8, 512), rng.gen_range(1.0..12000.0));
    inp.failure_route = route;
    inp.q_g = Count(BigUint::from(rng.gen_range(1u64..1000)) * count(rng, 0, 80).0);
    inp.q_h = count(rng, 0, 80);
    inp.q_d = if rng.gen_bool(0.1) { Count::from_u64(0) } else { count(rng, 0, 70) };
    inp.adv_ow = Some(adv(rng));
    inp.adv_ind = Some(adv(rng));
    inp.adv_ffp_cpa = Some(adv(rng));
    inp.adv_ffp_ng = Some(adv(rng));
    inp.delta_ik = Some(2f64.powf(-rng.gen_range(1.0..250.0)));
    inp.sigma = Some(2f64.powf(-rng.gen_range(1.0..250.0)));
    inp.beta = Some(2f64.powf(rng.gen_range(-2.0..200.0)).max(fo_lab::stats::gaussian_beta_min()));
    inp
}

/// Smallest route total; with `dual`, every route is also evaluated on the
/// rational path.
fn best_total(inp: &BoundInputs, dual: bool) -> Result<Real, String> {
    let set = compute_bounds(inp).map_err(|e| e.to_string())?;
    let mut best: Option<Real> = None;
    for r in &set.reports {
        let (dev, _) = if dual { crosscheck(r).map_err(|e| e.to_string())? } else { (0.0, 0.0) };
        if !(dev <= 1e-12) {
            return Err(format!("dual-path deviation {dev:e} on {inp:?}"));
        }
        let t = r.total.as_ref().ok_or("unknown total")?.real().map_err(|e| e.to_string())?;
        if t.is_negative() || t > Real::one() {
            return Err(format!("total outside [0, 1] on {inp:?}"));
        }
        best = Some(match best {
            Some(b) => b.min(t),
            None => t,
        });
    }
    best.ok_or_else(|| "no route".into())
}

fn scale(a: Option<Advantage>) -> Option<Advantage> {
    match a {
        Some(Advantage::Known(v)) => Some(Advantage::Known((2.0 * v).min(1.0))),
        other => other,
    }
}

fn bound_properties() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(2024);
    let grids = 1000;
    let mut checks = 0;
    for _ in 0..grids {
        let inp = random_inputs(&mut rng);
        let base = best_total(&inp, true)?;
        let double = |c: &Count| Count(&c.0 * 2u32 + 1u32);
        let mut up: Vec<(&str, BoundInputs)> = Vec::new();
        up.push(("q_g", BoundInputs { q_g: double(&inp.q_g), ..inp.clone() }));
        up.push(("q_h", BoundInputs { q_h: double(&inp.q_h), ..inp.clone() }));
        up.push(("q_d", BoundInputs { q_d: double(&inp.q_d), ..inp.clone() }));
        up.push(("adv_ow", BoundInputs { adv_ow: scale(inp.adv_ow), ..inp.clone() }));
        up.push(("adv_ind", BoundInputs { adv_ind: scale(inp.adv_ind), ..inp.clone() }));
        up.push(("adv_ffp_cpa", BoundInputs { adv_ffp_cpa: scale(inp.adv_ffp_cpa), ..inp.clone() }));
        up.push(("adv_ffp_ng", BoundInputs { adv_ffp_ng: scale(inp.adv_ffp_ng), ..inp.clone() }));
        for (what, other) in up {
            if best_total(&other, false)? < base {
                return Err(format!("total decreased when raising {what} on {inp:?}"));
            }
            checks += 1;
        }
        let down = [
            ("gamma", BoundInputs { gamma: inp.gamma + rng.gen_range(1.0..64.0), ..inp.clone() }),
            ("message_space", BoundInputs { message_space: Count(&inp.message_space.0 << 3usize), ..inp.clone() }),
        ];
        for (what, other) in down {
            if best_total(&other, false)? > base {
                return Err(format!("total increased when raising {what} on {inp:?}"));
            }
            checks += 1;
        }
    }
    Ok(format!("{grids} random grids, {checks} monotonicity checks, dual-path within 1e-12, totals in [0, 1]"))
}

fn ng_null_case() -> Outcome {
    let schemes = [
        synthetic(4, 6, 16, FailurePredicate::randomness_below(20)),
        synthetic(4, 6, 16, FailurePredicate::message_randomness_threshold(50)),
        ToyScheme::Synthetic(
            SyntheticFailurePke::new(4, 6, 16, FailurePredicate::randomness_below(32)).unwrap().with_leak(KeyLeak::Full),
        ),
        ToyScheme::Synthetic(
            SyntheticFailurePke::new(4, 6, 16, FailurePredicate::randomness_below(24)).unwrap().with_leak(KeyLeak::Parity),
        ),
    ];
    let mut lines = Vec::new();
    for (i, scheme) in schemes.iter().enumerate() {
        if !scheme.as_synthetic().unwrap().failure.key_independent() {
            return Err(format!("scheme {i} is key-dependent"));
        }
        let leaks_parity = scheme.as_synthetic().unwrap().leak == KeyLeak::Parity;
        let mut advs = vec!["ignore", "probe", "ng-from:brute-force", "ng-from:best-of-q", "ng-from:uniform"];
        if leaks_parity {
            advs.push("parity-leak");
        }
        for adv in advs {
            let limits = QueryLimits { q_g: 16, ..QueryLimits::default() };
            let s = run(&spec(GameKind::FfpNg, adv, limits, Rejection::Explicit), scheme, 10_000, 9000 + i as u64)?;
            let p = two_proportion_test(s.ones_when_b0, s.runs_b0, s.ones_when_b1, s.runs_b1);
            if p < 1e-3 {
                return Err(format!("scheme {i} {adv}: equality rejected, p = {p:e}, advantage {}", s.advantage));
            }
            lines.push(p);
        }
    }
    let min_p = lines.iter().copied().fold(1.0, f64::min);
    Ok(format!("{} adversary/scheme pairs, min p = {min_p:.3}", lines.len()))
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, u64, fn() -> Outcome); 9] = [
        ("gamma reproduction", 5, gamma_reproduction),
        ("budget exponents", 1, budget_exponents),
        ("correctness round-trip", 10, correctness_roundtrip),
        ("GUESS bound", 60, guess_bound),
        ("reduction soundness", 120, reduction_soundness),
        ("statistics oracle equivalence", 60, stats_equivalence),
        ("FFP-NK dominance", 120, nk_dominance),
        ("bound-evaluator properties", 30, bound_properties),
        ("FFP-NG null case", 60, ng_null_case),
    ];
    let mut failed = Vec::new();
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = f();
        let took = start.elapsed();
        let verdict = match result {
            Ok(detail) if took <= Duration::from_secs(*limit) => Ok(detail),
            Ok(detail) => Err(format!("took {took:.1?}, limit {limit} s ({detail})")),
            Err(e) => Err(e),
        };
        match verdict {
            Ok(detail) => println!("PASS {}. {name} [{took:.2?}]: {detail}", i + 1),
            Err(e) => {
                println!("FAIL {}. {name} [{took:.2?}]: {e}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn preset_scheme_spreadness_is_randomness_size() {
    let s = scheme_preset("correct").unwrap();
    assert_eq!(toy_gamma(&s), 8.0);
    let cfg = RunConfig { scheme: SchemeConfig::Preset { preset: "correct".into() }, ..RunConfig::default() };
    assert_eq!(cfg.scheme.resolve().unwrap(), s);
}
