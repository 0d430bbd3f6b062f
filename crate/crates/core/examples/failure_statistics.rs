//! Monte Carlo failure statistics of a key-dependent toy scheme next to the
//! exact values from enumerating every key, and the resulting bounds on
//! finding a failing plaintext without the key.

use fo_lab::cli::exact_comparison;
use fo_lab::config::scheme_preset;
use fo_lab::pke::PkeScheme;
use fo_lab::toy::{FailurePredicate, SyntheticFailurePke, ToyScheme};
use fo_lab::stats::{estimate_failure_stats, expectation_search_bound, ffp_nk_bound_chebyshev, StatsRequest};

fn main() -> fo_lab::Result<()> {
    report(scheme_preset("key-dependent").unwrap(), vec![0.05, 0.1, 0.2])?;
    // failures confined to the top few randomness values and the largest keys, rare enough
    // for the tail bound to apply at small q
    let rare = SyntheticFailurePke::new(2, 10, 64, FailurePredicate::sum_threshold(1083))?;
    report(ToyScheme::Synthetic(rare), vec![1e-4, 0.01, 0.1])
}

fn report(scheme: ToyScheme, tail_grid: Vec<f64>) -> fo_lab::Result<()> {
    println!("== {}", scheme.name());
    let req = StatsRequest { trials: 4096, keys_per_randomness: 64, tail_grid, ..Default::default() };
    let st = estimate_failure_stats(&scheme, &req)?;
    println!("delta {:.5} ± {:.5}", st.delta_ik.value, st.delta_ik.std_error);
    println!("sigma {:.5} ± {:.5}", st.sigma.value, st.sigma.std_error);
    for t in &st.tail {
        println!("Pr[failure rate >= {}] = {:.5} ± {:.5}", t.t, t.value, t.std_error);
    }
    if let Some(x) = exact_comparison(&scheme, &st) {
        println!("exact: delta {:.5}, sigma {:.5}, tail {:?}, max |z| {:.2}", x.delta_ik, x.sigma, x.tail, x.max_z);
    }
    let grid: Vec<f64> = st.tail.iter().map(|t| t.t).collect();
    let tail: Vec<f64> = st.tail.iter().map(|t| t.value).collect();
    for q in [1u128, 2, 4] {
        let cheb = ffp_nk_bound_chebyshev(q, st.delta_ik.value, st.sigma.value)?;
        let exp = expectation_search_bound(&grid, &tail, q)?;
        println!("q = {q} variance bound {:.4}, tail bound {:.4}", cheb.to_f64(), exp.to_f64());
    }
    Ok(())
}
