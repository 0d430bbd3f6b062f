//! A full bound report for a lattice-sized parameter set, with the three
//! failure routes evaluated side by side and checked on the rational path.

use fo_lab::bounds::{compute_bounds, crosscheck, Advantage, BoundInputs, Count, FailureRoute, Model};

fn main() -> fo_lab::Result<()> {
    let mut inp = BoundInputs::new(Model::Qrom, Count::pow2(256), 10240.0);
    inp.q_g = Count::pow2(64);
    inp.q_h = Count::pow2(64);
    inp.q_d = Count::pow2(64);
    inp.adv_ind = Some(Advantage::Known(2f64.powi(-200)));
    inp.adv_ow = Some(Advantage::Known(2f64.powi(-200)));
    inp.adv_ffp_cpa = Some(Advantage::Known(2f64.powi(-180)));
    inp.adv_ffp_ng = Some(Advantage::Known(2f64.powi(-200)));
    inp.delta_ik = Some(2f64.powi(-138));
    inp.sigma = Some(2f64.powi(-160));
    inp.beta = Some(2f64.powi(200));
    for route in [FailureRoute::FfpCpa, FailureRoute::Chebyshev, FailureRoute::Gaussian] {
        inp.failure_route = route;
        report(&inp)?;
    }
    Ok(())
}

fn report(inp: &BoundInputs) -> fo_lab::Result<()> {
    println!("== failure route {:?}", inp.failure_route);
    let set = compute_bounds(inp)?;
    for r in &set.reports {
        println!("route {}", r.route);
        for t in &r.terms {
            println!("  {:<28} log2 {:>10.3}  {}", t.name, t.value.known.log2, t.formula);
        }
        let total = r.total.as_ref().map(|t| t.log2).unwrap_or(f64::NAN);
        let (dev, width) = crosscheck(r)?;
        println!("  total log2 {total:.3}; paths agree to {dev:.1e}, enclosure width {width:.1e}");
        for d in &r.diagnostics {
            println!("  note: {d}");
        }
    }
    println!("best route: {:?}\n", set.best_route);
    Ok(())
}
