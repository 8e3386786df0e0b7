//! With k = m = 1 and constant rates the series collapses to one root and
//! recovers the geometric M/M/1 law. The boundary is supplied in closed form,
//! so no ODE run is needed.

use erlang_periodic::oracle::BoundaryFunctions;
use erlang_periodic::roots::build_root_set;
use erlang_periodic::series::SeriesEvaluator;
use erlang_periodic::waiting::{wait_cdf_from_point, WaitKind};
use erlang_periodic::ModelSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (lam, mu) = (3.0, 5.0);
    let rho: f64 = lam / mu;
    let spec = ModelSpec::mm1(lam, mu)?;
    let boundary = BoundaryFunctions::constant(1, 1, vec![1.0 - rho], vec![(1.0 - rho) * rho])?;
    let roots = build_root_set(&spec, 0)?;
    let point = SeriesEvaluator::new(&spec, &roots, &boundary).at(0.0)?;

    println!("{:>3} {:>20} {:>20} {:>10}", "j", "series", "(1-ρ)ρ^j", "|diff|");
    for j in 1..=8 {
        let p = point.level(j)?.total();
        let exact = (1.0 - rho) * rho.powi(j as i32);
        println!("{j:>3} {p:>20.16} {exact:>20.16} {:>10.1e}", (p - exact).abs());
    }

    let horizons: Vec<f64> = (0..=6).map(|i| i as f64 * 0.25).collect();
    let queue = wait_cdf_from_point(&point, &boundary, &horizons, WaitKind::Queue)?;
    let sojourn = wait_cdf_from_point(&point, &boundary, &horizons, WaitKind::Sojourn)?;
    println!("\n{:>6} {:>14} {:>14} {:>14} {:>14}", "t", "queue", "1-ρe^{-(μ-λ)t}", "sojourn", "1-e^{-(μ-λ)t}");
    for (i, &t) in horizons.iter().enumerate() {
        let decay = (-(mu - lam) * t).exp();
        println!(
            "{t:>6.2} {:>14.10} {:>14.10} {:>14.10} {:>14.10}",
            queue.values[i], 1.0 - rho * decay, sojourn.values[i], 1.0 - decay
        );
    }
    Ok(())
}
