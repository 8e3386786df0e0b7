//! Periodic steady state from the truncated level chain: convergence
//! diagnostics and level masses across one period.

use erlang_periodic::oracle::{extract_boundary, integrate_periodic};
use erlang_periodic::ModelSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ModelSpec::e7_e4_example();
    let dist = integrate_periodic(&spec, 50, 512, 1e-10, 2000)?;
    println!(
        "converged after {} periods, residual {:.2e}, mass drift {:.2e}",
        dist.periods(),
        dist.residual(),
        dist.mass_drift()
    );

    println!("{:>6} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11}", "t", "P(N=0)", "P(N=1)", "P(N=2)", "P(N=3)", "P(N=5)", "P(N=50)");
    for i in 0..16 {
        let t = i as f64 / 16.0;
        let levels = dist.levels_at(t);
        let mass = |j: usize| -> f64 { levels[j].iter().sum() };
        println!(
            "{t:>6.4} {:>11.7} {:>11.7} {:>11.7} {:>11.7} {:>11.7} {:>11.2e}",
            mass(0), mass(1), mass(2), mass(3), mass(5), mass(50)
        );
    }

    // the boundary functions seed the root series
    let boundary = extract_boundary(&dist)?;
    let (lo, hi) = (0..boundary.grid_len())
        .map(|i| boundary.p0_total(i as f64 / boundary.grid_len() as f64))
        .fold((f64::MAX, f64::MIN), |(lo, hi), v| (lo.min(v), hi.max(v)));
    println!("empty-queue probability ranges over [{lo:.6}, {hi:.6}]");
    Ok(())
}
