//! Level probabilities of the E7/E4 example from the root series, against the
//! periodic-ODE oracle they were seeded from.

use erlang_periodic::oracle::{extract_boundary, integrate_periodic};
use erlang_periodic::roots::build_root_set;
use erlang_periodic::series::SeriesEvaluator;
use erlang_periodic::ModelSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ModelSpec::e7_e4_example();
    let dist = integrate_periodic(&spec, 50, 512, 1e-10, 2000)?;
    let boundary = extract_boundary(&dist)?;
    let roots = build_root_set(&spec, 10)?;
    let eval = SeriesEvaluator::new(&spec, &roots, &boundary);

    println!("{:>6} {:>4} {:>14} {:>14} {:>14} {:>10}", "t", "q", "series p1", "oracle p1", "|diff|", "imag");
    for i in 0..8 {
        let t = i as f64 / 8.0;
        let point = eval.at(t)?;
        let oracle = dist.level_at(t, 1);
        let total: f64 = oracle.iter().sum();
        for q in [1, 5, 10] {
            let est = point.truncated(q).level(1)?;
            let diff = est.values.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            println!("{t:>6.3} {q:>4} {:>14.8} {total:>14.8} {diff:>14.3e} {:>10.1e}", est.total(), est.imag_residual);
        }
    }
    Ok(())
}
