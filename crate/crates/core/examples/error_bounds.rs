//! Measured truncation error of the level series against the tail bound, with
//! a q = 40 series as the reference.

use erlang_periodic::bounds::{empirical_decay, truncation_error_bound};
use erlang_periodic::oracle::{extract_boundary, integrate_periodic};
use erlang_periodic::roots::build_root_set;
use erlang_periodic::series::SeriesEvaluator;
use erlang_periodic::ModelSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ModelSpec::e7_e4_example();
    let boundary = extract_boundary(&integrate_periodic(&spec, 50, 512, 1e-10, 2000)?)?;
    let roots = build_root_set(&spec, 40)?;
    let eval = SeriesEvaluator::new(&spec, &roots, &boundary);

    println!("{:>3} {:>3} {:>12} {:>12} {:>8}", "j", "q", "measured", "bound", "ratio");
    let points: Vec<_> = (0..16).map(|i| eval.at(i as f64 / 16.0)).collect::<Result<_, _>>()?;
    for j in 3..=5 {
        for q in [3, 5, 10] {
            let (mut worst_ratio, mut worst_err, mut worst_bound) = (0.0f64, 0.0, 0.0);
            for point in &points {
                let reference = point.level(j)?;
                let est = point.truncated(q).level(j)?;
                let err = reference.values.iter().zip(&est.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                let bound = truncation_error_bound(&spec, point.t, j, q).bound().unwrap_or(f64::NAN);
                if err / bound >= worst_ratio {
                    (worst_ratio, worst_err, worst_bound) = (err / bound, err, bound);
                }
            }
            println!("{j:>3} {q:>3} {worst_err:>12.3e} {worst_bound:>12.3e} {worst_ratio:>8.3}");
        }
    }

    println!("\n{:>4} {:>12} {:>12}", "n", "max |f|", "max |f|/|χ|");
    for row in empirical_decay(&spec, &roots, &boundary, 0.25)? {
        if row.n >= 0 {
            println!("{:>4} {:>12.3e} {:>12.3e}", row.n, row.max_abs_f, row.max_scaled);
        }
    }
    Ok(())
}
