//! Queue-wait and sojourn CDFs for arrivals at u = 0.2 and u = 0.7, series at
//! q = 0 and q = 2 against the oracle.

use erlang_periodic::oracle::{extract_boundary, integrate_periodic};
use erlang_periodic::roots::build_root_set;
use erlang_periodic::series::SeriesEvaluator;
use erlang_periodic::waiting::{oracle_wait_cdf, wait_cdf_from_point, WaitKind};
use erlang_periodic::ModelSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ModelSpec::e7_e4_example();
    let dist = integrate_periodic(&spec, 50, 512, 1e-10, 2000)?;
    let boundary = extract_boundary(&dist)?;
    let roots = build_root_set(&spec, 2)?;
    let eval = SeriesEvaluator::new(&spec, &roots, &boundary);
    let horizons: Vec<f64> = (0..=300).map(|i| i as f64 * 0.01).collect();

    for kind in [WaitKind::Queue, WaitKind::Sojourn] {
        for u in [0.2, 0.7] {
            let point = eval.at(u)?;
            let oracle = oracle_wait_cdf(&spec, &dist, u, &horizons, kind)?;
            let q0 = wait_cdf_from_point(&point.truncated(0), &boundary, &horizons, kind)?;
            let q2 = wait_cdf_from_point(&point, &boundary, &horizons, kind)?;
            println!(
                "{kind:>7} u={u}: sup|q0 - oracle| = {:.3e}, sup|q2 - oracle| = {:.3e}",
                q0.sup_distance(&oracle),
                q2.sup_distance(&oracle)
            );
            for i in (0..=300).step_by(50) {
                println!(
                    "    t={:>4.2}  q0={:.6}  q2={:.6}  oracle={:.6}",
                    horizons[i], q0.values[i], q2.values[i], oracle.values[i]
                );
            }
        }
    }
    Ok(())
}
