//! Busy-period CDF from the Volterra equation next to the absorbing-chain
//! reference, plus the observed convergence order under step halving.

use erlang_periodic::busy::{busy_oracle, busy_period_cdf};
use erlang_periodic::model::PhaseIndex;
use erlang_periodic::ModelSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let spec = if args.get(1).map(String::as_str) == Some("mm1") {
        ModelSpec::mm1(3.0, 5.0)?
    } else {
        ModelSpec::e7_e4_example()
    };
    let start = PhaseIndex { a: 0, s: 0 };
    let (t_max, h) = (5.0, 0.01);
    for j in [1, 2] {
        let coarse = busy_period_cdf(&spec, j, start, 0.0, t_max, h)?;
        let fine = busy_period_cdf(&spec, j, start, 0.0, t_max, h / 2.0)?;
        let oracle = busy_oracle(&spec, j, start, 0.0, t_max, h / 2.0)?;
        let (e1, e2) = (coarse.sup_distance(&oracle)?, fine.sup_distance(&oracle)?);
        println!("j = {j}: sup error h = {h}: {e1:.3e}, h/2: {e2:.3e}, observed order {:.2}", (e1 / e2).log2());
        let (ct, ot) = (coarse.totals(), oracle.totals());
        for i in (0..coarse.times.len()).step_by(50) {
            println!("    t = {:>4.2}  volterra {:.8}  oracle {:.8}", coarse.times[i], ct[i], ot[2 * i]);
        }
    }
    Ok(())
}
