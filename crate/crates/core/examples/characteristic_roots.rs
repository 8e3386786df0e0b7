//! Characteristic roots outside the unit circle, by index `n`, with their
//! residuals and the modulus bracket that the error bounds rely on.
//!
//! Pass a run config to use another model:
//! `cargo run --example characteristic_roots -- examples/configs/mm1.toml`

use erlang_periodic::bounds::root_modulus_bracket;
use erlang_periodic::config::RunConfig;
use erlang_periodic::roots::{poly_residual, solve_characteristic};
use erlang_periodic::ModelSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = match std::env::args().nth(1) {
        Some(path) => RunConfig::load(path.as_ref())?.spec()?,
        None => ModelSpec::e7_e4_example(),
    };
    println!("k = {}, m = {}, λ̄ = {}, μ̄ = {}", spec.k(), spec.m(), spec.lambda_bar(), spec.mu_bar());
    println!("{:>4} {:>3} {:>24} {:>24} {:>10} {:>10} {:>22}", "n", "br", "y", "χ", "|y|", "residual", "|y|^m bracket");
    for n in -3i64..=3 {
        let roots = solve_characteristic(&spec, n)?;
        let (lo, hi) = root_modulus_bracket(&spec, n);
        for r in &roots.outside {
            let bracket = if n == 0 { "-".to_string() } else { format!("[{lo:.3}, {hi:.3}]") };
            println!(
                "{n:>4} {:>3} {:>24} {:>24} {:>10.6} {:>10.2e} {bracket:>22}",
                r.branch,
                format!("{:.6}{:+.6}i", r.y.re, r.y.im),
                format!("{:.4}{:+.4}i", r.chi.re, r.chi.im),
                r.y.norm(),
                poly_residual(&spec, n, r.y),
            );
        }
    }
    Ok(())
}
