//! Bracket the wave speed from monotone test profiles, without any fitting:
//! the converged profile pins the speed tightly, a crude tanh guess still
//! contains it.
//!
//!     cargo run --release --example minimax_bracket

use coagwave::models::ModelKind;
use coagwave::params::Config;
use coagwave::run::run_wave;
use coagwave::wavefront::{minimax_bracket, TestProfile};

fn main() -> coagwave::Result<()> {
    let cfg = Config::default();
    let wave = run_wave(&cfg, ModelKind::Reduced6)?;
    let c = wave.measurement.speed;
    println!("measured speed: {c:.6} mm/min");

    // tolerance: the front position is only known to one cell per snapshot
    let tol = 2.0 * wave.grid.dx() / cfg.domain.snapshot_every;

    let last = wave.sim.field.snapshots.len() - 1;
    let rho = TestProfile::from_simulation(&wave.sim.field, last, &wave.model)?;
    let tight = minimax_bracket(&rho, &wave.model)?;
    println!(
        "converged profile:  [{:.6}, {:.6}]  width {:.2e}  contains c: {}",
        tight.lower,
        tight.upper,
        tight.upper - tight.lower,
        tight.lower - tol <= c && c <= tight.upper + tol
    );

    let crude = TestProfile::tanh_profile(&wave.model, &wave.grid, 2.5, 0.3)?;
    let wide = minimax_bracket(&crude, &wave.model)?;
    println!(
        "crude tanh profile: [{:.6}, {:.6}]  width {:.2e}  contains c: {}",
        wide.lower,
        wide.upper,
        wide.upper - wide.lower,
        wide.lower <= c && c <= wide.upper
    );

    println!("\nper-component inf/sup of the converged profile:");
    for (name, bounds) in wave.model.names().iter().zip(&tight.per_component) {
        match bounds {
            Some((lo, hi)) => println!("  {name:<4} [{lo:.6}, {hi:.6}]"),
            None => println!("  {name:<4} (no usable slope)"),
        }
    }
    Ok(())
}
