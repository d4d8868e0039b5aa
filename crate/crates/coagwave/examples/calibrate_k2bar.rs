//! Calibrate k2_bar, the one rate constant absent from the measured table:
//! bisect until the six-component wave runs at 0.05 mm/min.
//!
//!     cargo run --release --example calibrate_k2bar

use coagwave::models::ModelKind;
use coagwave::params::Config;
use coagwave::run::{calibrate_k2bar, run_wave};

fn main() -> coagwave::Result<()> {
    // coarse grid for the bisection; each probe is a full simulation
    let mut coarse = Config::default();
    coarse.domain.nodes = 251;
    coarse.domain.snapshot_every = 0.5;

    let target = 0.05;
    let k2_bar = calibrate_k2bar(&coarse, target, 6.0, 25.0, 0.02)?;
    println!("calibrated on a 251-node grid: k2_bar = {k2_bar:.3}");

    // verify on the default grid
    let mut cfg = Config::default();
    cfg.rates.k2_bar = k2_bar;
    let wave = run_wave(&cfg, ModelKind::Reduced6)?;
    println!(
        "default-grid speed at that value: {:.5} mm/min (target {target})",
        wave.measurement.speed
    );
    println!(
        "shipped default: k2_bar = {}",
        Config::default().rates.k2_bar
    );
    Ok(())
}
