//! Closed-form speed estimates at the physiological parameters: the narrow
//! reaction zone value, the piecewise-linear kink value, the verbatim
//! dimensional displays, and the ratio to the simulated speed.
//!
//!     cargo run --release --example speed_estimates

use coagwave::models::{nondimensionalize, ModelKind};
use coagwave::params::Config;
use coagwave::run::run_wave;
use coagwave::speed_formulas::coag_speed_estimates;

fn main() -> coagwave::Result<()> {
    let cfg = Config::default();

    let groups = nondimensionalize(&cfg.rates)?;
    println!(
        "dimensionless groups: b = {:.4}, D~ = {:.6} (propagation needs b > 27/4)",
        groups.b, groups.d_tilde
    );

    let est = coag_speed_estimates(&cfg.rates)?;
    println!("\nnarrow reaction zone:  c1 = {:.6} mm/min", est.c1.value);
    println!("piecewise-linear kink: c2 = {:.6} mm/min", est.c2.value);
    if let (Some(w0), Some(w_bar)) = (est.c2.workpad.w0, est.c2.workpad.w_bar) {
        println!(
            "  kink interior point w0 = {:.6}, w-bar = {:.6}, upper state w* = {:.6}",
            w0, w_bar, est.c2.workpad.w_star
        );
    }
    println!(
        "\nverbatim dimensional forms (kept side by side for comparison; \
         their radicands go negative at these parameters):"
    );
    println!(
        "  b = {:.6e}, c1 = {}, c2 = {}",
        est.printed.b_dim, est.printed.c1, est.printed.c2
    );

    let wave = run_wave(&cfg, ModelKind::Reduced6)?;
    let c = wave.measurement.speed;
    println!("\nsimulated six-component speed: c = {c:.6} mm/min");
    println!(
        "ratios: c1/c = {:.3}, c2/c = {:.3} (the estimates sit above the \
         simulation; they share its sqrt(D) scaling and parameter trends)",
        est.c1.value / c,
        est.c2.value / c
    );
    Ok(())
}
