//! Speed across the model hierarchy as diffusion varies: the one- and
//! two-equation reductions overestimate the six-component speed, in that
//! order, and every curve grows like sqrt(D).
//!
//!     cargo run --release --example model_hierarchy

use coagwave::models::ModelKind;
use coagwave::params::Config;
use coagwave::run::{log_spaced, speed_sweep};

fn main() -> coagwave::Result<()> {
    let mut cfg = Config::default();
    // fast fronts cross the domain early; denser snapshots keep >= 10 fit
    // points inside the interior window
    cfg.domain.snapshot_every = 0.2;

    let values = log_spaced(0.001, 0.01, 5);
    let kinds = [ModelKind::OneEq, ModelKind::TwoEq, ModelKind::Reduced6];
    let rows = speed_sweep(&cfg, "D", &values, &kinds)?;

    println!("speed (mm/min) vs diffusion (mm^2/min):\n");
    println!("  D         one_eq     two_eq     reduced6   one/red  sqrt-law");
    for &d in &values {
        let speed = |name: &str| {
            rows.iter()
                .find(|r| r.value == d && r.series == name && r.converged)
                .and_then(|r| r.speed)
        };
        let (c1, c2, c6) = (speed("one_eq"), speed("two_eq"), speed("reduced6"));
        let sqrt_law = c6.map(|c| c / (d / values[0]).sqrt());
        let f = |v: Option<f64>| v.map_or("   -    ".into(), |v| format!("{v:.6}"));
        println!(
            "  {d:.5}   {}   {}   {}   {}   {}",
            f(c1),
            f(c2),
            f(c6),
            c1.zip(c6)
                .map_or("  -  ".into(), |(a, b)| format!("{:.2}x", a / b)),
            f(sqrt_law)
        );
    }
    println!(
        "\nsqrt-law column: reduced6 speed divided by sqrt(D/D_min); a flat \
         column is the diffusive scaling c ~ sqrt(D)."
    );
    Ok(())
}
