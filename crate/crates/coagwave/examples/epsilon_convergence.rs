//! Speed up the factor-XI kinetics by 1/epsilon in the two-equation model
//! and watch the wave speed approach the one-equation limit linearly in
//! epsilon.
//!
//!     cargo run --release --example epsilon_convergence

use coagwave::params::Config;
use coagwave::wavefront::epsilon_convergence;

fn main() -> coagwave::Result<()> {
    let mut cfg = Config::default();
    // the reductions run faster than the six-component model: a longer box
    // and denser snapshots keep the fit window inside the domain
    cfg.domain.length = 10.0;
    cfg.domain.nodes = 2001;
    cfg.domain.t_end = 30.0;
    cfg.domain.snapshot_every = 0.25;

    let epsilons = [1.0, 0.5, 0.25, 0.125, 0.0625];
    let table = epsilon_convergence(&cfg, &epsilons)?;

    println!("one-equation limit: c0 = {:.6} mm/min\n", table.c0);
    println!("  epsilon   c_eps      |c_eps - c0|");
    for e in &table.entries {
        match (e.speed, e.gap) {
            (Some(c), Some(gap)) => println!("  {:<8} {c:.6}   {gap:.6}", e.epsilon),
            _ => println!("  {:<8} (run failed)", e.epsilon),
        }
    }
    println!(
        "\nbound |c_eps - c0| <= K eps holds for K = {:.4} (max gap/eps); \
         least-squares slope through the origin is {:.4}",
        table.bound_k, table.fitted_k
    );
    println!(
        "the gaps shrink monotonically but the ratio gap/eps still grows on \
         this ladder: at eps = 1/16 the fast rate h11/eps is only comparable \
         to the front's own rates, so the linear regime lies further out"
    );
    Ok(())
}
