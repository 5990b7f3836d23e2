//! Compare the closed-form approximation of `I(eps, beta)` against the exact
//! quadrature at a few points, then summarize the full dB grid.

use ncswipt::presets::{fig2_grid, max_rel_err, GRID_ORACLE_TOL};
use ncswipt::specfun::{integral_i_approx2, integral_i_approx_n, integral_i_exact, IntegralArgs};

fn main() -> ncswipt::Result<()> {
    println!("{:>8} {:>8} {:>14} {:>14} {:>14} {:>10}", "eps", "beta", "exact", "I_2", "I_6", "rel_err_2");
    for (eps, beta) in [(0.1, 0.1), (0.1, 100.0), (1.0, 2.0), (10.0, 0.01), (10.0, 10.0), (100.0, 1e-3)] {
        let args = IntegralArgs::new(eps, beta)?;
        let exact = integral_i_exact(args, 1e-12)?;
        let i2 = integral_i_approx2(args);
        let i6 = integral_i_approx_n(args, 6)?;
        println!(
            "{eps:>8} {beta:>8} {exact:>14.6e} {i2:>14.6e} {i6:>14.6e} {:>10.2e}",
            ((i2 - exact) / exact).abs()
        );
    }

    let rows = fig2_grid(GRID_ORACLE_TOL)?;
    let worst = max_rel_err(&rows).expect("non-empty grid");
    let good = rows.iter().filter(|r| r.rel_err <= 1e-2).count();
    for (lo, hi) in [(0.0, 1e-3), (1e-3, 1e-2), (1e-2, 1e-1), (1e-1, f64::INFINITY)] {
        let n = rows.iter().filter(|r| r.rel_err >= lo && r.rel_err < hi).count();
        println!("rel err in [{lo:.0e}, {hi:.0e}): {n}");
    }
    println!(
        "\ngrid: {} points, {good} within 1e-2, worst {:.3e} at eps={} dB beta={} dB",
        rows.len(),
        worst.rel_err,
        worst.eps_db,
        worst.beta_db
    );
    Ok(())
}
