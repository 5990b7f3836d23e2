//! Simulated source-to-relay SER against the exact closed forms. For DPSK the
//! exact value is `1 - P_0` of the exact table; the bound used by the
//! approximate table is shown alongside.

use ncswipt::channel::{LinkParams, Modulation};
use ncswipt::montecarlo::{estimate_ser_with_params, DetectorKind, RunOptions};
use ncswipt::transition::{dpsk_relay_ser, dpsk_transition_exact, fsk_relay_ser};

fn main() -> ncswipt::Result<()> {
    let trials = 400_000;
    let opts = RunOptions::default();
    println!(
        "{:>5} {:>3} {:>7} {:>11} {:>11} {:>8} {:>11}",
        "mod", "M", "gamma", "simulated", "exact", "z", "DPSK bound"
    );
    for modulation in [Modulation::Dpsk, Modulation::Fsk] {
        for m in [2, 4, 8] {
            for gamma in [1.0, 10.0, 30.0] {
                let params = LinkParams::uniform(1.0, gamma, 1.0, 1);
                let est = estimate_ser_with_params(&params, modulation, m, DetectorKind::Relay, trials, 7, &opts)?;
                let (exact, bound) = match modulation {
                    Modulation::Dpsk => (
                        1.0 - dpsk_transition_exact(gamma, m, 1e-11)?.offset_prob(0),
                        format!("{:.4e}", dpsk_relay_ser(gamma, m)?),
                    ),
                    Modulation::Fsk => (fsk_relay_ser(gamma, m)?, String::new()),
                };
                println!(
                    "{modulation:>5} {m:>3} {gamma:>7} {:>11.4e} {exact:>11.4e} {:>+8.2} {bound:>11}",
                    est.ser,
                    (est.ser - exact) / est.sigma_at(exact)
                );
            }
        }
    }
    Ok(())
}
