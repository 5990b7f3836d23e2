//! Relay decision probabilities for DPSK (exact and approximate) and FSK.

use ncswipt::transition::{dpsk_relay_ser, dpsk_transition_approx, dpsk_transition_exact, fsk_transition};

fn main() -> ncswipt::Result<()> {
    let m = 8;
    for gamma in [1.0, 10.0, 100.0] {
        let exact = dpsk_transition_exact(gamma, m, 1e-11)?;
        let approx = dpsk_transition_approx(gamma, m)?;
        let fsk = fsk_transition(gamma, m)?;
        println!("gamma = {gamma}, M = {m}, relay SER (DPSK) = {:.4e}", dpsk_relay_ser(gamma, m)?);
        println!("  {:>3} {:>12} {:>12} {:>12}", "n", "DPSK exact", "DPSK approx", "FSK");
        for n in 0..m {
            println!(
                "  {n:>3} {:>12.4e} {:>12.4e} {:>12.4e}",
                exact.offset_prob(n),
                approx.offset_prob(n),
                fsk.prob(0, n)
            );
        }
    }

    println!("\nCSV form of the exact 4-DPSK table at gamma = 10:");
    print!("{}", dpsk_transition_exact(10.0, 4, 1e-11)?.to_csv_string());
    Ok(())
}
