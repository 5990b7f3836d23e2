//! DPSK against FSK as the alphabet grows: one relay, PS with rho = 0.8 and
//! rate `log2 M`.

use ncswipt::channel::{Modulation, Protocol, ScenarioConfig};
use ncswipt::montecarlo::{sweep, Axis, DetectorKind, RunOptions, SweepSpec};

fn main() -> ncswipt::Result<()> {
    let trials = 50_000;
    let spec = SweepSpec::range(Axis::SnrDb, 20.0, 50.0, 5.0)?;
    print!("{:>4} {:>5}", "M", "mod");
    for v in &spec.values {
        print!(" {:>9}", format!("{v} dB"));
    }
    println!();
    for m in [2, 4, 8, 16] {
        for modulation in [Modulation::Dpsk, Modulation::Fsk] {
            let config = ScenarioConfig::new(Protocol::Ps, modulation, m, 0.8, vec![1.5], 30.0);
            let result = sweep(&config, &spec, &[DetectorKind::Approx], trials, 9, &RunOptions::default())?;
            print!("{m:>4} {modulation:>5}");
            for p in &result.points {
                print!(" {:>9.2e}", p.estimate.ser);
            }
            println!();
        }
    }
    Ok(())
}
