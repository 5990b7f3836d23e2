//! SER of the exact and approximate destination detectors over SNR.
//!
//! Run with `--release`; the exact detector integrates numerically per block.

use ncswipt::channel::{Modulation, Protocol, ScenarioConfig};
use ncswipt::montecarlo::{sweep, Axis, DetectorKind, RunOptions, SweepSpec};

fn main() -> ncswipt::Result<()> {
    let trials = 20_000;
    for modulation in [Modulation::Dpsk, Modulation::Fsk] {
        let mut config = ScenarioConfig::new(Protocol::Ts, modulation, 2, 0.5, vec![1.5], 30.0);
        config.rate_r = 1.0;
        let spec = SweepSpec::range(Axis::SnrDb, 0.0, 40.0, 5.0)?;
        let detectors = [DetectorKind::Exact, DetectorKind::Approx, DetectorKind::Direct];
        let result = sweep(&config, &spec, &detectors, trials, 11, &RunOptions::default())?;

        println!("{modulation}, TS alpha=0.5, K=1");
        println!("{:>6} {:>11} {:>11} {:>11}", "SNR", "exact", "approx", "direct");
        let (exact, approx, direct) = (
            result.curve(DetectorKind::Exact),
            result.curve(DetectorKind::Approx),
            result.curve(DetectorKind::Direct),
        );
        for ((e, a), d) in exact.iter().zip(&approx).zip(&direct) {
            println!(
                "{:>6} {:>11.3e} {:>11.3e} {:>11.3e}",
                e.axis_value, e.estimate.ser, a.estimate.ser, d.estimate.ser
            );
        }
        println!();
    }
    Ok(())
}
