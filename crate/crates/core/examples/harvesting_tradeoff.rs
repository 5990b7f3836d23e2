//! SER against the time-switching ratio and the power-splitting ratio.

use ncswipt::channel::{Modulation, Protocol, ScenarioConfig};
use ncswipt::montecarlo::{sweep, Axis, DetectorKind, RunOptions, SweepSpec};

fn main() -> ncswipt::Result<()> {
    let trials = 100_000;
    for (protocol, axis) in [(Protocol::Ts, Axis::Alpha), (Protocol::Ps, Axis::Rho)] {
        let mut config = ScenarioConfig::new(protocol, Modulation::Dpsk, 2, 0.5, vec![1.5], 30.0);
        config.rate_r = 1.0;
        let spec = SweepSpec::range(axis, 0.1, 0.9, 0.1)?;
        let result = sweep(&config, &spec, &[DetectorKind::Approx], trials, 5, &RunOptions::default())?;
        let best = result
            .points
            .iter()
            .min_by(|a, b| a.estimate.ser.total_cmp(&b.estimate.ser))
            .expect("non-empty sweep");
        println!("{protocol}: SER vs {axis}");
        for p in &result.points {
            let mark = if p.axis_value == best.axis_value { " <- min" } else { "" };
            println!("  {:.1}  {:.3e} +- {:.1e}{mark}", p.axis_value, p.estimate.ser, p.estimate.ci_halfwidth);
        }
    }
    Ok(())
}
