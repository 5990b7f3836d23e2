//! Load a scenario from the `key = value` format, sweep it and round-trip the
//! results through CSV.

use ncswipt::channel::ScenarioConfig;
use ncswipt::montecarlo::{parse_results, results_to_csv_string, sweep, Axis, DetectorKind, RunOptions, SweepSpec};

const SCENARIO: &str = "\
# two relays, power splitting
protocol = PS
modulation = FSK
M = 4
K = 2
rho = 0.7
eta = 0.8
P0 = 1000
sigma0_sq = 1
rate_R = 2
D0d = 2
D0r = 0.8, 1.2
pathloss_exp = 2.7
";

fn main() -> ncswipt::Result<()> {
    let config = ScenarioConfig::parse(SCENARIO, "inline")?;
    println!("parsed scenario at {:.1} dB:\n{}", config.snr_db(), config.to_kv_string());

    let spec = SweepSpec::range(Axis::SnrDb, 10.0, 30.0, 10.0)?;
    let result = sweep(&config, &spec, &[DetectorKind::Approx, DetectorKind::Direct], 20_000, 1, &RunOptions::default())?;
    let csv = results_to_csv_string(&result);
    print!("{csv}");

    let back = parse_results(&csv, "roundtrip")?;
    assert_eq!(back.points, result.points);
    println!("CSV round trip: {} rows", back.points.len());
    Ok(())
}
