//! Simulate one transmission block and run every detector on it.

use ncswipt::channel::{derive_link_params, simulate_block_with, Modulation, Protocol, ScenarioConfig};
use ncswipt::detectors::{
    dest_detect_dpsk_approx, dest_detect_dpsk_exact, direct_detect, dpsk_exact_metrics, relay_detect_dpsk,
    EXACT_DETECTOR_REL_TOL,
};
use ncswipt::transition::{dpsk_transition_approx, dpsk_transition_exact};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ncswipt::Result<()> {
    let config = ScenarioConfig::new(Protocol::Ps, Modulation::Dpsk, 4, 0.6, vec![1.0, 2.0], 25.0);
    let params = derive_link_params(&config)?;
    println!("link SNRs: 0d {:.3}, 0r {:?}, rd {:?}", params.gamma_0d, params.gamma_0r, params.gamma_rd);

    let exact: Vec<_> = params
        .gamma_0r
        .iter()
        .map(|&g| dpsk_transition_exact(g, config.m, 1e-11))
        .collect::<Result<_, _>>()?;
    let approx: Vec<_> = params
        .gamma_0r
        .iter()
        .map(|&g| dpsk_transition_approx(g, config.m))
        .collect::<Result<_, _>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for message in 0..config.m {
        let block = simulate_block_with(&params, Modulation::Dpsk, config.m, &mut rng, message)?;
        let relays: Vec<usize> = block
            .y_0r
            .iter()
            .map(|y| relay_detect_dpsk([y[0], y[1]], config.m))
            .collect();
        let metrics = dpsk_exact_metrics(&block, &params, &exact, EXACT_DETECTOR_REL_TOL)?;
        println!(
            "sent {message}: relays decided {relays:?} (forwarded {:?}), direct {}, exact {}, approx {}",
            block.relay_messages,
            direct_detect(&block, &params)?,
            dest_detect_dpsk_exact(&block, &params, &exact)?,
            dest_detect_dpsk_approx(&block, &params, &approx)?,
        );
        let shown: Vec<String> = metrics.iter().map(|v| format!("{v:.2}")).collect();
        println!("         exact log-metrics [{}]", shown.join(", "));
    }
    Ok(())
}
