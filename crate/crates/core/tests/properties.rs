use ncswipt::channel::{simulate_block_with, LinkParams, Modulation, Protocol, ScenarioConfig};
use ncswipt::detectors::{
    dpsk_approx_metrics, dpsk_exact_metrics, fsk_approx_metrics, log_sum_exp, relay_detect_dpsk,
    relay_detect_fsk, unit_phasor, DecisionStatistics,
};
use ncswipt::distributions::{bessel_identity_check, phase_pdf, wrap_phase, PhaseModelParams};
use ncswipt::montecarlo::{parse_results, results_to_csv_string, Axis, DetectorKind, SerEstimate, SweepPoint, SweepResult};
use ncswipt::specfun::{
    integral_i_exact, ln_integral_i_approx2, ln_integral_i_approx_n, ln_integral_i_exact,
    ln_integral_i_split, bessel_k0_scaled, IntegralArgs,
};
use ncswipt::transition::{dpsk_transition_approx, dpsk_transition_exact, fsk_transition};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn db() -> impl Strategy<Value = f64> {
    (-30.0f64..30.0).prop_map(|d| 10f64.powf(d / 10.0))
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-5.0f64..5.0, -5.0f64..5.0).prop_map(|(a, b)| Complex64::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn i_lies_between_zero_and_e_to_minus_beta_bound(eps in db(), beta in db()) {
        // 1/(1+eps t) <= 1 bounds the integrand by e^{-t}, so 0 < I <= 1;
        // the exponent -beta/(1+eps t) >= -beta gives I >= e^{-beta} * int e^{-t}/(1+eps t).
        let args = IntegralArgs::new(eps, beta).unwrap();
        let i = integral_i_exact(args, 1e-10).unwrap();
        prop_assert!(i > 0.0 && i <= 1.0);
        let i0 = integral_i_exact(IntegralArgs::new(eps, 0.0).unwrap(), 1e-10).unwrap();
        prop_assert!(i >= (-beta).exp() * i0 * (1.0 - 1e-9));
        prop_assert!(i <= i0 * (1.0 + 1e-9));
    }

    #[test]
    fn i_decreases_in_beta(eps in db(), beta in db(), step in 0.01f64..10.0) {
        let a = ln_integral_i_exact(IntegralArgs::new(eps, beta).unwrap(), 1e-10).unwrap();
        let b = ln_integral_i_exact(IntegralArgs::new(eps, beta + step).unwrap(), 1e-10).unwrap();
        prop_assert!(b < a + 1e-9);
    }

    #[test]
    fn split_form_matches_direct_quadrature(eps in (-20.0f64..20.0).prop_map(|d| 10f64.powf(d / 10.0)), beta in db()) {
        let args = IntegralArgs::new(eps, beta).unwrap();
        let direct = ln_integral_i_exact(args, 1e-12).unwrap();
        // below the boundary the split form subtracts two terms this many nats larger than I
        let a = 2.0 * (beta / eps).sqrt();
        let excess = 1.0 / eps - eps.ln() + bessel_k0_scaled(a).unwrap().ln() - a - direct;
        prop_assume!(beta * eps > 1.0 || excess < 10.0);
        let split = ln_integral_i_split(args, 1e-12).unwrap();
        prop_assert!((direct - split).abs() <= 1e-7 * direct.abs().max(1.0), "{direct} vs {split}");
    }

    #[test]
    fn approx2_is_order_two(eps in db(), beta in db()) {
        let args = IntegralArgs::new(eps, beta).unwrap();
        prop_assume!(!args.on_boundary());
        let a = ln_integral_i_approx2(args);
        let b = ln_integral_i_approx_n(args, 2).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
        prop_assert!(a.is_finite());
    }

    #[test]
    fn bessel_moment_identity(a in -2.0f64..5.0, b in 0.05f64..5.0) {
        prop_assume!(a + b > 0.05);
        let (lhs, rhs) = bessel_identity_check(a, b).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-8 * rhs.abs().max(1.0));
    }

    #[test]
    fn phase_density_is_even_and_periodic(gamma in db(), theta in -3.0f64..3.0) {
        let p = PhaseModelParams::new(gamma, Complex64::new(1.0, 0.0)).unwrap();
        let f = phase_pdf(theta, &p);
        prop_assert!(f >= 0.0);
        prop_assert!((f - phase_pdf(-theta, &p)).abs() <= 1e-12 * f.max(1.0));
        prop_assert!((f - phase_pdf(theta + 2.0 * std::f64::consts::PI, &p)).abs() <= 1e-9 * f.max(1.0));
        let w = wrap_phase(theta + 10.0 * std::f64::consts::PI);
        prop_assert!((-std::f64::consts::PI..std::f64::consts::PI).contains(&w));
    }

    #[test]
    fn transition_tables_are_symmetric_stochastic(gamma in 0.0f64..200.0, log_m in 1u32..5) {
        let m = 1usize << log_m;
        for t in [
            dpsk_transition_exact(gamma, m, 1e-11).unwrap(),
            dpsk_transition_approx(gamma, m).unwrap(),
            fsk_transition(gamma, m).unwrap(),
        ] {
            for row in t.probs() {
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                prop_assert!(row.iter().all(|&p| p >= 0.0));
            }
            for n in 1..m {
                prop_assert!((t.offset_prob(n) - t.offset_prob(m - n)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn relay_detectors_are_optimal_over_candidates(y0 in complex(), y1 in complex(), log_m in 1u32..5) {
        let m = 1usize << log_m;
        let d = relay_detect_dpsk([y0, y1], m);
        let score = |k: usize| (y1.conj() * y0 * unit_phasor(k, m)).re;
        for k in 0..m {
            prop_assert!(score(d) >= score(k));
            if k < d { prop_assert!(score(k) < score(d)); }
        }
        let y = vec![y0, y1, y0 * 0.5, y1 * 2.0];
        let f = relay_detect_fsk(&y);
        prop_assert!(y.iter().all(|v| v.norm_sqr() <= y[f].norm_sqr()));
    }

    #[test]
    fn parallelogram_identity_holds(seed in any::<u64>(), s2 in db(), log_m in 1u32..4) {
        let m = 1usize << log_m;
        let mut params = LinkParams::uniform(2.0, 3.0, 4.0, 2);
        params.sigma_rd_sq = vec![s2, 1.0 / s2];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for modulation in [Modulation::Dpsk, Modulation::Fsk] {
            let b = simulate_block_with(&params, modulation, m, &mut rng, 0).unwrap();
            let s = DecisionStatistics::from_block(&b, &params).unwrap();
            for r in 0..2 {
                let e: f64 = b.y_rd[r].iter().map(|v| v.norm_sqr()).sum::<f64>() / params.sigma_rd_sq[r];
                for q in 0..m {
                    prop_assert!(s.beta_plus[r][q] >= 0.0 && s.beta_minus[r][q] >= 0.0);
                    prop_assert!((s.beta_plus[r][q] + s.beta_minus[r][q] - e).abs() <= 1e-10 * e.max(1.0));
                }
            }
        }
    }

    #[test]
    fn dpsk_rotation_relabels_metrics(seed in any::<u64>(), q in 0usize..4) {
        let m = 4;
        let params = LinkParams::uniform(3.0, 4.0, 5.0, 1);
        let exact = [dpsk_transition_exact(4.0, m, 1e-11).unwrap()];
        let approx = [dpsk_transition_approx(4.0, m).unwrap()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = simulate_block_with(&params, Modulation::Dpsk, m, &mut rng, 1).unwrap();
        let mut rot = b.clone();
        rot.y_0d[1] *= unit_phasor(q, m);
        rot.y_rd[0][1] *= unit_phasor(q, m);
        let a = dpsk_exact_metrics(&b, &params, &exact, 1e-11).unwrap();
        let ar = dpsk_exact_metrics(&rot, &params, &exact, 1e-11).unwrap();
        let c = dpsk_approx_metrics(&b, &params, &approx).unwrap();
        let cr = dpsk_approx_metrics(&rot, &params, &approx).unwrap();
        for k in 0..m {
            let j = (k + q) % m;
            prop_assert!((ar[j] - a[k]).abs() <= 1e-8 * a[k].abs().max(1.0));
            prop_assert!((cr[j] - c[k]).abs() <= 1e-10 * c[k].abs().max(1.0));
        }
    }

    #[test]
    fn fsk_permutation_relabels_metrics(seed in any::<u64>(), perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle()) {
        let m = 4;
        let params = LinkParams::uniform(3.0, 4.0, 5.0, 2);
        let tables = vec![fsk_transition(4.0, m).unwrap(); 2];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = simulate_block_with(&params, Modulation::Fsk, m, &mut rng, 2).unwrap();
        let apply = |y: &[Complex64]| {
            let mut out = vec![Complex64::new(0.0, 0.0); m];
            for (i, &p) in perm.iter().enumerate() { out[p] = y[i]; }
            out
        };
        let mut pb = b.clone();
        pb.y_0d = apply(&b.y_0d);
        pb.y_rd = b.y_rd.iter().map(|y| apply(y)).collect();
        let a = fsk_approx_metrics(&b, &params, &tables).unwrap();
        let ap = fsk_approx_metrics(&pb, &params, &tables).unwrap();
        for k in 0..m {
            prop_assert!((ap[perm[k]] - a[k]).abs() <= 1e-10 * a[k].abs().max(1.0));
        }
    }

    #[test]
    fn log_sum_exp_is_shift_equivariant(xs in prop::collection::vec(-700.0f64..700.0, 1..8), c in -500.0f64..500.0) {
        let a = log_sum_exp(xs.iter().copied());
        let b = log_sum_exp(xs.iter().map(|x| x + c));
        prop_assert!((b - a - c).abs() <= 1e-9 * b.abs().max(1.0));
        prop_assert!(a >= xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    }

    #[test]
    fn ser_estimate_invariants(trials in 1u64..10_000_000, frac in 0.0f64..1.0) {
        let errors = (trials as f64 * frac) as u64;
        let e = SerEstimate::from_counts(trials, errors, 3, 0.0);
        prop_assert!((0.0..=1.0).contains(&e.ser));
        prop_assert!((e.ci_halfwidth - 1.96 * (e.ser * (1.0 - e.ser) / trials as f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sweep_csv_round_trip(values in prop::collection::vec(-1e3f64..1e3, 0..6), seed in any::<u64>()) {
        let mut values = values;
        values.sort_by(f64::total_cmp);
        values.dedup();
        let points = values.iter().enumerate().map(|(i, &v)| SweepPoint {
            axis: Axis::SnrDb,
            axis_value: v,
            detector: if i % 2 == 0 { DetectorKind::Exact } else { DetectorKind::Approx },
            protocol: Protocol::Ts,
            modulation: Modulation::Fsk,
            m: 8,
            k: 2,
            snr_db: v,
            alpha: Some(0.4),
            rho: None,
            estimate: SerEstimate::from_counts(1000 + i as u64, i as u64 * 7, seed, 1.5),
        }).collect();
        let r = SweepResult { points, failures: vec![] };
        let text = results_to_csv_string(&r);
        prop_assert_eq!(parse_results(&text, "mem").unwrap(), r);
    }

    #[test]
    fn scenario_text_round_trip(split in 0.01f64..0.99, snr in -10.0f64..50.0, d in 0.1f64..2.9, ts in any::<bool>(), log_m in 1u32..5) {
        let protocol = if ts { Protocol::Ts } else { Protocol::Ps };
        let c = ScenarioConfig::new(protocol, Modulation::Dpsk, 1 << log_m, split, vec![d, 3.0 - d], snr);
        let back = ScenarioConfig::parse(&c.to_kv_string(), "mem").unwrap();
        prop_assert_eq!(back, c);
    }
}
