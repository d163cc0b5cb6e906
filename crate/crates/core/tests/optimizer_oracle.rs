use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zenolink_core::{
    derived_resources, optimize, plan_bitstring, zeta, AnalyticPoint, Bit, GridSpec,
    Interferometer, OptimizationResult, ProtocolKind, ProtocolParams, Reach, Variant,
};

/// Plain double loop over the grid with its own minimum and tie handling.
fn brute_force(spec: &GridSpec) -> Option<OptimizationResult> {
    let mut grid = Vec::new();
    let mut best: Option<(u64, u64, u64)> = None;
    let mut attaining = Vec::new();
    for m in 1..=spec.m_max {
        for n in 1..=spec.n_max {
            grid.push(AnalyticPoint::evaluate(m, n, spec.q, Some(spec.p), None).unwrap());
            let Reach::Finite(z) = zeta(m, n, spec.q, spec.p).unwrap() else {
                continue;
            };
            let replace = match best {
                None => true,
                Some((bz, bm, bn)) => {
                    z < bz || (z == bz && (m * n < bm * bn || (m * n == bm * bn && m < bm)))
                }
            };
            if replace {
                best = Some((z, m, n));
            }
            attaining.push((z, m, n));
        }
    }
    let (zeta_min, m_star, n_star) = best?;
    let mut ties: Vec<_> = attaining
        .into_iter()
        .filter(|&(z, m, n)| z == zeta_min && (m, n) != (m_star, n_star))
        .map(|(_, m, n)| (m, n))
        .collect();
    ties.sort_by_key(|&(m, n)| (m * n, m));
    let x_star = zeta_min / (m_star * n_star);
    let r = derived_resources(zeta_min, spec.p, 1.0).unwrap();
    Some(OptimizationResult {
        spec: *spec,
        zeta_min,
        m_star,
        n_star,
        x_star,
        eta_min: r.eta_min,
        t_min_over_tc: r.t_min_over_tc,
        delta_max: r.delta_max,
        ties,
        grid,
    })
}

#[test]
fn optimizer_equals_brute_force() {
    for q in [0.0, 0.25, 0.5, 0.75, 1.0] {
        for p in [0.9, 0.975, 0.99] {
            for size in [2, 7, 20] {
                let spec = GridSpec::new(size, size, q, p).unwrap();
                let want = brute_force(&spec).expect("feasible");
                let got = optimize(&spec).unwrap();
                assert_eq!(
                    serde_json::to_string(&got).unwrap(),
                    serde_json::to_string(&want).unwrap(),
                    "q={q} P={p} size={size}"
                );
            }
        }
    }
}

#[test]
fn cost_is_monotone_in_target() {
    for q in [0.0, 0.3, 0.5, 0.9, 1.0] {
        let mut last = 0;
        for p in [0.5, 0.8, 0.9, 0.95, 0.975, 0.99, 0.999] {
            let z = optimize(&GridSpec::new(12, 12, q, p).unwrap())
                .unwrap()
                .zeta_min;
            assert!(z >= last, "q={q} P={p}");
            last = z;
        }
    }
}

#[test]
fn growing_the_grid_never_hurts() {
    for q in [0.1, 0.5, 0.9] {
        let base = optimize(&GridSpec::new(10, 10, q, 0.975).unwrap())
            .unwrap()
            .zeta_min;
        for size in [12, 16, 25] {
            assert!(
                optimize(&GridSpec::new(size, size, q, 0.975).unwrap())
                    .unwrap()
                    .zeta_min
                    <= base
            );
        }
    }
    for size in [10, 16, 25, 32, 48, 64] {
        let r = optimize(&GridSpec::new(size, size, 0.5, 0.975).unwrap()).unwrap();
        assert_eq!((r.zeta_min, r.m_star, r.n_star), (68, 2, 2), "size={size}");
    }
}

#[test]
fn identical_specs_serialize_identically() {
    let spec = GridSpec::new(15, 9, 0.37, 0.95).unwrap();
    let a = serde_json::to_string(&optimize(&spec).unwrap()).unwrap();
    let b = serde_json::to_string(&optimize(&spec).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn planned_expectations_match_simulated_repetition() {
    // Repeat the protocol until Bob reads the sent bit; the mean repetition
    // count is geometric with mean 1 / lambda_b. At M = N = 2 the closed forms
    // are exact for both bits.
    let plan = plan_bitstring(&[Bit::Zero, Bit::One], 0.975, 2, 2, 1.0).unwrap();
    for bp in &plan.bits {
        let params = ProtocolParams::nested(2, 2, bp.bit, Variant::Modified).unwrap();
        let machine = Interferometer::new(params).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let sends = 20_000;
        let mut total = 0_u64;
        let mut within_worst = 0_u64;
        for _ in 0..sends {
            let mut runs = 0;
            loop {
                runs += 1;
                let t = machine.trial(rng.random(), rng.random()).unwrap();
                if t.is_success(ProtocolKind::Nested, bp.bit) {
                    break;
                }
            }
            total += runs;
            within_worst += u64::from(runs <= bp.worst_case_trials);
        }
        let mean = total as f64 / sends as f64;
        let lambda = bp.lambda;
        let sd = (1.0_f64 - lambda).sqrt() / lambda / (sends as f64).sqrt();
        assert!(
            (mean - bp.expected_trials).abs() < 4.0 * sd,
            "bit {}: {mean}",
            bp.bit
        );
        assert!(
            within_worst as f64 / sends as f64
                >= 0.975 - 4.0 * (0.975_f64 * 0.025 / sends as f64).sqrt()
        );
    }
}
