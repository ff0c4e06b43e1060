use approx::assert_abs_diff_eq;

use graphfuse::analysis::{
    depolarizing_average, product_correlator, product_correlator_from_records, witness_bound,
};
use graphfuse::graph::{graph_state_vector, GraphSpec, SetLabel, StabilizerSet};
use graphfuse::noise::{
    monte_carlo, parse_records, write_records, MonteCarloConfig, NoiseModel, PostSelectionPolicy,
    Stage,
};
use graphfuse::protocol::{
    builtin, noise_sites, run, run_exhaustive, BackendChoice, ProtocolProgram, RunConfig,
    BUILTIN_PROTOCOLS,
};

fn partitioned(p: &ProtocolProgram) -> StabilizerSet {
    StabilizerSet::partitioned(p.expected.as_ref().unwrap()).unwrap()
}

#[test]
fn program_text_round_trip_preserves_branches() {
    for name in BUILTIN_PROTOCOLS {
        let p = builtin(name).unwrap();
        let q = ProtocolProgram::from_text(&p.to_text()).unwrap();
        assert_eq!(p, q, "{name}");
        let a = run_exhaustive(&p, BackendChoice::Dense).unwrap();
        let b = run_exhaustive(&q, BackendChoice::Dense).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.heralds, y.heralds);
            assert_abs_diff_eq!(x.probability, y.probability, epsilon = 1e-15);
        }
    }
}

#[test]
fn branch_probabilities_sum_to_one() {
    for name in BUILTIN_PROTOCOLS {
        let p = builtin(name).unwrap();
        let total: f64 = run_exhaustive(&p, BackendChoice::Auto)
            .unwrap()
            .iter()
            .map(|b| b.probability)
            .sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }
}

#[test]
fn graph_text_round_trip() {
    for name in BUILTIN_PROTOCOLS {
        let g = builtin(name).unwrap().expected.unwrap();
        let h = GraphSpec::from_text(&g.to_text()).unwrap();
        assert_eq!(g, h);
        assert_abs_diff_eq!(
            graph_state_vector(&g)
                .unwrap()
                .overlap(&graph_state_vector(&h).unwrap()),
            1.0,
            epsilon = 1e-12
        );
    }
}

#[test]
fn noise_toml_round_trip() {
    let m = NoiseModel {
        loss_per_photon: 0.3,
        depolarizing_per_emission: 0.02,
        spin_dephasing_per_us: 0.001,
        tau_dephasing_per_ns: 1e-4,
        ..NoiseModel::default()
    };
    assert_eq!(NoiseModel::from_toml(&m.to_toml()).unwrap(), m);
}

#[test]
fn dense_run_matches_oracle() {
    for name in ["box", "pentagon", "hexagon", "tree"] {
        let p = builtin(name).unwrap();
        let cfg = RunConfig {
            backend: BackendChoice::Dense,
            ..RunConfig::default()
        };
        let r = run(&p, &cfg).unwrap();
        assert!(r.success);
        let oracle = graph_state_vector(p.expected.as_ref().unwrap()).unwrap();
        assert_abs_diff_eq!(
            r.state.dense().unwrap().overlap(&oracle),
            1.0,
            epsilon = 1e-10
        );
    }
}

// Sampled heralds with depolarizing faults, no loss and no timing rejection, so the
// accepted ensemble is exactly the herald-conditioned one that the enumeration computes.
#[test]
fn monte_carlo_converges_to_exact_ensemble() {
    let p = builtin("box").unwrap();
    let set = partitioned(&p);
    let noise = NoiseModel::depolarizing(0.05);
    let n_emit = noise_sites(&p).iter().filter(|s| !s.wait).count();
    let exact = depolarizing_average(&p, BackendChoice::Auto, 0.05, n_emit, |s| {
        Ok(vec![
            product_correlator(s, &set, SetLabel::A)?,
            product_correlator(s, &set, SetLabel::B)?,
        ])
    })
    .unwrap();
    assert!(exact.omitted_prior < 1e-12);

    let cfg = MonteCarloConfig {
        n_trials: 20_000,
        seed: 11,
        ..MonteCarloConfig::default()
    };
    let out = monte_carlo(&p, &noise, &PostSelectionPolicy::m_f2(), &cfg).unwrap();
    let s = &out.stats;
    let acc = s.overall_fraction(Stage::Accepted);
    assert!(
        acc.within(exact.success_probability, 4.0),
        "accepted {acc} vs {}",
        exact.success_probability
    );
    let (ga, gb) = (s.g_a.unwrap(), s.g_b.unwrap());
    assert!(
        ga.within(exact.values[0], 4.0),
        "g_a {ga} vs {}",
        exact.values[0]
    );
    assert!(
        gb.within(exact.values[1], 4.0),
        "g_b {gb} vs {}",
        exact.values[1]
    );
}

#[test]
fn records_reproduce_monte_carlo_witness() {
    let p = builtin("box").unwrap();
    let set = partitioned(&p);
    let cfg = MonteCarloConfig {
        n_trials: 4000,
        seed: 5,
        record_clicks: true,
        ..MonteCarloConfig::default()
    };
    let noise = NoiseModel {
        loss_per_photon: 0.2,
        depolarizing_per_emission: 0.03,
        ..NoiseModel::default()
    };
    let out = monte_carlo(&p, &noise, &PostSelectionPolicy::m_f2(), &cfg).unwrap();
    let text = write_records(&out.records);
    let back = parse_records(&text).unwrap();
    assert_eq!(write_records(&back), text);
    assert_eq!(back.shots, out.records.shots);
    assert_eq!(back.clicks.len(), out.records.clicks.len());
    assert_eq!(back.shots.len() as u64, out.stats.count(Stage::Accepted));
    let ga = product_correlator_from_records(&back.shots, &set, SetLabel::A).unwrap();
    let gb = product_correlator_from_records(&back.shots, &set, SetLabel::B).unwrap();
    assert_eq!(Some(ga), out.stats.g_a);
    assert_eq!(Some(gb), out.stats.g_b);
    let w = witness_bound(ga, gb).unwrap();
    assert!(w.p <= 1.0);
    assert!(w.p_err_minus > 0.0 && w.p_err_plus > 0.0);
}

#[test]
fn loss_reduces_acceptance() {
    let p = builtin("bell").unwrap();
    let cfg = MonteCarloConfig {
        n_trials: 5000,
        seed: 2,
        ..MonteCarloConfig::default()
    };
    let accepted = |loss: f64| {
        let noise = NoiseModel {
            loss_per_photon: loss,
            ..NoiseModel::zero()
        };
        monte_carlo(&p, &noise, &PostSelectionPolicy::m_f0(), &cfg)
            .unwrap()
            .stats
            .overall_fraction(Stage::Accepted)
    };
    let lossless = accepted(0.0);
    assert!(lossless.within(0.5, 4.0), "{lossless}");
    // both herald photons must survive, and each spin readout succeeds with 1 - loss^3
    let expected = 0.5 * 0.25 * (1.0f64 - 0.125).powi(2);
    let lossy = accepted(0.5);
    assert!(lossy.within(expected, 4.0), "{lossy} vs {expected}");
}
