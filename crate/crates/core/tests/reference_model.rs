use spinbath::analysis::{
    compare_thermal_chemical, connectivity_blocks, locate_t_theta, restricted_gibbs_prediction, sweep_coupling,
    sweep_temperature,
};
use spinbath::dynamics::{excitation_probability, gibbs_state, propagate_populations};
use spinbath::*;

fn chain(kappas: [f64; 2], t: f64) -> OpenChain {
    OpenChain::new(ChainSpec::reference_pair(), BathConfig::sigma_x(t, &kappas).unwrap()).unwrap()
}

fn nbar(omega: f64, t: f64) -> f64 {
    1.0 / (omega / t).exp_m1()
}

#[test]
fn level_labels_and_energies() {
    let c = chain([1.0, 1.0], 1.0);
    let dec = c.decomposition();
    let expected = [-11.0 / 6.0, -1.0 / 6.0, 5.0 / 6.0, 7.0 / 6.0];
    for (e, x) in dec.energies().iter().zip(expected) {
        assert!((e - x).abs() < 1e-12);
    }
    assert_eq!(dec.level_labels(), vec!["↓↓", "↓↑", "↑↓", "↑↑"]);
}

#[test]
fn late_time_matches_restricted_gibbs() {
    let c = chain([0.0, 1.0], 1.0);
    let rates = c.rate_matrix().unwrap();
    let blocks = connectivity_blocks(&rates);
    for level in 0..4 {
        let p0 = PopulationState::basis(4, level).unwrap();
        let late = propagate_populations(&rates, &p0, &[1e3]).unwrap();
        let predicted = restricted_gibbs_prediction(&blocks, &p0, c.decomposition(), 1.0).unwrap();
        assert!(late.last().unwrap().max_abs_diff(&predicted) < 1e-6, "level {level}");
    }
}

#[test]
fn blocked_from_ground_subspace_at_any_temperature() {
    for t in [0.01, 1.0, 100.0] {
        let c = chain([0.0, 1.0], t);
        let rates = c.rate_matrix().unwrap();
        let times: Vec<f64> = grid(1e-2, 1e3, 30, Spacing::Log).unwrap();
        let traj = propagate_populations(&rates, &PopulationState::basis(4, 2).unwrap(), &times).unwrap();
        for p in &traj.populations {
            assert!(p.get(0) + p.get(1) < 1e-12);
        }
    }
}

#[test]
fn two_level_fixed_points() {
    // Ground block {1, 2} alone: gap ω₂₁ = 5/3.
    let w = 5.0 / 3.0;
    let n = nbar(w, 10.0);
    let fixed = n / (2.0 * n + 1.0);
    assert!((fixed - 0.4584295167832001).abs() < 1e-15);
    let c = chain([0.0, 1.0], 10.0);
    let rates = c.rate_matrix().unwrap();
    let traj = propagate_populations(&rates, &PopulationState::basis(4, 0).unwrap(), &[10.0, 1e3]).unwrap();
    let pexc = excitation_probability(&traj);
    // Exact two-level relaxation at rate κω(2n̄+1).
    let exact10 = fixed * (1.0 - (-w * (2.0 * n + 1.0) * 10.0).exp());
    assert!((pexc[0] - exact10).abs() < 1e-12);
    assert!((pexc[1] - fixed).abs() < 1e-12);
}

#[test]
fn thermal_ceiling_and_chemical_crossing() {
    let c = chain([1e-5, 1.0], 10.0);
    let temps = grid(0.1, 10.0, 25, Spacing::Log).unwrap();
    let sweep = sweep_temperature(c.spec(), c.baths(), &temps, 10.0).unwrap();
    let values: Vec<f64> = sweep.values.iter().map(|v| v.unwrap()).collect();
    assert!(values.windows(2).all(|w| w[1] >= w[0]));
    let max = values.iter().cloned().fold(0.0, f64::max);
    assert!((0.40..0.50).contains(&max), "{max}");
    assert!((values[24] - 0.4584295167832001).abs() < 0.01);
    let t_theta = locate_t_theta(&sweep).unwrap();
    assert!((0.5..=2.0).contains(&t_theta), "{t_theta}");

    let kappas = grid(1e-3, 1.0, 25, Spacing::Log).unwrap();
    let coupling = sweep_coupling(c.spec(), c.baths(), 1, &kappas, 10.0).unwrap();
    let values: Vec<f64> = coupling.values.iter().map(|v| v.unwrap()).collect();
    assert!(values.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    let gibbs = 1.0 - gibbs_state(c.decomposition(), 10.0).unwrap().get(0);
    assert!((gibbs - 0.7017799221155581).abs() < 1e-12);
    assert!(values[24] > 0.5 && (values[24] - gibbs).abs() < 0.01);

    let both = compare_thermal_chemical(c.spec(), c.baths(), &temps, 1, &kappas, 10.0).unwrap();
    assert!(both.crosses_half_only_chemically());
    let hot = chain([1.0, 1.0], 10.0);
    let traj = propagate_populations(&hot.rate_matrix().unwrap(), &PopulationState::basis(4, 0).unwrap(), &[10.0]).unwrap();
    assert!(excitation_probability(&traj)[0] > 0.5);
}

#[test]
fn f32_pipeline_runs() {
    let c = OpenChainF32::new(ChainSpecF32::reference_pair(), BathConfigF32::sigma_x(1.0, &[1.0, 1.0]).unwrap()).unwrap();
    let rates = c.rate_matrix().unwrap();
    let gibbs = gibbs_state(c.decomposition(), 1.0f32).unwrap();
    assert!(rates.apply(gibbs.vector()).amax() < 1e-5);
    let traj = propagate_populations(&rates, &spinbath::dynamics::PopulationState::basis(4, 0).unwrap(), &[50.0f32]).unwrap();
    assert!(traj.last().unwrap().max_abs_diff(&gibbs) < 1e-4);
}
