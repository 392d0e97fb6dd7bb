use proptest::prelude::*;
use spinbath::analysis::{connectivity_blocks, detailed_balance_audit};
use spinbath::bath::{bose_einstein, site_operator};
use spinbath::dynamics::{gibbs_state, propagate_populations, steady_states, DEFAULT_KERNEL_TOL};
use spinbath::model::Coupling;
use spinbath::random::{draw_rng, random_open_chain};
use spinbath::scalar::max_abs;
use spinbath::*;

fn random_chain(seed: u64, sites: usize) -> OpenChain {
    random_open_chain(&mut draw_rng(seed, sites, 0), sites).unwrap()
}

fn random_state(seed: u64, d: usize) -> PopulationState {
    use rand::Rng;
    let mut rng = draw_rng(seed, 99, 1);
    let w: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
    let z: f64 = w.iter().sum();
    PopulationState::new(w.into_iter().map(|x| x / z).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bose_einstein_ratio(omega in 1e-3f64..20.0, t in 1e-2f64..100.0) {
        let n = bose_einstein(omega, t).unwrap();
        let ratio = n / (1.0 + n);
        let expected = (-omega / t).exp();
        prop_assert!(((ratio - expected) / expected).abs() < 1e-12);
    }

    #[test]
    fn two_site_energies(h1 in -2.0f64..2.0, h2 in -2.0f64..2.0, delta in -1.0f64..1.0) {
        let spec = ChainSpec::ising_pair(h1, h2, delta).unwrap();
        let dec = spectral_decomposition(&build_hamiltonian(&spec).unwrap()).unwrap();
        let mut expected = vec![h1 + h2 - delta, h1 - h2 + delta, -h1 + h2 + delta, -h1 - h2 - delta];
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (e, x) in dec.energies().iter().zip(&expected) {
            prop_assert!((e - x).abs() < 1e-12);
        }
        prop_assert!(max_abs(&(dec.reconstruct() - build_hamiltonian(&spec).unwrap())) < 1e-10);
    }

    #[test]
    fn frustration_is_label_free(
        h in prop::collection::vec(-1.0f64..1.0, 3),
        d in prop::collection::vec(-1.0f64..1.0, 3),
        perm in Just(vec![1usize, 2, 3]).prop_shuffle(),
    ) {
        let spec = ChainSpec::new(
            h,
            vec![Coupling::new(1, 2, d[0]), Coupling::new(2, 3, d[1]), Coupling::new(1, 3, d[2])],
        ).unwrap();
        let relabelled = spec.permuted(&perm).unwrap();
        prop_assert_eq!(check_frustration(&spec).unwrap(), check_frustration(&relabelled).unwrap());
    }

    #[test]
    fn detailed_balance_on_random_chains(seed in any::<u64>(), sites in 2usize..=3) {
        let chain = random_chain(seed, sites);
        let rates = chain.rate_matrix().unwrap();
        let t = chain.baths().temperature();
        prop_assert!(detailed_balance_audit(&rates, chain.decomposition(), t).unwrap() < 1e-10);
        prop_assert!(rates.max_column_sum() < 1e-12 * rates.rate_scale().max(1.0));
    }

    #[test]
    fn connected_steady_state_is_gibbs(seed in any::<u64>(), sites in 2usize..=3) {
        let chain = random_chain(seed, sites);
        let rates = chain.rate_matrix().unwrap();
        prop_assert_eq!(connectivity_blocks(&rates).len(), 1);
        let gibbs = gibbs_state(chain.decomposition(), chain.baths().temperature()).unwrap();
        let residual = rates.apply(gibbs.vector());
        prop_assert!(residual.iter().all(|x| x.abs() < 1e-10));
        let ss = steady_states(&rates, DEFAULT_KERNEL_TOL).unwrap();
        prop_assert_eq!(ss.len(), 1);
        prop_assert!(ss[0].max_abs_diff(&gibbs) < 1e-9);
    }

    #[test]
    fn semigroup(seed in any::<u64>(), t in 0.01f64..5.0, s in 0.01f64..5.0) {
        let chain = random_chain(seed, 2);
        let rates = chain.rate_matrix().unwrap();
        let p0 = random_state(seed, rates.dimension());
        let direct = propagate_populations(&rates, &p0, &[t + s]).unwrap();
        let half = propagate_populations(&rates, &p0, &[s]).unwrap();
        let composed = propagate_populations(&rates, half.last().unwrap(), &[t]).unwrap();
        prop_assert!(direct.last().unwrap().max_abs_diff(composed.last().unwrap()) < 1e-9);
    }

    #[test]
    fn block_weights_conserved(seed in any::<u64>(), t_bath in 0.01f64..100.0, t in 0.0f64..1000.0) {
        let chain = OpenChain::new(ChainSpec::reference_pair(), BathConfig::sigma_x(t_bath, &[0.0, 1.0]).unwrap()).unwrap();
        let rates = chain.rate_matrix().unwrap();
        let blocks = connectivity_blocks(&rates);
        let p0 = random_state(seed, 4);
        let traj = propagate_populations(&rates, &p0, &[t]).unwrap();
        for (w0, w) in blocks.block_weights(&p0).iter().zip(blocks.block_weights(traj.last().unwrap())) {
            prop_assert!((w0 - w).abs() < 1e-12);
        }
    }
}

#[test]
fn x_coupling_exchanges_energy() {
    let h = build_hamiltonian(&ChainSpec::reference_pair()).unwrap();
    for site in 1..=2 {
        let s = site_operator::<f64>(PauliAxis::X, site, 2);
        assert!(max_abs(&(&h * &s - &s * &h)) > 0.5);
    }
}

#[test]
fn coupling_elements_follow_the_eigenbasis() {
    // Reversing site labels reorders basis states but not energy levels.
    let spec = ChainSpec::ising_pair(1.0, 0.5, 1.0 / 3.0).unwrap();
    let swapped = spec.permuted(&[2, 1]).unwrap();
    let elems = |s: &ChainSpec, axis_site: usize| {
        let dec = spectral_decomposition(&build_hamiltonian(s).unwrap()).unwrap();
        let baths = BathConfig::sigma_x(1.0, &[1.0, 1.0]).unwrap();
        let e = coupling_matrix_elements(&baths, &dec).unwrap();
        e.matrix(axis_site).clone()
    };
    assert!(max_abs(&(elems(&spec, 0) - elems(&swapped, 1))) < 1e-14);
    assert!(max_abs(&(elems(&spec, 1) - elems(&swapped, 0))) < 1e-14);
}
