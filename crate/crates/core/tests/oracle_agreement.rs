//! Cross-checks between the multi-start optimizer and the exhaustive
//! two-qubit grid oracle, plus independent recomputations of optimizer
//! outputs.

use nonclassical::optimize::OptimizerConfig;
use nonclassical::quantumness;
use nonclassical::sampling::{
    random_lowrank_thm3, random_separable_thm2, RngStream,
};
use nonclassical::state::{dephased_diagonal, shannon_bits, DensityMatrix};

fn quick_cfg(seed: u64) -> OptimizerConfig {
    OptimizerConfig {
        restarts: 8,
        max_evals_per_restart: 3000,
        seed,
        ..OptimizerConfig::default()
    }
}

fn random_two_qubit_states(count: usize, seed: u64) -> Vec<DensityMatrix> {
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let mut rng = RngStream::new(seed, k as u64).rng();
        let rho = if k % 2 == 0 {
            random_lowrank_thm3(2, 2 + k % 3, &mut rng).unwrap()
        } else {
            random_separable_thm2(2, 1 + k % 4, &mut rng).unwrap()
        };
        out.push(rho);
    }
    out
}

#[test]
fn optimizer_matches_grid_on_req() {
    for (k, rho) in random_two_qubit_states(25, 101).iter().enumerate() {
        let grid = quantumness::req_grid_certified(rho, 3.0).unwrap();
        let opt = quantumness::req(rho, &quick_cfg(k as u64)).unwrap();
        // The optimizer is an upper bound; the grid is exact to ~2e-3.
        assert!(
            opt.value <= grid.value + 2e-3 && opt.value >= grid.value - 2e-3,
            "state {k}: optimizer {} vs grid {}",
            opt.value,
            grid.value
        );
    }
}

#[test]
fn optimizer_matches_grid_on_coherence() {
    for (k, rho) in random_two_qubit_states(15, 202).iter().enumerate() {
        let grid = quantumness::negativity_of_quantumness_grid_certified(rho, 3.0).unwrap();
        let opt = quantumness::negativity_of_quantumness(rho, &quick_cfg(k as u64)).unwrap();
        assert!(
            opt.value <= grid.value + 2e-3 && opt.value >= grid.value - 2e-3,
            "state {k}: optimizer {} vs grid {}",
            opt.value,
            grid.value
        );
    }
}

#[test]
fn reported_basis_reproduces_reported_value() {
    for (k, rho) in random_two_qubit_states(10, 303).iter().enumerate() {
        let est = quantumness::req(rho, &quick_cfg(k as u64)).unwrap();
        let recomputed = shannon_bits(dephased_diagonal(rho, &est.best_basis).unwrap())
            - rho.von_neumann_entropy();
        assert!(
            (est.value - recomputed.max(0.0)).abs() < 1e-9,
            "state {k}: value {} but basis gives {recomputed}",
            est.value
        );
    }
}
