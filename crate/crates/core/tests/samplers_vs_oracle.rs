use oas_core::diagnostics::{partition_frequencies, total_variation};
use oas_core::oracle::exact_partition_posterior;
use oas_core::{
    run_chain, ChainTrace, InitMode, MarginalSampler, MixingPrior, NormalInverseGamma, OrderedSampler, Schedule,
    SliceSampler,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const DATA: [f64; 5] = [-1.5, -1.1, 0.2, 1.9, 2.4];

fn family() -> NormalInverseGamma {
    NormalInverseGamma::new(0.0, 0.5, 2.0, 1.0).unwrap()
}

fn tv_to_oracle(trace: &ChainTrace, prior: &MixingPrior) -> f64 {
    let exact = exact_partition_posterior(&DATA, prior, &family()).unwrap();
    total_variation(exact.as_map(), partition_frequencies(trace))
}

fn schedule() -> Schedule {
    Schedule::new(61_000, 1_000, 1).unwrap()
}

#[test]
fn ordered_matches_oracle() {
    for (seed, prior) in [
        (11, MixingPrior::dirichlet_process(1.0).unwrap()),
        (12, MixingPrior::gnedin(0.5).unwrap()),
        (13, MixingPrior::pitman_yor(0.5, 0.2).unwrap()),
        (14, MixingPrior::finite_dirichlet(1.0, 3).unwrap()),
    ] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = OrderedSampler::new(&DATA, family(), prior.clone(), InitMode::SingleBlock, &mut rng).unwrap();
        let trace = run_chain(&mut s, &mut rng, schedule(), prior.clone(), seed, true).unwrap();
        let tv = tv_to_oracle(&trace, &prior);
        eprintln!("ordered {prior}: tv = {tv:.4}");
        assert!(tv < 0.03, "{prior}: {tv}");
    }
}

#[test]
fn marginal_matches_oracle() {
    for (seed, prior) in [
        (21, MixingPrior::dirichlet_process(1.0).unwrap()),
        (22, MixingPrior::gnedin(0.5).unwrap()),
        (23, MixingPrior::finite_dirichlet(1.0, 3).unwrap()),
    ] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = MarginalSampler::single_block(&DATA, family(), prior.clone(), &mut rng).unwrap();
        let trace = run_chain(&mut s, &mut rng, schedule(), prior.clone(), seed, true).unwrap();
        let tv = tv_to_oracle(&trace, &prior);
        eprintln!("marginal {prior}: tv = {tv:.4}");
        assert!(tv < 0.03, "{prior}: {tv}");
    }
}

#[test]
fn slice_matches_oracle() {
    for (seed, prior) in [
        (31, MixingPrior::dirichlet_process(1.0).unwrap()),
        (32, MixingPrior::pitman_yor(0.2, 1.0).unwrap()),
    ] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = SliceSampler::single_block(&DATA, family(), prior.clone(), &mut rng).unwrap();
        let trace = run_chain(&mut s, &mut rng, schedule(), prior.clone(), seed, true).unwrap();
        let tv = tv_to_oracle(&trace, &prior);
        eprintln!("slice {prior}: tv = {tv:.4}");
        assert!(tv < 0.03, "{prior}: {tv}");
    }
}
