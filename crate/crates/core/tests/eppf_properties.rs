use oas_core::partition::enumerate_partitions;
use oas_core::species::{eppf_gnedin_marginal, eppf_mfm_given_m, gnedin_prior_pmf};
use oas_core::{BlockCounts, MixingPrior, OrderedPartition};
use proptest::prelude::*;

fn priors() -> Vec<MixingPrior> {
    vec![
        MixingPrior::dirichlet_process(1.0).unwrap(),
        MixingPrior::pitman_yor(0.5, 0.2).unwrap(),
        MixingPrior::finite_dirichlet(1.0, 3).unwrap(),
        MixingPrior::gnedin(0.5).unwrap(),
    ]
}

fn eppf(prior: &MixingPrior, counts: &[usize]) -> f64 {
    prior.log_eppf(&BlockCounts::new(counts.to_vec()).unwrap()).unwrap().exp()
}

#[test]
fn probabilities_over_partitions_sum_to_one() {
    for prior in priors() {
        for n in 1..=7 {
            let total: f64 = enumerate_partitions(n)
                .unwrap()
                .into_iter()
                .map(|p| eppf(&prior, OrderedPartition::from_rgs(p).unwrap().counts().as_slice()))
                .sum();
            assert!((total - 1.0).abs() < 1e-12, "{prior} n={n}: {total}");
        }
    }
}

#[test]
fn addition_rule_holds() {
    for prior in priors() {
        for n in 1..=6 {
            for p in enumerate_partitions(n).unwrap() {
                let c = OrderedPartition::from_rgs(p).unwrap().counts();
                let mut next: f64 = (0..c.k()).map(|j| eppf(&prior, c.with_increment(j).as_slice())).sum();
                next += eppf(&prior, c.with_new_block().as_slice());
                let here = eppf(&prior, c.as_slice());
                assert!((next - here).abs() <= 1e-10 * here.max(1e-300), "{prior} {:?}", c.as_slice());
            }
        }
    }
}

#[test]
fn gnedin_marginal_is_the_mixture_over_m() {
    let gh = 0.5;
    for counts in [vec![1], vec![2, 1], vec![3, 1, 1], vec![2, 2, 1, 1]] {
        let c = BlockCounts::new(counts.clone()).unwrap();
        let mut direct = 0.0;
        for m in c.k() as u64..200_000 {
            direct += gnedin_prior_pmf(m, gh).unwrap() * eppf_mfm_given_m(&c, 1.0, m).unwrap();
        }
        let closed = eppf_gnedin_marginal(&c, gh).unwrap();
        // the neglected tail is O(M^{-γ̂}) times a factor that vanishes for k > 1
        let tol = if c.k() == 1 { 5e-3 } else { 1e-4 };
        assert!((direct - closed).abs() < tol * closed, "{counts:?}: {direct} vs {closed}");
    }
}

proptest! {
    #[test]
    fn eppf_is_symmetric(counts in prop::collection::vec(1usize..5, 1..6), seed in 0u64..1000) {
        let mut shuffled = counts.clone();
        // a seed-driven rotation plus reversal covers distinct orders
        let r = (seed as usize) % shuffled.len();
        shuffled.rotate_left(r);
        if seed % 2 == 0 {
            shuffled.reverse();
        }
        for prior in priors() {
            if let Some(m) = prior.fixed_support().and_then(|s| s.finite()) {
                if counts.len() as u64 > m {
                    continue;
                }
            }
            prop_assert_eq!(eppf(&prior, &counts), eppf(&prior, &shuffled));
        }
    }
}
