use criterion::{criterion_group, criterion_main, Criterion};
use oas_core::species::gnedin_m_posterior;
use oas_core::{BlockCounts, MixingPrior};
use std::hint::black_box;

fn eppf(c: &mut Criterion) {
    let counts = BlockCounts::new(vec![40, 35, 30, 20, 10, 5, 2, 1, 1]).unwrap();
    for (name, prior) in [
        ("pitman_yor", MixingPrior::pitman_yor(0.5, 0.2).unwrap()),
        ("finite_dirichlet", MixingPrior::finite_dirichlet(1.0, 12).unwrap()),
        ("gnedin", MixingPrior::gnedin(0.5).unwrap()),
    ] {
        c.bench_function(&format!("log_eppf_{name}"), |b| b.iter(|| prior.log_eppf(black_box(&counts)).unwrap()));
    }
    c.bench_function("gnedin_m_posterior_first_1000", |b| {
        b.iter(|| gnedin_m_posterior(black_box(9), 144, 0.5).unwrap().iter().take(1000).map(|(_, q)| q).sum::<f64>())
    });
}

criterion_group!(benches, eppf);
criterion_main!(benches);
