use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use secure_mimo::an_precoder::{poly_an_precoder, random_an_precoder, sns_precoder};
use secure_mimo::analytics::{secrecy_lower_bound, sinr_analytic, Regularization};
use secure_mimo::asymptotics::an_poly_coefficients;
use secure_mimo::data_precoder::{czf_precoder, mf_precoder, poly_data_precoder, srci_precoder, szf_precoder};
use secure_mimo::linalg::complex_gaussian;
use secure_mimo::montecarlo::ergodic_secrecy_rate;
use secure_mimo::{AnKind, DataKind};
use secure_mimo_bench::fixture;

fn construction(c: &mut Criterion) {
    let mut g = c.benchmark_group("build");
    for &k in &[8usize, 32] {
        let f = fixture(2, k, 256);
        let h = f.estimate.in_cell(0);
        let stacked = f.estimate.stacked(0);
        g.bench_with_input(BenchmarkId::new("MF", k), &k, |b, _| b.iter(|| mf_precoder(h).unwrap()));
        g.bench_with_input(BenchmarkId::new("SZF", k), &k, |b, _| b.iter(|| szf_precoder(h).unwrap()));
        g.bench_with_input(BenchmarkId::new("SRCI", k), &k, |b, _| b.iter(|| srci_precoder(h, 0.05).unwrap()));
        g.bench_with_input(BenchmarkId::new("CZF", k), &k, |b, _| b.iter(|| czf_precoder(&stacked, 0, k).unwrap()));
        g.bench_with_input(BenchmarkId::new("POLY-3", k), &k, |b, _| {
            b.iter(|| poly_data_precoder(h, &[1.0, -0.4, 0.1, -0.01]).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("SNS", k), &k, |b, _| b.iter(|| sns_precoder(h).unwrap()));
        let nu = an_poly_coefficients(k as f64 / 256.0, 5).unwrap().coefficients;
        g.bench_with_input(BenchmarkId::new("POLY-AN-5", k), &k, |b, _| b.iter(|| poly_an_precoder(h, &nu).unwrap()));
    }
    g.bench_function("RANDOM/256", |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        b.iter(|| random_an_precoder(&mut rng, 256))
    });
    g.finish();
}

fn per_symbol(c: &mut Criterion) {
    let mut g = c.benchmark_group("apply");
    let f = fixture(2, 16, 256);
    let h = f.estimate.in_cell(0);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let s = complex_gaussian(&mut rng, 16, 1, 1.0).column(0).into_owned();
    let z = complex_gaussian(&mut rng, 256, 1, 1.0).column(0).into_owned();
    let szf = szf_precoder(h).unwrap();
    let poly = poly_data_precoder(h, &[1.0, -0.4, 0.1]).unwrap();
    let sns = sns_precoder(h).unwrap();
    let poly_an = poly_an_precoder(h, &an_poly_coefficients(16.0 / 256.0, 3).unwrap().coefficients).unwrap();
    let random = random_an_precoder(&mut rng, 256);
    g.bench_function("SZF", |b| b.iter(|| szf.apply(&s).unwrap()));
    g.bench_function("POLY-2 Horner", |b| b.iter(|| poly.apply(&s).unwrap()));
    g.bench_function("SNS", |b| b.iter(|| sns.apply(&z).unwrap()));
    g.bench_function("POLY-AN-3 Horner", |b| b.iter(|| poly_an.apply(&z).unwrap()));
    g.bench_function("RANDOM", |b| b.iter(|| random.apply(&z).unwrap()));
    g.finish();
}

fn evaluation(c: &mut Criterion) {
    let f = fixture(2, 32, 256);
    c.bench_function("closed-form SINR, all pairs", |b| {
        b.iter(|| {
            for d in DataKind::CONVENTIONAL {
                for a in AnKind::CONVENTIONAL {
                    let _ = sinr_analytic(d, a, &f.config, Regularization::Optimal);
                }
            }
        })
    });
    c.bench_function("secrecy lower bound SRCI+SNS", |b| {
        b.iter(|| secrecy_lower_bound(DataKind::Srci, AnKind::Sns, &f.config).unwrap())
    });
    let small = fixture(2, 8, 64);
    let mut g = c.benchmark_group("monte carlo");
    g.sample_size(10);
    g.bench_function("SZF+SNS 50 draws, N_T=64", |b| {
        b.iter(|| ergodic_secrecy_rate(&small.config, DataKind::Szf, AnKind::Sns, 50, 3).unwrap())
    });
    g.finish();
}

criterion_group!(benches, construction, per_symbol, evaluation);
criterion_main!(benches);
