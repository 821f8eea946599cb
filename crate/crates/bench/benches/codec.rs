use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gpolar::{
    construct_polar, observation_pair, sample_output, sce_decode, BscMixture, LikelihoodPair,
    ThresholdVector, DEFAULT_L_MAX, DEFAULT_MERGE_TOL,
};

fn bench_codec(c: &mut Criterion) {
    let mut group = c.benchmark_group("codec");
    group.sample_size(20);
    for n in [12u32, 16u32] {
        let len = 1usize << n;
        let w = BscMixture::bec(0.3).unwrap();
        let canonical = w.canonicalize(DEFAULT_MERGE_TOL);
        let code = construct_polar(&w, n, len / 2, DEFAULT_L_MAX).unwrap();
        let thresholds = ThresholdVector::uniform(code.dimension(), 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let message: Vec<u8> = (0..code.dimension()).map(|_| rng.gen::<bool>() as u8).collect();
        let codeword = code.encode(&message).unwrap();
        let pairs: Vec<LikelihoodPair> = codeword
            .iter()
            .map(|&bit| {
                observation_pair(&canonical, sample_output(&canonical, bit, &mut rng)).unwrap()
            })
            .collect();

        group.throughput(Throughput::Elements(len as u64));
        group.bench_with_input(BenchmarkId::new("encode", n), &n, |b, _| {
            b.iter(|| code.encode(&message).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("decode", n), &n, |b, _| {
            b.iter(|| sce_decode(&code, &pairs, &thresholds).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_codec);
criterion_main!(benches);
