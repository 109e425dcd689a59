use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use topic_embedding::corpus::generate_synthetic;
use topic_embedding::inference::Trainer;
use topic_embedding::model::ModelConfig;
use topic_embedding::parallel::Executor;

fn config(k: usize) -> ModelConfig {
    let mut c = ModelConfig::new(k);
    c.embed_dim = 20;
    c.doc_top_topics = 20;
    c.topic_top_words = 100;
    c.batch_size = 200;
    c
}

fn minibatch_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("minibatch_step");
    group.sample_size(10);
    let workers = std::thread::available_parallelism().map_or(2, |n| n.get().max(2));
    for &k in &[50, 100] {
        let config = config(k);
        let (corpus, _) = generate_synthetic(&config, 1000, 2000, 80, 1).unwrap();
        let executors = [
            ("sequential", Executor::sequential()),
            ("parallel", Executor::new(workers).unwrap()),
        ];
        for (name, executor) in &executors {
            let mut trainer = Trainer::new(&corpus, &config, executor).unwrap();
            let batch = trainer.minibatches(0).swap_remove(0);
            group.bench_with_input(BenchmarkId::new(*name, k), &batch, |b, batch| {
                b.iter(|| trainer.step(batch).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, minibatch_step);
criterion_main!(benches);
