use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sphn::data::tetris_dataset;
use sphn::geom::{geodesic_rotation, sample_rotation, Vec3};
use sphn::mlgp::mlgp_forward;
use sphn::steer::build_steerable;
use sphn::train::{train, TrainConfig};

fn benches(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let data = tetris_dataset();
    let trained = train(
        &data,
        &TrainConfig {
            epochs: 400,
            ..TrainConfig::default()
        },
    )
    .unwrap()
    .params;
    let steerable = build_steerable(&trained).unwrap();
    let cloud = data.clouds[2].points.clone();
    let rotation = sample_rotation(&mut rng);
    let rotated: Vec<Vec3> = cloud.iter().map(|&p| rotation.apply(p)).collect();

    c.bench_function("geodesic_rotation", |b| {
        b.iter(|| geodesic_rotation(Vec3::new(0.3, -1.2, 0.4), Vec3::new(1.0, 1.0, 1.0)).unwrap())
    });

    c.bench_function("mlgp_forward_tetris", |b| {
        b.iter(|| mlgp_forward(&trained, &cloud).unwrap())
    });

    c.bench_function("build_steerable_tetris", |b| {
        b.iter(|| build_steerable(&trained).unwrap())
    });

    c.bench_function("set_rotation_20_banks", |b| {
        b.iter(|| steerable.set_rotation(&rotation))
    });

    let steered = steerable.set_rotation(&rotation);
    c.bench_function("steerable_forward_tetris", |b| {
        b.iter(|| steered.forward(&rotated).unwrap())
    });

    c.bench_function("train_epoch_tetris", |b| {
        let cfg = TrainConfig {
            epochs: 1,
            ..TrainConfig::default()
        };
        b.iter(|| train(&data, &cfg).unwrap())
    });
}

criterion_group!(pipeline, benches);
criterion_main!(pipeline);
