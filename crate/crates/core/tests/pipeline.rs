//! Library-level pipeline checks: a trained Tetris classifier predicts every
//! shape by name, survives a checkpoint round trip, and steers correctly on
//! rotated inputs after reload.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sphn::data::{
    checkpoint_from_str, checkpoint_to_string, tetris_dataset, AncestorCheckpoint, Checkpoint,
    SteerableCheckpoint,
};
use sphn::geom::{rotate_cloud, sample_rotation};
use sphn::mlgp::predict;
use sphn::steer::build_steerable;
use sphn::train::{train, TrainConfig};

#[test]
fn trained_classifier_names_every_shape() {
    let data = tetris_dataset();
    let cfg = TrainConfig {
        epochs: 800,
        ..TrainConfig::default()
    };
    let trained = train(&data, &cfg).unwrap();

    // Every shape, by name; `square` is the spot check for a single class.
    let square = data
        .clouds
        .iter()
        .find(|c| data.class_names[c.label] == "square")
        .unwrap();
    assert_eq!(predict(&trained.params, &square.points).unwrap(), square.label);
    for cloud in &data.clouds {
        assert_eq!(
            predict(&trained.params, &cloud.points).unwrap(),
            cloud.label,
            "misclassified {}",
            cloud.id
        );
    }

    // Steer, serialize, reload, and classify rotated shapes with the
    // reloaded model.
    let steerable = build_steerable(&trained.params).unwrap();
    let text = checkpoint_to_string(&Checkpoint::Steerable(SteerableCheckpoint {
        model: steerable,
        config: cfg.clone(),
    }));
    let reloaded = match checkpoint_from_str("mem", &text).unwrap() {
        Checkpoint::Steerable(s) => s.model,
        other => panic!("wrong kind {other:?}"),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let rotation = sample_rotation(&mut rng);
        let steered = reloaded.set_rotation(&rotation);
        for cloud in &data.clouds {
            let rotated = rotate_cloud(&rotation, &cloud.points);
            assert_eq!(
                steered.predict(&rotated).unwrap(),
                cloud.label,
                "steered model misclassified rotated {}",
                cloud.id
            );
        }
    }

    // The ancestor checkpoint text is reproducible from a retrained model.
    let retrained = train(&data, &cfg).unwrap();
    let a = checkpoint_to_string(&Checkpoint::Ancestor(AncestorCheckpoint {
        params: trained.params,
        config: cfg.clone(),
    }));
    let b = checkpoint_to_string(&Checkpoint::Ancestor(AncestorCheckpoint {
        params: retrained.params,
        config: cfg,
    }));
    assert_eq!(a, b);
}
