//! The eight synthetic 3D Tetris shapes, four points each.

use super::{Dataset, LabeledCloud};
use crate::geom::Vec3;

const SHAPES: [(&str, [[f64; 3]; 4]); 8] = [
    (
        "chiral_shape_1",
        [[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0]],
    ),
    (
        "chiral_shape_2",
        [[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [1.0, -1.0, 0.0]],
    ),
    (
        "square",
        [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]],
    ),
    (
        "line",
        [[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 2.0], [0.0, 0.0, 3.0]],
    ),
    (
        "corner",
        [[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]],
    ),
    (
        "L",
        [[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 2.0], [0.0, 1.0, 0.0]],
    ),
    (
        "T",
        [[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 2.0], [0.0, 1.0, 1.0]],
    ),
    (
        "zigzag",
        [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [2.0, 1.0, 0.0]],
    ),
];

/// The eight shapes in their canonical orientation, one cloud per class, in
/// the published class order.
pub fn tetris_dataset() -> Dataset {
    let class_names: Vec<String> = SHAPES.iter().map(|(name, _)| name.to_string()).collect();
    let clouds = SHAPES
        .iter()
        .enumerate()
        .map(|(label, (name, points))| LabeledCloud {
            id: name.to_string(),
            label,
            points: points.iter().map(|&p| Vec3::from_array(p)).collect(),
        })
        .collect();
    Dataset::new(class_names, 4, "abstract", clouds).expect("static shapes are consistent")
}
