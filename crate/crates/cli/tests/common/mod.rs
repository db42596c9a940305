use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sketchchain_core::corpus::ContourRecord;
use sketchchain_core::model::Point2;
use sketchchain_core::synth::{shape_instance, ShapeClass};
use sketchchain_core::wire::QueryRequest;

/// Writes a contour JSONL file with `per_class` drawings of every shape class
/// and returns its path plus the `image_id -> class` labels.
pub fn write_contours(dir: &Path, per_class: usize) -> (PathBuf, Vec<(String, String)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let path = dir.join("contours.jsonl");
    let mut f = std::fs::File::create(&path).unwrap();
    let mut labels = Vec::new();
    for class in ShapeClass::ALL {
        for i in 0..per_class {
            let id = format!("{}-{i}", class.name());
            let outline = shape_instance(class, 0.08, &mut rng);
            let rec = ContourRecord {
                image_id: id.clone(),
                original_size: [256.0, 256.0],
                polylines: vec![outline.iter().map(|&p| p.into()).collect()],
                regions: Vec::new(),
                edge_mask: None,
                edge_mask_image: None,
            };
            serde_json::to_writer(&mut f, &rec).unwrap();
            f.write_all(b"\n").unwrap();
            labels.push((id, class.name().to_string()));
        }
    }
    (path, labels)
}

pub fn sketch_of(class: ShapeClass, seed: u64) -> Vec<Vec<[f64; 2]>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outline: Vec<Point2> = shape_instance(class, 0.02, &mut rng);
    vec![outline.iter().map(|&p| p.into()).collect()]
}

pub fn request(class: ShapeClass, k: usize) -> QueryRequest {
    QueryRequest {
        strokes: sketch_of(class, 99),
        frame: [256.0, 256.0],
        k,
        candidates: None,
    }
}
