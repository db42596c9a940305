use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sketchchain_core::corpus::{extract_record, ingest_corpus, ChainRecord, ContourRecord};
use sketchchain_core::index::{build_tree, read_index, write_index};
use sketchchain_core::model::{ChainSource, Point2};
use sketchchain_core::params::Params;
use sketchchain_core::retrieval::{sketch_to_chains, Retriever, SearchMode};
use sketchchain_core::synth::{random_chain, shape_instance, similarity_transform, ShapeClass};
use sketchchain_core::wire::{QueryRequest, QueryResponse};
use sketchchain_core::Error;

fn jsonl(records: &[ChainRecord]) -> String {
    let mut out = Vec::new();
    writeln!(out, "{{\"version\":1}}").unwrap();
    for r in records {
        serde_json::to_writer(&mut out, r).unwrap();
        out.push(b'\n');
    }
    String::from_utf8(out).unwrap()
}

#[test]
fn thousand_record_corpus_with_bad_lines() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let records: Vec<ChainRecord> = (0..1000)
        .map(|i| ChainRecord {
            image_id: format!("img{}", i / 4),
            chain_id: format!("c{}", i % 4),
            source: if i % 3 == 0 { ChainSource::Region } else { ChainSource::Csn },
            points: random_chain(rng.random_range(3..20), &mut rng).iter().map(|&p| p.into()).collect(),
            original_size: [256.0, 256.0],
        })
        .collect();
    let mut text = jsonl(&records);
    text.push_str("{\"image_id\":\"bad\"}\n");
    text.push_str("{\"image_id\":\"nan\",\"chain_id\":\"c\",\"source\":\"csn\",\"points\":[[0,0],[1,1]],\"original_size\":[0,10]}\n");
    let report = ingest_corpus(text.as_bytes(), &Params::default()).unwrap();
    assert_eq!(report.store.len(), 1000);
    assert_eq!(report.store.image_count(), 250);
    assert_eq!(report.skipped.iter().map(|s| s.line).collect::<Vec<_>>(), vec![1002, 1003]);
    assert_eq!(report.lines, 1003);
}

fn contour_image(id: &str, outline: &[Point2], size: [f64; 2]) -> ContourRecord {
    ContourRecord {
        image_id: id.into(),
        original_size: size,
        polylines: vec![outline.iter().map(|&p| p.into()).collect()],
        regions: Vec::new(),
        edge_mask: None,
        edge_mask_image: None,
    }
}

/// Extracts a small database of shape drawings, one per image, and returns
/// the outlines keyed by image id.
fn shape_database(params: &Params) -> (String, Vec<(String, Vec<Point2>)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut outlines = Vec::new();
    let mut records = Vec::new();
    for (k, class) in ShapeClass::ALL.iter().cycle().take(36).enumerate() {
        let id = format!("{}-{k}", class.name());
        // Each drawing is distorted on its own, at twice the normalized frame.
        let outline: Vec<Point2> = shape_instance(*class, 0.08, &mut rng)
            .iter()
            .map(|p| Point2::new(p.x * 2.0, p.y * 2.0))
            .collect();
        let rec = contour_image(&id, &outline, [512.0, 512.0]);
        records.extend(extract_record(&rec, params).unwrap());
        outlines.push((id, outline));
    }
    (jsonl(&records), outlines)
}

#[test]
fn redrawn_image_ranks_first() {
    let params = Params::default();
    let (text, outlines) = shape_database(&params);
    let report = ingest_corpus(text.as_bytes(), &params).unwrap();
    assert!(report.skipped.is_empty());
    assert_eq!(report.store.image_count(), outlines.len());
    let tree = build_tree(report.store, &params, 3);
    let retriever = Retriever::new(read_index(&write_index(&tree)).unwrap());

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (id, outline) in outlines.iter().step_by(5) {
        // The same drawing, moved, turned and rescaled on a wide canvas.
        let angle = rng.random_range(-0.5..0.5);
        let moved = similarity_transform(outline, 1.5, angle, Point2::new(400.0, 200.0));
        let min_x = moved.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
        let min_y = moved.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
        let stroke: Vec<Point2> = moved.iter().map(|p| Point2::new(p.x - min_x + 10.0, p.y - min_y + 10.0)).collect();
        let sketch = sketch_to_chains(&[stroke], (1600.0, 1200.0), &params).unwrap();
        for mode in [SearchMode::Exhaustive, SearchMode::Tree] {
            let ranked = retriever.query(&sketch, 5, params.retrieval.candidates, mode);
            assert_eq!(&ranked[0].image_id, id, "{mode:?}");
            assert!(ranked.windows(2).all(|w| w[0].score >= w[1].score));
        }
    }
}

#[test]
fn response_pairs_point_into_both_drawings() {
    let params = Params::default();
    let (text, _) = shape_database(&params);
    let store = ingest_corpus(text.as_bytes(), &params).unwrap().store;
    let retriever = Retriever::new(build_tree(store, &params, 3));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let outline = shape_instance(ShapeClass::Mug, 0.02, &mut rng);
    let req = QueryRequest {
        strokes: vec![outline.iter().map(|&p| p.into()).collect()],
        frame: [256.0, 256.0],
        k: 3,
        candidates: None,
    };
    let sketch = sketch_to_chains(&req.stroke_points(), (req.frame[0], req.frame[1]), &params).unwrap();
    let ranked = retriever.query(&sketch, req.k, params.retrieval.candidates, SearchMode::Tree);
    let body = QueryResponse::from_ranked(&ranked);
    assert!(!body.results.is_empty() && body.results.len() <= 3);
    for r in &body.results {
        assert!(!r.pairs.is_empty());
        for p in &r.pairs {
            assert_eq!(p.matched_sketch_points.len(), p.matched_image_points.len());
            assert!(p.matched_sketch_points.len() >= 1);
            assert!(p.cs >= params.retrieval.cs_floor);
            assert!(p.gc > 0.0 && p.gc <= 1.0);
            assert!(p.sketch_chain_id.starts_with('s'));
        }
    }
    let json = serde_json::to_string(&body).unwrap();
    let back: QueryResponse = serde_json::from_str(&json).unwrap();
    assert_eq!(back, body);
}

#[test]
fn empty_and_simple_sketches_are_refused() {
    let params = Params::default();
    let none = sketch_to_chains(&[vec![Point2::new(3.0, 3.0), Point2::new(3.0, 3.0)]], (100.0, 100.0), &params);
    assert!(matches!(none, Err(Error::EmptyQuery { code: "no_strokes", .. })));
    let line = vec![Point2::new(0.0, 0.0), Point2::new(90.0, 40.0)];
    assert!(matches!(
        sketch_to_chains(&[line], (100.0, 100.0), &params),
        Err(Error::EmptyQuery { code: "too_simple", .. })
    ));
}

#[test]
fn params_ledger_round_trip() {
    let mut p = Params::default();
    p.index.branching = 8;
    p.matching.lambda_ac = 3.5;
    let text = p.to_toml_string();
    assert_eq!(Params::from_toml_str(&text).unwrap(), p);
    assert!(Params::from_toml_str("[index]\nbranching = 1\n").is_err());
    assert!(Params::from_toml_str("[nope]\nx = 1\n").is_err());
}
