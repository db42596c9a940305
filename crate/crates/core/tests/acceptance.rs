//! Acceptance suite. Runs every headline criterion at its stated tolerance
//! and prints one PASS/FAIL line each; exits non-zero if any fails.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sketchchain_core::descriptor::{descriptor_from_points, mirror_point, sharpness, variant_descriptor};
use sketchchain_core::index::{build_tree, write_index, ChainStore};
use sketchchain_core::matcher::{chain_similarity, dp_match, joint_score, SkipCosts};
use sketchchain_core::model::{ChainDescriptor, ChainSource, FlipVariant, Point2};
use sketchchain_core::params::{MatchParams, Params};
use sketchchain_core::retrieval::{complete_pair_matching, rank_images, sketch_to_chains, Retriever, SearchMode, SketchQuery};
use sketchchain_core::synth::{perturb, place_randomly, random_chain, random_span, shape_instance, similarity_transform, ShapeClass};
use sketchchain_core::Chain;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn random_similarity(points: &[Point2], rng: &mut ChaCha8Rng) -> Vec<Point2> {
    let t = Point2::new(rng.random_range(0.0..256.0), rng.random_range(0.0..256.0));
    similarity_transform(points, rng.random_range(0.2..5.0), rng.random_range(0.0..TAU), t)
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(TAU - d)
}

fn descriptor_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a7);
    let params = MatchParams::default();
    let (mut worst_feature, mut worst_score) = (0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let joints = rng.random_range(5..=30);
        let pts = random_chain(joints, &mut rng);
        let moved = random_similarity(&pts, &mut rng);
        let a = descriptor_from_points(&pts, 0.5).unwrap();
        let b = descriptor_from_points(&moved, 0.5).unwrap();
        for i in 0..a.len() {
            worst_feature = worst_feature
                .max((a.gammas[i] - b.gammas[i]).abs())
                .max(angle_gap(a.thetas[i], b.thetas[i]));
        }
        let own = chain_similarity(&a, &a, false, &params).score;
        let cross = chain_similarity(&a, &b, false, &params).score;
        worst_score = worst_score.max((own - cross).abs());
    }
    outcome(
        worst_feature <= 1e-6 && worst_score <= 1e-6,
        format!("10000 chains, max feature error {worst_feature:.2e}, max score error {worst_score:.2e}"),
    )
}

/// Best total over every non-empty strictly increasing list of joint pairs,
/// charging the skip penalty of every joint passed over between two pairs.
fn brute_force_cms(a: &ChainDescriptor, b: &ChainDescriptor, costs: SkipCosts, p: &MatchParams) -> f64 {
    let s = |i: usize, j: usize| joint_score(a.gammas[i], a.thetas[i], b.gammas[j], b.thetas[j], p);
    let mut best = 0.0f64;
    let mut stack: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..a.len() {
        for j in 0..b.len() {
            stack.push((i, j, s(i, j)));
        }
    }
    while let Some((i, j, total)) = stack.pop() {
        best = best.max(total);
        for ni in i + 1..a.len() {
            let gap_a: f64 = (i + 1..ni).map(|k| a.skip_weights[k] * costs.alpha_a).sum();
            for nj in j + 1..b.len() {
                let gap_b: f64 = (j + 1..nj).map(|k| b.skip_weights[k] * costs.alpha_b).sum();
                stack.push((ni, nj, total + s(ni, nj) - gap_a - gap_b));
            }
        }
    }
    best
}

fn random_descriptor(rng: &mut ChaCha8Rng, max_joints: usize) -> ChainDescriptor {
    let joints = rng.random_range(3..=max_joints + 2);
    descriptor_from_points(&random_chain(joints, rng), 0.5).unwrap()
}

fn dp_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xd9);
    let params = MatchParams::default();
    let mut worst = 0.0f64;
    for trial in 0..1000 {
        let a = random_descriptor(&mut rng, 7);
        let b = random_descriptor(&mut rng, 7);
        let costs = if trial % 2 == 0 {
            SkipCosts::new(true, &params)
        } else {
            SkipCosts::new(false, &params)
        };
        for v in FlipVariant::ALL {
            let bv = variant_descriptor(&b, v);
            let dp = dp_match(&a, &bv, costs, &params).cms;
            worst = worst.max((dp - brute_force_cms(&a, &bv, costs, &params)).abs());
        }
    }
    outcome(worst <= 1e-9, format!("1000 pairs x 4 variants, max deviation {worst:.2e}"))
}

fn flip_variants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xf1);
    let mut worst = 0.0f64;
    let mut involution_ok = true;
    for _ in 0..1000 {
        let joints = rng.random_range(3..=30);
        let pts = random_chain(joints, &mut rng);
        let d = descriptor_from_points(&pts, 0.5).unwrap();
        let mut rev = pts.clone();
        rev.reverse();
        let mir: Vec<Point2> = pts.iter().map(|&p| mirror_point(p)).collect();
        let mut revmir = mir.clone();
        revmir.reverse();
        for (v, transformed) in [
            (FlipVariant::Reversed, rev),
            (FlipVariant::Mirrored, mir),
            (FlipVariant::ReversedMirrored, revmir),
        ] {
            let got = variant_descriptor(&d, v);
            let want = descriptor_from_points(&transformed, 0.5).unwrap();
            for i in 0..d.len() {
                worst = worst
                    .max((got.gammas[i] - want.gammas[i]).abs())
                    .max(angle_gap(got.thetas[i], want.thetas[i]))
                    .max((got.skip_weights[i] - want.skip_weights[i]).abs())
                    .max(got.points[i].dist(want.points[i]));
            }
            involution_ok &= variant_descriptor(&got, v) == d;
        }
        involution_ok &= variant_descriptor(&variant_descriptor(&d, FlipVariant::Reversed), FlipVariant::Reversed) == d;
    }
    outcome(
        worst <= 1e-9 && involution_ok,
        format!("1000 chains, max variant deviation {worst:.2e}, exact involution {involution_ok}"),
    )
}

/// Zigzag of `n` joints from `start` along `dir`, with every other joint
/// offset sideways.
fn zig(start: Point2, dir: f64, n: usize, step: f64, height: f64) -> Vec<Point2> {
    let (s, c) = dir.sin_cos();
    (0..n)
        .map(|k| {
            let along = k as f64 * step;
            let side = if k % 2 == 1 { height } else { 0.0 };
            Point2::new(start.x + along * c - side * s, start.y + along * s + side * c)
        })
        .collect()
}

fn gac_discriminativity() -> Outcome {
    let params = MatchParams::default();
    // Image: one long zigzag.
    let image = zig(Point2::new(20.0, 120.0), 0.0, 14, 16.0, 12.0);
    // Sketch: the same zigzag folded back on itself after its seventh joint
    // through one extra cusp joint. The second half is turned by a half
    // turn, so every joint away from the fold keeps its shape.
    let pivot = Point2::new(image[6].x + 20.0, image[6].y + 30.0);
    let fold = |p: &Point2| Point2::new(2.0 * pivot.x - p.x, 2.0 * pivot.y - p.y);
    let mut sketch: Vec<Point2> = image[..7].to_vec();
    sketch.push(Point2::new(image[6].x + 46.0, image[6].y + 30.0));
    sketch.extend(image[7..].iter().map(fold));
    let a = descriptor_from_points(&sketch, 0.5).unwrap();
    let b = descriptor_from_points(&image, 0.5).unwrap();
    let false_match = chain_similarity(&a, &b, true, &params);
    let mut rng = ChaCha8Rng::seed_from_u64(0x9ac);
    let moved = descriptor_from_points(&random_similarity(&sketch, &mut rng), 0.5).unwrap();
    let true_match = chain_similarity(&a, &moved, true, &params);
    let own = chain_similarity(&a, &a, true, &params);
    let skipped = !false_match.skipped_a.is_empty() || !false_match.skipped_b.is_empty();
    let pass = skipped
        && false_match.gac <= 0.5 * true_match.gac
        && (own.gac - 1.0).abs() <= 1e-6
        && (true_match.gac - 1.0).abs() <= 1e-6;
    outcome(
        pass,
        format!(
            "false match GAC {:.4} over {} pairs with {} skips, true match GAC {:.6}, self GAC {:.6}",
            false_match.gac,
            false_match.pairs.len(),
            false_match.skipped_a.len() + false_match.skipped_b.len(),
            true_match.gac,
            own.gac
        ),
    )
}

fn store_with(chains: &[(String, String, Vec<Point2>)]) -> ChainStore {
    let mut store = ChainStore::new();
    for (img, id, pts) in chains {
        let d = descriptor_from_points(pts, 0.5).unwrap();
        store.push(img.clone(), id.clone(), ChainSource::Csn, d).unwrap();
    }
    store
}

fn sketch_of(chains: &[Vec<Point2>]) -> SketchQuery {
    let chains: Vec<Chain> = chains
        .iter()
        .enumerate()
        .map(|(k, pts)| Chain::new("sketch", format!("s{k}"), ChainSource::Sketch, pts.clone()).unwrap())
        .collect();
    SketchQuery::from_chains(chains, 0.5).unwrap()
}

fn geometric_verification() -> Outcome {
    let params = Params::default();
    let unit = |class: ShapeClass, centre: Point2| {
        similarity_transform(&class.closed_chain(), 50.0, 0.3, centre)
    };
    let left = unit(ShapeClass::Star, Point2::new(70.0, 120.0));
    let right = unit(ShapeClass::Arrow, Point2::new(170.0, 100.0));
    let sketch = sketch_of(&[left.clone(), right.clone()]);

    // Consistent image: the whole layout moved, turned and scaled together.
    let layout = |pts: &[Point2]| similarity_transform(pts, 0.8, 0.5, Point2::new(40.0, -20.0));
    // Swapped image: each shape moved, as is, onto the other's place.
    let shift = |pts: &[Point2], d: Point2| -> Vec<Point2> { pts.iter().map(|p| Point2::new(p.x + d.x, p.y + d.y)).collect() };
    let to_right = Point2::new(100.0, -20.0);
    let to_left = Point2::new(-100.0, 20.0);
    let store = store_with(&[
        ("consistent".into(), "c0".into(), layout(&left)),
        ("consistent".into(), "c1".into(), layout(&right)),
        ("swapped".into(), "c0".into(), shift(&left, to_right)),
        ("swapped".into(), "c1".into(), shift(&right, to_left)),
    ]);
    let candidates = vec![
        ("consistent".to_string(), complete_pair_matching(&sketch, &store, &[0, 1], &params)),
        ("swapped".to_string(), complete_pair_matching(&sketch, &store, &[2, 3], &params)),
    ];
    let cs: Vec<Vec<f64>> = candidates
        .iter()
        .map(|(_, pairs)| pairs.iter().map(|p| p.result.score).collect())
        .collect();
    let same_cs = cs[0].len() == 2
        && cs[1].len() == 2
        && cs[0].iter().zip(&cs[1]).all(|(a, b)| (a - b).abs() <= 1e-6);
    let ranked = rank_images(candidates, &params.retrieval);
    let score = |id: &str| ranked.iter().find(|r| r.image_id == id).map_or(0.0, |r| r.score);
    let (good, bad) = (score("consistent"), score("swapped"));
    outcome(
        same_cs && good >= 5.0 * bad && ranked[0].image_id == "consistent",
        format!("consistent {good:.4}, swapped {bad:.4}, ratio {:.1}, equal pair scores {same_cs}", good / bad),
    )
}

const QUERY_CLASSES: [ShapeClass; 4] = [ShapeClass::Star, ShapeClass::Mug, ShapeClass::Bottle, ShapeClass::Swan];

fn synthetic_retrieval() -> Outcome {
    let params = Params::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e7);
    let (mut exhaustive_sum, mut tree_sum) = (0.0, 0.0);
    let mut queries = 0;
    for class in QUERY_CLASSES {
        let mut chains = Vec::new();
        for k in 0..20 {
            chains.push((format!("pos{k}"), "c0".to_string(), shape_instance(class, 0.02, &mut rng)));
        }
        let others: Vec<ShapeClass> = ShapeClass::ALL.into_iter().filter(|&c| c != class).collect();
        for k in 0..200 {
            let other = others[k % others.len()];
            chains.push((format!("neg{k}"), "c0".to_string(), shape_instance(other, 0.02, &mut rng)));
        }
        let tree = build_tree(store_with(&chains), &params, 7);
        let retriever = Retriever::new(tree);
        for _ in 0..5 {
            let q = sketch_of(&[shape_instance(class, 0.02, &mut rng)]);
            let p_at_10 = |mode| {
                let ranked = retriever.query(&q, 10, 30, mode);
                ranked.iter().filter(|r| r.image_id.starts_with("pos")).count() as f64 / 10.0
            };
            exhaustive_sum += p_at_10(SearchMode::Exhaustive);
            tree_sum += p_at_10(SearchMode::Tree);
            queries += 1;
        }
    }
    let (ex, tr) = (exhaustive_sum / queries as f64, tree_sum / queries as f64);
    outcome(
        ex >= 0.9 && tr >= 0.9,
        format!("{queries} queries over 220-image corpora, P@10 exhaustive {ex:.3}, tree {tr:.3}"),
    )
}

/// A chain of the synthetic store: a piece of a shape outline that was
/// distorted on its own before placement, so no two stored chains coincide.
fn store_chain(rng: &mut ChaCha8Rng) -> Vec<Point2> {
    let class = ShapeClass::ALL[rng.random_range(0..ShapeClass::ALL.len())];
    let whole = perturb(&place_randomly(&class.closed_chain(), rng), 0.1, rng);
    perturb(&random_span(&whole, 5, rng), 0.03, rng)
}

fn synthetic_chains(chains: usize, seed: u64) -> Vec<Vec<Point2>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..chains).map(|_| store_chain(&mut rng)).collect()
}

fn store_of(chains: &[Vec<Point2>], per_image: usize) -> ChainStore {
    let list: Vec<(String, String, Vec<Point2>)> = chains
        .iter()
        .enumerate()
        .map(|(i, pts)| (format!("img{:05}", i / per_image), format!("c{}", i % per_image), pts.clone()))
        .collect();
    store_with(&list)
}

fn index_fidelity() -> Outcome {
    let params = Params::default();
    let chains = synthetic_chains(5000, 0x1d3);
    let store = store_of(&chains, 5);
    let tree = build_tree(store.clone(), &params, 42);
    let again = build_tree(store.clone(), &params, 42);
    let serial = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| build_tree(store, &params, 42));
    let bytes = write_index(&tree);
    let identical = bytes == write_index(&again) && bytes == write_index(&serial);

    // Each query is a stored chain moved, turned, rescaled and mildly
    // perturbed, like the positives of the synthetic retrieval corpora.
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e1);
    let costs = SkipCosts::new(true, &params.matching);
    let mut agree = 0;
    for _ in 0..100 {
        let source = &chains[rng.random_range(0..chains.len())];
        let moved = random_similarity(source, &mut rng);
        let q = descriptor_from_points(&perturb(&moved, 0.02, &mut rng), 0.5).unwrap();
        let exhaustive = tree.exhaustive(&q, costs);
        let searched = tree.search(&q, 100, costs);
        if exhaustive.first().map(|h| &h.image_id) == searched.first().map(|h| &h.image_id) {
            agree += 1;
        }
    }
    let stats = tree.stats();
    outcome(
        agree >= 90 && identical,
        format!(
            "top-1 agreement {agree}/100, byte-identical rebuilds {identical}, {} nodes, depth {}",
            stats.nodes, stats.depth
        ),
    )
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    v[v.len() / 2]
}

fn performance() -> Outcome {
    let params = Params::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e5);

    let mut match_times = Vec::new();
    for _ in 0..500 {
        let a = descriptor_from_points(&random_chain(18, &mut rng), 0.5).unwrap();
        let b = descriptor_from_points(&random_chain(18, &mut rng), 0.5).unwrap();
        let t = Instant::now();
        std::hint::black_box(chain_similarity(&a, &b, true, &params.matching));
        match_times.push(t.elapsed());
    }
    let match_median = median(match_times);

    let store = store_of(&synthetic_chains(10_000, 0xb11d), 5);
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let t = Instant::now();
    let tree = single.install(|| build_tree(store, &params, 1));
    let build_time = t.elapsed();

    let retriever = Retriever::new(tree);
    let mut query_times = Vec::new();
    for k in 0..20 {
        let class = QUERY_CLASSES[k % QUERY_CLASSES.len()];
        let outline = shape_instance(class, 0.01, &mut rng);
        let t = Instant::now();
        let q = sketch_to_chains(&[outline], (256.0, 256.0), &params);
        if let Ok(q) = q {
            std::hint::black_box(retriever.query(&q, 10, params.retrieval.candidates, SearchMode::Tree));
        }
        query_times.push(t.elapsed());
    }
    let query_median = median(query_times);
    outcome(
        match_median < Duration::from_millis(1)
            && build_time < Duration::from_secs(60)
            && query_median < Duration::from_millis(200),
        format!(
            "16-joint match median {:?}, 10000-chain single-thread build {:.1?}, query median {:?}",
            match_median, build_time, query_median
        ),
    )
}

fn spot_values() -> Outcome {
    let p = MatchParams::default();
    let ang = joint_score(1.0, PI / 2.0, 1.0, PI, &p);
    let ratio = joint_score(1.0, 2.0, 2.0, 2.0, &p);
    let sharp = sharpness(PI / 2.0);
    let errs = [
        (ang - (-PI).exp()).abs(),
        (ratio - (-0.25f64).exp()).abs(),
        (sharp - (1.0 - (-PI / 2.0).exp())).abs(),
    ];
    outcome(
        errs.iter().all(|&e| e <= 1e-9),
        format!("angle term {ang:.6}, ratio term {ratio:.6}, sharpness {sharp:.6}"),
    )
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("descriptor invariance", descriptor_invariance),
        ("dp oracle equivalence", dp_oracle),
        ("flip involution and variants", flip_variants),
        ("gac discriminativity", gac_discriminativity),
        ("geometric verification", geometric_verification),
        ("synthetic retrieval", synthetic_retrieval),
        ("index fidelity", index_fidelity),
        ("performance", performance),
        ("spot values", spot_values),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut labels: HashMap<&str, bool> = HashMap::new();
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("{status} {name}: {} [{:.1?}]", o.detail, t.elapsed());
        labels.insert(name, o.pass);
        if !o.pass {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", labels.len() - failed, labels.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
