#![allow(dead_code)]

use lipext::imaging::ImageGrid;
use lipext::{BoundaryProblem, VertexFunction, WeightedGraph};
use rand::Rng;

pub const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Three boundary points attached to an inner triangle.
pub fn triangle() -> BoundaryProblem {
    let text = include_str!("../data/triangle.txt");
    lipext::graph_io::parse_graph(text).unwrap()
}

/// The tight extension on [`triangle`], nodes 3..6.
pub fn triangle_tight() -> [[f64; 2]; 3] {
    let d = 2.0 + 2.0 * SQRT3;
    [[1.0 / d, SQRT3 / d], [1.0 / d, 0.25 + SQRT3 / 4.0], [0.5, 0.5]]
}

/// The componentwise extension on [`triangle`], nodes 3..6.
pub fn triangle_componentwise() -> [[f64; 2]; 3] {
    [[SQRT3 / 6.0, 1.0 / 3.0], [SQRT3 / 6.0, 2.0 / 3.0], [1.0 / SQRT3, 0.5]]
}

pub fn with_interior(prob: &BoundaryProblem, rows: &[[f64; 2]]) -> VertexFunction {
    let mut u = prob.filled_with(&[0.0, 0.0]);
    for (k, r) in rows.iter().enumerate() {
        u.set(3 + k, r);
    }
    u
}

pub fn max_row_error(u: &VertexFunction, rows: &[[f64; 2]]) -> f64 {
    rows.iter()
        .enumerate()
        .flat_map(|(k, r)| u.get(3 + k).iter().zip(r).map(|(a, b)| (a - b).abs()).collect::<Vec<_>>())
        .fold(0.0, f64::max)
}

/// Spanning tree plus a few chords, weights in `[0.1, 1)`.
pub fn random_graph(rng: &mut impl Rng, n: usize) -> Vec<(usize, usize, f64)> {
    let mut edges = Vec::new();
    for j in 1..n {
        edges.push((rng.gen_range(0..j), j, rng.gen_range(0.1..1.0)));
    }
    for _ in 0..n {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let (a, b) = (i.min(j), i.max(j));
        if a != b && !edges.iter().any(|e| (e.0, e.1) == (a, b)) {
            edges.push((a, b, rng.gen_range(0.1..1.0)));
        }
    }
    edges
}

/// Connected scalar problem on 4..=10 nodes with at least two boundary nodes.
pub fn random_scalar_problem(rng: &mut impl Rng) -> BoundaryProblem {
    let n = rng.gen_range(4..=10);
    let graph = WeightedGraph::from_edges(n, &random_graph(rng, n)).unwrap();
    let nb = rng.gen_range(2..=n / 2);
    let mut nodes: Vec<usize> = (0..n).collect();
    for k in 0..nb {
        let r = rng.gen_range(k..n);
        nodes.swap(k, r);
    }
    let entries: Vec<(usize, f64)> = nodes[..nb].iter().map(|&x| (x, rng.gen_range(0.0..1.0))).collect();
    BoundaryProblem::scalar(graph, &entries).unwrap()
}

/// Vector problem with `1..=3` interior nodes, one of which touches two
/// boundary nodes, so the minimal energy is positive.
pub fn random_small_vector_problem(rng: &mut impl Rng, m: usize) -> BoundaryProblem {
    let ni = rng.gen_range(1..=3);
    let nb = rng.gen_range(2..=4);
    let n = ni + nb;
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for j in 1..ni {
        edges.push((rng.gen_range(0..j), j, rng.gen_range(0.1..1.0)));
    }
    for b in ni..n {
        let i = if b < ni + 2 { 0 } else { rng.gen_range(0..ni) };
        edges.push((i, b, rng.gen_range(0.1..1.0)));
    }
    for _ in 0..2 {
        let (i, b) = (rng.gen_range(0..ni), rng.gen_range(ni..n));
        if !edges.iter().any(|e| (e.0, e.1) == (i, b)) {
            edges.push((i, b, rng.gen_range(0.1..1.0)));
        }
    }
    let graph = WeightedGraph::from_edges(n, &edges).unwrap();
    let entries: Vec<(usize, Vec<f64>)> =
        (ni..n).map(|b| (b, (0..m).map(|_| rng.gen_range(0.0..1.0)).collect())).collect();
    BoundaryProblem::new(graph, &entries).unwrap()
}

pub fn random_mask(rng: &mut impl Rng, n: usize, fraction: f64) -> Vec<bool> {
    let mut mask: Vec<bool> = (0..n).map(|_| rng.gen_bool(fraction)).collect();
    if mask.iter().all(|&m| m) {
        mask[0] = false;
    }
    mask
}

/// Synthetic 32×32 test images.
pub fn synthetic_images() -> Vec<(&'static str, ImageGrid)> {
    let (w, h) = (32, 32);
    let split: Vec<f64> = (0..w * h)
        .flat_map(|i| if i % w < w / 2 { [0.9, 0.2, 0.1] } else { [0.1, 0.3, 0.8] })
        .collect();
    let checker: Vec<f64> = (0..w * h)
        .map(|i| if ((i % w) / 8 + (i / w) / 8) % 2 == 0 { 0.2 } else { 0.8 })
        .collect();
    let gradient: Vec<f64> = (0..w * h)
        .flat_map(|i| {
            let (x, y) = ((i % w) as f64 / 31.0, (i / w) as f64 / 31.0);
            [x, y, 0.5 * (x + y)]
        })
        .collect();
    let stripes: Vec<f64> = (0..w * h)
        .flat_map(|i| {
            let t = (((i % w) + (i / w)) % 6) as f64 / 5.0;
            [t, 1.0 - t, 0.5]
        })
        .collect();
    vec![
        ("split", ImageGrid::known(w, h, 3, split).unwrap()),
        ("checker", ImageGrid::known(w, h, 1, checker).unwrap()),
        ("gradient", ImageGrid::known(w, h, 3, gradient).unwrap()),
        ("stripes", ImageGrid::known(w, h, 3, stripes).unwrap()),
    ]
}

/// Per-channel range of the known pixels.
pub fn known_bounds(img: &ImageGrid) -> (Vec<f64>, Vec<f64>) {
    let c = img.channels();
    let mut lo = vec![f64::INFINITY; c];
    let mut hi = vec![f64::NEG_INFINITY; c];
    for x in (0..img.pixel_count()).filter(|&x| !img.is_missing(x)) {
        for (j, &v) in img.pixel(x).iter().enumerate() {
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
        }
    }
    (lo, hi)
}
