//! Shared test fixtures: PageRank oracles computed straight from raw edge
//! lists, plus seeded graph generators. Nothing here touches the library's
//! CSR or engine code, so the two implementations check each other.

#![allow(dead_code)]

use std::collections::HashSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Edge set the engines actually rank: input edges plus a self-loop on
/// every vertex, exact duplicates collapsed.
fn looped_edge_set(edges: &[(u32, u32)], n: usize) -> HashSet<(u32, u32)> {
    let mut set: HashSet<(u32, u32)> = edges.iter().copied().collect();
    set.extend((0..n as u32).map(|v| (v, v)));
    set
}

/// Dense power-iteration oracle: push (scatter) form over out-edges, the
/// opposite traversal direction from the library's pull-style kernels.
/// Iterates well past the engines' tolerance so the returned vector sits
/// within ~1e-13 of the true fixed point.
pub fn oracle_pagerank(edges: &[(u32, u32)], n: usize, damping: f64) -> Vec<f64> {
    let set = looped_edge_set(edges, n);
    let mut out_deg = vec![0u32; n];
    for &(u, _) in &set {
        out_deg[u as usize] += 1;
    }
    let base = (1.0 - damping) / n as f64;
    let mut ranks = vec![1.0 / n as f64; n];
    for _ in 0..2000 {
        let mut next = vec![base; n];
        for &(u, v) in &set {
            next[v as usize] += damping * ranks[u as usize] / out_deg[u as usize] as f64;
        }
        let delta = linf(&next, &ranks);
        ranks = next;
        if delta <= 1e-14 {
            break;
        }
    }
    ranks
}

/// Exact fixed point by Gaussian elimination on (I - damping * P^T):
/// no iteration anywhere. Cubic in n, so tiny graphs only.
#[allow(clippy::needless_range_loop)]
pub fn solve_pagerank(edges: &[(u32, u32)], n: usize, damping: f64) -> Vec<f64> {
    let set = looped_edge_set(edges, n);
    let mut out_deg = vec![0u32; n];
    for &(u, _) in &set {
        out_deg[u as usize] += 1;
    }
    let mut a = vec![vec![0.0f64; n]; n];
    for v in 0..n {
        a[v][v] = 1.0;
    }
    for &(u, v) in &set {
        a[v as usize][u as usize] -= damping / out_deg[u as usize] as f64;
    }
    let mut b = vec![(1.0 - damping) / n as f64; n];
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        assert!(a[col][col].abs() > 1e-12, "singular rank system");
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0f64; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x
}

/// Elementwise scalar-loop max difference.
pub fn linf(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut max = 0.0f64;
    for i in 0..a.len() {
        let d = (a[i] - b[i]).abs();
        if d > max {
            max = d;
        }
    }
    max
}

/// Seeded directed graph: n * avg_degree distinct edges, endpoints uniform,
/// no self-loops (the engines add those).
pub fn random_graph(seed: u64, n: usize, avg_degree: f64) -> Vec<(u32, u32)> {
    assert!(avg_degree < 0.8 * (n - 1) as f64, "too dense for rejection");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = (n as f64 * avg_degree).round() as usize;
    let mut seen = HashSet::with_capacity(target * 2);
    let mut edges = Vec::with_capacity(target);
    while edges.len() < target {
        let u = rng.random_range(0..n as u32);
        let v = rng.random_range(0..n as u32);
        if u != v && seen.insert((u, v)) {
            edges.push((u, v));
        }
    }
    edges
}

/// Seeded ring with one short random chord per vertex: out-degree 2
/// everywhere, every edge spanning at most 100 indices. With all edges
/// short-range, a small perturbation decays inside a bounded index
/// interval; uniformly random wiring instead branches faster than rank
/// changes attenuate, and even a one-edge batch floods the whole graph
/// past the frontier tolerance.
pub fn chained_graph(seed: u64, n: usize) -> Vec<(u32, u32)> {
    assert!(n > 101, "chords need room to land past the ring edge");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(2 * n);
    for v in 0..n as u32 {
        edges.push((v, (v + 1) % n as u32));
        let gap = rng.random_range(2..=100u32);
        edges.push((v, (v + gap) % n as u32));
    }
    edges
}

/// Raw edge list after a batch: deletions removed, insertions added.
pub fn edges_after(
    edges: &[(u32, u32)],
    deletions: &[(u32, u32)],
    insertions: &[(u32, u32)],
) -> Vec<(u32, u32)> {
    let gone: HashSet<(u32, u32)> = deletions.iter().copied().collect();
    let mut out: Vec<(u32, u32)> = edges.iter().copied().filter(|e| !gone.contains(e)).collect();
    out.extend_from_slice(insertions);
    out
}
