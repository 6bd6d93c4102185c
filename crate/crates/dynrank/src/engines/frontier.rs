//! Affected-vertex marking for the dynamic traversal and frontier engines.

use crate::engines::flags::FlagVectors;
use crate::graph::{union_out_neighbors, BatchUpdate, Graph};

/// Marks the initially affected set of the dynamic frontier approach: for
/// every batch edge (u, v), the out-neighbors of u in the union of the old
/// and new snapshots. Neighborhoods in both snapshots cover deletions
/// (whose endpoints are gone from `curr.out(u)`) and insertions alike.
/// Idempotent; safe to call concurrently with itself.
pub fn mark_initial_affected_df(
    prev: &Graph,
    curr: &Graph,
    batch: &BatchUpdate,
    flags: &FlagVectors,
) {
    for (u, _) in batch.edges() {
        mark_frontier_source(prev, curr, flags, u);
    }
}

/// Marks the union out-neighborhood of one batch source. Returns how many
/// marks newly transitioned out of CLEAR.
pub(crate) fn mark_frontier_source(
    prev: &Graph,
    curr: &Graph,
    flags: &FlagVectors,
    u: u32,
) -> usize {
    union_out_neighbors(prev, curr, u)
        .into_iter()
        .filter(|&v| flags.mark_affected(v))
        .count()
}

/// Iterative DFS from `start` over `graph`, marking every newly reached
/// vertex affected. Vertices already marked are not re-expanded, so
/// concurrent traversals partition the closure between themselves instead
/// of duplicating it.
pub fn visit_dfs(flags: &FlagVectors, graph: &Graph, start: u32) {
    visit_dfs_counting(flags, graph, start);
}

/// [`visit_dfs`] returning the number of CLEAR transitions this call won.
pub(crate) fn visit_dfs_counting(flags: &FlagVectors, graph: &Graph, start: u32) -> usize {
    let mut marked = 0;
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        // The mark doubles as the visited bit; losing the race to another
        // traversal means that traversal owns the expansion of v.
        if !flags.mark_affected(v) {
            continue;
        }
        marked += 1;
        for &next in graph.out(v) {
            if !flags.is_affected(next) {
                stack.push(next);
            }
        }
    }
    marked
}

/// Marks the traversal-affected set of one batch source: a DFS over `curr`
/// from each union out-neighbor of `u`. Returns CLEAR transitions.
pub(crate) fn mark_traversal_source(
    prev: &Graph,
    curr: &Graph,
    flags: &FlagVectors,
    u: u32,
) -> usize {
    union_out_neighbors(prev, curr, u)
        .into_iter()
        .map(|v| visit_dfs_counting(flags, curr, v))
        .sum()
}
