//! Immutable directed-graph snapshots with dual (out- and in-) adjacency,
//! plus snapshot derivation by applying a batch of edge updates.
//!
//! Snapshots are CSR-encoded and never mutated after construction, so they
//! are safe for unrestricted concurrent reads. Every vertex carries a
//! structural self-loop, which eliminates dead ends without a global
//! teleport term.

use std::fmt;

use thiserror::Error;

/// An immutable directed-graph snapshot.
///
/// Invariants (enforced by every constructor):
/// - adjacency lists are strictly increasing (sorted, no duplicates),
/// - `(u,v)` appears in `out(u)` iff `u` appears in `in(v)`,
/// - `num_edges` equals the total out-adjacency length,
/// - when built with self-loops, `v` appears in `out(v)` for every `v`.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    num_vertices: usize,
    num_edges: usize,
    out_offsets: Box<[usize]>,
    out_targets: Box<[u32]>,
    in_offsets: Box<[usize]>,
    in_sources: Box<[u32]>,
}

/// A set of edge deletions and insertions transforming one snapshot into
/// the next. Self-loops are structural and never appear in `deletions`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BatchUpdate {
    pub deletions: Vec<(u32, u32)>,
    pub insertions: Vec<(u32, u32)>,
}

impl BatchUpdate {
    pub fn new(deletions: Vec<(u32, u32)>, insertions: Vec<(u32, u32)>) -> Self {
        Self {
            deletions,
            insertions,
        }
    }

    /// Total number of edges in the batch.
    pub fn len(&self) -> usize {
        self.deletions.len() + self.insertions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deletions.is_empty() && self.insertions.is_empty()
    }

    /// All batch edges, deletions first.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.deletions.iter().chain(self.insertions.iter()).copied()
    }

    /// The inverse batch: swaps deletions and insertions.
    pub fn inverse(&self) -> BatchUpdate {
        BatchUpdate {
            deletions: self.insertions.clone(),
            insertions: self.deletions.clone(),
        }
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("vertex id {id} out of range (num_vertices = {num_vertices})")]
    VertexOutOfRange { id: u32, num_vertices: usize },
}

/// Offending edges found while validating a batch against a snapshot.
/// A batch is rejected as a whole; all violations are reported together.
#[derive(Debug, Default)]
pub struct BatchViolations {
    pub missing_deletions: Vec<(u32, u32)>,
    pub existing_insertions: Vec<(u32, u32)>,
    pub self_loop_deletions: Vec<(u32, u32)>,
    pub out_of_range: Vec<(u32, u32)>,
    pub deletion_insertion_overlap: Vec<(u32, u32)>,
}

impl BatchViolations {
    fn is_empty(&self) -> bool {
        self.missing_deletions.is_empty()
            && self.existing_insertions.is_empty()
            && self.self_loop_deletions.is_empty()
            && self.out_of_range.is_empty()
            && self.deletion_insertion_overlap.is_empty()
    }
}

fn write_edge_class(
    f: &mut fmt::Formatter<'_>,
    label: &str,
    edges: &[(u32, u32)],
) -> fmt::Result {
    if edges.is_empty() {
        return Ok(());
    }
    write!(f, "; {} ({}):", label, edges.len())?;
    for (i, (u, v)) in edges.iter().take(8).enumerate() {
        write!(f, "{} ({},{})", if i == 0 { "" } else { "," }, u, v)?;
    }
    if edges.len() > 8 {
        write!(f, ", ...")?;
    }
    Ok(())
}

impl fmt::Display for BatchViolations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "batch validation failed")?;
        write_edge_class(f, "deletions of non-existent edges", &self.missing_deletions)?;
        write_edge_class(f, "insertions of existing edges", &self.existing_insertions)?;
        write_edge_class(f, "self-loop deletions", &self.self_loop_deletions)?;
        write_edge_class(f, "vertex ids out of range", &self.out_of_range)?;
        write_edge_class(
            f,
            "edges in both deletions and insertions",
            &self.deletion_insertion_overlap,
        )?;
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("{0}")]
    Validation(BatchViolations),
}

impl Graph {
    /// `n = |V|`.
    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    /// `m = |E|`, including self-loops.
    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    /// Number of edges excluding self-loops. Batch sizes are fractions of
    /// this count, since self-loops are structural and non-deletable.
    pub fn num_non_self_loop_edges(&self) -> usize {
        self.num_edges - (0..self.num_vertices as u32)
            .filter(|&v| self.has_edge(v, v))
            .count()
    }

    /// Sorted out-neighbors of `u`.
    pub fn out(&self, u: u32) -> &[u32] {
        let u = u as usize;
        &self.out_targets[self.out_offsets[u]..self.out_offsets[u + 1]]
    }

    /// Sorted in-neighbors of `v`.
    pub fn in_neighbors(&self, v: u32) -> &[u32] {
        let v = v as usize;
        &self.in_sources[self.in_offsets[v]..self.in_offsets[v + 1]]
    }

    /// `|G.out(u)|`.
    pub fn out_degree(&self, u: u32) -> usize {
        let u = u as usize;
        self.out_offsets[u + 1] - self.out_offsets[u]
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.out(u).binary_search(&v).is_ok()
    }

    /// All edges in `(source, target)` lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.num_vertices as u32)
            .flat_map(move |u| self.out(u).iter().map(move |&v| (u, v)))
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("num_vertices", &self.num_vertices)
            .field("num_edges", &self.num_edges)
            .finish()
    }
}

/// Builds a snapshot from an edge list. Duplicates are dropped; adjacency
/// is sorted. With `add_self_loops`, every vertex gains `(v,v)` if absent,
/// which eliminates dead ends.
pub fn build_graph(
    edges: &[(u32, u32)],
    num_vertices: usize,
    add_self_loops: bool,
) -> Result<Graph, GraphError> {
    for &(u, v) in edges {
        for id in [u, v] {
            if id as usize >= num_vertices {
                return Err(GraphError::VertexOutOfRange { id, num_vertices });
            }
        }
    }
    let mut all: Vec<(u32, u32)> = Vec::with_capacity(edges.len() + num_vertices);
    all.extend_from_slice(edges);
    if add_self_loops {
        all.extend((0..num_vertices as u32).map(|v| (v, v)));
    }
    all.sort_unstable();
    all.dedup();
    Ok(from_sorted_edges(num_vertices, &all))
}

/// Builds the CSR pair from a sorted, deduplicated edge list.
fn from_sorted_edges(num_vertices: usize, edges: &[(u32, u32)]) -> Graph {
    let mut out_offsets = vec![0usize; num_vertices + 1];
    for &(u, _) in edges {
        out_offsets[u as usize + 1] += 1;
    }
    for i in 0..num_vertices {
        out_offsets[i + 1] += out_offsets[i];
    }
    let out_targets: Vec<u32> = edges.iter().map(|&(_, v)| v).collect();

    // Transpose: counting sort by target keeps each in-list sorted because
    // the input is sorted by source.
    let mut in_offsets = vec![0usize; num_vertices + 1];
    for &(_, v) in edges {
        in_offsets[v as usize + 1] += 1;
    }
    for i in 0..num_vertices {
        in_offsets[i + 1] += in_offsets[i];
    }
    let mut cursor = in_offsets.clone();
    let mut in_sources = vec![0u32; edges.len()];
    for &(u, v) in edges {
        in_sources[cursor[v as usize]] = u;
        cursor[v as usize] += 1;
    }

    Graph {
        num_vertices,
        num_edges: edges.len(),
        out_offsets: out_offsets.into_boxed_slice(),
        out_targets: out_targets.into_boxed_slice(),
        in_offsets: in_offsets.into_boxed_slice(),
        in_sources: in_sources.into_boxed_slice(),
    }
}

/// Applies a batch update, returning the next snapshot
/// `E^t = (E^{t-1} \ deletions) + insertions`. The previous snapshot is
/// left untouched. The batch is validated first: every deletion must exist,
/// no insertion may exist, self-loops cannot be deleted, and the two edge
/// sets must be disjoint.
pub fn apply_batch(prev: &Graph, batch: &BatchUpdate) -> Result<Graph, BatchError> {
    let n = prev.num_vertices();
    let mut violations = BatchViolations::default();

    let in_range = |u: u32, v: u32| (u as usize) < n && (v as usize) < n;
    for &(u, v) in &batch.deletions {
        if !in_range(u, v) {
            violations.out_of_range.push((u, v));
        } else if u == v {
            violations.self_loop_deletions.push((u, v));
        } else if !prev.has_edge(u, v) {
            violations.missing_deletions.push((u, v));
        }
    }
    for &(u, v) in &batch.insertions {
        if !in_range(u, v) {
            violations.out_of_range.push((u, v));
        } else if prev.has_edge(u, v) {
            violations.existing_insertions.push((u, v));
        }
    }
    let mut dels: Vec<(u32, u32)> = batch.deletions.clone();
    dels.sort_unstable();
    dels.dedup();
    for &(u, v) in &batch.insertions {
        if dels.binary_search(&(u, v)).is_ok() {
            violations.deletion_insertion_overlap.push((u, v));
        }
    }
    if !violations.is_empty() {
        return Err(BatchError::Validation(violations));
    }

    let mut ins: Vec<(u32, u32)> = batch.insertions.clone();
    ins.sort_unstable();
    ins.dedup();

    // Merge per edge in lexicographic order: walk the old edge list, the
    // deletion list, and the insertion list together.
    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(prev.num_edges() + ins.len());
    let mut di = 0;
    let mut ii = 0;
    for e in prev.edges() {
        while ii < ins.len() && ins[ii] < e {
            edges.push(ins[ii]);
            ii += 1;
        }
        if di < dels.len() && dels[di] == e {
            di += 1;
            continue;
        }
        edges.push(e);
    }
    edges.extend_from_slice(&ins[ii..]);

    Ok(from_sorted_edges(n, &edges))
}

/// Sorted union of `u`'s out-neighbors in both snapshots:
/// `(G^{t-1} ∪ G^t).out(u)`.
pub fn union_out_neighbors(prev: &Graph, curr: &Graph, u: u32) -> Vec<u32> {
    let a = prev.out(u);
    let b = curr.out(u);
    let mut out = Vec::with_capacity(a.len().max(b.len()));
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_adds_self_loops_and_counts_edges() {
        let g = build_graph(&[(0, 1)], 2, true).unwrap();
        assert_eq!(g.out(0), &[0, 1]);
        assert_eq!(g.out(1), &[1]);
        assert_eq!(g.num_edges(), 3);
        assert_eq!(g.num_non_self_loop_edges(), 1);
    }

    #[test]
    fn build_single_vertex_identity() {
        let g = build_graph(&[], 1, true).unwrap();
        assert_eq!(g.out(0), &[0]);
        assert_eq!(g.num_edges(), 1);
    }

    #[test]
    fn build_drops_duplicates() {
        let g = build_graph(&[(0, 1), (1, 0), (0, 1)], 2, false).unwrap();
        assert_eq!(g.num_edges(), 2);
        assert_eq!(g.out(0), &[1]);
        assert_eq!(g.out(1), &[0]);
    }

    #[test]
    fn build_rejects_out_of_range() {
        assert!(matches!(
            build_graph(&[(0, 5)], 2, true),
            Err(GraphError::VertexOutOfRange { id: 5, .. })
        ));
    }

    #[test]
    fn dual_adjacency_is_consistent() {
        let g = build_graph(&[(0, 1), (2, 1), (1, 2)], 3, true).unwrap();
        assert_eq!(g.in_neighbors(1), &[0, 1, 2]);
        assert_eq!(g.in_neighbors(2), &[1, 2]);
        assert_eq!(g.out_degree(1), 2);
    }

    #[test]
    fn apply_batch_example_edges() {
        // Edges 7->8 and 10->11 on 12 vertices; delete (10,11), insert (7,9).
        let prev = build_graph(&[(7, 8), (10, 11)], 12, true).unwrap();
        let batch = BatchUpdate::new(vec![(10, 11)], vec![(7, 9)]);
        let curr = apply_batch(&prev, &batch).unwrap();
        assert!(curr.has_edge(7, 8) && curr.has_edge(7, 9));
        assert!(!curr.has_edge(10, 11));
        assert!(curr.has_edge(10, 10), "self-loops preserved");
        assert!(prev.has_edge(10, 11), "previous snapshot unmodified");
    }

    #[test]
    fn apply_empty_batch_is_identity() {
        let g = build_graph(&[(0, 1), (1, 2)], 3, true).unwrap();
        let same = apply_batch(&g, &BatchUpdate::default()).unwrap();
        assert_eq!(g, same);
    }

    #[test]
    fn delete_then_reinsert_roundtrips() {
        let g = build_graph(&[(0, 1), (1, 2), (2, 0)], 3, true).unwrap();
        let del = BatchUpdate::new(vec![(1, 2)], vec![]);
        let g1 = apply_batch(&g, &del).unwrap();
        let g2 = apply_batch(&g1, &del.inverse()).unwrap();
        assert_eq!(g, g2);
    }

    #[test]
    fn apply_batch_rejects_invalid_edges() {
        let g = build_graph(&[(0, 1)], 3, true).unwrap();
        let batch = BatchUpdate::new(vec![(1, 2), (0, 0)], vec![(0, 1), (9, 1)]);
        let BatchError::Validation(v) = apply_batch(&g, &batch).unwrap_err();
        assert_eq!(v.missing_deletions, vec![(1, 2)]);
        assert_eq!(v.self_loop_deletions, vec![(0, 0)]);
        assert_eq!(v.existing_insertions, vec![(0, 1)]);
        assert_eq!(v.out_of_range, vec![(9, 1)]);
    }

    #[test]
    fn union_out_neighbors_merges_sorted() {
        let prev = build_graph(&[(7, 8), (10, 11)], 12, true).unwrap();
        let batch = BatchUpdate::new(vec![(10, 11)], vec![(7, 9)]);
        let curr = apply_batch(&prev, &batch).unwrap();
        assert_eq!(union_out_neighbors(&prev, &curr, 7), vec![7, 8, 9]);
        assert_eq!(union_out_neighbors(&prev, &curr, 10), vec![10, 11]);
        assert_eq!(union_out_neighbors(&prev, &prev, 7), prev.out(7));
        assert_eq!(union_out_neighbors(&prev, &curr, 3), vec![3]);
    }
}
