//! Counting loop sets (even-degree edge subsets) of a domain.

use std::collections::VecDeque;

use serde::Serialize;

use crate::domains::DomainDecomposition;
use crate::error::{Error, Result};
use crate::lattice::{Lattice, Wrap};

/// A connected multigraph; `wraps` marks edges crossing a periodic seam.
#[derive(Clone, Debug, Default)]
pub struct DomainSubgraph {
    pub num_vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub wraps: Vec<Wrap>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LoopCount {
    /// Independent contractible cycles (faces).
    pub faces: u32,
    /// Independent winding classes of non-contractible cycles.
    pub windings: u32,
    /// `2^(faces + windings)`.
    pub sets: u64,
}

impl DomainSubgraph {
    pub fn new(num_vertices: usize, edges: Vec<(usize, usize)>) -> Self {
        let wraps = vec![Wrap::None; edges.len()];
        DomainSubgraph { num_vertices, edges, wraps }
    }

    /// Induced subgraph of domain `d`, vertices numbered by member order.
    pub fn of_domain(lattice: &Lattice, decomp: &DomainDecomposition, d: usize) -> Self {
        let members = decomp.members(d);
        let local = |s: usize| members.binary_search(&s).expect("member");
        let mut sub = DomainSubgraph { num_vertices: members.len(), ..Default::default() };
        for e in lattice.edges() {
            if decomp.domain_of(e.a) == d && decomp.domain_of(e.b) == d {
                sub.edges.push((local(e.a), local(e.b)));
                sub.wraps.push(e.wrap);
            }
        }
        sub
    }

    fn is_connected(&self) -> bool {
        if self.num_vertices == 0 {
            return false;
        }
        let mut adj = vec![Vec::new(); self.num_vertices];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; self.num_vertices];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.num_vertices
    }
}

/// `2^(E - V + 1)` loop sets of a connected domain, split into faces and windings.
pub fn count_loop_sets(sub: &DomainSubgraph) -> Result<LoopCount> {
    if !sub.is_connected() {
        return Err(Error::Disconnected);
    }
    let cycle_rank = (sub.edges.len() + 1 - sub.num_vertices) as u32;
    if cycle_rank >= 64 {
        return Err(Error::Param(format!("cycle space of dimension {cycle_rank} overflows the count")));
    }
    let windings = winding_rank(sub);
    Ok(LoopCount { faces: cycle_rank - windings, windings, sets: 1u64 << cycle_rank })
}

/// Rank over GF(2) of the seam-crossing parities of the fundamental cycles.
fn winding_rank(sub: &DomainSubgraph) -> u32 {
    let crossing = |w: Wrap| match w {
        Wrap::None => 0u8,
        Wrap::Horizontal => 1,
        Wrap::Vertical => 2,
    };
    let mut adj = vec![Vec::new(); sub.num_vertices];
    for (k, &(a, b)) in sub.edges.iter().enumerate() {
        adj[a].push((b, k));
        adj[b].push((a, k));
    }
    // Potential = crossing parity along the BFS tree path from vertex 0.
    let mut potential = vec![u8::MAX; sub.num_vertices];
    let mut tree_edge = vec![false; sub.edges.len()];
    potential[0] = 0;
    let mut queue = VecDeque::from([0]);
    while let Some(u) = queue.pop_front() {
        for &(v, k) in &adj[u] {
            if potential[v] == u8::MAX {
                potential[v] = potential[u] ^ crossing(sub.wraps[k]);
                tree_edge[k] = true;
                queue.push_back(v);
            }
        }
    }
    let mut rank = 0;
    let mut basis: Vec<u8> = Vec::new();
    for (k, &(a, b)) in sub.edges.iter().enumerate() {
        if tree_edge[k] {
            continue;
        }
        let mut w = potential[a] ^ potential[b] ^ crossing(sub.wraps[k]);
        for &v in &basis {
            w = w.min(w ^ v);
        }
        if w != 0 {
            basis.push(w);
            rank += 1;
        }
    }
    rank
}

/// Number of edge subsets in which every vertex has even degree.
pub fn count_even_subgraphs(num_vertices: usize, edges: &[(usize, usize)]) -> u64 {
    assert!(edges.len() <= 24, "brute force limited to 24 edges");
    let incidence: Vec<u64> = (0..num_vertices)
        .map(|v| edges.iter().enumerate().filter(|(_, e)| e.0 == v || e.1 == v).fold(0u64, |m, (k, e)| {
            // a self-loop contributes twice to the degree and never changes parity
            if e.0 == e.1 { m } else { m | 1 << k }
        }))
        .collect();
    (0u64..1 << edges.len()).filter(|&s| incidence.iter().all(|&inc| (s & inc).count_ones() % 2 == 0)).count() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{label_domains, Outcome, OutcomeConfig};
    use crate::lattice::Boundary;

    #[test]
    fn hexagon_and_tree() {
        let hex = DomainSubgraph::new(6, (0..6).map(|i| (i, (i + 1) % 6)).collect());
        assert_eq!(count_loop_sets(&hex).unwrap().sets, 2);
        let tree = DomainSubgraph::new(4, vec![(0, 1), (1, 2), (1, 3)]);
        assert_eq!(count_loop_sets(&tree).unwrap().sets, 1);
        let split = DomainSubgraph::new(4, vec![(0, 1), (2, 3)]);
        assert!(matches!(count_loop_sets(&split), Err(Error::Disconnected)));
    }

    #[test]
    fn whole_torus_has_two_windings() {
        let lat = Lattice::build(crate::lattice::LatticeKind::Honeycomb, 4, Boundary::Periodic).unwrap();
        let d = label_domains(&lat, &OutcomeConfig::uniform(16, Outcome::X)).unwrap();
        let count = count_loop_sets(&DomainSubgraph::of_domain(&lat, &d, 0)).unwrap();
        assert_eq!(count.windings, 2);
        assert_eq!(count.faces + count.windings, 24 - 16 + 1);
    }
}
