//! Graph-level effect of single-qubit Pauli measurements on graph states.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::domains::{GraphState, Outcome};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measurement {
    pub vertex: usize,
    pub basis: Outcome,
}

/// A graph under measurement rewrites. Vertex ids never change; measured
/// vertices are marked absent and recorded in the log.
#[derive(Clone, Debug)]
pub struct RewritableGraph {
    adj: Vec<BTreeSet<usize>>,
    present: Vec<bool>,
    coords: Vec<(usize, usize)>,
    log: Vec<Measurement>,
}

impl RewritableGraph {
    pub fn new(graph: &GraphState) -> Self {
        let n = graph.num_vertices();
        RewritableGraph {
            adj: (0..n).map(|v| graph.neighbors(v).iter().copied().collect()).collect(),
            present: vec![true; n],
            coords: graph.vertices().iter().map(|v| v.coord).collect(),
            log: Vec::new(),
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        Self::new(&GraphState::from_edges(n, edges))
    }

    /// Total number of vertex ids, present or not.
    pub fn capacity(&self) -> usize {
        self.adj.len()
    }

    pub fn is_present(&self, v: usize) -> bool {
        v < self.present.len() && self.present[v]
    }

    pub fn present_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.adj.len()).filter(|&v| self.present[v])
    }

    pub fn num_present(&self) -> usize {
        self.present.iter().filter(|&&p| p).count()
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }

    pub fn coord(&self, v: usize) -> (usize, usize) {
        self.coords[v]
    }

    pub fn log(&self) -> &[Measurement] {
        &self.log
    }

    /// Present edges as `(lower, higher)` pairs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.present_vertices().flat_map(|a| self.adj[a].iter().filter(move |&&b| b > a).map(move |&b| (a, b))).collect()
    }

    pub fn num_edges(&self) -> usize {
        self.present_vertices().map(|v| self.adj[v].len()).sum::<usize>() / 2
    }

    fn require(&self, v: usize) -> Result<()> {
        if self.is_present(v) {
            Ok(())
        } else {
            Err(Error::MissingVertex(v))
        }
    }

    fn toggle(&mut self, a: usize, b: usize) {
        if !self.adj[a].remove(&b) {
            self.adj[a].insert(b);
            self.adj[b].insert(a);
        } else {
            self.adj[b].remove(&a);
        }
    }

    fn remove(&mut self, v: usize, basis: Outcome) {
        for u in std::mem::take(&mut self.adj[v]) {
            self.adj[u].remove(&v);
        }
        self.present[v] = false;
        self.log.push(Measurement { vertex: v, basis });
    }

    /// σ_z: delete `v` and its edges.
    pub fn measure_z(&mut self, v: usize) -> Result<()> {
        self.require(v)?;
        self.remove(v, Outcome::Z);
        Ok(())
    }

    /// σ_y: complement the neighbourhood of `v`, then delete `v`.
    pub fn measure_y(&mut self, v: usize) -> Result<()> {
        self.require(v)?;
        let nb: Vec<usize> = self.adj[v].iter().copied().collect();
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                self.toggle(a, b);
            }
        }
        self.remove(v, Outcome::Y);
        Ok(())
    }

    /// σ_x on `left` and on `mid`, where `mid` has exactly the two
    /// neighbours `left` and `right`. Each other neighbour of `left` toggles
    /// its edge to `right`, then `left` and `mid` are deleted. When the
    /// neighbourhoods of `left` and `right` are disjoint this is plain
    /// inheritance; on overlaps a union would produce the wrong state.
    pub fn measure_x_pair(&mut self, left: usize, mid: usize) -> Result<usize> {
        self.require(left)?;
        self.require(mid)?;
        let right = self.x_pair_target(left, mid)?;
        let inherited: Vec<usize> = self.adj[left].iter().copied().filter(|&u| u != mid && u != right).collect();
        for u in inherited {
            self.toggle(right, u);
        }
        self.remove(left, Outcome::X);
        self.remove(mid, Outcome::X);
        Ok(right)
    }

    /// The right vertex of an X-pair, checking the degree-2 precondition.
    pub fn x_pair_target(&self, left: usize, mid: usize) -> Result<usize> {
        let nb = &self.adj[mid];
        if nb.len() != 2 || !nb.contains(&left) {
            return Err(Error::Precondition(format!(
                "middle vertex {mid} must have exactly two neighbours, one of them {left}"
            )));
        }
        Ok(*nb.iter().find(|&&u| u != left).expect("two neighbours"))
    }

    /// The present vertices as a compact graph, renumbered in id order, with
    /// the map from new index to original id.
    pub fn compact(&self) -> (GraphState, Vec<usize>) {
        let ids: Vec<usize> = self.present_vertices().collect();
        let mut index = vec![usize::MAX; self.adj.len()];
        for (i, &v) in ids.iter().enumerate() {
            index[v] = i;
        }
        let edges: Vec<(usize, usize)> = self.edges().into_iter().map(|(a, b)| (index[a], index[b])).collect();
        (GraphState::from_edges(ids.len(), &edges), ids)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge_set(g: &RewritableGraph) -> Vec<(usize, usize)> {
        g.edges()
    }

    #[test]
    fn z_rule() {
        let mut g = RewritableGraph::from_edges(3, &[(0, 1), (1, 2)]);
        g.measure_z(1).unwrap();
        assert!(edge_set(&g).is_empty());
        assert_eq!(g.num_present(), 2);
        let mut t = RewritableGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        t.measure_z(0).unwrap();
        assert_eq!(edge_set(&t), vec![(1, 2)]);
        let mut iso = RewritableGraph::from_edges(2, &[]);
        iso.measure_z(0).unwrap();
        assert_eq!(iso.num_present(), 1);
        assert!(matches!(iso.measure_z(0), Err(Error::MissingVertex(0))));
    }

    #[test]
    fn y_rule() {
        let mut g = RewritableGraph::from_edges(3, &[(0, 1), (1, 2)]);
        g.measure_y(1).unwrap();
        assert_eq!(edge_set(&g), vec![(0, 2)]);
        let mut t = RewritableGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        t.measure_y(0).unwrap();
        assert!(edge_set(&t).is_empty());
        // Y then Z on a path leaves the far end isolated
        let mut p = RewritableGraph::from_edges(3, &[(0, 1), (1, 2)]);
        p.measure_y(1).unwrap();
        p.measure_z(2).unwrap();
        assert!(edge_set(&p).is_empty());
        assert!(p.is_present(0));
    }

    #[test]
    fn ring_junction_becomes_t_junction() {
        // triangle 0-1-2 with tails 3, 4, 5 continuing into wires 6, 7, 8
        let mut g = RewritableGraph::from_edges(
            9,
            &[(0, 1), (1, 2), (2, 0), (0, 3), (1, 4), (2, 5), (3, 6), (4, 7), (5, 8)],
        );
        g.measure_y(0).unwrap();
        // 3 is now the centre of a T joining the wires through 1, 2 and 6
        assert_eq!(edge_set(&g), vec![(1, 3), (1, 4), (2, 3), (2, 5), (3, 6), (4, 7), (5, 8)]);
        let centre: Vec<usize> = g.present_vertices().filter(|&v| g.degree(v) == 3).collect();
        assert_eq!(centre, vec![3]);
    }

    #[test]
    fn x_pair_rule() {
        // e - a - b - c: X on (a, b) gives e - c
        let mut g = RewritableGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(g.measure_x_pair(1, 2).unwrap(), 3);
        assert_eq!(edge_set(&g), vec![(0, 3)]);
        // a - b - c with nothing else on a
        let mut p = RewritableGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        p.measure_x_pair(0, 1).unwrap();
        assert_eq!(edge_set(&p), vec![(2, 3)]);
        // a shared neighbour of left and right loses its edge to right
        let mut t = RewritableGraph::from_edges(4, &[(0, 1), (1, 2), (0, 3), (2, 3)]);
        t.measure_x_pair(0, 1).unwrap();
        assert!(edge_set(&t).is_empty());
        let mut bad = RewritableGraph::from_edges(4, &[(0, 1), (1, 2), (1, 3)]);
        assert!(matches!(bad.measure_x_pair(0, 1), Err(Error::Precondition(_))));
    }
}
