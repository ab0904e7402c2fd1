//! The carved skeleton: junctions joined by wires, grouped into grid nodes.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::rules::RewritableGraph;
use crate::error::{Error, Result};

/// Rectangle in lattice `(row, col)` coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub row: usize,
    pub col: usize,
    pub height: usize,
    pub width: usize,
}

impl Rect {
    pub fn contains(&self, (r, c): (usize, usize)) -> bool {
        r >= self.row && r < self.row + self.height && c >= self.col && c < self.col + self.width
    }
}

/// A path between two junctions. `interior` runs from `ends.0` to `ends.1`.
/// Horizontal wires run left to right along a road, vertical ones top to
/// bottom between roads.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wire {
    pub ends: (usize, usize),
    pub interior: Vec<usize>,
    pub vertical: bool,
}

/// Junctions (by index) carry a current centre vertex. Each grid node owns
/// one or two junctions; with two, they are joined by a wire of the node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Net {
    /// Grid side length `Λ'`.
    pub size: usize,
    pub junctions: Vec<usize>,
    /// Junction indices per grid node, row-major.
    pub nodes: Vec<Vec<usize>>,
    pub wires: Vec<Wire>,
}

impl Net {
    /// Full vertex sequence of a wire, centres included.
    pub fn wire_path(&self, w: usize) -> Vec<usize> {
        let wire = &self.wires[w];
        let mut p = Vec::with_capacity(wire.interior.len() + 2);
        p.push(self.junctions[wire.ends.0]);
        p.extend_from_slice(&wire.interior);
        p.push(self.junctions[wire.ends.1]);
        p
    }

    /// Grid node of every junction.
    pub fn node_of_junction(&self) -> Vec<usize> {
        let mut owner = vec![usize::MAX; self.junctions.len()];
        for (n, js) in self.nodes.iter().enumerate() {
            for &j in js {
                owner[j] = n;
            }
        }
        owner
    }

    /// Wires at junction `j`, each with the interior ordered away from `j`.
    pub fn arms(&self, j: usize) -> Vec<(usize, Vec<usize>)> {
        let mut out = Vec::new();
        for (w, wire) in self.wires.iter().enumerate() {
            if wire.ends.0 == j {
                out.push((w, wire.interior.clone()));
            }
            if wire.ends.1 == j {
                out.push((w, wire.interior.iter().rev().copied().collect()));
            }
        }
        out
    }

    /// Writes an arm (ordered away from `j`) back into wire `w`.
    pub fn set_arm(&mut self, w: usize, j: usize, arm: Vec<usize>) {
        let wire = &mut self.wires[w];
        wire.interior = if wire.ends.0 == j { arm } else { arm.into_iter().rev().collect() };
    }

    pub fn vertices(&self) -> Vec<usize> {
        let mut vs: Vec<usize> = self.junctions.clone();
        for w in &self.wires {
            vs.extend_from_slice(&w.interior);
        }
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    /// Checks that the present part of `g` is exactly this net: consecutive
    /// wire vertices adjacent, interior vertices of degree two, junction
    /// degree equal to the number of wire ends, nothing else present.
    pub fn check(&self, g: &RewritableGraph) -> Result<()> {
        let mut seen = HashSet::new();
        let mismatch = |msg: String| Err(Error::Precondition(msg));
        for &c in &self.junctions {
            if !g.is_present(c) || !seen.insert(c) {
                return mismatch(format!("junction centre {c} missing or repeated"));
            }
        }
        let mut ends = vec![0usize; self.junctions.len()];
        for (w, wire) in self.wires.iter().enumerate() {
            ends[wire.ends.0] += 1;
            ends[wire.ends.1] += 1;
            let path = self.wire_path(w);
            for pair in path.windows(2) {
                if !g.is_present(pair[1]) || !g.has_edge(pair[0], pair[1]) {
                    return mismatch(format!("wire {w} is broken between {} and {}", pair[0], pair[1]));
                }
            }
            for &v in &wire.interior {
                if !seen.insert(v) {
                    return mismatch(format!("vertex {v} of wire {w} is shared"));
                }
                if g.degree(v) != 2 {
                    return mismatch(format!("vertex {v} of wire {w} has degree {}", g.degree(v)));
                }
            }
        }
        for (j, &c) in self.junctions.iter().enumerate() {
            if g.degree(c) != ends[j] {
                return mismatch(format!("junction {j} at vertex {c} has degree {} but {} wires", g.degree(c), ends[j]));
            }
        }
        if g.num_present() != seen.len() {
            return mismatch(format!("{} vertices lie outside the net", g.num_present() - seen.len()));
        }
        Ok(())
    }
}
