//! Contracting a clean net to a square grid with Y parity fixes and X-pair
//! measurements, and the independent check of the result.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::net::Net;
use super::rules::{Measurement, RewritableGraph};
use crate::error::{Error, Result};

/// Final grid: `vertices[r * size + c]` is the graph vertex at `(r, c)`.
/// `measurements` is the full log from the input graph, in order, so the
/// result can be replayed and checked without the pipeline.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridCertificate {
    pub size: usize,
    pub vertices: Vec<usize>,
    pub measurements: Vec<Measurement>,
}

/// Edges of the `size × size` square grid on row-major indices.
pub fn grid_edges(size: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for r in 0..size {
        for c in 0..size {
            let i = r * size + c;
            if c + 1 < size {
                e.push((i, i + 1));
            }
            if r + 1 < size {
                e.push((i, i + size));
            }
        }
    }
    e
}

impl GridCertificate {
    /// Compares the present graph against a freshly generated grid under
    /// the certificate's vertex map.
    pub fn verify(&self, g: &RewritableGraph) -> Result<()> {
        let fail = |m: String| Err(Error::Precondition(m));
        if self.vertices.len() != self.size * self.size {
            return fail(format!("certificate lists {} vertices for a {0}x{0} grid", self.size));
        }
        let claimed: BTreeSet<usize> = self.vertices.iter().copied().collect();
        let present: BTreeSet<usize> = g.present_vertices().collect();
        if claimed != present {
            return fail(format!("{} present vertices, {} in the certificate", present.len(), claimed.len()));
        }
        let want: BTreeSet<(usize, usize)> = grid_edges(self.size)
            .into_iter()
            .map(|(a, b)| {
                let (x, y) = (self.vertices[a], self.vertices[b]);
                (x.min(y), x.max(y))
            })
            .collect();
        let have: BTreeSet<(usize, usize)> = g.edges().into_iter().collect();
        if want != have {
            let extra = have.difference(&want).count();
            let missing = want.difference(&have).count();
            return fail(format!("grid mismatch: {extra} extra and {missing} missing edges"));
        }
        Ok(())
    }
}

/// Shortens the path `a, interior.., b` to a single edge `a - b`.
/// The interior vertices must have degree two.
fn contract_path(g: &mut RewritableGraph, interior: &[usize]) -> Result<()> {
    let mut rest = interior;
    if rest.len() % 2 == 1 {
        g.measure_y(rest[0])?;
        rest = &rest[1..];
    }
    for pair in rest.chunks(2) {
        g.measure_x_pair(pair[0], pair[1])?;
    }
    Ok(())
}

/// Moves junction `a` onto `b` along the path `a, interior.., b`, leaving `b`
/// with the neighbours of both. Needs at least one interior vertex.
fn merge_along(g: &mut RewritableGraph, a: usize, interior: &[usize], b: usize) -> Result<()> {
    if interior.is_empty() {
        return Err(Error::Precondition(format!("junctions {a} and {b} are adjacent and cannot be merged")));
    }
    let mut rest = interior;
    if rest.len() % 2 == 0 {
        g.measure_y(rest[0])?;
        rest = &rest[1..];
    }
    let mut left = a;
    for (t, &mid) in rest.iter().enumerate().step_by(2) {
        let right = g.measure_x_pair(left, mid)?;
        let expected = rest.get(t + 1).copied().unwrap_or(b);
        debug_assert_eq!(right, expected);
        left = right;
    }
    Ok(())
}

/// Merges the junctions of every node into one vertex, contracts the wires
/// between nodes to single edges and verifies the result.
pub fn contract_to_grid(g: &mut RewritableGraph, net: &Net) -> Result<GridCertificate> {
    net.check(g)?;
    let owner = net.node_of_junction();
    let k = net.size;
    let mut node_vertex = vec![usize::MAX; k * k];
    let mut internal = vec![false; net.wires.len()];
    for (n, js) in net.nodes.iter().enumerate() {
        match js.as_slice() {
            [j] => node_vertex[n] = net.junctions[*j],
            [ja, jb] => {
                let w = net
                    .wires
                    .iter()
                    .position(|w| w.ends == (*ja, *jb) || w.ends == (*jb, *ja))
                    .ok_or_else(|| Error::Precondition(format!("node {n} has no wire joining its junctions")))?;
                internal[w] = true;
                let path = net.wire_path(w);
                let (a, b) = (net.junctions[*ja], net.junctions[*jb]);
                let interior: Vec<usize> =
                    if path[0] == a { path[1..path.len() - 1].to_vec() } else { path[1..path.len() - 1].iter().rev().copied().collect() };
                merge_along(g, a, &interior, b)?;
                node_vertex[n] = b;
            }
            other => return Err(Error::Precondition(format!("node {n} has {} junctions", other.len()))),
        }
    }
    for (w, wire) in net.wires.iter().enumerate() {
        if internal[w] {
            continue;
        }
        let (na, nb) = (owner[wire.ends.0], owner[wire.ends.1]);
        let (ra, ca, rb, cb) = (na / k, na % k, nb / k, nb % k);
        if ra.abs_diff(rb) + ca.abs_diff(cb) != 1 {
            return Err(Error::Precondition(format!("wire {w} joins nodes {na} and {nb}, which are not grid neighbours")));
        }
        contract_path(g, &wire.interior)?;
    }
    let cert = GridCertificate { size: k, vertices: node_vertex, measurements: g.log().to_vec() };
    cert.verify(g)?;
    Ok(cert)
}
