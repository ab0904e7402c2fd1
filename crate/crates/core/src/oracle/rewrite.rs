//! Checks the graph rewrite rules against stabilizer simulation: measuring
//! the graph state and rewriting the graph must give LC-equivalent states.

use serde::{Deserialize, Serialize};

use crate::domains::Outcome;
use crate::error::{Error, Result};
use crate::oracle::lc::lc_equivalent;
use crate::oracle::tableau::Tableau;
use crate::reduction::RewritableGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RewriteRule {
    Z(usize),
    Y(usize),
    XPair { left: usize, mid: usize },
}

impl RewriteRule {
    /// Vertices measured by the rule, in measurement order.
    pub fn measured(&self) -> Vec<usize> {
        match *self {
            RewriteRule::Z(v) | RewriteRule::Y(v) => vec![v],
            RewriteRule::XPair { left, mid } => vec![left, mid],
        }
    }

    pub fn apply(&self, g: &mut RewritableGraph) -> Result<()> {
        match *self {
            RewriteRule::Z(v) => g.measure_z(v),
            RewriteRule::Y(v) => g.measure_y(v),
            RewriteRule::XPair { left, mid } => g.measure_x_pair(left, mid).map(|_| ()),
        }
    }
}

/// Measures one qubit, taking the `+1` branch unless it is impossible.
fn measure_any(t: &mut Tableau, q: usize, basis: Outcome) -> Result<()> {
    match t.measure(q, basis, true) {
        Err(Error::DeterministicMinusOne) => t.measure(q, basis, false),
        r => r,
    }
}

/// Stabilizer state left after performing the rule's measurements on the
/// graph state and discarding the measured qubits.
pub fn measured_state(n: usize, edges: &[(usize, usize)], rule: RewriteRule) -> Result<Tableau> {
    let mut t = Tableau::from_graph(n, edges);
    let mut measured = rule.measured();
    match rule {
        RewriteRule::Z(v) => measure_any(&mut t, v, Outcome::Z)?,
        RewriteRule::Y(v) => measure_any(&mut t, v, Outcome::Y)?,
        RewriteRule::XPair { left, mid } => {
            measure_any(&mut t, left, Outcome::X)?;
            measure_any(&mut t, mid, Outcome::X)?;
        }
    }
    measured.sort_unstable_by(|a, b| b.cmp(a));
    for q in measured {
        t.discard(q);
    }
    Ok(t)
}

/// Whether rewriting the graph with `rule` describes the measured state up
/// to local Cliffords.
pub fn rewrite_is_sound(n: usize, edges: &[(usize, usize)], rule: RewriteRule) -> Result<bool> {
    let expected = measured_state(n, edges, rule)?;
    let mut g = RewritableGraph::from_edges(n, edges);
    rule.apply(&mut g)?;
    let (rewritten, _) = g.compact();
    Ok(lc_equivalent(&expected, &Tableau::from_graph(rewritten.num_vertices(), &rewritten.edges())))
}

/// Every rule that applies to the graph: Z and Y on each vertex, and an
/// X-pair for each ordered `(left, mid)` with `mid` of degree two.
pub fn applicable_rules(n: usize, edges: &[(usize, usize)]) -> Vec<RewriteRule> {
    let mut nbrs = vec![Vec::new(); n];
    for &(a, b) in edges {
        nbrs[a].push(b);
        nbrs[b].push(a);
    }
    let mut rules: Vec<RewriteRule> = (0..n).flat_map(|v| [RewriteRule::Z(v), RewriteRule::Y(v)]).collect();
    for (mid, nb) in nbrs.iter().enumerate() {
        if nb.len() == 2 {
            rules.extend(nb.iter().map(|&left| RewriteRule::XPair { left, mid }));
        }
    }
    rules
}

/// All connected labelled graphs on `n` vertices (n ≤ 6).
pub fn connected_graphs(n: usize) -> Vec<Vec<(usize, usize)>> {
    assert!(n <= 6, "exhaustive enumeration is limited to 6 vertices");
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    (0u32..1 << pairs.len())
        .map(|mask| pairs.iter().enumerate().filter(|&(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect::<Vec<_>>())
        .filter(|edges| is_connected(n, edges))
        .collect()
}

pub fn is_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    if n == 0 {
        return true;
    }
    let mut uf = crate::union_find::UnionFind::new(n);
    for &(a, b) in edges {
        uf.union(a, b);
    }
    (1..n).all(|v| uf.find(v) == uf.find(0))
}
