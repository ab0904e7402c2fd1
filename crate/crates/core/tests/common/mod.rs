//! Helpers shared by the integration tests.

use std::collections::BTreeSet;

use aklt_core::reduction::GridCertificate;
use aklt_core::{GraphState, Outcome};

/// Replays a certificate's measurement log on `graph` with a separate
/// implementation of the three rewrite rules, then compares the surviving
/// graph with a square grid built here from scratch.
pub fn replay_certificate(graph: &GraphState, cert: &GridCertificate) -> Result<(), String> {
    let n = graph.num_vertices();
    let mut adj: Vec<BTreeSet<usize>> = (0..n).map(|v| graph.neighbors(v).iter().copied().collect()).collect();
    let mut alive = vec![true; n];
    let toggle = |adj: &mut Vec<BTreeSet<usize>>, a: usize, b: usize| {
        if !adj[a].remove(&b) {
            adj[a].insert(b);
            adj[b].insert(a);
        } else {
            adj[b].remove(&a);
        }
    };
    let drop = |adj: &mut Vec<BTreeSet<usize>>, alive: &mut Vec<bool>, v: usize| -> Result<(), String> {
        if !alive[v] {
            return Err(format!("vertex {v} measured twice"));
        }
        for u in std::mem::take(&mut adj[v]) {
            adj[u].remove(&v);
        }
        alive[v] = false;
        Ok(())
    };
    let mut log = cert.measurements.iter();
    while let Some(m) = log.next() {
        let v = m.vertex;
        if v >= n {
            return Err(format!("vertex {v} out of range"));
        }
        match m.basis {
            Outcome::Z => drop(&mut adj, &mut alive, v)?,
            Outcome::Y => {
                let nb: Vec<usize> = adj[v].iter().copied().collect();
                for i in 0..nb.len() {
                    for j in i + 1..nb.len() {
                        toggle(&mut adj, nb[i], nb[j]);
                    }
                }
                drop(&mut adj, &mut alive, v)?;
            }
            Outcome::X => {
                let mid = log.next().filter(|m| m.basis == Outcome::X).ok_or("unpaired X measurement")?.vertex;
                let right = match adj[mid].iter().copied().collect::<Vec<_>>()[..] {
                    [a, b] if a == v => b,
                    [a, b] if b == v => a,
                    _ => return Err(format!("X pair ({v}, {mid}): middle vertex is not on a path through {v}")),
                };
                let inherited: Vec<usize> = adj[v].iter().copied().filter(|&u| u != mid && u != right).collect();
                for u in inherited {
                    toggle(&mut adj, right, u);
                }
                drop(&mut adj, &mut alive, v)?;
                drop(&mut adj, &mut alive, mid)?;
            }
        }
    }

    let k = cert.size;
    if cert.vertices.len() != k * k {
        return Err("vertex map has the wrong length".into());
    }
    let survivors: BTreeSet<usize> = (0..n).filter(|&v| alive[v]).collect();
    if survivors != cert.vertices.iter().copied().collect() {
        return Err(format!("{} survivors, {} grid vertices", survivors.len(), k * k));
    }
    let mut want = BTreeSet::new();
    for r in 0..k {
        for c in 0..k {
            let here = cert.vertices[r * k + c];
            for (dr, dc) in [(0, 1), (1, 0)] {
                if r + dr < k && c + dc < k {
                    let there = cert.vertices[(r + dr) * k + c + dc];
                    want.insert((here.min(there), here.max(there)));
                }
            }
        }
    }
    let have: BTreeSet<(usize, usize)> =
        survivors.iter().flat_map(|&a| adj[a].iter().filter(move |&&b| a < b).map(move |&b| (a, b))).collect();
    if want != have {
        return Err(format!("{} edges, expected {}", have.len(), want.len()));
    }
    Ok(())
}
