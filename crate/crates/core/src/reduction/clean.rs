//! Removing chords from wires and obstruction edges at junctions.
//!
//! A wire is an ordered vertex list from one junction centre to another.
//! At a T-junction the three arms are ordered away from the centre; the
//! junction is clean when no arm vertex has an edge into another arm other
//! than the first vertex of each arm to the centre.

use std::collections::HashMap;

use super::net::Net;
use super::rules::RewritableGraph;
use crate::error::{Error, Result};

/// Keeps a chordless sub-path from `path[0]` to its last vertex: from each
/// kept vertex jump to its furthest neighbour along the wire, Z-measuring
/// everything skipped. Edges leaving the wire are left alone.
pub fn clean_wire(g: &mut RewritableGraph, path: &[usize]) -> Result<Vec<usize>> {
    if path.is_empty() {
        return Ok(Vec::new());
    }
    let mut kept = vec![path[0]];
    let mut i = 0;
    while i + 1 < path.len() {
        let v = path[i];
        let j = (i + 1..path.len())
            .rev()
            .find(|&j| g.has_edge(v, path[j]))
            .ok_or_else(|| Error::Precondition(format!("wire is broken after vertex {v}")))?;
        for &u in &path[i + 1..j] {
            g.measure_z(u)?;
        }
        kept.push(path[j]);
        i = j;
    }
    Ok(kept)
}

/// A junction: centre vertex and three arms ordered away from it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Junction {
    pub centre: usize,
    pub arms: [Vec<usize>; 3],
}

const LEFT: usize = 0;
const CENTRE: usize = 1;
const RIGHT: usize = 2;

impl Junction {
    /// Edges between arm `a` and the other arms (or the centre), except the
    /// edge from the first vertex of `a` to the centre.
    pub fn obstructions(&self, g: &RewritableGraph, a: usize) -> Vec<(usize, usize)> {
        let cross = self.cross_line(a);
        let on_cross: HashMap<usize, usize> = cross.iter().enumerate().map(|(p, &v)| (v, p)).collect();
        let mut out = Vec::new();
        for (k, &v) in self.arms[a].iter().enumerate() {
            for &u in g.neighbors(v) {
                if on_cross.contains_key(&u) && !(k == 0 && u == self.centre) {
                    out.push((v, u));
                }
            }
        }
        out
    }

    pub fn is_clean(&self, g: &RewritableGraph) -> bool {
        (0..3).all(|a| self.obstructions(g, a).is_empty())
    }

    /// The two arms other than `a`, joined through the centre, left to right.
    fn cross_line(&self, a: usize) -> Vec<usize> {
        let (b, c) = other_arms(a);
        let mut line: Vec<usize> = self.arms[b].iter().rev().copied().collect();
        line.push(self.centre);
        line.extend_from_slice(&self.arms[c]);
        line
    }

    /// Approaches the centre along arm `a` and removes the obstructions
    /// between that arm and the cross line. Returns whether anything changed.
    fn approach(&mut self, g: &mut RewritableGraph, a: usize) -> Result<bool> {
        let (b, c) = other_arms(a);
        let cross = self.cross_line(a);
        let pos: HashMap<usize, usize> = cross.iter().enumerate().map(|(p, &v)| (v, p)).collect();
        let arm = self.arms[a].clone();
        let hits = |g: &RewritableGraph, k: usize| -> Vec<usize> {
            let mut ps: Vec<usize> = g
                .neighbors(arm[k])
                .iter()
                .filter(|&&u| !(k == 0 && u == self.centre))
                .filter_map(|u| pos.get(u).copied())
                .collect();
            ps.sort_unstable();
            ps
        };
        // outermost arm vertex with an obstruction
        let Some(k) = (0..arm.len()).rev().find(|&k| !hits(g, k).is_empty()) else { return Ok(false) };
        for &u in &arm[..k] {
            g.measure_z(u)?;
        }
        let v = arm[k];
        let mut ws = g.neighbors(v).iter().filter_map(|u| pos.get(u).copied()).collect::<Vec<_>>();
        ws.sort_unstable();
        let split = |left_end: usize, right_start: usize| -> (Vec<usize>, Vec<usize>) {
            (cross[..=left_end].iter().rev().copied().collect(), cross[right_start..].to_vec())
        };
        let (centre, approach, (left, right)) = if ws.len() == 1 {
            // case 1: the cross-line neighbour becomes the centre
            let w = ws[0];
            (cross[w], arm[k..].to_vec(), (cross[..w].iter().rev().copied().collect(), cross[w + 1..].to_vec()))
        } else if ws.len() == 2 && ws[1] == ws[0] + 1 {
            // case 2: v closes a triangle with two consecutive cross vertices;
            // Y on v leaves its outer neighbour as the centre of a T
            let u = *arm.get(k + 1).ok_or_else(|| {
                Error::Precondition(format!("junction arm ends at {v}, no vertex to take over after the Y measurement"))
            })?;
            g.measure_y(v)?;
            (u, arm[k + 2..].to_vec(), split(ws[0], ws[1]))
        } else {
            // case 3: drop the cross line strictly between the outermost
            // neighbours of v, which then becomes the centre
            let (wl, wr) = (ws[0], *ws.last().expect("non-empty"));
            for &x in &cross[wl + 1..wr] {
                g.measure_z(x)?;
            }
            (v, arm[k + 1..].to_vec(), split(wl, wr))
        };
        self.centre = centre;
        self.arms[a] = approach;
        self.arms[b] = left;
        self.arms[c] = right;
        // former cross-line obstructions may now be chords inside an arm
        for x in 0..3 {
            let mut wire = vec![self.centre];
            wire.extend_from_slice(&self.arms[x]);
            if wire.len() > 1 {
                let kept = clean_wire(g, &wire)?;
                self.arms[x] = kept[1..].to_vec();
            }
        }
        Ok(true)
    }
}

fn other_arms(a: usize) -> (usize, usize) {
    match a {
        LEFT => (CENTRE, RIGHT),
        CENTRE => (LEFT, RIGHT),
        _ => (LEFT, CENTRE),
    }
}

/// Clears all obstructions at a T-junction: first from the centre arm,
/// then from the left arm, repeating until nothing changes.
pub fn clean_junction(g: &mut RewritableGraph, junction: &mut Junction) -> Result<()> {
    let budget = 4 * (junction.arms.iter().map(Vec::len).sum::<usize>() + 1);
    for _ in 0..budget {
        let mut changed = junction.approach(g, CENTRE)?;
        changed |= junction.approach(g, LEFT)?;
        if !changed {
            return Ok(());
        }
    }
    Err(Error::Precondition(format!("junction at {} did not settle", junction.centre)))
}

/// Edges from an arm vertex to another arm, or to the centre from beyond
/// the first vertex of the arm.
fn has_obstruction(g: &RewritableGraph, centre: usize, arms: &[Vec<usize>]) -> Option<usize> {
    for (a, arm) in arms.iter().enumerate() {
        for (k, &v) in arm.iter().enumerate() {
            let bad = g.neighbors(v).iter().any(|&u| {
                (u == centre && k > 0) || arms.iter().enumerate().any(|(b, other)| b != a && other.contains(&u))
            });
            if bad {
                return Some(v);
            }
        }
    }
    None
}

/// Cleans every wire of the net, then every junction. A junction with one
/// vertical arm and up to two horizontal ones is cleaned by approaching
/// from the vertical arm; a missing horizontal arm is treated as empty and
/// anything that ends up in it is measured away. Other junctions must
/// already be clean. Returns the number of vertices measured.
pub fn clean_wires_and_junctions(g: &mut RewritableGraph, net: &mut Net) -> Result<usize> {
    let before = g.log().len();
    for w in 0..net.wires.len() {
        let kept = clean_wire(g, &net.wire_path(w))?;
        net.wires[w].interior = kept[1..kept.len() - 1].to_vec();
    }
    for j in 0..net.junctions.len() {
        let arms = net.arms(j);
        let find = |vertical: bool, outgoing: bool| {
            arms.iter()
                .filter(|(w, _)| net.wires[*w].vertical == vertical && (vertical || (net.wires[*w].ends.0 == j) == outgoing))
                .collect::<Vec<_>>()
        };
        let (left, right, vertical) = (find(false, false), find(false, true), find(true, false));
        let centre = net.junctions[j];
        if vertical.len() != 1 || left.len() > 1 || right.len() > 1 {
            let lists: Vec<Vec<usize>> = arms.iter().map(|(_, a)| a.clone()).collect();
            if let Some(v) = has_obstruction(g, centre, &lists) {
                return Err(Error::Precondition(format!(
                    "junction {j} at vertex {centre} with {} arms has an obstruction at {v}",
                    arms.len()
                )));
            }
            continue;
        }
        let arm = |x: &Vec<&(usize, Vec<usize>)>| x.first().map(|(_, a)| a.clone()).unwrap_or_default();
        let mut junction = Junction { centre, arms: [arm(&left), arm(&vertical), arm(&right)] };
        if junction.is_clean(g) {
            continue;
        }
        clean_junction(g, &mut junction)?;
        net.junctions[j] = junction.centre;
        let [l, c, r] = junction.arms;
        for (slot, new_arm) in [(&left, l), (&vertical, c), (&right, r)] {
            match slot.first() {
                Some((w, _)) => net.set_arm(*w, j, new_arm),
                None => {
                    for v in new_arm {
                        g.measure_z(v)?;
                    }
                }
            }
        }
    }
    Ok(g.log().len() - before)
}
