//! Carving a grid-shaped net out of a random graph.
//!
//! Nodes sit on a square pattern with pitch `4l`: node `(i, j)` covers rows
//! `[4li, 4li + l)` and columns `[4lj, 4lj + l)`. One horizontal road per
//! node row runs through the `l`-high band of its nodes; one vertical
//! segment per node column joins consecutive roads inside the `l`-wide
//! corridor of the column. Paths are breadth-first shortest paths, hence
//! chordless, and never touch earlier paths except at the attachment
//! vertex, so the kept vertices induce exactly the net. Everything else is
//! measured in the Z basis.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::net::{Net, Rect, Wire};
use super::rules::RewritableGraph;
use crate::domains::GraphState;
use crate::error::{Error, Result};

/// Placement of the node pattern for linear size `Λ` and scale `l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetGeometry {
    pub scale: usize,
    pub pitch: usize,
    /// Nodes per side.
    pub size: usize,
}

impl NetGeometry {
    pub fn new(lambda: usize, scale: usize) -> Result<Self> {
        if scale == 0 || scale > lambda {
            return Err(Error::Param(format!("scale l = {scale} must lie in 1..={lambda}")));
        }
        let pitch = 4 * scale;
        let size = (lambda - scale) / pitch + 1;
        if size < 2 {
            return Err(Error::Param(format!("scale l = {scale} leaves fewer than 2 nodes per side at size {lambda}")));
        }
        Ok(NetGeometry { scale, pitch, size })
    }

    /// Band holding road `i`.
    pub fn road_rect(&self, i: usize) -> Rect {
        Rect { row: i * self.pitch, col: 0, height: self.scale, width: (self.size - 1) * self.pitch + self.scale }
    }

    /// Corridor holding the segment from road `i` to road `i + 1` in column
    /// `j`: the node column widened by `l` on both sides.
    pub fn segment_rect(&self, i: usize, j: usize) -> Rect {
        let col = (j * self.pitch).saturating_sub(self.scale);
        let end = j * self.pitch + 2 * self.scale;
        Rect { row: i * self.pitch, col, height: self.pitch + self.scale, width: end - col }
    }

    pub fn node_rect(&self, i: usize, j: usize) -> Rect {
        Rect { row: i * self.pitch, col: j * self.pitch, height: self.scale, width: self.scale }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CarveFailure {
    /// No admissible road extension into the node square `rect` on road `row`.
    Road { row: usize, rect: Rect },
    /// No admissible path between roads `row` and `row + 1` in column `col`.
    Segment { row: usize, col: usize, rect: Rect },
    /// Attachments on road `row` are not ordered by node column, or two
    /// attachments of node `col` are adjacent.
    Attachment { row: usize, col: usize, rect: Rect },
}

/// Net description plus the bookkeeping of the carve.
#[derive(Clone, Debug)]
pub struct Carved {
    pub geometry: NetGeometry,
    pub net: Net,
    pub roads: Vec<Vec<usize>>,
    pub segments: Vec<Vec<usize>>,
}

/// Where one end of a segment meets its road. `ends` are the road
/// positions next to the end vertex, `span` the range touched by any
/// vertex of the segment.
#[derive(Clone, Debug)]
struct Attachment {
    segment: usize,
    top: bool,
    ends: Vec<usize>,
    span: (usize, usize),
    junction: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
    Shared,
}

struct Router<'g> {
    graph: &'g GraphState,
    routed: Vec<bool>,
    /// Road index of road vertices.
    road_of: Vec<Option<usize>>,
}

impl Router<'_> {
    fn routed_neighbours(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.graph.neighbors(v).iter().copied().filter(|&u| self.routed[u])
    }

    fn inside(&self, v: usize, rect: &Rect) -> bool {
        !self.routed[v] && rect.contains(self.graph.vertex(v).coord)
    }

    /// Chordless sub-path of `path` with the same ends; dropped vertices
    /// are released.
    fn shortcut(&mut self, path: &[usize]) -> Vec<usize> {
        let mut kept = vec![path[0]];
        let mut i = 0;
        while i + 1 < path.len() {
            let j = (i + 1..path.len()).rev().find(|&j| self.graph.has_edge(path[i], path[j])).expect("path is connected");
            for &u in &path[i + 1..j] {
                self.routed[u] = false;
                self.road_of[u] = None;
            }
            kept.push(path[j]);
            i = j;
        }
        kept
    }

    fn mark(&mut self, path: &[usize], road: Option<usize>) {
        for &v in path {
            self.routed[v] = true;
            self.road_of[v] = road;
        }
    }

    /// Shortest path from any `source` to any `target` through `allowed`
    /// vertices; sources are tried in id order, neighbours in id order.
    fn shortest_path(
        &self,
        sources: impl Iterator<Item = usize>,
        allowed: impl Fn(usize) -> bool,
        target: impl Fn(usize) -> bool,
    ) -> Option<Vec<usize>> {
        let n = self.graph.num_vertices();
        let mut parent = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        for s in sources {
            if parent[s] == usize::MAX {
                parent[s] = s;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            if target(u) {
                let mut path = vec![u];
                let mut x = u;
                while parent[x] != x {
                    x = parent[x];
                    path.push(x);
                }
                path.reverse();
                return Some(path);
            }
            for &v in self.graph.neighbors(u) {
                if parent[v] == usize::MAX && allowed(v) {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        None
    }
}

/// Routes the net at scale `l` on a graph embedded in a `rows × cols`
/// lattice, then measures every vertex off the net in the Z basis.
pub fn carve_net(
    graph: &GraphState,
    rows: usize,
    cols: usize,
    scale: usize,
) -> Result<std::result::Result<(RewritableGraph, Carved), CarveFailure>> {
    let geometry = NetGeometry::new(rows.min(cols), scale)?;
    let n = graph.num_vertices();
    let mut router = Router { graph, routed: vec![false; n], road_of: vec![None; n] };
    let k = geometry.size;

    // Roads are routed node square by node square, away from earlier roads,
    // then shortcut to a chordless path by jumping from each kept vertex to
    // its furthest neighbour along the road.
    let mut roads = Vec::with_capacity(k);
    for i in 0..k {
        let rect = geometry.road_rect(i);
        let mut road: Vec<usize> = Vec::new();
        // index of the first road vertex inside the latest node square
        let mut anchor = 0;
        for j in 1..k {
            let square = geometry.node_rect(i, j);
            let first = geometry.node_rect(i, 0);
            let r = &router;
            let free = |v: usize| r.inside(v, &rect) && r.routed_neighbours(v).all(|u| r.road_of[u] == Some(i));
            let in_square = |v: usize| square.contains(graph.vertex(v).coord);
            let piece = if road.is_empty() {
                let sources = (0..n).filter(|&v| free(v) && first.contains(graph.vertex(v).coord));
                r.shortest_path(sources, free, in_square)
            } else {
                // extend from the tip if possible, else from an earlier vertex
                // past the anchor, dropping the rest of the road
                let sources = road[anchor..].iter().rev().copied();
                let on_road: Vec<usize> = road[anchor..].to_vec();
                r.shortest_path(sources, free, |v| !on_road.contains(&v) && in_square(v))
            };
            let Some(piece) = piece else { return Ok(Err(CarveFailure::Road { row: i, rect: square })) };
            if !road.is_empty() {
                let from = road.iter().rposition(|&v| v == piece[0]).expect("piece starts on the road");
                for &v in &road[from + 1..] {
                    router.routed[v] = false;
                    router.road_of[v] = None;
                }
                road.truncate(from + 1);
            }
            let fresh = if road.is_empty() { &piece[..] } else { &piece[1..] };
            router.mark(fresh, Some(i));
            anchor = road.len() + fresh.len() - 1;
            road.extend_from_slice(fresh);
        }
        let road = router.shortcut(&road);
        roads.push(road);
    }

    let mut position = vec![usize::MAX; n];
    for road in &roads {
        for (p, &v) in road.iter().enumerate() {
            position[v] = p;
        }
    }

    // attachments[i][j]: segment ends meeting road i inside node (i, j)
    let mut attachments: Vec<Vec<Vec<Attachment>>> = vec![vec![Vec::new(); k]; k];
    let mut segments = Vec::with_capacity(k * (k - 1));
    for i in 0..k - 1 {
        for j in 0..k {
            let rect = geometry.segment_rect(i, j);
            let r = &router;
            let on_road = |v: usize, road: usize| r.routed_neighbours(v).any(|u| r.road_of[u] == Some(road));
            // segment vertices may touch both of their roads anywhere; the
            // junction cleaning removes the extra edges later
            let allowed = |v: usize| {
                r.inside(v, &rect) && r.routed_neighbours(v).all(|u| matches!(r.road_of[u], Some(x) if x == i || x == i + 1))
            };
            // keep clear of the attachment already made to road i from above:
            // stay entirely on one side of it, or share its single road vertex
            // with no other contact to road i
            let above = attachments[i][j].first().map(|a: &Attachment| a.span);
            let road_hits = |v: usize| r.routed_neighbours(v).filter(|&u| r.road_of[u] == Some(i)).map(|u| position[u]);
            let side_ok = |v: usize, side: Side| match (above, side) {
                (None, _) => true,
                (Some((lo, _)), Side::Left) => road_hits(v).all(|p| p + 2 <= lo),
                (Some((_, hi)), Side::Right) => road_hits(v).all(|p| p >= hi + 2),
                (Some((lo, hi)), Side::Shared) => lo == hi && road_hits(v).all(|p| p == lo),
            };
            let sides: &[Side] = if above.is_some() { &[Side::Left, Side::Right, Side::Shared] } else { &[Side::Left] };
            let path = sides
                .iter()
                .filter_map(|&side| {
                    let ok = |v: usize| allowed(v) && side_ok(v, side);
                    let path = r.shortest_path((0..n).filter(|&v| ok(v) && on_road(v, i)), ok, |v| on_road(v, i + 1))?;
                    let single = path[1..].iter().all(|&v| !on_road(v, i));
                    (side != Side::Shared || single).then_some(path)
                })
                .min_by_key(Vec::len);
            let Some(path) = path else { return Ok(Err(CarveFailure::Segment { row: i, col: j, rect })) };
            let seg = segments.len();
            for (road, end, top) in [(i, path[0], true), (i + 1, *path.last().expect("non-empty"), false)] {
                let hits = |v: usize| r.routed_neighbours(v).filter(move |&u| r.road_of[u] == Some(road)).map(|u| position[u]);
                let mut ends: Vec<usize> = hits(end).collect();
                ends.sort_unstable();
                let all: Vec<usize> = path.iter().flat_map(|&v| hits(v)).collect();
                let span = (*all.iter().min().expect("touches"), *all.iter().max().expect("touches"));
                attachments[road][j].push(Attachment { segment: seg, top, ends, span, junction: 0 });
            }
            router.mark(&path, None);
            segments.push(path);
        }
    }

    // Within a node two attachments must either meet the road at one common
    // vertex and nowhere else, or be at least two positions apart; node j
    // must end before node j + 1 starts.
    let mut node_span = vec![vec![(0usize, 0usize); k]; k];
    for i in 0..k {
        for j in 0..k {
            let group = &mut attachments[i][j];
            group.sort_unstable_by_key(|a| a.span);
            let fail = || Ok(Err(CarveFailure::Attachment { row: i, col: j, rect: geometry.node_rect(i, j) }));
            let (lo, hi) = (group[0].span.0, group.iter().map(|a| a.span.1).max().expect("non-empty"));
            if let [a, b] = group.as_slice() {
                let shared = a.span.0 == a.span.1 && a.span == b.span;
                if !shared && b.span.0 < a.span.1 + 2 {
                    return fail();
                }
            }
            if j > 0 && node_span[i][j - 1].1 >= lo {
                return fail();
            }
            node_span[i][j] = (lo, hi);
        }
    }

    // Junction centres: the first road vertex next to the segment end, or
    // the last one at the right end of a road so no stub is left over.
    let mut net = Net { size: k, junctions: Vec::new(), nodes: vec![Vec::new(); k * k], wires: Vec::new() };
    let mut bounds = Vec::with_capacity(k);
    for i in 0..k {
        let mut centres: Vec<(usize, usize)> = Vec::new();
        for j in 0..k {
            let count = attachments[i][j].len();
            for gi in 0..count {
                let a = &attachments[i][j][gi];
                let p = if j == k - 1 && gi + 1 == count { *a.ends.last().expect("non-empty") } else { a.ends[0] };
                let id = match centres.iter().find(|&&(q, _)| q == p) {
                    Some(&(_, id)) if net.nodes[i * k + j].contains(&id) => id,
                    Some(_) => return Ok(Err(CarveFailure::Attachment { row: i, col: j, rect: geometry.node_rect(i, j) })),
                    None => {
                        let id = net.junctions.len();
                        net.junctions.push(roads[i][p]);
                        net.nodes[i * k + j].push(id);
                        centres.push((p, id));
                        id
                    }
                };
                attachments[i][j][gi].junction = id;
            }
        }
        centres.sort_unstable();
        for pair in centres.windows(2) {
            let ((p, a), (q, b)) = (pair[0], pair[1]);
            net.wires.push(Wire { ends: (a, b), interior: roads[i][p + 1..q].to_vec(), vertical: false });
        }
        bounds.push((centres[0].0, centres.last().expect("non-empty").0));
    }
    let mut ends = vec![(0usize, 0usize); segments.len()];
    for a in attachments.iter().flatten().flatten() {
        if a.top {
            ends[a.segment].0 = a.junction;
        } else {
            ends[a.segment].1 = a.junction;
        }
    }
    for (s, path) in segments.iter().enumerate() {
        net.wires.push(Wire { ends: ends[s], interior: path.clone(), vertical: true });
    }

    let mut g = RewritableGraph::new(graph);
    let mut keep = vec![false; n];
    for (road, &(lo, hi)) in roads.iter_mut().zip(&bounds) {
        road.truncate(hi + 1);
        road.drain(..lo);
        for &v in road.iter() {
            keep[v] = true;
        }
    }
    for s in &segments {
        for &v in s {
            keep[v] = true;
        }
    }
    for v in 0..n {
        if !keep[v] {
            g.measure_z(v)?;
        }
    }
    Ok(Ok((g, Carved { geometry, net, roads, segments })))
}
