//! Outcome configurations, their domain decomposition and the logical graph.
//!
//! Same-outcome neighbours are merged into domains with a union-find pass.
//! The multigraph between domains is then reduced mod 2 to a simple graph.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::union_find::UnionFind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Outcome {
    X = 0,
    Y = 1,
    Z = 2,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::X, Outcome::Y, Outcome::Z];

    pub fn from_index(i: u8) -> Outcome {
        Self::ALL[i as usize]
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// The two outcomes different from `self`, in increasing order.
    pub fn others(self) -> [Outcome; 2] {
        match self {
            Outcome::X => [Outcome::Y, Outcome::Z],
            Outcome::Y => [Outcome::X, Outcome::Z],
            Outcome::Z => [Outcome::X, Outcome::Y],
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::X => "x",
            Outcome::Y => "y",
            Outcome::Z => "z",
        })
    }
}

/// One POVM outcome per lattice site.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OutcomeConfig(pub Vec<Outcome>);

impl OutcomeConfig {
    pub fn uniform(n: usize, label: Outcome) -> Self {
        OutcomeConfig(vec![label; n])
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        OutcomeConfig((0..n).map(|_| Outcome::from_index(rng.random_range(0..3))).collect())
    }

    /// The `index`-th configuration in base-3 order, site 0 least significant.
    pub fn from_index(n: usize, mut index: u64) -> Self {
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            labels.push(Outcome::from_index((index % 3) as u8));
            index /= 3;
        }
        OutcomeConfig(labels)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[Outcome] {
        &self.0
    }

    /// Applies a relabelling `perm[old] = new` to every site.
    pub fn permuted(&self, perm: [Outcome; 3]) -> Self {
        OutcomeConfig(self.0.iter().map(|&a| perm[a.index()]).collect())
    }

    /// Compact base-3 string, one digit per site (0 = x, 1 = y, 2 = z).
    pub fn to_base3(&self) -> String {
        self.0.iter().map(|&a| char::from(b'0' + a as u8)).collect()
    }

    pub fn from_base3(s: &str) -> Result<Self> {
        s.bytes()
            .map(|b| match b {
                b'0'..=b'2' => Ok(Outcome::from_index(b - b'0')),
                _ => Err(Error::Config(format!("invalid base-3 digit '{}'", b as char))),
            })
            .collect::<Result<Vec<_>>>()
            .map(OutcomeConfig)
    }
}

impl From<Vec<Outcome>> for OutcomeConfig {
    fn from(v: Vec<Outcome>) -> Self {
        OutcomeConfig(v)
    }
}

/// Sampling weight of a configuration as a power of two.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Weight {
    /// `2^k` up to the global normalisation.
    Log2(i64),
    /// Some domain contains an odd cycle; the configuration cannot occur.
    Zero,
}

impl Weight {
    pub fn exponent(self) -> Option<i64> {
        match self {
            Weight::Log2(k) => Some(k),
            Weight::Zero => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DomainDecomposition {
    domain_of: Vec<usize>,
    members: Vec<Vec<usize>>,
    labels: Vec<Outcome>,
    internal_edges: Vec<usize>,
    /// Inter-domain bond multiplicities keyed by `(lower id, higher id)`.
    inter: BTreeMap<(usize, usize), usize>,
    inter_total: usize,
    odd_cycle: bool,
}

impl DomainDecomposition {
    pub fn num_domains(&self) -> usize {
        self.members.len()
    }
    /// |ℰ|: bonds between different domains, counted with multiplicity.
    pub fn inter_domain_edges(&self) -> usize {
        self.inter_total
    }
    pub fn domain_of(&self, site: usize) -> usize {
        self.domain_of[site]
    }
    pub fn members(&self, d: usize) -> &[usize] {
        &self.members[d]
    }
    pub fn label(&self, d: usize) -> Outcome {
        self.labels[d]
    }
    pub fn size(&self, d: usize) -> usize {
        self.members[d].len()
    }
    pub fn internal_edges(&self, d: usize) -> usize {
        self.internal_edges[d]
    }
    pub fn multiplicities(&self) -> &BTreeMap<(usize, usize), usize> {
        &self.inter
    }
    pub fn multiplicity(&self, a: usize, b: usize) -> usize {
        self.inter.get(&(a.min(b), a.max(b))).copied().unwrap_or(0)
    }
    pub fn has_odd_cycle(&self) -> bool {
        self.odd_cycle
    }

    /// Per-site outcomes reconstructed from the domain labels.
    pub fn config(&self) -> OutcomeConfig {
        OutcomeConfig(self.domain_of.iter().map(|&d| self.labels[d]).collect())
    }

    pub fn log2_weight(&self) -> Weight {
        if self.odd_cycle {
            Weight::Zero
        } else {
            Weight::Log2(self.num_domains() as i64 - self.inter_total as i64)
        }
    }
}

pub fn label_domains(lattice: &Lattice, config: &OutcomeConfig) -> Result<DomainDecomposition> {
    let n = lattice.num_sites();
    if config.len() != n {
        return Err(Error::Config(format!("{} labels for {} sites", config.len(), n)));
    }
    let labels = config.labels();
    let mut uf = UnionFind::new(n);
    for e in lattice.edges() {
        if labels[e.a] == labels[e.b] {
            uf.union(e.a, e.b);
        }
    }
    // Ids follow the smallest member, which is the first root seen in site order.
    let mut id_of_root = vec![usize::MAX; n];
    let mut domain_of = vec![0; n];
    let mut members: Vec<Vec<usize>> = Vec::with_capacity(uf.num_sets());
    let mut dlabels = Vec::with_capacity(uf.num_sets());
    for s in 0..n {
        let r = uf.find(s);
        if id_of_root[r] == usize::MAX {
            id_of_root[r] = members.len();
            members.push(Vec::new());
            dlabels.push(labels[s]);
        }
        domain_of[s] = id_of_root[r];
        members[id_of_root[r]].push(s);
    }
    let mut internal_edges = vec![0; members.len()];
    let mut inter = BTreeMap::new();
    let mut inter_total = 0;
    for e in lattice.edges() {
        let (da, db) = (domain_of[e.a], domain_of[e.b]);
        if da == db {
            internal_edges[da] += 1;
        } else {
            *inter.entry((da.min(db), da.max(db))).or_insert(0) += 1;
            inter_total += 1;
        }
    }
    let odd_cycle = !lattice.is_bipartite() && domains_have_odd_cycle(lattice, &domain_of, &members);
    Ok(DomainDecomposition { domain_of, members, labels: dlabels, internal_edges, inter, inter_total, odd_cycle })
}

fn domains_have_odd_cycle(lattice: &Lattice, domain_of: &[usize], members: &[Vec<usize>]) -> bool {
    let mut color = vec![u8::MAX; lattice.num_sites()];
    let mut queue = VecDeque::new();
    for m in members {
        color[m[0]] = 0;
        queue.push_back(m[0]);
        while let Some(u) = queue.pop_front() {
            for v in lattice.neighbors(u) {
                if domain_of[v] != domain_of[u] {
                    continue;
                }
                if color[v] == u8::MAX {
                    color[v] = 1 - color[u];
                    queue.push_back(v);
                } else if color[v] == color[u] {
                    return true;
                }
            }
        }
    }
    false
}

/// Shorthand for `label_domains(..)?.log2_weight()`.
pub fn log2_weight(lattice: &Lattice, config: &OutcomeConfig) -> Result<Weight> {
    Ok(label_domains(lattice, config)?.log2_weight())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainVertex {
    pub size: usize,
    pub label: Outcome,
    /// Member site closest (in worst case) to all other members.
    pub site: usize,
    pub coord: (usize, usize),
    pub members: Vec<usize>,
}

/// Simple undirected graph of logical qubits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphState {
    vertices: Vec<DomainVertex>,
    adj: Vec<Vec<usize>>,
}

pub fn build_graph(lattice: &Lattice, decomp: &DomainDecomposition) -> GraphState {
    let nd = decomp.num_domains();
    let mut adj = vec![Vec::new(); nd];
    for (&(a, b), &m) in decomp.multiplicities() {
        if m % 2 == 1 {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    let mut dist = vec![u32::MAX; lattice.num_sites()];
    let vertices = (0..nd)
        .map(|d| {
            let members = decomp.members(d);
            let site = central_site(lattice, decomp, members, &mut dist);
            DomainVertex {
                size: members.len(),
                label: decomp.label(d),
                site,
                coord: lattice.coord(site),
                members: members.to_vec(),
            }
        })
        .collect();
    GraphState { vertices, adj }
}

/// Member minimising the largest in-domain distance to the other members.
fn central_site(lattice: &Lattice, decomp: &DomainDecomposition, members: &[usize], dist: &mut [u32]) -> usize {
    if members.len() <= 2 {
        return members[0];
    }
    let d = decomp.domain_of(members[0]);
    let mut best = (u32::MAX, members[0]);
    let mut queue = VecDeque::new();
    for &src in members {
        for &m in members {
            dist[m] = u32::MAX;
        }
        dist[src] = 0;
        queue.push_back(src);
        let mut ecc = 0;
        while let Some(u) = queue.pop_front() {
            ecc = ecc.max(dist[u]);
            if ecc >= best.0 {
                break;
            }
            for v in lattice.neighbors(u) {
                if decomp.domain_of(v) == d && dist[v] == u32::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        queue.clear();
        if ecc < best.0 {
            best = (ecc, src);
        }
    }
    best.1
}

impl GraphState {
    /// Graph with given edges and placeholder payloads (vertex `i` at `(0, i)`).
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let vertices = (0..n)
            .map(|i| DomainVertex { size: 1, label: Outcome::Z, site: i, coord: (0, i), members: vec![i] })
            .collect();
        Self::with_vertices(vertices, edges)
    }

    /// Graph with explicit payloads; duplicate edges collapse, self-loops are dropped.
    pub fn with_vertices(vertices: Vec<DomainVertex>, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); vertices.len()];
        for &(a, b) in edges {
            if a != b {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        GraphState { vertices, adj }
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }
    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }
    pub fn vertex(&self, v: usize) -> &DomainVertex {
        &self.vertices[v]
    }
    pub fn vertices(&self) -> &[DomainVertex] {
        &self.vertices
    }
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }
    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }
    /// Edges as `(lower, higher)` pairs in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.num_edges());
        for (a, list) in self.adj.iter().enumerate() {
            out.extend(list.iter().filter(|&&b| b > a).map(|&b| (a, b)));
        }
        out
    }

    pub fn num_components(&self) -> usize {
        let mut uf = UnionFind::new(self.num_vertices());
        for (a, b) in self.edges() {
            uf.union(a, b);
        }
        uf.num_sets()
    }

    /// Induced subgraph on the vertices with `keep[v]`, renumbered in order.
    pub fn induced(&self, keep: &[bool]) -> GraphState {
        let mut new_id = vec![usize::MAX; self.num_vertices()];
        let mut vertices = Vec::new();
        for (v, _) in keep.iter().enumerate().filter(|(_, &k)| k) {
            new_id[v] = vertices.len();
            vertices.push(self.vertices[v].clone());
        }
        let adj = (0..self.num_vertices())
            .filter(|&v| keep[v])
            .map(|v| self.adj[v].iter().filter(|&&u| keep[u]).map(|&u| new_id[u]).collect())
            .collect();
        GraphState { vertices, adj }
    }

    /// Same vertices, only the edges for which `keep` returns true.
    pub fn filter_edges(&self, mut keep: impl FnMut(usize, usize) -> bool) -> GraphState {
        let edges: Vec<_> = self.edges().into_iter().filter(|&(a, b)| keep(a, b)).collect();
        Self::with_vertices(self.vertices.clone(), &edges)
    }

    /// Order-independent FNV-1a hash of the edge set, for run reports.
    pub fn hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |x: u64| {
            for byte in x.to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(self.num_vertices() as u64);
        for (a, b) in self.edges() {
            eat(a as u64);
            eat(b as u64);
        }
        h
    }

    /// Edge list in the lattice format, followed by an `id size row col` table.
    pub fn write_edge_list<W: Write>(&self, lattice: &Lattice, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# {} {} {} {} {}",
            lattice.kind(),
            lattice.size(),
            lattice.boundary(),
            self.num_vertices(),
            self.num_edges()
        )?;
        for (a, b) in self.edges() {
            writeln!(out, "{a} {b}")?;
        }
        writeln!(out, "# id size row col")?;
        for (i, v) in self.vertices.iter().enumerate() {
            writeln!(out, "{i} {} {} {}", v.size, v.coord.0, v.coord.1)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Boundary, LatticeKind, Sublattice};

    fn l4() -> Lattice {
        Lattice::build(LatticeKind::Honeycomb, 4, Boundary::Periodic).unwrap()
    }

    #[test]
    fn uniform_config_is_one_domain() {
        let lat = l4();
        let d = label_domains(&lat, &OutcomeConfig::uniform(16, Outcome::Z)).unwrap();
        assert_eq!(d.num_domains(), 1);
        assert_eq!(d.inter_domain_edges(), 0);
        assert_eq!(d.internal_edges(0), 24);
        assert_eq!(d.log2_weight(), Weight::Log2(1));
    }

    #[test]
    fn alternating_config_is_all_singletons() {
        let lat = l4();
        let cfg = OutcomeConfig(
            (0..16).map(|s| if lat.sublattice(s) == Sublattice::A { Outcome::X } else { Outcome::Y }).collect(),
        );
        let d = label_domains(&lat, &cfg).unwrap();
        assert_eq!(d.num_domains(), 16);
        assert_eq!(d.inter_domain_edges(), 24);
        assert_eq!(d.log2_weight(), Weight::Log2(-8));
        let g = build_graph(&lat, &d);
        assert_eq!(g.num_edges(), 24);
        for e in lat.edges() {
            assert!(g.has_edge(e.a, e.b));
        }
    }

    #[test]
    fn star_with_z_pair() {
        let star = Lattice::star();
        let cfg = OutcomeConfig(vec![Outcome::Z, Outcome::Z, Outcome::X, Outcome::X]);
        let d = label_domains(&star, &cfg).unwrap();
        assert_eq!(d.num_domains(), 3);
        assert_eq!(d.members(0), &[0, 1]);
    }

    #[test]
    fn multiplicity_parity() {
        // Two domains in a 4-cycle share two bonds: no logical edge.
        let ring = Lattice::chain(4, Boundary::Periodic);
        let cfg = OutcomeConfig(vec![Outcome::Z, Outcome::Z, Outcome::X, Outcome::X]);
        let d = label_domains(&ring, &cfg).unwrap();
        assert_eq!(d.multiplicity(0, 1), 2);
        assert_eq!(build_graph(&ring, &d).num_edges(), 0);

        // A single site facing a three-site domain on all three bonds.
        let lat = Lattice::build(LatticeKind::Honeycomb, 2, Boundary::Periodic).unwrap();
        let mut labels = vec![Outcome::X; 4];
        labels[0] = Outcome::Z;
        let d = label_domains(&lat, &OutcomeConfig(labels)).unwrap();
        assert_eq!(d.num_domains(), 2);
        assert_eq!(d.multiplicity(0, 1), 3);
        assert_eq!(build_graph(&lat, &d).num_edges(), 1);
    }

    #[test]
    fn odd_ring_all_same_has_zero_weight() {
        let ring = Lattice::chain(5, Boundary::Periodic);
        assert_eq!(log2_weight(&ring, &OutcomeConfig::uniform(5, Outcome::Y)).unwrap(), Weight::Zero);
        let mut cfg = OutcomeConfig::uniform(5, Outcome::Y);
        cfg.0[2] = Outcome::X;
        assert_eq!(log2_weight(&ring, &cfg).unwrap(), Weight::Log2(2 - 2));
    }

    #[test]
    fn representative_is_central() {
        let chain = Lattice::chain(5, Boundary::Open);
        let d = label_domains(&chain, &OutcomeConfig::uniform(5, Outcome::X)).unwrap();
        let g = build_graph(&chain, &d);
        assert_eq!(g.vertex(0).site, 2);
    }

    #[test]
    fn base3_roundtrip() {
        let cfg = OutcomeConfig::from_index(6, 400);
        assert_eq!(OutcomeConfig::from_base3(&cfg.to_base3()).unwrap(), cfg);
        assert!(OutcomeConfig::from_base3("0131").is_err());
    }

    #[test]
    fn mismatched_config_is_rejected() {
        assert!(label_domains(&l4(), &OutcomeConfig::uniform(15, Outcome::X)).is_err());
    }
}
