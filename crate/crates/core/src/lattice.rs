//! Honeycomb lattices in brick-wall layout and 1D chains.
//!
//! A honeycomb site `(r, c)` always has a left and a right neighbour in its
//! row and a single vertical bond: down when `r + c` is even, up otherwise.
//! Sites are numbered row-major, `r * cols + c`.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LatticeKind {
    Honeycomb,
    Chain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Boundary {
    Periodic,
    /// Open boundary; under-coordinated sites carry spin-1/2 terminators.
    Open,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sublattice {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// Left to right, i.e. across columns.
    Horizontal,
    /// Top to bottom, across rows.
    Vertical,
}

/// Which periodic seam an edge crosses, if any.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Wrap {
    None,
    Horizontal,
    Vertical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub wrap: Wrap,
}

impl Edge {
    fn new(u: usize, v: usize, wrap: Wrap) -> Self {
        Edge { a: u.min(v), b: u.max(v), wrap }
    }

    pub fn other(&self, s: usize) -> usize {
        if self.a == s {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Clone, Debug)]
pub struct Lattice {
    kind: LatticeKind,
    size: usize,
    boundary: Boundary,
    rows: usize,
    cols: usize,
    /// Spin arity: number of virtual qubits per site (3 honeycomb, 2 chain).
    arity: usize,
    coords: Vec<(usize, usize)>,
    edges: Vec<Edge>,
    sublattice: Vec<Sublattice>,
    terminators: Vec<u8>,
    /// Per site, `(neighbour, edge index)` in edge order; multi-edges repeat.
    incidence: Vec<Vec<(usize, usize)>>,
    wraps_h: bool,
    wraps_v: bool,
    bipartite: bool,
}

impl Lattice {
    /// Builds an `L x L` honeycomb (N = L^2 sites) or an `L`-site chain.
    pub fn build(kind: LatticeKind, size: usize, boundary: Boundary) -> Result<Self> {
        if size < 2 {
            return Err(Error::Lattice(format!("linear size must be >= 2, got {size}")));
        }
        match kind {
            LatticeKind::Honeycomb => Self::honeycomb(size, size, boundary),
            LatticeKind::Chain => Ok(Self::chain(size, boundary)),
        }
    }

    /// Rectangular brick-wall honeycomb with `rows x cols` sites.
    pub fn honeycomb(rows: usize, cols: usize, boundary: Boundary) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Lattice("empty honeycomb".into()));
        }
        let periodic = boundary == Boundary::Periodic;
        if periodic && (rows % 2 == 1 || cols % 2 == 1) {
            return Err(Error::Lattice(format!(
                "periodic honeycomb needs even dimensions, got {rows}x{cols}"
            )));
        }
        if periodic && (rows < 2 || cols < 2) {
            return Err(Error::Lattice("periodic honeycomb needs at least 2x2".into()));
        }
        let idx = |r: usize, c: usize| r * cols + c;
        let mut edges = Vec::with_capacity(3 * rows * cols / 2 + 1);
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    edges.push(Edge::new(idx(r, c), idx(r, c + 1), Wrap::None));
                } else if periodic {
                    edges.push(Edge::new(idx(r, c), idx(r, 0), Wrap::Horizontal));
                }
                if (r + c) % 2 == 0 {
                    if r + 1 < rows {
                        edges.push(Edge::new(idx(r, c), idx(r + 1, c), Wrap::None));
                    } else if periodic {
                        edges.push(Edge::new(idx(r, c), idx(0, c), Wrap::Vertical));
                    }
                }
            }
        }
        let coords = (0..rows * cols).map(|s| (s / cols, s % cols)).collect();
        let sublattice = (0..rows * cols)
            .map(|s| if (s / cols + s % cols) % 2 == 0 { Sublattice::A } else { Sublattice::B })
            .collect();
        Ok(Self::assemble(
            LatticeKind::Honeycomb,
            rows.max(cols),
            boundary,
            rows,
            cols,
            3,
            coords,
            edges,
            Some(sublattice),
            periodic,
            periodic,
        ))
    }

    pub fn chain(n: usize, boundary: Boundary) -> Self {
        let periodic = boundary == Boundary::Periodic;
        let mut edges: Vec<Edge> = (0..n.saturating_sub(1)).map(|i| Edge::new(i, i + 1, Wrap::None)).collect();
        if periodic && n >= 2 {
            edges.push(Edge::new(n - 1, 0, Wrap::Horizontal));
        }
        let coords = (0..n).map(|i| (0, i)).collect();
        Self::assemble(LatticeKind::Chain, n, boundary, 1, n, 2, coords, edges, None, periodic, false)
    }

    /// An open, spin-1/2-terminated honeycomb fragment given explicitly.
    pub fn patch(coords: Vec<(usize, usize)>, pairs: &[(usize, usize)]) -> Result<Self> {
        let n = coords.len();
        if n == 0 {
            return Err(Error::Lattice("empty patch".into()));
        }
        let mut edges = Vec::with_capacity(pairs.len());
        for &(u, v) in pairs {
            if u >= n || v >= n || u == v {
                return Err(Error::Lattice(format!("bad patch edge ({u}, {v})")));
            }
            edges.push(Edge::new(u, v, Wrap::None));
        }
        let rows = coords.iter().map(|c| c.0).max().unwrap_or(0) + 1;
        let cols = coords.iter().map(|c| c.1).max().unwrap_or(0) + 1;
        let lat = Self::assemble(
            LatticeKind::Honeycomb,
            rows.max(cols),
            Boundary::Open,
            rows,
            cols,
            3,
            coords,
            edges,
            None,
            false,
            false,
        );
        if lat.incidence.iter().any(|inc| inc.len() > 3) {
            return Err(Error::Lattice("patch site with degree > 3".into()));
        }
        Ok(lat)
    }

    /// Single hexagon, six sites each with one terminator.
    pub fn hexagon() -> Self {
        Self::honeycomb(2, 3, Boundary::Open).expect("static hexagon")
    }

    /// Centre site with three leaves; leaves carry two terminators each.
    pub fn star() -> Self {
        Self::patch(vec![(1, 1), (1, 0), (1, 2), (2, 1)], &[(0, 1), (0, 2), (0, 3)]).expect("static star")
    }

    /// Two bonded sites with two terminators each.
    pub fn dimer() -> Self {
        Self::patch(vec![(0, 0), (0, 1)], &[(0, 1)]).expect("static dimer")
    }

    /// Lone spin-3/2 site with three terminators.
    pub fn single_site() -> Self {
        Self::patch(vec![(0, 0)], &[]).expect("static site")
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        kind: LatticeKind,
        size: usize,
        boundary: Boundary,
        rows: usize,
        cols: usize,
        arity: usize,
        coords: Vec<(usize, usize)>,
        mut edges: Vec<Edge>,
        sublattice: Option<Vec<Sublattice>>,
        wraps_h: bool,
        wraps_v: bool,
    ) -> Self {
        edges.sort_by_key(|e| (e.a, e.b, e.wrap as u8));
        let n = coords.len();
        let mut incidence = vec![Vec::new(); n];
        for (k, e) in edges.iter().enumerate() {
            incidence[e.a].push((e.b, k));
            incidence[e.b].push((e.a, k));
        }
        let (coloring, bipartite) = two_color(n, &incidence);
        let sublattice = sublattice.unwrap_or(coloring);
        let terminators = incidence
            .iter()
            .map(|inc| if boundary == Boundary::Open { arity.saturating_sub(inc.len()) as u8 } else { 0 })
            .collect();
        Lattice {
            kind,
            size,
            boundary,
            rows,
            cols,
            arity,
            coords,
            edges,
            sublattice,
            terminators,
            incidence,
            wraps_h,
            wraps_v,
            bipartite,
        }
    }

    /// Copy with the periodic seam of `direction` removed ("cut open").
    ///
    /// Cutting for a horizontal crossing drops the horizontal wrap bonds.
    /// Terminators are not added; the cut lattice is for geometry only.
    pub fn cut_open(&self, direction: Direction) -> Self {
        let drop = match direction {
            Direction::Horizontal => Wrap::Horizontal,
            Direction::Vertical => Wrap::Vertical,
        };
        let edges = self.edges.iter().copied().filter(|e| e.wrap != drop).collect();
        let mut lat = Self::assemble(
            self.kind,
            self.size,
            self.boundary,
            self.rows,
            self.cols,
            self.arity,
            self.coords.clone(),
            edges,
            Some(self.sublattice.clone()),
            self.wraps_h && direction != Direction::Horizontal,
            self.wraps_v && direction != Direction::Vertical,
        );
        lat.terminators = self.terminators.clone();
        lat
    }

    /// Copy with every periodic seam removed.
    pub fn cut_open_all(&self) -> Self {
        self.cut_open(Direction::Horizontal).cut_open(Direction::Vertical)
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }
    pub fn size(&self) -> usize {
        self.size
    }
    pub fn boundary(&self) -> Boundary {
        self.boundary
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn arity(&self) -> usize {
        self.arity
    }
    pub fn num_sites(&self) -> usize {
        self.coords.len()
    }
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    pub fn coord(&self, s: usize) -> (usize, usize) {
        self.coords[s]
    }
    pub fn coords(&self) -> &[(usize, usize)] {
        &self.coords
    }
    pub fn sublattice(&self, s: usize) -> Sublattice {
        self.sublattice[s]
    }
    pub fn terminators(&self, s: usize) -> usize {
        self.terminators[s] as usize
    }
    pub fn total_terminators(&self) -> usize {
        self.terminators.iter().map(|&t| t as usize).sum()
    }
    pub fn degree(&self, s: usize) -> usize {
        self.incidence[s].len()
    }
    /// `(neighbour, edge index)` pairs; a double bond appears twice.
    pub fn incident(&self, s: usize) -> &[(usize, usize)] {
        &self.incidence[s]
    }
    pub fn neighbors(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        self.incidence[s].iter().map(|&(t, _)| t)
    }
    pub fn wraps(&self, direction: Direction) -> bool {
        match direction {
            Direction::Horizontal => self.wraps_h,
            Direction::Vertical => self.wraps_v,
        }
    }
    pub fn is_bipartite(&self) -> bool {
        self.bipartite
    }

    /// Writes `# kind L boundary N E` followed by one `u v` line per edge.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# {} {} {} {} {}", self.kind, self.size, self.boundary, self.num_sites(), self.num_edges())?;
        for e in &self.edges {
            writeln!(out, "{} {}", e.a, e.b)?;
        }
        Ok(())
    }
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LatticeKind::Honeycomb => "honeycomb",
            LatticeKind::Chain => "chain1d",
        })
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Periodic => "periodic",
            Boundary::Open => "open",
        })
    }
}

impl std::str::FromStr for LatticeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "honeycomb" => Ok(LatticeKind::Honeycomb),
            "chain" | "chain1d" => Ok(LatticeKind::Chain),
            other => Err(Error::Param(format!("unknown lattice kind '{other}'"))),
        }
    }
}

impl std::str::FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Boundary::Periodic),
            "open" => Ok(Boundary::Open),
            other => Err(Error::Param(format!("unknown boundary '{other}'"))),
        }
    }
}

fn two_color(n: usize, incidence: &[Vec<(usize, usize)>]) -> (Vec<Sublattice>, bool) {
    let mut color: Vec<Option<bool>> = vec![None; n];
    let mut ok = true;
    let mut stack = Vec::new();
    for start in 0..n {
        if color[start].is_some() {
            continue;
        }
        color[start] = Some(true);
        stack.push(start);
        while let Some(u) = stack.pop() {
            let cu = color[u].unwrap();
            for &(v, _) in &incidence[u] {
                match color[v] {
                    None => {
                        color[v] = Some(!cu);
                        stack.push(v);
                    }
                    Some(cv) if cv == cu => ok = false,
                    _ => {}
                }
            }
        }
    }
    let labels = color
        .into_iter()
        .map(|c| if c.unwrap_or(true) { Sublattice::A } else { Sublattice::B })
        .collect();
    (labels, ok)
}

/// Axis-aligned rectangle in embedding coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Region {
    pub row: usize,
    pub col: usize,
    pub width: usize,
    pub height: usize,
    rows: usize,
    cols: usize,
}

impl Region {
    /// Local `(row, col)` offset of a coordinate inside the rectangle.
    pub fn local(&self, (r, c): (usize, usize)) -> Option<(usize, usize)> {
        let dr = (r + self.rows - self.row % self.rows) % self.rows;
        let dc = (c + self.cols - self.col % self.cols) % self.cols;
        (dr < self.height && dc < self.width).then_some((dr, dc))
    }

    pub fn contains(&self, coord: (usize, usize)) -> bool {
        self.local(coord).is_some()
    }

    /// Whether the coordinate lies on the entry side for `direction`.
    pub fn on_entry(&self, coord: (usize, usize), direction: Direction) -> bool {
        match (self.local(coord), direction) {
            (Some((_, dc)), Direction::Horizontal) => dc == 0,
            (Some((dr, _)), Direction::Vertical) => dr == 0,
            _ => false,
        }
    }

    /// Whether the coordinate lies on the exit side for `direction`.
    pub fn on_exit(&self, coord: (usize, usize), direction: Direction) -> bool {
        match (self.local(coord), direction) {
            (Some((_, dc)), Direction::Horizontal) => dc + 1 == self.width,
            (Some((dr, _)), Direction::Vertical) => dr + 1 == self.height,
            _ => false,
        }
    }
}

/// Sites of a rectangle plus its four boundary lines.
#[derive(Clone, Debug)]
pub struct RectSites {
    pub region: Region,
    pub sites: Vec<usize>,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub top: Vec<usize>,
    pub bottom: Vec<usize>,
}

impl Lattice {
    /// Validated rectangle with top-left corner `origin = (row, col)`.
    pub fn region(&self, origin: (usize, usize), width: usize, height: usize) -> Result<Region> {
        if width == 0 || height == 0 {
            return Err(Error::Region(format!("empty rectangle {width}x{height}")));
        }
        if width > self.cols || height > self.rows {
            return Err(Error::Region(format!(
                "rectangle {width}x{height} larger than lattice {}x{}",
                self.cols, self.rows
            )));
        }
        let (r0, c0) = origin;
        let fits_h = self.wraps_h || c0 + width <= self.cols;
        let fits_v = self.wraps_v || r0 + height <= self.rows;
        if r0 >= self.rows || c0 >= self.cols || !fits_h || !fits_v {
            return Err(Error::Region(format!(
                "rectangle at ({r0}, {c0}) of size {width}x{height} leaves the lattice"
            )));
        }
        Ok(Region { row: r0, col: c0, width, height, rows: self.rows, cols: self.cols })
    }

    pub fn full_region(&self) -> Region {
        Region { row: 0, col: 0, width: self.cols, height: self.rows, rows: self.rows, cols: self.cols }
    }

    pub fn rectangle_sites(&self, origin: (usize, usize), width: usize, height: usize) -> Result<RectSites> {
        let region = self.region(origin, width, height)?;
        let mut rect = RectSites {
            region,
            sites: Vec::new(),
            left: Vec::new(),
            right: Vec::new(),
            top: Vec::new(),
            bottom: Vec::new(),
        };
        for (s, &coord) in self.coords.iter().enumerate() {
            if let Some((dr, dc)) = region.local(coord) {
                rect.sites.push(s);
                if dc == 0 {
                    rect.left.push(s);
                }
                if dc + 1 == width {
                    rect.right.push(s);
                }
                if dr == 0 {
                    rect.top.push(s);
                }
                if dr + 1 == height {
                    rect.bottom.push(s);
                }
            }
        }
        if rect.sites.is_empty() {
            return Err(Error::Region("rectangle contains no sites".into()));
        }
        Ok(rect)
    }
}
