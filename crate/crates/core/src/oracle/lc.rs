//! Local-Clifford equivalence of stabilizer states.
//!
//! Two deciders: a brute-force search over the six single-qubit Cliffords
//! (modulo Paulis) per qubit, and a reduction to graph form followed by a
//! search of the local-complementation orbit.

use std::collections::{HashSet, VecDeque};

use super::tableau::{Pauli, Tableau};

/// The six invertible 2x2 binary matrices acting on `(x, z)`, row-major.
const LOCAL_SYMPLECTIC: [[u8; 4]; 6] =
    [[1, 0, 0, 1], [0, 1, 1, 0], [1, 0, 1, 1], [1, 1, 0, 1], [0, 1, 1, 1], [1, 1, 1, 0]];

/// Row space of the unsigned generators, in canonical form.
fn unsigned_form(rows: &[Pauli], n: usize) -> Vec<u128> {
    let mut words: Vec<u128> = rows.iter().map(|p| (p.x as u128) | ((p.z as u128) << n)).collect();
    let mut basis = Vec::new();
    for col in (0..2 * n).rev() {
        let Some(i) = words.iter().position(|w| w >> col & 1 == 1) else { continue };
        let pivot = words.swap_remove(i);
        for w in words.iter_mut().chain(basis.iter_mut()) {
            if *w >> col & 1 == 1 {
                *w ^= pivot;
            }
        }
        basis.push(pivot);
    }
    basis.sort_unstable();
    basis
}

fn apply_local(rows: &[Pauli], maps: &[usize]) -> Vec<Pauli> {
    rows.iter()
        .map(|p| {
            let mut out = Pauli { x: 0, z: 0, phase: 0 };
            for (q, &m) in maps.iter().enumerate() {
                let (x, z) = ((p.x >> q & 1) as u8, (p.z >> q & 1) as u8);
                let g = LOCAL_SYMPLECTIC[m];
                out.x |= (((g[0] & x) ^ (g[1] & z)) as u64) << q;
                out.z |= (((g[2] & x) ^ (g[3] & z)) as u64) << q;
            }
            out
        })
        .collect()
}

/// Exhaustive search over `6^n` local Clifford classes; use for `n <= 5`.
pub fn lc_equivalent_exhaustive(a: &Tableau, b: &Tableau) -> bool {
    let n = a.num_qubits();
    if n != b.num_qubits() {
        return false;
    }
    let target = unsigned_form(b.rows(), n);
    let mut maps = vec![0usize; n];
    loop {
        if unsigned_form(&apply_local(a.rows(), &maps), n) == target {
            return true;
        }
        let mut q = 0;
        loop {
            if q == n {
                return false;
            }
            maps[q] += 1;
            if maps[q] < 6 {
                break;
            }
            maps[q] = 0;
            q += 1;
        }
    }
}

/// Adjacency bitmasks of a graph state LC-equivalent to `t`.
pub fn graph_form(t: &Tableau) -> Vec<u64> {
    let n = t.num_qubits();
    // Hadamards on a subset of qubits so that the X block becomes invertible.
    for mask in 0u64..1 << n {
        let rows: Vec<Pauli> = t
            .rows()
            .iter()
            .map(|p| Pauli { x: (p.x & !mask) | (p.z & mask), z: (p.z & !mask) | (p.x & mask), phase: 0 })
            .collect();
        if let Some(gamma) = solve_graph(&rows, n) {
            return gamma;
        }
    }
    unreachable!("every stabilizer state is LC-equivalent to a graph state")
}

/// With `rows = [X | Z]` and `X` invertible, returns `Γ = X⁻¹ Z` with the diagonal cleared.
fn solve_graph(rows: &[Pauli], n: usize) -> Option<Vec<u64>> {
    let mut rs: Vec<Pauli> = rows.to_vec();
    for q in 0..n {
        let i = (q..n).find(|&i| rs[i].x >> q & 1 == 1)?;
        rs.swap(q, i);
        let pivot = rs[q];
        for (j, r) in rs.iter_mut().enumerate() {
            if j != q && r.x >> q & 1 == 1 {
                r.x ^= pivot.x;
                r.z ^= pivot.z;
            }
        }
    }
    // row q is now X_q Z^{Γ_q}; the S gate clears Γ_qq
    let adj: Vec<u64> = rs.iter().enumerate().map(|(q, r)| r.z & !(1 << q)).collect();
    debug_assert!((0..n).all(|a| (0..n).all(|b| (adj[a] >> b & 1) == (adj[b] >> a & 1))));
    Some(adj)
}

pub fn local_complement(adj: &mut [u64], v: usize) {
    let nb = adj[v];
    for u in 0..adj.len() {
        if nb >> u & 1 == 1 {
            adj[u] ^= nb & !(1 << u);
        }
    }
}

/// Whether graph `b` lies in the local-complementation orbit of graph `a`.
pub fn lc_equivalent_graphs(a: &[u64], b: &[u64]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(a.to_vec());
    queue.push_back(a.to_vec());
    while let Some(g) = queue.pop_front() {
        if g == b {
            return true;
        }
        for v in 0..g.len() {
            if g[v] == 0 {
                continue;
            }
            let mut h = g.clone();
            local_complement(&mut h, v);
            if seen.insert(h.clone()) {
                queue.push_back(h);
            }
        }
    }
    false
}

/// Largest nullspace dimension searched by [`lc_equivalent_linear`].
const MAX_NULLITY: usize = 24;

/// LC equivalence of two graphs via the linear condition on the local
/// symplectic maps `Q_j = [[a_j, b_j], [c_j, d_j]]`: the stabilizer rows
/// `(A + ΓB, C + ΓD)` must span the same space as `(I, Γ')`, i.e.
/// `C + ΓD + AΓ' + ΓBΓ' = 0`, with `a_j d_j + b_j c_j = 1` for every qubit.
/// Returns `None` if the solution space is too large to search.
pub fn lc_equivalent_linear(g: &[u64], h: &[u64]) -> Option<bool> {
    let n = g.len();
    if n != h.len() {
        return Some(false);
    }
    if n == 0 {
        return Some(true);
    }
    assert!(n <= 16, "linear LC test supports at most 16 qubits");
    let bit = |m: &[u64], j: usize, k: usize| m[j] >> k & 1 == 1;
    // unknowns: a_j at j, b_j at n + j, c_j at 2n + j, d_j at 3n + j
    let mut rows: Vec<u64> = Vec::with_capacity(n * n);
    for j in 0..n {
        for k in 0..n {
            let mut r = 0u64;
            if j == k {
                r ^= 1 << (2 * n + j);
            }
            if bit(g, j, k) {
                r ^= 1 << (3 * n + k);
            }
            if bit(h, j, k) {
                r ^= 1 << j;
            }
            for m in 0..n {
                if bit(g, j, m) && bit(h, m, k) {
                    r ^= 1 << (n + m);
                }
            }
            if r != 0 {
                rows.push(r);
            }
        }
    }
    let basis = nullspace(rows, 4 * n);
    if basis.len() > MAX_NULLITY {
        return None;
    }
    let ok = |x: u64| {
        (0..n).all(|j| {
            let v = |o: usize| x >> (o * n + j) & 1;
            (v(0) & v(3)) ^ (v(1) & v(2)) == 1
        })
    };
    // Gray-code walk over the solution space
    let mut x = 0u64;
    if ok(x) {
        return Some(true);
    }
    for i in 1u64..1 << basis.len() {
        x ^= basis[i.trailing_zeros() as usize];
        if ok(x) {
            return Some(true);
        }
    }
    Some(false)
}

/// Basis of `{x : r·x = 0 for all rows r}` over GF(2), `vars` unknowns.
fn nullspace(mut rows: Vec<u64>, vars: usize) -> Vec<u64> {
    let mut pivots: Vec<(usize, u64)> = Vec::new();
    for col in 0..vars {
        let Some(i) = rows.iter().position(|r| r >> col & 1 == 1) else { continue };
        let p = rows.swap_remove(i);
        for r in rows.iter_mut() {
            if *r >> col & 1 == 1 {
                *r ^= p;
            }
        }
        for (_, q) in pivots.iter_mut() {
            if *q >> col & 1 == 1 {
                *q ^= p;
            }
        }
        pivots.push((col, p));
    }
    let pivot_cols: u64 = pivots.iter().fold(0, |m, &(c, _)| m | 1 << c);
    (0..vars)
        .filter(|&f| pivot_cols >> f & 1 == 0)
        .map(|f| {
            let mut x = 1u64 << f;
            for &(c, p) in &pivots {
                if p >> f & 1 == 1 {
                    x |= 1 << c;
                }
            }
            x
        })
        .collect()
}

/// LC equivalence: exhaustive for up to 5 qubits, otherwise the linear
/// test on graph forms, falling back to the orbit search.
pub fn lc_equivalent(a: &Tableau, b: &Tableau) -> bool {
    if a.num_qubits() != b.num_qubits() {
        return false;
    }
    if a.num_qubits() <= 5 {
        return lc_equivalent_exhaustive(a, b);
    }
    let (ga, gb) = (graph_form(a), graph_form(b));
    if a.num_qubits() <= 16 {
        if let Some(eq) = lc_equivalent_linear(&ga, &gb) {
            return eq;
        }
    }
    lc_equivalent_graphs(&ga, &gb)
}

pub fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<u64> {
    let mut adj = vec![0u64; n];
    for &(a, b) in edges {
        adj[a] |= 1 << b;
        adj[b] |= 1 << a;
    }
    adj
}
