//! Inter-cycle coupling graphs and their constraint systems.
//!
//! An event joining particles in cycles `l' < l` is an edge `(l', l)`; its
//! vector enters cycle `l'`'s constraint with `+` and cycle `l`'s with `-`.
//! The constraints are solvable with every edge vector nonzero exactly when
//! each connected component is bridgeless.

use std::collections::{BTreeMap, VecDeque};

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use crate::cycles::CycleStructure;
use crate::error::{Error, Result};

/// Interaction orders `alpha_{jk}` for particle pairs `j < k` (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct AlphaConfig {
    particles: usize,
    alpha: BTreeMap<(usize, usize), u32>,
}

impl AlphaConfig {
    pub fn new(particles: usize) -> Self {
        Self {
            particles,
            alpha: BTreeMap::new(),
        }
    }

    pub fn from_pairs(particles: usize, pairs: &[((usize, usize), u32)]) -> Result<Self> {
        let mut cfg = Self::new(particles);
        for &((j, k), a) in pairs {
            cfg.set(j, k, a)?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, j: usize, k: usize, order: u32) -> Result<()> {
        if !(j < k && k < self.particles) {
            return Err(Error::Domain(format!(
                "pair ({j}, {k}) must satisfy j < k < {}",
                self.particles
            )));
        }
        if order == 0 {
            self.alpha.remove(&(j, k));
        } else {
            self.alpha.insert((j, k), order);
        }
        Ok(())
    }

    pub fn get(&self, j: usize, k: usize) -> u32 {
        self.alpha.get(&(j, k)).copied().unwrap_or(0)
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    /// Total order `A = sum alpha_{jk}`.
    pub fn total_order(&self) -> u32 {
        self.alpha.values().sum()
    }

    /// Nonzero entries in lexicographic pair order.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), u32)> + '_ {
        self.alpha.iter().map(|(&p, &a)| (p, a))
    }
}

/// Event label `(j, k, r)` carried by an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EventLabel {
    pub j: usize,
    pub k: usize,
    pub r: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GraphEdge {
    pub lo: usize,
    pub hi: usize,
    pub label: Option<EventLabel>,
}

/// Multigraph on cycles `0..p` with edges `lo < hi`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CouplingGraph {
    vertices: usize,
    edges: Vec<GraphEdge>,
}

impl CouplingGraph {
    pub fn new(vertices: usize) -> Self {
        Self {
            vertices,
            edges: Vec::new(),
        }
    }

    pub fn from_edges(vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new(vertices);
        for &(a, b) in edges {
            g.add_edge(a, b, None)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, a: usize, b: usize, label: Option<EventLabel>) -> Result<()> {
        if a == b {
            return Err(Error::Domain(format!("self-loop at vertex {a}")));
        }
        if a.max(b) >= self.vertices {
            return Err(Error::Domain(format!(
                "edge ({a}, {b}) outside {} vertices",
                self.vertices
            )));
        }
        self.edges.push(GraphEdge {
            lo: a.min(b),
            hi: a.max(b),
            label,
        });
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    /// Signed `V x E` incidence matrix: `+1` at `lo`, `-1` at `hi`.
    pub fn incidence(&self) -> Vec<Vec<i64>> {
        let mut m = vec![vec![0i64; self.edges.len()]; self.vertices];
        for (e, edge) in self.edges.iter().enumerate() {
            m[edge.lo][e] += 1;
            m[edge.hi][e] -= 1;
        }
        m
    }

    /// Component index of every vertex, numbered in order of first vertex.
    pub fn components(&self) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.vertices).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in &self.edges {
            let a = find(&mut parent, e.lo);
            let b = find(&mut parent, e.hi);
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut label = vec![usize::MAX; self.vertices];
        let mut out = vec![0; self.vertices];
        let mut next = 0;
        for v in 0..self.vertices {
            let r = find(&mut parent, v);
            if label[r] == usize::MAX {
                label[r] = next;
                next += 1;
            }
            out[v] = label[r];
        }
        out
    }

    /// Parses an edge list of lines `a b` with 1-based vertices; the vertex
    /// count is the largest index seen.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected two vertex indices, found {}", fields.len()),
                });
            }
            let mut ends = [0usize; 2];
            for (slot, f) in ends.iter_mut().zip(&fields) {
                let v: usize = f.parse().map_err(|_| Error::Parse {
                    line: idx + 1,
                    message: format!("bad vertex index `{f}`"),
                })?;
                if v == 0 {
                    return Err(Error::Parse {
                        line: idx + 1,
                        message: "vertices are numbered from 1".into(),
                    });
                }
                *slot = v - 1;
            }
            if ends[0] == ends[1] {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("self-loop at vertex {}", ends[0] + 1),
                });
            }
            pairs.push((ends[0], ends[1]));
        }
        let vertices = pairs.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
        Self::from_edges(vertices, &pairs)
    }
}

/// One edge per inter-cycle event `(j, k, r)`, in lexicographic event order.
pub fn build_coupling_graph(alpha: &AlphaConfig, cycles: &CycleStructure) -> Result<CouplingGraph> {
    if alpha.particles() != cycles.particles() {
        return Err(Error::Domain(format!(
            "configuration has {} particles, cycle structure {}",
            alpha.particles(),
            cycles.particles()
        )));
    }
    let mut g = CouplingGraph::new(cycles.cycle_count());
    for ((j, k), a) in alpha.iter() {
        let (cj, ck) = (cycles.cycle_of(j), cycles.cycle_of(k));
        if cj == ck {
            continue;
        }
        for r in 0..a as usize {
            g.add_edge(cj, ck, Some(EventLabel { j, k, r }))?;
        }
    }
    Ok(g)
}

/// Edges whose removal disconnects their component.
pub fn bridges(g: &CouplingGraph) -> Vec<usize> {
    let n = g.vertex_count();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (e, edge) in g.edges().iter().enumerate() {
        adj[edge.lo].push((edge.hi, e));
        adj[edge.hi].push((edge.lo, e));
    }
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut timer = 0;
    let mut out = Vec::new();

    // iterative DFS; each frame is (vertex, edge used to enter, next adjacency index)
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        let mut stack: Vec<(usize, Option<usize>, usize)> = vec![(root, None, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(&mut (v, via, ref mut next)) = stack.last_mut() {
            if *next < adj[v].len() {
                let (w, e) = adj[v][*next];
                *next += 1;
                if Some(e) == via {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    stack.push((w, Some(e), 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(parent, _, _)) = stack.last() {
                    low[parent] = low[parent].min(low[v]);
                    if low[v] > disc[parent] {
                        out.push(via.expect("non-root frame has an entry edge"));
                    }
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// True iff every component with at least one edge is bridgeless.
pub fn is_valid_merger(g: &CouplingGraph) -> bool {
    bridges(g).is_empty()
}

/// `(K, m)`: number of independent constraints and number of components.
pub fn constraint_rank(g: &CouplingGraph) -> (usize, usize) {
    let m = g.components().iter().copied().max().map_or(0, |c| c + 1);
    let k = g.vertex_count() - m;
    debug_assert_eq!(integer_rank(&g.incidence()), k);
    (k, m)
}

/// Exact rank of an integer matrix by fraction-free elimination.
pub fn integer_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let n_rows = m.len();
    let n_cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    let mut prev = BigInt::from(1);
    for col in 0..n_cols {
        let Some(pivot) = (rank..n_rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot);
        for r in rank + 1..n_rows {
            for c in col + 1..n_cols {
                let v = (&m[rank][col] * &m[r][c] - &m[r][col] * &m[rank][c]) / &prev;
                m[r][c] = v;
            }
            m[r][col] = BigInt::zero();
        }
        prev = m[rank][col].clone();
        rank += 1;
        if rank == n_rows {
            break;
        }
    }
    rank
}

/// Integer basis of the incidence kernel from the fundamental cycles of a
/// breadth-first spanning forest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NullspaceBasis {
    /// One length-`E` vector per non-tree edge, entries in `{-1, 0, 1}`.
    pub vectors: Vec<Vec<i64>>,
    /// The non-tree edge owning each basis vector; the vector is `1` there
    /// and `0` on every other non-tree edge.
    pub free_edges: Vec<usize>,
}

impl NullspaceBasis {
    pub fn dimension(&self) -> usize {
        self.vectors.len()
    }
}

pub fn nullspace_basis(g: &CouplingGraph) -> NullspaceBasis {
    let n = g.vertex_count();
    let edges = g.edges();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (e, edge) in edges.iter().enumerate() {
        adj[edge.lo].push((edge.hi, e));
        adj[edge.hi].push((edge.lo, e));
    }
    let mut parent_edge: Vec<Option<usize>> = vec![None; n];
    let mut depth = vec![usize::MAX; n];
    let mut in_tree = vec![false; edges.len()];
    for root in 0..n {
        if depth[root] != usize::MAX {
            continue;
        }
        depth[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &(w, e) in &adj[v] {
                if depth[w] == usize::MAX {
                    depth[w] = depth[v] + 1;
                    parent_edge[w] = Some(e);
                    in_tree[e] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    let other = |e: usize, v: usize| {
        let edge = &edges[e];
        if edge.lo == v {
            edge.hi
        } else {
            edge.lo
        }
    };
    // +1 when an edge is walked from lo to hi, -1 otherwise
    let step = |e: usize, from: usize| if edges[e].lo == from { 1 } else { -1 };

    let mut vectors = Vec::new();
    let mut free_edges = Vec::new();
    for (e, edge) in edges.iter().enumerate() {
        if in_tree[e] {
            continue;
        }
        let mut vec = vec![0i64; edges.len()];
        vec[e] = 1;
        // walk hi -> ... -> lo through the tree to close the cycle
        let (mut a, mut b) = (edge.hi, edge.lo);
        let mut tail_from_b = Vec::new();
        while a != b {
            if depth[a] >= depth[b] {
                let pe = parent_edge[a].expect("non-root vertex has a parent edge");
                vec[pe] += step(pe, a);
                a = other(pe, a);
            } else {
                let pe = parent_edge[b].expect("non-root vertex has a parent edge");
                tail_from_b.push((pe, other(pe, b)));
                b = other(pe, b);
            }
        }
        // edges on b's side are walked from the meeting point back down to lo
        for (pe, from) in tail_from_b {
            vec[pe] += step(pe, from);
        }
        vectors.push(vec);
        free_edges.push(e);
    }
    NullspaceBasis {
        vectors,
        free_edges,
    }
}

/// An assignment of nonzero vectors in `Z^dim` to all edges satisfying every
/// vertex constraint, or `None` when the graph admits none.
pub fn nonzero_integer_solution(g: &CouplingGraph, dim: usize) -> Option<Vec<Vec<i64>>> {
    if dim == 0 || !is_valid_merger(g) {
        return None;
    }
    let basis = nullspace_basis(g);
    let scalars = power_combination(&basis, g.edge_count())
        .unwrap_or_else(|| greedy_combination(&basis, g.edge_count()));
    debug_assert!(scalars.iter().all(|&x| x != 0));
    Some(
        scalars
            .into_iter()
            .map(|x| {
                let mut v = vec![0; dim];
                v[0] = x;
                v
            })
            .collect(),
    )
}

/// `sum_i B^i b_i` with `B = E + 1`; `None` on overflow or cancellation.
fn power_combination(basis: &NullspaceBasis, edges: usize) -> Option<Vec<i64>> {
    let base = edges as i64 + 1;
    let mut coeff: i64 = 1;
    let mut out = vec![0i64; edges];
    for (i, b) in basis.vectors.iter().enumerate() {
        if i > 0 {
            coeff = coeff.checked_mul(base)?;
        }
        for (slot, &x) in out.iter_mut().zip(b) {
            *slot = slot.checked_add(coeff.checked_mul(x)?)?;
        }
    }
    out.iter().all(|&x| x != 0).then_some(out)
}

/// Chooses coefficients one at a time from `1..=E+1`, avoiding the at most
/// one value per edge that would zero an edge no later vector touches.
fn greedy_combination(basis: &NullspaceBasis, edges: usize) -> Vec<i64> {
    let mut last_touch = vec![usize::MAX; edges];
    for (i, b) in basis.vectors.iter().enumerate() {
        for (e, &x) in b.iter().enumerate() {
            if x != 0 {
                last_touch[e] = i;
            }
        }
    }
    let mut out = vec![0i64; edges];
    for (i, b) in basis.vectors.iter().enumerate() {
        let c = (1..=edges as i64 + 1)
            .find(|&c| {
                (0..edges).all(|e| last_touch[e] != i || out[e] + c * b[e] != 0)
            })
            .expect("each settled edge excludes at most one coefficient");
        for (slot, &x) in out.iter_mut().zip(b) {
            *slot += c * x;
        }
    }
    out
}

/// `incidence * x` for a scalar edge assignment.
pub fn apply_incidence(g: &CouplingGraph, x: &[i64]) -> Vec<i64> {
    let mut out = vec![0i64; g.vertex_count()];
    for (edge, &v) in g.edges().iter().zip(x) {
        out[edge.lo] += v;
        out[edge.hi] -= v;
    }
    out
}
