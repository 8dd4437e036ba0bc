//! Vertices of the Bruhat-Tits building `B_d(Q_p)`: homothety classes of
//! full-rank lattices, their adjacency, and balls in the 1-skeleton.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{map_slice, Execution};
use crate::field::{FieldConfig, Scalar};
use crate::lattice::{hnf, Lattice};
use crate::matrix::MatrixK;

/// Ball size above which [`ball`] refuses to continue.
pub const MAX_BALL_VERTICES: usize = 100_000;

/// A homothety class `[L]`, stored by its representative with
/// `measure_log ∈ {0, …, d−1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticeClass {
    rep: Lattice,
}

impl LatticeClass {
    pub fn standard(field: &FieldConfig, d: usize) -> Self {
        LatticeClass {
            rep: Lattice::standard(field, d),
        }
    }

    pub fn rep(&self) -> &Lattice {
        &self.rep
    }

    pub fn dim(&self) -> usize {
        self.rep.dim()
    }

    /// Vertex identity: the canonical Hermite form, row by row.
    pub fn key(&self) -> String {
        self.rep.matrix().to_compact_string()
    }
}

impl Serialize for LatticeClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rep.matrix().serialize(s)
    }
}

/// The class of `L`, represented by `p^{-k}·L` with `k = ⌊measure_log / d⌋`.
pub fn canonicalize(lattice: &Lattice) -> Result<LatticeClass> {
    let m = lattice.measure_log()?;
    let d = lattice.dim() as i64;
    let k = m.div_euclid(d);
    let rep = if k == 0 {
        lattice.clone()
    } else {
        lattice.scale(&lattice.field().pow(-k))
    };
    Ok(LatticeClass { rep })
}

fn require_same_space(a: &Lattice, b: &Lattice) -> Result<()> {
    if a.field() != b.field() {
        return Err(Error::PrimeMismatch(a.field().p(), b.field().p()));
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// `L1 = c·L2` for some `c ∈ K^×`.
pub fn is_equivalent(a: &Lattice, b: &Lattice) -> Result<bool> {
    require_same_space(a, b)?;
    Ok(canonicalize(a)? == canonicalize(b)?)
}

/// Distinct classes with `π^{n+1} L1 ⊂ L2 ⊂ π^n L1` for some `n`.
///
/// With `M = A^{-1}B`, adjacency asks for `k = val(c)` with `p^k·M` integral
/// and `p^{1−k}·M^{-1}` integral, i.e. `−minval(M) ≤ k ≤ 1 + minval(M^{-1})`.
pub fn is_adjacent(a: &LatticeClass, b: &LatticeClass) -> Result<bool> {
    require_same_space(&a.rep, &b.rep)?;
    if a == b {
        return Ok(false);
    }
    let field = a.rep.field();
    let m = a.rep.matrix().inverse()?.mul(b.rep.matrix())?;
    let m_inv = m.inverse()?;
    let lo = -m.min_val(field).finite().expect("invertible");
    let hi = 1 + m_inv.min_val(field).finite().expect("invertible");
    Ok(lo <= hi)
}

/// Hermite forms of the lattices strictly between `π·O_K^d` and `O_K^d`.
///
/// Pivot exponents `ε ∈ {0,1}^d` not all equal; the entry below the
/// diagonal at `(i, j)` runs over the digits `0..p` when `ε_i = 1` and
/// `ε_j = 0`, and is zero otherwise.
pub fn standard_neighbor_forms(field: &FieldConfig, d: usize) -> Vec<MatrixK> {
    let p = field.p();
    let mut out = Vec::new();
    for eps in 1..(1u64 << d) - 1 {
        let bit = |i: usize| eps >> i & 1 == 1;
        let free: Vec<(usize, usize)> = (0..d)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .filter(|&(i, j)| bit(i) && !bit(j))
            .collect();
        let total = p.pow(free.len() as u32);
        for mut code in 0..total {
            let mut m = MatrixK::zeros(d, d);
            for i in 0..d {
                m[(i, i)] = if bit(i) {
                    Scalar::from(p)
                } else {
                    Scalar::one()
                };
            }
            for &(i, j) in &free {
                m[(i, j)] = Scalar::from(code % p);
                code /= p;
            }
            out.push(m);
        }
    }
    out
}

/// All classes adjacent to `c`, sorted by key.
pub fn neighbors(c: &LatticeClass) -> Result<Vec<LatticeClass>> {
    let d = c.dim();
    if d < 2 {
        return Err(Error::WrongDimension {
            expected: 2,
            found: d,
        });
    }
    let field = c.rep.field();
    let a = c.rep.matrix();
    let mut found = BTreeMap::new();
    for n in standard_neighbor_forms(field, d) {
        let class = canonicalize(&hnf(field, &a.mul(&n)?))?;
        found.insert(class.key(), class);
    }
    Ok(found.into_values().collect())
}

/// Number of nontrivial subspaces of `F_p^d`: `Σ_{l=1}^{d−1} [d choose l]_p`.
pub fn degree(d: usize, p: u64) -> u128 {
    let p = p as u128;
    (1..d).map(|l| gaussian_binomial(d, l, p)).sum()
}

fn gaussian_binomial(n: usize, k: usize, q: u128) -> u128 {
    let mut num = 1u128;
    let mut den = 1u128;
    for i in 0..k {
        num *= q.pow((n - i) as u32) - 1;
        den *= q.pow((i + 1) as u32) - 1;
    }
    num / den
}

/// 1-skeleton of the building restricted to a ball.
#[derive(Debug, Clone, Serialize)]
pub struct BallGraph {
    pub center: LatticeClass,
    pub radius: usize,
    pub vertices: Vec<LatticeClass>,
    /// Index pairs `i < j`, sorted.
    pub edges: Vec<(usize, usize)>,
    /// BFS distance of each vertex from the center.
    pub distances: Vec<usize>,
}

impl BallGraph {
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph ball {\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let rows: Vec<String> = v
                .rep()
                .matrix()
                .to_string_rows()
                .into_iter()
                .map(|r| r.join(" "))
                .collect();
            let _ = writeln!(s, "  v{i} [label=\"{}\"];", rows.join("\\n"));
        }
        for (a, b) in &self.edges {
            let _ = writeln!(s, "  v{a} -- v{b};");
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "vertices": self.vertices,
            "edges": self.edges,
        })
    }

    /// True when the graph is connected and has no cycles.
    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.vertices.len() && self.is_connected()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        if n == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

pub fn ball(center: &LatticeClass, radius: usize) -> Result<BallGraph> {
    ball_with(center, radius, Execution::default())
}

/// Breadth-first ball of the given radius; edges are all adjacent pairs
/// among the discovered vertices.
pub fn ball_with(center: &LatticeClass, radius: usize, exec: Execution) -> Result<BallGraph> {
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut vertices = vec![center.clone()];
    let mut distances = vec![0];
    index.insert(center.key(), 0);
    let mut adjacency: Vec<Vec<LatticeClass>> = Vec::new();
    let mut frontier = vec![0usize];
    for depth in 0..=radius {
        let expanded = map_slice(exec, &frontier, |&v| neighbors(&vertices[v]));
        adjacency.resize(vertices.len(), Vec::new());
        let mut next = Vec::new();
        for (&v, nbrs) in frontier.iter().zip(expanded) {
            let nbrs = nbrs?;
            if depth < radius {
                for w in &nbrs {
                    if let std::collections::btree_map::Entry::Vacant(slot) = index.entry(w.key()) {
                        slot.insert(vertices.len());
                        next.push(vertices.len());
                        vertices.push(w.clone());
                        distances.push(depth + 1);
                        if vertices.len() > MAX_BALL_VERTICES {
                            return Err(Error::TooLarge(format!(
                                "ball exceeds {MAX_BALL_VERTICES} vertices"
                            )));
                        }
                    }
                }
            }
            adjacency[v] = nbrs;
        }
        frontier = next;
    }
    let mut edges = Vec::new();
    for (v, nbrs) in adjacency.iter().enumerate() {
        for w in nbrs {
            if let Some(&u) = index.get(&w.key()) {
                if v < u {
                    edges.push((v, u));
                }
            }
        }
    }
    edges.sort_unstable();
    Ok(BallGraph {
        center: center.clone(),
        radius,
        vertices,
        edges,
        distances,
    })
}
