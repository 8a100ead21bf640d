//! Two-pole directed graphs, the slash composition and the recursive
//! families built from it.
//!
//! Vertices and edges of a composed graph carry path-like identifiers: the
//! edge of `h ⊘ g` coming from edge `a` of `h` and edge `b` of `g` is named
//! `a/b`, and an internal vertex `w` of the copy of `g` replacing `a` is
//! named `a/w`. The single-edge graph uses the empty edge id, which makes it
//! a two-sided unit for composition at the level of identifiers.

use std::collections::{HashMap, HashSet, VecDeque};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{serde_q, Q};

pub const DEFAULT_EDGE_CAP: usize = 1_000_000;

/// Edge cap for generated graphs, overridable through `FREELIP_CAP_EDGES`.
pub fn edge_cap() -> usize {
    std::env::var("FREELIP_CAP_EDGES").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_EDGE_CAP)
}

fn one() -> Q {
    Q::one()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub id: String,
    pub tail: String,
    pub head: String,
    #[serde(with = "serde_q", default = "one")]
    pub weight: Q,
}

#[derive(Debug, Clone)]
pub struct TwoPoleGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    top: String,
    bottom: String,
    vindex: HashMap<String, usize>,
    eindex: HashMap<String, usize>,
    ends: Vec<(usize, usize)>,
}

impl PartialEq for TwoPoleGraph {
    fn eq(&self, o: &Self) -> bool {
        self.canonical_form() == o.canonical_form()
    }
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schema: Option<String>,
    vertices: Vec<String>,
    edges: Vec<Edge>,
    top: String,
    bottom: String,
}

/// Sorted vertex list, sorted `(id, tail, head, weight)` list and the poles.
pub type CanonicalForm = (Vec<String>, Vec<(String, String, String, Q)>, String, String);

pub(crate) fn join(a: &str, b: &str) -> String {
    match (a.is_empty(), b.is_empty()) {
        (true, _) => b.to_string(),
        (_, true) => a.to_string(),
        _ => format!("{a}/{b}"),
    }
}

impl TwoPoleGraph {
    pub fn new(vertices: Vec<String>, edges: Vec<Edge>, bottom: &str, top: &str) -> Result<Self> {
        let mut vindex = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            if vindex.insert(v.clone(), i).is_some() {
                return Err(Error::Invalid(format!("duplicate vertex `{v}`")));
            }
        }
        let lookup = |v: &str| vindex.get(v).copied().ok_or_else(|| Error::UnknownPoint(v.to_string()));
        let b = lookup(bottom)?;
        let t = lookup(top)?;
        if b == t {
            return Err(Error::Invalid("top and bottom coincide".into()));
        }
        let mut eindex = HashMap::with_capacity(edges.len());
        let mut ends = Vec::with_capacity(edges.len());
        for (k, e) in edges.iter().enumerate() {
            let u = lookup(&e.tail)?;
            let v = lookup(&e.head)?;
            if u == v {
                return Err(Error::Invalid(format!("self-loop at `{}`", e.tail)));
            }
            if e.weight < Q::zero() {
                return Err(Error::Invalid(format!("negative weight on edge `{}`", e.id)));
            }
            if eindex.insert(e.id.clone(), k).is_some() {
                return Err(Error::Invalid(format!("duplicate edge id `{}`", e.id)));
            }
            ends.push((u, v));
        }
        let g = TwoPoleGraph { vertices, edges, top: top.into(), bottom: bottom.into(), vindex, eindex, ends };
        if !g.is_connected() {
            return Err(Error::DisconnectedGraph);
        }
        Ok(g)
    }

    /// `B₀`: one edge from bottom to top.
    pub fn single_edge() -> Self {
        Self::from_spec(&["bottom", "top"], &[("", "bottom", "top")])
    }

    /// Builds a unit-weight graph from literal tables whose first two vertices
    /// are the bottom and the top.
    fn from_spec(vertices: &[&str], edges: &[(&str, &str, &str)]) -> Self {
        let vs = vertices.iter().map(|s| s.to_string()).collect();
        let es = edges
            .iter()
            .map(|(id, t, h)| Edge { id: id.to_string(), tail: t.to_string(), head: h.to_string(), weight: Q::one() })
            .collect();
        Self::new(vs, es, vertices[0], vertices[1]).expect("literal graph is valid")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: GraphJson = serde_json::from_str(s)?;
        Self::new(raw.vertices, raw.edges, &raw.bottom, &raw.top)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(GraphJson {
            schema: Some(crate::SCHEMA.into()),
            vertices: self.vertices.clone(),
            edges: self.edges.clone(),
            top: self.top.clone(),
            bottom: self.bottom.clone(),
        })
        .expect("serializable")
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn top(&self) -> &str {
        &self.top
    }

    pub fn bottom(&self) -> &str {
        &self.bottom
    }

    pub fn top_index(&self) -> usize {
        self.vindex[&self.top]
    }

    pub fn bottom_index(&self) -> usize {
        self.vindex[&self.bottom]
    }

    pub fn vertex_index(&self, v: &str) -> Result<usize> {
        self.vindex.get(v).copied().ok_or_else(|| Error::UnknownPoint(v.to_string()))
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.eindex.get(id).copied()
    }

    /// `(tail, head)` vertex indices of edge `e`.
    pub fn ends(&self, e: usize) -> (usize, usize) {
        self.ends[e]
    }

    /// Per vertex: `(neighbour, edge index)` pairs, directions ignored.
    pub fn undirected_adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for (k, &(u, v)) in self.ends.iter().enumerate() {
            adj[u].push((v, k));
            adj[v].push((u, k));
        }
        adj
    }

    pub fn is_unit_weight(&self) -> bool {
        self.edges.iter().all(|e| e.weight.is_one())
    }

    fn is_connected(&self) -> bool {
        self.hop_distances(0).iter().all(Option::is_some)
    }

    /// Hop counts from `s`, directions ignored.
    pub fn hop_distances(&self, s: usize) -> Vec<Option<usize>> {
        let adj = self.undirected_adjacency();
        let mut d = vec![None; self.vertices.len()];
        d[s] = Some(0);
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            let dx = d[x].unwrap();
            for &(y, _) in &adj[x] {
                if d[y].is_none() {
                    d[y] = Some(dx + 1);
                    queue.push_back(y);
                }
            }
        }
        d
    }

    /// Hop distance between the poles.
    pub fn pole_distance(&self) -> usize {
        self.hop_distances(self.bottom_index())[self.top_index()].expect("connected")
    }

    pub fn canonical_form(&self) -> CanonicalForm {
        let mut vs = self.vertices.clone();
        vs.sort();
        let mut es: Vec<_> =
            self.edges.iter().map(|e| (e.id.clone(), e.tail.clone(), e.head.clone(), e.weight.clone())).collect();
        es.sort();
        (vs, es, self.bottom.clone(), self.top.clone())
    }

    /// Edges not lying on any bottom-top geodesic, or an error if the pole
    /// distance is odd.
    pub fn edges_off_even_geodesics(&self) -> Result<Vec<usize>> {
        let db = self.hop_distances(self.bottom_index());
        let dt = self.hop_distances(self.top_index());
        let dist = db[self.top_index()].unwrap();
        if dist % 2 == 1 {
            return Err(Error::OddGeodesic(dist));
        }
        Ok((0..self.edge_count())
            .filter(|&k| {
                let (u, v) = self.ends[k];
                let (bu, bv, tu, tv) = (db[u].unwrap(), db[v].unwrap(), dt[u].unwrap(), dt[v].unwrap());
                bu + 1 + tv != dist && bv + 1 + tu != dist
            })
            .collect())
    }

    /// Whether every edge points to the endpoint closer to the top.
    pub fn oriented_toward_top(&self) -> bool {
        let dt = self.hop_distances(self.top_index());
        self.ends.iter().all(|&(u, v)| dt[v].unwrap() < dt[u].unwrap())
    }

    /// Maps a vertex permutation to the induced edge permutation, if it is
    /// an automorphism of the underlying undirected graph.
    pub fn induced_edge_map(&self, vperm: &[usize]) -> Option<Vec<usize>> {
        let mut by_ends: HashMap<(usize, usize), usize> = HashMap::with_capacity(self.edge_count());
        for (k, &(u, v)) in self.ends.iter().enumerate() {
            by_ends.insert((u.min(v), u.max(v)), k);
        }
        self.ends
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (vperm[u], vperm[v]);
                by_ends.get(&(a.min(b), a.max(b))).copied()
            })
            .collect()
    }
}

/// `h ⊘ g`: every edge `u → v` of `h` is replaced by a copy of `g` whose
/// bottom is glued to `u` and whose top is glued to `v`.
pub fn compose(h: &TwoPoleGraph, g: &TwoPoleGraph) -> Result<TwoPoleGraph> {
    let ne = h.edge_count().checked_mul(g.edge_count()).unwrap_or(usize::MAX);
    let cap = edge_cap();
    if ne > cap {
        return Err(Error::ResourceLimit(format!("{ne} edges exceeds the cap of {cap}")));
    }
    let internal: Vec<&String> = g.vertices.iter().filter(|w| **w != g.top && **w != g.bottom).collect();
    let mut vertices = h.vertices.clone();
    vertices.reserve(h.edge_count() * internal.len());
    let mut edges = Vec::with_capacity(ne);
    for he in &h.edges {
        for w in &internal {
            vertices.push(join(&he.id, w));
        }
        let place = |w: &str| -> String {
            if w == g.bottom {
                he.tail.clone()
            } else if w == g.top {
                he.head.clone()
            } else {
                join(&he.id, w)
            }
        };
        for ge in &g.edges {
            edges.push(Edge { id: join(&he.id, &ge.id), tail: place(&ge.tail), head: place(&ge.head), weight: ge.weight.clone() });
        }
    }
    TwoPoleGraph::new(vertices, edges, &h.bottom, &h.top)
}

/// `B_n = B_{n-1} ⊘ b` with `B_0` the single edge.
pub fn recursive_family(b: &TwoPoleGraph, n: usize) -> Result<TwoPoleGraph> {
    let mut g = TwoPoleGraph::single_edge();
    for _ in 0..n {
        g = compose(&g, b)?;
    }
    Ok(g)
}

/// The square: two paths of length two. Edge order follows the left-hand
/// path top-down, then the right-hand path bottom-up.
pub fn square() -> TwoPoleGraph {
    TwoPoleGraph::from_spec(
        &["bottom", "top", "l", "r"],
        &[("tl", "l", "top"), ("bl", "bottom", "l"), ("br", "bottom", "r"), ("tr", "r", "top")],
    )
}

/// `k` independent paths of length two between the poles.
pub fn k2n_base(k: usize) -> TwoPoleGraph {
    let mut vertices = vec!["bottom".to_string(), "top".to_string()];
    let mut edges = Vec::with_capacity(2 * k);
    for j in 1..=k {
        let m = format!("m{j}");
        vertices.push(m.clone());
        edges.push(Edge { id: format!("p{j}b"), tail: "bottom".into(), head: m.clone(), weight: Q::one() });
        edges.push(Edge { id: format!("p{j}t"), tail: m, head: "top".into(), weight: Q::one() });
    }
    TwoPoleGraph::new(vertices, edges, "bottom", "top").expect("valid base")
}

/// Six edges: a stem at each pole and a square in the middle.
pub fn laakso_base() -> TwoPoleGraph {
    TwoPoleGraph::from_spec(
        &["bottom", "top", "m0", "l", "r", "m1"],
        &[
            ("sb", "bottom", "m0"),
            ("lb", "m0", "l"),
            ("lt", "l", "m1"),
            ("rb", "m0", "r"),
            ("rt", "r", "m1"),
            ("st", "m1", "top"),
        ],
    )
}

pub fn diamond(n: usize) -> Result<TwoPoleGraph> {
    recursive_family(&square(), n)
}

pub fn multidiamond(n: usize, k: usize) -> Result<TwoPoleGraph> {
    if k < 2 {
        return Err(Error::Invalid(format!("branching {k} < 2")));
    }
    recursive_family(&k2n_base(k), n)
}

pub fn laakso(n: usize) -> Result<TwoPoleGraph> {
    recursive_family(&laakso_base(), n)
}

/// Star with `n` leaves; the centre is the bottom, the first leaf the top.
pub fn star(n: usize) -> Result<TwoPoleGraph> {
    if n == 0 {
        return Err(Error::Invalid("star needs at least one leaf".into()));
    }
    let mut vertices = vec!["c".to_string()];
    let mut edges = Vec::with_capacity(n);
    for i in 1..=n {
        vertices.push(format!("l{i}"));
        edges.push(Edge { id: format!("s{i}"), tail: "c".into(), head: format!("l{i}"), weight: Q::one() });
    }
    TwoPoleGraph::new(vertices, edges, "c", "l1")
}

/// Path `v0 → v1 → … → vn`.
pub fn path(n: usize) -> Result<TwoPoleGraph> {
    if n == 0 {
        return Err(Error::Invalid("path needs at least one edge".into()));
    }
    let vertices = (0..=n).map(|i| format!("v{i}")).collect();
    let edges = (1..=n)
        .map(|i| Edge { id: format!("e{i}"), tail: format!("v{}", i - 1), head: format!("v{i}"), weight: Q::one() })
        .collect();
    TwoPoleGraph::new(vertices, edges, "v0", &format!("v{n}"))
}

#[derive(Debug, Clone)]
pub enum FamilyKind {
    Diamond,
    Multidiamond(usize),
    Laakso,
    CustomBase(TwoPoleGraph),
}

#[derive(Debug, Clone)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub level: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FamilyCounts {
    pub edges: u128,
    pub vertices: u128,
    pub cycle_dim: u128,
}

impl FamilySpec {
    pub fn base(&self) -> Result<TwoPoleGraph> {
        Ok(match &self.kind {
            FamilyKind::Diamond => square(),
            FamilyKind::Multidiamond(k) if *k >= 2 => k2n_base(*k),
            FamilyKind::Multidiamond(k) => return Err(Error::Invalid(format!("branching {k} < 2"))),
            FamilyKind::Laakso => laakso_base(),
            FamilyKind::CustomBase(b) => b.clone(),
        })
    }

    pub fn build(&self) -> Result<TwoPoleGraph> {
        recursive_family(&self.base()?, self.level)
    }
}

/// Closed-form sizes: `|E(B_n)| = |E(B)|^n` and
/// `|V(B_n)| = |V(B_{n-1})| + (|V(B)| - 2)·|E(B_{n-1})|`.
pub fn family_counts(spec: &FamilySpec) -> Result<FamilyCounts> {
    let b = spec.base()?;
    let eb = b.edge_count() as u128;
    let inner = b.vertex_count() as u128 - 2;
    let overflow = || Error::ResourceLimit("family size overflows 128 bits".into());
    let (mut e, mut v) = (1u128, 2u128);
    for _ in 0..spec.level {
        v = inner.checked_mul(e).and_then(|x| x.checked_add(v)).ok_or_else(overflow)?;
        e = e.checked_mul(eb).ok_or_else(overflow)?;
    }
    Ok(FamilyCounts { edges: e, vertices: v, cycle_dim: e + 1 - v })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoleConstraint {
    SwapPoles,
    FixPoles,
}

pub const DEFAULT_AUTOMORPHISM_VERTEX_CAP: usize = 40;

/// All automorphisms of the underlying undirected graph that fix or swap the
/// poles, as vertex permutations (`perm[v]` is the image of `v`).
pub fn automorphism_search(g: &TwoPoleGraph, c: PoleConstraint, vertex_cap: usize) -> Result<Vec<Vec<usize>>> {
    let n = g.vertex_count();
    if n > vertex_cap {
        return Err(Error::ResourceLimit(format!("{n} vertices exceeds the automorphism search cap {vertex_cap}")));
    }
    let adj = g.undirected_adjacency();
    let nbrs: Vec<HashSet<usize>> = adj.iter().map(|a| a.iter().map(|&(y, _)| y).collect()).collect();
    let (b, t) = (g.bottom_index(), g.top_index());
    // BFS order from the bottom keeps the partial map connected.
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([b]);
    seen[b] = true;
    while let Some(x) = queue.pop_front() {
        order.push(x);
        let mut next: Vec<usize> = nbrs[x].iter().copied().filter(|&y| !seen[y]).collect();
        next.sort();
        for y in next {
            seen[y] = true;
            queue.push_back(y);
        }
    }
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let (pb, pt) = match c {
        PoleConstraint::FixPoles => (b, t),
        PoleConstraint::SwapPoles => (t, b),
    };
    let mut out = Vec::new();
    fn extend(
        k: usize,
        order: &[usize],
        nbrs: &[HashSet<usize>],
        fixed: &[(usize, usize)],
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if k == order.len() {
            out.push(perm.clone());
            return;
        }
        let x = order[k];
        let candidates: Vec<usize> = match fixed.iter().find(|(v, _)| *v == x) {
            Some(&(_, img)) => vec![img],
            None => (0..perm.len()).filter(|&y| !fixed.iter().any(|&(_, img)| img == y)).collect(),
        };
        for y in candidates {
            if used[y] || nbrs[x].len() != nbrs[y].len() {
                continue;
            }
            let consistent = order[..k].iter().all(|&z| nbrs[x].contains(&z) == nbrs[y].contains(&perm[z]));
            if !consistent {
                continue;
            }
            perm[x] = y;
            used[y] = true;
            extend(k + 1, order, nbrs, fixed, perm, used, out);
            used[y] = false;
            perm[x] = usize::MAX;
        }
    }
    extend(0, &order, &nbrs, &[(b, pb), (t, pt)], &mut perm, &mut used, &mut out);
    Ok(out)
}
