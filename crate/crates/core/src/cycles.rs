//! Edge space ℓ₁(E), cycle space Z(G) and the quotient ℓ₁(E)/Z(G).

use std::collections::{BTreeMap, VecDeque};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::graph::TwoPoleGraph;
use crate::linalg::rank_of;
use crate::lp::{LinearProgram, Relation};
use crate::metric::Molecule;
use crate::numeric::{fmt_q, serde_q, Scalar, Q};

/// Dense vector indexed by the edges of a graph.
pub type EdgeVector = Vec<Q>;

pub fn edge_vector_to_json(g: &TwoPoleGraph, x: &[Q]) -> serde_json::Value {
    let map: BTreeMap<&str, String> =
        g.edges().iter().zip(x).filter(|(_, c)| !c.is_zero()).map(|(e, c)| (e.id.as_str(), fmt_q(c))).collect();
    serde_json::to_value(map).expect("serializable")
}

/// Reads `{"edge-id": coeff, ...}`; unknown ids are rejected.
pub fn edge_vector_from_json(g: &TwoPoleGraph, s: &str) -> Result<EdgeVector> {
    let raw: BTreeMap<String, serde_json::Value> = serde_json::from_str(s)?;
    let mut x = vec![Q::zero(); g.edge_count()];
    for (id, v) in raw {
        if id == "schema" {
            continue;
        }
        let k = g.edge_index(&id).ok_or_else(|| Error::GraphMismatch(format!("no edge `{id}`")))?;
        x[k] = serde_q::from_value(&v)?;
    }
    Ok(x)
}

pub fn unit_edge(g: &TwoPoleGraph, e: usize) -> EdgeVector {
    let mut x = vec![Q::zero(); g.edge_count()];
    x[e] = Q::one();
    x
}

/// Signed indicator of a closed walk given as a sequence of edge indices:
/// `+1` where the walk follows the edge orientation, `-1` against it.
pub fn signed_indicator(g: &TwoPoleGraph, cycle: &[usize]) -> Result<EdgeVector> {
    let k = cycle.len();
    if k < 2 {
        return Err(Error::NotACycle("fewer than two edges".into()));
    }
    let mut seen = std::collections::HashSet::new();
    for &e in cycle {
        if e >= g.edge_count() {
            return Err(Error::NotACycle(format!("edge index {e} out of range")));
        }
        if !seen.insert(e) {
            return Err(Error::NotACycle(format!("edge `{}` repeated", g.edges()[e].id)));
        }
    }
    let (t0, h0) = g.ends(cycle[0]);
    let (t1, h1) = g.ends(cycle[1]);
    // start at the endpoint of the first edge that the second edge does not touch
    let start = if k == 2 || (h0 == t1 || h0 == h1) { t0 } else { h0 };
    let mut x = vec![Q::zero(); g.edge_count()];
    let mut cur = start;
    for &e in cycle {
        let (t, h) = g.ends(e);
        if t == cur {
            x[e] = Q::one();
            cur = h;
        } else if h == cur {
            x[e] = -Q::one();
            cur = t;
        } else {
            return Err(Error::NotACycle(format!("edge `{}` does not continue the walk", g.edges()[e].id)));
        }
    }
    if cur != start {
        return Err(Error::NotACycle("walk is not closed".into()));
    }
    Ok(x)
}

/// Whether the cyclic walk consists of one run of forward edges and one run
/// of backward edges.
pub fn is_up_down(g: &TwoPoleGraph, cycle: &[usize]) -> Result<bool> {
    let x = signed_indicator(g, cycle)?;
    let signs: Vec<bool> = cycle.iter().map(|&e| x[e].is_positive()).collect();
    let changes = (0..signs.len()).filter(|&i| signs[i] != signs[(i + 1) % signs.len()]).count();
    Ok(changes == 2)
}

/// Net inflow minus outflow at each vertex, as a molecule on the vertices.
pub fn boundary(g: &TwoPoleGraph, x: &[Q]) -> Molecule {
    Molecule::from_dense(&boundary_dense(g, x)).expect("boundaries have zero total mass")
}

pub fn boundary_dense(g: &TwoPoleGraph, x: &[Q]) -> Vec<Q> {
    let mut b = vec![Q::zero(); g.vertex_count()];
    for (e, c) in x.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let (t, h) = g.ends(e);
        b[h] += c;
        b[t] -= c;
    }
    b
}

pub fn is_cycle(g: &TwoPoleGraph, x: &[Q]) -> bool {
    boundary_dense(g, x).iter().all(Zero::is_zero)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisProvenance {
    FundamentalTree,
    Recursive,
}

#[derive(Debug, Clone)]
pub struct CycleBasis {
    pub vectors: Vec<EdgeVector>,
    pub provenance: BasisProvenance,
}

impl CycleBasis {
    pub fn to_json(&self, g: &TwoPoleGraph) -> serde_json::Value {
        let vs: Vec<_> = self.vectors.iter().map(|v| edge_vector_to_json(g, v)).collect();
        let prov = match self.provenance {
            BasisProvenance::FundamentalTree => "fundamental-tree",
            BasisProvenance::Recursive => "recursive",
        };
        serde_json::json!({ "schema": crate::SCHEMA, "provenance": prov, "dimension": vs.len(), "vectors": vs })
    }
}

pub fn mu(g: &TwoPoleGraph) -> usize {
    g.edge_count() + 1 - g.vertex_count()
}

/// One cycle per non-tree edge of a BFS tree rooted at the bottom pole.
pub fn fundamental_cycle_basis(g: &TwoPoleGraph) -> CycleBasis {
    let n = g.vertex_count();
    let adj = g.undirected_adjacency();
    let root = g.bottom_index();
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut depth = vec![usize::MAX; n];
    depth[root] = 0;
    let mut tree_edge = vec![false; g.edge_count()];
    let mut queue = VecDeque::from([root]);
    while let Some(x) = queue.pop_front() {
        for &(y, e) in &adj[x] {
            if depth[y] == usize::MAX {
                depth[y] = depth[x] + 1;
                parent[y] = Some((x, e));
                tree_edge[e] = true;
                queue.push_back(y);
            }
        }
    }
    let mut vectors = Vec::with_capacity(mu(g));
    for e in 0..g.edge_count() {
        if tree_edge[e] {
            continue;
        }
        let (t, h) = g.ends(e);
        let mut x = vec![Q::zero(); g.edge_count()];
        x[e] = Q::one();
        // route one unit back from h to t through the tree
        let (mut a, mut b) = (h, t);
        while a != b {
            if depth[a] >= depth[b] {
                let (p, f) = parent[a].expect("non-root");
                x[f] += if g.ends(f).0 == a { Q::one() } else { -Q::one() };
                a = p;
            } else {
                let (p, f) = parent[b].expect("non-root");
                x[f] += if g.ends(f).1 == b { Q::one() } else { -Q::one() };
                b = p;
            }
        }
        vectors.push(x);
    }
    CycleBasis { vectors, provenance: BasisProvenance::FundamentalTree }
}

/// `min_c ‖x - Σ c_i z_i‖₁` with edge weights, over the given scalar type.
pub fn quotient_norm_with<T: Scalar>(g: &TwoPoleGraph, x: &[Q], z: &[EdgeVector]) -> Result<T> {
    let weights: Vec<Q> = g.edges().iter().map(|e| e.weight.clone()).collect();
    weighted_quotient_norm(&weights, x, z)
}

/// `min_c Σ_e w_e |x_e - Σ c_i z_i(e)|` as a linear program.
pub fn weighted_quotient_norm<T: Scalar>(weights: &[Q], x: &[Q], z: &[Vec<Q>]) -> Result<T> {
    let m = weights.len();
    let k = z.len();
    // variables: r⁺ (m), r⁻ (m), c (k, free)
    let mut lp = LinearProgram::<T>::new(2 * m + k);
    for i in 0..k {
        lp.set_free(2 * m + i);
    }
    let mut obj = Vec::with_capacity(2 * m);
    for (e, w) in weights.iter().enumerate() {
        let w = T::from_q(w);
        obj.push((e, w.clone()));
        obj.push((m + e, w));
    }
    lp.minimize(obj);
    for e in 0..m {
        let mut row = vec![(e, T::one_val()), (m + e, T::one_val().neg())];
        for (i, zi) in z.iter().enumerate() {
            if !zi[e].is_zero() {
                row.push((2 * m + i, T::from_q(&zi[e])));
            }
        }
        lp.add(row, Relation::Eq, T::from_q(&x[e]));
    }
    Ok(lp.solve()?.value)
}

/// Largest edge count for which the quotient norm is solved exactly by
/// default; above it the float solver is used.
pub const EXACT_QUOTIENT_LIMIT: usize = 64;

pub fn quotient_norm(g: &TwoPoleGraph, x: &[Q], z: &[EdgeVector]) -> Result<Q> {
    if x.iter().all(Zero::is_zero) {
        return Ok(Q::zero());
    }
    if g.edge_count() <= EXACT_QUOTIENT_LIMIT {
        quotient_norm_with::<Q>(g, x, z)
    } else {
        let v: f64 = quotient_norm_with::<f64>(g, x, z)?;
        Ok(crate::numeric::rationalize(v, 1 << 20))
    }
}

/// Repeatedly removes a shortest cycle of the remaining graph. Ties are
/// broken by the lexicographically smallest closing edge id, and searches
/// visit neighbours in edge-id order.
pub fn greedy_cycle_packing(g: &TwoPoleGraph) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    let mut by_id: Vec<usize> = (0..g.edge_count()).collect();
    by_id.sort_by(|&a, &b| g.edges()[a].id.cmp(&g.edges()[b].id));
    let mut rank = vec![0; g.edge_count()];
    for (r, &e) in by_id.iter().enumerate() {
        rank[e] = r;
    }
    let mut adj = g.undirected_adjacency();
    for a in adj.iter_mut() {
        a.sort_by_key(|&(_, e)| rank[e]);
    }
    let mut alive = vec![true; g.edge_count()];
    let mut cycles = Vec::new();
    loop {
        let mut best: Option<Vec<usize>> = None;
        for &e in &by_id {
            if !alive[e] {
                continue;
            }
            let (u, v) = g.ends(e);
            // shortest u-v path avoiding e
            let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
            let mut seen = vec![false; n];
            seen[u] = true;
            let mut queue = VecDeque::from([u]);
            while let Some(x) = queue.pop_front() {
                if x == v {
                    break;
                }
                for &(y, f) in &adj[x] {
                    if f != e && alive[f] && !seen[y] {
                        seen[y] = true;
                        prev[y] = Some((x, f));
                        queue.push_back(y);
                    }
                }
            }
            if !seen[v] {
                continue;
            }
            let mut path = vec![e];
            let mut cur = v;
            while let Some((p, f)) = prev[cur] {
                path.push(f);
                cur = p;
            }
            if best.as_ref().is_none_or(|b| path.len() < b.len()) {
                best = Some(path);
            }
        }
        match best {
            Some(c) => {
                for &e in &c {
                    alive[e] = false;
                }
                cycles.push(c);
            }
            None => return cycles,
        }
    }
}

/// Rank of a family of edge vectors, exactly.
pub fn rank(vectors: &[EdgeVector]) -> usize {
    rank_of(vectors)
}
