//! Finite metric spaces, molecules and Lipschitz functions.

use std::collections::{BTreeMap, BinaryHeap, HashMap, VecDeque};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::TwoPoleGraph;
use crate::numeric::{serde_q_mat, Q};

/// A finite metric space with rational distances. Points are addressed by
/// index; the string identifiers are kept for I/O.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpace {
    points: Vec<String>,
    index: HashMap<String, usize>,
    dist: Vec<Vec<Q>>,
    basepoint: usize,
}

#[derive(Serialize, Deserialize)]
struct MetricJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schema: Option<String>,
    #[serde(default)]
    points: Vec<String>,
    #[serde(with = "serde_q_mat")]
    dist: Vec<Vec<Q>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    basepoint: Option<String>,
}

/// Checks the metric axioms and reports the first violation found.
pub fn validate_metric(dist: &[Vec<Q>]) -> Result<()> {
    let n = dist.len();
    for (i, row) in dist.iter().enumerate() {
        if row.len() != n {
            return Err(Error::NotSquare { rows: n, row: i, len: row.len() });
        }
    }
    for i in 0..n {
        if !dist[i][i].is_zero() {
            return Err(Error::NonzeroDiagonal(i));
        }
        for j in 0..n {
            if dist[i][j] != dist[j][i] {
                return Err(Error::Asymmetry(i.min(j), i.max(j)));
            }
            if dist[i][j].is_negative() {
                return Err(Error::NegativeDistance(i, j));
            }
            if i != j && dist[i][j].is_zero() {
                return Err(Error::ZeroOffDiagonal(i, j));
            }
        }
    }
    for p in 0..n {
        for r in 0..n {
            for q in 0..n {
                if dist[p][r] > &dist[p][q] + &dist[q][r] {
                    return Err(Error::TriangleViolation(p, q, r));
                }
            }
        }
    }
    Ok(())
}

impl MetricSpace {
    pub fn new(points: Vec<String>, dist: Vec<Vec<Q>>, basepoint: Option<&str>) -> Result<Self> {
        validate_metric(&dist)?;
        if points.len() != dist.len() {
            return Err(Error::Invalid(format!("{} point names for {} rows", points.len(), dist.len())));
        }
        if dist.is_empty() {
            return Err(Error::Invalid("empty metric space".into()));
        }
        let mut index = HashMap::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if index.insert(p.clone(), i).is_some() {
                return Err(Error::Invalid(format!("duplicate point `{p}`")));
            }
        }
        let basepoint = match basepoint {
            Some(b) => *index.get(b).ok_or_else(|| Error::UnknownPoint(b.to_string()))?,
            None => 0,
        };
        Ok(MetricSpace { points, index, dist, basepoint })
    }

    /// Points named `p0, p1, ...`.
    pub fn from_matrix(dist: Vec<Vec<Q>>) -> Result<Self> {
        let points = (0..dist.len()).map(|i| format!("p{i}")).collect();
        Self::new(points, dist, None)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: MetricJson = serde_json::from_str(s)?;
        let points = if raw.points.is_empty() {
            (0..raw.dist.len()).map(|i| format!("p{i}")).collect()
        } else {
            raw.points
        };
        Self::new(points, raw.dist, raw.basepoint.as_deref())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(MetricJson {
            schema: Some(crate::SCHEMA.into()),
            points: self.points.clone(),
            dist: self.dist.clone(),
            basepoint: Some(self.points[self.basepoint].clone()),
        })
        .expect("serializable")
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn index_of(&self, p: &str) -> Result<usize> {
        self.index.get(p).copied().ok_or_else(|| Error::UnknownPoint(p.to_string()))
    }

    pub fn d(&self, i: usize, j: usize) -> &Q {
        &self.dist[i][j]
    }

    pub fn dist(&self) -> &[Vec<Q>] {
        &self.dist
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    pub fn with_basepoint(mut self, b: usize) -> Self {
        assert!(b < self.len());
        self.basepoint = b;
        self
    }

    pub fn diameter(&self) -> Q {
        self.dist.iter().flatten().max().cloned().unwrap_or_else(Q::zero)
    }

    /// Distance from `i` to the nearest point of `set`.
    pub fn dist_to_set(&self, i: usize, set: &[usize]) -> Option<Q> {
        set.iter().map(|&j| self.dist[i][j].clone()).min()
    }

    /// Subspace on the given points, in the given order.
    pub fn restrict(&self, pts: &[usize]) -> MetricSpace {
        let points: Vec<String> = pts.iter().map(|&i| self.points[i].clone()).collect();
        let dist = pts.iter().map(|&i| pts.iter().map(|&j| self.dist[i][j].clone()).collect()).collect();
        MetricSpace::new(points, dist, None).expect("subspace of a metric space")
    }
}

/// Shortest-path metric of the underlying undirected graph: BFS when all
/// weights are one, Dijkstra otherwise.
pub fn graph_metric(g: &TwoPoleGraph) -> Result<MetricSpace> {
    let n = g.vertex_count();
    let unit = g.edges().iter().all(|e| e.weight.is_one());
    let adj = g.undirected_adjacency();
    let mut dist = Vec::with_capacity(n);
    for s in 0..n {
        let row = if unit { bfs_row(&adj, s) } else { dijkstra_row(g, &adj, s) };
        if row.iter().any(Option::is_none) {
            return Err(Error::DisconnectedGraph);
        }
        dist.push(row.into_iter().map(Option::unwrap).collect());
    }
    let bottom = g.vertex_index(g.bottom())?;
    let space = MetricSpace::new(g.vertices().to_vec(), dist, None)?;
    Ok(space.with_basepoint(bottom))
}

fn bfs_row(adj: &[Vec<(usize, usize)>], s: usize) -> Vec<Option<Q>> {
    let mut d: Vec<Option<usize>> = vec![None; adj.len()];
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
    d.into_iter().map(|x| x.map(|k| Q::from_integer(k.into()))).collect()
}

fn dijkstra_row(g: &TwoPoleGraph, adj: &[Vec<(usize, usize)>], s: usize) -> Vec<Option<Q>> {
    #[derive(PartialEq, Eq)]
    struct Item(Q, usize);
    impl Ord for Item {
        fn cmp(&self, o: &Self) -> std::cmp::Ordering {
            o.0.cmp(&self.0).then(o.1.cmp(&self.1))
        }
    }
    impl PartialOrd for Item {
        fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(o))
        }
    }
    let mut d: Vec<Option<Q>> = vec![None; adj.len()];
    let mut done = vec![false; adj.len()];
    d[s] = Some(Q::zero());
    let mut heap = BinaryHeap::from([Item(Q::zero(), s)]);
    while let Some(Item(dx, x)) = heap.pop() {
        if done[x] {
            continue;
        }
        done[x] = true;
        for &(y, e) in &adj[x] {
            let nd = &dx + &g.edges()[e].weight;
            if d[y].as_ref().is_none_or(|cur| &nd < cur) {
                d[y] = Some(nd.clone());
                heap.push(Item(nd, y));
            }
        }
    }
    d
}

/// A finitely supported function summing to zero, keyed by point index.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Molecule {
    coeffs: BTreeMap<usize, Q>,
}

impl Molecule {
    pub fn zero() -> Self {
        Molecule::default()
    }

    pub fn new(coeffs: impl IntoIterator<Item = (usize, Q)>) -> Result<Self> {
        let m = Self::collect(coeffs);
        if !m.total().is_zero() {
            return Err(Error::NotZeroSum);
        }
        Ok(m)
    }

    fn collect(coeffs: impl IntoIterator<Item = (usize, Q)>) -> Self {
        let mut map: BTreeMap<usize, Q> = BTreeMap::new();
        for (p, c) in coeffs {
            *map.entry(p).or_insert_with(Q::zero) += c;
        }
        map.retain(|_, c| !c.is_zero());
        Molecule { coeffs: map }
    }

    /// `m_pq = 1_p - 1_q`.
    pub fn elementary(p: usize, q: usize) -> Result<Self> {
        if p == q {
            return Err(Error::SamePoint);
        }
        Ok(Self::collect([(p, Q::one()), (q, -Q::one())]))
    }

    pub fn from_dense(v: &[Q]) -> Result<Self> {
        Self::new(v.iter().cloned().enumerate())
    }

    pub fn to_dense(&self, n: usize) -> Vec<Q> {
        let mut v = vec![Q::zero(); n];
        for (&p, c) in &self.coeffs {
            v[p] = c.clone();
        }
        v
    }

    /// Reads `{"point": coeff, ...}`.
    pub fn from_json(space: &MetricSpace, s: &str) -> Result<Self> {
        let raw: BTreeMap<String, serde_json::Value> = serde_json::from_str(s)?;
        let mut coeffs = Vec::with_capacity(raw.len());
        for (p, v) in raw {
            if p == "schema" {
                continue;
            }
            coeffs.push((space.index_of(&p)?, crate::numeric::serde_q::from_value(&v)?));
        }
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &BTreeMap<usize, Q> {
        &self.coeffs
    }

    pub fn get(&self, p: usize) -> Q {
        self.coeffs.get(&p).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn total(&self) -> Q {
        self.coeffs.values().fold(Q::zero(), |s, c| s + c)
    }

    pub fn plus(&self, o: &Molecule) -> Molecule {
        Self::collect(self.coeffs.iter().chain(&o.coeffs).map(|(&p, c)| (p, c.clone())))
    }

    pub fn scale(&self, c: &Q) -> Molecule {
        Self::collect(self.coeffs.iter().map(|(&p, x)| (p, x * c)))
    }

    pub fn positive_part(&self) -> Vec<(usize, Q)> {
        self.coeffs.iter().filter(|(_, c)| c.is_positive()).map(|(&p, c)| (p, c.clone())).collect()
    }

    pub fn negative_part(&self) -> Vec<(usize, Q)> {
        self.coeffs.iter().filter(|(_, c)| c.is_negative()).map(|(&p, c)| (p, -c.clone())).collect()
    }
}

/// Real function on the points of a space, by index.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzFunction {
    pub values: Vec<Q>,
}

impl LipschitzFunction {
    pub fn eval(&self, m: &Molecule) -> Q {
        m.coeffs().iter().fold(Q::zero(), |s, (&p, c)| s + c * &self.values[p])
    }

    /// Exact Lipschitz constant as a maximum over pairs.
    pub fn lipschitz_constant(&self, space: &MetricSpace) -> Q {
        let mut best = Q::zero();
        for i in 0..space.len() {
            for j in i + 1..space.len() {
                let r = (&self.values[i] - &self.values[j]).abs() / space.d(i, j);
                if r > best {
                    best = r;
                }
            }
        }
        best
    }
}
