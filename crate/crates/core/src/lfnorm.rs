//! Transportation norm of molecules, its Lipschitz dual, and the isometry of
//! a weighted tree's free space with ℓ₁ of its edges.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::TwoPoleGraph;
use crate::linalg::Matrix;
use crate::lp::{LinearProgram, Relation};
use crate::metric::{graph_metric, LipschitzFunction, MetricSpace, Molecule};
use crate::numeric::{fmt_q, Scalar, Q};
use crate::transport;

/// Mass moved from a positive point to a negative point.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub moves: Vec<(usize, usize, Q)>,
    pub cost: Q,
}

impl TransportPlan {
    /// Net outflow per point.
    pub fn outflow(&self, n: usize) -> Vec<Q> {
        let mut out = vec![Q::zero(); n];
        for (p, q, x) in &self.moves {
            out[*p] += x;
            out[*q] -= x;
        }
        out
    }

    pub fn to_json(&self, space: &MetricSpace) -> serde_json::Value {
        #[derive(Serialize)]
        struct Move<'a> {
            from: &'a str,
            to: &'a str,
            mass: String,
        }
        let moves: Vec<Move> = self
            .moves
            .iter()
            .map(|(p, q, x)| Move { from: &space.points()[*p], to: &space.points()[*q], mass: fmt_q(x) })
            .collect();
        serde_json::json!({ "moves": moves, "cost": fmt_q(&self.cost) })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate {
    pub f: LipschitzFunction,
    pub value: Q,
}

#[derive(Debug, Clone)]
struct Sides {
    sources: Vec<usize>,
    sinks: Vec<usize>,
    supply: Vec<Q>,
    demand: Vec<Q>,
    cost: Vec<Vec<Q>>,
}

fn sides(space: &MetricSpace, m: &Molecule) -> Result<Sides> {
    if !m.total().is_zero() {
        return Err(Error::NotZeroSum);
    }
    if let Some(&p) = m.coeffs().keys().find(|&&p| p >= space.len()) {
        return Err(Error::UnknownPoint(format!("index {p}")));
    }
    let (sources, supply): (Vec<usize>, Vec<Q>) = m.positive_part().into_iter().unzip();
    let (sinks, demand): (Vec<usize>, Vec<Q>) = m.negative_part().into_iter().unzip();
    let cost = sources.iter().map(|&i| sinks.iter().map(|&j| space.d(i, j).clone()).collect()).collect();
    Ok(Sides { sources, sinks, supply, demand, cost })
}

/// Exact norm of a molecule with an optimal plan.
pub fn ae_norm(space: &MetricSpace, m: &Molecule) -> Result<(Q, TransportPlan)> {
    let s = sides(space, m)?;
    let sol = transport::solve_certified(&s.supply, &s.demand, &s.cost)?;
    let moves = sol.moves().map(|(i, j, x)| (s.sources[*i], s.sinks[*j], x.clone())).collect();
    let plan = TransportPlan { moves, cost: sol.cost.clone() };
    Ok((sol.cost, plan))
}

/// Norm computed entirely in double precision.
pub fn ae_norm_float(space: &MetricSpace, m: &Molecule) -> Result<f64> {
    let s = sides(space, m)?;
    let f = |v: &[Q]| v.iter().map(Scalar::to_f64).collect::<Vec<f64>>();
    let cost: Vec<Vec<f64>> = s.cost.iter().map(|r| f(r)).collect();
    Ok(transport::solve(&f(&s.supply), &f(&s.demand), &cost)?.cost)
}

/// Optimal 1-Lipschitz certificate built from the transportation potentials:
/// `f(x) = min_j (d(x, y_j) - v_j)` over the sinks `y_j`, shifted to vanish
/// at the basepoint. Verified exactly before it is returned.
pub fn lip_dual(space: &MetricSpace, m: &Molecule, basepoint: Option<usize>) -> Result<DualCertificate> {
    let base = basepoint.unwrap_or_else(|| space.basepoint());
    let n = space.len();
    if m.is_zero() {
        return Ok(DualCertificate { f: LipschitzFunction { values: vec![Q::zero(); n] }, value: Q::zero() });
    }
    let s = sides(space, m)?;
    let sol = transport::solve_certified(&s.supply, &s.demand, &s.cost)?;
    let raw: Vec<Q> = (0..n)
        .map(|x| {
            s.sinks.iter().zip(&sol.v).map(|(&j, vj)| space.d(x, j) - vj).min().expect("nonempty sinks")
        })
        .collect();
    let shift = raw[base].clone();
    let f = LipschitzFunction { values: raw.into_iter().map(|x| x - &shift).collect() };
    let value = f.eval(m);
    if f.lipschitz_constant(space) > Q::from_integer(1.into()) || value != sol.cost {
        return lip_dual_lp::<Q>(space, m, Some(base)).map(|(f, value)| DualCertificate {
            f: LipschitzFunction { values: f },
            value,
        });
    }
    Ok(DualCertificate { f, value })
}

/// Lipschitz dual as a linear program over all pairwise constraints
/// `f(u) - f(v) ≤ d(u, v)` with `f(basepoint) = 0`.
pub fn lip_dual_lp<T: Scalar>(space: &MetricSpace, m: &Molecule, basepoint: Option<usize>) -> Result<(Vec<T>, T)> {
    let base = basepoint.unwrap_or_else(|| space.basepoint());
    let n = space.len();
    // variable index for each non-base point
    let var: Vec<Option<usize>> = (0..n).scan(0, |k, p| Some(if p == base { None } else { *k += 1; Some(*k - 1) })).collect();
    let mut lp = LinearProgram::<T>::new(n - 1);
    for v in 0..n - 1 {
        lp.set_free(v);
    }
    lp.maximize(m.coeffs().iter().filter_map(|(&p, c)| var[p].map(|v| (v, T::from_q(c)))).collect());
    for u in 0..n {
        for w in 0..n {
            if u == w {
                continue;
            }
            let mut coeffs = Vec::with_capacity(2);
            if let Some(a) = var[u] {
                coeffs.push((a, T::one_val()));
            }
            if let Some(b) = var[w] {
                coeffs.push((b, T::one_val().neg()));
            }
            lp.add(coeffs, Relation::Le, T::from_q(space.d(u, w)));
        }
    }
    let sol = lp.solve()?;
    let values = (0..n).map(|p| var[p].map_or_else(T::zero_val, |v| sol.x[v].clone())).collect();
    Ok((values, sol.value))
}

/// Linear map `F` from molecules on a weighted tree to ℓ₁ of its edges with
/// `F(1_u - 1_v) = ±w(f)·e_f` on each tree edge `f = {u, v}`.
#[derive(Debug, Clone)]
pub struct TreeIsometry {
    /// `|E| × |V|` matrix of the map on point masses.
    pub matrix: Matrix,
    /// Parent of each vertex in the rooted tree, `None` at the root.
    pub parent: Vec<Option<(usize, usize)>>,
    pub root: usize,
}

impl TreeIsometry {
    pub fn apply(&self, m: &Molecule) -> Vec<Q> {
        self.matrix.mul_vec(&m.to_dense(self.matrix.cols()))
    }
}

/// Vertices in BFS order from `root` with their `(parent, edge)` links.
fn root_tree(t: &TwoPoleGraph, root: usize) -> Result<(Vec<usize>, Vec<Option<(usize, usize)>>)> {
    if t.edge_count() + 1 != t.vertex_count() {
        return Err(Error::NotATree);
    }
    let adj = t.undirected_adjacency();
    let mut parent = vec![None; t.vertex_count()];
    let mut seen = vec![false; t.vertex_count()];
    let mut order = vec![root];
    seen[root] = true;
    let mut k = 0;
    while k < order.len() {
        let x = order[k];
        k += 1;
        for &(y, e) in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                parent[y] = Some((x, e));
                order.push(y);
            }
        }
    }
    if order.len() != t.vertex_count() {
        return Err(Error::NotATree);
    }
    Ok((order, parent))
}

/// Rooted at the bottom pole. Coordinate `f` of `F(m)` is `w(f)` times the
/// mass of `m` below `f`.
pub fn tree_isometry(t: &TwoPoleGraph) -> Result<TreeIsometry> {
    let root = t.bottom_index();
    let (order, parent) = root_tree(t, root)?;
    let mut matrix = Matrix::zeros(t.edge_count(), t.vertex_count());
    for &v in &order {
        // walk up from v, crediting every edge on the way to the root
        let mut cur = v;
        while let Some((p, e)) = parent[cur] {
            matrix.set(e, v, t.edges()[e].weight.clone());
            cur = p;
        }
    }
    Ok(TreeIsometry { matrix, parent, root })
}

/// `L(root) = 0` and `L(child) = L(parent) + sign·w` along each edge, with
/// signs indexed by edge.
pub fn tree_lip_witness(t: &TwoPoleGraph, signs: &[i8]) -> Result<LipschitzFunction> {
    if signs.len() != t.edge_count() {
        return Err(Error::Invalid(format!("{} signs for {} edges", signs.len(), t.edge_count())));
    }
    let (order, parent) = root_tree(t, t.bottom_index())?;
    let mut values = vec![Q::zero(); t.vertex_count()];
    for &v in order.iter().skip(1) {
        let (p, e) = parent[v].expect("non-root");
        let w = &t.edges()[e].weight;
        values[v] = if signs[e] < 0 { &values[p] - w } else { &values[p] + w };
    }
    Ok(LipschitzFunction { values })
}

/// `‖F(m)‖₁` and the transportation norm on the tree metric, for checking.
pub fn tree_norms(t: &TwoPoleGraph, m: &Molecule) -> Result<(Q, Q)> {
    let iso = tree_isometry(t)?;
    let image: Q = iso.apply(m).iter().map(|x| x.abs()).sum();
    let (norm, _) = ae_norm(&graph_metric(t)?, m)?;
    Ok((image, norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{diamond, path, star, Edge};
    use crate::numeric::{q, qi};

    #[test]
    fn two_point_norm_and_dual() {
        let s = MetricSpace::from_matrix(vec![vec![qi(0), qi(3)], vec![qi(3), qi(0)]]).unwrap();
        let m = Molecule::elementary(0, 1).unwrap();
        assert_eq!(ae_norm(&s, &m).unwrap().0, qi(3));
        let d = lip_dual(&s, &m, None).unwrap();
        assert_eq!(d.value, qi(3));
        assert_eq!(&d.f.values[0] - &d.f.values[1], qi(3));
        assert_eq!(ae_norm(&s, &Molecule::zero()).unwrap().0, qi(0));
    }

    #[test]
    fn diamond_poles() {
        let g = diamond(1).unwrap();
        let s = graph_metric(&g).unwrap();
        let m = Molecule::elementary(g.top_index(), g.bottom_index()).unwrap();
        let (v, plan) = ae_norm(&s, &m).unwrap();
        assert_eq!(v, qi(2));
        assert_eq!(plan.outflow(s.len()), m.to_dense(s.len()));
        assert_eq!(lip_dual(&s, &m, None).unwrap().value, qi(2));
        let (f, val) = lip_dual_lp::<Q>(&s, &m, None).unwrap();
        assert_eq!(val, qi(2));
        assert_eq!(f[s.basepoint()], qi(0));
    }

    #[test]
    fn path_image() {
        let t = path(2).unwrap();
        let m = Molecule::elementary(0, 2).unwrap();
        let img = tree_isometry(&t).unwrap().apply(&m);
        assert!(img.iter().all(|x| x.abs() == qi(1)));
        assert_eq!(tree_norms(&t, &m).unwrap(), (qi(2), qi(2)));
    }

    #[test]
    fn weighted_single_edge() {
        let t = TwoPoleGraph::new(
            vec!["u".into(), "v".into()],
            vec![Edge { id: "f".into(), tail: "u".into(), head: "v".into(), weight: qi(5) }],
            "u",
            "v",
        )
        .unwrap();
        let m = Molecule::elementary(0, 1).unwrap();
        assert_eq!(tree_norms(&t, &m).unwrap(), (qi(5), qi(5)));
        assert_eq!(tree_lip_witness(&t, &[-1]).unwrap().values[1], qi(-5));
    }

    #[test]
    fn witnesses_on_star_and_path() {
        let s = star(3).unwrap();
        let l = tree_lip_witness(&s, &[1, 1, 1]).unwrap();
        assert_eq!(l.values, vec![qi(0), qi(1), qi(1), qi(1)]);
        assert_eq!(l.lipschitz_constant(&graph_metric(&s).unwrap()), qi(1));
        let p = path(3).unwrap();
        let l = tree_lip_witness(&p, &[1, -1, 1]).unwrap();
        assert_eq!(l.values, vec![qi(0), qi(1), qi(0), qi(1)]);
        assert_eq!(l.lipschitz_constant(&graph_metric(&p).unwrap()), qi(1));
    }

    #[test]
    fn rejects_cycles() {
        assert_eq!(tree_isometry(&diamond(1).unwrap()).unwrap_err(), Error::NotATree);
    }

    #[test]
    fn float_mode_agrees() {
        let g = diamond(2).unwrap();
        let s = graph_metric(&g).unwrap();
        let m = Molecule::new([(0, q(1, 3)), (3, q(2, 3)), (5, qi(-1))]).unwrap();
        let exact = ae_norm(&s, &m).unwrap().0;
        assert!((ae_norm_float(&s, &m).unwrap() - exact.to_f64()).abs() < 1e-9);
    }
}
