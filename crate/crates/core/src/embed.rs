//! Complemented copies of ℓ₁^k inside free spaces, spanned by the normalized
//! molecules `u_i = (𝟙_{y_i} − 𝟙_{x_i}) / d(x_i, y_i)` with the dual
//! functionals `f_i = d(y_i, x_i)·𝟙_{y_i}`.

use num_traits::{One, Signed, Zero};
use serde_json::json;

use crate::error::{Error, Result};
use crate::graph::{diamond, TwoPoleGraph};
use crate::lfnorm::ae_norm;
use crate::lp::{LinearProgram, Relation};
use crate::metric::{graph_metric, MetricSpace, Molecule};
use crate::numeric::{fmt_q, to_f64, Q};

/// Below this many selected points the true lower equivalence constant is
/// also found by one linear program per sign pattern.
pub const SIGN_LP_LIMIT: usize = 8;

/// Minimum spanning tree by Kruskal's procedure; edges `(i, j)` with `i < j`,
/// ties broken by `(i, j)`.
pub fn kruskal_mst(space: &MetricSpace) -> Vec<(usize, usize)> {
    let n = space.len();
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    pairs.sort_by(|a, b| space.d(a.0, a.1).cmp(space.d(b.0, b.1)).then(a.cmp(b)));
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut x = x;
        while p[x] != r {
            let nx = p[x];
            p[x] = r;
            x = nx;
        }
        r
    }
    let mut tree = Vec::with_capacity(n.saturating_sub(1));
    for (i, j) in pairs {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a != b {
            parent[a] = b;
            tree.push((i, j));
        }
    }
    tree
}

/// Every vertex has one of its shortest incident edges in the tree.
pub fn has_shortest_edge_property(space: &MetricSpace, tree: &[(usize, usize)]) -> bool {
    (0..space.len()).all(|v| {
        let best = (0..space.len()).filter(|&w| w != v).map(|w| space.d(v, w)).min();
        match best {
            None => true,
            Some(b) => tree.iter().any(|&(i, j)| (i == v || j == v) && space.d(i, j) == b),
        }
    })
}

#[derive(Debug, Clone)]
pub struct EmbeddingReport {
    pub k: usize,
    pub y: Vec<usize>,
    pub x: Vec<usize>,
    /// `d(y_i, x_i)`.
    pub d: Vec<Q>,
    /// `max{max_{i≠j} (d_i + d_j)/d(y_i, y_j), 1}`.
    pub c_constant: Q,
    /// Lipschitz bound on `Σ α_i f_i` over sign vectors; its reciprocal is
    /// the certified lower equivalence constant.
    pub sign_lip: Q,
    pub lower_eq: Q,
    pub upper_eq: Q,
    /// Exact `‖P‖` over the extreme molecules.
    pub proj_norm: Q,
    pub biorthogonal: bool,
    /// True lower equivalence constant, when the selection is small.
    pub lower_eq_lp: Option<f64>,
}

impl EmbeddingReport {
    pub fn functionals(&self, space: &MetricSpace) -> Vec<Vec<Q>> {
        self.y
            .iter()
            .zip(&self.d)
            .map(|(&y, d)| {
                let mut f = vec![Q::zero(); space.len()];
                f[y] = d.clone();
                f
            })
            .collect()
    }

    pub fn vectors(&self) -> Vec<Molecule> {
        self.y.iter().zip(&self.x).zip(&self.d).map(|((&y, &x), d)| u_vector(y, x, d)).collect()
    }

    pub fn to_json(&self, space: &MetricSpace) -> serde_json::Value {
        let names = |v: &[usize]| v.iter().map(|&i| space.points()[i].clone()).collect::<Vec<_>>();
        json!({
            "schema": crate::SCHEMA,
            "k": self.k,
            "n": space.len(),
            "y": names(&self.y),
            "x": names(&self.x),
            "d": self.d.iter().map(fmt_q).collect::<Vec<_>>(),
            "C": fmt_q(&self.c_constant),
            "lower_eq": fmt_q(&self.lower_eq),
            "upper_eq": fmt_q(&self.upper_eq),
            "proj_norm": fmt_q(&self.proj_norm),
            "proj_norm_float": to_f64(&self.proj_norm),
            "biorthogonal": self.biorthogonal,
            "lower_eq_lp": self.lower_eq_lp,
        })
    }
}

fn u_vector(y: usize, x: usize, d: &Q) -> Molecule {
    let inv = Q::one() / d;
    Molecule::new([(y, inv.clone()), (x, -inv)]).expect("zero sum")
}

/// `x_i`: the nearest point outside `y`, smallest index on ties.
fn partners(space: &MetricSpace, y: &[usize]) -> Result<Vec<usize>> {
    let mut in_y = vec![false; space.len()];
    for &v in y {
        in_y[v] = true;
    }
    if in_y.iter().all(|&b| b) {
        return Err(Error::EmptyComplement);
    }
    Ok(y
        .iter()
        .map(|&v| (0..space.len()).filter(|&w| !in_y[w]).min_by(|&a, &b| space.d(v, a).cmp(space.d(v, b)).then(a.cmp(&b))).unwrap())
        .collect())
}

fn c_constant(space: &MetricSpace, y: &[usize], d: &[Q]) -> Q {
    let mut c = Q::one();
    for i in 0..y.len() {
        for j in i + 1..y.len() {
            let v = (&d[i] + &d[j]) / space.d(y[i], y[j]);
            if v > c {
                c = v;
            }
        }
    }
    c
}

/// Builds and certifies the embedding for a given selection.
pub fn large_embedding(space: &MetricSpace, y: &[usize]) -> Result<EmbeddingReport> {
    if y.is_empty() {
        return Err(Error::Invalid("empty selection".into()));
    }
    let mut seen = vec![false; space.len()];
    for &v in y {
        if v >= space.len() || std::mem::replace(&mut seen[v], true) {
            return Err(Error::Invalid("selection must consist of distinct points".into()));
        }
    }
    let x = partners(space, y)?;
    let d: Vec<Q> = y.iter().zip(&x).map(|(&a, &b)| space.d(a, b).clone()).collect();
    let c = c_constant(space, y, &d);
    let n = space.len();
    let k = y.len();
    let mut slot = vec![None; n];
    for (i, &v) in y.iter().enumerate() {
        slot[v] = Some(i);
    }
    let fval = |i: usize, p: usize| if slot[p] == Some(i) { d[i].clone() } else { Q::zero() };

    // f_i(u_j) = δ_ij
    let us: Vec<Molecule> = (0..k).map(|i| u_vector(y[i], x[i], &d[i])).collect();
    let biorthogonal = (0..k).all(|i| {
        (0..k).all(|j| {
            let v = us[j].coeffs().iter().fold(Q::zero(), |s, (&p, c)| s + fval(i, p) * c);
            v == if i == j { Q::one() } else { Q::zero() }
        })
    });

    let mut sign_lip = Q::zero();
    let mut proj_norm = Q::zero();
    for p in 0..n {
        for q in p + 1..n {
            let dpq = space.d(p, q);
            // Σ_i |f_i(p) − f_i(q)|: only the slots of p and q contribute
            let mut s = Q::zero();
            let mut terms: Vec<(usize, Q)> = Vec::new();
            for (pt, sign) in [(p, Q::one()), (q, -Q::one())] {
                if let Some(i) = slot[pt] {
                    s += d[i].clone();
                    terms.push((i, &d[i] * sign / dpq));
                }
            }
            let ratio = s / dpq;
            if ratio > sign_lip {
                sign_lip = ratio;
            }
            if !terms.is_empty() {
                let mut m = Molecule::zero();
                for (i, coef) in &terms {
                    m = m.plus(&us[*i].scale(coef));
                }
                let (v, _) = ae_norm(space, &m)?;
                if v > proj_norm {
                    proj_norm = v;
                }
            }
        }
    }
    let lower_eq = if sign_lip.is_zero() { Q::one() } else { Q::one() / &sign_lip };
    let mut upper_eq = Q::zero();
    for u in &us {
        let (v, _) = ae_norm(space, u)?;
        if v > upper_eq {
            upper_eq = v;
        }
    }
    let lower_eq_lp = if k <= SIGN_LP_LIMIT { Some(sign_lp_lower(space, &us)?) } else { None };
    Ok(EmbeddingReport { k, y: y.to_vec(), x, d, c_constant: c, sign_lip, lower_eq, upper_eq, proj_norm, biorthogonal, lower_eq_lp })
}

/// `min ‖Σ b_i u_i‖` over `Σ|b_i| = 1`, one transport LP per sign pattern.
fn sign_lp_lower(space: &MetricSpace, us: &[Molecule]) -> Result<f64> {
    let n = space.len();
    let k = us.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    let mut best = f64::INFINITY;
    for mask in 0..(1u32 << k) {
        // variables: b_i (sign fixed by the mask) then flows on ordered pairs
        let mut lp = LinearProgram::<f64>::new(k + pairs.len());
        lp.minimize(pairs.iter().enumerate().map(|(e, &(i, j))| (k + e, to_f64(space.d(i, j)))).collect());
        let sgn = |i: usize| if mask >> i & 1 == 1 { -1.0 } else { 1.0 };
        lp.add((0..k).map(|i| (i, sgn(i))).collect(), Relation::Eq, 1.0);
        for v in 0..n {
            let mut row: Vec<(usize, f64)> = Vec::new();
            for (i, u) in us.iter().enumerate() {
                let c = to_f64(&u.get(v));
                if c != 0.0 {
                    row.push((i, -c));
                }
            }
            for (e, &(a, b)) in pairs.iter().enumerate() {
                if a == v {
                    row.push((k + e, 1.0));
                } else if b == v {
                    row.push((k + e, -1.0));
                }
            }
            lp.add(row, Relation::Eq, 0.0);
        }
        // b_i carries its sign through the substitution b_i = sgn·|b_i|
        for i in 0..k {
            if sgn(i) < 0.0 {
                lp.set_free(i);
                lp.add(vec![(i, 1.0)], Relation::Le, 0.0);
            }
        }
        let sol = lp.solve().map_err(Error::from)?;
        best = best.min(sol.value);
    }
    Ok(best)
}

/// Splits the minimum spanning tree into its two colour classes and uses the
/// larger one (the class of the first point on ties).
pub fn half_dim_embedding(space: &MetricSpace) -> Result<EmbeddingReport> {
    let n = space.len();
    if n < 2 {
        return Err(Error::Invalid("need at least two points".into()));
    }
    let tree = kruskal_mst(space);
    let mut adj = vec![Vec::new(); n];
    for &(i, j) in &tree {
        adj[i].push(j);
        adj[j].push(i);
    }
    let mut colour = vec![usize::MAX; n];
    colour[0] = 0;
    let mut queue = std::collections::VecDeque::from([0]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if colour[w] == usize::MAX {
                colour[w] = 1 - colour[v];
                queue.push_back(w);
            }
        }
    }
    let side: Vec<Vec<usize>> = (0..2).map(|c| (0..n).filter(|&v| colour[v] == c).collect()).collect();
    let y = if side[1].len() > side[0].len() { &side[1] } else { &side[0] };
    large_embedding(space, y)
}

#[derive(Debug, Clone)]
pub struct LcdwBounds {
    pub lower: Q,
    pub lip: Q,
    pub upper: Q,
    pub holds: bool,
}

/// Lipschitz constant of `Σ α_i f_i` against `max|α_i|` and the constant
/// times `max|α_i|`.
pub fn lcdw_bounds(space: &MetricSpace, y: &[usize], x: &[usize], alphas: &[Q]) -> Result<LcdwBounds> {
    if y.len() != x.len() || y.len() != alphas.len() {
        return Err(Error::Invalid("selection, partners and coefficients differ in length".into()));
    }
    let best = partners(space, y)?;
    for (i, (&xi, &bi)) in x.iter().zip(&best).enumerate() {
        if y.contains(&xi) || space.d(y[i], xi) != space.d(y[i], bi) {
            return Err(Error::MinimalityViolated(y[i]));
        }
    }
    let d: Vec<Q> = y.iter().zip(x).map(|(&a, &b)| space.d(a, b).clone()).collect();
    let mut f = vec![Q::zero(); space.len()];
    for i in 0..y.len() {
        f[y[i]] = &alphas[i] * &d[i];
    }
    let lip = crate::metric::LipschitzFunction { values: f }.lipschitz_constant(space);
    let amax = alphas.iter().map(|a| a.abs()).max().unwrap_or_else(Q::zero);
    let upper = c_constant(space, y, &d) * &amax;
    Ok(LcdwBounds { holds: amax <= lip && lip <= upper, lower: amax, lip, upper })
}

/// Points far from the base vertex `O`, grouped by distance mod `p`, with
/// the smallest class removed.
pub fn mod_p_selection(g: &TwoPoleGraph, p: usize) -> Result<Vec<usize>> {
    if !g.is_unit_weight() {
        return Err(Error::Invalid("selection by distance classes needs an unweighted graph".into()));
    }
    let n = g.vertex_count();
    let dist: Vec<Vec<usize>> = (0..n).map(|v| g.hop_distances(v).into_iter().map(|d| d.unwrap()).collect()).collect();
    let ecc: Vec<usize> = dist.iter().map(|r| *r.iter().max().unwrap()).collect();
    let diam = *ecc.iter().max().unwrap();
    if p > diam + 1 {
        return Err(Error::PTooLarge { p, limit: diam + 1 });
    }
    if p < 2 {
        return Err(Error::Invalid("p must be at least 2".into()));
    }
    let o = ecc.iter().position(|&e| e == diam).unwrap();
    let mut classes = vec![Vec::new(); p];
    for v in 0..n {
        classes[dist[o][v] % p].push(v);
    }
    let drop = (0..p).min_by_key(|&c| (classes[c].len(), c)).unwrap();
    Ok((0..n).filter(|&v| dist[o][v] % p != drop).collect())
}

/// Vertices of `D_n` created at step `m`: names with `m` path components.
pub fn diamond_step_vertices(g: &TwoPoleGraph, m: usize) -> Vec<usize> {
    (0..g.vertex_count())
        .filter(|&v| {
            let name = &g.vertices()[v];
            v != g.bottom_index() && v != g.top_index() && name.split('/').count() == m
        })
        .collect()
}

/// `A_{n,m}`, the vertices added when `D_m` was created.
pub fn diamond_anm(n: usize, m: usize) -> Result<(TwoPoleGraph, Vec<usize>)> {
    if m == 0 || m >= n {
        return Err(Error::Invalid("need 1 ≤ m < n".into()));
    }
    let g = diamond(n)?;
    let a = diamond_step_vertices(&g, m);
    Ok((g, a))
}

/// Largest graph distance from a vertex to the set.
pub fn max_distance_to(g: &TwoPoleGraph, set: &[usize]) -> usize {
    let ds: Vec<Vec<Option<usize>>> = set.iter().map(|&a| g.hop_distances(a)).collect();
    (0..g.vertex_count()).map(|v| ds.iter().map(|d| d[v].unwrap()).min().unwrap_or(0)).max().unwrap_or(0)
}

/// The embedding on the vertices added in the last step of `D_n`.
pub fn diamond_top_level(n: usize) -> Result<(MetricSpace, EmbeddingReport)> {
    if n == 0 {
        return Err(Error::Invalid("n must be at least 1".into()));
    }
    let g = diamond(n)?;
    let space = graph_metric(&g)?;
    let y = diamond_step_vertices(&g, n);
    let r = large_embedding(&space, &y)?;
    Ok((space, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::path;
    use crate::numeric::qi;

    fn three_point() -> MetricSpace {
        MetricSpace::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![qi(0), qi(1), qi(1)], vec![qi(1), qi(0), qi(2)], vec![qi(1), qi(2), qi(0)]],
            None,
        )
        .unwrap()
    }

    #[test]
    fn mst_small() {
        let s = three_point();
        assert_eq!(kruskal_mst(&s), vec![(0, 1), (0, 2)]);
        assert!(has_shortest_edge_property(&s, &kruskal_mst(&s)));
        let two = MetricSpace::from_matrix(vec![vec![qi(0), qi(3)], vec![qi(3), qi(0)]]).unwrap();
        assert_eq!(kruskal_mst(&two), vec![(0, 1)]);
    }

    #[test]
    fn half_dim_three_point() {
        let s = three_point();
        let r = half_dim_embedding(&s).unwrap();
        assert_eq!(r.y, vec![1, 2]);
        assert_eq!(r.c_constant, qi(1));
        assert_eq!(r.proj_norm, qi(1));
        assert_eq!(r.lower_eq, qi(1));
        assert!(r.biorthogonal);
        let lp = r.lower_eq_lp.unwrap();
        assert!((lp - 1.0).abs() < 1e-9);
    }

    #[test]
    fn half_dim_two_point() {
        let two = MetricSpace::from_matrix(vec![vec![qi(0), qi(3)], vec![qi(3), qi(0)]]).unwrap();
        let r = half_dim_embedding(&two).unwrap();
        assert_eq!((r.k, r.proj_norm.clone(), r.lower_eq.clone()), (1, qi(1), qi(1)));
    }

    #[test]
    fn single_point_selection() {
        let s = graph_metric(&path(3).unwrap()).unwrap();
        let r = large_embedding(&s, &[1]).unwrap();
        assert_eq!(r.c_constant, qi(1));
        assert!(matches!(large_embedding(&s, &[0, 1, 2, 3]), Err(Error::EmptyComplement)));
    }

    #[test]
    fn lcdw() {
        let s = three_point();
        let b = lcdw_bounds(&s, &[1, 2], &[0, 0], &[qi(1), qi(0)]).unwrap();
        assert!(b.holds && b.lip >= qi(1));
        let z = lcdw_bounds(&s, &[1, 2], &[0, 0], &[qi(0), qi(0)]).unwrap();
        assert_eq!(z.lip, qi(0));
        assert!(matches!(lcdw_bounds(&s, &[1], &[2], &[qi(1)]), Err(Error::MinimalityViolated(_))));
    }

    #[test]
    fn mod_p() {
        let g = path(4).unwrap();
        let y = mod_p_selection(&g, 2).unwrap();
        assert!(y.len() >= 3);
        assert!(mod_p_selection(&g, 1).is_err());
        assert!(matches!(mod_p_selection(&g, 6), Err(Error::PTooLarge { .. })));
        let d2 = diamond(2).unwrap();
        let y = mod_p_selection(&d2, 2).unwrap();
        assert!(y.len() >= 6);
        let r = large_embedding(&graph_metric(&d2).unwrap(), &y).unwrap();
        assert!(r.c_constant <= qi(8));
    }

    #[test]
    fn diamond_top() {
        for n in 1..=2 {
            let (_, r) = diamond_top_level(n).unwrap();
            assert_eq!(r.k, 2 * 4usize.pow(n as u32 - 1));
            assert_eq!((r.proj_norm.clone(), r.lower_eq.clone(), r.upper_eq.clone()), (qi(1), qi(1), qi(1)));
        }
    }

    #[test]
    fn anm_sizes() {
        assert_eq!(diamond_anm(2, 1).unwrap().1.len(), 2);
        assert_eq!(diamond_anm(3, 2).unwrap().1.len(), 8);
        let (g, a) = diamond_anm(3, 1).unwrap();
        // the poles sit 2^{n-1} = 4 away from the two middle vertices
        assert_eq!(max_distance_to(&g, &a), 4);
    }
}
