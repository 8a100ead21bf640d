//! Projections onto subspaces of ℓ₁^m: orthogonal, minimal (by linear
//! programming) and averaged over a group of signed permutations.

use std::collections::{HashSet, VecDeque};

use num_traits::{One, Signed, Zero};

use crate::cycles::weighted_quotient_norm;
use crate::error::{Error, Result};
use crate::graph::{automorphism_search, PoleConstraint, TwoPoleGraph};
use crate::linalg::Matrix;
use crate::lp::{LinearProgram, Relation};
use crate::numeric::{fmt_q, rationalize, to_f64, Q};

pub fn l1_norm(p: &Matrix) -> Q {
    p.l1_norm()
}

pub fn linf_norm(p: &Matrix) -> Q {
    p.linf_norm()
}

/// Coordinate map `e_j ↦ sign_j · e_{perm_j}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignedPerm {
    pub perm: Vec<usize>,
    pub sign: Vec<i8>,
}

impl SignedPerm {
    pub fn identity(n: usize) -> Self {
        SignedPerm { perm: (0..n).collect(), sign: vec![1; n] }
    }

    pub fn unsigned(perm: Vec<usize>) -> Self {
        let n = perm.len();
        SignedPerm { perm, sign: vec![1; n] }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn is_valid(&self) -> bool {
        let mut seen = vec![false; self.dim()];
        self.sign.len() == self.dim()
            && self.sign.iter().all(|s| *s == 1 || *s == -1)
            && self.perm.iter().all(|&p| p < seen.len() && !std::mem::replace(&mut seen[p], true))
    }

    pub fn apply(&self, x: &[Q]) -> Vec<Q> {
        let mut y = vec![Q::zero(); x.len()];
        for (j, xj) in x.iter().enumerate() {
            y[self.perm[j]] = if self.sign[j] < 0 { -xj.clone() } else { xj.clone() };
        }
        y
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &SignedPerm) -> SignedPerm {
        let perm = other.perm.iter().map(|&p| self.perm[p]).collect();
        let sign = other.perm.iter().zip(&other.sign).map(|(&p, &s)| s * self.sign[p]).collect();
        SignedPerm { perm, sign }
    }

    pub fn inverse(&self) -> SignedPerm {
        let mut perm = vec![0; self.dim()];
        let mut sign = vec![1; self.dim()];
        for (j, &p) in self.perm.iter().enumerate() {
            perm[p] = j;
            sign[p] = self.sign[j];
        }
        SignedPerm { perm, sign }
    }

    pub fn to_matrix(&self) -> Matrix {
        let mut m = Matrix::zeros(self.dim(), self.dim());
        for (j, &p) in self.perm.iter().enumerate() {
            m.set(p, j, Q::from_integer(self.sign[j].into()));
        }
        m
    }

    /// `g⁻¹ P g`, entrywise `s_i s_j P[π(i), π(j)]`.
    pub fn conjugate(&self, p: &Matrix) -> Matrix {
        let n = self.dim();
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let v = p.get(self.perm[i], self.perm[j]);
                if !v.is_zero() {
                    out.set(i, j, if self.sign[i] * self.sign[j] < 0 { -v.clone() } else { v.clone() });
                }
            }
        }
        out
    }
}

/// `Pg = gP`, exactly.
pub fn check_invariance(p: &Matrix, g: &SignedPerm) -> bool {
    let n = g.dim();
    (0..n).all(|i| {
        (0..n).all(|j| {
            let v = p.get(g.perm[i], g.perm[j]);
            let w = p.get(i, j);
            if g.sign[i] * g.sign[j] < 0 {
                *v == -w.clone()
            } else {
                v == w
            }
        })
    })
}

/// Edge action of a vertex automorphism: an edge whose image runs against
/// the orientation of its target picks up a minus sign.
pub fn signed_automorphism(g: &TwoPoleGraph, vperm: &[usize]) -> Option<SignedPerm> {
    let perm = g.induced_edge_map(vperm)?;
    let sign = (0..g.edge_count()).map(|e| if g.ends(perm[e]).0 == vperm[g.ends(e).0] { 1 } else { -1 }).collect();
    Some(SignedPerm { perm, sign })
}

/// Every pole-fixing or pole-swapping automorphism of `g` as a signed edge map.
pub fn graph_symmetries(g: &TwoPoleGraph, vertex_cap: usize) -> Result<Vec<SignedPerm>> {
    let mut out = Vec::new();
    for c in [PoleConstraint::FixPoles, PoleConstraint::SwapPoles] {
        out.extend(automorphism_search(g, c, vertex_cap)?.iter().filter_map(|v| signed_automorphism(g, v)));
    }
    Ok(out)
}

/// Whether `g` maps the range of the projection `P` into itself: `PgP = gP`.
pub fn preserves_range(p: &Matrix, g: &SignedPerm) -> bool {
    let gm = g.to_matrix();
    let gp = gm.mul(p);
    p.mul(&gp) == gp
}

pub const DEFAULT_GROUP_CAP: usize = 1_000_000;

/// Closure of a generator set under composition, by breadth-first search.
pub fn generate_group(generators: &[SignedPerm], dim: usize, cap: usize) -> Result<Vec<SignedPerm>> {
    let id = SignedPerm::identity(dim);
    let mut seen: HashSet<SignedPerm> = HashSet::from([id.clone()]);
    let mut out = vec![id.clone()];
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in generators {
            let y = g.compose(&x);
            if seen.insert(y.clone()) {
                if seen.len() > cap {
                    return Err(Error::GroupClosureOverflow(cap));
                }
                out.push(y.clone());
                queue.push_back(y);
            }
        }
    }
    Ok(out)
}

/// `(1/|G|) Σ g⁻¹ P g` over the given elements, which should form a group.
pub fn average_projection(p: &Matrix, group: &[SignedPerm]) -> Result<Matrix> {
    if group.is_empty() {
        return Ok(p.clone());
    }
    for g in group {
        if !preserves_range(p, g) {
            return Err(Error::NotInvariantSubspace);
        }
    }
    let n = p.rows();
    let mut sum = Matrix::zeros(n, n);
    for g in group {
        sum = sum.add(&g.conjugate(p));
    }
    Ok(sum.scale(&Q::new(1.into(), (group.len() as i64).into())))
}

/// `B (BᵀB)⁻¹ Bᵀ` for the basis vectors given as the columns of `B`.
pub fn orthogonal_projection(basis: &[Vec<Q>], dim: usize) -> Result<Matrix> {
    if basis.is_empty() {
        return Ok(Matrix::zeros(dim, dim));
    }
    let b = Matrix::from_cols(basis, dim);
    let bt = b.transpose();
    let gram_inv = bt.mul(&b).inverse()?;
    Ok(b.mul(&gram_inv).mul(&bt))
}

pub fn is_projection(p: &Matrix) -> bool {
    p.mul(p) == *p
}

/// Range of `P` equals span(basis): `P b = b` for each basis vector and
/// rank P = dim span.
pub fn has_range(p: &Matrix, basis: &[Vec<Q>]) -> bool {
    basis.iter().all(|b| p.mul_vec(b) == *b) && p.rank() == crate::linalg::rank_of(basis)
}

#[derive(Debug, Clone)]
pub struct MinimalProjection {
    /// Optimal value reported by the floating-point solve.
    pub lambda_float: f64,
    /// Exact ℓ₁-norm of the rounded projection, an upper bound on λ.
    pub lambda: Q,
    pub projection: Matrix,
}

/// Solves `min t` over `P = B·A` with `A·B = I` and column sums of `|P|` at
/// most `t`. The float optimum is rounded to rationals and corrected to an
/// exact projection `B (A'B)⁻¹ A'`.
pub fn minimal_projection_lp(basis: &[Vec<Q>], dim: usize) -> Result<MinimalProjection> {
    let k = basis.len();
    let m = dim;
    if k == 0 {
        return Ok(MinimalProjection { lambda_float: 0.0, lambda: Q::zero(), projection: Matrix::zeros(m, m) });
    }
    let b: Vec<Vec<f64>> = (0..m).map(|r| basis.iter().map(|v| to_f64(&v[r])).collect()).collect();
    let a_var = |i: usize, j: usize| i * m + j;
    let u_var = |r: usize, c: usize| k * m + r * m + c;
    let t_var = k * m + m * m;
    let mut lp = LinearProgram::<f64>::new(t_var + 1);
    for v in 0..k * m {
        lp.set_free(v);
    }
    lp.minimize(vec![(t_var, 1.0)]);
    for i in 0..k {
        for j in 0..k {
            let row: Vec<(usize, f64)> =
                (0..m).filter(|&c| b[c][j] != 0.0).map(|c| (a_var(i, c), b[c][j])).collect();
            lp.add(row, Relation::Eq, if i == j { 1.0 } else { 0.0 });
        }
    }
    for r in 0..m {
        for c in 0..m {
            let p_rc: Vec<(usize, f64)> =
                (0..k).filter(|&i| b[r][i] != 0.0).map(|i| (a_var(i, c), b[r][i])).collect();
            let mut plus = p_rc.clone();
            plus.push((u_var(r, c), -1.0));
            lp.add(plus, Relation::Le, 0.0);
            let mut minus: Vec<(usize, f64)> = p_rc.into_iter().map(|(v, x)| (v, -x)).collect();
            minus.push((u_var(r, c), -1.0));
            lp.add(minus, Relation::Le, 0.0);
        }
    }
    for c in 0..m {
        let mut row: Vec<(usize, f64)> = (0..m).map(|r| (u_var(r, c), 1.0)).collect();
        row.push((t_var, -1.0));
        lp.add(row, Relation::Le, 0.0);
    }
    let sol = lp.solve()?;
    let bm = Matrix::from_cols(basis, m);
    let mut best: Option<(Q, Matrix)> = None;
    for max_den in [1_000i64, 100_000, 10_000_000] {
        let a = Matrix::from_rows(
            (0..k).map(|i| (0..m).map(|c| rationalize(sol.x[a_var(i, c)], max_den)).collect()).collect(),
        );
        let Ok(corr) = a.mul(&bm).inverse() else { continue };
        let p = bm.mul(&corr.mul(&a));
        let norm = p.l1_norm();
        let better = best.as_ref().is_none_or(|(bn, _)| &norm < bn);
        if better {
            best = Some((norm, p));
        }
        if (to_f64(&best.as_ref().unwrap().0) - sol.value).abs() <= 1e-9 {
            break;
        }
    }
    let (lambda, projection) = best.ok_or_else(|| Error::SolverFailure("rounded projection is singular".into()))?;
    Ok(MinimalProjection { lambda_float: sol.value, lambda, projection })
}

/// Lower bound on the Banach-Mazur distance from `ℓ₁(E)/Y` to ℓ₁ obtained
/// from the relative projection constant: `d ≤ C` forces `λ ≤ 1 + C`.
pub fn bm_lower_bound(lambda: &Q) -> Q {
    lambda - Q::one()
}

/// `‖T‖·‖T⁻¹‖` for a map from the quotient `ℓ₁^w / span(z)` onto ℓ₁^d.
///
/// `t` is `d × m` and must vanish on `z`. `‖T‖` is the largest weighted
/// column norm (the quotient map sends the unit ball onto the unit ball);
/// `‖T⁻¹‖` is the largest quotient norm among the given preimages of the
/// target unit vectors.
pub fn bm_upper_via_basis_map(
    weights: &[Q],
    z: &[Vec<Q>],
    t: &Matrix,
    preimages: &[Vec<Q>],
) -> Result<BasisMapBound> {
    for zi in z {
        if !t.mul_vec(zi).iter().all(Zero::is_zero) {
            return Err(Error::Invalid("map does not vanish on the subspace".into()));
        }
    }
    for (i, p) in preimages.iter().enumerate() {
        let img = t.mul_vec(p);
        if img.iter().enumerate().any(|(j, x)| *x != if i == j { Q::one() } else { Q::zero() }) {
            return Err(Error::Invalid(format!("preimage {i} is not mapped to a unit vector")));
        }
    }
    let t_norm = (0..t.cols())
        .map(|c| (0..t.rows()).fold(Q::zero(), |s, r| s + t.get(r, c).abs()) / &weights[c])
        .max()
        .unwrap_or_else(Q::zero);
    let mut inv = Q::zero();
    for p in preimages {
        let v: Q = weighted_quotient_norm(weights, p, z)?;
        if v > inv {
            inv = v;
        }
    }
    Ok(BasisMapBound { product: &t_norm * &inv, t_norm, t_inv_norm: inv })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisMapBound {
    pub t_norm: Q,
    pub t_inv_norm: Q,
    pub product: Q,
}

#[derive(Debug, Clone)]
pub struct ProjectionReport {
    pub operator: Matrix,
    pub range_basis: Vec<Vec<Q>>,
    pub norm_l1: Q,
    pub norm_linf: Q,
    pub is_projection: bool,
    pub invariant_under: Vec<String>,
}

impl ProjectionReport {
    pub fn new(operator: Matrix, range_basis: Vec<Vec<Q>>, checked: &[(String, SignedPerm)]) -> Self {
        let is_projection = is_projection(&operator) && has_range(&operator, &range_basis);
        let invariant_under =
            checked.iter().filter(|(_, g)| check_invariance(&operator, g)).map(|(n, _)| n.clone()).collect();
        ProjectionReport {
            norm_l1: operator.l1_norm(),
            norm_linf: operator.linf_norm(),
            operator,
            range_basis,
            is_projection,
            invariant_under,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let to_strings = |rows: Vec<Vec<Q>>| -> Vec<Vec<String>> {
            rows.iter().map(|r| r.iter().map(fmt_q).collect()).collect()
        };
        serde_json::json!({
            "schema": crate::SCHEMA,
            "norm_l1": fmt_q(&self.norm_l1),
            "norm_linf": fmt_q(&self.norm_linf),
            "is_projection": self.is_projection,
            "invariant_under": self.invariant_under,
            "range_dimension": self.range_basis.len(),
            "operator": to_strings(self.operator.to_rows()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{q, qi};

    fn z4() -> Vec<Q> {
        vec![qi(1), qi(1), qi(-1), qi(-1)]
    }

    #[test]
    fn orthogonal_onto_a_line() {
        let p = orthogonal_projection(&[z4()], 4).unwrap();
        assert!(p.to_rows().iter().flatten().all(|x| x.abs() == q(1, 4)));
        assert_eq!(l1_norm(&p), qi(1));
        assert!(is_projection(&p));
        assert_eq!(p, p.transpose());
        let full: Vec<Vec<Q>> = (0..3).map(|i| (0..3).map(|j| if i == j { qi(1) } else { qi(0) }).collect()).collect();
        assert_eq!(orthogonal_projection(&full, 3).unwrap(), Matrix::identity(3));
        assert_eq!(l1_norm(&Matrix::zeros(2, 2)), qi(0));
        assert_eq!(linf_norm(&Matrix::identity(3)), qi(1));
    }

    #[test]
    fn minimal_projection_onto_a_line() {
        let mp = minimal_projection_lp(&[z4()], 4).unwrap();
        assert!((mp.lambda_float - 1.0).abs() < 1e-7);
        assert_eq!(mp.lambda, qi(1));
        assert!(is_projection(&mp.projection));
    }

    #[test]
    fn signed_perm_algebra() {
        let g = SignedPerm { perm: vec![1, 2, 0], sign: vec![1, -1, 1] };
        assert!(g.is_valid());
        let x = vec![qi(1), qi(2), qi(3)];
        assert_eq!(g.inverse().apply(&g.apply(&x)), x);
        assert_eq!(g.compose(&g.inverse()), SignedPerm::identity(3));
        let m = Matrix::from_rows(vec![vec![qi(1), qi(2), qi(0)], vec![qi(0), qi(1), qi(5)], vec![qi(3), qi(0), qi(1)]]);
        let gm = g.to_matrix();
        assert_eq!(g.conjugate(&m), g.inverse().to_matrix().mul(&m).mul(&gm));
        let group = generate_group(&[g], 3, 100).unwrap();
        assert_eq!(group.len(), 6);
        assert_eq!(generate_group(&[SignedPerm::unsigned(vec![1, 2, 0])], 3, 2), Err(Error::GroupClosureOverflow(2)));
    }

    #[test]
    fn averaging_fixes_invariant_projection() {
        let p = orthogonal_projection(&[z4()], 4).unwrap();
        let swap = SignedPerm::unsigned(vec![1, 0, 3, 2]);
        assert!(check_invariance(&p, &swap));
        let group = generate_group(&[swap], 4, 10).unwrap();
        assert_eq!(average_projection(&p, &group).unwrap(), p);
        assert_eq!(bm_lower_bound(&qi(1)), qi(0));
        assert_eq!(bm_lower_bound(&q(5, 3)), q(2, 3));
    }

    #[test]
    fn identity_basis_map() {
        let w = vec![qi(1); 3];
        let t = Matrix::identity(3);
        let pre: Vec<Vec<Q>> = t.to_rows();
        let b = bm_upper_via_basis_map(&w, &[], &t, &pre).unwrap();
        assert_eq!(b.product, qi(1));
    }
}
