//! Diamond graphs through the Haar system.
//!
//! The edge `i` of `D_n` (digits in the order tl, bl, br, tr, coarsest
//! first) is the function `4^n·𝟙` on the `i`-th interval of length `4^{-n}`.
//! Step functions on that grid are stored by their cell values. Column norms
//! of Haar projections are computed on integer cells scaled by the grid
//! size, which keeps them exact and fast.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::cycles::{fundamental_cycle_basis, is_cycle};
use crate::error::{Error, Result};
use crate::graph::{diamond, multidiamond};
use crate::linalg::{dot, rank_of, same_span, Matrix};
use crate::numeric::{fmt_q, q, qi, Q};
use crate::projection::{
    average_projection, bm_upper_via_basis_map, generate_group, has_range, is_projection, SignedPerm,
    DEFAULT_GROUP_CAP,
};

/// Largest level for which quotient norms in the basis-map bound are solved
/// exactly rather than bounded by the ℓ₁ norm.
pub const EXACT_TINV_LEVEL: usize = 2;

/// Largest grid on which every column of a Haar projection is measured; on
/// finer grids one column is measured, which suffices because the reflections
/// act transitively on cells and commute with the projection.
pub const ALL_COLUMNS_LIMIT: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NormMode {
    L1,
    Linf,
}

/// Step function on `(0,1]` over `(2k)^m` equal cells.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicVector {
    pub branch: usize,
    pub resolution: usize,
    pub values: Vec<Q>,
}

impl DyadicVector {
    pub fn zero(branch: usize, resolution: usize) -> Self {
        DyadicVector { branch, resolution, values: vec![Q::zero(); (2 * branch).pow(resolution as u32)] }
    }

    pub fn cells(&self) -> usize {
        self.values.len()
    }

    pub fn norm_l1(&self) -> Q {
        self.values.iter().fold(Q::zero(), |s, v| s + v.abs()) / qi(self.cells() as i64)
    }

    pub fn norm_linf(&self) -> Q {
        self.values.iter().map(|v| v.abs()).max().unwrap_or_else(Q::zero)
    }

    pub fn norm(&self, mode: NormMode) -> Q {
        match mode {
            NormMode::L1 => self.norm_l1(),
            NormMode::Linf => self.norm_linf(),
        }
    }

    /// `∫ f g` over `(0,1]`.
    pub fn inner(&self, o: &DyadicVector) -> Q {
        dot(&self.values, &o.values) / qi(self.cells() as i64)
    }

    pub fn plus(&self, o: &DyadicVector) -> DyadicVector {
        let values = self.values.iter().zip(&o.values).map(|(a, b)| a + b).collect();
        DyadicVector { values, ..self.clone() }
    }

    pub fn scale(&self, c: &Q) -> DyadicVector {
        DyadicVector { values: self.values.iter().map(|v| v * c).collect(), ..self.clone() }
    }

    /// Edge coordinates: the cell value divided by the grid size.
    pub fn to_edge_vector(&self) -> Vec<Q> {
        let c = qi(self.cells() as i64);
        self.values.iter().map(|v| v / &c).collect()
    }

    pub fn from_edge_vector(branch: usize, resolution: usize, x: &[Q]) -> Result<Self> {
        let cells = (2 * branch).pow(resolution as u32);
        if x.len() != cells {
            return Err(Error::GraphMismatch(format!("{} edges for a grid of {cells} cells", x.len())));
        }
        let c = qi(cells as i64);
        Ok(DyadicVector { branch, resolution, values: x.iter().map(|v| v * &c).collect() })
    }
}

/// Level of `h_i`, with `-1` for `h_0`.
pub fn haar_level(i: usize) -> i32 {
    if i == 0 {
        -1
    } else {
        (usize::BITS - 1 - i.leading_zeros()) as i32
    }
}

/// Haar indices on a level; level `-1` is `{0}`.
pub fn haar_level_indices(level: i32) -> std::ops::Range<usize> {
    if level < 0 {
        0..1
    } else {
        1 << level..1 << (level + 1)
    }
}

/// Support of `h_i` as a cell range, with the sign on its first half.
fn support(i: usize, cells: usize) -> (usize, usize) {
    if i == 0 {
        return (0, cells);
    }
    let l = haar_level(i) as u32;
    let len = cells >> l;
    (((i - (1 << l)) * len), len)
}

fn fits(i: usize, cells: usize) -> bool {
    i == 0 || (cells.is_power_of_two() && (cells.trailing_zeros() as i32) > haar_level(i))
}

/// Cell values of `h_i` as signs.
fn haar_signs(i: usize, cells: usize) -> Vec<i8> {
    let mut v = vec![0i8; cells];
    let (s, len) = support(i, cells);
    if i == 0 {
        v.iter_mut().for_each(|x| *x = 1);
        return v;
    }
    for (c, x) in v.iter_mut().enumerate().skip(s).take(len) {
        *x = if c < s + len / 2 { 1 } else { -1 };
    }
    v
}

/// `h_i` on the grid of `4^resolution` cells.
pub fn haar(index: usize, resolution: usize) -> Result<DyadicVector> {
    let cells = 4usize.pow(resolution as u32);
    if !fits(index, cells) {
        return Err(Error::ResolutionTooCoarse { index, resolution });
    }
    let values = haar_signs(index, cells).into_iter().map(|s| qi(s as i64)).collect();
    Ok(DyadicVector { branch: 2, resolution, values })
}

/// The `4^n` edge functions of `D_n`.
pub fn edge_embedding(n: usize) -> Vec<DyadicVector> {
    let cells = 4usize.pow(n as u32);
    (0..cells)
        .map(|i| {
            let mut v = DyadicVector::zero(2, n);
            v.values[i] = qi(cells as i64);
            v
        })
        .collect()
}

/// `e_n` by the interval replacement procedure starting from `e_1 = 4h_1`.
pub fn outer_cycle(n: usize) -> Result<DyadicVector> {
    if n == 0 {
        return Err(Error::Invalid("n must be at least 1".into()));
    }
    // intervals of length 2^{-(2m-1)} at stage m, by offset and sign
    let mut intervals: Vec<(usize, i8)> = vec![(0, 1), (1, -1)];
    for _ in 2..=n {
        let mut next = Vec::with_capacity(intervals.len() * 2);
        for &(a, s) in &intervals {
            if s > 0 {
                next.push((4 * a, 1));
                next.push((4 * a + 2, 1));
            } else {
                next.push((4 * a + 1, -1));
                next.push((4 * a + 3, -1));
            }
        }
        intervals = next;
    }
    let mut v = DyadicVector::zero(2, n);
    let h = qi(4i64.pow(n as u32));
    for (a, s) in intervals {
        for c in [2 * a, 2 * a + 1] {
            v.values[c] = if s > 0 { h.clone() } else { -h.clone() };
        }
    }
    Ok(v)
}

/// Right-hand side of the recursion `e_n = 2e_{n-1} + 2^{2n-1} Σ_{h ∈ A_n} h`,
/// with `A_n` the level `2n-2` Haar functions under the support of `e_{n-1}`.
pub fn outer_cycle_recursion(n: usize) -> Result<DyadicVector> {
    if n == 1 {
        return Ok(haar(1, 1)?.scale(&qi(4)));
    }
    let prev = outer_cycle(n - 1)?;
    let cells = 4usize.pow(n as u32);
    let per = cells / prev.cells();
    let mut out = DyadicVector::zero(2, n);
    for (c, v) in out.values.iter_mut().enumerate() {
        *v = &prev.values[c / per] * qi(2);
    }
    let coef = qi(2i64.pow(2 * n as u32 - 1));
    for i in haar_level_indices(2 * n as i32 - 2) {
        let (s, len) = support(i, cells);
        if (s..s + len).all(|c| !prev.values[c / per].is_zero()) {
            for (c, sg) in haar_signs(i, cells).into_iter().enumerate() {
                if sg != 0 {
                    out.values[c] += &coef * qi(sg as i64);
                }
            }
        }
    }
    Ok(out)
}

/// Haar indices of the even levels `0, 2, …, 2n-2`.
pub fn even_level_basis(n: usize) -> Vec<usize> {
    (0..n).flat_map(|k| haar_level_indices(2 * k as i32)).collect()
}

/// Whether the even-level Haar functions span the image of `Z(D_n)`.
pub fn even_level_span_check(n: usize) -> Result<bool> {
    let g = diamond(n)?;
    let z: Vec<Vec<Q>> = fundamental_cycle_basis(&g).vectors;
    let h: Vec<Vec<Q>> =
        even_level_basis(n).into_iter().map(|i| haar(i, n).map(|v| v.to_edge_vector())).collect::<Result<_>>()?;
    Ok(h.len() == z.len() && rank_of(&h) == h.len() && same_span(&z, &h))
}

/// The reflection `g_i` swapping the two halves of the support of `h_i`.
pub fn g_isometry(i: usize, resolution: usize) -> Result<SignedPerm> {
    let cells = 4usize.pow(resolution as u32);
    if i == 0 || !fits(i, cells) {
        return Err(Error::ResolutionTooCoarse { index: i, resolution });
    }
    let (s, len) = support(i, cells);
    let half = len / 2;
    let perm = (0..cells)
        .map(|c| {
            if c < s || c >= s + len {
                c
            } else if c < s + half {
                c + half
            } else {
                c - half
            }
        })
        .collect();
    Ok(SignedPerm::unsigned(perm))
}

/// Orthogonal projection onto the span of the Haar levels in `levels`.
pub fn haar_projection(levels: &[i32], resolution: usize) -> Result<Matrix> {
    let cells = 4usize.pow(resolution as u32);
    let mut m = Matrix::zeros(cells, cells);
    for &l in levels {
        for i in haar_level_indices(l) {
            if !fits(i, cells) {
                return Err(Error::ResolutionTooCoarse { index: i, resolution });
            }
            let s = haar_signs(i, cells);
            let (_, len) = support(i, cells);
            let w = q(1, len as i64);
            for (a, &sa) in s.iter().enumerate() {
                if sa == 0 {
                    continue;
                }
                for (b, &sb) in s.iter().enumerate() {
                    if sb != 0 {
                        *m.get_mut(a, b) += &w * qi((sa * sb) as i64);
                    }
                }
            }
        }
    }
    Ok(m)
}

/// Column `col` of a Haar projection, scaled by the cell count to integers.
fn scaled_column(functions: &[(Vec<i8>, usize)], cells: usize, col: usize) -> Vec<i64> {
    let mut out = vec![0i64; cells];
    for (s, len) in functions {
        if s[col] == 0 {
            continue;
        }
        let w = (cells / len) as i64 * s[col] as i64;
        for (o, &x) in out.iter_mut().zip(s) {
            *o += w * x as i64;
        }
    }
    out
}

/// `‖P‖_{1→1}` of the orthogonal projection onto the span of `functions`
/// (orthogonal step functions given by signs on their supports).
fn orth_norm(functions: &[(Vec<i8>, usize)], cells: usize) -> Q {
    let cols = if cells <= ALL_COLUMNS_LIMIT { cells } else { 1 };
    let best = (0..cols).map(|c| scaled_column(functions, cells, c).iter().map(|x| x.abs()).sum::<i64>()).max();
    q(best.unwrap_or(0), cells as i64)
}

fn level_functions(levels: &[i32], cells: usize) -> Vec<(Vec<i8>, usize)> {
    levels.iter().flat_map(|&l| haar_level_indices(l)).map(|i| (haar_signs(i, cells), support(i, cells).1)).collect()
}

/// `‖Q‖_{1→1}` for the orthogonal projection onto `Z(D_n)`.
pub fn diamond_orth_norm(n: usize) -> Q {
    let levels: Vec<i32> = (0..n as i32).map(|k| 2 * k).collect();
    orth_norm(&level_functions(&levels, 4usize.pow(n as u32)), 4usize.pow(n as u32))
}

/// `‖P‖_∞` for the orthogonal projection onto `Z(D_n)^⊥ = span(h_0, odd levels)`.
/// The matrix is symmetric, so the row and column maxima agree.
pub fn diamond_cut_linf_norm(n: usize) -> Q {
    let mut levels = vec![-1];
    levels.extend((1..=n as i32).map(|k| 2 * k - 1));
    orth_norm(&level_functions(&levels, 4usize.pow(n as u32)), 4usize.pow(n as u32))
}

#[derive(Debug, Clone)]
pub struct AndrewBound {
    /// `‖P_Y‖` in the chosen norm.
    pub bound: Q,
    pub p_norm: Q,
    /// Whether the group average of `P` equals `P_Y`, when averaged.
    pub averaged_equals_orthogonal: Option<bool>,
    pub group_order: Option<usize>,
}

/// `‖P‖ ≥ ‖P_Y‖` for a projection `P` onto `Y = span(∪_{k∈A} H_k)` at the
/// given resolution, optionally confirmed by averaging over the group
/// generated by the reflections.
pub fn andrew_lower_bound(
    p: &Matrix,
    levels: &[i32],
    resolution: usize,
    mode: NormMode,
    average: bool,
) -> Result<AndrewBound> {
    let py = haar_projection(levels, resolution)?;
    let range: Vec<Vec<Q>> = (0..py.cols()).map(|c| py.col(c)).filter(|c| c.iter().any(|x| !x.is_zero())).collect();
    if !is_projection(p) || !has_range(p, &range) {
        return Err(Error::NotInvariantSubspace);
    }
    let norm = |m: &Matrix| match mode {
        NormMode::L1 => m.l1_norm(),
        NormMode::Linf => m.linf_norm(),
    };
    let (averaged_equals_orthogonal, group_order) = if average {
        let cells = p.rows();
        let gens: Vec<SignedPerm> =
            (1..cells).map(|i| g_isometry(i, resolution)).collect::<Result<_>>()?;
        let group = generate_group(&gens, cells, DEFAULT_GROUP_CAP)?;
        let avg = average_projection(p, &group)?;
        (Some(avg == py), Some(group.len()))
    } else {
        (None, None)
    };
    Ok(AndrewBound { bound: norm(&py), p_norm: norm(p), averaged_equals_orthogonal, group_order })
}

/// Checks the five reflection identities used in the averaging argument on
/// every pair of Haar functions and every grid basis vector.
pub fn reflection_identities(resolution: usize) -> Result<bool> {
    let cells = 4usize.pow(resolution as u32);
    let h: Vec<DyadicVector> = (0..cells).map(|i| haar(i, resolution)).collect::<Result<_>>()?;
    let g: Vec<Option<SignedPerm>> =
        (0..cells).map(|i| if i == 0 { None } else { g_isometry(i, resolution).ok() }).collect();
    let act = |gi: &SignedPerm, f: &DyadicVector| DyadicVector { values: gi.apply(&f.values), ..f.clone() };
    let basis: Vec<DyadicVector> = edge_embedding(resolution);
    let py = haar_projection(&(0..(2 * resolution as i32)).step_by(2).collect::<Vec<_>>(), resolution)?;
    let within = |j: usize, i: usize| {
        let (sj, lj) = support(j, cells);
        let (si, li) = support(i, cells);
        sj >= si && sj + lj <= si + li && lj < li
    };
    let disjoint = |i: usize, j: usize| {
        let (si, li) = support(i, cells);
        let (sj, lj) = support(j, cells);
        si + li <= sj || sj + lj <= si
    };
    for i in 1..cells {
        let gi = g[i].as_ref().unwrap();
        // (1) commuting with the averaged projection, represented by P_Y
        if gi.conjugate(&py) != py {
            return Ok(false);
        }
        // (2)
        if act(gi, &h[i]) != h[i].scale(&qi(-1)) {
            return Ok(false);
        }
        // (3)
        if basis.iter().any(|f| act(gi, f).inner(&h[i]) != -f.inner(&h[i])) {
            return Ok(false);
        }
        for j in 0..cells {
            // (4) with the roles: j finer than i, inside its support
            if j > i && within(j, i) {
                let gj = g[j].as_ref().unwrap();
                if basis.iter().any(|f| act(gj, f).inner(&h[i]) != f.inner(&h[i])) {
                    return Ok(false);
                }
            }
            // (5)
            if (i > j || disjoint(i, j)) && act(gi, &h[j]) != h[j] {
                return Ok(false);
            }
        }
    }
    // (4) for h_0 as the coarser function
    for j in 1..cells {
        let gj = g[j].as_ref().unwrap();
        if basis.iter().any(|f| act(gj, f).inner(&h[0]) != f.inner(&h[0])) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Serialize)]
pub struct HaarWitness {
    pub n: usize,
    #[serde(with = "crate::numeric::serde_q")]
    pub f_norm: Q,
    #[serde(with = "crate::numeric::serde_q")]
    pub qf_norm: Q,
    #[serde(with = "crate::numeric::serde_q")]
    pub bound: Q,
}

/// `f = h_0 + Σ_{j=0}^{2n-2} 2^j h_{2^j}` and its even-level projection.
pub fn haar_witness_bound(n: usize) -> Result<(DyadicVector, HaarWitness)> {
    if n == 0 {
        return Err(Error::Invalid("n must be at least 1".into()));
    }
    let mut f = haar(0, n)?;
    let mut qf = DyadicVector::zero(2, n);
    for j in 0..=(2 * n - 2) {
        let term = haar(1 << j, n)?.scale(&qi(1 << j));
        f = f.plus(&term);
        if j % 2 == 0 {
            qf = qf.plus(&term);
        }
    }
    let bound = q(2 * n as i64 + 1, 3);
    let w = HaarWitness { n, f_norm: f.norm_l1(), qf_norm: qf.norm_l1(), bound };
    Ok((qf, w))
}

#[derive(Debug, Clone, Serialize)]
pub struct DiamondBounds {
    pub n: usize,
    #[serde(with = "crate::numeric::serde_q")]
    pub lower: Q,
    /// Computed `‖P‖_∞` of the orthogonal projection onto the cut space.
    #[serde(with = "crate::numeric::serde_q")]
    pub cut_linf_norm: Q,
    #[serde(with = "crate::numeric::serde_q")]
    pub t_norm: Q,
    #[serde(with = "crate::numeric::serde_q")]
    pub t_inv_norm: Q,
    /// Whether `t_inv_norm` is an exact quotient norm or the ℓ₁ bound.
    pub t_inv_exact: bool,
    #[serde(with = "crate::numeric::serde_q")]
    pub upper: Q,
    #[serde(with = "crate::numeric::serde_q")]
    pub stated_upper: Q,
}

/// The map sending `h_0` and `2^{L}h_i` (odd `L`) to unit vectors, in edge
/// coordinates: row `r` of `T` holds the coefficient of the `r`-th basis
/// function in the Haar expansion of each edge, divided by its scale.
fn odd_level_map(levels: &[i32], cells: usize) -> (Matrix, Vec<Vec<Q>>) {
    let idx: Vec<usize> = levels.iter().flat_map(|&l| haar_level_indices(l)).collect();
    let mut t = Matrix::zeros(idx.len(), cells);
    let mut pre = Vec::with_capacity(idx.len());
    for (r, &i) in idx.iter().enumerate() {
        let s = haar_signs(i, cells);
        let (_, len) = support(i, cells);
        // expansion coefficient of an edge on h_i is sign·cells/len; the scale is cells/len too
        for (c, &sg) in s.iter().enumerate() {
            if sg != 0 {
                t.set(r, c, qi(sg as i64));
            }
        }
        let scale = q(cells as i64, len as i64);
        pre.push(s.iter().map(|&sg| &scale * qi(sg as i64) / qi(cells as i64)).collect());
    }
    (t, pre)
}

/// Bounds on the Banach-Mazur distance from the free space over `D_n` to ℓ₁.
pub fn diamond_bm_bounds(n: usize) -> Result<DiamondBounds> {
    if n == 0 {
        return Err(Error::Invalid("n must be at least 1".into()));
    }
    let cells = 4usize.pow(n as u32);
    let mut levels = vec![-1];
    levels.extend((1..=n as i32).map(|k| 2 * k - 1));
    let (t, pre) = odd_level_map(&levels, cells);
    let (t_norm, t_inv_norm, exact) = if n <= EXACT_TINV_LEVEL {
        let g = diamond(n)?;
        let z = fundamental_cycle_basis(&g).vectors;
        let b = bm_upper_via_basis_map(&vec![Q::one(); cells], &z, &t, &pre)?;
        (b.t_norm, b.t_inv_norm, true)
    } else {
        let t_norm = t.l1_norm();
        let inv = pre.iter().map(|p| crate::linalg::l1(p)).max().unwrap_or_else(Q::zero);
        (t_norm, inv, false)
    };
    Ok(DiamondBounds {
        n,
        lower: q(2 * n as i64 + 1, 3),
        cut_linf_norm: diamond_cut_linf_norm(n),
        upper: &t_norm * &t_inv_norm,
        t_norm,
        t_inv_norm,
        t_inv_exact: exact,
        stated_upper: qi(4 * n as i64 + 4),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MultibranchReport {
    pub n: usize,
    pub k: usize,
    pub cells: usize,
    pub cut_dimension: usize,
    pub cycle_dimension: usize,
    /// `P_{n,k} e_{n,1}` equals `h_0 + ½ Σ (2k)^i h_{i,1}`.
    pub column_formula_holds: bool,
    #[serde(with = "crate::numeric::serde_q")]
    pub witness_value: Q,
    #[serde(with = "crate::numeric::serde_q")]
    pub witness_bound: Q,
    /// `‖P_{n,k}‖_∞`, equal to `‖P_{n,k}‖₁` by symmetry.
    #[serde(with = "crate::numeric::serde_q")]
    pub linf_bound: Q,
    #[serde(with = "crate::numeric::serde_q")]
    pub bm_lower: Q,
    #[serde(with = "crate::numeric::serde_q")]
    pub bm_upper: Q,
    #[serde(with = "crate::numeric::serde_q")]
    pub stated_upper: Q,
    /// Self-adjoint and idempotent, checked on the integer matrix when small.
    pub projection_checked: Option<bool>,
    /// Cut functions are orthogonal to the graph cycles and together span the grid.
    pub orthogonal_complement: Option<bool>,
    /// Some pair of consecutive cycle functions has nonzero inner product.
    pub cycle_basis_overlaps: bool,
}

/// `h_0` and `h_{i,j} = 𝟙_{I_{2j-1}} - 𝟙_{I_{2j}}` over level-`i` intervals.
pub fn multibranch_cut_basis(n: usize, k: usize) -> Vec<(Vec<i8>, usize)> {
    let b = 2 * k;
    let cells = b.pow(n as u32);
    let mut out = vec![(vec![1i8; cells], cells)];
    for i in 1..=n {
        let width = cells / b.pow(i as u32);
        for j in 0..b.pow(i as u32) / 2 {
            let mut s = vec![0i8; cells];
            for c in 0..width {
                s[2 * j * width + c] = 1;
                s[(2 * j + 1) * width + c] = -1;
            }
            out.push((s, 2 * width));
        }
    }
    out
}

/// Cycles between consecutive paths of every copy of `D_{1,k}`, lifted
/// uniformly, as signs on cells.
pub fn multibranch_cycle_functions(n: usize, k: usize) -> Vec<Vec<i8>> {
    let b = 2 * k;
    let cells = b.pow(n as u32);
    let mut out = Vec::new();
    for i in 1..=n {
        let width = cells / b.pow(i as u32);
        for a in 0..b.pow(i as u32 - 1) {
            for p in 0..k - 1 {
                let mut s = vec![0i8; cells];
                let base = a * b * width;
                for c in 0..2 * width {
                    s[base + 2 * p * width + c] = 1;
                    s[base + 2 * (p + 1) * width + c] = -1;
                }
                out.push(s);
            }
        }
    }
    out
}

fn idot(a: &[i8], b: &[i8]) -> i64 {
    a.iter().zip(b).map(|(&x, &y)| x as i64 * y as i64).sum()
}

/// Grid size up to which the projection is checked as a full matrix.
pub const MULTIBRANCH_MATRIX_LIMIT: usize = 256;

pub fn multibranch_analysis(n: usize, k: usize) -> Result<MultibranchReport> {
    if n == 0 || k < 2 {
        return Err(Error::Invalid("need n ≥ 1 and k ≥ 2".into()));
    }
    let b = 2 * k;
    let cells = b
        .checked_pow(n as u32)
        .filter(|&c| c <= crate::graph::edge_cap())
        .ok_or_else(|| Error::ResourceLimit(format!("(2k)^n exceeds the edge cap for n = {n}, k = {k}")))?;
    let cut = multibranch_cut_basis(n, k);
    let col = scaled_column(&cut, cells, 0);
    // P e_{n,1} as a function equals the scaled column itself
    let mut formula = vec![1i64; cells];
    for i in 1..=n {
        let width = cells / b.pow(i as u32);
        let c = b.pow(i as u32) as i64 / 2;
        for x in 0..width {
            formula[x] += c;
            formula[width + x] -= c;
        }
    }
    let witness_value = q(col.iter().map(|x| x.abs()).sum::<i64>(), cells as i64);
    let witness_bound = q((k as i64 - 1) * n as i64, 2 * k as i64);
    let linf_bound = orth_norm(&cut, cells);
    let cycles = multibranch_cycle_functions(n, k);
    let overlaps = cycles.windows(2).any(|w| idot(&w[0], &w[1]) != 0);

    let (projection_checked, orthogonal_complement) = if cells <= MULTIBRANCH_MATRIX_LIMIT {
        let w: Vec<Vec<i64>> = (0..cells).map(|c| scaled_column(&cut, cells, c)).collect();
        let sym = (0..cells).all(|i| (0..cells).all(|j| w[i][j] == w[j][i]));
        let idem = (0..cells).all(|i| {
            (0..cells).all(|j| (0..cells).map(|l| w[l][i] * w[j][l]).sum::<i64>() == cells as i64 * w[j][i])
        });
        let g = multidiamond(n, k)?;
        let in_z = cycles.iter().all(|s| is_cycle(&g, &s.iter().map(|&x| qi(x as i64)).collect::<Vec<_>>()));
        let orth = cut.iter().all(|(h, _)| cycles.iter().all(|c| idot(h, c) == 0));
        let all: Vec<Vec<Q>> =
            cut.iter().map(|(h, _)| h.clone()).chain(cycles.iter().cloned()).map(|s| s.iter().map(|&x| qi(x as i64)).collect()).collect();
        let spans = all.len() == cells && rank_of(&all) == cells;
        let dims = cycles.len() == crate::cycles::mu(&g);
        (Some(sym && idem), Some(in_z && orth && spans && dims))
    } else {
        (None, None)
    };
    Ok(MultibranchReport {
        n,
        k,
        cells,
        cut_dimension: cut.len(),
        cycle_dimension: cycles.len(),
        column_formula_holds: col == formula,
        witness_value,
        witness_bound: witness_bound.clone(),
        linf_bound: linf_bound.clone(),
        bm_lower: witness_bound,
        // T sends h_0 and the L₁-normalized h_{i,j} to unit vectors; every edge has
        // coefficient of size one on h_0 and on one normalized h_{i,j} per level
        bm_upper: qi(n as i64 + 1),
        stated_upper: qi(4 * n as i64 + 4),
        projection_checked,
        orthogonal_complement,
        cycle_basis_overlaps: overlaps,
    })
}

/// One row of the bounds table.
#[derive(Debug, Clone, Serialize)]
pub struct BoundsRow {
    pub n: usize,
    pub k: usize,
    pub lower_bound: String,
    pub witness_value: String,
    pub upper_bound: String,
    pub exact_orth_norm: String,
}

pub fn bounds_row(n: usize, k: usize) -> Result<BoundsRow> {
    if k == 2 {
        let (_, w) = haar_witness_bound(n)?;
        let b = diamond_bm_bounds(n)?;
        Ok(BoundsRow {
            n,
            k,
            lower_bound: fmt_q(&b.lower),
            witness_value: fmt_q(&w.qf_norm),
            upper_bound: fmt_q(&b.upper),
            exact_orth_norm: fmt_q(&diamond_orth_norm(n)),
        })
    } else {
        let r = multibranch_analysis(n, k)?;
        Ok(BoundsRow {
            n,
            k,
            lower_bound: fmt_q(&r.bm_lower),
            witness_value: fmt_q(&r.witness_value),
            upper_bound: fmt_q(&r.bm_upper),
            exact_orth_norm: fmt_q(&r.linf_bound),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_basics() {
        assert_eq!(haar(0, 1).unwrap().values, vec![qi(1); 4]);
        assert_eq!(haar(1, 1).unwrap().values, vec![qi(1), qi(1), qi(-1), qi(-1)]);
        assert!(matches!(haar(4, 1), Err(Error::ResolutionTooCoarse { .. })));
        let hs: Vec<_> = (0..16).map(|i| haar(i, 2).unwrap()).collect();
        for i in 0..16 {
            for j in 0..16 {
                assert_eq!(hs[i].inner(&hs[j]).is_zero(), i != j);
            }
        }
        assert_eq!(haar_level(0), -1);
        assert_eq!(haar_level(7), 2);
    }

    #[test]
    fn edge_functions() {
        let e = edge_embedding(1);
        assert_eq!(e.len(), 4);
        assert!(e.iter().all(|v| v.norm_l1() == qi(1)));
        let sum = e.iter().skip(1).fold(e[0].clone(), |s, v| s.plus(v));
        assert!(sum.values.iter().all(|v| !v.is_zero()));
    }

    #[test]
    fn outer_cycles() {
        assert_eq!(outer_cycle(1).unwrap(), haar(1, 1).unwrap().scale(&qi(4)));
        let e2 = [1, 4, 5, 6, 7].iter().fold(DyadicVector::zero(2, 2), |s, &i| s.plus(&haar(i, 2).unwrap()));
        assert_eq!(outer_cycle(2).unwrap(), e2.scale(&qi(8)));
        for n in 1..=5 {
            assert_eq!(outer_cycle(n).unwrap(), outer_cycle_recursion(n).unwrap());
        }
    }

    #[test]
    fn outer_cycle_is_the_graph_cycle() {
        for n in 1..=3 {
            let g = diamond(n).unwrap();
            // up the leftmost path, down the rightmost
            let x: Vec<Q> = g
                .edges()
                .iter()
                .map(|e| {
                    let parts: Vec<&str> = e.id.split('/').collect();
                    if parts.iter().all(|p| *p == "tl" || *p == "bl") {
                        qi(1)
                    } else if parts.iter().all(|p| *p == "br" || *p == "tr") {
                        qi(-1)
                    } else {
                        qi(0)
                    }
                })
                .collect();
            assert!(is_cycle(&g, &x));
            assert_eq!(DyadicVector::from_edge_vector(2, n, &x).unwrap(), outer_cycle(n).unwrap());
        }
    }

    #[test]
    fn even_levels_span_cycles() {
        assert_eq!(even_level_basis(1), vec![1]);
        assert_eq!(even_level_basis(2), vec![1, 4, 5, 6, 7]);
        for n in 1..=3 {
            assert!(even_level_span_check(n).unwrap());
            assert_eq!(even_level_basis(n).len(), (4usize.pow(n as u32) - 1) / 3);
        }
    }

    #[test]
    fn reflections() {
        let g1 = g_isometry(1, 2).unwrap();
        let h = |i| haar(i, 2).unwrap().values;
        assert_eq!(g1.apply(&h(1)), h(1).iter().map(|x| -x).collect::<Vec<_>>());
        assert_eq!(g1.apply(&h(0)), h(0));
        assert_eq!(g_isometry(4, 2).unwrap().apply(&h(1)), h(1));
        assert!(reflection_identities(1).unwrap());
        assert!(reflection_identities(2).unwrap());
    }

    #[test]
    fn andrew_average_recovers_orthogonal() {
        // a skew projection onto span{h_1}: x ↦ φ(x)h_1 with φ(h_1) = 1
        let h1 = haar(1, 1).unwrap().values;
        let phi = [q(1, 2), qi(0), q(-1, 4), q(-1, 4)];
        assert_eq!(dot(&phi, &h1), qi(1));
        let mut p = Matrix::zeros(4, 4);
        for r in 0..4 {
            for c in 0..4 {
                p.set(r, c, &h1[r] * &phi[c]);
            }
        }
        let b = andrew_lower_bound(&p, &[0], 1, NormMode::L1, true).unwrap();
        assert_eq!(b.averaged_equals_orthogonal, Some(true));
        assert_eq!(b.group_order, Some(8));
        assert!(b.p_norm >= b.bound);
        let py = haar_projection(&[0], 1).unwrap();
        let t = andrew_lower_bound(&py, &[0], 1, NormMode::L1, false).unwrap();
        assert_eq!(t.bound, t.p_norm);
    }

    #[test]
    fn witness_values() {
        let (_, w1) = haar_witness_bound(1).unwrap();
        assert_eq!((w1.f_norm, w1.qf_norm), (qi(1), qi(1)));
        let (_, w2) = haar_witness_bound(2).unwrap();
        assert_eq!((w2.f_norm.clone(), w2.qf_norm.clone()), (qi(1), q(7, 4)));
        for n in 1..=5 {
            let (_, w) = haar_witness_bound(n).unwrap();
            assert_eq!(w.f_norm, qi(1));
            assert!(w.qf_norm >= w.bound);
            assert!(diamond_orth_norm(n) >= w.qf_norm);
        }
    }

    #[test]
    fn orth_norm_matches_dense_matrix() {
        let levels = [0, 2];
        assert_eq!(haar_projection(&levels, 2).unwrap().l1_norm(), diamond_orth_norm(2));
    }

    #[test]
    fn diamond_bounds() {
        let b1 = diamond_bm_bounds(1).unwrap();
        assert_eq!(b1.lower, qi(1));
        let b2 = diamond_bm_bounds(2).unwrap();
        assert_eq!(b2.lower, q(5, 3));
        assert!(b2.t_inv_exact);
        assert!(b2.upper <= qi(12));
        assert!(b2.cut_linf_norm >= b2.lower);
        assert_eq!(diamond_bm_bounds(3).unwrap().lower, q(7, 3));
    }

    #[test]
    fn multibranch() {
        let r = multibranch_analysis(2, 3).unwrap();
        assert!(r.column_formula_holds);
        assert!(r.witness_value >= q(2, 3));
        assert_eq!(r.projection_checked, Some(true));
        assert_eq!(r.orthogonal_complement, Some(true));
        assert!(r.cycle_basis_overlaps);
        let r1 = multibranch_analysis(1, 3).unwrap();
        assert!(r1.cycle_basis_overlaps);
        let r2 = multibranch_analysis(2, 2).unwrap();
        assert!(!r2.cycle_basis_overlaps);
        assert_eq!(r2.orthogonal_complement, Some(true));
    }
}
