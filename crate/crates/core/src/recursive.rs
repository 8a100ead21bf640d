//! Recursive families `B_n` over a base graph `B`: the averaged geodesic
//! vector Δ, the vectors c(B) and d(B), the embeddings `E_n`, the recursive
//! cycle basis, automorphism lifts and the invariant projections built on
//! top of them.
//!
//! An edge of `B_n = recursive_family(B, n)` is a digit string
//! `x_1 … x_n` of edges of `B`, coarsest first, and its index is the
//! big-endian base-`|E(B)|` number of that string.

use std::collections::HashSet;

use num_traits::{One, Signed, Zero};

use crate::cycles::{fundamental_cycle_basis, is_cycle, mu, signed_indicator, EdgeVector};
use crate::error::{Error, Result};
use crate::graph::{automorphism_search, recursive_family, PoleConstraint, TwoPoleGraph, DEFAULT_AUTOMORPHISM_VERTEX_CAP};
use crate::linalg::{l1, rank_of, Matrix};
use crate::numeric::{fmt_q, Q};
use crate::projection::{check_invariance, is_projection, orthogonal_projection, ProjectionReport, SignedPerm};

/// Cap on enumerated bottom-top geodesics.
pub const GEODESIC_CAP: usize = 100_000;

#[derive(Debug, Clone)]
pub struct BaseGraphProfile {
    pub base: TwoPoleGraph,
    /// Bottom-top distance.
    pub d: usize,
    /// Number of bottom-top geodesics.
    pub k: usize,
    pub geodesics: Vec<Vec<usize>>,
    pub delta: EdgeVector,
    pub c: EdgeVector,
    pub dvec: EdgeVector,
    pub alpha: Q,
    /// Geodesic realizing `d(B)`.
    pub d_geodesic: Vec<usize>,
    /// Vertical automorphism as an edge permutation.
    pub vertical: Vec<usize>,
    /// All horizontal automorphisms as edge permutations, identity first.
    pub horizontals: Vec<Vec<usize>>,
}

fn q_frac(n: usize, d: usize) -> Q {
    Q::new((n as i64).into(), (d as i64).into())
}

/// Bottom-top geodesics as edge sequences, found by depth-first search
/// pruned by the distance to the top.
pub fn bottom_top_geodesics(b: &TwoPoleGraph, cap: usize) -> Result<Vec<Vec<usize>>> {
    let dt = b.hop_distances(b.top_index());
    let adj = b.undirected_adjacency();
    let mut out = Vec::new();
    let mut pathv = Vec::new();
    fn go(
        x: usize,
        top: usize,
        dt: &[Option<usize>],
        adj: &[Vec<(usize, usize)>],
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> Result<()> {
        if x == top {
            if out.len() >= cap {
                return Err(Error::ResourceLimit(format!("more than {cap} geodesics")));
            }
            out.push(path.clone());
            return Ok(());
        }
        for &(y, e) in &adj[x] {
            if dt[y].unwrap() + 1 == dt[x].unwrap() {
                path.push(e);
                go(y, top, dt, adj, path, out, cap)?;
                path.pop();
            }
        }
        Ok(())
    }
    go(b.bottom_index(), b.top_index(), &dt, &adj, &mut pathv, &mut out, cap)?;
    Ok(out)
}

/// All simple bottom-top paths, regardless of length.
pub fn bottom_top_paths(b: &TwoPoleGraph, cap: usize) -> Result<Vec<Vec<usize>>> {
    let adj = b.undirected_adjacency();
    let mut out = Vec::new();
    let mut on = vec![false; b.vertex_count()];
    let mut path = Vec::new();
    fn go(
        x: usize,
        top: usize,
        adj: &[Vec<(usize, usize)>],
        on: &mut Vec<bool>,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> Result<()> {
        if x == top {
            if out.len() >= cap {
                return Err(Error::ResourceLimit(format!("more than {cap} paths")));
            }
            out.push(path.clone());
            return Ok(());
        }
        on[x] = true;
        for &(y, e) in &adj[x] {
            if !on[y] {
                path.push(e);
                go(y, top, adj, on, path, out, cap)?;
                path.pop();
            }
        }
        on[x] = false;
        Ok(())
    }
    go(b.bottom_index(), b.top_index(), &adj, &mut on, &mut path, &mut out, cap)?;
    Ok(out)
}

/// Simple cycles as closed edge walks, each reported once.
pub fn simple_cycles(b: &TwoPoleGraph, cap: usize) -> Result<Vec<Vec<usize>>> {
    let adj = b.undirected_adjacency();
    let n = b.vertex_count();
    let mut out = Vec::new();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    for s in 0..n {
        let mut on = vec![false; n];
        let mut path = Vec::new();
        fn go(
            x: usize,
            s: usize,
            adj: &[Vec<(usize, usize)>],
            on: &mut Vec<bool>,
            path: &mut Vec<usize>,
            seen: &mut HashSet<Vec<usize>>,
            out: &mut Vec<Vec<usize>>,
            cap: usize,
        ) -> Result<()> {
            on[x] = true;
            for &(y, e) in &adj[x] {
                if path.contains(&e) {
                    continue;
                }
                if y == s && !path.is_empty() {
                    let mut key = path.clone();
                    key.push(e);
                    let mut sorted = key.clone();
                    sorted.sort();
                    if seen.insert(sorted) {
                        if out.len() >= cap {
                            return Err(Error::ResourceLimit(format!("more than {cap} cycles")));
                        }
                        out.push(key);
                    }
                } else if y > s && !on[y] {
                    path.push(e);
                    go(y, s, adj, on, path, seen, out, cap)?;
                    path.pop();
                }
            }
            on[x] = false;
            Ok(())
        }
        go(s, s, &adj, &mut on, &mut path, &mut seen, &mut out, cap)?;
    }
    Ok(out)
}

fn edge_perm_maps(b: &TwoPoleGraph, vperms: &[Vec<usize>]) -> Vec<Vec<usize>> {
    vperms.iter().filter_map(|p| b.induced_edge_map(p)).collect()
}

/// Plain coordinate permutation induced by an edge bijection: `(g f)(g e) = f(e)`.
pub fn permute(perm: &[usize], x: &[Q]) -> Vec<Q> {
    let mut y = vec![Q::zero(); x.len()];
    for (e, v) in x.iter().enumerate() {
        y[perm[e]] = v.clone();
    }
    y
}

fn neg(x: &[Q]) -> Vec<Q> {
    x.iter().map(|v| -v.clone()).collect()
}

impl BaseGraphProfile {
    pub fn new(b: &TwoPoleGraph) -> Result<Self> {
        if b.edges().iter().any(|e| e.id.contains('/') || e.id.is_empty()) {
            return Err(Error::Invalid("base edge ids must be nonempty and free of `/`".into()));
        }
        let d = b.pole_distance();
        if d % 2 == 1 {
            return Err(Error::OddGeodesic(d));
        }
        if mu(b) == 0 {
            return Err(Error::TrivialCycleSpace);
        }
        let geodesics = bottom_top_geodesics(b, GEODESIC_CAP)?;
        let k = geodesics.len();
        let m = b.edge_count();
        let mut delta = vec![Q::zero(); m];
        let unit = q_frac(1, d * k);
        for p in &geodesics {
            for &e in p {
                delta[e] += &unit;
            }
        }
        let db = b.hop_distances(b.bottom_index());
        let c: Vec<Q> = (0..m)
            .map(|e| {
                let (t, h) = b.ends(e);
                let lower = db[t].unwrap().min(db[h].unwrap());
                // the edge midpoint sits at lower + 1/2; compare with d/2
                if 2 * lower >= d {
                    delta[e].clone()
                } else {
                    -delta[e].clone()
                }
            })
            .collect();
        let inv_d = q_frac(1, d);
        let mut best: Option<(Q, Vec<String>, Vec<usize>, Vec<Q>)> = None;
        for p in &geodesics {
            let mut v: Vec<Q> = neg(&delta);
            for &e in p {
                v[e] += &inv_d;
            }
            let norm = l1(&v);
            let ids: Vec<String> = p.iter().map(|&e| b.edges()[e].id.clone()).collect();
            let better = match &best {
                None => true,
                Some((bn, bids, _, _)) => norm > *bn || (norm == *bn && ids < *bids),
            };
            if better {
                best = Some((norm, ids, p.clone(), v));
            }
        }
        let (alpha, _, d_geodesic, dvec) = best.expect("at least one geodesic");
        let z = fundamental_cycle_basis(b).vectors;
        let swaps = edge_perm_maps(b, &automorphism_search(b, PoleConstraint::SwapPoles, DEFAULT_AUTOMORPHISM_VERTEX_CAP)?);
        let vertical = swaps
            .iter()
            .find(|v| z.iter().all(|zi| permute(v, zi) == *zi))
            .or_else(|| swaps.first())
            .cloned()
            .ok_or(Error::NoVerticalAutomorphism)?;
        let horizontals =
            edge_perm_maps(b, &automorphism_search(b, PoleConstraint::FixPoles, DEFAULT_AUTOMORPHISM_VERTEX_CAP)?);
        Ok(BaseGraphProfile { base: b.clone(), d, k, geodesics, delta, c, dvec, alpha, d_geodesic, vertical, horizontals })
    }

    pub fn edge_count(&self) -> usize {
        self.base.edge_count()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let ev = |x: &[Q]| crate::cycles::edge_vector_to_json(&self.base, x);
        let ids = |p: &[usize]| p.iter().map(|&e| self.base.edges()[e].id.clone()).collect::<Vec<_>>();
        serde_json::json!({
            "D": self.d,
            "K": self.k,
            "alpha": fmt_q(&self.alpha),
            "delta": ev(&self.delta),
            "c": ev(&self.c),
            "d": ev(&self.dvec),
            "d_geodesic": ids(&self.d_geodesic),
            "vertical": ids(&self.vertical),
            "horizontal_count": self.horizontals.len(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct ConditionItem {
    pub item: u8,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub items: Vec<ConditionItem>,
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }

    pub fn item(&self, k: u8) -> Option<&ConditionItem> {
        self.items.iter().find(|i| i.item == k)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let items: Vec<_> = self
            .items
            .iter()
            .map(|i| serde_json::json!({"item": i.item, "name": i.name, "pass": i.pass, "detail": i.detail}))
            .collect();
        serde_json::json!({ "all_pass": self.all_pass(), "items": items })
    }
}

/// Evaluates the seven structural conditions on a base graph. Failures are
/// reported per item rather than raised.
pub fn check_conditions(b: &TwoPoleGraph) -> Result<ConditionReport> {
    let mut items = Vec::new();
    let mut push = |item: u8, name: &'static str, pass: bool, detail: String| {
        items.push(ConditionItem { item, name, pass, detail });
    };
    let d = b.pole_distance();
    let off = b.edges_off_even_geodesics();
    let paths = bottom_top_paths(b, GEODESIC_CAP)?;
    let non_geodesic = paths.iter().filter(|p| p.len() != d).count();
    let item1 = matches!(&off, Ok(v) if v.is_empty()) && non_geodesic == 0;
    push(
        1,
        "even geodesic cover",
        item1,
        match &off {
            Err(e) => e.to_string(),
            Ok(v) => format!("distance {d}; {} edges off geodesics; {non_geodesic} non-geodesic paths", v.len()),
        },
    );
    let cycles = simple_cycles(b, GEODESIC_CAP)?;
    let mut up_down = true;
    for c in &cycles {
        up_down &= crate::cycles::is_up_down(b, c)?;
    }
    let oriented = b.oriented_toward_top();
    push(2, "orientation and up-down cycles", oriented && up_down, format!("{} simple cycles", cycles.len()));

    let z = fundamental_cycle_basis(b).vectors;
    let swaps = edge_perm_maps(b, &automorphism_search(b, PoleConstraint::SwapPoles, DEFAULT_AUTOMORPHISM_VERTEX_CAP)?);
    push(3, "vertical automorphism", !swaps.is_empty(), format!("{} pole-swapping automorphisms", swaps.len()));
    let fixing = swaps.iter().find(|v| z.iter().all(|zi| permute(v, zi) == *zi));
    push(4, "vertical fixes cycles", fixing.is_some(), String::new());

    let profile = BaseGraphProfile::new(b);
    match &profile {
        Ok(p) => {
            let v = fixing.unwrap_or(&p.vertical);
            let flips = permute(v, &p.c) == neg(&p.c);
            push(5, "delta embedding and v(c) = -c", flips && l1(&p.delta) == Q::one(), format!("K = {}", p.k));
            let horiz = &p.horizontals;
            let c_fixed = horiz.iter().all(|h| permute(h, &p.c) == p.c);
            let fixed_dim = horizontal_fixed_dimension(&z, horiz);
            push(
                6,
                "horizontal group",
                c_fixed && fixed_dim == 0,
                format!("{} horizontals; fixed subspace of Z has dimension {fixed_dim}", horiz.len()),
            );
            push(7, "nontrivial cycle space", p.alpha.is_positive(), format!("alpha = {}", fmt_q(&p.alpha)));
        }
        Err(e) => {
            push(5, "delta embedding and v(c) = -c", false, e.to_string());
            push(6, "horizontal group", false, e.to_string());
            push(7, "nontrivial cycle space", false, e.to_string());
        }
    }
    Ok(ConditionReport { items })
}

/// Dimension of `{z ∈ Z : h z = z for every h}`.
fn horizontal_fixed_dimension(z: &[EdgeVector], horiz: &[Vec<usize>]) -> usize {
    if z.is_empty() {
        return 0;
    }
    // coefficients c with Σ c_i (h z_i - z_i) = 0 for all h
    let mut rows = Vec::new();
    for h in horiz {
        let diffs: Vec<Vec<Q>> =
            z.iter().map(|zi| permute(h, zi).iter().zip(zi).map(|(a, b)| a - b).collect()).collect();
        for e in 0..z[0].len() {
            rows.push(diffs.iter().map(|d| d[e].clone()).collect::<Vec<Q>>());
        }
    }
    if rows.is_empty() {
        return z.len();
    }
    let m = Matrix::from_rows(rows);
    z.len() - m.rank()
}

fn digits_of(mut idx: usize, base: usize, n: usize) -> Vec<usize> {
    let mut d = vec![0; n];
    for i in (0..n).rev() {
        d[i] = idx % base;
        idx /= base;
    }
    d
}

fn index_of(digits: &[usize], base: usize) -> usize {
    digits.iter().fold(0, |s, &x| s * base + x)
}

/// `Π Δ(x_i)` over a digit string: the value of `Δ_m` on that edge.
fn delta_product(p: &BaseGraphProfile, digits: &[usize]) -> Q {
    digits.iter().fold(Q::one(), |s, &x| s * &p.delta[x])
}

/// `Δ_m` on `B_m`.
pub fn delta_m(p: &BaseGraphProfile, m: usize) -> EdgeVector {
    let e = p.edge_count();
    (0..e.pow(m as u32)).map(|i| delta_product(p, &digits_of(i, e, m))).collect()
}

/// `E_n`: replaces every `1_e` by Δ on the copy of `B` replacing `e`.
pub fn embed_e(p: &BaseGraphProfile, x: &[Q]) -> Result<EdgeVector> {
    let e = p.edge_count();
    let mut out = vec![Q::zero(); x.len() * e];
    for (i, v) in x.iter().enumerate() {
        if v.is_zero() {
            continue;
        }
        for f in 0..e {
            out[i * e + f] = v * &p.delta[f];
        }
    }
    Ok(out)
}

/// `E_n` with a check that `x` lives on `B_n`.
pub fn embed_e_checked(p: &BaseGraphProfile, n: usize, x: &[Q]) -> Result<EdgeVector> {
    let expected = p.edge_count().pow(n as u32);
    if x.len() != expected {
        return Err(Error::GraphMismatch(format!("vector of length {} on a graph with {expected} edges", x.len())));
    }
    embed_e(p, x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// Copied from a basis of a coarser copy.
    Inherited,
    /// Lift of a base cycle through `Δ_{n-1}`.
    Lifted,
}

#[derive(Debug, Clone)]
pub struct RecursiveBasis {
    pub n: usize,
    pub vectors: Vec<(EdgeVector, BasisKind)>,
}

impl RecursiveBasis {
    pub fn plain(&self) -> Vec<EdgeVector> {
        self.vectors.iter().map(|(v, _)| v.clone()).collect()
    }
}

/// `S_n` for `B_n = B ⊘ B_{n-1}`: copies of `S_{n-1}` in every coarse copy
/// plus, for each `f ∈ S_1`, the vector equal to `f(x_1)·Δ_{n-1}` on the
/// copy evolved from `x_1`.
pub fn basis_s(p: &BaseGraphProfile, n: usize) -> Result<RecursiveBasis> {
    if n == 0 {
        return Ok(RecursiveBasis { n, vectors: vec![] });
    }
    let e = p.edge_count();
    let len = e.checked_pow(n as u32).filter(|&l| l <= crate::graph::edge_cap());
    let Some(len) = len else {
        return Err(Error::ResourceLimit(format!("B_{n} exceeds the edge cap")));
    };
    let s1 = fundamental_cycle_basis(&p.base).vectors;
    if n == 1 {
        return Ok(RecursiveBasis { n, vectors: s1.into_iter().map(|v| (v, BasisKind::Lifted)).collect() });
    }
    let prev = basis_s(p, n - 1)?;
    let block = len / e;
    let mut vectors = Vec::new();
    for x1 in 0..e {
        for (s, _) in &prev.vectors {
            let mut v = vec![Q::zero(); len];
            v[x1 * block..(x1 + 1) * block].clone_from_slice(s);
            vectors.push((v, BasisKind::Inherited));
        }
    }
    let dm = delta_m(p, n - 1);
    for f in &s1 {
        let mut v = vec![Q::zero(); len];
        for x1 in 0..e {
            if f[x1].is_zero() {
                continue;
            }
            for (r, dv) in dm.iter().enumerate() {
                v[x1 * block + r] = &f[x1] * dv;
            }
        }
        vectors.push((v, BasisKind::Lifted));
    }
    Ok(RecursiveBasis { n, vectors })
}

/// `v_n`, acting on every digit.
pub fn vertical_automorphism(p: &BaseGraphProfile, n: usize) -> Vec<usize> {
    per_copy_vertical(p, n, &[])
}

/// `v_{n-d}` on the copy of `B_{n-d}` at `prefix`, identity elsewhere.
pub fn per_copy_vertical(p: &BaseGraphProfile, n: usize, prefix: &[usize]) -> Vec<usize> {
    let e = p.edge_count();
    let d = prefix.len();
    (0..e.pow(n as u32))
        .map(|i| {
            let mut digits = digits_of(i, e, n);
            if digits[..d] == *prefix {
                for x in digits.iter_mut().skip(d) {
                    *x = p.vertical[*x];
                }
            }
            index_of(&digits, e)
        })
        .collect()
}

/// The lift of a horizontal automorphism `h` of `B` to the copy at
/// `prefix`: it permutes the coarse sub-copies by `h` and carries each onto
/// its image unchanged.
pub fn horizontal_lift(p: &BaseGraphProfile, n: usize, prefix: &[usize], h: &[usize]) -> Vec<usize> {
    let e = p.edge_count();
    let d = prefix.len();
    assert!(d < n);
    (0..e.pow(n as u32))
        .map(|i| {
            let mut digits = digits_of(i, e, n);
            if digits[..d] == *prefix {
                digits[d] = h[digits[d]];
            }
            index_of(&digits, e)
        })
        .collect()
}

fn prefix_name(p: &BaseGraphProfile, prefix: &[usize]) -> String {
    if prefix.is_empty() {
        "root".into()
    } else {
        prefix.iter().map(|&x| p.base.edges()[x].id.as_str()).collect::<Vec<_>>().join("/")
    }
}

fn all_prefixes(e: usize, d: usize) -> Vec<Vec<usize>> {
    (0..e.pow(d as u32)).map(|i| digits_of(i, e, d)).collect()
}

/// Per-copy verticals and horizontal lifts at every depth `0..n`.
pub fn generator_set(p: &BaseGraphProfile, n: usize) -> Vec<(String, SignedPerm)> {
    let e = p.edge_count();
    let mut out = Vec::new();
    for d in 0..n {
        for prefix in all_prefixes(e, d) {
            let name = prefix_name(p, &prefix);
            out.push((format!("v@{name}"), SignedPerm::unsigned(per_copy_vertical(p, n, &prefix))));
            for (j, h) in p.horizontals.iter().enumerate().skip(1) {
                out.push((format!("h{j}@{name}"), SignedPerm::unsigned(horizontal_lift(p, n, &prefix, h))));
            }
        }
    }
    out
}

/// c(B) on the copy of `B_{n-d}` at every prefix of length `d < n`, lifted
/// through the remaining levels.
pub fn c_type_vectors(p: &BaseGraphProfile, n: usize) -> Vec<(String, EdgeVector)> {
    let e = p.edge_count();
    let len = e.pow(n as u32);
    let mut out = Vec::new();
    for d in 0..n {
        let rest = n - d - 1;
        let dm = delta_m(p, rest);
        let block = dm.len();
        for prefix in all_prefixes(e, d) {
            let base = index_of(&prefix, e) * e * block;
            let mut v = vec![Q::zero(); len];
            for f in 0..e {
                for (r, dv) in dm.iter().enumerate() {
                    v[base + f * block + r] = &p.c[f] * dv;
                }
            }
            out.push((format!("c@{}", prefix_name(p, &prefix)), v));
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct AnnihilationReport {
    pub checked: usize,
    pub violations: Vec<String>,
}

/// Verifies `P f = 0` for every c-type vector `f`, after confirming that `P`
/// commutes with the generator set.
pub fn annihilation_check(proj: &Matrix, p: &BaseGraphProfile, n: usize) -> Result<AnnihilationReport> {
    for (name, g) in generator_set(p, n) {
        if !check_invariance(proj, &g) {
            return Err(Error::NotInvariant(name));
        }
    }
    let cs = c_type_vectors(p, n);
    let violations = cs
        .iter()
        .filter(|(_, f)| !proj.mul_vec(f).iter().all(Zero::is_zero))
        .map(|(n, _)| n.clone())
        .collect();
    Ok(AnnihilationReport { checked: cs.len(), violations })
}

/// Explicit graph `B_n` whose edge order matches the digit indexing.
pub fn explicit_graph(p: &BaseGraphProfile, n: usize) -> Result<TwoPoleGraph> {
    recursive_family(&p.base, n)
}

/// Tail, stem and square edges of `L_2` and the invariant projection onto
/// its cycle space that differs from the orthogonal one on the central part.
#[derive(Debug, Clone)]
pub struct NonUniqueProjection {
    pub report: ProjectionReport,
    pub orthogonal: Matrix,
    /// Largest entrywise gap to the orthogonal projection.
    pub max_gap: Q,
    pub commutes_with_vertical: bool,
    /// `F = (F₁ + F₂)/2` from the two 16-cycles.
    pub f: EdgeVector,
}

pub fn laakso_nonunique_projection() -> Result<NonUniqueProjection> {
    let b = crate::graph::laakso_base();
    let p = BaseGraphProfile::new(&b)?;
    let g = explicit_graph(&p, 2)?;
    let m = g.edge_count();
    let id = |s: &str| g.edge_index(s).ok_or_else(|| Error::GraphMismatch(s.to_string()));
    let eb = |s: &str| b.edge_index(s).expect("base edge");
    let (sb, st) = (eb("sb"), eb("st"));
    let central = [eb("lb"), eb("lt"), eb("rb"), eb("rt")];
    let right = |x: usize| x == eb("rb") || x == eb("rt");
    let e = p.edge_count();

    // small squares walked counterclockwise: up the right side, down the left
    let square_in = |pre: &str| -> Result<EdgeVector> {
        signed_indicator(&g, &[id(&format!("{pre}/rb"))?, id(&format!("{pre}/rt"))?, id(&format!("{pre}/lt"))?, id(&format!("{pre}/lb"))?])
    };
    // outer 16-cycle uses the outer side of every central square, inner the inner side
    let big = |outer: bool| -> Result<EdgeVector> {
        let side = |copy: &str| -> (&str, &str) {
            let right_copy = copy.starts_with('r');
            if right_copy == outer {
                ("rb", "rt")
            } else {
                ("lb", "lt")
            }
        };
        let mut walk = Vec::new();
        for copy in ["rb", "rt"] {
            let (lo, hi) = side(copy);
            for s in ["sb", lo, hi, "st"] {
                walk.push(id(&format!("{copy}/{s}"))?);
            }
        }
        for copy in ["lt", "lb"] {
            let (lo, hi) = side(copy);
            for s in ["st", hi, lo, "sb"] {
                walk.push(id(&format!("{copy}/{s}"))?);
            }
        }
        signed_indicator(&g, &walk)
    };
    let f1 = big(true)?;
    let f2 = big(false)?;
    let f: EdgeVector = f1.iter().zip(&f2).map(|(a, b)| (a + b) / Q::from_integer(2.into())).collect();

    let z = crate::cycles::fundamental_cycle_basis(&g).vectors;
    let orth = orthogonal_projection(&z, m)?;
    let mut op = Matrix::zeros(m, m);
    for col in 0..m {
        let digits = digits_of(col, e, 2);
        let (copy, inner) = (digits[0], digits[1]);
        let image: EdgeVector = if copy == sb || copy == st {
            orth.col(col)
        } else {
            debug_assert!(central.contains(&copy));
            let theta = if right(copy) { Q::one() } else { -Q::one() };
            if inner == sb || inner == st {
                f.iter().map(|x| x * &theta / Q::from_integer(8.into())).collect()
            } else {
                let pre = &b.edges()[copy].id;
                let chi = square_in(pre)?;
                let th = if right(inner) { Q::one() } else { -Q::one() };
                chi.iter().map(|x| x * &th / Q::from_integer(4.into())).collect()
            }
        };
        for (row, v) in image.into_iter().enumerate() {
            if !v.is_zero() {
                op.set(row, col, v);
            }
        }
    }
    let gens = generator_set(&p, 2);
    let vertical = SignedPerm::unsigned(vertical_automorphism(&p, 2));
    let commutes_with_vertical = check_invariance(&op, &vertical);
    let report = ProjectionReport::new(op.clone(), z, &gens);
    let max_gap = op.sub(&orth).max_abs_entry();
    Ok(NonUniqueProjection { report, orthogonal: orth, max_gap, commutes_with_vertical, f })
}

/// Sanity predicates on a recursive basis: size, rank and cycle membership.
pub fn basis_is_valid(p: &BaseGraphProfile, basis: &RecursiveBasis) -> Result<bool> {
    let g = explicit_graph(p, basis.n)?;
    let vs = basis.plain();
    Ok(vs.len() == mu(&g) && rank_of(&vs) == vs.len() && vs.iter().all(|v| is_cycle(&g, v)))
}

pub fn is_exact_projection(m: &Matrix) -> bool {
    is_projection(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{k2n_base, laakso_base, path, square};
    use crate::numeric::{q, qi};

    #[test]
    fn alpha_values() {
        for (k, want) in [(2, qi(1)), (3, q(4, 3)), (4, q(3, 2))] {
            let p = BaseGraphProfile::new(&k2n_base(k)).unwrap();
            assert_eq!(p.alpha, want);
            assert_eq!(p.alpha, q(2 * (k as i64 - 1), k as i64));
        }
        let p = BaseGraphProfile::new(&laakso_base()).unwrap();
        assert_eq!((p.d, p.k, p.alpha.clone()), (4, 2, q(1, 2)));
        let s = BaseGraphProfile::new(&square()).unwrap();
        assert_eq!((s.d, s.k, s.alpha), (2, 2, qi(1)));
    }

    #[test]
    fn profile_invariants() {
        for b in [square(), k2n_base(3), laakso_base()] {
            let p = BaseGraphProfile::new(&b).unwrap();
            assert_eq!(l1(&p.delta), qi(1));
            assert!(p.c.iter().zip(&p.delta).all(|(c, d)| c.abs() == *d));
            for g in &p.geodesics {
                assert_eq!(g.iter().fold(Q::zero(), |s, &e| s + &p.c[e]), qi(0));
            }
            assert_eq!(permute(&p.vertical, &p.c), neg(&p.c));
            assert!(is_cycle(&b, &p.dvec));
        }
    }

    #[test]
    fn conditions() {
        for b in [k2n_base(3), laakso_base(), square()] {
            let r = check_conditions(&b).unwrap();
            assert!(r.all_pass(), "{:?}", r.items);
        }
        let r = check_conditions(&path(2).unwrap()).unwrap();
        assert!(!r.item(7).unwrap().pass);
    }

    #[test]
    fn embedding_is_isometric_and_keeps_cycles() {
        let p = BaseGraphProfile::new(&square()).unwrap();
        let g1 = explicit_graph(&p, 1).unwrap();
        let g2 = explicit_graph(&p, 2).unwrap();
        let z = fundamental_cycle_basis(&g1).vectors;
        let img = embed_e_checked(&p, 1, &z[0]).unwrap();
        assert!(is_cycle(&g2, &img));
        assert_eq!(l1(&img), l1(&z[0]));
        assert!(embed_e_checked(&p, 2, &z[0]).is_err());
    }

    #[test]
    fn recursive_bases() {
        let l = BaseGraphProfile::new(&laakso_base()).unwrap();
        assert_eq!(basis_s(&l, 1).unwrap().vectors.len(), 1);
        let b2 = basis_s(&l, 2).unwrap();
        assert_eq!(b2.vectors.len(), 7);
        assert!(basis_is_valid(&l, &b2).unwrap());
        let v2 = vertical_automorphism(&l, 2);
        for (v, kind) in &b2.vectors {
            if *kind == BasisKind::Lifted {
                assert_eq!(permute(&v2, v), *v);
            }
        }
        let s = BaseGraphProfile::new(&square()).unwrap();
        let s2 = basis_s(&s, 2).unwrap();
        assert_eq!(s2.vectors.len(), 5);
        assert!(basis_is_valid(&s, &s2).unwrap());
    }

    #[test]
    fn vertical_lift_swaps_pole_stems() {
        let l = BaseGraphProfile::new(&laakso_base()).unwrap();
        let g = explicit_graph(&l, 2).unwrap();
        let v2 = vertical_automorphism(&l, 2);
        assert_eq!(v2[g.edge_index("sb/sb").unwrap()], g.edge_index("st/st").unwrap());
        let vv: Vec<usize> = (0..v2.len()).map(|i| v2[v2[i]]).collect();
        assert_eq!(vv, (0..v2.len()).collect::<Vec<_>>());
    }

    #[test]
    fn orthogonal_projections_annihilate_c_vectors() {
        for b in [square(), laakso_base()] {
            let p = BaseGraphProfile::new(&b).unwrap();
            let g = explicit_graph(&p, 2).unwrap();
            let z = fundamental_cycle_basis(&g).vectors;
            let po = orthogonal_projection(&z, g.edge_count()).unwrap();
            let r = annihilation_check(&po, &p, 2).unwrap();
            assert_eq!(r.checked, 1 + b.edge_count());
            assert!(r.violations.is_empty());
            assert_eq!(po.mul_vec(&z[0]), z[0]);
        }
    }

    #[test]
    fn nonunique_projection_on_l2() {
        let r = laakso_nonunique_projection().unwrap();
        assert!(r.report.is_projection);
        assert!(r.commutes_with_vertical);
        assert!(r.max_gap.is_positive());
        let p = BaseGraphProfile::new(&laakso_base()).unwrap();
        assert_eq!(r.report.invariant_under.len(), generator_set(&p, 2).len());
        // F is four times the lift of the base square
        let base_sq = fundamental_cycle_basis(&laakso_base()).vectors[0].clone();
        let lifted = embed_e(&p, &base_sq).unwrap();
        let sign = if r.f.iter().zip(&lifted).any(|(a, b)| a * qi(1) == b * qi(4)) { qi(4) } else { qi(-4) };
        assert_eq!(r.f, lifted.iter().map(|x| x * &sign).collect::<Vec<_>>());
    }
}
