//! One PASS/FAIL line per acceptance criterion. Every checked value is
//! recomputed here from definitions where that is feasible.

use std::time::{Duration, Instant};

use num_traits::{One, Signed, Zero};
use rand::Rng;

use freelip::cycles::{boundary, fundamental_cycle_basis, greedy_cycle_packing, quotient_norm};
use freelip::embed::{diamond_anm, diamond_step_vertices, diamond_top_level, half_dim_embedding, kruskal_mst, EmbeddingReport};
use freelip::graph::{diamond, k2n_base, laakso, laakso_base, multidiamond, square, TwoPoleGraph};
use freelip::haar::{diamond_bm_bounds, even_level_span_check, haar_witness_bound, multibranch_analysis};
use freelip::lfnorm::{ae_norm, ae_norm_float, lip_dual, lip_dual_lp};
use freelip::linalg::{rank_of, same_span, Matrix};
use freelip::metric::{graph_metric, MetricSpace, Molecule};
use freelip::numeric::{fmt_q, q, qi, Q};
use freelip::projection::{is_projection, minimal_projection_lp, orthogonal_projection};
use freelip::random::{random_edge_vector, random_metric, random_molecule, random_tree, rng, Rng64};
use freelip::recursive::{basis_s, c_type_vectors, delta_m, explicit_graph, generator_set, laakso_nonunique_projection, BaseGraphProfile};
use freelip::witness::{witness, DEFAULT_ENTRY_CAP};

const FLOAT_TOL: f64 = 1e-7;
const EMBED_TOL: f64 = 1e-9;
const TREE_BUDGET: Duration = Duration::from_secs(60);
const SANDWICH_BUDGET: Duration = Duration::from_secs(300);
/// Largest explicit level for the dense witness recomputation.
const DENSE_WITNESS_EDGES: usize = 50_000;

type Outcome = (bool, String);

fn len(r: &mut Rng64, lo: usize, hi: usize) -> usize {
    r.gen_range(lo..=hi)
}

fn weighted_l1(g: &TwoPoleGraph, x: &[Q]) -> Q {
    g.edges().iter().zip(x).map(|(e, v)| &e.weight * v.abs()).sum()
}

/// Mass of `m` in the subtree hanging below each edge, times the edge weight.
fn tree_flow_norm(t: &TwoPoleGraph, m: &Molecule) -> Q {
    let n = t.vertex_count();
    let adj = t.undirected_adjacency();
    let root = t.bottom_index();
    let mut parent = vec![None; n];
    let mut order = vec![root];
    let mut seen = vec![false; n];
    seen[root] = true;
    let mut i = 0;
    while i < order.len() {
        let x = order[i];
        i += 1;
        for &(y, e) in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                parent[y] = Some((x, e));
                order.push(y);
            }
        }
    }
    let mut below: Vec<Q> = (0..n).map(|v| m.get(v)).collect();
    let mut total = Q::zero();
    for &v in order.iter().rev() {
        if let Some((p, e)) = parent[v] {
            total += &t.edges()[e].weight * below[v].abs();
            let b = below[v].clone();
            below[p] += b;
        }
    }
    total
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let mut bad = 0;
    for _ in 0..200 {
        let t = random_tree(len(&mut r, 1, 12), &mut r).unwrap();
        let s = graph_metric(&t).unwrap();
        for _ in 0..10 {
            let m = random_molecule(t.vertex_count(), len(&mut r, 2, t.vertex_count()), &mut r);
            let image: Q = freelip::lfnorm::tree_isometry(&t).unwrap().apply(&m).iter().map(|x| x.abs()).sum();
            let (norm, _) = ae_norm(&s, &m).unwrap();
            bad += usize::from(image != norm || norm != tree_flow_norm(&t, &m));
        }
    }
    let el = start.elapsed();
    (bad == 0 && el < TREE_BUDGET, format!("2000 molecules, {bad} mismatches, {:.2}s", el.as_secs_f64()))
}

fn plan_is_feasible(s: &MetricSpace, m: &Molecule, plan: &freelip::lfnorm::TransportPlan) -> bool {
    let mut net = vec![Q::zero(); s.len()];
    let mut cost = Q::zero();
    for (a, b, mass) in &plan.moves {
        if mass.is_negative() {
            return false;
        }
        net[*a] += mass;
        net[*b] -= mass;
        cost += mass * s.d(*a, *b);
    }
    cost == plan.cost && (0..s.len()).all(|v| net[v] == m.get(v))
}

fn is_one_lipschitz(s: &MetricSpace, f: &[Q]) -> bool {
    (0..s.len()).all(|i| (0..s.len()).all(|j| &f[i] - &f[j] <= *s.d(i, j)))
}

fn criterion_2() -> Outcome {
    let mut r = rng(2);
    let mut exact_bad = 0;
    let mut worst_float = 0.0f64;
    for _ in 0..100 {
        let s = random_metric(len(&mut r, 2, 12), &mut r).unwrap();
        let m = random_molecule(s.len(), len(&mut r, 2, s.len()), &mut r);
        let (value, plan) = ae_norm(&s, &m).unwrap();
        let dual = lip_dual(&s, &m, None).unwrap();
        let dual_value: Q = (0..s.len()).map(|v| &dual.f.values[v] * m.get(v)).sum();
        let certified = plan_is_feasible(&s, &m, &plan) && is_one_lipschitz(&s, &dual.f.values) && dual_value == value;
        exact_bad += usize::from(!certified || dual.value != value);
        let fv = ae_norm_float(&s, &m).unwrap();
        let (_, dv): (Vec<f64>, f64) = lip_dual_lp(&s, &m, None).unwrap();
        worst_float = worst_float.max((fv - dv).abs());
    }
    (
        exact_bad == 0 && worst_float <= FLOAT_TOL,
        format!("100 spaces, exact gap nonzero in {exact_bad}, float gap {worst_float:.2e} (tol {FLOAT_TOL:e})"),
    )
}

fn boundary_oracle(g: &TwoPoleGraph, x: &[Q]) -> Molecule {
    let mut b = vec![Q::zero(); g.vertex_count()];
    for (e, v) in x.iter().enumerate() {
        let (t, h) = g.ends(e);
        b[h] += v;
        b[t] -= v;
    }
    Molecule::from_dense(&b).unwrap()
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let graphs = [
        ("D1", diamond(1).unwrap()),
        ("D2", diamond(2).unwrap()),
        ("L1", laakso(1).unwrap()),
        ("L2", laakso(2).unwrap()),
        ("K23", k2n_base(3)),
    ];
    let mut bad = Vec::new();
    for (name, g) in &graphs {
        let s = graph_metric(g).unwrap();
        let z = fundamental_cycle_basis(g).vectors;
        for _ in 0..50 {
            let x = random_edge_vector(g.edge_count(), &mut r);
            let b = boundary_oracle(g, &x);
            let lhs = quotient_norm(g, &x, &z).unwrap();
            let (rhs, _) = ae_norm(&s, &b).unwrap();
            if lhs != rhs || b != boundary(g, &x) || lhs > weighted_l1(g, &x) {
                bad.push(*name);
            }
        }
    }
    (bad.is_empty(), format!("5 graphs x 50 vectors, mismatches {bad:?}"))
}

/// Haar function `index` on `cells` cells: `h_0 = 1`, and `h_{2^j + s}` is
/// `+1` then `-1` on the halves of the `s`-th dyadic interval of level `j`.
fn haar_oracle(index: usize, cells: usize) -> Vec<Q> {
    if index == 0 {
        return vec![Q::one(); cells];
    }
    let j = usize::BITS - 1 - index.leading_zeros();
    let s = index - (1 << j);
    let width = cells >> j;
    let mut v = vec![Q::zero(); cells];
    for c in 0..width {
        v[s * width + c] = if c < width / 2 { Q::one() } else { -Q::one() };
    }
    v
}

fn even_haar_span(n: usize) -> Vec<Vec<Q>> {
    let cells = 4usize.pow(n as u32);
    (0..=(2 * n - 2))
        .step_by(2)
        .flat_map(|j| (1usize << j)..(2usize << j))
        .map(|i| haar_oracle(i, cells))
        .collect()
}

fn criterion_4() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for n in 1..=4 {
        let g = diamond(n).unwrap();
        let z = fundamental_cycle_basis(&g).vectors;
        let h = even_haar_span(n);
        let eq = same_span(&z, &h) && rank_of(&h) == h.len();
        let lib = even_level_span_check(n).unwrap();
        ok &= eq && lib && h.len() == (4usize.pow(n as u32) - 1) / 3;
        details.push(format!("n={n}: dim {} equal={eq}", h.len()));
    }
    (ok, details.join(", "))
}

fn mean_abs(v: &[Q]) -> Q {
    v.iter().map(|x| x.abs()).sum::<Q>() / qi(v.len() as i64)
}

fn criterion_5() -> Outcome {
    let mut ok = true;
    let mut details = Vec::new();
    for n in 1..=5 {
        let cells = 4usize.pow(n as u32);
        let mut f = haar_oracle(0, cells);
        let mut qf = vec![Q::zero(); cells];
        for j in 0..=(2 * n - 2) {
            let h = haar_oracle(1 << j, cells);
            let c = qi(1 << j);
            for (i, hv) in h.iter().enumerate() {
                f[i] += &c * hv;
                if j % 2 == 0 {
                    qf[i] += &c * hv;
                }
            }
        }
        let (fn_, qn) = (mean_abs(&f), mean_abs(&qf));
        let (_, w) = haar_witness_bound(n).unwrap();
        let bound = q(2 * n as i64 + 1, 3);
        ok &= fn_.is_one() && qn >= bound && w.qf_norm == qn && w.f_norm == fn_;
        if n == 2 {
            ok &= qn == q(7, 4) && q(7, 4) >= q(5, 3);
        }
        details.push(format!("n={n}: {}", fmt_q(&qn)));
    }
    (ok, details.join(", "))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut details = Vec::new();
    for n in 1..=3 {
        let b = diamond_bm_bounds(n).unwrap();
        let (_, w) = haar_witness_bound(n).unwrap();
        let bound = q(2 * n as i64 + 1, 3);
        ok &= b.upper <= qi(4 * n as i64 + 4) && b.lower >= bound && w.qf_norm >= bound && b.upper >= b.lower;
        details.push(format!("n={n}: [{}, {}]", fmt_q(&b.lower), fmt_q(&b.upper)));
    }
    let el = start.elapsed();
    ok &= el < SANDWICH_BUDGET;
    (ok, format!("{}, {:.2}s", details.join(", "), el.as_secs_f64()))
}

fn criterion_7() -> Outcome {
    let mut ok = true;
    let mut details = Vec::new();
    for (n, k) in [(1, 3), (2, 3), (1, 4), (2, 4)] {
        let g = multidiamond(n, k).unwrap();
        let m = g.edge_count();
        let pz = orthogonal_projection(&fundamental_cycle_basis(&g).vectors, m).unwrap();
        let p = Matrix::identity(m).sub(&pz);
        let sym = p == p.transpose();
        let idem = p.mul(&p) == p;
        let col: Q = p.col(0).iter().map(|x| x.abs()).sum();
        let bound = q((k as i64 - 1) * n as i64, 2 * k as i64);
        let rep = multibranch_analysis(n, k).unwrap();
        let this = sym && idem && col >= bound && rep.witness_value == col && rep.projection_checked == Some(true);
        ok &= this;
        details.push(format!("({n},{k}): {} >= {}", fmt_q(&col), fmt_q(&bound)));
    }
    (ok, details.join(", "))
}

fn criterion_8() -> Outcome {
    let mut ok = true;
    let mut details = Vec::new();
    for (name, g, target, exact_target) in [
        ("D1", diamond(1).unwrap(), 1.0, true),
        ("L1", laakso(1).unwrap(), 1.0, true),
        ("D2", diamond(2).unwrap(), 5.0 / 3.0, false),
    ] {
        let z = fundamental_cycle_basis(&g).vectors;
        let mp = minimal_projection_lp(&z, g.edge_count()).unwrap();
        let valid = is_projection(&mp.projection) && z.iter().all(|v| mp.projection.mul_vec(v) == *v);
        let norm_ok = mp.projection.l1_norm() == mp.lambda && mp.lambda_float <= freelip::numeric::to_f64(&mp.lambda) + FLOAT_TOL;
        let v = mp.lambda_float;
        let value_ok = if exact_target { (v - target).abs() <= FLOAT_TOL } else { v >= target - FLOAT_TOL };
        ok &= valid && norm_ok && value_ok;
        details.push(format!("{name}: {v:.9}"));
    }
    (ok, details.join(", "))
}

fn projected(e: &EmbeddingReport, m: &Molecule) -> Molecule {
    let mut out = Vec::new();
    for i in 0..e.k {
        let c = m.get(e.y[i]);
        if !c.is_zero() {
            out.push((e.y[i], c.clone()));
            out.push((e.x[i], -c));
        }
    }
    Molecule::new(out).unwrap()
}

/// `max_{p≠q} ‖P((δ_p − δ_q)/d(p,q))‖`: the unit ball is the hull of these.
fn projection_norm_oracle(s: &MetricSpace, e: &EmbeddingReport) -> Q {
    let mut best = Q::zero();
    for a in 0..s.len() {
        for b in a + 1..s.len() {
            let m = Molecule::elementary(a, b).unwrap().scale(&(Q::one() / s.d(a, b)));
            let (v, _) = ae_norm(s, &projected(e, &m)).unwrap();
            if v > best {
                best = v;
            }
        }
    }
    best
}

fn combination(e: &EmbeddingReport, a: &[Q]) -> Molecule {
    let mut out = Vec::new();
    for i in 0..e.k {
        let c = &a[i] / &e.d[i];
        out.push((e.y[i], c.clone()));
        out.push((e.x[i], -c));
    }
    Molecule::new(out).unwrap()
}

fn prim_weight(s: &MetricSpace) -> Q {
    let n = s.len();
    let mut inside = vec![false; n];
    let mut best: Vec<Option<Q>> = vec![None; n];
    best[0] = Some(Q::zero());
    let mut total = Q::zero();
    for _ in 0..n {
        let v = (0..n).filter(|&v| !inside[v] && best[v].is_some()).min_by(|&a, &b| best[a].cmp(&best[b])).unwrap();
        inside[v] = true;
        total += best[v].clone().unwrap();
        for w in 0..n {
            if !inside[w] && best[w].as_ref().map_or(true, |c| s.d(v, w) < c) {
                best[w] = Some(s.d(v, w).clone());
            }
        }
    }
    total
}

fn criterion_9() -> Outcome {
    let mut r = rng(9);
    let mut worst_p = Q::zero();
    let mut worst_lower = Q::one();
    let mut failures = 0;
    for _ in 0..100 {
        let s = random_metric(len(&mut r, 2, 30), &mut r).unwrap();
        let e = half_dim_embedding(&s).unwrap();
        let mst: Q = kruskal_mst(&s).iter().map(|&(a, b)| s.d(a, b).clone()).sum();
        let pn = projection_norm_oracle(&s, &e);
        let mut sampled_ok = true;
        for _ in 0..10 {
            let a: Vec<Q> = (0..e.k).map(|_| q(r.gen_range(-9..=9), r.gen_range(1..=3))).collect();
            let l1: Q = a.iter().map(|x| x.abs()).sum();
            let (v, _) = ae_norm(&s, &combination(&e, &a)).unwrap();
            sampled_ok &= v >= &e.lower_eq * &l1 && v <= &e.upper_eq * &l1;
        }
        let lo = freelip::numeric::to_f64(&e.lower_eq);
        let hi = freelip::numeric::to_f64(&e.upper_eq);
        let this = e.k >= s.len() / 2
            && mst == prim_weight(&s)
            && pn == e.proj_norm
            && freelip::numeric::to_f64(&pn) <= 2.0 + EMBED_TOL
            && lo >= 0.5 - EMBED_TOL
            && hi <= 1.0
            && lo <= hi
            && sampled_ok;
        failures += usize::from(!this);
        if pn > worst_p {
            worst_p = pn;
        }
        if e.lower_eq < worst_lower {
            worst_lower = e.lower_eq.clone();
        }
    }
    (failures == 0, format!("100 spaces, {failures} failing, max ||P|| {}, min lower {}", fmt_q(&worst_p), fmt_q(&worst_lower)))
}

fn criterion_10() -> Outcome {
    let mut r = rng(10);
    let mut ok = true;
    let mut details = Vec::new();
    for n in 1..=3 {
        let (s, e) = diamond_top_level(n).unwrap();
        let pn = projection_norm_oracle(&s, &e);
        // a single norming functional per sign pattern forces ‖Σ a_i u_i‖ = Σ|a_i|
        let signs: Vec<Vec<Q>> = if e.k <= 8 {
            (0..1u32 << e.k).map(|mask| (0..e.k).map(|i| if mask >> i & 1 == 1 { -Q::one() } else { Q::one() }).collect()).collect()
        } else {
            (0..200).map(|_| (0..e.k).map(|_| if r.gen_bool(0.5) { -Q::one() } else { Q::one() }).collect()).collect()
        };
        let iso = signs.iter().all(|a| ae_norm(&s, &combination(&e, a)).unwrap().0 == qi(e.k as i64));
        let this = pn.is_one() && e.proj_norm.is_one() && e.lower_eq.is_one() && iso && e.k == 2 * 4usize.pow(n as u32 - 1);
        ok &= this;
        details.push(format!("n={n}: k={} ||P||={} C={}", e.k, fmt_q(&pn), fmt_q(&e.lower_eq)));
    }
    (ok, details.join(", "))
}

/// `max{max_{i≠j} (d_i + d_j)/d(y_i, y_j), 1}` with `d_i = d(y_i, A)`.
fn selection_constant(s: &MetricSpace, y: &[usize], a: &[usize]) -> Q {
    let d: Vec<Q> = y.iter().map(|&v| a.iter().map(|&w| s.d(v, w).clone()).min().unwrap()).collect();
    let mut c = Q::one();
    for i in 0..y.len() {
        for j in i + 1..y.len() {
            let v = (&d[i] + &d[j]) / s.d(y[i], y[j]);
            if v > c {
                c = v;
            }
        }
    }
    c
}

fn criterion_11() -> Outcome {
    let mut ok = true;
    let mut details = Vec::new();
    for (n, m) in [(2, 1), (3, 1), (3, 2)] {
        let (g, a) = diamond_anm(n, m).unwrap();
        let s = graph_metric(&g).unwrap();
        let y: Vec<usize> = (0..g.vertex_count()).filter(|v| !a.contains(v)).collect();
        let c = selection_constant(&s, &y, &a);
        let lib = freelip::embed::large_embedding(&s, &y).unwrap().c_constant;
        let bound = qi(1 << (n - m));
        ok &= c <= bound && lib == c && a.len() == 2 * 4usize.pow(m as u32 - 1);
        // for comparison only: the same selection against all of V(D_m)
        let mut coarse = vec![g.bottom_index(), g.top_index()];
        coarse.extend((1..=m).flat_map(|l| diamond_step_vertices(&g, l)));
        let rest: Vec<usize> = (0..g.vertex_count()).filter(|v| !coarse.contains(v)).collect();
        let c_coarse = selection_constant(&s, &rest, &coarse);
        details.push(format!(
            "({n},{m}): C={} vs {} [against V(D_m), |A|={}: C={}]",
            fmt_q(&c),
            fmt_q(&bound),
            coarse.len(),
            fmt_q(&c_coarse)
        ));
    }
    (ok, details.join(", "))
}

fn criterion_12() -> Outcome {
    let mut ok = true;
    let mut details = Vec::new();
    for (name, base, alpha) in [("square", square(), qi(1)), ("K23", k2n_base(3), q(4, 3)), ("L1", laakso_base(), q(1, 2))] {
        let p = BaseGraphProfile::new(&base).unwrap();
        ok &= p.alpha == alpha;
        for r in 1..=3 {
            let w = witness(&p, r, None, DEFAULT_ENTRY_CAP).unwrap();
            let lower = Q::one() + &alpha * qi(r as i64 - 1) / qi(2);
            let mut this = w.norm_sum.is_one() && w.norm_c >= lower && w.c_is_cycle;
            let edges = p.edge_count().pow(w.level() as u32);
            let dense = if edges <= DENSE_WITNESS_EDGES {
                let g = explicit_graph(&p, w.level()).unwrap();
                let unit: Q = delta_m(&p, w.level()).iter().map(|x| x.abs()).sum();
                let c = w.c.to_dense(&p).unwrap();
                let s: Vec<Q> = c.iter().zip(&w.a.to_dense(&p).unwrap()).map(|(x, y)| x + y).collect();
                let sum_norm = s.iter().map(|x| x.abs()).sum::<Q>() / &unit;
                let c_norm = c.iter().map(|x| x.abs()).sum::<Q>() / &unit;
                this &= sum_norm.is_one() && c_norm == w.norm_c && boundary_oracle(&g, &c).is_zero();
                "dense"
            } else {
                "hierarchical"
            };
            ok &= this;
            details.push(format!("{name} r={r}: {} ({dense})", fmt_q(&w.norm_c)));
        }
    }
    (ok, details.join(", "))
}

fn criterion_13() -> Outcome {
    let mut ok = true;
    let mut details = Vec::new();
    for (name, base) in [("D2", square()), ("L2", laakso_base())] {
        let p = BaseGraphProfile::new(&base).unwrap();
        let g = explicit_graph(&p, 2).unwrap();
        let z = fundamental_cycle_basis(&g).vectors;
        let proj = orthogonal_projection(&z, g.edge_count()).unwrap();
        ok &= same_span(&z, &basis_s(&p, 2).unwrap().plain());
        let cs = c_type_vectors(&p, 2);
        let killed = cs.iter().filter(|(_, f)| proj.mul_vec(f).iter().all(Zero::is_zero)).count();
        ok &= !cs.is_empty() && killed == cs.len() && cs.iter().all(|(_, f)| f.iter().any(|x| !x.is_zero()));
        details.push(format!("{name}: {killed}/{}", cs.len()));
    }
    (ok, details.join(", "))
}

fn criterion_14() -> Outcome {
    let np = laakso_nonunique_projection().unwrap();
    let p = &np.report.operator;
    let p_base = BaseGraphProfile::new(&laakso_base()).unwrap();
    let g = explicit_graph(&p_base, 2).unwrap();
    let z = fundamental_cycle_basis(&g).vectors;
    let orth = orthogonal_projection(&z, g.edge_count()).unwrap();
    let idem = p.mul(p) == *p;
    let range = z.iter().all(|v| p.mul_vec(v) == *v) && p.rank() == z.len();
    let gens = generator_set(&p_base, 2);
    let commutes = gens.iter().all(|(_, s)| {
        let m = s.to_matrix();
        m.mul(p) == p.mul(&m)
    });
    let differs = *p != orth;
    (
        idem && range && commutes && differs,
        format!("idempotent={idem}, range=Z(L2) {range}, commutes with {} generators={commutes}, differs={differs}", gens.len()),
    )
}

fn criterion_15() -> Outcome {
    let g = diamond(2).unwrap();
    let cycles = greedy_cycle_packing(&g);
    let mut used = vec![false; g.edge_count()];
    let disjoint = cycles.iter().flatten().all(|&e| !std::mem::replace(&mut used[e], true));
    let closed = cycles.iter().all(|c| {
        let mut deg = vec![0usize; g.vertex_count()];
        for &e in c {
            let (a, b) = g.ends(e);
            deg[a] += 1;
            deg[b] += 1;
        }
        !c.is_empty() && deg.iter().all(|&d| d == 0 || d == 2)
    });
    (cycles.len() >= 4 && disjoint && closed, format!("greedy packing of D2: {} cycles, disjoint={disjoint}, simple={closed}", cycles.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 15] = [
        ("tree isometry", criterion_1),
        ("duality", criterion_2),
        ("quotient identity", criterion_3),
        ("haar identification", criterion_4),
        ("haar lower bound", criterion_5),
        ("diamond sandwich", criterion_6),
        ("multibranching", criterion_7),
        ("minimal projection LPs", criterion_8),
        ("MST embedding", criterion_9),
        ("diamond sharpening", criterion_10),
        ("diamond complement selection", criterion_11),
        ("recursive witness", criterion_12),
        ("annihilation", criterion_13),
        ("non-uniqueness", criterion_14),
        ("packing sanity", criterion_15),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (pass, detail) = match std::panic::catch_unwind(f) {
            Ok(o) => o,
            Err(_) => (false, "panicked".to_string()),
        };
        println!("{} criterion {:>2} ({name}): {detail}", if pass { "PASS" } else { "FAIL" }, i + 1);
        if !pass {
            failed.push(i + 1);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
