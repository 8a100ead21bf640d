//! The consolidated claims table behind `freelip reproduce`.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::cycles::{boundary, fundamental_cycle_basis, greedy_cycle_packing, mu, quotient_norm};
use crate::embed::{diamond_anm, diamond_top_level, half_dim_embedding, large_embedding};
use crate::error::Result;
use crate::graph::{diamond, k2n_base, laakso, laakso_base, square, TwoPoleGraph};
use crate::haar::{diamond_bm_bounds, even_level_span_check, haar_witness_bound, multibranch_analysis};
use crate::lfnorm::{ae_norm, lip_dual, tree_norms};
use crate::metric::graph_metric;
use crate::numeric::{fmt_q, q, qi, Q};
use crate::projection::{minimal_projection_lp, orthogonal_projection};
use crate::random::{random_edge_vector, random_metric, random_molecule, random_tree, rng};
use crate::recursive::{annihilation_check, basis_s, generator_set, laakso_nonunique_projection, BaseGraphProfile};
use crate::witness::{witness, DEFAULT_ENTRY_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub claim: String,
    pub stated: String,
    pub computed: String,
    pub status: Status,
}

struct Table {
    rows: Vec<Row>,
}

impl Table {
    /// Runs one claim; an error becomes an `ERROR` row and the table goes on.
    fn row(&mut self, claim: impl Into<String>, stated: impl Into<String>, f: impl FnOnce() -> Result<(String, bool)>) {
        let (computed, status) = match f() {
            Ok((c, true)) => (c, Status::Pass),
            Ok((c, false)) => (c, Status::Fail),
            Err(e) => (e.to_string(), Status::Error),
        };
        self.rows.push(Row { claim: claim.into(), stated: stated.into(), computed, status });
    }
}

fn graph_for(name: &str) -> Result<TwoPoleGraph> {
    match name {
        "D1" => diamond(1),
        "D2" => diamond(2),
        "L1" => laakso(1),
        "L2" => laakso(2),
        _ => Ok(k2n_base(3)),
    }
}

/// Runs every claim with the given seed. Rows never abort the table.
pub fn reproduce_table(seed: u64) -> Vec<Row> {
    let mut t = Table { rows: Vec::new() };
    let mut r = rng(seed);

    t.row("Prop 2.1 tree isometry (40 trees x 5 molecules)", "equal", || {
        let mut bad = 0;
        for _ in 0..40 {
            let tree = random_tree(r_len(&mut r, 1, 12), &mut r)?;
            for _ in 0..5 {
                let m = random_molecule(tree.vertex_count(), 4, &mut r);
                let (a, b) = tree_norms(&tree, &m)?;
                bad += usize::from(a != b);
            }
        }
        Ok((format!("{bad} mismatches"), bad == 0))
    });

    t.row("Kantorovich duality (30 spaces)", "gap 0", || {
        let mut worst = Q::zero();
        for _ in 0..30 {
            let s = random_metric(r_len(&mut r, 2, 12), &mut r)?;
            let m = random_molecule(s.len(), s.len(), &mut r);
            let (v, _) = ae_norm(&s, &m)?;
            let d = lip_dual(&s, &m, None)?;
            let gap = num_traits::Signed::abs(&(&v - &d.value));
            if gap > worst {
                worst = gap;
            }
        }
        Ok((format!("max gap {}", fmt_q(&worst)), worst.is_zero()))
    });

    for name in ["D1", "D2", "L1", "L2", "K23"] {
        t.row(format!("Quotient identity, {name}"), "equal", || {
            let g = graph_for(name)?;
            let s = graph_metric(&g)?;
            let z = fundamental_cycle_basis(&g).vectors;
            let mut bad = 0;
            for _ in 0..10 {
                let x = random_edge_vector(g.edge_count(), &mut r);
                let lhs = quotient_norm(&g, &x, &z)?;
                let (rhs, _) = ae_norm(&s, &boundary(&g, &x))?;
                bad += usize::from(lhs != rhs);
            }
            Ok((format!("{bad} mismatches"), bad == 0))
        });
    }

    for n in 1..=4 {
        t.row(format!("Lemma 6.1 span, n={n}"), "Z(D_n) = even levels", || {
            let ok = even_level_span_check(n)?;
            let g = diamond(n)?;
            let dim = mu(&g);
            let expected = (4usize.pow(n as u32) - 1) / 3;
            Ok((format!("equal={ok}, dim={dim}"), ok && dim == expected))
        });
    }

    for n in 1..=5 {
        t.row(format!("Lemma 6.3, n={n}"), format!(">= {}", fmt_q(&q(2 * n as i64 + 1, 3))), || {
            let (_, w) = haar_witness_bound(n)?;
            Ok((format!("||f||={}, ||Qf||={}", fmt_q(&w.f_norm), fmt_q(&w.qf_norm)), w.f_norm.is_one() && w.qf_norm >= w.bound))
        });
    }

    for n in 1..=3 {
        let stated = format!("[{}, {}]", fmt_q(&q(2 * n as i64 + 1, 3)), 4 * n + 4);
        t.row(format!("Theorem 6.4, n={n}"), stated, || {
            let b = diamond_bm_bounds(n)?;
            let exact = if b.t_inv_exact { "exact" } else { "l1 bound" };
            let c = format!("[{}, {}] ({exact})", fmt_q(&b.lower), fmt_q(&b.upper));
            Ok((c, b.upper <= b.stated_upper && b.lower <= b.upper))
        });
    }

    for (n, k) in [(1, 3), (2, 3), (1, 4), (2, 4)] {
        let bound = q((k as i64 - 1) * n as i64, 2 * k as i64);
        t.row(format!("Theorem 6.9, (n,k)=({n},{k})"), format!(">= {}", fmt_q(&bound)), || {
            let m = multibranch_analysis(n, k)?;
            let proj = m.projection_checked.unwrap_or(false);
            Ok((format!("{} (projection={proj})", fmt_q(&m.witness_value)), m.witness_value >= bound && proj))
        });
    }

    for (name, stated, lo, hi) in [("D1", "1", 1.0, 1.0), ("L1", "1", 1.0, 1.0), ("D2", ">= 5/3", 5.0 / 3.0, f64::INFINITY)] {
        t.row(format!("Minimal projection {name}"), stated, || {
            let g = graph_for(name)?;
            let z = fundamental_cycle_basis(&g).vectors;
            let mp = minimal_projection_lp(&z, g.edge_count())?;
            let v = mp.lambda_float;
            Ok((format!("{v:.9} (exact rounded {})", fmt_q(&mp.lambda)), v >= lo - 1e-7 && v <= hi + 1e-7))
        });
    }

    t.row("Theorem 3.2 (20 spaces)", "||P|| <= 2, k >= n/2", || {
        let mut worst = Q::zero();
        let mut ok = true;
        for _ in 0..20 {
            let s = random_metric(r_len(&mut r, 2, 30), &mut r)?;
            let e = half_dim_embedding(&s)?;
            ok &= e.k >= s.len() / 2 && e.proj_norm <= qi(2) && e.lower_eq >= q(1, 2) && e.upper_eq <= Q::one();
            if e.proj_norm > worst {
                worst = e.proj_norm.clone();
            }
        }
        Ok((format!("max ||P|| = {}", fmt_q(&worst)), ok))
    });

    for n in 1..=3 {
        t.row(format!("Theorem 3.5, n={n}"), "||P|| = 1, C = 1", || {
            let (_, e) = diamond_top_level(n)?;
            let ok = e.proj_norm.is_one() && e.lower_eq.is_one() && e.k == 2 * 4usize.pow(n as u32 - 1);
            Ok((format!("||P||={}, lower={}, k={}", fmt_q(&e.proj_norm), fmt_q(&e.lower_eq), e.k), ok))
        });
    }

    for (n, m) in [(2, 1), (3, 1), (3, 2)] {
        let bound = 1i64 << (n - m);
        t.row(format!("Corollary 3.9, (n,m)=({n},{m})"), format!("C <= {bound}"), || {
            let (g, a) = diamond_anm(n, m)?;
            let s = graph_metric(&g)?;
            let y: Vec<usize> = (0..g.vertex_count()).filter(|v| !a.contains(v)).collect();
            let e = large_embedding(&s, &y)?;
            Ok((format!("C = {}", fmt_q(&e.c_constant)), e.c_constant <= qi(bound)))
        });
    }

    for (name, base) in [("square", square()), ("K23", k2n_base(3)), ("L1", laakso_base())] {
        let p = BaseGraphProfile::new(&base);
        for rr in 1..=3 {
            t.row(format!("Theorem 4.7 witness, {name}, r={rr}"), "||C+A|| = 1, ||C|| >= 1 + a(r-1)/2", || {
                let p = p.as_ref().map_err(Clone::clone)?;
                let w = witness(p, rr, None, DEFAULT_ENTRY_CAP)?;
                let c = format!("||C+A||={}, ||C||={}, level={}", fmt_q(&w.norm_sum), fmt_q(&w.norm_c), w.level());
                Ok((c, w.verified()))
            });
        }
    }

    for (name, base) in [("D2", square()), ("L2", laakso_base())] {
        t.row(format!("Lemma 4.13 annihilation, {name}"), "P c = 0", || {
            let p = BaseGraphProfile::new(&base)?;
            let b = basis_s(&p, 2)?.plain();
            let proj = orthogonal_projection(&b, p.edge_count().pow(2))?;
            let rep = annihilation_check(&proj, &p, 2)?;
            Ok((format!("{} checked, {} violations", rep.checked, rep.violations.len()), rep.violations.is_empty()))
        });
    }

    t.row("Prop 5.1", "non-orthogonal invariant projection", || {
        let np = laakso_nonunique_projection()?;
        let gens = generator_set(&BaseGraphProfile::new(&laakso_base())?, 2).len();
        let inv = np.report.invariant_under.len() == gens;
        let ok = np.report.is_projection && inv && !np.max_gap.is_zero();
        Ok((format!("max gap {}, projection={}, invariant={inv}", fmt_q(&np.max_gap), np.report.is_projection), ok))
    });

    t.row("Greedy packing D2", ">= 4", || {
        let g = diamond(2)?;
        let cycles = greedy_cycle_packing(&g);
        let mut used = vec![false; g.edge_count()];
        let disjoint = cycles.iter().flatten().all(|&e| !std::mem::replace(&mut used[e], true));
        Ok((format!("{} cycles, disjoint={disjoint}", cycles.len()), cycles.len() >= 4 && disjoint))
    });

    t.rows
}

fn r_len(r: &mut crate::random::Rng64, lo: usize, hi: usize) -> usize {
    use rand::Rng;
    r.gen_range(lo..=hi)
}

pub fn rows_to_csv(rows: &[Row]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| crate::error::Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| crate::error::Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}
