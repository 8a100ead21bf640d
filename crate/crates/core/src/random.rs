//! Seeded random instances. Every draw goes through one `ChaCha8Rng`.

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::graph::{Edge, TwoPoleGraph};
use crate::metric::{MetricSpace, Molecule};
use crate::numeric::{q, Q};

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

fn positive_rational(r: &mut Rng64) -> Q {
    q(r.gen_range(1..=20), r.gen_range(1..=3))
}

fn signed_rational(r: &mut Rng64) -> Q {
    q(r.gen_range(-12..=12), r.gen_range(1..=4))
}

/// Shortest-path metric of a complete graph with random rational weights.
pub fn random_metric(n: usize, r: &mut Rng64) -> Result<MetricSpace> {
    let mut d = vec![vec![Q::zero(); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = positive_rational(r);
            d[i][j] = w.clone();
            d[j][i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = &d[i][k] + &d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    MetricSpace::from_matrix(d)
}

/// Random recursive tree on `edges + 1` vertices with random weights,
/// rooted at the bottom; the top is the last vertex.
pub fn random_tree(edges: usize, r: &mut Rng64) -> Result<TwoPoleGraph> {
    let names: Vec<String> = (0..=edges).map(|i| format!("v{i}")).collect();
    let es = (1..=edges)
        .map(|i| {
            let parent = r.gen_range(0..i);
            Edge { id: format!("e{i}"), tail: names[parent].clone(), head: names[i].clone(), weight: positive_rational(r) }
        })
        .collect();
    let top = names[edges].clone();
    TwoPoleGraph::new(names, es, "v0", &top)
}

/// Molecule on up to `support` random points with random rational weights.
pub fn random_molecule(n: usize, support: usize, r: &mut Rng64) -> Molecule {
    let mut pts: Vec<usize> = (0..n).collect();
    pts.shuffle(r);
    let pts = &pts[..support.clamp(2, n.max(2)).min(n)];
    let mut coeffs: Vec<(usize, Q)> = pts[1..].iter().map(|&p| (p, signed_rational(r))).collect();
    let total = coeffs.iter().fold(Q::zero(), |s, (_, c)| s + c);
    coeffs.push((pts[0], -total));
    Molecule::new(coeffs).expect("zero sum by construction")
}

pub fn random_edge_vector(m: usize, r: &mut Rng64) -> Vec<Q> {
    (0..m).map(|_| signed_rational(r)).collect()
}
