//! The growing pair `(C_r, A_r)` on `B_{n(r)}` whose sum has norm one while
//! `‖C_r‖₁ ≥ 1 + α(r−1)/2`.
//!
//! Vectors are kept hierarchically: an entry at a digit prefix `π` of length
//! `d` stands for `coef · Δ_{n−d}` on the copy of `B_{n−d}` at `π`. Applying
//! `E_n` then only bumps `n`. The running sum `C + A` is kept explicitly at
//! the finest level since every step touches all of its support.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde_json::json;

use crate::cycles::fundamental_cycle_basis;
use crate::error::{Error, Result};
use crate::linalg::l1;
use crate::numeric::{fmt_q, to_f64, Q};
use crate::recursive::BaseGraphProfile;

/// Cap on explicit entries kept for `C + A`.
pub const DEFAULT_ENTRY_CAP: usize = 5_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct HierVector {
    pub n: usize,
    pub entries: BTreeMap<Vec<u8>, Q>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum VertexKey {
    Bottom,
    Top,
    Inner(Vec<u8>, usize),
}

impl HierVector {
    pub fn zero(n: usize) -> Self {
        HierVector { n, entries: BTreeMap::new() }
    }

    pub fn add_at(&mut self, key: Vec<u8>, v: Q) {
        let sum = self.entries.get(&key).cloned().unwrap_or_else(Q::zero) + v;
        if sum.is_zero() {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, sum);
        }
    }

    pub fn plus(&self, other: &HierVector) -> HierVector {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (k, v) in &other.entries {
            let slot = out.entries.entry(k.clone()).or_insert_with(Q::zero);
            *slot += v;
        }
        out.entries.retain(|_, v| !v.is_zero());
        out
    }

    pub fn norm(&self, p: &BaseGraphProfile) -> Q {
        let entries: Vec<(&Vec<u8>, &Q)> = self.entries.iter().collect();
        norm_rec(&entries, 0, Q::zero(), p)
    }

    /// Boundary as a map from vertices of `B_n` to net inflow.
    fn boundary(&self, p: &BaseGraphProfile) -> BTreeMap<VertexKey, Q> {
        let dq = Q::from_integer((p.d as i64).into());
        let mut out: BTreeMap<VertexKey, Q> = BTreeMap::new();
        for (k, v) in &self.entries {
            let scale = v / num_traits::pow(dq.clone(), self.n - k.len());
            let (t, h) = copy_ends(p, k);
            *out.entry(h).or_insert_with(Q::zero) += &scale;
            *out.entry(t).or_insert_with(Q::zero) -= &scale;
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    pub fn is_cycle(&self, p: &BaseGraphProfile) -> bool {
        self.boundary(p).is_empty()
    }

    /// Dense vector on the explicit `B_n`, edges in digit order.
    pub fn to_dense(&self, p: &BaseGraphProfile) -> Result<Vec<Q>> {
        let e = p.edge_count();
        let len = e
            .checked_pow(self.n as u32)
            .filter(|&l| l <= crate::graph::edge_cap())
            .ok_or_else(|| Error::ResourceLimit(format!("B_{} exceeds the edge cap", self.n)))?;
        let mut out = vec![Q::zero(); len];
        let mut digits = vec![0u8; self.n];
        for (idx, slot) in out.iter_mut().enumerate() {
            let mut r = idx;
            for i in (0..self.n).rev() {
                digits[i] = (r % e) as u8;
                r /= e;
            }
            let mut acc = Q::zero();
            for d in 0..=self.n {
                if let Some(c) = self.entries.get(&digits[..d]) {
                    acc += c * digits[d..].iter().fold(Q::one(), |s, &x| s * &p.delta[x as usize]);
                }
            }
            *slot = acc;
        }
        Ok(out)
    }
}

fn norm_rec(entries: &[(&Vec<u8>, &Q)], depth: usize, inherited: Q, p: &BaseGraphProfile) -> Q {
    let mut c = inherited;
    let mut i = 0;
    while i < entries.len() && entries[i].0.len() == depth {
        c += entries[i].1;
        i += 1;
    }
    let rest = &entries[i..];
    if rest.is_empty() {
        return c.abs();
    }
    let mut total = Q::zero();
    let mut j = 0;
    for f in 0..p.edge_count() {
        let start = j;
        while j < rest.len() && rest[j].0[depth] as usize == f {
            j += 1;
        }
        let child = c.clone() * &p.delta[f];
        if start == j {
            total += child.abs();
        } else {
            total += norm_rec(&rest[start..j], depth + 1, child, p);
        }
    }
    total
}

/// Tail and head of the copy at `prefix`, as vertices of the whole graph.
fn copy_ends(p: &BaseGraphProfile, prefix: &[u8]) -> (VertexKey, VertexKey) {
    let Some((&last, parent)) = prefix.split_last() else {
        return (VertexKey::Bottom, VertexKey::Top);
    };
    let (t, h) = p.base.ends(last as usize);
    let resolve = |v: usize| {
        if v == p.base.bottom_index() {
            copy_ends(p, parent).0
        } else if v == p.base.top_index() {
            copy_ends(p, parent).1
        } else {
            VertexKey::Inner(parent.to_vec(), v)
        }
    };
    (resolve(t), resolve(h))
}

#[derive(Debug, Clone)]
pub struct Witness {
    pub r: usize,
    /// `n(1), …, n(r)`.
    pub levels: Vec<usize>,
    /// `t` used in each round after the first.
    pub t_values: Vec<usize>,
    pub c: HierVector,
    pub a: HierVector,
    pub norm_c: Q,
    pub norm_sum: Q,
    /// `1 + α(r−1)/2`.
    pub lower_bound: Q,
    pub c_is_cycle: bool,
    pub explicit_entries: usize,
}

impl Witness {
    pub fn level(&self) -> usize {
        *self.levels.last().unwrap()
    }

    pub fn verified(&self) -> bool {
        self.norm_sum == Q::one() && self.c_is_cycle && self.norm_c >= self.lower_bound
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "schema": crate::SCHEMA,
            "r": self.r,
            "level": self.level(),
            "levels": self.levels,
            "t": self.t_values,
            "norm_C": fmt_q(&self.norm_c),
            "norm_C_float": to_f64(&self.norm_c),
            "norm_sum": fmt_q(&self.norm_sum),
            "lower_bound": fmt_q(&self.lower_bound),
            "C_in_cycle_space": self.c_is_cycle,
            "verified": self.verified(),
            "explicit_entries": self.explicit_entries,
        })
    }
}

/// Smallest `t ≥ 0` with `‖C‖/2^t < α/4`.
pub fn minimal_t(norm_c: &Q, alpha: &Q) -> usize {
    let target = alpha / Q::from_integer(4.into());
    let mut t = 0;
    let mut v = norm_c.clone();
    while v >= target {
        v /= Q::from_integer(2.into());
        t += 1;
    }
    t
}

/// Runs `r` rounds with the minimal `t`, or with `schedule[i]` for round
/// `i + 2` where given. Schedule entries below the minimal `t` are rejected.
pub fn witness(p: &BaseGraphProfile, r: usize, schedule: Option<&[usize]>, entry_cap: usize) -> Result<Witness> {
    build(p, r, schedule, entry_cap, true)
}

/// Same construction with any schedule, including `t` below the minimum.
/// The norm identity and cycle membership still hold; the lower bound need not.
pub fn witness_unchecked(p: &BaseGraphProfile, r: usize, schedule: &[usize]) -> Result<Witness> {
    build(p, r, Some(schedule), DEFAULT_ENTRY_CAP, false)
}

fn build(p: &BaseGraphProfile, r: usize, schedule: Option<&[usize]>, cap: usize, enforce: bool) -> Result<Witness> {
    if r == 0 {
        return Err(Error::Invalid("r must be at least 1".into()));
    }
    let e = p.edge_count();
    if e > u8::MAX as usize {
        return Err(Error::ResourceLimit("base graph has too many edges".into()));
    }
    let s1 = fundamental_cycle_basis(&p.base).vectors;
    let first = s1.first().ok_or(Error::TrivialCycleSpace)?;
    let scale = l1(first);
    let mut n = 1;
    let mut c = HierVector::zero(n);
    let mut sum: BTreeMap<Vec<u8>, Q> = BTreeMap::new();
    for (f, v) in first.iter().enumerate() {
        if !v.is_zero() {
            c.entries.insert(vec![f as u8], v / &scale);
            sum.insert(vec![f as u8], v / &scale);
        }
    }
    let mut a = HierVector::zero(n);
    let mut levels = vec![1];
    let mut t_values = Vec::new();
    let plus_c: Vec<Q> = p.delta.iter().zip(&p.c).map(|(x, y)| x + y).collect();
    let plus_d: Vec<Q> = p.delta.iter().zip(&p.dvec).map(|(x, y)| x + y).collect();
    let mut norm_c = c.norm(p);
    for round in 2..=r {
        let tmin = minimal_t(&norm_c, &p.alpha);
        let t = match schedule.and_then(|s| s.get(round - 2)) {
            Some(&t) if enforce && t < tmin => {
                return Err(Error::Invalid(format!("t = {t} in round {round} is below the minimum {tmin}")));
            }
            Some(&t) => t,
            None => tmin,
        };
        for step in 0..=t {
            let last = step == t;
            let (target, shape) = if last { (&mut c, &p.dvec) } else { (&mut a, &p.c) };
            let replace = if last { &plus_d } else { &plus_c };
            let mut next = BTreeMap::new();
            for (key, coef) in &sum {
                for f in 0..e {
                    let mut k = key.clone();
                    k.push(f as u8);
                    let corr = coef * &shape[f];
                    if !corr.is_zero() {
                        *target.entries.entry(k.clone()).or_insert_with(Q::zero) += corr;
                    }
                    if !replace[f].is_zero() {
                        next.insert(k, coef * &replace[f]);
                    }
                }
            }
            if next.len() > cap {
                return Err(Error::ResourceLimit(format!("witness needs more than {cap} explicit entries")));
            }
            sum = next;
            n += 1;
            c.n = n;
            a.n = n;
        }
        c.entries.retain(|_, v| !v.is_zero());
        a.entries.retain(|_, v| !v.is_zero());
        levels.push(n);
        t_values.push(t);
        norm_c = c.norm(p);
    }
    let total = c.plus(&a);
    let norm_sum = total.norm(p);
    let explicit = sum.values().fold(Q::zero(), |s, v| s + v.abs());
    if explicit != norm_sum {
        return Err(Error::SolverFailure("explicit and hierarchical sums disagree".into()));
    }
    let lower_bound = Q::one() + &p.alpha * Q::from_integer(((r - 1) as i64).into()) / Q::from_integer(2.into());
    let c_is_cycle = c.is_cycle(p);
    Ok(Witness { r, levels, t_values, c, a, norm_c, norm_sum, lower_bound, c_is_cycle, explicit_entries: sum.len() })
}
