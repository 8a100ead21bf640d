//! Balanced transportation problems by the stepping-stone (MODI) method.
//!
//! The basis is kept as a spanning tree of the bipartite supply/demand graph
//! with exactly `m + n - 1` cells, degenerate zero cells included.

use crate::lp::LpError;
use crate::numeric::{Scalar, Q};

#[derive(Debug, Clone)]
pub struct TransportSolution<T> {
    pub cost: T,
    /// Basic cells `(source, sink, flow)`, zero flows included.
    pub basis: Vec<(usize, usize, T)>,
    pub u: Vec<T>,
    pub v: Vec<T>,
}

impl<T: Scalar> TransportSolution<T> {
    pub fn moves(&self) -> impl Iterator<Item = &(usize, usize, T)> {
        self.basis.iter().filter(|(_, _, f)| f.is_pos())
    }
}

/// Minimizes `Σ cost[i][j]·x_ij` subject to row sums `supply` and column sums
/// `demand`. Totals must agree.
pub fn solve<T: Scalar>(supply: &[T], demand: &[T], cost: &[Vec<T>]) -> Result<TransportSolution<T>, LpError> {
    let m = supply.len();
    let n = demand.len();
    if m == 0 || n == 0 {
        return Ok(TransportSolution { cost: T::zero_val(), basis: vec![], u: vec![T::zero_val(); m], v: vec![T::zero_val(); n] });
    }
    let cells = northwest_corner(supply, demand);
    let mut basis: Vec<(usize, usize, T)> = cells;
    let max_iter = 10_000 + 20 * m * n;
    let mut degenerate_streak = 0;
    for _ in 0..max_iter {
        let (u, v) = potentials(m, n, &basis, cost);
        let mut entering: Option<(usize, usize, T)> = None;
        let bland = degenerate_streak > 30;
        'scan: for i in 0..m {
            for j in 0..n {
                let rc = cost[i][j].sub(&u[i]).sub(&v[j]);
                if !rc.is_neg() {
                    continue;
                }
                if bland {
                    if !basis.iter().any(|&(bi, bj, _)| bi == i && bj == j) {
                        entering = Some((i, j, rc));
                        break 'scan;
                    }
                    continue;
                }
                if entering.as_ref().is_none_or(|(_, _, best)| rc.cmp_val(best).is_lt()) {
                    entering = Some((i, j, rc));
                }
            }
        }
        let Some((ei, ej, _)) = entering else {
            let total = basis.iter().fold(T::zero_val(), |s, (i, j, f)| s.add(&cost[*i][*j].mul(f)));
            return Ok(TransportSolution { cost: total, basis, u, v });
        };
        let path = tree_path(m, n, &basis, ej, ei);
        // path alternates: first cell loses flow, second gains, ...
        let mut leave: Option<usize> = None;
        for (k, &b) in path.iter().enumerate() {
            if k % 2 == 0 {
                let f = &basis[b].2;
                let better = match leave {
                    None => true,
                    Some(l) => {
                        let lf: &T = &basis[l].2;
                        let d = f.sub(lf);
                        d.is_neg() && !d.is_zero_tol() || d.is_zero_tol() && (basis[b].0, basis[b].1) < (basis[l].0, basis[l].1)
                    }
                };
                if better {
                    leave = Some(b);
                }
            }
        }
        let leave = leave.expect("cycle has a decreasing cell");
        let theta = basis[leave].2.clone();
        if theta.is_zero_tol() {
            degenerate_streak += 1;
        } else {
            degenerate_streak = 0;
        }
        for (k, &b) in path.iter().enumerate() {
            let f = &basis[b].2;
            basis[b].2 = if k % 2 == 0 { f.sub(&theta) } else { f.add(&theta) };
        }
        basis[leave] = (ei, ej, theta);
    }
    Err(LpError::IterationLimit)
}

fn northwest_corner<T: Scalar>(supply: &[T], demand: &[T]) -> Vec<(usize, usize, T)> {
    let m = supply.len();
    let n = demand.len();
    let mut s = supply.to_vec();
    let mut d = demand.to_vec();
    let (mut i, mut j) = (0, 0);
    let mut cells = Vec::with_capacity(m + n - 1);
    loop {
        let x = if s[i].cmp_val(&d[j]).is_le() { s[i].clone() } else { d[j].clone() };
        cells.push((i, j, x.clone()));
        s[i] = s[i].sub(&x);
        d[j] = d[j].sub(&x);
        if i == m - 1 && j == n - 1 {
            break;
        }
        if j == n - 1 || (i < m - 1 && s[i].is_zero_tol()) {
            i += 1;
        } else {
            j += 1;
        }
    }
    cells
}

/// Node ids: sources `0..m`, sinks `m..m+n`.
fn adjacency<T>(m: usize, n: usize, basis: &[(usize, usize, T)]) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); m + n];
    for (k, (i, j, _)) in basis.iter().enumerate() {
        adj[*i].push((m + j, k));
        adj[m + j].push((*i, k));
    }
    adj
}

fn potentials<T: Scalar>(m: usize, n: usize, basis: &[(usize, usize, T)], cost: &[Vec<T>]) -> (Vec<T>, Vec<T>) {
    let adj = adjacency(m, n, basis);
    let mut pot: Vec<Option<T>> = vec![None; m + n];
    pot[0] = Some(T::zero_val());
    let mut stack = vec![0];
    while let Some(x) = stack.pop() {
        let px = pot[x].clone().expect("visited");
        for &(y, k) in &adj[x] {
            if pot[y].is_none() {
                let (i, j, _) = &basis[k];
                pot[y] = Some(cost[*i][*j].sub(&px));
                stack.push(y);
            }
        }
    }
    let mut u = Vec::with_capacity(m);
    let mut v = Vec::with_capacity(n);
    for (idx, p) in pot.into_iter().enumerate() {
        let p = p.unwrap_or_else(T::zero_val);
        if idx < m {
            u.push(p);
        } else {
            v.push(p);
        }
    }
    (u, v)
}

/// Basis cells on the tree path from sink `j` to source `i`.
fn tree_path<T>(m: usize, n: usize, basis: &[(usize, usize, T)], j: usize, i: usize) -> Vec<usize> {
    let adj = adjacency(m, n, basis);
    let start = m + j;
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; m + n];
    let mut seen = vec![false; m + n];
    seen[start] = true;
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        if x == i {
            break;
        }
        for &(y, k) in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                prev[y] = Some((x, k));
                queue.push_back(y);
            }
        }
    }
    let mut path = Vec::new();
    let mut cur = i;
    while let Some((p, k)) = prev[cur] {
        path.push(k);
        cur = p;
    }
    path.reverse();
    path
}

/// Solves in floating point, then re-derives flows and potentials of the
/// returned basis in exact arithmetic. If the basis is not exactly optimal
/// the problem is re-solved exactly.
pub fn solve_certified(supply: &[Q], demand: &[Q], cost: &[Vec<Q>]) -> Result<TransportSolution<Q>, LpError> {
    if supply.is_empty() || demand.is_empty() {
        return solve(supply, demand, cost);
    }
    let fs: Vec<f64> = supply.iter().map(Scalar::to_f64).collect();
    let fd: Vec<f64> = demand.iter().map(Scalar::to_f64).collect();
    let fc: Vec<Vec<f64>> = cost.iter().map(|r| r.iter().map(Scalar::to_f64).collect()).collect();
    if let Ok(sol) = solve(&fs, &fd, &fc) {
        let cells: Vec<(usize, usize)> = sol.basis.iter().map(|(i, j, _)| (*i, *j)).collect();
        if let Some(exact) = verify_basis(supply, demand, cost, &cells) {
            return Ok(exact);
        }
    }
    solve(supply, demand, cost)
}

/// Exact flows on a spanning-tree basis, or `None` if the cells do not form
/// a feasible, optimal basis.
pub fn verify_basis(
    supply: &[Q],
    demand: &[Q],
    cost: &[Vec<Q>],
    cells: &[(usize, usize)],
) -> Option<TransportSolution<Q>> {
    let m = supply.len();
    let n = demand.len();
    if m == 0 || n == 0 || cells.len() != m + n - 1 {
        return None;
    }
    let zero = <Q as Scalar>::zero_val();
    let tmp: Vec<(usize, usize, Q)> = cells.iter().map(|&(i, j)| (i, j, zero.clone())).collect();
    let adj = adjacency(m, n, &tmp);
    // Flows by leaf peeling: residual balance at every node.
    let mut residual: Vec<Q> = supply.iter().cloned().chain(demand.iter().map(|d| -d.clone())).collect();
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut used = vec![false; cells.len()];
    let mut flows = vec![zero.clone(); cells.len()];
    let mut leaves: Vec<usize> = (0..m + n).filter(|&x| degree[x] == 1).collect();
    while let Some(x) = leaves.pop() {
        let Some(&(y, k)) = adj[x].iter().find(|(_, k)| !used[*k]) else {
            continue;
        };
        used[k] = true;
        let r = residual[x].clone();
        // source side carries positive residual into the sink side
        flows[k] = if x < m { r.clone() } else { -r.clone() };
        residual[y] += r;
        residual[x] = zero.clone();
        degree[x] -= 1;
        degree[y] -= 1;
        if degree[y] == 1 {
            leaves.push(y);
        }
    }
    if used.iter().any(|u| !u) || flows.iter().any(Scalar::is_neg) {
        return None;
    }
    let basis: Vec<(usize, usize, Q)> = cells.iter().zip(flows).map(|(&(i, j), f)| (i, j, f)).collect();
    let (u, v) = potentials(m, n, &basis, cost);
    for i in 0..m {
        for j in 0..n {
            if (&cost[i][j] - &u[i] - &v[j]).is_neg() {
                return None;
            }
        }
    }
    let total = basis.iter().fold(zero, |s, (i, j, f)| s + &cost[*i][*j] * f);
    Some(TransportSolution { cost: total, basis, u, v })
}
