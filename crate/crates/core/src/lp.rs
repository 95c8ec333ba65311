//! Dense primal simplex for packing LPs: maximize `w . x` subject to
//! `sum_{j : i in S_j} x_j <= 1` for every row `i` and `0 <= x <= 1`.

const EPS: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct PackingLp {
    /// Approximate primal optimum.
    pub x: Vec<f64>,
    pub value: f64,
    /// Weak-duality upper bound from a repaired dual solution. Valid even
    /// when the simplex itself is inexact.
    pub bound: f64,
}

/// `sets[j]` lists the rows column `j` touches; rows are `0..rows`.
pub fn solve_packing(rows: usize, sets: &[Vec<usize>], weights: &[f64]) -> PackingLp {
    let n = sets.len();
    let width = n + rows + 1;
    let mut t = vec![0.0f64; (rows + 1) * width];
    let at = |r: usize, c: usize| r * width + c;
    for (j, s) in sets.iter().enumerate() {
        for &i in s {
            t[at(i, j)] = 1.0;
        }
    }
    for i in 0..rows {
        t[at(i, n + i)] = 1.0;
        t[at(i, width - 1)] = 1.0;
    }
    // objective row holds reduced costs; the last entry is -value
    for j in 0..n {
        t[at(rows, j)] = weights[j];
    }
    let mut basis: Vec<usize> = (n..n + rows).collect();
    let mut degenerate = 0usize;
    let cap = 50 * (rows + n) + 1000;
    for _ in 0..cap {
        let bland = degenerate > 30;
        let mut enter = None;
        let mut best = EPS;
        for c in 0..width - 1 {
            let rc = t[at(rows, c)];
            if rc > EPS {
                if bland {
                    enter = Some(c);
                    break;
                }
                if rc > best {
                    best = rc;
                    enter = Some(c);
                }
            }
        }
        let Some(e) = enter else { break };
        let mut leave = None;
        let mut ratio = f64::INFINITY;
        for r in 0..rows {
            let a = t[at(r, e)];
            if a > EPS {
                let q = t[at(r, width - 1)] / a;
                if q < ratio - EPS || (q < ratio + EPS && leave.is_some_and(|l: usize| basis[r] < basis[l])) {
                    ratio = q;
                    leave = Some(r);
                }
            }
        }
        // bounded rows: every column has a positive entry, so this is unreachable
        let Some(l) = leave else { break };
        degenerate = if ratio < EPS { degenerate + 1 } else { 0 };
        let piv = t[at(l, e)];
        let mut nz = Vec::new();
        for c in 0..width {
            let v = t[at(l, c)];
            if v != 0.0 {
                t[at(l, c)] = v / piv;
                nz.push(c);
            }
        }
        for r in 0..=rows {
            if r == l {
                continue;
            }
            let factor = t[at(r, e)];
            if factor != 0.0 {
                for &c in &nz {
                    t[at(r, c)] -= factor * t[at(l, c)];
                }
                t[at(r, e)] = 0.0;
            }
        }
        basis[l] = e;
    }
    let mut x = vec![0.0; n];
    for (r, &b) in basis.iter().enumerate() {
        if b < n {
            x[b] = t[at(r, width - 1)].clamp(0.0, 1.0);
        }
    }
    let value = x.iter().zip(weights).map(|(a, w)| a * w).sum();
    let y: Vec<f64> = (0..rows).map(|i| (-t[at(rows, n + i)]).max(0.0)).collect();
    let mut bound: f64 = y.iter().sum();
    for (j, s) in sets.iter().enumerate() {
        let cover: f64 = s.iter().map(|&i| y[i]).sum();
        bound += (weights[j] - cover).max(0.0);
    }
    PackingLp { x, value, bound }
}
