//! Colorings of the hypergraph whose edges are the line sections of a planar
//! point set with at least `q` points, and the chromatic lower-bound pipeline.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{ratio_string, ratio_to_f64, serde_ratio};
use crate::error::{Error, Result};
use crate::geometry::{maximal_sections, Point};
use crate::grid::{GridSpec, Limits};
use crate::planar::{project_to_plane, PlanarPointSet};
use crate::plan::{coloring_exponents, coloring_plan, ParameterPlan, ASYMPTOTIC_BANNER};
use crate::randcon::{max_independent_set, run_random_subset, RandomSubsetRun};
use num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSectionHypergraph {
    pub points: Vec<Point>,
    pub q: u32,
    /// Maximal sections with at least `q` points, by line key.
    pub edges: Vec<Vec<usize>>,
}

pub fn build_hq(points: &[Point], q: u32) -> Result<LineSectionHypergraph> {
    if q < 2 {
        return Err(Error::Precondition(format!("q must be >= 2, got {q}")));
    }
    let edges = maximal_sections(points, q as usize).into_iter().map(|s| s.members).collect();
    Ok(LineSectionHypergraph { points: points.to_vec(), q, edges })
}

impl LineSectionHypergraph {
    /// No line carries `q` points of one color.
    pub fn is_proper(&self, colors: &[u32]) -> bool {
        colors.len() == self.points.len()
            && self.edges.iter().all(|e| {
                let mut c: Vec<u32> = e.iter().map(|&v| colors[v]).collect();
                c.sort_unstable();
                c.chunk_by(|a, b| a == b).all(|run| run.len() < self.q as usize)
            })
    }

    fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.points.len()];
        for (i, e) in self.edges.iter().enumerate() {
            for &v in e {
                inc[v].push(i);
            }
        }
        inc
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chromatic {
    pub exact: Option<u32>,
    pub greedy_upper: u32,
    pub lower: u32,
    pub greedy_coloring: Vec<u32>,
    pub exact_coloring: Option<Vec<u32>>,
    pub nodes: u64,
}

/// Smallest color not completing `q` on any line through each point, in
/// lexicographic point order.
pub fn greedy_coloring(h: &LineSectionHypergraph) -> Vec<u32> {
    let inc = h.incidence();
    let mut order: Vec<usize> = (0..h.points.len()).collect();
    order.sort_by(|&a, &b| h.points[a].cmp(&h.points[b]));
    let mut colors = vec![u32::MAX; h.points.len()];
    for v in order {
        let mut c = 0;
        while inc[v].iter().any(|&e| h.edges[e].iter().filter(|&&w| colors[w] == c).count() + 1 >= h.q as usize) {
            c += 1;
        }
        colors[v] = c;
    }
    colors
}

struct Backtrack<'a> {
    h: &'a LineSectionHypergraph,
    inc: Vec<Vec<usize>>,
    order: Vec<usize>,
    /// per edge, per color: how many of its points have that color
    counts: Vec<Vec<u32>>,
    colors: Vec<u32>,
    nodes: u64,
    budget: u64,
    aborted: bool,
}

impl Backtrack<'_> {
    fn go(&mut self, pos: usize, used: u32, k: u32) -> bool {
        if pos == self.order.len() {
            return true;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.aborted = true;
            return false;
        }
        let v = self.order[pos];
        let q = self.h.q;
        for c in 0..k.min(used + 1) {
            if self.inc[v].iter().any(|&e| self.counts[e][c as usize] + 1 >= q) {
                continue;
            }
            for &e in &self.inc[v] {
                self.counts[e][c as usize] += 1;
            }
            self.colors[v] = c;
            if self.go(pos + 1, used.max(c + 1), k) {
                return true;
            }
            for &e in &self.inc[v] {
                self.counts[e][c as usize] -= 1;
            }
            if self.aborted {
                return false;
            }
        }
        false
    }
}

/// Exact (within budget), greedy, and trivial lower chromatic numbers.
pub fn chromatic_number(h: &LineSectionHypergraph, budget: u64) -> Chromatic {
    let n = h.points.len();
    let greedy_coloring = greedy_coloring(h);
    let greedy_upper = greedy_coloring.iter().map(|c| c + 1).max().unwrap_or(0);
    let lower = if n == 0 {
        0
    } else if h.edges.is_empty() {
        1
    } else {
        2
    };
    let inc = h.incidence();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| inc[b].len().cmp(&inc[a].len()).then(h.points[a].cmp(&h.points[b])));
    let mut nodes = 0;
    for k in lower..greedy_upper {
        let mut bt = Backtrack {
            h,
            inc: inc.clone(),
            order: order.clone(),
            counts: vec![vec![0; k as usize]; h.edges.len()],
            colors: vec![0; n],
            nodes: 0,
            budget: budget.saturating_sub(nodes),
            aborted: false,
        };
        let found = bt.go(0, 0, k);
        nodes += bt.nodes;
        if found {
            return Chromatic { exact: Some(k), greedy_upper, lower, exact_coloring: Some(bt.colors), greedy_coloring, nodes };
        }
        if bt.aborted {
            return Chromatic { exact: None, greedy_upper, lower, exact_coloring: None, greedy_coloring, nodes };
        }
    }
    Chromatic {
        exact: Some(greedy_upper),
        greedy_upper,
        lower,
        exact_coloring: Some(greedy_coloring.clone()),
        greedy_coloring,
        nodes,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColoringReport {
    pub plan: ParameterPlan,
    pub m_target: usize,
    pub grid: GridSpec,
    pub run: RandomSubsetRun,
    pub planar: PlanarPointSet,
    pub edges: usize,
    /// `|P|`.
    pub m: usize,
    /// Largest subset with no `q` collinear found, and a proved upper bound.
    pub max_independent: usize,
    pub max_independent_upper: usize,
    pub max_independent_optimal: bool,
    /// `ceil(|P| / upper)`.
    pub pigeonhole_lower: usize,
    pub chromatic: Chromatic,
    pub pigeonhole_holds: bool,
    #[serde(with = "serde_ratio")]
    pub ideal_exponent: BigRational,
    /// `m^{ideal_exponent}`.
    pub ideal_bound: f64,
    pub banner: Option<String>,
}

/// Smallest `n` whose expected sample size `n^{k + alpha_exp}` reaches `m`.
pub fn grid_side_for(plan: &ParameterPlan, m_target: usize) -> u32 {
    let e = plan.k as f64 + plan.alpha_exp_f64();
    let mut n = 2u32;
    while (n as f64).powf(e) < m_target as f64 {
        n += 1;
    }
    n
}

/// Sample with the `u = q + 1` plan, project to the plane, and compare the
/// pigeonhole bound `ceil(|P| / M)` with the chromatic number of the
/// `q`-section hypergraph.
pub fn gq_lower_pipeline(q: u32, eta: &BigRational, m_target: usize, seed: u64, budget: u64, limits: &Limits) -> Result<ColoringReport> {
    let plan = coloring_plan(q, eta)?;
    let n = grid_side_for(&plan, m_target.max(1));
    let grid = GridSpec::new(n, plan.k)?;
    let alpha = (plan.alpha_exp_f64() * (n as f64).ln()).exp();
    let run = run_random_subset(grid, alpha, seed, plan.u, limits)?;
    if run.survivors.is_empty() {
        return Err(Error::Precondition(format!("seed {seed} left no points on [{n}]^{}", plan.k)));
    }
    let planar = project_to_plane(&run.survivors, seed)?;
    let h = build_hq(&planar.points, q)?;
    let mi = max_independent_set(&planar.points, q, budget)?;
    let m = planar.points.len();
    let pigeonhole_lower = m.div_ceil(mi.upper_bound.max(1));
    let chromatic = chromatic_number(&h, budget);
    let pigeonhole_holds = match chromatic.exact {
        Some(x) => x as usize >= pigeonhole_lower,
        None => chromatic.greedy_upper as usize >= pigeonhole_lower,
    };
    let ideal_exponent = coloring_exponents(q, eta)?.chromatic_exp;
    let ideal_bound = (m as f64).powf(ratio_to_f64(&ideal_exponent));
    let hypotheses_met = plan.feasible_at(m as f64);
    Ok(ColoringReport {
        plan,
        m_target,
        grid,
        run,
        edges: h.edges.len(),
        m,
        max_independent: mi.best.len(),
        max_independent_upper: mi.upper_bound,
        max_independent_optimal: mi.optimal,
        pigeonhole_lower,
        chromatic,
        pigeonhole_holds,
        ideal_exponent,
        ideal_bound,
        banner: (!hypotheses_met).then(|| ASYMPTOTIC_BANNER.to_string()),
        planar,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyTrial {
    pub side: u32,
    pub edges: usize,
    pub greedy: u32,
    /// `greedy / m^{1/(q-1)}`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyStats {
    pub q: u32,
    pub m: usize,
    pub trials: Vec<GreedyTrial>,
    pub max_greedy: u32,
    pub mean_ratio: f64,
    pub reference_exponent: String,
}

/// Greedy colorings of `m` random points from a square grid of side about
/// `sqrt(2m)`, compared with `m^{1/(q-1)}`. Reported, never asserted.
pub fn greedy_upper_experiment(q: u32, m: usize, trials: u32, seed: u64) -> Result<GreedyStats> {
    if trials == 0 || q < 2 {
        return Err(Error::Precondition("need trials >= 1 and q >= 2".into()));
    }
    let side = ((2.0 * m as f64).sqrt().ceil() as u32).max(1);
    let cells = side as usize * side as usize;
    let m_eff = m.min(cells);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let scale = (m_eff as f64).powf(1.0 / (q as f64 - 1.0));
    let mut out = Vec::new();
    for _ in 0..trials {
        let mut idx: Vec<usize> = (0..cells).collect();
        for i in 0..m_eff {
            let j = rng.random_range(i..cells);
            idx.swap(i, j);
        }
        let mut chosen = idx[..m_eff].to_vec();
        chosen.sort_unstable();
        let pts: Vec<Point> = chosen
            .iter()
            .map(|&c| Point(vec![(c / side as usize) as i64 + 1, (c % side as usize) as i64 + 1]))
            .collect();
        let h = build_hq(&pts, q)?;
        let g = greedy_coloring(&h).iter().map(|c| c + 1).max().unwrap_or(0);
        out.push(GreedyTrial { side, edges: h.edges.len(), greedy: g, ratio: g as f64 / scale });
    }
    Ok(GreedyStats {
        q,
        m: m_eff,
        max_greedy: out.iter().map(|t| t.greedy).max().unwrap_or(0),
        mean_ratio: out.iter().map(|t| t.ratio).sum::<f64>() / out.len() as f64,
        reference_exponent: ratio_string(&BigRational::new(1.into(), (q as i64 - 1).into())),
        trials: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: i64) -> Vec<Point> {
        (1..=n).flat_map(|x| (1..=n).map(move |y| Point(vec![x, y]))).collect()
    }

    #[test]
    fn hq_examples() {
        assert_eq!(build_hq(&grid(3), 3).unwrap().edges.len(), 8);
        let generic = vec![Point(vec![0, 0]), Point(vec![1, 0]), Point(vec![0, 1]), Point(vec![3, 7])];
        assert!(build_hq(&generic, 3).unwrap().edges.is_empty());
        let line: Vec<Point> = (0..5).map(|i| Point(vec![i, 2 * i])).collect();
        assert_eq!(build_hq(&line, 3).unwrap().edges, vec![vec![0, 1, 2, 3, 4]]);
    }

    #[test]
    fn chromatic_examples() {
        let h = build_hq(&grid(3), 3).unwrap();
        let c = chromatic_number(&h, 100_000);
        assert_eq!(c.exact, Some(2));
        assert!(h.is_proper(c.exact_coloring.as_ref().unwrap()));
        assert!(h.is_proper(&c.greedy_coloring));
        // rows AAB / BBA / ABA
        let pattern = [0, 0, 1, 1, 1, 0, 0, 1, 0];
        let by_point: Vec<u32> = h.points.iter().map(|p| pattern[((p.0[0] - 1) * 3 + p.0[1] - 1) as usize]).collect();
        assert!(h.is_proper(&by_point));
        assert!(!h.is_proper(&[0; 9]));
        let empty = build_hq(&[Point(vec![0, 0])], 3).unwrap();
        assert_eq!(chromatic_number(&empty, 10).exact, Some(1));
        let one = build_hq(&(0..3).map(|i| Point(vec![i, i])).collect::<Vec<_>>(), 3).unwrap();
        assert_eq!(chromatic_number(&one, 10).exact, Some(2));
    }

    #[test]
    fn greedy_experiment_reports() {
        let s = greedy_upper_experiment(3, 20, 3, 1).unwrap();
        assert_eq!(s.trials.len(), 3);
        assert!(s.trials.iter().all(|t| t.greedy >= 1));
        assert_eq!(s, greedy_upper_experiment(3, 20, 3, 1).unwrap());
    }
}
