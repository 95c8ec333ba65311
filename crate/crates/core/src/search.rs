//! Exact search for a largest subset that keeps at most `cap` elements of
//! each constraint set, posed as minimum deletion: delete at least
//! `|C| - cap` elements from every constraint `C`.
//!
//! Branch and bound with forced-move propagation, a packing/degree lower
//! bound, and decomposition into connected components. Every run is bounded by
//! a node budget; when it runs out the result says so and carries the best
//! solution and the best proved bound.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub members: Vec<usize>,
    pub cap: usize,
}

impl Constraint {
    fn need(&self) -> usize {
        self.members.len().saturating_sub(self.cap)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeletionResult {
    /// Elements to delete, sorted.
    pub deleted: Vec<usize>,
    /// Proved lower bound on the minimum deletion size.
    pub lower_bound: usize,
    /// Whether `deleted` is proved minimum (or the target was settled).
    pub exhausted: bool,
    pub nodes: u64,
}

impl DeletionResult {
    pub fn kept(&self, universe: usize) -> Vec<usize> {
        let mut del = self.deleted.iter().peekable();
        (0..universe)
            .filter(|i| {
                if del.peek() == Some(&i) {
                    del.next();
                    false
                } else {
                    true
                }
            })
            .collect()
    }
}

/// Whether removing `deleted` leaves at most `cap` elements in every constraint.
pub fn is_feasible_deletion(constraints: &[Constraint], deleted: &[usize]) -> bool {
    let set: std::collections::HashSet<usize> = deleted.iter().copied().collect();
    constraints
        .iter()
        .all(|c| c.members.iter().filter(|m| !set.contains(m)).count() <= c.cap)
}

/// Minimum deletion over `universe` elements.
///
/// With `stop_at = Some(d)` the search ends as soon as a deletion of size
/// `<= d` is found or a lower bound `> d` is proved; `exhausted` is then set.
pub fn min_deletion(universe: usize, constraints: &[Constraint], stop_at: Option<usize>, budget: u64) -> DeletionResult {
    let active: Vec<&Constraint> = constraints.iter().filter(|c| c.need() > 0).collect();
    let comps = components(universe, &active);
    let mut solvers: Vec<Component> = comps.into_iter().map(|cs| Component::new(&active, cs)).collect();
    let total_upper = |s: &[Component]| s.iter().map(|c| c.best.len()).sum::<usize>();
    let total_lower = |s: &[Component]| s.iter().map(|c| c.lower).sum::<usize>();
    let settled = |s: &[Component]| match stop_at {
        Some(d) => total_upper(s) <= d || total_lower(s) > d,
        None => false,
    };
    let mut nodes = 0u64;
    let mut out_of_budget = false;
    if !settled(&solvers) {
        let mut order: Vec<usize> = (0..solvers.len()).collect();
        order.sort_by_key(|&i| solvers[i].constraints.len());
        for i in order {
            let remaining = budget.saturating_sub(nodes);
            let done = solvers[i].solve(remaining, &mut nodes);
            if !done {
                out_of_budget = true;
            }
            if settled(&solvers) || out_of_budget {
                break;
            }
        }
    }
    let mut deleted: Vec<usize> = solvers.iter().flat_map(|c| c.best.iter().copied()).collect();
    deleted.sort_unstable();
    let exhausted = settled(&solvers) || solvers.iter().all(|c| c.optimal);
    DeletionResult { deleted, lower_bound: total_lower(&solvers), exhausted, nodes }
}

/// Outcome of asking for a feasible subset of a given size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Decision {
    /// A feasible subset of exactly the target size.
    Found(Vec<usize>),
    /// Every feasible subset has at most `upper` (< target) elements.
    Impossible { upper: usize },
    Unknown { best: Vec<usize>, upper: usize },
}

/// Decide whether a feasible subset with `target` elements exists.
pub fn decide_subset(universe: usize, constraints: &[Constraint], target: usize, budget: u64) -> Decision {
    if target > universe {
        return Decision::Impossible { upper: universe };
    }
    let res = min_deletion(universe, constraints, Some(universe - target), budget);
    let kept = res.kept(universe);
    let upper = universe - res.lower_bound.min(universe);
    if kept.len() >= target {
        Decision::Found(kept.into_iter().take(target).collect())
    } else if upper < target {
        Decision::Impossible { upper }
    } else {
        Decision::Unknown { best: kept, upper }
    }
}

/// Group constraints into components linked by shared elements.
fn components(universe: usize, cons: &[&Constraint]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..cons.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut owner: Vec<Option<usize>> = vec![None; universe];
    for (ci, c) in cons.iter().enumerate() {
        for &e in &c.members {
            match owner[e] {
                None => owner[e] = Some(ci),
                Some(o) => {
                    let (a, b) = (find(&mut parent, o), find(&mut parent, ci));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for ci in 0..cons.len() {
        let root = find(&mut parent, ci);
        groups.entry(root).or_default().push(ci);
    }
    groups.into_values().collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Open,
    Deleted,
    Kept,
}

/// One connected component, with elements relabelled `0..m`.
struct Component {
    elems: Vec<usize>,
    constraints: Vec<Vec<usize>>,
    incidence: Vec<Vec<usize>>,
    need0: Vec<usize>,
    best: Vec<usize>,
    lower: usize,
    optimal: bool,
}

impl Component {
    fn new(all: &[&Constraint], ids: Vec<usize>) -> Self {
        let mut elems: Vec<usize> = ids.iter().flat_map(|&i| all[i].members.iter().copied()).collect();
        elems.sort_unstable();
        elems.dedup();
        let local = |e: usize| elems.binary_search(&e).expect("member");
        let constraints: Vec<Vec<usize>> =
            ids.iter().map(|&i| all[i].members.iter().map(|&e| local(e)).collect()).collect();
        let need0: Vec<usize> = ids.iter().map(|&i| all[i].need()).collect();
        let mut incidence = vec![Vec::new(); elems.len()];
        for (ci, c) in constraints.iter().enumerate() {
            for &e in c {
                incidence[e].push(ci);
            }
        }
        let mut comp = Component { elems, constraints, incidence, need0, best: Vec::new(), lower: 0, optimal: false };
        let greedy = comp.greedy();
        comp.best = greedy.iter().map(|&e| comp.elems[e]).collect();
        comp.lower = comp.root_lower_bound();
        comp.optimal = comp.lower >= comp.best.len();
        comp
    }

    /// Greedy deletion by need-weighted degree, then drop redundant deletions.
    fn greedy(&self) -> Vec<usize> {
        let m = self.elems.len();
        let mut need = self.need0.clone();
        let mut deleted = vec![false; m];
        loop {
            let mut pick = None;
            let mut best_score = 0usize;
            for e in 0..m {
                if deleted[e] {
                    continue;
                }
                let score: usize = self.incidence[e].iter().filter(|&&c| need[c] > 0).map(|&c| need[c]).sum();
                if score > best_score {
                    best_score = score;
                    pick = Some(e);
                }
            }
            let Some(e) = pick else { break };
            deleted[e] = true;
            for &c in &self.incidence[e] {
                need[c] = need[c].saturating_sub(1);
            }
        }
        // Restore any deleted element whose constraints all have slack.
        let mut surplus: Vec<isize> = self
            .constraints
            .iter()
            .zip(&self.need0)
            .map(|(c, &n)| c.iter().filter(|&&e| deleted[e]).count() as isize - n as isize)
            .collect();
        for e in (0..m).rev() {
            if deleted[e] && self.incidence[e].iter().all(|&c| surplus[c] > 0) {
                deleted[e] = false;
                for &c in &self.incidence[e] {
                    surplus[c] -= 1;
                }
            }
        }
        (0..m).filter(|&e| deleted[e]).collect()
    }

    fn root_lower_bound(&self) -> usize {
        let state = vec![State::Open; self.elems.len()];
        lower_bound(&self.constraints, &self.incidence, &self.need0, &state)
    }

    /// Returns false when the budget ran out.
    fn solve(&mut self, budget: u64, nodes: &mut u64) -> bool {
        if self.optimal {
            return true;
        }
        let m = self.elems.len();
        let mut search = Search {
            constraints: &self.constraints,
            incidence: &self.incidence,
            need: self.need0.clone(),
            open: self.constraints.iter().map(|c| c.len()).collect(),
            state: vec![State::Open; m],
            deleted: 0,
            best: self.best.len(),
            best_set: None,
            nodes: 0,
            budget,
            aborted: false,
        };
        search.dfs();
        *nodes += search.nodes;
        if let Some(set) = search.best_set {
            self.best = set.iter().map(|&e| self.elems[e]).collect();
            self.best.sort_unstable();
        }
        if search.aborted {
            false
        } else {
            self.optimal = true;
            self.lower = self.best.len();
            true
        }
    }
}

/// Max of a disjoint-packing bound and a degree bound on the further
/// deletions needed.
fn lower_bound(constraints: &[Vec<usize>], incidence: &[Vec<usize>], need: &[usize], state: &[State]) -> usize {
    let mut active: Vec<usize> = (0..constraints.len()).filter(|&c| need[c] > 0).collect();
    if active.is_empty() {
        return 0;
    }
    let open_count = |c: usize| constraints[c].iter().filter(|&&e| state[e] == State::Open).count();
    active.sort_by_key(|&c| (open_count(c), std::cmp::Reverse(need[c])));
    let mut used = vec![false; state.len()];
    let mut packing = 0;
    for &c in &active {
        if constraints[c].iter().all(|&e| state[e] != State::Open || !used[e]) {
            for &e in &constraints[c] {
                if state[e] == State::Open {
                    used[e] = true;
                }
            }
            packing += need[c];
        }
    }
    let total: usize = active.iter().map(|&c| need[c]).sum();
    let max_deg = (0..state.len())
        .filter(|&e| state[e] == State::Open)
        .map(|e| incidence[e].iter().filter(|&&c| need[c] > 0).count())
        .max()
        .unwrap_or(1)
        .max(1);
    packing.max(total.div_ceil(max_deg)).max(fractional_bound(constraints, incidence, need, state, &active))
}

/// A feasible solution of the LP dual, `max sum need_c y_c` subject to
/// `sum_{c ni e} y_c <= 1` over open elements, built greedily with
/// low-degree constraints first. Its value bounds the deletions from below.
fn fractional_bound(
    constraints: &[Vec<usize>],
    incidence: &[Vec<usize>],
    need: &[usize],
    state: &[State],
    active: &[usize],
) -> usize {
    let degree = |e: usize| incidence[e].iter().filter(|&&c| need[c] > 0).count();
    let mut order: Vec<(usize, usize)> = active
        .iter()
        .map(|&c| {
            let d = constraints[c].iter().filter(|&&e| state[e] == State::Open).map(|&e| degree(e)).max().unwrap_or(0);
            (d, c)
        })
        .collect();
    order.sort_unstable();
    let mut residual = vec![1.0f64; state.len()];
    let mut value = 0.0;
    for &(_, c) in &order {
        let y = constraints[c]
            .iter()
            .filter(|&&e| state[e] == State::Open)
            .map(|&e| residual[e])
            .fold(f64::INFINITY, f64::min);
        if !(y > 0.0) || !y.is_finite() {
            continue;
        }
        for &e in &constraints[c] {
            if state[e] == State::Open {
                residual[e] -= y;
            }
        }
        value += need[c] as f64 * y;
    }
    (value - 1e-9).ceil().max(0.0) as usize
}

struct Search<'a> {
    constraints: &'a [Vec<usize>],
    incidence: &'a [Vec<usize>],
    need: Vec<usize>,
    open: Vec<usize>,
    state: Vec<State>,
    deleted: usize,
    best: usize,
    best_set: Option<Vec<usize>>,
    nodes: u64,
    budget: u64,
    aborted: bool,
}

impl Search<'_> {
    fn set(&mut self, e: usize, s: State, trail: &mut Vec<usize>) {
        self.state[e] = s;
        trail.push(e);
        let inc = self.incidence;
        for &c in &inc[e] {
            self.open[c] -= 1;
            if s == State::Deleted {
                self.need[c] = self.need[c].wrapping_sub(1);
            }
        }
        if s == State::Deleted {
            self.deleted += 1;
        }
    }

    fn undo(&mut self, trail: &mut Vec<usize>, mark: usize) {
        while trail.len() > mark {
            let e = trail.pop().expect("trail");
            let s = self.state[e];
            let inc = self.incidence;
            for &c in &inc[e] {
                self.open[c] += 1;
                if s == State::Deleted {
                    self.need[c] = self.need[c].wrapping_add(1);
                }
            }
            if s == State::Deleted {
                self.deleted -= 1;
            }
            self.state[e] = State::Open;
        }
    }

    fn need_of(&self, c: usize) -> isize {
        self.need[c] as isize
    }

    /// Forced deletions; false on contradiction.
    fn propagate(&mut self, trail: &mut Vec<usize>) -> bool {
        loop {
            let mut changed = false;
            for c in 0..self.constraints.len() {
                let need = self.need_of(c);
                if need <= 0 {
                    continue;
                }
                if (self.open[c] as isize) < need {
                    return false;
                }
                if self.open[c] as isize == need {
                    let forced: Vec<usize> =
                        self.constraints[c].iter().copied().filter(|&e| self.state[e] == State::Open).collect();
                    for e in forced {
                        self.set(e, State::Deleted, trail);
                    }
                    changed = true;
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn dfs(&mut self) {
        if self.aborted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.aborted = true;
            return;
        }
        let mut trail = Vec::new();
        if !self.propagate(&mut trail) || self.deleted >= self.best {
            self.undo(&mut trail, 0);
            return;
        }
        let need_pos: Vec<usize> = (0..self.need.len()).filter(|&c| self.need_of(c) > 0).collect();
        if need_pos.is_empty() {
            self.best = self.deleted;
            self.best_set = Some((0..self.state.len()).filter(|&e| self.state[e] == State::Deleted).collect());
            self.undo(&mut trail, 0);
            return;
        }
        let positive: Vec<usize> = self.need.iter().map(|&n| if (n as isize) > 0 { n } else { 0 }).collect();
        if self.deleted + lower_bound(self.constraints, self.incidence, &positive, &self.state) >= self.best {
            self.undo(&mut trail, 0);
            return;
        }
        let c = *need_pos
            .iter()
            .min_by_key(|&&c| (self.open[c] as isize - self.need_of(c), std::cmp::Reverse(self.need[c])))
            .expect("nonempty");
        let e = self.constraints[c]
            .iter()
            .copied()
            .filter(|&e| self.state[e] == State::Open)
            .max_by_key(|&e| {
                let d: usize = self.incidence[e].iter().filter(|&&c| self.need_of(c) > 0).count();
                (d, std::cmp::Reverse(e))
            })
            .expect("open element");
        for s in [State::Deleted, State::Kept] {
            let mark = trail.len();
            self.set(e, s, &mut trail);
            self.dfs();
            self.undo(&mut trail, mark);
            if self.aborted {
                break;
            }
        }
        self.undo(&mut trail, 0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(universe: usize, cons: &[Constraint]) -> usize {
        (0u32..1 << universe)
            .filter(|mask| {
                let del: Vec<usize> = (0..universe).filter(|i| mask >> i & 1 == 1).collect();
                is_feasible_deletion(cons, &del)
            })
            .map(|m| m.count_ones() as usize)
            .min()
            .unwrap()
    }

    #[test]
    fn matches_brute_force_on_grid_lines() {
        // Rows, columns and diagonals of a 3x3 grid, cap 2.
        let lines: Vec<Vec<usize>> = vec![
            vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8],
            vec![0, 3, 6], vec![1, 4, 7], vec![2, 5, 8],
            vec![0, 4, 8], vec![2, 4, 6],
        ];
        let cons: Vec<Constraint> = lines.into_iter().map(|members| Constraint { members, cap: 2 }).collect();
        let res = min_deletion(9, &cons, None, 1_000_000);
        assert!(res.exhausted);
        assert_eq!(res.deleted.len(), brute(9, &cons));
        assert_eq!(res.deleted.len(), 3);
        assert!(is_feasible_deletion(&cons, &res.deleted));
    }

    #[test]
    fn single_constraint_and_stop() {
        let cons = vec![Constraint { members: (0..6).collect(), cap: 2 }];
        let res = min_deletion(6, &cons, None, 100);
        assert_eq!(res.deleted.len(), 4);
        assert_eq!(res.kept(6).len(), 2);
        let res = min_deletion(6, &cons, Some(2), 100);
        assert!(res.exhausted);
        assert!(res.lower_bound > 2);
        let res = min_deletion(8, &[], None, 10);
        assert!(res.deleted.is_empty() && res.exhausted);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let mut cons = Vec::new();
        for a in 0..12usize {
            for b in a + 1..12 {
                cons.push(Constraint { members: vec![a, b, (a + b) % 12 + 12], cap: 2 });
            }
        }
        let res = min_deletion(24, &cons, None, 3);
        assert!(is_feasible_deletion(&cons, &res.deleted));
        assert!(res.lower_bound <= res.deleted.len());
        if !res.exhausted {
            assert!(res.nodes <= 3 + 1);
        }
    }
}
