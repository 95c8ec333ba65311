//! Exact solvers checked against exhaustive enumeration on small inputs.

use std::collections::BTreeSet;

use hdlab::coloring::{build_hq, chromatic_number, greedy_coloring};
use hdlab::geometry::Point;
use hdlab::lp::solve_packing;
use hdlab::planar::{
    concurrency_classes, dualize, greedy_piercing, hitting_set_exact, intersection, max_free_subfamily,
    pairwise_meeting_exact, piercing_number, DualLine, LineFamily,
};
use hdlab::randcon::{find_independent_set, max_independent_set, IndependentSearch};
use hdlab::search::{decide_subset, is_feasible_deletion, min_deletion, Constraint, Decision};
use num_rational::Ratio;
use proptest::prelude::*;

const BUDGET: u64 = 10_000_000;

fn collinear3(a: &Point, b: &Point, c: &Point) -> bool {
    let u = b.sub(a);
    let v = c.sub(a);
    (0..u.len()).all(|i| (i + 1..u.len()).all(|j| u[i] * v[j] == u[j] * v[i]))
}

fn subsets(len: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..1 << len).map(move |mask| (0..len).filter(|i| mask >> i & 1 == 1).collect())
}

/// No `q` points of `chosen` on one line, by checking every q-subset.
fn brute_independent(points: &[Point], chosen: &[usize], q: usize) -> bool {
    fn rec(points: &[Point], chosen: &[usize], q: usize, start: usize, pick: &mut Vec<usize>) -> bool {
        if pick.len() == q {
            let a = &points[pick[0]];
            let b = &points[pick[1]];
            return !pick[2..].iter().all(|&c| collinear3(a, b, &points[c]));
        }
        for i in start..chosen.len() {
            pick.push(chosen[i]);
            let ok = rec(points, chosen, q, i + 1, pick);
            pick.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    rec(points, chosen, q, 0, &mut Vec::new())
}

fn point_set(dim: usize, side: i64, max_len: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::btree_set(prop::collection::vec(0..side, dim), 3..=max_len)
        .prop_map(|s| s.into_iter().map(Point).collect())
}

fn constraint_set(universe: usize) -> impl Strategy<Value = Vec<Constraint>> {
    prop::collection::vec(
        (prop::collection::btree_set(0..universe, 2..=universe.min(6)), 0usize..3),
        0..8,
    )
    .prop_map(|cs| {
        cs.into_iter()
            .map(|(m, cap)| Constraint { members: m.into_iter().collect(), cap })
            .collect()
    })
}

fn brute_min_deletion(universe: usize, cons: &[Constraint]) -> usize {
    subsets(universe)
        .filter(|d| is_feasible_deletion(cons, d))
        .map(|d| d.len())
        .min()
        .unwrap()
}

fn line_family(max_len: usize) -> impl Strategy<Value = LineFamily> {
    prop::collection::btree_set((-3i64..4, -4i64..5), 1..=max_len)
        .prop_map(|s| LineFamily { lines: s.into_iter().map(|(slope, offset)| DualLine { slope, offset }).collect() })
}

type Rat = (Ratio<i128>, Ratio<i128>);

/// Minimum piercing set: some intersection points plus one private point
/// per line they miss.
fn brute_piercing(family: &LineFamily) -> usize {
    let lines = &family.lines;
    let mut points: BTreeSet<Rat> = BTreeSet::new();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            if let Some(p) = intersection(&lines[i], &lines[j]) {
                points.insert(p);
            }
        }
    }
    let points: Vec<Rat> = points.into_iter().collect();
    subsets(points.len())
        .map(|chosen| {
            let missed = lines
                .iter()
                .filter(|l| !chosen.iter().any(|&c| l.contains(&points[c].0, &points[c].1)))
                .count();
            chosen.len() + missed
        })
        .min()
        .unwrap_or(lines.len())
}

fn brute_free(family: &LineFamily, q: usize) -> usize {
    let bundles = concurrency_classes(family);
    subsets(family.lines.len())
        .filter(|s| {
            bundles
                .iter()
                .all(|b| b.lines.iter().filter(|l| s.contains(l)).count() < q)
        })
        .map(|s| s.len())
        .max()
        .unwrap()
}

fn brute_chromatic(h: &hdlab::coloring::LineSectionHypergraph) -> u32 {
    let m = h.points.len();
    for colors in 1..=m as u32 {
        let total = (colors as u64).pow(m as u32);
        let found = (0..total).any(|mut code| {
            let assign: Vec<u32> = (0..m)
                .map(|_| {
                    let c = (code % colors as u64) as u32;
                    code /= colors as u64;
                    c
                })
                .collect();
            h.is_proper(&assign)
        });
        if found {
            return colors;
        }
    }
    m as u32
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn min_deletion_matches_enumeration((universe, cons) in (2usize..=12).prop_flat_map(|u| (Just(u), constraint_set(u)))) {
        let res = min_deletion(universe, &cons, None, BUDGET);
        prop_assert!(res.exhausted);
        prop_assert!(is_feasible_deletion(&cons, &res.deleted));
        prop_assert_eq!(res.deleted.len(), brute_min_deletion(universe, &cons));
        prop_assert!(res.lower_bound <= res.deleted.len());
    }

    #[test]
    fn decide_subset_agrees_with_minimum(cons in constraint_set(10), target in 0usize..=11) {
        let best = 10 - brute_min_deletion(10, &cons);
        match decide_subset(10, &cons, target, BUDGET) {
            Decision::Found(kept) => {
                prop_assert_eq!(kept.len(), target);
                prop_assert!(target <= best);
                let deleted: Vec<usize> = (0..10).filter(|i| !kept.contains(i)).collect();
                prop_assert!(is_feasible_deletion(&cons, &deleted));
            }
            Decision::Impossible { upper } => {
                prop_assert!(target > best);
                prop_assert!(upper >= best && upper < target);
            }
            Decision::Unknown { .. } => prop_assert!(false, "budget should suffice"),
        }
    }

    #[test]
    fn max_independent_set_matches_enumeration(points in point_set(2, 5, 11), q in 3u32..=4) {
        let res = max_independent_set(&points, q, BUDGET).unwrap();
        prop_assert!(res.optimal);
        let idx: Vec<usize> = res.best.iter().map(|p| points.iter().position(|x| x == p).unwrap()).collect();
        prop_assert!(brute_independent(&points, &idx, q as usize));
        let best = subsets(points.len())
            .filter(|s| brute_independent(&points, s, q as usize))
            .map(|s| s.len())
            .max()
            .unwrap();
        prop_assert_eq!(res.best.len(), best);
        prop_assert_eq!(res.upper_bound, best);
    }

    #[test]
    fn find_independent_set_decides_every_size(points in point_set(3, 3, 10), p in 1usize..=11) {
        let best = subsets(points.len())
            .filter(|s| brute_independent(&points, s, 3))
            .map(|s| s.len())
            .max()
            .unwrap();
        match find_independent_set(&points, 3, p, BUDGET).unwrap() {
            IndependentSearch::Witness { points: w } => {
                prop_assert_eq!(w.len(), p);
                let idx: Vec<usize> = w.iter().map(|x| points.iter().position(|y| y == x).unwrap()).collect();
                prop_assert!(brute_independent(&points, &idx, 3));
            }
            IndependentSearch::NoneExists { max_size_upper } => {
                prop_assert!(p > best);
                prop_assert!(max_size_upper < p);
            }
            IndependentSearch::Unknown { .. } => prop_assert!(false, "budget should suffice"),
        }
    }

    #[test]
    fn piercing_matches_enumeration(family in line_family(6)) {
        let pierce = piercing_number(&family, BUDGET).unwrap();
        let exact = brute_piercing(&family);
        prop_assert_eq!(pierce.exact, Some(exact));
        prop_assert!(pierce.lower_ceil <= exact);
        prop_assert!(pierce.greedy_upper >= exact);
        prop_assert_eq!(pierce.greedy_points.len(), pierce.greedy_upper);
    }

    #[test]
    fn pairwise_solver_matches_generic(xs in prop::collection::btree_set(-6i64..7, 3..=6), ys in prop::collection::vec(-3i64..4, 6)) {
        let points: Vec<Point> = xs.iter().zip(&ys).map(|(&x, &y)| Point(vec![x, y])).collect();
        let family = dualize(&points).unwrap();
        let m = family.lines.len();
        let bundles = concurrency_classes(&family);
        let (greedy, _) = greedy_piercing(m, &bundles);
        let (generic, _) = hitting_set_exact(m, &bundles, greedy, BUDGET);
        let (pairwise, _) = pairwise_meeting_exact(m, &bundles, BUDGET);
        prop_assert!(generic.is_some());
        prop_assert_eq!(generic, pairwise);
        prop_assert_eq!(generic, Some(brute_piercing(&family)));
    }

    #[test]
    fn max_free_matches_enumeration(family in line_family(8), q in 3u32..=4) {
        let free = max_free_subfamily(&family, q, BUDGET).unwrap();
        prop_assert!(free.optimal);
        prop_assert_eq!(free.best.len(), brute_free(&family, q as usize));
        prop_assert_eq!(free.upper_bound, free.best.len());
    }

    #[test]
    fn packing_bound_dominates_integral_optimum(
        rows in 2usize..=7,
        raw in prop::collection::vec((prop::collection::btree_set(0usize..7, 1..=4), 1u32..=3), 1..=9),
    ) {
        let sets: Vec<Vec<usize>> = raw.iter().map(|(s, _)| s.iter().map(|&i| i % rows).collect::<BTreeSet<_>>().into_iter().collect()).collect();
        let weights: Vec<f64> = raw.iter().map(|(_, w)| *w as f64).collect();
        let lp = solve_packing(rows, &sets, &weights);
        let integral = subsets(sets.len())
            .filter(|chosen| {
                let mut used = vec![false; rows];
                chosen.iter().all(|&j| sets[j].iter().all(|&i| !std::mem::replace(&mut used[i], true)))
            })
            .map(|chosen| chosen.iter().map(|&j| weights[j]).sum::<f64>())
            .fold(0.0, f64::max);
        prop_assert!(lp.bound >= integral - 1e-9, "bound {} < integral {}", lp.bound, integral);
        prop_assert!(lp.bound >= lp.value - 1e-6);
        prop_assert!(lp.value >= integral - 1e-6);
    }

    #[test]
    fn chromatic_matches_enumeration(points in point_set(2, 4, 8), q in 2u32..=3) {
        let h = build_hq(&points, q).unwrap();
        let chi = chromatic_number(&h, BUDGET);
        prop_assert_eq!(chi.exact, Some(brute_chromatic(&h)));
        prop_assert!(h.is_proper(chi.exact_coloring.as_ref().unwrap()));
        prop_assert!(h.is_proper(&greedy_coloring(&h)));
        prop_assert!(chi.lower <= chi.exact.unwrap() && chi.exact.unwrap() <= chi.greedy_upper);
    }
}
