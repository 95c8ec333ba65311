//! From a point set in `Z^k` to a planar line family: a collinearity-faithful
//! integer projection, point-line duality, the `(p, q)` check on the dual
//! family, and piercing-number bounds.

use std::collections::{BTreeMap, HashMap};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arith::ratio_string;
use crate::error::{domain, Error, Result};
use crate::lp::solve_packing;
use crate::geometry::{is_collinear, maximal_sections, Point};
use crate::grid::GridSpec;
use crate::plan::{ParameterPlan, ASYMPTOTIC_BANNER};
use crate::randcon::RandomSubsetRun;
use crate::search::{decide_subset, min_deletion, Constraint, Decision};

/// Coefficients are drawn from `[-COEFF_RANGE, COEFF_RANGE]`.
pub const COEFF_RANGE: i64 = 1 << 20;
pub const PROJECTION_RETRIES: u32 = 64;
/// Largest bundle the pairing solver expands into sub-bundles.
pub const PAIRWISE_BUNDLE_CAP: usize = 10;
/// Exhaustive triple verification up to this many points.
pub const TRIPLE_CHECK_CAP: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TripleCheck {
    Exhaustive,
    /// Only the maximal-section comparison was run.
    SectionsOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarPointSet {
    /// Image points, in the order of the source set.
    pub points: Vec<Point>,
    pub coeffs_x: Vec<i64>,
    pub coeffs_y: Vec<i64>,
    /// SHA-256 of the source points as JSON.
    pub source_digest: String,
    pub attempts: u32,
    pub triple_check: TripleCheck,
}

pub fn digest_points(points: &[Point]) -> String {
    let bytes = serde_json::to_vec(points).expect("points serialize");
    hex::encode(Sha256::digest(bytes))
}

fn apply(coeffs_x: &[i64], coeffs_y: &[i64], p: &Point) -> Point {
    let dot = |c: &[i64]| c.iter().zip(&p.0).map(|(a, x)| a * x).sum::<i64>();
    Point(vec![dot(coeffs_x), dot(coeffs_y)])
}

fn section_sets(points: &[Point]) -> Vec<Vec<usize>> {
    let mut v: Vec<Vec<usize>> = maximal_sections(points, 3).into_iter().map(|s| s.members).collect();
    v.sort();
    v
}

/// Check that `image` has the same collinear triples as `source`, distinct
/// points, and pairwise distinct x-coordinates.
pub fn verify_projection(source: &[Point], image: &[Point], exhaustive: bool) -> Result<bool> {
    let mut xs: Vec<i64> = image.iter().map(|p| p.0[0]).collect();
    xs.sort_unstable();
    if xs.windows(2).any(|w| w[0] == w[1]) {
        return Ok(false);
    }
    if section_sets(source) != section_sets(image) {
        return Ok(false);
    }
    if exhaustive {
        let m = source.len();
        for a in 0..m {
            for b in a + 1..m {
                for c in b + 1..m {
                    let s = is_collinear(&[source[a].clone(), source[b].clone(), source[c].clone()])?;
                    let t = is_collinear(&[image[a].clone(), image[b].clone(), image[c].clone()])?;
                    if s != t {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Project `source` to the plane by a seeded random integer linear map,
/// retrying until the image is verified collinearity-faithful with all
/// x-coordinates distinct.
pub fn project_to_plane(source: &[Point], seed: u64) -> Result<PlanarPointSet> {
    if source.is_empty() {
        return Err(Error::Precondition("cannot project an empty set".into()));
    }
    let k = source[0].dim();
    if source.iter().any(|p| p.dim() != k) {
        return domain("points of mixed dimension");
    }
    let bound = source.iter().flat_map(|p| p.0.iter()).map(|x| x.unsigned_abs()).max().unwrap_or(0);
    if (bound as f64) * (k as f64) * (COEFF_RANGE as f64) > 4e18 {
        return domain("coordinates too large for an i64 projection");
    }
    let exhaustive = source.len() <= TRIPLE_CHECK_CAP;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for attempt in 1..=PROJECTION_RETRIES {
        let mut draw = || (0..k).map(|_| rng.random_range(-COEFF_RANGE..=COEFF_RANGE)).collect::<Vec<i64>>();
        let (coeffs_x, coeffs_y) = (draw(), draw());
        let image: Vec<Point> = source.iter().map(|p| apply(&coeffs_x, &coeffs_y, p)).collect();
        if verify_projection(source, &image, exhaustive)? {
            return Ok(PlanarPointSet {
                points: image,
                coeffs_x,
                coeffs_y,
                source_digest: digest_points(source),
                attempts: attempt,
                triple_check: if exhaustive { TripleCheck::Exhaustive } else { TripleCheck::SectionsOnly },
            });
        }
    }
    Err(Error::Verification(format!("no faithful projection after {PROJECTION_RETRIES} attempts")))
}

/// The line `y = slope * x - offset`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DualLine {
    pub slope: i64,
    pub offset: i64,
}

impl DualLine {
    pub fn contains(&self, x: &Ratio<i128>, y: &Ratio<i128>) -> bool {
        *y == x * Ratio::from_integer(self.slope as i128) - Ratio::from_integer(self.offset as i128)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineFamily {
    pub lines: Vec<DualLine>,
}

/// `(a, b) -> y = a x - b`.
pub fn dualize(points: &[Point]) -> Result<LineFamily> {
    if let Some(p) = points.iter().find(|p| p.dim() != 2) {
        return domain(format!("dualize needs planar points, got {:?}", p.0));
    }
    let mut xs: Vec<i64> = points.iter().map(|p| p.0[0]).collect();
    xs.sort_unstable();
    if xs.windows(2).any(|w| w[0] == w[1]) {
        return domain("two points share an x-coordinate; their dual lines are parallel");
    }
    Ok(LineFamily { lines: points.iter().map(|p| DualLine { slope: p.0[0], offset: p.0[1] }).collect() })
}

/// Exact intersection of two non-parallel lines.
pub fn intersection(a: &DualLine, b: &DualLine) -> Option<(Ratio<i128>, Ratio<i128>)> {
    if a.slope == b.slope {
        return None;
    }
    let x = Ratio::new(a.offset as i128 - b.offset as i128, a.slope as i128 - b.slope as i128);
    let y = x * Ratio::from_integer(a.slope as i128) - Ratio::from_integer(a.offset as i128);
    Some((x, y))
}

/// A point where two or more lines meet, with the indices of all of them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bundle {
    pub x: String,
    pub y: String,
    pub lines: Vec<usize>,
}

/// All intersection points with the full set of lines through each, sorted
/// by (size descending, line indices).
pub fn concurrency_classes(family: &LineFamily) -> Vec<Bundle> {
    let lines = &family.lines;
    let mut at: HashMap<(Ratio<i128>, Ratio<i128>), Vec<usize>> = HashMap::new();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            if let Some(pt) = intersection(&lines[i], &lines[j]) {
                let e = at.entry(pt).or_default();
                e.push(i);
                e.push(j);
            }
        }
    }
    let mut out: Vec<Bundle> = at
        .into_iter()
        .map(|((x, y), mut v)| {
            v.sort_unstable();
            v.dedup();
            Bundle { x: x.to_string(), y: y.to_string(), lines: v }
        })
        .collect();
    out.sort_by(|a, b| b.lines.len().cmp(&a.lines.len()).then_with(|| a.lines.cmp(&b.lines)));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum PqVerdict {
    /// Every sub-family of `p` lines has `q` concurrent: the largest
    /// sub-family without `q` concurrent has at most `max_free_upper < p` lines.
    Proved { max_free_upper: usize },
    /// `p` lines with no `q` concurrent.
    Refuted { witness: Vec<usize> },
    Unknown { best_free: usize, max_free_upper: usize },
}

fn concurrency_constraints(bundles: &[Bundle], q: u32) -> Vec<Constraint> {
    bundles
        .iter()
        .filter(|b| b.lines.len() >= q as usize)
        .map(|b| Constraint { members: b.lines.clone(), cap: q as usize - 1 })
        .collect()
}

/// Decide the `(p, q)` property of a line family.
pub fn verify_pq_property(family: &LineFamily, p: usize, q: u32, budget: u64) -> Result<PqVerdict> {
    if q < 3 || p < q as usize {
        return Err(Error::Precondition(format!("needs p >= q >= 3, got p={p}, q={q}")));
    }
    let cons = concurrency_constraints(&concurrency_classes(family), q);
    Ok(match decide_subset(family.lines.len(), &cons, p, budget) {
        Decision::Found(w) => PqVerdict::Refuted { witness: w },
        Decision::Impossible { upper } => PqVerdict::Proved { max_free_upper: upper },
        Decision::Unknown { best, upper } => PqVerdict::Unknown { best_free: best.len(), max_free_upper: upper },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeSubfamily {
    /// Largest sub-family found with no `q` concurrent lines.
    pub best: Vec<usize>,
    /// Proved upper bound on its size.
    pub upper_bound: usize,
    pub optimal: bool,
}

/// Largest sub-family with no `q` lines through a common point.
pub fn max_free_subfamily(family: &LineFamily, q: u32, budget: u64) -> Result<FreeSubfamily> {
    if q < 2 {
        return Err(Error::Precondition(format!("q must be >= 2, got {q}")));
    }
    let m = family.lines.len();
    let cons = concurrency_constraints(&concurrency_classes(family), q);
    let res = min_deletion(m, &cons, None, budget);
    let best = res.kept(m);
    let upper_bound = if res.exhausted { best.len() } else { m - res.lower_bound.min(m) };
    Ok(FreeSubfamily { upper_bound, optimal: res.exhausted, best })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piercing {
    pub max_concurrency: usize,
    /// `|F| / max_concurrency` as `"p/q"`.
    pub lower: String,
    pub lower_ceil: usize,
    pub exact: Option<usize>,
    pub greedy_upper: usize,
    /// A piercing set realizing `greedy_upper`: intersection points as
    /// `"x,y"`, or `"line:i"` for a private point on line `i`.
    pub greedy_points: Vec<String>,
    pub nodes: u64,
}

/// Lower, greedy, and (within budget) exact piercing numbers.
pub fn piercing_number(family: &LineFamily, budget: u64) -> Result<Piercing> {
    let m = family.lines.len();
    let mut uniq = family.lines.clone();
    uniq.sort();
    uniq.dedup();
    if uniq.len() != m {
        return domain("line family has duplicate lines");
    }
    let bundles = concurrency_classes(family);
    let max_concurrency = bundles.first().map(|b| b.lines.len()).unwrap_or(if m > 0 { 1 } else { 0 });
    let (lower, lower_ceil) = if m == 0 {
        ("0/1".to_string(), 0)
    } else {
        let r = Ratio::new(m as i64, max_concurrency as i64);
        (format!("{}/{}", r.numer(), r.denom()), r.ceil().to_integer() as usize)
    };
    let (greedy_upper, greedy_points) = greedy_piercing(m, &bundles);
    let has_parallel = {
        let mut slopes: Vec<i64> = family.lines.iter().map(|l| l.slope).collect();
        slopes.sort_unstable();
        slopes.windows(2).any(|w| w[0] == w[1])
    };
    let (exact, nodes) = if has_parallel || max_concurrency > PAIRWISE_BUNDLE_CAP {
        hitting_set_exact(m, &bundles, greedy_upper, budget)
    } else {
        pairwise_meeting_exact(m, &bundles, budget)
    };
    Ok(Piercing { max_concurrency, lower, lower_ceil, exact, greedy_upper, greedy_points, nodes })
}

/// Repeatedly take the point meeting most unpierced lines; lines meeting no
/// other line get a private point.
pub fn greedy_piercing(m: usize, bundles: &[Bundle]) -> (usize, Vec<String>) {
    let mut pierced = vec![false; m];
    let mut chosen = Vec::new();
    loop {
        let best = bundles
            .iter()
            .map(|b| (b.lines.iter().filter(|&&l| !pierced[l]).count(), b))
            .filter(|(c, _)| *c > 0)
            .max_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.lines.cmp(&a.1.lines)));
        let Some((_, b)) = best else { break };
        for &l in &b.lines {
            pierced[l] = true;
        }
        chosen.push(format!("{},{}", b.x, b.y));
    }
    for (l, p) in pierced.iter().enumerate() {
        if !p {
            chosen.push(format!("line:{l}"));
        }
    }
    (chosen.len(), chosen)
}

/// Generic exact minimum piercing over intersection points (plus private
/// points for lines meeting nothing), by branch and bound on the uncovered
/// line with fewest candidate points.
pub fn hitting_set_exact(m: usize, bundles: &[Bundle], upper: usize, budget: u64) -> (Option<usize>, u64) {
    let mut through: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (bi, b) in bundles.iter().enumerate() {
        for &l in &b.lines {
            through[l].push(bi);
        }
    }
    let isolated = through.iter().filter(|t| t.is_empty()).count();
    let max_size = bundles.first().map(|b| b.lines.len()).unwrap_or(1).max(1);
    struct St<'a> {
        bundles: &'a [Bundle],
        through: &'a [Vec<usize>],
        cover: Vec<u32>,
        best: usize,
        nodes: u64,
        budget: u64,
        aborted: bool,
        max_size: usize,
    }
    fn go(st: &mut St, used: usize, uncovered: usize) {
        if st.aborted {
            return;
        }
        st.nodes += 1;
        if st.nodes > st.budget {
            st.aborted = true;
            return;
        }
        if uncovered == 0 {
            st.best = st.best.min(used);
            return;
        }
        if used + uncovered.div_ceil(st.max_size) >= st.best {
            return;
        }
        let line = (0..st.through.len())
            .filter(|&l| st.cover[l] == 0 && !st.through[l].is_empty())
            .min_by_key(|&l| st.through[l].len())
            .expect("uncovered line");
        let mut options = st.through[line].clone();
        options.sort_by_key(|&b| std::cmp::Reverse(st.bundles[b].lines.iter().filter(|&&x| st.cover[x] == 0).count()));
        for b in options {
            let mut gained = 0;
            for &l in &st.bundles[b].lines {
                if st.cover[l] == 0 {
                    gained += 1;
                }
                st.cover[l] += 1;
            }
            go(st, used + 1, uncovered - gained);
            for &l in &st.bundles[b].lines {
                st.cover[l] -= 1;
            }
            if st.aborted {
                return;
            }
        }
    }
    let coverable = m - isolated;
    let mut st = St {
        bundles,
        through: &through,
        cover: vec![0; m],
        best: upper.saturating_sub(isolated) + 1,
        nodes: 0,
        budget,
        aborted: false,
        max_size,
    };
    go(&mut st, 0, coverable);
    if st.aborted {
        (None, st.nodes)
    } else {
        (Some(st.best.min(upper.saturating_sub(isolated)) + isolated), st.nodes)
    }
}

/// Exact piercing when every two lines meet. Points on at most two lines can
/// be replaced by pairing, so the optimum is
/// `min over rich point sets R of |R| + ceil((|F| - |U R|)/2)`,
/// i.e. `ceil((|F| - W)/2)` with `W = max_R (|U R| - 2|R|)`.
pub fn pairwise_meeting_exact(m: usize, bundles: &[Bundle], budget: u64) -> (Option<usize>, u64) {
    let rich: Vec<&Vec<usize>> = bundles.iter().filter(|b| b.lines.len() >= 3).map(|b| &b.lines).collect();
    let mut comps = rich_components(m, &rich);
    comps.sort_by_key(|c| c.len());
    let mut nodes = 0u64;
    let mut w_total = 0i64;
    let last = comps.len().saturating_sub(1);
    for (ci, comp) in comps.iter().enumerate() {
        let sets: Vec<&Vec<usize>> = comp.iter().map(|&i| rich[i]).collect();
        // the last component only needs to be optimal up to the final rounding
        let slack = (ci == last).then_some(m as i64 - w_total);
        match max_gain(m, &sets, slack, budget.saturating_sub(nodes), &mut nodes) {
            Some(w) => w_total += w,
            None => return (None, nodes),
        }
    }
    (Some(((m as i64 - w_total + 1) / 2) as usize), nodes)
}

fn rich_components(m: usize, rich: &[&Vec<usize>]) -> Vec<Vec<usize>> {
    let mut owner: Vec<Option<usize>> = vec![None; m];
    let mut parent: Vec<usize> = (0..rich.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (i, s) in rich.iter().enumerate() {
        for &l in s.iter() {
            match owner[l] {
                None => owner[l] = Some(i),
                Some(o) => {
                    let (a, b) = (find(&mut parent, o), find(&mut parent, i));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..rich.len() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// `max_R (|U R| - 2|R|)` over subsets of `sets`. Each chosen point can be
/// charged to disjoint parts of its bundle, so this is the maximum weight
/// packing of subsets of size `t >= 3` of bundles, with weight `t - 2`,
/// solved by branch and bound on the packing LP.
///
/// With `slack = Some(rest)` the result is only guaranteed to minimize
/// `ceil((rest - gain) / 2)`.
fn max_gain(m: usize, sets: &[&Vec<usize>], slack: Option<i64>, budget: u64, nodes: &mut u64) -> Option<i64> {
    let mut cand: Vec<(Vec<usize>, i64)> = Vec::new();
    for s in sets {
        let sz = s.len();
        for take in 3..=sz {
            for c in combinations(s, take) {
                cand.push((c, take as i64 - 2));
            }
        }
    }
    cand.sort();
    cand.dedup();
    let mut st = Packing { m, cand: &cand, slack, used: vec![false; m], banned: vec![false; cand.len()], best: 0, nodes: 0, budget, aborted: false };
    st.go(0);
    *nodes += st.nodes;
    (!st.aborted).then_some(st.best)
}

/// All `take`-subsets of `s`, in lexicographic index order.
fn combinations(s: &[usize], take: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..take).collect();
    loop {
        out.push(idx.iter().map(|&i| s[i]).collect());
        let mut i = take;
        while i > 0 && idx[i - 1] == s.len() - take + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..take {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Budget units charged per LP-bounded node.
pub const LP_NODE_COST: u64 = 1000;

struct Packing<'a> {
    m: usize,
    cand: &'a [(Vec<usize>, i64)],
    slack: Option<i64>,
    used: Vec<bool>,
    banned: Vec<bool>,
    best: i64,
    nodes: u64,
    budget: u64,
    aborted: bool,
}

impl Packing<'_> {
    fn no_better(&self, ceiling: i64) -> bool {
        match self.slack {
            Some(rest) => (rest - ceiling + 1).div_euclid(2) >= (rest - self.best + 1).div_euclid(2),
            None => ceiling <= self.best,
        }
    }

    fn go(&mut self, value: i64) {
        if self.aborted {
            return;
        }
        self.nodes += LP_NODE_COST;
        if self.nodes > self.budget {
            self.aborted = true;
            return;
        }
        self.best = self.best.max(value);
        let active: Vec<usize> = (0..self.cand.len())
            .filter(|&j| !self.banned[j] && self.cand[j].0.iter().all(|&l| !self.used[l]))
            .collect();
        if active.is_empty() {
            return;
        }
        let mut row = vec![usize::MAX; self.m];
        let mut rows = 0;
        let mut cols = Vec::with_capacity(active.len());
        let mut weights = Vec::with_capacity(active.len());
        for &j in &active {
            let mut c = Vec::with_capacity(self.cand[j].0.len());
            for &l in &self.cand[j].0 {
                if row[l] == usize::MAX {
                    row[l] = rows;
                    rows += 1;
                }
                c.push(row[l]);
            }
            cols.push(c);
            weights.push(self.cand[j].1 as f64);
        }
        let lp = solve_packing(rows, &cols, &weights);
        let ceiling = value + (lp.bound + 1e-7).floor() as i64;
        if self.no_better(ceiling) {
            return;
        }
        // round the LP point greedily for an incumbent
        let mut order: Vec<usize> = (0..active.len()).collect();
        order.sort_by(|&a, &b| lp.x[b].total_cmp(&lp.x[a]).then(a.cmp(&b)));
        let mut taken = vec![false; rows];
        let mut rounded = value;
        for &i in &order {
            if cols[i].iter().all(|&r| !taken[r]) {
                for &r in &cols[i] {
                    taken[r] = true;
                }
                rounded += self.cand[active[i]].1;
            }
        }
        self.best = self.best.max(rounded);
        if self.no_better(ceiling) {
            return;
        }
        let pick = (0..active.len())
            .filter(|&i| lp.x[i] > 1e-6 && lp.x[i] < 1.0 - 1e-6)
            .min_by(|&a, &b| (lp.x[a] - 0.5).abs().total_cmp(&(lp.x[b] - 0.5).abs()).then(a.cmp(&b)))
            .or_else(|| (0..active.len()).find(|&i| lp.x[i] > 0.5))
            .unwrap_or(0);
        let j = active[pick];
        for &l in &self.cand[j].0 {
            self.used[l] = true;
        }
        self.go(value + self.cand[j].1);
        for &l in &self.cand[j].0 {
            self.used[l] = false;
        }
        self.banned[j] = true;
        self.go(value);
        self.banned[j] = false;
    }
}

/// Everything needed to re-check a piercing lower bound without trusting
/// the code that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiercingCertificate {
    pub seed: u64,
    pub plan: ParameterPlan,
    pub grid: GridSpec,
    pub source_points: Vec<Point>,
    pub source_digest: String,
    pub coeffs_x: Vec<i64>,
    pub coeffs_y: Vec<i64>,
    pub projection_attempts: u32,
    pub triple_check: TripleCheck,
    pub family: LineFamily,
    /// Smallest `p` the search proves.
    pub p: usize,
    pub q: u32,
    pub u: u32,
    pub pq_verified: PqVerdict,
    pub p_plan: usize,
    pub pq_at_plan: PqVerdict,
    pub max_free: FreeSubfamily,
    pub max_concurrency: usize,
    /// `|F| / (u - 1)`.
    pub piercing_lower: String,
    pub piercing_lower_ceil: usize,
    /// `|F| / max_concurrency`.
    pub concurrency_lower: String,
    pub piercing_exact: Option<usize>,
    pub piercing_greedy: usize,
    pub greedy_points: Vec<String>,
    /// Bundle size to number of points where exactly that many lines meet.
    pub concurrency_histogram: BTreeMap<usize, usize>,
    /// `log_p(|F| / (u - 1))`.
    pub realized_t: Option<f64>,
    pub target: String,
    pub target_ideal: String,
    pub banner: Option<String>,
}

fn ratio_text(num: usize, den: usize) -> (String, usize) {
    let r = Ratio::new(num as i64, den.max(1) as i64);
    (format!("{}/{}", r.numer(), r.denom()), r.ceil().to_integer() as usize)
}

/// Project the survivors, dualize, and certify the `(p, q)` property and the
/// piercing bounds of the dual family.
pub fn emit_certificate(run: &RandomSubsetRun, plan: &ParameterPlan, budget: u64) -> Result<PiercingCertificate> {
    if run.survivors.is_empty() {
        return Err(Error::Precondition("run has no surviving points".into()));
    }
    if run.u != plan.u {
        return domain(format!("run used u={} but the plan has u={}", run.u, plan.u));
    }
    let planar = project_to_plane(&run.survivors, run.seed)?;
    let family = dualize(&planar.points)?;
    let m = family.lines.len();
    let q = plan.q;
    let max_free = max_free_subfamily(&family, q, budget)?;
    let p = (max_free.upper_bound + 1).max(q as usize);
    let pq_verified = PqVerdict::Proved { max_free_upper: max_free.upper_bound };
    let ln_n = (run.grid.n as f64).ln();
    let p_plan = ((plan.p_exp_f64() * ln_n).exp().ceil() as usize).max(q as usize);
    let pq_at_plan = if p_plan > max_free.upper_bound {
        PqVerdict::Proved { max_free_upper: max_free.upper_bound }
    } else if p_plan <= max_free.best.len() {
        PqVerdict::Refuted { witness: max_free.best[..p_plan].to_vec() }
    } else {
        verify_pq_property(&family, p_plan, q, budget)?
    };
    let pierce = piercing_number(&family, budget)?;
    let (piercing_lower, piercing_lower_ceil) = ratio_text(m, plan.u as usize - 1);
    let mut concurrency_histogram = BTreeMap::new();
    for b in concurrency_classes(&family) {
        *concurrency_histogram.entry(b.lines.len()).or_insert(0) += 1;
    }
    let realized_t = (p > 1).then(|| (m as f64 / (plan.u as f64 - 1.0)).ln() / (p as f64).ln());
    let hypotheses_met = plan.feasible_at(run.grid.n as f64);
    Ok(PiercingCertificate {
        seed: run.seed,
        plan: plan.clone(),
        grid: run.grid,
        source_points: run.survivors.clone(),
        source_digest: planar.source_digest,
        coeffs_x: planar.coeffs_x,
        coeffs_y: planar.coeffs_y,
        projection_attempts: planar.attempts,
        triple_check: planar.triple_check,
        family,
        p,
        q,
        u: plan.u,
        pq_verified,
        p_plan,
        pq_at_plan,
        max_free,
        max_concurrency: pierce.max_concurrency,
        piercing_lower,
        piercing_lower_ceil,
        concurrency_lower: pierce.lower,
        piercing_exact: pierce.exact,
        piercing_greedy: pierce.greedy_upper,
        greedy_points: pierce.greedy_points,
        concurrency_histogram,
        realized_t,
        target: ratio_string(&plan.target),
        target_ideal: ratio_string(&plan.target_ideal),
        banner: (!hypotheses_met).then(|| ASYMPTOTIC_BANNER.to_string()),
    })
}

fn fail<T>(what: impl Into<String>) -> Result<T> {
    Err(Error::Verification(what.into()))
}

fn free_of_q_concurrent(bundles: &[Bundle], subset: &[usize], q: u32) -> bool {
    let set: std::collections::HashSet<usize> = subset.iter().copied().collect();
    bundles.iter().all(|b| b.lines.iter().filter(|l| set.contains(l)).count() < q as usize)
}

fn parse_point(text: &str) -> Option<(Ratio<i128>, Ratio<i128>)> {
    let (x, y) = text.split_once(',')?;
    Some((x.parse().ok()?, y.parse().ok()?))
}

impl PiercingCertificate {
    /// Re-derive every checkable claim from the source points and the
    /// recorded projection.
    pub fn validate(&self) -> Result<()> {
        if digest_points(&self.source_points) != self.source_digest {
            return fail("source digest mismatch");
        }
        if self.coeffs_x.len() != self.grid.k as usize || self.coeffs_y.len() != self.grid.k as usize {
            return fail("projection has the wrong arity");
        }
        let image: Vec<Point> = self.source_points.iter().map(|p| apply(&self.coeffs_x, &self.coeffs_y, p)).collect();
        if !verify_projection(&self.source_points, &image, self.source_points.len() <= TRIPLE_CHECK_CAP)? {
            return fail("projection is not collinearity-faithful");
        }
        if dualize(&image)? != self.family {
            return fail("family is not the dual of the projected points");
        }
        let m = self.family.lines.len();
        let bundles = concurrency_classes(&self.family);
        let max_c = bundles.first().map(|b| b.lines.len()).unwrap_or(1);
        if max_c != self.max_concurrency {
            return fail("max concurrency mismatch");
        }
        if max_c >= self.u as usize {
            return fail(format!("{max_c} concurrent lines but u = {}", self.u));
        }
        let q = self.q;
        let best = &self.max_free.best;
        if !free_of_q_concurrent(&bundles, best, q) || best.iter().any(|&i| i >= m) {
            return fail("recorded free sub-family has q concurrent lines");
        }
        if best.len() > self.max_free.upper_bound || (self.max_free.optimal && best.len() != self.max_free.upper_bound) {
            return fail("free sub-family bounds are inconsistent");
        }
        for (p, verdict) in [(self.p, &self.pq_verified), (self.p_plan, &self.pq_at_plan)] {
            match verdict {
                PqVerdict::Proved { max_free_upper } => {
                    if *max_free_upper >= p || *max_free_upper < best.len() {
                        return fail(format!("proved verdict at p={p} with bound {max_free_upper}"));
                    }
                }
                PqVerdict::Refuted { witness } => {
                    let mut w = witness.clone();
                    w.sort_unstable();
                    w.dedup();
                    if w.len() != p || w.iter().any(|&i| i >= m) || !free_of_q_concurrent(&bundles, &w, q) {
                        return fail(format!("refutation witness at p={p} is invalid"));
                    }
                }
                PqVerdict::Unknown { .. } => {}
            }
        }
        if !matches!(self.pq_verified, PqVerdict::Proved { .. }) {
            return fail("certified p is not proved");
        }
        let (lower, lower_ceil) = ratio_text(m, self.u as usize - 1);
        if lower != self.piercing_lower || lower_ceil != self.piercing_lower_ceil {
            return fail("piercing lower bound mismatch");
        }
        let (conc, conc_ceil) = ratio_text(m, max_c);
        if conc != self.concurrency_lower {
            return fail("concurrency lower bound mismatch");
        }
        if self.greedy_points.len() != self.piercing_greedy {
            return fail("greedy size mismatch");
        }
        let mut pierced = vec![false; m];
        for text in &self.greedy_points {
            if let Some(i) = text.strip_prefix("line:") {
                let i: usize = i.parse().map_err(|_| Error::Verification(format!("bad point {text}")))?;
                *pierced.get_mut(i).ok_or_else(|| Error::Verification(format!("bad line {i}")))? = true;
                continue;
            }
            let (x, y) = parse_point(text).ok_or_else(|| Error::Verification(format!("bad point {text}")))?;
            for (l, line) in self.family.lines.iter().enumerate() {
                if line.contains(&x, &y) {
                    pierced[l] = true;
                }
            }
        }
        if pierced.iter().any(|p| !p) {
            return fail("greedy points do not pierce every line");
        }
        if let Some(e) = self.piercing_exact {
            if e < lower_ceil || e < conc_ceil || e > self.piercing_greedy {
                return fail(format!("exact piercing {e} outside its bounds"));
            }
        }
        let mut hist = BTreeMap::new();
        for b in &bundles {
            *hist.entry(b.lines.len()).or_insert(0) += 1;
        }
        if hist != self.concurrency_histogram {
            return fail("concurrency histogram mismatch");
        }
        Ok(())
    }

    /// `size,count` rows of the concurrency histogram.
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("size,count\n");
        for (s, c) in &self.concurrency_histogram {
            out.push_str(&format!("{s},{c}\n"));
        }
        out
    }
}
