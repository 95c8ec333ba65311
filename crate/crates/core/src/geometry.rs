//! Exact integer geometry in `Z^k`: points, canonical lines, collinearity,
//! and grouping of an arbitrary point set into maximal collinear sections.

use std::collections::HashMap;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An integer point in `Z^k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<i64>);

impl Point {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn sub(&self, other: &Point) -> Vec<i64> {
        self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()
    }

    pub fn offset(&self, dir: &[i64], steps: i64) -> Point {
        Point(self.0.iter().zip(dir).map(|(a, d)| a + steps * d).collect())
    }
}

impl From<Vec<i64>> for Point {
    fn from(v: Vec<i64>) -> Self {
        Point(v)
    }
}

impl<const K: usize> From<[i64; K]> for Point {
    fn from(v: [i64; K]) -> Self {
        Point(v.to_vec())
    }
}

/// Reduce a nonzero vector to its primitive form with the first nonzero
/// coordinate positive. Returns `None` for the zero vector.
pub fn primitive_direction(v: &[i64]) -> Option<Vec<i64>> {
    let g = v.iter().fold(0i64, |g, &x| g.gcd(&x));
    if g == 0 {
        return None;
    }
    let first = v.iter().copied().find(|&x| x != 0)?;
    let g = if first < 0 { -g } else { g };
    Some(v.iter().map(|&x| x / g).collect())
}

/// A line of `Z^k` in canonical form: primitive lexicographically positive
/// direction, and the unique lattice point of the line whose coordinate at the
/// first nonzero direction index `i` lies in `[0, dir_i)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LineKey {
    pub anchor: Vec<i64>,
    pub direction: Vec<i64>,
}

impl LineKey {
    /// Canonical key of the line through `p` with the (not necessarily
    /// primitive) direction `v`.
    pub fn through(p: &[i64], v: &[i64]) -> Option<LineKey> {
        let direction = primitive_direction(v)?;
        let lead = direction.iter().position(|&x| x != 0)?;
        let t = p[lead].div_euclid(direction[lead]);
        let anchor = p.iter().zip(&direction).map(|(a, d)| a - t * d).collect();
        Some(LineKey { anchor, direction })
    }

    pub fn from_points(p: &Point, q: &Point) -> Option<LineKey> {
        Self::through(&p.0, &p.sub(q))
    }

    /// Whether the lattice point `x` lies on this line.
    pub fn contains(&self, x: &[i64]) -> bool {
        let lead = match self.direction.iter().position(|&d| d != 0) {
            Some(i) => i,
            None => return false,
        };
        let diff = x[lead] - self.anchor[lead];
        if diff % self.direction[lead] != 0 {
            return false;
        }
        let t = diff / self.direction[lead];
        x.iter()
            .zip(&self.anchor)
            .zip(&self.direction)
            .all(|((xi, ai), di)| *xi == ai + t * di)
    }
}

/// Exact collinearity test for distinct points of a common dimension.
pub fn is_collinear(points: &[Point]) -> Result<bool> {
    if points.len() < 2 {
        return Err(Error::Precondition("is_collinear needs at least 2 points".into()));
    }
    let dim = points[0].dim();
    if points.iter().any(|p| p.dim() != dim) {
        return Err(Error::Domain("points of mixed dimension".into()));
    }
    let mut seen = std::collections::HashSet::with_capacity(points.len());
    for p in points {
        if !seen.insert(p) {
            return Err(Error::Domain(format!("duplicate point {:?}", p.0)));
        }
    }
    let base = &points[0];
    let d: Vec<i128> = points[1].sub(base).into_iter().map(i128::from).collect();
    for p in &points[2..] {
        let e: Vec<i128> = p.sub(base).into_iter().map(i128::from).collect();
        for a in 0..dim {
            for b in a + 1..dim {
                if d[a] * e[b] != d[b] * e[a] {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// A maximal collinear section of a finite point set: the members of the set
/// lying on one line, as sorted indices into the set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub line: LineKey,
    pub members: Vec<usize>,
}

/// Group a point set into its maximal collinear sections with at least
/// `min_size` (>= 2) members. Output is sorted by line key.
///
/// Each section is discovered from its lowest-index member, so the work is
/// `O(m^2)` direction hashes with `O(m)` live memory.
pub fn maximal_sections(points: &[Point], min_size: usize) -> Vec<Section> {
    let min_size = min_size.max(2);
    let mut out = Vec::new();
    let mut by_dir: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for i in 0..points.len() {
        by_dir.clear();
        for j in 0..points.len() {
            if i == j {
                continue;
            }
            if let Some(dir) = primitive_direction(&points[j].sub(&points[i])) {
                by_dir.entry(dir).or_default().push(j);
            }
        }
        for (dir, others) in by_dir.drain() {
            if others.len() + 1 < min_size || others.iter().any(|&j| j < i) {
                continue;
            }
            let mut members = others;
            members.push(i);
            members.sort_unstable();
            let line = LineKey::through(&points[i].0, &dir).expect("nonzero direction");
            out.push(Section { line, members });
        }
    }
    out.sort_by(|a, b| a.line.cmp(&b.line));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[&[i64]]) -> Vec<Point> {
        v.iter().map(|c| Point(c.to_vec())).collect()
    }

    #[test]
    fn collinearity_examples() {
        assert!(is_collinear(&pts(&[&[1, 1], &[2, 2], &[3, 3]])).unwrap());
        assert!(!is_collinear(&pts(&[&[1, 1], &[2, 2], &[3, 4]])).unwrap());
        assert!(is_collinear(&pts(&[&[1, 1, 1], &[2, 3, 5], &[3, 5, 9]])).unwrap());
        assert!(is_collinear(&pts(&[&[1, 1], &[1, 1]])).is_err());
        assert!(is_collinear(&pts(&[&[1, 1]])).is_err());
    }

    #[test]
    fn canonical_keys_agree_along_a_line() {
        let a = LineKey::through(&[1, 1, 1], &[2, 4, 8]).unwrap();
        let b = LineKey::through(&[3, 5, 9], &[-1, -2, -4]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.direction, vec![1, 2, 4]);
        assert_eq!(a.anchor[0], 0);
        assert!(a.contains(&[7, 13, 25]));
        assert!(!a.contains(&[7, 13, 26]));
        assert_eq!(primitive_direction(&[0, -6, 4]), Some(vec![0, 3, -2]));
        assert_eq!(primitive_direction(&[0, 0]), None);
    }

    #[test]
    fn sections_of_small_grid() {
        let grid: Vec<Point> = (1..=3)
            .flat_map(|x| (1..=3).map(move |y| Point(vec![x, y])))
            .collect();
        let triples = maximal_sections(&grid, 3);
        assert_eq!(triples.len(), 8);
        let pairs = maximal_sections(&grid, 2);
        // 36 pairs: 8 lines carry 3 pairs each, the remaining 12 pairs are 2-point lines.
        assert_eq!(pairs.len(), 8 + 12);
    }
}
