//! Count/sum index over `(angle, ordinate)` entries, plus the eight-way
//! angle classification that turns its answers into summed deviations from
//! the ideal crossing angle.
//!
//! The index is a Fenwick tree over ordinate ranks (largest ordinate first)
//! whose nodes each hold the angles of the entries they cover, sorted, with
//! an inner Fenwick tree of counts and angle sums. The set of entries that
//! may ever be inserted is fixed at construction; `insert` activates one.
//! A query touches `O(log n)` outer nodes, each answered by a binary search
//! and an inner prefix query, for `O(log² n)` overall.

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CountSum {
    pub count: u64,
    pub sum: f64,
}

impl CountSum {
    fn minus(self, other: CountSum) -> CountSum {
        CountSum { count: self.count - other.count, sum: self.sum - other.sum }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Slot {
    count: u32,
    sum: f64,
}

/// Ordinates are ranked descending, so "ordinate above `r`" is an outer
/// prefix. Node `k` (1-based) owns `angles[start[k-1]..start[k]]` and the
/// matching inner Fenwick slots.
#[derive(Debug, Clone)]
pub struct RangeStructure2D {
    /// Distinct ordinates, descending.
    desc: Vec<f64>,
    /// Outer rank (1-based) of each universe entry.
    rank: Vec<u32>,
    angle: Vec<f64>,
    start: Vec<usize>,
    angles: Vec<f64>,
    slots: Vec<Slot>,
    totals: Vec<CountSum>,
    inserted: Vec<bool>,
    active: usize,
}

impl RangeStructure2D {
    /// Prepares an empty index over the given `(angle, ordinate)` universe.
    pub fn new(universe: &[(f64, f64)]) -> Self {
        let mut desc: Vec<f64> = universe.iter().map(|&(_, r)| r).collect();
        desc.sort_by(|a, b| b.total_cmp(a));
        desc.dedup();
        let m = desc.len();
        let rank: Vec<u32> = universe
            .iter()
            .map(|&(_, r)| (desc.partition_point(|&v| v > r) + 1) as u32)
            .collect();

        let mut start = vec![0usize; m + 1];
        for &k in &rank {
            let mut i = k as usize;
            while i <= m {
                start[i] += 1;
                i += i & i.wrapping_neg();
            }
        }
        for i in 1..=m {
            start[i] += start[i - 1];
        }
        let mut fill = start.clone();
        let mut angles = vec![0.0; start[m]];
        let mut by_angle: Vec<usize> = (0..universe.len()).collect();
        by_angle.sort_by(|&a, &b| universe[a].0.total_cmp(&universe[b].0));
        for &e in &by_angle {
            let mut i = rank[e] as usize;
            while i <= m {
                angles[fill[i - 1]] = universe[e].0;
                fill[i - 1] += 1;
                i += i & i.wrapping_neg();
            }
        }
        Self {
            desc,
            rank,
            angle: universe.iter().map(|&(a, _)| a).collect(),
            slots: vec![Slot::default(); angles.len()],
            angles,
            start,
            totals: vec![CountSum::default(); m],
            inserted: vec![false; universe.len()],
            active: 0,
        }
    }

    /// Number of inserted entries.
    pub fn len(&self) -> usize {
        self.active
    }

    pub fn is_empty(&self) -> bool {
        self.active == 0
    }

    /// Activates universe entry `entry`. Inserting twice is a no-op.
    pub fn insert(&mut self, entry: usize) {
        if std::mem::replace(&mut self.inserted[entry], true) {
            return;
        }
        self.active += 1;
        let angle = self.angle[entry];
        let m = self.desc.len();
        let mut k = self.rank[entry] as usize;
        while k <= m {
            let (lo, hi) = (self.start[k - 1], self.start[k]);
            let tree = &mut self.slots[lo..hi];
            let mut i = self.angles[lo..hi].partition_point(|&a| a < angle) + 1;
            while i <= tree.len() {
                tree[i - 1].count += 1;
                tree[i - 1].sum += angle;
                i += i & i.wrapping_neg();
            }
            self.totals[k - 1].count += 1;
            self.totals[k - 1].sum += angle;
            k += k & k.wrapping_neg();
        }
    }

    /// Count and angle sum of inserted entries with angle below each bound
    /// and ordinate strictly above `r_min`. `bounds` must be ascending.
    pub fn below_each<const N: usize>(&self, bounds: &[f64; N], r_min: f64) -> [CountSum; N] {
        debug_assert!(bounds.windows(2).all(|w| w[0] <= w[1]));
        let mut out = [CountSum::default(); N];
        let mut k = self.desc.partition_point(|&v| v > r_min);
        while k > 0 {
            let total = self.totals[k - 1];
            if total.count > 0 {
                let (lo, hi) = (self.start[k - 1], self.start[k]);
                let (angles, tree) = (&self.angles[lo..hi], &self.slots[lo..hi]);
                let mut pos = 0;
                for (acc, &b) in out.iter_mut().zip(bounds) {
                    pos += angles[pos..].partition_point(|&a| a < b);
                    if pos == 0 {
                        continue;
                    }
                    if pos == tree.len() {
                        acc.count += total.count;
                        acc.sum += total.sum;
                        continue;
                    }
                    let (mut count, mut sum) = (0u32, 0.0);
                    let mut i = pos;
                    while i > 0 {
                        count += tree[i - 1].count;
                        sum += tree[i - 1].sum;
                        i &= i - 1;
                    }
                    acc.count += u64::from(count);
                    acc.sum += sum;
                }
            }
            k &= k - 1;
        }
        out
    }

    /// Count and angle sum of inserted entries with angle in `[lo, hi)` and
    /// ordinate strictly above `r_min`.
    pub fn query(&self, lo: f64, hi: f64, r_min: f64) -> CountSum {
        if hi <= lo {
            return CountSum::default();
        }
        let [below_lo, below_hi] = self.below_each(&[lo, hi], r_min);
        below_hi.minus(below_lo)
    }
}

/// The eight relative-angle classes of a crossing partner `j` with respect
/// to the swept segment `i`, in ascending order of `θ_j - θ_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AngleCategory {
    /// `[θ - π, θ - π + ϑ)`
    RightOuterLess,
    /// `[θ - π + ϑ, θ - π/2)`
    RightOuterGreater,
    /// `[θ - π/2, θ - ϑ)`
    RightInnerGreater,
    /// `[θ - ϑ, θ)`
    RightInnerLess,
    /// `[θ, θ + ϑ)`
    LeftInnerLess,
    /// `[θ + ϑ, θ + π/2)`
    LeftInnerGreater,
    /// `[θ + π/2, θ + π - ϑ)`
    LeftOuterGreater,
    /// `[θ + π - ϑ, θ + π)`
    LeftOuterLess,
}

impl AngleCategory {
    pub const ALL: [AngleCategory; 8] = [
        AngleCategory::RightOuterLess,
        AngleCategory::RightOuterGreater,
        AngleCategory::RightInnerGreater,
        AngleCategory::RightInnerLess,
        AngleCategory::LeftInnerLess,
        AngleCategory::LeftInnerGreater,
        AngleCategory::LeftOuterGreater,
        AngleCategory::LeftOuterLess,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Boundaries of the eight classes for axis angle `theta`, ascending and
/// clipped to `[0, π]`.
///
/// Axis angles live in `[0, π)` and the classes tile `[θ - π, θ + π)`, so
/// every partner angle already sits at its true offset from `theta`;
/// clipping the boundaries is enough and no interval wraps.
pub fn category_bounds(theta: f64, ideal: f64) -> [f64; 9] {
    let half = PI / 2.0;
    [
        theta - PI,
        theta - PI + ideal,
        theta - half,
        theta - ideal,
        theta,
        theta + ideal,
        theta + half,
        theta + PI - ideal,
        theta + PI,
    ]
    .map(|b| b.clamp(0.0, PI))
}

/// Which class `theta_j` falls in relative to `theta_i`.
pub fn classify(theta_i: f64, theta_j: f64, ideal: f64) -> AngleCategory {
    let bounds = category_bounds(theta_i, ideal);
    let k = bounds[1..].iter().position(|&b| theta_j < b).unwrap_or(7);
    AngleCategory::ALL[k]
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AngleCategoryStats {
    pub totals: [CountSum; 8],
}

impl AngleCategoryStats {
    pub fn get(&self, c: AngleCategory) -> CountSum {
        self.totals[c.index()]
    }

    pub fn count(&self) -> u64 {
        self.totals.iter().map(|t| t.count).sum()
    }
}

/// Per-class count and angle sum of the inserted entries lying above
/// ordinate `r_i`.
pub fn category_stats(
    index: &RangeStructure2D,
    theta_i: f64,
    r_i: f64,
    ideal: f64,
) -> AngleCategoryStats {
    let below = index.below_each(&category_bounds(theta_i, ideal), r_i);
    let mut totals = [CountSum::default(); 8];
    for (k, t) in totals.iter_mut().enumerate() {
        *t = below[k + 1].minus(below[k]);
    }
    AngleCategoryStats { totals }
}

/// Number of partners and `Σ |ϑ - a_c(i, j)|` over them, from per-class
/// counts and angle sums alone.
pub fn deviation_from_categories(stats: &AngleCategoryStats, theta_i: f64, ideal: f64) -> (u64, f64) {
    use AngleCategory::*;
    let term = |c: AngleCategory| {
        let t = stats.get(c);
        (t.count as f64, t.sum)
    };
    let (n_lil, s_lil) = term(LeftInnerLess);
    let (n_lig, s_lig) = term(LeftInnerGreater);
    let (n_log, s_log) = term(LeftOuterGreater);
    let (n_lol, s_lol) = term(LeftOuterLess);
    let (n_ril, s_ril) = term(RightInnerLess);
    let (n_rig, s_rig) = term(RightInnerGreater);
    let (n_rog, s_rog) = term(RightOuterGreater);
    let (n_rol, s_rol) = term(RightOuterLess);
    let t = theta_i;
    let v = ideal;

    let deviation = v * n_lil - (s_lil - t * n_lil)
        + (s_lig - t * n_lig) - v * n_lig
        + (t * n_log - (s_log - PI * n_log)) - v * n_log
        + v * n_lol - (t * n_lol - (s_lol - PI * n_lol))
        + v * n_ril - (t * n_ril - s_ril)
        + (t * n_rig - s_rig) - v * n_rig
        + ((s_rog + PI * n_rog) - t * n_rog) - v * n_rog
        + v * n_rol - ((s_rol + PI * n_rol) - t * n_rol);
    (stats.count(), deviation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::crossing_angle;
    use crate::metrics::DEFAULT_IDEAL_ANGLE;
    use proptest::prelude::*;

    fn brute(entries: &[(f64, f64)], inserted: &[bool], lo: f64, hi: f64, r_min: f64) -> CountSum {
        let mut out = CountSum::default();
        for (&(a, r), &on) in entries.iter().zip(inserted) {
            if on && a >= lo && a < hi && r > r_min {
                out.count += 1;
                out.sum += a;
            }
        }
        out
    }

    #[test]
    fn empty_structure() {
        let idx = RangeStructure2D::new(&[(0.3, 1.0), (1.2, 2.0)]);
        let stats = category_stats(&idx, 0.5, 0.0, DEFAULT_IDEAL_ANGLE);
        assert_eq!(stats, AngleCategoryStats::default());
        assert!(idx.is_empty());
    }

    #[test]
    fn single_entry_membership() {
        let ideal = DEFAULT_IDEAL_ANGLE;
        let theta_i = 0.4;
        let theta_j = theta_i + ideal / 2.0;
        let mut idx = RangeStructure2D::new(&[(theta_j, 5.0)]);
        idx.insert(0);
        let stats = category_stats(&idx, theta_i, 1.0, ideal);
        for c in AngleCategory::ALL {
            let expect = if c == AngleCategory::LeftInnerLess {
                CountSum { count: 1, sum: theta_j }
            } else {
                CountSum::default()
            };
            assert_eq!(stats.get(c), expect, "{c:?}");
        }
        // partner below the swept ordinate is excluded
        let stats = category_stats(&idx, theta_i, 6.0, ideal);
        assert_eq!(stats, AngleCategoryStats::default());
        // strictness on the ordinate
        let stats = category_stats(&idx, theta_i, 5.0, ideal);
        assert_eq!(stats.count(), 0);
    }

    #[test]
    fn deviation_examples() {
        let ideal = DEFAULT_IDEAL_ANGLE;
        let mut idx = RangeStructure2D::new(&[(0.7, 1.0)]);
        idx.insert(0);
        let stats = category_stats(&idx, 0.7, 0.0, ideal);
        let (n, dev) = deviation_from_categories(&stats, 0.7, ideal);
        assert_eq!(n, 1);
        assert!((dev - ideal).abs() < 1e-12);

        let mut idx = RangeStructure2D::new(&[(0.2 + ideal, 1.0)]);
        idx.insert(0);
        let (n, dev) = deviation_from_categories(&category_stats(&idx, 0.2, 0.0, ideal), 0.2, ideal);
        assert_eq!(n, 1);
        assert!(dev.abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn query_matches_brute_force(
            entries in prop::collection::vec((0.0..PI, -5.0..5.0f64), 1..80),
            mask in prop::collection::vec(any::<bool>(), 80),
            lo in 0.0..PI,
            width in 0.0..PI,
            r_min in -6.0..6.0f64,
        ) {
            // coarsen ordinates so ties are common
            let entries: Vec<(f64, f64)> = entries.iter().map(|&(a, r)| (a, (r * 2.0).round() / 2.0)).collect();
            let mut idx = RangeStructure2D::new(&entries);
            let inserted: Vec<bool> = mask[..entries.len()].to_vec();
            for (i, &on) in inserted.iter().enumerate() {
                if on {
                    idx.insert(i);
                }
            }
            let got = idx.query(lo, lo + width, r_min);
            let want = brute(&entries, &inserted, lo, lo + width, r_min);
            prop_assert_eq!(got.count, want.count);
            prop_assert!((got.sum - want.sum).abs() < 1e-9);
        }

        #[test]
        fn categories_partition_and_match_direct_term(
            theta_i in 0.0..PI,
            theta_j in 0.0..PI,
            ideal in 0.01..(PI / 2.0),
        ) {
            let bounds = category_bounds(theta_i, ideal);
            let hits = (0..8).filter(|&k| theta_j >= bounds[k] && theta_j < bounds[k + 1]).count();
            prop_assert_eq!(hits, 1);

            let mut idx = RangeStructure2D::new(&[(theta_j, 1.0)]);
            idx.insert(0);
            let stats = category_stats(&idx, theta_i, 0.0, ideal);
            prop_assert_eq!(stats.get(classify(theta_i, theta_j, ideal)).count, 1);
            let (_, dev) = deviation_from_categories(&stats, theta_i, ideal);
            let direct = (ideal - crossing_angle(theta_i, theta_j)).abs();
            prop_assert!((dev - direct).abs() < 1e-9, "{} vs {}", dev, direct);
        }
    }
}
