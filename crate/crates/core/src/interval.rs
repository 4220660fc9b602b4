//! Intervals with exact endpoints and per-endpoint openness.
//!
//! Throughout the crate two intervals are the *same element* when their
//! closures agree; openness only matters for point membership (atoms).

use std::fmt;

use crate::scalar::Scalar;

/// A nonempty interval `lo < hi` with independent endpoint openness.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval<S> {
    lo: S,
    hi: S,
    lo_open: bool,
    hi_open: bool,
}

impl<S: Scalar> Interval<S> {
    /// Returns `None` (the empty marker) unless `lo < hi`.
    pub fn new(lo: S, hi: S, lo_open: bool, hi_open: bool) -> Option<Self> {
        (lo < hi && !lo.same(&hi)).then_some(Self {
            lo,
            hi,
            lo_open,
            hi_open,
        })
    }

    pub fn open(lo: S, hi: S) -> Option<Self> {
        Self::new(lo, hi, true, true)
    }

    pub fn closed(lo: S, hi: S) -> Option<Self> {
        Self::new(lo, hi, false, false)
    }

    pub fn lo(&self) -> &S {
        &self.lo
    }

    pub fn hi(&self) -> &S {
        &self.hi
    }

    pub fn lo_open(&self) -> bool {
        self.lo_open
    }

    pub fn hi_open(&self) -> bool {
        self.hi_open
    }

    pub fn length(&self) -> S {
        self.hi.clone() - self.lo.clone()
    }

    /// Point membership honouring the openness flags.
    pub fn contains(&self, x: &S) -> bool {
        let above = if self.lo_open {
            &self.lo < x
        } else {
            &self.lo <= x
        };
        let below = if self.hi_open {
            x < &self.hi
        } else {
            x <= &self.hi
        };
        above && below
    }

    /// `lo < x < hi`.
    pub fn interior_contains(&self, x: &S) -> bool {
        &self.lo < x && x < &self.hi
    }

    pub fn closure_contains(&self, x: &S) -> bool {
        self.lo.le_tol(x) && x.le_tol(&self.hi)
    }

    /// Identity key: the closure as a pair of endpoint keys.
    pub fn closure_key(&self) -> (S::Key, S::Key) {
        (self.lo.key(), self.hi.key())
    }

    pub fn same_closure(&self, other: &Self) -> bool {
        self.lo.same(&other.lo) && self.hi.same(&other.hi)
    }

    /// Closure of `self` is contained in closure of `other`.
    pub fn within(&self, other: &Self) -> bool {
        other.lo.le_tol(&self.lo) && self.hi.le_tol(&other.hi)
    }

    /// Contained in `other` but with a different closure.
    pub fn strictly_within(&self, other: &Self) -> bool {
        self.within(other) && !self.same_closure(other)
    }

    /// Interiors overlap.
    pub fn overlaps(&self, other: &Self) -> bool {
        self.lo.lt_tol(&other.hi) && other.lo.lt_tol(&self.hi)
    }

    /// Set intersection; `None` when the interior is empty.
    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let (lo, lo_open) = if self.lo > other.lo {
            (self.lo.clone(), self.lo_open)
        } else if other.lo > self.lo {
            (other.lo.clone(), other.lo_open)
        } else {
            (self.lo.clone(), self.lo_open || other.lo_open)
        };
        let (hi, hi_open) = if self.hi < other.hi {
            (self.hi.clone(), self.hi_open)
        } else if other.hi < self.hi {
            (other.hi.clone(), other.hi_open)
        } else {
            (self.hi.clone(), self.hi_open || other.hi_open)
        };
        Self::new(lo, hi, lo_open, hi_open)
    }

    /// Image under a monotone map given by its endpoint values.
    pub fn monotone_image(&self, f: impl Fn(&S) -> S, increasing: bool) -> Option<Self> {
        let a = f(&self.lo);
        let b = f(&self.hi);
        if increasing {
            Self::new(a, b, self.lo_open, self.hi_open)
        } else {
            Self::new(b, a, self.hi_open, self.lo_open)
        }
    }

    /// Image under `x -> slope * x + offset` (slope nonzero).
    pub fn affine_image(&self, slope: &S, offset: &S) -> Option<Self> {
        self.monotone_image(
            |x| slope.clone() * x.clone() + offset.clone(),
            slope.is_positive(),
        )
    }

    pub fn interior(&self) -> Self {
        Self {
            lo: self.lo.clone(),
            hi: self.hi.clone(),
            lo_open: true,
            hi_open: true,
        }
    }

    pub fn closure(&self) -> Self {
        Self {
            lo: self.lo.clone(),
            hi: self.hi.clone(),
            lo_open: false,
            hi_open: false,
        }
    }

    /// The point `lo + t * (hi - lo)`.
    pub fn point_at(&self, t: &S) -> S {
        self.lo.clone() + t.clone() * self.length()
    }

    pub fn midpoint(&self) -> S {
        self.point_at(&(S::one() / S::two()))
    }

    /// `lo..hi` with full-precision endpoints, as used by the dump formats.
    pub fn dots(&self) -> String {
        format!("{}..{}", self.lo.render(), self.hi.render())
    }
}

impl<S: Scalar> fmt::Display for Interval<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{},{}{}",
            if self.lo_open { '(' } else { '[' },
            self.lo.render_compact(),
            self.hi.render_compact(),
            if self.hi_open { ')' } else { ']' }
        )
    }
}

/// Merges intervals whose closures overlap or touch into open intervals,
/// sorted by left endpoint. Finitely many points are ignored.
pub fn merge_closures<S: Scalar>(mut items: Vec<Interval<S>>) -> Vec<Interval<S>> {
    items.sort_by(|a, b| a.lo.partial_cmp(&b.lo).expect("comparable endpoints"));
    let mut out: Vec<Interval<S>> = Vec::with_capacity(items.len());
    for iv in items {
        match out.last_mut() {
            Some(last) if iv.lo.le_tol(&last.hi) => {
                if iv.hi > last.hi {
                    last.hi = iv.hi;
                }
            }
            _ => out.push(iv.interior()),
        }
    }
    out
}

/// True when the union of `pieces` covers `target` up to finitely many points.
pub fn covers<S: Scalar>(pieces: &[Interval<S>], target: &Interval<S>) -> bool {
    let merged = merge_closures(pieces.iter().filter_map(|p| p.intersect(target)).collect());
    merged.len() == 1 && merged[0].same_closure(target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, Rational};

    fn iv(a: (i64, i64), b: (i64, i64)) -> Interval<Rational> {
        Interval::open(q(a.0, a.1), q(b.0, b.1)).unwrap()
    }

    #[test]
    fn empty_marker_for_degenerate_input() {
        assert!(Interval::open(q(1, 2), q(1, 2)).is_none());
        assert!(Interval::open(q(1, 2), q(1, 3)).is_none());
    }

    #[test]
    fn intersection_keeps_openness() {
        let a = Interval::new(q(1, 3), q(17, 48), false, false).unwrap();
        let b = iv((1, 3), (5, 12));
        let c = a.intersect(&b).unwrap();
        assert!(c.lo_open() && !c.hi_open());
        assert_eq!(c.length(), q(1, 48));
        assert_eq!(c.to_string(), "(1/3,17/48]");
        assert!(iv((0, 1), (1, 2)).intersect(&iv((1, 2), (1, 1))).is_none());
    }

    #[test]
    fn affine_image_flips_for_negative_slope() {
        let a = Interval::new(q(0, 1), q(1, 2), false, true).unwrap();
        let img = a.affine_image(&q(-2, 1), &q(1, 1)).unwrap();
        assert_eq!(img, Interval::new(q(0, 1), q(1, 1), true, false).unwrap());
    }

    #[test]
    fn merging_and_cover() {
        let pieces = vec![iv((1, 2), (1, 1)), iv((0, 1), (1, 2))];
        let merged = merge_closures(pieces.clone());
        assert_eq!(merged, vec![iv((0, 1), (1, 1))]);
        assert!(covers(&pieces, &iv((0, 1), (1, 1))));
        assert!(!covers(&[iv((0, 1), (1, 3))], &iv((0, 1), (1, 2))));
    }

    #[test]
    fn membership_respects_flags() {
        let a = Interval::new(q(0, 1), q(1, 1), false, true).unwrap();
        assert!(a.contains(&q(0, 1)));
        assert!(!a.contains(&q(1, 1)));
        assert!(a.closure_contains(&q(1, 1)));
        assert!(!a.interior_contains(&q(0, 1)));
    }
}
