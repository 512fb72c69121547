//! Subsets of the real line: points, intervals, half-lines and finite unions.
//!
//! Every operation works on the normalized piece list: pieces are nonempty,
//! sorted by left endpoint, pairwise disjoint, and no two pieces can be merged
//! into one connected set. Open/closed endpoints are tracked exactly.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::extreal::ExtReal;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[derive(Default)]
pub enum SetDesc {
    #[default]
    Empty,
    Singleton {
        value: f64,
    },
    Interval {
        lo: f64,
        hi: f64,
        lo_closed: bool,
        hi_closed: bool,
    },
    /// `[lo, +inf)` or `(lo, +inf)`.
    HalfLine {
        lo: f64,
        lo_closed: bool,
    },
    /// `(-inf, hi]` or `(-inf, hi)`.
    LowerHalfLine {
        hi: f64,
        hi_closed: bool,
    },
    /// The whole real line.
    Line,
    FiniteUnion {
        parts: Vec<SetDesc>,
    },
}

/// One connected component. Unbounded sides use `±f64::INFINITY` with an
/// open endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub lo_closed: bool,
    pub hi: f64,
    pub hi_closed: bool,
}

impl Piece {
    pub fn new(lo: f64, lo_closed: bool, hi: f64, hi_closed: bool) -> Self {
        Piece {
            lo,
            lo_closed: lo_closed && lo.is_finite(),
            hi,
            hi_closed: hi_closed && hi.is_finite(),
        }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Piece::new(lo, true, hi, true)
    }

    pub fn is_empty(&self) -> bool {
        if self.lo.is_nan() || self.hi.is_nan() {
            return true;
        }
        match self.lo.partial_cmp(&self.hi) {
            Some(Ordering::Less) => false,
            Some(Ordering::Equal) => !(self.lo_closed && self.hi_closed),
            _ => true,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        let above = v > self.lo || (v == self.lo && self.lo_closed);
        let below = v < self.hi || (v == self.hi && self.hi_closed);
        above && below
    }

    /// Distance from `v` to the piece (equivalently, to its closure).
    pub fn dist(&self, v: f64) -> f64 {
        if v < self.lo {
            self.lo - v
        } else if v > self.hi {
            v - self.hi
        } else {
            0.0
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn intersect(&self, other: &Piece) -> Piece {
        let (lo, lo_closed) = match self.lo.partial_cmp(&other.lo) {
            Some(Ordering::Greater) => (self.lo, self.lo_closed),
            Some(Ordering::Less) => (other.lo, other.lo_closed),
            _ => (self.lo, self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Less) => (self.hi, self.hi_closed),
            Some(Ordering::Greater) => (other.hi, other.hi_closed),
            _ => (self.hi, self.hi_closed && other.hi_closed),
        };
        Piece::new(lo, lo_closed, hi, hi_closed)
    }

    /// `other ⊆ self`, endpoint closedness respected.
    fn covers(&self, other: &Piece) -> bool {
        let lo_ok = self.lo < other.lo || (self.lo == other.lo && (self.lo_closed || !other.lo_closed));
        let hi_ok = self.hi > other.hi || (self.hi == other.hi && (self.hi_closed || !other.hi_closed));
        lo_ok && hi_ok
    }

    fn to_desc(self) -> SetDesc {
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) if self.lo == self.hi => SetDesc::Singleton { value: self.lo },
            (true, true) => SetDesc::Interval {
                lo: self.lo,
                hi: self.hi,
                lo_closed: self.lo_closed,
                hi_closed: self.hi_closed,
            },
            (true, false) => SetDesc::HalfLine {
                lo: self.lo,
                lo_closed: self.lo_closed,
            },
            (false, true) => SetDesc::LowerHalfLine {
                hi: self.hi,
                hi_closed: self.hi_closed,
            },
            (false, false) => SetDesc::Line,
        }
    }
}

impl SetDesc {
    pub fn point(value: f64) -> Self {
        SetDesc::from_pieces(vec![Piece::closed(value, value)])
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        SetDesc::from_pieces(vec![Piece::closed(lo, hi)])
    }

    pub fn interval(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Self {
        SetDesc::from_pieces(vec![Piece::new(lo, lo_closed, hi, hi_closed)])
    }

    /// `[lo, +inf)`.
    pub fn halfline(lo: f64) -> Self {
        SetDesc::from_pieces(vec![Piece::new(lo, true, f64::INFINITY, false)])
    }

    pub fn line() -> Self {
        SetDesc::Line
    }

    pub fn union_of(parts: impl IntoIterator<Item = SetDesc>) -> Self {
        SetDesc::from_pieces(parts.into_iter().flat_map(|p| p.raw_pieces()).collect())
    }

    /// Builds the normalized description of the union of `pieces`.
    pub fn from_pieces(mut pieces: Vec<Piece>) -> Self {
        pieces.retain(|p| !p.is_empty());
        pieces.sort_by(|a, b| {
            a.lo.partial_cmp(&b.lo)
                .unwrap_or(Ordering::Equal)
                .then_with(|| b.lo_closed.cmp(&a.lo_closed))
        });
        let mut merged: Vec<Piece> = Vec::with_capacity(pieces.len());
        for p in pieces {
            if let Some(cur) = merged.last_mut() {
                let touches = p.lo < cur.hi || (p.lo == cur.hi && (cur.hi_closed || p.lo_closed));
                if touches {
                    if p.hi > cur.hi {
                        cur.hi = p.hi;
                        cur.hi_closed = p.hi_closed;
                    } else if p.hi == cur.hi {
                        cur.hi_closed |= p.hi_closed;
                    }
                    if p.lo == cur.lo {
                        cur.lo_closed |= p.lo_closed;
                    }
                    continue;
                }
            }
            merged.push(p);
        }
        match merged.len() {
            0 => SetDesc::Empty,
            1 => merged[0].to_desc(),
            _ => SetDesc::FiniteUnion {
                parts: merged.into_iter().map(Piece::to_desc).collect(),
            },
        }
    }

    fn raw_pieces(&self) -> Vec<Piece> {
        match *self {
            SetDesc::Empty => Vec::new(),
            SetDesc::Singleton { value } => vec![Piece::closed(value, value)],
            SetDesc::Interval {
                lo,
                hi,
                lo_closed,
                hi_closed,
            } => vec![Piece::new(lo, lo_closed, hi, hi_closed)],
            SetDesc::HalfLine { lo, lo_closed } => vec![Piece::new(lo, lo_closed, f64::INFINITY, false)],
            SetDesc::LowerHalfLine { hi, hi_closed } => {
                vec![Piece::new(f64::NEG_INFINITY, false, hi, hi_closed)]
            }
            SetDesc::Line => vec![Piece::new(f64::NEG_INFINITY, false, f64::INFINITY, false)],
            SetDesc::FiniteUnion { ref parts } => parts.iter().flat_map(|p| p.raw_pieces()).collect(),
        }
    }

    /// Normalized connected components in increasing order.
    pub fn pieces(&self) -> Vec<Piece> {
        SetDesc::from_pieces(self.raw_pieces()).raw_pieces()
    }

    pub fn normalize(&self) -> SetDesc {
        SetDesc::from_pieces(self.raw_pieces())
    }

    /// The only piece of a non-union description, without allocating.
    fn lone_piece(&self) -> Option<Piece> {
        match *self {
            SetDesc::Empty | SetDesc::FiniteUnion { .. } => None,
            SetDesc::Singleton { value } => Some(Piece::closed(value, value)),
            SetDesc::Interval {
                lo,
                hi,
                lo_closed,
                hi_closed,
            } => Some(Piece::new(lo, lo_closed, hi, hi_closed)),
            SetDesc::HalfLine { lo, lo_closed } => Some(Piece::new(lo, lo_closed, f64::INFINITY, false)),
            SetDesc::LowerHalfLine { hi, hi_closed } => Some(Piece::new(f64::NEG_INFINITY, false, hi, hi_closed)),
            SetDesc::Line => Some(Piece::new(f64::NEG_INFINITY, false, f64::INFINITY, false)),
        }
    }

    pub fn is_empty(&self) -> bool {
        if let Some(p) = self.lone_piece() {
            return p.is_empty();
        }
        self.raw_pieces().iter().all(Piece::is_empty)
    }

    pub fn member(&self, v: f64) -> bool {
        if let Some(p) = self.lone_piece() {
            return !p.is_empty() && p.contains(v);
        }
        self.raw_pieces().iter().any(|p| !p.is_empty() && p.contains(v))
    }

    /// `inf { |v - w| : w in self }`; `+inf` for the empty set.
    pub fn dist(&self, v: f64) -> ExtReal {
        if let Some(p) = self.lone_piece() {
            return if p.is_empty() { ExtReal::PosInf } else { ExtReal::Finite(p.dist(v)) };
        }
        self.raw_pieces()
            .iter()
            .filter(|p| !p.is_empty())
            .map(|p| p.dist(v))
            .fold(ExtReal::PosInf, |acc, d| acc.min(ExtReal::Finite(d)))
    }

    /// `self ∩ [-radius, radius]`.
    pub fn truncate(&self, radius: f64) -> SetDesc {
        self.intersect(&SetDesc::closed(-radius, radius))
    }

    pub fn intersect(&self, other: &SetDesc) -> SetDesc {
        let mine = self.pieces();
        let theirs = other.pieces();
        let mut out = Vec::new();
        for p in &mine {
            for q in &theirs {
                let r = p.intersect(q);
                if !r.is_empty() {
                    out.push(r);
                }
            }
        }
        SetDesc::from_pieces(out)
    }

    pub fn union(&self, other: &SetDesc) -> SetDesc {
        let mut all = self.raw_pieces();
        all.extend(other.raw_pieces());
        SetDesc::from_pieces(all)
    }

    pub fn closure(&self) -> SetDesc {
        SetDesc::from_pieces(
            self.pieces()
                .into_iter()
                .map(|p| Piece::new(p.lo, true, p.hi, true))
                .collect(),
        )
    }

    pub fn is_closed(&self) -> bool {
        self.closure() == self.normalize()
    }

    /// `other ⊆ self` with exact endpoint bookkeeping.
    pub fn contains_set(&self, other: &SetDesc) -> bool {
        let mine = self.pieces();
        other.pieces().iter().all(|q| mine.iter().any(|p| p.covers(q)))
    }

    pub fn is_bounded(&self) -> bool {
        self.pieces().iter().all(Piece::is_bounded)
    }

    /// Infimum and supremum of the set; `None` when empty.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        let ps = self.pieces();
        Some((ps.first()?.lo, ps.last()?.hi))
    }
}


fn fmt_piece(p: &Piece, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if p.lo == p.hi {
        return write!(f, "{{{}}}", p.lo);
    }
    let open = if p.lo_closed { '[' } else { '(' };
    let close = if p.hi_closed { ']' } else { ')' };
    let lo = if p.lo.is_finite() { p.lo.to_string() } else { "-inf".into() };
    let hi = if p.hi.is_finite() { p.hi.to_string() } else { "+inf".into() };
    write!(f, "{open}{lo}, {hi}{close}")
}

impl fmt::Display for SetDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ps = self.pieces();
        if ps.is_empty() {
            return f.write_str("{}");
        }
        for (i, p) in ps.iter().enumerate() {
            if i > 0 {
                f.write_str(" U ")?;
            }
            fmt_piece(p, f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn member_respects_endpoints() {
        assert!(SetDesc::halfline(5.0).member(5.0));
        assert!(!SetDesc::interval(0.0, 1.0, false, false).member(0.0));
        let u = SetDesc::union_of([SetDesc::closed(0.0, 1.0), SetDesc::closed(3.0, 4.0)]);
        assert!(!u.member(2.0));
        assert!(u.member(3.5));
    }

    #[test]
    fn dist_examples() {
        // fiber [2 + 1/x, +inf) at x = 1/3
        let x = 1.0 / 3.0;
        assert_eq!(SetDesc::halfline(2.0 + 1.0 / x).dist(0.0), ExtReal::Finite(5.0));
        assert_eq!(SetDesc::point(3.0).dist(3.0), ExtReal::ZERO);
        let u = SetDesc::union_of([SetDesc::closed(0.0, 1.0), SetDesc::closed(4.0, 6.0)]);
        assert_eq!(u.dist(2.5), ExtReal::Finite(1.5));
        assert_eq!(SetDesc::Empty.dist(1.0), ExtReal::PosInf);
    }

    #[test]
    fn truncate_examples() {
        assert_eq!(SetDesc::halfline(5.0).truncate(10.0), SetDesc::closed(5.0, 10.0));
        assert_eq!(SetDesc::halfline(5.0).truncate(3.0), SetDesc::Empty);
        let u = SetDesc::union_of([SetDesc::closed(0.0, 1.0), SetDesc::halfline(4.0)]);
        assert_eq!(
            u.truncate(5.0),
            SetDesc::union_of([SetDesc::closed(0.0, 1.0), SetDesc::closed(4.0, 5.0)])
        );
    }

    #[test]
    fn touching_pieces_merge_only_through_a_closed_endpoint() {
        let a = SetDesc::union_of([
            SetDesc::interval(0.0, 1.0, true, false),
            SetDesc::interval(1.0, 2.0, true, true),
        ]);
        assert_eq!(a, SetDesc::closed(0.0, 2.0));
        let b = SetDesc::union_of([
            SetDesc::interval(0.0, 1.0, false, false),
            SetDesc::interval(1.0, 2.0, false, false),
        ]);
        assert!(matches!(b, SetDesc::FiniteUnion { ref parts } if parts.len() == 2));
        assert!(!b.member(1.0));
        assert_eq!(b.dist(1.0), ExtReal::ZERO);
    }

    #[test]
    fn degenerate_intervals() {
        assert_eq!(SetDesc::closed(2.0, 2.0), SetDesc::Singleton { value: 2.0 });
        assert_eq!(SetDesc::interval(2.0, 2.0, true, false), SetDesc::Empty);
        assert_eq!(SetDesc::closed(3.0, 2.0), SetDesc::Empty);
        assert_eq!(SetDesc::closed(f64::NAN, 2.0), SetDesc::Empty);
    }

    #[test]
    fn containment_and_bounds() {
        let big = SetDesc::halfline(0.0);
        assert!(big.contains_set(&SetDesc::closed(0.0, 3.0)));
        assert!(!SetDesc::interval(0.0, 3.0, false, true).contains_set(&SetDesc::closed(0.0, 3.0)));
        assert!(SetDesc::Line.contains_set(&big));
        assert_eq!(big.bounds(), Some((0.0, f64::INFINITY)));
        assert_eq!(SetDesc::Empty.bounds(), None);
    }

    #[test]
    fn display() {
        let u = SetDesc::union_of([SetDesc::point(-1.0), SetDesc::interval(0.0, 1.0, false, true), SetDesc::halfline(4.0)]);
        assert_eq!(u.to_string(), "{-1} U (0, 1] U [4, +inf)");
        assert_eq!(SetDesc::Empty.to_string(), "{}");
    }

    fn arb_piece() -> impl Strategy<Value = Piece> {
        (
            prop_oneof![(-50i32..50).prop_map(|v| v as f64 / 2.0), Just(f64::NEG_INFINITY)],
            0i32..40,
            any::<bool>(),
            any::<bool>(),
            any::<bool>(),
        )
            .prop_map(|(lo, len, lc, hc, unbounded)| {
                let hi = if unbounded {
                    f64::INFINITY
                } else if lo.is_finite() {
                    lo + len as f64 / 4.0
                } else {
                    len as f64 / 4.0
                };
                Piece::new(lo, lc, hi, hc)
            })
    }

    fn arb_set() -> impl Strategy<Value = SetDesc> {
        prop::collection::vec(arb_piece(), 0..5).prop_map(SetDesc::from_pieces)
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(s in arb_set()) {
            prop_assert_eq!(s.normalize().normalize(), s.normalize());
            prop_assert_eq!(s.normalize(), s.clone());
        }

        #[test]
        fn dist_and_member_agree(s in arb_set(), v in -30.0f64..30.0) {
            if s.member(v) {
                prop_assert_eq!(s.dist(v), ExtReal::ZERO);
            }
            if s.dist(v) == ExtReal::ZERO && s.is_closed() {
                prop_assert!(s.member(v));
            }
        }

        #[test]
        fn truncate_is_monotone_in_radius(s in arb_set(), r1 in 0.1f64..20.0, dr in 0.0f64..20.0) {
            let small = s.truncate(r1);
            let large = s.truncate(r1 + dr);
            prop_assert!(large.contains_set(&small));
            prop_assert!(s.contains_set(&large));
        }

        #[test]
        fn pieces_are_sorted_and_separated(s in arb_set()) {
            let ps = s.pieces();
            for w in ps.windows(2) {
                prop_assert!(w[0].hi <= w[1].lo);
                if w[0].hi == w[1].lo {
                    prop_assert!(!w[0].hi_closed && !w[1].lo_closed);
                }
            }
        }
    }
}
