//! Grid configuration and the geometric sampler used by every search.
//!
//! A set is sampled on `[-R, R]` with step `h`, then on the shells
//! `R·2^(k-1) < |v| <= R·2^k` for `k = 1..=tail_doublings` with step `h·2^k`,
//! so each shell costs about `R / (2h)` points regardless of its width.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::set::{Piece, SetDesc};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Base grid spacing inside the truncation radius.
    pub step: f64,
    /// Number of halving levels in local refinement and in boundary bisection.
    pub refinement_depth: u32,
    /// Radius of the base window `[-R, R]`.
    pub truncation_radius: f64,
    /// Minimum total gain across the tail doublings before a search is declared divergent.
    pub growth_cap: f64,
    pub tail_doublings: u32,
    /// Values within this distance of the extremum belong to the arg-set witness.
    pub arg_tol: f64,
    /// Refine from several interior local extrema instead of only the best grid point.
    pub seeded: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            step: 0.25,
            refinement_depth: 40,
            truncation_radius: 64.0,
            growth_cap: 1.0,
            tail_doublings: 8,
            arg_tol: 1e-6,
            seeded: true,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.step) {
            return Err(Error::InvalidConfig(format!("grid step must be positive, got {}", self.step)));
        }
        if !positive(self.truncation_radius) {
            return Err(Error::InvalidConfig(format!(
                "truncation radius must be positive, got {}",
                self.truncation_radius
            )));
        }
        if !positive(self.growth_cap) {
            return Err(Error::InvalidConfig(format!("growth cap must be positive, got {}", self.growth_cap)));
        }
        if !(self.arg_tol >= 0.0) {
            return Err(Error::InvalidConfig(format!("arg tolerance must be >= 0, got {}", self.arg_tol)));
        }
        if self.tail_doublings > 60 {
            return Err(Error::InvalidConfig("at most 60 tail doublings".into()));
        }
        Ok(())
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.truncation_radius = radius;
        self
    }
}

/// How the sampled range of a piece ends on one side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum EdgeKind {
    /// The piece's own closed endpoint was sampled exactly.
    Exact,
    /// The piece's own open endpoint; the sample sits just inside it.
    Nudged,
    /// The piece continues past the outermost sampled radius.
    Truncated,
}

#[derive(Debug, Clone)]
pub(crate) struct SampledPiece {
    pub piece: Piece,
    pub lo_edge: EdgeKind,
    pub hi_edge: EdgeKind,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Sample {
    pub at: f64,
    pub piece: usize,
    pub shell: u32,
}

#[derive(Debug, Clone)]
pub(crate) struct Sampling {
    pub samples: Vec<Sample>,
    pub pieces: Vec<SampledPiece>,
    #[cfg_attr(not(test), allow(dead_code))]
    pub base_radius: f64,
    pub outer_radius: f64,
    /// Number of tail shells actually sampled.
    pub shells: u32,
    /// Some piece extends past `outer_radius`.
    pub truncated: bool,
}

impl Sampling {
    /// Samples of `piece` are contiguous in `samples`; returns their index range.
    pub fn piece_range(&self, piece: usize) -> std::ops::Range<usize> {
        let start = self.samples.partition_point(|s| s.piece < piece);
        let end = self.samples.partition_point(|s| s.piece <= piece);
        start..end
    }
}

fn sample_bounded(p: &Piece, step: f64, piece: usize, shell: u32, out: &mut Vec<Sample>) {
    if p.is_empty() {
        return;
    }
    if p.lo == p.hi {
        out.push(Sample { at: p.lo, piece, shell });
        return;
    }
    let width = p.hi - p.lo;
    let n = (width / step).ceil().max(1.0) as usize;
    let nudge = width / n as f64 * 1e-6;
    for j in 0..=n {
        let mut at = if j == n { p.hi } else { p.lo + width * (j as f64 / n as f64) };
        if j == 0 && !p.lo_closed {
            at = p.lo + nudge;
        }
        if j == n && !p.hi_closed {
            at = p.hi - nudge;
        }
        out.push(Sample { at, piece, shell });
    }
}

/// Samples `s` on the base window and the geometric tail shells.
pub(crate) fn sample_set(s: &SetDesc, grid: &GridSpec) -> Result<Sampling> {
    grid.validate()?;
    let pieces = s.pieces();
    if pieces.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut base_radius = grid.truncation_radius;
    while s.truncate(base_radius).is_empty() {
        base_radius *= 2.0;
        if !base_radius.is_finite() {
            return Err(Error::InvalidConfig("set lies beyond every finite radius".into()));
        }
    }
    // Keep the base point count fixed when the window had to grow.
    let base_step = grid.step * (base_radius / grid.truncation_radius);

    let extends_past = |r: f64| pieces.iter().any(|p| p.lo < -r || p.hi > r);

    let mut shells = 0;
    let mut outer = base_radius;
    while shells < grid.tail_doublings && extends_past(outer) {
        shells += 1;
        outer *= 2.0;
    }

    // Windows in increasing order, so each piece's samples come out sorted:
    // negative shells outermost first, the base window, positive shells.
    let mut windows = Vec::with_capacity(2 * shells as usize + 1);
    for k in (1..=shells).rev() {
        let r = base_radius * 2f64.powi(k as i32);
        windows.push((Piece::closed(-r, -r / 2.0), k));
    }
    windows.push((Piece::closed(-base_radius, base_radius), 0));
    for k in 1..=shells {
        let r = base_radius * 2f64.powi(k as i32);
        windows.push((Piece::closed(r / 2.0, r), k));
    }

    let mut samples: Vec<Sample> = Vec::new();
    let mut chunk = Vec::new();
    for (i, p) in pieces.iter().enumerate() {
        for (w, k) in &windows {
            chunk.clear();
            let step = base_step * 2f64.powi(*k as i32);
            sample_bounded(&p.intersect(w), step, i, *k, &mut chunk);
            for smp in chunk.drain(..) {
                match samples.last_mut() {
                    // Shared window boundary: keep one sample, in the inner shell.
                    Some(last) if last.piece == i && last.at == smp.at => last.shell = last.shell.min(smp.shell),
                    _ => samples.push(smp),
                }
            }
        }
    }

    let edge = |endpoint: f64, closed: bool| {
        if endpoint.abs() > outer {
            EdgeKind::Truncated
        } else if closed {
            EdgeKind::Exact
        } else {
            EdgeKind::Nudged
        }
    };
    let truncated = extends_past(outer);
    let pieces = pieces
        .into_iter()
        .map(|p| SampledPiece {
            piece: p,
            lo_edge: edge(p.lo, p.lo_closed),
            hi_edge: edge(p.hi, p.hi_closed),
        })
        .collect();

    Ok(Sampling {
        samples,
        pieces,
        base_radius,
        outer_radius: outer,
        shells,
        truncated,
    })
}

/// Shrinks `[truthy, falsy]` by bisection, returning the last point where `pred` held.
pub(crate) fn bisect_boundary<P>(pred: &mut P, mut truthy: f64, mut falsy: f64, depth: u32) -> Result<f64>
where
    P: FnMut(f64) -> Result<bool>,
{
    for _ in 0..depth {
        let mid = 0.5 * (truthy + falsy);
        if mid == truthy || mid == falsy {
            break;
        }
        if pred(mid)? {
            truthy = mid;
        } else {
            falsy = mid;
        }
    }
    Ok(truthy)
}

/// A point set produced by grid classification plus boundary bisection.
#[derive(Debug, Clone)]
pub struct ApproxSet {
    pub set: SetDesc,
    /// The predicate held at a truncation edge and the run was extended to the piece's end.
    pub extrapolated: bool,
}

/// Approximates `{v in sampled set : pred(v)}` from the truth values at the
/// samples, refining each truth change between neighbouring samples.
pub(crate) fn classify_runs<P>(
    sampling: &Sampling,
    points: &[(f64, usize, bool)],
    pred: &mut P,
    depth: u32,
) -> Result<ApproxSet>
where
    P: FnMut(f64) -> Result<bool>,
{
    let mut out = Vec::new();
    let mut extrapolated = false;
    let mut i = 0;
    while i < points.len() {
        let (at, piece, truth) = points[i];
        if !truth {
            i += 1;
            continue;
        }
        let sp = &sampling.pieces[piece];
        let first_of_piece = i == 0 || points[i - 1].1 != piece;
        let (lo, lo_closed) = if first_of_piece {
            match sp.lo_edge {
                EdgeKind::Exact => (sp.piece.lo, true),
                EdgeKind::Nudged => (sp.piece.lo, false),
                EdgeKind::Truncated => {
                    extrapolated = true;
                    (sp.piece.lo, sp.piece.lo_closed)
                }
            }
        } else {
            (bisect_boundary(pred, at, points[i - 1].0, depth)?, true)
        };
        let mut j = i;
        while j + 1 < points.len() && points[j + 1].1 == piece && points[j + 1].2 {
            j += 1;
        }
        let last_of_piece = j + 1 == points.len() || points[j + 1].1 != piece;
        let (hi, hi_closed) = if last_of_piece {
            match sp.hi_edge {
                EdgeKind::Exact => (sp.piece.hi, true),
                EdgeKind::Nudged => (sp.piece.hi, false),
                EdgeKind::Truncated => {
                    extrapolated = true;
                    (sp.piece.hi, sp.piece.hi_closed)
                }
            }
        } else {
            (bisect_boundary(pred, points[j].0, points[j + 1].0, depth)?, true)
        };
        out.push(Piece::new(lo, lo_closed, hi, hi_closed));
        i = j + 1;
    }
    Ok(ApproxSet {
        set: SetDesc::from_pieces(out),
        extrapolated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounded_set_inside_window_has_no_shells() {
        let s = sample_set(&SetDesc::closed(-1.0, 2.0), &GridSpec::default()).unwrap();
        assert_eq!(s.shells, 0);
        assert!(!s.truncated);
        assert_eq!(s.samples.len(), 13);
        assert!(s.samples.iter().any(|p| p.at == 0.0));
    }

    #[test]
    fn halfline_gets_geometric_shells() {
        let g = GridSpec::default();
        let s = sample_set(&SetDesc::halfline(0.0), &g).unwrap();
        assert_eq!(s.shells, 8);
        assert!(s.truncated);
        assert_eq!(s.outer_radius, 64.0 * 256.0);
        // 257 base points and 128 new points per shell
        assert_eq!(s.samples.len(), 257 + 8 * 128);
        assert!(s.samples.windows(2).all(|w| w[0].at < w[1].at));
        assert_eq!(s.pieces[0].lo_edge, EdgeKind::Exact);
        assert_eq!(s.pieces[0].hi_edge, EdgeKind::Truncated);
    }

    #[test]
    fn far_away_set_grows_the_window() {
        let s = sample_set(&SetDesc::closed(500.0, 501.0), &GridSpec::default()).unwrap();
        assert_eq!(s.base_radius, 512.0);
        assert_eq!(s.samples.first().unwrap().at, 500.0);
        assert_eq!(s.samples.last().unwrap().at, 501.0);
    }

    #[test]
    fn open_endpoints_are_nudged_inside() {
        let s = sample_set(&SetDesc::interval(0.0, 1.0, false, false), &GridSpec::default()).unwrap();
        let first = s.samples.first().unwrap().at;
        let last = s.samples.last().unwrap().at;
        assert!(first > 0.0 && first < 1e-6);
        assert!(last < 1.0 && last > 1.0 - 1e-6);
    }

    #[test]
    fn empty_set_is_rejected() {
        assert!(matches!(sample_set(&SetDesc::Empty, &GridSpec::default()), Err(Error::EmptySet)));
    }

    #[test]
    fn runs_are_refined_at_truth_changes() {
        let g = GridSpec::default();
        let set = SetDesc::closed(0.0, 3.0);
        let sampling = sample_set(&set, &g).unwrap();
        let mut pred = |v: f64| Ok::<_, Error>((1.0 / 3.0..=2.0 / 3.0).contains(&v) || v >= 2.9);
        let pts: Vec<_> = sampling
            .samples
            .iter()
            .map(|s| (s.at, s.piece, pred(s.at).unwrap()))
            .collect();
        let out = classify_runs(&sampling, &pts, &mut pred, 40).unwrap();
        let ps = out.set.pieces();
        assert_eq!(ps.len(), 2);
        assert!((ps[0].lo - 1.0 / 3.0).abs() < 1e-10);
        assert!((ps[0].hi - 2.0 / 3.0).abs() < 1e-10);
        assert!((ps[1].lo - 2.9).abs() < 1e-10);
        assert_eq!(ps[1].hi, 3.0);
        assert!(!out.extrapolated);
    }
}
