//! Granular move definitions and their decomposition into route pieces.
//!
//! Every move is anchored on a customer `u` and one of its neighbors `v`.
//! When `at_start` is set the anchor is the start depot of `v`'s route
//! instead of `v` itself, which lets relocations and tail exchanges reach the
//! first position of a route.

use std::fmt;

use smallvec::SmallVec;

/// The move families explored by the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MoveKind {
    /// Move `u` after the anchor.
    Relocate1,
    /// Move `u` and its successor after the anchor.
    Relocate2,
    /// Exchange `u` and `v`.
    Swap11,
    /// Exchange `u` and its successor with `v`.
    Swap21,
    /// Exchange `u` and its successor with `v` and its successor.
    Swap22,
    /// Reverse the path between `u` and `v` inside one route.
    TwoOpt,
    /// Exchange the tails after `u` and after the anchor between two routes.
    TwoOptStar,
}

impl MoveKind {
    pub const ALL: [MoveKind; 7] = [
        MoveKind::Relocate1,
        MoveKind::Relocate2,
        MoveKind::Swap11,
        MoveKind::Swap21,
        MoveKind::Swap22,
        MoveKind::TwoOpt,
        MoveKind::TwoOptStar,
    ];

    /// Whether this kind also has a variant anchored on a route start.
    pub fn has_start_variant(&self) -> bool {
        matches!(
            self,
            MoveKind::Relocate1 | MoveKind::Relocate2 | MoveKind::TwoOpt | MoveKind::TwoOptStar
        )
    }
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Move {
    pub kind: MoveKind,
    pub u: usize,
    pub v: usize,
    pub at_start: bool,
}

/// A contiguous part of a new route.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Piece {
    /// Customer positions `a..=b` of route `r`, in order.
    Fwd { r: usize, a: usize, b: usize },
    /// Customer positions `a..=b` of route `r`, from `b` down to `a`.
    Rev { r: usize, a: usize, b: usize },
    Single(usize),
}

pub type Pieces = SmallVec<[Piece; 6]>;

/// Replacement content for one existing route.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewRoute {
    pub route: usize,
    pub pieces: Pieces,
}

pub type NewRoutes = SmallVec<[NewRoute; 2]>;

/// Route index and 1-based position of every customer.
pub trait Positions {
    fn route_of(&self, v: usize) -> usize;
    fn pos_of(&self, v: usize) -> usize;
    fn route_len(&self, r: usize) -> usize;
    fn visit(&self, r: usize, pos: usize) -> usize;
}

fn fwd(out: &mut Pieces, r: usize, a: usize, b: usize) {
    if a <= b {
        out.push(Piece::Fwd { r, a, b });
    }
}

/// Pieces of the route(s) changed by `mv`, or `None` when the move is void.
pub fn resolve<P: Positions>(p: &P, mv: &Move) -> Option<NewRoutes> {
    let (u, v) = (mv.u, mv.v);
    if u == v {
        return None;
    }
    let ru = p.route_of(u);
    let pu = p.pos_of(u);
    let mu = p.route_len(ru);
    let rv = p.route_of(v);
    let pv_raw = p.pos_of(v);
    let mv_len = p.route_len(rv);
    if mv.at_start && pv_raw != 1 {
        return None;
    }
    let pv = if mv.at_start { 0 } else { pv_raw };
    let mut out = NewRoutes::new();
    match mv.kind {
        MoveKind::Relocate1 | MoveKind::Relocate2 => {
            let width = if mv.kind == MoveKind::Relocate1 { 1 } else { 2 };
            let (b1, b2) = (pu, pu + width - 1);
            if b2 > mu {
                return None;
            }
            if ru != rv {
                let mut a = Pieces::new();
                fwd(&mut a, ru, 1, b1 - 1);
                fwd(&mut a, ru, b2 + 1, mu);
                let mut b = Pieces::new();
                fwd(&mut b, rv, 1, pv);
                fwd(&mut b, ru, b1, b2);
                fwd(&mut b, rv, pv + 1, mv_len);
                out.push(NewRoute { route: ru, pieces: a });
                out.push(NewRoute { route: rv, pieces: b });
            } else {
                if pv + 1 >= b1 && pv <= b2 {
                    return None;
                }
                let r = ru;
                let mut a = Pieces::new();
                if pv < b1 {
                    fwd(&mut a, r, 1, pv);
                    fwd(&mut a, r, b1, b2);
                    fwd(&mut a, r, pv + 1, b1 - 1);
                    fwd(&mut a, r, b2 + 1, mu);
                } else {
                    fwd(&mut a, r, 1, b1 - 1);
                    fwd(&mut a, r, b2 + 1, pv);
                    fwd(&mut a, r, b1, b2);
                    fwd(&mut a, r, pv + 1, mu);
                }
                out.push(NewRoute { route: r, pieces: a });
            }
        }
        MoveKind::Swap11 | MoveKind::Swap21 | MoveKind::Swap22 => {
            if mv.at_start {
                return None;
            }
            let wu = if mv.kind == MoveKind::Swap11 { 1 } else { 2 };
            let wv = if mv.kind == MoveKind::Swap22 { 2 } else { 1 };
            let (a1, a2) = (pu, pu + wu - 1);
            let (b1, b2) = (pv, pv + wv - 1);
            if a2 > mu || b2 > mv_len {
                return None;
            }
            if ru != rv {
                let mut a = Pieces::new();
                fwd(&mut a, ru, 1, a1 - 1);
                fwd(&mut a, rv, b1, b2);
                fwd(&mut a, ru, a2 + 1, mu);
                let mut b = Pieces::new();
                fwd(&mut b, rv, 1, b1 - 1);
                fwd(&mut b, ru, a1, a2);
                fwd(&mut b, rv, b2 + 1, mv_len);
                out.push(NewRoute { route: ru, pieces: a });
                out.push(NewRoute { route: rv, pieces: b });
            } else {
                if a1 <= b2 && b1 <= a2 {
                    return None;
                }
                let ((x1, x2), (y1, y2)) = if a1 < b1 { ((a1, a2), (b1, b2)) } else { ((b1, b2), (a1, a2)) };
                let r = ru;
                let mut a = Pieces::new();
                fwd(&mut a, r, 1, x1 - 1);
                fwd(&mut a, r, y1, y2);
                fwd(&mut a, r, x2 + 1, y1 - 1);
                fwd(&mut a, r, x1, x2);
                fwd(&mut a, r, y2 + 1, mu);
                out.push(NewRoute { route: r, pieces: a });
            }
        }
        MoveKind::TwoOpt => {
            if ru != rv {
                return None;
            }
            let r = ru;
            // Reverse the positions strictly after the earlier anchor up to the later one.
            let (lo, hi) = if pv < pu { (pv, pu) } else { (pu, pv) };
            if hi < lo + 2 {
                return None;
            }
            let mut a = Pieces::new();
            fwd(&mut a, r, 1, lo);
            a.push(Piece::Rev { r, a: lo + 1, b: hi });
            fwd(&mut a, r, hi + 1, mu);
            out.push(NewRoute { route: r, pieces: a });
        }
        MoveKind::TwoOptStar => {
            if ru == rv || (pu == mu && pv == mv_len) {
                return None;
            }
            let mut a = Pieces::new();
            fwd(&mut a, ru, 1, pu);
            fwd(&mut a, rv, pv + 1, mv_len);
            let mut b = Pieces::new();
            fwd(&mut b, rv, 1, pv);
            fwd(&mut b, ru, pu + 1, mu);
            out.push(NewRoute { route: ru, pieces: a });
            out.push(NewRoute { route: rv, pieces: b });
        }
    }
    Some(out)
}

/// Appends the customers described by `pieces` to `out`.
pub fn materialize<P: Positions>(p: &P, pieces: &[Piece], out: &mut Vec<usize>) {
    for piece in pieces {
        match *piece {
            Piece::Fwd { r, a, b } => out.extend((a..=b).map(|i| p.visit(r, i))),
            Piece::Rev { r, a, b } => out.extend((a..=b).rev().map(|i| p.visit(r, i))),
            Piece::Single(v) => out.push(v),
        }
    }
}
