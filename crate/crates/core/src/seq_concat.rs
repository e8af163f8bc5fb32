//! Constant-time sequence concatenation with load, cost and two hash pairs.
//!
//! For a sequence `s` of vertices the positional hash is
//! `Hp = sum_i rho^i * s_i` (positions from 1) and the set hash is
//! `Hs = sum_i rho^(s_i)`, both taken modulo 2^64. Two independent bases are
//! used so that a key collision needs both to collide at once.

use crate::instance_io::DistanceMatrix;
use crate::model::{Cost, Load};

/// Second hash base.
pub const RHO2: u64 = 31;

/// Smallest prime strictly greater than `n`.
pub fn next_prime_above(n: usize) -> u64 {
    let mut p = n as u64 + 1;
    loop {
        if is_prime(p) {
            return p;
        }
        p += 1;
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Hash bases and their precomputed powers.
#[derive(Debug, Clone)]
pub struct HashParams {
    rho: [u64; 2],
    pow: [Vec<u64>; 2],
}

impl HashParams {
    /// Parameters for an instance with `n` customers.
    pub fn new(n: usize) -> Self {
        Self::with_bases(next_prime_above(n), RHO2, n + 3)
    }

    pub fn with_bases(rho1: u64, rho2: u64, table_len: usize) -> Self {
        let table = |rho: u64| {
            let mut v = Vec::with_capacity(table_len + 1);
            let mut x = 1u64;
            for _ in 0..=table_len {
                v.push(x);
                x = x.wrapping_mul(rho);
            }
            v
        };
        HashParams {
            rho: [rho1, rho2],
            pow: [table(rho1), table(rho2)],
        }
    }

    pub fn rho(&self) -> [u64; 2] {
        self.rho
    }

    #[inline]
    pub fn pow(&self, h: usize, e: usize) -> u64 {
        match self.pow[h].get(e) {
            Some(&x) => x,
            None => self.rho[h].wrapping_pow(e as u32),
        }
    }
}

/// Aggregate data of a vertex sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeqMeta {
    pub q: Load,
    pub c: Cost,
    pub first: u32,
    pub last: u32,
    pub len: u32,
    pub hp: [u64; 2],
    pub hs: [u64; 2],
}

impl SeqMeta {
    pub fn singleton(v: usize, demand: Load, params: &HashParams) -> Self {
        let hp = [params.rho[0].wrapping_mul(v as u64), params.rho[1].wrapping_mul(v as u64)];
        let hs = [params.pow(0, v), params.pow(1, v)];
        SeqMeta {
            q: demand,
            c: 0,
            first: v as u32,
            last: v as u32,
            len: 1,
            hp,
            hs,
        }
    }

    /// Metadata of `self` followed by `other`.
    #[inline]
    pub fn concat(&self, other: &SeqMeta, dm: &DistanceMatrix, params: &HashParams) -> SeqMeta {
        let shift = self.len as usize;
        SeqMeta {
            q: self.q + other.q,
            c: self.c + dm.get(self.last as usize, other.first as usize) + other.c,
            first: self.first,
            last: other.last,
            len: self.len + other.len,
            hp: [
                self.hp[0].wrapping_add(params.pow(0, shift).wrapping_mul(other.hp[0])),
                self.hp[1].wrapping_add(params.pow(1, shift).wrapping_mul(other.hp[1])),
            ],
            hs: [self.hs[0].wrapping_add(other.hs[0]), self.hs[1].wrapping_add(other.hs[1])],
        }
    }

    /// Folds a non-empty list of metadata left to right.
    pub fn fold(parts: &[SeqMeta], dm: &DistanceMatrix, params: &HashParams) -> SeqMeta {
        let mut acc = parts[0];
        for p in &parts[1..] {
            acc = acc.concat(p, dm, params);
        }
        acc
    }
}

/// Positional and set hashes computed straight from their definitions.
pub fn hash_direct(seq: &[usize], params: &HashParams) -> ([u64; 2], [u64; 2]) {
    let mut hp = [0u64; 2];
    let mut hs = [0u64; 2];
    for h in 0..2 {
        for (i, &v) in seq.iter().enumerate() {
            hp[h] = hp[h].wrapping_add(params.pow(h, i + 1).wrapping_mul(v as u64));
            hs[h] = hs[h].wrapping_add(params.pow(h, v));
        }
    }
    (hp, hs)
}

/// Metadata of a non-empty sequence, built by repeated concatenation.
pub fn meta_of(seq: &[usize], demands: &[Load], dm: &DistanceMatrix, params: &HashParams) -> SeqMeta {
    let mut acc = SeqMeta::singleton(seq[0], demands[seq[0]], params);
    for &v in &seq[1..] {
        acc = acc.concat(&SeqMeta::singleton(v, demands[v], params), dm, params);
    }
    acc
}

/// Forward and reversed metadata of every position range of one route.
///
/// Positions are `0..=m` where position 0 is the start depot and position `i`
/// is the `i`-th customer.
#[derive(Debug, Clone, Default)]
pub struct RouteTable {
    positions: usize,
    fwd: Vec<SeqMeta>,
    rev: Vec<SeqMeta>,
}

impl RouteTable {
    pub fn build(visits: &[usize], demands: &[Load], dm: &DistanceMatrix, params: &HashParams) -> Self {
        let p = visits.len() + 1;
        let seq = |i: usize| if i == 0 { 0 } else { visits[i - 1] };
        let single = |i: usize| SeqMeta::singleton(seq(i), demands[seq(i)], params);
        let total = p * (p + 1) / 2;
        let mut fwd = Vec::with_capacity(total);
        let mut rev = Vec::with_capacity(total);
        for a in 0..p {
            let s = single(a);
            fwd.push(s);
            rev.push(s);
            for b in a + 1..p {
                let sb = single(b);
                let f = fwd.last().unwrap().concat(&sb, dm, params);
                let r = sb.concat(rev.last().unwrap(), dm, params);
                fwd.push(f);
                rev.push(r);
            }
        }
        RouteTable { positions: p, fwd, rev }
    }

    #[inline]
    fn idx(&self, a: usize, b: usize) -> usize {
        debug_assert!(a <= b && b < self.positions);
        a * self.positions - a * a.saturating_sub(1) / 2 + (b - a)
    }

    /// Metadata of positions `a..=b` in route order.
    #[inline]
    pub fn fwd(&self, a: usize, b: usize) -> &SeqMeta {
        &self.fwd[self.idx(a, b)]
    }

    /// Metadata of positions `a..=b` traversed from `b` down to `a`.
    #[inline]
    pub fn rev(&self, a: usize, b: usize) -> &SeqMeta {
        &self.rev[self.idx(a, b)]
    }

    /// Number of stored ranges.
    pub fn num_ranges(&self) -> usize {
        self.fwd.len()
    }

    /// Number of positions, including the start depot.
    pub fn positions(&self) -> usize {
        self.positions
    }
}

/// Per-route tables for a whole solution plus per-vertex singletons.
#[derive(Debug, Clone)]
pub struct SubseqTable {
    routes: Vec<RouteTable>,
    singles: Vec<SeqMeta>,
}

impl SubseqTable {
    pub fn new(routes: &[Vec<usize>], demands: &[Load], dm: &DistanceMatrix, params: &HashParams) -> Self {
        let singles = (0..demands.len())
            .map(|v| SeqMeta::singleton(v, demands[v], params))
            .collect();
        let routes = routes
            .iter()
            .map(|r| RouteTable::build(r, demands, dm, params))
            .collect();
        SubseqTable { routes, singles }
    }

    pub fn route(&self, r: usize) -> &RouteTable {
        &self.routes[r]
    }

    #[inline]
    pub fn single(&self, v: usize) -> &SeqMeta {
        &self.singles[v]
    }

    pub fn rebuild(&mut self, r: usize, visits: &[usize], demands: &[Load], dm: &DistanceMatrix, params: &HashParams) {
        self.routes[r] = RouteTable::build(visits, demands, dm, params);
    }

    pub fn swap_remove(&mut self, r: usize) {
        self.routes.swap_remove(r);
    }

    pub fn len(&self) -> usize {
        self.routes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.routes.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(nv: usize) -> DistanceMatrix {
        let rows: Vec<Vec<Cost>> = (0..nv)
            .map(|i| (0..nv).map(|j| ((i * 7 + j * 3) % 11) as Cost + if i == j { 0 } else { 1 }).collect())
            .collect();
        DistanceMatrix::from_rows(&rows)
    }

    #[test]
    fn reference_hash_values() {
        let p = HashParams::with_bases(7, RHO2, 10);
        let (hp, _) = hash_direct(&[1, 2], &p);
        assert_eq!(hp[1], 1953);
        let (_, hs) = hash_direct(&[2], &p);
        assert_eq!(hs[1], 961);
    }

    #[test]
    fn next_prime() {
        assert_eq!(next_prime_above(100), 101);
        assert_eq!(next_prime_above(101), 103);
        assert_eq!(next_prime_above(1), 2);
        assert_eq!(next_prime_above(0), 2);
    }

    #[test]
    fn concat_matches_direct() {
        let dm = grid(8);
        let demands = vec![0, 1, 2, 3, 4, 5, 6, 7];
        let p = HashParams::new(7);
        let seq = [3, 1, 4, 1, 5, 2, 6];
        let m = meta_of(&seq, &demands, &dm, &p);
        let (hp, hs) = hash_direct(&seq, &p);
        assert_eq!(m.hp, hp);
        assert_eq!(m.hs, hs);
        assert_eq!(m.q, 3 + 1 + 4 + 1 + 5 + 2 + 6);
        let c: Cost = seq.windows(2).map(|w| dm.get(w[0], w[1])).sum();
        assert_eq!(m.c, c);
        assert_eq!((m.first, m.last, m.len), (3, 6, 7));
    }

    #[test]
    fn table_stores_every_range() {
        let dm = grid(4);
        let demands = vec![0, 1, 1, 1];
        let p = HashParams::new(3);
        let t = RouteTable::build(&[1, 2, 3], &demands, &dm, &p);
        assert_eq!(t.num_ranges(), 10);
        for a in 0..4 {
            for b in a..4 {
                let seq: Vec<usize> = (a..=b).collect();
                assert_eq!(*t.fwd(a, b), meta_of(&seq, &demands, &dm, &p));
                let r: Vec<usize> = seq.iter().rev().copied().collect();
                assert_eq!(*t.rev(a, b), meta_of(&r, &demands, &dm, &p));
            }
        }
    }
}
