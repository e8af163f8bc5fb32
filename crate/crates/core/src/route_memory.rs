//! Memory of decoded routes and of the best known order per customer set.
//!
//! `seq_map` caches decoder output per input sequence and is bounded by
//! `m_max`; when full, the least frequently used half is evicted. `set_map`
//! keeps the cheapest order seen for each customer set and is never evicted.
//! With tunneling enabled a decode returns the cheaper of the decoder output
//! and the best known order for the same set.

use std::io::{Read, Write};

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::instance_io::DistanceMatrix;
use crate::model::{Cost, Load, Tour};
use crate::seq_concat::SeqMeta;
use crate::space::{DecodeError, DecodeStats, Decoder};

/// Default capacity of the sequence map.
pub const DEFAULT_M_MAX: usize = 1_000_000;

const DUMP_VERSION: u32 = 1;

/// Key of a closed route `[0, v1, .., vm, 0]` as an input sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RouteKey {
    pub hp: [u64; 2],
    pub hs: [u64; 2],
    pub len: u32,
    pub c_in: Cost,
}

impl RouteKey {
    pub fn from_meta(m: &SeqMeta) -> Self {
        RouteKey {
            hp: m.hp,
            hs: m.hs,
            len: m.len,
            c_in: m.c,
        }
    }
}

/// Key of the customer set of a closed route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SetKey {
    pub hs: [u64; 2],
    pub len: u32,
    pub load: Load,
}

impl SetKey {
    pub fn from_meta(m: &SeqMeta) -> Self {
        SetKey {
            hs: m.hs,
            len: m.len,
            load: m.q,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryEntry {
    pub tour: Tour,
    pub freq: u64,
    stamp: u64,
}

impl MemoryEntry {
    /// Insertion order; lower is older.
    pub fn stamp(&self) -> u64 {
        self.stamp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryConfig {
    pub m_max: usize,
    pub tunneling: bool,
    /// When false nothing is cached and every decode runs the decoder.
    pub enabled: bool,
}

impl Default for MemoryConfig {
    fn default() -> Self {
        MemoryConfig {
            m_max: DEFAULT_M_MAX,
            tunneling: true,
            enabled: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MemoryStats {
    pub lookups: u64,
    pub hits: u64,
    pub stores: u64,
    pub evictions: u64,
    pub evicted_entries: u64,
    /// Decodes where the set map beat the decoder output.
    pub tunnel_gains: u64,
}

impl MemoryStats {
    pub fn hit_rate(&self) -> f64 {
        if self.lookups == 0 {
            0.0
        } else {
            self.hits as f64 / self.lookups as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct GlobalMemory {
    config: MemoryConfig,
    seq_map: FxHashMap<RouteKey, MemoryEntry>,
    set_map: FxHashMap<SetKey, Tour>,
    clock: u64,
    stats: MemoryStats,
}

#[derive(Serialize, Deserialize)]
struct SetDump {
    version: u32,
    sets: Vec<SetRecord>,
}

#[derive(Serialize, Deserialize)]
struct SetRecord {
    key: SetKey,
    visits: Vec<usize>,
    cost: Cost,
}

impl GlobalMemory {
    pub fn new(config: MemoryConfig) -> Self {
        assert!(config.m_max >= 1, "m_max must be positive");
        GlobalMemory {
            config,
            seq_map: FxHashMap::default(),
            set_map: FxHashMap::default(),
            clock: 0,
            stats: MemoryStats::default(),
        }
    }

    pub fn config(&self) -> &MemoryConfig {
        &self.config
    }

    pub fn stats(&self) -> &MemoryStats {
        &self.stats
    }

    pub fn len(&self) -> usize {
        self.seq_map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq_map.is_empty()
    }

    pub fn num_sets(&self) -> usize {
        self.set_map.len()
    }

    /// Looks up a sequence and bumps its frequency on a hit.
    pub fn lookup(&mut self, key: &RouteKey) -> Option<&MemoryEntry> {
        self.stats.lookups += 1;
        match self.seq_map.get_mut(key) {
            Some(e) => {
                self.stats.hits += 1;
                e.freq += 1;
                Some(e)
            }
            None => None,
        }
    }

    /// All sequence entries, in no particular order.
    pub fn entries(&self) -> impl Iterator<Item = (&RouteKey, &MemoryEntry)> {
        self.seq_map.iter()
    }

    /// Read-only access that leaves counters untouched.
    pub fn peek(&self, key: &RouteKey) -> Option<&MemoryEntry> {
        self.seq_map.get(key)
    }

    /// Stores decoder output for `key`, evicting half the map first when full.
    pub fn store(&mut self, key: RouteKey, set: SetKey, tour: Tour) {
        if !self.seq_map.contains_key(&key) && self.seq_map.len() >= self.config.m_max {
            self.evict_half();
        }
        self.offer_set(set, &tour);
        self.clock += 1;
        self.stats.stores += 1;
        let stamp = self.clock;
        self.seq_map.entry(key).or_insert(MemoryEntry { tour, freq: 0, stamp });
    }

    /// Records `tour` as the best order of its set when it is cheaper.
    pub fn offer_set(&mut self, set: SetKey, tour: &Tour) {
        match self.set_map.get_mut(&set) {
            Some(best) if best.cost <= tour.cost => {}
            Some(best) => *best = tour.clone(),
            None => {
                self.set_map.insert(set, tour.clone());
            }
        }
    }

    pub fn set_best(&self, set: &SetKey) -> Option<&Tour> {
        self.set_map.get(set)
    }

    /// Removes the `floor(len / 2)` least frequently used entries, oldest first on ties.
    pub fn evict_half(&mut self) {
        let drop = self.seq_map.len() / 2;
        if drop == 0 {
            return;
        }
        let mut order: Vec<(u64, u64, RouteKey)> = self.seq_map.iter().map(|(k, e)| (e.freq, e.stamp, *k)).collect();
        order.select_nth_unstable_by(drop - 1, |a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        for (_, _, k) in &order[..drop] {
            self.seq_map.remove(k);
        }
        self.stats.evictions += 1;
        self.stats.evicted_entries += drop as u64;
    }

    fn decode_source(
        &mut self,
        visits: &[usize],
        meta: &SeqMeta,
        decoder: &Decoder,
        dm: &DistanceMatrix,
        dstats: &mut DecodeStats,
    ) -> Result<Source, DecodeError> {
        if !self.config.enabled {
            return Ok(Source::Fresh(decoder.decode(visits, dm, dstats)?));
        }
        let set = SetKey::from_meta(meta);
        if decoder.is_set_function(visits.len()) {
            self.stats.lookups += 1;
            if self.set_map.contains_key(&set) {
                self.stats.hits += 1;
            } else {
                let t = decoder.decode(visits, dm, dstats)?;
                self.offer_set(set, &t);
            }
            return Ok(Source::Set(set));
        }
        if *decoder == Decoder::Identity {
            if !self.config.tunneling {
                return Ok(Source::Fresh(Tour {
                    visits: visits.to_vec(),
                    cost: meta.c,
                }));
            }
            let t = Tour {
                visits: visits.to_vec(),
                cost: meta.c,
            };
            self.offer_set(set, &t);
            if self.set_map[&set].cost < t.cost {
                self.stats.tunnel_gains += 1;
                return Ok(Source::Set(set));
            }
            return Ok(Source::Fresh(t));
        }
        let key = RouteKey::from_meta(meta);
        let cost = match self.lookup(&key) {
            Some(e) => e.tour.cost,
            None => {
                let t = decoder.decode(visits, dm, dstats)?;
                let c = t.cost;
                self.store(key, set, t);
                c
            }
        };
        if self.config.tunneling {
            if let Some(best) = self.set_map.get(&set) {
                if best.cost < cost {
                    self.stats.tunnel_gains += 1;
                    return Ok(Source::Set(set));
                }
            }
        }
        Ok(Source::Seq(key, cost))
    }

    /// Cost of decoding a route, through the memory.
    ///
    /// `meta` must describe the closed sequence `[0, visits.., 0]`.
    pub fn decode_cost(
        &mut self,
        visits: &[usize],
        meta: &SeqMeta,
        decoder: &Decoder,
        dm: &DistanceMatrix,
        dstats: &mut DecodeStats,
    ) -> Result<Cost, DecodeError> {
        Ok(match self.decode_source(visits, meta, decoder, dm, dstats)? {
            Source::Fresh(t) => t.cost,
            Source::Set(s) => self.set_map[&s].cost,
            Source::Seq(_, c) => c,
        })
    }

    /// Decoded route; with tunneling on, the cheaper of the decoder output and
    /// the best known order for the same customer set.
    pub fn decode_with_tunneling(
        &mut self,
        visits: &[usize],
        meta: &SeqMeta,
        decoder: &Decoder,
        dm: &DistanceMatrix,
        dstats: &mut DecodeStats,
    ) -> Result<Tour, DecodeError> {
        Ok(match self.decode_source(visits, meta, decoder, dm, dstats)? {
            Source::Fresh(t) => t,
            Source::Set(s) => self.set_map[&s].clone(),
            Source::Seq(k, _) => self.seq_map[&k].tour.clone(),
        })
    }

    /// Writes the set map as versioned JSON.
    pub fn dump_sets(&self, w: impl Write) -> serde_json::Result<()> {
        let mut sets: Vec<SetRecord> = self
            .set_map
            .iter()
            .map(|(k, t)| SetRecord {
                key: *k,
                visits: t.visits.clone(),
                cost: t.cost,
            })
            .collect();
        sets.sort_by(|a, b| a.key.cmp(&b.key));
        serde_json::to_writer(
            w,
            &SetDump {
                version: DUMP_VERSION,
                sets,
            },
        )
    }

    /// Merges a dump produced by [`GlobalMemory::dump_sets`] into the set map.
    pub fn load_sets(&mut self, r: impl Read) -> Result<usize, String> {
        let dump: SetDump = serde_json::from_reader(r).map_err(|e| e.to_string())?;
        if dump.version != DUMP_VERSION {
            return Err(format!("unsupported set map version {}", dump.version));
        }
        let n = dump.sets.len();
        for rec in dump.sets {
            self.offer_set(
                rec.key,
                &Tour {
                    visits: rec.visits,
                    cost: rec.cost,
                },
            );
        }
        Ok(n)
    }
}

enum Source {
    Fresh(Tour),
    Set(SetKey),
    Seq(RouteKey, Cost),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq_concat::{meta_of, HashParams};

    fn key(i: u64) -> (RouteKey, SetKey) {
        (
            RouteKey {
                hp: [i, i * 3],
                hs: [i, i],
                len: 3,
                c_in: 10,
            },
            SetKey {
                hs: [i, i],
                len: 3,
                load: 1,
            },
        )
    }

    fn tour(c: Cost) -> Tour {
        Tour { visits: vec![1], cost: c }
    }

    #[test]
    fn eviction_keeps_most_frequent_half() {
        let mut mem = GlobalMemory::new(MemoryConfig {
            m_max: 4,
            ..Default::default()
        });
        for i in 0..4 {
            let (k, s) = key(i);
            mem.store(k, s, tour(5));
        }
        for i in [2, 3, 3] {
            assert!(mem.lookup(&key(i).0).is_some());
        }
        let (k, s) = key(9);
        mem.store(k, s, tour(5));
        assert_eq!(mem.len(), 3);
        assert!(mem.peek(&key(0).0).is_none());
        assert!(mem.peek(&key(1).0).is_none());
        assert!(mem.peek(&key(2).0).is_some());
        assert!(mem.peek(&key(9).0).is_some());
        assert_eq!(mem.num_sets(), 5);
    }

    #[test]
    fn odd_size_eviction_rounds_down() {
        let mut mem = GlobalMemory::new(MemoryConfig {
            m_max: 5,
            ..Default::default()
        });
        for i in 0..6 {
            let (k, s) = key(i);
            mem.store(k, s, tour(1));
        }
        // floor(5 / 2) = 2 removed, then one inserted.
        assert_eq!(mem.len(), 4);
        assert!(mem.peek(&key(0).0).is_none() && mem.peek(&key(1).0).is_none());
    }

    #[test]
    fn tunneling_returns_set_best() {
        let dm = DistanceMatrix::from_rows(&[
            vec![0, 1, 10, 1],
            vec![10, 0, 1, 10],
            vec![1, 10, 0, 10],
            vec![10, 1, 10, 0],
        ]);
        let demands = vec![0, 1, 1, 1];
        let p = HashParams::new(3);
        let closed = |v: &[usize]| {
            let mut s = vec![0];
            s.extend_from_slice(v);
            s.push(0);
            meta_of(&s, &demands, &dm, &p)
        };
        let identity = Decoder::Identity;
        let mut ds = DecodeStats::default();
        for tunneling in [false, true] {
            let mut mem = GlobalMemory::new(MemoryConfig {
                tunneling,
                ..Default::default()
            });
            let good = [3, 1, 2];
            let bad = [1, 3, 2];
            let c_good = mem.decode_cost(&good, &closed(&good), &identity, &dm, &mut ds).unwrap();
            assert_eq!(c_good, 4);
            let t = mem.decode_with_tunneling(&bad, &closed(&bad), &identity, &dm, &mut ds).unwrap();
            if tunneling {
                assert_eq!((t.visits, t.cost), (vec![3, 1, 2], 4));
            } else {
                assert_eq!(t.visits, vec![1, 3, 2]);
                assert_eq!(t.cost, dm.tour_cost(&bad));
            }
        }
    }

    #[test]
    fn set_dump_round_trip() {
        let mut mem = GlobalMemory::new(MemoryConfig::default());
        for i in 0..3 {
            let (k, s) = key(i);
            mem.store(k, s, tour(i as Cost));
        }
        let mut buf = Vec::new();
        mem.dump_sets(&mut buf).unwrap();
        let mut other = GlobalMemory::new(MemoryConfig::default());
        assert_eq!(other.load_sets(&buf[..]).unwrap(), 3);
        assert_eq!(other.set_best(&key(2).1).unwrap().cost, 2);
        assert!(other.load_sets(&b"{\"version\":7,\"sets\":[]}"[..]).is_err());
    }
}
