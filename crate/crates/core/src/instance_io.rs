//! Reading and writing CVRPLIB instances, distance matrices and neighbor lists.
//!
//! Vertices are renumbered so that the depot is always index 0 and customers
//! are `1..=n` in the order of their original node ids.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::model::{Cost, Load};

/// Default neighbor list size.
pub const DEFAULT_GAMMA: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {field}: {message}")]
    Syntax {
        line: usize,
        field: String,
        message: String,
    },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("reading {path}: {message}")]
    Io { path: String, message: String },
}

impl ParseError {
    fn syntax(line: usize, field: &str, message: impl Into<String>) -> Self {
        ParseError::Syntax {
            line,
            field: field.to_string(),
            message: message.into(),
        }
    }

    fn invalid(field: &str, message: impl Into<String>) -> Self {
        ParseError::Invalid {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

/// How edge costs are obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum EdgeWeights {
    /// Euclidean distances rounded half-up to integers.
    Euc2d,
    /// Full matrix in internal vertex order, row major, possibly asymmetric.
    Explicit(Vec<Cost>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub capacity: Load,
    /// Demand per internal vertex; entry 0 is the depot and is always 0.
    pub demands: Vec<Load>,
    /// Coordinates per internal vertex, when the file has them.
    pub coords: Option<Vec<(f64, f64)>>,
    pub weights: EdgeWeights,
    /// Original node id of each internal vertex.
    pub node_ids: Vec<usize>,
}

impl Instance {
    /// Builds a Euclidean instance. `coords[0]` is the depot.
    pub fn from_coords(
        name: impl Into<String>,
        capacity: Load,
        coords: Vec<(f64, f64)>,
        demands: Vec<Load>,
    ) -> Result<Self, ParseError> {
        let inst = Instance {
            name: name.into(),
            capacity,
            node_ids: (1..=coords.len()).collect(),
            demands,
            coords: Some(coords),
            weights: EdgeWeights::Euc2d,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Builds an instance from a full (possibly asymmetric) matrix. Row 0 is the depot.
    pub fn from_matrix(
        name: impl Into<String>,
        capacity: Load,
        matrix: &[Vec<Cost>],
        demands: Vec<Load>,
    ) -> Result<Self, ParseError> {
        let nv = matrix.len();
        if matrix.iter().any(|row| row.len() != nv) {
            return Err(ParseError::invalid("EDGE_WEIGHT_SECTION", "matrix is not square"));
        }
        let inst = Instance {
            name: name.into(),
            capacity,
            node_ids: (1..=nv).collect(),
            demands,
            coords: None,
            weights: EdgeWeights::Explicit(matrix.iter().flatten().copied().collect()),
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Number of customers `n`.
    pub fn num_customers(&self) -> usize {
        self.demands.len() - 1
    }

    /// Number of vertices including the depot.
    pub fn num_vertices(&self) -> usize {
        self.demands.len()
    }

    pub fn total_demand(&self) -> u64 {
        self.demands.iter().map(|&q| q as u64).sum()
    }

    pub fn distance_matrix(&self) -> DistanceMatrix {
        let nv = self.num_vertices();
        match &self.weights {
            EdgeWeights::Explicit(data) => DistanceMatrix::from_flat(nv, data.clone()),
            EdgeWeights::Euc2d => {
                let coords = self.coords.as_ref().expect("EUC_2D instance without coordinates");
                let mut data = vec![0; nv * nv];
                for i in 0..nv {
                    for j in 0..nv {
                        data[i * nv + j] = euc2d(coords[i], coords[j]);
                    }
                }
                DistanceMatrix::from_flat(nv, data)
            }
        }
    }

    fn validate(&self) -> Result<(), ParseError> {
        let nv = self.demands.len();
        if nv < 2 {
            return Err(ParseError::invalid("DIMENSION", "instance needs at least one customer"));
        }
        if self.capacity == 0 {
            return Err(ParseError::invalid("CAPACITY", "capacity must be positive"));
        }
        if self.demands[0] != 0 {
            return Err(ParseError::invalid("DEMAND_SECTION", "depot demand must be zero"));
        }
        if let Some(i) = self.demands.iter().position(|&q| q > self.capacity) {
            return Err(ParseError::invalid(
                "DEMAND_SECTION",
                format!(
                    "customer demand exceeds capacity (node {}: {} > {})",
                    self.node_ids[i], self.demands[i], self.capacity
                ),
            ));
        }
        if let Some(c) = &self.coords {
            if c.len() != nv {
                return Err(ParseError::invalid("NODE_COORD_SECTION", "coordinate count mismatch"));
            }
        }
        if let EdgeWeights::Explicit(m) = &self.weights {
            if m.len() != nv * nv {
                return Err(ParseError::invalid("EDGE_WEIGHT_SECTION", "matrix size mismatch"));
            }
            if m.iter().any(|&w| w < 0) {
                return Err(ParseError::invalid("EDGE_WEIGHT_SECTION", "negative edge weight"));
            }
        }
        Ok(())
    }
}

/// Euclidean distance rounded half-up.
pub fn euc2d(a: (f64, f64), b: (f64, f64)) -> Cost {
    let (dx, dy) = (a.0 - b.0, a.1 - b.1);
    ((dx * dx + dy * dy).sqrt() + 0.5).floor() as Cost
}

/// Dense integer distance matrix over all vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<Cost>,
    symmetric: bool,
}

impl DistanceMatrix {
    pub fn from_flat(n: usize, data: Vec<Cost>) -> Self {
        assert_eq!(data.len(), n * n);
        let symmetric = (0..n).all(|i| (0..i).all(|j| data[i * n + j] == data[j * n + i]));
        DistanceMatrix { n, data, symmetric }
    }

    pub fn from_rows(rows: &[Vec<Cost>]) -> Self {
        Self::from_flat(rows.len(), rows.iter().flatten().copied().collect())
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Cost {
        self.data[i * self.n + j]
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Cost of the closed tour `0 -> visits -> 0`.
    pub fn tour_cost(&self, visits: &[usize]) -> Cost {
        let mut prev = 0;
        let mut c = 0;
        for &v in visits {
            c += self.get(prev, v);
            prev = v;
        }
        c + self.get(prev, 0)
    }
}

/// The `gamma` nearest customers of every customer, ties broken by lower index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborLists {
    lists: Vec<Vec<usize>>,
}

impl NeighborLists {
    pub fn build(dm: &DistanceMatrix, gamma: usize) -> Self {
        let nv = dm.len();
        let mut lists = vec![Vec::new(); nv];
        for (i, list) in lists.iter_mut().enumerate().skip(1) {
            let mut others: Vec<usize> = (1..nv).filter(|&j| j != i).collect();
            others.sort_by_key(|&j| (dm.get(i, j), j));
            others.truncate(gamma);
            *list = others;
        }
        NeighborLists { lists }
    }

    /// Neighbors of vertex `i`; empty for the depot.
    pub fn of(&self, i: usize) -> &[usize] {
        &self.lists[i]
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Section {
    Header,
    Coords,
    Demands,
    Depots,
    Weights,
    Done,
}

/// Parses CVRPLIB text. `fallback_name` is used when the file has no NAME.
pub fn parse_cvrplib(text: &str, fallback_name: &str) -> Result<Instance, ParseError> {
    let mut name = None;
    let mut dimension: Option<usize> = None;
    let mut capacity: Option<Load> = None;
    let mut weight_type = None;
    let mut weight_format = None;
    let mut coords: HashMap<usize, (f64, f64)> = HashMap::new();
    let mut demands: HashMap<usize, Load> = HashMap::new();
    let mut depots: Vec<usize> = Vec::new();
    let mut weights: Vec<Cost> = Vec::new();
    let mut section = Section::Header;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let upper_head = line.split_whitespace().next().unwrap_or("").to_ascii_uppercase();
        let next_section = match upper_head.trim_end_matches(':') {
            "NODE_COORD_SECTION" => Some(Section::Coords),
            "DEMAND_SECTION" => Some(Section::Demands),
            "DEPOT_SECTION" => Some(Section::Depots),
            "EDGE_WEIGHT_SECTION" => Some(Section::Weights),
            "EOF" => Some(Section::Done),
            _ => None,
        };
        if let Some(s) = next_section {
            section = s;
            continue;
        }
        match section {
            Section::Done => break,
            Section::Header => {
                let (key, value) = match line.split_once(':') {
                    Some((k, v)) => (k.trim().to_ascii_uppercase(), v.trim()),
                    None => {
                        let mut it = line.splitn(2, char::is_whitespace);
                        let k = it.next().unwrap_or("").to_ascii_uppercase();
                        (k, it.next().unwrap_or("").trim())
                    }
                };
                match key.as_str() {
                    "NAME" => name = Some(value.to_string()),
                    "DIMENSION" => dimension = Some(parse_num(value, lineno, "DIMENSION")?),
                    "CAPACITY" => capacity = Some(parse_num(value, lineno, "CAPACITY")?),
                    "EDGE_WEIGHT_TYPE" => weight_type = Some(value.to_ascii_uppercase()),
                    "EDGE_WEIGHT_FORMAT" => weight_format = Some(value.to_ascii_uppercase()),
                    "TYPE" => {
                        let t = value.to_ascii_uppercase();
                        if t != "CVRP" && t != "ACVRP" {
                            return Err(ParseError::syntax(lineno, "TYPE", format!("unsupported problem type {value}")));
                        }
                    }
                    _ => {}
                }
            }
            Section::Coords => {
                let f: Vec<&str> = line.split_whitespace().collect();
                if f.len() != 3 {
                    return Err(ParseError::syntax(lineno, "NODE_COORD_SECTION", "expected `id x y`"));
                }
                let id: usize = parse_num(f[0], lineno, "NODE_COORD_SECTION")?;
                let x: f64 = parse_num(f[1], lineno, "NODE_COORD_SECTION")?;
                let y: f64 = parse_num(f[2], lineno, "NODE_COORD_SECTION")?;
                check_id(id, dimension, lineno, "NODE_COORD_SECTION")?;
                if coords.insert(id, (x, y)).is_some() {
                    return Err(ParseError::syntax(lineno, "NODE_COORD_SECTION", format!("duplicate vertex id {id}")));
                }
            }
            Section::Demands => {
                let f: Vec<&str> = line.split_whitespace().collect();
                if f.len() != 2 {
                    return Err(ParseError::syntax(lineno, "DEMAND_SECTION", "expected `id demand`"));
                }
                let id: usize = parse_num(f[0], lineno, "DEMAND_SECTION")?;
                let q: Load = parse_num(f[1], lineno, "DEMAND_SECTION")?;
                check_id(id, dimension, lineno, "DEMAND_SECTION")?;
                if demands.insert(id, q).is_some() {
                    return Err(ParseError::syntax(lineno, "DEMAND_SECTION", format!("duplicate vertex id {id}")));
                }
            }
            Section::Depots => {
                for tok in line.split_whitespace() {
                    let v: i64 = parse_num(tok, lineno, "DEPOT_SECTION")?;
                    if v == -1 {
                        section = Section::Header;
                        break;
                    }
                    let id = usize::try_from(v)
                        .map_err(|_| ParseError::syntax(lineno, "DEPOT_SECTION", "negative depot id"))?;
                    check_id(id, dimension, lineno, "DEPOT_SECTION")?;
                    depots.push(id);
                }
            }
            Section::Weights => {
                for tok in line.split_whitespace() {
                    weights.push(parse_num(tok, lineno, "EDGE_WEIGHT_SECTION")?);
                }
            }
        }
    }

    let dim = dimension.ok_or_else(|| ParseError::invalid("DIMENSION", "missing"))?;
    let capacity = capacity.ok_or_else(|| ParseError::invalid("CAPACITY", "missing"))?;
    if depots.len() > 1 {
        return Err(ParseError::invalid("DEPOT_SECTION", "only a single depot is supported"));
    }
    let depot = depots.first().copied().unwrap_or(1);
    let mut node_ids = vec![depot];
    node_ids.extend((1..=dim).filter(|&id| id != depot));

    let mut dem = Vec::with_capacity(dim);
    for &id in &node_ids {
        let q = demands
            .get(&id)
            .copied()
            .ok_or_else(|| ParseError::invalid("DEMAND_SECTION", format!("missing demand for vertex {id}")))?;
        dem.push(q);
    }

    let wt = weight_type.unwrap_or_else(|| "EUC_2D".to_string());
    let (weights, coords) = match wt.as_str() {
        "EUC_2D" => {
            let mut c = Vec::with_capacity(dim);
            for &id in &node_ids {
                c.push(
                    *coords
                        .get(&id)
                        .ok_or_else(|| ParseError::invalid("NODE_COORD_SECTION", format!("missing coordinates for vertex {id}")))?,
                );
            }
            (EdgeWeights::Euc2d, Some(c))
        }
        "EXPLICIT" => {
            let fmt = weight_format.unwrap_or_else(|| "FULL_MATRIX".to_string());
            if fmt != "FULL_MATRIX" {
                return Err(ParseError::invalid("EDGE_WEIGHT_FORMAT", format!("unsupported format {fmt}")));
            }
            if weights.len() != dim * dim {
                return Err(ParseError::invalid(
                    "EDGE_WEIGHT_SECTION",
                    format!("expected {} entries, found {}", dim * dim, weights.len()),
                ));
            }
            let mut m = Vec::with_capacity(dim * dim);
            for &a in &node_ids {
                for &b in &node_ids {
                    m.push(weights[(a - 1) * dim + (b - 1)]);
                }
            }
            let c = if coords.len() == dim {
                Some(node_ids.iter().map(|id| coords[id]).collect())
            } else {
                None
            };
            (EdgeWeights::Explicit(m), c)
        }
        other => {
            return Err(ParseError::invalid("EDGE_WEIGHT_TYPE", format!("unsupported type {other}")));
        }
    };

    let inst = Instance {
        name: name.unwrap_or_else(|| fallback_name.to_string()),
        capacity,
        demands: dem,
        coords,
        weights,
        node_ids,
    };
    inst.validate()?;
    Ok(inst)
}

/// Reads a CVRPLIB file; the file stem is used as the name when NAME is absent.
pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance, ParseError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ParseError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("instance");
    parse_cvrplib(&text, stem)
}

/// Serializes an instance back to CVRPLIB text using its original node ids.
pub fn to_cvrplib(inst: &Instance) -> String {
    let nv = inst.num_vertices();
    let mut by_id: Vec<usize> = (0..nv).collect();
    by_id.sort_by_key(|&v| inst.node_ids[v]);
    let mut s = String::new();
    let _ = writeln!(s, "NAME : {}", inst.name);
    let _ = writeln!(s, "TYPE : CVRP");
    let _ = writeln!(s, "DIMENSION : {nv}");
    match &inst.weights {
        EdgeWeights::Euc2d => {
            let _ = writeln!(s, "EDGE_WEIGHT_TYPE : EUC_2D");
        }
        EdgeWeights::Explicit(_) => {
            let _ = writeln!(s, "EDGE_WEIGHT_TYPE : EXPLICIT");
            let _ = writeln!(s, "EDGE_WEIGHT_FORMAT : FULL_MATRIX");
        }
    }
    let _ = writeln!(s, "CAPACITY : {}", inst.capacity);
    if let Some(coords) = &inst.coords {
        let _ = writeln!(s, "NODE_COORD_SECTION");
        for &v in &by_id {
            let _ = writeln!(s, "{} {} {}", inst.node_ids[v], coords[v].0, coords[v].1);
        }
    }
    if let EdgeWeights::Explicit(m) = &inst.weights {
        let _ = writeln!(s, "EDGE_WEIGHT_SECTION");
        for &a in &by_id {
            let row: Vec<String> = by_id.iter().map(|&b| m[a * nv + b].to_string()).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
    }
    let _ = writeln!(s, "DEMAND_SECTION");
    for &v in &by_id {
        let _ = writeln!(s, "{} {}", inst.node_ids[v], inst.demands[v]);
    }
    let _ = writeln!(s, "DEPOT_SECTION");
    let _ = writeln!(s, " {}", inst.node_ids[0]);
    let _ = writeln!(s, " -1");
    let _ = writeln!(s, "EOF");
    s
}

/// Parses a best-known-solution sidecar with one `name<TAB>cost` per line.
pub fn parse_bks(text: &str) -> Result<HashMap<String, Cost>, ParseError> {
    let mut out = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, value) = line
            .split_once('\t')
            .ok_or_else(|| ParseError::syntax(idx + 1, "bks", "expected `name<TAB>cost`"))?;
        let cost: Cost = parse_num(value.trim(), idx + 1, "bks")?;
        out.insert(name.trim().to_string(), cost);
    }
    Ok(out)
}

fn parse_num<T: std::str::FromStr>(s: &str, line: usize, field: &str) -> Result<T, ParseError> {
    s.trim()
        .parse()
        .map_err(|_| ParseError::syntax(line, field, format!("invalid number `{s}`")))
}

fn check_id(id: usize, dimension: Option<usize>, line: usize, field: &str) -> Result<(), ParseError> {
    match dimension {
        Some(d) if id == 0 || id > d => Err(ParseError::syntax(line, field, format!("vertex id {id} out of range 1..={d}"))),
        None => Err(ParseError::syntax(line, field, "section appears before DIMENSION")),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "NAME : tiny\nTYPE : CVRP\nDIMENSION : 4\nEDGE_WEIGHT_TYPE : EUC_2D\nCAPACITY : 10\n\
NODE_COORD_SECTION\n1 0 0\n2 3 4\n3 0 1\n4 1.5 0\nDEMAND_SECTION\n1 0\n2 4\n3 5\n4 6\nDEPOT_SECTION\n 1\n -1\nEOF\n";

    #[test]
    fn euc2d_rounds_half_up() {
        assert_eq!(euc2d((0.0, 0.0), (3.0, 4.0)), 5);
        assert_eq!(euc2d((0.0, 0.0), (1.5, 0.0)), 2);
        assert_eq!(euc2d((0.0, 0.0), (2.5, 0.0)), 3);
        assert_eq!(euc2d((0.0, 0.0), (1.0, 1.0)), 1);
    }

    #[test]
    fn parses_small_file() {
        let inst = parse_cvrplib(SMALL, "x").unwrap();
        assert_eq!(inst.name, "tiny");
        assert_eq!(inst.num_customers(), 3);
        assert_eq!(inst.demands, vec![0, 4, 5, 6]);
        let dm = inst.distance_matrix();
        assert_eq!(dm.get(0, 1), 5);
        assert_eq!(dm.get(1, 0), 5);
        assert_eq!(dm.get(0, 3), 2);
        assert!(dm.is_symmetric());
        assert_eq!(dm.tour_cost(&[1, 2]), 5 + 4 + 1);
    }

    #[test]
    fn depot_is_remapped_to_zero() {
        let text = SMALL.replace("DEPOT_SECTION\n 1", "DEPOT_SECTION\n 3")
            .replace("1 0\n2 4\n3 5", "1 5\n2 4\n3 0");
        let inst = parse_cvrplib(&text, "x").unwrap();
        assert_eq!(inst.node_ids, vec![3, 1, 2, 4]);
        assert_eq!(inst.demands, vec![0, 5, 4, 6]);
        assert_eq!(inst.coords.as_ref().unwrap()[0], (0.0, 1.0));
    }

    #[test]
    fn rejects_demand_above_capacity() {
        let text = SMALL.replace("4 6\n", "4 11\n");
        let err = parse_cvrplib(&text, "x").unwrap_err();
        assert!(err.to_string().contains("customer demand exceeds capacity"), "{err}");
    }

    #[test]
    fn rejects_duplicate_vertex() {
        let text = SMALL.replace("3 0 1\n", "2 0 1\n");
        let err = parse_cvrplib(&text, "x").unwrap_err();
        match err {
            ParseError::Syntax { line, field, .. } => {
                assert_eq!(line, 9);
                assert_eq!(field, "NODE_COORD_SECTION");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_malformed_number() {
        let err = parse_cvrplib(&SMALL.replace("CAPACITY : 10", "CAPACITY : ten"), "x").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 5, .. }));
    }

    #[test]
    fn explicit_matrix_round_trip() {
        let m = vec![vec![0, 1, 2], vec![5, 0, 1], vec![1, 7, 0]];
        let inst = Instance::from_matrix("asym", 5, &m, vec![0, 2, 3]).unwrap();
        let dm = inst.distance_matrix();
        assert!(!dm.is_symmetric());
        assert_eq!(dm.get(1, 0), 5);
        let back = parse_cvrplib(&to_cvrplib(&inst), "y").unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn euclidean_round_trip() {
        let inst = parse_cvrplib(SMALL, "x").unwrap();
        assert_eq!(parse_cvrplib(&to_cvrplib(&inst), "y").unwrap(), inst);
    }

    #[test]
    fn neighbor_lists_exclude_depot_and_break_ties_by_index() {
        let coords = vec![(0.0, 0.0), (0.0, 0.0), (1.0, 0.0), (-1.0, 0.0), (5.0, 0.0)];
        let inst = Instance::from_coords("n", 10, coords, vec![0, 1, 1, 1, 1]).unwrap();
        let nl = NeighborLists::build(&inst.distance_matrix(), 2);
        assert!(nl.of(0).is_empty());
        assert_eq!(nl.of(1), &[2, 3]);
        assert_eq!(nl.of(4).len(), 2);
        let all = NeighborLists::build(&inst.distance_matrix(), 10);
        assert_eq!(all.of(1).len(), 3);
    }

    #[test]
    fn bks_sidecar() {
        let m = parse_bks("X-n101-k25\t27591\n# comment\nA-n32-k5\t784\n").unwrap();
        assert_eq!(m["X-n101-k25"], 27591);
        assert_eq!(m.len(), 2);
        assert!(parse_bks("broken line\n").is_err());
    }
}
