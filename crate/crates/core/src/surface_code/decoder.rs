//! Exact minimum-weight matching on the per-sector decoding graphs.
//!
//! Every data qubit sits in one or two stabilizers of each type, so in a
//! sector it is an edge between those stabilizers, or between its single
//! stabilizer and the boundary node. With unit hop weights, a minimum-weight
//! pairing of the defects (each defect may also pair with the boundary) over
//! shortest-path distances gives a minimum-weight correction for that sector.
//!
//! Pairings are searched exhaustively with memoization over the set of still
//! unmatched defects. The lowest unmatched defect is paired with each later
//! defect in ascending order and then with the boundary; a candidate replaces
//! the incumbent only when strictly cheaper, so the lexicographically first
//! optimal pairing wins.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{PauliError, SurfaceCode};
use crate::error::{Error, Result};

/// Sectors with at most this many stabilizers get a full lookup table.
const TABLE_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sector {
    /// X stabilizers, which detect and correct Z errors.
    X,
    /// Z stabilizers, which detect and correct X errors.
    Z,
}

#[derive(Debug, Clone)]
pub struct MatchingGraph {
    sector: Sector,
    n_stabilizers: usize,
    /// `(u, v, qubit)` with `u < v`; node `n_stabilizers` is the boundary.
    edges: Vec<(usize, usize, usize)>,
    dist: Vec<Vec<u32>>,
    paths: Vec<Vec<u128>>,
}

impl MatchingGraph {
    pub fn new(code: &SurfaceCode, sector: Sector) -> Self {
        let masks = match sector {
            Sector::X => code.x_stabilizer_masks(),
            Sector::Z => code.z_stabilizer_masks(),
        };
        let n = masks.len();
        let boundary = n;
        let mut edges = Vec::new();
        for q in 0..code.n_data() {
            let touching: Vec<usize> = (0..n).filter(|&s| masks[s] >> q & 1 == 1).collect();
            match touching.as_slice() {
                [a] => edges.push((*a, boundary, q)),
                [a, b] => edges.push((*a, *b, q)),
                _ => unreachable!("each data qubit touches one or two stabilizers per sector"),
            }
        }
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n + 1];
        for &(u, v, q) in &edges {
            adj[u].push((v, q));
            adj[v].push((u, q));
        }
        for list in adj.iter_mut() {
            list.sort_unstable();
        }

        let mut dist = vec![vec![u32::MAX; n + 1]; n + 1];
        let mut paths = vec![vec![0u128; n + 1]; n + 1];
        for root in 0..=n {
            let mut parent: Vec<Option<(usize, usize)>> = vec![None; n + 1];
            let mut queue = VecDeque::from([root]);
            dist[root][root] = 0;
            while let Some(u) = queue.pop_front() {
                for &(v, q) in &adj[u] {
                    if dist[root][v] == u32::MAX {
                        dist[root][v] = dist[root][u] + 1;
                        parent[v] = Some((u, q));
                        queue.push_back(v);
                    }
                }
            }
            for target in 0..=n {
                let mut mask = 0u128;
                let mut cur = target;
                while let Some((p, q)) = parent[cur] {
                    mask ^= 1u128 << q;
                    cur = p;
                }
                paths[root][target] = mask;
            }
        }
        Self { sector, n_stabilizers: n, edges, dist, paths }
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn boundary(&self) -> usize {
        self.n_stabilizers
    }

    pub fn n_nodes(&self) -> usize {
        self.n_stabilizers + 1
    }

    /// Unit weight per edge; parallel boundary edges collapse to one entry.
    pub fn edge_weights(&self) -> BTreeMap<(usize, usize), f64> {
        self.edges.iter().map(|&(u, v, _)| ((u, v), 1.0)).collect()
    }

    pub fn distance(&self, u: usize, v: usize) -> u32 {
        self.dist[u][v]
    }

    pub fn is_connected(&self) -> bool {
        self.dist[self.boundary()].iter().all(|&d| d != u32::MAX)
    }

    /// Minimum matching weight and the correction mask for one sector syndrome.
    pub fn decode(&self, syndrome: u128) -> (u32, u128) {
        let defects: Vec<usize> = (0..self.n_stabilizers).filter(|&s| syndrome >> s & 1 == 1).collect();
        if defects.is_empty() {
            return (0, 0);
        }
        let full = if defects.len() == 64 { u64::MAX } else { (1u64 << defects.len()) - 1 };
        let mut memo: HashMap<u64, (u32, usize)> = HashMap::new();
        let cost = self.best(&defects, full, &mut memo);

        let boundary = self.boundary();
        let mut correction = 0u128;
        let mut left = full;
        while left != 0 {
            let i = left.trailing_zeros() as usize;
            let (_, partner) = memo[&left];
            if partner == usize::MAX {
                correction ^= self.paths[defects[i]][boundary];
                left &= !(1u64 << i);
            } else {
                correction ^= self.paths[defects[i]][defects[partner]];
                left &= !(1u64 << i) & !(1u64 << partner);
            }
        }
        (cost, correction)
    }

    fn best(&self, defects: &[usize], left: u64, memo: &mut HashMap<u64, (u32, usize)>) -> u32 {
        if left == 0 {
            return 0;
        }
        if let Some(&(c, _)) = memo.get(&left) {
            return c;
        }
        let i = left.trailing_zeros() as usize;
        let rest = left & !(1u64 << i);
        let mut best = (u32::MAX, usize::MAX);
        let mut others = rest;
        while others != 0 {
            let j = others.trailing_zeros() as usize;
            others &= others - 1;
            let c = self.dist[defects[i]][defects[j]] + self.best(defects, rest & !(1u64 << j), memo);
            if c < best.0 {
                best = (c, j);
            }
        }
        let c = self.dist[defects[i]][self.boundary()] + self.best(defects, rest, memo);
        if c < best.0 {
            best = (c, usize::MAX);
        }
        memo.insert(left, best);
        best.0
    }
}

/// Minimum-weight matching decoder for both sectors of one code.
#[derive(Debug, Clone)]
pub struct Decoder {
    code: SurfaceCode,
    x_graph: MatchingGraph,
    z_graph: MatchingGraph,
    x_table: Option<Vec<u128>>,
    z_table: Option<Vec<u128>>,
}

impl Decoder {
    pub fn new(code: &SurfaceCode) -> Self {
        let x_graph = MatchingGraph::new(code, Sector::X);
        let z_graph = MatchingGraph::new(code, Sector::Z);
        let table = |g: &MatchingGraph| {
            (g.n_stabilizers <= TABLE_LIMIT)
                .then(|| (0..1u128 << g.n_stabilizers).map(|s| g.decode(s).1).collect())
        };
        let x_table = table(&x_graph);
        let z_table = table(&z_graph);
        Self { code: code.clone(), x_graph, z_graph, x_table, z_table }
    }

    pub fn code(&self) -> &SurfaceCode {
        &self.code
    }

    pub fn graph(&self, sector: Sector) -> &MatchingGraph {
        match sector {
            Sector::X => &self.x_graph,
            Sector::Z => &self.z_graph,
        }
    }

    /// Correction mask for one sector: a Z mask for `Sector::X`, an X mask
    /// for `Sector::Z`.
    pub fn decode_sector(&self, sector: Sector, syndrome: u128) -> u128 {
        let (graph, table) = match sector {
            Sector::X => (&self.x_graph, &self.x_table),
            Sector::Z => (&self.z_graph, &self.z_table),
        };
        match table {
            Some(t) => t[syndrome as usize],
            None => graph.decode(syndrome).1,
        }
    }

    pub fn decode(&self, syndrome: u128) -> Result<PauliError> {
        if self.code.n_stabilizers() < 128 && syndrome >> self.code.n_stabilizers() != 0 {
            return Err(Error::InvalidParameter("syndrome has bits beyond the stabilizer count".into()));
        }
        let (sx, sz) = self.code.split_syndrome(syndrome);
        Ok(PauliError::new(self.decode_sector(Sector::Z, sz), self.decode_sector(Sector::X, sx)))
    }
}

/// Decode one full syndrome with a freshly built decoder.
pub fn decode_mwpm(code: &SurfaceCode, syndrome: u128) -> Result<PauliError> {
    Decoder::new(code).decode(syndrome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graphs_are_connected() {
        for d in [3, 5, 7] {
            let code = SurfaceCode::new(d).unwrap();
            for sector in [Sector::X, Sector::Z] {
                let g = MatchingGraph::new(&code, sector);
                assert!(g.is_connected());
                assert_eq!(g.n_nodes(), (d * d - 1) / 2 + 1);
                assert!(g.edge_weights().values().all(|&w| w >= 0.0));
            }
        }
    }

    #[test]
    fn corrections_reproduce_syndromes() {
        let code = SurfaceCode::new(3).unwrap();
        let decoder = Decoder::new(&code);
        for s in 0..1u128 << code.n_stabilizers() {
            let c = decoder.decode(s).unwrap();
            assert_eq!(code.syndrome(&c), s);
        }
        assert_eq!(decoder.decode(0).unwrap(), PauliError::identity());
    }

    #[test]
    fn single_bulk_error_is_undone() {
        let code = SurfaceCode::new(5).unwrap();
        let decoder = Decoder::new(&code);
        let e = PauliError::x_on(&[12]);
        assert_eq!(decoder.decode(code.syndrome(&e)).unwrap(), e);
        let e = PauliError::z_on(&[6]);
        assert_eq!(decoder.decode(code.syndrome(&e)).unwrap(), e);
    }

    #[test]
    fn table_and_direct_decoding_agree() {
        let code = SurfaceCode::new(5).unwrap();
        let decoder = Decoder::new(&code);
        for s in [0u128, 1, 5, 0b1011, 0xfff] {
            assert_eq!(decoder.decode_sector(Sector::X, s), decoder.graph(Sector::X).decode(s).1);
        }
    }
}
