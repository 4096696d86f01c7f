//! Undirected simple graphs over dense node indices.
//!
//! Every other module works on [`Graph`]: adjacency queries, connected
//! components, hop-limited neighbourhoods, and the edge-list format used for
//! SNAP-style datasets.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};

/// Undirected graph without self-loops or parallel edges.
///
/// Neighbour sets are kept ordered so that every traversal is deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Graph {
    adj: Vec<BTreeSet<usize>>,
    edge_count: usize,
}

impl Graph {
    pub fn new(node_count: usize) -> Self {
        Self {
            adj: vec![BTreeSet::new(); node_count],
            edge_count: 0,
        }
    }

    /// Builds a graph from node pairs, dropping self-loops and duplicates.
    ///
    /// Panics if an endpoint is out of range.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Self::new(node_count);
        for (u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    /// Neighbours of `i` in ascending index order.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[i].iter().copied()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(&v)
    }

    /// Inserts `{u, v}`. Returns false for self-loops and existing edges.
    pub fn add_edge(&mut self, u: usize, v: usize) -> bool {
        let n = self.node_count();
        assert!(u < n && v < n, "edge ({u}, {v}) out of range for {n} nodes");
        if u == v || !self.adj[u].insert(v) {
            return false;
        }
        self.adj[v].insert(u);
        self.edge_count += 1;
        true
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) -> bool {
        if !self.adj[u].remove(&v) {
            return false;
        }
        self.adj[v].remove(&u);
        self.edge_count -= 1;
        true
    }

    /// Deletes every edge incident to `i` and returns how many were removed.
    pub fn isolate(&mut self, i: usize) -> usize {
        let nbrs = std::mem::take(&mut self.adj[i]);
        for &j in &nbrs {
            self.adj[j].remove(&i);
        }
        self.edge_count -= nbrs.len();
        nbrs.len()
    }

    /// All edges as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.range(u + 1..).map(move |&v| (u, v)))
    }

    /// Number of unordered pairs present in exactly one of the two graphs.
    pub fn symmetric_difference_count(&self, other: &Graph) -> usize {
        self.adj
            .iter()
            .zip(&other.adj)
            .enumerate()
            .map(|(u, (a, b))| {
                a.symmetric_difference(b).filter(|&&v| v > u).count()
            })
            .sum()
    }

    /// Subgraph induced by `nodes`, relabelled `0..nodes.len()` in the given order.
    pub fn induced(&self, nodes: &[usize]) -> Graph {
        let index: HashMap<usize, usize> =
            nodes.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let mut sub = Graph::new(nodes.len());
        for (new_u, &old_u) in nodes.iter().enumerate() {
            for v in self.neighbors(old_u) {
                if let Some(&new_v) = index.get(&v) {
                    if new_u < new_v {
                        sub.add_edge(new_u, new_v);
                    }
                }
            }
        }
        sub
    }

    /// Serializes as an edge list: a `# n nodes, m edges` comment, then one
    /// `u v` line per edge with `u < v`, ascending.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("# {} nodes, {} edges\n", self.node_count(), self.edge_count());
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

/// A graph read from an edge-list file, with the original id of every
/// compacted node (`original_ids[compact] == original`).
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Graph,
    pub original_ids: Vec<i64>,
}

/// Parses SNAP-style edge-list text.
///
/// Lines starting with `#` and blank lines are skipped. Node ids are compacted
/// to `0..n` in order of first appearance; self-loops and repeated edges are
/// dropped.
pub fn load_edge_list(text: &str) -> Result<LoadedGraph> {
    let mut ids: HashMap<i64, usize> = HashMap::new();
    let mut original_ids = Vec::new();
    let mut pairs = Vec::new();

    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parse_err = || Error::Parse {
            line: lineno + 1,
            content: line.to_string(),
        };
        let mut tokens = trimmed.split_whitespace();
        let (Some(a), Some(b), None) = (tokens.next(), tokens.next(), tokens.next()) else {
            return Err(parse_err());
        };
        let a: i64 = a.parse().map_err(|_| parse_err())?;
        let b: i64 = b.parse().map_err(|_| parse_err())?;
        let mut compact = |id: i64| {
            *ids.entry(id).or_insert_with(|| {
                original_ids.push(id);
                original_ids.len() - 1
            })
        };
        let u = compact(a);
        let v = compact(b);
        pairs.push((u, v));
    }

    let graph = Graph::from_edges(original_ids.len(), pairs);
    Ok(LoadedGraph {
        graph,
        original_ids,
    })
}

pub fn read_edge_list(path: &Path) -> Result<LoadedGraph> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_edge_list(&text)
}

/// Erdős–Rényi `G(n, p)`: pairs `i < j` are visited lexicographically and each
/// is kept with probability `p`.
pub fn generate_er<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Graph {
    assert!((0.0..=1.0).contains(&p), "edge probability {p} outside [0, 1]");
    let mut g = Graph::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < p {
                g.add_edge(i, j);
            }
        }
    }
    g
}

/// Connected components of the subgraph induced by `alive`, each sorted
/// ascending, listed by their smallest member.
pub fn components(g: &Graph, alive: &[bool]) -> Vec<Vec<usize>> {
    assert_eq!(alive.len(), g.node_count(), "alive mask length mismatch");
    let mut seen = vec![false; g.node_count()];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..g.node_count() {
        if !alive[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut comp = Vec::new();
        while let Some(u) = queue.pop_front() {
            comp.push(u);
            for v in g.neighbors(u) {
                if alive[v] && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Largest component among `alive` nodes; ties go to the component holding
/// the smallest node index.
pub fn giant_component(g: &Graph, alive: &[bool]) -> Vec<usize> {
    let mut best: Vec<usize> = Vec::new();
    // components() yields in order of smallest member, so strict > keeps the first tie
    for comp in components(g, alive) {
        if comp.len() > best.len() {
            best = comp;
        }
    }
    best
}

/// Breadth-first distances from `source`, stopping at `max_depth`.
/// Unreached nodes are `None`.
pub fn bfs_distances(g: &Graph, source: usize, max_depth: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.node_count()];
    dist[source] = Some(0);
    let mut frontier = vec![source];
    for depth in 1..=max_depth {
        let mut next = Vec::new();
        for &u in &frontier {
            for v in g.neighbors(u) {
                if dist[v].is_none() {
                    dist[v] = Some(depth);
                    next.push(v);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    dist
}

/// Nodes within `k` hops of `i` (including `i`), ascending.
pub fn khop_neighborhood(g: &Graph, i: usize, k: usize) -> Vec<usize> {
    bfs_distances(g, i, k)
        .iter()
        .enumerate()
        .filter_map(|(v, d)| d.map(|_| v))
        .collect()
}

/// Symmetric, reflexive relation marking node pairs within `2k` hops, i.e.
/// the nonzero pattern of `(A + I)^(2k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachMask {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl ReachMask {
    fn empty(n: usize) -> Self {
        let words = n.div_ceil(64);
        Self {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] & (1 << (j % 64)) != 0
    }

    /// Nodes `j` reachable from `i`, ascending.
    pub fn row(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let row = &self.bits[i * self.words..(i + 1) * self.words];
        row.iter().enumerate().flat_map(|(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let bit = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(w * 64 + bit)
            })
        })
    }
}

pub fn reach_mask(g: &Graph, k: usize) -> ReachMask {
    let mut mask = ReachMask::empty(g.node_count());
    for i in 0..g.node_count() {
        for (j, d) in bfs_distances(g, i, 2 * k).into_iter().enumerate() {
            if d.is_some() {
                mask.set(i, j);
            }
        }
    }
    mask
}

/// Ranks nodes by degree (descending, ties by index ascending), induces the
/// subgraph on 1-based ranks `lo..=hi`, and returns its largest connected
/// component relabelled in ascending original-index order.
pub fn derive_degree_rank_subgraph(g: &Graph, lo: usize, hi: usize) -> Result<Graph> {
    let n = g.node_count();
    if lo == 0 || lo > hi || hi > n {
        return Err(Error::RankRange { lo, hi, n });
    }
    let mut ranked: Vec<usize> = (0..n).collect();
    ranked.sort_by_key(|&i| (std::cmp::Reverse(g.degree(i)), i));

    let mut chosen = ranked[lo - 1..hi].to_vec();
    chosen.sort_unstable();
    let induced = g.induced(&chosen);

    let giant = giant_component(&induced, &vec![true; induced.node_count()]);
    if giant.is_empty() {
        return Err(Error::EmptySubgraph { lo, hi });
    }
    Ok(induced.induced(&giant))
}
