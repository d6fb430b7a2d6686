use std::collections::{HashMap, VecDeque};

/// Underlying graphs of the block assemblies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphKind {
    /// Vertices ℤ, edges `[m, m+1]`.
    Line,
    /// Vertices ℤ, edges `[m, m+1]` and `{m, −m}` for `m ≠ 0`.
    Chord,
    /// Infinite 3-regular tree.
    TrivalentTree,
    /// Cayley graph of the free group on two generators (4-regular tree).
    F2Cayley,
}

impl GraphKind {
    pub fn name(&self) -> &'static str {
        match self {
            GraphKind::Line => "line",
            GraphKind::Chord => "chord",
            GraphKind::TrivalentTree => "trivalent-tree",
            GraphKind::F2Cayley => "f2-cayley",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [GraphKind::Line, GraphKind::Chord, GraphKind::TrivalentTree, GraphKind::F2Cayley]
            .into_iter()
            .find(|k| k.name() == s)
    }

    /// Number of edges at each vertex used as a port on its block.
    pub fn ports_per_block(&self) -> usize {
        match self {
            GraphKind::Line => 2,
            GraphKind::Chord | GraphKind::TrivalentTree => 3,
            GraphKind::F2Cayley => 4,
        }
    }
}

/// A based graph with its shell counts around the base vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphPlan {
    pub kind: GraphKind,
}

impl GraphPlan {
    pub fn new(kind: GraphKind) -> Self {
        Self { kind }
    }

    /// Number of vertices at graph distance `k` from the base vertex.
    pub fn count(&self, k: u32) -> f64 {
        if k == 0 {
            return 1.0;
        }
        self.count_real(k as f64)
    }

    /// The shell-count formula for `k ≥ 1`, extended to real arguments.
    pub fn count_real(&self, k: f64) -> f64 {
        match self.kind {
            GraphKind::Line | GraphKind::Chord => 2.0,
            GraphKind::TrivalentTree => 3.0 * 2f64.powf(k - 1.0),
            GraphKind::F2Cayley => 4.0 * 3f64.powf(k - 1.0),
        }
    }

    /// Lazily yields `count(0), count(1), …`.
    pub fn shells(&self) -> impl Iterator<Item = f64> + '_ {
        (0u32..).map(move |k| self.count(k))
    }

    /// Shell counts up to distance `max_k` by breadth-first search on an explicit model
    /// of the graph (used to cross-check the formulas).
    pub fn bfs_counts(&self, max_k: u32) -> Vec<u64> {
        match self.kind {
            GraphKind::Line | GraphKind::Chord => {
                let chord = self.kind == GraphKind::Chord;
                bfs(0i64, max_k, |&m| {
                    let mut v = vec![m - 1, m + 1];
                    if chord && m != 0 {
                        v.push(-m);
                    }
                    v
                })
            }
            GraphKind::TrivalentTree => bfs(Vec::<u8>::new(), max_k, |w| tree_neighbours(w, 3)),
            GraphKind::F2Cayley => bfs(Vec::<u8>::new(), max_k, |w| tree_neighbours(w, 4)),
        }
    }
}

/// Neighbours in the `deg`-regular tree whose vertices are reduced words in `deg`
/// involutions: drop the last letter, or append any letter other than the last.
fn tree_neighbours(w: &[u8], deg: u8) -> Vec<Vec<u8>> {
    let mut out = Vec::with_capacity(deg as usize);
    if let Some((_, head)) = w.split_last() {
        out.push(head.to_vec());
    }
    for l in 0..deg {
        if w.last() != Some(&l) {
            let mut x = w.to_vec();
            x.push(l);
            out.push(x);
        }
    }
    out
}

fn bfs<V, N>(start: V, max_k: u32, neighbours: N) -> Vec<u64>
where
    V: Clone + Eq + std::hash::Hash,
    N: Fn(&V) -> Vec<V>,
{
    let mut dist: HashMap<V, u32> = HashMap::new();
    let mut counts = vec![0u64; max_k as usize + 1];
    let mut queue = VecDeque::new();
    dist.insert(start.clone(), 0);
    queue.push_back(start);
    while let Some(v) = queue.pop_front() {
        let d = dist[&v];
        counts[d as usize] += 1;
        if d == max_k {
            continue;
        }
        for w in neighbours(&v) {
            if !dist.contains_key(&w) {
                dist.insert(w.clone(), d + 1);
                queue.push_back(w);
            }
        }
    }
    counts
}
