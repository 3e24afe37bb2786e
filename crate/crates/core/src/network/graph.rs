use super::NetworkState;
use crate::geometry::{euclidean, NodeId};
use std::collections::VecDeque;

/// Undirected unit-disk graph over the nodes that are on the air.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Graph {
    present: Vec<bool>,
    adjacency: Vec<Vec<NodeId>>,
}

/// Breadth-first search result from one source.
#[derive(Debug, Clone)]
pub struct Bfs {
    pub depth: Vec<Option<u32>>,
    pub parent: Vec<Option<NodeId>>,
}

impl Bfs {
    /// Source-to-`target` node sequence, source first.
    pub fn path_to(&self, target: NodeId) -> Option<Vec<NodeId>> {
        self.depth[target.index()]?;
        let mut path = vec![target];
        let mut cur = target;
        while let Some(p) = self.parent[cur.index()] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        Some(path)
    }
}

impl Graph {
    /// Graph over `n` slots; `present[i]` marks vertices that exist.
    pub fn new(present: Vec<bool>) -> Self {
        let n = present.len();
        Self {
            present,
            adjacency: vec![Vec::new(); n],
        }
    }

    pub fn add_edge(&mut self, a: NodeId, b: NodeId) {
        if a == b || self.has_edge(a, b) {
            return;
        }
        for (u, v) in [(a, b), (b, a)] {
            let list = &mut self.adjacency[u.index()];
            let pos = list.partition_point(|x| *x < v);
            list.insert(pos, v);
        }
    }

    pub fn len(&self) -> usize {
        self.present.len()
    }

    pub fn is_empty(&self) -> bool {
        self.present.is_empty()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.present.get(id.index()).copied().unwrap_or(false)
    }

    pub fn vertices(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.present
            .iter()
            .enumerate()
            .filter(|(_, p)| **p)
            .map(|(i, _)| NodeId(i as u32))
    }

    /// Sorted neighbor list.
    pub fn neighbors(&self, id: NodeId) -> &[NodeId] {
        self.adjacency.get(id.index()).map_or(&[], Vec::as_slice)
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.neighbors(a).binary_search(&b).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Hop-limited BFS. Neighbors are visited in id order, so each node's
    /// parent is its lowest-id predecessor on the previous level.
    pub fn bfs(&self, source: NodeId, max_depth: Option<u32>) -> Bfs {
        let n = self.len();
        let mut depth = vec![None; n];
        let mut parent = vec![None; n];
        if !self.contains(source) {
            return Bfs { depth, parent };
        }
        depth[source.index()] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = depth[u.index()].unwrap();
            if max_depth.is_some_and(|m| d >= m) {
                continue;
            }
            for &v in self.neighbors(u) {
                if depth[v.index()].is_none() {
                    depth[v.index()] = Some(d + 1);
                    parent[v.index()] = Some(u);
                    queue.push_back(v);
                }
            }
        }
        Bfs { depth, parent }
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<NodeId>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for v in self.vertices() {
            if seen[v.index()] {
                continue;
            }
            let bfs = self.bfs(v, None);
            let comp: Vec<NodeId> = bfs
                .depth
                .iter()
                .enumerate()
                .filter(|(_, d)| d.is_some())
                .map(|(i, _)| NodeId(i as u32))
                .collect();
            for c in &comp {
                seen[c.index()] = true;
            }
            out.push(comp);
        }
        out
    }
}

/// Unit-disk connectivity: an edge joins two on-air nodes whose distance is
/// at most `range` (closed boundary).
pub fn connectivity(network: &NetworkState, range: f64) -> Graph {
    let nodes = network.nodes();
    let mut g = Graph::new(nodes.iter().map(|n| n.on_air()).collect());
    for (i, a) in nodes.iter().enumerate() {
        if !a.on_air() {
            continue;
        }
        for b in nodes[i + 1..].iter().filter(|b| b.on_air()) {
            if euclidean(a.true_position, b.true_position) <= range {
                g.add_edge(a.id, b.id);
            }
        }
    }
    g
}
