//! Covalent connectivity from coordinates, atom paths, and the residue-level
//! glycosidic linkage graph.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labels::{normalize_label, position_digit};
use crate::structure::Structure;

/// Bond-length cut-offs in Å. A pair is bonded when its distance is at most
/// the cut-off for its element pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BondThresholds {
    /// Carbon–carbon.
    pub cc: f64,
    /// Any pair involving hydrogen.
    pub hx: f64,
    /// Every other pair.
    pub xx: f64,
}

impl Default for BondThresholds {
    fn default() -> Self {
        Self {
            cc: 1.65,
            hx: 1.18,
            xx: 1.5,
        }
    }
}

impl BondThresholds {
    pub fn for_pair(&self, a: &str, b: &str) -> f64 {
        if a == "H" || b == "H" {
            self.hx
        } else if a == "C" && b == "C" {
            self.cc
        } else {
            self.xx
        }
    }

    fn max(&self) -> f64 {
        self.cc.max(self.hx).max(self.xx)
    }
}

/// Undirected simple graph over atom indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BondGraph {
    adjacency: Vec<Vec<usize>>,
}

impl BondGraph {
    pub fn new(n: usize) -> Self {
        Self {
            adjacency: vec![Vec::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = Self::new(n);
        for (a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    /// Adds `a–b`; self-loops and duplicates are ignored.
    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for (x, y) in [(a, b), (b, a)] {
            let list = &mut self.adjacency[x];
            if let Err(pos) = list.binary_search(&y) {
                list.insert(pos, y);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    /// Neighbours in ascending index order.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Edges as `(low, high)` pairs in ascending order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, ns)| ns.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// Distance-based bond perception unioned with the file's `CONECT` pairs.
///
/// Uses a uniform cell grid with edge equal to the largest cut-off, so only
/// atoms in neighbouring cells are compared.
pub fn infer_bonds(s: &Structure, t: &BondThresholds) -> BondGraph {
    let n = s.atoms.len();
    let mut g = BondGraph::new(n);
    let cell = t.max().max(1e-6);
    let key = |c: &[f64; 3]| -> [i64; 3] {
        [
            (c[0] / cell).floor() as i64,
            (c[1] / cell).floor() as i64,
            (c[2] / cell).floor() as i64,
        ]
    };
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    for (i, a) in s.atoms.iter().enumerate() {
        grid.entry(key(&a.coord)).or_default().push(i);
    }
    for (i, a) in s.atoms.iter().enumerate() {
        let k = key(&a.coord);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(bucket) = grid.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) else {
                        continue;
                    };
                    for &j in bucket {
                        if j <= i {
                            continue;
                        }
                        let b = &s.atoms[j];
                        let cutoff = t.for_pair(&a.element, &b.element);
                        if distance(&a.coord, &b.coord) <= cutoff {
                            g.add_edge(i, j);
                        }
                    }
                }
            }
        }
    }
    let index = s.serial_index();
    for (a, b) in &s.connect_pairs {
        if let (Some(&i), Some(&j)) = (index.get(a), index.get(b)) {
            g.add_edge(i, j);
        }
    }
    g
}

pub fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("no path from atom {from} to any target")]
pub struct NoPath {
    pub from: usize,
}

/// Hop distance and path from `from` to the nearest member of `targets`.
///
/// Breadth-first with neighbours visited in ascending order, which makes the
/// returned path the lexicographically smallest among all shortest ones.
pub fn shortest_atom_path(
    g: &BondGraph,
    from: usize,
    targets: &BTreeSet<usize>,
) -> Result<(usize, Vec<usize>), NoPath> {
    if targets.contains(&from) {
        return Ok((0, vec![from]));
    }
    let mut parent = vec![usize::MAX; g.len()];
    parent[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if parent[v] != usize::MAX {
                continue;
            }
            parent[v] = u;
            if targets.contains(&v) {
                let mut path = vec![v];
                let mut cur = v;
                while cur != from {
                    cur = parent[cur];
                    path.push(cur);
                }
                path.reverse();
                return Ok((path.len() - 1, path));
            }
            queue.push_back(v);
        }
    }
    Err(NoPath { from })
}

/// Hop distances from every atom to the nearest member of `targets`
/// (multi-source BFS). `None` where unreachable.
pub fn hop_distances(g: &BondGraph, targets: &BTreeSet<usize>) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.len()];
    let mut queue = VecDeque::new();
    for &t in targets {
        dist[t] = Some(0);
        queue.push_back(t);
    }
    while let Some(u) = queue.pop_front() {
        let d = dist[u].expect("queued nodes have a distance");
        for &v in g.neighbors(u) {
            if dist[v].is_none() {
                dist[v] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Ring positions joined by a glycosidic bridge: the child's carbon
/// (usually its anomeric C1) and the parent's carbon, as in `(1-4)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Linkage {
    pub child: u8,
    pub parent: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkageEdge {
    /// Residue indices into [`Structure::residues`].
    pub child: usize,
    pub parent: usize,
    pub linkage: Linkage,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueLinkageGraph {
    /// Residue serial for each residue index.
    pub serials: Vec<i32>,
    /// Whether each residue carries a sugar ring (`C1`..`C4` plus an oxygen
    /// bonded to two of its own carbons).
    pub sugar: Vec<bool>,
    pub edges: Vec<LinkageEdge>,
}

impl ResidueLinkageGraph {
    pub fn parent_of(&self, child: usize) -> Vec<&LinkageEdge> {
        self.edges.iter().filter(|e| e.child == child).collect()
    }
}

fn carbon_position(name: &str) -> Option<u8> {
    let label = normalize_label(name);
    label.starts_with('C').then(|| position_digit(&label)).flatten()
}

/// Builds the residue graph from every inter-residue `C–O–C` bridge.
///
/// The child side is the residue whose bridge carbon also bonds to that
/// residue's ring oxygen (the anomeric carbon). When that does not decide,
/// the lower position number is the child, and then the residue that does
/// not own the bridging oxygen.
pub fn residue_linkage_graph(s: &Structure, g: &BondGraph) -> ResidueLinkageGraph {
    let owner = s.atom_residues();
    let is = |i: usize, el: &str| s.atoms[i].element == el;

    // Ring oxygens: O bonded to two carbons of its own residue.
    let ring_oxygen: Vec<bool> = (0..s.atoms.len())
        .map(|i| {
            is(i, "O")
                && g.neighbors(i)
                    .iter()
                    .filter(|&&c| is(c, "C") && owner[c] == owner[i])
                    .count()
                    >= 2
        })
        .collect();
    let anomeric = |c: usize| {
        g.neighbors(c)
            .iter()
            .any(|&o| ring_oxygen[o] && owner[o] == owner[c])
    };

    let sugar: Vec<bool> = s
        .residues
        .iter()
        .map(|res| {
            let positions: BTreeSet<u8> = res
                .atoms
                .iter()
                .filter(|&&a| is(a, "C"))
                .filter_map(|&a| carbon_position(&s.atoms[a].name))
                .collect();
            (1..=4).all(|p| positions.contains(&p)) && res.atoms.iter().any(|&a| ring_oxygen[a])
        })
        .collect();

    let mut edges: BTreeMap<(usize, usize, Linkage), ()> = BTreeMap::new();
    for o in (0..s.atoms.len()).filter(|&i| is(i, "O")) {
        let carbons: Vec<usize> = g.neighbors(o).iter().copied().filter(|&c| is(c, "C")).collect();
        for (x, &c1) in carbons.iter().enumerate() {
            for &c2 in &carbons[x + 1..] {
                let (r1, r2) = (owner[c1], owner[c2]);
                if r1 == r2 {
                    continue;
                }
                let (Some(p1), Some(p2)) = (
                    carbon_position(&s.atoms[c1].name),
                    carbon_position(&s.atoms[c2].name),
                ) else {
                    continue;
                };
                let (a1, a2) = (anomeric(c1), anomeric(c2));
                let c1_is_child = if a1 != a2 {
                    a1
                } else if p1 != p2 {
                    p1 < p2
                } else {
                    owner[o] != r1
                };
                let (child, parent, linkage) = if c1_is_child {
                    (r1, r2, Linkage { child: p1, parent: p2 })
                } else {
                    (r2, r1, Linkage { child: p2, parent: p1 })
                };
                edges.insert((child, parent, linkage), ());
            }
        }
    }

    ResidueLinkageGraph {
        serials: s.residues.iter().map(|r| r.serial).collect(),
        sugar,
        edges: edges
            .into_keys()
            .map(|(child, parent, linkage)| LinkageEdge {
                child,
                parent,
                linkage,
            })
            .collect(),
    }
}
