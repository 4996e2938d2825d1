use ndarray::{Array2, ArrayView2};

/// `D^-1/2 (A + I) D^-1/2` stored row-wise as `(column, weight)` pairs.
///
/// The matrix is symmetric, so it is its own transpose during backprop.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency {
    rows: Vec<Vec<(usize, f64)>>,
}

impl NormalizedAdjacency {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut neigh: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for &(a, b) in edges {
            if a == b {
                continue;
            }
            neigh[a].push(b);
            neigh[b].push(a);
        }
        for list in &mut neigh {
            list.sort_unstable();
            list.dedup();
        }
        let inv_sqrt: Vec<f64> = neigh.iter().map(|l| 1.0 / (l.len() as f64).sqrt()).collect();
        let rows = neigh
            .iter()
            .enumerate()
            .map(|(i, l)| l.iter().map(|&j| (j, inv_sqrt[i] * inv_sqrt[j])).collect())
            .collect();
        Self { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// `Â · h`.
    ///
    /// Each output entry sums its terms in sorted order, so relabelling the
    /// nodes permutes the result bit-for-bit.
    pub fn apply(&self, h: ArrayView2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros(h.raw_dim());
        let mut terms: Vec<f64> = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            for f in 0..h.ncols() {
                terms.clear();
                terms.extend(row.iter().map(|&(j, w)| w * h[[j, f]]));
                terms.sort_unstable_by(f64::total_cmp);
                out[[i, f]] = terms.iter().sum();
            }
        }
        out
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let n = self.rows.len();
        let mut m = Array2::zeros((n, n));
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, w) in row {
                m[[i, j]] = w;
            }
        }
        m
    }
}

/// One carbohydrate as model input.
///
/// `y` and `mask` have one column per prediction head; `mask[[i, k]]`
/// selects node `i` as a training/evaluation target for head `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MolecularGraph {
    pub id: String,
    pub x: Array2<f64>,
    pub adj: NormalizedAdjacency,
    pub edges: Vec<(usize, usize)>,
    pub y: Array2<f64>,
    pub mask: Array2<bool>,
}

impl MolecularGraph {
    pub fn new(
        id: impl Into<String>,
        x: Array2<f64>,
        edges: Vec<(usize, usize)>,
        y: Array2<f64>,
        mask: Array2<bool>,
    ) -> Self {
        let adj = NormalizedAdjacency::from_edges(x.nrows(), &edges);
        Self {
            id: id.into(),
            x,
            adj,
            edges,
            y,
            mask,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.x.nrows()
    }

    pub fn heads(&self) -> usize {
        self.y.ncols()
    }

    pub fn labeled_count(&self, head: usize) -> usize {
        self.mask.column(head).iter().filter(|&&m| m).count()
    }

    /// Disjoint union; no edges cross between the inputs.
    pub fn block_diagonal(graphs: &[&MolecularGraph]) -> MolecularGraph {
        let d = graphs.first().map_or(0, |g| g.x.ncols());
        let heads = graphs.first().map_or(1, |g| g.heads());
        let n: usize = graphs.iter().map(|g| g.n_nodes()).sum();
        let mut x = Array2::zeros((n, d));
        let mut y = Array2::zeros((n, heads));
        let mut mask = Array2::from_elem((n, heads), false);
        let mut edges = Vec::new();
        let mut offset = 0;
        for g in graphs {
            let k = g.n_nodes();
            x.slice_mut(ndarray::s![offset..offset + k, ..]).assign(&g.x);
            y.slice_mut(ndarray::s![offset..offset + k, ..]).assign(&g.y);
            mask.slice_mut(ndarray::s![offset..offset + k, ..])
                .assign(&g.mask);
            edges.extend(g.edges.iter().map(|&(a, b)| (a + offset, b + offset)));
            offset += k;
        }
        let ids: Vec<&str> = graphs.iter().map(|g| g.id.as_str()).collect();
        MolecularGraph::new(ids.join("+"), x, edges, y, mask)
    }

    /// Relabels nodes: node `i` of the result is node `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> MolecularGraph {
        let mut inverse = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let x = self.x.select(ndarray::Axis(0), perm);
        let y = self.y.select(ndarray::Axis(0), perm);
        let mask = self.mask.select(ndarray::Axis(0), perm);
        let edges = self
            .edges
            .iter()
            .map(|&(a, b)| (inverse[a], inverse[b]))
            .collect();
        MolecularGraph::new(self.id.clone(), x, edges, y, mask)
    }
}
