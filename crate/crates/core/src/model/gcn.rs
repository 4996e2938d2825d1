//! Graph-convolutional node regressor.
//!
//! ```text
//! h0      = relu(x · W_in + b_in)
//! h(k+1)  = relu(Â · h(k) · W_k + b_k)        k = 0 .. layers-1
//! out     = h(L) · W_out + b_out
//! ŷ       = out · σ + μ                        (per head)
//! ```
//!
//! The loss is the mean squared error of `out` against standardized labels,
//! taken over masked (node, head) entries only.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::graph::MolecularGraph;
use super::ModelError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcnModel {
    /// `[W_in, b_in, W_1, b_1, ..., W_L, b_L, W_out, b_out]`; biases are
    /// stored as `1 × width` matrices.
    pub params: Vec<Array2<f64>>,
    pub target_mean: Vec<f64>,
    pub target_std: Vec<f64>,
}

/// Intermediate values kept for the backward pass.
struct Tape {
    /// Pre-activations `z0 .. zL`.
    pre: Vec<Array2<f64>>,
    /// Activations `h0 .. hL`.
    act: Vec<Array2<f64>>,
    /// `Â · h(k)` for each conv layer.
    agg: Vec<Array2<f64>>,
    out: Array2<f64>,
}

fn relu(z: &Array2<f64>) -> Array2<f64> {
    z.mapv(|v| v.max(0.0))
}

fn glorot<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Array2<f64> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-limit..limit))
}

impl GcnModel {
    /// Glorot-uniform weights, zero biases, identity target scaling.
    pub fn init<R: Rng>(
        input_dim: usize,
        hidden: usize,
        layers: usize,
        heads: usize,
        rng: &mut R,
    ) -> Self {
        let mut params = vec![glorot(input_dim, hidden, rng), Array2::zeros((1, hidden))];
        for _ in 0..layers {
            params.push(glorot(hidden, hidden, rng));
            params.push(Array2::zeros((1, hidden)));
        }
        params.push(glorot(hidden, heads, rng));
        params.push(Array2::zeros((1, heads)));
        Self {
            params,
            target_mean: vec![0.0; heads],
            target_std: vec![1.0; heads],
        }
    }

    pub fn zeros(input_dim: usize, hidden: usize, layers: usize, heads: usize) -> Self {
        let mut m = Self::init(input_dim, hidden, layers, heads, &mut rand::rng());
        for p in &mut m.params {
            p.fill(0.0);
        }
        m
    }

    pub fn input_dim(&self) -> usize {
        self.params[0].nrows()
    }

    pub fn hidden(&self) -> usize {
        self.params[0].ncols()
    }

    pub fn layers(&self) -> usize {
        self.params.len() / 2 - 2
    }

    pub fn heads(&self) -> usize {
        self.params[self.params.len() - 1].ncols()
    }

    pub fn parameter_count(&self) -> usize {
        self.params.iter().map(Array2::len).sum()
    }

    fn check(&self, g: &MolecularGraph) -> Result<(), ModelError> {
        if g.x.ncols() != self.input_dim() {
            return Err(ModelError::ShapeMismatch(format!(
                "graph {} has {} features, model expects {}",
                g.id,
                g.x.ncols(),
                self.input_dim()
            )));
        }
        if g.y.ncols() != self.heads() || g.mask.ncols() != self.heads() {
            return Err(ModelError::ShapeMismatch(format!(
                "graph {} has {} label columns, model has {} heads",
                g.id,
                g.y.ncols(),
                self.heads()
            )));
        }
        if g.adj.len() != g.n_nodes() {
            return Err(ModelError::ShapeMismatch("adjacency/node count".into()));
        }
        Ok(())
    }

    fn tape(&self, g: &MolecularGraph) -> Tape {
        let layers = self.layers();
        let z0 = g.x.dot(&self.params[0]) + &self.params[1];
        let mut act = vec![relu(&z0)];
        let mut pre = vec![z0];
        let mut agg = Vec::with_capacity(layers);
        for k in 0..layers {
            let a = g.adj.apply(act[k].view());
            let z = a.dot(&self.params[2 + 2 * k]) + &self.params[3 + 2 * k];
            act.push(relu(&z));
            pre.push(z);
            agg.push(a);
        }
        let n = self.params.len();
        let out = act[layers].dot(&self.params[n - 2]) + &self.params[n - 1];
        Tape {
            pre,
            act,
            agg,
            out,
        }
    }

    /// Standardized outputs (`n × heads`), before de-normalization.
    pub fn forward_normalized(&self, g: &MolecularGraph) -> Result<Array2<f64>, ModelError> {
        self.check(g)?;
        Ok(self.tape(g).out)
    }

    /// Which ReLU units are active, per layer. The loss is smooth in the
    /// parameters on any region where this pattern stays the same.
    pub fn relu_pattern(&self, g: &MolecularGraph) -> Result<Vec<Array2<bool>>, ModelError> {
        self.check(g)?;
        Ok(self.tape(g).pre.iter().map(|z| z.mapv(|v| v > 0.0)).collect())
    }

    /// Predicted shifts in ppm, `n × heads`.
    pub fn predict(&self, g: &MolecularGraph) -> Result<Array2<f64>, ModelError> {
        let mut out = self.forward_normalized(g)?;
        for (k, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (mu, sd) = (self.target_mean[k], self.target_std[k]);
            col.mapv_inplace(|v| v * sd + mu);
        }
        Ok(out)
    }

    fn residuals(&self, g: &MolecularGraph, out: &Array2<f64>) -> Result<(Array2<f64>, usize), ModelError> {
        let count = g.mask.iter().filter(|&&m| m).count();
        if count == 0 {
            return Err(ModelError::EmptyMask(g.id.clone()));
        }
        let mut r = Array2::zeros(out.raw_dim());
        for ((i, k), &m) in g.mask.indexed_iter() {
            if m {
                let t = (g.y[[i, k]] - self.target_mean[k]) / self.target_std[k];
                r[[i, k]] = out[[i, k]] - t;
            }
        }
        Ok((r, count))
    }

    /// Masked mean squared error of standardized outputs.
    pub fn loss(&self, g: &MolecularGraph) -> Result<f64, ModelError> {
        let out = self.forward_normalized(g)?;
        let (r, count) = self.residuals(g, &out)?;
        Ok(r.iter().map(|v| v * v).sum::<f64>() / count as f64)
    }

    /// Loss and the gradient of every parameter, in `params` order.
    pub fn loss_and_grad(&self, g: &MolecularGraph) -> Result<(f64, Vec<Array2<f64>>), ModelError> {
        self.check(g)?;
        let tape = self.tape(g);
        let (r, count) = self.residuals(g, &tape.out)?;
        let loss = r.iter().map(|v| v * v).sum::<f64>() / count as f64;

        let layers = self.layers();
        let n = self.params.len();
        let mut grads: Vec<Array2<f64>> = self.params.iter().map(|p| Array2::zeros(p.raw_dim())).collect();

        let d_out = r * (2.0 / count as f64);
        grads[n - 2] = tape.act[layers].t().dot(&d_out);
        grads[n - 1] = col_sum(&d_out);
        let mut d_h = d_out.dot(&self.params[n - 2].t());

        for k in (0..layers).rev() {
            let d_z = relu_grad(&d_h, &tape.pre[k + 1]);
            grads[2 + 2 * k] = tape.agg[k].t().dot(&d_z);
            grads[3 + 2 * k] = col_sum(&d_z);
            let d_agg = d_z.dot(&self.params[2 + 2 * k].t());
            d_h = g.adj.apply(d_agg.view());
        }

        let d_z0 = relu_grad(&d_h, &tape.pre[0]);
        grads[0] = g.x.t().dot(&d_z0);
        grads[1] = col_sum(&d_z0);
        Ok((loss, grads))
    }
}

fn col_sum(m: &Array2<f64>) -> Array2<f64> {
    let s: Array1<f64> = m.sum_axis(Axis(0));
    s.insert_axis(Axis(0))
}

fn relu_grad(upstream: &Array2<f64>, pre: &Array2<f64>) -> Array2<f64> {
    let mut d = upstream.clone();
    ndarray::Zip::from(&mut d).and(pre).for_each(|d, &z| {
        if z <= 0.0 {
            *d = 0.0;
        }
    });
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn graph() -> MolecularGraph {
        let x = arr2(&[[1.0, 0.0, 0.5], [0.0, 1.0, -0.5], [0.3, 0.3, 0.3]]);
        let y = arr2(&[[10.0], [12.0], [0.0]]);
        let mask = arr2(&[[true], [true], [false]]);
        MolecularGraph::new("g", x, vec![(0, 1), (1, 2)], y, mask)
    }

    #[test]
    fn constant_head() {
        let mut m = GcnModel::zeros(3, 8, 2, 1);
        m.target_mean = vec![10.0];
        let p = m.predict(&graph()).unwrap();
        assert!(p.iter().all(|&v| v == 10.0));
    }

    #[test]
    fn single_node_matches_chained_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = GcnModel::init(3, 5, 2, 1, &mut rng);
        let x = arr2(&[[0.2, -1.0, 0.7]]);
        let g = MolecularGraph::new("one", x.clone(), vec![], arr2(&[[0.0]]), arr2(&[[true]]));
        let mut h = relu(&(x.dot(&m.params[0]) + &m.params[1]));
        for k in 0..2 {
            h = relu(&(h.dot(&m.params[2 + 2 * k]) + &m.params[3 + 2 * k]));
        }
        let expect = h.dot(&m.params[6]) + &m.params[7];
        assert_eq!(m.predict(&g).unwrap(), expect);
    }

    #[test]
    fn perfect_fit_has_zero_gradient() {
        let mut m = GcnModel::zeros(3, 4, 2, 1);
        m.target_mean = vec![7.0];
        let mut g = graph();
        g.y.fill(7.0);
        let (loss, grads) = m.loss_and_grad(&g).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grads.iter().all(|gr| gr.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn empty_mask() {
        let m = GcnModel::zeros(3, 4, 1, 1);
        let mut g = graph();
        g.mask.fill(false);
        assert!(matches!(m.loss(&g), Err(ModelError::EmptyMask(_))));
    }

    #[test]
    fn shape_mismatch() {
        let m = GcnModel::zeros(4, 4, 1, 1);
        assert!(matches!(m.predict(&graph()), Err(ModelError::ShapeMismatch(_))));
    }

    #[test]
    fn doubled_error_quadruples_loss() {
        let m = GcnModel::zeros(3, 4, 1, 1);
        let mut g = graph();
        g.y = arr2(&[[1.0], [-2.0], [0.0]]);
        let base = m.loss(&g).unwrap();
        g.y.mapv_inplace(|v| v * 2.0);
        assert_eq!(m.loss(&g).unwrap(), 4.0 * base);
    }
}
