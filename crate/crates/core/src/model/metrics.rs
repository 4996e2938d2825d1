//! Error metrics, in ppm.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LengthMismatch {
    #[error("recorded and predicted vectors differ in length ({recorded} vs {predicted})")]
    Lengths { recorded: usize, predicted: usize },
    #[error("evaluation batch is empty")]
    Empty,
}

/// Recorded shifts paired with predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationBatch {
    y: Vec<f64>,
    y_hat: Vec<f64>,
}

impl EvaluationBatch {
    pub fn new(y: Vec<f64>, y_hat: Vec<f64>) -> Result<Self, LengthMismatch> {
        if y.len() != y_hat.len() {
            return Err(LengthMismatch::Lengths {
                recorded: y.len(),
                predicted: y_hat.len(),
            });
        }
        if y.is_empty() {
            return Err(LengthMismatch::Empty);
        }
        Ok(Self { y, y_hat })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// `sqrt(Σ (y_i − ŷ_i)² / N)`.
    pub fn rmse(&self) -> f64 {
        let sse: f64 = self
            .y
            .iter()
            .zip(&self.y_hat)
            .map(|(y, p)| (y - p) * (y - p))
            .sum();
        (sse / self.y.len() as f64).sqrt()
    }
}

/// Root-mean-square error between recorded `y` and predicted `y_hat`.
///
/// ```
/// use glycoshift::model::metrics::rmse;
/// let e = rmse(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap();
/// assert!((e - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
/// ```
pub fn rmse(y: &[f64], y_hat: &[f64]) -> Result<f64, LengthMismatch> {
    Ok(EvaluationBatch::new(y.to_vec(), y_hat.to_vec())?.rmse())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identities() {
        assert_eq!(rmse(&[1.0, 5.0], &[1.0, 5.0]).unwrap(), 0.0);
        assert_eq!(rmse(&[1.0, 5.0, 9.0], &[2.0, 4.0, 10.0]).unwrap(), 1.0);
        assert_eq!(
            rmse(&[1.0], &[1.0, 2.0]),
            Err(LengthMismatch::Lengths {
                recorded: 1,
                predicted: 2
            })
        );
        assert_eq!(rmse(&[], &[]), Err(LengthMismatch::Empty));
    }
}
