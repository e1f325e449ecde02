//! Unit-normalized embedding vectors and cosine similarity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A unit-normalized real vector. All vectors produced within one run share
/// the same dimension; the gateway enforces that at the batch boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    values: Vec<f64>,
}

impl EmbeddingVector {
    /// Build from raw values, normalizing to unit L2 norm.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidRequest("empty embedding vector".into()));
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidRequest(
                "embedding vector has zero or non-finite norm".into(),
            ));
        }
        Ok(Self {
            values: values.into_iter().map(|v| v / norm).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Cosine similarity; for unit vectors this is the dot product.
    pub fn cosine(&self, other: &EmbeddingVector) -> f64 {
        dot(&self.values, &other.values)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Cosine similarity between arbitrary (not necessarily unit) vectors.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot(a, b) / (na * nb)
}

/// Mean of a set of vectors (not renormalized).
pub fn centroid(vectors: &[&EmbeddingVector]) -> Vec<f64> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let dim = vectors[0].dim();
    let mut out = vec![0.0; dim];
    for v in vectors {
        for (acc, x) in out.iter_mut().zip(v.values()) {
            *acc += x;
        }
    }
    let n = vectors.len() as f64;
    for acc in out.iter_mut() {
        *acc /= n;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_unit_norm_after_construction() {
        let v = EmbeddingVector::new(vec![3.0, 4.0]).unwrap();
        let norm: f64 = v.values().iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-6);
    }

    #[test]
    fn test_zero_vector_rejected() {
        assert!(EmbeddingVector::new(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn test_cosine_identity_and_orthogonal() {
        let a = EmbeddingVector::new(vec![1.0, 0.0]).unwrap();
        let b = EmbeddingVector::new(vec![0.0, 2.0]).unwrap();
        assert!((a.cosine(&a) - 1.0).abs() < 1e-12);
        assert!(a.cosine(&b).abs() < 1e-12);
    }
}
