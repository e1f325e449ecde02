//! Agglomerative average-linkage clustering over cosine similarity.
//!
//! Used twice in the engine: deduplicating generated questions and grouping
//! semantically equivalent rule candidates. Merging continues while the most
//! similar pair of clusters has average pairwise cosine >= the threshold
//! (default 0.75).
//!
//! Determinism contract: clusters are kept ordered by their smallest member
//! index, candidate pairs are scanned lexicographically, and ties keep the
//! first pair encountered. Given the same vectors in the same order the
//! partition is always identical.

use crate::embedding::EmbeddingVector;

/// Partition `vectors` into clusters of input indices.
///
/// Returned clusters have sorted members and are ordered by smallest member.
pub fn agglomerative_average_linkage(
    vectors: &[EmbeddingVector],
    threshold: f64,
) -> Vec<Vec<usize>> {
    let n = vectors.len();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![vec![0]];
    }

    // Pairwise cosine matrix between current clusters; updated in place with
    // the exact average-linkage recurrence on merge.
    let mut sim: Vec<Vec<f64>> = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let s = vectors[i].cosine(&vectors[j]);
            sim[i][j] = s;
            sim[j][i] = s;
        }
    }

    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();

    loop {
        let m = clusters.len();
        if m < 2 {
            break;
        }
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..m {
            for j in (i + 1)..m {
                let s = sim[i][j];
                if best.map_or(true, |(_, _, b)| s > b) {
                    best = Some((i, j, s));
                }
            }
        }
        let (i, j, s) = best.expect("at least one pair");
        if s < threshold {
            break;
        }

        // Average linkage: sim(A∪B, C) = (|A|·sim(A,C) + |B|·sim(B,C)) / (|A|+|B|)
        let size_i = clusters[i].len() as f64;
        let size_j = clusters[j].len() as f64;
        for k in 0..m {
            if k == i || k == j {
                continue;
            }
            let merged = (size_i * sim[i][k] + size_j * sim[j][k]) / (size_i + size_j);
            sim[i][k] = merged;
            sim[k][i] = merged;
        }

        let absorbed = clusters.remove(j);
        clusters[i].extend(absorbed);
        clusters[i].sort_unstable();
        sim.remove(j);
        for row in sim.iter_mut() {
            row.remove(j);
        }
    }

    clusters
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(values: Vec<f64>) -> EmbeddingVector {
        EmbeddingVector::new(values).unwrap()
    }

    #[test]
    fn test_singleton() {
        let v = vec![unit(vec![1.0, 0.0])];
        assert_eq!(agglomerative_average_linkage(&v, 0.75), vec![vec![0]]);
    }

    #[test]
    fn test_identical_vectors_collapse() {
        let v = vec![unit(vec![1.0, 2.0]), unit(vec![1.0, 2.0])];
        assert_eq!(agglomerative_average_linkage(&v, 0.75), vec![vec![0, 1]]);
    }

    #[test]
    fn test_orthogonal_vectors_stay_apart() {
        let v = vec![unit(vec![1.0, 0.0]), unit(vec![0.0, 1.0])];
        assert_eq!(
            agglomerative_average_linkage(&v, 0.75),
            vec![vec![0], vec![1]]
        );
    }

    #[test]
    fn test_two_groups() {
        let v = vec![
            unit(vec![1.0, 0.05, 0.0]),
            unit(vec![0.0, 0.05, 1.0]),
            unit(vec![1.0, 0.0, 0.05]),
            unit(vec![0.05, 0.0, 1.0]),
        ];
        assert_eq!(
            agglomerative_average_linkage(&v, 0.75),
            vec![vec![0, 2], vec![1, 3]]
        );
    }
}
