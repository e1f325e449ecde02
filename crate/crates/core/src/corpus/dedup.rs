//! Cluster-based question deduplication.

use crate::clustering::agglomerative_average_linkage;
use crate::embedding;
use crate::error::Result;
use crate::gateway::Gateway;

use super::{QAItem, QAStatus};

/// Partition items into semantic clusters and keep one representative per
/// cluster. Non-representatives are marked [`QAStatus::Deduped`]; every item
/// (survivor or not) is returned with its cluster id assigned.
///
/// Items are sorted by id before embedding so the partition is invariant to
/// input order. The representative is the member nearest the cluster
/// centroid, ties broken by id ascending.
pub fn deduplicate_questions(
    items: Vec<QAItem>,
    threshold: f64,
    gateway: &Gateway,
) -> Result<Vec<QAItem>> {
    if items.is_empty() {
        return Ok(items);
    }
    let mut items = items;
    items.sort_by(|a, b| a.id.cmp(&b.id));

    let questions: Vec<&str> = items.iter().map(|i| i.question.as_str()).collect();
    let vectors = gateway.embed(&questions)?;
    let clusters = agglomerative_average_linkage(&vectors, threshold);

    for (cluster_idx, members) in clusters.iter().enumerate() {
        let cluster_id = format!("c{:03}", cluster_idx + 1);
        let member_vectors: Vec<_> = members.iter().map(|&m| &vectors[m]).collect();
        let center = embedding::centroid(&member_vectors);

        let representative = *members
            .iter()
            .max_by(|&&a, &&b| {
                let sa = embedding::cosine(vectors[a].values(), &center);
                let sb = embedding::cosine(vectors[b].values(), &center);
                sa.partial_cmp(&sb)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    // max_by keeps the later of equal elements; compare ids
                    // reversed so the smallest id wins ties.
                    .then_with(|| items[b].id.cmp(&items[a].id))
            })
            .expect("cluster is non-empty");

        for &m in members {
            items[m].cluster_id = Some(cluster_id.clone());
            if m != representative {
                items[m].status = QAStatus::Deduped;
            }
        }
    }
    Ok(items)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SourceClass;
    use crate::gateway::MockPlaybook;

    fn item(id: &str, question: &str) -> QAItem {
        QAItem::candidate(
            id,
            question,
            "some answer",
            "doc1",
            "p1",
            SourceClass::Regulation,
        )
    }

    fn mock() -> Gateway {
        Gateway::with_mock(MockPlaybook::new(17))
    }

    #[test]
    fn test_singleton_is_its_own_representative() {
        let out = deduplicate_questions(vec![item("q1", "What is consent?")], 0.75, &mock()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].status, QAStatus::Candidate);
        assert_eq!(out[0].cluster_id.as_deref(), Some("c001"));
    }

    #[test]
    fn test_identical_questions_collapse_to_one_survivor() {
        let out = deduplicate_questions(
            vec![item("q2", "What is consent?"), item("q1", "What is consent?")],
            0.75,
            &mock(),
        )
        .unwrap();
        let survivors: Vec<_> = out
            .iter()
            .filter(|i| i.status == QAStatus::Candidate)
            .collect();
        assert_eq!(survivors.len(), 1);
        // tie on centroid distance -> smaller id wins
        assert_eq!(survivors[0].id, "q1");
        assert!(out.iter().all(|i| i.cluster_id.as_deref() == Some("c001")));
    }

    #[test]
    fn test_order_invariance() {
        let a = vec![
            item("q1", "Must investigators obtain informed consent?"),
            item("q2", "Do investigators have to obtain informed consent?"),
            item("q3", "How long are biosafety records retained?"),
        ];
        let mut b = a.clone();
        b.reverse();
        let out_a = deduplicate_questions(a, 0.75, &mock()).unwrap();
        let out_b = deduplicate_questions(b, 0.75, &mock()).unwrap();
        assert_eq!(out_a, out_b);
    }
}
