//! Confidence ranking: Yes answers first in descending probability, then No
//! answers in ascending probability, so the least-confident rejections get
//! reconsidered first. Ties break toward the smaller candidate index.

use super::{MatchResponse, MatchVerdict};

pub fn rank_candidates(responses: &[(usize, MatchResponse)]) -> Vec<usize> {
    let mut order: Vec<&(usize, MatchResponse)> = responses.iter().collect();
    order.sort_by(|(ia, ra), (ib, rb)| {
        use MatchVerdict::*;
        match (ra.verdict, rb.verdict) {
            (Yes, No) => std::cmp::Ordering::Less,
            (No, Yes) => std::cmp::Ordering::Greater,
            (Yes, Yes) => rb
                .probability
                .total_cmp(&ra.probability)
                .then_with(|| ia.cmp(ib)),
            (No, No) => ra
                .probability
                .total_cmp(&rb.probability)
                .then_with(|| ia.cmp(ib)),
        }
    });
    order.into_iter().map(|(i, _)| *i).collect()
}
