use serde::{Deserialize, Serialize};

pub const DEFAULT_CUMULATIVE_CUT: f64 = 0.999;

/// Leverage-ordered features split at a cumulative-leverage threshold.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureRanking {
    pub primary: Vec<usize>,
    pub secondary: Vec<usize>,
}

/// Sorts features by descending leverage (ties by ascending index).
/// `primary` is the shortest prefix whose leverage sums to at least
/// `cumulative_cut`; `secondary` is every remaining feature with positive
/// leverage.
pub fn rank_features(leverage: &[f64], cumulative_cut: f64) -> FeatureRanking {
    let mut order: Vec<usize> = (0..leverage.len()).filter(|&i| leverage[i] > 0.0).collect();
    order.sort_by(|&a, &b| leverage[b].total_cmp(&leverage[a]).then(a.cmp(&b)));

    let mut cumulative = 0.0;
    let mut cut = order.len();
    for (k, &i) in order.iter().enumerate() {
        cumulative += leverage[i];
        if cumulative >= cumulative_cut - 1e-12 {
            cut = k + 1;
            break;
        }
    }
    let secondary = order.split_off(cut);
    FeatureRanking { primary: order, secondary }
}
