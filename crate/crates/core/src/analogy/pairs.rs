use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairMode {
    /// Consecutive manifest entries, each exemplar used at most once.
    #[default]
    Disjoint,
    /// Every unordered pair, lexicographic by id.
    AllPairs,
}

impl std::str::FromStr for PairMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "disjoint" => Ok(PairMode::Disjoint),
            "all_pairs" | "all-pairs" => Ok(PairMode::AllPairs),
            other => Err(Error::InvalidParameter(format!(
                "unknown pairing mode {other}"
            ))),
        }
    }
}

/// Exemplar pairs `(r1, r2)` for training grids, truncated to `cap`.
pub fn build_pairs(
    ids: &[String],
    mode: PairMode,
    cap: Option<usize>,
) -> Result<Vec<(String, String)>> {
    if ids.len() < 2 {
        return Err(Error::TooFewExemplars(ids.len()));
    }
    let mut pairs: Vec<(String, String)> = match mode {
        PairMode::Disjoint => ids
            .chunks_exact(2)
            .map(|c| (c[0].clone(), c[1].clone()))
            .collect(),
        PairMode::AllPairs => {
            let mut sorted = ids.to_vec();
            sorted.sort();
            let mut out = Vec::with_capacity(sorted.len() * (sorted.len() - 1) / 2);
            for (i, a) in sorted.iter().enumerate() {
                for b in &sorted[i + 1..] {
                    out.push((a.clone(), b.clone()));
                }
            }
            out
        }
    };
    if let Some(cap) = cap {
        pairs.truncate(cap);
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("e{i:02}")).collect()
    }

    #[test]
    fn disjoint_counts() {
        assert_eq!(
            build_pairs(&ids(10), PairMode::Disjoint, None)
                .unwrap()
                .len(),
            5
        );
        assert_eq!(
            build_pairs(&ids(40), PairMode::Disjoint, None)
                .unwrap()
                .len(),
            20
        );
        let nine = build_pairs(&ids(9), PairMode::Disjoint, None).unwrap();
        assert_eq!(nine.len(), 4);
        assert!(nine.iter().all(|(a, b)| a != "e09" && b != "e09"));
    }

    #[test]
    fn all_pairs_count_and_order() {
        let p = build_pairs(&ids(9), PairMode::AllPairs, None).unwrap();
        assert_eq!(p.len(), 36);
        assert_eq!(p[0], ("e01".into(), "e02".into()));
        assert_eq!(p[35], ("e08".into(), "e09".into()));
        assert_eq!(
            build_pairs(&ids(9), PairMode::AllPairs, Some(3))
                .unwrap()
                .len(),
            3
        );
    }

    #[test]
    fn too_few() {
        assert!(matches!(
            build_pairs(&ids(1), PairMode::Disjoint, None),
            Err(Error::TooFewExemplars(1))
        ));
    }
}
