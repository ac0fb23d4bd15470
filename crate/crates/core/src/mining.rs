// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Level-wise (Apriori) frequent-itemset mining over sensor-ID lists.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::segment::IndoorActivity;
use crate::{Error, Result, SensorId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    pub items: BTreeSet<SensorId>,
    /// Index of the activity this list came from, when known.
    pub source_activity_ref: Option<usize>,
}

impl Transaction {
    pub fn new<I, S>(items: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<SensorId>,
    {
        Transaction {
            items: items.into_iter().map(Into::into).collect(),
            source_activity_ref: None,
        }
    }

    pub fn from_activity(index: usize, activity: &IndoorActivity) -> Self {
        Transaction {
            items: activity.distinct_sensors().iter().cloned().collect(),
            source_activity_ref: Some(index),
        }
    }

    pub fn contains_any<'a>(&self, sensors: impl IntoIterator<Item = &'a SensorId>) -> bool {
        sensors.into_iter().any(|s| self.items.contains(s))
    }
}

/// Parses whitespace-separated item lists, one transaction per line.
/// A leading integer column (row number) is skipped.
pub fn transactions_from_text(text: &str) -> Vec<Transaction> {
    text.lines()
        .filter_map(|line| {
            let mut toks: Vec<&str> = line.split_whitespace().collect();
            if toks.first().is_some_and(|t| t.parse::<u64>().is_ok()) {
                toks.remove(0);
            }
            (!toks.is_empty()).then(|| Transaction::new(toks))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequentItemset {
    /// Sorted ascending.
    pub items: Vec<SensorId>,
    pub support_count: usize,
    pub support_ratio: f64,
}

impl FrequentItemset {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn item_set(&self) -> BTreeSet<SensorId> {
        self.items.iter().cloned().collect()
    }
}

/// Report order: larger sets first, then higher support, then lexicographic.
pub fn report_order(a: &FrequentItemset, b: &FrequentItemset) -> Ordering {
    b.items
        .len()
        .cmp(&a.items.len())
        .then(b.support_count.cmp(&a.support_count))
        .then_with(|| a.items.cmp(&b.items))
}

/// Smallest transaction count that satisfies `count / n >= min_support`.
pub fn min_support_count(min_support: f64, n: usize) -> usize {
    // Tolerance absorbs products such as 0.3 * 10 = 3.0000000000000004.
    let raw = min_support * n as f64 - 1e-9;
    (raw.ceil().max(1.0)) as usize
}

fn check_support(min_support: f64) -> Result<()> {
    if !(min_support > 0.0 && min_support < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "min_support must lie in (0, 1), got {min_support}"
        )));
    }
    Ok(())
}

/// Every itemset (size >= 1) appearing in at least `min_support` of the
/// transactions, inclusive, in [`report_order`].
pub fn frequent_itemsets(
    transactions: &[Transaction],
    min_support: f64,
) -> Result<Vec<FrequentItemset>> {
    check_support(min_support)?;
    if transactions.is_empty() {
        return Err(Error::EmptyTransactions);
    }
    let n = transactions.len();
    let min_count = min_support_count(min_support, n);

    let vocab: Vec<&SensorId> = transactions
        .iter()
        .flat_map(|t| t.items.iter())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: BTreeMap<&SensorId, usize> =
        vocab.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let words = vocab.len().div_ceil(64).max(1);
    let bitsets: Vec<Vec<u64>> = transactions
        .iter()
        .map(|t| {
            let mut bits = vec![0u64; words];
            for item in &t.items {
                let i = index[item];
                bits[i / 64] |= 1 << (i % 64);
            }
            bits
        })
        .collect();
    let support = |cand: &[usize]| {
        bitsets
            .iter()
            .filter(|bits| cand.iter().all(|&i| bits[i / 64] & (1 << (i % 64)) != 0))
            .count()
    };

    let mut found: Vec<(Vec<usize>, usize)> = Vec::new();
    let mut level: Vec<Vec<usize>> = (0..vocab.len())
        .filter_map(|i| {
            let c = support(&[i]);
            (c >= min_count).then(|| {
                found.push((vec![i], c));
                vec![i]
            })
        })
        .collect();

    while level.len() > 1 {
        let prev: HashSet<&[usize]> = level.iter().map(Vec::as_slice).collect();
        let mut next = Vec::new();
        for (a_idx, a) in level.iter().enumerate() {
            for b in &level[a_idx + 1..] {
                let k = a.len();
                if a[..k - 1] != b[..k - 1] {
                    // level is sorted, so no later b shares a's prefix either
                    break;
                }
                let mut cand = a.clone();
                cand.push(b[k - 1]);
                let all_subsets_frequent = (0..cand.len()).all(|skip| {
                    let sub: Vec<usize> = cand
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != skip)
                        .map(|(_, &v)| v)
                        .collect();
                    prev.contains(sub.as_slice())
                });
                if !all_subsets_frequent {
                    continue;
                }
                let c = support(&cand);
                if c >= min_count {
                    found.push((cand.clone(), c));
                    next.push(cand);
                }
            }
        }
        level = next;
    }

    let mut out: Vec<FrequentItemset> = found
        .into_iter()
        .map(|(idx, count)| FrequentItemset {
            items: idx.iter().map(|&i| vocab[i].clone()).collect(),
            support_count: count,
            support_ratio: count as f64 / n as f64,
        })
        .collect();
    out.sort_by(report_order);
    Ok(out)
}

/// The largest itemset; ties broken by higher support, then by the
/// lexicographically smallest item list.
pub fn select_target_set(itemsets: &[FrequentItemset]) -> Option<FrequentItemset> {
    select_target_set_with_ties(itemsets).map(|(best, _)| best)
}

/// Like [`select_target_set`], also returning the other itemsets that tie
/// with the winner on both size and support.
pub fn select_target_set_with_ties(
    itemsets: &[FrequentItemset],
) -> Option<(FrequentItemset, Vec<FrequentItemset>)> {
    let best = itemsets.iter().min_by(|a, b| report_order(a, b))?.clone();
    let ties = itemsets
        .iter()
        .filter(|s| {
            s.items.len() == best.items.len()
                && s.support_count == best.support_count
                && s.items != best.items
        })
        .cloned()
        .collect();
    Some((best, ties))
}

pub fn itemsets_json(itemsets: &[FrequentItemset]) -> String {
    serde_json::to_string_pretty(itemsets).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_transaction() {
        let out = frequent_itemsets(&[Transaction::new(["A", "B"])], 0.5).unwrap();
        let sets: Vec<(Vec<&str>, usize)> = out
            .iter()
            .map(|f| {
                (
                    f.items.iter().map(String::as_str).collect(),
                    f.support_count,
                )
            })
            .collect();
        assert_eq!(
            sets,
            vec![(vec!["A", "B"], 1), (vec!["A"], 1), (vec!["B"], 1)]
        );
    }

    #[test]
    fn inclusive_threshold() {
        assert_eq!(min_support_count(0.5, 4), 2);
        assert_eq!(min_support_count(0.5, 7), 4);
        assert_eq!(min_support_count(0.3, 10), 3);
        assert_eq!(min_support_count(0.5, 1), 1);
        assert_eq!(min_support_count(0.01, 5), 1);
    }

    #[test]
    fn parameter_errors() {
        assert!(matches!(
            frequent_itemsets(&[], 0.5),
            Err(Error::EmptyTransactions)
        ));
        let t = [Transaction::new(["A"])];
        assert!(frequent_itemsets(&t, 0.0).is_err());
        assert!(frequent_itemsets(&t, 1.0).is_err());
        assert!(frequent_itemsets(&t, f64::NAN).is_err());
    }

    #[test]
    fn target_selection_tie_break() {
        assert!(select_target_set(&[]).is_none());
        let mk = |items: &[&str], c| FrequentItemset {
            items: items.iter().map(|s| s.to_string()).collect(),
            support_count: c,
            support_ratio: c as f64 / 10.0,
        };
        let sets = vec![
            mk(&["B", "C"], 5),
            mk(&["A", "D"], 5),
            mk(&["A"], 9),
            mk(&["A", "B"], 4),
        ];
        let (best, ties) = select_target_set_with_ties(&sets).unwrap();
        assert_eq!(best.items, vec!["A", "D"]);
        assert_eq!(ties.len(), 1);
        assert_eq!(ties[0].items, vec!["B", "C"]);
    }

    #[test]
    fn text_parsing_skips_row_numbers() {
        let t = transactions_from_text("1\tM013 M020\n\n2 M020\n");
        assert_eq!(t.len(), 2);
        assert_eq!(t[0].items.len(), 2);
        assert!(t[1].items.contains("M020"));
    }
}
