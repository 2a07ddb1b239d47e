use std::collections::BTreeMap;

/// Unit-cost character edit distance (insert, delete, substitute).
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let substitute = prev[j] + usize::from(ca != cb);
            curr[j + 1] = substitute.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Repair {
    pub label: String,
    pub distance: usize,
    /// More than one label sat at the minimum distance.
    pub tie_broken: bool,
}

/// Maps arbitrary output onto the closest label of `labelset`.
///
/// The output is trimmed and lowercased, then compared by [`levenshtein`].
/// Among equally close labels the one most frequent in `train_freqs` wins,
/// then the one listed first.
///
/// # Panics
///
/// Panics if `labelset` is empty.
pub fn repair_label(raw: &str, labelset: &[String], train_freqs: &BTreeMap<String, u64>) -> Repair {
    assert!(!labelset.is_empty(), "label set must not be empty");
    let normalized = raw.trim().to_lowercase();
    let distances: Vec<usize> = labelset
        .iter()
        .map(|label| levenshtein(&normalized, &label.to_lowercase()))
        .collect();
    let best = *distances.iter().min().expect("non-empty label set");
    let tied: Vec<usize> = (0..labelset.len()).filter(|&i| distances[i] == best).collect();
    let freq = |i: usize| train_freqs.get(&labelset[i]).copied().unwrap_or(0);
    // max_by_key keeps the last maximum; iterate reversed so the earliest
    // label wins equal frequencies.
    let winner = tied
        .iter()
        .rev()
        .copied()
        .max_by_key(|&i| freq(i))
        .expect("at least one tied label");
    Repair {
        label: labelset[winner].clone(),
        distance: best,
        tie_broken: tied.len() > 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::FaceActLabel;
    use proptest::prelude::*;

    fn table2_freqs() -> BTreeMap<String, u64> {
        [
            ("other", 4300),
            ("hpos+", 2844),
            ("spos+", 1589),
            ("hneg-", 1073),
            ("hpos-", 334),
            ("hneg+", 305),
            ("sneg+", 259),
            ("spos-", 12),
            ("sneg-", 0),
        ]
        .iter()
        .map(|(l, c)| (l.to_string(), *c))
        .collect()
    }

    /// Exhaustive recursion over the three edit operations.
    fn brute_levenshtein(a: &[char], b: &[char]) -> usize {
        match (a.split_first(), b.split_first()) {
            (None, _) => b.len(),
            (_, None) => a.len(),
            (Some((ha, ta)), Some((hb, tb))) => {
                let sub = brute_levenshtein(ta, tb) + usize::from(ha != hb);
                let del = brute_levenshtein(ta, b) + 1;
                let ins = brute_levenshtein(a, tb) + 1;
                sub.min(del).min(ins)
            }
        }
    }

    #[test]
    fn classic_distances() {
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("abc", ""), 3);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("flaw", "lawn"), 2);
        assert_eq!(levenshtein("héllo", "hello"), 1);
    }

    #[test]
    fn ambiguous_outputs_use_training_frequency() {
        let labels = FaceActLabel::label_strings();
        let freqs = table2_freqs();
        let sneg = repair_label("sneg", &labels, &freqs);
        assert_eq!(sneg, Repair { label: "sneg+".into(), distance: 1, tie_broken: true });
        let hpos = repair_label("hpos", &labels, &freqs);
        assert_eq!(hpos, Repair { label: "hpos+".into(), distance: 1, tie_broken: true });
    }

    #[test]
    fn exact_labels_repair_to_themselves() {
        let labels = FaceActLabel::label_strings();
        for label in &labels {
            let fix = repair_label(label, &labels, &table2_freqs());
            assert_eq!(&fix.label, label);
            assert_eq!(fix.distance, 0);
            assert!(!fix.tie_broken);
        }
    }

    #[test]
    fn equal_frequencies_fall_back_to_labelset_order() {
        let labels = vec!["ab".to_string(), "ac".to_string()];
        let fix = repair_label("a", &labels, &BTreeMap::new());
        assert_eq!(fix.label, "ab");
        assert!(fix.tie_broken);
        let reversed = vec!["ac".to_string(), "ab".to_string()];
        assert_eq!(repair_label("a", &reversed, &BTreeMap::new()).label, "ac");
    }

    #[test]
    fn empty_output_still_repairs() {
        let labels = FaceActLabel::label_strings();
        let fix = repair_label("", &labels, &table2_freqs());
        assert_eq!(fix.label, "other");
        assert_eq!(fix.distance, 5);
    }

    proptest! {
        #[test]
        fn matches_brute_force(a in "[a-e+-]{0,7}", b in "[a-e+-]{0,7}") {
            let ac: Vec<char> = a.chars().collect();
            let bc: Vec<char> = b.chars().collect();
            prop_assert_eq!(levenshtein(&a, &b), brute_levenshtein(&ac, &bc));
            prop_assert_eq!(levenshtein(&a, &b), levenshtein(&b, &a));
            prop_assert_eq!(levenshtein(&a, &a), 0);
        }

        #[test]
        fn case_insensitive(raw in "[a-zA-Z+-]{0,8}") {
            let labels = FaceActLabel::label_strings();
            let freqs = table2_freqs();
            prop_assert_eq!(
                repair_label(&raw.to_uppercase(), &labels, &freqs),
                repair_label(&raw.to_lowercase(), &labels, &freqs)
            );
        }
    }
}
