//! Friedman rank sum test with tie correction, and Kendall's W.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::chi2::chi2_sf;
use crate::error::{Error, Result};

/// Significance levels marked in comparison tables.
pub const DEFAULT_ALPHA_LEVELS: [f64; 2] = [0.05, 0.10];

/// `n` blocks (rows) by `k` treatments (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockMatrix {
    values: Vec<Vec<f64>>,
}

impl BlockMatrix {
    pub fn new(values: Vec<Vec<f64>>) -> Result<Self> {
        let blocks = values.len();
        let treatments = values.first().map_or(0, Vec::len);
        if blocks < 2 || treatments < 2 {
            return Err(Error::DegenerateDesign { blocks, treatments });
        }
        if values.iter().any(|row| row.len() != treatments) {
            return Err(Error::InvalidArgument("blocks have different numbers of treatments".into()));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("block matrix has a non-finite cell".into()));
        }
        Ok(BlockMatrix { values })
    }

    pub fn blocks(&self) -> usize {
        self.values.len()
    }

    pub fn treatments(&self) -> usize {
        self.values[0].len()
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }
}

/// Ascending ranks, 1-based, with tied values sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start..end hold ranks start+1 ..= end.
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// `Σ (t³ - t)` over groups of tied values.
fn tie_term(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut total = 0.0;
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start + 1;
        while end < sorted.len() && sorted[end] == sorted[start] {
            end += 1;
        }
        let t = (end - start) as f64;
        total += t * t * t - t;
        start = end;
    }
    total
}

/// Cohen-style reading of Kendall's W.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EffectSize {
    Negligible,
    Small,
    Moderate,
    Large,
}

impl EffectSize {
    pub fn from_w(w: f64) -> Self {
        if w > 0.5 {
            EffectSize::Large
        } else if w >= 0.3 {
            EffectSize::Moderate
        } else if w >= 0.1 {
            EffectSize::Small
        } else {
            EffectSize::Negligible
        }
    }
}

impl fmt::Display for EffectSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EffectSize::Negligible => "negligible",
            EffectSize::Small => "small",
            EffectSize::Moderate => "moderate",
            EffectSize::Large => "large",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Significance {
    pub alpha: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriedmanResult {
    pub n: usize,
    pub k: usize,
    /// Tie-corrected statistic.
    pub q: f64,
    pub df: u32,
    pub p: f64,
    /// Mean within-block rank per treatment (1 = smallest value).
    pub mean_ranks: Vec<f64>,
    pub w: f64,
    pub interpretation: EffectSize,
    pub significance: Vec<Significance>,
}

impl FriedmanResult {
    /// `"++"` if significant at the strictest level <= 0.05, `"+"` if only at
    /// a level <= 0.10, else empty.
    pub fn marker(&self) -> &'static str {
        significance_marker(self.p, &self.significance.iter().map(|s| s.alpha).collect::<Vec<_>>())
    }
}

/// Table marker for a p-value given the configured alpha levels: two marks
/// for the smallest level, one for any other level that is met.
pub fn significance_marker(p: f64, alpha_levels: &[f64]) -> &'static str {
    let mut levels = alpha_levels.to_vec();
    levels.sort_by(f64::total_cmp);
    match levels.iter().position(|&alpha| p < alpha) {
        Some(0) => "++",
        Some(_) => "+",
        None => "",
    }
}

/// Uncorrected statistic from per-treatment rank sums.
fn statistic_from_rank_sums(rank_sums: &[f64], n: usize) -> f64 {
    let n = n as f64;
    let k = rank_sums.len() as f64;
    12.0 / (n * k * (k + 1.0)) * rank_sums.iter().map(|r| r * r).sum::<f64>() - 3.0 * n * (k + 1.0)
}

struct Ranked {
    ranks: Vec<Vec<f64>>,
    correction: f64,
}

fn rank_blocks(m: &BlockMatrix) -> Ranked {
    let n = m.blocks() as f64;
    let k = m.treatments() as f64;
    let ties: f64 = m.values().iter().map(|row| tie_term(row)).sum();
    Ranked {
        ranks: m.values().iter().map(|row| average_ranks(row)).collect(),
        correction: 1.0 - ties / (n * k * (k * k - 1.0)),
    }
}

fn rank_sums(ranks: &[Vec<f64>]) -> Vec<f64> {
    let k = ranks[0].len();
    (0..k).map(|j| ranks.iter().map(|row| row[j]).sum()).collect()
}

/// Friedman test on `m` with significance flags for `alpha_levels`.
pub fn friedman(m: &BlockMatrix, alpha_levels: &[f64]) -> Result<FriedmanResult> {
    let n = m.blocks();
    let k = m.treatments();
    let ranked = rank_blocks(m);
    let sums = rank_sums(&ranked.ranks);
    // A correction of zero means every block is fully tied.
    let q = if ranked.correction <= 1e-12 {
        0.0
    } else {
        (statistic_from_rank_sums(&sums, n) / ranked.correction).max(0.0)
    };
    let df = (k - 1) as u32;
    let p = chi2_sf(q, df)?;
    let mut result = FriedmanResult {
        n,
        k,
        q,
        df,
        p,
        mean_ranks: sums.iter().map(|s| s / n as f64).collect(),
        w: 0.0,
        interpretation: EffectSize::Negligible,
        significance: alpha_levels
            .iter()
            .map(|&alpha| Significance {
                alpha,
                significant: p < alpha,
            })
            .collect(),
    };
    let (w, interpretation) = kendalls_w(&result, n, k);
    result.w = w;
    result.interpretation = interpretation;
    Ok(result)
}

/// `W = Q / (n (k - 1))`, clamped to `[0, 1]`, with its effect-size band.
pub fn kendalls_w(result: &FriedmanResult, n: usize, k: usize) -> (f64, EffectSize) {
    let w = (result.q / (n as f64 * (k as f64 - 1.0))).clamp(0.0, 1.0);
    (w, EffectSize::from_w(w))
}

/// Largest number of arrangements [`exact_p_value`] will enumerate.
pub const EXACT_LIMIT: u64 = 5_000_000;

fn permutations(row: &[f64]) -> Vec<Vec<f64>> {
    if row.len() <= 1 {
        return vec![row.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..row.len() {
        let mut rest = row.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Exact permutation p-value: the share of all within-block rearrangements
/// whose statistic reaches the observed one. Only for small designs.
pub fn exact_p_value(m: &BlockMatrix) -> Result<f64> {
    let n = m.blocks();
    let k = m.treatments();
    let per_block: u64 = (1..=k as u64).product();
    let total = (0..n).try_fold(1u64, |acc, _| acc.checked_mul(per_block));
    match total {
        Some(t) if t <= EXACT_LIMIT => {}
        _ => {
            return Err(Error::InvalidArgument(format!(
                "{k}!^{n} arrangements exceed the exact enumeration limit"
            )))
        }
    }
    let ranked = rank_blocks(m);
    let observed = statistic_from_rank_sums(&rank_sums(&ranked.ranks), n);
    let options: Vec<Vec<Vec<f64>>> = ranked.ranks.iter().map(|r| permutations(r)).collect();

    fn walk(options: &[Vec<Vec<f64>>], depth: usize, sums: &mut [f64], n: usize, observed: f64, hits: &mut u64, all: &mut u64) {
        if depth == options.len() {
            *all += 1;
            if statistic_from_rank_sums(sums, n) >= observed - 1e-9 {
                *hits += 1;
            }
            return;
        }
        for perm in &options[depth] {
            for (s, r) in sums.iter_mut().zip(perm) {
                *s += r;
            }
            walk(options, depth + 1, sums, n, observed, hits, all);
            for (s, r) in sums.iter_mut().zip(perm) {
                *s -= r;
            }
        }
    }

    let mut sums = vec![0.0; k];
    let (mut hits, mut all) = (0u64, 0u64);
    walk(&options, 0, &mut sums, n, observed, &mut hits, &mut all);
    Ok(hits as f64 / all as f64)
}
