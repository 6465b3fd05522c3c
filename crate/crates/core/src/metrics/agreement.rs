//! Chance-corrected agreement between raters (here: detectors).

use std::collections::BTreeMap;

use super::MetricsError;

/// Cohen's κ between two raters over the same items.
///
/// When chance agreement is 1 (both raters constant on one category) κ is
/// defined as 1.
pub fn cohens_kappa<T: Ord>(rater_a: &[T], rater_b: &[T]) -> Result<f64, MetricsError> {
    if rater_a.len() != rater_b.len() {
        return Err(MetricsError::LengthMismatch {
            left: rater_a.len(),
            right: rater_b.len(),
        });
    }
    if rater_a.is_empty() {
        return Err(MetricsError::Empty);
    }
    let n = rater_a.len() as f64;
    let mut agree = 0usize;
    let mut marg: BTreeMap<&T, (usize, usize)> = BTreeMap::new();
    for (a, b) in rater_a.iter().zip(rater_b) {
        if a == b {
            agree += 1;
        }
        marg.entry(a).or_default().0 += 1;
        marg.entry(b).or_default().1 += 1;
    }
    let p_o = agree as f64 / n;
    let p_e: f64 = marg.values().map(|&(ca, cb)| (ca as f64 / n) * (cb as f64 / n)).sum();
    if p_e >= 1.0 {
        return Ok(1.0);
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

/// Fleiss' κ from an items × categories table of rating counts. Every row
/// must sum to the same number of raters n ≥ 2.
pub fn fleiss_kappa(table: &[Vec<u64>]) -> Result<f64, MetricsError> {
    let first = table.first().ok_or(MetricsError::Empty)?;
    let n: u64 = first.iter().sum();
    if n < 2 {
        return Err(MetricsError::TooFewRaters(n));
    }
    let cats = first.len();
    for (item, row) in table.iter().enumerate() {
        let found: u64 = row.iter().sum();
        if row.len() != cats || found != n {
            return Err(MetricsError::RaggedTable {
                item,
                expected: n,
                found,
            });
        }
    }
    let items = table.len() as f64;
    let nf = n as f64;
    let p_bar = table
        .iter()
        .map(|row| {
            let sq: u64 = row.iter().map(|c| c * c).sum();
            (sq - n) as f64 / (nf * (nf - 1.0))
        })
        .sum::<f64>()
        / items;
    let p_e: f64 = (0..cats)
        .map(|j| {
            let pj = table.iter().map(|r| r[j]).sum::<u64>() as f64 / (items * nf);
            pj * pj
        })
        .sum();
    if p_e >= 1.0 {
        return Ok(1.0);
    }
    Ok((p_bar - p_e) / (1.0 - p_e))
}

/// Builds a Fleiss count table from per-item rating lists. Categories are
/// the sorted set of observed values.
pub fn category_counts<T: Ord + Clone>(ratings: &[Vec<T>]) -> (Vec<T>, Vec<Vec<u64>>) {
    let mut cats: Vec<T> = ratings.iter().flatten().cloned().collect();
    cats.sort();
    cats.dedup();
    let table = ratings
        .iter()
        .map(|item| {
            let mut row = vec![0u64; cats.len()];
            for r in item {
                row[cats.binary_search(r).expect("category present")] += 1;
            }
            row
        })
        .collect();
    (cats, table)
}
