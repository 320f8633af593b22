use std::collections::BTreeSet;

use super::{Result, RetrievalError};

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(RetrievalError::InvalidK);
    }
    Ok(())
}

/// Relevant hits in the top `k`, divided by `k`.
pub fn precision_at_k(ranked: &[&str], relevant: &BTreeSet<String>, k: usize) -> Result<f64> {
    check_k(k)?;
    let hits = ranked.iter().take(k).filter(|d| relevant.contains(**d)).count();
    Ok(hits as f64 / k as f64)
}

/// Relevant hits in the top `k`, divided by the number of relevant documents.
pub fn recall_at_k(ranked: &[&str], relevant: &BTreeSet<String>, k: usize) -> Result<f64> {
    check_k(k)?;
    if relevant.is_empty() {
        return Ok(0.0);
    }
    let hits = ranked.iter().take(k).filter(|d| relevant.contains(**d)).count();
    Ok(hits as f64 / relevant.len() as f64)
}

/// Reciprocal rank of the first relevant document, 0 if none.
pub fn mrr(ranked: &[&str], relevant: &BTreeSet<String>) -> f64 {
    ranked
        .iter()
        .position(|d| relevant.contains(*d))
        .map_or(0.0, |i| 1.0 / (i + 1) as f64)
}

/// Binary-gain NDCG with a `log2(rank + 1)` discount.
pub fn ndcg_at_k(ranked: &[&str], relevant: &BTreeSet<String>, k: usize) -> Result<f64> {
    check_k(k)?;
    let discount = |i: usize| 1.0 / ((i + 2) as f64).log2();
    let dcg: f64 = ranked
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, d)| relevant.contains(**d))
        .map(|(i, _)| discount(i))
        .sum();
    let ideal: f64 = (0..relevant.len().min(k)).map(discount).sum();
    Ok(if ideal == 0.0 { 0.0 } else { dcg / ideal })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(ids: &[&str]) -> BTreeSet<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn basics() {
        let r = ["a", "b", "c"];
        let all = rel(&["a", "b", "c"]);
        assert_eq!(precision_at_k(&r, &all, 3).unwrap(), 1.0);
        assert_eq!(ndcg_at_k(&r, &all, 3).unwrap(), 1.0);
        assert_eq!(mrr(&["x", "y", "z", "a"], &all), 0.25);
        assert_eq!(recall_at_k(&r, &rel(&["a", "q"]), 5).unwrap(), 0.5);
        assert!(matches!(precision_at_k(&r, &all, 0), Err(RetrievalError::InvalidK)));
        // one relevant doc at rank 2: 1/log2(3)
        let n = ndcg_at_k(&["x", "a"], &rel(&["a"]), 5).unwrap();
        assert!((n - 1.0 / 3f64.log2()).abs() < 1e-12);
    }
}
