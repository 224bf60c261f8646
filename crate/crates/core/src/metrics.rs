//! Selection accuracy against a known active set.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectionMetrics {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
    pub fpr: f64,
    pub fnr: f64,
    pub fdr: f64,
}

/// `num / den`, or 0 when `den` is 0.
fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Confusion counts and FPR/FNR/FDR for covariates `0..p`.
pub fn score_selection(selected: &[usize], true_active: &[usize], p: usize) -> Result<SelectionMetrics> {
    if let Some(&j) = selected.iter().chain(true_active).find(|&&j| j >= p) {
        return Err(Error::Dimension(format!("index {j} outside 0..{p}")));
    }
    let sel: BTreeSet<usize> = selected.iter().copied().collect();
    let truth: BTreeSet<usize> = true_active.iter().copied().collect();
    let tp = sel.intersection(&truth).count();
    let fp = sel.len() - tp;
    let fn_ = truth.len() - tp;
    let tn = p - truth.len() - fp;
    Ok(SelectionMetrics {
        tp,
        fp,
        tn,
        fn_,
        fpr: ratio(fp, fp + tn),
        fnr: ratio(fn_, fn_ + tp),
        fdr: ratio(fp, tp + fp),
    })
}

/// Replication averages of the rates, with summed counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AggregateMetrics {
    pub replications: usize,
    pub mean_fpr: f64,
    pub mean_fnr: f64,
    pub mean_fdr: f64,
    pub total_tp: usize,
    pub total_fp: usize,
    pub total_tn: usize,
    pub total_fn: usize,
}

pub fn aggregate(per_replication: &[SelectionMetrics]) -> Result<AggregateMetrics> {
    if per_replication.is_empty() {
        return Err(Error::EmptyInput);
    }
    let r = per_replication.len() as f64;
    let mean = |f: fn(&SelectionMetrics) -> f64| per_replication.iter().map(f).sum::<f64>() / r;
    let total = |f: fn(&SelectionMetrics) -> usize| per_replication.iter().map(f).sum::<usize>();
    Ok(AggregateMetrics {
        replications: per_replication.len(),
        mean_fpr: mean(|m| m.fpr),
        mean_fnr: mean(|m| m.fnr),
        mean_fdr: mean(|m| m.fdr),
        total_tp: total(|m| m.tp),
        total_fp: total(|m| m.fp),
        total_tn: total(|m| m.tn),
        total_fn: total(|m| m.fn_),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn worked_example() {
        let truth: Vec<usize> = (0..5).collect();
        let selected: Vec<usize> = (0..7).collect();
        let m = score_selection(&selected, &truth, 100).unwrap();
        assert_eq!((m.tp, m.fp, m.tn, m.fn_), (5, 2, 93, 0));
        assert_eq!(m.fdr, 2.0 / 7.0);
        assert_eq!(m.fpr, 2.0 / 95.0);
        assert_eq!(m.fnr, 0.0);
    }

    #[test]
    fn perfect_and_empty_selection() {
        let truth = [1, 4];
        let m = score_selection(&truth, &truth, 6).unwrap();
        assert_eq!((m.fpr, m.fnr, m.fdr), (0.0, 0.0, 0.0));
        let m = score_selection(&[], &truth, 6).unwrap();
        assert_eq!((m.fpr, m.fnr, m.fdr), (0.0, 1.0, 0.0));
        assert!(score_selection(&[6], &truth, 6).is_err());
    }

    #[test]
    fn aggregation() {
        let a = score_selection(&[0], &[0], 11).unwrap();
        let b = score_selection(&[0, 1], &[0], 11).unwrap();
        assert_eq!(aggregate(&[a]).unwrap().mean_fpr, a.fpr);
        let agg = aggregate(&[a, b]).unwrap();
        assert!((agg.mean_fpr - 0.05).abs() < 1e-15);
        assert_eq!(agg.total_fp, 1);
        assert!(matches!(aggregate(&[]), Err(Error::EmptyInput)));
    }

    fn subset(p: usize) -> impl Strategy<Value = Vec<usize>> {
        proptest::collection::btree_set(0..p, 0..p).prop_map(|s| s.into_iter().collect())
    }

    proptest! {
        #[test]
        fn rates_bounded_and_relabeling_invariant(
            sel in subset(20),
            truth in subset(20),
            shift in 0usize..20,
        ) {
            let m = score_selection(&sel, &truth, 20).unwrap();
            prop_assert_eq!(m.tp + m.fn_, truth.len());
            prop_assert_eq!(m.fp + m.tn, 20 - truth.len());
            for r in [m.fpr, m.fnr, m.fdr] {
                prop_assert!((0.0..=1.0).contains(&r));
            }
            let relabel = |v: &[usize]| v.iter().map(|j| (j * 3 + shift) % 20).collect::<Vec<_>>();
            let r = score_selection(&relabel(&sel), &relabel(&truth), 20).unwrap();
            prop_assert_eq!((m.fpr, m.fnr, m.fdr), (r.fpr, r.fnr, r.fdr));
        }
    }
}
