use std::collections::BTreeMap;

use crate::walker::{l1_distance, l2_distance};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Comparison {
    pub l1: f64,
    pub l2: f64,
    pub rank_agreement: bool,
}

/// Distances over the union of supports, plus whether both rankings agree
/// with exact ties broken by key.
pub fn compare_rankings(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> Comparison {
    compare_rankings_with(a, b, 0.0)
}

/// As [`compare_rankings`], but values within `tie_tol` of their neighbour
/// in the descending order count as tied.
pub fn compare_rankings_with(
    a: &BTreeMap<String, f64>,
    b: &BTreeMap<String, f64>,
    tie_tol: f64,
) -> Comparison {
    Comparison {
        l1: l1_distance(a, b),
        l2: l2_distance(a, b),
        rank_agreement: ranking(a, b, tie_tol) == ranking(b, a, tie_tol),
    }
}

/// Keys of `d` (padded with zeros for keys only in `other`) in descending
/// order, as groups of near-equal values.
pub fn ranking(
    d: &BTreeMap<String, f64>,
    other: &BTreeMap<String, f64>,
    tie_tol: f64,
) -> Vec<Vec<String>> {
    let mut items: Vec<(&String, f64)> = d.iter().map(|(k, v)| (k, *v)).collect();
    items.extend(
        other
            .keys()
            .filter(|k| !d.contains_key(*k))
            .map(|k| (k, 0.0)),
    );
    items.sort_by(|x, y| y.1.total_cmp(&x.1).then_with(|| x.0.cmp(y.0)));
    let mut groups: Vec<Vec<String>> = Vec::new();
    let mut last = f64::INFINITY;
    for (k, v) in items {
        match groups.last_mut() {
            Some(g) if last - v <= tie_tol => g.push(k.clone()),
            _ => groups.push(vec![k.clone()]),
        }
        last = v;
    }
    for g in &mut groups {
        g.sort();
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn identical() {
        let a = d(&[("a", 0.6), ("b", 0.4)]);
        let c = compare_rankings(&a, &a);
        assert_eq!((c.l1, c.l2, c.rank_agreement), (0.0, 0.0, true));
    }

    #[test]
    fn disjoint() {
        let c = compare_rankings(&d(&[("a", 1.0)]), &d(&[("b", 1.0)]));
        assert_eq!(c.l1, 2.0);
        assert!(!c.rank_agreement);
    }

    #[test]
    fn exact_ties_break_by_key() {
        let a = d(&[("b", 0.5), ("a", 0.5)]);
        let b = d(&[("a", 0.5), ("b", 0.5)]);
        assert!(compare_rankings(&a, &b).rank_agreement);
        let noisy = d(&[("a", 0.49), ("b", 0.51)]);
        assert!(!compare_rankings(&a, &noisy).rank_agreement);
        assert!(compare_rankings_with(&a, &noisy, 0.03).rank_agreement);
    }

    #[test]
    fn order_differences_are_detected() {
        let a = d(&[("a", 0.7), ("b", 0.2), ("c", 0.1)]);
        let b = d(&[("a", 0.2), ("b", 0.7), ("c", 0.1)]);
        assert!(!compare_rankings_with(&a, &b, 0.01).rank_agreement);
    }
}
