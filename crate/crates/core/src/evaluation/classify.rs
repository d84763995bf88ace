use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::area::AreaVector;
use crate::error::{Error, Result};

/// Codes whose component is at or above `threshold`.
pub fn classify_deprived(v: &AreaVector, threshold: f64) -> BTreeSet<String> {
    v.iter()
        .filter(|&(_, x)| x >= threshold)
        .map(|(id, _)| id.to_string())
        .collect()
}

/// The largest threshold that classifies at least `count` areas, i.e. the
/// `count`-th largest component.
pub fn threshold_for_count(v: &AreaVector, count: usize) -> Result<f64> {
    if count == 0 || count > v.len() {
        return Err(Error::Config(format!(
            "target count {count} outside 1..={}",
            v.len()
        )));
    }
    let mut sorted = v.values.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    Ok(sorted[count - 1])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub true_positive: usize,
    pub false_negative: usize,
    pub false_positive: usize,
    pub true_negative: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.true_positive + self.false_negative + self.false_positive + self.true_negative
    }
}

/// 2×2 counts of `predicted` against `ground_truth` within `universe`.
pub fn confusion(
    predicted: &BTreeSet<String>,
    ground_truth: &BTreeSet<String>,
    universe: &BTreeSet<String>,
) -> Result<Confusion> {
    if let Some(c) = predicted.iter().chain(ground_truth).find(|c| !universe.contains(*c)) {
        return Err(Error::CodeOutsideUniverse(c.clone()));
    }
    let tp = predicted.intersection(ground_truth).count();
    let fp = predicted.len() - tp;
    let fn_ = ground_truth.len() - tp;
    Ok(Confusion {
        true_positive: tp,
        false_negative: fn_,
        false_positive: fp,
        true_negative: universe.len() - tp - fp - fn_,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(codes: &[&str]) -> BTreeSet<String> {
        codes.iter().map(|s| s.to_string()).collect()
    }

    fn vector() -> AreaVector {
        AreaVector::new(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            vec![0.01, 0.03, 0.02365, -0.2],
        )
        .unwrap()
    }

    #[test]
    fn threshold_extremes_and_inclusivity() {
        let v = vector();
        assert_eq!(classify_deprived(&v, f64::NEG_INFINITY).len(), 4);
        assert!(classify_deprived(&v, 0.5).is_empty());
        assert_eq!(classify_deprived(&v, 0.02365), set(&["b", "c"]));
    }

    #[test]
    fn threshold_from_count() {
        let v = vector();
        let t = threshold_for_count(&v, 2).unwrap();
        assert_eq!(t, 0.02365);
        assert_eq!(classify_deprived(&v, t).len(), 2);
        assert!(threshold_for_count(&v, 0).is_err());
    }

    #[test]
    fn confusion_counts() {
        let u = set(&["a", "b", "c", "d"]);
        let truth = set(&["a", "b"]);
        let c = confusion(&truth, &truth, &u).unwrap();
        assert_eq!((c.false_negative, c.false_positive), (0, 0));
        let c = confusion(&set(&[]), &truth, &u).unwrap();
        assert_eq!((c.true_positive, c.false_negative, c.true_negative), (0, 2, 2));
        assert!(matches!(
            confusion(&set(&["z"]), &truth, &u),
            Err(Error::CodeOutsideUniverse(z)) if z == "z"
        ));
    }

    #[test]
    fn fifty_two_missed() {
        let codes: Vec<String> = (0..300).map(|i| format!("E{i:05}")).collect();
        let universe: BTreeSet<String> = codes.iter().cloned().collect();
        let truth: BTreeSet<String> = codes[..52].iter().cloned().collect();
        let c = confusion(&BTreeSet::new(), &truth, &universe).unwrap();
        assert_eq!((c.true_positive, c.false_negative), (0, 52));
        assert_eq!(c.total(), 300);
    }
}
