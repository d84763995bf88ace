//! OA → LSOA aggregation.
//!
//! Both OA-level eigenvector components and raw OA feature rows are mapped
//! onto LSOAs by an unweighted mean over member OAs.

use std::collections::{BTreeMap, HashMap, HashSet};

use log::warn;

use crate::area::AreaVector;
use crate::error::{Error, Result};
use crate::graph::FeatureMatrix;

/// Membership of fine areas (OAs) in coarse areas (LSOAs).
#[derive(Debug, Clone, PartialEq)]
pub struct AreaHierarchy {
    oa_to_lsoa: HashMap<String, String>,
    // OA codes in first-seen order, for deterministic iteration
    oa_ids: Vec<String>,
    lsoa_ids: Vec<String>,
}

impl AreaHierarchy {
    /// Builds a hierarchy from (OA, LSOA) pairs. Repeated consistent pairs
    /// are merged; an OA mapped to two LSOAs is an error. LSOAs are ordered
    /// by first appearance.
    pub fn from_pairs<I, A, B>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        let mut oa_to_lsoa: HashMap<String, String> = HashMap::new();
        let mut oa_ids = Vec::new();
        let mut lsoa_ids = Vec::new();
        let mut seen_lsoa = HashSet::new();
        for (oa, lsoa) in pairs {
            let (oa, lsoa) = (oa.into(), lsoa.into());
            match oa_to_lsoa.get(&oa) {
                Some(existing) if *existing == lsoa => continue,
                Some(existing) => {
                    return Err(Error::ConflictingMapping {
                        oa,
                        first: existing.clone(),
                        second: lsoa,
                    })
                }
                None => {}
            }
            if seen_lsoa.insert(lsoa.clone()) {
                lsoa_ids.push(lsoa.clone());
            }
            oa_ids.push(oa.clone());
            oa_to_lsoa.insert(oa, lsoa);
        }
        Ok(Self {
            oa_to_lsoa,
            oa_ids,
            lsoa_ids,
        })
    }

    /// Every area is its own parent.
    pub fn identity<S: AsRef<str>>(ids: &[S]) -> Self {
        Self::from_pairs(ids.iter().map(|s| (s.as_ref(), s.as_ref())))
            .expect("identity pairs are consistent")
    }

    pub fn lsoa_of(&self, oa: &str) -> Option<&str> {
        self.oa_to_lsoa.get(oa).map(String::as_str)
    }

    pub fn lsoa_ids(&self) -> &[String] {
        &self.lsoa_ids
    }

    pub fn oa_ids(&self) -> &[String] {
        &self.oa_ids
    }

    pub fn n_oas(&self) -> usize {
        self.oa_ids.len()
    }

    pub fn n_lsoas(&self) -> usize {
        self.lsoa_ids.len()
    }

    /// Member OAs of each LSOA, in hierarchy order.
    pub fn members(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut out: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for oa in &self.oa_ids {
            out.entry(self.oa_to_lsoa[oa].as_str()).or_default().push(oa);
        }
        out
    }

    pub fn members_of(&self, lsoa: &str) -> Vec<&str> {
        self.oa_ids
            .iter()
            .filter(|oa| self.oa_to_lsoa[*oa] == lsoa)
            .map(String::as_str)
            .collect()
    }
}

/// For every LSOA, the row indices of its members that are present in the
/// data, after checking that every data area is mapped.
fn group_rows(area_ids: &[String], hierarchy: &AreaHierarchy) -> Result<Vec<Vec<usize>>> {
    let unmapped: Vec<String> = area_ids
        .iter()
        .filter(|id| hierarchy.lsoa_of(id).is_none())
        .cloned()
        .collect();
    if !unmapped.is_empty() {
        return Err(Error::UnmappedArea(unmapped));
    }
    let slot: HashMap<&str, usize> = hierarchy
        .lsoa_ids
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let mut groups = vec![Vec::new(); hierarchy.n_lsoas()];
    for (row, id) in area_ids.iter().enumerate() {
        groups[slot[hierarchy.lsoa_of(id).unwrap()]].push(row);
    }
    let missing = hierarchy.n_oas() - area_ids.len();
    if missing > 0 {
        warn!("{missing} OA(s) in the hierarchy have no data and are ignored");
    }
    if let Some(empty) = groups.iter().position(Vec::is_empty) {
        return Err(Error::EmptyLsoa(hierarchy.lsoa_ids[empty].clone()));
    }
    Ok(groups)
}

pub(crate) fn mean_of(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let (mut lo, mut hi, mut sum, mut n) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
        sum += v;
        n += 1;
    }
    // rounding can push the quotient a hair outside the member range
    (sum / n as f64).clamp(lo, hi)
}

/// LSOA value = mean of the values of its member OAs.
pub fn aggregate_vector(oa_vector: &AreaVector, hierarchy: &AreaHierarchy) -> Result<AreaVector> {
    let groups = group_rows(&oa_vector.area_ids, hierarchy)?;
    let values = groups
        .iter()
        .map(|rows| mean_of(rows.iter().map(|&r| oa_vector.values[r])))
        .collect();
    AreaVector::new(hierarchy.lsoa_ids.clone(), values)
}

/// Raw OA feature rows averaged to LSOA rows. Standardize afterwards.
pub fn aggregate_features(oa_features: &FeatureMatrix, hierarchy: &AreaHierarchy) -> Result<FeatureMatrix> {
    if oa_features.is_standardized() {
        return Err(Error::AlreadyStandardized);
    }
    let groups = group_rows(oa_features.area_ids(), hierarchy)?;
    let n = oa_features.n_cols();
    let mut values = Vec::with_capacity(groups.len() * n);
    for rows in &groups {
        for j in 0..n {
            values.push(mean_of(rows.iter().map(|&r| oa_features.get(r, j))));
        }
    }
    FeatureMatrix::new(
        hierarchy.lsoa_ids.clone(),
        oa_features.column_names().to_vec(),
        values,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hierarchy() -> AreaHierarchy {
        AreaHierarchy::from_pairs([("O1", "L1"), ("O2", "L1"), ("O3", "L2")]).unwrap()
    }

    fn vector(pairs: &[(&str, f64)]) -> AreaVector {
        AreaVector::new(
            pairs.iter().map(|(a, _)| a.to_string()).collect(),
            pairs.iter().map(|(_, v)| *v).collect(),
        )
        .unwrap()
    }

    #[test]
    fn two_point_mean_and_singletons() {
        let out = aggregate_vector(&vector(&[("O1", 0.1), ("O2", 0.3), ("O3", -2.0)]), &hierarchy()).unwrap();
        assert_eq!(out.area_ids, vec!["L1", "L2"]);
        assert!((out.values[0] - 0.2).abs() < 1e-15);
        assert_eq!(out.values[1], -2.0);
    }

    #[test]
    fn constant_vector_stays_constant() {
        let out = aggregate_vector(&vector(&[("O1", 0.1), ("O2", 0.1), ("O3", 0.1)]), &hierarchy()).unwrap();
        assert_eq!(out.values, vec![0.1, 0.1]);
    }

    #[test]
    fn unmapped_and_empty() {
        let err = aggregate_vector(&vector(&[("O1", 1.0), ("O9", 1.0)]), &hierarchy()).unwrap_err();
        assert!(matches!(err, Error::UnmappedArea(ids) if ids == vec!["O9".to_string()]));
        let err = aggregate_vector(&vector(&[("O1", 1.0), ("O2", 1.0)]), &hierarchy()).unwrap_err();
        assert!(matches!(err, Error::EmptyLsoa(l) if l == "L2"));
    }

    #[test]
    fn features_columnwise_mean() {
        let h = AreaHierarchy::from_pairs([("O1", "L1"), ("O2", "L1")]).unwrap();
        let f = FeatureMatrix::from_rows(
            vec!["O1".into(), "O2".into()],
            vec!["a".into(), "b".into()],
            &[vec![1.0, 2.0], vec![3.0, 4.0]],
        )
        .unwrap();
        let out = aggregate_features(&f, &h).unwrap();
        assert_eq!(out.row(0), &[2.0, 3.0]);
        assert_eq!(out.column_names(), f.column_names());
    }

    #[test]
    fn identity_hierarchy_is_identity() {
        let ids = vec!["a".to_string(), "b".to_string(), "c".to_string()];
        let f = FeatureMatrix::from_rows(ids.clone(), vec!["x".into()], &[vec![1.5], vec![-2.0], vec![7.25]]).unwrap();
        let out = aggregate_features(&f, &AreaHierarchy::identity(&ids)).unwrap();
        assert_eq!(out, f);
    }

    #[test]
    fn standardized_features_rejected() {
        let f = FeatureMatrix::from_rows(vec!["O1".into()], vec!["x".into()], &[vec![1.0]])
            .unwrap()
            .mark_standardized();
        let h = AreaHierarchy::from_pairs([("O1", "L1")]).unwrap();
        assert!(matches!(aggregate_features(&f, &h), Err(Error::AlreadyStandardized)));
    }

    #[test]
    fn conflicting_and_duplicate_pairs() {
        let err = AreaHierarchy::from_pairs([("O1", "L1"), ("O1", "L2")]).unwrap_err();
        assert!(matches!(err, Error::ConflictingMapping { .. }));
        let h = AreaHierarchy::from_pairs([("O1", "L1"), ("O1", "L1")]).unwrap();
        assert_eq!(h.n_oas(), 1);
    }
}
