use std::collections::{BTreeMap, BTreeSet, HashMap};

use log::warn;
use serde::Serialize;

use super::{DeprivationTable, Domain};
use crate::area::AreaVector;
use crate::error::{Error, Result};
use crate::geo::{mean_of, AreaHierarchy};

#[derive(Debug, Clone)]
pub struct DiagnosticOptions {
    pub strong_domains: Vec<Domain>,
    pub weak_domains: Vec<Domain>,
    /// Fraction of the ranked population counted as the top (and bottom) band.
    pub percentile: f64,
    /// Size of the ranked population; defaults to the largest rank in the table.
    pub rank_universe: Option<u32>,
}

impl Default for DiagnosticOptions {
    fn default() -> Self {
        Self {
            strong_domains: Domain::default_strong(),
            weak_domains: Domain::default_weak(),
            percentile: 0.1,
            rank_universe: None,
        }
    }
}

/// Domain ranks of one false-negative LSOA. Rank 1 is the most deprived.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FnDomainRecord {
    pub lsoa: String,
    pub ranks: BTreeMap<Domain, u32>,
    /// Weakly correlated domains ranked inside the top band.
    pub weak_high: Vec<Domain>,
    /// Strongly correlated domains ranked inside the bottom band.
    pub strong_low: Vec<Domain>,
}

impl FnDomainRecord {
    pub fn weak_flag(&self) -> bool {
        !self.weak_high.is_empty()
    }

    pub fn strong_flag(&self) -> bool {
        !self.strong_low.is_empty()
    }
}

/// Rank profile of each false negative. A weak domain is flagged when its
/// rank falls in the top `percentile` band of the ranked population, a strong
/// domain when it falls in the bottom band.
pub fn fn_domain_diagnostics(
    fns: &BTreeSet<String>,
    table: &DeprivationTable,
    options: &DiagnosticOptions,
) -> Result<Vec<FnDomainRecord>> {
    if fns.is_empty() {
        return Ok(Vec::new());
    }
    let domains: BTreeSet<Domain> = options
        .strong_domains
        .iter()
        .chain(&options.weak_domains)
        .copied()
        .collect();
    for d in &domains {
        if table.domain_rank(*d).is_none() {
            return Err(Error::RanksMissing(d.name().into()));
        }
    }
    let universe = options
        .rank_universe
        .or_else(|| table.max_rank())
        .ok_or_else(|| Error::RanksMissing("all domains".into()))? as f64;
    let top_band = options.percentile * universe;
    let bottom_band = (1.0 - options.percentile) * universe;

    fns.iter()
        .map(|code| {
            let row = table
                .position(code)
                .ok_or_else(|| Error::UnknownArea(code.clone()))?;
            let ranks: BTreeMap<Domain, u32> = domains
                .iter()
                .map(|d| (*d, table.domain_rank(*d).unwrap()[row]))
                .collect();
            let weak_high = options
                .weak_domains
                .iter()
                .filter(|d| f64::from(ranks[*d]) <= top_band)
                .copied()
                .collect();
            let strong_low = options
                .strong_domains
                .iter()
                .filter(|d| f64::from(ranks[*d]) > bottom_band)
                .copied()
                .collect();
            Ok(FnDomainRecord {
                lsoa: code.clone(),
                ranks,
                weak_high,
                strong_low,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OaValue {
    pub oa: String,
    pub value: f64,
    pub above_threshold: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LsoaDrilldown {
    pub lsoa: String,
    /// Mean of the member values, as aggregation computes it.
    pub lsoa_value: f64,
    pub members: Vec<OaValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Drilldown {
    pub threshold: f64,
    pub lsoas: Vec<LsoaDrilldown>,
    pub member_count: usize,
    pub above_count: usize,
    pub below_count: usize,
}

/// Member-OA values of each false-negative LSOA against the threshold.
pub fn fn_oa_drilldown(
    fns: &BTreeSet<String>,
    oa_vector: &AreaVector,
    hierarchy: &AreaHierarchy,
    threshold: f64,
) -> Result<Drilldown> {
    let unmapped: Vec<String> = oa_vector
        .area_ids
        .iter()
        .filter(|id| hierarchy.lsoa_of(id).is_none())
        .cloned()
        .collect();
    if !unmapped.is_empty() {
        return Err(Error::UnmappedArea(unmapped));
    }
    let values: HashMap<&str, f64> = oa_vector.iter().collect();
    let members = hierarchy.members();

    let mut lsoas = Vec::with_capacity(fns.len());
    for code in fns {
        let oas = members
            .get(code.as_str())
            .ok_or_else(|| Error::UnmappedArea(vec![code.clone()]))?;
        let present: Vec<OaValue> = oas
            .iter()
            .filter_map(|oa| {
                values.get(oa).map(|&value| OaValue {
                    oa: oa.to_string(),
                    value,
                    above_threshold: value >= threshold,
                })
            })
            .collect();
        if present.is_empty() {
            return Err(Error::EmptyLsoa(code.clone()));
        }
        let lsoa_value = mean_of(present.iter().map(|m| m.value));
        if present.iter().all(|m| m.above_threshold) {
            warn!("every member OA of false negative {code} is above the threshold; check orientation and threshold");
        }
        lsoas.push(LsoaDrilldown {
            lsoa: code.clone(),
            lsoa_value,
            members: present,
        });
    }
    let member_count = lsoas.iter().map(|l| l.members.len()).sum();
    let above_count = lsoas
        .iter()
        .flat_map(|l| &l.members)
        .filter(|m| m.above_threshold)
        .count();
    Ok(Drilldown {
        threshold,
        lsoas,
        member_count,
        above_count,
        below_count: member_count - above_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::aggregate_vector;

    fn ranked_table(n: usize, row: usize, crime: u32, education: u32) -> DeprivationTable {
        let ids: Vec<String> = (0..n).map(|i| format!("L{i}")).collect();
        let scores = Domain::ALL.iter().map(|d| (*d, vec![1.0; n])).collect();
        let mut t = DeprivationTable::new(ids, vec![1.0; n], scores).unwrap();
        let median = (n as u32).div_ceil(2);
        for d in Domain::ALL {
            let mut ranks = vec![median; n];
            if d == Domain::Crime {
                ranks[row] = crime;
            } else if d == Domain::Education {
                ranks[row] = education;
            }
            ranks[n - 1] = n as u32;
            t = t.with_domain_ranks(d, ranks).unwrap();
        }
        t
    }

    #[test]
    fn weak_high_and_strong_low_flags() {
        let t = ranked_table(160, 0, 1, 152);
        let fns: BTreeSet<String> = ["L0".to_string()].into();
        let report = fn_domain_diagnostics(&fns, &t, &DiagnosticOptions::default()).unwrap();
        assert_eq!(report[0].weak_high, vec![Domain::Crime]);
        assert_eq!(report[0].strong_low, vec![Domain::Education]);
        assert_eq!(report[0].ranks[&Domain::Education], 152);
    }

    #[test]
    fn median_ranks_raise_nothing() {
        let t = ranked_table(160, 0, 80, 80);
        let fns: BTreeSet<String> = ["L0".to_string()].into();
        let report = fn_domain_diagnostics(&fns, &t, &DiagnosticOptions::default()).unwrap();
        assert!(!report[0].weak_flag() && !report[0].strong_flag());
    }

    #[test]
    fn empty_set_and_missing_ranks() {
        let t = ranked_table(10, 0, 1, 1);
        assert!(fn_domain_diagnostics(&BTreeSet::new(), &t, &Default::default()).unwrap().is_empty());
        let plain = crate::evaluation::table::example_table(4);
        let fns: BTreeSet<String> = ["L0".to_string()].into();
        assert!(matches!(
            fn_domain_diagnostics(&fns, &plain, &Default::default()),
            Err(Error::RanksMissing(_))
        ));
    }

    #[test]
    fn drilldown_totals_and_consistency() {
        let h = AreaHierarchy::from_pairs([
            ("O1", "L1"),
            ("O2", "L1"),
            ("O3", "L1"),
            ("O4", "L2"),
            ("O5", "L2"),
        ])
        .unwrap();
        let v = AreaVector::new(
            ["O1", "O2", "O3", "O4", "O5"].iter().map(|s| s.to_string()).collect(),
            vec![0.05, -0.01, 0.0, 0.3, 0.4],
        )
        .unwrap();
        let fns: BTreeSet<String> = ["L1".to_string()].into();
        let d = fn_oa_drilldown(&fns, &v, &h, 0.02).unwrap();
        assert_eq!((d.member_count, d.above_count, d.below_count), (3, 1, 2));
        let lsoa = aggregate_vector(&v, &h).unwrap();
        assert_eq!(d.lsoas[0].lsoa_value, lsoa.values[0]);
        assert!(fn_oa_drilldown(&BTreeSet::new(), &v, &h, 0.0).unwrap().lsoas.is_empty());
        let unknown: BTreeSet<String> = ["L9".to_string()].into();
        assert!(matches!(fn_oa_drilldown(&unknown, &v, &h, 0.0), Err(Error::UnmappedArea(_))));
    }
}
