use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::area::AreaVector;
use crate::error::{Error, Result};

/// The seven deprivation domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Domain {
    Income,
    Employment,
    Health,
    Education,
    Barriers,
    Crime,
    LivingEnvironment,
}

impl Domain {
    pub const ALL: [Domain; 7] = [
        Domain::Income,
        Domain::Employment,
        Domain::Health,
        Domain::Education,
        Domain::Barriers,
        Domain::Crime,
        Domain::LivingEnvironment,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Domain::Income => "Income",
            Domain::Employment => "Employment",
            Domain::Health => "Health",
            Domain::Education => "Education",
            Domain::Barriers => "Barriers",
            Domain::Crime => "Crime",
            Domain::LivingEnvironment => "LivingEnvironment",
        }
    }

    /// Score column name in the deprivation CSV.
    pub fn column(self) -> &'static str {
        match self {
            Domain::Income => "income",
            Domain::Employment => "employment",
            Domain::Health => "health",
            Domain::Education => "education",
            Domain::Barriers => "barriers",
            Domain::Crime => "crime",
            Domain::LivingEnvironment => "living_env",
        }
    }

    /// Published weight in the combined index.
    pub fn default_weight(self) -> f64 {
        match self {
            Domain::Income | Domain::Employment => 0.225,
            Domain::Health | Domain::Education => 0.135,
            Domain::Barriers | Domain::Crime | Domain::LivingEnvironment => 0.093,
        }
    }

    /// Domains that track the combined index closely.
    pub fn default_strong() -> Vec<Domain> {
        vec![Domain::Income, Domain::Employment, Domain::Health, Domain::Education]
    }

    pub fn default_weak() -> Vec<Domain> {
        vec![Domain::Barriers, Domain::Crime, Domain::LivingEnvironment]
    }

    pub fn parse(s: &str) -> Option<Domain> {
        let key = s.trim().to_ascii_lowercase().replace(['_', ' '], "");
        Domain::ALL.into_iter().find(|d| {
            d.name().to_ascii_lowercase() == key || d.column().replace('_', "") == key
        })
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Deprivation scores (and optionally ranks) per LSOA.
#[derive(Debug, Clone, PartialEq)]
pub struct DeprivationTable {
    lsoa_ids: Vec<String>,
    index: HashMap<String, usize>,
    imd_score: Vec<f64>,
    imd_rank: Option<Vec<u32>>,
    domain_scores: BTreeMap<Domain, Vec<f64>>,
    domain_ranks: BTreeMap<Domain, Vec<u32>>,
}

impl DeprivationTable {
    pub fn new(
        lsoa_ids: Vec<String>,
        imd_score: Vec<f64>,
        domain_scores: BTreeMap<Domain, Vec<f64>>,
    ) -> Result<Self> {
        let n = lsoa_ids.len();
        let mut index = HashMap::with_capacity(n);
        for (i, id) in lsoa_ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateAreaId(id.clone()));
            }
        }
        check_len(n, imd_score.len())?;
        for d in Domain::ALL {
            let scores = domain_scores
                .get(&d)
                .ok_or_else(|| Error::MissingDomain(d.name().into()))?;
            check_len(n, scores.len())?;
        }
        Ok(Self {
            lsoa_ids,
            index,
            imd_score,
            imd_rank: None,
            domain_scores,
            domain_ranks: BTreeMap::new(),
        })
    }

    pub fn with_imd_rank(mut self, ranks: Vec<u32>) -> Result<Self> {
        check_ranks(self.len(), &ranks)?;
        self.imd_rank = Some(ranks);
        Ok(self)
    }

    pub fn with_domain_ranks(mut self, domain: Domain, ranks: Vec<u32>) -> Result<Self> {
        check_ranks(self.len(), &ranks)?;
        self.domain_ranks.insert(domain, ranks);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.lsoa_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lsoa_ids.is_empty()
    }

    pub fn lsoa_ids(&self) -> &[String] {
        &self.lsoa_ids
    }

    pub fn position(&self, lsoa: &str) -> Option<usize> {
        self.index.get(lsoa).copied()
    }

    pub fn imd_score(&self) -> &[f64] {
        &self.imd_score
    }

    pub fn imd_rank(&self) -> Option<&[u32]> {
        self.imd_rank.as_deref()
    }

    pub fn domain_score(&self, domain: Domain) -> &[f64] {
        &self.domain_scores[&domain]
    }

    pub fn domain_rank(&self, domain: Domain) -> Option<&[u32]> {
        self.domain_ranks.get(&domain).map(Vec::as_slice)
    }

    pub fn has_ranks(&self) -> bool {
        !self.domain_ranks.is_empty()
    }

    /// Largest rank anywhere in the table, a stand-in for the size of the
    /// ranked population when none is configured.
    pub fn max_rank(&self) -> Option<u32> {
        self.domain_ranks
            .values()
            .chain(self.imd_rank.iter())
            .flat_map(|r| r.iter().copied())
            .max()
    }

    /// Values of `v` reordered to this table's LSOA order. Every table LSOA
    /// must be present in `v`.
    pub fn align(&self, v: &AreaVector) -> Result<Vec<f64>> {
        let lookup: HashMap<&str, f64> = v.iter().collect();
        self.lsoa_ids
            .iter()
            .map(|id| {
                lookup
                    .get(id.as_str())
                    .copied()
                    .ok_or_else(|| Error::UnknownArea(id.clone()))
            })
            .collect()
    }

    /// Sub-table holding exactly `ids`, in that order.
    pub fn restrict_to<S: AsRef<str>>(&self, ids: &[S]) -> Result<Self> {
        let rows: Vec<usize> = ids
            .iter()
            .map(|id| {
                self.position(id.as_ref())
                    .ok_or_else(|| Error::UnknownArea(id.as_ref().to_string()))
            })
            .collect::<Result<_>>()?;
        let pick_f = |v: &[f64]| rows.iter().map(|&r| v[r]).collect::<Vec<_>>();
        let pick_u = |v: &[u32]| rows.iter().map(|&r| v[r]).collect::<Vec<_>>();
        let mut out = Self::new(
            ids.iter().map(|s| s.as_ref().to_string()).collect(),
            pick_f(&self.imd_score),
            self.domain_scores.iter().map(|(d, v)| (*d, pick_f(v))).collect(),
        )?;
        out.imd_rank = self.imd_rank.as_deref().map(pick_u);
        out.domain_ranks = self.domain_ranks.iter().map(|(d, v)| (*d, pick_u(v))).collect();
        Ok(out)
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::LengthMismatch {
            left: expected,
            right: got,
        });
    }
    Ok(())
}

fn check_ranks(n: usize, ranks: &[u32]) -> Result<()> {
    check_len(n, ranks.len())?;
    if ranks.contains(&0) {
        return Err(Error::Shape("ranks must be positive".into()));
    }
    Ok(())
}

#[cfg(test)]
pub(crate) fn example_table(n: usize) -> DeprivationTable {
    let ids = (0..n).map(|i| format!("L{i}")).collect();
    let imd: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let domains = Domain::ALL
        .iter()
        .enumerate()
        .map(|(k, d)| (*d, (0..n).map(|i| ((i * (k + 3)) % 7) as f64 + i as f64).collect()))
        .collect();
    DeprivationTable::new(ids, imd, domains).unwrap()
}
