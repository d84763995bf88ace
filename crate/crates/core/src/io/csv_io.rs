use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::Write;
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evaluation::{DeprivationTable, Domain, FnDomainRecord};
use crate::geo::AreaHierarchy;
use crate::graph::FeatureMatrix;

fn open(path: &Path) -> Result<(csv::Reader<std::fs::File>, StringRecord)> {
    let mut reader = ReaderBuilder::new()
        .trim(Trim::All)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    Ok((reader, headers))
}

fn column(headers: &StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h == name)
}

fn line_of(record: &StringRecord) -> usize {
    record.position().map_or(0, |p| p.line() as usize)
}

fn parse_number(path: &Path, record: &StringRecord, headers: &StringRecord, col: usize) -> Result<f64> {
    let cell = record.get(col).unwrap_or("");
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::NonNumericCell {
            path: path.to_path_buf(),
            row: line_of(record),
            column: headers.get(col).unwrap_or("").to_string(),
            value: cell.to_string(),
        }),
    }
}

/// Area × variable table: one id column, every other column numeric. Empty
/// cells are errors.
pub fn load_features(path: impl AsRef<Path>, id_column: &str) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let (mut reader, headers) = open(path)?;
    let id_col = column(&headers, id_column).ok_or_else(|| Error::MissingIdColumn {
        path: path.to_path_buf(),
        column: id_column.to_string(),
    })?;
    let value_cols: Vec<usize> = (0..headers.len()).filter(|&c| c != id_col).collect();
    let mut ids = Vec::new();
    let mut seen = HashSet::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let id = record.get(id_col).unwrap_or("").to_string();
        if id.is_empty() {
            return Err(Error::MalformedRow {
                path: path.to_path_buf(),
                row: line_of(&record),
                reason: "empty area code".into(),
            });
        }
        if !seen.insert(id.clone()) {
            return Err(Error::DuplicateAreaId(id));
        }
        for &c in &value_cols {
            values.push(parse_number(path, &record, &headers, c)?);
        }
        ids.push(id);
    }
    let names = value_cols.iter().map(|&c| headers[c].to_string()).collect();
    FeatureMatrix::new(ids, names, values)
}

/// `oa_code,lsoa_code` lookup.
pub fn load_hierarchy(path: impl AsRef<Path>) -> Result<AreaHierarchy> {
    let path = path.as_ref();
    let (mut reader, headers) = open(path)?;
    let find = |name: &str| {
        column(&headers, name).ok_or_else(|| Error::MissingIdColumn {
            path: path.to_path_buf(),
            column: name.to_string(),
        })
    };
    let (oa_col, lsoa_col) = (find("oa_code")?, find("lsoa_code")?);
    let mut pairs = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let oa = record.get(oa_col).unwrap_or("");
        let lsoa = record.get(lsoa_col).unwrap_or("");
        if oa.is_empty() || lsoa.is_empty() {
            return Err(Error::MalformedRow {
                path: path.to_path_buf(),
                row: line_of(&record),
                reason: "empty oa_code or lsoa_code".into(),
            });
        }
        pairs.push((oa.to_string(), lsoa.to_string()));
    }
    AreaHierarchy::from_pairs(pairs)
}

fn parse_rank(path: &Path, record: &StringRecord, headers: &StringRecord, col: usize) -> Result<u32> {
    let cell = record.get(col).unwrap_or("");
    match cell.parse::<u32>() {
        Ok(r) if r >= 1 => Ok(r),
        _ => Err(Error::MalformedRow {
            path: path.to_path_buf(),
            row: line_of(record),
            reason: format!("`{}` is not a positive rank in column `{}`", cell, &headers[col]),
        }),
    }
}

/// Deprivation scores keyed by `lsoa_code`, with optional `imd_rank` and
/// `<domain>_rank` columns.
pub fn load_deprivation(path: impl AsRef<Path>) -> Result<DeprivationTable> {
    let path = path.as_ref();
    let (mut reader, headers) = open(path)?;
    let id_col = column(&headers, "lsoa_code").ok_or_else(|| Error::MissingIdColumn {
        path: path.to_path_buf(),
        column: "lsoa_code".into(),
    })?;
    let imd_col = column(&headers, "imd_score").ok_or_else(|| Error::MissingDomainColumn {
        path: path.to_path_buf(),
        domain: "IMD".into(),
        column: "imd_score".into(),
    })?;
    let mut domain_cols = Vec::with_capacity(7);
    for d in Domain::ALL {
        let c = column(&headers, d.column()).ok_or_else(|| Error::MissingDomainColumn {
            path: path.to_path_buf(),
            domain: d.name().into(),
            column: d.column().into(),
        })?;
        domain_cols.push((d, c, column(&headers, &format!("{}_rank", d.column()))));
    }
    let imd_rank_col = column(&headers, "imd_rank");

    let mut ids = Vec::new();
    let mut imd = Vec::new();
    let mut imd_rank = Vec::new();
    let mut scores: BTreeMap<Domain, Vec<f64>> = BTreeMap::new();
    let mut ranks: BTreeMap<Domain, Vec<u32>> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let id = record.get(id_col).unwrap_or("");
        if id.is_empty() {
            return Err(Error::MalformedRow {
                path: path.to_path_buf(),
                row: line_of(&record),
                reason: "empty lsoa_code".into(),
            });
        }
        ids.push(id.to_string());
        imd.push(parse_number(path, &record, &headers, imd_col)?);
        if let Some(c) = imd_rank_col {
            imd_rank.push(parse_rank(path, &record, &headers, c)?);
        }
        for &(d, c, rank_col) in &domain_cols {
            scores.entry(d).or_default().push(parse_number(path, &record, &headers, c)?);
            if let Some(rc) = rank_col {
                ranks.entry(d).or_default().push(parse_rank(path, &record, &headers, rc)?);
            }
        }
    }
    if ids.is_empty() {
        for d in Domain::ALL {
            scores.entry(d).or_default();
        }
    }
    let mut table = DeprivationTable::new(ids, imd, scores)?;
    if imd_rank_col.is_some() {
        table = table.with_imd_rank(imd_rank)?;
    }
    for (d, r) in ranks {
        table = table.with_domain_ranks(d, r)?;
    }
    Ok(table)
}

/// Area codes from a CSV with an `lsoa_code` (or `area_code`) column, or
/// from the first column otherwise.
pub fn load_code_list(path: impl AsRef<Path>) -> Result<BTreeSet<String>> {
    let path = path.as_ref();
    let (mut reader, headers) = open(path)?;
    let col = column(&headers, "lsoa_code")
        .or_else(|| column(&headers, "area_code"))
        .unwrap_or(0);
    let mut codes = BTreeSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        if let Some(code) = record.get(col).filter(|c| !c.is_empty()) {
            codes.insert(code.to_string());
        }
    }
    Ok(codes)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic<F>(path: impl AsRef<Path>, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    {
        let mut w = std::io::BufWriter::new(tmp.as_file_mut());
        fill(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// `area_code,<name>...` with one row per area. Floats use the shortest
/// representation that parses back to the same value.
pub fn write_area_table(
    path: impl AsRef<Path>,
    area_ids: &[String],
    names: &[String],
    columns: &[Vec<f64>],
) -> Result<()> {
    if names.len() != columns.len() {
        return Err(Error::LengthMismatch {
            left: names.len(),
            right: columns.len(),
        });
    }
    if let Some(c) = columns.iter().find(|c| c.len() != area_ids.len()) {
        return Err(Error::LengthMismatch {
            left: area_ids.len(),
            right: c.len(),
        });
    }
    let path = path.as_ref();
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let mut header = vec!["area_code".to_string()];
        header.extend(names.iter().cloned());
        w.write_record(&header).map_err(|e| Error::csv(path, e))?;
        for (i, id) in area_ids.iter().enumerate() {
            let mut row = vec![id.clone()];
            row.extend(columns.iter().map(|c| format!("{:?}", c[i])));
            w.write_record(&row).map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    write_atomic(path, |w| w.write_all(&buf))
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, |w| w.write_all(text.as_bytes()))
}

/// One row per false negative: `map,lsoa_code,<domain>_rank...,weak_high,strong_low`.
pub fn write_fn_diagnostics(path: impl AsRef<Path>, records: &[(String, FnDomainRecord)]) -> Result<()> {
    let path = path.as_ref();
    let domains: BTreeSet<Domain> = records.iter().flat_map(|(_, r)| r.ranks.keys().copied()).collect();
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let mut header = vec!["map".to_string(), "lsoa_code".to_string()];
        header.extend(domains.iter().map(|d| format!("{}_rank", d.column())));
        header.push("weak_high".into());
        header.push("strong_low".into());
        w.write_record(&header).map_err(|e| Error::csv(path, e))?;
        let join = |ds: &[Domain]| ds.iter().map(|d| d.name()).collect::<Vec<_>>().join(";");
        for (map, r) in records {
            let mut row = vec![map.clone(), r.lsoa.clone()];
            row.extend(domains.iter().map(|d| r.ranks.get(d).map_or(String::new(), u32::to_string)));
            row.push(join(&r.weak_high));
            row.push(join(&r.strong_low));
            w.write_record(&row).map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    write_atomic(path, |w| w.write_all(&buf))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn features_happy_path_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "f.csv", "area_code,a,b\nE1,1,2\nE2,3.5,4\nE3,-1,0\n");
        let f = load_features(&p, "area_code").unwrap();
        assert_eq!((f.n_rows(), f.n_cols()), (3, 2));
        assert_eq!(f.row(1), &[3.5, 4.0]);

        let p = write(&dir, "dup.csv", "area_code,a\nE1,1\nE1,2\n");
        assert!(matches!(load_features(&p, "area_code"), Err(Error::DuplicateAreaId(id)) if id == "E1"));

        let p = write(&dir, "na.csv", "area_code,a,b\nE1,1,2\nE2,N/A,4\n");
        match load_features(&p, "area_code") {
            Err(Error::NonNumericCell { row, column, value, .. }) => {
                assert_eq!((row, column.as_str(), value.as_str()), (3, "a", "N/A"))
            }
            other => panic!("{other:?}"),
        }

        let p = write(&dir, "empty.csv", "area_code,a\nE1,\n");
        assert!(matches!(load_features(&p, "area_code"), Err(Error::NonNumericCell { .. })));
        assert!(matches!(load_features(&p, "code"), Err(Error::MissingIdColumn { .. })));
    }

    #[test]
    fn hierarchy_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "h.csv", "oa_code,lsoa_code\nO1,L1\nO2,L1\nO3,L2\nO1,L1\n");
        let h = load_hierarchy(&p).unwrap();
        assert_eq!((h.n_oas(), h.n_lsoas()), (3, 2));
        let p = write(&dir, "bad.csv", "oa_code,lsoa_code\nO1,L1\nO1,L2\n");
        assert!(matches!(load_hierarchy(&p), Err(Error::ConflictingMapping { .. })));
    }

    const DEPRIVATION: &str = "lsoa_code,imd_score,imd_rank,income,employment,health,education,barriers,crime,living_env,crime_rank\n\
        L1,30.5,10,0.3,0.2,1.1,40,25,0.9,30,1\n\
        L2,10.0,200,0.1,0.05,-0.5,10,20,-0.3,15,150\n";

    #[test]
    fn deprivation_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "d.csv", DEPRIVATION);
        let t = load_deprivation(&p).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.domain_score(Domain::LivingEnvironment), &[30.0, 15.0]);
        assert_eq!(t.imd_rank(), Some(&[10u32, 200][..]));
        assert_eq!(t.domain_rank(Domain::Crime), Some(&[1u32, 150][..]));
        assert!(t.domain_rank(Domain::Income).is_none());

        let no_crime = DEPRIVATION.replace(",crime,", ",crimes,");
        let p = write(&dir, "d2.csv", &no_crime);
        match load_deprivation(&p) {
            Err(Error::MissingDomainColumn { domain, .. }) => assert_eq!(domain, "Crime"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn area_table_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.csv");
        let ids = vec!["a".to_string(), "b".to_string()];
        let col = vec![0.1 + 0.2, -1.0 / 3.0];
        write_area_table(&p, &ids, &["ev1".into()], std::slice::from_ref(&col)).unwrap();
        let back = load_features(&p, "area_code").unwrap();
        assert_eq!(back.column(0), col);
    }

    #[test]
    fn code_list_formats() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "l.csv", "name,lsoa_code\nx,L1\ny,L2\n");
        assert_eq!(load_code_list(&p).unwrap().len(), 2);
        let p = write(&dir, "plain.csv", "code\nL1\nL3\nL3\n");
        assert_eq!(load_code_list(&p).unwrap(), ["L1".to_string(), "L3".to_string()].into());
    }
}
