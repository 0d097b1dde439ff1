//! Loader for the UCI Adult census data in its common distributions.
//!
//! Accepted layouts: the raw UCI directory (`adult.data`, optionally
//! `adult.test`), a single raw UCI file, a headered CSV (Kaggle style,
//! `gender` or `sex`), or a folktables ACSIncome export. All of them end
//! up with the UCI column names plus the aliases `gender`, `hours` and
//! `country`. Relationship labels are normalized to the short forms
//! husband/wife/no-family/own-child/unmarried/others, income labels lose
//! the trailing `.` of the test split, and `?` is treated as missing.

use std::path::{Path, PathBuf};

use causalfair_core::{ColumnSpec, Dataset, DatasetBuilder};

use crate::error::{Error, Result};

pub const UCI_COLUMNS: [&str; 15] = [
    "age",
    "workclass",
    "fnlwgt",
    "education",
    "education-num",
    "marital-status",
    "occupation",
    "relationship",
    "race",
    "sex",
    "capital-gain",
    "capital-loss",
    "hours-per-week",
    "native-country",
    "income",
];

/// Extra names appended after the UCI columns, with their source column.
const ALIASES: [(&str, &str); 3] = [
    ("gender", "sex"),
    ("hours", "hours-per-week"),
    ("country", "native-country"),
];

const FOLKTABLES: [(&str, &str); 9] = [
    ("AGEP", "age"),
    ("COW", "workclass"),
    ("SCHL", "education"),
    ("MAR", "marital-status"),
    ("OCCP", "occupation"),
    ("POBP", "native-country"),
    ("RELP", "relationship"),
    ("WKHP", "hours-per-week"),
    ("RAC1P", "race"),
];

/// Whether `path` looks like a raw UCI Adult source.
pub fn is_adult_source(path: &Path) -> bool {
    if path.is_dir() {
        return path.join("adult.data").is_file();
    }
    matches!(
        path.file_name().and_then(|n| n.to_str()),
        Some("adult.data" | "adult.test")
    )
}

pub fn normalize_relationship(label: &str) -> String {
    match label {
        "Husband" => "husband",
        "Wife" => "wife",
        "Not-in-family" => "no-family",
        "Own-child" => "own-child",
        "Unmarried" => "unmarried",
        "Other-relative" => "others",
        other => return other.to_string(),
    }
    .to_string()
}

/// Rows in the normalized layout: [`UCI_COLUMNS`] followed by the aliases.
pub fn normalized_header() -> Vec<String> {
    UCI_COLUMNS
        .iter()
        .chain(ALIASES.iter().map(|(a, _)| a))
        .map(|s| s.to_string())
        .collect()
}

fn finish_row(mut row: Vec<String>) -> Vec<String> {
    for cell in row.iter_mut() {
        if cell == "?" {
            cell.clear();
        }
    }
    row[7] = normalize_relationship(&row[7]);
    if let Some(s) = row[14].strip_suffix('.') {
        row[14] = s.to_string();
    }
    for (_, src) in ALIASES {
        let i = UCI_COLUMNS.iter().position(|c| *c == src).unwrap();
        let v = if src == "sex" {
            row[i].to_lowercase()
        } else {
            row[i].clone()
        };
        row.push(v);
    }
    row
}

fn read_raw(path: &Path, rows: &mut Vec<Vec<String>>) -> Result<()> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
    for rec in rdr.records() {
        let rec = rec.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        // Skips the "|1x3 Cross validator" banner and blank trailing lines.
        if rec.len() != UCI_COLUMNS.len() {
            continue;
        }
        rows.push(finish_row(rec.iter().map(str::to_string).collect()));
    }
    Ok(())
}

fn read_headered(path: &Path, rows: &mut Vec<Vec<String>>) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err)?;
    let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    let canon = |h: &str| -> Option<&'static str> {
        if let Some((_, to)) = FOLKTABLES.iter().find(|(from, _)| *from == h) {
            return Some(to);
        }
        let h = h.to_lowercase().replace(['_', '.', ' '], "-");
        let h = match h.as_str() {
            "gender" => "sex",
            "educational-num" => "education-num",
            "hours" => "hours-per-week",
            "country" => "native-country",
            "class" | "salary" => "income",
            other => other,
        };
        UCI_COLUMNS.iter().copied().find(|c| *c == h)
    };
    let folk = header.iter().any(|h| h == "PINCP");
    let mut map = vec![None; UCI_COLUMNS.len()];
    for (i, h) in header.iter().enumerate() {
        if let Some(c) = canon(h) {
            let j = UCI_COLUMNS.iter().position(|u| *u == c).unwrap();
            map[j].get_or_insert(i);
        }
        if folk && h == "SEX" {
            map[9] = Some(i);
        }
        if folk && h == "PINCP" {
            map[14] = Some(i);
        }
    }
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let mut row: Vec<String> = map
            .iter()
            .map(|m| m.and_then(|i| rec.get(i)).unwrap_or("").to_string())
            .collect();
        if folk {
            row[9] = match row[9].as_str() {
                "1" | "1.0" => "Male".to_string(),
                "2" | "2.0" => "Female".to_string(),
                other => other.to_string(),
            };
            if let Ok(v) = row[14].parse::<f64>() {
                row[14] = if v > 50_000.0 { ">50K" } else { "<=50K" }.to_string();
            }
        }
        rows.push(finish_row(row));
    }
    Ok(())
}

/// All rows of an Adult source in the normalized layout.
pub fn read_adult(path: &Path) -> Result<Vec<Vec<String>>> {
    let mut rows = Vec::new();
    if path.is_dir() {
        let parts: Vec<PathBuf> = ["adult.data", "adult.test"]
            .iter()
            .map(|f| path.join(f))
            .filter(|p| p.is_file())
            .collect();
        if parts.is_empty() {
            return Err(Error::io(
                format!("{} holds no adult.data", path.display()),
                std::io::ErrorKind::NotFound.into(),
            ));
        }
        for p in parts {
            read_raw(&p, &mut rows)?;
        }
    } else if is_adult_source(path) {
        read_raw(path, &mut rows)?;
    } else {
        read_headered(path, &mut rows)?;
    }
    Ok(rows)
}

pub fn load_adult(path: &Path, specs: Vec<ColumnSpec>) -> Result<Dataset> {
    let rows = read_adult(path)?;
    let mut b = DatasetBuilder::new(specs)?.with_header(&normalized_header())?;
    for r in &rows {
        b.push_record(r)?;
    }
    Ok(b.finish()?)
}
