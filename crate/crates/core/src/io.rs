//! CSV formats for feature sets and matchings.
//!
//! Feature files carry a header `id,x1,…,xd` with an optional trailing
//! `sigma` column, then one feature per row. Matchings are written as
//! `i,pi_i` with one-based indices.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{FeatureSet, MatchInstance};
use crate::permutation::Permutation;

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureFile {
    pub ids: Vec<String>,
    pub features: FeatureSet,
    pub sigma: Option<Vec<f64>>,
}

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("line {line}: {msg}"))
}

pub fn parse_features<R: Read>(reader: R) -> Result<FeatureFile> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| parse_err(1, e))?.clone();
    let cols: Vec<&str> = header.iter().collect();
    if cols.first().map(|c| c.eq_ignore_ascii_case("id")) != Some(true) {
        return Err(parse_err(1, "header must start with `id`"));
    }
    let has_sigma = cols.last().is_some_and(|c| c.eq_ignore_ascii_case("sigma"));
    let d = cols.len() - 1 - usize::from(has_sigma);
    if d == 0 {
        return Err(parse_err(1, "no coordinate columns"));
    }
    let mut ids = Vec::new();
    let mut data = Vec::new();
    let mut sigma = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| parse_err(line, e))?;
        if rec.len() != cols.len() {
            return Err(parse_err(line, format!("expected {} fields, found {}", cols.len(), rec.len())));
        }
        ids.push(rec[0].to_string());
        for t in rec.iter().skip(1) {
            let v: f64 = t.parse().map_err(|e| parse_err(line, format!("{t:?}: {e}")))?;
            data.push(v);
        }
        if has_sigma {
            sigma.push(data.pop().expect("sigma column present"));
        }
    }
    let features = FeatureSet::new(ids.len(), d, data)?;
    Ok(FeatureFile { ids, features, sigma: has_sigma.then_some(sigma) })
}

pub fn write_features<W: Write>(writer: W, features: &FeatureSet, sigma: Option<&[f64]>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["id".to_string()];
    header.extend((1..=features.dim()).map(|k| format!("x{k}")));
    if sigma.is_some() {
        header.push("sigma".into());
    }
    let wrap = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(&header).map_err(wrap)?;
    for (i, row) in features.rows().enumerate() {
        let mut rec = vec![(i + 1).to_string()];
        rec.extend(row.iter().map(|v| v.to_string()));
        if let Some(s) = sigma {
            rec.push(s[i].to_string());
        }
        w.write_record(&rec).map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_features(path: &Path) -> Result<FeatureFile> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_features(file).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn save_features(path: &Path, features: &FeatureSet, sigma: Option<&[f64]>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_features(file, features, sigma)
}

/// Pairs two feature files into an instance with unknown truth. Noise
/// levels are attached only when both files carry a `sigma` column.
pub fn load_instance(first: &Path, second: &Path) -> Result<MatchInstance> {
    let a = read_features(first)?;
    let b = read_features(second)?;
    let inst = MatchInstance::new(a.features, b.features)?;
    match (a.sigma, b.sigma) {
        (Some(s1), Some(s2)) => inst.with_noise(s1, s2),
        _ => Ok(inst),
    }
}

/// `i,pi_i` table, one-based.
pub fn matching_csv(p: &Permutation) -> String {
    let mut out = String::from("i,pi_i\n");
    for (i, v) in p.to_one_based().into_iter().enumerate() {
        out.push_str(&format!("{},{}\n", i + 1, v));
    }
    out
}
