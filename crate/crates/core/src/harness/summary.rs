use std::io::Read;

use crate::error::{Error, Result};

use super::TrialRecord;

pub const CSV_HEADER: [&str; 7] =
    ["sweep_value", "estimator", "mean_01", "se_01", "mean_hamming", "se_hamming", "trials"];

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub sweep_value: f64,
    pub estimator: String,
    pub mean_01: f64,
    pub se_01: f64,
    pub mean_hamming: f64,
    pub se_hamming: f64,
    pub trials: usize,
}

/// Mean realized separation at one sweep value.
#[derive(Clone, Debug, PartialEq)]
pub struct RealizedSeparation {
    pub sweep_value: f64,
    pub mean_kappa: f64,
    pub mean_kappa_bar: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Summary {
    /// One row per (sweep value, estimator), in first-seen order.
    pub rows: Vec<SummaryRow>,
    /// Empty when the summary was read back from CSV.
    pub realized: Vec<RealizedSeparation>,
}

#[derive(Default)]
struct Welford {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Standard error of the mean; zero for a single observation.
    fn stderr(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let var = (self.m2 / (self.count - 1) as f64).max(0.0);
        (var / self.count as f64).sqrt()
    }
}

/// Groups records by (sweep value, estimator) and reports mean and
/// standard error of both losses.
pub fn aggregate(records: &[TrialRecord]) -> Result<Summary> {
    if records.is_empty() {
        return Err(Error::invalid("cannot aggregate an empty record list"));
    }
    let mut keys: Vec<(u64, &str)> = Vec::new();
    let mut stats: Vec<(Welford, Welford)> = Vec::new();
    let mut sweeps: Vec<u64> = Vec::new();
    let mut kappas: Vec<(Welford, Welford)> = Vec::new();
    let mut last_seed: Vec<Option<u64>> = Vec::new();

    for r in records {
        let key = (r.sweep_value.to_bits(), r.estimator.as_str());
        let k = keys.iter().position(|x| *x == key).unwrap_or_else(|| {
            keys.push(key);
            stats.push(Default::default());
            keys.len() - 1
        });
        stats[k].0.push(f64::from(r.loss_01));
        stats[k].1.push(r.loss_hamming);

        let s = sweeps.iter().position(|x| *x == key.0).unwrap_or_else(|| {
            sweeps.push(key.0);
            kappas.push(Default::default());
            last_seed.push(None);
            sweeps.len() - 1
        });
        // Every estimator of a trial shares one θ; count it once.
        if last_seed[s] != Some(r.seed) {
            last_seed[s] = Some(r.seed);
            kappas[s].0.push(r.kappa);
            kappas[s].1.push(r.kappa_bar);
        }
    }

    let rows = keys
        .iter()
        .zip(&stats)
        .map(|(&(bits, est), (l01, lh))| SummaryRow {
            sweep_value: f64::from_bits(bits),
            estimator: est.to_string(),
            mean_01: l01.mean,
            se_01: l01.stderr(),
            mean_hamming: lh.mean,
            se_hamming: lh.stderr(),
            trials: l01.count,
        })
        .collect();
    let realized = sweeps
        .iter()
        .zip(&kappas)
        .map(|(&bits, (k, kb))| RealizedSeparation {
            sweep_value: f64::from_bits(bits),
            mean_kappa: k.mean,
            mean_kappa_bar: kb.mean,
        })
        .collect();
    Ok(Summary { rows, realized })
}

impl Summary {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, sweep_value: f64, estimator: &str) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.sweep_value == sweep_value && r.estimator == estimator)
    }

    /// Distinct estimators in first-seen order.
    pub fn estimators(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.estimator.as_str()) {
                out.push(&r.estimator);
            }
        }
        out
    }

    /// Distinct sweep values in first-seen order.
    pub fn sweep_values(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.sweep_value) {
                out.push(r.sweep_value);
            }
        }
        out
    }

    /// CSV with the fixed header; floats use shortest round-trip formatting.
    pub fn to_csv(&self) -> String {
        let mut out = CSV_HEADER.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.sweep_value, r.estimator, r.mean_01, r.se_01, r.mean_hamming, r.se_hamming, r.trials
            ));
        }
        out
    }

    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?;
        if header.iter().ne(CSV_HEADER.iter().copied()) {
            return Err(Error::Parse(format!("unexpected summary header {:?}", header.iter().collect::<Vec<_>>())));
        }
        let mut rows = Vec::new();
        for (k, rec) in rdr.records().enumerate() {
            let line = k + 2;
            let rec = rec.map_err(|e| Error::Parse(format!("line {line}: {e}")))?;
            let num = |i: usize| -> Result<f64> {
                rec[i].parse().map_err(|e| Error::Parse(format!("line {line}: {:?}: {e}", &rec[i])))
            };
            rows.push(SummaryRow {
                sweep_value: num(0)?,
                estimator: rec[1].to_string(),
                mean_01: num(2)?,
                se_01: num(3)?,
                mean_hamming: num(4)?,
                se_hamming: num(5)?,
                trials: rec[6].parse().map_err(|e| Error::Parse(format!("line {line}: {e}")))?,
            });
        }
        Ok(Summary { rows, realized: Vec::new() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(v: f64, est: &str, seed: u64, l01: u8, lh: f64) -> TrialRecord {
        TrialRecord {
            sweep_value: v,
            estimator: est.into(),
            seed,
            loss_01: l01,
            loss_hamming: lh,
            kappa: 1.0,
            kappa_bar: 0.5,
            wall_time: 0.0,
        }
    }

    #[test]
    fn single_and_pair() {
        let s = aggregate(&[rec(1.0, "lss", 0, 1, 0.25)]).unwrap();
        assert_eq!(s.rows[0].mean_hamming, 0.25);
        assert_eq!((s.rows[0].se_01, s.rows[0].se_hamming, s.rows[0].trials), (0.0, 0.0, 1));

        let s = aggregate(&[rec(1.0, "lss", 0, 0, 0.0), rec(1.0, "lss", 1, 1, 1.0)]).unwrap();
        assert_eq!(s.rows[0].mean_01, 0.5);
        assert!((s.rows[0].se_01 - 0.5).abs() < 1e-15);
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn grouping_order() {
        let s = aggregate(&[
            rec(2.0, "lss", 0, 0, 0.0),
            rec(2.0, "lsl", 0, 0, 0.0),
            rec(1.0, "lss", 1, 1, 0.5),
            rec(2.0, "lss", 2, 1, 0.5),
        ])
        .unwrap();
        assert_eq!(s.rows.len(), 3);
        assert_eq!(s.estimators(), vec!["lss", "lsl"]);
        assert_eq!(s.sweep_values(), vec![2.0, 1.0]);
        assert_eq!(s.row(2.0, "lss").unwrap().trials, 2);
        assert_eq!(s.realized.len(), 2);
    }

    #[test]
    fn csv_round_trip() {
        let s = aggregate(&[rec(0.1, "lsl", 0, 1, 1.0 / 3.0), rec(0.1, "lsl", 1, 0, 0.0)]).unwrap();
        let text = s.to_csv();
        assert!(text.starts_with("sweep_value,estimator,mean_01,se_01,mean_hamming,se_hamming,trials\n"));
        assert_eq!(text.lines().count(), 2);
        let back = Summary::from_csv(text.as_bytes()).unwrap();
        assert_eq!(back.rows, s.rows);
        assert!(Summary::from_csv("a,b\n".as_bytes()).is_err());
    }
}
