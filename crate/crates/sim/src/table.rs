//! Result rows and their CSV form.
//!
//! Header (fixed):
//!
//! ```text
//! scheme,k,l,m,detector,snr_db,n2,p_high_dbm,ber_ptx,ber_ptx_se,ber_index,ber_index_se,
//! ber_ris,ber_ris_se,avg_dc_ris_uw,avg_dc_ris_se_uw,avg_dc_eh_uw,avg_dc_eh_se_uw,
//! standalone_ok,trials,seed
//! ```
//!
//! preceded by one comment line `# config=<hash> seed=<seed>`. Fields that do
//! not apply to a row (BERs of a harvest sweep, for example) are left empty.
//! `standalone_ok` is the fraction of blocks meeting the standalone condition
//! for the configured unit-cell technology.

use std::io::Write;

pub const HEADER: [&str; 21] = [
    "scheme",
    "k",
    "l",
    "m",
    "detector",
    "snr_db",
    "n2",
    "p_high_dbm",
    "ber_ptx",
    "ber_ptx_se",
    "ber_index",
    "ber_index_se",
    "ber_ris",
    "ber_ris_se",
    "avg_dc_ris_uw",
    "avg_dc_ris_se_uw",
    "avg_dc_eh_uw",
    "avg_dc_eh_se_uw",
    "standalone_ok",
    "trials",
    "seed",
];

/// Running sums for a sample mean and its standard error.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Accumulator {
    n: u64,
    sum: f64,
    sum_sq: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn estimate(&self) -> Estimate {
        if self.n == 0 {
            return Estimate { mean: 0.0, se: 0.0 };
        }
        let n = self.n as f64;
        let mean = self.sum / n;
        let se = if self.n > 1 {
            let var = ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Estimate { mean, se }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// Standard error of `mean`.
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scheme: &'static str,
    pub k: usize,
    pub l: usize,
    pub m: usize,
    pub detector: Option<&'static str>,
    pub snr_db: Option<f64>,
    pub n2: usize,
    pub p_high_dbm: f64,
    pub ber_ptx: Option<Estimate>,
    pub ber_index: Option<Estimate>,
    pub ber_ris: Option<Estimate>,
    pub avg_dc_ris_uw: Estimate,
    pub avg_dc_eh_uw: Estimate,
    pub standalone_ok: f64,
    pub trials: u64,
    pub seed: u64,
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl ResultRow {
    fn fields(&self) -> Vec<String> {
        let est = |e: Option<Estimate>| (opt(e.map(|e| e.mean)), opt(e.map(|e| e.se)));
        let (ptx, ptx_se) = est(self.ber_ptx);
        let (idx, idx_se) = est(self.ber_index);
        let (ris, ris_se) = est(self.ber_ris);
        vec![
            self.scheme.to_string(),
            self.k.to_string(),
            self.l.to_string(),
            self.m.to_string(),
            opt(self.detector),
            opt(self.snr_db),
            self.n2.to_string(),
            self.p_high_dbm.to_string(),
            ptx,
            ptx_se,
            idx,
            idx_se,
            ris,
            ris_se,
            self.avg_dc_ris_uw.mean.to_string(),
            self.avg_dc_ris_uw.se.to_string(),
            self.avg_dc_eh_uw.mean.to_string(),
            self.avg_dc_eh_uw.se.to_string(),
            self.standalone_ok.to_string(),
            self.trials.to_string(),
            self.seed.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub config_hash: String,
    pub seed: u64,
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn metadata_line(&self) -> String {
        format!("# config={} seed={}", self.config_hash, self.seed)
    }

    /// Header and rows, without the metadata line.
    pub fn csv_body(&self) -> csv::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(HEADER)?;
        for row in &self.rows {
            w.write_record(row.fields())?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> anyhow::Result<()> {
        writeln!(out, "{}", self.metadata_line())?;
        out.write_all(self.csv_body()?.as_bytes())?;
        Ok(())
    }
}
