//! Tabular datasets: gene columns of reals and a final integer `label`.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::marginals::LABEL_DOMAIN;
use crate::ring::{decode_at, FixedPointConfig, RingValue};

pub const LABEL_COLUMN: &str = "label";

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub genes: Vec<String>,
    /// Row-major gene values, `rows x genes`.
    pub values: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
}

impl Dataset {
    pub fn rows(&self) -> usize {
        self.labels.len()
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = self.genes.clone();
        h.push(LABEL_COLUMN.into());
        h
    }

    /// Parses CSV text. Row numbers in errors count data rows from 1.
    pub fn read_from(r: impl Read, origin: &str) -> Result<Dataset> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).has_headers(true).from_reader(r);
        let at = |e: csv::Error| Error::Parse(format!("{origin}: {e}"));
        let header: Vec<String> = rdr.headers().map_err(at)?.iter().map(str::to_string).collect();
        match header.last() {
            Some(l) if l == LABEL_COLUMN && header.len() >= 2 => {}
            _ => {
                return Err(Error::Parse(format!(
                    "{origin}: header must list gene columns followed by `{LABEL_COLUMN}`"
                )))
            }
        }
        let d = header.len() - 1;
        let mut ds = Dataset { genes: header[..d].to_vec(), ..Dataset::default() };
        for (i, rec) in rdr.records().enumerate() {
            let row = i + 1;
            let rec = rec.map_err(|e| match e.kind() {
                csv::ErrorKind::UnequalLengths { len, .. } => Error::Parse(format!(
                    "{origin}: row {row}: expected {} cells, found {len}",
                    d + 1
                )),
                _ => at(e),
            })?;
            let mut vals = Vec::with_capacity(d);
            for (j, cell) in rec.iter().take(d).enumerate() {
                let x: f64 = cell.parse().ok().filter(|x: &f64| x.is_finite()).ok_or_else(|| {
                    Error::Parse(format!("{origin}: row {row}, column `{}`: invalid value `{cell}`", header[j]))
                })?;
                vals.push(x);
            }
            let cell = &rec[d];
            let label = cell.parse::<u8>().ok().filter(|&y| (y as usize) < LABEL_DOMAIN).ok_or_else(|| {
                Error::Parse(format!(
                    "{origin}: row {row}, column `{LABEL_COLUMN}`: label `{cell}` is not an integer in 0..={}",
                    LABEL_DOMAIN - 1
                ))
            })?;
            ds.values.push(vals);
            ds.labels.push(label);
        }
        Ok(ds)
    }

    pub fn read_path(path: &Path) -> Result<Dataset> {
        let f = std::fs::File::open(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Dataset::read_from(std::io::BufReader::new(f), &path.display().to_string())
    }

    /// Writes CSV with shortest round-trip formatting of every value.
    pub fn write_to(&self, w: impl Write) -> Result<()> {
        let io = |e: csv::Error| Error::Parse(format!("writing dataset: {e}"));
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(self.header()).map_err(io)?;
        for (vals, y) in self.values.iter().zip(&self.labels) {
            let mut rec: Vec<String> = vals.iter().map(|x| x.to_string()).collect();
            rec.push(y.to_string());
            wtr.write_record(&rec).map_err(io)?;
        }
        wtr.flush().map_err(|e| Error::Parse(format!("writing dataset: {e}")))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn write_path(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        self.write_to(std::io::BufWriter::new(f))
    }

    /// Rejects values the fixed-point pipeline cannot carry.
    pub fn check_range(&self, fixed: FixedPointConfig, value_bits: u32) -> Result<()> {
        let bound = (2f64).powi(value_bits as i32);
        for (i, row) in self.values.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                if x.abs() >= bound {
                    return Err(Error::Ingest(format!(
                        "row {}, column `{}`: |{x}| is not below 2^{value_bits}",
                        i + 1,
                        self.genes[j]
                    )));
                }
                fixed.encode(x)?;
            }
        }
        Ok(())
    }

    /// Ring encoding, row-major, label last in each row.
    pub fn encode(&self, fixed: FixedPointConfig) -> Result<Vec<RingValue>> {
        let mut out = Vec::with_capacity(self.rows() * (self.genes.len() + 1));
        for (vals, &y) in self.values.iter().zip(&self.labels) {
            for &x in vals {
                out.push(fixed.encode(x)?);
            }
            out.push(RingValue(y as u64));
        }
        Ok(out)
    }

    /// Inverse of [`Dataset::encode`]. Labels must be in range.
    pub fn decode(genes: Vec<String>, cells: &[RingValue], frac_bits: u32) -> Result<Dataset> {
        let cols = genes.len() + 1;
        if cells.len() % cols != 0 {
            return Err(Error::Integrity(format!("{} cells do not form rows of {cols}", cells.len())));
        }
        let mut ds = Dataset { genes, ..Dataset::default() };
        for row in cells.chunks_exact(cols) {
            let y = row[cols - 1].0;
            if y >= LABEL_DOMAIN as u64 {
                return Err(Error::Integrity(format!("decoded label {y} is out of range")));
            }
            ds.values.push(row[..cols - 1].iter().map(|&v| decode_at(v, frac_bits)).collect());
            ds.labels.push(y as u8);
        }
        Ok(ds)
    }
}
