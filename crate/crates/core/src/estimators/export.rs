use std::io::Write;

use serde::Serialize;

use super::mom::Estimate;
use crate::error::{Error, Result};

/// One exported estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRow {
    pub observable: String,
    pub value: f64,
    pub stderr: f64,
    pub n_used: usize,
    pub norm_used: f64,
    pub mode: String,
}

impl EstimateRow {
    pub fn new(observable: impl Into<String>, e: &Estimate, mode: impl ToString) -> Self {
        EstimateRow {
            observable: observable.into(),
            value: e.value,
            stderr: e.stderr,
            n_used: e.n_used,
            norm_used: e.norm_used,
            mode: mode.to_string(),
        }
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("csv: {other:?}")),
    }
}

/// Writes rows with a header line.
pub fn write_estimates_csv<W: Write>(w: W, rows: &[EstimateRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_row() {
        let e = Estimate {
            value: 0.5,
            stderr: 0.01,
            n_used: 100,
            norm_used: 1.25,
        };
        let mut buf = Vec::new();
        write_estimates_csv(&mut buf, &[EstimateRow::new("Z0 Z1", &e, "pec")]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "observable,value,stderr,n_used,norm_used,mode\nZ0 Z1,0.5,0.01,100,1.25,pec\n"
        );
    }
}
