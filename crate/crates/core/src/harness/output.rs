use std::io::Write;

use crate::analysis::{BerCurve, SlopeFit};
use crate::Result;

pub const CSV_HEADER: &str = "source,snr_db,trials,info_bits,bit_errors,ber";

/// Row origin in the shared CSV schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Sim,
    Bound,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Sim => "sim",
            Source::Bound => "bound",
        }
    }
}

/// Writes `curve` with the header and the trailing slope comment.
pub fn write_csv<W: Write>(out: &mut W, curve: &BerCurve, source: Source, seed: u64) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    write_rows(out, curve, source)?;
    writeln!(out, "{}", slope_comment(curve.fit.as_ref(), seed))?;
    Ok(())
}

/// Rows only, for appending further series under one header.
pub fn write_rows<W: Write>(out: &mut W, curve: &BerCurve, source: Source) -> Result<()> {
    for r in &curve.rows {
        writeln!(out, "{},{},{},{},{},{:e}", source.as_str(), r.snr_db, r.trials, r.info_bits, r.bit_errors, r.ber)?;
    }
    Ok(())
}

pub fn slope_comment(fit: Option<&SlopeFit>, seed: u64) -> String {
    match fit {
        Some(f) => format!("# slope={} window={}:{} seed={seed}", f.slope, f.window.0, f.window.1),
        None => format!("# slope=nan window=nan:nan seed={seed}"),
    }
}
