use std::io::Write;
use std::path::Path;

use super::FockOperator;
use crate::error::Result;

/// Occupation bitstring; character k is mode k+1 (copy-1 modes first).
fn bitstring(n: usize, modes: usize) -> String {
    (0..modes).map(|k| if n >> k & 1 == 1 { '1' } else { '0' }).collect()
}

/// Writes nonzero entries as `row,col,re,im` triplets, column-major.
pub fn dump_operator_csv<W: Write>(op: &FockOperator, out: W) -> Result<()> {
    let fs = *op.fs();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["row", "col", "re", "im"]).map_err(std::io::Error::from)?;
    for c in 0..fs.dim() {
        let col = op.apply(&super::FockVector::basis(&fs, c));
        for (r, z) in col.coeffs().iter().enumerate() {
            if z.re != 0.0 || z.im != 0.0 {
                w.write_record([
                    bitstring(r, fs.modes()),
                    bitstring(c, fs.modes()),
                    format!("{:e}", z.re),
                    format!("{:e}", z.im),
                ])
                .map_err(std::io::Error::from)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_operator_csv(op: &FockOperator, path: &Path) -> Result<()> {
    dump_operator_csv(op, std::fs::File::create(path)?)
}
