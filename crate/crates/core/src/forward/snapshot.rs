//! Field snapshot files.
//!
//! Binary layout: one line of JSON header terminated by `\n`, followed by
//! `cells_per_side^d` little-endian `f64` values with the first coordinate
//! varying fastest. The CSV layout has the header as a `#` comment line and
//! one `x1[,x2[,x3]],w` row per cell.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{input_err, Result};

use super::ForwardState;

pub const FORMAT: &str = "slfv-field-v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub format: String,
    pub d: usize,
    #[serde(rename = "L")]
    pub side: f64,
    pub h: f64,
    pub cells_per_side: usize,
    pub t: f64,
    pub seed: u64,
}

impl SnapshotHeader {
    pub fn for_state(state: &ForwardState, t: f64, seed: u64) -> Self {
        Self {
            format: FORMAT.to_string(),
            d: state.domain().dim(),
            side: state.domain().side(),
            h: state.cell_width(),
            cells_per_side: state.cells_per_side(),
            t,
            seed,
        }
    }

    pub fn cell_count(&self) -> usize {
        self.cells_per_side.pow(self.d as u32)
    }
}

pub fn write_binary<W: Write>(out: &mut W, header: &SnapshotHeader, values: &[f64]) -> Result<()> {
    if values.len() != header.cell_count() {
        return Err(input_err("snapshot length does not match its header"));
    }
    serde_json::to_writer(&mut *out, header)?;
    out.write_all(b"\n")?;
    for v in values {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: BufRead>(input: &mut R) -> Result<(SnapshotHeader, Vec<f64>)> {
    let mut line = String::new();
    input.read_line(&mut line)?;
    let header: SnapshotHeader = serde_json::from_str(line.trim_end())?;
    if header.format != FORMAT {
        return Err(input_err(format!("unknown snapshot format {}", header.format)));
    }
    let mut bytes = vec![0u8; 8 * header.cell_count()];
    input.read_exact(&mut bytes)?;
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok((header, values))
}

pub fn write_csv<W: Write>(out: &mut W, header: &SnapshotHeader, values: &[f64]) -> Result<()> {
    if values.len() != header.cell_count() {
        return Err(input_err("snapshot length does not match its header"));
    }
    writeln!(out, "# {}", serde_json::to_string(header)?)?;
    let n = header.cells_per_side;
    for (idx, v) in values.iter().enumerate() {
        let mut rest = idx;
        for k in 0..header.d {
            let i = rest % n;
            rest /= n;
            if k > 0 {
                write!(out, ",")?;
            }
            write!(out, "{}", (i as f64 + 0.5) * header.h)?;
        }
        writeln!(out, ",{v}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TorusDomain;

    #[test]
    fn binary_round_trip() {
        let dom = TorusDomain::new(2, 4.0).unwrap();
        let s = ForwardState::from_fn(dom, 0.5, |p| p.0[0] / 4.0).unwrap();
        let header = SnapshotHeader::for_state(&s, 1.5, 42);
        let mut buf = Vec::new();
        write_binary(&mut buf, &header, s.values()).unwrap();
        let (h2, v2) = read_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(h2, header);
        assert_eq!(v2, s.values());
        assert_eq!(buf.len(), buf.iter().position(|&b| b == b'\n').unwrap() + 1 + 8 * 64);

        let mut csv = Vec::new();
        write_csv(&mut csv, &header, s.values()).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), 65);
        assert_eq!(text.lines().nth(2).unwrap(), "0.75,0.25,0.1875");
    }
}
