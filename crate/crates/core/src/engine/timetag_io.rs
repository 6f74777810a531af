//! Binary time-tag files.
//!
//! Layout (little endian): magic `MXTT`, `u16` version, `u16` reserved,
//! 32-byte SHA-256 of the scenario, `u64` seed, `u64` record count, then
//! records of `u32` detector id and `u64` timestamp in ps, sorted by time.

use std::io::{Read, Write};

use crate::engine::simulate::SimulationOutput;
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"MXTT";
pub const VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct TimeTag {
    pub timestamp_ps: u64,
    pub detector: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeTagFile {
    pub scenario_hash: [u8; 32],
    pub seed: u64,
    pub records: Vec<TimeTag>,
}

impl TimeTagFile {
    /// Merges per-detector streams; detector ids follow stream order.
    pub fn from_streams(scenario_hash: [u8; 32], seed: u64, streams: &[&[u64]]) -> Self {
        let mut records: Vec<TimeTag> = streams
            .iter()
            .enumerate()
            .flat_map(|(d, ts)| ts.iter().map(move |&t| TimeTag { timestamp_ps: t, detector: d as u32 }))
            .collect();
        records.sort_unstable();
        Self { scenario_hash, seed, records }
    }

    pub fn from_output(out: &SimulationOutput) -> Self {
        Self::from_streams(out.scenario_hash, out.seed, &[out.signal(), out.idler()])
    }

    /// Timestamps of detector `id` in file order.
    pub fn stream(&self, id: u32) -> Vec<u64> {
        self.records.iter().filter(|r| r.detector == id).map(|r| r.timestamp_ps).collect()
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&0u16.to_le_bytes())?;
        w.write_all(&self.scenario_hash)?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&(self.records.len() as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.records.len() * 12);
        for r in &self.records {
            buf.extend_from_slice(&r.detector.to_le_bytes());
            buf.extend_from_slice(&r.timestamp_ps.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut head = [0u8; 56];
        r.read_exact(&mut head).map_err(|e| Error::Format(format!("truncated header: {e}")))?;
        if &head[0..4] != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = u16::from_le_bytes([head[4], head[5]]);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let scenario_hash: [u8; 32] = head[8..40].try_into().expect("32 bytes");
        let seed = u64::from_le_bytes(head[40..48].try_into().expect("8 bytes"));
        let n = u64::from_le_bytes(head[48..56].try_into().expect("8 bytes"));
        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        if body.len() as u64 != n * 12 {
            return Err(Error::Format(format!("expected {n} records, found {} bytes", body.len())));
        }
        let records = body
            .chunks_exact(12)
            .map(|c| TimeTag {
                detector: u32::from_le_bytes(c[0..4].try_into().expect("4 bytes")),
                timestamp_ps: u64::from_le_bytes(c[4..12].try_into().expect("8 bytes")),
            })
            .collect();
        Ok(Self { scenario_hash, seed, records })
    }

    /// `detector,timestamp_ps` rows with a header line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "detector,timestamp_ps")?;
        for r in &self.records {
            writeln!(w, "{},{}", r.detector, r.timestamp_ps)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let f = TimeTagFile::from_streams([7u8; 32], 42, &[&[5, 10, 30], &[6, 10]]);
        let mut buf = Vec::new();
        f.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 56 + 5 * 12);
        let g = TimeTagFile::read_from(buf.as_slice()).unwrap();
        assert_eq!(f, g);
        assert_eq!(g.stream(1), vec![6, 10]);
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(TimeTagFile::read_from(&b"nope"[..]), Err(Error::Format(_))));
    }
}
