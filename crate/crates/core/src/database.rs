//! On-disk descriptor database.
//!
//! Layout (all integers little-endian):
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 4    | magic `SSRV`                            |
//! | 4      | 4    | format version (`1`)                    |
//! | 8      | 4    | `K` layers                              |
//! | 12     | 4    | `M` sectors                             |
//! | 16     | 4    | `N` rings                               |
//! | 20     | 4    | temporal half-window `t`                |
//! | 24     | 4    | frame count                             |
//! | 28     | 8    | parameter fingerprint                   |
//! | 36     | ...  | frame records                           |
//!
//! Each record is `frame_id: u32`, `flags: u8` (bit 0 empty, bit 1 smoothed),
//! then `K*M*N` IEEE-754 `f32` values.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::aggregate::{temporal_smooth, GlobalDescriptor, TemporalParams};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"SSRV";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 36;

const FLAG_EMPTY: u8 = 1;
const FLAG_SMOOTHED: u8 = 2;

/// Ordered frame descriptors plus the parameters they were built with.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorDatabase {
    pub layers: u32,
    pub sectors: u32,
    pub rings: u32,
    pub t: u32,
    pub fingerprint: u64,
    descriptors: Vec<GlobalDescriptor>,
}

impl DescriptorDatabase {
    pub fn new(layers: u32, sectors: u32, rings: u32, t: u32, fingerprint: u64) -> Self {
        Self {
            layers,
            sectors,
            rings,
            t,
            fingerprint,
            descriptors: Vec::new(),
        }
    }

    /// Empty database matching `cfg`, tagged with half-window `t`.
    pub fn for_config(cfg: &PipelineConfig, t: usize) -> Self {
        Self::new(
            cfg.categories.layer_count() as u32,
            cfg.shape_context.sectors as u32,
            cfg.shape_context.rings as u32,
            t as u32,
            cfg.fingerprint(),
        )
    }

    /// Query database: raw descriptors, no smoothing.
    pub fn query(cfg: &PipelineConfig, raw: Vec<GlobalDescriptor>) -> Result<Self> {
        let mut db = Self::for_config(cfg, 0);
        for d in raw {
            db.push(d)?;
        }
        Ok(db)
    }

    /// Reference database: descriptors smoothed over `cfg.temporal`.
    pub fn reference(cfg: &PipelineConfig, raw: &[GlobalDescriptor]) -> Result<Self> {
        Self::reference_with(cfg, raw, cfg.temporal)
    }

    pub fn reference_with(cfg: &PipelineConfig, raw: &[GlobalDescriptor], temporal: TemporalParams) -> Result<Self> {
        let mut db = Self::for_config(cfg, temporal.t);
        if raw.is_empty() {
            return Ok(db);
        }
        for d in temporal_smooth(raw, temporal) {
            db.push(d)?;
        }
        Ok(db)
    }

    pub fn descriptor_len(&self) -> usize {
        (self.layers * self.sectors * self.rings) as usize
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    pub fn descriptors(&self) -> &[GlobalDescriptor] {
        &self.descriptors
    }

    pub fn into_descriptors(self) -> Vec<GlobalDescriptor> {
        self.descriptors
    }

    pub fn push(&mut self, d: GlobalDescriptor) -> Result<()> {
        if d.len() != self.descriptor_len() {
            return Err(Error::LengthMismatch {
                left: self.descriptor_len(),
                right: d.len(),
            });
        }
        self.descriptors.push(d);
        Ok(())
    }

    /// Fails unless both databases hold comparable descriptors.
    pub fn check_compatible(&self, other: &DescriptorDatabase) -> Result<()> {
        if self.fingerprint != other.fingerprint {
            return Err(Error::FingerprintMismatch {
                left: self.fingerprint,
                right: other.fingerprint,
            });
        }
        if self.descriptor_len() != other.descriptor_len() {
            return Err(Error::LengthMismatch {
                left: self.descriptor_len(),
                right: other.descriptor_len(),
            });
        }
        Ok(())
    }

    /// Appends frames from `other`. Only unsmoothed databases can be extended,
    /// since smoothing windows would straddle the seam.
    pub fn append(&mut self, other: DescriptorDatabase) -> Result<()> {
        self.check_compatible(&other)?;
        if self.t != 0 || other.t != 0 {
            return Err(Error::Database(
                "only unsmoothed (t = 0) databases can be appended to; re-encode the whole sequence".into(),
            ));
        }
        self.descriptors.extend(other.descriptors);
        Ok(())
    }

    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(&MAGIC)?;
        for v in [
            FORMAT_VERSION,
            self.layers,
            self.sectors,
            self.rings,
            self.t,
            self.descriptors.len() as u32,
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&self.fingerprint.to_le_bytes())?;
        let mut buf = Vec::with_capacity(5 + 4 * self.descriptor_len());
        for d in &self.descriptors {
            buf.clear();
            buf.extend_from_slice(&d.frame_id.to_le_bytes());
            let mut flags = 0;
            if d.empty {
                flags |= FLAG_EMPTY;
            }
            if d.smoothed {
                flags |= FLAG_SMOOTHED;
            }
            buf.push(flags);
            for &v in &d.values {
                buf.extend_from_slice(&(v as f32).to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        w.flush()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.len() * (5 + 4 * self.descriptor_len()));
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Database(format!("{} bytes is shorter than the header", bytes.len())));
        }
        if bytes[..4] != MAGIC {
            return Err(Error::Database("bad magic".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
        let version = u32_at(4);
        if version != FORMAT_VERSION {
            return Err(Error::Database(format!("unsupported version {version}")));
        }
        let (layers, sectors, rings, t, count) = (u32_at(8), u32_at(12), u32_at(16), u32_at(20), u32_at(24));
        let fingerprint = u64::from_le_bytes(bytes[28..36].try_into().expect("8 bytes"));
        let len = (layers as u64) * (sectors as u64) * (rings as u64);
        let record = 5 + 4 * len;
        let expected = HEADER_LEN as u64 + record * count as u64;
        if expected != bytes.len() as u64 {
            return Err(Error::Database(format!(
                "expected {expected} bytes for {count} frames, found {}",
                bytes.len()
            )));
        }
        let mut db = Self::new(layers, sectors, rings, t, fingerprint);
        let record = record as usize;
        for chunk in bytes[HEADER_LEN..].chunks_exact(record) {
            let frame_id = u32::from_le_bytes(chunk[..4].try_into().expect("4 bytes"));
            let flags = chunk[4];
            let values = chunk[5..]
                .chunks_exact(4)
                .map(|b| f64::from(f32::from_le_bytes(b.try_into().expect("4 bytes"))))
                .collect();
            db.descriptors.push(GlobalDescriptor {
                frame_id,
                values,
                empty: flags & FLAG_EMPTY != 0,
                smoothed: flags & FLAG_SMOOTHED != 0,
            });
        }
        Ok(db)
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)
            .map_err(|e| Error::Database(format!("read failed: {e}")))?;
        Self::from_bytes(&bytes)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(BufWriter::new(file)).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut bytes = Vec::new();
        BufReader::new(file)
            .read_to_end(&mut bytes)
            .map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DescriptorDatabase {
        let mut db = DescriptorDatabase::new(2, 3, 1, 0, 0xdead_beef);
        db.push(GlobalDescriptor {
            frame_id: 0,
            values: vec![0.6, 0.8, 0.0, 0.0, 0.0, 0.0],
            empty: false,
            smoothed: false,
        })
        .unwrap();
        db.push(GlobalDescriptor {
            frame_id: 1,
            values: vec![0.0; 6],
            empty: true,
            smoothed: false,
        })
        .unwrap();
        db
    }

    #[test]
    fn header_layout() {
        let bytes = sample().to_bytes();
        assert_eq!(&bytes[..4], b"SSRV");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 3);
        assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[24..28].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(bytes[28..36].try_into().unwrap()), 0xdead_beef);
        assert_eq!(bytes.len(), HEADER_LEN + 2 * (5 + 4 * 6));
        assert_eq!(bytes[HEADER_LEN + 4], 0);
        assert_eq!(bytes[HEADER_LEN + 29 + 4], FLAG_EMPTY);
    }

    #[test]
    fn round_trip() {
        let db = sample();
        let back = DescriptorDatabase::from_bytes(&db.to_bytes()).unwrap();
        assert_eq!(back.fingerprint, db.fingerprint);
        assert_eq!(back.len(), 2);
        assert_eq!(back.descriptors()[0].values[1], f64::from(0.8f32));
        assert!(back.descriptors()[1].empty);
        assert_eq!(back.to_bytes(), db.to_bytes());
    }

    #[test]
    fn corrupt_inputs_are_rejected() {
        let bytes = sample().to_bytes();
        assert!(DescriptorDatabase::from_bytes(&bytes[..20]).is_err());
        assert!(DescriptorDatabase::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(DescriptorDatabase::from_bytes(&bad).is_err());
        let mut bad = bytes;
        bad[4] = 9;
        assert!(DescriptorDatabase::from_bytes(&bad).is_err());
    }

    #[test]
    fn wrong_length_push_is_rejected() {
        let mut db = sample();
        let d = GlobalDescriptor {
            frame_id: 5,
            values: vec![1.0],
            empty: false,
            smoothed: false,
        };
        assert!(db.push(d).is_err());
    }

    #[test]
    fn append_requires_matching_unsmoothed_databases() {
        let mut a = sample();
        a.append(sample()).unwrap();
        assert_eq!(a.len(), 4);
        let mut other = sample();
        other.fingerprint = 1;
        assert!(matches!(a.append(other), Err(Error::FingerprintMismatch { .. })));
        let mut smoothed = sample();
        smoothed.t = 3;
        assert!(a.append(smoothed).is_err());
    }
}
