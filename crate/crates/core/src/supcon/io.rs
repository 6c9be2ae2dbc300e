//! Binary recognizer format.
//!
//! All integers and floats little-endian:
//!
//! ```text
//! magic      8 bytes  "VOLTREC\0"
//! version    u32
//! input_side u32, embed_dim u32, proj_dim u32, param_count u32
//! temperature f64
//! params     param_count x f32
//! label_count u32
//! per label: byte_len u32, UTF-8 bytes, zone u8 (0 upper, 1 middle, 2 bottom),
//!            embed_dim x f32 prototype
//! ```

use super::{EncoderParams, LabelPrototype, TrainedRecognizer, EMBED_DIM, INPUT_SIDE, PARAM_COUNT, PROJ_DIM};
use crate::segmentation::Zone;
use crate::{Error, Result};

pub const RECOGNIZER_MAGIC: &[u8; 8] = b"VOLTREC\0";
pub const RECOGNIZER_VERSION: u32 = 1;

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Format(format!("recognizer truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>> {
        let bytes = self.take(n.checked_mul(4).ok_or_else(|| Error::Format("length overflow".into()))?)?;
        Ok(bytes.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

fn zone_byte(z: Zone) -> u8 {
    match z {
        Zone::Upper => 0,
        Zone::Middle => 1,
        Zone::Bottom => 2,
    }
}

impl TrainedRecognizer {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(64 + 4 * PARAM_COUNT + self.labels.len() * (4 * EMBED_DIM + 16));
        out.extend_from_slice(RECOGNIZER_MAGIC);
        for v in [RECOGNIZER_VERSION, INPUT_SIDE as u32, EMBED_DIM as u32, PROJ_DIM as u32, PARAM_COUNT as u32] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&self.temperature.to_le_bytes());
        for p in &self.params.data {
            out.extend_from_slice(&p.to_le_bytes());
        }
        out.extend_from_slice(&(self.labels.len() as u32).to_le_bytes());
        for l in &self.labels {
            out.extend_from_slice(&(l.label.len() as u32).to_le_bytes());
            out.extend_from_slice(l.label.as_bytes());
            out.push(zone_byte(l.zone));
            for v in &l.prototype {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        let mut r = Reader { buf, pos: 0 };
        if r.take(8)? != RECOGNIZER_MAGIC {
            return Err(Error::Format("not a recognizer file (bad magic)".into()));
        }
        let version = r.u32()?;
        if version != RECOGNIZER_VERSION {
            return Err(Error::Format(format!("unsupported recognizer version {version}")));
        }
        let dims = [r.u32()?, r.u32()?, r.u32()?, r.u32()?];
        let expected = [INPUT_SIDE as u32, EMBED_DIM as u32, PROJ_DIM as u32, PARAM_COUNT as u32];
        if dims != expected {
            return Err(Error::SizeMismatch(format!("recognizer dims {dims:?}, expected {expected:?}")));
        }
        let temperature = r.f64()?;
        let params = EncoderParams::from_vec(r.f32s(PARAM_COUNT)?)?;
        let count = r.u32()? as usize;
        let mut labels = Vec::with_capacity(count.min(1 << 16));
        for _ in 0..count {
            let len = r.u32()? as usize;
            let label = std::str::from_utf8(r.take(len)?)
                .map_err(|e| Error::Format(format!("label is not UTF-8: {e}")))?
                .to_string();
            let zone = match r.take(1)?[0] {
                0 => Zone::Upper,
                1 => Zone::Middle,
                2 => Zone::Bottom,
                b => return Err(Error::Format(format!("bad zone byte {b}"))),
            };
            labels.push(LabelPrototype {
                label,
                zone,
                prototype: r.f32s(EMBED_DIM)?,
            });
        }
        if r.pos != buf.len() {
            return Err(Error::Format(format!("{} trailing bytes", buf.len() - r.pos)));
        }
        Ok(TrainedRecognizer {
            params,
            labels,
            temperature,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TrainedRecognizer {
        let mut proto = vec![0.0; EMBED_DIM];
        proto[3] = 1.0;
        TrainedRecognizer {
            params: EncoderParams::init(2),
            labels: vec![
                LabelPrototype {
                    label: "ka".into(),
                    zone: Zone::Middle,
                    prototype: proto.clone(),
                },
                LabelPrototype {
                    label: "ि".into(),
                    zone: Zone::Upper,
                    prototype: proto,
                },
            ],
            temperature: 0.1,
        }
    }

    #[test]
    fn round_trip() {
        let r = sample();
        let bytes = r.to_bytes();
        assert_eq!(&bytes[..8], RECOGNIZER_MAGIC);
        assert_eq!(TrainedRecognizer::from_bytes(&bytes).unwrap(), r);
    }

    #[test]
    fn corrupt_files_rejected() {
        let bytes = sample().to_bytes();
        assert!(TrainedRecognizer::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(TrainedRecognizer::from_bytes(&bad).is_err());
        let mut bad = bytes.clone();
        bad[8] = 9;
        assert!(TrainedRecognizer::from_bytes(&bad).is_err());
        let mut long = bytes;
        long.push(0);
        assert!(TrainedRecognizer::from_bytes(&long).is_err());
    }
}
