//! Compact payload encoding: LEB128 varints, little-endian floats and
//! double-double pairs.

use integer_encoding::VarInt;
use twofloat::TwoFloat;

use super::message::Message;
use crate::error::{Error, Result};

#[derive(Debug, Default, Clone)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Writer::default()
    }

    pub fn uvar(&mut self, x: u64) -> &mut Self {
        self.buf.extend_from_slice(&x.encode_var_vec());
        self
    }

    pub fn f64(&mut self, x: f64) -> &mut Self {
        self.buf.extend_from_slice(&x.to_le_bytes());
        self
    }

    pub fn dd(&mut self, x: TwoFloat) -> &mut Self {
        self.f64(x.hi()).f64(x.lo())
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn finish(self) -> Message {
        Message::new(self.buf)
    }
}

#[derive(Debug, Clone)]
pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(msg: &'a Message) -> Self {
        Reader { buf: &msg.payload, pos: 0 }
    }

    pub fn uvar(&mut self) -> Result<u64> {
        let (x, used) = u64::decode_var(&self.buf[self.pos..])
            .ok_or_else(|| Error::Decode(format!("bad varint at byte {}", self.pos)))?;
        self.pos += used;
        Ok(x)
    }

    pub fn usize(&mut self) -> Result<usize> {
        Ok(self.uvar()? as usize)
    }

    pub fn f64(&mut self) -> Result<f64> {
        let end = self.pos + 8;
        let bytes = self
            .buf
            .get(self.pos..end)
            .ok_or_else(|| Error::Decode("truncated f64".into()))?;
        self.pos = end;
        Ok(f64::from_le_bytes(bytes.try_into().unwrap()))
    }

    pub fn dd(&mut self) -> Result<TwoFloat> {
        let hi = self.f64()?;
        let lo = self.f64()?;
        Ok(TwoFloat::new_add(hi, lo))
    }

    pub fn is_done(&self) -> bool {
        self.pos == self.buf.len()
    }
}
