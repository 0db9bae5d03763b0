//! Byte-level helpers shared by the wire format and the checkpoint formats.
//! Integers are big-endian, reals little-endian IEEE-754 doubles.

use std::fmt;

/// Decoding failure at a byte offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeError {
    pub offset: usize,
    pub reason: String,
}

impl fmt::Display for DecodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at byte offset {}: {}", self.offset, self.reason)
    }
}

impl std::error::Error for DecodeError {}

#[derive(Debug, Default)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn u8(&mut self, v: u8) -> &mut Self {
        self.buf.push(v);
        self
    }

    pub fn u16(&mut self, v: u16) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn u32(&mut self, v: u32) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    /// Writes a double; `-0.0` is written as `+0.0` so encodings stay canonical.
    pub fn f64(&mut self, v: f64) -> &mut Self {
        let v = if v == 0.0 { 0.0 } else { v };
        self.buf.extend_from_slice(&v.to_le_bytes());
        self
    }

    pub fn f64s(&mut self, vs: &[f64]) -> &mut Self {
        for &v in vs {
            self.f64(v);
        }
        self
    }

    pub fn str(&mut self, s: &str) -> &mut Self {
        self.u32(s.len() as u32);
        self.buf.extend_from_slice(s.as_bytes());
        self
    }

    pub fn bytes(&mut self, b: &[u8]) -> &mut Self {
        self.buf.extend_from_slice(b);
        self
    }

    /// Packs booleans eight per byte, least significant bit first.
    pub fn bits(&mut self, bits: &[bool]) -> &mut Self {
        for chunk in bits.chunks(8) {
            let mut byte = 0u8;
            for (i, &b) in chunk.iter().enumerate() {
                if b {
                    byte |= 1 << i;
                }
            }
            self.buf.push(byte);
        }
        self
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub fn with_offset(buf: &'a [u8], pos: usize) -> Self {
        Self { buf, pos }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn error(&self, reason: impl Into<String>) -> DecodeError {
        DecodeError { offset: self.pos, reason: reason.into() }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        if self.remaining() < n {
            return Err(self.error(format!("truncated: need {n} bytes, {} left", self.remaining())));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn u8(&mut self) -> Result<u8, DecodeError> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16, DecodeError> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn u32(&mut self) -> Result<u32, DecodeError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64, DecodeError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f64(&mut self) -> Result<f64, DecodeError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f64s(&mut self, n: usize) -> Result<Vec<f64>, DecodeError> {
        self.len_check(n, 8)?;
        (0..n).map(|_| self.f64()).collect()
    }

    pub fn str(&mut self) -> Result<String, DecodeError> {
        let len = self.u32()? as usize;
        let at = self.pos;
        let raw = self.take(len)?;
        String::from_utf8(raw.to_vec())
            .map_err(|_| DecodeError { offset: at, reason: "string is not valid UTF-8".into() })
    }

    pub fn bits(&mut self, n: usize) -> Result<Vec<bool>, DecodeError> {
        let at = self.pos;
        let raw = self.take(n.div_ceil(8))?;
        if n % 8 != 0 && raw[raw.len() - 1] >> (n % 8) != 0 {
            return Err(DecodeError { offset: at + raw.len() - 1, reason: "nonzero padding bits".into() });
        }
        Ok((0..n).map(|i| raw[i / 8] & (1 << (i % 8)) != 0).collect())
    }

    /// Fails early when a declared element count cannot fit in what is left.
    pub fn len_check(&self, count: usize, elem: usize) -> Result<(), DecodeError> {
        match count.checked_mul(elem) {
            Some(need) if need <= self.remaining() => Ok(()),
            _ => Err(self.error(format!("declared {count} elements do not fit in {} bytes", self.remaining()))),
        }
    }

    pub fn expect_end(&self) -> Result<(), DecodeError> {
        if self.remaining() != 0 {
            return Err(self.error(format!("{} trailing bytes", self.remaining())));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_packing() {
        let mut w = Writer::new();
        w.bits(&[true, false, true, true, false, false, false, false, true]);
        let b = w.finish();
        assert_eq!(b, vec![0b0000_1101, 0b0000_0001]);
        assert_eq!(Reader::new(&b).bits(9).unwrap()[8], true);
    }

    #[test]
    fn padding_must_be_zero() {
        assert!(Reader::new(&[0b1000_0000]).bits(3).is_err());
    }

    #[test]
    fn negative_zero_is_canonical() {
        let mut a = Writer::new();
        a.f64(-0.0);
        let mut b = Writer::new();
        b.f64(0.0);
        assert_eq!(a.finish(), b.finish());
    }

    #[test]
    fn truncation_reports_offset() {
        let err = Reader::with_offset(&[0, 0, 0], 1).u32().unwrap_err();
        assert_eq!(err.offset, 1);
    }
}
