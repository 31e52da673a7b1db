//! Bit-exact sequences with MSB-first byte packing.
//!
//! A [`BitSeq`] stores its bits packed into bytes, bit index 0 in the most
//! significant bit of byte 0, and carries an explicit bit length so that
//! nibble streams and other non-byte-aligned states are first-class values.
//! Unused bits of the final storage byte are always zero, which keeps
//! structural equality meaningful.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitError {
    #[error("bit length {len} is not a multiple of 8")]
    LengthNotByteAligned { len: usize },
    #[error("bit length {len} is odd")]
    OddLength { len: usize },
    #[error("invalid binary digit {0:?}")]
    InvalidDigit(char),
    #[error("{len} bits need {needed} bytes, got {got}")]
    ShortBuffer { len: usize, needed: usize, got: usize },
}

/// Ordered sequence of bits with an explicit length.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitSeq {
    bytes: Vec<u8>,
    len: usize,
}

impl BitSeq {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            bytes: Vec::with_capacity(bits.div_ceil(8)),
            len: 0,
        }
    }

    /// Every byte contributes 8 bits, most significant first.
    pub fn from_bytes(data: &[u8]) -> Self {
        Self {
            bytes: data.to_vec(),
            len: data.len() * 8,
        }
    }

    /// Inverse of [`BitSeq::from_bytes`]; only defined for byte-aligned lengths.
    pub fn to_bytes(&self) -> Result<Vec<u8>, BitError> {
        if self.len % 8 != 0 {
            return Err(BitError::LengthNotByteAligned { len: self.len });
        }
        Ok(self.bytes.clone())
    }

    /// Rebuilds a sequence of `len` bits from its packed form. Bits beyond
    /// `len` in the last byte are cleared.
    pub fn from_packed(packed: &[u8], len: usize) -> Result<Self, BitError> {
        let needed = len.div_ceil(8);
        if packed.len() < needed {
            return Err(BitError::ShortBuffer {
                len,
                needed,
                got: packed.len(),
            });
        }
        let mut bytes = packed[..needed].to_vec();
        if len % 8 != 0 {
            if let Some(last) = bytes.last_mut() {
                *last &= 0xFFu8 << (8 - len % 8);
            }
        }
        Ok(Self { bytes, len })
    }

    /// Packed storage, zero-padded up to the next byte boundary.
    pub fn as_packed(&self) -> &[u8] {
        &self.bytes
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Panics if `index >= len`.
    #[inline]
    pub fn get(&self, index: usize) -> bool {
        assert!(index < self.len, "bit index {index} out of range for length {}", self.len);
        (self.bytes[index >> 3] >> (7 - (index & 7))) & 1 == 1
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        let offset = self.len & 7;
        if offset == 0 {
            self.bytes.push(0);
        }
        if bit {
            let last = self.bytes.len() - 1;
            self.bytes[last] |= 0x80 >> offset;
        }
        self.len += 1;
    }

    /// Appends the low `count` bits of `value`, most significant first.
    #[inline]
    pub fn push_bits(&mut self, value: u64, count: u32) {
        debug_assert!(count <= 64);
        let mut remaining = count;
        while remaining > 0 {
            let offset = (self.len & 7) as u32;
            if offset == 0 {
                self.bytes.push(0);
            }
            let room = 8 - offset;
            let take = room.min(remaining);
            let chunk = ((value >> (remaining - take)) & ((1u64 << take) - 1)) as u8;
            let last = self.bytes.len() - 1;
            self.bytes[last] |= chunk << (room - take);
            self.len += take as usize;
            remaining -= take;
        }
    }

    pub fn extend(&mut self, other: &BitSeq) {
        if self.len % 8 == 0 {
            self.bytes.extend_from_slice(&other.bytes);
            self.len += other.len;
        } else {
            other.iter().for_each(|b| self.push(b));
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Adjacent, non-overlapping pairs from left to right.
    pub fn split_pairs(&self) -> Result<Vec<BitPair>, BitError> {
        if self.len % 2 != 0 {
            return Err(BitError::OddLength { len: self.len });
        }
        Ok((0..self.len / 2)
            .map(|i| BitPair::new(self.get(2 * i), self.get(2 * i + 1)))
            .collect())
    }

    /// Bit `i` of the result is bit `len - 1 - i` of `self`.
    pub fn reverse(&self) -> BitSeq {
        let mut out = BitSeq::with_capacity(self.len);
        for i in (0..self.len).rev() {
            out.push(self.get(i));
        }
        out
    }

    /// Number of set bits.
    pub fn count_ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }
}

impl FromIterator<bool> for BitSeq {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut seq = BitSeq::new();
        for bit in iter {
            seq.push(bit);
        }
        seq
    }
}

/// Parses a string of `0`/`1` digits. ASCII whitespace is skipped so that
/// grouped listings such as `"0101 0000"` can be written directly.
impl FromStr for BitSeq {
    type Err = BitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut seq = BitSeq::new();
        for c in s.chars() {
            match c {
                '0' => seq.push(false),
                '1' => seq.push(true),
                c if c.is_ascii_whitespace() => {}
                c => return Err(BitError::InvalidDigit(c)),
            }
        }
        Ok(seq)
    }
}

impl fmt::Display for BitSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in self.iter() {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitSeq({}; \"{}\")", self.len, self)
    }
}

/// Two adjacent bits; classifies to exactly one of `00`, `01`, `10`, `11`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitPair {
    pub first: bool,
    pub second: bool,
}

impl BitPair {
    pub const fn new(first: bool, second: bool) -> Self {
        Self { first, second }
    }

    /// Two-bit value with `first` as the high bit.
    pub const fn value(self) -> u8 {
        ((self.first as u8) << 1) | self.second as u8
    }

    pub const fn from_value(value: u8) -> Self {
        Self::new(value & 0b10 != 0, value & 0b01 != 0)
    }

    /// `00` or `11`.
    pub const fn is_pure(self) -> bool {
        self.first == self.second
    }

    pub const fn and(self) -> bool {
        self.first & self.second
    }

    pub const fn or(self) -> bool {
        self.first | self.second
    }
}

impl fmt::Display for BitPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.first as u8, self.second as u8)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bits(s: &str) -> BitSeq {
        s.parse().unwrap()
    }

    // Independent byte-to-bit oracle: formats through the standard library.
    fn oracle(data: &[u8]) -> String {
        data.iter().map(|b| format!("{b:08b}")).collect()
    }

    #[test]
    fn from_bytes_examples() {
        assert_eq!(BitSeq::from_bytes(b"P").to_string(), "01010000");
        assert!(BitSeq::from_bytes(b"").is_empty());
        assert_eq!(BitSeq::from_bytes(b"My").to_string(), oracle(b"My"));
        assert_eq!(BitSeq::from_bytes(b"My").to_string(), "0100110101111001");
    }

    #[test]
    fn to_bytes_examples() {
        assert_eq!(bits("01010000").to_bytes().unwrap(), vec![0x50]);
        assert_eq!(BitSeq::new().to_bytes().unwrap(), Vec::<u8>::new());
        assert_eq!(
            bits("10110").to_bytes(),
            Err(BitError::LengthNotByteAligned { len: 5 })
        );
    }

    #[test]
    fn split_pairs_examples() {
        let pairs = bits("01010000").split_pairs().unwrap();
        let rendered: Vec<String> = pairs.iter().map(ToString::to_string).collect();
        assert_eq!(rendered, ["01", "01", "00", "00"]);
        assert_eq!(bits("11").split_pairs().unwrap(), vec![BitPair::new(true, true)]);
        assert_eq!(bits("010").split_pairs(), Err(BitError::OddLength { len: 3 }));
    }

    #[test]
    fn reverse_examples() {
        assert_eq!(bits("1100").reverse(), bits("0011"));
        assert_eq!(bits("0000").reverse(), bits("0000"));
        assert_eq!(bits("10").reverse(), bits("01"));
    }

    #[test]
    fn push_bits_crosses_byte_boundaries() {
        let mut seq = bits("101");
        seq.push_bits(0b1100_1010_01, 10);
        assert_eq!(seq.to_string(), "1011100101001");
        assert_eq!(seq.len(), 13);
    }

    #[test]
    fn from_packed_masks_trailing_bits() {
        let seq = BitSeq::from_packed(&[0xFF], 3).unwrap();
        assert_eq!(seq, bits("111"));
        assert_eq!(seq.as_packed(), &[0xE0]);
        assert!(matches!(
            BitSeq::from_packed(&[0xFF], 9),
            Err(BitError::ShortBuffer { .. })
        ));
    }

    #[test]
    fn parse_rejects_non_binary() {
        assert_eq!("01x".parse::<BitSeq>(), Err(BitError::InvalidDigit('x')));
        assert_eq!(bits("0101 0000"), bits("01010000"));
    }

    #[test]
    fn pair_classification_is_total() {
        for v in 0..4u8 {
            let p = BitPair::from_value(v);
            assert_eq!(p.value(), v);
            assert_eq!(p.is_pure(), v == 0 || v == 3);
        }
    }

    proptest! {
        #[test]
        fn reverse_is_involutive(v in proptest::collection::vec(any::<bool>(), 0..200)) {
            let seq: BitSeq = v.into_iter().collect();
            prop_assert_eq!(seq.reverse().reverse(), seq);
        }

        #[test]
        fn bytes_round_trip(data in proptest::collection::vec(any::<u8>(), 0..128)) {
            let seq = BitSeq::from_bytes(&data);
            prop_assert_eq!(seq.len(), data.len() * 8);
            prop_assert_eq!(seq.to_string(), oracle(&data));
            prop_assert_eq!(seq.to_bytes().unwrap(), data);
        }

        #[test]
        fn pairs_flatten_to_input(v in proptest::collection::vec(any::<bool>(), 0..100)) {
            let mut v = v;
            if v.len() % 2 == 1 { v.pop(); }
            let seq: BitSeq = v.iter().copied().collect();
            let flat: Vec<bool> = seq
                .split_pairs()
                .unwrap()
                .into_iter()
                .flat_map(|p| [p.first, p.second])
                .collect();
            prop_assert_eq!(flat, v);
        }
    }
}
