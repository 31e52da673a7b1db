//! Indicator sideband: the positions and directions of mixed bit pairs.
//!
//! Wire layout (all of it omitted when the sideband is empty):
//!
//! ```text
//! varint  entry count (> 0)
//! varint  gap per entry, gap = position - (previous position + 1), first relative to 0
//! bits    one direction bit per entry, RISE = 1, FALL = 0, MSB-first, zero padded
//! ```
//!
//! Varints are unsigned LEB128 in minimal form.

use std::fmt;

use thiserror::Error;

use crate::bitstream::BitPair;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SidebandError {
    #[error("sideband positions must be strictly increasing ({previous} then {next})")]
    NotIncreasing { previous: u64, next: u64 },
    #[error("sideband ends after {offset} bytes, more data expected")]
    Truncated { offset: usize },
    #[error("varint at byte {offset} overflows 64 bits or is not minimal")]
    BadVarint { offset: usize },
    #[error("{count} trailing bytes after sideband")]
    TrailingBytes { count: usize },
    #[error("non-zero padding after direction bits")]
    NonZeroPadding,
    #[error("explicit zero entry count")]
    ZeroCount,
}

/// Direction of a mixed pair: `01` rises (`/`), `10` falls (`\`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Rise,
    Fall,
}

impl Direction {
    /// `None` for pure pairs.
    pub fn of_pair(pair: BitPair) -> Option<Self> {
        match (pair.first, pair.second) {
            (false, true) => Some(Direction::Rise),
            (true, false) => Some(Direction::Fall),
            _ => None,
        }
    }

    pub fn pair(self) -> BitPair {
        match self {
            Direction::Rise => BitPair::new(false, true),
            Direction::Fall => BitPair::new(true, false),
        }
    }

    /// Stored bit: `/` as 1, `\` as 0.
    pub fn bit(self) -> bool {
        self == Direction::Rise
    }

    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Direction::Rise
        } else {
            Direction::Fall
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Direction::Rise => '/',
            Direction::Fall => '\\',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SidebandEntry {
    pub position: u64,
    pub direction: Direction,
}

/// Ordered list of mixed-pair positions, strictly increasing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct IndicatorSideband {
    entries: Vec<SidebandEntry>,
}

impl IndicatorSideband {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries<I>(entries: I) -> Result<Self, SidebandError>
    where
        I: IntoIterator<Item = (u64, Direction)>,
    {
        let mut sideband = Self::new();
        for (position, direction) in entries {
            sideband.push(position, direction)?;
        }
        Ok(sideband)
    }

    pub fn push(&mut self, position: u64, direction: Direction) -> Result<(), SidebandError> {
        if let Some(last) = self.entries.last() {
            if position <= last.position {
                return Err(SidebandError::NotIncreasing {
                    previous: last.position,
                    next: position,
                });
            }
        }
        self.entries.push(SidebandEntry {
            position,
            direction,
        });
        Ok(())
    }

    pub(crate) fn with_capacity(capacity: usize) -> Self {
        Self {
            entries: Vec::with_capacity(capacity),
        }
    }

    #[inline]
    pub(crate) fn push_unchecked(&mut self, position: u64, direction: Direction) {
        debug_assert!(self.entries.last().is_none_or(|e| e.position < position));
        self.entries.push(SidebandEntry {
            position,
            direction,
        });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[SidebandEntry] {
        &self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, SidebandEntry> {
        self.entries.iter()
    }

    pub fn serialize(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.serialized_len());
        self.serialize_into(&mut out);
        out
    }

    pub fn serialize_into(&self, out: &mut Vec<u8>) {
        if self.entries.is_empty() {
            return;
        }
        write_varint(out, self.entries.len() as u64);
        let mut expected = 0u64;
        for entry in &self.entries {
            write_varint(out, entry.position - expected);
            expected = entry.position + 1;
        }
        for chunk in self.entries.chunks(8) {
            let mut byte = 0u8;
            for (i, entry) in chunk.iter().enumerate() {
                if entry.direction.bit() {
                    byte |= 0x80 >> i;
                }
            }
            out.push(byte);
        }
    }

    /// Exact size of [`IndicatorSideband::serialize`] in bytes.
    pub fn serialized_len(&self) -> usize {
        if self.entries.is_empty() {
            return 0;
        }
        let mut expected = 0u64;
        let gaps: usize = self
            .entries
            .iter()
            .map(|e| {
                let n = varint_len(e.position - expected);
                expected = e.position + 1;
                n
            })
            .sum();
        varint_len(self.entries.len() as u64) + gaps + self.entries.len().div_ceil(8)
    }

    /// Parses a complete serialized sideband; every byte of `data` must be used.
    pub fn parse(data: &[u8]) -> Result<Self, SidebandError> {
        if data.is_empty() {
            return Ok(Self::new());
        }
        let mut offset = 0;
        let count = read_varint(data, &mut offset)?;
        if count == 0 {
            return Err(SidebandError::ZeroCount);
        }
        // Each entry needs at least one gap byte, which bounds the allocation.
        if count > data.len() as u64 {
            return Err(SidebandError::Truncated { offset: data.len() });
        }
        let count = count as usize;
        let mut entries = Vec::with_capacity(count);
        let mut expected = 0u64;
        for _ in 0..count {
            let gap = read_varint(data, &mut offset)?;
            let position = expected
                .checked_add(gap)
                .filter(|p| *p < u64::MAX)
                .ok_or(SidebandError::BadVarint { offset })?;
            entries.push(SidebandEntry {
                position,
                direction: Direction::Fall,
            });
            expected = position + 1;
        }
        let dir_bytes = count.div_ceil(8);
        let end = offset + dir_bytes;
        if end > data.len() {
            return Err(SidebandError::Truncated { offset: data.len() });
        }
        if end < data.len() {
            return Err(SidebandError::TrailingBytes {
                count: data.len() - end,
            });
        }
        let dirs = &data[offset..end];
        if count % 8 != 0 && dirs[dir_bytes - 1] & (0xFF >> (count % 8)) != 0 {
            return Err(SidebandError::NonZeroPadding);
        }
        for (i, entry) in entries.iter_mut().enumerate() {
            entry.direction = Direction::from_bit(dirs[i / 8] & (0x80 >> (i % 8)) != 0);
        }
        Ok(Self { entries })
    }
}

impl<'a> IntoIterator for &'a IndicatorSideband {
    type Item = &'a SidebandEntry;
    type IntoIter = std::slice::Iter<'a, SidebandEntry>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}

impl fmt::Display for IndicatorSideband {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}:{}", e.position, e.direction.symbol())?;
        }
        f.write_str("}")
    }
}

#[inline]
pub(crate) fn write_varint(out: &mut Vec<u8>, mut value: u64) {
    while value >= 0x80 {
        out.push((value as u8) | 0x80);
        value >>= 7;
    }
    out.push(value as u8);
}

pub(crate) fn varint_len(value: u64) -> usize {
    let bits = 64 - value.leading_zeros() as usize;
    bits.div_ceil(7).max(1)
}

#[inline]
pub(crate) fn read_varint(data: &[u8], offset: &mut usize) -> Result<u64, SidebandError> {
    let start = *offset;
    if let Some(&byte) = data.get(start) {
        if byte < 0x80 {
            *offset += 1;
            return Ok(byte as u64);
        }
    }
    let mut value = 0u64;
    let mut shift = 0u32;
    loop {
        let byte = *data
            .get(*offset)
            .ok_or(SidebandError::Truncated { offset: *offset })?;
        *offset += 1;
        let low = (byte & 0x7F) as u64;
        if shift == 63 && low > 1 {
            return Err(SidebandError::BadVarint { offset: start });
        }
        value |= low << shift;
        if byte & 0x80 == 0 {
            if byte == 0 && shift > 0 {
                return Err(SidebandError::BadVarint { offset: start });
            }
            return Ok(value);
        }
        shift += 7;
        if shift > 63 {
            return Err(SidebandError::BadVarint { offset: start });
        }
    }
}
