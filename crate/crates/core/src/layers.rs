//! The four transform layers and their inverses.
//!
//! 1. bytes to bits (MSB-first);
//! 2. and 3. per byte, the four adjacent pairs are ANDed and ORed and each
//!    result nibble is stored reversed, giving two half-length channels;
//! 4. every pair collapses to its first bit, and mixed pairs (`01`, `10`)
//!    are recorded in an [`IndicatorSideband`] so the collapse stays
//!    invertible.

use std::fmt;

use thiserror::Error;

use crate::bitstream::{BitError, BitPair, BitSeq};
use crate::sideband::{Direction, IndicatorSideband};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LayerError {
    #[error(transparent)]
    Bits(#[from] BitError),
    #[error("bit length {len} is not a multiple of 8")]
    NotByteAligned { len: usize },
    #[error("bit length {len} is odd")]
    OddLength { len: usize },
    #[error("sideband position {position} is outside {pairs} pairs")]
    PositionOutOfRange { position: u64, pairs: usize },
    #[error("AND bit set without OR bit at pair {position}")]
    DominanceViolated { position: usize },
    #[error("sideband does not match the mixed pairs: {reason}")]
    SidebandMismatch { reason: String },
    #[error("channel lengths {and_len}/{or_len} are unequal or not whole nibbles")]
    ChannelShape { and_len: usize, or_len: usize },
    #[error("code {code:#04x} is not a valid escape")]
    InvalidEscape { code: u8 },
}

/// Classification of a bit pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairSymbol {
    Pure0,
    Pure1,
    Rise,
    Fall,
}

impl PairSymbol {
    pub fn of(pair: BitPair) -> Self {
        match (pair.first, pair.second) {
            (false, false) => PairSymbol::Pure0,
            (true, true) => PairSymbol::Pure1,
            (false, true) => PairSymbol::Rise,
            (true, false) => PairSymbol::Fall,
        }
    }

    pub fn pair(self) -> BitPair {
        match self {
            PairSymbol::Pure0 => BitPair::new(false, false),
            PairSymbol::Pure1 => BitPair::new(true, true),
            PairSymbol::Rise => BitPair::new(false, true),
            PairSymbol::Fall => BitPair::new(true, false),
        }
    }

    pub fn is_pure(self) -> bool {
        matches!(self, PairSymbol::Pure0 | PairSymbol::Pure1)
    }

    pub fn direction(self) -> Option<Direction> {
        match self {
            PairSymbol::Rise => Some(Direction::Rise),
            PairSymbol::Fall => Some(Direction::Fall),
            _ => None,
        }
    }
}

impl fmt::Display for PairSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairSymbol::Pure0 => "0",
            PairSymbol::Pure1 => "1",
            PairSymbol::Rise => "/",
            PairSymbol::Fall => "\\",
        })
    }
}

/// Parallel AND/OR channels, one reversed nibble per input byte in each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelPair {
    pub and_channel: BitSeq,
    pub or_channel: BitSeq,
}

impl ChannelPair {
    /// Number of bit pairs covered, equal to each channel's length.
    pub fn pair_count(&self) -> usize {
        self.and_channel.len()
    }

    /// Channel positions holding a mixed pair (AND 0, OR 1), in pair order.
    pub fn mixed_pair_positions(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (j, (&a, &o)) in self
            .and_channel
            .as_packed()
            .iter()
            .zip(self.or_channel.as_packed())
            .enumerate()
        {
            // two nibbles per packed byte; the high nibble is byte 2j
            for (half, shift) in [(0usize, 4u32), (1, 0)] {
                let nibble_index = 2 * j + half;
                if nibble_index * 4 >= self.pair_count() {
                    break;
                }
                let mixed = UNREVERSE[(((o & !a) >> shift) & 0xF) as usize];
                for k in 0..4 {
                    if mixed & (0x8 >> k) != 0 {
                        out.push(nibble_index * 4 + k);
                    }
                }
            }
        }
        out
    }

    /// Nibble-wise rendering, e.g. `"0000 0011"`.
    pub fn nibbles(channel: &BitSeq) -> Vec<String> {
        let text = channel.to_string();
        text.as_bytes()
            .chunks(4)
            .map(|c| String::from_utf8_lossy(c).into_owned())
            .collect()
    }

    /// The channels with nibble order reversed: the last input byte first.
    /// This is the whole-stream reversal of the pair-AND and pair-OR
    /// sequences, the order in which a LIFO stack of nibbles is read back.
    pub fn stacked(&self) -> ChannelPair {
        let reorder = |seq: &BitSeq| -> BitSeq {
            let n = seq.len() / 4;
            let mut out = BitSeq::with_capacity(seq.len());
            for i in (0..n).rev() {
                for k in 0..4 {
                    out.push(seq.get(4 * i + k));
                }
            }
            out
        };
        ChannelPair {
            and_channel: reorder(&self.and_channel),
            or_channel: reorder(&self.or_channel),
        }
    }
}

/// Collapsed stream plus the sideband needed to undo the collapse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollapsedStream {
    pub collapsed: BitSeq,
    pub sideband: IndicatorSideband,
}

// Per-byte lookup tables. Pair k of a byte sits at bits (7-2k, 6-2k).
const fn pair_of(byte: u8, k: u32) -> u8 {
    (byte >> (6 - 2 * k)) & 0b11
}

const fn build_and_nibbles() -> [u8; 256] {
    let mut t = [0u8; 256];
    let mut b = 0;
    while b < 256 {
        let mut k = 0;
        let mut nib = 0u8;
        while k < 4 {
            if pair_of(b as u8, k) == 0b11 {
                // reversed: pair k lands at nibble bit position k from the MSB end reversed
                nib |= 1 << k;
            }
            k += 1;
        }
        t[b] = nib;
        b += 1;
    }
    t
}

const fn build_or_nibbles() -> [u8; 256] {
    let mut t = [0u8; 256];
    let mut b = 0;
    while b < 256 {
        let mut k = 0;
        let mut nib = 0u8;
        while k < 4 {
            if pair_of(b as u8, k) != 0 {
                nib |= 1 << k;
            }
            k += 1;
        }
        t[b] = nib;
        b += 1;
    }
    t
}

const fn build_first_bits() -> [u8; 256] {
    let mut t = [0u8; 256];
    let mut b = 0;
    while b < 256 {
        let mut k = 0;
        let mut nib = 0u8;
        while k < 4 {
            if pair_of(b as u8, k) & 0b10 != 0 {
                nib |= 0x8 >> k;
            }
            k += 1;
        }
        t[b] = nib;
        b += 1;
    }
    t
}

const fn build_mixed_mask() -> [u8; 256] {
    let mut t = [0u8; 256];
    let mut b = 0;
    while b < 256 {
        let mut k = 0;
        let mut nib = 0u8;
        while k < 4 {
            let p = pair_of(b as u8, k);
            if p == 0b01 || p == 0b10 {
                nib |= 0x8 >> k;
            }
            k += 1;
        }
        t[b] = nib;
        b += 1;
    }
    t
}

const fn build_unreverse() -> [u8; 16] {
    let mut t = [0u8; 16];
    let mut n = 0;
    while n < 16 {
        let mut r = 0u8;
        let mut k = 0;
        while k < 4 {
            if n & (1 << k) != 0 {
                r |= 0x8 >> k;
            }
            k += 1;
        }
        t[n] = r;
        n += 1;
    }
    t
}

/// Byte → reversed pair-AND nibble.
const AND_NIBBLE: [u8; 256] = build_and_nibbles();
/// Byte → reversed pair-OR nibble.
const OR_NIBBLE: [u8; 256] = build_or_nibbles();
/// Byte → nibble of first bits of each pair, in pair order.
const FIRST_BITS: [u8; 256] = build_first_bits();
/// Byte → nibble flagging mixed pairs, in pair order.
const MIXED_MASK: [u8; 256] = build_mixed_mask();
/// Byte → (direction bits of its mixed pairs, RISE = 1, right-aligned; count).
const DIRECTION_BITS: [(u8, u8); 256] = build_direction_bits();
/// 4-bit reversal (self-inverse).
const UNREVERSE: [u8; 16] = build_unreverse();

const fn build_direction_bits() -> [(u8, u8); 256] {
    let mut t = [(0u8, 0u8); 256];
    let mut n = 0;
    while n < 256 {
        let (mut value, mut count) = (0u8, 0u8);
        let mut k = 0;
        while k < 4 {
            let pair = (n >> (6 - 2 * k)) & 0b11;
            if pair == 0b01 || pair == 0b10 {
                value = (value << 1) | (pair == 0b01) as u8;
                count += 1;
            }
            k += 1;
        }
        t[n] = (value, count);
        n += 1;
    }
    t
}

/// Spreads a 4-bit pure/first-bit nibble into a byte of pairs: bit k set → pair k = `11`.
const fn spread(nibble: u8) -> u8 {
    let mut out = 0u8;
    let mut k = 0;
    while k < 4 {
        if nibble & (0x8 >> k) != 0 {
            out |= 0b11 << (6 - 2 * k);
        }
        k += 1;
    }
    out
}

fn packed_nibbles(nibbles: Vec<u8>) -> Vec<u8> {
    nibbles
        .chunks(2)
        .map(|c| (c[0] << 4) | c.get(1).copied().unwrap_or(0))
        .collect()
}

/// Layer 1: characters to bits, eight per byte.
pub fn layer1_encode(text: &[u8]) -> BitSeq {
    BitSeq::from_bytes(text)
}

/// Inverse of layer 1.
pub fn layer1_decode(bits: &BitSeq) -> Result<Vec<u8>, LayerError> {
    bits.to_bytes().map_err(|_| LayerError::NotByteAligned { len: bits.len() })
}

/// Layers 2 and 3: the reversed pair-AND and pair-OR nibble of every byte,
/// concatenated in byte order.
pub fn layer23_channels(bits: &BitSeq) -> Result<ChannelPair, LayerError> {
    if bits.len() % 8 != 0 {
        return Err(LayerError::NotByteAligned { len: bits.len() });
    }
    let bytes = bits.as_packed();
    let pairs = bits.len() / 2;
    let and: Vec<u8> = bytes.iter().map(|&b| AND_NIBBLE[b as usize]).collect();
    let or: Vec<u8> = bytes.iter().map(|&b| OR_NIBBLE[b as usize]).collect();
    Ok(ChannelPair {
        and_channel: BitSeq::from_packed(&packed_nibbles(and), pairs)?,
        or_channel: BitSeq::from_packed(&packed_nibbles(or), pairs)?,
    })
}

/// Rebuilds the pair stream from the two channels and the directions of
/// the mixed positions.
pub fn channels_to_pairs(
    channels: &ChannelPair,
    directions: &IndicatorSideband,
) -> Result<BitSeq, LayerError> {
    let and_len = channels.and_channel.len();
    let or_len = channels.or_channel.len();
    if and_len != or_len || and_len % 4 != 0 {
        return Err(LayerError::ChannelShape { and_len, or_len });
    }
    let nibble_count = and_len / 4;
    let and_bytes = channels.and_channel.as_packed();
    let or_bytes = channels.or_channel.as_packed();
    let mut entries = directions.iter();
    let mut out = Vec::with_capacity(nibble_count);
    for j in 0..nibble_count {
        let shift = if j % 2 == 0 { 4 } else { 0 };
        let a = UNREVERSE[((and_bytes[j / 2] >> shift) & 0xF) as usize];
        let o = UNREVERSE[((or_bytes[j / 2] >> shift) & 0xF) as usize];
        let violated = a & !o & 0xF;
        if violated != 0 {
            return Err(LayerError::DominanceViolated {
                position: 4 * j + violated.leading_zeros() as usize - 4,
            });
        }
        let mut byte = spread(a);
        let mixed = o & !a & 0xF;
        if mixed != 0 {
            for k in 0..4 {
                if mixed & (0x8 >> k) == 0 {
                    continue;
                }
                let position = (4 * j + k) as u64;
                let entry = entries.next().ok_or_else(|| LayerError::SidebandMismatch {
                    reason: format!("no direction for mixed pair {position}"),
                })?;
                if entry.position != position {
                    return Err(LayerError::SidebandMismatch {
                        reason: format!(
                            "direction recorded at {} but mixed pair is at {position}",
                            entry.position
                        ),
                    });
                }
                byte |= entry.direction.pair().value() << (6 - 2 * k);
            }
        }
        out.push(byte);
    }
    if let Some(extra) = entries.next() {
        return Err(LayerError::SidebandMismatch {
            reason: format!("direction at {} has no mixed pair", extra.position),
        });
    }
    Ok(BitSeq::from_bytes(&out))
}

/// Direction bits (RISE = `1`) of the mixed pairs in `bits`, in pair order.
/// This is the mode-0 sideband without positions, which the channels imply.
pub fn mixed_direction_bits(bits: &BitSeq) -> Result<BitSeq, LayerError> {
    if bits.len() % 2 != 0 {
        return Err(LayerError::OddLength { len: bits.len() });
    }
    let whole = bits.len() / 8;
    let mut packed = Vec::with_capacity(bits.len() / 16 + 1);
    let (mut acc, mut held, mut total) = (0u64, 0u32, 0usize);
    for &b in &bits.as_packed()[..whole] {
        let (value, count) = DIRECTION_BITS[b as usize];
        acc = (acc << count) | value as u64;
        held += count as u32;
        total += count as usize;
        if held >= 8 {
            held -= 8;
            packed.push((acc >> held) as u8);
        }
    }
    if held > 0 {
        packed.push((acc << (8 - held)) as u8);
    }
    let mut out = BitSeq::from_packed(&packed, total)?;
    for i in whole * 4..bits.len() / 2 {
        let pair = BitPair::new(bits.get(2 * i), bits.get(2 * i + 1));
        if let Some(dir) = Direction::of_pair(pair) {
            out.push(dir.bit());
        }
    }
    Ok(out)
}

/// Like [`channels_to_pairs`], with the directions given as bare bits
/// (RISE = `1`) consumed one per mixed pair.
pub fn channels_with_direction_bits(
    channels: &ChannelPair,
    directions: &BitSeq,
) -> Result<BitSeq, LayerError> {
    let and_len = channels.and_channel.len();
    let or_len = channels.or_channel.len();
    if and_len != or_len || and_len % 4 != 0 {
        return Err(LayerError::ChannelShape { and_len, or_len });
    }
    let nibble_count = and_len / 4;
    let and_bytes = channels.and_channel.as_packed();
    let or_bytes = channels.or_channel.as_packed();
    let mut next = 0usize;
    let mut out = Vec::with_capacity(nibble_count);
    for j in 0..nibble_count {
        let shift = if j % 2 == 0 { 4 } else { 0 };
        let a = UNREVERSE[((and_bytes[j / 2] >> shift) & 0xF) as usize];
        let o = UNREVERSE[((or_bytes[j / 2] >> shift) & 0xF) as usize];
        let violated = a & !o & 0xF;
        if violated != 0 {
            return Err(LayerError::DominanceViolated {
                position: 4 * j + violated.leading_zeros() as usize - 4,
            });
        }
        let mut byte = spread(a);
        let mixed = o & !a & 0xF;
        if mixed != 0 {
            for k in 0..4 {
                if mixed & (0x8 >> k) == 0 {
                    continue;
                }
                if next >= directions.len() {
                    return Err(LayerError::SidebandMismatch {
                        reason: format!("no direction for mixed pair {}", 4 * j + k),
                    });
                }
                let rise = directions.get(next);
                next += 1;
                byte |= if rise { 0b01 } else { 0b10 } << (6 - 2 * k);
            }
        }
        out.push(byte);
    }
    if next != directions.len() {
        return Err(LayerError::SidebandMismatch {
            reason: format!("{} direction bits for {next} mixed pairs", directions.len()),
        });
    }
    Ok(BitSeq::from_bytes(&out))
}

/// Layer 4: one bit per pair (the pair's first bit, i.e. the CASE-table
/// AND output) plus the mixed-pair sideband.
pub fn layer4_collapse(bits: &BitSeq) -> Result<CollapsedStream, LayerError> {
    if bits.len() % 2 != 0 {
        return Err(LayerError::OddLength { len: bits.len() });
    }
    let pairs = bits.len() / 2;
    let whole = bits.len() / 8;
    let bytes = bits.as_packed();
    let mut nibbles = Vec::with_capacity(whole);
    let mixed_total: u32 = bytes[..whole]
        .iter()
        .map(|&b| MIXED_MASK[b as usize].count_ones())
        .sum();
    let mut sideband = IndicatorSideband::with_capacity(mixed_total as usize);
    for (j, &b) in bytes[..whole].iter().enumerate() {
        nibbles.push(FIRST_BITS[b as usize]);
        let mixed = MIXED_MASK[b as usize];
        if mixed != 0 {
            let first = FIRST_BITS[b as usize];
            let mut rest = mixed;
            while rest != 0 {
                let k = rest.leading_zeros() - 4;
                let bit = 0x8 >> k;
                rest &= !bit;
                let dir = if first & bit != 0 {
                    Direction::Fall
                } else {
                    Direction::Rise
                };
                sideband.push_unchecked((4 * j) as u64 + k as u64, dir);
            }
        }
    }
    let mut collapsed = BitSeq::from_packed(&packed_nibbles(nibbles), whole * 4)?;
    for i in whole * 4..pairs {
        let pair = BitPair::new(bits.get(2 * i), bits.get(2 * i + 1));
        collapsed.push(pair.first);
        if let Some(dir) = Direction::of_pair(pair) {
            sideband.push_unchecked(i as u64, dir);
        }
    }
    Ok(CollapsedStream {
        collapsed,
        sideband,
    })
}

/// Inverse of [`layer4_collapse`]. Each sideband direction must agree with
/// the collapsed bit it annotates (`0` rises, `1` falls).
pub fn layer4_expand(stream: &CollapsedStream) -> Result<BitSeq, LayerError> {
    let pairs = stream.collapsed.len();
    let mut mixed = vec![0u8; pairs.div_ceil(4)];
    for entry in &stream.sideband {
        if entry.position >= pairs as u64 {
            return Err(LayerError::PositionOutOfRange {
                position: entry.position,
                pairs,
            });
        }
        let p = entry.position as usize;
        let first = stream.collapsed.get(p);
        if first != (entry.direction == Direction::Fall) {
            return Err(LayerError::SidebandMismatch {
                reason: format!(
                    "direction {} at {p} contradicts collapsed bit {}",
                    entry.direction.symbol(),
                    first as u8
                ),
            });
        }
        mixed[p / 4] |= 0x8 >> (p % 4);
    }
    let whole = pairs / 4;
    let packed = stream.collapsed.as_packed();
    let mut out = Vec::with_capacity(whole);
    for (j, &m) in mixed[..whole].iter().enumerate() {
        let first = if j % 2 == 0 {
            packed[j / 2] >> 4
        } else {
            packed[j / 2] & 0xF
        };
        // pure pairs copy the first bit; mixed pairs flip the second bit
        out.push(spread(first) ^ (spread(m) & 0b0101_0101));
    }
    let mut bits = BitSeq::from_bytes(&out);
    for i in whole * 4..pairs {
        let first = stream.collapsed.get(i);
        let is_mixed = mixed[i / 4] & (0x8 >> (i % 4)) != 0;
        bits.push(first);
        bits.push(first ^ is_mixed);
    }
    Ok(bits)
}

/// Supported word lengths for padding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WordLength {
    W8,
    W16,
    W32,
    W64,
}

impl WordLength {
    pub fn bits(self) -> usize {
        match self {
            WordLength::W8 => 8,
            WordLength::W16 => 16,
            WordLength::W32 => 32,
            WordLength::W64 => 64,
        }
    }
}

impl TryFrom<usize> for WordLength {
    type Error = usize;

    fn try_from(bits: usize) -> Result<Self, Self::Error> {
        match bits {
            8 => Ok(WordLength::W8),
            16 => Ok(WordLength::W16),
            32 => Ok(WordLength::W32),
            64 => Ok(WordLength::W64),
            other => Err(other),
        }
    }
}

/// Appends zero bits up to the next multiple of `word`; returns the pad count.
pub fn pad_to_word(bits: &BitSeq, word: WordLength) -> (BitSeq, usize) {
    let w = word.bits();
    let pad = (w - bits.len() % w) % w;
    let mut out = bits.clone();
    for _ in 0..pad {
        out.push(false);
    }
    (out, pad)
}

/// Removes `pad` trailing bits added by [`pad_to_word`].
pub fn strip_padding(bits: &BitSeq, pad: usize) -> BitSeq {
    let keep = bits.len().saturating_sub(pad);
    bits.iter().take(keep).collect()
}

/// A byte after control-character remapping; `escaped` marks a substitute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RemappedChar {
    pub code: u8,
    pub escaped: bool,
}

/// First code of the escape region; control code `c` maps to `ESCAPE_BASE + c`.
pub const ESCAPE_BASE: u8 = 161;
/// Substitute for DEL (127).
pub const ESCAPE_DEL: u8 = 193;

/// Maps control codes 0-31 and 127 to printable substitutes.
///
/// NUL becomes a space; the other control codes land in 162..=193, which
/// the transform never needs for printable text. Every other code maps to
/// itself. The escape flag makes the mapping invertible.
pub fn remap_control_char(code: u8) -> RemappedChar {
    match code {
        0 => RemappedChar {
            code: b' ',
            escaped: true,
        },
        1..=31 => RemappedChar {
            code: ESCAPE_BASE + code,
            escaped: true,
        },
        127 => RemappedChar {
            code: ESCAPE_DEL,
            escaped: true,
        },
        _ => RemappedChar {
            code,
            escaped: false,
        },
    }
}

pub fn restore_control_char(c: RemappedChar) -> Result<u8, LayerError> {
    if !c.escaped {
        return Ok(c.code);
    }
    match c.code {
        b' ' => Ok(0),
        ESCAPE_DEL => Ok(127),
        code if (ESCAPE_BASE + 1..ESCAPE_BASE + 32).contains(&code) => Ok(code - ESCAPE_BASE),
        code => Err(LayerError::InvalidEscape { code }),
    }
}
