//! The `.fbar` container.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "FBAR"
//! 4       1     version (0x01)
//! 5       1     mode: 0 = channels, 1 = collapsed
//! 6       8     original bit length, little-endian
//! 14      4     CRC-32 (IEEE) of the original bytes, little-endian
//! 18      ..    payload
//! ```
//!
//! Mode 0 payload: AND channel, OR channel and one direction bit per mixed
//! pair (RISE = 1), each section zero-padded to a byte boundary. The number
//! of direction bits is the number of positions where AND = 0 and OR = 1.
//!
//! Mode 1 payload: the collapsed stream padded to a byte boundary, followed
//! by the serialized [`IndicatorSideband`].

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::bitstream::BitSeq;
use crate::layers::{self, ChannelPair, CollapsedStream, LayerError};
use crate::sideband::{Direction, IndicatorSideband, SidebandEntry, SidebandError};

pub const MAGIC: [u8; 4] = *b"FBAR";
pub const VERSION: u8 = 0x01;
pub const HEADER_LEN: usize = 18;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContainerError {
    #[error("bad magic {found:02x?}")]
    BadMagic { found: Vec<u8> },
    #[error("unsupported version {0}")]
    UnsupportedVersion(u8),
    #[error("unknown payload mode {0}")]
    UnknownMode(u8),
    #[error("original bit length {0} is not a whole number of bytes")]
    InvalidBitLength(u64),
    #[error("payload truncated: needed {needed} bytes, {available} available")]
    TruncatedPayload { needed: usize, available: usize },
    #[error("{count} unexpected bytes after payload")]
    TrailingBytes { count: usize },
    #[error("corrupt payload: {reason}")]
    CorruptPayload { reason: String },
    #[error("sideband mismatch: {reason}")]
    SidebandMismatch { reason: String },
    #[error("checksum mismatch: header {expected:#010x}, decoded data {actual:#010x}")]
    ChecksumMismatch { expected: u32, actual: u32 },
}

impl ContainerError {
    /// True for errors raised by damaged payload bytes, as opposed to a
    /// foreign or unsupported file.
    pub fn is_integrity_failure(&self) -> bool {
        matches!(
            self,
            ContainerError::TruncatedPayload { .. }
                | ContainerError::TrailingBytes { .. }
                | ContainerError::CorruptPayload { .. }
                | ContainerError::SidebandMismatch { .. }
                | ContainerError::ChecksumMismatch { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    Channels,
    #[default]
    Collapsed,
}

impl Mode {
    pub fn byte(self) -> u8 {
        match self {
            Mode::Channels => 0,
            Mode::Collapsed => 1,
        }
    }

    pub fn from_byte(b: u8) -> Result<Self, ContainerError> {
        match b {
            0 => Ok(Mode::Channels),
            1 => Ok(Mode::Collapsed),
            other => Err(ContainerError::UnknownMode(other)),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Channels => "channels",
            Mode::Collapsed => "collapsed",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "channels" | "0" => Ok(Mode::Channels),
            "collapsed" | "1" => Ok(Mode::Collapsed),
            other => Err(format!("unknown mode {other:?} (expected channels or collapsed)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    Channels {
        channels: ChannelPair,
        /// One bit per mixed pair, in pair order.
        directions: BitSeq,
    },
    Collapsed(CollapsedStream),
}

/// A parsed or freshly encoded container.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FbarContainer {
    pub version: u8,
    pub original_bit_length: u64,
    pub crc32: u32,
    pub payload: Payload,
}

impl FbarContainer {
    pub fn mode(&self) -> Mode {
        match self.payload {
            Payload::Channels { .. } => Mode::Channels,
            Payload::Collapsed(_) => Mode::Collapsed,
        }
    }

    /// Payload size in bits before byte padding.
    pub fn payload_bits(&self) -> u64 {
        match &self.payload {
            Payload::Channels {
                channels,
                directions,
            } => (channels.and_channel.len() + channels.or_channel.len() + directions.len()) as u64,
            Payload::Collapsed(stream) => {
                stream.collapsed.len() as u64 + 8 * stream.sideband.serialized_len() as u64
            }
        }
    }

    /// Payload size in bytes as written.
    pub fn payload_len(&self) -> usize {
        match &self.payload {
            Payload::Channels {
                channels,
                directions,
            } => {
                channels.and_channel.as_packed().len()
                    + channels.or_channel.as_packed().len()
                    + directions.as_packed().len()
            }
            Payload::Collapsed(stream) => {
                stream.collapsed.as_packed().len() + stream.sideband.serialized_len()
            }
        }
    }

    /// Whole file size in bytes.
    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + self.payload_len()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(&MAGIC);
        out.push(self.version);
        out.push(self.mode().byte());
        out.extend_from_slice(&self.original_bit_length.to_le_bytes());
        out.extend_from_slice(&self.crc32.to_le_bytes());
        match &self.payload {
            Payload::Channels {
                channels,
                directions,
            } => {
                out.extend_from_slice(channels.and_channel.as_packed());
                out.extend_from_slice(channels.or_channel.as_packed());
                out.extend_from_slice(directions.as_packed());
            }
            Payload::Collapsed(stream) => {
                out.extend_from_slice(stream.collapsed.as_packed());
                stream.sideband.serialize_into(&mut out);
            }
        }
        out
    }

    /// Parses the container framing. Checksum verification happens in [`decode`].
    pub fn from_bytes(data: &[u8]) -> Result<Self, ContainerError> {
        if data.len() < 4 || data[..4] != MAGIC {
            return Err(ContainerError::BadMagic {
                found: data[..data.len().min(4)].to_vec(),
            });
        }
        if data.len() < HEADER_LEN {
            return Err(ContainerError::TruncatedPayload {
                needed: HEADER_LEN,
                available: data.len(),
            });
        }
        let version = data[4];
        if version != VERSION {
            return Err(ContainerError::UnsupportedVersion(version));
        }
        let mode = Mode::from_byte(data[5])?;
        let original_bit_length = u64::from_le_bytes(data[6..14].try_into().unwrap());
        let crc32 = u32::from_le_bytes(data[14..18].try_into().unwrap());
        if original_bit_length % 8 != 0 {
            return Err(ContainerError::InvalidBitLength(original_bit_length));
        }
        let body = &data[HEADER_LEN..];
        let pairs = usize::try_from(original_bit_length / 2)
            .map_err(|_| ContainerError::InvalidBitLength(original_bit_length))?;
        let section = pairs.div_ceil(8);

        let payload = match mode {
            Mode::Channels => {
                let mut reader = SectionReader::new(body);
                let and_channel = reader.bits(pairs)?;
                let or_channel = reader.bits(pairs)?;
                let channels = ChannelPair {
                    and_channel,
                    or_channel,
                };
                let mixed = mixed_count_checked(&channels)?;
                let directions = reader.bits(mixed)?;
                reader.finish()?;
                Payload::Channels {
                    channels,
                    directions,
                }
            }
            Mode::Collapsed => {
                let mut reader = SectionReader::new(body);
                let collapsed = reader.bits(pairs)?;
                let rest = &body[section.min(body.len())..];
                let sideband = IndicatorSideband::parse(rest).map_err(|e| match e {
                    SidebandError::Truncated { offset } => ContainerError::TruncatedPayload {
                        needed: HEADER_LEN + section + offset + 1,
                        available: data.len(),
                    },
                    SidebandError::TrailingBytes { count } => ContainerError::TrailingBytes { count },
                    other => ContainerError::CorruptPayload {
                        reason: format!("sideband: {other}"),
                    },
                })?;
                Payload::Collapsed(CollapsedStream {
                    collapsed,
                    sideband,
                })
            }
        };
        Ok(FbarContainer {
            version,
            original_bit_length,
            crc32,
            payload,
        })
    }
}

fn mixed_count_checked(channels: &ChannelPair) -> Result<usize, ContainerError> {
    let and = channels.and_channel.as_packed();
    let or = channels.or_channel.as_packed();
    if and.iter().zip(or).any(|(a, o)| a & !o != 0) {
        return Err(ContainerError::CorruptPayload {
            reason: "AND channel bit set where OR channel is clear".into(),
        });
    }
    Ok(and
        .iter()
        .zip(or)
        .map(|(a, o)| (o & !a).count_ones() as usize)
        .sum())
}

/// Reads consecutive byte-padded bit sections.
struct SectionReader<'a> {
    data: &'a [u8],
    offset: usize,
}

impl<'a> SectionReader<'a> {
    fn new(data: &'a [u8]) -> Self {
        Self { data, offset: 0 }
    }

    fn bits(&mut self, len: usize) -> Result<BitSeq, ContainerError> {
        let bytes = len.div_ceil(8);
        let end = self.offset + bytes;
        if end > self.data.len() {
            return Err(ContainerError::TruncatedPayload {
                needed: HEADER_LEN + end,
                available: HEADER_LEN + self.data.len(),
            });
        }
        let raw = &self.data[self.offset..end];
        if len % 8 != 0 && raw[bytes - 1] & (0xFF >> (len % 8)) != 0 {
            return Err(ContainerError::CorruptPayload {
                reason: format!("non-zero padding after section ending at byte {end}"),
            });
        }
        self.offset = end;
        BitSeq::from_packed(raw, len).map_err(|e| ContainerError::CorruptPayload {
            reason: e.to_string(),
        })
    }

    fn finish(self) -> Result<(), ContainerError> {
        if self.offset < self.data.len() {
            return Err(ContainerError::TrailingBytes {
                count: self.data.len() - self.offset,
            });
        }
        Ok(())
    }
}

/// Runs the layer stack over `data` and wraps the result.
pub fn encode(data: &[u8], mode: Mode) -> FbarContainer {
    let bits = layers::layer1_encode(data);
    let payload = match mode {
        Mode::Channels => {
            let channels = layers::layer23_channels(&bits).expect("layer 1 output is byte-aligned");
            let directions =
                layers::mixed_direction_bits(&bits).expect("byte-aligned input has even length");
            Payload::Channels {
                channels,
                directions,
            }
        }
        Mode::Collapsed => Payload::Collapsed(
            layers::layer4_collapse(&bits).expect("byte-aligned input has even length"),
        ),
    };
    FbarContainer {
        version: VERSION,
        original_bit_length: bits.len() as u64,
        crc32: crc32fast::hash(data),
        payload,
    }
}

/// Inverts the layer stack and verifies the checksum.
pub fn decode(container: &FbarContainer) -> Result<Vec<u8>, ContainerError> {
    if container.version != VERSION {
        return Err(ContainerError::UnsupportedVersion(container.version));
    }
    let bits = match &container.payload {
        Payload::Channels {
            channels,
            directions,
        } => {
            layers::channels_with_direction_bits(channels, directions).map_err(layer_error)?
        }
        Payload::Collapsed(stream) => layers::layer4_expand(stream).map_err(layer_error)?,
    };
    if bits.len() as u64 != container.original_bit_length {
        return Err(ContainerError::SidebandMismatch {
            reason: format!(
                "payload covers {} bits, header says {}",
                bits.len(),
                container.original_bit_length
            ),
        });
    }
    let data = layers::layer1_decode(&bits).map_err(layer_error)?;
    let actual = crc32fast::hash(&data);
    if actual != container.crc32 {
        return Err(ContainerError::ChecksumMismatch {
            expected: container.crc32,
            actual,
        });
    }
    Ok(data)
}

/// [`FbarContainer::from_bytes`] followed by [`decode`].
pub fn decode_bytes(data: &[u8]) -> Result<Vec<u8>, ContainerError> {
    decode(&FbarContainer::from_bytes(data)?)
}

fn layer_error(e: LayerError) -> ContainerError {
    match e {
        LayerError::SidebandMismatch { reason } => ContainerError::SidebandMismatch { reason },
        LayerError::PositionOutOfRange { position, pairs } => ContainerError::SidebandMismatch {
            reason: format!("position {position} outside {pairs} pairs"),
        },
        other => ContainerError::CorruptPayload {
            reason: other.to_string(),
        },
    }
}

fn batch_line(entry: &SidebandEntry) -> String {
    let p = entry.position;
    match entry.direction {
        Direction::Rise => format!("QRAND{p:02} QROR{p:02}"),
        Direction::Fall => format!("QLAND{p:02} QLOR{p:02}"),
    }
}

/// Renders the sideband as the zero-byte file names of the batch scheme,
/// one entry per LF-terminated line. Right polarity (`/`) uses the `R`
/// names, left polarity (`\`) the `L` names.
pub fn export_zero_byte_batch(sideband: &IndicatorSideband) -> String {
    let mut out = String::new();
    for entry in sideband {
        out.push_str(&batch_line(entry));
        out.push('\n');
    }
    out
}
