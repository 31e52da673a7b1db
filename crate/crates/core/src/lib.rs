//! Pairwise AND/OR bit-pair transform with an indicator sideband.
//!
//! The crate is organised bottom-up:
//!
//! * [`bitstream`]: bit sequences with MSB-first packing;
//! * [`layers`]: the four transform layers and their inverses;
//! * [`sideband`]: mixed-pair positions and directions with a varint wire form;
//! * [`container`]: the `.fbar` file format and the zero-byte batch export;
//! * [`polarity`]: nibble polarity classes and channel collision search;
//! * [`analysis`]: ratios, entropy and the claims audit.

pub mod analysis;
pub mod bitstream;
pub mod container;
pub mod layers;
pub mod polarity;
pub mod sideband;

pub use bitstream::{BitPair, BitSeq};
pub use container::{decode, encode, ContainerError, FbarContainer, Mode};

pub use layers::{ChannelPair, CollapsedStream, PairSymbol};
pub use sideband::{Direction, IndicatorSideband};
