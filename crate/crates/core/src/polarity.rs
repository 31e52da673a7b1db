//! Nibble polarity classes and channel collisions.
//!
//! A nibble's orientation pattern reads each bit as an arrow, `0` as `↓`
//! and `1` as `↑`. Six patterns have their own class; every other pattern
//! falls into the dual class 6. Classes 7 and 8 describe single mixed
//! pairs (`10` falling, `01` rising).
//!
//! Two bytes collide when their AND/OR channels are identical, i.e. the
//! channels alone cannot tell them apart without direction sideband.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;
use thiserror::Error;

use crate::bitstream::{BitPair, BitSeq};
use crate::layers::layer23_channels;
use crate::sideband::Direction;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolarityError {
    #[error("pair {0} is pure, not mixed")]
    NotMixedPair(BitPair),
    #[error("{0} does not fit in 4 bits")]
    NotANibble(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Nibble(u8);

impl Nibble {
    pub fn new(value: u8) -> Result<Self, PolarityError> {
        if value > 0xF {
            return Err(PolarityError::NotANibble(value));
        }
        Ok(Nibble(value))
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn arrows(self) -> [Arrow; 4] {
        std::array::from_fn(|k| {
            if self.0 & (0x8 >> k) != 0 {
                Arrow::Up
            } else {
                Arrow::Down
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arrow {
    Down,
    Up,
}

impl Arrow {
    pub fn symbol(self) -> char {
        match self {
            Arrow::Down => '↓',
            Arrow::Up => '↑',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Pattern {
    /// Types 0-5.
    Orientation([Arrow; 4]),
    /// Type 6; carries the nibble's own arrows.
    Dual([Arrow; 4]),
    /// Types 7-8.
    Single(Direction),
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Orientation(a) => a.iter().try_for_each(|x| write!(f, "{}", x.symbol())),
            Pattern::Dual(a) => {
                f.write_str("dual ")?;
                a.iter().try_for_each(|x| write!(f, "{}", x.symbol()))
            }
            Pattern::Single(Direction::Fall) => f.write_str("↘"),
            Pattern::Single(Direction::Rise) => f.write_str("↗"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolarityClass {
    pub type_no: u8,
    pub pattern: Pattern,
    pub flag_bits: u8,
    /// Bit frequency covered between poles.
    pub beta: Ratio<u32>,
}

/// Nibble values of the six orientation rows, in type order.
const ORIENTATION_ROWS: [u8; 6] = [0b0110, 0b0001, 0b0100, 0b0101, 0b0111, 0b0011];

pub const DUAL_TYPE: u8 = 6;

pub fn classify_nibble(nibble: Nibble) -> PolarityClass {
    let arrows = nibble.arrows();
    match ORIENTATION_ROWS.iter().position(|&row| row == nibble.value()) {
        Some(type_no) => PolarityClass {
            type_no: type_no as u8,
            pattern: Pattern::Orientation(arrows),
            flag_bits: 1,
            beta: Ratio::new(1, 8),
        },
        None => {
            // measured share of up-arrows, held inside the dual row's range
            let ones = Ratio::new(nibble.value().count_ones(), 4);
            let beta = ones.clamp(Ratio::new(1, 8), Ratio::new(3, 4));
            PolarityClass {
                type_no: DUAL_TYPE,
                pattern: Pattern::Dual(arrows),
                flag_bits: 1,
                beta,
            }
        }
    }
}

/// Class of a single mixed pair: `10` is type 7, `01` is type 8.
pub fn pair_direction(pair: BitPair) -> Result<PolarityClass, PolarityError> {
    let direction = Direction::of_pair(pair).ok_or(PolarityError::NotMixedPair(pair))?;
    Ok(PolarityClass {
        type_no: match direction {
            Direction::Fall => 7,
            Direction::Rise => 8,
        },
        pattern: Pattern::Single(direction),
        flag_bits: 1,
        beta: Ratio::new(1, 2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    /// `x` is odd and `y = x + 1`: the pair differs only in a trailing `01`/`10`.
    Odd,
    Even,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Collision {
    pub first: u8,
    pub second: u8,
    pub orientation: Orientation,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CollisionReport {
    pub colliding_pairs: Vec<Collision>,
}

impl CollisionReport {
    pub fn odd_pairs(&self) -> impl Iterator<Item = &Collision> {
        self.colliding_pairs
            .iter()
            .filter(|c| c.orientation == Orientation::Odd)
    }

    /// Distinct bytes taking part in odd-orientation collisions.
    pub fn odd_members(&self) -> BTreeSet<u8> {
        self.odd_pairs().flat_map(|c| [c.first, c.second]).collect()
    }

    /// Distinct bytes taking part in any collision.
    pub fn members(&self) -> BTreeSet<u8> {
        self.colliding_pairs
            .iter()
            .flat_map(|c| [c.first, c.second])
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.colliding_pairs.is_empty()
    }
}

fn printable(b: u8) -> String {
    if b.is_ascii_graphic() {
        (b as char).to_string()
    } else {
        format!("0x{b:02X}")
    }
}

impl fmt::Display for CollisionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<6} {:<6} {:<11} {:<5} OR", "first", "second", "orientation", "AND")?;
        for c in &self.colliding_pairs {
            let ch = layer23_channels(&BitSeq::from_bytes(&[c.first])).expect("aligned");
            writeln!(
                f,
                "{:<6} {:<6} {:<11} {:<5} {}",
                printable(c.first),
                printable(c.second),
                match c.orientation {
                    Orientation::Odd => "odd",
                    Orientation::Even => "even",
                },
                ch.and_channel,
                ch.or_channel
            )?;
        }
        Ok(())
    }
}

fn channel_key(b: u8) -> (BitSeq, BitSeq) {
    let ch = layer23_channels(&BitSeq::from_bytes(&[b])).expect("a byte is aligned");
    (ch.and_channel, ch.or_channel)
}

/// Exhaustive pairwise comparison of channel outputs over `alphabet`.
/// Pairs come out ordered by first byte, then second byte.
pub fn find_collisions<I: IntoIterator<Item = u8>>(alphabet: I) -> CollisionReport {
    let symbols: Vec<u8> = alphabet.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
    let keys: Vec<_> = symbols.iter().map(|&b| channel_key(b)).collect();
    let mut colliding_pairs = Vec::new();
    for i in 0..symbols.len() {
        for j in i + 1..symbols.len() {
            if keys[i] == keys[j] {
                let (x, y) = (symbols[i], symbols[j]);
                let orientation = if x % 2 == 1 && y == x + 1 {
                    Orientation::Odd
                } else {
                    Orientation::Even
                };
                colliding_pairs.push(Collision {
                    first: x,
                    second: y,
                    orientation,
                });
            }
        }
    }
    CollisionReport { colliding_pairs }
}

/// True when `x` and `y` have the same pairs up to `01`/`10` swaps.
pub fn swap_equivalent(x: u8, y: u8) -> bool {
    (0..4).all(|k| {
        let px = (x >> (6 - 2 * k)) & 0b11;
        let py = (y >> (6 - 2 * k)) & 0b11;
        px == py || ((px ^ py) == 0b11 && px != 0 && px != 0b11)
    })
}
