//! Ratios, entropy and the claims audit.
//!
//! Two accountings are reported side by side. *Paper* accounting counts
//! only the collapsed stream, one bit per pair. *Honest* accounting counts
//! the collapsed stream plus the serialized sideband, which is what the
//! collapsed container actually stores after its fixed header.

use std::fmt;

use num_rational::Ratio;
use thiserror::Error;

use crate::bitstream::BitSeq;
use crate::container::{self, Mode, HEADER_LEN};
use crate::layers::{layer1_encode, layer4_collapse};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("compressed size is zero")]
    ZeroCompressedSize,
    #[error("original size is zero")]
    ZeroOriginalSize,
    #[error("entropy of empty input is undefined")]
    EmptyInput,
}

/// Initial size over compressed size, exact.
pub fn compression_ratio(original_bits: u64, compressed_bits: u64) -> Result<Ratio<u64>, AnalysisError> {
    if compressed_bits == 0 {
        return Err(AnalysisError::ZeroCompressedSize);
    }
    Ok(Ratio::new(original_bits, compressed_bits))
}

/// `1 - compressed/original`; negative when the output is larger.
pub fn space_saving(original_bits: u64, compressed_bits: u64) -> Result<Ratio<i128>, AnalysisError> {
    if original_bits == 0 {
        return Err(AnalysisError::ZeroOriginalSize);
    }
    Ok(Ratio::new(
        original_bits as i128 - compressed_bits as i128,
        original_bits as i128,
    ))
}

fn entropy_of_counts(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum();
    // -0.0 for single-symbol input
    h.max(0.0)
}

/// Order-0 Shannon entropy over byte frequencies, in bits per byte.
pub fn shannon_entropy(data: &[u8]) -> Result<f64, AnalysisError> {
    if data.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    Ok(entropy_of_counts(&byte_counts(data)))
}

fn byte_counts(data: &[u8]) -> Vec<u64> {
    let mut counts = vec![0u64; 256];
    for &b in data {
        counts[b as usize] += 1;
    }
    counts
}

/// Counts of the pair values `00`, `01`, `10`, `11`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PairHistogram {
    pub counts: [u64; 4],
}

impl PairHistogram {
    pub fn of_bytes(data: &[u8]) -> Self {
        let mut counts = [0u64; 4];
        for &b in data {
            counts[(b >> 6) as usize] += 1;
            counts[((b >> 4) & 3) as usize] += 1;
            counts[((b >> 2) & 3) as usize] += 1;
            counts[(b & 3) as usize] += 1;
        }
        Self { counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn mixed(&self) -> u64 {
        self.counts[1] + self.counts[2]
    }

    /// Best achievable bits per pair for an order-0 coder over the four pair symbols.
    pub fn entropy(&self) -> f64 {
        entropy_of_counts(&self.counts)
    }

    fn merge(&mut self, other: &Self) {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Accounting {
    Honest,
    Paper,
}

impl fmt::Display for Accounting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Accounting::Honest => "honest",
            Accounting::Paper => "paper",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    pub accounting: Accounting,
    pub original_bits: u64,
    pub compressed_bits: u64,
    /// `None` when nothing was compressed.
    pub ratio: Option<Ratio<u64>>,
    /// `None` for empty input.
    pub space_saving: Option<Ratio<i128>>,
    pub entropy_bits_per_char: f64,
    pub pair_histogram: PairHistogram,
    pub order0_pair_entropy: f64,
}

impl AnalysisReport {
    fn new(accounting: Accounting, original_bits: u64, compressed_bits: u64, stats: &Stats) -> Self {
        Self {
            accounting,
            original_bits,
            compressed_bits,
            ratio: compression_ratio(original_bits, compressed_bits).ok(),
            space_saving: space_saving(original_bits, compressed_bits).ok(),
            entropy_bits_per_char: entropy_of_counts(&stats.byte_counts),
            pair_histogram: stats.pairs,
            order0_pair_entropy: stats.pairs.entropy(),
        }
    }

    /// Compressed bits per input character.
    pub fn bits_per_char(&self) -> Option<f64> {
        (self.original_bits > 0).then(|| self.compressed_bits as f64 * 8.0 / self.original_bits as f64)
    }

    pub fn ratio_f64(&self) -> Option<f64> {
        self.ratio.map(|r| *r.numer() as f64 / *r.denom() as f64)
    }

    pub fn space_saving_f64(&self) -> Option<f64> {
        self.space_saving.map(|r| *r.numer() as f64 / *r.denom() as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Stats {
    byte_counts: Vec<u64>,
    pairs: PairHistogram,
}

/// Honest and paper accounting for one input (or a merged corpus).
#[derive(Debug, Clone, PartialEq)]
pub struct Audit {
    pub honest: AnalysisReport,
    pub paper: AnalysisReport,
    pub sideband_entries: u64,
    pub sideband_bits: u64,
    /// Full collapsed-container size in bytes, header included.
    pub container_bytes: u64,
    pub files: u64,
    stats: Stats,
}

impl Audit {
    /// Merges per-file audits. Entropy figures are recomputed from the
    /// summed symbol counts.
    pub fn merge<'a, I: IntoIterator<Item = &'a Audit>>(audits: I) -> Audit {
        let mut stats = Stats {
            byte_counts: vec![0; 256],
            pairs: PairHistogram::default(),
        };
        let (mut original, mut collapsed, mut entries, mut side_bits, mut bytes, mut files) =
            (0, 0, 0, 0, 0, 0);
        for a in audits {
            for (x, y) in stats.byte_counts.iter_mut().zip(&a.stats.byte_counts) {
                *x += y;
            }
            stats.pairs.merge(&a.stats.pairs);
            original += a.honest.original_bits;
            collapsed += a.paper.compressed_bits;
            entries += a.sideband_entries;
            side_bits += a.sideband_bits;
            bytes += a.container_bytes;
            files += a.files;
        }
        Audit {
            honest: AnalysisReport::new(Accounting::Honest, original, collapsed + side_bits, &stats),
            paper: AnalysisReport::new(Accounting::Paper, original, collapsed, &stats),
            sideband_entries: entries,
            sideband_bits: side_bits,
            container_bytes: bytes,
            files,
            stats,
        }
    }

    pub fn report(&self, accounting: Accounting) -> &AnalysisReport {
        match accounting {
            Accounting::Honest => &self.honest,
            Accounting::Paper => &self.paper,
        }
    }
}

/// Measures `data` under both accountings.
pub fn audit(data: &[u8]) -> Audit {
    let bits = layer1_encode(data);
    let stream = layer4_collapse(&bits).expect("byte-aligned input has even length");
    let original = bits.len() as u64;
    let collapsed = stream.collapsed.len() as u64;
    let sideband_bits = 8 * stream.sideband.serialized_len() as u64;
    let stats = Stats {
        byte_counts: byte_counts(data),
        pairs: PairHistogram::of_bytes(data),
    };
    let container_bytes = (HEADER_LEN + stream.collapsed.as_packed().len()) as u64 + sideband_bits / 8;
    Audit {
        honest: AnalysisReport::new(Accounting::Honest, original, collapsed + sideband_bits, &stats),
        paper: AnalysisReport::new(Accounting::Paper, original, collapsed, &stats),
        sideband_entries: stream.sideband.len() as u64,
        sideband_bits,
        container_bytes,
        files: 1,
        stats,
    }
}

/// Verifies that both container modes reproduce `data` exactly.
pub fn round_trip_preserved(data: &[u8]) -> bool {
    [Mode::Channels, Mode::Collapsed].into_iter().all(|mode| {
        let bytes = container::encode(data, mode).to_bytes();
        container::decode_bytes(&bytes).as_deref() == Ok(data)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Unverifiable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Unverifiable => "UNVERIFIABLE",
        })
    }
}

fn verdict(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// One published claim and how the measurement compares with it.
#[derive(Debug, Clone, PartialEq)]
pub struct ClaimCheck {
    pub id: &'static str,
    pub claim: &'static str,
    pub measured: String,
    pub verdict: Verdict,
}

/// Published figures the audit compares against.
pub mod claimed {
    /// Lower end of the claimed lossless ratio range (2~3:1).
    pub const LOSSLESS_RATIO_MIN: f64 = 2.0;
    /// gzip compressed/original on the English text benchmark.
    pub const GZIP_SIZE_FRACTION: f64 = 0.363;
    /// gzip bits per character on the same benchmark.
    pub const GZIP_BITS_PER_CHAR: f64 = 2.9;
    /// Estimated entropy rate of English.
    pub const ENGLISH_ENTROPY_RATE: f64 = 2.3;
}

/// Checks each published claim against `audit`. `round_trip` is the
/// outcome of [`round_trip_preserved`] over the same inputs.
pub fn check_claims(audit: &Audit, round_trip: bool) -> Vec<ClaimCheck> {
    let h = &audit.honest;
    let p = &audit.paper;
    let fmt_opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.6}"));
    let size_fraction = h.ratio_f64().map(|r| 1.0 / r);
    vec![
        ClaimCheck {
            id: "lossless_ratio_2_to_3",
            claim: "lossless compression ratio of 2~3:1",
            measured: format!("honest ratio {}", fmt_opt(h.ratio_f64())),
            verdict: verdict(h.ratio_f64().is_some_and(|r| r >= claimed::LOSSLESS_RATIO_MIN)),
        },
        ClaimCheck {
            id: "paper_accounting_2_to_1",
            claim: "each byte collapses to a nibble (2:1)",
            measured: format!("paper ratio {}", fmt_opt(p.ratio_f64())),
            verdict: verdict(p.ratio == Some(Ratio::from_integer(2))),
        },
        ClaimCheck {
            id: "gzip_size_fraction_0_363",
            claim: "at least as small as gzip's 36.3% on English text",
            measured: format!("honest size fraction {}", fmt_opt(size_fraction)),
            verdict: verdict(size_fraction.is_some_and(|f| f <= claimed::GZIP_SIZE_FRACTION)),
        },
        ClaimCheck {
            id: "gzip_rate_2_9_bpc",
            claim: "at most gzip's 2.9 bits/character",
            measured: format!("honest {} bits/char", fmt_opt(h.bits_per_char())),
            verdict: verdict(h.bits_per_char().is_some_and(|b| b <= claimed::GZIP_BITS_PER_CHAR)),
        },
        ClaimCheck {
            id: "english_entropy_2_3_bpc",
            claim: "approaches the 2.3 bits/character entropy rate",
            measured: format!("honest {} bits/char", fmt_opt(h.bits_per_char())),
            verdict: verdict(h.bits_per_char().is_some_and(|b| b <= claimed::ENGLISH_ENTROPY_RATE)),
        },
        ClaimCheck {
            id: "perfect_entropy_1_to_1",
            claim: "decompression restores the input at 1:1",
            measured: format!("round trip {}", if round_trip { "exact" } else { "differs" }),
            verdict: verdict(round_trip),
        },
        ClaimCheck {
            id: "alphabet_28_byte_file",
            claim: "the English alphabet compresses to a 28-byte file",
            measured: "input and accounting rule not stated".to_string(),
            verdict: Verdict::Unverifiable,
        },
    ]
}

/// Internal consistency checks every audit must satisfy.
pub fn consistency_checks(audit: &Audit) -> Vec<(&'static str, bool)> {
    let duality = |r: &AnalysisReport| match (r.ratio, r.space_saving) {
        (Some(ratio), Some(saving)) => {
            let one_minus = Ratio::from_integer(1i128) - saving;
            let ratio = Ratio::new(*ratio.numer() as i128, *ratio.denom() as i128);
            one_minus * ratio == Ratio::from_integer(1)
        }
        _ => r.original_bits == 0 || r.compressed_bits == 0,
    };
    let h = &audit.honest;
    let p = &audit.paper;
    vec![
        ("honest_ratio_saving_duality", duality(h)),
        ("paper_ratio_saving_duality", duality(p)),
        (
            "sideband_gap_identity",
            h.compressed_bits - p.compressed_bits == audit.sideband_bits,
        ),
        (
            "pair_histogram_total",
            h.pair_histogram.total() == h.original_bits / 2,
        ),
        (
            "mixed_pairs_equal_sideband_entries",
            h.pair_histogram.mixed() == audit.sideband_entries,
        ),
        (
            "honest_at_least_half",
            h.compressed_bits >= h.original_bits / 2
                && ((h.compressed_bits == h.original_bits / 2) == (audit.sideband_entries == 0)),
        ),
        (
            "entropy_in_range",
            (0.0..=8.0).contains(&h.entropy_bits_per_char)
                && (0.0..=2.0).contains(&h.order0_pair_entropy),
        ),
    ]
}

/// Binary listing in the accounting view where a space is written as the
/// four bits `0010` and every other character as eight bits.
pub fn paper_listing(text: &[u8]) -> String {
    text.iter()
        .map(|&b| {
            if b == b' ' {
                "0010".to_string()
            } else {
                BitSeq::from_bytes(&[b]).to_string()
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn fmt_ratio(r: Option<Ratio<u64>>) -> String {
    r.map_or_else(|| "n/a".into(), |r| format!("{}:{}", r.numer(), r.denom()))
}

fn fmt_saving(r: Option<Ratio<i128>>) -> String {
    r.map_or_else(
        || "n/a".into(),
        |r| format!("{:.6}", *r.numer() as f64 / *r.denom() as f64),
    )
}

/// Renders selected reports as `key=value` lines under `prefix`.
pub fn render_kv(prefix: &str, audit: &Audit, which: &[Accounting]) -> String {
    let mut out = String::new();
    let mut line = |k: String, v: String| {
        out.push_str(&k);
        out.push('=');
        out.push_str(&v);
        out.push('\n');
    };
    line(format!("{prefix}.files"), audit.files.to_string());
    line(format!("{prefix}.original_bits"), audit.honest.original_bits.to_string());
    line(format!("{prefix}.sideband_entries"), audit.sideband_entries.to_string());
    line(format!("{prefix}.sideband_bits"), audit.sideband_bits.to_string());
    line(format!("{prefix}.container_bytes"), audit.container_bytes.to_string());
    line(
        format!("{prefix}.entropy_bits_per_char"),
        format!("{:.6}", audit.honest.entropy_bits_per_char),
    );
    line(
        format!("{prefix}.order0_pair_entropy"),
        format!("{:.6}", audit.honest.order0_pair_entropy),
    );
    let names = ["00", "01", "10", "11"];
    for (name, count) in names.iter().zip(audit.honest.pair_histogram.counts) {
        line(format!("{prefix}.pairs.{name}"), count.to_string());
    }
    for acc in which {
        let r = audit.report(*acc);
        line(format!("{prefix}.{acc}.compressed_bits"), r.compressed_bits.to_string());
        line(format!("{prefix}.{acc}.ratio"), fmt_ratio(r.ratio));
        line(
            format!("{prefix}.{acc}.ratio_value"),
            r.ratio_f64().map_or_else(|| "n/a".into(), |x| format!("{x:.6}")),
        );
        line(format!("{prefix}.{acc}.space_saving"), fmt_saving(r.space_saving));
        line(
            format!("{prefix}.{acc}.bits_per_char"),
            r.bits_per_char().map_or_else(|| "n/a".into(), |x| format!("{x:.6}")),
        );
    }
    out
}

/// One row per accounting, for human reading.
pub fn render_table(name: &str, audit: &Audit, which: &[Accounting]) -> String {
    let mut out = format!(
        "{name}: {} bits, H = {:.4} bits/char, pair H = {:.4} bits/pair, pairs 00/01/10/11 = {}/{}/{}/{}\n",
        audit.honest.original_bits,
        audit.honest.entropy_bits_per_char,
        audit.honest.order0_pair_entropy,
        audit.honest.pair_histogram.counts[0],
        audit.honest.pair_histogram.counts[1],
        audit.honest.pair_histogram.counts[2],
        audit.honest.pair_histogram.counts[3],
    );
    out.push_str(&format!(
        "  {:<8} {:>14} {:>16} {:>12} {:>10}\n",
        "account", "compressed", "ratio", "saving", "bits/char"
    ));
    for acc in which {
        let r = audit.report(*acc);
        let ratio = r.ratio_f64().map_or_else(|| "n/a".into(), |x| format!("{x:.4}:1"));
        out.push_str(&format!(
            "  {:<8} {:>14} {:>16} {:>12} {:>10}\n",
            acc.to_string(),
            r.compressed_bits,
            ratio,
            fmt_saving(r.space_saving),
            r.bits_per_char().map_or_else(|| "n/a".into(), |x| format!("{x:.4}")),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_examples() {
        assert_eq!(
            compression_ratio(536_870_912, 8_388_608).unwrap(),
            Ratio::from_integer(64)
        );
        assert_eq!(compression_ratio(100, 100).unwrap(), Ratio::from_integer(1));
        assert_eq!(compression_ratio(96, 48).unwrap(), Ratio::from_integer(2));
        assert_eq!(compression_ratio(8, 0), Err(AnalysisError::ZeroCompressedSize));
    }

    #[test]
    fn saving_examples() {
        assert_eq!(
            space_saving(536_870_912, 8_388_608).unwrap(),
            Ratio::new(984_375, 1_000_000)
        );
        assert_eq!(space_saving(77, 77).unwrap(), Ratio::from_integer(0));
        assert_eq!(space_saving(100, 150).unwrap(), Ratio::new(-1, 2));
        assert_eq!(space_saving(0, 1), Err(AnalysisError::ZeroOriginalSize));
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(shannon_entropy(&[7; 50]).unwrap(), 0.0);
        let all: Vec<u8> = (0..=255).collect();
        assert!((shannon_entropy(&all).unwrap() - 8.0).abs() < 1e-9);
        assert!((shannon_entropy(b"abab").unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(shannon_entropy(b""), Err(AnalysisError::EmptyInput));
    }

    #[test]
    fn entropy_ignores_order() {
        let a = shannon_entropy(b"hello world").unwrap();
        let b = shannon_entropy(b"dlrow olleh").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn audit_of_p() {
        let a = audit(b"P");
        assert_eq!(a.paper.original_bits, 8);
        assert_eq!(a.paper.compressed_bits, 4);
        assert_eq!(a.paper.ratio, Some(Ratio::from_integer(2)));
        assert_eq!(a.sideband_entries, 2);
        // count, two zero gaps, one direction byte
        assert_eq!(a.sideband_bits, 32);
        assert_eq!(a.honest.compressed_bits, 36);
        assert!(consistency_checks(&a).iter().all(|(_, ok)| *ok));
    }

    #[test]
    fn audit_of_pure_input() {
        let a = audit(&[0xFF; 1000]);
        assert_eq!(a.paper.ratio, Some(Ratio::from_integer(2)));
        assert_eq!(a.honest.ratio, Some(Ratio::from_integer(2)));
        assert_eq!(a.sideband_bits, 0);
        assert_eq!(a.container_bytes, 18 + 500);
    }

    #[test]
    fn audit_of_empty_input() {
        let a = audit(b"");
        assert_eq!(a.honest.original_bits, 0);
        assert_eq!(a.honest.compressed_bits, 0);
        assert_eq!(a.honest.ratio, None);
        assert_eq!(a.honest.space_saving, None);
        assert_eq!(a.honest.pair_histogram.total(), 0);
        assert!(consistency_checks(&a).iter().all(|(_, ok)| *ok));
    }

    #[test]
    fn merge_sums_counts() {
        let parts = [audit(b"abc"), audit(b"defg"), audit(&[0xFF; 3])];
        let whole = audit(&[b"abc".as_slice(), b"defg", &[0xFF; 3]].concat());
        let merged = Audit::merge(&parts);
        assert_eq!(merged.honest.original_bits, whole.honest.original_bits);
        assert_eq!(merged.paper.compressed_bits, whole.paper.compressed_bits);
        assert_eq!(merged.honest.pair_histogram, whole.honest.pair_histogram);
        assert_eq!(merged.sideband_entries, whole.sideband_entries);
        assert!((merged.honest.entropy_bits_per_char - whole.honest.entropy_bits_per_char).abs() < 1e-12);
        assert_eq!(merged.files, 3);
    }

    #[test]
    fn claims_cover_every_figure() {
        let text = b"It was the best of times, it was the worst of times.";
        let a = audit(text);
        let claims = check_claims(&a, round_trip_preserved(text));
        assert_eq!(claims.len(), 7);
        let by_id = |id: &str| claims.iter().find(|c| c.id == id).unwrap().verdict;
        assert_eq!(by_id("paper_accounting_2_to_1"), Verdict::Pass);
        assert_eq!(by_id("perfect_entropy_1_to_1"), Verdict::Pass);
        assert_eq!(by_id("lossless_ratio_2_to_3"), Verdict::Fail);
        assert_eq!(by_id("alphabet_28_byte_file"), Verdict::Unverifiable);
    }

    #[test]
    fn paper_listing_of_source_string() {
        assert_eq!(
            paper_listing(b"Philip Baback"),
            "01010000 01101000 01101001 01101100 01101001 01110000 0010 \
             01000010 01100001 01100010 01100001 01100011 01101011"
        );
    }

    #[test]
    fn kv_lines_parse() {
        let a = audit(b"kv");
        let text = render_kv("file", &a, &[Accounting::Honest, Accounting::Paper]);
        for line in text.lines() {
            let (k, v) = line.split_once('=').unwrap();
            assert!(k.starts_with("file."));
            assert!(!v.is_empty());
        }
        assert!(text.contains("file.paper.ratio=2:1\n"));
    }
}
