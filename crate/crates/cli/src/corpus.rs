//! Corpus runner: per-file audits, aggregate report, claim checks.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use fbar::analysis::{self, Accounting, Audit};
use fbar::polarity::{find_collisions, CollisionReport};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::Format;

struct FileAudit {
    path: PathBuf,
    sha256: String,
    bytes: usize,
    round_trip: bool,
    audit: Audit,
}

/// Expands directories (recursively, sorted) into regular files.
fn collect(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        let meta = fs::metadata(p).with_context(|| format!("cannot read {}", p.display()))?;
        if meta.is_dir() {
            let mut entries = fs::read_dir(p)
                .with_context(|| format!("cannot list {}", p.display()))?
                .map(|e| e.map(|e| e.path()))
                .collect::<std::io::Result<Vec<_>>>()
                .with_context(|| format!("cannot list {}", p.display()))?;
            entries.sort();
            out.extend(collect(&entries)?);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn audit_file(path: &Path) -> Result<FileAudit> {
    let data = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(FileAudit {
        path: path.to_path_buf(),
        sha256: hex::encode(Sha256::digest(&data)),
        bytes: data.len(),
        round_trip: analysis::round_trip_preserved(&data),
        audit: analysis::audit(&data),
    })
}

fn letters() -> CollisionReport {
    find_collisions((b'A'..=b'Z').chain(b'a'..=b'z'))
}

fn pair_list(report: &CollisionReport) -> String {
    report
        .odd_pairs()
        .map(|c| format!("{}{}", c.first as char, c.second as char))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn run(
    paths: &[PathBuf],
    which: &[Accounting],
    format: Format,
    full_collisions: bool,
    parallel: bool,
) -> Result<String> {
    let files = collect(paths)?;
    let audits: Vec<FileAudit> = if parallel {
        files.par_iter().map(|p| audit_file(p)).collect::<Result<_>>()?
    } else {
        files.iter().map(|p| audit_file(p)).collect::<Result<_>>()?
    };
    let merged = Audit::merge(audits.iter().map(|f| &f.audit));
    let round_trip = audits.iter().all(|f| f.round_trip);
    let claims = analysis::check_claims(&merged, round_trip);
    let checks = analysis::consistency_checks(&merged);
    let collisions = letters();

    let mut out = String::new();
    let version = env!("CARGO_PKG_VERSION");
    let (os, arch) = (std::env::consts::OS, std::env::consts::ARCH);
    match format {
        Format::Table => {
            writeln!(out, "fbar {version} ({os}/{arch}), {} file(s)", audits.len()).unwrap();
            for f in &audits {
                writeln!(
                    out,
                    "\n{}  sha256={}  bytes={}  round_trip={}",
                    f.path.display(),
                    f.sha256,
                    f.bytes,
                    if f.round_trip { "exact" } else { "FAILED" }
                )
                .unwrap();
                out.push_str(&analysis::render_table("  file", &f.audit, which));
            }
            if !audits.is_empty() {
                out.push('\n');
                out.push_str(&analysis::render_table("aggregate", &merged, which));
                out.push_str("\nclaims:\n");
                for c in &claims {
                    writeln!(out, "  {:<12} {:<26} {} ({})", c.verdict.to_string(), c.id, c.claim, c.measured)
                        .unwrap();
                }
                out.push_str("\nconsistency:\n");
                for (name, ok) in &checks {
                    writeln!(out, "  {:<5} {name}", if *ok { "ok" } else { "FAIL" }).unwrap();
                }
            }
            writeln!(
                out,
                "\ncollisions over A-Z/a-z: {} pairs, {} odd-orientation ({} letters): {}",
                collisions.colliding_pairs.len(),
                collisions.odd_pairs().count(),
                collisions.odd_members().len(),
                pair_list(&collisions)
            )
            .unwrap();
            if full_collisions {
                out.push_str(&collisions.to_string());
            }
        }
        Format::Kv => {
            writeln!(out, "env.version={version}\nenv.os={os}\nenv.arch={arch}").unwrap();
            writeln!(out, "files={}", audits.len()).unwrap();
            for (i, f) in audits.iter().enumerate() {
                let prefix = format!("file.{i}");
                writeln!(out, "{prefix}.path={}", f.path.display()).unwrap();
                writeln!(out, "{prefix}.sha256={}", f.sha256).unwrap();
                writeln!(out, "{prefix}.bytes={}", f.bytes).unwrap();
                writeln!(out, "{prefix}.round_trip={}", f.round_trip).unwrap();
                out.push_str(&analysis::render_kv(&prefix, &f.audit, which));
            }
            if !audits.is_empty() {
                out.push_str(&analysis::render_kv("aggregate", &merged, which));
                for c in &claims {
                    writeln!(out, "claim.{}.verdict={}", c.id, c.verdict).unwrap();
                    writeln!(out, "claim.{}.measured={}", c.id, c.measured).unwrap();
                }
                for (name, ok) in &checks {
                    writeln!(out, "check.{name}={ok}").unwrap();
                }
            }
            writeln!(out, "collisions.total={}", collisions.colliding_pairs.len()).unwrap();
            writeln!(out, "collisions.odd_pairs={}", pair_list(&collisions)).unwrap();
            writeln!(out, "collisions.odd_letters={}", collisions.odd_members().len()).unwrap();
            if full_collisions {
                let all: Vec<String> = collisions
                    .colliding_pairs
                    .iter()
                    .map(|c| format!("{}{}", c.first as char, c.second as char))
                    .collect();
                writeln!(out, "collisions.pairs={}", all.join(",")).unwrap();
            }
        }
    }
    Ok(out)
}
