//! `fbar` command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid flags, 3 corrupt or
//! foreign container.

mod corpus;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use fbar::analysis::{self, Accounting};
use fbar::container::{self, ContainerError, FbarContainer, Mode};
use fbar::layers::{layer1_encode, layer4_collapse};

#[derive(Parser, Debug)]
#[command(name = "fbar", version, about = "Bit-pair collapse codec and compression audit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Encode a file into an .fbar container.
    Compress {
        input: PathBuf,
        /// Container path (default: <input>.fbar).
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ModeArg::Collapsed)]
        mode: ModeArg,
        /// Also write the sideband as zero-byte batch names.
        #[arg(long, value_name = "PATH")]
        export_batch: Option<PathBuf>,
    },
    /// Restore the original bytes from an .fbar container.
    Decompress {
        input: PathBuf,
        /// Output path (default: <input> without .fbar, or <input>.out).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Measure files or directories under honest and paper accounting.
    Audit {
        #[arg(required_unless_present = "collisions")]
        paths: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = AccountingArg::Both)]
        accounting: AccountingArg,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        /// Print the full collision table over A-Z and a-z.
        #[arg(long)]
        collisions: bool,
        /// Write the report to a file instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write the sideband of a file as zero-byte batch names.
    ExportBatch {
        input: PathBuf,
        /// Batch path (default: standard output).
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Channels,
    Collapsed,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Channels => Mode::Channels,
            ModeArg::Collapsed => Mode::Collapsed,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AccountingArg {
    Honest,
    Paper,
    Both,
}

impl AccountingArg {
    fn selected(self) -> &'static [Accounting] {
        match self {
            AccountingArg::Honest => &[Accounting::Honest],
            AccountingArg::Paper => &[Accounting::Paper],
            AccountingArg::Both => &[Accounting::Honest, Accounting::Paper],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Kv,
}

enum Failure {
    Io(anyhow::Error),
    Format(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Format(_) => 3,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Io(e) | Failure::Format(e) => e,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Io(e)
    }
}

fn format_failure(e: ContainerError, path: &Path) -> Failure {
    Failure::Format(anyhow::Error::new(e).context(format!("{} is not a valid container", path.display())))
}

fn read(path: &Path) -> anyhow::Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, data: &[u8]) -> anyhow::Result<()> {
    fs::write(path, data).with_context(|| format!("cannot write {}", path.display()))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn compress(
    input: &Path,
    output: Option<PathBuf>,
    mode: Mode,
    export_batch: Option<PathBuf>,
) -> Result<(), Failure> {
    let data = read(input)?;
    let output = output.unwrap_or_else(|| with_suffix(input, ".fbar"));
    let c = container::encode(&data, mode);
    let bytes = c.to_bytes();
    write(&output, &bytes)?;

    let a = analysis::audit(&data);
    let original = data.len() as u64 * 8;
    let written = bytes.len() as u64 * 8;
    println!("{} -> {} ({mode})", input.display(), output.display());
    println!("original_bytes={}", data.len());
    println!("container_bytes={}", bytes.len());
    match analysis::compression_ratio(original, written) {
        Ok(r) => println!("container_ratio={:.6}", *r.numer() as f64 / *r.denom() as f64),
        Err(_) => println!("container_ratio=n/a"),
    }
    println!(
        "honest_ratio={}",
        a.honest.ratio_f64().map_or_else(|| "n/a".into(), |x| format!("{x:.6}"))
    );
    println!(
        "honest_space_saving={}",
        a.honest.space_saving_f64().map_or_else(|| "n/a".into(), |x| format!("{x:.6}"))
    );
    if let Some(path) = export_batch {
        let stream = layer4_collapse(&layer1_encode(&data)).expect("byte-aligned input");
        write(&path, container::export_zero_byte_batch(&stream.sideband).as_bytes())?;
        eprintln!("wrote {} batch entries to {}", stream.sideband.len(), path.display());
    }
    Ok(())
}

fn decompress(input: &Path, output: Option<PathBuf>) -> Result<(), Failure> {
    let bytes = read(input)?;
    let c = FbarContainer::from_bytes(&bytes).map_err(|e| format_failure(e, input))?;
    let data = container::decode(&c).map_err(|e| format_failure(e, input))?;
    let output = output.unwrap_or_else(|| match input.extension() {
        Some(ext) if ext == "fbar" => input.with_extension(""),
        _ => with_suffix(input, ".out"),
    });
    write(&output, &data)?;
    println!("{} -> {} ({} bytes, crc32 {:08x} verified)", input.display(), output.display(), data.len(), c.crc32);
    Ok(())
}

fn export_batch(input: &Path, output: Option<PathBuf>) -> Result<(), Failure> {
    let data = read(input)?;
    let stream = layer4_collapse(&layer1_encode(&data)).expect("byte-aligned input");
    let batch = container::export_zero_byte_batch(&stream.sideband);
    match output {
        Some(path) => write(&path, batch.as_bytes())?,
        None => print!("{batch}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Compress {
            input,
            output,
            mode,
            export_batch,
        } => compress(&input, output, mode.into(), export_batch),
        Command::Decompress { input, output } => decompress(&input, output),
        Command::Audit {
            paths,
            accounting,
            format,
            collisions,
            output,
        } => {
            let parallel = std::env::var("FBAR_NO_PARALLEL").map_or(true, |v| v != "1");
            let report = corpus::run(&paths, accounting.selected(), format, collisions, parallel)?;
            match output {
                Some(path) => write(&path, report.as_bytes())?,
                None => print!("{report}"),
            }
            Ok(())
        }
        Command::ExportBatch { input, output } => export_batch(&input, output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("fbar: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}
