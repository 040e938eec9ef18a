//! `cmb`: Conley-Morse barcodes from the command line.
//!
//! Exit codes: 0 success, 1 internal invariant breach, 2 invalid input, 3 fence violation.

mod render;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cmb_core::io::parse_bundle;
use cmb_core::Error;

#[derive(Parser, Debug)]
#[command(name = "cmb", version, about = "Conley-Morse persistence barcodes of parameterized multivector fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the input and report field directions.
    Validate(Opts),
    /// Finest block partition per field, plus any supplied decompositions.
    Partition(Opts),
    /// Induced Morse decompositions and their flow order.
    Morse(Opts),
    /// Conley index ranks per Morse set.
    Conley(Opts),
    /// Transition diagram.
    Diagram(Opts),
    /// Conley-Morse persistence barcode.
    Barcode(Opts),
}

#[derive(Args, Debug)]
struct Opts {
    /// Input bundle: `{ "complex": ..., "fields": [...] }`.
    input: PathBuf,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the artifact here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Warn about multivectors that are not connected.
    #[arg(long)]
    warn_disconnected: bool,
    /// Print every cascade merge to stderr.
    #[arg(long)]
    log_cascades: bool,
    /// Re-verify engine invariants after the computation.
    #[arg(long)]
    debug_invariants: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Dot,
    Svg,
    Text,
}

enum Failure {
    Core(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Fence { .. } => 3,
                Error::Internal(_) => 1,
                _ => 2,
            })
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn opts(c: &Command) -> &Opts {
    match c {
        Command::Validate(o)
        | Command::Partition(o)
        | Command::Morse(o)
        | Command::Conley(o)
        | Command::Diagram(o)
        | Command::Barcode(o) => o,
    }
}

fn allowed(c: &Command, f: Format) -> bool {
    match f {
        Format::Json | Format::Text => true,
        Format::Csv => !matches!(c, Command::Diagram(_) | Command::Validate(_)),
        Format::Dot => matches!(c, Command::Diagram(_)),
        Format::Svg => matches!(c, Command::Barcode(_)),
    }
}

fn run(command: &Command) -> Result<(), Failure> {
    let o = opts(command);
    let format = o.format.unwrap_or(match command {
        Command::Diagram(_) => Format::Dot,
        _ => Format::Json,
    });
    if !allowed(command, format) {
        return Err(Failure::Usage(format!("format `{}` is not available for this command", format_name(format))));
    }
    let text = std::fs::read_to_string(&o.input)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", o.input.display())))?;
    let bundle = parse_bundle(&text)?;
    if o.warn_disconnected {
        for (l, v) in bundle.fields.iter().enumerate() {
            for m in (0..v.len()).filter(|&m| v.is_disconnected(m)) {
                eprintln!("warning: field {l}: multivector `{}` is disconnected", v.label(m));
            }
        }
    }
    let out = match command {
        Command::Validate(_) => render::value(&report::validate(&bundle)?, format, render::Kind::Validate),
        Command::Partition(_) => render::value(&report::partitions(&bundle)?, format, render::Kind::Partition),
        Command::Morse(_) => render::value(&report::morse(&bundle)?, format, render::Kind::Morse),
        Command::Conley(_) => render::value(&report::conley(&bundle)?, format, render::Kind::Conley),
        Command::Diagram(_) => {
            let d = report::diagram(&bundle, o.debug_invariants)?;
            log_cascades(o, &d.cascades);
            match format {
                Format::Dot => render::dot(&d.diagram),
                _ => render::value(&d.json, format, render::Kind::Diagram),
            }
        }
        Command::Barcode(_) => {
            let b = report::barcode(&bundle, o.debug_invariants)?;
            log_cascades(o, &b.cascades);
            match format {
                Format::Svg => render::svg(&b.json),
                _ => render::value(&b.json, format, render::Kind::Barcode),
            }
        }
    };
    match &o.out {
        Some(path) => {
            std::fs::write(path, out).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?
        }
        None => print!("{out}"),
    }
    Ok(())
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Json => "json",
        Format::Csv => "csv",
        Format::Dot => "dot",
        Format::Svg => "svg",
        Format::Text => "text",
    }
}

fn log_cascades(o: &Opts, log: &[String]) {
    if o.log_cascades {
        for line in log {
            eprintln!("cascade: {line}");
        }
    }
}
