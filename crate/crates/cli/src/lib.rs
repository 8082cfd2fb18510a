//! Command-line front end: map files, experiment commands, JSON and CSV
//! reports.
//!
//! Exit status is 0 on success, 2 when a report carries numerical flags or a
//! numerical error stopped the run, and 1 for bad input.

pub mod args;
pub mod commands;
pub mod error;
pub mod mapfile;
pub mod report;

use std::io::{Read, Write};

use clap::Parser;
use greenp2_core::ProjMap;

pub use args::{Cli, Command};
pub use error::CliError;
pub use mapfile::{parse_map, parse_map_str, MapFile};
pub use report::{Csv, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

fn load_map(path: Option<&str>, stdin: &mut dyn Read) -> Result<ProjMap, CliError> {
    match path {
        None | Some("-") => {
            let mut text = String::new();
            stdin.read_to_string(&mut text).map_err(|e| CliError::Io(format!("standard input: {e}")))?;
            parse_map_str(&text)
        }
        Some(p) => parse_map(p.as_ref()),
    }
}

fn write_file(path: &std::path::Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Runs a parsed command line and returns the exit status.
pub fn run(cli: Cli, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let name = command_name(&cli.command);
    match execute(&cli, stdin, stdout) {
        Ok(code) => code,
        Err(e) => {
            let mut r = Report::new(name);
            r.set("error", serde_json::json!({ "code": e.code(), "message": e.to_string() }));
            let _ = stderr.write_all(r.to_json().as_bytes());
            exit_code(&e)
        }
    }
}

/// Status for a run stopped by `e`.
pub fn exit_code(e: &CliError) -> i32 {
    match e {
        CliError::Core(c) if c.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_INPUT,
    }
}

/// Parses `args` (program name first) and runs them.
pub fn main_with<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, stdin, stdout, stderr),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            code
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Green { .. } => "green",
        Command::Mult { .. } => "mult",
        Command::Invariants => "invariants",
        Command::Classify => "classify",
        Command::Equidist { .. } => "equidist",
        Command::Lelong(_) => "lelong",
        Command::Kiselman { .. } => "kiselman",
        Command::Volume { .. } => "volume",
        Command::Gen { .. } => "gen",
    }
}

fn execute(cli: &Cli, stdin: &mut dyn Read, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let g = &cli.global;
    if let Some(t) = g.threads {
        // a second call in the same process keeps the first pool, which only
        // changes wall time
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    let emit = |text: &str, stdout: &mut dyn Write| -> Result<(), CliError> {
        match &g.out {
            Some(p) => write_file(p, text),
            None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
        }
    };
    if let Command::Gen { kind } = &cli.command {
        if g.csv.is_some() {
            return Err(CliError::Usage("gen has no CSV series".into()));
        }
        let mut text = commands::gen_cmd(g, *kind)?.to_json();
        text.push('\n');
        emit(&text, stdout)?;
        return Ok(EXIT_OK);
    }
    let f = load_map(g.map.as_deref(), stdin)?;
    let (report, csv) = match &cli.command {
        Command::Green { point } => commands::green_cmd(&f, g, point.as_deref())?,
        Command::Mult { point } => commands::mult_cmd(&f, g, point.as_deref())?,
        Command::Invariants => commands::invariants_cmd(&f, g)?,
        Command::Classify => commands::classify_cmd(&f, g)?,
        Command::Equidist { curve } => commands::equidist_cmd(&f, g, curve)?,
        Command::Lelong(a) => commands::lelong_cmd(&f, g, a)?,
        Command::Kiselman { potential, weights, scan } => commands::kiselman_cmd(&f, g, potential, weights, *scan)?,
        Command::Volume { point, radius, chart } => commands::volume_cmd(&f, g, point, *radius, *chart)?,
        Command::Gen { .. } => unreachable!("handled above"),
    };
    if let Some(path) = &g.csv {
        let csv = csv.ok_or_else(|| CliError::Usage("this command has no CSV series".into()))?;
        write_file(path, &csv.render())?;
    }
    emit(&report.to_json(), stdout)?;
    Ok(if report.flagged() { EXIT_NUMERICAL } else { EXIT_OK })
}

#[cfg(test)]
mod tests {
    use super::*;
    use greenp2_core::Error;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&CliError::Core(Error::FitUnstable { residual: 1.0, limit: 0.1 })), EXIT_NUMERICAL);
        assert_eq!(exit_code(&CliError::Core(Error::OnCurve)), EXIT_NUMERICAL);
        assert_eq!(exit_code(&CliError::Core(Error::InvalidArgument("x".into()))), EXIT_INPUT);
        assert_eq!(exit_code(&CliError::Usage("x".into())), EXIT_INPUT);
        assert_eq!(exit_code(&CliError::parse("degree", "x".into())), EXIT_INPUT);
    }

    #[test]
    fn help_is_not_an_error() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(main_with(["greenp2", "--help"], &mut std::io::empty(), &mut out, &mut err), EXIT_OK);
        assert!(String::from_utf8_lossy(&out).contains("classify"));
        assert_eq!(main_with(["greenp2", "nope"], &mut std::io::empty(), &mut out, &mut err), EXIT_INPUT);
    }
}
