// SPDX-License-Identifier: Apache-2.0

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::PathBuf;

use clap::Args;
use hitab::Scheme;

use crate::error::{io_usage, CliError, CliResult};

#[derive(Args, Debug)]
pub struct HashArgs {
    /// A container written by `hitab gen`.
    #[arg(long)]
    pub scheme: PathBuf,
    /// Key file, one hexadecimal key per line; standard input when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

pub fn load_scheme(path: &PathBuf) -> CliResult<Scheme> {
    let bytes = std::fs::read(path).map_err(|e| io_usage("read", path, e))?;
    Ok(Scheme::deserialize(&bytes, &crate::budget()?)?)
}

/// Parses `[0x]hex`.
pub fn parse_key(line: &str) -> Option<u64> {
    let s = line.trim();
    let s = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_hexdigit()) {
        return None;
    }
    u64::from_str_radix(s, 16).ok()
}

pub fn run(a: HashArgs, out: &mut impl Write) -> CliResult {
    let scheme = load_scheme(&a.scheme)?;
    let reader: Box<dyn BufRead> = match &a.input {
        Some(p) => Box::new(BufReader::new(File::open(p).map_err(|e| io_usage("open", p, e))?)),
        None => Box::new(BufReader::new(std::io::stdin())),
    };
    let width = scheme.output_bits().div_ceil(4) as usize;
    let max = scheme.max_key();
    let mut out = BufWriter::new(out);
    for (i, line) in reader.lines().enumerate() {
        let n = i + 1;
        let line = line.map_err(|e| CliError::Input(format!("line {n}: {e}")))?;
        let key = parse_key(&line)
            .ok_or_else(|| CliError::Input(format!("line {n}: not a hexadecimal key: {:?}", line.trim())))?;
        if key > max {
            return Err(CliError::Input(format!(
                "line {n}: key {key:#x} exceeds the scheme maximum {max:#x}"
            )));
        }
        let h = scheme.eval(key)?;
        writeln!(out, "{h:0width$x}").map_err(|e| CliError::Usage(format!("write failed: {e}")))?;
    }
    out.flush()
        .map_err(|e| CliError::Usage(format!("write failed: {e}")))
}
