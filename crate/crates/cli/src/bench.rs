// SPDX-License-Identifier: Apache-2.0

use std::hint::black_box;
use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use clap::Args;
use hitab::prng::SampleStream;
use hitab::schemes::{DEFAULT_R_BITS, MERSENNE_61};
use hitab::{
    KeyCodec, LookupCounter, MemoryBudget, PolynomialHash, Preset, Scheme, SimpleTabulation, TabulationParams,
};

use crate::error::{io_usage, CliError, CliResult};
use crate::outln;

const CHUNK: usize = 1 << 16;

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Comma-separated: simple-32, simple-64, double-32-2, double-64-3, triple-64-4, poly-K.
    #[arg(long, default_value = "simple-32,double-32-2,poly-2")]
    pub schemes: String,
    #[arg(long, default_value_t = 1_000_000)]
    pub keys: u64,
    /// Draw keys from `--seed` instead of a fresh clock-derived seed.
    #[arg(long)]
    pub deterministic_keys: bool,
    /// Seed for the hash tables and, with `--deterministic-keys`, the keys.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the report to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

enum Subject {
    Simple(SimpleTabulation),
    Scheme(Scheme),
}

impl Subject {
    fn parse(name: &str, seed: u64, budget: &MemoryBudget) -> CliResult<Self> {
        let simple = |c: u32| -> CliResult<Subject> {
            let codec = KeyCodec::new(16, c)?;
            let p = TabulationParams::for_codec(codec, 64, 1)?;
            Ok(Subject::Simple(SimpleTabulation::generate_with_budget(
                p, seed, budget,
            )?))
        };
        let preset =
            |p: Preset| -> CliResult<Subject> { Ok(Subject::Scheme(p.build(DEFAULT_R_BITS, seed, budget)?)) };
        match name {
            "simple-32" => simple(2),
            "simple-64" => simple(4),
            "double-32-2" => preset(Preset::Double32x2),
            "double-64-3" => preset(Preset::Double64x3),
            "triple-64-4" => preset(Preset::Triple64x4),
            other => {
                let k = other
                    .strip_prefix("poly-")
                    .and_then(|k| k.parse::<u32>().ok())
                    .ok_or_else(|| CliError::Usage(format!("unknown bench scheme {other:?}")))?;
                Ok(Subject::Scheme(Scheme::Poly(PolynomialHash::new(
                    k,
                    seed,
                    DEFAULT_R_BITS,
                )?)))
            }
        }
    }

    fn max_key(&self) -> u64 {
        match self {
            Subject::Simple(s) => s.params().input_codec().map_or(0, |c| c.key_mask()),
            Subject::Scheme(s) => s.max_key(),
        }
    }

    #[inline]
    fn eval(&self, key: u64) -> hitab::Result<u64> {
        match self {
            Subject::Simple(s) => s.eval_u64(key),
            Subject::Scheme(s) => s.eval(key),
        }
    }

    /// Lookups made while hashing `key`, counted by instrumentation.
    fn lookups(&self, key: u64) -> hitab::Result<u64> {
        let mut counter = LookupCounter::default();
        match self {
            Subject::Simple(s) => {
                s.eval_counted(key, &mut counter)?;
            }
            Subject::Scheme(s) => {
                s.eval_counted(key, &mut counter)?;
            }
        }
        Ok(counter.0)
    }
}

fn fill_keys(stream: &mut SampleStream, max: u64, buf: &mut Vec<u64>, n: usize) {
    buf.clear();
    buf.extend((0..n).map(|_| {
        let k = stream.next_u64();
        if max == u64::MAX {
            k
        } else if max == MERSENNE_61 - 1 {
            k % MERSENNE_61
        } else {
            k & max
        }
    }));
}

pub struct Row {
    pub scheme: String,
    pub lookups: u64,
    pub keys: u64,
    pub checksum: u64,
    pub elapsed: Duration,
}

impl std::fmt::Display for Row {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let secs = self.elapsed.as_secs_f64().max(1e-12);
        write!(
            f,
            "scheme={} lookups={} keys={} checksum={:016x} ns_per_key={:.3} keys_per_sec={:.0}",
            self.scheme,
            self.lookups,
            self.keys,
            self.checksum,
            secs * 1e9 / self.keys as f64,
            self.keys as f64 / secs
        )
    }
}

fn measure(name: &str, subject: &Subject, keys: u64, key_seed: u64) -> CliResult<Row> {
    let max = subject.max_key();
    let mut buf = Vec::with_capacity(CHUNK);

    // Warmup on a separate stream so it does not shift the measured keys.
    let mut warm = SampleStream::new(key_seed ^ 0x5741_524d);
    fill_keys(&mut warm, max, &mut buf, CHUNK.min(keys as usize));
    for &k in &buf {
        black_box(subject.eval(k)?);
    }
    let lookups = subject.lookups(buf.first().copied().unwrap_or(0))?;

    let mut stream = SampleStream::new(key_seed);
    let mut checksum = 0u64;
    let mut elapsed = Duration::ZERO;
    let mut left = keys;
    while left > 0 {
        let n = left.min(CHUNK as u64) as usize;
        fill_keys(&mut stream, max, &mut buf, n);
        let start = Instant::now();
        for &k in &buf {
            checksum = checksum.rotate_left(7) ^ subject.eval(black_box(k))?;
        }
        elapsed += start.elapsed();
        left -= n as u64;
    }
    Ok(Row {
        scheme: name.to_string(),
        lookups,
        keys,
        checksum,
        elapsed,
    })
}

pub fn run(a: BenchArgs, out: &mut impl Write) -> CliResult {
    if a.keys == 0 {
        return Err(CliError::Usage("--keys must be positive".into()));
    }
    let names: Vec<&str> = a
        .schemes
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if names.is_empty() {
        return Err(CliError::Usage("no schemes given".into()));
    }
    let budget = crate::budget()?;
    // Validate every name and budget before timing anything.
    let subjects = names
        .iter()
        .map(|n| Subject::parse(n, a.seed, &budget))
        .collect::<CliResult<Vec<_>>>()?;
    let key_seed = if a.deterministic_keys {
        a.seed
    } else {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_nanos() as u64)
    };

    let mut report = String::new();
    for (name, subject) in names.iter().zip(&subjects) {
        let row = measure(name, subject, a.keys, key_seed)?;
        outln!(out, "{row}")?;
        report.push_str(&format!("{row}\n"));
    }
    if let Some(path) = &a.report {
        std::fs::write(path, report).map_err(|e| io_usage("write", path, e))?;
    }
    Ok(())
}
