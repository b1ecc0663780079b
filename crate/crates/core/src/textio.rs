//! Plain-text system files.
//!
//! The format is line-oriented and self-describing:
//!
//! ```text
//! 3
//! 1 -1 -1 0
//! 600 900 0 12
//! 0 -900 0 0
//! VARS 1
//! 2 2 sin 900 900 0.5 0
//! BETA 2
//! ```
//!
//! Line one is the order `n`, followed by `n` rows of `n + 1` values
//! (coefficients then free term). An optional `VARS k` section lists the
//! time-varying entries, one per line: `row col const value` or
//! `row col sin offset amplitude frequency phase`. An optional trailing
//! `BETA b` records a reduction boundary — written when saving a reduced
//! base so a later run can finish from the right column. Values are printed
//! with Rust's shortest round-tripping notation, so write → read is
//! bit-exact. Blank lines are ignored; unknown labels are not serialized.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::matrix::AugmentedMatrix;
use crate::reduction::ReductionResult;
use crate::system::{TimeFunction, TimeVaryingSystem, VariableEntry};

fn join_row(row: &[f64]) -> String {
    row.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn write_body(w: &mut impl Write, base: &AugmentedMatrix, vars: &[VariableEntry]) -> Result<()> {
    writeln!(w, "{}", base.n())?;
    for i in 0..base.n() {
        writeln!(w, "{}", join_row(base.row(i)))?;
    }
    if !vars.is_empty() {
        writeln!(w, "VARS {}", vars.len())?;
        for v in vars {
            match v.func {
                TimeFunction::Constant { value } => {
                    writeln!(w, "{} {} const {}", v.row, v.col, value)?;
                }
                TimeFunction::Sinusoid {
                    offset,
                    amplitude,
                    frequency,
                    phase,
                } => {
                    writeln!(
                        w,
                        "{} {} sin {} {} {} {}",
                        v.row, v.col, offset, amplitude, frequency, phase
                    )?;
                }
            }
        }
    }
    Ok(())
}

/// Writes a system (base and variables; labels are not persisted).
pub fn write_system(w: &mut impl Write, sys: &TimeVaryingSystem) -> Result<()> {
    write_body(w, sys.base(), sys.vars())
}

/// Writes a reduced base with its variables and a `BETA` trailer, so the
/// finishing column is recoverable when the file is read back.
pub fn write_reduction(w: &mut impl Write, red: &ReductionResult) -> Result<()> {
    write_body(w, red.reduced(), red.vars())?;
    writeln!(w, "BETA {}", red.boundary())?;
    Ok(())
}

struct LineReader<R> {
    inner: std::io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> LineReader<R> {
    fn new(r: R) -> Self {
        Self {
            inner: r.lines(),
            line_no: 0,
        }
    }

    /// Next non-blank line, or `None` at end of input.
    fn next(&mut self) -> Result<Option<(usize, String)>> {
        for line in self.inner.by_ref() {
            let line = line?;
            self.line_no += 1;
            if !line.trim().is_empty() {
                return Ok(Some((self.line_no, line)));
            }
        }
        Ok(None)
    }

    fn expect(&mut self, what: &str) -> Result<(usize, String)> {
        self.next()?.ok_or_else(|| Error::Parse {
            line: self.line_no + 1,
            reason: format!("unexpected end of input, expected {what}"),
        })
    }
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize> {
    tok.parse().map_err(|_| Error::Parse {
        line,
        reason: format!("invalid {what}: {tok:?}"),
    })
}

fn parse_f64(tok: &str, line: usize, what: &str) -> Result<f64> {
    tok.parse().map_err(|_| Error::Parse {
        line,
        reason: format!("invalid {what}: {tok:?}"),
    })
}

fn parse_var(line_no: usize, line: &str) -> Result<VariableEntry> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    let bad = |reason: String| Error::Parse {
        line: line_no,
        reason,
    };
    if toks.len() < 3 {
        return Err(bad("variable line needs: row col kind params...".into()));
    }
    let row = parse_usize(toks[0], line_no, "variable row")?;
    let col = parse_usize(toks[1], line_no, "variable column")?;
    let func = match (toks[2], toks.len()) {
        ("const", 4) => TimeFunction::Constant {
            value: parse_f64(toks[3], line_no, "constant value")?,
        },
        ("const", k) => {
            return Err(bad(format!("const takes 1 parameter, got {}", k - 3)));
        }
        ("sin", 7) => TimeFunction::Sinusoid {
            offset: parse_f64(toks[3], line_no, "sinusoid offset")?,
            amplitude: parse_f64(toks[4], line_no, "sinusoid amplitude")?,
            frequency: parse_f64(toks[5], line_no, "sinusoid frequency")?,
            phase: parse_f64(toks[6], line_no, "sinusoid phase")?,
        },
        ("sin", k) => {
            return Err(bad(format!("sin takes 4 parameters, got {}", k - 3)));
        }
        (kind, _) => {
            return Err(bad(format!(
                "unknown variable kind {kind:?} (expected const or sin)"
            )));
        }
    };
    Ok(VariableEntry { row, col, func })
}

/// Reads a system plus the optional `BETA` trailer.
pub fn read_system_with_beta(r: impl BufRead) -> Result<(TimeVaryingSystem, Option<usize>)> {
    let mut lines = LineReader::new(r);

    let (ln, first) = lines.expect("system order")?;
    let n = parse_usize(first.trim(), ln, "system order")?;
    if n == 0 {
        return Err(Error::Parse {
            line: ln,
            reason: "system order must be at least 1".into(),
        });
    }

    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let (ln, line) = lines.expect(&format!("row {i}"))?;
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|tok| parse_f64(tok, ln, "matrix entry"))
            .collect::<Result<_>>()?;
        if row.len() != n + 1 {
            return Err(Error::Parse {
                line: ln,
                reason: format!("row {i} has {} values, expected {}", row.len(), n + 1),
            });
        }
        rows.push(row);
    }

    let mut vars = Vec::new();
    let mut beta = None;
    let mut pending = lines.next()?;
    if let Some((ln, line)) = &pending {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.first() == Some(&"VARS") {
            if toks.len() != 2 {
                return Err(Error::Parse {
                    line: *ln,
                    reason: "VARS takes exactly one count".into(),
                });
            }
            let count = parse_usize(toks[1], *ln, "variable count")?;
            for i in 0..count {
                let (ln, line) = lines.expect(&format!("variable {i}"))?;
                vars.push(parse_var(ln, &line)?);
            }
            pending = lines.next()?;
        }
    }
    if let Some((ln, line)) = &pending {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.first() == Some(&"BETA") {
            if toks.len() != 2 {
                return Err(Error::Parse {
                    line: *ln,
                    reason: "BETA takes exactly one value".into(),
                });
            }
            beta = Some(parse_usize(toks[1], *ln, "boundary")?);
            pending = lines.next()?;
        }
    }
    if let Some((ln, line)) = pending {
        return Err(Error::Parse {
            line: ln,
            reason: format!("unexpected trailing content: {:?}", line.trim()),
        });
    }

    let base = AugmentedMatrix::from_rows(&rows)?;
    let sys = TimeVaryingSystem::new(base, vars)?;
    if let Some(b) = beta {
        if b > n {
            return Err(Error::Parse {
                line: 0,
                reason: format!("boundary {b} exceeds order {n}"),
            });
        }
    }
    Ok((sys, beta))
}

/// Reads a system, ignoring any `BETA` trailer.
pub fn read_system(r: impl BufRead) -> Result<TimeVaryingSystem> {
    read_system_with_beta(r).map(|(sys, _)| sys)
}
