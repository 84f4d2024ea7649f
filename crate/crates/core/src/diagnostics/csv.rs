use std::io::{self, BufRead, Write};

use super::DiagnosticsRecord;

/// Formats like C's `%.17g`.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    // the exponent after rounding to 17 significant digits
    let sci = format!("{x:.16e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp) as usize;
        strip_zeros(format!("{x:.decimals$}"))
    } else {
        let mant = strip_zeros(mant.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    }
}

fn strip_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn header() -> String {
    DiagnosticsRecord::COLUMNS.join(",")
}

pub fn row(r: &DiagnosticsRecord) -> String {
    r.cells().join(",")
}

/// Streams records as CSV rows under a fixed header.
pub struct CsvSink<W: Write> {
    out: W,
}

impl<W: Write> CsvSink<W> {
    pub fn new(mut out: W) -> io::Result<Self> {
        writeln!(out, "{}", header())?;
        Ok(Self { out })
    }

    /// Continues an existing file without writing a header.
    pub fn append(out: W) -> Self {
        Self { out }
    }

    pub fn write(&mut self, r: &DiagnosticsRecord) -> io::Result<()> {
        writeln!(self.out, "{}", row(r))
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.out.flush()
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// Parses a CSV produced by [`CsvSink`].
pub fn read_records<R: BufRead>(input: R) -> io::Result<Vec<DiagnosticsRecord>> {
    let bad = |m: String| io::Error::new(io::ErrorKind::InvalidData, m);
    let mut lines = input.lines();
    let head = lines.next().transpose()?.ok_or_else(|| bad("empty file".into()))?;
    if head.trim() != header() {
        return Err(bad("unexpected header".into()));
    }
    let mut out = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        out.push(DiagnosticsRecord::from_cells(&cells).ok_or_else(|| bad(format!("malformed row {}", k + 2)))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn c_style_output() {
        assert_eq!(fmt_g17(0.0), "0");
        assert_eq!(fmt_g17(1.0), "1");
        assert_eq!(fmt_g17(0.1), "0.10000000000000001");
        assert_eq!(fmt_g17(-2.5), "-2.5");
        assert_eq!(fmt_g17(1e-5), "1.0000000000000001e-05");
        assert_eq!(fmt_g17(1e17), "1e+17");
        assert_eq!(fmt_g17(123456.0), "123456");
        assert_eq!(fmt_g17(1e-4), "0.0001");
        assert_eq!(fmt_g17(f64::NAN), "nan");
    }

    proptest! {
        #[test]
        fn round_trips_exactly(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let s = fmt_g17(x);
            prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn sink_round_trip() {
        let recs = vec![
            DiagnosticsRecord { t: 0.0, rho_l2: 1.25, ..Default::default() },
            DiagnosticsRecord { t: 0.1, rho_l2: 1.0 / 3.0, picard_iterations: 3, ..Default::default() },
        ];
        let mut sink = CsvSink::new(Vec::new()).unwrap();
        for r in &recs {
            sink.write(r).unwrap();
        }
        let bytes = sink.into_inner();
        assert_eq!(read_records(&bytes[..]).unwrap(), recs);
    }
}
