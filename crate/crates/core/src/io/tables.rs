use std::io::{Read, Write};

use crate::analysis::Spectrum;
use crate::error::{Error, Result};
use crate::sequence::{Exposure, SignalTrace, SweepParameter};

pub const TRACE_HEADER: [&str; 5] = ["abscissa", "ordinate", "exposure_echo", "exposure_lock", "exposure_laser"];

fn comment<W: Write>(out: &mut W, provenance: &str) -> Result<()> {
    for line in provenance.lines() {
        writeln!(out, "# {line}")?;
    }
    Ok(())
}

/// Writes `# provenance` lines, a header row and one row per point. Missing
/// exposures are written as zero.
pub fn write_trace_csv<W: Write>(mut out: W, trace: &SignalTrace, provenance: &str) -> Result<()> {
    trace.check_shape()?;
    comment(&mut out, provenance)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for i in 0..trace.len() {
        let e = trace.exposures.get(i).copied().unwrap_or_default();
        w.write_record(
            [trace.abscissa[i], trace.ordinate[i], e.echo, e.lock, e.laser].iter().map(|v| v.to_string()),
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_spectrum_csv<W: Write>(mut out: W, spectrum: &Spectrum, provenance: &str) -> Result<()> {
    comment(&mut out, provenance)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["frequency", "power"])?;
    for (f, p) in spectrum.frequencies.iter().zip(&spectrum.power) {
        w.write_record([f.to_string(), p.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads either the simulator schema or a bare two-column file (header
/// optional). Comment lines start with `#`.
pub fn read_trace_csv<R: Read>(input: R, parameter: SweepParameter) -> Result<SignalTrace> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).comment(Some(b'#')).trim(csv::Trim::All).from_reader(input);
    let mut rows: Vec<(u64, Vec<f64>)> = Vec::new();
    let mut with_exposures = false;
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) => rows.push((line, v)),
            Err(_) if k == 0 && rows.is_empty() => {
                with_exposures = rec.len() == TRACE_HEADER.len() && rec.iter().zip(TRACE_HEADER).all(|(a, b)| a == b);
                if !with_exposures && rec.len() < 2 {
                    return Err(Error::InvalidTrace(format!("line {line}: need at least two columns")));
                }
            }
            Err(_) => return Err(Error::InvalidTrace(format!("line {line}: non-numeric field"))),
        }
    }
    let width = if with_exposures { 5 } else { 2 };
    let (mut x, mut y, mut exposures) = (Vec::new(), Vec::new(), Vec::new());
    for (line, v) in rows {
        if v.len() < width {
            return Err(Error::InvalidTrace(format!("line {line}: expected {width} columns, got {}", v.len())));
        }
        x.push(v[0]);
        y.push(v[1]);
        if with_exposures {
            exposures.push(Exposure { echo: v[2], lock: v[3], laser: v[4] });
        }
    }
    if x.is_empty() {
        return Err(Error::InvalidTrace("no data rows".into()));
    }
    let mut tr = SignalTrace::new(parameter, x, y)?;
    tr.exposures = exposures;
    Ok(tr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut tr = SignalTrace::new(SweepParameter::EchoTime, vec![0.0, 1e-6, 2.5e-6], vec![1.0, 0.25, -0.125]).unwrap();
        tr.exposures = vec![Exposure { echo: 0.0, lock: 1.5e-5, laser: 0.0 }; 3];
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &tr, "run a\nseed 3").unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# run a\n# seed 3\nabscissa,ordinate,"));
        let back = read_trace_csv(&buf[..], SweepParameter::EchoTime).unwrap();
        assert_eq!(back.abscissa, tr.abscissa);
        assert_eq!(back.ordinate, tr.ordinate);
        assert_eq!(back.exposures, tr.exposures);
    }

    #[test]
    fn two_columns() {
        let t = read_trace_csv("t,y\n0,1\n1e-6,0.5\n".as_bytes(), SweepParameter::EchoTime).unwrap();
        assert_eq!(t.ordinate, vec![1.0, 0.5]);
        assert!(t.exposures.is_empty());
        let t = read_trace_csv("0,1\n1,0.5\n".as_bytes(), SweepParameter::EchoTime).unwrap();
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn bad_rows_name_the_line() {
        let e = read_trace_csv("x,y\n0,1\n1,oops\n".as_bytes(), SweepParameter::EchoTime).unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
        assert!(read_trace_csv("# only a comment\n".as_bytes(), SweepParameter::EchoTime).is_err());
    }
}
