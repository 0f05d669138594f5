//! Demonstration trace CSV: one file per user, file stem is the user id.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use plugsim_core::demo::{DemoSample, DemoTrace};
use plugsim_core::geometry::{Pose, Rotation};

use crate::{Error, Result};

pub const DEMO_HEADER: [&str; 14] = [
    "t_s", "fx_n", "fy_n", "fz_n", "tx_nm", "ty_nm", "tz_nm", "qw", "qx", "qy", "qz", "px_mm",
    "py_mm", "pz_mm",
];

/// Checks a header row against `expected`, naming the first bad column.
pub(crate) fn check_header(
    source_name: &str,
    found: &csv::StringRecord,
    expected: &[&str],
) -> Result<()> {
    for i in 0..found.len().max(expected.len()) {
        let (got, want) = (found.get(i), expected.get(i));
        if got != want.copied() {
            return Err(Error::Column {
                source_name: source_name.to_owned(),
                index: i,
                found: got.unwrap_or("<missing>").to_owned(),
                expected: want.copied().unwrap_or("<none>").to_owned(),
            });
        }
    }
    Ok(())
}

pub(crate) fn csv_error(source_name: &str, err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    Error::Parse {
        source_name: source_name.to_owned(),
        line,
        message: err.to_string(),
    }
}

pub(crate) fn parse_field(
    source_name: &str,
    record: &csv::StringRecord,
    header: &[&str],
    i: usize,
) -> Result<f64> {
    let line = record.position().map_or(0, |p| p.line());
    let raw = record.get(i).unwrap_or("");
    raw.trim().parse::<f64>().map_err(|_| Error::Parse {
        source_name: source_name.to_owned(),
        line,
        message: format!("column {} is not a number: {raw:?}", header[i]),
    })
}

pub fn read_demo_trace(reader: impl Read, user_id: &str, source_name: &str) -> Result<DemoTrace> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| csv_error(source_name, e))?
        .clone();
    check_header(source_name, &header, &DEMO_HEADER)?;
    let mut samples = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(source_name, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let mut v = [0.0; 14];
        for (i, slot) in v.iter_mut().enumerate() {
            *slot = parse_field(source_name, &record, &DEMO_HEADER, i)?;
        }
        let bad_row = |e: plugsim_core::Error| Error::Parse {
            source_name: source_name.to_owned(),
            line,
            message: e.to_string(),
        };
        let rotation = Rotation::from_quaternion([v[7], v[8], v[9], v[10]]).map_err(bad_row)?;
        let pose = Pose::new(rotation, [v[11], v[12], v[13]]).map_err(bad_row)?;
        samples.push(DemoSample {
            t: v[0],
            force: [v[1], v[2], v[3]],
            torque: [v[4], v[5], v[6]],
            pose,
        });
    }
    DemoTrace::new(user_id, samples).map_err(|source| Error::Trace {
        source_name: source_name.to_owned(),
        source,
    })
}

pub fn write_demo_trace(writer: impl Write, trace: &DemoTrace) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Invalid(format!("writing demo trace: {e}"));
    w.write_record(DEMO_HEADER).map_err(io)?;
    for s in trace.samples() {
        let q = s.pose.rotation.to_quaternion();
        let p = s.pose.translation;
        let row = [
            s.t,
            s.force[0],
            s.force[1],
            s.force[2],
            s.torque[0],
            s.torque[1],
            s.torque[2],
            q[0],
            q[1],
            q[2],
            q[3],
            p[0],
            p[1],
            p[2],
        ];
        w.write_record(row.iter().map(f64::to_string)).map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::Invalid(format!("writing demo trace: {e}")))?;
    Ok(())
}

pub fn load_demo_file(path: &Path) -> Result<DemoTrace> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let user_id = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("unknown");
    read_demo_trace(file, user_id, &path.display().to_string())
}

pub fn save_demo_file(path: &Path, trace: &DemoTrace) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_demo_trace(std::io::BufWriter::new(file), trace)
}

/// `*.csv` files of `dir`, sorted by name.
pub fn demo_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv")))
        .collect();
    files.sort();
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "t_s,fx_n,fy_n,fz_n,tx_nm,ty_nm,tz_nm,qw,qx,qy,qz,px_mm,py_mm,pz_mm\n";

    #[test]
    fn reads_small_file() {
        let body = "0.00,0,0,-1,0,0,0,1,0,0,0,0,0,0\n0.01,0,0,-2,0,0,0,1,0,0,0,0,0,1\n0.02,1,2,-3,0,0,0,1,0,0,0,0,0,2\n";
        let trace = read_demo_trace(format!("{HEADER}{body}").as_bytes(), "u7", "mem").unwrap();
        assert_eq!(trace.samples().len(), 3);
        assert_eq!(trace.user_id(), "u7");
        assert_eq!(trace.samples()[2].force, [1.0, 2.0, -3.0]);
    }

    #[test]
    fn decreasing_time_is_a_validation_error() {
        let body = "0.02,0,0,0,0,0,0,1,0,0,0,0,0,0\n0.01,0,0,0,0,0,0,1,0,0,0,0,0,0\n";
        let err = read_demo_trace(format!("{HEADER}{body}").as_bytes(), "u", "mem").unwrap_err();
        assert!(
            matches!(
                err,
                Error::Trace {
                    source: plugsim_core::Error::Validation(_),
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn malformed_row_reports_line() {
        let body = "0.00,0,0,0,0,0,0,1,0,0,0,0,0,0\n0.01,0,zero,0,0,0,0,1,0,0,0,0,0,0\n";
        match read_demo_trace(format!("{HEADER}{body}").as_bytes(), "u", "mem").unwrap_err() {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("fy_n"));
            }
            other => panic!("{other}"),
        }
        let short = "0.00,0,0\n";
        assert!(matches!(
            read_demo_trace(format!("{HEADER}{short}").as_bytes(), "u", "mem"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn wrong_header_names_column() {
        let err = read_demo_trace("t_s,fx,fy\n".as_bytes(), "u", "mem").unwrap_err();
        assert!(matches!(err, Error::Column { index: 1, .. }), "{err}");
    }
}
