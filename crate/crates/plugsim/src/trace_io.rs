//! Mission trace CSV and the mapping from demonstration recordings.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use plugsim_core::demo::{detect_phases, differentiate, DemoTrace};
use plugsim_core::geometry::MisalignmentAngles;
use plugsim_core::impedance::ControllerCommand;
use plugsim_core::mission::{MissionTrace, Phase, TraceRow};

use crate::demo_io::{check_header, csv_error, parse_field, DEMO_HEADER};
use crate::{Error, Result};

pub const TRACE_HEADER: [&str; 11] = [
    "t_s",
    "phase",
    "theta_x_deg",
    "theta_y_deg",
    "depth_mm",
    "fx_n",
    "fy_n",
    "fz_n",
    "cmd_wx_rad_s",
    "cmd_wy_rad_s",
    "cmd_vz_mm_s",
];

pub fn write_mission_trace(writer: impl Write, trace: &MissionTrace) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Invalid(format!("writing mission trace: {e}"));
    w.write_record(TRACE_HEADER).map_err(io)?;
    for r in &trace.rows {
        let (tx, ty) = r.theta.to_degrees();
        let nums = [
            tx,
            ty,
            r.z,
            r.force[0],
            r.force[1],
            r.force[2],
            r.cmd.omega_x,
            r.cmd.omega_y,
            r.cmd.v_z,
        ];
        let mut record = vec![r.t.to_string(), r.phase.as_str().to_owned()];
        record.extend(nums.iter().map(f64::to_string));
        w.write_record(&record).map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::Invalid(format!("writing mission trace: {e}")))?;
    Ok(())
}

pub fn read_mission_trace(reader: impl Read, source_name: &str) -> Result<MissionTrace> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| csv_error(source_name, e))?
        .clone();
    check_header(source_name, &header, &TRACE_HEADER)?;
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(source_name, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let f = |i| parse_field(source_name, &record, &TRACE_HEADER, i);
        let phase: Phase =
            record
                .get(1)
                .unwrap_or("")
                .parse()
                .map_err(|e: plugsim_core::Error| Error::Parse {
                    source_name: source_name.to_owned(),
                    line,
                    message: e.to_string(),
                })?;
        rows.push(TraceRow {
            t: f(0)?,
            phase,
            theta: MisalignmentAngles::from_degrees(f(2)?, f(3)?),
            z: f(4)?,
            force: [f(5)?, f(6)?, f(7)?],
            cmd: ControllerCommand {
                omega_x: f(8)?,
                omega_y: f(9)?,
                v_z: f(10)?,
            },
        });
    }
    Ok(MissionTrace { rows })
}

pub fn save_mission_trace(path: &Path, trace: &MissionTrace) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_mission_trace(std::io::BufWriter::new(file), trace)
}

/// Reads a mission trace, or a demonstration trace converted with
/// [`demo_to_mission`], depending on the header.
pub fn load_any_trace(path: &Path) -> Result<MissionTrace> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let first = text.lines().next().unwrap_or("");
    if first.trim_end() == DEMO_HEADER.join(",") {
        let user = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("unknown");
        let demo = crate::demo_io::read_demo_trace(text.as_bytes(), user, &name)?;
        return demo_to_mission(&demo).map_err(|source| Error::Trace {
            source_name: name,
            source,
        });
    }
    read_mission_trace(text.as_bytes(), &name)
}

/// Maps a demonstration onto the mission trace schema.
///
/// - phase: `plug_in` up to the end of the detected plug-in interval,
///   `plug_out` up to the end of the plug-out interval, `done` afterwards;
/// - angles from the pose, depth from the pose's z translation;
/// - command columns hold the measured angular and axial velocities.
pub fn demo_to_mission(demo: &DemoTrace) -> plugsim_core::Result<MissionTrace> {
    let phases = detect_phases(demo)?;
    let angles = demo.misalignment()?;
    let t = demo.times();
    let depth: Vec<f64> = demo
        .samples()
        .iter()
        .map(|s| s.pose.translation[2])
        .collect();
    let wx = differentiate(&t, &angles.iter().map(|a| a.theta_x).collect::<Vec<_>>());
    let wy = differentiate(&t, &angles.iter().map(|a| a.theta_y).collect::<Vec<_>>());
    let vz = differentiate(&t, &depth);
    let rows = demo
        .samples()
        .iter()
        .enumerate()
        .map(|(i, s)| TraceRow {
            t: s.t,
            phase: if s.t <= phases.plug_in[1] {
                Phase::PlugIn
            } else if s.t <= phases.plug_out[1] {
                Phase::PlugOut
            } else {
                Phase::Done
            },
            theta: angles[i],
            z: depth[i],
            force: s.force,
            cmd: ControllerCommand {
                omega_x: wx[i],
                omega_y: wy[i],
                v_z: vz[i],
            },
        })
        .collect();
    Ok(MissionTrace { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_hand_built_trace() {
        let text = "t_s,phase,theta_x_deg,theta_y_deg,depth_mm,fx_n,fy_n,fz_n,cmd_wx_rad_s,cmd_wy_rad_s,cmd_vz_mm_s\n\
                    0,plug_in,1,2,0,0,0,-70,0,0,5\n\
                    0.01,plug_in,1,2,0.05,0,0,-80,0,0,5\n\
                    0.02,plug_out,1,2,0.1,0,0,70,0,0,-5\n";
        let trace = read_mission_trace(text.as_bytes(), "mem").unwrap();
        assert_eq!(trace.rows.len(), 3);
        assert_eq!(trace.rows[2].phase, Phase::PlugOut);
        assert!((trace.rows[0].theta.theta_x - 1f64.to_radians()).abs() < 1e-15);
    }

    #[test]
    fn bad_header_names_column() {
        let text = "t_s,phase,theta_x,theta_y_deg\n";
        match read_mission_trace(text.as_bytes(), "mem").unwrap_err() {
            Error::Column {
                index,
                found,
                expected,
                ..
            } => {
                assert_eq!(index, 2);
                assert_eq!(found, "theta_x");
                assert_eq!(expected, "theta_x_deg");
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn unknown_phase_is_rejected() {
        let text = format!("{}\n0,landing,0,0,0,0,0,0,0,0,0\n", TRACE_HEADER.join(","));
        assert!(matches!(
            read_mission_trace(text.as_bytes(), "mem"),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
