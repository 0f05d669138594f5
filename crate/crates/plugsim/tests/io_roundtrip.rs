mod common;

use plugsim::demo_io::{read_demo_trace, write_demo_trace};
use plugsim::trace_io::{read_mission_trace, write_mission_trace, TRACE_HEADER};
use plugsim::Error;
use plugsim_core::demo::generate_synthetic_demo;
use plugsim_core::geometry::MisalignmentAngles;
use plugsim_core::impedance::ControllerCommand;
use plugsim_core::mission::{MissionTrace, Phase, TraceRow};
use proptest::prelude::*;

#[test]
fn demo_csv_roundtrip() {
    let target = common::reference_cohort()[3];
    let demo = generate_synthetic_demo(&target, 7).unwrap();
    let mut buf = Vec::new();
    write_demo_trace(&mut buf, &demo).unwrap();
    let back = read_demo_trace(buf.as_slice(), "u", "mem").unwrap();
    assert_eq!(back.samples().len(), demo.samples().len());
    for (a, b) in demo.samples().iter().zip(back.samples()) {
        assert_eq!(a.t, b.t);
        assert_eq!(a.force, b.force);
        assert_eq!(a.torque, b.torque);
        assert_eq!(a.pose.translation, b.pose.translation);
        // Quaternion conversion is exact only to rounding.
        let (ma, mb) = (a.pose.rotation.matrix(), b.pose.rotation.matrix());
        for i in 0..3 {
            for j in 0..3 {
                assert!((ma[i][j] - mb[i][j]).abs() < 1e-15, "{ma:?} vs {mb:?}");
            }
        }
    }
}

#[test]
fn demo_header_mismatch_names_column() {
    let csv = "t_s,fx_n,fy_n,fz_n,tx_nm,ty_nm,tz_nm,qw,qx,qy,qz,px_mm,py_mm,depth\n";
    match read_demo_trace(csv.as_bytes(), "u", "bad.csv") {
        Err(Error::Column {
            index,
            found,
            expected,
            ..
        }) => {
            assert_eq!(
                (index, found.as_str(), expected.as_str()),
                (13, "depth", "pz_mm")
            );
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn non_numeric_field_reports_line() {
    let mut csv = TRACE_HEADER.join(",");
    csv += "\n0,plug_in,0,0,0,0,0,0,0,0,0\n0.01,plug_in,0,0,x,0,0,0,0,0,0\n";
    match read_mission_trace(csv.as_bytes(), "t.csv") {
        Err(Error::Parse { line, message, .. }) => {
            assert_eq!(line, 3);
            assert!(message.contains("depth_mm"), "{message}");
        }
        other => panic!("{other:?}"),
    }
}

fn phase() -> impl Strategy<Value = Phase> {
    prop_oneof![
        Just(Phase::PlugIn),
        Just(Phase::PlugOut),
        Just(Phase::Done),
        Just(Phase::Fault)
    ]
}

fn row() -> impl Strategy<Value = TraceRow> {
    let v = -1e3..1e3f64;
    (
        0.0..100.0f64,
        phase(),
        -0.3..0.3f64,
        -0.3..0.3f64,
        v.clone(),
        [v.clone(), v.clone(), v.clone()],
        [v.clone(), v.clone(), v],
    )
        .prop_map(|(t, phase, tx, ty, z, force, c)| TraceRow {
            t,
            phase,
            theta: MisalignmentAngles::new(tx, ty),
            z,
            force,
            cmd: ControllerCommand {
                omega_x: c[0],
                omega_y: c[1],
                v_z: c[2],
            },
        })
}

proptest! {
    #[test]
    fn mission_csv_roundtrip(rows in prop::collection::vec(row(), 0..40)) {
        let trace = MissionTrace { rows };
        let mut buf = Vec::new();
        write_mission_trace(&mut buf, &trace).unwrap();
        let back = read_mission_trace(buf.as_slice(), "mem").unwrap();
        prop_assert_eq!(back.rows.len(), trace.rows.len());
        for (a, b) in trace.rows.iter().zip(&back.rows) {
            prop_assert_eq!(a.t, b.t);
            prop_assert_eq!(a.phase, b.phase);
            prop_assert_eq!(a.z, b.z);
            prop_assert_eq!(a.force, b.force);
            prop_assert_eq!(a.cmd, b.cmd);
            // Angles are stored in degrees.
            prop_assert!((a.theta.theta_x - b.theta.theta_x).abs() <= 1e-16);
            prop_assert!((a.theta.theta_y - b.theta.theta_y).abs() <= 1e-16);
        }
    }
}
