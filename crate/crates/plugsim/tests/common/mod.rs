#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use plugsim::demo_io::save_demo_file;
use plugsim_core::demo::{generate_synthetic_demo, UserSummary};

/// (mean, extremum, std) of the reference cohort; angles in degrees.
pub const COHORT_TARGETS: [(f64, f64, f64); 7] = [
    (9.5, 14.8, 2.1),      // dtheta_x
    (6.8, 11.3, 1.8),      // dtheta_y
    (27.7, 49.8, 10.3),    // dF_x
    (32.6, 47.1, 7.9),     // dF_y
    (-81.6, -103.7, 14.5), // F_z plug-in (min)
    (75.6, 90.1, 8.6),     // F_z plug-out
    (0.26, 0.37, 0.08),    // t_response
];

pub const N_USERS: usize = 23;

/// Standardized scores for 23 users with mean 0, population std 1 and the
/// extreme value `k` on user 0. The others sit at two levels symmetric about
/// `-k/22`, which keeps them strictly inside the extreme for |k| < 4.
pub fn scores(k: f64) -> Vec<f64> {
    let n = N_USERS as f64;
    let rest = n - 1.0;
    let s = ((n - k * k * n / rest) / rest).sqrt();
    std::iter::once(k)
        .chain((0..N_USERS - 1).map(|j| -k / rest + if j % 2 == 0 { s } else { -s }))
        .collect()
}

/// Per-user targets whose cohort mean, extremum and population std equal
/// the reference cohort.
pub fn reference_cohort() -> Vec<UserSummary> {
    let columns: Vec<Vec<f64>> = COHORT_TARGETS
        .iter()
        .map(|&(mean, ext, std)| {
            scores((ext - mean) / std)
                .into_iter()
                .map(|w| mean + std * w)
                .collect()
        })
        .collect();
    (0..N_USERS)
        .map(|i| UserSummary {
            delta_theta_x: columns[0][i].to_radians(),
            delta_theta_y: columns[1][i].to_radians(),
            delta_f_x: columns[2][i],
            delta_f_y: columns[3][i],
            f_z_plug_in: columns[4][i],
            f_z_plug_out: columns[5][i],
            t_response: Some(columns[6][i]),
        })
        .collect()
}

/// Writes one synthetic demonstration per cohort member into `dir`.
pub fn write_cohort(dir: &Path) -> Vec<PathBuf> {
    reference_cohort()
        .iter()
        .enumerate()
        .map(|(i, target)| {
            let trace = generate_synthetic_demo(target, 1000 + i as u64).unwrap();
            let path = dir.join(format!("user{i:02}.csv"));
            save_demo_file(&path, &trace).unwrap();
            path
        })
        .collect()
}

pub fn plugsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plugsim"))
        .args(args)
        .env_remove(plugsim::SEED_ENV)
        .output()
        .unwrap()
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Value of a `key: value` line in command output.
pub fn field(text: &str, key: &str) -> Option<String> {
    text.lines().find_map(|l| {
        l.strip_prefix(key)
            .and_then(|r| r.strip_prefix(": "))
            .map(str::to_owned)
    })
}
