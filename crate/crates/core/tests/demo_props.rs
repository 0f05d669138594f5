use plugsim_core::demo::*;
use proptest::prelude::*;

fn targets() -> impl Strategy<Value = UserSummary> {
    (
        (2.0..20.0f64, 2.0..15.0f64),
        (5.0..60.0f64, 5.0..60.0f64),
        (-110.0..-30.0f64, 30.0..100.0f64),
        0.05..0.8f64,
    )
        .prop_map(|((dx, dy), (fx, fy), (fin, fout), t_r)| UserSummary {
            delta_theta_x: dx.to_radians(),
            delta_theta_y: dy.to_radians(),
            delta_f_x: fx,
            delta_f_y: fy,
            f_z_plug_in: fin,
            f_z_plug_out: fout,
            t_response: Some(t_r),
        })
}

fn within(got: f64, want: f64) -> bool {
    (got - want).abs() <= 0.01 * want.abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn synthetic_round_trip(want in targets(), seed in any::<u64>()) {
        let trace = generate_synthetic_demo(&want, seed).unwrap();
        let got = summarize_user(&trace, &detect_phases(&trace).unwrap()).unwrap();
        prop_assert!(within(got.delta_theta_x, want.delta_theta_x), "{got:?}");
        prop_assert!(within(got.delta_theta_y, want.delta_theta_y), "{got:?}");
        prop_assert!(within(got.delta_f_x, want.delta_f_x), "{got:?}");
        prop_assert!(within(got.delta_f_y, want.delta_f_y), "{got:?}");
        prop_assert!(within(got.f_z_plug_in, want.f_z_plug_in), "{got:?}");
        prop_assert!(within(got.f_z_plug_out, want.f_z_plug_out), "{got:?}");
        prop_assert!(within(got.t_response.unwrap(), want.t_response.unwrap()), "{got:?}");
    }

    #[test]
    fn padding_does_not_move_phases(want in targets(), seed in any::<u64>(), before in 1usize..80, after in 1usize..80) {
        let trace = generate_synthetic_demo(&want, seed).unwrap();
        let mut samples = trace.samples().to_vec();
        let (first, last) = (samples[0], *samples.last().unwrap());
        let quiet = |t: f64, pose| DemoSample { t, force: [0.0; 3], torque: [0.0; 3], pose };
        let mut padded: Vec<DemoSample> = (1..=before).rev().map(|k| quiet(first.t - k as f64 * 0.01, first.pose)).collect();
        padded.append(&mut samples);
        padded.extend((1..=after).map(|k| quiet(last.t + k as f64 * 0.01, last.pose)));
        let padded = DemoTrace::new("padded", padded).unwrap();
        prop_assert_eq!(detect_phases(&trace).unwrap(), detect_phases(&padded).unwrap());
    }

    #[test]
    fn aggregate_ignores_order(list in prop::collection::vec(targets(), 1..12), rot in 0usize..12) {
        let mut shuffled = list.clone();
        let k = rot % list.len();
        shuffled.rotate_left(k);
        shuffled.reverse();
        let a = aggregate(&list).unwrap();
        let b = aggregate(&shuffled).unwrap();
        let pairs = [
            (a.delta_theta_x, b.delta_theta_x),
            (a.delta_f_y, b.delta_f_y),
            (a.f_z_plug_in, b.f_z_plug_in),
            (a.f_z_plug_out, b.f_z_plug_out),
        ];
        for (x, y) in pairs {
            prop_assert!((x.mean - y.mean).abs() <= 1e-12 * x.mean.abs());
            prop_assert!((x.std - y.std).abs() <= 1e-9 * x.mean.abs());
            prop_assert_eq!(x.extremum, y.extremum);
        }
    }

    #[test]
    fn gains_scale_consistently(list in prop::collection::vec(targets(), 1..6), depth in 1.0..80.0f64) {
        let stats = aggregate(&list).unwrap();
        let g = derive_gains(&stats, depth).unwrap();
        let mut doubled = stats;
        doubled.delta_theta_x.mean *= 2.0;
        doubled.delta_theta_y.mean *= 2.0;
        let g2 = derive_gains(&doubled, 2.0 * depth).unwrap();
        prop_assert_eq!(g2.k_w_rot_x, 2.0 * g.k_w_rot_x);
        prop_assert_eq!(g2.k_w_rot_y, 2.0 * g.k_w_rot_y);
        prop_assert_eq!(g2.k_w_lin_z, 2.0 * g.k_w_lin_z);
    }
}

#[test]
fn constructed_cohort_statistics() {
    // 23 values with mean 9.5 and population std 2.1, by construction.
    let offsets: Vec<f64> = (0..23).map(|i| i as f64 - 11.0).collect();
    let spread = (offsets.iter().map(|o| o * o).sum::<f64>() / 23.0).sqrt();
    let base = UserSummary {
        delta_theta_x: 0.0,
        delta_theta_y: 0.1,
        delta_f_x: 27.7,
        delta_f_y: 32.6,
        f_z_plug_in: -81.6,
        f_z_plug_out: 75.6,
        t_response: Some(0.26),
    };
    let cohort: Vec<UserSummary> = offsets
        .iter()
        .map(|o| UserSummary {
            delta_theta_x: (9.5 + 2.1 * o / spread).to_radians(),
            ..base
        })
        .collect();
    let s = aggregate(&cohort).unwrap();
    assert!((s.delta_theta_x.mean.to_degrees() - 9.5).abs() < 1e-9);
    assert!((s.delta_theta_x.std.to_degrees() - 2.1).abs() < 1e-9);
    assert_eq!(s.n_users, 23);
}
