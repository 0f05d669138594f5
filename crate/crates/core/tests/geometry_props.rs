use plugsim_core::geometry::{
    apply, extract_misalignment, norm, rotation_about_axis, Axis, MisalignmentAngles, Rotation,
};
use proptest::prelude::*;

fn angle() -> impl Strategy<Value = f64> {
    -std::f64::consts::PI..std::f64::consts::PI
}

fn rotation() -> impl Strategy<Value = Rotation> {
    (angle(), angle(), angle()).prop_map(|(a, b, c)| {
        rotation_about_axis(Axis::Z, a)
            .compose(&rotation_about_axis(Axis::Y, b))
            .compose(&rotation_about_axis(Axis::X, c))
    })
}

proptest! {
    #[test]
    fn apply_preserves_norm(r in rotation(), v in prop::array::uniform3(-100.0..100.0f64)) {
        prop_assert!((norm(apply(&r, v)) - norm(v)).abs() <= 1e-9 * norm(v).max(1.0));
    }

    #[test]
    fn composition_is_associative(a in rotation(), b in rotation(), c in rotation()) {
        let left = a.compose(&b).compose(&c).matrix();
        let right = a.compose(&b.compose(&c)).matrix();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((left[i][j] - right[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn extraction_is_odd(tx in -0.26..0.26f64, ty in -0.26..0.26f64) {
        let axis = |t: MisalignmentAngles| extract_misalignment(t.to_rotation().charger_axis()).unwrap();
        let pos = axis(MisalignmentAngles::new(tx, ty));
        let neg_x = axis(MisalignmentAngles::new(-tx, ty));
        let neg_y = axis(MisalignmentAngles::new(tx, -ty));
        prop_assert_eq!(neg_x.theta_x, -pos.theta_x);
        prop_assert_eq!(neg_x.theta_y, pos.theta_y);
        prop_assert_eq!(neg_y.theta_x, pos.theta_x);
        prop_assert_eq!(neg_y.theta_y, -pos.theta_y);
    }

    #[test]
    fn quaternion_round_trip(r in rotation()) {
        let back = Rotation::from_quaternion(r.to_quaternion()).unwrap().matrix();
        let m = r.matrix();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((back[i][j] - m[i][j]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn extraction_is_reproducible() {
    let r = rotation_about_axis(Axis::Y, 0.1).compose(&rotation_about_axis(Axis::X, 0.2));
    let a = extract_misalignment(apply(&r, [0.0, 0.0, 1.0])).unwrap();
    let b = extract_misalignment(apply(&r, [0.0, 0.0, 1.0])).unwrap();
    assert_eq!(a.theta_x.to_bits(), b.theta_x.to_bits());
    assert_eq!(a.theta_y.to_bits(), b.theta_y.to_bits());
}
