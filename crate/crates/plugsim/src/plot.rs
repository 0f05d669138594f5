//! Two-panel SVG of a mission: tilt angles and axial force against time.

use std::fmt::Write;

use plugsim_core::mission::MissionTrace;

const WIDTH: f64 = 800.0;
const PANEL_HEIGHT: f64 = 260.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const GAP: f64 = 60.0;

struct Panel {
    top: f64,
    t_range: (f64, f64),
    y_range: (f64, f64),
}

impl Panel {
    fn x(&self, t: f64) -> f64 {
        let (a, b) = self.t_range;
        MARGIN_LEFT + (t - a) / (b - a) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        let (lo, hi) = self.y_range;
        self.top + (hi - v) / (hi - lo) * PANEL_HEIGHT
    }

    fn polyline(
        &self,
        out: &mut String,
        points: impl Iterator<Item = (f64, f64)>,
        color: &str,
        dashed: bool,
    ) {
        let pts: Vec<String> = points
            .map(|(t, v)| format!("{:.2},{:.2}", self.x(t), self.y(v)))
            .collect();
        let dash = if dashed {
            r#" stroke-dasharray="6,4""#
        } else {
            ""
        };
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#,
            pts.join(" ")
        );
    }

    fn frame(&self, out: &mut String, title: &str, y_label: &str) {
        let right = WIDTH - MARGIN_RIGHT;
        let bottom = self.top + PANEL_HEIGHT;
        let _ = writeln!(
            out,
            r#"<rect x="{MARGIN_LEFT}" y="{}" width="{}" height="{PANEL_HEIGHT}" fill="none" stroke="black"/>"#,
            self.top,
            right - MARGIN_LEFT
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{title}</text>"#,
            WIDTH / 2.0,
            self.top - 10.0
        );
        let _ = writeln!(
            out,
            r#"<text x="15" y="{0}" transform="rotate(-90 15 {0})" text-anchor="middle">{y_label}</text>"#,
            self.top + PANEL_HEIGHT / 2.0
        );
        for k in 0..=4 {
            let v = self.y_range.0 + (self.y_range.1 - self.y_range.0) * k as f64 / 4.0;
            let y = self.y(v);
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{:.2}" text-anchor="end" font-size="11">{v:.1}</text>"#,
                MARGIN_LEFT - 5.0,
                y + 4.0
            );
            let t = self.t_range.0 + (self.t_range.1 - self.t_range.0) * k as f64 / 4.0;
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{}" text-anchor="middle" font-size="11">{t:.1}</text>"#,
                self.x(t),
                bottom + 15.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">t (s)</text>"#,
            WIDTH / 2.0,
            bottom + 32.0
        );
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(hi > lo) {
        return (lo - 1.0, hi + 1.0);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

pub fn mission_svg(trace: &MissionTrace, f_z_refs: (f64, f64)) -> String {
    let rows = &trace.rows;
    let t_range = match (rows.first(), rows.last()) {
        (Some(a), Some(b)) if b.t > a.t => (a.t, b.t),
        (Some(a), _) => (a.t, a.t + 1.0),
        _ => (0.0, 1.0),
    };
    let degs: Vec<(f64, f64, f64)> = rows
        .iter()
        .map(|r| {
            let (x, y) = r.theta.to_degrees();
            (r.t, x, y)
        })
        .collect();
    let angle_vals = degs.iter().flat_map(|d| [d.1, d.2]);
    let (a_lo, a_hi) = angle_vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    let force_vals = rows
        .iter()
        .map(|r| r.force[2])
        .chain([f_z_refs.0, f_z_refs.1]);
    let (f_lo, f_hi) = force_vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });

    let angles = Panel {
        top: MARGIN_TOP,
        t_range,
        y_range: padded(a_lo.min(0.0), a_hi.max(0.0)),
    };
    let forces = Panel {
        top: MARGIN_TOP + PANEL_HEIGHT + GAP,
        t_range,
        y_range: padded(f_lo, f_hi),
    };
    let height = forces.top + PANEL_HEIGHT + 45.0;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="13">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    angles.frame(&mut out, "Misalignment angles", "angle (deg)");
    angles.polyline(&mut out, degs.iter().map(|d| (d.0, d.1)), "#1f77b4", false);
    angles.polyline(&mut out, degs.iter().map(|d| (d.0, d.2)), "#d62728", false);
    let _ = writeln!(
        out,
        r##"<text x="{}" y="{}" fill="#1f77b4">θx</text>"##,
        WIDTH - 80.0,
        MARGIN_TOP + 18.0
    );
    let _ = writeln!(
        out,
        r##"<text x="{}" y="{}" fill="#d62728">θy</text>"##,
        WIDTH - 50.0,
        MARGIN_TOP + 18.0
    );

    forces.frame(&mut out, "Axial force", "Fz (N)");
    for r in [f_z_refs.0, f_z_refs.1] {
        forces.polyline(
            &mut out,
            [(t_range.0, r), (t_range.1, r)].into_iter(),
            "gray",
            true,
        );
    }
    forces.polyline(
        &mut out,
        rows.iter().map(|r| (r.t, r.force[2])),
        "#2ca02c",
        false,
    );
    out.push_str("</svg>\n");
    out
}
