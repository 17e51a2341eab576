//! Minimal SVG emission for disk covers: the ambient disk, punctures and
//! their removed neighborhoods, the path, and the cover disks.

use crate::punctured::{DiskCover, PuncturedDisk};
use crate::C64;
use std::fmt::Write;

const CANVAS: f64 = 1000.0;

struct Mapper {
    cx: f64,
    cy: f64,
    scale: f64,
}

impl Mapper {
    fn new(pd: &PuncturedDisk) -> Mapper {
        let scale = CANVAS / (2.2 * pd.radius);
        Mapper { cx: pd.center.re, cy: pd.center.im, scale }
    }

    fn x(&self, z: C64) -> f64 {
        CANVAS / 2.0 + (z.re - self.cx) * self.scale
    }

    fn y(&self, z: C64) -> f64 {
        // SVG y axis points down
        CANVAS / 2.0 - (z.im - self.cy) * self.scale
    }

    fn r(&self, radius: f64) -> f64 {
        radius * self.scale
    }
}

fn circle(out: &mut String, m: &Mapper, center: C64, radius: f64, style: &str) {
    writeln!(
        out,
        r#"  <circle cx="{:.3}" cy="{:.3}" r="{:.3}" {}/>"#,
        m.x(center),
        m.y(center),
        m.r(radius).max(0.5),
        style
    )
    .unwrap();
}

/// Render a punctured disk, a path through it, and a disk cover.
pub fn render_cover(pd: &PuncturedDisk, cover: &DiskCover) -> String {
    let m = Mapper::new(pd);
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {CANVAS} {CANVAS}">"#
    )
    .unwrap();
    writeln!(out, r#"  <rect width="{CANVAS}" height="{CANVAS}" fill="white"/>"#).unwrap();

    circle(&mut out, &m, pd.center, pd.radius, r#"fill="none" stroke="black" stroke-width="2""#);
    for &z in &pd.punctures {
        circle(&mut out, &m, z, pd.delta, r##"fill="#fbb" stroke="red" stroke-width="1""##);
        circle(&mut out, &m, z, pd.radius / 400.0, r#"fill="red""#);
    }
    for d in &cover.disks {
        circle(
            &mut out,
            &m,
            d.center,
            d.radius,
            r##"fill="#cdf5" stroke="#36c" stroke-width="1""##,
        );
    }
    if cover.path.len() >= 2 {
        let pts: Vec<String> = cover
            .path
            .iter()
            .map(|&z| format!("{:.3},{:.3}", m.x(z), m.y(z)))
            .collect();
        writeln!(
            out,
            r#"  <polyline points="{}" fill="none" stroke="green" stroke-width="2"/>"#,
            pts.join(" ")
        )
        .unwrap();
    }
    writeln!(out, "</svg>").unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::punctured::{build_disk_chain, find_path};

    #[test]
    fn render_is_wellformed() {
        let pd = PuncturedDisk::new(C64::new(0.0, 0.0), 1.0, vec![C64::new(0.0, 0.0)], 0.01);
        let path = find_path(&pd, C64::new(-0.5, 0.0), C64::new(0.5, 0.0), 512).unwrap();
        let cover = build_disk_chain(&pd, &path).unwrap();
        let svg = render_cover(&pd, &cover);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.matches("<circle").count() >= cover.disks.len());
        assert!(svg.contains("<polyline"));
    }
}
