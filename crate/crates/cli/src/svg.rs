//! Self-contained SVG heat map of smin over a rectangular grid.

use std::fmt::Write;

pub struct HeatMap<'a> {
    pub re: (f64, f64),
    pub im: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    /// row-major, row 0 at im.0
    pub values: &'a [f64],
}

const W: f64 = 480.0;

/// log10 of the value mapped onto a blue-to-yellow ramp between the grid extremes.
fn color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let r = (68.0 + t * (253.0 - 68.0)) as u8;
    let g = (1.0 + t * (231.0 - 1.0)) as u8;
    let b = (84.0 + t * (37.0 - 84.0)) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

pub fn render(h: &HeatMap) -> String {
    let hgt = W * (h.im.1 - h.im.0) / (h.re.1 - h.re.0);
    let sx = W / (h.re.1 - h.re.0);
    let px = |x: f64| (x - h.re.0) * sx;
    let py = |y: f64| hgt - (y - h.im.0) * sx;
    let logs: Vec<f64> = h.values.iter().map(|v| v.max(1e-16).log10()).collect();
    let lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1e-12);
    let cw = W / h.nx as f64;
    let ch = hgt / h.ny as f64;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{hgt:.1}" viewBox="0 0 {W} {hgt:.1}">"#);
    let _ = writeln!(s, "<title>log10 smin(C_N - lambda)</title>");
    for j in 0..h.ny {
        for i in 0..h.nx {
            let t = (logs[j * h.nx + i] - lo) / span;
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                i as f64 * cw,
                hgt - (j + 1) as f64 * ch,
                cw + 0.05,
                ch + 0.05,
                color(t)
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="none" stroke="white" stroke-width="1.5"/>"#,
        px(1.0),
        py(0.0),
        sx
    );
    let _ = writeln!(s, r#"<text x="4" y="14" font-size="11" fill="white">log10 smin in [{lo:.2}, {hi:.2}]</text>"#);
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn document_shape() {
        let v = [1.0, 0.1, 0.01, 0.5];
        let s = render(&HeatMap { re: (0.0, 2.0), im: (-1.0, 1.0), nx: 2, ny: 2, values: &v });
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert_eq!(s.matches("<rect").count(), 4);
        assert_eq!(s.matches("<circle").count(), 1);
    }
}
