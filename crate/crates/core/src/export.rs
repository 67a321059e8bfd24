//! Output helpers: fixed-precision JSON floats, CSV tables, SVG plots.

use std::fmt::Write as _;

use num_complex::Complex64;

/// `serialize_with` adapters printing floats with 17 significant digits, so
/// reports are byte-identical across runs. Non-finite values become `null`.
pub mod json {
    use num_complex::Complex64;
    use serde::ser::{SerializeSeq, Serializer};
    use serde::Serialize;
    use serde_json::value::RawValue;

    pub fn format_f64(x: f64) -> Option<String> {
        x.is_finite().then(|| format!("{x:.16e}"))
    }

    struct R(f64);

    impl Serialize for R {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            match format_f64(self.0) {
                None => s.serialize_none(),
                Some(text) => RawValue::from_string(text).map_err(serde::ser::Error::custom)?.serialize(s),
            }
        }
    }

    struct C(Complex64);

    impl Serialize for C {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            [R(self.0.re), R(self.0.im)].serialize(s)
        }
    }

    pub fn real<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        R(*x).serialize(s)
    }

    pub fn opt_real<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        x.map(R).serialize(s)
    }

    pub fn reals<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&R(*x))?;
        }
        seq.end()
    }

    pub fn opt_reals<S: Serializer>(xs: &[Option<f64>], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&x.map(R))?;
        }
        seq.end()
    }

    pub fn complex<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        C(*z).serialize(s)
    }

    pub fn complexes<S: Serializer>(zs: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(zs.len()))?;
        for z in zs {
            seq.serialize_element(&C(*z))?;
        }
        seq.end()
    }

    pub fn opt_complexes<S: Serializer>(zs: &[Option<Complex64>], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(zs.len()))?;
        for z in zs {
            seq.serialize_element(&z.map(C))?;
        }
        seq.end()
    }

    pub fn points<S: Serializer>(ps: &[Vec<Complex64>], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(ps.len()))?;
        for p in ps {
            let row: Vec<C> = p.iter().copied().map(C).collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

pub(crate) fn csv_f64(x: f64) -> String {
    json::format_f64(x).unwrap_or_else(|| "nan".into())
}

pub(crate) fn csv_complex(z: Complex64) -> [String; 2] {
    [csv_f64(z.re), csv_f64(z.im)]
}

/// In-memory CSV table.
pub(crate) struct Csv {
    out: csv::Writer<Vec<u8>>,
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut c = Csv { out: csv::Writer::from_writer(Vec::new()) };
        c.row(header);
        c
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) {
        self.out.write_record(fields.iter().map(|f| f.as_ref().as_bytes())).expect("writing to memory");
    }

    pub fn finish(self) -> String {
        let bytes = self.out.into_inner().expect("flushing to memory");
        String::from_utf8(bytes).expect("fields are UTF-8")
    }
}

/// Log-log scatter plot of `(x, y)` pairs (natural logs taken by the caller)
/// with optional reference lines `y = slope·x + intercept`.
pub struct LogLogPlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
    pub lines: Vec<(f64, f64, String)>,
}

impl LogLogPlot {
    pub fn to_svg(&self) -> String {
        const W: f64 = 640.0;
        const H: f64 = 480.0;
        const M: f64 = 60.0;
        let pts: Vec<(f64, f64)> = self.points.iter().copied().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in &pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if pts.is_empty() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 < 1e-9 {
            x1 = x0 + 1.0;
        }
        if y1 - y0 < 1e-9 {
            y1 = y0 + 1.0;
        }
        let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
        let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);

        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#, W / 2.0, escape(&self.title));
        let _ = writeln!(
            s,
            r#"<rect x="{M}" y="{M}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            W - 2.0 * M,
            H - 2.0 * M
        );
        for k in 0..=4 {
            let fx = x0 + (x1 - x0) * k as f64 / 4.0;
            let fy = y0 + (y1 - y0) * k as f64 / 4.0;
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="11">{fx:.2}</text>"#, sx(fx), H - M + 16.0);
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-family="sans-serif" font-size="11">{fy:.2}</text>"#, M - 6.0, sy(fy) + 4.0);
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">{}</text>"#, W / 2.0, H - 12.0, escape(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 16 {})">{}</text>"#,
            H / 2.0,
            H / 2.0,
            escape(&self.y_label)
        );
        let _ = writeln!(s, r#"<g fill="steelblue" fill-opacity="0.5">"#);
        for &(x, y) in &pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="1.6"/>"#, sx(x), sy(y));
        }
        s.push_str("</g>\n");
        for (slope, icpt, label) in &self.lines {
            let (ya, yb) = (slope * x0 + icpt, slope * x1 + icpt);
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="crimson" stroke-width="1.5"/>"#,
                sx(x0),
                sy(ya),
                sx(x1),
                sy(yb)
            );
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" fill="crimson" font-family="sans-serif" font-size="12">{}</text>"#, M + 8.0, M + 16.0, escape(label));
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Serialize;

    #[derive(Serialize)]
    struct Row {
        #[serde(serialize_with = "json::real")]
        x: f64,
        #[serde(serialize_with = "json::complexes")]
        zs: Vec<Complex64>,
    }

    #[test]
    fn fixed_precision_floats() {
        let r = Row { x: 0.1, zs: vec![Complex64::new(1.0, f64::NAN)] };
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, r#"{"x":1.0000000000000001e-1,"zs":[[1.0000000000000000e0,null]]}"#);
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.1));
    }

    #[test]
    fn svg_is_well_formed_text() {
        let p = LogLogPlot {
            title: "a < b".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            points: vec![(0.0, 0.0), (1.0, 2.0), (f64::NAN, 1.0)],
            lines: vec![(2.0, 0.0, "slope 2".into())],
        };
        let svg = p.to_svg();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("a &lt; b"));
        assert_eq!(svg.matches("<circle").count(), 2);
    }
}
