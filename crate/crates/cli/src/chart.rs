//! Static SVG line charts: tweet counts on the left axis, cases on the right.

use std::fmt::Write;

use chrono::NaiveDate;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 80.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 70.0;

pub struct Series<'a> {
    pub name: &'a str,
    pub color: &'a str,
    pub values: Vec<f64>,
}

pub struct Chart<'a> {
    pub title: String,
    pub weeks: Vec<NaiveDate>,
    pub series: Vec<Series<'a>>,
    pub cases: Option<Series<'a>>,
}

/// Smallest "nice" upper bound (1, 2 or 5 times a power of ten) at or above `max`.
fn nice_max(max: f64) -> f64 {
    if max <= 0.0 {
        return 1.0;
    }
    let base = 10f64.powf(max.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * base)
        .find(|&v| v >= max)
        .unwrap_or(10.0 * base)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Chart<'_> {
    fn x(&self, i: usize) -> f64 {
        let plot = WIDTH - LEFT - RIGHT;
        match self.weeks.len() {
            0 | 1 => LEFT + plot / 2.0,
            n => LEFT + plot * i as f64 / (n - 1) as f64,
        }
    }

    fn y(value: f64, max: f64) -> f64 {
        let plot = HEIGHT - TOP - BOTTOM;
        TOP + plot * (1.0 - value / max)
    }

    fn polyline(&self, out: &mut String, s: &Series<'_>, max: f64, dashed: bool) {
        let points: Vec<String> = s
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{:.1},{:.1}", self.x(i), Self::y(*v, max)))
            .collect();
        let dash = if dashed { " stroke-dasharray=\"6 4\"" } else { "" };
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{}" stroke-width="2"{dash} points="{}"/>"#,
            s.color,
            points.join(" ")
        );
        for (i, v) in s.values.iter().enumerate() {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{}"/>"#,
                self.x(i),
                Self::y(*v, max),
                s.color
            );
        }
    }

    pub fn to_svg(&self) -> String {
        let left_max = nice_max(self.series.iter().flat_map(|s| s.values.iter().copied()).fold(0.0, f64::max));
        let right_max = self.cases.as_ref().map(|c| nice_max(c.values.iter().copied().fold(0.0, f64::max)));
        let bottom = HEIGHT - BOTTOM;
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );

        for tick in 0..=4 {
            let frac = tick as f64 / 4.0;
            let y = Self::y(left_max * frac, left_max);
            let _ = writeln!(
                out,
                r##"<line x1="{LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#e0e0e0"/>"##,
                WIDTH - RIGHT
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                LEFT - 6.0,
                y + 4.0,
                left_max * frac
            );
            if let Some(rmax) = right_max {
                let _ = writeln!(
                    out,
                    r#"<text x="{:.1}" y="{:.1}" text-anchor="start">{}</text>"#,
                    WIDTH - RIGHT + 6.0,
                    y + 4.0,
                    rmax * frac
                );
            }
        }
        let _ = writeln!(
            out,
            r#"<line x1="{LEFT}" y1="{bottom}" x2="{}" y2="{bottom}" stroke="black"/>"#,
            WIDTH - RIGHT
        );
        let _ = writeln!(out, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{bottom}" stroke="black"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="16" y="{:.1}" transform="rotate(-90 16 {:.1})" text-anchor="middle">tweets per week</text>"#,
            (TOP + bottom) / 2.0,
            (TOP + bottom) / 2.0
        );
        if right_max.is_some() {
            let xr = WIDTH - RIGHT;
            let _ = writeln!(out, r#"<line x1="{xr}" y1="{TOP}" x2="{xr}" y2="{bottom}" stroke="black"/>"#);
            let xl = WIDTH - 14.0;
            let _ = writeln!(
                out,
                r#"<text x="{xl}" y="{:.1}" transform="rotate(90 {xl} {:.1})" text-anchor="middle">new cases per week</text>"#,
                (TOP + bottom) / 2.0,
                (TOP + bottom) / 2.0
            );
        }
        for (i, week) in self.weeks.iter().enumerate() {
            let x = self.x(i);
            let _ = writeln!(
                out,
                r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                bottom + 16.0,
                i + 1
            );
            let _ = writeln!(
                out,
                r##"<text x="{x:.1}" y="{:.1}" text-anchor="middle" font-size="8" fill="#666">{}</text>"##,
                bottom + 28.0,
                week.format("%m-%d")
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">week</text>"#,
            (LEFT + WIDTH - RIGHT) / 2.0,
            HEIGHT - 18.0
        );

        for s in &self.series {
            self.polyline(&mut out, s, left_max, false);
        }
        if let (Some(c), Some(rmax)) = (&self.cases, right_max) {
            self.polyline(&mut out, c, rmax, true);
        }

        let legend: Vec<&Series<'_>> = self.series.iter().chain(self.cases.as_ref()).collect();
        for (i, s) in legend.iter().enumerate() {
            let x = LEFT + 10.0 + 150.0 * i as f64;
            let _ = writeln!(
                out,
                r#"<line x1="{x}" y1="38" x2="{}" y2="38" stroke="{}" stroke-width="3"/>"#,
                x + 18.0,
                s.color
            );
            let _ = writeln!(out, r#"<text x="{}" y="42">{}</text>"#, x + 24.0, escape(s.name));
        }
        out.push_str("</svg>\n");
        out
    }
}
