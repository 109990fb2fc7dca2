//! SVG rendering of a day's series and its hull.

use std::fmt::Write as _;

use thiserror::Error;

use crate::hull::HullPolygon;
use crate::ingest::DaySeries;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 48.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlotError {
    #[error("cannot plot an empty series")]
    EmptySeries,
    #[error("hull polygon has no vertices")]
    EmptyHull,
}

/// File name for the plot of one (date, pollutant) series.
pub fn plot_file_name(series: &DaySeries) -> String {
    format!(
        "hull_{}_{}.svg",
        series.date().format("%Y-%m-%d"),
        series.pollutant().code()
    )
}

struct Frame {
    y_max: f64,
}

impl Frame {
    fn x(&self, hour: f64) -> f64 {
        MARGIN + hour / 23.0 * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, value: f64) -> f64 {
        HEIGHT - MARGIN - value / self.y_max * (HEIGHT - 2.0 * MARGIN)
    }
}

/// Renders the series as one circle per reading plus a closed path through
/// the hull vertices. Output depends only on the inputs.
pub fn emit_hull_plot(
    series: &DaySeries,
    polygon: &HullPolygon,
    unit: Option<&str>,
) -> Result<String, PlotError> {
    if series.is_empty() {
        return Err(PlotError::EmptySeries);
    }
    if polygon.is_empty() {
        return Err(PlotError::EmptyHull);
    }
    let max = series.values().fold(0.0_f64, f64::max);
    let frame = Frame {
        y_max: if max > 0.0 { max * 1.1 } else { 1.0 },
    };
    let label = match unit {
        Some(u) => format!("{} ({u})", series.pollutant()),
        None => series.pollutant().to_string(),
    };

    let mut svg = String::new();
    // Writing into a String cannot fail.
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        svg,
        r#"<title>{} {}</title>"#,
        series.date().format("%Y-%m-%d"),
        xml_escape(&label)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let (x0, x1) = (frame.x(0.0), frame.x(23.0));
    let (y0, y1) = (frame.y(0.0), frame.y(frame.y_max));
    let _ = writeln!(
        svg,
        r#"<path class="axes" d="M {x0:.2} {y1:.2} L {x0:.2} {y0:.2} L {x1:.2} {y0:.2}" fill="none" stroke="black"/>"#
    );
    for hour in [0, 6, 12, 18, 23] {
        let x = frame.x(f64::from(hour));
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" font-size="11" text-anchor="middle">{hour:02}:00</text>"#,
            y0 + 16.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="11">{} max {:.3}</text>"#,
        x0,
        MARGIN - 12.0,
        xml_escape(&label),
        max
    );

    let mut d = String::new();
    for (i, v) in polygon.vertices().iter().enumerate() {
        let cmd = if i == 0 { 'M' } else { 'L' };
        let _ = write!(d, "{cmd} {:.3} {:.3} ", frame.x(v.x), frame.y(v.y));
    }
    d.push('Z');
    let _ = writeln!(
        svg,
        r#"<path class="hull" d="{d}" fill="rgba(70,130,180,0.15)" stroke="steelblue" stroke-width="1.5"/>"#
    );
    for &(hour, value) in series.points() {
        let _ = writeln!(
            svg,
            r#"<circle class="reading" cx="{:.3}" cy="{:.3}" r="3" fill="black"><title>{hour:02}:00 {value}</title></circle>"#,
            frame.x(f64::from(hour)),
            frame.y(value)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
