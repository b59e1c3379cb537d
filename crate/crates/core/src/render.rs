//! Text and SVG renderings of a rearranged chart with its S- and P-curves.

use std::fmt::Write;

use crate::spchart::RearrangedChart;

/// Grid of 0/1 cells. In row `i` a `|` sits right after the first `S(i)`
/// cells (the S-curve); a run of `-` under column `j` after row `P(j)` marks
/// the P-curve, with row 0 meaning above the first row.
pub fn render_text(rc: &RearrangedChart) -> String {
    let chart = &rc.chart;
    let n = chart.problems();
    let label_width = chart.student_ids().map(str::len).max().unwrap_or(0);
    let cell_width = chart
        .problem_ids()
        .iter()
        .map(String::len)
        .max()
        .unwrap_or(1)
        .max(1)
        + 1;

    let mut out = String::new();
    let mut header = format!("{:label_width$}", "");
    for id in chart.problem_ids() {
        let _ = write!(header, "{id:>cell_width$}");
    }
    out.push_str(header.trim_end());
    out.push('\n');

    let p_line = |after_row: usize| -> Option<String> {
        if !rc.p_totals.contains(&after_row) {
            return None;
        }
        let mut line = format!("{:label_width$}", "");
        for &p in &rc.p_totals {
            line.push(' ');
            let fill = if p == after_row { '-' } else { ' ' };
            line.extend(std::iter::repeat_n(fill, cell_width - 1));
        }
        Some(line.trim_end().to_string())
    };

    if let Some(line) = p_line(0) {
        out.push_str(&line);
        out.push('\n');
    }
    for (i, row) in chart.rows().iter().enumerate() {
        let s = rc.s_totals[i];
        let mut line = format!("{:<label_width$}", row.student_id);
        for (j, &bit) in row.bits().iter().enumerate() {
            line.push(if j == s && j > 0 { '|' } else { ' ' });
            let _ = write!(line, "{bit:>w$}", w = cell_width - 1);
        }
        if s == n {
            line.push('|');
        }
        out.push_str(&line);
        out.push('\n');
        if let Some(line) = p_line(i + 1) {
            out.push_str(&line);
            out.push('\n');
        }
    }
    out
}

const CELL: usize = 20;
const LEFT: usize = 60;
const TOP: usize = 30;

/// Filled cells for correct answers, the S-curve in red, the P-curve in blue.
pub fn render_svg(rc: &RearrangedChart) -> String {
    let chart = &rc.chart;
    let (l, n) = (chart.students(), chart.problems());
    let x = |col: usize| LEFT + col * CELL;
    let y = |row: usize| TOP + row * CELL;
    let (width, height) = (x(n) + CELL, y(l) + CELL);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="monospace" font-size="10">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{width}" height="{height}" fill="white"/>"#
    );
    for (j, id) in chart.problem_ids().iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            x(j) + CELL / 2,
            TOP - 6,
            escape(id)
        );
    }
    for (i, row) in chart.rows().iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            LEFT - 4,
            y(i) + CELL / 2 + 4,
            escape(&row.student_id)
        );
        for (j, &bit) in row.bits().iter().enumerate() {
            let fill = if bit == 1 { "#4a6fa5" } else { "#ffffff" };
            let _ = writeln!(
                svg,
                r##"<rect x="{}" y="{}" width="{CELL}" height="{CELL}" fill="{fill}" stroke="#999999"/>"##,
                x(j),
                y(i)
            );
        }
    }

    let s_points: Vec<String> = rc
        .s_totals
        .iter()
        .enumerate()
        .flat_map(|(i, &s)| {
            [
                format!("{},{}", x(s), y(i)),
                format!("{},{}", x(s), y(i + 1)),
            ]
        })
        .collect();
    let p_points: Vec<String> = rc
        .p_totals
        .iter()
        .enumerate()
        .flat_map(|(j, &p)| {
            [
                format!("{},{}", x(j), y(p)),
                format!("{},{}", x(j + 1), y(p)),
            ]
        })
        .collect();
    let _ = writeln!(
        svg,
        r##"<polyline points="{}" fill="none" stroke="#d62728" stroke-width="2"/>"##,
        s_points.join(" ")
    );
    let _ = writeln!(
        svg,
        r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="2" stroke-dasharray="4 2"/>"##,
        p_points.join(" ")
    );
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
