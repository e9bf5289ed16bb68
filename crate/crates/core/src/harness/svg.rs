//! Regret-curve SVG emission: one line per policy with a translucent 95%
//! confidence band, hand-rolled to keep the output small and deterministic.

use std::io::Write;
use std::path::Path;

use super::ResultTable;
use crate::error::{Error, Result};

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;
const MAX_POINTS: usize = 400;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes one SVG: x-axis t, y-axis mean cumulative regret, a line per
/// policy with a ±CI band, and a legend keyed by policy name.
pub fn emit_svg(table: &ResultTable, path: &Path) -> Result<()> {
    let aggregates: Vec<(usize, super::AggregateCurve)> = (0..table.policies.len())
        .filter_map(|i| table.aggregate(i).map(|a| (i, a)))
        .collect();
    if aggregates.is_empty() {
        return Err(Error::InvalidArgument(
            "emit_svg needs at least one nonempty aggregate".into(),
        ));
    }

    let horizon = table.horizon as f64;
    let mut y_max = 0.0f64;
    for (_, agg) in &aggregates {
        for (m, c) in agg.mean.iter().zip(&agg.ci_half_width) {
            y_max = y_max.max(m + c);
        }
    }
    if y_max <= 0.0 {
        y_max = 1.0;
    }

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_of = |t: f64| MARGIN_LEFT + t / horizon.max(1.0) * plot_w;
    let y_of = |v: f64| MARGIN_TOP + (1.0 - (v / y_max).clamp(0.0, 1.0)) * plot_h;

    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )?;
    writeln!(
        w,
        r#"<text x="{:.1}" y="24" font-family="sans-serif" font-size="16">Mean cumulative regret — {} (95% CI, {} runs)</text>"#,
        MARGIN_LEFT,
        xml_escape(&table.instance_name),
        aggregates
            .first()
            .map(|(_, a)| a.surviving_runs)
            .unwrap_or(0)
    )?;

    // axes
    writeln!(
        w,
        r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black" stroke-width="1"/>"#,
        MARGIN_LEFT,
        MARGIN_TOP + plot_h,
        MARGIN_LEFT + plot_w,
        MARGIN_TOP + plot_h
    )?;
    writeln!(
        w,
        r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black" stroke-width="1"/>"#,
        MARGIN_LEFT,
        MARGIN_TOP,
        MARGIN_LEFT,
        MARGIN_TOP + plot_h
    )?;
    for i in 0..=4 {
        let frac = i as f64 / 4.0;
        let xv = frac * horizon;
        let yv = frac * y_max;
        writeln!(
            w,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            x_of(xv),
            MARGIN_TOP + plot_h + 18.0,
            xv.round() as u64
        )?;
        writeln!(
            w,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="end">{:.1}</text>"#,
            MARGIN_LEFT - 6.0,
            y_of(yv) + 4.0,
            yv
        )?;
    }
    writeln!(
        w,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle">t</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    )?;

    for (slot, (policy_idx, agg)) in aggregates.iter().enumerate() {
        let color = PALETTE[slot % PALETTE.len()];
        let len = agg.mean.len();
        let stride = len.div_ceil(MAX_POINTS).max(1);
        let mut idxs: Vec<usize> = (0..len).step_by(stride).collect();
        if *idxs.last().unwrap() != len - 1 {
            idxs.push(len - 1);
        }

        // CI band: upper edge forward, lower edge reversed.
        let mut points = String::new();
        for &i in &idxs {
            let t = (i + 1) as f64;
            points.push_str(&format!(
                "{:.2},{:.2} ",
                x_of(t),
                y_of(agg.mean[i] + agg.ci_half_width[i])
            ));
        }
        for &i in idxs.iter().rev() {
            let t = (i + 1) as f64;
            points.push_str(&format!(
                "{:.2},{:.2} ",
                x_of(t),
                y_of((agg.mean[i] - agg.ci_half_width[i]).max(0.0))
            ));
        }
        writeln!(
            w,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
            points.trim_end()
        )?;

        let mut d = String::new();
        for (j, &i) in idxs.iter().enumerate() {
            let t = (i + 1) as f64;
            let cmd = if j == 0 { 'M' } else { 'L' };
            d.push_str(&format!("{cmd}{:.2},{:.2} ", x_of(t), y_of(agg.mean[i])));
        }
        writeln!(
            w,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.6"/>"#,
            d.trim_end()
        )?;

        // legend entry
        let ly = MARGIN_TOP + 14.0 + slot as f64 * 22.0;
        writeln!(
            w,
            r#"<rect x="{:.1}" y="{:.1}" width="14" height="14" fill="{color}"/>"#,
            WIDTH - MARGIN_RIGHT + 16.0,
            ly - 11.0
        )?;
        writeln!(
            w,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="13">{}</text>"#,
            WIDTH - MARGIN_RIGHT + 36.0,
            ly,
            xml_escape(table.policies[*policy_idx].name())
        )?;
    }

    writeln!(w, "</svg>")?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{PolicySpec, ResultTable, RunOutcome};
    use crate::policies::RegretTrace;

    fn table_with(policies: Vec<PolicySpec>, horizon: usize) -> ResultTable {
        let outcomes = policies
            .iter()
            .enumerate()
            .map(|(i, _)| RunOutcome {
                policy_idx: i,
                run: 0,
                result: Ok(RegretTrace {
                    chosen: vec![0; horizon],
                    rewards: vec![0.0; horizon],
                    cum_regret: (0..horizon).map(|t| t as f64 * (i + 1) as f64).collect(),
                }),
            })
            .collect();
        ResultTable {
            instance_name: "good".into(),
            horizon,
            policies,
            outcomes,
        }
    }

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("banditbench-svg-test");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn single_policy_flat_zero_regret() {
        let mut table = table_with(vec![PolicySpec::ExactTS], 50);
        if let Ok(tr) = &mut table.outcomes[0].result {
            tr.cum_regret = vec![0.0; 50];
        }
        let path = tmp("flat.svg");
        emit_svg(&table, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.matches("<path").count(), 1);
        // Every mean point sits on the y = 0 baseline.
        let base = format!("{:.2}", HEIGHT - MARGIN_BOTTOM);
        let d_line = text.lines().find(|l| l.starts_with("<path")).unwrap();
        assert!(d_line.matches(&base as &str).count() >= 2, "{d_line}");
    }

    #[test]
    fn two_policies_two_paths_two_bands() {
        let table = table_with(vec![PolicySpec::ExactTS, PolicySpec::Ucb], 100);
        let path = tmp("two.svg");
        emit_svg(&table, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.matches("<path").count(), 2);
        assert_eq!(text.matches("<polygon").count(), 2);
        assert!(text.contains("ExactTS") && text.contains("UCB"));
    }

    #[test]
    fn output_is_well_formed_xml() {
        let table = table_with(
            vec![PolicySpec::ExactTS, PolicySpec::UlaTS, PolicySpec::SgldTS],
            2000,
        );
        let path = tmp("wellformed.svg");
        emit_svg(&table, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        roxmltree::Document::parse(&text).expect("well-formed XML");
    }

    #[test]
    fn empty_aggregates_rejected() {
        let table = ResultTable {
            instance_name: "good".into(),
            horizon: 0,
            policies: vec![PolicySpec::ExactTS],
            outcomes: vec![],
        };
        assert!(emit_svg(&table, &tmp("bad.svg")).is_err());
    }
}
