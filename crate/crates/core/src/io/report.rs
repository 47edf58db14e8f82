use std::fmt::Write as _;

use crate::analysis::DensityReport;
use crate::elliptic::{ColumnKind, GluedSurface};
use crate::flow::DiagnosticsRow;
use crate::io::scenario::{Scenario, SCENARIO_FORMAT};
use crate::network::Network;

pub const DIAGNOSTICS_FORMAT: &str = "trijunction/diagnostics-v1";
pub const DENSITY_FORMAT: &str = "trijunction/density-v1";
pub const SURFACE_FORMAT: &str = "trijunction/surface-v1";
pub const MULTIPLICITY_FORMAT: &str = "trijunction/multiplicity-v1";
pub const CONVERGENCE_FORMAT: &str = "trijunction/convergence-v1";
pub const REGULARIZE_FORMAT: &str = "trijunction/regularize-v1";
pub const SUMMARY_FORMAT: &str = "trijunction/summary-v1";

/// Shortest decimal that reads back to the same `f64`; scientific outside `[1e-4, 1e15)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// `key = value` pairs written as `#` lines at the top of every output file.
pub type Echo = Vec<(String, String)>;

/// Every parameter of the scenario except the network itself, flattened to dotted keys
/// in sorted order.
pub fn parameter_echo(sc: &Scenario) -> Echo {
    let mut bare = sc.clone();
    bare.network = None;
    bare.network_file = None;
    let value = toml::Value::try_from(&bare).expect("scenario serialises");
    let mut out = Vec::new();
    flatten("", &value, &mut out);
    out.retain(|(k, _)| k != "format");
    out
}

fn flatten(prefix: &str, v: &toml::Value, out: &mut Echo) {
    match v {
        toml::Value::Table(t) => {
            for (k, x) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn header(format: &str, echo: &Echo) -> String {
    let mut s = format!("# format = {format}\n");
    for (k, v) in echo {
        let _ = writeln!(s, "# {k} = {v}");
    }
    s
}

/// Tab-separated table: format line, echo lines, one header row, LF endings.
pub fn table(format: &str, echo: &Echo, columns: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header(format, echo);
    s.push_str(&columns.join("\t"));
    s.push('\n');
    for r in rows {
        debug_assert_eq!(r.len(), columns.len());
        s.push_str(&r.join("\t"));
        s.push('\n');
    }
    s
}

pub fn diagnostics_table(rows: &[DiagnosticsRow<f64>], echo: &Echo) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            [r.t, r.total_length, r.max_curvature, r.min_junction_distance, r.min_spacing, r.angle_deviation]
                .iter()
                .map(|&x| num(x))
                .collect()
        })
        .collect();
    table(
        DIAGNOSTICS_FORMAT,
        echo,
        &["t", "total_length", "sup_curvature", "min_junction_distance", "min_spacing", "angle_deviation"],
        &body,
    )
}

/// Snapshot at time `t`, itself a loadable scenario carrying the parameters it came from.
pub fn snapshot_file(base: &Scenario, net: &Network<f64>, t: f64) -> String {
    let mut sc = base.clone();
    sc.network = Some(crate::io::scenario::NetworkRecord::from_network(net));
    sc.network_file = None;
    sc.t = Some(t);
    let mut s = header(SCENARIO_FORMAT, &parameter_echo(&sc));
    s.push_str(&sc.to_toml());
    s
}

pub fn density_table(reports: &[DensityReport<f64>], echo: &Echo) -> String {
    let mut body = Vec::new();
    for (i, r) in reports.iter().enumerate() {
        let centre: Vec<String> = r.centre.coords().iter().map(|&x| num(x)).collect();
        for (k, (&scale, &ratio)) in r.scales.iter().zip(&r.ratios).enumerate() {
            body.push(vec![
                i.to_string(),
                centre.join(","),
                num(r.t),
                num(scale),
                num(ratio),
                num(r.time_mismatch[k]),
                if k == 0 { r.label.name().to_string() } else { "-".into() },
            ]);
        }
    }
    table(DENSITY_FORMAT, echo, &["centre", "x", "t", "scale", "ratio", "time_mismatch", "label"], &body)
}

/// One row per (sheet, position along the sheet, height). Rows of the same `column`
/// are the same surface node, so junction columns appear once in each of their sheets.
pub fn surface_table(s: &GluedSurface<f64>, echo: &Echo) -> String {
    let mut echo = echo.clone();
    for (c, col) in s.columns.iter().enumerate() {
        if let ColumnKind::Junction(v) = col.kind {
            let sheets: Vec<String> = s
                .sheets
                .iter()
                .enumerate()
                .filter(|(_, sh)| sh.columns.contains(&c))
                .map(|(i, _)| i.to_string())
                .collect();
            echo.push((format!("junction-column.{c}"), format!("vertex {} sheets {}", v.0, sheets.join(","))));
        }
    }
    let mut body = Vec::new();
    for (i, sh) in s.sheets.iter().enumerate() {
        for (u, &c) in sh.columns.iter().enumerate() {
            for (j, p) in s.columns[c].pts.iter().enumerate() {
                body.push(vec![
                    i.to_string(),
                    u.to_string(),
                    j.to_string(),
                    c.to_string(),
                    num(p[0]),
                    num(p[1]),
                    num(s.heights[j]),
                ]);
            }
        }
    }
    table(SURFACE_FORMAT, &echo, &["sheet", "u", "row", "column", "x", "y", "z"], &body)
}

/// Prefixes an existing tab-separated report with the format line and echo.
pub fn with_header(format: &str, echo: &Echo, body: &str) -> String {
    let mut s = header(format, echo);
    s.push_str(body);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn echo_excludes_network_and_is_sorted() {
        let net: Network<f64> = shapes::circle(&crate::geometry::Point::xy(0.0, 0.0), 1.0, 12);
        let mut sc = Scenario::for_network(&net);
        sc.seed = 9;
        let echo = parameter_echo(&sc);
        assert!(echo.iter().all(|(k, _)| !k.starts_with("network")));
        assert!(echo.iter().any(|(k, v)| k == "seed" && v == "9"));
        let keys: Vec<_> = echo.iter().map(|(k, _)| k.clone()).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn snapshot_reloads_as_scenario() {
        let net: Network<f64> = shapes::theta(0.1);
        let sc = Scenario::for_network(&net);
        let text = snapshot_file(&sc, &net, 0.125);
        assert!(text.starts_with("# format = trijunction/scenario-v1\n"));
        let back = Scenario::parse(&text, "snap").unwrap();
        assert_eq!(back.t, Some(0.125));
        assert_eq!(back.network().unwrap(), net);
    }

    #[test]
    fn numbers_read_back_exactly() {
        for x in [0.0, -0.0, 1.0, 0.1, 1e-4, 9.99e-5, 4.85722573273506e-17, 1e300, -2.5e15, f64::MIN_POSITIVE / 7.0] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
            assert!(s.len() < 26, "{s}");
        }
    }

    #[test]
    fn diagnostics_layout() {
        let net: Network<f64> = shapes::theta(0.1);
        let rows = vec![DiagnosticsRow::of(&net, 0.0)];
        let text = diagnostics_table(&rows, &vec![("seed".into(), "0".into())]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# format = trijunction/diagnostics-v1");
        assert_eq!(lines[1], "# seed = 0");
        assert_eq!(lines[2].split('\t').count(), 6);
        assert_eq!(lines[3].split('\t').count(), 6);
        assert!(!text.contains('\r'));
    }
}
