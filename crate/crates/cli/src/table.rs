//! Comparison tables: one column per algorithm, rows of cost and footprint
//! statistics.

use eglb_core::RunReport;

pub type Stat = fn(&RunReport) -> f64;

/// `(metric, statistic, accessor, decimals)`.
pub const ROWS: [(&str, &str, Stat, usize); 9] = [
    ("energy_usd", "avg", |r| r.avg_energy_cost, 2),
    ("energy_usd", "total", |r| r.total_energy_cost, 2),
    ("water_m3", "avg", |r| r.water.avg, 2),
    ("water_m3", "max", |r| r.water.max, 2),
    ("water_m3", "max/avg", |r| r.water.max_over_avg, 3),
    ("carbon_ton", "avg", |r| r.carbon.avg, 3),
    ("carbon_ton", "max", |r| r.carbon.max, 3),
    ("carbon_ton", "max/avg", |r| r.carbon.max_over_avg, 3),
    ("objective", "value", |r| r.objective, 4),
];

/// Full-precision rows for CSV output; missing runs become `NA`.
pub fn csv_rows(columns: &[(&str, Option<&RunReport>)]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header = vec!["metric".to_string(), "stat".to_string()];
    header.extend(columns.iter().map(|(l, _)| l.to_string()));
    let rows = ROWS
        .iter()
        .map(|(metric, stat, f, _)| {
            let mut row = vec![metric.to_string(), stat.to_string()];
            row.extend(columns.iter().map(|(_, r)| r.map_or("NA".to_string(), |r| f(r).to_string())));
            row
        })
        .collect();
    (header, rows)
}

/// Aligned text rendering with rounded values.
pub fn render(columns: &[(&str, Option<&RunReport>)]) -> String {
    let mut cells: Vec<Vec<String>> = Vec::new();
    let mut head = vec!["metric".to_string(), "stat".to_string()];
    head.extend(columns.iter().map(|(l, _)| l.to_string()));
    cells.push(head);
    for (metric, stat, f, digits) in ROWS {
        let mut row = vec![metric.to_string(), stat.to_string()];
        row.extend(
            columns
                .iter()
                .map(|(_, r)| r.map_or("n/a".to_string(), |r| format!("{:.*}", digits, f(r)))),
        );
        cells.push(row);
    }
    let widths: Vec<usize> = (0..cells[0].len())
        .map(|c| cells.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (k, row) in cells.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| if c < 2 { format!("{s:<w$}", w = widths[c]) } else { format!("{s:>w$}", w = widths[c]) })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
        if k == 0 {
            let total = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
            out.push_str(&"-".repeat(total));
            out.push('\n');
        }
    }
    out
}
