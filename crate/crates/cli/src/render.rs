//! Fixed-width table rendering of marginal readouts.
//!
//! Output is byte-deterministic: values print to 3 decimals (half-even, as
//! `format!` rounds), columns are padded to content width, and an
//! unnormalized readout carries a `total`/`conflict` footer line.

use valnet_core::{Cell, MarginalReadout};

/// Footer line of an unnormalized table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Footer {
    Total(f64),
    Conflict(f64),
}

fn cell_text(cell: &Cell) -> String {
    match cell {
        Cell::Number(v) => format!("{v:.3}"),
        Cell::Truth(true) => "true".to_string(),
        Cell::Truth(false) => "false".to_string(),
    }
}

/// Renders one readout as fixed-width text, one row per frame value.
pub fn render(readout: &MarginalReadout, footer: Option<Footer>) -> String {
    let mut labels = vec![readout.variable.name().to_string()];
    labels.extend(readout.columns.iter().cloned());

    let mut rows: Vec<Vec<String>> = Vec::new();
    for row in &readout.rows {
        let mut cells = vec![row.value.clone()];
        cells.extend(row.cells.iter().map(cell_text));
        rows.push(cells);
    }

    let widths: Vec<usize> = labels
        .iter()
        .enumerate()
        .map(|(i, label)| {
            rows.iter()
                .map(|r| r[i].chars().count())
                .chain([label.chars().count()])
                .max()
                .unwrap_or(0)
        })
        .collect();

    let format_line = |cells: &[String]| -> String {
        let mut line = String::new();
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            let pad = widths[i].saturating_sub(cell.chars().count());
            if i == 0 {
                // value column left-aligned
                line.push_str(cell);
                if cells.len() > 1 {
                    line.push_str(&" ".repeat(pad));
                }
            } else {
                line.push_str(&" ".repeat(pad));
                line.push_str(cell);
            }
        }
        // trim right-edge padding on the first column of one-column lines
        line.trim_end().to_string()
    };

    let mut out = String::new();
    out.push_str(&format_line(&labels));
    out.push('\n');
    for row in &rows {
        out.push_str(&format_line(row));
        out.push('\n');
    }
    match footer {
        Some(Footer::Total(v)) => out.push_str(&format!("total {v:.3}\n")),
        Some(Footer::Conflict(v)) => out.push_str(&format!("conflict {v:.3}\n")),
        None => {}
    }
    out
}
