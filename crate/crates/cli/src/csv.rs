//! Minimal CSV tables with round-trip number formatting. Missing values are
//! empty cells; non-finite numbers are written as empty cells as well.

use bcspectra::scan::ScanRow;
use bcspectra::CMatrix;

pub enum Cell {
    Num(f64),
    Int(usize),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n)
    }
}

/// Shortest representation that parses back to the same `f64`; exponent
/// notation outside `[1e-4, 1e16)`.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        return String::new();
    }
    let a = x.abs();
    if a == 0.0 || (1e-4..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let mut cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(x) => format_number(*x),
                    Cell::Int(n) => n.to_string(),
                    Cell::Empty => String::new(),
                })
                .collect();
            cells.resize(self.header.len(), String::new());
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// One row per scan parameter: state count, worst residuals, then the
/// energies in ascending order padded with empty cells.
pub fn scan_table(label: &str, rows: &[ScanRow]) -> Table {
    let width = rows.iter().map(|r| r.states.len()).max().unwrap_or(0).max(1);
    let mut header = vec![
        label.to_string(),
        "n_states".into(),
        "max_bc_residual".into(),
        "max_current_residual".into(),
    ];
    header.extend((1..=width).map(|k| format!("energy_{k}")));
    let mut table = Table::new(header);
    for r in rows {
        let parameter = if label == "sample" {
            Cell::Int(r.parameter as usize)
        } else {
            Cell::Num(r.parameter)
        };
        let has = !r.states.is_empty();
        let mut row = vec![
            parameter,
            r.states.len().into(),
            has.then(|| r.max_bc_residual()).into(),
            has.then(|| r.max_current_residual()).into(),
        ];
        row.extend(r.energies().into_iter().map(Cell::from));
        table.push(row);
    }
    table
}

/// `x` followed by real and imaginary parts of every component of every state.
pub fn psi_table(xs: &[f64], states: &[CMatrix]) -> Table {
    let mut header = vec!["x".to_string()];
    for (k, psi) in states.iter().enumerate() {
        for m in 0..psi.nrows() {
            header.push(format!("state{}_c{}_re", k + 1, m + 1));
            header.push(format!("state{}_c{}_im", k + 1, m + 1));
        }
    }
    let mut table = Table::new(header);
    for (i, &x) in xs.iter().enumerate() {
        let mut row = vec![Cell::Num(x)];
        for psi in states {
            for m in 0..psi.nrows() {
                row.push(Cell::Num(psi[(m, i)].re));
                row.push(Cell::Num(psi[(m, i)].im));
            }
        }
        table.push(row);
    }
    table
}
