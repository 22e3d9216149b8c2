use super::{RowTag, VariableMap};
use std::fmt::Write as _;
use std::io;

/// Row sense. The formulation only needs `<=` and `=`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Sense {
    Le,
    Eq,
}

/// One constraint row in sparse form.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub tag: RowTag,
    pub sense: Sense,
    pub rhs: f64,
    pub coeffs: Vec<(usize, f64)>,
}

/// Sparse minimisation LP with column bounds (default `[0, inf)`).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub map: VariableMap,
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
    /// Non-renewable penalty the LP was built with ($/kWh).
    pub k_power: f64,
}

impl LinearProgram {
    pub fn new(map: VariableMap) -> Self {
        let n = map.n_cols();
        LinearProgram {
            map,
            objective: vec![0.0; n],
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
            rows: Vec::new(),
            k_power: 0.0,
        }
    }

    pub fn n_cols(&self) -> usize {
        self.objective.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.coeffs.len()).sum()
    }

    /// Adds a row, merging repeated columns and dropping zero coefficients.
    pub fn push_row(&mut self, tag: RowTag, sense: Sense, rhs: f64, mut coeffs: Vec<(usize, f64)>) {
        coeffs.sort_by_key(|&(c, _)| c);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
        for (c, v) in coeffs {
            match merged.last_mut() {
                Some((lc, lv)) if *lc == c => *lv += v,
                _ => merged.push((c, v)),
            }
        }
        merged.retain(|&(_, v)| v != 0.0);
        self.rows.push(Row {
            tag,
            sense,
            rhs,
            coeffs: merged,
        });
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest bound or row violation of `x`, scaled per row by the largest term.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0_f64;
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().map(|&(c, a)| a * x[c]).sum();
            let scale = row
                .coeffs
                .iter()
                .map(|&(c, a)| (a * x[c]).abs())
                .fold(row.rhs.abs(), f64::max)
                .max(1.0);
            let r = match row.sense {
                Sense::Le => (lhs - row.rhs).max(0.0),
                Sense::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(r / scale);
        }
        worst
    }

    /// Checks the structural invariants: finite data, non-empty rows, in-range columns.
    pub fn check_well_formed(&self) -> Result<(), String> {
        let n = self.n_cols();
        if self.map.n_cols() != n || self.lower.len() != n || self.upper.len() != n {
            return Err("column dimension mismatch".into());
        }
        if let Some(j) = self.objective.iter().position(|c| !c.is_finite()) {
            return Err(format!("non-finite objective on {}", self.map.name(j)));
        }
        for row in &self.rows {
            if row.coeffs.is_empty() {
                return Err(format!("row {} has no columns", row.tag));
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|&(c, a)| c >= n || !a.is_finite()) {
                return Err(format!("row {} has invalid data", row.tag));
            }
        }
        Ok(())
    }

    /// Writes the LP in free-format MPS. Columns are named `kind[entity][step]`,
    /// rows by their provenance tag.
    pub fn write_mps(&self, mut out: impl io::Write) -> io::Result<()> {
        let col_names: Vec<String> = (0..self.n_cols()).map(|j| mps_name(&self.map.name(j))).collect();
        let row_names: Vec<String> = self.rows.iter().map(|r| mps_name(&r.tag.to_string())).collect();
        let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.n_cols()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(c, a) in &row.coeffs {
                columns[c].push((i, a));
            }
        }
        let mut s = String::new();
        s.push_str("NAME supplyflex\nROWS\n N  COST\n");
        for (row, name) in self.rows.iter().zip(&row_names) {
            let sense = match row.sense {
                Sense::Le => 'L',
                Sense::Eq => 'E',
            };
            writeln!(s, " {sense}  {name}").unwrap();
        }
        s.push_str("COLUMNS\n");
        for (j, entries) in columns.iter().enumerate() {
            if self.objective[j] != 0.0 {
                writeln!(s, "    {}  COST  {:e}", col_names[j], self.objective[j]).unwrap();
            }
            for &(i, a) in entries {
                writeln!(s, "    {}  {}  {:e}", col_names[j], row_names[i], a).unwrap();
            }
        }
        s.push_str("RHS\n");
        for (row, name) in self.rows.iter().zip(&row_names) {
            if row.rhs != 0.0 {
                writeln!(s, "    RHS  {}  {:e}", name, row.rhs).unwrap();
            }
        }
        s.push_str("BOUNDS\n");
        for j in 0..self.n_cols() {
            let (lo, up) = (self.lower[j], self.upper[j]);
            if lo == up {
                writeln!(s, " FX BND  {}  {:e}", col_names[j], lo).unwrap();
                continue;
            }
            if lo != 0.0 {
                writeln!(s, " LO BND  {}  {:e}", col_names[j], lo).unwrap();
            }
            if up.is_finite() {
                writeln!(s, " UP BND  {}  {:e}", col_names[j], up).unwrap();
            }
        }
        s.push_str("ENDATA\n");
        out.write_all(s.as_bytes())
    }
}

fn mps_name(s: &str) -> String {
    s.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect()
}
