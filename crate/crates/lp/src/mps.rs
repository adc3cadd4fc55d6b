//! Free-format MPS export, for handing a model to an external solver while
//! debugging.

use std::fmt::Write;

use crate::problem::{LinearProgram, Sense};

/// Renders `lp` as free MPS. Variables in `integers` are wrapped in
/// `MARKER INTORG` blocks. Maximization is written with `OBJSENSE MAX`.
pub fn to_free_mps(lp: &LinearProgram, name: &str, integers: &[usize]) -> String {
    let n = lp.num_vars();
    let mut cols: Vec<Vec<(String, f64)>> = vec![Vec::new(); n];
    for (i, row) in lp.eq_rows.iter().enumerate() {
        for &(j, a) in row {
            cols[j].push((format!("E{i}"), a));
        }
    }
    for (i, row) in lp.in_rows.iter().enumerate() {
        for &(j, a) in row {
            cols[j].push((format!("L{i}"), a));
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "NAME {name}");
    if lp.sense == Sense::Maximize {
        let _ = writeln!(out, "OBJSENSE\n    MAX");
    }
    let _ = writeln!(out, "ROWS\n N obj");
    for i in 0..lp.eq_rows.len() {
        let _ = writeln!(out, " E E{i}");
    }
    for i in 0..lp.in_rows.len() {
        let _ = writeln!(out, " L L{i}");
    }
    let _ = writeln!(out, "COLUMNS");
    let mut in_int = false;
    for j in 0..n {
        let is_int = integers.contains(&j);
        if is_int != in_int {
            let tag = if is_int { "INTORG" } else { "INTEND" };
            let _ = writeln!(out, "    MARKER 'MARKER' '{tag}'");
            in_int = is_int;
        }
        if lp.objective[j] != 0.0 {
            let _ = writeln!(out, "    x{j} obj {}", lp.objective[j]);
        }
        for (row, a) in &cols[j] {
            if *a != 0.0 {
                let _ = writeln!(out, "    x{j} {row} {a}");
            }
        }
        if lp.objective[j] == 0.0 && cols[j].iter().all(|(_, a)| *a == 0.0) {
            let _ = writeln!(out, "    x{j} obj 0");
        }
    }
    if in_int {
        let _ = writeln!(out, "    MARKER 'MARKER' 'INTEND'");
    }
    let _ = writeln!(out, "RHS");
    for (i, r) in lp.eq_rhs.iter().enumerate() {
        if *r != 0.0 {
            let _ = writeln!(out, "    rhs E{i} {r}");
        }
    }
    for (i, r) in lp.in_rhs.iter().enumerate() {
        if *r != 0.0 {
            let _ = writeln!(out, "    rhs L{i} {r}");
        }
    }
    let _ = writeln!(out, "BOUNDS");
    for j in 0..n {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        match (lo.is_finite(), hi.is_finite()) {
            (false, false) => {
                let _ = writeln!(out, " FR bnd x{j}");
            }
            (true, true) if lo == hi => {
                let _ = writeln!(out, " FX bnd x{j} {lo}");
            }
            (lf, hf) => {
                if !lf {
                    let _ = writeln!(out, " MI bnd x{j}");
                } else if lo != 0.0 {
                    let _ = writeln!(out, " LO bnd x{j} {lo}");
                }
                if hf {
                    let _ = writeln!(out, " UP bnd x{j} {hi}");
                }
            }
        }
    }
    let _ = writeln!(out, "ENDATA");
    out
}
