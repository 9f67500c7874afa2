//! Text formatting of floating-point output: tables and CSVs print six
//! significant digits; JSON sidecars keep full machine precision.

pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..6).contains(&exp) {
        format!("{:.5e}", x)
    } else {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        let trimmed = s.trim_end_matches('0').trim_end_matches('.');
        if trimmed.is_empty() || trimmed == "-" {
            "0".to_string()
        } else {
            trimmed.to_string()
        }
    }
}

/// One CSV cell: floats at six significant digits.
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

pub fn csv_line(cells: &[Cell]) -> String {
    cells
        .iter()
        .map(|c| match c {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => sig6(*x),
            Cell::Text(s) => s.clone(),
        })
        .collect::<Vec<_>>()
        .join(",")
}
