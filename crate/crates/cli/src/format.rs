//! Output helpers: 9-significant-digit decimals and CSV assembly.

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// `x` with exactly 9 significant digits. Plain decimal for exponents in
/// [−5, 9), scientific otherwise.
pub fn sig9(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0.00000000".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..9).contains(&exp) {
        return sci;
    }
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let body = if exp >= 0 {
        let split = exp as usize + 1;
        let (int, frac) = digits.split_at(split);
        if frac.is_empty() {
            int.to_string()
        } else {
            format!("{int}.{frac}")
        }
    } else {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    };
    format!("{sign}{body}")
}

pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => sig9(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

pub fn csv(header: &[&str], rows: &[Vec<Cell>]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let internal = |e: csv::Error| CliError::usage(format!("csv: {e}"));
    w.write_record(header).map_err(internal)?;
    for row in rows {
        w.write_record(row.iter().map(Cell::render)).map_err(internal)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::usage(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization is infallible");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(0.9999999375), "0.999999938");
        assert_eq!(sig9(1.0), "1.00000000");
        assert_eq!(sig9(-0.375), "-0.375000000");
        assert_eq!(sig9(123456.789), "123456.789");
        assert_eq!(sig9(1.25e-7), "1.25000000e-7");
        assert_eq!(sig9(3.0e-5), "0.0000300000000");
        assert_eq!(sig9(0.0), "0.00000000");
        // rounding that carries into a new digit
        assert_eq!(sig9(9.9999999999), "10.0000000");
    }

    #[test]
    fn csv_has_header() {
        let out = csv(&["a", "b"], &[vec![1usize.into(), 0.5.into()]]).unwrap();
        assert_eq!(out, "a,b\n1,0.500000000\n");
    }
}
