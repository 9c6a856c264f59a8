use serde::Serialize;

use qgld_core::numeric::presets::{hadamard, hadamard_minus, hadamard_plus, minus, pauli_x, plus, projector};
use qgld_core::numeric::ComplexMatrix;
use qgld_core::qgpe::{qgpe_run, GradientEncoding, PerturbationDirection};

use crate::error::CliResult;
use crate::format::Cell;

pub const HEADER: [&str; 8] = ["matrix", "delta", "state", "L", "m", "gradient_quantum", "reference_value", "abs_diff"];

/// Printed values for X = σx at L = 1e-6, then the Hadamard example.
const EXPECTED: [(&str, &str, &str, f64); 10] = [
    ("sigma-x", "X", "+", 0.999999),
    ("sigma-x", "X", "-", 0.999999),
    ("sigma-x", "|0><0|", "+", 0.500000),
    ("sigma-x", "|0><0|", "-", 0.499999),
    ("sigma-x", "|1><1|", "+", 0.500000),
    ("sigma-x", "|1><1|", "-", 0.499999),
    ("sigma-x", "I", "+", 0.999999),
    ("sigma-x", "I", "-", 1.000000),
    ("hadamard", "X", "H+", 0.70710691),
    ("hadamard", "X", "H-", 0.70710691),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub matrix: &'static str,
    pub delta: &'static str,
    pub state: &'static str,
    #[serde(rename = "L")]
    pub l: f64,
    pub m: u32,
    pub gradient_quantum: f64,
    pub reference_value: f64,
    pub abs_diff: f64,
}

impl Table1Row {
    pub fn cells(&self) -> Vec<Cell> {
        vec![
            self.matrix.into(),
            self.delta.into(),
            self.state.into(),
            self.l.into(),
            (self.m as usize).into(),
            self.gradient_quantum.into(),
            self.reference_value.into(),
            self.abs_diff.into(),
        ]
    }
}

pub fn table1_rows() -> CliResult<Vec<Table1Row>> {
    let enc = GradientEncoding::canonical(1e-6, 1)?;
    EXPECTED
        .iter()
        .map(|&(matrix, delta, state, expected)| {
            let x = if matrix == "hadamard" { hadamard() } else { pauli_x() };
            let d = match delta {
                "X" => pauli_x(),
                "|0><0|" => projector(2, 0),
                "|1><1|" => projector(2, 1),
                _ => ComplexMatrix::identity(2),
            };
            let v = match state {
                "+" => plus(),
                "-" => minus(),
                "H+" => hadamard_plus(),
                _ => hadamard_minus(),
            };
            let out = qgpe_run(&x, &v, &PerturbationDirection::custom(d)?, &enc)?;
            let g = out.amplitude_gradient.expect("m = 1 has an amplitude readout");
            Ok(Table1Row {
                matrix,
                delta,
                state,
                l: enc.l(),
                m: enc.m(),
                gradient_quantum: g,
                reference_value: expected,
                abs_diff: (g - expected).abs(),
            })
        })
        .collect()
}
