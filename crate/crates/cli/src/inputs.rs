//! Matrix, state and perturbation selectors: preset names or JSON files.
//!
//! Matrices: `sigma-x`, `sigma-z`, `hadamard`, `identity[:n]`, `diag:a,b,..`,
//! `random-spd:n`, `random-hermitian:n`, `geometric:n`, `decaying:n`, or a
//! matrix file. States: `plus`, `minus`, `h-plus`, `h-minus`, `uniform`,
//! `e<i>` (1-based), `random`, or a vector file. Random presets draw from the
//! command's seeded generator in the order they are loaded.

use std::path::Path;

use serde::Deserialize;

use qgld_core::instances::{
    geometric_spectrum, random_decaying_symmetric, random_nonsingular_hermitian, random_spd, random_state,
    InstanceRng,
};
use qgld_core::numeric::io::read_matrix;
use qgld_core::numeric::{norm, presets, ComplexMatrix, C64};
use qgld_core::qgpe::{build_delta, DeltaKind, PerturbationDirection};

use crate::error::{CliError, CliResult};

fn split(spec: &str) -> (&str, Option<&str>) {
    match spec.split_once(':') {
        Some((a, b)) => (a, Some(b)),
        None => (spec, None),
    }
}

fn size_arg(name: &str, arg: Option<&str>, default: Option<usize>) -> CliResult<usize> {
    let n = match arg {
        Some(a) => a
            .parse::<usize>()
            .map_err(|_| CliError::usage(format!("{name}: size {a:?} is not a positive integer")))?,
        None => default.ok_or_else(|| CliError::usage(format!("{name} needs a size, e.g. {name}:8")))?,
    };
    if n == 0 || n > 1024 {
        return Err(CliError::usage(format!("{name}: size must lie in [1, 1024], got {n}")));
    }
    Ok(n)
}

pub fn load_matrix(spec: &str, rng: &mut InstanceRng) -> CliResult<ComplexMatrix> {
    let (name, arg) = split(spec);
    let m = match name {
        "sigma-x" => presets::pauli_x(),
        "sigma-z" => presets::pauli_z(),
        "hadamard" => presets::hadamard(),
        "identity" => ComplexMatrix::identity(size_arg(name, arg, Some(2))?),
        "diag" => {
            let values = arg
                .unwrap_or("")
                .split(',')
                .map(|v| v.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| CliError::usage(format!("diag: cannot parse {spec:?}")))?;
            ComplexMatrix::diag(&values)
        }
        "random-spd" => random_spd(size_arg(name, arg, None)?, rng),
        "random-hermitian" => random_nonsingular_hermitian(size_arg(name, arg, None)?, rng),
        "geometric" => geometric_spectrum(size_arg(name, arg, None)?, rng),
        "decaying" => random_decaying_symmetric(size_arg(name, arg, None)?, rng),
        _ => {
            let path = Path::new(spec);
            if !path.exists() {
                return Err(CliError::usage(format!("{spec}: no such preset or matrix file")));
            }
            read_matrix(path)?
        }
    };
    Ok(m)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum VectorFile {
    Real(Vec<f64>),
    Complex { re: Vec<f64>, im: Option<Vec<f64>> },
}

fn read_vector(path: &Path) -> CliResult<Vec<C64>> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file: VectorFile = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("{}: not a vector file: {e}", path.display())))?;
    let v: Vec<C64> = match file {
        VectorFile::Real(re) => re.into_iter().map(|x| C64::new(x, 0.0)).collect(),
        VectorFile::Complex { re, im } => {
            let im = im.unwrap_or_else(|| vec![0.0; re.len()]);
            if im.len() != re.len() {
                return Err(CliError::usage(format!("{}: re and im differ in length", path.display())));
            }
            re.into_iter().zip(im).map(|(a, b)| C64::new(a, b)).collect()
        }
    };
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(CliError::usage(format!("{}: non-finite entry", path.display())));
    }
    Ok(v)
}

/// A normalized state of dimension `n`.
pub fn load_state(spec: &str, n: usize, rng: &mut InstanceRng) -> CliResult<Vec<C64>> {
    let need2 = |v: Vec<C64>| -> CliResult<Vec<C64>> {
        if n != 2 {
            return Err(CliError::usage(format!("state {spec} is 2-dimensional but the matrix is {n}x{n}")));
        }
        Ok(v)
    };
    let v = match spec {
        "plus" => need2(presets::plus())?,
        "minus" => need2(presets::minus())?,
        "h-plus" => need2(presets::hadamard_plus())?,
        "h-minus" => need2(presets::hadamard_minus())?,
        "uniform" => presets::uniform(n),
        "random" => random_state(n, true, rng),
        s if s.starts_with('e') && s[1..].parse::<usize>().is_ok() => {
            let i: usize = s[1..].parse().expect("checked above");
            if i == 0 || i > n {
                return Err(CliError::usage(format!("basis state {s} is out of range 1..={n}")));
            }
            presets::basis(n, i - 1)
        }
        _ => {
            let path = Path::new(spec);
            if !path.exists() {
                return Err(CliError::usage(format!("{spec}: no such state preset or vector file")));
            }
            read_vector(path)?
        }
    };
    if v.len() != n {
        return Err(CliError::usage(format!("state has {} entries, matrix is {n}x{n}", v.len())));
    }
    let nrm = norm(&v);
    if (nrm - 1.0).abs() > 1e-10 {
        return Err(CliError::usage(format!("state is not normalized (norm {nrm:.12})")));
    }
    Ok(v)
}

/// `element:i,j` (1-based), `all-ones`, `outer` (needs a state), `identity`,
/// or a matrix file.
pub fn load_delta(spec: &str, n: usize, phi: Option<&[C64]>) -> CliResult<PerturbationDirection> {
    let (name, arg) = split(spec);
    let d = match name {
        "element" => {
            let parsed = arg.and_then(|a| {
                let (i, j) = a.split_once(',')?;
                Some((i.trim().parse::<usize>().ok()?, j.trim().parse::<usize>().ok()?))
            });
            let (i, j) = parsed.ok_or_else(|| CliError::usage(format!("expected element:i,j, got {spec:?}")))?;
            if i == 0 || j == 0 || i > n || j > n {
                return Err(CliError::usage(format!("element indices are 1-based and at most {n}, got {i},{j}")));
            }
            build_delta(DeltaKind::Element { i: i - 1, j: j - 1 }, n)?
        }
        "all-ones" => build_delta(DeltaKind::AllOnes, n)?,
        "outer" => {
            let phi = phi.ok_or_else(|| CliError::usage("--delta outer needs --phi"))?;
            build_delta(DeltaKind::Outer { phi: phi.to_vec() }, n)?
        }
        "identity" => PerturbationDirection::custom(ComplexMatrix::identity(n))?,
        _ => {
            let path = Path::new(spec);
            if !path.exists() {
                return Err(CliError::usage(format!("{spec}: no such perturbation kind or matrix file")));
            }
            PerturbationDirection::custom(read_matrix(path)?)?
        }
    };
    if d.dim() != n {
        return Err(CliError::usage(format!("perturbation is {0}x{0}, matrix is {n}x{n}", d.dim())));
    }
    Ok(d)
}
