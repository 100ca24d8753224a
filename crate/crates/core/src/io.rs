//! Plain-text problem files.
//!
//! ```text
//! ILS m n p q [structure]
//! a11 a12 ... a1n
//! ...
//! am1 ... amn
//! b1 ... bm
//! ```

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::ils::{IlsProblem, SignatureSplit};
use crate::structured::StructureKind;

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub split: SignatureSplit,
    pub structure: Option<StructureKind>,
}

impl ProblemFile {
    pub fn problem(&self) -> Result<IlsProblem> {
        IlsProblem::new(self.a.clone(), self.b.clone(), self.split)
    }
}

fn join(values: impl Iterator<Item = f64>) -> String {
    values.map(|v| format!("{v:.16e}")).collect::<Vec<_>>().join(" ")
}

pub fn write_problem<W: Write>(file: &ProblemFile, mut out: W) -> Result<()> {
    let (m, n) = file.a.shape();
    write!(out, "ILS {m} {n} {} {}", file.split.p, file.split.q)?;
    if let Some(kind) = &file.structure {
        write!(out, " {kind}")?;
    }
    writeln!(out)?;
    for row in file.a.row_iter() {
        writeln!(out, "{}", join(row.iter().copied()))?;
    }
    writeln!(out, "{}", join(file.b.iter().copied()))?;
    Ok(())
}

fn parse_usize(tok: Option<&str>, what: &str) -> Result<usize> {
    tok.ok_or_else(|| Error::Parse { line: 1, msg: format!("missing {what}") })?
        .parse()
        .map_err(|e| Error::Parse { line: 1, msg: format!("{what}: {e}") })
}

pub fn read_problem<R: BufRead>(input: R) -> Result<ProblemFile> {
    let mut lines = input.lines().enumerate().filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
    let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })?;
    let header = header?;
    let mut tok = header.split_whitespace();
    if tok.next() != Some("ILS") {
        return Err(Error::Parse { line: 1, msg: "header must start with ILS".into() });
    }
    let m = parse_usize(tok.next(), "m")?;
    let n = parse_usize(tok.next(), "n")?;
    let p = parse_usize(tok.next(), "p")?;
    let q = parse_usize(tok.next(), "q")?;
    if p + q != m {
        return Err(Error::Parse { line: 1, msg: format!("p + q = {} differs from m = {m}", p + q) });
    }
    let structure = tok
        .next()
        .map(|s| s.parse::<StructureKind>())
        .transpose()
        .map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?;

    let mut row = |expected: usize| -> Result<Vec<f64>> {
        let (idx, line) = lines.next().ok_or(Error::Parse { line: 0, msg: "unexpected end of file".into() })?;
        let line = line?;
        let vals = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| Error::Parse { line: idx + 1, msg: format!("'{t}': {e}") }))
            .collect::<Result<Vec<f64>>>()?;
        if vals.len() != expected {
            return Err(Error::Parse { line: idx + 1, msg: format!("expected {expected} values, found {}", vals.len()) });
        }
        Ok(vals)
    };
    let mut data = Vec::with_capacity(m * n);
    for _ in 0..m {
        data.extend(row(n)?);
    }
    let a = DMatrix::from_row_slice(m, n, &data);
    let b = DVector::from_vec(row(m)?);
    Ok(ProblemFile { a, b, split: SignatureSplit::new(p, q)?, structure })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gaussian_matrix, gaussian_vector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut a = gaussian_matrix(&mut rng, 7, 3);
        a[(0, 0)] = 1e-300;
        a[(1, 1)] = -3.0e300;
        a[(2, 2)] = f64::MIN_POSITIVE / 8.0;
        let file = ProblemFile {
            a,
            b: gaussian_vector(&mut rng, 7),
            split: SignatureSplit::new(5, 2).unwrap(),
            structure: Some(StructureKind::stacked_scaled(StructureKind::Toeplitz, 0.5)),
        };
        let mut buf = Vec::new();
        write_problem(&file, &mut buf).unwrap();
        let back = read_problem(buf.as_slice()).unwrap();
        assert_eq!(back, file);
        assert!(String::from_utf8(buf).unwrap().starts_with("ILS 7 3 5 2 stacked_scaled:toeplitz:0.5\n"));
    }

    #[test]
    fn parse_errors_name_the_line() {
        let text = "ILS 2 1 1 1\n1.0\nx\n3 4\n";
        match read_problem(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(read_problem("ILS 2 1 1 0\n".as_bytes()).is_err());
        assert!(read_problem("LS 2 1 1 1\n".as_bytes()).is_err());
        assert!(read_problem("ILS 2 1 1 1\n1\n2\n3\n".as_bytes()).is_err());
    }
}
