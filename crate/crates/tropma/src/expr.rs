//! Tiny parser for periodic density expressions: sums of cos/sin
//! harmonics in lattice coordinates with rational coefficients.
//!
//! Grammar (whitespace-insensitive):
//!   expr   := term (('+' | '-') term)*
//!   term   := coef | coef '*' harm | harm
//!   harm   := ('cos' | 'sin') '(' int (',' int)* ')'
//!   coef   := integer | 'p/q'
//!
//! `cos(k1,...,kd)` means cos(2π(k1·y1 + ... + kd·yd)) in the lattice
//! coordinates y; the integer list length must equal the dimension.

use tropma_core::math;
use tropma_core::rat;
use tropma_core::Rat;

use crate::format::parse_rat;
use crate::AppError;

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicTerm {
    pub coef: Rat,
    /// None for a constant term.
    pub wave: Option<(Vec<i64>, bool)>, // (k, is_sine)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicExpr {
    pub dim: usize,
    pub terms: Vec<HarmonicTerm>,
}

impl HarmonicExpr {
    pub fn eval_lattice(&self, y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for t in &self.terms {
            let c = rat::to_f64(&t.coef);
            match &t.wave {
                None => acc += c,
                Some((k, sine)) => {
                    let mut p = 0.0;
                    for (ki, yi) in k.iter().zip(y) {
                        p += *ki as f64 * yi;
                    }
                    let v = if *sine {
                        math::sin(math::TAU * p)
                    } else {
                        math::cos(math::TAU * p)
                    };
                    acc += c * v;
                }
            }
        }
        acc
    }

    /// Samples on the uniform n^d grid in lattice coordinates,
    /// row-major with the first coordinate slowest.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        tropma_core::periodic::sample_grid(self.dim, n, |y| self.eval_lattice(y))
    }
}

pub fn parse_expr(input: &str, dim: usize) -> Result<HarmonicExpr, AppError> {
    let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(AppError::input("empty expression".into()));
    }
    let bad = |msg: &str| AppError::input(format!("expression error: {msg} in '{input}'"));

    // split into signed terms at top level (no nested parens beyond harm args)
    let mut terms = Vec::new();
    let bytes = s.as_bytes();
    let mut start = 0usize;
    let mut depth = 0i32;
    let mut cuts = Vec::new();
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b'+' | b'-' if depth == 0 && i > 0 => {
                // not a sign directly after '*' or another operator
                let prev = bytes[i - 1];
                if prev != b'*' && prev != b'+' && prev != b'-' && prev != b'/' {
                    cuts.push(i);
                }
            }
            _ => {}
        }
    }
    cuts.push(s.len());
    for &cut in &cuts {
        let piece = &s[start..cut];
        start = cut;
        if piece.is_empty() {
            return Err(bad("empty term"));
        }
        terms.push(parse_term(piece, dim).map_err(|e| match e {
            AppError::Input(m) => AppError::Input(m),
            other => other,
        })?);
    }
    Ok(HarmonicExpr { dim, terms })
}

fn parse_term(piece: &str, dim: usize) -> Result<HarmonicTerm, AppError> {
    let bad = |msg: String| AppError::input(format!("expression error: {msg}"));
    let (sign, body) = match piece.strip_prefix('-') {
        Some(rest) => (-1i64, rest),
        None => (1i64, piece.strip_prefix('+').unwrap_or(piece)),
    };
    let apply_sign = |r: Rat| if sign < 0 { -r } else { r };

    if let Some((coef_s, harm_s)) = body.split_once('*') {
        let coef = apply_sign(parse_rat(coef_s)?);
        let wave = parse_harm(harm_s, dim)?;
        Ok(HarmonicTerm { coef, wave: Some(wave) })
    } else if body.starts_with("cos") || body.starts_with("sin") {
        let wave = parse_harm(body, dim)?;
        Ok(HarmonicTerm { coef: apply_sign(rat::rat_i(1)), wave: Some(wave) })
    } else if body.contains("cos") || body.contains("sin") {
        Err(bad(format!("expected '*' between coefficient and harmonic in '{piece}'")))
    } else {
        Ok(HarmonicTerm { coef: apply_sign(parse_rat(body)?), wave: None })
    }
}

fn parse_harm(s: &str, dim: usize) -> Result<(Vec<i64>, bool), AppError> {
    let bad = |msg: String| AppError::input(format!("expression error: {msg}"));
    let (sine, rest) = if let Some(r) = s.strip_prefix("cos") {
        (false, r)
    } else if let Some(r) = s.strip_prefix("sin") {
        (true, r)
    } else {
        return Err(bad(format!("expected cos(...) or sin(...), got '{s}'")));
    };
    let inner = rest
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| bad(format!("malformed harmonic '{s}'")))?;
    let k: Vec<i64> = inner
        .split(',')
        .map(|t| t.parse::<i64>().map_err(|_| bad(format!("bad harmonic index '{t}'"))))
        .collect::<Result<_, _>>()?;
    if k.len() != dim {
        return Err(bad(format!(
            "harmonic has {} indices but the lattice dimension is {dim}",
            k.len()
        )));
    }
    Ok((k, sine))
}
