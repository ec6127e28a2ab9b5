//! Line-oriented text format for polynomials.
//!
//! ```text
//! poly d=1
//! 5:(1,0) 6:(0,1) # 5.0000000000000000e-1 0.0000000000000000e0
//! # 2.5000000000000000e-1 0.0000000000000000e0
//! ```
//!
//! One term per line in canonical order; the constant term has no site
//! tokens. Coefficients carry 17 significant digits, so parsing recovers the
//! exact doubles.

use std::fmt::Write as _;

use num_complex::Complex64;

use super::index::MultiIndex;
use super::monomial::{Exponent, Monomial};
use super::poly::HamiltonianPoly;
use super::PolyError;

pub fn to_text(p: &HamiltonianPoly) -> String {
    let mut out = format!("poly d={}\n", p.dim());
    for (m, c) in p.iter() {
        if !m.is_constant() {
            write!(out, "{m} ").unwrap();
        }
        writeln!(out, "# {:.16e} {:.16e}", c.re, c.im).unwrap();
    }
    out
}

pub fn from_text(text: &str) -> Result<HamiltonianPoly, PolyError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| PolyError::Parse("empty input".into()))?;
    let dim: usize = header
        .trim()
        .strip_prefix("poly d=")
        .and_then(|d| d.parse().ok())
        .filter(|&d| d > 0)
        .ok_or_else(|| PolyError::Parse(format!("bad header `{header}`")))?;

    let mut terms = Vec::new();
    for (lineno, line) in lines {
        let err = |msg: &str| PolyError::Parse(format!("line {}: {msg}", lineno + 1));
        let (sites, coeff) = line.split_once('#').ok_or_else(|| err("missing `#`"))?;
        let mut parts = coeff.split_whitespace();
        let mut next_f64 = || -> Result<f64, PolyError> {
            parts
                .next()
                .ok_or_else(|| err("missing coefficient"))?
                .parse()
                .map_err(|_| err("bad coefficient"))
        };
        let c = Complex64::new(next_f64()?, next_f64()?);
        let mut entries = Vec::new();
        for tok in sites.split_whitespace() {
            let (site, exps) = tok.split_once(":(").ok_or_else(|| err("bad site token"))?;
            let site: MultiIndex = site.parse()?;
            if site.dim() != dim {
                return Err(PolyError::DimensionMismatch {
                    left: dim,
                    right: site.dim(),
                });
            }
            let (a, b) = exps
                .strip_suffix(')')
                .and_then(|e| e.split_once(','))
                .ok_or_else(|| err("bad exponent pair"))?;
            let q = a.parse().map_err(|_| err("bad exponent"))?;
            let qbar = b.parse().map_err(|_| err("bad exponent"))?;
            entries.push((site, Exponent::new(q, qbar)));
        }
        terms.push((Monomial::new(entries), c));
    }
    HamiltonianPoly::from_terms(dim, terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_exact() {
        let p = HamiltonianPoly::from_terms(
            2,
            [
                (
                    Monomial::hop(MultiIndex::new(vec![1, -2]), MultiIndex::new(vec![1, -1])),
                    Complex64::new(0.1, -1.0 / 3.0),
                ),
                (Monomial::one(), Complex64::new(std::f64::consts::PI, 0.0)),
                (
                    Monomial::modulus_power(MultiIndex::new(vec![0, 0]), 2),
                    Complex64::new(1e-300, 7.0),
                ),
            ],
        )
        .unwrap();
        let text = to_text(&p);
        assert!(text.starts_with("poly d=2\n"));
        assert_eq!(from_text(&text).unwrap(), p);
    }

    #[test]
    fn rejects_garbage() {
        assert!(from_text("").is_err());
        assert!(from_text("poly d=1\n5:(1,0 # 1 0\n").is_err());
        assert!(from_text("poly d=1\n1,2:(1,0) # 1 0\n").is_err());
    }
}
