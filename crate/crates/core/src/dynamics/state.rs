//! Amplitudes on a box and their plain-text checkpoint format.
//!
//! A checkpoint is a header line followed by one line per site in canonical
//! order:
//!
//! ```text
//! lattice d=1 lo=-2 hi=2 t=0.0000000000000000e0
//! -2 1.0000000000000000e0 0.0000000000000000e0
//! ```
//!
//! Sites are comma-separated coordinates; `re` and `im` use `{:.16e}`, which
//! round-trips every `f64`.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::lattice_poly::{BoxGeometry, MultiIndex};

use super::DynamicsError;

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeState {
    geometry: BoxGeometry,
    amplitudes: Vec<Complex64>,
    pub time: f64,
}

impl LatticeState {
    pub fn new(geometry: BoxGeometry, amplitudes: Vec<Complex64>) -> Result<Self, DynamicsError> {
        if amplitudes.len() != geometry.len() {
            return Err(DynamicsError::BoxMismatch(format!(
                "{} amplitudes for {} sites",
                amplitudes.len(),
                geometry.len()
            )));
        }
        Ok(LatticeState { geometry, amplitudes, time: 0.0 })
    }

    pub fn zeros(geometry: BoxGeometry) -> Self {
        let n = geometry.len();
        LatticeState { geometry, amplitudes: vec![Complex64::new(0.0, 0.0); n], time: 0.0 }
    }

    pub fn from_fn(geometry: BoxGeometry, f: impl Fn(&MultiIndex) -> Complex64) -> Self {
        let amplitudes = geometry.sites().map(|j| f(&j)).collect();
        LatticeState { geometry, amplitudes, time: 0.0 }
    }

    pub fn geometry(&self) -> &BoxGeometry {
        &self.geometry
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    /// `q_j`, zero outside the box.
    pub fn get(&self, j: &MultiIndex) -> Complex64 {
        self.geometry.index_of(j).map_or(Complex64::new(0.0, 0.0), |i| self.amplitudes[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (MultiIndex, Complex64)> + '_ {
        self.geometry.sites().zip(self.amplitudes.iter().copied())
    }

    pub fn to_text(&self) -> String {
        let join = |v: &[i32]| v.iter().map(i32::to_string).collect::<Vec<_>>().join(",");
        let mut out = format!(
            "lattice d={} lo={} hi={} t={:.16e}\n",
            self.geometry.dim(),
            join(self.geometry.lo()),
            join(self.geometry.hi()),
            self.time
        );
        for (j, q) in self.iter() {
            let _ = writeln!(out, "{} {:.16e} {:.16e}", join(j.coords()), q.re, q.im);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, DynamicsError> {
        let err = |line: usize, msg: String| DynamicsError::Checkpoint { line, msg };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| err(1, "empty checkpoint".into()))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("lattice") {
            return Err(err(1, "expected a `lattice` header".into()));
        }
        let mut d = None;
        let mut lo = None;
        let mut hi = None;
        let mut t = None;
        let coords = |s: &str| -> Result<Vec<i32>, String> {
            s.split(',').map(|c| c.trim().parse::<i32>().map_err(|e| format!("{c:?}: {e}"))).collect()
        };
        for f in fields {
            let (key, value) = f.split_once('=').ok_or_else(|| err(1, format!("bad header field {f:?}")))?;
            match key {
                "d" => d = Some(value.parse::<usize>().map_err(|e| err(1, e.to_string()))?),
                "lo" => lo = Some(coords(value).map_err(|m| err(1, m))?),
                "hi" => hi = Some(coords(value).map_err(|m| err(1, m))?),
                "t" => t = Some(value.parse::<f64>().map_err(|e| err(1, e.to_string()))?),
                _ => return Err(err(1, format!("unknown header field {key:?}"))),
            }
        }
        let (d, lo, hi) = match (d, lo, hi) {
            (Some(d), Some(lo), Some(hi)) => (d, lo, hi),
            _ => return Err(err(1, "header needs d, lo and hi".into())),
        };
        if lo.len() != d {
            return Err(err(1, format!("lo has {} coordinates, d = {d}", lo.len())));
        }
        let geometry = BoxGeometry::new(lo, hi)?;
        let mut state = LatticeState::zeros(geometry);
        state.time = t.unwrap_or(0.0);
        let mut seen = vec![false; state.amplitudes.len()];
        for (n, line) in lines {
            let n = n + 1;
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(err(n, "expected `site re im`".into()));
            }
            let j = MultiIndex::new(coords(parts[0]).map_err(|m| err(n, m))?);
            let idx = state
                .geometry
                .index_of(&j)
                .ok_or_else(|| err(n, format!("site {} outside the box", parts[0])))?;
            if std::mem::replace(&mut seen[idx], true) {
                return Err(err(n, format!("site {} listed twice", parts[0])));
            }
            let re = parts[1].parse::<f64>().map_err(|e| err(n, e.to_string()))?;
            let im = parts[2].parse::<f64>().map_err(|e| err(n, e.to_string()))?;
            state.amplitudes[idx] = Complex64::new(re, im);
        }
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoint_round_trip() {
        let geo = BoxGeometry::new(vec![-2, 0], vec![1, 2]).unwrap();
        let mut s = LatticeState::from_fn(geo, |j| {
            Complex64::new(0.1 * j.coords()[0] as f64 + 1.0 / 3.0, (j.coords()[1] as f64).sin())
        });
        s.time = 0.7;
        let back = LatticeState::from_text(&s.to_text()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn checkpoint_errors_carry_line() {
        let text = "lattice d=1 lo=0 hi=1 t=0\n0 1 0\n5 1 0\n";
        match LatticeState::from_text(text) {
            Err(DynamicsError::Checkpoint { line: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
    }
}
