//! Euler characteristic curves as exact integer step functions.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::filtration::SimplexFiltration;
use crate::persistence::PersistenceDiagram;

/// A right-continuous integer step function that is zero far to the left.
///
/// Stored in canonical form: breakpoints strictly increasing and every
/// jump nonzero, so two step functions are equal exactly when they are
/// equal as functions.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    jumps: Vec<i64>,
}

// Breakpoints are always finite, so the derived PartialEq is an equivalence.

impl StepFunction {
    /// The zero function.
    pub fn zero() -> Self {
        Self::default()
    }

    /// Sums jumps at equal positions and drops those that cancel.
    pub fn from_jumps<I>(jumps: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, i64)>,
    {
        let jumps: Vec<(f64, i64)> = jumps.into_iter().collect();
        if jumps.iter().any(|(x, _)| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self::canonical(jumps))
    }

    pub(crate) fn canonical(mut jumps: Vec<(f64, i64)>) -> Self {
        jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut breakpoints = Vec::with_capacity(jumps.len());
        let mut out = Vec::with_capacity(jumps.len());
        let mut i = 0;
        while i < jumps.len() {
            let x = jumps[i].0;
            let mut sum = 0;
            while i < jumps.len() && jumps[i].0 == x {
                sum += jumps[i].1;
                i += 1;
            }
            if sum != 0 {
                // -0.0 and 0.0 compare equal; store one representative
                breakpoints.push(if x == 0.0 { 0.0 } else { x });
                out.push(sum);
            }
        }
        StepFunction {
            breakpoints,
            jumps: out,
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn jumps(&self) -> &[i64] {
        &self.jumps
    }

    pub fn is_zero(&self) -> bool {
        self.jumps.is_empty()
    }

    /// Value for all sufficiently large arguments.
    pub fn terminal_value(&self) -> i64 {
        self.jumps.iter().sum()
    }

    /// Sum of the jumps at breakpoints `<= a`.
    pub fn evaluate(&self, a: f64) -> i64 {
        let n = self.breakpoints.partition_point(|&x| x <= a);
        self.jumps[..n].iter().sum()
    }

    /// `(breakpoint, value on [breakpoint, next breakpoint))` pairs.
    pub fn values_after(&self) -> impl Iterator<Item = (f64, i64)> + '_ {
        self.breakpoints
            .iter()
            .zip(self.jumps.iter().scan(0, |acc, j| {
                *acc += j;
                Some(*acc)
            }))
            .map(|(&x, v)| (x, v))
    }

    /// CSV with a `terminal_value,<value>` first line, then a
    /// `breakpoint,value_after` header and one row per breakpoint.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().flexible(true).from_writer(w);
        wtr.write_record(["terminal_value", &self.terminal_value().to_string()])?;
        wtr.write_record(["breakpoint", "value_after"])?;
        for (x, v) in self.values_after() {
            wtr.write_record([x.to_string(), v.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Inverse of [`StepFunction::write_csv`].
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(r);
        let mut records = rdr.records();
        let first = records
            .next()
            .ok_or_else(|| Error::parse("step csv", "missing terminal_value line"))??;
        let terminal: i64 = match (first.get(0), first.get(1)) {
            (Some("terminal_value"), Some(v)) => v
                .trim()
                .parse()
                .map_err(|_| Error::parse("step csv line 1", "bad terminal value"))?,
            _ => return Err(Error::parse("step csv line 1", "expected terminal_value")),
        };
        records
            .next()
            .ok_or_else(|| Error::parse("step csv", "missing header"))??;
        let mut jumps = Vec::new();
        let mut prev = 0i64;
        for (i, rec) in records.enumerate() {
            let rec = rec?;
            let line = i + 3;
            let parse_err = || Error::parse(format!("step csv line {line}"), "malformed row");
            let x: f64 = rec
                .get(0)
                .ok_or_else(parse_err)?
                .trim()
                .parse()
                .map_err(|_| parse_err())?;
            let v: i64 = rec
                .get(1)
                .ok_or_else(parse_err)?
                .trim()
                .parse()
                .map_err(|_| parse_err())?;
            jumps.push((x, v - prev));
            prev = v;
        }
        let s = Self::from_jumps(jumps)?;
        if s.terminal_value() != terminal {
            return Err(Error::parse(
                "step csv",
                "terminal value disagrees with rows",
            ));
        }
        Ok(s)
    }
}

/// Euler characteristic of each sublevel set of `filt`.
pub fn ecc_from_filtration(filt: &SimplexFiltration<'_>) -> StepFunction {
    StepFunction::canonical(
        filt.complex()
            .simplices()
            .iter()
            .zip(filt.values())
            .map(|(s, &v)| (v, s.sign()))
            .collect(),
    )
}

/// Euler characteristic curve recovered from a diagram as the alternating
/// sum of Betti curves.
pub fn ecc_from_diagram(dgm: &PersistenceDiagram) -> StepFunction {
    let mut jumps = Vec::new();
    for p in dgm.points() {
        let sign = if p.dim % 2 == 0 { 1 } else { -1 };
        jumps.push((p.birth, sign));
        if p.death.is_finite() {
            jumps.push((p.death, -sign));
        }
    }
    StepFunction::canonical(jumps)
}

/// Integral of `|s1 - s2|` over the real line, or over `[-window, window]`
/// when a window is given.
///
/// Without a window the distance is infinite whenever the terminal values
/// differ. With a window it is always finite.
pub fn l1_distance(s1: &StepFunction, s2: &StepFunction, window: Option<f64>) -> Result<f64> {
    let (lo, hi) = match window {
        Some(b) if b.is_nan() || b <= 0.0 || b.is_infinite() => {
            return Err(Error::InvalidWindow(b))
        }
        Some(b) => (-b, b),
        None => {
            if s1.terminal_value() != s2.terminal_value() {
                return Ok(f64::INFINITY);
            }
            (f64::NEG_INFINITY, f64::INFINITY)
        }
    };
    let (a, b) = (&s1.breakpoints, &s2.breakpoints);
    let (mut i, mut j) = (0, 0);
    let mut diff: i64 = 0;
    let mut prev = f64::NEG_INFINITY;
    let mut total = 0.0;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        total += segment(prev, x, lo, hi, diff);
        if i < a.len() && a[i] == x {
            diff += s1.jumps[i];
            i += 1;
        }
        if j < b.len() && b[j] == x {
            diff -= s2.jumps[j];
            j += 1;
        }
        prev = x;
    }
    total += segment(prev, f64::INFINITY, lo, hi, diff);
    Ok(total)
}

/// `|diff|` times the length of `[from, to] ∩ [lo, hi]`.
fn segment(from: f64, to: f64, lo: f64, hi: f64, diff: i64) -> f64 {
    if diff == 0 {
        return 0.0;
    }
    let (l, r) = (from.max(lo), to.min(hi));
    if r > l {
        (r - l) * diff.unsigned_abs() as f64
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{AbstractComplex, Embedding, GeometricComplex};
    use crate::filtration::{directional_filtration, Direction};
    use crate::persistence::{PersistenceDiagram, PersistencePoint};

    fn step(j: &[(f64, i64)]) -> StepFunction {
        StepFunction::from_jumps(j.iter().copied()).unwrap()
    }

    #[test]
    fn edge_curve() {
        let k = AbstractComplex::new([vec![0, 1]]).unwrap();
        let e = Embedding::from_rows(2, vec![vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let gc = GeometricComplex::new(k, e).unwrap();
        let f = directional_filtration(&gc, &Direction::new(vec![1.0, 0.0]).unwrap()).unwrap();
        let s = ecc_from_filtration(&f);
        assert_eq!(s.breakpoints(), &[0.0]);
        assert_eq!(s.jumps(), &[1]);
        assert_eq!(s.evaluate(f64::NEG_INFINITY), 0);
        assert_eq!(s.evaluate(0.5), 1);
    }

    #[test]
    fn isolated_vertices_curve() {
        let k = AbstractComplex::new([vec![0], vec![1]]).unwrap();
        let e = Embedding::from_rows(2, vec![vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let gc = GeometricComplex::new(k, e).unwrap();
        let f = directional_filtration(&gc, &Direction::new(vec![1.0, 0.0]).unwrap()).unwrap();
        assert_eq!(ecc_from_filtration(&f), step(&[(0.0, 1), (1.0, 1)]));
    }

    #[test]
    fn evaluation() {
        assert_eq!(StepFunction::zero().evaluate(3.0), 0);
        let s = step(&[(0.0, 1), (1.0, 1)]);
        assert_eq!(s.evaluate(0.5), 1);
        assert_eq!(s.evaluate(1.0), 2);
        assert_eq!(s.evaluate(-0.1), 0);
        assert_eq!(s.evaluate(1e9), s.terminal_value());
    }

    #[test]
    fn canonical_form() {
        let s = step(&[(1.0, 1), (0.0, 2), (1.0, -1), (0.0, -1)]);
        assert_eq!(s.breakpoints(), &[0.0]);
        assert_eq!(s.jumps(), &[1]);
        assert_eq!(step(&[(-0.0, 1)]), step(&[(0.0, 1)]));
        assert!(StepFunction::from_jumps([(f64::NAN, 1)]).is_err());
    }

    #[test]
    fn distances() {
        let a = step(&[(0.0, 1)]);
        let b = step(&[(1.0, 1)]);
        assert_eq!(l1_distance(&a, &a, None).unwrap(), 0.0);
        assert_eq!(l1_distance(&a, &b, None).unwrap(), 1.0);
        assert_eq!(l1_distance(&b, &a, None).unwrap(), 1.0);
        let c = step(&[(0.0, 2)]);
        assert_eq!(l1_distance(&a, &c, None).unwrap(), f64::INFINITY);
        assert_eq!(l1_distance(&a, &c, Some(10.0)).unwrap(), 10.0);
        assert!(matches!(
            l1_distance(&a, &c, Some(0.0)),
            Err(Error::InvalidWindow(_))
        ));
        assert!(l1_distance(&a, &c, Some(-1.0)).is_err());
    }

    #[test]
    fn windowed_distance_clips_both_ends() {
        // difference is 1 on [-5, 5) and 2 afterwards
        let a = step(&[(-5.0, 1), (5.0, 1)]);
        let z = StepFunction::zero();
        assert_eq!(l1_distance(&a, &z, Some(3.0)).unwrap(), 6.0);
        assert_eq!(l1_distance(&a, &z, Some(6.0)).unwrap(), 10.0 + 2.0);
        assert_eq!(l1_distance(&a, &z, None).unwrap(), f64::INFINITY);
    }

    #[test]
    fn from_diagrams() {
        let pt = |b: f64, d: f64, dim| PersistencePoint::new(b, d, dim).unwrap();
        let d0 = PersistenceDiagram::from_points(vec![pt(0.0, f64::INFINITY, 0)]);
        assert_eq!(ecc_from_diagram(&d0), step(&[(0.0, 1)]));
        let circle = PersistenceDiagram::from_points(vec![
            pt(0.0, f64::INFINITY, 0),
            pt(2.0, f64::INFINITY, 1),
        ]);
        assert_eq!(ecc_from_diagram(&circle), step(&[(0.0, 1), (2.0, -1)]));
        let finite =
            PersistenceDiagram::from_points(vec![pt(0.0, f64::INFINITY, 0), pt(1.0, 3.0, 0)]);
        assert_eq!(
            ecc_from_diagram(&finite),
            step(&[(0.0, 1), (1.0, 1), (3.0, -1)])
        );
    }

    #[test]
    fn csv_round_trip() {
        let s = step(&[(-1.5, 1), (0.25, -2), (3.0, 2)]);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("terminal_value,1\nbreakpoint,value_after\n-1.5,1\n"));
        assert_eq!(StepFunction::read_csv(&buf[..]).unwrap(), s);
    }
}
