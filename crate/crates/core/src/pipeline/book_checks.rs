//! Checks on the doubled book: fixed modulus of the odd annuli, growth of
//! balls against the shelf-free baseline, and type evidence.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::builders::{build_book_complex, BookComplex};
use crate::error::{Error, Result};
use crate::graph::ball;
use crate::modulus::{annulus_modulus, AnnulusSpec, SolverOptions};
use crate::par::Exec;
use crate::type_problem::{ball_truncation, classify_type, exhaustion_profile, ExhaustionProfile, TypePolicy, TypeVerdict};

/// Largest shelf count per edge.
pub const MAX_SHELVES: u32 = 1 << 16;

/// Number of squares glued along each spine edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShelfSchedule {
    Zero,
    /// `2^k` squares at edge `k`.
    Pow2,
    /// Explicit counts; edges past the end get the last entry.
    Table(Vec<u32>),
}

impl ShelfSchedule {
    pub fn count(&self, k: usize) -> u32 {
        match self {
            ShelfSchedule::Zero => 0,
            ShelfSchedule::Pow2 => 1u32.checked_shl(k as u32).unwrap_or(u32::MAX),
            ShelfSchedule::Table(t) => t.get(k).or(t.last()).copied().unwrap_or(0),
        }
    }

    fn check(&self, height: usize) -> Result<()> {
        let top = (0..).take_while(|k| 2 * k + 1 <= height).map(|k| self.count(k)).max().unwrap_or(0);
        if top > MAX_SHELVES {
            return Err(Error::Resource(format!("{top} shelves on one edge exceed the cap of {MAX_SHELVES}")));
        }
        Ok(())
    }
}

impl FromStr for ShelfSchedule {
    type Err = Error;

    /// `zero`, `pow2`, or a comma-separated list of counts.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "zero" => Ok(ShelfSchedule::Zero),
            "pow2" => Ok(ShelfSchedule::Pow2),
            list => list
                .split(',')
                .map(|x| x.trim().parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(ShelfSchedule::Table)
                .map_err(|_| Error::input(format!("bad shelf schedule `{s}`"))),
        }
    }
}

impl fmt::Display for ShelfSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShelfSchedule::Zero => write!(f, "zero"),
            ShelfSchedule::Pow2 => write!(f, "pow2"),
            ShelfSchedule::Table(t) => {
                let parts: Vec<String> = t.iter().map(u32::to_string).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallCount {
    pub radius: usize,
    pub vertices: usize,
    pub baseline: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BookReport {
    pub schedule: ShelfSchedule,
    pub height: usize,
    /// `(n, modulus)` for the odd annuli.
    pub odd_moduli: Vec<(usize, f64)>,
    pub modulus_spread: f64,
    pub ball_counts: Vec<BallCount>,
    pub profile: ExhaustionProfile,
    pub verdict: TypeVerdict,
}

impl BookReport {
    pub fn counts_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["radius", "vertices", "baseline"])?;
        for c in &self.ball_counts {
            w.write_record([c.radius.to_string(), c.vertices.to_string(), c.baseline.to_string()])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::input(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Moduli of the odd annuli `A_1, A_3, ...` of a built book.
pub fn odd_annulus_moduli(book: &BookComplex, tol: f64, exec: Exec) -> Result<Vec<(usize, f64)>> {
    let odd: Vec<usize> = book.annuli.keys().copied().filter(|n| n % 2 == 1).collect();
    let opts = SolverOptions::with_tol(tol);
    exec.try_map(&odd, |&n| {
        let spec = AnnulusSpec::new(&book.graph, book.annuli[&n].clone(), book.base)?;
        Ok((n, annulus_modulus(&book.graph, &spec, &opts)?.value))
    })
}

fn ball_sizes(book: &BookComplex, radii: &[usize]) -> Vec<usize> {
    radii
        .iter()
        .map(|&r| ball(&book.graph, &BTreeSet::from([book.base]), r).len())
        .collect()
}

/// Radii must stay below the book height so every ball is a true ball.
pub fn book_checks(
    schedule: &ShelfSchedule,
    height: usize,
    radii: &[usize],
    tol: f64,
    exec: Exec,
) -> Result<BookReport> {
    if radii.iter().any(|&r| r == 0 || r >= height) {
        return Err(Error::input(format!("radii must lie in 1..{height}")));
    }
    schedule.check(height)?;
    let book = build_book_complex(&|k| schedule.count(k), height)?;
    let plain = build_book_complex(&|_| 0, height)?;

    let odd_moduli = odd_annulus_moduli(&book, tol, exec)?;
    let (lo, hi) = odd_moduli
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(_, m)| (a.min(m), b.max(m)));
    let modulus_spread = if odd_moduli.is_empty() { 0.0 } else { hi - lo };
    if modulus_spread > 1e-6 {
        return Err(Error::Verification(format!(
            "odd annulus moduli range over {lo}..{hi}"
        )));
    }

    let ball_counts: Vec<BallCount> = radii
        .iter()
        .zip(ball_sizes(&book, radii))
        .zip(ball_sizes(&plain, radii))
        .map(|((&radius, vertices), baseline)| BallCount {
            radius,
            vertices,
            baseline,
        })
        .collect();
    if let Some(c) = ball_counts.iter().find(|c| c.vertices < c.baseline) {
        return Err(Error::Verification(format!(
            "ball of radius {} has fewer vertices than the shelf-free book",
            c.radius
        )));
    }

    let g = &book.graph;
    let base = book.base;
    let builder = |r: usize| ball_truncation(g, base, r);
    let profile = exhaustion_profile(&builder, g.name(base), radii, tol, exec)?;
    let verdict = classify_type(&profile, &TypePolicy::default())?;
    Ok(BookReport {
        schedule: schedule.clone(),
        height,
        odd_moduli,
        modulus_spread,
        ball_counts,
        profile,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules_parse() {
        assert_eq!("zero".parse::<ShelfSchedule>().unwrap(), ShelfSchedule::Zero);
        assert_eq!("1, 2,3".parse::<ShelfSchedule>().unwrap(), ShelfSchedule::Table(vec![1, 2, 3]));
        assert!("x".parse::<ShelfSchedule>().is_err());
        assert_eq!(ShelfSchedule::Pow2.count(3), 8);
        assert_eq!(ShelfSchedule::Table(vec![1, 5]).count(9), 5);
        assert_eq!(ShelfSchedule::Table(vec![4, 0]).to_string(), "4,0");
    }

    #[test]
    fn odd_annuli_ignore_first_shelf() {
        let a = build_book_complex(&|_| 0, 8).unwrap();
        let b = build_book_complex(&|k| if k == 0 { 5 } else { 0 }, 8).unwrap();
        let ma = odd_annulus_moduli(&a, 1e-9, Exec::Sequential).unwrap();
        let mb = odd_annulus_moduli(&b, 1e-9, Exec::Sequential).unwrap();
        for (x, y) in ma.iter().zip(&mb) {
            assert!((x.1 - y.1).abs() < 1e-7);
        }
    }

    #[test]
    fn pow2_report() {
        let r = book_checks(&ShelfSchedule::Pow2, 12, &[2, 3, 4, 5, 6, 7, 8, 9], 1e-6, Exec::Parallel).unwrap();
        assert!(r.modulus_spread <= 1e-6);
        assert!(r.ball_counts.iter().all(|c| c.vertices >= c.baseline));
        assert!(r.ball_counts.iter().any(|c| c.vertices > c.baseline));
        assert_eq!(r.verdict.verdict, crate::type_problem::Verdict::ParabolicEvidence, "{:?}", r.verdict);
        assert!(r.counts_csv().unwrap().starts_with("radius,vertices,baseline\n2,"));
    }

    #[test]
    fn radii_checked() {
        assert!(book_checks(&ShelfSchedule::Zero, 5, &[5], 1e-6, Exec::Sequential).is_err());
        assert!(matches!(
            book_checks(&ShelfSchedule::Pow2, 40, &[2], 1e-6, Exec::Sequential),
            Err(Error::Resource(_))
        ));
    }
}
