//! Growth tables, the step function `L` built from them, and the shell-size
//! ratio constant.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::epsilon::EpsilonTable;
use crate::error::{Error, Result};

/// Prescribed growth `r -> M(r)` on a finite table, read as a non-decreasing
/// function: running maximum, linear in `ln r` between entries, constant
/// beyond the ends.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthTable {
    points: Vec<(f64, f64)>,
}

impl GrowthTable {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<GrowthTable> {
        if points.is_empty() {
            return Err(Error::input("growth table `M` is empty"));
        }
        if points.iter().any(|&(r, m)| !(r > 0.0) || !r.is_finite() || !m.is_finite()) {
            return Err(Error::input("growth table `M` needs finite entries with r > 0"));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = points.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::input(format!("duplicate r = {} in growth table `M`", w[0].0)));
        }
        let mut best = f64::NEG_INFINITY;
        for p in &mut points {
            best = best.max(p.1);
            p.1 = best;
        }
        Ok(GrowthTable { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn eval(&self, r: f64) -> f64 {
        let p = &self.points;
        if r <= p[0].0 {
            return p[0].1;
        }
        if r >= p[p.len() - 1].0 {
            return p[p.len() - 1].1;
        }
        let i = p.partition_point(|q| q.0 <= r);
        let (r0, m0) = p[i - 1];
        let (r1, m1) = p[i];
        let t = (r.ln() - r0.ln()) / (r1.ln() - r0.ln());
        m0 + t * (m1 - m0)
    }

    /// Reads `r,M` CSV with a header row.
    pub fn from_csv(text: &str) -> Result<GrowthTable> {
        let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut points = Vec::new();
        for rec in rd.deserialize() {
            let (r, m): (f64, f64) = rec?;
            points.push((r, m));
        }
        GrowthTable::new(points)
    }
}

/// Non-increasing step function through `(ε, L)` breakpoints listed with
/// `ε` decreasing: `L(ε) = L_i` on `[ε_i, ε_{i-1})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LFunction {
    pub breakpoints: Vec<(f64, f64)>,
    /// `floors[i] = ⌊L_{i}⌋` for breakpoint `i`, i.e. `⌊L(ε̂_{i+1})⌋`.
    pub floors: Vec<u32>,
}

impl LFunction {
    pub fn new(breakpoints: Vec<(f64, f64)>) -> Result<LFunction> {
        if breakpoints.is_empty() {
            return Err(Error::input("step function needs a breakpoint"));
        }
        if breakpoints.windows(2).any(|w| w[1].0 > w[0].0 || w[1].1 < w[0].1) {
            return Err(Error::Precondition("L must be non-increasing in ε".into()));
        }
        if breakpoints.iter().any(|&(e, l)| !(e > 0.0) || !(l >= 1.0) || !l.is_finite()) {
            return Err(Error::Precondition("L needs ε > 0 and finite values of at least 1".into()));
        }
        let floors = breakpoints
            .iter()
            .map(|&(_, l)| {
                l.floor()
                    .to_u32()
                    .ok_or_else(|| Error::Resource(format!("L value {l} is too large")))
            })
            .collect::<Result<_>>()?;
        Ok(LFunction { breakpoints, floors })
    }

    /// Constant floors `c` at the given moduli (test and CLI convenience).
    pub fn from_floors(eps: &[f64], floors: &[u32]) -> Result<LFunction> {
        if eps.len() != floors.len() {
            return Err(Error::input("need one floor per modulus"));
        }
        LFunction::new(eps.iter().zip(floors).map(|(&e, &f)| (e, f as f64)).collect())
    }

    pub fn eval(&self, eps: f64) -> f64 {
        let b = &self.breakpoints;
        // First breakpoint not larger than eps.
        match b.iter().position(|&(e, _)| e <= eps) {
            Some(i) => b[i].1,
            None => b[b.len() - 1].1,
        }
    }
}

/// `L(ε) = max{M(exp(4π C1 / ε)), 1}` at `ε̂_1 ..= ε̂_{kmax+1}`, made
/// non-increasing in `ε` by a running maximum.
pub fn choose_l(m: &GrowthTable, c1: f64, eps: &EpsilonTable) -> Result<LFunction> {
    if !(c1 > 0.0) || !c1.is_finite() {
        return Err(Error::input("C1 must be a positive number"));
    }
    let mut points = Vec::new();
    let mut best = 1.0f64;
    for k in 1..eps.rows.len() {
        let e = eps.estimate(k).expect("row exists");
        if !(e > 0.0) {
            return Err(Error::Precondition(format!("escape modulus estimate for k = {k} is zero")));
        }
        let r = (4.0 * std::f64::consts::PI * c1 / e).exp();
        best = best.max(m.eval(r));
        points.push((e, best));
    }
    // Equal estimates at neighbouring k must share one value.
    for i in (1..points.len()).rev() {
        if points[i].0 == points[i - 1].0 {
            points[i - 1].1 = points[i].1;
        }
    }
    LFunction::new(points)
}

/// Exact `max_k (Σ_{j<=k} 2^{f_j}) / 2^{f_{k+1}}` with `f_j = ⌊L(ε̂_j)⌋`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpaReport {
    pub numerator: String,
    pub denominator: String,
    pub constant: f64,
    pub argmax: usize,
}

pub fn check_epa(l: &LFunction, kmax: usize) -> Result<EpaReport> {
    if kmax < 1 || l.floors.len() < kmax + 1 {
        return Err(Error::Precondition(format!("need floors for k = 1..={}", kmax + 1)));
    }
    let pow = |f: u32| BigUint::one() << f as usize;
    let mut sum = BigUint::zero();
    let mut best: Option<(BigUint, BigUint, usize)> = None;
    for k in 1..=kmax {
        sum += pow(l.floors[k - 1]);
        let den = pow(l.floors[k]);
        let better = match &best {
            None => true,
            Some((n, d, _)) => &sum * d > n * &den,
        };
        if better {
            best = Some((sum.clone(), den, k));
        }
    }
    let (n, d, k) = best.expect("kmax >= 1");
    let constant = n.to_f64().unwrap_or(f64::INFINITY) / d.to_f64().unwrap_or(f64::INFINITY);
    Ok(EpaReport {
        numerator: n.to_string(),
        denominator: d.to_string(),
        constant,
        argmax: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::epsilon::EpsilonRow;

    fn table(values: &[f64]) -> EpsilonTable {
        EpsilonTable {
            rows: values
                .iter()
                .enumerate()
                .map(|(k, &v)| EpsilonRow {
                    k,
                    radii: vec![10],
                    upper: vec![v],
                    estimate: v,
                    plateau: false,
                })
                .collect(),
            tol: 1e-9,
        }
    }

    #[test]
    fn growth_table_rules() {
        let m = GrowthTable::new(vec![(10.0, 1.0)]).unwrap();
        assert_eq!(m.eval(1e9), 1.0);
        assert!(GrowthTable::new(vec![(10.0, 1.0), (10.0, 2.0)])
            .unwrap_err()
            .to_string()
            .contains("r = 10"));
        let m = GrowthTable::new(vec![(1.0, 0.0), (100.0, 2.0), (10.0, 5.0)]).unwrap();
        assert_eq!(m.points()[2].1, 5.0);
        let m = GrowthTable::from_csv("r,M\n1,0\n100,2\n").unwrap();
        assert!((m.eval(10.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_growth_gives_unit_l() {
        let m = GrowthTable::new(vec![(10.0, 1.0)]).unwrap();
        let l = choose_l(&m, 1.0, &table(&[0.6, 0.5, 0.4, 0.33])).unwrap();
        assert_eq!(l.floors, vec![1, 1, 1]);
        assert_eq!(l.eval(0.6), 1.0);
    }

    #[test]
    fn log_growth() {
        // M(r) = ln r on a table wide enough to cover exp(4π C1 / ε).
        let pts: Vec<(f64, f64)> = (1..=200).map(|i| ((i as f64).exp(), i as f64)).collect();
        let m = GrowthTable::new(pts).unwrap();
        let l = choose_l(&m, 1.0, &table(&[0.6, 0.5, 0.4])).unwrap();
        for (e, v) in &l.breakpoints {
            assert!((v - 4.0 * std::f64::consts::PI / e).abs() < 1e-9);
        }
        let bigger = choose_l(&m, 2.0, &table(&[0.6, 0.5, 0.4])).unwrap();
        for (a, b) in l.breakpoints.iter().zip(&bigger.breakpoints) {
            assert!(b.1 >= a.1);
        }
    }

    #[test]
    fn step_evaluation() {
        let l = LFunction::new(vec![(0.5, 1.0), (0.4, 2.0), (0.3, 3.0)]).unwrap();
        assert_eq!(l.eval(0.9), 1.0);
        assert_eq!(l.eval(0.5), 1.0);
        assert_eq!(l.eval(0.45), 2.0);
        assert_eq!(l.eval(0.3), 3.0);
        assert_eq!(l.eval(0.1), 3.0);
        assert!(LFunction::new(vec![(0.5, 2.0), (0.4, 1.0)]).is_err());
    }

    #[test]
    fn epa_constants() {
        let e = [0.5, 0.4, 0.3, 0.2, 0.1];
        let flat = LFunction::from_floors(&e, &[3; 5]).unwrap();
        assert_eq!(check_epa(&flat, 4).unwrap().constant, 4.0);
        let grow = LFunction::from_floors(&e, &[1, 2, 3, 4, 5]).unwrap();
        assert!(check_epa(&grow, 4).unwrap().constant <= 2.0);
        let one = LFunction::from_floors(&e[..2], &[2, 3]).unwrap();
        let r = check_epa(&one, 1).unwrap();
        assert_eq!((r.numerator.as_str(), r.denominator.as_str()), ("4", "8"));
        assert!(check_epa(&one, 2).is_err());
    }
}
