//! Exact exponent bookkeeping for the interpolation and Leibniz estimates of the
//! quadratic nonlinearity: admissible Hölder parameters and time-decay exponents.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub type Q = Ratio<i64>;

/// Exact rational, serialized as `"p/q"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(pub Q);

impl Rational {
    pub fn to_f64(self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `"3"`, `"3/5"`, `"0.6"` and `"-1.25"`.
    fn from_str(text: &str) -> Result<Self> {
        let bad = || Error::Config(format!("not a rational number: {text:?}"));
        let t = text.trim();
        if let Some((a, b)) = t.split_once('/') {
            let a: i64 = a.trim().parse().map_err(|_| bad())?;
            let b: i64 = b.trim().parse().map_err(|_| bad())?;
            if b == 0 {
                return Err(bad());
            }
            return Ok(Rational(Q::new(a, b)));
        }
        let (neg, body) = t.strip_prefix('-').map_or((false, t), |r| (true, r));
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if int.is_empty() && frac.is_empty() || frac.len() > 12 {
            return Err(bad());
        }
        let digits = |d: &str| -> Result<i64> {
            if d.is_empty() {
                Ok(0)
            } else if d.bytes().all(|b| b.is_ascii_digit()) {
                d.parse().map_err(|_| bad())
            } else {
                Err(bad())
            }
        };
        let scale = 10i64.pow(frac.len() as u32);
        let v = Q::from_integer(digits(int)?) + Q::new(digits(frac)?, scale);
        Ok(Rational(if neg { -v } else { v }))
    }
}

fn q(a: i64, b: i64) -> Q {
    Q::new(a, b)
}

/// Interpolation exponent with its admissible range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Beta {
    pub name: String,
    pub value: Rational,
    pub lower: Rational,
    pub upper: Rational,
    pub admissible: bool,
}

impl Beta {
    fn new(name: &str, value: Q, lower: Q) -> Self {
        Beta {
            name: name.into(),
            value: Rational(value),
            lower: Rational(lower),
            upper: Rational(Q::from_integer(1)),
            admissible: value >= lower && value <= Q::from_integer(1),
        }
    }
}

/// `(1/p0 - 1/p + kappa/n) / (1/p0 - 1/p1 + s/n)` and whether it lies in `[kappa/s, 1]`.
/// Integrability exponents are passed as reciprocals in `[0, 1)`.
pub fn gn_beta(n: u32, s: Q, kappa: Q, inv_p: Q, inv_p0: Q, inv_p1: Q) -> Result<(Q, bool)> {
    if n == 0 {
        return Err(Error::Precondition("dimension must be positive".into()));
    }
    if kappa < Q::from_integer(0) || kappa >= s {
        return Err(Error::Precondition(format!("need 0 <= kappa < s, got kappa = {kappa}, s = {s}")));
    }
    for r in [inv_p, inv_p0, inv_p1] {
        if r <= Q::from_integer(0) || r >= Q::from_integer(1) {
            return Err(Error::Precondition(format!("integrability exponent 1/{r} outside (1, inf)")));
        }
    }
    let nn = Q::from_integer(n as i64);
    let den = inv_p0 - inv_p1 + s / nn;
    if den == Q::from_integer(0) {
        return Err(Error::Precondition("zero denominator".into()));
    }
    let beta = (inv_p0 - inv_p + kappa / nn) / den;
    Ok((beta, beta >= kappa / s && beta <= Q::from_integer(1)))
}

/// `n/order (1/2 - 1/p + kappa/n)` in `[kappa/order, 1]`, the `L2`-based case of
/// [`gn_beta`] that also allows `p = inf`. No interpolation is needed when
/// `1/p = 1/2` and `kappa = 0`.
fn l2_beta(name: &str, n: u32, order: Q, kappa: Q, inv_p: Q) -> Beta {
    let zero = Q::from_integer(0);
    if inv_p == q(1, 2) && kappa == zero {
        return Beta::new(name, zero, zero);
    }
    if order <= zero {
        return Beta { admissible: false, ..Beta::new(name, zero, zero) };
    }
    let nn = Q::from_integer(n as i64);
    Beta::new(name, nn / order * (q(1, 2) - inv_p + kappa / nn), kappa / order)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Feasibility {
    Feasible,
    /// The admissible interval of reciprocals is empty.
    EmptyInterval,
    /// The interval is nonempty but the standing hypothesis `s > n/2 - 1` fails.
    HypothesisViolated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reciprocal {
    pub name: String,
    pub value: Rational,
}

/// Hölder parameters, interpolation exponents and bookkeeping constants for one estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentSolution {
    pub n: u32,
    pub s: Rational,
    /// Target Lebesgue exponent; absent for the Sobolev-norm part.
    pub m: Option<u32>,
    pub feasibility: Feasibility,
    /// Admissible range of the first reciprocal.
    pub interval: (Rational, Rational),
    pub reciprocals: Vec<Reciprocal>,
    pub betas: Vec<Beta>,
    pub s_star: Rational,
    pub eps0: Rational,
    pub flags: Vec<String>,
}

impl ExponentSolution {
    pub fn is_feasible(&self) -> bool {
        self.feasibility == Feasibility::Feasible
    }

    /// Every exponent admissible and the Hölder sums exact.
    pub fn verify(&self) -> bool {
        if !self.is_feasible() {
            return false;
        }
        let r: Vec<Q> = self.reciprocals.iter().map(|r| r.value.0).collect();
        let in_unit = r.iter().all(|x| *x >= Q::from_integer(0) && *x <= Q::from_integer(1));
        let sums = match self.m {
            Some(m) => r[0] + r[1] == q(1, m as i64) && r[2] + r[3] == q(1, m as i64),
            None => r[0] + r[1] == q(1, 2) && r[2] + r[3] == q(1, 2),
        };
        let star = self.s_star.0 > Q::from_integer(0) && self.s_star.0 * 2 < Q::from_integer(self.n as i64);
        in_unit && sums && star && self.betas.iter().all(|b| b.admissible)
    }
}

/// Knobs shared by both parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnOptions {
    /// `s* = min(n/4, s) * fraction`.
    pub s_star_fraction: Q,
    pub eps0: Q,
}

impl Default for GnOptions {
    fn default() -> Self {
        GnOptions { s_star_fraction: q(1, 2), eps0: q(1, 20) }
    }
}

fn s_star(n: u32, s: Q, opts: &GnOptions) -> Q {
    s.min(q(n as i64, 4)) * opts.s_star_fraction
}

fn hypothesis(n: u32, s: Q) -> bool {
    s > q(n as i64, 2) - 1
}

fn midpoint(lo: Q, hi: Q) -> Q {
    (lo + hi) / 2
}

fn recips(names: [&str; 4], values: [Q; 4]) -> Vec<Reciprocal> {
    names.iter().zip(values).map(|(n, v)| Reciprocal { name: (*n).into(), value: Rational(v) }).collect()
}

/// Parameters for the `L^m` estimate of the nonlinearity, `m` in `{1, 2}`.
///
/// For `m = 2` the first reciprocal is the midpoint of
/// `[max((n - 2(s+1))/(2n), 0), min(s/n, 1/2)]`.
pub fn part1_params(n: u32, s: Q, m: u32, opts: &GnOptions) -> Result<ExponentSolution> {
    if !(m == 1 || m == 2) {
        return Err(Error::Precondition(format!("m must be 1 or 2, got {m}")));
    }
    if n == 0 || s < Q::from_integer(0) {
        return Err(Error::Precondition(format!("need n >= 1 and s >= 0, got n = {n}, s = {s}")));
    }
    let zero = Q::from_integer(0);
    let nn = Q::from_integer(n as i64);
    let (lo, hi) = if m == 1 {
        (q(1, 2), q(1, 2))
    } else {
        ((q(1, 2) - (s + 1) / nn).max(zero), (s / nn).min(q(1, 2)))
    };
    let mut flags = Vec::new();
    let feasibility = if lo > hi {
        Feasibility::EmptyInterval
    } else if m == 2 && !hypothesis(n, s) {
        flags.push(format!("interval nonempty but s = {s} <= n/2 - 1"));
        Feasibility::HypothesisViolated
    } else {
        Feasibility::Feasible
    };
    let mut sol = ExponentSolution {
        n,
        s: Rational(s),
        m: Some(m),
        feasibility,
        interval: (Rational(lo), Rational(hi)),
        reciprocals: Vec::new(),
        betas: Vec::new(),
        s_star: Rational(s_star(n, s, opts)),
        eps0: Rational(opts.eps0),
        flags,
    };
    if lo <= hi {
        let p1 = midpoint(lo, hi);
        let p2 = q(1, m as i64) - p1;
        let one = Q::from_integer(1);
        sol.reciprocals = recips(["1/p1", "1/p2", "1/q1", "1/q2"], [p1, p2, p1, p2]);
        sol.betas = vec![
            l2_beta("beta1", n, s + 1, zero, p1),
            l2_beta("beta2", n, s, zero, p2),
            l2_beta("beta3", n, s + 2, one, p1),
            l2_beta("beta4", n, s + 1, one, p2),
        ];
    }
    Ok(sol)
}

/// Parameters for the `Hdot^s` estimate; the first reciprocal is the midpoint
/// of `[max(1/2 - 1/n, 0), min(1/2, s/n)]`.
pub fn part2_params(n: u32, s: Q, opts: &GnOptions) -> Result<ExponentSolution> {
    if n == 0 || s < Q::from_integer(0) {
        return Err(Error::Precondition(format!("need n >= 1 and s >= 0, got n = {n}, s = {s}")));
    }
    let zero = Q::from_integer(0);
    let nn = Q::from_integer(n as i64);
    let lo = (q(1, 2) - nn.recip()).max(zero);
    let hi = (s / nn).min(q(1, 2));
    let mut flags = Vec::new();
    let feasibility = if lo > hi { Feasibility::EmptyInterval } else { Feasibility::Feasible };
    if lo <= hi && !hypothesis(n, s) {
        flags.push(format!("boundary case: parameters exist but s > n/2 - 1 fails for s = {s}"));
    }
    let st = s_star(n, s, opts);
    if !(st > zero && st * 2 < nn) {
        flags.push(format!("s* = {st} violates 0 < 2 s* < n"));
    }
    let mut sol = ExponentSolution {
        n,
        s: Rational(s),
        m: None,
        feasibility,
        interval: (Rational(lo), Rational(hi)),
        reciprocals: Vec::new(),
        betas: Vec::new(),
        s_star: Rational(st),
        eps0: Rational(opts.eps0),
        flags,
    };
    if lo <= hi {
        let p3 = midpoint(lo, hi);
        let p4 = q(1, 2) - p3;
        let one = Q::from_integer(1);
        sol.reciprocals = recips(["1/p3", "1/p4", "1/p5", "1/p6"], [p3, p4, p3, p4]);
        sol.betas = vec![
            l2_beta("beta5", n, s + 1, s, p3),
            l2_beta("beta6", n, s, zero, p4),
            l2_beta("beta7", n, s + 2, s + 1, p3),
            l2_beta("beta8", n, s + 1, one, p4),
        ];
    }
    Ok(sol)
}

/// One decay exponent `rational + eps0_coeff * eps0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRow {
    pub norm: String,
    pub exponent: Rational,
    pub eps0_coeff: i64,
    pub value: f64,
    /// Exponent below `-1`, so `(1+sigma)^exponent` is integrable on the half line.
    pub integrable: bool,
}

/// Time-decay exponents of `||f||_{L1}`, `||f||_{L2}` and `||f||_{Hdot^s}`.
pub fn decay_exponent_audit(n: u32, s: Q, opts: &GnOptions) -> Result<Vec<AuditRow>> {
    if n < 2 {
        return Err(Error::Precondition(format!("the audit needs n >= 2, got {n}")));
    }
    let nn = Q::from_integer(n as i64);
    let st = s_star(n, s, opts);
    let rows: [(&str, Q, i64); 3] = if n == 2 {
        [("L1", q(-3, 2), 1), ("L2", Q::from_integer(-2), 1), ("Hdot(s)", q(-3, 2) - (s + st) / 2, 1)]
    } else {
        [
            ("L1", q(-1, 2) - nn / 2, 0),
            ("L2", q(-1, 2) - nn * 3 / 4, 0),
            ("Hdot(s)", q(-1, 2) - (s + st) / 2 - nn / 2, 0),
        ]
    };
    Ok(rows
        .into_iter()
        .map(|(name, e, c)| {
            let total = e + opts.eps0 * c;
            AuditRow {
                norm: name.into(),
                exponent: Rational(e),
                eps0_coeff: c,
                value: Rational(total).to_f64(),
                integrable: total < Q::from_integer(-1),
            }
        })
        .collect())
}
