//! Bivariate polynomials, planar polynomial vector fields and truncated
//! univariate power series.
//!
//! Coefficients are `f64`. The families handled by this crate only ever
//! produce dyadic-rational coefficients of their parameters, so products and
//! sums of family polynomials are exact for parameters with short binary
//! expansions.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default truncation order for series computations.
pub const DEFAULT_ORDER: usize = 12;

/// Default zero threshold for leading-term detection.
pub const DEFAULT_TAU0: f64 = 1e-12;

/// Exact bivariate polynomial `Σ c_ij x^i y^j` stored in canonical form
/// (no zero coefficients).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly2 {
    terms: BTreeMap<(u32, u32), f64>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn monomial(i: u32, j: u32, c: f64) -> Self {
        let mut p = Self::zero();
        p.add_term(i, j, c);
        p
    }

    /// The coordinate polynomial `x`.
    pub fn x() -> Self {
        Self::monomial(1, 0, 1.0)
    }

    /// The coordinate polynomial `y`.
    pub fn y() -> Self {
        Self::monomial(0, 1, 1.0)
    }

    pub fn from_terms<I: IntoIterator<Item = (u32, u32, f64)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (i, j, c) in terms {
            p.add_term(i, j, c);
        }
        p
    }

    /// Adds `c x^i y^j`, dropping the entry if it cancels to zero.
    pub fn add_term(&mut self, i: u32, j: u32, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry((i, j)).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.remove(&(i, j));
        }
    }

    pub fn coeff(&self, i: u32, j: u32) -> f64 {
        self.terms.get(&(i, j)).copied().unwrap_or(0.0)
    }

    /// Terms in lexicographic `(i, j)` order.
    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.terms.iter().map(|(&(i, j), &c)| (i, j, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; the zero polynomial has degree −1.
    pub fn degree(&self) -> i32 {
        self.terms
            .keys()
            .map(|&(i, j)| (i + j) as i32)
            .max()
            .unwrap_or(-1)
    }

    /// Highest power of `y` present (0 for the zero polynomial).
    pub fn degree_in_y(&self) -> u32 {
        self.terms.keys().map(|&(_, j)| j).max().unwrap_or(0)
    }

    pub fn degree_in_x(&self) -> u32 {
        self.terms.keys().map(|&(i, _)| i).max().unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::from_terms(self.terms().map(|(i, j, c)| (i, j, k * c)))
    }

    /// Drops coefficients with `|c| <= tol`.
    pub fn cleaned(&self, tol: f64) -> Self {
        Self::from_terms(self.terms().filter(|&(_, _, c)| c.abs() > tol))
    }

    /// Homogeneous component of total degree `k`.
    pub fn homogeneous_part(&self, k: u32) -> Self {
        Self::from_terms(self.terms().filter(|&(i, j, _)| i + j == k))
    }

    /// Terms of total degree `>= k`.
    pub fn part_from_degree(&self, k: u32) -> Self {
        Self::from_terms(self.terms().filter(|&(i, j, _)| i + j >= k))
    }

    pub fn deriv_x(&self) -> Self {
        Self::from_terms(
            self.terms()
                .filter(|&(i, _, _)| i > 0)
                .map(|(i, j, c)| (i - 1, j, c * i as f64)),
        )
    }

    pub fn deriv_y(&self) -> Self {
        Self::from_terms(
            self.terms()
                .filter(|&(_, j, _)| j > 0)
                .map(|(i, j, c)| (i, j - 1, c * j as f64)),
        )
    }

    /// Evaluates the polynomial at `(x, y)`.
    ///
    /// Evaluation order is nested Horner: the polynomial is read as
    /// `Σ_i x^i r_i(y)`, each `r_i` is evaluated by Horner in `y`, and the
    /// outer sum by Horner in `x`, highest powers first.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        if self.terms.is_empty() {
            return 0.0;
        }
        let dx = self.degree_in_x();
        let mut acc = 0.0;
        for i in (0..=dx).rev() {
            acc = acc * x + self.row_in_y(i, y);
        }
        acc
    }

    fn row_in_y(&self, i: u32, y: f64) -> f64 {
        let mut row: Vec<(u32, f64)> = self
            .terms
            .range((i, 0)..=(i, u32::MAX))
            .map(|(&(_, j), &c)| (j, c))
            .collect();
        if row.is_empty() {
            return 0.0;
        }
        row.reverse();
        let top = row[0].0;
        let mut acc = 0.0;
        let mut it = row.into_iter().peekable();
        for j in (0..=top).rev() {
            let c = match it.peek() {
                Some(&(jj, c)) if jj == j => {
                    it.next();
                    c
                }
                _ => 0.0,
            };
            acc = acc * y + c;
        }
        acc
    }

    /// Substitutes polynomials for both variables: `p(xs(u, v), ys(u, v))`.
    pub fn substitute(&self, xs: &Poly2, ys: &Poly2) -> Poly2 {
        let mut x_pows = vec![Poly2::constant(1.0)];
        for k in 1..=self.degree_in_x() as usize {
            let next = &x_pows[k - 1] * xs;
            x_pows.push(next);
        }
        let mut y_pows = vec![Poly2::constant(1.0)];
        for k in 1..=self.degree_in_y() as usize {
            let next = &y_pows[k - 1] * ys;
            y_pows.push(next);
        }
        let mut out = Poly2::zero();
        for (i, j, c) in self.terms() {
            let t = &x_pows[i as usize] * &y_pows[j as usize];
            out = &out + &t.scale(c);
        }
        out
    }

    /// `p(x + dx, y + dy)`.
    pub fn translate(&self, dx: f64, dy: f64) -> Poly2 {
        let xs = &Poly2::x() + &Poly2::constant(dx);
        let ys = &Poly2::y() + &Poly2::constant(dy);
        self.substitute(&xs, &ys)
    }

    /// Largest coefficient magnitude among terms of total degree `<= 1`.
    pub fn low_order_magnitude(&self) -> f64 {
        self.terms()
            .filter(|&(i, j, _)| i + j <= 1)
            .fold(0.0, |m, (_, _, c)| m.max(c.abs()))
    }
}

impl Add for &Poly2 {
    type Output = Poly2;
    fn add(self, rhs: &Poly2) -> Poly2 {
        let mut out = self.clone();
        for (i, j, c) in rhs.terms() {
            out.add_term(i, j, c);
        }
        out
    }
}

impl Sub for &Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: &Poly2) -> Poly2 {
        let mut out = self.clone();
        for (i, j, c) in rhs.terms() {
            out.add_term(i, j, -c);
        }
        out
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: &Poly2) -> Poly2 {
        let mut out = Poly2::zero();
        for (i1, j1, c1) in self.terms() {
            for (i2, j2, c2) in rhs.terms() {
                out.add_term(i1 + i2, j1 + j2, c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        self.scale(-1.0)
    }
}

impl fmt::Display for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // Highest total degree first reads more naturally.
        let mut terms: Vec<_> = self.terms().collect();
        terms.sort_by(|a, b| (b.0 + b.1).cmp(&(a.0 + a.1)).then(b.0.cmp(&a.0)));
        for (k, (i, j, c)) in terms.into_iter().enumerate() {
            let sign = if c < 0.0 { "-" } else { "+" };
            if k == 0 {
                if c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mag = c.abs();
            let mono = monomial_text(i, j);
            if mono.is_empty() {
                write!(f, "{mag}")?;
            } else if mag == 1.0 {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{mag}*{mono}")?;
            }
        }
        Ok(())
    }
}

fn monomial_text(i: u32, j: u32) -> String {
    let part = |v: &str, e: u32| match e {
        0 => String::new(),
        1 => v.to_string(),
        _ => format!("{v}^{e}"),
    };
    let (xp, yp) = (part("x", i), part("y", j));
    match (xp.is_empty(), yp.is_empty()) {
        (true, true) => String::new(),
        (false, true) => xp,
        (true, false) => yp,
        (false, false) => format!("{xp}*{yp}"),
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    i: u32,
    j: u32,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    terms: Vec<TermRepr>,
}

impl Serialize for Poly2 {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PolyRepr {
            terms: self.terms().map(|(i, j, c)| TermRepr { i, j, c }).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Poly2 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = PolyRepr::deserialize(deserializer)?;
        if let Some(t) = repr.terms.iter().find(|t| !t.c.is_finite()) {
            return Err(D::Error::custom(format!(
                "non-finite coefficient for x^{} y^{}",
                t.i, t.j
            )));
        }
        Ok(Poly2::from_terms(
            repr.terms.into_iter().map(|t| (t.i, t.j, t.c)),
        ))
    }
}

/// Planar polynomial vector field `ẋ = P(x, y)`, `ẏ = Q(x, y)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VectorField2 {
    pub p: Poly2,
    pub q: Poly2,
}

impl VectorField2 {
    /// Rejects the identically zero field.
    pub fn new(p: Poly2, q: Poly2) -> Result<Self> {
        if p.is_zero() && q.is_zero() {
            return Err(Error::ContractViolation(
                "vector field with both components zero".into(),
            ));
        }
        Ok(Self { p, q })
    }

    pub fn degree(&self) -> i32 {
        self.p.degree().max(self.q.degree())
    }

    pub fn eval(&self, x: f64, y: f64) -> [f64; 2] {
        [self.p.eval(x, y), self.q.eval(x, y)]
    }

    pub fn jacobian(&self) -> Jacobian {
        Jacobian {
            dp_dx: self.p.deriv_x(),
            dp_dy: self.p.deriv_y(),
            dq_dx: self.q.deriv_x(),
            dq_dy: self.q.deriv_y(),
        }
    }

    /// Divergence `∂P/∂x + ∂Q/∂y`.
    pub fn divergence(&self) -> Poly2 {
        &self.p.deriv_x() + &self.q.deriv_y()
    }

    /// The same phase curves traversed backwards in time.
    pub fn reversed(&self) -> Self {
        Self {
            p: -&self.p,
            q: -&self.q,
        }
    }

    /// Total derivative of `h` along the field, `h_x P + h_y Q`.
    pub fn lie_derivative(&self, h: &Poly2) -> Poly2 {
        &(&h.deriv_x() * &self.p) + &(&h.deriv_y() * &self.q)
    }
}

impl<'de> Deserialize<'de> for VectorField2 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            p: Poly2,
            q: Poly2,
        }
        let r = Repr::deserialize(deserializer)?;
        VectorField2::new(r.p, r.q).map_err(D::Error::custom)
    }
}

/// Formal Jacobian of a vector field.
#[derive(Clone, Debug, PartialEq)]
pub struct Jacobian {
    pub dp_dx: Poly2,
    pub dp_dy: Poly2,
    pub dq_dx: Poly2,
    pub dq_dy: Poly2,
}

impl Jacobian {
    pub fn eval(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        [
            [self.dp_dx.eval(x, y), self.dp_dy.eval(x, y)],
            [self.dq_dx.eval(x, y), self.dq_dy.eval(x, y)],
        ]
    }

    pub fn rows(&self) -> [[&Poly2; 2]; 2] {
        [[&self.dp_dx, &self.dp_dy], [&self.dq_dx, &self.dq_dy]]
    }
}

/// Univariate power series truncated at order `K`: coefficients `a_0..=a_K`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerSeries1 {
    coeffs: Vec<f64>,
}

impl PowerSeries1 {
    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![0.0; order + 1],
        }
    }

    /// Series from explicit coefficients; the order is `coeffs.len() - 1`.
    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a power series needs at least a_0");
        Self { coeffs }
    }

    pub fn monomial(order: usize, k: usize, c: f64) -> Self {
        let mut s = Self::zero(order);
        if k <= order {
            s.coeffs[k] = c;
        }
        s
    }

    pub fn truncation_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn add(&self, other: &Self) -> Self {
        let k = self.truncation_order().min(other.truncation_order());
        Self {
            coeffs: (0..=k).map(|i| self.coeffs[i] + other.coeffs[i]).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Cauchy product, terms above the common order discarded.
    pub fn mul(&self, other: &Self) -> Self {
        let k = self.truncation_order().min(other.truncation_order());
        let mut out = vec![0.0; k + 1];
        for (i, &a) in self.coeffs.iter().enumerate().take(k + 1) {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate().take(k + 1 - i) {
                out[i + j] += a * b;
            }
        }
        Self { coeffs: out }
    }

    /// First coefficient with magnitude above `tau`, as `(coefficient, exponent)`;
    /// `None` when the series is identically zero through its order.
    pub fn leading_term(&self, tau: f64) -> Option<(f64, usize)> {
        self.coeffs
            .iter()
            .enumerate()
            .find(|(_, c)| c.abs() > tau)
            .map(|(k, &c)| (c, k))
    }
}

/// `B(x, f(x))` truncated at the order of `f`.
pub fn compose_series(b: &Poly2, f: &PowerSeries1) -> PowerSeries1 {
    let order = f.truncation_order();
    let mut f_pows = vec![PowerSeries1::monomial(order, 0, 1.0)];
    for k in 1..=b.degree_in_y() as usize {
        let next = f_pows[k - 1].mul(f);
        f_pows.push(next);
    }
    let mut out = PowerSeries1::zero(order);
    for (i, j, c) in b.terms() {
        let i = i as usize;
        if i > order {
            continue;
        }
        let fj = &f_pows[j as usize];
        for k in 0..=(order - i) {
            out.coeffs[i + k] += c * fj.coeffs[k];
        }
    }
    out
}

/// Solves `y + A(x, y) = 0` for `y = f(x)` with `f(0) = f'(0) = 0`, exact
/// through order `K`.
///
/// Fixed-point iteration `f ← −A(x, f)` from `f = 0`; since `A` starts at
/// degree two each pass fixes at least one more coefficient, so `K` passes
/// suffice.
pub fn series_solve_implicit(a: &Poly2, order: usize) -> Result<PowerSeries1> {
    if let Some((i, j, c)) = a.terms().find(|&(i, j, _)| i + j <= 1) {
        return Err(Error::ContractViolation(format!(
            "implicit solve needs A without constant or linear part; found {c} x^{i} y^{j}"
        )));
    }
    let mut f = PowerSeries1::zero(order);
    for _ in 0..order {
        f = compose_series(a, &f).scale(-1.0);
    }
    Ok(f)
}
