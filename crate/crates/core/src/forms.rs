//! Biquadratic forms and the doubly simple form attached to a graph.
//!
//! A biquadratic form is stored by monomial: the key of `x_i x_k y_j y_l` is
//! the pair of sorted row indices and the pair of sorted column indices, and
//! the stored value is the coefficient of that monomial in the expanded
//! polynomial. The symmetric tensor `a_{ijkl}` with `a_{ijkl} = a_{kjil} =
//! a_{klij}` is recovered by spreading each coefficient evenly over its
//! index orbit, see [`BiquadraticForm::tensor_entry`].

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::grid::{BiGraph, Cell};
use crate::scalar::{convert_coefficient, Coefficient, Real};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormError {
    #[error("index ({i},{j},{k},{l}) outside the {m}x{n} form")]
    Range {
        i: usize,
        j: usize,
        k: usize,
        l: usize,
        m: usize,
        n: usize,
    },
    #[error("point has dimensions {got_x}x{got_y}, form expects {m}x{n}")]
    Dimension {
        got_x: usize,
        got_y: usize,
        m: usize,
        n: usize,
    },
    #[error("point has a non-finite coordinate")]
    NonFinite,
}

/// The monomial `x_{rows.0} x_{rows.1} y_{cols.0} y_{cols.1}`, indices sorted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MonomialKey {
    rows: (u8, u8),
    cols: (u8, u8),
}

impl MonomialKey {
    pub fn new(i: usize, j: usize, k: usize, l: usize) -> Self {
        let (i, k) = if i <= k { (i, k) } else { (k, i) };
        let (j, l) = if j <= l { (j, l) } else { (l, j) };
        MonomialKey {
            rows: (i as u8, k as u8),
            cols: (j as u8, l as u8),
        }
    }

    /// Product of the bilinear monomials `x_a.row y_a.col` and `x_b.row y_b.col`.
    pub fn of_cells(a: Cell, b: Cell) -> Self {
        MonomialKey::new(a.row(), a.col(), b.row(), b.col())
    }

    pub fn rows(&self) -> (usize, usize) {
        (self.rows.0 as usize, self.rows.1 as usize)
    }

    pub fn cols(&self) -> (usize, usize) {
        (self.cols.0 as usize, self.cols.1 as usize)
    }

    /// `x_i^2 y_j^2`.
    pub fn is_pure(&self) -> bool {
        self.rows.0 == self.rows.1 && self.cols.0 == self.cols.1
    }

    /// Number of index quadruples `(i,j,k,l)` naming this monomial.
    pub fn orbit_size(&self) -> usize {
        let r = if self.rows.0 == self.rows.1 { 1 } else { 2 };
        let c = if self.cols.0 == self.cols.1 { 1 } else { 2 };
        r * c
    }

    fn sort_key(&self) -> (bool, u8, u8, u8, u8) {
        // pure terms first, by (i,j); then everything else
        (!self.is_pure(), self.rows.0, self.cols.0, self.rows.1, self.cols.1)
    }

    fn render(&self) -> String {
        let (i, k) = self.rows();
        let (j, l) = self.cols();
        let x = if i == k {
            format!("x{i}^2")
        } else {
            format!("x{i}*x{k}")
        };
        let y = if j == l {
            format!("y{j}^2")
        } else {
            format!("y{j}*y{l}")
        };
        format!("{x}*{y}")
    }
}

/// A point `(x, y) ∈ R^m × R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point<F> {
    pub x: Vec<F>,
    pub y: Vec<F>,
}

impl<F: Real> Point<F> {
    pub fn new(x: Vec<F>, y: Vec<F>) -> Result<Self, FormError> {
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(FormError::NonFinite);
        }
        Ok(Point { x, y })
    }

    /// The bilinear monomials `x_i y_j` in row-major cell order.
    pub fn bilinear_monomials(&self) -> Vec<F> {
        self.x
            .iter()
            .flat_map(|&xi| self.y.iter().map(move |&yj| xi * yj))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiquadraticForm<C> {
    m: usize,
    n: usize,
    coeffs: BTreeMap<MonomialKey, C>,
}

#[derive(Serialize)]
struct FormJson {
    terms: Vec<TermJson>,
}

#[derive(Serialize)]
struct TermJson {
    i: usize,
    j: usize,
    k: usize,
    l: usize,
    c: serde_json::Value,
}

impl<C: Coefficient> BiquadraticForm<C> {
    pub fn zero(m: usize, n: usize) -> Self {
        BiquadraticForm {
            m,
            n,
            coeffs: BTreeMap::new(),
        }
    }

    /// The doubly simple form
    /// `Σ_{E1} x_i² y_j² + Σ_{E2} (x_i y_j + x_k y_l)²`.
    pub fn from_graph(g: &BiGraph) -> Self {
        let mut f = BiquadraticForm::zero(g.m(), g.n());
        for c in g.e1() {
            f.add_bilinear_square(&[(c, C::one())]);
        }
        for e in g.e2() {
            f.add_bilinear_square(&[(e.first(), C::one()), (e.second(), C::one())]);
        }
        f
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Adds `(Σ w_t x_{c_t.row} y_{c_t.col})²`.
    pub fn add_bilinear_square(&mut self, terms: &[(Cell, C)]) {
        for &(a, wa) in terms {
            for &(b, wb) in terms {
                self.add_term(MonomialKey::of_cells(a, b), wa * wb);
            }
        }
    }

    pub fn add_term(&mut self, key: MonomialKey, c: C) {
        let entry = self.coeffs.entry(key).or_insert_with(C::zero);
        *entry = *entry + c;
        if entry.is_zero() {
            self.coeffs.remove(&key);
        }
    }

    fn check_range(&self, i: usize, j: usize, k: usize, l: usize) -> Result<(), FormError> {
        let ok = |r: usize, lim: usize| r >= 1 && r <= lim;
        if ok(i, self.m) && ok(k, self.m) && ok(j, self.n) && ok(l, self.n) {
            Ok(())
        } else {
            Err(FormError::Range {
                i,
                j,
                k,
                l,
                m: self.m,
                n: self.n,
            })
        }
    }

    /// Coefficient of the monomial `x_i x_k y_j y_l` in the expanded form.
    /// Invariant under `(i,j,k,l) → (k,j,i,l), (k,l,i,j), (i,l,k,j)`.
    pub fn coefficient(&self, i: usize, j: usize, k: usize, l: usize) -> Result<C, FormError> {
        self.check_range(i, j, k, l)?;
        Ok(self
            .coeffs
            .get(&MonomialKey::new(i, j, k, l))
            .copied()
            .unwrap_or_else(C::zero))
    }

    /// Symmetric tensor entry `a_{ijkl}` for `P = Σ_{i,k,j,l} a_{ijkl} x_i x_k y_j y_l`
    /// summed over all ordered quadruples.
    pub fn tensor_entry<R: Coefficient>(&self, i: usize, j: usize, k: usize, l: usize) -> Result<R, FormError> {
        let key = MonomialKey::new(i, j, k, l);
        let c: R = convert_coefficient(self.coefficient(i, j, k, l)?).expect("coefficient converts");
        Ok(c / R::from_usize_exact(key.orbit_size()))
    }

    /// Nonzero terms: pure terms by `(i,j)`, then cross terms.
    pub fn terms(&self) -> Vec<(MonomialKey, C)> {
        let mut v: Vec<(MonomialKey, C)> = self.coeffs.iter().map(|(k, c)| (*k, *c)).collect();
        v.sort_by_key(|(k, _)| k.sort_key());
        v
    }

    pub fn term_count(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn check_point<F: Real>(&self, p: &Point<F>) -> Result<(), FormError> {
        if p.x.len() != self.m || p.y.len() != self.n {
            return Err(FormError::Dimension {
                got_x: p.x.len(),
                got_y: p.y.len(),
                m: self.m,
                n: self.n,
            });
        }
        Ok(())
    }

    /// Value at `p`, summing monomials.
    pub fn evaluate<F: Real>(&self, p: &Point<F>) -> Result<F, FormError> {
        self.check_point(p)?;
        let mut acc = F::zero();
        for (key, c) in &self.coeffs {
            let (i, k) = key.rows();
            let (j, l) = key.cols();
            let c: F = convert_coefficient(*c).expect("coefficient converts to float");
            acc += c * p.x[i - 1] * p.x[k - 1] * p.y[j - 1] * p.y[l - 1];
        }
        Ok(acc)
    }

    /// Value at `p` from the full symmetric tensor, summing over all
    /// `m²n²` quadruples.
    pub fn evaluate_tensor<F: Real>(&self, p: &Point<F>) -> Result<F, FormError> {
        self.check_point(p)?;
        let mut acc = F::zero();
        for i in 1..=self.m {
            for k in 1..=self.m {
                for j in 1..=self.n {
                    for l in 1..=self.n {
                        let a: F = self.tensor_entry(i, j, k, l)?;
                        acc += a * p.x[i - 1] * p.x[k - 1] * p.y[j - 1] * p.y[l - 1];
                    }
                }
            }
        }
        Ok(acc)
    }

    /// Human-readable expanded polynomial, e.g. `x1^2*y1^2 + 2*x1*x4*y2*y3`.
    pub fn to_text(&self) -> String {
        let terms = self.terms();
        if terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, (key, c)) in terms.iter().enumerate() {
            let neg = *c < C::zero();
            let mag = if neg { C::zero() - *c } else { *c };
            if idx == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if mag != C::one() {
                let _ = write!(out, "{mag}*");
            }
            out.push_str(&key.render());
        }
        out
    }

    /// `{"terms":[{"i":..,"j":..,"k":..,"l":..,"c":..},...]}` where `c` is the
    /// monomial coefficient of `x_i x_k y_j y_l`, in [`Self::terms`] order.
    pub fn to_json(&self) -> String {
        let terms: Vec<TermJson> = self
            .terms()
            .into_iter()
            .map(|(key, c)| {
                let (i, k) = key.rows();
                let (j, l) = key.cols();
                let c = if c.is_integral() {
                    serde_json::Value::from(c.to_i64().expect("integral coefficient"))
                } else {
                    serde_json::Value::from(c.to_f64().unwrap_or(f64::NAN))
                };
                TermJson { i, j, k, l, c }
            })
            .collect();
        serde_json::to_string(&FormJson { terms }).expect("form serializes")
    }
}

/// Shorthand for [`BiquadraticForm::from_graph`].
pub fn build_form<C: Coefficient>(g: &BiGraph) -> BiquadraticForm<C> {
    BiquadraticForm::from_graph(g)
}

/// `P_G(p)` straight from the defining squares, without expanding.
pub fn sum_of_squares_value<F: Real>(g: &BiGraph, p: &Point<F>) -> F {
    let b = |c: Cell| p.x[c.row() - 1] * p.y[c.col() - 1];
    let mut acc = F::zero();
    for c in g.e1() {
        let v = b(c);
        acc += v * v;
    }
    for e in g.e2() {
        let v = b(e.first()) + b(e.second());
        acc += v * v;
    }
    acc
}
