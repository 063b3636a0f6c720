//! Gram matrices over the bilinear monomial basis `b = (x_i y_j)` in
//! row-major cell order, so that `P(x,y) = bᵀ G b`.

use nalgebra::DMatrix;
use num_rational::Ratio;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::forms::{BiquadraticForm, MonomialKey, Point};
use crate::grid::{BiGraph, Cell};
use crate::scalar::{convert_coefficient, Coefficient, Real};

mod probe;

pub use probe::{probe_graph, probe_spectrahedron, probe_with_center, ProbeOptions, ProbeRecord, ProbeReport};

/// Relative eigenvalue tolerance for PSD and rank verdicts.
pub const DEFAULT_EIG_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GramError {
    #[error("dimension mismatch: Gram matrix is {got}x{got}, expected {want}x{want}")]
    Dimension { got: usize, want: usize },
    #[error("form is {fm}x{fn_}, Gram matrix is for {gm}x{gn}")]
    FormShape {
        fm: usize,
        fn_: usize,
        gm: usize,
        gn: usize,
    },
    #[error("matrix is not symmetric at ({row},{col})")]
    NonSymmetric { row: usize, col: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix<T: Coefficient> {
    m: usize,
    n: usize,
    entries: DMatrix<T>,
}

#[derive(Serialize)]
struct GramJson {
    m: usize,
    n: usize,
    dim: usize,
    entries: Vec<f64>,
}

impl<T: Coefficient> GramMatrix<T> {
    pub fn zeros(m: usize, n: usize) -> Self {
        GramMatrix {
            m,
            n,
            entries: DMatrix::from_element(m * n, m * n, T::zero()),
        }
    }

    pub fn from_matrix(m: usize, n: usize, entries: DMatrix<T>) -> Result<Self, GramError> {
        let want = m * n;
        if entries.nrows() != want || entries.ncols() != want {
            return Err(GramError::Dimension {
                got: entries.nrows().max(entries.ncols()),
                want,
            });
        }
        Ok(GramMatrix { m, n, entries })
    }

    /// `G0 = Σ_{E1} u_c u_cᵀ + Σ_{E2} (u_a + u_b)(u_a + u_b)ᵀ`.
    pub fn canonical(g: &BiGraph) -> Self {
        let mut gm = GramMatrix::zeros(g.m(), g.n());
        for c in g.e1() {
            gm.add_outer(&[c]);
        }
        for e in g.e2() {
            gm.add_outer(&e.halves());
        }
        gm
    }

    fn add_outer(&mut self, cells: &[Cell]) {
        for &a in cells {
            for &b in cells {
                let (ia, ib) = (self.index(a), self.index(b));
                self.entries[(ia, ib)] = self.entries[(ia, ib)] + T::one();
            }
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.m * self.n
    }

    pub fn index(&self, c: Cell) -> usize {
        (c.row() - 1) * self.n + (c.col() - 1)
    }

    pub fn cell(&self, idx: usize) -> Cell {
        Cell::new(idx / self.n + 1, idx % self.n + 1)
    }

    pub fn entries(&self) -> &DMatrix<T> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<T> {
        self.entries
    }

    pub fn get(&self, a: Cell, b: Cell) -> T {
        self.entries[(self.index(a), self.index(b))]
    }

    pub fn set(&mut self, a: Cell, b: Cell, v: T) {
        let (ia, ib) = (self.index(a), self.index(b));
        self.entries[(ia, ib)] = v;
    }

    /// First asymmetric position, if any (exact comparison).
    pub fn asymmetry(&self) -> Option<(usize, usize)> {
        let d = self.dim();
        (0..d)
            .flat_map(|r| (r + 1..d).map(move |c| (r, c)))
            .find(|&(r, c)| self.entries[(r, c)] != self.entries[(c, r)])
    }

    pub fn is_symmetric(&self) -> bool {
        self.asymmetry().is_none()
    }

    /// The form `bᵀ G b`, expanded exactly in `T`.
    pub fn induced_form(&self) -> BiquadraticForm<T> {
        let mut f = BiquadraticForm::zero(self.m, self.n);
        let d = self.dim();
        for a in 0..d {
            for b in 0..d {
                let v = self.entries[(a, b)];
                if !v.is_zero() {
                    f.add_term(MonomialKey::of_cells(self.cell(a), self.cell(b)), v);
                }
            }
        }
        f
    }

    /// `b(p)ᵀ G b(p)`.
    pub fn quadratic_value<F: Real>(&self, p: &Point<F>) -> F {
        let b = p.bilinear_monomials();
        let mut acc = F::zero();
        for (a, &ba) in b.iter().enumerate() {
            if ba.is_zero() {
                continue;
            }
            let mut row = F::zero();
            for (c, &bc) in b.iter().enumerate() {
                let v: F = convert_coefficient(self.entries[(a, c)]).expect("entry converts to float");
                row += v * bc;
            }
            acc += ba * row;
        }
        acc
    }

    pub fn convert<U: Coefficient>(&self) -> Option<GramMatrix<U>> {
        let d = self.dim();
        let mut out = DMatrix::from_element(d, d, U::zero());
        for r in 0..d {
            for c in 0..d {
                out[(r, c)] = convert_coefficient(self.entries[(r, c)])?;
            }
        }
        Some(GramMatrix {
            m: self.m,
            n: self.n,
            entries: out,
        })
    }

    pub fn is_integral(&self) -> bool {
        self.entries.iter().all(|v| v.is_integral())
    }

    /// `{"m":..,"n":..,"dim":..,"entries":[row-major]}`.
    pub fn to_json(&self) -> String {
        let d = self.dim();
        let entries = (0..d)
            .flat_map(|r| (0..d).map(move |c| (r, c)))
            .map(|rc| self.entries[rc].to_f64().unwrap_or(f64::NAN))
            .collect();
        serde_json::to_string(&GramJson {
            m: self.m,
            n: self.n,
            dim: d,
            entries,
        })
        .expect("gram serializes")
    }

    /// Rank over the rationals, by Gaussian elimination on exact values.
    /// `None` when some entry has no exact rational value.
    pub fn exact_rank(&self) -> Option<usize> {
        let d = self.dim();
        let mut rows: Vec<Vec<Ratio<i128>>> = Vec::with_capacity(d);
        for r in 0..d {
            let mut row = Vec::with_capacity(d);
            for c in 0..d {
                row.push(to_exact(self.entries[(r, c)])?);
            }
            rows.push(row);
        }
        let mut rank = 0;
        for col in 0..d {
            let Some(piv) = (rank..d).find(|&r| !rows[r][col].is_zero()) else {
                continue;
            };
            rows.swap(rank, piv);
            let pivot_row = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && !row[col].is_zero() {
                    let f = row[col] / pivot_row[col];
                    for (v, &pv) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                        *v -= f * pv;
                    }
                }
            }
            rank += 1;
        }
        Some(rank)
    }
}

fn to_exact<T: Coefficient>(v: T) -> Option<Ratio<i128>> {
    if v.is_integral() {
        return v.to_i128().map(Ratio::from_integer);
    }
    // Ratio entries print as "p/q"; floats are only accepted when integral
    let s = v.to_string();
    let (p, q) = s.split_once('/')?;
    Some(Ratio::new(p.trim().parse().ok()?, q.trim().parse().ok()?))
}

/// Shorthand for [`GramMatrix::canonical`].
pub fn canonical_gram<T: Coefficient>(g: &BiGraph) -> GramMatrix<T> {
    GramMatrix::canonical(g)
}

/// Whether `bᵀ G b` equals `f` at `samples` seeded random points within
/// `tol·(1+|value|)`, and coefficient by coefficient (exactly when both
/// sides are integral, within `tol` otherwise).
pub fn gram_matches_form<T: Coefficient, C: Coefficient>(
    gm: &GramMatrix<T>,
    f: &BiquadraticForm<C>,
    samples: usize,
    tol: f64,
) -> Result<bool, GramError> {
    gram_matches_form_seeded(gm, f, samples, tol, 0)
}

pub fn gram_matches_form_seeded<T: Coefficient, C: Coefficient>(
    gm: &GramMatrix<T>,
    f: &BiquadraticForm<C>,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<bool, GramError> {
    if gm.m != f.m() || gm.n != f.n() {
        return Err(GramError::FormShape {
            fm: f.m(),
            fn_: f.n(),
            gm: gm.m,
            gn: gm.n,
        });
    }
    let induced = gm.induced_form();
    let exact = gm.is_integral() && f.terms().iter().all(|(_, c)| c.is_integral());
    let mut keys: Vec<MonomialKey> = induced.terms().into_iter().map(|(k, _)| k).collect();
    keys.extend(f.terms().into_iter().map(|(k, _)| k));
    for key in keys {
        let (i, k) = key.rows();
        let (j, l) = key.cols();
        let a = induced.coefficient(i, j, k, l).expect("in range");
        let b = f.coefficient(i, j, k, l).expect("in range");
        if exact {
            if a.to_i128() != b.to_i128() {
                return Ok(false);
            }
        } else {
            let (a, b) = (a.to_f64().unwrap_or(f64::NAN), b.to_f64().unwrap_or(f64::NAN));
            if (a - b).abs() > tol * (1.0 + b.abs()) || a.is_nan() || b.is_nan() {
                return Ok(false);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let p = random_point::<f64, _>(&mut rng, f.m(), f.n());
        let lhs = gm.quadratic_value(&p);
        let rhs = f.evaluate(&p).expect("shape checked");
        if (lhs - rhs).abs() > tol * (1.0 + rhs.abs()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Uniform point in `[-1,1]^m × [-1,1]^n`.
pub fn random_point<F: Real, R: Rng>(rng: &mut R, m: usize, n: usize) -> Point<F> {
    let mut coord = || F::from_f64_lossy(rng.random_range(-1.0..=1.0));
    let x = (0..m).map(|_| coord()).collect();
    let y = (0..n).map(|_| coord()).collect();
    Point { x, y }
}

/// Sorted eigenvalues of a symmetric matrix.
pub fn eigenvalues<T: Real>(gm: &GramMatrix<T>) -> Result<Vec<T>, GramError> {
    check_symmetric(gm)?;
    let mut ev: Vec<T> = gm.entries.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(ev)
}

fn check_symmetric<T: Real>(gm: &GramMatrix<T>) -> Result<(), GramError> {
    let scale = gm.entries.iter().fold(T::one(), |acc, v| acc.max(v.abs()));
    let tol = T::default_epsilon() * T::from_f64_lossy(64.0) * scale;
    let d = gm.dim();
    for r in 0..d {
        for c in r + 1..d {
            if (gm.entries[(r, c)] - gm.entries[(c, r)]).abs() > tol {
                return Err(GramError::NonSymmetric { row: r, col: c });
            }
        }
    }
    Ok(())
}

/// Numerical rank and minimum eigenvalue. An eigenvalue counts towards the
/// rank when it exceeds `eig_tol·max(1, |λ|_max)`; the matrix is PSD when
/// `min_eig ≥ -eig_tol`.
pub fn psd_rank<T: Real>(gm: &GramMatrix<T>, eig_tol: T) -> Result<(usize, T), GramError> {
    let ev = eigenvalues(gm)?;
    Ok(rank_of_spectrum(&ev, eig_tol))
}

pub(crate) fn rank_of_spectrum<T: Real>(ev: &[T], eig_tol: T) -> (usize, T) {
    let min = ev.first().copied().unwrap_or_else(T::zero);
    let lmax = ev.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    let cut = eig_tol * lmax.max(T::one());
    (ev.iter().filter(|&&v| v > cut).count(), min)
}

pub fn is_psd<T: Real>(gm: &GramMatrix<T>, eig_tol: T) -> Result<bool, GramError> {
    Ok(psd_rank(gm, eig_tol)?.1 >= -eig_tol)
}

/// A factor `L` with `G = L Lᵀ` from pivoted semidefinite Cholesky; the
/// columns of `L` are the coefficient vectors of bilinear forms whose squares
/// sum to `bᵀ G b`. Pivots at or below `tol` end the factorization.
pub fn semidefinite_factor<T: Real>(gm: &GramMatrix<T>, tol: T) -> Result<Vec<Vec<T>>, GramError> {
    check_symmetric(gm)?;
    let d = gm.dim();
    let mut a = gm.entries.clone();
    let mut cols: Vec<Vec<T>> = Vec::new();
    let mut used = vec![false; d];
    loop {
        let piv = (0..d)
            .filter(|&i| !used[i])
            .max_by(|&x, &y| a[(x, x)].partial_cmp(&a[(y, y)]).expect("finite pivots"));
        let Some(p) = piv else { break };
        let pv = a[(p, p)];
        if pv <= tol {
            break;
        }
        used[p] = true;
        let s = pv.sqrt();
        let col: Vec<T> = (0..d)
            .map(|i| if used[i] && i != p { T::zero() } else { a[(i, p)] / s })
            .collect();
        for i in 0..d {
            for j in 0..d {
                let delta = col[i] * col[j];
                a[(i, j)] -= delta;
            }
        }
        cols.push(col);
    }
    Ok(cols)
}

/// Renders factor columns as bilinear forms, e.g. `x1*y1 + x2*y3`.
pub fn factor_text<T: Real>(gm: &GramMatrix<T>, cols: &[Vec<T>], tol: T) -> Vec<String> {
    cols.iter()
        .map(|col| {
            let mut parts = Vec::new();
            for (idx, &v) in col.iter().enumerate() {
                if v.abs() <= tol {
                    continue;
                }
                let c = gm.cell(idx);
                let mono = format!("x{}*y{}", c.row(), c.col());
                let one = (v.abs() - T::one()).abs() <= tol;
                let mag = if one { mono } else { format!("{}*{}", v.abs(), mono) };
                let sign = if v < T::zero() { "-" } else { "+" };
                parts.push((sign, mag));
            }
            let mut s = String::new();
            for (i, (sign, mag)) in parts.into_iter().enumerate() {
                match (i, sign) {
                    (0, "+") => {}
                    (0, _) => s.push('-'),
                    (_, sign) => {
                        s.push(' ');
                        s.push_str(sign);
                        s.push(' ');
                    }
                }
                s.push_str(&mag);
            }
            s
        })
        .collect()
}

pub(crate) fn frobenius_distance<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    (a - b).norm()
}
