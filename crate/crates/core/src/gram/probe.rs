//! Numerical probing of the Gram spectrahedron
//! `{G ⪰ 0 : bᵀ G b = f}` by alternating projections.
//!
//! The affine constraint groups Gram entries into orbits, one per monomial:
//! entry `(a,b)` feeds the monomial `x_{a.row} x_{b.row} y_{a.col} y_{b.col}`.
//! Projecting onto `{Σ_orbit G = coefficient}` shifts every entry of an
//! orbit by the same amount. Results are evidence, not proof: a sampled
//! minimum rank only bounds the true minimum from above.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{frobenius_distance, random_point, rank_of_spectrum, GramMatrix};
use crate::admissibility::is_admissible;
use crate::forms::{BiquadraticForm, MonomialKey};
use crate::grid::BiGraph;
use crate::scalar::{convert_coefficient, Coefficient, Real};

/// Noise scales for random starts, cycled by probe index.
pub const START_SCALES: [f64; 3] = [0.1, 1.0, 10.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptions {
    pub n_probes: usize,
    pub max_iter: usize,
    /// Convergence threshold on the largest coefficient residual.
    pub tol: f64,
    pub seed: u64,
    /// Relative eigenvalue cutoff for the numerical rank of converged iterates.
    pub rank_tol: f64,
    /// Dykstra's corrected projections instead of plain alternation.
    pub dykstra: bool,
    /// Project inside the reduced face (see [`ProbeReport::face_rank`]).
    /// Without it the iteration runs on full matrices, where no feasible
    /// point is strictly positive definite and convergence is sublinear.
    pub facial_reduction: bool,
    pub threads: usize,
    /// Fresh random points used to re-check each converged iterate.
    pub check_points: usize,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            n_probes: 100,
            max_iter: 20_000,
            tol: 1e-7,
            seed: 0,
            rank_tol: 1e-6,
            dykstra: false,
            facial_reduction: true,
            threads: 1,
            check_points: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRecord {
    pub index: usize,
    pub seed: u64,
    /// ChaCha stream of the probe's generator; together with `seed` it
    /// reproduces the start.
    pub stream: u64,
    pub scale: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Largest coefficient residual of the final iterate.
    pub residual: f64,
    pub min_eig: f64,
    pub rank: Option<usize>,
    pub distance_to_canonical: f64,
    /// Largest relative mismatch `|bᵀMb - f|/(1+|f|)` at fresh points.
    pub sample_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub evidence: &'static str,
    pub m: usize,
    pub n: usize,
    pub n_probes: usize,
    pub n_converged: usize,
    pub min_rank_found: Option<usize>,
    pub max_distance_to_canonical: Option<f64>,
    pub tolerance: f64,
    pub rank_tol: f64,
    /// The rank every feasible Gram matrix must reach, when known.
    pub expected_rank: Option<usize>,
    /// Size of the reduced face: every feasible Gram matrix has rank at most this.
    pub face_rank: usize,
    /// Dimension of the affine constraint set inside the face; 0 means the
    /// spectrahedron is at most a single point.
    pub free_parameters: usize,
    /// Converged probes whose rank fell below `expected_rank`.
    pub red_flags: Vec<usize>,
    pub records: Vec<ProbeRecord>,
}

impl ProbeReport {
    pub fn red_flag(&self) -> bool {
        !self.red_flags.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

struct Orbits<T> {
    groups: Vec<(T, Vec<(usize, usize)>)>,
}

impl<T: Real> Orbits<T> {
    fn new<C: Coefficient>(f: &BiquadraticForm<C>) -> Self {
        let probe = GramMatrix::<T>::zeros(f.m(), f.n());
        let d = probe.dim();
        let mut map: BTreeMap<MonomialKey, Vec<(usize, usize)>> = BTreeMap::new();
        for a in 0..d {
            for b in 0..d {
                let key = MonomialKey::of_cells(probe.cell(a), probe.cell(b));
                map.entry(key).or_default().push((a, b));
            }
        }
        let groups = map
            .into_iter()
            .map(|(key, cells)| {
                let (i, k) = key.rows();
                let (j, l) = key.cols();
                let c = f.coefficient(i, j, k, l).expect("orbit in range");
                (convert_coefficient(c).expect("coefficient converts"), cells)
            })
            .collect();
        Orbits { groups }
    }

    /// Shifts each orbit uniformly onto its target sum: the least-squares
    /// projection onto the affine constraints.
    fn project(&self, x: &mut DMatrix<T>) {
        for (target, cells) in &self.groups {
            let s = cells.iter().fold(T::zero(), |acc, &rc| acc + x[rc]);
            let delta = (*target - s) / T::from_usize_exact(cells.len());
            for &rc in cells {
                x[rc] += delta;
            }
        }
    }

    fn residual(&self, x: &DMatrix<T>) -> T {
        self.groups.iter().fold(T::zero(), |acc, (target, cells)| {
            let s = cells.iter().fold(T::zero(), |a, &rc| a + x[rc]);
            acc.max((s - *target).abs())
        })
    }
}

/// The face of the PSD cone that every feasible Gram matrix lies in, found
/// from constraints that pin entries outright:
///
/// * a diagonal entry pinned to 0 forces its whole row and column to 0;
/// * a fully pinned, singular 2×2 principal block `[[d_a, g], [g, d_b]]`
///   forces `G (g e_a - d_a e_b) = 0`.
///
/// Feasible matrices are `X = V Y Vᵀ` with `V` orthonormal, `Y ⪰ 0` of size
/// `r`, and the affine constraints become linear in `Y`. Working in `Y`
/// restores a strictly feasible point in the cases that matter here, which
/// plain alternating projections need for linear convergence.
struct Face<T: Real> {
    dim: usize,
    keep: Vec<usize>,
    v: DMatrix<T>,
    /// Constraint rows `vec(Vᵀ E_o V)`, one per orbit.
    a: DMatrix<T>,
    /// `Aᵀ (A Aᵀ)⁺`.
    a_pinv: DMatrix<T>,
    targets: DVector<T>,
}

impl<T: Real> Face<T> {
    fn new(orbits: &Orbits<T>, dim: usize) -> Self {
        let eps = T::from_f64_lossy(1e-12);
        let mut diag = vec![T::zero(); dim];
        for (target, cells) in &orbits.groups {
            if let [(a, b)] = cells.as_slice() {
                if a == b {
                    diag[*a] = *target;
                }
            }
        }
        let keep: Vec<usize> = (0..dim).filter(|&a| diag[a].abs() > eps).collect();
        let pos = |a: usize| keep.iter().position(|&k| k == a);
        let k = keep.len();

        let mut nulls: Vec<DVector<T>> = Vec::new();
        for (target, cells) in &orbits.groups {
            let inside: Vec<(usize, usize)> = cells
                .iter()
                .copied()
                .filter(|&(a, b)| a < b && pos(a).is_some() && pos(b).is_some())
                .collect();
            if inside.len() != 1 || cells.iter().any(|&(a, b)| a == b) {
                continue;
            }
            let (a, b) = inside[0];
            let g = *target / T::from_f64_lossy(2.0);
            let det = diag[a] * diag[b] - g * g;
            if det.abs() <= eps {
                let mut z = DVector::from_element(k, T::zero());
                z[pos(a).expect("kept")] = g;
                z[pos(b).expect("kept")] = -diag[a];
                nulls.push(z);
            }
        }

        let v = if nulls.is_empty() {
            DMatrix::identity(k, k)
        } else {
            let mut m = DMatrix::from_element(k, k, T::zero());
            for z in &nulls {
                let z = z.normalize();
                m += &z * z.transpose();
            }
            let eig = SymmetricEigen::new(m);
            let cols: Vec<DVector<T>> = (0..k)
                .filter(|&i| eig.eigenvalues[i].abs() <= T::default_epsilon().sqrt() * T::from_f64_lossy(10.0))
                .map(|i| eig.eigenvectors.column(i).into_owned())
                .collect();
            if cols.is_empty() {
                DMatrix::from_element(k, 0, T::zero())
            } else {
                DMatrix::from_columns(&cols)
            }
        };
        let r = v.ncols();

        let n_orb = orbits.groups.len();
        let mut a = DMatrix::from_element(n_orb, r * r, T::zero());
        let mut targets = DVector::from_element(n_orb, T::zero());
        for (o, (target, cells)) in orbits.groups.iter().enumerate() {
            targets[o] = *target;
            for &(x, y) in cells {
                let (Some(px), Some(py)) = (pos(x), pos(y)) else {
                    continue;
                };
                for i in 0..r {
                    for j in 0..r {
                        a[(o, i * r + j)] += v[(px, i)] * v[(py, j)];
                    }
                }
            }
        }
        let a_pinv = a.transpose() * symmetric_pinv(&a * a.transpose());
        Face {
            dim,
            keep,
            v,
            a,
            a_pinv,
            targets,
        }
    }

    fn rank(&self) -> usize {
        self.v.ncols()
    }

    fn free_parameters(&self) -> usize {
        let r = self.rank();
        if r == 0 {
            return 0;
        }
        let sv = self.a.singular_values();
        let top = sv.iter().fold(T::zero(), |acc, v| acc.max(*v));
        let cut = top * T::from_f64_lossy(1e-10);
        r * (r + 1) / 2 - sv.iter().filter(|&&v| v > cut).count()
    }

    /// Orthogonal projection of a full matrix onto the face's span.
    fn restrict(&self, x: &DMatrix<T>) -> DMatrix<T> {
        let k = self.keep.len();
        let sub = DMatrix::from_fn(k, k, |i, j| x[(self.keep[i], self.keep[j])]);
        self.v.transpose() * sub * &self.v
    }

    fn embed(&self, y: &DMatrix<T>) -> DMatrix<T> {
        let sub = &self.v * y * self.v.transpose();
        let mut x = DMatrix::from_element(self.dim, self.dim, T::zero());
        for (i, &a) in self.keep.iter().enumerate() {
            for (j, &b) in self.keep.iter().enumerate() {
                x[(a, b)] = sub[(i, j)];
            }
        }
        x
    }

    fn project_affine(&self, y: &mut DMatrix<T>) {
        let r = self.rank();
        if r == 0 {
            return;
        }
        let flat = DVector::from_iterator(r * r, (0..r).flat_map(|i| (0..r).map(move |j| (i, j))).map(|ij| y[ij]));
        let corr = &self.a_pinv * (&self.a * &flat - &self.targets);
        for i in 0..r {
            for j in 0..r {
                y[(i, j)] -= corr[i * r + j];
            }
        }
    }
}

/// Pseudo-inverse of a symmetric PSD matrix through its eigendecomposition
/// (more robust on rank-deficient input than an SVD-based inverse).
fn symmetric_pinv<T: Real>(m: DMatrix<T>) -> DMatrix<T> {
    if m.is_empty() {
        return m;
    }
    let eig = SymmetricEigen::new(m);
    let top = eig.eigenvalues.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    let cut = top * T::from_f64_lossy(1e-10);
    let inv = eig.eigenvalues.map(|v| if v > cut { T::one() / v } else { T::zero() });
    let q = &eig.eigenvectors;
    q * DMatrix::from_diagonal(&inv) * q.transpose()
}

fn project_psd<T: Real>(x: &DMatrix<T>) -> DMatrix<T> {
    if x.is_empty() {
        return x.clone();
    }
    let sym = (x + x.transpose()) * T::from_f64_lossy(0.5);
    let eig = SymmetricEigen::new(sym);
    let clipped = eig.eigenvalues.map(|v| v.max(T::zero()));
    let q = &eig.eigenvectors;
    q * DMatrix::from_diagonal(&clipped) * q.transpose()
}

fn symmetric_noise<T: Real>(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> DMatrix<T> {
    let mut m = DMatrix::from_element(d, d, T::zero());
    for r in 0..d {
        for c in r..d {
            let z: f64 = StandardNormal.sample(rng);
            let v = T::from_f64_lossy(z * scale);
            m[(r, c)] = v;
            m[(c, r)] = v;
        }
    }
    m
}

fn run_probe<T: Real, C: Coefficient>(
    f: &BiquadraticForm<C>,
    orbits: &Orbits<T>,
    face: &Face<T>,
    center: &DMatrix<T>,
    opts: &ProbeOptions,
    index: usize,
) -> ProbeRecord {
    let d = center.nrows();
    let stream = index as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(stream);
    let scale = START_SCALES[index % START_SCALES.len()];
    let start = center + symmetric_noise::<T>(&mut rng, d, scale);
    let tol = T::from_f64_lossy(opts.tol);

    // iterate on Y (face coordinates) or directly on X
    let reduced = opts.facial_reduction;
    let mut y = if reduced { face.restrict(&start) } else { start };
    let r = y.nrows();
    let zero = DMatrix::from_element(r, r, T::zero());
    let (mut p, mut q) = (zero.clone(), zero);
    let affine = |m: &mut DMatrix<T>| {
        if reduced {
            face.project_affine(m)
        } else {
            orbits.project(m)
        }
    };
    let lift = |m: &DMatrix<T>| if reduced { face.embed(m) } else { m.clone() };
    let mut x = lift(&y);
    let mut residual = orbits.residual(&x);
    let mut iterations = 0;
    while iterations < opts.max_iter && !(iterations > 0 && residual < tol) {
        iterations += 1;
        if opts.dykstra {
            let mut z = &y + &p;
            affine(&mut z);
            p = &y + &p - &z;
            let ny = project_psd(&(&z + &q));
            q = &z + &q - &ny;
            y = ny;
        } else {
            affine(&mut y);
            y = project_psd(&y);
        }
        x = lift(&y);
        residual = orbits.residual(&x);
    }
    let converged = residual < tol;

    let eigen = SymmetricEigen::new((&x + x.transpose()) * T::from_f64_lossy(0.5));
    let mut ev: Vec<T> = eigen.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    let (rank, min_eig) = rank_of_spectrum(&ev, T::from_f64_lossy(opts.rank_tol));

    let sample_error = converged.then(|| {
        let gm = GramMatrix::from_matrix(f.m(), f.n(), x.clone()).expect("square of the right size");
        (0..opts.check_points)
            .map(|_| {
                let pt = random_point::<T, _>(&mut rng, f.m(), f.n());
                let want = f.evaluate(&pt).expect("shape matches");
                ((gm.quadratic_value(&pt) - want).abs() / (T::one() + want.abs())).to_f64_lossy()
            })
            .fold(0.0, f64::max)
    });

    ProbeRecord {
        index,
        seed: opts.seed,
        stream,
        scale,
        iterations,
        converged,
        residual: residual.to_f64_lossy(),
        min_eig: min_eig.to_f64_lossy(),
        rank: converged.then_some(rank),
        distance_to_canonical: frobenius_distance(&x, center).to_f64_lossy(),
        sample_error,
    }
}

/// Probes around an explicit feasible (or merely reference) point.
pub fn probe_with_center<T: Real, C: Coefficient>(
    f: &BiquadraticForm<C>,
    center: &GramMatrix<T>,
    expected_rank: Option<usize>,
    opts: &ProbeOptions,
) -> ProbeReport {
    let orbits = Orbits::<T>::new(f);
    let face = Face::new(&orbits, center.dim());
    let next = AtomicUsize::new(0);
    let records = Mutex::new(Vec::with_capacity(opts.n_probes));
    let threads = opts.threads.clamp(1, opts.n_probes.max(1));
    std::thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= opts.n_probes {
                    break;
                }
                let rec = run_probe(f, &orbits, &face, center.entries(), opts, i);
                records.lock().expect("probe worker panicked").push(rec);
            });
        }
    });
    let mut records = records.into_inner().expect("probe worker panicked");
    records.sort_by_key(|r| r.index);

    let converged: Vec<&ProbeRecord> = records.iter().filter(|r| r.converged).collect();
    let min_rank_found = converged.iter().filter_map(|r| r.rank).min();
    let max_distance_to_canonical = converged.iter().map(|r| r.distance_to_canonical).reduce(f64::max);
    let red_flags = match expected_rank {
        Some(want) => converged
            .iter()
            .filter(|r| r.rank.is_some_and(|k| k < want))
            .map(|r| r.index)
            .collect(),
        None => Vec::new(),
    };
    ProbeReport {
        evidence: "numerical evidence",
        m: f.m(),
        n: f.n(),
        n_probes: opts.n_probes,
        n_converged: converged.len(),
        min_rank_found,
        max_distance_to_canonical,
        tolerance: opts.tol,
        rank_tol: opts.rank_tol,
        expected_rank,
        face_rank: face.rank(),
        free_parameters: face.free_parameters(),
        red_flags,
        records,
    }
}

/// Probes a form with no known Gram matrix: starts are drawn around the
/// least-norm point of the affine constraints within the reduced face.
pub fn probe_spectrahedron<T: Real, C: Coefficient>(f: &BiquadraticForm<C>, opts: &ProbeOptions) -> ProbeReport {
    let orbits = Orbits::<T>::new(f);
    let d = f.m() * f.n();
    let face = Face::new(&orbits, d);
    let mut y = DMatrix::from_element(face.rank(), face.rank(), T::zero());
    face.project_affine(&mut y);
    let center = face.embed(&y);
    let center = GramMatrix::from_matrix(f.m(), f.n(), center).expect("square of the right size");
    probe_with_center(f, &center, None, opts)
}

/// Probes `P_G` around its canonical Gram matrix. For admissible graphs any
/// converged iterate of rank below `|E1| + |E2|` is flagged.
pub fn probe_graph<T: Real>(g: &BiGraph, opts: &ProbeOptions) -> ProbeReport {
    let f: BiquadraticForm<i64> = BiquadraticForm::from_graph(g);
    let center = GramMatrix::<T>::canonical(g);
    let expected = is_admissible(g).is_admissible().then(|| g.total());
    probe_with_center(&f, &center, expected, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(n: usize) -> ProbeOptions {
        ProbeOptions {
            n_probes: n,
            ..ProbeOptions::default()
        }
    }

    #[test]
    fn zero_form_collapses_to_zero() {
        let g = BiGraph::new(2, 2).unwrap();
        let r = probe_graph::<f64>(&g, &quick(6));
        assert_eq!(r.n_converged, 6);
        assert_eq!(r.min_rank_found, Some(0));
        assert!(r.max_distance_to_canonical.unwrap() < 1e-6);
    }

    #[test]
    fn simple_diagonal_form_is_pinned() {
        let g = BiGraph::from_parts(2, 2, &[(1, 1), (2, 2)], &[]).unwrap();
        let r = probe_graph::<f64>(&g, &quick(9));
        assert_eq!(r.n_converged, 9);
        assert_eq!(r.min_rank_found, Some(2));
        assert!(
            r.max_distance_to_canonical.unwrap() < 1e-5,
            "{:?}",
            r.max_distance_to_canonical
        );
        assert!(!r.red_flag());
    }

    #[test]
    fn deterministic_across_threads() {
        let g = BiGraph::from_parts(3, 2, &[(1, 1), (2, 2), (3, 1)], &[((1, 2), (2, 1))]).unwrap();
        let one = probe_graph::<f64>(&g, &quick(6));
        let three = probe_graph::<f64>(&g, &ProbeOptions { threads: 3, ..quick(6) });
        assert_eq!(one, three);
    }
}
