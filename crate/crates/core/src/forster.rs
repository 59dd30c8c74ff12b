//! Radial isotropy, Forster transforms and the subspace-chain decomposition.
//!
//! A set of unit vectors `S ⊂ R^n` is in ε-approximate radial isotropic
//! position when every eigenvalue of `(1/|S|) Σ x xᵀ` lies in
//! `[(1−ε)/n, (1+ε)/n]`. A Forster transform is an invertible `A` such that
//! the normalized images `Ax/‖Ax‖` are in that position. When no such `A`
//! exists there is a proper subspace `W` holding more than a `dim(W)/n`
//! fraction of the points; [`forster_transform`] returns one of the two,
//! re-verified before it is handed back.
//!
//! The transform is found by iterative scaling:
//!
//! ```text
//! u_x ← A x / ‖A x‖,   M ← (n/|S|) Σ u_x u_xᵀ,   A ← M^{-1/2} A
//! ```
//!
//! Once the requested ε is certified the iteration keeps going towards exact
//! isotropy, periodically searching for a witness subspace. Sets that admit a
//! witness never converge, so the witness is preferred whenever one exists;
//! sets that converge return the certified transform.

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::Point;
use crate::linalg::{self, outer_mean, symmetric_eigen, Matrix, SymmetricEigen};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ForsterError {
    #[error("empty point set")]
    EmptyInput,
    #[error("point {index} has norm {norm}, expected a unit vector")]
    NonUnitInput { index: usize, norm: f64 },
    #[error("point {index} has dimension {got}, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, got: usize },
    #[error("no certificate reached within {iters} iterations")]
    BudgetExceeded { iters: usize },
}

fn check_dims<T: Real>(points: &[Point<T>]) -> Result<usize, ForsterError> {
    let first = points.first().ok_or(ForsterError::EmptyInput)?;
    let n = first.dim();
    for (index, p) in points.iter().enumerate() {
        if p.dim() != n {
            return Err(ForsterError::DimensionMismatch { index, expected: n, got: p.dim() });
        }
        if !p.is_finite() {
            return Err(ForsterError::NonUnitInput { index, norm: f64::NAN });
        }
    }
    Ok(n)
}

fn check_unit<T: Real>(points: &[Point<T>]) -> Result<usize, ForsterError> {
    let n = check_dims(points)?;
    for (index, p) in points.iter().enumerate() {
        let norm = p.norm();
        if (norm - T::one()).abs() > T::unit_tol() {
            return Err(ForsterError::NonUnitInput { index, norm: norm.as_f64() });
        }
    }
    Ok(n)
}

/// Empirical second moment `(1/|S|) Σ x xᵀ` of a set of unit vectors.
#[derive(Debug, Clone)]
pub struct SecondMoment<T> {
    matrix: Matrix<T>,
    eigen: SymmetricEigen<T>,
}

impl<T: Real> SecondMoment<T> {
    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigen.values
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn trace(&self) -> T {
        (0..self.dim()).map(|i| self.matrix[(i, i)]).sum()
    }

    /// Smallest ε for which the set is ε-approximately radially isotropic.
    pub fn isotropy_gap(&self) -> T {
        let n = T::of_usize(self.dim());
        self.eigen.values.iter().fold(T::zero(), |g, &l| g.max((l * n - T::one()).abs()))
    }

    pub fn is_isotropic(&self, eps: T) -> bool {
        let n = T::of_usize(self.dim());
        let lo = (T::one() - eps) / n;
        let hi = (T::one() + eps) / n;
        self.eigen.values.iter().all(|&l| l >= lo && l <= hi)
    }
}

pub fn second_moment<T: Real>(points: &[Point<T>]) -> Result<SecondMoment<T>, ForsterError> {
    let n = check_unit(points)?;
    let rows: Vec<Vec<T>> = points.iter().map(|p| p.0.clone()).collect();
    let matrix = outer_mean(&rows, n);
    let eigen = symmetric_eigen(&matrix);
    Ok(SecondMoment { matrix, eigen })
}

pub fn is_radially_isotropic<T: Real>(points: &[Point<T>], eps: T) -> Result<bool, ForsterError> {
    Ok(second_moment(points)?.is_isotropic(eps))
}

/// Certificate returned by [`forster_transform`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::de::DeserializeOwned"))]
pub enum ForsterOutcome<T> {
    /// `{Ax/‖Ax‖}` is ε-approximately radially isotropic.
    Transform { a: Matrix<T> },
    /// Orthonormal basis (columns) of a proper subspace `W` with `|S ∩ W| > dim(W)/n · |S|`.
    Subspace { basis: Matrix<T> },
}

/// Whether `x` lies in the span of the orthonormal columns of `basis`,
/// at [`Real::subspace_tol`] relative to `‖x‖`.
pub fn in_subspace<T: Real>(basis: &Matrix<T>, x: &[T]) -> bool {
    let coords = basis.apply_transpose(x);
    let proj = basis.apply(&coords);
    let resid = linalg::norm(&linalg::sub(x, &proj));
    resid <= T::subspace_tol() * linalg::norm(x)
}

pub fn count_in_subspace<T: Real>(basis: &Matrix<T>, points: &[Point<T>]) -> usize {
    points.iter().filter(|p| in_subspace(basis, p)).count()
}

/// `|S ∩ W| · n > dim(W) · |S|` for a proper, non-trivial `W`.
pub fn certifies_subspace<T: Real>(basis: &Matrix<T>, points: &[Point<T>]) -> bool {
    let n = basis.rows();
    let k = basis.cols();
    if k == 0 || k >= n {
        return false;
    }
    count_in_subspace(basis, points) * n > k * points.len()
}

fn images<T: Real>(a: &Matrix<T>, unit: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    unit.iter().map(|x| linalg::normalize(&a.apply(x))).collect()
}

/// Whether `{Ax/‖Ax‖ : x ∈ S}` is ε-approximately radially isotropic.
pub fn certifies_transform<T: Real>(a: &Matrix<T>, points: &[Point<T>], eps: T) -> bool {
    let unit: Vec<Vec<T>> = match points.iter().map(|p| linalg::normalize(p)).collect::<Option<_>>() {
        Some(u) => u,
        None => return false,
    };
    match images(a, &unit) {
        Some(imgs) => {
            let pts: Vec<Point<T>> = imgs.into_iter().map(Point).collect();
            second_moment(&pts).map(|m| m.is_isotropic(eps)).unwrap_or(false)
        }
        None => false,
    }
}

/// Top-`k` principal subspace of `points` (orthonormal columns).
fn principal_subspace<T: Real>(points: &[&Vec<T>], n: usize, k: usize) -> Matrix<T> {
    let rows: Vec<Vec<T>> = points.iter().map(|p| (*p).clone()).collect();
    let e = symmetric_eigen(&outer_mean(&rows, n));
    let cols: Vec<Vec<T>> = (n - k..n).map(|j| e.vectors.column(j)).collect();
    Matrix::from_columns(&cols)
}

fn distance_to<T: Real>(basis: &Matrix<T>, x: &[T]) -> T {
    let proj = basis.apply(&basis.apply_transpose(x));
    linalg::norm(&linalg::sub(x, &proj))
}

const REFINE_TOLS: [f64; 7] = [1e-1, 3e-2, 1e-2, 1e-3, 1e-5, 1e-7, 1e-9];

/// Starting from a selection of points believed to span a `k`-dimensional
/// witness, alternately fit the principal subspace and re-select points close
/// to it with shrinking tolerance; return the first certified subspace.
fn refine_witness<T: Real>(
    points: &[Point<T>],
    unit: &[Vec<T>],
    n: usize,
    k: usize,
    mut selected: Vec<bool>,
) -> Option<Matrix<T>> {
    for &tol in REFINE_TOLS.iter() {
        let chosen: Vec<&Vec<T>> = unit.iter().zip(&selected).filter(|(_, &s)| s).map(|(u, _)| u).collect();
        if chosen.len() * n <= k * unit.len() {
            return None;
        }
        let w = principal_subspace(&chosen, n, k);
        if certifies_subspace(&w, points) {
            return Some(w);
        }
        let tol = T::of(tol);
        selected = unit.iter().map(|u| distance_to(&w, u) <= tol).collect();
    }
    None
}

/// Witness candidates for rank-deficient point sets: spans of the
/// eigenvectors of the original second moment above a sweep of thresholds.
fn witness_from_spectrum<T: Real>(points: &[Point<T>], unit: &[Vec<T>], n: usize) -> Option<Matrix<T>> {
    let e = symmetric_eigen(&outer_mean(unit, n));
    let top = e.max();
    for &thr in &[1e-12, 1e-10, 1e-8, 1e-6] {
        let keep: Vec<usize> = (0..n).filter(|&j| e.values[j] > T::of(thr) * top).collect();
        let k = keep.len();
        if k == 0 || k >= n {
            continue;
        }
        let w = Matrix::from_columns(&keep.iter().map(|&j| e.vectors.column(j)).collect::<Vec<_>>());
        if certifies_subspace(&w, points) {
            return Some(w);
        }
        let selected = unit.iter().map(|u| distance_to(&w, u) <= T::of(1e-6)).collect();
        if let Some(w) = refine_witness(points, unit, n, k, selected) {
            return Some(w);
        }
    }
    None
}

/// Witness candidates from the current iterate: points whose images
/// concentrate near the top-`k` eigenspace of the iterate's second moment.
fn witness_from_iterate<T: Real>(
    points: &[Point<T>],
    unit: &[Vec<T>],
    imgs: &[Vec<T>],
    eigen: &SymmetricEigen<T>,
    n: usize,
) -> Option<Matrix<T>> {
    for k in 1..n {
        let cols: Vec<Vec<T>> = (n - k..n).map(|j| eigen.vectors.column(j)).collect();
        let e_k = Matrix::from_columns(&cols);
        for &tol in &[1e-1, 1e-2, 1e-4] {
            let selected: Vec<bool> = imgs.iter().map(|u| distance_to(&e_k, u) <= T::of(tol)).collect();
            if let Some(w) = refine_witness(points, unit, n, k, selected) {
                return Some(w);
            }
        }
    }
    None
}

/// Tuning of the iterative-scaling search.
#[derive(Debug, Clone, Copy)]
pub struct ForsterSearch<T> {
    pub eps: T,
    pub max_iters: usize,
    /// Isotropy gap at which the iteration is considered converged.
    pub converged: T,
    /// Witness search cadence (in iterations) after the ε-certificate holds.
    pub witness_every: usize,
}

impl<T: Real> ForsterSearch<T> {
    pub fn new(eps: T, max_iters: usize) -> Self {
        Self { eps, max_iters, converged: T::of(1e-3).min(eps), witness_every: 8 }
    }
}

/// Default iteration budget `10³·n`.
pub fn default_max_iters(n: usize) -> usize {
    1000 * n.max(1)
}

pub fn forster_transform<T: Real>(
    points: &[Point<T>],
    eps: T,
    max_iters: usize,
) -> Result<ForsterOutcome<T>, ForsterError> {
    forster_transform_from(points, &ForsterSearch::new(eps, max_iters), None)
}

/// [`forster_transform`] with explicit tuning and an optional starting matrix.
pub fn forster_transform_from<T: Real>(
    points: &[Point<T>],
    search: &ForsterSearch<T>,
    start: Option<Matrix<T>>,
) -> Result<ForsterOutcome<T>, ForsterError> {
    assert!(search.eps > T::zero() && search.eps < T::one(), "eps must lie in (0,1)");
    let n = check_dims(points)?;
    let mut unit = Vec::with_capacity(points.len());
    for (index, p) in points.iter().enumerate() {
        match p.normalized() {
            Some(u) => unit.push(u.0),
            None => return Err(ForsterError::NonUnitInput { index, norm: p.norm().as_f64() }),
        }
    }
    let scale = T::of_usize(n);

    let initial = symmetric_eigen(&outer_mean(&unit, n));
    if initial.min() * scale < T::eig_floor() {
        if let Some(w) = witness_from_spectrum(points, &unit, n) {
            return Ok(ForsterOutcome::Subspace { basis: w });
        }
    }

    let mut a = start.unwrap_or_else(|| Matrix::identity(n));
    let mut certified: Option<Matrix<T>> = None;
    let mut last: Option<(Vec<Vec<T>>, SymmetricEigen<T>)> = None;
    let mut since_certified = 0usize;
    for _ in 0..search.max_iters {
        let imgs = match images(&a, &unit) {
            Some(i) => i,
            None => break,
        };
        let eigen = symmetric_eigen(&outer_mean(&imgs, n).scale(scale));
        let gap = eigen.values.iter().fold(T::zero(), |g, &l| g.max((l - T::one()).abs()));
        if gap <= search.eps && certifies_transform(&a, points, search.eps) {
            certified = Some(a.clone());
            if gap <= search.converged {
                return Ok(ForsterOutcome::Transform { a });
            }
            since_certified += 1;
            if since_certified % search.witness_every == 0 {
                if let Some(w) = witness_from_iterate(points, &unit, &imgs, &eigen, n) {
                    return Ok(ForsterOutcome::Subspace { basis: w });
                }
            }
        }
        if eigen.min() < T::eig_floor() {
            last = Some((imgs, eigen));
            break;
        }
        let step = eigen.map_values(|l| T::one() / l.sqrt());
        let next = step.matmul(&a);
        let f = next.frobenius();
        if !next.is_finite() || f < T::tiny_norm() {
            last = Some((imgs, eigen));
            break;
        }
        a = next.scale(scale.sqrt() / f);
        last = Some((imgs, eigen));
    }

    if let Some((imgs, eigen)) = &last {
        if let Some(w) = witness_from_iterate(points, &unit, imgs, eigen, n) {
            return Ok(ForsterOutcome::Subspace { basis: w });
        }
    }
    if let Some(w) = witness_from_spectrum(points, &unit, n) {
        return Ok(ForsterOutcome::Subspace { basis: w });
    }
    match certified {
        Some(a) => Ok(ForsterOutcome::Transform { a }),
        None => Err(ForsterError::BudgetExceeded { iters: search.max_iters }),
    }
}

/// One round of the halfspace learner's preprocessing: a subspace `V`
/// (orthonormal basis `B`, `n×d`) and an invertible `A` on `V` such that
/// `{A Bᵀx / ‖A Bᵀx‖ : x ∈ S ∩ V}` is ε-isotropic in `R^d` and
/// `|S ∩ V| > (d/n)|S|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::de::DeserializeOwned"))]
pub struct ForsterStage<T> {
    basis: Matrix<T>,
    a: Matrix<T>,
    a_inv: Matrix<T>,
}

impl<T: Real> ForsterStage<T> {
    pub fn new(basis: Matrix<T>, a: Matrix<T>) -> Result<Self, crate::linalg::LinalgError> {
        let a_inv = a.inverse()?;
        Ok(Self { basis, a, a_inv })
    }

    /// The stage `V = R^n`, `A = I`.
    pub fn identity(n: usize) -> Self {
        Self { basis: Matrix::identity(n), a: Matrix::identity(n), a_inv: Matrix::identity(n) }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &Matrix<T> {
        &self.basis
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.a
    }

    pub fn matrix_inverse(&self) -> &Matrix<T> {
        &self.a_inv
    }

    /// `P_V = B Bᵀ`
    pub fn projector(&self) -> Matrix<T> {
        self.basis.matmul(&self.basis.transpose())
    }

    pub fn contains(&self, x: &[T]) -> bool {
        in_subspace(&self.basis, x)
    }

    /// Coordinates of `P_V x` in the basis of `V`.
    pub fn coords(&self, x: &[T]) -> Vec<T> {
        self.basis.apply_transpose(x)
    }

    /// `A P_V x / ‖A P_V x‖` in `R^d`, or `None` when the norm vanishes.
    pub fn normalized_image(&self, x: &[T]) -> Option<Vec<T>> {
        linalg::normalize(&self.a.apply(&self.coords(x)))
    }

    /// `A P_V x` (unnormalized) in `R^d`.
    pub fn image(&self, x: &[T]) -> Vec<T> {
        self.a.apply(&self.coords(x))
    }

    /// `P_Vᵀ A⁻¹ z`: where a query `z ∈ R^d` lands in the ambient space.
    pub fn pullback(&self, z: &[T]) -> Vec<T> {
        self.basis.apply(&self.a_inv.apply(z))
    }

    /// `(A⁻¹)ᵀ P_V w`: the normal of `sign(w·x)` after the transform.
    pub fn transformed_normal(&self, w: &[T]) -> Vec<T> {
        self.a_inv.apply_transpose(&self.coords(w))
    }
}

/// Procedure of the subspace-chain corollary: start from `V = R^n`; while
/// the transform step returns a witness `W ⊊ V`, restrict to `V ← W` and the
/// points lying in it; stop at the first certified transform.
///
/// Each transform call is repeated up to `⌈ln(n/δ)⌉` times from random
/// starting matrices before giving up with [`ForsterError::BudgetExceeded`].
pub fn forster_decompose<T: Real>(
    points: &[Point<T>],
    delta: f64,
    eps: T,
    rng: &mut dyn RngCore,
) -> Result<ForsterStage<T>, ForsterError> {
    let n = check_dims(points)?;
    for (index, p) in points.iter().enumerate() {
        if p.norm() < T::tiny_norm() {
            return Err(ForsterError::NonUnitInput { index, norm: p.norm().as_f64() });
        }
    }
    let reps = ((n as f64 / delta).ln().ceil() as usize).max(1);
    let mut basis: Matrix<T> = Matrix::identity(n);
    for _round in 0..n {
        let d = basis.cols();
        let local: Vec<Point<T>> = points
            .iter()
            .filter(|p| in_subspace(&basis, p))
            .map(|p| Point(basis.apply_transpose(p)))
            .collect();
        if local.is_empty() {
            return Err(ForsterError::EmptyInput);
        }
        let search = ForsterSearch::new(eps, default_max_iters(d));
        let mut outcome = Err(ForsterError::BudgetExceeded { iters: search.max_iters });
        for rep in 0..reps {
            let start = if rep == 0 { None } else { Some(random_start(d, rng)) };
            outcome = forster_transform_from(&local, &search, start);
            if outcome.is_ok() {
                break;
            }
        }
        match outcome? {
            ForsterOutcome::Transform { a } => {
                let stage = ForsterStage::new(basis, a).map_err(|_| ForsterError::BudgetExceeded { iters: search.max_iters })?;
                debug_assert!(stage_invariants_hold(&stage, points, eps));
                return Ok(stage);
            }
            ForsterOutcome::Subspace { basis: w } => {
                basis = basis.matmul(&w);
            }
        }
    }
    // dimension strictly decreases on every witness, and d = 1 always certifies
    unreachable!("subspace chain longer than the ambient dimension")
}

fn random_start<T: Real>(d: usize, rng: &mut dyn RngCore) -> Matrix<T> {
    loop {
        let mut m = Matrix::identity(d);
        for i in 0..d {
            for j in 0..d {
                let g: f64 = StandardNormal.sample(rng);
                m[(i, j)] = m[(i, j)] + T::of(g);
            }
        }
        if m.inverse().is_ok() {
            return m;
        }
    }
}

/// Both stage invariants: isotropy of the images inside `V` and the counting condition.
pub fn stage_invariants_hold<T: Real>(stage: &ForsterStage<T>, points: &[Point<T>], eps: T) -> bool {
    let n = stage.ambient_dim();
    let d = stage.dim();
    let members: Vec<&Point<T>> = points.iter().filter(|p| stage.contains(p)).collect();
    if members.len() * n <= d * points.len() && d < n {
        return false;
    }
    let imgs: Option<Vec<Point<T>>> = members.iter().map(|p| stage.normalized_image(p).map(Point)).collect();
    match imgs {
        Some(imgs) if !imgs.is_empty() => second_moment(&imgs).map(|m| m.is_isotropic(eps)).unwrap_or(false),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn p(v: &[f64]) -> Point<f64> {
        Point(v.to_vec())
    }

    #[test]
    fn cross_has_half_identity_moment() {
        let s = vec![p(&[1.0, 0.0]), p(&[-1.0, 0.0]), p(&[0.0, 1.0]), p(&[0.0, -1.0])];
        let m = second_moment(&s).unwrap();
        assert_eq!(m.eigenvalues(), &[0.5, 0.5]);
        assert_eq!(m.isotropy_gap(), 0.0);
        assert!(is_radially_isotropic(&s, 1e-12).unwrap());
    }

    #[test]
    fn single_point_moment() {
        let m = second_moment(&[p(&[1.0, 0.0])]).unwrap();
        assert_eq!(m.matrix()[(0, 0)], 1.0);
        assert_eq!(m.matrix()[(1, 1)], 0.0);
        assert_eq!(m.matrix()[(0, 1)], 0.0);
    }

    #[test]
    fn non_unit_and_zero_points_are_rejected() {
        assert!(matches!(second_moment(&[p(&[2.0, 0.0])]), Err(ForsterError::NonUnitInput { index: 0, .. })));
        assert!(matches!(forster_transform(&[p(&[1.0, 0.0]), p(&[0.0, 0.0])], 0.5, 10), Err(ForsterError::NonUnitInput { index: 1, .. })));
        assert!(matches!(second_moment::<f64>(&[]), Err(ForsterError::EmptyInput)));
    }

    #[test]
    fn repeated_axis_is_not_isotropic() {
        let s = vec![p(&[1.0, 0.0]), p(&[1.0, 0.0])];
        assert!(!is_radially_isotropic(&s, 0.5).unwrap());
    }

    #[test]
    fn narrow_fan_is_not_isotropic() {
        // eigenvalues of the 2×2 moment by hand: (1/3)(1 + 2cos²10°) and (2/3)sin²10°
        let t = 10f64.to_radians();
        let s = vec![p(&[1.0, 0.0]), p(&[t.cos(), t.sin()]), p(&[t.cos(), -t.sin()])];
        let m = second_moment(&s).unwrap();
        let small = 2.0 / 3.0 * t.sin().powi(2);
        let large = (1.0 + 2.0 * t.cos().powi(2)) / 3.0;
        assert!((m.eigenvalues()[0] - small).abs() < 1e-14);
        assert!((m.eigenvalues()[1] - large).abs() < 1e-14);
        assert!(!is_radially_isotropic(&s, 0.5).unwrap());
    }

    #[test]
    fn isotropic_input_keeps_identity() {
        let s = vec![p(&[1.0, 0.0]), p(&[-1.0, 0.0]), p(&[0.0, 1.0]), p(&[0.0, -1.0])];
        match forster_transform(&s, 0.5, 100).unwrap() {
            ForsterOutcome::Transform { a } => assert!(a.max_abs_diff(&Matrix::identity(2)) < 1e-15),
            other => panic!("expected transform, got {other:?}"),
        }
    }

    #[test]
    fn points_on_a_line_give_that_line() {
        let s = vec![p(&[1.0, 0.0]), p(&[-1.0, 0.0]), p(&[1.0, 0.0])];
        match forster_transform(&s, 0.5, 100).unwrap() {
            ForsterOutcome::Subspace { basis } => {
                assert_eq!(basis.cols(), 1);
                assert!((basis[(0, 0)].abs() - 1.0).abs() < 1e-12);
                assert_eq!(count_in_subspace(&basis, &s), 3);
            }
            other => panic!("expected subspace, got {other:?}"),
        }
    }

    #[test]
    fn decomposition_of_a_line_in_r3() {
        let dir = [1.0 / 3f64.sqrt(); 3];
        let s: Vec<_> = (0..6).map(|i| if i % 2 == 0 { p(&dir) } else { p(&dir.map(|v| -v)) }).collect();
        let mut rng = rng_from_seed(5);
        let stage = forster_decompose(&s, 0.1, 0.5, &mut rng).unwrap();
        assert_eq!(stage.dim(), 1);
        assert!(s.iter().all(|x| stage.contains(x)));
        assert!(stage_invariants_hold(&stage, &s, 0.5));
    }

    #[test]
    fn f32_transform_certifies() {
        let t = 20f32.to_radians();
        let s: Vec<Point<f32>> = vec![Point(vec![1.0, 0.0]), Point(vec![t.cos(), t.sin()]), Point(vec![t.cos(), -t.sin()])];
        match forster_transform(&s, 0.5f32, 2000).unwrap() {
            ForsterOutcome::Transform { a } => assert!(certifies_transform(&a, &s, 0.5)),
            other => panic!("expected transform, got {other:?}"),
        }
    }
}
