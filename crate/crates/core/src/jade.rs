//! Real-valued JADE for instantaneous mixtures.
//!
//! Stages: centre and whiten with the symmetric eigendecomposition of the
//! sample covariance, estimate the K² fourth-order cumulant matrices of the
//! whitened data, then find one orthogonal matrix that jointly diagonalizes
//! them with Givens rotation sweeps. All moments use biased (1/T) estimators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, Mat};

/// Relative eigenvalue floor below which the covariance counts as singular.
pub const SINGULAR_RATIO: f64 = 1e-12;
/// Largest channel count accepted by [`jade_separate`].
pub const MAX_CHANNELS: usize = 8;
pub const DEFAULT_THRESHOLD: f64 = 1e-6;
pub const DEFAULT_MAX_SWEEPS: usize = 100;

const EIGEN_TOL: f64 = 1e-12;
const EIGEN_MAX_SWEEPS: usize = 100;

/// K channels × T samples, stored channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    rows: Vec<Vec<f64>>,
}

impl DataMatrix {
    /// Requires equal-length finite channels with more samples than channels.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::invalid("data matrix needs at least one channel"));
        }
        let t = rows[0].len();
        if rows.iter().any(|r| r.len() != t) {
            return Err(Error::dims("data matrix channels differ in length"));
        }
        if t <= k {
            return Err(Error::invalid(format!(
                "need more samples than channels, got {t} samples for {k} channels"
            )));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("data matrix has non-finite entries"));
        }
        Ok(DataMatrix { rows })
    }

    pub fn channels(&self) -> usize {
        self.rows.len()
    }

    pub fn samples(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<Vec<f64>> {
        self.rows
    }

    pub fn means(&self) -> Vec<f64> {
        let t = self.samples() as f64;
        self.rows
            .iter()
            .map(|r| r.iter().sum::<f64>() / t)
            .collect()
    }

    /// Biased sample covariance after removing `mean`.
    pub fn covariance(&self, mean: &[f64]) -> Mat {
        let k = self.channels();
        let t = self.samples() as f64;
        let centered: Vec<Vec<f64>> = self
            .rows
            .iter()
            .zip(mean)
            .map(|(r, m)| r.iter().map(|v| v - m).collect())
            .collect();
        let mut c = Mat::zeros(k, k);
        for i in 0..k {
            for j in 0..=i {
                let v = dot(&centered[i], &centered[j]) / t;
                c[(i, j)] = v;
                c[(j, i)] = v;
            }
        }
        c
    }

    /// `B·(X − mean)`.
    pub fn transform(&self, b: &Mat, mean: &[f64]) -> DataMatrix {
        let t = self.samples();
        let mut out = vec![vec![0.0; t]; b.rows()];
        for (i, o) in out.iter_mut().enumerate() {
            for (j, (r, m)) in self.rows.iter().zip(mean).enumerate() {
                let c = b[(i, j)];
                if c == 0.0 {
                    continue;
                }
                for (ov, v) in o.iter_mut().zip(r) {
                    *ov += c * (v - m);
                }
            }
        }
        DataMatrix { rows: out }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone)]
pub struct WhiteningResult {
    /// `W = Λ^{-1/2}·Eᵀ`.
    pub whitener: Mat,
    pub mean: Vec<f64>,
    pub whitened: DataMatrix,
}

/// Centres `x` and whitens it so the sample covariance is the identity.
pub fn center_whiten(x: &DataMatrix) -> Result<WhiteningResult> {
    let mean = x.means();
    let cov = x.covariance(&mean);
    let eig = jacobi_eigen(&cov, EIGEN_TOL, EIGEN_MAX_SWEEPS)?;
    let max = eig.values[0];
    let min = *eig.values.last().expect("at least one eigenvalue");
    if max.is_nan() || max <= 0.0 || min < SINGULAR_RATIO * max {
        return Err(Error::SingularCovariance {
            ratio: if max > 0.0 { min / max } else { 0.0 },
        });
    }
    let k = x.channels();
    let whitener = Mat::from_fn(k, k, |i, j| eig.vectors[(j, i)] / eig.values[i].sqrt());
    let whitened = x.transform(&whitener, &mean);
    Ok(WhiteningResult {
        whitener,
        mean,
        whitened,
    })
}

/// Cumulant matrices `Q^{ij}` of whitened zero-mean data, for all (i, j):
///
/// ```text
/// Q^{ij}[k][l] = E[x_i x_j x_k x_l] − δ_ij δ_kl − δ_ik δ_jl − δ_il δ_jk
/// ```
///
/// Returned in row-major (i, j) order. Each matrix is filled from its upper
/// triangle, so it is exactly symmetric.
pub fn cumulant_matrices(xw: &DataMatrix) -> Vec<Mat> {
    let k = xw.channels();
    let t = xw.samples() as f64;
    let mut out = Vec::with_capacity(k * k);
    let mut weight = vec![0.0; xw.samples()];
    for i in 0..k {
        for j in 0..k {
            for ((w, a), b) in weight.iter_mut().zip(xw.row(i)).zip(xw.row(j)) {
                *w = a * b;
            }
            let mut q = Mat::zeros(k, k);
            for p in 0..k {
                let wp: Vec<f64> = weight.iter().zip(xw.row(p)).map(|(w, v)| w * v).collect();
                for r in p..k {
                    let mut v = dot(&wp, xw.row(r)) / t;
                    if i == j && p == r {
                        v -= 1.0;
                    }
                    if i == p && j == r {
                        v -= 1.0;
                    }
                    if i == r && j == p {
                        v -= 1.0;
                    }
                    q[(p, r)] = v;
                    q[(r, p)] = v;
                }
            }
            out.push(q);
        }
    }
    out
}

/// `Σ_k Σ_{i≠j} M_k[i][j]²`.
pub fn off_criterion(ms: &[Mat]) -> f64 {
    ms.iter().map(Mat::off_diagonal_sq).sum()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointDiagonalization {
    /// Orthogonal V with `Vᵀ·M_k·V` approximately diagonal for every k.
    pub rotation: Mat,
    pub sweeps: usize,
    /// False when `max_sweeps` ran out while rotations were still applied.
    pub converged: bool,
    /// Off-diagonal criterion of the rotated set.
    pub criterion: f64,
    /// Criterion divided by the summed squared Frobenius norms of the set.
    pub relative_criterion: f64,
}

/// Jointly diagonalizes a set of symmetric matrices by Givens rotation sweeps.
///
/// For each pair (p, q) the closed-form optimal angle comes from
/// `G = Σ_k h_k h_kᵀ` with `h_k = [M_k(p,p) − M_k(q,q), 2·M_k(p,q)]`.
/// Rotations with `|angle| ≤ threshold` are skipped. The loop ends after a
/// sweep that applies no rotation, or after `max_sweeps`.
pub fn joint_diagonalize(
    ms: &[Mat],
    threshold: f64,
    max_sweeps: usize,
) -> Result<JointDiagonalization> {
    let Some(first) = ms.first() else {
        return Err(Error::invalid("no matrices to diagonalize"));
    };
    let k = first.rows();
    if k < 2 {
        return Err(Error::invalid("joint diagonalization needs K ≥ 2"));
    }
    for (idx, m) in ms.iter().enumerate() {
        if m.rows() != k || m.cols() != k {
            return Err(Error::dims(format!("matrix {idx} is not {k}x{k}")));
        }
        if !m.is_symmetric() {
            return Err(Error::invalid(format!("matrix {idx} is not symmetric")));
        }
    }

    let mut work: Vec<Mat> = ms.to_vec();
    let mut v = Mat::identity(k);
    let total: f64 = ms.iter().map(|m| m.frobenius().powi(2)).sum();
    let mut sweeps = 0;
    let mut converged = false;

    while sweeps < max_sweeps {
        sweeps += 1;
        let mut rotated = false;
        for p in 0..k - 1 {
            for q in p + 1..k {
                let (mut g11, mut g12, mut g22) = (0.0, 0.0, 0.0);
                for m in &work {
                    let h1 = m[(p, p)] - m[(q, q)];
                    let h2 = m[(p, q)] + m[(q, p)];
                    g11 += h1 * h1;
                    g12 += h1 * h2;
                    g22 += h2 * h2;
                }
                let ton = g11 - g22;
                let toff = 2.0 * g12;
                let theta = 0.5 * toff.atan2(ton + ton.hypot(toff));
                if theta.abs() <= threshold {
                    continue;
                }
                rotated = true;
                let (s, c) = theta.sin_cos();
                #[cfg(debug_assertions)]
                let before = off_criterion(&work);
                for m in work.iter_mut() {
                    m.rotate_congruence(p, q, c, s);
                }
                v.rotate_columns(p, q, c, s);
                #[cfg(debug_assertions)]
                {
                    let after = off_criterion(&work);
                    debug_assert!(
                        after <= before + 1e-12 * total.max(f64::MIN_POSITIVE),
                        "rotation increased the off-diagonal criterion: {before} -> {after}"
                    );
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }

    let criterion = off_criterion(&work);
    Ok(JointDiagonalization {
        rotation: v,
        sweeps,
        converged,
        criterion,
        relative_criterion: if total > 0.0 { criterion / total } else { 0.0 },
    })
}

#[derive(Debug, Clone)]
pub struct JadeModel {
    pub whitener: Mat,
    pub mean: Vec<f64>,
    /// Orthogonal V from the joint diagonalization.
    pub rotation: Mat,
    /// `B = Vᵀ·W`.
    pub unmixing: Mat,
    /// `Y = B·(X − mean)`.
    pub separated: DataMatrix,
    pub sweeps: usize,
    pub converged: bool,
    pub criterion: f64,
    pub relative_criterion: f64,
}

/// Options for [`jade_separate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JadeOptions {
    /// Rotation angles at or below this many radians are skipped.
    pub threshold: f64,
    pub max_sweeps: usize,
}

impl Default for JadeOptions {
    fn default() -> Self {
        JadeOptions {
            threshold: DEFAULT_THRESHOLD,
            max_sweeps: DEFAULT_MAX_SWEEPS,
        }
    }
}

/// Separates an instantaneous mixture. Non-convergence is not an error; it
/// shows up as `converged == false` together with the final criterion.
pub fn jade_separate(x: &DataMatrix, opts: JadeOptions) -> Result<JadeModel> {
    let k = x.channels();
    if k < 2 {
        return Err(Error::invalid("JADE needs at least two channels"));
    }
    if k > MAX_CHANNELS {
        return Err(Error::invalid(format!(
            "JADE supports at most {MAX_CHANNELS} channels, got {k}"
        )));
    }
    let white = center_whiten(x)?;
    let cumulants = cumulant_matrices(&white.whitened);
    let jd = joint_diagonalize(&cumulants, opts.threshold, opts.max_sweeps)?;
    let unmixing = jd.rotation.transpose().matmul(&white.whitener);
    let separated = x.transform(&unmixing, &white.mean);
    Ok(JadeModel {
        whitener: white.whitener,
        mean: white.mean,
        rotation: jd.rotation,
        unmixing,
        separated,
        sweeps: jd.sweeps,
        converged: jd.converged,
        criterion: jd.criterion,
        relative_criterion: jd.relative_criterion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Seed;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn gaussian_rows(k: usize, t: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = Seed(seed).rng();
        (0..k)
            .map(|_| (0..t).map(|_| rng.sample(StandardNormal)).collect())
            .collect()
    }

    fn uniform_rows(k: usize, t: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = Seed(seed).rng();
        (0..k)
            .map(|_| (0..t).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect()
    }

    #[test]
    fn data_matrix_validation() {
        assert!(DataMatrix::new(vec![]).is_err());
        assert!(DataMatrix::new(vec![vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(DataMatrix::new(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).is_err());
        assert!(DataMatrix::new(vec![vec![1.0, f64::NAN, 0.0]]).is_err());
        assert!(DataMatrix::new(vec![vec![1.0, 2.0, 3.0], vec![3.0, 4.0, 0.0]]).is_ok());
    }

    #[test]
    fn whitening_gives_identity_covariance() {
        let mut rows = gaussian_rows(3, 5000, 1);
        for v in rows[1].iter_mut() {
            *v = 3.0 * *v + 10.0;
        }
        let a = rows[0].clone();
        for (v, w) in rows[2].iter_mut().zip(&a) {
            *v += 0.5 * w;
        }
        let w = center_whiten(&DataMatrix::new(rows).unwrap()).unwrap();
        let m = w.whitened.means();
        let cov = w.whitened.covariance(&m);
        assert!(cov.sub(&Mat::identity(3)).frobenius() < 1e-8);
        assert!(m.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn whitening_known_scaling() {
        // unit-covariance data scaled by diag(4, 1) needs W ≈ diag(1/4, 1)
        // up to sign; the exact white input makes this a deterministic check
        let base = gaussian_rows(2, 20_000, 2);
        let pre = center_whiten(&DataMatrix::new(base).unwrap())
            .unwrap()
            .whitened;
        let mut rows = pre.into_rows();
        rows[0].iter_mut().for_each(|v| *v *= 4.0);
        let w = center_whiten(&DataMatrix::new(rows).unwrap()).unwrap();
        assert!(
            (w.whitener[(0, 0)].abs() - 0.25).abs() < 1e-8,
            "{:?}",
            w.whitener
        );
        assert!((w.whitener[(1, 1)].abs() - 1.0).abs() < 1e-8);
        assert!(w.whitener[(0, 1)].abs() < 1e-8 && w.whitener[(1, 0)].abs() < 1e-8);
    }

    #[test]
    fn already_white_gets_orthogonal_whitener() {
        let base = gaussian_rows(2, 10_000, 3);
        let white = center_whiten(&DataMatrix::new(base).unwrap())
            .unwrap()
            .whitened;
        let w = center_whiten(&white).unwrap();
        let wtw = w.whitener.transpose().matmul(&w.whitener);
        assert!(wtw.sub(&Mat::identity(2)).frobenius() < 1e-8);
    }

    #[test]
    fn duplicated_channel_is_singular() {
        let row = gaussian_rows(1, 1000, 4).remove(0);
        let x = DataMatrix::new(vec![row.clone(), row]).unwrap();
        assert!(matches!(
            center_whiten(&x),
            Err(Error::SingularCovariance { .. })
        ));
    }

    #[test]
    fn cumulants_of_gaussian_vanish() {
        let x = DataMatrix::new(gaussian_rows(2, 100_000, 5)).unwrap();
        let w = center_whiten(&x).unwrap();
        let qs = cumulant_matrices(&w.whitened);
        assert_eq!(qs.len(), 4);
        let max = qs
            .iter()
            .flat_map(|q| q.as_slice().iter().copied())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max < 0.05, "max cumulant {max}");
    }

    #[test]
    fn uniform_kurtosis() {
        let x = DataMatrix::new(uniform_rows(1, 100_000, 6)).unwrap();
        let w = center_whiten(&x).unwrap();
        let qs = cumulant_matrices(&w.whitened);
        assert_eq!(qs.len(), 1);
        let q = qs[0][(0, 0)];
        assert!((q + 1.2).abs() < 0.06, "kurtosis {q}");
    }

    #[test]
    fn cumulant_matrices_are_exactly_symmetric() {
        let x = DataMatrix::new(uniform_rows(3, 2000, 7)).unwrap();
        let w = center_whiten(&x).unwrap();
        let qs = cumulant_matrices(&w.whitened);
        assert_eq!(qs.len(), 9);
        for q in &qs {
            assert_eq!(q, &q.transpose());
        }
    }

    #[test]
    fn diagonal_set_needs_no_rotation() {
        let ms = vec![
            Mat::from_diag(&[1.0, 2.0, 3.0]),
            Mat::from_diag(&[-1.0, 0.5, 0.0]),
        ];
        let jd = joint_diagonalize(&ms, 1e-6, 100).unwrap();
        assert_eq!(jd.rotation, Mat::identity(3));
        assert!(jd.converged);
        assert_eq!(jd.sweeps, 1);
        assert_eq!(jd.criterion, 0.0);
    }

    #[test]
    fn joint_diagonalize_rejects_bad_input() {
        let asym = Mat::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
        assert!(joint_diagonalize(&[asym], 1e-6, 10).is_err());
        assert!(joint_diagonalize(&[Mat::identity(1)], 1e-6, 10).is_err());
        assert!(joint_diagonalize(&[], 1e-6, 10).is_err());
        assert!(joint_diagonalize(&[Mat::identity(2), Mat::identity(3)], 1e-6, 10).is_err());
    }

    #[test]
    fn jade_rejects_single_channel_and_too_many() {
        let one = DataMatrix::new(uniform_rows(1, 100, 8)).unwrap();
        assert!(jade_separate(&one, JadeOptions::default()).is_err());
        let nine = DataMatrix::new(uniform_rows(9, 100, 8)).unwrap();
        assert!(jade_separate(&nine, JadeOptions::default()).is_err());
    }

    #[test]
    fn separated_rows_are_uncorrelated() {
        let mut rows = uniform_rows(3, 20_000, 9);
        let a = rows[0].clone();
        for (v, w) in rows[1].iter_mut().zip(&a) {
            *v += 0.7 * w;
        }
        let x = DataMatrix::new(rows).unwrap();
        let model = jade_separate(&x, JadeOptions::default()).unwrap();
        let y = &model.separated;
        let cov = y.covariance(&y.means());
        assert!(cov.sub(&Mat::identity(3)).frobenius() < 1e-6);
        let vtv = model.rotation.transpose().matmul(&model.rotation);
        assert!(vtv.sub(&Mat::identity(3)).frobenius() < 1e-10);
        let b = model.rotation.transpose().matmul(&model.whitener);
        assert!(b.sub(&model.unmixing).frobenius() < 1e-12);
    }

    #[test]
    fn gaussian_sources_leave_residual_criterion() {
        let x = DataMatrix::new(gaussian_rows(2, 50_000, 10)).unwrap();
        let model = jade_separate(&x, JadeOptions::default()).unwrap();
        assert!(
            !model.converged || model.relative_criterion >= 1e-3,
            "relative criterion {}",
            model.relative_criterion
        );
    }
}
