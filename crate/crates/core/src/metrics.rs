//! Correlation coefficient and permutation-invariant scoring of recovered
//! sources.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::MultiSignal;

/// Largest K for which the assignment search is exhaustive.
pub const EXHAUSTIVE_MAX_CHANNELS: usize = 4;

/// Pearson correlation `cov(x,y) / sqrt(cov(x,x)·cov(y,y))` with mean-removed
/// biased (1/N) covariances.
///
/// Errors when the lengths differ, when fewer than two samples are given, or
/// when either input is constant (the ratio is undefined there).
pub fn correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::dims(format!(
            "correlation of signals with lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::invalid("correlation needs at least two samples"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if is_constant(sxx, x) || is_constant(syy, y) {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

// Variance below the rounding floor of the mean subtraction means the input
// is constant up to representation error.
fn is_constant(sum_sq: f64, v: &[f64]) -> bool {
    let scale = v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let floor = 1e-13 * scale;
    sum_sq <= floor * floor * v.len() as f64
}

/// Correlations between recovered and source channels, and the matching that
/// resolves permutation and sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    /// `corr_matrix[r][s]` is C(recovered r, source s).
    pub corr_matrix: Vec<Vec<f64>>,
    /// `assignment[r]` is the source matched to recovered channel `r`.
    pub assignment: Vec<usize>,
    /// |C| of each matched pair, in source order.
    pub matched_abs_corr: Vec<f64>,
}

impl CorrelationReport {
    pub fn min_matched(&self) -> f64 {
        self.matched_abs_corr
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Scores `recovered` against `sources` on samples `burn_in..`.
///
/// The assignment maximizes the summed |C| over all permutations for up to
/// [`EXHAUSTIVE_MAX_CHANNELS`] channels and is built greedily above that.
pub fn match_and_score(
    recovered: &MultiSignal,
    sources: &MultiSignal,
    burn_in: usize,
) -> Result<CorrelationReport> {
    let k = sources.num_channels();
    if recovered.num_channels() != k {
        return Err(Error::dims(format!(
            "{} recovered channels vs {k} sources",
            recovered.num_channels()
        )));
    }
    if recovered.len() != sources.len() {
        return Err(Error::dims(format!(
            "recovered length {} vs source length {}",
            recovered.len(),
            sources.len()
        )));
    }
    if burn_in >= sources.len() {
        return Err(Error::invalid(format!(
            "burn-in {burn_in} leaves no samples of {}",
            sources.len()
        )));
    }

    let mut corr_matrix = vec![vec![0.0; k]; k];
    for (r, rec) in recovered.channels().iter().enumerate() {
        for (s, src) in sources.channels().iter().enumerate() {
            corr_matrix[r][s] = correlation(&rec.samples()[burn_in..], &src.samples()[burn_in..])?;
        }
    }
    let abs: Vec<Vec<f64>> = corr_matrix
        .iter()
        .map(|row| row.iter().map(|c| c.abs()).collect())
        .collect();
    let assignment = if k <= EXHAUSTIVE_MAX_CHANNELS {
        best_permutation(&abs)
    } else {
        greedy_assignment(&abs)
    };
    let mut matched_abs_corr = vec![0.0; k];
    for (r, &s) in assignment.iter().enumerate() {
        matched_abs_corr[s] = abs[r][s];
    }
    Ok(CorrelationReport {
        corr_matrix,
        assignment,
        matched_abs_corr,
    })
}

fn best_permutation(abs: &[Vec<f64>]) -> Vec<usize> {
    let k = abs.len();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = perm.clone();
    let mut best_score = f64::NEG_INFINITY;
    let mut visit = |p: &[usize]| {
        let score: f64 = p.iter().enumerate().map(|(r, &s)| abs[r][s]).sum();
        // strict comparison keeps the first (lexicographically smallest) optimum
        if score > best_score {
            best_score = score;
            best = p.to_vec();
        }
    };
    permute(&mut perm, 0, &mut visit);
    best
}

// Lexicographic enumeration, so ties resolve deterministically.
fn permute(p: &mut Vec<usize>, start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == p.len() {
        visit(p);
        return;
    }
    for i in start..p.len() {
        p[start..=i].rotate_right(1);
        permute(p, start + 1, visit);
        p[start..=i].rotate_left(1);
    }
}

fn greedy_assignment(abs: &[Vec<f64>]) -> Vec<usize> {
    let k = abs.len();
    let mut pairs: Vec<(usize, usize)> = (0..k).flat_map(|r| (0..k).map(move |s| (r, s))).collect();
    pairs.sort_by(|a, b| abs[b.0][b.1].total_cmp(&abs[a.0][a.1]).then(a.cmp(b)));
    let mut assignment = vec![usize::MAX; k];
    let mut taken = vec![false; k];
    for (r, s) in pairs {
        if assignment[r] == usize::MAX && !taken[s] {
            assignment[r] = s;
            taken[s] = true;
        }
    }
    assignment
}
