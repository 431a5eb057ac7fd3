//! Closed-form ridge calibration of the comfort model.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::features::FeatureVector;
use super::model::{ComfortModel, MOS_MAX, MOS_MIN};
use crate::error::{Error, Result};

/// One calibration row: features of a stimulus and its mean opinion score.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub features: FeatureVector,
    pub mos: f64,
}

impl LabeledSample {
    pub fn new(features: FeatureVector, mos: f64) -> Result<Self> {
        if !(MOS_MIN..=MOS_MAX).contains(&mos) {
            return Err(Error::Domain(format!("MOS {mos} outside [1, 5]")));
        }
        Ok(Self { features, mos })
    }
}

/// Minimizes `sum (w.x_i + b - mos_i)^2 + lambda |w|^2` through the
/// augmented normal equations; the bias column is not penalized.
pub fn fit_model(samples: &[LabeledSample], ridge_lambda: f64) -> Result<ComfortModel> {
    if samples.len() < 2 {
        return Err(Error::Domain("need at least two calibration samples".into()));
    }
    if !(ridge_lambda.is_finite() && ridge_lambda >= 0.0) {
        return Err(Error::Domain(format!("ridge lambda must be >= 0, got {ridge_lambda}")));
    }
    let p = samples[0].features.len();
    if let Some(bad) = samples.iter().find(|s| s.features.len() != p) {
        return Err(Error::LengthMismatch {
            expected: p,
            got: bad.features.len(),
        });
    }
    let n = p + 1;
    let mut gram = vec![0.0; n * n];
    let mut rhs = vec![0.0; n];
    let mut row = vec![0.0; n];
    for s in samples {
        row[..p].copy_from_slice(s.features.as_slice());
        row[p] = 1.0;
        for i in 0..n {
            rhs[i] += row[i] * s.mos;
            for j in 0..n {
                gram[i * n + j] += row[i] * row[j];
            }
        }
    }
    for i in 0..p {
        gram[i * n + i] += ridge_lambda;
    }
    let beta = solve_dense(gram, rhs, n)?;
    Ok(ComfortModel::new(beta[..p].to_vec(), beta[p]))
}

/// Gaussian elimination with partial pivoting on a row-major `n x n` system.
fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::SingularSystem);
    }
    let tol = scale * 1e-12;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        if a[pivot * n + col].abs() <= tol {
            return Err(Error::SingularSystem);
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            b.swap(pivot, col);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[r * n + k] -= f * a[col * n + k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let tail: f64 = (r + 1..n).map(|k| a[r * n + k] * x[k]).sum();
        x[r] = (b[r] - tail) / a[r * n + r];
    }
    Ok(x)
}

/// Reads a calibration CSV: a header row, then feature columns followed by
/// the MOS column.
pub fn load_calibration_csv(path: &Path) -> Result<Vec<LabeledSample>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Format(format!("{}: empty calibration file", path.display())))?;
    let cols = header.split(',').count();
    if cols < 2 {
        return Err(Error::Format(
            "calibration CSV needs feature columns and a mos column".into(),
        ));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let vals: Vec<f64> = line
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Format(format!("calibration row {}: non-numeric value", i + 1)))?;
            if vals.len() != cols {
                return Err(Error::Format(format!(
                    "calibration row {}: {} columns, header has {cols}",
                    i + 1,
                    vals.len()
                )));
            }
            let (mos, feats) = vals.split_last().unwrap();
            LabeledSample::new(FeatureVector::new(feats.to_vec()), *mos)
        })
        .collect()
}

pub fn save_calibration_csv(path: &Path, samples: &[LabeledSample], feature_names: &[String]) -> Result<()> {
    let mut out = feature_names.join(",");
    out.push_str(",mos\n");
    for s in samples {
        for v in s.features.as_slice() {
            write!(out, "{v},").unwrap();
        }
        writeln!(out, "{}", s.mos).unwrap();
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
