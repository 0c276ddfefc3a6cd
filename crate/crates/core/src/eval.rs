//! Comparing a recovered complex against the ground truth.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SclError};
use crate::topology::{ComplexSkeleton, Selection};

/// Normalized squared Frobenius error `‖L* − L̂‖²_F / ‖L*‖²_F`.
pub fn nerr(l_est: &DMatrix<f64>, l_true: &DMatrix<f64>) -> Result<f64> {
    if l_est.shape() != l_true.shape() {
        return Err(SclError::invalid(format!(
            "shape mismatch: estimate {:?}, truth {:?}",
            l_est.shape(),
            l_true.shape()
        )));
    }
    let denom = l_true.norm_squared();
    if denom == 0.0 {
        return Err(SclError::invalid("ground-truth Laplacian is zero"));
    }
    Ok((l_true - l_est).norm_squared() / denom)
}

/// Support-recovery scores for one simplex order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Precision, recall and F1 of `est` against `truth`.
///
/// With no predicted positives precision is 1 if the truth is empty too and
/// 0 otherwise; recall follows the same rule for an empty truth.
pub fn support_scores(est: &[bool], truth: &[bool]) -> SupportScores {
    let tp = est.iter().zip(truth).filter(|(&e, &t)| e && t).count() as f64;
    let predicted = est.iter().filter(|&&e| e).count() as f64;
    let actual = truth.iter().filter(|&&t| t).count() as f64;
    let ratio = |num: f64, den: f64, other: f64| {
        if den > 0.0 {
            num / den
        } else if other == 0.0 {
            1.0
        } else {
            0.0
        }
    };
    let precision = ratio(tp, predicted, actual);
    let recall = ratio(tp, actual, predicted);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    SupportScores { precision, recall, f1 }
}

/// Flat evaluation record. NErr values are `None` when the corresponding
/// ground-truth Laplacian is zero (e.g. a complex without filled triangles).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub nerr_l0: Option<f64>,
    pub nerr_lu: Option<f64>,
    pub edge_precision: f64,
    pub edge_recall: f64,
    pub edge_f1: f64,
    pub triangle_precision: f64,
    pub triangle_recall: f64,
    pub triangle_f1: f64,
    pub closure_violations: usize,
}

/// Compares `est` with `truth` on the full `N x N` and `E_bar x E_bar` Laplacians.
pub fn evaluate(skeleton: &ComplexSkeleton, est: &Selection, truth: &Selection) -> Result<EvalReport> {
    skeleton.check_selection(est)?;
    skeleton.check_selection(truth)?;
    let l0_true = skeleton.node_laplacian(&truth.w1)?;
    let l0_est = skeleton.node_laplacian(&est.w1)?;
    let lu_true = skeleton.upper_laplacian(&truth.w2)?;
    let lu_est = skeleton.upper_laplacian(&est.w2)?;
    let nerr_opt = |e: &DMatrix<f64>, t: &DMatrix<f64>| {
        if t.norm_squared() == 0.0 {
            None
        } else {
            nerr(e, t).ok()
        }
    };
    let edges = support_scores(&est.w1, &truth.w1);
    let tris = support_scores(&est.w2, &truth.w2);
    Ok(EvalReport {
        nerr_l0: nerr_opt(&l0_est, &l0_true),
        nerr_lu: nerr_opt(&lu_est, &lu_true),
        edge_precision: edges.precision,
        edge_recall: edges.recall,
        edge_f1: edges.f1,
        triangle_precision: tris.precision,
        triangle_recall: tris.recall,
        triangle_f1: tris.f1,
        closure_violations: skeleton.closure_violations(&est.w1, &est.w2)?.count,
    })
}
