use serde::{Deserialize, Serialize};

use crate::density::{convolve, entropy, scale_rv, shape_report, GridDensity};
use crate::error::{Error, Result};

/// Entropies of two i.i.d. copies and of their rotation by 45 degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoCopyReport {
    pub h_x: f64,
    /// `h(X_1, X_2) = 2 h(X)`; also the entropy of the rotated pair.
    pub h_joint: f64,
    /// `h((X_1 + X_2) / sqrt 2)`.
    pub h_sum: f64,
    /// `h((X_1 - X_2) / sqrt 2)`.
    pub h_diff: f64,
    /// `h_sum + h_diff - h_joint`, nonnegative by subadditivity.
    pub subadditivity_slack: f64,
    /// `h_sum - h_joint / 2`.
    pub margin: f64,
    pub holds: bool,
}

/// For symmetric `d`, evaluates `h((X_1 + X_2)/sqrt 2) >= h(X_1, X_2) / 2`
/// together with the subadditivity bound on the rotated pair.
pub fn two_copy_identity_check(d: &GridDensity) -> Result<TwoCopyReport> {
    let shape = shape_report(d, None, None);
    if !shape.symmetric {
        return Err(Error::InvalidArgument(format!(
            "density must be symmetric (max asymmetry {:e})",
            shape.max_asymmetry
        )));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let h_x = entropy(d);
    let h_sum = entropy(&scale_rv(&convolve(d, d)?, s)?);
    let h_diff = entropy(&scale_rv(&convolve(d, &d.reflect())?, s)?);
    let h_joint = 2.0 * h_x;
    let margin = h_sum - 0.5 * h_joint;
    Ok(TwoCopyReport {
        h_x,
        h_joint,
        h_sum,
        h_diff,
        subadditivity_slack: h_sum + h_diff - h_joint,
        margin,
        holds: margin >= 0.0,
    })
}
