use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::design::Design;
use super::qr::least_squares;
use super::{DropReason, DroppedTerm, Estimator, Outcome, RegressionSpec, SeType, INTERCEPT};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("rank deficient design; collinear columns: {}", columns.join(", "))]
    RankDeficient { columns: Vec<String> },
    #[error("underdetermined: {n_obs} observations for {n_params} parameters")]
    Underdetermined { n_obs: usize, n_params: usize },
    #[error("no regressor varies within households")]
    NoWithinVariation,
    #[error("no household is observed more than once")]
    NoRepeatedHouseholds,
}

/// What to do with columns that are linear combinations of earlier ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RankPolicy {
    /// Drop them and list them in `dropped_terms`.
    #[default]
    Drop,
    /// Fail with [`FitError::RankDeficient`].
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub estimate: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub outcome: Outcome,
    pub estimator: Estimator,
    pub se_type: SeType,
    /// Retained regressors in build order.
    pub coefficients: IndexMap<String, Coefficient>,
    pub n_obs: usize,
    /// Households contributing to the estimate.
    pub n_households: usize,
    /// Singleton households left out of the within estimator.
    pub n_singletons: usize,
    pub df_resid: usize,
    /// Plain R² for pooled OLS, within R² for FE.
    pub r2: f64,
    pub adjusted_r2: f64,
    pub dropped_terms: Vec<DroppedTerm>,
    /// One per design row; singleton rows carry exactly 0 under FE.
    pub residuals: Vec<f64>,
    /// Sample means of retained regressors over the estimation sample.
    pub regressor_means: IndexMap<String, f64>,
    /// Observation-weighted mean of the household effects (0 for pooled OLS).
    pub mean_fixed_effect: f64,
    /// Recovered household effects, within estimator only.
    pub fixed_effects: Option<IndexMap<String, f64>>,
}

impl FitResult {
    pub fn get(&self, label: &str) -> Option<Coefficient> {
        self.coefficients.get(label).copied()
    }

    /// Prediction at the stored regressor means.
    pub fn predicted_at_means(&self) -> f64 {
        self.mean_fixed_effect
            + self
                .coefficients
                .iter()
                .map(|(l, c)| c.estimate * self.regressor_means.get(l).copied().unwrap_or(0.0))
                .sum::<f64>()
    }
}

fn dropped_for(design: &Design, idx: &[usize], reason: DropReason) -> Vec<DroppedTerm> {
    idx.iter()
        .map(|&j| DroppedTerm {
            label: design.labels[j].clone(),
            reason,
        })
        .collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sandwich with `Σ_g (X_gᵀe_g)(X_gᵀe_g)ᵀ`, scaled by `G/(G−1)·(n−1)/(n−k)`.
fn cluster_se(
    columns: &[&[f64]],
    residuals: &[f64],
    xtx_inv: &[f64],
    groups: &[usize],
    n_groups: usize,
    rows: &[usize],
) -> Vec<f64> {
    let k = columns.len();
    let mut scores = vec![vec![0.0; k]; n_groups];
    for (pos, &i) in rows.iter().enumerate() {
        let e = residuals[pos];
        let s = &mut scores[groups[i]];
        for (j, col) in columns.iter().enumerate() {
            s[j] += col[pos] * e;
        }
    }
    let mut meat = vec![0.0; k * k];
    for s in scores.iter().filter(|s| s.iter().any(|v| *v != 0.0)) {
        for a in 0..k {
            for b in 0..k {
                meat[a * k + b] += s[a] * s[b];
            }
        }
    }
    let clusters = rows
        .iter()
        .map(|&i| groups[i])
        .collect::<std::collections::BTreeSet<_>>()
        .len() as f64;
    let n = rows.len() as f64;
    let scale = if clusters > 1.0 && n > k as f64 {
        clusters / (clusters - 1.0) * (n - 1.0) / (n - k as f64)
    } else {
        f64::NAN
    };
    // V = A M A with A = (XᵀX)⁻¹ symmetric; only the diagonal is needed.
    (0..k)
        .map(|j| {
            let mut v = 0.0;
            for a in 0..k {
                let left = xtx_inv[j * k + a];
                if left == 0.0 {
                    continue;
                }
                for b in 0..k {
                    v += left * meat[a * k + b] * xtx_inv[b * k + j];
                }
            }
            (scale * v).sqrt()
        })
        .collect()
}

fn classical_se(xtx_inv: &[f64], k: usize, sigma2: f64) -> Vec<f64> {
    (0..k)
        .map(|j| (sigma2 * xtx_inv[j * k + j]).sqrt())
        .collect()
}

/// Pooled least squares on the design as built (intercept and dummies included).
pub fn fit_pooled_ols(
    design: &Design,
    se_type: SeType,
    policy: RankPolicy,
) -> Result<FitResult, FitError> {
    let n = design.n_obs();
    let ls = least_squares(&design.columns, &design.y);
    if policy == RankPolicy::Strict && !ls.dropped.is_empty() {
        return Err(FitError::RankDeficient {
            columns: ls
                .dropped
                .iter()
                .map(|&j| design.labels[j].clone())
                .collect(),
        });
    }
    let p = ls.kept.len();
    if n <= p {
        return Err(FitError::Underdetermined {
            n_obs: n,
            n_params: p,
        });
    }
    let df = n - p;
    let has_intercept = ls.kept.iter().any(|&j| design.labels[j] == INTERCEPT);
    let y_bar = mean(&design.y);
    let tss: f64 = if has_intercept {
        design.y.iter().map(|y| (y - y_bar).powi(2)).sum()
    } else {
        design.y.iter().map(|y| y * y).sum()
    };
    let r2 = if tss > 0.0 { 1.0 - ls.rss / tss } else { 1.0 };
    let total_df = if has_intercept { n - 1 } else { n };
    let adjusted_r2 = 1.0 - (1.0 - r2) * total_df as f64 / df as f64;

    let kept_cols: Vec<&[f64]> = ls
        .kept
        .iter()
        .map(|&j| design.columns[j].as_slice())
        .collect();
    let all_rows: Vec<usize> = (0..n).collect();
    let se = match se_type {
        SeType::Classical => classical_se(&ls.xtx_inv, p, ls.rss / df as f64),
        SeType::ClusterByHousehold => cluster_se(
            &kept_cols,
            &ls.residuals,
            &ls.xtx_inv,
            &design.groups,
            design.group_ids.len(),
            &all_rows,
        ),
    };

    let mut dropped_terms = design.pre_dropped.clone();
    dropped_terms.extend(dropped_for(design, &ls.dropped, DropReason::Collinear));

    Ok(FitResult {
        outcome: design.outcome,
        estimator: Estimator::PooledOls,
        se_type,
        coefficients: ls
            .kept
            .iter()
            .zip(ls.beta.iter().zip(&se))
            .map(|(&j, (&estimate, &std_error))| {
                (
                    design.labels[j].clone(),
                    Coefficient {
                        estimate,
                        std_error,
                    },
                )
            })
            .collect(),
        n_obs: n,
        n_households: design.group_ids.len(),
        n_singletons: 0,
        df_resid: df,
        r2,
        adjusted_r2,
        dropped_terms,
        residuals: ls.residuals,
        regressor_means: ls
            .kept
            .iter()
            .map(|&j| (design.labels[j].clone(), mean(&design.columns[j])))
            .collect(),
        mean_fixed_effect: 0.0,
        fixed_effects: None,
    })
}

/// Household fixed-effects regression by within-household demeaning.
///
/// Households seen once are excluded from estimation. Regressors constant
/// within every household are dropped before the solve. Residual degrees of
/// freedom are `n − k − G` over the estimation sample, with `G` the number of
/// households observed at least twice; the reported adjusted R² is the within
/// version, `1 − (1 − R²_w)(n − G)/(n − G − k)`.
pub fn fit_within_fe(
    design: &Design,
    se_type: SeType,
    policy: RankPolicy,
) -> Result<FitResult, FitError> {
    let n_groups = design.group_ids.len();
    let mut sizes = vec![0usize; n_groups];
    for &g in &design.groups {
        sizes[g] += 1;
    }
    let rows: Vec<usize> = (0..design.n_obs())
        .filter(|&i| sizes[design.groups[i]] >= 2)
        .collect();
    if rows.is_empty() {
        return Err(FitError::NoRepeatedHouseholds);
    }
    let repeated = sizes.iter().filter(|&&s| s >= 2).count();
    let n_singletons = sizes.iter().filter(|&&s| s == 1).count();

    let group_means = |v: &[f64]| {
        let mut sums = vec![0.0; n_groups];
        for &i in &rows {
            sums[design.groups[i]] += v[i];
        }
        for (s, &size) in sums.iter_mut().zip(&sizes) {
            if size > 0 {
                *s /= size as f64;
            }
        }
        sums
    };
    let demean = |v: &[f64]| {
        let m = group_means(v);
        rows.iter()
            .map(|&i| v[i] - m[design.groups[i]])
            .collect::<Vec<f64>>()
    };

    let y_dm = demean(&design.y);
    let mut varying = Vec::new();
    let mut invariant = Vec::new();
    let mut x_dm = Vec::new();
    for (j, col) in design.columns.iter().enumerate() {
        let dm = demean(col);
        let scale = rows.iter().map(|&i| col[i].abs()).fold(0.0, f64::max);
        let spread = dm.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if spread <= 1e-10 * (1.0 + scale) {
            invariant.push(j);
        } else {
            varying.push(j);
            x_dm.push(dm);
        }
    }
    if varying.is_empty() {
        return Err(FitError::NoWithinVariation);
    }

    let ls = least_squares(&x_dm, &y_dm);
    let kept: Vec<usize> = ls.kept.iter().map(|&pos| varying[pos]).collect();
    let collinear: Vec<usize> = ls.dropped.iter().map(|&pos| varying[pos]).collect();
    if policy == RankPolicy::Strict && !collinear.is_empty() {
        return Err(FitError::RankDeficient {
            columns: collinear
                .iter()
                .map(|&j| design.labels[j].clone())
                .collect(),
        });
    }
    let n = rows.len();
    let k = kept.len();
    if n <= k + repeated {
        return Err(FitError::Underdetermined {
            n_obs: n,
            n_params: k + repeated,
        });
    }
    let df = n - k - repeated;

    let tss: f64 = y_dm.iter().map(|v| v * v).sum();
    let r2 = if tss > 0.0 { 1.0 - ls.rss / tss } else { 1.0 };
    let adjusted_r2 = 1.0 - (1.0 - r2) * (n - repeated) as f64 / df as f64;

    let kept_dm: Vec<&[f64]> = ls.kept.iter().map(|&pos| x_dm[pos].as_slice()).collect();
    let se = match se_type {
        SeType::Classical => classical_se(&ls.xtx_inv, k, ls.rss / df as f64),
        SeType::ClusterByHousehold => cluster_se(
            &kept_dm,
            &ls.residuals,
            &ls.xtx_inv,
            &design.groups,
            n_groups,
            &rows,
        ),
    };

    // c_i = mean_i(y) − mean_i(X)·β, using every row of the household.
    let mut effect_sum = vec![0.0; n_groups];
    for i in 0..design.n_obs() {
        let fitted: f64 = kept
            .iter()
            .zip(&ls.beta)
            .map(|(&j, b)| b * design.columns[j][i])
            .sum();
        effect_sum[design.groups[i]] += design.y[i] - fitted;
    }
    let effects: Vec<f64> = effect_sum
        .iter()
        .zip(&sizes)
        .map(|(s, &size)| s / size as f64)
        .collect();

    let mut residuals = vec![0.0; design.n_obs()];
    for (pos, &i) in rows.iter().enumerate() {
        residuals[i] = ls.residuals[pos];
    }
    let mean_fixed_effect = rows.iter().map(|&i| effects[design.groups[i]]).sum::<f64>() / n as f64;

    let mut dropped_terms = design.pre_dropped.clone();
    dropped_terms.extend(dropped_for(
        design,
        &invariant,
        DropReason::NoWithinVariation,
    ));
    dropped_terms.extend(dropped_for(design, &collinear, DropReason::Collinear));

    Ok(FitResult {
        outcome: design.outcome,
        estimator: Estimator::WithinFe,
        se_type,
        coefficients: kept
            .iter()
            .zip(ls.beta.iter().zip(&se))
            .map(|(&j, (&estimate, &std_error))| {
                (
                    design.labels[j].clone(),
                    Coefficient {
                        estimate,
                        std_error,
                    },
                )
            })
            .collect(),
        n_obs: n,
        n_households: repeated,
        n_singletons,
        df_resid: df,
        r2,
        adjusted_r2,
        dropped_terms,
        residuals,
        regressor_means: kept
            .iter()
            .map(|&j| {
                let m = rows.iter().map(|&i| design.columns[j][i]).sum::<f64>() / n as f64;
                (design.labels[j].clone(), m)
            })
            .collect(),
        mean_fixed_effect,
        fixed_effects: Some(design.group_ids.iter().cloned().zip(effects).collect()),
    })
}

/// Dispatches on `spec.estimator` with the default rank policy.
pub fn fit(design: &Design, spec: &RegressionSpec) -> Result<FitResult, FitError> {
    match spec.estimator {
        Estimator::PooledOls => fit_pooled_ols(design, spec.se_type, RankPolicy::Drop),
        Estimator::WithinFe => fit_within_fe(design, spec.se_type, RankPolicy::Drop),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn labels(v: &[&str]) -> Vec<String> {
        ids(v)
    }

    #[test]
    fn exact_line_pooled() {
        let x: Vec<f64> = (0..5).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 + 2.0 * v).collect();
        let d = Design::from_parts(
            Outcome::LnEnergy,
            Estimator::PooledOls,
            y,
            vec![vec![1.0; 5], x],
            labels(&["intercept", "x"]),
            &ids(&["a", "b", "c", "d", "e"]),
        )
        .unwrap();
        let f = fit_pooled_ols(&d, SeType::Classical, RankPolicy::Drop).unwrap();
        assert_abs_diff_eq!(f.get("intercept").unwrap().estimate, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.get("x").unwrap().estimate, 2.0, epsilon = 1e-12);
        assert!(f.residuals.iter().all(|r| r.abs() < 1e-12));
        assert_eq!(f.df_resid, 3);
    }

    #[test]
    fn hand_computed_adjusted_r2() {
        // y = [1, 3, 2, 5, 4], x1 = [1, 2, 3, 4, 5], x2 = [0, 1, 0, 1, 0].
        // Normal equations give b = (−1/15, 4/5, 5/3), RSS = 4/15, TSS = 10.
        let d = Design::from_parts(
            Outcome::LnEnergy,
            Estimator::PooledOls,
            vec![1.0, 3.0, 2.0, 5.0, 4.0],
            vec![
                vec![1.0; 5],
                vec![1.0, 2.0, 3.0, 4.0, 5.0],
                vec![0.0, 1.0, 0.0, 1.0, 0.0],
            ],
            labels(&["intercept", "x1", "x2"]),
            &ids(&["a", "b", "c", "d", "e"]),
        )
        .unwrap();
        let f = fit_pooled_ols(&d, SeType::Classical, RankPolicy::Drop).unwrap();
        assert_abs_diff_eq!(
            f.get("intercept").unwrap().estimate,
            -1.0 / 15.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(f.get("x1").unwrap().estimate, 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(f.get("x2").unwrap().estimate, 5.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.r2, 1.0 - 4.0 / 150.0, epsilon = 1e-12);
        // 1 − (1 − R²)·(n − 1)/(n − k − 1) with n = 5, k = 2
        assert_abs_diff_eq!(
            f.adjusted_r2,
            1.0 - (4.0 / 150.0) * 4.0 / 2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn duplicated_column() {
        let x = vec![1.0, 2.0, 4.0, 8.0];
        let d = Design::from_parts(
            Outcome::LnEnergy,
            Estimator::PooledOls,
            vec![1.0, 2.0, 3.0, 5.0],
            vec![vec![1.0; 4], x.clone(), x],
            labels(&["intercept", "x", "x_copy"]),
            &ids(&["a", "b", "c", "d"]),
        )
        .unwrap();
        assert_eq!(
            fit_pooled_ols(&d, SeType::Classical, RankPolicy::Strict),
            Err(FitError::RankDeficient {
                columns: vec!["x_copy".into()]
            })
        );
        let f = fit_pooled_ols(&d, SeType::Classical, RankPolicy::Drop).unwrap();
        assert_eq!(
            f.dropped_terms,
            vec![DroppedTerm {
                label: "x_copy".into(),
                reason: DropReason::Collinear
            }]
        );
        assert_eq!(f.coefficients.len(), 2);
    }

    #[test]
    fn underdetermined() {
        let d = Design::from_parts(
            Outcome::LnEnergy,
            Estimator::PooledOls,
            vec![1.0, 2.0],
            vec![vec![1.0; 2], vec![0.0, 1.0]],
            labels(&["intercept", "x"]),
            &ids(&["a", "b"]),
        )
        .unwrap();
        assert_eq!(
            fit_pooled_ols(&d, SeType::Classical, RankPolicy::Drop),
            Err(FitError::Underdetermined {
                n_obs: 2,
                n_params: 2
            })
        );
    }

    #[test]
    fn two_household_within() {
        let d = Design::from_parts(
            Outcome::LnEnergy,
            Estimator::WithinFe,
            vec![7.0, 9.0, 6.0, 10.0],
            vec![vec![1.0, 2.0, 3.0, 5.0], vec![1.0, 1.0, 0.0, 0.0]],
            labels(&["x", "male"]),
            &ids(&["hh1", "hh1", "hh2", "hh2"]),
        )
        .unwrap();
        let f = fit_within_fe(&d, SeType::Classical, RankPolicy::Drop).unwrap();
        assert_abs_diff_eq!(f.get("x").unwrap().estimate, 2.0, epsilon = 1e-12);
        assert_eq!(
            f.dropped_terms,
            vec![DroppedTerm {
                label: "male".into(),
                reason: DropReason::NoWithinVariation
            }]
        );
        let fe = f.fixed_effects.as_ref().unwrap();
        assert_abs_diff_eq!(fe["hh1"], 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fe["hh2"], 0.0, epsilon = 1e-12);
        assert_eq!(f.df_resid, 1);
    }

    #[test]
    fn within_errors() {
        let invariant = Design::from_parts(
            Outcome::LnEnergy,
            Estimator::WithinFe,
            vec![1.0, 2.0, 3.0, 4.0],
            vec![vec![1.0, 1.0, 0.0, 0.0]],
            labels(&["male"]),
            &ids(&["a", "a", "b", "b"]),
        )
        .unwrap();
        assert_eq!(
            fit_within_fe(&invariant, SeType::Classical, RankPolicy::Drop),
            Err(FitError::NoWithinVariation)
        );
        let singletons = Design::from_parts(
            Outcome::LnEnergy,
            Estimator::WithinFe,
            vec![1.0, 2.0],
            vec![vec![1.0, 3.0]],
            labels(&["x"]),
            &ids(&["a", "b"]),
        )
        .unwrap();
        assert_eq!(
            fit_within_fe(&singletons, SeType::Classical, RankPolicy::Drop),
            Err(FitError::NoRepeatedHouseholds)
        );
    }

    #[test]
    fn singletons_do_not_move_the_estimate() {
        let base_y = vec![7.0, 9.0, 6.0, 10.5, 4.0, 8.0, 9.5];
        let base_x = vec![1.0, 2.0, 3.0, 5.0, 1.0, 3.0, 4.0];
        let base_g = ids(&["a", "a", "b", "b", "c", "c", "c"]);
        let d = Design::from_parts(
            Outcome::LnEnergy,
            Estimator::WithinFe,
            base_y.clone(),
            vec![base_x.clone()],
            labels(&["x"]),
            &base_g,
        )
        .unwrap();
        let mut y = base_y;
        y.push(100.0);
        let mut x = base_x;
        x.push(-40.0);
        let mut g = base_g;
        g.push("lonely".into());
        let with_single = Design::from_parts(
            Outcome::LnEnergy,
            Estimator::WithinFe,
            y,
            vec![x],
            labels(&["x"]),
            &g,
        )
        .unwrap();
        let a = fit_within_fe(&d, SeType::Classical, RankPolicy::Drop).unwrap();
        let b = fit_within_fe(&with_single, SeType::Classical, RankPolicy::Drop).unwrap();
        assert_eq!(a.get("x"), b.get("x"));
        assert_eq!(b.n_singletons, 1);
        assert_eq!(b.n_obs, 7);
        assert_eq!(b.residuals[7], 0.0);
        for h in 0..3 {
            let s: f64 = b
                .residuals
                .iter()
                .zip(&with_single.groups)
                .filter(|(_, &g)| g == h)
                .map(|(r, _)| r)
                .sum();
            assert!(s.abs() < 1e-9);
        }
    }
}
