//! Multinomial logistic regression with an L2 penalty on the weights.
//!
//! Minimizes `C · Σ wᵢ · CEᵢ + ½‖W‖²` (intercepts unpenalized) with L-BFGS,
//! where `wᵢ` is the balanced weight of sample i's class.

use argmin::core::{CostFunction, Error as ArgminError, Executor, Gradient, State};
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::quasinewton::LBFGS;

use super::classical::{balanced_class_weights, check_aligned, LabelIndex};
use super::{BaselineError, SparseMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct LogRegConfig {
    /// Inverse regularization strength.
    pub c: f64,
    pub balanced: bool,
    pub max_iter: u64,
    /// Stop once the gradient norm of the averaged objective falls below this.
    pub tol: f64,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            balanced: true,
            max_iter: 1000,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LogisticRegression {
    cfg: LogRegConfig,
    classes: LabelIndex,
    /// `k × d`, row per class position.
    coef: Vec<Vec<f64>>,
    intercept: Vec<f64>,
    iterations: u64,
}

struct Objective<'a> {
    x: &'a SparseMatrix,
    y: &'a [usize],
    w: &'a [f64],
    k: usize,
    /// `1 / (C · Σw)`
    l2: f64,
    total_weight: f64,
}

impl Objective<'_> {
    fn logits(&self, theta: &[f64], row: usize) -> Vec<f64> {
        let d = self.x.n_cols;
        let bias = &theta[self.k * d..];
        (0..self.k)
            .map(|c| self.x.dot_dense(row, &theta[c * d..(c + 1) * d]) + bias[c])
            .collect()
    }

    fn evaluate(&self, theta: &[f64], want_grad: bool) -> (f64, Vec<f64>) {
        let d = self.x.n_cols;
        let k = self.k;
        let mut grad = if want_grad { vec![0.0; theta.len()] } else { Vec::new() };
        let mut loss = 0.0;
        for i in 0..self.x.n_rows() {
            let z = self.logits(theta, i);
            let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
            let wi = self.w[i] / self.total_weight;
            loss += wi * (lse - z[self.y[i]]);
            if want_grad {
                for c in 0..k {
                    let r = wi * ((z[c] - lse).exp() - if c == self.y[i] { 1.0 } else { 0.0 });
                    for &(j, v) in &self.x.rows[i] {
                        grad[c * d + j] += r * v;
                    }
                    grad[k * d + c] += r;
                }
            }
        }
        let coef = &theta[..k * d];
        loss += 0.5 * self.l2 * coef.iter().map(|v| v * v).sum::<f64>();
        if want_grad {
            for (g, v) in grad.iter_mut().zip(coef) {
                *g += self.l2 * v;
            }
        }
        (loss, grad)
    }
}

fn finite(theta: &[f64]) -> Result<(), ArgminError> {
    if theta.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(argmin::core::ArgminError::PotentialBug {
            text: "non-finite parameters".into(),
        }
        .into())
    }
}

impl CostFunction for Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, theta: &Self::Param) -> Result<f64, ArgminError> {
        finite(theta)?;
        Ok(self.evaluate(theta, false).0)
    }
}

impl Gradient for Objective<'_> {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, theta: &Self::Param) -> Result<Vec<f64>, ArgminError> {
        finite(theta)?;
        Ok(self.evaluate(theta, true).1)
    }
}

impl LogisticRegression {
    pub fn fit(x: &SparseMatrix, labels: &[usize], cfg: &LogRegConfig) -> Result<Self, BaselineError> {
        check_aligned(x, labels)?;
        if !(cfg.c > 0.0) {
            return Err(BaselineError::InvalidConfig(format!("logreg C must be positive, got {}", cfg.c)));
        }
        let classes = LabelIndex::fit(labels)?;
        let k = classes.len();
        let y = classes.encode(labels);
        let w: Vec<f64> = if cfg.balanced {
            let cw = balanced_class_weights(&y, k);
            y.iter().map(|&c| cw[c]).collect()
        } else {
            vec![1.0; y.len()]
        };
        let total_weight: f64 = w.iter().sum();
        let objective = Objective {
            x,
            y: &y,
            w: &w,
            k,
            l2: 1.0 / (cfg.c * total_weight),
            total_weight,
        };
        let d = x.n_cols;
        let solver = LBFGS::new(MoreThuenteLineSearch::new(), 10)
            .with_tolerance_grad(cfg.tol)
            .map_err(|e| BaselineError::Optimizer(e.to_string()))?;
        let result = Executor::new(objective, solver)
            .configure(|s| s.param(vec![0.0; k * (d + 1)]).max_iters(cfg.max_iter))
            .run()
            .map_err(|e| BaselineError::Optimizer(e.to_string()))?;
        let state = result.state();
        let theta = state
            .get_best_param()
            .ok_or_else(|| BaselineError::Optimizer("no parameters returned".into()))?;
        let iterations = state.get_iter();
        if !theta.iter().all(|v| v.is_finite()) {
            return Err(BaselineError::Optimizer("non-finite coefficients".into()));
        }
        Ok(Self {
            cfg: cfg.clone(),
            classes,
            coef: (0..k).map(|c| theta[c * d..(c + 1) * d].to_vec()).collect(),
            intercept: theta[k * d..].to_vec(),
            iterations,
        })
    }

    pub fn config(&self) -> &LogRegConfig {
        &self.cfg
    }

    pub fn classes(&self) -> &[usize] {
        self.classes.classes()
    }

    pub fn coef(&self) -> &[Vec<f64>] {
        &self.coef
    }

    pub fn intercept(&self) -> &[f64] {
        &self.intercept
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    pub fn decision_function(&self, x: &SparseMatrix) -> Vec<Vec<f64>> {
        (0..x.n_rows())
            .map(|i| {
                self.coef
                    .iter()
                    .zip(&self.intercept)
                    .map(|(w, b)| x.dot_dense(i, w) + b)
                    .collect()
            })
            .collect()
    }

    /// Rows follow [`Self::classes`] order.
    pub fn predict_proba(&self, x: &SparseMatrix) -> Vec<Vec<f64>> {
        self.decision_function(x)
            .into_iter()
            .map(|z| {
                let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
                let s: f64 = e.iter().sum();
                e.into_iter().map(|v| v / s).collect()
            })
            .collect()
    }

    pub fn predict(&self, x: &SparseMatrix) -> Vec<usize> {
        self.decision_function(x)
            .iter()
            .map(|z| self.classes.decode(crate::model::argmax(ndarray::ArrayView1::from(z.as_slice()))))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::super::classical::fixtures;
    use super::*;

    // Reference values from scikit-learn 1.7.2 LogisticRegression(C=1,
    // class_weight="balanced", tol=1e-10) on the same TF-IDF matrix.
    const INTERCEPT: [f64; 3] = [0.021313970712327258, 0.07451101062914124, -0.09582498134146859];
    const COEF: [(&str, [f64; 3]); 4] = [
        ("comment", [-0.38146834570095195, -0.3963629612947318, 0.7778313069956837]),
        ("depends", [-0.2483581088702096, 0.47462538856707703, -0.22626727969686747]),
        ("yes", [0.4331330127212438, -0.23094118416308668, -0.2021918285581572]),
        ("support", [0.3078924752868614, -0.16419890236860485, -0.14369357291825655]),
    ];
    const PROBA: [[f64; 3]; 4] = [
        [0.528164526534695, 0.25192778549024764, 0.21990768797505744],
        [0.24494883179964694, 0.5323120493380472, 0.22273911886230577],
        [0.2051542067979645, 0.2131645385516443, 0.5816812546503912],
        [0.4025104145918738, 0.3223479729840478, 0.27514161242407836],
    ];

    #[test]
    fn matches_reference_solution() {
        let (v, x, y, xt) = fixtures::twelve();
        assert_eq!(v.vocabulary().len(), 45);
        let m = LogisticRegression::fit(&x, &y, &LogRegConfig::default()).unwrap();
        for (c, b) in INTERCEPT.iter().enumerate() {
            assert!((m.intercept()[c] - b).abs() < 1e-6, "intercept {c}: {}", m.intercept()[c]);
        }
        for (term, want) in COEF {
            let j = v.term_index(term).unwrap();
            for c in 0..3 {
                assert!((m.coef()[c][j] - want[c]).abs() < 1e-6, "{term}[{c}] = {}", m.coef()[c][j]);
            }
        }
        let proba = m.predict_proba(&xt);
        for (row, want) in proba.iter().zip(PROBA) {
            for c in 0..3 {
                assert!((row[c] - want[c]).abs() < 1e-6);
            }
        }
        assert_eq!(m.predict(&xt), vec![0, 1, 2, 0]);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (_, x, y, _) = fixtures::twelve();
        let w: Vec<f64> = (0..y.len()).map(|i| 0.5 + i as f64 * 0.1).collect();
        let obj = Objective {
            x: &x,
            y: &y,
            w: &w,
            k: 3,
            l2: 0.3,
            total_weight: w.iter().sum(),
        };
        let theta: Vec<f64> = (0..3 * (x.n_cols + 1)).map(|i| ((i * 7919) % 13) as f64 / 13.0 - 0.5).collect();
        let (_, g) = obj.evaluate(&theta, true);
        let h = 1e-6;
        for j in (0..theta.len()).step_by(7) {
            let mut up = theta.clone();
            up[j] += h;
            let mut dn = theta.clone();
            dn[j] -= h;
            let fd = (obj.evaluate(&up, false).0 - obj.evaluate(&dn, false).0) / (2.0 * h);
            assert!((fd - g[j]).abs() < 1e-7, "param {j}: {fd} vs {}", g[j]);
        }
    }

    #[test]
    fn separable_set_fits_exactly_and_is_deterministic() {
        let (_, x, y, xt) = fixtures::twelve();
        let cfg = LogRegConfig {
            c: 100.0,
            ..LogRegConfig::default()
        };
        let a = LogisticRegression::fit(&x, &y, &cfg).unwrap();
        assert_eq!(a.predict(&x), y);
        let b = LogisticRegression::fit(&x, &y, &cfg).unwrap();
        assert_eq!(a.predict_proba(&xt), b.predict_proba(&xt));
    }

    #[test]
    fn rejects_bad_input() {
        let (_, x, y, _) = fixtures::twelve();
        assert!(matches!(
            LogisticRegression::fit(&x, &y[..5], &LogRegConfig::default()),
            Err(BaselineError::LengthMismatch { .. })
        ));
        assert!(matches!(
            LogisticRegression::fit(&x, &[1; 12], &LogRegConfig::default()),
            Err(BaselineError::SingleClass(1))
        ));
    }
}
