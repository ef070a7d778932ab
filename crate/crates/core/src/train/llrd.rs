//! Layer-wise learning-rate decay.

use crate::model::{ParamId, ParamStore};

use super::TrainError;

/// Tensors sharing one depth and therefore one learning rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGroup {
    pub depth: usize,
    pub lr: f64,
    pub tensors: Vec<ParamId>,
}

/// One group per depth, shallowest (head, depth 0) first; depth `k` trains at
/// `base_lr · alpha^k`.
pub fn llrd_param_groups(params: &ParamStore, base_lr: f64, alpha: f64) -> Result<Vec<ParamGroup>, TrainError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(TrainError::InvalidConfig(format!("llrd alpha {alpha} outside (0, 1]")));
    }
    let mut groups: Vec<ParamGroup> = Vec::new();
    for id in params.ids() {
        let t = params.get(id);
        let depth = t.depth.ok_or_else(|| TrainError::MissingDepth(t.name.clone()))?;
        if groups.len() <= depth {
            groups.resize_with(depth + 1, || ParamGroup {
                depth: 0,
                lr: 0.0,
                tensors: Vec::new(),
            });
        }
        groups[depth].tensors.push(id);
    }
    Ok(groups
        .into_iter()
        .enumerate()
        .filter(|(_, g)| !g.tensors.is_empty())
        .map(|(depth, g)| ParamGroup {
            depth,
            lr: base_lr * alpha.powi(depth as i32),
            tensors: g.tensors,
        })
        .collect())
}

/// Per-tensor learning rate, indexed like `params.tensors`.
pub fn tensor_learning_rates(groups: &[ParamGroup], num_tensors: usize) -> Vec<f64> {
    let mut lrs = vec![0.0; num_tensors];
    for g in groups {
        for id in &g.tensors {
            lrs[id.0] = g.lr;
        }
    }
    lrs
}
