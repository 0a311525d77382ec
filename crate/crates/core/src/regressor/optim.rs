use super::{Gradients, RegressorConfig, VisualRegressor};

/// Step schedule `initial_lr * lr_factor^floor(iteration / lr_step_iters)`.
pub fn learning_rate(cfg: &RegressorConfig, iteration: usize) -> f64 {
    cfg.initial_lr * cfg.lr_factor.powi((iteration / cfg.lr_step_iters) as i32)
}

/// Momentum SGD: `v <- momentum v - lr(iteration) g`, then `params <- params + v`.
pub fn sgd_step(model: &mut VisualRegressor, grads: &Gradients, iteration: usize) {
    let lr = learning_rate(&model.config, iteration);
    let mu = model.config.momentum;
    for ((layer, vel), g) in model.layers.iter_mut().zip(&mut model.velocity).zip(&grads.layers) {
        vel.weights.zip_mut_with(&g.weights, |v, &g| *v = mu * *v - lr * g);
        vel.bias.zip_mut_with(&g.bias, |v, &g| *v = mu * *v - lr * g);
        layer.weights += &vel.weights;
        layer.bias += &vel.bias;
    }
    model.iteration = iteration + 1;
}
