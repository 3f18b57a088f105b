use mentrot_core::probe::{Mode, ProbeModel, ProbeShape};
use mentrot_core::rng::Rng;

fn loss_at(model: &ProbeModel<f64>, z1: &[f64], z2: &[f64], y: &[u8]) -> f64 {
    let f = model.forward_cached(z1, z2, Mode::Train).unwrap();
    ProbeModel::loss(&f, y)
}

/// Largest relative error between analytic and central-difference
/// gradients, with the step scaled to each parameter's magnitude.
pub fn max_rel_error(seed: u64, input: usize, hidden: usize, batch: usize) -> (f64, usize) {
    let mut rng = Rng::new(seed);
    let mut model = ProbeModel::<f64>::init(ProbeShape { input, hidden, proj: 7 }, &mut rng);
    // Move batch-norm parameters away from 1 / 0 so their gradients are generic.
    let l = model.layout.clone();
    for i in l.gamma.clone().chain(l.beta.clone()) {
        model.params[i] += rng.uniform_range(-0.3, 0.3);
    }
    let z1: Vec<f64> = (0..batch * input).map(|_| rng.normal()).collect();
    let z2: Vec<f64> = (0..batch * input).map(|_| rng.normal()).collect();
    let y: Vec<u8> = (0..batch).map(|i| (i % 2) as u8).collect();

    let f = model.forward_cached(&z1, &z2, Mode::Train).unwrap();
    let grad = model.backward(&f, &y, Mode::Train);

    let mut worst = (0.0f64, 0usize);
    for i in 0..model.params.len() {
        let theta = model.params[i];
        let h = 1e-5 * theta.abs().max(1.0);
        let mut m = model.clone();
        m.params[i] = theta + h;
        let up = loss_at(&m, &z1, &z2, &y);
        m.params[i] = theta - h;
        let down = loss_at(&m, &z1, &z2, &y);
        let numeric = (up - down) / (2.0 * h);
        let denom = grad[i].abs().max(numeric.abs()).max(1e-7);
        let rel = (grad[i] - numeric).abs() / denom;
        if rel > worst.0 {
            worst = (rel, i);
        }
    }
    worst
}
