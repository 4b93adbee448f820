use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sapt_core::proposals::PriorBounds;
use sapt_core::surrogate::{fit, sgd_step, AdamState, NormalizationSpec, OptimizerKind, SurrogateNetwork, TrainConfig, TrainMode};

/// Straightforward re-derivation of the forward pass from the documented flat layout.
fn oracle_forward(p: &[f64], dim: usize, hidden: usize, x: &[f64]) -> (f64, Vec<f64>) {
    let (b, v, o) = (dim * hidden, dim * hidden + hidden, dim * hidden + 2 * hidden);
    let mut pre = vec![0.0; hidden];
    let mut out = p[o];
    for h in 0..hidden {
        let mut z = p[b + h];
        for d in 0..dim {
            z += p[d * hidden + h] * x[d];
        }
        pre[h] = z;
        out += p[v + h] * z.max(0.0);
    }
    (out, pre)
}

fn oracle_loss(p: &[f64], dim: usize, hidden: usize, xs: &[Vec<f64>], ys: &[f64]) -> f64 {
    xs.iter().zip(ys).map(|(x, y)| (oracle_forward(p, dim, hidden, x).0 - y).powi(2)).sum::<f64>() / xs.len() as f64
}

/// Random net and batch whose hidden pre-activations stay clear of the rectifier kink,
/// where a finite difference is not a derivative.
fn random_case(rng: &mut ChaCha8Rng) -> (SurrogateNetwork<f64>, Vec<Vec<f64>>, Vec<f64>) {
    let dim = rng.random_range(1..=6);
    let hidden = rng.random_range(1..=12);
    let net = SurrogateNetwork::<f64>::init(dim, hidden, rng);
    let n = rng.random_range(1..=16);
    let mut xs = Vec::new();
    while xs.len() < n {
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (_, pre) = oracle_forward(net.params(), dim, hidden, &x);
        if pre.iter().all(|z| z.abs() > 1e-3) {
            xs.push(x);
        }
    }
    let ys = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    (net, xs, ys)
}

#[test]
fn backprop_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let h = 1e-5;
    for _ in 0..100 {
        let (net, xs, ys) = random_case(&mut rng);
        let (dim, hidden) = (net.input_dim(), net.hidden_dim());
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let grad = net.gradient(&refs, &ys).unwrap();
        let mut p = net.params().to_vec();
        for k in 0..p.len() {
            let orig = p[k];
            p[k] = orig + h;
            let up = oracle_loss(&p, dim, hidden, &xs, &ys);
            p[k] = orig - h;
            let down = oracle_loss(&p, dim, hidden, &xs, &ys);
            p[k] = orig;
            let fd = (up - down) / (2.0 * h);
            let rel = (grad[k] - fd).abs() / grad[k].abs().max(fd.abs()).max(1e-6);
            assert!(rel < 1e-4, "weight {k}: backprop {} vs fd {fd} (rel {rel})", grad[k]);
        }
    }
}

#[test]
fn small_step_gradient_descent_never_increases_mse() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..20 {
        let (mut net, xs, ys) = random_case(&mut rng);
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let mut prev = net.mse(&xs, &ys).unwrap();
        for _ in 0..10 {
            let g = net.gradient(&refs, &ys).unwrap();
            sgd_step(net.params_mut(), &g, 1e-4);
            let now = net.mse(&xs, &ys).unwrap();
            assert!(now <= prev, "mse rose from {prev} to {now}");
            prev = now;
        }
    }
}

#[test]
fn learns_a_linear_target() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let xs: Vec<Vec<f64>> = (0..256).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
    let ys: Vec<f64> = xs.iter().map(|x| 0.3 * x[0] + 0.2).collect();
    let mut cfg = TrainConfig::new(OptimizerKind::Adam, TrainMode::FromScratch);
    cfg.hidden = 8;
    cfg.epochs = 200;
    let mut net = SurrogateNetwork::<f64>::init(2, 8, &mut rng);
    let mut adam = AdamState::new(net.params().len(), cfg.learning_rate);
    let mse = fit(&mut net, &mut adam, &xs, &ys, &cfg, &mut rng).unwrap();
    assert!(mse < 1e-3, "train mse {mse}");
}

#[test]
fn learns_in_single_precision() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let xs: Vec<Vec<f32>> = (0..128).map(|_| vec![rng.random::<f32>()]).collect();
    let ys: Vec<f32> = xs.iter().map(|x| 0.3 * x[0] + 0.2).collect();
    let mut cfg = TrainConfig::new(OptimizerKind::Adam, TrainMode::FromScratch);
    cfg.hidden = 8;
    cfg.epochs = 200;
    let mut net = SurrogateNetwork::<f32>::init(1, 8, &mut rng);
    let mut adam = AdamState::new(net.params().len(), 1e-3);
    assert!(fit(&mut net, &mut adam, &xs, &ys, &cfg, &mut rng).unwrap() < 1e-3);
}

proptest! {
    #[test]
    fn normalization_round_trip(lo in -1e6f64..0.0, span in 1e-3f64..1e6, t in 0.0f64..=1.0) {
        let bounds = PriorBounds::new(vec![0.0], vec![1.0]).unwrap();
        let mut spec = NormalizationSpec::new(&bounds);
        spec.observe(lo);
        spec.observe(lo + span);
        let ll = lo + t * span;
        let back = spec.denormalize_ll(spec.normalize_ll(ll).unwrap()).unwrap();
        prop_assert!((back - ll).abs() <= 1e-9 * ll.abs().max(1.0));
    }

    #[test]
    fn normalized_parameters_lie_in_unit_box(u in proptest::collection::vec(0.0f64..=1.0, 3)) {
        let bounds = PriorBounds::new(vec![0.0, 3e-6, 0.1], vec![3.0, 7e-6, 1.7]).unwrap();
        let theta: Vec<f64> = (0..3).map(|j| bounds.lower()[j] + u[j] * bounds.width(j)).collect();
        let spec = NormalizationSpec::new(&bounds);
        for z in spec.normalize_theta(&theta) {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&z));
        }
    }
}
