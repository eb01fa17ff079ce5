//! Scratch probe of DLSTM training dynamics (not shipped).
use flarecast_core::models::{DlstmModelConfig, ModelConfig};
use flarecast_core::neuralnet::{bce_loss_grad, Network, Optimizer, OptimizerKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let w = 8;
    let config = ModelConfig::Dlstm(DlstmModelConfig {
        input_size: 1, kernel: 3, second_kernel: 3,
        front_width: 4, lstm_hidden: 8, dense_hidden: 4,
    });
    let mut model = config.build(11).unwrap();
    let mut opt = Optimizer::new(OptimizerKind::Adam, 0.03);
    for step in 0..200 {
        let net = model.as_network_mut();
        net.zero_grad();
        let mut loss = 0.0;
        for i in 0..16 {
            let large = i % 2 == 0;
            let mut x: Vec<f64> = (0..w).map(|_| rng.gen_range(0.0..0.75)).collect();
            if large { let p = rng.gen_range(0..w); x[p] = rng.gen_range(0.85..1.0); }
            let y = if large { 1.0 } else { 0.0 };
            let p = net.forward(&x, w).unwrap();
            loss += flarecast_core::neuralnet::bce_loss(p, y);
            net.backward(bce_loss_grad(p, y) / 16.0).unwrap();
        }
        if step % 40 == 0 {
            let gnorms: Vec<(String, f64)> = net.parameters().iter()
                .map(|p| (p.name.clone(), p.grad.data().iter().map(|g| g*g).sum::<f64>().sqrt()))
                .collect();
            println!("step {step}: loss {:.4}", loss / 16.0);
            for (n, g) in gnorms { println!("   |grad {n}| = {g:.6}"); }
        }
        opt.step(&mut net.parameters_mut()).unwrap();
    }
}
