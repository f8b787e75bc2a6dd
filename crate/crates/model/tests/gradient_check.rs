//! Finite-difference verification of the hand-written backward pass.
//!
//! The analytic gradient oracle is central differencing of the loss in f64:
//! independent of the backward code path, it catches any sign, transpose, or
//! missing-term error in backpropagation.

use automata_model::{uniform_weights, ModelConfig, TrainConfig, Transformer};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn mini_config(dim: usize, depth: usize, heads: usize, max_seq: usize) -> ModelConfig {
    ModelConfig {
        vocab_size: 22,
        max_seq_len: max_seq,
        dim,
        depth,
        heads,
        ..ModelConfig::default()
    }
}

/// Relative error with a floor so near-zero gradients compare sensibly.
fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

fn check_gradients(cfg: ModelConfig, seq_len: usize, coords_wanted: usize, seed: u64) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let model = Transformer::<f64>::init_full_random(cfg.clone(), 0.2, &mut rng).unwrap();

    let tokens: Vec<u8> = (0..seq_len + 1)
        .map(|_| rng.random_range(0..cfg.vocab_size as u8))
        .collect();
    let input = &tokens[..seq_len];
    let targets = &tokens[1..];
    let weights = uniform_weights::<f64>(seq_len);

    let (_, grads) = model.loss_and_grad(input, targets, &weights).unwrap();
    let analytic: Vec<(String, ndarray::Array2<f64>)> = grads
        .named_tensors()
        .into_iter()
        .map(|(n, t)| (n, t.clone()))
        .collect();

    // Sample coordinates uniformly across all tensors. The relative bias
    // table is mostly untouched at short sequence lengths (distances beyond
    // seq_len never receive gradient), so restrict its columns to the
    // exercised range.
    let mut coords: Vec<(usize, usize, usize)> = Vec::new();
    for (ti, (name, tensor)) in analytic.iter().enumerate() {
        let cols = if name.ends_with("rel_bias") {
            seq_len
        } else {
            tensor.ncols()
        };
        for _ in 0..(coords_wanted / analytic.len() + 2) {
            coords.push((
                ti,
                rng.random_range(0..tensor.nrows()),
                rng.random_range(0..cols),
            ));
        }
    }
    assert!(coords.len() >= coords_wanted);

    let h = 1e-5;
    let mut checked = 0usize;
    let mut worst: f64 = 0.0;
    for (ti, r, c) in coords {
        let name = analytic[ti].0.clone();
        let expected = analytic[ti].1[[r, c]];

        let mut probe = model.clone();
        {
            let mut tensors = probe.named_tensors_mut();
            tensors[ti].1[[r, c]] += h;
        }
        let plus = probe.loss(input, targets, &weights).unwrap();
        {
            let mut tensors = probe.named_tensors_mut();
            tensors[ti].1[[r, c]] -= 2.0 * h;
        }
        let minus = probe.loss(input, targets, &weights).unwrap();
        let fd = (plus - minus) / (2.0 * h);

        let err = rel_err(expected, fd);
        worst = worst.max(err);
        assert!(
            err <= 1e-3,
            "{name}[{r},{c}]: analytic {expected:.9e} vs finite-difference {fd:.9e} (rel {err:.3e})"
        );
        checked += 1;
    }
    assert!(checked >= coords_wanted);
    println!("checked {checked} coordinates, worst relative error {worst:.3e}");
}

#[test]
fn miniature_model_gradients_match_finite_differences() {
    // Width 8, single layer, one head, sequence length 8.
    check_gradients(mini_config(8, 1, 1, 16), 8, 100, 0xFD01);
}

#[test]
fn multi_head_multi_layer_gradients_match_finite_differences() {
    check_gradients(mini_config(12, 2, 3, 16), 10, 100, 0xFD02);
}

#[test]
fn suffix_only_loss_gradients_match_finite_differences() {
    let cfg = mini_config(8, 1, 1, 16);
    let mut rng = ChaCha12Rng::seed_from_u64(0xFD03);
    let model = Transformer::<f64>::init_full_random(cfg.clone(), 0.2, &mut rng).unwrap();
    let tokens: Vec<u8> = (0..9).map(|_| rng.random_range(0..22u8)).collect();
    let input = &tokens[..8];
    let targets = &tokens[1..];
    let weights = automata_model::suffix_weights::<f64>(8, 5);

    let (_, grads) = model.loss_and_grad(input, targets, &weights).unwrap();
    let analytic = grads.named_tensors()[0].1.clone(); // wte

    let h = 1e-5;
    for _ in 0..30 {
        let r = rng.random_range(0..22usize);
        let c = rng.random_range(0..8usize);
        let mut probe = model.clone();
        probe.named_tensors_mut()[0].1[[r, c]] += h;
        let plus = probe.loss(input, targets, &weights).unwrap();
        probe.named_tensors_mut()[0].1[[r, c]] -= 2.0 * h;
        let minus = probe.loss(input, targets, &weights).unwrap();
        let fd = (plus - minus) / (2.0 * h);
        assert!(
            rel_err(analytic[[r, c]], fd) <= 1e-3,
            "wte[{r},{c}]: {} vs {fd}",
            analytic[[r, c]]
        );
    }
}

#[test]
fn config_validation_rejects_bad_shapes() {
    let bad = mini_config(10, 1, 3, 16); // 10 % 3 != 0
    assert!(bad.validate().is_err());
    assert!(mini_config(8, 1, 1, 16).validate().is_ok());

    let mut tc = TrainConfig::default();
    tc.mask_prob = 1.5;
    assert!(tc.validate().is_err());
}
