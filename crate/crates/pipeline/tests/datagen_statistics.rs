//! Statistical properties of initial-condition generation.

use automata_pipeline::OrderParameters;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Kolmogorov-Smirnov test of the breakpoint draws against uniform [0, 1].
/// Critical value at alpha = 0.001 is 1.9495 / sqrt(n).
#[test]
fn breakpoint_draws_are_uniform() {
    let n = 20_000usize;
    let mut rng = ChaCha12Rng::seed_from_u64(0x5EED);
    let mut draws: Vec<f64> = (0..n)
        .map(|_| OrderParameters::generate(&mut rng).deltas()[0])
        .collect();
    draws.sort_by(f64::total_cmp);

    let mut d_stat: f64 = 0.0;
    for (i, &x) in draws.iter().enumerate() {
        let lo = i as f64 / n as f64;
        let hi = (i + 1) as f64 / n as f64;
        d_stat = d_stat.max((x - lo).abs()).max((hi - x).abs());
    }
    let critical = 1.9495 / (n as f64).sqrt();
    assert!(
        d_stat < critical,
        "KS statistic {d_stat:.5} exceeds critical value {critical:.5}"
    );
}

/// Realized IC densities track their breakpoints: with p1 = delta_0 the
/// expected live fraction is 1 - p1.
#[test]
fn densities_track_order_parameters() {
    let mut rng = ChaCha12Rng::seed_from_u64(0xD0E5);
    for p1 in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let params = OrderParameters::from_p1(p1);
        let mut total = 0.0;
        let reps = 50;
        for _ in 0..reps {
            let g = automata_pipeline::generate_ic(&params, 16, 16, &mut rng);
            total += g.density();
        }
        let mean = total / f64::from(reps);
        // sd of the mean is sqrt(p(1-p)/256/reps) < 0.005; allow 6 sigma.
        assert!(
            (mean - (1.0 - p1)).abs() < 0.03,
            "density {mean:.4} far from expected {:.4}",
            1.0 - p1
        );
    }
}
