use alp_core::learner::{transition_scores, update_trans, Transition};
use alp_core::perception::mle::{blend_update, fit_mle};
use alp_core::perception::pdf::FamilyKind;
use alp_core::harness::load_model;
use alp_core::{Assignment, Pdf};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Gamma, Normal};

const N: usize = 10_000;

fn draw<D: Distribution<f64>>(d: D, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..N).map(|_| d.sample(&mut rng)).collect()
}

#[test]
fn gaussian_recovery() {
    for (seed, (mu, sigma)) in [(0.5, 0.25), (1.5, 0.25), (2.5, 0.25)].into_iter().enumerate() {
        let xs = draw(Normal::new(mu, sigma).unwrap(), seed as u64);
        let [m, s] = fit_mle(FamilyKind::Gaussian, &xs).unwrap().params();
        assert!((m - mu).abs() <= 0.02, "mu {m} vs {mu}");
        assert!((s - sigma).abs() <= 0.02, "sigma {s} vs {sigma}");
    }
}

#[test]
fn beta_recovery() {
    for (seed, (a, b)) in [(1.0, 5.0), (5.0, 1.0), (2.0, 2.0)].into_iter().enumerate() {
        let xs = draw(Beta::new(a, b).unwrap(), 10 + seed as u64);
        let p = fit_mle(FamilyKind::Beta, &xs).unwrap();
        let truth = a / (a + b);
        assert!((p.mean() - truth).abs() <= 0.02, "mean {} vs {truth}", p.mean());
    }
}

#[test]
fn gamma_recovery() {
    for (seed, (k, theta)) in [(1.0, 0.1), (100.0, 0.01), (200.0, 0.01)].into_iter().enumerate() {
        let xs = draw(Gamma::new(k, theta).unwrap(), 20 + seed as u64);
        let p = fit_mle(FamilyKind::Gamma, &xs).unwrap();
        let truth = k * theta;
        assert!((p.mean() - truth).abs() <= 0.02, "mean {} vs {truth}", p.mean());
    }
}

#[test]
fn blend_closed_forms() {
    let cases = [
        (Pdf::gaussian(0.5, 0.25).unwrap(), Pdf::gaussian(1.5, 0.75).unwrap(), Pdf::gaussian(1.0, 0.5).unwrap()),
        (Pdf::beta(1.0, 5.0).unwrap(), Pdf::beta(5.0, 1.0).unwrap(), Pdf::beta(3.0, 3.0).unwrap()),
        // shape 50.5, rate (10 + 100) / 2
        (Pdf::gamma(1.0, 0.1).unwrap(), Pdf::gamma(100.0, 0.01).unwrap(), Pdf::gamma(50.5, 1.0 / 55.0).unwrap()),
    ];
    for (old, fitted, half) in cases {
        assert_eq!(blend_update(&old, &fitted, 1.0).unwrap(), old);
        assert_eq!(blend_update(&old, &fitted, 0.0).unwrap(), fitted);
        assert_eq!(blend_update(&old, &fitted, 0.5).unwrap(), half);
    }
    assert!(blend_update(&Pdf::beta(1.0, 1.0).unwrap(), &Pdf::gaussian(0.0, 1.0).unwrap(), 0.5).is_err());
}

fn prior() -> alp_core::DomainModel {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/rpc_prior.toml");
    load_model(path.as_ref(), false).unwrap().model
}

#[test]
fn transition_score_table() {
    let m = prior();
    let s = |d: &str| Assignment::from_digits(d).unwrap();
    let hist = vec![Transition { from: s("010"), action: "E".into(), to: s("130") }];
    let others: Vec<Assignment> = m
        .enumerate_states()
        .into_iter()
        .filter(|t| *t != s("130") && *t != s("110"))
        .collect();
    let mut targets = vec![s("130"), s("110")];
    targets.extend(others.iter().cloned());
    let table = [(0.0, [1.0, 0.0]), (0.5, [0.5, 0.5]), (1.0, [0.0, 1.0])];
    for (alpha, [observed, predicted]) in table {
        let got = transition_scores(&m, &hist, &s("010"), "E", alpha, &targets).unwrap();
        assert_eq!(got[0], observed, "alpha {alpha}");
        assert_eq!(got[1], predicted, "alpha {alpha}");
        assert!(got[2..].iter().all(|&x| x == 0.0), "alpha {alpha}");
    }
    for (alpha, unchanged) in [(0.0, false), (0.25, false), (0.5, true), (0.75, true), (1.0, true)] {
        let (m2, info) = update_trans(&m, &hist, alpha).unwrap();
        assert_eq!(!info.changed, unchanged, "alpha {alpha}");
        let next = m2.apply_action(&s("010"), "E").unwrap();
        assert_eq!(next, if unchanged { s("110") } else { s("130") });
    }
}
