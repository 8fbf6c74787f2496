mod common;

use common::*;
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use resolvent_order::certify::certify_fne;
use resolvent_order::gallery::{ball_chain_eval, rotation_window, scaled_rotations};
use resolvent_order::linops::{OperatorExpr, Vector};
use resolvent_order::prox_catalog::ConvexAtom;
use resolvent_order::resolvent_calculus::{resolvent, MonotoneMatrix};
use resolvent_order::sampling::{sample_point, SamplerConfig};

#[test]
fn moreau_identity_against_conjugate_table() {
    let cfg = SamplerConfig::with_seed(5);
    for (name, f) in catalog() {
        let conj = conjugate(&f);
        for i in 0..200 {
            let x = sample_point(&cfg, f.dim(), i);
            let xv = vec_of(x.clone());
            let p = dv(&f.prox(&xv).unwrap());
            let sum = &p + (conj.prox)(&x);
            assert!((sum - &x).norm() <= 1e-8, "{name}: prox + conjugate prox != x");
            let total = f.envelope(&xv).unwrap() + conj.envelope(&x);
            assert!((total - 0.5 * x.norm_squared()).abs() <= 1e-8, "{name}: envelope identity off");
        }
    }
}

#[test]
fn prox_beats_random_search() {
    let cfg = SamplerConfig::with_seed(6);
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    for (name, f) in catalog() {
        for i in 0..10 {
            let x = vec_of(sample_point(&cfg, f.dim(), i));
            let margin = brute_force_margin(&f, &x, 2000, &mut rng);
            assert!(margin >= -1e-6, "{name}: search beat prox by {margin}");
        }
    }
}

#[test]
fn shifted_prox_matches_grid_search() {
    // g(y) = λ|y − c| − c·y + γ on R, minimized on a fine grid then refined
    let lambda = 0.8;
    for &(c, gamma) in &[(1.5, 0.0), (-2.0, 3.0), (0.3, -1.0)] {
        let f = ConvexAtom::shifted(ConvexAtom::l1_norm(1, lambda).unwrap(), v(&[c]), gamma).unwrap();
        for &x in &[-4.0, -0.5, 0.0, 0.7, 2.2, 6.0] {
            let phi = |y: f64| lambda * (y - c).abs() - c * y + gamma + 0.5 * (x - y) * (x - y);
            let (mut lo, mut hi) = (x - 20.0, x + 20.0);
            for _ in 0..6 {
                let steps = 2000;
                let h = (hi - lo) / steps as f64;
                let best = (0..=steps)
                    .map(|k| lo + k as f64 * h)
                    .min_by(|a, b| phi(*a).total_cmp(&phi(*b)))
                    .unwrap();
                lo = best - 2.0 * h;
                hi = best + 2.0 * h;
            }
            let grid = 0.5 * (lo + hi);
            let p = f.prox(&v(&[x])).unwrap()[0];
            assert!((p - grid).abs() < 1e-6, "c={c} x={x}: prox {p}, grid {grid}");
        }
    }
}

#[test]
fn scaled_rotation_norm_matches_closed_form() {
    for n in 2..=5 {
        let (lo, hi) = rotation_window(n);
        for k in 0..25 {
            let cos = lo + (hi - lo) * k as f64 / 25.0;
            let (alpha, r, _) = scaled_rotations(n, cos).unwrap();
            let cert = certify_fne(&r, &SamplerConfig::default());
            let expected = scaled_rotation_fne_norm(alpha, cos);
            assert!((cert.statistic.unwrap() - expected).abs() < 1e-12);
            assert!(cert.holds() == (expected <= 1.0 + 1e-9));
        }
    }
}

#[test]
fn published_rotation_norms() {
    let (alpha, r, _) = scaled_rotations(2, 0.6).unwrap();
    assert!((alpha - 1.0 / 2.4).abs() < 1e-15);
    let cfg = SamplerConfig::default();
    assert!((certify_fne(&r, &cfg).statistic.unwrap() - 5.0 / 6.0).abs() < 1e-9);
    let doubled = OperatorExpr::scale(2.0, r).unwrap();
    assert!((certify_fne(&doubled, &cfg).statistic.unwrap() - 4.0 / 3.0).abs() < 1e-9);
}

#[test]
fn scalar_resolvents() {
    for &a in &[0.0, 0.25, 1.0, 7.5] {
        let j = resolvent(&MonotoneMatrix::new(m(&[&[a]])).unwrap()).unwrap();
        assert!((j.get(0, 0) - 1.0 / (1.0 + a)).abs() < 1e-15);
    }
    let j = resolvent(&MonotoneMatrix::new(m(&[&[0.0, -1.0], &[1.0, 0.0]])).unwrap()).unwrap();
    // (I + J)^{-1} for the quarter turn J is (I − J)/2
    let expected = m(&[&[0.5, 0.5], &[-0.5, 0.5]]);
    assert!(j.max_abs_diff(&expected).unwrap() < 1e-15);
}

#[test]
fn ball_chain_is_complement_of_growing_balls() {
    let cfg = SamplerConfig::with_seed(8);
    for n in 0..=6 {
        for i in 0..200 {
            let x = sample_point(&cfg, 2, i);
            let got = dv(&ball_chain_eval(n, &vec_of(x.clone())).unwrap());
            let r = n as f64;
            let norm = x.norm();
            let proj = if norm <= r { x.clone() } else { &x * (r / norm) };
            let expected: DVector<f64> = &x - proj;
            assert!((got - expected).norm() <= 1e-9);
        }
    }
}

#[test]
fn soc_projection_oracle_agrees_with_catalog() {
    let f = ConvexAtom::indicator_soc(4).unwrap();
    let cfg = SamplerConfig::with_seed(9);
    for i in 0..300 {
        let x = sample_point(&cfg, 4, i);
        let lib = dv(&f.prox(&Vector::from_slice(x.as_slice()).unwrap()).unwrap());
        assert!((lib - soc_project(&x)).norm() <= 1e-12);
    }
}
