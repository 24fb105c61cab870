use epi_lab_core::counterexample::{bracket_j1, bracket_j2, bracket_merged};
use epi_lab_core::density::{convolve, entropy, mean, read_csv, scale_rv, variance, write_csv};
use epi_lab_core::edgeworth::{hermite, integer_solutions, q_k, CumulantVector, EdgeworthModel};
use epi_lab_core::hadamard::{fourier_matrix, sample_complex_unconditional, SamplerKind};
use epi_lab_core::numeric::trapezoid_by;
use epi_lab_core::schur::{majorizes, phi, sample_comparable_pair, WeightVector};
use epi_lab_core::{Grid, GridDensity};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn simplex_point(n: usize) -> impl Strategy<Value = WeightVector> {
    prop::collection::vec(0.01f64..1.0, n).prop_map(|w| WeightVector::normalized(&w).unwrap())
}

fn mixture() -> impl Strategy<Value = GridDensity> {
    (-1.5f64..1.5, 0.3f64..1.5, -1.5f64..1.5, 0.3f64..1.5).prop_map(|(m1, v1, m2, v2)| {
        GridDensity::gaussian_mixture(&[(0.5, m1, v1), (0.5, m2, v2)], Grid::new(-14.0, 14.0, 2801).unwrap()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn majorization_is_reflexive_and_bounded(a in simplex_point(5)) {
        prop_assert!(majorizes(&a, &a).unwrap());
        prop_assert!(majorizes(&WeightVector::uniform(5), &a).unwrap());
        prop_assert!(majorizes(&a, &WeightVector::vertex(5)).unwrap());
    }

    #[test]
    fn majorization_ignores_order(a in simplex_point(4), b in simplex_point(4), rot in 0usize..4) {
        let mut w = a.weights().to_vec();
        w.rotate_left(rot);
        let ar = WeightVector::new(w).unwrap();
        prop_assert_eq!(majorizes(&a, &b).unwrap(), majorizes(&ar, &b).unwrap());
        prop_assert_eq!(majorizes(&b, &a).unwrap(), majorizes(&b, &ar).unwrap());
    }

    #[test]
    fn majorization_is_transitive(seed in any::<u64>(), lambda in 0.0f64..1.0, i in 0usize..4, j in 0usize..4) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (b, c) = sample_comparable_pair(4, &mut rng);
        // a T-transform of b: mix b with b after swapping two coordinates
        let mut swapped = b.weights().to_vec();
        swapped.swap(i, j);
        let w: Vec<f64> = b.weights().iter().zip(&swapped).map(|(x, y)| lambda * x + (1.0 - lambda) * y).collect();
        let a = WeightVector::normalized(&w).unwrap();
        prop_assert!(majorizes(&b, &c).unwrap());
        prop_assert!(majorizes(&a, &b).unwrap());
        prop_assert!(majorizes(&a, &c).unwrap());
    }

    #[test]
    fn sampled_pairs_are_comparable(seed in any::<u64>(), n in 2usize..8) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (a, b) = sample_comparable_pair(n, &mut rng);
        prop_assert!(majorizes(&a, &b).unwrap());
    }

    #[test]
    fn hermite_recurrence(x in -6.0f64..6.0, n in 1usize..12) {
        let lhs = hermite(n + 1, x);
        let rhs = x * hermite(n, x) - n as f64 * hermite(n - 1, x);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn corrections_carry_no_mass(g3 in -0.5f64..0.5, g4 in -1.0f64..1.0, g5 in -1.0f64..1.0, g6 in -2.0f64..2.0) {
        let model = EdgeworthModel::new(6, CumulantVector::new(vec![g3, g4, g5, g6])).unwrap();
        for k in 1..=4 {
            let dx = 0.005;
            let mass = trapezoid_by(4801, dx, |i| q_k(&model, k, -12.0 + i as f64 * dx).unwrap());
            let first = trapezoid_by(4801, dx, |i| {
                let x = -12.0 + i as f64 * dx;
                x * q_k(&model, k, x).unwrap()
            });
            prop_assert!(mass.abs() < 1e-10, "k = {}: {}", k, mass);
            // the expansion also preserves the mean for k >= 1
            prop_assert!(first.abs() < 1e-10, "k = {}: {}", k, first);
        }
    }

    #[test]
    fn merged_kernel_consistency(s in -3.0f64..3.0, t in -3.0f64..3.0) {
        let m = bracket_merged(s, t);
        let r = 2.0 * bracket_j1(s, t) - bracket_j2(s, t);
        prop_assert!((m - r).abs() <= 1e-10 * m.abs().max(r.abs()).max(1.0));
    }

    #[test]
    fn convolution_adds_means_and_variances(a in mixture(), b in mixture()) {
        let c = convolve(&a, &b).unwrap();
        prop_assert!((c.total_mass() - 1.0).abs() < 1e-9);
        prop_assert!((mean(&c) - mean(&a) - mean(&b)).abs() < 1e-8);
        prop_assert!((variance(&c) - variance(&a) - variance(&b)).abs() < 1e-6);
    }

    #[test]
    fn scaling_shifts_entropy(a in 0.6f64..1.8) {
        let d = GridDensity::gaussian(0.0, 1.0, Grid::new(-14.0, 14.0, 5601).unwrap()).unwrap();
        let s = scale_rv(&d, a).unwrap();
        prop_assert!((entropy(&s) - entropy(&d) - a.ln()).abs() < 1e-5);
        prop_assert!((variance(&s) - a * a).abs() < 1e-6);
    }

    #[test]
    fn weighted_entropy_is_permutation_invariant(a in simplex_point(3), rot in 1usize..3) {
        let d = GridDensity::uniform(-3f64.sqrt(), 3f64.sqrt(), Grid::new(-4.0, 4.0, 1601).unwrap()).unwrap();
        let mut w = a.weights().to_vec();
        w.rotate_left(rot);
        let ar = WeightVector::new(w).unwrap();
        prop_assert_eq!(phi(&a, &d).unwrap(), phi(&ar, &d).unwrap());
    }

    #[test]
    fn csv_round_trip(d in mixture()) {
        let mut buf = Vec::new();
        write_csv(&d, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        for (x, y) in back.values().iter().zip(d.values()) {
            prop_assert!((x - y).abs() <= 1e-14 * y.abs());
        }
        prop_assert!((back.grid().dx() - d.grid().dx()).abs() < 1e-12);
    }

    #[test]
    fn fourier_transform_is_an_isometry(seed in any::<u64>(), n in 2usize..6) {
        let batch = sample_complex_unconditional(SamplerKind::SharedRadiusPhases, n, 50, seed).unwrap();
        let ux = batch.transformed(&fourier_matrix(n).unwrap()).unwrap();
        for i in 0..50 {
            let a: f64 = batch.point(i).iter().map(|z| z.norm_sqr()).sum();
            let b: f64 = ux.point(i).iter().map(|z| z.norm_sqr()).sum();
            prop_assert!((a - b).abs() < 1e-12 * a.max(1.0));
        }
    }
}

#[test]
fn partitions_have_the_right_weight() {
    for k in 1..=4 {
        for p in integer_solutions(k) {
            let weight: u32 = p.r.iter().enumerate().map(|(i, r)| (i as u32 + 1) * r).sum();
            assert_eq!(weight as usize, k);
            assert_eq!(p.j, p.r.iter().sum::<u32>());
        }
    }
}
