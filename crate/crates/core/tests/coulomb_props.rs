use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scd_core::coulomb::{
    cell_resolvent, cell_subspace, classify, enumerate_limit_subspaces, product_map,
    resolvent_lipschitz_bound, CellPoint, Stratum,
};
use scd_core::oracles::{
    check_inclusion, one_sided_witness, sample_graph_directions, semismooth_star_ratio,
    tangent_defect, SEMISMOOTH_NOISE_FLOOR,
};
use scd_core::subspaces::{dual_subspace, subspace_metric, SubspaceBasis};
use scd_core::synthetic::random_cell_point;
use scd_core::Side;

const FRICTIONS: [f64; 3] = [0.1, 0.23, 1.0];

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn random_w(rng: &mut ChaCha8Rng) -> [f64; 3] {
    [
        rng.random_range(-10.0..10.0),
        rng.random_range(-10.0..10.0),
        rng.random_range(-10.0..10.0),
    ]
}

fn random_gamma(rng: &mut ChaCha8Rng) -> f64 {
    10f64.powf(rng.random_range(-2.0..4.0))
}

#[test]
fn resolvent_lands_on_the_graph() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let (gamma, w) = (random_gamma(&mut rng), random_w(&mut rng));
        let f = FRICTIONS[rng.random_range(0..3)];
        let p = cell_resolvent(gamma, w, f);
        let q = product_map(1, 0, f);
        assert!(
            check_inclusion(&q, &p.v, &p.y()) <= 1e-12 * (1.0 + norm(&w)),
            "{gamma} {w:?} {f}"
        );
        assert!(classify(&p, f).is_ok());
        // the graph value is exactly w - gamma v
        let y = p.y();
        for i in 0..3 {
            assert!((w[i] - gamma * p.v[i] - y[i]).abs() <= 1e-14 * (1.0 + w[i].abs()));
        }
    }
}

#[test]
fn resolvent_is_lipschitz() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10_000 {
        let gamma = random_gamma(&mut rng);
        let f = FRICTIONS[rng.random_range(0..3)];
        let (w1, w2) = (random_w(&mut rng), random_w(&mut rng));
        let (p1, p2) = (cell_resolvent(gamma, w1, f), cell_resolvent(gamma, w2, f));
        let dv: Vec<f64> = (0..3).map(|i| p1.v[i] - p2.v[i]).collect();
        let dw: Vec<f64> = (0..3).map(|i| w1[i] - w2[i]).collect();
        assert!(gamma * norm(&dv) <= resolvent_lipschitz_bound(f) * norm(&dw) * (1.0 + 1e-12));
    }
}

fn flat(p: &CellPoint) -> (Vec<f64>, Vec<f64>) {
    (p.v.to_vec(), p.y().to_vec())
}

#[test]
fn sampled_tangents_lie_in_selected_subspace() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = 0.23;
    let q = product_map(1, 0, f);
    for stratum in [Stratum::L, Stratum::M1, Stratum::M3Plus] {
        for k in 0..100 {
            let p = random_cell_point(&mut rng, stratum, f);
            let (x, y) = flat(&p);
            let sample = sample_graph_directions(&q, &x, &y, 1e-5, 12, k).unwrap();
            assert_eq!(sample.directions.len(), 12);
            let basis = cell_subspace(&p, f, Side::Primal).unwrap();
            let dev = sample.max_deviation(&basis);
            assert!(dev <= 1e-4, "{stratum}: deviation {dev}");
        }
    }
}

#[test]
fn m1_dual_matches_computed_dual() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for &f in &FRICTIONS {
        for _ in 0..200 {
            let p = random_cell_point(&mut rng, Stratum::M1, f);
            let primal = cell_subspace(&p, f, Side::Primal).unwrap();
            let dual = cell_subspace(&p, f, Side::Dual).unwrap();
            assert!(subspace_metric(&dual_subspace(&primal).unwrap(), &dual) <= 1e-8);
        }
    }
}

#[test]
fn m1_basis_stays_bounded_as_sliding_vanishes() {
    let f = 0.23;
    for k in 1..10 {
        let r = 10f64.powi(-k);
        let p = CellPoint::new([r, 0.0, 0.0], [f, 0.0], -1.0);
        assert_eq!(classify(&p, f).unwrap(), Stratum::M1);
        for side in [Side::Primal, Side::Dual] {
            let b = cell_subspace(&p, f, side).unwrap();
            assert!(b.a().abs().max() <= 1.0 + f && b.b().abs().max() <= 1.0 + f);
        }
    }
}

fn non_smooth_points(rng: &mut ChaCha8Rng, f: f64) -> Vec<(Stratum, CellPoint)> {
    let phi = rng.random_range(0.0..std::f64::consts::TAU);
    let theta = rng.random_range(-1.5..-0.5);
    let r = rng.random_range(0.5..1.5);
    vec![
        (
            Stratum::M2,
            CellPoint::new([r * phi.cos(), r * phi.sin(), 0.0], [0.0; 2], 0.0),
        ),
        (
            Stratum::M3Minus,
            CellPoint::new(
                [0.0; 3],
                [-f * theta * phi.cos(), -f * theta * phi.sin()],
                theta,
            ),
        ),
        (Stratum::M4, CellPoint::new([0.0; 3], [0.0; 2], 0.0)),
    ]
}

#[test]
fn enumerations_contain_the_implemented_selection() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f = 0.23;
    for _ in 0..20 {
        for (s, p) in non_smooth_points(&mut rng, f) {
            assert_eq!(classify(&p, f).unwrap(), s);
            let all = enumerate_limit_subspaces(&p, f, 6).unwrap();
            let expected = match s {
                Stratum::M3Minus => SubspaceBasis::fixed(3),
                _ => SubspaceBasis::free(3),
            };
            assert!(
                all.iter().any(|b| subspace_metric(b, &expected) <= 1e-12),
                "{s}"
            );
            let selected = cell_subspace(&p, f, Side::Dual).unwrap();
            assert!(subspace_metric(&selected, &expected) <= 1e-12);
        }
    }
}

#[test]
fn enumerated_subspaces_are_limits_of_stable_ones() {
    // every enumerated element at M2 / M3- is approached by M1 or L/M3+ subspaces
    let f = 0.23;
    let m2 = CellPoint::new([0.6, -0.8, 0.0], [0.0; 2], 0.0);
    let near_m1 = CellPoint::new([0.6, -0.8, 0.0], [f * 1e-9 * 0.6, f * 1e-9 * -0.8], -1e-9);
    let lim = &enumerate_limit_subspaces(&m2, f, 1).unwrap()[1];
    assert!(subspace_metric(lim, &cell_subspace(&near_m1, f, Side::Primal).unwrap()) < 1e-6);

    let m3m = CellPoint::new([0.0; 3], [0.23, 0.0], -1.0);
    let near = CellPoint::new([1e-9, 0.0, 0.0], [0.23, 0.0], -1.0);
    let lim = &enumerate_limit_subspaces(&m3m, f, 1).unwrap()[1];
    assert!(subspace_metric(lim, &cell_subspace(&near, f, Side::Primal).unwrap()) < 1e-6);
}

#[test]
fn non_smooth_strata_have_one_sided_tangents() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let f = 0.23;
    let q = product_map(1, 0, f);
    let up = [0.0, 0.0, 1.0, 0.0, 0.0, 0.0];
    let down: Vec<f64> = up.iter().map(|c| -c).collect();
    for (k, (s, p)) in non_smooth_points(&mut rng, f).into_iter().enumerate() {
        let (x, y) = flat(&p);
        if s != Stratum::M3Minus {
            assert!(tangent_defect(&q, &x, &y, &up, 1e-6).unwrap() < 1e-9, "{s}");
            assert!(
                tangent_defect(&q, &x, &y, &down, 1e-6).unwrap() > 1.0,
                "{s}"
            );
        }
        let (_, defect) = one_sided_witness(&q, &x, &y, 1e-5, 100, k as u64)
            .unwrap()
            .unwrap();
        assert!(defect > 0.05, "{s}: {defect}");
    }
    for stratum in [Stratum::L, Stratum::M1, Stratum::M3Plus] {
        let p = random_cell_point(&mut rng, stratum, f);
        let (x, y) = flat(&p);
        let (_, defect) = one_sided_witness(&q, &x, &y, 1e-5, 100, 9)
            .unwrap()
            .unwrap();
        assert!(defect < 1e-3, "{stratum}: {defect}");
    }
}

#[test]
fn semismooth_bracket_decays() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let f = 0.23;
    let q = product_map(1, 0, f);
    let mut bases = Vec::new();
    for _ in 0..4 {
        for s in [Stratum::L, Stratum::M1, Stratum::M3Plus] {
            bases.push((s, random_cell_point(&mut rng, s, f)));
        }
        bases.extend(non_smooth_points(&mut rng, f));
    }
    for (k, (s, p)) in bases.iter().enumerate() {
        let (x, y) = flat(p);
        let coarse = semismooth_star_ratio(&q, &x, &y, 1e-2, 200, k as u64).unwrap();
        let fine = semismooth_star_ratio(&q, &x, &y, 1e-4, 200, k as u64).unwrap();
        assert!(
            fine <= 0.5 * coarse || fine <= SEMISMOOTH_NOISE_FLOOR,
            "{s}: ratio {coarse:.3e} at 1e-2, {fine:.3e} at 1e-4"
        );
    }
}

#[test]
fn shifted_operator_is_not_monotone() {
    for &f in &FRICTIONS {
        for gamma in [1e-2, 1.0, 7.5, 1e4] {
            let q = product_map(1, 0, f);
            let (v1, y1) = ([1.0, 0.0, 0.0], [2.0 * gamma, 0.0, -2.0 * gamma / f]);
            let (v2, y2) = ([2.0, 0.0, 0.0], [0.0; 3]);
            assert!(check_inclusion(&q, &v1, &y1) <= 1e-12 * gamma / f);
            assert_eq!(check_inclusion(&q, &v2, &y2), 0.0);
            let inner: f64 = (0..3)
                .map(|i| (gamma * (v1[i] - v2[i]) + y1[i] - y2[i]) * (v1[i] - v2[i]))
                .sum();
            assert!((inner + gamma).abs() <= 1e-12 * gamma, "{inner}");
        }
    }
}
