use super::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn square(side: f64, res: f64) -> GridSpec {
    GridSpec::new(side, side, res).unwrap()
}

fn m(mean: f64, stdev: f64) -> RangeMeasurement {
    RangeMeasurement::new(mean, stdev).unwrap()
}

fn normal_pdf_oracle(x: f64, mu: f64, sigma: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    (-(x - mu) * (x - mu) / (2.0 * sigma * sigma)).exp() / (sigma * two_pi.sqrt())
}

/// Independent double sum over every (p, q) cell pair.
fn cascade_oracle(spec: &GridSpec, prev: &[f64], meas: RangeMeasurement) -> Vec<f64> {
    let area = spec.cell_area();
    let mass: f64 = prev.iter().sum::<f64>() * area;
    let mut out = vec![0.0; spec.n_cells()];
    for pr in 0..spec.n_rows() {
        for pc in 0..spec.n_cols() {
            let p = spec.cell_center(pr, pc).unwrap();
            let mut acc = 0.0;
            for qr in 0..spec.n_rows() {
                for qc in 0..spec.n_cols() {
                    let q = spec.cell_center(qr, qc).unwrap();
                    let d = ((p.x - q.x).powi(2) + (p.y - q.y).powi(2)).sqrt();
                    acc += prev[spec.index(qr, qc)] / mass
                        * normal_pdf_oracle(d, meas.mean, meas.stdev)
                        * area;
                }
            }
            out[spec.index(pr, pc)] = acc;
        }
    }
    out
}

fn random_cells(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>() + 1e-3).collect()
}

#[test]
fn uniform_prior_values() {
    let p = uniform_prior(&square(100.0, 2.0));
    assert!(p.cells().iter().all(|&v| (v - 1e-4).abs() < 1e-18));
    let p = uniform_prior(&square(10.0, 1.0));
    assert!(p.cells().iter().all(|&v| (v - 0.01).abs() < 1e-18));
    assert!((p.total_mass() - 1.0).abs() < 1e-12);
}

#[test]
fn near_zero_range_peaks_at_beacon() {
    let spec = square(11.0, 1.0);
    let beacon = spec.center();
    let c = direct_constraint(&spec, beacon, m(0.1, 0.5)).unwrap();
    let est = GridEstimate::from_unnormalized(spec, c.cells().to_vec()).unwrap();
    assert_eq!(Some(est.argmax()), spec.cell_of(beacon));
}

#[test]
fn direct_constraint_is_radially_symmetric() {
    let spec = square(100.0, 1.0);
    let beacon = Point::new(50.5, 50.5);
    let c = direct_constraint(&spec, beacon, m(20.0, 2.0)).unwrap();
    let east = c.value_at(Point::new(70.5, 50.5)).unwrap();
    let north = c.value_at(Point::new(50.5, 70.5)).unwrap();
    let west = c.value_at(Point::new(30.5, 50.5)).unwrap();
    assert!((east - north).abs() < 1e-12);
    assert!((east - west).abs() < 1e-12);
}

#[test]
fn direct_constraint_ratio_matches_normal_density() {
    let spec = square(100.0, 1.0);
    let beacon = Point::new(50.5, 50.5);
    let c = direct_constraint(&spec, beacon, m(20.0, 2.0)).unwrap();
    let a = c.value_at(Point::new(70.5, 50.5)).unwrap();
    let b = c.value_at(Point::new(75.5, 50.5)).unwrap();
    let expected = normal_pdf_oracle(20.0, 20.0, 2.0) / normal_pdf_oracle(25.0, 20.0, 2.0);
    assert!(((a / b) - expected).abs() / expected < 1e-12);
}

#[test]
fn direct_constraint_depends_only_on_distance() {
    // (3,4) and (5,0) offsets are both 5 cells away.
    let spec = square(40.0, 1.0);
    let beacon = Point::new(20.5, 20.5);
    let c = direct_constraint(&spec, beacon, m(4.0, 1.5)).unwrap();
    let v = |dx: f64, dy: f64| c.value_at(Point::new(20.5 + dx, 20.5 + dy)).unwrap();
    for (a, b) in [((3.0, 4.0), (5.0, 0.0)), ((-4.0, 3.0), (0.0, -5.0)), ((6.0, 8.0), (-10.0, 0.0))] {
        assert!((v(a.0, a.1) - v(b.0, b.1)).abs() < 1e-15);
    }
}

#[test]
fn far_beacon_with_tiny_stdev_is_degenerate() {
    let spec = square(10.0, 1.0);
    let r = direct_constraint(&spec, Point::new(5.0, 5.0), m(1000.0, 0.1));
    assert_eq!(r, Err(BayesError::DegenerateConstraint));
}

#[test]
fn invalid_measurements_rejected() {
    assert!(RangeMeasurement::new(-1.0, 1.0).is_err());
    assert!(RangeMeasurement::new(1.0, 0.0).is_err());
    assert!(RangeMeasurement::new(f64::NAN, 1.0).is_err());
    let row = BeaconLogRow {
        beacon_position: Point::new(0.0, 0.0),
        hops: vec![],
    };
    assert_eq!(row.validate(), Err(BayesError::EmptyRow));
}

#[test]
fn cascade_from_point_mass_is_direct_constraint() {
    let spec = square(100.0, 2.0);
    let (r, c) = spec.cell_of(Point::new(50.0, 50.0)).unwrap();
    let mass = Constraint::from(GridEstimate::point_mass(spec, r, c).unwrap());
    let meas = m(20.0, 2.0);
    let out = cascade(&spec, &mass, meas).unwrap();
    let direct = direct_constraint(&spec, spec.cell_center(r, c).unwrap(), meas).unwrap();
    let so: f64 = out.cells().iter().sum();
    let sd: f64 = direct.cells().iter().sum();
    let mut worst: f64 = 0.0;
    for (a, b) in out.cells().iter().zip(direct.cells()) {
        if *b > 0.0 {
            worst = worst.max(((a / so) - (b / sd)).abs() / (b / sd));
        } else {
            assert_eq!(*a, 0.0);
        }
    }
    assert!(worst <= 1e-9, "max relative error {worst}");
}

#[test]
fn cascade_matches_brute_force_on_10x10() {
    let spec = square(10.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let prev = random_cells(&mut rng, spec.n_cells());
        let meas = m(rng.random_range(0.5..8.0), rng.random_range(0.3..3.0));
        let got = cascade(&spec, &Constraint::new(spec, prev.clone()).unwrap(), meas).unwrap();
        let oracle = cascade_oracle(&spec, &prev, meas);
        for (g, o) in got.cells().iter().zip(&oracle) {
            assert!((g - o).abs() <= 1e-9, "{g} vs {o}");
        }
    }
}

#[test]
fn cascade_fft_route_matches_brute_force_up_to_20x20() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for side in [7.0, 13.0, 20.0] {
        let spec = square(side, 1.0);
        let conv = DistanceConvolver::new(spec);
        let prev = random_cells(&mut rng, spec.n_cells());
        let meas = m(rng.random_range(1.0..10.0), rng.random_range(0.5..3.0));
        let oracle = cascade_oracle(&spec, &prev, meas);
        let pc = Constraint::new(spec, prev).unwrap();
        for method in [ConvolutionMethod::Direct, ConvolutionMethod::Fft] {
            let got = cascade_with(&conv, &pc, meas, method).unwrap();
            for (g, o) in got.cells().iter().zip(&oracle) {
                assert!((g - o).abs() <= 1e-9, "{method:?} {g} vs {o}");
            }
        }
    }
}

#[test]
fn cascade_rejects_mismatched_spec() {
    let a = square(10.0, 1.0);
    let b = square(12.0, 1.0);
    let c = Constraint::constant(b, 1.0).unwrap();
    assert_eq!(
        cascade(&a, &c, m(1.0, 1.0)),
        Err(BayesError::Grid(GridError::SpecMismatch))
    );
}

#[test]
fn intersect_with_uniform_is_proportional_to_constraint() {
    let spec = square(10.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let c = Constraint::new(spec, random_cells(&mut rng, spec.n_cells())).unwrap();
    let out = intersect(&uniform_prior(&spec), &c).unwrap();
    let k = out.cells()[0] / c.cells()[0];
    for (o, v) in out.cells().iter().zip(c.cells()) {
        assert!((o - k * v).abs() < 1e-12);
    }
}

#[test]
fn intersect_with_constant_is_identity() {
    let spec = square(10.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let p = GridEstimate::from_unnormalized(spec, random_cells(&mut rng, spec.n_cells())).unwrap();
    let out = intersect(&p, &Constraint::constant(spec, 1.0).unwrap()).unwrap();
    for (a, b) in out.cells().iter().zip(p.cells()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn intersect_matches_hand_arithmetic_on_5x5() {
    let spec = square(5.0, 1.0);
    // prior cell i has mass i+1, constraint cell i is (i % 3).
    let prior: Vec<f64> = (0..25).map(|i| (i + 1) as f64).collect();
    let like: Vec<f64> = (0..25).map(|i| (i % 3) as f64).collect();
    let p = GridEstimate::from_unnormalized(spec, prior.clone()).unwrap();
    let out = intersect(&p, &Constraint::new(spec, like.clone()).unwrap()).unwrap();
    // Sum of (i+1)*(i%3) over i in 0..25 is 316.
    let z: f64 = (0..25).map(|i| ((i + 1) * (i % 3)) as f64).sum();
    assert_eq!(z, 316.0);
    for i in 0..25 {
        let expected = prior[i] * like[i] / z;
        assert!((out.cells()[i] - expected).abs() < 1e-12);
    }
}

#[test]
fn intersect_detects_contradiction() {
    let spec = square(2.0, 1.0);
    let p = GridEstimate::from_unnormalized(spec, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
    let c = Constraint::new(spec, vec![0.0, 1.0, 1.0, 1.0]).unwrap();
    assert_eq!(intersect(&p, &c), Err(BayesError::Contradiction));
}

#[test]
fn empty_log_is_uniform() {
    let spec = square(20.0, 2.0);
    let post = process_log(&spec, &[]).unwrap();
    assert_eq!(post.estimate, uniform_prior(&spec));
    assert_eq!(post.skipped_rows, 0);
}

#[test]
fn single_row_unrolls() {
    let spec = square(40.0, 2.0);
    let row = BeaconLogRow::direct(Point::new(10.0, 12.0), m(8.0, 1.5));
    let post = process_log(&spec, std::slice::from_ref(&row)).unwrap();
    let expected = intersect(
        &uniform_prior(&spec),
        &direct_constraint(&spec, row.beacon_position, row.hops[0]).unwrap(),
    )
    .unwrap();
    assert_eq!(post.estimate, expected);
}

#[test]
fn two_annuli_meet_between_beacons() {
    let spec = square(100.0, 2.0);
    let rows = [
        BeaconLogRow::direct(Point::new(30.0, 50.0), m(20.0, 2.0)),
        BeaconLogRow::direct(Point::new(70.0, 50.0), m(20.0, 2.0)),
    ];
    let est = point_estimate(&process_log(&spec, &rows).unwrap().estimate);

    // Dense oracle: product of the two ring densities on a 0.25 m lattice.
    let (mut sx, mut sy, mut sw) = (0.0, 0.0, 0.0);
    for i in 0..400 {
        for j in 0..400 {
            let p = Point::new((i as f64 + 0.5) * 0.25, (j as f64 + 0.5) * 0.25);
            let w = rows
                .iter()
                .map(|r| normal_pdf_oracle(p.distance_to(r.beacon_position), 20.0, 2.0))
                .product::<f64>();
            sx += w * p.x;
            sy += w * p.y;
            sw += w;
        }
    }
    let dense = Point::new(sx / sw, sy / sw);
    assert!(dense.distance_to(Point::new(50.0, 50.0)) < 0.5);
    assert!(est.distance_to(Point::new(50.0, 50.0)) <= 2.0 * spec.resolution());
    assert!(est.distance_to(dense) <= 2.0 * spec.resolution());
}

#[test]
fn noiseless_three_beacons_localize_within_a_cell() {
    let spec = square(100.0, 2.0);
    let truth = Point::new(41.3, 57.9);
    let beacons = [Point::new(20.0, 20.0), Point::new(80.0, 30.0), Point::new(50.0, 85.0)];
    let sigma = 0.25 * spec.resolution();
    let rows: Vec<_> = beacons
        .iter()
        .map(|b| BeaconLogRow::direct(*b, m(b.distance_to(truth), sigma)))
        .collect();
    let est = point_estimate(&process_log(&spec, &rows).unwrap().estimate);
    assert!(est.distance_to(truth) <= spec.resolution() * 2f64.sqrt(), "{est}");
}

#[test]
fn point_estimate_examples() {
    let spec = square(100.0, 2.0);
    let u = point_estimate(&uniform_prior(&spec));
    assert!(u.distance_to(Point::new(50.0, 50.0)) < 1e-9);

    let pm = GridEstimate::point_mass(spec, 7, 31).unwrap();
    assert_eq!(point_estimate(&pm), spec.cell_center(7, 31).unwrap());

    let mut cells = vec![0.0; spec.n_cells()];
    let (r1, c1) = spec.cell_of(Point::new(25.0, 50.0)).unwrap();
    let (r2, c2) = spec.cell_of(Point::new(75.0, 50.0)).unwrap();
    cells[spec.index(r1, c1)] = 1.0;
    cells[spec.index(r2, c2)] = 1.0;
    let e = GridEstimate::from_unnormalized(spec, cells).unwrap();
    // Both masses sit in row 25 (center y = 51), columns 12 and 37 (x = 25, 75).
    let mean = point_estimate(&e);
    assert!((mean.x - 50.0).abs() < 1e-9);
    assert_eq!(Some(spec.cell_of(Point::new(25.0, 50.0)).unwrap().0), Some(r1));
}

#[test]
fn argmax_estimator_returns_cell_center() {
    let spec = square(20.0, 2.0);
    let pm = GridEstimate::point_mass(spec, 3, 4).unwrap();
    assert_eq!(reduce(&pm, Estimator::Argmax), spec.cell_center(3, 4).unwrap());
}

#[test]
fn cached_localizer_is_bit_identical() {
    let spec = square(60.0, 2.0);
    let b = Point::new(10.0, 10.0);
    let shared = [m(20.0, 1.5), m(18.0, 1.5)];
    let rows_a = vec![
        BeaconLogRow::direct(Point::new(50.0, 50.0), m(30.0, 1.5)),
        BeaconLogRow {
            beacon_position: b,
            hops: vec![shared[0], shared[1], m(10.0, 1.5)],
        },
    ];
    let rows_b = vec![BeaconLogRow {
        beacon_position: b,
        hops: vec![shared[0], shared[1], m(14.0, 1.5)],
    }];
    let mut loc = Localizer::new(spec);
    let a1 = loc.process_log(&rows_a).unwrap();
    let b1 = loc.process_log(&rows_b).unwrap();
    // The second log reuses the two-hop prefix: 2 cascades, then 1.
    assert_eq!(loc.cascades_computed(), 3);
    assert_eq!(a1, process_log(&spec, &rows_a).unwrap());
    assert_eq!(b1, process_log(&spec, &rows_b).unwrap());
}

#[test]
fn cascade_state_starts_null() {
    let spec = square(10.0, 1.0);
    let conv = DistanceConvolver::new(spec);
    let s = CascadeState::default();
    assert!(s.clone().into_constraint().is_none());
    let s = s.push(&conv, Point::new(5.0, 5.0), m(2.0, 1.0)).unwrap();
    let s = s.push(&conv, Point::new(5.0, 5.0), m(2.0, 1.0)).unwrap();
    assert!(matches!(s, CascadeState::Partial { hops_consumed: 2, .. }));
}

fn small_constraint(spec: GridSpec) -> impl Strategy<Value = Constraint> {
    prop::collection::vec(1e-6..1.0f64, spec.n_cells())
        .prop_map(move |cells| Constraint::new(spec, cells).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn intersect_is_order_insensitive(
        c1 in small_constraint(square(8.0, 1.0)),
        c2 in small_constraint(square(8.0, 1.0)),
    ) {
        let p = uniform_prior(&square(8.0, 1.0));
        let a = intersect(&intersect(&p, &c1).unwrap(), &c2).unwrap();
        let b = intersect(&intersect(&p, &c2).unwrap(), &c1).unwrap();
        for (x, y) in a.cells().iter().zip(b.cells()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        prop_assert!((a.total_mass() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn cascade_preserves_positivity(
        prev in small_constraint(square(9.0, 1.0)),
        mean in 0.0..12.0f64,
        stdev in 0.2..4.0f64,
    ) {
        let out = cascade(&square(9.0, 1.0), &prev, m(mean, stdev)).unwrap();
        prop_assert!(out.cells().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn process_log_stays_normalized(
        beacons in prop::collection::vec((0.0..30.0f64, 0.0..30.0f64, 0.0..25.0f64, 0.5..3.0f64), 1..5),
    ) {
        let spec = square(30.0, 1.5);
        let rows: Vec<_> = beacons
            .into_iter()
            .map(|(x, y, d, s)| BeaconLogRow::direct(Point::new(x, y), m(d, s)))
            .collect();
        let post = process_log(&spec, &rows).unwrap();
        prop_assert!((post.estimate.total_mass() - 1.0).abs() < 1e-9);
        prop_assert!(post.estimate.cells().iter().all(|&v| v >= 0.0));
    }
}
