use std::f64::consts::{PI, TAU};
use std::time::Instant;

use contour_swarm::field::{ObstacleSpec, PotentialField, SwarmFieldSpec};
use contour_swarm::trajectory::{contour_cost, energy, Trajectory};
use contour_swarm::Vec2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn arc(center: Vec2, radius: f64, sweep: f64, pieces: usize) -> Vec<Vec2> {
    (0..=pieces)
        .map(|k| {
            let t = sweep * k as f64 / pieces as f64;
            center + Vec2::new(t.cos(), t.sin()) * radius
        })
        .collect()
}

fn far_swarm() -> SwarmFieldSpec {
    SwarmFieldSpec::new(Vec2::new(1e5, 1e5), 10.0, 150.0).unwrap()
}

#[test]
fn straight_line_has_zero_energy() {
    let pts: Vec<Vec2> = (0..50)
        .map(|k| Vec2::new(3.0 * k as f64, -1.5 * k as f64 + 7.0))
        .collect();
    let t = Trajectory::resample_uniform(&pts, 2.0).unwrap();
    assert!(energy(&t).unwrap() <= 1e-9);
    assert!(t.smoothness_cost().unwrap() <= 1e-9);
}

#[test]
fn circle_energy_matches_curvature_over_interior_span() {
    for &(radius, sweep) in &[(40.0, TAU), (100.0, 1.5 * PI), (25.0, PI)] {
        let t = Trajectory::resample_uniform(&arc(Vec2::new(5.0, -3.0), radius, sweep, 2000), 2.0).unwrap();
        let e = energy(&t).unwrap();
        let length = sweep * radius;
        let want = (length - t.spacing()) / radius;
        assert!((e - want).abs() / want <= 0.02, "radius {radius}: {e} vs {want}");
    }
}

#[test]
fn smoothness_of_circle_matches_half_curvature_squared_times_length() {
    let r = 60.0;
    let t = Trajectory::resample_uniform(&arc(Vec2::zeros(), r, TAU, 4000), 1.0).unwrap();
    let want = 0.5 / (r * r) * TAU * r;
    assert!((t.smoothness_cost().unwrap() - want).abs() / want <= 0.02);
}

#[test]
fn resampling_spacing_and_endpoints() {
    let pts = vec![Vec2::new(0.0, 0.0), Vec2::new(10.0, 0.0), Vec2::new(10.0, 7.0)];
    let t = Trajectory::resample_uniform(&pts, 2.0).unwrap();
    assert_eq!(t.len(), 10);
    assert!((t.spacing() - 17.0 / 9.0).abs() < 1e-12);
    assert_eq!(t.waypoints()[0], pts[0]);
    assert_eq!(*t.waypoints().last().unwrap(), pts[2]);
}

#[test]
fn degenerate_inputs_are_rejected() {
    assert!(Trajectory::resample_uniform(&[Vec2::zeros()], 1.0).is_err());
    assert!(Trajectory::resample_uniform(&[Vec2::zeros(), Vec2::zeros()], 1.0).is_err());
    assert!(Trajectory::resample_uniform(&[Vec2::zeros(), Vec2::new(1.0, 0.0)], 0.0).is_err());
    let two = Trajectory::resample_uniform(&[Vec2::zeros(), Vec2::new(1.0, 0.0)], 1.0).unwrap();
    assert!(energy(&two).is_err());
}

#[test]
fn contour_cost_argmin_lies_on_safe_ring() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let grid = 2.0;
    for _ in 0..5 {
        let d_safe = rng.gen_range(25.0..50.0_f64).round();
        let v_o = rng.gen_range(5.0..15.0);
        let v_s = rng.gen_range(5.0..15.0);
        let center = Vec2::new(300.0, 300.0);
        let obs = ObstacleSpec::new(center, Vec2::new(v_o, 0.0), 150.0, d_safe).unwrap();
        let swarm = SwarmFieldSpec::new(Vec2::new(1e5, 1e5), v_s, 150.0).unwrap();
        let field = PotentialField::new(vec![obs], swarm).unwrap().with_gain(500.0).unwrap();

        let mut best = (f64::INFINITY, 0.0);
        let mut r = 10.0;
        while r <= 160.0 {
            let pieces = (TAU * r / grid).ceil() as usize * 4;
            let t = Trajectory::resample_uniform(&arc(center, r, TAU, pieces), grid).unwrap();
            let c = contour_cost(&t, &field).unwrap();
            if c < best.0 {
                best = (c, r);
            }
            r += grid;
        }
        assert!(
            (best.1 - d_safe).abs() <= grid,
            "argmin {} vs d_safe {d_safe} (v_o {v_o:.2}, v_s {v_s:.2})",
            best.1
        );
    }
    assert!(started.elapsed().as_secs_f64() < 30.0);
}

#[test]
fn cost_far_from_fields_equals_smoothness() {
    let field = PotentialField::new(Vec::new(), far_swarm())
        .unwrap()
        .with_gain(500.0)
        .unwrap();
    let t = Trajectory::resample_uniform(&arc(Vec2::zeros(), 50.0, PI, 500), 2.0).unwrap();
    assert_eq!(contour_cost(&t, &field).unwrap(), t.smoothness_cost().unwrap());
}

fn polyline() -> impl Strategy<Value = Vec<Vec2>> {
    prop::collection::vec((-5.0..5.0f64, 1.0..6.0f64), 3..12).prop_map(|steps| {
        let mut p = Vec2::zeros();
        let mut heading: f64 = 0.0;
        let mut out = vec![p];
        for (turn, len) in steps {
            heading += turn * 0.2;
            p += Vec2::new(heading.cos(), heading.sin()) * len;
            out.push(p);
        }
        out
    })
}

proptest! {
    #[test]
    fn functionals_are_invariant_under_rigid_motion(
        pts in polyline(), angle in -PI..PI, tx in -500.0..500.0f64, ty in -500.0..500.0f64,
    ) {
        let (s, c) = angle.sin_cos();
        let moved: Vec<Vec2> = pts.iter().map(|p| Vec2::new(c * p.x - s * p.y + tx, s * p.x + c * p.y + ty)).collect();
        let a = Trajectory::resample_uniform(&pts, 1.0).unwrap();
        let b = Trajectory::resample_uniform(&moved, 1.0).unwrap();
        prop_assert_eq!(a.len(), b.len());
        prop_assert!((a.spacing() - b.spacing()).abs() <= 1e-9);
        if a.len() >= 3 {
            let (ea, eb) = (a.energy().unwrap(), b.energy().unwrap());
            prop_assert!((ea - eb).abs() <= 1e-7 * ea.max(1.0));
            let (sa, sb) = (a.smoothness_cost().unwrap(), b.smoothness_cost().unwrap());
            prop_assert!((sa - sb).abs() <= 1e-7 * sa.max(1.0));
        }
    }

    #[test]
    fn resampled_points_lie_on_the_polyline_and_keep_length(pts in polyline(), ds in 0.3..3.0f64) {
        let t = Trajectory::resample_uniform(&pts, ds).unwrap();
        let len: f64 = pts.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        prop_assert!((t.spacing() * (t.len() - 1) as f64 - len).abs() <= 1e-9 * len);
        for q in t.waypoints() {
            let on = pts.windows(2).any(|w| {
                let d = w[1] - w[0];
                let u = ((q - w[0]).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
                (w[0] + d * u - q).norm() <= 1e-9
            });
            prop_assert!(on);
        }
    }

    #[test]
    fn energy_and_smoothness_are_nonnegative(pts in polyline()) {
        let t = Trajectory::resample_uniform(&pts, 0.5).unwrap();
        prop_assert!(t.energy().unwrap() >= 0.0);
        prop_assert!(t.smoothness_cost().unwrap() >= 0.0);
    }
}
