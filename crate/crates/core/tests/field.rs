use std::time::Instant;

use contour_swarm::field::{
    grad_obstacle, grad_phi, grad_swarm, phi_obstacle, phi_swarm, phi_total, ObstacleSpec, PotentialField,
    SwarmFieldSpec,
};
use contour_swarm::Vec2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct RawObstacle {
    x: f64,
    y: f64,
    speed: f64,
    d_safe: f64,
    radius: f64,
}

fn oracle_obstacle(px: f64, py: f64, o: &RawObstacle, v_s: f64) -> f64 {
    let r = (px - o.x).hypot(py - o.y);
    let s = if o.speed > v_s { o.speed } else { v_s };
    if r <= o.d_safe {
        s / o.d_safe.powi(2)
    } else if r <= o.radius {
        s / r.powi(2)
    } else {
        0.0
    }
}

fn oracle_swarm(px: f64, py: f64, cx: f64, cy: f64, v_s: f64, radius: f64) -> f64 {
    let r = (px - cx).hypot(py - cy);
    if r > radius {
        0.0
    } else {
        v_s / r.max(1.0).powi(2)
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300)
}

fn random_field(rng: &mut ChaCha8Rng, gain: f64) -> (PotentialField, Vec<RawObstacle>, [f64; 4]) {
    let v_s = rng.gen_range(5.0..15.0);
    let raw: Vec<RawObstacle> = (0..rng.gen_range(0..4))
        .map(|_| {
            let d_safe = rng.gen_range(10.0..60.0);
            RawObstacle {
                x: rng.gen_range(0.0..400.0),
                y: rng.gen_range(0.0..400.0),
                speed: rng.gen_range(0.0..20.0),
                d_safe,
                radius: d_safe + rng.gen_range(20.0..200.0),
            }
        })
        .collect();
    let swarm = [
        rng.gen_range(0.0..400.0),
        rng.gen_range(0.0..400.0),
        v_s,
        rng.gen_range(50.0..250.0),
    ];
    let obstacles = raw
        .iter()
        .map(|o| {
            ObstacleSpec::new(
                Vec2::new(o.x, o.y),
                Vec2::new(0.6 * o.speed, 0.8 * o.speed),
                o.radius,
                o.d_safe,
            )
            .unwrap()
        })
        .collect();
    let field = PotentialField::new(
        obstacles,
        SwarmFieldSpec::new(Vec2::new(swarm[0], swarm[1]), v_s, swarm[3]).unwrap(),
    )
    .unwrap()
    .with_gain(gain)
    .unwrap();
    (field, raw, swarm)
}

#[test]
fn intensities_match_branch_oracle_at_random_probes() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 10_000 {
        let gain = if checked % 2 == 0 { 1.0 } else { 500.0 };
        let (field, raw, [cx, cy, v_s, rs]) = random_field(&mut rng, gain);
        for _ in 0..50 {
            let (px, py) = (rng.gen_range(-50.0..450.0), rng.gen_range(-50.0..450.0));
            let q = Vec2::new(px, py);
            let mut want = oracle_swarm(px, py, cx, cy, v_s, rs);
            assert!(close(phi_swarm(q, field.swarm()), want));
            for (spec, o) in field.obstacles().iter().zip(&raw) {
                let one = oracle_obstacle(px, py, o, v_s);
                assert!(close(phi_obstacle(q, spec, v_s), one), "obstacle at ({px}, {py})");
                want += one;
            }
            assert!(close(phi_total(q, &field), gain * want), "total at ({px}, {py})");
            checked += 1;
        }
    }
    assert!(started.elapsed().as_secs_f64() < 5.0);
}

fn near_boundary(q: Vec2, field: &PotentialField, margin: f64) -> bool {
    let r = (q - field.swarm().center).norm();
    if (r - field.swarm().influence_radius).abs() < margin || r < 1.0 + margin {
        return true;
    }
    field.obstacles().iter().any(|o| {
        let r = (q - o.position).norm();
        (r - o.safe_distance).abs() < margin || (r - o.influence_radius).abs() < margin
    })
}

#[test]
fn gradient_matches_central_difference_away_from_boundaries() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let h = 1e-5;
    let mut checked = 0;
    while checked < 10_000 {
        let (field, _, _) = random_field(&mut rng, 500.0);
        for _ in 0..50 {
            let q = Vec2::new(rng.gen_range(-50.0..450.0), rng.gen_range(-50.0..450.0));
            if near_boundary(q, &field, 1e-3) {
                continue;
            }
            let g = grad_phi(q, &field);
            let fd = Vec2::new(
                (phi_total(q + Vec2::new(h, 0.0), &field) - phi_total(q - Vec2::new(h, 0.0), &field)) / (2.0 * h),
                (phi_total(q + Vec2::new(0.0, h), &field) - phi_total(q - Vec2::new(0.0, h), &field)) / (2.0 * h),
            );
            let scale = g.norm().max(fd.norm());
            if scale > 1e-9 {
                assert!((g - fd).norm() / scale <= 1e-5, "q {q:?}: {g:?} vs {fd:?}");
            } else {
                assert!((g - fd).norm() <= 1e-9);
            }
            checked += 1;
        }
    }
}

#[test]
fn boundary_conventions() {
    let obs = ObstacleSpec::new(Vec2::zeros(), Vec2::new(3.0, 4.0), 100.0, 40.0).unwrap();
    let on_ring = Vec2::new(40.0, 0.0);
    assert_eq!(phi_obstacle(on_ring, &obs, 10.0), 10.0 / 1600.0);
    assert_eq!(
        grad_obstacle(on_ring, &obs, 10.0),
        Vec2::new(-2.0 * 10.0 / 40f64.powi(3), 0.0)
    );
    assert_eq!(grad_obstacle(Vec2::new(39.9, 0.0), &obs, 10.0), Vec2::zeros());
    assert_eq!(phi_obstacle(Vec2::new(100.0, 0.0), &obs, 10.0), 10.0 / 1e4);
    assert_eq!(phi_obstacle(Vec2::new(100.0 + 1e-9, 0.0), &obs, 10.0), 0.0);
    let swarm = SwarmFieldSpec::new(Vec2::zeros(), 10.0, 150.0).unwrap();
    assert_eq!(phi_swarm(Vec2::new(0.5, 0.0), &swarm), 10.0);
    assert_eq!(grad_swarm(Vec2::new(0.5, 0.0), &swarm), Vec2::zeros());
}

#[test]
fn obstacle_strength_uses_faster_of_obstacle_and_swarm() {
    let slow = ObstacleSpec::new(Vec2::zeros(), Vec2::new(2.0, 0.0), 150.0, 40.0).unwrap();
    let fast = ObstacleSpec::new(Vec2::zeros(), Vec2::new(0.0, 25.0), 150.0, 40.0).unwrap();
    let q = Vec2::new(50.0, 0.0);
    assert_eq!(phi_obstacle(q, &slow, 10.0), 10.0 / 2500.0);
    assert_eq!(phi_obstacle(q, &fast, 10.0), 25.0 / 2500.0);
}

proptest! {
    #[test]
    fn field_is_nonnegative_and_bounded(
        ox in 0.0..400.0f64, oy in 0.0..400.0f64, speed in 0.0..20.0f64,
        d_safe in 5.0..60.0f64, extra in 10.0..200.0f64,
        px in -100.0..500.0f64, py in -100.0..500.0f64,
    ) {
        let obs = ObstacleSpec::new(Vec2::new(ox, oy), Vec2::new(speed, 0.0), d_safe + extra, d_safe).unwrap();
        let v = phi_obstacle(Vec2::new(px, py), &obs, 10.0);
        prop_assert!(v >= 0.0);
        prop_assert!(v <= speed.max(10.0) / (d_safe * d_safe));
    }

    #[test]
    fn obstacle_field_is_radially_nonincreasing(
        d_safe in 5.0..60.0f64, extra in 10.0..200.0f64, r1 in 0.0..300.0f64, dr in 0.0..100.0f64, angle in 0.0..std::f64::consts::TAU,
    ) {
        let obs = ObstacleSpec::new(Vec2::zeros(), Vec2::zeros(), d_safe + extra, d_safe).unwrap();
        let dir = Vec2::new(angle.cos(), angle.sin());
        prop_assert!(phi_obstacle(dir * (r1 + dr), &obs, 10.0) <= phi_obstacle(dir * r1, &obs, 10.0));
    }

    #[test]
    fn gain_scales_intensity_and_gradient(gain in 0.1..1000.0f64, px in 0.0..300.0f64, py in 0.0..300.0f64) {
        let obs = ObstacleSpec::new(Vec2::new(150.0, 150.0), Vec2::new(5.0, 0.0), 150.0, 40.0).unwrap();
        let swarm = SwarmFieldSpec::new(Vec2::new(100.0, 120.0), 10.0, 150.0).unwrap();
        let unit = PotentialField::new(vec![obs.clone()], swarm.clone()).unwrap();
        let scaled = PotentialField::new(vec![obs], swarm).unwrap().with_gain(gain).unwrap();
        let q = Vec2::new(px, py);
        let a = phi_total(q, &unit) * gain;
        prop_assert!((phi_total(q, &scaled) - a).abs() <= 1e-12 * a.abs().max(1e-300));
        prop_assert!((grad_phi(q, &scaled) - grad_phi(q, &unit) * gain).norm() <= 1e-12 * grad_phi(q, &scaled).norm().max(1e-300));
    }
}
