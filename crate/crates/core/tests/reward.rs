use contour_swarm::env::{reset, EpisodeState, ObstacleState, ScenarioConfig, TerminationReason, UavState};
use contour_swarm::reward::{build_field, collision_indicator, compute_reward, formation_reward, RewardBreakdown};
use contour_swarm::Vec2;
use proptest::prelude::*;

fn config(n_uavs: usize, n_obstacles: usize) -> ScenarioConfig {
    ScenarioConfig {
        n_uavs,
        n_obstacles,
        ..ScenarioConfig::default()
    }
}

/// A UAV that has flown `steps` steps along a circle of `radius` around `center`.
fn circling_uav(center: Vec2, radius: f64, steps: usize, speed: f64) -> UavState {
    let dtheta = speed / radius;
    let path: Vec<Vec2> = (0..=steps)
        .map(|k| center + Vec2::new((k as f64 * dtheta).cos(), (k as f64 * dtheta).sin()) * radius)
        .collect();
    let end = steps as f64 * dtheta;
    let heading = end + std::f64::consts::FRAC_PI_2;
    let mut uav = UavState::new(path[0], center + Vec2::new(500.0, 0.0), heading, speed);
    uav.position = *path.last().unwrap();
    uav.path = path;
    uav.planned_velocity = Vec2::new(heading.cos(), heading.sin()) * speed;
    uav
}

fn state_with(uavs: Vec<UavState>, obstacles: Vec<ObstacleState>, cfg: &ScenarioConfig) -> EpisodeState {
    let mut s = EpisodeState::new(uavs, obstacles, cfg);
    s.virtual_center = Vec2::new(-1e4, -1e4);
    s.step = 20;
    s
}

#[test]
fn field_superposes_obstacles_and_swarm() {
    let cfg = config(3, 2);
    let state = reset(&ScenarioConfig { seed: 4, ..cfg.clone() }).unwrap();
    let field = build_field(&state, &cfg).unwrap();
    assert_eq!(field.obstacles().len(), 2);
    let q = state.obstacles[0].position + Vec2::new(55.0, -20.0);
    let mut want = 0.0;
    for o in &state.obstacles {
        let r = (q - o.position).norm();
        let s = o.velocity.norm().max(cfg.uav_speed);
        want += if r <= cfg.d_safe {
            s / cfg.d_safe.powi(2)
        } else if r <= cfg.obstacle_radius {
            s / (r * r)
        } else {
            0.0
        };
    }
    let rc = (q - state.virtual_center).norm();
    if rc <= cfg.swarm_radius {
        want += cfg.uav_speed / rc.max(1.0).powi(2);
    }
    want *= cfg.field_gain;
    assert!((field.intensity(q) - want).abs() <= 1e-12 * want.max(1e-300));
}

#[test]
fn circling_on_safe_ring_beats_wider_circle() {
    let cfg = config(1, 1);
    let center = Vec2::new(400.0, 400.0);
    let obstacle = ObstacleState {
        position: center,
        velocity: Vec2::zeros(),
    };
    let contour_at = |radius: f64| {
        let s = state_with(
            vec![circling_uav(center, radius, 12, cfg.uav_speed)],
            vec![obstacle.clone()],
            &cfg,
        );
        compute_reward(&s, 0, &cfg).unwrap().contour
    };
    let on_edge = contour_at(cfg.d_safe);
    let wider = contour_at(cfg.d_safe + 30.0);
    assert!(on_edge > wider, "edge {on_edge} vs wider {wider}");
}

#[test]
fn straight_flight_far_away_scores_exactly_one() {
    let cfg = config(1, 0);
    let mut uav = UavState::new(Vec2::new(0.0, 0.0), Vec2::new(1000.0, 0.0), 0.0, 10.0);
    uav.path = (0..6).map(|k| Vec2::new(10.0 * k as f64, 0.0)).collect();
    uav.position = *uav.path.last().unwrap();
    let s = state_with(vec![uav], Vec::new(), &cfg);
    let r = compute_reward(&s, 0, &cfg).unwrap();
    assert_eq!(r.contour, 0.0);
    assert_eq!(r.formation, 1.0);
    assert_eq!(r.collide, 1.0);
    assert_eq!(r.total, 1.0);
}

#[test]
fn collision_gates_swarming_term() {
    let cfg = config(2, 1);
    let mut a = UavState::new(Vec2::new(100.0, 100.0), Vec2::new(700.0, 100.0), 0.0, 10.0);
    a.path = (0..5).map(|k| Vec2::new(60.0 + 10.0 * k as f64, 100.0)).collect();
    let mut b = a.clone();
    b.path = (0..5).map(|k| Vec2::new(60.0 + 10.0 * k as f64, 300.0)).collect();
    b.position = *b.path.last().unwrap();
    let obstacle = ObstacleState {
        position: Vec2::new(600.0, 600.0),
        velocity: Vec2::zeros(),
    };
    let clear = state_with(vec![a.clone(), b.clone()], vec![obstacle.clone()], &cfg);
    assert_eq!(collision_indicator(&clear, 0, cfg.d_col), 1.0);
    let r_clear = compute_reward(&clear, 0, &cfg).unwrap();

    let near = ObstacleState {
        position: a.position + Vec2::new(0.0, cfg.d_col - 1e-6),
        velocity: Vec2::zeros(),
    };
    let hit = state_with(vec![a.clone(), b.clone()], vec![near], &cfg);
    assert_eq!(collision_indicator(&hit, 0, cfg.d_col), 0.0);
    assert_eq!(collision_indicator(&hit, 1, cfg.d_col), 1.0);
    let r_hit = compute_reward(&hit, 0, &cfg).unwrap();
    assert_eq!(r_hit.total, r_hit.contour);
    assert_eq!(r_clear.swarming(), 1.0);

    let mut close = b.clone();
    close.position = a.position + Vec2::new(cfg.d_col - 1e-6, 0.0);
    let pair = state_with(vec![a, close], vec![obstacle], &cfg);
    assert_eq!(collision_indicator(&pair, 0, cfg.d_col), 0.0);
    assert_eq!(collision_indicator(&pair, 1, cfg.d_col), 0.0);
}

#[test]
fn reward_ignores_fields_it_does_not_read() {
    let cfg = config(2, 1);
    let mut s = reset(&ScenarioConfig { seed: 2, ..cfg.clone() }).unwrap();
    for _ in 0..12 {
        contour_swarm::env::step(&mut s, &cfg, &[contour_swarm::env::Action::new(0.1); 2], None).unwrap();
    }
    let mut other = s.clone();
    other.step += 40;
    other.done = true;
    other.reason = Some(TerminationReason::Timeout);
    for u in other.uavs.iter_mut() {
        u.spawn = Vec2::new(-123.0, 456.0);
        u.target = Vec2::new(9e3, 9e3);
        let keep = u.history(cfg.history_steps).to_vec();
        u.path = [vec![Vec2::new(1e4, 1e4); 3], keep].concat();
    }
    for i in 0..2 {
        assert_eq!(
            compute_reward(&s, i, &cfg).unwrap(),
            compute_reward(&other, i, &cfg).unwrap()
        );
    }
}

#[test]
fn too_short_history_is_an_error() {
    let cfg = config(1, 0);
    let s = reset(&cfg).unwrap();
    assert!(compute_reward(&s, 0, &cfg).is_err());
}

proptest! {
    #[test]
    fn decomposition_identity(contour in -1e3..1e3f64, formation in -1.0..1.0f64, hit in any::<bool>()) {
        let collide = if hit { 0.0 } else { 1.0 };
        let r = RewardBreakdown::new(contour, formation, collide);
        prop_assert_eq!(r.total, r.contour + r.formation * r.collide);
        prop_assert!(r.swarming() >= -1.0 && r.swarming() <= 1.0);
        if hit {
            prop_assert_eq!(r.swarming(), 0.0);
        }
    }

    #[test]
    fn formation_is_the_cosine(a in -3.2..3.2f64, b in -3.2..3.2f64, s1 in 0.1..50.0f64, s2 in 0.1..50.0f64) {
        let v = Vec2::new(a.cos(), a.sin()) * s1;
        let w = Vec2::new(b.cos(), b.sin()) * s2;
        prop_assert!((formation_reward(v, w).unwrap() - (a - b).cos()).abs() <= 1e-12);
    }
}
