use contour_swarm::env::{observe, reset, step, Action, Env, EpisodeState, ScenarioConfig, TerminationReason};
use contour_swarm::pso::PsoParams;
use contour_swarm::{Error, Vec2, MAX_HEADING_DELTA};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn wrapped_diff(a: f64, b: f64) -> f64 {
    let d = a - b;
    d.sin().atan2(d.cos())
}

fn random_config(rng: &mut ChaCha8Rng) -> ScenarioConfig {
    ScenarioConfig {
        n_uavs: rng.gen_range(1..=6),
        n_obstacles: rng.gen_range(0..=3),
        max_obs: if rng.gen_bool(0.3) {
            Some(rng.gen_range(0..=4))
        } else {
            None
        },
        max_steps: rng.gen_range(20..=150),
        seed: rng.gen::<u64>() >> 1,
        ..ScenarioConfig::default()
    }
}

fn random_action(rng: &mut ChaCha8Rng, heading: f64, target: Vec2, pos: Vec2) -> Action {
    match rng.gen_range(0..4) {
        0 => Action::new(rng.gen_range(-3.0..3.0)),
        1 => Action::new(rng.gen_range(-MAX_HEADING_DELTA..=MAX_HEADING_DELTA)),
        2 => {
            let want = (target - pos).y.atan2((target - pos).x);
            Action::new(wrapped_diff(want, heading))
        }
        _ => Action::new(if rng.gen_bool(0.5) { 1e6 } else { -1e6 }),
    }
}

fn in_view(from: Vec2, heading: f64, p: Vec2, config: &ScenarioConfig) -> bool {
    let d = p - from;
    let dist = d.norm();
    if dist > config.sense_range {
        return false;
    }
    dist == 0.0 || d.dot(&Vec2::new(heading.cos(), heading.sin())) / dist >= (0.5 * config.sense_aperture).cos() - 1e-12
}

fn check_observations(state: &EpisodeState, config: &ScenarioConfig) {
    let m = config.max_obs();
    for i in 0..state.uavs.len() {
        let obs = observe(state, config, i);
        let uav = &state.uavs[i];
        assert_eq!(obs.rows.len(), 2 + m);
        assert_eq!(obs.mask.len(), m);
        assert_eq!(obs.flatten().len(), config.obs_dim());
        let sensed: Vec<f64> = state
            .obstacles
            .iter()
            .filter(|o| in_view(uav.position, uav.heading, o.position, config))
            .map(|o| (o.position - uav.position).norm())
            .collect();
        assert_eq!(obs.mask.iter().filter(|&&v| v).count(), sensed.len().min(m));
        let mut last = 0.0;
        for (k, row) in obs.obstacle_rows().iter().enumerate() {
            if obs.mask[k] {
                let p = Vec2::new(row[0], row[1]);
                let d = (p - uav.position).norm();
                assert!(d <= config.sense_range);
                assert!(d >= last);
                last = d;
                assert!(state
                    .obstacles
                    .iter()
                    .any(|o| o.position == p && o.velocity == Vec2::new(row[2], row[3])));
            } else {
                assert_eq!(*row, [0.0; 4], "masked row must be zero");
                assert!(obs.mask[k..].iter().all(|&v| !v), "valid rows come first");
            }
        }
    }
}

#[test]
fn fuzzed_steps_respect_dynamics_and_termination() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut steps = 0usize;
    let mut episodes = 0usize;
    let mut reasons = [0usize; 3];
    while steps < 100_000 {
        let config = random_config(&mut rng);
        let mut state = match reset(&config) {
            Ok(s) => s,
            Err(Error::InfeasibleSpawn { .. }) => continue,
            Err(e) => panic!("{e}"),
        };
        episodes += 1;
        check_observations(&state, &config);
        while !state.done {
            let before = state.clone();
            let actions: Vec<Action> = state
                .uavs
                .iter()
                .map(|u| random_action(&mut rng, u.heading, u.target, u.position))
                .collect();
            let res = step(&mut state, &config, &actions, None).unwrap();
            steps += 1;
            assert_eq!(state.step, before.step + 1);

            let mut any_collision = false;
            for (i, (u0, u1)) in before.uavs.iter().zip(&state.uavs).enumerate() {
                if u0.arrived {
                    assert_eq!(u1.position, u0.position, "retired UAV moved");
                    assert!(!res.acted[i]);
                    assert_eq!(res.rewards[i], 0.0);
                    continue;
                }
                assert!(res.acted[i]);
                let moved = (u1.position - u0.position).norm();
                assert!(
                    (moved - config.uav_speed * config.dt).abs() <= 1e-9,
                    "speed not conserved: {moved}"
                );
                let turn = wrapped_diff(u1.heading, u0.heading);
                let want = actions[i].heading_delta.clamp(-MAX_HEADING_DELTA, MAX_HEADING_DELTA);
                assert!((turn - want).abs() <= 1e-9, "turn {turn} vs {want}");
                assert!(turn.abs() <= MAX_HEADING_DELTA + 1e-12);
                assert!(res.rewards[i].is_finite());
                let b = res.breakdowns[i].unwrap();
                assert!(b.formation >= -1.0 && b.formation <= 1.0);
                assert_eq!(b.total, b.contour + b.formation * b.collide);

                let hit_obstacle = state
                    .obstacles
                    .iter()
                    .any(|o| (o.position - u1.position).norm() < config.d_col);
                let hit_uav = state.uavs.iter().enumerate().any(|(j, other)| {
                    j != i && !before.uavs[j].arrived && (other.position - u1.position).norm() < config.d_col
                });
                assert_eq!(res.collisions[i], hit_obstacle || hit_uav);
                assert_eq!(b.collide == 0.0, hit_obstacle || hit_uav);
                any_collision |= res.collisions[i];
            }
            for (o0, o1) in before.obstacles.iter().zip(&state.obstacles) {
                assert!((o1.position - (o0.position + o0.velocity * config.dt)).norm() <= 1e-9);
                assert_eq!(o1.velocity, o0.velocity);
            }

            let all_arrived = state.uavs.iter().all(|u| u.arrived);
            let expected = if any_collision {
                Some(TerminationReason::Collision)
            } else if all_arrived {
                Some(TerminationReason::Success)
            } else if state.step >= config.max_steps {
                Some(TerminationReason::Timeout)
            } else {
                None
            };
            assert_eq!(res.reason, expected);
            assert_eq!(res.done, expected.is_some());
            assert_eq!(state.done, res.done);
            if any_collision {
                assert!(state.uavs.iter().zip(&before.uavs).all(|(a, b)| a.arrived == b.arrived));
            }
            for (u0, u1) in before.uavs.iter().zip(&state.uavs) {
                if u1.arrived && !u0.arrived {
                    assert!((u1.position - u1.target).norm() <= config.d_col);
                }
            }
            assert_eq!(res.observations.len(), state.uavs.len());
            if steps.is_multiple_of(7) {
                check_observations(&state, &config);
            }
        }
        reasons[match state.reason.unwrap() {
            TerminationReason::Collision => 0,
            TerminationReason::Success => 1,
            TerminationReason::Timeout => 2,
        }] += 1;
        assert!(matches!(
            step(&mut state, &config, &[Action::new(0.0); 6][..config.n_uavs], None),
            Err(Error::EpisodeDone)
        ));
    }
    assert!(episodes > 100);
    assert!(
        reasons.iter().all(|&n| n > 0),
        "every termination reason exercised: {reasons:?}"
    );
}

#[test]
fn spawn_layout_is_mirrored_and_obstacles_start_clear() {
    for seed in 0..50 {
        let config = ScenarioConfig {
            n_uavs: 5,
            n_obstacles: 2,
            seed,
            ..ScenarioConfig::default()
        };
        let state = reset(&config).unwrap();
        for (i, u) in state.uavs.iter().enumerate() {
            let y = 800.0 * (i + 1) as f64 / 6.0;
            assert_eq!(u.position, Vec2::new(80.0, y));
            assert_eq!(u.target, Vec2::new(720.0, y));
            assert_eq!(u.planned_velocity, Vec2::new(10.0, 0.0));
        }
        for o in &state.obstacles {
            assert!(o.position.x >= 400.0 && o.position.x <= 720.0);
            let speed = o.velocity.norm();
            assert!((3.0 - 1e-9..=8.0 + 1e-9).contains(&speed));
        }
        assert!(state.min_uav_obstacle() >= config.d_col);
    }
}

#[test]
fn reset_is_reproducible_and_seed_sensitive() {
    let config = ScenarioConfig {
        n_uavs: 3,
        n_obstacles: 2,
        seed: 8,
        ..ScenarioConfig::default()
    };
    assert_eq!(reset(&config).unwrap(), reset(&config).unwrap());
    let other = ScenarioConfig {
        seed: 9,
        ..config.clone()
    };
    assert_ne!(reset(&config).unwrap().obstacles, reset(&other).unwrap().obstacles);
}

#[test]
fn warmup_steps_have_no_contour_term() {
    let config = ScenarioConfig {
        n_uavs: 2,
        n_obstacles: 1,
        seed: 3,
        ..ScenarioConfig::default()
    };
    let (mut env, _) = Env::new(config.clone()).unwrap();
    for k in 1..=4 {
        let res = env.step(&[Action::new(0.3), Action::new(-0.3)]).unwrap();
        for b in res.breakdowns.iter().flatten() {
            if k <= config.warmup_steps {
                assert_eq!(b.contour, 0.0);
            } else {
                assert!(b.contour != 0.0);
            }
        }
    }
}

#[test]
fn training_env_repairs_only_rewards_not_positions() {
    let config = ScenarioConfig {
        n_uavs: 2,
        n_obstacles: 0,
        arena_length: 60.0,
        d_col: 10.0,
        seed: 1,
        ..ScenarioConfig::default()
    };
    let mut plain = reset(&config).unwrap();
    let mut repaired = plain.clone();
    let actions = [Action::new(0.05), Action::new(-0.05)];
    let mut differs = false;
    for _ in 0..5 {
        let a = step(&mut plain, &config, &actions, None).unwrap();
        let b = step(&mut repaired, &config, &actions, Some(&PsoParams::default())).unwrap();
        differs |= a.rewards != b.rewards;
        assert_eq!(
            a.breakdowns.iter().map(|r| r.unwrap().formation).collect::<Vec<_>>(),
            b.breakdowns.iter().map(|r| r.unwrap().formation).collect::<Vec<_>>()
        );
    }
    assert_eq!(plain.uavs, repaired.uavs);
    assert!(differs, "repair never changed a reward");
}
