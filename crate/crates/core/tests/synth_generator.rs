use strokelab_core::recognition::StrokeLabel;
use strokelab_core::segment::StrokeDirection;
use strokelab_core::synth::*;
use strokelab_core::trajectory::{FrameSpec, Point, Trajectory};

fn launch(x: f64, z: f64, vx: f64, vz: f64) -> FlightState {
    FlightState { x, z, vx, vz }
}

#[test]
fn force_free_flight_is_a_straight_line_in_pixels() {
    let params = PhysicsParams { gravity: 0.0, drag_coeff: 0.0, magnus_accel: 0.0, ..PhysicsParams::default() };
    let cam = CameraModel::default();
    let flight = simulate_flight(launch(-1.6, 0.3, 6.0, 0.4), &params, cam.fps, 60, |_, _| true);
    assert!(flight.contacts.is_empty());
    let px: Vec<(f64, f64)> = flight.states.iter().map(|s| cam.to_pixel(s.x, s.z)).collect();
    let (dx, dy) = (px[1].0 - px[0].0, px[1].1 - px[0].1);
    for (k, p) in px.iter().enumerate() {
        assert!((p.0 - (px[0].0 + k as f64 * dx)).abs() < 1e-9);
        assert!((p.1 - (px[0].1 + k as f64 * dy)).abs() < 1e-9);
    }
}

#[test]
fn bounce_reverses_vertical_speed_by_restitution() {
    let params = PhysicsParams::default();
    let flight = simulate_flight(launch(-1.0, 0.4, 3.0, 0.0), &params, 120.0, 200, |_, _| true);
    let bounces: Vec<&Contact> = flight.contacts.iter().filter(|c| c.kind == ContactKind::Table).collect();
    assert!(!bounces.is_empty());
    for c in bounces {
        assert!(c.before.1 < 0.0);
        assert!((c.after.1 + params.restitution * c.before.1).abs() < 1e-9);
    }
}

#[test]
fn topspin_dips_earlier_and_lower() {
    let cam = CameraModel::default();
    let start = launch(-1.6, 0.25, 9.0, 1.2);
    let fly = |magnus: f64| {
        let params = PhysicsParams { magnus_accel: magnus, ..PhysicsParams::default() };
        simulate_flight(start, &params, cam.fps, 200, |_, c| c.is_empty())
    };
    let (flat, spin) = (fly(0.0), fly(6.0));
    let apex_row = |f: &Flight| f.states.iter().map(|s| cam.to_pixel(s.x, s.z).1).fold(f64::MAX, f64::min);
    assert!(apex_row(&spin) > apex_row(&flat));
    let first_bounce = |f: &Flight| f.contacts[0].step;
    assert_eq!(flat.contacts[0].kind, ContactKind::Table);
    assert!(first_bounce(&spin) < first_bounce(&flat));
}

#[test]
fn drag_never_speeds_the_ball_up_and_bounces_lose_energy() {
    let params = PhysicsParams::default();
    let flight = simulate_flight(launch(-1.5, 0.3, 8.0, 2.0), &params, 120.0, 300, |_, _| true);
    for w in flight.states.windows(2) {
        assert!(w[1].vx.abs() <= w[0].vx.abs());
    }
    for c in flight.contacts.iter().filter(|c| c.kind == ContactKind::Table) {
        let before = c.before.0.powi(2) + c.before.1.powi(2);
        let after = c.after.0.powi(2) + c.after.1.powi(2);
        assert!(after <= before);
    }
}

#[test]
fn dropout_rate_matches_binomial_expectation() {
    let frame = FrameSpec::default();
    let traj = Trajectory::from_frames((0..10_000u64).map(|i| (i, Some(Point::new(960.0, 540.0)))), frame).unwrap();
    let degraded = degrade(&traj, 0.05, 0.0, 3).unwrap();
    let kept = degraded.detected().count() as f64;
    let sigma = (10_000.0f64 * 0.05 * 0.95).sqrt();
    assert!((kept - 9_500.0).abs() <= 3.0 * sigma, "kept {kept}");
}

#[test]
fn degrade_rejects_certain_dropout() {
    let traj = Trajectory::from_frames((0..10u64).map(|i| (i, Some(Point::new(100.0, 100.0)))), FrameSpec::default()).unwrap();
    assert!(matches!(degrade(&traj, 1.0, 0.0, 0), Err(SynthError::InvalidDegrade(_))));
    assert_eq!(degrade(&traj, 0.0, 0.0, 9).unwrap(), traj);
}

#[test]
fn flat_strokes_are_at_least_twice_as_fast_as_pushes() {
    let g = Generator::default();
    let mean_speed = |label: StrokeLabel| {
        let t = default_template(label);
        let total: f64 = (0..100u64)
            .map(|seed| {
                let (traj, ann) = g.stroke(&t, StrokeDirection::LeftToRight, seed).unwrap();
                let s = &ann.strokes[0];
                let obs = traj.observations();
                let (a, b) = (obs[s.start_frame as usize].position.unwrap(), obs[s.end_frame as usize].position.unwrap());
                (b.x - a.x).abs() / (s.end_frame - s.start_frame) as f64
            })
            .sum();
        total / 100.0
    };
    let (flat, push) = (mean_speed(StrokeLabel::Flat), mean_speed(StrokeLabel::Push));
    assert!(flat >= 2.0 * push, "flat {flat} px/frame, push {push} px/frame");
}

#[test]
fn single_serve_bounces_once_on_each_side() {
    let g = Generator::default();
    for seed in 0..10 {
        let steps = g.plan(&parse_rally_plan("serve").unwrap(), seed).unwrap();
        let (traj, ann) = g.rally(&steps, seed).unwrap();
        assert_eq!(ann.strokes.len(), 1);
        let contacts = ann.strokes[0].contact_frames.clone().unwrap();
        assert_eq!(contacts.len(), 2);
        let x = |f: u64| traj.observations()[f as usize].position.unwrap().x;
        assert!((x(contacts[0]) - 960.0) * (x(contacts[1]) - 960.0) < 0.0);
    }
}

#[test]
fn five_returns_make_six_alternating_strokes() {
    let g = Generator::default();
    let steps = g.plan(&parse_rally_plan("serve,valid*5").unwrap(), 21).unwrap();
    let (_, ann) = g.rally(&steps, 21).unwrap();
    assert_eq!(ann.strokes.len(), 6);
    assert!(ann.strokes.windows(2).all(|w| w[1].direction == w[0].direction.flipped()));
}

#[test]
fn same_seed_same_bytes() {
    let g = Generator::default();
    let steps = g.plan(&parse_rally_plan("serve,valid*3,missed_out").unwrap(), 8).unwrap();
    let (a, ann_a) = g.rally(&steps, 8).unwrap();
    let (b, ann_b) = g.rally(&steps, 8).unwrap();
    assert_eq!(a.to_csv_string(), b.to_csv_string());
    assert_eq!(ann_a.to_json_pretty(), ann_b.to_json_pretty());
    let (c, _) = g.rally(&steps, 9).unwrap();
    assert_ne!(a.to_csv_string(), c.to_csv_string());
}

#[test]
fn non_alternating_plan_is_rejected() {
    let g = Generator::default();
    let mut steps = g.plan(&parse_rally_plan("serve,valid").unwrap(), 1).unwrap();
    steps[1].direction = steps[0].direction;
    assert!(matches!(g.rally(&steps, 1), Err(SynthError::InvalidPlan(_))));
}
