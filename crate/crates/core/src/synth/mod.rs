//! Seeded generator of labelled synthetic strokes and rallies in camera pixel
//! space, plus tracker-style degradation (dropouts and jitter).

pub mod physics;
pub mod templates;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::{PitchRecord, StrokeAnnotation, StrokeRecord};
use crate::recognition::{prepare_sample, PadMode, StrokeLabel, StrokeSample};
use crate::segment::{detect_strokes, SegmenterConfig, StrokeDirection, StrokeOutcome};
use crate::trajectory::{drop_missing, BallObservation, Point, Trajectory, TrajectoryError};

pub use physics::{simulate_flight, CameraModel, Contact, ContactKind, Flight, FlightState, PhysicsParams};
pub use templates::{default_template, Range, ServeTemplate, StrokeTemplate, TemplateSet, TEMPLATE_VERSION};

use physics::{BALL_RADIUS_M, NET_HEIGHT_M};

/// Ground truth of a generated trajectory, in the stroke annotation format.
pub type RallyAnnotation = StrokeAnnotation;

/// Coordinates are snapped to this pixel grid (exact in binary and in 3-decimal CSV).
pub const PIXEL_GRID: f64 = 0.125;
/// Table bounces are kept at least this many frames away from stroke boundaries.
pub const MIN_BOUNCE_CLEARANCE: usize = 9;
const FRAME_MARGIN_PX: f64 = 4.0;
const MAX_FLIGHT_S: f64 = 3.0;
const ATTEMPTS_PER_ROUND: usize = 200;
const LEAD_IN_FRAMES: usize = 20;
const CATCH_FRAMES: usize = 24;
const RALLY_RETRIES: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid physical or camera parameters: {0}")]
    InvalidParams(String),
    #[error("invalid stroke template: {0}")]
    InvalidTemplate(String),
    #[error("invalid rally plan: {0}")]
    InvalidPlan(String),
    #[error("stroke {stroke} ({kind}) could not be realised with the template ranges")]
    Unrealizable { stroke: usize, kind: RallyKind },
    #[error("generated trajectory has {0} frames, at least 5 required")]
    TooShort(usize),
    #[error("invalid degradation: {0}")]
    InvalidDegrade(String),
    #[error("stroke generated with seed {0} was not recovered by the segmenter")]
    Undetected(u64),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RallyKind {
    Serve,
    Valid,
    MissedNet,
    MissedOut,
}

impl RallyKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Serve => "serve",
            Self::Valid => "valid",
            Self::MissedNet => "missed_net",
            Self::MissedOut => "missed_out",
        }
    }

    pub fn outcome(self) -> StrokeOutcome {
        match self {
            Self::Serve => StrokeOutcome::Serve,
            Self::Valid => StrokeOutcome::Valid,
            Self::MissedNet => StrokeOutcome::MissedNet,
            Self::MissedOut => StrokeOutcome::MissedOut,
        }
    }

    fn is_missed(self) -> bool {
        matches!(self, Self::MissedNet | Self::MissedOut)
    }
}

impl fmt::Display for RallyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RallyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Self::Serve, Self::Valid, Self::MissedNet, Self::MissedOut]
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown stroke kind `{s}` (expected serve|valid|missed_net|missed_out)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RallyStep {
    pub template: StrokeTemplate,
    pub kind: RallyKind,
    pub direction: StrokeDirection,
}

/// One entry of a textual rally plan such as `serve,valid:lob*3,missed_net`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlanItem {
    pub kind: RallyKind,
    pub label: Option<StrokeLabel>,
}

pub fn parse_rally_plan(text: &str) -> Result<Vec<PlanItem>, SynthError> {
    let mut items = Vec::new();
    for part in text.split(',').map(str::trim) {
        let (body, count) = match part.split_once('*') {
            Some((b, n)) => {
                let n: usize = n
                    .trim()
                    .parse()
                    .map_err(|_| SynthError::InvalidPlan(format!("bad repeat count in `{part}`")))?;
                (b.trim(), n)
            }
            None => (part, 1),
        };
        let (kind, label) = match body.split_once(':') {
            Some((k, l)) => (k, Some(l.parse().map_err(SynthError::InvalidPlan)?)),
            None => (body, None),
        };
        let kind: RallyKind = kind.parse().map_err(SynthError::InvalidPlan)?;
        items.extend(std::iter::repeat_n(PlanItem { kind, label }, count));
    }
    Ok(items)
}

fn check_plan(steps: &[RallyStep]) -> Result<(), SynthError> {
    let bad = |m: String| Err(SynthError::InvalidPlan(m));
    let Some(first) = steps.first() else {
        return bad("a rally needs at least one stroke".into());
    };
    if first.kind != RallyKind::Serve {
        return bad("the first stroke of a rally must be a serve".into());
    }
    for (i, pair) in steps.windows(2).enumerate() {
        if pair[1].direction != pair[0].direction.flipped() {
            return bad(format!("stroke {} does not alternate direction", i + 1));
        }
        if pair[1].kind == RallyKind::Serve {
            return bad(format!("stroke {} is a serve inside a rally", i + 1));
        }
        if pair[0].kind.is_missed() {
            return bad(format!("stroke {i} is a missed stroke and must be the last one"));
        }
    }
    for s in steps {
        s.template.validate()?;
    }
    Ok(())
}

fn sample(rng: &mut ChaCha8Rng, r: Range) -> f64 {
    if r[0] == r[1] {
        r[0]
    } else {
        rng.random_range(r[0]..=r[1])
    }
}

fn quantize(v: f64) -> f64 {
    (v / PIXEL_GRID).round() * PIXEL_GRID
}

#[derive(Debug, Clone, Copy)]
struct Launch {
    speed: f64,
    angle_deg: f64,
    magnus: f64,
}

#[derive(Debug, Clone, Copy)]
struct Ranges {
    speed: Range,
    angle: Range,
    magnus: Range,
}

impl Ranges {
    /// Progressively wider ranges for later sampling rounds.
    fn widened(self, round: usize) -> Self {
        let (s_lo, s_hi, da) = match round {
            0 => (1.0, 1.0, 0.0),
            1 => (0.85, 1.2, 10.0),
            _ => (0.6, 1.6, 25.0),
        };
        Self {
            speed: [self.speed[0] * s_lo, self.speed[1] * s_hi],
            angle: [self.angle[0] - da, self.angle[1] + da],
            magnus: self.magnus,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum StartSpec {
    At(f64, f64),
    /// Sampled contact behind the striker's table end.
    Behind { distance: Range, height: Range },
}

#[derive(Debug, Clone, Copy)]
struct FlightPlan {
    ranges: Ranges,
    kind: RallyKind,
    /// Frames flown past the far table end before the next contact.
    gap: usize,
    /// Frames kept after a net contact.
    rebound: usize,
    sign: f64,
}

/// Accepted flight of one stroke in stroke-local coordinates (travel toward +x).
struct StrokeFlight {
    states: Vec<FlightState>,
    /// `(state index, x)` of every table bounce up to `end`.
    bounces: Vec<(usize, f64)>,
    /// State index where the stroke ends: the net contact for a missed-net
    /// stroke, the last state otherwise.
    end: usize,
}

/// A seeded generator bound to one set of physics, camera and templates.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub params: PhysicsParams,
    pub camera: CameraModel,
    pub templates: TemplateSet,
}

impl Default for Generator {
    fn default() -> Self {
        Self { params: PhysicsParams::default(), camera: CameraModel::default(), templates: TemplateSet::builtin() }
    }
}

impl Generator {
    pub fn new(params: PhysicsParams, camera: CameraModel, templates: TemplateSet) -> Result<Self, SynthError> {
        params.validate()?;
        camera.validate()?;
        Ok(Self { params, camera, templates })
    }

    fn template(&self, label: StrokeLabel) -> Result<StrokeTemplate, SynthError> {
        self.templates
            .get(label)
            .copied()
            .ok_or_else(|| SynthError::InvalidTemplate(format!("no template for {label}")))
    }

    /// Turns plan items into rally steps: unlabeled strokes get a random label
    /// and the serve direction is random, all from `seed`.
    pub fn plan(&self, items: &[PlanItem], seed: u64) -> Result<Vec<RallyStep>, SynthError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let mut direction =
            if rng.random_bool(0.5) { StrokeDirection::LeftToRight } else { StrokeDirection::RightToLeft };
        let mut steps = Vec::with_capacity(items.len());
        for item in items {
            let label = match item.label {
                Some(l) => l,
                None => StrokeLabel::ALL[rng.random_range(0..StrokeLabel::COUNT)],
            };
            steps.push(RallyStep { template: self.template(label)?, kind: item.kind, direction });
            direction = direction.flipped();
        }
        Ok(steps)
    }

    fn in_frame(&self, x: f64, z: f64) -> bool {
        let (px, py) = self.camera.to_pixel(x, z);
        let m = FRAME_MARGIN_PX;
        px >= m && px <= self.camera.width - 1.0 - m && py >= m && py <= self.camera.height - 1.0 - m
    }

    /// Integrates one stroke from `start` and checks it realises `kind`.
    fn fly(&self, start: (f64, f64), launch: Launch, plan: FlightPlan) -> Option<StrokeFlight> {
        let FlightPlan { kind, gap, rebound, sign, .. } = plan;
        let params = PhysicsParams { magnus_accel: launch.magnus, ..self.params };
        let a = launch.angle_deg.to_radians();
        let s0 = FlightState { x: start.0, z: start.1, vx: launch.speed * a.cos(), vz: launch.speed * a.sin() };
        let half = params.half_length();
        let max_steps = (MAX_FLIGHT_S * self.camera.fps) as usize;

        let mut steps = 0usize;
        let mut passed: Option<usize> = None;
        let mut net_at: Option<usize> = None;
        let mut failed = false;
        let flight = simulate_flight(s0, &params, self.camera.fps, max_steps, |s, contacts| {
            steps += 1;
            if s.z < -1.0 {
                failed = true;
                return false;
            }
            let net = contacts.iter().any(|c| c.kind == ContactKind::Net);
            if kind == RallyKind::MissedNet {
                if net && net_at.is_none() {
                    net_at = Some(steps);
                }
                if net_at.is_none() && s.x > BALL_RADIUS_M {
                    failed = true;
                    return false;
                }
                return net_at.is_none_or(|n| steps < n + rebound);
            }
            if net {
                failed = true;
                return false;
            }
            if passed.is_none() && s.x > half {
                passed = Some(steps);
            }
            passed.is_none_or(|p| steps < p + gap)
        });
        if failed {
            return None;
        }
        let end = flight.states.len() - 1;
        let finished = match kind {
            RallyKind::MissedNet => net_at.is_some_and(|n| end == n + rebound),
            _ => passed.is_some_and(|p| end == p + gap),
        };
        if !finished || end < 12 {
            return None;
        }
        for st in &flight.states {
            if (st.x.abs() < half && st.z < 0.0) || !self.in_frame(sign * st.x, st.z) {
                return None;
            }
        }

        let bounces: Vec<(usize, f64)> = flight
            .contacts
            .iter()
            .filter(|c| c.kind == ContactKind::Table)
            .map(|c| {
                let (a, b) = (c.step, c.step + 1);
                let idx = if flight.states[b].z < flight.states[a].z { b } else { a };
                (idx, c.x)
            })
            .collect();
        let clear = |i: usize| i >= MIN_BOUNCE_CLEARANCE && end - i >= MIN_BOUNCE_CLEARANCE;

        match kind {
            RallyKind::MissedNet => {
                let n = net_at.expect("finished");
                if bounces.iter().any(|&(i, _)| i <= n) {
                    return None;
                }
            }
            _ => {
                let crossing = flight.states.windows(2).find(|w| w[0].x < 0.0 && w[1].x >= 0.0)?;
                let f = -crossing[0].x / (crossing[1].x - crossing[0].x);
                let z = crossing[0].z + f * (crossing[1].z - crossing[0].z);
                if z < NET_HEIGHT_M + BALL_RADIUS_M {
                    return None;
                }
                let pattern_ok = match (kind, bounces.as_slice()) {
                    (RallyKind::Serve, [(i, x1), (j, x2)]) => {
                        *x1 < 0.0 && *x2 > 0.0 && clear(*i) && clear(*j) && j - i >= MIN_BOUNCE_CLEARANCE
                    }
                    (RallyKind::Valid, [(i, x)]) => *x > 0.0 && clear(*i),
                    (RallyKind::MissedOut, []) => true,
                    _ => false,
                };
                if !pattern_ok {
                    return None;
                }
            }
        }
        let stroke_end = if kind == RallyKind::MissedNet { net_at.expect("finished") } else { end };
        let bounces = bounces.into_iter().filter(|&(i, _)| i <= stroke_end).collect();
        Some(StrokeFlight { states: flight.states, bounces, end: stroke_end })
    }

    fn realise(&self, rng: &mut ChaCha8Rng, index: usize, start: StartSpec, plan: FlightPlan) -> Result<((f64, f64), StrokeFlight), SynthError> {
        for round in 0..3 {
            let r = plan.ranges.widened(round);
            for _ in 0..ATTEMPTS_PER_ROUND {
                let at = match start {
                    StartSpec::At(x, z) => (x, z),
                    StartSpec::Behind { distance, height } => {
                        (-(self.params.half_length() + sample(rng, distance)), sample(rng, height))
                    }
                };
                let launch = Launch {
                    speed: sample(rng, r.speed),
                    angle_deg: sample(rng, r.angle),
                    magnus: sample(rng, r.magnus),
                };
                if let Some(f) = self.fly(at, launch, plan) {
                    return Ok((at, f));
                }
            }
        }
        Err(SynthError::Unrealizable { stroke: index, kind: plan.kind })
    }

    /// Simulates a full rally. The first step must be a serve, directions
    /// must alternate and a missed stroke can only come last.
    pub fn rally(&self, steps: &[RallyStep], seed: u64) -> Result<(Trajectory, RallyAnnotation), SynthError> {
        check_plan(steps)?;
        self.compose(steps, seed, false)
    }

    /// Simulates one valid stroke with an incoming ball before the contact
    /// and a catch after it.
    pub fn stroke(
        &self,
        template: &StrokeTemplate,
        direction: StrokeDirection,
        seed: u64,
    ) -> Result<(Trajectory, RallyAnnotation), SynthError> {
        template.validate()?;
        let step = RallyStep { template: *template, kind: RallyKind::Valid, direction };
        self.compose(&[step], seed, true)
    }

    /// `count` labelled classifier samples from standalone strokes, labels
    /// taking turns in [`StrokeLabel::ALL`] order. Each stroke is run through
    /// the segmenter and prepared exactly like tracker data.
    pub fn labeled_samples(&self, count: usize, seed: u64, pad_mode: PadMode) -> Result<Vec<StrokeSample>, SynthError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(2);
        let jobs: Vec<(usize, u64, StrokeDirection)> = (0..count)
            .map(|i| {
                let dir = if rng.random_bool(0.5) { StrokeDirection::LeftToRight } else { StrokeDirection::RightToLeft };
                (i, rng.random(), dir)
            })
            .collect();
        let cfg = SegmenterConfig::for_frame(self.camera.frame());
        jobs.into_par_iter()
            .map(|(i, stroke_seed, dir)| {
                let label = StrokeLabel::ALL[i % StrokeLabel::COUNT];
                let (traj, ann) = self.stroke(&self.template(label)?, dir, stroke_seed)?;
                let truth = &ann.strokes[0];
                let clean = drop_missing(&traj)?;
                let segs = detect_strokes(&clean, &cfg).map_err(|_| SynthError::Undetected(stroke_seed))?;
                let seg = segs
                    .iter()
                    .find(|s| s.direction == dir && s.start.frame_index.abs_diff(truth.start_frame) <= 3)
                    .ok_or(SynthError::Undetected(stroke_seed))?;
                let mut sample = prepare_sample(&clean, seg, pad_mode, self.camera.width)
                    .map_err(|_| SynthError::Undetected(stroke_seed))?;
                sample.label = Some(label);
                sample.source_id = format!("synth-{seed}-{i}");
                Ok(sample)
            })
            .collect()
    }

    fn compose(&self, steps: &[RallyStep], seed: u64, standalone: bool) -> Result<(Trajectory, RallyAnnotation), SynthError> {
        self.params.validate()?;
        self.camera.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // a contact inherited from the previous stroke can be unplayable for
        // the next template; start the rally over from the serve then
        let mut result = self.try_compose(steps, &mut rng, standalone);
        for _ in 1..RALLY_RETRIES {
            match result {
                Err(SynthError::Unrealizable { stroke, .. }) if stroke > 0 => {
                    result = self.try_compose(steps, &mut rng, standalone);
                }
                _ => break,
            }
        }
        result
    }

    fn try_compose(
        &self,
        steps: &[RallyStep],
        rng: &mut ChaCha8Rng,
        standalone: bool,
    ) -> Result<(Trajectory, RallyAnnotation), SynthError> {
        let dt = 1.0 / self.camera.fps;
        let serve = self.templates.serve;

        // world (x, z) per frame
        let mut world: Vec<(f64, f64)> = Vec::new();
        let mut flights: Vec<(usize, StrokeFlight, f64)> = Vec::new();
        for (i, step) in steps.iter().enumerate() {
            let sign = step.direction.sign();
            let t = &step.template;
            let start = match world.last() {
                Some(&(wx, wz)) => StartSpec::At(sign * wx, wz),
                None if step.kind == RallyKind::Serve => StartSpec::Behind {
                    distance: serve.contact_distance_range,
                    height: serve.contact_height_range,
                },
                None => StartSpec::Behind { distance: t.contact_distance_range, height: t.contact_height_range },
            };
            let ranges = if step.kind == RallyKind::Serve {
                Ranges { speed: serve.speed_range, angle: serve.launch_angle_range, magnus: t.magnus_range }
            } else {
                Ranges { speed: t.speed_range, angle: t.launch_angle_range, magnus: t.magnus_range }
            };
            let plan = FlightPlan {
                ranges,
                kind: step.kind,
                gap: rng.random_range(2..=6),
                rebound: rng.random_range(30..=40),
                sign,
            };
            let ((x0, z0), flight) = self.realise(rng, i, start, plan)?;
            if world.is_empty() {
                // lead-in, in stroke-local coordinates: an incoming ball from
                // the opponent, or a serve toss drifting back from the table
                let (lead_vx, lead_vz, lead_g) =
                    if standalone { (-3.0, -0.5, 0.0) } else { (-0.5, -1.5, self.params.gravity) };
                for k in (1..=LEAD_IN_FRAMES).rev() {
                    let tau = k as f64 * dt;
                    let x = x0 - lead_vx * tau;
                    let z = z0 - lead_vz * tau - 0.5 * lead_g * tau * tau;
                    world.push((sign * x, z));
                }
                world.push((sign * x0, z0));
            }
            let contact = world.len() - 1;
            world.extend(flight.states[1..].iter().map(|s| (sign * s.x, s.z)));
            flights.push((contact, flight, sign));
        }

        let (_, last_flight, last_sign) = flights.last().expect("non-empty plan");
        if steps.last().expect("non-empty").kind != RallyKind::MissedNet {
            let end = last_flight.states.last().expect("non-empty");
            for k in 1..=CATCH_FRAMES {
                let tau = k as f64 * dt;
                world.push((last_sign * (end.x - 1.2 * tau), end.z + 1.0 * tau));
            }
        }
        if world.iter().any(|&(x, z)| !self.in_frame(x, z)) {
            return Err(SynthError::Unrealizable { stroke: steps.len(), kind: steps[steps.len() - 1].kind });
        }

        let pixels: Vec<(f64, f64)> = world
            .iter()
            .map(|&(x, z)| {
                let (px, py) = self.camera.to_pixel(x, z);
                (quantize(px), quantize(py))
            })
            .collect();
        if pixels.len() < 5 {
            return Err(SynthError::TooShort(pixels.len()));
        }

        let mut strokes = Vec::with_capacity(steps.len());
        for (step, (contact, flight, _)) in steps.iter().zip(&flights) {
            let pitches: Vec<PitchRecord> = flight
                .bounces
                .iter()
                .map(|&(i, _)| {
                    let f = contact + i;
                    PitchRecord { frame: f as u64, x: pixels[f].0, y: pixels[f].1, table: None }
                })
                .collect();
            strokes.push(StrokeRecord {
                start_frame: *contact as u64,
                end_frame: (contact + flight.end) as u64,
                direction: step.direction,
                outcome: step.kind.outcome(),
                contact_frames: Some(pitches.iter().map(|p| p.frame).collect()),
                pitches,
                label: Some(step.template.label),
                note: None,
            });
        }

        let frame = self.camera.frame();
        let traj = Trajectory::from_frames(
            pixels.iter().enumerate().map(|(i, &(x, y))| (i as u64, Some(Point::new(x, y)))),
            frame,
        )?;
        Ok((traj, StrokeAnnotation { fps: frame.fps, strokes, config: None }))
    }
}

/// One valid stroke with the default physics and camera.
pub fn simulate_stroke(
    template: &StrokeTemplate,
    params: &PhysicsParams,
    cam: &CameraModel,
    direction: StrokeDirection,
    rng_seed: u64,
) -> Result<(Trajectory, RallyAnnotation), SynthError> {
    Generator::new(*params, *cam, TemplateSet::builtin())?.stroke(template, direction, rng_seed)
}

pub fn simulate_rally(
    steps: &[RallyStep],
    params: &PhysicsParams,
    cam: &CameraModel,
    rng_seed: u64,
) -> Result<(Trajectory, RallyAnnotation), SynthError> {
    Generator::new(*params, *cam, TemplateSet::builtin())?.rally(steps, rng_seed)
}

/// Emulates tracker output: each observation is independently lost with
/// probability `dropout_prob`, and kept coordinates get Gaussian jitter
/// clamped to the frame.
pub fn degrade(traj: &Trajectory, dropout_prob: f64, jitter_sigma: f64, rng_seed: u64) -> Result<Trajectory, SynthError> {
    if !(0.0..1.0).contains(&dropout_prob) {
        return Err(SynthError::InvalidDegrade(format!("dropout probability {dropout_prob} must be in [0, 1)")));
    }
    if !(jitter_sigma.is_finite() && jitter_sigma >= 0.0) {
        return Err(SynthError::InvalidDegrade(format!("jitter sigma {jitter_sigma} must be non-negative")));
    }
    let frame = traj.frame();
    let mut drop_rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut jitter_rng = ChaCha8Rng::seed_from_u64(rng_seed);
    jitter_rng.set_stream(1);
    let noise = Normal::new(0.0, jitter_sigma).expect("sigma validated");
    let clamp = |v: f64, size: f64| v.clamp(0.0, size - PIXEL_GRID);

    let observations = traj
        .observations()
        .iter()
        .map(|o| {
            let lost = drop_rng.random::<f64>() < dropout_prob;
            let position = o.position.filter(|_| !lost).map(|p| {
                if jitter_sigma == 0.0 {
                    p
                } else {
                    let dx = noise.sample(&mut jitter_rng);
                    let dy = noise.sample(&mut jitter_rng);
                    Point::new(clamp(quantize(p.x + dx), frame.width), clamp(quantize(p.y + dy), frame.height))
                }
            });
            BallObservation { position, ..*o }
        })
        .collect();
    Ok(Trajectory::new(observations, frame)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(label: StrokeLabel, kind: RallyKind, direction: StrokeDirection) -> RallyStep {
        RallyStep { template: default_template(label), kind, direction }
    }

    #[test]
    fn plan_parsing() {
        let items = parse_rally_plan("serve,valid*5").unwrap();
        assert_eq!(items.len(), 6);
        assert_eq!(items[0].kind, RallyKind::Serve);
        assert!(items[1..].iter().all(|i| i.kind == RallyKind::Valid && i.label.is_none()));
        let items = parse_rally_plan("serve:push, missed_net").unwrap();
        assert_eq!(items[0].label, Some(StrokeLabel::Push));
        assert_eq!(items[1].kind, RallyKind::MissedNet);
        assert!(parse_rally_plan("serve,volley").is_err());
        assert!(parse_rally_plan("valid*x").is_err());
    }

    #[test]
    fn plan_rules() {
        use StrokeDirection::*;
        let g = Generator::default();
        let ok = [step(StrokeLabel::Push, RallyKind::Serve, LeftToRight), step(StrokeLabel::Lob, RallyKind::Valid, RightToLeft)];
        assert!(g.rally(&ok, 1).is_ok());
        let same = [ok[0], RallyStep { direction: LeftToRight, ..ok[1] }];
        assert!(matches!(g.rally(&same, 1), Err(SynthError::InvalidPlan(_))));
        assert!(matches!(g.rally(&ok[1..], 1), Err(SynthError::InvalidPlan(_))));
        let missed_first = [RallyStep { kind: RallyKind::MissedOut, ..ok[0] }];
        assert!(matches!(g.rally(&missed_first, 1), Err(SynthError::InvalidPlan(_))));
        let early_miss = [ok[0], RallyStep { kind: RallyKind::MissedNet, ..ok[1] }, step(StrokeLabel::Flat, RallyKind::Valid, LeftToRight)];
        assert!(matches!(g.rally(&early_miss, 1), Err(SynthError::InvalidPlan(_))));
    }

    #[test]
    fn single_serve_bounces_on_both_halves() {
        let g = Generator::default();
        let steps = g.plan(&parse_rally_plan("serve").unwrap(), 3).unwrap();
        let (traj, ann) = g.rally(&steps, 3).unwrap();
        assert_eq!(ann.strokes.len(), 1);
        let s = &ann.strokes[0];
        let frames = s.contact_frames.as_ref().unwrap();
        assert_eq!(frames.len(), 2);
        let xs: Vec<f64> = s.pitches.iter().map(|p| p.x).collect();
        assert!((xs[0] - 960.0) * (xs[1] - 960.0) < 0.0);
        assert!(traj.observations().iter().all(|o| o.position.is_some()));
    }

    #[test]
    fn degrade_identity_and_domain() {
        let g = Generator::default();
        let (traj, _) = g.stroke(&default_template(StrokeLabel::Block), StrokeDirection::LeftToRight, 9).unwrap();
        assert_eq!(degrade(&traj, 0.0, 0.0, 5).unwrap(), traj);
        assert!(degrade(&traj, 1.0, 0.0, 5).is_err());
        assert!(degrade(&traj, 0.1, -1.0, 5).is_err());
        let noisy = degrade(&traj, 0.2, 2.0, 5).unwrap();
        assert_eq!(noisy, degrade(&traj, 0.2, 2.0, 5).unwrap());
        assert_eq!(noisy.len(), traj.len());
    }
}
