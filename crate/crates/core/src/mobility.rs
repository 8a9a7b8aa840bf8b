//! Random-waypoint mobility.
//!
//! Each node owns its own RNG stream, so a trajectory depends only on the
//! run seed, the node index, the speed and the area. Positions are computed
//! lazily: a segment is parametrised from its start point and start time,
//! which makes the result independent of how often it is sampled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geom::{euclid_distance, Point2D};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MobilityError {
    #[error("at least one node is required")]
    NoNodes,
    #[error("area dimensions must be positive, got {width} x {height}")]
    BadArea { width: f64, height: f64 },
    #[error("speed must be finite and non-negative, got {0}")]
    BadSpeed(f64),
}

/// Rectangular simulation area `[0, width] x [0, height]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Area {
    pub width: f64,
    pub height: f64,
}

impl Area {
    pub const fn new(width: f64, height: f64) -> Self {
        Self { width, height }
    }

    pub fn contains(&self, p: Point2D) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }

    fn clamp(&self, p: Point2D) -> Point2D {
        Point2D::new(p.x.clamp(0.0, self.width), p.y.clamp(0.0, self.height))
    }

    fn sample(&self, rng: &mut impl Rng) -> Point2D {
        Point2D::new(
            rng.random_range(0.0..=self.width),
            rng.random_range(0.0..=self.height),
        )
    }

    fn validate(&self) -> Result<(), MobilityError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(self.width) && ok(self.height) {
            Ok(())
        } else {
            Err(MobilityError::BadArea { width: self.width, height: self.height })
        }
    }
}

impl Default for Area {
    fn default() -> Self {
        Self::new(800.0, 800.0)
    }
}

/// Random-waypoint state for one node.
#[derive(Debug, Clone)]
pub struct MobilityState {
    /// Start of the current segment.
    position: Point2D,
    waypoint: Point2D,
    speed: f64,
    pause_time: f64,
    /// Time at which `position` was valid (segment start).
    segment_start: f64,
    /// The node rests at `position` until this time.
    pause_until: f64,
    area: Area,
    rng: ChaCha8Rng,
}

impl MobilityState {
    /// A state that never moves.
    pub fn stationary(position: Point2D, area: Area) -> Self {
        Self {
            position,
            waypoint: position,
            speed: 0.0,
            pause_time: 0.0,
            segment_start: 0.0,
            pause_until: 0.0,
            area,
            rng: ChaCha8Rng::seed_from_u64(0),
        }
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn waypoint(&self) -> Point2D {
        self.waypoint
    }

    pub fn pause_until(&self) -> f64 {
        self.pause_until
    }

    /// Advances the state to time `t` and returns the position there.
    ///
    /// `t` must not precede the start of the current segment.
    pub fn position_at(&mut self, t: f64) -> Point2D {
        debug_assert!(t >= self.segment_start, "mobility queried in the past");
        if self.speed <= 0.0 {
            return self.position;
        }
        loop {
            let depart = self.pause_until.max(self.segment_start);
            if t <= depart {
                return self.position;
            }
            let len = euclid_distance(self.position, self.waypoint);
            let arrival = depart + len / self.speed;
            if t < arrival {
                let f = (t - depart) * self.speed / len;
                let p = Point2D::new(
                    self.position.x + (self.waypoint.x - self.position.x) * f,
                    self.position.y + (self.waypoint.y - self.position.y) * f,
                );
                return self.area.clamp(p);
            }
            self.position = self.waypoint;
            self.segment_start = arrival;
            self.pause_until = arrival + self.pause_time;
            self.waypoint = self.area.sample(&mut self.rng);
        }
    }
}

/// Draws `n` uniform initial positions (and first waypoints) for a run.
///
/// Node `i` gets an independent RNG stream derived from `seed`, so adding
/// nodes never perturbs the trajectories of existing ones.
pub fn init_positions(
    seed: u64,
    n: usize,
    area: Area,
    speed: f64,
    pause_time: f64,
) -> Result<Vec<MobilityState>, MobilityError> {
    if n == 0 {
        return Err(MobilityError::NoNodes);
    }
    area.validate()?;
    if !(speed.is_finite() && speed >= 0.0) {
        return Err(MobilityError::BadSpeed(speed));
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let states = (0..n)
        .map(|_| {
            let mut rng = ChaCha8Rng::seed_from_u64(master.random());
            let position = area.sample(&mut rng);
            let waypoint = area.sample(&mut rng);
            MobilityState {
                position,
                waypoint,
                speed,
                pause_time: pause_time.max(0.0),
                segment_start: 0.0,
                pause_until: 0.0,
                area,
                rng,
            }
        })
        .collect();
    Ok(states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn same_seed_same_positions() {
        let a = init_positions(7, 20, Area::default(), 10.0, 0.0).unwrap();
        let b = init_positions(7, 20, Area::default(), 10.0, 0.0).unwrap();
        let pa: Vec<_> = a.iter().map(|s| s.position).collect();
        let pb: Vec<_> = b.iter().map(|s| s.position).collect();
        assert_eq!(pa, pb);
        let c = init_positions(8, 20, Area::default(), 10.0, 0.0).unwrap();
        assert_ne!(pa, c.iter().map(|s| s.position).collect::<Vec<_>>());
    }

    #[test]
    fn reference_node_count_in_bounds() {
        let area = Area::default();
        let states = init_positions(1, 160, area, 50.0, 0.0).unwrap();
        assert_eq!(states.len(), 160);
        assert!(states.iter().all(|s| area.contains(s.position) && area.contains(s.waypoint)));
    }

    #[test]
    fn single_node() {
        let states = init_positions(3, 1, Area::default(), 0.0, 0.0).unwrap();
        assert_eq!(states.len(), 1);
        assert!(Area::default().contains(states[0].position));
    }

    #[test]
    fn rejects_empty_and_bad_input() {
        assert_eq!(init_positions(1, 0, Area::default(), 1.0, 0.0).unwrap_err(), MobilityError::NoNodes);
        assert!(init_positions(1, 5, Area::new(0.0, 10.0), 1.0, 0.0).is_err());
        assert!(init_positions(1, 5, Area::default(), -1.0, 0.0).is_err());
    }

    #[test]
    fn zero_speed_is_constant() {
        let mut s = init_positions(5, 1, Area::default(), 0.0, 0.0).unwrap().remove(0);
        let p0 = s.position_at(0.0);
        for t in [1.0, 10.0, 1e4] {
            assert_eq!(s.position_at(t), p0);
        }
    }

    #[test]
    fn linear_motion_toward_waypoint() {
        let mut s = MobilityState::stationary(Point2D::new(0.0, 0.0), Area::default());
        s.waypoint = Point2D::new(100.0, 0.0);
        s.speed = 10.0;
        assert_eq!(s.position_at(5.0), Point2D::new(50.0, 0.0));
        // Arrival at t=10 draws a fresh waypoint; the node is at the old one.
        assert_eq!(s.position_at(10.0), Point2D::new(100.0, 0.0));
    }

    #[test]
    fn pause_holds_position() {
        let mut s = MobilityState::stationary(Point2D::new(0.0, 0.0), Area::default());
        s.waypoint = Point2D::new(100.0, 0.0);
        s.speed = 10.0;
        s.pause_time = 3.0;
        assert_eq!(s.position_at(11.0), Point2D::new(100.0, 0.0));
        assert_eq!(s.position_at(13.0), Point2D::new(100.0, 0.0));
        assert_ne!(s.position_at(14.0), Point2D::new(100.0, 0.0));
    }

    #[test]
    fn long_run_stays_contained() {
        let area = Area::default();
        let mut states = init_positions(11, 10, area, 100.0, 0.0).unwrap();
        for step in 0..10_000 {
            let t = step as f64 * 0.05;
            for s in states.iter_mut() {
                assert!(area.contains(s.position_at(t)));
            }
        }
    }

    #[test]
    fn constant_speed_within_segments() {
        let mut s = init_positions(2, 1, Area::default(), 30.0, 0.0).unwrap().remove(0);
        let dt = 1e-3;
        let mut prev = s.position_at(0.0);
        let mut prev_wp = s.waypoint;
        for step in 1..20_000 {
            let t = step as f64 * dt;
            let p = s.position_at(t);
            if s.waypoint == prev_wp {
                let v = euclid_distance(prev, p) / dt;
                assert!((v - 30.0).abs() < 1e-6, "speed {v} at t={t}");
            }
            prev = p;
            prev_wp = s.waypoint;
        }
    }

    proptest! {
        #[test]
        fn sampling_cadence_does_not_change_trajectory(
            seed in any::<u64>(),
            speed in 1.0..100.0f64,
            times in proptest::collection::vec(0.0..200.0f64, 1..40),
        ) {
            let area = Area::default();
            let mut sorted = times.clone();
            sorted.sort_by(f64::total_cmp);
            let mut dense = init_positions(seed, 1, area, speed, 0.0).unwrap().remove(0);
            let mut sparse = dense.clone();
            let t_end = *sorted.last().unwrap();
            for t in &sorted {
                dense.position_at(*t);
            }
            let a = dense.position_at(t_end);
            let b = sparse.position_at(t_end);
            prop_assert_eq!(a, b);
            prop_assert!(area.contains(a));
        }
    }
}
