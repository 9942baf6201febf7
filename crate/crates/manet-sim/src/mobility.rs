//! Random-waypoint motion and the geometric range-exit prediction that
//! drives the proactive link-fail trigger.

use crate::rng::SimRng;
use crate::types::{distance, Position, Range, SimTime};

/// One node's current movement leg. The node travels `from → target` at
/// `speed`, arrives at `arrival`, dwells until `pause_until`, then the
/// engine calls [`next_leg`].
#[derive(Debug, Clone, PartialEq)]
pub struct Waypoint {
    pub leg_start: SimTime,
    pub from: Position,
    pub target: Position,
    /// m/s, inside the configured speed range.
    pub speed: f64,
    pub arrival: SimTime,
    pub pause_until: SimTime,
}

fn travel_ticks(dist_m: f64, speed_mps: f64) -> u64 {
    if dist_m <= 0.0 {
        0
    } else {
        (dist_m / speed_mps * 1000.0).ceil() as u64
    }
}

/// Starts a fresh leg from `from` at time `now`.
pub fn new_leg(
    from: Position,
    now: SimTime,
    rng: &mut SimRng,
    area_x: f64,
    area_y: f64,
    speed_range: Range,
    pause: SimTime,
) -> Waypoint {
    let target = Position::new(rng.uniform() * area_x, rng.uniform() * area_y);
    let speed = rng.uniform_in(speed_range);
    let arrival = now + travel_ticks(distance(from, target), speed);
    Waypoint {
        leg_start: now,
        from,
        target,
        speed,
        arrival,
        pause_until: arrival + pause.ticks(),
    }
}

/// Position at time `t`: linear interpolation along the leg, constant at the
/// target through the pause window.
pub fn position_at(wp: &Waypoint, t: SimTime) -> Position {
    if t <= wp.leg_start || wp.arrival == wp.leg_start {
        return wp.from;
    }
    if t >= wp.arrival {
        return wp.target;
    }
    let frac = (t.ticks() - wp.leg_start.ticks()) as f64
        / (wp.arrival.ticks() - wp.leg_start.ticks()) as f64;
    Position::new(
        wp.from.x + frac * (wp.target.x - wp.from.x),
        wp.from.y + frac * (wp.target.y - wp.from.y),
    )
}

/// Velocity at time `t` in meters per tick; zero while paused.
pub fn velocity_at(wp: &Waypoint, t: SimTime) -> (f64, f64) {
    if t < wp.leg_start || t >= wp.arrival || wp.arrival == wp.leg_start {
        return (0.0, 0.0);
    }
    let total = (wp.arrival.ticks() - wp.leg_start.ticks()) as f64;
    ((wp.target.x - wp.from.x) / total, (wp.target.y - wp.from.y) / total)
}

/// Earliest time `t ≤ now + horizon` at which the mover leaves the anchor's
/// radio disk of radius `radius`, assuming both continue their current legs.
/// `None` when no exit happens inside the horizon.
pub fn predict_range_exit(
    mover: &Waypoint,
    anchor: &Waypoint,
    now: SimTime,
    radius: f64,
    horizon: u64,
) -> Option<SimTime> {
    let mp = position_at(mover, now);
    let ap = position_at(anchor, now);
    let (mvx, mvy) = velocity_at(mover, now);
    let (avx, avy) = velocity_at(anchor, now);
    let dx = mp.x - ap.x;
    let dy = mp.y - ap.y;
    let vx = mvx - avx;
    let vy = mvy - avy;
    let c = dx * dx + dy * dy - radius * radius;
    if c >= 0.0 {
        // Already on or past the boundary.
        return Some(now);
    }
    let a = vx * vx + vy * vy;
    if a == 0.0 {
        return None;
    }
    let b = 2.0 * (dx * vx + dy * vy);
    // |d + v t|^2 = r^2 has two real roots when starting inside; the exit is
    // the larger one.
    let disc = b * b - 4.0 * a * c;
    let t_exit = (-b + disc.sqrt()) / (2.0 * a);
    let ticks = t_exit.ceil() as u64;
    if ticks <= horizon {
        Some(now + ticks)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn static_at(p: Position) -> Waypoint {
        Waypoint {
            leg_start: SimTime(0),
            from: p,
            target: p,
            speed: 10.0,
            arrival: SimTime(0),
            pause_until: SimTime(0),
        }
    }

    fn leg(from: Position, target: Position, speed: f64, start: u64, pause: u64) -> Waypoint {
        let arrival = SimTime(start) + travel_ticks(distance(from, target), speed);
        Waypoint {
            leg_start: SimTime(start),
            from,
            target,
            speed,
            arrival,
            pause_until: arrival + pause,
        }
    }

    #[test]
    fn start_boundary_and_pause_semantics() {
        let wp = leg(Position::new(0.0, 0.0), Position::new(100.0, 0.0), 10.0, 0, 1000);
        assert_eq!(position_at(&wp, SimTime(0)), Position::new(0.0, 0.0));
        // Paused at the target for the whole dwell window.
        assert_eq!(position_at(&wp, wp.arrival), wp.target);
        assert_eq!(position_at(&wp, wp.pause_until), wp.target);
    }

    #[test]
    fn midpoint_time_gives_midpoint_position() {
        let wp = leg(Position::new(0.0, 0.0), Position::new(100.0, 40.0), 10.0, 0, 0);
        let mid = SimTime(wp.arrival.ticks() / 2);
        let p = position_at(&wp, mid);
        assert!((p.x - 50.0).abs() < 1e-9);
        assert!((p.y - 20.0).abs() < 1e-9);
    }

    #[test]
    fn static_pair_never_exits() {
        let mover = static_at(Position::new(10.0, 0.0));
        let anchor = static_at(Position::new(0.0, 0.0));
        assert_eq!(predict_range_exit(&mover, &anchor, SimTime(0), 100.0, 1 << 30), None);
    }

    #[test]
    fn radial_exit_hand_kinematics() {
        // 50 m inside a 100 m boundary, heading radially out at 10 m/s.
        let mover = leg(Position::new(50.0, 0.0), Position::new(450.0, 0.0), 10.0, 0, 0);
        let anchor = static_at(Position::new(0.0, 0.0));
        assert_eq!(
            predict_range_exit(&mover, &anchor, SimTime(0), 100.0, 1 << 30),
            Some(SimTime(5000))
        );
    }

    #[test]
    fn predicted_exit_matches_sampled_positions() {
        let mover = leg(Position::new(30.0, 40.0), Position::new(400.0, 380.0), 23.0, 7, 0);
        let anchor = leg(Position::new(0.0, 0.0), Position::new(120.0, 10.0), 12.0, 7, 0);
        let r = 90.0;
        let t = predict_range_exit(&mover, &anchor, SimTime(7), r, 1 << 30).unwrap();
        let d_at = |t: SimTime| distance(position_at(&mover, t), position_at(&anchor, t));
        assert!(d_at(t) >= r - 1e-6, "distance at exit = {}", d_at(t));
        assert!(d_at(SimTime(t.ticks() - 2)) < r, "exited more than a tick early");
    }

    #[test]
    fn legs_stay_inside_area_and_speed_range() {
        let mut rng = SimRng::new(99, 0);
        let area = (500.0, 400.0);
        let speed = Range::new(10.0, 30.0);
        let mut wp = new_leg(
            Position::new(250.0, 200.0),
            SimTime(0),
            &mut rng,
            area.0,
            area.1,
            speed,
            SimTime(1000),
        );
        for _ in 0..200 {
            assert!(speed.contains(wp.speed));
            let step = (wp.pause_until.ticks() - wp.leg_start.ticks()).max(1) / 7;
            for k in 0..7 {
                let p = position_at(&wp, SimTime(wp.leg_start.ticks() + k * step));
                assert!(p.x >= 0.0 && p.x <= area.0 && p.y >= 0.0 && p.y <= area.1);
            }
            wp = new_leg(wp.target, wp.pause_until, &mut rng, area.0, area.1, speed, SimTime(1000));
        }
    }
}
