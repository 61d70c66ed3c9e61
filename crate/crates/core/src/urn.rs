//! The box-and-ball game that bounds how long empty edges keep appearing on
//! a path.
//!
//! Box 0 collects empty edges, box `j >= 1` holds edges of type `j`. Every
//! step retires one ball from box 1 into box 0 and moves one other ball by
//! at most one box.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::seed::{rng_for, Stream};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UrnState {
    /// Balls per box, boxes `0..=J`.
    pub counts: Vec<u64>,
    pub step: u64,
}

impl UrnState {
    /// Needs at least boxes 0 and 1.
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::InvalidArgument(
                "the game needs boxes 0 and 1".into(),
            ));
        }
        Ok(UrnState { counts, step: 0 })
    }

    /// `balls` in every box `1..=boxes`, box 0 empty.
    pub fn uniform(balls: u64, boxes: usize) -> Result<Self> {
        let mut counts = vec![balls; boxes + 1];
        counts[0] = 0;
        Self::new(counts)
    }

    /// `J`, the highest box.
    pub fn max_box(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    fn shift(&mut self, from: usize, to: usize) {
        debug_assert!(self.counts[from] > 0);
        self.counts[from] -= 1;
        self.counts[to] += 1;
    }
}

/// Random play until box 1 is empty at the start of a step.
///
/// A step retires a ball from box 1, then picks a non-empty box `j >= 1`
/// uniformly (box 1 included) and moves one of its balls to `j - 1`, `j` or
/// `j + 1` with equal odds; `J + 1` is clamped to `J`.
pub fn play_random(initial: &UrnState, seed: u64) -> (UrnState, u64) {
    let mut s = initial.clone();
    let top = s.max_box();
    let mut rng = rng_for(seed, Stream::Urn);
    let mut occupied = Vec::with_capacity(top);
    let start = s.step;
    while s.counts[1] > 0 {
        s.shift(1, 0);
        s.step += 1;
        occupied.clear();
        occupied.extend((1..=top).filter(|&j| s.counts[j] > 0));
        if occupied.is_empty() {
            continue;
        }
        let j = occupied[rng.random_range(0..occupied.len())];
        let to = match rng.random_range(0..3) {
            0 => j - 1,
            1 => j,
            _ => (j + 1).min(top),
        };
        s.shift(j, to);
    }
    let steps = s.step - start;
    (s, steps)
}

/// Worst-case play from `balls` in each of boxes `1..=boxes`.
///
/// A step moves one ball from the lowest non-empty box `j >= 2` down to
/// `j - 1` and retires one ball from box 1. The two moves are taken as
/// simultaneous, so a ball arriving in an empty box 1 can be the one retired;
/// play stops when neither box 1 nor the promotion can supply that ball.
/// Returns the step count and every state from the start to the end.
pub fn play_strategy_s(balls: u64, boxes: usize) -> Result<(u64, Vec<UrnState>)> {
    if boxes < 3 {
        return Err(Error::InvalidArgument(format!(
            "strategy S needs at least 3 boxes, got {boxes}"
        )));
    }
    let mut s = UrnState::uniform(balls, boxes)?;
    let mut trajectory = vec![s.clone()];
    loop {
        let promote = (2..=boxes).find(|&j| s.counts[j] > 0);
        if s.counts[1] == 0 && promote != Some(2) {
            break;
        }
        if let Some(j) = promote {
            s.shift(j, j - 1);
        }
        s.shift(1, 0);
        s.step += 1;
        trajectory.push(s.clone());
    }
    Ok((s.step, trajectory))
}

/// Strategy S state after `n` steps from `balls` per box, without playing.
pub fn closed_form_y(balls: u64, n: u64, boxes: usize) -> Result<UrnState> {
    if boxes < 3 {
        return Err(Error::InvalidArgument(format!(
            "strategy S needs at least 3 boxes, got {boxes}"
        )));
    }
    if n > 3 * balls {
        return Err(Error::InvalidArgument(format!(
            "step {n} is past the end of play at {}",
            3 * balls
        )));
    }
    let mut s = UrnState::uniform(balls, boxes)?;
    s.counts[0] = n;
    s.step = n;
    if n <= balls {
        s.counts[2] = balls - n;
    } else {
        let k = n - balls;
        let half = k.div_ceil(2);
        s.counts[1] = balls - half;
        s.counts[2] = k % 2;
        s.counts[3] = balls - half;
    }
    Ok(s)
}

/// CSV with header `step,box0..boxJ`.
pub fn trajectory_csv(trajectory: &[UrnState]) -> String {
    let top = trajectory.first().map_or(1, UrnState::max_box);
    let mut out = String::from("step");
    for j in 0..=top {
        out.push_str(&format!(",box{j}"));
    }
    out.push('\n');
    for s in trajectory {
        out.push_str(&s.step.to_string());
        for c in &s.counts {
            out.push_str(&format!(",{c}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategy_s_examples() {
        assert_eq!(play_strategy_s(0, 3).unwrap().0, 0);
        assert_eq!(play_strategy_s(2, 3).unwrap().0, 6);
        let (steps, traj) = play_strategy_s(5, 6).unwrap();
        assert_eq!(steps, 15);
        assert_eq!(traj.len(), 16);
        for s in &traj {
            assert!(s.counts[4..].iter().all(|&c| c == 5));
        }
        assert!(play_strategy_s(2, 2).is_err());
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(
            closed_form_y(3, 2, 5).unwrap().counts,
            vec![2, 3, 1, 3, 3, 3]
        );
        let s = closed_form_y(3, 5, 4).unwrap();
        assert_eq!(&s.counts[1..4], &[2, 0, 2]);
        assert_eq!(closed_form_y(4, 12, 3).unwrap().counts[1], 0);
        assert!(closed_form_y(3, 10, 4).is_err());
    }

    #[test]
    fn strategy_s_follows_closed_form() {
        for m in 0..=20 {
            for boxes in [3, 4, 7] {
                let (steps, traj) = play_strategy_s(m, boxes).unwrap();
                assert_eq!(steps, 3 * m);
                for (n, s) in traj.iter().enumerate() {
                    assert_eq!(
                        *s,
                        closed_form_y(m, n as u64, boxes).unwrap(),
                        "M={m} n={n}"
                    );
                    assert_eq!(s.total(), m * boxes as u64);
                }
            }
        }
    }

    #[test]
    fn random_play_basics() {
        let s = UrnState::new(vec![0, 0, 4, 4]).unwrap();
        let (end, steps) = play_random(&s, 1);
        assert_eq!(steps, 0);
        assert_eq!(end, s);

        for seed in 0..1000 {
            let s = UrnState::uniform(7, 1).unwrap();
            let (end, steps) = play_random(&s, seed);
            assert!(steps <= 21);
            assert_eq!(end.total(), 7);
            assert_eq!(end.counts[1], 0);
        }
    }

    #[test]
    fn random_play_is_deterministic_and_bounded() {
        let s = UrnState::uniform(6, 5).unwrap();
        assert_eq!(play_random(&s, 9), play_random(&s, 9));
        for seed in 0..2000 {
            let (end, steps) = play_random(&s, seed);
            assert!(steps <= 18, "seed {seed}: {steps} steps");
            assert_eq!(end.total(), 30);
            assert!(end.counts[0] >= steps);
        }
    }

    #[test]
    fn csv_layout() {
        let (_, traj) = play_strategy_s(1, 3).unwrap();
        let csv = trajectory_csv(&traj);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "step,box0,box1,box2,box3");
        assert_eq!(lines[1], "0,0,1,1,1");
        assert_eq!(lines[4], "3,3,0,0,0");
    }
}
