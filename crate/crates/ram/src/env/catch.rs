//! Catch: a ball falls from the top of a 24x24 binary screen, drifting
//! sideways and bouncing elastically off the walls; a two-pixel paddle on
//! the bottom row must intercept it. The only reward is 1 at the terminal
//! step if the paddle overlaps the ball.

use rand::Rng;

use crate::error::{Error, Result};
use crate::image::Image;

use super::{ActionProtocol, EnvStepResult, Environment};

pub const SCREEN: usize = 24;
/// left / right / do nothing
pub const CATCH_ACTIONS: usize = 3;

pub const ACTION_LEFT: usize = 0;
pub const ACTION_RIGHT: usize = 1;
pub const ACTION_NOOP: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CatchState {
    pub ball_row: i64,
    pub ball_col: i64,
    /// Horizontal drift per step, one of -1, 0, +1.
    pub ball_dx: i64,
    /// Leftmost column of the two-pixel paddle, in `[0, 22]`.
    pub paddle_col: i64,
}

#[derive(Debug, Clone)]
pub struct CatchEnv {
    state: CatchState,
    terminal: bool,
    steps_taken: usize,
    recording: bool,
    history: Vec<(usize, CatchState, usize, f64)>,
}

impl CatchEnv {
    /// Starts a new drop: ball on the top row at a uniform random column
    /// with uniform drift in `{-1, 0, +1}`; paddle centered.
    pub fn reset<R: Rng>(rng: &mut R) -> Self {
        let ball_col = rng.gen_range(0..SCREEN as i64);
        let ball_dx = rng.gen_range(-1..=1);
        CatchEnv::from_state(CatchState {
            ball_row: 0,
            ball_col,
            ball_dx,
            paddle_col: (SCREEN as i64 - 2) / 2,
        })
    }

    pub fn from_state(state: CatchState) -> Self {
        CatchEnv {
            state,
            terminal: false,
            steps_taken: 0,
            recording: false,
            history: Vec::new(),
        }
    }

    /// Record `(step, post-transition state, action, reward)` tuples for a
    /// replay dump.
    pub fn set_recording(&mut self, on: bool) {
        self.recording = on;
    }

    pub fn history(&self) -> &[(usize, CatchState, usize, f64)] {
        &self.history
    }

    pub fn state(&self) -> CatchState {
        self.state
    }

    pub fn render(&self) -> Image {
        render_frame(&self.state)
    }
}

/// Renders a state to the binary screen: one ball pixel plus the two paddle
/// pixels on the bottom row.
pub fn render_frame(state: &CatchState) -> Image {
    let mut img = Image::zeros(SCREEN, SCREEN);
    img.set(state.paddle_col as usize, SCREEN - 1, 1.0);
    img.set(state.paddle_col as usize + 1, SCREEN - 1, 1.0);
    if (0..SCREEN as i64).contains(&state.ball_col) && (0..SCREEN as i64).contains(&state.ball_row)
    {
        img.set(state.ball_col as usize, state.ball_row as usize, 1.0);
    }
    img
}

/// Advances the ball one row with elastic side reflection.
fn advance_ball(col: i64, dx: i64) -> (i64, i64) {
    let raw = col + dx;
    if raw < 0 {
        (-raw, 1)
    } else if raw > SCREEN as i64 - 1 {
        (2 * (SCREEN as i64 - 1) - raw, -1)
    } else {
        (raw, dx)
    }
}

impl Environment for CatchEnv {
    fn observation(&self) -> Image {
        self.render()
    }

    fn step(&mut self, action: Option<usize>) -> Result<EnvStepResult> {
        if self.terminal {
            return Err(Error::Protocol(
                "catch episode already finished; reset before stepping".into(),
            ));
        }
        let action = action.ok_or_else(|| {
            Error::Protocol("catch requires a game action every step".into())
        })?;
        let delta = match action {
            ACTION_LEFT => -1,
            ACTION_RIGHT => 1,
            ACTION_NOOP => 0,
            other => {
                return Err(Error::Data(format!(
                    "catch action must be < {CATCH_ACTIONS}, got {other}"
                )))
            }
        };
        self.state.paddle_col = (self.state.paddle_col + delta).clamp(0, SCREEN as i64 - 2);
        self.state.ball_row += 1;
        let (col, dx) = advance_ball(self.state.ball_col, self.state.ball_dx);
        self.state.ball_col = col;
        self.state.ball_dx = dx;

        self.terminal = self.state.ball_row == SCREEN as i64 - 1;
        let reward = if self.terminal
            && (self.state.ball_col == self.state.paddle_col
                || self.state.ball_col == self.state.paddle_col + 1)
        {
            1.0
        } else {
            0.0
        };
        self.steps_taken += 1;
        if self.recording {
            self.history.push((self.steps_taken, self.state, action, reward));
        }
        Ok(EnvStepResult {
            observation: self.render(),
            reward,
            terminal: self.terminal,
        })
    }

    fn terminal(&self) -> bool {
        self.terminal
    }

    fn action_count(&self) -> usize {
        CATCH_ACTIONS
    }

    fn protocol(&self) -> ActionProtocol {
        ActionProtocol::SampleEachStep
    }
}

/// Predicts the ball's landing column by simulating the remaining fall with
/// reflections.
pub fn landing_column(state: &CatchState) -> i64 {
    let mut col = state.ball_col;
    let mut dx = state.ball_dx;
    let mut row = state.ball_row;
    while row < SCREEN as i64 - 1 {
        let (c, d) = advance_ball(col, dx);
        col = c;
        dx = d;
        row += 1;
    }
    col
}

/// Hand-coded reference policy: walk the paddle toward the predicted landing
/// column. Used as a solvability oracle: it catches every drop.
pub fn greedy_tracker_action(state: &CatchState) -> usize {
    let target = landing_column(state);
    if target < state.paddle_col {
        ACTION_LEFT
    } else if target > state.paddle_col + 1 {
        ACTION_RIGHT
    } else {
        ACTION_NOOP
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn reset_is_reproducible_and_starts_on_top_row() {
        let a = CatchEnv::reset(&mut substream(5, "catch", 42));
        let b = CatchEnv::reset(&mut substream(5, "catch", 42));
        assert_eq!(a.state(), b.state());
        assert_eq!(a.state().ball_row, 0);
        assert_eq!(a.state().paddle_col, 11);
    }

    #[test]
    fn reset_columns_cover_the_screen_uniformly() {
        // Chi-squared against uniform over 24 columns at 99% (23 dof -> 41.64).
        let mut counts = [0usize; SCREEN];
        let n = 10_000;
        for i in 0..n {
            let env = CatchEnv::reset(&mut substream(7, "catch-reset", i));
            counts[env.state().ball_col as usize] += 1;
        }
        let expect = n as f64 / SCREEN as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expect).powi(2) / expect)
            .sum();
        assert!(chi2 < 41.64, "chi2 = {chi2}, counts = {counts:?}");
    }

    #[test]
    fn aligned_ball_with_noop_is_caught() {
        let mut env = CatchEnv::from_state(CatchState {
            ball_row: 0,
            ball_col: 11,
            ball_dx: 0,
            paddle_col: 11,
        });
        let mut last = None;
        while !env.terminal() {
            last = Some(env.step(Some(ACTION_NOOP)).unwrap());
        }
        assert_eq!(last.unwrap().reward, 1.0);
    }

    #[test]
    fn left_wall_reflects_the_ball() {
        let mut env = CatchEnv::from_state(CatchState {
            ball_row: 0,
            ball_col: 0,
            ball_dx: -1,
            paddle_col: 11,
        });
        env.step(Some(ACTION_NOOP)).unwrap();
        assert_eq!(env.state().ball_col, 1);
        assert_eq!(env.state().ball_dx, 1);
    }

    #[test]
    fn right_wall_reflects_the_ball() {
        let mut env = CatchEnv::from_state(CatchState {
            ball_row: 0,
            ball_col: 23,
            ball_dx: 1,
            paddle_col: 11,
        });
        env.step(Some(ACTION_NOOP)).unwrap();
        assert_eq!(env.state().ball_col, 22);
        assert_eq!(env.state().ball_dx, -1);
    }

    #[test]
    fn episodes_always_last_23_steps() {
        for i in 0..50 {
            let mut env = CatchEnv::reset(&mut substream(9, "catch-len", i));
            let mut steps = 0;
            while !env.terminal() {
                env.step(Some(ACTION_NOOP)).unwrap();
                steps += 1;
            }
            assert_eq!(steps, 23);
        }
    }

    #[test]
    fn stepping_after_terminal_is_a_protocol_error() {
        let mut env = CatchEnv::from_state(CatchState {
            ball_row: 22,
            ball_col: 5,
            ball_dx: 0,
            paddle_col: 11,
        });
        env.step(Some(ACTION_NOOP)).unwrap();
        assert!(env.terminal());
        assert!(matches!(
            env.step(Some(ACTION_NOOP)),
            Err(Error::Protocol(_))
        ));
    }

    #[test]
    fn frame_has_three_pixels_or_two_when_overlapping() {
        let apart = CatchState {
            ball_row: 5,
            ball_col: 3,
            ball_dx: 0,
            paddle_col: 11,
        };
        assert_eq!(render_frame(&apart).pixel_sum(), 3.0);
        let overlap = CatchState {
            ball_row: 23,
            ball_col: 11,
            ball_dx: 0,
            paddle_col: 11,
        };
        assert_eq!(render_frame(&overlap).pixel_sum(), 2.0);
    }

    #[test]
    fn render_is_a_pure_function_of_state() {
        let env = CatchEnv::reset(&mut substream(5, "catch", 1));
        assert_eq!(env.render(), env.render());
    }

    #[test]
    fn ball_and_paddle_stay_inside_the_screen() {
        for i in 0..200 {
            let mut env = CatchEnv::reset(&mut substream(6, "catch-bounds", i));
            let mut rng = substream(6, "catch-actions", i);
            while !env.terminal() {
                let action = rng.gen_range(0..CATCH_ACTIONS);
                let res = env.step(Some(action)).unwrap();
                let s = env.state();
                assert!((0..SCREEN as i64).contains(&s.ball_col));
                assert!((0..SCREEN as i64).contains(&s.ball_row));
                assert!((0..=SCREEN as i64 - 2).contains(&s.paddle_col));
                if !res.terminal {
                    assert_eq!(res.reward, 0.0);
                }
            }
        }
    }

    #[test]
    fn greedy_tracker_catches_every_seeded_drop() {
        for i in 0..500 {
            let mut env = CatchEnv::reset(&mut substream(8, "catch-oracle", i));
            let mut reward = 0.0;
            while !env.terminal() {
                let action = greedy_tracker_action(&env.state());
                reward = env.step(Some(action)).unwrap().reward;
            }
            assert_eq!(reward, 1.0, "drop {i} escaped the tracker");
        }
    }
}
