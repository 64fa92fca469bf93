//! Plays a few Catch drops with the hand-coded landing-column tracker,
//! renders one episode as ASCII, and measures tracker vs random-policy
//! catch rates.

use ram::env::{greedy_tracker_action, CatchEnv, Environment, SCREEN};
use ram::eval::{random_policy_catch_rate, tracker_catch_rate, wilson_interval};
use ram::rng::substream;

fn ascii(frame: &ram::image::Image) -> String {
    let mut out = String::new();
    for y in 0..SCREEN {
        for x in 0..SCREEN {
            out.push(if frame.get(x, y) > 0.5 { '#' } else { '.' });
        }
        out.push('\n');
    }
    out
}

fn main() {
    // One episode, rendered every few steps.
    let mut env = CatchEnv::reset(&mut substream(3, "demo", 0));
    let mut step = 0;
    println!("tracker playing one drop (ball falls, paddle on the bottom row):\n");
    while !env.terminal() {
        if step % 7 == 0 {
            println!("{}", ascii(&env.render()));
        }
        let action = greedy_tracker_action(&env.state());
        let r = env.step(Some(action)).unwrap();
        step += 1;
        if r.terminal {
            println!("{}", ascii(&env.render()));
            println!("caught: {}\n", r.reward > 0.0);
        }
    }

    let episodes = 10_000;
    let tracker = tracker_catch_rate(episodes, 11);
    let random = random_policy_catch_rate(episodes, 11);
    let (rlo, rhi) = wilson_interval((random * episodes as f64) as usize, episodes);
    println!("tracker catch rate over {episodes} drops: {tracker:.4}");
    println!("random policy catch rate:               {random:.4} (95% CI {rlo:.4}..{rhi:.4})");
    println!("a trained agent must sit between those two numbers.");
}
