//! Static-image classification as an episodic environment.
//!
//! The observation is the same image at every step. All rewards are zero
//! except the final step, which pays 1 if the predicted class matches the
//! label.

use crate::error::{Error, Result};
use crate::image::Image;

use super::{ActionProtocol, EnvStepResult, Environment};

pub struct ClassificationEnv {
    image: Image,
    label: usize,
    num_classes: usize,
    episode_len: usize,
    steps_taken: usize,
}

impl ClassificationEnv {
    pub fn new(image: Image, label: usize, num_classes: usize, episode_len: usize) -> Self {
        ClassificationEnv {
            image,
            label,
            num_classes,
            episode_len,
            steps_taken: 0,
        }
    }

    pub fn label(&self) -> usize {
        self.label
    }
}

impl Environment for ClassificationEnv {
    fn observation(&self) -> Image {
        self.image.clone()
    }

    fn step(&mut self, action: Option<usize>) -> Result<EnvStepResult> {
        if self.terminal() {
            return Err(Error::Protocol(
                "classification episode already finished; construct a new one".into(),
            ));
        }
        self.steps_taken += 1;
        let terminal = self.steps_taken == self.episode_len;
        let reward = if terminal {
            match action {
                Some(predicted) if predicted == self.label => 1.0,
                _ => 0.0,
            }
        } else {
            0.0
        };
        Ok(EnvStepResult {
            observation: self.image.clone(),
            reward,
            terminal,
        })
    }

    fn terminal(&self) -> bool {
        self.steps_taken >= self.episode_len
    }

    fn action_count(&self) -> usize {
        self.num_classes
    }

    fn protocol(&self) -> ActionProtocol {
        ActionProtocol::FinalArgmax
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn correct_final_prediction_pays_one() {
        let mut env = ClassificationEnv::new(Image::zeros(4, 4), 3, 10, 3);
        let mut rewards = Vec::new();
        rewards.push(env.step(None).unwrap().reward);
        rewards.push(env.step(None).unwrap().reward);
        rewards.push(env.step(Some(3)).unwrap().reward);
        assert_eq!(rewards, vec![0.0, 0.0, 1.0]);
        assert!(env.terminal());
    }

    #[test]
    fn wrong_prediction_pays_nothing() {
        let mut env = ClassificationEnv::new(Image::zeros(4, 4), 3, 10, 2);
        assert_eq!(env.step(None).unwrap().reward, 0.0);
        assert_eq!(env.step(Some(7)).unwrap().reward, 0.0);
    }

    #[test]
    fn single_step_episode_is_legal() {
        let mut env = ClassificationEnv::new(Image::zeros(4, 4), 1, 10, 1);
        let res = env.step(Some(1)).unwrap();
        assert!(res.terminal);
        assert_eq!(res.reward, 1.0);
    }

    #[test]
    fn stepping_after_terminal_is_a_protocol_error() {
        let mut env = ClassificationEnv::new(Image::zeros(4, 4), 0, 10, 1);
        env.step(Some(0)).unwrap();
        assert!(matches!(env.step(Some(0)), Err(Error::Protocol(_))));
    }

    #[test]
    fn observation_is_identical_every_step() {
        let mut img = Image::zeros(4, 4);
        img.set(2, 1, 0.5);
        let mut env = ClassificationEnv::new(img.clone(), 0, 10, 3);
        assert_eq!(env.observation(), img);
        env.step(None).unwrap();
        assert_eq!(env.observation(), img);
    }
}
