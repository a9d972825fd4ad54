//! Replaying test cases on a fresh two-device sandbox.

use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::audio::ResolutionMatrix;
use crate::env::{Registry, Sandbox};
use crate::superdevice::Observation;

use super::generate::{Step, TestCase};
use super::CampaignError;

/// Seed of one repetition, derived from the campaign seed and the case id.
pub fn repetition_seed(seed: u64, test_id: &str, repetition: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(test_id.as_bytes());
    h.update((repetition as u64).to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

fn replay_error(tc: &TestCase, reason: impl Into<String>) -> CampaignError {
    CampaignError::Replay {
        test: tc.id.clone(),
        reason: reason.into(),
    }
}

fn apply(env: &mut Sandbox, tc: &TestCase, step: &Step) -> Result<(), CampaignError> {
    let res = match step {
        Step::Launch { device, app } => env.launch(device, app),
        Step::Fire { device, app, event } => {
            let host = env.host(app).map_err(|e| replay_error(tc, e.to_string()))?;
            if &host != device {
                return Err(replay_error(
                    tc,
                    format!("{app} is on {host}, expected on {device}"),
                ));
            }
            env.fire(app, event)
        }
        Step::StartHop {
            source,
            app,
            target,
        } => env.start_hop(source, app, target).map(drop),
        Step::EndHop => env.end_hop().map(drop),
    };
    res.map_err(|e| replay_error(tc, e.to_string()))
}

/// Run one repetition and return the snapshot after the final operation.
pub fn execute_once(
    tc: &TestCase,
    registry: &Arc<Registry>,
    matrix: &ResolutionMatrix,
    seed: u64,
) -> Result<Observation, CampaignError> {
    let (d1, d2) = &tc.devices;
    let mut env = Sandbox::new([d1.clone(), d2.clone()], registry.clone(), matrix.clone(), seed);
    for step in &tc.e_tested {
        apply(&mut env, tc, step)?;
    }
    let reached = env
        .ass(&tc.tested_app)
        .map_err(|e| replay_error(tc, e.to_string()))?;
    if reached != tc.target_state {
        return Err(replay_error(
            tc,
            format!("tested app reached {reached}, expected {}", tc.target_state),
        ));
    }
    for step in &tc.e_collab {
        apply(&mut env, tc, step)?;
    }
    let reached = env
        .ass(&tc.collaborator)
        .map_err(|e| replay_error(tc, e.to_string()))?;
    if reached != tc.collab_state {
        return Err(replay_error(
            tc,
            format!("collaborator reached {reached}, expected {}", tc.collab_state),
        ));
    }
    apply(&mut env, tc, &tc.final_op)?;
    Ok(env.snapshot())
}

/// Run `repetitions` independent repetitions of `tc`.
pub fn execute_test(
    tc: &TestCase,
    registry: &Arc<Registry>,
    matrix: &ResolutionMatrix,
    repetitions: usize,
    seed: u64,
) -> Result<Vec<Observation>, CampaignError> {
    (0..repetitions)
        .map(|r| execute_once(tc, registry, matrix, repetition_seed(seed, &tc.id, r)))
        .collect()
}
