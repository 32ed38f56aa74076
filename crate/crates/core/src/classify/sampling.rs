use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::engine::{FrameInvariants, StructureData, WebDefinition};
use crate::expr::{Point, Tracked};

use super::ClassifyError;

/// Every sample clears each domain constraint by at least this much.
pub const DOMAIN_MARGIN: f64 = 1e-6;
/// Both Jacobian determinants are at least this large at every sample.
pub const MIN_DET: f64 = 1e-6;
/// Rejected draws allowed per requested point.
pub const REJECTIONS_PER_POINT: usize = 10_000;
pub const MIN_SAMPLES: usize = 8;

#[derive(Debug, Clone, Serialize)]
pub struct SampleSet {
    pub seed: u64,
    pub points: Vec<Point>,
    pub count: usize,
}

/// Everything the identity registry reads at one point.
#[derive(Debug, Clone)]
pub struct SampleEval {
    pub inv: FrameInvariants<Tracked>,
    pub structure: StructureData<Tracked>,
}

fn admit(web: &WebDefinition, pt: &Point) -> Option<SampleEval> {
    if web.domain_margin(pt).ok()? < DOMAIN_MARGIN {
        return None;
    }
    let c = web.compiled();
    let jac = c.jacobians(pt).ok()?;
    if jac.det_bar.abs() < MIN_DET || jac.det_tilde.abs() < MIN_DET {
        return None;
    }
    // points where some invariant cannot be evaluated are rejected as well
    let inv = c.eval_tracked(pt).ok()?;
    let structure = c.structure(pt).ok()?;
    Some(SampleEval { inv, structure })
}

/// Seeded rejection sampling from the box [−w, w]⁴, with the evaluated
/// invariants at every accepted point.
pub fn sample_evaluated(
    web: &WebDefinition,
    n: usize,
    seed: u64,
    halfwidth: f64,
) -> Result<(SampleSet, Vec<SampleEval>), ClassifyError> {
    if n < MIN_SAMPLES {
        return Err(ClassifyError::InvalidConfig(format!(
            "need at least {MIN_SAMPLES} samples, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    let mut evals = Vec::with_capacity(n);
    let mut rejected = 0;
    while points.len() < n {
        let c: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-halfwidth..=halfwidth));
        let pt = Point::from_coords(c);
        match admit(web, &pt) {
            Some(e) => {
                points.push(pt);
                evals.push(e);
            }
            None => {
                rejected += 1;
                if rejected >= REJECTIONS_PER_POINT * n {
                    return Err(ClassifyError::SamplingExhausted {
                        web: web.name().to_string(),
                        accepted: points.len(),
                        rejected,
                    });
                }
            }
        }
    }
    Ok((
        SampleSet {
            seed,
            count: points.len(),
            points,
        },
        evals,
    ))
}

pub fn sample_points(web: &WebDefinition, n: usize, seed: u64) -> Result<SampleSet, ClassifyError> {
    Ok(sample_evaluated(web, n, seed, super::Config::default().box_halfwidth)?.0)
}
