mod label;
mod registry;
mod sampling;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{EngineError, WebDefinition};
use crate::expr::Point;

pub use label::{ClassLabel, UnknownLabel};
pub use registry::{b_name, lookup, registry, Identity};
pub use sampling::{
    sample_evaluated, sample_points, SampleEval, SampleSet, DOMAIN_MARGIN, MIN_DET, MIN_SAMPLES, REJECTIONS_PER_POINT,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error("sampling exhausted for `{web}`: {accepted} points accepted after {rejected} rejected draws")]
    SamplingExhausted {
        web: String,
        accepted: usize,
        rejected: usize,
    },
    #[error("unknown identity `{0}`")]
    UnknownIdentity(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Sampling and decision parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub samples: usize,
    pub seed: u64,
    pub tol_zero: f64,
    pub tol_nonzero: f64,
    pub box_halfwidth: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            samples: 20,
            seed: 42,
            tol_zero: 1e-9,
            tol_nonzero: 1e-6,
            box_halfwidth: 3.0,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<(), ClassifyError> {
        if self.samples < MIN_SAMPLES {
            return Err(ClassifyError::InvalidConfig(format!(
                "samples must be at least {MIN_SAMPLES}"
            )));
        }
        if !(self.tol_zero > 0.0 && self.tol_zero < self.tol_nonzero) {
            return Err(ClassifyError::InvalidConfig("need 0 < tol_zero < tol_nonzero".into()));
        }
        if !(self.box_halfwidth.is_finite() && self.box_halfwidth > 0.0) {
            return Err(ClassifyError::InvalidConfig("box half-width must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Holds,
    Fails,
    Undetermined,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Holds => "HOLDS",
            Status::Fails => "FAILS",
            Status::Undetermined => "UNDETERMINED",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityVerdict {
    #[serde(skip)]
    pub identity_id: String,
    pub status: Status,
    pub max_residual: f64,
    /// Sample with the largest residual.
    pub witness: Option<Point>,
}

fn decide(id: &str, residuals: &[f64], points: &[Point], cfg: &Config) -> IdentityVerdict {
    let (arg, max) = residuals
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |(ai, am), (i, &r)| if r > am { (i, r) } else { (ai, am) });
    let status = if max < cfg.tol_zero {
        Status::Holds
    } else if max > cfg.tol_nonzero {
        Status::Fails
    } else {
        Status::Undetermined
    };
    let witness = (status != Status::Holds).then(|| points[arg]);
    IdentityVerdict {
        identity_id: id.to_string(),
        status,
        max_residual: max,
        witness,
    }
}

/// Sampled and evaluated points with the verdict of every registered identity.
pub struct Evidence {
    pub config: Config,
    pub samples: SampleSet,
    pub evals: Vec<SampleEval>,
    pub verdicts: BTreeMap<String, IdentityVerdict>,
}

impl Evidence {
    pub fn gather(web: &WebDefinition, config: &Config) -> Result<Evidence, ClassifyError> {
        config.validate()?;
        let (samples, evals) = sample_evaluated(web, config.samples, config.seed, config.box_halfwidth)?;
        Ok(Evidence::from_evals(*config, samples, evals))
    }

    pub fn from_evals(config: Config, samples: SampleSet, evals: Vec<SampleEval>) -> Evidence {
        let verdicts = registry()
            .iter()
            .map(|ident| {
                let rs: Vec<f64> = evals.iter().map(|e| ident.normalized(e)).collect();
                (ident.id.clone(), decide(&ident.id, &rs, &samples.points, &config))
            })
            .collect();
        Evidence {
            config,
            samples,
            evals,
            verdicts,
        }
    }

    pub fn verdict(&self, id: &str) -> Result<&IdentityVerdict, ClassifyError> {
        self.verdicts
            .get(id)
            .ok_or_else(|| ClassifyError::UnknownIdentity(id.to_string()))
    }

    /// Normalized residual of one identity at every sample.
    pub fn residuals(&self, id: &str) -> Result<Vec<f64>, ClassifyError> {
        let ident = lookup(id).ok_or_else(|| ClassifyError::UnknownIdentity(id.to_string()))?;
        Ok(self.evals.iter().map(|e| ident.normalized(e)).collect())
    }

    fn truth(&self, id: &str, expect_holds: bool) -> Truth {
        let v = &self.verdicts[id];
        let t = match v.status {
            Status::Holds => Truth::True,
            Status::Fails => Truth::False,
            Status::Undetermined => Truth::Unknown,
        };
        if expect_holds {
            t
        } else {
            t.not()
        }
    }

    /// Three-valued membership of `label`.
    pub fn label_truth(&self, label: ClassLabel) -> Truth {
        conditions(label)
            .iter()
            .fold(Truth::True, |acc, (id, h)| acc.and(self.truth(id, *h)))
    }
}

/// Decides one identity on the given points.
pub fn test_identity(
    web: &WebDefinition,
    identity_id: &str,
    samples: &SampleSet,
    config: &Config,
) -> Result<IdentityVerdict, ClassifyError> {
    let ident = lookup(identity_id).ok_or_else(|| ClassifyError::UnknownIdentity(identity_id.to_string()))?;
    let c = web.compiled();
    let mut rs = Vec::with_capacity(samples.points.len());
    for pt in &samples.points {
        let e = SampleEval {
            inv: c.eval_tracked(pt)?,
            structure: c.structure(pt)?,
        };
        rs.push(ident.normalized(&e));
    }
    Ok(decide(identity_id, &rs, &samples.points, config))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl Truth {
    pub fn and(self, o: Truth) -> Truth {
        match (self, o) {
            (Truth::False, _) | (_, Truth::False) => Truth::False,
            (Truth::True, Truth::True) => Truth::True,
            _ => Truth::Unknown,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Truth {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        }
    }
}

/// Defining conditions of a label, ancestors included: identity id and
/// whether it must hold (`true`) or fail (`false`).
pub fn conditions(label: ClassLabel) -> Vec<(&'static str, bool)> {
    use ClassLabel::*;
    let own: &[(&str, bool)] = match label {
        A => &[("(8)", true)],
        B => &[("(8)", false)],
        A1 => &[("a1=0", false), ("a2=0", false)],
        A11 => &[("(17)", true)],
        A12 => &[("(24)", true)],
        A13 => &[("a1=a2", true), ("(15)", true)],
        A131 => &[("(22)", true)],
        A132 => &[("(27)", true)],
        A14 => &[("a1=-a2", true), ("(16)", true)],
        A141 => &[("(23)", true)],
        A142 => &[("(28)", true)],
        A2 => &[("a2=0", true), ("(13)", true)],
        A21 => &[("(20)", true)],
        A22 => &[("(25)", true)],
        A3 => &[("a1=0", true), ("(14)", true)],
        A31 => &[("(21)", true)],
        A32 => &[("(26)", true)],
        C => &[("(38)", false)],
        D => &[("(38)", true)],
        D1 => &[("(39)", true)],
        D11 => &[("(40)", true)],
        D12 => &[("(41)", true)],
        E1 => &[("a1=0", false), ("a2=0", false), ("a1=a2", false)],
        E11 => &[("E11", true)],
        E111 => &[("E111", true)],
        E12 => &[("E12", true)],
        E13 => &[("E13", true)],
        E131 => &[("E131", true)],
        E2 => &[("E2", true)],
        E21 => &[("E21", true)],
        E22 => &[("E22", true)],
        E23 => &[("E23", true)],
        E3 => &[("E3", true)],
        E31 => &[("E31", true)],
        E32 => &[("E32", true)],
        E321 => &[("E321", true)],
        E33 => &[("E33", true)],
        F => &[("p=0", false), ("q=0", false), ("p=q", false), ("(43)", true)],
        G1 => &[("p=0", true), ("q=0", false)],
        G2 => &[("q=0", true), ("p=0", false)],
        G3 => &[("p=q", true), ("p=0", false)],
        G4 => &[("p=0", false), ("q=0", false), ("p=q", false), ("(43)", false)],
        ISOCLINIC => &[("p=0", true), ("q=0", true)],
        ISOCLINICLY_GEODESIC => &[("p=0", true), ("q=0", true), ("a1=0", true), ("a2=0", true)],
    };
    let mut out = match label.parent() {
        Some(p) => conditions(p),
        None => Vec::new(),
    };
    for c in own {
        if !out.contains(c) {
            out.push(*c);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Isoclinicity {
    Nonisoclinic,
    Isoclinic,
    IsocliniclyGeodesic,
    Undetermined,
}

impl fmt::Display for Isoclinicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Isoclinicity::Nonisoclinic => "NONISOCLINIC",
            Isoclinicity::Isoclinic => "ISOCLINIC",
            Isoclinicity::IsocliniclyGeodesic => "ISOCLINICLY_GEODESIC",
            Isoclinicity::Undetermined => "UNDETERMINED",
        })
    }
}

/// Labels of one family split by three-valued membership.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FamilyOutcome {
    pub members: Vec<ClassLabel>,
    pub undetermined: Vec<ClassLabel>,
}

fn family(ev: &Evidence, labels: &[ClassLabel]) -> FamilyOutcome {
    let mut out = FamilyOutcome::default();
    for &l in labels {
        match ev.label_truth(l) {
            Truth::True => out.members.push(l),
            Truth::Unknown => out.undetermined.push(l),
            Truth::False => {}
        }
    }
    out
}

const A_FAMILY: &[ClassLabel] = {
    use ClassLabel::*;
    &[
        A, A1, A11, A12, A13, A131, A132, A14, A141, A142, A2, A21, A22, A3, A31, A32, B,
    ]
};
const CD_FAMILY: &[ClassLabel] = {
    use ClassLabel::*;
    &[C, D, D1, D11, D12]
};
const E_FAMILY: &[ClassLabel] = {
    use ClassLabel::*;
    &[
        E1, E11, E111, E12, E13, E131, E2, E21, E22, E23, E3, E31, E32, E321, E33,
    ]
};
const FG_FAMILY: &[ClassLabel] = {
    use ClassLabel::*;
    &[F, G1, G2, G3, G4]
};

pub fn classify_isoclinicity(ev: &Evidence) -> Isoclinicity {
    match ev.label_truth(ClassLabel::ISOCLINIC) {
        Truth::False => Isoclinicity::Nonisoclinic,
        Truth::Unknown => Isoclinicity::Undetermined,
        Truth::True => match ev.label_truth(ClassLabel::ISOCLINICLY_GEODESIC) {
            Truth::True => Isoclinicity::IsocliniclyGeodesic,
            Truth::False => Isoclinicity::Isoclinic,
            Truth::Unknown => Isoclinicity::Undetermined,
        },
    }
}

pub fn classify_transversal(ev: &Evidence) -> FamilyOutcome {
    family(ev, A_FAMILY)
}

pub fn classify_geodesic_type(ev: &Evidence) -> FamilyOutcome {
    family(ev, CD_FAMILY)
}

#[allow(non_snake_case)]
pub fn classify_E(ev: &Evidence) -> FamilyOutcome {
    family(ev, E_FAMILY)
}

pub fn classify_extendability(ev: &Evidence) -> FamilyOutcome {
    family(ev, FG_FAMILY)
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub web: String,
    pub config: Config,
    pub isoclinicity: Isoclinicity,
    /// Most specific A and E labels, the full C/D chain, the F/G label and
    /// the isoclinicity label when the web is isoclinic.
    pub classes: Vec<ClassLabel>,
    /// Ancestors of reported A and E labels.
    pub implied: Vec<ClassLabel>,
    /// Labels whose membership could not be decided.
    pub undetermined: Vec<ClassLabel>,
    /// Identity ids (with required outcome) behind each asserted label.
    pub support: BTreeMap<ClassLabel, Vec<String>>,
    pub verdicts: BTreeMap<String, IdentityVerdict>,
    /// Components of b that vanish identically.
    pub fingerprint: Vec<String>,
    pub advisories: Vec<String>,
}

impl ClassificationReport {
    pub fn has_undetermined(&self) -> bool {
        !self.undetermined.is_empty()
            || self.isoclinicity == Isoclinicity::Undetermined
            || self.verdicts.values().any(|v| v.status == Status::Undetermined)
    }

    /// All asserted labels, reported and implied.
    pub fn all_labels(&self) -> Vec<ClassLabel> {
        let mut v: Vec<ClassLabel> = self.classes.iter().chain(&self.implied).copied().collect();
        v.sort();
        v
    }

    /// Labels falling in one summary-table column.
    pub fn column(&self, col: char) -> Vec<ClassLabel> {
        self.classes
            .iter()
            .copied()
            .filter(|l| l.column() == Some(col))
            .collect()
    }
}

fn is_leaf_family(l: ClassLabel) -> bool {
    matches!(l.column(), Some('A') | Some('E'))
}

pub fn report_from_evidence(web_name: &str, ev: &Evidence) -> ClassificationReport {
    let iso = classify_isoclinicity(ev);
    let mut asserted = Vec::new();
    let mut undetermined = Vec::new();
    let mut take = |o: FamilyOutcome| {
        asserted.extend(o.members);
        undetermined.extend(o.undetermined);
    };
    take(classify_geodesic_type(ev));
    match iso {
        Isoclinicity::Nonisoclinic => {
            take(classify_transversal(ev));
            take(classify_E(ev));
            take(classify_extendability(ev));
        }
        Isoclinicity::Isoclinic => asserted.push(ClassLabel::ISOCLINIC),
        Isoclinicity::IsocliniclyGeodesic => asserted.push(ClassLabel::ISOCLINICLY_GEODESIC),
        Isoclinicity::Undetermined => {
            undetermined.push(ClassLabel::ISOCLINIC);
        }
    }
    asserted.sort();
    undetermined.sort();

    let ancestors: Vec<ClassLabel> = asserted.iter().flat_map(|l| l.superclasses()).collect();
    let (implied, classes): (Vec<ClassLabel>, Vec<ClassLabel>) = asserted
        .iter()
        .partition(|l| is_leaf_family(**l) && ancestors.contains(l));

    let support = asserted
        .iter()
        .map(|&l| {
            let ids = conditions(l)
                .into_iter()
                .map(|(id, h)| if h { id.to_string() } else { format!("not {id}") })
                .collect();
            (l, ids)
        })
        .collect();

    let fingerprint = (0..16)
        .map(|n| b_name(n >> 3 & 1, n >> 2 & 1, n >> 1 & 1, n & 1))
        .filter(|name| ev.verdicts[&format!("{name}=0")].status == Status::Holds)
        .collect();

    let mut advisories = Vec::new();
    let s = |id: &str| ev.verdicts[id].status;
    if s("b^i_jjj=0") == Status::Fails {
        advisories.push("b¹₂₂₂ or b²₁₁₁ is nonzero, which indicates class C".to_string());
    }
    if (s("b^1=0") == Status::Holds || s("b^2=0") == Status::Holds) && s("(41)") == Status::Fails {
        advisories.push("one layer of b vanishes while b does not, which indicates class C".to_string());
    }
    if !advisories.is_empty() && s("(38)") == Status::Holds {
        advisories.push("the curvature shortcuts disagree with the transversal-geodesic test".to_string());
    }
    for v in ev.verdicts.values() {
        if v.status == Status::Undetermined {
            advisories.push(format!(
                "{} is undetermined (max residual {:e}); raise the sample count or shrink the box",
                v.identity_id, v.max_residual
            ));
        }
    }

    ClassificationReport {
        web: web_name.to_string(),
        config: ev.config,
        isoclinicity: iso,
        classes,
        implied,
        undetermined,
        support,
        verdicts: ev.verdicts.clone(),
        fingerprint,
        advisories,
    }
}

/// Samples the web once and runs every classifier on the shared samples.
pub fn full_report(web: &WebDefinition, config: &Config) -> Result<ClassificationReport, ClassifyError> {
    let ev = Evidence::gather(web, config)?;
    Ok(report_from_evidence(web.name(), &ev))
}
