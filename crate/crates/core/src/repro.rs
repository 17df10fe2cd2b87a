//! Reproduction of the two worked examples bundled in `fixtures/`.
//!
//! Each example is run twice: under the default point ordering, and under
//! a reference ordering, found by search, under which the golden vectors are
//! reproduced (see `fixtures/*_order.json`).

use serde::{Deserialize, Serialize};

use crate::agcode::AGCode;
use crate::config::{ConfigError, RunConfig, Setup};
use crate::decoder::{Branch, DecoderError, DecoderPlan};
use crate::funcspace::RationalFunction;
use crate::gf::{Fe, Field};

pub const KLEIN_CONFIG: &str = include_str!("../../../fixtures/klein_f8.json");
pub const HERMITIAN_CONFIG: &str = include_str!("../../../fixtures/hermitian_f16.json");
pub const KLEIN_EXAMPLE_ORDER: &str = include_str!("../../../fixtures/klein_f8_example1_order.json");
pub const HERMITIAN_EXAMPLE_ORDER: &str = include_str!("../../../fixtures/hermitian_f16_example2_order.json");
pub const EXAMPLE1_GOLDEN: &str = include_str!("../../../fixtures/golden/example1.json");
pub const EXAMPLE2_GOLDEN: &str = include_str!("../../../fixtures/golden/example2.json");

#[derive(Debug, thiserror::Error)]
pub enum ReproError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Decoder(#[from] DecoderError),
    #[error("golden data: {0}")]
    Golden(String),
}

#[derive(Clone, Debug, Deserialize)]
pub struct RationalText {
    pub num: String,
    pub den: String,
}

#[derive(Clone, Debug, Deserialize)]
pub struct Golden {
    pub y1: Vec<String>,
    #[serde(default)]
    pub c: Option<Vec<String>>,
    #[serde(default)]
    pub y2: Option<Vec<String>>,
    #[serde(default)]
    pub f: Option<RationalText>,
    #[serde(default)]
    pub g: Option<RationalText>,
    #[serde(default)]
    pub lambda: Option<String>,
    #[serde(rename = "I_A")]
    pub i_a: Vec<usize>,
}

impl Golden {
    fn parse_vec(field: &Field, v: &[String]) -> Result<Vec<Fe>, ReproError> {
        v.iter()
            .map(|s| field.parse(s).map_err(|e| ReproError::Golden(e.to_string())))
            .collect()
    }
}

/// Round-0 facts of a decode trace.
#[derive(Clone, Debug, Serialize)]
pub struct RoundZero {
    pub ke_i: String,
    pub ke_ii: String,
    pub branch: Branch,
    #[serde(rename = "I_A")]
    pub i_a: Vec<usize>,
    pub votes: std::collections::BTreeMap<String, usize>,
    pub lambda: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderingRun {
    pub ordering: &'static str,
    pub round0: RoundZero,
    /// Round-0 candidate set computed directly, whichever branch fired.
    pub candidates: Vec<usize>,
    pub decoded: bool,
    /// `e` equals the known error (the received word itself in both examples).
    pub error_recovered: bool,
    pub rounds_used: usize,
    /// After a round-0 vote: `y₂ − e ∈ C₂` for the known error.
    pub post_round_coset_ok: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Example1Report {
    /// `y₂ = y₁ − λ·c` for the golden vectors.
    pub identity_holds: bool,
    pub default_run: OrderingRun,
    pub reference_run: OrderingRun,
    pub reference_c_in_c1: bool,
    pub reference_c_in_c2: bool,
    /// `S_{y₁}(fg)/S_c(fg)` with the golden `f`, `g`, `c` under the reference ordering.
    pub reference_lambda_recomputed: Option<String>,
    /// The golden `f` lies in `K₁(F₃ + P_∞)`.
    pub reference_f_in_k1: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Example2Report {
    pub default_run: OrderingRun,
    pub reference_run: OrderingRun,
}

fn setup(text: &str) -> Result<Setup, ReproError> {
    Ok(RunConfig::from_json(text)?.build()?)
}

fn plan_of(s: &Setup) -> Result<DecoderPlan, ReproError> {
    Ok(DecoderPlan::new(&s.code, s.p_inf, s.options.clone())?)
}

fn run(plan: &DecoderPlan, ordering: &'static str, y1: &[Fe]) -> Result<OrderingRun, ReproError> {
    let field = plan.curve().field();
    let res = plan.decode(y1)?;
    let r0 = &res.rounds[0];
    let round0 = RoundZero {
        ke_i: r0.ke_i.clone(),
        ke_ii: r0.ke_ii.clone(),
        branch: r0.branch,
        i_a: r0.i_a.clone(),
        votes: r0.votes.clone(),
        lambda: r0.lambda.clone(),
    };
    // the golden words have weight ≤ t, so the true error is y₁ itself
    let post_round_coset_ok = match (&r0.lambda, plan.coset_context(0)?.c0.clone()) {
        (Some(l), Some(c0)) if r0.branch == Branch::Vote => {
            let lambda = field.parse(l).map_err(|e| ReproError::Golden(e.to_string()))?;
            let y2_minus_e: Vec<Fe> = c0.iter().map(|&c| field.neg(field.mul(lambda, c))).collect();
            Some(plan.round_code(1).in_code(&y2_minus_e).map_err(DecoderError::from)?)
        }
        _ => None,
    };
    let cc = plan.coset_context(0)?;
    let candidates = plan.candidates(&cc, y1)?;
    Ok(OrderingRun {
        ordering,
        round0,
        candidates,
        decoded: res.is_decoded(),
        error_recovered: res.error.as_deref() == Some(y1),
        rounds_used: res.rounds_used,
        post_round_coset_ok,
    })
}

fn syndrome(code: &AGCode, y: &[Fe], h: &RationalFunction) -> Result<Fe, ReproError> {
    Ok(code.syndrome(y, h).map_err(DecoderError::from)?)
}

pub fn example1() -> Result<Example1Report, ReproError> {
    let golden: Golden = serde_json::from_str(EXAMPLE1_GOLDEN).map_err(|e| ReproError::Golden(e.to_string()))?;
    let def = setup(KLEIN_CONFIG)?;
    let field = def.field.clone();
    let y1 = Golden::parse_vec(&field, &golden.y1)?;
    let missing = |w: &str| ReproError::Golden(format!("klein golden data lacks {w}"));
    let c = Golden::parse_vec(&field, golden.c.as_ref().ok_or_else(|| missing("c"))?)?;
    let y2 = Golden::parse_vec(&field, golden.y2.as_ref().ok_or_else(|| missing("y2"))?)?;
    let lambda = field
        .parse(golden.lambda.as_ref().ok_or_else(|| missing("lambda"))?)
        .map_err(|e| ReproError::Golden(e.to_string()))?;
    let identity_holds = y1
        .iter()
        .zip(&c)
        .zip(&y2)
        .all(|((&a, &b), &r)| field.sub(a, field.mul(lambda, b)) == r);

    let default_run = run(&plan_of(&def)?, "default", &y1)?;

    let pubs = setup(KLEIN_EXAMPLE_ORDER)?;
    let plan = plan_of(&pubs)?;
    let reference_run = run(&plan, "reference", &y1)?;
    let reference_c_in_c1 = plan.round_code(0).in_code(&c).map_err(DecoderError::from)?;
    let reference_c_in_c2 = plan.round_code(1).in_code(&c).map_err(DecoderError::from)?;
    let ft = golden.f.as_ref().ok_or_else(|| missing("f"))?;
    let gt = golden.g.as_ref().ok_or_else(|| missing("g"))?;
    let parse_fn = |t: &RationalText| {
        RationalFunction::parse(&field, &t.num, &t.den).map_err(|e| ReproError::Golden(e.to_string()))
    };
    let (f, g) = (parse_fn(ft)?, parse_fn(gt)?);
    let fg = f.mul(&g);
    let code = plan.round_code(0);
    let sc = syndrome(code, &c, &fg)?;
    let reference_lambda_recomputed = (!sc.is_zero())
        .then(|| field.div(syndrome(code, &y1, &fg)?, sc).map_err(|e| ReproError::Golden(e.to_string())))
        .transpose()?
        .map(|l| field.format(l));
    // K₁(F₃ + P_∞): S_{y₁}(f h) = 0 for h ∈ L(G − F₃ − P_∞)
    let cc = plan.coset_context(0)?;
    let i = *golden.i_a.first().ok_or_else(|| missing("I_A"))?;
    let h_space = plan
        .ladders()
        .g_space(-(i as i64) - 1)
        .ok_or_else(|| ReproError::Golden("index outside the ladder".into()))?;
    let mut reference_f_in_k1 = true;
    for h in h_space.basis_functions() {
        if !syndrome(cc.c1, &y1, &f.mul(&h))?.is_zero() {
            reference_f_in_k1 = false;
        }
    }
    Ok(Example1Report {
        identity_holds,
        default_run,
        reference_run,
        reference_c_in_c1,
        reference_c_in_c2,
        reference_lambda_recomputed,
        reference_f_in_k1,
    })
}

pub fn example2() -> Result<Example2Report, ReproError> {
    let golden: Golden = serde_json::from_str(EXAMPLE2_GOLDEN).map_err(|e| ReproError::Golden(e.to_string()))?;
    let def = setup(HERMITIAN_CONFIG)?;
    let y1 = Golden::parse_vec(&def.field, &golden.y1)?;
    let default_run = run(&plan_of(&def)?, "default", &y1)?;
    let pubs = setup(HERMITIAN_EXAMPLE_ORDER)?;
    let reference_run = run(&plan_of(&pubs)?, "reference", &y1)?;
    Ok(Example2Report {
        default_run,
        reference_run,
    })
}

/// The golden `I_A` of an example.
pub fn golden_i_a(example: u8) -> Result<Vec<usize>, ReproError> {
    let text = if example == 1 { EXAMPLE1_GOLDEN } else { EXAMPLE2_GOLDEN };
    let g: Golden = serde_json::from_str(text).map_err(|e| ReproError::Golden(e.to_string()))?;
    Ok(g.i_a)
}
