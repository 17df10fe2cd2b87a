//! The full decoder: rounds `r = 0..=g` over `G_r = G + r·P_∞`, each trying
//! two key equations and otherwise voting a coset step.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::agcode::{weight, AGCode, AgError};
use crate::curve::{Divisor, PlaneCurve};
use crate::funcspace::{DifferentialContext, FuncError};
use crate::gf::Fe;
use crate::keyeq::{key_solve, KeyEqError, KeyEquationPlan, KeyOutcome};
use crate::mcd::{vote, CosetContext, CosetLadders, McdError, VoteOutcome};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecoderError {
    #[error("P_inf must be a rational point outside D")]
    NoExtraPoint,
    #[error("genus 0: use the plain key equation")]
    GenusZero,
    #[error("correction capacity is 0")]
    CapacityZero,
    #[error("F0 must have degree t = {t}, got {got}")]
    BadF0 { t: usize, got: i64 },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Func(#[from] FuncError),
    #[error(transparent)]
    Code(#[from] AgError),
    #[error(transparent)]
    KeyEq(#[from] KeyEqError),
    #[error(transparent)]
    Mcd(#[from] McdError),
}

/// Which code divisor branch (i) decodes against in round `r`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
pub enum BranchIDivisor {
    #[default]
    G,
    Gr,
}

#[derive(Clone, Debug, Default)]
pub struct DecoderOptions {
    pub f0: Option<Divisor>,
    pub g_star: Option<Divisor>,
    pub branch_i: BranchIDivisor,
}

/// Everything the decoder precomputes for one code.
pub struct DecoderPlan {
    curve: Arc<PlaneCurve>,
    ctx: DifferentialContext,
    p_inf: usize,
    f0: Divisor,
    t: usize,
    options: DecoderOptions,
    /// `C_Ω(D, G_r)` for `r = 0..=g+1`.
    codes: Vec<AGCode>,
    /// Branch (i): one plan for `G`, or one per round for `G_r`.
    ke_i: Vec<KeyEquationPlan>,
    /// Branch (ii): `(G_r, F_r)` for `r = 0..=g`.
    ke_ii: Vec<KeyEquationPlan>,
    /// Plain key equation with `F = (ν + g)·P_∞`.
    ke_only: KeyEquationPlan,
    ladders: CosetLadders,
}

impl DecoderPlan {
    pub fn new(code: &AGCode, p_inf: usize, options: DecoderOptions) -> Result<DecoderPlan, DecoderError> {
        let curve = code.curve().clone();
        let d = code.d_points().to_vec();
        let genus = curve.genus();
        if p_inf >= curve.points().len() || d.contains(&p_inf) {
            return Err(DecoderError::NoExtraPoint);
        }
        if genus == 0 {
            return Err(DecoderError::GenusZero);
        }
        let t = code.t();
        if t == 0 {
            return Err(DecoderError::CapacityZero);
        }
        let g = code.divisor().clone();
        let f0 = options.f0.clone().unwrap_or_else(|| Divisor::single(p_inf, t as i64));
        if f0.degree() != t as i64 {
            return Err(DecoderError::BadF0 { t, got: f0.degree() });
        }
        let ctx = DifferentialContext::new(&curve, &d, &g, options.g_star.as_ref(), p_inf)?;
        let shift = |r: usize| Divisor::single(p_inf, r as i64);
        let mut codes = Vec::with_capacity(genus + 2);
        for r in 0..=genus + 1 {
            codes.push(AGCode::with_divisor(&curve, &d, &g.add(&shift(r)))?);
        }
        for (r, c) in codes.iter().enumerate().take(genus + 1) {
            if 2 * t as i64 + r as i64 + 1 > c.d_star() {
                return Err(DecoderError::Invariant(format!("2t + r + 1 > d1* in round {r}")));
            }
        }
        let two_g = 2 * genus;
        let f_top = f0.add(&shift(two_g - 1));
        let fi_div = g.sub(&f_top);
        let ke_i = match options.branch_i {
            BranchIDivisor::G => vec![KeyEquationPlan::new(&ctx, &g, &fi_div)?],
            BranchIDivisor::Gr => (0..=genus)
                .map(|r| KeyEquationPlan::new(&ctx, &g.add(&shift(r)), &fi_div))
                .collect::<Result<_, _>>()?,
        };
        let ke_ii = (0..=genus)
            .map(|r| KeyEquationPlan::new(&ctx, &g.add(&shift(r)), &f0.add(&shift(r))))
            .collect::<Result<_, _>>()?;
        let nu = (code.d_star() - genus as i64 - 1).max(0) / 2;
        let ke_only = KeyEquationPlan::new(&ctx, &g, &Divisor::single(p_inf, nu + genus as i64))?;
        // f-side: F_j for j ≤ 2g − 1; g-side: shifts down to r − (2g−2) − 1 ≥ −(2g−1).
        let ladders = CosetLadders::new(&curve, &d, &g, &f0, p_inf, two_g - 1, two_g - 1)?;
        Ok(DecoderPlan {
            curve,
            ctx,
            p_inf,
            f0,
            t,
            options,
            codes,
            ke_i,
            ke_ii,
            ke_only,
            ladders,
        })
    }

    pub fn curve(&self) -> &Arc<PlaneCurve> {
        &self.curve
    }

    pub fn context(&self) -> &DifferentialContext {
        &self.ctx
    }

    pub fn code(&self) -> &AGCode {
        &self.codes[0]
    }

    /// `C_Ω(D, G + r·P_∞)` for `r ≤ g + 1`.
    pub fn round_code(&self, r: usize) -> &AGCode {
        &self.codes[r]
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn p_inf(&self) -> usize {
        self.p_inf
    }

    pub fn f0(&self) -> &Divisor {
        &self.f0
    }

    pub fn ladders(&self) -> &CosetLadders {
        &self.ladders
    }

    pub fn ke_only_plan(&self) -> &KeyEquationPlan {
        &self.ke_only
    }

    pub fn branch_i_plan(&self, r: usize) -> &KeyEquationPlan {
        match self.options.branch_i {
            BranchIDivisor::G => &self.ke_i[0],
            BranchIDivisor::Gr => &self.ke_i[r],
        }
    }

    pub fn branch_ii_plan(&self, r: usize) -> &KeyEquationPlan {
        &self.ke_ii[r]
    }

    fn branch_i_code(&self, r: usize) -> &AGCode {
        match self.options.branch_i {
            BranchIDivisor::G => &self.codes[0],
            BranchIDivisor::Gr => &self.codes[r],
        }
    }

    /// Coset context for round `r` (`H₁ = G_r`).
    pub fn coset_context(&self, r: usize) -> Result<CosetContext<'_>, DecoderError> {
        Ok(CosetContext::new(&self.ladders, r, &self.codes[r], &self.codes[r + 1])?)
    }

    /// Indices `i ∈ [r, 2g−2]` where condition (A) holds.
    pub fn candidates(&self, cc: &CosetContext<'_>, y1: &[Fe]) -> Result<Vec<usize>, DecoderError> {
        let genus = self.curve.genus();
        let mut out = Vec::new();
        for i in cc.r..=(2 * genus).saturating_sub(2) {
            if cc.condition_a(y1, i)?.holds() {
                out.push(i);
            }
        }
        Ok(out)
    }

    pub fn decode(&self, y: &[Fe]) -> Result<DecodeResult, DecoderError> {
        let n = self.ctx.n();
        if y.len() != n {
            return Err(AgError::LengthMismatch { expected: n, got: y.len() }.into());
        }
        let field = self.curve.field();
        let genus = self.curve.genus();
        let mut y1 = y.to_vec();
        let mut rounds = Vec::new();
        for r in 0..=genus {
            let mut trace = RoundTrace::new(r);
            let ke1 = key_solve(self.branch_i_plan(r), &self.ctx, self.branch_i_code(r), &y1, self.t)?;
            trace.ke_i = ke1.label().to_string();
            if let KeyOutcome::Accepted(sol) = &ke1 {
                // translate only when consistent with the round invariant
                let c1: Vec<Fe> = y1.iter().zip(&sol.e).map(|(&a, &b)| field.sub(a, b)).collect();
                if self.codes[r].in_code(&c1)? {
                    trace.branch = Branch::KeyEquationI;
                    rounds.push(trace);
                    return self.finish(y, sol.e.clone(), rounds);
                }
                trace.ke_i = "reject-round-code".into();
            }
            let ke2 = key_solve(&self.ke_ii[r], &self.ctx, &self.codes[r], &y1, self.t)?;
            trace.ke_ii = ke2.label().to_string();
            if let KeyOutcome::Accepted(sol) = &ke2 {
                trace.branch = Branch::KeyEquationII;
                rounds.push(trace);
                return self.finish(y, sol.e.clone(), rounds);
            }
            if r == genus {
                trace.branch = Branch::Failed;
                rounds.push(trace);
                return Ok(DecodeResult::failure(FailureReason::FinalRoundRejected, rounds));
            }
            let cc = self.coset_context(r)?;
            let Some(c0) = cc.c0.clone() else {
                trace.branch = Branch::Unchanged;
                rounds.push(trace);
                continue;
            };
            let ia = self.candidates(&cc, &y1)?;
            trace.i_a = ia.clone();
            if ia.is_empty() {
                trace.branch = Branch::Failed;
                rounds.push(trace);
                return Ok(DecodeResult::failure(FailureReason::EmptyCandidates, rounds));
            }
            let reports = ia.iter().map(|&i| cc.coset_step(&y1, i)).collect::<Result<Vec<_>, _>>()?;
            trace.abstentions = reports.iter().filter(|r| r.abstain.is_some()).map(|r| r.i).collect();
            let (outcome, tally) = vote(&reports);
            trace.votes = tally
                .iter()
                .map(|(&k, &c)| (field.format(field.from_raw(k).expect("tally key")), c))
                .collect();
            match outcome {
                VoteOutcome::Winner { lambda, .. } => {
                    trace.lambda = Some(field.format(lambda));
                    trace.branch = Branch::Vote;
                    for (a, &c) in y1.iter_mut().zip(&c0) {
                        *a = field.sub(*a, field.mul(lambda, c));
                    }
                    rounds.push(trace);
                }
                VoteOutcome::Tie => {
                    trace.branch = Branch::Failed;
                    rounds.push(trace);
                    return Ok(DecodeResult::failure(FailureReason::Tie, rounds));
                }
                VoteOutcome::EmptyVote => {
                    trace.branch = Branch::Failed;
                    rounds.push(trace);
                    return Ok(DecodeResult::failure(FailureReason::EmptyVote, rounds));
                }
            }
        }
        Err(DecoderError::Invariant("round loop exited without a result".into()))
    }

    /// The plain key equation with `F = (ν + g)·P_∞`.
    pub fn decode_ke_only(&self, y: &[Fe]) -> Result<DecodeResult, DecoderError> {
        let out = key_solve(&self.ke_only, &self.ctx, &self.codes[0], y, self.t)?;
        let mut trace = RoundTrace::new(0);
        trace.ke_ii = out.label().to_string();
        match out {
            KeyOutcome::Accepted(sol) => {
                trace.branch = Branch::KeyEquationOnly;
                self.finish(y, sol.e, vec![trace])
            }
            _ => {
                trace.branch = Branch::Failed;
                Ok(DecodeResult::failure(FailureReason::KeyEquationRejected, vec![trace]))
            }
        }
    }

    fn finish(&self, y: &[Fe], e: Vec<Fe>, rounds: Vec<RoundTrace>) -> Result<DecodeResult, DecoderError> {
        let field = self.curve.field();
        let c: Vec<Fe> = y.iter().zip(&e).map(|(&a, &b)| field.sub(a, b)).collect();
        if !self.codes[0].in_code(&c)? || weight(&e) > self.t {
            return Err(DecoderError::Invariant("decoded word is not a codeword within capacity".into()));
        }
        Ok(DecodeResult {
            status: Status::Decoded,
            rounds_used: rounds.len(),
            error: Some(e),
            codeword: Some(c),
            failure: None,
            rounds,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Decoded,
    Failure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    EmptyCandidates,
    Tie,
    EmptyVote,
    FinalRoundRejected,
    KeyEquationRejected,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    None,
    #[serde(rename = "ke_i")]
    KeyEquationI,
    #[serde(rename = "ke_ii")]
    KeyEquationII,
    #[serde(rename = "ke_only")]
    KeyEquationOnly,
    Vote,
    /// `C₁ = C₂`, so `y₂ = y₁`.
    Unchanged,
    Failed,
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundTrace {
    pub r: usize,
    pub branch: Branch,
    pub ke_i: String,
    pub ke_ii: String,
    #[serde(rename = "I_A")]
    pub i_a: Vec<usize>,
    pub votes: BTreeMap<String, usize>,
    pub abstentions: Vec<usize>,
    pub lambda: Option<String>,
}

impl RoundTrace {
    fn new(r: usize) -> RoundTrace {
        RoundTrace {
            r,
            branch: Branch::None,
            ke_i: String::new(),
            ke_ii: String::new(),
            i_a: Vec::new(),
            votes: BTreeMap::new(),
            abstentions: Vec::new(),
            lambda: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DecodeResult {
    pub status: Status,
    pub error: Option<Vec<Fe>>,
    pub codeword: Option<Vec<Fe>>,
    pub rounds_used: usize,
    pub rounds: Vec<RoundTrace>,
    pub failure: Option<FailureReason>,
}

impl DecodeResult {
    fn failure(reason: FailureReason, rounds: Vec<RoundTrace>) -> DecodeResult {
        DecodeResult {
            status: Status::Failure,
            error: None,
            codeword: None,
            rounds_used: rounds.len(),
            rounds,
            failure: Some(reason),
        }
    }

    pub fn is_decoded(&self) -> bool {
        self.status == Status::Decoded
    }

    /// JSON trace with vectors rendered as `α`-powers.
    pub fn to_json(&self, field: &crate::gf::Field) -> serde_json::Value {
        let vec = |v: &Option<Vec<Fe>>| {
            v.as_ref()
                .map(|v| serde_json::Value::from(v.iter().map(|&x| field.format(x)).collect::<Vec<_>>()))
                .unwrap_or(serde_json::Value::Null)
        };
        serde_json::json!({
            "status": self.status,
            "failure": self.failure,
            "rounds_used": self.rounds_used,
            "error": vec(&self.error),
            "codeword": vec(&self.codeword),
            "rounds": self.rounds,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{RunConfig, Setup};
    use crate::gf::{Field, FieldSpec};
    use crate::poly::parse_form;
    use crate::sim::trial_word;

    fn load(text: &str) -> Setup {
        RunConfig::from_json(text).unwrap().build().unwrap()
    }

    #[test]
    fn plan_preconditions() {
        let f = Field::new(FieldSpec::new(2, &[1, 1, 0, 1])).unwrap();
        let conic = Arc::new(PlaneCurve::new(&f, parse_form(&f, "X^2 + Y*Z").unwrap()).unwrap());
        assert_eq!(conic.genus(), 0);
        let top = conic.points().len() - 1;
        let origin = conic.affine_points()[0];
        let d: Vec<usize> = (0..conic.points().len()).filter(|&p| p != top && p != origin).collect();
        let code = AGCode::build(&conic, &d, &Divisor::single(top, 3)).unwrap();
        assert_eq!(
            DecoderPlan::new(&code, origin, DecoderOptions::default()).err(),
            Some(DecoderError::GenusZero)
        );

        let s = load(crate::repro::KLEIN_CONFIG);
        let d0 = s.code.d_points()[0];
        assert_eq!(
            DecoderPlan::new(&s.code, d0, DecoderOptions::default()).err(),
            Some(DecoderError::NoExtraPoint)
        );
        let small = AGCode::build(&s.curve, s.code.d_points(), &Divisor::single(s.p_inf, 5)).unwrap();
        assert_eq!(small.t(), 0);
        assert_eq!(
            DecoderPlan::new(&small, s.p_inf, DecoderOptions::default()).err(),
            Some(DecoderError::CapacityZero)
        );
        let bad = DecoderOptions {
            f0: Some(Divisor::single(s.p_inf, 2)),
            ..Default::default()
        };
        assert!(matches!(
            DecoderPlan::new(&s.code, s.p_inf, bad).err(),
            Some(DecoderError::BadF0 { t: 3, got: 2 })
        ));
    }

    #[test]
    fn choice_of_g_star_does_not_change_results() {
        let s = load(crate::repro::KLEIN_CONFIG);
        let g = s.code.divisor().clone();
        let q = g.support();
        let alt = Divisor::from_terms([(q[0], 1), (q[1], -2)]);
        let p1 = DecoderPlan::new(&s.code, s.p_inf, DecoderOptions::default()).unwrap();
        let p2 = DecoderPlan::new(
            &s.code,
            s.p_inf,
            DecoderOptions {
                g_star: Some(alt),
                ..Default::default()
            },
        )
        .unwrap();
        for t in 0..30 {
            let (cw, y) = trial_word(&p1, 5, (t % 4) as usize, t);
            let a = p1.decode(&y).unwrap();
            let b = p2.decode(&y).unwrap();
            assert_eq!(a.codeword.as_ref(), Some(&cw));
            assert_eq!(a.codeword, b.codeword);
        }
    }

    #[test]
    fn branch_i_on_round_divisor_also_decodes() {
        let s = load(crate::repro::KLEIN_CONFIG);
        let p = DecoderPlan::new(
            &s.code,
            s.p_inf,
            DecoderOptions {
                branch_i: BranchIDivisor::Gr,
                ..Default::default()
            },
        )
        .unwrap();
        for t in 0..40 {
            let (cw, y) = trial_word(&p, 6, 3, t);
            assert_eq!(p.decode(&y).unwrap().codeword, Some(cw));
        }
    }

    #[test]
    fn beyond_capacity_never_returns_a_non_codeword() {
        let s = load(crate::repro::KLEIN_CONFIG);
        let p = DecoderPlan::new(&s.code, s.p_inf, DecoderOptions::default()).unwrap();
        for t in 0..30 {
            let (_, y) = trial_word(&p, 7, 5, t);
            let res = p.decode(&y).unwrap();
            match &res.codeword {
                Some(c) => {
                    assert!(s.code.in_code(c).unwrap());
                    assert!(weight(res.error.as_ref().unwrap()) <= p.t());
                }
                None => assert!(res.failure.is_some()),
            }
        }
    }

    #[test]
    fn trace_serialization() {
        let s = load(crate::repro::KLEIN_CONFIG);
        let p = DecoderPlan::new(&s.code, s.p_inf, DecoderOptions::default()).unwrap();
        let (_, y) = trial_word(&p, 8, 1, 0);
        let j = p.decode(&y).unwrap().to_json(&s.field);
        assert_eq!(j["status"], "decoded");
        let branch = j["rounds"][0]["branch"].as_str().unwrap();
        assert!(["ke_i", "ke_ii"].contains(&branch), "{branch}");
        assert!(j["rounds"][0].get("I_A").is_some());
    }
}
