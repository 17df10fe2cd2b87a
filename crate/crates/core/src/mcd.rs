//! One coset step of majority coset decoding: from `y₁` with
//! `y₁ − e ∈ C₁ = C_Ω(D, H₁)` produce a vote for `y₂` with `y₂ − e ∈ C₂`,
//! `C₂ = C_Ω(D, H₁ + P_∞)`.
//!
//! Auxiliary divisors are `F_i = F₀ + i·P_∞`. The spaces `L(F_i)` share one
//! denominator, as do the spaces `L(G − F₀ + k·P_∞)` (k ≤ 0) that `L(H − F_i)`
//! runs through, so kernels at different levels compare coordinatewise.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::agcode::{AGCode, AgError};
use crate::curve::{Divisor, PlaneCurve};
use crate::funcspace::{choose_denominator, rr_space_with_denominator, FuncError, FunctionSpace};
use crate::gf::{Fe, Field};
use crate::linalg::{LinalgError, Matrix, Subspace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum McdError {
    #[error(transparent)]
    Func(#[from] FuncError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Code(#[from] AgError),
    #[error("condition (A) does not hold for F_{0}")]
    ConditionAViolated(usize),
    #[error("index {0} outside the precomputed ladder")]
    OutOfLadder(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

/// A family of spaces over one denominator, with their values at `D`.
struct Ladder {
    spaces: Vec<FunctionSpace>,
    /// Values of each space's basis at `D` (`dim × n`).
    values: Vec<Matrix>,
    /// Ambient evaluation at `D` (`ambient × n`).
    eval: Matrix,
}

impl Ladder {
    fn new(curve: &Arc<PlaneCurve>, divisors: &[Divisor], top: &Divisor, d_points: &[usize]) -> Result<Ladder, McdError> {
        let den = Arc::new(choose_denominator(curve, &top.positive_part())?);
        let mut spaces = Vec::with_capacity(divisors.len());
        for a in divisors {
            spaces.push(rr_space_with_denominator(curve, a, den.clone())?);
        }
        let eval = match spaces.first() {
            Some(s) => s.eval_matrix(d_points)?,
            None => Matrix::zeros(curve.field(), 0, d_points.len()),
        };
        let values = spaces
            .iter()
            .map(|s| s.basis_matrix().matmul(&eval, Default::default()))
            .collect::<Result<_, _>>()?;
        Ok(Ladder { spaces, values, eval })
    }
}

/// Precomputed `f`- and `g`-side spaces for a decoder.
pub struct CosetLadders {
    field: Field,
    p_inf: usize,
    /// `L(F_j)` for `j = 0..=max_j`.
    f: Ladder,
    /// `L(G − F₀ + k·P_∞)` at index `-k` for `k = 0, −1, …, −max_neg`.
    g: Ladder,
}

impl CosetLadders {
    /// `max_j` is the largest `F` index needed; `max_neg` the most negative
    /// shift of `G − F₀`.
    pub fn new(
        curve: &Arc<PlaneCurve>,
        d_points: &[usize],
        g: &Divisor,
        f0: &Divisor,
        p_inf: usize,
        max_j: usize,
        max_neg: usize,
    ) -> Result<CosetLadders, McdError> {
        let fdivs: Vec<Divisor> = (0..=max_j).map(|j| f0.add(&Divisor::single(p_inf, j as i64))).collect();
        let base = g.sub(f0);
        let gdivs: Vec<Divisor> = (0..=max_neg).map(|k| base.add(&Divisor::single(p_inf, -(k as i64)))).collect();
        let f = Ladder::new(curve, &fdivs, &fdivs[max_j], d_points)?;
        let gl = Ladder::new(curve, &gdivs, &base, d_points)?;
        Ok(CosetLadders {
            field: curve.field().clone(),
            p_inf,
            f,
            g: gl,
        })
    }

    pub fn p_inf(&self) -> usize {
        self.p_inf
    }

    pub fn f_space(&self, j: usize) -> Option<&FunctionSpace> {
        self.f.spaces.get(j)
    }

    /// `L(G − F₀ + k·P_∞)` for `k ≤ 0`.
    pub fn g_space(&self, k: i64) -> Option<&FunctionSpace> {
        if k > 0 {
            return None;
        }
        self.g.spaces.get((-k) as usize)
    }

    fn g_index(&self, k: i64) -> Result<usize, McdError> {
        if k > 0 || (-k) as usize >= self.g.spaces.len() {
            return Err(McdError::OutOfLadder(format!("g-shift {k}")));
        }
        Ok((-k) as usize)
    }

    fn f_index(&self, j: usize) -> Result<usize, McdError> {
        if j >= self.f.spaces.len() {
            return Err(McdError::OutOfLadder(format!("F_{j}")));
        }
        Ok(j)
    }

    /// Values at `D` of an ambient `f`-side vector.
    pub fn f_values(&self, v: &[Fe]) -> Result<Vec<Fe>, McdError> {
        Ok(self.f.eval.vec_mul(v)?)
    }

    pub fn g_values(&self, v: &[Fe]) -> Result<Vec<Fe>, McdError> {
        Ok(self.g.eval.vec_mul(v)?)
    }
}

/// The round data: `H₁ = G_r`, codes `C₁ = C_Ω(D, G_r)` and
/// `C₂ = C_Ω(D, G_{r+1})`, and a fixed `c₀ ∈ C₁ ∖ C₂`.
pub struct CosetContext<'a> {
    pub ladders: &'a CosetLadders,
    /// `r` in `H₁ = G + r·P_∞`.
    pub r: usize,
    pub c1: &'a AGCode,
    pub c2: &'a AGCode,
    pub c0: Option<Vec<Fe>>,
}

impl<'a> CosetContext<'a> {
    pub fn new(ladders: &'a CosetLadders, r: usize, c1: &'a AGCode, c2: &'a AGCode) -> Result<CosetContext<'a>, McdError> {
        if !c1.subspace().contains_space(c2.subspace()) {
            return Err(McdError::Invariant("C2 is not contained in C1".into()));
        }
        let mut c0 = None;
        for i in 0..c1.k() {
            let v = c1.subspace().basis_vec(i);
            if !c2.in_code(&v)? {
                c0 = Some(v);
                break;
            }
        }
        Ok(CosetContext { ladders, r, c1, c2, c0 })
    }

    /// Designed distance of `C₁`.
    pub fn d1_star(&self) -> i64 {
        self.c1.d_star()
    }

    /// `K_level(F_j) = {f ∈ L(F_j) : S_y(f g) = 0 ∀ g ∈ L(H_level − F_j)}`
    /// as a subspace of the `f`-ladder ambient.
    pub fn kernel_k(&self, y1: &[Fe], j: usize, level: u8) -> Result<Subspace, McdError> {
        let lad = self.ladders;
        let fj = lad.f_index(j)?;
        // H_1 − F_j = G − F₀ + (r − j)P_∞ and H_0 = H_1 − P_∞.
        let k = self.r as i64 - j as i64 - if level == 0 { 1 } else { 0 };
        let gi = lad.g_index(k)?;
        let vf = &lad.f.values[fj];
        let vg = &lad.g.values[gi];
        let field = &lad.field;
        let space = &lad.f.spaces[fj];
        if vg.rows() == 0 {
            return Ok(space.subspace().clone());
        }
        // S[b][a] = Σ_j y_j g_b(P_j) f_a(P_j)
        let mut scaled = vg.clone();
        for b in 0..scaled.rows() {
            for (x, &yj) in scaled.row_mut(b).iter_mut().zip(y1) {
                *x = field.mul(*x, yj);
            }
        }
        let s = scaled.matmul(&vf.transpose(), Default::default())?;
        let ker = s.kernel();
        let rows: Vec<Vec<Fe>> = (0..ker.dim())
            .map(|i| space.basis_matrix().vec_mul(&ker.basis_vec(i)))
            .collect::<Result<_, _>>()?;
        Ok(Subspace::from_rows(field, space.ambient(), &rows))
    }

    /// Condition (A) for `F_i`.
    pub fn condition_a(&self, y1: &[Fe], i: usize) -> Result<ConditionA, McdError> {
        let k1b = self.kernel_k(y1, i + 1, 1)?;
        let k0 = self.kernel_k(y1, i, 0)?;
        let k1 = self.kernel_k(y1, i, 1)?;
        if !k0.contains_space(&k1) || !k1b.contains_space(&k0) {
            return Err(McdError::Invariant(format!("kernel chain broken at F_{i}")));
        }
        if k0.dim() - k1.dim() > 1 || k1b.dim() - k0.dim() > 1 {
            return Err(McdError::Invariant(format!("kernel quotient of dimension > 1 at F_{i}")));
        }
        let shift = self.r as i64 - i as i64;
        let lad = self.ladders;
        let g_hi = &lad.g.spaces[lad.g_index(shift)?];
        let g_lo = &lad.g.spaces[lad.g_index(shift - 1)?];
        if g_hi.dim() - g_lo.dim() > 1 {
            return Err(McdError::Invariant(format!("L(H1-F) quotient of dimension > 1 at F_{i}")));
        }
        Ok(ConditionA {
            a1: k1b.dim() > k0.dim(),
            a2: k0.dim() == k1.dim(),
            a3: g_hi.dim() > g_lo.dim(),
        })
    }

    /// Algorithm-2 step for `F_i`; requires condition (A).
    pub fn coset_step(&self, y1: &[Fe], i: usize) -> Result<CosetStepReport, McdError> {
        let cond = self.condition_a(y1, i)?;
        if !cond.holds() {
            return Err(McdError::ConditionAViolated(i));
        }
        let field = &self.ladders.field;
        let Some(c0) = &self.c0 else {
            return Ok(CosetStepReport::abstain(i, "C1 = C2"));
        };
        let lad = self.ladders;
        let k1b = self.kernel_k(y1, i + 1, 1)?;
        let k0 = self.kernel_k(y1, i, 0)?;
        let fq = k0.complement_in(&k1b)?;
        let f = fq.basis_vec(0);
        let shift = self.r as i64 - i as i64;
        let g_hi = lad.g.spaces[lad.g_index(shift)?].subspace();
        let g_lo = lad.g.spaces[lad.g_index(shift - 1)?].subspace();
        let g = g_lo.complement_in(g_hi)?.basis_vec(0);
        let fv = lad.f_values(&f)?;
        let gv = lad.g_values(&g)?;
        let fg: Vec<Fe> = fv.iter().zip(&gv).map(|(&a, &b)| field.mul(a, b)).collect();
        let num = dot(field, y1, &fg);
        let den = dot(field, c0, &fg);
        if den.is_zero() {
            return Ok(CosetStepReport::abstain(i, "S_c0(fg) = 0"));
        }
        let lambda = field.div(num, den).expect("nonzero denominator");
        Ok(CosetStepReport {
            i,
            lambda: Some(lambda),
            f,
            g,
            abstain: None,
        })
    }
}

fn dot(f: &Field, a: &[Fe], b: &[Fe]) -> Fe {
    a.iter().zip(b).fold(Fe::ZERO, |acc, (&x, &y)| f.add(acc, f.mul(x, y)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionA {
    pub a1: bool,
    pub a2: bool,
    pub a3: bool,
}

impl ConditionA {
    pub fn holds(&self) -> bool {
        self.a1 && self.a2 && self.a3
    }
}

/// One candidate's evidence in a vote round.
#[derive(Clone, Debug)]
pub struct CosetStepReport {
    pub i: usize,
    pub lambda: Option<Fe>,
    /// `f ∈ K₁(F_i + P_∞) ∖ K₀(F_i)` in `f`-ladder coordinates.
    pub f: Vec<Fe>,
    /// `g ∈ L(H₁ − F_i) ∖ L(H₁ − F_i − P_∞)` in `g`-ladder coordinates.
    pub g: Vec<Fe>,
    pub abstain: Option<String>,
}

impl CosetStepReport {
    fn abstain(i: usize, why: &str) -> CosetStepReport {
        CosetStepReport {
            i,
            lambda: None,
            f: Vec::new(),
            g: Vec::new(),
            abstain: Some(why.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VoteOutcome {
    Winner { lambda: Fe, count: usize },
    Tie,
    EmptyVote,
}

/// Strict plurality over non-abstaining reports.
pub fn vote(reports: &[CosetStepReport]) -> (VoteOutcome, BTreeMap<u32, usize>) {
    let mut tally: BTreeMap<u32, usize> = BTreeMap::new();
    for r in reports {
        if let Some(l) = r.lambda {
            *tally.entry(l.raw()).or_insert(0) += 1;
        }
    }
    let Some(&best) = tally.values().max() else {
        return (VoteOutcome::EmptyVote, tally);
    };
    let winners: Vec<u32> = tally.iter().filter(|&(_, &c)| c == best).map(|(&k, _)| k).collect();
    if winners.len() > 1 {
        return (VoteOutcome::Tie, tally);
    }
    let lambda = reports
        .iter()
        .filter_map(|r| r.lambda)
        .find(|l| l.raw() == winners[0])
        .expect("winner comes from a report");
    (VoteOutcome::Winner { lambda, count: best }, tally)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(i: usize, l: Option<u32>) -> CosetStepReport {
        let f = Field::new(crate::gf::FieldSpec::new(2, &[1, 1, 0, 1])).unwrap();
        CosetStepReport {
            i,
            lambda: l.map(|x| f.from_raw(x).unwrap()),
            f: vec![],
            g: vec![],
            abstain: None,
        }
    }

    #[test]
    fn plurality_and_ties() {
        let single = vec![report(3, Some(3))];
        assert!(matches!(vote(&single).0, VoteOutcome::Winner { count: 1, .. }));
        let mut many: Vec<_> = (0..4).map(|i| report(i, Some(5))).collect();
        many.extend((4..7).map(|i| report(i, Some(0))));
        match vote(&many).0 {
            VoteOutcome::Winner { lambda, count } => {
                assert_eq!(lambda.raw(), 5);
                assert_eq!(count, 4);
            }
            other => panic!("{other:?}"),
        }
        let tie = vec![report(0, Some(2)), report(1, Some(2)), report(2, Some(4)), report(3, Some(4))];
        assert_eq!(vote(&tie).0, VoteOutcome::Tie);
        assert_eq!(vote(&[report(0, None)]).0, VoteOutcome::EmptyVote);
    }

    fn klein_plan() -> (crate::config::Setup, crate::decoder::DecoderPlan) {
        let s = crate::config::RunConfig::from_json(crate::repro::KLEIN_CONFIG)
            .unwrap()
            .build()
            .unwrap();
        let p = crate::decoder::DecoderPlan::new(&s.code, s.p_inf, s.options.clone()).unwrap();
        (s, p)
    }

    fn noisy(s: &crate::config::Setup, seed: u64, w: usize) -> (Vec<Fe>, Vec<Fe>) {
        use rand::SeedableRng;
        let f = &s.field;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let msg: Vec<Fe> = (0..s.code.k()).map(|_| crate::sim::random_element(f, &mut rng)).collect();
        let mut y = s.code.encode(&msg).unwrap();
        let mut e = vec![Fe::ZERO; s.code.n()];
        for j in rand::seq::index::sample(&mut rng, s.code.n(), w) {
            e[j] = crate::sim::random_nonzero(f, &mut rng);
            y[j] = f.add(y[j], e[j]);
        }
        (y, e)
    }

    #[test]
    fn zero_word_kernels_are_full() {
        let (s, p) = klein_plan();
        let cc = p.coset_context(0).unwrap();
        let zero = vec![Fe::ZERO; s.code.n()];
        for j in 0..=4 {
            for level in [0, 1] {
                let k = cc.kernel_k(&zero, j, level).unwrap();
                assert_eq!(k.dim(), p.ladders().f_space(j).unwrap().dim());
            }
        }
        for i in 0..=4 {
            let a = cc.condition_a(&zero, i).unwrap();
            assert!(a.a2);
            assert!(!a.a1 || p.ladders().f_space(i + 1).unwrap().dim() > p.ladders().f_space(i).unwrap().dim());
        }
    }

    #[test]
    fn kernel_chain_holds_on_arbitrary_words() {
        let (s, p) = klein_plan();
        for seed in 0..10 {
            let (y, _) = noisy(&s, seed, 8);
            for r in 0..3 {
                let cc = p.coset_context(r).unwrap();
                for i in r..=4 {
                    cc.condition_a(&y, i).unwrap();
                }
            }
        }
    }

    #[test]
    fn coset_step_rejects_indices_outside_i_a() {
        let (s, p) = klein_plan();
        let (y, _) = noisy(&s, 3, 3);
        let cc = p.coset_context(0).unwrap();
        let ia = p.candidates(&cc, &y).unwrap();
        for i in (0..=4).filter(|i| !ia.contains(i)) {
            assert!(matches!(cc.coset_step(&y, i), Err(McdError::ConditionAViolated(_))));
        }
    }

    #[test]
    fn lambda_depends_only_on_the_coset_mod_c2() {
        let (s, p) = klein_plan();
        let f = s.field.clone();
        let cc = p.coset_context(0).unwrap();
        let mut checked = 0;
        for seed in 0..20 {
            let (y, _) = noisy(&s, seed, 3);
            let coords: Vec<Fe> = (0..cc.c2.k()).map(|j| f.alpha_pow(seed as i64 + j as i64)).collect();
            let c2 = cc.c2.encode(&coords).unwrap();
            let y_shift: Vec<Fe> = y.iter().zip(&c2).map(|(&a, &b)| f.add(a, b)).collect();
            for i in p.candidates(&cc, &y).unwrap() {
                let a = cc.coset_step(&y, i).unwrap();
                let b = cc.coset_step(&y_shift, i).unwrap();
                assert_eq!(a.lambda, b.lambda);
                checked += 1;
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn majority_vote_lands_in_the_true_coset() {
        let (s, p) = klein_plan();
        let f = s.field.clone();
        let cc = p.coset_context(0).unwrap();
        let c0 = cc.c0.clone().unwrap();
        for seed in 0..40 {
            let (y, e) = noisy(&s, seed, 3);
            let ia = p.candidates(&cc, &y).unwrap();
            if ia.is_empty() {
                continue;
            }
            let reports: Vec<_> = ia.iter().map(|&i| cc.coset_step(&y, i).unwrap()).collect();
            if let (VoteOutcome::Winner { lambda, .. }, _) = vote(&reports) {
                let rest: Vec<Fe> = y
                    .iter()
                    .zip(&e)
                    .zip(&c0)
                    .map(|((&a, &b), &c)| f.sub(f.sub(a, f.mul(lambda, c)), b))
                    .collect();
                assert!(cc.c2.in_code(&rest).unwrap(), "seed {seed}");
            }
        }
    }
}
