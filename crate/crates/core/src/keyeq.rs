//! The key equation `f · h_y = q + r` with `f ∈ L(F)`, `q ∈ L(K+F+D−G)` and
//! `r ∈ L(K+F−G*)`, and the error vector `e = res_D(rη/f)`.

use serde::Serialize;
use thiserror::Error;

use crate::agcode::{weight, AGCode, AgError};
use crate::curve::Divisor;
use crate::funcspace::{rr_space, DifferentialContext, FuncError, FunctionSpace, SpaceDecomposition};
use crate::gf::Fe;
use crate::linalg::{LinalgError, Matrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KeyEqError {
    #[error(transparent)]
    Func(#[from] FuncError),
    #[error(transparent)]
    Code(#[from] AgError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("code divisor does not match the plan")]
    CodeMismatch,
}

/// Precomputed data for one `(G_c, F)` pair.
pub struct KeyEquationPlan {
    g_code: Divisor,
    lf: FunctionSpace,
    dec: SpaceDecomposition,
    /// `products[a]` row `j`: normal-form coordinates of `f_a · h_{e_j}`.
    products: Vec<Matrix>,
}

impl KeyEquationPlan {
    pub fn new(ctx: &DifferentialContext, g_code: &Divisor, f: &Divisor) -> Result<KeyEquationPlan, KeyEqError> {
        let lf = rr_space(ctx.curve(), f)?;
        let dec = ctx.decompose_with_w(&lf, g_code)?;
        let curve = ctx.curve();
        let hs = ctx.h_space();
        let h_unit = ctx.h_unit();
        let h_forms: Vec<_> = (0..ctx.n()).map(|j| hs.numerator(h_unit.row(j))).collect();
        let mut products = Vec::with_capacity(lf.dim());
        for a in 0..lf.dim() {
            let fa = lf.numerator(&lf.basis_vec(a));
            let rows: Vec<Vec<Fe>> = h_forms.iter().map(|h| curve.nf_coords(&fa.mul(h))).collect();
            products.push(Matrix::from_rows(curve.field(), dec.big.ambient(), &rows));
        }
        Ok(KeyEquationPlan {
            g_code: g_code.clone(),
            lf,
            dec,
            products,
        })
    }

    pub fn f_divisor(&self) -> &Divisor {
        self.lf.divisor()
    }

    pub fn code_divisor(&self) -> &Divisor {
        &self.g_code
    }

    pub fn l_f(&self) -> &FunctionSpace {
        &self.lf
    }

    pub fn decomposition(&self) -> &SpaceDecomposition {
        &self.dec
    }

    /// Coordinates (in the big space) of `f_a · h_y` for each basis element.
    fn epsilon_rows(&self, y: &[Fe]) -> Result<Vec<Vec<Fe>>, KeyEqError> {
        self.products.iter().map(|m| Ok(m.vec_mul(y)?)).collect()
    }

    /// `f · h_y` in big-space coordinates, computed from the forms.
    pub fn epsilon(&self, ctx: &DifferentialContext, f: &[Fe], y: &[Fe]) -> Result<Vec<Fe>, KeyEqError> {
        let h = ctx.h_coords(y)?;
        let prod = self.lf.numerator(f).mul(&ctx.h_space().numerator(&h));
        Ok(ctx.curve().nf_coords(&prod))
    }
}

/// A triple `(f, q, r)` with the derived error and codeword.
#[derive(Clone, Debug, Serialize)]
pub struct KeyEquationSolution {
    #[serde(skip)]
    pub f: Vec<Fe>,
    #[serde(skip)]
    pub q: Vec<Fe>,
    #[serde(skip)]
    pub r: Vec<Fe>,
    #[serde(skip)]
    pub e: Vec<Fe>,
    #[serde(skip)]
    pub codeword: Vec<Fe>,
    pub kernel_dim: usize,
    pub error_weight: usize,
}

#[derive(Clone, Debug)]
pub enum KeyOutcome {
    Accepted(KeyEquationSolution),
    NoKernel,
    /// The candidate failed the membership or weight test.
    Reject { reason: String, candidate: KeyEquationSolution },
}

impl KeyOutcome {
    pub fn accepted(&self) -> Option<&KeyEquationSolution> {
        match self {
            KeyOutcome::Accepted(s) => Some(s),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            KeyOutcome::Accepted(_) => "accepted",
            KeyOutcome::NoKernel => "no-kernel",
            KeyOutcome::Reject { .. } => "reject",
        }
    }
}

/// Solves the key equation for `y` using the first kernel basis vector and
/// accepts when `y − e ∈ code` and `wt(e) ≤ t`.
pub fn key_solve(
    plan: &KeyEquationPlan,
    ctx: &DifferentialContext,
    code: &AGCode,
    y: &[Fe],
    t: usize,
) -> Result<KeyOutcome, KeyEqError> {
    key_solve_with(plan, ctx, code, y, t, 0)
}

/// As [`key_solve`] with the `kernel_index`-th kernel basis vector as `f`.
pub fn key_solve_with(
    plan: &KeyEquationPlan,
    ctx: &DifferentialContext,
    code: &AGCode,
    y: &[Fe],
    t: usize,
    kernel_index: usize,
) -> Result<KeyOutcome, KeyEqError> {
    if code.divisor() != &plan.g_code {
        return Err(KeyEqError::CodeMismatch);
    }
    let field = ctx.curve().field();
    let dec = &plan.dec;
    let eps = plan.epsilon_rows(y)?;
    let mut w_rows = Vec::with_capacity(eps.len());
    let mut b_rows = Vec::with_capacity(eps.len());
    for v in &eps {
        let (_, xb, xw) = dec.split(v)?;
        w_rows.push(xw);
        b_rows.push(xb);
    }
    let dw = dec.w.dim();
    let kernel = if dw == 0 {
        crate::linalg::Subspace::full(field, eps.len())
    } else {
        Matrix::from_rows(field, dw, &w_rows).left_kernel()
    };
    if kernel.dim() <= kernel_index {
        return Ok(KeyOutcome::NoKernel);
    }
    let c = kernel.basis_vec(kernel_index);
    let f = plan.lf.subspace().combine(&c);
    let mut xb = vec![Fe::ZERO; dec.b.dim()];
    let mut total = vec![Fe::ZERO; dec.big.ambient()];
    for (a, &ca) in c.iter().enumerate() {
        if ca.is_zero() {
            continue;
        }
        for (x, &b) in xb.iter_mut().zip(&b_rows[a]) {
            *x = field.add(*x, field.mul(ca, b));
        }
        for (x, &b) in total.iter_mut().zip(&eps[a]) {
            *x = field.add(*x, field.mul(ca, b));
        }
    }
    let r = dec.b.subspace().combine(&xb);
    let q: Vec<Fe> = total.iter().zip(&r).map(|(&a, &b)| field.sub(a, b)).collect();
    let e = residues_over_f(plan, ctx, &r, &f)?;
    let codeword: Vec<Fe> = y.iter().zip(&e).map(|(&a, &b)| field.sub(a, b)).collect();
    let sol = KeyEquationSolution {
        error_weight: weight(&e),
        f,
        q,
        r,
        e,
        codeword,
        kernel_dim: kernel.dim(),
    };
    if !code.in_code(&sol.codeword)? {
        return Ok(KeyOutcome::Reject {
            reason: "y - e is not a codeword".into(),
            candidate: sol,
        });
    }
    if sol.error_weight > t {
        return Ok(KeyOutcome::Reject {
            reason: format!("wt(e) = {} exceeds {t}", sol.error_weight),
            candidate: sol,
        });
    }
    Ok(KeyOutcome::Accepted(sol))
}

/// `res_D(v η / f)` for `v` in big-space coordinates and `f ∈ L(F)`.
pub fn residues_over_f(
    plan: &KeyEquationPlan,
    ctx: &DifferentialContext,
    v: &[Fe],
    f: &[Fe],
) -> Result<Vec<Fe>, KeyEqError> {
    // (N/(H_F H_U)) / (G_f/H_F) = N / (H_U G_f)
    let num = plan.dec.big.numerator(v);
    let den = ctx.h_space().denominator().form.mul(&plan.lf.numerator(f));
    Ok(ctx.residues_of(&num, &den)?)
}

/// Re-checks `f ∈ L(F) ∖ 0`, `q`, `r` in their spaces and `f h_y = q + r`.
pub fn verify_solution(
    plan: &KeyEquationPlan,
    ctx: &DifferentialContext,
    y: &[Fe],
    sol: &KeyEquationSolution,
) -> Result<bool, KeyEqError> {
    let field = ctx.curve().field();
    if sol.f.iter().all(|x| x.is_zero()) || !plan.lf.contains(&sol.f) {
        return Ok(false);
    }
    if !plan.dec.a.contains(&sol.q) || !plan.dec.b.contains(&sol.r) {
        return Ok(false);
    }
    let lhs = plan.epsilon(ctx, &sol.f, y)?;
    let rhs: Vec<Fe> = sol.q.iter().zip(&sol.r).map(|(&a, &b)| field.add(a, b)).collect();
    Ok(lhs == rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{RunConfig, Setup};
    use crate::decoder::DecoderPlan;
    use crate::sim::{random_element, random_nonzero};
    use rand::seq::index::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn load(text: &str) -> (Setup, DecoderPlan) {
        let s = RunConfig::from_json(text).unwrap().build().unwrap();
        let p = DecoderPlan::new(&s.code, s.p_inf, s.options.clone()).unwrap();
        (s, p)
    }

    fn word(s: &Setup, rng: &mut ChaCha8Rng, w: usize) -> (Vec<Fe>, Vec<Fe>, Vec<Fe>) {
        let f = &s.field;
        let msg: Vec<Fe> = (0..s.code.k()).map(|_| random_element(f, rng)).collect();
        let c = s.code.encode(&msg).unwrap();
        let mut e = vec![Fe::ZERO; s.code.n()];
        for j in sample(rng, s.code.n(), w) {
            e[j] = random_nonzero(f, rng);
        }
        let y = c.iter().zip(&e).map(|(&a, &b)| f.add(a, b)).collect();
        (c, e, y)
    }

    #[test]
    fn codewords_are_accepted_with_zero_error() {
        let (s, p) = load(crate::repro::KLEIN_CONFIG);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (c, _, _) = word(&s, &mut rng, 0);
        let out = key_solve(p.ke_only_plan(), p.context(), p.code(), &c, p.t()).unwrap();
        let sol = out.accepted().expect("accepted");
        assert_eq!(sol.error_weight, 0);
        assert_eq!(sol.codeword, c);
    }

    #[test]
    fn recovers_errors_up_to_nu() {
        for (text, nu) in [(crate::repro::KLEIN_CONFIG, 2), (crate::repro::HERMITIAN_CONFIG, 3)] {
            let (s, p) = load(text);
            let ke = p.ke_only_plan();
            assert_eq!(ke.f_divisor().degree(), nu + s.curve.genus() as i64);
            let mut rng = ChaCha8Rng::seed_from_u64(2);
            for w in 0..=nu as usize {
                for _ in 0..5 {
                    let (c, e, y) = word(&s, &mut rng, w);
                    let out = key_solve(ke, p.context(), p.code(), &y, p.t()).unwrap();
                    let sol = out.accepted().expect("accepted");
                    assert_eq!((&sol.e, &sol.codeword), (&e, &c));
                    assert!(verify_solution(ke, p.context(), &y, sol).unwrap());
                }
            }
        }
    }

    #[test]
    fn tampered_solutions_fail_verification() {
        let (s, p) = load(crate::repro::KLEIN_CONFIG);
        let ke = p.ke_only_plan();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (_, _, y) = word(&s, &mut rng, 2);
        let mut sol = key_solve(ke, p.context(), p.code(), &y, p.t())
            .unwrap()
            .accepted()
            .unwrap()
            .clone();
        let j = sol.q.iter().position(|x| !x.is_zero()).unwrap_or(0);
        sol.q[j] = s.field.add(sol.q[j], Fe::ONE);
        assert!(!verify_solution(ke, p.context(), &y, &sol).unwrap());
        sol.f = vec![Fe::ZERO; sol.f.len()];
        assert!(!verify_solution(ke, p.context(), &y, &sol).unwrap());
    }

    #[test]
    fn any_kernel_vector_gives_the_same_error() {
        let (s, p) = load(crate::repro::HERMITIAN_CONFIG);
        let ke = p.ke_only_plan();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut multi = 0;
        for _ in 0..10 {
            let (_, e, y) = word(&s, &mut rng, 1);
            let first = key_solve(ke, p.context(), p.code(), &y, p.t()).unwrap();
            let dim = first.accepted().unwrap().kernel_dim;
            for idx in 1..dim {
                multi += 1;
                let out = key_solve_with(ke, p.context(), p.code(), &y, p.t(), idx).unwrap();
                assert_eq!(out.accepted().unwrap().e, e);
            }
        }
        assert!(multi > 0, "no instance had a kernel of dimension > 1");
    }

    #[test]
    fn code_divisor_must_match() {
        let (_, p) = load(crate::repro::KLEIN_CONFIG);
        let y = vec![Fe::ZERO; p.code().n()];
        let err = key_solve(p.ke_only_plan(), p.context(), p.round_code(1), &y, p.t());
        assert!(matches!(err, Err(KeyEqError::CodeMismatch)));
    }
}
