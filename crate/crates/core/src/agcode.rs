//! Residue codes `C_Ω(D, G)`, described as the duals of evaluation codes:
//! `y ∈ C` iff `Σ y_j h(P_j) = 0` for every `h ∈ L(G)`.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::curve::{Divisor, PlaneCurve};
use crate::funcspace::{rr_space, FuncError, FunctionSpace, RationalFunction};
use crate::gf::Fe;
use crate::linalg::{LinalgError, Matrix, Subspace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AgError {
    #[error(transparent)]
    Func(#[from] FuncError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("supp(G) meets D")]
    SupportOverlap,
    #[error("degree out of range: {0}")]
    DegreeOutOfRange(String),
    #[error("expected a vector of length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("function has a pole at D point #{0}")]
    PoleOnD(usize),
}

#[derive(Clone)]
pub struct AGCode {
    curve: Arc<PlaneCurve>,
    d_points: Vec<usize>,
    g: Divisor,
    lg: FunctionSpace,
    /// Evaluations of the `L(G)` basis at `D`, one row per basis element.
    parity: Matrix,
    /// Canonical (RREF) basis of the code.
    code: Subspace,
}

impl fmt::Debug for AGCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AGCode[n={}, k={}, d*={}] G={:?}", self.n(), self.k(), self.d_star(), self.g)
    }
}

impl AGCode {
    /// Strongly algebraic-geometric code: requires `2g−2 < deg G < n`.
    pub fn build(curve: &Arc<PlaneCurve>, d_points: &[usize], g: &Divisor) -> Result<AGCode, AgError> {
        let n = d_points.len() as i64;
        let genus = curve.genus() as i64;
        if !(2 * genus - 2 < g.degree() && g.degree() < n) {
            return Err(AgError::DegreeOutOfRange(format!(
                "need 2g-2 < deg G < n, got deg G = {} with g = {genus}, n = {n}",
                g.degree()
            )));
        }
        AGCode::with_divisor(curve, d_points, g)
    }

    /// Any `G` with support disjoint from `D`; no degree restriction.
    pub fn with_divisor(curve: &Arc<PlaneCurve>, d_points: &[usize], g: &Divisor) -> Result<AGCode, AgError> {
        let dset = Divisor::sum_of(d_points);
        if dset.max_coeff() > 1 {
            return Err(AgError::DegreeOutOfRange("D has repeated points".into()));
        }
        if g.support().iter().any(|&p| dset.coeff(p) != 0) {
            return Err(AgError::SupportOverlap);
        }
        let lg = rr_space(curve, g)?;
        let eval = lg.eval_matrix(d_points)?;
        let parity = lg.basis_matrix().matmul(&eval, Default::default())?;
        let code = parity.kernel();
        Ok(AGCode {
            curve: curve.clone(),
            d_points: d_points.to_vec(),
            g: g.clone(),
            lg,
            parity,
            code,
        })
    }

    pub fn curve(&self) -> &Arc<PlaneCurve> {
        &self.curve
    }

    pub fn d_points(&self) -> &[usize] {
        &self.d_points
    }

    pub fn divisor(&self) -> &Divisor {
        &self.g
    }

    pub fn l_space(&self) -> &FunctionSpace {
        &self.lg
    }

    pub fn n(&self) -> usize {
        self.d_points.len()
    }

    pub fn k(&self) -> usize {
        self.code.dim()
    }

    /// Goppa designed distance `deg G + 2 − 2g`.
    pub fn d_star(&self) -> i64 {
        self.g.degree() + 2 - 2 * self.curve.genus() as i64
    }

    /// `⌊(d* − 1)/2⌋`, clamped at 0.
    pub fn t(&self) -> usize {
        ((self.d_star() - 1).max(0) / 2) as usize
    }

    pub fn parity_check(&self) -> &Matrix {
        &self.parity
    }

    pub fn generator(&self) -> &Matrix {
        self.code.basis()
    }

    pub fn subspace(&self) -> &Subspace {
        &self.code
    }

    fn check_len(&self, y: &[Fe]) -> Result<(), AgError> {
        if y.len() != self.n() {
            return Err(AgError::LengthMismatch {
                expected: self.n(),
                got: y.len(),
            });
        }
        Ok(())
    }

    /// Syndromes of `y` against the `L(G)` basis.
    pub fn syndromes(&self, y: &[Fe]) -> Result<Vec<Fe>, AgError> {
        self.check_len(y)?;
        Ok(self.parity.mul_vec(y)?)
    }

    pub fn in_code(&self, y: &[Fe]) -> Result<bool, AgError> {
        Ok(self.syndromes(y)?.iter().all(|s| s.is_zero()))
    }

    pub fn encode(&self, message: &[Fe]) -> Result<Vec<Fe>, AgError> {
        if message.len() != self.k() {
            return Err(AgError::LengthMismatch {
                expected: self.k(),
                got: message.len(),
            });
        }
        Ok(self.code.combine(message))
    }

    /// `S_y(h) = Σ y_j h(P_j)`.
    pub fn syndrome(&self, y: &[Fe], h: &RationalFunction) -> Result<Fe, AgError> {
        self.check_len(y)?;
        let f = self.curve.field();
        let mut acc = Fe::ZERO;
        for (&yj, &p) in y.iter().zip(&self.d_points) {
            let v = h.value(&self.curve, p)?.ok_or(AgError::PoleOnD(p))?;
            acc = f.add(acc, f.mul(yj, v));
        }
        Ok(acc)
    }

    /// Label of the coset `y + self`: its syndrome vector.
    pub fn coset_id(&self, y: &[Fe]) -> Result<Vec<Fe>, AgError> {
        self.syndromes(y)
    }
}

/// Hamming weight.
pub fn weight(v: &[Fe]) -> usize {
    v.iter().filter(|x| !x.is_zero()).count()
}
