//! Riemann-Roch spaces, the differential `η = dx/f_y`, residues and the
//! decomposition used by the key equation.
//!
//! A space `L(A)` is stored as `{G/H}` for a fixed denominator `H` (a product
//! of lines meeting the curve only in rational points, with divisor
//! `E_H ≥ A⁺`) and numerators `G` of degree `deg H` taken modulo the curve
//! polynomial. Smooth plane curves are projectively normal, so every element
//! of `L(A)` has this shape, and spaces sharing `H` live in one coordinate
//! system.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::curve::{eval_form_series, CurveError, Divisor, LocalExpansion, PlaneCurve};
use crate::gf::{Fe, Field};
use crate::linalg::{LinalgError, Matrix, RowSolver, Subspace};
use crate::poly::{parse_form, Form, PolyError};
use crate::series::{Laurent, Series};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FuncError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("divisor refers to point #{0}, which is not a rational point of the curve")]
    UnsupportedDivisor(usize),
    #[error("no line through point #{0} meets the curve only in rational points")]
    NonRationalIntersection(usize),
    #[error("denominator divisor does not dominate the positive part")]
    DenominatorTooSmall,
    #[error("denominator vanishes identically on the curve")]
    PoleOrderUnbounded,
    #[error("numerator and denominator degrees differ ({0} vs {1})")]
    DegreeMismatch(usize, usize),
    #[error("element is not in the target space")]
    NotInSpace,
    #[error("divisor out of range: {0}")]
    BadDivisorRange(String),
    #[error("support of {0} meets D")]
    SupportOverlap(String),
    #[error("the two summands of the decomposition intersect")]
    DegenerateDecomposition,
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// A product of lines together with its intersection divisor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Denominator {
    pub form: Form,
    pub divisor: Divisor,
}

impl Denominator {
    pub fn one(field: &Field) -> Denominator {
        Denominator {
            form: Form::constant(field, Fe::ONE),
            divisor: Divisor::zero(),
        }
    }

    pub fn degree(&self) -> usize {
        self.form.degree()
    }

    pub fn product(&self, other: &Denominator) -> Denominator {
        Denominator {
            form: self.form.mul(&other.form),
            divisor: self.divisor.add(&other.divisor),
        }
    }
}

/// Greedy product of split lines whose divisor dominates `need`.
pub fn choose_denominator(curve: &PlaneCurve, need: &Divisor) -> Result<Denominator, FuncError> {
    let mut rem = need.positive_part();
    let mut den = Denominator::one(curve.field());
    let lines = curve.split_lines();
    while !rem.is_zero() {
        let mut best: Option<(i64, usize)> = None;
        for (i, (_, div)) in lines.iter().enumerate() {
            let cover: i64 = rem.terms().map(|(p, c)| c.min(div.coeff(p))).sum();
            if cover > 0 && best.is_none_or(|(b, _)| cover > b) {
                best = Some((cover, i));
            }
        }
        let Some((_, i)) = best else {
            return Err(FuncError::NonRationalIntersection(rem.support()[0]));
        };
        let (form, div) = &lines[i];
        den.form = den.form.mul(form);
        den.divisor = den.divisor.add(div);
        rem = rem.sub(div).positive_part();
    }
    Ok(den)
}

fn check_support(curve: &PlaneCurve, a: &Divisor) -> Result<(), FuncError> {
    match a.support().into_iter().find(|&p| p >= curve.points().len()) {
        Some(p) => Err(FuncError::UnsupportedDivisor(p)),
        None => Ok(()),
    }
}

/// A rational function `num/den` with forms of equal degree.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalFunction {
    pub num: Form,
    pub den: Form,
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl RationalFunction {
    pub fn new(num: Form, den: Form) -> Result<RationalFunction, FuncError> {
        if num.degree() != den.degree() {
            return Err(FuncError::DegreeMismatch(num.degree(), den.degree()));
        }
        Ok(RationalFunction { num, den })
    }

    pub fn constant(field: &Field, c: Fe) -> RationalFunction {
        RationalFunction {
            num: Form::constant(field, c),
            den: Form::constant(field, Fe::ONE),
        }
    }

    /// Parses a numerator and a denominator form.
    pub fn parse(field: &Field, num: &str, den: &str) -> Result<RationalFunction, FuncError> {
        RationalFunction::new(parse_form(field, num)?, parse_form(field, den)?)
    }

    pub fn render(&self) -> String {
        if self.den.degree() == 0 {
            let c = self.den.coeffs()[0];
            if c == Fe::ONE {
                return self.num.render();
            }
        }
        format!("({})/({})", self.num.render(), self.den.render())
    }

    pub fn mul(&self, other: &RationalFunction) -> RationalFunction {
        RationalFunction {
            num: self.num.mul(&other.num),
            den: self.den.mul(&other.den),
        }
    }

    pub fn add(&self, other: &RationalFunction) -> RationalFunction {
        RationalFunction {
            num: self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            den: self.den.mul(&other.den),
        }
    }

    pub fn scale(&self, c: Fe) -> RationalFunction {
        RationalFunction {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    /// Equality as functions on the curve.
    pub fn equals(&self, curve: &PlaneCurve, other: &RationalFunction) -> bool {
        let diff = self.num.mul(&other.den).sub(&other.num.mul(&self.den));
        curve.normal_form(&diff).is_zero()
    }

    pub fn is_zero(&self, curve: &PlaneCurve) -> bool {
        curve.normal_form(&self.num).is_zero()
    }

    /// Laurent expansion at `p` with at least `terms` known coefficients from
    /// the leading pole order on.
    pub fn laurent(&self, curve: &PlaneCurve, p: usize, terms: usize) -> Result<Laurent, FuncError> {
        let k = QuotientKernel::new(curve, &self.den, p, terms as i64 - 1, false)?;
        let v = k.v;
        let prec = terms + v;
        let s = curve.form_series(&self.num, p, prec)?;
        let w = &k.w;
        let coeffs = (0..terms)
            .map(|i| {
                (0..=i).fold(Fe::ZERO, |acc, j| {
                    curve.field().add(acc, curve.field().mul(s.coeffs[j], w.coeffs[i - j]))
                })
            })
            .collect();
        Ok(Laurent {
            val: -(v as i64),
            coeffs,
        })
    }

    /// Order at `p`; `None` for the zero function.
    pub fn valuation(&self, curve: &PlaneCurve, p: usize) -> Result<Option<i64>, FuncError> {
        let vn = curve.form_valuation(&self.num, p)?;
        let vd = curve.form_valuation(&self.den, p)?.ok_or(FuncError::PoleOrderUnbounded)?;
        Ok(vn.map(|n| n as i64 - vd as i64))
    }

    /// Value at `p`, or `None` at a pole.
    pub fn value(&self, curve: &PlaneCurve, p: usize) -> Result<Option<Fe>, FuncError> {
        match self.valuation(curve, p)? {
            None => Ok(Some(Fe::ZERO)),
            Some(v) if v < 0 => Ok(None),
            Some(_) => Ok(Some(self.coeff_at(curve, p, 0)?)),
        }
    }

    /// Coefficient of `t^k` of the expansion at `p`.
    pub fn coeff_at(&self, curve: &PlaneCurve, p: usize, k: i64) -> Result<Fe, FuncError> {
        let q = QuotientKernel::new(curve, &self.den, p, k, false)?;
        q.apply(curve, &self.num, p)
    }

    /// Residue of `self · η` at `p`.
    pub fn residue(&self, curve: &PlaneCurve, p: usize) -> Result<Fe, FuncError> {
        let q = QuotientKernel::new(curve, &self.den, p, -1, true)?;
        q.apply(curve, &self.num, p)
    }

    /// Order of `self · η` at `p`; `None` for the zero function.
    pub fn differential_valuation(&self, curve: &PlaneCurve, p: usize) -> Result<Option<i64>, FuncError> {
        let Some(v) = self.valuation(curve, p)? else {
            return Ok(None);
        };
        Ok(Some(v + eta_valuation(curve, p)?))
    }
}

/// Numerator and denominator series of `η/dt = (X'Z − XZ') Z^(d−3) / F_Y`.
fn eta_parts(curve: &PlaneCurve, exp: &LocalExpansion, n: usize) -> (Series, Series) {
    let f = curve.field();
    let x = exp.xyz[0].truncate(n);
    let z = exp.xyz[2].truncate(n);
    let dx = exp.dxyz[0].truncate(n);
    let dz = exp.dxyz[2].truncate(n);
    let mut num = dx.mul(f, &z).sub(f, &x.mul(f, &dz));
    let mut den = eval_form_series(f, curve.partial(1), exp, n);
    let d = curve.degree();
    if d >= 3 {
        num = num.mul(f, &z.pow(f, d - 3));
    } else {
        den = den.mul(f, &z.pow(f, 3 - d));
    }
    (num, den)
}

/// Order of `η` at a rational point.
pub fn eta_valuation(curve: &PlaneCurve, p: usize) -> Result<i64, FuncError> {
    let mut n = 8;
    loop {
        let exp = curve.local_expansion(p, n + 1)?;
        let (num, den) = eta_parts(curve, &exp, n);
        if let (Some(a), Some(b)) = (num.valuation(), den.valuation()) {
            return Ok(a as i64 - b as i64);
        }
        if n > 4 * curve.degree() * curve.degree() + 8 {
            return Err(FuncError::PoleOrderUnbounded);
        }
        n *= 2;
    }
}

/// Precomputed series `w` with `coeff_k(G/den · ω) = Σ_{i ≤ idx} G_i w_{idx−i}`
/// where `ω = 1` or `η/dt`.
struct QuotientKernel {
    v: usize,
    /// `k + v`, or `None` when the requested coefficient is below the pole order.
    idx: Option<usize>,
    w: Series,
}

impl QuotientKernel {
    fn new(curve: &PlaneCurve, den: &Form, p: usize, k: i64, eta: bool) -> Result<QuotientKernel, FuncError> {
        let f = curve.field();
        let bound = (den.degree() + 2) * curve.degree() + 2;
        let mut n = 8usize;
        loop {
            let exp = curve.local_expansion(p, n + 1)?;
            let mut dser = eval_form_series(f, den, &exp, n);
            let mut nser = Series::constant(Fe::ONE, n);
            if eta {
                let (en, ed) = eta_parts(curve, &exp, n);
                dser = dser.mul(f, &ed);
                nser = en;
            }
            let Some(v) = dser.valuation() else {
                if n > bound {
                    return Err(FuncError::PoleOrderUnbounded);
                }
                n *= 2;
                continue;
            };
            let idx = k + v as i64;
            if idx < 0 {
                return Ok(QuotientKernel {
                    v,
                    idx: None,
                    w: Series::zero(0),
                });
            }
            let idx = idx as usize;
            let need = idx + v + 1;
            if n < need {
                n = need;
                continue;
            }
            let unit = dser.shift_down(v);
            let inv = unit.inv(f).ok_or(FuncError::PoleOrderUnbounded)?;
            let w = inv.mul(f, &nser.truncate(n - v)).truncate(idx + 1);
            return Ok(QuotientKernel { v, idx: Some(idx), w });
        }
    }

    fn apply(&self, curve: &PlaneCurve, num: &Form, p: usize) -> Result<Fe, FuncError> {
        let Some(idx) = self.idx else {
            return Ok(Fe::ZERO);
        };
        let f = curve.field();
        let s = curve.form_series(num, p, idx + 1)?;
        Ok((0..=idx).fold(Fe::ZERO, |acc, i| f.add(acc, f.mul(s.coeffs[i], self.w.coeffs[idx - i]))))
    }

    /// The functional on standard-monomial coordinates of degree `m`.
    fn row(&self, curve: &PlaneCurve, m: usize, p: usize) -> Result<Vec<Fe>, FuncError> {
        let std = curve.standard_monomials(m);
        let Some(idx) = self.idx else {
            return Ok(vec![Fe::ZERO; std.len()]);
        };
        let f = curve.field();
        let monos = curve.monomial_series(m, p, idx + 1)?;
        Ok(std
            .iter()
            .map(|&mi| {
                let s = &monos[mi];
                (0..=idx).fold(Fe::ZERO, |acc, i| f.add(acc, f.mul(s.coeffs[i], self.w.coeffs[idx - i])))
            })
            .collect())
    }
}

/// A Riemann-Roch space `L(A)` as numerators over a fixed denominator.
#[derive(Clone)]
pub struct FunctionSpace {
    curve: Arc<PlaneCurve>,
    divisor: Divisor,
    den: Arc<Denominator>,
    space: Subspace,
}

impl fmt::Debug for FunctionSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L({:?}) dim {} over denominator of degree {}", self.divisor, self.dim(), self.den.degree())
    }
}

/// `L(A)` with a denominator chosen for `A⁺`.
pub fn rr_space(curve: &Arc<PlaneCurve>, a: &Divisor) -> Result<FunctionSpace, FuncError> {
    check_support(curve, a)?;
    let den = choose_denominator(curve, &a.positive_part())?;
    rr_space_with_denominator(curve, a, Arc::new(den))
}

/// `L(A)` over the given denominator, which must satisfy `E_H ≥ A⁺`.
pub fn rr_space_with_denominator(
    curve: &Arc<PlaneCurve>,
    a: &Divisor,
    den: Arc<Denominator>,
) -> Result<FunctionSpace, FuncError> {
    check_support(curve, a)?;
    let cond = den.divisor.sub(a);
    if !cond.is_effective() {
        return Err(FuncError::DenominatorTooSmall);
    }
    let f = curve.field();
    let m = den.degree();
    let std = curve.standard_monomials(m);
    let mut cols: Vec<Vec<Fe>> = Vec::new();
    for (p, c) in cond.terms() {
        let c = c as usize;
        let monos = curve.monomial_series(m, p, c)?;
        for k in 0..c {
            cols.push(std.iter().map(|&mi| monos[mi].coeffs[k]).collect());
        }
    }
    let space = if cols.is_empty() {
        Subspace::full(f, std.len())
    } else {
        // Rows of `cols` are conditions; numerators form its kernel.
        Matrix::from_rows(f, std.len(), &cols).kernel()
    };
    Ok(FunctionSpace {
        curve: curve.clone(),
        divisor: a.clone(),
        den,
        space,
    })
}

impl FunctionSpace {
    pub fn curve(&self) -> &Arc<PlaneCurve> {
        &self.curve
    }

    pub fn divisor(&self) -> &Divisor {
        &self.divisor
    }

    pub fn denominator(&self) -> &Arc<Denominator> {
        &self.den
    }

    /// Degree of the numerator forms.
    pub fn degree(&self) -> usize {
        self.den.degree()
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Dimension of the numerator coordinate space.
    pub fn ambient(&self) -> usize {
        self.space.ambient()
    }

    pub fn subspace(&self) -> &Subspace {
        &self.space
    }

    pub fn basis_vec(&self, i: usize) -> Vec<Fe> {
        self.space.basis_vec(i)
    }

    pub fn basis_matrix(&self) -> &Matrix {
        self.space.basis()
    }

    pub fn shares_denominator(&self, other: &FunctionSpace) -> bool {
        Arc::ptr_eq(&self.den, &other.den) || self.den.form == other.den.form
    }

    pub fn contains(&self, v: &[Fe]) -> bool {
        self.space.contains(v)
    }

    /// `self ⊆ other`, requiring a shared denominator.
    pub fn is_subspace_of(&self, other: &FunctionSpace) -> Result<bool, FuncError> {
        if !self.shares_denominator(other) {
            return Err(FuncError::Invariant("spaces do not share a denominator".into()));
        }
        Ok(other.space.contains_space(&self.space))
    }

    /// Numerator form of an ambient coordinate vector.
    pub fn numerator(&self, v: &[Fe]) -> Form {
        self.curve.form_from_coords(self.degree(), v)
    }

    pub fn function(&self, v: &[Fe]) -> RationalFunction {
        RationalFunction {
            num: self.numerator(v),
            den: self.den.form.clone(),
        }
    }

    pub fn basis_functions(&self) -> Vec<RationalFunction> {
        (0..self.dim()).map(|i| self.function(&self.basis_vec(i))).collect()
    }

    /// Ambient coordinates of a function, or `NotInSpace`. Solves
    /// `Σ x_b B_b · D ≡ N · H` modulo the curve for `h = N/D`.
    pub fn coords_of(&self, h: &RationalFunction) -> Result<Vec<Fe>, FuncError> {
        let target = h.num.mul(&self.den.form);
        let rows: Vec<Vec<Fe>> = (0..self.dim())
            .map(|b| self.curve.nf_coords(&self.numerator(&self.basis_vec(b)).mul(&h.den)))
            .collect();
        let tv = self.curve.nf_coords(&target);
        if rows.is_empty() {
            return if tv.iter().all(|x| x.is_zero()) {
                Ok(vec![Fe::ZERO; self.ambient()])
            } else {
                Err(FuncError::NotInSpace)
            };
        }
        let mat = Matrix::from_rows(self.curve.field(), tv.len(), &rows);
        let solver = RowSolver::new(&mat).map_err(|_| FuncError::Invariant("basis products dependent".into()))?;
        let x = solver.solve(&tv).ok_or(FuncError::NotInSpace)?;
        Ok(self.space.combine(&x))
    }

    /// Columns are the functionals `v ↦ coeff_k((v/H)·ω)` at each point, over
    /// ambient coordinates (`ω = η/dt` when `eta`).
    pub fn functional_matrix(&self, points: &[usize], k: i64, eta: bool) -> Result<Matrix, FuncError> {
        let f = self.curve.field();
        let mut cols = Vec::with_capacity(points.len());
        for &p in points {
            let q = QuotientKernel::new(&self.curve, &self.den.form, p, k, eta)?;
            cols.push(q.row(&self.curve, self.degree(), p)?);
        }
        Ok(Matrix::from_rows(f, self.ambient(), &cols).transpose())
    }

    /// Values of ambient vectors at the points (`ambient × points`).
    pub fn eval_matrix(&self, points: &[usize]) -> Result<Matrix, FuncError> {
        self.functional_matrix(points, 0, false)
    }

    /// Residues of `v/H · η` at the points (`ambient × points`).
    pub fn residue_matrix(&self, points: &[usize]) -> Result<Matrix, FuncError> {
        self.functional_matrix(points, -1, true)
    }
}

/// Product of numerators reduced into the coordinates of `target`, whose
/// denominator must be the product of the factors' denominators.
pub fn multiply_into(
    a: &FunctionSpace,
    va: &[Fe],
    b: &FunctionSpace,
    vb: &[Fe],
    target: &FunctionSpace,
) -> Result<Vec<Fe>, FuncError> {
    if a.den.form.mul(&b.den.form) != target.den.form {
        return Err(FuncError::Invariant("target denominator is not the product".into()));
    }
    let prod = a.numerator(va).mul(&b.numerator(vb));
    let v = target.curve.nf_coords(&prod);
    if !target.contains(&v) {
        return Err(FuncError::NotInSpace);
    }
    Ok(v)
}

/// The fixed differential `η = dx/f_y`, the divisors around it, and the
/// space `U` through which received words become functions `h_y`.
pub struct DifferentialContext {
    curve: Arc<PlaneCurve>,
    d_points: Vec<usize>,
    g: Divisor,
    g_star: Divisor,
    k: Divisor,
    /// `L(K + D − G*)`.
    v_space: FunctionSpace,
    /// Basis indices of `v_space` spanning `U`.
    u_indices: Vec<usize>,
    /// Row `j` is the numerator of `h_{e_j}`.
    h_unit: Matrix,
}

impl fmt::Debug for DifferentialContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DifferentialContext(n={}, K={:?}, G*={:?})", self.d_points.len(), self.k, self.g_star)
    }
}

impl DifferentialContext {
    /// `g_star` defaults to `−P_∞`.
    pub fn new(
        curve: &Arc<PlaneCurve>,
        d_points: &[usize],
        g: &Divisor,
        g_star: Option<&Divisor>,
        p_inf: usize,
    ) -> Result<DifferentialContext, FuncError> {
        let n = d_points.len();
        let genus = curve.genus() as i64;
        let dset = Divisor::sum_of(d_points);
        check_support(curve, &dset)?;
        check_support(curve, g)?;
        if dset.max_coeff() > 1 {
            return Err(FuncError::BadDivisorRange("D has repeated points".into()));
        }
        if g.support().iter().any(|p| dset.coeff(*p) != 0) {
            return Err(FuncError::SupportOverlap("G".into()));
        }
        if !(2 * genus - 2 < g.degree() && g.degree() < n as i64 + genus) {
            return Err(FuncError::BadDivisorRange(format!(
                "need 2g-2 < deg G < n+g, got deg G = {}",
                g.degree()
            )));
        }
        let g_star = g_star.cloned().unwrap_or_else(|| Divisor::single(p_inf, -1));
        if g_star.support().iter().any(|p| dset.coeff(*p) != 0) {
            return Err(FuncError::SupportOverlap("G*".into()));
        }
        if !g_star.le(g) {
            return Err(FuncError::BadDivisorRange("G* must satisfy G* <= G".into()));
        }
        if rr_space(curve, &g_star)?.dim() != 0 {
            return Err(FuncError::BadDivisorRange("l(G*) must be 0".into()));
        }
        let k = curve.z_line_divisor()?.scale(curve.degree() as i64 - 3);
        if k.degree() != 2 * genus - 2 {
            return Err(FuncError::Invariant(format!("deg K = {} != 2g-2", k.degree())));
        }
        let v_space = rr_space(curve, &k.add(&dset).sub(&g_star))?;
        let res = v_space.residue_matrix(d_points)?;
        // residue vectors of the basis, one row per basis element
        let r = v_space.basis_matrix().matmul(&res, Default::default())?;
        let (_, pivots) = r.transpose().rref();
        if pivots.len() != n {
            return Err(FuncError::Invariant(format!(
                "residue map has rank {} on L(K+D-G*), expected {}",
                pivots.len(),
                n
            )));
        }
        let r_u = r.select_rows(&pivots);
        let solver = RowSolver::new(&r_u)?;
        let basis_u = v_space.basis_matrix().select_rows(&pivots);
        let f = curve.field();
        let mut rows = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = vec![Fe::ZERO; n];
            e[j] = Fe::ONE;
            let x = solver.solve(&e).ok_or_else(|| FuncError::Invariant("U residues singular".into()))?;
            rows.push(basis_u.vec_mul(&x)?);
        }
        let h_unit = Matrix::from_rows(f, v_space.ambient(), &rows);
        Ok(DifferentialContext {
            curve: curve.clone(),
            d_points: d_points.to_vec(),
            g: g.clone(),
            g_star,
            k,
            v_space,
            u_indices: pivots,
            h_unit,
        })
    }

    pub fn curve(&self) -> &Arc<PlaneCurve> {
        &self.curve
    }

    pub fn d_points(&self) -> &[usize] {
        &self.d_points
    }

    pub fn n(&self) -> usize {
        self.d_points.len()
    }

    pub fn g(&self) -> &Divisor {
        &self.g
    }

    pub fn g_star(&self) -> &Divisor {
        &self.g_star
    }

    pub fn canonical(&self) -> &Divisor {
        &self.k
    }

    pub fn d_divisor(&self) -> Divisor {
        Divisor::sum_of(&self.d_points)
    }

    /// `L(K + D − G*)`, the space containing every `h_y`.
    pub fn h_space(&self) -> &FunctionSpace {
        &self.v_space
    }

    pub fn u_indices(&self) -> &[usize] {
        &self.u_indices
    }

    /// Numerators of `h_{e_j}` as rows.
    pub fn h_unit(&self) -> &Matrix {
        &self.h_unit
    }

    /// Ambient coordinates (in [`Self::h_space`]) of `h_y`.
    pub fn h_coords(&self, y: &[Fe]) -> Result<Vec<Fe>, FuncError> {
        Ok(self.h_unit.vec_mul(y)?)
    }

    pub fn h_from_word(&self, y: &[Fe]) -> Result<RationalFunction, FuncError> {
        Ok(self.v_space.function(&self.h_coords(y)?))
    }

    /// `res_D(fn · η)`.
    pub fn residues(&self, func: &RationalFunction) -> Result<Vec<Fe>, FuncError> {
        self.d_points.iter().map(|&p| func.residue(&self.curve, p)).collect()
    }

    /// Residue of `num/den · η` at every point of `D`.
    pub fn residues_of(&self, num: &Form, den: &Form) -> Result<Vec<Fe>, FuncError> {
        self.d_points
            .iter()
            .map(|&p| {
                let q = QuotientKernel::new(&self.curve, den, p, -1, true)?;
                q.apply(&self.curve, num, p)
            })
            .collect()
    }

    /// `L(K+F+D−G*) = L(K+F+D−G_c) ⊕ L(K+F−G*) ⊕ W` over the denominator
    /// `H_F · H_U`, where `lf = L(F)`.
    pub fn decompose_with_w(&self, lf: &FunctionSpace, g_code: &Divisor) -> Result<SpaceDecomposition, FuncError> {
        let genus = self.curve.genus() as i64;
        let fdiv = lf.divisor();
        if g_code.sub(fdiv).degree() <= 2 * genus - 2 {
            return Err(FuncError::BadDivisorRange(format!(
                "need deg(G - F) > 2g-2, got {}",
                g_code.sub(fdiv).degree()
            )));
        }
        let den = Arc::new(lf.den.product(&self.v_space.den));
        let kfd = self.k.add(fdiv).add(&self.d_divisor());
        let big = rr_space_with_denominator(&self.curve, &kfd.sub(&self.g_star), den.clone())?;
        let a = rr_space_with_denominator(&self.curve, &kfd.sub(g_code), den.clone())?;
        let b = rr_space_with_denominator(&self.curve, &self.k.add(fdiv).sub(&self.g_star), den)?;
        if !a.space.intersect(&b.space)?.is_zero() {
            return Err(FuncError::DegenerateDecomposition);
        }
        let ab = a.space.sum(&b.space)?;
        let w = ab.complement_in(&big.space)?;
        let stacked = a.basis_matrix().vstack(b.basis_matrix())?.vstack(w.basis())?;
        let solver = RowSolver::new(&stacked)?;
        Ok(SpaceDecomposition { big, a, b, w, solver })
    }
}

/// Coordinates for the direct sum `big = A ⊕ B ⊕ W`.
pub struct SpaceDecomposition {
    pub big: FunctionSpace,
    pub a: FunctionSpace,
    pub b: FunctionSpace,
    pub w: Subspace,
    solver: RowSolver,
}

impl SpaceDecomposition {
    /// Coefficients of `v` in the `A`, `B` and `W` bases.
    pub fn split(&self, v: &[Fe]) -> Result<(Vec<Fe>, Vec<Fe>, Vec<Fe>), FuncError> {
        let x = self.solver.solve(v).ok_or(FuncError::NotInSpace)?;
        let da = self.a.dim();
        let db = self.b.dim();
        Ok((x[..da].to_vec(), x[da..da + db].to_vec(), x[da + db..].to_vec()))
    }

    pub fn project_a(&self, v: &[Fe]) -> Result<Vec<Fe>, FuncError> {
        let (xa, _, _) = self.split(v)?;
        Ok(self.a.subspace().combine(&xa))
    }

    pub fn project_b(&self, v: &[Fe]) -> Result<Vec<Fe>, FuncError> {
        let (_, xb, _) = self.split(v)?;
        Ok(self.b.subspace().combine(&xb))
    }

    pub fn project_w(&self, v: &[Fe]) -> Result<Vec<Fe>, FuncError> {
        let (_, _, xw) = self.split(v)?;
        Ok(self.w.combine(&xw))
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.a.dim(), self.b.dim(), self.w.dim())
    }
}
