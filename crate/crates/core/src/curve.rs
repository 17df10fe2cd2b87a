//! Smooth projective plane curves over GF(q): rational points, divisors on
//! them, local power-series expansions, and the coordinate ring modulo the
//! defining form.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Fe, Field, GfError};
use crate::poly::{monomial_count, monomial_index, monomials, Form, UPoly};
use crate::series::Series;

/// Largest extension field searched for singular points.
pub const SMOOTHNESS_FIELD_LIMIT: u64 = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("curve degree {0} is too small (need at least 2)")]
    BadDegree(usize),
    #[error("curve is singular at {0}")]
    SingularCurve(String),
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("curve is not supported: {0}")]
    Unsupported(String),
    #[error("the line Z = 0 meets the curve outside the rational points")]
    NonRationalIntersection,
    #[error("precision must be at least 1")]
    PrecisionTooSmall,
    #[error("point {0} is not on the curve")]
    NotOnCurve(String),
    #[error(transparent)]
    Field(#[from] GfError),
}

/// Which standard affine chart a point is interior to (the coordinate set to 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chart {
    Z,
    Y,
    X,
}

impl Chart {
    /// Homogeneous index of the coordinate fixed to 1.
    pub fn fixed(self) -> usize {
        match self {
            Chart::X => 0,
            Chart::Y => 1,
            Chart::Z => 2,
        }
    }

    /// Homogeneous indices of the two affine coordinates `(u, v)`.
    pub fn free(self) -> [usize; 2] {
        match self {
            Chart::Z => [0, 1],
            Chart::Y => [0, 2],
            Chart::X => [1, 2],
        }
    }
}

/// Homogeneous coordinates normalized so the last nonzero coordinate is 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjectivePoint {
    pub coords: [Fe; 3],
}

impl ProjectivePoint {
    /// Normalizes; `None` for the all-zero triple.
    pub fn new(f: &Field, x: Fe, y: Fe, z: Fe) -> Option<ProjectivePoint> {
        let c = [x, y, z];
        let last = (0..3).rev().find(|&i| !c[i].is_zero())?;
        let inv = f.inv(c[last]).ok()?;
        Some(ProjectivePoint {
            coords: [f.mul(x, inv), f.mul(y, inv), f.mul(z, inv)],
        })
    }

    pub fn chart(&self) -> Chart {
        if !self.coords[2].is_zero() {
            Chart::Z
        } else if !self.coords[1].is_zero() {
            Chart::Y
        } else {
            Chart::X
        }
    }

    pub fn is_affine(&self) -> bool {
        self.chart() == Chart::Z
    }

    /// `"(x:y:z)"` with entries as powers of `α` or 0.
    pub fn render(&self, f: &Field) -> String {
        let part = |c: Fe| if c == Fe::ONE { "1".to_string() } else { f.format(c) };
        format!(
            "({}:{}:{})",
            part(self.coords[0]),
            part(self.coords[1]),
            part(self.coords[2])
        )
    }

    pub fn parse(f: &Field, s: &str) -> Result<ProjectivePoint, GfError> {
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| GfError::Parse(s.to_string()))?;
        let parts: Vec<&str> = inner.split(':').collect();
        if parts.len() != 3 {
            return Err(GfError::Parse(s.to_string()));
        }
        let x = f.parse(parts[0])?;
        let y = f.parse(parts[1])?;
        let z = f.parse(parts[2])?;
        ProjectivePoint::new(f, x, y, z).ok_or_else(|| GfError::Parse(s.to_string()))
    }
}

/// A divisor supported on rational points, keyed by index into
/// [`PlaneCurve::points`].
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Divisor {
    terms: BTreeMap<usize, i64>,
}

impl fmt::Debug for Divisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms.iter().map(|(p, c)| format!("{c}·P{p}")).collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl Divisor {
    pub fn zero() -> Divisor {
        Divisor::default()
    }

    pub fn point(p: usize) -> Divisor {
        Divisor::single(p, 1)
    }

    pub fn single(p: usize, c: i64) -> Divisor {
        let mut d = Divisor::zero();
        d.add_at(p, c);
        d
    }

    pub fn from_terms<I: IntoIterator<Item = (usize, i64)>>(it: I) -> Divisor {
        let mut d = Divisor::zero();
        for (p, c) in it {
            d.add_at(p, c);
        }
        d
    }

    /// Sum of the given points, each with coefficient 1.
    pub fn sum_of(points: &[usize]) -> Divisor {
        Divisor::from_terms(points.iter().map(|&p| (p, 1)))
    }

    pub fn add_at(&mut self, p: usize, c: i64) {
        let e = self.terms.entry(p).or_insert(0);
        *e += c;
        if *e == 0 {
            self.terms.remove(&p);
        }
    }

    pub fn coeff(&self, p: usize) -> i64 {
        self.terms.get(&p).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> i64 {
        self.terms.values().sum()
    }

    pub fn support(&self) -> Vec<usize> {
        self.terms.keys().copied().collect()
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, i64)> + '_ {
        self.terms.iter().map(|(&p, &c)| (p, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Divisor) -> Divisor {
        let mut d = self.clone();
        for (p, c) in other.terms() {
            d.add_at(p, c);
        }
        d
    }

    pub fn sub(&self, other: &Divisor) -> Divisor {
        self.add(&other.scale(-1))
    }

    pub fn scale(&self, k: i64) -> Divisor {
        Divisor::from_terms(self.terms().map(|(p, c)| (p, c * k)))
    }

    pub fn positive_part(&self) -> Divisor {
        Divisor::from_terms(self.terms().filter(|&(_, c)| c > 0))
    }

    pub fn negative_part(&self) -> Divisor {
        Divisor::from_terms(self.terms().filter(|&(_, c)| c < 0).map(|(p, c)| (p, -c)))
    }

    pub fn is_effective(&self) -> bool {
        self.terms.values().all(|&c| c >= 0)
    }

    /// `self ≤ other` coefficientwise.
    pub fn le(&self, other: &Divisor) -> bool {
        other.sub(self).is_effective()
    }

    pub fn max_coeff(&self) -> i64 {
        self.terms.values().copied().max().unwrap_or(0).max(0)
    }

    pub fn render(&self, curve: &PlaneCurve) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .terms()
            .map(|(p, c)| format!("{}{}", if c == 1 { String::new() } else { format!("{c}*") }, curve.point(p).render(curve.field())))
            .collect();
        parts.join(" + ")
    }
}

/// An affine chart equation `f(u, v) = F` with the chart coordinate set to 1,
/// as a list of `(coeff, deg_u, deg_v)`.
#[derive(Clone, Debug)]
struct ChartPoly {
    terms: Vec<(Fe, usize, usize)>,
}

impl ChartPoly {
    fn from_form(form: &Form, chart: Chart) -> ChartPoly {
        let [a, b] = chart.free();
        let terms = form
            .terms()
            .map(|(c, i, j, k)| {
                let e = [i, j, k];
                (c, e[a], e[b])
            })
            .collect();
        ChartPoly { terms }
    }

    fn eval(&self, f: &Field, u: Fe, v: Fe) -> Fe {
        self.terms.iter().fold(Fe::ZERO, |acc, &(c, i, j)| {
            f.add(acc, f.mul(c, f.mul(f.pow(u, i as u64), f.pow(v, j as u64))))
        })
    }

    fn partial(&self, f: &Field, var: usize) -> ChartPoly {
        let terms = self
            .terms
            .iter()
            .filter_map(|&(c, i, j)| {
                let e = if var == 0 { i } else { j };
                if e == 0 {
                    return None;
                }
                let c2 = f.mul(c, f.from_int(e as i64));
                if c2.is_zero() {
                    return None;
                }
                Some(if var == 0 { (c2, i - 1, j) } else { (c2, i, j - 1) })
            })
            .collect();
        ChartPoly { terms }
    }

    fn eval_series(&self, f: &Field, u: &Series, v: &Series) -> Series {
        let prec = u.prec().min(v.prec());
        let max_i = self.terms.iter().map(|t| t.1).max().unwrap_or(0);
        let max_j = self.terms.iter().map(|t| t.2).max().unwrap_or(0);
        let upow = powers(f, u, max_i, prec);
        let vpow = powers(f, v, max_j, prec);
        let mut acc = Series::zero(prec);
        for &(c, i, j) in &self.terms {
            let term = upow[i].mul(f, &vpow[j]);
            acc.add_scaled(f, c, &term);
        }
        acc
    }
}

fn powers(f: &Field, s: &Series, max: usize, prec: usize) -> Vec<Series> {
    let mut out = Vec::with_capacity(max + 1);
    out.push(Series::constant(Fe::ONE, prec));
    for k in 1..=max {
        let next = out[k - 1].mul(f, &s.truncate(prec));
        out.push(next);
    }
    out
}

/// Local expansion of the curve at a rational point.
#[derive(Clone, Debug)]
pub struct LocalExpansion {
    pub point: usize,
    pub chart: Chart,
    /// 0 if the chart's first affine coordinate `u` is the parameter, 1 for `v`.
    pub param: usize,
    /// Homogeneous coordinates `X(t), Y(t), Z(t)` with the chart coordinate ≡ 1.
    pub xyz: [Series; 3],
    /// `d/dt` of `xyz`, one coefficient shorter.
    pub dxyz: [Series; 3],
}

impl LocalExpansion {
    pub fn prec(&self) -> usize {
        self.xyz[0].prec()
    }
}

/// Normal forms of homogeneous forms modulo the curve polynomial, using the
/// lex order `X > Y > Z` (a single polynomial is its own Gröbner basis).
#[derive(Debug)]
struct Reducer {
    curve: Form,
    lead: (usize, usize, usize),
    lead_inv: Fe,
    standard: Mutex<HashMap<usize, Arc<Vec<usize>>>>,
}

pub struct PlaneCurve {
    field: Field,
    poly: Form,
    deg: usize,
    genus: usize,
    points: Vec<ProjectivePoint>,
    index: HashMap<ProjectivePoint, usize>,
    charts: [ChartPoly; 3],
    partials: [Form; 3],
    reducer: Reducer,
    z_line: Option<Divisor>,
    expansions: Mutex<HashMap<usize, Arc<LocalExpansion>>>,
    split_lines: OnceLock<Vec<(Form, Divisor)>>,
}

impl fmt::Debug for PlaneCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PlaneCurve({} over {:?}, g={}, {} points)", self.poly.render(), self.field, self.genus, self.points.len())
    }
}

impl PlaneCurve {
    /// Builds the curve `F = 0`, enumerates its rational points and verifies
    /// smoothness at all points whose x-coordinate lies in an extension of
    /// size at most [`SMOOTHNESS_FIELD_LIMIT`] and at all points on `Z = 0`.
    pub fn new(field: &Field, poly: Form) -> Result<PlaneCurve, CurveError> {
        field.check_same(poly.field())?;
        let deg = poly.degree();
        if deg < 2 {
            return Err(CurveError::BadDegree(deg));
        }
        let charts = [
            ChartPoly::from_form(&poly, Chart::Z),
            ChartPoly::from_form(&poly, Chart::Y),
            ChartPoly::from_form(&poly, Chart::X),
        ];
        let (lc, a, b, c) = poly.leading().ok_or_else(|| CurveError::Unsupported("zero polynomial".into()))?;
        let reducer = Reducer {
            curve: poly.clone(),
            lead: (a, b, c),
            lead_inv: field.inv(lc)?,
            standard: Mutex::new(HashMap::new()),
        };
        let partials = [poly.partial(0), poly.partial(1), poly.partial(2)];
        let points = enumerate_points(field, &poly);
        let index = points.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let mut curve = PlaneCurve {
            field: field.clone(),
            poly,
            deg,
            genus: (deg - 1) * (deg - 2) / 2,
            points,
            index,
            charts,
            partials,
            reducer,
            z_line: None,
            expansions: Mutex::new(HashMap::new()),
            split_lines: OnceLock::new(),
        };
        curve.check_smooth()?;
        if curve.partials[1].is_zero() {
            return Err(CurveError::Unsupported(
                "dF/dY vanishes identically, x = X/Z is not separating".into(),
            ));
        }
        curve.z_line = curve.compute_z_line();
        Ok(curve)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn poly(&self) -> &Form {
        &self.poly
    }

    pub fn degree(&self) -> usize {
        self.deg
    }

    /// `∂F/∂X`, `∂F/∂Y`, `∂F/∂Z`.
    pub fn partial(&self, var: usize) -> &Form {
        &self.partials[var]
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    /// All rational points: the chart `Z = 1` scanned with `x` outer and `y`
    /// inner in field-enumeration order, then `(x:1:0)`, then `(1:0:0)`.
    pub fn points(&self) -> &[ProjectivePoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> ProjectivePoint {
        self.points[i]
    }

    pub fn point_index(&self, p: &ProjectivePoint) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn affine_points(&self) -> Vec<usize> {
        (0..self.points.len()).filter(|&i| self.points[i].is_affine()).collect()
    }

    pub fn contains(&self, x: Fe, y: Fe, z: Fe) -> bool {
        self.poly.eval(x, y, z).is_zero()
    }

    fn check_smooth(&self) -> Result<(), CurveError> {
        let f = &self.field;
        for p in &self.points {
            let [x, y, z] = p.coords;
            if self.partials.iter().all(|d| d.eval(x, y, z).is_zero()) {
                return Err(CurveError::SingularCurve(p.render(f)));
            }
        }
        // Points at infinity over the algebraic closure: common roots of the
        // restrictions to Z = 0, in the chart Y = 1 and at (1:0:0).
        let restrict_y1 = |form: &Form| -> UPoly {
            let mut c = vec![Fe::ZERO; form.degree() + 1];
            for (v, i, _, k) in form.terms() {
                if k == 0 {
                    c[i] = f.add(c[i], v);
                }
            }
            UPoly::new(c)
        };
        let mut g = restrict_y1(&self.poly);
        for d in &self.partials {
            g = UPoly::gcd(f, &g, &restrict_y1(d));
        }
        if g.degree().is_some_and(|d| d > 0) {
            return Err(CurveError::SingularCurve(format!(
                "a point (x:1:0) with x a root of a degree-{} factor",
                g.degree().unwrap()
            )));
        }
        if self.poly.eval(Fe::ONE, Fe::ZERO, Fe::ZERO).is_zero()
            && self.partials.iter().all(|d| d.eval(Fe::ONE, Fe::ZERO, Fe::ZERO).is_zero())
        {
            return Err(CurveError::SingularCurve("(1:0:0)".into()));
        }
        // Affine points with x in GF(q^k).
        let q = f.q() as u64;
        let mut k = 1u32;
        while q.pow(k) <= SMOOTHNESS_FIELD_LIMIT {
            self.check_affine_over_extension(k)?;
            k += 1;
        }
        Ok(())
    }

    fn check_affine_over_extension(&self, k: u32) -> Result<(), CurveError> {
        let base = &self.field;
        let (big, embed) = if k == 1 {
            (base.clone(), None)
        } else {
            let spec = Field::find_modulus(base.p(), base.m() * k)?;
            let big = Field::new(spec)?;
            // A root of the base modulus in the big field gives the embedding.
            let modulus = base.spec().modulus.clone();
            let root = (0..big.q())
                .map(|r| big.from_raw(r).unwrap())
                .find(|&b| {
                    modulus
                        .iter()
                        .rev()
                        .fold(Fe::ZERO, |acc, &c| big.add(big.mul(acc, b), big.from_int(c as i64)))
                        .is_zero()
                })
                .ok_or_else(|| CurveError::Unsupported("no embedding of the base field".into()))?;
            (big, Some(root))
        };
        let map = |c: Fe| -> Fe {
            match embed {
                None => c,
                Some(beta) => {
                    let digits = base.coeffs(c);
                    digits.iter().rev().fold(Fe::ZERO, |acc, &d| {
                        big.add(big.mul(acc, beta), big.from_int(d as i64))
                    })
                }
            }
        };
        // For each polynomial, coefficient table by (x-degree, y-degree) in chart Z.
        let lift = |form: &Form| -> Vec<(Fe, usize, usize)> {
            form.terms().map(|(c, i, j, _)| (map(c), i, j)).collect()
        };
        let polys: Vec<Vec<(Fe, usize, usize)>> = std::iter::once(&self.poly)
            .chain(self.partials.iter())
            .map(lift)
            .collect();
        let max_i = self.deg;
        for xr in 0..big.q() {
            let x = big.from_raw(xr).unwrap();
            let mut xp = vec![Fe::ONE; max_i + 1];
            for e in 1..=max_i {
                xp[e] = big.mul(xp[e - 1], x);
            }
            let mut g: Option<UPoly> = None;
            for terms in &polys {
                let mut c = vec![Fe::ZERO; self.deg + 1];
                for &(v, i, j) in terms {
                    c[j] = big.add(c[j], big.mul(v, xp[i]));
                }
                let up = UPoly::new(c);
                g = Some(match g {
                    None => up,
                    Some(prev) => UPoly::gcd(&big, &prev, &up),
                });
                if g.as_ref().is_some_and(|g| g.degree() == Some(0)) {
                    break;
                }
            }
            let g = g.unwrap();
            if g.is_zero() || g.degree().is_some_and(|d| d > 0) {
                return Err(CurveError::SingularCurve(format!(
                    "an affine point with x = {} in GF({}^{})",
                    big.format(x),
                    base.q(),
                    k
                )));
            }
        }
        Ok(())
    }

    fn compute_z_line(&self) -> Option<Divisor> {
        let f = &self.field;
        // Restriction F(x, 1, 0) plus the degree drop at (1:0:0).
        let mut c = vec![Fe::ZERO; self.deg + 1];
        for (v, i, _, k) in self.poly.terms() {
            if k == 0 {
                c[i] = f.add(c[i], v);
            }
        }
        let r = UPoly::new(c);
        let mut div = Divisor::zero();
        let mut total = 0usize;
        for x in f.enumerate() {
            let m = r.root_multiplicity(f, x);
            if m > 0 {
                let p = ProjectivePoint::new(f, x, Fe::ONE, Fe::ZERO).unwrap();
                div.add_at(self.point_index(&p)?, m as i64);
                total += m;
            }
        }
        let drop = self.deg - r.degree()?;
        if drop > 0 {
            let p = ProjectivePoint::new(f, Fe::ONE, Fe::ZERO, Fe::ZERO).unwrap();
            div.add_at(self.point_index(&p)?, drop as i64);
            total += drop;
        }
        (total == self.deg).then_some(div)
    }

    /// Intersection divisor of the line `Z = 0` with the curve.
    pub fn z_line_divisor(&self) -> Result<Divisor, CurveError> {
        self.z_line.clone().ok_or(CurveError::NonRationalIntersection)
    }

    /// Local expansion at point `p` with at least `prec` coefficients.
    pub fn local_expansion(&self, p: usize, prec: usize) -> Result<Arc<LocalExpansion>, CurveError> {
        if prec < 1 {
            return Err(CurveError::PrecisionTooSmall);
        }
        if let Some(e) = self.expansions.lock().unwrap().get(&p) {
            if e.prec() >= prec {
                return Ok(e.clone());
            }
        }
        let prec = prec.max(8);
        let exp = Arc::new(self.expand(p, prec)?);
        let mut cache = self.expansions.lock().unwrap();
        let slot = cache.entry(p).or_insert_with(|| exp.clone());
        if slot.prec() < exp.prec() {
            *slot = exp.clone();
        }
        Ok(slot.clone())
    }

    fn expand(&self, p: usize, prec: usize) -> Result<LocalExpansion, CurveError> {
        let f = &self.field;
        let pt = self.points.get(p).ok_or_else(|| CurveError::NotOnCurve(format!("#{p}")))?;
        let chart = pt.chart();
        let cp = &self.charts[match chart {
            Chart::Z => 0,
            Chart::Y => 1,
            Chart::X => 2,
        }];
        let [ia, ib] = chart.free();
        let (u0, v0) = (pt.coords[ia], pt.coords[ib]);
        let fu = cp.partial(f, 0);
        let fv = cp.partial(f, 1);
        // Parameter u - u(P) when the implicit coordinate v is solvable.
        let param = if !fv.eval(f, u0, v0).is_zero() { 0 } else { 1 };
        let deriv = if param == 0 { &fv } else { &fu };
        let (p0, w0) = if param == 0 { (u0, v0) } else { (v0, u0) };
        // Newton lifting of the implicit coordinate, doubling precision.
        let mut w = Series::constant(w0, 1);
        let mut cur = 1usize;
        while cur < prec {
            let next = (2 * cur).min(prec);
            let t = Series::affine(p0, next);
            let mut wn = w.coeffs.clone();
            wn.resize(next, Fe::ZERO);
            let wn = Series { coeffs: wn };
            let (us, vs) = if param == 0 { (&t, &wn) } else { (&wn, &t) };
            let val = cp.eval_series(f, us, vs);
            let dval = deriv.eval_series(f, us, vs);
            let inv = dval.inv(f).ok_or_else(|| CurveError::SingularCurve(pt.render(f)))?;
            let corr = val.mul(f, &inv);
            w = wn.sub(f, &corr);
            cur = next;
        }
        let t = Series::affine(p0, prec);
        let (us, vs) = if param == 0 { (t, w) } else { (w, t) };
        debug_assert!(cp.eval_series(f, &us, &vs).valuation().is_none());
        let mut xyz = [Series::zero(prec), Series::zero(prec), Series::zero(prec)];
        xyz[chart.fixed()] = Series::constant(Fe::ONE, prec);
        xyz[ia] = us;
        xyz[ib] = vs;
        let dxyz = [xyz[0].derivative(f), xyz[1].derivative(f), xyz[2].derivative(f)];
        Ok(LocalExpansion {
            point: p,
            chart,
            param,
            xyz,
            dxyz,
        })
    }

    /// Taylor series of a form at point `p` in the chart of `p`.
    pub fn form_series(&self, form: &Form, p: usize, prec: usize) -> Result<Series, CurveError> {
        let exp = self.local_expansion(p, prec)?;
        Ok(eval_form_series(&self.field, form, &exp, prec))
    }

    /// Order of vanishing of a form at `p`; `None` if the form vanishes
    /// identically on the curve.
    pub fn form_valuation(&self, form: &Form, p: usize) -> Result<Option<usize>, CurveError> {
        let bound = form.degree() * self.deg + 1;
        let mut prec = 8usize.min(bound.max(1));
        loop {
            let s = self.form_series(form, p, prec)?;
            if let Some(v) = s.valuation() {
                return Ok(Some(v));
            }
            if prec >= bound {
                return Ok(None);
            }
            prec = (2 * prec).min(bound);
        }
    }

    /// Series of every monomial of degree `m` at `p` (in [`monomials`] order).
    pub fn monomial_series(&self, m: usize, p: usize, prec: usize) -> Result<Vec<Series>, CurveError> {
        let exp = self.local_expansion(p, prec)?;
        let f = &self.field;
        let [a, b] = exp.chart.free();
        let ua = exp.xyz[a].truncate(prec);
        let vb = exp.xyz[b].truncate(prec);
        let up = powers(f, &ua, m, prec);
        let vp = powers(f, &vb, m, prec);
        Ok(monomials(m)
            .into_iter()
            .map(|(i, j, k)| {
                let e = [i, j, k];
                up[e[a]].mul(f, &vp[e[b]])
            })
            .collect())
    }

    /// Divisor of the line `aX + bY + cZ` when all its intersections with the
    /// curve are rational, else `None`.
    pub fn line_divisor(&self, line: &Form) -> Result<Option<Divisor>, CurveError> {
        let mut div = Divisor::zero();
        for (i, p) in self.points.iter().enumerate() {
            let [x, y, z] = p.coords;
            if !line.eval(x, y, z).is_zero() {
                continue;
            }
            let v = self
                .form_valuation(line, i)?
                .ok_or_else(|| CurveError::Unsupported("curve contains a line".into()))?;
            div.add_at(i, v as i64);
        }
        Ok((div.degree() == self.deg as i64).then_some(div))
    }

    /// Every line over GF(q) meeting the curve only in rational points,
    /// with its intersection divisor. Lines are normalized with last nonzero
    /// coefficient 1 and listed in enumeration order.
    pub fn split_lines(&self) -> &[(Form, Divisor)] {
        self.split_lines.get_or_init(|| {
            let f = &self.field;
            let elems = f.enumerate();
            let mut lines = Vec::new();
            let mut push = |a: Fe, b: Fe, c: Fe| {
                let l = Form::linear(f, a, b, c);
                if let Ok(Some(d)) = self.line_divisor(&l) {
                    lines.push((l, d));
                }
            };
            for &a in &elems {
                for &b in &elems {
                    push(a, b, Fe::ONE);
                }
            }
            for &a in &elems {
                push(a, Fe::ONE, Fe::ZERO);
            }
            push(Fe::ONE, Fe::ZERO, Fe::ZERO);
            lines
        })
    }

    /// Normal form of `g` modulo the curve polynomial.
    pub fn normal_form(&self, g: &Form) -> Form {
        let f = &self.field;
        let r = &self.reducer;
        let m = g.degree();
        let d = self.deg;
        if m < d {
            return g.clone();
        }
        let mut c = g.coeffs().to_vec();
        let mons = monomials(m);
        let (a, b, cz) = r.lead;
        let fterms: Vec<_> = r.curve.terms().collect();
        for idx in 0..c.len() {
            let coef = c[idx];
            if coef.is_zero() {
                continue;
            }
            let (i, j, k) = mons[idx];
            if i < a || j < b || k < cz {
                continue;
            }
            let scale = f.mul(coef, r.lead_inv);
            for &(fc, fi, fj, _) in &fterms {
                let t = monomial_index(m, fi + i - a, fj + j - b);
                c[t] = f.sub(c[t], f.mul(scale, fc));
            }
        }
        Form::from_coeffs(f, m, c)
    }

    /// Indices (into [`monomials`]`(m)`) of monomials not divisible by the
    /// leading monomial of the curve polynomial.
    pub fn standard_monomials(&self, m: usize) -> Arc<Vec<usize>> {
        let mut cache = self.reducer.standard.lock().unwrap();
        cache
            .entry(m)
            .or_insert_with(|| {
                let (a, b, c) = self.reducer.lead;
                Arc::new(
                    monomials(m)
                        .into_iter()
                        .enumerate()
                        .filter(|&(_, (i, j, k))| i < a || j < b || k < c)
                        .map(|(idx, _)| idx)
                        .collect(),
                )
            })
            .clone()
    }

    /// Dimension of degree-`m` forms modulo the curve polynomial.
    pub fn quotient_dim(&self, m: usize) -> usize {
        self.standard_monomials(m).len()
    }

    /// Coordinates of the normal form of `g` over the standard monomials.
    pub fn nf_coords(&self, g: &Form) -> Vec<Fe> {
        let nf = self.normal_form(g);
        self.standard_monomials(g.degree())
            .iter()
            .map(|&i| nf.coeffs()[i])
            .collect()
    }

    /// Form of degree `m` with the given standard-monomial coordinates.
    pub fn form_from_coords(&self, m: usize, coords: &[Fe]) -> Form {
        let std = self.standard_monomials(m);
        let mut c = vec![Fe::ZERO; monomial_count(m)];
        for (&i, &v) in std.iter().zip(coords) {
            c[i] = v;
        }
        Form::from_coeffs(&self.field, m, c)
    }
}

/// Evaluates a form on the expansion's coordinate series, grouping terms by
/// the power of the chart's second coordinate.
pub fn eval_form_series(f: &Field, form: &Form, exp: &LocalExpansion, prec: usize) -> Series {
    let prec = prec.min(exp.prec());
    let [a, b] = exp.chart.free();
    let u = exp.xyz[a].truncate(prec);
    let v = exp.xyz[b].truncate(prec);
    let m = form.degree();
    let up = powers(f, &u, m, prec);
    let mut inner: Vec<Series> = vec![Series::zero(prec); m + 1];
    let mut used = vec![false; m + 1];
    for (c, i, j, k) in form.terms() {
        let e = [i, j, k];
        inner[e[b]].add_scaled(f, c, &up[e[a]]);
        used[e[b]] = true;
    }
    // Horner in v.
    let mut acc = Series::zero(prec);
    for jb in (0..=m).rev() {
        acc = acc.mul(f, &v);
        if used[jb] {
            acc = acc.add(f, &inner[jb]);
        }
    }
    acc
}

fn enumerate_points(f: &Field, poly: &Form) -> Vec<ProjectivePoint> {
    let elems = f.enumerate();
    let mut pts = Vec::new();
    for &x in &elems {
        for &y in &elems {
            if poly.eval(x, y, Fe::ONE).is_zero() {
                pts.push(ProjectivePoint { coords: [x, y, Fe::ONE] });
            }
        }
    }
    for &x in &elems {
        if poly.eval(x, Fe::ONE, Fe::ZERO).is_zero() {
            pts.push(ProjectivePoint {
                coords: [x, Fe::ONE, Fe::ZERO],
            });
        }
    }
    if poly.eval(Fe::ONE, Fe::ZERO, Fe::ZERO).is_zero() {
        pts.push(ProjectivePoint {
            coords: [Fe::ONE, Fe::ZERO, Fe::ZERO],
        });
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FieldSpec;
    use crate::poly::parse_form;

    pub(crate) fn klein() -> PlaneCurve {
        let f = Field::new(FieldSpec::new(2, &[1, 1, 0, 1])).unwrap();
        let poly = parse_form(&f, "X^3*Y + Y^3*Z + Z^3*X").unwrap();
        PlaneCurve::new(&f, poly).unwrap()
    }

    pub(crate) fn hermitian() -> PlaneCurve {
        let f = Field::new(FieldSpec::new(2, &[1, 1, 0, 0, 1])).unwrap();
        let poly = parse_form(&f, "Y^4*Z + Y*Z^4 + X^5").unwrap();
        PlaneCurve::new(&f, poly).unwrap()
    }

    #[test]
    fn klein_points_and_genus() {
        let c = klein();
        assert_eq!(c.genus(), 3);
        assert_eq!(c.points().len(), 24);
        let f = c.field();
        let off_triangle = c
            .points()
            .iter()
            .filter(|p| p.coords.iter().all(|x| !x.is_zero()))
            .count();
        assert_eq!(off_triangle, 21);
        for p in c.points() {
            assert!(c.contains(p.coords[0], p.coords[1], p.coords[2]));
        }
        for s in ["(1:0:0)", "(0:1:0)", "(0:0:1)"] {
            assert!(c.point_index(&ProjectivePoint::parse(f, s).unwrap()).is_some(), "{s}");
        }
    }

    #[test]
    fn hermitian_points_and_genus() {
        let c = hermitian();
        assert_eq!(c.genus(), 6);
        assert_eq!(c.points().len(), 65);
        assert_eq!(c.affine_points().len(), 64);
        assert_eq!(c.point(64).render(c.field()), "(0:1:0)");
    }

    #[test]
    fn cusp_is_singular() {
        let f = Field::new(FieldSpec::new(2, &[1, 1, 0, 1])).unwrap();
        let poly = parse_form(&f, "Y^2*Z + X^3").unwrap();
        match PlaneCurve::new(&f, poly) {
            Err(CurveError::SingularCurve(w)) => assert_eq!(w, "(0:0:1)"),
            other => panic!("expected singular, got {other:?}"),
        }
        let f5 = Field::new(FieldSpec::new(5, &[3, 1])).unwrap();
        let poly = parse_form(&f5, "Y^2*Z - X^3").unwrap();
        assert!(matches!(PlaneCurve::new(&f5, poly), Err(CurveError::SingularCurve(_))));
    }

    #[test]
    fn nodal_cubic_is_singular() {
        let f = Field::gf2();
        let poly = parse_form(&f, "Y^2*Z + X*Y*Z + X^3").unwrap();
        assert!(matches!(PlaneCurve::new(&f, poly), Err(CurveError::SingularCurve(_))));
    }

    #[test]
    fn singular_point_over_extension_detected() {
        // (X^2 + XZ + Z^2)^2 + Y^3 Z + ... : singular where X^2 + X + 1 = 0,
        // Y = 0, which has no GF(2)-rational solution.
        let f = Field::gf2();
        let poly = parse_form(&f, "X^4 + X^2*Z^2 + Z^4 + Y^3*Z + Y^4 + X*Y^3").unwrap();
        match PlaneCurve::new(&f, poly) {
            Err(CurveError::SingularCurve(w)) => assert!(w.contains("GF(2^2)"), "{w}"),
            other => panic!("expected singular, got {other:?}"),
        }
    }

    #[test]
    fn z_line_divisors() {
        let k = klein();
        let f = k.field();
        let q0 = k.point_index(&ProjectivePoint::parse(f, "(1:0:0)").unwrap()).unwrap();
        let q1 = k.point_index(&ProjectivePoint::parse(f, "(0:1:0)").unwrap()).unwrap();
        let z = k.z_line_divisor().unwrap();
        assert_eq!(z, Divisor::from_terms([(q1, 3), (q0, 1)]));
        let zform = Form::linear(f, Fe::ZERO, Fe::ZERO, Fe::ONE);
        assert_eq!(k.line_divisor(&zform).unwrap().unwrap(), z);
        let h = hermitian();
        let hz = h.z_line_divisor().unwrap();
        assert_eq!(hz, Divisor::single(64, 5));
        assert_eq!(hz.degree(), 5);
    }

    #[test]
    fn expansions_satisfy_curve_equation() {
        for c in [klein(), hermitian()] {
            let f = c.field().clone();
            for p in 0..c.points().len() {
                let e = c.local_expansion(p, 20).unwrap();
                let s = eval_form_series(&f, c.poly(), &e, 20);
                assert!(s.valuation().is_none(), "point {p}");
                let [a, b] = e.chart.free();
                let par = if e.param == 0 { a } else { b };
                assert_eq!(e.xyz[par].truncate(2).coeffs, vec![c.point(p).coords[par], Fe::ONE]);
                assert!(e.xyz[par].coeffs[2..].iter().all(|x| x.is_zero()));
            }
        }
    }

    #[test]
    fn longer_expansion_extends_shorter() {
        let c = hermitian();
        let short = c.expand(3, 10).unwrap();
        let long = c.expand(3, 40).unwrap();
        for i in 0..3 {
            assert_eq!(long.xyz[i].truncate(10), short.xyz[i]);
        }
    }

    #[test]
    fn normal_form_is_zero_on_curve_multiples() {
        let c = klein();
        let f = c.field();
        let g = parse_form(f, "X*Y + a^3*Z^2").unwrap();
        let prod = g.mul(c.poly());
        assert!(c.normal_form(&prod).is_zero());
        let h = parse_form(f, "X^5 + Y^2*Z^3").unwrap();
        let nf = c.normal_form(&h);
        // h and its normal form agree on the curve.
        for (i, p) in c.points().iter().enumerate() {
            let [x, y, z] = p.coords;
            assert_eq!(h.eval(x, y, z), nf.eval(x, y, z), "point {i}");
        }
        assert_eq!(c.quotient_dim(5), 5 * 4 - 3 + 1);
    }

    #[test]
    fn split_lines_have_degree_d() {
        let c = hermitian();
        let lines = c.split_lines();
        assert!(!lines.is_empty());
        for (_, d) in lines {
            assert_eq!(d.degree(), 5);
        }
    }

    #[test]
    fn divisor_arithmetic() {
        let a = Divisor::from_terms([(0, 2), (3, -1)]);
        let b = Divisor::from_terms([(0, 1), (5, 4)]);
        assert_eq!(a.add(&b).degree(), 6);
        assert_eq!(a.sub(&a), Divisor::zero());
        assert_eq!(a.positive_part(), Divisor::single(0, 2));
        assert_eq!(a.negative_part(), Divisor::single(3, 1));
        assert!(Divisor::single(0, 1).le(&b));
        assert!(!a.le(&b));
    }
}
