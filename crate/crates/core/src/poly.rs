//! Homogeneous ternary forms in `X, Y, Z`, univariate polynomials, and a
//! small parser for polynomial strings such as `"X^3*Y + Y^3*Z + Z^3*X"`.

use std::fmt;

use thiserror::Error;

use crate::gf::{Fe, Field, GfError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("polynomial parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error(transparent)]
    Field(#[from] GfError),
}

/// Number of monomials of degree `m` in three variables.
#[inline]
pub fn monomial_count(m: usize) -> usize {
    (m + 1) * (m + 2) / 2
}

/// Position of `X^i Y^j Z^(m-i-j)` in lex-descending order (`X > Y > Z`).
#[inline]
pub fn monomial_index(m: usize, i: usize, j: usize) -> usize {
    let a = m - i;
    a * (a + 1) / 2 + (a - j)
}

/// Exponents `(i, j, k)` of every degree-`m` monomial, in index order.
pub fn monomials(m: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::with_capacity(monomial_count(m));
    for i in (0..=m).rev() {
        for j in (0..=m - i).rev() {
            out.push((i, j, m - i - j));
        }
    }
    out
}

/// A homogeneous form of fixed degree, dense over [`monomials`].
#[derive(Clone, PartialEq, Eq)]
pub struct Form {
    field: Field,
    deg: usize,
    coeffs: Vec<Fe>,
}

impl Form {
    pub fn zero(field: &Field, deg: usize) -> Form {
        Form {
            field: field.clone(),
            deg,
            coeffs: vec![Fe::ZERO; monomial_count(deg)],
        }
    }

    pub fn constant(field: &Field, c: Fe) -> Form {
        let mut f = Form::zero(field, 0);
        f.coeffs[0] = c;
        f
    }

    pub fn monomial(field: &Field, c: Fe, i: usize, j: usize, k: usize) -> Form {
        let mut f = Form::zero(field, i + j + k);
        f.coeffs[monomial_index(i + j + k, i, j)] = c;
        f
    }

    /// `aX + bY + cZ`.
    pub fn linear(field: &Field, a: Fe, b: Fe, c: Fe) -> Form {
        let mut f = Form::zero(field, 1);
        f.coeffs = vec![a, b, c];
        f
    }

    pub fn from_coeffs(field: &Field, deg: usize, coeffs: Vec<Fe>) -> Form {
        assert_eq!(coeffs.len(), monomial_count(deg));
        Form {
            field: field.clone(),
            deg,
            coeffs,
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn degree(&self) -> usize {
        self.deg
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize, j: usize, k: usize) -> Fe {
        if i + j + k != self.deg {
            return Fe::ZERO;
        }
        self.coeffs[monomial_index(self.deg, i, j)]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Nonzero terms as `(coeff, i, j, k)`.
    pub fn terms(&self) -> impl Iterator<Item = (Fe, usize, usize, usize)> + '_ {
        monomials(self.deg)
            .into_iter()
            .zip(self.coeffs.iter().copied())
            .filter(|(_, c)| !c.is_zero())
            .map(|((i, j, k), c)| (c, i, j, k))
    }

    pub fn add(&self, other: &Form) -> Form {
        assert_eq!(self.deg, other.deg, "adding forms of different degree");
        let f = &self.field;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| f.add(a, b))
            .collect();
        Form::from_coeffs(f, self.deg, coeffs)
    }

    pub fn sub(&self, other: &Form) -> Form {
        self.add(&other.scale(self.field.neg(Fe::ONE)))
    }

    pub fn scale(&self, c: Fe) -> Form {
        let f = &self.field;
        Form::from_coeffs(f, self.deg, self.coeffs.iter().map(|&a| f.mul(a, c)).collect())
    }

    pub fn mul(&self, other: &Form) -> Form {
        let f = &self.field;
        let deg = self.deg + other.deg;
        let mut out = vec![Fe::ZERO; monomial_count(deg)];
        let rhs: Vec<_> = other.terms().collect();
        for (a, i, j, _) in self.terms() {
            for &(b, i2, j2, _) in &rhs {
                let idx = monomial_index(deg, i + i2, j + j2);
                out[idx] = f.add(out[idx], f.mul(a, b));
            }
        }
        Form::from_coeffs(f, deg, out)
    }

    pub fn pow(&self, e: usize) -> Form {
        let mut acc = Form::constant(&self.field, Fe::ONE);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eval(&self, x: Fe, y: Fe, z: Fe) -> Fe {
        let f = &self.field;
        let mut acc = Fe::ZERO;
        for (c, i, j, k) in self.terms() {
            let t = f.mul(f.mul(f.pow(x, i as u64), f.pow(y, j as u64)), f.pow(z, k as u64));
            acc = f.add(acc, f.mul(c, t));
        }
        acc
    }

    /// Partial derivative with respect to variable `var` (0 = X, 1 = Y, 2 = Z).
    pub fn partial(&self, var: usize) -> Form {
        let f = &self.field;
        if self.deg == 0 {
            return Form::zero(f, 0);
        }
        let mut out = Form::zero(f, self.deg - 1);
        for (c, i, j, k) in self.terms() {
            let e = [i, j, k][var];
            if e == 0 {
                continue;
            }
            let mut ex = [i, j, k];
            ex[var] -= 1;
            let coef = f.mul(c, f.from_int(e as i64));
            let idx = monomial_index(self.deg - 1, ex[0], ex[1]);
            out.coeffs[idx] = f.add(out.coeffs[idx], coef);
        }
        out
    }

    /// Lex-largest monomial with a nonzero coefficient.
    pub fn leading(&self) -> Option<(Fe, usize, usize, usize)> {
        self.terms().next()
    }

    /// Human-readable rendering, coefficients as `a^k`.
    pub fn render(&self) -> String {
        let f = &self.field;
        let mut parts = Vec::new();
        for (c, i, j, k) in self.terms() {
            let mut factors = Vec::new();
            for (name, e) in [("X", i), ("Y", j), ("Z", k)] {
                match e {
                    0 => {}
                    1 => factors.push(name.to_string()),
                    _ => factors.push(format!("{name}^{e}")),
                }
            }
            let coef = if c == Fe::ONE && !factors.is_empty() {
                None
            } else if c == Fe::ONE {
                Some("1".to_string())
            } else {
                Some(f.format(c))
            };
            let mut term: Vec<String> = coef.into_iter().collect();
            term.extend(factors);
            parts.push(term.join("*"));
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Form[{}]({})", self.deg, self.render())
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Parses a sum of terms like `a^3*X^2*Y`, `X^5`, `2*Y*Z^4`, `-Z`.
/// Coefficients may be integers (taken mod p) or powers of `a`/`α`.
pub fn parse_form(field: &Field, s: &str) -> Result<Form, PolyError> {
    let mut terms: Vec<(Fe, [usize; 3])> = Vec::new();
    let bytes: Vec<char> = s.chars().collect();
    let mut pos = 0usize;
    let err = |pos: usize, msg: &str| PolyError::Parse {
        pos,
        msg: msg.to_string(),
    };
    let skip_ws = |pos: &mut usize| {
        while *pos < bytes.len() && bytes[*pos].is_whitespace() {
            *pos += 1;
        }
    };
    let read_uint = |pos: &mut usize| -> Option<usize> {
        let start = *pos;
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            *pos += 1;
        }
        if start == *pos {
            None
        } else {
            bytes[start..*pos].iter().collect::<String>().parse().ok()
        }
    };
    let mut sign_negative = false;
    skip_ws(&mut pos);
    if pos < bytes.len() && bytes[pos] == '-' {
        sign_negative = true;
        pos += 1;
    } else if pos < bytes.len() && bytes[pos] == '+' {
        pos += 1;
    }
    loop {
        let mut coef = Fe::ONE;
        let mut exps = [0usize; 3];
        let mut saw_factor = false;
        loop {
            skip_ws(&mut pos);
            if pos >= bytes.len() {
                break;
            }
            let ch = bytes[pos];
            match ch {
                'X' | 'Y' | 'Z' | 'x' | 'y' | 'z' => {
                    pos += 1;
                    let var = match ch.to_ascii_uppercase() {
                        'X' => 0,
                        'Y' => 1,
                        _ => 2,
                    };
                    skip_ws(&mut pos);
                    let mut e = 1;
                    if pos < bytes.len() && bytes[pos] == '^' {
                        pos += 1;
                        skip_ws(&mut pos);
                        e = read_uint(&mut pos).ok_or_else(|| err(pos, "expected exponent"))?;
                    }
                    exps[var] += e;
                }
                'a' | 'α' => {
                    pos += 1;
                    skip_ws(&mut pos);
                    let mut e: i64 = 1;
                    if pos < bytes.len() && bytes[pos] == '^' {
                        pos += 1;
                        skip_ws(&mut pos);
                        let neg = pos < bytes.len() && bytes[pos] == '-';
                        if neg {
                            pos += 1;
                        }
                        let v = read_uint(&mut pos).ok_or_else(|| err(pos, "expected exponent"))?;
                        e = if neg { -(v as i64) } else { v as i64 };
                    }
                    coef = field.mul(coef, field.alpha_pow(e));
                }
                c if c.is_ascii_digit() => {
                    let v = read_uint(&mut pos).ok_or_else(|| err(pos, "expected integer"))?;
                    coef = field.mul(coef, field.from_int(v as i64));
                }
                _ => return Err(err(pos, &format!("unexpected character {ch:?}"))),
            }
            saw_factor = true;
            skip_ws(&mut pos);
            if pos < bytes.len() && bytes[pos] == '*' {
                pos += 1;
                continue;
            }
            break;
        }
        if !saw_factor {
            return Err(err(pos, "empty term"));
        }
        if sign_negative {
            coef = field.neg(coef);
        }
        terms.push((coef, exps));
        skip_ws(&mut pos);
        if pos >= bytes.len() {
            break;
        }
        match bytes[pos] {
            '+' => sign_negative = false,
            '-' => sign_negative = true,
            c => return Err(err(pos, &format!("expected + or -, found {c:?}"))),
        }
        pos += 1;
    }
    let deg = terms[0].1.iter().sum::<usize>();
    if terms.iter().any(|(_, e)| e.iter().sum::<usize>() != deg) {
        return Err(PolyError::NotHomogeneous);
    }
    let mut form = Form::zero(field, deg);
    for (c, [i, j, _]) in terms {
        let idx = monomial_index(deg, i, j);
        form.coeffs[idx] = field.add(form.coeffs[idx], c);
    }
    Ok(form)
}

/// Dense univariate polynomial, coefficients low to high, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct UPoly {
    pub coeffs: Vec<Fe>,
}

impl UPoly {
    pub fn new(mut coeffs: Vec<Fe>) -> UPoly {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UPoly { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, f: &Field, x: Fe) -> Fe {
        self.coeffs
            .iter()
            .rev()
            .fold(Fe::ZERO, |acc, &c| f.add(f.mul(acc, x), c))
    }

    pub fn div_rem(&self, f: &Field, d: &UPoly) -> (UPoly, UPoly) {
        let dd = d.degree().expect("division by zero polynomial");
        let lead_inv = f.inv(d.coeffs[dd]).expect("leading coefficient nonzero");
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (UPoly::new(vec![]), UPoly::new(rem));
        }
        let mut quo = vec![Fe::ZERO; rem.len() - dd];
        for top in (dd..rem.len()).rev() {
            let c = f.mul(rem[top], lead_inv);
            if c.is_zero() {
                continue;
            }
            quo[top - dd] = c;
            for (i, &di) in d.coeffs.iter().enumerate() {
                let idx = top - dd + i;
                rem[idx] = f.sub(rem[idx], f.mul(c, di));
            }
        }
        (UPoly::new(quo), UPoly::new(rem))
    }

    pub fn gcd(f: &Field, a: &UPoly, b: &UPoly) -> UPoly {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(f, &b);
            a = b;
            b = r;
        }
        if let Some(d) = a.degree() {
            let inv = f.inv(a.coeffs[d]).expect("nonzero");
            a = UPoly::new(a.coeffs.iter().map(|&c| f.mul(c, inv)).collect());
        }
        a
    }

    /// Multiplicity of `x0` as a root.
    pub fn root_multiplicity(&self, f: &Field, x0: Fe) -> usize {
        let lin = UPoly::new(vec![f.neg(x0), Fe::ONE]);
        let mut p = self.clone();
        let mut m = 0;
        while !p.is_zero() {
            let (q, r) = p.div_rem(f, &lin);
            if !r.is_zero() {
                break;
            }
            p = q;
            m += 1;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FieldSpec;

    fn f8() -> Field {
        Field::new(FieldSpec::new(2, &[1, 1, 0, 1])).unwrap()
    }

    #[test]
    fn monomial_indexing_is_dense() {
        for m in 0..7 {
            let mons = monomials(m);
            assert_eq!(mons.len(), monomial_count(m));
            for (idx, &(i, j, _)) in mons.iter().enumerate() {
                assert_eq!(monomial_index(m, i, j), idx);
            }
        }
    }

    #[test]
    fn parse_klein_and_render() {
        let f = f8();
        let klein = parse_form(&f, "X^3*Y + Y^3*Z + Z^3*X").unwrap();
        assert_eq!(klein.degree(), 4);
        assert_eq!(klein.coeff(3, 1, 0), Fe::ONE);
        assert_eq!(klein.coeff(1, 0, 3), Fe::ONE);
        let again = parse_form(&f, &klein.render()).unwrap();
        assert_eq!(again, klein);
        let g = parse_form(&f, "a^3*X^2 - 1*Y*Z + a*Z^2").unwrap();
        assert_eq!(g.coeff(2, 0, 0), f.alpha_pow(3));
        assert_eq!(g.coeff(0, 0, 2), f.alpha());
        assert_eq!(parse_form(&f, "X^2 + Y"), Err(PolyError::NotHomogeneous));
        assert!(matches!(parse_form(&f, "X^2 + "), Err(PolyError::Parse { .. })));
        assert!(matches!(parse_form(&f, "X^2 $ Y^2"), Err(PolyError::Parse { .. })));
    }

    #[test]
    fn product_and_partials() {
        let f = f8();
        let a = parse_form(&f, "X + Y").unwrap();
        let sq = a.mul(&a);
        // characteristic 2: (X+Y)^2 = X^2 + Y^2
        assert_eq!(sq, parse_form(&f, "X^2 + Y^2").unwrap());
        let klein = parse_form(&f, "X^3*Y + Y^3*Z + Z^3*X").unwrap();
        assert_eq!(klein.partial(1), parse_form(&f, "X^3 + Y^2*Z").unwrap());
        assert_eq!(klein.partial(0), parse_form(&f, "X^2*Y + Z^3").unwrap());
    }

    #[test]
    fn univariate_roots() {
        let f = f8();
        // (x-1)^2 (x-a)
        let one = UPoly::new(vec![Fe::ONE, Fe::ONE]);
        let xa = UPoly::new(vec![f.alpha(), Fe::ONE]);
        let mut coeffs = vec![Fe::ZERO; 4];
        let sq = [Fe::ONE, Fe::ZERO, Fe::ONE];
        for (i, &c) in sq.iter().enumerate() {
            for (j, &d) in xa.coeffs.iter().enumerate() {
                coeffs[i + j] = f.add(coeffs[i + j], f.mul(c, d));
            }
        }
        let p = UPoly::new(coeffs);
        assert_eq!(p.root_multiplicity(&f, Fe::ONE), 2);
        assert_eq!(p.root_multiplicity(&f, f.alpha()), 1);
        assert_eq!(p.root_multiplicity(&f, Fe::ZERO), 0);
        let g = UPoly::gcd(&f, &p, &one);
        assert_eq!(g, one);
    }
}
