//! Finite fields GF(p^m) with a caller-chosen irreducible modulus.
//!
//! Elements are stored in the polynomial basis `1, α, …, α^(m-1)` where `α` is
//! the class of the variable modulo the modulus. An element is packed into a
//! `u32` as the base-`p` integer `c0 + c1·p + … + c(m-1)·p^(m-1)`, so the
//! canonical representation of `α^k` is reproducible for any fixed modulus.
//!
//! For fields up to 2^20 elements, multiplication goes through exp/log tables
//! that are generated with the canonical polynomial multiplication, so both
//! paths agree bit for bit.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const TABLE_LIMIT: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("characteristic {0} is not prime")]
    NotPrime(u32),
    #[error("bad modulus: {0}")]
    BadModulus(String),
    #[error("modulus is reducible over GF(p)")]
    ReducibleModulus,
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields")]
    MixedFields,
    #[error("field of size p^m does not fit the element encoding")]
    TooLarge,
    #[error("cannot parse field element {0:?}")]
    Parse(String),
}

/// `{"p": 2, "m": 3, "modulus": [1, 1, 0, 1]}`, coefficients low to high.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub m: u32,
    pub modulus: Vec<u32>,
}

impl FieldSpec {
    pub fn new(p: u32, modulus: &[u32]) -> Self {
        FieldSpec {
            p,
            m: modulus.len().saturating_sub(1) as u32,
            modulus: modulus.to_vec(),
        }
    }
}

/// A field element handle. Arithmetic goes through the owning [`Field`].
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fe(u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    /// Packed base-`p` coefficient encoding.
    #[inline]
    pub fn raw(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

struct Inner {
    spec: FieldSpec,
    q: u32,
    alpha: Fe,
    /// Generator of the multiplicative group; equal to `alpha` when the modulus is primitive.
    generator: Fe,
    alpha_primitive: bool,
    /// `exp[k] = generator^k` for `k < 2(q-1)`; empty when tables are disabled.
    exp: Vec<u32>,
    log: Vec<u32>,
}

/// Immutable field context; cheap to clone and safe to share between threads.
#[derive(Clone)]
pub struct Field {
    inner: Arc<Inner>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "GF({}^{}) mod {:?}",
            self.inner.spec.p, self.inner.spec.m, self.inner.spec.modulus
        )
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.spec == other.inner.spec
    }
}

impl Eq for Field {}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

// Dense polynomials over GF(p), coefficients low to high.

fn trim(v: &mut Vec<u32>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn inv_mod_p(a: u32, p: u32) -> u32 {
    let mut r = 1u64;
    let mut b = a as u64 % p as u64;
    let mut e = p as u64 - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

/// Remainder of `a` modulo `b` over GF(p); `b` must be nonzero.
fn poly_rem_p(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    trim(&mut r);
    let mut b = b.to_vec();
    trim(&mut b);
    let db = b.len() - 1;
    let lead_inv = inv_mod_p(b[db], p) as u64;
    while r.len() > db {
        let top = r.len() - 1;
        let c = r[top] as u64 * lead_inv % p as u64;
        if c != 0 {
            for (i, &bi) in b.iter().enumerate() {
                let idx = top - db + i;
                let sub = c * bi as u64 % p as u64;
                r[idx] = ((r[idx] as u64 + p as u64 - sub) % p as u64) as u32;
            }
        }
        trim(&mut r);
    }
    r
}

/// Exhaustive search for a monic factor of degree `1..=deg/2`.
fn is_irreducible_p(f: &[u32], p: u32) -> bool {
    let deg = f.len() - 1;
    if deg <= 1 {
        return true;
    }
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for idx in 0..count {
            let mut g = Vec::with_capacity(d + 1);
            let mut x = idx;
            for _ in 0..d {
                g.push((x % p as u64) as u32);
                x /= p as u64;
            }
            g.push(1);
            if poly_rem_p(f, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

impl Field {
    /// Builds GF(p^m) from a monic irreducible modulus of degree `m`.
    pub fn new(spec: FieldSpec) -> Result<Field, GfError> {
        let FieldSpec { p, m, ref modulus } = spec;
        if !is_prime(p) {
            return Err(GfError::NotPrime(p));
        }
        if m == 0 || modulus.len() != m as usize + 1 {
            return Err(GfError::BadModulus(format!(
                "expected {} coefficients for degree {}, got {}",
                m + 1,
                m,
                modulus.len()
            )));
        }
        if modulus.iter().any(|&c| c >= p) {
            return Err(GfError::BadModulus("coefficient not reduced mod p".into()));
        }
        if modulus[m as usize] != 1 {
            return Err(GfError::BadModulus("modulus is not monic".into()));
        }
        let q64 = (p as u64).checked_pow(m).ok_or(GfError::TooLarge)?;
        if q64 > u32::MAX as u64 {
            return Err(GfError::TooLarge);
        }
        if !is_irreducible_p(modulus, p) {
            return Err(GfError::ReducibleModulus);
        }
        let q = q64 as u32;
        let mut inner = Inner {
            spec: spec.clone(),
            q,
            alpha: Fe(0),
            generator: Fe(0),
            alpha_primitive: false,
            exp: Vec::new(),
            log: Vec::new(),
        };
        let mut f = Field {
            inner: Arc::new(Inner {
                spec: spec.clone(),
                q,
                alpha: Fe(0),
                generator: Fe(0),
                alpha_primitive: false,
                exp: Vec::new(),
                log: Vec::new(),
            }),
        };
        // α is the class of x; for m = 1 that is the root -c0 of x + c0.
        let alpha = if m == 1 {
            Fe((p - modulus[0]) % p)
        } else {
            Fe(p)
        };
        inner.alpha = alpha;
        let order = q64 - 1;
        let factors = prime_factors(order);
        let is_generator = |f: &Field, g: Fe| -> bool {
            if g.is_zero() {
                return false;
            }
            factors
                .iter()
                .all(|&r| f.pow_canonical(g, order / r) != Fe::ONE)
        };
        let alpha_primitive = q > 2 && is_generator(&f, alpha) || q == 2;
        let generator = if alpha_primitive {
            if q == 2 {
                Fe::ONE
            } else {
                alpha
            }
        } else {
            (1..q).map(Fe).find(|&g| is_generator(&f, g)).unwrap_or(Fe::ONE)
        };
        inner.alpha_primitive = alpha_primitive;
        inner.generator = generator;
        if q64 <= TABLE_LIMIT {
            let n = (q - 1) as usize;
            let mut exp = vec![0u32; 2 * n.max(1)];
            let mut log = vec![0u32; q as usize];
            let mut x = Fe::ONE;
            for k in 0..n {
                exp[k] = x.0;
                log[x.0 as usize] = k as u32;
                x = f.mul_canonical(x, generator);
            }
            for k in n..2 * n {
                exp[k] = exp[k - n];
            }
            inner.exp = exp;
            inner.log = log;
        }
        f.inner = Arc::new(inner);
        Ok(f)
    }

    /// GF(2) with modulus `x + 1`.
    pub fn gf2() -> Field {
        Field::new(FieldSpec::new(2, &[1, 1])).expect("x+1 is irreducible")
    }

    /// First monic irreducible polynomial of degree `m` over GF(p) in base-`p`
    /// counting order, preferring a primitive one.
    pub fn find_modulus(p: u32, m: u32) -> Result<FieldSpec, GfError> {
        if !is_prime(p) {
            return Err(GfError::NotPrime(p));
        }
        let count = (p as u64).checked_pow(m).ok_or(GfError::TooLarge)?;
        let mut first_irreducible = None;
        for idx in 0..count {
            let mut f = Vec::with_capacity(m as usize + 1);
            let mut x = idx;
            for _ in 0..m {
                f.push((x % p as u64) as u32);
                x /= p as u64;
            }
            f.push(1);
            if f[0] == 0 && m > 1 {
                continue;
            }
            if !is_irreducible_p(&f, p) {
                continue;
            }
            let spec = FieldSpec::new(p, &f);
            let field = Field::new(spec.clone())?;
            if field.alpha_is_primitive() {
                return Ok(spec);
            }
            first_irreducible.get_or_insert(spec);
        }
        first_irreducible.ok_or(GfError::ReducibleModulus)
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.inner.spec
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.inner.spec.p
    }

    #[inline]
    pub fn m(&self) -> u32 {
        self.inner.spec.m
    }

    /// Field size `q = p^m`.
    #[inline]
    pub fn q(&self) -> u32 {
        self.inner.q
    }

    pub fn zero(&self) -> Fe {
        Fe::ZERO
    }

    pub fn one(&self) -> Fe {
        Fe::ONE
    }

    /// The class of the variable modulo the modulus.
    pub fn alpha(&self) -> Fe {
        self.inner.alpha
    }

    pub fn alpha_is_primitive(&self) -> bool {
        self.inner.alpha_primitive
    }

    /// A fixed generator of the multiplicative group.
    pub fn generator(&self) -> Fe {
        self.inner.generator
    }

    pub fn same(&self, other: &Field) -> bool {
        self == other
    }

    pub fn check_same(&self, other: &Field) -> Result<(), GfError> {
        if self.same(other) {
            Ok(())
        } else {
            Err(GfError::MixedFields)
        }
    }

    /// Element with the given polynomial-basis coefficients (low to high).
    pub fn from_coeffs(&self, coeffs: &[u32]) -> Fe {
        let p = self.p() as u64;
        let mut acc = 0u64;
        let mut scale = 1u64;
        for &c in coeffs.iter().take(self.m() as usize) {
            acc += (c as u64 % p) * scale;
            scale *= p;
        }
        Fe(acc as u32)
    }

    pub fn coeffs(&self, a: Fe) -> Vec<u32> {
        let p = self.p();
        let mut x = a.0;
        (0..self.m())
            .map(|_| {
                let c = x % p;
                x /= p;
                c
            })
            .collect()
    }

    /// Embedding of an integer through the prime subfield.
    pub fn from_int(&self, n: i64) -> Fe {
        Fe(n.rem_euclid(self.p() as i64) as u32)
    }

    /// Element from its packed encoding; `None` if out of range.
    pub fn from_raw(&self, raw: u32) -> Option<Fe> {
        (raw < self.q()).then_some(Fe(raw))
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        let p = self.p();
        if p == 2 {
            return Fe(a.0 ^ b.0);
        }
        if self.m() == 1 {
            return Fe((a.0 + b.0) % p);
        }
        let (mut x, mut y) = (a.0, b.0);
        let mut acc = 0u32;
        let mut scale = 1u32;
        while x != 0 || y != 0 {
            acc += ((x % p + y % p) % p) * scale;
            x /= p;
            y /= p;
            scale = scale.wrapping_mul(p);
        }
        Fe(acc)
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        let p = self.p();
        if p == 2 {
            return a;
        }
        let mut x = a.0;
        let mut acc = 0u32;
        let mut scale = 1u32;
        while x != 0 {
            acc += ((p - x % p) % p) * scale;
            x /= p;
            scale = scale.wrapping_mul(p);
        }
        Fe(acc)
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        if self.p() == 2 {
            Fe(a.0 ^ b.0)
        } else {
            self.add(a, self.neg(b))
        }
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 || b.0 == 0 {
            return Fe::ZERO;
        }
        let inner = &*self.inner;
        if inner.exp.is_empty() {
            return self.mul_canonical(a, b);
        }
        let la = inner.log[a.0 as usize] as usize;
        let lb = inner.log[b.0 as usize] as usize;
        Fe(inner.exp[la + lb])
    }

    /// `a*b + c`.
    #[inline]
    pub fn mul_add(&self, a: Fe, b: Fe, c: Fe) -> Fe {
        self.add(self.mul(a, b), c)
    }

    /// Polynomial-basis product reduced by the modulus, without tables.
    pub fn mul_canonical(&self, a: Fe, b: Fe) -> Fe {
        let p = self.p() as u64;
        let m = self.m() as usize;
        let ca = self.coeffs(a);
        let cb = self.coeffs(b);
        let mut prod = vec![0u64; 2 * m];
        for (i, &x) in ca.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in cb.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
            }
        }
        let modulus = &self.inner.spec.modulus;
        for top in (m..2 * m).rev() {
            let c = prod[top];
            if c == 0 {
                continue;
            }
            prod[top] = 0;
            for (i, &mi) in modulus.iter().take(m).enumerate() {
                let idx = top - m + i;
                prod[idx] = (prod[idx] + (p - c) * mi as u64) % p;
            }
        }
        let digits: Vec<u32> = prod[..m].iter().map(|&x| x as u32).collect();
        self.from_coeffs(&digits)
    }

    fn pow_canonical(&self, a: Fe, mut e: u64) -> Fe {
        let mut base = a;
        let mut acc = Fe::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_canonical(acc, base);
            }
            base = self.mul_canonical(base, base);
            e >>= 1;
        }
        acc
    }

    /// Square-and-multiply.
    pub fn pow(&self, a: Fe, mut e: u64) -> Fe {
        let mut base = a;
        let mut acc = Fe::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Signed exponent; negative powers invert first.
    pub fn powi(&self, a: Fe, e: i64) -> Result<Fe, GfError> {
        if e >= 0 {
            Ok(self.pow(a, e as u64))
        } else {
            Ok(self.pow(self.inv(a)?, e.unsigned_abs()))
        }
    }

    pub fn inv(&self, a: Fe) -> Result<Fe, GfError> {
        if a.is_zero() {
            return Err(GfError::DivisionByZero);
        }
        let inner = &*self.inner;
        if inner.exp.is_empty() {
            return Ok(self.pow(a, self.q() as u64 - 2));
        }
        let n = (inner.q - 1) as usize;
        let la = inner.log[a.0 as usize] as usize;
        Ok(Fe(inner.exp[(n - la) % n]))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `α^k` for any integer `k`.
    pub fn alpha_pow(&self, k: i64) -> Fe {
        self.powi(self.alpha(), k).expect("alpha is nonzero")
    }

    /// Discrete log to base `α`, only when `α` is primitive.
    pub fn log_alpha(&self, a: Fe) -> Option<u32> {
        if a.is_zero() || !self.alpha_is_primitive() {
            return None;
        }
        let inner = &*self.inner;
        if !inner.exp.is_empty() {
            return Some(inner.log[a.0 as usize]);
        }
        let mut x = Fe::ONE;
        for k in 0..self.q() - 1 {
            if x == a {
                return Some(k);
            }
            x = self.mul(x, self.alpha());
        }
        None
    }

    /// `0`, then `g^0, g^1, …, g^(q-2)` for the generator `g` (which is `α`
    /// whenever the modulus is primitive).
    pub fn enumerate(&self) -> Vec<Fe> {
        let mut out = Vec::with_capacity(self.q() as usize);
        out.push(Fe::ZERO);
        let g = self.generator();
        let mut x = Fe::ONE;
        for _ in 0..self.q() - 1 {
            out.push(x);
            x = self.mul(x, g);
        }
        out
    }

    /// `a^p`.
    pub fn frobenius(&self, a: Fe) -> Fe {
        self.pow(a, self.p() as u64)
    }

    pub fn sum<I: IntoIterator<Item = Fe>>(&self, it: I) -> Fe {
        it.into_iter().fold(Fe::ZERO, |acc, x| self.add(acc, x))
    }

    /// `"0"`, or `"a^k"` when `α` is primitive, else `"#raw"`.
    pub fn format(&self, a: Fe) -> String {
        if a.is_zero() {
            return "0".to_string();
        }
        match self.log_alpha(a) {
            Some(k) => format!("a^{k}"),
            None => format!("#{}", a.0),
        }
    }

    /// Inverse of [`format`](Self::format); also accepts `1`, `a`, `α`,
    /// `α^k`, plain integers (taken mod p) and a leading minus sign.
    pub fn parse(&self, s: &str) -> Result<Fe, GfError> {
        let s = s.trim();
        let err = || GfError::Parse(s.to_string());
        if s.is_empty() {
            return Err(err());
        }
        if let Some(rest) = s.strip_prefix('-') {
            return Ok(self.neg(self.parse(rest)?));
        }
        if let Some(raw) = s.strip_prefix('#') {
            let v: u32 = raw.parse().map_err(|_| err())?;
            return self.from_raw(v).ok_or_else(err);
        }
        let body = s
            .strip_prefix('a')
            .or_else(|| s.strip_prefix('α'))
            .map(str::to_string);
        if let Some(rest) = body {
            if rest.is_empty() {
                return Ok(self.alpha());
            }
            let exp = rest.strip_prefix('^').ok_or_else(err)?;
            let k: i64 = exp.trim().parse().map_err(|_| err())?;
            return Ok(self.alpha_pow(k));
        }
        let n: i64 = s.parse().map_err(|_| err())?;
        Ok(self.from_int(n))
    }
}
