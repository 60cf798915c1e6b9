//! Exact arithmetic in the cyclotomic field Q(zeta_N).
//!
//! A [`Scalar`] is stored in the power basis 1, z, ..., z^(phi(N)-1) modulo the
//! N-th cyclotomic polynomial, with rational coefficients in lowest terms, so
//! equality is coefficient-wise. Rationals embed into every order; two
//! non-rational scalars of different orders never mix implicitly.

use crate::{Error, Result};
use num::complex::Complex64;
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;
use std::sync::OnceLock;

fn cyclo_cache() -> &'static Mutex<HashMap<u32, Vec<BigInt>>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Vec<BigInt>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Euler totient.
pub fn phi(n: u32) -> usize {
    let mut n = n as u64;
    let mut result = n;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result as usize
}

/// Integer polynomial division, exact; panics if not exact (never happens for
/// cyclotomic factors).
fn poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem: Vec<BigInt> = num.to_vec();
    let dd = den.len() - 1;
    let nd = rem.len() - 1;
    assert!(nd >= dd);
    let mut quot = vec![BigInt::zero(); nd - dd + 1];
    for k in (0..=nd - dd).rev() {
        let c = rem[dd + k].clone() / den[dd].clone();
        quot[k] = c.clone();
        for i in 0..=dd {
            let v = rem[i + k].clone() - &c * &den[i];
            rem[i + k] = v;
        }
    }
    assert!(rem.iter().all(|c| c.is_zero()), "inexact poly division");
    quot
}

/// Coefficients (ascending) of the N-th cyclotomic polynomial.
pub fn cyclotomic(n: u32) -> Vec<BigInt> {
    if let Some(p) = cyclo_cache().lock().unwrap().get(&n) {
        return p.clone();
    }
    let poly = if n == 1 {
        vec![BigInt::from(-1), BigInt::from(1)]
    } else {
        // (x^n - 1) / prod_{d|n, d<n} Phi_d
        let mut num = vec![BigInt::zero(); n as usize + 1];
        num[0] = BigInt::from(-1);
        num[n as usize] = BigInt::from(1);
        let mut acc = num;
        for d in 1..n {
            if n % d == 0 {
                let phi_d = cyclotomic(d);
                acc = poly_div_exact(&acc, &phi_d);
            }
        }
        acc
    };
    cyclo_cache().lock().unwrap().insert(n, poly.clone());
    poly
}

/// Element of Q(zeta_N), canonical power-basis representation.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    order: u32,
    coeffs: Vec<BigRational>,
}

impl Scalar {
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn zero() -> Self {
        Scalar { order: 1, coeffs: vec![BigRational::zero()] }
    }

    pub fn one() -> Self {
        Scalar { order: 1, coeffs: vec![BigRational::one()] }
    }

    pub fn from_int(n: i64) -> Self {
        Scalar { order: 1, coeffs: vec![BigRational::from_integer(BigInt::from(n))] }
    }

    pub fn from_ratio(p: i64, q: i64) -> Self {
        assert!(q != 0);
        Scalar {
            order: 1,
            coeffs: vec![BigRational::new(BigInt::from(p), BigInt::from(q))],
        }
    }

    pub fn from_rational(r: BigRational) -> Self {
        Scalar { order: 1, coeffs: vec![r] }
    }

    /// zeta_N^k as an element of Q(zeta_N).
    pub fn root_of_unity(order: u32, k: i64) -> Self {
        assert!(order >= 1);
        let kk = k.rem_euclid(order as i64) as usize;
        let mut poly = vec![BigRational::zero(); kk + 1];
        poly[kk] = BigRational::one();
        Scalar::from_poly(order, poly)
    }

    /// Build from an arbitrary-length polynomial in z, reducing mod Phi_N.
    pub fn from_poly(order: u32, poly: Vec<BigRational>) -> Self {
        let d = phi(order);
        let cyc = cyclotomic(order);
        let deg = cyc.len() - 1;
        debug_assert_eq!(deg, d);
        let mut c = poly;
        // reduce: for top coefficients, subtract c_top * z^(top-deg) * Phi
        while c.len() > deg {
            let top = c.len() - 1;
            let lead = c[top].clone();
            if !lead.is_zero() {
                for i in 0..=deg {
                    let adj = &lead * BigRational::from_integer(cyc[i].clone());
                    let idx = top - deg + i;
                    let v = c[idx].clone() - adj;
                    c[idx] = v;
                }
            }
            c.pop();
        }
        c.resize(d, BigRational::zero());
        let s = Scalar { order, coeffs: c };
        s.normalize_order()
    }

    /// Treat a rational value in a possibly larger field as order-1 for
    /// promotion purposes. Keeps representation canonical but cheap: we only
    /// collapse to order 1 when all non-constant coefficients vanish.
    fn normalize_order(self) -> Self {
        if self.order != 1 && self.coeffs.iter().skip(1).all(|c| c.is_zero()) {
            Scalar { order: 1, coeffs: vec![self.coeffs[0].clone()] }
        } else {
            self
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.is_rational() && self.coeffs[0].is_one()
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs.iter().skip(1).all(|c| c.is_zero())
    }

    pub fn rational_part(&self) -> Option<BigRational> {
        if self.is_rational() {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Embed into Q(zeta_m); requires order | m.
    pub fn embed(&self, m: u32) -> Result<Scalar> {
        if self.order == m {
            return Ok(self.clone());
        }
        if self.is_rational() {
            let mut c = vec![BigRational::zero(); phi(m)];
            c[0] = self.coeffs[0].clone();
            return Ok(Scalar { order: m, coeffs: c }.normalize_order());
        }
        if m % self.order != 0 {
            return Err(Error::OrderMismatch(self.order, m));
        }
        let step = (m / self.order) as usize;
        let mut poly = vec![BigRational::zero(); (self.coeffs.len() - 1) * step + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            poly[k * step] = c.clone();
        }
        Ok(Scalar::from_poly(m, poly))
    }

    /// Common order plus both coefficient vectors lifted (unreduced) to it.
    fn promote(a: &Scalar, b: &Scalar) -> Result<(u32, Vec<BigRational>, Vec<BigRational>)> {
        let lift = |s: &Scalar, m: u32| -> Result<Vec<BigRational>> {
            if s.order == m {
                return Ok(s.coeffs.clone());
            }
            if s.is_rational() {
                let mut c = vec![BigRational::zero(); phi(m)];
                c[0] = s.coeffs[0].clone();
                return Ok(c);
            }
            if m % s.order != 0 {
                return Err(Error::OrderMismatch(s.order, m));
            }
            let step = (m / s.order) as usize;
            let mut poly = vec![BigRational::zero(); (s.coeffs.len() - 1) * step + 1];
            for (k, c) in s.coeffs.iter().enumerate() {
                poly[k * step] = c.clone();
            }
            Ok(poly)
        };
        let order = if a.order == b.order {
            a.order
        } else if a.is_rational() {
            b.order
        } else if b.is_rational() {
            a.order
        } else {
            return Err(Error::OrderMismatch(a.order, b.order));
        };
        Ok((order, lift(a, order)?, lift(b, order)?))
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        self.try_add(other).expect("order mismatch in add")
    }

    pub fn try_add(&self, other: &Scalar) -> Result<Scalar> {
        let (order, mut a, mut b) = Scalar::promote(self, other)?;
        let len = a.len().max(b.len());
        a.resize(len, BigRational::zero());
        b.resize(len, BigRational::zero());
        let poly = a.iter().zip(b.iter()).map(|(x, y)| x + y).collect();
        Ok(Scalar::from_poly(order, poly))
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Scalar {
        Scalar {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        self.try_mul(other).expect("order mismatch in mul")
    }

    pub fn try_mul(&self, other: &Scalar) -> Result<Scalar> {
        if self.is_zero() || other.is_zero() {
            return Ok(Scalar::zero());
        }
        let (order, a, b) = Scalar::promote(self, other)?;
        let mut conv = vec![BigRational::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let v = conv[i + j].clone() + x * y;
                conv[i + j] = v;
            }
        }
        Ok(Scalar::from_poly(order, conv))
    }

    /// Multiplicative inverse via the extended Euclidean algorithm in Q[x]
    /// modulo the cyclotomic polynomial.
    pub fn inv(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_rational() {
            return Ok(Scalar {
                order: 1,
                coeffs: vec![self.coeffs[0].recip()],
            });
        }
        let modulus: Vec<BigRational> = cyclotomic(self.order)
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect();
        // extended euclid: find s with a*s = gcd (which is a nonzero constant)
        let trim = |v: &mut Vec<BigRational>| {
            while v.len() > 1 && v.last().unwrap().is_zero() {
                v.pop();
            }
        };
        let mut r0 = modulus;
        let mut r1 = self.coeffs.clone();
        trim(&mut r1);
        let mut s0: Vec<BigRational> = vec![BigRational::zero()];
        let mut s1: Vec<BigRational> = vec![BigRational::one()];
        while !(r1.len() == 1 && r1[0].is_zero()) {
            // divide r0 by r1
            let mut q = vec![BigRational::zero(); r0.len().saturating_sub(r1.len()) + 1];
            let mut rem = r0.clone();
            let dlead = r1.last().unwrap().clone();
            while rem.len() >= r1.len() && !(rem.len() == 1 && rem[0].is_zero()) {
                let shift = rem.len() - r1.len();
                let c = rem.last().unwrap() / &dlead;
                q[shift] = &q[shift] + &c;
                for i in 0..r1.len() {
                    let v = rem[shift + i].clone() - &c * &r1[i];
                    rem[shift + i] = v;
                }
                trim(&mut rem);
                if rem.iter().all(|x| x.is_zero()) {
                    rem = vec![BigRational::zero()];
                }
            }
            // s2 = s0 - q*s1
            let mut qs1 = vec![BigRational::zero(); q.len() + s1.len() - 1];
            for (i, x) in q.iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                for (j, y) in s1.iter().enumerate() {
                    let v = qs1[i + j].clone() + x * y;
                    qs1[i + j] = v;
                }
            }
            let mut s2 = vec![BigRational::zero(); s0.len().max(qs1.len())];
            for (i, x) in s0.iter().enumerate() {
                s2[i] = &s2[i] + x;
            }
            for (i, x) in qs1.iter().enumerate() {
                s2[i] = &s2[i] - x;
            }
            trim(&mut s2);
            r0 = r1;
            r1 = rem;
            s0 = s1;
            s1 = s2;
        }
        // r0 is the gcd; it must be a nonzero constant since Phi_N is irreducible
        assert_eq!(r0.len(), 1, "cyclotomic polynomial not coprime to element");
        let g = r0[0].clone();
        let inv_coeffs: Vec<BigRational> = s0.iter().map(|c| c / &g).collect();
        Ok(Scalar::from_poly(self.order, inv_coeffs))
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar> {
        other.inv().and_then(|i| self.try_mul(&i))
    }

    pub fn pow(&self, e: i64) -> Result<Scalar> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = Scalar::one();
        for _ in 0..e.abs() {
            acc = acc.try_mul(&base)?;
        }
        Ok(acc)
    }

    /// Complex value under the embedding z |-> exp(2 pi i j / N).
    pub fn to_complex(&self, j: u32) -> Complex64 {
        let n = self.order as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, c) in self.coeffs.iter().enumerate() {
            let v = c.to_f64().unwrap_or(f64::NAN);
            let ang = 2.0 * std::f64::consts::PI * (j as f64) * (k as f64) / n;
            acc += Complex64::new(ang.cos(), ang.sin()) * v;
        }
        acc
    }

    /// Square root inside Q(zeta_N), if one exists. Deterministic sign:
    /// first nonzero coordinate positive. The candidate is reconstructed from
    /// the complex embeddings and then verified exactly; only exact squares
    /// are returned.
    pub fn sqrt_in_field(&self) -> Option<Scalar> {
        if self.is_zero() {
            return Some(Scalar::zero());
        }
        if let Some(r) = self.rational_part() {
            // fast path: rational square
            if !r.is_negative() {
                let (np, dp) = (r.numer().clone(), r.denom().clone());
                let sn = np.sqrt();
                let sd = dp.sqrt();
                if &sn * &sn == np && &sd * &sd == dp {
                    return Some(Scalar::from_rational(BigRational::new(sn, sd)));
                }
            }
            if self.order == 1 {
                return None;
            }
        }
        let order = self.order;
        let work = self.clone().normalize_order();
        let d = phi(order);
        let units: Vec<u32> = (1..=order).filter(|j| gcd(*j, order) == 1).collect();
        debug_assert_eq!(units.len(), d);
        // embeddings of the input
        let targets: Vec<Complex64> = units.iter().map(|&j| work.to_complex(j)).collect();
        let roots: Vec<Complex64> = targets.iter().map(|t| t.sqrt()).collect();
        // Vandermonde-like system V t = v with V[r][k] = zeta^{units[r]*k}
        let m: Vec<Vec<Complex64>> = units
            .iter()
            .map(|&j| {
                (0..d)
                    .map(|k| {
                        let ang =
                            2.0 * std::f64::consts::PI * (j as f64) * (k as f64) / (order as f64);
                        Complex64::new(ang.cos(), ang.sin())
                    })
                    .collect()
            })
            .collect();
        for mask in 0..(1u32 << d.saturating_sub(1)) {
            let mut v = roots.clone();
            for (idx, val) in v.iter_mut().enumerate().skip(1) {
                if mask & (1 << (idx - 1)) != 0 {
                    *val = -*val;
                }
            }
            if let Some(t) = solve_complex(&m, &v) {
                if let Some(coeffs) = t
                    .iter()
                    .map(|c| {
                        if c.im.abs() > 1e-7 {
                            None
                        } else {
                            reconstruct_rational(c.re)
                        }
                    })
                    .collect::<Option<Vec<BigRational>>>()
                {
                    let cand = Scalar::from_poly(order, coeffs);
                    if cand.mul(&cand) == work {
                        return Some(cand.sign_normalized());
                    }
                }
            }
        }
        None
    }

    fn sign_normalized(self) -> Scalar {
        for c in &self.coeffs {
            if c.is_positive() {
                return self;
            }
            if c.is_negative() {
                return self.neg();
            }
        }
        self
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn solve_complex(m: &[Vec<Complex64>], v: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = v.len();
    let mut a: Vec<Vec<Complex64>> = m.iter().map(|r| r.clone()).collect();
    let mut b = v.to_vec();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            a[i][col]
                .norm()
                .partial_cmp(&a[j][col].norm())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[piv][col].norm() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let p = a[col][col];
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = a[row][col] / p;
            for k in col..n {
                let v = a[col][k];
                a[row][k] -= f * v;
            }
            let bv = b[col];
            b[row] -= f * bv;
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Nearest rational with bounded denominator via continued fractions, with a
/// tight agreement check.
fn reconstruct_rational(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    let mut v = x;
    for _ in 0..40 {
        let a = v.floor();
        if a.abs() > 1e15 {
            return None;
        }
        let ai = a as i128;
        let (p2, q2) = (ai * p1 + p0, ai * q1 + q0);
        if q2 == 0 || q2.abs() > 1_000_000_000 {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let approx = p1 as f64 / q1 as f64;
        if (approx - x).abs() < 1e-9 * (1.0 + x.abs()) {
            return Some(BigRational::new(BigInt::from(p1), BigInt::from(q1)));
        }
        let frac = v - a;
        if frac.abs() < 1e-12 {
            break;
        }
        v = 1.0 / frac;
    }
    let approx = p1 as f64 / q1 as f64;
    if q1 != 0 && (approx - x).abs() < 1e-9 * (1.0 + x.abs()) {
        Some(BigRational::new(BigInt::from(p1), BigInt::from(q1)))
    } else {
        None
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (sign_str, abs) = if c.is_negative() {
                (if first { "-" } else { " - " }, -c)
            } else {
                (if first { "" } else { " + " }, c.clone())
            };
            write!(f, "{}", sign_str)?;
            if k == 0 {
                write!(f, "{}", abs)?;
            } else {
                write!(f, "{}*z^{}", abs, k)?;
            }
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(ord {})", self, self.order)
    }
}

/// Parse the scalar text syntax: sum of terms `r` or `r*z^k` (also bare `z^k`
/// and `z`), `r` a rational `p/q`. Terms may appear in any order and may be
/// joined by `+` or `-`.
pub fn parse_scalar(input: &str, order: u32) -> Result<Scalar> {
    let s: Vec<char> = input.chars().collect();
    let mut i = 0usize;
    let n = s.len();
    let skip_ws = |i: &mut usize| {
        while *i < n && s[*i].is_whitespace() {
            *i += 1;
        }
    };
    let parse_uint = |i: &mut usize| -> Result<BigInt> {
        let start = *i;
        while *i < n && s[*i].is_ascii_digit() {
            *i += 1;
        }
        if *i == start {
            return Err(Error::Parse { pos: start, msg: "expected digit".into() });
        }
        let txt: String = s[start..*i].iter().collect();
        txt.parse::<BigInt>()
            .map_err(|e| Error::Parse { pos: start, msg: e.to_string() })
    };
    let d = phi(order);
    let mut acc = vec![BigRational::zero(); d.max(1)];
    let mut sign = BigInt::one();
    skip_ws(&mut i);
    if i < n && (s[i] == '+' || s[i] == '-') {
        if s[i] == '-' {
            sign = -sign;
        }
        i += 1;
    }
    loop {
        skip_ws(&mut i);
        if i >= n {
            return Err(Error::Parse { pos: i, msg: "expected term".into() });
        }
        // term: [rational] [* z [^k]]  or  z [^k]
        let mut coeff = BigRational::one();
        let mut have_coeff = false;
        if s[i].is_ascii_digit() {
            let p = parse_uint(&mut i)?;
            let mut r = BigRational::from_integer(p);
            skip_ws(&mut i);
            if i < n && s[i] == '/' {
                i += 1;
                skip_ws(&mut i);
                let q = parse_uint(&mut i)?;
                if q.is_zero() {
                    return Err(Error::Parse { pos: i, msg: "zero denominator".into() });
                }
                r = r / BigRational::from_integer(q);
            }
            coeff = r;
            have_coeff = true;
        }
        let mut k: usize = 0;
        let mut have_z = false;
        skip_ws(&mut i);
        if have_coeff && i < n && s[i] == '*' {
            i += 1;
            skip_ws(&mut i);
        }
        if i < n && s[i] == 'z' {
            i += 1;
            have_z = true;
            k = 1;
            skip_ws(&mut i);
            if i < n && s[i] == '^' {
                i += 1;
                skip_ws(&mut i);
                let e = parse_uint(&mut i)?;
                k = e.to_usize().ok_or(Error::Parse { pos: i, msg: "exponent too large".into() })?;
            }
        }
        if !have_coeff && !have_z {
            return Err(Error::Parse { pos: i, msg: "expected rational or z".into() });
        }
        let kk = k % order as usize;
        let term = Scalar::root_of_unity(order, kk as i64);
        let signed = coeff * BigRational::from_integer(sign.clone());
        for (idx, c) in term.coeffs.iter().enumerate() {
            if !c.is_zero() {
                let slot = if term.order == 1 { 0 } else { idx };
                acc[slot] = &acc[slot] + &(c * &signed);
            }
        }
        skip_ws(&mut i);
        if i >= n {
            break;
        }
        match s[i] {
            '+' => {
                sign = BigInt::one();
                i += 1;
            }
            '-' => {
                sign = -BigInt::one();
                i += 1;
            }
            c => {
                return Err(Error::Parse { pos: i, msg: format!("unexpected character '{}'", c) });
            }
        }
    }
    Ok(Scalar::from_poly(order, acc))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_add() {
        let a = Scalar::from_ratio(1, 2);
        let b = Scalar::from_ratio(1, 3);
        assert_eq!(a.add(&b), Scalar::from_ratio(5, 6));
    }

    #[test]
    fn zeta4_squares_to_minus_one() {
        let z = Scalar::root_of_unity(4, 1);
        assert_eq!(z.mul(&z), Scalar::from_int(-1));
    }

    #[test]
    fn zeta8_sum_squares_to_two() {
        let z = Scalar::root_of_unity(8, 1);
        let zi = Scalar::root_of_unity(8, 7);
        let s = z.add(&zi);
        assert_eq!(s.mul(&s), Scalar::from_int(2));
    }

    #[test]
    fn sqrt_examples() {
        assert_eq!(Scalar::one().sqrt_in_field(), Some(Scalar::one()));
        assert_eq!(
            Scalar::from_ratio(9, 4).sqrt_in_field(),
            Some(Scalar::from_ratio(3, 2))
        );
        // 2 is not a square in Q itself
        assert!(Scalar::from_int(2).sqrt_in_field().is_none());
        // ... but (z + z^7)^2 = 2 in Q(zeta_8)
        let zpz = Scalar::root_of_unity(8, 1).add(&Scalar::root_of_unity(8, 7));
        assert_eq!(zpz.mul(&zpz), Scalar::from_int(2));
    }

    #[test]
    fn sqrt_in_order() {
        // sqrt of 2 viewed inside Q(zeta_8)
        let r = sqrt_in(&Scalar::from_int(2), 8).unwrap();
        assert_eq!(r.mul(&r), Scalar::from_int(2));
        // deterministic sign: first nonzero coordinate positive
        assert!(r.coeffs()[1].is_positive() || r.coeffs()[0].is_positive());
        // absent in Q(zeta_4)
        assert!(sqrt_in(&Scalar::from_int(2), 4).is_none());
        // sqrt of zeta_4 in Q(zeta_8) is zeta_8 (up to sign rule)
        let z4in8 = Scalar::root_of_unity(8, 2);
        let s = sqrt_in(&z4in8, 8).unwrap();
        assert_eq!(s.mul(&s), z4in8);
    }

    #[test]
    fn inverse_roundtrip() {
        let a = Scalar::root_of_unity(12, 5)
            .add(&Scalar::from_ratio(3, 7))
            .add(&Scalar::root_of_unity(12, 1));
        let inv = a.inv().unwrap();
        assert!(a.mul(&inv).is_one());
    }

    #[test]
    fn order_mismatch() {
        let a = Scalar::root_of_unity(4, 1);
        let b = Scalar::root_of_unity(3, 1);
        assert!(a.try_add(&b).is_err());
    }

    #[test]
    fn parse_print_roundtrip() {
        let order = 8;
        let s = parse_scalar("1/2 + 3/2*z^3 - z", order).unwrap();
        let txt = s.to_string();
        let back = parse_scalar(&txt, order).unwrap();
        assert_eq!(s, back);
        assert_eq!(parse_scalar("3/2*z^3+1/2", order).unwrap(), parse_scalar("1/2 + 3/2*z^3", order).unwrap());
    }

    #[test]
    fn field_axioms_random() {
        // lightweight deterministic pseudo-random sampling
        let mut seed = 1234567u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) % 13) as i64 - 6
        };
        for _ in 0..25 {
            let mk = |next: &mut dyn FnMut() -> i64| {
                let mut poly = vec![BigRational::zero(); 4];
                for p in poly.iter_mut() {
                    *p = BigRational::from_integer(BigInt::from(next()));
                }
                Scalar::from_poly(8, poly)
            };
            let a = mk(&mut next);
            let b = mk(&mut next);
            let c = mk(&mut next);
            assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            if !a.is_zero() {
                assert!(a.mul(&a.inv().unwrap()).is_one());
            }
            let sq = a.mul(&a);
            if let Some(r) = sqrt_in(&sq, 8) {
                assert_eq!(r.mul(&r), sq);
            } else {
                panic!("square of an element must have a square root");
            }
        }
    }
}

/// Square root of `a` viewed inside Q(zeta_order); `a` may be rational.
pub fn sqrt_in(a: &Scalar, order: u32) -> Option<Scalar> {
    let v = a.embed(order).ok()?;
    if v.is_rational() && order > 1 {
        // lift to the requested order so non-rational roots are searched
        let mut c = vec![BigRational::zero(); phi(order)];
        c[0] = v.coeffs()[0].clone();
        let lifted = Scalar { order, coeffs: c };
        return lifted.sqrt_in_field();
    }
    v.sqrt_in_field()
}
