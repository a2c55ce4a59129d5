//! Integer polynomials in the parameter `t`, Sturm sequences, and real root
//! isolation with exact rational endpoints.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rational::{self, Rational};

/// Polynomial with integer coefficients, lowest degree first, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamPoly {
    coeffs: Vec<BigInt>,
}

impl ParamPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        ParamPoly { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        ParamPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::new(vec![c.into()])
    }

    /// The polynomial `t`.
    pub fn t() -> Self {
        Self::from_i64s(&[0, 1])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn eval(&self, t: &Rational) -> Rational {
        // Horner on numerator/denominator to keep it integral
        let (p, q) = (t.numer(), t.denom());
        let mut acc = BigInt::zero();
        let mut qpow = BigInt::one();
        for c in self.coeffs.iter().rev() {
            acc = acc * p + c * &qpow;
            qpow *= q;
        }
        let deg = self.coeffs.len().saturating_sub(1);
        Rational::new(acc, num_traits::pow(q.clone(), deg))
    }

    pub fn sign_at(&self, t: &Rational) -> Ordering {
        let (p, q) = (t.numer(), t.denom());
        let mut acc = BigInt::zero();
        let mut qpow = BigInt::one();
        for c in self.coeffs.iter().rev() {
            acc = acc * p + c * &qpow;
            qpow *= q;
        }
        acc.cmp(&BigInt::zero())
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// gcd of the coefficients (0 for the zero polynomial).
    pub fn content(&self) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::zero(), |acc, c| acc.gcd(c))
    }

    /// Divided by its content, with positive leading coefficient.
    pub fn primitive(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut g = self.content();
        if self.leading().is_negative() {
            g = -g;
        }
        Self::new(self.coeffs.iter().map(|c| c / &g).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    fn to_rational(&self) -> Vec<Rational> {
        self.coeffs.iter().map(|c| Rational::from_integer(c.clone())).collect()
    }

    fn from_rational(coeffs: &[Rational]) -> Self {
        let den = rational::common_denominator(coeffs);
        Self::new(
            coeffs
                .iter()
                .map(|c| (c * Rational::from_integer(den.clone())).to_integer())
                .collect(),
        )
    }

    /// Primitive gcd (positive leading coefficient); `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.to_rational();
        let mut b = other.to_rational();
        trim(&mut a);
        trim(&mut b);
        while !b.is_empty() {
            let r = rem(&a, &b);
            a = b;
            b = r;
        }
        Self::from_rational(&a).primitive()
    }

    /// Exact quotient when `divisor` divides `self` over the integers.
    pub fn div_exact(&self, divisor: &Self) -> Option<Self> {
        if divisor.is_zero() {
            return None;
        }
        let (q, r) = divmod(&self.to_rational(), &divisor.to_rational());
        if !r.is_empty() || q.iter().any(|c| !c.is_integer()) {
            return None;
        }
        Some(Self::new(q.into_iter().map(|c| c.to_integer()).collect()))
    }

    /// Square-free part (primitive).
    pub fn squarefree(&self) -> Self {
        if self.is_constant() {
            return self.primitive();
        }
        let g = self.gcd(&self.derivative());
        let (q, _) = divmod(&self.to_rational(), &g.to_rational());
        Self::from_rational(&q).primitive()
    }

    /// Rational roots, ascending, each listed once.
    pub fn rational_roots(&self) -> Vec<Rational> {
        if self.is_constant() {
            return Vec::new();
        }
        let sf = self.squarefree();
        let lc = sf.leading().abs();
        let denominators = divisors(&lc);
        let bound = cauchy_bound(&sf);
        let whole = Interval::closed(-bound.clone(), bound);
        let width = Rational::new(BigInt::one(), &lc * &lc * BigInt::from(2));
        let mut out = Vec::new();
        for root in isolate_roots(&sf, &whole, &width) {
            if root.lo == root.hi {
                out.push(root.lo);
                continue;
            }
            // a root p/q in lowest terms of a primitive polynomial has q | lc
            for q in &denominators {
                let qr = Rational::from_integer(q.clone());
                let p = (&root.lo * &qr).ceil();
                let cand = p / &qr;
                if cand <= root.hi && sf.sign_at(&cand) == Ordering::Equal {
                    out.push(cand);
                    break;
                }
            }
        }
        out
    }

    /// The linear factor `q t - p` vanishing at `root = p/q`.
    pub fn from_rational_root(root: &Rational) -> Self {
        Self::new(vec![-root.numer().clone(), root.denom().clone()])
    }

    /// A nontrivial factor over the integers, by Kronecker's method.
    ///
    /// Gives up (returns `None`) once more than `budget` candidates would be
    /// tried, so `None` does not prove irreducibility.
    pub fn proper_factor(&self, budget: usize) -> Option<Self> {
        let deg = self.degree()?;
        if deg < 2 {
            return None;
        }
        if let Some(x) = self.rational_roots().first() {
            return Some(Self::from_rational_root(x));
        }
        let limit = BigInt::from(10u64.pow(10));
        let mut points: Vec<(BigInt, Vec<BigInt>)> = Vec::new();
        for k in 0..(4 * deg as i64 + 8) {
            let x = BigInt::from(if k % 2 == 0 { k / 2 } else { -(k + 1) / 2 });
            let v = self.eval(&Rational::from_integer(x.clone())).to_integer().abs();
            if v <= limit {
                points.push((x, divisors(&v)));
            }
        }
        points.sort_by_key(|(_, d)| d.len());
        for d in 1..=deg / 2 {
            if points.len() < d + 1 {
                return None;
            }
            let pts = &points[..d + 1];
            let mut count = 1usize;
            for (i, (_, divs)) in pts.iter().enumerate() {
                let choices = if i == 0 { divs.len() } else { 2 * divs.len() };
                count = count.checked_mul(choices).filter(|&c| c <= budget)?;
            }
            let mut idx = vec![0usize; d + 1];
            'combos: loop {
                let values: Vec<BigInt> = pts
                    .iter()
                    .zip(&idx)
                    .enumerate()
                    .map(|(i, ((_, divs), &j))| {
                        if i == 0 || j < divs.len() {
                            divs[j % divs.len()].clone()
                        } else {
                            -divs[j - divs.len()].clone()
                        }
                    })
                    .collect();
                let xs: Vec<&BigInt> = pts.iter().map(|(x, _)| x).collect();
                if let Some(f) = interpolate(&xs, &values) {
                    if f.degree() == Some(d) && self.div_exact(&f).is_some() {
                        return Some(f.primitive());
                    }
                }
                for (i, (_, divs)) in pts.iter().enumerate() {
                    let choices = if i == 0 { divs.len() } else { 2 * divs.len() };
                    idx[i] += 1;
                    if idx[i] < choices {
                        continue 'combos;
                    }
                    idx[i] = 0;
                }
                break;
            }
        }
        None
    }
}

/// The integer polynomial of degree < `xs.len()` through the given points.
fn interpolate(xs: &[&BigInt], ys: &[BigInt]) -> Option<ParamPoly> {
    let mut acc = vec![Rational::zero(); xs.len()];
    for (i, yi) in ys.iter().enumerate() {
        // basis polynomial prod_{j != i} (t - x_j) / (x_i - x_j)
        let mut basis = vec![Rational::one()];
        let mut denom = Rational::one();
        for (j, xj) in xs.iter().enumerate() {
            if i == j {
                continue;
            }
            let xj = Rational::from_integer((*xj).clone());
            let mut next = vec![Rational::zero(); basis.len() + 1];
            for (k, c) in basis.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * &xj;
            }
            basis = next;
            denom *= Rational::from_integer(xs[i].clone()) - xj;
        }
        let scale = Rational::from_integer(yi.clone()) / denom;
        for (k, c) in basis.iter().enumerate() {
            acc[k] += c * &scale;
        }
    }
    if acc.iter().any(|c| !c.is_integer()) {
        return None;
    }
    Some(ParamPoly::new(acc.into_iter().map(|c| c.to_integer()).collect()))
}

impl std::ops::Add for &ParamPoly {
    type Output = ParamPoly;
    fn add(self, o: &ParamPoly) -> ParamPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        ParamPoly::new(
            (0..n)
                .map(|i| {
                    self.coeffs.get(i).cloned().unwrap_or_default()
                        + o.coeffs.get(i).cloned().unwrap_or_default()
                })
                .collect(),
        )
    }
}

impl std::ops::Sub for &ParamPoly {
    type Output = ParamPoly;
    fn sub(self, o: &ParamPoly) -> ParamPoly {
        self + &(-o)
    }
}

impl std::ops::Neg for &ParamPoly {
    type Output = ParamPoly;
    fn neg(self) -> ParamPoly {
        ParamPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl std::ops::Mul for &ParamPoly {
    type Output = ParamPoly;
    fn mul(self, o: &ParamPoly) -> ParamPoly {
        if self.is_zero() || o.is_zero() {
            return ParamPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ParamPoly::new(out)
    }
}

impl fmt::Display for ParamPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else if first { "" } else { "+" };
            let mag = c.abs();
            let body = match (i, mag.is_one()) {
                (0, _) => mag.to_string(),
                (1, true) => "t".to_string(),
                (1, false) => format!("{mag}t"),
                (_, true) => format!("t^{i}"),
                (_, false) => format!("{mag}t^{i}"),
            };
            write!(f, "{sign}{body}")?;
            first = false;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsePolyError(pub String);

impl fmt::Display for ParsePolyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cannot parse polynomial {:?}", self.0)
    }
}

impl std::error::Error for ParsePolyError {}

/// Parses sums of monomials such as `2t^3-3t^2-10t+12`, `-t`, `4*t^2`.
/// Coefficients must be integers.
impl FromStr for ParamPoly {
    type Err = ParsePolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParsePolyError(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let compact = compact
            .strip_prefix('(')
            .and_then(|x| x.strip_suffix(')'))
            .unwrap_or(&compact)
            .to_string();
        if compact.is_empty() {
            return Err(err());
        }
        let mut coeffs: Vec<BigInt> = Vec::new();
        let mut terms = Vec::new();
        let mut start = 0;
        let bytes = compact.as_bytes();
        for i in 1..bytes.len() {
            if (bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1] != b'^' {
                terms.push(&compact[start..i]);
                start = i;
            }
        }
        terms.push(&compact[start..]);
        for term in terms {
            let (neg, body) = match term.strip_prefix('-') {
                Some(b) => (true, b),
                None => (false, term.strip_prefix('+').unwrap_or(term)),
            };
            let (coef, power) = match body.find('t') {
                None => (BigInt::from_str(body).map_err(|_| err())?, 0usize),
                Some(pos) => {
                    let head = body[..pos].trim_end_matches('*');
                    let coef = if head.is_empty() {
                        BigInt::one()
                    } else {
                        BigInt::from_str(head).map_err(|_| err())?
                    };
                    let tail = &body[pos + 1..];
                    let power = if tail.is_empty() {
                        1
                    } else {
                        tail.strip_prefix('^')
                            .ok_or_else(err)?
                            .parse::<usize>()
                            .map_err(|_| err())?
                    };
                    (coef, power)
                }
            };
            if coeffs.len() <= power {
                coeffs.resize(power + 1, BigInt::zero());
            }
            coeffs[power] += if neg { -coef } else { coef };
        }
        Ok(ParamPoly::new(coeffs))
    }
}

// ---------------------------------------------------------------------------
// rational-coefficient helpers

fn trim(p: &mut Vec<Rational>) {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn divmod(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut r = a.to_vec();
    trim(&mut r);
    let mut b = b.to_vec();
    trim(&mut b);
    let db = b.len() - 1;
    let lead = b[db].clone();
    let mut q = vec![Rational::zero(); r.len().saturating_sub(db).max(1)];
    while r.len() > db && !r.is_empty() {
        let shift = r.len() - 1 - db;
        let f = r.last().unwrap() / &lead;
        for (i, c) in b.iter().enumerate() {
            r[shift + i] -= &f * c;
        }
        q[shift] = f;
        r.pop();
        trim(&mut r);
    }
    trim(&mut q);
    (q, r)
}

fn rem(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    divmod(a, b).1
}

fn eval_rat(p: &[Rational], t: &Rational) -> Rational {
    p.iter().rev().fold(Rational::zero(), |acc, c| acc * t + c)
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = BigInt::one();
    while &d * &d <= *n {
        if (n % &d).is_zero() {
            small.push(d.clone());
            let other = n / &d;
            if other != d {
                large.push(other);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// All real roots lie in `[-B, B]`.
fn cauchy_bound(p: &ParamPoly) -> Rational {
    let lc = p.leading().abs();
    let max = p.coeffs[..p.coeffs.len() - 1]
        .iter()
        .map(|c| c.abs())
        .max()
        .unwrap_or_default();
    Rational::new(max, lc) + Rational::one()
}

/// Sturm chain of a nonzero polynomial.
pub(crate) struct Sturm {
    chain: Vec<Vec<Rational>>,
}

impl Sturm {
    pub(crate) fn new(p: &ParamPoly) -> Self {
        let mut chain = vec![p.to_rational()];
        let d = p.derivative();
        if !d.is_zero() {
            chain.push(d.to_rational());
            loop {
                let k = chain.len();
                let r = rem(&chain[k - 2], &chain[k - 1]);
                if r.is_empty() {
                    break;
                }
                chain.push(r.into_iter().map(|c| -c).collect());
            }
        }
        Sturm { chain }
    }

    fn variations(&self, x: &Rational) -> usize {
        let mut count = 0;
        let mut prev: Option<bool> = None;
        for p in &self.chain {
            let v = eval_rat(p, x);
            if v.is_zero() {
                continue;
            }
            let pos = v.is_positive();
            if prev.is_some_and(|q| q != pos) {
                count += 1;
            }
            prev = Some(pos);
        }
        count
    }

    /// Distinct roots in the open interval `(a, b)`; requires `p(a) != 0 != p(b)`.
    pub(crate) fn count_open(&self, a: &Rational, b: &Rational) -> usize {
        self.variations(a).saturating_sub(self.variations(b))
    }
}

/// Rational interval with independently open or closed ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn closed(lo: Rational, hi: Rational) -> Self {
        Interval { lo, hi, lo_closed: true, hi_closed: true }
    }

    pub fn open(lo: Rational, hi: Rational) -> Self {
        Interval { lo, hi, lo_closed: false, hi_closed: false }
    }

    /// `(lo, hi]`
    pub fn left_open(lo: Rational, hi: Rational) -> Self {
        Interval { lo, hi, lo_closed: false, hi_closed: true }
    }

    /// `[lo, hi)`
    pub fn right_open(lo: Rational, hi: Rational) -> Self {
        Interval { lo, hi, lo_closed: true, hi_closed: false }
    }

    pub fn point(x: Rational) -> Self {
        Self::closed(x.clone(), x)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_empty(&self) -> bool {
        match self.lo.cmp(&self.hi) {
            Ordering::Greater => true,
            Ordering::Equal => !(self.lo_closed && self.hi_closed),
            Ordering::Less => false,
        }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let above = if self.lo_closed { x >= &self.lo } else { x > &self.lo };
        let below = if self.hi_closed { x <= &self.hi } else { x < &self.hi };
        above && below
    }

    /// A rational strictly inside (or the point itself).
    pub fn sample(&self) -> Rational {
        if self.is_point() {
            self.lo.clone()
        } else {
            (&self.lo + &self.hi) / Rational::from_integer(2.into())
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            rational::to_string(&self.lo),
            rational::to_string(&self.hi),
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

/// Closed interval `[lo, hi]` holding exactly one root; `lo == hi` for an
/// exact rational root. When `lo < hi` neither endpoint is a root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootInterval {
    pub lo: Rational,
    pub hi: Rational,
}

impl RootInterval {
    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(2.into())
    }

    /// Narrows the interval to at most `width` while keeping the root of `p`
    /// inside.
    pub fn refine(&self, p: &ParamPoly, width: &Rational) -> RootInterval {
        if self.is_exact() {
            return self.clone();
        }
        let sturm = Sturm::new(p);
        let (mut lo, mut hi) = (self.lo.clone(), self.hi.clone());
        while &hi - &lo > *width {
            let mid = (&lo + &hi) / Rational::from_integer(2.into());
            if p.sign_at(&mid) == Ordering::Equal {
                return RootInterval { lo: mid.clone(), hi: mid };
            }
            if sturm.count_open(&lo, &mid) == 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        RootInterval { lo, hi }
    }
}

impl fmt::Display for RootInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", rational::to_string(&self.lo), rational::to_string(&self.hi))
    }
}

/// One isolating interval of width at most `width` per distinct real root of
/// `p` in `interval`, ascending.
///
/// Panics if `p` is the zero polynomial or `width <= 0`.
pub fn isolate_roots(p: &ParamPoly, interval: &Interval, width: &Rational) -> Vec<RootInterval> {
    assert!(!p.is_zero(), "cannot isolate roots of the zero polynomial");
    assert!(width.is_positive(), "width must be positive");
    let mut out = Vec::new();
    if interval.is_empty() || p.is_constant() {
        return out;
    }
    let base = p.squarefree();
    let mut q = base.clone();
    let (lo, hi) = (interval.lo.clone(), interval.hi.clone());
    let ends = if lo == hi { vec![(&lo, true)] } else { vec![(&lo, interval.lo_closed), (&hi, interval.hi_closed)] };
    for (end, closed) in ends {
        if q.sign_at(end) == Ordering::Equal {
            if closed {
                out.push(RootInterval { lo: end.clone(), hi: end.clone() });
            }
            q = q.div_exact(&ParamPoly::from_rational_root(end)).expect("linear factor divides");
        }
    }
    if lo < hi {
        isolate_open(&base, &q, lo, hi, width, &mut out);
    }
    out.sort_by(|x, y| x.lo.cmp(&y.lo));
    out
}

/// Roots of `q` in `(a, b)`, where `q(a) != 0 != q(b)`. Reported intervals
/// never end on a root of `base`.
fn isolate_open(base: &ParamPoly, q: &ParamPoly, a: Rational, b: Rational, width: &Rational, out: &mut Vec<RootInterval>) {
    if q.is_constant() {
        return;
    }
    let sturm = Sturm::new(q);
    let is_root = |x: &Rational| base.sign_at(x) == Ordering::Equal;
    let mut stack = vec![(a, b)];
    while let Some((a, b)) = stack.pop() {
        let count = sturm.count_open(&a, &b);
        if count == 0 {
            continue;
        }
        if count == 1 && &b - &a <= *width && !is_root(&a) && !is_root(&b) {
            out.push(RootInterval { lo: a, hi: b });
            continue;
        }
        let mid = (&a + &b) / Rational::from_integer(2.into());
        if q.sign_at(&mid) == Ordering::Equal {
            out.push(RootInterval { lo: mid.clone(), hi: mid.clone() });
            let reduced = q.div_exact(&ParamPoly::from_rational_root(&mid)).expect("linear factor divides");
            isolate_open(base, &reduced, a, mid.clone(), width, out);
            isolate_open(base, &reduced, mid, b, width, out);
            continue;
        }
        stack.push((mid.clone(), b));
        stack.push((a, mid));
    }
}
