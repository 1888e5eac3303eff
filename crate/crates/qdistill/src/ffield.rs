//! Exact arithmetic over GF(q²) = GF(p^{2v}) together with its GF(q)
//! subfield, the absolute trace down to GF(p), and the skew-symmetric inner
//! product that decides whether two error operators commute.
//!
//! Elements are indexed by their coefficient vector over GF(p) in the
//! polynomial basis, packed base-p, so 0 and 1 are always the additive and
//! multiplicative identities.  Every element factors uniquely as `a + b·ω`
//! with `a, b` in the subfield GF(q) and `ω` the chosen primitive element;
//! `a` is the X part and `b` the Z part of the corresponding error operator.

use crate::error::{Error, Result};

/// An element of GF(q²), identified by its table index in `[0, q²)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement(pub u16);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    #[inline]
    pub fn index(self) -> u16 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// GF(4) error labels under the canonical `a + b·ω` symbol table:
/// 0 ↔ I, 1 ↔ X, ω ↔ Z, 1+ω ↔ Y.
pub const GF4_I: u16 = 0;
pub const GF4_X: u16 = 1;
pub const GF4_Z: u16 = 2;
pub const GF4_Y: u16 = 3;

/// Largest supported field: q² ≤ 4096.
pub const MAX_ORDER: u32 = 4096;

/// Skew product for the canonical GF(4) table, branch-free.  Bit 0 of a
/// symbol is its X part, bit 1 its Z part.
#[inline]
pub const fn gf4_skew(u: u16, w: u16) -> u8 {
    (((u & 1) & (w >> 1)) ^ ((u >> 1) & (w & 1))) as u8
}

/// Addition in GF(4) (characteristic 2).
#[inline]
pub const fn gf4_add(u: u16, w: u16) -> u16 {
    u ^ w
}

/// Arithmetic tables for GF(q²) and its GF(q) subfield.
pub struct FieldSpec {
    p: u32,
    v: u32,
    q: u32,
    order: u32,
    modulus: Vec<u32>,
    omega: FieldElement,
    exp: Vec<u16>,
    log: Vec<u16>,
    subfield: Vec<u16>,
    decomp: Vec<(u16, u16)>,
    trace_tbl: Vec<u8>,
    skew_tbl: Vec<u8>,
}

impl std::fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FieldSpec")
            .field("p", &self.p)
            .field("v", &self.v)
            .field("q", &self.q)
            .field("order", &self.order)
            .field("modulus", &self.modulus)
            .field("omega", &self.omega)
            .finish()
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
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

/// Dense polynomial arithmetic over GF(p), little-endian coefficients.
mod poly {
    pub fn trim(c: &mut Vec<u32>) {
        while c.last() == Some(&0) {
            c.pop();
        }
    }

    pub fn rem(mut a: Vec<u32>, b: &[u32], p: u32) -> Vec<u32> {
        // b monic
        debug_assert_eq!(*b.last().unwrap(), 1);
        while a.len() >= b.len() {
            let lead = *a.last().unwrap();
            if lead != 0 {
                let shift = a.len() - b.len();
                for (i, &bc) in b.iter().enumerate() {
                    let idx = shift + i;
                    a[idx] = (a[idx] + p - (lead * bc) % p) % p;
                }
            }
            a.pop();
        }
        trim(&mut a);
        a
    }

    pub fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u32; a.len() + b.len() - 1];
        for (i, &ac) in a.iter().enumerate() {
            if ac == 0 {
                continue;
            }
            for (j, &bc) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + ac * bc) % p;
            }
        }
        trim(&mut out);
        out
    }

    pub fn from_index(mut idx: u32, p: u32) -> Vec<u32> {
        let mut out = Vec::new();
        while idx > 0 {
            out.push(idx % p);
            idx /= p;
        }
        out
    }

    pub fn to_index(c: &[u32], p: u32) -> u32 {
        let mut idx = 0;
        for &d in c.iter().rev() {
            idx = idx * p + d;
        }
        idx
    }
}

impl FieldSpec {
    /// The canonical GF(4) table (q = 2) used by every binary stabilizer code
    /// in this crate.  Modulus x² + x + 1, ω = x, symbol table I,X,Z,Y.
    pub fn gf4() -> FieldSpec {
        let spec = FieldSpec::new(2, 1).expect("GF(4) construction cannot fail");
        debug_assert_eq!(spec.omega.index(), GF4_Z);
        spec
    }

    /// Build GF(q²) for q = p^v.  Limited to q² ≤ 4096.
    pub fn new(p: u32, v: u32) -> Result<FieldSpec> {
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("p = {p} is not prime")));
        }
        if v == 0 {
            return Err(Error::InvalidField("v must be at least 1".into()));
        }
        let m = 2 * v;
        let order = (p as u64).checked_pow(m).filter(|&o| o <= MAX_ORDER as u64);
        let order = match order {
            Some(o) => o as u32,
            None => {
                return Err(Error::InvalidField(format!(
                    "q² = {p}^{m} exceeds the supported maximum {MAX_ORDER}"
                )))
            }
        };
        let q = (p as u32).pow(v);

        let modulus = Self::find_irreducible(p, m as usize)?;
        let (exp, log, omega) = Self::build_tables(p, order, &modulus)?;

        let mut spec = FieldSpec {
            p,
            v,
            q,
            order,
            modulus,
            omega: FieldElement(omega),
            exp,
            log,
            subfield: Vec::new(),
            decomp: Vec::new(),
            trace_tbl: Vec::new(),
            skew_tbl: Vec::new(),
        };
        spec.build_subfield()?;
        spec.build_trace();
        spec.build_skew();
        Ok(spec)
    }

    /// Build the field for a given subfield order q (q must be a prime power).
    pub fn for_q(q: u32) -> Result<FieldSpec> {
        let p = (2..=q)
            .find(|&d| q % d == 0)
            .ok_or_else(|| Error::InvalidField(format!("q = {q} has no prime factor")))?;
        let mut v = 0;
        let mut rest = q;
        while rest % p == 0 {
            rest /= p;
            v += 1;
        }
        if rest != 1 {
            return Err(Error::InvalidField(format!("q = {q} is not a prime power")));
        }
        FieldSpec::new(p, v)
    }

    fn find_irreducible(p: u32, m: usize) -> Result<Vec<u32>> {
        let combos = (p as u64).pow(m as u32);
        for low in 0..combos {
            let mut cand = poly::from_index(low as u32, p);
            cand.resize(m, 0);
            cand.push(1); // monic x^m + ...
            if Self::poly_is_irreducible(&cand, p) {
                return Ok(cand);
            }
        }
        Err(Error::InvalidField(format!(
            "no irreducible polynomial of degree {m} over GF({p})"
        )))
    }

    fn poly_is_irreducible(f: &[u32], p: u32) -> bool {
        let m = f.len() - 1;
        if f[0] == 0 {
            return false; // divisible by x
        }
        // Trial division by all monic polynomials of degree 1..=m/2.
        for d in 1..=(m / 2) {
            let combos = (p as u64).pow(d as u32);
            for low in 0..combos {
                let mut g = poly::from_index(low as u32, p);
                g.resize(d, 0);
                g.push(1);
                if poly::rem(f.to_vec(), &g, p).is_empty() {
                    return false;
                }
            }
        }
        true
    }

    fn build_tables(p: u32, order: u32, modulus: &[u32]) -> Result<(Vec<u16>, Vec<u16>, u16)> {
        let mul_idx = |a: u32, b: u32| -> u32 {
            let pa = poly::from_index(a, p);
            let pb = poly::from_index(b, p);
            poly::to_index(&poly::rem(poly::mul(&pa, &pb, p), modulus, p), p)
        };
        let pow_idx = |mut base: u32, mut e: u32| -> u32 {
            let mut acc = 1u32;
            while e > 0 {
                if e & 1 == 1 {
                    acc = mul_idx(acc, base);
                }
                base = mul_idx(base, base);
                e >>= 1;
            }
            acc
        };
        let group = order - 1;
        let factors = prime_factors(group);
        let omega = (2..order)
            .find(|&cand| factors.iter().all(|&f| pow_idx(cand, group / f) != 1))
            .ok_or_else(|| Error::InvalidField("no primitive element found".into()))?;

        let mut exp = vec![0u16; group as usize];
        let mut log = vec![0u16; order as usize];
        let mut acc = 1u32;
        for k in 0..group {
            exp[k as usize] = acc as u16;
            log[acc as usize] = k as u16;
            acc = mul_idx(acc, omega);
        }
        if acc != 1 {
            return Err(Error::InvalidField("primitive element order mismatch".into()));
        }
        Ok((exp, log, omega as u16))
    }

    fn build_subfield(&mut self) -> Result<()> {
        // GF(q)* is the unique subgroup of order q−1: powers of ω^(q+1).
        let mut sub = vec![0u16];
        let step = self.q + 1;
        for k in 0..(self.q - 1) {
            sub.push(self.exp[((k * step) % (self.order - 1)) as usize]);
        }
        sub.sort_unstable();
        sub.dedup();
        if sub.len() != self.q as usize {
            return Err(Error::InvalidField("subfield enumeration failed".into()));
        }

        // a + b·ω over all subfield pairs must hit every element exactly once.
        let mut decomp = vec![(u16::MAX, u16::MAX); self.order as usize];
        for &a in &sub {
            for &b in &sub {
                let e = self.add_raw(a, self.mul_raw(b, self.omega.0));
                if decomp[e as usize].0 != u16::MAX {
                    return Err(Error::InvalidField("a + b·ω decomposition not unique".into()));
                }
                decomp[e as usize] = (a, b);
            }
        }
        if decomp.iter().any(|&(a, _)| a == u16::MAX) {
            return Err(Error::InvalidField("a + b·ω decomposition not onto".into()));
        }
        self.subfield = sub;
        self.decomp = decomp;
        Ok(())
    }

    fn build_trace(&mut self) {
        // Absolute trace GF(q) → GF(p): x + x^p + … + x^(p^(v−1)).
        let mut tbl = vec![u8::MAX; self.order as usize];
        for &x in &self.subfield {
            let mut acc = 0u16;
            let mut pw = x;
            for _ in 0..self.v {
                acc = self.add_raw(acc, pw);
                pw = self.pow_raw(pw, self.p);
            }
            debug_assert!((acc as u32) < self.p, "trace landed outside GF(p)");
            tbl[x as usize] = acc as u8;
        }
        self.trace_tbl = tbl;
    }

    fn build_skew(&mut self) {
        let n = self.order as usize;
        let mut tbl = vec![0u8; n * n];
        for u in 0..n {
            let (a, b) = self.decomp[u];
            for w in 0..n {
                let (c, d) = self.decomp[w];
                let ad = self.mul_raw(a, d);
                let bc = self.mul_raw(b, c);
                let diff = self.add_raw(ad, self.neg_raw(bc));
                tbl[u * n + w] = self.trace_tbl[diff as usize];
            }
        }
        self.skew_tbl = tbl;
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn v(&self) -> u32 {
        self.v
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }

    /// Field size q².
    #[inline]
    pub fn order(&self) -> u32 {
        self.order
    }

    /// The fixed primitive element ω of GF(q²).
    #[inline]
    pub fn omega(&self) -> FieldElement {
        self.omega
    }

    /// Coefficients (little-endian) of the irreducible modulus.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn element(&self, index: u32) -> Result<FieldElement> {
        if index < self.order {
            Ok(FieldElement(index as u16))
        } else {
            Err(Error::InvalidField(format!(
                "index {index} out of range for field of order {}",
                self.order
            )))
        }
    }

    /// All elements of the GF(q) subfield, ascending by index.
    pub fn subfield_elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        self.subfield.iter().map(|&i| FieldElement(i))
    }

    #[inline]
    pub fn in_subfield(&self, x: FieldElement) -> bool {
        self.trace_tbl[x.0 as usize] != u8::MAX
    }

    #[inline]
    pub(crate) fn add_raw(&self, a: u16, b: u16) -> u16 {
        if self.p == 2 {
            return a ^ b;
        }
        let (mut a, mut b) = (a as u32, b as u32);
        let mut out = 0u32;
        let mut place = 1u32;
        while a > 0 || b > 0 {
            out += ((a + b) % self.p) * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        out as u16
    }

    #[inline]
    pub(crate) fn neg_raw(&self, a: u16) -> u16 {
        if self.p == 2 {
            return a;
        }
        let mut a = a as u32;
        let mut out = 0u32;
        let mut place = 1u32;
        while a > 0 {
            out += ((self.p - a % self.p) % self.p) * place;
            a /= self.p;
            place *= self.p;
        }
        out as u16
    }

    #[inline]
    pub(crate) fn mul_raw(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            return 0;
        }
        let g = self.order - 1;
        let s = (self.log[a as usize] as u32 + self.log[b as usize] as u32) % g;
        self.exp[s as usize]
    }

    pub(crate) fn pow_raw(&self, a: u16, e: u32) -> u16 {
        if a == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        let g = self.order - 1;
        let s = (self.log[a as usize] as u64 * e as u64) % g as u64;
        self.exp[s as usize]
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(self.add_raw(a.0, b.0))
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(self.add_raw(a.0, self.neg_raw(b.0)))
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        FieldElement(self.neg_raw(a.0))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(self.mul_raw(a.0, b.0))
    }

    pub fn pow(&self, a: FieldElement, e: u32) -> FieldElement {
        FieldElement(self.pow_raw(a.0, e))
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.is_zero() {
            return Err(Error::InverseOfZero);
        }
        let g = self.order - 1;
        let s = (g - self.log[a.0 as usize] as u32) % g;
        Ok(FieldElement(self.exp[s as usize]))
    }

    /// Decompose x = a + b·ω with a, b ∈ GF(q); a is the X part and b the
    /// Z part of the corresponding error operator.
    #[inline]
    pub fn decompose(&self, x: FieldElement) -> (FieldElement, FieldElement) {
        let (a, b) = self.decomp[x.0 as usize];
        (FieldElement(a), FieldElement(b))
    }

    pub fn compose(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        debug_assert!(self.in_subfield(a) && self.in_subfield(b));
        FieldElement(self.add_raw(a.0, self.mul_raw(b.0, self.omega.0)))
    }

    /// Absolute trace GF(q) → GF(p); the argument must lie in the subfield.
    #[inline]
    pub fn trace(&self, x: FieldElement) -> u8 {
        let t = self.trace_tbl[x.0 as usize];
        assert!(t != u8::MAX, "trace argument {} not in GF(q)", x.0);
        t
    }

    /// Skew-symmetric inner product (a+bω | c+dω) = Tr(ad − bc) ∈ GF(p).
    /// The operators for u and w commute exactly when this is zero.
    #[inline]
    pub fn skew(&self, u: FieldElement, w: FieldElement) -> u8 {
        self.skew_tbl[u.0 as usize * self.order as usize + w.0 as usize]
    }

    #[inline]
    pub(crate) fn skew_raw(&self, u: u16, w: u16) -> u8 {
        self.skew_tbl[u as usize * self.order as usize + w as usize]
    }
}
