//! The residue field F_{p^f} as lookup tables.
//!
//! Elements are encoded as integers `0..p^f` whose base-p digits are the
//! coefficients of a polynomial in `X` (constant term first) reduced modulo
//! the defining polynomial.

/// Finite field of order `p^f` realized by multiplication and inversion tables.
#[derive(Debug, Clone)]
pub struct ResidueField {
    p: u32,
    f: u32,
    order: u32,
    /// Monic irreducible polynomial of degree `f`, coefficients `h_0..h_f` with `h_f = 1`.
    modulus: Vec<u32>,
    mul: Vec<u32>,
    inv: Vec<u32>,
}

impl ResidueField {
    pub fn new(p: u32, f: u32) -> Self {
        let order = p.pow(f);
        let modulus = smallest_irreducible(p, f);
        let n = order as usize;
        let mut mul = vec![0u32; n * n];
        for a in 0..order {
            for b in a..order {
                let c = poly_mul_mod(&encode_poly(a, p, f), &encode_poly(b, p, f), &modulus, p);
                let c = decode_poly(&c, p);
                mul[a as usize * n + b as usize] = c;
                mul[b as usize * n + a as usize] = c;
            }
        }
        let mut inv = vec![0u32; n];
        for a in 1..order {
            for b in 1..order {
                if mul[a as usize * n + b as usize] == 1 {
                    inv[a as usize] = b;
                    break;
                }
            }
        }
        Self { p, f, order, modulus, mul, inv }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.mul[a as usize * self.order as usize + b as usize]
    }

    /// Multiplicative inverse; `inv(0)` is 0.
    pub fn inv(&self, a: u32) -> u32 {
        self.inv[a as usize]
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        let mut out = 0;
        let mut scale = 1;
        let (mut a, mut b) = (a, b);
        for _ in 0..self.f {
            out += ((a % self.p + b % self.p) % self.p) * scale;
            a /= self.p;
            b /= self.p;
            scale *= self.p;
        }
        out
    }

    pub fn neg(&self, a: u32) -> u32 {
        let mut out = 0;
        let mut scale = 1;
        let mut a = a;
        for _ in 0..self.f {
            out += ((self.p - a % self.p) % self.p) * scale;
            a /= self.p;
            scale *= self.p;
        }
        out
    }
}

fn encode_poly(a: u32, p: u32, f: u32) -> Vec<u32> {
    let mut a = a;
    (0..f)
        .map(|_| {
            let c = a % p;
            a /= p;
            c
        })
        .collect()
}

fn decode_poly(c: &[u32], p: u32) -> u32 {
    c.iter().rev().fold(0, |acc, &d| acc * p + d)
}

fn poly_mul_mod(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let f = modulus.len() - 1;
    let mut prod = vec![0u64; 2 * f.max(1)];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    for d in (f..prod.len()).rev() {
        let c = prod[d];
        if c == 0 {
            continue;
        }
        prod[d] = 0;
        for i in 0..f {
            let sub = c * modulus[i] as u64 % p as u64;
            prod[d - f + i] = (prod[d - f + i] + p as u64 - sub) % p as u64;
        }
    }
    prod.truncate(f);
    prod.into_iter().map(|x| x as u32).collect()
}

/// Smallest monic irreducible polynomial of degree `f` over F_p, ordered by
/// the encoding `h_0 + h_1 p + ... + h_{f-1} p^{f-1}`.
pub(crate) fn smallest_irreducible(p: u32, f: u32) -> Vec<u32> {
    if f == 1 {
        return vec![0, 1];
    }
    let count = p.pow(f);
    for code in 0..count {
        let mut h = encode_poly(code, p, f);
        h.push(1);
        if is_irreducible(&h, p) {
            return h;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists over F_p")
}

fn is_irreducible(h: &[u32], p: u32) -> bool {
    let deg = h.len() - 1;
    for d in 1..=deg / 2 {
        for code in 0..p.pow(d as u32) {
            let mut g: Vec<u32> = encode_poly(code, p, d as u32);
            g.push(1);
            if poly_rem(h, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn poly_rem(a: &[u32], g: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u64> = a.iter().map(|&x| x as u64).collect();
    let dg = g.len() - 1;
    let p = p as u64;
    for d in (dg..r.len()).rev() {
        let c = r[d] % p;
        if c == 0 {
            continue;
        }
        for i in 0..=dg {
            let sub = c * g[i] as u64 % p;
            r[d - dg + i] = (r[d - dg + i] + p - sub) % p;
        }
    }
    r.truncate(dg);
    r.into_iter().map(|x| x as u32).collect()
}
