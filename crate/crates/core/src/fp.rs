//! Arithmetic in the prime field F_p.

use serde::{Deserialize, Serialize};

/// A prime field, identified by its characteristic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fp {
    p: u32,
}

impl Fp {
    /// Returns `None` unless `p` is prime.
    pub fn new(p: u32) -> Option<Fp> {
        if is_prime(p as u64) {
            Some(Fp { p })
        } else {
            None
        }
    }

    pub fn p(self) -> u32 {
        self.p
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    pub fn pow(self, mut a: u32, mut e: u64) -> u32 {
        let mut r = 1 % self.p;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(self, a: u32) -> u32 {
        assert!(a % self.p != 0, "inverse of zero in F_{}", self.p);
        self.pow(a, self.p as u64 - 2)
    }

    /// Reduces a signed integer into `0..p`.
    #[inline]
    pub fn reduce(self, a: i64) -> u32 {
        a.rem_euclid(self.p as i64) as u32
    }

    /// The symmetric representative in `(-p/2, p/2]`, used for display.
    pub fn signed(self, a: u32) -> i64 {
        if a as u64 * 2 > self.p as u64 {
            a as i64 - self.p as i64
        } else {
            a as i64
        }
    }

    /// Binomial coefficient `C(n, k)` reduced mod p via Lucas' theorem.
    /// Zero whenever `k < 0`, `n < 0` or `k > n`.
    pub fn binomial(self, n: i64, k: i64) -> u32 {
        if n < 0 || k < 0 || k > n {
            return 0;
        }
        let p = self.p as i64;
        let (mut n, mut k) = (n, k);
        let mut r = 1u32;
        while n > 0 || k > 0 {
            let (ni, ki) = (n % p, k % p);
            if ki > ni {
                return 0;
            }
            r = self.mul(r, small_binomial(ni as u64, ki as u64, self));
            n /= p;
            k /= p;
        }
        r
    }
}

fn small_binomial(n: u64, k: u64, f: Fp) -> u32 {
    let mut num = 1u32;
    let mut den = 1u32;
    for i in 0..k {
        num = f.mul(num, ((n - i) % f.p as u64) as u32);
        den = f.mul(den, ((i + 1) % f.p as u64) as u32);
    }
    f.mul(num, f.inv(den))
}

pub fn is_prime(n: u64) -> bool {
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
