//! Irreducible dimensions and Frobenius–Schur indicators, extracted from
//! the class-multiplication coefficients by exact arithmetic modulo a
//! prime that splits the character field.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::groups::FiniteGroup;
use crate::scalar::Rational;

const MAX_SEEDS: u64 = 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CharacterError {
    #[error("common eigenspaces did not split into lines after {0} random combinations")]
    SplittingFailure(u64),
    #[error("{what} residue {residue} mod {prime} has no lift in range")]
    LiftOutOfRange { what: &'static str, residue: u64, prime: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IrrepDatum {
    pub dim: u64,
    /// +1 real, 0 complex, -1 quaternionic
    pub fs: i8,
}

/// `M_i[j][k] = #{(x, y) in C_i x C_j : x y = r_k}` with `r_k` the least
/// element of class `k`.
pub fn class_matrices(g: &FiniteGroup) -> Vec<Vec<Vec<u64>>> {
    let classes = g.conjugacy_classes();
    let idx = g.class_index();
    let r = classes.len();
    let mut m = vec![vec![vec![0u64; r]; r]; r];
    for (i, ci) in classes.iter().enumerate() {
        for &x in ci {
            for (k, ck) in classes.iter().enumerate() {
                // y = x^-1 r_k determines the class j
                let y = g.mul(g.inv(x), ck[0]);
                m[i][idx[y]][k] += 1;
            }
        }
    }
    m
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

/// Smallest prime `p = 1 (mod exponent)` with `p > 2|G|`.
pub fn splitting_prime(g: &FiniteGroup) -> u64 {
    let e = g.exponent() as u64;
    let floor = 2 * g.order() as u64;
    let mut p = floor / e * e + 1;
    while p <= floor || !is_prime(p) {
        p += e;
    }
    p
}

#[derive(Clone, Copy)]
struct Fp(u64);

impl Fp {
    fn mul(self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.0 as u128) as u64
    }
    fn add(self, a: u64, b: u64) -> u64 {
        (a + b) % self.0
    }
    fn sub(self, a: u64, b: u64) -> u64 {
        (a + self.0 - b) % self.0
    }
    fn pow(self, mut a: u64, mut e: u64) -> u64 {
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }
    fn inv(self, a: u64) -> u64 {
        self.pow(a, self.0 - 2)
    }
    fn reduce(self, n: u64) -> u64 {
        n % self.0
    }

    /// Basis of the right nullspace of `a` (rows x cols), as column vectors.
    fn nullspace(self, a: &[Vec<u64>], cols: usize) -> Vec<Vec<u64>> {
        let mut m: Vec<Vec<u64>> = a.to_vec();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..cols {
            let Some(p) = (row..m.len()).find(|&r| m[r][col] != 0) else { continue };
            m.swap(row, p);
            let inv = self.inv(m[row][col]);
            for x in m[row].iter_mut() {
                *x = self.mul(*x, inv);
            }
            for r in 0..m.len() {
                if r != row && m[r][col] != 0 {
                    let f = m[r][col];
                    for c in 0..cols {
                        let sub = self.mul(f, m[row][c]);
                        m[r][c] = self.sub(m[r][c], sub);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![0; cols];
                v[f] = 1;
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = self.sub(0, m[r][f]);
                }
                v
            })
            .collect()
    }
}

/// Splits `space` (column basis, `r x d` as a list of d vectors) into the
/// eigenspaces of `m`. Returns `None` if `m` is not diagonalizable on it.
fn split_space(fp: Fp, m: &[Vec<u64>], space: &[Vec<u64>]) -> Option<Vec<Vec<Vec<u64>>>> {
    let r = m.len();
    let d = space.len();
    // image of each basis vector
    let images: Vec<Vec<u64>> = space
        .iter()
        .map(|v| (0..r).map(|i| (0..r).fold(0, |acc, k| fp.add(acc, fp.mul(m[i][k], v[k])))).collect())
        .collect();
    let mut parts = Vec::new();
    let mut found = 0;
    for lambda in 0..fp.0 {
        // (M - lambda) B as an r x d matrix
        let a: Vec<Vec<u64>> =
            (0..r).map(|i| (0..d).map(|c| fp.sub(images[c][i], fp.mul(lambda, space[c][i]))).collect()).collect();
        let null = fp.nullspace(&a, d);
        if null.is_empty() {
            continue;
        }
        found += null.len();
        parts.push(
            null.iter()
                .map(|y| (0..r).map(|i| (0..d).fold(0, |acc, c| fp.add(acc, fp.mul(y[c], space[c][i])))).collect())
                .collect(),
        );
        if found == d {
            break;
        }
    }
    (found == d).then_some(parts)
}

pub fn irreducible_data(g: &FiniteGroup) -> Result<Vec<IrrepDatum>, CharacterError> {
    irreducible_data_with_seed(g, 0)
}

/// As [`irreducible_data`], with the seed for the random splitting
/// combinations made explicit. The result does not depend on it.
pub fn irreducible_data_with_seed(g: &FiniteGroup, seed: u64) -> Result<Vec<IrrepDatum>, CharacterError> {
    let p = splitting_prime(g);
    let fp = Fp(p);
    let classes = g.conjugacy_classes();
    let idx = g.class_index();
    let r = classes.len();
    let mats: Vec<Vec<Vec<u64>>> = class_matrices(g)
        .into_iter()
        .map(|m| m.into_iter().map(|row| row.into_iter().map(|x| fp.reduce(x)).collect()).collect())
        .collect();

    let identity_space: Vec<Vec<u64>> = (0..r).map(|i| (0..r).map(|k| u64::from(i == k)).collect()).collect();
    let mut spaces = vec![identity_space];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attempts = 0;
    while spaces.iter().any(|s| s.len() > 1) {
        if attempts >= MAX_SEEDS {
            return Err(CharacterError::SplittingFailure(attempts));
        }
        attempts += 1;
        let coeffs: Vec<u64> = (0..r).map(|_| rng.gen_range(0..p)).collect();
        let combo: Vec<Vec<u64>> = (0..r)
            .map(|j| {
                (0..r).map(|k| (0..r).fold(0, |acc, i| fp.add(acc, fp.mul(coeffs[i], mats[i][j][k])))).collect()
            })
            .collect();
        let mut next = Vec::new();
        for s in spaces {
            if s.len() == 1 {
                next.push(s);
                continue;
            }
            match split_space(fp, &combo, &s) {
                Some(parts) => next.extend(parts),
                None => return Err(CharacterError::SplittingFailure(attempts)),
            }
        }
        spaces = next;
    }

    let id_class = idx[g.identity()];
    let order = g.order() as u64;
    let sizes: Vec<u64> = classes.iter().map(|c| c.len() as u64).collect();
    let inverse_class: Vec<usize> = classes.iter().map(|c| idx[g.inv(c[0])]).collect();
    let mut q = vec![0u64; r];
    for w in 0..g.order() {
        q[idx[g.mul(w, w)]] += 1;
    }
    let mut out = Vec::with_capacity(r);
    for s in spaces {
        let w = &s[0];
        if w[id_class] == 0 {
            return Err(CharacterError::LiftOutOfRange { what: "identity eigenvalue", residue: 0, prime: p });
        }
        let norm = fp.inv(w[id_class]);
        let omega: Vec<u64> = w.iter().map(|&x| fp.mul(x, norm)).collect();
        let denom = (0..r).fold(0, |acc, i| {
            fp.add(acc, fp.mul(fp.mul(omega[i], omega[inverse_class[i]]), fp.inv(fp.reduce(sizes[i]))))
        });
        if denom == 0 {
            return Err(CharacterError::LiftOutOfRange { what: "dimension", residue: 0, prime: p });
        }
        let d2 = fp.mul(fp.reduce(order), fp.inv(denom));
        let dim = (1..=order).take_while(|d| d * d <= order).find(|d| d * d == d2).ok_or(
            CharacterError::LiftOutOfRange { what: "squared dimension", residue: d2, prime: p },
        )?;
        let sum = (0..r).fold(0, |acc, i| {
            let chi = fp.mul(fp.mul(fp.reduce(dim), omega[i]), fp.inv(fp.reduce(sizes[i])));
            fp.add(acc, fp.mul(fp.reduce(q[i]), chi))
        });
        let nu = fp.mul(sum, fp.inv(fp.reduce(order)));
        let fs = match nu {
            0 => 0,
            1 => 1,
            x if x == p - 1 => -1,
            residue => return Err(CharacterError::LiftOutOfRange { what: "indicator", residue, prime: p }),
        };
        out.push(IrrepDatum { dim, fs });
    }
    out.sort();
    Ok(out)
}

fn signed_power(base: i64, exp: i64) -> Rational {
    let b = Rational::from_integer(BigInt::from(base));
    if exp >= 0 {
        num_traits::pow(b, exp as usize)
    } else {
        Rational::one() / num_traits::pow(b, exp.unsigned_abs() as usize)
    }
}

/// `sum_lambda dim^chi`.
pub fn mednykh_sum(data: &[IrrepDatum], chi: i64) -> Rational {
    data.iter().fold(Rational::zero(), |acc, d| acc + signed_power(d.dim as i64, chi))
}

/// `sum_{fs=+1} dim^chi + sum_{fs=-1} (-dim)^chi`.
pub fn frobenius_schur_sum(data: &[IrrepDatum], chi: i64) -> Rational {
    data.iter().fold(Rational::zero(), |acc, d| match d.fs {
        1 => acc + signed_power(d.dim as i64, chi),
        -1 => acc + signed_power(-(d.dim as i64), chi),
        _ => acc,
    })
}

/// `dim:fs` pairs, comma separated.
pub fn format_data(data: &[IrrepDatum]) -> String {
    data.iter().map(|d| format!("{}:{}", d.dim, d.fs)).collect::<Vec<_>>().join(",")
}
