//! Finite groups by Cayley table, class functions, and surface-group
//! homomorphism counts by convolution.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::scalar::{int, Rational};

/// Largest order for which associativity is checked on every triple.
const FULL_ASSOC_LIMIT: usize = 64;
const SAMPLED_TRIPLES: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroupError {
    #[error("Cayley table is empty")]
    Empty,
    #[error("Cayley table row {0} has wrong length or out-of-range entries")]
    Malformed(usize),
    #[error("Cayley table has no two-sided identity")]
    NoIdentity,
    #[error("element {0} has no inverse")]
    NoInverse(usize),
    #[error("Cayley table is not associative at ({0}, {1}, {2})")]
    NotAssociative(usize, usize, usize),
    #[error("unknown group name {0:?}")]
    UnknownName(String),
    #[error("unsupported group parameters: {0}")]
    Unsupported(String),
    #[error("surface parameter rejected: {0}")]
    BadSurface(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupSpec {
    Cyclic(usize),
    /// Symmetries of the regular `n`-gon, order `2n`.
    Dihedral(usize),
    Symmetric(usize),
    Alternating(usize),
    Quaternion8,
    Product(Box<GroupSpec>, Box<GroupSpec>),
    CayleyTable { name: String, table: Vec<Vec<usize>> },
}

impl FromStr for GroupSpec {
    type Err = GroupError;

    /// Names like `Z6`, `D4`, `S3`, `A4`, `Q8`, `Z2xZ2`.
    fn from_str(s: &str) -> Result<Self, GroupError> {
        let s = s.trim();
        if let Some((a, b)) = s.split_once(['x', '×']) {
            return Ok(GroupSpec::Product(Box::new(a.parse()?), Box::new(b.parse()?)));
        }
        if s == "Q8" {
            return Ok(GroupSpec::Quaternion8);
        }
        let unknown = || GroupError::UnknownName(s.to_string());
        let (head, digits) = s.split_at(s.find(|c: char| c.is_ascii_digit()).ok_or_else(unknown)?);
        let n: usize = digits.parse().map_err(|_| unknown())?;
        match head {
            "Z" | "C" => Ok(GroupSpec::Cyclic(n)),
            "D" => Ok(GroupSpec::Dihedral(n)),
            "S" => Ok(GroupSpec::Symmetric(n)),
            "A" => Ok(GroupSpec::Alternating(n)),
            _ => Err(unknown()),
        }
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Cyclic(n) => write!(f, "Z{n}"),
            GroupSpec::Dihedral(n) => write!(f, "D{n}"),
            GroupSpec::Symmetric(n) => write!(f, "S{n}"),
            GroupSpec::Alternating(n) => write!(f, "A{n}"),
            GroupSpec::Quaternion8 => f.write_str("Q8"),
            GroupSpec::Product(a, b) => write!(f, "{a}x{b}"),
            GroupSpec::CayleyTable { name, .. } => f.write_str(name),
        }
    }
}

/// Group file format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupJson {
    pub order: usize,
    pub table: Vec<Vec<usize>>,
    #[serde(default)]
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    name: String,
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

pub fn build_group(spec: &GroupSpec) -> Result<FiniteGroup, GroupError> {
    let name = spec.to_string();
    match spec {
        GroupSpec::Cyclic(n) => {
            if *n == 0 {
                return Err(GroupError::Unsupported("cyclic group of order 0".into()));
            }
            let table = (0..*n).map(|a| (0..*n).map(|b| (a + b) % n).collect()).collect();
            FiniteGroup::from_table(name, table)
        }
        GroupSpec::Dihedral(n) => {
            if *n == 0 {
                return Err(GroupError::Unsupported("dihedral group D0".into()));
            }
            let n = *n;
            // index f*n + i  <->  r^i s^f
            let table = (0..2 * n)
                .map(|x| {
                    let (fa, ia) = (x / n, x % n);
                    (0..2 * n)
                        .map(|y| {
                            let (fb, ib) = (y / n, y % n);
                            let i = if fa == 0 { (ia + ib) % n } else { (ia + n - ib) % n };
                            ((fa + fb) % 2) * n + i
                        })
                        .collect()
                })
                .collect();
            FiniteGroup::from_table(name, table)
        }
        GroupSpec::Symmetric(n) => permutation_group(name, *n, false),
        GroupSpec::Alternating(n) => permutation_group(name, *n, true),
        GroupSpec::Quaternion8 => {
            // index 2*u + s  <->  (-1)^s * unit_u, units 1, i, j, k
            let unit_mul = |a: usize, b: usize| -> (usize, bool) {
                const T: [[(usize, bool); 4]; 4] = [
                    [(0, false), (1, false), (2, false), (3, false)],
                    [(1, false), (0, true), (3, false), (2, true)],
                    [(2, false), (3, true), (0, true), (1, false)],
                    [(3, false), (2, false), (1, true), (0, true)],
                ];
                T[a][b]
            };
            let table = (0..8)
                .map(|x| {
                    (0..8)
                        .map(|y| {
                            let (u, neg) = unit_mul(x / 2, y / 2);
                            let sign = (x % 2 == 1) ^ (y % 2 == 1) ^ neg;
                            2 * u + usize::from(sign)
                        })
                        .collect()
                })
                .collect();
            FiniteGroup::from_table(name, table)
        }
        GroupSpec::Product(a, b) => {
            let ga = build_group(a)?;
            let gb = build_group(b)?;
            let nb = gb.order();
            let table = (0..ga.order() * nb)
                .map(|x| {
                    (0..ga.order() * nb)
                        .map(|y| ga.mul(x / nb, y / nb) * nb + gb.mul(x % nb, y % nb))
                        .collect()
                })
                .collect();
            FiniteGroup::from_table(name, table)
        }
        GroupSpec::CayleyTable { name, table } => FiniteGroup::from_table(name.clone(), table.clone()),
    }
}

fn permutation_group(name: String, n: usize, even_only: bool) -> Result<FiniteGroup, GroupError> {
    if n == 0 || n > 5 {
        return Err(GroupError::Unsupported(format!("permutation degree {n} (supported 1..=5)")));
    }
    let mut perms = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        if !even_only || parity(&p) == 0 {
            perms.push(p.clone());
        }
        if !next_permutation(&mut p) {
            break;
        }
    }
    let index = |q: &[usize]| perms.iter().position(|x| x == q).expect("closed under composition");
    // (a*b)(x) = a(b(x))
    let table = perms
        .iter()
        .map(|a| {
            perms
                .iter()
                .map(|b| index(&b.iter().map(|&x| a[x]).collect::<Vec<_>>()))
                .collect()
        })
        .collect();
    FiniteGroup::from_table(name, table)
}

fn parity(p: &[usize]) -> usize {
    let mut inv = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    inv % 2
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

impl FiniteGroup {
    /// Validates a raw Cayley table: shape, identity, inverses, associativity
    /// (exhaustive up to order 64, seeded sample above).
    pub fn from_table(name: String, table: Vec<Vec<usize>>) -> Result<Self, GroupError> {
        let n = table.len();
        if n == 0 {
            return Err(GroupError::Empty);
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != n || row.iter().any(|&x| x >= n) {
                return Err(GroupError::Malformed(i));
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or(GroupError::NoIdentity)?;
        let inverse = (0..n)
            .map(|x| {
                (0..n)
                    .find(|&y| table[x][y] == identity && table[y][x] == identity)
                    .ok_or(GroupError::NoInverse(x))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let assoc = |a: usize, b: usize, c: usize| table[table[a][b]][c] == table[a][table[b][c]];
        if n <= FULL_ASSOC_LIMIT {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if !assoc(a, b, c) {
                            return Err(GroupError::NotAssociative(a, b, c));
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            for _ in 0..SAMPLED_TRIPLES {
                let (a, b, c) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
                if !assoc(a, b, c) {
                    return Err(GroupError::NotAssociative(a, b, c));
                }
            }
        }
        Ok(FiniteGroup { name, table, identity, inverse })
    }

    pub fn from_json(json: &GroupJson) -> Result<Self, GroupError> {
        if json.table.len() != json.order {
            return Err(GroupError::Malformed(json.table.len()));
        }
        let name = if json.name.is_empty() { format!("G{}", json.order) } else { json.name.clone() };
        FiniteGroup::from_table(name, json.table.clone())
    }

    pub fn to_json(&self) -> GroupJson {
        GroupJson { order: self.order(), table: self.table.clone(), name: self.name.clone() }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn conjugate(&self, g: usize, w: usize) -> usize {
        self.mul(self.mul(g, w), self.inv(g))
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn exponent(&self) -> usize {
        (0..self.order()).map(|a| self.element_order(a)).fold(1, num_integer::lcm)
    }

    /// Classes ordered by least element; each class sorted.
    pub fn conjugacy_classes(&self) -> Vec<Vec<usize>> {
        let n = self.order();
        let mut seen = vec![false; n];
        let mut classes = Vec::new();
        for w in 0..n {
            if seen[w] {
                continue;
            }
            let mut class: Vec<usize> = (0..n).map(|g| self.conjugate(g, w)).collect();
            class.sort_unstable();
            class.dedup();
            for &x in &class {
                seen[x] = true;
            }
            classes.push(class);
        }
        classes
    }

    /// `class_of[w]` = index of the conjugacy class containing `w`.
    pub fn class_index(&self) -> Vec<usize> {
        let mut idx = vec![0; self.order()];
        for (c, class) in self.conjugacy_classes().iter().enumerate() {
            for &w in class {
                idx[w] = c;
            }
        }
        idx
    }
}

/// An element-indexed exact function, expected to be constant on classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassFunction {
    pub values: Vec<Rational>,
}

impl ClassFunction {
    pub fn delta_identity(g: &FiniteGroup) -> Self {
        let mut values = vec![Rational::zero(); g.order()];
        values[g.identity()] = int(1);
        ClassFunction { values }
    }

    pub fn is_class_function(&self, g: &FiniteGroup) -> bool {
        (0..g.order()).all(|x| (0..g.order()).all(|w| self.values[g.conjugate(x, w)] == self.values[w]))
    }

    pub fn at(&self, w: usize) -> &Rational {
        &self.values[w]
    }

    pub fn total(&self) -> Rational {
        self.values.iter().fold(Rational::zero(), |a, b| a + b)
    }
}

/// `d(c) = #{(a, b) : a b a^-1 b^-1 = c}`.
pub fn commutator_distribution(g: &FiniteGroup) -> ClassFunction {
    let n = g.order();
    let mut counts = vec![0u64; n];
    for a in 0..n {
        for b in 0..n {
            let c = g.mul(g.mul(a, b), g.mul(g.inv(a), g.inv(b)));
            counts[c] += 1;
        }
    }
    ClassFunction { values: counts.into_iter().map(|c| int(c as i64)).collect() }
}

/// `s(c) = #{a : a^2 = c}`.
pub fn square_distribution(g: &FiniteGroup) -> ClassFunction {
    let mut counts = vec![0u64; g.order()];
    for a in 0..g.order() {
        counts[g.mul(a, a)] += 1;
    }
    ClassFunction { values: counts.into_iter().map(|c| int(c as i64)).collect() }
}

/// `(f * h)(c) = sum_{u v = c} f(u) h(v)`.
pub fn convolve(f: &ClassFunction, h: &ClassFunction, g: &FiniteGroup) -> ClassFunction {
    let n = g.order();
    let mut values = vec![Rational::zero(); n];
    for u in 0..n {
        if f.values[u].is_zero() {
            continue;
        }
        for v in 0..n {
            if h.values[v].is_zero() {
                continue;
            }
            values[g.mul(u, v)] += &f.values[u] * &h.values[v];
        }
    }
    ClassFunction { values }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Surface {
    Orientable { genus: u32 },
    NonOrientable { crosscaps: u32 },
}

impl Surface {
    pub fn euler_characteristic(&self) -> i64 {
        match *self {
            Surface::Orientable { genus } => 2 - 2 * i64::from(genus),
            Surface::NonOrientable { crosscaps } => 2 - i64::from(crosscaps),
        }
    }
}

/// `|Hom(pi_1(S), G)|` as a convolution power evaluated at the identity.
pub fn hom_count(g: &FiniteGroup, surface: Surface) -> Result<BigInt, GroupError> {
    let (dist, power) = match surface {
        Surface::Orientable { genus } => (commutator_distribution(g), genus),
        Surface::NonOrientable { crosscaps: 0 } => {
            return Err(GroupError::BadSurface("cross-cap number must be at least 1".into()))
        }
        Surface::NonOrientable { crosscaps } => (square_distribution(g), crosscaps),
    };
    let mut acc = ClassFunction::delta_identity(g);
    for _ in 0..power {
        acc = convolve(&acc, &dist, g);
    }
    let value = acc.at(g.identity());
    debug_assert!(value.is_integer());
    Ok(value.to_integer())
}

/// Number of elements with `a^2 = 1`, identity included.
pub fn involution_count(g: &FiniteGroup) -> usize {
    (0..g.order()).filter(|&a| g.mul(a, a) == g.identity()).count()
}

pub fn hom_count_u64(g: &FiniteGroup, surface: Surface) -> Result<u64, GroupError> {
    hom_count(g, surface)?
        .to_u64()
        .ok_or_else(|| GroupError::Unsupported("homomorphism count overflows u64".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(name: &str) -> FiniteGroup {
        build_group(&name.parse().unwrap()).unwrap()
    }

    /// Direct count of 2g-tuples (orientable) or k-tuples (non-orientable).
    fn brute_hom_count(g: &FiniteGroup, surface: Surface) -> u64 {
        let n = g.order();
        let (len, orientable) = match surface {
            Surface::Orientable { genus } => (2 * genus as usize, true),
            Surface::NonOrientable { crosscaps } => (crosscaps as usize, false),
        };
        let mut count = 0;
        let mut tuple = vec![0usize; len];
        loop {
            let mut acc = g.identity();
            if orientable {
                for pair in tuple.chunks(2) {
                    let (a, b) = (pair[0], pair[1]);
                    acc = g.mul(acc, g.mul(g.mul(a, b), g.mul(g.inv(a), g.inv(b))));
                }
            } else {
                for &a in &tuple {
                    acc = g.mul(acc, g.mul(a, a));
                }
            }
            if acc == g.identity() {
                count += 1;
            }
            let mut i = 0;
            while i < len {
                tuple[i] += 1;
                if tuple[i] < n {
                    break;
                }
                tuple[i] = 0;
                i += 1;
            }
            if i == len {
                break;
            }
        }
        count
    }

    #[test]
    fn named_orders() {
        for (name, order) in [("Z2", 2), ("S3", 6), ("Q8", 8), ("D4", 8), ("A4", 12), ("S4", 24), ("Z2xZ2", 4), ("S5", 120)] {
            assert_eq!(group(name).order(), order, "{name}");
        }
    }

    #[test]
    fn class_sizes() {
        let sizes = |name: &str| group(name).conjugacy_classes().iter().map(Vec::len).collect::<Vec<_>>();
        assert_eq!(sizes("S3"), vec![1, 3, 2]);
        let mut q8 = sizes("Q8");
        q8.sort_unstable();
        assert_eq!(q8, vec![1, 1, 2, 2, 2]);
        assert!(sizes("Z6").iter().all(|&s| s == 1));
        assert_eq!(sizes("S4").len(), 5);
        assert_eq!(sizes("A4").len(), 4);
        assert_eq!(sizes("D4").len(), 5);
    }

    #[test]
    fn rejects_bad_tables() {
        assert_eq!(FiniteGroup::from_table("x".into(), vec![]), Err(GroupError::Empty));
        assert_eq!(
            FiniteGroup::from_table("x".into(), vec![vec![0, 1], vec![1, 1]]),
            Err(GroupError::NoInverse(1))
        );
        assert_eq!(
            FiniteGroup::from_table("x".into(), vec![vec![1, 0], vec![0, 0]]),
            Err(GroupError::NoIdentity)
        );
        // a Latin square with identity 0 that is not associative
        let t = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(matches!(FiniteGroup::from_table("x".into(), t), Err(GroupError::NotAssociative(..))));
        assert!(matches!("Y7".parse::<GroupSpec>(), Err(GroupError::UnknownName(_))));
    }

    #[test]
    fn distributions() {
        let s3 = group("S3");
        let d = commutator_distribution(&s3);
        assert_eq!(d.at(s3.identity()), &int(18));
        assert_eq!(d.total(), int(36));
        let z6 = group("Z6");
        let dz = commutator_distribution(&z6);
        assert_eq!(dz.at(z6.identity()), &int(36));
        let q8 = group("Q8");
        let s = square_distribution(&q8);
        assert_eq!(s.at(q8.identity()), &int(2));
        assert_eq!(s.at(1), &int(6)); // index 1 is -1
        assert_eq!(s.total(), int(8));
        let z2 = group("Z2");
        assert_eq!(square_distribution(&z2).at(0), &int(2));
    }

    #[test]
    fn distributions_are_class_functions() {
        for name in ["S3", "Q8", "D4", "A4", "S4"] {
            let g = group(name);
            assert!(commutator_distribution(&g).is_class_function(&g), "{name}");
            assert!(square_distribution(&g).is_class_function(&g), "{name}");
        }
    }

    #[test]
    fn convolution_identities() {
        let z2 = group("Z2");
        let s = square_distribution(&z2);
        assert_eq!(convolve(&ClassFunction::delta_identity(&z2), &s, &z2), s);
        assert_eq!(convolve(&s, &s, &z2).at(0), &int(4));
        let s3 = group("S3");
        let (a, b, c) = (commutator_distribution(&s3), square_distribution(&s3), ClassFunction {
            values: (0..6).map(|i| int(i as i64 * 3 - 7)).collect(),
        });
        assert_eq!(convolve(&convolve(&a, &b, &s3), &c, &s3), convolve(&a, &convolve(&b, &c, &s3), &s3));
    }

    #[test]
    fn hom_count_examples() {
        assert_eq!(hom_count_u64(&group("S3"), Surface::Orientable { genus: 1 }).unwrap(), 18);
        assert_eq!(hom_count_u64(&group("Z2"), Surface::Orientable { genus: 2 }).unwrap(), 16);
        assert_eq!(hom_count_u64(&group("Q8"), Surface::NonOrientable { crosscaps: 2 }).unwrap(), 40);
        assert_eq!(hom_count_u64(&group("S3"), Surface::Orientable { genus: 0 }).unwrap(), 1);
        assert!(hom_count(&group("S3"), Surface::NonOrientable { crosscaps: 0 }).is_err());
    }

    #[test]
    fn convolution_matches_brute_force() {
        for name in ["Z2", "Z3", "Z4", "Z2xZ2", "S3", "D4", "Q8"] {
            let g = group(name);
            for genus in 0..=2 {
                let s = Surface::Orientable { genus };
                assert_eq!(hom_count_u64(&g, s).unwrap(), brute_hom_count(&g, s), "{name} g={genus}");
            }
            for crosscaps in 1..=3 {
                let s = Surface::NonOrientable { crosscaps };
                assert_eq!(hom_count_u64(&g, s).unwrap(), brute_hom_count(&g, s), "{name} k={crosscaps}");
            }
        }
    }

    #[test]
    fn commuting_pairs_identity() {
        for name in ["Z2", "Z3", "Z4", "Z2xZ2", "S3", "D4", "Q8", "A4", "S4"] {
            let g = group(name);
            let classes = g.conjugacy_classes().len() as u64;
            assert_eq!(
                hom_count_u64(&g, Surface::Orientable { genus: 1 }).unwrap(),
                g.order() as u64 * classes,
                "{name}"
            );
        }
    }
}
