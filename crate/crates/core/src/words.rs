//! Words over X^± = {x_1^±, ..., x_m^±}: reduction, exact counting,
//! shortlex ranking and uniform sampling of cyclically reduced words.
//!
//! Letters are signed integers, `+i` for x_i and `-i` for its inverse.
//! The shortlex letter order is x_1 < x_1^-1 < x_2 < x_2^-1 < ...

use crate::error::{feasibility, Error, Result};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng;
use std::cmp::Ordering;
use std::fmt;

pub type Letter = i8;

/// Default cap on (2m-1)^ℓ for exhaustive enumeration.
pub const DEFAULT_ENUMERATION_LIMIT: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet {
    m: u8,
}

impl Alphabet {
    pub fn new(m: usize) -> Result<Self> {
        if !(2..=127).contains(&m) {
            return Err(Error::Domain(format!("generator count must be in 2..=127, got {m}")));
        }
        Ok(Alphabet { m: m as u8 })
    }

    pub fn m(&self) -> usize {
        self.m as usize
    }

    /// All 2m letters in shortlex order.
    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..2 * self.m()).map(letter_at)
    }

    pub fn contains(&self, x: Letter) -> bool {
        x != 0 && (x.unsigned_abs() as usize) <= self.m()
    }

    pub fn check(&self, w: &Word) -> Result<()> {
        match w.0.iter().find(|&&x| !self.contains(x)) {
            Some(&x) => Err(Error::MalformedWord(format!(
                "letter {x} out of range for m = {}",
                self.m
            ))),
            None => Ok(()),
        }
    }
}

/// Position of a letter in shortlex order.
#[inline]
pub fn letter_key(x: Letter) -> usize {
    2 * (x.unsigned_abs() as usize - 1) + (x < 0) as usize
}

#[inline]
pub fn letter_at(pos: usize) -> Letter {
    let g = (pos / 2 + 1) as Letter;
    if pos % 2 == 0 {
        g
    } else {
        -g
    }
}

pub fn letter_char(x: Letter) -> char {
    let base = if x > 0 { b'a' } else { b'A' };
    if x.unsigned_abs() > 26 || x == 0 {
        '?'
    } else {
        (base + x.unsigned_abs() - 1) as char
    }
}

pub fn parse_letter(c: char) -> Option<Letter> {
    match c {
        'a'..='z' => Some((c as u8 - b'a' + 1) as Letter),
        'A'..='Z' => Some(-((c as u8 - b'A' + 1) as Letter)),
        _ => None,
    }
}

#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|&x| -x).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|p| p[0] != -p[1])
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.is_reduced() && (self.len() < 2 || self.0[0] != -self.0[self.len() - 1])
    }

    /// Rotation that starts at position `k`.
    pub fn rotate(&self, k: usize) -> Word {
        if self.is_empty() {
            return Word::empty();
        }
        let k = k % self.len();
        let mut v = Vec::with_capacity(self.len());
        v.extend_from_slice(&self.0[k..]);
        v.extend_from_slice(&self.0[..k]);
        Word(v)
    }

    /// Free reduction without an alphabet check.
    pub fn reduced(&self) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(self.len());
        for &x in &self.0 {
            if out.last() == Some(&-x) {
                out.pop();
            } else {
                out.push(x);
            }
        }
        Word(out)
    }

    /// Cyclic reduction without an alphabet check.
    pub fn cyclically_reduced(&self) -> Word {
        let r = self.reduced();
        let v = &r.0;
        let (mut i, mut j) = (0, v.len());
        while j - i >= 2 && v[i] == -v[j - 1] {
            i += 1;
            j -= 1;
        }
        Word(v[i..j].to_vec())
    }

    /// Least representative, in shortlex order, over all rotations of
    /// the word and of its inverse.
    pub fn cyclic_canonical(&self) -> Word {
        let mut best = self.min_rotation();
        let inv = self.inverse().min_rotation();
        if shortlex_cmp(&inv, &best) == Ordering::Less {
            best = inv;
        }
        best
    }

    /// Least rotation in shortlex order.
    pub fn min_rotation(&self) -> Word {
        let n = self.len();
        if n == 0 {
            return Word::empty();
        }
        let keys: Vec<usize> = self.0.iter().map(|&x| letter_key(x)).collect();
        let mut best = 0;
        for k in 1..n {
            for t in 0..n {
                let a = keys[(k + t) % n];
                let b = keys[(best + t) % n];
                if a != b {
                    if a < b {
                        best = k;
                    }
                    break;
                }
            }
        }
        self.rotate(best)
    }

    pub fn to_text(&self) -> String {
        if self.is_empty() {
            return "1".to_string();
        }
        self.0.iter().map(|&x| letter_char(x)).collect()
    }

    /// Whether every letter lies in {x_1..x_r}^±.
    pub fn over_first(&self, r: usize) -> bool {
        self.0.iter().all(|&x| (x.unsigned_abs() as usize) <= r)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({})", self.to_text())
    }
}

impl From<Vec<Letter>> for Word {
    fn from(v: Vec<Letter>) -> Self {
        Word(v)
    }
}

impl std::str::FromStr for Word {
    type Err = Error;
    fn from_str(s: &str) -> Result<Word> {
        parse_word(s)
    }
}

/// Length first, then letter by letter in shortlex letter order.
pub fn shortlex_cmp(a: &Word, b: &Word) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        for (&x, &y) in a.0.iter().zip(&b.0) {
            let c = letter_key(x).cmp(&letter_key(y));
            if c != Ordering::Equal {
                return c;
            }
        }
        Ordering::Equal
    })
}

impl serde::Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_text())
    }
}

impl<'de> serde::Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_word(&s).map_err(serde::de::Error::custom)
    }
}

/// Parses `aBa`-style text. `1` and the empty string are the empty word.
pub fn parse_word(s: &str) -> Result<Word> {
    let s = s.trim();
    if s.is_empty() || s == "1" {
        return Ok(Word::empty());
    }
    s.chars()
        .map(|c| {
            parse_letter(c).ok_or_else(|| Error::MalformedWord(format!("unexpected character {c:?}")))
        })
        .collect::<Result<Vec<_>>>()
        .map(Word)
}

pub fn free_reduce(alphabet: &Alphabet, w: &Word) -> Result<Word> {
    alphabet.check(w)?;
    Ok(w.reduced())
}

pub fn cyclic_reduce(alphabet: &Alphabet, w: &Word) -> Result<Word> {
    alphabet.check(w)?;
    Ok(w.cyclically_reduced())
}

/// 2m(2m-1)^(L-1) reduced words of length exactly L; 1 for L = 0.
pub fn count_reduced_exact(m: usize, len: usize) -> BigUint {
    if len == 0 {
        return BigUint::one();
    }
    BigUint::from(2 * m) * BigUint::from(2 * m - 1).pow(len as u32 - 1)
}

// Completion states: relation of the current last letter to the first letter.
const SAME: usize = 0;
const INV: usize = 1;
const OTHER: usize = 2;

#[inline]
fn state_of(first: Letter, x: Letter) -> usize {
    if x == first {
        SAME
    } else if x == -first {
        INV
    } else {
        OTHER
    }
}

/// Exact number of cyclically reduced words of length exactly L over m generators.
pub fn count_cyclically_reduced(m: usize, len: usize) -> BigUint {
    if len == 0 {
        return BigUint::one();
    }
    let k = BigUint::from(2 * m - 2);
    let k3 = BigUint::from(2 * m - 3);
    let mut t = [BigUint::one(), BigUint::zero(), BigUint::one()];
    for _ in 1..len {
        let [s, i, o] = &t;
        t = [s + &k * o, i + &k * o, s + i + &k3 * o];
    }
    BigUint::from(2 * m) * &t[SAME]
}

/// |B_ℓ|: cyclically reduced words of length 1..=ℓ.
pub fn count_b(m: usize, ell: usize) -> BigUint {
    (1..=ell).map(|l| count_cyclically_reduced(m, l)).sum()
}

/// Exact count tables for B_ℓ in machine integers, used for ranking,
/// unranking and uniform sampling.
#[derive(Clone, Debug)]
pub struct CrCounts {
    alphabet: Alphabet,
    ell: usize,
    /// completion[k][state]: ways to append k more letters.
    completion: Vec<[u128; 3]>,
    /// per_len[L] = number of words of length L.
    per_len: Vec<u128>,
    total: u128,
}

impl CrCounts {
    pub fn new(m: usize, ell: usize) -> Result<Self> {
        let alphabet = Alphabet::new(m)?;
        if ell == 0 {
            return Err(Error::Domain("maximum length must be at least 1".into()));
        }
        let over = || Error::Feasibility {
            what: format!("|B_{ell}| over {m} generators in 128-bit tables"),
            estimate: (ell as f64) * ((2 * m - 1) as f64).log2(),
            limit: 126.0,
        };
        let k = (2 * m - 2) as u128;
        let k3 = (2 * m - 3) as u128;
        let mut completion = vec![[1u128, 0, 1]];
        for _ in 1..ell {
            let [s, i, o] = *completion.last().unwrap();
            let ko = k.checked_mul(o).ok_or_else(over)?;
            let k3o = k3.checked_mul(o).ok_or_else(over)?;
            let next = [
                s.checked_add(ko).ok_or_else(over)?,
                i.checked_add(ko).ok_or_else(over)?,
                s.checked_add(i).and_then(|v| v.checked_add(k3o)).ok_or_else(over)?,
            ];
            completion.push(next);
        }
        let mut per_len = vec![0u128];
        let mut total: u128 = 0;
        for l in 1..=ell {
            let c = completion[l - 1][SAME].checked_mul(2 * m as u128).ok_or_else(over)?;
            total = total.checked_add(c).ok_or_else(over)?;
            per_len.push(c);
        }
        Ok(CrCounts { alphabet, ell, completion, per_len, total })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn max_len(&self) -> usize {
        self.ell
    }

    pub fn count_len(&self, len: usize) -> u128 {
        self.per_len.get(len).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u128 {
        self.total
    }

    /// The word of shortlex rank `idx` in B_ℓ.
    pub fn unrank(&self, idx: u128) -> Word {
        let mut out = Vec::new();
        self.unrank_into(idx, &mut out);
        Word(out)
    }

    /// `unrank` into a reusable buffer.
    pub fn unrank_into(&self, mut idx: u128, out: &mut Vec<Letter>) {
        assert!(idx < self.total, "rank out of range");
        out.clear();
        let mut len = 1;
        while idx >= self.per_len[len] {
            idx -= self.per_len[len];
            len += 1;
        }
        let per_first = self.completion[len - 1][SAME];
        let first = letter_at((idx / per_first) as usize);
        idx %= per_first;
        out.push(first);
        let mut prev = first;
        let two_m = 2 * self.alphabet.m();
        for pos in 1..len {
            let row = &self.completion[len - 1 - pos];
            let mut chosen = None;
            for key in 0..two_m {
                let x = letter_at(key);
                if x == -prev {
                    continue;
                }
                let c = row[state_of(first, x)];
                if idx < c {
                    chosen = Some(x);
                    break;
                }
                idx -= c;
            }
            let x = chosen.expect("unrank tables inconsistent");
            out.push(x);
            prev = x;
        }
    }

    /// Inverse of `unrank`; `None` if the word is not in B_ℓ.
    pub fn rank(&self, w: &Word) -> Option<u128> {
        let len = w.len();
        if len == 0 || len > self.ell || !w.is_cyclically_reduced() || self.alphabet.check(w).is_err() {
            return None;
        }
        let mut idx: u128 = self.per_len[1..len].iter().sum();
        let first = w.0[0];
        idx += letter_key(first) as u128 * self.completion[len - 1][SAME];
        let mut prev = first;
        for pos in 1..len {
            let row = &self.completion[len - 1 - pos];
            let x = w.0[pos];
            for key in 0..letter_key(x) {
                let y = letter_at(key);
                if y != -prev {
                    idx += row[state_of(first, y)];
                }
            }
            prev = x;
        }
        Some(idx)
    }

    /// Exactly uniform draw from B_ℓ.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Word {
        self.unrank(rng.random_range(0..self.total))
    }
}

/// Streams B_ℓ in shortlex order, guarded by (2m-1)^ℓ ≤ `limit`.
pub fn enumerate_cyclically_reduced(
    m: usize,
    ell: usize,
    limit: f64,
) -> Result<impl Iterator<Item = Word>> {
    let estimate = ((2 * m - 1) as f64).powi(ell as i32);
    feasibility(format!("enumerating B_{ell} over {m} generators"), estimate, limit)?;
    let counts = CrCounts::new(m, ell)?;
    let total = counts.total();
    Ok((0..total).map(move |i| counts.unrank(i)))
}

pub fn sample_cyclically_reduced<R: Rng + ?Sized>(m: usize, ell: usize, rng: &mut R) -> Result<Word> {
    Ok(CrCounts::new(m, ell)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        parse_word(s).unwrap()
    }

    #[test]
    fn reduction_examples() {
        let a = Alphabet::new(2).unwrap();
        assert_eq!(free_reduce(&a, &Word(vec![1, -1])).unwrap(), Word::empty());
        assert_eq!(free_reduce(&a, &Word(vec![1, 2, -2, 1])).unwrap(), Word(vec![1, 1]));
        assert_eq!(cyclic_reduce(&a, &Word(vec![-1, 2, 1])).unwrap(), Word(vec![2]));
        assert!(matches!(free_reduce(&a, &Word(vec![3])), Err(Error::MalformedWord(_))));
        assert!(free_reduce(&a, &Word(vec![0])).is_err());
    }

    #[test]
    fn text_round_trip() {
        assert_eq!(w("aBa"), Word(vec![1, -2, 1]));
        assert_eq!(w("aBa").to_text(), "aBa");
        assert_eq!(w("1"), Word::empty());
        assert!(parse_word("a1").is_err());
    }

    #[test]
    fn small_counts() {
        assert_eq!(count_reduced_exact(2, 2), BigUint::from(12u32));
        assert_eq!(count_reduced_exact(2, 1), BigUint::from(4u32));
        assert_eq!(count_reduced_exact(3, 0), BigUint::one());
        let c: Vec<u64> = (1..=4).map(|l| count_cyclically_reduced(2, l).try_into().unwrap()).collect();
        assert_eq!(c, vec![4, 12, 28, 84]);
        assert_eq!(count_b(2, 14), BigUint::from(7_174_480u64));
    }

    #[test]
    fn unrank_is_shortlex() {
        let c = CrCounts::new(2, 3).unwrap();
        let all: Vec<Word> = (0..c.total()).map(|i| c.unrank(i)).collect();
        for p in all.windows(2) {
            assert_eq!(shortlex_cmp(&p[0], &p[1]), Ordering::Less);
        }
        for (i, x) in all.iter().enumerate() {
            assert_eq!(c.rank(x), Some(i as u128));
        }
        assert_eq!(all[0], w("a"));
        assert_eq!(all[4], w("aa"));
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(w("baB").cyclic_canonical(), w("aBb").min_rotation().cyclic_canonical());
        assert_eq!(w("ba").cyclic_canonical(), w("ab"));
        assert_eq!(w("BA").cyclic_canonical(), w("ab"));
    }

    #[test]
    fn guard_trips() {
        assert!(matches!(
            enumerate_cyclically_reduced(3, 30, DEFAULT_ENUMERATION_LIMIT).err(),
            Some(Error::Feasibility { .. })
        ));
    }
}
