use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SymbolicError;

pub type Symbol = u8;

/// Largest alphabet with a one-character text form (`0-9`, `a-z`).
pub const MAX_ALPHABET: usize = 36;

/// An eventually periodic bi-infinite sequence `… L L core R R …`.
///
/// Stored in a canonical form, so structural equality is sequence equality:
/// both cycles are primitive, the right tail is extended as far left as it
/// goes, then the left tail as far right as it goes, and a purely periodic
/// sequence is stored with an empty core and `L = R` read from coordinate 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct PeriodicWord {
    left: Vec<Symbol>,
    core: Vec<Symbol>,
    right: Vec<Symbol>,
    /// Coordinate `i` is raw position `i + zero`; the core starts at raw 0.
    zero: i64,
}

fn primitive_root(w: &[Symbol]) -> Vec<Symbol> {
    let n = w.len();
    (1..=n)
        .find(|&p| n % p == 0 && (p..n).all(|i| w[i] == w[i - p]))
        .map(|p| w[..p].to_vec())
        .unwrap_or_default()
}

fn rotate_right(w: &mut [Symbol]) {
    w.rotate_right(1);
}

impl PeriodicWord {
    /// `left` repeats to the left of raw position 0, `core` occupies raw
    /// positions `0..core.len()`, `right` repeats after it, and coordinate
    /// 0 sits at raw position `zero`.
    pub fn new(
        left: Vec<Symbol>,
        core: Vec<Symbol>,
        right: Vec<Symbol>,
        zero: i64,
    ) -> Result<Self, SymbolicError> {
        if left.is_empty() || right.is_empty() {
            return Err(SymbolicError::EmptyCycle);
        }
        for &s in left.iter().chain(&core).chain(&right) {
            if s as usize >= MAX_ALPHABET {
                return Err(SymbolicError::Symbol {
                    symbol: s,
                    alphabet: MAX_ALPHABET,
                });
            }
        }
        let mut w = PeriodicWord {
            left: primitive_root(&left),
            core,
            right: primitive_root(&right),
            zero,
        };
        w.canonicalize();
        Ok(w)
    }

    /// The periodic sequence `a_i = cycle[i mod p]`.
    pub fn periodic(cycle: Vec<Symbol>) -> Result<Self, SymbolicError> {
        Self::new(cycle.clone(), Vec::new(), cycle, 0)
    }

    /// `a_i = cycle[(i - lo) mod |cycle|]`-style splice: `left` repeats up to
    /// coordinate `lo - 1` (ending with its last symbol), `block` fills
    /// `lo..lo + block.len()`, and `right` repeats from there on.
    pub fn from_block(
        left: Vec<Symbol>,
        lo: i64,
        block: Vec<Symbol>,
        right: Vec<Symbol>,
    ) -> Result<Self, SymbolicError> {
        Self::new(left, block, right, -lo)
    }

    fn canonicalize(&mut self) {
        self.pull_right_tail();
        if self.is_periodic_raw() {
            self.normalize_periodic();
            return;
        }
        // extend the left tail into the core
        while !self.core.is_empty() && self.core[0] == self.left[0] {
            self.core.remove(0);
            self.left.rotate_left(1);
            self.zero -= 1;
        }
    }

    fn is_periodic_raw(&self) -> bool {
        self.core.is_empty() && self.left == self.right
    }

    fn pull_right_tail(&mut self) {
        while let Some(&c) = self.core.last() {
            if c != *self.right.last().expect("non-empty cycle") {
                break;
            }
            self.core.pop();
            rotate_right(&mut self.right);
        }
        if self.core.is_empty() {
            // move the split left while the left tail agrees with the right cycle
            let mut guard = 0;
            while !self.is_periodic_raw()
                && self.left.last() == self.right.last()
                && guard < self.left.len() * self.right.len() + 1
            {
                rotate_right(&mut self.left);
                rotate_right(&mut self.right);
                self.zero += 1;
                guard += 1;
            }
        }
    }

    fn normalize_periodic(&mut self) {
        let p = self.right.len() as i64;
        let shift = self.zero.rem_euclid(p) as usize;
        self.right.rotate_left(shift);
        self.left = self.right.clone();
        self.zero = 0;
    }

    pub fn left_cycle(&self) -> &[Symbol] {
        &self.left
    }

    pub fn core(&self) -> &[Symbol] {
        &self.core
    }

    pub fn right_cycle(&self) -> &[Symbol] {
        &self.right
    }

    pub fn is_periodic(&self) -> bool {
        self.is_periodic_raw()
    }

    /// First coordinate of the core.
    pub fn core_start(&self) -> i64 {
        -self.zero
    }

    /// First coordinate of the right tail.
    pub fn core_end(&self) -> i64 {
        self.core.len() as i64 - self.zero
    }

    /// Largest symbol plus one.
    pub fn alphabet_bound(&self) -> usize {
        self.left
            .iter()
            .chain(&self.core)
            .chain(&self.right)
            .map(|&s| s as usize + 1)
            .max()
            .unwrap_or(0)
    }

    /// `a_i`.
    pub fn at(&self, i: i64) -> Symbol {
        let j = i + self.zero;
        let n = self.core.len() as i64;
        if j < 0 {
            self.left[j.rem_euclid(self.left.len() as i64) as usize]
        } else if j < n {
            self.core[j as usize]
        } else {
            self.right[(j - n).rem_euclid(self.right.len() as i64) as usize]
        }
    }

    /// `a_lo … a_{hi-1}`.
    pub fn window(&self, lo: i64, hi: i64) -> Vec<Symbol> {
        (lo..hi).map(|i| self.at(i)).collect()
    }

    /// `σ^n a`, `(σ a)_i = a_{i+1}`.
    pub fn shift(&self, n: i64) -> PeriodicWord {
        let mut w = self.clone();
        w.zero += n;
        if w.is_periodic_raw() {
            w.normalize_periodic();
        }
        w
    }

    /// Start positions whose `k`-windows cover every `k`-word of the sequence.
    pub(crate) fn window_starts(&self, k: usize) -> std::ops::Range<i64> {
        let k = k as i64;
        let lo = self.core_start() - k - self.left.len() as i64;
        let hi = self.core_end() + self.right.len() as i64;
        lo..hi
    }

    /// Symbol-wise splice: `left_word` on coordinates `< at`, `right_word` from `at` on.
    pub fn splice(left_word: &PeriodicWord, at: i64, right_word: &PeriodicWord) -> PeriodicWord {
        let lo = left_word.core_start().min(at);
        let hi = right_word.core_end().max(at);
        let pl = left_word.left.len() as i64;
        let pr = right_word.right.len() as i64;
        let left = left_word.window(lo - pl, lo);
        let block = (lo..hi)
            .map(|i| if i < at { left_word.at(i) } else { right_word.at(i) })
            .collect();
        let right = right_word.window(hi, hi + pr);
        PeriodicWord::from_block(left, lo, block, right).expect("cycles taken from valid words")
    }
}

fn symbol_char(s: Symbol) -> char {
    std::char::from_digit(s as u32, MAX_ALPHABET as u32).expect("symbol below 36")
}

impl fmt::Display for PeriodicWord {
    /// `(L)x.y(R)`: the dot precedes coordinate 0.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lo = self.core_start().min(0);
        let hi = self.core_end().max(0);
        let pl = self.left.len() as i64;
        let pr = self.right.len() as i64;
        let cyc = |a: i64, b: i64| -> String { self.window(a, b).into_iter().map(symbol_char).collect() };
        write!(
            f,
            "({}){}.{}({})",
            cyc(lo - pl, lo),
            cyc(lo, 0),
            cyc(0, hi),
            cyc(hi, hi + pr)
        )
    }
}

impl FromStr for PeriodicWord {
    type Err = SymbolicError;

    /// Accepts `(L)x.y(R)` and the periodic shorthand `(C)`.
    fn from_str(s: &str) -> Result<Self, SymbolicError> {
        let s = s.trim();
        let err = |pos: usize, msg: &str| SymbolicError::Parse {
            pos,
            msg: msg.to_string(),
        };
        let syms = |text: &str, base: usize| -> Result<Vec<Symbol>, SymbolicError> {
            text.chars()
                .enumerate()
                .map(|(i, c)| {
                    c.to_digit(MAX_ALPHABET as u32)
                        .map(|d| d as Symbol)
                        .ok_or_else(|| err(base + i, "expected a symbol 0-9 or a-z"))
                })
                .collect()
        };
        let lower = s.to_ascii_lowercase();
        let b = lower.as_str();
        if !b.starts_with('(') {
            return Err(err(0, "expected '('"));
        }
        let close = b.find(')').ok_or_else(|| err(b.len(), "unclosed '('"))?;
        let left = syms(&b[1..close], 1)?;
        if close + 1 == b.len() {
            return PeriodicWord::periodic(left);
        }
        let open = b[close + 1..]
            .find('(')
            .map(|i| i + close + 1)
            .ok_or_else(|| err(b.len(), "missing right cycle"))?;
        if !b.ends_with(')') || open + 1 >= b.len() {
            return Err(err(b.len(), "right cycle must end with ')'"));
        }
        let middle = &b[close + 1..open];
        let dot = middle
            .find('.')
            .ok_or_else(|| err(close + 1, "missing '.' before coordinate 0"))?;
        let before = syms(&middle[..dot], close + 1)?;
        let after = syms(&middle[dot + 1..], close + 2 + dot)?;
        let right = syms(&b[open + 1..b.len() - 1], open + 1)?;
        let lo = -(before.len() as i64);
        let mut block = before;
        block.extend(after);
        PeriodicWord::from_block(left, lo, block, right)
    }
}

impl From<PeriodicWord> for String {
    fn from(w: PeriodicWord) -> String {
        w.to_string()
    }
}

impl TryFrom<String> for PeriodicWord {
    type Error = SymbolicError;
    fn try_from(s: String) -> Result<Self, SymbolicError> {
        s.parse()
    }
}

/// `Σ_{|i| ≤ precision} 2^{-|i|} [a_i ≠ b_i]` with an error bar for the tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub value: f64,
    /// Zero when the sequences agree outside the window, `4 / 2^precision` otherwise.
    pub error: f64,
}

impl MetricValue {
    pub fn upper(&self) -> f64 {
        self.value + self.error
    }
}

/// Truncated shift metric. Every partial sum is dyadic, so values are exact
/// in `f64` for `precision ≤ 50`.
pub fn shift_metric(a: &PeriodicWord, b: &PeriodicWord, precision: u32) -> MetricValue {
    let p = precision as i64;
    let value: f64 = (-p..=p)
        .filter(|&i| a.at(i) != b.at(i))
        .map(|i| 0.5f64.powi(i.unsigned_abs() as i32))
        .sum();
    MetricValue {
        value,
        error: if agree_outside(a, b, p) {
            0.0
        } else {
            4.0 * 0.5f64.powi(precision as i32)
        },
    }
}

/// Whether `a_i = b_i` for every `|i| > p`.
fn agree_outside(a: &PeriodicWord, b: &PeriodicWord, p: i64) -> bool {
    // beyond both cores the pair is periodic with period lcm of the cycles
    let lcm = |x: usize, y: usize| x / gcd(x, y) * y;
    let period_r = lcm(a.right.len(), b.right.len()) as i64;
    let start_r = (p + 1).max(a.core_end()).max(b.core_end());
    let right_ok = (p + 1..start_r + period_r).all(|i| a.at(i) == b.at(i));
    let period_l = lcm(a.left.len(), b.left.len()) as i64;
    let end_l = (-p - 1).min(a.core_start() - 1).min(b.core_start() - 1);
    let left_ok = (end_l - period_l + 1..=-p - 1).all(|i| a.at(i) == b.at(i));
    right_ok && left_ok
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> PeriodicWord {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_forms_agree() {
        assert_eq!(w("(0).0(0)"), w("(0)"));
        assert_eq!(w("(00).000(0)"), w("(0)"));
        assert_eq!(w("(01).01(01)"), w("(01)"));
        assert_eq!(w("(10)1.0(10)"), w("(01)"));
        assert_eq!(w("(01).(01)").shift(1), w("(10)"));
        assert_eq!(w("(0).1(1)"), w("(0).(1)"));
        assert_eq!(w("(0).(1)"), w("(0)0.(1)"));
        assert_ne!(w("(0).(1)"), w("(0)1.(1)"));
    }

    #[test]
    fn display_roundtrip() {
        for s in ["(0).(1)", "(01).(01)", "(0)1.0(1)", "(01)1.10(0)", "(a).5z(3)"] {
            let a = w(s);
            assert_eq!(w(&a.to_string()), a, "{s} -> {a}");
        }
        assert_eq!(w("(0).(1)").to_string(), "(0).(1)");
        assert_eq!(w("(01)").to_string(), "(01).(01)");
    }

    #[test]
    fn coordinates_and_shift() {
        let a = w("(0)1.23(4)");
        assert_eq!(a.window(-3, 5), vec![0, 0, 1, 2, 3, 4, 4, 4]);
        let s = a.shift(2);
        assert_eq!(s.window(-5, 3), vec![0, 0, 1, 2, 3, 4, 4, 4]);
        assert_eq!(s.shift(-2), a);
    }

    #[test]
    fn parse_errors_carry_position() {
        assert!(matches!("0.1".parse::<PeriodicWord>(), Err(SymbolicError::Parse { pos: 0, .. })));
        assert!(matches!("(0)!.1(1)".parse::<PeriodicWord>(), Err(SymbolicError::Parse { pos: 3, .. })));
        assert!("(0)1(1)".parse::<PeriodicWord>().is_err());
        assert!(matches!("().1(1)".parse::<PeriodicWord>(), Err(SymbolicError::EmptyCycle)));
    }

    #[test]
    fn metric_examples() {
        let z = w("(0)");
        assert_eq!(shift_metric(&z, &z, 20), MetricValue { value: 0.0, error: 0.0 });
        let one = w("(0).1(0)");
        assert_eq!(shift_metric(&z, &one, 20).value, 1.0);
        assert_eq!(shift_metric(&z, &one, 20).error, 0.0);
        let pm = w("(0)1.01(0)");
        assert_eq!(shift_metric(&z, &pm, 20).value, 1.0);
        // disagreement beyond the window leaves an error bar
        let far = w("(0).(1)");
        let m = shift_metric(&z, &far, 10);
        assert_eq!(m.error, 4.0 / 1024.0);
        assert!((m.value - (2.0 - 0.5f64.powi(10))).abs() < 1e-15);
    }

    #[test]
    fn splice_takes_each_side() {
        let a = w("(0)");
        let b = w("(1)");
        assert_eq!(PeriodicWord::splice(&a, 0, &b), w("(0).(1)"));
        assert_eq!(PeriodicWord::splice(&a, 3, &b), w("(0).000(1)"));
        let c = w("(01)");
        let s = PeriodicWord::splice(&c, -2, &a);
        assert_eq!(s.window(-6, 2), vec![0, 1, 0, 1, 0, 0, 0, 0]);
    }
}
