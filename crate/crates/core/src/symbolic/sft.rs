use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::presentation::{check_alphabet, content_lines, parse_header, SubshiftPresentation};
use super::word::{PeriodicWord, Symbol};
use super::SymbolicError;

/// Periodic points of `M_W` are compared up to period `PERIOD_FACTOR · k`.
pub const PERIOD_FACTOR: usize = 2;

/// `M_W`: sequences all of whose `k`-blocks lie in `W`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sft {
    alphabet: usize,
    k: usize,
    words: BTreeSet<Vec<Symbol>>,
}

impl Sft {
    pub fn new(alphabet: usize, k: usize, words: BTreeSet<Vec<Symbol>>) -> Result<Self, SymbolicError> {
        check_alphabet(alphabet)?;
        if k == 0 {
            return Err(SymbolicError::ZeroWindow);
        }
        for w in &words {
            if w.len() != k {
                return Err(SymbolicError::WordLength {
                    expected: k,
                    found: w.len(),
                });
            }
            if let Some(&s) = w.iter().find(|&&s| s as usize >= alphabet) {
                return Err(SymbolicError::Symbol { symbol: s, alphabet });
            }
        }
        Ok(Sft { alphabet, k, words })
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn words(&self) -> &BTreeSet<Vec<Symbol>> {
        &self.words
    }

    pub fn is_member(&self, a: &PeriodicWord) -> bool {
        if a.alphabet_bound() > self.alphabet {
            return false;
        }
        let k = self.k as i64;
        a.window_starts(self.k)
            .all(|i| self.words.contains(&a.window(i, i + k)))
    }

    fn cyclically_admissible(&self, cycle: &[Symbol]) -> bool {
        let n = cycle.len();
        (0..n).all(|i| {
            let w: Vec<Symbol> = (0..self.k).map(|j| cycle[(i + j) % n]).collect();
            self.words.contains(&w)
        })
    }

    /// Primitive cycles (least rotation) of periodic points of `M_W` with period
    /// at most `max_period`, ordered by period then lexicographically.
    pub fn periodic_points(&self, max_period: usize) -> Vec<Vec<Symbol>> {
        let mut out = Vec::new();
        for n in 1..=max_period {
            let mut word = Vec::with_capacity(n);
            self.extend_cycles(n, &mut word, &mut out);
        }
        out
    }

    fn extend_cycles(&self, n: usize, word: &mut Vec<Symbol>, out: &mut Vec<Vec<Symbol>>) {
        if word.len() == n {
            if is_least_primitive_rotation(word) && self.cyclically_admissible(word) {
                out.push(word.clone());
            }
            return;
        }
        for s in 0..self.alphabet as Symbol {
            // a least rotation never starts below its first symbol
            if !word.is_empty() && s < word[0] {
                continue;
            }
            word.push(s);
            let len = word.len();
            let ok = len < self.k || self.words.contains(&word[len - self.k..]);
            if ok {
                self.extend_cycles(n, word, out);
            }
            word.pop();
        }
    }

    /// Words of `W` lying on some bi-infinite path of the block graph.
    pub fn essential_words(&self) -> BTreeSet<Vec<Symbol>> {
        let mut alive = self.words.clone();
        loop {
            let heads: BTreeSet<&[Symbol]> = alive.iter().map(|w| &w[..self.k - 1]).collect();
            let tails: BTreeSet<&[Symbol]> = alive.iter().map(|w| &w[1..]).collect();
            let keep: BTreeSet<Vec<Symbol>> = alive
                .iter()
                .filter(|w| heads.contains(&w[1..]) && tails.contains(&w[..self.k - 1]))
                .cloned()
                .collect();
            if keep.len() == alive.len() {
                return keep;
            }
            alive = keep;
        }
    }

    /// A presentation with the same `k`-language as `M_W`: one eventually
    /// periodic path through each essential word.
    pub fn presentation(&self) -> SubshiftPresentation {
        let ess = self.essential_words();
        let mut succ: BTreeMap<&[Symbol], &Vec<Symbol>> = BTreeMap::new();
        let mut pred: BTreeMap<&[Symbol], &Vec<Symbol>> = BTreeMap::new();
        for w in &ess {
            succ.entry(&w[..self.k - 1]).or_insert(w);
        }
        for w in ess.iter().rev() {
            pred.insert(&w[1..], w);
        }
        let walk = |start: &Vec<Symbol>, step: &dyn Fn(&Vec<Symbol>) -> Vec<Symbol>| {
            let mut seen: BTreeMap<Vec<Symbol>, usize> = BTreeMap::new();
            let mut path = vec![start.clone()];
            seen.insert(start.clone(), 0);
            loop {
                let next = step(path.last().expect("non-empty path"));
                if let Some(&i) = seen.get(&next) {
                    return (path, i);
                }
                seen.insert(next.clone(), path.len());
                path.push(next);
            }
        };
        let forward = |w: &Vec<Symbol>| succ[&w[1..]].clone();
        let backward = |w: &Vec<Symbol>| pred[&w[..self.k - 1]].clone();
        let generators = ess
            .iter()
            .map(|e| {
                // forward path v_0 = e, …; v_i is the first node revisited
                let (fwd, i) = walk(e, &forward);
                let (bwd, j) = walk(e, &backward);
                let right: Vec<Symbol> = fwd[i..].iter().map(|v| v[self.k - 1]).collect();
                let right = rotate_to(&right, 1);
                let left: Vec<Symbol> = bwd[j..].iter().rev().map(|u| u[0]).collect();
                let left = rotate_to(&left, left.len() - 1);
                // coordinates -j..-1 come from the backward path, k..k+i from the forward one
                let mut block: Vec<Symbol> = bwd[1..=j].iter().rev().map(|u| u[0]).collect();
                block.extend(e.iter().copied());
                block.extend(fwd[1..=i].iter().map(|v| v[self.k - 1]));
                PeriodicWord::from_block(left, -(j as i64), block, right)
                    .expect("cycles are non-empty")
            })
            .collect();
        SubshiftPresentation::new(self.alphabet, generators).expect("symbols checked")
    }
}

fn rotate_to(c: &[Symbol], by: usize) -> Vec<Symbol> {
    let mut v = c.to_vec();
    v.rotate_left(by % c.len());
    v
}

fn is_least_primitive_rotation(w: &[Symbol]) -> bool {
    let n = w.len();
    (1..n).all(|r| {
        let rot = w[r..].iter().chain(&w[..r]);
        // strictly greater rotations also rule out non-primitive words
        rot.cmp(w.iter()) == std::cmp::Ordering::Greater
    })
}

impl fmt::Display for Sft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "alphabet {}", self.alphabet)?;
        writeln!(f, "k {}", self.k)?;
        for w in &self.words {
            let s: String = w
                .iter()
                .map(|&c| std::char::from_digit(c as u32, 36).expect("symbol below 36"))
                .collect();
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for Sft {
    type Err = SymbolicError;
    fn from_str(s: &str) -> Result<Self, SymbolicError> {
        let mut lines = content_lines(s);
        let alphabet = parse_header(&mut lines, "alphabet")?;
        let k = parse_header(&mut lines, "k")?;
        let mut words = BTreeSet::new();
        for (line, text) in lines {
            let w = text
                .chars()
                .map(|c| c.to_digit(36).map(|d| d as Symbol))
                .collect::<Option<Vec<_>>>()
                .ok_or(SymbolicError::Parse {
                    pos: line,
                    msg: format!("bad word '{text}'"),
                })?;
            words.insert(w);
        }
        Sft::new(alphabet, k, words)
    }
}

/// The symbolic shadowing closure at window `k`: `W = language(s, k)`.
pub fn sft_closure(s: &SubshiftPresentation, k: usize) -> Result<Sft, SymbolicError> {
    Sft::new(s.alphabet(), k, s.language(k)?)
}

/// `sh(sh(s))` has the same admissible words as `sh(s)`.
pub fn stabilization_check(s: &SubshiftPresentation, k: usize) -> Result<bool, SymbolicError> {
    let first = sft_closure(s, k)?;
    let second = sft_closure(&first.presentation(), k)?;
    Ok(second.words == first.words)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalMaximality {
    pub kmax: usize,
    /// Smallest window at which the presented set equals its SFT closure.
    pub k: Option<usize>,
    /// For each rejected window, a periodic point of `M_W` outside the set.
    pub witnesses: Vec<(usize, PeriodicWord)>,
}

/// Smallest `k ≤ kmax` with `s = M_{language(s, k)}`, decided by generator
/// membership one way and periodic points up to period `2k` the other.
pub fn is_locally_maximal(s: &SubshiftPresentation, kmax: usize) -> Result<LocalMaximality, SymbolicError> {
    if kmax == 0 {
        return Err(SymbolicError::ZeroWindow);
    }
    let mut witnesses = Vec::new();
    for k in 1..=kmax {
        let t = sft_closure(s, k)?;
        debug_assert!(s.generators().iter().all(|g| t.is_member(g)));
        let outside = t
            .periodic_points(PERIOD_FACTOR * k)
            .into_iter()
            .find(|c| !s.contains_periodic(c));
        match outside {
            None if s.generators().iter().all(|g| t.is_member(g)) => {
                return Ok(LocalMaximality {
                    kmax,
                    k: Some(k),
                    witnesses,
                })
            }
            None => {}
            Some(c) => witnesses.push((k, PeriodicWord::periodic(c)?)),
        }
    }
    Ok(LocalMaximality {
        kmax,
        k: None,
        witnesses,
    })
}

/// A periodic point of `M_{language(s, k)}` outside `s` with a run of `1`s of
/// odd length between zeros, found by brute force up to period `2k`.
pub fn odd_run_witness(s: &SubshiftPresentation, k: usize) -> Result<Option<PeriodicWord>, SymbolicError> {
    let t = sft_closure(s, k)?;
    let found = t
        .periodic_points(PERIOD_FACTOR * k)
        .into_iter()
        .find(|c| has_odd_one_run(c) && !s.contains_periodic(c));
    found.map(PeriodicWord::periodic).transpose()
}

fn has_odd_one_run(cycle: &[Symbol]) -> bool {
    let Some(z) = cycle.iter().position(|&c| c == 0) else {
        return false;
    };
    let n = cycle.len();
    let mut run = 0;
    for i in 1..=n {
        match cycle[(z + i) % n] {
            1 => run += 1,
            0 => {
                if run % 2 == 1 {
                    return true;
                }
                run = 0;
            }
            _ => run = 0,
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{even_shift, full_shift, golden_mean, random_presentation};

    fn sft(alphabet: usize, k: usize, ws: &[&str]) -> Sft {
        Sft::new(
            alphabet,
            k,
            ws.iter().map(|w| w.bytes().map(|b| b - b'0').collect()).collect(),
        )
        .unwrap()
    }

    fn pw(s: &str) -> PeriodicWord {
        s.parse().unwrap()
    }

    #[test]
    fn membership_examples() {
        let gm = sft(2, 2, &["00", "01", "10"]);
        assert!(gm.is_member(&pw("(0)")));
        assert!(!gm.is_member(&pw("(011)")));
        assert!(gm.is_member(&pw("(0).1(0)")));
        let loops = sft(3, 2, &["22"]);
        assert!(loops.is_member(&pw("(2)")));
        assert!(!loops.is_member(&pw("(1)")));
    }

    /// Independent oracle: every binary word of length n, filtered directly.
    fn brute_periodic(t: &Sft, n: usize) -> Vec<Vec<Symbol>> {
        let mut out = Vec::new();
        for code in 0..(1u32 << n) {
            let w: Vec<Symbol> = (0..n).map(|i| ((code >> (n - 1 - i)) & 1) as Symbol).collect();
            let rots: Vec<Vec<Symbol>> = (0..n).map(|r| rotate_to(&w, r)).collect();
            let primitive = rots[1..].iter().all(|r| *r != w);
            if primitive && rots.iter().all(|r| *r >= w) && t.cyclically_admissible(&w) {
                out.push(w);
            }
        }
        out
    }

    #[test]
    fn periodic_points_match_brute_force() {
        let gm = sft(2, 2, &["00", "01", "10"]);
        for n in 1..=10 {
            let got: Vec<_> = gm.periodic_points(n).into_iter().filter(|c| c.len() == n).collect();
            assert_eq!(got, brute_periodic(&gm, n), "period {n}");
        }
        // golden mean: periodic point counts are Lucas numbers
        let counts: Vec<usize> = (1..=8)
            .map(|n| {
                gm.periodic_points(n)
                    .iter()
                    .filter(|c| n % c.len() == 0)
                    .map(Vec::len)
                    .sum()
            })
            .collect();
        assert_eq!(counts, vec![1, 3, 4, 7, 11, 18, 29, 47]);
    }

    #[test]
    fn closure_examples() {
        let het = SubshiftPresentation::new(2, vec![pw("(0)"), pw("(1)"), pw("(0).(1)")]).unwrap();
        let t = sft_closure(&het, 2).unwrap();
        assert_eq!(t, sft(2, 2, &["00", "01", "11"]));
        // M_W: the paths of the block graph are exactly 0^∞, 1^∞ and 0^∞1^∞ shifts
        assert_eq!(t.periodic_points(6), vec![vec![0], vec![1]]);
        for g in het.generators() {
            assert!(t.is_member(g));
        }
        let two = SubshiftPresentation::new(2, vec![pw("(01)")]).unwrap();
        let t2 = sft_closure(&two, 2).unwrap();
        assert_eq!(t2.periodic_points(8), vec![vec![0, 1]]);
    }

    #[test]
    fn presentation_has_same_language() {
        let t = sft(2, 3, &["000", "001", "011", "111", "110", "100", "010"]);
        let p = t.presentation();
        assert_eq!(p.language(3).unwrap(), t.essential_words());
        assert!(p.generators().iter().all(|g| t.is_member(g)));
        // a dead-end word is dropped
        let d = sft(2, 2, &["00", "01"]);
        assert_eq!(d.essential_words().len(), 1);
    }

    #[test]
    fn local_maximality_examples() {
        assert_eq!(is_locally_maximal(&full_shift(2).unwrap(), 8).unwrap().k, Some(1));
        let gm = is_locally_maximal(&golden_mean(), 8).unwrap();
        assert_eq!(gm.k, Some(2));
        assert_eq!(gm.witnesses.len(), 1);
        assert_eq!(gm.witnesses[0].1, pw("(1)"));
        let ev = is_locally_maximal(&even_shift(), 8).unwrap();
        assert_eq!(ev.k, None);
        assert_eq!(ev.witnesses.len(), 8);
        for k in 1..=8 {
            let w = odd_run_witness(&even_shift(), k).unwrap().expect("odd-run witness");
            assert!(sft_closure(&even_shift(), k).unwrap().is_member(&w));
        }
    }

    #[test]
    fn stabilization_examples() {
        for seed in 0..30 {
            let p = random_presentation(seed, 2).unwrap();
            for k in 1..=4 {
                assert!(stabilization_check(&p, k).unwrap(), "seed {seed} k {k}");
            }
        }
        assert!(stabilization_check(&even_shift(), 4).unwrap());
    }

    #[test]
    fn text_roundtrip() {
        let t = sft(2, 2, &["00", "01", "10"]);
        assert_eq!(t.to_string().parse::<Sft>().unwrap(), t);
        assert!(matches!(
            "alphabet 2\nk 2\n001\n".parse::<Sft>(),
            Err(SymbolicError::WordLength { expected: 2, found: 3 })
        ));
    }
}
