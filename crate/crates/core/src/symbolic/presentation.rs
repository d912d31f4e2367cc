use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::word::{PeriodicWord, Symbol, MAX_ALPHABET};
use super::SymbolicError;

/// The shift-orbit closure of finitely many eventually periodic generators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubshiftPresentation {
    alphabet: usize,
    generators: Vec<PeriodicWord>,
}

pub(crate) fn check_alphabet(n: usize) -> Result<(), SymbolicError> {
    if n == 0 || n > MAX_ALPHABET {
        return Err(SymbolicError::Alphabet(n));
    }
    Ok(())
}

/// Whether `a` is a rotation of `b` (both primitive).
fn same_cycle(a: &[Symbol], b: &[Symbol]) -> bool {
    a.len() == b.len() && (0..a.len()).any(|r| a.iter().cycle().skip(r).take(a.len()).eq(b.iter()))
}

impl SubshiftPresentation {
    pub fn new(alphabet: usize, generators: Vec<PeriodicWord>) -> Result<Self, SymbolicError> {
        check_alphabet(alphabet)?;
        for g in &generators {
            if g.alphabet_bound() > alphabet {
                return Err(SymbolicError::Symbol {
                    symbol: (g.alphabet_bound() - 1) as Symbol,
                    alphabet,
                });
            }
        }
        Ok(SubshiftPresentation {
            alphabet,
            generators,
        })
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn generators(&self) -> &[PeriodicWord] {
        &self.generators
    }

    /// Every `k`-word occurring in some generator, in lexicographic order.
    pub fn language(&self, k: usize) -> Result<BTreeSet<Vec<Symbol>>, SymbolicError> {
        if k == 0 {
            return Err(SymbolicError::ZeroWindow);
        }
        let mut out = BTreeSet::new();
        for g in &self.generators {
            for i in g.window_starts(k) {
                out.insert(g.window(i, i + k as i64));
            }
        }
        Ok(out)
    }

    /// Membership of the periodic point with primitive cycle `cycle`: the
    /// orbit closure of an eventually periodic word adds only its two tails.
    pub fn contains_periodic(&self, cycle: &[Symbol]) -> bool {
        self.generators
            .iter()
            .any(|g| same_cycle(g.right_cycle(), cycle) || same_cycle(g.left_cycle(), cycle))
    }
}

impl fmt::Display for SubshiftPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "alphabet {}", self.alphabet)?;
        for g in &self.generators {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

/// Parses `alphabet N` followed by one word per line; `#` starts a comment.
pub(crate) fn parse_header<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    key: &str,
) -> Result<usize, SymbolicError> {
    let (line, text) = lines.next().ok_or(SymbolicError::Parse {
        pos: 0,
        msg: format!("missing '{key}' line"),
    })?;
    let err = || SymbolicError::Parse {
        pos: line,
        msg: format!("expected '{key} <integer>'"),
    };
    let mut parts = text.split_whitespace();
    if parts.next() != Some(key) {
        return Err(err());
    }
    let v = parts.next().and_then(|v| v.parse().ok()).ok_or_else(err)?;
    if parts.next().is_some() {
        return Err(err());
    }
    Ok(v)
}

pub(crate) fn content_lines(s: &str) -> impl Iterator<Item = (usize, &str)> {
    s.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

impl FromStr for SubshiftPresentation {
    type Err = SymbolicError;
    fn from_str(s: &str) -> Result<Self, SymbolicError> {
        let mut lines = content_lines(s);
        let alphabet = parse_header(&mut lines, "alphabet")?;
        let generators = lines
            .map(|(line, text)| {
                text.parse::<PeriodicWord>().map_err(|e| match e {
                    SymbolicError::Parse { pos, msg } => SymbolicError::Parse {
                        pos: line,
                        msg: format!("column {pos}: {msg}"),
                    },
                    other => other,
                })
            })
            .collect::<Result<_, _>>()?;
        Self::new(alphabet, generators)
    }
}

fn periodic(cycle: &[Symbol]) -> PeriodicWord {
    PeriodicWord::periodic(cycle.to_vec()).expect("non-empty cycle")
}

/// Every periodic point of period at most 2 on `n` symbols.
pub fn full_shift(n: usize) -> Result<SubshiftPresentation, SymbolicError> {
    check_alphabet(n)?;
    let mut gens = Vec::new();
    for a in 0..n as Symbol {
        gens.push(periodic(&[a]));
        for b in a + 1..n as Symbol {
            gens.push(periodic(&[a, b]));
        }
    }
    SubshiftPresentation::new(n, gens)
}

/// Periodic points of the no-`11` shift up to period 4.
pub fn golden_mean() -> SubshiftPresentation {
    let gens = [&[0][..], &[0, 1], &[0, 0, 1], &[0, 0, 0, 1]]
        .iter()
        .map(|c| periodic(c))
        .collect();
    SubshiftPresentation::new(2, gens).expect("binary words")
}

/// Words whose finite runs of `1` between zeros all have even length.
pub fn even_shift() -> SubshiftPresentation {
    let mut gens: Vec<PeriodicWord> = ["(0)", "(1)", "(1).0(1)", "(0).(1)", "(1).(0)", "(0).11(0)"]
        .iter()
        .map(|s| s.parse().expect("literal word"))
        .collect();
    for m in [2usize, 4, 6, 8] {
        let mut c = vec![0];
        c.extend(std::iter::repeat_n(1, m));
        gens.push(periodic(&c));
    }
    gens.push(periodic(&[0, 1, 1, 0, 1, 1, 1, 1]));
    SubshiftPresentation::new(2, gens).expect("binary words")
}

/// Seeded presentation with one to four generators over `alphabet` symbols.
pub fn random_presentation(seed: u64, alphabet: usize) -> Result<SubshiftPresentation, SymbolicError> {
    check_alphabet(alphabet)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = alphabet as Symbol;
    let word = |rng: &mut ChaCha8Rng, lo: usize, hi: usize| -> Vec<Symbol> {
        let len = rng.random_range(lo..=hi);
        (0..len).map(|_| rng.random_range(0..n)).collect()
    };
    let count = rng.random_range(1..=4);
    let gens = (0..count)
        .map(|_| {
            let left = word(&mut rng, 1, 4);
            let core = word(&mut rng, 0, 4);
            let right = word(&mut rng, 1, 4);
            let zero = rng.random_range(-3..=3);
            PeriodicWord::new(left, core, right, zero)
        })
        .collect::<Result<_, _>>()?;
    SubshiftPresentation::new(alphabet, gens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(ws: &[&str]) -> BTreeSet<Vec<Symbol>> {
        ws.iter()
            .map(|w| w.bytes().map(|b| b - b'0').collect())
            .collect()
    }

    /// Independent oracle: unroll generously and scan.
    fn brute_language(p: &SubshiftPresentation, k: usize) -> BTreeSet<Vec<Symbol>> {
        let mut out = BTreeSet::new();
        for g in p.generators() {
            let seq = g.window(-60, 60);
            for w in seq.windows(k) {
                out.insert(w.to_vec());
            }
        }
        out
    }

    #[test]
    fn language_examples() {
        let fixed = SubshiftPresentation::new(2, vec!["(0)".parse().unwrap()]).unwrap();
        assert_eq!(fixed.language(2).unwrap(), words(&["00"]));
        let two = SubshiftPresentation::new(2, vec!["(01)".parse().unwrap()]).unwrap();
        assert_eq!(two.language(2).unwrap(), words(&["01", "10"]));
        let het = SubshiftPresentation::new(
            2,
            ["(0)", "(1)", "(0).(1)"].iter().map(|s| s.parse().unwrap()).collect(),
        )
        .unwrap();
        assert_eq!(het.language(2).unwrap(), words(&["00", "01", "11"]));
        assert!(matches!(het.language(0), Err(SymbolicError::ZeroWindow)));
    }

    #[test]
    fn language_matches_brute_force() {
        for seed in 0..40 {
            let p = random_presentation(seed, 2 + (seed % 2) as usize).unwrap();
            for k in 1..=5 {
                assert_eq!(p.language(k).unwrap(), brute_language(&p, k), "seed {seed} k {k}");
            }
        }
    }

    #[test]
    fn text_roundtrip() {
        let p = even_shift();
        let back: SubshiftPresentation = p.to_string().parse().unwrap();
        assert_eq!(back, p);
        let bad = "alphabet 2\n(0)\n(0)!.(1)\n";
        assert!(matches!(
            bad.parse::<SubshiftPresentation>(),
            Err(SymbolicError::Parse { pos: 3, .. })
        ));
        assert!(matches!(
            "alphabet 2\n(2)\n".parse::<SubshiftPresentation>(),
            Err(SymbolicError::Symbol { .. })
        ));
    }

    #[test]
    fn periodic_membership() {
        let p = even_shift();
        assert!(p.contains_periodic(&[0]));
        assert!(p.contains_periodic(&[1, 1, 0]));
        assert!(!p.contains_periodic(&[0, 1]));
    }
}
