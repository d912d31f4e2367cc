use serde::{Deserialize, Serialize};

use super::sft::Sft;
use super::word::{shift_metric, PeriodicWord};
use super::SymbolicError;

/// Precision of the metric used for gap checks; dyadic sums stay exact.
const GAP_PRECISION: u32 = 48;

/// `δ_k = 2^-(k+1)`: closeness below it forces agreement on `|i| ≤ k + 1`.
pub fn delta_for_window(k: usize) -> f64 {
    0.5f64.powi(k as i32 + 1)
}

/// Words `w_j` at times `j = start, …, start + len - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolicPseudoOrbit {
    pub start: i64,
    pub words: Vec<PeriodicWord>,
}

impl SymbolicPseudoOrbit {
    pub fn new(start: i64, words: Vec<PeriodicWord>) -> Self {
        SymbolicPseudoOrbit { start, words }
    }

    /// The exact orbit `σ^j a`, `j = start, …, start + len - 1`.
    pub fn orbit_of(a: &PeriodicWord, start: i64, len: usize) -> Self {
        let words = (0..len as i64).map(|j| a.shift(start + j)).collect();
        SymbolicPseudoOrbit { start, words }
    }

    /// Reindex so `w_j` sits at time `j - n`.
    pub fn shifted(&self, n: i64) -> Self {
        SymbolicPseudoOrbit {
            start: self.start - n,
            words: self.words.clone(),
        }
    }

    /// Largest `d(σ w_j, w_{j+1})` (upper end of the error bar).
    pub fn defect(&self) -> f64 {
        self.words
            .windows(2)
            .map(|p| shift_metric(&p[0].shift(1), &p[1], GAP_PRECISION).upper())
            .fold(0.0, f64::max)
    }
}

/// Splice the zeroth coordinates of a pseudo-orbit into one sequence.
///
/// `a_i = (w_i)_0` on the window, with the first and last words continuing
/// as exact orbits beyond it.
pub fn symbolic_shadow(
    t: &Sft,
    pseudo: &SymbolicPseudoOrbit,
    delta: f64,
) -> Result<PeriodicWord, SymbolicError> {
    let n = pseudo.words.len();
    if n == 0 {
        return Err(SymbolicError::EmptyPseudo);
    }
    let bound = delta_for_window(t.k());
    if !(delta > 0.0 && delta <= bound) {
        return Err(SymbolicError::DeltaTooLarge { delta, bound });
    }
    if let Some(i) = pseudo.words.iter().position(|w| !t.is_member(w)) {
        return Err(SymbolicError::NotMember(i));
    }
    for (i, p) in pseudo.words.windows(2).enumerate() {
        let d = shift_metric(&p[0].shift(1), &p[1], GAP_PRECISION).upper();
        if !(d < delta) {
            return Err(SymbolicError::Gap {
                index: pseudo.start + i as i64,
                distance: d,
                delta,
            });
        }
    }
    let s = pseudo.start;
    let last = s + n as i64 - 1;
    let x = pseudo.words[0].shift(-s);
    let y = pseudo.words[n - 1].shift(-last);
    let lo = x.core_start().min(s);
    let hi = y.core_end().max(last);
    let block = (lo..hi)
        .map(|i| {
            if i < s {
                x.at(i)
            } else if i < last {
                pseudo.words[(i - s) as usize].at(0)
            } else {
                y.at(i)
            }
        })
        .collect();
    let left = x.window(lo - x.left_cycle().len() as i64, lo);
    let right = y.window(hi, hi + y.right_cycle().len() as i64);
    PeriodicWord::from_block(left, lo, block, right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{sft_closure, SubshiftPresentation};

    fn pw(s: &str) -> PeriodicWord {
        s.parse().unwrap()
    }

    fn full2(k: usize) -> Sft {
        let p = SubshiftPresentation::new(2, vec![pw("(0)"), pw("(1)"), pw("(01)"), pw("(0011)")]).unwrap();
        sft_closure(&p, k).unwrap()
    }

    #[test]
    fn exact_orbit_is_returned() {
        let t = full2(2);
        let a = pw("(01)1.10(0)");
        let po = SymbolicPseudoOrbit::orbit_of(&a, -3, 9);
        assert_eq!(po.defect(), 0.0);
        assert_eq!(symbolic_shadow(&t, &po, delta_for_window(2)).unwrap(), a);
    }

    #[test]
    fn loops_glue_heteroclinically() {
        let t = full2(1);
        let zero = pw("(0)");
        let one = pw("(1)");
        let mut words = vec![zero.clone(); 4];
        words.extend(vec![one.clone(); 4]);
        let po = SymbolicPseudoOrbit::new(0, words);
        // the jump 0^∞ → 1^∞ is a full-size gap at any δ below 1
        assert!(matches!(
            symbolic_shadow(&t, &po, 0.25),
            Err(SymbolicError::Gap { index: 3, .. })
        ));
        // glue through the heteroclinic orbit h = 0^∞.1^∞ instead
        let h = pw("(0).(1)");
        let mut words = vec![zero.clone(); 4];
        words.extend((4..12).map(|j| h.shift(j - 8)));
        words.extend(vec![one.clone(); 4]);
        let po = SymbolicPseudoOrbit::new(0, words);
        assert!(po.defect() < 0.25);
        assert_eq!(symbolic_shadow(&t, &po, 0.25).unwrap(), h.shift(-8));
    }

    #[test]
    fn refusals() {
        let t = full2(2);
        let po = SymbolicPseudoOrbit::new(0, vec![pw("(0)")]);
        assert!(matches!(symbolic_shadow(&t, &po, 0.2), Err(SymbolicError::DeltaTooLarge { .. })));
        let gm = Sft::new(2, 2, [vec![0, 0], vec![0, 1], vec![1, 0]].into_iter().collect()).unwrap();
        let po = SymbolicPseudoOrbit::new(0, vec![pw("(0)"), pw("(1)")]);
        assert!(matches!(symbolic_shadow(&gm, &po, 0.1), Err(SymbolicError::NotMember(1))));
        assert!(matches!(
            symbolic_shadow(&gm, &SymbolicPseudoOrbit::new(0, vec![]), 0.1),
            Err(SymbolicError::EmptyPseudo)
        ));
    }

    #[test]
    fn reindexing_is_equivariant() {
        let t = full2(3);
        let a = pw("(0011)01.1(01)");
        let b = pw("(0011)01.0(01)");
        // two exact pieces: the jump falls outside the |i| ≤ 4 window
        let mut words: Vec<_> = (0..6).map(|j| a.shift(j)).collect();
        words.extend((6..12).map(|j| a.shift(j)));
        let _ = b;
        let po = SymbolicPseudoOrbit::new(2, words);
        let s = symbolic_shadow(&t, &po, delta_for_window(3)).unwrap();
        for n in [-3, -1, 1, 4] {
            let sn = symbolic_shadow(&t, &po.shifted(n), delta_for_window(3)).unwrap();
            assert_eq!(sn, s.shift(n));
        }
    }
}
