//! Integer-lattice shell bookkeeping.
//!
//! Excitation energies depend on a mode only through s = n^2, so mode sums
//! collapse to shell sums weighted by the multiplicity r3(s) = number of
//! integer vectors with nx^2+ny^2+nz^2 = s. r3(s) = 0 exactly when s is of
//! the form 4^a (8b+7).

use std::sync::{Mutex, OnceLock};

/// Multiplicity table, built by counting representations as a sum of two
/// squares and convolving with the third coordinate. Grows on demand.
#[derive(Debug, Default)]
pub struct ShellTable {
    limit: usize,
    r2: Vec<u32>,
    r3: Vec<u32>,
}

impl ShellTable {
    pub fn new() -> Self {
        Self::default()
    }

    fn rebuild_r2(&mut self, limit: usize) {
        self.r2 = vec![0u32; limit + 1];
        let amax = (limit as f64).sqrt() as usize + 1;
        for a in 0..=amax {
            let a2 = a * a;
            if a2 > limit {
                break;
            }
            let wa = if a == 0 { 1u32 } else { 2u32 };
            let mut b = 0usize;
            loop {
                let t = a2 + b * b;
                if t > limit {
                    break;
                }
                let wb = if b == 0 { 1u32 } else { 2u32 };
                self.r2[t] += wa * wb;
                b += 1;
            }
        }
    }

    /// Make sure multiplicities are available for all s <= smax.
    pub fn ensure(&mut self, smax: usize) {
        if smax <= self.limit && !self.r3.is_empty() {
            return;
        }
        let new_limit = smax.max(self.limit * 2).max(1024);
        self.rebuild_r2(new_limit);
        let old = self.r3.len();
        self.r3.resize(new_limit + 1, 0);
        let start = if old == 0 { 0 } else { old };
        for s in start..=new_limit {
            let mut acc = 0u64;
            let cmax = (s as f64).sqrt() as usize + 1;
            for c in 0..=cmax {
                let c2 = c * c;
                if c2 > s {
                    break;
                }
                let wc = if c == 0 { 1u64 } else { 2u64 };
                acc += wc * u64::from(self.r2[s - c2]);
            }
            self.r3[s] = acc as u32;
        }
        self.limit = new_limit;
    }

    pub fn multiplicity(&mut self, s: usize) -> u32 {
        self.ensure(s);
        self.r3[s]
    }

    /// Copy of r3 over an inclusive range (for lock-free hot loops).
    pub fn multiplicities(&mut self, lo: usize, hi: usize) -> Vec<u32> {
        self.ensure(hi);
        self.r3[lo..=hi].to_vec()
    }
}

fn global_table() -> &'static Mutex<ShellTable> {
    static TABLE: OnceLock<Mutex<ShellTable>> = OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(ShellTable::new()))
}

/// r3(s) by exact bounded enumeration, cached process-wide.
pub fn shell_multiplicity(s: u64) -> u64 {
    u64::from(global_table().lock().unwrap().multiplicity(s as usize))
}

/// r3 over s in lo..=hi as a dense vector.
pub fn shell_multiplicities(lo: u64, hi: u64) -> Vec<u32> {
    global_table().lock().unwrap().multiplicities(lo as usize, hi as usize)
}

/// Legendre three-square criterion: true iff s = 4^a (8b+7), i.e. r3(s) = 0.
pub fn three_square_excluded(mut s: u64) -> bool {
    if s == 0 {
        return false;
    }
    while s.is_multiple_of(4) {
        s /= 4;
    }
    s % 8 == 7
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_multiplicities() {
        assert_eq!(shell_multiplicity(1), 6); // (+-1,0,0) and permutations
        assert_eq!(shell_multiplicity(2), 12);
        assert_eq!(shell_multiplicity(3), 8);
        assert_eq!(shell_multiplicity(4), 6);
        assert_eq!(shell_multiplicity(5), 24);
        assert_eq!(shell_multiplicity(7), 0); // 8b+7 excluded form
        assert_eq!(shell_multiplicity(9), 30); // (3,0,0)-orbit 6 + (2,2,1)-orbit 24
    }

    #[test]
    fn excluded_forms_match_enumeration() {
        for s in 1..=2000u64 {
            let zero = shell_multiplicity(s) == 0;
            assert_eq!(
                zero,
                three_square_excluded(s),
                "s = {s}: r3 = {}",
                shell_multiplicity(s)
            );
        }
    }

    #[test]
    fn total_counts_match_ball_volume() {
        // sum of r3(s) for s <= R^2 equals the number of nonzero lattice
        // points in the ball; brute count for a small radius
        let smax = 64u64;
        let shell_total: u64 = (1..=smax).map(shell_multiplicity).sum();
        let mut brute = 0u64;
        let r = 8i64;
        for nx in -r..=r {
            for ny in -r..=r {
                for nz in -r..=r {
                    let s = nx * nx + ny * ny + nz * nz;
                    if s > 0 && s as u64 <= smax {
                        brute += 1;
                    }
                }
            }
        }
        assert_eq!(shell_total, brute);
    }
}
