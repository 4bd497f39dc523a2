//! Occupation strings of a single spin and their one-body excitation lists.

/// Sign picked up by applying `a_q` (if `q` occupied) or `a†_q` (if empty) to
/// `string`: one factor of −1 per occupied orbital below `q`.
#[inline]
pub(crate) fn phase_below(string: u64, q: usize) -> f64 {
    if (string & ((1u64 << q) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `a†_p a_q |string>` as `(sign, new_string)`, or `None` if it vanishes.
#[inline]
pub(crate) fn excite(string: u64, p: usize, q: usize) -> Option<(f64, u64)> {
    if string & (1 << q) == 0 {
        return None;
    }
    let s1 = phase_below(string, q);
    let removed = string ^ (1 << q);
    if removed & (1 << p) != 0 {
        return None;
    }
    let s2 = phase_below(removed, p);
    Some((s1 * s2, removed | (1 << p)))
}

/// All strings of `n_orb` bits with `n_elec` set, in ascending numeric order.
pub(crate) fn enumerate_strings(n_orb: usize, n_elec: usize) -> Vec<u64> {
    if n_elec == 0 {
        return vec![0];
    }
    let limit = 1u64 << n_orb;
    let mut out = Vec::new();
    let mut s = (1u64 << n_elec) - 1;
    while s < limit {
        out.push(s);
        // Gosper's hack: next integer with the same popcount.
        let c = s & s.wrapping_neg();
        let r = s + c;
        s = (((r ^ s) >> 2) / c) | r;
    }
    out
}

/// One nonvanishing `a†_p a_q` acting on a string.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Excitation {
    /// `p * n_orb + q`
    pub pq: u32,
    /// Index of the resulting string.
    pub target: u32,
    pub sign: f64,
}

/// Excitation lists for every string of one spin, including `p == q` terms.
#[derive(Debug, Clone)]
pub(crate) struct ExcitationTable {
    pub lists: Vec<Vec<Excitation>>,
}

impl ExcitationTable {
    pub fn new(n_orb: usize, strings: &[u64]) -> Self {
        let lookup = |s: u64| -> u32 {
            strings
                .binary_search(&s)
                .expect("excitation stays inside the string space") as u32
        };
        let lists = strings
            .iter()
            .map(|&s| {
                let mut list = Vec::new();
                for q in 0..n_orb {
                    if s & (1 << q) == 0 {
                        continue;
                    }
                    for p in 0..n_orb {
                        if let Some((sign, t)) = excite(s, p, q) {
                            list.push(Excitation {
                                pq: (p * n_orb + q) as u32,
                                target: lookup(t),
                                sign,
                            });
                        }
                    }
                }
                list
            })
            .collect();
        ExcitationTable { lists }
    }
}
