//! Shared fixtures and oracles for the integration suites.
//!
//! The corpus pairs a context-free expression with a regular target and
//! records the expected verdicts. The oracles here are deliberately
//! independent of the library's own machinery: containment is checked
//! by brute-force word enumeration, and languages are recomputed by a
//! bottom-up fixpoint that never unfolds.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use cfx_core::cfe::Cfe;
use cfx_core::regex::{self, Alphabet, RegEx};
use cfx_core::syntax::{parse_cfe, parse_regex};

pub struct Pair {
    pub name: &'static str,
    pub e: &'static str,
    pub r: &'static str,
    /// Whether L(e) is contained in L(r).
    pub contains: bool,
    /// Whether the synthesized downcast terminates without fuel on
    /// every tree of `r` and its Nothing answers are definitive. Pairs
    /// where a fixed point can recurse without consuming input fail
    /// this; their divergence is pinned down separately.
    pub downcast_exact: bool,
    /// Whether the expression is guarded, so the predictive parser
    /// accepts it.
    pub guarded: bool,
}

pub fn corpus() -> Vec<Pair> {
    vec![
        Pair {
            name: "matched_nest_in_xsys",
            e: "mu a. x.(a.y)+1",
            r: "x*.y*",
            contains: true,
            downcast_exact: true,
            guarded: true,
        },
        Pair {
            name: "matched_nest_in_all",
            e: "mu a. x.(a.y)+1",
            r: "(x+y)*",
            contains: true,
            downcast_exact: true,
            guarded: true,
        },
        Pair {
            name: "matched_nest_not_in_xs",
            e: "mu a. x.(a.y)+1",
            r: "x*",
            contains: false,
            downcast_exact: true,
            guarded: true,
        },
        Pair {
            name: "matched_nest_not_in_ys",
            e: "mu a. x.(a.y)+1",
            r: "y*",
            contains: false,
            downcast_exact: true,
            guarded: true,
        },
        Pair {
            name: "x_loop_in_xs",
            e: "mu a. x.a+1",
            r: "x*",
            contains: true,
            downcast_exact: true,
            guarded: true,
        },
        Pair {
            name: "x_loop_in_all",
            e: "mu a. x.a+1",
            r: "(x+y)*",
            contains: true,
            downcast_exact: true,
            guarded: true,
        },
        Pair {
            name: "empty_branch_first",
            e: "mu a. 1+x.(a.y)",
            r: "x*.y*",
            contains: true,
            downcast_exact: true,
            guarded: false,
        },
        Pair {
            name: "left_recursive",
            e: "mu a. a.x+1",
            r: "(x+y)*",
            contains: true,
            downcast_exact: false,
            guarded: false,
        },
        Pair {
            name: "self_loop_in_xs",
            e: "mu a. a",
            r: "x*",
            contains: true,
            downcast_exact: false,
            guarded: false,
        },
        Pair {
            name: "self_loop_in_xsys",
            e: "mu a. a",
            r: "x*.y*",
            contains: true,
            downcast_exact: false,
            guarded: false,
        },
        Pair {
            name: "self_loop_in_all",
            e: "mu a. a",
            r: "(x+y)*",
            contains: true,
            downcast_exact: false,
            guarded: false,
        },
        Pair {
            name: "choice_not_in_xs",
            e: "x+y",
            r: "x*",
            contains: false,
            downcast_exact: true,
            guarded: true,
        },
        Pair {
            name: "pair_in_xsys",
            e: "x.y",
            r: "x*.y*",
            contains: true,
            downcast_exact: true,
            guarded: true,
        },
        Pair {
            name: "unit_not_in_void",
            e: "1",
            r: "0",
            contains: false,
            downcast_exact: true,
            guarded: true,
        },
        Pair {
            name: "void_in_void",
            e: "0",
            r: "0",
            contains: true,
            downcast_exact: true,
            guarded: true,
        },
        Pair {
            name: "two_loops_in_all",
            e: "mu a. x.a+(y.a+1)",
            r: "(x+y)*",
            contains: true,
            downcast_exact: true,
            guarded: true,
        },
        Pair {
            name: "two_loops_not_in_xs",
            e: "mu a. x.a+(y.a+1)",
            r: "x*",
            contains: false,
            downcast_exact: true,
            guarded: true,
        },
        Pair {
            name: "nested_loops_in_all",
            e: "mu a. x.((mu b. y.b+1).a)+1",
            r: "(x+y)*",
            contains: true,
            downcast_exact: true,
            guarded: true,
        },
        Pair {
            name: "nested_loops_not_in_xsys",
            e: "mu a. x.((mu b. y.b+1).a)+1",
            r: "x*.y*",
            contains: false,
            downcast_exact: true,
            guarded: true,
        },
        Pair {
            name: "options_in_xsys",
            e: "(x+1).(y+1)",
            r: "x*.y*",
            contains: true,
            downcast_exact: true,
            guarded: true,
        },
        Pair {
            name: "sugared_star_not_in_xsys",
            e: "(x.y*)*",
            r: "x*.y*",
            contains: false,
            downcast_exact: true,
            guarded: false,
        },
        Pair {
            name: "sugared_star_in_all",
            e: "(x.y*)*",
            r: "(x+y)*",
            contains: true,
            downcast_exact: true,
            guarded: false,
        },
    ]
}

pub fn ce(s: &str) -> Cfe {
    parse_cfe(s).unwrap_or_else(|err| panic!("bad fixture {s:?}: {err}"))
}

pub fn re(s: &str) -> RegEx {
    parse_regex(s).unwrap_or_else(|err| panic!("bad fixture {s:?}: {err}"))
}

pub fn pair_alphabet(e: &Cfe, r: &RegEx) -> Alphabet {
    Alphabet::from_symbol_sets([e.symbols(), r.symbols()])
}

pub fn sigma_xy() -> Alphabet {
    Alphabet::new(vec!['x', 'y'])
}

/// All words over `sigma` of length at most `max_len`, shortest first.
pub fn all_words(sigma: &[char], max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for &c in sigma {
                let mut grown = w.clone();
                grown.push(c);
                next.push(grown);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Containment decided the slow way: every word of `e` up to the bound
/// must match `r`.
pub fn contains_oracle(e: &Cfe, r: &RegEx, max_len: usize) -> bool {
    e.enumerate_words(max_len)
        .iter()
        .all(|w| regex::matches(r, w))
}

/// Whether `w` splits into a prefix in L(e) and a suffix matching
/// `residual`. This is what a downcast's Nothing answer denies.
pub fn has_decomposition(w: &str, e: &Cfe, residual: &RegEx) -> bool {
    let prefixes = e.enumerate_words(w.chars().count());
    let chars: Vec<char> = w.chars().collect();
    (0..=chars.len()).any(|i| {
        let u: String = chars[..i].iter().collect();
        let v: String = chars[i..].iter().collect();
        prefixes.contains(&u) && regex::matches(residual, &v)
    })
}

/// Bounded language of an expression by a bottom-up fixpoint over word
/// sets, with no unfolding anywhere. Independent check on the
/// library's own enumeration.
pub fn language_fixpoint(e: &Cfe, max_len: usize) -> BTreeSet<String> {
    fn go(
        e: &Cfe,
        max_len: usize,
        env: &BTreeMap<String, BTreeSet<String>>,
    ) -> BTreeSet<String> {
        match e {
            Cfe::Phi => BTreeSet::new(),
            Cfe::Eps => [String::new()].into_iter().collect(),
            Cfe::Sym(x) => {
                if max_len >= 1 {
                    [x.to_string()].into_iter().collect()
                } else {
                    BTreeSet::new()
                }
            }
            Cfe::Var(name) => env.get(name).cloned().unwrap_or_default(),
            Cfe::Alt(a, b) => {
                let mut out = go(a, max_len, env);
                out.extend(go(b, max_len, env));
                out
            }
            Cfe::Cat(a, b) => {
                let left = go(a, max_len, env);
                let right = go(b, max_len, env);
                let mut out = BTreeSet::new();
                for u in &left {
                    for v in &right {
                        if u.chars().count() + v.chars().count() <= max_len {
                            out.insert(format!("{u}{v}"));
                        }
                    }
                }
                out
            }
            Cfe::Mu(name, body) => {
                let mut current = BTreeSet::new();
                loop {
                    let mut inner = env.clone();
                    inner.insert(name.clone(), current.clone());
                    let next = go(body, max_len, &inner);
                    if next == current {
                        return current;
                    }
                    current = next;
                }
            }
        }
    }
    go(e, max_len, &BTreeMap::new())
}

/// Deterministic generator for fixture regexes; the mixing constants
/// are the standard splitmix64 ones, so the stream is stable forever.
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }
}

pub fn random_regex(rng: &mut SplitMix, depth: u32) -> RegEx {
    let choice = if depth == 0 {
        rng.below(4)
    } else {
        rng.below(7)
    };
    match choice {
        0 => RegEx::Phi,
        1 => RegEx::Eps,
        2 => RegEx::sym('x'),
        3 => RegEx::sym('y'),
        4 => RegEx::alt(
            random_regex(rng, depth - 1),
            random_regex(rng, depth - 1),
        ),
        5 => RegEx::cat(
            random_regex(rng, depth - 1),
            random_regex(rng, depth - 1),
        ),
        _ => RegEx::star(random_regex(rng, depth - 1)),
    }
}

/// All subsets of a descendant set, for exhaustive table enumeration.
pub fn all_subsets(items: &BTreeSet<RegEx>) -> Vec<BTreeSet<RegEx>> {
    let items: Vec<&RegEx> = items.iter().collect();
    let mut out = Vec::with_capacity(1 << items.len());
    for mask in 0u32..(1 << items.len()) {
        out.push(
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, r)| (*r).clone())
                .collect(),
        );
    }
    out
}

/// Every assignment of a subset of `descendants` to each key: the full
/// space of candidate tables over the given fixed points.
pub fn all_assignments(
    keys: &[(Cfe, RegEx)],
    descendants: &BTreeSet<RegEx>,
) -> Vec<BTreeMap<(Cfe, RegEx), BTreeSet<RegEx>>> {
    let subsets = all_subsets(descendants);
    let mut out = Vec::new();
    let total = subsets.len().pow(keys.len() as u32);
    for mut index in 0..total {
        let mut claims = BTreeMap::new();
        for key in keys {
            claims.insert(key.clone(), subsets[index % subsets.len()].clone());
            index /= subsets.len();
        }
        out.push(claims);
    }
    out
}
