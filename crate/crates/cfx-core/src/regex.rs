//! Regular expressions over single-character symbols, with Brzozowski
//! derivatives as the central operation.
//!
//! The derivative of `r` with respect to a symbol `x` is a regular
//! expression for the left quotient of `L(r)` by `x`. Iterating
//! derivatives gives a matcher; the set of expressions reachable by
//! derivatives is finite once expressions are kept in a canonical form,
//! which is what [`simp`] computes. Canonicalization applies exactly
//! these equivalences:
//!
//! * alternatives are flattened, deduplicated and sorted (associativity,
//!   commutativity and idempotence of `+`),
//! * `0 + r` and `r + 0` reduce to `r`,
//! * `1.r` reduces to `r` and `0.r` to `0`,
//! * concatenation is reassociated to the right.
//!
//! Nothing else is rewritten; in particular `r.1`, `r.0` and star
//! expressions are left alone. The finiteness of [`descendants`] only
//! needs the rules above.
//!
//! Alternatives are ordered by node count first, then by a prefix
//! rendering of the expression compared lexicographically (symbols in
//! their natural `char` order). Any total order would do; this one is
//! cheap and stable.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use crate::trees::ParseTree;

/// Symbols are single characters; words are plain strings of them.
pub type Symbol = char;

/// A regular expression. `Phi` is the empty language, `Eps` the language
/// of the empty word. Concrete syntax for the two is `0` and `1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RegEx {
    Phi,
    Eps,
    Sym(Symbol),
    Alt(Box<RegEx>, Box<RegEx>),
    Cat(Box<RegEx>, Box<RegEx>),
    Star(Box<RegEx>),
}

impl RegEx {
    pub fn sym(x: Symbol) -> RegEx {
        RegEx::Sym(x)
    }

    pub fn alt(l: RegEx, r: RegEx) -> RegEx {
        RegEx::Alt(Box::new(l), Box::new(r))
    }

    pub fn cat(l: RegEx, r: RegEx) -> RegEx {
        RegEx::Cat(Box::new(l), Box::new(r))
    }

    pub fn star(body: RegEx) -> RegEx {
        RegEx::Star(Box::new(body))
    }

    pub fn node_count(&self) -> usize {
        match self {
            RegEx::Phi | RegEx::Eps | RegEx::Sym(_) => 1,
            RegEx::Alt(l, r) | RegEx::Cat(l, r) => 1 + l.node_count() + r.node_count(),
            RegEx::Star(b) => 1 + b.node_count(),
        }
    }

    /// Every symbol that occurs in the expression.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    pub(crate) fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            RegEx::Phi | RegEx::Eps => {}
            RegEx::Sym(x) => {
                out.insert(*x);
            }
            RegEx::Alt(l, r) | RegEx::Cat(l, r) => {
                l.collect_symbols(out);
                r.collect_symbols(out);
            }
            RegEx::Star(b) => b.collect_symbols(out),
        }
    }

    /// True when the empty word is in the language.
    pub fn is_nullable(&self) -> bool {
        match self {
            RegEx::Phi | RegEx::Sym(_) => false,
            RegEx::Eps | RegEx::Star(_) => true,
            RegEx::Alt(l, r) => l.is_nullable() || r.is_nullable(),
            RegEx::Cat(l, r) => l.is_nullable() && r.is_nullable(),
        }
    }

    /// The Brzozowski derivative with respect to `x`, written out exactly
    /// as defined; no simplification is applied to the result.
    pub fn deriv(&self, x: Symbol) -> RegEx {
        match self {
            RegEx::Phi | RegEx::Eps => RegEx::Phi,
            RegEx::Sym(y) => {
                if *y == x {
                    RegEx::Eps
                } else {
                    RegEx::Phi
                }
            }
            RegEx::Alt(l, r) => RegEx::alt(l.deriv(x), r.deriv(x)),
            RegEx::Cat(l, r) => {
                let head = RegEx::cat(l.deriv(x), (**r).clone());
                if l.is_nullable() {
                    RegEx::alt(head, r.deriv(x))
                } else {
                    head
                }
            }
            RegEx::Star(b) => RegEx::cat(b.deriv(x), self.clone()),
        }
    }
}

/// A finite set of symbols with a fixed total order. The order is the
/// natural `char` order regardless of how the set was written down, so
/// canonical forms never depend on declaration order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<Symbol>,
}

impl Alphabet {
    pub fn new(symbols: impl IntoIterator<Item = Symbol>) -> Alphabet {
        let set: BTreeSet<Symbol> = symbols.into_iter().collect();
        Alphabet {
            symbols: set.into_iter().collect(),
        }
    }

    /// The union of the symbols of the given expressions; the usual
    /// default when no alphabet was declared explicitly.
    pub fn from_symbol_sets<I: IntoIterator<Item = BTreeSet<Symbol>>>(sets: I) -> Alphabet {
        let mut all = BTreeSet::new();
        for s in sets {
            all.extend(s);
        }
        Alphabet {
            symbols: all.into_iter().collect(),
        }
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn contains(&self, x: Symbol) -> bool {
        self.symbols.binary_search(&x).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn union(&self, other: &Alphabet) -> Alphabet {
        Alphabet::new(self.symbols.iter().chain(other.symbols.iter()).copied())
    }
}

fn prefix_key(r: &RegEx, out: &mut Vec<u32>) {
    match r {
        RegEx::Phi => out.push(0),
        RegEx::Eps => out.push(1),
        RegEx::Sym(x) => {
            out.push(2);
            out.push(*x as u32);
        }
        RegEx::Alt(l, rr) => {
            out.push(3);
            prefix_key(l, out);
            prefix_key(rr, out);
        }
        RegEx::Cat(l, rr) => {
            out.push(4);
            prefix_key(l, out);
            prefix_key(rr, out);
        }
        RegEx::Star(b) => {
            out.push(5);
            prefix_key(b, out);
        }
    }
}

/// The order used for sorting alternatives in canonical forms: node
/// count first, then a lexicographic comparison of prefix renderings.
/// Equal keys imply structurally equal expressions.
pub fn canon_cmp(a: &RegEx, b: &RegEx) -> Ordering {
    a.node_count().cmp(&b.node_count()).then_with(|| {
        let mut ka = Vec::new();
        let mut kb = Vec::new();
        prefix_key(a, &mut ka);
        prefix_key(b, &mut kb);
        ka.cmp(&kb)
    })
}

fn cat_spine(r: RegEx, out: &mut Vec<RegEx>) {
    match r {
        RegEx::Cat(l, rr) => {
            cat_spine(*l, out);
            cat_spine(*rr, out);
        }
        other => out.push(other),
    }
}

fn alt_spine(r: RegEx, out: &mut Vec<RegEx>) {
    match r {
        RegEx::Alt(l, rr) => {
            alt_spine(*l, out);
            alt_spine(*rr, out);
        }
        other => out.push(other),
    }
}

/// The canonical representative of `r` modulo the equivalences listed in
/// the module documentation. Idempotent, and preserves the language.
pub fn simp(r: &RegEx) -> RegEx {
    match r {
        RegEx::Phi | RegEx::Eps | RegEx::Sym(_) => r.clone(),
        RegEx::Star(b) => RegEx::star(simp(b)),
        RegEx::Cat(l, rr) => {
            let mut factors = Vec::new();
            cat_spine(simp(l), &mut factors);
            cat_spine(simp(rr), &mut factors);
            // Fold to the right, dropping unit factors and cutting the
            // tail after an empty one. A trailing 1 or 0 has nothing to
            // its right and stays put.
            let mut acc = factors.pop().expect("cat spine is never empty");
            while let Some(f) = factors.pop() {
                acc = match f {
                    RegEx::Eps => acc,
                    RegEx::Phi => RegEx::Phi,
                    f => RegEx::cat(f, acc),
                };
            }
            acc
        }
        RegEx::Alt(l, rr) => {
            let mut alts = Vec::new();
            alt_spine(simp(l), &mut alts);
            alt_spine(simp(rr), &mut alts);
            alts.retain(|a| *a != RegEx::Phi);
            alts.sort_by(canon_cmp);
            alts.dedup();
            match alts.pop() {
                None => RegEx::Phi,
                Some(last) => {
                    let mut acc = last;
                    while let Some(a) = alts.pop() {
                        acc = RegEx::alt(a, acc);
                    }
                    acc
                }
            }
        }
    }
}

/// All canonical expressions reachable from `simp(r)` by derivatives
/// over `sigma`, including `simp(r)` itself. Finite by construction.
pub fn descendants(r: &RegEx, sigma: &Alphabet) -> BTreeSet<RegEx> {
    let start = simp(r);
    let mut seen = BTreeSet::new();
    seen.insert(start.clone());
    let mut work = vec![start];
    while let Some(cur) = work.pop() {
        for &x in sigma.symbols() {
            let d = simp(&cur.deriv(x));
            if seen.insert(d.clone()) {
                work.push(d);
            }
        }
    }
    seen
}

/// Membership via iterated derivatives, canonicalizing at every step.
pub fn matches(r: &RegEx, w: &str) -> bool {
    let mut cur = simp(r);
    for x in w.chars() {
        if cur == RegEx::Phi {
            return false;
        }
        cur = simp(&cur.deriv(x));
    }
    cur.is_nullable()
}

/// Language containment `L(r) ⊆ L(s)`, decided by exploring pairs of
/// derivative descendants: the inclusion fails exactly when some word
/// leads to a pair whose left side is nullable and right side is not.
pub fn contains(r: &RegEx, s: &RegEx) -> bool {
    let sigma = Alphabet::from_symbol_sets([r.symbols(), s.symbols()]);
    let start = (simp(r), simp(s));
    let mut seen = BTreeSet::new();
    seen.insert(start.clone());
    let mut work = vec![start];
    while let Some((a, b)) = work.pop() {
        if a.is_nullable() && !b.is_nullable() {
            return false;
        }
        for &x in sigma.symbols() {
            let next = (simp(&a.deriv(x)), simp(&b.deriv(x)));
            if seen.insert(next.clone()) {
                work.push(next);
            }
        }
    }
    true
}

/// Parses a word against `r`, producing the parse tree picked by a fixed
/// disambiguation policy: the left alternative is preferred, stars are
/// greedy (longer iteration sequences win, with backtracking), and a
/// star iteration must consume at least one symbol. Returns `None`
/// exactly when the word is not in the language.
pub fn parse_word(r: &RegEx, w: &str) -> Option<ParseTree> {
    let syms: Vec<Symbol> = w.chars().collect();
    let mut found = None;
    parse_prefixes(r, &syms, &mut |t, rest| {
        if rest.is_empty() {
            found = Some(t);
            true
        } else {
            false
        }
    });
    found
}

/// Visits the prefix parses of `w` against `r` in policy order. The
/// visitor gets each tree together with the unconsumed suffix and
/// returns true to stop; the function reports whether it was stopped.
fn parse_prefixes(
    r: &RegEx,
    w: &[Symbol],
    visit: &mut dyn FnMut(ParseTree, &[Symbol]) -> bool,
) -> bool {
    match r {
        RegEx::Phi => false,
        RegEx::Eps => visit(ParseTree::Eps, w),
        RegEx::Sym(x) => {
            if w.first() == Some(x) {
                visit(ParseTree::Sym(*x), &w[1..])
            } else {
                false
            }
        }
        RegEx::Alt(l, rr) => {
            parse_prefixes(l, w, &mut |t, rest| visit(ParseTree::inl(t), rest))
                || parse_prefixes(rr, w, &mut |t, rest| visit(ParseTree::inr(t), rest))
        }
        RegEx::Cat(l, rr) => parse_prefixes(l, w, &mut |t1, rest1| {
            parse_prefixes(rr, rest1, &mut |t2, rest2| {
                visit(ParseTree::seq(t1.clone(), t2), rest2)
            })
        }),
        RegEx::Star(b) => {
            let stepped = parse_prefixes(b, w, &mut |t1, rest1| {
                if rest1.len() == w.len() {
                    // An iteration that consumed nothing would recurse
                    // forever; skip it. Dropping empty iterations loses
                    // no words.
                    return false;
                }
                parse_prefixes(r, rest1, &mut |t2, rest2| {
                    visit(
                        ParseTree::fold(ParseTree::inl(ParseTree::seq(t1.clone(), t2))),
                        rest2,
                    )
                })
            });
            stepped || visit(ParseTree::fold(ParseTree::inr(ParseTree::Eps)), w)
        }
    }
}

impl fmt::Display for RegEx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        render(self, 0, f)
    }
}

// Precedence levels: alternation 1, concatenation 2, star 3, atoms 4.
fn prec(r: &RegEx) -> u8 {
    match r {
        RegEx::Phi | RegEx::Eps | RegEx::Sym(_) => 4,
        RegEx::Star(_) => 3,
        RegEx::Cat(..) => 2,
        RegEx::Alt(..) => 1,
    }
}

fn render(r: &RegEx, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let wrap = prec(r) < min;
    if wrap {
        f.write_str("(")?;
    }
    match r {
        RegEx::Phi => f.write_str("0")?,
        RegEx::Eps => f.write_str("1")?,
        RegEx::Sym(x) => write!(f, "{x}")?,
        RegEx::Alt(l, rr) => {
            render(l, 2, f)?;
            f.write_str("+")?;
            render(rr, 1, f)?;
        }
        RegEx::Cat(l, rr) => {
            render(l, 3, f)?;
            f.write_str(".")?;
            render(rr, 2, f)?;
        }
        RegEx::Star(b) => {
            render(b, 4, f)?;
            f.write_str("*")?;
        }
    }
    if wrap {
        f.write_str(")")?;
    }
    Ok(())
}
