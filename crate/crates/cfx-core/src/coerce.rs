//! Synthesis of coercions between context-free and regular parse trees.
//!
//! An upcast turns a tree for a context-free expression `e` into a tree
//! for a regular `r` covering it, preserving the parsed word. A
//! downcast inverts that: given an `r` tree it recovers an `e` tree for
//! a prefix of the word plus a residual tree for the rest, or reports
//! that no prefix of the word belongs to `e`'s language.
//!
//! Both are synthesized by recursion on `e`, guided by the reach table:
//! the residual type at each point is the sum of states reachable so
//! far. Crossing a regular boundary (a symbol consumed, an alternative
//! chosen) emits a primitive that flattens its input tree back to a
//! word and reparses it at the new type; the primitives land in the
//! artifact's registry under names recording both endpoints. Fixed
//! points become `rec` terms; a placeholder occurrence resolves to the
//! enclosing hypothesis when the state matches it and is resynthesized
//! at the new state otherwise, which the finite state space keeps
//! bounded.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::cfe::{Cfe, WellFormedError};
use crate::coercion::{
    apply_coercion, as_maybe, as_pair, tree_to_value, value_to_tree, CoercionError, CoercionTerm,
    Constructor, Fuel, Pattern, PrimRegistry, Value,
};
use crate::reach::{plus_set, ReachTable};
use crate::regex::{self, Alphabet, RegEx};
use crate::trees::{flatten, mk_empty_re, ParseTree};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SynthError {
    #[error("expression is not well formed: {0}")]
    IllFormed(#[from] WellFormedError),
    #[error("the expression's language is not contained in the target")]
    NotContained,
    #[error("the expression's language is empty, so no tree can be coerced")]
    EmptyLanguage,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParserError {
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("the expression is not guarded")]
    NotGuarded,
    #[error("the alphabet is empty")]
    EmptyAlphabet,
}

/// A synthesized upcast: apply it to a tree of the source expression
/// and get a tree of the target regular expression for the same word.
#[derive(Clone, Debug)]
pub struct Upcast {
    pub term: CoercionTerm,
    pub registry: PrimRegistry,
    /// How often each fixed point was synthesized per target state.
    pub visits: BTreeMap<(Cfe, RegEx), usize>,
}

/// A synthesized downcast: apply it to a tree of the regular target and
/// get back `Some(prefix tree, residual tree)` or `None`.
#[derive(Clone, Debug)]
pub struct Downcast {
    pub term: CoercionTerm,
    pub registry: PrimRegistry,
    /// Type of the residual tree: the sum of reachable states.
    pub residual: RegEx,
    pub visits: BTreeMap<(Cfe, RegEx), usize>,
}

pub fn upcast(e: &Cfe, r: &RegEx, sigma: &Alphabet) -> Result<Upcast, SynthError> {
    e.check_well_formed()?;
    let table = ReachTable::new(e, r, sigma);
    let states = table.root_reach();
    if !states.iter().all(RegEx::is_nullable) {
        return Err(SynthError::NotContained);
    }
    let init = mk_empty_re(&plus_set(states)).map_err(|_| SynthError::EmptyLanguage)?;

    let mut synth = Synthesizer::new(&table);
    let goal = Goal {
        regex: r.clone(),
        states: [table.target().clone()].into_iter().collect(),
    };
    let inner = synth.up(e, &goal);
    let x = synth.fresh("t");
    let term = CoercionTerm::lam(
        Pattern::var(&x),
        CoercionTerm::app(
            inner,
            pair(CoercionTerm::var(&x), tree_to_term(&init)),
        ),
    );
    Ok(Upcast {
        term,
        registry: synth.registry,
        visits: synth.visits,
    })
}

pub fn downcast(e: &Cfe, r: &RegEx, sigma: &Alphabet) -> Result<Downcast, SynthError> {
    e.check_well_formed()?;
    let table = ReachTable::new(e, r, sigma);
    let residual = plus_set(table.root_reach());
    let mut synth = Synthesizer::new(&table);
    let goal = Goal {
        regex: r.clone(),
        states: [table.target().clone()].into_iter().collect(),
    };
    let term = synth.down(e, &goal);
    Ok(Downcast {
        term,
        registry: synth.registry,
        residual,
        visits: synth.visits,
    })
}

pub fn apply_upcast(
    up: &Upcast,
    tree: &ParseTree,
    fuel: Fuel,
) -> Result<ParseTree, CoercionError> {
    let v = apply_coercion(&up.term, &[tree_to_value(tree)], &up.registry, fuel)?;
    value_to_tree(&v).ok_or(CoercionError::WrongResult)
}

pub fn apply_downcast(
    dn: &Downcast,
    tree: &ParseTree,
    fuel: Fuel,
) -> Result<Option<(ParseTree, ParseTree)>, CoercionError> {
    let v = apply_coercion(&dn.term, &[tree_to_value(tree)], &dn.registry, fuel)?;
    match as_maybe(&v) {
        Some(None) => Ok(None),
        Some(Some(payload)) => {
            let (p, t) = as_pair(payload).ok_or(CoercionError::WrongResult)?;
            match (value_to_tree(p), value_to_tree(t)) {
                (Some(p), Some(t)) => Ok(Some((p, t))),
                _ => Err(CoercionError::WrongResult),
            }
        }
        None => Err(CoercionError::WrongResult),
    }
}

/// The full language over an alphabet, `(a+b+...)*`.
pub fn sigma_star(sigma: &Alphabet) -> RegEx {
    let syms: BTreeSet<RegEx> = sigma.symbols().iter().copied().map(RegEx::sym).collect();
    RegEx::star(plus_set(&syms))
}

/// A parser for a guarded expression, built as a downcast from the full
/// language over the alphabet.
#[derive(Clone, Debug)]
pub struct Parser {
    e: Cfe,
    r: RegEx,
    dn: Downcast,
}

pub fn predictive_parser(e: &Cfe, sigma: &Alphabet) -> Result<Parser, ParserError> {
    e.check_well_formed().map_err(SynthError::from)?;
    if sigma.is_empty() {
        return Err(ParserError::EmptyAlphabet);
    }
    if !e.is_guarded() {
        return Err(ParserError::NotGuarded);
    }
    let r = sigma_star(sigma);
    let dn = downcast(e, &r, sigma)?;
    Ok(Parser {
        e: e.clone(),
        r,
        dn,
    })
}

impl Parser {
    /// Parses a whole word: the downcast must succeed and consume all
    /// of it. A nonempty residue means only a proper prefix belongs to
    /// the language, which is a failed parse of the word itself.
    pub fn parse(&self, word: &str, fuel: Fuel) -> Result<Option<ParseTree>, CoercionError> {
        let tree = match regex::parse_word(&self.r, word) {
            Some(t) => t,
            None => return Ok(None),
        };
        match apply_downcast(&self.dn, &tree, fuel)? {
            Some((p, rest)) if flatten(&rest).is_empty() => Ok(Some(p)),
            _ => Ok(None),
        }
    }

    pub fn expression(&self) -> &Cfe {
        &self.e
    }

    pub fn target(&self) -> &RegEx {
        &self.r
    }

    pub fn downcast(&self) -> &Downcast {
        &self.dn
    }
}

/// The target a coercion is being built against: a regular expression
/// and the set of canonical states it sums. They are kept separate
/// because the top-level target is the caller's expression verbatim,
/// not its canonical form.
struct Goal {
    regex: RegEx,
    states: BTreeSet<RegEx>,
}

struct Synthesizer<'a> {
    table: &'a ReachTable,
    links: BTreeMap<String, Cfe>,
    registry: PrimRegistry,
    hyps: Vec<((Cfe, RegEx), String)>,
    memo: BTreeMap<(Cfe, RegEx), CoercionTerm>,
    visits: BTreeMap<(Cfe, RegEx), usize>,
    counter: u64,
}

impl<'a> Synthesizer<'a> {
    fn new(table: &'a ReachTable) -> Synthesizer<'a> {
        Synthesizer {
            table,
            links: table.binders().clone(),
            registry: PrimRegistry::new(),
            hyps: Vec::new(),
            memo: BTreeMap::new(),
            visits: BTreeMap::new(),
            counter: 0,
        }
    }

    fn fresh(&mut self, prefix: &str) -> String {
        let n = self.counter;
        self.counter += 1;
        format!("{prefix}{n}")
    }

    /// The residual type after `sub`: sum of states reachable from the
    /// goal states by words of `sub`'s language.
    fn residual(&self, sub: &Cfe, goal: &Goal) -> RegEx {
        plus_set(&self.table.reach_set(sub, &goal.states))
    }

    fn goal_after(&self, sub: &Cfe, goal: &Goal) -> Goal {
        let states = self.table.reach_set(sub, &goal.states);
        Goal {
            regex: plus_set(&states),
            states,
        }
    }

    /// A primitive that reparses its input's word at `tgt`. Sound only
    /// for growing casts, which the assertion pins down.
    fn up_prim(&mut self, src: &RegEx, tgt: &RegEx) -> CoercionTerm {
        assert!(
            regex::contains(src, tgt),
            "upcast primitive endpoints must nest: {src} into {tgt}"
        );
        let id = format!("up:{src}=>{tgt}");
        if !self.registry.contains(&id) {
            let tgt = tgt.clone();
            self.registry.register(&id, move |v| {
                let word = match value_to_tree(v) {
                    Some(t) => flatten(&t),
                    None => return Value::Wrong,
                };
                match regex::parse_word(&tgt, &word) {
                    Some(t) => tree_to_value(&t),
                    None => Value::Wrong,
                }
            });
        }
        CoercionTerm::prim(id)
    }

    /// A primitive that tests whether its input's word also lives in
    /// the smaller language and reparses it there if so.
    fn down_prim(&mut self, small: &RegEx, big: &RegEx) -> CoercionTerm {
        assert!(
            regex::contains(small, big),
            "downcast primitive endpoints must nest: {small} into {big}"
        );
        let id = format!("dn:{big}=>{small}");
        if !self.registry.contains(&id) {
            let small = small.clone();
            self.registry.register(&id, move |v| {
                let word = match value_to_tree(v) {
                    Some(t) => flatten(&t),
                    None => return Value::Wrong,
                };
                match regex::parse_word(&small, &word) {
                    Some(t) => Value::Con(Constructor::Just, vec![tree_to_value(&t)]),
                    None => Value::Con(Constructor::Nothing, vec![]),
                }
            });
        }
        CoercionTerm::prim(id)
    }

    fn lookup_hyp(&self, mu: &Cfe, regex: &RegEx) -> Option<String> {
        self.hyps
            .iter()
            .rev()
            .find(|(key, _)| &key.0 == mu && &key.1 == regex)
            .map(|(_, name)| name.clone())
    }

    /// Coercion of type `(sub tree, residual tree) -> goal tree`.
    fn up(&mut self, sub: &Cfe, goal: &Goal) -> CoercionTerm {
        match sub {
            Cfe::Phi => {
                let p = self.fresh("p");
                CoercionTerm::lam(
                    Pattern::var(&p),
                    CoercionTerm::case(CoercionTerm::var(&p), vec![]),
                )
            }
            Cfe::Eps => {
                let b = self.up_prim(&self.residual(sub, goal), &goal.regex);
                let t = self.fresh("t");
                CoercionTerm::lam(
                    pair_pat(Pattern::con(Constructor::Eps, vec![]), Pattern::var(&t)),
                    CoercionTerm::app(b, CoercionTerm::var(&t)),
                )
            }
            Cfe::Sym(x) => {
                let src = RegEx::cat(RegEx::sym(*x), self.residual(sub, goal));
                let b = self.up_prim(&src, &goal.regex);
                let p = self.fresh("p");
                let t = self.fresh("t");
                CoercionTerm::lam(
                    pair_pat(Pattern::var(&p), Pattern::var(&t)),
                    CoercionTerm::app(
                        b,
                        CoercionTerm::con(
                            Constructor::Seq,
                            vec![CoercionTerm::var(&p), CoercionTerm::var(&t)],
                        ),
                    ),
                )
            }
            Cfe::Alt(l, r) => {
                let res_all = self.residual(sub, goal);
                let b1 = self.down_prim(&self.residual(l, goal), &res_all);
                let b2 = self.down_prim(&self.residual(r, goal), &res_all);
                let c1 = self.up(l, goal);
                let c2 = self.up(r, goal);
                let p = self.fresh("p");
                let t = self.fresh("t");
                let p1 = self.fresh("p");
                let t1 = self.fresh("t");
                let p2 = self.fresh("p");
                let t2 = self.fresh("t");
                // The narrowing of the residual cannot miss for a tree
                // that really took this branch, so neither arm has a
                // Nothing case: falling through to Wrong would expose a
                // synthesis bug rather than mask it.
                let left = CoercionTerm::case(
                    CoercionTerm::app(b1, CoercionTerm::var(&t)),
                    vec![(
                        Pattern::con(Constructor::Just, vec![Pattern::var(&t1)]),
                        CoercionTerm::app(c1, pair(CoercionTerm::var(&p1), CoercionTerm::var(&t1))),
                    )],
                );
                let right = CoercionTerm::case(
                    CoercionTerm::app(b2, CoercionTerm::var(&t)),
                    vec![(
                        Pattern::con(Constructor::Just, vec![Pattern::var(&t2)]),
                        CoercionTerm::app(c2, pair(CoercionTerm::var(&p2), CoercionTerm::var(&t2))),
                    )],
                );
                CoercionTerm::lam(
                    pair_pat(Pattern::var(&p), Pattern::var(&t)),
                    CoercionTerm::case(
                        CoercionTerm::var(&p),
                        vec![
                            (Pattern::con(Constructor::Inl, vec![Pattern::var(&p1)]), left),
                            (Pattern::con(Constructor::Inr, vec![Pattern::var(&p2)]), right),
                        ],
                    ),
                )
            }
            Cfe::Cat(l, r) => {
                let mid = self.goal_after(l, goal);
                let c1 = self.up(l, goal);
                let c2 = self.up(r, &mid);
                let p1 = self.fresh("p");
                let p2 = self.fresh("p");
                let t = self.fresh("t");
                CoercionTerm::lam(
                    pair_pat(
                        Pattern::con(
                            Constructor::Seq,
                            vec![Pattern::var(&p1), Pattern::var(&p2)],
                        ),
                        Pattern::var(&t),
                    ),
                    CoercionTerm::app(
                        c1,
                        pair(
                            CoercionTerm::var(&p1),
                            CoercionTerm::app(
                                c2,
                                pair(CoercionTerm::var(&p2), CoercionTerm::var(&t)),
                            ),
                        ),
                    ),
                )
            }
            Cfe::Var(name) => {
                let mu = self.links[name].clone();
                match self.lookup_hyp(&mu, &goal.regex) {
                    Some(v) => CoercionTerm::var(v),
                    None => self.up_mu(&mu, goal),
                }
            }
            Cfe::Mu(..) => self.up_mu(sub, goal),
        }
    }

    fn up_mu(&mut self, mu: &Cfe, goal: &Goal) -> CoercionTerm {
        let key = (mu.clone(), goal.regex.clone());
        if let Some(term) = self.memo.get(&key) {
            return term.clone();
        }
        *self.visits.entry(key.clone()).or_insert(0) += 1;
        let binder = match mu {
            Cfe::Mu(name, _) => name,
            _ => unreachable!("only fixed points enter up_mu"),
        };
        let hyp = format!("v_{binder}#{}", goal.regex);
        self.hyps.push((key.clone(), hyp.clone()));
        let body = match mu {
            Cfe::Mu(_, body) => body.clone(),
            _ => unreachable!(),
        };
        let inner = self.up(&body, goal);
        self.hyps.pop();

        let p = self.fresh("p");
        let t = self.fresh("t");
        let term = CoercionTerm::rec(
            &hyp,
            CoercionTerm::lam(
                pair_pat(
                    Pattern::con(Constructor::Fold, vec![Pattern::var(&p)]),
                    Pattern::var(&t),
                ),
                CoercionTerm::app(inner, pair(CoercionTerm::var(&p), CoercionTerm::var(&t))),
            ),
        );
        if term.free_vars().is_empty() {
            self.memo.insert(key, term.clone());
        }
        term
    }

    /// Coercion of type `goal tree -> Maybe (sub tree, residual tree)`.
    fn down(&mut self, sub: &Cfe, goal: &Goal) -> CoercionTerm {
        match sub {
            Cfe::Phi => {
                let t = self.fresh("t");
                CoercionTerm::lam(Pattern::var(&t), nothing())
            }
            Cfe::Eps => {
                let b = self.up_prim(&goal.regex, &self.residual(sub, goal));
                let t = self.fresh("t");
                CoercionTerm::lam(
                    Pattern::var(&t),
                    just(pair(
                        CoercionTerm::con(Constructor::Eps, vec![]),
                        CoercionTerm::app(b, CoercionTerm::var(&t)),
                    )),
                )
            }
            Cfe::Sym(x) => {
                let small = RegEx::cat(RegEx::sym(*x), self.residual(sub, goal));
                let b = self.down_prim(&small, &goal.regex);
                let t = self.fresh("t");
                let p = self.fresh("p");
                let t1 = self.fresh("t");
                CoercionTerm::lam(
                    Pattern::var(&t),
                    CoercionTerm::case(
                        CoercionTerm::app(b, CoercionTerm::var(&t)),
                        vec![
                            (nothing_pat(), nothing()),
                            (
                                Pattern::con(
                                    Constructor::Just,
                                    vec![Pattern::con(
                                        Constructor::Seq,
                                        vec![Pattern::var(&p), Pattern::var(&t1)],
                                    )],
                                ),
                                just(pair(CoercionTerm::var(&p), CoercionTerm::var(&t1))),
                            ),
                        ],
                    ),
                )
            }
            Cfe::Alt(l, r) => {
                let res_all = self.residual(sub, goal);
                let b1 = self.up_prim(&self.residual(l, goal), &res_all);
                let b2 = self.up_prim(&self.residual(r, goal), &res_all);
                let c1 = self.down(l, goal);
                let c2 = self.down(r, goal);
                let t = self.fresh("t");
                let p1 = self.fresh("p");
                let t1 = self.fresh("t");
                let p2 = self.fresh("p");
                let t2 = self.fresh("t");
                let try_right = CoercionTerm::case(
                    CoercionTerm::app(c2, CoercionTerm::var(&t)),
                    vec![
                        (
                            just_pat(pair_pat(Pattern::var(&p2), Pattern::var(&t2))),
                            just(pair(
                                CoercionTerm::con(Constructor::Inr, vec![CoercionTerm::var(&p2)]),
                                CoercionTerm::app(b2, CoercionTerm::var(&t2)),
                            )),
                        ),
                        (nothing_pat(), nothing()),
                    ],
                );
                CoercionTerm::lam(
                    Pattern::var(&t),
                    CoercionTerm::case(
                        CoercionTerm::app(c1, CoercionTerm::var(&t)),
                        vec![
                            (
                                just_pat(pair_pat(Pattern::var(&p1), Pattern::var(&t1))),
                                just(pair(
                                    CoercionTerm::con(
                                        Constructor::Inl,
                                        vec![CoercionTerm::var(&p1)],
                                    ),
                                    CoercionTerm::app(b1, CoercionTerm::var(&t1)),
                                )),
                            ),
                            (nothing_pat(), try_right),
                        ],
                    ),
                )
            }
            Cfe::Cat(l, r) => {
                let mid = self.goal_after(l, goal);
                let c1 = self.down(l, goal);
                let c2 = self.down(r, &mid);
                let t = self.fresh("t");
                let p1 = self.fresh("p");
                let t1 = self.fresh("t");
                let p2 = self.fresh("p");
                let t2 = self.fresh("t");
                let after_left = CoercionTerm::case(
                    CoercionTerm::app(c2, CoercionTerm::var(&t1)),
                    vec![
                        (
                            just_pat(pair_pat(Pattern::var(&p2), Pattern::var(&t2))),
                            just(pair(
                                CoercionTerm::con(
                                    Constructor::Seq,
                                    vec![CoercionTerm::var(&p1), CoercionTerm::var(&p2)],
                                ),
                                CoercionTerm::var(&t2),
                            )),
                        ),
                        (nothing_pat(), nothing()),
                    ],
                );
                CoercionTerm::lam(
                    Pattern::var(&t),
                    CoercionTerm::case(
                        CoercionTerm::app(c1, CoercionTerm::var(&t)),
                        vec![
                            (
                                just_pat(pair_pat(Pattern::var(&p1), Pattern::var(&t1))),
                                after_left,
                            ),
                            (nothing_pat(), nothing()),
                        ],
                    ),
                )
            }
            Cfe::Var(name) => {
                let mu = self.links[name].clone();
                match self.lookup_hyp(&mu, &goal.regex) {
                    Some(v) => CoercionTerm::var(v),
                    None => self.down_mu(&mu, goal),
                }
            }
            Cfe::Mu(..) => self.down_mu(sub, goal),
        }
    }

    fn down_mu(&mut self, mu: &Cfe, goal: &Goal) -> CoercionTerm {
        let key = (mu.clone(), goal.regex.clone());
        if let Some(term) = self.memo.get(&key) {
            return term.clone();
        }
        *self.visits.entry(key.clone()).or_insert(0) += 1;
        let (binder, body) = match mu {
            Cfe::Mu(name, body) => (name.clone(), body.clone()),
            _ => unreachable!("only fixed points enter down_mu"),
        };
        let hyp = format!("v_{binder}#{}", goal.regex);
        self.hyps.push((key.clone(), hyp.clone()));
        let inner = self.down(&body, goal);
        self.hyps.pop();

        let t = self.fresh("t");
        let p = self.fresh("p");
        let t1 = self.fresh("t");
        let term = CoercionTerm::rec(
            &hyp,
            CoercionTerm::lam(
                Pattern::var(&t),
                CoercionTerm::case(
                    CoercionTerm::app(inner, CoercionTerm::var(&t)),
                    vec![
                        (
                            just_pat(pair_pat(Pattern::var(&p), Pattern::var(&t1))),
                            just(pair(
                                CoercionTerm::con(Constructor::Fold, vec![CoercionTerm::var(&p)]),
                                CoercionTerm::var(&t1),
                            )),
                        ),
                        (nothing_pat(), nothing()),
                    ],
                ),
            ),
        );
        if term.free_vars().is_empty() {
            self.memo.insert(key, term.clone());
        }
        term
    }
}

fn tree_to_term(t: &ParseTree) -> CoercionTerm {
    match t {
        ParseTree::Eps => CoercionTerm::con(Constructor::Eps, vec![]),
        ParseTree::Sym(x) => CoercionTerm::con(
            Constructor::Sym,
            vec![CoercionTerm::con(Constructor::Lit(*x), vec![])],
        ),
        ParseTree::Inl(t) => CoercionTerm::con(Constructor::Inl, vec![tree_to_term(t)]),
        ParseTree::Inr(t) => CoercionTerm::con(Constructor::Inr, vec![tree_to_term(t)]),
        ParseTree::Seq(l, r) => {
            CoercionTerm::con(Constructor::Seq, vec![tree_to_term(l), tree_to_term(r)])
        }
        ParseTree::Fold(t) => CoercionTerm::con(Constructor::Fold, vec![tree_to_term(t)]),
    }
}

fn pair(a: CoercionTerm, b: CoercionTerm) -> CoercionTerm {
    CoercionTerm::con(Constructor::Pair, vec![a, b])
}

fn pair_pat(a: Pattern, b: Pattern) -> Pattern {
    Pattern::con(Constructor::Pair, vec![a, b])
}

fn just(t: CoercionTerm) -> CoercionTerm {
    CoercionTerm::con(Constructor::Just, vec![t])
}

fn just_pat(p: Pattern) -> Pattern {
    Pattern::con(Constructor::Just, vec![p])
}

fn nothing() -> CoercionTerm {
    CoercionTerm::con(Constructor::Nothing, vec![])
}

fn nothing_pat() -> Pattern {
    Pattern::con(Constructor::Nothing, vec![])
}
