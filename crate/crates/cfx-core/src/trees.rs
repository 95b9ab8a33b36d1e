//! Parse trees and their typing against regular expressions and
//! context-free expressions.
//!
//! A tree records which choices a parse made: `Inl`/`Inr` pick a side of
//! an alternation, `Seq` splits a concatenation, `Fold` enters a fixed
//! point (or one iteration of a star). Flattening a tree recovers the
//! parsed word.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::Value;
use thiserror::Error;

use crate::cfe::Cfe;
use crate::regex::{RegEx, Symbol};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParseTree {
    Eps,
    Sym(Symbol),
    Inl(Box<ParseTree>),
    Inr(Box<ParseTree>),
    Seq(Box<ParseTree>, Box<ParseTree>),
    Fold(Box<ParseTree>),
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("the empty word is not in the language")]
pub struct NotNullable;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeJsonError {
    #[error("expected an object with a \"tag\" field")]
    NotAnObject,
    #[error("unknown tree tag `{0}`")]
    UnknownTag(String),
    #[error("missing field `{0}`")]
    MissingField(&'static str),
    #[error("field `sym` must hold a single character")]
    BadSymbol,
}

impl ParseTree {
    pub fn inl(t: ParseTree) -> ParseTree {
        ParseTree::Inl(Box::new(t))
    }

    pub fn inr(t: ParseTree) -> ParseTree {
        ParseTree::Inr(Box::new(t))
    }

    pub fn seq(l: ParseTree, r: ParseTree) -> ParseTree {
        ParseTree::Seq(Box::new(l), Box::new(r))
    }

    pub fn fold(t: ParseTree) -> ParseTree {
        ParseTree::Fold(Box::new(t))
    }

    pub fn node_count(&self) -> usize {
        match self {
            ParseTree::Eps | ParseTree::Sym(_) => 1,
            ParseTree::Inl(t) | ParseTree::Inr(t) | ParseTree::Fold(t) => 1 + t.node_count(),
            ParseTree::Seq(l, r) => 1 + l.node_count() + r.node_count(),
        }
    }
}

/// The word a tree parses.
pub fn flatten(t: &ParseTree) -> String {
    let mut out = String::new();
    collect_word(t, &mut out);
    out
}

fn collect_word(t: &ParseTree, out: &mut String) {
    match t {
        ParseTree::Eps => {}
        ParseTree::Sym(x) => out.push(*x),
        ParseTree::Inl(t) | ParseTree::Inr(t) | ParseTree::Fold(t) => collect_word(t, out),
        ParseTree::Seq(l, r) => {
            collect_word(l, out);
            collect_word(r, out);
        }
    }
}

/// Does `t` witness a parse of [`flatten`]`(t)` against `r`?
///
/// Star trees are lists: `Fold(Inr(Eps))` ends one, `Fold(Inl(Seq(head,
/// tail)))` prepends one iteration.
pub fn check_re_type(t: &ParseTree, r: &RegEx) -> bool {
    match (t, r) {
        (ParseTree::Eps, RegEx::Eps) => true,
        (ParseTree::Sym(x), RegEx::Sym(y)) => x == y,
        (ParseTree::Inl(t), RegEx::Alt(l, _)) => check_re_type(t, l),
        (ParseTree::Inr(t), RegEx::Alt(_, r)) => check_re_type(t, r),
        (ParseTree::Seq(t1, t2), RegEx::Cat(l, r)) => {
            check_re_type(t1, l) && check_re_type(t2, r)
        }
        (ParseTree::Fold(inner), RegEx::Star(body)) => match &**inner {
            ParseTree::Inr(t) => matches!(**t, ParseTree::Eps),
            ParseTree::Inl(t) => match &**t {
                ParseTree::Seq(head, tail) => {
                    check_re_type(head, body) && check_re_type(tail, r)
                }
                _ => false,
            },
            _ => false,
        },
        _ => false,
    }
}

/// Does `t` witness a parse of [`flatten`]`(t)` against `e`?
///
/// `Fold` enters a fixed point: the child is checked against the
/// unfolding. Recursion is structural on the tree, so this terminates
/// no matter how the expression recurses.
pub fn check_cfe_type(t: &ParseTree, e: &Cfe) -> bool {
    match (t, e) {
        (ParseTree::Eps, Cfe::Eps) => true,
        (ParseTree::Sym(x), Cfe::Sym(y)) => x == y,
        (ParseTree::Inl(t), Cfe::Alt(l, _)) => check_cfe_type(t, l),
        (ParseTree::Inr(t), Cfe::Alt(_, r)) => check_cfe_type(t, r),
        (ParseTree::Seq(t1, t2), Cfe::Cat(l, r)) => {
            check_cfe_type(t1, l) && check_cfe_type(t2, r)
        }
        (ParseTree::Fold(t), Cfe::Mu(name, body)) => {
            check_cfe_type(t, &body.substitute(name, e))
        }
        _ => false,
    }
}

/// A tree for the empty word, when the language has one.
///
/// At a `mu` the witness wraps a witness for the body: nullability never
/// goes through a placeholder, so the body's witness is already a
/// witness for the unfolding.
pub fn mk_empty(e: &Cfe) -> Result<ParseTree, NotNullable> {
    match e {
        Cfe::Eps => Ok(ParseTree::Eps),
        Cfe::Phi | Cfe::Sym(_) | Cfe::Var(_) => Err(NotNullable),
        Cfe::Alt(l, r) => {
            if l.is_nullable() {
                Ok(ParseTree::inl(mk_empty(l)?))
            } else {
                Ok(ParseTree::inr(mk_empty(r)?))
            }
        }
        Cfe::Cat(l, r) => Ok(ParseTree::seq(mk_empty(l)?, mk_empty(r)?)),
        Cfe::Mu(_, body) => Ok(ParseTree::fold(mk_empty(body)?)),
    }
}

/// Regular counterpart of [`mk_empty`]; a star contributes the empty
/// list `Fold(Inr(Eps))`.
pub fn mk_empty_re(r: &RegEx) -> Result<ParseTree, NotNullable> {
    match r {
        RegEx::Eps => Ok(ParseTree::Eps),
        RegEx::Phi | RegEx::Sym(_) => Err(NotNullable),
        RegEx::Alt(l, r) => {
            if l.is_nullable() {
                Ok(ParseTree::inl(mk_empty_re(l)?))
            } else {
                Ok(ParseTree::inr(mk_empty_re(r)?))
            }
        }
        RegEx::Cat(l, r) => Ok(ParseTree::seq(mk_empty_re(l)?, mk_empty_re(r)?)),
        RegEx::Star(_) => Ok(ParseTree::fold(ParseTree::inr(ParseTree::Eps))),
    }
}

/// Every tree of type `e` with at most `max_nodes` nodes. Recursion into
/// a fixed point costs a `Fold` node, so the budget bounds unfolding
/// depth and the enumeration always terminates, left recursion included.
pub fn enumerate_trees(e: &Cfe, max_nodes: usize) -> Vec<ParseTree> {
    let mut out = Vec::new();
    if max_nodes == 0 {
        return out;
    }
    match e {
        Cfe::Phi | Cfe::Var(_) => {}
        Cfe::Eps => out.push(ParseTree::Eps),
        Cfe::Sym(x) => out.push(ParseTree::Sym(*x)),
        Cfe::Alt(l, r) => {
            for t in enumerate_trees(l, max_nodes - 1) {
                out.push(ParseTree::inl(t));
            }
            for t in enumerate_trees(r, max_nodes - 1) {
                out.push(ParseTree::inr(t));
            }
        }
        Cfe::Cat(l, r) => {
            for t1 in enumerate_trees(l, max_nodes - 1) {
                let rest = max_nodes - 1 - t1.node_count();
                for t2 in enumerate_trees(r, rest) {
                    out.push(ParseTree::seq(t1.clone(), t2));
                }
            }
        }
        Cfe::Mu(_, _) => {
            let unfolded = e.unfold().expect("mu unfolds");
            for t in enumerate_trees(&unfolded, max_nodes - 1) {
                out.push(ParseTree::fold(t));
            }
        }
    }
    out
}

pub fn tree_to_json(t: &ParseTree) -> Value {
    let mut obj = serde_json::Map::new();
    match t {
        ParseTree::Eps => {
            obj.insert("tag".into(), "Eps".into());
        }
        ParseTree::Sym(x) => {
            obj.insert("tag".into(), "Sym".into());
            obj.insert("sym".into(), x.to_string().into());
        }
        ParseTree::Inl(t) => {
            obj.insert("tag".into(), "Inl".into());
            obj.insert("child".into(), tree_to_json(t));
        }
        ParseTree::Inr(t) => {
            obj.insert("tag".into(), "Inr".into());
            obj.insert("child".into(), tree_to_json(t));
        }
        ParseTree::Seq(l, r) => {
            obj.insert("tag".into(), "Seq".into());
            obj.insert("left".into(), tree_to_json(l));
            obj.insert("right".into(), tree_to_json(r));
        }
        ParseTree::Fold(t) => {
            obj.insert("tag".into(), "Fold".into());
            obj.insert("child".into(), tree_to_json(t));
        }
    }
    Value::Object(obj)
}

pub fn tree_from_json(v: &Value) -> Result<ParseTree, TreeJsonError> {
    let obj: &serde_json::Map<String, Value> = v.as_object().ok_or(TreeJsonError::NotAnObject)?;
    let tag = obj
        .get("tag")
        .and_then(Value::as_str)
        .ok_or(TreeJsonError::NotAnObject)?;
    let child = |field: &'static str| -> Result<ParseTree, TreeJsonError> {
        tree_from_json(obj.get(field).ok_or(TreeJsonError::MissingField(field))?)
    };
    match tag {
        "Eps" => Ok(ParseTree::Eps),
        "Sym" => {
            let s = obj
                .get("sym")
                .and_then(Value::as_str)
                .ok_or(TreeJsonError::MissingField("sym"))?;
            let mut chars = s.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => Ok(ParseTree::Sym(c)),
                _ => Err(TreeJsonError::BadSymbol),
            }
        }
        "Inl" => Ok(ParseTree::inl(child("child")?)),
        "Inr" => Ok(ParseTree::inr(child("child")?)),
        "Seq" => Ok(ParseTree::seq(child("left")?, child("right")?)),
        "Fold" => Ok(ParseTree::fold(child("child")?)),
        other => Err(TreeJsonError::UnknownTag(other.to_string())),
    }
}

impl fmt::Display for ParseTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseTree::Eps => f.write_str("eps"),
            ParseTree::Sym(x) => write!(f, "{x}"),
            ParseTree::Inl(t) => write!(f, "inl({t})"),
            ParseTree::Inr(t) => write!(f, "inr({t})"),
            ParseTree::Seq(l, r) => write!(f, "seq({l}, {r})"),
            ParseTree::Fold(t) => write!(f, "fold({t})"),
        }
    }
}

/// Groups trees by the word they flatten to; handy in tests.
pub fn trees_by_word(trees: &[ParseTree]) -> BTreeMap<String, Vec<ParseTree>> {
    let mut out: BTreeMap<String, Vec<ParseTree>> = BTreeMap::new();
    for t in trees {
        out.entry(flatten(t)).or_default().push(t.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_cfe, parse_regex};
    use ParseTree::{Eps, Sym};

    fn xy_tree() -> ParseTree {
        // The unique parse of "xy" against mu a. x.(a.y)+1.
        ParseTree::fold(ParseTree::inl(ParseTree::seq(
            Sym('x'),
            ParseTree::seq(ParseTree::fold(ParseTree::inr(Eps)), Sym('y')),
        )))
    }

    #[test]
    fn flattening() {
        assert_eq!(flatten(&Eps), "");
        assert_eq!(flatten(&xy_tree()), "xy");
        let t = ParseTree::seq(Sym('a'), ParseTree::inl(Sym('b')));
        assert_eq!(flatten(&t), "ab");
    }

    #[test]
    fn cfe_typing() {
        let e = parse_cfe("mu a. x.(a.y)+1").unwrap();
        assert!(check_cfe_type(&xy_tree(), &e));
        assert!(check_cfe_type(
            &ParseTree::fold(ParseTree::inr(Eps)),
            &e
        ));
        // Wrong symbol, wrong sum side, missing fold.
        assert!(!check_cfe_type(&ParseTree::fold(ParseTree::inl(Eps)), &e));
        assert!(!check_cfe_type(&ParseTree::inr(Eps), &e));
        assert!(!check_cfe_type(&Sym('x'), &e));
    }

    #[test]
    fn re_typing() {
        let r = parse_regex("x*.y*").unwrap();
        // One x iteration, then one y iteration.
        let t = ParseTree::seq(
            ParseTree::fold(ParseTree::inl(ParseTree::seq(
                Sym('x'),
                ParseTree::fold(ParseTree::inr(Eps)),
            ))),
            ParseTree::fold(ParseTree::inl(ParseTree::seq(
                Sym('y'),
                ParseTree::fold(ParseTree::inr(Eps)),
            ))),
        );
        assert!(check_re_type(&t, &r));
        assert_eq!(flatten(&t), "xy");
        // A star tree must be a proper list.
        let bad = ParseTree::fold(Sym('x'));
        assert!(!check_re_type(&bad, &parse_regex("x*").unwrap()));
    }

    #[test]
    fn empty_word_witnesses() {
        let e = parse_cfe("mu a. x.(a.y)+1").unwrap();
        let t = mk_empty(&e).unwrap();
        assert_eq!(t, ParseTree::fold(ParseTree::inr(Eps)));
        assert!(check_cfe_type(&t, &e));

        assert_eq!(mk_empty(&parse_cfe("x").unwrap()), Err(NotNullable));
        assert_eq!(mk_empty(&parse_cfe("mu a. a").unwrap()), Err(NotNullable));

        let r = parse_regex("x*.(y+1)").unwrap();
        let t = mk_empty_re(&r).unwrap();
        assert_eq!(
            t,
            ParseTree::seq(ParseTree::fold(ParseTree::inr(Eps)), ParseTree::inr(Eps))
        );
        assert!(check_re_type(&t, &r));
        assert_eq!(mk_empty_re(&parse_regex("x.y*").unwrap()), Err(NotNullable));
    }

    #[test]
    fn enumeration_is_well_typed_and_bounded() {
        let e = parse_cfe("mu a. x.(a.y)+1").unwrap();
        let trees = enumerate_trees(&e, 11);
        // fold(inr(eps)) with 3 nodes and the "xy" tree with 9; the
        // "xxyy" tree needs 15.
        assert_eq!(trees.len(), 2);
        for t in &trees {
            assert!(check_cfe_type(t, &e));
            assert!(t.node_count() <= 11);
        }
        // Left alternatives come out first.
        let words: Vec<String> = trees.iter().map(flatten).collect();
        assert_eq!(words, vec!["xy".to_string(), "".to_string()]);
    }

    #[test]
    fn enumeration_handles_left_recursion() {
        let e = parse_cfe("mu a. a.x+1").unwrap();
        let trees = enumerate_trees(&e, 11);
        assert!(!trees.is_empty());
        for t in &trees {
            assert!(check_cfe_type(t, &e));
        }
        let by_word = trees_by_word(&trees);
        assert!(by_word.contains_key(""));
        assert!(by_word.contains_key("x"));

        // The empty language yields no trees at any budget.
        assert!(enumerate_trees(&parse_cfe("mu a. a").unwrap(), 50).is_empty());
    }

    #[test]
    fn ambiguity_shows_up_as_distinct_trees() {
        let e = parse_cfe("x+x").unwrap();
        let trees = enumerate_trees(&e, 4);
        assert_eq!(
            trees,
            vec![ParseTree::inl(Sym('x')), ParseTree::inr(Sym('x'))]
        );
    }

    #[test]
    fn json_round_trip() {
        let trees = [
            Eps,
            Sym('x'),
            xy_tree(),
            ParseTree::seq(ParseTree::inl(Eps), ParseTree::inr(Sym('z'))),
        ];
        for t in &trees {
            let v = tree_to_json(t);
            assert_eq!(tree_from_json(&v).unwrap(), *t);
            // Text form round-trips bit for bit.
            let s = serde_json::to_string(&v).unwrap();
            let v2: Value = serde_json::from_str(&s).unwrap();
            assert_eq!(serde_json::to_string(&v2).unwrap(), s);
        }
        assert_eq!(
            tree_from_json(&serde_json::json!({"tag": "Nope"})),
            Err(TreeJsonError::UnknownTag("Nope".into()))
        );
        assert_eq!(
            tree_from_json(&serde_json::json!({"tag": "Sym", "sym": "xy"})),
            Err(TreeJsonError::BadSymbol)
        );
        assert_eq!(
            tree_from_json(&serde_json::json!([1, 2])),
            Err(TreeJsonError::NotAnObject)
        );
    }
}
