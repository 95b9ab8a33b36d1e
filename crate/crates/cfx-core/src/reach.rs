//! Reachability analysis: which canonical derivatives of a regular
//! expression can be reached by reading some word of a context-free
//! expression's language.
//!
//! [`ReachTable`] computes, for every subterm of a closed expression
//! `e` and every descendant `d` of the target, the least set of
//! descendants reachable from `d` by a word of the subterm's language.
//! Containment of `e` in `r` falls out: it holds exactly when every
//! state reachable by a complete word of `e` accepts the empty word.
//!
//! [`check_judgment`] goes the other way: given a claimed table for the
//! fixed points, it re-derives each claimed entry once and accepts any
//! self-consistent claim. The least table always passes, and anything
//! that passes bounds the least table from above.

use std::collections::{BTreeMap, BTreeSet};

use crate::cfe::Cfe;
use crate::regex::{descendants, simp, Alphabet, RegEx};

/// Joint reachability of a closed expression `e` against a regular
/// target `r`, tabulated over `subterms(e) x descendants(simp(r))`.
///
/// The expression must be well formed (closed, distinct binders);
/// construction panics otherwise. The alphabet is extended with the
/// symbols of `e` and `r` so every derivative taken lands back in the
/// descendant set.
#[derive(Clone, Debug)]
pub struct ReachTable {
    sigma: Alphabet,
    root: Cfe,
    target: RegEx,
    descendants: BTreeSet<RegEx>,
    links: BTreeMap<String, Cfe>,
    entries: BTreeMap<(Cfe, RegEx), BTreeSet<RegEx>>,
}

impl ReachTable {
    pub fn new(e: &Cfe, r: &RegEx, sigma: &Alphabet) -> ReachTable {
        if let Err(err) = e.check_well_formed() {
            panic!("reach analysis needs a well-formed expression: {err}");
        }
        let sigma = sigma.union(&Alphabet::from_symbol_sets([e.symbols(), r.symbols()]));
        let target = simp(r);
        let descendants = descendants(&target, &sigma);
        let links = e.binder_map();
        let subs = e.subterms();

        let mut entries: BTreeMap<(Cfe, RegEx), BTreeSet<RegEx>> = BTreeMap::new();
        for sub in &subs {
            for d in &descendants {
                entries.insert((sub.clone(), d.clone()), BTreeSet::new());
            }
        }
        loop {
            let mut changed = false;
            for sub in &subs {
                for d in &descendants {
                    let next = step(sub, d, &entries, &links);
                    let cur = entries
                        .get_mut(&(sub.clone(), d.clone()))
                        .expect("domain covers all pairs");
                    if next != *cur {
                        *cur = next;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }

        ReachTable {
            sigma,
            root: e.clone(),
            target,
            descendants,
            links,
            entries,
        }
    }

    pub fn sigma(&self) -> &Alphabet {
        &self.sigma
    }

    pub fn root(&self) -> &Cfe {
        &self.root
    }

    /// The canonical form of the target the table was built against.
    pub fn target(&self) -> &RegEx {
        &self.target
    }

    pub fn descendants(&self) -> &BTreeSet<RegEx> {
        &self.descendants
    }

    /// Each placeholder of the root paired with the fixed point that
    /// binds it.
    pub fn binders(&self) -> &BTreeMap<String, Cfe> {
        &self.links
    }

    /// Reachable states for a subterm of the root, from one descendant.
    /// `d` is canonicalized first, so the raw target works too.
    pub fn reach(&self, sub: &Cfe, d: &RegEx) -> &BTreeSet<RegEx> {
        let key = (sub.clone(), simp(d));
        self.entries
            .get(&key)
            .unwrap_or_else(|| panic!("({}, {}) is outside the table domain", key.0, key.1))
    }

    /// Union of [`ReachTable::reach`] over a set of start states.
    pub fn reach_set(&self, sub: &Cfe, starts: &BTreeSet<RegEx>) -> BTreeSet<RegEx> {
        let mut out = BTreeSet::new();
        for d in starts {
            out.extend(self.reach(sub, d).iter().cloned());
        }
        out
    }

    /// States reachable by complete words of the root's language.
    pub fn root_reach(&self) -> &BTreeSet<RegEx> {
        self.entries
            .get(&(self.root.clone(), self.target.clone()))
            .expect("root pair is in the domain")
    }

    /// The table restricted to fixed-point subterms, in the shape
    /// [`check_judgment`] takes.
    pub fn fixed_point_entries(&self) -> BTreeMap<(Cfe, RegEx), BTreeSet<RegEx>> {
        self.entries
            .iter()
            .filter(|((sub, _), _)| matches!(sub, Cfe::Mu(..)))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }
}

fn step(
    sub: &Cfe,
    d: &RegEx,
    entries: &BTreeMap<(Cfe, RegEx), BTreeSet<RegEx>>,
    links: &BTreeMap<String, Cfe>,
) -> BTreeSet<RegEx> {
    match sub {
        Cfe::Phi => BTreeSet::new(),
        Cfe::Eps => [d.clone()].into_iter().collect(),
        Cfe::Sym(x) => [simp(&d.deriv(*x))].into_iter().collect(),
        Cfe::Alt(a, b) => {
            let mut out = step(a, d, entries, links);
            out.extend(step(b, d, entries, links));
            out
        }
        Cfe::Cat(a, b) => {
            let mut out = BTreeSet::new();
            for mid in step(a, d, entries, links) {
                out.extend(step(b, &mid, entries, links));
            }
            out
        }
        Cfe::Var(name) => {
            let mu = links
                .get(name)
                .unwrap_or_else(|| panic!("placeholder `{name}` has no binder"));
            entries
                .get(&(mu.clone(), d.clone()))
                .expect("domain covers all pairs")
                .clone()
        }
        Cfe::Mu(_, body) => step(body, d, entries, links),
    }
}

/// Sum of a state set as one canonical regular expression; the empty
/// set is the empty language.
pub fn plus_set(set: &BTreeSet<RegEx>) -> RegEx {
    let mut iter = set.iter().cloned();
    match iter.next() {
        None => RegEx::Phi,
        Some(first) => simp(&iter.fold(first, RegEx::alt)),
    }
}

/// Reachable states of `r` under complete words of `e`, over the union
/// of both symbol sets.
pub fn reach(e: &Cfe, r: &RegEx) -> BTreeSet<RegEx> {
    let sigma = Alphabet::from_symbol_sets([e.symbols(), r.symbols()]);
    ReachTable::new(e, r, &sigma).root_reach().clone()
}

/// Language containment of a context-free expression in a regular one.
pub fn contains(e: &Cfe, r: &RegEx) -> bool {
    reach(e, r).iter().all(RegEx::is_nullable)
}

/// Checks a claimed reachability table instead of computing the least
/// one.
///
/// `claims` maps `(mu subterm, canonical descendant)` to a claimed
/// state set. The main judgment for `e` against `simp(r)` is derived
/// structurally, consulting `claims` whenever a fixed point (or its
/// placeholder) is entered; every consulted pair is then re-derived
/// once from the fixed point's body and must reproduce its claim
/// exactly. Returns the derived root set, or `None` when a needed claim
/// is missing or fails its check.
///
/// The least table always validates, and the result of any validating
/// claim set contains the least table's result pointwise on the pairs
/// the derivation consults. Claims for pairs it never consults are
/// unconstrained; [`check_judgment_with_support`] reports which pairs
/// carried weight.
pub fn check_judgment(
    e: &Cfe,
    r: &RegEx,
    claims: &BTreeMap<(Cfe, RegEx), BTreeSet<RegEx>>,
) -> Option<BTreeSet<RegEx>> {
    check_judgment_with_support(e, r, claims).map(|(root, _)| root)
}

/// Like [`check_judgment`], but also returns the support of the
/// validation: every `(fixed point, descendant)` pair whose claim was
/// consulted and re-derived.
pub fn check_judgment_with_support(
    e: &Cfe,
    r: &RegEx,
    claims: &BTreeMap<(Cfe, RegEx), BTreeSet<RegEx>>,
) -> Option<(BTreeSet<RegEx>, BTreeSet<(Cfe, RegEx)>)> {
    if let Err(err) = e.check_well_formed() {
        panic!("judgment checking needs a well-formed expression: {err}");
    }
    let links = e.binder_map();
    let target = simp(r);
    let mut used = BTreeSet::new();
    let root = derive(e, &target, claims, &links, &mut used)?;

    let mut validated: BTreeSet<(Cfe, RegEx)> = BTreeSet::new();
    let mut queue: Vec<(Cfe, RegEx)> = used.into_iter().collect();
    while let Some(pair) = queue.pop() {
        if !validated.insert(pair.clone()) {
            continue;
        }
        let body = match &pair.0 {
            Cfe::Mu(_, body) => body,
            _ => unreachable!("only fixed points are claimed"),
        };
        let mut newly = BTreeSet::new();
        let derived = derive(body, &pair.1, claims, &links, &mut newly)?;
        if derived != claims[&pair] {
            return None;
        }
        queue.extend(newly);
    }
    Some((root, validated))
}

fn derive(
    sub: &Cfe,
    d: &RegEx,
    claims: &BTreeMap<(Cfe, RegEx), BTreeSet<RegEx>>,
    links: &BTreeMap<String, Cfe>,
    used: &mut BTreeSet<(Cfe, RegEx)>,
) -> Option<BTreeSet<RegEx>> {
    match sub {
        Cfe::Phi => Some(BTreeSet::new()),
        Cfe::Eps => Some([d.clone()].into_iter().collect()),
        Cfe::Sym(x) => Some([simp(&d.deriv(*x))].into_iter().collect()),
        Cfe::Alt(a, b) => {
            let mut out = derive(a, d, claims, links, used)?;
            out.extend(derive(b, d, claims, links, used)?);
            Some(out)
        }
        Cfe::Cat(a, b) => {
            let mut out = BTreeSet::new();
            for mid in derive(a, d, claims, links, used)? {
                out.extend(derive(b, &mid, claims, links, used)?);
            }
            Some(out)
        }
        Cfe::Var(name) => {
            let mu = links
                .get(name)
                .unwrap_or_else(|| panic!("placeholder `{name}` has no binder"));
            let key = (mu.clone(), d.clone());
            used.insert(key.clone());
            claims.get(&key).cloned()
        }
        Cfe::Mu(..) => {
            let key = (sub.clone(), d.clone());
            used.insert(key.clone());
            claims.get(&key).cloned()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_cfe, parse_regex};

    fn ce(s: &str) -> Cfe {
        parse_cfe(s).unwrap()
    }

    fn re(s: &str) -> RegEx {
        parse_regex(s).unwrap()
    }

    fn set(items: &[&str]) -> BTreeSet<RegEx> {
        items.iter().map(|s| re(s)).collect()
    }

    #[test]
    fn reach_through_a_matching_loop() {
        let e = ce("mu a. x.(a.y)+1");
        assert_eq!(reach(&e, &re("x*.y*")), set(&["x*.y*", "y*"]));
        assert_eq!(reach(&e, &re("x*")), set(&["x*", "0"]));
        assert_eq!(reach(&e, &re("(x+y)*")), set(&["(x+y)*"]));
    }

    #[test]
    fn unproductive_loops_reach_nothing() {
        let e = ce("mu a. a");
        for r in ["x*", "x*.y*", "(x+y)*", "0"] {
            assert_eq!(reach(&e, &re(r)), BTreeSet::new(), "against {r}");
            assert!(contains(&e, &re(r)), "empty language sits inside {r}");
        }
    }

    #[test]
    fn subterm_entries_are_exposed() {
        let e = ce("mu a. x.(a.y)+1");
        let r = re("x*.y*");
        let sigma = Alphabet::new(vec!['x', 'y']);
        let table = ReachTable::new(&e, &r, &sigma);

        assert_eq!(table.descendants(), &set(&["x*.y*", "y*", "0"]));
        let ay = Cfe::cat(Cfe::var("a"), Cfe::Sym('y'));
        assert_eq!(table.reach(&ay, &re("x*.y*")), &set(&["y*"]));
        assert_eq!(table.reach(&ay, &re("y*")), &set(&["y*", "0"]));
        assert_eq!(table.reach(&Cfe::Eps, &re("y*")), &set(&["y*"]));
        assert_eq!(
            table.reach_set(&Cfe::Sym('y'), &set(&["x*.y*", "y*"])),
            set(&["y*"])
        );
    }

    #[test]
    fn containment_verdicts() {
        let cases = [
            ("mu a. x.(a.y)+1", "x*.y*", true),
            ("mu a. x.(a.y)+1", "x*", false),
            ("mu a. x.(a.y)+1", "(x+y)*", true),
            ("mu a. x.a+1", "x*", true),
            ("x+y", "x*", false),
            ("x.y", "x*.y*", true),
            ("1", "0", false),
            ("0", "0", true),
            // (x.y*)* nests one loop in another.
            ("mu a. x.((mu b. y.b+1).a)+1", "(x+y)*", true),
            ("mu a. x.((mu b. y.b+1).a)+1", "x*.y*", false),
        ];
        for (e, r, expect) in cases {
            assert_eq!(contains(&ce(e), &re(r)), expect, "{e} vs {r}");
        }
    }

    #[test]
    fn summed_states_are_canonical() {
        assert_eq!(plus_set(&BTreeSet::new()), RegEx::Phi);
        assert_eq!(plus_set(&set(&["x*.y*"])), re("x*.y*"));
        // Smaller expressions sort first in the canonical sum.
        assert_eq!(plus_set(&set(&["x*.y*", "y*"])).to_string(), "y*+x*.y*");
        assert_eq!(plus_set(&set(&["y*", "0"])), re("y*"));
    }

    #[test]
    fn least_table_validates_itself() {
        for (e, r) in [
            ("mu a. x.(a.y)+1", "x*.y*"),
            ("mu a. x.a+1", "(x+y)*"),
            ("mu a. a", "x*"),
            ("mu a. x.((mu b. y.b+1).a)+1", "(x+y)*"),
        ] {
            let e = ce(e);
            let r = re(r);
            let sigma = Alphabet::from_symbol_sets([e.symbols(), r.symbols()]);
            let table = ReachTable::new(&e, &r, &sigma);
            let claims = table.fixed_point_entries();
            assert_eq!(
                check_judgment(&e, &r, &claims),
                Some(table.root_reach().clone()),
                "{} vs {}",
                e,
                r
            );
        }
    }

    #[test]
    fn self_referential_claims_all_validate() {
        // With mu a. a any claimed set is self-consistent: the body is
        // the placeholder itself.
        let e = ce("mu a. a");
        let r = re("x*");
        for claimed in [set(&[]), set(&["x*"]), set(&["x*", "0"])] {
            let claims = [((e.clone(), re("x*")), claimed.clone())]
                .into_iter()
                .collect();
            assert_eq!(check_judgment(&e, &r, &claims), Some(claimed));
        }
    }

    #[test]
    fn wrong_and_missing_claims_are_rejected() {
        let e = ce("mu a. x.(a.y)+1");
        let r = re("x*.y*");
        let key = (e.clone(), re("x*.y*"));

        // Too small: the body derives more than claimed.
        let small = [(key.clone(), set(&["x*.y*"]))].into_iter().collect();
        assert_eq!(check_judgment(&e, &r, &small), None);

        // Nothing claimed at all.
        assert_eq!(check_judgment(&e, &r, &BTreeMap::new()), None);

        // A consistent over-approximation passes and bounds the least
        // table from above.
        let big_set = set(&["x*.y*", "y*", "0"]);
        let big = [(key, big_set.clone())].into_iter().collect();
        let got = check_judgment(&e, &r, &big).unwrap();
        assert_eq!(got, big_set);
        assert!(got.is_superset(&reach(&e, &r)));
    }

    #[test]
    fn no_fixed_points_means_no_claims_needed() {
        assert_eq!(
            check_judgment(&ce("x.y"), &re("x*.y*"), &BTreeMap::new()),
            Some(set(&["y*"]))
        );
        assert_eq!(
            check_judgment(&ce("1"), &re("(1+0).(x+y)*"), &BTreeMap::new()),
            Some(set(&["(x+y)*"]))
        );
    }
}
