//! Brute-force declarative checker.
//!
//! [`declarative_accepts`] checks a program against closed kind assignments
//! using purely syntactic rules — no unification variables anywhere — which
//! makes it trivially correct and a usable ground truth for the inference
//! engines. [`enumerate_monokinds`] provides the finite search space, and
//! [`principal_check`] verifies that every accepted assignment is a
//! substitution instance of an inferred (pre-defaulting) kind scheme.
//!
//! The checker covers the mono type fragment (variables, constructors,
//! application, arrows). Polymorphic kinds are validated through their
//! closed instances; see [`closed_instances`].

use std::collections::BTreeMap;

use crate::diag::{Diagnostic, ErrorCode};
use crate::kindcore::{alpha_eq, Kind, UVar};
use crate::surface::{Program, SurfaceType, TyNode};

/// Maximum enumeration depth; the space grows doubly exponentially above it.
pub const MAX_DEPTH: usize = 4;

fn kind_order(a: &Kind, b: &Kind) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    match a.size().cmp(&b.size()) {
        Ordering::Equal => {}
        other => return other,
    }
    match (a, b) {
        (Kind::Star, Kind::Star) => Ordering::Equal,
        (Kind::Star, _) => Ordering::Less,
        (_, Kind::Star) => Ordering::Greater,
        (Kind::Arrow(a1, b1), Kind::Arrow(a2, b2)) => match kind_order(a1, a2) {
            Ordering::Equal => kind_order(b1, b2),
            other => other,
        },
        _ => unreachable!("enumeration only produces Star and Arrow"),
    }
}

/// All closed mono kinds of arrow-nesting depth at most `depth`, ordered by
/// size and then structurally (`*` before arrows). Depth 0 yields `[*]`;
/// each further level satisfies `count(d) = 1 + count(d-1)^2`.
pub fn enumerate_monokinds(depth: usize) -> Result<Vec<Kind>, Diagnostic> {
    if depth > MAX_DEPTH {
        return Err(Diagnostic::bare(
            ErrorCode::DepthTooLarge,
            format!("enumeration depth {depth} exceeds the maximum of {MAX_DEPTH}"),
        ));
    }
    let mut level = vec![Kind::Star];
    for _ in 0..depth {
        let mut next = vec![Kind::Star];
        for a in &level {
            for b in &level {
                next.push(Kind::arrow(a.clone(), b.clone()));
            }
        }
        level = next;
    }
    level.sort_by(kind_order);
    Ok(level)
}

/// Split a closed kind into exactly `n` argument kinds plus the remainder.
fn spine(kind: &Kind, n: usize) -> Option<(Vec<&Kind>, &Kind)> {
    let mut args = Vec::with_capacity(n);
    let mut k = kind;
    for _ in 0..n {
        match k {
            Kind::Arrow(dom, cod) => {
                args.push(dom.as_ref());
                k = cod;
            }
            _ => return None,
        }
    }
    Some((args, k))
}

fn kind_of(
    t: &SurfaceType,
    params: &BTreeMap<&str, &Kind>,
    assign: &BTreeMap<String, Kind>,
) -> Option<Kind> {
    match &t.node {
        TyNode::Var(n) => params.get(n.as_str()).map(|k| (*k).clone()),
        TyNode::TyCon(n) => assign.get(n).cloned(),
        TyNode::App(f, a) => {
            let kf = kind_of(f, params, assign)?;
            let ka = kind_of(a, params, assign)?;
            match kf {
                Kind::Arrow(dom, cod) if alpha_eq(&dom, &ka) => Some(*cod),
                _ => None,
            }
        }
        TyNode::Arrow(d, c) => {
            let kd = kind_of(d, params, assign)?;
            let kc = kind_of(c, params, assign)?;
            if kd == Kind::Star && kc == Kind::Star {
                Some(Kind::Star)
            } else {
                None
            }
        }
        // The declarative checker covers the mono fragment only; programs
        // with foralls or annotations are judged by directed tests instead.
        TyNode::Forall(_, _) | TyNode::Annot(_, _) => None,
    }
}

/// True iff, with every type constructor at its assigned closed kind and
/// the parameter kinds read off that kind's arrow spine, every constructor
/// argument type has kind `*`. Total and purely syntactic.
pub fn declarative_accepts(p: &Program, assign: &BTreeMap<String, Kind>) -> bool {
    for d in &p.decls {
        let Some(kind) = assign.get(&d.name) else {
            return false;
        };
        let Some((args, rest)) = spine(kind, d.params.len()) else {
            return false; // arity mismatch
        };
        if *rest != Kind::Star {
            return false; // a datatype head must land in *
        }
        let params: BTreeMap<&str, &Kind> = d
            .params
            .iter()
            .map(|p| p.name.as_str())
            .zip(args)
            .collect();
        for c in &d.ctors {
            for arg in &c.args {
                if kind_of(arg, &params, assign) != Some(Kind::Star) {
                    return false;
                }
            }
        }
    }
    true
}

/// All closed instances of a polymorphic kind: substitute every leading
/// `forall` binder with each kind from `enumerate_monokinds(depth)`.
pub fn closed_instances(k: &Kind, depth: usize) -> Result<Vec<Kind>, Diagnostic> {
    let mut binders = Vec::new();
    let mut body = k;
    while let Kind::Forall(v, b) = body {
        binders.push(v.clone());
        body = b;
    }
    let choices = enumerate_monokinds(depth)?;
    let mut out = vec![body.clone()];
    for binder in &binders {
        let mut next = Vec::with_capacity(out.len() * choices.len());
        for partial in &out {
            for c in &choices {
                next.push(partial.subst_kvar(binder, c));
            }
        }
        out = next;
    }
    Ok(out)
}

/// Match a closed kind against a scheme whose unification variables act as
/// pattern metavariables; one binding map is threaded through the whole
/// assignment so the same variable must match equal subtrees everywhere.
fn match_scheme(
    scheme: &Kind,
    closed: &Kind,
    bindings: &mut BTreeMap<UVar, Kind>,
) -> bool {
    match (scheme, closed) {
        (Kind::UVar(v), k) => match bindings.get(v) {
            Some(prev) => prev == k,
            None => {
                bindings.insert(*v, k.clone());
                true
            }
        },
        (Kind::Star, Kind::Star) => true,
        (Kind::Arrow(a1, b1), Kind::Arrow(a2, b2)) => {
            match_scheme(a1, a2, bindings) && match_scheme(b1, b2, bindings)
        }
        _ => false,
    }
}

/// Outcome of a principality check.
#[derive(Debug, Clone, PartialEq)]
pub enum PrincipalOutcome {
    Ok,
    /// The first assignment (in enumeration order) that the declarative
    /// rules accept but that is not an instance of the inferred scheme.
    Counterexample(BTreeMap<String, Kind>),
}

fn decl_accepts(
    d: &crate::surface::DataDecl,
    assign: &BTreeMap<String, Kind>,
) -> bool {
    let Some(kind) = assign.get(&d.name) else {
        return false;
    };
    let Some((args, rest)) = spine(kind, d.params.len()) else {
        return false;
    };
    if *rest != Kind::Star {
        return false;
    }
    let params: BTreeMap<&str, &Kind> = d
        .params
        .iter()
        .map(|p| p.name.as_str())
        .zip(args)
        .collect();
    d.ctors
        .iter()
        .all(|c| c.args.iter().all(|a| kind_of(a, &params, assign) == Some(Kind::Star)))
}

/// Enumerate closed kinds for the group members over `pinned` kinds for
/// everything already judged, calling `found` for each assignment the
/// group's declarations accept. Stops early when `found` returns false.
///
/// This is the per-group declarative judgment: earlier groups contribute
/// their closed (defaulted) kinds, exactly as in the staged program rule.
pub fn for_each_group_assignment(
    p: &Program,
    members: &[usize],
    pinned: &BTreeMap<String, Kind>,
    depth: usize,
    mut found: impl FnMut(&BTreeMap<String, Kind>) -> bool,
) -> Result<(), Diagnostic> {
    let kinds = enumerate_monokinds(depth)?;
    let names: Vec<&str> = members.iter().map(|&i| p.decls[i].name.as_str()).collect();
    let mut choice = vec![0usize; names.len()];
    loop {
        let mut assign = pinned.clone();
        for (n, &i) in names.iter().zip(&choice) {
            assign.insert(n.to_string(), kinds[i].clone());
        }
        let accepted = members.iter().all(|&i| decl_accepts(&p.decls[i], &assign));
        if accepted && !found(&assign) {
            return Ok(());
        }
        let mut pos = 0;
        loop {
            if pos == choice.len() {
                return Ok(());
            }
            choice[pos] += 1;
            if choice[pos] < kinds.len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

/// Does any per-group assignment over `enumerate_monokinds(depth)` satisfy
/// the group's declarations, given the pinned kinds of earlier groups?
pub fn group_satisfiable(
    p: &Program,
    members: &[usize],
    pinned: &BTreeMap<String, Kind>,
    depth: usize,
) -> Result<bool, Diagnostic> {
    let mut any = false;
    for_each_group_assignment(p, members, pinned, depth, |_| {
        any = true;
        false
    })?;
    Ok(any)
}

/// Per-group principality: every assignment accepted for the group (under
/// the pinned earlier kinds) must be an instance of the group's
/// pre-defaulting schemes. Returns the first counterexample.
pub fn group_principal(
    p: &Program,
    members: &[usize],
    pinned: &BTreeMap<String, Kind>,
    schemes: &BTreeMap<String, Kind>,
    depth: usize,
) -> Result<PrincipalOutcome, Diagnostic> {
    let mut outcome = PrincipalOutcome::Ok;
    for_each_group_assignment(p, members, pinned, depth, |assign| {
        let mut bindings = BTreeMap::new();
        let instance = members.iter().all(|&i| {
            let name = &p.decls[i].name;
            match (schemes.get(name), assign.get(name)) {
                (Some(s), Some(k)) => match_scheme(s, k, &mut bindings),
                _ => false,
            }
        });
        if instance {
            true
        } else {
            let member_assign: BTreeMap<String, Kind> = members
                .iter()
                .map(|&i| {
                    let name = p.decls[i].name.clone();
                    let kind = assign.get(&name).unwrap().clone();
                    (name, kind)
                })
                .collect();
            outcome = PrincipalOutcome::Counterexample(member_assign);
            false
        }
    })?;
    Ok(outcome)
}

/// Check that every assignment over `enumerate_monokinds(depth)` accepted by
/// the declarative rules is a substitution instance of `schemes` (the
/// pre-defaulting kinds, which may share unification variables).
pub fn principal_check(
    p: &Program,
    schemes: &BTreeMap<String, Kind>,
    depth: usize,
) -> Result<PrincipalOutcome, Diagnostic> {
    let kinds = enumerate_monokinds(depth)?;
    let names: Vec<&str> = p.decls.iter().map(|d| d.name.as_str()).collect();
    let mut choice = vec![0usize; names.len()];
    loop {
        let assign: BTreeMap<String, Kind> = names
            .iter()
            .zip(&choice)
            .map(|(n, &i)| (n.to_string(), kinds[i].clone()))
            .collect();
        if declarative_accepts(p, &assign) {
            let mut bindings = BTreeMap::new();
            let instance = names.iter().all(|n| {
                match (schemes.get(*n), assign.get(*n)) {
                    (Some(s), Some(k)) => match_scheme(s, k, &mut bindings),
                    _ => false,
                }
            });
            if !instance {
                return Ok(PrincipalOutcome::Counterexample(assign));
            }
        }
        // Advance the odometer.
        let mut pos = 0;
        loop {
            if pos == choice.len() {
                return Ok(PrincipalOutcome::Ok);
            }
            choice[pos] += 1;
            if choice[pos] < kinds.len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{parse_kind, parse_program, Mode};

    fn assign(pairs: &[(&str, &str)]) -> BTreeMap<String, Kind> {
        pairs
            .iter()
            .map(|(n, k)| (n.to_string(), parse_kind(k).unwrap()))
            .collect()
    }

    #[test]
    fn depth_zero_is_star() {
        let ks = enumerate_monokinds(0).unwrap();
        assert_eq!(ks, vec![Kind::Star]);
    }

    #[test]
    fn depth_one_adds_star_to_star() {
        let ks = enumerate_monokinds(1).unwrap();
        assert_eq!(ks, vec![Kind::Star, Kind::arrow(Kind::Star, Kind::Star)]);
    }

    #[test]
    fn depth_two_has_five_kinds_in_order() {
        let ks = enumerate_monokinds(2).unwrap();
        let texts: Vec<String> = ks.iter().map(|k| k.to_string()).collect();
        assert_eq!(
            texts,
            vec![
                "*",
                "* -> *",
                "* -> * -> *",
                "(* -> *) -> *",
                "(* -> *) -> * -> *",
            ]
        );
    }

    #[test]
    fn counts_follow_the_recurrence() {
        let mut prev = 1usize;
        for d in 1..=MAX_DEPTH {
            let n = enumerate_monokinds(d).unwrap().len();
            assert_eq!(n, 1 + prev * prev);
            prev = n;
        }
        // No duplicates at any depth.
        let ks = enumerate_monokinds(3).unwrap();
        let mut texts: Vec<String> = ks.iter().map(|k| k.to_string()).collect();
        texts.sort();
        texts.dedup();
        assert_eq!(texts.len(), ks.len());
    }

    #[test]
    fn depth_cap_is_enforced() {
        let err = enumerate_monokinds(5).unwrap_err();
        assert_eq!(err.code, ErrorCode::DepthTooLarge);
    }

    #[test]
    fn maybe_accepts_exactly_arity_correct_kinds() {
        let p = parse_program("data Maybe a = Nothing | Just a", Mode::H98).unwrap();
        assert!(declarative_accepts(&p, &assign(&[("Maybe", "* -> *")])));
        assert!(!declarative_accepts(&p, &assign(&[("Maybe", "*")])));
        // Over-applied spine: the head would not land in *.
        assert!(!declarative_accepts(&p, &assign(&[("Maybe", "* -> * -> *")])));
        // Just's argument forces the parameter to *.
        assert!(!declarative_accepts(&p, &assign(&[("Maybe", "(* -> *) -> *")])));
    }

    #[test]
    fn app_accepts_matching_application_kinds() {
        let p = parse_program("data App f a = MkApp (f a)", Mode::H98).unwrap();
        assert!(declarative_accepts(&p, &assign(&[("App", "(* -> *) -> * -> *")])));
        assert!(!declarative_accepts(&p, &assign(&[("App", "* -> * -> *")])));
        assert!(declarative_accepts(
            &p,
            &assign(&[("App", "((* -> *) -> *) -> (* -> *) -> *")])
        ));
    }

    #[test]
    fn principal_check_accepts_the_true_scheme() {
        // App's pre-defaulting scheme is (^0 -> *) -> ^0 -> *.
        let p = parse_program("data App f a = MkApp (f a)", Mode::H98).unwrap();
        let scheme: BTreeMap<String, Kind> = [(
            "App".to_string(),
            Kind::arrow(
                Kind::arrow(Kind::UVar(UVar(0)), Kind::Star),
                Kind::arrow(Kind::UVar(UVar(0)), Kind::Star),
            ),
        )]
        .into();
        assert_eq!(
            principal_check(&p, &scheme, 2).unwrap(),
            PrincipalOutcome::Ok
        );
    }

    #[test]
    fn corrupted_scheme_yields_counterexample() {
        // Claiming App :: ^k -> ^k -> * misses (* -> *) -> * -> *.
        let p = parse_program("data App f a = MkApp (f a)", Mode::H98).unwrap();
        let scheme: BTreeMap<String, Kind> = [(
            "App".to_string(),
            Kind::arrow(
                Kind::UVar(UVar(0)),
                Kind::arrow(Kind::UVar(UVar(0)), Kind::Star),
            ),
        )]
        .into();
        match principal_check(&p, &scheme, 2).unwrap() {
            PrincipalOutcome::Counterexample(cx) => {
                assert_eq!(
                    cx.get("App").unwrap().to_string(),
                    "(* -> *) -> * -> *"
                );
            }
            PrincipalOutcome::Ok => panic!("expected a counterexample"),
        }
    }

    #[test]
    fn closed_instances_substitute_binders() {
        let k = parse_kind("forall k. k -> *").unwrap();
        let inst = closed_instances(&k, 1).unwrap();
        let texts: Vec<String> = inst.iter().map(|k| k.to_string()).collect();
        assert_eq!(texts, vec!["* -> *", "(* -> *) -> *"]);
    }

    #[test]
    fn mutual_schemes_share_metavariables() {
        let p = parse_program(
            "data T a = MkT (S a); data S a = MkS (T a)",
            Mode::H98,
        )
        .unwrap();
        let shared = Kind::arrow(Kind::UVar(UVar(0)), Kind::Star);
        let schemes: BTreeMap<String, Kind> = [
            ("T".to_string(), shared.clone()),
            ("S".to_string(), shared),
        ]
        .into();
        assert_eq!(
            principal_check(&p, &schemes, 2).unwrap(),
            PrincipalOutcome::Ok
        );
    }
}
