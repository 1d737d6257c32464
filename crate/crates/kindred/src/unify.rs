//! First-order unification of kinds under an ordered context.
//!
//! Solving an unsolved variable may require *promotion*: any variable that
//! lives to the right of the one being solved is replaced by a fresh copy
//! inserted to its left, keeping every solution well-scoped. Rigid variables
//! cannot be moved, so a rigid to the right of the target is an escape error.
//!
//! Every call is instrumented: the recursion counts its steps against the
//! bound `4·(|k1| + |k2| + |ctx|)²` and asserts that the lexicographic
//! measure (unsolved entries, problem size) strictly decreases on the way
//! down. A violation panics — it would mean the termination argument broke.

use crate::diag::{Diagnostic, ErrorCode};
use crate::kindcore::{Context, Kind, UVar};

/// Instrumentation of one top-level unification call.
#[derive(Debug, Clone, Copy)]
pub struct UnifyStats {
    /// Recursive unification entries plus promotion node visits.
    pub steps: usize,
    /// The bound the call was checked against.
    pub bound: usize,
}

struct Meter {
    steps: usize,
    bound: usize,
}

impl Meter {
    fn tick(&mut self) {
        self.steps += 1;
        assert!(
            self.steps <= self.bound,
            "unification exceeded its termination bound ({} steps > {})",
            self.steps,
            self.bound
        );
    }
}

/// Move every unification variable free in `k` strictly left of `target`:
/// each offender `^b` right of `target` gets a fresh `^b1` inserted
/// immediately left of `target`, is solved to it, and is replaced by it in
/// the returned kind. The structure of `k` is otherwise unchanged.
///
/// `k` must already be fully substituted. A rigid variable bound right of
/// `target` cannot be moved and yields an escape error.
pub fn promote(ctx: &mut Context, target: UVar, k: &Kind) -> Result<Kind, Diagnostic> {
    let mut meter = Meter { steps: 0, bound: usize::MAX };
    let out = promote_in(ctx, target, k, &mut Vec::new(), &mut meter)?;
    ctx.trace_step(&format!("PROMOTE {target} <- {k}"));
    Ok(out)
}

fn promote_in(
    ctx: &mut Context,
    target: UVar,
    k: &Kind,
    bound: &mut Vec<String>,
    meter: &mut Meter,
) -> Result<Kind, Diagnostic> {
    meter.tick();
    match k {
        Kind::Star => Ok(Kind::Star),
        Kind::Arrow(a, b) => {
            let a2 = promote_in(ctx, target, a, bound, meter)?;
            let b2 = promote_in(ctx, target, b, bound, meter)?;
            Ok(Kind::arrow(a2, b2))
        }
        Kind::Forall(v, b) => {
            bound.push(v.clone());
            let b2 = promote_in(ctx, target, b, bound, meter);
            bound.pop();
            Ok(Kind::Forall(v.clone(), Box::new(b2?)))
        }
        Kind::KVar(n) => {
            if bound.iter().any(|x| x == n) {
                return Ok(k.clone());
            }
            let pos = ctx.position_of_name(n).unwrap_or_else(|| {
                panic!("kind variable '{n}' is unbound in the context during promotion")
            });
            let target_pos = ctx
                .position_of_uvar(target)
                .expect("promotion target must be declared");
            if pos > target_pos {
                Err(Diagnostic::bare(
                    ErrorCode::EscapeError,
                    format!("rigid kind variable '{n}' would escape its scope through {target}"),
                ))
            } else {
                Ok(k.clone())
            }
        }
        Kind::UVar(u) => {
            // A variable this same promotion already moved is solved to its
            // fresh copy; later occurrences reuse it, keeping one copy per
            // variable.
            if let Some(solution) = ctx.solution(*u) {
                let solution = solution.clone();
                return promote_in(ctx, target, &solution, bound, meter);
            }
            let pos_u = ctx
                .position_of_uvar(*u)
                .expect("unification variable must be declared");
            let target_pos = ctx
                .position_of_uvar(target)
                .expect("promotion target must be declared");
            if pos_u < target_pos {
                Ok(k.clone())
            } else {
                let fresh = ctx.insert_unsolved_left_of(target);
                ctx.solve_uvar(*u, Kind::UVar(fresh))
                    .expect("promotion solve is left-of and occurs-free by construction");
                Ok(Kind::UVar(fresh))
            }
        }
    }
}

/// Unify two kinds, refining the context so that applying it to both sides
/// yields syntactically equal kinds (up to alpha-renaming of `forall`s).
pub fn unify(ctx: &mut Context, k1: &Kind, k2: &Kind) -> Result<(), Diagnostic> {
    unify_with_stats(ctx, k1, k2).map(|_| ())
}

/// As [`unify`], returning the instrumentation of the call.
pub fn unify_with_stats(
    ctx: &mut Context,
    k1: &Kind,
    k2: &Kind,
) -> Result<UnifyStats, Diagnostic> {
    let a = ctx.apply(k1);
    let b = ctx.apply(k2);
    let bound = 4 * (a.size() + b.size() + ctx.len()).pow(2);
    let mut meter = Meter { steps: 0, bound };
    unify_rec(ctx, &a, &b, &mut meter, None)?;
    Ok(UnifyStats { steps: meter.steps, bound })
}

fn measure(ctx: &Context, a: &Kind, b: &Kind) -> (usize, usize) {
    (ctx.unsolved_count(), a.size() + b.size())
}

/// Inputs must be fully substituted; every recursive call re-applies the
/// context to the sub-problems, so the invariant is maintained.
fn unify_rec(
    ctx: &mut Context,
    a: &Kind,
    b: &Kind,
    meter: &mut Meter,
    parent: Option<(usize, usize)>,
) -> Result<(), Diagnostic> {
    let m = measure(ctx, a, b);
    if let Some(pm) = parent {
        assert!(
            m < pm,
            "unification measure failed to decrease: {m:?} after {pm:?}"
        );
    }
    meter.tick();
    ctx.trace_step(&format!("UNIFY {a} ~ {b}"));
    match (a, b) {
        (Kind::Star, Kind::Star) => Ok(()),
        (Kind::UVar(u), Kind::UVar(v)) if u == v => Ok(()),
        (Kind::KVar(x), Kind::KVar(y)) => {
            if x == y {
                Ok(())
            } else {
                Err(Diagnostic::bare(
                    ErrorCode::KindMismatch,
                    format!("cannot unify the distinct kind variables '{x}' and '{y}'"),
                ))
            }
        }
        (Kind::UVar(u), other) => solve_flex(ctx, *u, other, meter),
        (other, Kind::UVar(v)) => solve_flex(ctx, *v, other, meter),
        (Kind::Arrow(a1, b1), Kind::Arrow(a2, b2)) => {
            unify_rec(ctx, a1, a2, meter, Some(m))?;
            // Solutions from the domains may have refined the codomains.
            let b1 = ctx.apply(b1);
            let b2 = ctx.apply(b2);
            unify_rec(ctx, &b1, &b2, meter, Some(m))
        }
        (Kind::Forall(x, bx), Kind::Forall(y, by)) => {
            // Compare the bodies under one shared rigid variable, then drop
            // the scratch segment: promotion has already copied anything the
            // surviving entries need to the left of the rigid.
            let shared = ctx.fresh_kvar_name("k");
            let pos = ctx.push_kvar(shared.clone());
            let bx = bx.subst_kvar(x, &Kind::KVar(shared.clone()));
            let by = by.subst_kvar(y, &Kind::KVar(shared));
            let result = unify_rec(ctx, &bx, &by, meter, Some(m));
            ctx.truncate_to(pos);
            result
        }
        (l, r) => Err(Diagnostic::bare(
            ErrorCode::KindMismatch,
            format!("cannot unify '{l}' with '{r}'"),
        )),
    }
}

fn solve_flex(
    ctx: &mut Context,
    v: UVar,
    k: &Kind,
    meter: &mut Meter,
) -> Result<(), Diagnostic> {
    // Two unsolved variables: solve the rightmost to point at the leftmost,
    // which never needs promotion.
    if let Kind::UVar(w) = k {
        let pv = ctx.position_of_uvar(v).expect("uvar declared");
        let pw = ctx.position_of_uvar(*w).expect("uvar declared");
        let (right, left) = if pv > pw { (v, *w) } else { (*w, v) };
        ctx.solve_uvar(right, Kind::UVar(left))
            .expect("rightmost-to-leftmost solve is well-scoped");
        return Ok(());
    }
    if k.mentions_uvar(v) {
        return Err(Diagnostic::bare(
            ErrorCode::OccursCheck,
            format!("cannot construct the infinite kind {v} = {k}"),
        ));
    }
    let mut bound = Vec::new();
    let promoted = promote_in(ctx, v, k, &mut bound, meter)?;
    ctx.trace_step(&format!("PROMOTE {v} <- {k}"));
    ctx.solve_uvar(v, promoted)
        .expect("promotion establishes the solve preconditions");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kindcore::{alpha_eq, Entry};

    fn star() -> Kind {
        Kind::Star
    }

    #[test]
    fn star_unifies_with_star() {
        let mut ctx = Context::new();
        let before = ctx.entries().to_vec();
        unify(&mut ctx, &star(), &star()).unwrap();
        assert_eq!(ctx.entries(), &before[..]);
    }

    #[test]
    fn uvar_solves_to_arrow() {
        let mut ctx = Context::new();
        let a = ctx.fresh_uvar();
        unify(&mut ctx, &Kind::UVar(a), &Kind::arrow(star(), star())).unwrap();
        assert_eq!(ctx.entries(), &[Entry::Solved(a, Kind::arrow(star(), star()))]);
    }

    #[test]
    fn occurs_check_fires() {
        let mut ctx = Context::new();
        let a = ctx.fresh_uvar();
        let err = unify(
            &mut ctx,
            &Kind::UVar(a),
            &Kind::arrow(Kind::UVar(a), star()),
        )
        .unwrap_err();
        assert_eq!(err.code, ErrorCode::OccursCheck);
    }

    #[test]
    fn unify_promotes_rightward_uvars() {
        // [Unsolved ^a, Unsolved ^b]: unify(^a, ^b -> *)
        //   -> [Unsolved ^b1, Solved(^a, ^b1 -> *), Solved(^b, ^b1)]
        let mut ctx = Context::new();
        let a = ctx.fresh_uvar();
        let b = ctx.fresh_uvar();
        let rhs = Kind::arrow(Kind::UVar(b), star());
        unify(&mut ctx, &Kind::UVar(a), &rhs).unwrap();

        let b1 = UVar(2);
        assert_eq!(
            ctx.entries(),
            &[
                Entry::Unsolved(b1),
                Entry::Solved(a, Kind::arrow(Kind::UVar(b1), star())),
                Entry::Solved(b, Kind::UVar(b1)),
            ]
        );
        // Oracle-style checks: the final context is well-formed and equates
        // both sides after substitution.
        ctx.wf().unwrap();
        assert_eq!(ctx.apply(&Kind::UVar(a)), ctx.apply(&rhs));
    }

    #[test]
    fn promote_is_a_noop_when_everything_is_left() {
        let mut ctx = Context::new();
        let a = ctx.fresh_uvar();
        let before = ctx.entries().to_vec();
        let k = promote(&mut ctx, a, &star()).unwrap();
        assert_eq!(k, star());
        assert_eq!(ctx.entries(), &before[..]);
    }

    #[test]
    fn promote_moves_rightward_uvar() {
        let mut ctx = Context::new();
        let a = ctx.fresh_uvar();
        let b = ctx.fresh_uvar();
        let k = Kind::arrow(Kind::UVar(b), star());
        let k2 = promote(&mut ctx, a, &k).unwrap();

        let b1 = UVar(2);
        assert_eq!(k2, Kind::arrow(Kind::UVar(b1), star()));
        assert_eq!(
            ctx.entries(),
            &[
                Entry::Unsolved(b1),
                Entry::Unsolved(a),
                Entry::Solved(b, Kind::UVar(b1)),
            ]
        );
        ctx.wf().unwrap();
        assert_eq!(ctx.apply(&Kind::UVar(b)), Kind::UVar(b1));
        assert_eq!(ctx.apply(&k), ctx.apply(&k2));
    }

    #[test]
    fn promote_rejects_rigid_escape() {
        let mut ctx = Context::new();
        let a = ctx.fresh_uvar();
        ctx.push_kvar("k");
        let err = promote(&mut ctx, a, &Kind::arrow(Kind::KVar("k".into()), star()))
            .unwrap_err();
        assert_eq!(err.code, ErrorCode::EscapeError);
    }

    #[test]
    fn unify_reports_mismatches() {
        let mut ctx = Context::new();
        let err = unify(&mut ctx, &star(), &Kind::arrow(star(), star())).unwrap_err();
        assert_eq!(err.code, ErrorCode::KindMismatch);

        ctx.push_kvar("k");
        ctx.push_kvar("j");
        let err = unify(&mut ctx, &Kind::KVar("k".into()), &Kind::KVar("j".into()))
            .unwrap_err();
        assert_eq!(err.code, ErrorCode::KindMismatch);

        let forall = Kind::forall("k", Kind::KVar("k".into()));
        let err = unify(&mut ctx, &forall, &star()).unwrap_err();
        assert_eq!(err.code, ErrorCode::KindMismatch);
    }

    #[test]
    fn forall_unification_is_alpha_insensitive() {
        let mut ctx = Context::new();
        let f1 = Kind::forall("k", Kind::arrow(Kind::KVar("k".into()), star()));
        let f2 = Kind::forall("j", Kind::arrow(Kind::KVar("j".into()), star()));
        let len = ctx.len();
        unify(&mut ctx, &f1, &f2).unwrap();
        assert_eq!(ctx.len(), len, "scratch rigid must be dropped");

        let f3 = Kind::forall("k", Kind::arrow(star(), star()));
        let err = unify(&mut ctx, &f1, &f3).unwrap_err();
        assert_eq!(err.code, ErrorCode::KindMismatch);
    }

    #[test]
    fn forall_unification_solves_outer_uvars() {
        let mut ctx = Context::new();
        let a = ctx.fresh_uvar();
        let f1 = Kind::forall("k", Kind::arrow(Kind::KVar("k".into()), Kind::UVar(a)));
        let f2 = Kind::forall("j", Kind::arrow(Kind::KVar("j".into()), star()));
        unify(&mut ctx, &f1, &f2).unwrap();
        assert_eq!(ctx.apply(&Kind::UVar(a)), star());
        assert!(alpha_eq(&ctx.apply(&f1), &ctx.apply(&f2)));
    }

    #[test]
    fn forall_body_cannot_leak_its_binder() {
        // unify(^a -> *, forall-free ... ) via foralls: solving ^a to the
        // shared rigid must fail as an escape.
        let mut ctx = Context::new();
        let a = ctx.fresh_uvar();
        let f1 = Kind::forall("k", Kind::arrow(Kind::KVar("k".into()), star()));
        let f2 = Kind::forall("j", Kind::arrow(Kind::UVar(a), star()));
        let err = unify(&mut ctx, &f1, &f2).unwrap_err();
        assert_eq!(err.code, ErrorCode::EscapeError);
    }

    #[test]
    fn unify_is_deterministic_including_fresh_ids() {
        let run = || {
            let mut ctx = Context::new();
            let a = ctx.fresh_uvar();
            let b = ctx.fresh_uvar();
            let c = ctx.fresh_uvar();
            let lhs = Kind::arrow(Kind::UVar(a), Kind::UVar(b));
            let rhs = Kind::arrow(Kind::arrow(Kind::UVar(c), star()), Kind::UVar(c));
            unify(&mut ctx, &lhs, &rhs).unwrap();
            ctx.render()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn stats_respect_bound() {
        let mut ctx = Context::new();
        let a = ctx.fresh_uvar();
        let stats = unify_with_stats(
            &mut ctx,
            &Kind::UVar(a),
            &Kind::arrow(star(), Kind::arrow(star(), star())),
        )
        .unwrap();
        assert!(stats.steps <= stats.bound);
        assert!(stats.steps >= 1);
    }
}
