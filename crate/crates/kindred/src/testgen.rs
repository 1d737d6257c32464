//! Deterministic generators backing the property and acceptance suites:
//! seeded random kinds and well-formed contexts for the unifier, and an
//! exhaustive corpus of small datatype programs for the oracle bridges.

use crate::kindcore::{Context, Entry, Kind, UVar};
use crate::surface::{parse_program, Mode, Program};

/// SplitMix64: tiny, seedable, and stable across platforms.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform value in `0..n` (n > 0).
    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    /// True with probability `num/den`.
    pub fn chance(&mut self, num: u64, den: u64) -> bool {
        self.next_u64() % den < num
    }
}

/// A random mono kind of at most `budget` nodes over the given unsolved
/// variables (and, optionally, rigid kind variable names).
pub fn random_kind(
    rng: &mut Rng,
    budget: usize,
    uvars: &[UVar],
    kvars: &[String],
) -> Kind {
    if budget < 3 || rng.chance(1, 3) {
        let leaves = 1 + uvars.len() + kvars.len();
        let pick = rng.below(leaves);
        if pick == 0 {
            return Kind::Star;
        }
        let pick = pick - 1;
        if pick < uvars.len() {
            return Kind::UVar(uvars[pick]);
        }
        return Kind::KVar(kvars[pick - uvars.len()].clone());
    }
    let left = 1 + rng.below(budget - 2);
    let right = budget - 1 - left;
    Kind::arrow(
        random_kind(rng, left, uvars, kvars),
        random_kind(rng, right.max(1), uvars, kvars),
    )
}

/// A random well-formed context with up to `max_uvars` unification variables
/// (a mix of solved and unsolved), optionally interleaved with rigid kind
/// variables. Solutions only mention entries to their left.
pub fn random_context(rng: &mut Rng, max_uvars: usize, with_rigids: bool) -> Context {
    let n = 1 + rng.below(max_uvars);
    let mut entries: Vec<Entry> = Vec::new();
    let mut unsolved: Vec<UVar> = Vec::new();
    let mut rigids: Vec<String> = Vec::new();
    for i in 0..n {
        if with_rigids && rng.chance(1, 4) {
            let name = format!("r{i}");
            entries.push(Entry::KVar(name.clone()));
            rigids.push(name);
        }
        let v = UVar(i as u32);
        // A third of the variables arrive solved, scoped over the prefix.
        if rng.chance(1, 3) && (!unsolved.is_empty() || !rigids.is_empty()) {
            let k = random_kind(rng, 5, &unsolved, &rigids);
            if k.mentions_uvar(v) {
                entries.push(Entry::Unsolved(v));
                unsolved.push(v);
            } else {
                entries.push(Entry::Solved(v, k));
            }
        } else {
            entries.push(Entry::Unsolved(v));
            unsolved.push(v);
        }
    }
    let ctx = Context::from_entries(entries);
    debug_assert!(ctx.wf().is_ok());
    ctx
}

/// The unsolved variables of a context, left to right.
pub fn unsolved_of(ctx: &Context) -> Vec<UVar> {
    ctx.entries()
        .iter()
        .filter_map(|e| match e {
            Entry::Unsolved(v) => Some(*v),
            _ => None,
        })
        .collect()
}

/// Every unification variable declared in a context, solved or not.
pub fn all_uvars_of(ctx: &Context) -> Vec<UVar> {
    ctx.entries()
        .iter()
        .filter_map(|e| match e {
            Entry::Unsolved(v) | Entry::Solved(v, _) => Some(*v),
            _ => None,
        })
        .collect()
}

/// Rigid kind variable names of a context, left to right.
pub fn rigids_of(ctx: &Context) -> Vec<String> {
    ctx.entries()
        .iter()
        .filter_map(|e| match e {
            Entry::KVar(n) => Some(n.clone()),
            _ => None,
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Exhaustive small-program corpus
// ---------------------------------------------------------------------------

/// All type texts of the given nesting depth over the leaf names, combining
/// application and arrows. Leaves are used verbatim: lowercase names are
/// variables, uppercase names type constructors.
fn type_pool(depth: usize, leaves: &[&str]) -> Vec<String> {
    let mut level: Vec<String> = leaves.iter().map(|s| s.to_string()).collect();
    for _ in 1..depth {
        let mut next = level.clone();
        for a in &level {
            for b in &level {
                next.push(format!("({a} ({b}))"));
                next.push(format!("({a} -> {b})"));
            }
        }
        level = next;
    }
    level
}

/// An exhaustive corpus of small Haskell98 programs: every single-argument
/// program over depth-3 types, every two-argument and two-constructor
/// combination over depth-2 types, and every mutually recursive two-
/// declaration program over depth-2 types. All variables are bound and all
/// type constructors declared, so the only rejections are genuine kind
/// errors.
pub fn h98_corpus() -> Vec<Program> {
    let mut sources: Vec<String> = Vec::new();

    let param_shapes: &[(&str, &[&str])] = &[
        ("data T = MkT", &["T"]),
        ("data T a = MkT", &["a", "T"]),
        ("data T a b = MkT", &["a", "b", "T"]),
    ];

    // Single constructor, single argument, types to depth 3.
    for (head, leaves) in param_shapes {
        for t in type_pool(3, leaves) {
            sources.push(format!("{head} ({t})"));
        }
    }

    // Two arguments and two constructors, types to depth 2.
    for (head, leaves) in param_shapes {
        let pool = type_pool(2, leaves);
        for t1 in &pool {
            for t2 in &pool {
                sources.push(format!("{head} ({t1}) ({t2})"));
                sources.push(format!("{head} ({t1}) | MkU ({t2})"));
            }
        }
    }

    // Two declarations with potential mutual recursion, types to depth 2.
    let pool_t = type_pool(2, &["a", "T", "S"]);
    let pool_s = type_pool(2, &["b", "T", "S"]);
    for t1 in &pool_t {
        for t2 in &pool_s {
            sources.push(format!("data T a = MkT ({t1})\ndata S b = MkS ({t2})"));
        }
    }

    sources
        .iter()
        .map(|src| {
            parse_program(src, Mode::H98)
                .unwrap_or_else(|e| panic!("corpus program failed to parse: {src}: {e}"))
        })
        .collect()
}
