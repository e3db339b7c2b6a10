use std::collections::BTreeSet;

use super::Cond;

/// A rule schema: every rule conditions on the segment and the current
/// cell, plus the template's context conditions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Template {
    pub id: u32,
    pub conds: Vec<Cond>,
}

impl Template {
    pub fn describe(&self) -> String {
        if self.conds.is_empty() {
            return "segment".into();
        }
        self.conds.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
    }
}

use Cond::{Graph as G, GraphAny as GA, Phone as P, PhoneAny as PA};

/// The standard set: phoneme contexts up to two cells on either side,
/// grapheme contexts of one grapheme on either side.
pub fn standard_templates() -> Vec<Template> {
    let sets: [&[Cond]; 22] = [
        &[],
        &[P(-1)],
        &[P(1)],
        &[P(-2)],
        &[P(2)],
        &[P(-2), P(-1)],
        &[P(1), P(2)],
        &[P(-1), P(1)],
        &[P(-2), P(-1), P(1)],
        &[P(-1), P(1), P(2)],
        &[P(-2), P(-1), P(1), P(2)],
        &[G(-1)],
        &[G(1)],
        &[G(-1), G(1)],
        &[G(-1), P(1)],
        &[P(-1), G(1)],
        &[G(-1), P(-1)],
        &[G(1), P(1)],
        &[G(-1), P(1), P(2)],
        &[P(-2), P(-1), G(1)],
        &[P(-1), G(-1), G(1)],
        &[G(-1), G(1), P(-1), P(1)],
    ];
    sets.iter()
        .enumerate()
        .map(|(i, c)| Template {
            id: i as u32,
            conds: c.to_vec(),
        })
        .collect()
}

/// Number of templates in [`extended_templates`].
pub const EXTENDED_SIZE: usize = 500;

/// The extended set: the standard templates followed by generated ones with
/// windows of up to three graphemes or phoneme cells on either side and
/// disjunctive ("somewhere in the next two cells") conditions, in order of
/// increasing size and reach, truncated to 500.
pub fn extended_templates() -> Vec<Template> {
    let mut atoms = Vec::new();
    for o in [-3i8, -2, -1, 1, 2, 3] {
        atoms.push(P(o));
        atoms.push(G(o));
    }
    for (a, b) in [(-2i8, -1i8), (1, 2), (-3, -1), (1, 3)] {
        atoms.push(PA(a, b));
        atoms.push(GA(a, b));
    }
    let standard = standard_templates();
    let mut seen: BTreeSet<Vec<Cond>> = standard.iter().map(|t| canonical(&t.conds)).collect();
    let mut generated: Vec<Vec<Cond>> = Vec::new();
    for size in 1..=3usize {
        let mut combos = Vec::new();
        choose(&atoms, size, 0, &mut Vec::new(), &mut combos);
        for c in combos {
            if !redundant(&c) {
                generated.push(canonical(&c));
            }
        }
    }
    generated.sort_by_key(|c| (c.len(), c.iter().map(|x| x.reach()).max().unwrap_or(0), c.clone()));
    let mut out = standard;
    for c in generated {
        if out.len() == EXTENDED_SIZE {
            break;
        }
        if seen.insert(c.clone()) {
            out.push(Template {
                id: out.len() as u32,
                conds: c,
            });
        }
    }
    out
}

fn canonical(c: &[Cond]) -> Vec<Cond> {
    let mut v = c.to_vec();
    v.sort();
    v
}

/// Two conditions on the same layer whose offsets overlap say nothing new
/// together.
fn redundant(c: &[Cond]) -> bool {
    for (i, a) in c.iter().enumerate() {
        for b in &c[i + 1..] {
            if a.on_graphemes() == b.on_graphemes() && a.offsets().any(|o| b.offsets().contains(&o)) {
                return true;
            }
        }
    }
    false
}

fn choose(atoms: &[Cond], k: usize, start: usize, cur: &mut Vec<Cond>, out: &mut Vec<Vec<Cond>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in start..atoms.len() {
        cur.push(atoms[i]);
        choose(atoms, k, i + 1, cur, out);
        cur.pop();
    }
}
