//! The transducer representation shared by every construction in the crate.
//!
//! An [`Fst`] is a plain adjacency list: dense state ids, one start state, a
//! final flag per state and a list of arcs per state. Each arc carries an
//! input and an output [`Label`], either of which may be [`EPSILON`]. An
//! acceptor is a transducer whose arcs all have equal input and output
//! labels.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt::Write as _;

use super::FsaError;

/// Arc label. `0` is epsilon; every other value is a Unicode scalar value.
pub type Label = u32;

/// The empty label. Never a member of any alphabet.
pub const EPSILON: Label = 0;

pub type StateId = u32;

/// Converts a symbol to its label.
///
/// # Panics
///
/// Panics on `'\0'`, which is reserved for epsilon.
pub fn label(c: char) -> Label {
    assert!(c != '\0', "NUL is reserved for epsilon");
    c as Label
}

/// Converts a non-epsilon label back to its symbol.
pub fn symbol(l: Label) -> Option<char> {
    if l == EPSILON {
        None
    } else {
        char::from_u32(l)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arc {
    pub ilabel: Label,
    pub olabel: Label,
    pub next: StateId,
}

impl Arc {
    pub fn new(ilabel: Label, olabel: Label, next: StateId) -> Self {
        Arc { ilabel, olabel, next }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct State {
    arcs: Vec<Arc>,
    is_final: bool,
}

/// A finite-state transducer over [`Label`] pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fst {
    states: Vec<State>,
    start: StateId,
    deterministic: bool,
    minimal: bool,
}

impl Default for Fst {
    fn default() -> Self {
        Fst::new()
    }
}

impl Fst {
    /// A machine with a single non-final start state: the empty relation.
    pub fn new() -> Self {
        Fst {
            states: vec![State::default()],
            start: 0,
            deterministic: false,
            minimal: false,
        }
    }

    /// Accepts exactly the empty string.
    pub fn epsilon() -> Self {
        let mut f = Fst::new();
        f.set_final(0, true);
        f
    }

    /// Accepts exactly `s`, as an acceptor.
    pub fn from_str_acceptor(s: &str) -> Self {
        let mut f = Fst::new();
        let mut cur = f.start;
        for c in s.chars() {
            let n = f.add_state();
            f.add_arc(cur, Arc::new(label(c), label(c), n));
            cur = n;
        }
        f.set_final(cur, true);
        f
    }

    /// Maps exactly `input` to exactly `output`, aligned symbol by symbol and
    /// padded with epsilons on the shorter side.
    pub fn from_pair(input: &str, output: &str) -> Self {
        let ins: Vec<Label> = input.chars().map(label).collect();
        let outs: Vec<Label> = output.chars().map(label).collect();
        let mut f = Fst::new();
        let mut cur = f.start;
        for k in 0..ins.len().max(outs.len()) {
            let n = f.add_state();
            let i = ins.get(k).copied().unwrap_or(EPSILON);
            let o = outs.get(k).copied().unwrap_or(EPSILON);
            f.add_arc(cur, Arc::new(i, o, n));
            cur = n;
        }
        f.set_final(cur, true);
        f
    }

    /// Accepts every single symbol of `symbols`.
    pub fn symbol_set<I: IntoIterator<Item = Label>>(symbols: I) -> Self {
        let mut f = Fst::new();
        let fin = f.add_state();
        f.set_final(fin, true);
        let set: BTreeSet<Label> = symbols.into_iter().filter(|&l| l != EPSILON).collect();
        for l in set {
            f.add_arc(0, Arc::new(l, l, fin));
        }
        f
    }

    /// `symbols*` as a one-state acceptor.
    pub fn sigma_star<I: IntoIterator<Item = Label>>(symbols: I) -> Self {
        let mut f = Fst::epsilon();
        let set: BTreeSet<Label> = symbols.into_iter().filter(|&l| l != EPSILON).collect();
        for l in set {
            f.add_arc(0, Arc::new(l, l, 0));
        }
        f
    }

    pub fn add_state(&mut self) -> StateId {
        self.states.push(State::default());
        self.invalidate();
        (self.states.len() - 1) as StateId
    }

    pub fn add_arc(&mut self, from: StateId, arc: Arc) {
        debug_assert!((arc.next as usize) < self.states.len() || arc.next == from);
        self.states[from as usize].arcs.push(arc);
        self.invalidate();
    }

    pub fn set_final(&mut self, s: StateId, is_final: bool) {
        self.states[s as usize].is_final = is_final;
        self.invalidate();
    }

    pub fn set_start(&mut self, s: StateId) {
        self.start = s;
        self.invalidate();
    }

    fn invalidate(&mut self) {
        self.deterministic = false;
        self.minimal = false;
    }

    pub(crate) fn mark_minimal_dfa(&mut self) {
        self.deterministic = true;
        self.minimal = true;
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.states.iter().map(|s| s.arcs.len()).sum()
    }

    pub fn arcs(&self, s: StateId) -> &[Arc] {
        &self.states[s as usize].arcs
    }

    pub fn is_final(&self, s: StateId) -> bool {
        self.states[s as usize].is_final
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        0..self.states.len() as StateId
    }

    pub fn finals(&self) -> impl Iterator<Item = StateId> + '_ {
        self.states().filter(|&s| self.is_final(s))
    }

    /// True when every arc maps a label onto itself.
    pub fn is_acceptor(&self) -> bool {
        self.states.iter().all(|s| s.arcs.iter().all(|a| a.ilabel == a.olabel))
    }

    /// Set by [`determinize_minimize`](super::determinize_minimize); cleared by
    /// any mutation.
    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    pub fn is_minimal(&self) -> bool {
        self.minimal
    }

    /// All labels that occur on either side of some arc.
    pub fn labels(&self) -> BTreeSet<Label> {
        let mut out = BTreeSet::new();
        for s in &self.states {
            for a in &s.arcs {
                if a.ilabel != EPSILON {
                    out.insert(a.ilabel);
                }
                if a.olabel != EPSILON {
                    out.insert(a.olabel);
                }
            }
        }
        out
    }

    pub fn input_labels(&self) -> BTreeSet<Label> {
        self.states
            .iter()
            .flat_map(|s| s.arcs.iter().map(|a| a.ilabel))
            .filter(|&l| l != EPSILON)
            .collect()
    }

    /// Domain acceptor: every arc's output replaced by its input.
    pub fn project_input(&self) -> Fst {
        self.map_arcs(|a| Arc::new(a.ilabel, a.ilabel, a.next))
    }

    /// Range acceptor.
    pub fn project_output(&self) -> Fst {
        self.map_arcs(|a| Arc::new(a.olabel, a.olabel, a.next))
    }

    /// The inverse relation.
    pub fn invert(&self) -> Fst {
        self.map_arcs(|a| Arc::new(a.olabel, a.ilabel, a.next))
    }

    fn map_arcs(&self, f: impl Fn(&Arc) -> Arc) -> Fst {
        let mut out = self.clone();
        for s in &mut out.states {
            for a in &mut s.arcs {
                *a = f(a);
            }
        }
        out.invalidate();
        out
    }

    /// The reversed relation: `(rev x, rev y)` for every `(x, y)`.
    pub fn reverse(&self) -> Fst {
        let mut out = Fst::new();
        for _ in 0..self.states.len() {
            out.add_state();
        }
        // state k of self is state k + 1 of out; 0 is the new start
        for s in self.states() {
            for a in self.arcs(s) {
                out.add_arc(a.next + 1, Arc::new(a.ilabel, a.olabel, s + 1));
            }
            if self.is_final(s) {
                out.add_arc(0, Arc::new(EPSILON, EPSILON, s + 1));
            }
        }
        out.set_final(self.start + 1, true);
        out
    }

    /// Removes states that are not both reachable from the start and able to
    /// reach a final state. The start state is always kept.
    pub fn trim(&self) -> Fst {
        let n = self.states.len();
        let mut fwd = vec![false; n];
        let mut queue = VecDeque::from([self.start]);
        fwd[self.start as usize] = true;
        while let Some(s) = queue.pop_front() {
            for a in self.arcs(s) {
                if !fwd[a.next as usize] {
                    fwd[a.next as usize] = true;
                    queue.push_back(a.next);
                }
            }
        }
        let mut rev_adj: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for s in self.states() {
            for a in self.arcs(s) {
                rev_adj[a.next as usize].push(s);
            }
        }
        let mut bwd = vec![false; n];
        let mut queue: VecDeque<StateId> = self.finals().collect();
        for &s in &queue {
            bwd[s as usize] = true;
        }
        while let Some(s) = queue.pop_front() {
            for &p in &rev_adj[s as usize] {
                if !bwd[p as usize] {
                    bwd[p as usize] = true;
                    queue.push_back(p);
                }
            }
        }
        let keep: Vec<bool> = (0..n).map(|i| (fwd[i] && bwd[i]) || i == self.start as usize).collect();
        let mut remap = vec![u32::MAX; n];
        let mut out = Fst {
            states: Vec::new(),
            start: 0,
            deterministic: false,
            minimal: false,
        };
        // start first so it gets id 0
        let order = std::iter::once(self.start as usize).chain((0..n).filter(|&i| i != self.start as usize));
        for i in order {
            if keep[i] {
                remap[i] = out.states.len() as StateId;
                out.states.push(State {
                    arcs: Vec::new(),
                    is_final: self.states[i].is_final,
                });
            }
        }
        for i in 0..n {
            if !keep[i] {
                continue;
            }
            let src = remap[i] as usize;
            for a in &self.states[i].arcs {
                let t = a.next as usize;
                if keep[t] && fwd[t] && bwd[t] {
                    out.states[src].arcs.push(Arc::new(a.ilabel, a.olabel, remap[t]));
                }
            }
        }
        out
    }

    /// Checks the structural invariant that every arc target is a valid state.
    pub fn validate(&self) -> Result<(), FsaError> {
        let n = self.states.len() as StateId;
        if self.start >= n {
            return Err(FsaError::InvalidState(self.start));
        }
        for s in self.states() {
            for a in self.arcs(s) {
                if a.next >= n {
                    return Err(FsaError::InvalidState(a.next));
                }
            }
        }
        Ok(())
    }

    /// True when some cycle consisting only of epsilon-input arcs emits output.
    /// Such machines relate an input to infinitely many outputs.
    pub fn has_productive_epsilon_cycle(&self) -> bool {
        // SCCs of the epsilon-input subgraph; an arc with output inside an SCC
        // means unbounded insertion.
        let n = self.states.len();
        let adj: Vec<Vec<(StateId, bool)>> = self
            .states
            .iter()
            .map(|s| {
                s.arcs
                    .iter()
                    .filter(|a| a.ilabel == EPSILON)
                    .map(|a| (a.next, a.olabel != EPSILON))
                    .collect()
            })
            .collect();
        let comp = tarjan_scc(n, |s| adj[s].iter().map(|&(t, _)| t as usize).collect());
        adj.iter()
            .enumerate()
            .any(|(s, arcs)| arcs.iter().any(|&(t, out)| out && comp[s] == comp[t as usize]))
    }

    /// All outputs related to `input`. An empty set means rejection.
    ///
    /// Symbols of `input` are matched by their labels; `'\0'` never matches.
    pub fn apply(&self, input: &str) -> BTreeSet<String> {
        let syms: Vec<Label> = input.chars().map(|c| c as Label).collect();
        // configurations (state, output so far) per input position
        let mut frontier: HashSet<(StateId, Vec<Label>)> = HashSet::new();
        frontier.insert((self.start, Vec::new()));
        let cap = 8 * (syms.len() + 1) + 256;
        for pos in 0..=syms.len() {
            // epsilon-input closure at this position
            let mut seen: HashSet<(StateId, Vec<Label>)> = frontier.clone();
            let mut stack: Vec<(StateId, Vec<Label>)> = frontier.into_iter().collect();
            while let Some((s, out)) = stack.pop() {
                for a in self.arcs(s) {
                    if a.ilabel != EPSILON {
                        continue;
                    }
                    let mut o = out.clone();
                    if a.olabel != EPSILON {
                        if o.len() >= cap {
                            continue;
                        }
                        o.push(a.olabel);
                    }
                    let cfg = (a.next, o);
                    if seen.insert(cfg.clone()) {
                        stack.push(cfg);
                    }
                }
            }
            if pos == syms.len() {
                return seen
                    .into_iter()
                    .filter(|(s, _)| self.is_final(*s))
                    .map(|(_, o)| o.into_iter().filter_map(symbol).collect())
                    .collect();
            }
            let sym = syms[pos];
            let mut next = HashSet::new();
            for (s, out) in seen {
                for a in self.arcs(s) {
                    if a.ilabel == sym && sym != EPSILON {
                        let mut o = out.clone();
                        if a.olabel != EPSILON {
                            o.push(a.olabel);
                        }
                        next.insert((a.next, o));
                    }
                }
            }
            if next.is_empty() {
                return BTreeSet::new();
            }
            frontier = next;
        }
        unreachable!()
    }

    /// True when the domain contains `input`.
    pub fn accepts(&self, input: &str) -> bool {
        !self.project_input().apply(input).is_empty()
    }

    /// Line-oriented text dump: a `states N start S` header, one
    /// `src in out dst` line per arc (`~` for epsilon), then one `final S`
    /// line per final state. LF line endings.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "states {} start {}", self.states.len(), self.start);
        let fmt = |l: Label| symbol(l).map_or_else(|| "~".to_string(), |c| c.to_string());
        for s in self.states() {
            for a in self.arcs(s) {
                let _ = writeln!(out, "{} {} {} {}", s, fmt(a.ilabel), fmt(a.olabel), a.next);
            }
        }
        for s in self.finals() {
            let _ = writeln!(out, "final {s}");
        }
        out
    }

    /// Parses the output of [`Fst::dump`].
    pub fn from_dump(text: &str) -> Result<Fst, FsaError> {
        let mut lines = text.lines().enumerate();
        let bad = |line: usize, msg: &str| FsaError::Dump {
            line: line + 1,
            message: msg.to_string(),
        };
        let (_, header) = lines.next().ok_or_else(|| bad(0, "missing header"))?;
        let h: Vec<&str> = header.split(' ').collect();
        let (n, start) = match h.as_slice() {
            ["states", n, "start", s] => (
                n.parse::<usize>().map_err(|_| bad(0, "bad state count"))?,
                s.parse::<StateId>().map_err(|_| bad(0, "bad start state"))?,
            ),
            _ => return Err(bad(0, "expected `states N start S`")),
        };
        let mut f = Fst {
            states: vec![State::default(); n.max(1)],
            start,
            deterministic: false,
            minimal: false,
        };
        let parse_label = |tok: &str, line: usize| -> Result<Label, FsaError> {
            if tok == "~" {
                return Ok(EPSILON);
            }
            let mut cs = tok.chars();
            match (cs.next(), cs.next()) {
                (Some(c), None) if c != '\0' => Ok(c as Label),
                _ => Err(bad(line, "labels are single symbols or `~`")),
            }
        };
        let parse_state = |tok: &str, line: usize| -> Result<StateId, FsaError> {
            let s = tok.parse::<StateId>().map_err(|_| bad(line, "bad state id"))?;
            if (s as usize) < n {
                Ok(s)
            } else {
                Err(FsaError::InvalidState(s))
            }
        };
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split(' ').collect();
            match toks.as_slice() {
                ["final", s] => {
                    let s = parse_state(s, i)?;
                    f.states[s as usize].is_final = true;
                }
                [src, il, ol, dst] => {
                    let src = parse_state(src, i)?;
                    let arc = Arc::new(parse_label(il, i)?, parse_label(ol, i)?, parse_state(dst, i)?);
                    f.states[src as usize].arcs.push(arc);
                }
                _ => return Err(bad(i, "expected `src in out dst` or `final S`")),
            }
        }
        f.validate()?;
        Ok(f)
    }
}

/// Tarjan's strongly connected components; returns a component id per node.
pub(crate) fn tarjan_scc(n: usize, succ: impl Fn(usize) -> Vec<usize>) -> Vec<usize> {
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut next_comp = 0;
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        // iterative DFS: (node, successors, cursor)
        let mut work: Vec<(usize, Vec<usize>, usize)> = vec![(root, succ(root), 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some((v, succs, cursor)) = work.last_mut() {
            let v = *v;
            if *cursor < succs.len() {
                let w = succs[*cursor];
                *cursor += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, succ(w), 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                work.pop();
                if let Some((u, _, _)) = work.last() {
                    low[*u] = low[*u].min(low[v]);
                }
                if low[v] == index[v] {
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn string_acceptor_applies_as_identity() {
        let f = Fst::from_str_acceptor("abc");
        assert_eq!(f.apply("abc"), BTreeSet::from(["abc".to_string()]));
        assert!(f.apply("ab").is_empty());
        assert!(f.is_acceptor());
    }

    #[test]
    fn pair_pads_shorter_side() {
        let f = Fst::from_pair("ab", "xyz");
        assert_eq!(f.apply("ab"), BTreeSet::from(["xyz".to_string()]));
        assert!(!f.is_acceptor());
    }

    #[test]
    fn dump_round_trips() {
        let f = Fst::from_pair("a", "");
        let text = f.dump();
        assert_eq!(text, "states 2 start 0\n0 a ~ 1\nfinal 1\n");
        assert_eq!(Fst::from_dump(&text).unwrap(), f);
    }

    #[test]
    fn dump_rejects_dangling_target() {
        let err = Fst::from_dump("states 1 start 0\n0 a a 3\n").unwrap_err();
        assert!(matches!(err, FsaError::InvalidState(3)));
    }

    #[test]
    fn trim_drops_dead_branches() {
        let mut f = Fst::from_str_acceptor("a");
        let dead = f.add_state();
        f.add_arc(0, Arc::new(label('b'), label('b'), dead));
        assert_eq!(f.trim().num_states(), 2);
    }

    #[test]
    fn detects_unbounded_insertion() {
        let mut f = Fst::epsilon();
        f.add_arc(0, Arc::new(EPSILON, label('x'), 0));
        assert!(f.has_productive_epsilon_cycle());
        assert!(!Fst::sigma_star([label('a')]).has_productive_epsilon_cycle());
    }

    #[test]
    fn reverse_reverses_strings() {
        let f = Fst::from_pair("ab", "cd").reverse();
        assert_eq!(f.apply("ba"), BTreeSet::from(["dc".to_string()]));
    }
}
