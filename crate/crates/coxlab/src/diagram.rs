//! Coxeter diagram data model: edge labels, node sets, parsing/formatting,
//! canonical forms and the neighbor calculus.
//!
//! Conventions: label m >= 3 is a finite edge, m = 2 means "not joined" and is
//! never stored, a dotted edge marks a divergent facet pair. Node indices are
//! 0..n-1; names are annotations only.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

/// Edge label between two distinct nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeLabel {
    /// Not joined (m = 2). The unique representation of right angles.
    Absent,
    /// Finite label m >= 3.
    Finite(u32),
    /// Divergent pair; carries no numeric weight.
    Dotted,
}

impl EdgeLabel {
    pub fn finite(self) -> Option<u32> {
        match self {
            EdgeLabel::Finite(m) => Some(m),
            _ => None,
        }
    }

    pub fn is_dotted(self) -> bool {
        matches!(self, EdgeLabel::Dotted)
    }

    pub fn is_edge(self) -> bool {
        !matches!(self, EdgeLabel::Absent)
    }

    /// Sort key used by canonical forms; dotted is its own label class.
    fn canon_code(self) -> u32 {
        match self {
            EdgeLabel::Absent => 2,
            EdgeLabel::Finite(m) => m,
            EdgeLabel::Dotted => u32::MAX,
        }
    }
}

/// Subset of nodes of a host diagram, as a bitmask (n <= 64).
pub type NodeSet = u64;

pub fn nodeset_from<I: IntoIterator<Item = usize>>(iter: I) -> NodeSet {
    iter.into_iter().fold(0, |acc, v| acc | (1 << v))
}

pub fn nodeset_members(s: NodeSet) -> Vec<usize> {
    (0..64).filter(|i| s & (1 << i) != 0).collect()
}

pub fn nodeset_len(s: NodeSet) -> usize {
    s.count_ones() as usize
}

#[derive(Debug, Error)]
pub enum DiagramError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: duplicate edge {i}-{j}")]
    DuplicateEdge { line: usize, i: usize, j: usize },
    #[error("line {line}: node index {idx} out of range (n = {n})")]
    IndexOutOfRange { line: usize, idx: usize, n: usize },
    #[error("line {line}: label {label} < 3 (write right angles by omission)")]
    LabelTooSmall { line: usize, label: u32 },
    #[error("diagram too large: {n} nodes (limit 64)")]
    TooLarge { n: usize },
}

/// Edge-labeled diagram on nodes 0..n-1. Immutable once built.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Diagram {
    n: usize,
    /// Upper-triangular dense labels, row-major over pairs i < j.
    labels: Vec<EdgeLabel>,
    names: Vec<Option<String>>,
}

impl std::fmt::Debug for Diagram {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_inline())
    }
}

fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

impl Diagram {
    pub fn new(n: usize) -> Self {
        assert!(n <= 64, "diagram too large");
        Diagram {
            n,
            labels: vec![EdgeLabel::Absent; n * (n - 1) / 2],
            names: vec![None; n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn label(&self, i: usize, j: usize) -> EdgeLabel {
        if i == j {
            return EdgeLabel::Absent;
        }
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.labels[pair_index(self.n, i, j)]
    }

    pub fn set_label(&mut self, i: usize, j: usize, l: EdgeLabel) {
        assert!(i != j);
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        let idx = pair_index(self.n, i, j);
        self.labels[idx] = l;
    }

    pub fn set_name(&mut self, i: usize, name: &str) {
        self.names[i] = Some(name.to_string());
    }

    pub fn name(&self, i: usize) -> Option<&str> {
        self.names[i].as_deref()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, EdgeLabel)> + '_ {
        (0..self.n).flat_map(move |i| {
            ((i + 1)..self.n).filter_map(move |j| {
                let l = self.label(i, j);
                l.is_edge().then_some((i, j, l))
            })
        })
    }

    pub fn dotted_edges(&self) -> Vec<(usize, usize)> {
        self.edges()
            .filter(|&(_, _, l)| l.is_dotted())
            .map(|(i, j, _)| (i, j))
            .collect()
    }

    pub fn dotted_count(&self) -> usize {
        self.edges().filter(|&(_, _, l)| l.is_dotted()).count()
    }

    pub fn max_finite_label(&self) -> u32 {
        self.edges()
            .filter_map(|(_, _, l)| l.finite())
            .max()
            .unwrap_or(2)
    }

    pub fn joined(&self, i: usize, j: usize) -> bool {
        self.label(i, j).is_edge()
    }

    /// Nodes of `set` adjacent (by any edge) to node v.
    pub fn attaches(&self, v: usize, set: NodeSet) -> bool {
        nodeset_members(set).iter().any(|&u| u != v && self.joined(v, u))
    }

    /// Induced subdiagram; node order follows ascending members of `set`.
    pub fn induced(&self, set: NodeSet) -> Diagram {
        let members = nodeset_members(set);
        let mut d = Diagram::new(members.len());
        for (a, &i) in members.iter().enumerate() {
            if let Some(name) = &self.names[i] {
                d.names[a] = Some(name.clone());
            }
            for (b, &j) in members.iter().enumerate().skip(a + 1) {
                d.set_label(a, b, self.label(i, j));
            }
        }
        d
    }

    pub fn full_set(&self) -> NodeSet {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    /// Connected components of the induced subdiagram on `set`.
    pub fn components_of(&self, set: NodeSet) -> Vec<NodeSet> {
        let mut seen: NodeSet = 0;
        let mut out = Vec::new();
        for s in nodeset_members(set) {
            if seen & (1 << s) != 0 {
                continue;
            }
            let mut comp: NodeSet = 1 << s;
            let mut stack = vec![s];
            seen |= 1 << s;
            while let Some(v) = stack.pop() {
                for u in nodeset_members(set) {
                    if seen & (1 << u) == 0 && self.joined(v, u) {
                        seen |= 1 << u;
                        comp |= 1 << u;
                        stack.push(u);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.components_of(self.full_set()).len() == 1
    }

    /// Extend by one node; returns (new diagram, index of the new node).
    pub fn with_extra_node(&self) -> (Diagram, usize) {
        let mut d = Diagram::new(self.n + 1);
        for (i, j, l) in self.edges() {
            d.set_label(i, j, l);
        }
        for i in 0..self.n {
            if let Some(name) = &self.names[i] {
                d.names[i] = Some(name.clone());
            }
        }
        (d, self.n)
    }

    /// Diagram with one node removed (indices shift down).
    pub fn without_node(&self, v: usize) -> Diagram {
        self.induced(self.full_set() & !(1 << v))
    }
}

// ---------------------------------------------------------------------------
// Parsing and formatting
// ---------------------------------------------------------------------------

impl Diagram {
    /// Parse the line-based file format: `n <count>`, `e <i> <j> <label>`,
    /// `#` comments. Unlisted pairs are absent.
    pub fn parse(text: &str) -> Result<Diagram, DiagramError> {
        let mut n: Option<usize> = None;
        let mut d: Option<Diagram> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let stripped = raw.split('#').next().unwrap_or("").trim();
            if stripped.is_empty() {
                continue;
            }
            let mut it = stripped.split_whitespace();
            match it.next() {
                Some("n") => {
                    if n.is_some() {
                        return Err(DiagramError::Syntax {
                            line,
                            reason: "repeated n header".into(),
                        });
                    }
                    let count: usize = it
                        .next()
                        .ok_or_else(|| DiagramError::Syntax {
                            line,
                            reason: "n requires a count".into(),
                        })?
                        .parse()
                        .map_err(|_| DiagramError::Syntax {
                            line,
                            reason: "bad node count".into(),
                        })?;
                    if count > 64 {
                        return Err(DiagramError::TooLarge { n: count });
                    }
                    n = Some(count);
                    d = Some(Diagram::new(count));
                }
                Some("e") => {
                    let d = d.as_mut().ok_or_else(|| DiagramError::Syntax {
                        line,
                        reason: "edge before n header".into(),
                    })?;
                    let nn = d.n;
                    let parse_idx = |s: Option<&str>| -> Result<usize, DiagramError> {
                        s.ok_or_else(|| DiagramError::Syntax {
                            line,
                            reason: "e requires i j label".into(),
                        })?
                        .parse()
                        .map_err(|_| DiagramError::Syntax {
                            line,
                            reason: "bad node index".into(),
                        })
                    };
                    let i = parse_idx(it.next())?;
                    let j = parse_idx(it.next())?;
                    let lab = it.next().ok_or_else(|| DiagramError::Syntax {
                        line,
                        reason: "e requires i j label".into(),
                    })?;
                    if i >= nn {
                        return Err(DiagramError::IndexOutOfRange { line, idx: i, n: nn });
                    }
                    if j >= nn {
                        return Err(DiagramError::IndexOutOfRange { line, idx: j, n: nn });
                    }
                    if i == j {
                        return Err(DiagramError::Syntax {
                            line,
                            reason: "self-edge".into(),
                        });
                    }
                    let label = if lab == "inf" {
                        EdgeLabel::Dotted
                    } else {
                        let m: u32 = lab.parse().map_err(|_| DiagramError::Syntax {
                            line,
                            reason: format!("bad label `{lab}`"),
                        })?;
                        if m < 3 {
                            return Err(DiagramError::LabelTooSmall { line, label: m });
                        }
                        EdgeLabel::Finite(m)
                    };
                    if d.label(i, j) != EdgeLabel::Absent {
                        return Err(DiagramError::DuplicateEdge {
                            line,
                            i: i.min(j),
                            j: i.max(j),
                        });
                    }
                    d.set_label(i, j, label);
                }
                Some("name") => {
                    let d = d.as_mut().ok_or_else(|| DiagramError::Syntax {
                        line,
                        reason: "name before n header".into(),
                    })?;
                    let i: usize = it
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| DiagramError::Syntax {
                            line,
                            reason: "name requires index and text".into(),
                        })?;
                    if i >= d.n {
                        return Err(DiagramError::IndexOutOfRange { line, idx: i, n: d.n });
                    }
                    let text = it.collect::<Vec<_>>().join(" ");
                    d.names[i] = Some(text);
                }
                Some(other) => {
                    return Err(DiagramError::Syntax {
                        line,
                        reason: format!("unknown directive `{other}`"),
                    })
                }
                None => {}
            }
        }
        d.ok_or(DiagramError::Syntax { line: 0, reason: "missing n header".into() })
    }

    /// Inline shorthand: `D{0-1:5, 1-2:3, 3-4:inf}` or `D[n]{...}`.
    pub fn parse_inline(text: &str) -> Result<Diagram, DiagramError> {
        let t = text.trim();
        let err = |reason: &str| DiagramError::Syntax { line: 0, reason: reason.into() };
        let rest = t.strip_prefix('D').ok_or_else(|| err("inline diagram must start with D"))?;
        let (explicit_n, body) = if let Some(r) = rest.strip_prefix('[') {
            let close = r.find(']').ok_or_else(|| err("unclosed ["))?;
            let n: usize = r[..close].trim().parse().map_err(|_| err("bad node count"))?;
            (Some(n), r[close + 1..].trim())
        } else {
            (None, rest)
        };
        let body = body
            .strip_prefix('{')
            .and_then(|b| b.strip_suffix('}'))
            .ok_or_else(|| err("inline diagram body must be {...}"))?;
        let mut triples: Vec<(usize, usize, EdgeLabel)> = Vec::new();
        let mut max_idx = 0usize;
        for part in body.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (pair, lab) = part.split_once(':').ok_or_else(|| err("edge needs i-j:label"))?;
            let (si, sj) = pair.trim().split_once('-').ok_or_else(|| err("edge needs i-j"))?;
            let i: usize = si.trim().parse().map_err(|_| err("bad index"))?;
            let j: usize = sj.trim().parse().map_err(|_| err("bad index"))?;
            let lab = lab.trim();
            let label = if lab == "inf" {
                EdgeLabel::Dotted
            } else {
                let m: u32 = lab.parse().map_err(|_| err("bad label"))?;
                if m < 3 {
                    return Err(DiagramError::LabelTooSmall { line: 0, label: m });
                }
                EdgeLabel::Finite(m)
            };
            max_idx = max_idx.max(i).max(j);
            triples.push((i, j, label));
        }
        let n = explicit_n.unwrap_or(if triples.is_empty() { 0 } else { max_idx + 1 });
        if n > 64 {
            return Err(DiagramError::TooLarge { n });
        }
        let mut d = Diagram::new(n);
        for (i, j, l) in triples {
            if i >= n || j >= n {
                return Err(DiagramError::IndexOutOfRange { line: 0, idx: i.max(j), n });
            }
            if i == j {
                return Err(err("self-edge"));
            }
            if d.label(i, j) != EdgeLabel::Absent {
                return Err(DiagramError::DuplicateEdge { line: 0, i: i.min(j), j: i.max(j) });
            }
            d.set_label(i, j, l);
        }
        Ok(d)
    }

    /// File-format rendering; `parse(format(d))` is label-identical to `d`.
    pub fn format(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n {}", self.n);
        for (i, j, l) in self.edges() {
            match l {
                EdgeLabel::Finite(m) => {
                    let _ = writeln!(out, "e {i} {j} {m}");
                }
                EdgeLabel::Dotted => {
                    let _ = writeln!(out, "e {i} {j} inf");
                }
                EdgeLabel::Absent => unreachable!(),
            }
        }
        for (i, name) in self.names.iter().enumerate() {
            if let Some(name) = name {
                let _ = writeln!(out, "name {i} {name}");
            }
        }
        out
    }

    pub fn to_inline(&self) -> String {
        let parts: Vec<String> = self
            .edges()
            .map(|(i, j, l)| match l {
                EdgeLabel::Finite(m) => format!("{i}-{j}:{m}"),
                EdgeLabel::Dotted => format!("{i}-{j}:inf"),
                EdgeLabel::Absent => unreachable!(),
            })
            .collect();
        format!("D[{}]{{{}}}", self.n, parts.join(", "))
    }
}

// ---------------------------------------------------------------------------
// Canonical form (ordered-partition refinement with backtracking)
// ---------------------------------------------------------------------------

/// Canonical key of the diagram as an edge-labeled graph; optional node
/// colors participate (used for marked nodes and role-preserving dedup).
pub fn canonical_key_colored(d: &Diagram, colors: &[u32]) -> Vec<u8> {
    assert_eq!(colors.len(), d.n());
    let perm = canonical_permutation(d, colors);
    serialize_under(d, colors, &perm)
}

pub fn canonical_key(d: &Diagram) -> Vec<u8> {
    if let Some(cached) = cache::lookup(d) {
        return cached;
    }
    let key = canonical_key_colored(d, &vec![0; d.n()]);
    cache::store(d, &key);
    key
}

/// The permutation new_index = perm[old_index] realizing the canonical form.
pub fn canonical_permutation(d: &Diagram, colors: &[u32]) -> Vec<usize> {
    let n = d.n();
    if n == 0 {
        return vec![];
    }
    let mut best: Option<(Vec<u8>, Vec<usize>)> = None;
    let init = refine(d, colors, initial_partition(d, colors));
    search(d, colors, init, &mut best);
    best.unwrap().1
}

fn serialize_under(d: &Diagram, colors: &[u32], perm: &[usize]) -> Vec<u8> {
    // inverse: position p holds old node inv[p]
    let n = d.n();
    let mut inv = vec![0usize; n];
    for (old, &new) in perm.iter().enumerate() {
        inv[new] = old;
    }
    let mut out = Vec::with_capacity(2 + n + n * (n - 1));
    out.extend_from_slice(&(n as u16).to_be_bytes());
    for p in 0..n {
        out.extend_from_slice(&colors[inv[p]].to_be_bytes());
    }
    for i in 0..n {
        for j in (i + 1)..n {
            out.extend_from_slice(&d.label(inv[i], inv[j]).canon_code().to_be_bytes());
        }
    }
    out
}

type Partition = Vec<Vec<usize>>;

fn initial_partition(d: &Diagram, colors: &[u32]) -> Partition {
    let n = d.n();
    let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        groups.entry(colors[v]).or_default().push(v);
    }
    groups.into_values().collect()
}

/// Equitable refinement by multiset of (cell, label) incidences.
fn refine(d: &Diagram, _colors: &[u32], mut part: Partition) -> Partition {
    loop {
        let cell_of = cell_index(&part, d.n());
        let mut changed = false;
        let mut next: Partition = Vec::new();
        for cell in &part {
            if cell.len() == 1 {
                next.push(cell.clone());
                continue;
            }
            let mut keyed: Vec<(Vec<(usize, u32)>, usize)> = cell
                .iter()
                .map(|&v| {
                    let mut sig: Vec<(usize, u32)> = (0..d.n())
                        .filter(|&u| u != v)
                        .map(|u| (cell_of[u], d.label(v, u).canon_code()))
                        .filter(|&(_, code)| code != 2)
                        .collect();
                    sig.sort_unstable();
                    (sig, v)
                })
                .collect();
            keyed.sort();
            let mut sub: Vec<Vec<usize>> = Vec::new();
            let mut prev_sig: Option<Vec<(usize, u32)>> = None;
            for (sig, v) in keyed {
                if prev_sig.as_ref() == Some(&sig) {
                    sub.last_mut().unwrap().push(v);
                } else {
                    sub.push(vec![v]);
                    prev_sig = Some(sig);
                }
            }
            if sub.len() > 1 {
                changed = true;
            }
            next.extend(sub);
        }
        part = next;
        if !changed {
            return part;
        }
    }
}

fn cell_index(part: &Partition, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for (ci, cell) in part.iter().enumerate() {
        for &v in cell {
            out[v] = ci;
        }
    }
    out
}

fn search(d: &Diagram, colors: &[u32], part: Partition, best: &mut Option<(Vec<u8>, Vec<usize>)>) {
    if part.iter().all(|c| c.len() == 1) {
        let mut perm = vec![0usize; d.n()];
        for (pos, cell) in part.iter().enumerate() {
            perm[cell[0]] = pos;
        }
        let key = serialize_under(d, colors, &perm);
        if best.is_none() || key < best.as_ref().unwrap().0 {
            *best = Some((key, perm));
        }
        return;
    }
    // branch on the first non-singleton cell
    let idx = part.iter().position(|c| c.len() > 1).unwrap();
    for &v in &part[idx] {
        let mut next: Partition = Vec::new();
        for (ci, cell) in part.iter().enumerate() {
            if ci == idx {
                next.push(vec![v]);
                next.push(cell.iter().copied().filter(|&u| u != v).collect());
            } else {
                next.push(cell.clone());
            }
        }
        let refined = refine(d, colors, next);
        search(d, colors, refined, best);
    }
}

mod cache {
    //! Optional on-disk memo for canonical keys, enabled by COXLAB_CACHE.
    use super::Diagram;
    use once_cell::sync::Lazy;
    use sha2::{Digest, Sha256};
    use std::path::PathBuf;

    static DIR: Lazy<Option<PathBuf>> = Lazy::new(|| {
        std::env::var_os("COXLAB_CACHE").map(PathBuf::from).filter(|p| p.is_dir())
    });

    fn file_for(d: &Diagram) -> Option<PathBuf> {
        let dir = DIR.as_ref()?;
        let mut h = Sha256::new();
        h.update(d.format().as_bytes());
        Some(dir.join(format!("ck-{:x}", h.finalize())))
    }

    pub fn lookup(d: &Diagram) -> Option<Vec<u8>> {
        std::fs::read(file_for(d)?).ok()
    }

    pub fn store(d: &Diagram, key: &[u8]) {
        if let Some(path) = file_for(d) {
            let _ = std::fs::write(path, key);
        }
    }
}

// ---------------------------------------------------------------------------
// Neighbor calculus
// ---------------------------------------------------------------------------

/// Partition of the complement of an elliptic S into good / bad / non.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborPartition {
    pub good: NodeSet,
    pub bad: NodeSet,
    pub non: NodeSet,
}

impl NeighborPartition {
    /// Nodes of the face environment: good together with non.
    pub fn obar(&self) -> NodeSet {
        self.good | self.non
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_basics() {
        let d = Diagram::parse("n 2\ne 0 1 7\n").unwrap();
        assert_eq!(d.n(), 2);
        assert_eq!(d.label(0, 1), EdgeLabel::Finite(7));

        let d = Diagram::parse("n 3\n").unwrap();
        assert_eq!(d.n(), 3);
        assert!(d.edges().next().is_none());

        let err = Diagram::parse("n 2\ne 0 1 inf\ne 0 1 3\n").unwrap_err();
        assert!(matches!(err, DiagramError::DuplicateEdge { .. }));

        let err = Diagram::parse("n 2\ne 0 1 2\n").unwrap_err();
        assert!(matches!(err, DiagramError::LabelTooSmall { .. }));

        let err = Diagram::parse("n 2\ne 0 5 3\n").unwrap_err();
        assert!(matches!(err, DiagramError::IndexOutOfRange { .. }));
    }

    #[test]
    fn inline_roundtrip() {
        let d = Diagram::parse_inline("D{0-1:5, 1-2:3, 3-4:inf}").unwrap();
        assert_eq!(d.n(), 5);
        assert_eq!(d.label(3, 4), EdgeLabel::Dotted);
        let d2 = Diagram::parse_inline(&d.to_inline()).unwrap();
        assert_eq!(d, d2);
    }

    #[test]
    fn format_roundtrip() {
        let mut d = Diagram::new(4);
        d.set_label(0, 1, EdgeLabel::Finite(5));
        d.set_label(2, 3, EdgeLabel::Dotted);
        d.set_name(0, "base");
        let d2 = Diagram::parse(&d.format()).unwrap();
        assert_eq!(d, d2);
    }

    #[test]
    fn canonical_relabeling_invariance() {
        // path with labels (3,4) vs (4,3) read from the other end
        let a = Diagram::parse_inline("D{0-1:3, 1-2:4}").unwrap();
        let b = Diagram::parse_inline("D{0-1:4, 1-2:3}").unwrap();
        assert_eq!(canonical_key(&a), canonical_key(&b));
        let c = Diagram::parse_inline("D{0-2:3, 1-2:4}").unwrap();
        assert_eq!(canonical_key(&a), canonical_key(&c));
        // triangle(2,3,7) vs triangle(2,3,8)
        let t7 = Diagram::parse_inline("D{0-1:3, 1-2:7}").unwrap();
        let t8 = Diagram::parse_inline("D{0-1:3, 1-2:8}").unwrap();
        assert_ne!(canonical_key(&t7), canonical_key(&t8));
    }

    #[test]
    fn colored_keys_distinguish_marks() {
        let d = Diagram::parse_inline("D{0-1:3, 1-2:3}").unwrap();
        // marking an end vs the middle of A3 must differ; the two ends agree
        let end0 = canonical_key_colored(&d, &[1, 0, 0]);
        let end2 = canonical_key_colored(&d, &[0, 0, 1]);
        let mid = canonical_key_colored(&d, &[0, 1, 0]);
        assert_eq!(end0, end2);
        assert_ne!(end0, mid);
    }
}
