//! Gram matrices, determinants, inertia, and diagram classification.
//!
//! Everything here runs on two tracks. The f64 filter (`filt`) gives fast
//! answers with an explicit uncertainty band; the exact track decides
//! borderline cases with cyclotomic arithmetic. All public classification
//! results are exact.

use crate::arith::{AlgebraicReal, QuadExt, WeightPoly};
use crate::diagram::{nodeset_members, Diagram, EdgeLabel, NodeSet};
use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("symbolic mode supports at most one dotted edge ({0} present)")]
    TooManyDotted(usize),
    #[error("operation requires exactly one dotted edge")]
    NeedDotted,
    #[error("weight must satisfy w < -1")]
    BadWeight,
    #[error("determinant vanishes identically in w")]
    IdenticallyZero,
    #[error("local determinant denominator vanishes identically")]
    ZeroDenominator,
}

/// Exact inertia triple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Signature {
    pub pos: usize,
    pub neg: usize,
    pub zero: usize,
}

impl Signature {
    pub fn new(pos: usize, neg: usize, zero: usize) -> Self {
        Signature { pos, neg, zero }
    }

    pub fn order(&self) -> usize {
        self.pos + self.neg + self.zero
    }
}

/// Families of connected elliptic diagrams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EllipticType {
    A(usize),
    B(usize),
    D(usize),
    E(usize),
    F4,
    H(usize),
    /// Single edge with label m >= 5. m = 3, 4 normalize to A2, B2.
    G2(u32),
}

impl std::fmt::Display for EllipticType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EllipticType::A(n) => write!(f, "A{n}"),
            EllipticType::B(n) => write!(f, "B{n}"),
            EllipticType::D(n) => write!(f, "D{n}"),
            EllipticType::E(n) => write!(f, "E{n}"),
            EllipticType::F4 => write!(f, "F4"),
            EllipticType::H(n) => write!(f, "H{n}"),
            EllipticType::G2(m) => write!(f, "G2({m})"),
        }
    }
}

impl EllipticType {
    pub fn rank(&self) -> usize {
        match self {
            EllipticType::A(n) | EllipticType::B(n) | EllipticType::D(n) | EllipticType::H(n) => *n,
            EllipticType::E(n) => *n,
            EllipticType::F4 => 4,
            EllipticType::G2(_) => 2,
        }
    }

    pub fn parse(s: &str) -> Option<EllipticType> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("G2(").and_then(|r| r.strip_suffix(')')) {
            let m: u32 = rest.parse().ok()?;
            return Some(normalize_rank2(m));
        }
        let (fam, rank) = s.split_at(1);
        let r: usize = rank.parse().ok()?;
        match fam {
            "A" => Some(EllipticType::A(r)),
            "B" => Some(EllipticType::B(r)),
            "D" => Some(EllipticType::D(r)),
            "E" => Some(EllipticType::E(r)),
            "F" if r == 4 => Some(EllipticType::F4),
            "H" => Some(EllipticType::H(r)),
            _ => None,
        }
    }
}

fn normalize_rank2(m: u32) -> EllipticType {
    match m {
        3 => EllipticType::A(2),
        4 => EllipticType::B(2),
        _ => EllipticType::G2(m),
    }
}

/// Connected affine (parabolic) diagram types.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AffineType {
    At(usize),
    Bt(usize),
    Ct(usize),
    Dt(usize),
    Et(usize),
    Ft4,
    Gt2,
}

/// Classification outcome of a diagram.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiagramClass {
    Elliptic(Vec<EllipticType>),
    Parabolic,
    MixedDegenerate,
    Lanner,
    Hyperbolic(usize),
    Superhyperbolic,
    IndefiniteOther,
}

// ---------------------------------------------------------------------------
// Structure helpers on induced subdiagrams
// ---------------------------------------------------------------------------

fn degree_in(d: &Diagram, v: usize, members: &[usize]) -> usize {
    members.iter().filter(|&&u| u != v && d.joined(v, u)).count()
}

/// The sequence of labels along a path component, normalized to the
/// lexicographically smaller direction. Returns None if not a path.
fn path_labels(d: &Diagram, members: &[usize]) -> Option<Vec<u32>> {
    let n = members.len();
    if n == 1 {
        return Some(vec![]);
    }
    let degs: Vec<usize> = members.iter().map(|&v| degree_in(d, v, &members)).collect();
    let edge_count: usize = degs.iter().sum::<usize>() / 2;
    if edge_count != n - 1 || degs.iter().any(|&x| x > 2) {
        return None;
    }
    let start = members[degs.iter().position(|&x| x == 1)?];
    let mut seq = Vec::with_capacity(n - 1);
    let mut prev = usize::MAX;
    let mut cur = start;
    loop {
        let next = members
            .iter()
            .copied()
            .find(|&u| u != cur && u != prev && d.joined(cur, u));
        match next {
            None => break,
            Some(u) => {
                let lab = match d.label(cur, u) {
                    EdgeLabel::Finite(m) => m,
                    _ => return None,
                };
                seq.push(lab);
                prev = cur;
                cur = u;
            }
        }
    }
    if seq.len() != n - 1 {
        return None;
    }
    let rev: Vec<u32> = seq.iter().rev().copied().collect();
    Some(if rev < seq { rev } else { seq })
}

/// Arm label sequences from a fork node outward, sorted.
fn arms_from(d: &Diagram, c: usize, members: &[usize]) -> Option<Vec<Vec<u32>>> {
    let mut arms = Vec::new();
    for &u in members {
        if u == c || !d.joined(c, u) {
            continue;
        }
        let mut seq = Vec::new();
        let mut prev = c;
        let mut cur = u;
        loop {
            let lab = d.label(prev, cur).finite()?;
            seq.push(lab);
            let next = members
                .iter()
                .copied()
                .filter(|&t| t != cur && t != prev && d.joined(cur, t))
                .collect::<Vec<_>>();
            if next.is_empty() {
                break;
            }
            if next.len() > 1 {
                return None; // nested fork
            }
            prev = cur;
            cur = next[0];
        }
        arms.push(seq);
    }
    arms.sort_by_key(|a| (a.len(), a.clone()));
    Some(arms)
}

/// Pattern-match a connected, dotted-free induced subdiagram against the
/// finite (elliptic) catalog.
pub fn connected_elliptic_type(d: &Diagram, set: NodeSet) -> Option<EllipticType> {
    let members = nodeset_members(set);
    let n = members.len();
    if n == 0 {
        return None;
    }
    for (a, &i) in members.iter().enumerate() {
        for &j in members.iter().skip(a + 1) {
            if d.label(i, j).is_dotted() {
                return None;
            }
        }
    }
    if n == 1 {
        return Some(EllipticType::A(1));
    }
    let degs: Vec<usize> = members.iter().map(|&v| degree_in(d, v, &members)).collect();
    let edge_count: usize = degs.iter().sum::<usize>() / 2;
    if edge_count != n - 1 {
        return None; // connected elliptic diagrams are trees
    }
    if let Some(seq) = path_labels(d, &members) {
        if n == 2 {
            return Some(normalize_rank2(seq[0]));
        }
        if seq.iter().all(|&m| m == 3) {
            return Some(EllipticType::A(n));
        }
        let big: Vec<u32> = seq.iter().copied().filter(|&m| m != 3).collect();
        if big.len() == 1 && big[0] == 4 {
            if seq[0] == 4 || seq[n - 2] == 4 {
                return Some(EllipticType::B(n));
            }
            if n == 4 && seq[1] == 4 {
                return Some(EllipticType::F4);
            }
            return None;
        }
        if big.len() == 1 && big[0] == 5 && (seq[0] == 5 || seq[n - 2] == 5) && (n == 3 || n == 4) {
            return Some(EllipticType::H(n));
        }
        return None;
    }
    // unique fork of degree 3, all labels simple
    let forks: Vec<usize> = members
        .iter()
        .copied()
        .filter(|&v| degree_in(d, v, &members) == 3)
        .collect();
    if forks.len() != 1 || degs.iter().any(|&x| x > 3) {
        return None;
    }
    let arms = arms_from(d, forks[0], &members)?;
    if arms.iter().any(|a| a.iter().any(|&m| m != 3)) {
        return None;
    }
    let lens: Vec<usize> = arms.iter().map(|a| a.len()).collect();
    match lens.as_slice() {
        [1, 1, _] => Some(EllipticType::D(n)),
        [1, 2, 2] => Some(EllipticType::E(6)),
        [1, 2, 3] => Some(EllipticType::E(7)),
        [1, 2, 4] => Some(EllipticType::E(8)),
        _ => None,
    }
}

/// Pattern-match a connected, dotted-free induced subdiagram against the
/// affine catalog.
pub fn connected_affine_type(d: &Diagram, set: NodeSet) -> Option<AffineType> {
    let members = nodeset_members(set);
    let n = members.len();
    if n < 3 {
        return None;
    }
    for (a, &i) in members.iter().enumerate() {
        for &j in members.iter().skip(a + 1) {
            if d.label(i, j).is_dotted() {
                return None;
            }
        }
    }
    let degs: Vec<usize> = members.iter().map(|&v| degree_in(d, v, &members)).collect();
    let edge_count: usize = degs.iter().sum::<usize>() / 2;
    if edge_count == n && degs.iter().all(|&x| x == 2) {
        // cycle: affine iff all labels simple
        let all3 = members.iter().enumerate().all(|(a, &i)| {
            members
                .iter()
                .skip(a + 1)
                .all(|&j| matches!(d.label(i, j), EdgeLabel::Absent | EdgeLabel::Finite(3)))
        });
        return all3.then_some(AffineType::At(n - 1));
    }
    if edge_count != n - 1 {
        return None;
    }
    if let Some(seq) = path_labels(d, &members) {
        if n == 3 && seq == [3, 6] {
            return Some(AffineType::Gt2);
        }
        if seq[0] == 4 && seq[n - 2] == 4 && seq[1..n - 2].iter().all(|&m| m == 3) {
            return Some(AffineType::Ct(n - 1));
        }
        if n == 5 && (seq == [3, 3, 4, 3] || seq == [3, 4, 3, 3]) {
            return Some(AffineType::Ft4);
        }
        return None;
    }
    if degs.iter().any(|&x| x > 4) {
        return None;
    }
    if n == 5 && degs.iter().filter(|&&x| x == 4).count() == 1 {
        // star with four simple legs
        let c = members[degs.iter().position(|&x| x == 4).unwrap()];
        let ok = members.iter().all(|&u| {
            u == c || matches!(d.label(c, u), EdgeLabel::Finite(3))
        });
        return ok.then_some(AffineType::Dt(4));
    }
    let forks: Vec<usize> = members
        .iter()
        .copied()
        .filter(|&v| degree_in(d, v, &members) == 3)
        .collect();
    match forks.len() {
        1 => {
            let arms = arms_from(d, forks[0], &members)?;
            let lens: Vec<usize> = arms.iter().map(|a| a.len()).collect();
            // B-tilde: two simple leaves plus an arm ending in a double edge
            if lens.len() == 3 && lens[0] == 1 && lens[1] == 1 && arms[0] == [3] && arms[1] == [3] {
                let a = &arms[2];
                if a[..a.len() - 1].iter().all(|&m| m == 3) && *a.last().unwrap() == 4 {
                    return Some(AffineType::Bt(n - 1));
                }
                return None;
            }
            if arms.iter().any(|a| a.iter().any(|&m| m != 3)) {
                return None;
            }
            match lens.as_slice() {
                [2, 2, 2] => Some(AffineType::Et(6)),
                [1, 3, 3] => Some(AffineType::Et(7)),
                [1, 2, 5] => Some(AffineType::Et(8)),
                _ => None,
            }
        }
        2 => {
            // D-tilde: all labels simple, both forks carry two leaves
            let all3 = members.iter().enumerate().all(|(a, &i)| {
                members
                    .iter()
                    .skip(a + 1)
                    .all(|&j| matches!(d.label(i, j), EdgeLabel::Absent | EdgeLabel::Finite(3)))
            });
            if !all3 {
                return None;
            }
            for &c in &forks {
                let leaves = members
                    .iter()
                    .filter(|&&u| u != c && d.joined(c, u) && degree_in(d, u, &members) == 1)
                    .count();
                if leaves < 2 {
                    return None;
                }
            }
            Some(AffineType::Dt(n - 1))
        }
        _ => None,
    }
}

/// Is the induced subdiagram elliptic (every component in the finite catalog)?
pub fn is_elliptic(d: &Diagram, set: NodeSet) -> bool {
    d.components_of(set)
        .iter()
        .all(|&c| connected_elliptic_type(d, c).is_some())
}

/// Component types of an elliptic induced subdiagram.
pub fn elliptic_components(d: &Diagram, set: NodeSet) -> Option<Vec<EllipticType>> {
    let mut out = Vec::new();
    for c in d.components_of(set) {
        out.push(connected_elliptic_type(d, c)?);
    }
    out.sort();
    Some(out)
}

/// Does the induced subdiagram on `set` contain a connected affine
/// subdiagram (a parabolic subdiagram in the sense of condition checks)?
pub fn has_parabolic_subdiagram(d: &Diagram, set: NodeSet) -> bool {
    // enumerate connected induced subsets; affine patterns are connected
    let members = nodeset_members(set);
    let n = members.len();
    if n < 3 {
        return false;
    }
    // subsets of `members` as masks over 0..n mapped back to node ids
    let mut sub: u64 = 0;
    loop {
        sub = sub.wrapping_add(1);
        if sub >= (1u64 << n) {
            return false;
        }
        if sub.count_ones() < 3 {
            continue;
        }
        let nodes: NodeSet = (0..n)
            .filter(|&i| sub & (1 << i) != 0)
            .fold(0, |acc, i| acc | (1 << members[i]));
        if d.components_of(nodes).len() != 1 {
            continue;
        }
        if connected_affine_type(d, nodes).is_some() {
            return true;
        }
    }
}

/// Is the induced subdiagram a Lannér diagram? Dotted pairs count as the
/// order-2 case.
pub fn is_lanner(d: &Diagram, set: NodeSet) -> bool {
    let members = nodeset_members(set);
    let n = members.len();
    if n < 2 {
        return false;
    }
    if n == 2 {
        return d.label(members[0], members[1]).is_dotted();
    }
    for (a, &i) in members.iter().enumerate() {
        for &j in members.iter().skip(a + 1) {
            if d.label(i, j).is_dotted() {
                return false;
            }
        }
    }
    if d.components_of(set).len() != 1 {
        return false;
    }
    if connected_elliptic_type(d, set).is_some() || connected_affine_type(d, set).is_some() {
        return false;
    }
    members
        .iter()
        .all(|&v| is_elliptic(d, set & !(1 << v)))
}

/// All Lannér subdiagrams (including dotted edges), deduplicated, in a
/// deterministic order.
pub fn lanner_subdiagrams(d: &Diagram) -> Vec<NodeSet> {
    let n = d.n();
    let mut out = Vec::new();
    let full: Vec<usize> = (0..n).collect();
    for r in 2..=5usize.min(n) {
        subsets_of_size(&full, r, &mut |nodes| {
            let set = nodes.iter().fold(0u64, |acc, &v| acc | (1 << v));
            if is_lanner(d, set) {
                out.push(set);
            }
        });
    }
    out.sort_unstable();
    out
}

pub fn subsets_of_size<F: FnMut(&[usize])>(items: &[usize], r: usize, f: &mut F) {
    fn rec<F: FnMut(&[usize])>(items: &[usize], r: usize, start: usize, cur: &mut Vec<usize>, f: &mut F) {
        if cur.len() == r {
            f(cur);
            return;
        }
        for i in start..items.len() {
            if items.len() - i < r - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, r, i + 1, cur, f);
            cur.pop();
        }
    }
    rec(items, r, 0, &mut Vec::new(), f);
}

/// Elliptic induced subdiagrams of exactly the given order.
pub fn elliptic_subsets_of_order(d: &Diagram, order: usize) -> Vec<NodeSet> {
    let full: Vec<usize> = (0..d.n()).collect();
    let mut out = Vec::new();
    subsets_of_size(&full, order, &mut |nodes| {
        let set = nodes.iter().fold(0u64, |acc, &v| acc | (1 << v));
        if is_elliptic(d, set) {
            out.push(set);
        }
    });
    out
}

// ---------------------------------------------------------------------------
// Gram matrix and exact linear algebra
// ---------------------------------------------------------------------------

/// Entry of a Gram matrix: an exact value or the dotted-weight symbol.
#[derive(Clone, Debug)]
pub enum GramEntry {
    Exact(AlgebraicReal),
    Weight,
}

/// Symmetric Gram matrix with unit diagonal.
pub struct GramMatrix {
    pub n: usize,
    pub entries: Vec<GramEntry>, // row-major n x n
}

impl GramMatrix {
    pub fn at(&self, i: usize, j: usize) -> &GramEntry {
        &self.entries[i * self.n + j]
    }
}

/// Build the Gram matrix: 1 on the diagonal, -cos(pi/m) for finite labels,
/// the weight symbol for the dotted edge.
pub fn gram(d: &Diagram) -> Result<GramMatrix, SpectraError> {
    let nd = d.dotted_count();
    if nd > 1 {
        return Err(SpectraError::TooManyDotted(nd));
    }
    let n = d.n();
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                entries.push(GramEntry::Exact(AlgebraicReal::one()));
            } else {
                entries.push(match d.label(i, j) {
                    EdgeLabel::Absent => GramEntry::Exact(AlgebraicReal::zero()),
                    EdgeLabel::Finite(m) => {
                        GramEntry::Exact(AlgebraicReal::cos_pi_over(m as u64).neg())
                    }
                    EdgeLabel::Dotted => GramEntry::Weight,
                });
            }
        }
    }
    Ok(GramMatrix { n, entries })
}

/// Minimal field interface for exact elimination.
pub trait ExactField: Clone {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn sign(&self) -> i32;
}

impl ExactField for AlgebraicReal {
    fn zero() -> Self {
        AlgebraicReal::zero()
    }
    fn is_zero(&self) -> bool {
        AlgebraicReal::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        AlgebraicReal::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        AlgebraicReal::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        AlgebraicReal::mul(self, o)
    }
    fn div(&self, o: &Self) -> Self {
        AlgebraicReal::div(self, o)
    }
    fn sign(&self) -> i32 {
        AlgebraicReal::sign(self)
    }
}

impl ExactField for QuadExt {
    fn zero() -> Self {
        QuadExt::from_base(AlgebraicReal::zero(), AlgebraicReal::zero())
    }
    fn is_zero(&self) -> bool {
        QuadExt::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        QuadExt::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        QuadExt::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        QuadExt::mul(self, o)
    }
    fn div(&self, o: &Self) -> Self {
        QuadExt::div(self, o)
    }
    fn sign(&self) -> i32 {
        QuadExt::sign(self)
    }
}

/// Exact inertia of a symmetric matrix by pivoted congruence elimination.
pub fn inertia_of_matrix<F: ExactField>(mat: &mut Vec<Vec<F>>) -> Signature {
    let n = mat.len();
    let mut active: Vec<usize> = (0..n).collect();
    let mut pos = 0;
    let mut neg = 0;
    let mut zero = 0;
    while !active.is_empty() {
        // prefer a nonzero diagonal pivot
        if let Some(pi) = active.iter().position(|&i| !mat[i][i].is_zero()) {
            let p = active[pi];
            let s = mat[p][p].sign();
            if s > 0 {
                pos += 1;
            } else {
                neg += 1;
            }
            active.remove(pi);
            let piv = mat[p][p].clone();
            for (ai, &i) in active.iter().enumerate() {
                if mat[i][p].is_zero() {
                    continue;
                }
                let factor = mat[i][p].div(&piv);
                for &j in active.iter().skip(ai) {
                    let delta = factor.mul(&mat[p][j]);
                    let upd = mat[i][j].sub(&delta);
                    mat[i][j] = upd.clone();
                    mat[j][i] = upd;
                }
            }
            for &i in &active {
                mat[i][p] = F::zero();
                mat[p][i] = F::zero();
            }
            continue;
        }
        // zero diagonal: find an off-diagonal nonzero in the active block
        let mut found = None;
        'outer: for (ai, &i) in active.iter().enumerate() {
            for &j in active.iter().skip(ai + 1) {
                if !mat[i][j].is_zero() {
                    found = Some((i, j));
                    break 'outer;
                }
            }
        }
        let Some((p, q)) = found else {
            zero += active.len();
            break;
        };
        // hyperbolic 2x2 block contributes (1,1); Schur complement:
        // a'_kl = a_kl - (b_kp b_lq + b_kq b_lp)/a  with a = mat[p][q]
        pos += 1;
        neg += 1;
        active.retain(|&x| x != p && x != q);
        let a = mat[p][q].clone();
        for (ai, &k) in active.iter().enumerate() {
            for &l in active.iter().skip(ai) {
                let t1 = mat[k][p].mul(&mat[l][q]);
                let t2 = mat[k][q].mul(&mat[l][p]);
                let delta = t1.add(&t2).div(&a);
                let upd = mat[k][l].sub(&delta);
                mat[k][l] = upd.clone();
                mat[l][k] = upd;
            }
        }
        for &i in &active {
            mat[i][p] = F::zero();
            mat[p][i] = F::zero();
            mat[i][q] = F::zero();
            mat[q][i] = F::zero();
        }
    }
    Signature::new(pos, neg, zero)
}

/// Exact determinant by Gaussian elimination with row pivoting.
pub fn det_of_matrix<F: ExactField>(mat: &mut Vec<Vec<F>>) -> F
where
    F: From<AlgebraicReal>,
{
    let n = mat.len();
    if n == 0 {
        return F::from(AlgebraicReal::one());
    }
    let mut sign_flips = 0usize;
    let mut det: Option<F> = None;
    for col in 0..n {
        let pivot_row = (col..n).find(|&r| !mat[r][col].is_zero());
        let Some(pr) = pivot_row else {
            return F::zero();
        };
        if pr != col {
            mat.swap(pr, col);
            sign_flips += 1;
        }
        let piv = mat[col][col].clone();
        det = Some(match det {
            None => piv.clone(),
            Some(dv) => dv.mul(&piv),
        });
        for r in (col + 1)..n {
            if mat[r][col].is_zero() {
                continue;
            }
            let factor = mat[r][col].div(&piv);
            for c in col..n {
                let delta = factor.mul(&mat[col][c]);
                mat[r][c] = mat[r][c].sub(&delta);
            }
        }
    }
    let mut out = det.unwrap();
    if sign_flips % 2 == 1 {
        out = F::zero().sub(&out);
    }
    out
}

impl From<AlgebraicReal> for QuadExt {
    fn from(a: AlgebraicReal) -> Self {
        QuadExt::from_base(a, AlgebraicReal::zero())
    }
}

/// Exact Gram matrix with a concrete value substituted for the weight.
fn gram_matrix_at<F: ExactField + From<AlgebraicReal>>(
    d: &Diagram,
    set: NodeSet,
    w: Option<&F>,
) -> Vec<Vec<F>> {
    let members = nodeset_members(set);
    let n = members.len();
    let mut mat = vec![vec![F::zero(); n]; n];
    for a in 0..n {
        mat[a][a] = F::from(AlgebraicReal::one());
        for b in (a + 1)..n {
            let val: F = match d.label(members[a], members[b]) {
                EdgeLabel::Absent => F::zero(),
                EdgeLabel::Finite(m) => {
                    F::from(AlgebraicReal::cos_pi_over(m as u64).neg())
                }
                EdgeLabel::Dotted => w.expect("weight required for dotted entry").clone(),
            };
            mat[a][b] = val.clone();
            mat[b][a] = val;
        }
    }
    mat
}

/// Exact determinant of the induced subdiagram as a polynomial in w.
pub fn determinant_of(d: &Diagram, set: NodeSet) -> Result<WeightPoly, SpectraError> {
    let members = nodeset_members(set);
    let dotted = members
        .iter()
        .enumerate()
        .flat_map(|(a, &i)| {
            members[a + 1..]
                .iter()
                .filter(move |&&j| d.label(i, j).is_dotted())
                .map(move |_| ())
        })
        .count();
    if dotted > 1 {
        return Err(SpectraError::TooManyDotted(dotted));
    }
    let eval = |w: i64| -> AlgebraicReal {
        let wv = AlgebraicReal::from_int(w);
        let mut m = gram_matrix_at::<AlgebraicReal>(d, set, Some(&wv));
        det_of_matrix(&mut m)
    };
    if dotted == 0 {
        let zero = AlgebraicReal::zero();
        let mut m = gram_matrix_at::<AlgebraicReal>(d, set, Some(&zero));
        return Ok(WeightPoly::constant(det_of_matrix(&mut m)));
    }
    // quadratic in w: interpolate at w = 0, 1, -1
    let d0 = eval(0);
    let d1 = eval(1);
    let dm1 = eval(-1);
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let c1 = d1.sub(&dm1).mul_rat(&half);
    let c2 = d1.add(&dm1).mul_rat(&half).sub(&d0);
    Ok(WeightPoly { c0: d0, c1, c2 })
}

pub fn determinant(d: &Diagram) -> Result<WeightPoly, SpectraError> {
    determinant_of(d, d.full_set())
}

/// Exact inertia at a concrete weight (required iff the diagram is dotted).
pub fn inertia(d: &Diagram, w: Option<&QuadExt>) -> Result<Signature, SpectraError> {
    inertia_of(d, d.full_set(), w)
}

pub fn inertia_of(d: &Diagram, set: NodeSet, w: Option<&QuadExt>) -> Result<Signature, SpectraError> {
    let members = nodeset_members(set);
    let has_dotted = members.iter().enumerate().any(|(a, &i)| {
        members[a + 1..].iter().any(|&j| d.label(i, j).is_dotted())
    });
    if has_dotted {
        let w = w.ok_or(SpectraError::NeedDotted)?;
        if w.cmp_rational(&BigRational::from(BigInt::from(-1))) >= 0 {
            return Err(SpectraError::BadWeight);
        }
        let mut m = gram_matrix_at::<QuadExt>(d, set, Some(w));
        // entries built by From<AlgebraicReal> carry a zero discriminant;
        // rebuild them over the weight's extension so ops are closed
        let disc = w.disc.clone();
        for row in m.iter_mut() {
            for e in row.iter_mut() {
                if e.disc.is_zero() && !disc.is_zero() {
                    *e = QuadExt::new(e.a.clone(), e.b.clone(), disc.clone());
                }
            }
        }
        Ok(inertia_of_matrix(&mut m))
    } else {
        let mut m = gram_matrix_at::<AlgebraicReal>(d, set, None::<&AlgebraicReal>);
        Ok(inertia_of_matrix(&mut m))
    }
}

/// Exact inertia at a rational weight.
pub fn inertia_at_rational(d: &Diagram, set: NodeSet, w: &BigRational) -> Signature {
    let wv = AlgebraicReal::from_rational(w.clone());
    let mut m = gram_matrix_at::<AlgebraicReal>(d, set, Some(&wv));
    inertia_of_matrix(&mut m)
}

// ---------------------------------------------------------------------------
// Admissible-weight analysis
// ---------------------------------------------------------------------------

/// Witness for an admissible-signature decision.
#[derive(Clone, Debug)]
pub enum WeightWitness {
    /// Dotted-free diagram; the signature holds outright.
    Exactly,
    /// Holds at this exact root of the breakpoint system.
    AtRoot(QuadExt),
    /// Holds on an open cell of the ray; `sample` is an interior rational.
    OnCell { sample: BigRational },
}

/// Breakpoints of the inertia of M(w) on the ray w < -1: ray-roots of the
/// first level of principal minors that are not identically zero.
fn ray_breakpoints(d: &Diagram, set: NodeSet) -> Vec<QuadExt> {
    let members = nodeset_members(set);
    let n = members.len();
    let mut level_sets: Vec<Vec<NodeSet>> = vec![vec![set]];
    // precompute level k subsets lazily
    let mut out: Vec<QuadExt> = Vec::new();
    for k in 0..n {
        if k > 0 {
            let mut subs = Vec::new();
            subsets_of_size(&members, n - k, &mut |nodes| {
                subs.push(nodes.iter().fold(0u64, |acc, &v| acc | (1 << v)));
            });
            level_sets.push(subs);
        }
        let mut any_nonzero = false;
        for &s in &level_sets[k] {
            let p = determinant_of(d, s).expect("minor determinant");
            if p.is_zero() {
                continue;
            }
            any_nonzero = true;
            if let Ok(roots) = p.roots_in_ray() {
                out.extend(roots);
            }
        }
        if any_nonzero {
            break;
        }
    }
    // sort ascending and dedup exactly
    out.sort_by(|x, y| match x.sub(y).sign() {
        s if s < 0 => std::cmp::Ordering::Less,
        0 => std::cmp::Ordering::Equal,
        _ => std::cmp::Ordering::Greater,
    });
    out.dedup_by(|x, y| x.sub(y).is_zero());
    out
}

/// Decide whether some w < -1 gives the target inertia; returns a witness.
/// For dotted-free diagrams this is an exact inertia equality test.
pub fn exists_admissible_signature(
    d: &Diagram,
    set: NodeSet,
    target: Signature,
) -> Result<Option<WeightWitness>, SpectraError> {
    let members = nodeset_members(set);
    let dotted = members
        .iter()
        .enumerate()
        .flat_map(|(a, &i)| members[a + 1..].iter().filter(move |&&j| d.label(i, j).is_dotted()))
        .count();
    if dotted > 1 {
        return Err(SpectraError::TooManyDotted(dotted));
    }
    if dotted == 0 {
        let sig = inertia_of(d, set, None)?;
        return Ok((sig == target).then_some(WeightWitness::Exactly));
    }
    for (w, witness) in admissible_sample_points(d, set) {
        let sig = match &w {
            SamplePoint::Rational(q) => inertia_at_rational(d, set, q),
            SamplePoint::Root(r) => inertia_of(d, set, Some(r))?,
        };
        if sig == target {
            return Ok(Some(witness));
        }
    }
    Ok(None)
}

enum SamplePoint {
    Rational(BigRational),
    Root(QuadExt),
}

/// Sample points covering every inertia regime of the ray w < -1: each
/// breakpoint plus one rational inside each open cell.
fn admissible_sample_points(d: &Diagram, set: NodeSet) -> Vec<(SamplePoint, WeightWitness)> {
    let bps = ray_breakpoints(d, set);
    let minus_one = BigRational::from(BigInt::from(-1));
    let mut out = Vec::new();
    // cells from -1 downward: (bp_0, -1), (bp_1, bp_0), ..., (-inf, bp_last)
    let mut upper = minus_one.clone();
    let mut upper_exact: Option<&QuadExt> = None;
    for bp in bps.iter().rev() {
        // bp < upper by construction; sample between them
        let sample = rational_strictly_between(bp, &upper, upper_exact);
        out.push((
            SamplePoint::Rational(sample.clone()),
            WeightWitness::OnCell { sample },
        ));
        out.push((SamplePoint::Root(bp.clone()), WeightWitness::AtRoot(bp.clone())));
        upper = rational_below(bp);
        upper_exact = Some(bp);
    }
    // unbounded cell below everything
    let low = &upper - BigRational::from(BigInt::from(1));
    out.push((
        SamplePoint::Rational(low.clone()),
        WeightWitness::OnCell { sample: low },
    ));
    out
}

/// A rational q with lo < q < hi_rat (hi_exact, when given, is the exact value
/// that hi_rat approximates from below-compat; we only need lo < q < true cell top).
fn rational_strictly_between(lo: &QuadExt, hi: &BigRational, _hi_exact: Option<&QuadExt>) -> BigRational {
    let two = BigRational::from(BigInt::from(2));
    let mut hi = hi.clone();
    loop {
        // candidate midpoints halving toward hi
        let mut lo_rat = hi.clone() - BigRational::from(BigInt::from(1));
        // walk down until strictly past lo
        while lo.cmp_rational(&lo_rat) < 0 {
            lo_rat = &lo_rat - BigRational::from(BigInt::from(1));
        }
        let mut a = lo_rat;
        let b = hi.clone();
        for _ in 0..256 {
            let mid = (&a + &b) / &two;
            if lo.cmp_rational(&mid) < 0 {
                return mid;
            }
            a = mid.clone();
            let _ = &b;
        }
        hi = (&hi + &a) / &two;
    }
}

/// A rational strictly below the exact value (used as next cell's top).
fn rational_below(x: &QuadExt) -> BigRational {
    let mut guess = BigRational::from(BigInt::from(x.to_f64().floor() as i64));
    while x.cmp_rational(&guess) <= 0 {
        guess -= BigRational::from(BigInt::from(1));
    }
    // tighten from below
    let two = BigRational::from(BigInt::from(2));
    let mut lo = guess.clone();
    let mut hi = &guess + BigRational::from(BigInt::from(2));
    for _ in 0..80 {
        let mid = (&lo + &hi) / &two;
        if x.cmp_rational(&mid) > 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

/// Full classification of a diagram.
pub fn classify(d: &Diagram) -> DiagramClass {
    let full = d.full_set();
    let comps = d.components_of(full);
    let dotted = d.dotted_count();
    if dotted == 0 {
        let mut all_ell = true;
        let mut all_aff = true;
        let mut types = Vec::new();
        for &c in &comps {
            match connected_elliptic_type(d, c) {
                Some(t) => {
                    types.push(t);
                    all_aff = false;
                }
                None => {
                    all_ell = false;
                    if connected_affine_type(d, c).is_none() {
                        all_aff = false;
                    }
                }
            }
        }
        if all_ell {
            types.sort();
            return DiagramClass::Elliptic(types);
        }
        if all_aff {
            return DiagramClass::Parabolic;
        }
        let degenerate = comps.iter().all(|&c| {
            connected_elliptic_type(d, c).is_some() || connected_affine_type(d, c).is_some()
        });
        if degenerate {
            return DiagramClass::MixedDegenerate;
        }
        if is_lanner(d, full) {
            return DiagramClass::Lanner;
        }
        let sig = inertia_of(d, full, None).expect("dotted-free inertia");
        return match sig.neg {
            0 => DiagramClass::MixedDegenerate,
            1 => DiagramClass::Hyperbolic(sig.pos),
            _ => DiagramClass::Superhyperbolic,
        };
    }
    if dotted == 1 {
        if is_lanner(d, full) {
            return DiagramClass::Lanner; // the dotted pair itself
        }
        // per-regime analysis over the ray
        let mut best_hyp: Option<usize> = None;
        let mut all_super = true;
        for (w, _) in admissible_sample_points(d, full) {
            let sig = match &w {
                SamplePoint::Rational(q) => inertia_at_rational(d, full, q),
                SamplePoint::Root(r) => inertia_of(d, full, Some(r)).expect("inertia at root"),
            };
            if sig.neg <= 1 {
                all_super = false;
            }
            if sig.neg == 1 {
                best_hyp = Some(best_hyp.map_or(sig.pos, |b: usize| b.max(sig.pos)));
            }
        }
        if all_super {
            return DiagramClass::Superhyperbolic;
        }
        if let Some(dim) = best_hyp {
            return DiagramClass::Hyperbolic(dim);
        }
        return DiagramClass::IndefiniteOther;
    }
    DiagramClass::IndefiniteOther
}

/// Is the diagram superhyperbolic: negative index >= 2 for every admissible
/// weight (outright when dotted-free)?
pub fn is_superhyperbolic(d: &Diagram, set: NodeSet) -> bool {
    let members = nodeset_members(set);
    let dotted = members
        .iter()
        .enumerate()
        .flat_map(|(a, &i)| members[a + 1..].iter().filter(move |&&j| d.label(i, j).is_dotted()))
        .count();
    if dotted == 0 {
        return inertia_of(d, set, None).map(|s| s.neg >= 2).unwrap_or(false);
    }
    if dotted > 1 {
        // not supported on the exact path; callers restrict to <= 1
        return false;
    }
    admissible_sample_points(d, set).iter().all(|(w, _)| {
        let sig = match w {
            SamplePoint::Rational(q) => inertia_at_rational(d, set, q),
            SamplePoint::Root(r) => inertia_of(d, set, Some(r)).expect("inertia at root"),
        };
        sig.neg >= 2
    })
}

// ---------------------------------------------------------------------------
// Local determinants and weight solving
// ---------------------------------------------------------------------------

/// det(S)/det(S minus v) as an exact rational function of w.
#[derive(Clone, Debug)]
pub struct LocalDet {
    pub num: WeightPoly,
    pub den: WeightPoly,
}

impl LocalDet {
    /// Exact value when both parts are constant.
    pub fn constant_value(&self) -> Option<AlgebraicReal> {
        (self.num.is_constant() && self.den.is_constant())
            .then(|| self.num.c0.div(&self.den.c0))
    }
}

pub fn local_det(d: &Diagram, set: NodeSet, v: usize) -> Result<LocalDet, SpectraError> {
    assert!(set & (1 << v) != 0, "node not in subdiagram");
    let num = determinant_of(d, set)?;
    let den = determinant_of(d, set & !(1 << v))?;
    if den.is_zero() {
        return Err(SpectraError::ZeroDenominator);
    }
    Ok(LocalDet { num, den })
}

/// Exact roots w < -1 of det(d) together with the full inertia at each root.
pub fn solve_dotted_weight(d: &Diagram) -> Result<Vec<(QuadExt, Signature)>, SpectraError> {
    if d.dotted_count() != 1 {
        return Err(SpectraError::NeedDotted);
    }
    let p = determinant(d)?;
    if p.is_zero() {
        return Err(SpectraError::IdenticallyZero);
    }
    let roots = p.roots_in_ray().map_err(|_| SpectraError::IdenticallyZero)?;
    let mut out = Vec::new();
    for r in roots {
        let sig = inertia(d, Some(&r))?;
        out.push((r, sig));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::Diagram;

    fn dg(s: &str) -> Diagram {
        Diagram::parse_inline(s).unwrap()
    }

    fn path(labels: &[u32]) -> Diagram {
        let mut d = Diagram::new(labels.len() + 1);
        for (i, &m) in labels.iter().enumerate() {
            d.set_label(i, i + 1, EdgeLabel::Finite(m));
        }
        d
    }

    #[test]
    fn elliptic_patterns() {
        assert_eq!(
            connected_elliptic_type(&path(&[3, 3, 3, 3]), 0b11111),
            Some(EllipticType::A(5))
        );
        assert_eq!(
            connected_elliptic_type(&path(&[4, 3, 3]), 0b1111),
            Some(EllipticType::B(4))
        );
        assert_eq!(
            connected_elliptic_type(&path(&[3, 4, 3]), 0b1111),
            Some(EllipticType::F4)
        );
        assert_eq!(
            connected_elliptic_type(&path(&[5, 3, 3]), 0b1111),
            Some(EllipticType::H(4))
        );
        assert_eq!(connected_elliptic_type(&path(&[6]), 0b11), Some(EllipticType::G2(6)));
        assert_eq!(connected_elliptic_type(&path(&[4]), 0b11), Some(EllipticType::B(2)));
        // D4: star
        let d4 = dg("D{0-1:3, 0-2:3, 0-3:3}");
        assert_eq!(connected_elliptic_type(&d4, 0b1111), Some(EllipticType::D(4)));
        // E6
        let e6 = dg("D{0-1:3, 1-2:3, 2-3:3, 3-4:3, 2-5:3}");
        assert_eq!(connected_elliptic_type(&e6, 0b111111), Some(EllipticType::E(6)));
        // not elliptic
        assert_eq!(connected_elliptic_type(&path(&[5, 3, 3, 3]), 0b11111), None);
    }

    #[test]
    fn affine_patterns() {
        let a2t = dg("D{0-1:3, 1-2:3, 0-2:3}");
        assert_eq!(connected_affine_type(&a2t, 0b111), Some(AffineType::At(2)));
        assert_eq!(connected_affine_type(&path(&[4, 4]), 0b111), Some(AffineType::Ct(2)));
        assert_eq!(connected_affine_type(&path(&[6, 3]), 0b111), Some(AffineType::Gt2));
        assert_eq!(
            connected_affine_type(&path(&[3, 4, 3, 3]), 0b11111),
            Some(AffineType::Ft4)
        );
        assert_eq!(
            connected_affine_type(&path(&[4, 3, 4]), 0b1111),
            Some(AffineType::Ct(3))
        );
        let bt3 = dg("D{0-2:3, 1-2:3, 2-3:4}");
        assert_eq!(connected_affine_type(&bt3, 0b1111), Some(AffineType::Bt(3)));
        let dt4 = dg("D{0-1:3, 0-2:3, 0-3:3, 0-4:3}");
        assert_eq!(connected_affine_type(&dt4, 0b11111), Some(AffineType::Dt(4)));
    }

    #[test]
    fn determinant_anchors() {
        // det(triangle(2,3,7)) = 3/4 - cos^2(pi/7), negative
        let t = dg("D{0-1:3, 1-2:7}");
        let p = determinant(&t).unwrap();
        assert!(p.is_constant());
        let c7 = AlgebraicReal::cos_pi_over(7);
        let expect = AlgebraicReal::rational(3, 4).sub(&c7.mul(&c7));
        assert!(p.c0.equals(&expect));
        assert_eq!(p.c0.sign(), -1);

        // det(A3) = 1/2
        let a3 = path(&[3, 3]);
        let p = determinant(&a3).unwrap();
        assert!(p.c0.equals(&AlgebraicReal::rational(1, 2)));

        // parabolic triangle: det 0
        let a2t = dg("D{0-1:3, 1-2:3, 0-2:3}");
        assert!(determinant(&a2t).unwrap().c0.is_zero());
    }

    #[test]
    fn closed_forms() {
        // det(A_n) = (n+1)/2^n; det(B_n) = 2^(1-n); det(G2(m)) = 1 - cos^2(pi/m)
        for n in 1..=8usize {
            let labels = vec![3; n - 1];
            let p = determinant(&path(&labels)).unwrap();
            assert!(p.c0.equals(&AlgebraicReal::from_rational(BigRational::new(
                BigInt::from(n as i64 + 1),
                BigInt::from(2u64.pow(n as u32))
            ))));
        }
        for n in 2..=8usize {
            let mut labels = vec![3; n - 1];
            labels[0] = 4;
            let p = determinant(&path(&labels)).unwrap();
            assert!(p.c0.equals(&AlgebraicReal::from_rational(BigRational::new(
                BigInt::from(1),
                BigInt::from(2u64.pow((n - 1) as u32))
            ))));
        }
        for m in [5u32, 7, 12, 30, 60] {
            let p = determinant(&path(&[m])).unwrap();
            let c = AlgebraicReal::cos_pi_over(m as u64);
            assert!(p.c0.equals(&AlgebraicReal::one().sub(&c.mul(&c))));
        }
    }

    #[test]
    fn inertia_cases() {
        let a3 = path(&[3, 3]);
        assert_eq!(inertia(&a3, None).unwrap(), Signature::new(3, 0, 0));
        let a2t = dg("D{0-1:3, 1-2:3, 0-2:3}");
        assert_eq!(inertia(&a2t, None).unwrap(), Signature::new(2, 0, 1));
        // 2-node dotted at w = -2: det < 0
        let dd = dg("D{0-1:inf}");
        let w = crate::arith::quadext_of_rational(BigRational::from(BigInt::from(-2)));
        assert_eq!(inertia(&dd, Some(&w)).unwrap(), Signature::new(1, 1, 0));
    }

    #[test]
    fn weight_poly_of_dotted_triangle() {
        // triangle a-3-b, b-3-c, a-c dotted: det = -w^2 + w/2 + 1/2
        let t = dg("D{0-1:3, 1-2:3, 0-2:inf}");
        let p = determinant(&t).unwrap();
        assert!(p.c2.equals(&AlgebraicReal::from_int(-1)));
        assert!(p.c1.equals(&AlgebraicReal::rational(1, 2)));
        assert!(p.c0.equals(&AlgebraicReal::rational(1, 2)));
        assert!(p.roots_in_ray().unwrap().is_empty());
        // admissible signature (2,1,0) for all w < -1
        let w = exists_admissible_signature(&t, t.full_set(), Signature::new(2, 1, 0)).unwrap();
        assert!(w.is_some());
    }

    #[test]
    fn classify_cases() {
        assert!(matches!(classify(&path(&[3, 3, 3, 3])), DiagramClass::Elliptic(_)));
        assert_eq!(classify(&dg("D{0-1:3, 1-2:7}")), DiagramClass::Lanner);
        assert_eq!(classify(&dg("D{0-1:3, 1-2:3, 0-2:3}")), DiagramClass::Parabolic);
        assert_eq!(classify(&dg("D{0-1:inf}")), DiagramClass::Lanner);
        // H4 is elliptic
        assert!(matches!(classify(&path(&[5, 3, 3])), DiagramClass::Elliptic(_)));
        // disjoint lanner + dotted: superhyperbolic for every w
        let s = dg("D[5]{0-1:3, 1-2:7, 3-4:inf}");
        assert_eq!(classify(&s), DiagramClass::Superhyperbolic);
    }

    #[test]
    fn lanner_listing() {
        let t = dg("D{0-1:3, 1-2:7}");
        assert_eq!(lanner_subdiagrams(&t), vec![0b111]);
        let h4 = path(&[5, 3, 3]);
        assert!(lanner_subdiagrams(&h4).is_empty());
        let dd = dg("D{0-1:inf}");
        assert_eq!(lanner_subdiagrams(&dd), vec![0b11]);
    }

    #[test]
    fn local_det_gluing() {
        // A3 path u-v-w at v: 1/2 / 1 = 1/2; glues from two A2 local dets
        let a3 = path(&[3, 3]);
        let ld = local_det(&a3, a3.full_set(), 1).unwrap();
        let v = ld.constant_value().unwrap();
        assert!(v.equals(&AlgebraicReal::rational(1, 2)));
        let left = local_det(&a3, 0b011, 1).unwrap().constant_value().unwrap();
        let right = local_det(&a3, 0b110, 1).unwrap().constant_value().unwrap();
        let glued = left.add(&right).sub(&AlgebraicReal::one());
        assert!(v.equals(&glued));
    }

    #[test]
    fn solve_weight_none_for_dotted_edge() {
        let dd = dg("D{0-1:inf}");
        assert!(solve_dotted_weight(&dd).unwrap().is_empty());
        let t = dg("D{0-1:3, 1-2:3, 0-2:inf}");
        assert!(solve_dotted_weight(&t).unwrap().is_empty());
    }

    #[test]
    fn parabolic_subdiagram_detection() {
        let s = dg("D{0-1:3, 1-2:3, 0-2:3, 3-0:5}");
        assert!(has_parabolic_subdiagram(&s, s.full_set()));
        let t = dg("D{0-1:3, 1-2:7}");
        assert!(!has_parabolic_subdiagram(&t, t.full_set()));
        // C2-tilde inside a larger diagram
        let c = dg("D[4]{0-1:4, 1-2:4}");
        assert!(has_parabolic_subdiagram(&c, c.full_set()));
    }
}

/// Parabolic-subdiagram check restricted to subsets containing `v`; used for
/// incremental pruning when node `v` was just added to a prefix known clean.
pub fn has_parabolic_subdiagram_touching(d: &Diagram, set: NodeSet, v: usize) -> bool {
    let others: Vec<usize> = nodeset_members(set).into_iter().filter(|&u| u != v).collect();
    let k = others.len();
    if k < 2 {
        return false;
    }
    for sub in 0..(1u64 << k) {
        if sub.count_ones() < 2 {
            continue;
        }
        let nodes: NodeSet = (0..k)
            .filter(|&i| sub & (1 << i) != 0)
            .fold(1u64 << v, |acc, i| acc | (1 << others[i]));
        if d.components_of(nodes).len() != 1 {
            continue;
        }
        if connected_affine_type(d, nodes).is_some() {
            return true;
        }
    }
    false
}
