//! The admissible shapes of <y0,S1> used by the candidate-list enumeration:
//! Lannér diagrams, prism diagrams with a tail discarded, and one-node /
//! two-node deletions of the Esselmann and (d+3)-facet catalogs.

use crate::diagram::{canonical_key_colored, nodeset_len, nodeset_members, Diagram, NodeSet};
use crate::polytope::generate::{lanner_diagrams, without_tails};
use crate::polytope::Catalog;
use crate::spectra::{connected_elliptic_type, is_elliptic, subsets_of_size, EllipticType};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShapeClass {
    Lanner,
    PrismNoTail,
    Esselmann,
    DPlus3,
}

/// One admissible decomposition of a <y0,S1> diagram.
#[derive(Clone, Debug)]
pub struct Shape {
    pub diagram: Diagram,
    pub y0: usize,
    pub s1: NodeSet,
    /// Node known to be an end of the ambient dotted edge, when any.
    pub mark: Option<usize>,
    pub class: ShapeClass,
}

impl Shape {
    pub fn max_label(&self) -> u32 {
        self.diagram.max_finite_label()
    }
}

/// Position of a type in its comparability chain, or None if the type is
/// not ordered (rank >= 5, D/E families).
fn chain_of(t: EllipticType) -> Option<(u8, u32)> {
    match t {
        EllipticType::A(2) => Some((2, 0)),
        EllipticType::B(2) => Some((2, 1)),
        EllipticType::G2(m) => Some((2, m - 3)), // G2(5) -> 2, increasing in m
        EllipticType::A(3) => Some((3, 0)),
        EllipticType::B(3) => Some((3, 1)),
        EllipticType::H(3) => Some((3, 2)),
        EllipticType::A(4) => Some((4, 0)),
        EllipticType::B(4) => Some((4, 1)),
        EllipticType::F4 => Some((4, 2)),
        EllipticType::H(4) => Some((4, 3)),
        _ => None,
    }
}

fn precedes(a: EllipticType, b: EllipticType) -> bool {
    match (chain_of(a), chain_of(b)) {
        (Some((ca, ia)), Some((cb, ib))) => ca == cb && ia < ib,
        _ => false,
    }
}

/// Connected elliptic subdiagrams of order `ord` inside the diagram.
fn connected_elliptic_of_order(d: &Diagram, ord: usize) -> Vec<(NodeSet, EllipticType)> {
    let nodes: Vec<usize> = (0..d.n()).collect();
    let mut out = Vec::new();
    subsets_of_size(&nodes, ord, &mut |sel| {
        let set = sel.iter().fold(0u64, |acc, &v| acc | (1 << v));
        if d.components_of(set).len() != 1 {
            return;
        }
        if let Some(t) = connected_elliptic_type(d, set) {
            out.push((set, t));
        }
    });
    out
}

/// The decompositions of a Lannér or prism-without-tail diagram permitted by
/// the maximal / next-to-maximal rule. `known_end` is the surviving dotted
/// end for prism shapes.
fn rule6_decompositions(
    diagram: &Diagram,
    d0: usize,
    known_end: Option<usize>,
    class: ShapeClass,
) -> Vec<Shape> {
    let subs = connected_elliptic_of_order(diagram, d0);
    let mut out = Vec::new();
    let full = diagram.full_set();
    for &(s1, t) in &subs {
        let rest = full & !s1;
        if nodeset_len(rest) != 1 {
            continue;
        }
        let y0 = nodeset_members(rest)[0];
        // branch 1: s1 maximal
        let maximal = subs.iter().all(|&(_, u)| !precedes(t, u));
        if maximal {
            out.push(Shape {
                diagram: diagram.clone(),
                y0,
                s1,
                mark: known_end,
                class,
            });
            continue;
        }
        // branch 2: s1 next to maximal, containing a dotted end x, with the
        // complement of x the unique maximal subdiagram of order d0
        let candidates: Vec<usize> = match known_end {
            Some(m) => {
                if s1 & (1 << m) != 0 {
                    vec![m]
                } else {
                    vec![]
                }
            }
            None => nodeset_members(s1),
        };
        for x in candidates {
            let without_x = full & !(1 << x);
            if diagram.components_of(without_x).len() != 1 {
                continue;
            }
            let Some(tx) = connected_elliptic_type(diagram, without_x) else {
                continue;
            };
            if nodeset_len(without_x) != d0 {
                continue;
            }
            // `without_x` must be the unique maximal subdiagram of order d0
            let tx_maximal = subs.iter().all(|&(_, u)| !precedes(tx, u));
            let others_dominated = subs
                .iter()
                .filter(|&&(s, _)| s != without_x)
                .all(|&(_, u)| subs.iter().any(|&(_, v)| precedes(u, v)));
            if !(tx_maximal && others_dominated) {
                continue;
            }
            // s1 next to maximal toward tx: nothing strictly between
            if !precedes(t, tx) {
                continue;
            }
            let between = subs
                .iter()
                .any(|&(_, u)| precedes(t, u) && precedes(u, tx));
            if between {
                continue;
            }
            out.push(Shape {
                diagram: diagram.clone(),
                y0,
                s1,
                mark: Some(x),
                class,
            });
        }
    }
    out
}

/// Build every admissible shape for the given face dimension d0.
///
/// `label_cap` bounds finite labels (for the infinite families); the
/// Esselmann and d+3 catalogs supply the exceptional classes.
pub fn shapes_for(
    d0: usize,
    label_cap: u32,
    prisms: Option<&Catalog>,
    esselmann: Option<&Catalog>,
    dplus3: Option<&Catalog>,
) -> Vec<Shape> {
    let mut out: Vec<Shape> = Vec::new();
    // Lannér diagrams of order d0 + 1
    if d0 + 1 <= 5 && d0 >= 1 {
        for l in lanner_diagrams(d0 + 1, label_cap) {
            out.extend(rule6_decompositions(&l, d0, None, ShapeClass::Lanner));
        }
    }
    // prisms of dimension d0 without a tail
    if let Some(pcat) = prisms {
        assert_eq!(pcat.dim, d0);
        for e in &pcat.entries {
            if e.diagram.max_finite_label() > label_cap {
                continue;
            }
            for wt in without_tails(&e.diagram) {
                out.extend(rule6_decompositions(
                    &wt.diagram,
                    d0,
                    Some(wt.dotted_end),
                    ShapeClass::PrismNoTail,
                ));
            }
        }
    }
    // Esselmann deletions (only meaningful for d0 = 4)
    if d0 == 4 {
        if let Some(ecat) = esselmann {
            for e in &ecat.entries {
                let d = &e.diagram;
                for v in 0..d.n() {
                    let sub = d.without_node(v);
                    if sub.max_finite_label() > label_cap {
                        continue;
                    }
                    for y0 in 0..sub.n() {
                        let s1 = sub.full_set() & !(1 << y0);
                        if is_elliptic(&sub, s1) {
                            out.push(Shape {
                                diagram: sub.clone(),
                                y0,
                                s1,
                                mark: None,
                                class: ShapeClass::Esselmann,
                            });
                        }
                    }
                }
            }
        }
    }
    // d+3 catalog deletions: drop two nodes, keep the result dotted-free
    if let Some(cat) = dplus3 {
        if cat.dim == d0 {
            for e in &cat.entries {
                let d = &e.diagram;
                let dotted = d.dotted_edges();
                let n = d.n();
                for a in 0..n {
                    for b in (a + 1)..n {
                        let keep = d.full_set() & !(1 << a) & !(1 << b);
                        // dropped pair must cover at least one end of each
                        // dotted edge so the shape is dotted-free
                        if dotted
                            .iter()
                            .any(|&(i, j)| keep & (1 << i) != 0 && keep & (1 << j) != 0)
                        {
                            continue;
                        }
                        let survivors: Vec<usize> = dotted
                            .iter()
                            .flat_map(|&(i, j)| [i, j])
                            .filter(|&v| keep & (1 << v) != 0)
                            .collect();
                        let members = nodeset_members(keep);
                        let sub = d.induced(keep);
                        if sub.max_finite_label() > label_cap {
                            continue;
                        }
                        let mark = match survivors.as_slice() {
                            [] => None,
                            [m] => Some(members.iter().position(|&x| x == *m).unwrap()),
                            _ => continue,
                        };
                        for y0 in 0..sub.n() {
                            let s1 = sub.full_set() & !(1 << y0);
                            if is_elliptic(&sub, s1) {
                                out.push(Shape {
                                    diagram: sub.clone(),
                                    y0,
                                    s1,
                                    mark,
                                    class: ShapeClass::DPlus3,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    dedup_shapes(out)
}

/// Dedup shapes by the colored canonical key of (diagram, y0-role, S1 part,
/// mark), so equivalent decompositions are listed once.
fn dedup_shapes(shapes: Vec<Shape>) -> Vec<Shape> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for s in shapes {
        let mut colors = vec![0u32; s.diagram.n()];
        colors[s.y0] = 1;
        for v in nodeset_members(s.s1) {
            colors[v] |= 2;
        }
        if let Some(m) = s.mark {
            colors[m] |= 4;
        }
        let key = canonical_key_colored(&s.diagram, &colors);
        if seen.insert(key) {
            out.push(s);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::generate::generate_prism_catalog;

    #[test]
    fn lanner3_shapes_match_rule() {
        // triangle (3,4,5): s1 must be the 5-edge (maximal), or next-to-max
        // with the complement unique maximal
        let shapes = shapes_for(2, 5, None, None, None);
        assert!(!shapes.is_empty());
        for s in &shapes {
            assert_eq!(nodeset_len(s.s1), 2);
            assert!(is_elliptic(&s.diagram, s.s1));
        }
        // every unmarked shape has S1 of maximal label
        for s in shapes.iter().filter(|s| s.mark.is_none()) {
            let m = nodeset_members(s.s1);
            let lab = s.diagram.label(m[0], m[1]).finite().unwrap();
            assert_eq!(lab, s.diagram.max_finite_label());
        }
    }

    #[test]
    fn prism_shapes_carry_marks() {
        let p3 = generate_prism_catalog(3, 5).unwrap();
        let shapes = shapes_for(3, 5, Some(&p3), None, None);
        assert!(!shapes.is_empty());
        for s in &shapes {
            if s.class == ShapeClass::PrismNoTail {
                assert!(s.mark.is_some());
            }
        }
    }
}
