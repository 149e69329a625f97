//! Face environments, the polytopality battery, combinatorics summaries and
//! diagram catalogs.

pub mod generate;

use crate::diagram::{canonical_key, nodeset_len, Diagram, NeighborPartition, NodeSet};
use crate::spectra::{
    self, elliptic_components, elliptic_subsets_of_order, is_elliptic, lanner_subdiagrams,
    EllipticType, Signature, SpectraError,
};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PolytopeError {
    #[error("subdiagram is not elliptic")]
    NotElliptic,
    #[error("face semantics need S0 free of A_n and D5 components")]
    ForbiddenComponents,
    #[error("{0}")]
    Spectra(#[from] SpectraError),
    #[error("catalog parse error at line {line}: {reason}")]
    CatalogParse { line: usize, reason: String },
    #[error("catalog entry {index} failed validation: {reason}")]
    CatalogInvalid { index: usize, reason: String },
    #[error("{0}")]
    Diagram(#[from] crate::diagram::DiagramError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Good / bad / non-neighbor partition of the complement of an elliptic S.
pub fn neighbor_partition(d: &Diagram, s: NodeSet) -> Result<NeighborPartition, PolytopeError> {
    if !is_elliptic(d, s) {
        return Err(PolytopeError::NotElliptic);
    }
    let mut good = 0u64;
    let mut bad = 0u64;
    let mut non = 0u64;
    for v in 0..d.n() {
        if s & (1 << v) != 0 {
            continue;
        }
        if !d.attaches(v, s) {
            non |= 1 << v;
        } else if is_elliptic(d, s | (1 << v)) {
            good |= 1 << v;
        } else {
            bad |= 1 << v;
        }
    }
    Ok(NeighborPartition { good, bad, non })
}

/// Environment of the face defined by an elliptic subdiagram.
#[derive(Clone, Debug)]
pub struct FaceEnvironment {
    pub s0: NodeSet,
    pub partition: NeighborPartition,
    pub obar: NodeSet,
    pub face_dim: i64,
    /// True iff S0 has no good neighbors, in which case obar is the full
    /// diagram of the face polytope.
    pub sigma_face_available: bool,
}

/// Compute the face environment. With `face_semantics` set, S0 must contain
/// no A_n or D5 components (the face-diagram reading is only valid then).
pub fn face_environment(
    d: &Diagram,
    s0: NodeSet,
    dim: usize,
    face_semantics: bool,
) -> Result<FaceEnvironment, PolytopeError> {
    let comps = elliptic_components(d, s0).ok_or(PolytopeError::NotElliptic)?;
    if face_semantics {
        let forbidden = comps
            .iter()
            .any(|t| matches!(t, EllipticType::A(_)) || matches!(t, EllipticType::D(5)));
        if forbidden {
            return Err(PolytopeError::ForbiddenComponents);
        }
    }
    let partition = neighbor_partition(d, s0)?;
    let obar = partition.obar();
    Ok(FaceEnvironment {
        s0,
        partition: partition.clone(),
        obar,
        face_dim: dim as i64 - nodeset_len(s0) as i64,
        sigma_face_available: partition.good == 0,
    })
}

/// Two face facets of P(S) intersect iff the extension stays elliptic.
pub fn face_facets_intersect(d: &Diagram, s: NodeSet, u: usize, v: usize) -> bool {
    is_elliptic(d, s | (1 << u) | (1 << v))
}

/// Report of the necessary-condition battery for being the diagram of a
/// compact d-polytope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolytopalityReport {
    pub signature_ok: bool,
    pub has_vertex: bool,
    pub edge_condition_ok: bool,
    pub lanner_pairs_ok: bool,
    pub verdict: Result<(), String>,
}

impl PolytopalityReport {
    pub fn passed(&self) -> bool {
        self.verdict.is_ok()
    }
}

/// Run the battery: admissible signature (d,1,n-d-1); at least one elliptic
/// subdiagram of order d (a vertex); every elliptic subdiagram of order d-1
/// lies in exactly two of order d (polytope edges have two ends); and the
/// Lannér-pair condition described below.
///
/// The Lannér-pair condition is encoded exactly as the statement used by the
/// B_k-subdiagram eliminations and nothing stronger: reject when some Lannér
/// subdiagram containing a dotted end meets every other Lannér subdiagram
/// while at least three Lannér subdiagrams are present. Flagged for audit:
/// the condition is imported from the d+3-facet classification context.
pub fn polytopality_check(d: &Diagram, dim: usize) -> Result<PolytopalityReport, PolytopeError> {
    let nd = d.dotted_count();
    if nd > 1 {
        return Err(PolytopeError::Spectra(SpectraError::TooManyDotted(nd)));
    }
    let n = d.n();
    let target = Signature::new(dim, 1, n.saturating_sub(dim + 1));
    let signature_ok = n > dim
        && spectra::exists_admissible_signature(d, d.full_set(), target)?.is_some();
    let vertices = if signature_ok { elliptic_subsets_of_order(d, dim) } else { vec![] };
    let has_vertex = !vertices.is_empty();
    let mut edge_condition_ok = signature_ok && has_vertex;
    if edge_condition_ok && dim >= 1 {
        for e in elliptic_subsets_of_order(d, dim - 1) {
            let count = vertices.iter().filter(|&&v| v & e == e).count();
            if count != 2 {
                edge_condition_ok = false;
                break;
            }
        }
    }
    let mut lanner_pairs_ok = true;
    if signature_ok && has_vertex && edge_condition_ok {
        let ls = lanner_subdiagrams(d);
        if ls.len() >= 3 {
            let dotted_ends: NodeSet = d
                .dotted_edges()
                .iter()
                .fold(0, |acc, &(i, j)| acc | (1 << i) | (1 << j));
            for &l in &ls {
                if l & dotted_ends == 0 {
                    continue;
                }
                if ls.iter().all(|&m| m == l || m & l != 0) {
                    lanner_pairs_ok = false;
                    break;
                }
            }
        }
    }
    let verdict = if !signature_ok {
        Err("signature".to_string())
    } else if !has_vertex {
        Err("no vertex".to_string())
    } else if !edge_condition_ok {
        Err("edge condition".to_string())
    } else if !lanner_pairs_ok {
        Err("lanner pair condition".to_string())
    } else {
        Ok(())
    };
    Ok(PolytopalityReport { signature_ok, has_vertex, edge_condition_ok, lanner_pairs_ok, verdict })
}

/// Basic combinatorics of a checked polytope diagram.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombinatoricsSummary {
    pub facets: usize,
    pub nonintersecting_pairs: usize,
    pub is_simplex: bool,
    pub is_prism: bool,
}

/// The facet named by `u` is a (dim-1)-simplex of the face lattice iff it has
/// exactly dim facet-neighbors and every (dim-1)-subset of them meets it in a
/// vertex.
fn facet_is_simplex(d: &Diagram, u: usize, dim: usize) -> bool {
    let nb: Vec<usize> = (0..d.n())
        .filter(|&v| v != u && is_elliptic(d, (1 << u) | (1 << v)))
        .filter(|&v| !d.label(u, v).is_dotted())
        .collect();
    if nb.len() != dim {
        return false;
    }
    let mut ok = true;
    spectra::subsets_of_size(&nb, dim - 1, &mut |sel| {
        let set = sel.iter().fold(1u64 << u, |acc, &v| acc | (1 << v));
        if !is_elliptic(d, set) {
            ok = false;
        }
    });
    ok
}

pub fn combinatorics_summary(d: &Diagram, dim: usize) -> CombinatoricsSummary {
    let facets = d.n();
    let pairs = d.dotted_count();
    let is_simplex = facets == dim + 1;
    let mut is_prism = false;
    if facets == dim + 2 && pairs == 1 {
        let (u, v) = d.dotted_edges()[0];
        is_prism = facet_is_simplex(d, u, dim) && facet_is_simplex(d, v, dim);
    }
    CombinatoricsSummary { facets, nonintersecting_pairs: pairs, is_simplex, is_prism }
}

// ---------------------------------------------------------------------------
// Catalogs
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Generated,
    Transcribed,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub diagram: Diagram,
    pub facets: usize,
    pub pairs: usize,
    pub provenance: Provenance,
}

#[derive(Clone, Debug)]
pub struct Catalog {
    pub name: String,
    pub dim: usize,
    pub entries: Vec<CatalogEntry>,
}

impl Catalog {
    pub fn new(name: &str, dim: usize) -> Self {
        Catalog { name: name.to_string(), dim, entries: Vec::new() }
    }

    /// Push an entry unless an isomorphic diagram is already present.
    pub fn push_dedup(&mut self, diagram: Diagram, provenance: Provenance) -> bool {
        let key = canonical_key(&diagram);
        if self
            .entries
            .iter()
            .any(|e| canonical_key(&e.diagram) == key)
        {
            return false;
        }
        let facets = diagram.n();
        let pairs = diagram.dotted_count();
        self.entries.push(CatalogEntry { diagram, facets, pairs, provenance });
        true
    }

    /// Deterministic order: sort by canonical key.
    pub fn sort(&mut self) {
        self.entries.sort_by_key(|e| canonical_key(&e.diagram));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains_isomorphic(&self, d: &Diagram) -> bool {
        let key = canonical_key(d);
        self.entries.iter().any(|e| canonical_key(&e.diagram) == key)
    }

    pub fn format(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "catalog {} dim {}", self.name, self.dim);
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                let _ = writeln!(out, "---");
            }
            let _ = writeln!(out, "meta facets={} pairs={}", e.facets, e.pairs);
            out.push_str(&e.diagram.format());
        }
        out
    }

    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.format().as_bytes());
        format!("{:x}", h.finalize())
    }

    pub fn parse(text: &str) -> Result<Catalog, PolytopeError> {
        let mut lines = text.lines().enumerate().peekable();
        let (_, header) = lines
            .next()
            .ok_or(PolytopeError::CatalogParse { line: 0, reason: "empty file".into() })?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != "catalog" || parts[2] != "dim" {
            return Err(PolytopeError::CatalogParse {
                line: 1,
                reason: "header must be `catalog <name> dim <d>`".into(),
            });
        }
        let name = parts[1].to_string();
        let dim: usize = parts[3].parse().map_err(|_| PolytopeError::CatalogParse {
            line: 1,
            reason: "bad dimension".into(),
        })?;
        let mut cat = Catalog::new(&name, dim);
        let mut block = String::new();
        let mut meta: Option<(usize, usize)> = None;
        let mut flush = |block: &mut String,
                         meta: &mut Option<(usize, usize)>,
                         cat: &mut Catalog|
         -> Result<(), PolytopeError> {
            let text = block.trim();
            if text.is_empty() {
                return Ok(());
            }
            let d = Diagram::parse(text)?;
            let facets = meta.map(|m| m.0).unwrap_or(d.n());
            let pairs = meta.map(|m| m.1).unwrap_or(d.dotted_count());
            cat.entries.push(CatalogEntry {
                diagram: d,
                facets,
                pairs,
                provenance: Provenance::Transcribed,
            });
            block.clear();
            *meta = None;
            Ok(())
        };
        for (lineno, raw) in lines {
            let s = raw.trim();
            if s == "---" {
                flush(&mut block, &mut meta, &mut cat)?;
                continue;
            }
            if let Some(rest) = s.strip_prefix("meta ") {
                let mut facets = None;
                let mut pairs = None;
                for kv in rest.split_whitespace() {
                    if let Some(v) = kv.strip_prefix("facets=") {
                        facets = v.parse().ok();
                    } else if let Some(v) = kv.strip_prefix("pairs=") {
                        pairs = v.parse().ok();
                    }
                }
                match (facets, pairs) {
                    (Some(f), Some(p)) => meta = Some((f, p)),
                    _ => {
                        return Err(PolytopeError::CatalogParse {
                            line: lineno + 1,
                            reason: "meta needs facets= and pairs=".into(),
                        })
                    }
                }
                continue;
            }
            block.push_str(raw);
            block.push('\n');
        }
        flush(&mut block, &mut meta, &mut cat)?;
        Ok(cat)
    }
}

/// Load a catalog file and hard-validate every entry against the battery.
pub fn load_catalog(path: &std::path::Path) -> Result<Catalog, PolytopeError> {
    let text = std::fs::read_to_string(path)?;
    let cat = Catalog::parse(&text)?;
    validate_catalog(&cat, cat.dim)?;
    Ok(cat)
}

/// Validation gate: signature + battery + claimed facet count + at most one
/// divergent pair per entry; duplicates rejected.
pub fn validate_catalog(cat: &Catalog, dim: usize) -> Result<(), PolytopeError> {
    let mut seen = std::collections::HashSet::new();
    for (index, e) in cat.entries.iter().enumerate() {
        let fail = |reason: &str| PolytopeError::CatalogInvalid {
            index,
            reason: reason.to_string(),
        };
        if e.diagram.n() != e.facets {
            return Err(fail("facet count mismatch"));
        }
        if e.diagram.dotted_count() != e.pairs {
            return Err(fail("divergent-pair count mismatch"));
        }
        if e.pairs > 1 {
            return Err(fail("more than one divergent pair"));
        }
        let report = polytopality_check(&e.diagram, dim)?;
        if let Err(why) = &report.verdict {
            return Err(fail(&format!("battery: {why}")));
        }
        if !seen.insert(canonical_key(&e.diagram)) {
            return Err(fail("duplicate entry"));
        }
    }
    Ok(())
}

/// Write catalog files together with a sidecar checksum manifest.
pub fn write_catalog_with_manifest(
    cat: &Catalog,
    dir: &std::path::Path,
    filename: &str,
) -> Result<(), PolytopeError> {
    std::fs::create_dir_all(dir)?;
    let body = cat.format();
    std::fs::write(dir.join(filename), &body)?;
    let manifest = dir.join("MANIFEST.sha256");
    let mut lines: Vec<String> = if manifest.exists() {
        std::fs::read_to_string(&manifest)?
            .lines()
            .filter(|l| !l.ends_with(filename))
            .map(|s| s.to_string())
            .collect()
    } else {
        Vec::new()
    };
    let mut h = Sha256::new();
    h.update(body.as_bytes());
    lines.push(format!("{:x}  {}", h.finalize(), filename));
    lines.sort();
    std::fs::write(manifest, lines.join("\n") + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dg(s: &str) -> Diagram {
        Diagram::parse_inline(s).unwrap()
    }

    #[test]
    fn neighbor_partition_cases() {
        // path a-3-b-3-c with S={a}: good={b}, non={c}
        let d = dg("D{0-1:3, 1-2:3}");
        let p = neighbor_partition(&d, 0b001).unwrap();
        assert_eq!(p.good, 0b010);
        assert_eq!(p.non, 0b100);
        assert_eq!(p.bad, 0);
        // S spanning a 7-edge: any attached node is bad (no elliptic rank-3
        // diagram carries a label above 5)
        let d = dg("D{0-1:7, 1-2:3}");
        let p = neighbor_partition(&d, 0b011).unwrap();
        assert_eq!(p.bad, 0b100);
        // a single endpoint of a 7-edge has the other end as a good neighbor
        let d = dg("D{0-1:7}");
        let p = neighbor_partition(&d, 0b01).unwrap();
        assert_eq!(p.good, 0b10);
        // H4 + isolated node
        let d = dg("D[5]{0-1:5, 1-2:3, 2-3:3}");
        let p = neighbor_partition(&d, 0b1111).unwrap();
        assert_eq!(p.non, 0b10000);
        // dotted neighbor is bad
        let d = dg("D{0-1:inf}");
        let p = neighbor_partition(&d, 0b01).unwrap();
        assert_eq!(p.bad, 0b10);
    }

    #[test]
    fn face_environment_cases() {
        // H4 + dotted pair, S0 = H4, d = 5
        let d = dg("D{0-1:5, 1-2:3, 2-3:3, 4-5:inf}");
        let fe = face_environment(&d, 0b001111, 5, true).unwrap();
        assert_eq!(fe.obar, 0b110000);
        assert_eq!(fe.face_dim, 1);
        assert!(fe.sigma_face_available);
        // A_n component rejected under face semantics
        let d = dg("D{0-1:3, 1-2:3}");
        assert!(face_environment(&d, 0b001, 2, true).is_err());
        let fe = face_environment(&d, 0b010, 2, false).unwrap();
        assert!(!fe.sigma_face_available);
        assert_eq!(fe.obar, 0b101);
    }

    #[test]
    fn battery_on_triangle_group() {
        let t = dg("D{0-1:3, 1-2:7}");
        let rep = polytopality_check(&t, 2).unwrap();
        assert!(rep.passed(), "{:?}", rep);
        let s = combinatorics_summary(&t, 2);
        assert!(s.is_simplex);
        assert_eq!(s.facets, 3);
        assert_eq!(s.nonintersecting_pairs, 0);
    }

    #[test]
    fn battery_rejects_superhyperbolic() {
        let d = dg("D[5]{0-1:3, 1-2:7, 3-4:inf}");
        let rep = polytopality_check(&d, 3).unwrap();
        assert!(!rep.signature_ok);
    }

    #[test]
    fn catalog_roundtrip() {
        let mut cat = Catalog::new("test", 2);
        cat.push_dedup(dg("D{0-1:3, 1-2:7}"), Provenance::Generated);
        cat.push_dedup(dg("D{0-1:3, 1-2:8}"), Provenance::Generated);
        assert!(!cat.push_dedup(dg("D{0-2:3, 1-2:7}"), Provenance::Generated));
        cat.sort();
        let text = cat.format();
        let back = Catalog::parse(&text).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back.dim, 2);
        validate_catalog(&back, 2).unwrap();
    }
}
