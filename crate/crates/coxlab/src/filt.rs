//! Fast f64 prescreen for inertia decisions.
//!
//! Jacobi eigenvalues of the Gram matrix with a wide uncertainty band: any
//! eigenvalue inside the band makes the answer `None` and the caller falls
//! back to the exact track. Eigenvalues of symmetric matrices are perfectly
//! conditioned, so the band dominates float error by many orders; borderline
//! cases (in particular every exact zero eigenvalue) always escalate.

use crate::diagram::{nodeset_members, Diagram, EdgeLabel, NodeSet};
use crate::spectra::Signature;

/// Band inside which an eigenvalue's sign is treated as undecided.
pub const BAND: f64 = 1e-8;

pub fn cos_pi_over_f64(m: u32) -> f64 {
    (std::f64::consts::PI / m as f64).cos()
}

/// Dense symmetric Gram matrix; dotted entries take `w`.
pub fn gram_f64(d: &Diagram, set: NodeSet, w: f64) -> Vec<f64> {
    let members = nodeset_members(set);
    let n = members.len();
    let mut m = vec![0.0; n * n];
    for a in 0..n {
        m[a * n + a] = 1.0;
        for b in (a + 1)..n {
            let v = match d.label(members[a], members[b]) {
                EdgeLabel::Absent => 0.0,
                EdgeLabel::Finite(lab) => -cos_pi_over_f64(lab),
                EdgeLabel::Dotted => w,
            };
            m[a * n + b] = v;
            m[b * n + a] = v;
        }
    }
    m
}

/// Eigenvalues by cyclic Jacobi; good to ~1e-13 for the sizes used here.
pub fn jacobi_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    if n == 0 {
        return vec![];
    }
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i * n + j] * a[i * n + j];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

/// Inertia with uncertainty band; `None` when any eigenvalue is in the band.
pub fn inertia_f64(d: &Diagram, set: NodeSet, w: f64) -> Option<Signature> {
    let members = nodeset_members(set);
    let n = members.len();
    let ev = jacobi_eigenvalues(gram_f64(d, set, w), n);
    let mut pos = 0;
    let mut neg = 0;
    for e in ev {
        if e > BAND {
            pos += 1;
        } else if e < -BAND {
            neg += 1;
        } else {
            return None;
        }
    }
    Some(Signature::new(pos, neg, n - pos - neg))
}

/// Certified-safe lower bound on the negative index: counts only eigenvalues
/// clearly below the band, so it never overcounts.
pub fn neg_index_at_least(d: &Diagram, set: NodeSet, w: f64, k: usize) -> bool {
    let members = nodeset_members(set);
    let n = members.len();
    let ev = jacobi_eigenvalues(gram_f64(d, set, w), n);
    ev.iter().filter(|&&e| e < -BAND).count() >= k
}

/// Conservative prune: true when the negative index certainly exceeds `k`
/// for every admissible weight. For dotted sets this drops one dotted end
/// (the remaining principal submatrix bounds the full negative index from
/// below uniformly in w), so the conclusion holds on the whole ray.
pub fn surely_neg_exceeds_everywhere(d: &Diagram, set: NodeSet, k: usize) -> bool {
    let members = nodeset_members(set);
    let dotted: Vec<(usize, usize)> = members
        .iter()
        .enumerate()
        .flat_map(|(a, &i)| {
            members[a + 1..]
                .iter()
                .filter(move |&&j| d.label(i, j).is_dotted())
                .map(move |&j| (i, j))
        })
        .collect();
    if dotted.is_empty() {
        neg_index_at_least(d, set, 0.0, k + 1)
    } else {
        let (u, _) = dotted[0];
        neg_index_at_least(d, set & !(1 << u), 0.0, k + 1)
    }
}

/// f64 determinant by LU with partial pivoting.
pub fn det_f64(mut m: Vec<f64>, n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let mut pr = col;
        for r in (col + 1)..n {
            if m[r * n + col].abs() > m[pr * n + col].abs() {
                pr = r;
            }
        }
        if m[pr * n + col].abs() < 1e-300 {
            return 0.0;
        }
        if pr != col {
            for c in 0..n {
                m.swap(pr * n + c, col * n + c);
            }
            det = -det;
        }
        let piv = m[col * n + col];
        det *= piv;
        for r in (col + 1)..n {
            let f = m[r * n + col] / piv;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                m[r * n + c] -= f * m[col * n + c];
            }
        }
    }
    det
}

/// The f64 coefficients of det as a quadratic in w (one dotted edge).
pub fn det_poly_f64(d: &Diagram, set: NodeSet) -> (f64, f64, f64) {
    let n = nodeset_members(set).len();
    let d0 = det_f64(gram_f64(d, set, 0.0), n);
    let d1 = det_f64(gram_f64(d, set, 1.0), n);
    let dm1 = det_f64(gram_f64(d, set, -1.0), n);
    (d0, (d1 - dm1) / 2.0, (d1 + dm1) / 2.0 - d0)
}

/// Prescreen for "some w < -1 gives the target inertia".
/// `Some(false)` is a certified-practical reject (clear margins everywhere);
/// `None` requests exact escalation. `Some(true)` still requires exact
/// confirmation before any acceptance.
pub fn exists_admissible_f64(d: &Diagram, set: NodeSet, target: Signature) -> Option<bool> {
    let members = nodeset_members(set);
    let has_dotted = members.iter().enumerate().any(|(a, &i)| {
        members[a + 1..].iter().any(|&j| d.label(i, j).is_dotted())
    });
    if !has_dotted {
        let sig = inertia_f64(d, set, 0.0)?;
        return Some(sig == target);
    }
    let (c0, c1, c2) = det_poly_f64(d, set);
    let scale = c0.abs().max(c1.abs()).max(c2.abs());
    if scale < 1e-7 {
        return None; // determinant nearly identically zero
    }
    // roots of the quadratic on the ray
    let mut roots: Vec<f64> = Vec::new();
    if c2.abs() < 1e-9 * scale {
        if c1.abs() < 1e-9 * scale {
            // constant, nonzero
        } else {
            roots.push(-c0 / c1);
        }
    } else {
        let disc = c1 * c1 - 4.0 * c0 * c2;
        if disc.abs() < 1e-9 * scale * scale {
            return None; // near-double root; escalate
        }
        if disc > 0.0 {
            let s = disc.sqrt();
            roots.push((-c1 - s) / (2.0 * c2));
            roots.push((-c1 + s) / (2.0 * c2));
        }
    }
    let mut cuts: Vec<f64> = roots.into_iter().filter(|&r| r < -1.0 + 1e-9).collect();
    cuts.sort_by(|a, b| b.partial_cmp(a).unwrap());
    if cuts.iter().any(|&r| (r + 1.0).abs() < 1e-4) {
        return None; // root too close to the ray boundary
    }
    if cuts.windows(2).any(|w| (w[0] - w[1]).abs() < 1e-3) {
        return None; // cells too narrow for sampled separation
    }
    // sample points: each root and each cell midpoint
    let mut samples: Vec<(f64, bool)> = Vec::new();
    let mut upper = -1.0;
    for &r in &cuts {
        samples.push(((upper + r) / 2.0, false));
        samples.push((r, true));
        upper = r;
    }
    samples.push((upper - 1.0, false));
    let mut found = false;
    for (w, at_root) in samples {
        match inertia_f64(d, set, w) {
            None if at_root => {
                // exactly one zero eigenvalue is expected at a simple root;
                // count it as zero if the rest are clear
                let ev = jacobi_eigenvalues(gram_f64(d, set, w), members.len());
                let mut pos = 0;
                let mut neg = 0;
                let mut banded = 0;
                for e in ev {
                    if e > BAND {
                        pos += 1;
                    } else if e < -BAND {
                        neg += 1;
                    } else {
                        banded += 1;
                    }
                }
                if banded > 1 {
                    return None;
                }
                let sig = Signature::new(pos, neg, members.len() - pos - neg);
                if sig == target {
                    found = true;
                }
            }
            None => return None,
            Some(sig) => {
                if sig == target {
                    found = true;
                }
            }
        }
    }
    Some(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::Diagram;

    #[test]
    fn jacobi_matches_exact_small() {
        let d = Diagram::parse_inline("D{0-1:3, 1-2:7}").unwrap();
        let sig = inertia_f64(&d, d.full_set(), 0.0).unwrap();
        assert_eq!(sig, Signature::new(2, 1, 0));
        // parabolic triangle: zero eigenvalue -> band -> None
        let p = Diagram::parse_inline("D{0-1:3, 1-2:3, 0-2:3}").unwrap();
        assert!(inertia_f64(&p, p.full_set(), 0.0).is_none());
    }
}
