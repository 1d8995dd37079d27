use super::{corner_across, ConeSurface};
use std::collections::VecDeque;

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [1, 2, 0], [2, 0, 1], [0, 2, 1], [2, 1, 0], [1, 0, 2]];

/// A gluing-preserving bijection of faces with corner correspondences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automorphism {
    pub face_map: Vec<usize>,
    /// `corner_map[f][c]` is the corner of `face_map[f]` that corner `c` goes to.
    pub corner_map: Vec<[usize; 3]>,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SymmetryReport {
    pub order: usize,
    pub expected: usize,
    pub passed: bool,
    pub orientation_reversing: usize,
}

fn slot_between(a: usize, b: usize) -> usize {
    if b == (a + 1) % 3 {
        a
    } else {
        b
    }
}

/// Propagates the map sending face `f0` of `a` to face `g0` of `b` with the
/// given corner permutation, if it extends to an isometric isomorphism.
fn extend(a: &ConeSurface, b: &ConeSurface, f0: usize, g0: usize, perm: [usize; 3], tol: f64) -> Option<Automorphism> {
    let n = a.num_faces();
    let mut face_map = vec![usize::MAX; n];
    let mut corner_map = vec![[0usize; 3]; n];
    let mut used = vec![false; b.num_faces()];
    face_map[f0] = g0;
    corner_map[f0] = perm;
    used[g0] = true;
    let mut queue = VecDeque::from([f0]);
    while let Some(f) = queue.pop_front() {
        let g = face_map[f];
        let pm = corner_map[f];
        for k in 0..3 {
            let (ca, cb) = (k, (k + 1) % 3);
            let l = slot_between(pm[ca], pm[cb]);
            if (a.lengths()[f][k] - b.lengths()[g][l]).abs() > tol {
                return None;
            }
            match (a.partner(f, k), b.partner(g, l)) {
                (None, None) => {}
                (Some((f2, k2, r)), Some((g2, l2, r2))) => {
                    let (fa, fb) = (corner_across(ca, k, k2, r), corner_across(cb, k, k2, r));
                    let (ga, gb) = (corner_across(pm[ca], l, l2, r2), corner_across(pm[cb], l, l2, r2));
                    let fc = 3 - fa - fb;
                    let gc = 3 - ga - gb;
                    let mut m = [0usize; 3];
                    m[fa] = ga;
                    m[fb] = gb;
                    m[fc] = gc;
                    if face_map[f2] == usize::MAX {
                        if used[g2] {
                            return None;
                        }
                        face_map[f2] = g2;
                        corner_map[f2] = m;
                        used[g2] = true;
                        queue.push_back(f2);
                    } else if face_map[f2] != g2 || corner_map[f2] != m {
                        return None;
                    }
                }
                _ => return None,
            }
        }
    }
    if face_map.iter().any(|&x| x == usize::MAX) {
        return None;
    }
    Some(Automorphism { face_map, corner_map })
}

/// All isometric automorphisms of a connected triangulated surface.
pub fn automorphisms(s: &ConeSurface, tol: f64) -> Vec<Automorphism> {
    let mut out = Vec::new();
    if s.num_faces() == 0 {
        return out;
    }
    for g in 0..s.num_faces() {
        for perm in PERMS {
            if let Some(m) = extend(s, s, 0, g, perm, tol) {
                out.push(m);
            }
        }
    }
    out
}

/// An isometric isomorphism between two connected surfaces, if any.
pub fn find_isomorphism(a: &ConeSurface, b: &ConeSurface, tol: f64) -> Option<Automorphism> {
    if a.num_faces() != b.num_faces() || a.gluings().len() != b.gluings().len() || a.num_faces() == 0 {
        return None;
    }
    for g in 0..b.num_faces() {
        for perm in PERMS {
            if let Some(m) = extend(a, b, 0, g, perm, tol) {
                return Some(m);
            }
        }
    }
    None
}

fn is_odd(p: [usize; 3]) -> bool {
    matches!(p, [0, 2, 1] | [2, 1, 0] | [1, 0, 2])
}

/// Counts the isometric mesh automorphisms and compares with the order of
/// `D₃ × Z/2`.
pub fn check_symmetry(s: &ConeSurface) -> SymmetryReport {
    let autos = automorphisms(s, 1e-9);
    let orientation_reversing = if s.is_orientable() {
        autos.iter().filter(|m| is_odd(m.corner_map[0])).count()
    } else {
        0
    };
    SymmetryReport { order: autos.len(), expected: 12, passed: autos.len() == 12, orientation_reversing }
}
