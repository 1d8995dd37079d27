use super::{gudermann, CapacityError, CapacityEstimate, CollarProfile, EstimateKind};
use crate::surface::{strip_annulus, ConeSurface};
use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};

type V2 = [f64; 2];

/// Triangles with local coordinates, shared nodes and Dirichlet values.
struct FemMesh {
    nodes: usize,
    faces: Vec<([usize; 3], [V2; 3])>,
    fixed: Vec<Option<f64>>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let n = self.0[y];
            self.0[y] = r;
            y = n;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

fn check_annulus(s: &ConeSurface) -> Result<(), CapacityError> {
    let (chi, comps) = (s.euler_characteristic(), s.boundary_components());
    if chi != 0 || comps != 2 || !s.is_orientable() {
        return Err(CapacityError::NotAnnulus(format!(
            "{}: χ = {chi}, {comps} boundary components, orientable = {}",
            s.name(),
            s.is_orientable()
        )));
    }
    Ok(())
}

/// Nodes are the vertices of `s`; the boundary component met first gets 0,
/// the other 1.
fn mesh_of(s: &ConeSurface) -> Result<FemMesh, CapacityError> {
    check_annulus(s)?;
    let nodes = s.vertices().len();
    let mut uf = UnionFind((0..nodes).collect());
    let slots = s.boundary_slots();
    for &(f, k) in &slots {
        uf.union(s.corner_vertex(f, k), s.corner_vertex(f, (k + 1) % 3));
    }
    let first = uf.find(s.corner_vertex(slots[0].0, slots[0].1));
    let fixed = (0..nodes)
        .map(|v| s.vertices()[v].boundary.then(|| if uf.find(v) == first { 0.0 } else { 1.0 }))
        .collect();
    let faces = (0..s.num_faces())
        .map(|f| ([0, 1, 2].map(|c| s.corner_vertex(f, c)), s.face_corners(f)))
        .collect();
    Ok(FemMesh { nodes, faces, fixed })
}

struct Csr {
    start: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
}

impl Csr {
    fn mul(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            *yi = (self.start[i]..self.start[i + 1]).map(|k| self.val[k] * x[self.col[k]]).sum();
        });
    }
}

const CHUNK: usize = 4096;

/// Sum over fixed chunks combined in order, so results do not depend on
/// thread scheduling.
fn ordered_sum<T: Sync>(items: &[T], f: impl Fn(usize, &T) -> f64 + Sync) -> f64 {
    let partial: Vec<f64> = items
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(c, chunk)| chunk.iter().enumerate().map(|(i, x)| f(c * CHUNK + i, x)).sum())
        .collect();
    partial.iter().sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    ordered_sum(a, |i, x| x * b[i])
}

/// Half-cotangent weights of the three edges of a triangle, edge `c`
/// joining corners `c + 1` and `c + 2`.
fn cot_weights(p: &[V2; 3]) -> [f64; 3] {
    [0, 1, 2].map(|c| {
        let (o, a, b) = (p[c], p[(c + 1) % 3], p[(c + 2) % 3]);
        let (u, v) = ([a[0] - o[0], a[1] - o[1]], [b[0] - o[0], b[1] - o[1]]);
        0.5 * (u[0] * v[0] + u[1] * v[1]) / (u[0] * v[1] - u[1] * v[0]).abs()
    })
}

struct Solution {
    energy: f64,
    residual_energy: f64,
    iterations: usize,
    unknowns: usize,
}

/// Discrete harmonic function with the fixed values, by Jacobi-preconditioned
/// conjugate gradients to relative residual `tol`, and its Dirichlet energy.
fn solve(m: &FemMesh, tol: f64) -> Result<Solution, CapacityError> {
    let mut index = vec![usize::MAX; m.nodes];
    let mut unknowns = 0;
    for v in 0..m.nodes {
        if m.fixed[v].is_none() {
            index[v] = unknowns;
            unknowns += 1;
        }
    }
    let mut triplets = Vec::with_capacity(9 * m.faces.len());
    let mut rhs = vec![0.0; unknowns];
    let mut edges = Vec::with_capacity(3 * m.faces.len());
    for (ids, p) in &m.faces {
        let w = cot_weights(p);
        for c in 0..3 {
            let (i, j) = (ids[(c + 1) % 3], ids[(c + 2) % 3]);
            edges.push((i, j, w[c]));
            for (x, y) in [(i, j), (j, i)] {
                if index[x] == usize::MAX {
                    continue;
                }
                triplets.push((index[x], index[x], w[c]));
                match m.fixed[y] {
                    Some(g) => rhs[index[x]] += w[c] * g,
                    None => triplets.push((index[x], index[y], -w[c])),
                }
            }
        }
    }
    triplets.par_sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut a = Csr { start: vec![0; unknowns + 1], col: Vec::new(), val: Vec::new() };
    let mut last = (usize::MAX, usize::MAX);
    for (r, c, v) in triplets {
        if (r, c) == last {
            *a.val.last_mut().unwrap() += v;
        } else {
            a.col.push(c);
            a.val.push(v);
            a.start[r + 1] += 1;
            last = (r, c);
        }
    }
    for r in 0..unknowns {
        a.start[r + 1] += a.start[r];
    }
    let diag: Vec<f64> = (0..unknowns)
        .map(|i| (a.start[i]..a.start[i + 1]).find(|&k| a.col[k] == i).map_or(0.0, |k| a.val[k]))
        .collect();
    if diag.iter().any(|&d| !(d > 0.0)) {
        return Err(CapacityError::Solve("nonpositive diagonal".into()));
    }

    let mut x = vec![0.0; unknowns];
    let mut r = rhs.clone();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; unknowns];
    let mut rz = dot(&r, &z);
    let bnorm = dot(&rhs, &rhs).sqrt();
    let max_iter = 20 * unknowns + 100;
    let mut iterations = 0;
    while dot(&r, &r).sqrt() > tol * bnorm {
        if iterations >= max_iter {
            return Err(CapacityError::Solve(format!("no convergence in {max_iter} iterations")));
        }
        a.mul(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(CapacityError::Solve("matrix is not positive definite".into()));
        }
        let alpha = rz / pap;
        x.par_iter_mut().zip(&p).for_each(|(x, p)| *x += alpha * p);
        r.par_iter_mut().zip(&ap).for_each(|(r, ap)| *r -= alpha * ap);
        z.par_iter_mut().zip(&r).zip(&diag).for_each(|((z, r), d)| *z = r / d);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.par_iter_mut().zip(&z).for_each(|(p, z)| *p = z + beta * *p);
        iterations += 1;
    }
    let value = |v: usize| m.fixed[v].unwrap_or_else(|| x[index[v]]);
    let energy = ordered_sum(&edges, |_, &(i, j, w)| w * (value(i) - value(j)).powi(2));
    a.mul(&x, &mut ap);
    let residual_energy = x.iter().zip(rhs.iter().zip(&ap)).map(|(x, (b, ax))| x * (b - ax)).sum::<f64>().abs();
    Ok(Solution { energy, residual_energy, iterations, unknowns })
}

fn estimate(s: Solution, what: String) -> CapacityEstimate {
    CapacityEstimate {
        kind: EstimateKind::FemRayleigh,
        value: s.energy,
        error_estimate: s.residual_energy,
        method: format!("P1 cotangent FEM, {what}, {} unknowns, {} CG iterations", s.unknowns, s.iterations),
        cross_check: None,
    }
}

fn check_args(mesh_h: f64, tol: f64) -> Result<(), CapacityError> {
    if !(mesh_h > 0.0 && mesh_h.is_finite()) {
        return Err(CapacityError::BadInput(format!("mesh size {mesh_h}")));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(CapacityError::BadInput(format!("solver tolerance {tol}")));
    }
    Ok(())
}

fn longest_edge(s: &ConeSurface) -> f64 {
    s.lengths().iter().flatten().cloned().fold(0.0, f64::max)
}

/// Dirichlet energy of the discrete harmonic function equal to 0 on one
/// boundary circle and 1 on the other, after refining until every edge is
/// at most `mesh_h`.
pub fn fem_capacity(s: &ConeSurface, mesh_h: f64, tol: f64) -> Result<CapacityEstimate, CapacityError> {
    check_args(mesh_h, tol)?;
    check_annulus(s)?;
    let n = (longest_edge(s) / mesh_h).ceil().max(1.0) as usize;
    let refined = s.subdivide(n);
    let sol = solve(&mesh_of(&refined)?, tol)?;
    Ok(estimate(sol, format!("{} refined ×{n}", s.name())))
}

/// Capacities on nested refinements `×n, ×2n, …` with `n` set by `mesh_h`.
pub fn fem_refinement(s: &ConeSurface, mesh_h: f64, levels: usize, tol: f64) -> Result<Vec<CapacityEstimate>, CapacityError> {
    check_args(mesh_h, tol)?;
    check_annulus(s)?;
    let n0 = (longest_edge(s) / mesh_h).ceil().max(1.0) as usize;
    (0..levels)
        .map(|k| {
            let n = n0 << k;
            let sol = solve(&mesh_of(&s.subdivide(n))?, tol)?;
            Ok(estimate(sol, format!("{} refined ×{n}", s.name())))
        })
        .collect()
}

/// Round annulus `r0 < |z| < r1` on a log-polar grid whose spacing on the
/// outer circle is at most `mesh_h`.
pub fn fem_round_annulus(r0: f64, r1: f64, mesh_h: f64, tol: f64) -> Result<CapacityEstimate, CapacityError> {
    check_args(mesh_h, tol)?;
    if !(r0 > 0.0 && r1 > r0 && r1.is_finite()) {
        return Err(CapacityError::BadInput(format!("radii {r0}, {r1}")));
    }
    let nt = (2.0 * PI * r1 / mesh_h).ceil() as usize;
    let nr = ((r1 / r0).ln() * nt as f64 / (2.0 * PI)).ceil().max(1.0) as usize;
    let id = |i: usize, j: usize| i * nt + j % nt;
    let pt = |i: usize, j: usize| {
        let r = r0 * (r1 / r0).powf(i as f64 / nr as f64);
        let a = 2.0 * PI * j as f64 / nt as f64;
        [r * a.cos(), r * a.sin()]
    };
    let mut faces = Vec::with_capacity(2 * nr * nt);
    for i in 0..nr {
        for j in 0..nt {
            for t in [[(i, j), (i, j + 1), (i + 1, j + 1)], [(i, j), (i + 1, j + 1), (i + 1, j)]] {
                faces.push((t.map(|(a, b)| id(a, b)), t.map(|(a, b)| pt(a, b))));
            }
        }
    }
    let nodes = (nr + 1) * nt;
    let fixed = (0..nodes)
        .map(|v| match v / nt {
            0 => Some(0.0),
            i if i == nr => Some(1.0),
            _ => None,
        })
        .collect();
    let sol = solve(&FemMesh { nodes, faces, fixed }, tol)?;
    Ok(estimate(sol, format!("round annulus {r0} < r < {r1}, {nr}×{nt} log-polar grid")))
}

/// Capacity of a Fermi collar through the conformal chart
/// `σ = H(s) − π/2`, where the collar becomes the flat strip
/// `H(b(t)) − π/2 < σ < H(a(t)) − π/2` over the circle of length `ℓ`.
pub fn fem_hyperbolic(p: &CollarProfile, mesh_h: f64, tol: f64) -> Result<CapacityEstimate, CapacityError> {
    check_args(mesh_h, tol)?;
    let step = mesh_h / 2f64.sqrt();
    let nt = (p.ell / step).ceil() as usize;
    let widest = p
        .sample(nt)?
        .iter()
        .map(|x| gudermann(x.a) - gudermann(x.b))
        .fold(0.0, f64::max);
    let ny = (widest / step).ceil().max(1.0) as usize;
    let lower = |t: f64| p.eval(t).map_or(f64::NAN, |(_, b)| gudermann(b) - FRAC_PI_2);
    let upper = |t: f64| p.eval(t).map_or(f64::NAN, |(a, _)| gudermann(a) - FRAC_PI_2);
    let s = strip_annulus(p.ell, nt, ny, lower, upper).map_err(|e| CapacityError::Surface(e.to_string()))?;
    let sol = solve(&mesh_of(&s)?, tol)?;
    Ok(estimate(sol, format!("Fermi strip chart {nt}×{ny}")))
}
