//! The Lagrange polynomial `λ_P(x) = Σ_{(i,j,k)∈P} x_i x_j x_k` and its
//! maximum over the standard simplex.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::palette::Palette;
use crate::weights::{project_to_simplex, WeightVector};

/// Guard on grid and composition enumerations.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

/// `λ_P` with patterns merged into monomials. `P` and `reverse(P)` give
/// the same polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangePolynomial {
    vars: usize,
    terms: Vec<([u32; 3], f64)>,
}

impl LagrangePolynomial {
    pub fn new(p: &Palette) -> Self {
        let mut terms: BTreeMap<[u32; 3], f64> = BTreeMap::new();
        for pat in p.patterns() {
            let mut m = *pat;
            m.sort_unstable();
            *terms.entry(m).or_default() += 1.0;
        }
        LagrangePolynomial {
            vars: p.color_count(),
            terms: terms.into_iter().collect(),
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.vars {
            return Err(Error::DimensionMismatch {
                expected: self.vars,
                got: len,
            });
        }
        Ok(())
    }

    /// Evaluates at any point of `R^c`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|&([i, j, k], a)| a * x[i as usize] * x[j as usize] * x[k as usize])
            .sum()
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.vars];
        for &([i, j, k], a) in &self.terms {
            let (xi, xj, xk) = (x[i as usize], x[j as usize], x[k as usize]);
            g[i as usize] += a * xj * xk;
            g[j as usize] += a * xi * xk;
            g[k as usize] += a * xi * xj;
        }
        g
    }
}

pub fn lambda_eval(p: &Palette, x: &WeightVector) -> Result<f64> {
    let poly = LagrangePolynomial::new(p);
    poly.check(x.len())?;
    Ok(poly.eval(x.as_slice()))
}

pub fn lambda_grad(p: &Palette, x: &WeightVector) -> Result<Vec<f64>> {
    let poly = LagrangePolynomial::new(p);
    poly.check(x.len())?;
    Ok(poly.grad(x.as_slice()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AscentOptions {
    /// Number of random Dirichlet starts on top of the vertices and barycenter.
    pub restarts: usize,
    pub iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        AscentOptions {
            restarts: 16,
            iters: 5000,
            tol: 1e-9,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagrangianResult {
    pub value: f64,
    pub argmax: WeightVector,
    pub restarts_used: usize,
    pub converged: bool,
}

struct Ascent {
    x: Vec<f64>,
    value: f64,
    converged: bool,
}

fn residual(poly: &LagrangePolynomial, x: &[f64]) -> f64 {
    let g = poly.grad(x);
    let y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + b).collect();
    let p = project_to_simplex(&y);
    p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

fn ascend(poly: &LagrangePolynomial, start: Vec<f64>, iters: usize, tol: f64) -> Ascent {
    let mut x = start;
    let mut fx = poly.eval(&x);
    let mut step: f64 = 1.0;
    let mut converged = false;
    for _ in 0..iters {
        if residual(poly, &x) < tol {
            converged = true;
            break;
        }
        let g = poly.grad(&x);
        let mut moved = false;
        step = (step * 2.0).min(1e6);
        for _ in 0..60 {
            let y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + step * b).collect();
            let xn = project_to_simplex(&y);
            let decrease: f64 = xn.iter().zip(&x).zip(&g).map(|((a, b), gi)| gi * (a - b)).sum();
            let fn_ = poly.eval(&xn);
            if fn_ >= fx + 1e-4 * decrease && decrease > 0.0 {
                x = xn;
                fx = fn_;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            // no representable ascent step left
            converged = residual(poly, &x) < tol.max(STAGNATION_RESIDUAL);
            break;
        }
    }
    if !converged {
        converged = residual(poly, &x) < tol;
    }
    Ascent {
        value: poly.eval(&x),
        x,
        converged,
    }
}

const STAGNATION_RESIDUAL: f64 = 1e-6;

fn rounded(x: &[f64]) -> Vec<i64> {
    x.iter().map(|v| (v * 1e9).round() as i64).collect()
}

/// Start points: simplex vertices, barycenter, then `restarts` Dirichlet(1) draws.
fn starts(c: usize, restarts: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = (0..c)
        .map(|i| {
            let mut v = vec![0.0; c];
            v[i] = 1.0;
            v
        })
        .collect();
    out.push(vec![1.0 / c as f64; c]);
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64 + 1);
        let raw: Vec<f64> = (0..c).map(|_| Exp1.sample(&mut rng)).collect();
        let s: f64 = raw.iter().sum();
        out.push(raw.iter().map(|v| v / s).collect());
    }
    out
}

fn pick_best(results: Vec<Ascent>) -> Ascent {
    results
        .into_iter()
        .reduce(|best, r| {
            let tie = (r.value - best.value).abs() <= 1e-12;
            let better = r.value > best.value + 1e-12
                || tie && (r.converged, std::cmp::Reverse(rounded(&r.x))) > (best.converged, std::cmp::Reverse(rounded(&best.x)));
            if better {
                r
            } else {
                best
            }
        })
        .expect("at least one start")
}

/// Multi-start projected gradient ascent. The value is a lower bound on `Λ_P`.
pub fn maximize_lagrangian(p: &Palette, opts: &AscentOptions) -> Result<LagrangianResult> {
    maximize_with_starts(p, opts, &[])
}

/// As [`maximize_lagrangian`] with additional caller-supplied start points.
pub fn maximize_with_starts(p: &Palette, opts: &AscentOptions, extra: &[Vec<f64>]) -> Result<LagrangianResult> {
    if opts.restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    let c = p.color_count();
    if c == 0 {
        return Err(Error::Degenerate("palette has no colors".into()));
    }
    let poly = LagrangePolynomial::new(p);
    let mut all = starts(c, opts.restarts, opts.seed);
    for e in extra {
        poly.check(e.len())?;
        all.push(project_to_simplex(e));
    }
    let count = all.len();
    let results: Vec<Ascent> = all
        .into_par_iter()
        .map(|s| ascend(&poly, s, opts.iters, opts.tol))
        .collect();
    let best = pick_best(results);
    let argmax = WeightVector::normalized(&best.x)?;
    Ok(LagrangianResult {
        value: poly.eval(argmax.as_slice()),
        argmax,
        restarts_used: count,
        converged: best.converged,
    })
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Number of weak compositions of `m` into `c` parts.
pub fn composition_count(m: usize, c: usize) -> u128 {
    if c == 0 {
        return u128::from(m == 0);
    }
    binomial((m + c - 1) as u128, (c - 1) as u128)
}

/// Calls `f` on every weak composition of `m` into `parts.len()` parts, in
/// lexicographic order.
pub fn for_each_composition(m: usize, parts: &mut [usize], f: &mut dyn FnMut(&[usize])) {
    fn rec(i: usize, left: usize, parts: &mut [usize], f: &mut dyn FnMut(&[usize])) {
        if i + 1 == parts.len() {
            parts[i] = left;
            f(parts);
            return;
        }
        for v in 0..=left {
            parts[i] = v;
            rec(i + 1, left - v, parts, f);
        }
    }
    if parts.is_empty() {
        if m == 0 {
            f(parts);
        }
        return;
    }
    rec(0, m, parts, f);
}

fn guard(m: usize, c: usize) -> Result<()> {
    let count = composition_count(m, c);
    if count > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            count,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub value: f64,
    pub argmax: Vec<f64>,
}

/// Maximum of `λ_P` over simplex points with denominator `m`.
pub fn grid_oracle(p: &Palette, m: usize) -> Result<GridResult> {
    let c = p.color_count();
    if c == 0 || m == 0 {
        return Err(Error::Degenerate("grid needs colors and a positive resolution".into()));
    }
    guard(m, c)?;
    let poly = LagrangePolynomial::new(p);
    let mut best = (f64::NEG_INFINITY, Vec::new());
    let mut x = vec![0.0; c];
    for_each_composition(m, &mut vec![0; c], &mut |comp| {
        for (xi, &k) in x.iter_mut().zip(comp) {
            *xi = k as f64 / m as f64;
        }
        let v = poly.eval(&x);
        if v > best.0 + 1e-15 {
            best = (v, x.clone());
        }
    });
    Ok(GridResult {
        value: best.0,
        argmax: best.1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reducedness {
    Reduced,
    NotReduced,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducednessReport {
    pub verdict: Reducedness,
    pub lambda: f64,
    /// `Λ_P − Λ_{P∖{p}}` for each pattern `p`, in pattern order.
    pub margins: Vec<f64>,
    pub tol: f64,
}

/// Every single-pattern deletion lowers `Λ` by more than `tol`: reduced.
/// Some deletion lowers it by at most `tol * 1e-3`: not reduced. Otherwise
/// inconclusive.
pub fn is_reduced(p: &Palette, tol: f64, opts: &AscentOptions) -> Result<ReducednessReport> {
    if p.is_empty() {
        return Err(Error::Degenerate("reducedness needs at least one pattern".into()));
    }
    let full = maximize_lagrangian(p, opts)?;
    let warm = [full.argmax.as_slice().to_vec()];
    let margins = p
        .patterns()
        .par_iter()
        .map(|pat| {
            let q = Palette::new(p.color_count(), p.patterns().iter().copied().filter(|x| x != pat))?;
            let sub = maximize_with_starts(&q, opts, &warm)?;
            Ok(full.value - sub.value)
        })
        .collect::<Result<Vec<f64>>>()?;
    let min = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let verdict = if min > tol {
        Reducedness::Reduced
    } else if min <= tol * 1e-3 {
        Reducedness::NotReduced
    } else {
        Reducedness::Inconclusive
    };
    Ok(ReducednessReport {
        verdict,
        lambda: full.value,
        margins,
        tol,
    })
}

/// `min_i |V_i| / n` for part sizes summing to `n`.
pub fn min_part_fraction(sizes: &[usize]) -> Result<f64> {
    let n: usize = sizes.iter().sum();
    if sizes.is_empty() || n == 0 {
        return Err(Error::EmptySet("partition has no elements".into()));
    }
    Ok(*sizes.iter().min().expect("nonempty") as f64 / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupDensity {
    pub sizes: Vec<usize>,
    pub patterns: u64,
    pub density: f64,
}

/// Number of patterns of the blow-up of `P` with the given class sizes.
pub fn blowup_pattern_count(p: &Palette, sizes: &[usize]) -> u64 {
    p.patterns()
        .iter()
        .map(|&[i, j, k]| (sizes[i as usize] * sizes[j as usize] * sizes[k as usize]) as u64)
        .sum()
}

/// Densest blow-up of `P` on exactly `n` colors (first maximizer in
/// lexicographic order of sizes).
pub fn max_blowup_density(p: &Palette, n: usize) -> Result<BlowupDensity> {
    let c = p.color_count();
    if c == 0 || n == 0 {
        return Err(Error::Degenerate("blow-up needs colors".into()));
    }
    guard(n, c)?;
    let mut best: Option<(u64, Vec<usize>)> = None;
    for_each_composition(n, &mut vec![0; c], &mut |s| {
        let e = blowup_pattern_count(p, s);
        if best.as_ref().is_none_or(|(b, _)| e > *b) {
            best = Some((e, s.to_vec()));
        }
    });
    let (patterns, sizes) = best.expect("at least one composition");
    Ok(BlowupDensity {
        density: patterns as f64 / (n as f64).powi(3),
        sizes,
        patterns,
    })
}

/// Push-forward of a weighting along a color map: `y_j = Σ_{ψ(i)=j} x_i`.
pub fn pushforward(x: &[f64], map: &[u32], target_colors: usize) -> Result<Vec<f64>> {
    if x.len() != map.len() {
        return Err(Error::DimensionMismatch {
            expected: map.len(),
            got: x.len(),
        });
    }
    let mut y = vec![0.0; target_colors];
    for (&xi, &j) in x.iter().zip(map) {
        *y.get_mut(j as usize).ok_or(Error::ColorOutOfRange {
            color: j,
            color_count: target_colors,
        })? += xi;
    }
    Ok(y)
}
