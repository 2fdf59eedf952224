//! Slow, direct reimplementations used as test oracles.

use catent_core::pregroup::{flatten, PregroupType, SimpleType};

/// Every valid reduction of `types` to `target`, found by exhaustive search
/// over sets of links: links must cancel, may not cross, may not cover a
/// surviving factor, and the survivors must spell the target.
pub fn brute_force_reductions(types: &[PregroupType], target: &PregroupType) -> Vec<Vec<(usize, usize)>> {
    let flat = flatten(types);
    let mut out = Vec::new();
    let mut used = vec![false; flat.len()];
    let mut links = Vec::new();
    search(&flat, target.factors(), 0, &mut used, &mut links, &mut out);
    out.sort();
    out.dedup();
    out
}

fn search(
    flat: &[SimpleType],
    target: &[SimpleType],
    start: usize,
    used: &mut Vec<bool>,
    links: &mut Vec<(usize, usize)>,
    out: &mut Vec<Vec<(usize, usize)>>,
) {
    let n = flat.len();
    let first_free = (start..n).find(|&i| !used[i]);
    match first_free {
        None => {
            if accept(flat, target, used, links) {
                let mut l = links.clone();
                l.sort();
                out.push(l);
            }
        }
        Some(i) => {
            // i survives
            search(flat, target, i + 1, used, links, out);
            // or i links to a later free j
            for j in i + 1..n {
                if used[j] {
                    continue;
                }
                let ok = flat[i].base == flat[j].base && flat[j].adjoint == flat[i].adjoint + 1;
                if !ok {
                    continue;
                }
                used[i] = true;
                used[j] = true;
                links.push((i, j));
                search(flat, target, i + 1, used, links, out);
                links.pop();
                used[i] = false;
                used[j] = false;
            }
        }
    }
}

fn accept(flat: &[SimpleType], target: &[SimpleType], used: &[bool], links: &[(usize, usize)]) -> bool {
    for (a, &(i, j)) in links.iter().enumerate() {
        for &(k, l) in &links[a + 1..] {
            let crossing = (i < k && k < j && j < l) || (k < i && i < l && l < j);
            if crossing {
                return false;
            }
        }
        if (i + 1..j).any(|p| !used[p]) {
            return false;
        }
    }
    let survivors: Vec<&SimpleType> = (0..flat.len()).filter(|&p| !used[p]).map(|p| &flat[p]).collect();
    survivors.len() == target.len() && survivors.iter().zip(target).all(|(a, b)| *a == b)
}

/// `1 − 6 Σ d² / (n (n² − 1))` on tie-free data.
pub fn spearman_rank_difference(xs: &[f64], ys: &[f64]) -> f64 {
    let rank = |v: &[f64]| -> Vec<f64> {
        (0..v.len())
            .map(|i| 1.0 + v.iter().filter(|&&x| x < v[i]).count() as f64)
            .collect()
    };
    let (rx, ry) = (rank(xs), rank(ys));
    let n = xs.len() as f64;
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b) * (a - b)).sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

/// Best informedness over every way of splitting the sorted scores.
pub fn brute_force_informedness(scores: &[f64], gold: &[bool]) -> f64 {
    let p = gold.iter().filter(|&&g| g).count() as f64;
    let q = gold.len() as f64 - p;
    let mut cuts: Vec<f64> = scores.to_vec();
    cuts.push(f64::NEG_INFINITY);
    let mut best = f64::NEG_INFINITY;
    for &c in &cuts {
        // predict positive exactly when score > c
        let mut tp = 0.0;
        let mut tn = 0.0;
        for (&s, &g) in scores.iter().zip(gold) {
            if s > c && g {
                tp += 1.0;
            }
            if s <= c && !g {
                tn += 1.0;
            }
        }
        best = best.max(tp / p + tn / q - 1.0);
    }
    best
}

/// `v ⊙ Σᵢ ⟨n | nᵢ⟩ nᵢ` by explicit loops.
pub fn phrase_vector(v: &[f64], args: &[Vec<f64>], n: &[f64]) -> Vec<f64> {
    let d = v.len();
    let mut acc = vec![0.0; d];
    for a in args {
        let mut w = 0.0;
        for k in 0..d {
            w += n[k] * a[k];
        }
        for k in 0..d {
            acc[k] += w * a[k];
        }
    }
    (0..d).map(|k| v[k] * acc[k]).collect()
}

/// `v n v / Tr(v n v)` by explicit loops, row-major.
pub fn sandwich(v: &[f64], n: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            let mut s = 0.0;
            for k in 0..d {
                for l in 0..d {
                    s += v[i * d + k] * n[k * d + l] * v[l * d + j];
                }
            }
            out[i * d + j] = s;
        }
    }
    let tr: f64 = (0..d).map(|i| out[i * d + i]).sum();
    out.into_iter().map(|x| x / tr).collect()
}

pub fn shannon(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum::<f64>()
}

/// `Σ p ln(p/q)`, `None` when some `p > 0` meets `q = 0`.
pub fn kl(p: &[f64], q: &[f64]) -> Option<f64> {
    let mut s = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b == 0.0 {
                return None;
            }
            s += a * (a / b).ln();
        }
    }
    Some(s)
}
