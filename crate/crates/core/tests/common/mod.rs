//! Brute-force reference implementations. Everything here works from the
//! raw pmf rows or the raw adjacency matrix and shares no code with the
//! library beyond its input types.
#![allow(dead_code)]

use backbone_core::{AggregatorKind, JointDistribution, WeightedGraph};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct Pmf {
    pub sizes: Vec<u32>,
    pub rows: Vec<(Vec<u32>, f64)>,
}

impl Pmf {
    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn to_dist(&self) -> JointDistribution {
        JointDistribution::unnamed(self.sizes.clone(), self.rows.iter().cloned()).unwrap()
    }

    pub fn states(&self) -> impl Iterator<Item = &[u32]> {
        self.rows.iter().map(|(s, _)| s.as_slice())
    }

    pub fn prob(&self, state: &[u32]) -> f64 {
        self.rows.iter().filter(|(s, _)| s == state).map(|r| r.1).sum()
    }

    /// P(X_keep = state_keep).
    pub fn marginal(&self, state: &[u32], keep: &[usize]) -> f64 {
        self.rows
            .iter()
            .filter(|(s, _)| keep.iter().all(|&i| s[i] == state[i]))
            .map(|r| r.1)
            .sum()
    }

    pub fn local_h(&self, state: &[u32], keep: &[usize]) -> f64 {
        if keep.is_empty() {
            0.0
        } else {
            -self.marginal(state, keep).log2()
        }
    }

    pub fn entropy(&self) -> f64 {
        self.rows.iter().map(|(_, p)| -p * p.log2()).sum()
    }

    pub fn marginal_pmf(&self, keep: &[usize]) -> Pmf {
        let mut rows: Vec<(Vec<u32>, f64)> = Vec::new();
        for (s, p) in &self.rows {
            let sub: Vec<u32> = keep.iter().map(|&i| s[i]).collect();
            match rows.iter_mut().find(|(r, _)| *r == sub) {
                Some(r) => r.1 += p,
                None => rows.push((sub, *p)),
            }
        }
        Pmf {
            sizes: keep.iter().map(|&i| self.sizes[i]).collect(),
            rows,
        }
    }

    pub fn negentropy(&self) -> f64 {
        self.sizes.iter().map(|&a| (a as f64).log2()).sum::<f64>() - self.entropy()
    }

    pub fn total_correlation(&self) -> f64 {
        (0..self.k()).map(|i| self.marginal_pmf(&[i]).entropy()).sum::<f64>() - self.entropy()
    }

    pub fn kl(&self, prior: &Pmf) -> f64 {
        self.rows.iter().map(|(s, p)| p * (p / prior.prob(s)).log2()).sum()
    }

    /// I(X_rest ; X_target) from the definition Σ p log p / (p_x p_y).
    pub fn mutual_information(&self, target: usize) -> f64 {
        let rest: Vec<usize> = (0..self.k()).filter(|&i| i != target).collect();
        self.rows
            .iter()
            .map(|(s, p)| p * (p / (self.marginal(s, &rest) * self.marginal(s, &[target]))).log2())
            .sum()
    }
}

/// Random pmf with alphabets in `2..=max_alphabet` and a random support of
/// at most `max_support` states.
pub fn random_pmf(rng: &mut ChaCha8Rng, k: usize, max_alphabet: u32, max_support: usize) -> Pmf {
    let sizes: Vec<u32> = (0..k).map(|_| rng.random_range(2..=max_alphabet)).collect();
    let space: usize = sizes.iter().map(|&a| a as usize).product();
    let n = rng.random_range(1..=max_support.min(space));
    let mut chosen = std::collections::BTreeSet::new();
    while chosen.len() < n {
        chosen.insert(rng.random_range(0..space));
    }
    let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let z: f64 = weights.iter().sum();
    let rows = chosen
        .into_iter()
        .zip(weights)
        .map(|(code, w)| (decode(code, &sizes), w / z))
        .collect();
    Pmf { sizes, rows }
}

/// Full-support pmf on the given alphabets.
pub fn random_full_pmf(rng: &mut ChaCha8Rng, sizes: &[u32]) -> Pmf {
    let space: usize = sizes.iter().map(|&a| a as usize).product();
    let weights: Vec<f64> = (0..space).map(|_| rng.random_range(0.05..1.0)).collect();
    let z: f64 = weights.iter().sum();
    Pmf {
        sizes: sizes.to_vec(),
        rows: (0..space).map(|c| (decode(c, sizes), weights[c] / z)).collect(),
    }
}

fn decode(mut code: usize, sizes: &[u32]) -> Vec<u32> {
    let mut s = vec![0; sizes.len()];
    for i in (0..sizes.len()).rev() {
        s[i] = (code % sizes[i] as usize) as u32;
        code /= sizes[i] as usize;
    }
    s
}

pub fn combinations(k: usize, a: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, k: usize, a: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == a {
            out.push(cur.clone());
            return;
        }
        for i in start..k {
            cur.push(i);
            go(i + 1, k, a, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, k, a, &mut Vec::new(), &mut out);
    out
}

pub fn complement(k: usize, failed: &[usize]) -> Vec<usize> {
    (0..k).filter(|i| !failed.contains(i)).collect()
}

/// α-synergy for α = 1..=k of `loss(failed)`.
pub fn synergy(k: usize, agg: AggregatorKind, loss: impl Fn(&[usize]) -> f64) -> Vec<f64> {
    (1..=k)
        .map(|a| {
            let vals: Vec<f64> = combinations(k, a).iter().map(|c| loss(c)).collect();
            match agg {
                AggregatorKind::Min => vals.iter().copied().fold(f64::INFINITY, f64::min),
                AggregatorKind::Max => vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                AggregatorKind::Mean => vals.iter().sum::<f64>() / vals.len() as f64,
            }
        })
        .collect()
}

pub fn atoms(syn: &[f64]) -> Vec<f64> {
    let mut prev = 0.0;
    syn.iter()
        .map(|&s| {
            let d = s - prev;
            prev = s;
            d
        })
        .collect()
}

/// Local entropy synergy of `state` under the pmf.
pub fn local_entropy_synergy(pmf: &Pmf, state: &[u32], agg: AggregatorKind) -> Vec<f64> {
    let k = pmf.k();
    let full: Vec<usize> = (0..k).collect();
    let h = pmf.local_h(state, &full);
    synergy(k, agg, |failed| h - pmf.local_h(state, &complement(k, failed)))
}

/// Local entropy synergy under a product reference whose per-variable
/// local entropies are `h_i`.
pub fn product_synergy(h: &[f64], agg: AggregatorKind) -> Vec<f64> {
    synergy(h.len(), agg, |failed| failed.iter().map(|&i| h[i]).sum())
}

/// Divergence atoms at one state: prior atoms minus posterior atoms.
pub fn local_divergence_atoms(prior_syn: &[f64], posterior_syn: &[f64]) -> Vec<f64> {
    atoms(prior_syn)
        .iter()
        .zip(atoms(posterior_syn))
        .map(|(q, p)| q - p)
        .collect()
}

pub fn uniform_local_h(pmf: &Pmf) -> Vec<f64> {
    pmf.sizes.iter().map(|&a| (a as f64).log2()).collect()
}

pub fn independent_local_h(pmf: &Pmf, state: &[u32]) -> Vec<f64> {
    (0..pmf.k()).map(|i| pmf.local_h(state, &[i])).collect()
}

/// Expected negentropy atoms computed state by state.
pub fn negentropy_atoms(pmf: &Pmf, agg: AggregatorKind) -> Vec<f64> {
    let q = product_synergy(&uniform_local_h(pmf), agg);
    let mut out = vec![0.0; pmf.k()];
    for (s, p) in &pmf.rows {
        let d = local_divergence_atoms(&q, &local_entropy_synergy(pmf, s, agg));
        for (o, v) in out.iter_mut().zip(d) {
            *o += p * v;
        }
    }
    out
}

/// `e^M` by its power series; exact enough for non-negative matrices,
/// where no cancellation occurs.
pub fn expm_series(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    let mut sum = vec![vec![0.0; n]; n];
    let mut term = vec![vec![0.0; n]; n];
    for i in 0..n {
        sum[i][i] = 1.0;
        term[i][i] = 1.0;
    }
    for j in 1..200 {
        let mut next = vec![vec![0.0; n]; n];
        for r in 0..n {
            for c in 0..n {
                next[r][c] = (0..n).map(|t| term[r][t] * m[t][c]).sum::<f64>() / j as f64;
            }
        }
        term = next;
        let mut biggest: f64 = 0.0;
        for r in 0..n {
            for c in 0..n {
                sum[r][c] += term[r][c];
                biggest = biggest.max(term[r][c].abs());
            }
        }
        if biggest < 1e-18 {
            break;
        }
    }
    sum
}

pub fn adjacency(g: &WeightedGraph, edges: &[usize]) -> Vec<Vec<f64>> {
    let n = g.num_nodes();
    let mut m = vec![vec![0.0; n]; n];
    for &i in edges {
        let e = g.edges()[i];
        m[e.u][e.v] = e.w;
        if !g.is_directed() {
            m[e.v][e.u] = e.w;
        }
    }
    m
}

/// Mean off-diagonal communicability keeping only the listed edges.
pub fn communicability(g: &WeightedGraph, edges: &[usize]) -> f64 {
    let n = g.num_nodes();
    if n < 2 {
        return 0.0;
    }
    let e = expm_series(&adjacency(g, edges));
    let mut off = 0.0;
    for (r, row) in e.iter().enumerate() {
        off += row.iter().enumerate().filter(|&(c, _)| c != r).map(|(_, x)| x).sum::<f64>();
    }
    off / (n * (n - 1)) as f64
}

pub fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}
