//! Dense covariant tensors on an N-dimensional orthonormal frame.

use nalgebra::DMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    dim: usize,
    rank: usize,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn zeros(dim: usize, rank: usize) -> Self {
        DenseTensor { dim, rank, data: vec![0.0; dim.pow(rank as u32)] }
    }

    pub fn from_fn(dim: usize, rank: usize, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut t = Self::zeros(dim, rank);
        let mut idx = vec![0; rank];
        for flat in 0..t.data.len() {
            t.unflatten(flat, &mut idx);
            t.data[flat] = f(&idx);
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    fn unflatten(&self, mut flat: usize, idx: &mut [usize]) {
        for slot in (0..self.rank).rev() {
            idx[slot] = flat % self.dim;
            flat /= self.dim;
        }
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.flat(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let f = self.flat(idx);
        self.data[f] = v;
    }

    pub fn add_at(&mut self, idx: &[usize], v: f64) {
        let f = self.flat(idx);
        self.data[f] += v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        DenseTensor { dim: self.dim, rank: self.rank, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        DenseTensor {
            dim: self.dim,
            rank: self.rank,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// Tensor with slots rearranged: `out[idx] = self[idx permuted by perm]`,
    /// where `perm[s]` names the source slot feeding output slot `s`.
    pub fn permute_slots(&self, perm: &[usize]) -> Self {
        let mut src = vec![0; self.rank];
        Self::from_fn(self.dim, self.rank, |idx| {
            for (s, &p) in perm.iter().enumerate() {
                src[p] = idx[s];
            }
            self.get(&src)
        })
    }

    /// Relabels frame indices: `out[i..] = self[perm[i]..]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let mut src = vec![0; self.rank];
        Self::from_fn(self.dim, self.rank, |idx| {
            for (s, &i) in idx.iter().enumerate() {
                src[s] = perm[i];
            }
            self.get(&src)
        })
    }

    /// Largest violation of antisymmetry under each adjacent slot swap.
    pub fn antisymmetry_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for s in 0..self.rank.saturating_sub(1) {
            let mut perm: Vec<usize> = (0..self.rank).collect();
            perm.swap(s, s + 1);
            let swapped = self.permute_slots(&perm);
            worst = worst.max(self.add(&swapped).max_abs());
        }
        worst
    }

    /// Applies a linear map `m` (columns are images of frame vectors) in
    /// slot `slot`: `out[.., i, ..] = Σ_p m[p, i] self[.., p, ..]`.
    pub fn transform_slot(&self, slot: usize, m: &DMatrix<f64>) -> Self {
        let n = self.dim;
        let inner = n.pow((self.rank - slot - 1) as u32);
        let outer = n.pow(slot as u32);
        let mut out = Self::zeros(n, self.rank);
        for o in 0..outer {
            for i in 0..n {
                for p in 0..n {
                    let c = m[(p, i)];
                    if c == 0.0 {
                        continue;
                    }
                    let src = (o * n + p) * inner;
                    let dst = (o * n + i) * inner;
                    for r in 0..inner {
                        out.data[dst + r] += c * self.data[src + r];
                    }
                }
            }
        }
        out
    }

    /// Applies `m` in every slot.
    pub fn transform_all(&self, m: &DMatrix<f64>) -> Self {
        (0..self.rank).fold(self.clone(), |acc, s| acc.transform_slot(s, m))
    }

    /// Slice with the leading index fixed.
    pub fn leading_slice(&self, i: usize) -> Self {
        let len = self.dim.pow((self.rank - 1) as u32);
        DenseTensor { dim: self.dim, rank: self.rank - 1, data: self.data[i * len..(i + 1) * len].to_vec() }
    }

    /// Stacks equal-shape tensors along a new leading slot.
    pub fn stack(parts: &[DenseTensor]) -> Self {
        let dim = parts[0].dim;
        let rank = parts[0].rank + 1;
        let data = parts.iter().flat_map(|p| p.data.iter().copied()).collect();
        DenseTensor { dim, rank, data }
    }
}
