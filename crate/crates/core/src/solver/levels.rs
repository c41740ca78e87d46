//! Per-group tables of count-of-counts vectors, split by tracked-draw level.
//!
//! For a group of `c` coupons, level `l` holds every vector `x_0..x_t` with
//! `sum x_i = c`, `sum i*x_i = l` and `x_t <= cap`, listed in increasing
//! lexicographic order of `(x_t, x_{t-1}, .., x_1)`. A state's position in that
//! list is its rank. Each entry records the ranks of its one-draw predecessors
//! in level `l - 1`.

#[derive(Debug, Clone, Copy)]
pub(crate) struct Pred {
    /// Rank of the predecessor in the previous level.
    pub rank: u32,
    /// `x'_{i-1} * q`: unnormalized weight of the move `i-1 -> i`.
    pub wq: f64,
}

#[derive(Debug)]
pub(crate) struct LevelTable {
    stride: usize,
    xs: Vec<u32>,
    pub completed: Vec<u32>,
    pub out_degree: Vec<u32>,
    pred_start: Vec<u32>,
    preds: Vec<Pred>,
}

impl LevelTable {
    #[inline]
    pub fn width(&self) -> usize {
        self.completed.len()
    }

    #[inline]
    pub fn preds(&self, rank: usize) -> &[Pred] {
        &self.preds[self.pred_start[rank] as usize..self.pred_start[rank + 1] as usize]
    }

    pub fn vector(&self, rank: usize) -> &[u32] {
        &self.xs[rank * self.stride..(rank + 1) * self.stride]
    }

    fn key_cmp(&self, rank: usize, x: &[u32]) -> std::cmp::Ordering {
        let y = self.vector(rank);
        (1..self.stride)
            .rev()
            .map(|i| y[i].cmp(&x[i]))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    }

    /// Rank of `x`, scanning forward from `*cursor`; `x` must be present and
    /// not precede the cursor.
    fn seek(&self, x: &[u32], cursor: &mut usize) -> usize {
        while self.key_cmp(*cursor, x).is_lt() {
            *cursor += 1;
        }
        debug_assert!(
            self.key_cmp(*cursor, x).is_eq(),
            "predecessor present in previous level"
        );
        *cursor
    }

    #[cfg(test)]
    fn find(&self, x: &[u32]) -> Option<usize> {
        let t = self.stride - 1;
        let (mut lo, mut hi) = (0usize, self.width());
        while lo < hi {
            let mid = (lo + hi) / 2;
            let y = self.vector(mid);
            match (1..=t).rev().map(|i| y[i].cmp(&x[i])).find(|o| o.is_ne()) {
                None => return Some(mid),
                Some(std::cmp::Ordering::Less) => lo = mid + 1,
                Some(_) => hi = mid,
            }
        }
        None
    }
}

#[derive(Debug)]
pub(crate) struct GroupLevels {
    size: u32,
    t: usize,
    cap: u32,
    q: f64,
    max_level: usize,
    levels: Vec<Option<LevelTable>>,
    /// Levels below this have been released.
    released: usize,
}

impl GroupLevels {
    pub fn new(size: usize, t: usize, cap: usize, q: f64) -> Self {
        let cap = cap.min(size);
        let max_level = cap * t + (size - cap) * (t - 1);
        Self {
            size: size as u32,
            t,
            cap: cap as u32,
            q,
            max_level,
            levels: Vec::new(),
            released: 0,
        }
    }

    pub fn max_level(&self) -> usize {
        self.max_level
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Builds every missing level up to `level` (clamped to the maximum).
    pub fn ensure(&mut self, level: usize) {
        let upto = level.min(self.max_level);
        while self.levels.len() <= upto {
            let l = self.levels.len();
            let table = self.build(l);
            self.levels.push(Some(table));
        }
    }

    /// Drops levels strictly below `level`; they are never needed again.
    pub fn release_below(&mut self, level: usize) {
        let upto = level.min(self.levels.len());
        for slot in &mut self.levels[self.released.min(upto)..upto] {
            *slot = None;
        }
        self.released = self.released.max(upto);
    }

    #[inline]
    pub fn level(&self, l: usize) -> &LevelTable {
        self.levels[l].as_ref().expect("level table released or not built")
    }

    pub fn width(&self, l: usize) -> usize {
        if l > self.max_level {
            0
        } else {
            self.level(l).width()
        }
    }

    fn build(&self, l: usize) -> LevelTable {
        let stride = self.t + 1;
        let mut xs = Vec::new();
        let mut x = vec![0u32; stride];
        enumerate(self.t, self.size, l as u32, self.cap, &mut x, &mut xs);
        let width = xs.len() / stride;

        let mut completed = Vec::with_capacity(width);
        let mut out_degree = Vec::with_capacity(width);
        let mut pred_start = Vec::with_capacity(width + 1);
        let mut preds = Vec::new();
        pred_start.push(0u32);
        let prev = if l > 0 { self.levels[l - 1].as_ref() } else { None };
        // Adding the same move to two vectors keeps their canonical order, so
        // for a fixed slot i the predecessor ranks increase with r.
        let mut cursor = vec![0usize; stride];
        let mut y = vec![0u32; stride];
        for r in 0..width {
            let v = &xs[r * stride..(r + 1) * stride];
            completed.push(v[self.t]);
            out_degree.push(v[..self.t].iter().filter(|&&c| c > 0).count() as u32);
            if let Some(prev) = prev {
                for i in 1..=self.t {
                    if v[i] == 0 {
                        continue;
                    }
                    y.copy_from_slice(v);
                    y[i] -= 1;
                    y[i - 1] += 1;
                    let rank = prev.seek(&y, &mut cursor[i]);
                    preds.push(Pred {
                        rank: rank as u32,
                        wq: y[i - 1] as f64 * self.q,
                    });
                }
            }
            pred_start.push(preds.len() as u32);
        }
        LevelTable {
            stride,
            xs,
            completed,
            out_degree,
            pred_start,
            preds,
        }
    }
}

/// Appends, in canonical order, every vector with the given count, level and
/// cap on `x_t`. Positions are filled from `t` down to `1`; `x_0` takes the rest.
fn enumerate(t: usize, count: u32, level: u32, cap: u32, x: &mut [u32], out: &mut Vec<u32>) {
    fn go(i: usize, rem_count: u32, rem_level: u32, cap: u32, x: &mut [u32], out: &mut Vec<u32>) {
        if rem_level == 0 {
            x[0] = rem_count;
            out.extend_from_slice(x);
            x[0] = 0;
            return;
        }
        // slots above the remaining level must be empty
        if i > rem_level as usize {
            return go(rem_level as usize, rem_count, rem_level, cap, x, out);
        }
        if i == 1 {
            let cap_here = if x.len() == 2 { cap } else { rem_count };
            if rem_level <= rem_count.min(cap_here) {
                x[1] = rem_level;
                x[0] = rem_count - rem_level;
                out.extend_from_slice(x);
                x[1] = 0;
            }
            return;
        }
        let mut hi = (rem_level / i as u32).min(rem_count);
        if i == x.len() - 1 {
            hi = hi.min(cap);
        }
        // the lower positions absorb at most i-1 per remaining coupon
        let lo = (rem_level as u64).saturating_sub((i as u64 - 1) * rem_count as u64) as u32;
        for xi in lo..=hi {
            x[i] = xi;
            go(i - 1, rem_count - xi, rem_level - xi * i as u32, cap, x, out);
        }
        x[i] = 0;
    }
    go(t, count, level, cap, x, out);
}
