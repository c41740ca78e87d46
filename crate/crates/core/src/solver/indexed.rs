//! Dense layered kernel.
//!
//! The coupons are partitioned into blocks of equal per-coupon weight (one
//! block per coupon for BA, a single block for UDA, one per probability group
//! for DPSA). A state is a tuple of per-block count-of-counts vectors, and a
//! layer is laid out as a sequence of sub-blocks, one per tuple of per-block
//! levels summing to the layer index. Inside a sub-block states are addressed
//! by the mixed-radix number formed from their per-block ranks, so both the
//! state and all of its predecessors are located by arithmetic alone.
//!
//! Each target state pulls from its predecessors in the previous layer, in a
//! fixed order, so the sums (and therefore the results) do not depend on how
//! sub-blocks are distributed across threads.

use std::time::Instant;

use rayon::prelude::*;
use smallvec::SmallVec;

use super::levels::{GroupLevels, LevelTable};
use super::{MomentsSum, Representation, SolveOptions, SolveResult, StateMoments, Tally};
use crate::error::{CcpError, Result};
use crate::model::{group_decompose, Problem};
use crate::summation::CompensatedSum;

type Levels = SmallVec<[u32; 16]>;

/// Coupons sharing a per-coupon weight; `total` is the weight of all coupons.
struct Partition {
    blocks: Vec<(f64, usize)>,
    total: f64,
}

fn partition(problem: &Problem, representation: Representation) -> Result<Partition> {
    match representation {
        Representation::Full => {
            // Canonical coupon order makes the result independent of how p is listed.
            let mut p = problem.dist().probabilities();
            p.sort_by(|a, b| b.total_cmp(a));
            Ok(Partition {
                blocks: p.into_iter().map(|q| (q, 1)).collect(),
                total: 1.0,
            })
        }
        Representation::Multiplicity => {
            if !problem.dist().is_uniform() {
                return Err(CcpError::NotUniform);
            }
            // Unit weights: the edge probability is exactly x_i / (n - x_t).
            Ok(Partition {
                blocks: vec![(1.0, problem.n())],
                total: problem.n() as f64,
            })
        }
        Representation::Grouped => Ok(Partition {
            blocks: group_decompose(problem.dist())
                .groups()
                .iter()
                .map(|g| (g.q, g.size))
                .collect(),
            total: 1.0,
        }),
    }
}

/// One sub-block of a layer: its per-block levels, widths and strides.
#[derive(Clone, Copy)]
struct Sub<'a> {
    offset: usize,
    levels: &'a [u32],
    widths: &'a [usize],
    strides: &'a [usize],
}

/// Counts of level tuples, used to rank a sub-block within its layer.
///
/// Every level between 0 and a block's maximum is non-empty, so the
/// sub-blocks of layer `b` are exactly the tuples `0 <= l_g <= max_g` with
/// `sum l_g = b`, listed in lexicographic order.
struct Shape {
    max: Vec<usize>,
    /// `cum[g][r]`: tuples over blocks `g..` with sum at most `r`.
    cum: Vec<Vec<u64>>,
}

impl Shape {
    fn new(groups: &[GroupLevels]) -> Shape {
        let max: Vec<usize> = groups.iter().map(|g| g.max_level()).collect();
        let ng = max.len();
        let mut exact: Vec<Vec<u64>> = vec![Vec::new(); ng + 1];
        exact[ng] = vec![1];
        for g in (0..ng).rev() {
            let below = &exact[g + 1];
            let mut row = vec![0u64; below.len() + max[g]];
            for (r, &c) in below.iter().enumerate() {
                for l in 0..=max[g] {
                    row[r + l] = row[r + l].saturating_add(c);
                }
            }
            exact[g] = row;
        }
        let cum = exact
            .into_iter()
            .map(|row| {
                let mut acc = 0u64;
                row.into_iter()
                    .map(|c| {
                        acc = acc.saturating_add(c);
                        acc
                    })
                    .collect()
            })
            .collect();
        Shape { max, cum }
    }

    fn suffix_max(&self, g: usize) -> usize {
        self.cum[g].len() - 1
    }

    fn cum(&self, g: usize, r: usize) -> u64 {
        let row = &self.cum[g];
        row[r.min(row.len() - 1)]
    }

    /// Position of `levels - e_dec` among the tuples with the same sum.
    fn rank_decremented(&self, levels: &[u32], dec: usize) -> usize {
        let mut rem: usize = levels.iter().map(|&l| l as usize).sum::<usize>() - 1;
        let mut rank = 0u64;
        for (g, &l) in levels.iter().enumerate().take(levels.len() - 1) {
            let l = l as usize - usize::from(g == dec);
            // tuples sharing the prefix with a smaller level at g
            rank += self.cum(g + 1, rem) - if rem >= l { self.cum(g + 1, rem - l) } else { 0 };
            rem -= l;
        }
        rank as usize
    }
}

/// Sub-blocks stored column-wise, `ng` entries per sub-block.
struct Layer {
    ng: usize,
    offsets: Vec<usize>,
    levels: Vec<u32>,
    widths: Vec<usize>,
    strides: Vec<usize>,
}

impl Layer {
    fn build(b: usize, groups: &[GroupLevels], shape: &Shape) -> Layer {
        let ng = groups.len();
        let mut layer = Layer {
            ng,
            offsets: vec![0],
            levels: Vec::new(),
            widths: Vec::new(),
            strides: Vec::new(),
        };
        let mut levels: Levels = SmallVec::from_elem(0, ng);
        layer.fill(0, b, groups, shape, &mut levels);
        layer
    }

    fn fill(&mut self, g: usize, remaining: usize, groups: &[GroupLevels], shape: &Shape, levels: &mut Levels) {
        if g == groups.len() {
            if remaining == 0 {
                self.push(levels, groups);
            }
            return;
        }
        let lo = remaining.saturating_sub(shape.suffix_max(g + 1));
        let hi = remaining.min(shape.max[g]);
        for l in lo..=hi {
            levels[g] = l as u32;
            self.fill(g + 1, remaining - l, groups, shape, levels);
        }
        levels[g] = 0;
    }

    fn push(&mut self, levels: &[u32], groups: &[GroupLevels]) {
        let start = self.widths.len();
        self.levels.extend_from_slice(levels);
        self.widths
            .extend(levels.iter().zip(groups).map(|(&l, g)| g.width(l as usize)));
        self.strides.resize(start + self.ng, 1);
        let (widths, strides) = (&self.widths[start..], &mut self.strides[start..]);
        debug_assert!(widths.iter().all(|&w| w > 0));
        for g in (0..self.ng - 1).rev() {
            strides[g] = strides[g + 1] * widths[g + 1];
        }
        let len = strides[0] * widths[0];
        let end = self.offsets.last().unwrap() + len;
        self.offsets.push(end);
    }

    /// Sub-block boundaries grouping runs of at least `min_states` states;
    /// starts with 0 and ends with the sub-block count.
    fn chunks(&self, min_states: usize) -> Vec<usize> {
        let mut cuts = vec![0];
        let mut start = 0;
        for i in 1..=self.count() {
            if self.offsets[i] - start >= min_states || i == self.count() {
                cuts.push(i);
                start = self.offsets[i];
            }
        }
        if cuts.len() == 1 {
            cuts.push(0);
        }
        cuts
    }

    fn count(&self) -> usize {
        self.offsets.len() - 1
    }

    fn len(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    fn sub(&self, i: usize) -> Sub<'_> {
        let r = i * self.ng..(i + 1) * self.ng;
        Sub {
            offset: self.offsets[i],
            levels: &self.levels[r.clone()],
            widths: &self.widths[r.clone()],
            strides: &self.strides[r],
        }
    }

    /// The sub-block of this (previous) layer holding the predecessors of
    /// `levels` through a move in block `g`.
    fn predecessor(&self, shape: &Shape, levels: &[u32], g: usize) -> Option<Sub<'_>> {
        if levels[g] == 0 {
            return None;
        }
        let sub = self.sub(shape.rank_decremented(levels, g));
        debug_assert!((0..levels.len()).all(|h| sub.levels[h] + u32::from(h == g) == levels[h]));
        Some(sub)
    }
}

/// Outgoing moments of every state of a layer, by column. A live state
/// stores its moments after the geometric holding time divided by its
/// leaving weight `total - complete weight`, so a move of weight `w` carries
/// `w` times these values. Terminal and unreachable states store zeros.
#[derive(Debug, Default)]
struct Columns {
    p: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
}

struct ColumnsMut<'a> {
    p: &'a mut [f64],
    u1: &'a mut [f64],
    u2: &'a mut [f64],
}

impl Columns {
    fn zeroed(len: usize) -> Self {
        let mut c = Columns::default();
        c.reset(len);
        c
    }

    /// Resizes to `len` states, keeping the allocation. Stale values are left
    /// in place; the kernel overwrites every slot.
    fn reset(&mut self, len: usize) {
        self.p.resize(len, 0.0);
        self.u1.resize(len, 0.0);
        self.u2.resize(len, 0.0);
    }

    /// Disjoint views of the state ranges `bounds[i]..bounds[i + 1]`.
    fn split(&mut self, bounds: &[usize]) -> Vec<ColumnsMut<'_>> {
        let (mut p, mut u1, mut u2) = (&mut self.p[..], &mut self.u1[..], &mut self.u2[..]);
        let mut out = Vec::with_capacity(bounds.len().saturating_sub(1));
        for len in bounds.windows(2).map(|w| w[1] - w[0]) {
            let (hp, tp) = std::mem::take(&mut p).split_at_mut(len);
            let (h1, t1) = std::mem::take(&mut u1).split_at_mut(len);
            let (h2, t2) = std::mem::take(&mut u2).split_at_mut(len);
            out.push(ColumnsMut { p: hp, u1: h1, u2: h2 });
            (p, u1, u2) = (tp, t1, t2);
        }
        out
    }
}

impl ColumnsMut<'_> {
    fn split_off_front(&mut self, len: usize) -> ColumnsMut<'_> {
        ColumnsMut {
            p: &mut self.p[..len],
            u1: &mut self.u1[..len],
            u2: &mut self.u2[..len],
        }
    }

    fn advance(&mut self, len: usize) {
        self.p = &mut std::mem::take(&mut self.p)[len..];
        self.u1 = &mut std::mem::take(&mut self.u1)[len..];
        self.u2 = &mut std::mem::take(&mut self.u2)[len..];
    }
}

#[derive(Debug, Default)]
struct Scratch {
    p: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
}

/// Sub-blocks are handed out in runs of at least this many states.
const CHUNK_STATES: usize = 4096;

#[derive(Debug, Default)]
struct SubTally {
    live: u64,
    terminal_states: u64,
    edges: u64,
    live_mass: CompensatedSum,
    terminal: MomentsSum,
}

/// Pulls every state of `sub` from its predecessors, then classifies it as
/// unreachable, terminal or live and writes its outgoing moments.
///
/// States are visited one row at a time, a row being all ranks of the last
/// block with the other ranks fixed. A predecessor through an earlier block
/// then lies in a contiguous row of the previous layer.
#[allow(clippy::too_many_arguments)]
fn expand(
    sub: Sub<'_>,
    prev: &Layer,
    shape: &Shape,
    src: &Columns,
    groups: &[GroupLevels],
    out: ColumnsMut<'_>,
    scratch: &mut Scratch,
    tally: &mut SubTally,
    k: u32,
    total: f64,
) -> Result<()> {
    let ng = groups.len();
    let last = ng - 1;
    let tables: SmallVec<[&LevelTable; 8]> = (0..ng).map(|g| groups[g].level(sub.levels[g] as usize)).collect();
    let ancestors: SmallVec<[Option<Sub<'_>>; 8]> = (0..ng).map(|g| prev.predecessor(shape, sub.levels, g)).collect();
    let width = sub.widths[last];
    let tail = tables[last];
    let q_tail = groups[last].q();
    let mut ranks: SmallVec<[usize; 8]> = SmallVec::from_elem(0, ng);
    scratch.p.resize(width, 0.0);
    scratch.u1.resize(width, 0.0);
    scratch.u2.resize(width, 0.0);
    let (ap, au1, au2) = (
        &mut scratch.p[..width],
        &mut scratch.u1[..width],
        &mut scratch.u2[..width],
    );

    let rows = out
        .p
        .chunks_mut(width)
        .zip(out.u1.chunks_mut(width))
        .zip(out.u2.chunks_mut(width));
    for ((op, ou1), ou2) in rows {
        // at most G*t non-negative terms per state: plain summation is accurate here
        ap.fill(0.0);
        au1.fill(0.0);
        au2.fill(0.0);
        let mut completed = 0u32;
        let mut weight = 0.0;
        let mut degree = 0u32;
        for g in 0..last {
            let (table, r) = (tables[g], ranks[g]);
            let c = table.completed[r];
            completed += c;
            weight += c as f64 * groups[g].q();
            degree += table.out_degree[r];
            let Some(anc) = ancestors[g] else { continue };
            let mut base = anc.offset;
            for v in 0..last {
                if v != g {
                    base += ranks[v] * anc.strides[v];
                }
            }
            for pr in table.preds(r) {
                let start = base + pr.rank as usize * anc.strides[g];
                let w = pr.wq;
                let range = start..start + width;
                for (a, s) in ap.iter_mut().zip(&src.p[range.clone()]) {
                    *a += w * s;
                }
                for (a, s) in au1.iter_mut().zip(&src.u1[range.clone()]) {
                    *a += w * s;
                }
                for (a, s) in au2.iter_mut().zip(&src.u2[range]) {
                    *a += w * s;
                }
            }
        }
        if let Some(anc) = ancestors[last] {
            let mut base = anc.offset;
            for v in 0..last {
                base += ranks[v] * anc.strides[v];
            }
            for r in 0..width {
                let (mut p, mut u1, mut u2) = (ap[r], au1[r], au2[r]);
                for pr in tail.preds(r) {
                    let j = base + pr.rank as usize;
                    p += pr.wq * src.p[j];
                    u1 += pr.wq * src.u1[j];
                    u2 += pr.wq * src.u2[j];
                }
                (ap[r], au1[r], au2[r]) = (p, u1, u2);
            }
        }

        let mut row_mass = 0.0;
        for r in 0..width {
            let (p, u1, u2) = (ap[r], au1[r], au2[r]);
            let c = tail.completed[r];
            let completed = completed + c;
            if completed >= k {
                if completed == k {
                    tally.terminal_states += 1;
                    tally.terminal.add(&StateMoments { p, u1, u2 });
                } else {
                    debug_assert_eq!(p, 0.0);
                }
                (op[r], ou1[r], ou2[r]) = (0.0, 0.0, 0.0);
                continue;
            }
            let weight = weight + c as f64 * q_tail;
            let hold = total - weight;
            if !(hold > 0.0) {
                return Err(CcpError::AbsorbingAncestor {
                    p_complete: weight / total,
                });
            }
            tally.live += 1;
            row_mass += p;
            tally.edges += (degree + tail.out_degree[r]) as u64;
            // holding time Geom(hold/total): mean total/hold, second moment (total+weight)total/hold^2
            let inv = 1.0 / hold;
            let g1 = total * inv;
            let g2 = (total + weight) * total * inv * inv;
            op[r] = p * inv;
            ou1[r] = (u1 + p * g1) * inv;
            ou2[r] = (u2 + 2.0 * u1 * g1 + p * g2) * inv;
        }
        tally.live_mass.add(row_mass);
        advance_outer(&mut ranks, sub, last);
    }
    Ok(())
}

/// Runs [`expand`] over the sub-blocks `subs`, whose states fill `out`.
#[allow(clippy::too_many_arguments)]
fn expand_chunk(
    subs: std::ops::Range<usize>,
    next: &Layer,
    prev: &Layer,
    shape: &Shape,
    src: &Columns,
    groups: &[GroupLevels],
    mut out: ColumnsMut<'_>,
    scratch: &mut Scratch,
    k: u32,
    total: f64,
) -> Result<SubTally> {
    let mut tally = SubTally::default();
    for i in subs {
        let len = next.offsets[i + 1] - next.offsets[i];
        expand(
            next.sub(i),
            prev,
            shape,
            src,
            groups,
            out.split_off_front(len),
            scratch,
            &mut tally,
            k,
            total,
        )?;
        out.advance(len);
    }
    Ok(tally)
}

/// Steps the ranks of all blocks but the last, later blocks fastest.
#[inline]
fn advance_outer(ranks: &mut [usize], sub: Sub<'_>, last: usize) {
    for v in (0..last).rev() {
        ranks[v] += 1;
        if ranks[v] < sub.widths[v] {
            return;
        }
        ranks[v] = 0;
    }
}

fn install<R: Send>(pool: &Option<rayon::ThreadPool>, f: impl FnOnce() -> R + Send) -> R {
    match pool {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

pub(crate) fn run(problem: &Problem, representation: Representation, options: &SolveOptions) -> Result<SolveResult> {
    let started = Instant::now();
    let partition = partition(problem, representation)?;
    let (k, t) = (problem.k(), problem.t());
    let total = partition.total;
    let mut groups: Vec<GroupLevels> = partition
        .blocks
        .iter()
        .map(|&(q, size)| GroupLevels::new(size, t, k, q))
        .collect();
    let shape = Shape::new(&groups);
    let total_max = shape.suffix_max(0);
    let pool = if options.threads > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(options.threads)
                .build()
                .map_err(|e| CcpError::Numerical(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };
    let parallel = pool.is_some();

    let mut tally = Tally::default();
    for g in groups.iter_mut() {
        g.ensure(0);
    }
    let mut layer = Layer::build(0, &groups, &shape);
    // the initial state: nothing complete, one incomplete move per block, no holding
    let mut sources = Columns::zeroed(layer.len());
    sources.p[0] = 1.0 / total;
    sources.u1[0] = 1.0 / total;
    sources.u2[0] = 1.0 / total;
    let mut spare = Columns::default();
    tally.states_expanded = 1;
    tally.edges = groups.len() as u64;
    tally.close_layer(0, 1, 0, 1.0);
    let mut live = 1;

    let mut b = 0;
    while live > 0 {
        b += 1;
        for group in groups.iter_mut() {
            group.ensure(b);
            let rest = total_max - group.max_level();
            group.release_below((b - 1).saturating_sub(rest));
        }
        let next = Layer::build(b, &groups, &shape);

        let mut next_sources = std::mem::take(&mut spare);
        next_sources.reset(next.len());
        let chunks = next.chunks(CHUNK_STATES);
        let bounds: Vec<usize> = chunks.iter().map(|&i| next.offsets[i]).collect();
        let subtallies: Vec<Result<SubTally>> = {
            let outs = next_sources.split(&bounds);
            let (prev, srcs, grps, next, shape) = (&layer, &sources, &groups, &next, &shape);
            let k = k as u32;
            let ranges: Vec<std::ops::Range<usize>> = chunks.windows(2).map(|w| w[0]..w[1]).collect();
            install(&pool, move || {
                if parallel {
                    ranges
                        .into_par_iter()
                        .zip(outs.into_par_iter())
                        .map_init(Scratch::default, |scratch, (subs, out)| {
                            expand_chunk(subs, next, prev, shape, srcs, grps, out, scratch, k, total)
                        })
                        .collect()
                } else {
                    let mut scratch = Scratch::default();
                    ranges
                        .into_iter()
                        .zip(outs)
                        .map(|(subs, out)| {
                            expand_chunk(subs, next, prev, shape, srcs, grps, out, &mut scratch, k, total)
                        })
                        .collect()
                }
            })
        };

        let mut live_mass = CompensatedSum::ZERO;
        let (mut live_states, mut terminal_states) = (0u64, 0u64);
        for st in subtallies {
            let st = st?;
            live_states += st.live;
            terminal_states += st.terminal_states;
            tally.edges += st.edges;
            live_mass.merge(&st.live_mass);
            tally.terminal.merge(&st.terminal);
        }
        tally.states_expanded += live_states + terminal_states;
        tally.check_cap(options.state_cap)?;
        tally.close_layer(b, live_states, terminal_states, live_mass.value());
        live = live_states;
        layer = next;
        spare = std::mem::replace(&mut sources, next_sources);
    }
    Ok(tally.finish(representation.engine(), started))
}
