//! Canonical labelling of small frames.
//!
//! Nodes are split into cells by iterated colour refinement; the canonical
//! form is the least adjacency matrix over orderings that keep cells in order.
//! Members of a cell that are twins (identical rows and columns, as in a
//! cluster) are interchangeable and are not permuted.

use std::collections::BTreeMap;

use super::FiniteFrame;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalForm {
    nodes: usize,
    rows: Vec<Vec<bool>>,
}

fn refine(f: &FiniteFrame) -> Vec<usize> {
    let n = f.node_count();
    let preds = |i: usize| (0..n).filter(move |&j| f.sees(j, i));
    let mut colour: Vec<usize> = vec![0; n];
    loop {
        let sigs: Vec<(usize, Vec<usize>, Vec<usize>)> = (0..n)
            .map(|i| {
                let mut out: Vec<usize> = f.successors(i).map(|j| colour[j]).collect();
                let mut inc: Vec<usize> = preds(i).map(|j| colour[j]).collect();
                out.sort_unstable();
                inc.sort_unstable();
                (colour[i], out, inc)
            })
            .collect();
        let ranks: BTreeMap<&(usize, Vec<usize>, Vec<usize>), usize> =
            sigs.iter().collect::<std::collections::BTreeSet<_>>().into_iter().enumerate().map(|(r, s)| (s, r)).collect();
        let next: Vec<usize> = sigs.iter().map(|s| ranks[s]).collect();
        let classes = |c: &[usize]| c.iter().collect::<std::collections::BTreeSet<_>>().len();
        if classes(&next) == classes(&colour) {
            return next;
        }
        colour = next;
    }
}

fn twins(f: &FiniteFrame, i: usize, j: usize) -> bool {
    let n = f.node_count();
    (0..n).all(|k| f.sees(i, k) == f.sees(j, k) && f.sees(k, i) == f.sees(k, j))
}

pub fn canonical_form(f: &FiniteFrame) -> CanonicalForm {
    let n = f.node_count();
    let colour = refine(f);
    let mut cells: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &c) in colour.iter().enumerate() {
        cells.entry(c).or_default().push(i);
    }
    let cells: Vec<Vec<usize>> = cells.into_values().collect();
    let mut best: Option<Vec<Vec<bool>>> = None;
    let mut order = Vec::with_capacity(n);
    search(f, &cells, 0, &mut vec![false; n], &mut order, &mut best);
    CanonicalForm { nodes: n, rows: best.unwrap_or_default() }
}

fn matrix(f: &FiniteFrame, order: &[usize]) -> Vec<Vec<bool>> {
    order.iter().map(|&i| order.iter().map(|&j| f.sees(i, j)).collect()).collect()
}

fn search(
    f: &FiniteFrame,
    cells: &[Vec<usize>],
    cell: usize,
    used: &mut Vec<bool>,
    order: &mut Vec<usize>,
    best: &mut Option<Vec<Vec<bool>>>,
) {
    if cell == cells.len() {
        let m = matrix(f, order);
        if best.as_ref().is_none_or(|b| m < *b) {
            *best = Some(m);
        }
        return;
    }
    let members = &cells[cell];
    let placed = members.iter().filter(|&&i| used[i]).count();
    if placed == members.len() {
        search(f, cells, cell + 1, used, order, best);
        return;
    }
    let all_twins = members.windows(2).all(|w| twins(f, w[0], w[1]));
    let candidates: Vec<usize> = if all_twins {
        members.iter().copied().filter(|&i| !used[i]).take(1).collect()
    } else {
        members.iter().copied().filter(|&i| !used[i]).collect()
    };
    for i in candidates {
        used[i] = true;
        order.push(i);
        search(f, cells, cell, used, order, best);
        order.pop();
        used[i] = false;
    }
}
