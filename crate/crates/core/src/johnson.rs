//! Combinatorial model of the Johnson graph `J(n,k)`.
//!
//! Vertices are `k`-subsets of `{0, .., n-1}` (printed 1-based), ranked in
//! colexicographic order. Every vertex owns `d = k(n-k)` outgoing arcs, one
//! per ordered swap "remove element `i`, insert element `j`". The arc with
//! tail `v` and swap `(i, j)` has slot
//! `index_of(i in v) * (n - k) + index_of(j in complement(v))`, and the flat
//! arc index is `tail * d + slot`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};

/// Exact binomial coefficient, `None` on `u128` overflow. `C(n, k) = 0` for `k > n`.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) since acc = C(n, i).
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    Some(acc)
}

/// Instance parameters of `J(n,k)` with the derived vertex count and degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphParams {
    pub n: usize,
    pub k: usize,
    /// Number of vertices, `C(n,k)`.
    pub vertex_count: u128,
    /// Degree, `k(n-k)`.
    pub degree: usize,
}

impl GraphParams {
    /// Validates `(n, k)`: requires `k >= 1`, `n >= 2k`, and rejects the
    /// degenerate `J(2,1)`.
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(WalkError::Precondition("requires k >= 1".into()));
        }
        if n < 2 * k {
            return Err(WalkError::Precondition(format!(
                "requires n ≥ 2k (got n={n}, k={k})"
            )));
        }
        if (n, k) == (2, 1) {
            return Err(WalkError::Degenerate { n, k });
        }
        let vertex_count = binomial(n as u64, k as u64).ok_or(WalkError::Capacity {
            what: "vertex count C(n,k)",
            required: u128::MAX,
            limit: u128::MAX,
        })?;
        let degree = k * (n - k);
        Ok(Self {
            n,
            k,
            vertex_count,
            degree,
        })
    }

    /// Number of arcs `N·d` in exact arithmetic.
    pub fn arc_count(&self) -> Option<u128> {
        self.vertex_count.checked_mul(self.degree as u128)
    }

    fn check_ell(&self, ell: usize) -> Result<()> {
        if ell > self.k {
            return Err(WalkError::Domain(format!(
                "distance index {ell} outside [0, {}]",
                self.k
            )));
        }
        Ok(())
    }
}

/// Rank of a vertex in colexicographic order.
pub type VertexId = usize;

/// An arc identified by its tail vertex and coin slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ArcId {
    pub tail: VertexId,
    pub slot: usize,
}

impl ArcId {
    pub fn index(&self, params: &GraphParams) -> usize {
        self.tail * params.degree + self.slot
    }

    pub fn from_index(params: &GraphParams, index: usize) -> Self {
        Self {
            tail: index / params.degree,
            slot: index % params.degree,
        }
    }
}

/// Intersection numbers of one distance class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionRow {
    pub ell: usize,
    /// Neighbours in the same class.
    pub a: u64,
    /// Neighbours one class further out.
    pub b: u64,
    /// Neighbours one class closer in.
    pub c: u64,
}

/// Size of the distance class `ℓ` around any fixed vertex: `C(k,ℓ)·C(n-k,ℓ)`.
pub fn shell_size(params: &GraphParams, ell: usize) -> Result<u128> {
    params.check_ell(ell)?;
    let (n, k, l) = (params.n as u64, params.k as u64, ell as u64);
    // Both factors are bounded by N, which fits usize.
    Ok(binomial(k, l).unwrap() * binomial(n - k, l).unwrap())
}

pub fn intersection_numbers(params: &GraphParams, ell: usize) -> Result<IntersectionRow> {
    params.check_ell(ell)?;
    let (n, k, l) = (params.n as u64, params.k as u64, ell as u64);
    Ok(IntersectionRow {
        ell,
        a: l * (n - 2 * l),
        b: (k - l) * (n - k - l),
        c: l * l,
    })
}

/// Graph distance `k - |v ∩ w|` between two sorted subsets.
pub fn subset_distance(v: &[usize], w: &[usize]) -> usize {
    let (mut i, mut j, mut common) = (0, 0, 0);
    while i < v.len() && j < w.len() {
        match v[i].cmp(&w[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    v.len() - common
}

/// Position of `x` (not in `set`) inside the sorted complement of `set`.
fn complement_index(x: usize, set: &[usize]) -> usize {
    x - set.iter().take_while(|&&y| y < x).count()
}

/// `J(n,k)` with a binomial table for O(k) ranking and O(n) unranking.
#[derive(Debug, Clone)]
pub struct JohnsonGraph {
    params: GraphParams,
    vertices: usize,
    arcs: usize,
    /// `binom[c * (k + 1) + i] = C(c, i)` for `c <= n`, `i <= k`.
    binom: Vec<usize>,
}

impl JohnsonGraph {
    /// Fails when the arc count does not fit the index type.
    pub fn new(params: GraphParams) -> Result<Self> {
        let (n, k) = (params.n, params.k);
        let arcs = params
            .arc_count()
            .filter(|&a| a <= usize::MAX as u128)
            .ok_or(WalkError::Capacity {
                what: "arc count N*d",
                required: params.arc_count().unwrap_or(u128::MAX),
                limit: usize::MAX as u128,
            })? as usize;
        let mut binom = vec![0usize; (n + 1) * (k + 1)];
        for c in 0..=n {
            for i in 0..=k.min(c) {
                // C(c, i) <= C(n, k) for i <= k <= n/2, which fits usize.
                binom[c * (k + 1) + i] = binomial(c as u64, i as u64).unwrap() as usize;
            }
        }
        Ok(Self {
            params,
            vertices: params.vertex_count as usize,
            arcs,
            binom,
        })
    }

    pub fn from_nk(n: usize, k: usize) -> Result<Self> {
        Self::new(GraphParams::new(n, k)?)
    }

    pub fn params(&self) -> &GraphParams {
        &self.params
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn arc_count(&self) -> usize {
        self.arcs
    }

    #[inline]
    fn choose(&self, c: usize, i: usize) -> usize {
        self.binom[c * (self.params.k + 1) + i]
    }

    /// Colex rank of a sorted 0-based subset. Validates the input.
    pub fn rank(&self, subset: &[usize]) -> Result<VertexId> {
        if subset.len() != self.params.k {
            return Err(WalkError::Domain(format!(
                "subset has {} elements, expected {}",
                subset.len(),
                self.params.k
            )));
        }
        if subset.windows(2).any(|p| p[0] >= p[1]) || subset.iter().any(|&x| x >= self.params.n) {
            return Err(WalkError::Domain(format!(
                "subset {subset:?} is not strictly increasing within [0, {})",
                self.params.n
            )));
        }
        Ok(self.rank_unchecked(subset))
    }

    #[inline]
    fn rank_unchecked(&self, subset: &[usize]) -> VertexId {
        subset
            .iter()
            .enumerate()
            .map(|(i, &c)| self.choose(c, i + 1))
            .sum()
    }

    /// Inverse of [`rank`](Self::rank).
    pub fn unrank(&self, rank: VertexId) -> Result<Vec<usize>> {
        if rank >= self.vertices {
            return Err(WalkError::Domain(format!(
                "vertex rank {rank} outside [0, {})",
                self.vertices
            )));
        }
        let mut out = vec![0; self.params.k];
        self.unrank_into(rank, &mut out);
        Ok(out)
    }

    fn unrank_into(&self, mut rank: VertexId, out: &mut [usize]) {
        let mut c = self.params.n;
        for i in (1..=self.params.k).rev() {
            c -= 1;
            while self.choose(c, i) > rank {
                c -= 1;
            }
            out[i - 1] = c;
            rank -= self.choose(c, i);
        }
    }

    /// Elements `(removed, inserted)` of the swap encoded by `slot` at `tail`.
    pub fn decode_slot(&self, tail: &[usize], slot: usize) -> (usize, usize) {
        let m = self.params.n - self.params.k;
        let (ri, ji) = (slot / m, slot % m);
        // The ji-th element of the complement of tail.
        let mut count = 0;
        let mut x = 0;
        let mut t = 0;
        loop {
            if t < tail.len() && tail[t] == x {
                t += 1;
            } else {
                if count == ji {
                    break;
                }
                count += 1;
            }
            x += 1;
        }
        (tail[ri], x)
    }

    fn swapped(tail: &[usize], removed: usize, inserted: usize) -> Vec<usize> {
        let mut head: Vec<usize> = tail.iter().copied().filter(|&x| x != removed).collect();
        let pos = head.partition_point(|&x| x < inserted);
        head.insert(pos, inserted);
        head
    }

    pub fn arc_head(&self, arc: ArcId) -> VertexId {
        let tail = self.unrank(arc.tail).expect("arc tail in range");
        let (i, j) = self.decode_slot(&tail, arc.slot);
        self.rank_unchecked(&Self::swapped(&tail, i, j))
    }

    pub fn arc_opposite(&self, arc: ArcId) -> ArcId {
        let tail = self.unrank(arc.tail).expect("arc tail in range");
        let (i, j) = self.decode_slot(&tail, arc.slot);
        self.reverse_arc(&Self::swapped(&tail, i, j), i, j)
    }

    /// The arc leaving `head` that undoes the swap `(removed, inserted)`.
    fn reverse_arc(&self, head: &[usize], removed: usize, inserted: usize) -> ArcId {
        let m = self.params.n - self.params.k;
        let ri = head.partition_point(|&x| x < inserted);
        let ji = complement_index(removed, head);
        ArcId {
            tail: self.rank_unchecked(head),
            slot: ri * m + ji,
        }
    }

    /// Flat opposite-arc permutation, `table[a] = index(opposite(a))`.
    pub fn opposite_table(&self) -> Vec<u32> {
        let p = self.params;
        let d = p.degree;
        let m = p.n - p.k;
        let mut table = vec![0u32; self.arcs];
        let mut tail = vec![0usize; p.k];
        let mut comp = Vec::with_capacity(m);
        let mut head = vec![0usize; p.k];
        for v in 0..self.vertices {
            self.unrank_into(v, &mut tail);
            comp.clear();
            let mut t = 0;
            for x in 0..p.n {
                if t < tail.len() && tail[t] == x {
                    t += 1;
                } else {
                    comp.push(x);
                }
            }
            for (ri, &i) in tail.iter().enumerate() {
                for (ji, &j) in comp.iter().enumerate() {
                    swap_into(&mut head, &tail, i, j);
                    table[v * d + ri * m + ji] = self.reverse_arc(&head, i, j).index(&p) as u32;
                }
            }
        }
        table
    }

    /// Head rank of every arc, `table[a] = head(a)`.
    pub fn head_table(&self) -> Vec<u32> {
        let d = self.params.degree;
        self.opposite_table()
            .into_iter()
            .map(|o| (o as usize / d) as u32)
            .collect()
    }

    /// Distance class of `v` with respect to `w`.
    pub fn distance_class(&self, v: VertexId, w: VertexId) -> Result<usize> {
        Ok(subset_distance(&self.unrank(v)?, &self.unrank(w)?))
    }

    /// Distance of every vertex to `w`, indexed by rank.
    pub fn distance_classes(&self, w: VertexId) -> Result<Vec<usize>> {
        let target = self.unrank(w)?;
        let mut buf = vec![0; self.params.k];
        Ok((0..self.vertices)
            .map(|v| {
                self.unrank_into(v, &mut buf);
                subset_distance(&buf, &target)
            })
            .collect())
    }
}

/// Overwrites `out` with `(tail \ {removed}) ∪ {inserted}`, sorted.
fn swap_into(out: &mut Vec<usize>, tail: &[usize], removed: usize, inserted: usize) {
    out.clear();
    let mut placed = false;
    for &x in tail {
        if x == removed {
            continue;
        }
        if !placed && inserted < x {
            out.push(inserted);
            placed = true;
        }
        out.push(x);
    }
    if !placed {
        out.push(inserted);
    }
}

/// Parses a comma-separated 1-based element list such as `"1,2"` into a
/// sorted 0-based subset.
pub fn parse_subset(text: &str, params: &GraphParams) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for tok in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let x: usize = tok
            .parse()
            .map_err(|_| WalkError::Parse(format!("invalid element {tok:?}")))?;
        if x == 0 || x > params.n {
            return Err(WalkError::Domain(format!(
                "element {x} outside [1, {}]",
                params.n
            )));
        }
        out.push(x - 1);
    }
    out.sort_unstable();
    if out.windows(2).any(|p| p[0] == p[1]) || out.len() != params.k {
        return Err(WalkError::Domain(format!(
            "marked vertex must list {} distinct elements",
            params.k
        )));
    }
    Ok(out)
}

/// 1-based rendering of a 0-based subset.
pub fn one_based(subset: &[usize]) -> Vec<usize> {
    subset.iter().map(|x| x + 1).collect()
}
