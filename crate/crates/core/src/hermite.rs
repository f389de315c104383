//! Probabilists' Hermite polynomials, their zeros, and the multi-index
//! layout used for every coefficient vector in the crate.
//!
//! Coefficient vectors are stored densely in *graded lexicographic* order:
//! every index of order `m` precedes every index of order `m + 1`, and
//! indices of the same order are sorted lexicographically (ascending) by
//! their components. A useful consequence is that the layout for order `K`
//! is a prefix of the layout for any order `K' > K`, so truncation is a
//! slice and order lifting is zero padding.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Marker for "no such index" in the neighbour tables.
pub const NONE: u32 = u32::MAX;

/// Evaluates `He_n(x)` by the three-term recursion
/// `He_{k+1} = x He_k - k He_{k-1}`.
pub fn he_eval(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    match n {
        0 => 1.0,
        1 => x,
        _ => {
            for k in 1..n {
                let next = x * cur - k as f64 * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Evaluates `He_0(x) .. He_n(x)` into `out` (length `n + 1`).
pub fn he_eval_all(n: usize, x: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if n >= 1 {
        out[1] = x;
    }
    for k in 1..n {
        out[k + 1] = x * out[k] - k as f64 * out[k - 1];
    }
}

/// Sorted zeros of `He_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RootTable {
    order: usize,
    roots: Vec<f64>,
}

impl RootTable {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    /// Smallest zero.
    pub fn min(&self) -> f64 {
        self.roots[0]
    }

    /// Largest zero.
    pub fn max(&self) -> f64 {
        self.roots[self.roots.len() - 1]
    }
}

/// Zeros of `He_n` for `n >= 1`.
///
/// The zeros are the eigenvalues of the symmetric tridiagonal Jacobi matrix
/// of the recurrence (zero diagonal, off-diagonal `sqrt(k)`), computed with
/// implicit QL iterations and then refined by one Newton step.
pub fn he_roots(n: usize) -> RootTable {
    assert!(n >= 1, "He_0 has no zeros");
    let mut diag = vec![0.0; n];
    let mut off: Vec<f64> = (1..n).map(|k| (k as f64).sqrt()).collect();
    off.push(0.0);
    tridiagonal_ql(&mut diag, &mut off);
    for x in diag.iter_mut() {
        let d = n as f64 * he_eval(n - 1, *x);
        if d != 0.0 {
            *x -= he_eval(n, *x) / d;
        }
    }
    diag.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if n % 2 == 1 {
        diag[n / 2] = 0.0;
    }
    RootTable {
        order: n,
        roots: diag,
    }
}

/// Eigenvalues of a symmetric tridiagonal matrix (implicit QL with Wilkinson
/// shifts). `d` holds the diagonal, `e[i]` couples rows `i` and `i + 1`;
/// on return `d` holds the unsorted eigenvalues.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter < 60, "QL iteration did not converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

/// Number of multi-indices `alpha` in `N^d` with `|alpha| <= k`, i.e.
/// `binomial(k + d, d)`.
pub fn index_count(k: usize, d: usize) -> usize {
    let mut c: u128 = 1;
    for i in 1..=d as u128 {
        c = c * (k as u128 + i) / i;
    }
    c as usize
}

/// A `D`-dimensional multi-index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u16>);

impl MultiIndex {
    pub fn new(components: Vec<u16>) -> Self {
        MultiIndex(components)
    }

    pub fn zero(d: usize) -> Self {
        MultiIndex(vec![0; d])
    }

    /// `k * e_axis`.
    pub fn axis(d: usize, axis: usize, k: u16) -> Self {
        let mut c = vec![0; d];
        c[axis] = k;
        MultiIndex(c)
    }

    pub fn components(&self) -> &[u16] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|alpha|`.
    pub fn order(&self) -> usize {
        self.0.iter().map(|&a| a as usize).sum()
    }

    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&a| (1..=a as u32).map(f64::from).product::<f64>())
            .product()
    }

    /// `self + other`.
    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl From<&[u16]> for MultiIndex {
    fn from(c: &[u16]) -> Self {
        MultiIndex(c.to_vec())
    }
}

/// Bijection between `{alpha : |alpha| <= K}` and dense offsets, together
/// with the neighbour tables the projection and flux kernels walk.
#[derive(Debug)]
pub struct MultiIndexMap {
    dim: usize,
    max_order: usize,
    comps: Vec<u16>,
    orders: Vec<u16>,
    grade_start: Vec<usize>,
    lookup: HashMap<Vec<u16>, usize>,
    down1: Vec<u32>,
    down2: Vec<u32>,
    up1: Vec<u32>,
}

impl MultiIndexMap {
    pub fn new(max_order: usize, dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        let mut comps = Vec::new();
        let mut orders = Vec::new();
        let mut grade_start = Vec::with_capacity(max_order + 2);
        let mut buf = vec![0u16; dim];
        for m in 0..=max_order {
            grade_start.push(orders.len());
            compositions(m, 0, &mut buf, &mut |c| {
                comps.extend_from_slice(c);
                orders.push(m as u16);
            });
        }
        grade_start.push(orders.len());
        let len = orders.len();
        debug_assert_eq!(len, index_count(max_order, dim));
        let lookup: HashMap<Vec<u16>, usize> = (0..len)
            .map(|i| (comps[i * dim..(i + 1) * dim].to_vec(), i))
            .collect();

        let mut down1 = vec![NONE; dim * len];
        let mut down2 = vec![NONE; dim * len];
        let mut up1 = vec![NONE; dim * len];
        for i in 0..len {
            let a = &comps[i * dim..(i + 1) * dim];
            for d in 0..dim {
                let mut b = a.to_vec();
                if a[d] >= 1 {
                    b[d] = a[d] - 1;
                    down1[d * len + i] = lookup[&b] as u32;
                }
                if a[d] >= 2 {
                    b[d] = a[d] - 2;
                    down2[d * len + i] = lookup[&b] as u32;
                }
                b[d] = a[d] + 1;
                if let Some(&j) = lookup.get(&b) {
                    up1[d * len + i] = j as u32;
                }
            }
        }
        MultiIndexMap {
            dim,
            max_order,
            comps,
            orders,
            grade_start,
            lookup,
            down1,
            down2,
            up1,
        }
    }

    /// Process-wide cached map for `(max_order, dim)`.
    pub fn shared(max_order: usize, dim: usize) -> Arc<MultiIndexMap> {
        type Cache = Mutex<HashMap<(usize, usize), Arc<MultiIndexMap>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap();
        guard
            .entry((max_order, dim))
            .or_insert_with(|| Arc::new(MultiIndexMap::new(max_order, dim)))
            .clone()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    /// Offset of `alpha`, if `|alpha| <= K`.
    pub fn forward(&self, alpha: &MultiIndex) -> Option<usize> {
        self.lookup.get(alpha.components()).copied()
    }

    /// Offset of the multi-index given by raw components.
    pub fn offset_of(&self, comps: &[u16]) -> Option<usize> {
        self.lookup.get(comps).copied()
    }

    pub fn backward(&self, offset: usize) -> MultiIndex {
        MultiIndex(self.components(offset).to_vec())
    }

    pub fn components(&self, offset: usize) -> &[u16] {
        &self.comps[offset * self.dim..(offset + 1) * self.dim]
    }

    pub fn order_of(&self, offset: usize) -> usize {
        self.orders[offset] as usize
    }

    /// Offsets `[start, end)` of all indices of order exactly `m`.
    pub fn grade(&self, m: usize) -> std::ops::Range<usize> {
        self.grade_start[m]..self.grade_start[m + 1]
    }

    /// Offset of `e_axis * k`.
    pub fn axis_offset(&self, axis: usize, k: usize) -> Option<usize> {
        self.forward(&MultiIndex::axis(self.dim, axis, k as u16))
    }

    /// Offset of `alpha - e_axis`, or [`NONE`].
    #[inline]
    pub fn down1(&self, axis: usize, offset: usize) -> u32 {
        self.down1[axis * self.len() + offset]
    }

    /// Offset of `alpha - 2 e_axis`, or [`NONE`].
    #[inline]
    pub fn down2(&self, axis: usize, offset: usize) -> u32 {
        self.down2[axis * self.len() + offset]
    }

    /// Offset of `alpha + e_axis`, or [`NONE`] when it exceeds the map order.
    #[inline]
    pub fn up1(&self, axis: usize, offset: usize) -> u32 {
        self.up1[axis * self.len() + offset]
    }

    /// Offset of `alpha + e_axis` if it lies within the map.
    #[inline]
    pub fn raise(&self, axis: usize, offset: usize) -> Option<usize> {
        let v = self.up1(axis, offset);
        (v != NONE).then_some(v as usize)
    }

    pub(crate) fn down1_table(&self, axis: usize) -> &[u32] {
        let n = self.len();
        &self.down1[axis * n..(axis + 1) * n]
    }

    pub(crate) fn down2_table(&self, axis: usize) -> &[u32] {
        let n = self.len();
        &self.down2[axis * n..(axis + 1) * n]
    }

    pub fn iter(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        (0..self.len()).map(move |i| self.backward(i))
    }
}

fn compositions(m: usize, pos: usize, buf: &mut [u16], emit: &mut dyn FnMut(&[u16])) {
    let d = buf.len();
    if pos == d - 1 {
        buf[pos] = m as u16;
        emit(buf);
        return;
    }
    for a in 0..=m {
        buf[pos] = a as u16;
        compositions(m - a, pos + 1, buf, emit);
    }
}

/// Evaluates the basis function
/// `prod_d (2 pi)^{-1/2} theta^{-(alpha_d + 1)/2} He_{alpha_d}(v_d) exp(-v_d^2 / 2)`.
pub fn basis_eval(theta: f64, alpha: &MultiIndex, v: &[f64]) -> f64 {
    assert!(theta > 0.0);
    alpha
        .components()
        .iter()
        .zip(v)
        .map(|(&a, &vd)| {
            (2.0 * PI).powf(-0.5)
                * theta.powf(-(a as f64 + 1.0) / 2.0)
                * he_eval(a as usize, vd)
                * (-vd * vd / 2.0).exp()
        })
        .product()
}
