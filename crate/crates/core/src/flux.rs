//! Velocity-weighted expansions and the HLL interface flux.

use nalgebra::{DMatrix, Schur};

use crate::error::{Error, Result};
use crate::hermite::{index_count, MultiIndexMap, RootTable, NONE};
use crate::state::{FluxTerm, GradState, MacroState};

/// Adds `weight * (xi_j f)` truncated to `out.len()` entries. `map` must have
/// order at least one above the output order so that `up1` is defined.
fn xi_accumulate(f: &GradState, j: usize, weight: f64, map: &MultiIndexMap, out: &mut [f64]) {
    let src = f.coeffs();
    let n = src.len();
    let theta = f.theta() * weight;
    let uj = f.u()[j] * weight;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        let lo = map.down1(j, i);
        if lo != NONE {
            acc += theta * src[lo as usize];
        }
        if i < n {
            acc += uj * src[i];
        }
        let hi = map.up1(j, i);
        if hi != NONE && (hi as usize) < n {
            let k = map.components(hi as usize)[j] as f64;
            acc += k * weight * src[hi as usize];
        }
        *o += acc;
    }
}

/// `xi_j f` expanded in the frame of `f`, one order higher than `f`.
pub fn xi_multiply(state: &GradState, j: usize) -> FluxTerm {
    assert!(j < state.dim(), "axis {j} out of range");
    let k = state.order() + 1;
    let mut out = GradState::zeros(k, state.u().to_vec(), state.theta());
    let map = MultiIndexMap::shared(k + 1, state.dim());
    xi_accumulate(state, j, 1.0, &map, out.coeffs_mut());
    out
}

/// Drops all coefficients above order `k`.
pub fn truncate(term: &FluxTerm, k: usize) -> GradState {
    assert!(
        k <= term.order(),
        "cannot truncate order {} to {k}",
        term.order()
    );
    term.with_order(k)
}

/// `(lambda_L, lambda_R)` from the frames of two states. `roots` holds the
/// zeros of `He_{M+1}` for Grad runs or `He_{M+2}` for regularized runs.
pub fn signal_velocities(
    left: &MacroState,
    right: &MacroState,
    j: usize,
    roots: &RootTable,
) -> (f64, f64) {
    signal_velocities_raw(left.u[j], left.theta, right.u[j], right.theta, roots)
}

pub(crate) fn signal_velocities_raw(
    ul: f64,
    tl: f64,
    ur: f64,
    tr: f64,
    roots: &RootTable,
) -> (f64, f64) {
    let (sl, sr) = (tl.sqrt(), tr.sqrt());
    let lo = (ul + roots.min() * sl).min(ur + roots.min() * sr);
    let hi = (ul + roots.max() * sl).max(ur + roots.max() * sr);
    (lo, hi)
}

/// HLL flux along axis `j` between two expansions sharing one frame. The
/// result is truncated to the lower of the two orders.
pub fn hll_flux(
    left: &GradState,
    right: &GradState,
    j: usize,
    lambda_l: f64,
    lambda_r: f64,
) -> Result<FluxTerm> {
    let mut out = GradState::zeros(
        left.order().min(right.order()),
        left.u().to_vec(),
        left.theta(),
    );
    hll_accumulate(left, right, j, lambda_l, lambda_r, 1.0, out.coeffs_mut())?;
    Ok(out)
}

/// `out += weight * hll_flux(left, right, ...)` without allocating.
pub(crate) fn hll_accumulate(
    left: &GradState,
    right: &GradState,
    j: usize,
    lambda_l: f64,
    lambda_r: f64,
    weight: f64,
    out: &mut [f64],
) -> Result<()> {
    if !(lambda_l <= lambda_r) {
        return Err(Error::SignalOrder {
            left: lambda_l,
            right: lambda_r,
        });
    }
    debug_assert_eq!(left.u(), right.u());
    debug_assert_eq!(left.theta(), right.theta());
    let k = left.order().min(right.order());
    let n = index_count(k, left.dim());
    let map = MultiIndexMap::shared(k + 1, left.dim());
    let out = &mut out[..n];
    if 0.0 <= lambda_l {
        xi_accumulate(left, j, weight, &map, out);
    } else if lambda_r <= 0.0 {
        xi_accumulate(right, j, weight, &map, out);
    } else {
        let inv = weight / (lambda_r - lambda_l);
        xi_accumulate(left, j, lambda_r * inv, &map, out);
        xi_accumulate(right, j, -lambda_l * inv, &map, out);
        let c = lambda_l * lambda_r * inv;
        let (l, r) = (left.coeffs(), right.coeffs());
        for (i, o) in out.iter_mut().enumerate() {
            *o += c * (r[i] - l[i]);
        }
    }
    Ok(())
}

/// Dense matrix of `truncate(xi_multiply(., j), M)` on the order-`M`
/// coefficient space in frame `(u_j, theta)` (other velocity components do
/// not enter).
pub fn flux_operator_matrix(
    m: usize,
    d: usize,
    j: usize,
    uj: f64,
    theta: f64,
) -> Result<DMatrix<f64>> {
    let n = index_count(m, d);
    if n > 200 {
        return Err(Error::DimensionTooLarge(n));
    }
    let mut u = vec![0.0; d];
    u[j] = uj;
    let mut mat = DMatrix::zeros(n, n);
    let mut col = vec![0.0; n];
    let map = MultiIndexMap::shared(m + 1, d);
    for c in 0..n {
        let mut e = GradState::zeros(m, u.clone(), theta);
        e.coeffs_mut()[c] = 1.0;
        col.fill(0.0);
        xi_accumulate(&e, j, 1.0, &map, &mut col);
        for (r, v) in col.iter().enumerate() {
            mat[(r, c)] = *v;
        }
    }
    Ok(mat)
}

/// Diagonal similarity that evens out row and column norms (Parlett and
/// Reinsch, powers of two only so the spectrum is untouched).
fn balance(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for k in 0..n {
                if k != i {
                    c += a[(k, i)].abs();
                    r += a[(i, k)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            while c < r / 2.0 {
                c *= 2.0;
                r /= 2.0;
                f *= 2.0;
            }
            while c >= r * 2.0 {
                c /= 2.0;
                r *= 2.0;
                f /= 2.0;
            }
            if c + r < 0.95 * s {
                done = false;
                for k in 0..n {
                    a[(i, k)] /= f;
                    a[(k, i)] *= f;
                }
            }
        }
    }
}

/// Eigenvalues of the truncated flux operator, sorted ascending.
pub fn operator_spectrum_check(
    m: usize,
    d: usize,
    j: usize,
    uj: f64,
    theta: f64,
) -> Result<Vec<f64>> {
    let mut mat = flux_operator_matrix(m, d, j, uj, theta)?;
    balance(&mut mat);
    let scale = uj.abs() + theta.sqrt() * (m as f64 + 1.0);
    // an off-centre shift breaks the +- symmetry of the spectrum, on which
    // the unshifted QR sweep can stall
    let shift = 0.271_828 * scale;
    for i in 0..mat.nrows() {
        mat[(i, i)] += shift;
    }
    let schur = Schur::try_new(mat, f64::EPSILON, 100_000).ok_or(Error::NotConverged {
        steps: 100_000,
        rate: f64::NAN,
    })?;
    let ev = schur.complex_eigenvalues();
    let mut out = Vec::with_capacity(ev.len());
    for z in ev.iter() {
        if z.im.abs() > 1e-6 * scale {
            return Err(Error::NonFinite(format!("complex eigenvalue {z}")));
        }
        out.push(z.re - shift);
    }
    out.sort_by(|a, b| a.total_cmp(b));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::he_roots;
    use crate::state::{quadrature_moment, Polynomial};

    fn sample_state(order: usize, u: Vec<f64>, theta: f64, seed: u64) -> GradState {
        let mut s = GradState::zeros(order, u, theta);
        let mut x = seed as f64;
        for c in s.coeffs_mut().iter_mut() {
            x = (x * 1.618_033_988_7 + 0.31).fract();
            *c = 0.3 * (x - 0.5);
        }
        s.coeffs_mut()[0] = 1.0;
        s
    }

    #[test]
    fn maxwellian_product() {
        let s = GradState::maxwellian(2.0, &[0.3, -0.7], 1.5, 3).unwrap();
        let t = xi_multiply(&s, 1);
        assert_eq!(t.order(), 4);
        for (i, &c) in t.coeffs().iter().enumerate() {
            let a = t.map().components(i);
            let want = match a {
                [0, 0] => -0.7 * 2.0,
                [0, 1] => 1.5 * 2.0,
                _ => 0.0,
            };
            assert!((c - want).abs() < 1e-15, "{a:?}");
        }
        let tr = truncate(&t, 3);
        assert_eq!(tr.coeffs().iter().filter(|c| **c != 0.0).count(), 2);
    }

    #[test]
    fn product_moments_match_quadrature() {
        for d in 1..=3 {
            let s = sample_state(4, vec![0.4, -0.2, 0.1][..d].to_vec(), 0.8, d as u64);
            for j in 0..d {
                let t = xi_multiply(&s, j);
                for p in Polynomial::all_monomials(d, 4) {
                    let a = quadrature_moment(&t, &p).unwrap();
                    let b = quadrature_moment(&s.with_order(5), &p.times_xi(j)).unwrap();
                    assert!((a - b).abs() < 1e-11 * (1.0 + b.abs()), "d={d} j={j}");
                }
            }
        }
    }

    #[test]
    fn one_dimensional_recursion_by_hand() {
        // f = a H_0 + b H_1 + c H_2 in frame (u, theta)
        let (a, b, c, u, th) = (1.0, 0.2, -0.3, 0.5, 2.0);
        let s = GradState::new(2, vec![u], th, vec![a, b, c]).unwrap();
        let t = xi_multiply(&s, 0);
        let want = [u * a + b, th * a + u * b + 2.0 * c, th * b + u * c, th * c];
        for (x, y) in t.coeffs().iter().zip(want) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn truncation_keeps_low_moments() {
        let s = sample_state(3, vec![0.1, 0.2], 1.1, 7);
        let t = xi_multiply(&s, 0);
        let tr = truncate(&t, 3);
        for p in Polynomial::all_monomials(2, 3) {
            let a = quadrature_moment(&tr, &p).unwrap();
            let b = quadrature_moment(&t, &p).unwrap();
            assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()));
        }
        let zero_top = GradState::maxwellian(1.0, &[0.0], 1.0, 3).unwrap();
        let t = xi_multiply(&zero_top, 0);
        assert_eq!(truncate(&t, 3).coeffs(), &t.coeffs()[..4]);
    }

    #[test]
    fn signal_velocity_examples() {
        let roots = he_roots(3);
        let m = |u: f64, th: f64| MacroState {
            rho: 1.0,
            u: vec![u],
            theta: th,
            q: vec![0.0],
            heat_flux_complete: true,
        };
        let s3 = 3f64.sqrt();
        let (l, r) = signal_velocities(&m(0.0, 1.0), &m(0.0, 1.0), 0, &roots);
        assert!((l + s3).abs() < 1e-14 && (r - s3).abs() < 1e-14);
        let (l, r) = signal_velocities(&m(2.0, 1.0), &m(0.0, 4.0), 0, &roots);
        assert!((l + 2.0 * s3).abs() < 1e-14);
        assert!((r - (2.0 + s3)).abs() < 1e-14);
        let (l2, r2) = signal_velocities(&m(2.5, 1.0), &m(0.5, 4.0), 0, &roots);
        assert!((l2 - l - 0.5).abs() < 1e-14 && (r2 - r - 0.5).abs() < 1e-14);
    }

    #[test]
    fn hll_branches() {
        let a = sample_state(3, vec![0.2], 1.0, 1);
        let b = sample_state(3, vec![0.2], 1.0, 2);
        let up_l = truncate(&xi_multiply(&a, 0), 3);
        let up_r = truncate(&xi_multiply(&b, 0), 3);
        assert_eq!(
            hll_flux(&a, &b, 0, 1.0, 2.0).unwrap().coeffs(),
            up_l.coeffs()
        );
        assert_eq!(
            hll_flux(&a, &b, 0, -2.0, -1.0).unwrap().coeffs(),
            up_r.coeffs()
        );
        for (l, r) in [(-1.0, 2.0), (1.0, 2.0), (-3.0, -0.5)] {
            let f = hll_flux(&a, &a, 0, l, r).unwrap();
            for (x, y) in f.coeffs().iter().zip(up_l.coeffs()) {
                assert!((x - y).abs() < 1e-13);
            }
        }
        assert!(matches!(
            hll_flux(&a, &b, 0, 1.0, -1.0),
            Err(Error::SignalOrder { .. })
        ));
    }

    #[test]
    fn hll_blend_assembled_by_hand() {
        let roots = he_roots(4);
        let l = GradState::maxwellian(7.0, &[0.0], 1.0, 3).unwrap();
        let r = GradState::maxwellian(1.0, &[0.0], 1.0, 3).unwrap();
        let (ll, lr) = (roots.min(), roots.max());
        let f = hll_flux(&l, &r, 0, ll, lr).unwrap();
        // xi f for a Maxwellian rho H_0 at u = 0, theta = 1 is rho H_1
        let mut want = [0.0; 4];
        want[1] = (lr * 7.0 - ll * 1.0) / (lr - ll);
        want[0] = ll * lr * (1.0 - 7.0) / (lr - ll);
        for (x, y) in f.coeffs().iter().zip(want) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn hll_mirror_symmetry() {
        // reflecting xi_j -> -xi_j maps coefficients by (-1)^{alpha_j}
        let a = sample_state(3, vec![0.3, 0.1], 1.2, 3);
        let b = sample_state(3, vec![0.3, 0.1], 1.2, 4);
        let mirror = |s: &GradState| {
            let mut u = s.u().to_vec();
            u[0] = -u[0];
            let mut m = GradState::zeros(s.order(), u, s.theta());
            for i in 0..s.coeffs().len() {
                let sign = if s.map().components(i)[0].is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                };
                m.coeffs_mut()[i] = sign * s.coeffs()[i];
            }
            m
        };
        let f = hll_flux(&a, &b, 0, -1.5, 0.7).unwrap();
        let g = hll_flux(&mirror(&b), &mirror(&a), 0, -0.7, 1.5).unwrap();
        let mg = mirror(&g);
        for (x, y) in f.coeffs().iter().zip(mg.coeffs()) {
            assert!((x + y).abs() < 1e-13);
        }
    }

    #[test]
    fn spectrum_small_cases() {
        let s3 = 3f64.sqrt();
        let ev = operator_spectrum_check(2, 1, 0, 0.0, 1.0).unwrap();
        for (x, y) in ev.iter().zip([-s3, 0.0, s3]) {
            assert!((x - y).abs() < 1e-10);
        }
        let ev = operator_spectrum_check(2, 2, 0, 0.0, 1.0).unwrap();
        for (x, y) in ev.iter().zip([-s3, -1.0, 0.0, 0.0, 1.0, s3]) {
            assert!((x - y).abs() < 1e-10);
        }
        let shifted = operator_spectrum_check(3, 2, 1, 5.0, 4.0).unwrap();
        let base = operator_spectrum_check(3, 2, 1, 0.0, 1.0).unwrap();
        for (x, y) in shifted.iter().zip(&base) {
            assert!((x - (5.0 + 2.0 * y)).abs() < 1e-9);
        }
        assert!(matches!(
            operator_spectrum_check(6, 4, 0, 0.0, 1.0),
            Err(Error::DimensionTooLarge(210))
        ));
    }
}
