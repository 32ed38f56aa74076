//! Residual vectors of tensor identities. Each function returns the
//! componentwise left-hand side minus right-hand side.

use super::tensors::*;

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

fn idx3() -> impl Iterator<Item = (usize, usize, usize)> {
    (0..8).map(|n| (n >> 2 & 1, n >> 1 & 1, n & 1))
}

fn idx4() -> impl Iterator<Item = (usize, usize, usize, usize)> {
    (0..16).map(|n| (n >> 3 & 1, n >> 2 & 1, n >> 1 & 1, n & 1))
}

/// bⁱ₍ⱼₖₗ₎, the average over all orderings of the lower indices.
pub fn sym3<T: Scalar>(b: &T4<T>, i: usize, j: usize, k: usize, l: usize) -> T {
    let idx = [j, k, l];
    let s: T = PERMS.iter().map(|p| b[i][idx[p[0]]][idx[p[1]]][idx[p[2]]]).sum();
    s * T::constant(1.0 / 6.0)
}

/// b_ij = ¾ bᵏ₍ₖᵢⱼ₎.
pub fn b_trace<T: Scalar>(b: &T4<T>) -> M2<T> {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..2).map(|k| sym3(b, k, k, i, j)).sum::<T>() * T::constant(0.75)))
}

/// ½(bⁱⱼₗₖ − bⁱₖₗⱼ) = ½(δⁱₖpⱼₗ − δⁱⱼpₖₗ)
pub fn curvature_p_relation<T: Scalar>(inv: &FrameInvariants<T>) -> Vec<T> {
    let b = &inv.curvature.b;
    let p = &inv.pq.p_ij;
    idx4()
        .map(|(i, j, k, l)| {
            (b[i][j][l][k] - b[i][k][l][j]).half() - (delta::<T>(i, k) * p[j][l] - delta::<T>(i, j) * p[k][l]).half()
        })
        .collect()
}

/// ½(bⁱⱼₖₗ − bⁱₖⱼₗ) = ½(δⁱₖqⱼₗ − δⁱⱼqₖₗ)
pub fn curvature_q_relation<T: Scalar>(inv: &FrameInvariants<T>) -> Vec<T> {
    let b = &inv.curvature.b;
    let q = &inv.pq.q_ij;
    idx4()
        .map(|(i, j, k, l)| {
            (b[i][j][k][l] - b[i][k][j][l]).half() - (delta::<T>(i, k) * q[j][l] - delta::<T>(i, j) * q[k][l]).half()
        })
        .collect()
}

/// p⁽¹⁾ᵢ[ⱼₖ] + pᵢ[ⱼaₖ] = 0
pub fn covariant_p1_relation<T: Scalar>(inv: &FrameInvariants<T>) -> Vec<T> {
    let c = &inv.cov_pq.p1;
    let p = &inv.pq.p_ij;
    let a = &inv.torsion.a;
    idx3()
        .map(|(i, j, k)| (c[i][j][k] - c[i][k][j]).half() + (p[i][j] * a[k] - p[i][k] * a[j]).half())
        .collect()
}

/// q⁽²⁾ᵢ[ⱼₖ] − qᵢ[ⱼaₖ] = 0
pub fn covariant_q2_relation<T: Scalar>(inv: &FrameInvariants<T>) -> Vec<T> {
    let c = &inv.cov_pq.q2;
    let q = &inv.pq.q_ij;
    let a = &inv.torsion.a;
    idx3()
        .map(|(i, j, k)| (c[i][j][k] - c[i][k][j]).half() - (q[i][j] * a[k] - q[i][k] * a[j]).half())
        .collect()
}

/// p⁽²⁾ᵢⱼₖ − q⁽²⁾ᵢⱼₖ + aₘbᵐᵢⱼₖ = 0, a variant that does not hold in general.
pub fn mixed_covariant_q2_form<T: Scalar>(inv: &FrameInvariants<T>) -> Vec<T> {
    let (p2, q2) = (&inv.cov_pq.p2, &inv.cov_pq.q2);
    let (a, b) = (&inv.torsion.a, &inv.curvature.b);
    idx3()
        .map(|(i, j, k)| p2[i][j][k] - q2[i][j][k] + (0..2).map(|m| a[m] * b[m][i][j][k]).sum::<T>())
        .collect()
}

/// p⁽²⁾ᵢⱼₖ − q⁽¹⁾ᵢₖⱼ − aₘbᵐᵢⱼₖ = 0
pub fn mixed_covariant_relation<T: Scalar>(inv: &FrameInvariants<T>) -> Vec<T> {
    let (p2, q1) = (&inv.cov_pq.p2, &inv.cov_pq.q1);
    let (a, b) = (&inv.torsion.a, &inv.curvature.b);
    idx3()
        .map(|(i, j, k)| p2[i][j][k] - q1[i][k][j] - (0..2).map(|m| a[m] * b[m][i][j][k]).sum::<T>())
        .collect()
}

/// aⁱⱼₖ = ½(aⱼδⁱₖ − aₖδⁱⱼ)
pub fn torsion_reconstruction<T: Scalar>(inv: &FrameInvariants<T>) -> Vec<T> {
    let at = &inv.torsion.a_jk_i;
    let a = &inv.torsion.a;
    idx3()
        .map(|(i, j, k)| at[i][j][k] - (a[j] * delta::<T>(i, k) - a[k] * delta::<T>(i, j)).half())
        .collect()
}

/// Residual of bⁱ₍ⱼₖₗ₎ = δⁱ₍ⱼbₖₗ₎ with b_kl from [`b_trace`].
pub fn transversal_geodesic_residual<T: Scalar>(inv: &FrameInvariants<T>) -> Vec<T> {
    let b = &inv.curvature.b;
    let bt = b_trace(b);
    let third = T::constant(1.0 / 3.0);
    idx4()
        .map(|(i, j, k, l)| {
            let rhs = delta::<T>(i, j) * bt[k][l] + delta::<T>(i, k) * bt[j][l] + delta::<T>(i, l) * bt[j][k];
            sym3(b, i, j, k, l) - rhs * third
        })
        .collect()
}

/// bⁱ₍ⱼₖₗ₎
pub fn symmetric_curvature<T: Scalar>(inv: &FrameInvariants<T>) -> Vec<T> {
    idx4().map(|(i, j, k, l)| sym3(&inv.curvature.b, i, j, k, l)).collect()
}

/// bⁱⱼ₍ₖₗ₎
pub fn curvature_last_pair_symmetric<T: Scalar>(inv: &FrameInvariants<T>) -> Vec<T> {
    let b = &inv.curvature.b;
    idx4()
        .map(|(i, j, k, l)| (b[i][j][k][l] + b[i][j][l][k]).half())
        .collect()
}

pub fn curvature_components<T: Scalar>(inv: &FrameInvariants<T>) -> Vec<T> {
    idx4().map(|(i, j, k, l)| inv.curvature.b[i][j][k][l]).collect()
}

/// q(q·p⁽¹⁾ᵢ − p·q⁽¹⁾ᵢ) − p(q·p⁽²⁾ᵢ − p·q⁽²⁾ᵢ) − pq(p − q)aᵢ
pub fn extension_residual<T: Scalar>(inv: &FrameInvariants<T>) -> Vec<T> {
    let (p, q) = (inv.pq.p, inv.pq.q);
    let s = &inv.pq2;
    let a = &inv.torsion.a;
    (0..2)
        .map(|i| q * (q * s.p1[i] - p * s.q1[i]) - p * (q * s.p2[i] - p * s.q2[i]) - p * q * (p - q) * a[i])
        .collect()
}
