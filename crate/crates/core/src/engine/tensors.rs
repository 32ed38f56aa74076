use std::iter::Sum;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::expr::{Point, Tracked};

pub type M2<T> = [[T; 2]; 2];
pub type T3<T> = [[[T; 2]; 2]; 2];
pub type T4<T> = [[[[T; 2]; 2]; 2]; 2];

/// Arithmetic shared by plain and magnitude-tracked evaluation.
pub trait Scalar:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> + Sum
{
    fn constant(c: f64) -> Self;
    fn value(self) -> f64;

    fn half(self) -> Self {
        self * Self::constant(0.5)
    }
}

impl Scalar for f64 {
    fn constant(c: f64) -> f64 {
        c
    }
    fn value(self) -> f64 {
        self
    }
}

impl Scalar for Tracked {
    fn constant(c: f64) -> Tracked {
        Tracked::exact(c)
    }
    fn value(self) -> f64 {
        self.v
    }
    fn half(self) -> Tracked {
        self.scale(0.5)
    }
}

pub fn delta<T: Scalar>(i: usize, j: usize) -> T {
    T::constant(if i == j { 1.0 } else { 0.0 })
}

fn map2<T, U>(a: &M2<T>, f: &mut impl FnMut(&T) -> U) -> M2<U> {
    [[f(&a[0][0]), f(&a[0][1])], [f(&a[1][0]), f(&a[1][1])]]
}

fn map3<T, U>(a: &T3<T>, f: &mut impl FnMut(&T) -> U) -> T3<U> {
    [map2(&a[0], f), map2(&a[1], f)]
}

fn map4<T, U>(a: &T4<T>, f: &mut impl FnMut(&T) -> U) -> T4<U> {
    [map3(&a[0], f), map3(&a[1], f)]
}

fn map1<T, U>(a: &[T; 2], f: &mut impl FnMut(&T) -> U) -> [U; 2] {
    [f(&a[0]), f(&a[1])]
}

/// Jacobians f̄ⁱⱼ = ∂fⁱ/∂xʲ, f̃ⁱⱼ = ∂fⁱ/∂yʲ and their inverses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobianPair<T = f64> {
    pub f_bar: M2<T>,
    pub f_tilde: M2<T>,
    pub g_bar: M2<T>,
    pub g_tilde: M2<T>,
    pub det_bar: T,
    pub det_tilde: T,
}

/// Γⁱⱼₖ stored as `gamma[i][j][k]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChernConnection<T = f64> {
    pub gamma: T3<T>,
}

/// aⁱⱼₖ stored as `a_jk_i[i][j][k]`, and the covector (a₁, a₂).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorsionData<T = f64> {
    pub a_jk_i: T3<T>,
    pub a: [T; 2],
}

/// bⁱⱼₖₗ stored as `b[i][j][k][l]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureTensor<T = f64> {
    pub b: T4<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PfaffianDerivatives<T = f64> {
    pub p_ij: M2<T>,
    pub q_ij: M2<T>,
    pub p: T,
    pub q: T,
}

/// p⁽¹⁾ᵢ, p⁽²⁾ᵢ, q⁽¹⁾ᵢ, q⁽²⁾ᵢ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderPfaffian<T = f64> {
    pub p1: [T; 2],
    pub p2: [T; 2],
    pub q1: [T; 2],
    pub q2: [T; 2],
}

/// Components of ∇pᵢⱼ and ∇qᵢⱼ; `p1[i][j][k]` is the ω₁ᵏ coefficient of ∇pᵢⱼ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovariantPQ<T = f64> {
    pub p1: T3<T>,
    pub p2: T3<T>,
    pub q1: T3<T>,
    pub q2: T3<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameInvariants<T = f64> {
    pub point: Point,
    pub jac: JacobianPair<T>,
    pub gamma: ChernConnection<T>,
    pub torsion: TorsionData<T>,
    pub curvature: CurvatureTensor<T>,
    pub pq: PfaffianDerivatives<T>,
    pub pq2: SecondOrderPfaffian<T>,
    pub cov_pq: CovariantPQ<T>,
}

impl<T> FrameInvariants<T> {
    /// Applies `f` to every component in a fixed order.
    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> FrameInvariants<U> {
        let f = &mut f;
        let jac = JacobianPair {
            f_bar: map2(&self.jac.f_bar, f),
            f_tilde: map2(&self.jac.f_tilde, f),
            g_bar: map2(&self.jac.g_bar, f),
            g_tilde: map2(&self.jac.g_tilde, f),
            det_bar: f(&self.jac.det_bar),
            det_tilde: f(&self.jac.det_tilde),
        };
        let gamma = ChernConnection {
            gamma: map3(&self.gamma.gamma, f),
        };
        let torsion = TorsionData {
            a_jk_i: map3(&self.torsion.a_jk_i, f),
            a: map1(&self.torsion.a, f),
        };
        let curvature = CurvatureTensor {
            b: map4(&self.curvature.b, f),
        };
        let pq = PfaffianDerivatives {
            p_ij: map2(&self.pq.p_ij, f),
            q_ij: map2(&self.pq.q_ij, f),
            p: f(&self.pq.p),
            q: f(&self.pq.q),
        };
        let pq2 = SecondOrderPfaffian {
            p1: map1(&self.pq2.p1, f),
            p2: map1(&self.pq2.p2, f),
            q1: map1(&self.pq2.q1, f),
            q2: map1(&self.pq2.q2, f),
        };
        let cov_pq = CovariantPQ {
            p1: map3(&self.cov_pq.p1, f),
            p2: map3(&self.cov_pq.p2, f),
            q1: map3(&self.cov_pq.q1, f),
            q2: map3(&self.cov_pq.q2, f),
        };
        FrameInvariants {
            point: self.point,
            jac,
            gamma,
            torsion,
            curvature,
            pq,
            pq2,
            cov_pq,
        }
    }

    pub fn components(&self) -> Vec<T>
    where
        T: Clone,
    {
        let mut out = Vec::new();
        self.map(|x| out.push(x.clone()));
        out
    }

    /// Rebuilds a record with the layout of `self` from values in
    /// [`components`](Self::components) order.
    pub fn relayout<U: Clone>(&self, values: &[U], point: Point) -> FrameInvariants<U> {
        let mut it = values.iter();
        let mut out = self.map(|_| it.next().expect("component count mismatch").clone());
        out.point = point;
        out
    }
}

impl FrameInvariants<Tracked> {
    pub fn values(&self) -> FrameInvariants<f64> {
        self.map(|t| t.v)
    }
}
