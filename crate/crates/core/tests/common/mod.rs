//! Finite-difference reimplementation of the web invariants.
//!
//! Only values of f are used (through the plain evaluator); every derivative comes from nested central
//! differences with Richardson extrapolation. Nothing here touches the
//! symbolic machinery.

#![allow(dead_code, clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use webclass::corpus::TensorPath;
use webclass::engine::WebDefinition;
use webclass::expr::{Point, Tape};

/// Step for each differencing level. Three levels are nested, so the
/// step is kept large and the truncation error removed by extrapolation.
pub const STEP: f64 = 1e-1;

type Field<'a> = dyn Fn([f64; 4]) -> Vec<f64> + 'a;

fn shifted(x: [f64; 4], dir: usize, t: f64) -> [f64; 4] {
    let mut y = x;
    y[dir] += t;
    y
}

/// Richardson stages on top of the central difference.
pub const STAGES: usize = 4;

/// Derivative of every output of `g` along one coordinate, of order
/// 2 + 2·STAGES in the step.
pub fn derivative(g: &Field, x: [f64; 4], dir: usize, h: f64) -> Vec<f64> {
    let central = |h: f64| -> Vec<f64> {
        let (a, b) = (g(shifted(x, dir, h)), g(shifted(x, dir, -h)));
        a.iter().zip(&b).map(|(a, b)| (a - b) / (2.0 * h)).collect()
    };
    let mut table: Vec<Vec<f64>> = (0..=STAGES).map(|s| central(h / f64::powi(2.0, s as i32))).collect();
    for stage in 1..=STAGES {
        let w = f64::powi(4.0, stage as i32);
        table = table
            .windows(2)
            .map(|p| p[0].iter().zip(&p[1]).map(|(c, f)| (w * f - c) / (w - 1.0)).collect())
            .collect();
    }
    table.swap_remove(0)
}

fn inv2(m: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let d = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]
}

/// Γ, the inverse Jacobians and a at one point.
#[derive(Debug, Clone, Copy)]
pub struct Connection {
    pub gamma: [[[f64; 2]; 2]; 2],
    pub gbar: [[f64; 2]; 2],
    pub gtilde: [[f64; 2]; 2],
}

impl Connection {
    fn flat(&self) -> Vec<f64> {
        self.gamma.iter().flatten().flatten().copied().collect()
    }

    pub fn a(&self) -> [f64; 2] {
        let t = |i: usize, j: usize, k: usize| 0.5 * (self.gamma[i][j][k] - self.gamma[i][k][j]);
        [2.0 * t(1, 0, 1), -2.0 * t(0, 0, 1)]
    }
}

/// Everything the oracle produces at one point.
#[derive(Debug, Clone)]
pub struct OracleValues {
    pub gamma: [[[f64; 2]; 2]; 2],
    pub a: [f64; 2],
    pub b: [[[[f64; 2]; 2]; 2]; 2],
    pub p_ij: [[f64; 2]; 2],
    pub q_ij: [[f64; 2]; 2],
}

pub struct Oracle<'a> {
    f: Box<dyn Fn([f64; 4]) -> Vec<f64> + 'a>,
}

impl<'a> Oracle<'a> {
    pub fn new(web: &'a WebDefinition) -> Self {
        let tape = Tape::compile(web.f());
        Oracle {
            f: Box::new(move |c| tape.eval(&Point::from_coords(c)).unwrap_or_else(|_| vec![f64::NAN; 2])),
        }
    }

    /// ∂fⁱ/∂zᵈ for all i and the four coordinates d, as `[i][d]`.
    fn gradient(&self, x: [f64; 4]) -> [[f64; 4]; 2] {
        let mut g = [[0.0; 4]; 2];
        for d in 0..4 {
            let v = derivative(&*self.f, x, d, STEP);
            g[0][d] = v[0];
            g[1][d] = v[1];
        }
        g
    }

    pub fn connection(&self, x: [f64; 4]) -> Connection {
        let g = self.gradient(x);
        let fbar = [[g[0][0], g[0][1]], [g[1][0], g[1][1]]];
        let ftilde = [[g[0][2], g[0][3]], [g[1][2], g[1][3]]];
        let (gbar, gtilde) = (inv2(fbar), inv2(ftilde));
        // mixed[i][l][m] = ∂²fⁱ/∂xˡ∂yᵐ
        let xpart = |c: [f64; 4]| {
            let g = self.gradient(c);
            vec![g[0][0], g[0][1], g[1][0], g[1][1]]
        };
        let dy = [derivative(&xpart, x, 2, STEP), derivative(&xpart, x, 3, STEP)];
        let mixed = |i: usize, l: usize, m: usize| dy[m][2 * i + l];
        let mut gamma = [[[0.0; 2]; 2]; 2];
        for (i, gi) in gamma.iter_mut().enumerate() {
            for (j, gij) in gi.iter_mut().enumerate() {
                for (k, v) in gij.iter_mut().enumerate() {
                    let mut s = 0.0;
                    for l in 0..2 {
                        for m in 0..2 {
                            s -= mixed(i, l, m) * gbar[l][j] * gtilde[m][k];
                        }
                    }
                    *v = s;
                }
            }
        }
        Connection { gamma, gbar, gtilde }
    }

    pub fn values(&self, pt: &Point) -> OracleValues {
        let x = pt.coords();
        let c = self.connection(x);
        let field = |z: [f64; 4]| self.connection(z).flat();
        // dgamma[d][8 components]
        let dgamma: Vec<Vec<f64>> = (0..4).map(|d| derivative(&field, x, d, STEP)).collect();
        let dg = |d: usize, i: usize, j: usize, k: usize| dgamma[d][4 * i + 2 * j + k];
        let g = c.gamma;
        let at = |i: usize, j: usize, k: usize| 0.5 * (g[i][j][k] - g[i][k][j]);
        // frame derivatives of a Γ component along ω₁ʲ and ω₂ʲ
        let d1 = |i: usize, k: usize, l: usize, j: usize| (0..2).map(|m| dg(m, i, k, l) * c.gbar[m][j]).sum::<f64>();
        let d2 =
            |i: usize, k: usize, l: usize, j: usize| (0..2).map(|m| dg(2 + m, i, k, l) * c.gtilde[m][j]).sum::<f64>();

        let mut b = [[[[0.0; 2]; 2]; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let mut s = d1(i, k, l, j) + d1(i, j, l, k) - d2(i, k, j, l) - d2(i, k, l, j);
                        for m in 0..2 {
                            s += g[m][j][l] * g[i][k][m] - g[m][k][j] * g[i][m][l] + 2.0 * g[m][k][l] * at(i, m, j);
                        }
                        b[i][j][k][l] = 0.5 * s;
                    }
                }
            }
        }

        let a = c.a();
        // ∂a/∂zᵈ from the linear map Γ ↦ a
        let da = |i: usize, d: usize| match i {
            0 => dg(d, 1, 0, 1) - dg(d, 1, 1, 0),
            _ => -(dg(d, 0, 0, 1) - dg(d, 0, 1, 0)),
        };
        let mut p_ij = [[0.0; 2]; 2];
        let mut q_ij = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let dx: f64 = (0..2).map(|m| da(i, m) * c.gbar[m][j]).sum();
                let dy: f64 = (0..2).map(|m| da(i, 2 + m) * c.gtilde[m][j]).sum();
                p_ij[i][j] = dx - (0..2).map(|m| a[m] * g[m][j][i]).sum::<f64>();
                q_ij[i][j] = dy - (0..2).map(|m| a[m] * g[m][i][j]).sum::<f64>();
            }
        }
        OracleValues {
            gamma: g,
            a,
            b,
            p_ij,
            q_ij,
        }
    }
}

/// Flattened (name, value) pairs for comparison.
pub fn oracle_components(v: &OracleValues) -> Vec<(String, f64)> {
    let mut out = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                out.push((format!("Gamma^{}_{}{}", i + 1, j + 1, k + 1), v.gamma[i][j][k]));
            }
        }
    }
    for i in 0..2 {
        out.push((format!("a_{}", i + 1), v.a[i]));
    }
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out.push((format!("b^{}_{}{}{}", i + 1, j + 1, k + 1, l + 1), v.b[i][j][k][l]));
                }
            }
        }
    }
    for i in 0..2 {
        for j in 0..2 {
            out.push((format!("p_{}{}", i + 1, j + 1), v.p_ij[i][j]));
            out.push((format!("q_{}{}", i + 1, j + 1), v.q_ij[i][j]));
        }
    }
    out
}

/// Required first-order distance |v| / |∇v| from every determinant and
/// domain constraint to its zero set. Three nested levels reach 0.3 from
/// the point, so poles must stay further away than that.
pub const MIN_DISTANCE: f64 = 0.6;

/// Smallest estimated distance to a singular or excluded set. A rough
/// two-point gradient is enough here.
pub fn clearance(web: &WebDefinition, x: [f64; 4]) -> f64 {
    let ftape = Tape::compile(web.f());
    let constraints: Vec<_> = web.domain().iter().map(|c| c.expr.clone()).collect();
    let ctape = Tape::compile(&constraints);
    let scalars = |z: [f64; 4]| -> Vec<f64> {
        let pt = Point::from_coords(z);
        let f = |z: [f64; 4]| ftape.eval(&Point::from_coords(z)).unwrap_or_else(|_| vec![f64::NAN; 2]);
        let h = 1e-5;
        let g: Vec<Vec<f64>> = (0..4)
            .map(|d| {
                let (a, b) = (f(shifted(z, d, h)), f(shifted(z, d, -h)));
                a.iter().zip(&b).map(|(a, b)| (a - b) / (2.0 * h)).collect()
            })
            .collect();
        let mut v = vec![
            g[0][0] * g[1][1] - g[1][0] * g[0][1],
            g[2][0] * g[3][1] - g[3][0] * g[2][1],
        ];
        v.extend(ctape.eval(&pt).unwrap_or_else(|_| vec![f64::NAN; constraints.len()]));
        v
    };
    let v = scalars(x);
    let h = 1e-3;
    let grads: Vec<Vec<f64>> = (0..4)
        .map(|d| {
            let (a, b) = (scalars(shifted(x, d, h)), scalars(shifted(x, d, -h)));
            a.iter().zip(&b).map(|(a, b)| (a - b) / (2.0 * h)).collect()
        })
        .collect();
    (0..v.len())
        .map(|n| {
            let norm = grads.iter().map(|g| g[n] * g[n]).sum::<f64>().sqrt();
            if norm == 0.0 {
                f64::INFINITY
            } else {
                v[n].abs() / norm
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Random points whose clearance exceeds [`MIN_DISTANCE`].
pub fn interior_points(web: &WebDefinition, n: usize, seed: u64, halfwidth: f64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut tries = 0;
    while out.len() < n {
        tries += 1;
        assert!(tries < 100_000, "no interior points for {}", web.name());
        let x: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-halfwidth..=halfwidth));
        if clearance(web, x) >= MIN_DISTANCE {
            out.push(Point::from_coords(x));
        }
    }
    out
}

/// |e − g| / max(|g|, 1)
pub fn rel_dev(expected: f64, got: f64) -> f64 {
    (expected - got).abs() / got.abs().max(1.0)
}

/// Largest relative deviation between engine and oracle over the points.
pub fn worst_deviation(web: &WebDefinition, points: &[Point]) -> (f64, String) {
    let oracle = Oracle::new(web);
    let mut worst = (0.0, String::new());
    for pt in points {
        let got = web.compiled().eval(pt).unwrap();
        for (name, want) in oracle_components(&oracle.values(pt)) {
            let path: TensorPath = name.parse().unwrap();
            let d = rel_dev(want, path.value(&got));
            if d > worst.0 || d.is_nan() {
                worst = (d, format!("{name} at {pt}: oracle {want}, engine {}", path.value(&got)));
            }
        }
    }
    worst
}
