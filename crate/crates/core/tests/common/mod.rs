//! Independent reference computations used by the integration tests. Nothing here calls
//! the library's curvature or quadrature code.
#![allow(dead_code, clippy::needless_range_loop)]

pub type Metric3<'a> = dyn Fn(&[f64; 3]) -> [[f64; 3]; 3] + 'a;

const H: f64 = 1e-4;

fn shifted(x: &[f64; 3], k: usize, d: f64) -> [f64; 3] {
    let mut y = *x;
    y[k] += d;
    y
}

/// Central difference along coordinate `k` with one Richardson step.
fn richardson<F: Fn(&[f64; 3]) -> f64>(f: &F, x: &[f64; 3], k: usize, h: f64) -> f64 {
    let d = |h: f64| (f(&shifted(x, k, h)) - f(&shifted(x, k, -h))) / (2.0 * h);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

fn invert3(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (a, b) = ((j + 1) % 3, (j + 2) % 3);
            let (c, d) = ((i + 1) % 3, (i + 2) % 3);
            inv[i][j] = (m[a][c] * m[b][d] - m[a][d] * m[b][c]) / det;
        }
    }
    inv
}

/// `Γ^k_ij` from a numerically differentiated metric.
pub fn christoffel(g: &Metric3<'_>, x: &[f64; 3], h: f64) -> [[[f64; 3]; 3]; 3] {
    let mut dg = [[[0.0; 3]; 3]; 3]; // dg[l][i][j] = ∂_l g_ij
    for l in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                dg[l][i][j] = richardson(&|y: &[f64; 3]| g(y)[i][j], x, l, h);
            }
        }
    }
    let ginv = invert3(&g(x));
    let mut gam = [[[0.0; 3]; 3]; 3];
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for l in 0..3 {
                    s += ginv[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
                }
                gam[k][i][j] = 0.5 * s;
            }
        }
    }
    gam
}

/// Sectional curvature of the plane spanned by `∂_i, ∂_j`, from Christoffel symbols
/// differentiated numerically once more.
pub fn fd_sectional(g: &Metric3<'_>, x: &[f64; 3], i: usize, j: usize) -> f64 {
    let gam = christoffel(g, x, H);
    let dgam = |a: usize, l: usize, b: usize, c: usize| richardson(&|y: &[f64; 3]| christoffel(g, y, H)[l][b][c], x, a, H);
    // R^l_{ijj} = ∂_i Γ^l_jj − ∂_j Γ^l_ij + Γ^l_im Γ^m_jj − Γ^l_jm Γ^m_ij
    let gx = g(x);
    let mut r = 0.0;
    for l in 0..3 {
        let mut rl = dgam(i, l, j, j) - dgam(j, l, i, j);
        for m in 0..3 {
            rl += gam[l][i][m] * gam[m][j][j] - gam[l][j][m] * gam[m][i][j];
        }
        r += gx[i][l] * rl;
    }
    r / (gx[i][i] * gx[j][j] - gx[i][j] * gx[i][j])
}

/// Gaussian curvature from the first fundamental form alone (Brioschi), with all
/// derivatives of `E, F, G` taken numerically.
pub fn brioschi<F: Fn(f64, f64) -> (f64, f64, f64)>(form: F, u: f64, v: f64) -> f64 {
    let h = 1e-3;
    let c = |k: usize, a: f64, b: f64| {
        let (e, f, g) = form(a, b);
        [e, f, g][k]
    };
    let rich = |d: &dyn Fn(f64) -> f64| (4.0 * d(h / 2.0) - d(h)) / 3.0;
    let du = |k| rich(&|h| (c(k, u + h, v) - c(k, u - h, v)) / (2.0 * h));
    let dv = |k| rich(&|h| (c(k, u, v + h) - c(k, u, v - h)) / (2.0 * h));
    let duu = |k| rich(&|h| (c(k, u + h, v) - 2.0 * c(k, u, v) + c(k, u - h, v)) / (h * h));
    let dvv = |k| rich(&|h| (c(k, u, v + h) - 2.0 * c(k, u, v) + c(k, u, v - h)) / (h * h));
    let duv = |k| {
        rich(&|h| (c(k, u + h, v + h) - c(k, u + h, v - h) - c(k, u - h, v + h) + c(k, u - h, v - h)) / (4.0 * h * h))
    };
    let (e, f, g) = form(u, v);
    let (eu, ev, fu, fv, gu, gv) = (du(0), dv(0), du(1), dv(1), du(2), dv(2));
    let (evv, fuv, guu) = (dvv(0), duv(1), duu(2));
    let det3 = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let a = det3([
        [-0.5 * evv + fuv - 0.5 * guu, 0.5 * eu, fu - 0.5 * ev],
        [fv - 0.5 * gu, e, f],
        [0.5 * gv, f, g],
    ]);
    let b = det3([[0.0, 0.5 * ev, 0.5 * gu], [0.5 * ev, e, f], [0.5 * gu, f, g]]);
    (a - b) / (e * g - f * f).powi(2)
}

/// Composite trapezoid rule on `n` panels.
pub fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = 0.5 * (f(a) + f(b));
    for i in 1..n {
        s += f(a + h * i as f64);
    }
    s * h
}

/// Trapezoid on `n` and `2n` panels, combined by one Richardson step.
pub fn romberg<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let t1 = trapezoid(&f, a, b, n);
    let t2 = trapezoid(&f, a, b, 2 * n);
    (4.0 * t2 - t1) / 3.0
}

/// Second derivative by a central difference.
pub fn fd_second<F: Fn(f64) -> f64>(f: F, t: f64, h: f64) -> f64 {
    (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h)
}

/// Metric of a warped cusp `dt² + f(t)²·4|dx|²/(1−|x|²)²` in coordinates `(t, x₁, x₂)`.
pub fn warped_cusp_metric<F: Fn(f64) -> f64>(f: F) -> impl Fn(&[f64; 3]) -> [[f64; 3]; 3] {
    move |p: &[f64; 3]| {
        let r2 = p[1] * p[1] + p[2] * p[2];
        let w = f(p[0]) * 2.0 / (1.0 - r2);
        let w2 = w * w;
        [[1.0, 0.0, 0.0], [0.0, w2, 0.0], [0.0, 0.0, w2]]
    }
}
