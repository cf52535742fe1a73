//! Dense complex helpers on top of nalgebra.
//!
//! Large products are routed through four real GEMMs, which nalgebra
//! dispatches to its blocked kernel; the generic complex path is much slower.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

const SMALL: usize = 24;

/// Shortest decimal that parses back to the same f64; exponent form for tiny or huge values.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Largest modulus among the entries of a complex matrix.
pub trait MaxAbs {
    fn max_abs(&self) -> f64;
}

impl<R: nalgebra::Dim, C: nalgebra::Dim, S: nalgebra::RawStorage<C64, R, C>> MaxAbs for nalgebra::Matrix<C64, R, C, S> {
    fn max_abs(&self) -> f64 {
        self.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

/// Wrap an angle into (−π, π].
pub fn wrap_pi(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Minimal distance on the circle.
pub fn circ_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

pub fn split(a: &CMat) -> (DMatrix<f64>, DMatrix<f64>) {
    (a.map(|z| z.re), a.map(|z| z.im))
}

pub fn join(re: &DMatrix<f64>, im: &DMatrix<f64>) -> CMat {
    re.zip_map(im, C64::new)
}

pub fn cmatmul(a: &CMat, b: &CMat) -> CMat {
    if a.nrows() <= SMALL && b.ncols() <= SMALL {
        return a * b;
    }
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    join(&re, &im)
}

/// e^{i s H} for Hermitian H.
pub fn expi_hermitian(h: &CMat, s: f64) -> CMat {
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let mut vd = v.clone();
    for (c, w) in eig.eigenvalues.iter().enumerate() {
        let ph = C64::from_polar(1.0, s * w);
        for r in 0..vd.nrows() {
            vd[(r, c)] *= ph;
        }
    }
    cmatmul(&vd, &v.adjoint())
}

/// Eigendecomposition of a real symmetric matrix, kept around so that
/// e^{i s V} can be applied to vectors without forming the dense exponential.
#[derive(Clone, Debug)]
pub struct RealSpectral {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl RealSpectral {
    pub fn new(v: &DMatrix<f64>) -> Self {
        let eig = v.clone().symmetric_eigen();
        RealSpectral { values: eig.eigenvalues, vectors: eig.eigenvectors }
    }

    /// Dense e^{i s V}.
    pub fn expi(&self, s: f64) -> CMat {
        let q = &self.vectors;
        let mut qc = q.clone();
        let mut qs = q.clone();
        for (c, w) in self.values.iter().enumerate() {
            let (sn, cs) = (s * w).sin_cos();
            qc.column_mut(c).scale_mut(cs);
            qs.column_mut(c).scale_mut(sn);
        }
        let qt = q.transpose();
        join(&(&qc * &qt), &(&qs * &qt))
    }

    /// e^{i s V} ψ in O(n²).
    pub fn apply_expi(&self, s: f64, psi: &CVec) -> CVec {
        let q = &self.vectors;
        let n = q.nrows();
        let mut coef = CVec::zeros(n);
        for c in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..n {
                acc += psi[r] * q[(r, c)];
            }
            coef[c] = acc * C64::from_polar(1.0, s * self.values[c]);
        }
        let mut out = CVec::zeros(n);
        for c in 0..n {
            let a = coef[c];
            for r in 0..n {
                out[r] += a * q[(r, c)];
            }
        }
        out
    }
}

/// max |U†U − 1|.
pub fn unitarity_defect(u: &CMat) -> f64 {
    let p = cmatmul(&u.adjoint(), u);
    let mut m: f64 = 0.0;
    for r in 0..p.nrows() {
        for c in 0..p.ncols() {
            let t = if r == c { p[(r, c)] - C64::new(1.0, 0.0) } else { p[(r, c)] };
            m = m.max(t.norm());
        }
    }
    m
}

/// Hermitian Cayley transform K = i (z + U)(z − U)^{-1}, z = e^{iφ}.
/// The eigenvalue e^{-iε} of U maps to κ = −cot((ε + φ)/2); the cut sits at ε = −φ.
fn cayley(u: &CMat, phi: f64) -> Result<CMat> {
    let n = u.nrows();
    let z = C64::from_polar(1.0, phi);
    let id = CMat::identity(n, n);
    let a = id.map(|x| x * z) - u;
    let b = id.map(|x| x * z) + u;
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Numerical("singular Cayley denominator".into()))?;
    Ok(x.map(|v| v * C64::new(0.0, 1.0)))
}

fn largest_gap_mid(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 0..n {
        let a = sorted[i];
        let b = if i + 1 < n { sorted[i + 1] } else { sorted[0] + 2.0 * PI };
        if b - a > best.0 {
            best = (b - a, 0.5 * (a + b));
        }
    }
    best.1
}

const CUT_CLEARANCE: f64 = 0.1;

/// Eigenpairs of a general unitary, quasienergies ε = −arg λ sorted ascending in (−π, π].
#[derive(Clone, Debug)]
pub struct UnitaryEigen {
    pub phases: Vec<f64>,
    pub vectors: CMat,
}

pub fn unitary_eigen(u: &CMat) -> Result<UnitaryEigen> {
    let mut phi = PI;
    for pass in 0..2 {
        let k = cayley(u, phi)?;
        let k = (&k + k.adjoint()).map(|x| x * 0.5);
        let eig = k.symmetric_eigen();
        let v = eig.eigenvectors;
        let mut ph: Vec<(f64, usize)> = (0..v.ncols())
            .map(|c| {
                let col = v.column(c);
                let uc = u * col;
                let lam = col.dotc(&uc);
                (wrap_pi(-lam.arg()), c)
            })
            .collect();
        ph.sort_by(|a, b| a.0.total_cmp(&b.0));
        let sorted: Vec<f64> = ph.iter().map(|p| p.0).collect();
        let clearance = sorted.iter().map(|&e| circ_dist(e, -phi)).fold(f64::INFINITY, f64::min);
        if pass == 0 && clearance < CUT_CLEARANCE && sorted.len() > 1 {
            phi = -largest_gap_mid(&sorted);
            continue;
        }
        let mut vecs = CMat::zeros(v.nrows(), v.ncols());
        for (dst, &(_, src)) in ph.iter().enumerate() {
            vecs.set_column(dst, &v.column(src));
        }
        return Ok(UnitaryEigen { phases: sorted, vectors: vecs });
    }
    unreachable!()
}

/// Real eigenframe of a complex-symmetric unitary.
#[derive(Clone, Debug)]
pub struct RealFrame {
    pub phases: Vec<f64>,
    pub vectors: DMatrix<f64>,
    /// max_n ‖U ψ_n − e^{−iε_n} ψ_n‖
    pub residual: f64,
    /// largest imaginary entry of the Cayley transform, relative to its scale
    pub imag_residual: f64,
}

pub fn symmetric_unitary_eigen(u: &CMat) -> Result<RealFrame> {
    let mut phi = PI;
    for pass in 0..2 {
        let k = cayley(u, phi)?;
        let kr = k.map(|x| x.re);
        let scale = kr.amax().max(1.0);
        let imag_residual = k.map(|x| x.im).amax() / scale;
        let kr = (&kr + kr.transpose()) * 0.5;
        let eig = kr.symmetric_eigen();
        let v = eig.eigenvectors;
        let uc = split(u);
        let ur = &uc.0 * &v;
        let ui = &uc.1 * &v;
        let mut ph: Vec<(f64, usize)> = (0..v.ncols())
            .map(|c| {
                let col = v.column(c);
                let lam = C64::new(col.dot(&ur.column(c)), col.dot(&ui.column(c)));
                (wrap_pi(-lam.arg()), c)
            })
            .collect();
        ph.sort_by(|a, b| a.0.total_cmp(&b.0));
        let sorted: Vec<f64> = ph.iter().map(|p| p.0).collect();
        let clearance = sorted.iter().map(|&e| circ_dist(e, -phi)).fold(f64::INFINITY, f64::min);
        if pass == 0 && clearance < CUT_CLEARANCE && sorted.len() > 1 {
            phi = -largest_gap_mid(&sorted);
            continue;
        }
        let mut vecs = DMatrix::zeros(v.nrows(), v.ncols());
        let mut residual: f64 = 0.0;
        for (dst, &(e, src)) in ph.iter().enumerate() {
            vecs.set_column(dst, &v.column(src));
            let lam = C64::from_polar(1.0, -e);
            let mut r2 = 0.0;
            for row in 0..v.nrows() {
                let d = C64::new(ur[(row, src)], ui[(row, src)]) - lam * v[(row, src)];
                r2 += d.norm_sqr();
            }
            residual = residual.max(r2.sqrt());
        }
        return Ok(RealFrame { phases: sorted, vectors: vecs, residual, imag_residual });
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_unitary(n: usize, seed: u64) -> CMat {
        // product of exponentials of deterministic Hermitian matrices
        let mut h = CMat::zeros(n, n);
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        for r in 0..n {
            for c in r..n {
                let z = if r == c { C64::new(next(), 0.0) } else { C64::new(next(), next()) };
                h[(r, c)] = z;
                h[(c, r)] = z.conj();
            }
        }
        expi_hermitian(&h, 3.0)
    }

    #[test]
    fn wrap_and_distance() {
        assert!((wrap_pi(-PI) - PI).abs() < 1e-15);
        assert!((wrap_pi(3.0 * PI) - PI).abs() < 1e-12);
        assert!((circ_dist(3.0, -3.0) - (2.0 * PI - 6.0)).abs() < 1e-12);
        assert!(circ_dist(PI, -PI) < 1e-15);
    }

    #[test]
    fn big_product_matches_naive() {
        let a = random_unitary(30, 1);
        let b = random_unitary(30, 2);
        let d = cmatmul(&a, &b) - &a * &b;
        assert!(d.max_abs() < 1e-12);
    }

    #[test]
    fn unitary_eigen_reconstructs() {
        for seed in 0..10 {
            let u = random_unitary(5, seed);
            assert!(unitarity_defect(&u) < 1e-12);
            let e = unitary_eigen(&u).unwrap();
            for (c, &eps) in e.phases.iter().enumerate() {
                let v = e.vectors.column(c);
                let r = &u * v - v.map(|x| x * C64::from_polar(1.0, -eps));
                assert!(r.norm() < 1e-10);
            }
        }
    }

    #[test]
    fn symmetric_unitary_gives_real_frame() {
        for seed in 0..10 {
            let u = random_unitary(4, seed + 20);
            let us = cmatmul(&u.transpose(), &u);
            let f = symmetric_unitary_eigen(&us).unwrap();
            assert!(f.residual < 1e-10, "{}", f.residual);
            let g = f.vectors.transpose() * &f.vectors;
            assert!((g - DMatrix::identity(4, 4)).amax() < 1e-10);
        }
    }

    #[test]
    fn eigenvalue_at_cut_is_handled() {
        let u = CMat::from_diagonal(&CVec::from_vec(vec![
            C64::new(-1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::from_polar(1.0, 0.3),
        ]));
        let f = symmetric_unitary_eigen(&u).unwrap();
        assert!(f.residual < 1e-12);
        assert!((f.phases[2] - PI).abs() < 1e-12);
    }

    #[test]
    fn spectral_apply_matches_dense() {
        let n = 12;
        let v = DMatrix::from_fn(n, n, |r, c| {
            let d = (r as isize - c as isize).abs();
            if d <= 2 { 1.0 / (1.0 + d as f64) + 0.01 * (r + c) as f64 } else { 0.0 }
        });
        let sp = RealSpectral::new(&v);
        let psi = CVec::from_fn(n, |r, _| C64::new(r as f64, 1.0)).normalize();
        let a = sp.apply_expi(-0.7, &psi);
        let b = sp.expi(-0.7) * &psi;
        assert!((a - b).norm() < 1e-12);
    }
}
