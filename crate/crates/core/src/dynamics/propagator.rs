//! Lindblad generator and fixed-step RK4 propagation.
//!
//! For small spaces the generator is written as a real matrix acting on the
//! coordinates of ρ in an orthonormal basis of Hermitian matrices. One RK4
//! step is then a fixed matrix polynomial in that generator, and `n` steps are
//! its `n`-th power, evaluated by repeated squaring. This is the same
//! arithmetic as stepping RK4 `n` times, just reassociated.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::fock::CMatrix;
use crate::{Error, Result};

/// Largest Hilbert dimension handled through the real superoperator.
pub const SUPEROPERATOR_MAX_DIM: usize = 36;

/// `dρ/dt = Aρ + ρA† + Σ_k L_k ρ L_k†` with `A = −iH − ½ Σ_k L_k†L_k`.
#[derive(Clone, Debug)]
pub struct Lindbladian {
    a: CMatrix,
    jumps: Vec<CMatrix>,
    jumps_adj: Vec<CMatrix>,
}

impl Lindbladian {
    /// `h` in rad/ns, jump operators already scaled by √rate (rate in 1/ns).
    pub fn new(h: &CMatrix, jumps: &[CMatrix]) -> Result<Self> {
        let d = h.nrows();
        if h.ncols() != d || jumps.iter().any(|l| l.shape() != (d, d)) {
            return Err(Error::config(
                "Hamiltonian and jump operators must share one square shape",
            ));
        }
        let mut a = h.map(|z| Complex64::new(z.im, -z.re));
        for l in jumps {
            a -= l.adjoint() * l * Complex64::new(0.5, 0.0);
        }
        Ok(Self {
            a,
            jumps: jumps.to_vec(),
            jumps_adj: jumps.iter().map(|l| l.adjoint()).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let ar = &self.a * rho;
        let mut out = &ar + ar.adjoint();
        for (l, ld) in self.jumps.iter().zip(&self.jumps_adj) {
            out += l * rho * ld;
        }
        out
    }

    /// Real `d²×d²` matrix of the generator in [`to_coords`] coordinates.
    pub fn superoperator(&self) -> DMatrix<f64> {
        let d = self.dim();
        let n = d * d;
        let mut s = DMatrix::zeros(n, n);
        let mut e = CMatrix::zeros(d, d);
        for k in 0..n {
            basis_element(d, k, &mut e);
            let col = to_coords(&self.apply(&e));
            s.set_column(k, &col);
            e.fill(Complex64::new(0.0, 0.0));
        }
        s
    }
}

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Coordinate `k` → basis element. Diagonal projectors come first, then for
/// each pair i < j the symmetric and antisymmetric combinations.
fn basis_element(d: usize, k: usize, e: &mut CMatrix) {
    if k < d {
        e[(k, k)] = Complex64::new(1.0, 0.0);
        return;
    }
    let (i, j, imag) = pair_of(d, k);
    let s = 1.0 / SQRT2;
    if imag {
        e[(i, j)] = Complex64::new(0.0, s);
        e[(j, i)] = Complex64::new(0.0, -s);
    } else {
        e[(i, j)] = Complex64::new(s, 0.0);
        e[(j, i)] = Complex64::new(s, 0.0);
    }
}

fn pair_of(d: usize, k: usize) -> (usize, usize, bool) {
    let p = (k - d) / 2;
    let imag = (k - d) % 2 == 1;
    // p enumerates (i, j), i < j, row by row.
    let mut i = 0;
    let mut rem = p;
    while rem >= d - 1 - i {
        rem -= d - 1 - i;
        i += 1;
    }
    (i, i + 1 + rem, imag)
}

/// Coordinates of the Hermitian part of `m`: `x_k = tr(E_k m)`.
pub fn to_coords(m: &CMatrix) -> DVector<f64> {
    let d = m.nrows();
    let mut x = DVector::zeros(d * d);
    for i in 0..d {
        x[i] = m[(i, i)].re;
    }
    let mut k = d;
    for i in 0..d {
        for j in i + 1..d {
            let z = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            x[k] = SQRT2 * z.re;
            x[k + 1] = SQRT2 * z.im;
            k += 2;
        }
    }
    x
}

pub fn from_coords(x: &DVector<f64>, d: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = Complex64::new(x[i], 0.0);
    }
    let mut k = d;
    for i in 0..d {
        for j in i + 1..d {
            let z = Complex64::new(x[k], x[k + 1]) / SQRT2;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    m
}

/// Number of RK4 steps of at most `max_step` covering `duration`.
pub fn step_count(duration: f64, max_step: f64) -> usize {
    if duration <= 0.0 {
        return 0;
    }
    ((duration / max_step) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

/// Piecewise propagation under one constant generator.
pub(crate) struct Evolver {
    lind: Lindbladian,
    generator: Option<DMatrix<f64>>,
    max_step: f64,
    cache: HashMap<i64, DMatrix<f64>>,
}

fn duration_key(duration: f64) -> i64 {
    // Femtosecond resolution: grid increments that differ only by rounding
    // share one propagator.
    (duration * 1e6).round() as i64
}

impl Evolver {
    pub(crate) fn new(lind: Lindbladian, max_step: f64) -> Self {
        let generator = (lind.dim() <= SUPEROPERATOR_MAX_DIM).then(|| lind.superoperator());
        Self {
            lind,
            generator,
            max_step,
            cache: HashMap::new(),
        }
    }

    pub(crate) fn uses_superoperator(&self) -> bool {
        self.generator.is_some()
    }

    /// RK4 propagator over `duration` (superoperator mode only).
    pub(crate) fn propagator(&mut self, duration: f64) -> &DMatrix<f64> {
        let key = duration_key(duration);
        if !self.cache.contains_key(&key) {
            let s = self.generator.as_ref().expect("superoperator mode");
            let n = step_count(duration, self.max_step);
            let m = if n == 0 {
                DMatrix::identity(s.nrows(), s.ncols())
            } else {
                matrix_power(&rk4_step_matrix(s, duration / n as f64), n)
            };
            self.cache.insert(key, m);
        }
        &self.cache[&key]
    }

    pub(crate) fn advance_coords(&mut self, x: &DVector<f64>, duration: f64) -> DVector<f64> {
        self.propagator(duration) * x
    }

    /// Heisenberg-picture step: `v ↦ Pᵀ v`, so that `v·x(t) = (Pᵀv)·x(0)`.
    pub(crate) fn pull_back_coords(&mut self, v: &DVector<f64>, duration: f64) -> DVector<f64> {
        self.propagator(duration).tr_mul(v)
    }

    pub(crate) fn advance(&mut self, rho: &CMatrix, duration: f64) -> CMatrix {
        if self.generator.is_some() {
            let d = rho.nrows();
            return from_coords(&self.advance_coords(&to_coords(rho), duration), d);
        }
        let n = step_count(duration, self.max_step);
        let mut r = rho.clone();
        if n == 0 {
            return r;
        }
        let h = Complex64::new(duration / n as f64, 0.0);
        let half = h * 0.5;
        for _ in 0..n {
            let k1 = self.lind.apply(&r);
            let k2 = self.lind.apply(&(&r + &k1 * half));
            let k3 = self.lind.apply(&(&r + &k2 * half));
            let k4 = self.lind.apply(&(&r + &k3 * h));
            r += (k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4) * (h / 6.0);
        }
        r
    }
}

/// `I + hS + (hS)²/2 + (hS)³/6 + (hS)⁴/24`, the classical RK4 update for a
/// linear system.
pub fn rk4_step_matrix(s: &DMatrix<f64>, h: f64) -> DMatrix<f64> {
    let n = s.nrows();
    let hs = s * h;
    let id = DMatrix::<f64>::identity(n, n);
    let mut m = &id + &hs * 0.25;
    m = &id + (&hs * m) * (1.0 / 3.0);
    m = &id + (&hs * m) * 0.5;
    &id + &hs * m
}

pub fn matrix_power(m: &DMatrix<f64>, mut n: usize) -> DMatrix<f64> {
    let mut result: Option<DMatrix<f64>> = None;
    let mut base = m.clone();
    loop {
        if n & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => &r * &base,
            });
        }
        n >>= 1;
        if n == 0 {
            break;
        }
        base = &base * &base;
    }
    result.unwrap_or_else(|| DMatrix::identity(m.nrows(), m.ncols()))
}
