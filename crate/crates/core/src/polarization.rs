//! Jones-calculus optics for the circular-polarization multiplexer.
//!
//! Conventions:
//! * Jones vectors are written in the horizontal/vertical linear basis.
//! * Stokes `s3 = -2 Im(ex conj(ey))`, and right circular polarization is
//!   the state with `s3 = +1`, i.e. `e_R = (1, i)/sqrt(2)` and
//!   `e_L = (1, -i)/sqrt(2)`. Swapping the handedness only relabels the
//!   two circular arms.
//!
//! The circular splitter is built the way a bench one is: a quarter-wave
//! plate at 45 degrees turns RCP/LCP into H/V, a linear PBS separates them,
//! and the adjoint plate on each output turns them back into circular light.
//!
//! A single Jones vector has two complex degrees of freedom, which is not
//! enough for four independent tributaries. [`CpdmField`] therefore carries
//! the full mode-resolved state: the circular pair and the linear pair are
//! independent tensor factors, and the RCP/LCP branches each hold one PDM
//! Jones vector.

use std::io::Write;
use std::ops::{Add, Mul};
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

/// Optical field in the H/V basis; amplitudes in sqrt(W).
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct JonesVector<T> {
    pub ex: Complex<T>,
    pub ey: Complex<T>,
}

impl<T: Real> JonesVector<T> {
    pub fn new(ex: Complex<T>, ey: Complex<T>) -> Self {
        JonesVector { ex, ey }
    }

    pub fn zero() -> Self {
        JonesVector {
            ex: Complex::new(T::zero(), T::zero()),
            ey: Complex::new(T::zero(), T::zero()),
        }
    }

    pub fn horizontal() -> Self {
        JonesVector::new(Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::zero()))
    }

    pub fn vertical() -> Self {
        JonesVector::new(Complex::new(T::zero(), T::zero()), Complex::new(T::one(), T::zero()))
    }

    /// Unit linear polarization at `azimuth_rad` from horizontal.
    pub fn linear(azimuth_rad: T) -> Self {
        JonesVector::new(
            Complex::new(azimuth_rad.cos(), T::zero()),
            Complex::new(azimuth_rad.sin(), T::zero()),
        )
    }

    /// Unit right-circular state (`s3 = +1`).
    pub fn rcp() -> Self {
        let r = T::FRAC_1_SQRT_2();
        JonesVector::new(Complex::new(r, T::zero()), Complex::new(T::zero(), r))
    }

    /// Unit left-circular state (`s3 = -1`).
    pub fn lcp() -> Self {
        let r = T::FRAC_1_SQRT_2();
        JonesVector::new(Complex::new(r, T::zero()), Complex::new(T::zero(), -r))
    }

    pub fn power(&self) -> T {
        self.ex.norm_sqr() + self.ey.norm_sqr()
    }

    /// `<self | other>`, conjugating `self`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.ex.conj() * other.ex + self.ey.conj() * other.ey
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        JonesVector::new(self.ex * c, self.ey * c)
    }

    pub fn is_finite(&self) -> bool {
        [self.ex.re, self.ex.im, self.ey.re, self.ey.im]
            .iter()
            .all(|v| v.is_finite())
    }
}

impl<T: Real> Add for JonesVector<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        JonesVector::new(self.ex + rhs.ex, self.ey + rhs.ey)
    }
}

/// 2x2 complex Jones matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JonesMatrix<T> {
    pub m: [[Complex<T>; 2]; 2],
}

impl<T: Real> JonesMatrix<T> {
    pub fn new(a: Complex<T>, b: Complex<T>, c: Complex<T>, d: Complex<T>) -> Self {
        JonesMatrix { m: [[a, b], [c, d]] }
    }

    pub fn identity() -> Self {
        let (o, z) = (Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::zero()));
        JonesMatrix::new(o, z, z, o)
    }

    pub fn rotation(theta: T) -> Self {
        let (s, c) = theta.sin_cos();
        let re = |x: T| Complex::new(x, T::zero());
        JonesMatrix::new(re(c), re(-s), re(s), re(c))
    }

    /// Outer product `|v><v|`.
    pub fn projector(v: &JonesVector<T>) -> Self {
        JonesMatrix::new(
            v.ex * v.ex.conj(),
            v.ex * v.ey.conj(),
            v.ey * v.ex.conj(),
            v.ey * v.ey.conj(),
        )
    }

    /// Ideal linear polarizer transmitting H.
    pub fn polarizer_h() -> Self {
        JonesMatrix::projector(&JonesVector::horizontal())
    }

    /// Ideal linear polarizer transmitting V.
    pub fn polarizer_v() -> Self {
        JonesMatrix::projector(&JonesVector::vertical())
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        JonesMatrix::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn apply(&self, v: &JonesVector<T>) -> JonesVector<T> {
        let m = &self.m;
        JonesVector::new(m[0][0] * v.ex + m[0][1] * v.ey, m[1][0] * v.ex + m[1][1] * v.ey)
    }

    /// Largest entry-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut worst = T::zero();
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.m[r][c] - other.m[r][c]).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self, tol: T) -> bool {
        (self.adjoint() * *self).max_abs_diff(&Self::identity()) <= tol
    }

    pub fn is_projection(&self, tol: T) -> bool {
        (*self * *self).max_abs_diff(self) <= tol
    }
}

impl<T: Real> Mul for JonesMatrix<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (&self.m, &rhs.m);
        let e = |r: usize, c: usize| a[r][0] * b[0][c] + a[r][1] * b[1][c];
        JonesMatrix::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }
}

/// Wave plate with retardance `retardance_rad` and fast axis at `fast_axis_rad`.
pub fn waveplate<T: Real>(fast_axis_rad: T, retardance_rad: T) -> JonesMatrix<T> {
    let z = Complex::new(T::zero(), T::zero());
    let o = Complex::new(T::one(), T::zero());
    let slow = Complex::from_polar(T::one(), retardance_rad);
    JonesMatrix::rotation(fast_axis_rad) * JonesMatrix::new(o, z, z, slow) * JonesMatrix::rotation(-fast_axis_rad)
}

/// Quarter-wave plate (pi/2 retardance) with fast axis at `fast_axis_rad`.
pub fn quarter_waveplate<T: Real>(fast_axis_rad: T) -> JonesMatrix<T> {
    waveplate(fast_axis_rad, T::FRAC_PI_2())
}

/// Half-wave plate (pi retardance) with fast axis at `fast_axis_rad`.
pub fn half_waveplate<T: Real>(fast_axis_rad: T) -> JonesMatrix<T> {
    waveplate(fast_axis_rad, T::PI())
}

/// Input plate of the circular splitter: maps RCP to H and LCP to V.
fn circular_to_linear<T: Real>() -> JonesMatrix<T> {
    quarter_waveplate(T::FRAC_PI_4())
}

/// Arm matrices `(RCP, LCP)` of the circular splitter, as built from a PBS
/// between a 45 degree quarter-wave plate and its adjoint.
pub fn cpbs_arm_matrices<T: Real>() -> (JonesMatrix<T>, JonesMatrix<T>) {
    let q_in = circular_to_linear::<T>();
    let q_out = q_in.adjoint();
    (
        q_out * JonesMatrix::polarizer_h() * q_in,
        q_out * JonesMatrix::polarizer_v() * q_in,
    )
}

/// Normalized or absolute Stokes parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StokesVector<T> {
    pub s0: T,
    pub s1: T,
    pub s2: T,
    pub s3: T,
}

impl<T: Real> StokesVector<T> {
    /// Divides through by `s0`; the zero field maps to all zeros.
    pub fn normalized(&self) -> Self {
        if self.s0 == T::zero() {
            return StokesVector {
                s0: T::zero(),
                s1: T::zero(),
                s2: T::zero(),
                s3: T::zero(),
            };
        }
        StokesVector {
            s0: T::one(),
            s1: self.s1 / self.s0,
            s2: self.s2 / self.s0,
            s3: self.s3 / self.s0,
        }
    }

    pub fn degree_of_polarization(&self) -> T {
        (self.s1 * self.s1 + self.s2 * self.s2 + self.s3 * self.s3).sqrt() / self.s0
    }
}

pub fn stokes_params<T: Real>(v: &JonesVector<T>) -> StokesVector<T> {
    let cross = v.ex * v.ey.conj();
    let two = T::lit(2.0);
    StokesVector {
        s0: v.ex.norm_sqr() + v.ey.norm_sqr(),
        s1: v.ex.norm_sqr() - v.ey.norm_sqr(),
        s2: two * cross.re,
        s3: -two * cross.im,
    }
}

/// Sampled optical field with a uniform sample rate.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarizedField<T> {
    samples: Vec<JonesVector<T>>,
    sample_rate_hz: T,
}

impl<T: Real> PolarizedField<T> {
    pub fn new(samples: Vec<JonesVector<T>>, sample_rate_hz: T) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > T::zero()) {
            return Err(Error::invalid(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        Ok(PolarizedField {
            samples,
            sample_rate_hz,
        })
    }

    pub fn zeros(len: usize, sample_rate_hz: T) -> Result<Self> {
        Self::new(vec![JonesVector::zero(); len], sample_rate_hz)
    }

    /// Scalar envelope `a[n]` riding on a fixed polarization `state`.
    pub fn from_envelope(state: JonesVector<T>, envelope: &[Complex<T>], sample_rate_hz: T) -> Result<Self> {
        Self::new(envelope.iter().map(|&a| state.scale(a)).collect(), sample_rate_hz)
    }

    pub fn samples(&self) -> &[JonesVector<T>] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [JonesVector<T>] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<JonesVector<T>> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> T {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean_power(&self) -> T {
        if self.samples.is_empty() {
            return T::zero();
        }
        self.samples.iter().map(|s| s.power()).sum::<T>() / T::from_usize_lossy(self.len())
    }

    pub fn apply_matrix(&self, m: &JonesMatrix<T>) -> Self {
        PolarizedField {
            samples: self.samples.iter().map(|s| m.apply(s)).collect(),
            sample_rate_hz: self.sample_rate_hz,
        }
    }

    pub fn ex(&self) -> Vec<Complex<T>> {
        self.samples.iter().map(|s| s.ex).collect()
    }

    pub fn ey(&self) -> Vec<Complex<T>> {
        self.samples.iter().map(|s| s.ey).collect()
    }

    /// Projection amplitudes `<state | E[n]>`.
    pub fn project(&self, state: &JonesVector<T>) -> Vec<Complex<T>> {
        self.samples.iter().map(|s| state.inner(s)).collect()
    }

    pub fn stokes_trace(&self) -> Vec<StokesVector<T>> {
        self.samples.iter().map(stokes_params).collect()
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::invalid(format!(
                "field length mismatch: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        if self.sample_rate_hz != other.sample_rate_hz {
            return Err(Error::invalid(format!(
                "sample rate mismatch: {} vs {}",
                self.sample_rate_hz, other.sample_rate_hz
            )));
        }
        Ok(())
    }
}

/// Linear PBS: H to the first port, V to the second.
pub fn pbs_split<T: Real>(field: &PolarizedField<T>) -> (PolarizedField<T>, PolarizedField<T>) {
    let zero = Complex::new(T::zero(), T::zero());
    let rate = field.sample_rate_hz;
    let h = field.samples.iter().map(|s| JonesVector::new(s.ex, zero)).collect();
    let v = field.samples.iter().map(|s| JonesVector::new(zero, s.ey)).collect();
    (
        PolarizedField {
            samples: h,
            sample_rate_hz: rate,
        },
        PolarizedField {
            samples: v,
            sample_rate_hz: rate,
        },
    )
}

/// Linear PBC: passes the H component of `h_arm` and the V component of `v_arm`.
pub fn pbc_combine<T: Real>(h_arm: &PolarizedField<T>, v_arm: &PolarizedField<T>) -> Result<PolarizedField<T>> {
    h_arm.check_compatible(v_arm)?;
    let samples = h_arm
        .samples
        .iter()
        .zip(&v_arm.samples)
        .map(|(h, v)| JonesVector::new(h.ex, v.ey))
        .collect();
    Ok(PolarizedField {
        samples,
        sample_rate_hz: h_arm.sample_rate_hz,
    })
}

/// Circular PBS: returns the RCP and LCP projections of `field`.
pub fn cpbs_split<T: Real>(field: &PolarizedField<T>) -> (PolarizedField<T>, PolarizedField<T>) {
    let (r, l) = cpbs_arm_matrices::<T>();
    (field.apply_matrix(&r), field.apply_matrix(&l))
}

/// Circular PBC: quarter-wave plates on both inputs, a linear PBC, and the
/// adjoint plate on the output. Exact inverse of [`cpbs_split`].
pub fn cpbc_combine<T: Real>(rcp_arm: &PolarizedField<T>, lcp_arm: &PolarizedField<T>) -> Result<PolarizedField<T>> {
    rcp_arm.check_compatible(lcp_arm)?;
    let q_in = circular_to_linear::<T>();
    let combined = pbc_combine(&rcp_arm.apply_matrix(&q_in), &lcp_arm.apply_matrix(&q_in))?;
    Ok(combined.apply_matrix(&q_in.adjoint()))
}

/// One of the four multiplexed tributaries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tributary {
    RcpH,
    RcpV,
    LcpH,
    LcpV,
}

impl Tributary {
    /// Transmit order: bits are split into four consecutive segments in this order.
    pub const ALL: [Tributary; 4] = [Tributary::RcpH, Tributary::RcpV, Tributary::LcpH, Tributary::LcpV];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Tributary::RcpH => "RCP-H",
            Tributary::RcpV => "RCP-V",
            Tributary::LcpH => "LCP-H",
            Tributary::LcpV => "LCP-V",
        }
    }
}

/// Mode-resolved CPDM field.
///
/// Sample `n` is a pair of Jones vectors `(u, w)`, one per linear slot of
/// the PDM branches:
///
/// ```text
/// u = e_R a_H + e_L b_H
/// w = e_R a_V + e_L b_V
/// ```
///
/// where `(a_H, a_V)` is the PDM Jones vector on the RCP branch and
/// `(b_H, b_V)` the one on the LCP branch. The circular splitter and
/// combiner act on `u` and `w` individually.
#[derive(Clone, Debug, PartialEq)]
pub struct CpdmField<T> {
    slots: [PolarizedField<T>; 2],
}

impl<T: Real> CpdmField<T> {
    /// Multiplexes two PDM branch fields through the circular combiner.
    pub fn from_branches(rcp_branch: &PolarizedField<T>, lcp_branch: &PolarizedField<T>) -> Result<Self> {
        rcp_branch.check_compatible(lcp_branch)?;
        let rate = rcp_branch.sample_rate_hz;
        let lift = |branch: &PolarizedField<T>, state: JonesVector<T>, slot_h: bool| {
            let env: Vec<Complex<T>> = branch
                .samples
                .iter()
                .map(|s| if slot_h { s.ex } else { s.ey })
                .collect();
            PolarizedField::from_envelope(state, &env, rate)
        };
        let u = cpbc_combine(
            &lift(rcp_branch, JonesVector::rcp(), true)?,
            &lift(lcp_branch, JonesVector::lcp(), true)?,
        )?;
        let w = cpbc_combine(
            &lift(rcp_branch, JonesVector::rcp(), false)?,
            &lift(lcp_branch, JonesVector::lcp(), false)?,
        )?;
        Ok(CpdmField { slots: [u, w] })
    }

    /// Demultiplexes through the circular splitter into `(rcp_branch, lcp_branch)`.
    pub fn to_branches(&self) -> (PolarizedField<T>, PolarizedField<T>) {
        let (u_r, u_l) = cpbs_split(&self.slots[0]);
        let (w_r, w_l) = cpbs_split(&self.slots[1]);
        let rate = self.sample_rate_hz();
        let rebuild = |h: &PolarizedField<T>, v: &PolarizedField<T>, state: JonesVector<T>| {
            let samples = h
                .samples
                .iter()
                .zip(&v.samples)
                .map(|(a, b)| JonesVector::new(state.inner(a), state.inner(b)))
                .collect();
            PolarizedField {
                samples,
                sample_rate_hz: rate,
            }
        };
        (
            rebuild(&u_r, &w_r, JonesVector::rcp()),
            rebuild(&u_l, &w_l, JonesVector::lcp()),
        )
    }

    pub fn slots(&self) -> &[PolarizedField<T>; 2] {
        &self.slots
    }

    pub fn slots_mut(&mut self) -> &mut [PolarizedField<T>; 2] {
        &mut self.slots
    }

    pub fn len(&self) -> usize {
        self.slots[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots[0].is_empty()
    }

    pub fn sample_rate_hz(&self) -> T {
        self.slots[0].sample_rate_hz
    }

    /// Total power of sample `n` over both slots.
    pub fn sample_power(&self, n: usize) -> T {
        self.slots[0].samples[n].power() + self.slots[1].samples[n].power()
    }

    pub fn mean_power(&self) -> T {
        self.slots[0].mean_power() + self.slots[1].mean_power()
    }

    /// Multiplies every sample by a real amplitude.
    pub fn scale(&mut self, amplitude: T) {
        let c = Complex::new(amplitude, T::zero());
        for slot in &mut self.slots {
            for s in slot.samples.iter_mut() {
                *s = s.scale(c);
            }
        }
    }

    /// Multiplies sample `n` by `amplitude(n)`.
    pub fn scale_each(&mut self, mut amplitude: impl FnMut(usize) -> T) {
        for n in 0..self.len() {
            let c = Complex::new(amplitude(n), T::zero());
            for slot in &mut self.slots {
                slot.samples[n] = slot.samples[n].scale(c);
            }
        }
    }
}

/// Writes a Stokes trace as `sample_index,s0,s1,s2,s3`.
pub fn write_stokes_csv<T: Real>(field: &PolarizedField<T>, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "sample_index,s0,s1,s2,s3")?;
        for (i, s) in field.stokes_trace().iter().enumerate() {
            writeln!(out, "{i},{:e},{:e},{:e},{:e}", s.s0, s.s1, s.s2, s.s3)?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}
