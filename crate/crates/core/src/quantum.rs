//! Path-mode state vectors, beam-splitter rotations and shutter measurements.
//!
//! A photon travelling through the interferometer is described by a complex
//! amplitude on each of two or three path modes. Beam splitters act as real
//! rotations on a pair of modes; a shutter is a projective measurement of one
//! mode. The deterministic engine uses the Kraus form ([`project_out`]), which
//! leaves the state sub-normalized so its squared norm is the survival
//! probability. Monte Carlo runs use [`sample_shutter`], which collapses and
//! renormalizes.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{quarter_turn_cos_sin, Scalar};

/// Probability amplitude of a single path mode.
pub type Amplitude<T> = Complex<T>;

/// Largest supported number of path modes.
pub const MAX_MODES: usize = 3;

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(Error::InvalidDimension(dim))
    }
}

/// Complex amplitudes over `dim` path modes, `dim` in {2, 3}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathState<T> {
    amps: [Amplitude<T>; MAX_MODES],
    dim: usize,
}

impl<T: Scalar> PathState<T> {
    /// The photon with certainty on `path`.
    pub fn basis(dim: usize, path: usize) -> Result<Self> {
        check_dim(dim)?;
        if path >= dim {
            return Err(Error::PathOutOfRange { index: path, dim });
        }
        let mut amps = [Complex::new(T::zero(), T::zero()); MAX_MODES];
        amps[path] = Complex::new(T::one(), T::zero());
        Ok(Self { amps, dim })
    }

    pub fn from_amplitudes(values: &[Amplitude<T>]) -> Result<Self> {
        check_dim(values.len())?;
        let mut amps = [Complex::new(T::zero(), T::zero()); MAX_MODES];
        amps[..values.len()].copy_from_slice(values);
        Ok(Self {
            amps,
            dim: values.len(),
        })
    }

    pub fn from_real(values: &[T]) -> Result<Self> {
        let amps: Vec<_> = values
            .iter()
            .map(|&re| Complex::new(re, T::zero()))
            .collect();
        Self::from_amplitudes(&amps)
    }

    fn zero(dim: usize) -> Self {
        Self {
            amps: [Complex::new(T::zero(), T::zero()); MAX_MODES],
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &[Amplitude<T>] {
        &self.amps[..self.dim]
    }

    /// `|amp[path]|^2`; zero for an out-of-range path.
    pub fn probability(&self, path: usize) -> T {
        if path < self.dim {
            self.amps[path].norm_sqr()
        } else {
            T::zero()
        }
    }

    pub fn norm2(&self) -> T {
        self.amplitudes()
            .iter()
            .fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    pub fn is_finite(&self) -> bool {
        self.amplitudes()
            .iter()
            .all(|a| a.re.is_finite() && a.im.is_finite())
    }

    /// Largest `|Im amp|`; all states built from real rotations keep this at zero.
    pub fn max_imag(&self) -> T {
        self.amplitudes()
            .iter()
            .fold(T::zero(), |acc, a| acc.max(a.im.abs()))
    }

    fn scaled(mut self, factor: T) -> Self {
        for a in &mut self.amps[..self.dim] {
            *a = a.scale(factor);
        }
        self
    }
}

/// A `dim x dim` beam-splitter operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary<T> {
    entries: [[Amplitude<T>; MAX_MODES]; MAX_MODES],
    dim: usize,
    angle: T,
}

impl<T: Scalar> Unitary<T> {
    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let mut entries = [[Complex::new(T::zero(), T::zero()); MAX_MODES]; MAX_MODES];
        for (i, row) in entries.iter_mut().enumerate().take(dim) {
            row[i] = Complex::new(T::one(), T::zero());
        }
        Ok(Self {
            entries,
            dim,
            angle: T::zero(),
        })
    }

    fn rotation_from(cos: T, sin: T, angle: T, dim: usize, block: (usize, usize)) -> Result<Self> {
        check_dim(dim)?;
        let (a, b) = block;
        if a == b || a >= dim || b >= dim {
            return Err(Error::InvalidBlock(a, b, dim));
        }
        let mut u = Self::identity(dim)?;
        u.entries[a][a] = Complex::new(cos, T::zero());
        u.entries[a][b] = Complex::new(-sin, T::zero());
        u.entries[b][a] = Complex::new(sin, T::zero());
        u.entries[b][b] = Complex::new(cos, T::zero());
        u.angle = angle;
        Ok(u)
    }

    /// Beam splitter of a chain with `cycles` stages: rotation by `pi / (2 cycles)`.
    ///
    /// The angle is derived from the integer stage count so the analytic and
    /// simulated layers see the same value.
    pub fn beam_splitter(cycles: u64, dim: usize, block: (usize, usize)) -> Result<Self> {
        if cycles == 0 {
            return Err(Error::invalid("cycles", "must be at least 1"));
        }
        let (cos, sin) = quarter_turn_cos_sin::<T>(1, cycles);
        let angle = T::FRAC_PI_2() / T::of_u64(cycles);
        Self::rotation_from(cos, sin, angle, dim, block)
    }

    /// Outer-cycle splitter: mixes paths 0 and 1 of the three-mode photon.
    pub fn outer(m: u64) -> Result<Self> {
        Self::beam_splitter(m, 3, (0, 1))
    }

    /// Inner-cycle splitter: mixes paths 1 and 2, leaving path 0 alone.
    pub fn inner(n: u64) -> Result<Self> {
        Self::beam_splitter(n, 3, (1, 2))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn angle(&self) -> T {
        self.angle
    }

    pub fn entry(&self, row: usize, col: usize) -> Amplitude<T> {
        self.entries[row][col]
    }

    /// Matrix product `self * rhs`.
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                operator: self.dim,
                state: rhs.dim,
            });
        }
        let mut out = *self;
        for r in 0..self.dim {
            for c in 0..self.dim {
                out.entries[r][c] = (0..self.dim)
                    .map(|k| self.entries[r][k] * rhs.entries[k][c])
                    .fold(Complex::new(T::zero(), T::zero()), |acc, x| acc + x);
            }
        }
        out.angle = self.angle + rhs.angle;
        Ok(out)
    }

    /// `max |(U^dagger U - I)_{ij}|`.
    pub fn unitarity_defect(&self) -> T {
        let mut worst = T::zero();
        for r in 0..self.dim {
            for c in 0..self.dim {
                let mut acc = Complex::new(T::zero(), T::zero());
                for k in 0..self.dim {
                    acc = acc + self.entries[k][r].conj() * self.entries[k][c];
                }
                if r == c {
                    acc = acc - Complex::new(T::one(), T::zero());
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }
}

/// Rotation by `theta` on the `block` pair of modes, identity elsewhere.
pub fn make_rotation<T: Scalar>(theta: T, dim: usize, block: (usize, usize)) -> Result<Unitary<T>> {
    if !theta.is_finite() {
        return Err(Error::invalid("theta", "must be finite"));
    }
    Unitary::rotation_from(theta.cos(), theta.sin(), theta, dim, block)
}

/// Matrix-vector product `U |s>`.
pub fn apply<T: Scalar>(u: &Unitary<T>, s: &PathState<T>) -> Result<PathState<T>> {
    if u.dim != s.dim {
        return Err(Error::DimensionMismatch {
            operator: u.dim,
            state: s.dim,
        });
    }
    let mut out = PathState::zero(s.dim);
    for (r, slot) in out.amps.iter_mut().enumerate().take(s.dim) {
        *slot = u.entries[r][..s.dim]
            .iter()
            .zip(&s.amps[..s.dim])
            .fold(Complex::new(T::zero(), T::zero()), |acc, (m, a)| {
                acc + m * a
            });
    }
    Ok(out)
}

/// Kraus projection onto "photon not on `blocked`".
///
/// Returns the state with the blocked amplitude removed, not renormalized,
/// and the conditional absorption probability `|amp|^2 / norm^2` (zero for a
/// zero-norm input).
pub fn project_out<T: Scalar>(s: &PathState<T>, blocked: usize) -> Result<(PathState<T>, T)> {
    if blocked >= s.dim {
        return Err(Error::PathOutOfRange {
            index: blocked,
            dim: s.dim,
        });
    }
    let pre = s.norm2();
    let hit = s.amps[blocked].norm_sqr();
    let mut post = *s;
    post.amps[blocked] = Complex::new(T::zero(), T::zero());
    let absorb = if pre > T::zero() {
        (hit / pre).min(T::one())
    } else {
        T::zero()
    };
    Ok((post, absorb))
}

/// Outcome of one sampled shutter interrogation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementRecord<T> {
    pub blocked_path: usize,
    pub absorbed: bool,
    pub pre_norm2: T,
    /// Unrenormalized weight left after the measurement; zero when absorbed.
    pub post_norm2: T,
}

/// Sampled shutter: absorbs with probability `|amp[blocked]|^2 / norm^2`.
///
/// On survival the returned state is renormalized; on absorption it is the
/// zero vector. Only `rng` is consulted, exactly one uniform draw per call.
pub fn sample_shutter<T: Scalar, R: Rng + ?Sized>(
    s: &PathState<T>,
    blocked: usize,
    rng: &mut R,
) -> Result<(MeasurementRecord<T>, PathState<T>)> {
    let pre = s.norm2();
    if pre <= T::zero() {
        return Err(Error::ZeroNorm);
    }
    let (kept, absorb) = project_out(s, blocked)?;
    let u: f64 = rng.random();
    if u < absorb.as_f64() {
        let record = MeasurementRecord {
            blocked_path: blocked,
            absorbed: true,
            pre_norm2: pre,
            post_norm2: T::zero(),
        };
        return Ok((record, PathState::zero(s.dim)));
    }
    let remaining = kept.norm2();
    let record = MeasurementRecord {
        blocked_path: blocked,
        absorbed: false,
        pre_norm2: pre,
        post_norm2: remaining,
    };
    let state = if remaining > T::zero() {
        kept.scaled(T::one() / remaining.sqrt())
    } else {
        kept
    };
    Ok((record, state))
}

/// Random stream for one Monte Carlo trial.
///
/// ChaCha8 keyed by `master_seed`, with `trial_index` selecting the stream,
/// so every trial is reproducible on its own regardless of scheduling.
pub fn trial_rng(master_seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng
}
