//! Reproducible sampling of exact points.
//!
//! Points are dyadic rationals `k / 2^bits`. Because every region of interest
//! is a cone and the maps are homogeneous, samplers hand out the integer
//! numerators as `OrderedPoint<i128>`; divide by [`Sampler::scale`] to get
//! the rational point back.
//!
//! Seeding follows the usual reproducible-parallel pattern: a master seed
//! plus a per-item ChaCha stream, so results do not depend on how work is
//! split across threads.

use num_bigint::BigInt;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{in_a_raw, in_d_raw, in_gamma, in_theta_raw, MapParams, OrderedPoint};
use crate::scalar::Q;

pub const DEFAULT_BITS: u32 = 64;
/// Keeps sums of up to 64 coordinates, times small factors, inside `i128`.
pub const MAX_BITS: u32 = 96;
pub const DEFAULT_MAX_TRIES: u64 = 10_000_000;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// The bounded set points are drawn from before any region filter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Base {
    /// Sorted uniform points of `[0, 1)^n`.
    Cube,
    /// Uniform points of the ordered simplex `{sigma = 1}`.
    Simplex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Lambda,
    A,
    /// Complement of `A` in the cone.
    ComplementA,
    D,
    Theta,
    /// `Theta` minus `Gamma`: points whose first return is a genuine block.
    ThetaOutsideGamma,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::Lambda => "Lambda",
            Region::A => "A",
            Region::ComplementA => "cA",
            Region::D => "D",
            Region::Theta => "Theta",
            Region::ThetaOutsideGamma => "Theta\\Gamma",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sampler {
    bits: u32,
    base: Base,
    max_tries: u64,
}

impl Sampler {
    pub fn new(bits: u32, base: Base) -> Result<Self> {
        if bits == 0 || bits > MAX_BITS {
            return Err(Error::Parameter(format!("bit depth must be in 1..={MAX_BITS}, got {bits}")));
        }
        Ok(Sampler { bits, base, max_tries: DEFAULT_MAX_TRIES })
    }

    pub fn with_max_tries(mut self, max_tries: u64) -> Self {
        self.max_tries = max_tries.max(1);
        self
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn base(&self) -> Base {
        self.base
    }

    /// `2^bits`: the common denominator of every sampled point.
    pub fn scale(&self) -> Q {
        Q::from_integer(BigInt::from(1u8) << self.bits)
    }

    pub fn to_rational(&self, x: &OrderedPoint<i128>) -> OrderedPoint<Q> {
        x.to_rational().scaled_down(&self.scale()).expect("scale is positive")
    }

    pub fn base_point<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> OrderedPoint<i128> {
        let top: i128 = 1i128 << self.bits;
        let coords = match self.base {
            Base::Cube => {
                let mut c: Vec<i128> = (0..n).map(|_| rng.random_range(0..top)).collect();
                c.sort_unstable();
                c
            }
            Base::Simplex => {
                let mut cuts: Vec<i128> = (0..n.saturating_sub(1))
                    .map(|_| rng.random_range(0..=top))
                    .collect();
                cuts.sort_unstable();
                let mut prev = 0i128;
                let mut c: Vec<i128> = Vec::with_capacity(n);
                for cut in cuts.into_iter().chain(std::iter::once(top)) {
                    c.push(cut - prev);
                    prev = cut;
                }
                c.sort_unstable();
                c
            }
        };
        OrderedPoint::new_unchecked(coords)
    }

    /// Rejection sampling of `region` from the base set. `A` with `b = 1` is
    /// a null set and is sampled directly as `(0, ..., 0, t)`.
    pub fn draw<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        p: MapParams,
        region: Region,
    ) -> Result<OrderedPoint<i128>> {
        let n = p.dim();
        if region == Region::D && p.b() < 2 {
            return Err(Error::UnsupportedRegion("D"));
        }
        if region == Region::A && p.b() == 1 {
            let mut c = self.base_point(rng, n).into_coords();
            let total: i128 = c.iter().sum();
            c.iter_mut().for_each(|v| *v = 0);
            c[n - 1] = match self.base {
                Base::Simplex => total,
                Base::Cube => rng.random_range(0..(1i128 << self.bits)),
            };
            return Ok(OrderedPoint::new_unchecked(c));
        }
        for _ in 0..self.max_tries {
            let x = self.base_point(rng, n);
            let c = x.coords();
            let ok = match region {
                Region::Lambda => true,
                Region::A => in_a_raw(c, p.b()),
                Region::ComplementA => !in_a_raw(c, p.b()),
                Region::D => in_d_raw(c, p.a()),
                Region::Theta => in_theta_raw(c, p),
                Region::ThetaOutsideGamma => in_theta_raw(c, p) && !in_gamma(&x, p)?,
            };
            if ok {
                return Ok(x);
            }
        }
        Err(Error::SamplingExhausted { region: region.name(), tries: self.max_tries })
    }
}

/// A point with independent random denominators, for checks that should not
/// only see dyadic inputs. Coordinates lie in `[0, max_num / 1]`.
pub fn random_rational_point<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    max_den: i64,
    max_num: i64,
) -> OrderedPoint<Q> {
    let mut c: Vec<Q> = (0..n)
        .map(|_| {
            let d = rng.random_range(1..=max_den);
            let k = rng.random_range(0..=max_num * d);
            Q::new(BigInt::from(k), BigInt::from(d))
        })
        .collect();
    c.sort();
    OrderedPoint::new_unchecked(c)
}
