//! Wiretap geometry and free-space FDA channel synthesis.
//!
//! An `N`-element uniform linear array sits on the x axis starting at
//! `(x0, 0)`. Bob and Eve are single-antenna nodes placed by range and angle
//! from the origin. Element `n` radiates at `f_c + Δf_n`, and the channel from
//! element `n` to node `i` at time `t` is the Friis line-of-sight response
//!
//! ```text
//! h_{i,n}(t) = λ / (4π r_{i,n}) · exp(j 2π f_n (t − r_{i,n} / c))
//! ```
//!
//! All quantities are linear SI units (Hz, m, s, W).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Radio-frequency constants shared by every element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfParams {
    carrier_frequency: f64,
    max_offset: f64,
    wave_speed: f64,
    noise_power_bob: f64,
    noise_power_eve: f64,
}

impl RfParams {
    pub fn new(
        carrier_frequency: f64,
        max_offset: f64,
        noise_power_bob: f64,
        noise_power_eve: f64,
    ) -> Result<Self> {
        Self::with_wave_speed(
            carrier_frequency,
            max_offset,
            SPEED_OF_LIGHT,
            noise_power_bob,
            noise_power_eve,
        )
    }

    pub fn with_wave_speed(
        carrier_frequency: f64,
        max_offset: f64,
        wave_speed: f64,
        noise_power_bob: f64,
        noise_power_eve: f64,
    ) -> Result<Self> {
        positive("carrier_frequency", carrier_frequency)?;
        if !(max_offset.is_finite() && max_offset >= 0.0) {
            return Err(invalid(
                "max_offset",
                format!("must be >= 0, got {max_offset}"),
            ));
        }
        positive("wave_speed", wave_speed)?;
        positive("noise_power_bob", noise_power_bob)?;
        positive("noise_power_eve", noise_power_eve)?;
        Ok(Self {
            carrier_frequency,
            max_offset,
            wave_speed,
            noise_power_bob,
            noise_power_eve,
        })
    }

    pub fn carrier_frequency(&self) -> f64 {
        self.carrier_frequency
    }

    pub fn max_offset(&self) -> f64 {
        self.max_offset
    }

    pub fn wave_speed(&self) -> f64 {
        self.wave_speed
    }

    /// Carrier wavelength `c / f_c`.
    pub fn wavelength(&self) -> f64 {
        self.wave_speed / self.carrier_frequency
    }

    pub fn noise_power(&self, node: Node) -> f64 {
        match node {
            Node::Bob => self.noise_power_bob,
            Node::Eve => self.noise_power_eve,
        }
    }
}

/// Uniform linear array along the x axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    element_count: usize,
    first_element_x: f64,
    spacing: f64,
}

impl ArrayGeometry {
    pub fn new(element_count: usize, first_element_x: f64, spacing: f64) -> Result<Self> {
        if element_count == 0 {
            return Err(invalid("element_count", "must be >= 1"));
        }
        if !first_element_x.is_finite() {
            return Err(invalid("first_element_x", "must be finite"));
        }
        positive("spacing", spacing)?;
        Ok(Self {
            element_count,
            first_element_x,
            spacing,
        })
    }

    /// Half-wavelength array with its first element at the origin.
    pub fn half_wavelength(element_count: usize, rf: &RfParams) -> Result<Self> {
        Self::new(element_count, 0.0, rf.wavelength() / 2.0)
    }

    pub fn element_count(&self) -> usize {
        self.element_count
    }

    pub fn first_element_x(&self) -> f64 {
        self.first_element_x
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Element coordinates `(x0 + (n−1) d, 0)`.
    pub fn element_positions(&self) -> Vec<(f64, f64)> {
        (0..self.element_count)
            .map(|n| (self.first_element_x + n as f64 * self.spacing, 0.0))
            .collect()
    }
}

/// Polar placement of a receiver relative to the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodePlacement {
    range: f64,
    angle: f64,
}

impl NodePlacement {
    pub fn new(range: f64, angle: f64) -> Result<Self> {
        positive("range", range)?;
        if !(0.0..=PI).contains(&angle) {
            return Err(invalid(
                "angle",
                format!("must lie in [0, pi], got {angle}"),
            ));
        }
        Ok(Self { range, angle })
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn cartesian(&self) -> (f64, f64) {
        (self.range * self.angle.cos(), self.range * self.angle.sin())
    }
}

/// Which receiver a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Bob,
    Eve,
}

impl Node {
    pub fn name(self) -> &'static str {
        match self {
            Node::Bob => "bob",
            Node::Eve => "eve",
        }
    }
}

/// One wiretap instance: RF constants, array and both receivers.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    rf: RfParams,
    array: ArrayGeometry,
    bob: NodePlacement,
    eve: NodePlacement,
    distances_bob: Vec<f64>,
    distances_eve: Vec<f64>,
}

impl Scenario {
    /// Builds the scenario, rejecting geometries where a node sits on an
    /// array element.
    pub fn new(
        rf: RfParams,
        array: ArrayGeometry,
        bob: NodePlacement,
        eve: NodePlacement,
    ) -> Result<Self> {
        let distances_bob = distances(&array, &bob, Node::Bob)?;
        let distances_eve = distances(&array, &eve, Node::Eve)?;
        Ok(Self {
            rf,
            array,
            bob,
            eve,
            distances_bob,
            distances_eve,
        })
    }

    pub fn rf(&self) -> &RfParams {
        &self.rf
    }

    pub fn array(&self) -> &ArrayGeometry {
        &self.array
    }

    pub fn placement(&self, node: Node) -> &NodePlacement {
        match node {
            Node::Bob => &self.bob,
            Node::Eve => &self.eve,
        }
    }

    pub fn element_count(&self) -> usize {
        self.array.element_count
    }

    /// Element-to-node distances `r_{i,n}`.
    pub fn propagation_distances(&self, node: Node) -> &[f64] {
        match node {
            Node::Bob => &self.distances_bob,
            Node::Eve => &self.distances_eve,
        }
    }

    /// Same geometry with a different element count.
    pub fn with_element_count(&self, element_count: usize) -> Result<Self> {
        let array = ArrayGeometry::new(
            element_count,
            self.array.first_element_x,
            self.array.spacing,
        )?;
        Self::new(self.rf, array, self.bob, self.eve)
    }

    /// Unnormalized channel `h_i(t, f)` from every element to `node`.
    pub fn channel_vector(&self, node: Node, plan: &FrequencyPlan, t: f64) -> Vec<Complex64> {
        debug_assert_eq!(plan.len(), self.element_count());
        plan.offsets()
            .iter()
            .enumerate()
            .map(|(n, &df)| self.channel_entry(node, n, df, t))
            .collect()
    }

    /// Unnormalized response of element `n` radiating at `f_c + offset`.
    pub fn channel_entry(&self, node: Node, n: usize, offset: f64, t: f64) -> Complex64 {
        let r = self.propagation_distances(node)[n];
        let amplitude = self.rf.wavelength() / (4.0 * PI * r);
        let f = self.rf.carrier_frequency + offset;
        let cycles = fractional_cycles(f, t) - fractional_cycles(f, r / self.rf.wave_speed);
        Complex64::from_polar(amplitude, 2.0 * PI * cycles)
    }

    /// Noise-normalized channel pair `ĥ_i = h_i / σ_i` at time `t`.
    pub fn channel_pair(&self, plan: &FrequencyPlan, t: f64) -> Result<ChannelPair> {
        if plan.len() != self.element_count() {
            return Err(Error::LengthMismatch {
                expected: self.element_count(),
                actual: plan.len(),
            });
        }
        let normalize = |node: Node| {
            let scale = self.rf.noise_power(node).sqrt().recip();
            self.channel_vector(node, plan, t)
                .into_iter()
                .map(|h| h * scale)
                .collect::<Vec<_>>()
        };
        Ok(ChannelPair {
            bob: normalize(Node::Bob),
            eve: normalize(Node::Eve),
            time: t,
        })
    }

    /// `‖ĥ_i‖² = Σ_n λ² / ((4π r_{i,n})² σ_i²)`, independent of `t` and the plan.
    pub fn normalized_channel_gain(&self, node: Node) -> f64 {
        let lambda = self.rf.wavelength();
        let sigma2 = self.rf.noise_power(node);
        self.propagation_distances(node)
            .iter()
            .map(|&r| {
                let a = lambda / (4.0 * PI * r);
                a * a / sigma2
            })
            .sum()
    }
}

fn distances(array: &ArrayGeometry, node: &NodePlacement, which: Node) -> Result<Vec<f64>> {
    let (nx, ny) = node.cartesian();
    array
        .element_positions()
        .into_iter()
        .enumerate()
        .map(|(n, (x, _))| {
            let r = (x - nx).hypot(ny);
            if r > 0.0 {
                Ok(r)
            } else {
                Err(Error::DegenerateGeometry {
                    node: which.name(),
                    element: n,
                    distance: r,
                })
            }
        })
        .collect()
}

/// `f·x` reduced modulo whole cycles, with the product's rounding error
/// recovered through a fused multiply-add. Keeps the carrier phase accurate
/// when `f·x` spans tens of thousands of cycles.
fn fractional_cycles(f: f64, x: f64) -> f64 {
    let product = f * x;
    let error = f.mul_add(x, -product);
    (product - product.round()) + error
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be > 0, got {value}")))
    }
}

/// Per-element frequency offsets `Δf_n ∈ [0, f_m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyPlan {
    offsets: Vec<f64>,
}

impl FrequencyPlan {
    pub fn new(offsets: Vec<f64>, max_offset: f64) -> Result<Self> {
        for (index, &value) in offsets.iter().enumerate() {
            if !(value.is_finite() && (0.0..=max_offset).contains(&value)) {
                return Err(Error::OffsetOutOfRange {
                    index,
                    value,
                    max: max_offset,
                });
            }
        }
        if offsets.is_empty() {
            return Err(invalid("offsets", "plan needs at least one element"));
        }
        Ok(Self { offsets })
    }

    /// All offsets zero: the phased-array special case.
    pub fn zeros(element_count: usize) -> Self {
        Self {
            offsets: vec![0.0; element_count],
        }
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Radiated frequencies `f_c + Δf_n`.
    pub fn frequencies(&self, carrier_frequency: f64) -> Vec<f64> {
        self.offsets
            .iter()
            .map(|df| carrier_frequency + df)
            .collect()
    }

    // Callers keep the value within [0, f_m].
    pub(crate) fn set_offset(&mut self, index: usize, value: f64) {
        self.offsets[index] = value;
    }
}

/// Noise-normalized Bob and Eve channels at one time instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPair {
    pub bob: Vec<Complex64>,
    pub eve: Vec<Complex64>,
    pub time: f64,
}

impl ChannelPair {
    pub fn new(bob: Vec<Complex64>, eve: Vec<Complex64>) -> Result<Self> {
        if bob.len() != eve.len() {
            return Err(Error::LengthMismatch {
                expected: bob.len(),
                actual: eve.len(),
            });
        }
        if bob.is_empty() {
            return Err(invalid("channel", "vectors must be non-empty"));
        }
        Ok(Self {
            bob,
            eve,
            time: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.bob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bob.is_empty()
    }

    /// `‖ĥ_b‖²`
    pub fn bob_gain(&self) -> f64 {
        norm_sqr(&self.bob)
    }

    /// `‖ĥ_e‖²`
    pub fn eve_gain(&self) -> f64 {
        norm_sqr(&self.eve)
    }

    /// `ĥ_e^H ĥ_b`
    pub fn cross(&self) -> Complex64 {
        inner(&self.eve, &self.bob)
    }

    /// Coupling `|ĥ_e^H ĥ_b|²`.
    pub fn coupling(&self) -> f64 {
        self.cross().norm_sqr()
    }
}

/// `a^H b`
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}
