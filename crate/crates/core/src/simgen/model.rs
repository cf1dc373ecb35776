use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::data::DataMatrix;
use crate::error::{Error, Result};

/// Law of the i.i.d. innovations `Z_ij`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnovationLaw {
    StandardNormal,
    /// Gamma(shape 1, scale 0.5) standardised to mean 0 and variance 1.
    /// For shape 1 this is `Exp(1) - 1` whatever the scale.
    StandardizedGamma,
}

const GAMMA_SHAPE: f64 = 1.0;
const GAMMA_SCALE: f64 = 0.5;

impl InnovationLaw {
    /// `Δ = E z⁴ - 3`.
    pub fn excess_kurtosis(self) -> f64 {
        match self {
            InnovationLaw::StandardNormal => 0.0,
            InnovationLaw::StandardizedGamma => 6.0 / GAMMA_SHAPE,
        }
    }

    /// `ω = E z³`; carried for reference, no statistic uses it.
    pub fn third_moment(self) -> f64 {
        match self {
            InnovationLaw::StandardNormal => 0.0,
            InnovationLaw::StandardizedGamma => 2.0 / GAMMA_SHAPE.sqrt(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            InnovationLaw::StandardNormal => "normal",
            InnovationLaw::StandardizedGamma => "gamma",
        }
    }

    pub(crate) fn sampler(self) -> Innovations {
        match self {
            InnovationLaw::StandardNormal => Innovations::Normal,
            InnovationLaw::StandardizedGamma => Innovations::Gamma(
                Gamma::new(GAMMA_SHAPE, GAMMA_SCALE).expect("valid gamma parameters"),
            ),
        }
    }
}

impl std::str::FromStr for InnovationLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(InnovationLaw::StandardNormal),
            "gamma" => Ok(InnovationLaw::StandardizedGamma),
            other => Err(Error::InvalidParameter(format!("unknown innovation law `{other}`"))),
        }
    }
}

pub(crate) enum Innovations {
    Normal,
    Gamma(Gamma<f64>),
}

impl Innovations {
    #[inline]
    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Innovations::Normal => StandardNormal.sample(rng),
            Innovations::Gamma(g) => {
                let mean = GAMMA_SHAPE * GAMMA_SCALE;
                let sd = GAMMA_SHAPE.sqrt() * GAMMA_SCALE;
                (g.sample(rng) - mean) / sd
            }
        }
    }
}

/// Moving-average model `X_ij = Σ_{l=0}^{k0} γ_l Z_{i,j+l}` with each row
/// driven by its own innovation vector of length `p + k0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaModelSpec {
    gammas: Vec<f64>,
    pub innovation: InnovationLaw,
    pub n: usize,
    pub p: usize,
    pub seed: u64,
}

impl MaModelSpec {
    pub fn new(
        gammas: Vec<f64>,
        innovation: InnovationLaw,
        n: usize,
        p: usize,
        seed: u64,
    ) -> Result<Self> {
        if gammas.is_empty() {
            return Err(Error::InvalidParameter("gammas must hold at least γ_0".into()));
        }
        if gammas.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidParameter("gammas must be finite".into()));
        }
        if n == 0 || p == 0 {
            return Err(Error::InvalidParameter(format!("n = {n} and p = {p} must be positive")));
        }
        Ok(Self {
            gammas,
            innovation,
            n,
            p,
            seed,
        })
    }

    /// `γ_0 = 1` followed by the given higher-order coefficients.
    pub fn with_unit_lead(
        tail: &[f64],
        innovation: InnovationLaw,
        n: usize,
        p: usize,
        seed: u64,
    ) -> Result<Self> {
        let mut gammas = vec![1.0];
        gammas.extend_from_slice(tail);
        Self::new(gammas, innovation, n, p, seed)
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    /// `k0 = len(gammas) - 1`.
    pub fn k0(&self) -> usize {
        self.gammas.len() - 1
    }

    /// The replication-`r` generator: ChaCha8 keyed by `seed`, stream `r`.
    pub fn replication_rng(&self, r: u64) -> ChaCha8Rng {
        replication_rng(self.seed, r)
    }

    /// Draws one data set; equal to replication 0.
    pub fn generate(&self) -> DataMatrix {
        self.generate_with(&mut self.replication_rng(0))
    }

    pub fn generate_with<R: Rng + ?Sized>(&self, rng: &mut R) -> DataMatrix {
        let sampler = self.innovation.sampler();
        let width = self.p + self.k0();
        let mut z = vec![0.0; width];
        let mut values = Vec::with_capacity(self.n * self.p);
        for _ in 0..self.n {
            for zj in z.iter_mut() {
                *zj = sampler.draw(rng);
            }
            for j in 0..self.p {
                let x: f64 = self
                    .gammas
                    .iter()
                    .zip(&z[j..])
                    .map(|(g, zz)| g * zz)
                    .sum();
                values.push(x);
            }
        }
        DataMatrix::from_row_major(self.n, self.p, values)
            .expect("finite model output with positive dimensions")
    }
}

/// ChaCha8 stream `r` under `seed`.
pub fn replication_rng(seed: u64, r: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r);
    rng
}
