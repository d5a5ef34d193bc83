use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

/// Distribution of the i.i.d. innovations `z_ij`.
///
/// All four have mean zero. Variances: 1, 1, 1.2 and 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Noise {
    Normal,
    /// `Gamma(shape 4, scale 0.5) - 2`.
    CenteredGamma,
    /// Student t with 12 degrees of freedom.
    StudentT12,
    /// `NB(mean 2, dispersion 2) - 2`, variance `mu + mu^2 / phi`,
    /// drawn as a Gamma(2, 1)-Poisson mixture.
    CenteredNegBinomial,
}

impl Noise {
    pub fn mean(&self) -> f64 {
        0.0
    }

    pub fn variance(&self) -> f64 {
        match self {
            Noise::Normal | Noise::CenteredGamma => 1.0,
            Noise::StudentT12 => 1.2,
            Noise::CenteredNegBinomial => 4.0,
        }
    }

    pub fn sampler(&self) -> NoiseSampler {
        match self {
            Noise::Normal => NoiseSampler::Normal,
            Noise::CenteredGamma => NoiseSampler::Gamma(Gamma::new(4.0, 0.5).expect("valid gamma")),
            Noise::StudentT12 => NoiseSampler::T(StudentT::new(12.0).expect("valid t")),
            Noise::CenteredNegBinomial => NoiseSampler::NegBinomial(Gamma::new(2.0, 1.0).expect("valid gamma")),
        }
    }
}

pub enum NoiseSampler {
    Normal,
    Gamma(Gamma<f64>),
    T(StudentT<f64>),
    /// Poisson rate mixing distribution: shape `phi`, scale `mu / phi`.
    NegBinomial(Gamma<f64>),
}

impl NoiseSampler {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            NoiseSampler::Normal => StandardNormal.sample(rng),
            NoiseSampler::Gamma(g) => g.sample(rng) - 2.0,
            NoiseSampler::T(t) => t.sample(rng),
            NoiseSampler::NegBinomial(g) => {
                let rate: f64 = g.sample(rng);
                let count = if rate > 0.0 { Poisson::new(rate).expect("positive rate").sample(rng) } else { 0.0 };
                count - 2.0
            }
        }
    }
}
