use serde::{Deserialize, Serialize};

/// Pointwise activation. ReLU and |·| are contractive and positively homogeneous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Abs,
    Identity,
}

impl Activation {
    pub fn apply(&self, y: f64) -> f64 {
        match self {
            Activation::Relu => y.max(0.0),
            Activation::Abs => y.abs(),
            Activation::Identity => y,
        }
    }

    /// Derivative away from the kink at 0.
    pub fn derivative(&self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Abs => y.signum(),
            Activation::Identity => 1.0,
        }
    }

    /// Whether outputs are always ≥ 0 (needed before max pooling).
    pub fn is_nonnegative(&self) -> bool {
        !matches!(self, Activation::Identity)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Abs => "abs",
            Activation::Identity => "identity",
        }
    }
}
