use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimensions of a plain pre-norm vision transformer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct VitFlopsConfig {
    pub embed_dim: usize,
    pub mlp_dim: usize,
    pub layers: usize,
    pub heads: usize,
    /// Pixels along one side of a square patch.
    pub patch_size: usize,
    pub in_channels: usize,
    /// Class and register tokens added to the patch tokens.
    pub extra_tokens: usize,
    pub num_classes: usize,
    /// Gated MLP with three projections instead of two.
    pub gated_mlp: bool,
    pub include_bias: bool,
}

impl Default for VitFlopsConfig {
    fn default() -> Self {
        Self {
            embed_dim: 384,
            mlp_dim: 1536,
            layers: 12,
            heads: 6,
            patch_size: 8,
            in_channels: 3,
            extra_tokens: 5,
            num_classes: 1000,
            gated_mlp: true,
            include_bias: false,
        }
    }
}

impl VitFlopsConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("embed_dim", self.embed_dim),
            ("mlp_dim", self.mlp_dim),
            ("layers", self.layers),
            ("heads", self.heads),
            ("patch_size", self.patch_size),
            ("in_channels", self.in_channels),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| *v == 0) {
            return Err(Error::invalid(format!("{name} must be positive")));
        }
        if self.embed_dim % self.heads != 0 {
            return Err(Error::invalid(format!(
                "embed_dim {} is not divisible by {} heads",
                self.embed_dim, self.heads
            )));
        }
        Ok(())
    }

    pub fn patch_dim(&self) -> usize {
        self.in_channels * self.patch_size * self.patch_size
    }

    /// Patch tokens for an `m × m` image.
    pub fn tokens_for_resolution(&self, m: usize) -> usize {
        (m / self.patch_size).pow(2)
    }
}

/// FLOPs of one forward pass, a multiply-accumulate counted as 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlopsBreakdown {
    /// Token-mixing products `QKᵀ` and `A·V`, quadratic in the token count.
    pub attention: f64,
    /// Everything else: patch embedding, QKV and output projections, MLPs,
    /// classifier head.
    pub non_attention: f64,
}

impl FlopsBreakdown {
    pub fn total(&self) -> f64 {
        self.attention + self.non_attention
    }
}

/// Analytic FLOPs for `n_tokens` patch tokens. Normalization, softmax and
/// activation costs are ignored.
pub fn vit_flops(config: &VitFlopsConfig, n_tokens: usize) -> Result<FlopsBreakdown> {
    config.validate()?;
    if n_tokens == 0 {
        return Err(Error::invalid("token count must be positive"));
    }
    let (d, h, l) = (config.embed_dim as f64, config.mlp_dim as f64, config.layers as f64);
    let n = (n_tokens + config.extra_tokens) as f64;
    let bias = |outputs: f64| if config.include_bias { outputs } else { 0.0 };

    let attention = l * 2.0 * (2.0 * n * n * d);

    let qkv = 2.0 * n * d * 3.0 * d + bias(n * 3.0 * d);
    let proj = 2.0 * n * d * d + bias(n * d);
    let mlp = if config.gated_mlp {
        3.0 * 2.0 * n * d * h + bias(n * (2.0 * h + d))
    } else {
        2.0 * 2.0 * n * d * h + bias(n * (h + d))
    };
    let patch = 2.0 * n_tokens as f64 * config.patch_dim() as f64 * d + bias(n_tokens as f64 * d);
    let head = 2.0 * d * config.num_classes as f64 + bias(config.num_classes as f64);
    Ok(FlopsBreakdown {
        attention,
        non_attention: l * (qkv + proj + mlp) + patch + head,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlopsRow {
    pub resolution: usize,
    pub tokens: usize,
    pub fixations: usize,
    pub attention: f64,
    pub non_attention: f64,
    pub total: f64,
}

/// Cost of `f` fixations at each resolution: `f` independent forward passes.
pub fn fixation_flops_curve(config: &VitFlopsConfig, resolutions: &[usize], fixations: &[usize]) -> Result<Vec<FlopsRow>> {
    let mut rows = Vec::with_capacity(resolutions.len() * fixations.len());
    for &m in resolutions {
        let tokens = config.tokens_for_resolution(m);
        let one = vit_flops(config, tokens)?;
        for &f in fixations {
            let scale = f as f64;
            rows.push(FlopsRow {
                resolution: m,
                tokens,
                fixations: f,
                attention: scale * one.attention,
                non_attention: scale * one.non_attention,
                total: scale * one.total(),
            });
        }
    }
    Ok(rows)
}
