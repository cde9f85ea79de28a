use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::PrivacyError;
use crate::ed::{EdBlocks, EntityKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskConfig {
    /// Largest accepted 2-norm condition number of a sampled Y or X.
    pub cond_max: f64,
    /// Resamples allowed per matrix before giving up.
    pub max_retries: usize,
    /// Entry range of the positive matrices.
    pub positive_range: (f64, f64),
    /// Entry range of the unrestricted XG/XD matrices.
    pub signed_range: (f64, f64),
    /// Range of the R diagonals.
    pub diagonal_range: (f64, f64),
}

impl Default for MaskConfig {
    fn default() -> Self {
        Self {
            cond_max: 1e6,
            max_retries: 100,
            positive_range: (0.01, 1.0),
            signed_range: (-1.0, 1.0),
            diagonal_range: (0.5, 2.0),
        }
    }
}

/// Secret matrices of one GENCO or LSE.
#[derive(Clone, Debug, PartialEq)]
pub struct EntityKeys {
    /// `n × n`, positive.
    pub y: DMatrix<f64>,
    /// `m × m`.
    pub x: DMatrix<f64>,
    /// Diagonal of `R`, length `m`.
    pub r: Vec<f64>,
}

/// Secret matrices of the ISO.
#[derive(Clone, Debug, PartialEq)]
pub struct IsoKeys {
    /// `T·(B−1)` square.
    pub y_theta: DMatrix<f64>,
    /// `T·L` square, for the forward line rows.
    pub x_l1: DMatrix<f64>,
    /// `T·L` square, for the reverse line rows.
    pub x_l2: DMatrix<f64>,
    pub r_l1: Vec<f64>,
    pub r_l2: Vec<f64>,
    /// `T·B` square, for the balance rows.
    pub x_b: DMatrix<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaskKeys {
    pub seed: u64,
    pub gencos: Vec<EntityKeys>,
    pub lses: Vec<EntityKeys>,
    pub iso: IsoKeys,
}

/// RNG stream of a party; each party draws from its own stream of the seed.
pub fn party_stream(kind: Option<EntityKind>, index: usize) -> u64 {
    let role = match kind {
        Some(EntityKind::Genco) => 1u64,
        Some(EntityKind::Lse) => 2,
        None => 3,
    };
    (role << 32) | index as u64
}

fn party_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `σ_max / σ_min`; infinite for singular or empty-rank input.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn sample_invertible(
    rng: &mut ChaCha20Rng,
    n: usize,
    range: (f64, f64),
    cfg: &MaskConfig,
    what: &str,
) -> Result<DMatrix<f64>, PrivacyError> {
    for _ in 0..=cfg.max_retries {
        let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(range.0..range.1));
        if condition_number(&m) <= cfg.cond_max {
            return Ok(m);
        }
    }
    Err(PrivacyError::KeyGenerationFailed {
        what: what.to_string(),
        retries: cfg.max_retries,
    })
}

fn sample_diagonal(rng: &mut ChaCha20Rng, n: usize, cfg: &MaskConfig) -> Vec<f64> {
    let (lo, hi) = cfg.diagonal_range;
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

impl EntityKeys {
    /// Keys for an entity with `n` variables and `m` constraint rows.
    pub fn generate(
        n: usize,
        m: usize,
        seed: u64,
        stream: u64,
        cfg: &MaskConfig,
    ) -> Result<Self, PrivacyError> {
        let mut rng = party_rng(seed, stream);
        let y = sample_invertible(&mut rng, n, cfg.positive_range, cfg, "Y")?;
        let x = sample_invertible(&mut rng, m, cfg.signed_range, cfg, "X")?;
        let r = sample_diagonal(&mut rng, m, cfg);
        Ok(Self { y, x, r })
    }

    pub fn identity(n: usize, m: usize) -> Self {
        Self {
            y: DMatrix::identity(n, n),
            x: DMatrix::identity(m, m),
            r: vec![1.0; m],
        }
    }
}

impl IsoKeys {
    pub fn generate(
        angles: usize,
        line_rows: usize,
        balance_rows: usize,
        seed: u64,
        cfg: &MaskConfig,
    ) -> Result<Self, PrivacyError> {
        let mut rng = party_rng(seed, party_stream(None, 0));
        let pos = cfg.positive_range;
        let y_theta = sample_invertible(&mut rng, angles, pos, cfg, "Ytheta")?;
        let x_l1 = sample_invertible(&mut rng, line_rows, pos, cfg, "X_l1")?;
        let x_l2 = sample_invertible(&mut rng, line_rows, pos, cfg, "X_l2")?;
        let r_l1 = sample_diagonal(&mut rng, line_rows, cfg);
        let r_l2 = sample_diagonal(&mut rng, line_rows, cfg);
        let x_b = sample_invertible(&mut rng, balance_rows, pos, cfg, "X_b")?;
        Ok(Self {
            y_theta,
            x_l1,
            x_l2,
            r_l1,
            r_l2,
            x_b,
        })
    }

    pub fn identity(angles: usize, line_rows: usize, balance_rows: usize) -> Self {
        Self {
            y_theta: DMatrix::identity(angles, angles),
            x_l1: DMatrix::identity(line_rows, line_rows),
            x_l2: DMatrix::identity(line_rows, line_rows),
            r_l1: vec![1.0; line_rows],
            r_l2: vec![1.0; line_rows],
            x_b: DMatrix::identity(balance_rows, balance_rows),
        }
    }
}

impl MaskKeys {
    pub fn identity(blocks: &EdBlocks) -> Self {
        let ent = |e: &crate::ed::EntityBlock| EntityKeys::identity(e.num_vars(), e.num_rows());
        Self {
            seed: 0,
            gencos: blocks.gencos.iter().map(ent).collect(),
            lses: blocks.lses.iter().map(ent).collect(),
            iso: IsoKeys::identity(
                blocks.iso.num_angles(),
                blocks.iso.num_line_rows(),
                blocks.iso.num_balance_rows(),
            ),
        }
    }

    /// Every matrix of the key set, labelled, for inspection.
    pub fn matrices(&self) -> Vec<(String, &DMatrix<f64>)> {
        let mut out = Vec::new();
        for (tag, list) in [("GENCO", &self.gencos), ("LSE", &self.lses)] {
            for (i, k) in list.iter().enumerate() {
                out.push((format!("Y {tag}{}", i + 1), &k.y));
                out.push((format!("X {tag}{}", i + 1), &k.x));
            }
        }
        out.push(("Ytheta".into(), &self.iso.y_theta));
        out.push(("X_l1".into(), &self.iso.x_l1));
        out.push(("X_l2".into(), &self.iso.x_l2));
        out.push(("X_b".into(), &self.iso.x_b));
        out
    }
}

/// Samples every party's keys. Identical to what each party would draw on
/// its own, since every party has a dedicated stream of `seed`.
pub fn gen_keys(blocks: &EdBlocks, seed: u64, cfg: &MaskConfig) -> Result<MaskKeys, PrivacyError> {
    let ent = |(i, e): (usize, &crate::ed::EntityBlock)| {
        EntityKeys::generate(
            e.num_vars(),
            e.num_rows(),
            seed,
            party_stream(Some(e.kind), i),
            cfg,
        )
    };
    Ok(MaskKeys {
        seed,
        gencos: blocks.gencos.iter().enumerate().map(ent).collect::<Result<_, _>>()?,
        lses: blocks.lses.iter().enumerate().map(ent).collect::<Result<_, _>>()?,
        iso: IsoKeys::generate(
            blocks.iso.num_angles(),
            blocks.iso.num_line_rows(),
            blocks.iso.num_balance_rows(),
            seed,
            cfg,
        )?,
    })
}
