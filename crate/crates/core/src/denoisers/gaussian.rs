//! Gaussian target distributions over flattened latents.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latent::{Dims, LatentVideo};
use crate::rng::RngStream;

const PSD_TOL: f64 = 1e-9;

/// Covariance of a [`GaussianSpec`]. `Ar1Temporal` makes the frames at every
/// `(c, h, w)` site a stationary AR(1) sequence: lag-`k` correlation `ρ^k`,
/// marginal variance `frame_variance`, independent across sites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Covariance {
    Isotropic { variance: f64 },
    Diagonal { variances: Vec<f64> },
    Full { matrix: Vec<Vec<f64>> },
    Ar1Temporal { rho: f64, frame_variance: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    dims: Dims,
    mean: Vec<f64>,
    covariance: Covariance,
}

impl GaussianSpec {
    /// An empty `mean` stands for the zero vector.
    pub fn new(dims: Dims, mean: Vec<f64>, covariance: Covariance) -> Result<Self> {
        dims.validate()?;
        let n = dims.len();
        let mean = if mean.is_empty() { vec![0.0; n] } else { mean };
        if mean.len() != n {
            return Err(Error::InvalidShape(format!(
                "mean has {} entries, dims {dims} need {n}",
                mean.len()
            )));
        }
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::param("mean", "non-finite entry"));
        }
        match &covariance {
            Covariance::Isotropic { variance } => check_variance("variance", *variance)?,
            Covariance::Diagonal { variances } => {
                if variances.len() != n {
                    return Err(Error::InvalidShape(format!(
                        "{} variances for {n} entries",
                        variances.len()
                    )));
                }
                for &v in variances {
                    check_variance("variances", v)?;
                }
            }
            Covariance::Full { matrix } => {
                if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
                    return Err(Error::InvalidShape(format!(
                        "covariance matrix must be {n}x{n}"
                    )));
                }
                let m = to_dmatrix(matrix);
                check_psd(&m)?;
            }
            Covariance::Ar1Temporal {
                rho,
                frame_variance,
            } => {
                if !(rho.abs() < 1.0) {
                    return Err(Error::param("rho", format!("|rho| must be < 1, got {rho}")));
                }
                check_variance("frame_variance", *frame_variance)?;
            }
        }
        Ok(Self {
            dims,
            mean,
            covariance,
        })
    }

    pub fn standard_normal(dims: Dims) -> Result<Self> {
        Self::new(dims, Vec::new(), Covariance::Isotropic { variance: 1.0 })
    }

    /// A video target whose frames are i.i.d. copies of `frame`.
    pub fn iid_frames(frame: &GaussianSpec, frames: usize) -> Result<Self> {
        if frame.dims.frames != 1 {
            return Err(Error::InvalidShape(format!(
                "frame target must have one frame, got {}",
                frame.dims
            )));
        }
        let dims = Dims { frames, ..frame.dims };
        let mean = frame.mean.repeat(frames);
        let covariance = match &frame.covariance {
            Covariance::Isotropic { variance } => Covariance::Isotropic {
                variance: *variance,
            },
            Covariance::Diagonal { variances } => Covariance::Diagonal {
                variances: variances.repeat(frames),
            },
            Covariance::Ar1Temporal { frame_variance, .. } => Covariance::Isotropic {
                variance: *frame_variance,
            },
            Covariance::Full { matrix } => {
                let k = matrix.len();
                let n = k * frames;
                let mut full = vec![vec![0.0; n]; n];
                for f in 0..frames {
                    for i in 0..k {
                        full[f * k + i][f * k..(f + 1) * k].copy_from_slice(&matrix[i]);
                    }
                }
                Covariance::Full { matrix: full }
            }
        };
        Self::new(dims, mean, covariance)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &Covariance {
        &self.covariance
    }

    /// Marginal distribution of frame `f`.
    pub fn frame_marginal(&self, f: usize) -> Result<GaussianSpec> {
        if f >= self.dims.frames {
            return Err(Error::param(
                "frame",
                format!("{f} out of range for {} frames", self.dims.frames),
            ));
        }
        let k = self.dims.frame_len();
        let range = f * k..(f + 1) * k;
        let mean = self.mean[range.clone()].to_vec();
        let covariance = match &self.covariance {
            Covariance::Isotropic { variance } => Covariance::Isotropic {
                variance: *variance,
            },
            Covariance::Diagonal { variances } => Covariance::Diagonal {
                variances: variances[range].to_vec(),
            },
            Covariance::Full { matrix } => Covariance::Full {
                matrix: matrix[range.clone()]
                    .iter()
                    .map(|row| row[range.clone()].to_vec())
                    .collect(),
            },
            Covariance::Ar1Temporal { frame_variance, .. } => Covariance::Isotropic {
                variance: *frame_variance,
            },
        };
        GaussianSpec::new(self.dims.single_frame(), mean, covariance)
    }

    /// Per-entry variances.
    pub fn variances(&self) -> Vec<f64> {
        let n = self.dims.len();
        match &self.covariance {
            Covariance::Isotropic { variance } => vec![*variance; n],
            Covariance::Diagonal { variances } => variances.clone(),
            Covariance::Full { matrix } => (0..n).map(|i| matrix[i][i]).collect(),
            Covariance::Ar1Temporal { frame_variance, .. } => vec![*frame_variance; n],
        }
    }

    /// Dense covariance matrix.
    pub fn covariance_matrix(&self) -> DMatrix<f64> {
        let n = self.dims.len();
        match &self.covariance {
            Covariance::Isotropic { .. } | Covariance::Diagonal { .. } => {
                DMatrix::from_diagonal(&DVector::from_vec(self.variances()))
            }
            Covariance::Full { matrix } => to_dmatrix(matrix),
            Covariance::Ar1Temporal {
                rho,
                frame_variance,
            } => {
                let k = self.dims.frame_len();
                DMatrix::from_fn(n, n, |i, j| {
                    if i % k != j % k {
                        return 0.0;
                    }
                    let lag = (i / k).abs_diff(j / k) as i32;
                    frame_variance * rho.powi(lag)
                })
            }
        }
    }

    /// Draws one exact sample.
    pub fn sample(&self, rng: &mut RngStream) -> LatentVideo {
        let n = self.dims.len();
        let mut z = vec![0.0; n];
        rng.fill_standard_normal(&mut z);
        let data = match &self.covariance {
            Covariance::Isotropic { variance } => {
                let s = variance.sqrt();
                z.iter().zip(&self.mean).map(|(z, m)| m + s * z).collect()
            }
            Covariance::Diagonal { variances } => z
                .iter()
                .zip(&self.mean)
                .zip(variances)
                .map(|((z, m), v)| m + v.sqrt() * z)
                .collect(),
            Covariance::Full { matrix } => {
                let eig = SymmetricEigen::new(to_dmatrix(matrix));
                let scaled = DVector::from_iterator(
                    n,
                    z.iter()
                        .zip(eig.eigenvalues.iter())
                        .map(|(z, l)| z * l.max(0.0).sqrt()),
                );
                let x = &eig.eigenvectors * scaled;
                x.iter().zip(&self.mean).map(|(x, m)| x + m).collect()
            }
            Covariance::Ar1Temporal {
                rho,
                frame_variance,
            } => {
                // x_0 = s·z_0, x_f = ρ·x_{f−1} + s·√(1−ρ²)·z_f
                let k = self.dims.frame_len();
                let s = frame_variance.sqrt();
                let innov = s * (1.0 - rho * rho).sqrt();
                let mut x = vec![0.0; n];
                for f in 0..self.dims.frames {
                    for j in 0..k {
                        let i = f * k + j;
                        x[i] = if f == 0 {
                            s * z[i]
                        } else {
                            rho * x[i - k] + innov * z[i]
                        };
                    }
                }
                x.iter().zip(&self.mean).map(|(x, m)| x + m).collect()
            }
        };
        LatentVideo::from_vec(self.dims, data).expect("dims validated at construction")
    }
}

fn check_variance(name: &'static str, v: f64) -> Result<()> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::param(name, format!("variance must be finite and >= 0, got {v}")));
    }
    Ok(())
}

pub(crate) fn to_dmatrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

pub(crate) fn check_psd(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotPsd("matrix is not square".into()));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotPsd("non-finite entry".into()));
    }
    let scale = m.amax().max(1.0);
    for i in 0..m.nrows() {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > PSD_TOL * scale {
                return Err(Error::NotPsd(format!("asymmetric at ({i}, {j})")));
            }
        }
    }
    let min = SymmetricEigen::new(m.clone()).eigenvalues.min();
    if min < -PSD_TOL * scale {
        return Err(Error::NotPsd(format!("eigenvalue {min}")));
    }
    Ok(())
}

/// The target in a form that makes posterior-mean evaluation cheap: either
/// elementwise or through an eigenbasis of the (block) covariance.
#[derive(Clone, Debug)]
pub(crate) enum Shrinker {
    Elementwise(Vec<f64>),
    Eigen {
        vectors: DMatrix<f64>,
        values: DVector<f64>,
    },
    /// Eigenbasis of the `F×F` temporal covariance, applied at every site.
    Temporal {
        vectors: DMatrix<f64>,
        values: DVector<f64>,
        frame_len: usize,
    },
}

#[derive(Clone, Debug)]
pub(crate) struct PreparedGaussian {
    pub spec: GaussianSpec,
    shrinker: Shrinker,
}

impl PreparedGaussian {
    pub fn new(spec: GaussianSpec) -> Self {
        let shrinker = match &spec.covariance {
            Covariance::Isotropic { .. } | Covariance::Diagonal { .. } => {
                Shrinker::Elementwise(spec.variances())
            }
            Covariance::Full { matrix } => {
                let eig = SymmetricEigen::new(to_dmatrix(matrix));
                Shrinker::Eigen {
                    vectors: eig.eigenvectors,
                    values: eig.eigenvalues.map(|l| l.max(0.0)),
                }
            }
            Covariance::Ar1Temporal {
                rho,
                frame_variance,
            } => {
                let f = spec.dims.frames;
                let k = DMatrix::from_fn(f, f, |i, j| {
                    frame_variance * rho.powi(i.abs_diff(j) as i32)
                });
                let eig = SymmetricEigen::new(k);
                Shrinker::Temporal {
                    vectors: eig.eigenvectors,
                    values: eig.eigenvalues.map(|l| l.max(0.0)),
                    frame_len: spec.dims.frame_len(),
                }
            }
        };
        Self { spec, shrinker }
    }

    /// `E[s0 | s_t] = μ + √ᾱ·Σ·(ᾱΣ + (1−ᾱ)I)⁻¹·(s_t − √ᾱ·μ)`.
    pub fn posterior_mean(&self, s_t: &[f64], alpha_bar: f64) -> Vec<f64> {
        let sa = alpha_bar.sqrt();
        let gain = |var: f64| sa * var / (alpha_bar * var + (1.0 - alpha_bar));
        let mu = &self.spec.mean;
        let resid: Vec<f64> = s_t.iter().zip(mu).map(|(s, m)| s - sa * m).collect();
        let shrunk: Vec<f64> = match &self.shrinker {
            Shrinker::Elementwise(vars) => {
                resid.iter().zip(vars).map(|(r, &v)| gain(v) * r).collect()
            }
            Shrinker::Eigen { vectors, values } => {
                let mut y = vectors.tr_mul(&DVector::from_column_slice(&resid));
                for (y, &l) in y.iter_mut().zip(values.iter()) {
                    *y *= gain(l);
                }
                (vectors * y).iter().copied().collect()
            }
            Shrinker::Temporal {
                vectors,
                values,
                frame_len,
            } => {
                let frames = values.len();
                let mut out = vec![0.0; resid.len()];
                let mut site = DVector::zeros(frames);
                for j in 0..*frame_len {
                    for f in 0..frames {
                        site[f] = resid[f * frame_len + j];
                    }
                    let mut y = vectors.tr_mul(&site);
                    for (y, &l) in y.iter_mut().zip(values.iter()) {
                        *y *= gain(l);
                    }
                    let back = vectors * y;
                    for f in 0..frames {
                        out[f * frame_len + j] = back[f];
                    }
                }
                out
            }
        };
        shrunk.iter().zip(mu).map(|(s, m)| m + s).collect()
    }

    /// `ε̂ = (s_t − √ᾱ·E[s0|s_t]) / √(1−ᾱ)`.
    pub fn eps(&self, s_t: &LatentVideo, alpha_bar: f64) -> Result<LatentVideo> {
        if s_t.dims() != self.spec.dims {
            return Err(Error::InvalidShape(format!(
                "denoiser expects {}, got {}",
                self.spec.dims,
                s_t.dims()
            )));
        }
        if !(alpha_bar < 1.0) {
            return Err(Error::Domain(
                "epsilon is undefined where 1 - alpha_bar = 0".into(),
            ));
        }
        let m = self.posterior_mean(s_t.data(), alpha_bar);
        let sa = alpha_bar.sqrt();
        let sn = (1.0 - alpha_bar).sqrt();
        let data = s_t
            .data()
            .iter()
            .zip(&m)
            .map(|(s, m)| (s - sa * m) / sn)
            .collect();
        LatentVideo::from_vec(s_t.dims(), data)
    }
}
