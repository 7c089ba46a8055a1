//! Sample statistics: moments, temporal autocorrelation, flicker, and the
//! closed-form 2-Wasserstein distance between Gaussians.
//!
//! Sums over samples go through [`pairwise_sum`] in sample order, so the
//! numbers do not depend on how many threads computed the per-entry terms.

use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::denoisers::{check_psd, GaussianSpec};
use crate::error::{Error, Result};
use crate::latent::{Dims, LatentVideo};

/// z-value of a two-sided 95% normal interval.
pub const Z95: f64 = 1.959963984540054;

/// Sum by recursive halving. Fixed association for a given length.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

fn mean_of(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

#[derive(Clone, Debug, PartialEq)]
pub enum CovarianceEstimate {
    Diagonal(Vec<f64>),
    Full(DMatrix<f64>),
}

impl CovarianceEstimate {
    pub fn variances(&self) -> Vec<f64> {
        match self {
            CovarianceEstimate::Diagonal(v) => v.clone(),
            CovarianceEstimate::Full(m) => m.diagonal().iter().copied().collect(),
        }
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        match self {
            CovarianceEstimate::Diagonal(v) => DMatrix::from_diagonal(&DVector::from_column_slice(v)),
            CovarianceEstimate::Full(m) => m.clone(),
        }
    }
}

/// Unbiased per-entry mean and covariance of a set of equally shaped videos.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSummary {
    pub dims: Dims,
    pub n: usize,
    pub mean: Vec<f64>,
    pub covariance: CovarianceEstimate,
    /// Standard error of each mean entry.
    pub std_errors: Vec<f64>,
}

fn check_samples(samples: &[LatentVideo], needed: usize) -> Result<Dims> {
    if samples.len() < needed {
        return Err(Error::InsufficientSamples {
            needed,
            got: samples.len(),
        });
    }
    let dims = samples[0].dims();
    for s in &samples[1..] {
        samples[0].ensure_same_dims(s)?;
    }
    Ok(dims)
}

/// Entry `i` of every sample, in sample order.
fn column(samples: &[LatentVideo], i: usize) -> Vec<f64> {
    samples.iter().map(|s| s.data()[i]).collect()
}

pub fn empirical_moments(samples: &[LatentVideo], full: bool) -> Result<MomentSummary> {
    let dims = check_samples(samples, 2)?;
    let n = samples.len();
    let d = dims.len();
    let nf = n as f64;

    let mean: Vec<f64> = (0..d).into_par_iter().map(|i| mean_of(&column(samples, i))).collect();
    let variances: Vec<f64> = (0..d)
        .into_par_iter()
        .map(|i| {
            let sq: Vec<f64> = column(samples, i).iter().map(|x| (x - mean[i]).powi(2)).collect();
            pairwise_sum(&sq) / (nf - 1.0)
        })
        .collect();
    let std_errors = variances.iter().map(|v| (v / nf).sqrt()).collect();

    let covariance = if full {
        let centered = DMatrix::from_fn(n, d, |r, c| samples[r].data()[c] - mean[c]);
        let mut cov = centered.tr_mul(&centered) / (nf - 1.0);
        for i in 0..d {
            cov[(i, i)] = variances[i];
        }
        cov = (&cov + cov.transpose()) * 0.5;
        CovarianceEstimate::Full(cov)
    } else {
        CovarianceEstimate::Diagonal(variances)
    };

    Ok(MomentSummary {
        dims,
        n,
        mean,
        covariance,
        std_errors,
    })
}

/// Pearson correlation between frame `f` and frame `f + lag`, pooled over
/// sites, frame pairs and samples, after centering each `(f, c, h, w)` entry
/// across samples.
pub fn temporal_autocorr(samples: &[LatentVideo], lag: usize) -> Result<f64> {
    Ok(autocorr_parts(samples, lag)?.0)
}

/// Correlation and the number of pooled pairs.
fn autocorr_parts(samples: &[LatentVideo], lag: usize) -> Result<(f64, usize)> {
    let dims = check_samples(samples, 2)?;
    if lag >= dims.frames {
        return Err(Error::param(
            "lag",
            format!("lag {lag} must be below the frame count {}", dims.frames),
        ));
    }
    let d = dims.len();
    let fl = dims.frame_len();
    let mean: Vec<f64> = (0..d).into_par_iter().map(|i| mean_of(&column(samples, i))).collect();
    let pairs = (dims.frames - lag) * fl;

    // Per-sample sums of a·b, a², b², then pairwise across samples.
    let per_sample: Vec<[f64; 3]> = samples
        .par_iter()
        .map(|s| {
            let x = s.data();
            let mut ab = Vec::with_capacity(pairs);
            let mut aa = Vec::with_capacity(pairs);
            let mut bb = Vec::with_capacity(pairs);
            for i in 0..pairs {
                let a = x[i] - mean[i];
                let b = x[i + lag * fl] - mean[i + lag * fl];
                ab.push(a * b);
                aa.push(a * a);
                bb.push(b * b);
            }
            [pairwise_sum(&ab), pairwise_sum(&aa), pairwise_sum(&bb)]
        })
        .collect();
    let total = |k: usize| pairwise_sum(&per_sample.iter().map(|p| p[k]).collect::<Vec<_>>());
    let (ab, aa, bb) = (total(0), total(1), total(2));
    if aa == 0.0 || bb == 0.0 {
        return Err(Error::Domain("zero variance, correlation undefined".into()));
    }
    Ok((ab / (aa * bb).sqrt(), pairs * samples.len()))
}

/// Mean of `|x[f+1] − x[f]|` over frames and the `(c, h, w)` sites selected
/// by `mask` (all sites when `None`). The mask is laid out like one frame.
pub fn flicker_metric(x: &LatentVideo, mask: Option<&[bool]>) -> Result<f64> {
    let dims = x.dims();
    if dims.frames < 2 {
        return Err(Error::InvalidShape(format!(
            "flicker needs at least 2 frames, got {}",
            dims.frames
        )));
    }
    let fl = dims.frame_len();
    if let Some(m) = mask {
        if m.len() != fl {
            return Err(Error::InvalidShape(format!(
                "mask has {} entries, a frame has {fl}",
                m.len()
            )));
        }
        if !m.iter().any(|&b| b) {
            return Err(Error::param("mask", "selects no sites"));
        }
    }
    let data = x.data();
    let mut diffs = Vec::with_capacity((dims.frames - 1) * fl);
    for f in 0..dims.frames - 1 {
        for i in 0..fl {
            if mask.is_none_or(|m| m[i]) {
                diffs.push((data[(f + 1) * fl + i] - data[f * fl + i]).abs());
            }
        }
    }
    Ok(mean_of(&diffs))
}

fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose()
}

/// 2-Wasserstein distance between `N(mu1, cov1)` and `N(mu2, cov2)`.
pub fn gaussian_w2(mu1: &[f64], cov1: &DMatrix<f64>, mu2: &[f64], cov2: &DMatrix<f64>) -> Result<f64> {
    let d = mu1.len();
    if mu2.len() != d || cov1.shape() != (d, d) || cov2.shape() != (d, d) {
        return Err(Error::InvalidShape(format!(
            "w2 operands disagree: means {} and {}, covariances {:?} and {:?}",
            d,
            mu2.len(),
            cov1.shape(),
            cov2.shape()
        )));
    }
    check_psd(cov1)?;
    check_psd(cov2)?;
    if mu1 == mu2 && cov1 == cov2 {
        return Ok(0.0);
    }
    let mean_term: f64 = mu1.iter().zip(mu2).map(|(a, b)| (a - b).powi(2)).sum();
    let root2 = psd_sqrt(cov2);
    let inner = &root2 * cov1 * &root2;
    let inner = (&inner + inner.transpose()) * 0.5;
    let cross: f64 = SymmetricEigen::new(inner)
        .eigenvalues
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .sum();
    let w2sq = mean_term + cov1.trace() + cov2.trace() - 2.0 * cross;
    Ok(w2sq.max(0.0).sqrt())
}

/// [`gaussian_w2`] for diagonal covariances given as variance vectors.
pub fn gaussian_w2_diagonal(mu1: &[f64], var1: &[f64], mu2: &[f64], var2: &[f64]) -> Result<f64> {
    let d = mu1.len();
    if mu2.len() != d || var1.len() != d || var2.len() != d {
        return Err(Error::InvalidShape("w2 operands have different lengths".into()));
    }
    if let Some(v) = var1.iter().chain(var2).find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(Error::NotPsd(format!("variance {v}")));
    }
    let terms: Vec<f64> = (0..d)
        .map(|i| (mu1[i] - mu2[i]).powi(2) + (var1[i].sqrt() - var2[i].sqrt()).powi(2))
        .collect();
    Ok(pairwise_sum(&terms).sqrt())
}

/// W2 from the fitted Gaussian to `target`. A diagonal summary is compared
/// against the target's marginal variances, a full one against its full
/// covariance.
pub fn w2_to_target(summary: &MomentSummary, target: &GaussianSpec) -> Result<f64> {
    if summary.dims != target.dims() {
        return Err(Error::InvalidShape(format!(
            "samples are {}, target is {}",
            summary.dims,
            target.dims()
        )));
    }
    match &summary.covariance {
        CovarianceEstimate::Diagonal(v) => {
            gaussian_w2_diagonal(&summary.mean, v, target.mean(), &target.variances())
        }
        CovarianceEstimate::Full(m) => gaussian_w2(&summary.mean, m, target.mean(), &target.covariance_matrix()),
    }
}

/// Delta-method standard deviation of the diagonal W2 estimate.
fn w2_diagonal_sd(summary: &MomentSummary, target: &GaussianSpec) -> f64 {
    let v = summary.covariance.variances();
    let tv = target.variances();
    let n = summary.n as f64;
    let mut grad = Vec::with_capacity(v.len());
    let mut sq = Vec::with_capacity(v.len());
    for i in 0..v.len() {
        let dm = summary.mean[i] - target.mean()[i];
        let ds = v[i].sqrt() - tv[i].sqrt();
        grad.push(v[i] * (dm * dm + 0.5 * ds * ds));
        sq.push(dm * dm + ds * ds);
    }
    let w2sq = pairwise_sum(&sq);
    if w2sq > 0.0 {
        (pairwise_sum(&grad) / (w2sq * n)).sqrt()
    } else {
        // At an exact match the estimate is all bias; use its scale instead.
        (1.5 * pairwise_sum(&v) / n).sqrt() / n.sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    /// Half-width of a 95% normal-approximation interval.
    pub half_width: f64,
    pub n: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub metrics: Vec<Metric>,
}

impl MetricReport {
    pub fn push(&mut self, name: impl Into<String>, value: f64, half_width: f64, n: usize) {
        self.metrics.push(Metric {
            name: name.into(),
            value,
            half_width,
            n,
        });
    }

    pub fn get(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.get(name).map(|m| m.value)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,value,half_width,n\n");
        for m in &self.metrics {
            let _ = writeln!(out, "{},{},{},{}", m.name, m.value, m.half_width, m.n);
        }
        out
    }
}

/// What [`evaluate`] computes. String forms: `moments`, `autocorr:<lag>`,
/// `flicker`, `w2`, `w2-full`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricKind {
    /// Per-frame mean and variance.
    Moments,
    Autocorr(usize),
    Flicker,
    /// W2 to the target with a diagonal fit; also reported per dimension.
    W2,
    /// W2 to the target with a full-covariance fit.
    W2Full,
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "moments" => Ok(MetricKind::Moments),
            "flicker" => Ok(MetricKind::Flicker),
            "w2" => Ok(MetricKind::W2),
            "w2-full" => Ok(MetricKind::W2Full),
            _ => match s.strip_prefix("autocorr:").map(str::parse) {
                Some(Ok(lag)) => Ok(MetricKind::Autocorr(lag)),
                _ => Err(Error::param("metrics", format!("unknown metric `{s}`"))),
            },
        }
    }
}

impl std::fmt::Display for MetricKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MetricKind::Moments => f.write_str("moments"),
            MetricKind::Autocorr(l) => write!(f, "autocorr:{l}"),
            MetricKind::Flicker => f.write_str("flicker"),
            MetricKind::W2 => f.write_str("w2"),
            MetricKind::W2Full => f.write_str("w2-full"),
        }
    }
}

/// Computes the requested metrics over `samples`. The W2 metrics need a
/// target; everything except flicker needs at least two samples.
pub fn evaluate(samples: &[LatentVideo], target: Option<&GaussianSpec>, kinds: &[MetricKind]) -> Result<MetricReport> {
    let dims = check_samples(samples, 1)?;
    let n = samples.len();
    let mut report = MetricReport::default();
    let mut diag: Option<MomentSummary> = None;
    let mut diagonal = || -> Result<MomentSummary> {
        if diag.is_none() {
            diag = Some(empirical_moments(samples, false)?);
        }
        Ok(diag.clone().unwrap())
    };
    let need_target = || {
        target.ok_or_else(|| Error::param("target", "w2 metrics need a target distribution"))
    };

    for kind in kinds {
        match *kind {
            MetricKind::Moments => {
                let m = diagonal()?;
                let v = m.covariance.variances();
                let fl = dims.frame_len();
                for f in 0..dims.frames {
                    let range = f * fl..(f + 1) * fl;
                    let mean = mean_of(&m.mean[range.clone()]);
                    let var = mean_of(&v[range]);
                    let entries = (n * fl) as f64;
                    report.push(format!("mean[{f}]"), mean, Z95 * (var / entries).sqrt(), n);
                    report.push(
                        format!("var[{f}]"),
                        var,
                        Z95 * var * (2.0 / ((n - 1) * fl) as f64).sqrt(),
                        n,
                    );
                }
            }
            MetricKind::Autocorr(lag) => {
                let (rho, pairs) = autocorr_parts(samples, lag)?;
                let per_site = pairs / (dims.frames - lag);
                let hw = Z95 * (1.0 - rho * rho).max(f64::EPSILON) / (per_site as f64).sqrt();
                report.push(format!("temporal_autocorr[{lag}]"), rho, hw, n);
            }
            MetricKind::Flicker => {
                let values = samples
                    .iter()
                    .map(|s| flicker_metric(s, None))
                    .collect::<Result<Vec<_>>>()?;
                let mean = mean_of(&values);
                let hw = if n > 1 {
                    let sq: Vec<f64> = values.iter().map(|x| (x - mean).powi(2)).collect();
                    let sd = (pairwise_sum(&sq) / (n - 1) as f64).sqrt();
                    (Z95 * sd / (n as f64).sqrt()).max(f64::MIN_POSITIVE)
                } else {
                    0.0
                };
                report.push("flicker", mean, hw, n);
            }
            MetricKind::W2 => {
                let t = need_target()?;
                let m = diagonal()?;
                let w2 = w2_to_target(&m, t)?;
                let hw = Z95 * w2_diagonal_sd(&m, t);
                let root_d = (dims.len() as f64).sqrt();
                report.push("w2_to_target", w2, hw, n);
                report.push("w2_rms", w2 / root_d, hw / root_d, n);
            }
            MetricKind::W2Full => {
                let t = need_target()?;
                let m = empirical_moments(samples, true)?;
                let w2 = w2_to_target(&m, t)?;
                let hw = Z95 * w2_diagonal_sd(&diagonal()?, t);
                report.push("w2_full_to_target", w2, hw, n);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::denoisers::Covariance;
    use crate::rng::RngStream;

    fn video(dims: Dims, data: Vec<f64>) -> LatentVideo {
        LatentVideo::from_vec(dims, data).unwrap()
    }

    #[test]
    fn two_point_moments() {
        let d = Dims::new(2, 1, 2, 2);
        let s = vec![LatentVideo::zeros(d).unwrap(), LatentVideo::filled(d, 2.0).unwrap()];
        let m = empirical_moments(&s, true).unwrap();
        assert!(m.mean.iter().all(|&x| x == 1.0));
        assert!(m.covariance.variances().iter().all(|&v| v == 2.0));
        assert!(matches!(
            empirical_moments(&s[..1], false),
            Err(Error::InsufficientSamples { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn normal_mean_within_three_standard_errors() {
        let d = Dims::new(1, 1, 1, 1);
        let mut rng = RngStream::new(21, 0);
        let s: Vec<_> = (0..100_000)
            .map(|_| video(d, vec![rng.standard_normal()]))
            .collect();
        let m = empirical_moments(&s, false).unwrap();
        assert!(m.mean[0].abs() < 3.0 * m.std_errors[0]);
    }

    #[test]
    fn cloned_frames_autocorrelate_perfectly() {
        let d = Dims::new(3, 2, 2, 2);
        let mut rng = RngStream::new(5, 0);
        let s: Vec<_> = (0..50)
            .map(|_| {
                let mut frame = vec![0.0; d.frame_len()];
                rng.fill_standard_normal(&mut frame);
                video(d, frame.repeat(3))
            })
            .collect();
        assert!((temporal_autocorr(&s, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!((temporal_autocorr(&s, 2).unwrap() - 1.0).abs() < 1e-12);
        assert!(temporal_autocorr(&s, 3).is_err());
    }

    #[test]
    fn independent_frames_have_no_autocorrelation() {
        let d = Dims::new(2, 1, 10, 10);
        let mut rng = RngStream::new(6, 0);
        let s: Vec<_> = (0..1000)
            .map(|_| crate::latent::sample_standard_normal(d, &mut rng).unwrap())
            .collect();
        assert!(temporal_autocorr(&s, 1).unwrap().abs() < 0.01);
    }

    #[test]
    fn ar1_samples_recover_rho() {
        let d = Dims::new(4, 1, 4, 4);
        let spec = GaussianSpec::new(
            d,
            vec![],
            Covariance::Ar1Temporal {
                rho: 0.9,
                frame_variance: 1.0,
            },
        )
        .unwrap();
        let mut rng = RngStream::new(7, 0);
        let s: Vec<_> = (0..4000).map(|_| spec.sample(&mut rng)).collect();
        assert!((temporal_autocorr(&s, 1).unwrap() - 0.9).abs() < 0.02);
    }

    #[test]
    fn flicker_hand_values() {
        let d = Dims::new(4, 1, 1, 2);
        let x = video(d, vec![1.0, 0.0, -1.0, 0.0, 1.0, 0.0, -1.0, 0.0]);
        assert_eq!(flicker_metric(&x, Some(&[true, false])).unwrap(), 2.0);
        assert_eq!(flicker_metric(&x, None).unwrap(), 1.0);
        assert_eq!(flicker_metric(&LatentVideo::filled(d, 3.0).unwrap(), None).unwrap(), 0.0);
        let one = LatentVideo::zeros(Dims::new(1, 1, 1, 2)).unwrap();
        assert!(flicker_metric(&one, None).is_err());
        assert!(flicker_metric(&x, Some(&[false, false])).is_err());
    }

    #[test]
    fn w2_reductions() {
        let c = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        assert_eq!(gaussian_w2(&[1.0, 2.0], &c, &[1.0, 2.0], &c).unwrap(), 0.0);
        let w = gaussian_w2(&[0.0, 0.0], &c, &[3.0, 4.0], &c).unwrap();
        assert!((w - 5.0).abs() < 1e-9);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(gaussian_w2(&[0.0; 2], &bad, &[0.0; 2], &c), Err(Error::NotPsd(_))));
        // Diagonal form agrees with the general one.
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0]));
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![9.0, 0.25]));
        let full = gaussian_w2(&[0.0, 1.0], &a, &[1.0, 0.0], &b).unwrap();
        let diag = gaussian_w2_diagonal(&[0.0, 1.0], &[1.0, 4.0], &[1.0, 0.0], &[9.0, 0.25]).unwrap();
        assert!((full - diag).abs() < 1e-12);
        assert!((diag * diag - (2.0 + 4.0 + 2.25)).abs() < 1e-12);
    }

    fn random_psd(rng: &mut RngStream, d: usize) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(d, d);
        for x in a.iter_mut() {
            *x = rng.standard_normal();
        }
        &a * a.transpose()
    }

    #[test]
    fn w2_matches_product_eigenvalue_oracle() {
        // tr((A^½ B A^½)^½) equals the sum of square roots of the eigenvalues
        // of A·B, which are real and nonnegative for PSD A, B.
        let mut rng = RngStream::new(33, 0);
        for _ in 0..20 {
            let a = random_psd(&mut rng, 3);
            let b = random_psd(&mut rng, 3);
            let mu1: Vec<f64> = (0..3).map(|_| rng.standard_normal()).collect();
            let mu2: Vec<f64> = (0..3).map(|_| rng.standard_normal()).collect();
            let prod = &a * &b;
            let eig = prod.complex_eigenvalues();
            let cross: f64 = eig.iter().map(|z| z.re.max(0.0).sqrt()).sum();
            let mean_term: f64 = mu1.iter().zip(&mu2).map(|(x, y)| (x - y).powi(2)).sum();
            let oracle = (mean_term + a.trace() + b.trace() - 2.0 * cross).max(0.0).sqrt();
            let w = gaussian_w2(&mu1, &a, &mu2, &b).unwrap();
            assert!((w - oracle).abs() < 1e-8, "{w} vs {oracle}");
            let back = gaussian_w2(&mu2, &b, &mu1, &a).unwrap();
            assert!((w - back).abs() < 1e-9);
        }
    }

    #[test]
    fn report_serializes_both_ways() {
        let mut r = MetricReport::default();
        r.push("flicker", 0.5, 0.01, 10);
        r.push("temporal_autocorr[1]", 0.9, 0.002, 10);
        assert_eq!(
            r.to_csv(),
            "name,value,half_width,n\nflicker,0.5,0.01,10\ntemporal_autocorr[1],0.9,0.002,10\n"
        );
        let back: MetricReport = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.value("flicker"), Some(0.5));
    }

    #[test]
    fn metric_kind_strings() {
        for s in ["moments", "autocorr:3", "flicker", "w2", "w2-full"] {
            assert_eq!(s.parse::<MetricKind>().unwrap().to_string(), s);
        }
        assert!("autocorr:x".parse::<MetricKind>().is_err());
        assert!("fid".parse::<MetricKind>().is_err());
    }

    #[test]
    fn evaluate_reports_positive_half_widths() {
        let d = Dims::new(3, 1, 2, 2);
        let target = GaussianSpec::standard_normal(d).unwrap();
        let mut rng = RngStream::new(8, 0);
        let s: Vec<_> = (0..200).map(|_| target.sample(&mut rng)).collect();
        let kinds: Vec<MetricKind> = ["moments", "autocorr:1", "flicker", "w2", "w2-full"]
            .iter()
            .map(|k| k.parse().unwrap())
            .collect();
        let r = evaluate(&s, Some(&target), &kinds).unwrap();
        assert!(r.metrics.iter().all(|m| m.half_width > 0.0 && m.n == 200));
        assert!(r.get("w2_rms").is_some() && r.get("var[2]").is_some());
        assert!(evaluate(&s, None, &[MetricKind::W2]).is_err());
    }
}
