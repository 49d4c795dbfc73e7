//! Synthetic instances `Y_j = sqrt(SNR/k) A_j X_j + W_j`.

use super::rng::{Rng, Stream};
use crate::error::{ensure, Error, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceParams {
    pub n: usize,
    pub k: usize,
    pub diversity: usize,
    pub m: usize,
    /// Linear SNR.
    pub snr: f64,
    pub seed: u64,
    /// Multiplies the noise; 0 gives noiseless observations.
    pub noise_scale: f64,
}

impl InstanceParams {
    pub fn new(n: usize, k: usize, diversity: usize, m: usize, snr: f64, seed: u64) -> Self {
        Self {
            n,
            k,
            diversity,
            m,
            snr,
            seed,
            noise_scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1 <= self.k && self.k <= self.n) {
            return Err(Error::Invalid(format!(
                "need 1 <= k <= n, got k = {}, n = {}",
                self.k, self.n
            )));
        }
        if self.m == 0 {
            return Err(Error::Invalid("need at least one measurement".into()));
        }
        if self.diversity == 0 {
            return Err(Error::Invalid("need J >= 1".into()));
        }
        ensure(self.snr > 0.0 && self.snr.is_finite(), "snr", self.snr, "0 < snr < inf")?;
        ensure(
            self.noise_scale >= 0.0,
            "noise_scale",
            self.noise_scale,
            "noise_scale >= 0",
        )
    }
}

/// One draw of the model. Support indices are 0-based and sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub params: InstanceParams,
    pub support: Vec<usize>,
    pub signals: Vec<DVector<f64>>,
    pub matrices: Vec<DMatrix<f64>>,
    pub noise: Vec<DVector<f64>>,
    pub observations: Vec<DVector<f64>>,
}

/// Support and per-vector signals only, for experiments that bypass the matrices.
pub fn draw_support_and_signals(n: usize, k: usize, diversity: usize, seed: u64) -> (Vec<usize>, Vec<DVector<f64>>) {
    let support = Rng::stream(seed, Stream::Support).subset(n, k);
    let mut rng = Rng::stream(seed, Stream::Signals);
    let signals = (0..diversity)
        .map(|_| {
            let mut x = DVector::zeros(n);
            for &i in &support {
                x[i] = rng.normal();
            }
            x
        })
        .collect();
    (support, signals)
}

impl Instance {
    pub fn generate(p: &InstanceParams) -> Result<Self> {
        p.validate()?;
        let (support, signals) = draw_support_and_signals(p.n, p.k, p.diversity, p.seed);
        let mut mrng = Rng::stream(p.seed, Stream::Matrices);
        let matrices = (0..p.diversity)
            .map(|_| {
                // drawn row by row
                let mut buf = vec![0.0; p.m * p.n];
                mrng.fill_normal(&mut buf);
                DMatrix::from_row_slice(p.m, p.n, &buf)
            })
            .collect();
        let mut nrng = Rng::stream(p.seed, Stream::Noise);
        let noise = (0..p.diversity)
            .map(|_| {
                let mut w = DVector::zeros(p.m);
                nrng.fill_normal(w.as_mut_slice());
                w
            })
            .collect();
        let mut inst = Self {
            params: *p,
            support,
            signals,
            matrices,
            noise,
            observations: Vec::new(),
        };
        inst.observe();
        Ok(inst)
    }

    /// `sqrt(SNR / k)`.
    pub fn gain(&self) -> f64 {
        (self.params.snr / self.params.k as f64).sqrt()
    }

    fn observe(&mut self) {
        let c = self.gain();
        let s = self.params.noise_scale;
        self.observations = self
            .matrices
            .iter()
            .zip(&self.signals)
            .zip(&self.noise)
            .map(|((a, x), w)| a * x * c + w * s)
            .collect();
    }

    /// Replaces the signals (which must vanish off the support) and
    /// recomputes the observations with the same matrices and noise.
    pub fn with_signals(mut self, signals: Vec<DVector<f64>>) -> Result<Self> {
        if signals.len() != self.params.diversity || signals.iter().any(|x| x.len() != self.params.n) {
            return Err(Error::Invalid("signal shapes do not match the instance".into()));
        }
        for x in &signals {
            for (i, v) in x.iter().enumerate() {
                if *v != 0.0 && self.support.binary_search(&i).is_err() {
                    return Err(Error::Invalid(format!("signal is nonzero off the support at {i}")));
                }
            }
        }
        self.signals = signals;
        self.observe();
        Ok(self)
    }
}

/// Shorthand for [`Instance::generate`] with unit noise scale.
pub fn generate_instance(n: usize, k: usize, diversity: usize, m: usize, snr: f64, seed: u64) -> Result<Instance> {
    Instance::generate(&InstanceParams::new(n, k, diversity, m, snr, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_support_and_shapes() {
        let inst = generate_instance(5, 5, 2, 3, 10.0, 1).unwrap();
        assert_eq!(inst.support, vec![0, 1, 2, 3, 4]);
        assert_eq!(inst.matrices[1].shape(), (3, 5));
        assert_eq!(inst.observations[0].len(), 3);
    }

    #[test]
    fn signals_vanish_off_support_and_observations_match() {
        let inst = generate_instance(50, 7, 3, 20, 4.0, 99).unwrap();
        assert_eq!(inst.support.len(), 7);
        for x in &inst.signals {
            for i in 0..50 {
                if inst.support.binary_search(&i).is_err() {
                    assert_eq!(x[i], 0.0);
                } else {
                    assert_ne!(x[i], 0.0);
                }
            }
        }
        let c = (4.0f64 / 7.0).sqrt();
        for j in 0..3 {
            let y = &inst.matrices[j] * &inst.signals[j] * c + &inst.noise[j];
            assert!((y - &inst.observations[j]).amax() < 1e-12);
        }
    }

    #[test]
    fn deterministic() {
        let a = generate_instance(30, 4, 2, 10, 3.0, 5).unwrap();
        let b = generate_instance(30, 4, 2, 10, 3.0, 5).unwrap();
        assert_eq!(a, b);
        let c = generate_instance(30, 4, 2, 10, 3.0, 6).unwrap();
        assert_ne!(a.observations, c.observations);
    }

    #[test]
    fn matrix_entries_unit_variance() {
        let inst = generate_instance(1000, 10, 1, 1000, 1.0, 17).unwrap();
        let a = &inst.matrices[0];
        let n = a.len() as f64;
        let mean = a.sum() / n;
        let var = a.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        assert!((var - 1.0).abs() < 0.01, "{var}");
        assert!(mean.abs() < 0.005);
    }

    #[test]
    fn noiseless_and_replaced_signals() {
        let mut p = InstanceParams::new(20, 3, 1, 8, 5.0, 2);
        p.noise_scale = 0.0;
        let inst = Instance::generate(&p).unwrap();
        let clean = &inst.matrices[0] * &inst.signals[0] * inst.gain();
        assert_eq!(clean, inst.observations[0]);
        let mut x = inst.signals[0].clone();
        x[inst.support[0]] = 0.01;
        let inst = inst.with_signals(vec![x.clone()]).unwrap();
        assert_eq!(inst.observations[0], &inst.matrices[0] * &x * inst.gain());
        let mut bad = x;
        let off = (0..20).find(|i| inst.support.binary_search(i).is_err()).unwrap();
        bad[off] = 1.0;
        assert!(inst.with_signals(vec![bad]).is_err());
    }

    #[test]
    fn rejects_bad_params() {
        assert!(generate_instance(5, 0, 1, 3, 1.0, 0).is_err());
        assert!(generate_instance(5, 6, 1, 3, 1.0, 0).is_err());
        assert!(generate_instance(5, 2, 1, 0, 1.0, 0).is_err());
        assert!(generate_instance(5, 2, 0, 3, 1.0, 0).is_err());
    }
}
