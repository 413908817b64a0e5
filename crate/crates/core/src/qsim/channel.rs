use num_complex::Complex64 as C64;
use rand::Rng;

use super::state::Representation;
use super::{QuantumState, SimError, STATE_TOL};

/// A single-qubit channel given by Kraus operators (row-major 2x2 each).
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    operators: Vec<[C64; 4]>,
    target: usize,
}

/// `K0 = sqrt(1 - 3l/4) I`, `K1..K3 = sqrt(l/4) {X, Y, Z}`.
pub fn depolarizing_kraus(lambda: f64) -> Vec<[C64; 4]> {
    let z = C64::new(0.0, 0.0);
    let a = C64::new((1.0 - 0.75 * lambda).max(0.0).sqrt(), 0.0);
    let b = (lambda / 4.0).max(0.0).sqrt();
    let r = C64::new(b, 0.0);
    let i = C64::new(0.0, b);
    vec![[a, z, z, a], [z, r, r, z], [z, -i, i, z], [r, z, z, -r]]
}

impl KrausChannel {
    /// Fails unless `sum K^dagger K = I` within tolerance.
    pub fn new(operators: Vec<[C64; 4]>, target: usize) -> Result<Self, SimError> {
        let mut acc = [C64::new(0.0, 0.0); 4];
        for k in &operators {
            for r in 0..2 {
                for c in 0..2 {
                    acc[r * 2 + c] += k[r].conj() * k[c] + k[2 + r].conj() * k[2 + c];
                }
            }
        }
        let dev = (acc[0] - 1.0).norm().max(acc[1].norm()).max(acc[2].norm()).max((acc[3] - 1.0).norm());
        if dev > STATE_TOL {
            return Err(SimError::NotTracePreserving(dev));
        }
        Ok(Self { operators, target })
    }

    /// Single-qubit depolarizing channel; `lambda` is clamped to `[0, 1]`.
    pub fn depolarizing(lambda: f64, target: usize) -> Self {
        let lambda = lambda.clamp(0.0, 1.0);
        Self::new(depolarizing_kraus(lambda), target).expect("depolarizing channel is trace preserving")
    }

    pub fn operators(&self) -> &[[C64; 4]] {
        &self.operators
    }

    pub fn target(&self) -> usize {
        self.target
    }

    fn is_unitary(&self) -> bool {
        self.operators.iter().filter(|k| k.iter().any(|x| x.norm() > 1e-15)).count() <= 1
    }
}

impl QuantumState {
    /// `rho -> sum_l K_l rho K_l^dagger`. Pure inputs become density operators
    /// unless the channel has a single nonzero operator.
    pub fn apply_channel(&self, channel: &KrausChannel) -> Result<QuantumState, SimError> {
        super::check_targets(&[channel.target], self.num_qubits())?;
        self.check_normalized()?;
        if channel.is_unitary() && self.is_pure_representation() {
            let mut out = self.clone();
            if let Some(k) = channel.operators.iter().find(|k| k.iter().any(|x| x.norm() > 1e-15)) {
                out.apply_one_unchecked(channel.target, k);
            }
            return Ok(out);
        }
        let base = self.clone().into_mixed();
        let mut acc: Option<Vec<C64>> = None;
        for k in &channel.operators {
            let mut term = base.clone();
            term.apply_one_unchecked(channel.target, k);
            let rho = term.density_matrix();
            match &mut acc {
                None => acc = Some(rho),
                Some(a) => a.iter_mut().zip(rho).for_each(|(x, y)| *x += y),
            }
        }
        let mut out = base;
        out.set_repr(Representation::Mixed(acc.unwrap_or_default()));
        Ok(out)
    }

    /// Trajectory step: picks one Kraus operator with its Born weight and
    /// renormalizes. Returns the index of the chosen operator.
    pub fn apply_channel_sampled<R: Rng + ?Sized>(
        &mut self,
        channel: &KrausChannel,
        rng: &mut R,
    ) -> Result<usize, SimError> {
        super::check_targets(&[channel.target], self.num_qubits())?;
        self.check_normalized()?;
        let branches: Vec<(f64, QuantumState)> = channel
            .operators
            .iter()
            .map(|k| {
                let mut s = self.clone();
                s.apply_one_unchecked(channel.target, k);
                (s.trace(), s)
            })
            .collect();
        let u: f64 = rng.random();
        let mut cum = 0.0;
        let mut pick = branches.len() - 1;
        for (i, (p, _)) in branches.iter().enumerate() {
            cum += p;
            if u < cum {
                pick = i;
                break;
            }
        }
        let (p, mut s) = branches.into_iter().nth(pick).expect("nonempty channel");
        if p <= 0.0 {
            return Err(SimError::ZeroProbability);
        }
        s.scale(1.0 / p);
        *self = s;
        Ok(pick)
    }

    /// Depolarizing channel on qubit `q` via `(1 - l) rho + l Tr_q(rho) (x) I/2`.
    /// Equivalent to the Kraus form but a single pass over the matrix.
    pub fn depolarize(&mut self, q: usize, lambda: f64) -> Result<(), SimError> {
        super::check_targets(&[q], self.num_qubits())?;
        if lambda == 0.0 {
            return Ok(());
        }
        let n = self.num_qubits();
        let d = 1usize << n;
        let bit = 1usize << (n - 1 - q);
        let rho = self.mixed_mut();
        let keep = 1.0 - lambda;
        let half = lambda / 2.0;
        for i in 0..d {
            if i & bit != 0 {
                continue;
            }
            for j in 0..d {
                if j & bit != 0 {
                    continue;
                }
                let (i1, j1) = (i | bit, j | bit);
                let a = rho[i * d + j];
                let b = rho[i1 * d + j1];
                rho[i * d + j] = a * (1.0 - half) + b * half;
                rho[i1 * d + j1] = b * (1.0 - half) + a * half;
                rho[i * d + j1] *= keep;
                rho[i1 * d + j] *= keep;
            }
        }
        Ok(())
    }

    /// Depolarizes every qubit.
    pub fn depolarize_all(&mut self, lambda: f64) -> Result<(), SimError> {
        for q in 0..self.num_qubits() {
            self.depolarize(q, lambda)?;
        }
        Ok(())
    }

    pub(crate) fn scale(&mut self, factor: f64) {
        let s = match self.representation() {
            Representation::Pure(_) => factor.sqrt(),
            Representation::Mixed(_) => factor,
        };
        let v = match self.representation().clone() {
            Representation::Pure(mut a) => {
                a.iter_mut().for_each(|x| *x *= s);
                Representation::Pure(a)
            }
            Representation::Mixed(mut r) => {
                r.iter_mut().for_each(|x| *x *= s);
                Representation::Mixed(r)
            }
        };
        self.set_repr(v);
    }
}
