//! Small harmonic lattices: explicit normal modes and brute-force time
//! stepping, used as an independent check on the modal formulas.

use serde::Serialize;

use crate::error::{Error, Result};

/// Masses, spring matrix and equilibrium positions of a harmonic lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    masses: Vec<f64>,
    /// Row-major `n x n` spring matrix, N/m.
    springs: Vec<f64>,
    positions: Vec<f64>,
}

impl Lattice {
    pub fn new(masses: Vec<f64>, springs: Vec<f64>, positions: Vec<f64>) -> Result<Self> {
        let n = masses.len();
        if n == 0 {
            return Err(Error::Lattice("no atoms".into()));
        }
        if springs.len() != n * n || positions.len() != n {
            return Err(Error::Lattice(format!(
                "dimension mismatch: {n} masses, {} spring entries, {} positions",
                springs.len(),
                positions.len()
            )));
        }
        if masses.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(Error::Lattice("masses must be positive and finite".into()));
        }
        if springs.iter().any(|k| !k.is_finite()) {
            return Err(Error::Lattice("spring matrix has non-finite entries".into()));
        }
        let scale = springs.iter().fold(0.0f64, |a, k| a.max(k.abs())).max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in 0..i {
                if (springs[i * n + j] - springs[j * n + i]).abs() > 1e-12 * scale {
                    return Err(Error::Lattice(format!("spring matrix not symmetric at ({i}, {j})")));
                }
            }
            let row: f64 = springs[i * n..(i + 1) * n].iter().sum();
            if row.abs() > 1e-10 * scale {
                return Err(Error::Lattice(format!(
                    "row {i} of the spring matrix sums to {row:e}; translations must cost no energy"
                )));
            }
        }
        Ok(Self {
            masses,
            springs,
            positions,
        })
    }

    /// Free chain with nearest-neighbour springs `k[i]` between atoms `i`
    /// and `i + 1`.
    pub fn chain_with(masses: Vec<f64>, k: &[f64], spacing: f64) -> Result<Self> {
        let n = masses.len();
        if k.len() + 1 != n {
            return Err(Error::Lattice(format!("{n} atoms need {} springs, got {}", n.saturating_sub(1), k.len())));
        }
        let mut springs = vec![0.0; n * n];
        for (i, &ki) in k.iter().enumerate() {
            let j = i + 1;
            springs[i * n + i] += ki;
            springs[j * n + j] += ki;
            springs[i * n + j] -= ki;
            springs[j * n + i] -= ki;
        }
        let positions = (0..n).map(|i| i as f64 * spacing).collect();
        Self::new(masses, springs, positions)
    }

    /// Uniform free chain.
    pub fn chain(n: usize, mass: f64, k: f64, spacing: f64) -> Result<Self> {
        Self::chain_with(vec![mass; n], &vec![k; n.saturating_sub(1)], spacing)
    }

    /// The default oracle instance: 64 silicon-like atoms, free ends.
    pub fn oracle_default() -> Self {
        Self::chain(64, 28.0 * crate::constants::AMU, 10.0, 2.35e-10).expect("valid chain")
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn spring(&self, i: usize, j: usize) -> f64 {
        self.springs[i * self.len() + j]
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Mass-weighted dynamical matrix `K_ij / sqrt(m_i m_j)`, row-major.
    pub fn dynamical_matrix(&self) -> Vec<f64> {
        let n = self.len();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                d[i * n + j] = self.springs[i * n + j] / (self.masses[i] * self.masses[j]).sqrt();
            }
        }
        d
    }

    /// Elastic forces `-K x` for displacements `x`.
    fn elastic_force(&self, x: &[f64], out: &mut [f64]) {
        let n = self.len();
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.springs[i * n..(i + 1) * n];
            *o = -row.iter().zip(x).map(|(k, xj)| k * xj).sum::<f64>();
        }
    }

    /// Kinetic plus elastic energy of a displacement/velocity state.
    pub fn energy(&self, x: &[f64], v: &[f64]) -> f64 {
        let n = self.len();
        let kinetic: f64 = self.masses.iter().zip(v).map(|(m, vi)| 0.5 * m * vi * vi).sum();
        let mut elastic = 0.0;
        for i in 0..n {
            for j in 0..n {
                elastic += 0.5 * x[i] * self.springs[i * n + j] * x[j];
            }
        }
        kinetic + elastic
    }

    /// Gershgorin bound on the largest mode frequency.
    pub fn omega_bound(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| self.springs[i * n + j].abs() / (self.masses[i] * self.masses[j]).sqrt())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
            .sqrt()
    }

    pub fn normal_modes(&self) -> Result<NormalModes> {
        let n = self.len();
        let (values, vectors) = symmetric_eigen(self.dynamical_matrix(), n)?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let sqrt_m: Vec<f64> = self.masses.iter().map(|m| m.sqrt()).collect();
        let mut omegas = Vec::with_capacity(n);
        let mut modes = Vec::with_capacity(n);
        for &k in &order {
            omegas.push(values[k].max(0.0).sqrt());
            let mut u: Vec<f64> = (0..n).map(|i| vectors[i * n + k]).collect();
            // Fix the sign by the overlap with the translation direction,
            // falling back to the first non-zero component.
            let dot: f64 = u.iter().zip(&sqrt_m).map(|(a, b)| a * b).sum();
            let lead = if dot.abs() > 1e-8 * sqrt_m.iter().sum::<f64>() {
                dot
            } else {
                u.iter().copied().find(|c| c.abs() > 1e-12).unwrap_or(1.0)
            };
            if lead < 0.0 {
                u.iter_mut().for_each(|c| *c = -*c);
            }
            modes.push(u);
        }
        Ok(NormalModes {
            omegas,
            vectors: modes,
            sqrt_masses: sqrt_m,
        })
    }
}

/// Eigen-decomposition of a lattice's dynamical matrix.
#[derive(Debug, Clone, Serialize)]
pub struct NormalModes {
    /// Ascending; the translation mode comes first.
    pub omegas: Vec<f64>,
    /// `vectors[k][i] = u^k_i`, orthonormal.
    pub vectors: Vec<Vec<f64>>,
    sqrt_masses: Vec<f64>,
}

impl NormalModes {
    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    /// Force on each mode, `f_k = sum_i u^k_i F_i / sqrt(m_i)`.
    pub fn project_force(&self, forces: &[f64]) -> Vec<f64> {
        assert_eq!(forces.len(), self.sqrt_masses.len(), "one force per atom");
        let scaled: Vec<f64> = forces.iter().zip(&self.sqrt_masses).map(|(f, s)| f / s).collect();
        self.vectors
            .iter()
            .map(|u| u.iter().zip(&scaled).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Modal coordinates `q_k = sum_i u^k_i sqrt(m_i) x_i`.
    pub fn to_modal(&self, x: &[f64]) -> Vec<f64> {
        let weighted: Vec<f64> = x.iter().zip(&self.sqrt_masses).map(|(a, s)| a * s).collect();
        self.vectors
            .iter()
            .map(|u| u.iter().zip(&weighted).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Inverse of [`to_modal`](Self::to_modal).
    pub fn from_modal(&self, q: &[f64]) -> Vec<f64> {
        let n = self.sqrt_masses.len();
        let mut x = vec![0.0; n];
        for (u, qk) in self.vectors.iter().zip(q) {
            for i in 0..n {
                x[i] += qk * u[i];
            }
        }
        x.iter_mut().zip(&self.sqrt_masses).for_each(|(xi, s)| *xi /= s);
        x
    }

    /// `sum_k (qdot_k^2 + omega_k^2 q_k^2) / 2`.
    pub fn modal_energy(&self, q: &[f64], qdot: &[f64]) -> f64 {
        self.omegas
            .iter()
            .zip(q.iter().zip(qdot))
            .map(|(w, (a, b))| 0.5 * (b * b + w * w * a * a))
            .sum()
    }

    /// `max_k |D u_k - omega_k^2 u_k|` for the given dynamical matrix.
    pub fn residual(&self, dynamical: &[f64]) -> f64 {
        let n = self.sqrt_masses.len();
        let mut worst = 0.0f64;
        for (w, u) in self.omegas.iter().zip(&self.vectors) {
            for i in 0..n {
                let du: f64 = (0..n).map(|j| dynamical[i * n + j] * u[j]).sum();
                worst = worst.max((du - w * w * u[i]).abs());
            }
        }
        worst
    }
}

/// Cyclic Jacobi eigen-solver for a dense symmetric `n x n` matrix.
///
/// Returns the eigenvalues and the row-major matrix whose columns are the
/// eigenvectors.
pub fn symmetric_eigen(mut a: Vec<f64>, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    assert_eq!(a.len(), n * n);
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let total: f64 = a.iter().map(|x| x * x).sum();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off <= 1e-32 * total || off == 0.0 {
            let values = (0..n).map(|i| a[i * n + i]).collect();
            return Ok((values, v));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    Err(Error::Lattice("Jacobi iteration did not converge in 100 sweeps".into()))
}

/// Largest `omega_max * step` accepted by [`brute_force_evolve`].
pub const MAX_VERLET_PHASE: f64 = 0.05;

/// Recorded atomistic trajectory; displacements are from equilibrium.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub times: Vec<f64>,
    pub displacements: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
}

impl Evolution {
    pub fn final_state(&self) -> (&[f64], &[f64]) {
        (
            self.displacements.last().expect("at least the initial state"),
            self.velocities.last().expect("at least the initial state"),
        )
    }
}

/// Velocity-Verlet integration from rest (or from `initial`) under external
/// forces `force(t, from_left)`, which fills one force per atom. Steps are
/// placed so that every breakpoint is a step boundary; at a breakpoint the
/// force is taken as the left limit when finishing a step and as the right
/// limit when starting the next.
pub struct VerletRun<'a> {
    pub lattice: &'a Lattice,
    pub t_end: f64,
    pub max_step: f64,
    pub breakpoints: &'a [f64],
    /// Record every this many steps (the final state is always recorded).
    pub record_every: usize,
}

pub fn brute_force_evolve<F>(
    run: &VerletRun<'_>,
    initial: Option<(&[f64], &[f64])>,
    mut force: F,
) -> Result<Evolution>
where
    F: FnMut(f64, bool, &mut [f64]),
{
    let lat = run.lattice;
    let n = lat.len();
    let phase = lat.omega_bound() * run.max_step;
    if !(run.max_step > 0.0) || phase >= MAX_VERLET_PHASE {
        return Err(Error::StepSize(phase));
    }
    if !(run.t_end > 0.0 && run.t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!("evolution end time {} must be positive", run.t_end)));
    }
    let (mut x, mut v) = match initial {
        Some((x0, v0)) if x0.len() == n && v0.len() == n => (x0.to_vec(), v0.to_vec()),
        Some(_) => return Err(Error::Lattice("initial state has the wrong dimension".into())),
        None => (vec![0.0; n], vec![0.0; n]),
    };
    let mut cuts = vec![0.0];
    cuts.extend(run.breakpoints.iter().copied().filter(|&b| b > 0.0 && b < run.t_end));
    cuts.push(run.t_end);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let every = run.record_every.max(1);
    let mut out = Evolution {
        times: vec![0.0],
        displacements: vec![x.clone()],
        velocities: vec![v.clone()],
    };
    let mut ext = vec![0.0; n];
    let mut elastic = vec![0.0; n];
    let mut acc = vec![0.0; n];
    lat.elastic_force(&x, &mut elastic);
    let mut count = 0usize;
    for seg in cuts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let steps = ((b - a) / run.max_step).ceil().max(1.0) as usize;
        let h = (b - a) / steps as f64;
        for s in 0..steps {
            let t0 = a + s as f64 * h;
            let t1 = if s + 1 == steps { b } else { t0 + h };
            force(t0, false, &mut ext);
            for i in 0..n {
                acc[i] = (ext[i] + elastic[i]) / lat.masses[i];
                v[i] += 0.5 * h * acc[i];
                x[i] += h * v[i];
            }
            lat.elastic_force(&x, &mut elastic);
            force(t1, true, &mut ext);
            for i in 0..n {
                v[i] += 0.5 * h * (ext[i] + elastic[i]) / lat.masses[i];
            }
            count += 1;
            let last = s + 1 == steps && b == run.t_end;
            if count.is_multiple_of(every) || last {
                out.times.push(t1);
                out.displacements.push(x.clone());
                out.velocities.push(v.clone());
            }
        }
    }
    Ok(out)
}
