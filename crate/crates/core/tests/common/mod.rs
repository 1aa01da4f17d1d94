//! Independent reference implementations shared by the integration tests.
//!
//! The dense oracle builds every gate as an explicit `2^n × 2^n` matrix from
//! Kronecker products and evaluates observables as `Tr(O ρ)`; it shares no
//! code with the in-place kernels it checks.
#![allow(dead_code)]

use num_complex::Complex64 as C;

#[derive(Clone, Debug)]
pub struct Dense {
    pub dim: usize,
    pub m: Vec<C>,
}

impl Dense {
    pub fn identity(dim: usize) -> Self {
        let mut m = vec![C::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            m[i * dim + i] = C::new(1.0, 0.0);
        }
        Self { dim, m }
    }

    pub fn from_2x2(g: [[C; 2]; 2]) -> Self {
        Self {
            dim: 2,
            m: vec![g[0][0], g[0][1], g[1][0], g[1][1]],
        }
    }

    pub fn at(&self, r: usize, c: usize) -> C {
        self.m[r * self.dim + c]
    }

    pub fn kron(&self, other: &Dense) -> Dense {
        let dim = self.dim * other.dim;
        let mut m = vec![C::new(0.0, 0.0); dim * dim];
        for i in 0..self.dim {
            for j in 0..self.dim {
                for k in 0..other.dim {
                    for l in 0..other.dim {
                        m[(i * other.dim + k) * dim + j * other.dim + l] = self.at(i, j) * other.at(k, l);
                    }
                }
            }
        }
        Dense { dim, m }
    }

    pub fn matmul(&self, other: &Dense) -> Dense {
        let n = self.dim;
        let mut m = vec![C::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.at(i, k);
                for j in 0..n {
                    m[i * n + j] += a * other.at(k, j);
                }
            }
        }
        Dense { dim: n, m }
    }

    pub fn add(&self, other: &Dense) -> Dense {
        Dense {
            dim: self.dim,
            m: self.m.iter().zip(&other.m).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn dagger(&self) -> Dense {
        let n = self.dim;
        let mut m = vec![C::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                m[j * n + i] = self.at(i, j).conj();
            }
        }
        Dense { dim: n, m }
    }

    pub fn apply(&self, v: &[C]) -> Vec<C> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.at(i, j) * v[j]).sum())
            .collect()
    }

    pub fn trace(&self) -> C {
        (0..self.dim).map(|i| self.at(i, i)).sum()
    }
}

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

pub fn ry(theta: f64) -> Dense {
    let (s, co) = (theta / 2.0).sin_cos();
    Dense::from_2x2([[c(co), c(-s)], [c(s), c(co)]])
}

pub fn rz(phi: f64) -> Dense {
    Dense::from_2x2([
        [C::from_polar(1.0, -phi / 2.0), c(0.0)],
        [c(0.0), C::from_polar(1.0, phi / 2.0)],
    ])
}

pub fn pauli_z() -> Dense {
    Dense::from_2x2([[c(1.0), c(0.0)], [c(0.0), c(-1.0)]])
}

pub fn pauli_x() -> Dense {
    Dense::from_2x2([[c(0.0), c(1.0)], [c(1.0), c(0.0)]])
}

/// `⊗_q factors[q]` with qubit 0 as the leftmost (most significant) factor.
pub fn tensor_product(factors: &[Dense]) -> Dense {
    factors[1..].iter().fold(factors[0].clone(), |acc, f| acc.kron(f))
}

/// `gate` on `qubit`, identity elsewhere.
pub fn embed(n: usize, qubit: usize, gate: &Dense) -> Dense {
    let factors: Vec<Dense> = (0..n)
        .map(|q| if q == qubit { gate.clone() } else { Dense::identity(2) })
        .collect();
    tensor_product(&factors)
}

/// `|0⟩⟨0|_c ⊗ I + |1⟩⟨1|_c ⊗ X_t`.
pub fn cnot(n: usize, control: usize, target: usize) -> Dense {
    let p0 = Dense::from_2x2([[c(1.0), c(0.0)], [c(0.0), c(0.0)]]);
    let p1 = Dense::from_2x2([[c(0.0), c(0.0)], [c(0.0), c(1.0)]]);
    let term = |proj: &Dense, on_target: Dense| {
        let factors: Vec<Dense> = (0..n)
            .map(|q| {
                if q == control {
                    proj.clone()
                } else if q == target {
                    on_target.clone()
                } else {
                    Dense::identity(2)
                }
            })
            .collect();
        tensor_product(&factors)
    };
    term(&p0, Dense::identity(2)).add(&term(&p1, pauli_x()))
}

/// Full circuit unitary for layer-major angle arrays.
pub fn circuit_unitary(n: usize, depth: usize, thetas: &[f64], phis: &[f64]) -> Dense {
    let mut u = Dense::identity(1 << n);
    for l in 0..depth {
        for q in 0..n {
            u = embed(n, q, &ry(thetas[l * n + q])).matmul(&u);
            u = embed(n, q, &rz(phis[l * n + q])).matmul(&u);
        }
        for i in 0..n {
            let t = (i + 1) % n;
            if t != i {
                u = cnot(n, i, t).matmul(&u);
            }
        }
    }
    u
}

/// Z on each qubit, then ZZ on each pair `i < j`, in that order.
pub fn observables(n: usize) -> Vec<Dense> {
    let mut out: Vec<Dense> = (0..n).map(|q| embed(n, q, &pauli_z())).collect();
    for i in 0..n {
        for j in i + 1..n {
            out.push(embed(n, i, &pauli_z()).matmul(&embed(n, j, &pauli_z())));
        }
    }
    out
}

/// `Tr(O_k ρ)` for `ρ = U|a⟩⟨a|U†` with `a = v / (‖v‖ + ε)` renormalized.
pub fn oracle_expectations(n: usize, depth: usize, thetas: &[f64], phis: &[f64], v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scaled: Vec<f64> = v.iter().map(|x| x / (norm + 1e-8)).collect();
    let renorm = scaled.iter().map(|x| x * x).sum::<f64>().sqrt();
    let a: Vec<C> = scaled.iter().map(|x| c(x / renorm)).collect();
    let psi = circuit_unitary(n, depth, thetas, phis).apply(&a);
    let dim = 1 << n;
    let mut rho = Dense {
        dim,
        m: vec![c(0.0); dim * dim],
    };
    for i in 0..dim {
        for j in 0..dim {
            rho.m[i * dim + j] = psi[i] * psi[j].conj();
        }
    }
    observables(n)
        .iter()
        .map(|o| {
            let t = o.matmul(&rho).trace();
            assert!(t.im.abs() < 1e-12, "Hermitian observable gave complex trace");
            t.re
        })
        .collect()
}

/// Central difference of `f` along coordinate `i` of `x`.
pub fn central_difference(x: &[f64], i: usize, h: f64, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    let mut y = x.to_vec();
    y[i] = x[i] + h;
    let plus = f(&y);
    y[i] = x[i] - h;
    let minus = f(&y);
    (plus - minus) / (2.0 * h)
}

/// `‖a − b‖ / max(‖b‖, floor)`.
pub fn relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let scale = b.iter().map(|y| y * y).sum::<f64>().sqrt().max(floor);
    diff / scale
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
