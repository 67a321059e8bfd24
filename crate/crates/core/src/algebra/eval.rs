//! Floating-point evaluation of exact polynomials and polynomial maps.

use num_complex::Complex64;

use super::poly::Polynomial;

/// A polynomial with coefficients rounded to `Complex64`, laid out for fast
/// repeated evaluation. Terms are summed in the polynomial's grlex order.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    nvars: usize,
    max_exp: Vec<u32>,
    terms: Vec<(Vec<u32>, Complex64)>,
}

impl CompiledPoly {
    pub fn new(p: &Polynomial) -> Self {
        let nvars = p.nvars();
        let mut max_exp = vec![0u32; nvars];
        let terms = p
            .terms()
            .map(|(m, c)| {
                for (mx, &e) in max_exp.iter_mut().zip(m.exps()) {
                    *mx = (*mx).max(e);
                }
                (m.exps().to_vec(), c.to_complex())
            })
            .collect();
        Self { nvars, max_exp, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Panics if `z.len() != nvars`; `Polynomial::evaluate` is the checked entry.
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        assert_eq!(z.len(), self.nvars, "dimension mismatch");
        // powers[i][e] = z_i^e, built by repeated multiplication
        let powers: Vec<Vec<Complex64>> = z
            .iter()
            .zip(&self.max_exp)
            .map(|(&zi, &me)| {
                let mut v = Vec::with_capacity(me as usize + 1);
                let mut acc = Complex64::new(1.0, 0.0);
                v.push(acc);
                for _ in 0..me {
                    acc *= zi;
                    v.push(acc);
                }
                v
            })
            .collect();
        let mut sum = Complex64::new(0.0, 0.0);
        for (exps, c) in &self.terms {
            let mut t = *c;
            for (i, &e) in exps.iter().enumerate() {
                if e > 0 {
                    t *= powers[i][e as usize];
                }
            }
            sum += t;
        }
        sum
    }
}

/// A square-or-not polynomial map `ℂⁿ → ℂᵏ` together with its exact Jacobian.
#[derive(Clone, Debug)]
pub struct PolyMap {
    components: Vec<Polynomial>,
    compiled: Vec<CompiledPoly>,
    jacobian: Vec<Vec<CompiledPoly>>,
}

impl PolyMap {
    pub fn new(components: Vec<Polynomial>) -> Self {
        assert!(!components.is_empty(), "empty polynomial map");
        let n = components[0].nvars();
        assert!(components.iter().all(|p| p.nvars() == n), "components must share a context");
        let compiled = components.iter().map(CompiledPoly::new).collect();
        let jacobian = components
            .iter()
            .map(|p| (0..n).map(|j| CompiledPoly::new(&p.derivative(j))).collect())
            .collect();
        Self { components, compiled, jacobian }
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn dim_in(&self) -> usize {
        self.components[0].nvars()
    }

    pub fn dim_out(&self) -> usize {
        self.components.len()
    }

    pub fn is_square(&self) -> bool {
        self.dim_in() == self.dim_out()
    }

    pub fn eval(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.compiled.iter().map(|p| p.eval(z)).collect()
    }

    /// Row-major Jacobian `∂g_i/∂z_j` at `z`.
    pub fn jacobian(&self, z: &[Complex64]) -> Vec<Vec<Complex64>> {
        self.jacobian.iter().map(|row| row.iter().map(|p| p.eval(z)).collect()).collect()
    }
}

/// Euclidean norm on ℂⁿ.
pub fn norm(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Max-modulus norm (the polydisc gauge).
pub fn max_norm(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}
