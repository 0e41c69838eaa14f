//! Gauss-Legendre quadrature on an interval and tensor products of it.

use crate::error::{Error, Result};

/// Nodes and weights of an n-point Gauss-Legendre rule on [a, b].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Build the rule by Newton iteration on the Legendre polynomial roots.
    pub fn new(n: usize, a: f64, b: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("quadrature needs at least one node".into()));
        }
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Domain(format!("invalid interval [{a}, {b}]")));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        // roots come in +/- pairs; compute one half and mirror
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_and_derivative(n, x);
                let step = p / d;
                x -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            let (_, d) = legendre_and_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * d * d);
            nodes[i] = mid - half * x;
            nodes[n - 1 - i] = mid + half * x;
            weights[i] = half * w;
            weights[n - 1 - i] = half * w;
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate a scalar function over the rule's interval.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Odometer over the nodes of a d-fold tensor product of a 1-d rule.
///
/// ```
/// # use sda_core::quadrature::{GaussLegendre, TensorGrid};
/// let rule = GaussLegendre::new(8, -1.0, 1.0).unwrap();
/// let mut grid = TensorGrid::new(&rule, 2);
/// let mut point = [0.0; 2];
/// let mut acc = 0.0;
/// while grid.advance() {
///     grid.write_point(&mut point);
///     acc += grid.weight() * point[0] * point[0];
/// }
/// ```
pub struct TensorGrid<'a> {
    rule: &'a GaussLegendre,
    dim: usize,
    index: Vec<usize>,
    started: bool,
    done: bool,
}

impl<'a> TensorGrid<'a> {
    /// The 0-dimensional product is the empty tensor with a single node of
    /// weight one, so `dim = 0` yields exactly one (empty) node.
    pub fn new(rule: &'a GaussLegendre, dim: usize) -> Self {
        Self {
            rule,
            dim,
            index: vec![0; dim],
            started: false,
            done: false,
        }
    }

    /// Move to the next node; false once exhausted.
    pub fn advance(&mut self) -> bool {
        if self.done {
            return false;
        }
        if !self.started {
            self.started = true;
            return true;
        }
        for i in 0..self.dim {
            self.index[i] += 1;
            if self.index[i] < self.rule.len() {
                return true;
            }
            self.index[i] = 0;
        }
        self.done = true;
        false
    }

    /// Per-dimension node indices of the current position.
    pub fn index(&self) -> &[usize] {
        &self.index
    }

    /// Product weight of the current node.
    pub fn weight(&self) -> f64 {
        self.index.iter().map(|&i| self.rule.weights[i]).product()
    }

    /// Coordinates of the current node; `out` must have length `dim`.
    pub fn write_point(&self, out: &mut [f64]) {
        for (o, &i) in out.iter_mut().zip(&self.index) {
            *o = self.rule.nodes[i];
        }
    }
}
