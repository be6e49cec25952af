//! Exact information quantities on small finite joints.
//!
//! [`SmallJoint`] holds a full table `p(w, x, y)` over three variables with
//! alphabets of at most eight symbols each, so every entropy, mutual
//! information, and divergence below is an exhaustive sum — no estimation,
//! no sampling. This is the reference machinery the statistical estimators
//! are checked against.
//!
//! The axes are named for their roles: `W` the hypothesis (weights), `X`
//! the input, `Y` the label.

use crate::error::{Error, Result};

const MAX_ALPHABET: usize = 8;

/// One of the three variables of a [`SmallJoint`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    W,
    X,
    Y,
}

impl Axis {
    fn index(self) -> usize {
        match self {
            Axis::W => 0,
            Axis::X => 1,
            Axis::Y => 2,
        }
    }
}

/// A full joint distribution `p(w, x, y)`, optionally carrying a predictive
/// model `q(y | w, x)` for the cross-entropy decomposition.
#[derive(Debug, Clone)]
pub struct SmallJoint {
    dims: [usize; 3],
    p: Vec<f64>,
    q: Option<Vec<f64>>,
}

impl SmallJoint {
    /// Wraps an already-normalized table, flattened with `w` slowest and
    /// `y` fastest. The mass must be within `1e-9` of 1.
    pub fn new(dims: [usize; 3], p: Vec<f64>) -> Result<Self> {
        if dims.iter().any(|&d| d == 0 || d > MAX_ALPHABET) {
            return Err(Error::Domain(format!(
                "alphabet sizes {dims:?} outside 1..={MAX_ALPHABET}"
            )));
        }
        if p.len() != dims[0] * dims[1] * dims[2] {
            return Err(Error::Domain(format!(
                "table has {} entries for dims {dims:?}",
                p.len()
            )));
        }
        if p.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::Domain("probabilities must be finite and non-negative".into()));
        }
        let mass: f64 = p.iter().sum();
        if (mass - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("joint mass is {mass}, expected 1")));
        }
        Ok(SmallJoint { dims, p, q: None })
    }

    /// Builds a joint from non-negative weights, normalizing them.
    pub fn from_weights(dims: [usize; 3], weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::Domain("weights must be finite and non-negative".into()));
        }
        let mass: f64 = weights.iter().sum();
        if mass <= 0.0 {
            return Err(Error::Domain("weights sum to zero".into()));
        }
        SmallJoint::new(dims, weights.into_iter().map(|v| v / mass).collect())
    }

    /// Attaches a model `q(y | w, x)`, flattened the same way as the joint;
    /// each `(w, x)` row must sum to 1 over `y`.
    pub fn with_model(mut self, q: Vec<f64>) -> Result<Self> {
        if q.len() != self.p.len() {
            return Err(Error::Domain(format!(
                "model has {} entries, joint has {}",
                q.len(),
                self.p.len()
            )));
        }
        if q.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::Domain("model probabilities must be finite and non-negative".into()));
        }
        let y = self.dims[2];
        for row in 0..self.dims[0] * self.dims[1] {
            let mass: f64 = q[row * y..(row + 1) * y].iter().sum();
            if (mass - 1.0).abs() > 1e-9 {
                return Err(Error::Domain(format!(
                    "model row {row} sums to {mass}, expected 1"
                )));
            }
        }
        self.q = Some(q);
        Ok(self)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    fn cell(&self, w: usize, x: usize, y: usize) -> f64 {
        self.p[(w * self.dims[1] + x) * self.dims[2] + y]
    }

    /// Iterates every cell as `([w, x, y], p)`.
    fn cells(&self) -> impl Iterator<Item = ([usize; 3], f64)> + '_ {
        let [dw, dx, dy] = self.dims;
        (0..dw).flat_map(move |w| {
            (0..dx).flat_map(move |x| (0..dy).map(move |y| ([w, x, y], self.cell(w, x, y))))
        })
    }

    /// Marginal over a subset of axes, keyed by mixed-radix coordinates in
    /// the order given.
    fn marginal(&self, axes: &[Axis]) -> Vec<f64> {
        let size: usize = axes.iter().map(|a| self.dims[a.index()]).product();
        let mut out = vec![0.0; size];
        for (coord, p) in self.cells() {
            let mut key = 0;
            for a in axes {
                key = key * self.dims[a.index()] + coord[a.index()];
            }
            out[key] += p;
        }
        out
    }

    /// Entropy (nats) of the marginal on `axes`.
    pub fn entropy_of(&self, axes: &[Axis]) -> f64 {
        self.marginal(axes)
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum()
    }

    /// Mutual information `I(A; B)` in nats, by exhaustive summation.
    pub fn mutual_information(&self, a: Axis, b: Axis) -> f64 {
        let pa = self.marginal(&[a]);
        let pb = self.marginal(&[b]);
        let pab = self.marginal(&[a, b]);
        let db = self.dims[b.index()];
        let mut mi = 0.0;
        for (i, &pai) in pa.iter().enumerate() {
            for (j, &pbj) in pb.iter().enumerate() {
                let joint = pab[i * db + j];
                if joint > 0.0 {
                    mi += joint * (joint / (pai * pbj)).ln();
                }
            }
        }
        mi
    }

    /// Conditional mutual information `I(A; B | G)` in nats.
    pub fn conditional_mutual_information(&self, a: Axis, b: Axis, given: Axis) -> f64 {
        let pg = self.marginal(&[given]);
        let pag = self.marginal(&[a, given]);
        let pbg = self.marginal(&[b, given]);
        let dg = self.dims[given.index()];
        let mut mi = 0.0;
        for (coord, p) in self.cells() {
            if p > 0.0 {
                let (i, j, k) = (coord[a.index()], coord[b.index()], coord[given.index()]);
                mi += p * (pg[k] * p / (pag[i * dg + k] * pbg[j * dg + k])).ln();
            }
        }
        mi
    }

    /// Splits the expected model cross-entropy `-E ln q(Y | X, W)` into the
    /// label entropy minus the three ways information about the label can
    /// leak into inputs and weights, plus the correction and mismatch terms
    /// that restore equality. Requires a model (see [`Self::with_model`])
    /// that gives positive probability wherever the joint has mass.
    pub fn ce_decomposition(&self) -> Result<CeDecomposition> {
        let q = self
            .q
            .as_ref()
            .ok_or_else(|| Error::Domain("no model attached; call with_model first".into()))?;
        let p_wx = self.marginal(&[Axis::W, Axis::X]);
        let dx = self.dims[1];
        let mut cross_entropy = 0.0;
        let mut model_divergence = 0.0;
        for (coord, p) in self.cells() {
            if p == 0.0 {
                continue;
            }
            let [w, x, y] = coord;
            let qv = q[(w * dx + x) * self.dims[2] + y];
            if qv == 0.0 {
                return Err(Error::Domain(format!(
                    "model gives zero probability to occupied cell ({w}, {x}, {y})"
                )));
            }
            cross_entropy -= p * qv.ln();
            // ln p(y | w, x) = ln p(w, x, y) - ln p(w, x).
            model_divergence += p * (p.ln() - p_wx[w * dx + x].ln() - qv.ln());
        }
        let out = CeDecomposition {
            cross_entropy,
            label_entropy: self.entropy_of(&[Axis::Y]),
            mi_y_x_given_w: self.conditional_mutual_information(Axis::Y, Axis::X, Axis::W),
            mi_y_w_given_x: self.conditional_mutual_information(Axis::Y, Axis::W, Axis::X),
            mi_w_x: self.mutual_information(Axis::W, Axis::X),
            mi_w_x_given_y: self.conditional_mutual_information(Axis::W, Axis::X, Axis::Y),
            model_divergence,
        };
        Ok(out)
    }

    /// Checks that the joint factorizes as the chain `W -> X -> Y`
    /// (`p(w, x, y) p(x) = p(w, x) p(x, y)` everywhere) and returns the
    /// three pairwise informations. The end-to-end term can never exceed
    /// either link of a genuine chain.
    pub fn dpi_check(&self) -> Result<DpiCheck> {
        let px = self.marginal(&[Axis::X]);
        let pwx = self.marginal(&[Axis::W, Axis::X]);
        let pxy = self.marginal(&[Axis::X, Axis::Y]);
        let (dx, dy) = (self.dims[1], self.dims[2]);
        let mut worst = 0.0f64;
        for (coord, p) in self.cells() {
            let [w, x, y] = coord;
            let gap = (p * px[x] - pwx[w * dx + x] * pxy[x * dy + y]).abs();
            worst = worst.max(gap);
        }
        if worst > 1e-12 {
            return Err(Error::NotMarkovChain(format!(
                "factorization violated by up to {worst:.3e}"
            )));
        }
        Ok(DpiCheck {
            i_wx: self.mutual_information(Axis::W, Axis::X),
            i_xy: self.mutual_information(Axis::X, Axis::Y),
            i_wy: self.mutual_information(Axis::W, Axis::Y),
        })
    }
}

/// Both sides of the cross-entropy split, term by term.
///
/// The identity is
/// `cross_entropy = label_entropy - mi_y_x_given_w - mi_y_w_given_x - mi_w_x
///  + mi_w_x_given_y + model_divergence`,
/// so [`Self::residual`] is numerical noise whenever the inputs are
/// consistent.
#[derive(Debug, Clone, Copy)]
pub struct CeDecomposition {
    pub cross_entropy: f64,
    pub label_entropy: f64,
    pub mi_y_x_given_w: f64,
    pub mi_y_w_given_x: f64,
    pub mi_w_x: f64,
    pub mi_w_x_given_y: f64,
    pub model_divergence: f64,
}

impl CeDecomposition {
    /// The right-hand side reassembled from its terms.
    pub fn reconstructed(&self) -> f64 {
        self.label_entropy - self.mi_y_x_given_w - self.mi_y_w_given_x - self.mi_w_x
            + self.mi_w_x_given_y
            + self.model_divergence
    }

    pub fn residual(&self) -> f64 {
        (self.cross_entropy - self.reconstructed()).abs()
    }
}

/// Pairwise informations of a verified chain `W -> X -> Y`.
#[derive(Debug, Clone, Copy)]
pub struct DpiCheck {
    pub i_wx: f64,
    pub i_xy: f64,
    pub i_wy: f64,
}
