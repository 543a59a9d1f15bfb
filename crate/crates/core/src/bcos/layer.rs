use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_dim, Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{dot, norm, Scalar};

/// Output and alignment scale of one unit given `w·x` and the two norms.
///
/// The unit response `‖x‖‖w‖|cos|^B sign(cos)` is evaluated as
/// `(w·x) · |cos|^(B-1)`; the second value returned is that scale factor.
/// Norms are floored at [`Scalar::norm_floor`]. At `cos = 0` the scale is 1 for
/// `B = 1` and 0 otherwise.
#[inline]
pub(crate) fn unit_response<T: Scalar>(dot: T, x_norm: T, w_norm: T, exponent: T) -> (T, T) {
    let floor = T::norm_floor();
    let alpha = exponent - T::one();
    let cos = dot / (x_norm.max(floor) * w_norm.max(floor));
    let scale = if cos == T::zero() {
        if alpha == T::zero() {
            T::one()
        } else {
            T::zero()
        }
    } else {
        cos.abs().powf(alpha)
    };
    (dot * scale, scale)
}

/// `‖x‖·‖w‖·|cos∠(x,w)|^B·sign(cos∠(x,w))`; zero when either vector is zero.
pub fn bcos_unit<T: Scalar>(x: &[T], w: &[T], exponent: T) -> Result<T> {
    check_dim("bcos unit", w.len(), x.len())?;
    if !(exponent > T::zero()) {
        return Err(Error::invalid(format!("exponent B must be positive, got {exponent}")));
    }
    Ok(unit_response(dot(x, w), norm(x), norm(w), exponent).0)
}

/// Dense B-cos layer without bias.
#[derive(Debug, Clone, PartialEq)]
pub struct BcosLayer<T> {
    weights: Matrix<T>,
    exponent: T,
}

/// Intermediate values kept from a forward pass for backpropagation.
#[derive(Debug, Clone)]
pub(crate) struct LayerTrace<T> {
    pub input: Vec<T>,
    pub output: Vec<T>,
    pub scale: Vec<T>,
    pub input_norm: T,
}

impl<T: Scalar> BcosLayer<T> {
    pub fn new(weights: Matrix<T>, exponent: T) -> Result<Self> {
        if weights.rows() == 0 || weights.cols() == 0 {
            return Err(Error::invalid("layer dimensions must be positive"));
        }
        if !weights.is_finite() {
            return Err(Error::invalid("layer weights must be finite"));
        }
        if !(exponent > T::zero() && exponent.is_finite()) {
            return Err(Error::invalid(format!("exponent B must be positive, got {exponent}")));
        }
        Ok(Self { weights, exponent })
    }

    /// Gaussian initialisation with row norms close to one.
    pub fn random(out_dim: usize, in_dim: usize, exponent: T, rng: &mut impl Rng) -> Result<Self> {
        let std = 1.0 / (in_dim.max(1) as f64).sqrt();
        let data = (0..out_dim * in_dim)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                T::of(z * std)
            })
            .collect();
        Self::new(Matrix::from_vec(out_dim, in_dim, data)?, exponent)
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn exponent(&self) -> T {
        self.exponent
    }

    pub fn weights(&self) -> &Matrix<T> {
        &self.weights
    }

    pub(crate) fn weights_mut(&mut self) -> &mut Matrix<T> {
        &mut self.weights
    }

    pub(crate) fn row_norms(&self) -> Vec<T> {
        (0..self.out_dim()).map(|i| norm(self.weights.row(i))).collect()
    }

    pub fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        check_dim("layer input", self.in_dim(), x.len())?;
        let x_norm = norm(x);
        Ok((0..self.out_dim())
            .map(|i| {
                let w = self.weights.row(i);
                unit_response(dot(w, x), x_norm, norm(w), self.exponent).0
            })
            .collect())
    }

    pub(crate) fn trace(&self, x: Vec<T>, row_norms: &[T]) -> LayerTrace<T> {
        let input_norm = norm(&x);
        let mut output = Vec::with_capacity(self.out_dim());
        let mut scale = Vec::with_capacity(self.out_dim());
        for (i, &w_norm) in row_norms.iter().enumerate() {
            let (y, s) = unit_response(dot(self.weights.row(i), &x), input_norm, w_norm, self.exponent);
            output.push(y);
            scale.push(s);
        }
        LayerTrace {
            input: x,
            output,
            scale,
            input_norm,
        }
    }

    /// Accumulates `∂L/∂W` into `grad` and returns `∂L/∂x` when requested.
    ///
    /// With `s = |cos|^(B-1)` and `y = (w·x)s`:
    /// `∂y/∂w = B s x − (B−1) y w/‖w‖²` and `∂y/∂x = B s w − (B−1) y x/‖x‖²`.
    /// The norm terms vanish for floored norms.
    pub(crate) fn backward(
        &self,
        trace: &LayerTrace<T>,
        row_norms: &[T],
        grad_out: &[T],
        grad: &mut Matrix<T>,
        want_input_grad: bool,
    ) -> Option<Vec<T>> {
        let floor = T::norm_floor();
        let b = self.exponent;
        let alpha = b - T::one();
        let x = &trace.input;
        let mut gx = want_input_grad.then(|| vec![T::zero(); x.len()]);
        let mut gy_dot_y = T::zero();
        for (i, &g) in grad_out.iter().enumerate() {
            if g == T::zero() {
                continue;
            }
            let y = trace.output[i];
            let coef = b * trace.scale[i] * g;
            let w = self.weights.row(i);
            let w_norm = row_norms[i];
            let w_term = if w_norm >= floor && alpha != T::zero() {
                alpha * y * g / (w_norm * w_norm)
            } else {
                T::zero()
            };
            for ((gw, &xv), &wv) in grad.row_mut(i).iter_mut().zip(x).zip(w) {
                *gw = *gw + coef * xv - w_term * wv;
            }
            if let Some(gx) = gx.as_mut() {
                for (gxv, &wv) in gx.iter_mut().zip(w) {
                    *gxv = *gxv + coef * wv;
                }
            }
            gy_dot_y = gy_dot_y + g * y;
        }
        if let Some(gx) = gx.as_mut() {
            let nx = trace.input_norm;
            if nx >= floor && alpha != T::zero() {
                let k = alpha * gy_dot_y / (nx * nx);
                for (gxv, &xv) in gx.iter_mut().zip(x) {
                    *gxv = *gxv - k * xv;
                }
            }
        }
        gx
    }

    /// Matrix whose product with `x` reproduces this layer's output at `x`:
    /// row `i` is `|cos∠(x, wᵢ)|^(B−1) · wᵢ`.
    pub fn effective_matrix(&self, x: &[T]) -> Result<Matrix<T>> {
        check_dim("layer input", self.in_dim(), x.len())?;
        let x_norm = norm(x);
        let mut m = Matrix::zeros(self.out_dim(), self.in_dim());
        if x_norm == T::zero() {
            return Ok(m);
        }
        for i in 0..self.out_dim() {
            let w = self.weights.row(i);
            let w_norm = norm(w);
            if w_norm == T::zero() {
                continue;
            }
            let (_, s) = unit_response(dot(w, x), x_norm, w_norm, self.exponent);
            for (o, &wv) in m.row_mut(i).iter_mut().zip(w) {
                *o = s * wv;
            }
        }
        Ok(m)
    }
}
