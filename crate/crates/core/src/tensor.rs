//! Dense row-major tensors over `f64`.
//!
//! Everything the models train on lives in these flat buffers. Shapes are
//! explicit; all operations validate dimensions and report mismatches with
//! both shapes named.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let numel: usize = shape.iter().product();
        if shape.iter().any(|&d| d == 0) {
            return Err(Error::dimension(format!(
                "zero-sized dimension in shape {shape:?}"
            )));
        }
        if numel != data.len() {
            return Err(Error::dimension(format!(
                "shape {:?} implies {} elements, got {}",
                shape,
                numel,
                data.len()
            )));
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let numel = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; numel],
        }
    }

    pub fn filled(shape: &[usize], value: f64) -> Self {
        let numel = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![value; numel],
        }
    }

    pub fn scalar(value: f64) -> Self {
        Tensor {
            shape: vec![1],
            data: vec![value],
        }
    }

    /// 1-D tensor from a vector.
    pub fn from_vec(data: Vec<f64>) -> Self {
        Tensor {
            shape: vec![data.len()],
            data,
        }
    }

    /// 2-D tensor from rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::dimension("from_rows: no rows"));
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::dimension(format!(
                    "from_rows: row 0 has {} columns, row {} has {}",
                    cols,
                    i,
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Tensor::new(vec![rows.len(), cols], data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// True for a rank-0/1 tensor with a single element.
    pub fn is_scalar(&self) -> bool {
        self.data.len() == 1 && self.rank() <= 1
    }

    pub fn scalar_value(&self) -> Result<f64> {
        if !self.is_scalar() {
            return Err(Error::contract(format!(
                "expected a scalar, got shape {:?}",
                self.shape
            )));
        }
        Ok(self.data[0])
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Row `i` of a 2-D tensor.
    pub fn row(&self, i: usize) -> Result<&[f64]> {
        if self.rank() != 2 {
            return Err(Error::dimension(format!(
                "row: tensor has shape {:?}, expected rank 2",
                self.shape
            )));
        }
        let (rows, cols) = (self.shape[0], self.shape[1]);
        if i >= rows {
            return Err(Error::Index(format!("row {i} out of range 0..{rows}")));
        }
        Ok(&self.data[i * cols..(i + 1) * cols])
    }

    pub fn transpose(&self) -> Result<Tensor> {
        if self.rank() != 2 {
            return Err(Error::dimension(format!(
                "transpose: tensor has shape {:?}, expected rank 2",
                self.shape
            )));
        }
        let (m, n) = (self.shape[0], self.shape[1]);
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                out[j * m + i] = self.data[i * n + j];
            }
        }
        Tensor::new(vec![n, m], out)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        if self.shape != other.shape {
            return Err(Error::dimension(format!(
                "add: shape {:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Tensor {
            shape: self.shape.clone(),
            data,
        })
    }

    pub fn mul(&self, other: &Tensor) -> Result<Tensor> {
        if self.shape != other.shape {
            return Err(Error::dimension(format!(
                "mul: shape {:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .collect();
        Ok(Tensor {
            shape: self.shape.clone(),
            data,
        })
    }

    pub fn scale(&self, c: f64) -> Tensor {
        self.map(|v| v * c)
    }

    pub fn l2_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// `a[M×K] · b[K×N] -> [M×N]`.
pub fn matmul(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    if a.rank() != 2 || b.rank() != 2 {
        return Err(Error::dimension(format!(
            "matmul: shapes {:?} x {:?}, expected rank 2",
            a.shape, b.shape
        )));
    }
    let (m, k) = (a.shape[0], a.shape[1]);
    let (k2, n) = (b.shape[0], b.shape[1]);
    if k != k2 {
        return Err(Error::dimension(format!(
            "matmul: inner dimensions disagree, {:?} x {:?}",
            a.shape, b.shape
        )));
    }
    let mut out = vec![0.0; m * n];
    matmul_into(&mut out, &a.data, &b.data, m, k, n);
    Tensor::new(vec![m, n], out)
}

/// `a[M×K] · b[N×K]ᵀ -> [M×N]`.
pub fn matmul_nt(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    if a.rank() != 2 || b.rank() != 2 {
        return Err(Error::dimension(format!(
            "matmul_nt: shapes {:?} x {:?}, expected rank 2",
            a.shape, b.shape
        )));
    }
    let (m, k) = (a.shape[0], a.shape[1]);
    let (n, k2) = (b.shape[0], b.shape[1]);
    if k != k2 {
        return Err(Error::dimension(format!(
            "matmul_nt: inner dimensions disagree, {:?} x {:?}ᵀ",
            a.shape, b.shape
        )));
    }
    let mut out = vec![0.0; m * n];
    matmul_nt_into(&mut out, &a.data, &b.data, m, k, n);
    Tensor::new(vec![m, n], out)
}

/// `w[M×N] · x[N] -> [M]`.
pub fn matvec(w: &Tensor, x: &Tensor) -> Result<Tensor> {
    if w.rank() != 2 || x.rank() != 1 {
        return Err(Error::dimension(format!(
            "matvec: shapes {:?} x {:?}",
            w.shape, x.shape
        )));
    }
    let (m, n) = (w.shape[0], w.shape[1]);
    if n != x.shape[0] {
        return Err(Error::dimension(format!(
            "matvec: inner dimensions disagree, {:?} x {:?}",
            w.shape, x.shape
        )));
    }
    let mut out = vec![0.0; m];
    for i in 0..m {
        out[i] = dot(&w.data[i * n..(i + 1) * n], &x.data);
    }
    Ok(Tensor::from_vec(out))
}

/// Identity matrix of size `n`.
pub fn identity(n: usize) -> Tensor {
    let mut t = Tensor::zeros(&[n, n]);
    for i in 0..n {
        t.data[i * n + i] = 1.0;
    }
    t
}

/// Numerically stable softmax of a 1-D tensor (max-subtraction).
pub fn softmax(x: &Tensor) -> Result<Tensor> {
    if x.rank() != 1 || x.numel() == 0 {
        return Err(Error::dimension(format!(
            "softmax: expected a non-empty 1-D tensor, got shape {:?}",
            x.shape
        )));
    }
    Ok(Tensor::from_vec(softmax_slice(&x.data)))
}

pub(crate) fn softmax_slice(x: &[f64]) -> Vec<f64> {
    let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = x.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub(crate) fn log_softmax_slice(x: &[f64]) -> Vec<f64> {
    let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_sum: f64 = x.iter().map(|&v| (v - max).exp()).sum::<f64>().ln();
    x.iter().map(|&v| v - max - log_sum).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn matmul_into(c: &mut [f64], a: &[f64], b: &[f64], m: usize, k: usize, n: usize) {
    for i in 0..m {
        let a_row = &a[i * k..(i + 1) * k];
        let c_row = &mut c[i * n..(i + 1) * n];
        for (kk, &av) in a_row.iter().enumerate() {
            let b_row = &b[kk * n..(kk + 1) * n];
            for (cv, &bv) in c_row.iter_mut().zip(b_row) {
                *cv += av * bv;
            }
        }
    }
}

/// `c[M×N] += a[M×K] · b[N×K]ᵀ`.
pub(crate) fn matmul_nt_into(c: &mut [f64], a: &[f64], b: &[f64], m: usize, k: usize, n: usize) {
    for i in 0..m {
        let a_row = &a[i * k..(i + 1) * k];
        let c_row = &mut c[i * n..(i + 1) * n];
        for (j, cv) in c_row.iter_mut().enumerate() {
            *cv += dot(a_row, &b[j * k..(j + 1) * k]);
        }
    }
}

/// `c[K×N] += a[M×K]ᵀ · b[M×N]`.
pub(crate) fn matmul_tn_into(c: &mut [f64], a: &[f64], b: &[f64], m: usize, k: usize, n: usize) {
    for i in 0..m {
        let a_row = &a[i * k..(i + 1) * k];
        let b_row = &b[i * n..(i + 1) * n];
        for (kk, &av) in a_row.iter().enumerate() {
            let c_row = &mut c[kk * n..(kk + 1) * n];
            for (cv, &bv) in c_row.iter_mut().zip(b_row) {
                *cv += av * bv;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn matmul_identity() {
        let a = Tensor::from_rows(&[vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let r = matmul(&identity(2), &a).unwrap();
        assert_eq!(r, a);
    }

    #[test]
    fn matmul_hand_case() {
        let a = Tensor::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let b = Tensor::from_rows(&[vec![3.0], vec![4.0]]).unwrap();
        let r = matmul(&a, &b).unwrap();
        assert_eq!(r.data(), &[11.0]);
    }

    #[test]
    fn matmul_shape_mismatch_names_both_shapes() {
        let a = Tensor::zeros(&[2, 3]);
        let b = Tensor::zeros(&[2, 3]);
        let err = matmul(&a, &b).unwrap_err().to_string();
        assert!(err.contains("[2, 3]"), "{err}");
    }

    #[test]
    fn softmax_uniform_and_stability() {
        let r = softmax(&Tensor::from_vec(vec![0.0, 0.0])).unwrap();
        assert_abs_diff_eq!(r.data()[0], 0.5, epsilon = 1e-15);
        let r = softmax(&Tensor::from_vec(vec![7.0; 4])).unwrap();
        for v in r.data() {
            assert_abs_diff_eq!(*v, 0.25, epsilon = 1e-12);
        }
        let r = softmax(&Tensor::from_vec(vec![1000.0, 0.0])).unwrap();
        assert!(r.is_finite());
        assert_abs_diff_eq!(r.data()[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.data()[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn softmax_empty_is_error() {
        assert!(softmax(&Tensor {
            shape: vec![0],
            data: vec![],
        })
        .is_err());
    }

    proptest! {
        #[test]
        fn matmul_transpose_identity(
            a in proptest::collection::vec(-5.0f64..5.0, 6),
            b in proptest::collection::vec(-5.0f64..5.0, 12),
        ) {
            let a = Tensor::new(vec![2, 3], a).unwrap();
            let b = Tensor::new(vec![3, 4], b).unwrap();
            let ab_t = matmul(&a, &b).unwrap().transpose().unwrap();
            let bt_at = matmul(&b.transpose().unwrap(), &a.transpose().unwrap()).unwrap();
            for (x, y) in ab_t.data().iter().zip(bt_at.data()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn softmax_sums_to_one_and_shift_invariant(
            x in proptest::collection::vec(-30.0f64..30.0, 1..12),
            shift in -100.0f64..100.0,
        ) {
            let base = softmax(&Tensor::from_vec(x.clone())).unwrap();
            let sum: f64 = base.data().iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            prop_assert!(base.data().iter().all(|&p| p > 0.0));
            let shifted = softmax(&Tensor::from_vec(x.iter().map(|v| v + shift).collect())).unwrap();
            for (a, b) in base.data().iter().zip(shifted.data()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
