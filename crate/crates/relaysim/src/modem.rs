//! Scalar M-PSK and matrix unitary alphabets, Gray mapping, differential
//! encoding, and minimum-distance slicing.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

const MEMBERSHIP_TOL: f64 = 1e-9;

/// An M-PSK constellation with points e^{j2πm/M} and a binary-reflected Gray map.
#[derive(Debug, Clone, PartialEq)]
pub struct PskConstellation {
    order: usize,
    points: Vec<Complex64>,
    /// `labels[m]` is the bit label carried by point m.
    labels: Vec<usize>,
    /// `index_of_label[l]` is the point carrying label l.
    index_of_label: Vec<usize>,
}

impl PskConstellation {
    /// Builds the M-PSK constellation; M must be a power of two, at least 2.
    pub fn new(order: usize) -> Result<Self> {
        if order < 2 || !order.is_power_of_two() {
            return Err(Error::argument(format!("PSK order must be a power of two ≥ 2, got {order}")));
        }
        let points = (0..order)
            .map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 / order as f64))
            .collect();
        let labels: Vec<usize> = (0..order).map(|m| m ^ (m >> 1)).collect();
        let mut index_of_label = vec![0; order];
        for (m, &l) in labels.iter().enumerate() {
            index_of_label[l] = m;
        }
        Ok(Self {
            order,
            points,
            labels,
            index_of_label,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    /// Bits per symbol, log2 M.
    pub fn bits_per_symbol(&self) -> usize {
        self.order.trailing_zeros() as usize
    }

    /// Bit label of point `index`.
    pub fn label(&self, index: usize) -> usize {
        self.labels[index]
    }

    /// Point carrying bit label `label`.
    pub fn index_of_label(&self, label: usize) -> usize {
        self.index_of_label[label]
    }

    /// Squared minimum Euclidean distance computed from the points.
    pub fn min_distance_sq(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.order {
            for j in (i + 1)..self.order {
                best = best.min((self.points[i] - self.points[j]).norm_sqr());
            }
        }
        best
    }

    /// Index of the constellation point equal to `value`, if any.
    pub fn index_of(&self, value: Complex64) -> Option<usize> {
        self.points.iter().position(|p| (p - value).norm() < MEMBERSHIP_TOL)
    }

    /// Hamming distance between the labels of two points.
    pub fn bit_errors(&self, a: usize, b: usize) -> u32 {
        (self.labels[a] ^ self.labels[b]).count_ones()
    }

    /// Maps a bit stream (MSB first within each symbol) to point indices.
    pub fn bits_to_indices(&self, bits: &[u8]) -> Result<Vec<usize>> {
        let k = self.bits_per_symbol();
        if bits.len() % k != 0 {
            return Err(Error::argument(format!(
                "bit length {} is not a multiple of {k}",
                bits.len()
            )));
        }
        bits.chunks(k)
            .map(|chunk| {
                let mut label = 0usize;
                for &b in chunk {
                    if b > 1 {
                        return Err(Error::argument(format!("bit value {b} is not 0 or 1")));
                    }
                    label = (label << 1) | b as usize;
                }
                Ok(self.index_of_label[label])
            })
            .collect()
    }

    /// Maps point indices back to bits (MSB first).
    pub fn indices_to_bits(&self, indices: &[usize]) -> Vec<u8> {
        let k = self.bits_per_symbol();
        let mut bits = Vec::with_capacity(indices.len() * k);
        for &m in indices {
            let label = self.labels[m];
            for shift in (0..k).rev() {
                bits.push(((label >> shift) & 1) as u8);
            }
        }
        bits
    }

    /// Maps bits to symbols and back again.
    pub fn gray_bits_roundtrip(&self, bits: &[u8]) -> Result<Vec<u8>> {
        let indices = self.bits_to_indices(bits)?;
        Ok(self.indices_to_bits(&indices))
    }

    /// Differential encoding s[0] = 1, s[k] = v[k]·s[k−1].
    pub fn diff_encode(&self, symbols: &[Complex64]) -> Result<Vec<Complex64>> {
        let indices = symbols
            .iter()
            .map(|&v| {
                self.index_of(v)
                    .ok_or_else(|| Error::argument(format!("symbol {v} is not in the {}-PSK constellation", self.order)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self
            .diff_encode_indices(&indices)
            .into_iter()
            .map(|m| self.points[m])
            .collect())
    }

    /// Differential encoding on point indices (phase accumulation modulo M).
    pub fn diff_encode_indices(&self, indices: &[usize]) -> Vec<usize> {
        let mut out = Vec::with_capacity(indices.len() + 1);
        let mut state = 0usize;
        out.push(state);
        for &m in indices {
            state = (state + m) % self.order;
            out.push(state);
        }
        out
    }

    /// Nearest constellation point to `decision`, ties to the lowest index.
    pub fn min_distance_detect(&self, decision: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (m, p) in self.points.iter().enumerate() {
            let d = (decision - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = m;
            }
        }
        best
    }
}

/// Nearest point of `constellation` to `decision`, ties to the lowest index.
pub fn min_distance_detect(decision: Complex64, constellation: &PskConstellation) -> Complex64 {
    constellation.point(constellation.min_distance_detect(decision))
}

/// A set of R×R unitary codewords built from a PSK source constellation.
#[derive(Debug, Clone)]
pub struct UnitaryCodebook {
    dimension: usize,
    codewords: Vec<DMatrix<Complex64>>,
    source: PskConstellation,
    /// Bit label of each codeword.
    labels: Vec<usize>,
    bits_per_codeword: usize,
}

/// (1/√2)·[[u1, −u2*], [u2, u1*]].
pub fn alamouti_codeword(u1: Complex64, u2: Complex64) -> DMatrix<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_row_slice(2, 2, &[u1 * s, -u2.conj() * s, u2 * s, u1.conj() * s])
}

impl UnitaryCodebook {
    /// The differential Alamouti codebook: all (u1, u2) pairs of the
    /// constellation, codeword index i1·M + i2, label (label(i1), label(i2)).
    pub fn alamouti(source: PskConstellation) -> Self {
        let m = source.order();
        let k = source.bits_per_symbol();
        let mut codewords = Vec::with_capacity(m * m);
        let mut labels = Vec::with_capacity(m * m);
        for i1 in 0..m {
            for i2 in 0..m {
                codewords.push(alamouti_codeword(source.point(i1), source.point(i2)));
                labels.push((source.label(i1) << k) | source.label(i2));
            }
        }
        Self {
            dimension: 2,
            codewords,
            source,
            labels,
            bits_per_codeword: 2 * k,
        }
    }

    /// A codebook from explicit matrices, labelled by their index.
    pub fn from_codewords(codewords: Vec<DMatrix<Complex64>>, source: PskConstellation) -> Result<Self> {
        let first = codewords.first().ok_or_else(|| Error::argument("codebook must be non-empty"))?;
        let dimension = first.nrows();
        if !codewords.len().is_power_of_two() {
            return Err(Error::argument("codebook size must be a power of two"));
        }
        for (i, v) in codewords.iter().enumerate() {
            if v.nrows() != dimension || v.ncols() != dimension {
                return Err(Error::argument(format!("codeword {i} is not {dimension}×{dimension}")));
            }
            let residual = (v.adjoint() * v - DMatrix::identity(dimension, dimension)).norm();
            if residual >= 1e-10 {
                return Err(Error::argument(format!("codeword {i} is not unitary (residual {residual:e})")));
            }
        }
        let bits_per_codeword = codewords.len().trailing_zeros() as usize;
        let labels = (0..codewords.len()).collect();
        Ok(Self {
            dimension,
            codewords,
            source,
            labels,
            bits_per_codeword,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn codeword(&self, index: usize) -> &DMatrix<Complex64> {
        &self.codewords[index]
    }

    pub fn codewords(&self) -> &[DMatrix<Complex64>] {
        &self.codewords
    }

    pub fn source(&self) -> &PskConstellation {
        &self.source
    }

    pub fn bits_per_codeword(&self) -> usize {
        self.bits_per_codeword
    }

    /// Hamming distance between the labels of two codewords.
    pub fn bit_errors(&self, a: usize, b: usize) -> u32 {
        (self.labels[a] ^ self.labels[b]).count_ones()
    }

    /// Differential encoding s[0] = e1, s[k] = V[k]·s[k−1] on codeword indices.
    pub fn diff_encode_matrix(&self, indices: &[usize]) -> Result<Vec<DVector<Complex64>>> {
        let mut s = DVector::from_element(self.dimension, Complex64::new(0.0, 0.0));
        s[0] = Complex64::new(1.0, 0.0);
        let mut out = Vec::with_capacity(indices.len() + 1);
        out.push(s.clone());
        for &i in indices {
            let v = self
                .codewords
                .get(i)
                .ok_or_else(|| Error::argument(format!("codeword index {i} out of range")))?;
            s = v * s;
            out.push(s.clone());
        }
        Ok(out)
    }
}

/// Differential encoding with explicit matrices, s[0] = e1, s[k] = V[k]·s[k−1].
pub fn diff_encode_matrix(codewords: &[DMatrix<Complex64>], dimension: usize) -> Result<Vec<DVector<Complex64>>> {
    let mut s = DVector::from_element(dimension, Complex64::new(0.0, 0.0));
    s[0] = Complex64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(codewords.len() + 1);
    out.push(s.clone());
    for (k, v) in codewords.iter().enumerate() {
        if v.nrows() != dimension || v.ncols() != dimension {
            return Err(Error::argument(format!("codeword {k} has the wrong dimension")));
        }
        s = v * s;
        out.push(s.clone());
    }
    Ok(out)
}
