//! Dense linear-algebra helpers shared by the solver and the model.

use nalgebra::{DMatrix, DVector};

/// Householder QR with column pivoting, `A P = Q R`, keeping the full square `Q`.
///
/// `rank` counts the diagonal entries of `R` above `tol * |R[0,0]|`.
pub struct PivotedQr {
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
    /// `perm[k]` is the original column stored at position `k`.
    pub perm: Vec<usize>,
    pub rank: usize,
}

impl PivotedQr {
    pub fn new(a: &DMatrix<f64>, tol: f64) -> Self {
        let (m, n) = a.shape();
        let mut r = a.clone();
        let mut q = DMatrix::<f64>::identity(m, m);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut norms: Vec<f64> = (0..n).map(|j| r.column(j).norm_squared()).collect();
        let steps = m.min(n);
        let mut v = DVector::<f64>::zeros(m);

        for k in 0..steps {
            // pivot: largest remaining column norm, lowest index on ties
            let mut best = k;
            for j in k + 1..n {
                if norms[j] > norms[best] {
                    best = j;
                }
            }
            if best != k {
                r.swap_columns(k, best);
                norms.swap(k, best);
                perm.swap(k, best);
            }
            let alpha = r.view((k, k), (m - k, 1)).norm();
            if alpha == 0.0 {
                continue;
            }
            let x0 = r[(k, k)];
            let sign = if x0 >= 0.0 { 1.0 } else { -1.0 };
            for i in 0..m {
                v[i] = if i < k { 0.0 } else { r[(i, k)] };
            }
            v[k] += sign * alpha;
            let vnorm2: f64 = (k..m).map(|i| v[i] * v[i]).sum();
            if vnorm2 == 0.0 {
                continue;
            }
            // R <- (I - 2 v v'/v'v) R on rows k..m
            for j in k..n {
                let dot: f64 = (k..m).map(|i| v[i] * r[(i, j)]).sum();
                let f = 2.0 * dot / vnorm2;
                for i in k..m {
                    r[(i, j)] -= f * v[i];
                }
            }
            // Q <- Q (I - 2 v v'/v'v)
            for i in 0..m {
                let dot: f64 = (k..m).map(|l| q[(i, l)] * v[l]).sum();
                let f = 2.0 * dot / vnorm2;
                for l in k..m {
                    q[(i, l)] -= f * v[l];
                }
            }
            for i in k + 1..m {
                r[(i, k)] = 0.0;
            }
            for j in k + 1..n {
                norms[j] = (k + 1..m).map(|i| r[(i, j)] * r[(i, j)]).sum();
            }
        }

        let r00 = if steps > 0 { r[(0, 0)].abs() } else { 0.0 };
        let thresh = tol * r00.max(1e-300);
        let rank = (0..steps)
            .take_while(|&k| r[(k, k)].abs() > thresh && r[(k, k)].abs() > 1e-14)
            .count();
        PivotedQr { q, r, perm, rank }
    }

    /// Orthonormal basis of the orthogonal complement of `range(A)`.
    pub fn null_complement(&self) -> DMatrix<f64> {
        let m = self.q.nrows();
        self.q.columns(self.rank, m - self.rank).into_owned()
    }

    /// Basic least-squares solution of `A w = b` using the leading `rank` columns.
    pub fn solve_least_squares(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.r.ncols();
        let qtb = self.q.transpose() * b;
        let k = self.rank;
        let mut w = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = qtb[i];
            for j in i + 1..k {
                s -= self.r[(i, j)] * w[j];
            }
            w[i] = s / self.r[(i, i)];
        }
        let mut out = DVector::zeros(n);
        for (pos, val) in w.into_iter().enumerate() {
            out[self.perm[pos]] = val;
        }
        out
    }
}

/// Smallest eigenvalue of a symmetric matrix (`+inf` for the empty matrix).
pub fn min_eigenvalue(h: &DMatrix<f64>) -> f64 {
    if h.nrows() == 0 {
        return f64::INFINITY;
    }
    let sym = (h + h.transpose()) * 0.5;
    sym.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Positive semidefiniteness up to a tolerance relative to the largest entry.
pub fn is_psd(h: &DMatrix<f64>, rel_tol: f64) -> bool {
    let scale = h.amax().max(1.0);
    min_eigenvalue(h) >= -rel_tol * scale
}

pub fn is_symmetric(h: &DMatrix<f64>, tol: f64) -> bool {
    h.is_square() && (h - h.transpose()).amax() <= tol * h.amax().max(1.0)
}

pub fn inf_norm(v: &DVector<f64>) -> f64 {
    v.amax()
}

/// Serde adapters: matrices as `{rows, cols, data: [[..], ..]}`, vectors as plain arrays.
pub mod serde_dense {
    use nalgebra::{DMatrix, DVector};
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct MatrixRepr {
        rows: usize,
        cols: usize,
        data: Vec<Vec<f64>>,
    }

    fn to_repr(m: &DMatrix<f64>) -> MatrixRepr {
        MatrixRepr {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m.row_iter().map(|r| r.iter().copied().collect()).collect(),
        }
    }

    fn from_repr(r: MatrixRepr) -> Result<DMatrix<f64>, String> {
        if r.data.len() != r.rows || r.data.iter().any(|row| row.len() != r.cols) {
            return Err(format!(
                "matrix data does not match declared shape {}x{}",
                r.rows, r.cols
            ));
        }
        Ok(DMatrix::from_fn(r.rows, r.cols, |i, j| r.data[i][j]))
    }

    pub mod mat {
        use super::*;
        pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
            to_repr(m).serialize(s)
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
            from_repr(MatrixRepr::deserialize(d)?).map_err(D::Error::custom)
        }
    }

    pub mod opt_mats {
        use super::*;
        pub fn serialize<S: Serializer>(
            m: &[Option<DMatrix<f64>>],
            s: S,
        ) -> Result<S::Ok, S::Error> {
            let v: Vec<Option<MatrixRepr>> = m.iter().map(|x| x.as_ref().map(to_repr)).collect();
            v.serialize(s)
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> Result<Vec<Option<DMatrix<f64>>>, D::Error> {
            let v = Vec::<Option<MatrixRepr>>::deserialize(d)?;
            v.into_iter()
                .map(|x| x.map(from_repr).transpose().map_err(D::Error::custom))
                .collect()
        }
    }

    pub mod mats {
        use super::*;
        pub fn serialize<S: Serializer>(m: &[DMatrix<f64>], s: S) -> Result<S::Ok, S::Error> {
            let v: Vec<MatrixRepr> = m.iter().map(to_repr).collect();
            v.serialize(s)
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<DMatrix<f64>>, D::Error> {
            Vec::<MatrixRepr>::deserialize(d)?
                .into_iter()
                .map(|x| from_repr(x).map_err(D::Error::custom))
                .collect()
        }
    }

    pub mod vector {
        use super::*;
        pub fn serialize<S: Serializer>(v: &DVector<f64>, s: S) -> Result<S::Ok, S::Error> {
            v.as_slice().serialize(s)
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DVector<f64>, D::Error> {
            Ok(DVector::from_vec(Vec::<f64>::deserialize(d)?))
        }
    }

    fn ser_bounds<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let raw: Vec<Option<f64>> = v.iter().map(|x| x.is_finite().then_some(*x)).collect();
        raw.serialize(s)
    }

    fn de_bounds<'de, D: Deserializer<'de>>(d: D, missing: f64) -> Result<Vec<f64>, D::Error> {
        Ok(Vec::<Option<f64>>::deserialize(d)?
            .into_iter()
            .map(|x| x.unwrap_or(missing))
            .collect())
    }

    /// Lower bounds with `null` standing for `-inf`.
    pub mod lower_bounds {
        use super::*;
        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            ser_bounds(v, s)
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            de_bounds(d, f64::NEG_INFINITY)
        }
    }

    /// Upper bounds with `null` standing for `+inf`.
    pub mod upper_bounds {
        use super::*;
        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            ser_bounds(v, s)
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            de_bounds(d, f64::INFINITY)
        }
    }

    pub mod vectors {
        use super::*;
        pub fn serialize<S: Serializer>(v: &[DVector<f64>], s: S) -> Result<S::Ok, S::Error> {
            let raw: Vec<&[f64]> = v.iter().map(|x| x.as_slice()).collect();
            raw.serialize(s)
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<DVector<f64>>, D::Error> {
            Ok(Vec::<Vec<f64>>::deserialize(d)?
                .into_iter()
                .map(DVector::from_vec)
                .collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pivoted_qr_reconstructs_and_spans_complement() {
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 2.0, 0.0, 1.0, 3.0, -1.0, 1.0, 1.0]);
        let qr = PivotedQr::new(&a, 1e-12);
        assert_eq!(qr.rank, 2);
        let mut ap = DMatrix::zeros(4, 2);
        for (k, &j) in qr.perm.iter().enumerate() {
            ap.set_column(k, &a.column(j));
        }
        assert!((&qr.q * &qr.r - ap).amax() < 1e-12);
        let z = qr.null_complement();
        assert_eq!(z.ncols(), 2);
        assert!((a.transpose() * z).amax() < 1e-12);
    }

    #[test]
    fn pivoted_qr_detects_rank_deficiency() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 1.0, 1.0]);
        let qr = PivotedQr::new(&a.transpose(), 1e-10);
        assert_eq!(qr.rank, 2);
    }

    #[test]
    fn least_squares_matches_consistent_system() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let w = DVector::from_vec(vec![0.5, -2.0]);
        let b = &a * &w;
        let qr = PivotedQr::new(&a, 1e-12);
        assert!((qr.solve_least_squares(&b) - w).amax() < 1e-12);
    }

    #[test]
    fn psd_check() {
        let h = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        assert!(is_psd(&h, 1e-10));
        let h = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(!is_psd(&h, 1e-10));
    }
}
