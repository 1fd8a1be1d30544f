//! Dense exact integer linear algebra: products, Hermite and Smith forms,
//! kernels and unimodular inverses.

use std::fmt;

use serde::Serialize;

#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    /// Builds a matrix from row vectors. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix rows");
            data.extend_from_slice(row);
        }
        IntMatrix { rows: r, cols: c, data }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_cols(cols: &[Vec<i64>]) -> Self {
        Self::from_rows(cols).transpose()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<i64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[i64]) -> Vec<i64> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn neg(&self) -> IntMatrix {
        IntMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| -x).collect() }
    }

    pub fn sub(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Non-negative power of a square matrix.
    pub fn pow(&self, n: u32) -> IntMatrix {
        assert!(self.is_square());
        let mut acc = Self::identity(self.rows);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Stacks matrices with equal column counts vertically.
    pub fn vstack(blocks: &[IntMatrix]) -> IntMatrix {
        let cols = blocks.first().map_or(0, |b| b.cols);
        let mut data = Vec::new();
        let mut rows = 0;
        for b in blocks {
            assert_eq!(b.cols, cols);
            data.extend_from_slice(&b.data);
            rows += b.rows;
        }
        IntMatrix { rows, cols, data }
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> i64 {
        assert!(self.is_square());
        let n = self.rows;
        if n == 0 {
            return 1;
        }
        let mut a: Vec<Vec<i128>> =
            (0..n).map(|i| self.row(i).iter().map(|&x| x as i128).collect()).collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n - 1 {
            if a[k][k] == 0 {
                match (k + 1..n).find(|&r| a[r][k] != 0) {
                    Some(r) => {
                        a.swap(k, r);
                        sign = -sign;
                    }
                    None => return 0,
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
                }
            }
            prev = a[k][k];
        }
        to_i64(sign * a[n - 1][n - 1])
    }

    /// Inverse over the integers; `None` unless the determinant is ±1.
    pub fn inverse(&self) -> Option<IntMatrix> {
        assert!(self.is_square());
        let n = self.rows;
        let mut aug: Vec<Vec<i128>> = (0..n)
            .map(|i| {
                let mut r: Vec<i128> = self.row(i).iter().map(|&x| x as i128).collect();
                r.extend((0..n).map(|j| (i == j) as i128));
                r
            })
            .collect();
        let h = hermite_rows_i128(&mut aug, n);
        if h != n || (0..n).any(|i| aug[i][i] != 1) {
            return None;
        }
        // Clear above the unit pivots.
        for c in (0..n).rev() {
            for r in 0..c {
                let q = aug[r][c];
                if q != 0 {
                    for j in 0..2 * n {
                        aug[r][j] -= q * aug[c][j];
                    }
                }
            }
        }
        let rows: Vec<Vec<i64>> =
            aug.iter().map(|r| r[n..].iter().map(|&x| to_i64(x)).collect()).collect();
        Some(IntMatrix::from_rows(&rows))
    }

    pub fn rank(&self) -> usize {
        let mut a: Vec<Vec<i128>> =
            (0..self.rows).map(|i| self.row(i).iter().map(|&x| x as i128).collect()).collect();
        hermite_rows_i128(&mut a, self.cols)
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = i64;
    fn index(&self, (i, j): (usize, usize)) -> &i64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut i64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_rows())
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.data.iter().map(|x| x.to_string().len()).max().unwrap_or(1);
        for i in 0..self.rows {
            let cells: Vec<String> = self.row(i).iter().map(|x| format!("{x:>w$}")).collect();
            writeln!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

fn to_i64(x: i128) -> i64 {
    i64::try_from(x).expect("integer overflow in exact linear algebra")
}

/// Row-style Hermite reduction in place over the first `pivot_cols` columns.
/// Returns the number of pivot rows; zero rows are moved to the bottom.
fn hermite_rows_i128(a: &mut [Vec<i128>], pivot_cols: usize) -> usize {
    let m = a.len();
    let mut r = 0;
    for c in 0..pivot_cols {
        if r == m {
            break;
        }
        loop {
            let best = (r..m).filter(|&i| a[i][c] != 0).min_by_key(|&i| a[i][c].abs());
            let Some(p) = best else { break };
            a.swap(r, p);
            let mut clean = true;
            for i in r + 1..m {
                if a[i][c] != 0 {
                    let q = a[i][c].div_euclid(a[r][c]);
                    let (top, rest) = a.split_at_mut(i);
                    for (x, y) in rest[0].iter_mut().zip(&top[r]) {
                        *x -= q * y;
                    }
                    if a[i][c] != 0 {
                        clean = false;
                    }
                }
            }
            if clean {
                break;
            }
        }
        if a[r][c] == 0 {
            continue;
        }
        if a[r][c] < 0 {
            for x in a[r].iter_mut() {
                *x = -*x;
            }
        }
        for i in 0..r {
            let q = a[i][c].div_euclid(a[r][c]);
            if q != 0 {
                let (top, rest) = a.split_at_mut(r);
                for (x, y) in top[i].iter_mut().zip(&rest[0]) {
                    *x -= q * y;
                }
            }
        }
        r += 1;
    }
    r
}

/// Canonical Hermite basis (row vectors) of the lattice spanned by `vectors`.
/// Two families span the same lattice iff their Hermite bases agree.
pub fn hermite_basis(vectors: &[Vec<i64>]) -> Vec<Vec<i64>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let n = vectors[0].len();
    let mut a: Vec<Vec<i128>> =
        vectors.iter().map(|v| v.iter().map(|&x| x as i128).collect()).collect();
    let r = hermite_rows_i128(&mut a, n);
    a.truncate(r);
    a.into_iter().map(|v| v.into_iter().map(to_i64).collect()).collect()
}

/// Basis of the integer kernel {x : A x = 0}. The result spans the full
/// (saturated) kernel lattice.
pub fn integer_kernel(a: &IntMatrix) -> Vec<Vec<i64>> {
    let n = a.cols();
    // Column operations on A, mirrored on V (starts as identity).
    let mut cols: Vec<Vec<i128>> =
        (0..n).map(|j| a.col(j).into_iter().map(|x| x as i128).collect()).collect();
    let mut v: Vec<Vec<i128>> = (0..n).map(|j| (0..n).map(|i| (i == j) as i128).collect()).collect();
    let mut piv = 0;
    for row in 0..a.rows() {
        loop {
            let best = (piv..n).filter(|&j| cols[j][row] != 0).min_by_key(|&j| cols[j][row].abs());
            let Some(k) = best else { break };
            cols.swap(piv, k);
            v.swap(piv, k);
            let mut clean = true;
            for j in piv + 1..n {
                if cols[j][row] != 0 {
                    let q = cols[j][row].div_euclid(cols[piv][row]);
                    let (l, r) = cols.split_at_mut(j);
                    for (x, y) in r[0].iter_mut().zip(&l[piv]) {
                        *x -= q * y;
                    }
                    let (l, r) = v.split_at_mut(j);
                    for (x, y) in r[0].iter_mut().zip(&l[piv]) {
                        *x -= q * y;
                    }
                    if cols[j][row] != 0 {
                        clean = false;
                    }
                }
            }
            if clean {
                piv += 1;
                break;
            }
        }
        if piv == n {
            break;
        }
    }
    let basis: Vec<Vec<i64>> =
        v[piv..].iter().map(|c| c.iter().map(|&x| to_i64(x)).collect()).collect();
    hermite_basis(&basis)
}

/// Nonzero invariant factors of the Smith normal form, in divisibility order.
pub fn smith_invariants(a: &IntMatrix) -> Vec<i64> {
    let mut m: Vec<Vec<i128>> =
        (0..a.rows()).map(|i| a.row(i).iter().map(|&x| x as i128).collect()).collect();
    let rows = a.rows();
    let cols = a.cols();
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // Smallest nonzero entry of the remaining block becomes the pivot.
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if m[i][j] != 0 && best.is_none_or(|(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        m.swap(t, pi);
        for r in m.iter_mut() {
            r.swap(t, pj);
        }
        loop {
            let p = m[t][t];
            let mut changed = false;
            for i in t + 1..rows {
                if m[i][t] != 0 {
                    let q = m[i][t].div_euclid(p);
                    let (top, rest) = m.split_at_mut(i);
                    for (x, y) in rest[0].iter_mut().zip(&top[t]) {
                        *x -= q * y;
                    }
                    if m[i][t] != 0 {
                        changed = true;
                    }
                }
            }
            for j in t + 1..cols {
                if m[t][j] != 0 {
                    let q = m[t][j].div_euclid(p);
                    for r in m.iter_mut() {
                        r[j] -= q * r[t];
                    }
                    if m[t][j] != 0 {
                        changed = true;
                    }
                }
            }
            if !changed {
                // Enforce divisibility against the rest of the block.
                let bad = (t + 1..rows)
                    .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                    .find(|&(i, j)| m[i][j] % p != 0);
                match bad {
                    Some((i, _)) => {
                        let (top, rest) = m.split_at_mut(i);
                        for (x, y) in top[t].iter_mut().zip(&rest[0]) {
                            *x += y;
                        }
                    }
                    None => break,
                }
            }
            // Move the smallest nonzero entry of row/column t to the pivot.
            let mut best = (t, t);
            for i in t..rows {
                if m[i][t] != 0 && (m[best.0][best.1] == 0 || m[i][t].abs() < m[best.0][best.1].abs()) {
                    best = (i, t);
                }
            }
            for j in t..cols {
                if m[t][j] != 0 && (m[best.0][best.1] == 0 || m[t][j].abs() < m[best.0][best.1].abs()) {
                    best = (t, j);
                }
            }
            m.swap(t, best.0);
            for r in m.iter_mut() {
                r.swap(t, best.1);
            }
        }
        diag.push(to_i64(m[t][t].abs()));
        t += 1;
    }
    diag
}

/// Coordinates of `target` in the lattice basis `basis`, if it lies in the
/// integer span. `basis` must be linearly independent.
pub fn solve_in_basis(basis: &[Vec<i64>], target: &[i64]) -> Option<Vec<i64>> {
    let k = basis.len();
    let n = target.len();
    // Augmented system: rows are [basis_i | e_i], plus [target | 0]; reduce the
    // basis rows, then reduce the target against the pivots.
    let mut a: Vec<Vec<i128>> = basis
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let mut r: Vec<i128> = b.iter().map(|&x| x as i128).collect();
            r.extend((0..k).map(|j| (i == j) as i128));
            r
        })
        .collect();
    let r = hermite_rows_i128(&mut a, n);
    if r < k {
        return None;
    }
    let mut t: Vec<i128> = target.iter().map(|&x| x as i128).collect();
    t.extend(std::iter::repeat_n(0, k));
    for row in a.iter().take(r) {
        let c = row.iter().position(|&x| x != 0)?;
        if c >= n {
            return None;
        }
        if t[c] % row[c] != 0 {
            return None;
        }
        let q = t[c] / row[c];
        for (x, y) in t.iter_mut().zip(row) {
            *x -= q * y;
        }
    }
    if t[..n].iter().any(|&x| x != 0) {
        return None;
    }
    Some(t[n..].iter().map(|&x| to_i64(-x)).collect())
}


fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 { a.abs() } else { gcd(b, a % b) }
}

/// Signature (positive, negative) of a symmetric integer matrix, by exact
/// congruence diagonalization over the rationals.
pub fn signature(m: &IntMatrix) -> (usize, usize) {
    assert!(m.is_square());
    let n = m.rows();
    // Scaled-integer elimination: rows are kept integral, which preserves
    // the signs of the diagonal entries produced by congruence.
    let mut a: Vec<Vec<i128>> =
        (0..n).map(|i| m.row(i).iter().map(|&x| x as i128).collect()).collect();
    let (mut pos, mut neg) = (0, 0);
    let mut k = 0;
    while k < n {
        if a[k][k] == 0 {
            if let Some(j) = (k + 1..n).find(|&j| a[j][j] != 0) {
                a.swap(k, j);
                for r in a.iter_mut() {
                    r.swap(k, j);
                }
            } else if let Some(j) = (k + 1..n).find(|&j| a[k][j] != 0) {
                // Replace e_k by e_k + e_j: new diagonal 2 a_kj (a_jj = 0).
                for c in 0..n {
                    a[k][c] += a[j][c];
                }
                for r in 0..n {
                    a[r][k] += a[r][j];
                }
            } else {
                k += 1;
                continue;
            }
        }
        let p = a[k][k];
        if p > 0 { pos += 1 } else { neg += 1 }
        for i in k + 1..n {
            let f = a[i][k];
            if f == 0 {
                continue;
            }
            // row_i <- p*row_i - f*row_k, and the same on columns.
            for c in 0..n {
                a[i][c] = p * a[i][c] - f * a[k][c];
            }
            for r in 0..n {
                a[r][i] = p * a[r][i] - f * a[r][k];
            }
        }
        // The trailing block is now decoupled; scaling it by a positive
        // constant keeps its signature and bounds entry growth.
        let g = (k + 1..n).flat_map(|i| (k + 1..n).map(move |j| (i, j))).fold(0, |g, (i, j)| gcd(g, a[i][j]));
        if g > 1 {
            for i in k + 1..n {
                for j in k + 1..n {
                    a[i][j] /= g;
                }
            }
        }
        k += 1;
    }
    (pos, neg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_and_inverse() {
        let m = IntMatrix::from_rows(&[vec![1, 3, 6], vec![0, 1, 3], vec![0, 0, 1]]);
        assert_eq!(m.det(), 1);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), IntMatrix::identity(3));
        let s = IntMatrix::from_rows(&[vec![2, 0], vec![0, 1]]);
        assert_eq!(s.det(), 2);
        assert!(s.inverse().is_none());
        let f = IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]);
        assert_eq!(f.det(), -1);
        assert_eq!(f.inverse().unwrap(), f);
    }

    #[test]
    fn kernel_is_saturated() {
        // 2x - 2y = 0 has kernel spanned by (1,1), not (2,2).
        let a = IntMatrix::from_rows(&[vec![2, -2]]);
        assert_eq!(integer_kernel(&a), vec![vec![1, 1]]);
        let b = IntMatrix::from_rows(&[vec![1, 2, 3]]);
        let k = integer_kernel(&b);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert_eq!(b.mul_vec(v), vec![0]);
        }
    }

    #[test]
    fn smith_of_small_matrices() {
        let a = IntMatrix::from_rows(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        assert_eq!(smith_invariants(&a), vec![2, 6, 12]);
        assert_eq!(smith_invariants(&IntMatrix::from_rows(&[vec![2, 0], vec![0, 3]])), vec![1, 6]);
        assert!(smith_invariants(&IntMatrix::zeros(2, 2)).is_empty());
    }

    #[test]
    fn signature_of_lattices() {
        let hyp = IntMatrix::from_rows(&[vec![-2, 1], vec![1, 0]]);
        assert_eq!(signature(&hyp), (1, 1));
        let f0 = IntMatrix::from_rows(&[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, -1]]);
        assert_eq!(signature(&f0), (1, 2));
        assert_eq!(signature(&IntMatrix::identity(3).neg()), (0, 3));
    }

    #[test]
    fn span_membership() {
        let basis = vec![vec![1, 1, 0], vec![0, 2, 1]];
        assert_eq!(solve_in_basis(&basis, &[2, 4, 1]), Some(vec![2, 1]));
        assert_eq!(solve_in_basis(&basis, &[1, 0, 0]), None);
        assert_eq!(
            hermite_basis(&[vec![1, 1, 0], vec![0, 2, 1]]),
            hermite_basis(&[vec![1, 3, 1], vec![0, -2, -1]])
        );
    }
}
