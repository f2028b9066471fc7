use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Dense integer matrix, row major. Small sizes only; everything is exact.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMat {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMat { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMat::zero(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|v| v.len()).unwrap_or(0);
        let mut m = IntMat::zero(r, c);
        for (i, row) in rows.into_iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, x) in row.into_iter().enumerate() {
                m.set(i, j, x);
            }
        }
        m
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        IntMat::from_rows(
            rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> Vec<BigInt> {
        (0..self.cols).map(|j| self.get(i, j).clone()).collect()
    }

    pub fn col(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> IntMat {
        let mut t = IntMat::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = IntMat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * &v[j]).sum())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[a] += c * row[b]
    pub fn add_row(&mut self, a: usize, b: usize, c: &BigInt) {
        for j in 0..self.cols {
            let v = self.get(a, j) + c * self.get(b, j);
            self.set(a, j, v);
        }
    }

    /// col[a] += c * col[b]
    pub fn add_col(&mut self, a: usize, b: usize, c: &BigInt) {
        for i in 0..self.rows {
            let v = self.get(i, a) + c * self.get(i, b);
            self.set(i, a, v);
        }
    }

    pub fn negate_row(&mut self, a: usize) {
        for j in 0..self.cols {
            let v = -self.get(a, j);
            self.set(a, j, v);
        }
    }

    pub fn negate_col(&mut self, a: usize) {
        for i in 0..self.rows {
            let v = -self.get(i, a);
            self.set(i, a, v);
        }
    }

    pub fn hstack(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.rows, other.rows);
        let mut m = IntMat::zero(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                m.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        m
    }

    pub fn vstack(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.cols, other.cols);
        let mut m = IntMat::zero(self.rows + other.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j).clone());
            }
        }
        for i in 0..other.rows {
            for j in 0..self.cols {
                m.set(self.rows + i, j, other.get(i, j).clone());
            }
        }
        m
    }
}

impl std::fmt::Debug for IntMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "IntMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Smith normal form: returns (d, u, v) with u * m * v = d, u and v unimodular,
/// d diagonal with nonnegative entries, each dividing the next.
///
/// Pivot choice: smallest nonzero absolute value, ties broken by lowest
/// (row, col) index, so results are reproducible.
pub fn smith_normal_form(m: &IntMat) -> (IntMat, IntMat, IntMat) {
    let mut d = m.clone();
    let mut u = IntMat::identity(m.rows());
    let mut v = IntMat::identity(m.cols());
    let n = m.rows().min(m.cols());

    let mut k = 0;
    while k < n {
        // locate pivot: smallest |value| > 0 in d[k.., k..], lowest index on ties
        let mut pivot: Option<(usize, usize)> = None;
        for i in k..d.rows() {
            for j in k..d.cols() {
                let x = d.get(i, j);
                if x.is_zero() {
                    continue;
                }
                match &pivot {
                    None => pivot = Some((i, j)),
                    Some((pi, pj)) => {
                        if x.abs() < d.get(*pi, *pj).abs() {
                            pivot = Some((i, j));
                        }
                    }
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        d.swap_rows(k, pi);
        u.swap_rows(k, pi);
        d.swap_cols(k, pj);
        v.swap_cols(k, pj);

        // clear row k and column k
        let mut dirty = true;
        while dirty {
            dirty = false;
            for i in (k + 1)..d.rows() {
                if !d.get(i, k).is_zero() {
                    let q = floor_div(d.get(i, k), d.get(k, k));
                    if !q.is_zero() {
                        let c = -q;
                        d.add_row(i, k, &c);
                        u.add_row(i, k, &c);
                    }
                    if !d.get(i, k).is_zero() {
                        // remainder is smaller: swap up and restart
                        d.swap_rows(k, i);
                        u.swap_rows(k, i);
                        dirty = true;
                    }
                }
            }
            for j in (k + 1)..d.cols() {
                if !d.get(k, j).is_zero() {
                    let q = floor_div(d.get(k, j), d.get(k, k));
                    if !q.is_zero() {
                        let c = -q;
                        d.add_col(j, k, &c);
                        v.add_col(j, k, &c);
                    }
                    if !d.get(k, j).is_zero() {
                        d.swap_cols(k, j);
                        v.swap_cols(k, j);
                        dirty = true;
                    }
                }
            }
        }

        // divisibility: pivot must divide everything in the remaining block
        let mut fixed = false;
        'scan: for i in (k + 1)..d.rows() {
            for j in (k + 1)..d.cols() {
                if !(d.get(i, j) % d.get(k, k)).is_zero() {
                    let one = BigInt::one();
                    d.add_row(k, i, &one);
                    u.add_row(k, i, &one);
                    fixed = true;
                    break 'scan;
                }
            }
        }
        if fixed {
            continue; // redo this pivot
        }

        if d.get(k, k).is_negative() {
            d.negate_row(k);
            u.negate_row(k);
        }
        k += 1;
    }
    (d, u, v)
}

fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    use num_integer::Integer;
    a.div_floor(b)
}

/// Basis (as columns) of the integer kernel of m.
pub fn integer_kernel(m: &IntMat) -> Vec<Vec<BigInt>> {
    let (d, _u, v) = smith_normal_form(m);
    let n = m.cols();
    let rank = (0..m.rows().min(n)).take_while(|&i| !d.get(i, i).is_zero()).count();
    (rank..n).map(|j| v.col(j)).collect()
}

/// Solve m * x = b exactly over the integers; None when no integral solution.
pub fn solve_exact(m: &IntMat, b: &[BigInt]) -> Option<Vec<BigInt>> {
    use num_integer::Integer;
    let (d, u, v) = smith_normal_form(m);
    let ub = u.mul_vec(b);
    let n = m.cols();
    let mut y = vec![BigInt::zero(); n];
    for i in 0..m.rows() {
        if i < n && !d.get(i, i).is_zero() {
            let (q, r) = ub[i].div_rem(d.get(i, i));
            if !r.is_zero() {
                return None;
            }
            y[i] = q;
        } else if !ub[i].is_zero() {
            return None;
        }
    }
    Some(v.mul_vec(&y))
}

/// Hermite-style reduction: tests whether `vsecond` lies in the row lattice of `m`.
pub fn in_row_lattice(m: &IntMat, vector: &[BigInt]) -> bool {
    solve_exact(&m.transpose(), vector).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_snf(m: &IntMat) {
        let (d, u, v) = smith_normal_form(m);
        assert_eq!(u.mul(m).mul(&v), d, "u m v != d");
        // diagonal, nonnegative, divisibility chain
        for i in 0..d.rows() {
            for j in 0..d.cols() {
                if i != j {
                    assert!(d.get(i, j).is_zero());
                }
            }
        }
        let n = d.rows().min(d.cols());
        for i in 0..n {
            assert!(!d.get(i, i).is_negative());
            if i + 1 < n && !d.get(i + 1, i + 1).is_zero() {
                assert!(!d.get(i, i).is_zero(), "zero before nonzero on diagonal");
                assert!((d.get(i + 1, i + 1) % d.get(i, i)).is_zero());
            }
        }
    }

    #[test]
    fn snf_identity() {
        let m = IntMat::identity(2);
        let (d, _, _) = smith_normal_form(&m);
        assert_eq!(d, IntMat::identity(2));
    }

    #[test]
    fn snf_zero() {
        let m = IntMat::zero(2, 2);
        let (d, _, _) = smith_normal_form(&m);
        assert!(d.is_zero());
    }

    #[test]
    fn snf_2468() {
        let m = IntMat::from_i64(&[&[2, 4], &[6, 8]]);
        let (d, _, _) = smith_normal_form(&m);
        assert_eq!(d.get(0, 0), &BigInt::from(2));
        assert_eq!(d.get(1, 1), &BigInt::from(4));
        check_snf(&m);
    }

    #[test]
    fn snf_rectangular_and_random() {
        let cases: Vec<IntMat> = vec![
            IntMat::from_i64(&[&[0, 0, 5], &[3, 0, 0]]),
            IntMat::from_i64(&[&[1], &[2], &[3]]),
            IntMat::from_i64(&[&[6, 10, 15]]),
            IntMat::from_i64(&[&[-4, 2], &[2, -4], &[0, 6]]),
        ];
        for m in &cases {
            check_snf(m);
        }
        // small pseudorandom sweep
        let mut state: i64 = 12345;
        for _ in 0..40 {
            let mut rows = vec![];
            let r = 1 + (state.unsigned_abs() as usize % 4);
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let c = 1 + (state.unsigned_abs() as usize % 4);
            for _ in 0..r {
                let mut row = vec![];
                for _ in 0..c {
                    state = state
                        .wrapping_mul(6364136223846793005)
                        .wrapping_add(1442695040888963407);
                    row.push(BigInt::from((state >> 33) % 9));
                }
                rows.push(row);
            }
            check_snf(&IntMat::from_rows(rows));
        }
    }

    #[test]
    fn kernel_and_solve() {
        let m = IntMat::from_i64(&[&[1, 1]]);
        let k = integer_kernel(&m);
        assert_eq!(k.len(), 1);
        assert!(m.mul_vec(&k[0]).iter().all(|x| x.is_zero()));

        let m = IntMat::from_i64(&[&[2, 0], &[0, 3]]);
        let b = vec![BigInt::from(4), BigInt::from(9)];
        let x = solve_exact(&m, &b).unwrap();
        assert_eq!(m.mul_vec(&x), b);
        assert!(solve_exact(&m, &[BigInt::from(1), BigInt::from(1)]).is_none());
    }

    #[test]
    fn snf_reconstructs_input() {
        // u^{-1} d v^{-1} = m, checked via u m v = d on both orderings
        let m = IntMat::from_i64(&[&[3, 1, -4], &[2, -3, 1]]);
        let (d, u, v) = smith_normal_form(&m);
        assert_eq!(u.mul(&m).mul(&v), d);
    }
}
