//! Small dense complex linear algebra: Schur-based eigendecomposition and
//! matrix exponentials for the per-mode 4x4 and 5x5 blocks.

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    n: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n, "row {i} has wrong length");
            m.data[i * n..(i + 1) * n].copy_from_slice(r);
        }
        m
    }

    pub fn from_diagonal(d: &[Complex64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn scale(&self, a: Complex64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&x| x * a).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    /// `y = self * x`.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.n;
        for (yi, row) in y.iter_mut().zip(self.data.chunks_exact(n)) {
            *yi = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![ZERO; self.n];
        self.apply(x, &mut y);
        y
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let (piv, pmag) = (col..n)
                .map(|r| (r, a[(r, col)].norm()))
                .fold((col, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            if pmag <= scale * 1e-300 {
                return None;
            }
            if piv != col {
                for j in 0..n {
                    a.data.swap(col * n + j, piv * n + j);
                    inv.data.swap(col * n + j, piv * n + j);
                }
            }
            let d = ONE / a[(col, col)];
            for j in 0..n {
                a.data[col * n + j] *= d;
                inv.data[col * n + j] *= d;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == ZERO {
                    continue;
                }
                for j in 0..n {
                    let av = a.data[col * n + j];
                    let iv = inv.data[col * n + j];
                    a.data[r * n + j] -= f * av;
                    inv.data[r * n + j] -= f * iv;
                }
            }
        }
        Some(inv)
    }

    /// Matrix exponential by Padé scaling-and-squaring.
    pub fn exp_pade(&self) -> Self {
        let m = nalgebra::DMatrix::from_row_slice(self.n, self.n, &self.data);
        let e = m.exp();
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out[(i, j)] = e[(i, j)];
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// Complex Schur form `A = Z T Z^H` with `T` upper triangular.
#[derive(Debug, Clone)]
pub struct Schur {
    pub z: CMat,
    pub t: CMat,
}

/// Householder reduction to upper Hessenberg form followed by single-shift
/// QR iterations with Wilkinson shifts.
pub fn schur(a: &CMat) -> Schur {
    let n = a.n;
    let mut h = a.clone();
    let mut z = CMat::identity(n);
    hessenberg(&mut h, &mut z);
    if n < 2 {
        return Schur { z, t: h };
    }

    let norm = h.norm_fro().max(f64::MIN_POSITIVE);
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        // deflation scan
        let mut l = hi;
        while l > 0 {
            let s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let s = if s == 0.0 { norm } else { s };
            if h[(l, l - 1)].norm() <= eps * s {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 100 * n {
            break;
        }

        let shift = if iter.is_multiple_of(10) {
            // exceptional shift
            h[(hi, hi)] + Complex64::new(h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        qr_sweep(&mut h, &mut z, l, hi, shift);
    }
    // Clean the strictly lower triangle.
    for i in 0..n {
        for j in 0..i {
            h[(i, j)] = ZERO;
        }
    }
    Schur { z, t: h }
}

fn hessenberg(h: &mut CMat, z: &mut CMat) {
    let n = h.n;
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let xnorm = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -phase * xnorm;
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // H <- (I - beta v v^H) H
        for j in 0..n {
            let s: Complex64 = (0..v.len()).map(|r| v[r].conj() * h[(k + 1 + r, j)]).sum();
            let s = s * beta;
            for r in 0..v.len() {
                h[(k + 1 + r, j)] -= v[r] * s;
            }
        }
        // H <- H (I - beta v v^H), Z likewise
        for m in [&mut *h, &mut *z] {
            for i in 0..n {
                let s: Complex64 = (0..v.len()).map(|r| m[(i, k + 1 + r)] * v[r]).sum();
                let s = s * beta;
                for r in 0..v.len() {
                    m[(i, k + 1 + r)] -= s * v[r].conj();
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr * 0.25 - det).sqrt();
    let l1 = tr * 0.5 + disc;
    let l2 = tr * 0.5 - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn qr_sweep(h: &mut CMat, z: &mut CMat, l: usize, hi: usize, shift: Complex64) {
    let n = h.n;
    for i in l..=hi {
        h[(i, i)] -= shift;
    }
    let mut rots = Vec::with_capacity(hi - l);
    for k in l..hi {
        let a = h[(k, k)];
        let b = h[(k + 1, k)];
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 { (ONE, ZERO) } else { (a / r, b / r) };
        for j in k..n {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = c.conj() * x + s.conj() * y;
            h[(k + 1, j)] = -s * x + c * y;
        }
        rots.push((c, s));
    }
    for (idx, &(c, s)) in rots.iter().enumerate() {
        let k = l + idx;
        let rmax = (k + 1).min(hi);
        for i in 0..=rmax {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = c * x + s * y;
            h[(i, k + 1)] = -s.conj() * x + c.conj() * y;
        }
        for i in 0..n {
            let x = z[(i, k)];
            let y = z[(i, k + 1)];
            z[(i, k)] = c * x + s * y;
            z[(i, k + 1)] = -s.conj() * x + c.conj() * y;
        }
    }
    for i in l..=hi {
        h[(i, i)] += shift;
    }
}

/// Eigendecomposition `A = V diag(values) V^{-1}`.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<Complex64>,
    pub vectors: CMat,
    pub inverse: CMat,
    /// Frobenius-norm condition number of `vectors`; an upper bound for the
    /// 2-norm condition number.
    pub cond: f64,
}

impl Eigen {
    pub fn new(a: &CMat) -> Self {
        let n = a.n;
        let Schur { z, t } = schur(a);
        let small = (f64::EPSILON * t.norm_fro()).max(f64::MIN_POSITIVE);
        let mut y = CMat::zeros(n);
        for i in 0..n {
            let lam = t[(i, i)];
            y[(i, i)] = ONE;
            for j in (0..i).rev() {
                let s: Complex64 = (j + 1..=i).map(|l| t[(j, l)] * y[(l, i)]).sum();
                if s == ZERO {
                    continue;
                }
                let mut d = t[(j, j)] - lam;
                if d.norm() < small {
                    d = Complex64::new(small, 0.0);
                }
                y[(j, i)] = -s / d;
            }
        }
        let mut v = z.mul(&y);
        for j in 0..n {
            let nrm = (0..n).map(|i| v[(i, j)].norm_sqr()).sum::<f64>().sqrt();
            if nrm > 0.0 {
                for i in 0..n {
                    v[(i, j)] /= nrm;
                }
            }
        }
        let values = (0..n).map(|i| t[(i, i)]).collect();
        match v.inverse() {
            Some(inv) => {
                let cond = v.norm_fro() * inv.norm_fro();
                Self { values, vectors: v, inverse: inv, cond }
            }
            None => Self { values, vectors: v, inverse: CMat::zeros(n), cond: f64::INFINITY },
        }
    }

    /// `V diag(f(values)) V^{-1}`.
    pub fn reconstruct_with(&self, f: impl Fn(Complex64) -> Complex64) -> CMat {
        let n = self.values.len();
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] =
                    (0..n).map(|k| self.vectors[(i, k)] * f(self.values[k]) * self.inverse[(k, j)]).sum();
            }
        }
        out
    }
}

/// Sorts complex numbers by imaginary part, then real part.
pub fn sort_canonical(values: &mut [Complex64]) {
    values.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
}

/// Hausdorff-style matching distance between two sorted equal-length sets.
pub fn set_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    sort_canonical(&mut a);
    sort_canonical(&mut b);
    // greedy nearest matching is exact for well separated clusters and
    // robust to the sort order flipping inside near-degenerate clusters
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in &a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .fold((usize::MAX, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best });
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random(n: usize, rng: &mut ChaCha8Rng) -> CMat {
        let mut m = CMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        m
    }

    #[test]
    fn schur_is_unitary_similarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=6 {
            let a = random(n, &mut rng);
            let s = schur(&a);
            let back = s.z.mul(&s.t).mul(&s.z.adjoint());
            assert!(back.sub(&a).norm_fro() < 1e-12 * a.norm_fro().max(1.0), "n = {n}");
            let zz = s.z.adjoint().mul(&s.z);
            assert!(zz.sub(&CMat::identity(n)).norm_fro() < 1e-13);
        }
    }

    #[test]
    fn eigenpairs_satisfy_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let a = random(5, &mut rng);
            let e = Eigen::new(&a);
            for k in 0..5 {
                let v: Vec<_> = (0..5).map(|i| e.vectors[(i, k)]).collect();
                let av = a.matvec(&v);
                let res: f64 = av.iter().zip(&v).map(|(x, y)| (x - e.values[k] * y).norm_sqr()).sum();
                assert!(res.sqrt() < 1e-12 * a.norm_fro());
            }
            let back = e.reconstruct_with(|l| l);
            assert!(back.sub(&a).norm_fro() < 1e-11 * a.norm_fro());
        }
    }

    #[test]
    fn rotation_block_eigenvalues() {
        let a = CMat::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(-1.0, 0.0), c(0.0, 0.0)]]);
        let mut v = Eigen::new(&a).values;
        sort_canonical(&mut v);
        assert!((v[0] - c(0.0, -1.0)).norm() < 1e-14);
        assert!((v[1] - c(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn zero_matrix_has_zero_spectrum() {
        let e = Eigen::new(&CMat::zeros(4));
        assert!(e.values.iter().all(|v| v.norm() == 0.0));
        assert!(e.cond.is_finite());
    }

    #[test]
    fn jordan_block_is_flagged_ill_conditioned() {
        let a = CMat::from_rows(&[vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]]);
        assert!(Eigen::new(&a).cond > 1e8);
    }

    #[test]
    fn pade_matches_eigen_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random(5, &mut rng);
        let e1 = a.exp_pade();
        let e2 = Eigen::new(&a).reconstruct_with(|l| l.exp());
        assert!(e1.sub(&e2).norm_fro() < 1e-11 * e1.norm_fro());
    }

    #[test]
    fn inverse_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random(5, &mut rng);
        let inv = a.inverse().unwrap();
        assert!(a.mul(&inv).sub(&CMat::identity(5)).norm_fro() < 1e-12);
        assert!(CMat::zeros(3).inverse().is_none());
    }
}
