//! Dense complex matrices in planar layout (separate real and imaginary
//! planes), sized for desk-scale Monte-Carlo runs (N <= 1024, O(N^3)
//! products, no sparsity).

use num_complex::Complex;

pub type C64 = Complex<f64>;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, re: vec![0.0; n * n], im: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m.re[i * n + i] = 1.0;
        }
        m
    }

    pub fn scalar(n: usize, c: f64) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m.re[i * n + i] = c;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        C64::new(self.re[i * self.n + j], self.im[i * self.n + j])
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.re[i * self.n + j] = v.re;
        self.im[i * self.n + j] = v.im;
    }

    pub fn adjoint(&self) -> Matrix {
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.re[j * n + i] = self.re[i * n + j];
                out.im[j * n + i] = -self.im[i * n + j];
            }
        }
        out
    }

    /// Projection onto the diagonal.
    pub fn diag_projection(&self) -> Matrix {
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            out.re[i * n + i] = self.re[i * n + i];
            out.im[i * n + i] = self.im[i * n + i];
        }
        out
    }

    pub fn trace(&self) -> C64 {
        let n = self.n;
        let mut re = 0.0;
        let mut im = 0.0;
        for i in 0..n {
            re += self.re[i * n + i];
            im += self.im[i * n + i];
        }
        C64::new(re, im)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.n;
        for i in 0..n {
            for j in i..n {
                let a = self.get(i, j);
                let b = self.get(j, i);
                if (a.re - b.re).abs() > tol || (a.im + b.im).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// General product, four real passes in saxpy order with a blocked k
    /// loop; the inner loops run over contiguous rows so they vectorize
    /// without reassociation.
    pub fn mul(&self, b: &Matrix) -> Matrix {
        assert_eq!(self.n, b.n, "dimension mismatch");
        let n = self.n;
        let mut out = Matrix::zeros(n);
        const KB: usize = 64;
        for kb in (0..n).step_by(KB) {
            let kend = (kb + KB).min(n);
            for i in 0..n {
                let arow = i * n;
                let (cre, cim) = (
                    &mut out.re[arow..arow + n],
                    &mut out.im[arow..arow + n],
                );
                for k in kb..kend {
                    let ar = self.re[arow + k];
                    let ai = self.im[arow + k];
                    if ar == 0.0 && ai == 0.0 {
                        continue;
                    }
                    let brow_re = &b.re[k * n..k * n + n];
                    let brow_im = &b.im[k * n..k * n + n];
                    for (((cr, ci), br), bim) in cre
                        .iter_mut()
                        .zip(cim.iter_mut())
                        .zip(brow_re.iter())
                        .zip(brow_im.iter())
                    {
                        *cr += ar * br - ai * bim;
                        *ci += ar * bim + ai * br;
                    }
                }
            }
        }
        out
    }

    /// Product of two commuting Hermitian matrices (e.g. powers of one
    /// Hermitian matrix): only the upper triangle is computed, each entry
    /// `C_ij = sum_k A_ik conj(B_jk)` as a dot product of contiguous
    /// rows, and mirrored. Dots are taken two rows at a time on each side
    /// so every loaded chunk feeds four accumulator sets.
    pub fn mul_commuting_hermitian(&self, b: &Matrix) -> Matrix {
        assert_eq!(self.n, b.n, "dimension mismatch");
        let n = self.n;
        let mut out = Matrix::zeros(n);
        const JT: usize = 32;
        let row = |m: &[f64], r: usize| unsafe {
            // rows are disjoint n-slices of a len n*n buffer
            std::slice::from_raw_parts(m.as_ptr().add(r * n), n)
        };
        let write = |out: &mut Matrix, bi: usize, bj: usize, cre: f64, cim: f64| {
            if bj < bi {
                return; // below the diagonal; covered by a mirror write
            }
            out.re[bi * n + bj] = cre;
            out.im[bi * n + bj] = cim;
            out.re[bj * n + bi] = cre;
            out.im[bj * n + bi] = -cim;
        };
        for jt in (0..n).step_by(JT) {
            let jend = (jt + JT).min(n);
            let mut i = 0;
            while i < jend {
                let paired_rows = i + 1 < jend;
                let mut j = jt.max(i);
                while j < jend {
                    if paired_rows && j + 1 < jend {
                        let (c00, c01, c10, c11) = dot_conj_2x2(
                            row(&self.re, i),
                            row(&self.im, i),
                            row(&self.re, i + 1),
                            row(&self.im, i + 1),
                            row(&b.re, j),
                            row(&b.im, j),
                            row(&b.re, j + 1),
                            row(&b.im, j + 1),
                        );
                        write(&mut out, i, j, c00.0, c00.1);
                        write(&mut out, i, j + 1, c01.0, c01.1);
                        write(&mut out, i + 1, j, c10.0, c10.1);
                        write(&mut out, i + 1, j + 1, c11.0, c11.1);
                        j += 2;
                    } else {
                        for r in [i, if paired_rows { i + 1 } else { i }] {
                            let (cre, cim) = dot_conj(
                                row(&self.re, r),
                                row(&self.im, r),
                                row(&b.re, j),
                                row(&b.im, j),
                            );
                            write(&mut out, r, j, cre, cim);
                            if !paired_rows {
                                break;
                            }
                        }
                        j += 1;
                    }
                }
                i += if paired_rows { 2 } else { 1 };
            }
        }
        out
    }

    /// `Tr(A B)` without forming the product.
    pub fn trace_of_product(&self, b: &Matrix) -> C64 {
        assert_eq!(self.n, b.n, "dimension mismatch");
        let n = self.n;
        let mut re = 0.0;
        let mut im = 0.0;
        for i in 0..n {
            for k in 0..n {
                let ar = self.re[i * n + k];
                let ai = self.im[i * n + k];
                let br = b.re[k * n + i];
                let bi = b.im[k * n + i];
                re += ar * br - ai * bi;
                im += ar * bi + ai * br;
            }
        }
        C64::new(re, im)
    }

    /// `Tr(A B)` for Hermitian `B`: `sum_ij A_ij conj(B_ij)`, a single
    /// contiguous pass over both planes.
    pub fn trace_of_product_hermitian(&self, b: &Matrix) -> C64 {
        assert_eq!(self.n, b.n, "dimension mismatch");
        let (re, im) = dot_conj(&self.re, &self.im, &b.re, &b.im);
        C64::new(re, im)
    }

    /// `(1/N) Tr[D(A) D(A)*] - |(1/N) Tr A|^2`, the scalar-diagonal
    /// diagnostic.
    pub fn h5_diagnostic(&self) -> f64 {
        let n = self.n;
        let mut diag_sq = 0.0;
        let mut tr = C64::new(0.0, 0.0);
        for i in 0..n {
            let d = self.get(i, i);
            diag_sq += d.norm_sqr();
            tr += d;
        }
        diag_sq / n as f64 - (tr / n as f64).norm_sqr()
    }
}

/// `sum_k (a[k] conj-dot b[k])` over planar rows: returns
/// `(sum ar*br + ai*bi, sum ai*br - ar*bi)`. Independent accumulator
/// lanes keep the floating-point reduction vectorizable without
/// reassociation; per-chunk array views avoid bounds checks.
#[inline]
fn dot_conj(ar: &[f64], ai: &[f64], br: &[f64], bi: &[f64]) -> (f64, f64) {
    const L: usize = 16;
    let mut acc_re = [0.0f64; L];
    let mut acc_im = [0.0f64; L];
    let mut it = ar
        .chunks_exact(L)
        .zip(ai.chunks_exact(L))
        .zip(br.chunks_exact(L).zip(bi.chunks_exact(L)));
    for ((xr, xi), (yr, yi)) in &mut it {
        let xr: &[f64; L] = xr.try_into().unwrap();
        let xi: &[f64; L] = xi.try_into().unwrap();
        let yr: &[f64; L] = yr.try_into().unwrap();
        let yi: &[f64; L] = yi.try_into().unwrap();
        for l in 0..L {
            acc_re[l] += xr[l] * yr[l] + xi[l] * yi[l];
            acc_im[l] += xi[l] * yr[l] - xr[l] * yi[l];
        }
    }
    let mut cre = acc_re.iter().sum::<f64>();
    let mut cim = acc_im.iter().sum::<f64>();
    let tail = ar.len() - ar.len() % L;
    for k in tail..ar.len() {
        cre += ar[k] * br[k] + ai[k] * bi[k];
        cim += ai[k] * br[k] - ar[k] * bi[k];
    }
    (cre, cim)
}

type Quad = ((f64, f64), (f64, f64), (f64, f64), (f64, f64));

/// Four conjugate dots at once: rows (a0, a1) against rows (b0, b1),
/// returning `((re,im) of a_r . conj(b_s))` for r, s in {0,1}. Loading
/// each chunk once for two dot pairs doubles the work per byte moved.
#[allow(clippy::too_many_arguments)]
#[inline]
fn dot_conj_2x2(
    a0r: &[f64],
    a0i: &[f64],
    a1r: &[f64],
    a1i: &[f64],
    b0r: &[f64],
    b0i: &[f64],
    b1r: &[f64],
    b1i: &[f64],
) -> Quad {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx512f") {
            // rows come from equal-dimension matrices
            return unsafe { dot_conj_2x2_avx512(a0r, a0i, a1r, a1i, b0r, b0i, b1r, b1i) };
        }
    }
    dot_conj_2x2_lanes(a0r, a0i, a1r, a1i, b0r, b0i, b1r, b1i)
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn dot_conj_2x2_lanes(
    a0r: &[f64],
    a0i: &[f64],
    a1r: &[f64],
    a1i: &[f64],
    b0r: &[f64],
    b0i: &[f64],
    b1r: &[f64],
    b1i: &[f64],
) -> Quad {
    const L: usize = 8;
    let n = a0r.len();
    let mut acc = [[0.0f64; L]; 8]; // re/im for 00, 01, 10, 11
    let chunks = n / L;
    for c in 0..chunks {
        let s = c * L;
        let x0r: &[f64; L] = a0r[s..s + L].try_into().unwrap();
        let x0i: &[f64; L] = a0i[s..s + L].try_into().unwrap();
        let x1r: &[f64; L] = a1r[s..s + L].try_into().unwrap();
        let x1i: &[f64; L] = a1i[s..s + L].try_into().unwrap();
        let y0r: &[f64; L] = b0r[s..s + L].try_into().unwrap();
        let y0i: &[f64; L] = b0i[s..s + L].try_into().unwrap();
        let y1r: &[f64; L] = b1r[s..s + L].try_into().unwrap();
        let y1i: &[f64; L] = b1i[s..s + L].try_into().unwrap();
        for l in 0..L {
            acc[0][l] += x0r[l] * y0r[l] + x0i[l] * y0i[l];
            acc[1][l] += x0i[l] * y0r[l] - x0r[l] * y0i[l];
            acc[2][l] += x0r[l] * y1r[l] + x0i[l] * y1i[l];
            acc[3][l] += x0i[l] * y1r[l] - x0r[l] * y1i[l];
            acc[4][l] += x1r[l] * y0r[l] + x1i[l] * y0i[l];
            acc[5][l] += x1i[l] * y0r[l] - x1r[l] * y0i[l];
            acc[6][l] += x1r[l] * y1r[l] + x1i[l] * y1i[l];
            acc[7][l] += x1i[l] * y1r[l] - x1r[l] * y1i[l];
        }
    }
    let mut sums = [0.0f64; 8];
    for (s, a) in sums.iter_mut().zip(&acc) {
        *s = a.iter().sum();
    }
    dot_conj_2x2_tail(
        &mut sums,
        chunks * L,
        a0r,
        a0i,
        a1r,
        a1i,
        b0r,
        b0i,
        b1r,
        b1i,
    );
    (
        (sums[0], sums[1]),
        (sums[2], sums[3]),
        (sums[4], sums[5]),
        (sums[6], sums[7]),
    )
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn dot_conj_2x2_tail(
    sums: &mut [f64; 8],
    from: usize,
    a0r: &[f64],
    a0i: &[f64],
    a1r: &[f64],
    a1i: &[f64],
    b0r: &[f64],
    b0i: &[f64],
    b1r: &[f64],
    b1i: &[f64],
) {
    for k in from..a0r.len() {
        sums[0] += a0r[k] * b0r[k] + a0i[k] * b0i[k];
        sums[1] += a0i[k] * b0r[k] - a0r[k] * b0i[k];
        sums[2] += a0r[k] * b1r[k] + a0i[k] * b1i[k];
        sums[3] += a0i[k] * b1r[k] - a0r[k] * b1i[k];
        sums[4] += a1r[k] * b0r[k] + a1i[k] * b0i[k];
        sums[5] += a1i[k] * b0r[k] - a1r[k] * b0i[k];
        sums[6] += a1r[k] * b1r[k] + a1i[k] * b1i[k];
        sums[7] += a1i[k] * b1r[k] - a1r[k] * b1i[k];
    }
}

/// AVX-512 form of the 2x2 conjugate-dot block: eight 8-lane
/// accumulators, two fused multiply-adds each per chunk.
#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx512f")]
#[allow(clippy::too_many_arguments)]
unsafe fn dot_conj_2x2_avx512(
    a0r: &[f64],
    a0i: &[f64],
    a1r: &[f64],
    a1i: &[f64],
    b0r: &[f64],
    b0i: &[f64],
    b1r: &[f64],
    b1i: &[f64],
) -> Quad {
    use std::arch::x86_64::*;
    const L: usize = 8;
    let n = a0r.len();
    let chunks = n / L;
    unsafe {
        let mut acc = [_mm512_setzero_pd(); 8];
        let mut acc2 = [_mm512_setzero_pd(); 8];
        macro_rules! step {
            ($acc:ident, $s:expr) => {{
                let s = $s;
                let x0r = _mm512_loadu_pd(a0r.as_ptr().add(s));
                let x0i = _mm512_loadu_pd(a0i.as_ptr().add(s));
                let x1r = _mm512_loadu_pd(a1r.as_ptr().add(s));
                let x1i = _mm512_loadu_pd(a1i.as_ptr().add(s));
                let y0r = _mm512_loadu_pd(b0r.as_ptr().add(s));
                let y0i = _mm512_loadu_pd(b0i.as_ptr().add(s));
                let y1r = _mm512_loadu_pd(b1r.as_ptr().add(s));
                let y1i = _mm512_loadu_pd(b1i.as_ptr().add(s));
                $acc[0] = _mm512_fmadd_pd(x0r, y0r, $acc[0]);
                $acc[0] = _mm512_fmadd_pd(x0i, y0i, $acc[0]);
                $acc[1] = _mm512_fmadd_pd(x0i, y0r, $acc[1]);
                $acc[1] = _mm512_fnmadd_pd(x0r, y0i, $acc[1]);
                $acc[2] = _mm512_fmadd_pd(x0r, y1r, $acc[2]);
                $acc[2] = _mm512_fmadd_pd(x0i, y1i, $acc[2]);
                $acc[3] = _mm512_fmadd_pd(x0i, y1r, $acc[3]);
                $acc[3] = _mm512_fnmadd_pd(x0r, y1i, $acc[3]);
                $acc[4] = _mm512_fmadd_pd(x1r, y0r, $acc[4]);
                $acc[4] = _mm512_fmadd_pd(x1i, y0i, $acc[4]);
                $acc[5] = _mm512_fmadd_pd(x1i, y0r, $acc[5]);
                $acc[5] = _mm512_fnmadd_pd(x1r, y0i, $acc[5]);
                $acc[6] = _mm512_fmadd_pd(x1r, y1r, $acc[6]);
                $acc[6] = _mm512_fmadd_pd(x1i, y1i, $acc[6]);
                $acc[7] = _mm512_fmadd_pd(x1i, y1r, $acc[7]);
                $acc[7] = _mm512_fnmadd_pd(x1r, y1i, $acc[7]);
            }};
        }
        let paired = chunks / 2;
        for c in 0..paired {
            step!(acc, 2 * c * L);
            step!(acc2, (2 * c + 1) * L);
        }
        if chunks % 2 == 1 {
            step!(acc, (chunks - 1) * L);
        }
        let mut sums = [0.0f64; 8];
        for ((s, a), a2) in sums.iter_mut().zip(&acc).zip(&acc2) {
            *s = _mm512_reduce_add_pd(_mm512_add_pd(*a, *a2));
        }
        dot_conj_2x2_tail(
            &mut sums,
            chunks * L,
            a0r,
            a0i,
            a1r,
            a1i,
            b0r,
            b0i,
            b1r,
            b1i,
        );
        (
            (sums[0], sums[1]),
            (sums[2], sums[3]),
            (sums[4], sums[5]),
            (sums[6], sums[7]),
        )
    }
}
