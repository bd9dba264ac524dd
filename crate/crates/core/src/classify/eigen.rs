use num_complex::Complex64;
use serde::Serialize;

/// Eigen-decomposition of a real 2×2 matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenData {
    pub matrix: [[f64; 2]; 2],
    pub trace: f64,
    pub det: f64,
    /// `trace² − 4·det`.
    pub discriminant: f64,
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    /// Unit eigenvectors for `lambda1`, `lambda2`, present for real eigenvalues.
    /// First nonzero component is positive.
    pub eigvecs: Option<[[f64; 2]; 2]>,
}

#[derive(Serialize)]
pub(crate) struct ComplexRepr {
    re: f64,
    im: f64,
}

impl EigenData {
    pub fn from_matrix(m: [[f64; 2]; 2]) -> Self {
        let trace = m[0][0] + m[1][1];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let discriminant = trace * trace - 4.0 * det;
        let (lambda1, lambda2, eigvecs) = if discriminant >= 0.0 {
            let sq = discriminant.sqrt();
            // The root of larger magnitude first, the other from the product,
            // avoiding cancellation.
            let big = if trace >= 0.0 {
                0.5 * (trace + sq)
            } else {
                0.5 * (trace - sq)
            };
            let small = if big != 0.0 { det / big } else { 0.0 };
            let (l1, l2) = if big >= small {
                (big, small)
            } else {
                (small, big)
            };
            let vecs = [eigvec(&m, l1, 0), eigvec(&m, l2, 1)];
            (Complex64::new(l1, 0.0), Complex64::new(l2, 0.0), Some(vecs))
        } else {
            let re = 0.5 * trace;
            let im = 0.5 * (-discriminant).sqrt();
            (Complex64::new(re, im), Complex64::new(re, -im), None)
        };
        Self {
            matrix: m,
            trace,
            det,
            discriminant,
            lambda1,
            lambda2,
            eigvecs,
        }
    }

    /// `scale = 1 + |trace| + √|det|`; eigenvalues below `tau0·scale` count as zero.
    pub fn zero_threshold(&self, tau0: f64) -> f64 {
        tau0 * (1.0 + self.trace.abs() + self.det.abs().sqrt())
    }

    pub(crate) fn eigenvalue_pairs(&self) -> [ComplexRepr; 2] {
        [
            ComplexRepr {
                re: self.lambda1.re,
                im: self.lambda1.im,
            },
            ComplexRepr {
                re: self.lambda2.re,
                im: self.lambda2.im,
            },
        ]
    }

    pub fn is_real(&self) -> bool {
        self.discriminant >= 0.0
    }
}

/// Unit eigenvector for the real eigenvalue `l`. For a scalar matrix every
/// vector qualifies and the `fallback`-th basis vector is returned.
fn eigvec(m: &[[f64; 2]; 2], l: f64, fallback: usize) -> [f64; 2] {
    let r0 = [m[0][1], l - m[0][0]];
    let r1 = [l - m[1][1], m[1][0]];
    let n0 = r0[0].hypot(r0[1]);
    let n1 = r1[0].hypot(r1[1]);
    let v = if n0 >= n1 && n0 > 0.0 {
        [r0[0] / n0, r0[1] / n0]
    } else if n1 > 0.0 {
        [r1[0] / n1, r1[1] / n1]
    } else if fallback == 0 {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    };
    orient(v)
}

fn orient(v: [f64; 2]) -> [f64; 2] {
    let first = if v[0] != 0.0 { v[0] } else { v[1] };
    if first < 0.0 {
        [-v[0] + 0.0, -v[1] + 0.0]
    } else {
        [v[0] + 0.0, v[1] + 0.0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn family_five_origin() {
        // b=1, d=6: [[0,1],[-1.5,3]]
        let e = EigenData::from_matrix([[0.0, 1.0], [-1.5, 3.0]]);
        let want1 = (6.0 + 12f64.sqrt()) / 4.0;
        let want2 = (6.0 - 12f64.sqrt()) / 4.0;
        assert!((e.lambda1.re - want1).abs() < 1e-15);
        assert!((e.lambda2.re - want2).abs() < 1e-15);
    }

    #[test]
    fn eigvecs_are_oriented_and_unit() {
        let e = EigenData::from_matrix([[0.0, 1.0], [1.5, 1.0]]);
        for v in e.eigvecs.unwrap() {
            assert!((v[0].hypot(v[1]) - 1.0).abs() < 1e-15);
            assert!(v[0] > 0.0);
        }
        let e = EigenData::from_matrix([[2.0, 0.0], [0.0, 2.0]]);
        assert_eq!(e.eigvecs.unwrap(), [[1.0, 0.0], [0.0, 1.0]]);
    }

    proptest! {
        #[test]
        fn vieta_and_characteristic(a in -10.0f64..10.0, b in -10.0f64..10.0, c in -10.0f64..10.0, d in -10.0f64..10.0) {
            let e = EigenData::from_matrix([[a, b], [c, d]]);
            let scale = 1.0f64.max(e.trace.abs()).max(e.det.abs());
            let sum = e.lambda1 + e.lambda2;
            let prod = e.lambda1 * e.lambda2;
            prop_assert!((sum.re - e.trace).abs() <= 1e-12 * scale && sum.im.abs() <= 1e-12 * scale);
            prop_assert!((prod.re - e.det).abs() <= 1e-12 * scale.max(e.lambda1.norm_sqr()) && prod.im.abs() <= 1e-12 * scale.max(e.lambda1.norm_sqr()));
            for l in [e.lambda1, e.lambda2] {
                let chi = l * l - l * e.trace + e.det;
                prop_assert!(chi.norm() <= 1e-10 * scale);
            }
            if e.discriminant < 0.0 {
                prop_assert_eq!(e.lambda2, e.lambda1.conj());
            }
            if let Some(vs) = e.eigvecs {
                for (v, l) in vs.iter().zip([e.lambda1.re, e.lambda2.re]) {
                    let r0 = a * v[0] + b * v[1] - l * v[0];
                    let r1 = c * v[0] + d * v[1] - l * v[1];
                    // Near-defective matrices have ill-conditioned eigenvectors.
                    prop_assume!(e.discriminant > 1e-6);
                    prop_assert!(r0.hypot(r1) <= 1e-8 * scale);
                }
            }
        }
    }
}
