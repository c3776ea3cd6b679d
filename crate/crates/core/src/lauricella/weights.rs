//! Weight systems, the invariant Hermitian form and geometric-type
//! classification for the Lauricella family.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::{linalg, C64, GeometryType};

/// A Lauricella weight system: `n+2` weights `mu_i in (0, 1)` and the unit
/// phases `w_k = exp(i pi (mu_0 + ... + mu_{k-1}))`, indexed here 0-based as
/// `w[k] = exp(i pi (mu_0 + ... + mu_k))`.
///
/// The inclusive prefix sum is what makes the phase of the split-factor
/// integrand on the k-th real segment equal `w_k` (the k factors to the left
/// of the segment each contribute `e^{i pi mu}`), so that
/// `sum_k Im(w_k) F_k = 0` and `Im(w_{n+2}) = sin(|mu| pi)` hold.
#[derive(Debug, Clone)]
pub struct WeightSystem {
    mu: Vec<f64>,
    total: f64,
    w: Vec<C64>,
}

impl WeightSystem {
    pub fn new(mu: &[f64]) -> Result<Self> {
        if mu.len() < 2 {
            return Err(Error::WeightOutOfRange("need at least two weights".into()));
        }
        for (i, &m) in mu.iter().enumerate() {
            if !(m > 0.0 && m < 1.0) {
                return Err(Error::WeightOutOfRange(format!("mu[{i}] = {m} not in (0, 1)")));
            }
        }
        let mut w = Vec::with_capacity(mu.len());
        let mut prefix = 0.0;
        for &m in mu {
            prefix += m;
            w.push(C64::from_polar(1.0, std::f64::consts::PI * prefix));
        }
        Ok(WeightSystem {
            mu: mu.to_vec(),
            total: mu.iter().sum(),
            w,
        })
    }

    /// Number of points `n + 2`.
    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// `|mu|`, the weight total.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// `w[k] = exp(i pi (mu_0 + ... + mu_k))`, k = 0..n+1.
    pub fn w(&self) -> &[C64] {
        &self.w
    }

    /// `Im(w_k)` as a real vector.
    pub fn im_w(&self) -> DVector<f64> {
        DVector::from_iterator(self.w.len(), self.w.iter().map(|c| c.im))
    }

    /// The geometric type by the `|mu|` thresholds alone.
    pub fn threshold_type(&self, band: f64) -> Result<GeometryType> {
        let t = self.total;
        if (t - 1.0).abs() <= band {
            Ok(GeometryType::Parabolic)
        } else if t < 1.0 {
            Ok(GeometryType::Elliptic)
        } else if t < 2.0 {
            Ok(GeometryType::Hyperbolic)
        } else {
            Err(Error::OutOfRange(t))
        }
    }
}

/// The invariant Hermitian form data.
///
/// `h_tilde` is the Hermitian completion of the paper-level generator
/// `sum_{j<k} Im(w_j conj(w_k)) F_k conj(F'_j)`: entries
/// `h[j][k] = h[k][j] = Im(w_j conj(w_k)) / 2` for `j < k`, zero diagonal.
/// On the base determination (all periods real positive) the quadratic form
/// reproduces the generator literally, and the normalisation is pinned by
/// the identity `H(F, F) = N(z)` with `N(z) = -(i/2) int eta wedge
/// conj(eta)`; both are negative in the hyperbolic range.
#[derive(Debug, Clone)]
pub struct HermitianMatrix {
    /// (n+2) x (n+2) Hermitian (real symmetric) form on the full period
    /// space.
    pub h_tilde: DMatrix<C64>,
    /// The form seen by the truncated period vector `(F_1 .. F_{n+1})`:
    /// for `|mu|` non-integral, the pull-back of `h_tilde` along the lift
    /// that solves the linear relation for `F_{n+2}`; on the integral branch
    /// the positive-semidefinite extension of the restriction, with a
    /// one-dimensional kernel.
    pub h_restricted: DMatrix<C64>,
    /// Eigenvalue signs of `h_restricted`: (positive, negative, zero).
    pub signature: (usize, usize, usize),
    /// Eigenvalues of `h_restricted`, ascending.
    pub eigenvalues: Vec<f64>,
}

/// Zero threshold for signature counts, relative to the largest eigenvalue.
const SIG_ZERO_REL: f64 = 1e-9;

pub fn hermitian_form(weights: &WeightSystem) -> HermitianMatrix {
    let m = weights.len();
    let n1 = m - 1; // n + 1
    let w = weights.w();
    let mut h_tilde = DMatrix::<C64>::zeros(m, m);
    for j in 0..m {
        for k in (j + 1)..m {
            let v = 0.5 * (w[j] * w[k].conj()).im;
            h_tilde[(j, k)] = C64::new(v, 0.0);
            h_tilde[(k, j)] = C64::new(v, 0.0);
        }
    }
    let s = weights.im_w();
    let parabolic_branch = (weights.total() - weights.total().round()).abs() < 1e-9
        && s[m - 1].abs() < 1e-6;
    let h_restricted = if parabolic_branch {
        // Kernel direction comes from the projection C^{n+1} -> A along the
        // Euclidean normal of A = { sum_{k<=n+1} Im(w_k) F_k = 0 }.
        let b = h_tilde.view((0, 0), (n1, n1)).into_owned();
        let mut sv = DVector::<C64>::zeros(n1);
        for i in 0..n1 {
            sv[i] = C64::new(s[i], 0.0);
        }
        let norm2 = sv.iter().map(|c| c.norm_sqr()).sum::<f64>();
        let p = DMatrix::identity(n1, n1) - (&sv * sv.adjoint()).map(|c| c / norm2);
        &p * b * &p
    } else {
        // Lift C^{n+1} -> A~ in C^{n+2}: F_{n+2} = -(sum s_k F_k)/s_{n+2}.
        let mut t = DMatrix::<C64>::zeros(m, n1);
        for i in 0..n1 {
            t[(i, i)] = C64::new(1.0, 0.0);
            t[(m - 1, i)] = C64::new(-s[i] / s[m - 1], 0.0);
        }
        t.adjoint() * &h_tilde * t
    };
    let eigenvalues = linalg::hermitian_eigenvalues(&h_restricted);
    let emax = eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let thr = SIG_ZERO_REL * emax.max(f64::MIN_POSITIVE);
    let pos = eigenvalues.iter().filter(|&&e| e > thr).count();
    let neg = eigenvalues.iter().filter(|&&e| e < -thr).count();
    HermitianMatrix {
        h_tilde,
        h_restricted,
        signature: (pos, neg, eigenvalues.len() - pos - neg),
        eigenvalues,
    }
}

/// Evaluate the full-space form on two period vectors of length `n+2`.
pub fn h_tilde_value(h: &HermitianMatrix, f: &DVector<C64>, fp: &DVector<C64>) -> C64 {
    (fp.adjoint() * &h.h_tilde * f)[(0, 0)]
}

impl HermitianMatrix {
    /// The quadratic form `H~(F, F)` on a full period vector (real-valued).
    pub fn quadratic(&self, f: &[C64]) -> f64 {
        let v = DVector::from_column_slice(f);
        (v.adjoint() * &self.h_tilde * &v)[(0, 0)].re
    }
}

/// Classification outcome: the `|mu|` threshold class together with the
/// signature evidence; the two must agree.
#[derive(Debug, Clone)]
pub struct Classification {
    pub geometry: GeometryType,
    pub total: f64,
    pub signature: (usize, usize, usize),
}

pub fn classify(weights: &WeightSystem) -> Result<Classification> {
    classify_with_band(weights, 1e-9)
}

pub fn classify_with_band(weights: &WeightSystem, band: f64) -> Result<Classification> {
    let by_threshold = weights.threshold_type(band)?;
    let h = hermitian_form(weights);
    let n1 = weights.len() - 1;
    let by_signature = match h.signature {
        (p, 0, 0) if p == n1 => Some(GeometryType::Elliptic),
        (p, 0, 1) if p == n1 - 1 => Some(GeometryType::Parabolic),
        (p, 1, 0) if p == n1 - 1 => Some(GeometryType::Hyperbolic),
        _ => None,
    };
    if by_signature != Some(by_threshold) {
        return Err(Error::ClassificationMismatch {
            threshold: format!("{by_threshold:?}"),
            signature: format!("{:?}", h.signature),
        });
    }
    Ok(Classification {
        geometry: by_threshold,
        total: weights.total(),
        signature: h.signature,
    })
}

/// The Schwarz symmetry group of a weight system: all permutations `sigma`
/// with `mu[sigma(i)] = mu[i]` (to tolerance), i.e. the product of symmetric
/// groups on the equal-weight classes.
#[derive(Debug, Clone)]
pub struct SchwarzGroup {
    /// All group elements as permutation vectors (`perm[i]` is the image of
    /// `i`). Small by construction (at most (n+2)! with n+2 <= 12 guarded).
    pub elements: Vec<Vec<usize>>,
    /// Equal-weight classes (index sets).
    pub classes: Vec<Vec<usize>>,
}

impl SchwarzGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Order of the stabiliser of an index subset (setwise), by brute force
    /// over the group elements.
    pub fn stabilizer_order(&self, subset: &[usize]) -> usize {
        let mut target: Vec<usize> = subset.to_vec();
        target.sort_unstable();
        self.elements
            .iter()
            .filter(|perm| {
                let mut image: Vec<usize> = subset.iter().map(|&i| perm[i]).collect();
                image.sort_unstable();
                image == target
            })
            .count()
    }
}

pub fn schwarz_group(weights: &WeightSystem) -> Result<SchwarzGroup> {
    let mu = weights.mu();
    let m = mu.len();
    if m > 9 {
        return Err(Error::InvalidInput(
            "schwarz group enumeration is limited to at most 9 points".into(),
        ));
    }
    // Equal-weight classes under tolerance clustering.
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in 0..m {
        match classes
            .iter_mut()
            .find(|c| (mu[c[0]] - mu[i]).abs() <= 1e-9)
        {
            Some(c) => c.push(i),
            None => classes.push(vec![i]),
        }
    }
    // All products of within-class permutations.
    let mut elements: Vec<Vec<usize>> = vec![(0..m).collect()];
    for class in &classes {
        let perms = permutations(class);
        let mut next = Vec::with_capacity(elements.len() * perms.len());
        for base in &elements {
            for p in &perms {
                let mut e = base.clone();
                for (slot, &img) in class.iter().zip(p) {
                    e[*slot] = img;
                }
                next.push(e);
            }
        }
        elements = next;
    }
    Ok(SchwarzGroup { elements, classes })
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        let rest: Vec<usize> = items
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &v)| v)
            .collect();
        for mut tail in permutations(&rest) {
            let mut p = vec![x];
            p.append(&mut tail);
            out.push(p);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phases_follow_inclusive_prefix_sums() {
        let w = WeightSystem::new(&[0.25; 4]).unwrap();
        let ph = w.w();
        // w_1 = e^{i pi/4}, ..., w_4 = e^{i pi} = -1 (so Im(w_{n+2}) = sin(pi |mu|) = 0)
        for (k, expect) in [(0usize, 0.25), (1, 0.5), (2, 0.75), (3, 1.0)] {
            let e = C64::from_polar(1.0, std::f64::consts::PI * expect);
            assert!((ph[k] - e).norm() < 1e-14);
        }
        assert!(w.im_w()[3].abs() < 1e-14);
    }

    #[test]
    fn phase_increments_are_pi_mu() {
        let mu = [0.2, 0.35, 0.15, 0.3];
        let w = WeightSystem::new(&mu).unwrap();
        for k in 0..3 {
            let ratio = w.w()[k + 1] / w.w()[k];
            assert!((ratio.arg() - std::f64::consts::PI * mu[k + 1]).abs() < 1e-12);
        }
    }

    #[test]
    fn threshold_types() {
        assert_eq!(
            WeightSystem::new(&[0.2; 4]).unwrap().threshold_type(1e-9).unwrap(),
            GeometryType::Elliptic
        );
        assert_eq!(
            WeightSystem::new(&[0.25; 4]).unwrap().threshold_type(1e-9).unwrap(),
            GeometryType::Parabolic
        );
        assert_eq!(
            WeightSystem::new(&[0.3; 6]).unwrap().threshold_type(1e-9).unwrap(),
            GeometryType::Hyperbolic
        );
        assert!(matches!(
            WeightSystem::new(&[0.6; 4]).unwrap().threshold_type(1e-9),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn signatures_by_class() {
        // elliptic: positive definite on C^{n+1}
        let h = hermitian_form(&WeightSystem::new(&[0.2; 4]).unwrap());
        assert_eq!(h.signature, (3, 0, 0));
        // parabolic: one-dimensional kernel, rest positive
        let h = hermitian_form(&WeightSystem::new(&[0.25; 4]).unwrap());
        assert_eq!(h.signature, (2, 0, 1));
        // hyperbolic: (n, 1, 0)
        let h = hermitian_form(&WeightSystem::new(&[0.3; 6]).unwrap());
        assert_eq!(h.signature, (4, 1, 0));
    }

    #[test]
    fn classify_agrees_between_routes() {
        for mu in [vec![0.2; 4], vec![0.25; 4], vec![0.3; 6], vec![0.15, 0.22, 0.18, 0.2]] {
            let w = WeightSystem::new(&mu).unwrap();
            let c = classify(&w).unwrap();
            assert_eq!(c.geometry, w.threshold_type(1e-9).unwrap());
        }
    }

    #[test]
    fn schwarz_group_orders() {
        let g = schwarz_group(&WeightSystem::new(&[0.25; 4]).unwrap()).unwrap();
        assert_eq!(g.order(), 24);
        let g = schwarz_group(&WeightSystem::new(&[0.2, 0.2, 0.3, 0.3]).unwrap()).unwrap();
        assert_eq!(g.order(), 4);
        let g = schwarz_group(&WeightSystem::new(&[0.1, 0.2, 0.3, 0.35]).unwrap()).unwrap();
        assert_eq!(g.order(), 1);
    }

    #[test]
    fn stabilizer_of_pair_under_full_symmetry() {
        let g = schwarz_group(&WeightSystem::new(&[0.25; 4]).unwrap()).unwrap();
        // swap inside {0,1} times swap outside
        assert_eq!(g.stabilizer_order(&[0, 1]), 4);
    }
}
