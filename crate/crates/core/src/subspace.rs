//! Subspaces of R^n represented by orthonormal bases.
//!
//! A [`Subspace`] owns an `n × d` matrix with orthonormal columns spanning
//! it. A [`SubspacePair`] bundles two subspaces with their principal angles,
//! the dimension `s` of the intersection, and the Friedrichs angle
//! `θ_F = θ_{s+1}`, the first nonzero principal angle. Pairs can be ingested
//! from arbitrary bases or generated with prescribed principal angles via an
//! orthogonal frame `D` whose columns realize the joint diagonalization of
//! the two projectors; generated pairs keep that frame for the spectral
//! oracle.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::math;

/// Relative magnitude below which a column is dropped during rank-revealing
/// orthonormalization.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// Cosine tolerance deciding which principal angles count as zero
/// (`cos θ ≥ 1 − tol` means the direction lies in the intersection).
pub const DEFAULT_ANGLE_TOL: f64 = 1e-10;

/// Default lower bound for randomly drawn free principal angles. Angles much
/// smaller than this make iteration counts explode without exercising
/// anything new; the floor is configurable per call.
pub const DEFAULT_MIN_FREE_ANGLE: f64 = 0.01;

/// Gram deviation accepted when ingesting a basis that claims orthonormality.
const ORTHONORMAL_TOL: f64 = 1e-12;

/// Orthogonality gate applied to principal frames rebuilt from ingested pairs.
const FRAME_GATE_TOL: f64 = 1e-10;

/// A linear subspace of R^n stored as an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: DMatrix<f64>,
}

/// Subtract from `v` its components along each vector in `basis`.
fn project_out(v: &mut DVector<f64>, basis: &[DVector<f64>]) {
    for b in basis {
        let c = b.dot(v);
        v.axpy(-c, b, 1.0);
    }
}

/// Greedily extend `frame` by `take` orthonormal vectors drawn from
/// `candidates`, returning the accepted vectors. Candidates are kept
/// orthogonal to the growing frame; at each step the largest residual is
/// accepted (column-pivoted Gram–Schmidt).
fn greedy_extend(
    frame: &mut Vec<DVector<f64>>,
    mut candidates: Vec<DVector<f64>>,
    take: usize,
) -> Vec<DVector<f64>> {
    for c in candidates.iter_mut() {
        project_out(c, frame);
    }
    let mut accepted = Vec::with_capacity(take);
    for _ in 0..take {
        let best = candidates
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_squared().partial_cmp(&b.1.norm_squared()).unwrap())
            .map(|(i, _)| i)
            .expect("candidate pool exhausted before completion");
        let mut w = candidates.swap_remove(best);
        project_out(&mut w, frame);
        let norm = w.norm();
        debug_assert!(norm > 0.0, "degenerate candidate pool");
        w /= norm;
        for c in candidates.iter_mut() {
            let d = w.dot(c);
            c.axpy(-d, &w, 1.0);
        }
        frame.push(w.clone());
        accepted.push(w);
    }
    accepted
}

impl Subspace {
    /// Orthonormalize the columns of `raw` into a basis of its column space.
    ///
    /// Columns whose residual after orthogonalization falls below
    /// `tol` times their original magnitude are dropped, so the resulting
    /// dimension equals the numerical rank of `raw`.
    pub fn from_spanning(raw: &DMatrix<f64>, tol: f64) -> Result<Self> {
        if raw.nrows() == 0 {
            return Err(Error::InvalidArgument("ambient dimension must be positive"));
        }
        if !raw.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::ParameterOutOfRange {
                name: "tol",
                value: tol,
                range: "]0, 1[",
            });
        }
        let mut basis: Vec<DVector<f64>> = Vec::new();
        for j in 0..raw.ncols() {
            let mut v = raw.column(j).clone_owned();
            let original = v.norm();
            if original == 0.0 {
                continue;
            }
            project_out(&mut v, &basis);
            project_out(&mut v, &basis); // second pass tightens orthogonality
            let residual = v.norm();
            if residual <= tol * original {
                continue;
            }
            v /= residual;
            basis.push(v);
        }
        Ok(Self::from_columns_unchecked(raw.nrows(), basis))
    }

    /// Wrap a matrix that already has orthonormal columns.
    pub fn from_orthonormal(basis: DMatrix<f64>) -> Result<Self> {
        if basis.nrows() == 0 {
            return Err(Error::InvalidArgument("ambient dimension must be positive"));
        }
        if !basis.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        let gram = basis.tr_mul(&basis);
        let deviation = (&gram - DMatrix::<f64>::identity(basis.ncols(), basis.ncols()))
            .iter()
            .fold(0.0f64, |m, &x| m.max(math::abs(x)));
        if deviation > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(Self {
            ambient_dim: basis.nrows(),
            basis,
        })
    }

    fn from_columns_unchecked(ambient_dim: usize, columns: Vec<DVector<f64>>) -> Self {
        let basis = DMatrix::from_fn(ambient_dim, columns.len(), |i, j| columns[j][i]);
        Self { ambient_dim, basis }
    }

    /// The zero subspace `{0}` of R^n.
    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: DMatrix::zeros(ambient_dim, 0),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Orthogonal projection `P_S x = B (Bᵀ x)`.
    pub fn project(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: x.len(),
            });
        }
        Ok(&self.basis * self.basis.tr_mul(x))
    }

    /// Dense projector `B Bᵀ`; symmetric and idempotent.
    pub fn projector_matrix(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    /// Orthonormal basis of the orthogonal complement, built by completing
    /// this basis to a full frame and taking the new columns.
    pub fn orthogonal_complement(&self) -> Subspace {
        let n = self.ambient_dim;
        let mut frame: Vec<DVector<f64>> =
            self.basis.column_iter().map(|c| c.clone_owned()).collect();
        let candidates: Vec<DVector<f64>> = (0..n)
            .map(|i| {
                let mut e = DVector::zeros(n);
                e[i] = 1.0;
                e
            })
            .collect();
        let tail = greedy_extend(&mut frame, candidates, n - self.dim());
        Self::from_columns_unchecked(n, tail)
    }
}

/// Principal angles between two subspaces, ascending in radians.
///
/// Computed as arccos of the singular values of `Q_Uᵀ Q_V` (Björck–Golub),
/// with the singular values clamped into `[0, 1]` first. The number of
/// angles equals the smaller of the two dimensions; argument order does not
/// matter.
pub fn principal_angles(u: &Subspace, v: &Subspace) -> Result<Vec<f64>> {
    if u.ambient_dim() != v.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: u.ambient_dim(),
            found: v.ambient_dim(),
        });
    }
    if u.dim() == 0 || v.dim() == 0 {
        return Err(Error::EmptySubspace);
    }
    let (small, large) = if u.dim() <= v.dim() { (u, v) } else { (v, u) };
    let product = small.basis().tr_mul(large.basis());
    let svd = product.svd(false, false);
    let mut angles: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|&sigma| math::acos(math::clamp_cosine(sigma)))
        .collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(angles)
}

/// Number of leading zero angles: `s = #{k : cos θ_k ≥ 1 − tol}`, the
/// dimension of the intersection.
pub fn intersection_dim(angles: &[f64], tol: f64) -> usize {
    angles.iter().filter(|&&t| math::cos(t) >= 1.0 - tol).count()
}

/// The Friedrichs angle `θ_F = θ_{s+1}`, the first nonzero principal angle.
pub fn friedrichs_angle(angles: &[f64], s: usize) -> Result<f64> {
    if s > angles.len() {
        return Err(Error::InvalidArgument(
            "intersection dimension exceeds number of principal angles",
        ));
    }
    if s == angles.len() {
        return Err(Error::FriedrichsUndefined);
    }
    Ok(angles[s])
}

/// Orthonormal basis of `U ∩ V`.
///
/// Principal-vector pairs `(u_k, v_k)` with `cos θ_k ≥ 1 − tol` are averaged
/// to `(u_k + v_k) / ‖u_k + v_k‖` and re-orthonormalized. An empty
/// intersection yields the zero subspace.
pub fn intersection(u: &Subspace, v: &Subspace, tol: f64) -> Result<Subspace> {
    if u.ambient_dim() != v.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: u.ambient_dim(),
            found: v.ambient_dim(),
        });
    }
    let n = u.ambient_dim();
    if u.dim() == 0 || v.dim() == 0 {
        return Ok(Subspace::zero(n));
    }
    let (small, large) = if u.dim() <= v.dim() { (u, v) } else { (v, u) };
    let product = small.basis().tr_mul(large.basis());
    let svd = product.svd(true, true);
    let w = svd.u.expect("requested U factor");
    let xt = svd.v_t.expect("requested V factor");
    let mut meet: Vec<DVector<f64>> = Vec::new();
    for k in 0..small.dim() {
        if math::clamp_cosine(svd.singular_values[k]) < 1.0 - tol {
            continue;
        }
        let u_k = small.basis() * w.column(k);
        let v_k = large.basis() * xt.row(k).transpose();
        let mut m = u_k + v_k;
        project_out(&mut m, &meet);
        project_out(&mut m, &meet);
        let norm = m.norm();
        debug_assert!(norm > 0.5, "averaged principal vectors nearly cancelled");
        m /= norm;
        meet.push(m);
    }
    Ok(Subspace::from_columns_unchecked(n, meet))
}

/// Haar-distributed random orthogonal matrix: QR of a standard Gaussian
/// matrix with the signs fixed so that `diag(R) > 0`.
pub fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Uniformly random unit vector in R^n.
pub fn random_unit_vector(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}

/// Two subspaces with cached principal-angle data.
///
/// The stored orientation always satisfies `dim U ≤ dim V`; `swapped`
/// records whether the constructor arguments arrived in the other order.
/// Pairs built by the generators carry the orthogonal frame `D` realizing
/// the joint projector decomposition, with `U = span{d_1, …, d_p}` and
/// `V = span{cos θ_k d_k + sin θ_k d_{p+k}} ∪ {d_{2p+1}, …, d_{p+q}}`.
#[derive(Debug, Clone)]
pub struct SubspacePair {
    u: Subspace,
    v: Subspace,
    swapped: bool,
    angles: Vec<f64>,
    s: usize,
    friedrichs: f64,
    frame: Option<DMatrix<f64>>,
}

fn validate_pair_dims(n: usize, p: usize, q: usize, s: usize) -> Result<()> {
    if s < 1 {
        return Err(Error::InvalidArgument(
            "intersection dimension s must be at least 1",
        ));
    }
    if s >= p {
        return Err(Error::InvalidArgument(
            "intersection dimension s must satisfy s < p (U distinct from U ∩ V)",
        ));
    }
    if p > q {
        return Err(Error::InvalidArgument("dimensions must satisfy p ≤ q"));
    }
    if p + q >= n {
        return Err(Error::AmbientTooSmall { n, p, q });
    }
    Ok(())
}

fn validate_free_angles(free_angles: &[f64], expected: usize) -> Result<()> {
    if free_angles.len() != expected {
        return Err(Error::InvalidArgument("free_angles must have length p - s"));
    }
    for &theta in free_angles {
        if !theta.is_finite() || theta <= 0.0 || theta > FRAC_PI_2 {
            return Err(Error::ParameterOutOfRange {
                name: "free angle",
                value: theta,
                range: "]0, π/2]",
            });
        }
    }
    if free_angles.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("free_angles must be sorted ascending"));
    }
    Ok(())
}

impl SubspacePair {
    /// Ingest an arbitrary pair of subspaces, computing angles, the
    /// intersection dimension and the Friedrichs angle. Fails with
    /// [`Error::FriedrichsUndefined`] when one subspace contains the other.
    pub fn from_subspaces(u: Subspace, v: Subspace) -> Result<Self> {
        if u.ambient_dim() != v.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: u.ambient_dim(),
                found: v.ambient_dim(),
            });
        }
        if u.dim() == 0 || v.dim() == 0 {
            return Err(Error::EmptySubspace);
        }
        let (u, v, swapped) = if u.dim() <= v.dim() {
            (u, v, false)
        } else {
            (v, u, true)
        };
        let angles = principal_angles(&u, &v)?;
        let s = intersection_dim(&angles, DEFAULT_ANGLE_TOL);
        let friedrichs = friedrichs_angle(&angles, s)?;
        Ok(Self {
            u,
            v,
            swapped,
            angles,
            s,
            friedrichs,
            frame: None,
        })
    }

    /// Build a pair with prescribed principal angles: `s` zero angles
    /// followed by `free_angles` (ascending, in `]0, π/2]`), realized through
    /// a random orthogonal frame drawn from `seed`. Requires `1 ≤ s < p ≤ q`
    /// and `p + q < n`; for larger dimensions pad the ambient space.
    pub fn with_prescribed_angles(
        n: usize,
        p: usize,
        q: usize,
        s: usize,
        free_angles: &[f64],
        seed: u64,
    ) -> Result<Self> {
        validate_pair_dims(n, p, q, s)?;
        validate_free_angles(free_angles, p - s)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(Self::build_from_rng(n, p, q, s, free_angles, &mut rng))
    }

    /// Assemble a pair from an explicit orthogonal frame (for ingesting
    /// serialized pairs): `U` spans the first `p` columns of `frame`, `V`
    /// spans `{cos θ_k d_k + sin θ_k d_{p+k}}` plus columns `2p+1 … p+q`.
    pub fn from_frame(
        frame: DMatrix<f64>,
        p: usize,
        q: usize,
        s: usize,
        free_angles: &[f64],
    ) -> Result<Self> {
        let n = frame.nrows();
        if frame.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: frame.ncols(),
            });
        }
        validate_pair_dims(n, p, q, s)?;
        validate_free_angles(free_angles, p - s)?;
        if !frame.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        let deviation = (frame.tr_mul(&frame) - DMatrix::<f64>::identity(n, n))
            .iter()
            .fold(0.0f64, |m, &x| m.max(math::abs(x)));
        if deviation > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(Self::assemble(frame, p, q, s, free_angles))
    }

    /// Random pair: free angles drawn i.i.d. uniform on
    /// `]DEFAULT_MIN_FREE_ANGLE, π/2]`.
    pub fn random(n: usize, p: usize, q: usize, s: usize, seed: u64) -> Result<Self> {
        Self::random_with_floor(n, p, q, s, DEFAULT_MIN_FREE_ANGLE, seed)
    }

    /// Random pair with a custom floor for the free angles.
    pub fn random_with_floor(
        n: usize,
        p: usize,
        q: usize,
        s: usize,
        min_free_angle: f64,
        seed: u64,
    ) -> Result<Self> {
        validate_pair_dims(n, p, q, s)?;
        if !(min_free_angle > 0.0 && min_free_angle < FRAC_PI_2) {
            return Err(Error::ParameterOutOfRange {
                name: "min_free_angle",
                value: min_free_angle,
                range: "]0, π/2[",
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut free: Vec<f64> = (0..p - s)
            .map(|_| FRAC_PI_2 - rng.random::<f64>() * (FRAC_PI_2 - min_free_angle))
            .collect();
        free.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Self::build_from_rng(n, p, q, s, &free, &mut rng))
    }

    fn build_from_rng(
        n: usize,
        p: usize,
        q: usize,
        s: usize,
        free_angles: &[f64],
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let d = random_orthogonal(n, rng);
        Self::assemble(d, p, q, s, free_angles)
    }

    fn assemble(d: DMatrix<f64>, p: usize, q: usize, s: usize, free_angles: &[f64]) -> Self {
        let n = d.nrows();
        let mut angles = vec![0.0; s];
        angles.extend_from_slice(free_angles);

        let u_basis = d.columns(0, p).into_owned();
        let mut v_basis = DMatrix::zeros(n, q);
        for k in 0..p {
            let (c, sn) = (math::cos(angles[k]), math::sin(angles[k]));
            let col = d.column(k) * c + d.column(p + k) * sn;
            v_basis.set_column(k, &col);
        }
        for (j, col) in (2 * p..p + q).enumerate() {
            v_basis.set_column(p + j, &d.column(col));
        }

        let pair = Self {
            u: Subspace {
                ambient_dim: n,
                basis: u_basis,
            },
            v: Subspace {
                ambient_dim: n,
                basis: v_basis,
            },
            swapped: false,
            angles,
            s,
            friedrichs: free_angles[0],
            frame: Some(d),
        };
        #[cfg(debug_assertions)]
        {
            let recovered = principal_angles(&pair.u, &pair.v).expect("valid pair");
            // Prescribed angles below the f64 cosine resolution (~1e-7)
            // cannot round-trip through arccos and are skipped here.
            let err = recovered
                .iter()
                .zip(pair.angles.iter())
                .filter(|(_, &b)| b == 0.0 || b >= 1e-7)
                .fold(0.0f64, |m, (a, b)| m.max(math::abs(a - b)));
            debug_assert!(err <= 1e-10, "angle recovery error {err:.3e}");
        }
        pair
    }

    pub fn u(&self) -> &Subspace {
        &self.u
    }

    pub fn v(&self) -> &Subspace {
        &self.v
    }

    /// Whether the constructor arguments were given as `(V, U)` and stored
    /// swapped to keep `dim U ≤ dim V`.
    pub fn swapped(&self) -> bool {
        self.swapped
    }

    pub fn ambient_dim(&self) -> usize {
        self.u.ambient_dim()
    }

    /// Principal angles, ascending; the first `s` entries are zero.
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Dimension of `U ∩ V`.
    pub fn intersection_dim(&self) -> usize {
        self.s
    }

    /// The Friedrichs angle `θ_F ∈ ]0, π/2]`.
    pub fn friedrichs(&self) -> f64 {
        self.friedrichs
    }

    /// The orthogonal frame used to construct the pair, when available.
    pub fn frame(&self) -> Option<&DMatrix<f64>> {
        self.frame.as_ref()
    }

    /// The frame `D` realizing the joint projector decomposition: the stored
    /// one for generated pairs, otherwise one rebuilt from the principal
    /// vectors of `Q_Uᵀ Q_V`. Rebuilt frames must pass an orthogonality gate
    /// of `1e-10`, which ingested pairs with nearly degenerate angles can
    /// fail.
    pub fn principal_frame(&self) -> Result<DMatrix<f64>> {
        if let Some(d) = &self.frame {
            return Ok(d.clone());
        }
        let n = self.ambient_dim();
        let (p, q) = (self.u.dim(), self.v.dim());
        if p + q >= n {
            return Err(Error::AmbientTooSmall { n, p, q });
        }

        let product = self.u.basis().tr_mul(self.v.basis());
        let svd = product.svd(true, true);
        let w = svd.u.expect("requested U factor");
        let xt = svd.v_t.expect("requested V factor");

        let mut slots: Vec<Option<DVector<f64>>> = vec![None; n];
        let mut principal_v: Vec<DVector<f64>> = Vec::with_capacity(p);
        for k in 0..p {
            let u_k = self.u.basis() * w.column(k);
            let v_k = self.v.basis() * xt.row(k).transpose();
            if k >= self.s {
                // d_{p+k} spans the part of v_k orthogonal to U.
                let mut raw = &v_k - &u_k * math::cos(self.angles[k]);
                let norm = raw.norm();
                if norm > 0.0 {
                    raw /= norm;
                    slots[p + k] = Some(raw);
                }
            }
            slots[k] = Some(u_k);
            principal_v.push(v_k);
        }

        // Directions of V beyond its principal vectors fill slots 2p..p+q.
        let mut partial: Vec<DVector<f64>> = principal_v;
        let extra = greedy_extend(
            &mut partial,
            self.v.basis().column_iter().map(|c| c.clone_owned()).collect(),
            q - p,
        );
        for (j, e) in extra.into_iter().enumerate() {
            slots[2 * p + j] = Some(e);
        }

        // Complete the remaining slots (zero-angle partners and the tail).
        let mut frame: Vec<DVector<f64>> =
            slots.iter().flatten().cloned().collect();
        let missing = n - frame.len();
        let identity: Vec<DVector<f64>> = (0..n)
            .map(|i| {
                let mut e = DVector::zeros(n);
                e[i] = 1.0;
                e
            })
            .collect();
        let mut fill = greedy_extend(&mut frame, identity, missing).into_iter();
        for slot in slots.iter_mut() {
            if slot.is_none() {
                *slot = Some(fill.next().expect("completion produced enough columns"));
            }
        }

        let d = DMatrix::from_fn(n, n, |i, j| slots[j].as_ref().unwrap()[i]);
        let deviation = (d.tr_mul(&d) - DMatrix::<f64>::identity(n, n))
            .iter()
            .fold(0.0f64, |m, &x| m.max(math::abs(x)));
        if deviation > FRAME_GATE_TOL {
            return Err(Error::FrameGate { deviation });
        }
        Ok(d)
    }
}
