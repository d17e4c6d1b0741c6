//! The detector as a sea of paired state/anti-state microstates, and what
//! (anti)symmetrizing an incoming system state against it produces.
//!
//! A [`DetectorSea`] of size `N` holds an orthonormal detector basis and the
//! conjugate anti-state of each member. Symmetrizing an incoming bosonic
//! state against the sea yields a composite whose deviation from the plain
//! product state isolates into a single exchange term with coefficient
//! `(1 - sqrt(2)) / sqrt(N)`; antisymmetrizing a fermionic state yields a
//! composite that reduces, via hole-antihole pairs, to an effective simple
//! product. Either way the detector ends up carrying a conjugate image of
//! the incoming state — an antilinear copy, which is exactly what a linear
//! unitary cloner cannot produce ([`no_cloning_witness`]). The diagonal
//! bound state pairs each eigendirection with its own conjugate and carries
//! the squared-modulus weights that seed the collapse walk.

use num_complex::Complex64;

use crate::collapse_walk::SimplexPoint;
use crate::error::{Error, Result};
use crate::state_algebra::{BasisLabel, CompositeState, ProductTerm, PureState, Slot};

/// The detector modeled as `N` orthonormal microstates, each paired with its
/// conjugate anti-state so the whole sea is neutral.
#[derive(Debug, Clone)]
pub struct DetectorSea {
    basis: Vec<PureState>,
    conjugates: Vec<PureState>,
}

/// Build a sea of `N >= 2` paired detector states.
///
/// Labels are zero-padded indices so textual dumps sort numerically.
pub fn build_sea(n: usize) -> Result<DetectorSea> {
    if n < 2 {
        return Err(Error::SeaTooSmall { n });
    }
    let width = (n - 1).to_string().len();
    let basis: Vec<PureState> = (0..n)
        .map(|j| PureState::basis(Slot::Detector, BasisLabel::new(format!("{j:0width$}"))))
        .collect();
    let conjugates = basis.iter().map(|b| b.conjugate()).collect();
    Ok(DetectorSea { basis, conjugates })
}

impl DetectorSea {
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires N >= 2
    }

    /// Orthonormal detector basis states (slot `D`).
    pub fn basis(&self) -> &[PureState] {
        &self.basis
    }

    /// Paired anti-states (slot `D*`), `conjugates[j] = basis[j].conjugate()`.
    pub fn conjugates(&self) -> &[PureState] {
        &self.conjugates
    }

    /// The incoming-system counterpart of detector state `i` (slot `S`,
    /// same label).
    pub fn system_state(&self, i: usize) -> Result<PureState> {
        self.check_index(i)?;
        Ok(self.basis[i].with_slot(Slot::System))
    }

    /// The neutral singlet sum over all state/anti-state pairs, with uniform
    /// coefficients `1/sqrt(N)` so its norm is one.
    pub fn singlet(&self) -> CompositeState {
        let n = self.len();
        let coef = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
        let terms = (0..n)
            .map(|j| {
                ProductTerm::new(
                    coef,
                    vec![self.basis[j].clone(), self.conjugates[j].clone()],
                )
            })
            .collect();
        CompositeState::new(vec![Slot::Detector, Slot::DetectorConj], terms)
            .expect("sea terms share one signature")
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                size: self.len(),
            });
        }
        Ok(())
    }
}

fn system_detector_slots() -> Vec<Slot> {
    vec![Slot::System, Slot::Detector, Slot::DetectorConj]
}

/// The unsymmetrized product of incoming state `i` with the whole sea:
/// `(1/sqrt(N)) * sum over all j of psi_Si psi_Dj anti_Dj`. Unit norm, `N`
/// terms.
pub fn combine_unsymmetrized(i: usize, sea: &DetectorSea) -> Result<CompositeState> {
    sea.check_index(i)?;
    let n = sea.len();
    let coef = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    let psi_si = sea.system_state(i)?;
    let terms = (0..n)
        .map(|j| {
            ProductTerm::new(
                coef,
                vec![
                    psi_si.clone(),
                    sea.basis()[j].clone(),
                    sea.conjugates()[j].clone(),
                ],
            )
        })
        .collect();
    CompositeState::new(system_detector_slots(), terms)
}

/// The role-swapped counterpart of [`combine_unsymmetrized`]: the incoming
/// state sits in the detector slot while the sea's states occupy the system
/// slot, `(1/sqrt(N)) * sum over all j of psi_Sj psi_Di anti_Dj`.
pub fn combine_unsymmetrized_swapped(i: usize, sea: &DetectorSea) -> Result<CompositeState> {
    sea.check_index(i)?;
    let n = sea.len();
    let coef = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    let psi_di = sea.basis()[i].clone();
    let terms = (0..n)
        .map(|j| {
            ProductTerm::new(
                coef,
                vec![
                    sea.system_state(j).expect("j < N"),
                    psi_di.clone(),
                    sea.conjugates()[j].clone(),
                ],
            )
        })
        .collect();
    CompositeState::new(system_detector_slots(), terms)
}

/// Bosonic symmetrization of incoming state `i` against the sea:
///
/// `(1/sqrt(2N)) * sum over j != i of (psi_Si psi_Dj + psi_Sj psi_Di) anti_Dj
///  + (1/sqrt(N)) * psi_Si psi_Di anti_Di`
///
/// Orthogonality of the detector states makes this unit norm as written.
pub fn symmetrize_boson(i: usize, sea: &DetectorSea) -> Result<CompositeState> {
    sea.check_index(i)?;
    let n = sea.len();
    let pair_coef = Complex64::new(1.0 / (2.0 * n as f64).sqrt(), 0.0);
    let diag_coef = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    let psi_si = sea.system_state(i)?;
    let psi_di = sea.basis()[i].clone();
    let mut terms = Vec::with_capacity(2 * n - 1);
    for j in 0..n {
        if j == i {
            continue;
        }
        terms.push(ProductTerm::new(
            pair_coef,
            vec![
                psi_si.clone(),
                sea.basis()[j].clone(),
                sea.conjugates()[j].clone(),
            ],
        ));
        terms.push(ProductTerm::new(
            pair_coef,
            vec![
                sea.system_state(j)?,
                psi_di.clone(),
                sea.conjugates()[j].clone(),
            ],
        ));
    }
    terms.push(ProductTerm::new(
        diag_coef,
        vec![psi_si, psi_di, sea.conjugates()[i].clone()],
    ));
    CompositeState::new(system_detector_slots(), terms)
}

/// Linear extension of [`symmetrize_boson`] to a superposed incoming state:
/// each basis component symmetrizes independently and the results are summed
/// with the component amplitudes.
pub fn symmetrize_boson_superposed(
    incoming: &PureState,
    sea: &DetectorSea,
) -> Result<CompositeState> {
    let mut acc = CompositeState::zero(system_detector_slots());
    for (label, amp) in incoming.amplitudes() {
        let i: usize = label.name().parse().map_err(|_| Error::MalformedInput {
            reason: format!("incoming label {label} is not a sea index"),
        })?;
        acc = acc.add(&symmetrize_boson(i, sea)?.scale(*amp))?;
    }
    Ok(acc)
}

/// The bosonic composite split into its noninteracting symmetric part and a
/// single exchange term.
#[derive(Debug, Clone)]
pub struct ExchangeDecomposition {
    /// `(Psi_SD0 + Psi_DS0) / sqrt(2)`.
    pub symmetric_part: CompositeState,
    /// The residual diagonal term `psi_Si psi_Di anti_Di`.
    pub exchange_term: ProductTerm,
    /// Coefficient of the exchange term, `(1 - sqrt(2)) / sqrt(N)`.
    pub exchange_coefficient: Complex64,
}

impl ExchangeDecomposition {
    /// `symmetric_part + exchange_term`, which must reproduce the full
    /// bosonic composite.
    pub fn reassembled(&self) -> CompositeState {
        let term = CompositeState::new(
            self.symmetric_part.slots().to_vec(),
            vec![self.exchange_term.clone()],
        )
        .expect("exchange term matches the signature");
        self.symmetric_part
            .add(&term)
            .expect("signatures agree by construction")
    }

    /// Largest coefficient of `reassembled - reference`; the identity check.
    pub fn residual_against(&self, reference: &CompositeState) -> Result<f64> {
        Ok(self.reassembled().sub(reference)?.max_abs_coefficient())
    }
}

/// Split the bosonic composite for incoming state `i` into the symmetrized
/// pair of plain products plus the exchange term.
pub fn decompose_exchange(i: usize, sea: &DetectorSea) -> Result<ExchangeDecomposition> {
    sea.check_index(i)?;
    let n = sea.len() as f64;
    let sd0 = combine_unsymmetrized(i, sea)?;
    let ds0 = combine_unsymmetrized_swapped(i, sea)?;
    let inv_sqrt2 = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let symmetric_part = sd0.add(&ds0)?.scale(inv_sqrt2);
    let exchange_coefficient = Complex64::new((1.0 - std::f64::consts::SQRT_2) / n.sqrt(), 0.0);
    let exchange_term = ProductTerm::new(
        exchange_coefficient,
        vec![
            sea.system_state(i)?,
            sea.basis()[i].clone(),
            sea.conjugates()[i].clone(),
        ],
    );
    Ok(ExchangeDecomposition {
        symmetric_part,
        exchange_term,
        exchange_coefficient,
    })
}

/// Fermionic antisymmetrization of incoming state `i` against the sea:
///
/// `(1/sqrt(2(N-1))) * sum over j != i of (psi_Si psi_Dj - psi_Sj psi_Di) anti_Dj`
///
/// Unit norm; no term pairs the incoming state with its own detector copy
/// (exclusion).
pub fn antisymmetrize_fermion(i: usize, sea: &DetectorSea) -> Result<CompositeState> {
    sea.check_index(i)?;
    let n = sea.len();
    let coef = Complex64::new(1.0 / (2.0 * (n as f64 - 1.0)).sqrt(), 0.0);
    let psi_si = sea.system_state(i)?;
    let psi_di = sea.basis()[i].clone();
    let mut terms = Vec::with_capacity(2 * (n - 1));
    for j in 0..n {
        if j == i {
            continue;
        }
        terms.push(ProductTerm::new(
            coef,
            vec![
                psi_si.clone(),
                sea.basis()[j].clone(),
                sea.conjugates()[j].clone(),
            ],
        ));
        terms.push(ProductTerm::new(
            -coef,
            vec![
                sea.system_state(j)?,
                psi_di.clone(),
                sea.conjugates()[j].clone(),
            ],
        ));
    }
    CompositeState::new(system_detector_slots(), terms)
}

/// Expansion of the detector hole-antihole pair for missing state `i`:
/// `sum over j != i of psi_Dj anti_Dj`, slots `(D, D*)`.
pub fn detector_hole_pair(i: usize, sea: &DetectorSea) -> Result<CompositeState> {
    sea.check_index(i)?;
    let terms = (0..sea.len())
        .filter(|&j| j != i)
        .map(|j| {
            ProductTerm::new(
                Complex64::new(1.0, 0.0),
                vec![sea.basis()[j].clone(), sea.conjugates()[j].clone()],
            )
        })
        .collect();
    CompositeState::new(vec![Slot::Detector, Slot::DetectorConj], terms)
}

/// Expansion of the system-hole/detector-antihole pair for missing state
/// `i`: `sum over j != i of psi_Sj anti_Dj`, slots `(S, D*)`.
pub fn system_hole_pair(i: usize, sea: &DetectorSea) -> Result<CompositeState> {
    sea.check_index(i)?;
    let terms = (0..sea.len())
        .filter(|&j| j != i)
        .map(|j| {
            ProductTerm::new(
                Complex64::new(1.0, 0.0),
                vec![
                    sea.system_state(j).expect("j < N"),
                    sea.conjugates()[j].clone(),
                ],
            )
        })
        .collect();
    CompositeState::new(vec![Slot::System, Slot::DetectorConj], terms)
}

/// The fermionic composite rewritten through hole-antihole pairs.
#[derive(Debug, Clone)]
pub struct HoleReduction {
    /// `psi_Si (hole pair) - psi_Di (system-hole pair)`, expanded.
    pub state: CompositeState,
    /// Measured ratio against [`antisymmetrize_fermion`]; equals
    /// `sqrt(2(N-1))` when the reduction is exact.
    pub proportionality: f64,
    /// Largest coefficient of `state - proportionality * antisymmetrized`.
    pub residual: f64,
}

/// Rebuild the fermionic composite from the hole-pair expansions and measure
/// its proportionality to the direct antisymmetrization.
pub fn hole_reduce(i: usize, sea: &DetectorSea) -> Result<HoleReduction> {
    sea.check_index(i)?;
    let psi_si = sea.system_state(i)?;
    let psi_di = sea.basis()[i].clone();

    // psi_Si * (detector hole pair): prepend the system factor
    let mut terms: Vec<ProductTerm> = detector_hole_pair(i, sea)?
        .terms()
        .iter()
        .map(|t| {
            let mut factors = vec![psi_si.clone()];
            factors.extend(t.factors.iter().cloned());
            ProductTerm::new(t.coefficient, factors)
        })
        .collect();
    // - psi_Di * (system hole pair): insert the detector factor in between
    terms.extend(system_hole_pair(i, sea)?.terms().iter().map(|t| {
        let factors = vec![
            t.factors[0].clone(),
            psi_di.clone(),
            t.factors[1].clone(),
        ];
        ProductTerm::new(-t.coefficient, factors)
    }));
    let state = CompositeState::new(system_detector_slots(), terms)?;

    let reference = antisymmetrize_fermion(i, sea)?;
    let overlap = reference.inner_product(&state)?;
    let norm_sq = reference.inner_product(&reference)?.re;
    let ratio = overlap / norm_sq;
    let proportionality = ratio.re;
    let residual = state
        .sub(&reference.scale(ratio))?
        .max_abs_coefficient()
        .max(ratio.im.abs());
    Ok(HoleReduction {
        state,
        proportionality,
        residual,
    })
}

/// The fermionic composite with its second hole term dropped.
#[derive(Debug, Clone)]
pub struct EffectiveProduct {
    /// `psi_Si (hole pair)`, normalized: the surviving simple product.
    pub state: CompositeState,
    /// Norm of the dropped term relative to the full hole-reduced state;
    /// reported rather than silently discarded.
    pub dropped_norm_fraction: f64,
}

/// Keep only the `psi_Si (hole pair)` part of the hole-reduced fermionic
/// composite. The incoming state is never the system-hole state, so the
/// dropped term's weight is reported alongside the normalized product.
pub fn fermion_effective_product(i: usize, sea: &DetectorSea) -> Result<EffectiveProduct> {
    sea.check_index(i)?;
    let psi_si = sea.system_state(i)?;
    let kept_terms: Vec<ProductTerm> = detector_hole_pair(i, sea)?
        .terms()
        .iter()
        .map(|t| {
            let mut factors = vec![psi_si.clone()];
            factors.extend(t.factors.iter().cloned());
            ProductTerm::new(t.coefficient, factors)
        })
        .collect();
    let kept = CompositeState::new(system_detector_slots(), kept_terms)?;
    let kept_norm = kept.norm();

    let psi_di = sea.basis()[i].clone();
    let dropped_terms: Vec<ProductTerm> = system_hole_pair(i, sea)?
        .terms()
        .iter()
        .map(|t| {
            let factors = vec![
                t.factors[0].clone(),
                psi_di.clone(),
                t.factors[1].clone(),
            ];
            ProductTerm::new(t.coefficient, factors)
        })
        .collect();
    let dropped = CompositeState::new(system_detector_slots(), dropped_terms)?;

    let full = hole_reduce(i, sea)?.state;
    let dropped_norm_fraction = dropped.norm() / full.norm();
    let state = kept.scale(Complex64::new(1.0 / kept_norm, 0.0));
    Ok(EffectiveProduct {
        state,
        dropped_norm_fraction,
    })
}

/// The conjugate image a system state induces in the detector: amplitudes
/// conjugated, labels barred, living in the `D*` slot.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageState {
    state: PureState,
}

impl ImageState {
    pub fn state(&self) -> &PureState {
        &self.state
    }

    pub fn into_state(self) -> PureState {
        self.state
    }
}

/// Map a system state to its conjugate detector image. The map is
/// antilinear: scaling the input by `c` scales the image by `conj(c)`.
pub fn extract_image(system_state: &PureState) -> ImageState {
    let amps = system_state
        .amplitudes()
        .iter()
        .map(|(l, a)| (l.conjugate(), a.conj()))
        .collect();
    ImageState {
        state: PureState::new(Slot::DetectorConj, amps)
            .expect("conjugation preserves label distinctness"),
    }
}

/// Which pairing carries the diagonal bound state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundPairing {
    /// System eigendirections paired with detector-conjugate images.
    SystemDetector,
    /// Detector copy paired with detector-conjugate images.
    DetectorDetector,
}

/// Diagonal conjugate-paired combination: each eigendirection paired with
/// its own conjugate, weighted by the squared modulus of its amplitude.
#[derive(Debug, Clone)]
pub struct BoundState {
    terms: Vec<ProductTerm>,
    weights: Vec<f64>,
    discarded_weight: f64,
    pairing: BoundPairing,
}

impl BoundState {
    /// Diagonal terms `|a_k|^2 |k> |k*>`, in label order.
    pub fn terms(&self) -> &[ProductTerm] {
        &self.terms
    }

    /// Squared-modulus weights, summing to one for a normalized source.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Probability weight of the off-diagonal terms excluded by the
    /// diagonal projection: `1 - sum of w^2` for a normalized source.
    pub fn discarded_weight(&self) -> f64 {
        self.discarded_weight
    }

    pub fn pairing(&self) -> BoundPairing {
        self.pairing
    }
}

fn bound_state_with(
    kept_state: &PureState,
    image: &ImageState,
    pairing: BoundPairing,
) -> Result<BoundState> {
    if kept_state.dim() != image.state().dim() {
        return Err(Error::DimensionMismatch {
            left: kept_state.dim(),
            right: image.state().dim(),
        });
    }
    let slots = vec![kept_state.slot(), Slot::DetectorConj];
    let mut terms = Vec::with_capacity(kept_state.dim());
    let mut weights = Vec::with_capacity(kept_state.dim());
    let mut kept_sq = 0.0;
    let mut total_sq = 0.0;
    for (label, amp) in kept_state.amplitudes() {
        let conj_label = label.conjugate();
        let image_amp = image.state().amplitude(&conj_label);
        // full product: every (label, other) pair; diagonal keeps (label, label*)
        for (_, other_amp) in image.state().amplitudes() {
            total_sq += (amp * other_amp).norm_sqr();
        }
        let coefficient = amp * image_amp;
        kept_sq += coefficient.norm_sqr();
        weights.push(coefficient.re);
        terms.push(ProductTerm::new(
            coefficient,
            vec![
                PureState::basis(kept_state.slot(), label.clone()),
                PureState::basis(Slot::DetectorConj, conj_label),
            ],
        ));
    }
    let discarded_weight = if total_sq > 0.0 {
        (total_sq - kept_sq) / total_sq
    } else {
        0.0
    };
    // keep the composite canonical
    let composite = CompositeState::new(slots, terms)?;
    Ok(BoundState {
        terms: composite.terms().to_vec(),
        weights,
        discarded_weight,
        pairing,
    })
}

/// Pair a system state with its conjugate image and keep the diagonal
/// conjugate-matched terms. Weights are `|a_k|^2` and sum to one.
pub fn form_bound_state(system_state: &PureState, image: &ImageState) -> Result<BoundState> {
    bound_state_with(system_state, image, BoundPairing::SystemDetector)
}

/// Same diagonal construction, but pairing the detector's own copy of the
/// state (same amplitudes, detector slot) with the conjugate image. The
/// weights agree with [`form_bound_state`] by construction.
pub fn form_bound_state_dd(system_state: &PureState, image: &ImageState) -> Result<BoundState> {
    let detector_copy = system_state.with_slot(Slot::Detector);
    bound_state_with(&detector_copy, image, BoundPairing::DetectorDetector)
}

/// Hand the bound-state weights to the collapse walk as a simplex point.
pub fn born_weights(bound: &BoundState) -> Result<SimplexPoint> {
    SimplexPoint::new(bound.weights().to_vec())
}

/// How far a hypothetical linear unitary cloner is from consistency on this
/// pair: `|<psi|phi> - <psi|phi>^2|`.
///
/// Cloning would require the overlap to equal its own square, which holds
/// only at overlap 0 or 1; any pair strictly in between witnesses the
/// impossibility. The conjugate image evades this because conjugation is
/// antilinear, not unitary.
pub fn no_cloning_witness(psi: &PureState, phi: &PureState) -> Result<f64> {
    if psi.dim() != phi.dim() {
        return Err(Error::DimensionMismatch {
            left: psi.dim(),
            right: phi.dim(),
        });
    }
    let overlap = psi.inner(phi)?;
    Ok((overlap - overlap * overlap).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state_algebra::IDENTITY_TOL;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn eigen_state(amps: &[Complex64]) -> PureState {
        let width = amps.len().saturating_sub(1).to_string().len();
        let labeled = amps
            .iter()
            .enumerate()
            .map(|(k, a)| (BasisLabel::new(format!("e{k:0width$}")), *a))
            .collect();
        PureState::new(Slot::System, labeled).unwrap()
    }

    #[test]
    fn sea_requires_at_least_two_states() {
        assert!(matches!(build_sea(1), Err(Error::SeaTooSmall { n: 1 })));
    }

    #[test]
    fn sea_basis_is_orthonormal_with_conjugate_pairs() {
        let sea = build_sea(2).unwrap();
        for (j, bj) in sea.basis().iter().enumerate() {
            for (k, bk) in sea.basis().iter().enumerate() {
                let ip = bj.inner(bk).unwrap();
                let expected = if j == k { 1.0 } else { 0.0 };
                assert!((ip - c(expected, 0.0)).norm() < IDENTITY_TOL);
            }
            assert_eq!(sea.conjugates()[j], bj.conjugate());
            assert_eq!(sea.conjugates()[j].conjugate(), *bj);
        }
    }

    #[test]
    fn singlet_norm_is_one() {
        for n in [2, 16] {
            let sea = build_sea(n).unwrap();
            assert!((sea.singlet().norm() - 1.0).abs() < IDENTITY_TOL);
        }
    }

    #[test]
    fn unsymmetrized_product_has_n_uniform_terms() {
        let sea = build_sea(2).unwrap();
        let comp = combine_unsymmetrized(0, &sea).unwrap();
        assert_eq!(comp.term_count(), 2);
        for t in comp.terms() {
            assert!((t.coefficient - c(std::f64::consts::FRAC_1_SQRT_2, 0.0)).norm() < IDENTITY_TOL);
        }
        for n in [2usize, 8, 64] {
            let sea = build_sea(n).unwrap();
            let comp = combine_unsymmetrized(1, &sea).unwrap();
            assert_eq!(comp.term_count(), n);
            assert!((comp.norm() - 1.0).abs() < IDENTITY_TOL);
        }
    }

    #[test]
    fn boson_composite_term_count_and_coefficients() {
        let sea = build_sea(2).unwrap();
        let comp = symmetrize_boson(0, &sea).unwrap();
        // 2(N-1) pair terms plus the diagonal
        assert_eq!(comp.term_count(), 3);
        let mut coefs: Vec<f64> = comp.terms().iter().map(|t| t.coefficient.re).collect();
        coefs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((coefs[0] - 0.5).abs() < IDENTITY_TOL);
        assert!((coefs[1] - 0.5).abs() < IDENTITY_TOL);
        assert!((coefs[2] - std::f64::consts::FRAC_1_SQRT_2).abs() < IDENTITY_TOL);
    }

    #[test]
    fn boson_composite_is_normalized_for_all_sizes() {
        for n in [2usize, 8, 64] {
            let sea = build_sea(n).unwrap();
            let comp = symmetrize_boson(0, &sea).unwrap();
            assert_eq!(comp.term_count(), 2 * (n - 1) + 1);
            assert!((comp.norm() - 1.0).abs() < IDENTITY_TOL, "N = {n}");
        }
    }

    #[test]
    fn exchange_decomposition_reproduces_the_boson_composite() {
        for n in [2usize, 3, 8, 64] {
            let sea = build_sea(n).unwrap();
            for i in 0..n {
                let decomp = decompose_exchange(i, &sea).unwrap();
                let expected_coef = (1.0 - std::f64::consts::SQRT_2) / (n as f64).sqrt();
                assert!(
                    (decomp.exchange_coefficient - c(expected_coef, 0.0)).norm() < IDENTITY_TOL
                );
                let reference = symmetrize_boson(i, &sea).unwrap();
                assert!(
                    decomp.residual_against(&reference).unwrap() < IDENTITY_TOL,
                    "N = {n}, i = {i}"
                );
            }
        }
    }

    #[test]
    fn exchange_coefficient_frozen_values() {
        let sea2 = build_sea(2).unwrap();
        let sea8 = build_sea(8).unwrap();
        let c2 = decompose_exchange(0, &sea2).unwrap().exchange_coefficient;
        let c8 = decompose_exchange(0, &sea8).unwrap().exchange_coefficient;
        assert!((c2.re - (-0.29289)).abs() < 1e-5, "{c2}");
        assert!((c8.re - (-0.14645)).abs() < 1e-5, "{c8}");
    }

    #[test]
    fn fermion_composite_norm_terms_and_exclusion() {
        let sea = build_sea(2).unwrap();
        let comp = antisymmetrize_fermion(0, &sea).unwrap();
        assert_eq!(comp.term_count(), 2);
        let mut coefs: Vec<f64> = comp.terms().iter().map(|t| t.coefficient.re).collect();
        coefs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((coefs[0] + std::f64::consts::FRAC_1_SQRT_2).abs() < IDENTITY_TOL);
        assert!((coefs[1] - std::f64::consts::FRAC_1_SQRT_2).abs() < IDENTITY_TOL);

        for n in [2usize, 8, 64] {
            let sea = build_sea(n).unwrap();
            for i in [0, n - 1] {
                let comp = antisymmetrize_fermion(i, &sea).unwrap();
                assert!((comp.norm() - 1.0).abs() < IDENTITY_TOL);
                // exclusion: no term carries the incoming label in both the
                // system and detector slots
                for t in comp.terms() {
                    let s_label = t.factors[0].amplitudes()[0].0.clone();
                    let d_label = t.factors[1].amplitudes()[0].0.clone();
                    assert!(
                        !(s_label.name() == d_label.name()
                            && s_label.name() == sea.basis()[i].amplitudes()[0].0.name()),
                        "self-pairing term survived at N = {n}, i = {i}"
                    );
                }
            }
        }
    }

    #[test]
    fn fermion_role_swap_flips_the_sign() {
        let sea = build_sea(4).unwrap();
        let i = 1;
        let comp = antisymmetrize_fermion(i, &sea).unwrap();
        // rebuild with the S and D roles of the incoming state exchanged
        let coef = Complex64::new(1.0 / (2.0 * (sea.len() as f64 - 1.0)).sqrt(), 0.0);
        let mut terms = Vec::new();
        for j in 0..sea.len() {
            if j == i {
                continue;
            }
            terms.push(ProductTerm::new(
                coef,
                vec![
                    sea.system_state(j).unwrap(),
                    sea.basis()[i].clone(),
                    sea.conjugates()[j].clone(),
                ],
            ));
            terms.push(ProductTerm::new(
                -coef,
                vec![
                    sea.system_state(i).unwrap(),
                    sea.basis()[j].clone(),
                    sea.conjugates()[j].clone(),
                ],
            ));
        }
        let swapped = CompositeState::new(
            vec![Slot::System, Slot::Detector, Slot::DetectorConj],
            terms,
        )
        .unwrap();
        let sum = comp.add(&swapped).unwrap();
        assert!(sum.max_abs_coefficient() < IDENTITY_TOL);
    }

    #[test]
    fn hole_reduction_measures_sqrt_2_n_minus_1() {
        let expectations = [(2usize, 2.0f64), (10, 18.0)];
        for (n, sq) in expectations {
            let sea = build_sea(n).unwrap();
            let reduction = hole_reduce(0, &sea).unwrap();
            assert!(
                (reduction.proportionality - sq.sqrt()).abs() < IDENTITY_TOL,
                "N = {n}: {}",
                reduction.proportionality
            );
            assert!(reduction.residual < IDENTITY_TOL);
        }
        for n in [2usize, 3, 8, 64] {
            let sea = build_sea(n).unwrap();
            for i in 0..n {
                let reduction = hole_reduce(i, &sea).unwrap();
                let expected = (2.0 * (n as f64 - 1.0)).sqrt();
                assert!((reduction.proportionality - expected).abs() < IDENTITY_TOL);
                assert!(reduction.residual < IDENTITY_TOL, "N = {n}, i = {i}");
            }
        }
    }

    #[test]
    fn effective_product_expands_and_reports_the_dropped_weight() {
        let sea = build_sea(2).unwrap();
        let eff = fermion_effective_product(0, &sea).unwrap();
        assert_eq!(eff.state.term_count(), 1);

        let sea = build_sea(8).unwrap();
        let eff = fermion_effective_product(0, &sea).unwrap();
        assert_eq!(eff.state.term_count(), 7);
        let expected = 1.0 / 7.0f64.sqrt();
        for t in eff.state.terms() {
            assert!((t.coefficient - c(expected, 0.0)).norm() < IDENTITY_TOL);
        }
        assert!((eff.state.norm() - 1.0).abs() < IDENTITY_TOL);
        // dropped term norm over full hole-form norm: sqrt(N-1) / sqrt(2(N-1))
        assert!((eff.dropped_norm_fraction - std::f64::consts::FRAC_1_SQRT_2).abs() < IDENTITY_TOL);
    }

    #[test]
    fn image_of_a_basis_state_is_its_barred_copy() {
        let psi = eigen_state(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let image = extract_image(&psi);
        assert_eq!(image.state().slot(), Slot::DetectorConj);
        let amps = image.state().amplitudes();
        assert!(amps.iter().all(|(l, _)| l.is_conjugated()));
        assert_eq!(amps[0].1, c(1.0, 0.0));
        assert_eq!(amps[1].1, c(0.0, 0.0));
    }

    #[test]
    fn image_conjugates_amplitudes() {
        let psi = eigen_state(&[c(0.5, 0.5), c(0.5, -0.5)]);
        let image = extract_image(&psi);
        let a0 = image
            .state()
            .amplitude(&BasisLabel::new("e0").conjugate());
        let a1 = image
            .state()
            .amplitude(&BasisLabel::new("e1").conjugate());
        assert!((a0 - c(0.5, -0.5)).norm() < IDENTITY_TOL);
        assert!((a1 - c(0.5, 0.5)).norm() < IDENTITY_TOL);
    }

    #[test]
    fn image_of_a_global_phase_is_the_opposite_phase() {
        let theta = std::f64::consts::PI / 3.0;
        let phase = Complex64::from_polar(1.0, theta);
        let psi = eigen_state(&[c(0.6, 0.0), c(0.8, 0.0)]);
        let lhs = extract_image(&psi.scale(phase));
        let rhs = extract_image(&psi).state().scale(phase.conj());
        for ((_, x), (_, y)) in lhs.state().amplitudes().iter().zip(rhs.amplitudes()) {
            assert!((x - y).norm() < IDENTITY_TOL);
        }
    }

    #[test]
    fn bound_state_weights_are_squared_moduli() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let cases: Vec<(Vec<Complex64>, Vec<f64>)> = vec![
            (vec![c(r, 0.0), c(r, 0.0)], vec![0.5, 0.5]),
            (vec![c(0.6, 0.0), c(0.8, 0.0)], vec![0.36, 0.64]),
            (vec![c(1.0, 0.0), c(0.0, 0.0)], vec![1.0, 0.0]),
        ];
        for (amps, expected) in cases {
            let psi = eigen_state(&amps);
            let bound = form_bound_state(&psi, &extract_image(&psi)).unwrap();
            for (w, e) in bound.weights().iter().zip(&expected) {
                assert!((w - e).abs() < IDENTITY_TOL, "{:?}", bound.weights());
            }
            assert!((bound.weights().iter().sum::<f64>() - 1.0).abs() < IDENTITY_TOL);
        }
    }

    #[test]
    fn eigenstate_bound_state_has_a_single_term() {
        let psi = eigen_state(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let bound = form_bound_state(&psi, &extract_image(&psi)).unwrap();
        assert_eq!(bound.terms().len(), 1);
        assert_eq!(bound.discarded_weight(), 0.0);
    }

    #[test]
    fn both_bound_pairings_agree_on_weights() {
        let norm = (0.6f64 * 0.6 + 0.64 * 0.64 + 0.48 * 0.48).sqrt();
        let psi = eigen_state(&[
            c(0.6 / norm, 0.0),
            c(0.0, 0.64 / norm),
            c(0.48 / norm, 0.0),
        ]);
        let image = extract_image(&psi);
        let sd = form_bound_state(&psi, &image).unwrap();
        let dd = form_bound_state_dd(&psi, &image).unwrap();
        assert_eq!(sd.pairing(), BoundPairing::SystemDetector);
        assert_eq!(dd.pairing(), BoundPairing::DetectorDetector);
        for (a, b) in sd.weights().iter().zip(dd.weights()) {
            assert!((a - b).abs() < IDENTITY_TOL);
        }
    }

    #[test]
    fn born_weights_hand_off_to_the_simplex() {
        let norm = (0.6f64 * 0.6 + 0.64 * 0.64 + 0.48 * 0.48).sqrt();
        let amps = [0.6 / norm, 0.64 / norm, 0.48 / norm];
        let psi = eigen_state(&[c(amps[0], 0.0), c(amps[1], 0.0), c(amps[2], 0.0)]);
        let bound = form_bound_state(&psi, &extract_image(&psi)).unwrap();
        let point = born_weights(&bound).unwrap();
        for (p, a) in point.coords().iter().zip(&amps) {
            assert!((p - a * a).abs() < IDENTITY_TOL);
        }
    }

    #[test]
    fn witness_vanishes_only_on_equal_or_orthogonal_pairs() {
        let psi = eigen_state(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let phi = eigen_state(&[c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(no_cloning_witness(&psi, &psi).unwrap() < IDENTITY_TOL);
        assert!(no_cloning_witness(&psi, &phi).unwrap() < IDENTITY_TOL);

        let half = eigen_state(&[c(0.5, 0.0), c(3.0f64.sqrt() / 2.0, 0.0)]);
        let w = no_cloning_witness(&psi, &half).unwrap();
        assert!((w - 0.25).abs() < IDENTITY_TOL);
    }

    #[test]
    fn witness_is_positive_strictly_between() {
        for k in 1..100 {
            let t = 0.05 + 0.9 * (k as f64 / 100.0);
            let psi = eigen_state(&[c(1.0, 0.0), c(0.0, 0.0)]);
            let phi = eigen_state(&[c(t, 0.0), c((1.0 - t * t).sqrt(), 0.0)]);
            assert!(no_cloning_witness(&psi, &phi).unwrap() > 0.0);
        }
    }

    #[test]
    fn superposed_incoming_states_extend_linearly() {
        let sea = build_sea(3).unwrap();
        let amps = vec![
            (BasisLabel::new("0"), c(0.6, 0.0)),
            (BasisLabel::new("1"), c(0.0, 0.8)),
        ];
        let incoming = PureState::new(Slot::System, amps).unwrap();
        let combined = symmetrize_boson_superposed(&incoming, &sea).unwrap();
        let manual = symmetrize_boson(0, &sea)
            .unwrap()
            .scale(c(0.6, 0.0))
            .add(&symmetrize_boson(1, &sea).unwrap().scale(c(0.0, 0.8)))
            .unwrap();
        assert!(combined.sub(&manual).unwrap().max_abs_coefficient() < IDENTITY_TOL);
    }

    #[test]
    fn index_out_of_range_is_reported() {
        let sea = build_sea(4).unwrap();
        assert!(matches!(
            symmetrize_boson(4, &sea),
            Err(Error::IndexOutOfRange { index: 4, size: 4 })
        ));
        assert!(matches!(
            antisymmetrize_fermion(9, &sea),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    proptest! {
        #[test]
        fn image_is_antilinear_on_random_combinations(
            c1r in -1.0f64..1.0, c1i in -1.0f64..1.0,
            c2r in -1.0f64..1.0, c2i in -1.0f64..1.0,
        ) {
            let psi1 = eigen_state(&[c(0.6, 0.2), c(0.3, -0.7)]);
            let psi2 = eigen_state(&[c(-0.1, 0.4), c(0.5, 0.5)]);
            let (c1, c2) = (c(c1r, c1i), c(c2r, c2i));
            let combo = psi1.scale(c1).add(&psi2.scale(c2)).unwrap();
            let lhs = extract_image(&combo);
            let rhs = extract_image(&psi1)
                .state()
                .scale(c1.conj())
                .add(&extract_image(&psi2).state().scale(c2.conj()))
                .unwrap();
            for ((_, x), (_, y)) in lhs.state().amplitudes().iter().zip(rhs.amplitudes()) {
                prop_assert!((x - y).norm() < IDENTITY_TOL);
            }
        }

        #[test]
        fn bound_weights_match_squared_moduli_for_random_states(
            raw in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..16),
        ) {
            let norm_sq: f64 = raw.iter().map(|(re, im)| re * re + im * im).sum();
            prop_assume!(norm_sq > 1e-3);
            let scale = 1.0 / norm_sq.sqrt();
            let amps: Vec<Complex64> =
                raw.iter().map(|(re, im)| c(re * scale, im * scale)).collect();
            let psi = eigen_state(&amps);
            let bound = form_bound_state(&psi, &extract_image(&psi)).unwrap();
            let mut total = 0.0;
            for (w, a) in bound.weights().iter().zip(&amps) {
                prop_assert!((w - a.norm_sqr()).abs() < IDENTITY_TOL);
                total += w;
            }
            prop_assert!((total - 1.0).abs() < IDENTITY_TOL);
        }

        #[test]
        fn witness_is_positive_for_interior_overlaps(
            t in 0.051f64..0.949,
            phase in 0.0f64..std::f64::consts::TAU,
        ) {
            let psi = eigen_state(&[c(1.0, 0.0), c(0.0, 0.0)]);
            let z = Complex64::from_polar(t, phase);
            let rest = (1.0 - t * t).sqrt();
            let phi = eigen_state(&[z, c(rest, 0.0)]);
            prop_assert!(no_cloning_witness(&psi, &phi).unwrap() > 0.0);
        }
    }
}
