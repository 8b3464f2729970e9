//! Refinable functions from zero placements on the mask tree.
//!
//! Node `m ∈ [0, p^{M+N+1})` of the tree stands for the cell of `G_{M+1}^⊥` at
//! granularity `G_{-N}^⊥` with index `m`; its parent `m div p` is the cell of
//! `χ𝒜^{-1}`. The mask value there is
//! `λ_m = Σ_n β_n e^{-2πi·rev(m)·n/p^{M+N+1}}`, so the full value vector is one
//! digit-reversed DFT of the zero-padded coefficients.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fft::RadixPlan;
use crate::group::{ipow, rademacher_pair, unit_root, Params, PointIndex};
use crate::step::{Spectrum, StepSignal};
use crate::{TAU_EQ, TAU_ZERO};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaskError {
    #[error("node {node} is outside the tree (valid ids are 1..{node_count})")]
    NodeOutOfRange { node: usize, node_count: usize },
    #[error("{} leaves have no zero on their path, first {:?}", uncovered.len(), &uncovered[..uncovered.len().min(8)])]
    NotCovering { uncovered: Vec<usize> },
    #[error(
        "{count} zeros reach the limit p^(N+1) = {limit}: no refinable function has this mask"
    )]
    Rejected { count: usize, limit: usize },
    #[error("constraint matrix is singular")]
    SingularSystem,
    #[error("constraints cannot be met: residual {residual:e}")]
    Infeasible { residual: f64 },
    #[error("node {0} is pinned and also chosen as a zero")]
    PinOnZero(usize),
    #[error("node {0} is pinned twice")]
    DuplicatePin(usize),
    #[error("leaf {leaf} product is {value:e}, not annihilated")]
    LeafNotAnnihilated { leaf: usize, value: f64 },
    #[error("expected {expected} coefficients, got {got}")]
    CoefficientCount { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    Case1,
    Case2,
    Rejected,
    NotCovering,
}

impl Classification {
    pub fn is_accepted(self) -> bool {
        matches!(self, Classification::Case1 | Classification::Case2)
    }
}

/// Which zero sets [`enumerate_zero_sets`] emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroSetFilter {
    Any,
    Case1,
    Case2,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskTree {
    params: Params,
    zeros: BTreeSet<usize>,
}

impl MaskTree {
    /// Duplicated ids collapse into one zero.
    pub fn new(params: Params, zeros: impl IntoIterator<Item = usize>) -> Result<Self, MaskError> {
        let node_count = params.node_count();
        let zeros: BTreeSet<usize> = zeros.into_iter().collect();
        if let Some(&node) = zeros.iter().find(|&&m| m == 0 || m >= node_count) {
            return Err(MaskError::NodeOutOfRange { node, node_count });
        }
        Ok(MaskTree { params, zeros })
    }

    pub fn params(&self) -> Params {
        self.params
    }

    pub fn zeros(&self) -> &BTreeSet<usize> {
        &self.zeros
    }

    pub fn leaves(&self) -> std::ops::Range<usize> {
        self.params.spectrum_len()..self.params.node_count()
    }

    /// Leaves whose root path carries no zero, in increasing order.
    pub fn uncovered_leaves(&self) -> Vec<usize> {
        let p = self.params.p() as usize;
        self.leaves()
            .filter(|&leaf| {
                let mut m = leaf;
                while m != 0 {
                    if self.zeros.contains(&m) {
                        return false;
                    }
                    m /= p;
                }
                true
            })
            .collect()
    }

    pub fn classify(&self) -> Classification {
        let limit = self.params.coefficient_count();
        if !self.uncovered_leaves().is_empty() {
            Classification::NotCovering
        } else if self.zeros.len() >= limit {
            Classification::Rejected
        } else if self.zeros.len() == limit - 1 {
            Classification::Case1
        } else {
            Classification::Case2
        }
    }
}

/// An extra linear condition `λ_node = value` for the underdetermined case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pin {
    pub node: usize,
    pub value: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveKind {
    ExactlyDetermined,
    Underdetermined,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskSolution {
    pub params: Params,
    pub zeros: Vec<usize>,
    pub pins: Vec<Pin>,
    pub classification: Classification,
    pub kind: SolveKind,
    pub beta: Vec<Complex64>,
    pub lambda: Vec<Complex64>,
}

/// Row of the extended system: `λ_node = Σ_n row[n] β_n`.
pub fn constraint_row(params: &Params, node: usize) -> Vec<Complex64> {
    let len = params.tree_height() + 1;
    let size = params.node_count() as u128;
    let rev = crate::group::digit_reverse(node as u64, len, params.p()) as u128;
    (0..params.coefficient_count() as u128)
        .map(|n| unit_root(size - (rev * n) % size, size))
        .collect()
}

/// All mask values `λ_m`, `m ∈ [0, p^{M+N+1})`.
pub fn mask_values(beta: &[Complex64], params: &Params) -> Vec<Complex64> {
    let mut data = vec![Complex64::new(0.0, 0.0); params.node_count()];
    data[..beta.len()].copy_from_slice(beta);
    RadixPlan::new(params.p(), params.tree_height() + 1).forward_digit_reversed(&mut data);
    data
}

/// `λ_m` by the literal product of Rademacher pairings between the digits of
/// `χ𝒜^{-1}` and of every shift `h`.
pub fn mask_values_oracle(beta: &[Complex64], params: &Params) -> Vec<Complex64> {
    let p = params.p();
    let n_depth = params.support_depth() as i32;
    let len = (params.tree_height() + 1) as usize;
    let shift_len = (n_depth + 1) as usize;
    (0..params.node_count())
        .map(|m| {
            let alpha = crate::group::digits_of(m as u64, len, p);
            beta.iter()
                .enumerate()
                .map(|(n, b)| {
                    // n = Σ a_{-ν} p^{N+1-ν}: the i-th low digit is a_{-(N+1-i)}.
                    let a = crate::group::digits_of(n as u64, shift_len, p);
                    let mut pairing = Complex64::new(1.0, 0.0);
                    for (i, &alpha_k) in alpha.iter().enumerate() {
                        let level = i as i32 - n_depth - 1; // α_k sits at level k-1 in χ𝒜^{-1}
                        for (j, &a_nu) in a.iter().enumerate() {
                            let point_level = j as i32 - n_depth - 1;
                            let factor = rademacher_pair(level, point_level, p);
                            pairing *= factor.powu(alpha_k * a_nu);
                        }
                    }
                    b * pairing.conj()
                })
                .sum()
        })
        .collect()
}

const REFINEMENT_STEPS: usize = 2;

/// A factorization of the constraint matrix, computed once and reused for
/// iterative refinement.
enum Factored {
    Lu(nalgebra::linalg::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>),
    /// `Aᴴ = QR`, so the minimum-norm solution is `Q R^{-ᴴ} b`.
    MinNorm(DMatrix<Complex64>, DMatrix<Complex64>),
    Svd(nalgebra::linalg::SVD<Complex64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl Factored {
    fn new(a: &DMatrix<Complex64>) -> Self {
        let (rows, cols) = a.shape();
        if rows == cols {
            return Factored::Lu(a.clone().lu());
        }
        if rows < cols {
            let qr = a.adjoint().qr();
            let r = qr.r();
            let diag: Vec<f64> = r.diagonal().iter().map(|d| d.norm()).collect();
            let largest = diag.iter().copied().fold(0.0, f64::max);
            if diag.iter().all(|&d| d > largest * 1e-10) {
                return Factored::MinNorm(qr.q(), r.adjoint());
            }
        }
        Factored::Svd(a.clone().svd(true, true))
    }

    fn solve(&self, rhs: &DVector<Complex64>) -> Result<DVector<Complex64>, MaskError> {
        match self {
            Factored::Lu(lu) => lu.solve(rhs).ok_or(MaskError::SingularSystem),
            Factored::MinNorm(q, r_adjoint) => r_adjoint
                .solve_lower_triangular(rhs)
                .map(|y| q * y)
                .ok_or(MaskError::SingularSystem),
            Factored::Svd(svd) => {
                let cutoff = svd.singular_values.max() * 1e-12;
                svd.solve(rhs, cutoff).map_err(|_| MaskError::SingularSystem)
            }
        }
    }
}

/// Least-squares (or exact) solve of `Σ_n row_i[n] β_n = rhs_i`; fails with
/// [`MaskError::Infeasible`] when the residual exceeds `TAU_ZERO`.
pub fn solve_constraints(
    params: &Params,
    rows: &[(usize, Complex64)],
) -> Result<(Vec<Complex64>, SolveKind), MaskError> {
    let unknowns = params.coefficient_count();
    let mut a = DMatrix::<Complex64>::zeros(rows.len(), unknowns);
    let mut b = DVector::<Complex64>::zeros(rows.len());
    for (i, (node, value)) in rows.iter().enumerate() {
        for (j, v) in constraint_row(params, *node).into_iter().enumerate() {
            a[(i, j)] = v;
        }
        b[i] = *value;
    }
    let kind = match rows.len().cmp(&unknowns) {
        std::cmp::Ordering::Less => SolveKind::Underdetermined,
        _ => SolveKind::ExactlyDetermined,
    };
    let factored = Factored::new(&a);
    let mut beta = factored.solve(&b)?;
    for _ in 0..REFINEMENT_STEPS {
        beta += factored.solve(&(&b - &a * &beta))?;
    }
    let residual = (&a * &beta - &b)
        .iter()
        .map(|v| v.norm())
        .fold(0.0, |acc: f64, r| {
            if acc.is_nan() || r.is_nan() {
                f64::NAN
            } else {
                acc.max(r)
            }
        });
    if !residual.is_finite() || residual > TAU_ZERO {
        return Err(MaskError::Infeasible { residual });
    }
    Ok((beta.iter().copied().collect(), kind))
}

pub fn solve_mask(tree: &MaskTree) -> Result<MaskSolution, MaskError> {
    solve_mask_with_pins(tree, &[])
}

pub fn solve_mask_with_pins(tree: &MaskTree, pins: &[Pin]) -> Result<MaskSolution, MaskError> {
    let params = tree.params;
    let classification = tree.classify();
    match classification {
        Classification::NotCovering => {
            return Err(MaskError::NotCovering {
                uncovered: tree.uncovered_leaves(),
            })
        }
        Classification::Rejected => {
            return Err(MaskError::Rejected {
                count: tree.zeros.len(),
                limit: params.coefficient_count(),
            })
        }
        _ => {}
    }
    let mut seen = BTreeSet::new();
    for pin in pins {
        if pin.node == 0 || pin.node >= params.node_count() {
            return Err(MaskError::NodeOutOfRange {
                node: pin.node,
                node_count: params.node_count(),
            });
        }
        if tree.zeros.contains(&pin.node) {
            return Err(MaskError::PinOnZero(pin.node));
        }
        if !seen.insert(pin.node) {
            return Err(MaskError::DuplicatePin(pin.node));
        }
    }
    let mut rows = vec![(0usize, Complex64::new(1.0, 0.0))];
    rows.extend(tree.zeros.iter().map(|&m| (m, Complex64::new(0.0, 0.0))));
    rows.extend(pins.iter().map(|pin| (pin.node, pin.value)));
    let (beta, kind) = solve_constraints(&params, &rows)?;
    let mut lambda = mask_values(&beta, &params);
    // imposed values hold to TAU_ZERO; store them exactly so that leaf
    // products are not polluted by large factors further up the path
    for &(node, value) in &rows {
        lambda[node] = value;
    }
    Ok(MaskSolution {
        params,
        zeros: tree.zeros.iter().copied().collect(),
        pins: pins.to_vec(),
        classification,
        kind,
        beta,
        lambda,
    })
}

/// `Π_{i≥0} λ_{m div p^i}` for a node `m`.
pub fn path_product(lambda: &[Complex64], p: u32, node: usize) -> Complex64 {
    let mut acc = lambda[0];
    let mut m = node;
    while m != 0 {
        acc *= lambda[m];
        m /= p as usize;
    }
    acc
}

/// `φ̂` on `𝔇_{-N}(G_M^⊥)`, after checking that every leaf product vanishes.
pub fn synthesize_phi_hat(sol: &MaskSolution) -> Result<Spectrum, MaskError> {
    let params = sol.params;
    let p = params.p();
    for leaf in params.spectrum_len()..params.node_count() {
        let value = path_product(&sol.lambda, p, leaf).norm();
        if value > TAU_ZERO {
            return Err(MaskError::LeafNotAnnihilated { leaf, value });
        }
    }
    let values = (0..params.spectrum_len())
        .map(|u| path_product(&sol.lambda, p, u))
        .collect();
    Ok(Spectrum::new(
        p,
        params.support_depth() as i32,
        params.constancy_depth() as i32,
        values,
    )
    .expect("window sized from params"))
}

/// `max_x |φ(x) − p Σ_n β_n φ(𝒜x ∸ h_n)|` over the cells of `G_{-N}` at
/// granularity `G_{M+1}`.
pub fn refinement_check(
    phi: &StepSignal,
    beta: &[Complex64],
    params: &Params,
) -> Result<f64, MaskError> {
    if beta.len() != params.coefficient_count() {
        return Err(MaskError::CoefficientCount {
            expected: params.coefficient_count(),
            got: beta.len(),
        });
    }
    let n = params.support_depth() as i32;
    let m = params.constancy_depth() as i32;
    let size = params.node_count() as u64;
    let p = params.p() as f64;
    let mut worst = 0.0f64;
    for w in 0..size {
        let lhs = phi
            .value_at(&PointIndex::new(w, n, m + 1))
            .expect("finer window");
        // 𝒜x has the same digit word, one level lower; h_n sits at index n there.
        let rhs: Complex64 = beta
            .iter()
            .enumerate()
            .map(|(shift, b)| {
                let z = (w + size - shift as u64) % size;
                b * phi
                    .value_at(&PointIndex::new(z, n + 1, m))
                    .expect("same constancy")
            })
            .sum::<Complex64>()
            * p;
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MraReport {
    pub generates_mra: bool,
    pub orthogonal: bool,
}

pub fn check_mra_conditions(phi_hat: &Spectrum) -> MraReport {
    let values = phi_hat.values();
    let generates_mra = (values[0] - Complex64::new(1.0, 0.0)).norm() <= TAU_EQ
        && values.iter().all(|v| v.norm() <= 1.0 + TAU_EQ);
    // cells of G_0^⊥ are the first p^N indices
    let inside = ipow(phi_hat.p(), phi_hat.cell_depth().max(0) as u32).min(values.len());
    let orthogonal = values.iter().enumerate().all(|(u, v)| {
        let target = if u < inside { 1.0 } else { 0.0 };
        (v.norm() - target).abs() <= TAU_EQ
    });
    MraReport {
        generates_mra,
        orthogonal,
    }
}

/// Covering zero sets with at most `p^{N+1} − 1` nodes, depth first, in
/// lexicographic order of their sorted id lists, stopping after `max_count`.
pub fn enumerate_zero_sets(
    params: Params,
    max_count: usize,
    filter: ZeroSetFilter,
) -> Vec<MaskTree> {
    let mut search = Enumerator {
        params,
        p: params.p() as usize,
        height: params.tree_height() + 1,
        first_leaf: params.spectrum_len(),
        node_count: params.node_count(),
        budget: params.coefficient_count() - 1,
        cover: vec![0; params.node_count() - params.spectrum_len()],
        chosen: Vec::new(),
        filter,
        max_count,
        out: Vec::new(),
    };
    if max_count > 0 {
        search.descend(1);
    }
    search.out
}

struct Enumerator {
    params: Params,
    p: usize,
    height: u32,
    first_leaf: usize,
    node_count: usize,
    budget: usize,
    cover: Vec<u32>,
    chosen: Vec<usize>,
    filter: ZeroSetFilter,
    max_count: usize,
    out: Vec<MaskTree>,
}

impl Enumerator {
    fn leaf_range(&self, node: usize) -> std::ops::Range<usize> {
        let mut level = 0u32;
        let mut m = node;
        while m > 0 {
            m /= self.p;
            level += 1;
        }
        let span = ipow(self.p as u32, self.height - level);
        node * span - self.first_leaf..(node + 1) * span - self.first_leaf
    }

    fn first_uncovered(&self) -> Option<usize> {
        self.cover
            .iter()
            .position(|&c| c == 0)
            .map(|i| i + self.first_leaf)
    }

    fn descend(&mut self, next: usize) {
        let uncovered = self.first_uncovered();
        if uncovered.is_none() {
            let accept = match self.filter {
                ZeroSetFilter::Any => true,
                ZeroSetFilter::Case1 => self.chosen.len() == self.budget,
                ZeroSetFilter::Case2 => self.chosen.len() < self.budget,
            };
            if accept {
                self.out.push(MaskTree {
                    params: self.params,
                    zeros: self.chosen.iter().copied().collect(),
                });
                if self.out.len() >= self.max_count {
                    return;
                }
            }
        }
        if self.chosen.len() == self.budget {
            return;
        }
        // A leaf below `next` can only be covered by ids smaller than itself.
        let last = uncovered.map_or(self.node_count - 1, |leaf| leaf.min(self.node_count - 1));
        for node in next..=last {
            let range = self.leaf_range(node);
            self.cover[range.clone()].iter_mut().for_each(|c| *c += 1);
            self.chosen.push(node);
            self.descend(node + 1);
            self.chosen.pop();
            self.cover[range].iter_mut().for_each(|c| *c -= 1);
            if self.out.len() >= self.max_count {
                return;
            }
        }
    }
}

/// A random covering zero set within the accepted budget: a random cut of
/// the tree below the root, then random extra nodes up to a random count.
pub fn random_zero_set<R: Rng + ?Sized>(params: Params, rng: &mut R) -> MaskTree {
    let p = params.p() as usize;
    let first_leaf = params.spectrum_len();
    let budget = params.coefficient_count() - 1;
    let mut zeros = BTreeSet::new();
    for _ in 0..64 {
        zeros.clear();
        let mut stack: Vec<usize> = (1..p).collect();
        while let Some(m) = stack.pop() {
            if m >= first_leaf || rng.random_bool(0.5) {
                zeros.insert(m);
            } else {
                stack.extend(m * p..m * p + p);
            }
            if zeros.len() > budget {
                break;
            }
        }
        if zeros.len() <= budget {
            break;
        }
    }
    if zeros.len() > budget {
        zeros = (1..p).collect();
    }
    let target = rng.random_range(zeros.len()..=budget);
    let free = params.node_count() - 1;
    while zeros.len() < target.min(free) {
        zeros.insert(rng.random_range(1..params.node_count()));
    }
    MaskTree { params, zeros }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: u32, n: u32, m: u32) -> Params {
        Params::new(p, n, m).unwrap()
    }

    #[test]
    fn classification_examples() {
        let t = MaskTree::new(params(3, 0, 0), [1, 2]).unwrap();
        assert_eq!(t.classify(), Classification::Case1);
        let t = MaskTree::new(params(2, 0, 1), []).unwrap();
        assert_eq!(t.classify(), Classification::NotCovering);
        let t = MaskTree::new(params(2, 0, 1), [2, 3]).unwrap();
        assert_eq!(t.classify(), Classification::Rejected);
        let t = MaskTree::new(params(2, 0, 1), [3]).unwrap();
        assert_eq!(t.uncovered_leaves(), vec![2]);
        assert!(MaskTree::new(params(2, 0, 1), [4]).is_err());
        assert!(MaskTree::new(params(2, 0, 1), [0]).is_err());
    }

    #[test]
    fn haar_masks() {
        let sol = solve_mask(&MaskTree::new(params(2, 0, 0), [1]).unwrap()).unwrap();
        assert!((sol.beta[0] - 0.5).norm() < 1e-15 && (sol.beta[1] - 0.5).norm() < 1e-15);
        assert!((sol.lambda[0] - 1.0).norm() < 1e-15 && sol.lambda[1].norm() < 1e-15);
        let sol = solve_mask(&MaskTree::new(params(3, 0, 0), [1, 2]).unwrap()).unwrap();
        for b in &sol.beta {
            assert!((b - 1.0 / 3.0).norm() < 1e-15);
        }
        let phi_hat = synthesize_phi_hat(&sol).unwrap();
        assert_eq!(phi_hat.values().len(), 1);
        assert!((phi_hat.values()[0] - 1.0).norm() < 1e-15);
        let report = check_mra_conditions(&phi_hat);
        assert!(report.generates_mra && report.orthogonal);
    }

    #[test]
    fn oracle_trivial_beta() {
        let pr = params(3, 1, 1);
        let mut beta = vec![Complex64::new(0.0, 0.0); 9];
        beta[0] = Complex64::new(1.0, 0.0);
        for v in mask_values_oracle(&beta, &pr) {
            assert!((v - 1.0).norm() < 1e-15);
        }
    }

    #[test]
    fn haar_refinement_identity() {
        let pr = params(2, 0, 0);
        let phi = StepSignal::subgroup_indicator(2, 0, 0, 0).unwrap();
        let beta = vec![Complex64::new(0.5, 0.0); 2];
        assert!(refinement_check(&phi, &beta, &pr).unwrap() < 1e-15);
        let doubled = vec![Complex64::new(1.0, 0.0); 2];
        assert!(refinement_check(&phi, &doubled, &pr).unwrap() > 0.5);
    }

    #[test]
    fn mra_condition_examples() {
        let bad = Spectrum::new(
            2,
            0,
            1,
            vec![Complex64::new(1.0, 0.0), Complex64::new(1.5, 0.0)],
        )
        .unwrap();
        assert!(!check_mra_conditions(&bad).generates_mra);
        let wide = Spectrum::subgroup_indicator(2, 1, 0, 1).unwrap();
        let r = check_mra_conditions(&wide);
        assert!(r.generates_mra && !r.orthogonal);
    }

    #[test]
    fn enumeration_small_cases() {
        let one = enumerate_zero_sets(params(2, 0, 0), 100, ZeroSetFilter::Any);
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].zeros().iter().copied().collect::<Vec<_>>(), vec![1]);
        let one = enumerate_zero_sets(params(3, 0, 0), 100, ZeroSetFilter::Any);
        assert_eq!(one.len(), 1);
        assert_eq!(
            one[0].zeros().iter().copied().collect::<Vec<_>>(),
            vec![1, 2]
        );
    }

    #[test]
    fn pins_are_honoured() {
        let pr = params(2, 1, 0);
        let tree = MaskTree::new(pr, [1]).unwrap();
        let sol = solve_mask(&tree).unwrap();
        assert_eq!(sol.kind, SolveKind::Underdetermined);
        let pin = Pin {
            node: 2,
            value: Complex64::new(0.25, -0.5),
        };
        let sol = solve_mask_with_pins(&tree, &[pin]).unwrap();
        assert_eq!(sol.kind, SolveKind::Underdetermined);
        assert!((sol.lambda[2] - pin.value).norm() < 1e-12);
        assert_eq!(
            solve_mask_with_pins(&tree, &[Pin { node: 1, ..pin }]),
            Err(MaskError::PinOnZero(1))
        );
    }
}
