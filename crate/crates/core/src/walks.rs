//! Quantum and classical walk propagators and their hitting curves.
//!
//! All public entry points speak dimensionless time `tau = gamma * t`, so
//! results never depend on the hopping rate itself. The quantum walk runs
//! either on the exact `2n + 2` site chain or on the full graph; the
//! classical random walk runs on the full graph or on its exact column
//! lumping, a birth-death chain solved in closed form through a symmetrized
//! tridiagonal generator.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graphs::{
    build_glued_tree, node_count, reduce_to_chain, GluedTreeGraph, GluedTreeParams, NODE_BUDGET,
};
use crate::linalg::{
    eigh_tridiagonal, expm_action_eigen, expm_action_krylov, EigenSystem, KrylovOptions,
    Propagation, SparseSymmetric, SymTridiagonal,
};

/// Which walk a sweep evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WalkKind {
    QwChain,
    QwFull,
    CrwFull,
    CrwLumped,
}

impl WalkKind {
    pub const ALL: [WalkKind; 4] =
        [WalkKind::QwChain, WalkKind::QwFull, WalkKind::CrwFull, WalkKind::CrwLumped];

    pub fn as_str(&self) -> &'static str {
        match self {
            WalkKind::QwChain => "qw-chain",
            WalkKind::QwFull => "qw-full",
            WalkKind::CrwFull => "crw-full",
            WalkKind::CrwLumped => "crw-lumped",
        }
    }
}

impl fmt::Display for WalkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WalkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        WalkKind::ALL.iter().copied().find(|k| k.as_str() == s).ok_or_else(|| {
            Error::parameter(format!(
                "unknown walk kind {s:?}; expected one of qw-chain, qw-full, crw-full, crw-lumped"
            ))
        })
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::parameter(format!("gamma must be positive and finite, got {gamma}")));
    }
    Ok(())
}

fn check_tau(tau: f64) -> Result<()> {
    if !tau.is_finite() || tau < 0.0 {
        return Err(Error::parameter(format!("tau must be finite and >= 0, got {tau}")));
    }
    Ok(())
}

fn check_budget(graph: &GluedTreeGraph) -> Result<()> {
    if graph.node_count() as u128 > NODE_BUDGET {
        return Err(Error::parameter(format!(
            "graph with {} nodes exceeds the {NODE_BUDGET}-node budget",
            graph.node_count()
        )));
    }
    Ok(())
}

fn entrance_state(dim: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); dim];
    v[0] = Complex64::new(1.0, 0.0);
    v
}

/// Exit-site probability `|<exit| exp(-i H s) |entrance>|^2` of a chain
/// Hamiltonian evolved for time `s`.
///
/// With the canonical unit-rate chain from
/// [`reduce_to_chain`]`(B, n, 1.0)`, `s` is the dimensionless time
/// `tau = gamma * t`; passing a chain built with explicit `gamma` at
/// `s = tau / gamma` yields the identical value.
pub fn qw_hitting_chain(chain: &SymTridiagonal, s: f64) -> Result<f64> {
    check_tau(s)?;
    let eig = eigh_tridiagonal(chain)?;
    let state = expm_action_eigen(&eig, Propagation::Unitary, s, &entrance_state(chain.dim()))?;
    Ok(state[chain.dim() - 1].norm_sqr())
}

/// Chain quantum walk with the eigendecomposition cached.
///
/// Evaluating one time point costs `O(n)` once constructed, which makes
/// dense peak scans over thousands of points cheap.
#[derive(Debug, Clone)]
pub struct ChainQw {
    branching: u32,
    depth: u32,
    eig: EigenSystem,
    /// Spectral transfer weights `V[entrance, k] * V[exit, k]`.
    weights: Vec<f64>,
}

impl ChainQw {
    pub fn new(branching: u32, depth: u32) -> Result<Self> {
        let chain = reduce_to_chain(branching, depth, 1.0)?;
        let eig = eigh_tridiagonal(&chain)?;
        let m = chain.dim();
        let weights =
            (0..m).map(|k| eig.eigenvector(k)[0] * eig.eigenvector(k)[m - 1]).collect();
        Ok(ChainQw { branching, depth, eig, weights })
    }

    pub fn branching(&self) -> u32 {
        self.branching
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Exit probability at dimensionless time `tau`.
    pub fn exit_probability(&self, tau: f64) -> f64 {
        if tau == 0.0 {
            // Exact: the walker starts on the entrance, not the exit.
            return 0.0;
        }
        let mut re = 0.0;
        let mut im = 0.0;
        for (u, &lambda) in self.weights.iter().zip(self.eig.eigenvalues()) {
            let phase = lambda * tau;
            re += u * phase.cos();
            im -= u * phase.sin();
        }
        re * re + im * im
    }

    /// Site probabilities along the chain at dimensionless time `tau`.
    pub fn distribution(&self, tau: f64) -> Result<Vec<f64>> {
        let state =
            expm_action_eigen(&self.eig, Propagation::Unitary, tau, &entrance_state(self.eig.dim()))?;
        Ok(state.iter().map(|z| z.norm_sqr()).collect())
    }
}

/// Classical rate matrix `M = gamma (A - D)` of a glued-tree graph, where
/// `D` is the degree diagonal.
#[derive(Debug, Clone)]
pub struct CrwGenerator {
    matrix: SparseSymmetric,
    gamma: f64,
}

impl CrwGenerator {
    pub fn new(graph: &GluedTreeGraph, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        let count = graph.node_count();
        let mut degree = vec![0u32; count];
        for &(a, b) in graph.edges() {
            degree[a] += 1;
            degree[b] += 1;
        }
        let triplets = graph
            .edges()
            .iter()
            .map(|&(a, b)| (a, b, gamma))
            .chain((0..count).map(|i| (i, i, -gamma * degree[i] as f64)));
        let matrix = SparseSymmetric::from_symmetric_triplets(count, triplets)?;
        Ok(CrwGenerator { matrix, gamma })
    }

    pub fn matrix(&self) -> &SparseSymmetric {
        &self.matrix
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// Node probabilities of the quantum walk `exp(-i gamma A t)` started at
/// the entrance, at dimensionless time `tau = gamma * t`.
pub fn qw_distribution_full(graph: &GluedTreeGraph, gamma: f64, tau: f64) -> Result<Vec<f64>> {
    check_gamma(gamma)?;
    check_tau(tau)?;
    check_budget(graph)?;
    let a = graph.adjacency()?;
    let state = expm_action_krylov(
        &a,
        Propagation::Unitary,
        tau,
        &entrance_state(graph.node_count()),
        &KrylovOptions::default(),
    )?;
    Ok(state.iter().map(|z| z.norm_sqr()).collect())
}

/// Node probabilities of the classical walk `exp(M t)` started at the
/// entrance, at dimensionless time `tau = gamma * t`.
pub fn crw_distribution_full(graph: &GluedTreeGraph, gamma: f64, tau: f64) -> Result<Vec<f64>> {
    check_gamma(gamma)?;
    check_tau(tau)?;
    check_budget(graph)?;
    let generator = CrwGenerator::new(graph, gamma)?;
    let state = expm_action_krylov(
        generator.matrix(),
        Propagation::Semigroup,
        tau / gamma,
        &entrance_state(graph.node_count()),
        &KrylovOptions::default(),
    )?;
    Ok(state.iter().map(|z| z.re.max(0.0)).collect())
}

/// Exact column lumping of the classical walk.
///
/// Column occupancies form a birth-death chain: from column `j` the walker
/// moves outward at rate `B * gamma` and inward at rate `gamma`, with both
/// central rates `B * gamma`. The chain is reversible for the stationary
/// weights `N_j / N_total`, so conjugating by their square roots gives a
/// symmetric tridiagonal generator and the exit probability in closed form.
#[derive(Debug, Clone)]
pub struct LumpedCrw {
    branching: u32,
    depth: u32,
    eig: EigenSystem,
    weights: Vec<f64>,
    stationary_exit: f64,
}

impl LumpedCrw {
    pub fn new(branching: u32, depth: u32) -> Result<Self> {
        let total = node_count(branching, depth)?;
        let b = branching as f64;
        let n = depth as usize;
        let m = 2 * n + 2;

        let mut off = vec![b.sqrt(); m - 1];
        off[n] = b;
        let mut diag = vec![-(b + 1.0); m];
        diag[0] = -b;
        diag[m - 1] = -b;
        // Entrance and exit weights are equal, so the similarity transform
        // contributes no prefactor to the entrance-to-exit matrix element.
        let generator = SymTridiagonal::new(diag, off)?;
        let eig = eigh_tridiagonal(&generator)?;
        let weights = (0..m).map(|k| eig.eigenvector(k)[0] * eig.eigenvector(k)[m - 1]).collect();
        Ok(LumpedCrw { branching, depth, eig, weights, stationary_exit: 1.0 / total as f64 })
    }

    pub fn branching(&self) -> u32 {
        self.branching
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Exit probability at dimensionless time `tau`.
    pub fn exit_probability(&self, tau: f64) -> f64 {
        if tau == 0.0 {
            return 0.0;
        }
        let p: f64 = self
            .weights
            .iter()
            .zip(self.eig.eigenvalues())
            .map(|(u, &lambda)| u * (lambda * tau).exp())
            .sum();
        p.max(0.0)
    }

    /// Long-time limit of the exit probability: one over the node count.
    pub fn stationary_exit(&self) -> f64 {
        self.stationary_exit
    }
}

/// Exit probability of the lumped classical walk at dimensionless time
/// `tau`. The hopping rate only fixes the physical clock, so it is
/// validated but does not change the value.
pub fn crw_hitting_lumped(branching: u32, depth: u32, gamma: f64, tau: f64) -> Result<f64> {
    check_gamma(gamma)?;
    check_tau(tau)?;
    Ok(LumpedCrw::new(branching, depth)?.exit_probability(tau))
}

/// Exit-probability samples of one walk on a dimensionless time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingCurve {
    pub kind: WalkKind,
    pub branching: u32,
    pub depth: u32,
    pub gamma: f64,
    /// Gluing seed; meaningful only for the full-graph kinds.
    pub seed: u64,
    pub taus: Vec<f64>,
    pub values: Vec<f64>,
}

/// Time axis used when writing curves out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeUnits {
    /// Dimensionless `tau` column.
    Dimensionless,
    /// Propagation length in millimeters: `z = tau / gamma_phys` with
    /// `gamma_phys` in 1/mm.
    PhysicalMm { gamma_phys: f64 },
}

impl HittingCurve {
    /// Writes `tau,value` (or `z_mm,value`) rows with 12 significant
    /// digits; identical curves serialize to identical bytes.
    pub fn write_csv<W: std::io::Write>(&self, mut writer: W, units: &TimeUnits) -> Result<()> {
        let (header, scale) = match units {
            TimeUnits::Dimensionless => ("tau", 1.0),
            TimeUnits::PhysicalMm { gamma_phys } => {
                if !(*gamma_phys > 0.0) || !gamma_phys.is_finite() {
                    return Err(Error::parameter(format!(
                        "gamma_phys must be positive and finite, got {gamma_phys}"
                    )));
                }
                ("z_mm", 1.0 / gamma_phys)
            }
        };
        writeln!(writer, "{header},value")?;
        for (tau, value) in self.taus.iter().zip(&self.values) {
            writeln!(writer, "{:.11e},{:.11e}", tau * scale, value)?;
        }
        Ok(())
    }
}

fn check_grid(taus: &[f64]) -> Result<()> {
    if taus.is_empty() {
        return Err(Error::parameter("time grid must not be empty"));
    }
    if taus.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::parameter("time grid entries must be finite and >= 0"));
    }
    if taus.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::parameter("time grid must be strictly increasing"));
    }
    Ok(())
}

/// Samples the exit probability of the chosen walk kind on a time grid.
///
/// The full-graph kinds build the glued tree from `seed`; each grid point
/// is propagated independently from `tau = 0`, so values carry no
/// accumulated stepping error and the sweep parallelizes trivially.
pub fn sweep_curve(
    kind: WalkKind,
    branching: u32,
    depth: u32,
    gamma: f64,
    taus: &[f64],
    seed: u64,
) -> Result<HittingCurve> {
    check_gamma(gamma)?;
    check_grid(taus)?;

    let values: Vec<f64> = match kind {
        WalkKind::QwChain => {
            let chain = ChainQw::new(branching, depth)?;
            taus.iter().map(|&tau| chain.exit_probability(tau)).collect()
        }
        WalkKind::CrwLumped => {
            let lumped = LumpedCrw::new(branching, depth)?;
            taus.iter().map(|&tau| lumped.exit_probability(tau)).collect()
        }
        WalkKind::QwFull => {
            let graph = build_glued_tree(&GluedTreeParams { branching, depth, seed })?;
            let exit = graph.exit();
            taus.iter()
                .map(|&tau| Ok(qw_distribution_full(&graph, gamma, tau)?[exit]))
                .collect::<Result<_>>()?
        }
        WalkKind::CrwFull => {
            let graph = build_glued_tree(&GluedTreeParams { branching, depth, seed })?;
            let exit = graph.exit();
            taus.iter()
                .map(|&tau| Ok(crw_distribution_full(&graph, gamma, tau)?[exit]))
                .collect::<Result<_>>()?
        }
    };

    Ok(HittingCurve {
        kind,
        branching,
        depth,
        gamma,
        seed,
        taus: taus.to_vec(),
        values: values.into_iter().map(|v| v.clamp(0.0, 1.0)).collect(),
    })
}
